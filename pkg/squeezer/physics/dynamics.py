"""
Moment dynamics of the linearized optomechanical master equation

The full model propagates means and covariances exactly with matrix
exponentials. The reduced model follows the squeezed normal mode c2 (plus the
occupation of the bounded mode c1) in the rotating-wave approximation.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import solve_ivp
from scipy.linalg import expm

import squeezer.config as config
from squeezer.models.params import KAPPA_MAX_FRACTION, SystemParams, ThermalBathParams
from squeezer.models.state import SYMPLECTIC_FORM, GaussianState
from squeezer.physics.normalform import NormalForm, is_unstable, squeezing_rate_approx
from squeezer.utils.errors import ConfigError, IntegrationHalted, NumericalError, RegimeError

logger = logging.getLogger(__name__)

# Quadratures (X_a, P_a, X_b, P_b) -> ladder operators (a, b, a^dag, b^dag)
_S = 1.0 / math.sqrt(2.0)
LADDER_FROM_QUADRATURES = np.array(
    [
        [_S, 1j * _S, 0.0, 0.0],
        [0.0, 0.0, _S, 1j * _S],
        [_S, -1j * _S, 0.0, 0.0],
        [0.0, 0.0, _S, -1j * _S],
    ]
)


@dataclass(frozen=True)
class DriftDiffusion:
    """dSigma/dt = A Sigma + Sigma A^T + D and d<R>/dt = A <R>"""
    A: NDArray[np.float64]
    D: NDArray[np.float64]

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        D = np.array(self.D, dtype=float)
        if not np.all(np.isfinite(A)):
            raise ValueError("drift matrix must be finite")
        if not np.allclose(D, D.T) or np.min(np.linalg.eigvalsh(D)) < -1e-12:
            raise ValueError("diffusion matrix must be symmetric positive semidefinite")
        A.setflags(write=False)
        D.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "D", D)


def build_drift_diffusion(p: SystemParams) -> DriftDiffusion:
    """Drift and diffusion of the Hamiltonian with cavity loss and displacement noise"""
    A = np.array(
        [
            [-p.kappa / 2.0, p.delta, 0.0, 0.0],
            [-p.delta, -p.kappa / 2.0, -2.0 * p.g, 0.0],
            [0.0, 0.0, 0.0, p.omega],
            [-2.0 * p.g, 0.0, -p.omega, 0.0],
        ]
    )
    D = np.diag([p.kappa / 2.0, p.kappa / 2.0, 0.0, 2.0 * p.gamma_disp])
    return DriftDiffusion(A=A, D=D)


def build_drift_diffusion_thermal(p: SystemParams, th: ThermalBathParams) -> DriftDiffusion:
    """
    Same cavity block, thermal mechanical dissipator instead of displacement noise

    The mechanics gains damping gamma/2 on both quadratures and diffusion
    gamma (n_bar + 1/2) on both diagonal entries.
    """
    base = build_drift_diffusion(p.model_copy(update={"gamma_disp": 0.0}))
    A = base.A.copy()
    D = base.D.copy()
    A[2, 2] -= th.gamma_thermal / 2.0
    A[3, 3] -= th.gamma_thermal / 2.0
    D[2, 2] += th.gamma_thermal * (th.n_bar + 0.5)
    D[3, 3] += th.gamma_thermal * (th.n_bar + 0.5)
    return DriftDiffusion(A=A, D=D)


def _van_loan(dd: DriftDiffusion, dt: float) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    n = dd.A.shape[0]
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = -dd.A
    block[:n, n:] = dd.D
    block[n:, n:] = dd.A.T
    F = expm(block * dt)
    phi = F[n:, n:].T
    return phi, phi @ F[:n, n:]


def propagator(dd: DriftDiffusion, dt: float) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    Exact one-interval propagator

    Van Loan block exponentials on sub-steps with |Re lambda(A)| h <= 1,
    composed as Phi <- Phi_h Phi and Q <- Phi_h Q Phi_h^T + Q_h.

    Returns:
        (Phi, Q) with Phi = exp(A dt) and Q = int_0^dt exp(A s) D exp(A^T s) ds
    """
    rate = float(np.max(np.abs(np.linalg.eigvals(dd.A).real)))
    n_sub = max(1, math.ceil(dt * rate))
    phi_h, Q_h = _van_loan(dd, dt / n_sub)
    if n_sub == 1:
        return phi_h, (Q_h + Q_h.T) / 2.0
    phi = np.eye(dd.A.shape[0])
    Q = np.zeros_like(Q_h)
    for _ in range(n_sub):
        phi = phi_h @ phi
        Q = phi_h @ Q @ phi_h.T + Q_h
    return phi, (Q + Q.T) / 2.0


def _check_time_grid(t_grid: Sequence[float]) -> NDArray[np.float64]:
    times = np.asarray(t_grid, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ConfigError("time grid must be a non-empty 1D sequence", "dynamics")
    if not np.all(np.isfinite(times)) or times[0] < 0:
        raise ConfigError("time grid must be finite and start at t >= 0", "dynamics")
    if np.any(np.diff(times) <= 0):
        raise ConfigError("time grid must be strictly increasing", "dynamics")
    return times


def evolve(
    dd: DriftDiffusion,
    s0: GaussianState,
    t_grid: Sequence[float],
    overflow_limit: Optional[float] = None,
) -> List[GaussianState]:
    """
    Exact Gaussian evolution sampled on a strictly increasing time grid (starting from t = 0)

    Raises:
        IntegrationHalted: when a covariance entry exceeds the overflow limit
        NumericalError: if a propagated state loses physicality
    """
    times = _check_time_grid(t_grid)
    limit = config.OVERFLOW_LIMIT if overflow_limit is None else overflow_limit

    states: List[GaussianState] = []
    mean = np.array(s0.mean, dtype=float)
    cov = np.array(s0.cov, dtype=float)
    t_prev = 0.0
    for t in times:
        dt = float(t - t_prev)
        if dt > 0.0:
            phi, Q = propagator(dd, dt)
            mean = phi @ mean
            cov = phi @ cov @ phi.T + Q
            cov = (cov + cov.T) / 2.0
        if not (np.all(np.isfinite(cov)) and np.max(np.abs(cov)) <= limit):
            raise IntegrationHalted(
                f"covariance exceeded {limit:.3g}", t_reached=t_prev, states=states
            )
        state = GaussianState(mean=mean, cov=cov)
        if not state.is_physical(config.PHYSICALITY_TOL):
            raise NumericalError(
                f"state lost physicality at t={t:.6g} (margin {state.physicality_margin():.3e})",
                "dynamics",
            )
        states.append(state)
        t_prev = float(t)
    return states


def evolve_until_halt(
    dd: DriftDiffusion, s0: GaussianState, t_grid: Sequence[float]
) -> Tuple[List[GaussianState], NDArray[np.float64]]:
    """Like evolve, but returns the partial trajectory (and its times) on overflow"""
    times = _check_time_grid(t_grid)
    try:
        states = evolve(dd, s0, times)
    except IntegrationHalted as e:
        logger.info(f"integration stopped early: {e}")
        states = e.states
    return states, times[: len(states)]


def rotate_mechanical(s: GaussianState, angle: float) -> GaussianState:
    """
    Free mechanical rotation b -> b exp(-i angle)

    With angle = theta_sq + pi/2 the quadrature X(0) carries the minimal variance.
    """
    c, s_ = math.cos(angle), math.sin(angle)
    R = np.eye(4)
    R[2:4, 2:4] = [[c, s_], [-s_, c]]
    return GaussianState(mean=R @ s.mean, cov=R @ s.cov @ R.T)


@dataclass(frozen=True)
class ReducedModel:
    """
    Squeezed-mode rates and moments

    ``moments`` is (<c2^dag c2>, <c2^dag^2>, <c2^2>). ``n1`` is <c1^dag c1>,
    relaxing at ``c1_decay`` towards ``c1_pump / c1_decay``. The
    phase-sensitive c1 moments ``c1_sq`` = <c1^2>, ``c1c2`` = <c1 c2> and
    ``c1c2_dag`` = <c1 c2^dag> follow the closed normal-mode motion.
    """
    gamma_d: float
    gamma_a: float
    w: complex
    eta: complex
    moments: NDArray[np.complex128]
    n1: float = 0.0
    c1_decay: float = 0.0
    c1_pump: float = 0.0
    omega1: float = 0.0
    c1_sq: complex = 0j
    c1c2: complex = 0j
    c1c2_dag: complex = 0j

    def __post_init__(self):
        moments = np.array(self.moments, dtype=complex)
        if moments.shape != (3,):
            raise ValueError("reduced model carries exactly three moments")
        moments.setflags(write=False)
        object.__setattr__(self, "moments", moments)


def reduced_model_rates(
    p: SystemParams, nf: NormalForm, s0: Optional[GaussianState] = None
) -> ReducedModel:
    """
    Rates of the squeezed-mode master equation, with initial moments from s0

    The cavity dissipator kappa D[a] projected on c2 gives
    gamma_d = kappa |T12|^2, gamma_a = kappa |T14|^2 and w = kappa T12 T14^*.

    Raises:
        RegimeError: outside the unstable regime
    """
    if not is_unstable(p):
        raise RegimeError("reduced model needs the unstable regime", "dynamics")
    if p.kappa > KAPPA_MAX_FRACTION * p.delta:
        logger.warning(f"reduced model used with kappa/delta = {p.kappa / p.delta:.3g}")

    T = nf.T
    gamma_d = p.kappa * abs(T[0, 1]) ** 2
    gamma_a = p.kappa * abs(T[0, 3]) ** 2
    w = complex(p.kappa * T[0, 1] * np.conj(T[0, 3]))
    eta = complex(1.0 - 1j * nf.P_24)

    c1_decay = p.kappa * (abs(T[0, 0]) ** 2 - abs(T[0, 2]) ** 2)
    c1_pump = p.kappa * abs(T[0, 2]) ** 2 + p.gamma_disp * (nf.P[1, 0] ** 2 + nf.P[1, 2] ** 2)

    rm = ReducedModel(
        gamma_d=gamma_d, gamma_a=gamma_a, w=w, eta=eta, moments=np.zeros(3),
        c1_decay=c1_decay, c1_pump=c1_pump, omega1=nf.omega1,
    )
    if s0 is None:
        return rm
    C = normal_mode_matrix(nf, s0)
    moments, n1 = normal_mode_moments(nf, s0)
    return replace(
        rm, moments=moments, n1=n1,
        c1_sq=complex(C[0, 2]), c1c2=complex(C[0, 3]), c1c2_dag=complex(C[0, 1]),
    )


def far_detuned_rates(p: SystemParams) -> dict:
    """Far-detuned shortcuts for gamma_d, gamma_a, w and eta"""
    r = squeezing_rate_approx(p)
    gamma = p.kappa * p.g ** 2 / p.delta ** 2
    return {
        "gamma_d": gamma,
        "gamma_a": gamma,
        "w": complex(gamma, p.kappa * r / (4.0 * p.delta)),
        "eta": complex(1.0, math.sqrt(p.delta * p.omega) / (4.0 * p.g)),
    }


def ladder_second_moments(s: GaussianState) -> NDArray[np.complex128]:
    """Matrix <psi_i psi_j^dag> for psi = (a, b, a^dag, b^dag)"""
    raw = s.cov + np.outer(s.mean, s.mean) + 0.5j * SYMPLECTIC_FORM
    L = LADDER_FROM_QUADRATURES
    return L @ raw @ L.conj().T


def normal_mode_matrix(nf: NormalForm, s: GaussianState) -> NDArray[np.complex128]:
    """Matrix <phi_i phi_j^dag> for phi = (c1, c2, c1^dag, c2^dag)"""
    T_inv = nf.T_inv
    return T_inv @ ladder_second_moments(s) @ T_inv.conj().T


def normal_mode_moments(nf: NormalForm, s: GaussianState) -> Tuple[NDArray[np.complex128], float]:
    """
    Project a physical state on the normal modes

    Returns:
        ((<c2^dag c2>, <c2^dag^2>, <c2^2>), <c1^dag c1>)
    """
    C = normal_mode_matrix(nf, s)
    n2 = float(np.real(C[1, 1])) - 1.0
    c2_sq = complex(C[1, 3])
    n1 = float(np.real(C[0, 0])) - 1.0
    return np.array([n2, np.conj(c2_sq), c2_sq], dtype=complex), n1


def _reduced_system(rm: ReducedModel, r: float, gamma_disp: float):
    M = np.array([[0.0, r, r], [2.0 * r, 0.0, 0.0], [2.0 * r, 0.0, 0.0]], dtype=complex)
    v = np.array(
        [
            rm.gamma_a + gamma_disp * abs(rm.eta) ** 2,
            r - rm.w - gamma_disp * rm.eta ** 2,
            r - np.conj(rm.w) - gamma_disp * np.conj(rm.eta) ** 2,
        ],
        dtype=complex,
    )
    return M, v


def _phi1(lam: complex, t: float) -> complex:
    """(exp(lam t) - 1) / lam, continuous at lam = 0"""
    if abs(lam * t) < 1e-12:
        return t
    return np.expm1(lam * t) / lam


def _advance_c1(rm: ReducedModel, r: float, t: float) -> dict:
    """c1 occupation relaxes; c1 -> u1 c1 and c2 -> cosh(rt) c2 + sinh(rt) c2^dag in the cross moments"""
    n1 = float(rm.n1 + (rm.c1_pump - rm.c1_decay * rm.n1) * np.real(_phi1(-rm.c1_decay, t)))
    u1 = np.exp((-1j * rm.omega1 - rm.c1_decay / 2.0) * t)
    ch, sh = math.cosh(r * t), math.sinh(r * t)
    return {
        "n1": n1,
        "c1_sq": complex(u1 ** 2 * rm.c1_sq),
        "c1c2": complex(u1 * (ch * rm.c1c2 + sh * rm.c1c2_dag)),
        "c1c2_dag": complex(u1 * (ch * rm.c1c2_dag + sh * rm.c1c2)),
    }


def evolve_reduced(rm: ReducedModel, r: float, gamma_disp: float, t: float) -> ReducedModel:
    """
    Closed-form solution of the squeezed-mode moment equations after time t

    Uses the eigen-decomposition of the coefficient matrix (eigenvalues 0, +-2r).
    """
    if t < 0:
        raise ValueError("time must be non-negative")
    M, v = _reduced_system(rm, r, gamma_disp)
    eigvals, V = np.linalg.eig(M)
    V_inv = np.linalg.inv(V)
    y0 = V_inv @ rm.moments
    u = V_inv @ v
    y = np.array([np.exp(lam * t) * y0[k] + u[k] * _phi1(lam, t) for k, lam in enumerate(eigvals)])
    moments = V @ y
    c2_dag_sq = (moments[1] + np.conj(moments[2])) / 2.0
    cleaned = np.array([np.real(moments[0]), c2_dag_sq, np.conj(c2_dag_sq)], dtype=complex)
    return replace(rm, moments=cleaned, **_advance_c1(rm, r, t))


def evolve_reduced_numeric(rm: ReducedModel, r: float, gamma_disp: float, t: float) -> ReducedModel:
    """Numerical integration of the same system (cross-check for evolve_reduced)"""
    M, v = _reduced_system(rm, r, gamma_disp)
    if t == 0:
        return rm
    solution = solve_ivp(
        lambda _, y: M @ y + v, (0.0, t), rm.moments.astype(complex),
        method="DOP853", rtol=1e-11, atol=1e-12,
    )
    if not solution.success:
        raise NumericalError(f"reduced-model integration failed: {solution.message}", "dynamics")
    return replace(rm, moments=solution.y[:, -1], **_advance_c1(rm, r, t))


def _mode_matrix(rm: ReducedModel) -> NDArray[np.complex128]:
    n2, c2_dag_sq, c2_sq = rm.moments
    c1_sq, c1c2, c1c2_dag = rm.c1_sq, rm.c1c2, rm.c1c2_dag
    return np.array(
        [
            [rm.n1 + 1.0, c1c2_dag, c1_sq, c1c2],
            [np.conj(c1c2_dag), n2 + 1.0, c1c2, c2_sq],
            [np.conj(c1_sq), np.conj(c1c2), rm.n1, np.conj(c1c2_dag)],
            [np.conj(c1c2), c2_dag_sq, c1c2_dag, n2],
        ],
        dtype=complex,
    )


def mechanical_moments(rm: ReducedModel, nf: NormalForm) -> Tuple[float, complex]:
    """<b^dag b> and <b^2> from T <phi phi^dag> T^dag, c1 and c1-c2 moments included"""
    M = nf.T @ _mode_matrix(rm) @ nf.T.conj().T
    return float(np.real(M[1, 1])) - 1.0, complex(M[1, 3])
