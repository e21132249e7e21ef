"""
Instability classification and canonical transformation to normal form

Physical operators Psi = (a, b, a^dag, b^dag) and normal-mode operators
Phi = (c1, c2, c1^dag, c2^dag) are related by Psi = T Phi with T = G^dag P G.
G maps ladder operators to quadratures ordered (X_1, X_2, P_1, P_2), so P is
the real symplectic matrix taking normal quadratures to (X_a, X_b, P_a, P_b).
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict

import numpy as np
from numpy.typing import NDArray

from squeezer.models.params import FAR_DETUNED_MIN_RATIO, SystemParams
from squeezer.utils.errors import RegimeError

logger = logging.getLogger(__name__)

# diag(1, 1, -1, -1): commutator metric for (a, b, a^dag, b^dag)
COMMUTATOR_METRIC = np.diag([1.0, 1.0, -1.0, -1.0])

# 4 g^2 within this relative distance of Delta Omega is marginal
UNSTABLE_REL_TOL = 1e-12

_I2 = np.eye(2)
G_MATRIX = np.block([[_I2, _I2], [-1j * _I2, 1j * _I2]]) / math.sqrt(2.0)


@dataclass(frozen=True)
class NormalForm:
    """Normal form of the unstable two-mode Hamiltonian"""
    zeta: float
    omega1: float
    r: float
    a_plus: float
    a_minus: float
    b_plus: float
    b_minus: float
    P: NDArray[np.float64]
    T: NDArray[np.complex128]

    @property
    def P_24(self) -> float:
        return float(self.P[1, 3])

    @property
    def T_inv(self) -> NDArray[np.complex128]:
        """Inverse of a canonical T: I T^dag I"""
        return COMMUTATOR_METRIC @ self.T.conj().T @ COMMUTATOR_METRIC

    def symplectic_defect(self) -> float:
        """Largest elementwise deviation of T^dag I T and T I T^dag from I"""
        left = self.T.conj().T @ COMMUTATOR_METRIC @ self.T - COMMUTATOR_METRIC
        right = self.T @ COMMUTATOR_METRIC @ self.T.conj().T - COMMUTATOR_METRIC
        return float(max(np.max(np.abs(left)), np.max(np.abs(right))))


def instability_ratio(p: SystemParams) -> float:
    """4 g^2 / (Delta Omega); the closed dynamics is unstable iff this exceeds 1"""
    return 4.0 * p.g ** 2 / (p.delta * p.omega)


def is_unstable(p: SystemParams) -> bool:
    """4 g^2 > Delta Omega beyond a relative tolerance; the boundary counts as stable"""
    product = p.delta * p.omega
    return 4.0 * p.g ** 2 - product > UNSTABLE_REL_TOL * product


def squeezing_rate_approx(p: SystemParams) -> float:
    """Far-detuned squeezing rate r ~ 2 g sqrt(Omega / Delta)"""
    return 2.0 * p.g * math.sqrt(p.omega / p.delta)


def _zeta_squared(delta: float, omega: float, g: float) -> float:
    return math.sqrt((delta ** 2 - omega ** 2) ** 2 + 16.0 * delta * omega * g ** 2)


def compute_normal_form(p: SystemParams) -> NormalForm:
    """
    Build the normal form of the unstable Hamiltonian

    Raises:
        RegimeError: if 4 g^2 <= Delta Omega (stable or marginal)
    """
    delta, omega, g = p.delta, p.omega, p.g
    if not is_unstable(p):
        raise RegimeError(
            f"normal form needs 4g^2 > delta*omega (ratio {instability_ratio(p):.6g})", "normalform"
        )

    zeta2 = _zeta_squared(delta, omega, g)
    zeta = math.sqrt(zeta2)
    detuning_diff = delta ** 2 - omega ** 2
    detuning_sum = delta ** 2 + omega ** 2

    # zeta^4 - (D^2 -+ W^2)^2 written without cancellation
    r2 = 2.0 * delta * omega * (4.0 * g ** 2 - delta * omega) / (zeta2 + detuning_sum)
    b_minus2 = 8.0 * delta * omega * g ** 2 / (delta ** 2 * (zeta2 + detuning_diff))
    a_minus2 = r2 / delta ** 2
    a_plus2 = (zeta2 + detuning_sum) / (2.0 * delta ** 2)
    b_plus2 = (zeta2 + detuning_diff) / (2.0 * delta ** 2)
    for name, value in (("a+", a_plus2), ("a-", a_minus2), ("b+", b_plus2), ("b-", b_minus2)):
        if not value > 0.0:
            raise RegimeError(f"negative radicand for factor {name}: {value}", "normalform")

    a_p, a_m = math.sqrt(a_plus2), math.sqrt(a_minus2)
    b_p, b_m = math.sqrt(b_plus2), math.sqrt(b_minus2)
    r = math.sqrt(r2)
    omega1 = math.sqrt((zeta2 + detuning_sum) / 2.0)

    gw = g * omega
    P = np.zeros((4, 4))
    P[0, 0] = b_p / math.sqrt(a_p) * (delta / zeta)
    P[0, 1] = -b_minus2 * delta ** 2 / (2.0 * gw)
    P[0, 3] = gw / (a_m * zeta2)
    P[1, 0] = 2.0 / (b_p * math.sqrt(a_p)) * gw / (delta * zeta)
    P[1, 1] = 1.0
    P[1, 3] = -2.0 / (a_m * b_minus2) * (gw / (delta * zeta)) ** 2
    # b-^2 D^2/(2 g W) - 2g/D reduces to -4 g D a-^2 / (zeta^2 + D^2 - W^2)
    P[2, 1] = -4.0 * g * delta * a_m / (zeta2 + detuning_diff)
    P[2, 2] = a_p ** -1.5 * (b_p * delta / zeta + 4.0 / b_p * g ** 2 * omega / (delta ** 2 * zeta))
    # the bracket equals -a-^2 g W / zeta^2
    P[2, 3] = -gw / zeta2
    P[3, 1] = a_m * delta / omega
    P[3, 2] = 2.0 * math.sqrt(a_p) / b_p * g / zeta
    P[3, 3] = 2.0 / b_minus2 * g ** 2 * omega / (delta * zeta2)

    T = G_MATRIX.conj().T @ P @ G_MATRIX
    nf = NormalForm(
        zeta=zeta, omega1=omega1, r=r,
        a_plus=a_p, a_minus=a_m, b_plus=b_p, b_minus=b_m,
        P=P, T=T,
    )
    defect = nf.symplectic_defect()
    if defect > 1e-8 * max(1.0, float(np.max(np.abs(T))) ** 2):
        raise RegimeError(f"normal-form transformation is not canonical (defect {defect:.3e})", "normalform")
    return nf


def hamiltonian_matrix(p: SystemParams) -> NDArray[np.float64]:
    """Quadratic-form matrix K with H = v^T K v / 2 for v = (X_a, X_b, P_a, P_b)"""
    return np.array(
        [
            [p.delta, 2.0 * p.g, 0.0, 0.0],
            [2.0 * p.g, p.omega, 0.0, 0.0],
            [0.0, 0.0, p.delta, 0.0],
            [0.0, 0.0, 0.0, p.omega],
        ]
    )


def normal_form_hamiltonian(p: SystemParams, nf: NormalForm) -> NDArray[np.float64]:
    """P^T K P: should read diag(w1) on (X1, P1) and r on the (X2, P2) off-diagonal"""
    return nf.P.T @ hamiltonian_matrix(p) @ nf.P


def far_detuned_P(p: SystemParams) -> NDArray[np.float64]:
    """Leading-order P for Delta >> Omega"""
    delta, omega, g = p.delta, p.omega, p.g
    if delta / omega < FAR_DETUNED_MIN_RATIO:
        logger.warning(f"far-detuned P used at delta/omega = {delta / omega:.3g}")
    s = math.sqrt(omega / delta)
    return np.array(
        [
            [1.0, -2.0 * g / delta, 0.0, 0.5 * s],
            [0.0, 1.0, 0.0, -(delta / (4.0 * g)) * s],
            [0.0, -(4.0 * g ** 2 / delta ** 2) * s, 1.0, 0.0],
            [0.0, 2.0 * g / math.sqrt(delta * omega), 2.0 * g / delta, 0.5],
        ]
    )


def c2_far_detuned_composition(p: SystemParams) -> Dict[str, complex]:
    """
    Leading-order content of c2 for Delta >> Omega

    c2 ~ mechanical * (b + b^dag) + cavity * (a^dag - a)

    Returns:
        dict with the two coefficients and their magnitude ratio
    """
    if p.delta / p.omega < FAR_DETUNED_MIN_RATIO:
        logger.warning(f"c2 composition evaluated at delta/omega = {p.delta / p.omega:.3g}")
    mechanical = -1j * p.g / math.sqrt(p.omega * p.delta)
    cavity = mechanical * 1j * math.sqrt(p.omega / p.delta)
    return {
        "mechanical": complex(mechanical),
        "cavity": complex(cavity),
        "ratio": abs(cavity) / abs(mechanical),
    }


def c2_exact_row(nf: NormalForm) -> Dict[str, complex]:
    """Coefficients of (a, b, a^dag, b^dag) in c2 from the exact inverse transformation"""
    row = nf.T_inv[1, :]
    return {"a": complex(row[0]), "b": complex(row[1]), "a_dag": complex(row[2]), "b_dag": complex(row[3])}


def normal_form_summary(p: SystemParams) -> Dict[str, object]:
    """Scalar report of the normal form, T split into real and imaginary parts"""
    ratio = instability_ratio(p)
    unstable = is_unstable(p)
    summary: Dict[str, object] = {"instability_ratio": ratio, "unstable": unstable}
    if not unstable:
        return summary
    nf = compute_normal_form(p)
    summary.update(
        {
            "zeta": nf.zeta,
            "omega1": nf.omega1,
            "r": nf.r,
            "r_far_detuned": squeezing_rate_approx(p),
            "a_plus": nf.a_plus,
            "a_minus": nf.a_minus,
            "b_plus": nf.b_plus,
            "b_minus": nf.b_minus,
            "P_24": nf.P_24,
            "symplectic_defect": nf.symplectic_defect(),
            "T_real": nf.T.real.tolist(),
            "T_imag": nf.T.imag.tolist(),
        }
    )
    return summary
