"""
Squeezing diagnostics, closed-form asymptotes, extension time and Wigner grids
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

import squeezer.config as config
from squeezer.constants import HBAR
from squeezer.models.params import FAR_DETUNED_MIN_RATIO, KAPPA_MAX_FRACTION, SystemParams, ThermalBathParams
from squeezer.models.setup import PhysicalSetup
from squeezer.models.state import GaussianState
from squeezer.physics.normalform import is_unstable
from squeezer.utils.errors import NumericalError, RegimeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SqueezingReport:
    var_min: float
    theta_sq: float
    s_db: float
    n_b_mean: float
    b_sq: complex

    def to_dict(self) -> dict:
        return {
            "var_min": self.var_min,
            "theta_sq": self.theta_sq,
            "s_db": self.s_db,
            "n_b_mean": self.n_b_mean,
            "b_sq_real": self.b_sq.real,
            "b_sq_imag": self.b_sq.imag,
        }


def squeezing_db(var_min: float) -> float:
    """S = -10 log10(2 var_min); negative for anti-squeezed states"""
    return -10.0 * math.log10(2.0 * var_min)


def report_from_moments(n_b: float, b_sq: complex) -> SqueezingReport:
    """
    Build a report from <b^dag b> and <b^2>

    Raises:
        NumericalError: if the moments imply a non-positive minimal variance
    """
    var_min = 0.5 + n_b - abs(b_sq)
    if not var_min > 0.0:
        raise NumericalError(f"non-positive minimal variance {var_min:.3e}", "metrics")
    theta = (0.5 * math.atan2(b_sq.imag, b_sq.real)) % math.pi
    return SqueezingReport(
        var_min=var_min, theta_sq=theta, s_db=squeezing_db(var_min), n_b_mean=n_b, b_sq=complex(b_sq)
    )


def mechanical_moments_of_state(s: GaussianState, centered: bool = False) -> Tuple[float, complex]:
    """<b^dag b> and <b^2> of the mechanical mode, mean contributions included unless centered"""
    (sxx, sxp), (_, spp) = s.mechanical_cov
    n_b = (sxx + spp - 1.0) / 2.0
    b_sq = complex((sxx - spp) / 2.0, sxp)
    if not centered:
        mx, mp = s.mechanical_mean
        n_b += (mx ** 2 + mp ** 2) / 2.0
        b_sq += complex(mx, mp) ** 2 / 2.0
    return float(n_b), b_sq


def squeezing_report(s: GaussianState) -> SqueezingReport:
    """
    Minimal mechanical variance, squeezing angle and dB value of a state

    The variance and angle use centered moments; n_b_mean and b_sq keep the
    coherent displacement.

    Raises:
        NumericalError: for states violating the uncertainty relation
    """
    if not s.is_physical(config.PHYSICALITY_TOL):
        raise NumericalError(
            f"non-physical covariance (margin {s.physicality_margin():.3e})", "metrics"
        )
    report = report_from_moments(*mechanical_moments_of_state(s, centered=True))
    if not np.any(s.mechanical_mean):
        return report
    n_b, b_sq = mechanical_moments_of_state(s)
    return replace(report, n_b_mean=n_b, b_sq=b_sq)


def _warn_regime(p: SystemParams, label: str) -> None:
    if p.delta / p.omega < FAR_DETUNED_MIN_RATIO:
        logger.warning(f"{label}: far-detuned assumption weak (delta/omega = {p.delta / p.omega:.3g})")
    if p.kappa > KAPPA_MAX_FRACTION * p.delta:
        logger.warning(f"{label}: kappa << delta violated (kappa/delta = {p.kappa / p.delta:.3g})")


def _require_unstable(p: SystemParams, label: str) -> None:
    if not is_unstable(p):
        raise RegimeError(f"{label} needs 4 g^2 > delta*omega (g = {p.g:.6g})", "metrics")


def _require_coupling(g: float) -> None:
    if not g > 0:
        raise RegimeError(f"closed-form variance needs g > 0, got {g:.6g}", "metrics")


def asymptotic_var_lossless(p: SystemParams) -> float:
    """Omega / (2 Delta), reached from a c1 vacuum"""
    _require_unstable(p, "lossless asymptote")
    _warn_regime(p, "lossless asymptote")
    return p.omega / (2.0 * p.delta)


def asymptotic_angle(p: SystemParams) -> float:
    """theta_sq from exp(2i theta) ~ -1 + Delta Omega/(2 g^2) + i sqrt(Delta Omega)/g, in [0, pi)"""
    _require_unstable(p, "asymptotic angle")
    z = complex(-1.0 + p.delta * p.omega / (2.0 * p.g ** 2), math.sqrt(p.delta * p.omega) / p.g)
    return (0.5 * math.atan2(z.imag, z.real)) % math.pi


def var_dissipative(delta: float, omega: float, g: float, kappa: float, gamma_disp: float) -> float:
    _require_coupling(g)
    root = math.sqrt(delta / omega)
    correction = 1.0 + kappa / (4.0 * g) * root + gamma_disp * delta ** 2 / (4.0 * g ** 3) * root
    return omega / (2.0 * delta) * correction


def var_thermal(delta: float, omega: float, g: float, kappa: float, n_bar_gamma: float) -> float:
    _require_coupling(g)
    ratio = delta / omega
    correction = 1.0 + kappa / (4.0 * g) * math.sqrt(ratio) + n_bar_gamma / (2.0 * g) * ratio ** 1.5
    return omega / (2.0 * delta) * correction


def asymptotic_var_dissipative(p: SystemParams) -> float:
    """Asymptotic variance with cavity loss and displacement noise"""
    _require_unstable(p, "dissipative asymptote")
    _warn_regime(p, "dissipative asymptote")
    return var_dissipative(p.delta, p.omega, p.g, p.kappa, p.gamma_disp)


def asymptotic_var_thermal(p: SystemParams, th: ThermalBathParams) -> float:
    """Asymptotic variance with cavity loss and a thermal mechanical bath"""
    _require_unstable(p, "thermal asymptote")
    _warn_regime(p, "thermal asymptote")
    n_bar_gamma = th.n_bar * th.gamma_thermal
    if n_bar_gamma > KAPPA_MAX_FRACTION * p.delta:
        logger.warning("thermal asymptote: n_bar*gamma << delta violated")
    return var_thermal(p.delta, p.omega, p.g, p.kappa, n_bar_gamma)


def rotated_position_std(delta: float, mass: float) -> float:
    """Zero-point position width sqrt(hbar / (2 m Delta)) of the squeezed asymptotic state [m]"""
    return math.sqrt(HBAR / (2.0 * mass * delta))


def position_std(s: GaussianState, mass: float, omega: float) -> float:
    """sqrt(hbar Sigma_XbXb / (m Omega)) in meters, omega in rad/s"""
    return math.sqrt(HBAR / (mass * omega) * s.cov[2, 2])


def extension_time(
    traj: Sequence[GaussianState],
    t_grid: Sequence[float],
    setup: PhysicalSetup,
    mass: Optional[float] = None,
    omega: Optional[float] = None,
) -> float:
    """
    First time the mechanical position spread reaches 0.1 lambda_c

    ``mass`` [kg] and ``omega`` [rad/s] default to the rates derived from
    ``setup``; the result has the units of ``t_grid``.

    Returns:
        crossing time, or math.inf when the threshold is never reached
    """
    if mass is None or omega is None:
        from squeezer.physics.design import derive_rates

        rates = derive_rates(setup)
        mass = rates.mass if mass is None else mass
        omega = rates.omega if omega is None else omega
    times = np.asarray(t_grid, dtype=float)
    if len(traj) != times.size:
        raise ValueError("trajectory and time grid lengths differ")
    if np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be strictly increasing")
    threshold = 0.1 * setup.lambda_c
    widths = np.array([position_std(s, mass, omega) for s in traj])
    above = np.nonzero(widths >= threshold)[0]
    if above.size == 0:
        return math.inf
    first = int(above[0])
    if first == 0:
        return float(times[0])
    if np.any(np.diff(widths[: first + 1]) < 0):
        logger.warning("position spread is not monotone before t*; reporting the first crossing")

    curve = PchipInterpolator(times, widths - threshold)
    return float(brentq(curve, times[first - 1], times[first]))


@dataclass(frozen=True)
class WignerGrid:
    x: NDArray[np.float64]
    p: NDArray[np.float64]
    values: NDArray[np.float64]

    def triples(self) -> List[Tuple[float, float, float]]:
        """(x, p, W) rows in x-major order"""
        X, P = np.meshgrid(self.x, self.p, indexing="ij")
        return list(zip(X.ravel().tolist(), P.ravel().tolist(), self.values.ravel().tolist()))


def wigner_grid(s: GaussianState, x: Sequence[float], p: Sequence[float]) -> WignerGrid:
    """
    Gaussian Wigner function of the mechanical mode (cavity traced out)

    ``values[i, j]`` is W(x[i], p[j]).
    """
    cov = s.mechanical_cov
    det = float(np.linalg.det(cov))
    if not det > 1e-300:
        raise NumericalError("singular mechanical covariance", "metrics")
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    X, P = np.meshgrid(x, p, indexing="ij")
    delta = np.stack([X - s.mechanical_mean[0], P - s.mechanical_mean[1]], axis=-1)
    quad = np.einsum("...i,ij,...j->...", delta, np.linalg.inv(cov), delta)
    values = np.exp(-0.5 * quad) / (2.0 * math.pi * math.sqrt(det))
    return WignerGrid(x=x, p=p, values=values)
