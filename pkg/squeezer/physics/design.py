"""
Coherent-scattering setups mapped to model rates, optimal detuning and sweeps
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, List, Literal, Optional, Sequence, Tuple, TypeVar, Union

import numpy as np
import pandas as pd
from scipy.optimize import minimize_scalar

import squeezer.config as config
from squeezer.constants import HBAR, SPEED_OF_LIGHT, TWO_PI, VACUUM_PERMITTIVITY
from squeezer.models.params import FAR_DETUNED_MIN_RATIO, InitialConditions, SystemParams
from squeezer.models.setup import DerivedRates, PhysicalSetup
from squeezer.models.state import make_thermal_vacuum_state
from squeezer.physics.dynamics import build_drift_diffusion, evolve_until_halt
from squeezer.physics.metrics import (
    extension_time,
    squeezing_db,
    squeezing_report,
    var_dissipative,
    var_thermal,
)
from squeezer.physics.normalform import compute_normal_form, instability_ratio, is_unstable, squeezing_rate_approx
from squeezer.utils.errors import NumericalError, RegimeError, SqueezerError

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

UNBOUNDED_DETUNING_FACTOR = 1e6


def derive_rates(setup: PhysicalSetup) -> DerivedRates:
    """Trap frequency, coupling and decoherence rates of a coherent-scattering setup (SI)"""
    c = SPEED_OF_LIGHT
    eps0 = VACUUM_PERMITTIVITY
    volume = 4.0 / 3.0 * math.pi * setup.R ** 3
    mass = setup.rho_mass * volume
    alpha = 3.0 * eps0 * volume * (setup.epsilon_rel - 1.0) / (setup.epsilon_rel + 2.0)
    omega_c = TWO_PI * c / setup.lambda_c
    omega_t = TWO_PI * c / setup.lambda_t
    W_c = math.sqrt(c * setup.L_c / omega_c)
    asym = setup.A_y / setup.A_x

    omega = 2.0 / (setup.A_y ** 2 * setup.W_t ** 2) * math.sqrt(
        setup.P_t * alpha / (math.pi * eps0 * c * mass) * asym
    )
    g = (
        1.0 / (c * W_c)
        * (setup.P_t / (4.0 * c * mass * setup.L_c ** 2) * asym * (alpha * omega_c ** 2 / (math.pi * eps0)) ** 3) ** 0.25
    )
    kappa = math.pi * c / (setup.L_c * setup.finesse)
    gamma_disp = omega_t ** 2 / (30.0 * c ** 5) * math.sqrt(
        setup.P_t / (c * mass) * asym * (alpha * omega_t ** 2 / (math.pi * eps0)) ** 3
    )
    return DerivedRates(
        omega=omega, g=g, kappa=kappa, gamma_disp=gamma_disp,
        mass=mass, alpha=alpha, W_c=W_c, omega_c=omega_c, omega_t=omega_t,
    )


def to_system_params(rates: DerivedRates, delta: float) -> SystemParams:
    """Dimensionless parameters in units of the trap frequency; delta in rad/s"""
    scale = rates.omega
    return SystemParams(
        delta=delta / scale,
        omega=1.0,
        g=rates.g / scale,
        kappa=rates.kappa / scale,
        gamma_disp=rates.gamma_disp / scale,
        unit_scale=scale,
    )


def optimal_detuning_approx(rates: Union[DerivedRates, SystemParams]) -> float:
    """
    Delta_opt ~ g sqrt(kappa / (3 Gamma))

    Raises:
        RegimeError: for Gamma = 0 (no finite optimum)
    """
    if rates.gamma_disp <= 0:
        raise RegimeError("no finite optimal detuning without displacement noise", "design")
    return rates.g * math.sqrt(rates.kappa / (3.0 * rates.gamma_disp))


def optimal_detuning_thermal_approx(omega: float, kappa: float, n_bar_gamma: float) -> float:
    """Delta_opt ~ Omega kappa / (2 n_bar gamma) for the thermal optomechanical dissipator"""
    if n_bar_gamma <= 0:
        raise RegimeError("no finite optimal detuning without thermal heating", "design")
    return omega * kappa / (2.0 * n_bar_gamma)


def instability_condition_at_optimum(kappa: float, gamma_disp: float) -> float:
    """Minimal g/Omega for the system to stay unstable at the approximate optimal detuning"""
    return math.sqrt(kappa / (48.0 * gamma_disp))


def far_detuning_condition_at_optimum(kappa: float, gamma_disp: float) -> float:
    """g/Omega must greatly exceed this for Delta_opt >> Omega"""
    return math.sqrt(3.0 * gamma_disp / kappa)


@dataclass(frozen=True)
class DetuningOptimum:
    delta: float
    value: float
    at_bound: bool
    objective: str
    approx: Optional[float] = None

    @property
    def s_db(self) -> float:
        return squeezing_db(self.value)


def optimal_detuning_exact(
    omega: float,
    g: float,
    kappa: float,
    gamma_disp: float = 0.0,
    n_bar_gamma: float = 0.0,
    objective: Literal["dissipative", "thermal"] = "dissipative",
    delta_max: Optional[float] = None,
) -> DetuningOptimum:
    """
    Minimize the closed-form asymptotic variance over Delta in [Omega, delta_max]

    The search runs in log(Delta) with bounded Brent minimization. The default
    upper bound is 1e6 * Omega.

    Raises:
        NumericalError: empty bracket or failed minimization
    """
    if objective == "dissipative":
        def variance(delta: float) -> float:
            return var_dissipative(delta, omega, g, kappa, gamma_disp)
        approx = g * math.sqrt(kappa / (3.0 * gamma_disp)) if gamma_disp > 0 else None
    elif objective == "thermal":
        def variance(delta: float) -> float:
            return var_thermal(delta, omega, g, kappa, n_bar_gamma)
        approx = omega * kappa / (2.0 * n_bar_gamma) if n_bar_gamma > 0 else None
    else:
        raise ValueError(f"unknown objective {objective!r}")
    if g <= 0:
        raise RegimeError("optimal detuning needs g > 0", "design")

    upper = UNBOUNDED_DETUNING_FACTOR * omega if delta_max is None else delta_max
    lo, hi = math.log(omega), math.log(upper)
    if not hi > lo:
        raise NumericalError(f"empty detuning bracket [{omega:.6g}, {upper:.6g}]", "design")

    result = minimize_scalar(
        lambda u: variance(math.exp(u)), bounds=(lo, hi), method="bounded", options={"xatol": 1e-7}
    )
    if not result.success:
        raise NumericalError(f"detuning minimization failed: {result.message}", "design")

    delta = math.exp(result.x)
    at_bound = min(result.x - lo, hi - result.x) < 1e-4
    if at_bound:
        logger.warning(f"optimal detuning {delta:.6g} sits at the search bound")
    return DetuningOptimum(
        delta=delta, value=float(variance(delta)), at_bound=at_bound, objective=objective, approx=approx
    )


def refine_detuning_by_simulation(
    p: SystemParams,
    opt: DetuningOptimum,
    span: float = 2.0,
    points: int = 7,
    plateau_tr: float = 8.0,
    samples: int = 200,
    delta_max: Optional[float] = None,
) -> Tuple[DetuningOptimum, pd.DataFrame]:
    """
    Spot check of a closed-form optimum with full Gaussian simulations

    Detunings are log-spaced within a factor ``span`` of ``opt.delta``
    (clipped to [Omega, delta_max]). Each point evolves the ground state to
    t r = plateau_tr; the detuning of ``p`` is ignored. Stable or failed
    points keep NaN variances.

    Returns:
        (optimum with objective "simulated" and the closed-form delta as
        ``approx``, one row per detuning)

    Raises:
        NumericalError: when no point produced a variance
    """
    if opt.objective != "dissipative":
        raise ValueError("simulation refinement covers the dissipative objective only")
    lo = max(p.omega, opt.delta / span)
    hi = opt.delta * span if delta_max is None else min(opt.delta * span, delta_max)
    if not hi > lo:
        raise NumericalError(f"empty refinement range [{lo:.6g}, {hi:.6g}]", "design")
    deltas = np.geomspace(lo, hi, points)
    s0 = make_thermal_vacuum_state(InitialConditions())

    def point(delta):
        q = p.with_delta(float(delta))
        row = {
            "delta": float(delta), "var_min": math.nan, "s_db": math.nan,
            "var_closed_form": var_dissipative(q.delta, q.omega, q.g, q.kappa, q.gamma_disp) if q.g > 0 else math.nan,
            "t_reached_tr": math.nan, "error": "",
        }
        if not is_unstable(q):
            row["error"] = "stable"
            return row
        try:
            r = compute_normal_form(q).r
            times = np.linspace(0.0, plateau_tr / r, samples)
            states, reached = evolve_until_halt(build_drift_diffusion(q), s0, times)
            report = squeezing_report(states[-1])
            row.update(var_min=report.var_min, s_db=report.s_db, t_reached_tr=float(reached[-1] * r))
        except SqueezerError as e:
            logger.debug(f"refinement point delta={delta:.6g} failed", exc_info=True)
            row["error"] = str(e)
        return row

    frame = pd.DataFrame(_run_points(point, deltas))
    valid = frame["var_min"].notna()
    if not valid.any():
        raise NumericalError("no refinement point produced a variance", "design")
    best = int(frame.loc[valid, "var_min"].idxmin())
    at_bound = best in (0, len(frame) - 1)
    if at_bound:
        logger.warning(f"simulated optimum {frame.at[best, 'delta']:.6g} sits at the edge of the scan")
    refined = DetuningOptimum(
        delta=float(frame.at[best, "delta"]), value=float(frame.at[best, "var_min"]),
        at_bound=at_bound, objective="simulated", approx=opt.delta,
    )
    return refined, frame


def _run_points(fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """Map over independent sweep points, optionally on a thread pool (order preserved)"""
    items = list(items)
    if config.SWEEP_WORKERS > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=config.SWEEP_WORKERS) as executor:
            return list(executor.map(fn, items))
    return [fn(item) for item in items]


def stability_map(omega_over_delta: Sequence[float], g_over_delta: Sequence[float]) -> pd.DataFrame:
    """
    Stable/unstable classification and squeezing timescale Delta/r on a grid (Delta = 1)

    ``timescale`` uses the exact r, ``timescale_approx`` the far-detuned one.
    """
    def cell(point):
        w, g = point
        p = SystemParams(delta=1.0, omega=w, g=g)
        unstable = is_unstable(p)
        row = {
            "omega_over_delta": w, "g_over_delta": g, "instability_ratio": instability_ratio(p),
            "unstable": unstable, "timescale": math.nan,
            "timescale_approx": 1.0 / squeezing_rate_approx(p) if g > 0 else math.nan,
        }
        if unstable:
            try:
                row["timescale"] = 1.0 / compute_normal_form(p).r
            except RegimeError as e:
                logger.debug(f"no normal form at {point}: {e}")
        return row

    points = [(w, g) for w in omega_over_delta for g in g_over_delta]
    return pd.DataFrame(_run_points(cell, points))


def squeezing_map(
    kappa_values: Sequence[float],
    gamma_values: Sequence[float],
    g_values: Sequence[float],
    objective: Literal["dissipative", "thermal"] = "dissipative",
) -> pd.DataFrame:
    """
    Asymptotic squeezing at optimal detuning on a (kappa, Gamma) grid per g (units of Omega)

    With the thermal objective the second axis holds n_bar * gamma. The
    detuning search is restricted to the unstable window Delta < 4 g^2 / Omega.
    """
    def cell(point):
        g, kappa, gamma = point
        row = {
            "g": g, "kappa": kappa, "gamma_disp": gamma, "delta_opt": math.nan,
            "var_min": math.nan, "s_db": math.nan, "at_bound": False,
            "unstable": 4.0 * g ** 2 > 1.0, "far_detuned": False,
        }
        if not row["unstable"]:
            return row
        try:
            heating = {"gamma_disp": gamma} if objective == "dissipative" else {"n_bar_gamma": gamma}
            opt = optimal_detuning_exact(
                1.0, g, kappa, objective=objective, delta_max=4.0 * g ** 2 * (1.0 - 1e-9), **heating
            )
        except SqueezerError as e:
            logger.debug(f"squeezing map cell {point} failed: {e}", exc_info=True)
            return row
        row.update(
            delta_opt=opt.delta, var_min=opt.value, s_db=opt.s_db, at_bound=opt.at_bound,
            far_detuned=opt.delta >= FAR_DETUNED_MIN_RATIO,
        )
        return row

    points = [(g, k, gm) for g in g_values for k in kappa_values for gm in gamma_values]
    return pd.DataFrame(_run_points(cell, points))


def optimal_rates(setup: PhysicalSetup) -> tuple:
    """(DerivedRates, exact DetuningOptimum) for a setup"""
    rates = derive_rates(setup)
    opt = optimal_detuning_exact(rates.omega, rates.g, rates.kappa, rates.gamma_disp)
    return rates, opt


def optimize_table(setup: PhysicalSetup, L_c_values: Sequence[float]) -> pd.DataFrame:
    """Approximate and exact optimal detuning against cavity length (SI rates)"""
    def point(L_c):
        rates, opt = optimal_rates(setup.with_cavity_length(L_c))
        approx = optimal_detuning_approx(rates)
        return {
            "L_c": L_c, "omega": rates.omega, "g": rates.g, "kappa": rates.kappa,
            "gamma_disp": rates.gamma_disp, "delta_opt_approx": approx, "delta_opt_exact": opt.delta,
            "relative_difference": abs(approx - opt.delta) / opt.delta, "at_bound": opt.at_bound,
            "instability_ratio": 4.0 * rates.g ** 2 / (rates.omega * opt.delta),
            "var_min_dissipative": opt.value, "s_db_dissipative": opt.s_db,
        }

    return pd.DataFrame(_run_points(point, L_c_values))


def feasibility_sweep(
    setup: PhysicalSetup,
    L_c_values: Sequence[float],
    n_b_values: Sequence[float] = (0.0, 10.0, 100.0),
    plateau_tr: float = 8.0,
    samples: int = 200,
) -> pd.DataFrame:
    """
    Simulated asymptotic squeezing against cavity length at the exact optimal detuning

    Each point runs the full Gaussian dynamics (units of Omega) to t r = plateau_tr.
    Failed points keep their analytic columns and record the error.
    """
    def point(item):
        L_c, n_b = item
        row = {"L_c": L_c, "n_b": n_b, "s_db_sim": math.nan, "t_reached_tr": math.nan, "error": ""}
        try:
            rates, opt = optimal_rates(setup.with_cavity_length(L_c))
            p = to_system_params(rates, opt.delta)
            unstable = is_unstable(p)
            row.update(
                omega=rates.omega, g=rates.g, kappa=rates.kappa, gamma_disp=rates.gamma_disp,
                delta_opt=opt.delta, instability_ratio=instability_ratio(p), unstable=unstable,
                s_db_lossless=squeezing_db(p.omega / (2.0 * p.delta)), s_db_dissipative=opt.s_db,
            )
            r = compute_normal_form(p).r if unstable else squeezing_rate_approx(p)
            times = np.linspace(0.0, plateau_tr / r, samples)
            s0 = make_thermal_vacuum_state(InitialConditions(n_bar_b=n_b))
            states, reached = evolve_until_halt(build_drift_diffusion(p), s0, times)
            row["s_db_sim"] = squeezing_report(states[-1]).s_db
            row["t_reached_tr"] = float(reached[-1] * r)
        except SqueezerError as e:
            logger.debug(f"feasibility point L_c={L_c}, n_b={n_b} failed", exc_info=True)
            row["error"] = str(e)
        return row

    items = [(L_c, n_b) for L_c in L_c_values for n_b in n_b_values]
    return pd.DataFrame(_run_points(point, items))


def extension_time_study(
    setup: PhysicalSetup,
    L_c_values: Sequence[float],
    n_b_values: Sequence[float],
    samples: int = 400,
) -> pd.DataFrame:
    """
    Extension time t* and squeezing time 1/r (seconds) against initial phonon number
    """
    def point(item):
        L_c, n_b = item
        row = {"L_c": L_c, "n_b": n_b, "t_star": math.nan, "inv_r": math.nan, "error": ""}
        try:
            rates, opt = optimal_rates(setup.with_cavity_length(L_c))
            p = to_system_params(rates, opt.delta)
            r = compute_normal_form(p).r
            row["inv_r"] = 1.0 / (r * p.unit_scale)

            # Sigma_XbXb at the threshold, units of the zero-point variance
            target = (0.1 * setup.lambda_c) ** 2 * rates.mass * rates.omega / HBAR
            t_guess = math.log(max(4.0 * target, math.e)) / (2.0 * r)
            times = np.linspace(0.0, 1.5 * t_guess + 2.0 / r, samples)
            s0 = make_thermal_vacuum_state(InitialConditions(n_bar_b=n_b))
            states, reached = evolve_until_halt(build_drift_diffusion(p), s0, times)
            t_star = extension_time(states, reached, setup, mass=rates.mass, omega=rates.omega)
            row["t_star"] = t_star / p.unit_scale
        except SqueezerError as e:
            logger.debug(f"extension time point L_c={L_c}, n_b={n_b} failed", exc_info=True)
            row["error"] = str(e)
        row["t_star_over_inv_r"] = row["t_star"] / row["inv_r"]
        return row

    items = [(L_c, n_b) for L_c in L_c_values for n_b in n_b_values]
    return pd.DataFrame(_run_points(point, items))
