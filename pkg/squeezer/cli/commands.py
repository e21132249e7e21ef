"""
Command-line front end: scenario files in, CSV / JSON artifacts out
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

import squeezer.config as config
from squeezer import __version__
from squeezer.models.params import validate_params
from squeezer.models.scenario import OptimizeSpec, Scenario
from squeezer.models.state import GaussianState, make_thermal_vacuum_state
from squeezer.physics import design, dynamics, metrics, normalform
from squeezer.storage.repository import ScenarioRepository
from squeezer.storage.writer import ResultWriter
from squeezer.utils.errors import ConfigError, IntegrationHalted, SqueezerError

logger = logging.getLogger(__name__)

QUADRATURES = ("xa", "pa", "xb", "pb")

# Scenario kinds each subcommand accepts
SUBCOMMAND_KINDS: Dict[str, Sequence[str]] = {
    "simulate": ("simulate", "simulate-reduced"),
    "normalform": ("normalform",),
    "wigner": ("wigner",),
    "map": ("stability-map", "squeezing-map"),
    "sweep": ("feasibility", "extension-time"),
    "optimize": ("optimize",),
    "rates": ("rates",),
}


def _state_row(t: float, n_b: float, state: GaussianState, unit_scale: float) -> Dict[str, float]:
    row = {"t": t}
    if unit_scale != 1.0:
        row["t_seconds"] = t / unit_scale
    row["n_b"] = n_b
    for i, name in enumerate(QUADRATURES):
        row[f"mean_{name}"] = state.mean[i]
    for i in range(4):
        for j in range(i, 4):
            row[f"cov_{QUADRATURES[i]}_{QUADRATURES[j]}"] = state.cov[i, j]
    report = metrics.squeezing_report(state)
    row.update(var_min=report.var_min, theta_sq=report.theta_sq, s_db=report.s_db)
    return row


def _asymptotes(scenario: Scenario) -> Dict[str, float]:
    p = scenario.params
    if not normalform.is_unstable(p):
        return {}
    if scenario.thermal is not None:
        return {"asymptotic_var": metrics.asymptotic_var_thermal(p, scenario.thermal)}
    return {
        "asymptotic_var": metrics.asymptotic_var_dissipative(p),
        "asymptotic_angle": metrics.asymptotic_angle(p),
    }


def _drift_diffusion(scenario: Scenario) -> dynamics.DriftDiffusion:
    if scenario.thermal is not None:
        return dynamics.build_drift_diffusion_thermal(scenario.params, scenario.thermal)
    return dynamics.build_drift_diffusion(scenario.params)


def simulate_full(scenario: Scenario, writer: ResultWriter):
    """Exact Gaussian trajectories, one block of rows per initial occupation"""
    p = scenario.params
    validate_params(p)
    dd = _drift_diffusion(scenario)
    times = scenario.time.grid()
    rows: List[Dict[str, float]] = []
    for n_b in scenario.occupations():
        s0 = make_thermal_vacuum_state(scenario.initial_for(n_b))
        try:
            states = dynamics.evolve(dd, s0, times)
        except IntegrationHalted as e:
            rows.extend(_state_row(t, n_b, s, p.unit_scale) for t, s in zip(times, e.states))
            writer.write_table(pd.DataFrame(rows), {"halted": {"n_b": n_b, "t_reached": e.t_reached}})
            raise
        rows.extend(_state_row(t, n_b, s, p.unit_scale) for t, s in zip(times, states))
    return writer.write_table(pd.DataFrame(rows), _asymptotes(scenario))


def simulate_reduced(scenario: Scenario, writer: ResultWriter):
    """Squeezed-mode moments and mechanical squeezing from the reduced model"""
    if scenario.thermal is not None:
        raise ConfigError("the reduced model covers cavity loss and displacement noise only", "cli")
    p = scenario.params
    validate_params(p)
    nf = normalform.compute_normal_form(p)
    times = scenario.time.grid()
    rows = []
    for n_b in scenario.occupations():
        s0 = make_thermal_vacuum_state(scenario.initial_for(n_b))
        rm = dynamics.reduced_model_rates(p, nf, s0)
        for t in times:
            rm_t = dynamics.evolve_reduced(rm, nf.r, p.gamma_disp, float(t))
            report = metrics.report_from_moments(*dynamics.mechanical_moments(rm_t, nf))
            n2, c2_dag_sq, _ = rm_t.moments
            rows.append({
                "t": t, "n_b": n_b, "n_c2": n2.real,
                "c2_dag_sq_real": c2_dag_sq.real, "c2_dag_sq_imag": c2_dag_sq.imag,
                "n_c1": rm_t.n1, "var_min": report.var_min,
                "theta_sq": report.theta_sq, "s_db": report.s_db,
            })
    extra = dict(_asymptotes(scenario), gamma_d=rm.gamma_d, gamma_a=rm.gamma_a, w=rm.w, eta=rm.eta, r=nf.r)
    return writer.write_table(pd.DataFrame(rows), extra)


def report_normal_form(scenario: Scenario, writer: ResultWriter):
    p = scenario.params
    warnings = validate_params(p)
    summary = normalform.normal_form_summary(p)
    if summary["unstable"]:
        nf = normalform.compute_normal_form(p)
        summary["c2_exact"] = normalform.c2_exact_row(nf)
        summary["c2_far_detuned"] = normalform.c2_far_detuned_composition(p)
        summary["reduced_rates"] = _reduced_rates_summary(p, nf)
    summary["warnings"] = warnings
    return writer.write_report(summary)


def _reduced_rates_summary(p, nf) -> Dict[str, object]:
    rm = dynamics.reduced_model_rates(p, nf)
    return {
        "exact": {"gamma_d": rm.gamma_d, "gamma_a": rm.gamma_a, "w": rm.w, "eta": rm.eta},
        "far_detuned": dynamics.far_detuned_rates(p),
    }


def wigner(scenario: Scenario, writer: ResultWriter):
    """Mechanical Wigner function at the last sampled time"""
    spec = scenario.wigner
    n_b = scenario.occupations()[0]
    s0 = make_thermal_vacuum_state(scenario.initial_for(n_b))
    states = dynamics.evolve(_drift_diffusion(scenario), s0, scenario.time.grid())
    x = np.linspace(spec.x_range[0], spec.x_range[1], spec.points)
    p = np.linspace(spec.p_range[0], spec.p_range[1], spec.points)
    grid = metrics.wigner_grid(states[-1], x, p)
    frame = pd.DataFrame(grid.triples(), columns=["x", "p", "W"])
    report = metrics.squeezing_report(states[-1])
    return writer.write_table(frame, {"t": float(scenario.time.grid()[-1]), "report": report.to_dict()})


def maps(scenario: Scenario, writer: ResultWriter):
    if scenario.kind == "stability-map":
        grid = scenario.stability_grid
        frame = design.stability_map(grid.omega_over_delta, grid.g_over_delta)
        return writer.write_table(frame, {"marker": grid.marker} if grid.marker else None)
    grid = scenario.squeezing_grid
    frame = design.squeezing_map(grid.kappa, grid.gamma_disp, grid.g, objective=grid.objective)
    return writer.write_table(frame)


def sweeps(scenario: Scenario, writer: ResultWriter):
    spec = scenario.sweep
    if scenario.kind == "feasibility":
        frame = design.feasibility_sweep(
            scenario.setup, spec.L_c, spec.n_b, plateau_tr=spec.plateau_tr, samples=spec.samples
        )
    else:
        frame = design.extension_time_study(scenario.setup, spec.L_c, spec.n_b, samples=spec.samples)
    failed = int((frame["error"] != "").sum())
    if failed:
        logger.warning(f"{failed} of {len(frame)} sweep points failed")
    return writer.write_table(frame, {"failed_points": failed})


def optimize(scenario: Scenario, writer: ResultWriter):
    spec = scenario.optimize or OptimizeSpec()
    if scenario.params is None:
        frame = design.optimize_table(scenario.setup, scenario.sweep.L_c)
        return writer.write_table(frame, _approximation_range(frame))

    p = scenario.params
    n_bar_gamma = scenario.thermal.n_bar * scenario.thermal.gamma_thermal if scenario.thermal else 0.0
    opt = design.optimal_detuning_exact(
        p.omega, p.g, p.kappa, gamma_disp=p.gamma_disp, n_bar_gamma=n_bar_gamma,
        objective=spec.objective, delta_max=spec.delta_max,
    )
    payload = {
        "delta_opt": opt.delta, "delta_opt_approx": opt.approx, "at_bound": opt.at_bound,
        "objective": opt.objective, "var_min": opt.value, "s_db": opt.s_db,
        "instability_ratio": normalform.instability_ratio(p.with_delta(opt.delta)),
    }
    if p.gamma_disp > 0 and p.kappa > 0:
        payload["min_g_for_instability"] = design.instability_condition_at_optimum(p.kappa, p.gamma_disp)
        payload["far_detuning_g_scale"] = design.far_detuning_condition_at_optimum(p.kappa, p.gamma_disp)
    if spec.refine:
        refined, scan = design.refine_detuning_by_simulation(
            p, opt, span=spec.refine_span, points=spec.refine_points, delta_max=spec.delta_max
        )
        payload["refined"] = {
            "delta_opt": refined.delta, "var_min": refined.value, "s_db": refined.s_db,
            "at_bound": refined.at_bound, "scan": scan.to_dict(orient="records"),
        }
    return writer.write_report(payload)


def _approximation_range(frame: pd.DataFrame, tolerance: float = 0.05) -> Dict[str, object]:
    """Where the approximate optimal detuning stays within tolerance of the exact one"""
    worst = float(frame["relative_difference"].max())
    close = frame.loc[frame["relative_difference"] < tolerance, "L_c"]
    if worst > tolerance:
        logger.warning(f"approximate optimal detuning off by up to {worst:.1%} in this sweep")
    return {
        "max_relative_difference": worst,
        "L_c_within_5pct": [float(close.min()), float(close.max())] if len(close) else None,
    }


def rates(scenario: Scenario, writer: ResultWriter):
    derived, opt = design.optimal_rates(scenario.setup)
    p = design.to_system_params(derived, opt.delta)
    payload = {
        "derived": derived.model_dump(),
        "delta_opt": opt.delta,
        "delta_opt_approx": design.optimal_detuning_approx(derived),
        "system_params": p.model_dump(),
        "instability_ratio": normalform.instability_ratio(p),
        "position_std_asymptotic": metrics.rotated_position_std(opt.delta, derived.mass),
    }
    return writer.write_report(payload)


HANDLERS: Dict[str, Callable[[Scenario, ResultWriter], Optional[Path]]] = {
    "simulate": simulate_full,
    "simulate-reduced": simulate_reduced,
    "normalform": report_normal_form,
    "wigner": wigner,
    "stability-map": maps,
    "squeezing-map": maps,
    "feasibility": sweeps,
    "extension-time": sweeps,
    "optimize": optimize,
    "rates": rates,
}


def run_scenario(scenario: Scenario, out: Optional[str] = None, fmt: Optional[str] = None) -> Optional[Path]:
    """
    Run one scenario and write its artifact

    Raises:
        SqueezerError: configuration, regime or numerical failures
    """
    if scenario.kind == "simulate" and scenario.reduced:
        scenario = scenario.model_copy(update={"kind": "simulate-reduced"})
    writer = ResultWriter(scenario, out or scenario.output.path, fmt)
    logger.info(f"running {scenario.kind} scenario '{scenario.name}'")
    return HANDLERS[scenario.kind](scenario, writer)


def run(scenario: Scenario, out: Optional[str] = None, fmt: Optional[str] = None) -> int:
    """Run a scenario and map failures to exit codes (0 on success)"""
    try:
        run_scenario(scenario, out, fmt)
    except SqueezerError as e:
        logger.error(str(e))
        return e.exit_code
    return 0


def _load_for(args: argparse.Namespace) -> Scenario:
    if not args.config:
        raise ConfigError(f"'{args.command}' needs --config PATH", "cli")
    scenario = ScenarioRepository.load(args.config)
    if scenario.kind not in SUBCOMMAND_KINDS[args.command]:
        raise ConfigError(
            f"scenario kind '{scenario.kind}' does not belong to subcommand '{args.command}'", "cli"
        )
    updates = {}
    if getattr(args, "reduced", False):
        updates["kind"] = "simulate-reduced"
    if getattr(args, "thermal_bath", False) and scenario.thermal is None:
        raise ConfigError("--thermal-bath needs a 'thermal' block in the scenario", "cli")
    if args.command == "simulate" and not args.thermal_bath and scenario.thermal is not None:
        logger.info("thermal block ignored without --thermal-bath")
        updates["thermal"] = None
    return scenario.model_copy(update=updates) if updates else scenario


def _run_recipes(args: argparse.Namespace) -> int:
    from squeezer.cli.recipes import figure_recipes

    recipes = figure_recipes()
    if args.list:
        for name, scenario in recipes.items():
            sys.stdout.write(f"{name}\t{scenario.kind}\n")
        return 0
    names = args.names or list(recipes)
    unknown = [n for n in names if n not in recipes]
    if unknown:
        raise ConfigError(f"unknown recipe(s): {', '.join(unknown)}", "cli")

    out_dir = Path(args.out_dir)
    status = 0
    for name in names:
        scenario = recipes[name]
        if args.dump_config:
            ScenarioRepository.save(scenario, out_dir / f"{name}.json")
            continue
        suffix = "json" if scenario.kind in ("normalform", "rates") else (args.format or "csv")
        code = run(scenario, str(out_dir / f"{name}.{suffix}"), args.format)
        status = status or code
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="squeezer", description="Mechanical squeezing by unstable optomechanical dynamics"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    def scenario_command(name: str, help_text: str) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--config", metavar="PATH", help="scenario file (JSON)")
        sub.add_argument("--out", metavar="PATH", help="output file (default: scenario output.path or stdout)")
        sub.add_argument("--format", choices=("csv", "json"), help="output format")
        sub.add_argument("--dump-config", action="store_true", help="print the validated scenario and exit")
        return sub

    simulate = scenario_command("simulate", "simulate moment dynamics")
    simulate.add_argument("--reduced", action="store_true", help="use the squeezed-mode reduced model")
    simulate.add_argument("--thermal-bath", action="store_true", help="require the thermal mechanical dissipator")
    scenario_command("normalform", "normal form, squeezing rate and reduced-model rates")
    scenario_command("wigner", "mechanical Wigner function grid")
    scenario_command("map", "stability or squeezing map")
    scenario_command("sweep", "feasibility or extension-time sweep over cavity length")
    scenario_command("optimize", "optimal detuning")
    scenario_command("rates", "model rates of a physical setup")

    recipes = subparsers.add_parser("recipes", help="bundled scenarios (trajectories, maps, setup sweeps)")
    recipes.add_argument("names", nargs="*", help="recipes to run (default: all)")
    recipes.add_argument("--list", action="store_true", help="list recipe names")
    recipes.add_argument("--out-dir", default=config.OUTPUT_DIR, help="directory for the artifacts")
    recipes.add_argument("--format", choices=("csv", "json"), help="format for tabular artifacts")
    recipes.add_argument("--dump-config", action="store_true", help="write recipe scenarios instead of running")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "recipes":
            return _run_recipes(args)
        scenario = _load_for(args)
        if args.dump_config:
            sys.stdout.write(ScenarioRepository.dumps(scenario) + "\n")
            return 0
        run_scenario(scenario, args.out, args.format)
    except SqueezerError as e:
        logger.error(str(e))
        return e.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
