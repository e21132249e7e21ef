import math

import numpy as np
import pytest

import squeezer.config as config
from squeezer.models.params import SystemParams
from squeezer.models.setup import PhysicalSetup
from squeezer.physics import design
from squeezer.physics.metrics import var_dissipative
from squeezer.utils.errors import RegimeError


def instability_at_approx(setup):
    rates = design.derive_rates(setup)
    delta = design.optimal_detuning_approx(rates)
    return 4.0 * rates.g ** 2 / (rates.omega * delta)


def test_derived_rates(silica_setup):
    rates = design.derive_rates(silica_setup)
    assert rates.omega / (2.0 * math.pi) == pytest.approx(1e5, rel=0.25)
    assert rates.kappa == pytest.approx(3.1395e7, rel=1e-3)
    assert rates.mass == pytest.approx(2200.0 * 4.0 / 3.0 * math.pi * 1e-21, rel=0.05)
    assert rates.g > 0 and rates.gamma_disp > 0


def test_rate_scaling(silica_setup):
    base = design.derive_rates(silica_setup)
    powered = design.derive_rates(silica_setup.model_copy(update={"P_t": 4.0 * silica_setup.P_t}))
    assert powered.omega / base.omega == pytest.approx(2.0)
    assert powered.gamma_disp / base.gamma_disp == pytest.approx(2.0)
    assert powered.g / base.g == pytest.approx(math.sqrt(2.0))

    longer = design.derive_rates(silica_setup.with_cavity_length(4.0 * silica_setup.L_c))
    assert longer.kappa / base.kappa == pytest.approx(0.25)
    assert longer.g / base.g == pytest.approx(0.25)
    assert longer.omega == pytest.approx(base.omega)


def test_lab_units_match_si(silica_setup):
    lab = design.derive_rates(
        PhysicalSetup.from_lab_units(29.0, 0.7, 0.9, 0.8, 1064.0, 1064.0, 100.0, 300.0, 1e5)
    )
    si = design.derive_rates(silica_setup)
    for name in ("omega", "g", "kappa", "gamma_disp"):
        assert getattr(lab, name) == pytest.approx(getattr(si, name), rel=1e-12)


def test_instability_at_optimum_scaling(silica_setup):
    """Power independent, halves when the cavity is four times longer"""
    base = instability_at_approx(silica_setup)
    assert instability_at_approx(silica_setup.model_copy(update={"P_t": 3.0 * silica_setup.P_t})) == pytest.approx(base)
    assert base / instability_at_approx(silica_setup.with_cavity_length(4.0 * silica_setup.L_c)) == pytest.approx(2.0)


def test_optimal_detuning_approx():
    p = SystemParams(delta=1.0, omega=1.0, g=100.0, kappa=1.0, gamma_disp=0.01)
    assert design.optimal_detuning_approx(p) == pytest.approx(577.35, rel=1e-4)
    quadrupled = p.model_copy(update={"gamma_disp": 0.04})
    assert design.optimal_detuning_approx(quadrupled) == pytest.approx(design.optimal_detuning_approx(p) / 2.0)

    with pytest.raises(RegimeError):
        design.optimal_detuning_approx(p.model_copy(update={"gamma_disp": 0.0}))


def test_optimal_detuning_thermal_approx():
    assert design.optimal_detuning_thermal_approx(1.0, 1e3, 1.0) == pytest.approx(500.0)
    with pytest.raises(RegimeError):
        design.optimal_detuning_thermal_approx(1.0, 1e3, 0.0)


def test_exact_optimum_without_heating_hits_bound():
    opt = design.optimal_detuning_exact(1.0, 100.0, 1e3, 0.0)
    assert opt.at_bound
    assert opt.delta == pytest.approx(1e6, rel=1e-3)
    assert opt.approx is None


def test_exact_optimum_matches_approximation():
    opt = design.optimal_detuning_exact(1.0, 100.0, 1e3, 0.01)
    assert not opt.at_bound
    assert opt.approx == pytest.approx(18257.4, rel=1e-4)
    assert opt.delta == pytest.approx(opt.approx, rel=0.05)
    assert opt.value <= var_dissipative(opt.approx, 1.0, 100.0, 1e3, 0.01) * (1.0 + 1e-12)
    assert opt.s_db == pytest.approx(-10.0 * math.log10(2.0 * opt.value))


def test_exact_optimum_against_dense_grid():
    deltas = np.logspace(0.0, 6.0, 20001)
    values = [var_dissipative(d, 1.0, 100.0, 1e3, 0.01) for d in deltas]
    opt = design.optimal_detuning_exact(1.0, 100.0, 1e3, 0.01)
    assert opt.value <= min(values) * (1.0 + 1e-9)
    assert opt.delta == pytest.approx(deltas[int(np.argmin(values))], rel=1e-3)


def test_exact_thermal_optimum():
    opt = design.optimal_detuning_exact(1.0, 50.0, 1e3, n_bar_gamma=1.0, objective="thermal")
    assert opt.approx == pytest.approx(500.0)
    assert opt.delta == pytest.approx(500.0, rel=0.05)
    assert not opt.at_bound


def test_exact_optimum_rejects_bad_input():
    with pytest.raises(ValueError):
        design.optimal_detuning_exact(1.0, 10.0, 1.0, 1e-4, objective="other")
    with pytest.raises(RegimeError):
        design.optimal_detuning_exact(1.0, 0.0, 1.0, 1e-4)


def test_refinement_by_simulation():
    p = SystemParams(delta=1.0, omega=1.0, g=100.0, kappa=1.0, gamma_disp=1e-3)
    opt = design.optimal_detuning_exact(p.omega, p.g, p.kappa, p.gamma_disp)
    refined, scan = design.refine_detuning_by_simulation(p, opt, points=5)

    assert len(scan) == 5
    assert scan["delta"].iloc[2] == pytest.approx(opt.delta)
    assert scan["var_min"].notna().all()
    np.testing.assert_allclose(scan["t_reached_tr"], 8.0)
    assert refined.objective == "simulated"
    assert refined.approx == opt.delta
    assert opt.delta / 2.0 <= refined.delta <= opt.delta * 2.0
    assert refined.value == scan["var_min"].min()
    assert refined.s_db == pytest.approx(opt.s_db, abs=1.0)


def test_refinement_scan_clipped_and_stable_points_empty():
    p = SystemParams(delta=1.0, omega=1.0, g=1.0, kappa=0.01, gamma_disp=1e-4)
    opt = design.optimal_detuning_exact(p.omega, p.g, p.kappa, p.gamma_disp, delta_max=3.9)
    _, scan = design.refine_detuning_by_simulation(p, opt, span=4.0, points=9, delta_max=8.0)
    assert scan["delta"].min() >= 1.0
    assert scan["delta"].max() == pytest.approx(8.0)
    stable = scan["delta"] >= 4.0
    assert stable.any()
    assert scan.loc[stable, "var_min"].isna().all()
    assert (scan.loc[stable, "error"] == "stable").all()


def test_refinement_rejects_thermal_optimum():
    p = SystemParams(delta=1.0, omega=1.0, g=50.0, kappa=1e3)
    opt = design.optimal_detuning_exact(1.0, 50.0, 1e3, n_bar_gamma=1.0, objective="thermal")
    with pytest.raises(ValueError):
        design.refine_detuning_by_simulation(p, opt)


def test_instability_condition_at_optimum():
    kappa, gamma = 1e3, 0.01
    g = design.instability_condition_at_optimum(kappa, gamma)
    delta = g * math.sqrt(kappa / (3.0 * gamma))
    assert 4.0 * g ** 2 / delta == pytest.approx(1.0)
    assert design.far_detuning_condition_at_optimum(kappa, gamma) == pytest.approx(math.sqrt(3e-5))


def test_stability_map_cells():
    table = design.stability_map([0.01], [0.04, 0.06, 0.2])
    assert list(table.columns) == [
        "omega_over_delta", "g_over_delta", "instability_ratio", "unstable", "timescale", "timescale_approx",
    ]
    stable, near, deep = table.to_dict("records")

    assert not stable["unstable"]
    assert math.isnan(stable["timescale"])

    assert deep["instability_ratio"] == pytest.approx(16.0)
    assert deep["timescale"] == pytest.approx(1.0 / 0.038699, rel=1e-3)
    assert deep["timescale_approx"] == pytest.approx(25.0)
    assert near["timescale"] > deep["timescale"]


def test_stability_map_marginal_cell_is_stable():
    cell = design.stability_map([0.01], [0.05]).iloc[0]
    assert cell["instability_ratio"] == pytest.approx(1.0)
    assert not cell["unstable"]
    assert math.isnan(cell["timescale"])


def test_stability_map_diverges_at_threshold():
    table = design.stability_map([0.01], [0.0502, 0.051, 0.055, 0.07])
    timescales = table["timescale"].tolist()
    assert timescales == sorted(timescales, reverse=True)
    assert timescales[0] > 5.0 * timescales[-1]


def test_stability_map_thread_pool(monkeypatch):
    serial = design.stability_map([0.01, 0.02], [0.1, 0.2, 0.3])
    monkeypatch.setattr(config, "SWEEP_WORKERS", 4)
    pooled = design.stability_map([0.01, 0.02], [0.1, 0.2, 0.3])
    assert pooled.equals(serial)


def test_squeezing_map_landmarks():
    table = design.squeezing_map([1.0], [1e-4], [100.0]).iloc[0]
    assert table["s_db"] > 30.0
    assert table["far_detuned"]
    assert table["delta_opt"] < 4.0 * 100.0 ** 2

    table = design.squeezing_map([10.0], [1e-4], [10.0]).iloc[0]
    assert table["s_db"] > 3.0
    assert table["s_db"] == pytest.approx(18.2, abs=0.5)


def test_squeezing_map_small_coupling_limited_by_window():
    row = design.squeezing_map([1e-2], [1e-6], [1.0]).iloc[0]
    assert row["at_bound"]
    assert 5.5 < row["s_db"] < 6.03


def test_squeezing_map_stable_cells_are_empty():
    row = design.squeezing_map([1.0], [1e-4], [0.4]).iloc[0]
    assert not row["unstable"]
    assert math.isnan(row["s_db"])


def test_squeezing_map_monotone():
    table = design.squeezing_map([0.1, 1.0, 10.0], [1e-4], [10.0, 30.0])
    for _, group in table.groupby("g"):
        values = group.sort_values("kappa")["s_db"].tolist()
        assert values == sorted(values, reverse=True)
    by_g = table[table["kappa"] == 1.0].sort_values("g")["s_db"].tolist()
    assert by_g == sorted(by_g)


def test_squeezing_map_thermal_objective():
    row = design.squeezing_map([1e3], [1.0], [50.0], objective="thermal").iloc[0]
    assert row["delta_opt"] == pytest.approx(500.0, rel=0.05)


def test_optimize_table(silica_setup):
    table = design.optimize_table(silica_setup, [20e-6, 100e-6])
    assert (table["relative_difference"] < 0.05).all()
    assert not table["at_bound"].any()
    assert table["s_db_dissipative"].iloc[0] > table["s_db_dissipative"].iloc[1]
    assert table["instability_ratio"].iloc[0] > table["instability_ratio"].iloc[1]


def test_feasibility_sweep(silica_setup):
    table = design.feasibility_sweep(silica_setup, [100e-6], n_b_values=[0.0], samples=100)
    row = table.iloc[0]
    assert row["error"] == ""
    assert row["unstable"]
    assert row["t_reached_tr"] == pytest.approx(8.0)
    assert row["s_db_sim"] > 10.0


def test_extension_time_study(silica_setup):
    table = design.extension_time_study(silica_setup, [300e-6], [0.0, 100.0, 1e4], samples=200)
    assert (table["error"] == "").all()
    t_star = table["t_star"].tolist()
    assert all(math.isfinite(t) for t in t_star)
    assert t_star == sorted(t_star, reverse=True)
    assert (table["t_star"] > table["inv_r"]).all()
    assert table["inv_r"].nunique() == 1
