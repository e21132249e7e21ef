"""
Bundled scenarios for the standard datasets (trajectories, maps, setup sweeps)

Every recipe is a plain Scenario; ``squeezer recipes --dump-config`` writes
them out as editable JSON files.
"""
from typing import Dict

import numpy as np

from squeezer.models.scenario import Scenario

# Closed-system configuration: g/Delta = 0.2, Omega/Delta = 0.01
CLOSED_PARAMS = {"delta": 1.0, "omega": 0.01, "g": 0.2}

# Silica sphere in a 1064 nm tweezers, lab units (mW, um, nm)
SILICA_SETUP = {
    "P_t": 29.0,
    "W_t": 0.7,
    "A_x": 0.9,
    "A_y": 0.8,
    "lambda_t": 1064.0,
    "lambda_c": 1064.0,
    "R": 100.0,
    "L_c": 300.0,
    "finesse": 1e5,
}


def _logspace(start: float, stop: float, num: int) -> list:
    return [float(x) for x in np.logspace(start, stop, num)]


def figure_recipes() -> Dict[str, Scenario]:
    recipes = {
        "wigner-snapshot": {
            "kind": "wigner",
            "params": CLOSED_PARAMS,
            "time": {"t_max": 100.0, "samples": 101},
            "wigner": {"x_range": [-3.0, 3.0], "p_range": [-3.0, 3.0], "points": 121},
        },
        "lossless-trajectories": {
            # t r stays below the overflow guard for n_b = 100
            "kind": "simulate",
            "params": CLOSED_PARAMS,
            "n_b_values": [0.0, 10.0, 100.0],
            "time": {"t_max": 250.0, "samples": 501},
        },
        "stability-map": {
            "kind": "stability-map",
            "stability_grid": {
                "omega_over_delta": _logspace(-3.0, 0.0, 31),
                "g_over_delta": _logspace(-2.0, 0.0, 41),
                "marker": [0.01, 0.2],
            },
        },
        "squeezing-map": {
            "kind": "squeezing-map",
            "squeezing_grid": {
                "kappa": _logspace(-2.0, 2.0, 21),
                "gamma_disp": _logspace(-6.0, 0.0, 25),
                "g": [1.0, 10.0, 100.0],
            },
        },
        "feasibility": {
            "kind": "feasibility",
            "setup": SILICA_SETUP,
            "lab_units": True,
            "sweep": {"L_c": _logspace(-5.0, -2.0, 16), "n_b": [0.0, 10.0, 100.0]},
        },
        "optimal-detuning": {
            "kind": "optimize",
            "setup": SILICA_SETUP,
            "lab_units": True,
            "sweep": {"L_c": _logspace(-5.0, -2.0, 31)},
        },
        "extension-time": {
            "kind": "extension-time",
            "setup": SILICA_SETUP,
            "lab_units": True,
            "sweep": {"L_c": [1e-4, 3e-4], "n_b": _logspace(0.0, 4.0, 9), "samples": 400},
        },
        "thermal-squeezing-map": {
            "kind": "squeezing-map",
            "squeezing_grid": {
                "kappa": _logspace(-2.0, 2.0, 21),
                "gamma_disp": _logspace(-6.0, 0.0, 25),
                "g": [10.0, 100.0],
                "objective": "thermal",
            },
        },
    }
    return {name: Scenario.model_validate(dict(data, name=name)) for name, data in recipes.items()}
