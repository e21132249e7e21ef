from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from squeezer.models.params import InitialConditions, SystemParams, ThermalBathParams
from squeezer.models.setup import PhysicalSetup

ScenarioKind = Literal[
    "simulate",
    "simulate-reduced",
    "normalform",
    "wigner",
    "stability-map",
    "squeezing-map",
    "feasibility",
    "optimize",
    "rates",
    "extension-time",
]

# Lab-unit keys accepted when ``lab_units`` is set, with their SI factor
LAB_UNIT_FACTORS = {
    "P_t": 1e-3,       # mW
    "W_t": 1e-6,       # um
    "lambda_t": 1e-9,  # nm
    "lambda_c": 1e-9,  # nm
    "R": 1e-9,         # nm
    "L_c": 1e-6,       # um
}


def _strictly_increasing(values: List[float], name: str) -> List[float]:
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{name} must be strictly increasing")
    return values


class _Spec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class TimeSpec(_Spec):
    """Sampling times in units of 1/unit_scale: either t_max + samples or explicit points"""
    t_max: Optional[float] = Field(None, gt=0, allow_inf_nan=False)
    samples: int = Field(201, ge=2)
    points: Optional[List[float]] = None

    @model_validator(mode="after")
    def check_grid(self):
        if self.points is not None:
            if not self.points:
                raise ValueError("time grid is empty")
            if self.points[0] < 0:
                raise ValueError("time grid must start at t >= 0")
            _strictly_increasing(self.points, "time grid")
        elif self.t_max is None:
            raise ValueError("either t_max or points is required")
        return self

    def grid(self) -> np.ndarray:
        if self.points is not None:
            return np.asarray(self.points, dtype=float)
        return np.linspace(0.0, self.t_max, self.samples)


class WignerSpec(_Spec):
    """Phase-space window for the mechanical Wigner function (evaluated at the last time)"""
    x_range: List[float] = Field(default_factory=lambda: [-5.0, 5.0], min_length=2, max_length=2)
    p_range: List[float] = Field(default_factory=lambda: [-5.0, 5.0], min_length=2, max_length=2)
    points: int = Field(101, ge=2)

    @field_validator("x_range", "p_range")
    @classmethod
    def check_range(cls, v):
        return _strictly_increasing(v, "range")


class StabilityGrid(_Spec):
    omega_over_delta: List[float] = Field(min_length=1)
    g_over_delta: List[float] = Field(min_length=1)
    marker: Optional[List[float]] = Field(None, min_length=2, max_length=2)

    @field_validator("omega_over_delta", "g_over_delta")
    @classmethod
    def check_positive(cls, v):
        if any(x <= 0 for x in v):
            raise ValueError("grid values must be positive")
        return v


class SqueezingGrid(_Spec):
    """kappa, Gamma (or n_bar gamma for the thermal objective) and g in units of Omega"""
    kappa: List[float] = Field(min_length=1)
    gamma_disp: List[float] = Field(min_length=1)
    g: List[float] = Field(min_length=1)
    objective: Literal["dissipative", "thermal"] = "dissipative"

    @field_validator("kappa", "gamma_disp", "g")
    @classmethod
    def check_positive(cls, v):
        if any(x <= 0 for x in v):
            raise ValueError("grid values must be positive")
        return v


class SweepSpec(_Spec):
    """Cavity lengths [m] and initial phonon numbers for setup sweeps"""
    L_c: List[float] = Field(min_length=1)
    n_b: List[float] = Field(default_factory=lambda: [0.0, 10.0, 100.0], min_length=1)
    plateau_tr: float = Field(8.0, gt=0)
    samples: int = Field(200, ge=2)

    @field_validator("L_c")
    @classmethod
    def check_lengths(cls, v):
        if any(x <= 0 for x in v):
            raise ValueError("cavity lengths must be positive")
        return v


class OptimizeSpec(_Spec):
    """Closed-form detuning optimization, optionally spot-checked by simulation (slow)"""
    objective: Literal["dissipative", "thermal"] = "dissipative"
    delta_max: Optional[float] = Field(None, gt=0)
    refine: bool = False
    refine_points: int = Field(7, ge=3)
    refine_span: float = Field(2.0, gt=1, allow_inf_nan=False)

    @model_validator(mode="after")
    def check_refine(self):
        if self.refine and self.objective != "dissipative":
            raise ValueError("simulation refinement supports the dissipative objective only")
        return self


class OutputSpec(_Spec):
    path: Optional[str] = None
    format: Literal["csv", "json"] = "csv"


class Scenario(_Spec):
    """One run of the command line: what to compute and where to write it"""
    name: str = "scenario"
    kind: ScenarioKind
    params: Optional[SystemParams] = None
    setup: Optional[PhysicalSetup] = None
    lab_units: bool = False
    initial: InitialConditions = InitialConditions()
    n_b_values: Optional[List[float]] = None
    thermal: Optional[ThermalBathParams] = None
    reduced: bool = False
    time: Optional[TimeSpec] = None
    wigner: Optional[WignerSpec] = None
    stability_grid: Optional[StabilityGrid] = None
    squeezing_grid: Optional[SqueezingGrid] = None
    sweep: Optional[SweepSpec] = None
    optimize: Optional[OptimizeSpec] = None
    output: OutputSpec = OutputSpec()

    @model_validator(mode="before")
    @classmethod
    def convert_lab_units(cls, data: Any) -> Any:
        if not isinstance(data, dict) or not data.get("lab_units"):
            return data
        data = dict(data)
        setup = data.get("setup")
        if isinstance(setup, dict):
            data["setup"] = {
                key: value * LAB_UNIT_FACTORS[key] if key in LAB_UNIT_FACTORS else value
                for key, value in setup.items()
            }
        data["lab_units"] = False
        return data

    @field_validator("n_b_values")
    @classmethod
    def check_occupations(cls, v):
        if v is not None and (not v or any(n < 0 for n in v)):
            raise ValueError("n_b_values must be a non-empty list of non-negative numbers")
        return v

    @model_validator(mode="after")
    def check_required(self):
        required: Dict[str, List[str]] = {
            "simulate": ["params", "time"],
            "simulate-reduced": ["params", "time"],
            "normalform": ["params"],
            "wigner": ["params", "time"],
            "stability-map": ["stability_grid"],
            "squeezing-map": ["squeezing_grid"],
            "feasibility": ["setup", "sweep"],
            "optimize": [],
            "rates": ["setup"],
            "extension-time": ["setup", "sweep"],
        }
        missing = [name for name in required[self.kind] if getattr(self, name) is None]
        if missing:
            raise ValueError(f"scenario kind '{self.kind}' requires: {', '.join(missing)}")
        if self.kind == "optimize" and self.params is None and not (self.setup and self.sweep):
            raise ValueError("scenario kind 'optimize' requires params, or setup with sweep")
        return self

    def occupations(self) -> List[float]:
        """Initial phonon numbers to simulate"""
        return self.n_b_values if self.n_b_values is not None else [self.initial.n_bar_b]

    def initial_for(self, n_b: float) -> InitialConditions:
        return self.initial.model_copy(update={"n_bar_b": n_b})
