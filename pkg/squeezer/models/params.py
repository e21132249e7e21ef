import logging
import math
from typing import List

from pydantic import BaseModel, ConfigDict, Field, model_validator

logger = logging.getLogger(__name__)

# Regime thresholds used for warnings only
FAR_DETUNED_MIN_RATIO = 10.0
KAPPA_MAX_FRACTION = 0.1


class SystemParams(BaseModel):
    """
    The five model rates of a scenario

    All rates are dimensionless multiples of ``unit_scale`` (rad/s). Quadrature
    ordering everywhere is (X_a, P_a, X_b, P_b) with hbar = 1.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    delta: float = Field(gt=0, description="cavity detuning, omega_c - omega_t")
    omega: float = Field(gt=0, description="mechanical frequency")
    g: float = Field(ge=0, description="optomechanical coupling")
    kappa: float = Field(0.0, ge=0, description="cavity photon loss rate")
    gamma_disp: float = Field(0.0, ge=0, description="displacement-noise decoherence rate")
    unit_scale: float = Field(1.0, gt=0, description="reference angular frequency in rad/s")

    @model_validator(mode="after")
    def check_finite(self):
        for name in ("delta", "omega", "g", "kappa", "gamma_disp", "unit_scale"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        return self

    def with_delta(self, delta: float) -> "SystemParams":
        return self.model_copy(update={"delta": delta})


class ThermalBathParams(BaseModel):
    """Weak coupling of the mechanics to a thermal bath"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    gamma_thermal: float = Field(ge=0, allow_inf_nan=False)
    n_bar: float = Field(ge=0, allow_inf_nan=False)


class InitialConditions(BaseModel):
    """Cavity in vacuum, mechanics thermal with occupation n_bar_b"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_bar_b: float = Field(0.0, ge=0, allow_inf_nan=False)
    cavity_vacuum: bool = True


def validate_params(p: SystemParams) -> List[str]:
    """
    Check the regime assumptions used by the closed-form analytics

    Returns:
        list of warning messages (empty when every assumption holds)

    Raises:
        ValueError: on non-finite or negative-where-forbidden rates
    """
    values = {
        "delta": p.delta, "omega": p.omega, "g": p.g,
        "kappa": p.kappa, "gamma_disp": p.gamma_disp,
    }
    for name, value in values.items():
        if not math.isfinite(value):
            raise ValueError(f"{name} must be finite, got {value}")
        if value < 0:
            raise ValueError(f"{name} must be non-negative, got {value}")
    if p.delta <= 0 or p.omega <= 0:
        raise ValueError("delta and omega must be strictly positive")

    warnings = []
    if p.delta / p.omega < FAR_DETUNED_MIN_RATIO:
        warnings.append(f"far-detuned assumption weak: delta/omega = {p.delta / p.omega:.3g}")
    if p.kappa > KAPPA_MAX_FRACTION * p.delta:
        warnings.append(f"kappa << delta violated: kappa/delta = {p.kappa / p.delta:.3g}")

    for message in warnings:
        logger.warning(message)
    return warnings
