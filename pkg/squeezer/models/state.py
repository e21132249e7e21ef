from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict

import numpy as np
from numpy.typing import NDArray

from squeezer.models.params import InitialConditions

# Symplectic form for the ordering (X_a, P_a, X_b, P_b)
SYMPLECTIC_FORM = np.array(
    [
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0, 0.0],
    ]
)

MECHANICAL = slice(2, 4)


def _frozen(array: NDArray) -> NDArray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class GaussianState:
    """
    Two-mode Gaussian state of (cavity, mechanics)

    ``mean`` holds <(X_a, P_a, X_b, P_b)>, ``cov`` the symmetrized covariance
    Sigma_ij = <{dR_i, dR_j}>/2, vacuum diagonal 1/2.
    """
    mean: NDArray[np.float64]
    cov: NDArray[np.float64]

    def __post_init__(self):
        mean = _frozen(self.mean)
        cov = _frozen(self.cov)
        if mean.shape != (4,) or cov.shape != (4, 4):
            raise ValueError("GaussianState needs a 4-vector mean and a 4x4 covariance")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise ValueError("GaussianState entries must be finite")
        if not np.allclose(cov, cov.T, rtol=1e-12, atol=1e-12 * max(1.0, float(np.max(np.abs(cov))))):
            raise ValueError("covariance matrix is not symmetric")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def mechanical_cov(self) -> NDArray[np.float64]:
        return self.cov[MECHANICAL, MECHANICAL]

    @property
    def mechanical_mean(self) -> NDArray[np.float64]:
        return self.mean[MECHANICAL]

    def physicality_margin(self) -> float:
        """Smallest eigenvalue of cov + (i/2) Omega_s; non-negative for physical states"""
        return float(np.min(np.linalg.eigvalsh(self.cov + 0.5j * SYMPLECTIC_FORM)))

    def is_physical(self, tol: float = 1e-9) -> bool:
        scale = max(1.0, float(np.linalg.norm(self.cov, ord=2)))
        return self.physicality_margin() >= -tol * scale

    def to_dict(self) -> Dict[str, Any]:
        return {"mean": self.mean.tolist(), "cov": self.cov.tolist()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GaussianState":
        return cls(mean=np.asarray(data["mean"], dtype=float), cov=np.asarray(data["cov"], dtype=float))


def make_thermal_vacuum_state(ic: InitialConditions) -> GaussianState:
    """Cavity vacuum and mechanical thermal state with occupation n_bar_b"""
    if ic.n_bar_b < 0:
        raise ValueError(f"n_bar_b must be non-negative, got {ic.n_bar_b}")
    thermal = ic.n_bar_b + 0.5
    return GaussianState(mean=np.zeros(4), cov=np.diag([0.5, 0.5, thermal, thermal]))
