import numpy as np
import pytest

from squeezer.models.params import SystemParams
from squeezer.models.setup import PhysicalSetup
from squeezer.models.state import GaussianState


@pytest.fixture
def closed_params():
    """g/Delta = 0.2, Omega/Delta = 0.01, no losses"""
    return SystemParams(delta=1.0, omega=0.01, g=0.2)


@pytest.fixture
def lossy_params():
    return SystemParams(delta=1.0, omega=0.01, g=0.2, kappa=1e-3, gamma_disp=1e-7)


@pytest.fixture
def silica_setup():
    """100 nm silica sphere, 29 mW tweezers at 1064 nm, 300 um cavity with finesse 1e5"""
    return PhysicalSetup(
        P_t=29e-3,
        W_t=0.7e-6,
        A_x=0.9,
        A_y=0.8,
        lambda_t=1064e-9,
        lambda_c=1064e-9,
        R=100e-9,
        L_c=300e-6,
        finesse=1e5,
    )


def mechanical_state(block, mean=None):
    """Cavity in vacuum, given 2x2 mechanical covariance"""
    cov = np.eye(4) * 0.5
    cov[2:4, 2:4] = block
    full_mean = np.zeros(4)
    if mean is not None:
        full_mean[2:4] = mean
    return GaussianState(mean=full_mean, cov=cov)
