"""Shared fixtures: the standard two-cell working point and friends."""

from __future__ import annotations

import numpy as np
import pytest

from qamsim import build_params
from qamsim.bands import band_structure

# two-cell resonance working point used throughout: k=1, tau/2pi=1.455,
# g=0.0386, p=3, q=2 -> epsilon=-0.2827..., Omega=0.5134...
FIG_KWARGS = dict(k=1.0, tau_over_2pi=1.455, g=0.0386, p=3, q=2)

# quasimomentum that locks the (1,1) mode for a ladder state at n0=0
CAPTURE_BETA = 0.16720134348028523

# fixed point of the j=1 band map at the working point
THETA_STAR = 1.0282850261


@pytest.fixture(scope="session")
def base_params():
    return build_params(**FIG_KWARGS)


@pytest.fixture(scope="session")
def capture_params(base_params):
    return base_params.with_beta(CAPTURE_BETA)


@pytest.fixture(scope="session")
def base_band(base_params):
    return band_structure(base_params, grid_size=1024)


@pytest.fixture(scope="session")
def q1_params():
    return build_params(k=0.8, tau_over_2pi=1.02, g=0.013, p=1, q=1)


@pytest.fixture(scope="session")
def q7_params():
    return build_params(k=1.0, tau_over_2pi=1.5375, g=0.0386, p=11, q=7)


@pytest.fixture(scope="session")
def q7_band(q7_params):
    return band_structure(q7_params, grid_size=1024)


def circle_distance(a, b):
    """Pointwise distance on the circle (angles in radians)."""
    return np.abs(np.angle(np.exp(1j * (np.asarray(a) - np.asarray(b)))))


@pytest.fixture(scope="session")
def circ():
    return circle_distance
