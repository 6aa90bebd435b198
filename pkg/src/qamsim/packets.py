"""Minimum-uncertainty wave packets launched on a single band.

A packet is a Gaussian envelope on one band's eigenvector sections,

    Phi_l(theta) = N exp(-sigma^2 (m - mu)**2) * e^{-i m theta*} ... phi_jl,

built in the ladder-m representation with center mu = (n0 - j)/q and
angular width sigma = sqrt(hbar_eff / 2), hbar_eff = |epsilon| q^2, i.e.
a coherent state of the effective phase-cylinder dynamics centered at
(theta*, I0 = epsilon * mu) and projected onto band j.
"""

from __future__ import annotations

import math

import numpy as np

from .bands import BandData
from .errors import ConfigError
from .rotor import DEFAULT_SPAN, RotorState
from .spinor import SpinorField, recompose


def band_packet(
    band: BandData,
    j: int,
    n0: int,
    theta_center: float,
    sigma_theta: float | None = None,
    span: int = DEFAULT_SPAN,
) -> RotorState:
    """Gaussian packet on band j centered at ladder site n0, angle theta*."""
    params = band.params
    q = params.q
    if not 0 <= j < q:
        raise ConfigError(f"band index {j} out of range for q={q}")
    if sigma_theta is None:
        if params.epsilon == 0.0:
            raise ConfigError(
                "default packet width undefined at epsilon=0; pass sigma_theta"
            )
        sigma_theta = math.sqrt(abs(params.epsilon) * q * q / 2.0)
    if sigma_theta <= 0.0:
        raise ConfigError(f"sigma_theta must be positive, got {sigma_theta}")
    mgrid = band.grid_size
    if span // q > mgrid:
        raise ConfigError(
            f"band grid ({mgrid} points) too coarse for span {span}; "
            f"needs at least span/q points"
        )
    mu = (n0 - j) / q
    n_min = n0 - span // 2
    # envelope psi(theta_i) = sum_m exp(-sigma^2 (m-mu)^2) e^{i m (theta_i - theta*)}
    half = max(8, int(math.ceil(6.0 / (2.0 * sigma_theta**2) ** 0.5)))
    ms = np.arange(math.floor(mu) - half, math.floor(mu) + half + 1)
    cm = np.exp(-(sigma_theta**2) * (ms - mu) ** 2)
    psi = np.exp(1j * np.outer(band.theta - theta_center, ms)) @ cm.astype(complex)
    comps = psi[None, :] * band.vecs[j].T  # (q, M)
    field = SpinorField(band.theta, comps, beta=params.beta, kick_count=0)
    state = recompose(field, params, n_min, span)
    nrm = state.norm()
    if nrm <= 0.0:
        raise ConfigError("packet lost all mass during ladder truncation")
    state.amps /= math.sqrt(nrm)
    return state
