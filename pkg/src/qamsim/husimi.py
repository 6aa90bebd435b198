"""Husimi distribution of a rotor state over the effective phase cylinder.

Near a q-cell resonance the detuning epsilon plays the role of an
effective Planck constant hbar_eff = |epsilon| q^2 on the (theta, I)
cylinder.  The Husimi function is the squared overlap with minimum-
uncertainty coherent states built on each spinor component's m-ladder:

    |z> ~ sum_m exp(-sigma^2 (m - mu_l)^2) exp(-i m theta0) |m>,
    sigma^2 = hbar_eff / 2,   mu_l = I0 / epsilon - l / q,

summed incoherently over components and normalized to unit mass on the
sampling grid.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigError
from .params import SystemParams
from .rotor import RotorState


def _uniform_step(grid: np.ndarray, name: str) -> float:
    if len(grid) < 2:
        raise ConfigError(f"{name} grid needs at least 2 points")
    steps = np.diff(grid)
    step = float(steps[0])
    if not np.allclose(steps, step, rtol=1e-9, atol=0.0):
        raise ConfigError(f"{name} grid must be uniform")
    return step


def husimi(
    state: RotorState,
    theta: np.ndarray,
    action: np.ndarray,
    params: SystemParams,
) -> np.ndarray:
    """Husimi density H[i_I, i_theta] on the grid, grid-normalized to 1.

    theta and action must be uniform 1-d grids; the cell area
    d_theta * d_I times the returned array sums to 1.
    """
    if params.epsilon == 0.0:
        raise ConfigError("Husimi lens undefined at exact resonance (epsilon=0)")
    theta = np.asarray(theta, dtype=float)
    action = np.asarray(action, dtype=float)
    dth = _uniform_step(theta, "theta")
    dia = _uniform_step(action, "action")
    q = params.q
    hbar = abs(params.epsilon) * q * q
    sig2 = hbar / 2.0
    ladder = state.ladder
    out = np.zeros((len(action), len(theta)))
    for l in range(q):
        sel = np.mod(ladder, q) == l
        if not np.any(sel):
            continue
        ms = (ladder[sel] - l) // q
        coeff = state.amps[sel]
        mu = action[:, None] / params.epsilon - l / q  # (nI, 1)
        gauss = np.exp(-sig2 * (ms[None, :] - mu) ** 2)  # (nI, nm)
        norms = np.sqrt(np.sum(gauss * gauss, axis=1))
        norms[norms == 0.0] = 1.0
        weighted = (gauss / norms[:, None]) * coeff[None, :]
        phases = np.exp(1j * np.outer(ms, theta))  # (nm, nth)
        out += np.abs(weighted @ phases) ** 2
    total = out.sum() * dth * dia
    if total <= 0.0:
        raise ConfigError("state has no support on the requested grid")
    return out / total
