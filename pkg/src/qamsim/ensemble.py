"""Incoherent ensembles of rotor plane waves.

An atom cloud with a broad momentum distribution is modeled as a weighted
incoherent mixture of plane waves; each member carries its own
quasimomentum beta, which is conserved by the dynamics, so members evolve
independently (and in parallel).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .rotor import DEFAULT_SPAN, RotorState, plane_wave

FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))


@dataclass
class Ensemble:
    """Weighted incoherent mixture of rotor states."""

    members: list[RotorState]
    weights: np.ndarray

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=float)
        if len(self.weights) != len(self.members):
            raise ConfigError(
                f"{len(self.members)} members but {len(self.weights)} weights"
            )
        if len(self.members) == 0:
            raise ConfigError("ensemble needs at least one member")
        if np.any(self.weights < 0.0):
            raise ConfigError("ensemble weights must be nonnegative")
        tot = float(self.weights.sum())
        if not math.isclose(tot, 1.0, rel_tol=0.0, abs_tol=1e-9):
            raise ConfigError(f"ensemble weights sum to {tot}, expected 1")

    def __len__(self) -> int:
        return len(self.members)

    @property
    def kick_count(self) -> int:
        counts = {m.kick_count for m in self.members}
        if len(counts) != 1:
            raise ConfigError("ensemble members have unequal kick counts")
        return counts.pop()

    def mean_momentum(self) -> float:
        return float(
            sum(w * m.mean_momentum() for w, m in zip(self.weights, self.members))
        )


def sample_gaussian_ensemble(
    fwhm: float,
    count: int,
    seed: int,
    mean: float = 0.0,
    beta: float | None = None,
    span: int = DEFAULT_SPAN,
) -> Ensemble:
    """Sample plane waves p_i ~ N(mean, sigma), sigma = fwhm / 2 sqrt(2 ln 2).

    Quasimomentum policy: by default each draw is split as
    p = n + beta_i with n = floor(p); passing beta pins every member to
    that quasimomentum and rounds the ladder site instead.  Sampling uses
    a counter-based generator keyed by seed only, so the same seed gives
    bit-identical ensembles regardless of how the work is later split
    across threads.
    """
    if count < 1:
        raise ConfigError(f"ensemble size must be positive, got {count}")
    if fwhm < 0.0:
        raise ConfigError(f"fwhm must be nonnegative, got {fwhm}")
    rng = np.random.Generator(np.random.Philox(key=seed))
    sigma = fwhm * FWHM_TO_SIGMA
    draws = mean + sigma * rng.standard_normal(count)
    members = []
    for x in draws:
        if beta is None:
            n = math.floor(x)
            b = x - n
        else:
            b = beta % 1.0
            n = round(x - b)
        members.append(plane_wave(n, b, span=span))
    weights = np.full(count, 1.0 / count)
    return Ensemble(members, weights)
