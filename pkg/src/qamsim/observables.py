"""Momentum-space observables for states and ensembles.

Histograms carry their gauge tag and kick count so that falling-frame
results can be rebinned into the lab frame exactly (the frames differ by
the uniform shift eta * t at kick t, which moves bin edges, not mass).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensemble import Ensemble
from .errors import ConfigError, GridMismatchError
from .params import SystemParams
from .rotor import FALLING, LAB, RotorState, gauge_shift


@dataclass
class MomentumHistogram:
    """Binned momentum distribution: mass[i] on [edges[i], edges[i+1])."""

    edges: np.ndarray
    mass: np.ndarray
    gauge: str = FALLING
    kick_count: int = 0

    def __post_init__(self) -> None:
        self.edges = np.asarray(self.edges, dtype=float)
        self.mass = np.asarray(self.mass, dtype=float)
        if len(self.edges) != len(self.mass) + 1:
            raise GridMismatchError(
                f"{len(self.edges)} edges incompatible with {len(self.mass)} bins"
            )

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def bin_width(self) -> float:
        return float(self.edges[1] - self.edges[0])

    def total(self) -> float:
        return float(self.mass.sum())

    def density(self) -> np.ndarray:
        return self.mass / np.diff(self.edges)


def _members(obj: RotorState | Ensemble):
    if isinstance(obj, RotorState):
        return [obj], np.array([1.0])
    if isinstance(obj, Ensemble):
        return obj.members, obj.weights
    raise ConfigError(f"expected RotorState or Ensemble, got {type(obj).__name__}")


def momentum_distribution(
    obj: RotorState | Ensemble,
    bin_width: float = 0.25,
    gauge: str = FALLING,
    params: SystemParams | None = None,
    p_range: tuple[float, float] | None = None,
) -> MomentumHistogram:
    """Histogram |amps|^2 over momentum bins of the given width.

    Bins are anchored at integer multiples of bin_width in the members'
    own frame; without an explicit range the grid is grown to cover every
    member's ladder, so the total mass equals the total norm.  Requesting
    the other gauge shifts the edges by eta * kick_count (needs params);
    the per-bin mass is unchanged.
    """
    if bin_width <= 0.0:
        raise ConfigError(f"bin_width must be positive, got {bin_width}")
    if gauge not in (FALLING, LAB):
        raise ConfigError(f"unknown gauge {gauge!r}")
    members, weights = _members(obj)
    kick_counts = {m.kick_count for m in members}
    if len(kick_counts) != 1:
        raise ConfigError("cannot histogram members with unequal kick counts")
    gauges = {m.gauge for m in members}
    if len(gauges) != 1:
        raise ConfigError("cannot histogram members with unequal gauges")
    if p_range is None:
        lo = min(m.momenta()[0] for m in members) - bin_width
        hi = max(m.momenta()[-1] for m in members) + bin_width
    else:
        lo, hi = p_range
        if hi <= lo:
            raise ConfigError(f"empty momentum range {p_range}")
    i_lo = math.floor(lo / bin_width)
    i_hi = math.ceil(hi / bin_width)
    edges = np.arange(i_lo, i_hi + 1) * bin_width
    mass = np.zeros(len(edges) - 1)
    for w, m in zip(weights, members):
        p = m.momenta()
        idx = np.floor(p / bin_width).astype(int) - i_lo
        ok = (idx >= 0) & (idx < len(mass))
        np.add.at(mass, idx[ok], w * np.abs(m.amps[ok]) ** 2)
    hist = MomentumHistogram(edges, mass, gauges.pop(), kick_counts.pop())
    if hist.gauge != gauge:
        if params is None:
            raise ConfigError("params are required to change the histogram gauge")
        hist = gauge_shift(hist, params, gauge)
    return hist


def box_probability(
    obj: RotorState | Ensemble, center: float, width: float
) -> float:
    """Probability mass in the closed momentum box |p - center| <= width/2."""
    if width <= 0.0:
        raise ConfigError(f"box width must be positive, got {width}")
    members, weights = _members(obj)
    total = 0.0
    half = width / 2.0
    for w, m in zip(weights, members):
        p = m.momenta()
        sel = (p >= center - half) & (p <= center + half)
        total += w * float(np.sum(np.abs(m.amps[sel]) ** 2))
    return total
