"""Exact one-period Floquet evolution of a beta-rotor in the falling frame.

A beta-rotor lives on the discrete momentum ladder N + beta, N integer.
One kick period (kick count t) applies

    U_beta(t) = exp(-i k cos(theta)) * exp(-i tau/2 (N + beta + eta*t + eta/2)^2)

with the free factor diagonal in the momentum basis and the kick factor
diagonal on a uniform angle grid reached by FFT.  The ladder is truncated
to a power-of-two window; probability leaking into the outer 5% of the
window trips an under-resolution error, on which `evolve` doubles the
window (re-centred on the mean momentum) and retries the kick.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, UnderResolvedError
from .params import SystemParams

DEFAULT_SPAN = 1 << 10
MAX_SPAN = 1 << 16
TAIL_THRESHOLD = 1e-8
TAIL_FRACTION = 0.05  # outer fraction of the ladder, split between both ends

FALLING = "falling"
LAB = "lab"


@dataclass
class RotorState:
    """Amplitudes over the momentum ladder n_min .. n_min+len(amps)-1."""

    beta: float
    n_min: int
    amps: np.ndarray
    kick_count: int = 0
    gauge: str = FALLING

    def __post_init__(self):
        self.amps = np.asarray(self.amps, dtype=np.complex128)
        if self.amps.ndim != 1:
            raise ConfigError("amps must be a 1-d complex array")
        if len(self.amps) & (len(self.amps) - 1):
            raise ConfigError("ladder length must be a power of two")
        if self.gauge not in (FALLING, LAB):
            raise ConfigError(f"unknown gauge {self.gauge!r}")

    @property
    def span(self) -> int:
        return len(self.amps)

    @property
    def n_max(self) -> int:
        return self.n_min + len(self.amps) - 1

    @property
    def ladder(self) -> np.ndarray:
        """Integer ladder sites."""
        return self.n_min + np.arange(len(self.amps))

    def momenta(self) -> np.ndarray:
        """Physical momenta n + beta in the state's current gauge."""
        return self.ladder + self.beta

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    def mean_momentum(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2 * self.momenta()))

    def tail_mass(self) -> float:
        edge = max(1, int(math.ceil(0.5 * TAIL_FRACTION * len(self.amps))))
        a2 = np.abs(self.amps) ** 2
        return float(a2[:edge].sum() + a2[-edge:].sum())

    def copy(self) -> "RotorState":
        return replace(self, amps=self.amps.copy())


def plane_wave(n0: int, beta: float, span: int = DEFAULT_SPAN, center: int | None = None) -> RotorState:
    """Momentum eigenstate |n0 + beta> on a ladder of `span` sites."""
    if span & (span - 1) or span < 2:
        raise ConfigError("span must be a power of two >= 2")
    if center is None:
        center = 0
    n_min = int(center) - span // 2
    if not n_min <= n0 <= n_min + span - 1:
        raise ConfigError(f"n0={n0} outside ladder [{n_min}, {n_min + span - 1}]")
    amps = np.zeros(span, dtype=np.complex128)
    amps[int(n0) - n_min] = 1.0
    return RotorState(beta=float(beta) % 1.0, n_min=n_min, amps=amps)


def enlarge_ladder(state: RotorState, factor: int = 2) -> RotorState:
    """Double the ladder, re-centred on the current mean momentum."""
    span = len(state.amps) * factor
    if span > MAX_SPAN:
        raise UnderResolvedError(
            f"ladder span {span} exceeds the cap {MAX_SPAN}; state is under-resolved"
        )
    center = int(round(state.mean_momentum() - state.beta))
    n_min = center - span // 2
    # the old window must embed in the new one
    n_min = min(n_min, state.n_min)
    n_min = max(n_min, state.n_max + 1 - span)
    amps = np.zeros(span, dtype=np.complex128)
    off = state.n_min - n_min
    amps[off:off + len(state.amps)] = state.amps
    return replace(state, n_min=n_min, amps=amps)


def _free_phases(state: RotorState, params: SystemParams) -> np.ndarray:
    shift = state.beta + params.eta * state.kick_count + 0.5 * params.eta
    arg = 0.5 * params.tau * (state.ladder + shift) ** 2
    return np.exp(-1j * np.mod(arg, 2.0 * math.pi))


def floquet_step(state: RotorState, params: SystemParams, check_tail: bool = True) -> RotorState:
    """One kick period in the falling frame.

    Raises UnderResolvedError if the outer-ladder mass exceeds the
    tail threshold after the step; the input state is left untouched.
    """
    if state.gauge != FALLING:
        raise ConfigError("floquet_step requires a falling-frame state")
    if abs(state.beta - params.beta) > 1e-12:
        raise ConfigError("state.beta does not match params.beta")
    amps = state.amps * _free_phases(state, params)
    m = len(amps)
    theta = 2.0 * math.pi * np.arange(m) / m
    psi = np.fft.ifft(amps)
    psi *= np.exp(-1j * params.k * np.cos(theta))
    amps = np.fft.fft(psi)
    new = replace(state, amps=amps, kick_count=state.kick_count + 1)
    if check_tail and new.tail_mass() >= TAIL_THRESHOLD:
        raise UnderResolvedError(
            f"tail mass {new.tail_mass():.3e} >= {TAIL_THRESHOLD} after kick {new.kick_count}"
        )
    return new


@dataclass
class KickRecorder:
    """Collects snapshots at the requested kick counts during `evolve`.

    `transform` maps a state to whatever should be stored (default: a copy
    of the state itself).
    """

    schedule: set
    transform: object = None
    snapshots: dict = field(default_factory=dict)

    def __post_init__(self):
        self.schedule = {int(t) for t in self.schedule}

    def offer(self, state: RotorState):
        if state.kick_count in self.schedule and state.kick_count not in self.snapshots:
            self.snapshots[state.kick_count] = (
                state.copy() if self.transform is None else self.transform(state)
            )


def evolve(
    state: RotorState,
    kicks: int,
    params: SystemParams,
    recorder: KickRecorder | None = None,
) -> RotorState:
    """Apply `kicks` Floquet periods, growing the ladder on demand."""
    if kicks < 0:
        raise ConfigError("kicks must be non-negative")
    if recorder is not None:
        recorder.offer(state)
    if kicks == 0:
        return state
    for _ in range(kicks):
        while True:
            try:
                state = floquet_step(state, params)
                break
            except UnderResolvedError:
                if len(state.amps) * 2 > MAX_SPAN:
                    raise
                state = enlarge_ladder(state)
        if recorder is not None:
            recorder.offer(state)
    return state


def gauge_shift(obj, params: SystemParams, to: str):
    """Convert a state or histogram between falling and lab gauges.

    Lab momenta exceed falling momenta by eta * kick_count; for a state the
    offset splits into an integer ladder shift plus a new fractional beta.
    """
    if to not in (FALLING, LAB):
        raise ConfigError(f"unknown gauge {to!r}")
    from .observables import MomentumHistogram  # local import, avoids a cycle

    if isinstance(obj, MomentumHistogram):
        if obj.gauge == to:
            return obj
        sign = 1.0 if to == LAB else -1.0
        return replace(obj, edges=obj.edges + sign * params.eta * obj.kick_count, gauge=to)

    state: RotorState = obj
    if state.gauge == to:
        return state
    drift = params.eta * state.kick_count
    if to == LAB:
        total = state.beta + drift
    else:
        total = state.beta - drift
    shift = math.floor(total)
    return replace(state, beta=total - shift, n_min=state.n_min + shift, gauge=to)
