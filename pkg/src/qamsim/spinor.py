"""Spinor representation of a beta-rotor near a q-cell resonance.

Grouping ladder sites as n = l + m q (l = 0..q-1) turns the rotor state
into a q-component field on an auxiliary circle,

    phi_l(theta) = (2*pi)**-0.5 * sum_m psihat(l + m q) exp(i m theta),

on which one kick period acts pointwise through the q x q unitary

    A(theta) = exp(-i k V(theta)) exp(-i G),
    G = pi (p/q) (S + beta0)**2,   S = diag(0, 1, ..., q-1).

exp(-i k V) is evaluated exactly by conjugating diagonal kick phases with
the discrete Fourier matrix and a theta/q phase ramp; no series expansion
or splitting error is involved, so A reproduces one full Floquet period
of the ladder dynamics at exact resonance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, GridMismatchError
from .params import SystemParams
from .rotor import FALLING, RotorState


def theta_grid(m: int) -> np.ndarray:
    """Uniform grid of m points on [-pi, pi)."""
    if m < 2:
        raise ConfigError(f"theta grid needs at least 2 points, got {m}")
    return -math.pi + 2.0 * math.pi * np.arange(m) / m


@dataclass
class SpinorField:
    """q-component field sampled on a uniform theta grid on [-pi, pi).

    comps[l, i] is component l at theta[i].  The grid quadrature norm
    (2 pi / M) sum |comps|**2 equals the ladder norm of the state the
    field was built from.
    """

    theta: np.ndarray
    comps: np.ndarray
    beta: float = 0.0
    kick_count: int = 0

    def __post_init__(self) -> None:
        self.theta = np.asarray(self.theta, dtype=float)
        self.comps = np.asarray(self.comps, dtype=complex)
        if self.comps.ndim != 2 or self.comps.shape[1] != len(self.theta):
            raise GridMismatchError(
                f"component array {self.comps.shape} does not match "
                f"{len(self.theta)} grid points"
            )

    @property
    def q(self) -> int:
        return self.comps.shape[0]

    @property
    def grid_size(self) -> int:
        return len(self.theta)

    def norm(self) -> float:
        return float(
            np.sum(np.abs(self.comps) ** 2) * (2.0 * math.pi / self.grid_size)
        )

    def copy(self) -> "SpinorField":
        return SpinorField(
            self.theta.copy(), self.comps.copy(), self.beta, self.kick_count
        )


def _component_windows(n_min: int, span: int, q: int) -> list[tuple[int, int]]:
    """Inclusive m-range of each component inside ladder [n_min, n_min+span)."""
    n_max = n_min + span - 1
    out = []
    for l in range(q):
        m_lo = math.ceil((n_min - l) / q)
        m_hi = math.floor((n_max - l) / q)
        out.append((m_lo, m_hi))
    return out


def default_grid_size(span: int, q: int) -> int:
    """Smallest power of two holding a component window with 2x headroom."""
    need = 2 * (span // q + 2)
    m = 256
    while m < need:
        m *= 2
    return m


def decompose(
    state: RotorState, params: SystemParams, grid_size: int | None = None
) -> SpinorField:
    """Ladder amplitudes -> q-component spinor field.

    The m-index of each component is folded into FFT bins mod grid_size;
    the fold is lossless (and recompose exactly inverts it) as long as
    grid_size is at least the widest component window.
    """
    q = params.q
    m_pts = default_grid_size(state.span, q) if grid_size is None else grid_size
    windows = _component_windows(state.n_min, state.span, q)
    widest = max(hi - lo + 1 for lo, hi in windows)
    if m_pts < widest:
        raise ConfigError(
            f"grid_size={m_pts} cannot hold a component window of {widest} "
            f"ladder-m values; decrease span or raise grid_size"
        )
    comps = np.zeros((q, m_pts), dtype=complex)
    for l in range(q):
        m_lo, m_hi = windows[l]
        ms = np.arange(m_lo, m_hi + 1)
        coeff = state.amps[(l + ms * q) - state.n_min]
        spec = np.zeros(m_pts, dtype=complex)
        # exp(i m theta_i) with theta_i = -pi + 2 pi i / M picks up (-1)^m
        spec[np.mod(ms, m_pts)] = coeff * np.exp(-1j * math.pi * ms)
        comps[l] = np.fft.ifft(spec) * m_pts / math.sqrt(2.0 * math.pi)
    return SpinorField(theta_grid(m_pts), comps, state.beta, state.kick_count)


def recompose(
    field: SpinorField,
    params: SystemParams,
    n_min: int,
    span: int,
    gauge: str = FALLING,
) -> RotorState:
    """Spinor field -> ladder amplitudes on [n_min, n_min + span).

    Exact inverse of decompose for matching ladder geometry.  For
    synthesized fields, Fourier content outside the component windows is
    dropped (truncated tails); callers normalize if needed.
    """
    q = params.q
    if field.q != q:
        raise GridMismatchError(f"field has {field.q} components, params.q={q}")
    m_pts = field.grid_size
    windows = _component_windows(n_min, span, q)
    widest = max(hi - lo + 1 for lo, hi in windows)
    if m_pts < widest:
        raise ConfigError(
            f"grid_size={m_pts} cannot hold a component window of {widest} "
            f"ladder-m values"
        )
    amps = np.zeros(span, dtype=complex)
    for l in range(q):
        m_lo, m_hi = windows[l]
        ms = np.arange(m_lo, m_hi + 1)
        spec = np.fft.fft(field.comps[l]) / m_pts * math.sqrt(2.0 * math.pi)
        amps[(l + ms * q) - n_min] = spec[np.mod(ms, m_pts)] * np.exp(
            1j * math.pi * ms
        )
    return RotorState(
        beta=field.beta,
        n_min=n_min,
        amps=amps,
        kick_count=field.kick_count,
        gauge=gauge,
    )


def propagator_matrices(params: SystemParams, theta: np.ndarray | float) -> np.ndarray:
    """One-period spinor propagator A(theta); shape (..., q, q), unitary.

    Kick factor via the exact diagonalization
    exp(-i k V(theta)) = P F D F^dag P^dag with
    P = diag(exp(-i l theta / q)),
    F_{jl} = exp(-2 i pi j l / q) / sqrt(q),
    D = diag(exp(-i k cos(theta/q + 2 pi m / q))).
    """
    theta = np.asarray(theta, dtype=float)
    scalar = theta.ndim == 0
    th = np.atleast_1d(theta).ravel()
    q, p, k, beta0 = params.q, params.p, params.k, params.beta0
    ls = np.arange(q)
    f = np.exp(-2j * math.pi * np.outer(ls, ls) / q) / math.sqrt(q)
    fh = f.conj().T
    xi = th[:, None] / q + 2.0 * math.pi * ls[None, :] / q
    d = np.exp(-1j * k * np.cos(xi))
    kick = np.einsum("jm,sm,ml->sjl", f, d, fh)
    ramp = np.exp(-1j * np.outer(th, ls) / q)
    kick = ramp[:, :, None] * kick * ramp.conj()[:, None, :]
    gphase = np.exp(-1j * math.pi * (p / q) * (ls + beta0) ** 2)
    mats = kick * gphase[None, None, :]
    if scalar:
        return mats[0]
    return mats.reshape(theta.shape + (q, q))


@dataclass
class SpinPropagator:
    """A(theta) sampled at one value or a grid of quasi-positions."""

    theta: np.ndarray | float
    mats: np.ndarray
    params: SystemParams

    @property
    def q(self) -> int:
        return self.mats.shape[-1]

    def unitarity_defect(self) -> float:
        ident = np.eye(self.q)
        prod = np.einsum("...ij,...kj->...ik", self.mats, self.mats.conj())
        return float(np.max(np.abs(prod - ident)))


def spin_propagator(params: SystemParams, theta: np.ndarray | float) -> SpinPropagator:
    """Spin propagator A(theta) = exp(-i k V(theta)) exp(-i G) at theta."""
    return SpinPropagator(theta, propagator_matrices(params, theta), params)


def site_hop_matrix(theta: float, q: int) -> np.ndarray:
    """The kick generator V(theta): nearest-site hops with corner phases.

    V = (1/2) [ sum_l (|l><l+1| + |l+1><l|) + |0><q-1| e^{i theta}
                + |q-1><0| e^{-i theta} ];
    exp(-i k V) equals the kick factor of propagator_matrices (the two
    constructions are tied together by an invariant test, not by code).
    """
    v = np.zeros((q, q), dtype=complex)
    if q == 1:
        v[0, 0] = math.cos(theta)
        return v
    for l in range(q - 1):
        v[l, l + 1] += 0.5
        v[l + 1, l] += 0.5
    v[0, q - 1] += 0.5 * np.exp(1j * theta)
    v[q - 1, 0] += 0.5 * np.exp(-1j * theta)
    return v


def apply_propagator(field: SpinorField, prop: SpinPropagator | np.ndarray) -> SpinorField:
    """Apply A(theta_i) pointwise: comps'[:, i] = mats[i] @ comps[:, i]."""
    mats = prop.mats if isinstance(prop, SpinPropagator) else prop
    if mats.shape != (field.grid_size, field.q, field.q):
        raise GridMismatchError(
            f"propagator batch {mats.shape} does not match field "
            f"({field.grid_size} points, q={field.q})"
        )
    comps = np.einsum("sjl,ls->js", mats, field.comps)
    return SpinorField(field.theta, comps, field.beta, field.kick_count + 1)


def apply_momentum(field: SpinorField) -> SpinorField:
    """Apply the fibrated momentum operator -i q d/dtheta + S to the field."""
    m = field.grid_size
    freq = np.fft.fftfreq(m, d=1.0 / m)
    if m % 2 == 0:
        freq = freq.copy()
        freq[m // 2] = 0.0
    dcomps = np.fft.ifft(np.fft.fft(field.comps, axis=1) * (1j * freq), axis=1)
    ls = np.arange(field.q)[:, None]
    comps = -1j * field.q * dcomps + ls * field.comps
    return SpinorField(field.theta, comps, field.beta, field.kick_count)


def field_mean_momentum(field: SpinorField) -> float:
    """<N> of the underlying rotor, evaluated in the spinor representation."""
    applied = apply_momentum(field)
    val = np.sum(field.comps.conj() * applied.comps) * (2.0 * math.pi / field.grid_size)
    return float(val.real)
