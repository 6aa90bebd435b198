"""Arithmetic spectroscopy of accelerator modes.

Which (r, s) modes appear near a resonance tau ~ 2 pi p / q is governed
by the rational approximations of the rescaled gravity Omega* =
2 pi p^2 g / q: the prominent modes are the continued-fraction
convergents of Omega* (and their Farey mediants), and a higher-order
resonance is visible at all only when Omega* lies close enough to an
integer.

Rationals are kept as literal (r, s) pairs without reduction: a
non-coprime pair such as 20/10 is a legitimate mode label distinct from
2/1 (an s-fold repetition of a shorter orbit), so reduction is always
explicit, never automatic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import ConfigError
from .params import SystemParams

VISIBILITY_THRESHOLD = 0.25
DEFAULT_CF_TERMS = 16


@dataclass(frozen=True)
class Ratio:
    """A rational r/s kept exactly as written (never auto-reduced)."""

    r: int
    s: int

    def __post_init__(self) -> None:
        if self.s <= 0:
            raise ConfigError(f"denominator must be positive, got {self.s}")

    @property
    def value(self) -> float:
        return self.r / self.s

    @property
    def is_reduced(self) -> bool:
        return math.gcd(abs(self.r), self.s) == 1

    def reduced(self) -> "Ratio":
        g = math.gcd(abs(self.r), self.s)
        return Ratio(self.r // g, self.s // g) if g > 1 else self

    def equivalent(self, other: "Ratio") -> bool:
        """Same rational value (cross-multiplication), ignoring reduction."""
        return self.r * other.s == other.r * self.s

    def __str__(self) -> str:
        return f"{self.r}/{self.s}"


def farey_mediant(a: Ratio, b: Ratio) -> Ratio:
    """Mediant (r1 + r2) / (s1 + s2), deliberately left unreduced."""
    return Ratio(a.r + b.r, a.s + b.s)


class CFExpansion(NamedTuple):
    """x = anchor + sign * [0; terms...] with anchor the nearest integer."""

    anchor: int
    sign: int
    terms: tuple[int, ...]

    def value(self) -> Fraction:
        acc = Fraction(0)
        for t in reversed(self.terms):
            acc = Fraction(1, t + acc)
        return self.anchor + self.sign * acc


def continued_fraction(
    x: float, max_terms: int = DEFAULT_CF_TERMS, nearest: bool = True
) -> CFExpansion:
    """Nearest-integer-anchored continued fraction of x, exact in binary.

    The anchor is the closest integer (a residue of exactly 1/2 rounds
    the anchor down), the sign points from the anchor to x, and the
    terms are the plain continued fraction of |x - anchor| <= 1/2.
    With nearest=False the anchor is floor(x) and the expansion is the
    standard (regular) continued fraction.
    """
    if max_terms < 0:
        raise ConfigError(f"max_terms must be nonnegative, got {max_terms}")
    fx = Fraction(x)  # exact binary value of the float
    if nearest:
        anchor = math.floor(fx + Fraction(1, 2))
        if fx - math.floor(fx) == Fraction(1, 2):
            anchor = math.floor(fx)
    else:
        anchor = math.floor(fx)
    d = fx - anchor
    if d == 0:
        return CFExpansion(anchor, 1, ())
    sign = 1 if d > 0 else -1
    y = abs(d)
    terms: list[int] = []
    while y != 0 and len(terms) < max_terms:
        inv = 1 / y
        t = math.floor(inv)
        terms.append(t)
        y = inv - t
    return CFExpansion(anchor, sign, tuple(terms))


def convergents(expansion: CFExpansion) -> list[Ratio]:
    """Convergents of the expansion, starting from anchor/1.

    The standard recurrence produces each convergent already in lowest
    terms, so these Ratio values are coprime by construction.
    """
    out = [Ratio(expansion.anchor, 1)]
    h_prev, h = 1, 0  # numerators of [0; t1, ..., tk]
    k_prev, k = 0, 1
    for t in expansion.terms:
        h_prev, h = h, t * h + h_prev
        k_prev, k = k, t * k + k_prev
        out.append(Ratio(expansion.anchor * k + expansion.sign * h, k))
    return out


def omega_star(p: int, q: int, g: float) -> float:
    """Rescaled gravity 2 pi p^2 g / q governing mode arithmetic at p/q."""
    if q < 1 or p < 1:
        raise ConfigError(f"resonance order p/q = {p}/{q} must be positive")
    return 2.0 * math.pi * p * p * g / q


def omega_bare(epsilon: float, p: int, q: int, g: float) -> float:
    """Bare winding number q Omega(eps) = (q / 2 pi) g (2 pi p / q + eps)^2.

    The detuned value continues omega_star away from the resonance; at
    eps = 0 it equals omega_star exactly (bitwise, not just to rounding).
    """
    if epsilon == 0.0:
        return omega_star(p, q, g)
    if q < 1 or p < 1:
        raise ConfigError(f"resonance order p/q = {p}/{q} must be positive")
    tau = 2.0 * math.pi * p / q + epsilon
    return q * g * tau * tau / (2.0 * math.pi)


@dataclass(frozen=True)
class ResonanceRecord:
    """Visibility verdict and mode arithmetic for one resonance p/q."""

    p: int
    q: int
    omega_star: float
    frac_distance: float
    visible: bool
    expansion: CFExpansion
    convergents: tuple[Ratio, ...]


def resonance_visibility(
    p: int,
    q: int,
    g: float,
    threshold: float = VISIBILITY_THRESHOLD,
    max_terms: int = DEFAULT_CF_TERMS,
) -> ResonanceRecord:
    """Classify a resonance by how close Omega* sits to an integer."""
    ws = omega_star(p, q, g)
    dist = abs(ws - round(ws))
    exp = continued_fraction(ws, max_terms)
    return ResonanceRecord(
        p=p,
        q=q,
        omega_star=ws,
        frac_distance=dist,
        visible=bool(dist < threshold),
        expansion=exp,
        convergents=tuple(convergents(exp)),
    )


def special_beta(
    N0: int,
    j: int,
    nu: int,
    n: int,
    J0: float,
    params: SystemParams,
    alpha_j: float | None = None,
) -> float:
    """Quasimomentum that parks a band-j packet centred at N0 on torus
    action J0 (mod 2 pi branch n).

    Solves q^2 eps mu + rho = J0 + 2 pi n for beta, with mu = (N0 - j)/q:

    beta = (J0 + 2 pi n)/(q tau) - (eps/tau)(N0 - j - q alpha_j + beta0)
           - eta/2 + beta0   (mod 1),

    with beta0 = nu/p + q/2 mod 1 taken from the resonance class nu given
    here (which may differ from params.nu).  At eps = 0 the detuning term
    vanishes and the formula degenerates gracefully.
    """
    q, p, tau, eps = params.q, params.p, params.tau, params.epsilon
    if not 0 <= nu < p:
        raise ConfigError(f"nu must be in 0..p-1 = 0..{p - 1}, got {nu}")
    if alpha_j is None:
        if q > 2:
            raise ConfigError("pass alpha_j explicitly for q > 2")
        alpha_j = -j / q
    beta0 = (nu / p + q / 2.0) % 1.0
    beta = (
        (J0 + 2.0 * math.pi * n) / (q * tau)
        - (eps / tau) * (N0 - j - q * alpha_j + beta0)
        - params.eta / 2.0
        + beta0
    )
    return beta % 1.0


def mode_curves(
    tau_over_2pi: np.ndarray,
    p: int,
    q: int,
    modes: list,
    kicks: int,
    g: float,
    k: float | None = None,
) -> list[tuple[tuple[int, int, int | None], np.ndarray]]:
    """Final momentum p(tau) = a(tau) * kicks for each candidate mode.

    a = (2 pi / eps)(r / (q s) - Omega(tau)) with eps = tau - 2 pi p / q
    and Omega = omega_bare / q; points closer than 1e-9 to the resonance
    are masked with NaN (there the mode-locked acceleration diverges).
    Modes are (r, s) or (r, s, j) tuples or Ratio values; the band label
    j and the kick strength k do not enter the curve itself and are
    carried through only so callers can tag the output.
    """
    tau = 2.0 * math.pi * np.asarray(tau_over_2pi, dtype=float)
    eps = tau - 2.0 * math.pi * p / q
    omega = np.array([omega_bare(e, p, q, g) / q for e in np.atleast_1d(eps)])
    omega = omega.reshape(np.shape(eps))
    safe = np.where(np.abs(eps) < 1e-9, np.nan, eps)
    out = []
    for mode in modes:
        if isinstance(mode, Ratio):
            r, s, j = mode.r, mode.s, None
        elif len(mode) == 2:
            (r, s), j = mode, None
        else:
            r, s, j = mode
        if s < 1:
            raise ConfigError(f"mode period must be positive, got {s}")
        accel = 2.0 * math.pi / safe * (r / (q * s) - omega)
        out.append(((r, s, j), accel * kicks))
    return out
