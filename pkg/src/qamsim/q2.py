"""Closed forms for the two-band case (q = 2, odd p).

With v = k cos(theta/2), s = sin v, c = cos v, R = sqrt(1 + s**2) and
m_p = (-1)**((p+1)/2), the one-period spinor propagator

    A(theta) = [[cos v,                  m_p e^{i theta/2} sin v],
                [-i e^{-i theta/2} sin v,  i m_p cos v]]

(for nu = 0; general nu adds a constant overall phase pi nu**2 / (2 p)
and, when odd, flips m_p) has eigenphases

    omega_j(theta) = -m_p * (pi/4 +- arccos(c / sqrt(2))) + const

labeled so that j = 0 is the upper eigenphase at theta = -pi, matching
the descending-order convention of the generic band tracker; which of
the +- branches that is depends on (p, nu).  All
expressions below are algebraically exact and evaluated in forms stable
near the removable singularities where R + (-1)**j c -> 0.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigError
from .params import SystemParams


def _check(params: SystemParams) -> int:
    if params.q != 2 or params.m_p is None:
        raise ConfigError("closed forms require q=2 with odd p")
    mp = params.m_p
    if params.nu % 2 == 1:
        mp = -mp
    return mp


def _branch_sign(params: SystemParams, j: int) -> int:
    """(-1)**j' where j' picks the physical branch labeled j.

    Labels follow the generic tracker: j = 0 is the larger eigenphase in
    [0, 2 pi) at theta = -pi.  Which of the +/-arccos branches that is
    depends on the constant phase, hence on (p, nu).
    """
    if j not in (0, 1):
        raise ConfigError(f"band index must be 0 or 1, got {j}")
    mp = _check(params)
    c = _const_phase(params)
    two_pi = 2.0 * math.pi
    r0 = (-mp * math.pi / 2.0 + c) % two_pi  # + branch at theta = -pi
    r1 = c % two_pi                          # - branch at theta = -pi
    swap = r0 < r1
    return (-1) ** (j ^ int(swap))


def _const_phase(params: SystemParams) -> float:
    # nu != 0 ladders pick up exp(-i pi nu^2 / (2p)) overall; expanding
    # pi (p/2) (l + nu/p)^2 also yields (-1)^(nu l), i.e. the m_p flip,
    # but only for odd nu
    return math.pi * params.nu**2 / (2.0 * params.p)


def eigenphases(theta: np.ndarray | float, params: SystemParams) -> np.ndarray:
    """Band eigenphases on [0, 2 pi); shape (2,) + theta.shape."""
    mp = _check(params)
    th = np.asarray(theta, dtype=float)
    v = params.k * np.cos(th / 2.0)
    wbar = np.arccos(np.clip(np.cos(v) / math.sqrt(2.0), -1.0, 1.0))
    s0 = _branch_sign(params, 0)
    base = np.stack([s0 * wbar, -s0 * wbar])
    out = (-mp * (math.pi / 4.0 + base) + _const_phase(params)) % (2.0 * math.pi)
    return out


def branch_quantities(theta: np.ndarray | float, params: SystemParams, j: int):
    """Shared intermediates (v, s, c, R, d_j) for band j."""
    sgn = _branch_sign(params, j)
    th = np.asarray(theta, dtype=float)
    v = params.k * np.cos(th / 2.0)
    s = np.sin(v)
    c = np.cos(v)
    r = np.sqrt(1.0 + s * s)
    d = sgn * c
    return th, v, s, c, r, d


def eigenvectors(theta: np.ndarray | float, params: SystemParams, j: int) -> np.ndarray:
    """Normalized band-j eigenvector of A(theta); shape theta.shape + (2,).

    Gauge: component 0 is real with the sign of sin v, and band 1 carries
    the extra smooth phase exp(i theta / 2) so that each section matches
    the generic tracker's parallel-transported frame up to a constant.
    The section is antiperiodic over one theta loop (half-integer
    winding), which is what makes alpha_j = -j/2 the natural offsets.
    """
    mp = _check(params)
    bsgn = _branch_sign(params, j)
    th, v, s, c, r, d = branch_quantities(theta, params, j)
    # rpd = R + d_j, computed from 2 s^2 / (R - d) where d < 0 to avoid
    # catastrophic cancellation at the band-edge zeros of s
    neg = d < 0.0
    # r - d > 1 wherever the cancellation-free branch is taken; pad the
    # unused lanes so np.where never evaluates a zero denominator
    safe_rmd = np.where(neg, r - d, 1.0)
    safe_rpd = np.where(neg, 1.0, r + d)
    rpd = np.where(neg, 2.0 * s * s / safe_rmd, r + d)
    sgn = np.where(s >= 0.0, 1.0, -1.0)
    comp0 = np.where(
        neg, sgn * np.sqrt(safe_rmd / (2.0 * r)), s / np.sqrt(r * safe_rpd)
    )
    mag1 = np.where(
        neg, np.abs(s) * np.sqrt(2.0 / (r * safe_rmd)), np.sqrt(safe_rpd / r)
    )
    comp1 = ((1j - mp) / 2.0) * bsgn * mag1 * np.exp(-1j * th / 2.0)
    vec = np.stack([comp0.astype(complex), comp1], axis=-1)
    if bsgn < 0:
        vec = vec * np.exp(1j * th / 2.0)[..., None]
    return vec


def omega_dot(theta: np.ndarray | float, params: SystemParams, j: int) -> np.ndarray:
    """d omega_j / d theta, exact derivative of the eigenphase branch."""
    mp = _check(params)
    bsgn = _branch_sign(params, j)
    th, v, s, c, r, d = branch_quantities(theta, params, j)
    return mp * bsgn * (params.k / 2.0) * np.sin(th / 2.0) * s / r


def map_impulse(theta: np.ndarray | float, params: SystemParams, j: int) -> np.ndarray:
    """Impulse f_j = epsilon q^2 omega_dot_j entering the torus map."""
    return params.epsilon * 4.0 * omega_dot(theta, params, j)


def map_impulse_prime(
    theta: np.ndarray | float, params: SystemParams, j: int
) -> np.ndarray:
    """d f_j / d theta (for monodromy matrices)."""
    mp = _check(params)
    bsgn = _branch_sign(params, j)
    th, v, s, c, r, d = branch_quantities(theta, params, j)
    k = params.k
    dv = -(k / 2.0) * np.sin(th / 2.0)
    term = 0.5 * np.cos(th / 2.0) * s / r + np.sin(th / 2.0) * dv * c / r**3
    return params.epsilon * 4.0 * mp * bsgn * (k / 2.0) * term


def spin_population(
    theta: np.ndarray | float, params: SystemParams, j: int
) -> np.ndarray:
    """Mean site index S_j = <l> of band j: (R + (-1)^j cos v) / (2 R)."""
    _check(params)
    th, v, s, c, r, d = branch_quantities(theta, params, j)
    neg = d < 0.0
    safe_rmd = np.where(neg, r - d, 1.0)
    rpd = np.where(neg, 2.0 * s * s / safe_rmd, r + d)
    return rpd / (2.0 * r)


def curvature_potential(
    theta: np.ndarray | float, params: SystemParams, k: float | None = None
) -> np.ndarray:
    """Band-independent geometric potential B = 2 v'^2 / (1 + sin^2 v)^2."""
    _check(params)
    kk = params.k if k is None else k
    th = np.asarray(theta, dtype=float)
    v = kk * np.cos(th / 2.0)
    vdot = -(kk / 2.0) * np.sin(th / 2.0)
    return 2.0 * vdot**2 / (1.0 + np.sin(v) ** 2) ** 2


def alpha(j: int) -> float:
    """Constant connection offset alpha_j = -j/2 for the q=2 sections."""
    if j not in (0, 1):
        raise ConfigError(f"band index must be 0 or 1, got {j}")
    return -j / 2.0


def bandwidth(k: float) -> float:
    """Width of either band: |arccos(cos k / sqrt 2) - pi/4| for k < pi."""
    if k >= math.pi:
        return math.pi / 2.0
    return abs(math.acos(math.cos(k) / math.sqrt(2.0)) - math.pi / 4.0)


def min_gap(k: float) -> float:
    """Smallest circle distance between the two eigenphase bands.

    2*arccos(cos v / sqrt 2) stays in [pi/2, 3 pi/2], so the gap never
    closes; its minimum over the grid is pi/2 - 2*bandwidth-type margin.
    """
    vmax = min(k, math.pi)
    # extremes of wbar over v in [cos-range]
    lo = math.acos(min(1.0, 1.0 / math.sqrt(2.0)))
    hi = math.acos(max(-1.0, math.cos(vmax) / math.sqrt(2.0)))
    # circle distance of 2*wbar from 0 (mod 2 pi)
    cands = [2.0 * lo, 2.0 * hi, 2.0 * math.pi - 2.0 * hi]
    return min(c for c in cands if c >= 0.0)


def upper_component_zeros(k: float) -> np.ndarray:
    """Theta values where sin(k cos(theta/2)) = 0 (band-1 top-site nodes)."""
    zs = []
    n = 0
    while n * math.pi <= k:
        x = n * math.pi / k
        t = 2.0 * math.acos(x)
        zs.append(t)
        if t > 0.0:
            zs.append(-t)
        n += 1
    return np.array(sorted(zs))
