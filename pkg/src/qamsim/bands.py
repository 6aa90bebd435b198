"""Band analysis of the one-period spinor propagator.

Diagonalizing A(theta) on a theta grid yields q eigenphase bands
omega_j(theta) and eigenvector sections phi_j(theta).  Branches are
labeled by descending eigenphase at theta = -pi and continued through
the grid by eigenvector-overlap matching (Hungarian assignment), with
dyadic interval refinement wherever the assignment margin is too small
to be trusted; intervals still ambiguous at the deepest refinement are
flagged rather than guessed.

Sections are put in a smooth periodic gauge (parallel transport plus
uniform distribution of the closure phase), from which the geometric
data follow: Berry phase gamma_j, mean site drift sigma_j, constant
connection offset alpha_j, and the quadratic geometric potential

    B_j = M2_j + 2 q Im S'_j - q^2 A_j^2 + q^2 <phi'|phi'>,

the gauge-invariant quantum-metric combination written in the site
moments M2 = sum l^2 |phi_l|^2, S' = sum l conj(phi_l) phi_l'.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ConfigError, GaugeFixingError, NumericsError
from .params import SystemParams
from .spinor import SpinorField, propagator_matrices, theta_grid

EIG_RESIDUAL_TOL = 1e-10
MATCH_TOL = 0.1
MAX_REFINE = 6
ALPHA_SNAP_TOL = 1e-6
REALITY_TOL = 1e-6
JUMP_TOL_FACTOR = 10.0


@dataclass
class BandData:
    """Eigenphase bands and smooth eigenvector sections on a theta grid.

    omega[j] is a continuous branch (unwrapped; omega[j, 0] lies in
    [0, 2 pi)); vecs[j, i] is the band-j eigenvector at theta[i] in the
    smooth periodic gauge; winding[j] counts the eigenphase's net 2 pi
    turns over one theta loop.  alpha holds the connection offsets used
    by the dynamics (snapped to the analytic values for q <= 2,
    principal-value otherwise; alpha_raw is always the principal value).
    flags[j, i] marks grid intervals [i, i+1) where branch matching
    stayed ambiguous at the deepest refinement level.
    """

    theta: np.ndarray
    omega: np.ndarray
    vecs: np.ndarray
    winding: np.ndarray
    flags: np.ndarray
    params: SystemParams
    berry: np.ndarray = field(default=None)
    sigma: np.ndarray = field(default=None)
    alpha: np.ndarray = field(default=None)
    alpha_raw: np.ndarray = field(default=None)
    site_mean: np.ndarray = field(default=None)
    bpot: np.ndarray = field(default=None)

    @property
    def n_bands(self) -> int:
        return self.omega.shape[0]

    @property
    def grid_size(self) -> int:
        return len(self.theta)

    def gaps(self) -> np.ndarray:
        """Minimal circle distance between distinct bands over the grid."""
        q = self.n_bands
        w = self.omega % (2.0 * math.pi)
        out = np.full((q, q), np.inf)
        for a in range(q):
            for b in range(a + 1, q):
                d = np.abs((w[a] - w[b] + math.pi) % (2.0 * math.pi) - math.pi)
                out[a, b] = out[b, a] = float(d.min())
        return out


def _eig_sorted_desc(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenphases (descending) and matching eigenvector columns."""
    w, v = np.linalg.eig(mat)
    omega = (-np.angle(w)) % (2.0 * math.pi)
    order = np.argsort(-omega, kind="stable")
    return omega[order], v[:, order]


def _check_residual(mats: np.ndarray, w: np.ndarray, v: np.ndarray) -> None:
    lhs = np.einsum("...ij,...jk->...ik", mats, v)
    rhs = w[..., None, :] * v
    res = np.max(np.abs(lhs - rhs))
    if res > EIG_RESIDUAL_TOL:
        raise NumericsError(f"eigen-decomposition residual {res:.3e} too large")


def _assign(prev: np.ndarray, cand: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Match labeled columns prev to candidate columns; overlap margins."""
    g = np.abs(prev.conj().T @ cand)
    rows, cols = linear_sum_assignment(-g)
    perm = np.empty(len(rows), dtype=int)
    perm[rows] = cols
    margins = np.empty(len(rows))
    for j in range(len(rows)):
        row = g[j].copy()
        best = row[perm[j]]
        row[perm[j]] = -1.0
        margins[j] = best - row.max()
    return perm, margins


def _match_interval(
    prev: np.ndarray,
    th_a: float,
    th_b: float,
    cand: np.ndarray,
    params: SystemParams,
    depth: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Label candidate columns at th_b given labeled columns at th_a.

    Returns (perm, ambiguous) where cand[:, perm[j]] continues band j and
    ambiguous[j] is True if even the deepest dyadic refinement left the
    assignment margin below MATCH_TOL.
    """
    perm, margins = _assign(prev, cand)
    if np.all(margins >= MATCH_TOL):
        return perm, np.zeros(len(perm), dtype=bool)
    if depth >= MAX_REFINE:
        return perm, margins < MATCH_TOL
    th_m = 0.5 * (th_a + th_b)
    _, v_m = _eig_sorted_desc(propagator_matrices(params, th_m))
    perm1, amb1 = _match_interval(prev, th_a, th_m, v_m, params, depth + 1)
    mid_labeled = v_m[:, perm1]
    perm2, amb2 = _match_interval(mid_labeled, th_m, th_b, cand, params, depth + 1)
    return perm2, amb1 | amb2


def _spectral_derivative(arr: np.ndarray) -> np.ndarray:
    """d/dtheta of periodic samples along the last axis (2 pi period)."""
    m = arr.shape[-1]
    freq = np.fft.fftfreq(m, d=1.0 / m)
    if m % 2 == 0:
        freq = freq.copy()
        freq[m // 2] = 0.0  # drop the unpaired Nyquist mode
    return np.fft.ifft(np.fft.fft(arr, axis=-1) * (1j * freq), axis=-1)


class GeometricData(NamedTuple):
    alpha: float
    alpha_raw: float
    berry: float
    sigma: float
    bpot: np.ndarray
    site_mean: np.ndarray


def band_structure(
    params: SystemParams,
    grid_size: int = 1024,
    with_potentials: bool = True,
) -> BandData:
    """Diagonalize A(theta) on the grid and track labeled smooth branches."""
    if grid_size < 256:
        raise ConfigError(
            f"band grid needs at least 256 points, got {grid_size}"
        )
    q = params.q
    theta = theta_grid(grid_size)
    mats = propagator_matrices(params, theta)
    w_all, v_all = np.linalg.eig(mats)
    _check_residual(mats, w_all, v_all)
    omega_all = (-np.angle(w_all)) % (2.0 * math.pi)

    omega = np.empty((q, grid_size))
    vecs = np.empty((q, grid_size, q), dtype=complex)
    flags = np.zeros((q, grid_size), dtype=bool)

    order0 = np.argsort(-omega_all[0], kind="stable")
    omega[:, 0] = omega_all[0][order0]
    vecs[:, 0, :] = v_all[0][:, order0].T

    for i in range(grid_size - 1):
        prev = vecs[:, i, :].T
        perm, amb = _match_interval(
            prev, theta[i], theta[i + 1], v_all[i + 1], params, 0
        )
        flags[:, i] = amb
        raw = omega_all[i + 1][perm]
        omega[:, i + 1] = raw + 2.0 * math.pi * np.round(
            (omega[:, i] - raw) / (2.0 * math.pi)
        )
        vecs[:, i + 1, :] = v_all[i + 1][:, perm].T

    # closure: wrap the loop back onto the first grid point
    prev = vecs[:, -1, :].T
    perm_c, amb_c = _match_interval(
        prev, theta[-1], theta[0] + 2.0 * math.pi, vecs[:, 0, :].T, params, 0
    )
    flags[:, -1] = amb_c
    if not np.array_equal(perm_c, np.arange(q)):
        raise NumericsError(
            "bands permute around the theta loop; branches are not periodic"
        )
    raw_c = (omega[:, 0] % (2.0 * math.pi))
    closed = raw_c + 2.0 * math.pi * np.round((omega[:, -1] - raw_c) / (2.0 * math.pi))
    winding = np.round((closed - omega[:, 0]) / (2.0 * math.pi)).astype(int)

    # smooth periodic gauge: anchor, parallel-transport, distribute closure
    for j in range(q):
        u = vecs[j]
        pivot = int(np.argmax(np.abs(u[0])))
        u[0] = u[0] * np.exp(-1j * np.angle(u[0][pivot]))
        for i in range(grid_size - 1):
            z = np.vdot(u[i], u[i + 1])
            if abs(z) < 0.2:
                raise GaugeFixingError(
                    f"band {j}: overlap collapsed to {abs(z):.3f} at grid "
                    f"step {i}; matching unreliable"
                )
            u[i + 1] = u[i + 1] * (z.conjugate() / abs(z))
        z_c = np.vdot(u[-1], u[0])
        if abs(z_c) < 0.2:
            raise GaugeFixingError(f"band {j}: closure overlap {abs(z_c):.3f}")
        wphase = float(np.angle(z_c))
        u *= np.exp(1j * wphase * np.arange(grid_size) / grid_size)[:, None]

    # adaptive continuity: no branch may jump more than
    # JUMP_TOL_FACTOR x (its own top slope) x (grid spacing)
    dtheta = 2.0 * math.pi / grid_size
    for j in range(q):
        periodic = omega[j] - winding[j] * theta
        slope = float(np.max(np.abs(_spectral_derivative(periodic).real + winding[j])))
        tol = JUMP_TOL_FACTOR * max(slope, 1e-3) * dtheta
        jumps = np.abs(np.diff(omega[j]))
        wrap_jump = abs(omega[j][0] + 2.0 * math.pi * winding[j] - omega[j][-1])
        if (len(jumps) and jumps.max() > tol) or wrap_jump > tol:
            raise NumericsError(
                f"band {j}: eigenphase branch jumps exceed the continuity "
                f"tolerance {tol:.3e}"
            )

    data = BandData(theta, omega, vecs, winding, flags, params)
    if with_potentials:
        geo = [geometric_potentials(data, j) for j in range(q)]
        data.alpha = np.array([g.alpha for g in geo])
        data.alpha_raw = np.array([g.alpha_raw for g in geo])
        data.berry = np.array([g.berry for g in geo])
        data.sigma = np.array([g.sigma for g in geo])
        data.bpot = np.stack([g.bpot for g in geo])
        data.site_mean = np.stack([g.site_mean for g in geo])
    return data


def geometric_potentials(band: BandData, j: int) -> GeometricData:
    """Berry phase, connection offset and geometric potential of band j.

    All quantities come from the smooth periodic sections: the rotated
    connection A_j = i<phi~|phi~'> (phi~ = exp(i theta S / q) phi) must
    be real up to REALITY_TOL; alpha_raw = -berry - sigma is the
    principal-value offset, and for q <= 2 alpha is snapped to the
    analytic value -j/q after checking congruence mod 1/2.
    """
    q = band.params.q
    if not 0 <= j < q:
        raise ConfigError(f"band index {j} out of range for q={q}")
    u = band.vecs[j]  # (M, q)
    m = band.grid_size
    du = _spectral_derivative(u.T).T  # (M, q)
    ls = np.arange(q)

    inner = np.einsum("il,il->i", u.conj(), du)  # <phi|phi'>
    norm_resid = float(np.max(np.abs(inner.real)))
    if norm_resid > REALITY_TOL:
        raise GaugeFixingError(
            f"band {j}: sections drift off unit norm (residue {norm_resid:.3e})"
        )
    site = np.einsum("il,il->i", u.conj(), ls * u).real  # S(theta)
    conn = -inner.imag - site / q  # rotated-frame connection, real by gauge

    berry = float(np.mean(inner.imag))  # gamma_j = (1/2pi) oint Im<phi|phi'>
    sigma = float(np.mean(site)) / q
    alpha_raw = -berry - sigma  # = mean of conn

    m2 = np.einsum("il,il->i", u.conj(), (ls**2) * u).real
    sprime = np.einsum("il,il->i", u.conj(), ls * du)
    dd = np.einsum("il,il->i", du.conj(), du).real
    bpot = m2 + 2.0 * q * sprime.imag - (q * conn) ** 2 + q * q * dd

    if q <= 2:
        target = -j / q
        resid = (alpha_raw - target) % 0.5
        resid = min(resid, 0.5 - resid)
        if resid > ALPHA_SNAP_TOL:
            raise GaugeFixingError(
                f"band {j}: raw offset {alpha_raw:.8f} not congruent to "
                f"{target} mod 1/2 (residue {resid:.2e})"
            )
        alpha = target
    else:
        alpha = alpha_raw - round(alpha_raw)  # principal value in [-1/2, 1/2)
    return GeometricData(alpha, alpha_raw, berry, sigma, bpot, site)


def band_populations(field: SpinorField, band: BandData) -> np.ndarray:
    """Fraction of the field's norm carried by each band."""
    if field.grid_size != band.grid_size or not np.allclose(
        field.theta, band.theta, rtol=0.0, atol=1e-12
    ):
        raise ConfigError("field and band data sampled on different grids")
    if field.q != band.n_bands:
        raise ConfigError(
            f"field has {field.q} components, band data has {band.n_bands}"
        )
    total = field.norm()
    if total <= 0.0:
        raise ConfigError("cannot compute populations of a null field")
    amp = np.einsum("jil,li->ji", band.vecs.conj(), field.comps)
    pops = np.sum(np.abs(amp) ** 2, axis=1) * (2.0 * math.pi / field.grid_size)
    return pops / total


def omega_derivative(band: BandData, j: int) -> np.ndarray:
    """d omega_j / d theta on the band grid (winding handled exactly)."""
    q = band.params.q
    if not 0 <= j < q:
        raise ConfigError(f"band index {j} out of range for q={q}")
    w = band.winding[j]
    periodic = band.omega[j] - w * band.theta
    return _spectral_derivative(periodic).real + w
