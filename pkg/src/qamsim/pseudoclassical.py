"""Pseudoclassical limit of the band dynamics near a q-cell resonance.

The detuning epsilon acts as an effective Planck constant; the classical
limit of one band's kicked dynamics is the area-preserving torus map

    theta' = theta + J                      (mod 2 pi)
    J'     = J - f_j(theta') + 2 pi Omega q (mod 2 pi)

with impulse f_j = epsilon q^2 domega_j/dtheta.  Accelerator modes are
its stable (r, s) periodic orbits: J advances by 2 pi r over s steps,
giving the mode acceleration a = (2 pi / epsilon) (r / (q s) - Omega).

Orbit search runs a damped Newton iteration on the lifted s-step map
from a grid of seeds, batched with closed-form 2x2 linear algebra, and
classifies each root by the Greene residue R = (2 - tr M) / 4 of its
monodromy matrix M (stable iff 0 < R < 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline

from .bands import BandData, omega_derivative
from .errors import ConfigError, OrbitNotFoundError
from .params import SystemParams
from . import q2

TWO_PI = 2.0 * math.pi
NEWTON_TOL = 1e-10
MAX_NEWTON = 100
SEED_GRID = 32


def wrap_angle(x: np.ndarray | float) -> np.ndarray | float:
    """Wrap to [-pi, pi)."""
    return (x + math.pi) % TWO_PI - math.pi


@dataclass
class MapParams:
    """Impulse function and drift constants of one band's torus map."""

    params: SystemParams
    j: int
    impulse: Callable[[np.ndarray], np.ndarray]
    impulse_prime: Callable[[np.ndarray], np.ndarray]
    alpha: float
    source: str

    @classmethod
    def from_bands(cls, band: BandData, j: int) -> "MapParams":
        """Tabulated impulse: periodic cubic spline of epsilon q^2 omega'."""
        params = band.params
        fvals = params.epsilon * params.q**2 * omega_derivative(band, j)
        x = np.append(band.theta, math.pi)
        y = np.append(fvals, fvals[0])
        spline = CubicSpline(x, y, bc_type="periodic")
        dspline = spline.derivative()
        if band.alpha is None:
            raise ConfigError("band data lacks geometric potentials")
        return cls(
            params=params,
            j=j,
            impulse=lambda th: spline(wrap_angle(th)),
            impulse_prime=lambda th: dspline(wrap_angle(th)),
            alpha=float(band.alpha[j]),
            source="bands",
        )

    @classmethod
    def from_closed_form(cls, params: SystemParams, j: int) -> "MapParams":
        """Analytic q=2 impulse (odd p)."""
        return cls(
            params=params,
            j=j,
            impulse=lambda th: q2.map_impulse(th, params, j),
            impulse_prime=lambda th: q2.map_impulse_prime(th, params, j),
            alpha=q2.alpha(j),
            source="closed-form",
        )

    @property
    def drift(self) -> float:
        """Constant gain 2 pi Omega q of J per map step."""
        return TWO_PI * self.params.Omega * self.params.q

    @property
    def rho(self) -> float:
        """Unreduced angle offset linking the torus and accelerated frames.

        rho = q (-epsilon q alpha_j + pi Omega + tau beta - 2 pi p beta0 / q).
        """
        p = self.params
        return p.q * (
            -p.epsilon * p.q * self.alpha
            + math.pi * p.Omega
            + p.tau * p.beta
            - TWO_PI * p.p * p.beta0 / p.q
        )


class OrbitAcceleration(NamedTuple):
    action_rate: float  # mean action gain per kick in the accelerated frame
    momentum_rate: float  # mean momentum gain per kick (falling frame)


@dataclass
class PeriodicOrbit:
    """An (r, s) periodic orbit of the torus map with its linear stability."""

    r: int
    s: int
    thetas: np.ndarray
    actions: np.ndarray
    trace: float
    residue: float
    stable: bool

    @property
    def theta0(self) -> float:
        return float(self.thetas[0])

    @property
    def action0(self) -> float:
        return float(self.actions[0])


def torus_map_step(
    theta: np.ndarray | float, action: np.ndarray | float, mp: MapParams
):
    """One forward step of the (theta, J) torus map."""
    th1 = wrap_angle(theta + action)
    j1 = wrap_angle(action - mp.impulse(th1) + mp.drift)
    return th1, j1


def torus_map_back(
    theta: np.ndarray | float, action: np.ndarray | float, mp: MapParams
):
    """Exact inverse of torus_map_step."""
    j0 = wrap_angle(action + mp.impulse(theta) - mp.drift)
    th0 = wrap_angle(theta - j0)
    return th0, j0


def accelerated_map_step(
    theta: np.ndarray | float,
    action: np.ndarray | float,
    kick_index: int,
    mp: MapParams,
):
    """One step of the accelerated-frame (theta, I) map at the given kick.

    theta' = theta + q^2 I + 2 pi Omega q n + rho (mod 2 pi),
    I'     = I - f(theta') / q^2;
    the substitution J = q^2 I + 2 pi Omega q n + rho recovers the torus map.

    The drift constant is reduced mod 2 pi before multiplying by the kick
    index (an exact congruence), keeping the angle argument small enough
    that rounding stays far below the map's 1e-12 equivalence budget.
    """
    q2_ = mp.params.q**2
    phase = wrap_angle(wrap_angle(mp.drift) * kick_index)
    th1 = wrap_angle(theta + q2_ * action + phase + wrap_angle(mp.rho))
    i1 = action - mp.impulse(th1) / q2_
    return th1, i1


def _lifted_flow(theta0, action0, s: int, mp: MapParams):
    """s lifted steps; returns end point and per-seed monodromy matrices."""
    th = np.array(theta0, dtype=float, copy=True)
    jj = np.array(action0, dtype=float, copy=True)
    m11 = np.ones_like(th)
    m12 = np.zeros_like(th)
    m21 = np.zeros_like(th)
    m22 = np.ones_like(th)
    for _ in range(s):
        th = th + jj
        fp = mp.impulse_prime(th)
        jj = jj - mp.impulse(th) + mp.drift
        # step Jacobian [[1, 1], [-f', 1 - f']] left-multiplies M
        n11 = m11 + m21
        n12 = m12 + m22
        n21 = -fp * n11 + m21
        n22 = -fp * n12 + m22
        m11, m12, m21, m22 = n11, n12, n21, n22
    return th, jj, (m11, m12, m21, m22)


def _residual(theta0, action0, r: int, s: int, mp: MapParams):
    th, jj, mono = _lifted_flow(theta0, action0, s, mp)
    g1 = wrap_angle(th - theta0)
    g2 = jj - action0 - TWO_PI * r
    return g1, g2, mono


def find_periodic_orbits(
    r: int,
    s: int,
    mp: MapParams,
    seeds: np.ndarray | None = None,
    newton_tol: float = NEWTON_TOL,
    max_iter: int = MAX_NEWTON,
) -> list[PeriodicOrbit]:
    """All distinct (r, s) orbits found from the seed grid, stable first.

    Damped (step-halving) Newton iteration on the lifted s-step map,
    run simultaneously over all seeds.  r and s need not be coprime;
    non-coprime pairs are legitimate distinct targets (repetitions of
    shorter orbits included).
    """
    if mp.params.epsilon == 0.0:
        raise ConfigError("pseudoclassical map undefined at epsilon=0")
    if s < 1:
        raise ConfigError(f"orbit period must be positive, got {s}")
    grid = (np.arange(SEED_GRID) + 0.5) / SEED_GRID * TWO_PI - math.pi
    tt, jg = np.meshgrid(grid, grid, indexing="ij")
    grid_seeds = np.column_stack([tt.ravel(), jg.ravel()])
    if seeds is not None:
        user = np.atleast_2d(np.asarray(seeds, dtype=float))
        grid_seeds = np.vstack([user, grid_seeds])
    th = grid_seeds[:, 0].copy()
    jj = grid_seeds[:, 1].copy()

    g1, g2, mono = _residual(th, jj, r, s, mp)
    err = np.maximum(np.abs(g1), np.abs(g2))
    for _ in range(max_iter):
        active = err > newton_tol
        if not np.any(active):
            break
        m11, m12, m21, m22 = (m[active] for m in mono)
        # DG = M - I; solve DG dx = -G with the 2x2 adjugate
        a, b, c, d = m11 - 1.0, m12, m21, m22 - 1.0
        det = a * d - b * c
        det = np.where(np.abs(det) < 1e-14, np.inf, det)
        ga, gb = g1[active], g2[active]
        dth = -(d * ga - b * gb) / det
        djj = -(-c * ga + a * gb) / det
        lam = np.ones_like(dth)
        base = err[active]
        th_a, jj_a = th[active], jj[active]
        for _half in range(7):
            t1, t2, _ = _residual(th_a + lam * dth, jj_a + lam * djj, r, s, mp)
            trial = np.maximum(np.abs(t1), np.abs(t2))
            bad = trial > (1.0 - 0.5 * lam) * base
            if not np.any(bad):
                break
            lam = np.where(bad, lam * 0.5, lam)
        th[active] = th_a + lam * dth
        jj[active] = jj_a + lam * djj
        g1, g2, mono = _residual(th, jj, r, s, mp)
        err = np.maximum(np.abs(g1), np.abs(g2))

    ok = err <= newton_tol
    if not np.any(ok):
        raise OrbitNotFoundError(
            f"no ({r},{s}) orbit converged from {len(th)} seeds"
        )
    roots = np.column_stack([wrap_angle(th[ok]), wrap_angle(jj[ok])])

    orbits: dict[tuple, PeriodicOrbit] = {}
    for th0, jj0 in roots:
        pts_th, pts_jj = [th0], [jj0]
        a, b = th0, jj0
        for _ in range(s - 1):
            a, b = torus_map_step(a, b, mp)
            pts_th.append(float(a))
            pts_jj.append(float(b))
        cyc = sorted(
            (round(float(t), 7), round(float(x), 7))
            for t, x in zip(pts_th, pts_jj)
        )
        key = tuple(cyc)
        if key in orbits:
            continue
        _, _, mono1 = _residual(np.array([th0]), np.array([jj0]), r, s, mp)
        tr = float(mono1[0][0] + mono1[3][0])
        res = (2.0 - tr) / 4.0
        orbits[key] = PeriodicOrbit(
            r=r,
            s=s,
            thetas=np.array(pts_th),
            actions=np.array(pts_jj),
            trace=tr,
            residue=res,
            stable=bool(0.0 < res < 1.0),
        )
    found = sorted(
        orbits.values(),
        key=lambda o: (not o.stable, round(o.theta0, 6), round(o.action0, 6)),
    )
    return found


def find_periodic_orbit(
    r: int,
    s: int,
    mp: MapParams,
    seeds: np.ndarray | None = None,
    newton_tol: float = NEWTON_TOL,
    max_iter: int = MAX_NEWTON,
) -> PeriodicOrbit:
    """Best (r, s) orbit from the seed grid: stable if one exists."""
    return find_periodic_orbits(r, s, mp, seeds, newton_tol, max_iter)[0]


def orbit_acceleration(r: int, s: int, params: SystemParams) -> OrbitAcceleration:
    """Mode-locked acceleration of an (r, s) orbit.

    action_rate = (2 pi / q) (r / (q s) - Omega) per kick in the
    accelerated frame; momentum_rate = (q / epsilon) * action_rate is the
    falling-frame momentum gain per kick.
    """
    if params.epsilon == 0.0:
        raise ConfigError("acceleration undefined at epsilon=0")
    if s < 1:
        raise ConfigError(f"orbit period must be positive, got {s}")
    x = r / (params.q * s) - params.Omega
    a_i = TWO_PI / params.q * x
    return OrbitAcceleration(a_i, TWO_PI / params.epsilon * x)


def phase_portrait(
    mp: MapParams,
    seed_grid: int = 24,
    iters: int = 400,
    seeds: np.ndarray | None = None,
) -> np.ndarray:
    """Torus-map trajectories; shape (n_trajectories, iters + 1, 2)."""
    if iters < 1:
        raise ConfigError(f"iters must be >= 1, got {iters}")
    if seeds is None:
        g = (np.arange(seed_grid) + 0.5) / seed_grid * TWO_PI - math.pi
        tt, jj = np.meshgrid(g, g, indexing="ij")
        seeds = np.column_stack([tt.ravel(), jj.ravel()])
    seeds = np.asarray(seeds, dtype=float)
    th = wrap_angle(seeds[:, 0].copy())
    jj = wrap_angle(seeds[:, 1].copy())
    out = np.empty((len(seeds), iters + 1, 2))
    out[:, 0, 0] = th
    out[:, 0, 1] = jj
    for t in range(1, iters + 1):
        th, jj = torus_map_step(th, jj, mp)
        out[:, t, 0] = th
        out[:, t, 1] = jj
    return out
