"""Implementations of the CLI subcommands.

Each command validates nothing itself (the config layer already did),
fans independent work items over the thread pool, then writes all files
serially from the calling thread.  Data files (CSV / binary grids) are
the byte-exact record; PNG figures are rendered next to them unless the
run disables figures.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .. import __version__
from ..bands import BandData, band_structure
from ..ensemble import Ensemble, sample_gaussian_ensemble
from ..errors import ConfigError, OrbitNotFoundError
from ..husimi import husimi
from ..observables import box_probability, momentum_distribution
from ..packets import band_packet
from ..params import SystemParams
from ..pseudoclassical import (
    MapParams,
    find_periodic_orbit,
    find_periodic_orbits,
    orbit_acceleration,
    phase_portrait,
)
from ..rotor import KickRecorder, RotorState, evolve, plane_wave
from ..spectroscopy import Ratio, mode_curves, resonance_visibility, special_beta
from .config import RunConfig
from .formats import write_csv, write_grid
from .runner import diagnostic, parallel_map, progress


def _echo(cfg: RunConfig) -> dict:
    return cfg.as_dict()


def _initial_ensemble(
    cfg: RunConfig, params: SystemParams, span: int
) -> Ensemble:
    """Build the configured initial state as a (possibly 1-member) mixture."""
    spec = cfg.experiment["initial"]
    kind = spec["type"]
    if kind == "plane-wave":
        state = plane_wave(spec["n0"], params.beta, span=span)
        return Ensemble([state], [1.0])
    if kind == "packet":
        band = band_structure(params, grid_size=spec["grid_size"])
        state = band_packet(
            band,
            spec["band"],
            spec["n0"],
            spec["theta_center"],
            sigma_theta=spec.get("sigma_theta"),
            span=span,
        )
        return Ensemble([state], [1.0])
    # ensemble: momentum draws keyed by the config seed alone, so every
    # tau point of a scan sees the same atom cloud
    pin = params.beta if spec["pin_beta"] else None
    return sample_gaussian_ensemble(
        spec["fwhm"],
        spec["members"],
        cfg.seed,
        mean=spec["mean"],
        beta=pin,
        span=span,
    )


def _evolve_ensemble(
    ens: Ensemble,
    kicks: int,
    params_for: "list[SystemParams]",
    snapshots: list[int],
    threads: int,
):
    """Evolve each member, recording mean momentum per kick and snapshots.

    Returns (mean momentum per kick array, {t: Ensemble of snapshot states}).
    """
    snapset = set(snapshots)

    def run(args):
        member, params = args
        rec = KickRecorder(
            schedule=range(kicks + 1),
            transform=lambda s: (
                s.mean_momentum(),
                s.copy() if s.kick_count in snapset else None,
            ),
        )
        evolve(member, kicks, params, recorder=rec)
        means = np.array([rec.snapshots[t][0] for t in range(kicks + 1)])
        snaps = {t: rec.snapshots[t][1] for t in snapset if t <= kicks}
        return means, snaps

    results = parallel_map(run, zip(ens.members, params_for), threads)
    mean_traj = np.zeros(kicks + 1)
    for w, (means, _) in zip(ens.weights, results):
        mean_traj += w * means
    snap_ens = {
        t: Ensemble([snaps[t] for _, snaps in results], ens.weights)
        for t in snapset
        if t <= kicks
    }
    return mean_traj, snap_ens


def cmd_simulate(
    cfg: RunConfig, out_dir: Path, threads: int, figures: bool
) -> list[Path]:
    from . import figures as figs

    exp = cfg.experiment
    params = cfg.system_params()
    ens = _initial_ensemble(cfg, params, exp["span"])
    progress(
        f"simulate: {len(ens)} member(s), {exp['kicks']} kicks, "
        f"snapshots {exp['snapshots']}"
    )
    # each member keeps its own conserved quasimomentum
    member_params = [params.with_beta(m.beta) for m in ens.members]
    mean_traj, snap_ens = _evolve_ensemble(
        ens, exp["kicks"], member_params, exp["snapshots"], threads
    )
    written: list[Path] = []

    path = out_dir / "trajectory.csv"
    write_csv(
        path,
        ["kick", "mean_momentum"],
        [(t, mean_traj[t]) for t in range(exp["kicks"] + 1)],
        _echo(cfg),
        cfg.seed,
        __version__,
    )
    written.append(path)
    progress(f"wrote {path}")

    p_range = exp.get("p_range")
    hists = {}
    for t in sorted(snap_ens):
        hist = momentum_distribution(
            snap_ens[t],
            bin_width=exp["bin_width"],
            gauge=exp["gauge"],
            params=params,
            p_range=tuple(p_range) if p_range else None,
        )
        hists[t] = hist
        path = out_dir / f"momentum_t{t:05d}.csv"
        write_csv(
            path,
            ["momentum", "probability"],
            zip(hist.centers, hist.mass),
            _echo(cfg),
            cfg.seed,
            __version__,
        )
        written.append(path)
        progress(f"wrote {path}")

    if figures:
        written.append(figs.momentum_figure(out_dir / "momentum.png", hists))
        written.append(
            figs.trajectory_figure(
                out_dir / "trajectory.png",
                np.arange(exp["kicks"] + 1),
                mean_traj,
            )
        )
        progress(f"wrote {written[-2]} and {written[-1]}")
    return written


def cmd_scan_tau(
    cfg: RunConfig, out_dir: Path, threads: int, figures: bool
) -> list[Path]:
    from . import figures as figs

    exp = cfg.experiment
    grid = exp["tau_grid"]
    taus = np.linspace(grid["start"], grid["stop"], grid["count"])
    p_range = tuple(exp["p_range"])
    progress(
        f"scan-tau: {len(taus)} tau points x {exp['kicks']} kicks, "
        f"momentum window {p_range}"
    )

    def run_tau(tau: float):
        params = cfg.system_params(tau_over_2pi=float(tau))
        ens = _initial_ensemble(cfg, params, exp["span"])
        final = [
            evolve(m, exp["kicks"], params.with_beta(m.beta))
            for m in ens.members
        ]
        hist = momentum_distribution(
            Ensemble(final, ens.weights),
            bin_width=exp["bin_width"],
            gauge=exp["gauge"],
            params=params,
            p_range=p_range,
        )
        return hist

    hists = parallel_map(run_tau, taus, threads)
    centers = hists[0].centers
    density = np.vstack([h.mass for h in hists])

    written: list[Path] = []
    path = out_dir / "density.bin"
    write_grid(
        path,
        density,
        ["tau_over_2pi", "momentum"],
        {"tau_over_2pi": taus, "momentum": centers},
        _echo(cfg),
        cfg.seed,
        __version__,
    )
    written.append(path)
    progress(f"wrote {path} (shape {density.shape})")

    curves = []
    if exp["modes"]:
        sysb = cfg.system
        modes = [tuple(m) for m in exp["modes"]]
        curves = mode_curves(
            taus,
            sysb["p"],
            sysb["q"],
            modes,
            exp["kicks"],
            sysb["gravity"],
            k=sysb["kick_strength"],
        )
        columns = ["tau_over_2pi"] + [
            f"mode_{r}_{s}_j{j}" for (r, s, j), _ in curves
        ]
        rows = []
        for i, tau in enumerate(taus):
            rows.append([tau] + [curve[i] for _, curve in curves])
        path = out_dir / "curves.csv"
        write_csv(path, columns, rows, _echo(cfg), cfg.seed, __version__)
        written.append(path)
        progress(f"wrote {path}")

    if figures:
        written.append(
            figs.scan_tau_figure(
                out_dir / "scan_tau.png", taus, centers, density, curves
            )
        )
        progress(f"wrote {written[-1]}")
    return written


def _map_params(cfg: RunConfig, params: SystemParams, exp: dict) -> MapParams:
    if exp["source"] == "closed-form":
        return MapParams.from_closed_form(params, exp["band"])
    band = band_structure(params, grid_size=exp["grid_size"])
    return MapParams.from_bands(band, exp["band"])


def cmd_portrait(
    cfg: RunConfig, out_dir: Path, threads: int, figures: bool
) -> list[Path]:
    from . import figures as figs

    exp = cfg.experiment
    params = cfg.system_params()
    mp = _map_params(cfg, params, exp)
    progress(
        f"portrait: band {exp['band']} ({exp['source']}), "
        f"{exp['seed_grid']}^2 seeds x {exp['iters']} steps"
    )
    cloud = phase_portrait(mp, seed_grid=exp["seed_grid"], iters=exp["iters"])

    written: list[Path] = []
    rows = []
    for tr in range(cloud.shape[0]):
        for step in range(cloud.shape[1]):
            rows.append((tr, step, cloud[tr, step, 0], cloud[tr, step, 1]))
    path = out_dir / "portrait.csv"
    write_csv(
        path,
        ["trajectory", "step", "angle", "action"],
        rows,
        _echo(cfg),
        cfg.seed,
        __version__,
    )
    written.append(path)
    progress(f"wrote {path} ({len(rows)} points)")

    marked = []
    if exp["orbits"]:
        for r, s in exp["orbits"]:
            try:
                marked.extend(find_periodic_orbits(r, s, mp))
            except OrbitNotFoundError as exc:
                diagnostic(f"orbit ({r},{s}): {exc}")
        rows = []
        for i, orb in enumerate(marked):
            for pt in range(orb.s):
                rows.append(
                    (
                        orb.r,
                        orb.s,
                        i,
                        pt,
                        orb.thetas[pt],
                        orb.actions[pt],
                        orb.trace,
                        orb.residue,
                        orb.stable,
                    )
                )
        path = out_dir / "orbits.csv"
        write_csv(
            path,
            [
                "r",
                "s",
                "orbit",
                "point",
                "angle",
                "action",
                "trace",
                "residue",
                "stable",
            ],
            rows,
            _echo(cfg),
            cfg.seed,
            __version__,
        )
        written.append(path)
        progress(f"wrote {path} ({len(marked)} orbits)")

    if figures:
        written.append(
            figs.portrait_figure(out_dir / "portrait.png", cloud, marked)
        )
        progress(f"wrote {written[-1]}")
    return written


def cmd_bands(
    cfg: RunConfig, out_dir: Path, threads: int, figures: bool
) -> list[Path]:
    from . import figures as figs

    exp = cfg.experiment
    ks = exp["kick_strengths"]
    progress(f"bands: k in {ks}, grid {exp['grid_size']}")

    def run_k(k: float) -> BandData:
        params = cfg.system_params(kick_strength=float(k))
        return band_structure(params, grid_size=exp["grid_size"])

    bands = parallel_map(run_k, ks, threads)

    written: list[Path] = []
    per_k = []
    geometry_rows = []
    for k, band in zip(ks, bands):
        q = band.params.q
        columns = ["theta"]
        columns += [f"omega_{j}" for j in range(q)]
        columns += [f"bpot_{j}" for j in range(q)]
        rows = np.column_stack([band.theta, band.omega.T, band.bpot.T])
        path = out_dir / f"bands_k{k:g}.csv"
        write_csv(path, columns, rows, _echo(cfg), cfg.seed, __version__)
        written.append(path)
        progress(f"wrote {path}")
        per_k.append((k, band.theta, band.omega))
        gaps = band.gaps()
        min_gap = float(np.min(gaps)) if gaps.size else math.nan
        for j in range(q):
            periodic = band.omega[j] - band.winding[j] * band.theta
            geometry_rows.append(
                (
                    k,
                    j,
                    float(band.alpha[j]),
                    float(band.alpha_raw[j]),
                    int(band.winding[j]),
                    float(np.ptp(periodic)),
                    min_gap,
                )
            )
    path = out_dir / "band_geometry.csv"
    write_csv(
        path,
        ["k", "band", "alpha", "alpha_raw", "winding", "width", "min_gap"],
        geometry_rows,
        _echo(cfg),
        cfg.seed,
        __version__,
    )
    written.append(path)
    progress(f"wrote {path}")

    if figures:
        written.append(figs.bands_figure(out_dir / "bands.png", per_k))
        progress(f"wrote {written[-1]}")
    return written


def cmd_farey(
    cfg: RunConfig, out_dir: Path, threads: int, figures: bool
) -> list[Path]:
    from . import figures as figs

    exp = cfg.experiment
    g = exp["gravity"]
    progress(f"farey: {len(exp['resonances'])} resonances at g={g:g}")
    records = [
        resonance_visibility(p, q, g, max_terms=exp["max_terms"])
        for p, q in exp["resonances"]
    ]

    rows = []
    for rec in records:
        cf = rec.expansion
        terms = ";".join(str(t) for t in cf.terms)
        convs = ";".join(
            f"{c.r}/{c.s}" for c in rec.convergents[: exp["convergent_count"] + 1]
        )
        rows.append(
            (
                rec.p,
                rec.q,
                rec.omega_star,
                rec.frac_distance,
                rec.visible,
                cf.anchor,
                cf.sign,
                terms,
                convs,
            )
        )
    written: list[Path] = []
    path = out_dir / "resonances.csv"
    write_csv(
        path,
        [
            "p",
            "q",
            "omega_star",
            "distance",
            "visible",
            "cf_anchor",
            "cf_sign",
            "cf_terms",
            "convergents",
        ],
        rows,
        _echo(cfg),
        cfg.seed,
        __version__,
    )
    written.append(path)
    progress(f"wrote {path}")

    if figures:
        written.append(figs.farey_figure(out_dir / "farey.png", records))
        progress(f"wrote {written[-1]}")
    return written


def cmd_husimi(
    cfg: RunConfig, out_dir: Path, threads: int, figures: bool
) -> list[Path]:
    from . import figures as figs

    exp = cfg.experiment
    params = cfg.system_params()
    if params.epsilon == 0.0:
        raise ConfigError("husimi runs need a detuned system (epsilon != 0)")
    ens = _initial_ensemble(cfg, params, exp["span"])
    state = ens.members[0]
    progress(f"husimi: {exp['kicks']} kicks, snapshots {exp['snapshots']}")
    rec = KickRecorder(schedule=exp["snapshots"])
    evolve(state, exp["kicks"], params, recorder=rec)

    theta = np.linspace(
        -math.pi, math.pi, exp["theta_bins"], endpoint=False
    )
    hw = exp["action_half_width"]

    def grid_for(t: int):
        snap = rec.snapshots[t]
        if exp["action_center"] == "mean":
            center = params.epsilon * snap.mean_momentum() / params.q
        else:
            center = float(exp["action_center"])
        action = np.linspace(center - hw, center + hw, exp["action_bins"])
        return t, action, husimi(snap, theta, action, params)

    panels = parallel_map(grid_for, sorted(rec.snapshots), threads)

    written: list[Path] = []
    for t, action, grid in panels:
        path = out_dir / f"husimi_t{t:05d}.bin"
        write_grid(
            path,
            grid,
            ["action", "angle"],
            {"action": action, "angle": theta},
            _echo(cfg),
            cfg.seed,
            __version__,
        )
        written.append(path)
        progress(f"wrote {path} (shape {grid.shape})")

    if figures:
        written.append(
            figs.husimi_figure(
                out_dir / "husimi.png",
                [(t, theta, action, grid) for t, action, grid in panels],
            )
        )
        progress(f"wrote {written[-1]}")
    return written


def cmd_beta_scan(
    cfg: RunConfig, out_dir: Path, threads: int, figures: bool
) -> list[Path]:
    from . import figures as figs

    exp = cfg.experiment
    grid = exp["beta_grid"]
    betas = np.linspace(grid["start"], grid["stop"], grid["count"], endpoint=False)
    r, s = exp["mode"]
    params = cfg.system_params(beta=0.0)
    band = band_structure(params, grid_size=exp["grid_size"])

    # the observable mode lives on the widest band
    widths = [
        float(np.ptp(band.omega[j] - band.winding[j] * band.theta))
        for j in range(params.q)
    ]
    j_wide = int(np.argmax(widths))
    mp = MapParams.from_bands(band, j_wide)
    orbit = find_periodic_orbit(r, s, mp)
    acc = orbit_acceleration(r, s, params)
    center = exp["n0"] + acc.momentum_rate * exp["kicks"]
    progress(
        f"beta-scan: {len(betas)} points, mode ({r},{s}) on band {j_wide}, "
        f"box center {center:.2f} +/- {exp['box_width'] / 2:.2f} "
        f"after {exp['kicks']} kicks"
    )

    def run_beta(beta: float) -> float:
        state = plane_wave(exp["n0"], float(beta), span=exp["span"])
        final = evolve(state, exp["kicks"], params.with_beta(float(beta)))
        return box_probability(final, center, exp["box_width"])

    probs = np.array(parallel_map(run_beta, betas, threads))

    written: list[Path] = []
    path = out_dir / "beta_scan.csv"
    write_csv(
        path,
        ["beta", "probability"],
        zip(betas, probs),
        _echo(cfg),
        cfg.seed,
        __version__,
    )
    written.append(path)
    progress(f"wrote {path}")

    predictions = []
    for nu in range(params.p):
        for n in range(exp["predictions_n_max"] + 1):
            b = special_beta(
                exp["n0"],
                j_wide,
                nu,
                n,
                float(orbit.action0),
                params,
                alpha_j=float(band.alpha[j_wide]),
            )
            predictions.append((nu, n, b))
    predictions.sort(key=lambda item: item[2])
    path = out_dir / "beta_predictions.csv"
    write_csv(
        path,
        ["nu", "n", "beta"],
        predictions,
        _echo(cfg),
        cfg.seed,
        __version__,
    )
    written.append(path)
    progress(f"wrote {path} ({len(predictions)} predicted capture values)")

    if figures:
        written.append(
            figs.beta_scan_figure(
                out_dir / "beta_scan.png", betas, probs, predictions
            )
        )
        progress(f"wrote {written[-1]}")
    return written


COMMANDS = {
    "simulate": cmd_simulate,
    "scan-tau": cmd_scan_tau,
    "portrait": cmd_portrait,
    "bands": cmd_bands,
    "farey": cmd_farey,
    "husimi": cmd_husimi,
    "beta-scan": cmd_beta_scan,
}
