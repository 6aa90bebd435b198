"""Momentum-ladder evolution: unitarity, symmetry, gauges, window growth."""

import math
from dataclasses import replace

import numpy as np
import pytest

from qamsim import build_params
from qamsim.errors import ConfigError, UnderResolvedError
from qamsim.rotor import (
    FALLING,
    LAB,
    MAX_SPAN,
    KickRecorder,
    RotorState,
    enlarge_ladder,
    evolve,
    floquet_step,
    gauge_shift,
    plane_wave,
)


def gaussian_state(beta: float, sigma: float = 8.0, span: int = 256) -> RotorState:
    st = plane_wave(0, beta, span=span)
    amps = np.exp(-(st.ladder.astype(float) ** 2) / (4.0 * sigma**2)).astype(complex)
    amps /= math.sqrt(float(np.sum(np.abs(amps) ** 2)))
    return replace(st, amps=amps)


def test_unitarity_per_kick(capture_params):
    st = plane_wave(0, capture_params.beta)
    for _ in range(100):
        st = floquet_step(st, capture_params)
        assert abs(st.norm() - 1.0) < 1e-12
    assert st.kick_count == 100


def test_translation_symmetry_at_exact_resonance():
    # at epsilon = 0 a shift by q ladder sites commutes with one kick period
    # up to a global phase, gravity included
    P = build_params(k=1.0, tau_over_2pi=1.5, g=0.0386, p=3, q=2, beta=0.1672)
    st = gaussian_state(P.beta)
    rolled = replace(st, amps=np.roll(st.amps, P.q))
    a = floquet_step(rolled, P)
    b = replace(floquet_step(st, P), amps=np.roll(floquet_step(st, P).amps, P.q))
    overlap = abs(np.vdot(a.amps, b.amps))
    assert abs(overlap - 1.0) < 1e-12


def test_translation_symmetry_broken_off_resonance(capture_params):
    P = capture_params
    st = gaussian_state(P.beta)
    rolled = replace(st, amps=np.roll(st.amps, P.q))
    a = floquet_step(rolled, P)
    b = replace(floquet_step(st, P), amps=np.roll(floquet_step(st, P).amps, P.q))
    assert abs(np.vdot(a.amps, b.amps)) < 0.999


def test_zero_kick_strength_preserves_distribution(capture_params):
    P = build_params(k=0.0, tau_over_2pi=1.455, g=0.0386, p=3, q=2, beta=0.1672)
    st = gaussian_state(P.beta)
    before = np.abs(st.amps) ** 2
    out = evolve(st.copy(), 25, P)
    assert np.max(np.abs(np.abs(out.amps) ** 2 - before)) < 1e-13
    assert out.mean_momentum() == pytest.approx(st.mean_momentum(), abs=1e-12)


def test_ladder_growth_under_strong_kicking():
    P = build_params(k=5.0, tau_over_2pi=1.455, g=0.0386, p=3, q=2, beta=0.3)
    st = plane_wave(0, 0.3, span=64)
    out = evolve(st, 60, P)
    assert out.span > 64            # window doubled at least once
    assert out.span & (out.span - 1) == 0
    assert abs(out.norm() - 1.0) < 1e-11
    assert out.kick_count == 60


def test_enlarge_ladder_embeds_and_preserves():
    st = gaussian_state(0.25, sigma=5.0, span=64)
    big = enlarge_ladder(st)
    assert big.span == 128
    assert big.n_min <= st.n_min and big.n_max >= st.n_max
    assert abs(big.norm() - st.norm()) < 1e-15
    assert big.mean_momentum() == pytest.approx(st.mean_momentum(), abs=1e-12)
    off = st.n_min - big.n_min
    assert np.array_equal(big.amps[off:off + st.span], st.amps)


def test_enlarge_ladder_cap():
    st = plane_wave(0, 0.0, span=MAX_SPAN)
    with pytest.raises(UnderResolvedError):
        enlarge_ladder(st)


def test_gauge_shift_state_roundtrip(capture_params):
    P = capture_params
    st = evolve(plane_wave(0, P.beta), 17, P)
    lab = gauge_shift(st, P, LAB)
    assert lab.gauge == LAB
    # lab momenta exceed falling momenta by eta * t
    assert lab.mean_momentum() == pytest.approx(
        st.mean_momentum() + P.eta * 17, abs=1e-10
    )
    assert 0.0 <= lab.beta < 1.0
    back = gauge_shift(lab, P, FALLING)
    assert back.gauge == FALLING
    assert back.beta == pytest.approx(st.beta, abs=1e-12)
    assert back.n_min == st.n_min
    assert np.array_equal(back.amps, st.amps)
    # idempotent when already in the target gauge
    assert gauge_shift(st, P, FALLING) is st


def test_floquet_step_guards(capture_params):
    P = capture_params
    st = plane_wave(0, P.beta)
    lab = replace(st, gauge=LAB)
    with pytest.raises(ConfigError):
        floquet_step(lab, P)
    with pytest.raises(ConfigError):
        floquet_step(plane_wave(0, 0.9), P)  # beta mismatch
    with pytest.raises(ConfigError):
        gauge_shift(st, P, "rotating")


def test_state_validation():
    with pytest.raises(ConfigError):
        RotorState(beta=0.1, n_min=0, amps=np.zeros(24, dtype=complex))
    with pytest.raises(ConfigError):
        RotorState(beta=0.1, n_min=0, amps=np.zeros((4, 4), dtype=complex))
    with pytest.raises(ConfigError):
        RotorState(beta=0.1, n_min=0, amps=np.zeros(16, dtype=complex), gauge="x")
    with pytest.raises(ConfigError):
        plane_wave(0, 0.1, span=48)
    with pytest.raises(ConfigError):
        plane_wave(900, 0.1, span=1024)  # outside [-512, 511]


def test_evolve_zero_kicks_and_recorder(capture_params):
    P = capture_params
    st = plane_wave(0, P.beta)
    rec = KickRecorder(schedule={0})
    out = evolve(st, 0, P, recorder=rec)
    assert out is st
    assert set(rec.snapshots) == {0}
    with pytest.raises(ConfigError):
        evolve(st, -1, P)


def test_recorder_schedule_and_transform(capture_params):
    P = capture_params
    rec = KickRecorder(schedule={0, 3, 7}, transform=lambda s: s.mean_momentum())
    evolve(plane_wave(0, P.beta), 7, P, recorder=rec)
    assert sorted(rec.snapshots) == [0, 3, 7]
    assert all(isinstance(v, float) for v in rec.snapshots.values())
    assert rec.snapshots[0] == pytest.approx(P.beta, abs=1e-14)


def test_evolution_deterministic(capture_params):
    P = capture_params
    a = evolve(plane_wave(0, P.beta), 40, P)
    b = evolve(plane_wave(0, P.beta), 40, P)
    assert np.array_equal(a.amps, b.amps)
    assert a.n_min == b.n_min
