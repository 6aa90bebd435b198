"""Momentum histograms, box probabilities, and ensemble handling."""

import math
from dataclasses import replace

import numpy as np
import pytest

from qamsim.ensemble import Ensemble, sample_gaussian_ensemble
from qamsim.errors import ConfigError, GridMismatchError
from qamsim.observables import MomentumHistogram, box_probability, momentum_distribution
from qamsim.rotor import FALLING, LAB, evolve, plane_wave


def test_plane_wave_lands_in_single_bin():
    st = plane_wave(3, 0.1672, span=64)
    h = momentum_distribution(st, bin_width=0.25)
    assert h.total() == pytest.approx(1.0, abs=1e-15)
    occupied = np.nonzero(h.mass)[0]
    assert len(occupied) == 1
    i = occupied[0]
    # p = 3.1672 belongs to [3.0, 3.25)
    assert h.edges[i] <= 3.1672 < h.edges[i + 1]
    assert h.edges[i] == pytest.approx(3.0)


def test_bins_anchor_at_width_multiples():
    st = plane_wave(0, 0.5, span=32)
    h = momentum_distribution(st, bin_width=0.25)
    assert np.allclose(h.edges / 0.25, np.round(h.edges / 0.25), atol=1e-12)
    assert h.bin_width == pytest.approx(0.25)
    assert np.allclose(h.centers, 0.5 * (h.edges[:-1] + h.edges[1:]))
    assert np.allclose(h.density() * 0.25, h.mass)


def test_momentum_range_clips_mass():
    st = plane_wave(10, 0.0, span=64)
    h = momentum_distribution(st, bin_width=0.5, p_range=(-2.0, 2.0))
    assert h.total() == pytest.approx(0.0, abs=1e-15)
    assert h.edges[0] <= -2.0 and h.edges[-1] >= 2.0
    full = momentum_distribution(st, bin_width=0.5, p_range=(-2.0, 12.0))
    assert full.total() == pytest.approx(1.0, abs=1e-15)


def test_gauge_shift_moves_edges_not_mass(capture_params):
    P = capture_params
    st = evolve(plane_wave(0, P.beta), 9, P)
    fall = momentum_distribution(st, bin_width=0.25)
    lab = momentum_distribution(st, bin_width=0.25, gauge=LAB, params=P)
    assert lab.gauge == LAB and fall.gauge == FALLING
    assert np.array_equal(lab.mass, fall.mass)
    assert np.allclose(lab.edges, fall.edges + P.eta * 9, atol=1e-12)
    with pytest.raises(ConfigError):
        momentum_distribution(st, bin_width=0.25, gauge=LAB)  # params missing
    with pytest.raises(ConfigError):
        momentum_distribution(st, bin_width=0.25, gauge="rotating")


def test_histogram_validation():
    with pytest.raises(GridMismatchError):
        MomentumHistogram(edges=np.arange(5.0), mass=np.ones(5))
    st = plane_wave(0, 0.3, span=32)
    with pytest.raises(ConfigError):
        momentum_distribution(st, bin_width=0.0)
    with pytest.raises(ConfigError):
        momentum_distribution(st, bin_width=0.25, p_range=(2.0, -2.0))
    with pytest.raises(ConfigError):
        momentum_distribution("nope")


def test_mixed_member_states_rejected(capture_params):
    P = capture_params
    a = evolve(plane_wave(0, P.beta, span=64), 2, P)
    b = plane_wave(0, P.beta, span=64)
    ens = Ensemble([a, b], np.array([0.5, 0.5]))
    with pytest.raises(ConfigError):
        momentum_distribution(ens)
    c = replace(b.copy(), gauge=LAB)
    ens2 = Ensemble([b, c], np.array([0.5, 0.5]))
    with pytest.raises(ConfigError):
        momentum_distribution(ens2)


def test_box_probability_closed_interval():
    st = plane_wave(2, 0.0, span=32)
    # the box is closed: momenta exactly on either edge count
    assert box_probability(st, 2.0, 1.0) == pytest.approx(1.0)
    assert box_probability(st, 1.5, 1.0) == pytest.approx(1.0)  # p = upper edge
    assert box_probability(st, 2.5, 1.0) == pytest.approx(1.0)  # p = lower edge
    assert box_probability(st, 4.0, 1.0) == pytest.approx(0.0)
    with pytest.raises(ConfigError):
        box_probability(st, 0.0, 0.0)


def test_ensemble_mixture_is_weighted_sum():
    a = plane_wave(0, 0.25, span=32)
    b = plane_wave(5, 0.75, span=32)
    ens = Ensemble([a, b], np.array([0.75, 0.25]))
    h = momentum_distribution(ens, bin_width=0.5)
    ha = momentum_distribution(a, bin_width=0.5, p_range=(h.edges[0], h.edges[-1]))
    hb = momentum_distribution(b, bin_width=0.5, p_range=(h.edges[0], h.edges[-1]))
    assert np.allclose(h.mass, 0.75 * ha.mass + 0.25 * hb.mass, atol=1e-15)
    assert ens.mean_momentum() == pytest.approx(
        0.75 * a.mean_momentum() + 0.25 * b.mean_momentum()
    )
    assert box_probability(ens, 0.25, 0.1) == pytest.approx(0.75)
    assert len(ens) == 2 and ens.kick_count == 0


def test_ensemble_weight_validation():
    a = plane_wave(0, 0.25, span=32)
    with pytest.raises(ConfigError):
        Ensemble([a], np.array([0.5]))          # weights must sum to 1
    with pytest.raises(ConfigError):
        Ensemble([a, a.copy()], np.array([1.5, -0.5]))  # nonnegative
    with pytest.raises(ConfigError):
        Ensemble([a], np.array([0.5, 0.5]))     # length mismatch
    with pytest.raises(ConfigError):
        Ensemble([], np.array([]))


def test_gaussian_sampling_deterministic():
    e1 = sample_gaussian_ensemble(2.0, 16, seed=11, span=64)
    e2 = sample_gaussian_ensemble(2.0, 16, seed=11, span=64)
    assert all(
        m1.n_min == m2.n_min and m1.beta == m2.beta
        and np.array_equal(m1.amps, m2.amps)
        for m1, m2 in zip(e1.members, e2.members)
    )
    e3 = sample_gaussian_ensemble(2.0, 16, seed=12, span=64)
    assert any(m1.beta != m3.beta for m1, m3 in zip(e1.members, e3.members))


def test_gaussian_sampling_width_and_split():
    ens = sample_gaussian_ensemble(2.0, 4000, seed=1, mean=3.0, span=64)
    ps = np.array([m.momenta()[np.argmax(np.abs(m.amps))] for m in ens.members])
    sigma = 2.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    assert np.mean(ps) == pytest.approx(3.0, abs=5 * sigma / math.sqrt(4000))
    assert np.std(ps) == pytest.approx(sigma, rel=0.1)
    assert all(0.0 <= m.beta < 1.0 for m in ens.members)


def test_gaussian_sampling_pinned_beta():
    ens = sample_gaussian_ensemble(2.0, 32, seed=5, beta=0.1672, span=64)
    assert all(m.beta == pytest.approx(0.1672, abs=1e-15) for m in ens.members)
    with pytest.raises(ConfigError):
        sample_gaussian_ensemble(2.0, 0, seed=1)
    with pytest.raises(ConfigError):
        sample_gaussian_ensemble(-1.0, 4, seed=1)
