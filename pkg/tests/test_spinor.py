"""Spinor representation: fold/unfold, propagator, momentum correspondence."""

import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.linalg import expm

from qamsim import build_params
from qamsim.errors import ConfigError, GridMismatchError
from qamsim.rotor import floquet_step, plane_wave
from qamsim.spinor import (
    SpinorField,
    apply_propagator,
    decompose,
    default_grid_size,
    field_mean_momentum,
    propagator_matrices,
    recompose,
    site_hop_matrix,
    spin_propagator,
    theta_grid,
)


def gaussian(beta: float, span: int = 256, sigma: float = 8.0):
    st = plane_wave(0, beta, span=span)
    amps = np.exp(-(st.ladder.astype(float) ** 2) / (4.0 * sigma**2)).astype(complex)
    amps /= math.sqrt(float(np.sum(np.abs(amps) ** 2)))
    return replace(st, amps=amps)


def test_plane_wave_decomposes_to_single_harmonic(base_params):
    # ladder site n0 = l0 + m0 q lands entirely in component l0 as the
    # harmonic exp(i m0 theta) / sqrt(2 pi)
    pw = plane_wave(5, 0.3, span=1024)            # l0 = 1, m0 = 2 for q = 2
    f = decompose(pw, base_params)
    assert np.max(np.abs(f.comps[0])) == 0.0
    target = np.exp(2j * f.theta) / math.sqrt(2.0 * math.pi)
    assert np.max(np.abs(f.comps[1] - target)) < 1e-13
    assert abs(f.norm() - 1.0) < 1e-12


def test_decompose_recompose_roundtrip(base_params):
    st = gaussian(0.1672)
    f = decompose(st, base_params)
    back = recompose(f, base_params, st.n_min, st.span)
    assert np.max(np.abs(back.amps - st.amps)) < 1e-12
    assert back.beta == st.beta and back.n_min == st.n_min
    assert abs(f.norm() - st.norm()) < 1e-12


def test_momentum_correspondence(capture_params):
    # fibrated momentum operator reproduces the ladder <N>
    P = capture_params
    st = gaussian(P.beta)
    for _ in range(3):
        st = floquet_step(st, P)
    f = decompose(st, P)
    ladder_n = st.mean_momentum() - st.beta * st.norm()
    assert abs(field_mean_momentum(f) - ladder_n) < 1e-10


def test_resonant_propagator_matches_floquet_period():
    # at exact resonance (epsilon = 0, g = 0, beta = beta0) one application
    # of A(theta) is exactly one ladder Floquet period
    P = build_params(k=1.0, tau_over_2pi=1.5, g=0.0, p=3, q=2)
    assert P.beta == P.beta0
    st = gaussian(P.beta)
    u = floquet_step(st, P)
    f = decompose(st, P)
    f2 = apply_propagator(f, spin_propagator(P, f.theta))
    v = recompose(f2, P, st.n_min, st.span)
    assert f2.kick_count == 1
    assert np.max(np.abs(u.amps - v.amps)) < 1e-12


def test_propagator_unitary(base_params, q7_params):
    for P in (base_params, q7_params):
        prop = spin_propagator(P, theta_grid(256))
        assert prop.unitarity_defect() < 1e-12


def test_propagator_periodic_in_theta(base_params):
    th = theta_grid(64)
    a = propagator_matrices(base_params, th)
    b = propagator_matrices(base_params, th + 2.0 * math.pi)
    assert np.max(np.abs(a - b)) < 1e-12


def test_propagator_scalar_case(q1_params):
    # q = 1: A(theta) = exp(-i k cos theta) exp(-i pi p beta0^2)
    P = q1_params
    th = theta_grid(32)
    mats = propagator_matrices(P, th)
    assert mats.shape == (32, 1, 1)
    expect = np.exp(-1j * P.k * np.cos(th)) * np.exp(
        -1j * math.pi * P.p * P.beta0**2
    )
    assert np.max(np.abs(mats[:, 0, 0] - expect)) < 1e-12
    # scalar theta input returns a bare (q, q) matrix
    single = propagator_matrices(P, 0.7)
    assert single.shape == (1, 1)
    assert abs(single[0, 0] - np.exp(-1j * P.k * math.cos(0.7))
               * np.exp(-1j * math.pi * P.p * P.beta0**2)) < 1e-13


@pytest.mark.parametrize("p,q,k", [(3, 2, 1.0), (11, 7, 1.0), (1, 1, 0.8), (2, 5, 2.0)])
def test_kick_factor_is_hop_matrix_exponential(p, q, k):
    # the spectral construction of exp(-i k V) agrees with a dense matrix
    # exponential of the nearest-site hop generator
    P = build_params(k=k, tau_over_2pi=p / q + 0.01, g=0.01, p=p, q=q)
    ls = np.arange(q)
    gphase = np.exp(-1j * math.pi * (p / q) * (ls + P.beta0) ** 2)
    for th in (-3.0, -1.2, 0.0, 0.7, 2.9):
        kick = propagator_matrices(P, th) / gphase[None, :]
        dense = expm(-1j * k * site_hop_matrix(th, q))
        assert np.max(np.abs(kick - dense)) < 1e-12


def test_zero_kick_eigenphases(circ):
    # k = 0 leaves only the resonant free phases pi (p/q) (l + beta0)^2
    P = build_params(k=0.0, tau_over_2pi=1.455, g=0.0386, p=3, q=2)
    w = np.linalg.eigvals(propagator_matrices(P, -math.pi))
    phases = np.sort(np.mod(-np.angle(w), 2.0 * math.pi))
    assert circ(phases, [0.0, 1.5 * math.pi]).max() < 1e-12


def test_grid_validation(base_params):
    st = gaussian(0.1672, span=1024)
    with pytest.raises(ConfigError):
        decompose(st, base_params, grid_size=256)  # window needs 512 bins
    f = decompose(st, base_params)
    assert f.grid_size == default_grid_size(1024, 2)
    with pytest.raises(ConfigError):
        recompose(f, base_params, -8192, 16384)  # window outgrows the grid


def test_recompose_q_mismatch(q1_params):
    f = SpinorField(theta_grid(256), np.zeros((2, 256), dtype=complex))
    with pytest.raises(GridMismatchError):
        recompose(f, q1_params, -128, 256)


def test_field_shape_validation():
    with pytest.raises(GridMismatchError):
        SpinorField(theta_grid(16), np.zeros((2, 8), dtype=complex))


def test_apply_propagator_shape_guard(base_params):
    f = SpinorField(theta_grid(64), np.zeros((2, 64), dtype=complex))
    bad = propagator_matrices(base_params, theta_grid(32))
    with pytest.raises(GridMismatchError):
        apply_propagator(f, bad)
