"""Mode arithmetic: rescaled gravity, continued fractions, mediants, captures."""

import math
from fractions import Fraction

import numpy as np
import pytest

from qamsim import build_params
from qamsim.errors import ConfigError
from qamsim.spectroscopy import (
    CFExpansion,
    Ratio,
    continued_fraction,
    convergents,
    farey_mediant,
    mode_curves,
    omega_bare,
    omega_star,
    resonance_visibility,
    special_beta,
)

G = 0.0386

# the printed reference values round/truncate inconsistently, so each is
# held to one ulp of its last printed digit
REFERENCE_OMEGAS = [
    (3, 2, "1.0913893"),
    (11, 7, "4.1923207"),
    (20, 13, "7.4624908"),
    (22, 15, "7.82566"),
    (25, 17, "8.9165791"),
    (28, 19, "10.0075"),
    (31, 21, "11.098678"),
    (53, 36, "18.924152"),
    (59, 40, "21.106256"),
]


@pytest.mark.parametrize("p,q,printed", REFERENCE_OMEGAS)
def test_rescaled_gravity_reference_values(p, q, printed):
    tol = 10.0 ** -len(printed.split(".")[1])
    assert abs(omega_star(p, q, G) - float(printed)) < tol


def test_rescaled_gravity_formula():
    assert omega_star(3, 2, G) == pytest.approx(2 * math.pi * 9 * G / 2, rel=1e-15)
    assert omega_star(3, 2, 0.0) == 0.0
    with pytest.raises(ConfigError):
        omega_star(0, 2, G)
    with pytest.raises(ConfigError):
        omega_star(3, 0, G)


@pytest.mark.parametrize(
    "p,q,anchor,sign,prefix",
    [
        (3, 2, 1, 1, (10, 1, 16, 3, 3)),
        (11, 7, 4, 1, (5,)),
        (20, 13, 7, 1, (2, 6, 6)),
        (22, 15, 8, -1, (5, 1, 2, 1)),
        (25, 17, 9, -1, (11, 1, 78)),
        (28, 19, 10, 1, (131,)),
        (31, 21, 11, 1, (10, 7, 2, 6, 1)),
        (53, 36, 19, -1, (13, 5, 2)),
        (59, 40, 21, 1, (9, 2, 2, 3)),
    ],
)
def test_continued_fraction_prefixes(p, q, anchor, sign, prefix):
    cf = continued_fraction(omega_star(p, q, G), 8)
    assert cf.anchor == anchor
    assert cf.sign == sign
    assert cf.terms[: len(prefix)] == prefix


def test_continued_fraction_exact_roundtrip():
    # a float is rational, so the untruncated expansion reproduces it exactly
    x = omega_star(3, 2, G)
    cf = continued_fraction(x, 64)
    assert len(cf.terms) < 64  # terminated
    assert cf.value() == Fraction(x)
    assert continued_fraction(3.0, 8) == CFExpansion(3, 1, ())


def test_continued_fraction_tie_and_flag():
    assert continued_fraction(0.5) == CFExpansion(0, 1, (2,))
    assert continued_fraction(-2.25, 6) == CFExpansion(-2, -1, (4,))
    # standard (floor-anchored) expansion behind the flag
    assert continued_fraction(-2.25, 6, nearest=False) == CFExpansion(-3, 1, (1, 3))
    std = continued_fraction(omega_star(22, 15, G), 6, nearest=False)
    assert std.anchor == 7 and std.sign == 1
    assert std.terms[:5] == (1, 4, 1, 2, 1)
    with pytest.raises(ConfigError):
        continued_fraction(0.3, -1)


def test_convergents_of_reference_expansion():
    cv = convergents(continued_fraction(omega_star(3, 2, G), 6))
    assert [str(c) for c in cv[:4]] == ["1/1", "11/10", "12/11", "203/186"]
    assert all(c.is_reduced for c in cv)


def test_convergents_alternate_and_are_optimal():
    x = omega_star(3, 2, G)
    cv = convergents(continued_fraction(x, 6))
    signs = [np.sign(x - c.value) for c in cv[:5]]
    assert signs == [1.0, -1.0, 1.0, -1.0, 1.0]
    for c in cv[:4]:
        err = abs(x - c.value)
        assert err < 1.0 / c.s**2
        # no rational with denominator <= s does better (brute force)
        for s in range(1, c.s + 1):
            for r in (round(x * s) - 1, round(x * s), round(x * s) + 1):
                if (r, s) != (c.r, c.s):
                    assert abs(x - r / s) >= err


def test_farey_mediants():
    assert farey_mediant(Ratio(11, 10), Ratio(12, 11)) == Ratio(23, 21)
    assert farey_mediant(Ratio(25, 17), Ratio(28, 19)) == Ratio(53, 36)
    assert farey_mediant(Ratio(28, 19), Ratio(31, 21)) == Ratio(59, 40)
    # the resonance chain toward 11/7 from repeated composition with 3/2
    chain = Ratio(2, 1)
    expect = [(5, 3), (8, 5), (11, 7)]
    for r, s in expect:
        chain = farey_mediant(chain, Ratio(3, 2))
        assert (chain.r, chain.s) == (r, s)


def test_ratio_is_literal():
    big = Ratio(1056, 132)
    assert not big.is_reduced
    assert big.reduced() == Ratio(8, 1)
    assert big.equivalent(Ratio(8, 1))
    assert str(big) == "1056/132"
    assert big.value == 8.0
    with pytest.raises(ConfigError):
        Ratio(1, 0)
    with pytest.raises(ConfigError):
        Ratio(1, -2)


def test_capture_quasimomentum_value(base_params):
    # beta that parks a band-1 ladder packet at N0 = 0 on the (1,1) island
    b = special_beta(0, 1, 0, 1, 0.0, base_params)
    assert b == pytest.approx(0.16720134348028523, abs=1e-12)
    assert b == pytest.approx(0.1672, abs=5e-5)  # printed reference
    # branch spacing: n -> n+1 advances beta by 2 pi / (q tau) mod 1
    b0 = special_beta(0, 1, 0, 0, 0.0, base_params)
    spacing = 2 * math.pi / (base_params.q * base_params.tau)
    assert (b - b0) % 1.0 == pytest.approx(spacing % 1.0, abs=1e-12)


def test_capture_formula_reductions(q1_params):
    # q = 1, explicit inline formula
    P = q1_params
    b = special_beta(2, 0, 0, 1, 0.3, P)
    expect = (
        (0.3 + 2 * math.pi) / P.tau
        - (P.epsilon / P.tau) * (2 + P.beta0)
        - P.eta / 2.0
        + P.beta0
    ) % 1.0
    assert b == pytest.approx(expect, abs=1e-15)
    # at exact resonance the detuning term drops out gracefully
    P0 = build_params(k=1.0, tau_over_2pi=1.5, g=0.0386, p=3, q=2)
    b0 = special_beta(0, 1, 0, 0, 0.0, P0)
    assert b0 == pytest.approx((-P0.eta / 2.0 + P0.beta0) % 1.0, abs=1e-15)


def test_capture_validation(base_params, q7_params, q7_band):
    with pytest.raises(ConfigError):
        special_beta(0, 1, 5, 0, 0.0, base_params)  # nu out of range
    with pytest.raises(ConfigError):
        special_beta(0, 3, 0, 0, 0.0, q7_params)  # q > 2 needs alpha_j
    b = special_beta(0, 3, 0, 0, 0.0, q7_params, alpha_j=float(q7_band.alpha[3]))
    assert 0.0 <= b < 1.0


def test_bare_winding(base_params):
    assert omega_bare(0.0, 3, 2, G) == omega_star(3, 2, G)  # bitwise at eps=0
    got = omega_bare(base_params.epsilon, 3, 2, G)
    assert got == pytest.approx(1.0268881809447399, abs=1e-12)
    assert got == pytest.approx(2.0 * base_params.Omega, rel=1e-12)
    assert got == pytest.approx(1.02691, abs=5e-5)  # printed reference
    assert omega_bare(0.1, 3, 2, 0.0) == 0.0


def test_mode_curves_values_and_masking():
    taus = np.array([1.45, 1.5, 1.55])
    out = mode_curves(taus, 3, 2, [(1, 1), Ratio(1, 1), (1, 1, 1)], 100, G)
    assert [tag for tag, _ in out] == [(1, 1, None), (1, 1, None), (1, 1, 1)]
    for _, curve in out:
        assert np.isnan(curve[1])  # masked exactly at the resonance
        assert np.all(np.isfinite(curve[[0, 2]]))
    fig = mode_curves(np.array([1.455]), 3, 2, [(1, 1)], 100, G)[0][1]
    assert fig[0] == pytest.approx(29.875756605266513, abs=1e-9)
    assert fig[0] == pytest.approx(29.88, abs=5e-3)  # printed reference
    zero = mode_curves(np.array([1.455]), 3, 2, [(1, 1)], 0, G)[0][1]
    assert zero[0] == 0.0
    with pytest.raises(ConfigError):
        mode_curves(taus, 3, 2, [(1, 0)], 100, G)


def test_visibility_classification():
    rec = resonance_visibility(28, 19, G)
    assert rec.frac_distance == pytest.approx(0.0075, abs=5e-4)
    assert rec.visible
    assert rec.omega_star == omega_star(28, 19, G)
    assert rec.convergents[0] == Ratio(10, 1)
    rec2 = resonance_visibility(20, 13, G)
    assert rec2.frac_distance == pytest.approx(0.4625, abs=5e-5)
    assert not rec2.visible
    # threshold is a parameter
    assert not resonance_visibility(28, 19, G, threshold=0.001).visible
    assert resonance_visibility(3, 2, 0.0).frac_distance == 0.0
