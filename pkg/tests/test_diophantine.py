"""Small-divisor probes: shells, resonance detection, gamma and tau estimates."""

import math

import numpy as np
import pytest

from hamlab.errors import ResonantFrequency
from hamlab.diophantine import (
    DiophantineEstimate,
    check_nonresonant,
    envelope,
    estimate_gamma,
    fit_tau,
    shell_array,
    zero_tolerance,
)

GOLDEN = (1 + math.sqrt(5)) / 2


def test_shell_array_counts_and_halving():
    # |k|_1 = s in Z^2 has 4s points; we keep one of each {k, -k} pair
    for s in (1, 2, 5):
        ks = shell_array(2, s)
        assert ks.shape == (2 * s, 2)
        assert np.all(np.abs(ks).sum(axis=1) == s)
    # representative convention: first nonzero entry is positive
    for k in shell_array(3, 3):
        nz = k[k != 0]
        assert nz[0] > 0


def test_shell_array_no_duplicates_against_brute_force():
    import itertools

    s, n = 4, 3
    ks = {tuple(k) for k in shell_array(n, s)}
    brute = set()
    for k in itertools.product(range(-s, s + 1), repeat=n):
        if sum(abs(x) for x in k) != s:
            continue
        nz = [x for x in k if x != 0]
        if nz[0] > 0:
            brute.add(k)
    assert ks == brute


def test_check_nonresonant_detects_rational_resonance():
    # alpha = (1, 2): k = (2, -1) kills it at order 3
    rep = check_nonresonant((1, 2), 4)
    assert rep.resonant
    assert rep.min_abs == 0.0
    k = rep.witness
    assert abs(k[0] * 1 + k[1] * 2) == 0


def test_check_nonresonant_irrational_pair():
    rep = check_nonresonant((1.0, math.sqrt(2.0)), 12)
    assert not rep.resonant
    assert rep.witness is None
    assert rep.min_abs > zero_tolerance((1.0, math.sqrt(2.0)), 12)


def test_check_nonresonant_single_frequency():
    rep = check_nonresonant((3.0,), 6)
    assert not rep.resonant
    assert rep.min_abs == pytest.approx(3.0)


def test_check_nonresonant_near_resonance_stays_nonresonant():
    # close to (1, 2) but genuinely irrational: flagged nonresonant at small order
    rep = check_nonresonant((1.0, 2.0 + 1e-7), 3)
    assert not rep.resonant


def test_estimate_gamma_matches_brute_force():
    alpha = (1.0, GOLDEN)
    K, tau = 30, 1.0
    est = estimate_gamma(alpha, tau, K)
    assert isinstance(est, DiophantineEstimate)
    best = math.inf
    import itertools

    for k in itertools.product(range(-K, K + 1), repeat=2):
        s = abs(k[0]) + abs(k[1])
        if s == 0 or s > K:
            continue
        best = min(best, abs(k[0] + k[1] * GOLDEN) * s**tau)
    assert est.gamma_hat == pytest.approx(best, rel=1e-12)
    kk = est.argmin_k
    s = sum(abs(x) for x in kk)
    assert abs(kk[0] + kk[1] * GOLDEN) * s**tau == pytest.approx(est.gamma_hat)


def test_estimate_gamma_monotone_in_K():
    alpha = (1.0, GOLDEN)
    g1 = estimate_gamma(alpha, 1.0, 10).gamma_hat
    g2 = estimate_gamma(alpha, 1.0, 100).gamma_hat
    assert g2 <= g1
    # golden ratio is badly approximable: gamma stays bounded away from 0
    assert g2 > 0.2


def test_estimate_gamma_grows_with_tau():
    alpha = (1.0, math.sqrt(2.0))
    g_low = estimate_gamma(alpha, 1.0, 50).gamma_hat
    g_high = estimate_gamma(alpha, 2.0, 50).gamma_hat
    assert g_high >= g_low


def test_estimate_gamma_raises_on_resonance():
    with pytest.raises(ResonantFrequency):
        estimate_gamma((1, 2), 1.0, 5)


def test_envelope_is_strictly_decreasing_and_matches_shell_minima():
    alpha = (1.0, GOLDEN)
    records = envelope(alpha, 60)
    vals = [v for _, v, _ in records]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    # each record really is the minimum over its shell
    for s, v, k in records[:5]:
        ks = shell_array(2, s)
        assert v == pytest.approx(float(np.min(np.abs(ks @ np.array(alpha)))))


def test_fit_tau_golden_pair():
    # the golden pair has Diophantine exponent 1 (constant-type continued fraction)
    tau, resid = fit_tau((1.0, GOLDEN), 2000)
    assert tau == pytest.approx(1.0, abs=0.2)
    assert resid < 0.5


def test_fit_tau_cubic_triple():
    c = 2.0 ** (1.0 / 3.0)
    tau, _ = fit_tau((1.0, c, c * c), 60)
    assert 1.0 < tau < 4.0


def test_fit_tau_flat_for_single_frequency():
    tau, resid = fit_tau((1.0,), 50)
    assert tau == 0.0 and resid == 0.0


def test_input_validation():
    with pytest.raises(ValueError):
        estimate_gamma((1.0, GOLDEN), -1.0, 10)
    with pytest.raises(ValueError):
        estimate_gamma((1.0, GOLDEN), 1.0, 0)
    with pytest.raises(ValueError):
        fit_tau((1.0, GOLDEN), 5)
