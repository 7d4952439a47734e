import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import full
from surjca.gibbs import random_markov_measure
from surjca.models import builtin
from surjca.randomization import (
    MarginalDistribution,
    UnsupportedMap,
    cesaro_marginal,
    density_one_diagnostic,
    exact_marginal,
    exact_series,
    parity_row,
    sample_orbit,
    spike_ratios,
    tv_to_uniform,
)
from surjca.symbolic import _apply_rule, power


def xor():
    return builtin("xor01").map


def brute_marginal(phi, t, p, n):
    """Enumerate the light cone and apply Φ^t directly."""
    phit = power(phi, t) if t else None
    N = n + (phi.window - 1) * t
    probs = np.zeros(2 ** n)
    for u in itertools.product(range(2), repeat=N):
        weight = np.prod([p if a else 1 - p for a in u])
        out = _apply_rule(phit.rule, u, phit.window) if t else u
        probs[int("".join(map(str, out)), 2)] += weight
    return probs


def test_parity_rows():
    assert parity_row(xor(), 0).cells == [0]
    assert parity_row(xor(), 2).cells == [0, 2]
    assert parity_row(xor(), 3).cells == [0, 1, 2, 3]
    sym = builtin("xor-symmetric").map
    assert parity_row(sym, 1).cells == [-1, 1]
    assert parity_row(sym, 2).cells == [-2, 2]


@given(st.integers(0, 4096))
def test_parity_row_weight_is_lucas(t):
    assert parity_row(xor(), t).weight == 2 ** bin(t).count("1")


def test_exact_marginal_examples():
    np.testing.assert_allclose(exact_marginal(xor(), 0, 0.1, 1).probs, [0.9, 0.1])
    np.testing.assert_allclose(exact_marginal(xor(), 1, 0.1, 1).probs, [0.82, 0.18])
    for t, n in [(0, 3), (5, 4), (17, 2)]:
        np.testing.assert_allclose(exact_marginal(xor(), t, 0.5, n).probs, 2.0 ** -n, atol=1e-15)


@given(st.integers(0, 6), st.integers(1, 4), st.floats(0.01, 0.99))
def test_exact_marginal_matches_brute_force(t, n, p):
    np.testing.assert_allclose(exact_marginal(xor(), t, p, n).probs, brute_marginal(xor(), t, p, n), atol=1e-12)


def test_symmetric_xor_matches_brute_force():
    sym = builtin("xor-symmetric").map
    for t in range(4):
        np.testing.assert_allclose(exact_marginal(sym, t, 0.2, 3).probs, brute_marginal(sym, t, 0.2, 3), atol=1e-12)


def test_tv_examples():
    assert tv_to_uniform(MarginalDistribution(3, np.full(8, 1 / 8))) == 0
    point = np.zeros(16)
    point[0] = 1
    assert tv_to_uniform(MarginalDistribution(4, point)) == pytest.approx(1 - 2 ** -4)
    assert tv_to_uniform(exact_marginal(xor(), 1, 0.1, 1)) == pytest.approx(0.32)


def test_cesaro():
    np.testing.assert_allclose(cesaro_marginal(xor(), 1, 0.1, 2).probs, exact_marginal(xor(), 0, 0.1, 2).probs)
    np.testing.assert_allclose(cesaro_marginal(xor(), 20, 0.5, 3).probs, 1 / 8)
    assert tv_to_uniform(cesaro_marginal(xor(), 1024, 0.1, 8)) < tv_to_uniform(cesaro_marginal(xor(), 64, 0.1, 8))


def test_series_consistency():
    s = exact_series(xor(), 40, 0.1, 5)
    for t in (0, 7, 39):
        assert s.tv[t] == pytest.approx(tv_to_uniform(exact_marginal(xor(), t, 0.1, 5)))
    assert s.cesaro_tv[39] == pytest.approx(tv_to_uniform(cesaro_marginal(xor(), 40, 0.1, 5)))


def test_density_one_diagnostic():
    assert density_one_diagnostic(np.zeros(100), 0.01) == 1.0
    assert density_one_diagnostic(np.ones(100), 0.01) == 0.0
    series = np.full(1025, 1e-4)
    for k in range(11):
        series[2 ** k] = 0.5
    assert density_one_diagnostic(series, 1e-3) >= 1 - 11 / 1024


def test_spike_ratios_on_synthetic():
    series = np.full(2048, 0.1)
    series[256] = 0.8
    assert spike_ratios(series, [8])[8] == pytest.approx(8.0)


def test_non_additive_rejected():
    with pytest.raises(UnsupportedMap):
        exact_marginal(builtin("majority3").map, 3, 0.1, 2)


def test_sample_initial_and_fair():
    res = sample_orbit(xor(), 0.2, 0, 20000, 5, seed=1)
    sigma = np.sqrt(0.2 * 0.8 / 100000)
    assert abs(res.density[0] - 0.2) < 3 * sigma
    res = sample_orbit(xor(), 0.5, 30, 20000, 5, seed=2)
    assert abs(res.density[-1] - 0.5) < 3 * np.sqrt(0.25 / res.cells[-1])


def test_sample_matches_exact_marginal():
    res = sample_orbit(xor(), 0.1, 5, 3000, 200, seed=3, n=3)
    exact = exact_marginal(xor(), 5, 0.1, 3).probs
    assert np.all(np.abs(res.marginal.probs - exact) < 4 * res.stderr + 1e-12)


def test_sample_determinism():
    a = sample_orbit(xor(), 0.1, 10, 500, 3, seed=7)
    b = sample_orbit(xor(), 0.1, 10, 500, 3, seed=7)
    assert np.array_equal(a.density, b.density)


def test_sample_from_markov_measure():
    mu = random_markov_measure(full(2), 1, np.random.default_rng(0))
    res = sample_orbit(builtin("majority3").map, mu, 3, 4000, 20, seed=0)
    assert abs(res.density[0] - mu.rho[1]) < 0.02
