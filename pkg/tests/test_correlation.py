import cmath
import random
from fractions import Fraction

import numpy as np
import pytest

from embedlens import fixtures
from embedlens.distributions import alphabet, univariate
from embedlens.embedding import detect_embedding
from embedlens.errors import SizeGuardError, ValidationError
from embedlens.correlation import (
    best_product_correlation,
    exact_correlation,
    hoeffding_half_width,
    mc_correlation,
    restricted_product_correlation,
)
from embedlens.functions import (
    CharacterProduct,
    ProductFunction,
    TableFunction,
    character_function,
    uniform_measure,
)

B = alphabet(["0", "1"])


def random_table(rng, n, alpha=B):
    vals = []
    for _ in range(len(alpha) ** n):
        r = rng.random() ** 0.5
        t = rng.random()
        vals.append(r * cmath.exp(2j * cmath.pi * t))
    return TableFunction(n, alpha, vals)


def characters_for(dist, n):
    w = detect_embedding(dist).witness
    return [character_function(w, i, n, alpha=dist.alphabets[i]) for i in range(dist.k)]


def test_constant_ones_give_one():
    mu = fixtures.three_lin()
    ones = [TableFunction.constant(2, B, 1) for _ in range(3)]
    res = exact_correlation(mu, ones, 2)
    assert res.value == 1
    assert res.mode == "exact" and res.half_width == 0


def test_three_lin_characters_exactly_one():
    mu = fixtures.three_lin()
    for n in (1, 3, 6, 10):
        res = exact_correlation(mu, characters_for(mu, n), n)
        assert res.exact == (Fraction(1), Fraction(0))
        assert res.value == 1 + 0j


def test_z3_characters_exactly_one():
    mu = fixtures.z3_sum()
    for n in (1, 4, 10):
        res = exact_correlation(mu, characters_for(mu, n), n)
        assert res.exact == (Fraction(1), Fraction(0))
        assert res.value == 1 + 0j


def test_punctured_cube_parity_decay():
    mu = fixtures.punctured_cube()
    half = Fraction(1, 2)
    for n in (1, 2, 5, 10):
        par = [CharacterProduct(B, [[Fraction(0), half]] * n) for _ in range(3)]
        res = exact_correlation(mu, par, n)
        assert res.exact == (Fraction(1, 7) ** n, Fraction(0))


def test_fast_path_equals_slow_path():
    rng = random.Random(21)
    mu = fixtures.three_lin()
    for n in (1, 2, 3, 4):
        prods = []
        for _ in range(3):
            rows = [[cmath.exp(2j * cmath.pi * rng.random()) * rng.random() for _ in range(2)]
                    for _ in range(n)]
            prods.append(ProductFunction(B, np.array(rows)))
        fast = exact_correlation(mu, prods, n)
        slow = exact_correlation(mu, [p.to_table() for p in prods], n)
        assert fast.value == pytest.approx(slow.value, abs=1e-10)


def test_correlation_bounded_by_sup_norms():
    rng = random.Random(22)
    mu = fixtures.z3_sum()
    for n in (1, 2):
        fs = [random_table(rng, n, mu.alphabets[i]) for i in range(3)]
        res = exact_correlation(mu, fs, n)
        bound = 1.0
        for f in fs:
            bound *= f.sup_norm()
        assert abs(res.value) <= bound + 1e-10


def test_exact_size_guard():
    mu = fixtures.three_lin()
    fs = [random_table(random.Random(1), 4) for _ in range(3)]
    with pytest.raises(SizeGuardError):
        exact_correlation(mu, fs, 4, term_guard=10)


def test_arity_mismatch_rejected():
    mu = fixtures.three_lin()
    fs = [TableFunction.constant(2, B, 1)] * 3
    with pytest.raises(ValidationError):
        exact_correlation(mu, fs, 3)
    with pytest.raises(ValidationError):
        exact_correlation(mu, fs[:2], 2)


def test_mc_constant_is_exact_one():
    mu = fixtures.three_lin()
    ones = [TableFunction.constant(2, B, 1) for _ in range(3)]
    res = mc_correlation(mu, ones, 2, samples=500, seed=9)
    assert res.value == 1
    assert res.half_width == pytest.approx(hoeffding_half_width(500))
    assert res.mode == "monte-carlo" and res.samples == 500


def test_mc_characters_always_one():
    mu = fixtures.three_lin()
    res = mc_correlation(mu, characters_for(mu, 3), 3, samples=2000, seed=17)
    assert res.value == pytest.approx(1, abs=1e-12)


def test_mc_reproducible_and_near_exact():
    rng = random.Random(23)
    mu = fixtures.three_lin()
    fs = [random_table(rng, 3) for _ in range(3)]
    a = mc_correlation(mu, fs, 3, samples=4000, seed=31)
    b = mc_correlation(mu, fs, 3, samples=4000, seed=31)
    assert a.value == b.value
    exact = exact_correlation(mu, fs, 3)
    assert abs(a.value - exact.value) <= 3 * a.half_width


def test_ascent_recovers_unimodular_product():
    rng = random.Random(24)
    nu = uniform_measure(B)
    for n in (1, 2, 3):
        rows = [[cmath.exp(2j * cmath.pi * rng.random()) for _ in range(2)] for _ in range(n)]
        p = ProductFunction(B, np.array(rows))
        res = best_product_correlation(nu, p.to_table(), seed=100 + n)
        assert res.value >= 1 - 1e-9
        assert res.product.is_one_bounded()


def test_ascent_dictator_closed_form():
    rng = random.Random(25)
    nu = univariate(B, {"0": Fraction(1, 3), "1": Fraction(2, 3)})
    g = [0.9 * cmath.exp(0.7j), 0.4 * cmath.exp(-1.2j)]
    f = TableFunction.from_callable(2, B, lambda x: g[B.index(x[0])])
    res = best_product_correlation(nu, f, seed=5)
    expected = float(Fraction(1, 3)) * abs(g[0]) + float(Fraction(2, 3)) * abs(g[1])
    assert res.value == pytest.approx(expected, abs=1e-9)


def test_ascent_zero_function():
    nu = uniform_measure(B)
    res = best_product_correlation(nu, TableFunction.constant(2, B, 0), seed=0)
    assert res.value == 0


def test_ascent_trace_monotone():
    rng = random.Random(26)
    nu = uniform_measure(B)
    for _ in range(20):
        f = random_table(rng, 3)
        res = best_product_correlation(nu, f, restarts=3, seed=rng.randrange(10 ** 6))
        for a, b in zip(res.trace, res.trace[1:]):
            assert b >= a - 1e-12


def test_restricted_correlation_unimodular_product_is_one():
    rng = random.Random(27)
    nu = uniform_measure(B)
    rows = [[cmath.exp(2j * cmath.pi * rng.random()) for _ in range(2)] for _ in range(4)]
    p = ProductFunction(B, np.array(rows))
    frac = restricted_product_correlation(p.to_table(), nu, delta=0.4, trials=20,
                                          seed=3, threshold=1 - 1e-9)
    assert frac == 1.0


def test_restricted_correlation_zero_function():
    nu = uniform_measure(B)
    f = TableFunction.constant(3, B, 0)
    frac = restricted_product_correlation(f, nu, delta=0.5, trials=10, seed=4, threshold=0.1)
    assert frac == 0.0


def test_restricted_correlation_character_input():
    mu = fixtures.three_lin()
    nu = mu.marginal([0])
    f = characters_for(mu, 4)[0].to_table()
    frac = restricted_product_correlation(f, nu, delta=0.3, trials=15, seed=8,
                                          threshold=1 - 1e-9)
    assert frac == 1.0


def test_result_json():
    mu = fixtures.three_lin()
    res = exact_correlation(mu, characters_for(mu, 2), 2)
    payload = res.to_json()
    assert payload["exact"] == [[1, 1], [0, 1]]
    assert payload["value"] == [1.0, 0.0]
