import random
from fractions import Fraction

import pytest

from embedlens import fixtures
from embedlens.distributions import JointDistribution, alphabet, uniform_on
from embedlens.dicttest import (
    ConstantSymbolFunction,
    DenseSymbolFunction,
    DictatorFunction,
    Predicate,
    TestInstance,
    max_acceptance,
    run_test_exact,
    run_test_mc,
    symbol_function_from_json,
    validate_instance,
)
from embedlens.errors import SizeGuardError, ValidationError

B = alphabet(["0", "1"])


def xor_instance():
    return fixtures.three_lin_instance()


def test_predicate_roundtrip_and_eval():
    pred = xor_instance().predicate
    assert pred.evaluate(("0", "0", "0"))
    assert not pred.evaluate(("1", "0", "0"))
    again = Predicate.from_json(pred.to_json())
    assert again == pred


def test_instance_rejects_bad_shapes():
    pred = xor_instance().predicate
    with pytest.raises(ValidationError):
        TestInstance(pred, ())
    with pytest.raises(ValidationError):
        TestInstance(pred, ((Fraction(0), fixtures.three_lin()),))
    with pytest.raises(ValidationError):
        TestInstance(pred, ((Fraction(1), fixtures.disconnected_pair()),))


def test_validate_instance_three_lin():
    rep = validate_instance(xor_instance())
    assert rep.weights_normalized
    assert rep.constraints[0].support_ok
    # 3-LIN locally admits the parity embedding: hypothesis screening reports it
    assert rep.constraints[0].admits_embedding
    assert rep.constraints[0].witness_modulus == 2
    assert not rep.constraints[0].connected
    assert rep.constraints[0].pairwise_connected
    assert rep.ok


def test_validate_instance_flags_falsifying_atom():
    pred = xor_instance().predicate
    bad_mu = uniform_on([B, B, B], [("0", "0", "0"), ("1", "0", "0")])
    rep = validate_instance(TestInstance(pred, ((Fraction(1), bad_mu),)))
    assert not rep.ok
    assert any("falsifying" in v for v in rep.violations)
    assert not rep.constraints[0].support_ok


def test_dictator_completeness_three_lin():
    inst = xor_instance()
    for n in (1, 2, 3, 4):
        for j in range(n):
            f = DictatorFunction(n, B, j)
            assert run_test_exact(inst, f, n) == 1


def test_constant_acceptance_closed_form():
    inst = xor_instance()
    f0 = ConstantSymbolFunction(3, B, "0")
    f1 = ConstantSymbolFunction(3, B, "1")
    assert run_test_exact(inst, f0, 3) == 1  # (0,0,0) satisfies even parity
    assert run_test_exact(inst, f1, 3) == 0  # (1,1,1) falsifies it


def test_exact_identity_function_n1():
    inst = xor_instance()
    ident = DenseSymbolFunction(1, B, ("0", "1"))
    assert run_test_exact(inst, ident, 1) == 1


def test_exact_matches_bruteforce_small():
    # independent oracle: direct enumeration of all column tuples
    inst = xor_instance()
    rng = random.Random(3)
    mu = inst.constraints[0][1]
    for n in (1, 2):
        for _ in range(10):
            table = [rng.choice("01") for _ in range(2 ** n)]
            f = DenseSymbolFunction(n, B, table)
            got = run_test_exact(inst, f, n)
            from itertools import product as iprod

            expect = Fraction(0)
            for cols in iprod(mu.support, repeat=n):
                w = Fraction(1)
                for c in cols:
                    w *= mu.atoms[c]
                rows = [[c[i] for c in cols] for i in range(3)]
                if inst.predicate.evaluate([f.evaluate(r) for r in rows]):
                    expect += w
            assert got == expect


def test_exact_weighted_two_constraints():
    pred = xor_instance().predicate
    mu_even = fixtures.three_lin()
    odd_support = [x for x in fixtures.full_support_cube().support
                   if x not in set(mu_even.support)]
    mu_odd = uniform_on([B, B, B], odd_support)
    inst = TestInstance(pred, ((Fraction(1, 3), mu_even), (Fraction(2, 3), mu_odd)))
    # dictators accept the even-parity constraint always, the odd one never
    f = DictatorFunction(2, B, 0)
    assert run_test_exact(inst, f, 2) == Fraction(1, 3)


def test_acceptance_invariant_under_relabeling():
    from itertools import product as iprod

    inst = xor_instance()
    rng = random.Random(5)
    relabel = {"0": "b", "1": "a"}
    back = {v: k for k, v in relabel.items()}
    alpha2 = alphabet(["b", "a"])  # image order permutes the symbol indices
    pred2 = Predicate.from_callable(
        alpha2, 3, lambda x: inst.predicate.evaluate(tuple(back[s] for s in x)))
    mu = inst.constraints[0][1]
    mu2 = JointDistribution([alpha2] * 3,
                            {tuple(relabel[s] for s in x): p for x, p in mu.atoms.items()})
    inst2 = TestInstance(pred2, ((Fraction(1), mu2),))
    n = 2
    for _ in range(5):
        table = [rng.choice("01") for _ in range(2 ** n)]
        f = DenseSymbolFunction(n, B, table)
        f2 = DenseSymbolFunction(
            n, alpha2,
            [relabel[f.evaluate(tuple(back[s] for s in x))]
             for x in iprod(alpha2.symbols, repeat=n)])
        assert run_test_exact(inst, f, n) == run_test_exact(inst2, f2, n)


def test_validate_instance_a5():
    rep = validate_instance(fixtures.a5_instance())
    assert rep.ok
    c = rep.constraints[0]
    assert c.support_ok
    assert not c.admits_embedding  # hypothesis screening: no Abelian embedding
    assert not c.connected
    assert c.pairwise_connected


def test_a5_dictator_completeness_exact():
    inst = fixtures.a5_instance()
    alpha = inst.predicate.alphabet
    for n in (1, 2, 3, 4):
        for j in range(n):
            f = DictatorFunction(n, alpha, j)
            assert run_test_exact(inst, f, n) == 1


def test_a5_falsifying_constant_zero():
    inst = fixtures.a5_instance()
    alpha = inst.predicate.alphabet
    # a constant g with g*g*g != identity falsifies the triple product
    for sym in alpha.symbols:
        if not inst.predicate.evaluate((sym, sym, sym)):
            f = ConstantSymbolFunction(2, alpha, sym)
            assert run_test_exact(inst, f, 2) == 0
            break
    else:
        pytest.fail("no falsifying constant found")


def test_state_guard_trips_on_dense_table_with_big_support():
    inst = fixtures.a5_instance()
    alpha = inst.predicate.alphabet
    rng = random.Random(6)
    table = [rng.choice(alpha.symbols) for _ in range(len(alpha) ** 2)]
    f = DenseSymbolFunction(2, alpha, table)
    with pytest.raises(SizeGuardError):
        run_test_exact(inst, f, 2, state_guard=10_000)


def test_mc_dictator_all_accept():
    inst = xor_instance()
    f = DictatorFunction(3, B, 1)
    res = run_test_mc(inst, f, samples=2000, seed=11)
    assert res.acceptance == 1.0 and res.accepted == 2000


def test_mc_reproducible_and_matches_exact():
    inst = xor_instance()
    rng = random.Random(7)
    table = [rng.choice("01") for _ in range(2)]
    f = DenseSymbolFunction(1, B, table)
    a = run_test_mc(inst, f, samples=4000, seed=13)
    b = run_test_mc(inst, f, samples=4000, seed=13)
    assert a.acceptance == b.acceptance
    exact = float(run_test_exact(inst, f, 1))
    assert abs(a.acceptance - exact) <= 3 * a.half_width


def test_max_acceptance_diagnostic():
    inst = xor_instance()
    best, f = max_acceptance(inst, 1)
    assert best == 1  # dictators are among the tables
    with pytest.raises(SizeGuardError):
        max_acceptance(inst, 5)


def test_symbol_function_json_forms():
    d = symbol_function_from_json({"n": 3, "alphabet": ["0", "1"], "dictator": 2})
    assert isinstance(d, DictatorFunction) and d.evaluate(("0", "0", "1")) == "1"
    c = symbol_function_from_json({"n": 2, "alphabet": ["0", "1"], "constant": "1"})
    assert isinstance(c, ConstantSymbolFunction) and c.evaluate(("0", "0")) == "1"
    t = symbol_function_from_json({"n": 1, "alphabet": ["0", "1"], "symbols": ["1", "0"]})
    assert isinstance(t, DenseSymbolFunction) and t.evaluate(("0",)) == "1"


def test_instance_json_roundtrip(tmp_path):
    inst = xor_instance()
    path = tmp_path / "inst.json"
    inst.save(str(path))
    again = TestInstance.load(str(path))
    assert again.predicate == inst.predicate
    assert again.constraints[0][0] == 1
    assert again.constraints[0][1] == inst.constraints[0][1]
