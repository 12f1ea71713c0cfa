import random
from itertools import product

from embedlens import fixtures
from embedlens.distributions import alphabet, uniform_on
from embedlens.embedding import (
    brute_force_embedding,
    connected,
    constraint_matrix,
    detect_embedding,
    no_embedding_implies_pc_check,
    pairwise_connected,
    partition_witness,
    verify_witness,
)

B = alphabet(["0", "1"])


def test_constraint_matrix_disconnected_pair():
    cm = constraint_matrix([("0", "0"), ("1", "1")], [B, B])
    assert cm.base_point == ("0", "0")
    assert cm.s == 2
    assert cm.rows.to_lists() == [[0, 0], [1, 1]]


def test_constraint_matrix_singleton_support():
    cm = constraint_matrix([("0", "1")], [B, B])
    assert cm.rows.to_lists() == [[0, 0]]


def test_constraint_matrix_three_lin():
    mu = fixtures.three_lin()
    cm = constraint_matrix(mu.support, mu.alphabets)
    assert cm.s == 3
    assert cm.rows.to_lists() == [[0, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 0]]


def test_detect_three_lin_parity_witness():
    verdict = detect_embedding(fixtures.three_lin())
    assert verdict.admits
    assert verdict.witness.modulus == 2
    # the parity witness: identity map on bits in every coordinate
    for table in verdict.witness.sigma:
        assert table == {"0": 0, "1": 1}
    assert verify_witness(fixtures.three_lin().support, verdict.witness)


def test_detect_full_support_cube_has_no_embedding():
    verdict = detect_embedding(fixtures.full_support_cube())
    assert not verdict.admits
    assert verdict.rank == verdict.s == 3
    assert all(d == 1 for d in verdict.snf_divisors)


def test_detect_z3_sum():
    verdict = detect_embedding(fixtures.z3_sum())
    assert verdict.admits
    assert verdict.witness.modulus == 3


def test_detect_single_atom_embeds_into_z():
    verdict = detect_embedding(fixtures.single_atom())
    assert verdict.admits
    assert verdict.witness.modulus == 0


def test_detect_disconnected_pair_yields_indicator():
    verdict = detect_embedding(fixtures.disconnected_pair())
    assert verdict.admits
    assert verdict.witness.modulus == 0
    sig = verdict.witness.sigma
    assert sig[0]["1"] + sig[1]["1"] == 0 and sig[0]["1"] != 0


def test_verify_witness_cases():
    mu = fixtures.three_lin()
    good = detect_embedding(mu).witness
    assert verify_witness(mu.support, good)
    from embedlens.embedding import EmbeddingWitness

    constant = EmbeddingWitness(2, ({"0": 0, "1": 0},) * 3)
    assert not verify_witness(mu.support, constant)
    partial = EmbeddingWitness(2, ({"0": 0, "1": 1}, {"0": 0, "1": 0}, {"0": 0, "1": 0}))
    assert not verify_witness(mu.support, partial)  # fails on atom (1,1,0)


def test_brute_force_three_lin_finds_parity():
    mu = fixtures.three_lin()
    w = brute_force_embedding(mu.support, mu.alphabets, max_modulus=2)
    assert w is not None and w.modulus == 2
    assert verify_witness(mu.support, w)


def test_brute_force_full_support_none():
    sup = list(product("01", repeat=2))
    w = brute_force_embedding(sup, [B, B], max_modulus=6)
    assert w is None


def test_brute_force_antidiagonal_shifts():
    sup = [("0", "1"), ("1", "0")]
    w = brute_force_embedding(sup, [B, B], max_modulus=2)
    assert w is not None and w.modulus == 2
    assert w.sigma[0] == {"0": 0, "1": 1}
    assert w.sigma[1] == {"1": 0, "0": 1}
    assert verify_witness(sup, w)


def random_support(rng: random.Random):
    sizes = [rng.randrange(1, 4) for _ in range(3)]
    alphabets = [alphabet([str(x) for x in range(sz)]) for sz in sizes]
    cells = list(product(*[a.symbols for a in alphabets]))
    support = [x for x in cells if rng.random() < 0.5]
    if not support:
        support = [rng.choice(cells)]
    return alphabets, support


def test_oracle_equivalence_random_sample():
    # Smaller twin of the acceptance run: detector vs exhaustive oracle.
    rng = random.Random(20240917)
    for _ in range(40):
        alphabets, support = random_support(rng)
        dist = uniform_on(alphabets, support)
        verdict = detect_embedding(dist)
        oracle = brute_force_embedding(support, alphabets, max_modulus=12)
        assert verdict.admits == (oracle is not None)
        if verdict.admits:
            assert verify_witness(support, verdict.witness)
            assert verify_witness(support, oracle)
        else:
            assert verdict.rank == verdict.s
            assert all(d == 1 for d in verdict.snf_divisors)


def test_detector_invariant_under_renaming_and_permutation():
    rng = random.Random(77)
    for _ in range(25):
        alphabets, support = random_support(rng)
        dist = uniform_on(alphabets, support)
        base = detect_embedding(dist).admits
        # permute coordinates
        perm = list(range(3))
        rng.shuffle(perm)
        p_alph = [alphabets[c] for c in perm]
        p_sup = [tuple(x[c] for c in perm) for x in support]
        assert detect_embedding(uniform_on(p_alph, p_sup)).admits == base
        # rename symbols (reverse each alphabet's order)
        renames = [{s: f"r{len(a.symbols) - 1 - a.index(s)}" for s in a.symbols} for a in alphabets]
        r_alph = [alphabet([renames[i][s] for s in a.symbols]) for i, a in enumerate(alphabets)]
        r_sup = [tuple(renames[i][s] for i, s in enumerate(x)) for x in support]
        assert detect_embedding(uniform_on(r_alph, r_sup)).admits == base


def test_marginal_embedding_lifts():
    # Restriction form of the sub-coordinate observation: if some (k-1)-marginal
    # admits an embedding then so does the full distribution.
    rng = random.Random(4242)
    for _ in range(40):
        alphabets, support = random_support(rng)
        dist = uniform_on(alphabets, support)
        full = detect_embedding(dist).admits
        for drop in range(3):
            coords = [c for c in range(3) if c != drop]
            sub = detect_embedding(dist.marginal(coords)).admits
            if sub:
                assert full


def test_pairwise_connected_three_lin():
    ok, split = pairwise_connected(fixtures.three_lin())
    assert ok and split is None


def test_pairwise_connected_failure_gives_split():
    ok, split = pairwise_connected(fixtures.disconnected_pair())
    assert not ok
    assert split.side_i == frozenset({"0"}) and split.side_j == frozenset({"0"})
    w = partition_witness(split, fixtures.disconnected_pair().alphabets)
    assert verify_witness(fixtures.disconnected_pair().support, w)


def test_connected_examples():
    assert not connected(fixtures.three_lin())
    assert connected(fixtures.full_support_cube())
    assert connected(fixtures.punctured_cube())
    assert connected(fixtures.single_atom())


def test_pc_check_report():
    rep = no_embedding_implies_pc_check(fixtures.full_support_cube())
    assert rep.consistent and not rep.vacuous and rep.pairwise
    rep = no_embedding_implies_pc_check(fixtures.three_lin())
    assert rep.consistent and rep.vacuous
    rep = no_embedding_implies_pc_check(fixtures.disconnected_pair())
    assert rep.consistent and rep.vacuous


def test_obs_no_embedding_implies_pc_random():
    rng = random.Random(555)
    for _ in range(50):
        alphabets, support = random_support(rng)
        rep = no_embedding_implies_pc_check(uniform_on(alphabets, support))
        assert rep.consistent


def test_witness_json_roundtrip(tmp_path):
    w = detect_embedding(fixtures.three_lin()).witness
    path = tmp_path / "w.json"
    w.save(str(path))
    import json

    from embedlens.embedding import EmbeddingWitness

    with open(path) as fh:
        again = EmbeddingWitness.from_json(json.load(fh))
    assert again == w


def test_a5_triple_product_admits_nothing():
    # perfect-group input: the detector reports a full unit lattice, and the
    # exhaustive oracle over all moduli up to 12 (plus the rational rank
    # test) finds no witness either
    mu = fixtures.a5_triple_product()
    verdict = detect_embedding(mu)
    assert not verdict.admits
    assert verdict.rank == verdict.s == 177
    assert all(d == 1 for d in verdict.snf_divisors)
    assert not connected(mu)
    ok, _ = pairwise_connected(mu)
    assert ok
    oracle = brute_force_embedding(mu.support, mu.alphabets, max_modulus=12,
                                   space_guard=None)
    assert oracle is None


def test_unit_alphabet_coordinates_are_skipped():
    one = alphabet(["x"])
    dist = uniform_on([one, B], [("x", "0"), ("x", "1")])
    verdict = detect_embedding(dist)
    assert not verdict.admits
    assert verdict.s == 1
    all_units = uniform_on([one, one], [("x", "x")])
    v2 = detect_embedding(all_units)
    assert not v2.admits and v2.s == 0
