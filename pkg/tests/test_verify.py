from collections import namedtuple
from fractions import Fraction
from itertools import combinations, product
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ldmds.codec import DataBlock, encode
from ldmds.construct import (CodeParams, GeneratorA, build_generator, build_layout, derive_params,
                             design_code, dual_code, extend_code, gf7_a_tilde)
from ldmds.errors import BudgetExceeded
from ldmds.field import Matrix, PrimeField
from ldmds.matching import max_bipartite_matching
from ldmds.verify import (check_lowest_density, check_mds_exhaustive, check_mds_sampled, check_params,
                          colex_combinations, count_square_submatrices, erasure_submatrix,
                          normalized_dimension, structurally_singular, totally_nonsingular,
                          verify_code)
from oracles import all_minors_nonzero, det_mod, has_perfect_matching_brute, rank_mod
from reference_values import B_CODE_A, N8R3_A_TILDE, N4R2_A_TILDE

NMP = namedtuple("NMP", "n m p")


def c4_code():
    return design_code(4, 2, 3, Matrix(N4R2_A_TILDE, PrimeField(3)))


def n8r3_gf7_code():
    return build_generator(derive_params(8, 3, 7), gf7_a_tilde())


def mds_by_oracle(gen) -> bool:
    pr = gen.params
    for f in combinations(range(pr.n), pr.r):
        sub = erasure_submatrix(gen, f)
        if det_mod(sub.tolist(), pr.q) == 0:
            return False
    return True


@pytest.mark.parametrize("args,want", [((8, 5, 5, 3), True), ((4, 2, 1, 1), True), ((6, 4, 3, 2), False)])
def test_check_params(args, want):
    assert check_params(*args) is want


@pytest.mark.parametrize("nmp,want", [(NMP(8, 5, 3), Fraction(5)), (NMP(4, 1, 1), Fraction(2)),
                                      (NMP(5, 3, 1), Fraction(15, 4))])
def test_normalized_dimension(nmp, want):
    assert normalized_dimension(nmp) == want


def test_colex_order():
    got = list(colex_combinations(4, 2))
    assert got == [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3)]
    for n in range(1, 8):
        for r in range(0, n + 1):
            seq = list(colex_combinations(n, r))
            assert len(seq) == comb(n, r) == len(set(seq))
            assert seq == sorted(seq, key=lambda c: tuple(reversed(c)))


def test_c4_code_is_mds_and_lowest_density():
    rep = check_mds_exhaustive(c4_code())
    assert rep.is_mds and rep.patterns_checked == 6 and rep.failing_pattern is None
    assert rep.is_lowest_density and rep.row_weights == [2] * 4
    assert rep.kappa == 2


def test_n8r3_gf7_code_is_mds_and_lowest_density():
    gen = n8r3_gf7_code()
    rep = check_mds_exhaustive(gen)
    assert rep.is_mds and rep.patterns_checked == 56
    assert mds_by_oracle(gen)
    ld = check_lowest_density(gen)
    assert ld.is_lowest_density and set(ld.row_weights) == {3} and set(ld.col_weights) == {5}
    assert ld.is_mds is None


def test_singular_a_tilde_gives_first_colex_witness():
    gen = design_code(4, 2, 3, Matrix([[1, 1], [1, 1]], PrimeField(3)))
    rep = check_mds_exhaustive(gen)
    assert rep.is_mds is False
    first_bad = next(f for f in colex_combinations(4, 2)
                     if det_mod(erasure_submatrix(gen, f).tolist(), 3) == 0)
    assert rep.failing_pattern == first_bad
    assert not rep.ok


def test_dense_generator_is_not_lowest_density():
    pr = CodeParams(4, 2, 2, 1, 1, 5)
    a = np.ones((4, 4), dtype=int) - np.eye(4, dtype=int)
    rep = check_lowest_density(GeneratorA.from_matrix(pr, Matrix(a, PrimeField(5))))
    assert not rep.is_lowest_density and set(rep.row_weights) == {3}


def test_b_code_support_is_lowest_density_and_mds_over_gf3():
    gen = GeneratorA.from_matrix(CodeParams(4, 2, 2, 1, 1, 3), Matrix(B_CODE_A, PrimeField(3)))
    rep = check_mds_exhaustive(gen)
    assert rep.ok


@pytest.mark.parametrize("n", range(2, 11))
def test_cauchy_codes_are_mds_for_every_r(n):
    for r in range(1, n):
        rep = check_mds_exhaustive(design_code(n, r))
        assert rep.ok, (n, r, rep.failing_pattern)


@pytest.mark.parametrize("n,r", [(4, 2), (5, 2), (6, 3), (7, 4)])
def test_exhaustive_agrees_with_determinant_oracle(n, r):
    gen = design_code(n, r)
    assert check_mds_exhaustive(gen).is_mds == mds_by_oracle(gen)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_a_tilde_verdict_matches_oracle(seed):
    # Random small-field a_tilde matrices are often not totally nonsingular.
    rng = np.random.default_rng(seed)
    a = Matrix(rng.integers(0, 5, size=(3, 2)), PrimeField(5))
    gen = design_code(5, 2, 5, a)
    assert check_mds_exhaustive(gen).is_mds == mds_by_oracle(gen)


def test_parallel_sweep_matches_serial():
    good = design_code(10, 5)
    bad = design_code(8, 4, 11, Matrix(np.ones((4, 4), dtype=int), PrimeField(11)))
    for gen in (good, bad):
        one = check_mds_exhaustive(gen)
        many = check_mds_exhaustive(gen, workers=3)
        assert (one.is_mds, one.failing_pattern, one.patterns_checked) == \
            (many.is_mds, many.failing_pattern, many.patterns_checked)


def test_budget():
    with pytest.raises(BudgetExceeded):
        check_mds_exhaustive(design_code(10, 5), budget=100)
    rep = verify_code(design_code(20, 10, 23), sample=30, seed=4)
    assert rep.exhaustive is False and rep.is_mds and rep.patterns_checked == 30
    assert 0 < rep.to_dict()["failing_fraction_upper_95"] < 0.1


def test_sampling_finds_bad_patterns():
    bad = design_code(8, 4, 11, Matrix(np.ones((4, 4), dtype=int), PrimeField(11)))
    rep = check_mds_sampled(bad, 50, seed=0)
    assert rep.is_mds is False and rep.failing_pattern is not None


def test_report_json_shape():
    d = check_mds_exhaustive(c4_code()).to_dict()
    assert d["kappa"] == {"num": 2, "den": 1}
    assert d["failing_pattern"] is None and d["exhaustive"] is True


@pytest.mark.parametrize("n", range(2, 9))
def test_dual_of_mds_code_is_mds(n):
    for r in range(1, n):
        dual = dual_code(design_code(n, r))
        assert dual.params.k == r and dual.params.r == n - r
        assert check_mds_exhaustive(dual).ok


@pytest.mark.parametrize("n,r,a", [(4, 2, 2), (6, 2, 3), (5, 2, 2), (8, 3, 2)])
def test_extended_codes_stay_mds(n, r, a):
    gen = extend_code(design_code(n, r), a)
    assert check_mds_exhaustive(gen).ok


@pytest.mark.parametrize("n,r", [(3, 1), (3, 2), (4, 2), (4, 3)])
def test_minimum_block_distance_is_r_plus_1(n, r):
    gen = design_code(n, r)
    pr = gen.params
    layout = build_layout(pr)
    best = n
    for vals in product(range(pr.q), repeat=pr.m * pr.n):
        if not any(vals):
            continue
        cw = encode(gen, layout, DataBlock.from_vector(pr, np.array(vals)))
        best = min(best, int(cw.cells.any(axis=0).sum()))
    assert best == r + 1


def test_totally_nonsingular_examples():
    assert totally_nonsingular(Matrix(N8R3_A_TILDE, PrimeField(7)))
    assert totally_nonsingular(Matrix(N4R2_A_TILDE, PrimeField(3)))
    assert not totally_nonsingular(Matrix([[1, 0], [1, 1]], PrimeField(3)))
    assert not totally_nonsingular(Matrix([[1, 2], [2, 4]], PrimeField(7)))
    with pytest.raises(BudgetExceeded):
        totally_nonsingular(Matrix(np.ones((8, 8)), PrimeField(11)), budget=10)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_totally_nonsingular_matches_minor_oracle(k, r, seed):
    arr = np.random.default_rng(seed).integers(0, 7, size=(k, r))
    assert totally_nonsingular(Matrix(arr, PrimeField(7))) == all_minors_nonzero(arr.tolist(), 7)


def test_count_square_submatrices():
    assert count_square_submatrices(5, 3) == 5 * 3 + 10 * 3 + 10 * 1


def test_structural_singularity_examples():
    blocked = [[1, 0, 0, 0], [1, 0, 0, 0], [0, 1, 1, 0], [0, 1, 0, 1]]
    assert structurally_singular(blocked)
    assert not structurally_singular(np.eye(5))
    assert not structurally_singular(np.ones((5, 5)))
    with pytest.raises(ValueError):
        structurally_singular(np.ones((2, 3)))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1), st.floats(0.1, 0.9))
def test_matching_agrees_with_permutation_oracle(n, seed, density):
    pat = np.random.default_rng(seed).random((n, n)) < density
    assert structurally_singular(pat) == (not has_perfect_matching_brute(pat))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_structurally_singular_patterns_are_singular_for_all_values(n, seed):
    rng = np.random.default_rng(seed)
    pat = rng.random((n, n)) < 0.35
    if not structurally_singular(pat):
        return
    for _ in range(100):
        vals = np.where(pat, rng.integers(1, 101, size=(n, n)), 0)
        assert rank_mod(vals.tolist(), 101) < n


def test_max_matching_size():
    adj = [[0, 1], [0], [2]]
    match = max_bipartite_matching(adj, 3)
    assert sum(1 for x in match if x >= 0) == 3
