import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beatty_kfree.beatty import (
    BeattyParams,
    beatty_term,
    beatty_terms_block,
    count_kfree_beatty,
    count_kfree_beatty_scaled,
    is_member,
    member_flags_block,
    member_witness,
    parse_beta,
)
from beatty_kfree.cfrac import PHI, SQRT2, SQRT3, QuadraticIrrational
from beatty_kfree.kfree import sieve_kfree


def enumerate_members(p: BeattyParams, top: int) -> np.ndarray:
    """Oracle: mark every floor(alpha*n + beta) <= top over n >= 1."""
    out = np.zeros(top + 1, dtype=bool)
    n = 1
    while True:
        t = beatty_term(p, n)
        if t > top:
            return out
        if t >= 1:
            out[t] = True
        n += 1


class TestTerms:
    def test_phi_first_terms(self):
        p = BeattyParams(PHI, 0)
        assert [beatty_term(p, n) for n in range(1, 6)] == [1, 3, 4, 6, 8]

    def test_sqrt2_with_half(self):
        p = BeattyParams(SQRT2, Fraction(1, 2))
        assert beatty_term(p, 1) == 1  # floor(1.9142)

    def test_gap_structure(self):
        for alpha in (PHI, SQRT2):
            p = BeattyParams(alpha, 0)
            terms = beatty_terms_block(p, 1, 10**5)
            gaps = set(np.unique(np.diff(terms)).tolist())
            lo, hi = alpha.eval_interval(64)
            assert gaps == {math.floor(lo), math.floor(lo) + 1}

    def test_block_matches_scalar(self):
        p = BeattyParams(QuadraticIrrational(7, 2, 3), Fraction(-7, 10))
        block = beatty_terms_block(p, 1, 500)
        assert [beatty_term(p, n) for n in range(1, 501)] == block.tolist()

    @given(
        pp=st.integers(min_value=0, max_value=30),
        d=st.integers(min_value=2, max_value=300),
        q=st.integers(min_value=1, max_value=9),
        bnum=st.integers(min_value=-20, max_value=20),
        bden=st.integers(min_value=1, max_value=9),
    )
    @settings(max_examples=120, deadline=None)
    def test_block_matches_scalar_random(self, pp, d, q, bnum, bden):
        if math.isqrt(d) ** 2 == d:
            return
        alpha = QuadraticIrrational(pp, d, q)
        lo, _ = alpha.eval_interval(64)
        if lo <= 1:
            return
        p = BeattyParams(alpha, Fraction(bnum, bden))
        ns = [1, 2, 3, 17, 100]
        block = beatty_terms_block(p, 1, 100)
        for n in ns:
            assert beatty_term(p, n) == block[n - 1]


class TestMembership:
    def test_phi_examples(self):
        p = BeattyParams(PHI, 0)
        assert is_member(p, 4)
        assert not is_member(p, 2)

    def test_round_trip(self):
        for alpha, beta in ((PHI, 0), (SQRT2, Fraction(1, 2))):
            p = BeattyParams(alpha, beta)
            for n in range(1, 10**4, 97):
                t = beatty_term(p, n)
                if t >= 1:
                    assert is_member(p, t)
                    assert member_witness(p, t) == n

    def test_criterion_equals_enumeration(self):
        top = 10**4
        for alpha in (PHI, SQRT2, QuadraticIrrational(7, 2, 3)):
            for beta in (Fraction(0), Fraction(1, 2), Fraction(-7, 10)):
                p = BeattyParams(alpha, beta)
                flags = member_flags_block(p, 1, top)
                assert np.array_equal(flags, enumerate_members(p, top)[1:])

    def test_nonmember_has_no_witness(self):
        p = BeattyParams(PHI, 0)
        assert member_witness(p, 2) is None

    def test_integer_beta_exact_boundaries(self):
        p = BeattyParams(PHI, 5)
        # {gamma*m + delta} = 0 exactly at m + 1 = beta: not a member
        assert not is_member(p, 4)
        # {gamma*m + delta} = gamma exactly at m = beta: member (witness 0)
        assert is_member(p, 5)
        assert member_witness(p, 5) == 0

    def test_scalar_matches_block_random_range(self, rng):
        p = BeattyParams(SQRT3, Fraction(1, 3))
        lo = int(rng.integers(1, 10**6))
        flags = member_flags_block(p, lo, lo + 2000)
        for i in rng.integers(0, 2001, size=60):
            assert flags[int(i)] == is_member(p, lo + int(i))


class TestCounting:
    def test_phi_squarefree_ten(self):
        p = BeattyParams(PHI, 0)
        # enumeration oracle: terms 1,3,4,6,8,9,11,12,14,16; squarefree are
        # 1,3,6,11,14
        terms = [beatty_term(p, n) for n in range(1, 11)]
        flags = sieve_kfree(2, 1, max(terms))
        oracle = sum(1 for t in terms if flags.is_kfree(t))
        assert oracle == 5
        assert count_kfree_beatty(p, 10, 2)[0] == 5

    def test_phi_cubefree_ten(self):
        p = BeattyParams(PHI, 0)
        terms = [beatty_term(p, n) for n in range(1, 11)]
        flags = sieve_kfree(3, 1, max(terms))
        oracle = sum(1 for t in terms if flags.is_kfree(t))
        # terms include both 8 = 2**3 and 16 = 2**4, so two are excluded
        assert oracle == 8
        assert count_kfree_beatty(p, 10, 3)[0] == 8

    def test_x_one(self):
        for alpha, beta, k in ((PHI, 0, 2), (SQRT2, Fraction(1, 2), 3)):
            p = BeattyParams(alpha, beta)
            t = beatty_term(p, 1)
            expected = 1 if sieve_kfree(k, 1, max(t, 1)).is_kfree(t) else 0
            assert count_kfree_beatty(p, 1, k)[0] == expected

    def test_zero_edge(self):
        p = BeattyParams(PHI, 0)
        assert count_kfree_beatty(p, 0, 2) == (0, 0.0, 0.0)
        assert count_kfree_beatty_scaled(p, 0, 2) == (0, 0.0)

    def test_scaled_pair_example(self):
        p = BeattyParams(PHI, 0)
        direct, scaled = count_kfree_beatty_scaled(p, 10, 2)
        assert direct == 5
        # Q_2(16) = 11 scaled by 1/phi
        assert abs(scaled - 11 / ((1 + math.sqrt(5)) / 2)) < 1e-12
        assert abs((direct - scaled) - (-1.7984)) < 1e-3

    def test_counts_stable_under_precision_doubling(self):
        for bits in (128, 256):
            p = BeattyParams(SQRT2, Fraction(1, 2), precision_bits=bits)
            assert count_kfree_beatty(p, 2000, 2)[0] == count_kfree_beatty(
                BeattyParams(SQRT2, Fraction(1, 2), precision_bits=2 * bits), 2000, 2
            )[0]

    def test_error_column(self):
        p = BeattyParams(PHI, 0)
        count, main, err = count_kfree_beatty(p, 1000, 2)
        assert err == count - main

    def test_alpha_not_above_one_rejected(self):
        with pytest.raises(ValueError):
            BeattyParams(PHI.reciprocal(), 0)


class TestParseBeta:
    def test_forms(self):
        assert parse_beta("1/2") == Fraction(1, 2)
        assert parse_beta("0.5") == Fraction(1, 2)
        assert parse_beta("-0.7") == Fraction(-7, 10)
