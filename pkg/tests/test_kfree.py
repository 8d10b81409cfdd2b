import math

import numpy as np
import pytest

from beatty_kfree.errors import MemoryBudgetExceeded
from beatty_kfree.kfree import (
    count_kfree,
    iroot,
    kfree_indicator_moebius,
    kfree_indicator_moebius_range,
    sieve_kfree,
    sieve_moebius,
    zeta,
)


def mu_by_trial_factorization(n: int) -> int:
    """Oracle: factor n by trial division."""
    out = 1
    d = 2
    while d * d <= n:
        if n % d == 0:
            n //= d
            if n % d == 0:
                return 0
            out = -out
        d += 1
    if n > 1:
        out = -out
    return out


class TestMoebius:
    def test_small_values(self):
        t = sieve_moebius(1, 10)
        assert [t.mu_of(n) for n in (1, 2, 3, 4, 6)] == [1, -1, -1, 0, 1]

    def test_mertens_1e4_against_trial_factorization(self):
        t = sieve_moebius(1, 10**4)
        oracle = sum(mu_by_trial_factorization(n) for n in range(1, 10**4 + 1))
        assert oracle == -23
        assert int(np.sum(t.mu, dtype=np.int64)) == -23

    def test_segment_matches_monolithic(self):
        lo, hi = 10**6, 10**6 + 10**4
        seg = sieve_moebius(lo, hi)
        mono = sieve_moebius(1, hi)
        assert np.array_equal(seg.mu, mono.mu[lo - 1 :])

    def test_random_windows_match(self, rng):
        for _ in range(5):
            lo = int(rng.integers(1, 10**5))
            hi = lo + int(rng.integers(0, 3000))
            seg = sieve_moebius(lo, hi)
            mono = sieve_moebius(1, hi)
            assert np.array_equal(seg.mu, mono.mu[lo - 1 :])

    def test_multiplicative_on_coprime_pairs(self, rng):
        # mu(m*n) evaluated from the merged factorizations (an independent
        # route for coprime m, n) must equal the sieved mu(m)*mu(n)
        lim = 10**4
        spf = np.zeros(lim + 1, dtype=np.int64)
        for p in range(2, lim + 1):
            if spf[p] == 0:
                spf[p::p][spf[p::p] == 0] = p
        small = sieve_moebius(1, lim)

        def exponents(n):
            out = []
            while n > 1:
                p = int(spf[n])
                e = 0
                while n % p == 0:
                    n //= p
                    e += 1
                out.append(e)
            return out

        count = 0
        while count < 10**4:
            m = int(rng.integers(1, lim + 1))
            n = int(rng.integers(1, lim + 1))
            if math.gcd(m, n) != 1:
                continue
            count += 1
            exps = exponents(m) + exponents(n)
            mu_prod = 0 if any(e > 1 for e in exps) else (-1) ** len(exps)
            assert mu_prod == small.mu_of(m) * small.mu_of(n)

    def test_memory_budget(self):
        with pytest.raises(MemoryBudgetExceeded):
            sieve_moebius(1, 10**7, memory_bytes=1024)


class TestKFreeSieve:
    def test_squarefree_first_ten(self):
        t = sieve_kfree(2, 1, 10)
        got = {n for n in range(1, 11) if t.is_kfree(n)}
        assert got == {1, 2, 3, 5, 6, 7, 10}
        assert t.count() == 7

    def test_cubefree_first_ten(self):
        t = sieve_kfree(3, 1, 10)
        assert {n for n in range(1, 11) if not t.is_kfree(n)} == {8}
        assert t.count() == 9

    def test_four_not_squarefree(self):
        assert not sieve_kfree(2, 1, 10).is_kfree(4)

    def test_brute_force_window(self, rng):
        def kfree_brute(n, k):
            return all(n % (p**k) for p in range(2, int(n ** (1.0 / k)) + 2) if p**k <= n)

        for k in (2, 3, 4):
            lo = int(rng.integers(1, 10**4))
            t = sieve_kfree(k, lo, lo + 500)
            for n in range(lo, lo + 501):
                assert t.is_kfree(n) == kfree_brute(n, k)


class TestCountKFree:
    def test_ten(self):
        count, main, err = count_kfree(10, 2)
        assert count == 7
        assert abs(main - 6.0793) < 1e-3

    def test_one(self):
        for k in (2, 3, 5):
            assert count_kfree(1, k)[0] == 1

    def test_million_both_methods_and_stored_value(self):
        assert count_kfree(10**6, 2, "moebius")[0] == 607926
        assert count_kfree(10**6, 2, "sieve")[0] == 607926

    def test_methods_agree_random(self, rng):
        for _ in range(8):
            x = int(rng.integers(1, 10**5))
            k = int(rng.integers(2, 5))
            assert count_kfree(x, k, "moebius")[0] == count_kfree(x, k, "sieve")[0]

    def test_error_scaling_constant(self):
        # |count - x/zeta(k)| / x^(1/k) stays below 2 on the decade grid
        for k in (2, 3):
            for x in (10**4, 10**5, 10**6, 10**7):
                _, _, err = count_kfree(x, k)
                assert abs(err) / x ** (1.0 / k) <= 2.0


class TestZeta:
    def test_basel(self):
        assert abs(zeta(2) - math.pi**2 / 6) < 1e-12

    def test_aperys_constant_vs_mpmath(self):
        mp = pytest.importorskip("mpmath")
        mp.mp.dps = 30
        assert abs(zeta(3) - float(mp.zeta(3))) < 1e-12
        assert abs(zeta(3) - 1.202056903159594) < 1e-12

    def test_large_k_tail(self):
        assert 1.0 < zeta(20) < 1.0 + 2.0**-19

    def test_rejects_bad_k(self):
        with pytest.raises(ValueError):
            zeta(1)


class TestIndicator:
    def test_twelve(self):
        assert kfree_indicator_moebius(12, 2) == 0

    def test_squarefree_thirty(self):
        assert kfree_indicator_moebius(30, 2) == 1

    def test_scalar_matches_range(self, rng):
        for k in (2, 3, 4):
            vec = kfree_indicator_moebius_range(2000, k)
            for n in rng.integers(1, 2001, size=50):
                assert kfree_indicator_moebius(int(n), k) == vec[int(n)]

    def test_identity_against_sieve_flags(self):
        for k in (2, 3, 4):
            vec = kfree_indicator_moebius_range(10**4, k)[1:]
            flags = sieve_kfree(k, 1, 10**4).flags.astype(np.int64)
            assert np.array_equal(vec, flags)


class TestIroot:
    def test_exact_powers(self):
        for k in (2, 3, 4, 7):
            for r in (1, 2, 3, 10, 99):
                assert iroot(r**k, k) == r
                assert iroot(r**k - 1, k) == r - 1
