"""Moebius and k-free sieves, and counting k-free integers against x/zeta(k)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import MemoryBudgetExceeded

DEFAULT_SEGMENT = 1 << 22
DEFAULT_MEMORY_BYTES = 256 << 20
MAX_COUNT_X = 1 << 62


def iroot(x: int, k: int) -> int:
    """Largest r with r**k <= x."""
    if x < 0 or k < 1:
        raise ValueError("need x >= 0, k >= 1")
    if k == 1:
        return x
    if k == 2:
        return math.isqrt(x)
    r = int(round(x ** (1.0 / k)))
    while r > 0 and r**k > x:
        r -= 1
    while (r + 1) ** k <= x:
        r += 1
    return r


def primes_upto(n: int) -> np.ndarray:
    if n < 2:
        return np.empty(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.nonzero(flags)[0].astype(np.int64)


def _check_window(lo: int, hi: int, bytes_per_entry: int, memory_bytes: int) -> int:
    if not 1 <= lo <= hi:
        raise ValueError("need 1 <= lo <= hi")
    if hi > 1 << 40:
        raise ValueError("window end exceeds 2**40")
    n = hi - lo + 1
    if n * bytes_per_entry > memory_bytes:
        raise MemoryBudgetExceeded(
            f"window [{lo},{hi}] needs {n * bytes_per_entry} bytes "
            f"(budget {memory_bytes})"
        )
    return n


@dataclass(frozen=True)
class MoebiusTable:
    lo: int
    hi: int
    mu: np.ndarray  # int8 values in {-1, 0, +1}

    def mu_of(self, n: int) -> int:
        return int(self.mu[n - self.lo])


def sieve_moebius(lo: int, hi: int, memory_bytes: int = DEFAULT_MEMORY_BYTES) -> MoebiusTable:
    """Exact Moebius values on [lo, hi] by a segmented residual-factor sieve."""
    n = _check_window(lo, hi, 9, memory_bytes)
    mu = np.ones(n, dtype=np.int8)
    val = np.arange(lo, hi + 1, dtype=np.int64)
    for p in primes_upto(math.isqrt(hi)):
        p = int(p)
        start = ((lo + p - 1) // p) * p - lo
        mu[start::p] = -mu[start::p]
        val[start::p] //= p
        p2 = p * p
        start2 = ((lo + p2 - 1) // p2) * p2 - lo
        mu[start2::p2] = 0
    big = val > 1  # one prime factor above sqrt(hi) remains
    mu[big] = -mu[big]
    return MoebiusTable(lo, hi, mu)


@dataclass(frozen=True)
class KFreeTable:
    k: int
    lo: int
    hi: int
    flags: np.ndarray  # bool, True iff n is k-free

    def is_kfree(self, n: int) -> bool:
        return bool(self.flags[n - self.lo])

    def count(self) -> int:
        return int(np.count_nonzero(self.flags))


def sieve_kfree(k: int, lo: int, hi: int, memory_bytes: int = DEFAULT_MEMORY_BYTES) -> KFreeTable:
    """Flags for [lo, hi]: n is k-free iff no prime power p**k divides n."""
    if k < 2:
        raise ValueError("k must be >= 2")
    n = _check_window(lo, hi, 1, memory_bytes)
    flags = np.ones(n, dtype=bool)
    for p in primes_upto(iroot(hi, k)):
        pk = int(p) ** k
        start = ((lo + pk - 1) // pk) * pk - lo
        flags[start::pk] = False
    return KFreeTable(k, lo, hi, flags)


@lru_cache(maxsize=None)
def zeta(k: int) -> float:
    """zeta(k) for integer k >= 2 by direct series plus integral tail bounds.

    The tail over n > N lies between the integrals from N and N+1, so the
    midpoint estimate is certified to within N**-k / 2 <= 5e-14.
    """
    if not isinstance(k, int) or k < 2:
        raise ValueError("k must be an integer >= 2")
    N = max(4, int(math.ceil((2.0 / 1e-13) ** (1.0 / k))))
    head = float(np.sum(np.arange(1, N + 1, dtype=np.float64) ** float(-k)))
    tail = (N ** (1.0 - k) + (N + 1) ** (1.0 - k)) / (2.0 * (k - 1))
    return head + tail


def count_kfree(x: int, k: int, method: str = "moebius",
                memory_bytes: int = DEFAULT_MEMORY_BYTES) -> tuple[int, float, float]:
    """(exact count of k-free n <= x, x/zeta(k), count - x/zeta(k)).

    method 'moebius' evaluates sum_d mu(d) * floor(x / d**k) over d**k <= x;
    method 'sieve' counts segmented k-free flags. Both are exact.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if x > MAX_COUNT_X:
        raise ValueError("x exceeds the 2**62 counting guard")
    if x < 1:
        return 0, 0.0, 0.0
    if method == "moebius":
        r = iroot(x, k)
        table = sieve_moebius(1, r, memory_bytes)
        count = 0
        for d in range(1, r + 1):
            m = int(table.mu[d - 1])
            if m:
                count += m * (x // d**k)
    elif method == "sieve":
        count = 0
        lo = 1
        seg = min(DEFAULT_SEGMENT, memory_bytes)
        while lo <= x:
            hi = min(x, lo + seg - 1)
            count += sieve_kfree(k, lo, hi, memory_bytes).count()
            lo = hi + 1
    else:
        raise ValueError(f"unknown method {method!r}")
    main = x / zeta(k)
    return count, main, count - main


@lru_cache(maxsize=8)
def _small_mu(limit: int) -> np.ndarray:
    return sieve_moebius(1, limit).mu


def kfree_indicator_moebius(n: int, k: int) -> int:
    """sum of mu(d) over d with d**k | n: 1 if n is k-free, else 0."""
    if n < 1 or k < 2:
        raise ValueError("need n >= 1, k >= 2")
    r = iroot(n, k)
    mu = _small_mu(max(r, 16))
    s = 0
    for d in range(1, r + 1):
        if n % d**k == 0:
            s += int(mu[d - 1])
    return s


def kfree_indicator_moebius_range(N: int, k: int) -> np.ndarray:
    """Vector of the Moebius indicator sums for n = 1..N (index 0 unused)."""
    if N < 1 or k < 2:
        raise ValueError("need N >= 1, k >= 2")
    r = iroot(N, k)
    mu = _small_mu(max(r, 16))
    out = np.zeros(N + 1, dtype=np.int64)
    for d in range(1, r + 1):
        if mu[d - 1]:
            out[d**k :: d**k] += int(mu[d - 1])
    return out
