"""Beatty sequence terms, exact membership, and k-free counting along the sequence.

The membership criterion is the fractional-part test
    m = floor(alpha*n + beta) for some integer n  iff  0 < {gamma*m + delta} <= gamma,
with gamma = 1/alpha and delta = (1 - beta)/alpha; the witness n is
floor(gamma*m + delta). All floor and comparison decisions are certified
via interval fixed-point arithmetic with precision escalation.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .cfrac import IrrationalSpec
from .errors import PrecisionExhausted
from .fixed import (
    DEFAULT_BITS,
    MAX_BITS,
    FixedReal,
    decision_margin,
    frac_vector,
)
from .kfree import DEFAULT_MEMORY_BYTES, sieve_kfree, zeta

_BORDER_TOL = 2.0**-40


@dataclass(frozen=True)
class _Level:
    """Mantissas of alpha, beta, gamma, delta at one working precision."""

    bits: int
    alpha: FixedReal
    beta: FixedReal
    gamma: FixedReal
    delta: FixedReal


def parse_beta(text: str) -> Fraction:
    """Exact rational beta from forms like '1/2', '0.5', '-0.7'."""
    return Fraction(text)


class BeattyParams:
    """Parameters (alpha, beta) with derived gamma, delta at managed precision."""

    def __init__(
        self,
        alpha: IrrationalSpec,
        beta: Fraction | int | str = 0,
        precision_bits: int = DEFAULT_BITS,
        max_bits: int = MAX_BITS,
    ):
        self.alpha = alpha
        self.beta = Fraction(beta)
        self.precision_bits = precision_bits
        self.max_bits = max_bits
        self._levels: dict[int, _Level] = {}
        self.level(precision_bits)  # validates alpha > 1 eagerly

    def level(self, bits: int) -> _Level:
        lv = self._levels.get(bits)
        if lv is None:
            guard = bits + 16
            alo, ahi = self.alpha.eval_interval(guard)
            if alo <= 1:
                raise ValueError("alpha must be certified > 1 as a Beatty modulus")
            glo, ghi = 1 / ahi, 1 / alo
            c = 1 - self.beta
            dlo, dhi = (glo * c, ghi * c) if c >= 0 else (ghi * c, glo * c)
            lv = _Level(
                bits,
                FixedReal.from_interval(alo, ahi, bits),
                FixedReal.from_fraction(self.beta, bits),
                FixedReal.from_interval(glo, ghi, bits),
                FixedReal.from_interval(dlo, dhi, bits),
            )
            self._levels[bits] = lv
        return lv

    def escalation(self) -> Iterator[_Level]:
        bits = self.precision_bits
        while bits <= self.max_bits:
            yield self.level(bits)
            bits *= 2

    @property
    def gamma(self) -> FixedReal:
        return self.level(self.precision_bits).gamma

    @property
    def delta(self) -> FixedReal:
        return self.level(self.precision_bits).delta

    def __repr__(self) -> str:
        return f"BeattyParams({self.alpha}, beta={self.beta})"


def beatty_term(p: BeattyParams, n: int) -> int:
    """Exact floor(alpha*n + beta) with certified floor."""
    if n < 0:
        raise ValueError("n must be >= 0")
    for lv in p.escalation():
        v = FixedReal(
            lv.alpha.mantissa * n + lv.beta.mantissa,
            lv.bits,
            lv.alpha.err_ulps * n + lv.beta.err_ulps,
        )
        f = v.floor_certified()
        if f is not None:
            return f
    raise PrecisionExhausted(f"floor(alpha*{n}+beta) undecidable up to {p.max_bits} bits")


def beatty_terms_block(p: BeattyParams, n_lo: int, n_hi: int) -> np.ndarray:
    """Vector of floor(alpha*n + beta) for n in [n_lo, n_hi].

    Fast path combines a float64 estimate with exactly reduced fractional
    parts; entries whose fractional part sits within 2**-40 of an integer
    are recomputed through the certified scalar path.
    """
    lv = p.level(p.precision_bits)
    n = np.arange(n_lo, n_hi + 1, dtype=np.uint64)
    f = frac_vector(lv.alpha.mantissa, lv.bits, n, offset_mantissa=lv.beta.mantissa)
    v = lv.alpha.to_float() * n.astype(np.float64) + lv.beta.to_float()
    m = np.rint(v - f).astype(np.int64)
    border = np.nonzero((f < _BORDER_TOL) | (f > 1.0 - _BORDER_TOL))[0]
    for i in border:
        m[i] = beatty_term(p, n_lo + int(i))
    return m


def is_member(p: BeattyParams, m: int) -> bool:
    """True iff m = floor(alpha*n + beta) for some integer n."""
    if m < 1:
        raise ValueError("m must be >= 1")
    # exact fractional-part collisions are possible only for integer beta:
    # {gamma*m + delta} = 0 iff m + 1 = beta, and = gamma iff m = beta
    if p.beta.denominator == 1:
        b = p.beta.numerator
        if m + 1 == b:
            return False
        if m == b:
            return True
    for lv in p.escalation():
        one = 1 << lv.bits
        r = (lv.gamma.mantissa * m + lv.delta.mantissa) % one
        err = lv.gamma.err_ulps * m + lv.delta.err_ulps
        margin = decision_margin(err)
        if r <= margin or r >= one - margin:
            continue  # cannot separate the fractional part from 0
        gerr = lv.gamma.err_ulps
        slack = max(1, (err + gerr) >> 32)
        if r + err + slack < lv.gamma.mantissa - gerr:
            return True
        if r - err - slack > lv.gamma.mantissa + gerr:
            return False
    raise PrecisionExhausted(
        f"membership of {m} undecidable up to {p.max_bits} bits"
    )


def member_witness(p: BeattyParams, m: int) -> int | None:
    """The unique integer n with floor(alpha*n + beta) = m, if any."""
    if not is_member(p, m):
        return None
    for lv in p.escalation():
        v = FixedReal(
            lv.gamma.mantissa * m + lv.delta.mantissa,
            lv.bits,
            lv.gamma.err_ulps * m + lv.delta.err_ulps,
        )
        f = v.floor_certified()
        if f is not None:
            return f
    raise PrecisionExhausted(f"witness for {m} undecidable up to {p.max_bits} bits")


def member_flags_block(p: BeattyParams, m_lo: int, m_hi: int) -> np.ndarray:
    """Vectorized membership criterion for m in [m_lo, m_hi] (bool array)."""
    lv = p.level(p.precision_bits)
    m = np.arange(m_lo, m_hi + 1, dtype=np.uint64)
    f = frac_vector(lv.gamma.mantissa, lv.bits, m, offset_mantissa=lv.delta.mantissa)
    gf = lv.gamma.to_float()
    flags = (f > 0.0) & (f <= gf)
    border = np.nonzero(
        (f < _BORDER_TOL) | (f > 1.0 - _BORDER_TOL) | (np.abs(f - gf) < _BORDER_TOL)
    )[0]
    for i in border:
        flags[i] = is_member(p, m_lo + int(i))
    return flags


def count_kfree_beatty(
    p: BeattyParams,
    x: int,
    k: int,
    memory_bytes: int = DEFAULT_MEMORY_BYTES,
    block: int = 1 << 20,
) -> tuple[int, float, float]:
    """Count n <= x with floor(alpha*n + beta) k-free; error vs x/zeta(k).

    Streams blocks of n, sieving k-free flags over the matching window of
    term values, so memory stays bounded by the block span.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if x < 1:
        return 0, 0.0, 0.0
    count = 0
    n0 = 1
    while n0 <= x:
        n1 = min(x, n0 + block - 1)
        terms = beatty_terms_block(p, n0, n1)
        t_lo, t_hi = int(terms[0]), int(terms[-1])
        if t_lo < 1:
            raise ValueError("terms must be positive; increase beta or n range")
        flags = sieve_kfree(k, t_lo, t_hi, memory_bytes).flags
        count += int(np.count_nonzero(flags[terms - t_lo]))
        n0 = n1 + 1
    main = x / zeta(k)
    return count, main, count - main


def count_kfree_beatty_scaled(
    p: BeattyParams,
    x: int,
    k: int,
    memory_bytes: int = DEFAULT_MEMORY_BYTES,
) -> tuple[int, float]:
    """(Beatty k-free count, gamma * (k-free count up to floor(alpha*x + beta))).

    The two quantities agree up to the sequence-level error term, so their
    difference is the directly measurable deviation.
    """
    from .kfree import count_kfree

    if x < 1:
        return 0, 0.0
    direct = count_kfree_beatty(p, x, k, memory_bytes)[0]
    M = beatty_term(p, x)
    q_count = count_kfree(M, k, memory_bytes=memory_bytes)[0]
    return direct, p.gamma.to_float() * q_count
