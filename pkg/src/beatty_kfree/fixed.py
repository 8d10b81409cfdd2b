"""Certified base-2 fixed-point reals and compensated complex accumulation.

A FixedReal carries an integer mantissa at a binary scale together with a
conservative error bound in ulps, so floor/fractional-part decisions can be
certified: a decision is made only when the whole error interval clears the
boundary. Callers escalate precision (recompute the mantissa with more bits)
when a decision cannot be certified.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import PrecisionExhausted

DEFAULT_BITS = 192
MAX_BITS = 1024
MIN_DECISION_BITS = 64

_MASK32 = np.uint64(0xFFFFFFFF)
_TWO_M32 = 2.0 ** -32
_TWO_M64 = 2.0 ** -64
_TWO_M96 = 2.0 ** -96


def decision_margin(err_ulps: int) -> int:
    """Required clearance (in ulps) between an error interval and a boundary."""
    return err_ulps + max(1, err_ulps >> 32)


@dataclass(frozen=True)
class FixedReal:
    """value = mantissa / 2**scale_bits, true value within +-err_ulps ulps."""

    mantissa: int
    scale_bits: int
    err_ulps: int = 0

    def __post_init__(self):
        if self.scale_bits < 0:
            raise ValueError("scale_bits must be >= 0")
        if self.err_ulps < 0:
            raise ValueError("err_ulps must be >= 0")

    @classmethod
    def from_fraction(cls, value: Fraction, scale_bits: int) -> "FixedReal":
        """Round-to-nearest representation; err_ulps is 0 only for exact dyadics."""
        value = Fraction(value)
        num = value.numerator << scale_bits
        den = value.denominator
        q, r = divmod(num, den)
        if r == 0:
            return cls(q, scale_bits, 0)
        if 2 * r >= den:
            q += 1
        return cls(q, scale_bits, 1)

    @classmethod
    def from_interval(cls, lo: Fraction, hi: Fraction, scale_bits: int) -> "FixedReal":
        """Smallest representation whose error interval covers [lo, hi]."""
        if lo > hi:
            raise ValueError("empty interval")
        mid = (lo + hi) / 2
        out = cls.from_fraction(mid, scale_bits)
        half_width = (hi - lo) / 2
        extra = -((-half_width.numerator << scale_bits) // half_width.denominator) if half_width else 0
        return cls(out.mantissa, scale_bits, out.err_ulps + extra)

    @classmethod
    def exact_int(cls, n: int, scale_bits: int) -> "FixedReal":
        return cls(n << scale_bits, scale_bits, 0)

    def lo(self) -> Fraction:
        return Fraction(self.mantissa - self.err_ulps, 1 << self.scale_bits)

    def hi(self) -> Fraction:
        return Fraction(self.mantissa + self.err_ulps, 1 << self.scale_bits)

    def to_float(self) -> float:
        return frac_to_float(self.mantissa, self.scale_bits, wrap=False)

    def rescale(self, scale_bits: int) -> "FixedReal":
        if scale_bits == self.scale_bits:
            return self
        if scale_bits > self.scale_bits:
            s = scale_bits - self.scale_bits
            return FixedReal(self.mantissa << s, scale_bits, self.err_ulps << s)
        s = self.scale_bits - scale_bits
        # round to nearest; 1 extra ulp covers the rounding
        m = (self.mantissa + (1 << (s - 1))) >> s
        err = (self.err_ulps >> s) + 2
        return FixedReal(m, scale_bits, err)

    def mul_int(self, n: int) -> "FixedReal":
        return FixedReal(self.mantissa * n, self.scale_bits, self.err_ulps * abs(n))

    def add(self, other: "FixedReal") -> "FixedReal":
        bits = max(self.scale_bits, other.scale_bits)
        a, b = self.rescale(bits), other.rescale(bits)
        return FixedReal(a.mantissa + b.mantissa, bits, a.err_ulps + b.err_ulps)

    def neg(self) -> "FixedReal":
        return FixedReal(-self.mantissa, self.scale_bits, self.err_ulps)

    def floor_certified(self):
        """Exact floor, or None when the error interval straddles an integer."""
        if self.err_ulps == 0:
            return self.mantissa >> self.scale_bits
        one = 1 << self.scale_bits
        r = self.mantissa & (one - 1)
        margin = decision_margin(self.err_ulps)
        if margin < r < one - margin:
            return self.mantissa >> self.scale_bits
        return None

    def frac(self) -> "FixedReal":
        """x - floor(x), in [0, 1).

        Raises PrecisionExhausted when floor cannot be certified; the caller
        must recompute the value at higher precision before retrying.
        """
        f = self.floor_certified()
        if f is None:
            raise PrecisionExhausted(
                f"fractional part undecidable at {self.scale_bits} bits "
                f"(err {self.err_ulps} ulps)"
            )
        return FixedReal(self.mantissa - (f << self.scale_bits), self.scale_bits, self.err_ulps)


def frac_to_float(mantissa: int, scale_bits: int, wrap: bool = True) -> float:
    """mantissa / 2**scale_bits as float64, safe for arbitrarily wide mantissas."""
    if wrap:
        mantissa %= 1 << scale_bits
    if scale_bits <= 62:
        return math.ldexp(mantissa, -scale_bits)
    neg = mantissa < 0
    m = -mantissa if neg else mantissa
    shift = max(0, m.bit_length() - 62)
    v = math.ldexp(m >> shift, shift - scale_bits)
    return -v if neg else v


def unit_exp(x: FixedReal) -> tuple[float, float]:
    """(cos 2*pi*x, sin 2*pi*x) computed from the certified fractional part."""
    f = x.frac()
    t = frac_to_float(f.mantissa, f.scale_bits)
    ang = 2.0 * math.pi * t
    return math.cos(ang), math.sin(ang)


def frac_vector(
    mantissa: int,
    scale_bits: int,
    n: np.ndarray,
    offset_mantissa: int = 0,
) -> np.ndarray:
    """Fractional parts of (mantissa*n + offset) / 2**scale_bits as float64.

    Exact modular reduction through the top 96 bits of the mantissa, so the
    result is within ~2**-50 of the true fractional part. Requires n < 2**31.
    """
    one = 1 << scale_bits
    r = mantissa % one
    if scale_bits >= 96:
        t = r >> (scale_bits - 96)
    else:
        t = r << (96 - scale_bits)
    a = np.uint64(t >> 64)
    b = np.uint64((t >> 32) & 0xFFFFFFFF)
    c = np.uint64(t & 0xFFFFFFFF)
    n64 = np.ascontiguousarray(n, dtype=np.uint64)
    f = ((a * n64) & _MASK32).astype(np.float64) * _TWO_M32
    f += (b * n64).astype(np.float64) * _TWO_M64
    f += (c * n64).astype(np.float64) * _TWO_M96
    if offset_mantissa:
        f += frac_to_float(offset_mantissa % one, scale_bits)
    return np.mod(f, 1.0)


def frac_exact(mantissa: int, scale_bits: int, n: int, offset_mantissa: int = 0) -> int:
    """Exact mantissa of frac((mantissa*n + offset) / 2**scale_bits)."""
    return (mantissa * n + offset_mantissa) % (1 << scale_bits)


def sin_pi_reduced(mantissa: int, scale_bits: int) -> float:
    """sin(pi * mantissa / 2**scale_bits) with exact mod-2 argument reduction."""
    m2 = mantissa % (1 << (scale_bits + 1))
    r = m2 & ((1 << scale_bits) - 1)
    nearest = m2 >> scale_bits
    if r >= (1 << (scale_bits - 1)):
        r -= 1 << scale_bits
        nearest += 1
    s = math.sin(math.pi * frac_to_float(r, scale_bits, wrap=False))
    return -s if (nearest & 1) else s


def exp_circle(mantissa: int, scale_bits: int) -> tuple[float, float]:
    """(cos, sin) of 2*pi*(mantissa / 2**scale_bits) with exact reduction."""
    t = frac_to_float(mantissa, scale_bits)
    ang = 2.0 * math.pi * t
    return math.cos(ang), math.sin(ang)


@dataclass(frozen=True)
class ComplexSum:
    """Compensated (Neumaier) complex accumulator; immutable value type."""

    re: float = 0.0
    im: float = 0.0
    terms: int = 0
    comp_re: float = 0.0
    comp_im: float = 0.0

    def value(self) -> complex:
        return complex(self.re + self.comp_re, self.im + self.comp_im)

    def abs(self) -> float:
        return abs(self.value())


def _neumaier(s: float, comp: float, v: float) -> tuple[float, float]:
    t = s + v
    if abs(s) >= abs(v):
        comp += (s - t) + v
    else:
        comp += (v - t) + s
    return t, comp


def kahan_add(acc: ComplexSum, term: tuple[float, float]) -> ComplexSum:
    """Accumulate one complex term with compensation; deterministic per order."""
    re, cre = _neumaier(acc.re, acc.comp_re, term[0])
    im, cim = _neumaier(acc.im, acc.comp_im, term[1])
    return ComplexSum(re, im, acc.terms + 1, cre, cim)


def kahan_merge(acc: ComplexSum, other: ComplexSum, extra_terms: int | None = None) -> ComplexSum:
    """Fold another partial sum into acc (compensations folded as values)."""
    out = kahan_add(acc, (other.re, other.im))
    out = kahan_add(out, (other.comp_re, other.comp_im))
    terms = acc.terms + (other.terms if extra_terms is None else extra_terms)
    return ComplexSum(out.re, out.im, terms, out.comp_re, out.comp_im)


def chunked_complex_sum(re: np.ndarray, im: np.ndarray, chunks: int = 1) -> ComplexSum:
    """Deterministic reduction: fixed index-based chunking, in-order merge.

    The chunk count (recorded config, e.g. the thread setting) fully
    determines the reduction tree, so results are reproducible bit-for-bit
    regardless of how the chunks are executed.
    """
    n = len(re)
    if n == 0:
        return ComplexSum()
    chunks = max(1, min(chunks, n))
    bounds = [(i * n) // chunks for i in range(chunks + 1)]
    acc = ComplexSum()
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        part = (float(np.sum(re[lo:hi])), float(np.sum(im[lo:hi])))
        acc = kahan_add(acc, part)
    return ComplexSum(acc.re, acc.im, n, acc.comp_re, acc.comp_im)
