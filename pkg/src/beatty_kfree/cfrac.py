"""Continued fractions, convergents, best rational approximation, type estimation.

Irrational inputs come in three flavors with different precision contracts:
exact quadratic irrationals (p + sqrt(d))/q (unlimited certified bits),
finite partial-quotient prefixes, and decimal strings with a stated number
of certified bits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt
from typing import Iterator, Union

from .errors import PrecisionExhausted
from .fixed import DEFAULT_BITS, FixedReal


@dataclass(frozen=True)
class QuadraticIrrational:
    """(p + sqrt(d)) / q with d a positive non-square and q >= 1."""

    p: int
    d: int
    q: int

    def __post_init__(self):
        if self.d <= 0 or isqrt(self.d) ** 2 == self.d:
            raise ValueError("d must be a positive non-square")
        if self.q < 1:
            raise ValueError("q must be a positive integer (canonical form)")

    def eval_interval(self, bits: int) -> tuple[Fraction, Fraction]:
        b2 = bits + 16
        s = isqrt(self.d << (2 * b2))
        den = self.q << b2
        num = (self.p << b2) + s
        return Fraction(num, den), Fraction(num + 1, den)

    def quotient_iter(self) -> Iterator[int]:
        # exact surd expansion of (P + sqrt(D))/Q; keeps Q | D - P*P
        p, d, q = self.p, self.d, self.q
        if (d - p * p) % q:
            p, d, q = p * q, d * q * q, q * q
        s = isqrt(d)
        while True:
            a = (p + s) // q if q > 0 else (p + s + 1 - q) // q
            yield a
            p = a * q - p
            q = (d - p * p) // q

    def reciprocal(self) -> "QuadraticIrrational":
        """1/value in the same canonical form (requires d > p*p)."""
        e = self.d - self.p * self.p
        if e <= 0:
            raise ValueError("reciprocal not representable with q > 0")
        return make_quadratic(-self.p * self.q, self.d * self.q * self.q, e)

    def __str__(self) -> str:
        return f"quad:{self.p},{self.d},{self.q}"


def make_quadratic(p: int, d: int, q: int) -> QuadraticIrrational:
    """Build (p + sqrt(d))/q, reducing square factors of d and common divisors."""
    g = 1
    f = 2
    dd = d
    while f * f <= dd:
        while dd % (f * f) == 0:
            dd //= f * f
            g *= f
        f += 1
    c = gcd(gcd(abs(p), g), abs(q))
    return QuadraticIrrational(p // c, (g // c) ** 2 * dd, q // c)


PHI = QuadraticIrrational(1, 5, 2)
SQRT2 = QuadraticIrrational(0, 2, 1)
SQRT3 = QuadraticIrrational(0, 3, 1)


@dataclass(frozen=True)
class PartialQuotients:
    """A finite certified prefix of a continued-fraction expansion."""

    quotients: tuple[int, ...]

    def __post_init__(self):
        if not self.quotients:
            raise ValueError("need at least one quotient")
        if any(a < 1 for a in self.quotients[1:]) or self.quotients[0] < 0:
            raise ValueError("quotients must be positive (a0 >= 0)")

    def eval_interval(self, bits: int) -> tuple[Fraction, Fraction]:
        pm1, pm2, qm1, qm2 = 1, 0, 0, 1
        for a in self.quotients:
            pm1, pm2 = a * pm1 + pm2, pm1
            qm1, qm2 = a * qm1 + qm2, qm1
        lo = Fraction(pm1, qm1)
        hi = Fraction(pm1 + pm2, qm1 + qm2)
        return (lo, hi) if lo <= hi else (hi, lo)

    def quotient_iter(self) -> Iterator[int]:
        return iter(self.quotients)

    def __str__(self) -> str:
        return "cf:" + ",".join(str(a) for a in self.quotients)


@dataclass(frozen=True)
class DecimalString:
    """Decimal approximation with a stated certified precision in bits."""

    digits: str
    bits: int

    def __post_init__(self):
        Fraction(self.digits)  # validates
        if self.bits < 8:
            raise ValueError("stated precision must be at least 8 bits")

    def eval_interval(self, bits: int) -> tuple[Fraction, Fraction]:
        v = Fraction(self.digits)
        eps = Fraction(1, 1 << self.bits)
        return v - eps, v + eps

    def quotient_iter(self) -> Iterator[int]:
        lo, hi = self.eval_interval(self.bits)
        return cf_interval_iter(lo, hi)

    def __str__(self) -> str:
        return f"dec:{self.digits}:{self.bits}"


IrrationalSpec = Union[QuadraticIrrational, PartialQuotients, DecimalString]


def parse_irrational(text: str) -> IrrationalSpec:
    """Parse 'quad:p,d,q' | 'cf:a0,a1,...' | 'dec:<digits>:<bits>'."""
    kind, _, rest = text.partition(":")
    if kind == "quad":
        p, d, q = (int(v) for v in rest.split(","))
        return QuadraticIrrational(p, d, q)
    if kind == "cf":
        return PartialQuotients(tuple(int(v) for v in rest.split(",")))
    if kind == "dec":
        digits, _, bits = rest.rpartition(":")
        return DecimalString(digits, int(bits))
    raise ValueError(f"unknown irrational format: {text!r}")


def to_fixed(alpha: IrrationalSpec, bits: int) -> FixedReal:
    lo, hi = alpha.eval_interval(bits)
    return FixedReal.from_interval(lo, hi, bits)


def cf_interval_iter(lo: Fraction, hi: Fraction) -> Iterator[int]:
    """Quotients certified to be shared by every real in [lo, hi].

    For an exact rational (lo == hi) the full terminating expansion is
    emitted; otherwise emission stops at the first quotient the interval
    cannot pin down.
    """
    while True:
        if lo == hi:
            x = lo
            while True:
                a = math.floor(x)
                yield a
                f = x - a
                if f == 0:
                    return
                x = 1 / f
        alo, ahi = math.floor(lo), math.floor(hi)
        if alo != ahi:
            return
        yield alo
        flo, fhi = lo - alo, hi - alo
        if flo == 0:
            return
        lo, hi = 1 / fhi, 1 / flo


def cf_expand(alpha: IrrationalSpec, count: int) -> list[int]:
    """First `count` partial quotients, exact or certified.

    Raises PrecisionExhausted when the spec cannot certify that many
    quotients (short prefix, or not enough decimal digits).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    out = []
    for a in alpha.quotient_iter():
        out.append(a)
        if len(out) == count:
            return out
    raise PrecisionExhausted(
        f"only {len(out)} quotients certified for {alpha}, wanted {count}"
    )


@dataclass(frozen=True)
class Convergent:
    a: int
    q: int
    index: int

    def as_fraction(self) -> Fraction:
        return Fraction(self.a, self.q)


def _convergent_iter(alpha: IrrationalSpec) -> Iterator[Convergent]:
    pm1, pm2, qm1, qm2 = 1, 0, 0, 1
    for i, a in enumerate(alpha.quotient_iter()):
        pm1, pm2 = a * pm1 + pm2, pm1
        qm1, qm2 = a * qm1 + qm2, qm1
        yield Convergent(pm1, qm1, i)


def convergents(alpha: IrrationalSpec, count: int) -> list[Convergent]:
    """First `count` convergents a_i/q_i via the standard recurrence."""
    if count < 1:
        raise ValueError("count must be >= 1")
    out = []
    for c in _convergent_iter(alpha):
        out.append(c)
        if len(out) == count:
            return out
    raise PrecisionExhausted(
        f"only {len(out)} convergents certified for {alpha}, wanted {count}"
    )


def dirichlet_approx(theta: FixedReal, K: int) -> tuple[int, int]:
    """Reduced a/q with 1 <= q <= K and |theta - a/q| <= 1/(qK).

    Scans the convergents of theta's center value (an exact dyadic
    rational): the last convergent with q <= K has the required quality
    because the next denominator exceeds K, and the precondition on
    theta's precision makes the representation width negligible against
    1/(qK). A rational theta whose expansion terminates with q <= K is
    returned exactly.
    """
    if K < 2:
        raise ValueError("K must be >= 2")
    need = 2 * K.bit_length() + 32
    if theta.scale_bits < need:
        raise PrecisionExhausted(
            f"theta carries {theta.scale_bits} bits, need >= {need} for K={K}"
        )
    center = Fraction(theta.mantissa, 1 << theta.scale_bits)
    best: tuple[int, int] | None = None
    pm1, pm2, qm1, qm2 = 1, 0, 0, 1
    for a in cf_interval_iter(center, center):
        pm1, pm2 = a * pm1 + pm2, pm1
        qm1, qm2 = a * qm1 + qm2, qm1
        if qm1 > K:
            assert best is not None
            return best
        best = (pm1, qm1)
    # terminated rational expansion with q <= K: theta = a/q exactly
    assert best is not None
    return best


@dataclass(frozen=True)
class TypeEstimate:
    """Empirical irrationality-type statistic from denominator growth."""

    tau_hat: float
    samples: list[tuple[int, int, float]] = field(default_factory=list)
    q_max: int = 0


def estimate_type(alpha: IrrationalSpec, q_max: int) -> TypeEstimate:
    """Estimate the irrationality type from convergent denominator growth.

    Records log q_{i+1} / log q_i for consecutive denominators up to q_max.
    Since ||q_i alpha|| is comparable to 1/q_{i+1}, the limsup of these
    ratios is the type; the estimate takes the max over the pairs whose
    larger denominator falls in the top decade below q_max (small
    denominators would otherwise dominate with ratios like log3/log2).
    """
    if q_max < 10:
        raise ValueError("q_max must be >= 10")
    samples: list[tuple[int, int, float]] = []
    prev_q = None
    for c in _convergent_iter(alpha):
        if c.q > q_max:
            break
        if prev_q is not None and prev_q >= 2:
            samples.append((prev_q, c.q, math.log(c.q) / math.log(prev_q)))
        prev_q = c.q
    if not samples:
        return TypeEstimate(1.0, [], q_max)
    tail = [r for (qi, qn, r) in samples if qn > q_max // 10]
    if not tail:
        tail = [samples[-1][2]]
    return TypeEstimate(max(1.0, max(tail)), samples, q_max)
