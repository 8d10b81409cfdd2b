"""Trapezoid smoothing of the periodic step indicator 1_(0 < {x} <= gamma).

The smoothed function is the step indicator circularly convolved with a
uniform kernel of half-width Delta: linear ramps of width 2*Delta centered
at the jumps 0 and gamma, exact agreement with the step away from them.
Its Fourier coefficients have the closed form

    c_j = e(-j*gamma/2) * sin(pi*j*gamma)/(pi*j) * sin(2*pi*j*Delta)/(2*pi*j*Delta)

with c_0 = gamma, c_{-j} = conj(c_j), and
|c_j| <= min(1/(pi*j), 1/(2*pi^2*j^2*Delta)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .beatty import BeattyParams, beatty_term, is_member
from .errors import InvalidDelta
from .fixed import FixedReal, frac_vector
from .kfree import DEFAULT_MEMORY_BYTES, sieve_kfree

_BORDER_TOL = 2.0**-40


@dataclass(frozen=True)
class StepIndicator:
    """1 on 0 < {x} <= gamma, 0 on gamma < {x} <= 1, 1-periodic."""

    gamma: FixedReal

    def __call__(self, x: float) -> float:
        f = x % 1.0
        return 1.0 if 0.0 < f <= self.gamma.to_float() else 0.0


@dataclass(frozen=True)
class SmoothedIndicator:
    gamma: FixedReal
    delta_param: float
    J: int
    coeffs: np.ndarray  # complex c_j for j = 0..J

    def tail_bound(self) -> float:
        """Bound on the series remainder beyond J: sum_{|j|>J} |c_j|."""
        if self.J < 1:
            return math.inf
        return 1.0 / (math.pi**2 * self.J * self.delta_param)


def _as_fixed_gamma(gamma) -> FixedReal:
    if isinstance(gamma, FixedReal):
        return gamma
    return FixedReal.from_fraction(Fraction(gamma), 128)


def default_delta(x: int, k: int, multiplier: float = 1.0) -> float:
    """Smoothing width x**(-(k-1)/(2k-1)) scaled by a configurable multiplier."""
    return multiplier * float(x) ** (-(k - 1) / (2.0 * k - 1.0))


def default_truncation(delta: float, tail_target: float = 0.01) -> int:
    """Smallest J with series tail bound 1/(pi^2*J*Delta) <= tail_target."""
    return max(1, math.ceil(1.0 / (math.pi**2 * delta * tail_target)))


def series_truncation_for_x(x: int, k: int, eps: float = 0.05) -> int:
    """Aggressive truncation point x**((4k-4)/(2k-1) + eps) (experiment option)."""
    return max(1, math.ceil(float(x) ** ((4.0 * k - 4.0) / (2.0 * k - 1.0) + eps)))


def build_smoothed(gamma, delta_param: float, J: int) -> SmoothedIndicator:
    """Closed-form Fourier coefficients of the trapezoid for |j| <= J."""
    g = _as_fixed_gamma(gamma)
    gf = g.to_float()
    if not 0.0 < gf < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    if not (0.0 < delta_param < 0.125 and delta_param <= min(gf, 1.0 - gf) / 2.0):
        raise InvalidDelta(
            f"need 0 < Delta < 1/8 and Delta <= min(gamma, 1-gamma)/2, "
            f"got Delta={delta_param}, gamma={gf}"
        )
    if J < 0:
        raise ValueError("J must be >= 0")
    coeffs = np.zeros(J + 1, dtype=np.complex128)
    coeffs[0] = gf
    if J >= 1:
        j = np.arange(1, J + 1, dtype=np.uint64)
        # j*gamma mod 2, reduced exactly from the mantissa of gamma
        u = 2.0 * frac_vector(g.mantissa, g.scale_bits + 1, j)
        near = np.rint(u)
        s = u - near
        sign = 1.0 - 2.0 * (near.astype(np.int64) & 1)
        sin_g = sign * np.sin(math.pi * s)
        cos_g = sign * np.cos(math.pi * s)
        jf = j.astype(np.float64)
        kern_arg = 2.0 * math.pi * np.mod(jf * delta_param, 1.0)
        kernel = np.sin(kern_arg) / (2.0 * math.pi * jf * delta_param)
        mag = sin_g / (math.pi * jf) * kernel
        coeffs[1:] = (cos_g - 1j * sin_g) * mag
    return SmoothedIndicator(g, delta_param, J, coeffs)


def coefficient_bound(j: int, delta: float) -> float:
    return min(1.0 / (math.pi * j), 1.0 / (2.0 * math.pi**2 * j * j * delta))


def eval_smoothed(s: SmoothedIndicator, x: float) -> float:
    """Exact piecewise-linear value of the trapezoid at x (1-periodic)."""
    f = x % 1.0
    g = s.gamma.to_float()
    d = s.delta_param
    if f < d:
        return (f + d) / (2.0 * d)
    if f <= g - d:
        return 1.0
    if f < g + d:
        return (g + d - f) / (2.0 * d)
    if f <= 1.0 - d:
        return 0.0
    # rising ramp through the wrap at 1: value ((f - 1) + d)/(2d)
    return (f - 1.0 + d) / (2.0 * d)


def eval_truncated_series(s: SmoothedIndicator, x: float) -> float:
    """Partial Fourier sum to |j| <= J; differs from the exact trapezoid by
    at most the tail bound 1/(pi^2 * J * Delta)."""
    J = len(s.coeffs) - 1
    if J == 0:
        return float(s.coeffs[0].real)
    j = np.arange(1, J + 1, dtype=np.float64)
    ang = 2.0 * math.pi * np.mod(j * (x % 1.0), 1.0)
    c = s.coeffs[1:]
    return float(s.coeffs[0].real + 2.0 * np.sum(c.real * np.cos(ang) - c.imag * np.sin(ang)))


def _psi_values(f: np.ndarray, gf: float, d: float) -> np.ndarray:
    """Vectorized trapezoid values on fractional parts f in [0, 1)."""
    psi = np.zeros_like(f)
    ramp0 = f < d
    psi[ramp0] = (f[ramp0] + d) / (2.0 * d)
    plateau = (f >= d) & (f <= gf - d)
    psi[plateau] = 1.0
    rampg = (f > gf - d) & (f < gf + d)
    psi[rampg] = (gf + d - f[rampg]) / (2.0 * d)
    wrap = f > 1.0 - d
    psi[wrap] = (f[wrap] - 1.0 + d) / (2.0 * d)
    return psi


def _in_exceptional(f: np.ndarray, gf: float, d: float) -> np.ndarray:
    return (f < d) | ((f > gf - d) & (f < gf + d)) | (f > 1.0 - d)


def exceptional_count(p: BeattyParams, M: int, delta: float, block: int = 1 << 20) -> int:
    """Number of m <= M with {gamma*m + delta} in the Delta-neighborhoods of
    the jumps: [0, Delta) union (gamma-Delta, gamma+Delta) union (1-Delta, 1)."""
    lv = p.level(p.precision_bits)
    gf = lv.gamma.to_float()
    total = 0
    m0 = 1
    while m0 <= M:
        m1 = min(M, m0 + block - 1)
        m = np.arange(m0, m1 + 1, dtype=np.uint64)
        f = frac_vector(lv.gamma.mantissa, lv.bits, m, offset_mantissa=lv.delta.mantissa)
        total += int(np.count_nonzero(_in_exceptional(f, gf, delta)))
        m0 = m1 + 1
    return total


def smoothed_beatty_count(
    p: BeattyParams,
    k: int,
    x: int,
    delta_param: float | None = None,
    J: int | None = None,
    memory_bytes: int = DEFAULT_MEMORY_BYTES,
    block: int = 1 << 20,
) -> tuple[float, int, int]:
    """(smoothed, exact, exceptional) sums over k-free m <= floor(alpha*x+beta).

    smoothed sums the trapezoid at {gamma*m + delta}; exact sums the step
    indicator (equivalently, counts Beatty members among k-free m); the
    exceptional count V covers all m <= M whose fractional part falls in
    the ramp regions. |smoothed - exact| <= V holds by construction and is
    asserted per run.
    """
    if x < 1:
        raise ValueError("x must be >= 1")
    M = beatty_term(p, x)
    if delta_param is None:
        delta_param = default_delta(x, k)
    lv = p.level(p.precision_bits)
    gf = lv.gamma.to_float()
    delta_param = min(delta_param, min(gf, 1.0 - gf) / 2.0, 0.124)
    if J is None:
        J = default_truncation(delta_param)

    smoothed = 0.0
    exact = 0
    exceptional = 0
    m0 = 1
    while m0 <= M:
        m1 = min(M, m0 + block - 1)
        m = np.arange(m0, m1 + 1, dtype=np.uint64)
        f = frac_vector(lv.gamma.mantissa, lv.bits, m, offset_mantissa=lv.delta.mantissa)
        kf = sieve_kfree(k, m0, m1, memory_bytes).flags
        exceptional += int(np.count_nonzero(_in_exceptional(f, gf, delta_param)))

        step = (f > 0.0) & (f <= gf)
        border = np.nonzero(
            (f < _BORDER_TOL) | (f > 1.0 - _BORDER_TOL) | (np.abs(f - gf) < _BORDER_TOL)
        )[0]
        for i in border:
            step[i] = is_member(p, m0 + int(i))

        psi = _psi_values(f, gf, delta_param)
        smoothed += float(np.sum(psi[kf]))
        exact += int(np.count_nonzero(step & kf))
        m0 = m1 + 1

    if abs(smoothed - exact) > exceptional + 1e-6:
        raise AssertionError(
            f"smoothing error {abs(smoothed - exact)} exceeds exceptional count "
            f"{exceptional}"
        )
    return smoothed, exact, exceptional
