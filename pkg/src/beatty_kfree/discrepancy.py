"""Exact extreme discrepancy of finite point sets {alpha*m + beta} in [0,1).

The supremum over open subintervals (c, d) of [0,1) of
|count/M - (d - c)| is attained in the limit at endpoints drawn from the
sample values (approached from either side) or the boundary points 0 and 1.
Both the O(M log M) scan and the O(M^2) brute-force oracle evaluate scores
through the same per-value arrays, so they agree bit for bit; the oracle
enumerating every endpoint-pair/side combination is the reference
semantics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .beatty import parse_beta
from .cfrac import IrrationalSpec, to_fixed
from .fixed import DEFAULT_BITS, FixedReal, frac_vector


@dataclass(frozen=True)
class PointSet:
    points: np.ndarray
    M: int
    sorted_points: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.M != len(self.points) or self.M < 1:
            raise ValueError("M must equal the number of points and be >= 1")
        if self.sorted_points is None:
            object.__setattr__(self, "sorted_points", np.sort(self.points))


@dataclass(frozen=True)
class DiscrepancyResult:
    extreme: float
    star: float
    witness_interval: tuple[float, float]


def build_pointset(alpha: IrrationalSpec, beta, M: int,
                   precision_bits: int = DEFAULT_BITS) -> PointSet:
    """Fractional parts {alpha*m + beta} for m = 1..M at working precision."""
    if M < 1:
        raise ValueError("M must be >= 1")
    a = to_fixed(alpha, precision_bits)
    b = FixedReal.from_fraction(parse_beta(beta) if isinstance(beta, str) else beta,
                                precision_bits)
    m = np.arange(1, M + 1, dtype=np.uint64)
    pts = frac_vector(a.mantissa, precision_bits, m, offset_mantissa=b.mantissa)
    return PointSet(pts, M)


def _endpoint_arrays(sorted_points: np.ndarray, M: int):
    """Candidate endpoint values (samples plus 0 and 1) and score arrays.

    For an endpoint value u with lower/upper ranks lr/ur (# points < u,
    # points <= u), the four score families decompose as F[t] - G[s]:
      surplus, both endpoints inclusive:  (ur_t/M - u_t) - (lr_s/M - u_s)
      deficit, both endpoints exclusive:  (u_t - lr_t/M) - (u_s - ur_s/M)
    Inclusive sides are invalid at the domain boundary (no room to approach
    0 from below or 1 from above); those entries are masked with infinities.
    """
    u = np.unique(np.concatenate((np.array([0.0, 1.0]), sorted_points)))
    lr = np.searchsorted(sorted_points, u, side="left").astype(np.float64)
    ur = np.searchsorted(sorted_points, u, side="right").astype(np.float64)
    plus_f = ur / M - u
    plus_g = lr / M - u
    plus_f[u >= 1.0] = -np.inf
    plus_g[u <= 0.0] = np.inf
    minus_f = u - lr / M
    minus_g = u - ur / M
    return u, lr, ur, plus_f, plus_g, minus_f, minus_g


def extreme_discrepancy(ps: PointSet) -> DiscrepancyResult:
    """Exact sup over open subintervals, O(M log M) after sorting."""
    u, _, _, pf, pg, mf, mg = _endpoint_arrays(ps.sorted_points, ps.M)
    # surplus: short interval swallowing many points; s <= t
    run_g = np.minimum.accumulate(pg)
    plus_scores = pf - run_g
    t_plus = int(np.argmax(plus_scores))
    plus = float(plus_scores[t_plus])
    # deficit: long interval with few interior points; s < t strictly
    run_mg = np.minimum.accumulate(mg)
    minus_scores = mf[1:] - run_mg[:-1]
    t_minus = int(np.argmax(minus_scores)) + 1
    minus = float(minus_scores[t_minus - 1])
    if plus >= minus:
        s_idx = int(np.argmin(pg[: t_plus + 1]))
        extreme, witness = plus, (float(u[s_idx]), float(u[t_plus]))
    else:
        s_idx = int(np.argmin(mg[:t_minus]))
        extreme, witness = minus, (float(u[s_idx]), float(u[t_minus]))
    return DiscrepancyResult(extreme, star_discrepancy(ps), witness)


def extreme_discrepancy_oracle(points: np.ndarray) -> float:
    """Brute force over every endpoint pair and side combination, O(M^2).

    Enumerates all (s, t) value pairs for both score directions and all
    four inclusion combinations (mixed combinations are dominated but
    evaluated anyway); this is the reference the fast scan must match
    exactly.
    """
    sorted_points = np.sort(np.asarray(points, dtype=np.float64))
    M = len(sorted_points)
    u, lr, ur, pf, pg, mf, mg = _endpoint_arrays(sorted_points, M)
    n = len(u)
    tri = np.tril(np.ones((n, n), dtype=bool))          # s <= t
    tri_strict = np.tril(np.ones((n, n), dtype=bool), -1)  # s < t
    best = 0.0
    # surplus direction: count = R_t - L_s with R in {ur, lr}, L in {lr, ur}
    plus_f_excl = lr / M - u  # d-side exact (points equal to d excluded)
    plus_g_excl = ur / M - u  # c-side exact (points equal to c excluded)
    for F, G, mask in (
        (pf, pg, tri),                 # inclusive/inclusive
        (pf, plus_g_excl, tri),        # d inclusive, c exact
        (plus_f_excl, pg, tri),        # d exact, c inclusive
        (plus_f_excl, plus_g_excl, tri_strict),  # both exact: empty at s == t
    ):
        scores = F[:, None] - G[None, :]
        best = max(best, float(np.max(np.where(mask, scores, -np.inf))))
    # deficit direction: interior count = L_t - R_s with L in {lr, ur}, R in {ur, lr}
    minus_f_incl = u - ur / M
    minus_f_incl[u >= 1.0] = -np.inf
    minus_g_incl = u - lr / M
    minus_g_incl[u <= 0.0] = np.inf
    for F, G, mask in (
        (mf, mg, tri_strict),            # both exact
        (mf, minus_g_incl, tri_strict),  # c inclusive
        (minus_f_incl, mg, tri_strict),  # d inclusive
        (minus_f_incl, minus_g_incl, tri_strict),
    ):
        scores = F[:, None] - G[None, :]
        best = max(best, float(np.max(np.where(mask, scores, -np.inf))))
    return best


def star_discrepancy(ps: PointSet) -> float:
    """max_i max(i/M - x_(i), x_(i) - (i-1)/M) over the sorted points."""
    M = ps.M
    i = np.arange(1, M + 1, dtype=np.float64)
    xs = ps.sorted_points
    return float(np.max(np.maximum(i / M - xs, xs - (i - 1) / M)))


def decay_fit(
    alpha: IrrationalSpec,
    beta,
    M_grid: list[int],
    precision_bits: int = DEFAULT_BITS,
) -> tuple[float, list[tuple[int, float, float]]]:
    """OLS slope of log D(M) against log M over a grid of prefix sizes."""
    if len(M_grid) < 2:
        raise ValueError("need at least two grid points")
    top = max(M_grid)
    full = build_pointset(alpha, beta, top, precision_bits)
    per_M: list[tuple[int, float, float]] = []
    for M in sorted(M_grid):
        ps = PointSet(full.points[:M], M)
        res = extreme_discrepancy(ps)
        per_M.append((M, res.extreme, res.star))
    logm = np.log([row[0] for row in per_M])
    logd = np.log([row[1] for row in per_M])
    slope = float(np.polyfit(logm, logd, 1)[0])
    return slope, per_M
