"""Command-line driver wiring the modules into reproducible experiments.

Subcommands: count | fit-exponent | expsum-sweep | discrepancy |
smoothing-check | selftest. Every CSV row echoes the parameters needed to
reproduce it; identical config + seed + threads give byte-identical output.
Exit codes: 0 success, 1 check failure, 2 usage error, 3 budget/precision
exhaustion.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
import time
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import beatty, cfrac, discrepancy, expsums, kfree, smoothing
from .errors import DegenerateFit, MemoryBudgetExceeded, PrecisionExhausted
from .fixed import FixedReal

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


def parse_grid(spec: str) -> list[int]:
    """Geometric integer grid from 'start:stop:ratio' (empty when start > stop)."""
    try:
        start_s, stop_s, ratio_s = spec.split(":")
        start, stop, ratio = float(start_s), float(stop_s), float(ratio_s)
    except ValueError as e:
        raise ValueError(f"bad grid spec {spec!r}; expected start:stop:ratio") from e
    if ratio <= 1.0:
        raise ValueError("grid ratio must exceed 1")
    out: list[int] = []
    v = start
    while v <= stop * (1.0 + 1e-12):
        n = round(v)
        if not out or n > out[-1]:
            out.append(int(n))
        v *= ratio
    return out


def fit_loglog(xs, errors) -> tuple[float, float, bool]:
    """OLS slope/intercept of log|error| vs log x on the nonzero errors.

    Raises DegenerateFit when no nonzero errors remain; flags (third value)
    when at least half of the errors were zero and the fit used a subset.
    """
    xs = np.asarray(xs, dtype=np.float64)
    errs = np.abs(np.asarray(errors, dtype=np.float64))
    nz = errs > 0
    if not np.any(nz):
        raise DegenerateFit("all errors are zero")
    degenerate = np.count_nonzero(~nz) * 2 >= len(errs)
    slope, intercept = np.polyfit(np.log(xs[nz]), np.log(errs[nz]), 1)
    return float(slope), float(intercept), bool(degenerate)


@contextmanager
def _open_out(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as f:
            yield f


def _writer(stream) -> csv.writer:
    return csv.writer(stream, lineterminator="\n")


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", default="quad:1,5,2", help="quad:p,d,q | cf:a0,a1,... | dec:digits:bits")
    p.add_argument("--beta", default="0", help="exact rational, e.g. 0, 1/2, -0.7")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--grid", default="1000:100000:10", help="geometric grid start:stop:ratio")
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--delta-multiplier", type=float, default=1.0)
    p.add_argument("--threads", type=int, default=1, help="deterministic reduction chunk count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--precision-bits", type=int, default=192)
    p.add_argument("--memory-budget", type=int, default=256, help="MiB for sieve windows")
    p.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p.add_argument("--timings", action="store_true", help="fill the wall_ms column (breaks byte reproducibility)")
    p.add_argument("--config", default=None, help="key=value file; flags override file values")


@dataclass
class ExperimentConfig:
    alpha: str
    beta: str
    k: int
    grid: str
    eps: float
    delta_multiplier: float
    threads: int
    seed: int
    precision_bits: int
    memory_bytes: int
    out: str | None
    timings: bool

    @classmethod
    def from_args(cls, args) -> "ExperimentConfig":
        if args.k < 2:
            raise ValueError("k must be >= 2")
        if args.eps <= 0:
            raise ValueError("eps must be positive")
        return cls(
            alpha=args.alpha,
            beta=args.beta,
            k=args.k,
            grid=args.grid,
            eps=args.eps,
            delta_multiplier=args.delta_multiplier,
            threads=max(1, args.threads),
            seed=args.seed,
            precision_bits=args.precision_bits,
            memory_bytes=args.memory_budget << 20,
            out=args.out,
            timings=args.timings,
        )


def _count_rows(cfg: ExperimentConfig):
    spec = cfrac.parse_irrational(cfg.alpha)
    params = beatty.BeattyParams(spec, beatty.parse_beta(cfg.beta), cfg.precision_bits)
    tau = cfrac.estimate_type(spec, 10**6).tau_hat
    exp_bound = max(cfg.k / (2.0 * cfg.k - 1.0), 1.0 - 1.0 / (tau + 1.0))
    rows = []
    for x in parse_grid(cfg.grid):
        t0 = time.perf_counter()
        count, main, err = beatty.count_kfree_beatty(params, x, cfg.k, cfg.memory_bytes)
        bound = x ** (cfg.k / (2.0 * cfg.k - 1.0) + cfg.eps) + x ** (1.0 - 1.0 / (tau + 1.0) + cfg.eps)
        wall = f"{(time.perf_counter() - t0) * 1e3:.1f}" if cfg.timings else ""
        rows.append(
            [
                "count", cfg.alpha, cfg.beta, cfg.k, _fmt(cfg.eps), cfg.precision_bits,
                cfg.threads, cfg.seed, _fmt(tau), x, count, _fmt(main), _fmt(err),
                _fmt(bound), _fmt(abs(err) / bound), wall,
            ]
        )
    return rows, tau, exp_bound


_COUNT_HEADER = [
    "experiment", "alpha", "beta", "k", "eps", "precision_bits", "threads",
    "seed", "tau_hat", "x", "count", "main_term", "error", "bound", "ratio",
    "wall_ms",
]


def cmd_count(args) -> int:
    cfg = ExperimentConfig.from_args(args)
    rows, _, _ = _count_rows(cfg)
    with _open_out(cfg.out) as f:
        w = _writer(f)
        w.writerow(_COUNT_HEADER)
        w.writerows(rows)
    return EXIT_OK


def cmd_fit_exponent(args) -> int:
    cfg = ExperimentConfig.from_args(args)
    grid = parse_grid(cfg.grid)
    if len(grid) < 4:
        raise ValueError("fit-exponent needs at least 4 grid points")
    rows, tau, exp_bound = _count_rows(cfg)
    xs = [row[9] for row in rows]
    errs = [float(row[12]) for row in rows]
    slope, intercept, degenerate = fit_loglog(xs, errs)
    threshold = exp_bound + 0.1
    ok = slope <= threshold
    with _open_out(cfg.out) as f:
        w = _writer(f)
        w.writerow(_COUNT_HEADER)
        w.writerows(rows)
    print(
        f"fit-exponent slope={slope!r} intercept={intercept!r} "
        f"threshold={threshold!r} tau_hat={tau!r} "
        f"degenerate={degenerate} {'PASS' if ok else 'FAIL'}",
        file=sys.stderr,
    )
    return EXIT_OK if ok else EXIT_CHECK


_SWEEP_HEADER = [
    "experiment", "k", "eps", "precision_bits", "threads", "seed", "trial",
    "kind", "x", "H", "a", "q", "lhs", "rhs", "ratio", "hyperbola_gap",
    "wall_ms",
]


def _sweep_theta(rng: np.random.Generator, trial: int, x: int, bits: int):
    pool = [cfrac.SQRT2, cfrac.PHI, cfrac.SQRT3, cfrac.QuadraticIrrational(7, 2, 3)]
    if trial % 2 == 0:
        q = int(rng.integers(1, x + 1))
        a = 1
        if q > 1:
            a = int(rng.integers(1, q))
            while math.gcd(a, q) != 1:
                a = int(rng.integers(1, q))
        eta = Fraction(int(rng.integers(-(1 << 30) + 1, 1 << 30)), 1 << 30)
        theta = FixedReal.from_fraction(Fraction(a, q) + eta / (q * q), bits)
        return expsums.ThetaApprox(theta, a, q), "random"
    alpha = pool[(trial // 2) % len(pool)]
    w = int(rng.integers(1, 64))
    theta = cfrac.to_fixed(alpha, bits).mul_int(w)
    a, q = cfrac.dirichlet_approx(theta, x)
    return expsums.ThetaApprox(theta, a, q), "convergent"


def cmd_expsum_sweep(args) -> int:
    cfg = ExperimentConfig.from_args(args)
    trials = args.trials
    x_max = args.x_max
    h_max = args.h_max
    rng = np.random.default_rng(cfg.seed)
    rows = []
    max_ratio = 0.0
    worst_gap = 0.0
    for trial in range(trials):
        x = int(rng.integers(200, x_max + 1))
        h = int(rng.integers(1, h_max + 1))
        t0 = time.perf_counter()
        theta, kind = _sweep_theta(rng, trial, x, cfg.precision_bits)
        rep = expsums.double_sum_bound_check(
            theta, h, x, cfg.k, cfg.eps, memory_bytes=cfg.memory_bytes
        )
        gap = rep.params.get("hyperbola_gap", 0.0)
        max_ratio = max(max_ratio, rep.ratio)
        worst_gap = max(worst_gap, gap)
        wall = f"{(time.perf_counter() - t0) * 1e3:.1f}" if cfg.timings else ""
        rows.append(
            [
                "expsum", cfg.k, _fmt(cfg.eps), cfg.precision_bits, cfg.threads,
                cfg.seed, trial, kind, x, h, theta.a, theta.q, _fmt(rep.lhs),
                _fmt(rep.rhs_value), _fmt(rep.ratio), _fmt(gap), wall,
            ]
        )
    with _open_out(cfg.out) as f:
        w = _writer(f)
        w.writerow(_SWEEP_HEADER)
        w.writerows(rows)
    ok = math.isfinite(max_ratio) and worst_gap <= 1e-6
    print(
        f"expsum-sweep trials={trials} max_ratio={max_ratio!r} "
        f"worst_hyperbola_gap={worst_gap!r} {'PASS' if ok else 'FAIL'}",
        file=sys.stderr,
    )
    return EXIT_OK if ok else EXIT_CHECK


_DISC_HEADER = [
    "experiment", "alpha", "beta", "precision_bits", "seed", "tau_hat", "M",
    "extreme", "star", "bound", "wall_ms",
]


def cmd_discrepancy(args) -> int:
    cfg = ExperimentConfig.from_args(args)
    spec = cfrac.parse_irrational(cfg.alpha)
    beta = beatty.parse_beta(cfg.beta)
    grid = parse_grid(cfg.grid)
    if not grid:
        with _open_out(cfg.out) as f:
            _writer(f).writerow(_DISC_HEADER)
        return EXIT_OK
    tau = cfrac.estimate_type(spec, 10**6).tau_hat
    slope, per_M = discrepancy.decay_fit(spec, beta, grid, cfg.precision_bits) if len(grid) >= 2 else (math.nan, None)
    if per_M is None:
        ps = discrepancy.build_pointset(spec, beta, grid[0], cfg.precision_bits)
        res = discrepancy.extreme_discrepancy(ps)
        per_M = [(grid[0], res.extreme, res.star)]
    rows = []
    for M, extreme, star in per_M:
        rows.append(
            [
                "discrepancy", cfg.alpha, cfg.beta, cfg.precision_bits, cfg.seed,
                _fmt(tau), M, _fmt(extreme), _fmt(star), _fmt(M ** (-1.0 / tau)), "",
            ]
        )
    with _open_out(cfg.out) as f:
        w = _writer(f)
        w.writerow(_DISC_HEADER)
        w.writerows(rows)
    threshold = -1.0 / tau + 0.15
    ok = math.isnan(slope) or slope <= threshold
    print(
        f"discrepancy slope={slope!r} threshold={threshold!r} tau_hat={tau!r} "
        f"{'PASS' if ok else 'FAIL'}",
        file=sys.stderr,
    )
    return EXIT_OK if ok else EXIT_CHECK


_SMOOTH_HEADER = [
    "experiment", "alpha", "beta", "k", "x", "delta", "J", "check", "value",
    "bound", "status",
]


def _simpson_coefficient(gamma_f: float, delta: float, js: np.ndarray,
                         panels: int = 1 << 14) -> np.ndarray:
    """Quadrature oracle: integral of the trapezoid against e(-j x) per j.

    Composite Simpson on each smooth piece between the ramp breakpoints.
    """
    breaks = np.unique(
        np.clip([0.0, delta, gamma_f - delta, gamma_f + delta, 1.0 - delta, 1.0], 0.0, 1.0)
    )
    total = np.zeros(len(js), dtype=np.complex128)
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b - a < 1e-15:
            continue
        xs = np.linspace(a, b, 2 * panels + 1)
        h = (b - a) / (2 * panels)
        fx = _trapezoid_values(xs, gamma_f, delta)
        weights = np.ones_like(xs)
        weights[1:-1:2] = 4.0
        weights[2:-1:2] = 2.0
        phase = np.exp(-2j * math.pi * np.outer(js, xs))
        total += (h / 3.0) * (phase @ (weights * fx))
    return total


def _trapezoid_values(xs: np.ndarray, gamma_f: float, delta: float) -> np.ndarray:
    return smoothing._psi_values(np.mod(xs, 1.0), gamma_f, delta)


def cmd_smoothing_check(args) -> int:
    cfg = ExperimentConfig.from_args(args)
    spec = cfrac.parse_irrational(cfg.alpha)
    params = beatty.BeattyParams(spec, beatty.parse_beta(cfg.beta), cfg.precision_bits)
    x = args.x
    delta = smoothing.default_delta(x, cfg.k, cfg.delta_multiplier)
    gf = params.gamma.to_float()
    delta = min(delta, min(gf, 1.0 - gf) / 2.0, 0.124)
    J = args.J or smoothing.default_truncation(delta)
    ind = smoothing.build_smoothed(params.gamma, delta, J)

    checks: list[tuple[str, float, float, bool]] = []
    jq = np.arange(1, min(J, 48) + 1)
    quad = _simpson_coefficient(gf, delta, jq)
    gap = float(np.max(np.abs(ind.coeffs[1 : len(jq) + 1] - quad)))
    checks.append(("coefficient_quadrature", gap, 1e-8, gap <= 1e-8))

    j = np.arange(1, J + 1, dtype=np.float64)
    bound = np.minimum(1.0 / (math.pi * j), 1.0 / (2.0 * math.pi**2 * j * j * delta))
    excess = float(np.max(np.abs(ind.coeffs[1:]) - bound))
    checks.append(("coefficient_bound", excess, 0.0, excess <= 1e-15))

    grid = (np.arange(2000) + 0.5) / 2000.0
    series_err = max(
        abs(smoothing.eval_truncated_series(ind, float(t)) - smoothing.eval_smoothed(ind, float(t)))
        for t in grid[:: max(1, len(grid) // 400)]
    )
    tb = ind.tail_bound()
    checks.append(("series_tail", float(series_err), tb, series_err <= tb))

    smoothed, exact, exceptional = smoothing.smoothed_beatty_count(
        params, cfg.k, x, delta, J, cfg.memory_bytes
    )
    checks.append(
        ("smoothing_error_vs_exceptional", abs(smoothed - exact), float(exceptional),
         abs(smoothed - exact) <= exceptional + 1e-6)
    )
    count = beatty.count_kfree_beatty(params, x, cfg.k, cfg.memory_bytes)[0]
    checks.append(("exact_vs_direct_count", float(abs(exact - count)), 1.0,
                   abs(exact - count) <= 1))

    rows = [
        ["smoothing", cfg.alpha, cfg.beta, cfg.k, x, _fmt(delta), J, name,
         _fmt(value), _fmt(bound), "PASS" if ok else "FAIL"]
        for name, value, bound, ok in checks
    ]
    with _open_out(cfg.out) as f:
        w = _writer(f)
        w.writerow(_SMOOTH_HEADER)
        w.writerows(rows)
    all_ok = all(ok for *_, ok in checks)
    print(f"smoothing-check {'PASS' if all_ok else 'FAIL'}", file=sys.stderr)
    return EXIT_OK if all_ok else EXIT_CHECK


def _selftest_checks(seed: int, bits: int):
    rng = np.random.default_rng(seed)

    def mobius_identity():
        for k in (2, 3):
            ind = kfree.kfree_indicator_moebius_range(20000, k)[1:]
            flags = kfree.sieve_kfree(k, 1, 20000).flags.astype(np.int64)
            if not np.array_equal(ind, flags):
                return False
        return True

    def hyperbola_identity():
        for _ in range(10):
            x = int(rng.integers(50, 500))
            h = int(rng.integers(1, 10))
            k = int(rng.integers(2, 4))
            theta = FixedReal.from_fraction(
                Fraction(int(rng.integers(1, 1 << 30)), 1 << 30), bits
            )
            y = float(rng.uniform(1.0, x))
            naive = expsums.double_kfree_sum_naive(theta, h, x, k)
            split = expsums.double_kfree_sum_hyperbola(theta, h, x, k, y)
            if abs(split.combined() - naive.value()) > 1e-6:
                return False
        return True

    def membership_criterion():
        for spec, b in ((cfrac.PHI, Fraction(0)), (cfrac.SQRT2, Fraction(1, 2))):
            p = beatty.BeattyParams(spec, b, bits)
            top = 20000
            flags = beatty.member_flags_block(p, 1, top)
            enum = np.zeros(top + 1, dtype=bool)
            n = 1
            while True:
                t = beatty.beatty_term(p, n)
                if t > top:
                    break
                if t >= 1:
                    enum[t] = True
                n += 1
            if not np.array_equal(flags, enum[1:]):
                return False
        return True

    def smoothing_coefficients():
        p = beatty.BeattyParams(cfrac.PHI, 0, bits)
        delta = 1.0 / 32.0
        ind = smoothing.build_smoothed(p.gamma, delta, 32)
        js = np.arange(1, 33)
        quad = _simpson_coefficient(p.gamma.to_float(), delta, js)
        return float(np.max(np.abs(ind.coeffs[1:] - quad))) <= 1e-8

    def discrepancy_oracle():
        for trial in range(5):
            m = int(rng.integers(5, 300))
            pts = rng.random(m)
            if trial == 0:
                pts = (2.0 * np.arange(1, m + 1) - 1.0) / (2.0 * m)
            ps = discrepancy.PointSet(pts, m)
            fast = discrepancy.extreme_discrepancy(ps).extreme
            oracle = discrepancy.extreme_discrepancy_oracle(pts)
            if fast != oracle:
                return False
        return True

    def counting_sanity():
        by_moebius = kfree.count_kfree(10**6, 2, "moebius")[0]
        by_sieve = kfree.count_kfree(10**6, 2, "sieve")[0]
        return by_moebius == by_sieve == 607926

    return [
        ("mobius_identity", mobius_identity),
        ("hyperbola_identity", hyperbola_identity),
        ("membership_criterion", membership_criterion),
        ("smoothing_coefficients", smoothing_coefficients),
        ("discrepancy_oracle", discrepancy_oracle),
        ("counting_sanity", counting_sanity),
    ]


def cmd_selftest(args) -> int:
    cfg = ExperimentConfig.from_args(args)
    first_failure = None
    for name, check in _selftest_checks(cfg.seed, cfg.precision_bits):
        try:
            ok = check()
        except Exception as e:  # a crash is a failure, not an abort
            ok = False
            print(f"ERROR {name}: {e}", file=sys.stderr)
        print(f"{'PASS' if ok else 'FAIL'} {name}")
        if not ok and first_failure is None:
            first_failure = name
    if first_failure is not None:
        print(f"selftest failed: {first_failure}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beatty-kfree",
        description="k-free counting along Beatty sequences: experiments and checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", help="k-free Beatty counts against x/zeta(k)")
    _common_flags(p)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("fit-exponent", help="OLS exponent of the count error")
    _common_flags(p)
    p.set_defaults(func=cmd_fit_exponent)

    p = sub.add_parser("expsum-sweep", help="double-sum bound ratios over seeded trials")
    _common_flags(p)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--x-max", type=int, default=100000)
    p.add_argument("--h-max", type=int, default=30)
    p.set_defaults(func=cmd_expsum_sweep)

    p = sub.add_parser("discrepancy", help="extreme/star discrepancy decay")
    _common_flags(p)
    p.set_defaults(func=cmd_discrepancy)

    p = sub.add_parser("smoothing-check", help="smoothed-indicator verification")
    _common_flags(p)
    p.add_argument("--x", type=int, default=10000)
    p.add_argument("--J", type=int, default=None)
    p.set_defaults(func=cmd_smoothing_check)

    p = sub.add_parser("selftest", help="run the cross-module oracle suite")
    _common_flags(p)
    p.set_defaults(func=cmd_selftest)

    return parser


def _splice_config(argv: list[str]) -> list[str]:
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    path = argv[i + 1]
    injected: list[str] = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            injected.extend([f"--{key.strip().replace('_', '-')}", value.strip()])
    # file values go right after the subcommand so explicit flags win
    return argv[:1] + injected + argv[1:]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and not argv[0].startswith("-"):
        argv = _splice_config(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (PrecisionExhausted, MemoryBudgetExceeded) as e:
        print(f"budget/precision exhausted: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (ValueError, DegenerateFit, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
