"""Named verification checks shared by the CLI and the acceptance suite.

Each check is a self-contained pass/fail probe of one advertised property:
exact combinatorial identities, independent-route agreement on constants,
inequality sweeps, convergence trends of the asymptotic expansions, and
bit-level determinism of the streaming engine.  The CLI `verify` command and
the test suite both dispatch through `run_check`, so a property can never
pass in one harness and silently rot in the other.

Heavy intermediates (factor tables, checkpoint reports) are memoized on a
`CheckContext`, letting related checks share one sieve pass.  Checks that
sweep a range accept an optional grid override; with no override every check
runs at its registered acceptance scale.
"""

from __future__ import annotations

import math
import os
import tempfile
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import constants, primesums, series
from .errors import GridError, UnknownCheckError
from .multfunc import builtin
from .primesums import CheckpointGrid, sums_stream
from .sieve import SpfTable, spf_build

ACCEPTANCE_MODELS = ("kappa", "two_omega", "euler_phi", "sigma",
                     "divisor_d", "jordan_2")

# Checkpoints shared by the convergence-trend checks: the last three drive
# the stabilization probes, the first supplies the "improves since" baseline.
TREND_POINTS = (10 ** 4, 10 ** 6, 10 ** 7, 10 ** 8)


@dataclass(frozen=True)
class CheckOptions:
    """Optional grid override for the sweep-style checks."""

    lo: int | None = None
    hi: int | None = None
    points: int | None = None

    def grid(self, default_lo: int, default_hi: int,
             default_points: int) -> CheckpointGrid:
        return CheckpointGrid.log_spaced(self.lo or default_lo,
                                         self.hi or default_hi,
                                         self.points or default_points)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    elapsed: float
    data: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name} ({self.elapsed:.1f}s): {self.detail}"


@dataclass
class CheckContext:
    """Memo of expensive intermediates shared between checks."""

    parallel: bool = True
    _tables: dict = field(default_factory=dict)
    _reports: dict = field(default_factory=dict)

    def table(self, limit: int) -> SpfTable:
        for have in sorted(self._tables):
            if have >= limit:
                return self._tables[have]
        self._tables[limit] = spf_build(limit)
        return self._tables[limit]

    def report(self, model_name: str,
               grid: CheckpointGrid) -> primesums.SumsReport:
        key = (model_name, grid.points)
        if key not in self._reports:
            self._reports[key] = sums_stream(
                builtin(model_name), grid, parallel=self.parallel)
        return self._reports[key]


_DEFAULT_CONTEXT: CheckContext | None = None


def default_context() -> CheckContext:
    global _DEFAULT_CONTEXT
    if _DEFAULT_CONTEXT is None:
        _DEFAULT_CONTEXT = CheckContext()
    return _DEFAULT_CONTEXT


def _trend_points(opts: CheckOptions) -> tuple[int, ...]:
    """The four-point convergence ladder, scaled down if a cap is given."""
    if opts.hi is None or opts.hi >= TREND_POINTS[-1]:
        return TREND_POINTS
    hi = opts.hi
    pts = sorted({max(100, hi // 10 ** 4), hi // 100, hi // 10, hi})
    if len(pts) < 4:
        raise GridError(f"trend checks need a range above 1e4, got hi={hi}")
    return tuple(pts)


# --------------------------------------------------------------------------
# individual checks
# --------------------------------------------------------------------------


def _check_identity_oracle(ctx: CheckContext, opts: CheckOptions):
    """Prime-sum identity vs. per-integer factorization, all n <= 5000."""
    n_max = opts.hi or 5000
    table = ctx.table(n_max)
    tol = 1e-9
    worst = 0.0
    worst_at = ("", 0)
    spots = tuple(sorted({1, 2, 3, 10, min(100, n_max), n_max - 1, n_max}))
    for name in ACCEPTANCE_MODELS:
        model = builtin(name)
        ident = primesums.identity_prefix(model, n_max)
        brute = primesums.bruteforce_prefix(model, n_max, table)
        ns = np.arange(n_max + 1)
        dev = np.abs(ident - brute) / np.maximum(1, ns)
        i = int(np.argmax(dev))
        if dev[i] > worst:
            worst, worst_at = float(dev[i]), (name, i)
        # tie the scalar operations to the batch sweep
        for n in spots:
            a = primesums.log_geomean_identity(model, n)
            b = primesums.log_geomean_bruteforce(model, n, table)
            if abs(a - ident[n]) > 1e-10 * max(1, n) or \
               abs(b - brute[n]) > 1e-10 * max(1, n):
                return False, f"scalar op disagrees with sweep at {name}, n={n}", {}
    ok = worst <= tol
    detail = (f"max |identity - bruteforce| / max(1,n) = {worst:.2e} over "
              f"{len(ACCEPTANCE_MODELS)} models, n <= {n_max} "
              f"(model {worst_at[0]}, n={worst_at[1]}; tolerance {tol:.0e})")
    return ok, detail, {"worst": worst}


def _identity_grid(ctx: CheckContext, opts: CheckOptions):
    grid = opts.grid(100, 10 ** 6, 20)
    return grid, ctx.report("kappa", grid)


def _logkappa_summatory(n: int, table: SpfTable) -> float:
    """Independent oracle for sum_{k<=n} log kappa(k) via factor peeling."""
    cur = np.arange(2, n + 1, dtype=np.int64)
    acc = 0.0
    while cur.size:
        s = table.spf[cur].astype(np.int64)
        acc += float(np.sum(np.log(s.astype(np.float64))))
        cur //= s
        while True:
            mask = cur % s == 0
            if not mask.any():
                break
            cur[mask] //= s[mask]
        cur = cur[cur > 1]
    return acc


def _check_omega_identity(ctx: CheckContext, opts: CheckOptions):
    """omega_summatory(n) equals the streamed floor sum S1(n) exactly."""
    grid, rep = _identity_grid(ctx, opts)
    table = ctx.table(grid.n_max)
    worst = max(abs(primesums.omega_summatory(n, table) - rep.s1[i])
                for i, n in enumerate(grid.points))
    detail = f"{len(grid)} checkpoints <= {grid.n_max}: max deviation {worst}"
    return worst == 0, detail, {"worst": worst}


def _check_logkappa_identity(ctx: CheckContext, opts: CheckOptions):
    """sum_{k<=n} log kappa(k) equals the streamed S2(n) within 1e-9 n."""
    grid, rep = _identity_grid(ctx, opts)
    table = ctx.table(grid.n_max)
    worst = max(abs(_logkappa_summatory(n, table) - rep.s2[i]) / n
                for i, n in enumerate(grid.points))
    detail = f"{len(grid)} checkpoints <= {grid.n_max}: max deviation {worst:.2e}/n"
    return worst <= 1e-9, detail, {"worst": worst}


def _check_smr_identity(ctx: CheckContext, opts: CheckOptions):
    """S2(n) = n M(n) - R(n) within 1e-9 n at every checkpoint."""
    grid, rep = _identity_grid(ctx, opts)
    worst = max(abs(rep.s2[i] - (n * rep.m_of_x[i] - rep.r_sum[i])) / n
                for i, n in enumerate(grid.points))
    detail = f"{len(grid)} checkpoints <= {grid.n_max}: max deviation {worst:.2e}/n"
    return worst <= 1e-9, detail, {"worst": worst}


def _check_exact_identities(ctx: CheckContext, opts: CheckOptions):
    """All three at-scale identities: omega = S1, sum log kappa = S2, SMR."""
    results = [
        _check_omega_identity(ctx, opts),
        _check_logkappa_identity(ctx, opts),
        _check_smr_identity(ctx, opts),
    ]
    ok = all(r[0] for r in results)
    detail = ("omega: " + results[0][1].split(": ")[-1]
              + "; log-kappa: " + results[1][1].split(": ")[-1]
              + "; S2=nM-R: " + results[2][1].split(": ")[-1])
    return ok, detail, {}


def _check_a1_gamma(ctx: CheckContext, opts: CheckOptions):
    """First tail-integral coefficient: a_1 = gamma - 1, independent routes."""
    a1 = constants.saffari_a(1)
    gam = constants.euler_gamma()
    dev = abs(a1.value + 1.0 - gam.value)
    ok = dev <= 1e-8
    detail = (f"|a_1 + 1 - gamma| = {dev:.2e} (tolerance 1e-8; "
              f"tail bounds {a1.tail_bound:.1e}, {gam.tail_bound:.1e})")
    return ok, detail, {"dev": dev}


def _check_constants_stability(ctx: CheckContext, opts: CheckOptions):
    """Closed-form vs limit-definition agreement for M and E, plus doubling."""
    m_closed = constants.meissel_mertens()
    e_closed = constants.mertens_e()
    m_limit = constants.meissel_mertens_limit()
    e_limit = constants.mertens_e_limit()
    dm = abs(m_closed.value - m_limit)
    de = abs(e_closed.value - e_limit)

    m_double = constants.meissel_mertens(
        truncation_override=2 * int(m_closed.param("p_cut")))
    move_m = abs(m_double.value - m_closed.value)
    e_double = constants.mertens_e(
        truncation_override=2 * int(e_closed.param("p_cut")))
    move_e = abs(e_double.value - e_closed.value)

    ok = (dm <= 1e-6 and de <= 1e-6
          and move_m < m_closed.tail_bound and move_e < e_closed.tail_bound)
    detail = (f"M: closed vs limit {dm:.1e}, doubling moved {move_m:.1e} "
              f"(tail {m_closed.tail_bound:.1e}); "
              f"E: closed vs limit {de:.1e}, doubling moved {move_e:.1e} "
              f"(tail {e_closed.tail_bound:.1e})")
    return ok, detail, {"dm": dm, "de": de, "move_m": move_m, "move_e": move_e}


def _check_rs_inequality(ctx: CheckContext, opts: CheckOptions):
    """Two-sided Mertens-sum inequality sweep (left side only below 319)."""
    lo = opts.lo or 319
    hi = opts.hi or 10 ** 7
    count = opts.points or 1000
    xs = sorted({int(round(x)) for x in np.geomspace(lo, hi, count)})
    if opts.lo is None:
        xs = list(range(2, 319)) + xs
    verdicts = primesums.rs_inequality_sweep(xs)
    bad = [x for x, v in zip(xs, verdicts) if not v]
    two_sided = sum(1 for x in xs if x >= 319)
    ok = not bad
    detail = (f"{two_sided} two-sided points up to {hi} and "
              f"{len(xs) - two_sided} left-side points: "
              + ("all hold" if ok else f"failures at {bad[:5]}"))
    return ok, detail, {"failures": bad}


def _check_omega_mean_trend(ctx: CheckContext, opts: CheckOptions):
    """(S1/n - log log n - M) log n approaches gamma - 1."""
    points = _trend_points(opts)
    rep = ctx.report("kappa", CheckpointGrid.from_points(points))
    gam = constants.euler_gamma().value
    m_const = constants.meissel_mertens().value
    eps = {n: (rep.s1[i] / n - math.log(math.log(n)) - m_const) * math.log(n)
           for i, n in enumerate(points)}
    d_hi = abs(eps[points[-1]] - (gam - 1.0))
    d_lo = abs(eps[points[0]] - (gam - 1.0))
    ok = d_hi <= 0.1 and d_hi < d_lo
    detail = (f"|eps({points[-1]:.0e}) - (gamma-1)| = {d_hi:.4f} (<= 0.1), "
              f"improving from {d_lo:.4f} at {points[0]:.0e}")
    return ok, detail, {"eps": eps}


def _scaled_residual_stabilization(resid_by_n: dict, points):
    """Relative variation of (residual * log n) across the last three points.

    The probe treats the scaled residual as an estimate of the first
    correction coefficient; stabilization = total variation below 25% of the
    largest magnitude.  A residual shrinking strictly faster than 1/log n
    drives the scaled values toward 0, and this ratio toward 100%.
    """
    scaled = [resid_by_n[n] * math.log(n) for n in points[-3:]]
    top = max(abs(s) for s in scaled)
    var = (max(scaled) - min(scaled)) / top if top else 0.0
    return var < 0.25, var, scaled


def _check_s2_constant(ctx: CheckContext, opts: CheckOptions):
    """S2(n)/n - log n approaches gamma + E - 1, with c_1 stabilization probe."""
    points = _trend_points(opts)
    rep = ctx.report("kappa", CheckpointGrid.from_points(points))
    c = constants.euler_gamma().value + constants.mertens_e().value - 1.0
    resid = {n: rep.s2[i] / n - math.log(n) - c for i, n in enumerate(points)}
    d_hi = abs(resid[points[-1]])
    d_lo = abs(resid[points[0]])
    stable, var, scaled = _scaled_residual_stabilization(resid, points)
    sqrt_scaled = [resid[n] * math.sqrt(n) for n in points[-3:]]
    ok = d_hi <= 0.1 and d_hi < d_lo and stable
    detail = (f"|r({points[-1]:.0e}) - (gamma+E-1)| = {d_hi:.2e} "
              f"(<= 0.1, improving from {d_lo:.2e}); scaled residuals "
              f"(x log n) = [" + ", ".join(f"{s:.4f}" for s in scaled) + "]"
              f", relative variation {var:.0%} (< 25% required); "
              f"sqrt(n)-scaled = ["
              + ", ".join(f"{s:.2f}" for s in sqrt_scaled) + "]")
    return ok, detail, {"resid": resid, "var": var, "scaled": scaled}


def _check_kappa_corollary(ctx: CheckContext, opts: CheckOptions):
    """G_kappa(n)/n converges to e^(gamma+E-1); same stabilization probe."""
    points = _trend_points(opts)
    rep = ctx.report("kappa", CheckpointGrid.from_points(points))
    target = constants.leading_constant(builtin("kappa"))
    resid = {n: math.exp(rep.n_log_g[i] / n) / n - target.value
             for i, n in enumerate(points)}
    d_hi = abs(resid[points[-1]])
    d_lo = abs(resid[points[0]])
    stable, var, scaled = _scaled_residual_stabilization(resid, points)
    ok = d_hi < d_lo and stable
    detail = (f"G/n at {points[-1]:.0e} within {d_hi:.2e} of "
              f"{target.value:.10f} (tail {target.tail_bound:.1e}); scaled "
              f"residuals = [" + ", ".join(f"{s:.2e}" for s in scaled) + "]"
              f", relative variation {var:.0%} (< 25% required)")
    return ok, detail, {"resid": resid, "var": var}


def _check_phi_geomean(ctx: CheckContext, opts: CheckOptions):
    """log G_phi(1e6) - log 1e6 agrees with log(e^-1 rho_phi) to 1e-4."""
    n = opts.hi or 10 ** 6
    model = builtin("euler_phi")
    lg = primesums.log_geomean_identity(model, n) / n
    rho = constants.rho_f(model)
    dev = abs(lg - math.log(n) - (math.log(rho.value) - 1.0))
    ok = dev <= 1e-4
    detail = (f"|log G_phi({n:.0e}) - log {n:.0e} - log C| = {dev:.2e} "
              f"(tolerance 1e-4; rho_phi = {rho.value:.12f})")
    return ok, detail, {"dev": dev, "rho": rho.value}


def _check_qsum_eta0(ctx: CheckContext, opts: CheckOptions):
    """Fitted constant of the jordan_2 prime Q-sum matches eta0(jordan_2)."""
    model = builtin("jordan_2")
    grid = opts.grid(10 ** 6, 10 ** 8, 12)
    rep = ctx.report("jordan_2", grid)
    la = math.log(model.alpha)
    samples = []
    for i, n in enumerate(grid.points):
        qsum = la * rep.s1[i] + model.d * rep.s2[i] + rep.s3[i]
        samples.append((n, qsum / n - model.d * math.log(n)))
    fit = series.fit_coefficients(samples, order=1, include_constant=True)
    e0 = constants.eta0(model)
    dev = abs(fit.constant - e0.value)
    ok = dev <= 0.1
    detail = (f"fitted constant {fit.constant:.6f} vs eta0 {e0.value:.6f} "
              f"(|diff| = {dev:.2e} <= 0.1; fit residual "
              f"{fit.residual_norm:.1e})")
    return ok, detail, {"fitted": fit.constant, "eta0": e0.value}


def _series_log(g: list) -> list:
    """Formal log of a series with constant term 1 (exact rationals)."""
    r = len(g) - 1
    e = [Fraction(0)] * (r + 1)
    for n in range(1, r + 1):
        acc = n * g[n]
        for k in range(1, n):
            acc -= k * e[k] * g[n - k]
        e[n] = Fraction(acc, n)
    return e


def _check_series_algebra(ctx: CheckContext, opts: CheckOptions):
    """Exact round-trips for the truncated-series helpers to order 12."""
    import random

    rng = random.Random(20250814)
    for trial in range(6):
        e = [Fraction(rng.randint(-9, 9), rng.randint(1, 7)) for _ in range(12)]
        g = series.series_exp(e)
        back = _series_log(list(g))
        if back[1:] != e:
            return False, f"exp/log round-trip failed on trial {trial}", {}

    for r in range(2, 13):
        for j in range(2, r + 1):
            if not series.lj_recurrence_check(j, r):
                return False, f"L_j recurrence failed at j={j}, r={r}", {}

    # s2 coefficients vs independent reassembly: collect the 1/log^i terms
    # of sum_j (d_{j+1} x^j - d_j L_j) using the L_j expansion coefficients
    for trial in range(6):
        order = rng.randint(1, 6)
        d = [Fraction(rng.randint(-9, 9), rng.randint(1, 7))
             for _ in range(order + 1)]
        got = series.s2_coeffs_from_d(d)
        want = [d[i] for i in range(1, order + 1)]
        for j in range(1, order + 1):
            for idx, a in enumerate(series.lj_coeffs(j, order)):
                want[j + idx - 1] -= a * d[j - 1]
        if list(got) != want:
            return False, f"s2 coefficient reassembly failed on trial {trial}", {}

    return True, ("exp/log round-trip (order 12), L_j recurrences "
                  "(2 <= j <= r <= 12), and S2-coefficient reassembly all "
                  "exact"), {}


def _check_determinism(ctx: CheckContext, opts: CheckOptions):
    """Sequential and parallel sweeps serialize to byte-identical files."""
    grid = opts.grid(100, 10 ** 6, 20)
    model = builtin("kappa")
    rep_seq = sums_stream(model, grid, parallel=False)
    rep_par = sums_stream(model, grid, parallel=True)
    with tempfile.TemporaryDirectory() as tmp:
        p_seq = os.path.join(tmp, "seq.pmsm")
        p_par = os.path.join(tmp, "par.pmsm")
        primesums.save_report(p_seq, rep_seq)
        primesums.save_report(p_par, rep_par)
        with open(p_seq, "rb") as fh:
            b_seq = fh.read()
        with open(p_par, "rb") as fh:
            b_par = fh.read()
    ok = b_seq == b_par and rep_seq == rep_par
    detail = (f"sequential vs parallel sweep over {len(grid)} checkpoints "
              f"<= {grid.n_max}: "
              + ("byte-identical report files" if ok else "files differ"))
    return ok, detail, {}


_REGISTRY = {
    "identity-oracle": _check_identity_oracle,
    "exact-identities": _check_exact_identities,
    "a1-gamma": _check_a1_gamma,
    "constants-stability": _check_constants_stability,
    "rs-inequality": _check_rs_inequality,
    "omega-mean-trend": _check_omega_mean_trend,
    "s2-constant": _check_s2_constant,
    "kappa-corollary": _check_kappa_corollary,
    "phi-geomean": _check_phi_geomean,
    "qsum-eta0": _check_qsum_eta0,
    "series-algebra": _check_series_algebra,
    "determinism": _check_determinism,
    # finer-grained views of exact-identities, for targeted CLI runs
    "omega-identity": _check_omega_identity,
    "logkappa-identity": _check_logkappa_identity,
    "smr-identity": _check_smr_identity,
}

# The acceptance registry proper: one check per acceptance criterion.
ACCEPTANCE_CHECKS = (
    "identity-oracle", "exact-identities", "a1-gamma", "constants-stability",
    "rs-inequality", "omega-mean-trend", "s2-constant", "kappa-corollary",
    "phi-geomean", "qsum-eta0", "series-algebra", "determinism",
)

CHECK_NAMES = tuple(_REGISTRY)


def run_check(name: str, ctx: CheckContext | None = None,
              opts: CheckOptions | None = None) -> CheckResult:
    if name not in _REGISTRY:
        raise UnknownCheckError(
            f"unknown check {name!r}; available: {', '.join(CHECK_NAMES)}")
    if ctx is None:
        ctx = default_context()
    if opts is None:
        opts = CheckOptions()
    start = time.perf_counter()
    passed, detail, data = _REGISTRY[name](ctx, opts)
    return CheckResult(name, passed, detail, time.perf_counter() - start, data)


def run_all(ctx: CheckContext | None = None, names=None,
            opts: CheckOptions | None = None) -> list[CheckResult]:
    return [run_check(name, ctx, opts) for name in (names or ACCEPTANCE_CHECKS)]
