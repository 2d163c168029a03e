"""Streaming, checkpointed evaluation of the prime sums behind log-geometric means.

The central identity: for a positive multiplicative f,

    n * log G_f(n) = sum_{k<=n} log f(k)
                   = sum_{p<=n} floor(n/p) * log f(p)
                     + sum_{p^a<=n, a>=2} floor(n/p^a) * log(f(p^a)/f(p^(a-1)))

(the second sum vanishes identically for strongly multiplicative f).  With
Q(p) = f(p) written against its growth profile alpha * p^d, the prime part
splits into three streaming accumulators

    sum floor(n/p) log f(p) = (log alpha) * S1(n) + d * S2(n) + S3(n),

    S1(n) = sum floor(n/p),          S2(n) = sum floor(n/p) log p,
    S3(n) = sum floor(n/p) log(Q(p) / (alpha p^d)),

alongside the companion sums F1 (fractional parts), F2 (fractional parts over
all prime powers), R(n) = sum {n/p} log p, M(x) = sum log p / p, and
U(x) = sum_{2<=k<=x} log kappa(k) / log k.  `sums_stream` evaluates all of
them at up to 64 checkpoints in one segmented pass; each prime updates every
checkpoint >= p, so the pass is O(#primes * #checkpoints-above).

Determinism contract: per-segment partials are formed by numpy's pairwise
reduction and merged into Kahan accumulators in ascending segment order.  The
parallel driver computes exactly the same partials and merges them in exactly
the same order, so concurrent runs are bit-identical to sequential ones.

Every reported total carries a certified accumulation error bound derived
only from stored quantities (explicitly *not* from run-time state), so a
report loaded back from its cache file reproduces the bound bit-for-bit.

Cache format (binary, little-endian): header {magic b"PMSM", version u16,
model-name hash u64, checkpoint count u16}, then one record per checkpoint
{n u64, s1 u64, then (value, compensation) f64 pairs for s2, s3, f1, f2,
r_sum, m_of_x, u_of_x}.  `n_log_g` and `err_bound` are deliberately not
stored: both are reassembled deterministically on load.
"""

from __future__ import annotations

import hashlib
import math
import os
import struct
import tempfile
from bisect import bisect_left
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .accum import EPS, KahanSum, pairwise_error_bound
from .errors import AccumulationError, CacheFormatError, GridError
from .multfunc import PrimeModel, log_ratio_prime_power, value_at
from .sieve import (
    DEFAULT_MAX_BOUND,
    DEFAULT_SEGMENT_SIZE,
    SpfTable,
    primes_up_to,
    stream_segmented,
)

__all__ = [
    "MAX_CHECKPOINTS",
    "CACHE_VERSION",
    "CheckpointGrid",
    "SumsReport",
    "sums_stream",
    "log_geomean_identity",
    "log_geomean_bruteforce",
    "identity_prefix",
    "bruteforce_prefix",
    "omega_summatory",
    "u_of_x",
    "r_sum",
    "mertens_m_of_x",
    "rs_inequality_check",
    "rs_inequality_sweep",
    "save_report",
    "load_report",
    "default_cache_path",
]

MAX_CHECKPOINTS = 64

# Ordering of the float-valued accumulators, fixed by the cache layout.
FLOAT_FIELDS = ("s2", "s3", "f1", "f2", "r_sum", "m_of_x", "u_of_x")

CACHE_MAGIC = b"PMSM"
CACHE_VERSION = 1
_HEADER = struct.Struct("<4sHQH")
_RECORD = struct.Struct("<QQ14d")

# Per-term formation rounding allowance (in ulps of the term magnitude):
# one log/log1p evaluation, one division, one multiplication, one cast.
_FORM_ULPS = 4.0


# --------------------------------------------------------------------------
# checkpoint grid
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckpointGrid:
    """Ascending evaluation points 2 <= n_1 < ... < n_m, m <= 64."""

    points: tuple[int, ...]

    def __post_init__(self):
        pts = self.points
        if not pts:
            raise GridError("checkpoint grid is empty")
        if len(pts) > MAX_CHECKPOINTS:
            raise GridError(
                f"{len(pts)} checkpoints exceed the cap of {MAX_CHECKPOINTS}")
        for n in pts:
            if not isinstance(n, int) or isinstance(n, bool):
                raise GridError(f"checkpoint {n!r} is not an integer")
        if pts[0] < 2:
            raise GridError(f"first checkpoint must be >= 2, got {pts[0]}")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise GridError("checkpoints must be strictly ascending")
        if pts[-1] > DEFAULT_MAX_BOUND:
            raise GridError(
                f"checkpoint {pts[-1]} exceeds the sieve bound {DEFAULT_MAX_BOUND}")

    @classmethod
    def from_points(cls, points) -> "CheckpointGrid":
        pts = []
        for n in points:
            iv = int(n)
            if iv != n:
                raise GridError(f"checkpoint {n!r} is not an integer")
            pts.append(iv)
        return cls(tuple(pts))

    @classmethod
    def log_spaced(cls, lo: int, hi: int, count: int) -> "CheckpointGrid":
        """count geometrically spaced integers in [lo, hi] (deduplicated)."""
        if count < 1:
            raise GridError(f"need at least one checkpoint, got {count}")
        if lo > hi:
            raise GridError(f"empty range [{lo}, {hi}]")
        raw = np.geomspace(lo, hi, count)
        pts = sorted({int(round(x)) for x in raw})
        return cls(tuple(pts))

    @property
    def n_max(self) -> int:
        return self.points[-1]

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


# --------------------------------------------------------------------------
# report
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SumsReport:
    """All streaming sums at each checkpoint, with certified error bounds.

    `s1` entries are exact integers.  `compensation` carries the final Kahan
    compensation term per float field (FLOAT_FIELDS order) so that a report
    serialized and re-loaded continues the same accumulation state.
    `n_log_g` is the assembled identity value
    (log alpha) * s1 + d * s2 + s3 + [prime-power correction]; `err_bound`
    bounds its accumulation error.  Both are functions of the stored data
    only and are recomputed, never stored.
    """

    model_name: str
    points: tuple[int, ...]
    s1: tuple[int, ...]
    s2: tuple[float, ...]
    s3: tuple[float, ...]
    f1: tuple[float, ...]
    f2: tuple[float, ...]
    r_sum: tuple[float, ...]
    m_of_x: tuple[float, ...]
    u_of_x: tuple[float, ...]
    compensation: tuple[tuple[float, ...], ...]
    n_log_g: tuple[float, ...]
    err_bound: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.points)

    def field(self, name: str) -> tuple:
        if name == "s1":
            return self.s1
        if name in FLOAT_FIELDS or name in ("n_log_g", "err_bound"):
            return getattr(self, name)
        raise KeyError(name)

    def checkpoint(self, i: int) -> dict:
        """One checkpoint row as a plain dict (CLI/reporting convenience)."""
        row = {"n": self.points[i], "s1": self.s1[i]}
        for name in FLOAT_FIELDS:
            row[name] = getattr(self, name)[i]
        row["n_log_g"] = self.n_log_g[i]
        row["err_bound"] = self.err_bound[i]
        return row


# --------------------------------------------------------------------------
# prime-power corrections (a >= 2)
# --------------------------------------------------------------------------


def _prime_power_pass(model: PrimeModel, points: tuple[int, ...]):
    """Accumulate the a >= 2 contributions at every checkpoint.

    Returns (frac, pp2): per-checkpoint Kahan sums of {n/p^a} (model
    independent, feeds F2) and of floor(n/p^a) * log(f(p^a)/f(p^(a-1)))
    (exactly zero for strongly multiplicative models).  Iteration order is
    ascending p, then ascending a — fixed, hence deterministic.
    """
    m = len(points)
    frac = [KahanSum() for _ in range(m)]
    pp2 = [KahanSum() for _ in range(m)]
    n_max = points[-1]
    for p in primes_up_to(math.isqrt(n_max)):
        p = int(p)
        pa = p * p
        a = 2
        while pa <= n_max:
            lr = 0.0
            if not model.strongly_multiplicative:
                lr = log_ratio_prime_power(model, p, a)
            for i in range(bisect_left(points, pa), m):
                q, rm = divmod(points[i], pa)
                fr = rm / pa
                frac[i].add(fr, err_in=EPS * fr)
                if lr != 0.0:
                    t = q * lr
                    pp2[i].add(t, err_in=_FORM_ULPS * EPS * abs(t))
            pa *= p
            a += 1
    return frac, pp2


def _assemble(model: PrimeModel, points, s1, values):
    """Recompute (n_log_g, err_bound, pp2) from checkpointed sums.

    `values` maps each FLOAT_FIELDS name to its per-checkpoint value list.
    Everything here is a deterministic function of (model, points, s1,
    values): running it on a freshly streamed report and on one re-loaded
    from cache yields bit-identical outputs.

    The error bound per checkpoint n combines the pairwise/Kahan
    accumulation model (depth <= log2 n plus merge slack) with per-term
    formation rounding, using sum|terms| = value for the sign-constant sums
    and a growth-profile majorant for s3.
    """
    la = math.log(model.alpha)
    _, pp2 = _prime_power_pass(model, points)
    n_log_g = []
    err_bound = []
    for i, n in enumerate(points):
        s1f = float(s1[i])
        s2 = values["s2"][i]
        s3 = values["s3"][i]
        ppv = pp2[i].value
        v = la * s1f + model.d * s2 + s3 + ppv
        n_log_g.append(v)

        depth = EPS * (math.ceil(math.log2(max(n, 2))) + 4.0 + _FORM_ULPS)
        if model.delta == math.inf:
            s3_mass = 0.0
        else:
            # |log(Q(p)/(alpha p^d))| <= 2 (K/alpha) p^{-delta} wherever the
            # relative deviation is <= 1/2, so sum|terms| <= 2(K/alpha) S1.
            s3_mass = abs(s3) + 2.0 * (model.k_bound / model.alpha) * s1f
        b = abs(la) * EPS * s1f                  # log alpha known to 1 ulp
        b += abs(model.d) * depth * s2 + depth * s3_mass
        b += pp2[i].error_bound()
        b += 8.0 * EPS * (abs(la) * s1f + abs(model.d * s2) + abs(s3) + abs(ppv))
        err_bound.append(b)
    return n_log_g, err_bound, pp2


# --------------------------------------------------------------------------
# segment workers
# --------------------------------------------------------------------------


def _prime_segment_partial(model: PrimeModel, points, seg: np.ndarray, need_s3: bool):
    """Per-checkpoint partial sums contributed by one prime segment.

    Returns a list of tuples (i, ds1, parts) where parts maps an accumulator
    name to (value, absmass, err_in); `direct` is the straight
    sum floor(n/p) log f(p) used for the internal cross-check.
    """
    if seg.size == 0:
        return []
    pf = seg.astype(np.float64)
    lp = np.log(pf)
    lf = model.log_at_prime_vec(pf, lp)
    qr = model.log_q_ratio_vec(pf, lp) if need_s3 else None
    mterm = lp / pf
    full_m = None

    lo = int(seg[0])
    out = []
    for i in range(bisect_left(points, lo), len(points)):
        n = points[i]
        cut = int(np.searchsorted(seg, n, side="right"))
        if cut == 0:
            continue
        q = n // seg[:cut]
        rm = (n - q * seg[:cut]).astype(np.float64)
        qf = q.astype(np.float64)
        fr = rm / pf[:cut]

        parts = {}

        def put(name, value, mass, count):
            parts[name] = (
                float(value),
                float(mass),
                pairwise_error_bound(float(mass), count) + _FORM_ULPS * EPS * float(mass),
            )

        ds1 = int(np.sum(q))
        t = qf * lp[:cut]
        v = np.sum(t)
        put("s2", v, v, cut)
        if need_s3:
            t = qf * qr[:cut]
            put("s3", np.sum(t), np.sum(np.abs(t)), cut)
        v = np.sum(fr)
        put("f1", v, v, cut)
        t = fr * lp[:cut]
        v = np.sum(t)
        put("r_sum", v, v, cut)
        if cut == seg.size:
            if full_m is None:
                full_m = float(np.sum(mterm))
            v = full_m
        else:
            v = np.sum(mterm[:cut])
        put("m_of_x", v, v, cut)
        t = qf * lf[:cut]
        put("direct", np.sum(t), np.sum(np.abs(t)), cut)

        out.append((i, ds1, parts))
    return out


def _u_segment_partial(points, lo: int, hi: int, base: np.ndarray):
    """Partial sums of U(x) = sum log kappa(k) / log k over k in [lo, hi).

    log kappa(k) (the squarefree kernel's log) is built by a residual sieve:
    each base prime deposits log p on its multiples once, all its powers are
    divided out of a residue array, and whatever residue exceeds 1 is a
    single prime factor > sqrt(hi).
    """
    size = hi - lo
    res = np.arange(lo, hi, dtype=np.int64)
    logkap = np.zeros(size)
    sq = math.isqrt(hi - 1)
    for p in base:
        p = int(p)
        if p > sq:
            break
        start = ((lo + p - 1) // p) * p
        if start >= hi:
            continue
        sl = slice(start - lo, None, p)
        logkap[sl] += math.log(p)
        res[sl] //= p
        q = p * p
        while q < hi:
            start = ((lo + q - 1) // q) * q
            if start < hi:
                res[slice(start - lo, None, q)] //= p
            q *= p
    left = res > 1
    if left.any():
        logkap[left] += np.log(res[left].astype(np.float64))
    terms = logkap / np.log(np.arange(lo, hi, dtype=np.float64))

    full = None
    out = []
    for i in range(bisect_left(points, lo), len(points)):
        n = points[i]
        if n >= hi - 1:
            if full is None:
                v = float(np.sum(terms))
                full = (v, v, pairwise_error_bound(v, size) + _FORM_ULPS * EPS * v)
            out.append((i, full))
        else:
            cnt = n - lo + 1
            v = float(np.sum(terms[:cnt]))
            out.append((i, (v, v, pairwise_error_bound(v, cnt) + _FORM_ULPS * EPS * v)))
    return out


# --------------------------------------------------------------------------
# the streaming engine
# --------------------------------------------------------------------------


def sums_stream(
    model: PrimeModel,
    grid: CheckpointGrid,
    *,
    segment_size: int = DEFAULT_SEGMENT_SIZE,
    parallel: bool = False,
    max_workers: int | None = None,
) -> SumsReport:
    """Evaluate every streaming sum at each checkpoint in one sieve pass.

    With ``parallel=True`` the prime segments and the integer blocks of the
    U-pass are processed by a thread pool; partials are merged in ascending
    segment order either way, so the result is bit-identical to the
    sequential run.
    """
    points = grid.points
    n_max = grid.n_max
    m = len(points)
    need_s3 = model.delta != math.inf

    stream = stream_segmented(2, n_max, segment_size=segment_size)
    bounds = stream.segment_bounds()
    base = stream._base()
    u_base = primes_up_to(math.isqrt(n_max))

    s1 = [0] * m
    kah = {name: [KahanSum() for _ in range(m)] for name in
           ("s2", "s3", "f1", "r_sum", "m_of_x", "u_of_x", "direct")}

    def prime_task(idx: int):
        return _prime_segment_partial(model, points, stream.segment(idx, base), need_s3)

    def u_task(idx: int):
        lo, hi = bounds[idx]
        return _u_segment_partial(points, lo, hi, u_base)

    if parallel:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            prime_parts = list(pool.map(prime_task, range(len(bounds))))
            u_parts = list(pool.map(u_task, range(len(bounds))))
    else:
        prime_parts = [prime_task(i) for i in range(len(bounds))]
        u_parts = [u_task(i) for i in range(len(bounds))]

    for partial in prime_parts:
        for i, ds1, parts in partial:
            s1[i] += ds1
            for name, (value, mass, err) in parts.items():
                kah[name][i].add(value, abs_x=mass, err_in=err)
    for partial in u_parts:
        for i, (value, mass, err) in partial:
            kah["u_of_x"][i].add(value, abs_x=mass, err_in=err)

    # prime-power corrections: F2 on top of F1, and the a >= 2 identity term
    frac, _ = _prime_power_pass(model, points)
    f2 = []
    for i in range(m):
        acc = kah["f1"][i]
        tot = KahanSum(acc.value, acc.comp, acc.absmass, acc.inherited)
        src = frac[i]
        tot.add(src.value, abs_x=src.absmass, err_in=src.error_bound())
        f2.append(tot)
    kah["f2"] = f2

    values = {name: [acc.value for acc in kah[name]] for name in FLOAT_FIELDS}
    n_log_g, err_bound, pp2 = _assemble(model, points, s1, values)

    # Internal cross-check: the decomposed assembly must agree with a direct
    # compensated sum of floor(n/p) log f(p) within both error budgets.
    for i, n in enumerate(points):
        direct = kah["direct"][i].value + pp2[i].value
        tol = (kah["direct"][i].error_bound() + pp2[i].error_bound()
               + err_bound[i]
               + sum(kah[f][i].error_bound() for f in ("s2", "s3"))
               + 16.0 * EPS * abs(n_log_g[i]))
        if abs(direct - n_log_g[i]) > tol:
            raise AccumulationError(
                f"identity cross-check failed at n={n} for model "
                f"{model.name!r}: assembled {n_log_g[i]!r} vs direct "
                f"{direct!r} (tolerance {tol:.3e})")

    return SumsReport(
        model_name=model.name,
        points=points,
        s1=tuple(s1),
        compensation=tuple(
            tuple(acc.comp for acc in kah[name]) for name in FLOAT_FIELDS),
        n_log_g=tuple(n_log_g),
        err_bound=tuple(err_bound),
        **{name: tuple(values[name]) for name in FLOAT_FIELDS},
    )


# --------------------------------------------------------------------------
# geometric-mean identities
# --------------------------------------------------------------------------


def log_geomean_identity(model: PrimeModel, n: int, *,
                         segment_size: int = DEFAULT_SEGMENT_SIZE) -> float:
    """n * log G_f(n) via the prime-sum identity (exact floor sums).

    The accumulation error is certified to stay within
    1e-12 * |result| + 1e-12 * n.
    """
    if n < 1:
        raise GridError(f"log_geomean_identity needs n >= 1, got {n}")
    if n == 1:
        return 0.0
    report = sums_stream(model, CheckpointGrid((n,)), segment_size=segment_size)
    result = report.n_log_g[0]
    if report.err_bound[0] > 1e-12 * abs(result) + 1e-12 * n:
        raise AccumulationError(
            f"accumulation bound {report.err_bound[0]:.3e} exceeds the "
            f"identity contract at n={n}")
    return result


def identity_prefix(model: PrimeModel, n_max: int) -> np.ndarray:
    """n * log G_f(n) for every n = 1..n_max (index n; entries 0, 1 are 0).

    Batch form of `log_geomean_identity` for dense sweeps: for each n the
    prime part sum floor(n/p) log f(p) is evaluated directly (one vector
    reduction over primes <= n), plus the a >= 2 correction.  Intended for
    moderate n_max (the work is O(n_max * pi(n_max))).
    """
    if n_max < 1:
        raise GridError(f"identity_prefix needs n_max >= 1, got {n_max}")
    out = np.zeros(n_max + 1)
    if n_max == 1:
        return out
    primes = primes_up_to(n_max)
    pf = primes.astype(np.float64)
    lp = np.log(pf)
    lf = model.log_at_prime_vec(pf, lp)

    pps: list[tuple[int, float]] = []
    if not model.strongly_multiplicative:
        for p in primes_up_to(math.isqrt(n_max)):
            p = int(p)
            pa, a = p * p, 2
            while pa <= n_max:
                pps.append((pa, log_ratio_prime_power(model, p, a)))
                pa *= p
                a += 1
        pps.sort()
    pp_pa = np.array([pa for pa, _ in pps], dtype=np.int64)
    pp_lr = np.array([lr for _, lr in pps])

    cut = 0
    cut2 = 0
    for n in range(2, n_max + 1):
        while cut < primes.size and primes[cut] <= n:
            cut += 1
        q = n // primes[:cut]
        total = float(np.sum(q.astype(np.float64) * lf[:cut]))
        while cut2 < pp_pa.size and pp_pa[cut2] <= n:
            cut2 += 1
        if cut2:
            total += float(np.sum((n // pp_pa[:cut2]).astype(np.float64) * pp_lr[:cut2]))
        out[n] = total
    return out


def log_geomean_bruteforce(model: PrimeModel, n: int, table: SpfTable) -> float:
    """n * log G_f(n) = sum_{k<=n} log f(k) by exact per-k factorization."""
    if n < 1:
        raise GridError(f"log_geomean_bruteforce needs n >= 1, got {n}")
    if n > table.limit:
        raise GridError(f"n={n} exceeds the factor table limit {table.limit}")
    return math.fsum(value_at(model, k, table).log_value for k in range(2, n + 1))


def bruteforce_prefix(model: PrimeModel, n_max: int, table: SpfTable) -> np.ndarray:
    """Prefix sums of log f(k): entry n is sum_{k<=n} log f(k) = n log G_f(n)."""
    if n_max < 1:
        raise GridError(f"bruteforce_prefix needs n_max >= 1, got {n_max}")
    if n_max > table.limit:
        raise GridError(f"n_max={n_max} exceeds the factor table limit {table.limit}")
    logs = np.zeros(n_max + 1)
    for k in range(2, n_max + 1):
        logs[k] = value_at(model, k, table).log_value
    return np.cumsum(logs)


# --------------------------------------------------------------------------
# scalar summatory operations
# --------------------------------------------------------------------------


def omega_summatory(n: int, table: SpfTable) -> int:
    """sum_{k<=n} omega(k), exact (omega = number of distinct prime factors)."""
    if n < 1:
        raise GridError(f"omega_summatory needs n >= 1, got {n}")
    if n > table.limit:
        raise GridError(f"n={n} exceeds the factor table limit {table.limit}")
    cur = np.arange(2, n + 1, dtype=np.int64)
    total = 0
    while cur.size:
        s = table.spf[cur].astype(np.int64)
        total += cur.size
        cur //= s
        while True:
            mask = cur % s == 0
            if not mask.any():
                break
            cur[mask] //= s[mask]
        keep = cur > 1
        cur = cur[keep]
    return total


def u_of_x(x: int, table: SpfTable) -> float:
    """U(x) = sum_{2<=k<=x} log kappa(k) / log k (k = 1 is excluded).

    kappa(k) is the product of the distinct primes dividing k; the summand
    is the reciprocal index of composition of k.
    """
    if x < 2:
        raise GridError(f"u_of_x needs x >= 2, got {x}")
    if x > table.limit:
        raise GridError(f"x={x} exceeds the factor table limit {table.limit}")
    k = np.arange(2, x + 1, dtype=np.int64)
    cur = k.copy()
    logkap = np.zeros(cur.size)
    while True:
        act = np.flatnonzero(cur > 1)
        if act.size == 0:
            break
        s = table.spf[cur[act]].astype(np.int64)
        logkap[act] += np.log(s.astype(np.float64))
        c = cur[act] // s
        while True:
            mask = c % s == 0
            if not mask.any():
                break
            c[mask] //= s[mask]
        cur[act] = c
    return float(np.sum(logkap / np.log(k.astype(np.float64))))


def _prime_scalar_sum(x: int, term) -> KahanSum:
    """Compensated sum over primes p <= x of term(p_float, log p)."""
    acc = KahanSum()
    for seg in stream_segmented(2, x).segments():
        if seg.size == 0:
            continue
        pf = seg.astype(np.float64)
        t = term(pf, np.log(pf))
        v = float(np.sum(t))
        mass = float(np.sum(np.abs(t)))
        acc.add(v, abs_x=mass,
                err_in=pairwise_error_bound(mass, seg.size) + _FORM_ULPS * EPS * mass)
    return acc


def r_sum(n: int) -> float:
    """R(n) = sum_{p<=n} {n/p} log p, compensated."""
    if n < 2:
        raise GridError(f"r_sum needs n >= 2, got {n}")
    acc = KahanSum()
    for seg in stream_segmented(2, n).segments():
        if seg.size == 0:
            continue
        pf = seg.astype(np.float64)
        q = n // seg
        fr = (n - q * seg).astype(np.float64) / pf
        t = fr * np.log(pf)
        v = float(np.sum(t))
        acc.add(v, err_in=pairwise_error_bound(v, seg.size) + _FORM_ULPS * EPS * v)
    return acc.value


def mertens_m_of_x(x: int) -> float:
    """M(x) = sum_{p<=x} log p / p, compensated."""
    if x < 2:
        raise GridError(f"mertens_m_of_x needs x >= 2, got {x}")
    return _prime_scalar_sum(x, lambda pf, lp: lp / pf).value


def rs_inequality_sweep(xs) -> list[bool]:
    """Check log x + E - 1/(2 log x) < M(x) < log x + E + 1/(2 log x) at each x.

    The right inequality is only asserted for x >= 319 (below that it is
    vacuously treated as satisfied, matching the two-sided validity range);
    the left is checked for every x >= 2.  The certified uncertainty of the
    E constant is folded into both margins, so a True verdict is conservative.

    All M(x) values come from one segmented pass (prefix cuts inside each
    segment), which keeps thousand-point sweeps cheap.
    """
    from .constants import mertens_e

    xs = [int(x) for x in xs]
    if any(x < 2 for x in xs):
        raise GridError("rs inequality checks need x >= 2")
    order = np.argsort(xs, kind="stable")
    x_sorted = [xs[i] for i in order]
    x_max = x_sorted[-1]

    e = mertens_e()
    m_at = {}
    base = KahanSum()
    stream = stream_segmented(2, x_max)
    for (lo, hi), seg in zip(stream.segment_bounds(), stream.segments()):
        inside = [x for x in x_sorted if lo <= x < hi]
        if inside and seg.size:
            pf = seg.astype(np.float64)
            terms = np.log(pf) / pf
            csum = np.cumsum(terms)
            for x in inside:
                cut = int(np.searchsorted(seg, x, side="right"))
                m_at[x] = base.value + (float(csum[cut - 1]) if cut else 0.0)
        elif inside:
            for x in inside:
                m_at[x] = base.value
        if seg.size:
            pf = seg.astype(np.float64)
            t = np.log(pf) / pf
            v = float(np.sum(t))
            base.add(v, err_in=pairwise_error_bound(v, seg.size) + _FORM_ULPS * EPS * v)

    out = [False] * len(xs)
    for i, x in enumerate(xs):
        mx = m_at[x]
        lx = math.log(x)
        band = 1.0 / (2.0 * lx)
        unc = e.tail_bound + 1e-11 * max(1.0, mx)
        left_ok = mx - (lx + e.value - band) > unc
        right_ok = True
        if x >= 319:
            right_ok = (lx + e.value + band) - mx > unc
        out[i] = bool(left_ok and right_ok)
    return out


def rs_inequality_check(x: int) -> bool:
    """Two-sided Mertens-sum inequality at one x (left side only for x < 319)."""
    return rs_inequality_sweep([x])[0]


# --------------------------------------------------------------------------
# checkpoint cache
# --------------------------------------------------------------------------


def _model_name_hash(name: str) -> int:
    return int.from_bytes(
        hashlib.blake2b(name.encode("utf-8"), digest_size=8).digest(), "little")


def save_report(path: str, report: SumsReport) -> None:
    """Serialize a report (atomic replace; see module docstring for layout)."""
    blob = [_HEADER.pack(CACHE_MAGIC, CACHE_VERSION,
                         _model_name_hash(report.model_name), len(report))]
    for i in range(len(report)):
        pairs = []
        for j, name in enumerate(FLOAT_FIELDS):
            pairs.append(getattr(report, name)[i])
            pairs.append(report.compensation[j][i])
        blob.append(_RECORD.pack(report.points[i], report.s1[i], *pairs))
    data = b"".join(blob)

    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".pmsm.tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_report(path: str, model: PrimeModel,
                grid: CheckpointGrid | None = None) -> SumsReport:
    """Load a cached report for (model, grid); n_log_g/err_bound reassembled.

    Raises CacheFormatError on any mismatch: magic, version, model-name
    hash, truncated payload, non-ascending checkpoints, or (when `grid` is
    given) a different checkpoint set.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise CacheFormatError(f"{path}: truncated header")
    magic, version, name_hash, count = _HEADER.unpack_from(data)
    if magic != CACHE_MAGIC:
        raise CacheFormatError(f"{path}: bad magic {magic!r}")
    if version != CACHE_VERSION:
        raise CacheFormatError(
            f"{path}: cache version {version} != supported {CACHE_VERSION}")
    if name_hash != _model_name_hash(model.name):
        raise CacheFormatError(
            f"{path}: cached model does not match {model.name!r}")
    expected = _HEADER.size + count * _RECORD.size
    if len(data) != expected:
        raise CacheFormatError(
            f"{path}: payload is {len(data)} bytes, expected {expected}")
    if not (1 <= count <= MAX_CHECKPOINTS):
        raise CacheFormatError(f"{path}: invalid checkpoint count {count}")

    points, s1 = [], []
    values = {name: [] for name in FLOAT_FIELDS}
    comps = {name: [] for name in FLOAT_FIELDS}
    off = _HEADER.size
    for _ in range(count):
        rec = _RECORD.unpack_from(data, off)
        off += _RECORD.size
        points.append(rec[0])
        s1.append(rec[1])
        for j, name in enumerate(FLOAT_FIELDS):
            values[name].append(rec[2 + 2 * j])
            comps[name].append(rec[3 + 2 * j])
    if any(b <= a for a, b in zip(points, points[1:])):
        raise CacheFormatError(f"{path}: checkpoints are not ascending")
    points = tuple(points)
    if grid is not None and grid.points != points:
        raise CacheFormatError(
            f"{path}: cached grid {points} does not match the requested grid")

    n_log_g, err_bound, _ = _assemble(model, points, s1, values)
    return SumsReport(
        model_name=model.name,
        points=points,
        s1=tuple(s1),
        compensation=tuple(tuple(comps[name]) for name in FLOAT_FIELDS),
        n_log_g=tuple(n_log_g),
        err_bound=tuple(err_bound),
        **{name: tuple(values[name]) for name in FLOAT_FIELDS},
    )


def default_cache_path(root: str, model: PrimeModel, grid: CheckpointGrid) -> str:
    """Canonical cache file name for a (model, grid) pair under `root`."""
    h = hashlib.blake2b(digest_size=8)
    for n in grid.points:
        h.update(n.to_bytes(8, "little"))
    return os.path.join(root, f"{model.name}-{h.hexdigest()}.pmsm")
