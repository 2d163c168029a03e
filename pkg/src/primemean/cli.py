"""Command-line interface.

Subcommands
-----------
constants   certified constants (gamma, M, E, tail-integral a_j), plus the
            per-model constants C_Q, rho_f, eta_0 and the leading constant
geomean     exact log-geometric-means over a checkpoint grid, with the
            scaled ratio G/(n^d (log n)^log alpha) against its predicted limit
sums        the full streamed checkpoint report (S1, S2, S3, F1, F2, R, M, U)
verify      named verification checks (the acceptance criteria registry)
fit         least-squares extraction of expansion coefficients from residuals

Exit codes: 0 success; 1 failed check or cross-check; 2 malformed grid,
model, or arguments; 3 unreachable precision target (the message names the
constant); 4 unknown check name; 5 ill-conditioned fit basis (the message
carries the condition estimate).

All floats print as %.15g and every certified constant is accompanied by its
tail bound.  CSV output follows RFC 4180 (CRLF records).  Checkpoint reports
persist to the directory named by --cache or the PRIMEMEAN_CACHE environment
variable; with neither set, nothing is written to disk.  A cached report is
reused only when its model name and grid hash match, and reloading one is
bit-identical to recomputation.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import checks, constants, primesums, series
from .errors import (AccumulationError, CacheFormatError, GridError,
                     IllConditionedFitError, ModelSpecError, PrecisionError,
                     PrimemeanError, UnknownCheckError)
from .multfunc import BUILTIN_NAMES, PrimeModel, builtin, load_model_file
from .primesums import CheckpointGrid

# Brute-force oracle columns need a per-integer factor table.
ORACLE_TABLE_CAP = 10 ** 7

FIT_TARGETS = ("s1-residual", "s2-residual", "qsum-residual", "u-residual")

_DEFAULT_GRID = (10 ** 4, 10 ** 8, 12)


@dataclass(frozen=True)
class RunConfig:
    """Parsed, validated invocation shared by the subcommands."""

    model: PrimeModel | None
    grid: CheckpointGrid | None
    fmt: str
    cache_dir: str | None
    parallel: bool
    precision: float | None
    order: int

    @property
    def require_model(self) -> PrimeModel:
        if self.model is None:
            raise GridError("this command needs --model")
        return self.model


# --------------------------------------------------------------------------
# argument handling
# --------------------------------------------------------------------------


def _int_arg(text: str) -> int:
    """Checkpoint bound: accepts 50000 or 5e4."""
    try:
        value = int(float(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
    return value


def _resolve_model(spec: str | None) -> PrimeModel | None:
    if spec is None:
        return None
    if os.path.exists(spec) or os.sep in spec or spec.endswith(".model"):
        return load_model_file(spec)
    return builtin(spec)


def _build_grid(lo: int, hi: int, points: int, spacing: str) -> CheckpointGrid:
    if spacing == "log":
        return CheckpointGrid.log_spaced(lo, hi, points)
    if lo > hi:
        raise GridError(f"grid needs lo <= hi, got [{lo}, {hi}]")
    pts = sorted({int(round(x)) for x in np.linspace(lo, hi, points)})
    return CheckpointGrid.from_points(pts)


def _add_grid_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--from", dest="lo", type=_int_arg, default=None,
                    metavar="N", help="first checkpoint (accepts 1e4 forms)")
    sp.add_argument("--to", dest="hi", type=_int_arg, default=None,
                    metavar="N", help="last checkpoint")
    sp.add_argument("--points", type=int, default=None, metavar="K",
                    help="number of checkpoints")
    sp.add_argument("--spacing", choices=("log", "linear"), default="log",
                    help="checkpoint spacing (default log)")


def _add_common_flags(sp: argparse.ArgumentParser, *, model_help: str) -> None:
    sp.add_argument("--model", default=None, metavar="NAME|FILE",
                    help=model_help + f" (built-ins: {', '.join(BUILTIN_NAMES)};"
                    " or a path to a model file)")
    sp.add_argument("--format", dest="fmt", choices=("table", "csv", "json"),
                    default="table", help="output format (default table)")
    sp.add_argument("--cache", default=None, metavar="DIR",
                    help="checkpoint-report cache directory "
                    "(default: $PRIMEMEAN_CACHE; unset means no persistence)")
    sp.add_argument("--parallel", action=argparse.BooleanOptionalAction,
                    default=True, help="thread the segment sweep")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="primemean",
        description="Geometric means of multiplicative functions via exact "
                    "prime sums, with certified constants.")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("constants", help="print certified constants")
    _add_common_flags(sp, model_help="also print this model's constants")
    sp.add_argument("--precision", type=float, default=None, metavar="EPS",
                    help="target tail bound for the base constants")
    sp.add_argument("--aj", type=int, default=2, metavar="R",
                    help="print tail-integral coefficients a_1..a_R (default 2)")

    sp = sub.add_parser("geomean", help="log G_f(n) over a checkpoint grid")
    _add_common_flags(sp, model_help="multiplicative function (required)")
    _add_grid_flags(sp)
    sp.add_argument("--n", type=_int_arg, default=None,
                    help="single checkpoint instead of a grid")
    sp.add_argument("--oracle", action="store_true",
                    help="add a per-integer brute-force column and require "
                    f"agreement (grids up to {ORACLE_TABLE_CAP:.0e})")

    sp = sub.add_parser("sums", help="streamed checkpoint report")
    _add_common_flags(sp, model_help="multiplicative function (required)")
    _add_grid_flags(sp)

    sp = sub.add_parser("verify", help="run named verification checks")
    _add_common_flags(sp, model_help="(unused; checks fix their own models)")
    _add_grid_flags(sp)
    sp.add_argument("--check", action="append", default=None,
                    metavar="NAME", help="check to run (repeatable; default: "
                    "all acceptance checks). Names: "
                    + ", ".join(checks.CHECK_NAMES))

    sp = sub.add_parser("fit", help="fit expansion coefficients to residuals")
    _add_common_flags(sp, model_help="model for qsum-residual (default kappa)")
    _add_grid_flags(sp)
    sp.add_argument("--target", required=True, choices=FIT_TARGETS,
                    help="which residual series to fit")
    sp.add_argument("--order", type=int, default=1,
                    help="number of 1/log^j basis terms (default 1)")

    return p


def _config_from(args: argparse.Namespace, *, build_grid: bool) -> RunConfig:
    cache_dir = args.cache if args.cache is not None \
        else os.environ.get("PRIMEMEAN_CACHE") or None
    model = _resolve_model(args.model)
    grid = None
    if build_grid:
        lo_def, hi_def, pts_def = _DEFAULT_GRID
        hi = args.hi or max(hi_def, args.lo or 0)
        lo = args.lo or (lo_def if lo_def <= hi else max(2, hi // 100))
        grid = _build_grid(lo, hi, args.points or pts_def, args.spacing)
    return RunConfig(
        model=model,
        grid=grid,
        fmt=args.fmt,
        cache_dir=cache_dir,
        parallel=args.parallel,
        precision=getattr(args, "precision", None),
        order=getattr(args, "order", 1),
    )


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------


def _fmt_cell(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.15g}"
    return str(x)


def emit_rows(fmt: str, header: tuple, rows: list, out=None) -> None:
    """Write one rectangular result set as table, CSV (RFC 4180) or JSON."""
    out = out or sys.stdout
    if fmt == "csv":
        w = csv.writer(out, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt_cell(c) for c in row])
    elif fmt == "json":
        json.dump([dict(zip(header, row)) for row in rows], out, indent=2)
        out.write("\n")
    else:
        cells = [list(map(_fmt_cell, row)) for row in rows]
        widths = [max(len(h), *(len(r[i]) for r in cells)) if cells else len(h)
                  for i, h in enumerate(header)]
        out.write("  ".join(h.rjust(w) for h, w in zip(header, widths)).rstrip() + "\n")
        for row in cells:
            out.write("  ".join(c.rjust(w) for c, w in zip(row, widths)).rstrip() + "\n")


# --------------------------------------------------------------------------
# cached checkpoint reports
# --------------------------------------------------------------------------


def cached_report(model: PrimeModel, grid: CheckpointGrid,
                  cache_dir: str | None, parallel: bool) -> primesums.SumsReport:
    """Compute or reload a checkpoint report, persisting when caching is on.

    A malformed or mismatched cache file is silently recomputed and
    overwritten; reloads are bit-identical to fresh runs by construction.
    """
    if cache_dir is None:
        return primesums.sums_stream(model, grid, parallel=parallel)
    path = primesums.default_cache_path(cache_dir, model, grid)
    if os.path.exists(path):
        try:
            return primesums.load_report(path, model, grid)
        except CacheFormatError:
            pass
    report = primesums.sums_stream(model, grid, parallel=parallel)
    os.makedirs(cache_dir, exist_ok=True)
    primesums.save_report(path, report)
    return report


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_constants(cfg: RunConfig, aj: int) -> int:
    kw = {} if cfg.precision is None else {"target_precision": cfg.precision}
    rows = []

    def put(name: str, cv: constants.ConstantValue) -> None:
        rows.append((name, cv.value, cv.tail_bound, cv.method))

    put("gamma", constants.euler_gamma(**kw))
    put("meissel_mertens_M", constants.meissel_mertens(**kw))
    put("mertens_E", constants.mertens_e(**kw))
    for j in range(1, aj + 1):
        put(f"a_{j}", constants.saffari_a(j, **kw))
    if cfg.model is not None:
        model = cfg.model
        put(f"C_Q[{model.name}]", constants.c_q(model, **kw))
        put(f"rho_f[{model.name}]", constants.rho_f(model, **kw))
        put(f"eta0[{model.name}]", constants.eta0(model, **kw))
        put(f"leading_constant[{model.name}]",
            constants.leading_constant(model, **kw))
    emit_rows(cfg.fmt, ("constant", "value", "tail_bound", "method"), rows)
    return 0


def _scaled_ratio(model: PrimeModel, n: int, log_gmean: float) -> float:
    """G_f(n) / (n^d (log n)^log alpha); the quantity that tends to a limit."""
    la = math.log(model.alpha)
    if n == 1:
        return 1.0 if la == 0.0 else math.nan
    return math.exp(log_gmean - model.d * math.log(n)
                    - la * math.log(math.log(n)))


def cmd_geomean(cfg: RunConfig, n: int | None, oracle: bool) -> int:
    model = cfg.require_model
    if n is not None:
        grid = CheckpointGrid.from_points([n]) if n > 1 else None
    else:
        grid = cfg.grid
    predicted = constants.leading_constant(model)

    if grid is None:   # the trivial n = 1 point: empty product, G = 1
        points, log_means = [1], [0.0]
    else:
        report = cached_report(model, grid, cfg.cache_dir, cfg.parallel)
        points = list(grid.points)
        log_means = [report.n_log_g[i] / p for i, p in enumerate(points)]

    oracle_means = None
    if oracle:
        n_max = points[-1]
        if n_max > ORACLE_TABLE_CAP:
            raise GridError(
                f"--oracle builds a factor table; grid must stay <= "
                f"{ORACLE_TABLE_CAP:.0e}, got {n_max}")
        from .sieve import spf_build
        table = spf_build(n_max)
        oracle_means = [
            primesums.log_geomean_bruteforce(model, p, table) / p
            for p in points]
        for p, a, b in zip(points, log_means, oracle_means):
            if abs(a - b) * p > 1e-9 * max(1, p):
                raise AccumulationError(
                    f"identity and brute-force geometric means disagree at "
                    f"n={p}: {a!r} vs {b!r}")

    header = ["n", "log_geomean", "scaled_ratio", "predicted", "abs_diff",
              "predicted_tail"]
    if oracle:
        header.insert(2, "log_geomean_bruteforce")
    rows = []
    for i, p in enumerate(points):
        ratio = _scaled_ratio(model, p, log_means[i])
        row = [p, log_means[i], ratio, predicted.value,
               abs(ratio - predicted.value), predicted.tail_bound]
        if oracle:
            row.insert(2, oracle_means[i])
        rows.append(tuple(row))
    emit_rows(cfg.fmt, tuple(header), rows)
    return 0


def cmd_sums(cfg: RunConfig) -> int:
    model = cfg.require_model
    grid = cfg.grid
    report = cached_report(model, grid, cfg.cache_dir, cfg.parallel)
    header = ("n", "s1") + primesums.FLOAT_FIELDS + ("n_log_g", "err_bound")
    rows = []
    for i, n in enumerate(grid.points):
        rows.append((n, report.s1[i])
                    + tuple(report.field(f)[i] for f in primesums.FLOAT_FIELDS)
                    + (report.n_log_g[i], report.err_bound[i]))
    emit_rows(cfg.fmt, header, rows)
    return 0


def cmd_verify(cfg: RunConfig, names, args) -> int:
    opts = checks.CheckOptions(lo=args.lo, hi=args.hi, points=args.points)
    ctx = checks.CheckContext(parallel=cfg.parallel)
    results = [checks.run_check(name, ctx, opts)
               for name in (names or checks.ACCEPTANCE_CHECKS)]
    if cfg.fmt == "table":
        for r in results:
            print(r.line())
    else:
        header = ("check", "passed", "elapsed_s", "detail")
        rows = [(r.name, r.passed, r.elapsed, r.detail) for r in results]
        emit_rows(cfg.fmt, header, rows)
    return 0 if all(r.passed for r in results) else 1


def _fit_samples(target: str, model: PrimeModel,
                 report: primesums.SumsReport, points) -> list:
    m_const = constants.meissel_mertens().value
    la = math.log(model.alpha)
    samples = []
    for i, n in enumerate(points):
        ln = math.log(n)
        if target == "s1-residual":
            y = report.s1[i] / n - math.log(ln) - m_const
        elif target == "s2-residual":
            y = report.s2[i] / n - ln
        elif target == "u-residual":
            y = report.u_of_x[i] / n - 1.0
        else:  # qsum-residual: the prime part of the decomposition only
            qsum = la * report.s1[i] + model.d * report.s2[i] + report.s3[i]
            y = qsum / n - model.d * ln - la * math.log(ln)
        samples.append((n, y))
    return samples


def cmd_fit(cfg: RunConfig, target: str) -> int:
    # s1/s2/u residuals are model-independent facts about the integers, so
    # any model's report carries them; qsum-residual uses the chosen model.
    model = cfg.model if cfg.model is not None else builtin("kappa")
    grid = cfg.grid
    report = cached_report(model, grid, cfg.cache_dir, cfg.parallel)
    samples = _fit_samples(target, model, report, grid.points)
    with_constant = target in ("s2-residual", "qsum-residual")
    fit = series.fit_coefficients(samples, order=cfg.order,
                                  include_constant=with_constant)
    rows = []
    if fit.constant is not None:
        rows.append(("constant", fit.constant))
    for j, c in enumerate(fit.coefficients, start=1):
        rows.append((f"coef[1/log^{j}]", c))
    rows.append(("residual_norm", fit.residual_norm))
    rows.append(("condition_estimate", fit.condition_estimate))
    rows.append(("window_lo", fit.window[0]))
    rows.append(("window_hi", fit.window[1]))
    rows.append(("window_points", float(fit.window[2])))
    emit_rows(cfg.fmt, ("term", "value"), rows)
    return 0


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from(
            args, build_grid=args.command in ("geomean", "sums", "fit"))
        if args.command == "constants":
            return cmd_constants(cfg, args.aj)
        if args.command == "geomean":
            return cmd_geomean(cfg, args.n, args.oracle)
        if args.command == "sums":
            return cmd_sums(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, args.check, args)
        if args.command == "fit":
            return cmd_fit(cfg, args.target)
        raise AssertionError(f"unhandled command {args.command!r}")
    except GridError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ModelSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PrecisionError as exc:
        extra = "" if exc.achievable is None \
            else f" (achievable: {exc.achievable:.3g})"
        print(f"error: {exc}{extra}", file=sys.stderr)
        return 3
    except UnknownCheckError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except IllConditionedFitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5
    except PrimemeanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
