"""Command-line front end: ``absrank <subcommand> ...``.

Exit codes: 0 success, 2 usage error, 3 data or domain error, 4 capability
error. Outputs go to ``--out`` (default ``$ABSRANK_OUTPUT_DIR`` or the
current directory) together with a ``manifest.json`` describing the run.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .bayes import bayes_compare
from .bench import load_problem, optimum
from .cdf import AbsRankFn, EmpiricalCDF, load_cdf, save_cdf
from .core import PerformanceMatrix, load_matrix, project, save_matrix
from .errors import AbsrankError, CapabilityError, DataError, DomainError, NotFoundError
from .niia import METHODS, gen_paradox_datasets, niia_check
from .normalize import absolute_normalize
from .sampling import COARSE_LOG2N, FINE_LOG2N, sample_function, save_samples, select_delta
from .sobol import TABLE_ID, SobolConfig
from .stats import CONVENTIONS, DEFAULT_CONVENTION, npht_compare

__all__ = ["main", "build_parser"]

ENV_OUTPUT_DIR = "ABSRANK_OUTPUT_DIR"
EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CAPABILITY = 0, 2, 3, 4

log = logging.getLogger("absrank")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- helpers


def _pairs(text: str | None) -> list[tuple[str, str]]:
    if not text:
        return []
    out = []
    for chunk in text.split(";"):
        parts = [p.strip() for p in chunk.split(",") if p.strip()]
        if len(parts) != 2:
            raise UsageError(f"pair {chunk!r} must be two labels separated by a comma")
        out.append((parts[0], parts[1]))
    return out


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _labels(text: str | None) -> list[str] | None:
    if text is None:
        return None
    return [x.strip() for x in text.split(",") if x.strip()]


def _existing(path: str, what: str = "input") -> Path:
    p = Path(path)
    if not p.exists():
        raise NotFoundError(f"{what} {path} does not exist")
    return p


def _out_dir(args) -> Path:
    d = Path(args.out or os.environ.get(ENV_OUTPUT_DIR) or ".")
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write_manifest(out: Path, args, outputs: Sequence[Path]) -> None:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out")}
    manifest = {
        "tool": "absrank",
        "version": __version__,
        "command": args.command,
        "config": config,
        "sobol_table": TABLE_ID,
        "numpy": np.__version__,
        "outputs": sorted(p.name for p in outputs),
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load(args) -> PerformanceMatrix:
    M = load_matrix(_existing(args.csv), lower_is_better=not args.higher_is_better)
    keep = _labels(getattr(args, "keep", None))
    return project(M, keep) if keep else M


def _load_cdfs(directory: str, problems: Sequence[str]) -> dict[str, AbsRankFn]:
    d = _existing(directory, "CDF directory")
    cdfs = {}
    missing = []
    for p in problems:
        f = d / f"{p}.absrank.json"
        if f.exists():
            cdfs[p] = load_cdf(f)
        else:
            missing.append(p)
    if missing:
        raise NotFoundError(f"no {{problem}}.absrank.json in {directory} for {missing}")
    return cdfs


def _fmt_p(p: float, log10_p: float) -> str:
    if p == 0.0:
        return f"0.0 (log10 p = {log10_p:.4f})"
    return f"{p:.4g}"


def _rank_text(x: float, display: str) -> str:
    return f"{100.0 * x:.4f}%" if display == "percent" else f"{x:.6f}"


# ---------------------------------------------------------------- commands


def cmd_gen_niia(args) -> list[Path]:
    out = _out_dir(args)
    d1, d2 = gen_paradox_datasets(args.problems, args.first)
    paths = [out / "dataset1.csv", out / "dataset2.csv"]
    save_matrix(d1, paths[0])
    save_matrix(d2, paths[1])
    print(f"wrote {paths[0]} ({d1.n} x {d1.p}) and {paths[1]} ({d2.n} x {d2.p})")
    return paths


def cmd_npht(args) -> list[Path]:
    pairs = _pairs(args.pairs)
    M = _load(args)
    rep = npht_compare(M, pairs, args.alpha, args.convention)
    if args.json:
        print(json.dumps(rep.to_dict(), indent=2))
        return []
    print(f"algorithms: {M.n}   problems: {M.p}   alpha: {args.alpha}   convention: {args.convention}")
    print(f"Friedman chi2 = {rep.friedman.statistic:.6g}   df = {rep.friedman.df}   "
          f"p = {_fmt_p(rep.friedman.p, rep.friedman.log10_p)}")
    print(f"critical difference = {rep.cd:.6g}")
    if pairs:
        print(f"{'pair':<16}{'avg rank a':>12}{'avg rank b':>12}{'|delta|':>10}  result")
        for v in rep.pairwise:
            print(f"{v.a + ',' + v.b:<16}{v.avg_rank_a:>12.4g}{v.avg_rank_b:>12.4g}{v.delta:>10.4g}  {v.result}")
    return []


def cmd_bayes(args) -> list[Path]:
    pairs = _pairs(args.pairs)
    M = _load(args)
    fit, verdicts = bayes_compare(M, pairs, prior_weight=args.prior_weight)
    if args.json:
        print(json.dumps({"fit": fit.to_dict(), "pairs": [v.to_dict() for v in verdicts]}, indent=2))
        return []
    state = "converged" if fit.converged else "NOT converged"
    print(f"Bradley-Terry fit: {fit.iterations} iterations, {state}")
    if fit.unbounded:
        print(f"unbounded strengths (no losses): {', '.join(fit.unbounded)}")
    for v in verdicts:
        print(f"theta_{v.a} = {v.theta_a:.6g}   theta_{v.b} = {v.theta_b:.6g}")
        print(f"P({v.a} > {v.b}) = {v.p_ab:.6g}   P({v.b} > {v.a}) = {v.p_ba:.6g}   {v.result}")
    return []


def cmd_sample(args) -> list[Path]:
    problem = load_problem(_existing(args.problem))
    out = _out_dir(args)
    if args.region is None:
        region = np.vstack([problem.lo, problem.hi])
    else:
        vals = _floats(args.region)
        if len(vals) != 2:
            raise UsageError("--region takes lo,hi")
        region = vals
    cfg = SobolConfig(problem.d, args.log2n, skip=args.skip, seed=args.seed)
    s = sample_function(problem, region, cfg)
    v = s.to_cdf(args.known_min, args.known_max)
    sp, vp = out / f"{problem.label}.samples.json", out / f"{problem.label}.absrank.json"
    save_samples(s, sp)
    save_cdf(v, vp)
    print(f"{problem.label}: {s.n} samples, min {s.values[0]:.6g}, max {s.values[-1]:.6g}")
    print(f"wrote {sp} and {vp}")
    return [sp, vp]


def cmd_absrank(args) -> list[Path]:
    M = _load(args)
    cdfs = _load_cdfs(args.cdf_dir, M.problems)
    out = _out_dir(args)
    V = absolute_normalize(M, cdfs)
    agg = np.mean if args.aggregate == "mean" else np.median
    aar = agg(V.values, axis=1)
    vp, ap = out / "absrank.csv", out / "aar.csv"
    save_matrix(V, vp)
    with open(ap, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["algorithm", "AAR"])
        for a, x in zip(M.algorithms, aar):
            w.writerow([a, f"{x:.16e}"])
    width = max(len(a) for a in M.algorithms) + 2
    print("algorithm".ljust(width) + "".join(f"{p:>14}" for p in M.problems) + f"{'AAR':>14}{'rank':>6}")
    order = np.argsort(aar, kind="stable")
    place = np.empty(M.n, dtype=int)
    place[order] = np.arange(1, M.n + 1)
    for i, a in enumerate(M.algorithms):
        cells = "".join(f"{_rank_text(x, args.display):>14}" for x in V.values[i])
        print(a.ljust(width) + cells + f"{_rank_text(aar[i], args.display):>14}{place[i]:>6}")
    return [vp, ap]


def cmd_select_delta(args) -> list[Path]:
    problems = [load_problem(_existing(p)) for p in args.problems]
    metrics = load_matrix(_existing(args.metrics, "metrics file"))
    deltas = _floats(args.deltas)
    if not deltas:
        raise UsageError("--deltas needs at least one value")
    out = _out_dir(args)
    results = []
    for prob in problems:
        col = metrics.column(prob.label)
        cfg = SobolConfig(prob.d, args.log2n, skip=args.skip, seed=args.seed)
        results.append(select_delta(prob, optimum(prob), col, deltas, cfg))
    scale = 100.0 if args.display == "percent" else 1.0
    print("delta".ljust(10) + "".join(f"{r.problem:>16}" for r in results))
    for k, d in enumerate(deltas):
        cells = []
        for r in results:
            mark = "*" if r.best == d else " "
            flag = "~" if r.clipped[k] else ""
            cells.append(f"{r.scores[k] * scale:>14.6g}{flag}{mark}".rjust(16))
        print(f"{d:<10g}" + "".join(cells))
    print("* best range per problem; ~ hypercube clipped to the domain")
    path = out / "select_delta.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([r.to_dict() for r in results], fh, indent=2)
    return [path]


def cmd_niia_check(args) -> list[Path]:
    M = _load(args)
    pair = _pairs(args.pair)
    if len(pair) != 1:
        raise UsageError("--pair takes exactly one pair A,B")
    cdfs = _load_cdfs(args.cdf_dir, M.problems) if args.method == "absolute" else None
    subsets = [_labels(s) for s in args.subset] if args.subset else None
    if subsets is None and args.leave_k_out is None and not args.exhaustive:
        raise UsageError("choose --leave-k-out K, --subset or --exhaustive")
    reports = niia_check(
        M,
        pair[0],
        args.method,
        subsets=subsets,
        leave_k_out=None if subsets else args.leave_k_out,
        size_limit=args.size_limit,
        cdfs=cdfs,
        gated=args.gated,
        alpha=args.alpha,
        convention=args.convention,
        prior_weight=args.prior_weight,
    )
    flips = [r for r in reports if r.flipped]
    if args.json:
        print(json.dumps({"checked": len(reports), "flips": [r.to_dict() for r in flips]}, indent=2))
        return []
    a, b = pair[0]
    full = reports[0].direction_full if reports else "?"
    print(f"method {args.method}: verdict on {a},{b} for all {M.n} algorithms is '{full}'")
    print(f"checked {len(reports)} subsets, {len(flips)} flip(s)")
    for r in flips[: args.show]:
        print(f"  flip: '{r.direction_full}' -> '{r.direction_subset}' on subset of {len(r.subset)}: "
              + ",".join(r.subset))
    if len(flips) > args.show:
        print(f"  ... {len(flips) - args.show} more")
    return []


def _curve_range(v: AbsRankFn) -> tuple[float, float]:
    if isinstance(v, EmpiricalCDF):
        # the tails are synthetic; plot the sampled range plus any known bounds
        lo = v.known_min if v.known_min is not None else float(v.knots[0])
        hi = v.known_max if v.known_max is not None else float(v.knots[-1])
        return lo, hi
    lo, hi = v.support()
    if not math.isfinite(lo):
        lo = v.quantile(1e-6)
    if not math.isfinite(hi):
        hi = v.quantile(1.0 - 1e-6)
    return lo, hi


def cmd_cdf_curve(args) -> list[Path]:
    v = load_cdf(_existing(args.cdf))
    if args.points < 2:
        raise UsageError("--points must be at least 2")
    lo, hi = _curve_range(v)
    if args.lo is not None:
        lo = args.lo
    if args.hi is not None:
        hi = args.hi
    if not lo < hi:
        raise DomainError("curve range needs lo < hi")
    t = np.linspace(lo, hi, args.points)
    y = np.asarray(v(t))
    sink = open(args.output, "w", newline="", encoding="utf-8") if args.output else sys.stdout
    try:
        w = csv.writer(sink)
        w.writerow(["t", "v"])
        for a, b in zip(t, y):
            w.writerow([repr(float(a)), repr(float(b))])
    finally:
        if args.output:
            sink.close()
    return [Path(args.output)] if args.output else []


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="absrank", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to standard error")
    sub = ap.add_subparsers(dest="command", required=True, metavar="command")

    def common(p, matrix: bool = True):
        p.add_argument("--out", help=f"output directory (default ${ENV_OUTPUT_DIR} or .)")
        if matrix:
            p.add_argument("csv", help="performance matrix CSV (algorithms x problems)")
            p.add_argument("--higher-is-better", action="store_true", help="metric is maximized")
            p.add_argument("--keep", help="comma-separated algorithms to restrict to")

    def testing(p):
        p.add_argument("--alpha", type=float, default=0.001)
        p.add_argument("--convention", choices=sorted(CONVENTIONS), default=DEFAULT_CONVENTION)

    p = sub.add_parser("gen-niia", help="write the two paradox datasets")
    common(p, matrix=False)
    p.add_argument("--problems", type=int, default=500)
    p.add_argument("--first", type=int, default=100, help="problems in the first block")
    p.set_defaults(func=cmd_gen_niia)

    p = sub.add_parser("npht", help="Friedman test with Bonferroni-Dunn critical difference")
    common(p)
    testing(p)
    p.add_argument("--pairs", help="A,B[;C,D...]")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_npht)

    p = sub.add_parser("bayes", help="Bradley-Terry pairwise probabilities")
    common(p)
    p.add_argument("--pairs", help="A,B[;C,D...]")
    p.add_argument("--prior-weight", type=float, default=0.0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bayes)

    p = sub.add_parser("sample", help="sample a problem and build its empirical absolute rank")
    common(p, matrix=False)
    p.add_argument("problem", help="problem descriptor JSON")
    p.add_argument("--region", help="lo,hi for every coordinate, e.g. --region=-1e-4,1e-4 (default: whole domain)")
    p.add_argument("--log2n", type=int, default=FINE_LOG2N)
    p.add_argument("--skip", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--known-min", type=float)
    p.add_argument("--known-max", type=float)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("absrank", help="absolute-rank a matrix and aggregate per algorithm")
    common(p)
    p.add_argument("--cdf-dir", required=True, help="directory of {problem}.absrank.json files")
    p.add_argument("--display", choices=("percent", "fraction"), default="percent")
    p.add_argument("--aggregate", choices=("mean", "median"), default="mean")
    p.set_defaults(func=cmd_absrank)

    p = sub.add_parser("select-delta", help="score candidate sampling ranges")
    common(p, matrix=False)
    p.add_argument("problems", nargs="+", help="problem descriptor JSON files")
    p.add_argument("--metrics", required=True, help="metric matrix CSV, one column per problem label")
    p.add_argument("--deltas", default="0.1,0.2,0.3,0.4,0.5")
    p.add_argument("--log2n", type=int, default=COARSE_LOG2N)
    p.add_argument("--skip", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--display", choices=("percent", "fraction"), default="percent")
    p.set_defaults(func=cmd_select_delta)

    p = sub.add_parser("niia-check", help="look for verdict flips under subset removal")
    common(p)
    testing(p)
    p.add_argument("--method", choices=METHODS, default="avg-rank")
    p.add_argument("--pair", required=True, help="A,B")
    p.add_argument("--leave-k-out", type=int)
    p.add_argument("--subset", action="append", help="explicit subset A,B,C (repeatable)")
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--size-limit", type=int, default=20)
    p.add_argument("--gated", action="store_true", help="use the significance-gated rank verdict")
    p.add_argument("--prior-weight", type=float, default=0.0)
    p.add_argument("--cdf-dir", help="needed by --method absolute")
    p.add_argument("--show", type=int, default=20, help="flips to list")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_niia_check)

    p = sub.add_parser("cdf-curve", help="emit (t, v(t)) pairs as CSV")
    p.add_argument("cdf", help=".absrank.json artifact")
    p.add_argument("--points", type=int, default=512)
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("-o", "--output", help="write CSV here instead of standard output")
    p.set_defaults(func=cmd_cdf_curve, out=None)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if args.command == "niia-check" and args.method == "absolute" and not args.cdf_dir:
        print("absrank: error: --method absolute needs --cdf-dir", file=sys.stderr)
        return EXIT_USAGE
    try:
        outputs = args.func(args)
        if outputs:
            _write_manifest(outputs[0].parent, args, outputs)
        elif args.out or os.environ.get(ENV_OUTPUT_DIR):
            _write_manifest(_out_dir(args), args, [])
    except UsageError as exc:
        print(f"absrank: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapabilityError as exc:
        print(f"absrank: capability error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except (DataError, DomainError, OSError) as exc:
        print(f"absrank: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except AbsrankError as exc:
        print(f"absrank: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
