"""Command-line entry point (``nmutp``).

Every subcommand is a thin adapter over :mod:`nmutp.harness` or
:mod:`nmutp.analysis`; it resolves the configuration, runs, and writes
files into ``--out`` (default: ``$NMUTP_OUT_DIR`` or the working directory).

Exit codes: 0 success, 1 a result failed its tolerance, 2 usage error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import secrets
import sys
import time

import numpy as np

from . import io
from .analysis import TABLE1_CASES, TABLE1_REFERENCE, CaseStudy, find_example, scan
from .exceptions import NmutpError, ValidationError
from .harness import (
    ExperimentConfig,
    default_sweep_size,
    emit_strength_samples,
    run_dimension_sweep,
    run_precision_validation,
    run_table1,
    run_td_histogram,
)
from .linalg import PAULIS
from .sampling import SlotKind, StreamPlan, sample_states
from .states import density_to_bloch

log = logging.getLogger("nmutp")

OUT_ENV = "NMUTP_OUT_DIR"
EXIT_OK, EXIT_TOLERANCE, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

TABLE1_HELP = "\n".join(f"  {i:2d}  {c.label}" for i, c in enumerate(TABLE1_CASES, 1))

CASE_CSV_HEADER = ["case", "d", "n_total", "n_flagged", "percentage", "g_mean", "g_std", "g_max", "seed"]
SWEEP_CSV_HEADER = ["d", "n_per_rep", "reps", "fraction_min", "fraction_mean", "fraction_max",
                    "fraction_se", "g_mean", "g_mean_se"]


class UsageError(NmutpError):
    pass


def parse_rows(text):
    """``"all"``, ``"3"`` or ``"1,4-6"`` to a sorted list of 1-based rows."""
    if text.strip().lower() == "all":
        return list(range(1, len(TABLE1_CASES) + 1))
    rows = set()
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if "-" in part:
                lo, hi = (int(v) for v in part.split("-", 1))
                rows.update(range(lo, hi + 1))
            else:
                rows.add(int(part))
        except ValueError:
            raise UsageError(f"bad row specification {part!r}") from None
    bad = [r for r in rows if not 1 <= r <= len(TABLE1_CASES)]
    if bad or not rows:
        raise UsageError(f"rows must lie in 1..{len(TABLE1_CASES)}, got {text!r}")
    return sorted(rows)


def parse_dims(text):
    """``"2:6"`` (inclusive), ``"2,3,5"`` or ``"4"``."""
    try:
        if ":" in text:
            lo, hi = (int(v) for v in text.split(":", 1))
            dims = list(range(lo, hi + 1))
        else:
            dims = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad dimension list {text!r}") from None
    if not dims or min(dims) < 2:
        raise UsageError(f"dimensions must be >= 2, got {text!r}")
    return sorted(set(dims))


def parse_floats(text, count):
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"expected {count} comma separated numbers, got {text!r}") from None
    if len(values) != count:
        raise UsageError(f"expected {count} comma separated numbers, got {text!r}")
    return values


def _add_common(p, n_default=None):
    p.add_argument("--config", help="JSON file with ExperimentConfig fields; flags override it")
    p.add_argument("--seed", type=int, help="master seed (printed when generated)")
    p.add_argument("--n", type=int, default=n_default, help="number of quartets / pairs")
    p.add_argument("--streams", type=int, help="logical worker streams (results do not depend on it)")
    p.add_argument("--jobs", type=int, help="worker processes")
    p.add_argument("--block-size", type=int, help="draws per seeded block")
    p.add_argument("--bitgen", choices=["pcg64", "mt19937"])
    p.add_argument("--backend", choices=["auto", "jacobi", "lapack"], help="eigensolver")
    p.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or .)")
    p.add_argument("--record-runtime", action="store_true",
                   help="add wall-clock runtime to JSON summaries (breaks byte-identical reruns)")


def _add_case(p):
    p.add_argument("--row", type=int, help="Table 1 row (1-11)")
    p.add_argument("--case", help="four comma separated slot kinds, e.g. mixed,pure,mixed,max-mixed")
    p.add_argument("--d", type=int, default=2, help="dimension for --case")
    p.add_argument("--spectrum", choices=["uniform", "trigonometric"], default="uniform",
                   help="spectrum law for mixed-spectral slots")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nmutp",
        description="Trace-distance non-monotonicity under tensor products: experiments and tools.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("table1", help="Table 1 case studies",
                       formatter_class=argparse.RawDescriptionHelpFormatter,
                       epilog="rows (top to bottom):\n" + TABLE1_HELP)
    p.add_argument("--rows", default="all", help='"all", "7" or "1,4-6"')
    _add_common(p)

    p = sub.add_parser("sweep", help="flagged fraction and strength versus dimension")
    p.add_argument("--dims", default="2:6", help='"2:6" or "2,3,5"')
    p.add_argument("--reps", type=int, help="repetitions per dimension (default 3)")
    p.add_argument("--spectrum", choices=["uniform", "trigonometric"])
    _add_common(p)

    p = sub.add_parser("hist", help="histogram of qubit trace distances")
    p.add_argument("--pair", default="pure,pure", help="mixed,mixed | mixed,pure | pure,pure")
    p.add_argument("--bins", type=int)
    _add_common(p)

    p = sub.add_parser("strength", help="strength samples of flagged quartets")
    _add_case(p)
    p.add_argument("--limit", type=int, default=5000, help="maximum samples written")
    _add_common(p)

    p = sub.add_parser("scan", help="per-quartet NDJSON records")
    _add_case(p)
    p.add_argument("--flagged-only", action="store_true")
    _add_common(p)

    p = sub.add_parser("validate", help="numeric vs closed-form precision check")
    p.add_argument("--n-collinear", type=int, default=10**5)
    p.add_argument("--n-pure", type=int, default=10**5, help="pure qubit pairs")
    p.add_argument("--n-qudit", type=int, default=10**4, help="pure pairs per d >= 3")
    p.add_argument("--d-max", type=int, default=8)
    p.add_argument("--tolerance", type=float, default=1e-12)
    p.add_argument("--seed", type=int)
    p.add_argument("--backend", choices=["jacobi", "lapack"], default="jacobi")
    p.add_argument("--out", default=None)

    p = sub.add_parser("find-example", help="search a flagged quartet near four target distances")
    _add_case(p)
    p.add_argument("--target", default="0.80,0.76,0.87,1.07", help="d1,d2,dt1,dt2")
    p.add_argument("--tol", type=float, default=0.02, help="max-norm tolerance")
    p.add_argument("--max-draws", type=int, default=10**7)
    _add_common(p)

    p = sub.add_parser("sample", help="draw random states")
    p.add_argument("--kind", default="mixed-ball", help="mixed-ball | mixed-spectral | pure | max-mixed")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--spectrum", choices=["uniform", "trigonometric"], default="uniform")
    _add_common(p, n_default=10)
    return parser


def _resolve_config(args, **extra):
    data = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
    flags = {
        "seed": getattr(args, "seed", None),
        "n_quartets": getattr(args, "n", None),
        "n_streams": getattr(args, "streams", None),
        "jobs": getattr(args, "jobs", None),
        "block_size": getattr(args, "block_size", None),
        "bitgen": getattr(args, "bitgen", None),
        "backend": getattr(args, "backend", None),
    }
    flags.update(extra)
    data.update({k: v for k, v in flags.items() if v is not None})
    if data.get("seed") is None:
        data["seed"] = secrets.randbits(63)
        print(f"seed: {data['seed']}", file=sys.stderr)
    cfg = ExperimentConfig.from_dict(data)
    log.info("resolved config: %s", io.dumps(cfg.to_dict()))
    return cfg


def _out_dir(args):
    out = args.out or os.environ.get(OUT_ENV) or "."
    os.makedirs(out, exist_ok=True)
    return out


def _case_from_args(args, default_row=None):
    if args.case:
        return CaseStudy.parse(args.case, args.d, args.spectrum)
    row = args.row if args.row is not None else default_row
    if row is None:
        raise UsageError("give --row or --case")
    if not 1 <= row <= len(TABLE1_CASES):
        raise UsageError(f"row must lie in 1..{len(TABLE1_CASES)}")
    return TABLE1_CASES[row - 1]


def _summary_row(s):
    return [s.label, s.dim, s.n_total, s.n_flagged, s.percentage, s.g_mean, s.g_std, s.g_max, s.seed]


def _runtime(doc, args, t0):
    if getattr(args, "record_runtime", False):
        doc["runtime_seconds"] = time.perf_counter() - t0
    return doc


def cmd_table1(args):
    t0 = time.perf_counter()
    rows = parse_rows(args.rows)
    cfg = _resolve_config(args)
    results = run_table1(cfg, rows)
    out = _out_dir(args)
    io.write_csv(os.path.join(out, "table1.csv"), CASE_CSV_HEADER, [_summary_row(s) for _, s in results])
    doc = {"config": cfg.to_dict(), "seed": cfg.seed,
           "cases": [dict(row=r, **s.as_dict()) for r, s in results]}
    io.write_json(os.path.join(out, "table1.json"), _runtime(doc, args, t0))
    print(f"{'row':>3}  {'case':<28} {'pct':>8} {'<G>':>9} {'dG':>9} {'Gmax':>9}   reference")
    for r, s in results:
        ref = TABLE1_REFERENCE[r - 1]
        g = [io.fmt6(v) if v is not None else "-" for v in (s.g_mean, s.g_std, s.g_max)]
        print(f"{r:>3}  {s.label:<28} {io.fmt6(s.percentage):>8} {g[0]:>9} {g[1]:>9} {g[2]:>9}   "
              f"{ref[0]} {ref[1]} {ref[2]} {ref[3]}")
    return EXIT_OK


def cmd_sweep(args):
    t0 = time.perf_counter()
    dims = parse_dims(args.dims)
    extra = {"dims": tuple(dims), "n_repetitions": args.reps, "spectrum": args.spectrum}
    cfg = _resolve_config(args, **extra)
    sizes = None if args.n is not None else {d: default_sweep_size(d) for d in dims}
    points = run_dimension_sweep(cfg, sizes=sizes)
    out = _out_dir(args)
    io.write_csv(os.path.join(out, "sweep.csv"), SWEEP_CSV_HEADER,
                 [[getattr(p, k) for k in SWEEP_CSV_HEADER] for p in points])
    doc = {"config": cfg.to_dict(), "seed": cfg.seed, "points": [p.as_dict() for p in points]}
    io.write_json(os.path.join(out, "sweep.json"), _runtime(doc, args, t0))
    for p in points:
        g = io.fmt6(p.g_mean) if p.g_mean is not None else "-"
        print(f"d={p.d:<3} fraction min/mean/max = {io.fmt6(p.fraction_min)} / "
              f"{io.fmt6(p.fraction_mean)} / {io.fmt6(p.fraction_max)}   <G> = {g}")
    return EXIT_OK


def cmd_hist(args):
    t0 = time.perf_counter()
    pair = tuple(SlotKind.parse(k) for k in args.pair.split(","))
    if len(pair) != 2:
        raise UsageError("--pair needs two state classes")
    cfg = _resolve_config(args, histogram_bins=args.bins)
    n = args.n if args.n is not None else cfg.n_quartets
    res = run_td_histogram(pair, n, cfg)
    out = _out_dir(args)
    io.write_csv(os.path.join(out, "hist.csv"), ["bin_lo", "bin_hi", "count"], res.histogram.rows())
    io.write_json(os.path.join(out, "hist.json"), _runtime(res.as_dict(), args, t0))
    print(f"pair {','.join(res.pair)}: mean {io.fmt6(res.mean)} +/- {io.fmt6(res.stderr)} (n={res.n})")
    return EXIT_OK


def cmd_strength(args):
    t0 = time.perf_counter()
    case = _case_from_args(args, default_row=1)
    cfg = _resolve_config(args)
    res = emit_strength_samples(case, cfg.n_quartets, cfg, limit=args.limit)
    out = _out_dir(args)
    io.write_csv(os.path.join(out, "strength.csv"), ["index", "stream_id", "g"], res.records)
    doc = {"case": case.label, "d": case.dim, "n_total": res.n_total, "n_flagged": res.n_flagged,
           "n_written": len(res.records), "band": res.band, "seed": cfg.seed}
    io.write_json(os.path.join(out, "strength.json"), _runtime(doc, args, t0))
    if res.band:
        print(f"{case.label}: {res.n_flagged} flagged, <G> = {io.fmt6(res.band['g_mean'])}, "
              f"band [{io.fmt6(res.band['lo'])}, {io.fmt6(res.band['hi'])}]")
    else:
        print(f"{case.label}: no flagged quartets")
    return EXIT_OK


def cmd_scan(args):
    case = _case_from_args(args, default_row=1)
    cfg = _resolve_config(args)
    records = (r.as_dict() for r in scan(case, cfg.n_quartets, cfg.plan, backend=cfg.backend)
               if r.metrics.nmutp or not args.flagged_only)
    path = os.path.join(_out_dir(args), "scan.ndjson")
    count = io.write_ndjson(path, records)
    print(f"wrote {count} records to {path}")
    return EXIT_OK


def cmd_validate(args):
    t0 = time.perf_counter()
    seed = args.seed
    if seed is None:
        seed = secrets.randbits(63)
        print(f"seed: {seed}", file=sys.stderr)
    log.info("resolved config: %s", io.dumps({
        "seed": seed, "n_collinear": args.n_collinear, "n_pure": args.n_pure,
        "n_qudit": args.n_qudit, "d_max": args.d_max, "tolerance": args.tolerance,
        "backend": args.backend}))
    report = run_precision_validation(seed, args.n_collinear, args.n_pure, args.n_qudit,
                                      args.d_max, args.backend, args.tolerance)
    io.write_json(os.path.join(_out_dir(args), "validate.json"), _runtime(report, args, t0))
    for e in report["classes"]:
        flag = "ok  " if e["passed"] else "FAIL"
        print(f"{flag} {e['kind']:<9} d={e['d']:<2} n={e['n']:<7} worst |numeric - analytic| = "
              f"{e['worst_error']:.3e}")
    return EXIT_OK if report["passed"] else EXIT_TOLERANCE


def _bloch_text(mat):
    b = density_to_bloch(mat)
    return f"r={b.norm:.4f} theta={b.theta:.4f} phi={b.phi:.4f}"


def cmd_find_example(args):
    t0 = time.perf_counter()
    case = _case_from_args(args, default_row=1)
    target = parse_floats(args.target, 4)
    cfg = _resolve_config(args)
    found = find_example(case, target, args.tol, cfg.plan, args.max_draws, backend=cfg.backend)
    doc = {"case": case.label, "target": target, "tol": args.tol, "max_draws": args.max_draws,
           "seed": cfg.seed, "found": found is not None}
    if found is not None:
        m = found.metrics
        doc.update(index=found.index, stream_id=found.stream_id, draws=found.draws,
                   metrics={"d1": m.d1, "d2": m.d2, "dt1": m.dt1, "dt2": m.dt2, "g": m.g},
                   states={name: {"real": x.mat.real, "imag": x.mat.imag}
                           for name, x in zip(("rho", "zeta", "xi", "eta"), found.quartet.states)})
        if case.dim == 2:
            doc["bloch"] = {}
            for name, x in zip(("rho", "zeta", "xi", "eta"), found.quartet.states):
                b = density_to_bloch(x)
                doc["bloch"][name] = {"norm": b.norm, "theta": b.theta, "phi": b.phi}
    io.write_json(os.path.join(_out_dir(args), "example.json"), _runtime(doc, args, t0))
    if found is None:
        print(f"no matching quartet within {args.max_draws} draws")
        return EXIT_TOLERANCE
    m = found.metrics
    print(f"found after {found.draws} draws (index {found.index})")
    if case.dim == 2:
        for name, x in zip(("rho", "zeta", "xi", "eta"), found.quartet.states):
            print(f"  {name:<4} {_bloch_text(x)}")
    print(f"  d(rho,zeta)={m.d1:.4f} d(xi,eta)={m.d2:.4f} "
          f"d2(rho,zeta)={m.dt1:.4f} d2(xi,eta)={m.dt2:.4f} G={m.g:.4f}")
    return EXIT_OK


def cmd_sample(args):
    kind = SlotKind.parse(args.kind)
    cfg = _resolve_config(args)
    n = cfg.n_quartets
    s = StreamPlan(cfg.seed, bitgen=cfg.bitgen).stream((0,), 0)
    mats = sample_states(kind, args.d, s, n, spectrum=args.spectrum)

    def records():
        for i, m in enumerate(mats):
            rec = {"index": i, "kind": kind.value, "d": args.d,
                   "purity": float(np.sum(np.abs(m) ** 2)), "real": m.real, "imag": m.imag}
            if args.d == 2:
                rec["bloch"] = np.einsum("ij,kji->k", m, PAULIS).real
            yield rec

    path = os.path.join(_out_dir(args), "samples.ndjson")
    count = io.write_ndjson(path, records())
    print(f"wrote {count} states to {path}")
    return EXIT_OK


COMMANDS = {
    "table1": cmd_table1,
    "sweep": cmd_sweep,
    "hist": cmd_hist,
    "strength": cmd_strength,
    "scan": cmd_scan,
    "validate": cmd_validate,
    "find-example": cmd_find_example,
    "sample": cmd_sample,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValidationError) as exc:
        print(f"nmutp {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"nmutp {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
