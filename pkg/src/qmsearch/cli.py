"""Command line entry point: ``qmsearch {min,verify,kmeans,bench}``.

Exit codes: 0 success, 2 input error, 3 resource error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import secrets
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from .baselines import bench_sweep, emit_bench_csv
from .qkmeans import QuantizationSpec, run_lloyd
from .qms import IterationMode, QmsConfig, run_descent, verify_membership, prepare_state
from .qram import MAX_RAW_BITS, plan_dataset, verify_roundtrip
from .statevector import ResourceError

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_RESOURCE = 3


class InputError(ValueError):
    pass


# -- input parsing ----------------------------------------------------------


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None


def parse_values(text: str) -> list[int]:
    """Unsigned integers, one per line, or a JSON array of them."""
    stripped = text.lstrip()
    if stripped.startswith("["):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise InputError(f"line {e.lineno}: invalid JSON ({e.msg})") from None
        if not isinstance(data, list):
            raise InputError("JSON input must be an array")
        out = []
        for i, v in enumerate(data):
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise InputError(f"element {i}: {v!r} is not an unsigned integer")
            if v >= 1 << MAX_RAW_BITS:
                raise InputError(f"element {i}: {v} exceeds 64 bits")
            out.append(v)
    else:
        out = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            if not s.isdigit():
                raise InputError(f"line {lineno}: {s!r} is not an unsigned integer")
            v = int(s)
            if v >= 1 << MAX_RAW_BITS:
                raise InputError(f"line {lineno}: {v} exceeds 64 bits")
            out.append(v)
    if not out:
        raise InputError("no values in input")
    return out


def parse_points(text: str) -> np.ndarray:
    rows = []
    dim = None
    for row_no, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
            continue
        try:
            coords = [float(c) for c in row]
        except ValueError:
            raise InputError(f"row {row_no}: non-numeric field in {row!r}") from None
        if not all(math.isfinite(c) for c in coords):
            raise InputError(f"row {row_no}: coordinates must be finite")
        if dim is None:
            dim = len(coords)
        elif len(coords) != dim:
            raise InputError(f"row {row_no}: expected {dim} columns, got {len(coords)}")
        rows.append(coords)
    if not rows:
        raise InputError("no points in input")
    return np.array(rows, dtype=float)


# -- output helpers ---------------------------------------------------------


@contextmanager
def _sink(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _dump_json(obj, path: str | None) -> None:
    with _sink(path) as fh:
        json.dump(obj, fh, indent=2, sort_keys=False)
        fh.write("\n")


def _config(args) -> QmsConfig:
    return QmsConfig(retries=args.retries, mode=IterationMode(args.mode), seed=args.seed)


# -- commands ---------------------------------------------------------------


def cmd_min(args) -> int:
    vals = parse_values(_read_text(args.input))
    ds = _plan(vals, args.bits)
    cfg = _config(args)
    trace = run_descent(ds, cfg)
    print(f"minimum: {trace.result_value}")
    print(f"addresses: {' '.join(map(str, trace.result_addresses))}")
    print(f"total_queries: {trace.total_queries}")
    print(f"seed: {cfg.seed}")
    for w in trace.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if args.trace:
        _dump_json(trace.to_json(), args.output)
    elif args.output:
        summary = trace.to_json()
        del summary["steps"]
        _dump_json(summary, args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    vals = parse_values(_read_text(args.input))
    ds = _plan(vals, args.bits)
    cfg = _config(args)
    roundtrip = verify_roundtrip(prepare_state(ds), ds)
    print(f"qram_roundtrip: {'ok' if roundtrip else 'FAILED'}")
    members = {}
    for v in args.values:
        if v >= 1 << ds.m:
            raise InputError(f"value {v} does not fit in m={ds.m} bits")
        members[str(v)] = verify_membership(ds, v, cfg)
        print(f"member {v}: {str(members[str(v)]).lower()}")
    if args.output:
        _dump_json({
            "n": ds.n, "m": ds.m, "pad_value": ds.pad_value,
            "roundtrip": roundtrip, "membership": members,
            "config": cfg.to_json(), "seed": cfg.seed,
        }, args.output)
    return EXIT_OK if roundtrip else 1


def cmd_kmeans(args) -> int:
    pts = parse_points(_read_text(args.input))
    if not 1 <= args.k <= len(pts):
        raise InputError(f"--k {args.k} must be between 1 and the number of points ({len(pts)})")
    cfg = _config(args)
    q = QuantizationSpec(m_bits=args.bits if args.bits is not None else 8)
    res = run_lloyd(pts, args.k, q, cfg, max_iters=args.max_iters, tol=args.tol,
                    keep_traces=args.trace)
    out = {
        "centroids": res.centroids.tolist(),
        "labels": res.assignment.labels.tolist(),
        "objective": res.assignment.objective,
        "objective_history": res.objective_history,
        "iterations": res.iterations,
        "config": {**cfg.to_json(), "k": args.k, "bits": q.m_bits,
                   "max_iters": args.max_iters, "tol": args.tol},
        "seed": cfg.seed,
    }
    if args.trace:
        out["traces"] = [t.to_json() for t in res.assignment.traces]
    print(f"objective: {res.assignment.objective:.12g}")
    print(f"iterations: {res.iterations}")
    print(f"seed: {cfg.seed}")
    if args.output:
        _dump_json(out, args.output)
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.n_min > args.n_max:
        raise InputError("--n-min must not exceed --n-max")
    m = args.bits if args.bits is not None else 6
    records = bench_sweep(range(args.n_min, args.n_max + 1), m, args.trials, args.seed,
                          mode=args.mode, retries=args.retries)
    meta = {"seed": args.seed, "trials": args.trials, "mode": args.mode,
            "retries": args.retries, "distribution": f"uniform-{m}-bit"}
    if args.output:
        emit_bench_csv(records, args.output, meta)
    else:
        buf = io.StringIO()
        emit_bench_csv(records, buf, meta)
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def _plan(vals, bits):
    try:
        return plan_dataset(vals, m=bits)
    except ValueError as e:
        raise InputError(str(e)) from None


# -- argument parsing -------------------------------------------------------


def _common(p: argparse.ArgumentParser, *, input_required=True) -> None:
    if input_required:
        p.add_argument("--input", required=True, help="input file")
    p.add_argument("--output", help="output file (default: stdout where applicable)")
    p.add_argument("--seed", type=int, help="RNG seed (random if omitted; always reported)")
    p.add_argument("--retries", type=int, default=3, help="failed checks before a bit is set to 1")
    p.add_argument("--mode", choices=[m.value for m in IterationMode], default="bbht",
                   help="Grover iteration schedule")
    p.add_argument("--bits", type=int, help="data register width")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmsearch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("min", help="find the minimum of a list of unsigned integers")
    _common(p)
    p.add_argument("--trace", action="store_true", help="write the full descent trace as JSON")
    p.set_defaults(func=cmd_min)

    p = sub.add_parser("verify", help="check the QRAM encoding and membership of values")
    _common(p)
    p.add_argument("values", nargs="*", type=int, help="values to look up")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("kmeans", help="K-means with minimum search as the argmin")
    _common(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--max-iters", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--trace", action="store_true", help="include per-point descent traces")
    p.set_defaults(func=cmd_kmeans)

    p = sub.add_parser("bench", help="query-count sweep against classical baselines")
    _common(p, input_required=False)
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--trials", type=int, default=20)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is None:
        args.seed = secrets.randbelow(1 << 32)
    if args.retries < 1:
        parser.error("--retries must be >= 1")
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except ResourceError as e:
        print(f"resource error: {e}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
