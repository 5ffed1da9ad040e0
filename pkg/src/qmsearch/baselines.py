"""Classical minimum-search baselines and the query-count benchmark."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import astuple, dataclass, fields
from typing import IO, Iterable, Sequence

import numpy as np

from .ledger import QueryLedger
from .qms import IterationMode, QmsConfig, run_descent
from .qram import plan_dataset
from .seeding import derive_seed
from .statevector import MAX_QUBITS, ResourceError

__all__ = [
    "QueryLedger",
    "BenchRecord",
    "classical_min_scan",
    "classical_minmax_pairwise",
    "durr_hoyer_reference",
    "bench_sweep",
    "emit_bench_csv",
]


def _nonempty(values: Sequence[int]) -> None:
    if len(values) == 0:
        raise ValueError("empty list")


def classical_min_scan(values: Sequence[int], ledger: QueryLedger) -> tuple[int, int]:
    """Linear scan; returns the minimum and the first index holding it."""
    _nonempty(values)
    best, best_i = values[0], 0
    for i in range(1, len(values)):
        ledger.comparisons += 1
        if values[i] < best:
            best, best_i = values[i], i
    return best, best_i


def classical_minmax_pairwise(values: Sequence[int], ledger: QueryLedger) -> tuple[int, int]:
    """Min and max together using ceil(3N/2) - 2 comparisons."""
    _nonempty(values)
    N = len(values)
    if N % 2:
        lo = hi = values[0]
        start = 1
    else:
        ledger.comparisons += 1
        lo, hi = (values[0], values[1]) if values[0] < values[1] else (values[1], values[0])
        start = 2
    for i in range(start, N, 2):
        a, b = values[i], values[i + 1]
        ledger.comparisons += 1
        small, big = (a, b) if a < b else (b, a)
        ledger.comparisons += 2
        if small < lo:
            lo = small
        if big > hi:
            hi = big
    return lo, hi


def durr_hoyer_reference(
    values: Sequence[int],
    seed=None,
    ledger: QueryLedger | None = None,
    first_index: int | None = None,
) -> int:
    """Query-count model of Durr-Hoyer minimum finding.

    No circuit is simulated. Each round charges ceil(sqrt(N/t)) oracle queries,
    where t counts the values below the current threshold, and then moves the
    threshold to one of those values chosen uniformly at random, as an ideal
    Grover search would.
    """
    _nonempty(values)
    ledger = ledger if ledger is not None else QueryLedger()
    rng = np.random.default_rng(seed)
    N = len(values)
    i = int(rng.integers(N)) if first_index is None else first_index
    threshold = values[i]
    while True:
        below = [v for v in values if v < threshold]
        if not below:
            return threshold
        ledger.oracle_queries += math.ceil(math.sqrt(N / len(below)))
        threshold = below[int(rng.integers(len(below)))]


@dataclass(frozen=True)
class BenchRecord:
    N: int
    m: int
    classical_lo: int
    classical_hi: int
    quantum_queries: float
    c_q: int


def bench_sweep(
    n_range: Iterable[int],
    m: int,
    trials: int,
    seed: int,
    *,
    mode: IterationMode | str = IterationMode.BBHT,
    retries: int = 3,
) -> list[BenchRecord]:
    """Mean oracle queries of the quantum search against classical counters.

    Datasets are ``2**n`` uniform random ``m``-bit integers, so no padding is
    involved.
    """
    n_range = sorted(set(n_range))
    if trials < 1:
        raise ValueError("trials must be >= 1")
    for n in n_range:
        if n < 1:
            raise ValueError(f"address width must be >= 1, got {n}")
        if n + m + 1 > MAX_QUBITS:
            raise ResourceError(
                f"n={n} needs {n + m + 1} qubits, cap is {MAX_QUBITS}"
            )
    records = []
    for n in n_range:
        N = 1 << n
        queries = []
        for trial in range(trials):
            rng = np.random.default_rng(derive_seed(seed, "bench", n, "trial", trial))
            vals = [int(v) for v in rng.integers(0, 1 << m, size=N)]
            lo, hi = QueryLedger(), QueryLedger()
            classical_min_scan(vals, lo)
            classical_minmax_pairwise(vals, hi)
            cfg = QmsConfig(retries, mode, derive_seed(seed, "bench", n, "descent", trial))
            queries.append(run_descent(plan_dataset(vals, m=m), cfg).total_queries)
        # the classical counters depend only on N, so the last trial's stand
        records.append(
            BenchRecord(N, m, lo.comparisons, hi.comparisons, float(np.mean(queries)), m)
        )
    return records


CSV_HEADER = [f.name for f in fields(BenchRecord)]


def emit_bench_csv(
    records: Sequence[BenchRecord], path: str | os.PathLike | IO[str], meta: dict | None = None
) -> None:
    """Write ``records`` as CSV, optionally preceded by a ``# key=value`` line.

    ``path`` may also be an open text stream.
    """
    if not records:
        raise ValueError("no records to write")
    if hasattr(path, "write"):
        _write_csv(records, path, meta)
    else:
        with open(path, "w", newline="") as fh:
            _write_csv(records, fh, meta)


def _write_csv(records, fh, meta):
    if meta:
        fh.write("# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in sorted(records, key=lambda r: r.N):
        row = list(astuple(r))
        row[CSV_HEADER.index("quantum_queries")] = f"{r.quantum_queries:.4f}"
        w.writerow(row)
