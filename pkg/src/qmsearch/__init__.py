"""Quantum minimum search over a circuit QRAM, simulated on a dense statevector."""

from .baselines import (
    BenchRecord,
    bench_sweep,
    classical_min_scan,
    classical_minmax_pairwise,
    durr_hoyer_reference,
    emit_bench_csv,
)
from .ledger import QueryLedger
from .qms import (
    Branch,
    DescentStep,
    DescentTrace,
    IterationMode,
    Prefix,
    QmsConfig,
    run_descent,
    success_probability,
    verify_membership,
)
from .qram import Dataset, QramCircuit, build_ux, encode, plan_dataset, verify_roundtrip
from .statevector import ResourceError, StateVector

__version__ = "0.1.0"
