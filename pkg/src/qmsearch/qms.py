"""Quantum minimum search over a circuit QRAM.

The search fixes the minimum one bit at a time, from the most significant
data bit down. At each depth it tries to extend the accepted prefix with a 0.
A phase oracle marks the addresses whose value starts with that candidate
prefix, Grover iterations amplify them, and a measurement checks whether the
candidate is realised. If repeated checks fail, the bit is taken to be 1.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .ledger import QueryLedger
from .qram import Dataset, QramCircuit, build_ux, decode_index, encode
from .statevector import (
    Control,
    GateOp,
    Polarity,
    StateVector,
    h,
    mcx,
    new_uniform_with_ancilla,
    sample_index,
    x,
)

log = logging.getLogger(__name__)

BBHT_LAMBDA = 6 / 5
ATTEMPT_LIMIT = 32


class IterationMode(str, enum.Enum):
    SINGLE = "single"
    OPTIMAL = "optimal"
    BBHT = "bbht"


class Branch(str, enum.Enum):
    ACCEPT0 = "Accept0"
    FALLBACK1 = "Fallback1"


@dataclass(frozen=True)
class Prefix:
    """Most-significant-first bit string over the data register."""

    bits: str = ""

    def __post_init__(self):
        if any(b not in "01" for b in self.bits):
            raise ValueError(f"prefix must be a bit string, got {self.bits!r}")

    def __len__(self):
        return len(self.bits)

    def __str__(self):
        return self.bits

    def extend(self, bit: int) -> Prefix:
        return Prefix(self.bits + str(int(bit)))

    def matches(self, value: int, m: int) -> bool:
        """True if the ``m``-bit form of ``value`` starts with this prefix."""
        k = len(self.bits)
        if k == 0:
            return True
        return value >> (m - k) == int(self.bits, 2)

    def value(self) -> int:
        return int(self.bits, 2) if self.bits else 0


@dataclass(frozen=True)
class QmsConfig:
    retries: int = 3
    mode: IterationMode = IterationMode.BBHT
    seed: int | None = None

    def __post_init__(self):
        if self.retries < 1:
            raise ValueError("retries must be >= 1")
        object.__setattr__(self, "mode", IterationMode(self.mode))

    def to_json(self) -> dict[str, Any]:
        return {"retries": self.retries, "mode": self.mode.value, "seed": self.seed}


@dataclass(frozen=True)
class DescentStep:
    tried_prefix: Prefix
    marked_count: int
    grover_iterations: tuple[int, ...]
    measured_address: int
    measured_value: int
    branch: Branch

    @property
    def oracle_queries(self) -> int:
        return sum(self.grover_iterations)

    @property
    def attempts(self) -> int:
        return len(self.grover_iterations)

    def to_json(self) -> dict[str, Any]:
        return {
            "prefix": self.tried_prefix.bits,
            "t": self.marked_count,
            "k": list(self.grover_iterations),
            "measured_address": self.measured_address,
            "measured_value": self.measured_value,
            "branch": self.branch.value,
            "queries": self.oracle_queries,
        }


@dataclass(frozen=True)
class DescentTrace:
    steps: tuple[DescentStep, ...]
    result_value: int
    result_addresses: tuple[int, ...]
    m: int
    config: QmsConfig
    start_prefix: Prefix = Prefix()
    warnings: tuple[str, ...] = ()

    @property
    def total_queries(self) -> int:
        return sum(s.oracle_queries for s in self.steps)

    @property
    def found(self) -> bool:
        return bool(self.result_addresses)

    def accepted_prefixes(self) -> list[str]:
        """Accepted prefix after each step, e.g. ``['0', '01', '010', '0100']``."""
        out = []
        for s in self.steps:
            bits = s.tried_prefix.bits
            out.append(bits if s.branch is Branch.ACCEPT0 else bits[:-1] + "1")
        return out

    def result_bits(self) -> str:
        return format(self.result_value, f"0{self.m}b")

    def to_json(self) -> dict[str, Any]:
        return {
            "steps": [s.to_json() for s in self.steps],
            "result_value": self.result_value,
            "result_bits": self.result_bits(),
            "result_addresses": list(self.result_addresses),
            "total_queries": self.total_queries,
            "start_prefix": self.start_prefix.bits,
            "warnings": list(self.warnings),
            "config": self.config.to_json(),
            "seed": self.config.seed,
        }


# -- circuit pieces ---------------------------------------------------------


def build_prefix_oracle(prefix: Prefix | str, n: int, m: int) -> list[GateOp]:
    """Phase oracle marking values that start with ``prefix``.

    One MCX onto the |-> ancilla, controlled on the leading data qubits with
    polarity given by the prefix bits.
    """
    prefix = Prefix(prefix) if isinstance(prefix, str) else prefix
    if len(prefix) == 0:
        raise ValueError("empty prefix would mark every state")
    if len(prefix) > m:
        raise ValueError(f"prefix of length {len(prefix)} exceeds m={m}")
    ctl = [
        Control(n + i, Polarity.ON_ONE if b == "1" else Polarity.ON_ZERO)
        for i, b in enumerate(prefix.bits)
    ]
    return [mcx(n + m, ctl)]


def build_diffuser(n: int) -> list[GateOp]:
    """Reflection about the uniform superposition of the first ``n`` qubits.

    Implements ``-(2|s><s| - I)``; the overall sign is a global phase.
    """
    if n < 1:
        raise ValueError("diffuser needs n >= 1")
    last = n - 1
    ops = [h(q) for q in range(n)]
    ops += [x(q) for q in range(n)]
    ops += [h(last), mcx(last, [(q, 1) for q in range(last)]), h(last)]
    ops += [x(q) for q in range(n)]
    ops += [h(q) for q in range(n)]
    return ops


def build_qram_diffuser(circ: QramCircuit) -> list:
    """Reflection about the loaded QRAM state.

    The data register is entangled with the address register, so the address
    reflection alone does not amplify marked addresses. Unloading the data
    first and reloading it afterwards turns it into the reflection about
    ``sum_x |x>|y_x>``.
    """
    return [circ, *build_diffuser(circ.n), circ]


def _apply(state: StateVector, ops: Sequence) -> None:
    for op in ops:
        if isinstance(op, QramCircuit):
            op.apply_to(state)
        else:
            state.apply(op)


def grover_iteration(
    state: StateVector,
    oracle: Sequence,
    diffuser: Sequence,
    ledger: QueryLedger | None = None,
) -> StateVector:
    _apply(state, oracle)
    _apply(state, diffuser)
    if ledger is not None:
        ledger.oracle_queries += 1
    return state


def prepare_state(ds: Dataset, circ: QramCircuit | None = None) -> StateVector:
    circ = circ if circ is not None else build_ux(ds)
    return encode(new_uniform_with_ancilla(ds.n, ds.m), circ)


def marked_probability(state: StateVector, prefix: Prefix | str, n: int, m: int) -> float:
    """Total probability of basis states whose data register starts with ``prefix``."""
    prefix = Prefix(prefix) if isinstance(prefix, str) else prefix
    k = len(prefix)
    p = state.probs().reshape(1 << n, 1 << k, 1 << (m - k + 1))
    return float(p[:, prefix.value(), :].sum()) if k else float(p.sum())


# -- iteration schedules ----------------------------------------------------


def success_probability(t: int, N: int, k: int) -> float:
    if N < 1 or not 0 <= t <= N:
        raise ValueError(f"need 0 <= t <= N and N >= 1 (t={t}, N={N})")
    theta = math.asin(math.sqrt(t / N))
    return math.sin((2 * k + 1) * theta) ** 2


def bbht_cap(N: int) -> int:
    return math.isqrt(N - 1) + 1 if N > 1 else 1


def bbht_bound(attempt: int, N: int) -> int:
    """Exclusive upper bound on the iteration count for retry ``attempt``."""
    return min(math.ceil(BBHT_LAMBDA**attempt - 1e-12), bbht_cap(N))


def iteration_count(
    t_estimate: int,
    N: int,
    mode: IterationMode | str,
    *,
    attempt: int = 0,
    rng: np.random.Generator | None = None,
) -> int:
    """Number of Grover iterations for one search attempt.

    A return value of 0 means "measure without amplifying". In optimal mode
    that happens when nothing is marked, or when so much is marked that
    amplifying would lower the success probability.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    mode = IterationMode(mode)
    if mode is IterationMode.SINGLE:
        return 1
    if mode is IterationMode.OPTIMAL:
        if t_estimate <= 0:
            return 0
        x_opt = (math.pi / 4) * math.sqrt(N / t_estimate)
        cands = sorted({max(1, math.floor(x_opt)), max(1, math.ceil(x_opt))})
        best = max(cands, key=lambda k: success_probability(t_estimate, N, k))
        if success_probability(t_estimate, N, best) < t_estimate / N:
            return 0
        return best
    rng = rng if rng is not None else np.random.default_rng()
    return int(rng.integers(0, bbht_bound(attempt, N)))


# -- descent ----------------------------------------------------------------


def count_marked(ds: Dataset, prefix: Prefix) -> int:
    return sum(prefix.matches(v, ds.m) for v in ds.padded())


class _Searcher:
    """Prepared QRAM state plus the pieces reused by every search attempt."""

    def __init__(self, ds: Dataset, cfg: QmsConfig, rng: np.random.Generator, ledger: QueryLedger):
        self.ds = ds
        self.cfg = cfg
        self.rng = rng
        self.ledger = ledger
        self.circ = build_ux(ds)
        # |psi_1> is rebuilt for every attempt by copying this pristine state.
        self.base = prepare_state(ds, self.circ)
        self.diffuser = build_qram_diffuser(self.circ)

    def attempt(self, oracle, k: int) -> tuple[int, int]:
        state = self.base.copy()
        for _ in range(k):
            grover_iteration(state, oracle, self.diffuser, self.ledger)
        idx = sample_index(state, self.rng)
        addr, value, _ = decode_index(idx, self.ds.n, self.ds.m)
        return addr, value

    def search(self, prefix: Prefix) -> DescentStep:
        """Look for a value starting with ``prefix``; give up after R failures.

        In BBHT mode failures only count once the iteration bound has
        saturated at sqrt(N); before that the schedule is still growing.
        A measurement that lands on a padding address holds no dataset value
        and is inconclusive, so it does not count either. ``ATTEMPT_LIMIT * R``
        attempts end the step regardless.
        """
        ds, cfg = self.ds, self.cfg
        oracle = build_prefix_oracle(prefix, ds.n, ds.m)
        t = count_marked(ds, prefix)
        iters: list[int] = []
        failures = 0
        attempt = 0
        while True:
            k = iteration_count(t, ds.N, cfg.mode, attempt=attempt, rng=self.rng)
            addr, value = self.attempt(oracle, k)
            iters.append(k)
            if prefix.matches(value, ds.m):
                branch = Branch.ACCEPT0
                break
            saturated = cfg.mode is not IterationMode.BBHT or bbht_bound(attempt, ds.N) >= bbht_cap(ds.N)
            if saturated and addr < len(ds.values):
                failures += 1
            attempt += 1
            if failures >= cfg.retries or attempt >= ATTEMPT_LIMIT * cfg.retries:
                branch = Branch.FALLBACK1
                break
        return DescentStep(prefix, t, tuple(iters), addr, value, branch)


def warm_start_prefix(ds: Dataset, guess: int) -> Prefix:
    """Prefix implied by a known dataset value ``guess``.

    The minimum is at most ``guess``, so it shares the leading zeros of
    ``guess``'s ``m``-bit form.
    """
    if guess not in ds.values:
        raise ValueError(f"warm start {guess} is not a dataset value")
    return Prefix("0" * (ds.m - guess.bit_length()))


def run_descent(
    ds: Dataset,
    cfg: QmsConfig = QmsConfig(),
    *,
    warm_start: int | None = None,
    ledger: QueryLedger | None = None,
) -> DescentTrace:
    """Find the minimum of ``ds`` bit by bit, most significant bit first."""
    ledger = ledger if ledger is not None else QueryLedger()
    rng = np.random.default_rng(cfg.seed)
    searcher = _Searcher(ds, cfg, rng, ledger)

    start = Prefix() if warm_start is None else warm_start_prefix(ds, warm_start)
    accepted = start
    steps = []
    for _ in range(len(start), ds.m):
        cand = accepted.extend(0)
        step = searcher.search(cand)
        steps.append(step)
        accepted = cand if step.branch is Branch.ACCEPT0 else accepted.extend(1)
        log.debug("prefix %s -> %s (t=%d, k=%s)", cand, step.branch.value,
                  step.marked_count, step.grover_iterations)

    value = accepted.value()
    warnings = []
    if all(v == ds.pad_value for v in ds.values):
        warnings.append("every value equals the padding sentinel")
    addrs = tuple(ds.addresses_of(value))
    if not addrs:
        warnings.append(f"result {value} is not held by any address")
    return DescentTrace(tuple(steps), value, addrs, ds.m, cfg, start, tuple(warnings))


def verify_membership(ds: Dataset, value: int, cfg: QmsConfig = QmsConfig()) -> bool:
    """Grover search on the full ``m``-bit pattern of ``value``."""
    if not 0 <= value < 1 << ds.m:
        raise ValueError(f"value {value} does not fit in {ds.m} bits")
    searcher = _Searcher(ds, cfg, np.random.default_rng(cfg.seed), QueryLedger())
    step = searcher.search(Prefix(format(value, f"0{ds.m}b")))
    return step.branch is Branch.ACCEPT0


def run_maximum(ds: Dataset, cfg: QmsConfig = QmsConfig()) -> int:
    """Maximum via the minimum of the bitwise complements."""
    top = (1 << ds.m) - 1
    flipped = Dataset(tuple(top - v for v in ds.values), ds.m, ds.n, pad_value=top)
    return top - run_descent(flipped, cfg).result_value
