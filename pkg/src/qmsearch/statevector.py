"""Dense statevector simulator.

Only the gates needed by the minimum-search circuits are provided: Hadamard,
X and multicontrolled X with per-control polarity. Qubit 0 is the most
significant bit of the basis-state index.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

# 2**24 complex128 amplitudes is 256 MiB; one working copy plus a cached
# prepared state stays comfortably inside a laptop's memory.
MAX_QUBITS = 24

NORM_ATOL = 1e-10

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


class ResourceError(RuntimeError):
    """Requested register does not fit the simulator's qubit cap."""


class Polarity(enum.Enum):
    ON_ONE = 1
    ON_ZERO = 0


@dataclass(frozen=True)
class Control:
    qubit: int
    polarity: Polarity = Polarity.ON_ONE


class GateKind(enum.Enum):
    H = "h"
    X = "x"
    MCX = "mcx"


@dataclass(frozen=True)
class GateOp:
    kind: GateKind
    target: int
    controls: tuple[Control, ...] = ()

    def __post_init__(self):
        if self.kind is not GateKind.MCX and self.controls:
            raise ValueError(f"{self.kind.name} takes no controls")
        seen = [c.qubit for c in self.controls]
        if len(set(seen)) != len(seen):
            raise ValueError(f"duplicate control qubits in {seen}")
        if self.target in seen:
            raise ValueError(f"target {self.target} is also a control")

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.target, *(c.qubit for c in self.controls))


def h(qubit: int) -> GateOp:
    return GateOp(GateKind.H, qubit)


def x(qubit: int) -> GateOp:
    return GateOp(GateKind.X, qubit)


def mcx(target: int, controls: Iterable[Control | tuple[int, int]] = ()) -> GateOp:
    """Multicontrolled X. Controls may be given as ``(qubit, bit)`` pairs."""
    ctl = tuple(
        c if isinstance(c, Control) else Control(c[0], Polarity(c[1]))
        for c in controls
    )
    return GateOp(GateKind.MCX, target, ctl)


def check_qubit_count(num_qubits: int) -> None:
    if num_qubits > MAX_QUBITS:
        raise ResourceError(
            f"{num_qubits} qubits exceeds the simulator cap of {MAX_QUBITS}"
        )


class StateVector:
    """Complex amplitudes over ``num_qubits`` qubits, mutated in place by gates."""

    def __init__(self, num_qubits: int, amplitudes: np.ndarray | None = None):
        if num_qubits < 1:
            raise ValueError("need at least one qubit")
        check_qubit_count(num_qubits)
        self.num_qubits = num_qubits
        if amplitudes is None:
            amplitudes = np.zeros(1 << num_qubits, dtype=np.complex128)
            amplitudes[0] = 1.0
        else:
            amplitudes = np.ascontiguousarray(amplitudes, dtype=np.complex128)
            if amplitudes.shape != (1 << num_qubits,):
                raise ValueError(
                    f"expected {1 << num_qubits} amplitudes, got {amplitudes.shape}"
                )
        self.amplitudes = amplitudes

    @classmethod
    def basis(cls, num_qubits: int, index: int) -> StateVector:
        sv = cls(num_qubits)
        sv.amplitudes[0] = 0.0
        sv.amplitudes[index] = 1.0
        return sv

    @classmethod
    def from_bits(cls, bits: str) -> StateVector:
        return cls.basis(len(bits), int(bits, 2))

    def copy(self) -> StateVector:
        return StateVector(self.num_qubits, self.amplitudes.copy())

    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def probs(self) -> np.ndarray:
        return self.amplitudes.real**2 + self.amplitudes.imag**2

    def apply(self, op: GateOp) -> StateVector:
        apply_gate(self, op)
        return self

    def apply_all(self, ops: Iterable[GateOp]) -> StateVector:
        for op in ops:
            apply_gate(self, op)
        return self

    def __repr__(self):
        return f"StateVector(num_qubits={self.num_qubits})"


def _check_index(state: StateVector, q: int) -> None:
    if not 0 <= q < state.num_qubits:
        raise ValueError(f"qubit {q} out of range for {state.num_qubits} qubits")


def apply_gate(state: StateVector, op: GateOp) -> StateVector:
    """Apply ``op`` to ``state`` in place and return it."""
    for q in op.qubits:
        _check_index(state, q)
    n = state.num_qubits
    amps = state.amplitudes
    if op.kind is GateKind.H:
        v = amps.reshape(1 << op.target, 2, 1 << (n - op.target - 1))
        a0 = v[:, 0, :].copy()
        a1 = v[:, 1, :]
        v[:, 0, :] = (a0 + a1) * _INV_SQRT2
        v[:, 1, :] = (a0 - a1) * _INV_SQRT2
        return state

    # X and MCX: swap the target=0 and target=1 slices of the sub-tensor
    # selected by the controls.
    t = amps.reshape((2,) * n)
    idx: list = [slice(None)] * n
    for c in op.controls:
        idx[c.qubit] = c.polarity.value
    i0 = list(idx)
    i1 = list(idx)
    i0[op.target] = 0
    i1[op.target] = 1
    i0, i1 = tuple(i0), tuple(i1)
    tmp = t[i0].copy()
    t[i0] = t[i1]
    t[i1] = tmp
    return state


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def sample_index(state: StateVector, seed=None) -> int:
    """Draw one computational-basis index with Born-rule probabilities."""
    p = state.probs()
    total = float(p.sum())
    if abs(total - 1.0) > 1e-8:
        raise ValueError(f"state is not normalized (norm^2 = {total})")
    cdf = np.cumsum(p)
    r = _rng(seed).random() * cdf[-1]
    return min(int(np.searchsorted(cdf, r, side="right")), len(p) - 1)


def measure_all(state: StateVector, seed=None) -> tuple[int, StateVector]:
    """Measure every qubit. Returns the outcome index and the collapsed state.

    ``seed`` may be an int, ``None`` or a ``numpy.random.Generator``; passing a
    generator advances it, so repeated calls draw fresh outcomes.
    """
    i = sample_index(state, seed)
    return i, StateVector.basis(state.num_qubits, i)


def probabilities(state: StateVector, qubits: Sequence[int]) -> np.ndarray:
    """Marginal distribution over ``qubits``.

    Entry ``j`` is the probability that the listed qubits read the bits of
    ``j``, with ``qubits[0]`` as the most significant bit.
    """
    qubits = list(qubits)
    for q in qubits:
        _check_index(state, q)
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"duplicate qubits in {qubits}")
    n = state.num_qubits
    p = state.probs().reshape((2,) * n)
    others = tuple(q for q in range(n) if q not in qubits)
    marg = p.sum(axis=others) if others else p
    # remaining axes are in ascending qubit order; reorder to the request
    kept = sorted(qubits)
    marg = np.transpose(marg, [kept.index(q) for q in qubits])
    return np.ascontiguousarray(marg).reshape(-1)


def new_uniform_with_ancilla(n: int, m: int) -> StateVector:
    """Uniform address register, zeroed data register and an ancilla in |->.

    Layout is ``[address (n) | data (m) | ancilla]``.
    """
    if n < 1 or m < 1:
        raise ValueError(f"need n >= 1 and m >= 1, got n={n}, m={m}")
    num = n + m + 1
    check_qubit_count(num)
    amps = np.zeros(1 << num, dtype=np.complex128)
    amp = 1.0 / math.sqrt(float(1 << (n + 1)))
    base = np.arange(1 << n, dtype=np.int64) << (m + 1)
    amps[base] = amp
    amps[base | 1] = -amp
    return StateVector(num, amps)
