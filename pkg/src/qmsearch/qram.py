"""Circuit QRAM: write a classical dataset into the data register.

The encoder is a list of multicontrolled X gates. Each gate is controlled on
one full address pattern and flips one data qubit. The result is the state
``sum_x |x>|y_x>`` in the data register.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .statevector import (
    Control,
    GateKind,
    GateOp,
    Polarity,
    StateVector,
    check_qubit_count,
    mcx,
)

MAX_RAW_BITS = 64


@dataclass(frozen=True)
class Dataset:
    values: tuple[int, ...]
    m: int
    n: int
    pad_value: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        if self.pad_value is None:
            object.__setattr__(self, "pad_value", (1 << self.m) - 1)
        if self.m < 1 or self.n < 1:
            raise ValueError(f"widths must be >= 1 (n={self.n}, m={self.m})")
        if not self.values:
            raise ValueError("dataset is empty")
        if len(self.values) > 1 << self.n:
            raise ValueError(
                f"{len(self.values)} values do not fit {self.n} address qubits"
            )
        for v in (*self.values, self.pad_value):
            if not 0 <= v < 1 << self.m:
                raise ValueError(f"value {v} does not fit in {self.m} bits")

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def num_qubits(self) -> int:
        return self.n + self.m + 1

    def padded(self) -> tuple[int, ...]:
        """Values for all ``2**n`` addresses, unoccupied ones set to the pad value."""
        return self.values + (self.pad_value,) * (self.N - len(self.values))

    def addresses_of(self, value: int) -> list[int]:
        """Occupied addresses holding ``value``, ascending."""
        return [x for x, v in enumerate(self.values) if v == value]


def plan_dataset(
    raw: Iterable[int],
    m: int | None = None,
    pad_value: int | None = None,
    spare_address_bits: int = 0,
) -> Dataset:
    """Derive register widths for ``raw``.

    ``m`` defaults to the bit width of the largest value and ``n`` to
    ``ceil(log2(len(raw)))``, both at least 1. Pass ``m`` to force a wider
    data register. ``spare_address_bits`` widens the address register further;
    the extra slots hold the pad value, which keeps the marked fraction of a
    small dataset low enough for Grover amplification to be effective.
    """
    vals = [int(v) for v in raw]
    if not vals:
        raise ValueError("dataset is empty")
    for i, v in enumerate(vals):
        if v < 0:
            raise ValueError(f"value {v} at index {i} is negative")
        if v >= 1 << MAX_RAW_BITS:
            raise ValueError(f"value {v} at index {i} exceeds 64 bits")
    width = max(1, max(vals).bit_length())
    if m is None:
        m = width
    elif m < width:
        raise ValueError(f"m={m} is too narrow for maximum value {max(vals)}")
    n = max(1, (len(vals) - 1).bit_length()) + spare_address_bits
    return Dataset(tuple(vals), m=m, n=n, pad_value=pad_value)


@dataclass(frozen=True)
class QramCircuit:
    ops: tuple[GateOp, ...]
    n: int
    m: int

    def __post_init__(self):
        for op in self.ops:
            if op.kind is not GateKind.MCX:
                raise ValueError("QRAM circuits hold only MCX gates")
            if not self.n <= op.target < self.n + self.m:
                raise ValueError(f"target {op.target} is outside the data register")
            if any(not 0 <= c.qubit < self.n for c in op.controls):
                raise ValueError("controls must lie in the address register")

    @property
    def num_qubits(self) -> int:
        return self.n + self.m + 1

    @cached_property
    def address_masks(self) -> np.ndarray:
        """Per-address XOR mask the circuit applies to the full basis index."""
        addr = np.arange(1 << self.n, dtype=np.int64)
        masks = np.zeros(1 << self.n, dtype=np.int64)
        for op in self.ops:
            hit = np.ones(1 << self.n, dtype=bool)
            for c in op.controls:
                bit = (addr >> (self.n - 1 - c.qubit)) & 1
                hit &= bit == c.polarity.value
            masks[hit] ^= 1 << (self.num_qubits - 1 - op.target)
        return masks

    def apply_to(self, state: StateVector) -> StateVector:
        """Apply the whole circuit as a single basis permutation.

        Equivalent to applying ``ops`` gate by gate. The circuit is an
        involution, so the gather index is its own inverse.
        """
        _check_width(state, self)
        idx = np.arange(1 << self.num_qubits, dtype=np.int64)
        perm = idx ^ self.address_masks[idx >> (self.m + 1)]
        state.amplitudes[:] = state.amplitudes[perm]
        return state


def _check_width(state: StateVector, circ: QramCircuit) -> None:
    if state.num_qubits != circ.num_qubits:
        raise ValueError(
            f"state has {state.num_qubits} qubits, circuit expects "
            f"{circ.num_qubits} (n={circ.n}, m={circ.m}, +1 ancilla)"
        )


def address_controls(x: int, n: int) -> tuple[Control, ...]:
    return tuple(
        Control(i, Polarity.ON_ONE if (x >> (n - 1 - i)) & 1 else Polarity.ON_ZERO)
        for i in range(n)
    )


def build_ux(ds: Dataset) -> QramCircuit:
    check_qubit_count(ds.num_qubits)
    ops = []
    for x, y in enumerate(ds.padded()):
        ctl = address_controls(x, ds.n)
        for b in range(ds.m):
            if (y >> (ds.m - 1 - b)) & 1:
                ops.append(mcx(ds.n + b, ctl))
    return QramCircuit(tuple(ops), ds.n, ds.m)


def encode(state: StateVector, circ: QramCircuit, *, gatewise: bool = False) -> StateVector:
    """Load the dataset into ``state`` (the uniform, zero-data initial state).

    ``gatewise=True`` applies every MCX individually; the default uses the
    compiled permutation, which gives the same result.
    """
    _check_width(state, circ)
    if gatewise:
        return state.apply_all(circ.ops)
    return circ.apply_to(state)


def data_given_address(state: StateVector, n: int, m: int) -> np.ndarray:
    """Joint table ``P(address, data)`` with the ancilla traced out."""
    if state.num_qubits != n + m + 1:
        raise ValueError("register widths do not match the state")
    return state.probs().reshape(1 << n, 1 << m, 2).sum(axis=2)


def verify_roundtrip(state: StateVector, ds: Dataset, tol: float = 1e-10) -> bool:
    joint = data_given_address(state, ds.n, ds.m)
    for x, y in enumerate(ds.padded()):
        px = joint[x].sum()
        if px <= 0.0 or joint[x, y] / px <= 1.0 - tol:
            return False
    return True


def decode_index(index: int, n: int, m: int) -> tuple[int, int, int]:
    """Split a basis index into ``(address, data, ancilla)``."""
    return index >> (m + 1), (index >> 1) & ((1 << m) - 1), index & 1


def address_qubits(n: int) -> Sequence[int]:
    return range(n)


def data_qubits(n: int, m: int) -> Sequence[int]:
    return range(n, n + m)
