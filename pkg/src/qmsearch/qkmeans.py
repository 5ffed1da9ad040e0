"""K-means where each nearest-centroid choice is made by quantum minimum search.

For every point, the squared distances to the K centroids are quantised to
integers and loaded into a QRAM. The QRAM address that minimum search
returns is the point's label. The update step is the usual mean.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .qms import DescentTrace, QmsConfig, run_descent
from .qram import plan_dataset
from .seeding import derive_seed


@dataclass(frozen=True)
class QuantizationSpec:
    """``scale`` is squared-distance units per integer level.

    ``scale=None`` derives it for each assignment round from the largest
    squared distance seen in that round. ``spare_address_bits`` pads each
    point's distance QRAM to ``4 * 2**ceil(log2 K)`` slots by default, so at
    most a quarter of the addresses are ever marked.
    """

    m_bits: int = 8
    scale: float | None = None
    spare_address_bits: int = 2

    def __post_init__(self):
        if self.m_bits < 2:
            raise ValueError("m_bits must be >= 2")
        if self.scale is not None and not self.scale > 0:
            raise ValueError("scale must be positive")
        if self.spare_address_bits < 0:
            raise ValueError("spare_address_bits must be >= 0")

    @property
    def top_level(self) -> int:
        # 2**m - 1 is the QRAM padding sentinel and is never emitted
        return (1 << self.m_bits) - 2

    def fitted(self, sq_dists: np.ndarray) -> QuantizationSpec:
        if self.scale is not None:
            return self
        peak = float(np.max(sq_dists)) if np.size(sq_dists) else 0.0
        return replace(self, scale=peak / self.top_level if peak > 0 else 1.0)


@dataclass(frozen=True)
class Assignment:
    labels: np.ndarray
    objective: float
    traces: tuple[DescentTrace, ...] = field(default=(), repr=False, compare=False)


@dataclass
class LloydResult:
    centroids: np.ndarray
    assignment: Assignment
    iterations: int
    objective_history: list[float]


def as_points(pts) -> np.ndarray:
    arr = np.asarray(pts, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or len(arr) == 0:
        raise ValueError("expected a nonempty (num_points, dim) array")
    if not np.all(np.isfinite(arr)):
        raise ValueError("coordinates must be finite")
    return arr


def squared_distances(pts: np.ndarray, cents: np.ndarray) -> np.ndarray:
    diff = pts[:, None, :] - cents[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def objective(pts, cents, labels) -> float:
    pts, cents = as_points(pts), as_points(cents)
    d = pts - cents[np.asarray(labels)]
    return float(np.sum(d * d))


def quantize_distances(point, cents, q: QuantizationSpec) -> list[int]:
    cents = as_points(cents)
    point = np.asarray(point, dtype=float).reshape(1, -1)
    d2 = squared_distances(point, cents)[0]
    q = q.fitted(d2)
    levels = np.clip(np.rint(d2 / q.scale), 0, q.top_level)
    return [int(v) for v in levels]


def _label_from_trace(trace: DescentTrace, levels: list[int]) -> int:
    """Lowest real address holding the result, else the one nearest to it.

    A failed descent can end on a value no centroid holds. The nearest held
    value (lowest address on ties) is then the best available guess.
    """
    K = len(levels)
    real = [a for a in trace.result_addresses if a < K]
    if real:
        return real[0]
    return min(range(K), key=lambda j: (abs(levels[j] - trace.result_value), j))


def assign_via_qms(pts, cents, q: QuantizationSpec, cfg: QmsConfig, *, keep_traces=False) -> Assignment:
    pts, cents = as_points(pts), as_points(cents)
    K = len(cents)
    if K < 1:
        raise ValueError("need at least one centroid")
    d2 = squared_distances(pts, cents)
    q = q.fitted(d2)
    labels = np.zeros(len(pts), dtype=int)
    traces = []
    for i, row in enumerate(d2):
        levels = np.clip(np.rint(row / q.scale), 0, q.top_level).astype(int)
        ds = plan_dataset(levels.tolist(), m=q.m_bits, spare_address_bits=q.spare_address_bits)
        seed = None if cfg.seed is None else derive_seed(cfg.seed, "kmeans-point", i)
        trace = run_descent(ds, replace(cfg, seed=seed))
        labels[i] = _label_from_trace(trace, levels.tolist())
        if keep_traces:
            traces.append(trace)
    return Assignment(labels, objective(pts, cents, labels), tuple(traces))


def assign_classical(pts, cents, q: QuantizationSpec | None = None, cfg=None, **_) -> Assignment:
    """Exact argmin on real distances; first index wins ties."""
    pts, cents = as_points(pts), as_points(cents)
    labels = np.argmin(squared_distances(pts, cents), axis=1)
    return Assignment(labels, objective(pts, cents, labels))


def update_centroids(pts, asg: Assignment, K: int, previous=None) -> np.ndarray:
    """Cluster means; an empty cluster keeps its ``previous`` centroid."""
    pts = as_points(pts)
    out = np.zeros((K, pts.shape[1])) if previous is None else as_points(previous).copy()
    for j in range(K):
        members = pts[asg.labels == j]
        if len(members):
            out[j] = members.mean(axis=0)
        elif previous is None:
            raise ValueError(f"cluster {j} is empty and no previous centroid was given")
    return out


def init_centroids(pts, K: int, seed) -> np.ndarray:
    pts = as_points(pts)
    if not 1 <= K <= len(pts):
        raise ValueError(f"K={K} must be between 1 and the number of points ({len(pts)})")
    idx = np.random.default_rng(seed).choice(len(pts), size=K, replace=False)
    return pts[idx].copy()


def run_lloyd(
    pts,
    K: int,
    q: QuantizationSpec = QuantizationSpec(),
    cfg: QmsConfig = QmsConfig(),
    max_iters: int = 50,
    tol: float = 1e-6,
    *,
    init=None,
    assign: Callable[..., Assignment] = assign_via_qms,
    keep_traces: bool = False,
) -> LloydResult:
    """Alternate assignment and mean update until the objective stalls.

    Stops when the objective drops by less than ``tol`` between rounds, or
    after ``max_iters`` assignment rounds. The returned assignment is the
    last one, made against the centroids that preceded the final update.
    """
    pts = as_points(pts)
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if K > len(pts):
        raise ValueError(f"K={K} exceeds the number of points ({len(pts)})")
    if init is None:
        init_seed = None if cfg.seed is None else derive_seed(cfg.seed, "kmeans-init")
        cents = init_centroids(pts, K, init_seed)
    else:
        cents = as_points(init).copy()
        if len(cents) != K:
            raise ValueError("init must contain K centroids")

    history: list[float] = []
    asg = None
    it = 0
    while it < max_iters:
        round_seed = None if cfg.seed is None else derive_seed(cfg.seed, "kmeans-round", it)
        asg = assign(pts, cents, q, replace(cfg, seed=round_seed), keep_traces=keep_traces)
        history.append(asg.objective)
        cents = update_centroids(pts, asg, K, previous=cents)
        it += 1
        if len(history) > 1 and history[-2] - history[-1] < tol:
            break
    return LloydResult(cents, asg, it, history)
