"""Pattern matrices, dynamic graphs and maximum linkings.

A pattern matrix marks which entries are free parameters.  The dynamic
graph of ``(Abar, Cbar)`` unrolls the system digraph over ``n`` time layers:
state copies ``x_j^t`` (``t = 0..n-1``) and output copies ``y_k^t``
(``t = 1..n``), with an edge ``x_j^t -> x_k^(t+1)`` whenever ``Abar[k, j]`` is
free and ``x_j^t -> y_k^(t+1)`` whenever ``Cbar[k, j]`` is free.  A linking
is a set of vertex-disjoint paths from layer-0 states to output copies; its
maximum size is computed here as a unit-capacity max flow on the
vertex-split graph.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from funcobs.errors import InvalidInputError


@dataclass(frozen=True, eq=False)
class PatternMatrix:
    """Zero/free structure of a matrix; ``mask[i, j]`` is True for a free entry."""

    mask: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.mask)
        if raw.size == 0 and raw.ndim < 2:
            raw = raw.reshape(0, 0)
        if raw.ndim == 1:
            raw = raw.reshape(1, -1)
        if raw.ndim != 2:
            raise InvalidInputError(f"pattern must be 2-D, got shape {raw.shape}")
        if raw.dtype != bool and not np.isin(raw, (0, 1)).all():
            raise InvalidInputError("pattern entries must be 0 or 1")
        mask = raw.astype(bool)
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "PatternMatrix":
        return cls(np.zeros((rows, cols), dtype=bool))

    @classmethod
    def from_support(cls, rows: int, cols: int, support: Iterable[tuple[int, int]]) -> "PatternMatrix":
        mask = np.zeros((rows, cols), dtype=bool)
        for i, j in support:
            if not (0 <= i < rows and 0 <= j < cols):
                raise InvalidInputError(f"position {(i, j)} outside {rows}x{cols}")
            mask[i, j] = True
        return cls(mask)

    @property
    def shape(self) -> tuple[int, int]:
        return self.mask.shape

    @property
    def rows(self) -> int:
        return self.mask.shape[0]

    @property
    def cols(self) -> int:
        return self.mask.shape[1]

    @property
    def support(self) -> frozenset[tuple[int, int]]:
        return frozenset(zip(*map(lambda a: a.tolist(), np.nonzero(self.mask))))

    @property
    def T(self) -> "PatternMatrix":
        return PatternMatrix(self.mask.T)

    def take_rows(self, rows: Iterable[int]) -> "PatternMatrix":
        idx = sorted(rows)
        return PatternMatrix(self.mask[idx] if idx else np.zeros((0, self.cols), dtype=bool))

    def stack(self, other: "PatternMatrix") -> "PatternMatrix":
        return PatternMatrix(np.vstack([self.mask.reshape(-1, self.cols), other.mask.reshape(-1, self.cols)]))

    def __eq__(self, other):
        return isinstance(other, PatternMatrix) and self.shape == other.shape and bool((self.mask == other.mask).all())

    def __hash__(self):
        return hash((self.shape, self.mask.tobytes()))


def unit_rows(n: int, states: Iterable[int]) -> PatternMatrix:
    """Stacked ``e_i`` rows, one per listed state."""
    states = list(states)
    return PatternMatrix.from_support(len(states), n, [(k, i) for k, i in enumerate(states)])


class _FlowNetwork:
    """Residual graph for integer max flow (BFS augmenting paths)."""

    def __init__(self, size: int):
        self.adj: list[list[int]] = [[] for _ in range(size)]
        self.to: list[int] = []
        self.cap: list[int] = []

    def add_edge(self, u: int, v: int, cap: int = 1) -> None:
        self.adj[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(cap)
        self.adj[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(0)

    def max_flow(self, s: int, t: int) -> int:
        flow = 0
        while True:
            via = [-1] * len(self.adj)
            via[s] = -2
            queue = deque([s])
            while queue and via[t] == -1:
                u = queue.popleft()
                for e in self.adj[u]:
                    v = self.to[e]
                    if self.cap[e] > 0 and via[v] == -1:
                        via[v] = e
                        queue.append(v)
            if via[t] == -1:
                return flow
            v = t
            while v != s:
                e = via[v]
                self.cap[e] -= 1
                self.cap[e ^ 1] += 1
                v = self.to[e ^ 1]
            flow += 1


@dataclass(frozen=True)
class DynamicGraph:
    """Layered graph of ``(Abar, outputs)`` plus optional layer-1 sinks.

    ``extra_sinks`` lists free positions ``(m, i)``, each an edge from
    ``x_i^0`` to a one-off sink ``y~_m`` that exists only in layer 1.
    """

    Abar: PatternMatrix
    outputs: PatternMatrix
    extra_sinks: PatternMatrix | None = None

    def __post_init__(self):
        n = self.Abar.rows
        if self.Abar.shape != (n, n):
            raise InvalidInputError(f"Abar must be square, got {self.Abar.shape}")
        if self.outputs.cols != n and self.outputs.rows:
            raise InvalidInputError("output pattern must have n columns")
        if self.extra_sinks is not None and self.extra_sinks.rows and self.extra_sinks.cols != n:
            raise InvalidInputError("extra sink pattern must have n columns")

    @property
    def n(self) -> int:
        return self.Abar.rows

    def network(self, excluded: Iterable[int] = ()) -> tuple[_FlowNetwork, int, int]:
        """Fresh flow network; layer-0 copies of ``excluded`` get no source edge."""
        n, p = self.n, self.outputs.rows
        extra = self.extra_sinks.rows if self.extra_sinks is not None else 0
        x_in = lambda t, j: 2 + 2 * (t * n + j)  # noqa: E731
        y_base = 2 + 2 * n * n
        y = lambda t, k: y_base + (t - 1) * p + k  # noqa: E731
        extra_base = y_base + n * p
        net = _FlowNetwork(extra_base + extra)
        S, T = 0, 1
        skip = set(excluded)

        state_edges = list(zip(*np.nonzero(self.Abar.mask.T)))  # (j, k): x_j -> x_k
        output_edges = list(zip(*np.nonzero(self.outputs.mask.T))) if p else []
        for t in range(n):
            for j in range(n):
                net.add_edge(x_in(t, j), x_in(t, j) + 1)
            for j, k in state_edges:
                if t + 1 < n:
                    net.add_edge(x_in(t, j) + 1, x_in(t + 1, k))
            for j, k in output_edges:
                net.add_edge(x_in(t, j) + 1, y(t + 1, k))
        for j in range(n):
            if j not in skip:
                net.add_edge(S, x_in(0, j))
        for node in range(y_base, extra_base):
            net.add_edge(node, T)
        if extra:
            for i, m in zip(*np.nonzero(self.extra_sinks.mask.T)):
                net.add_edge(x_in(0, i) + 1, extra_base + m)
            for m in range(extra):
                net.add_edge(extra_base + m, T)
        return net, S, T

    def max_linking(self, excluded: Iterable[int] = ()) -> int:
        net, s, t = self.network(excluded)
        return net.max_flow(s, t)


def max_linking_size(g: DynamicGraph, excluded: Iterable[int] = ()) -> int:
    """Maximum number of vertex-disjoint paths from layer 0 to the sinks."""
    return g.max_linking(excluded)
