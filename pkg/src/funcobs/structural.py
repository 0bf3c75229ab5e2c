"""Structural functional observability of pattern triples.

Generic ranks of observability matrices are read off maximum linkings of
dynamic graphs (see :mod:`funcobs.linking`).  SFO is decided twice:

1. ``grank O(Abar, [Cbar; Fbar]) == grank O(Abar, Cbar)``;
2. every functional state is covered by *every* maximum linking, tested by
   excluding its layer-0 copy and checking that the linking size drops.

The two verdicts must coincide; a mismatch is an internal bug.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from funcobs.errors import InvalidInputError, UnsupportedError
from funcobs.linking import DynamicGraph, PatternMatrix, unit_rows
from funcobs.numeric import PRIME, SystemTriple, field_matmul, field_observability_matrix, prime_field_rank


@dataclass(frozen=True)
class PatternTriple:
    Abar: PatternMatrix
    Cbar: PatternMatrix
    Fbar: PatternMatrix

    def __post_init__(self):
        n = self.Abar.rows
        if self.Abar.shape != (n, n):
            raise InvalidInputError(f"Abar must be square, got {self.Abar.shape}")
        for name in ("Cbar", "Fbar"):
            pm = getattr(self, name)
            if pm.rows == 0 and pm.cols != n:
                object.__setattr__(self, name, PatternMatrix.zeros(0, n))
            elif pm.cols != n:
                raise InvalidInputError(f"{name} must have {n} columns, got {pm.cols}")

    @classmethod
    def from_functional_states(cls, Abar: PatternMatrix, Cbar: PatternMatrix, states: Iterable[int]) -> "PatternTriple":
        return cls(Abar, Cbar, unit_rows(Abar.rows, states))

    @property
    def n(self) -> int:
        return self.Abar.rows

    @property
    def functional_states(self) -> list[int]:
        """States with a free entry in some row of ``Fbar``."""
        return [int(i) for i in np.nonzero(self.Fbar.mask.any(axis=0))[0]] if self.Fbar.rows else []

    def with_sensors(self, rows: Iterable[int]) -> "PatternTriple":
        return PatternTriple(self.Abar, self.Cbar.take_rows(rows), self.Fbar)


def generic_obs_rank(Abar: PatternMatrix, Cbar: PatternMatrix) -> int:
    """``grank O(Abar, Cbar)`` as the maximum linking of the dynamic graph."""
    return DynamicGraph(Abar, Cbar).max_linking()


def is_structurally_observable(Abar: PatternMatrix, Cbar: PatternMatrix) -> bool:
    return generic_obs_rank(Abar, Cbar) == Abar.rows


def output_reachable_set(Abar: PatternMatrix, Cbar: PatternMatrix) -> set[int]:
    """States with a directed path to some output in the system digraph."""
    n = Abar.rows
    seen = set(int(j) for j in np.nonzero(Cbar.mask.any(axis=0))[0]) if Cbar.rows else set()
    queue = deque(seen)
    while queue:
        k = queue.popleft()
        # predecessors j of x_k: Abar[k, j] free
        for j in np.nonzero(Abar.mask[k])[0]:
            j = int(j)
            if j not in seen:
                seen.add(j)
                queue.append(j)
    return {j for j in seen if j < n}


def sfo_selfloop_fastpath(triple: PatternTriple) -> bool | None:
    """With a self-loop at every state, SFO reduces to output reachability.

    Returns ``None`` when some diagonal entry of ``Abar`` is fixed zero.
    """
    if not triple.Abar.mask.diagonal().all():
        return None
    reachable = output_reachable_set(triple.Abar, triple.Cbar)
    return all(i in reachable for i in triple.functional_states)


@dataclass(frozen=True)
class StateRow:
    state: int
    reached_by_every_max_family: bool
    output_reachable: bool


@dataclass(frozen=True)
class SfoReport:
    sfo: bool
    generic_rank_o: int
    generic_rank_ocf: int
    per_state: list[StateRow] = field(default_factory=list)
    fast_path_used: bool = False


def is_sfo(triple: PatternTriple) -> SfoReport:
    """Decide structural functional observability by both routes.

    ``generic_rank_ocf`` is ``grank O(Abar, [Cbar; Fbar])``.
    """
    g = DynamicGraph(triple.Abar, triple.Cbar)
    d_o = g.max_linking()
    d_ocf = DynamicGraph(triple.Abar, triple.Cbar.stack(triple.Fbar)).max_linking()
    by_rank = d_ocf == d_o

    reachable = output_reachable_set(triple.Abar, triple.Cbar)
    rows = [
        StateRow(i, g.max_linking(excluded=[i]) < d_o, i in reachable)
        for i in triple.functional_states
    ]
    by_cover = all(row.reached_by_every_max_family for row in rows)
    if by_rank != by_cover:
        raise AssertionError(f"SFO routes disagree: rank route {by_rank}, linking-cover route {by_cover}")

    fast = sfo_selfloop_fastpath(triple)
    if fast is not None and fast != by_rank:
        raise AssertionError(f"self-loop fast path gives {fast}, full test gives {by_rank}")
    return SfoReport(by_rank, d_o, d_ocf, rows, fast is not None)


# --- realizations and exact oracles -------------------------------------------


def random_realization(pm: PatternMatrix, seed=None, p: int = PRIME) -> tuple[np.ndarray, np.ndarray]:
    """Fill the free entries with independent nonzero values.

    Returns ``(field, real)``: residues uniform on ``[1, p)`` and reals with
    magnitude uniform on ``[0.5, 1.5]`` and a random sign.  Fixed zeros stay zero.
    """
    rng = np.random.default_rng(seed)
    k = int(pm.mask.sum())
    fld = np.zeros(pm.shape, dtype=np.int64)
    real = np.zeros(pm.shape)
    fld[pm.mask] = rng.integers(1, p, size=k)
    real[pm.mask] = rng.uniform(0.5, 1.5, size=k) * rng.choice((-1.0, 1.0), size=k)
    return fld, real


def realize_triple(triple: PatternTriple, seed=None) -> SystemTriple:
    """A random real realization of ``triple``."""
    rng = np.random.default_rng(seed)
    A = random_realization(triple.Abar, rng)[1]
    C = random_realization(triple.Cbar, rng)[1].reshape(-1, triple.n)
    F = random_realization(triple.Fbar, rng)[1].reshape(-1, triple.n)
    return SystemTriple(A, C, F)


def field_obs_rank(Abar: PatternMatrix, Cbar: PatternMatrix, seed=None, p: int = PRIME) -> int:
    """Rank over GF(p) of ``O(A, C)`` for one random realization."""
    rng = np.random.default_rng(seed)
    A = random_realization(Abar, rng, p)[0]
    C = random_realization(Cbar, rng, p)[0].reshape(-1, Abar.rows)
    return prime_field_rank(field_observability_matrix(A, C, p), p)


def field_controllability_matrix(A: np.ndarray, B: np.ndarray, p: int = PRIME) -> np.ndarray:
    """``[B, AB, ..., A^(n-1) B] mod p``."""
    n = A.shape[0]
    blocks, block = [], np.asarray(B, dtype=np.int64) % p
    for _ in range(n):
        blocks.append(block)
        block = field_matmul(A, block, p)
    return np.hstack(blocks) if blocks else np.zeros((n, 0), dtype=np.int64)


# --- structural target controllability ----------------------------------------


def _targets(n: int, targets: Iterable[int]) -> list[int]:
    S = sorted(set(int(i) for i in targets))
    if any(not 0 <= i < n for i in S):
        raise InvalidInputError(f"target indices must lie in [0, {n})")
    return S


def target_controllable_nminus1(Abar: PatternMatrix, Bbar: PatternMatrix, targets: Iterable[int]) -> bool:
    """Structural target controllability for ``n - 1`` targets.

    Works on the dual pair ``(Abar^T, Bbar^T)``: with ``i`` the single
    non-target state, ``grank C(A, B)_S`` equals the maximum linking of the
    dual dynamic graph with an extra sink edge at ``x_i^0``, minus one.
    """
    n = Abar.rows
    S = _targets(n, targets)
    if len(S) != n - 1:
        raise UnsupportedError(
            f"|S| = {len(S)}: only |S| = n - 1 = {n - 1} is decidable in polynomial time; "
            "for smaller target sets only a range for grank C(A,B)_S is known "
            "(see target_controllability_bracket)"
        )
    (missing,) = set(range(n)) - set(S)
    Cdual = Bbar.T if Bbar.cols else PatternMatrix.zeros(0, n)
    g = DynamicGraph(Abar.T, Cdual, unit_rows(n, [missing]))
    return g.max_linking() - 1 == n - 1


@dataclass(frozen=True)
class TargetBracket:
    """Range known for ``grank C(A, B)_S``; ``verdict`` is None when undecided."""

    low: int
    high: int
    generic_rank_c: int
    verdict: bool | None


def target_controllability_bracket(Abar: PatternMatrix, Bbar: PatternMatrix, targets: Iterable[int]) -> TargetBracket:
    """Bounds on ``grank C(A, B)_S`` for arbitrary target sets.

    Let ``Sc`` be the non-targets and ``d = grank C(A, B)``.  If the dual
    triple ``(Abar^T, Bbar^T, I_Sc)`` is SFO, ``grank C_S = d - |Sc|``
    exactly; otherwise it lies in ``[d + 1 - |Sc|, d]``.
    """
    n = Abar.rows
    S = _targets(n, targets)
    if len(S) == n:
        raise UnsupportedError("|S| = n: this is plain structural controllability, test generic_obs_rank on the dual pair")
    complement = sorted(set(range(n)) - set(S))
    Cdual = Bbar.T if Bbar.cols else PatternMatrix.zeros(0, n)
    report = is_sfo(PatternTriple.from_functional_states(Abar.T, Cdual, complement))
    d = report.generic_rank_o
    if report.sfo:
        low = high = d - len(complement)
    else:
        low, high = d + 1 - len(complement), d
    low, high = max(low, 0), min(high, len(S))
    if high < len(S):
        verdict = False
    elif low == high == len(S):
        verdict = True
    else:
        verdict = None
    return TargetBracket(low, high, d, verdict)


def field_target_rank(Abar: PatternMatrix, Bbar: PatternMatrix, targets: Sequence[int], trials: int = 50, seed=None) -> int:
    """Majority GF(p) rank of the target rows of ``C(A, B)`` over random realizations."""
    rng = np.random.default_rng(seed)
    counts: Counter[int] = Counter()
    for _ in range(trials):
        A = random_realization(Abar, rng)[0]
        B = random_realization(Bbar, rng)[0]
        ctrb = field_controllability_matrix(A, B)
        counts[prime_field_rank(ctrb[list(targets)])] += 1
    return counts.most_common(1)[0][0]
