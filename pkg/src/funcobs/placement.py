"""Minimal sensor placement.

Greedy selection over candidate rows of ``C`` (or ``Cbar``) driven by a
monotone decreasing objective that hits zero exactly when the goal is met:

* ``numeric-fo``:  f(S) = rank [O(A, C_S); F] - rank O(A, C_S)
* ``structural-sfo``: gbar(S) = grank O(Abar, [Cbar_S; Fbar]) - grank O(Abar, Cbar_S)
* ``numeric-fd``:  f_d(S), the modal defect summed over unstable eigenvalues

None of these objectives is supermodular in general: with ``A = diag(1, 2)``,
``C = I`` and ``F = [1, 1]`` neither sensor alone lowers ``f`` but both
together do.  The greedy loop therefore falls back to the smallest jointly
improving group when no single candidate helps.

For diagonalizable ``A`` and a freely designable ``C`` the minimum sensor
count has a closed form, and :func:`construct_min_C` builds such a ``C``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Literal, Sequence

import numpy as np

from funcobs.errors import InvalidInputError, NotDiagonalizableError, NumericalDegeneracyError, UnsupportedError
from funcobs.functional import eigen_policy, is_functionally_observable
from funcobs.linking import DynamicGraph
from funcobs.numeric import (
    DEFAULT_POLICY,
    RankPolicy,
    SpectralData,
    SystemTriple,
    eigendecompose_diagonalizable,
    observability_matrix,
    rank,
    real_jordan_form,
    stacked_ranks,
)
from funcobs.structural import PatternTriple

Kind = Literal["numeric-fo", "structural-sfo", "numeric-fd"]


def diagonal_spectrum(A: np.ndarray, policy: RankPolicy) -> SpectralData:
    try:
        return eigendecompose_diagonalizable(A, policy)
    except NotDiagonalizableError as exc:
        raise UnsupportedError(f"A is not diagonalizable: {exc}") from exc


def objective_f(sys: SystemTriple, S: Sequence[int], policy: RankPolicy = DEFAULT_POLICY) -> int:
    sub = sys.with_sensors(S)
    r_o, r_of = stacked_ranks(observability_matrix(sub.A, sub.C).reshape(-1, sys.n), sys.F, policy)
    return r_of - r_o


def objective_fbar(sys: SystemTriple, S: Sequence[int], policy: RankPolicy = DEFAULT_POLICY) -> int:
    """rank O(A, [C_S; F]) - rank O(A, C_S)."""
    sub = sys.with_sensors(S)
    O_c = observability_matrix(sub.A, sub.C).reshape(-1, sys.n)
    O_f = observability_matrix(sub.A, sub.F).reshape(-1, sys.n)
    r_o, r_all = stacked_ranks(O_c, O_f, policy)
    return r_all - r_o


def objective_gbar(triple: PatternTriple, S: Sequence[int]) -> int:
    sub = triple.with_sensors(S)
    d_o = DynamicGraph(sub.Abar, sub.Cbar).max_linking()
    return DynamicGraph(sub.Abar, sub.Cbar.stack(sub.Fbar)).max_linking() - d_o


def objective_fd(
    sys: SystemTriple,
    spec: SpectralData,
    S: Sequence[int],
    policy: RankPolicy = DEFAULT_POLICY,
    margin: float = 0.0,
) -> int:
    """Sum over unstable eigenvalue groups of ``rank [C_iS; F_i] - rank C_iS``."""
    policy = eigen_policy(policy)
    C_S = sys.with_sensors(S).C
    scale = max(float(np.linalg.norm(sys.C, 2)) if sys.p else 0.0, float(np.linalg.norm(sys.F, 2)) if sys.r else 0.0)
    total = 0
    for g in spec.groups:
        if not g.is_unstable(margin):
            continue
        r_c, r_cf = stacked_ranks(C_S @ g.vectors, sys.F @ g.vectors, policy,
                                  scale=scale * float(np.linalg.norm(g.vectors, 2)))
        total += r_cf - r_c
    return total


@dataclass
class PlacementProblem:
    """Candidate sensors are row indices of ``C`` (or ``Cbar``); all rows by default."""

    kind: Kind
    system: SystemTriple | PatternTriple
    candidates: Sequence[int] | None = None
    policy: RankPolicy = DEFAULT_POLICY
    margin: float = 0.0
    spec: SpectralData | None = None

    def __post_init__(self):
        numeric = isinstance(self.system, SystemTriple)
        if self.kind not in ("numeric-fo", "structural-sfo", "numeric-fd"):
            raise InvalidInputError(f"unknown placement kind {self.kind!r}")
        if numeric != self.kind.startswith("numeric"):
            raise InvalidInputError(f"{self.kind} needs a {'PatternTriple' if numeric else 'SystemTriple'}")
        p = self.system.p if numeric else self.system.Cbar.rows
        if self.candidates is None:
            self.candidates = list(range(p))
        self.candidates = sorted(set(int(c) for c in self.candidates))
        if any(not 0 <= c < p for c in self.candidates):
            raise InvalidInputError(f"candidate indices must lie in [0, {p})")
        if self.kind == "numeric-fd" and self.spec is None:
            self.spec = diagonal_spectrum(self.system.A, self.policy)

    def objective(self) -> Callable[[Sequence[int]], int]:
        if self.kind == "numeric-fo":
            return lambda S: objective_f(self.system, S, self.policy)
        if self.kind == "structural-sfo":
            return lambda S: objective_gbar(self.system, S)
        return lambda S: objective_fd(self.system, self.spec, S, self.policy, self.margin)

    def bound_parameter(self) -> int:
        """The quantity inside the log of the greedy approximation bound."""
        if self.kind == "numeric-fo":
            return rank(self.system.F, self.policy) if self.system.r else 0
        if self.kind == "structural-sfo":
            t = self.system
            return DynamicGraph(t.Abar, t.Fbar).max_linking()
        policy = eigen_policy(self.policy)
        scale = float(np.linalg.norm(self.system.F, 2)) if self.system.r else 0.0
        return sum(
            rank(self.system.F @ g.vectors, policy, scale=scale * float(np.linalg.norm(g.vectors, 2)))
            for g in self.spec.groups
            if g.is_unstable(self.margin)
        )


@dataclass(frozen=True)
class BoundCertificate:
    optimum: int
    bound: float
    holds: bool


@dataclass
class PlacementResult:
    selected: list[int]
    gain_trace: list[tuple[int, int]]
    residual: int
    feasible: bool
    bound_certificate: BoundCertificate | None = None
    notes: list[str] = field(default_factory=list)


def _best_group(h, selected: list[int], remaining: list[int], current: int) -> tuple[tuple[int, ...], int]:
    """Smallest group of candidates with a positive joint gain, best gain first.

    Only reached when every single candidate has zero gain, which the
    objectives allow because they are not supermodular in general.
    """
    for size in range(2, len(remaining) + 1):
        best, best_gain = (), 0
        for group in combinations(remaining, size):
            gain = current - h(selected + list(group))
            if gain > best_gain:
                best, best_gain = group, gain
        if best:
            return best, best_gain
    return (), 0


def greedy_place(problem: PlacementProblem) -> PlacementResult:
    """Add the candidate with the largest objective drop until it reaches zero.

    Ties go to the smallest index.  If even the full candidate set leaves a
    positive objective the problem is infeasible; the result then lists the
    full set and its residual.  When no single candidate lowers the
    objective, the smallest jointly improving group is added instead; its
    members enter the trace with their sequential marginal gains and the
    step is described in ``notes``.
    """
    h = problem.objective()
    full = h(problem.candidates)
    if full > 0:
        return PlacementResult(list(problem.candidates), [], full, False)
    selected: list[int] = []
    trace: list[tuple[int, int]] = []
    notes: list[str] = []
    current = h(selected)
    while current > 0:
        remaining = [a for a in problem.candidates if a not in selected]
        best, best_gain = None, 0
        for a in remaining:
            gain = current - h(selected + [a])
            if gain > best_gain:
                best, best_gain = a, gain
        if best is not None:
            selected.append(best)
            trace.append((best, best_gain))
            current -= best_gain
            continue
        group, gain = _best_group(h, selected, remaining, current)
        if not group:  # unreachable: the full candidate set is feasible
            return PlacementResult(selected, trace, current, False, notes=notes)
        notes.append(f"no single candidate improved; added group {[a for a in group]} with joint gain {gain}")
        for a in group:
            selected.append(a)
            after = h(selected)
            trace.append((a, current - after))
            current = after
    return PlacementResult(selected, trace, 0, True, notes=notes)


def brute_force_optimum(problem: PlacementProblem, max_p: int = 14) -> int | None:
    """Smallest subset size reaching objective zero, or None if infeasible."""
    cands = list(problem.candidates)
    if len(cands) > max_p:
        raise UnsupportedError(f"exhaustive search over {len(cands)} candidates refused (limit {max_p})")
    h = problem.objective()
    if h(cands) > 0:
        return None
    for size in range(len(cands) + 1):
        for S in combinations(cands, size):
            if h(list(S)) == 0:
                return size
    return None  # unreachable: the full set is feasible


def approximation_bound(parameter: int, optimum: int) -> float:
    """``(1 + ln parameter) * optimum``; a zero parameter forces a zero optimum."""
    return (1.0 + math.log(parameter)) * optimum if parameter >= 1 else float(optimum)


def certify(problem: PlacementProblem, result: PlacementResult, max_p: int = 14) -> BoundCertificate | None:
    """Compare a greedy result with the exhaustive optimum."""
    opt = brute_force_optimum(problem, max_p)
    if opt is None:
        return None
    bound = approximation_bound(problem.bound_parameter(), opt)
    return BoundCertificate(opt, bound, len(result.selected) <= bound + 1e-9)


# --- closed-form minimal design --------------------------------------------------


def group_ranks(spec: SpectralData, F: np.ndarray, policy: RankPolicy) -> list[int]:
    """``rank F T_i`` for every eigenvalue group."""
    policy = eigen_policy(policy)
    scale = float(np.linalg.norm(F, 2)) if F.size else 0.0
    return [
        rank(F @ g.vectors, policy, scale=scale * float(np.linalg.norm(g.vectors, 2))) if F.shape[0] else 0
        for g in spec.groups
    ]


def min_sensor_count_diagonalizable(A, F, policy: RankPolicy = DEFAULT_POLICY) -> int:
    """Fewest output rows making ``(A, C, F)`` functionally observable: ``max_i rank F T_i``."""
    sys = SystemTriple(A, np.zeros((0, np.shape(A)[0])), F)
    spec = diagonal_spectrum(sys.A, policy)
    return max(group_ranks(spec, sys.F, policy), default=0)


def construct_min_C(A, F, policy: RankPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Build a real ``C`` with the minimum number of rows.

    In real Jordan coordinates ``T``, each block of ``F T`` contributes the
    rows (scanned in ascending order) that raise the rank of
    ``[J_i - lambda_i I; rows so far]``, zero padded to ``p*`` rows;
    ``C = [C_1, ..., C_k] T^-1``.  The result is re-checked with the rank
    identity before returning.
    """
    sys = SystemTriple(A, np.zeros((0, np.shape(A)[0])), F)
    spec = diagonal_spectrum(sys.A, policy)
    p_star = max(group_ranks(spec, sys.F, policy), default=0)
    n = sys.n
    if p_star == 0:
        return np.zeros((0, n))
    rj = real_jordan_form(spec)
    Ft = sys.F @ rj.basis
    eig_policy = eigen_policy(policy)
    scale = float(np.linalg.norm(sys.F, 2)) * float(np.linalg.norm(rj.basis, 2))
    blocks = []
    for blk in rj.blocks:
        F_i = Ft[:, blk.start:blk.stop]
        shift = blk.block - blk.eigenvalue * np.eye(blk.stop - blk.start)
        target = rank(np.vstack([shift, F_i]), eig_policy, scale=scale)
        chosen: list[int] = []
        current = rank(shift, eig_policy, scale=scale)
        for row in range(F_i.shape[0]):
            if current == target:
                break
            trial = rank(np.vstack([shift, F_i[chosen + [row]]]), eig_policy, scale=scale)
            if trial > current:
                chosen.append(row)
                current = trial
        if len(chosen) > p_star:
            raise NumericalDegeneracyError(
                f"block at eigenvalue {blk.eigenvalue:.6g} needs {len(chosen)} rows > p* = {p_star}",
                float(np.linalg.cond(rj.basis)),
            )
        C_i = np.zeros((p_star, blk.stop - blk.start))
        C_i[: len(chosen)] = F_i[chosen]
        blocks.append(C_i)
    C = np.linalg.solve(rj.basis.T, np.hstack(blocks).T).T
    if not is_functionally_observable(SystemTriple(sys.A, C, sys.F), policy)[0]:
        cond = float(np.linalg.cond(rj.basis))
        raise NumericalDegeneracyError(f"constructed C failed verification (cond T = {cond:.3g})", cond)
    return C
