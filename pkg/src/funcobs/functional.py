"""Functional observability and detectability of numeric triples (A, C, F).

Three routes are available and :func:`analyze` runs all that apply:

* rank identity: ``rank [O(A,C); F] == rank O(A,C)``;
* decomposition: ``F`` must vanish on the unstable part of the unobservable
  subspace (detectability);
* modal: per distinct eigenvalue, ``rank [C T_i; F T_i] == rank C T_i``
  (diagonalizable ``A``) or the Jordan-block version with user data.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from funcobs.errors import InvalidInputError, NotDiagonalizableError
from funcobs.numeric import (
    CLUSTER_RTOL,
    DEFAULT_POLICY,
    EPS,
    RankPolicy,
    SpectralData,
    SystemTriple,
    as_matrix,
    eigendecompose_diagonalizable,
    kernel_basis,
    observability_matrix,
    stacked_ranks,
    unstable_invariant_subspace,
)

logger = logging.getLogger(__name__)

#: Relative rank tolerance for tests built from computed eigen-data, used
#: when the caller leaves the policy at its machine default.
EIGEN_RTOL = 1e6 * EPS


def eigen_policy(policy: RankPolicy) -> RankPolicy:
    return RankPolicy("relative", EIGEN_RTOL) if policy.tolerance == 0 else policy


def _zero_tol(policy: RankPolicy, M: np.ndarray) -> float:
    scale = max(1.0, float(np.linalg.norm(M, np.inf))) if M.size else 1.0
    if policy.tolerance == 0:
        return np.sqrt(EPS) * scale
    if policy.mode == "absolute":
        return policy.tolerance
    return policy.tolerance * scale


def is_functionally_observable(sys: SystemTriple, policy: RankPolicy = DEFAULT_POLICY) -> tuple[bool, int, int]:
    """Return ``(observable, rank O, rank [O; F])``."""
    O = observability_matrix(sys.A, sys.C)
    rank_o, rank_of = stacked_ranks(O.reshape(-1, sys.n), sys.F, policy)
    return rank_o == rank_of, rank_o, rank_of


@dataclass(frozen=True)
class ObservabilityDecomposition:
    """Orthonormal coordinates splitting the state space.

    ``unobservable_restriction`` is ``A`` restricted to the unobservable
    subspace in the ``unobservable_basis`` coordinates.
    """

    observable_basis: np.ndarray
    unobservable_basis: np.ndarray
    unobservable_restriction: np.ndarray
    unstable_unobservable_basis: np.ndarray

    @property
    def rank(self) -> int:
        return self.observable_basis.shape[1]


def observability_decomposition(
    sys: SystemTriple, policy: RankPolicy = DEFAULT_POLICY, margin: float = 0.0
) -> ObservabilityDecomposition:
    O = observability_matrix(sys.A, sys.C).reshape(-1, sys.n)
    N = kernel_basis(O, policy)
    l = sys.n - N.shape[1]
    if O.shape[0]:
        _, _, vh = np.linalg.svd(O)
        observable = vh[:l].T
    else:
        observable = np.zeros((sys.n, 0))
    restriction = N.T @ sys.A @ N
    W = unstable_invariant_subspace(restriction, margin)
    unstable = N @ W if W.size else np.zeros((sys.n, 0))
    return ObservabilityDecomposition(observable, N, restriction, unstable)


def is_functionally_detectable(sys: SystemTriple, policy: RankPolicy = DEFAULT_POLICY, margin: float = 0.0) -> bool:
    """``F`` annihilates the unstable unobservable subspace.

    The unobservable subspace is ``ker O(A, C)``; its unstable part comes
    from an ordered Schur form of ``A`` restricted to it.
    """
    W_u = observability_decomposition(sys, policy, margin).unstable_unobservable_basis
    if W_u.shape[1] == 0 or sys.r == 0:
        return True
    residual = float(np.linalg.norm(sys.F @ W_u, np.inf))
    return residual <= _zero_tol(policy, sys.F)


def _check_spectrum(sys: SystemTriple, spec: SpectralData) -> None:
    if spec.n != sys.n:
        raise InvalidInputError(f"spectral data covers {spec.n} states, system has {sys.n}")
    norm_a = max(1.0, float(np.linalg.norm(sys.A, np.inf)))
    for g in spec.groups:
        resid = np.linalg.norm(sys.A @ g.vectors - g.eigenvalue * g.vectors, np.inf)
        if resid > np.sqrt(EPS) * norm_a * max(1.0, float(np.linalg.norm(g.vectors, np.inf))):
            raise InvalidInputError(f"spectral data inconsistent with A at eigenvalue {g.eigenvalue}")


def _block_scale(sys: SystemTriple, T: np.ndarray) -> float:
    return max(float(np.linalg.norm(sys.C, 2)) if sys.p else 0.0,
               float(np.linalg.norm(sys.F, 2)) if sys.r else 0.0) * float(np.linalg.norm(T, 2))


def modal_functional_observability(
    sys: SystemTriple, spec: SpectralData, policy: RankPolicy = DEFAULT_POLICY
) -> list[tuple[complex, bool]]:
    """Per-eigenvalue test ``rank [C T_i; F T_i] == rank C T_i``.

    Valid for diagonalizable ``A`` only, where each Jordan block is
    ``lambda_i I``.  For defective matrices use
    :func:`modal_functional_observability_jordan`.
    """
    _check_spectrum(sys, spec)
    policy = eigen_policy(policy)
    out = []
    for g in spec.groups:
        C_i = sys.C @ g.vectors
        F_i = sys.F @ g.vectors
        r_c, r_cf = stacked_ranks(C_i, F_i, policy, scale=_block_scale(sys, g.vectors))
        out.append((g.eigenvalue, r_c == r_cf))
    return out


def modal_functional_observability_jordan(
    sys: SystemTriple,
    blocks: Sequence[tuple[np.ndarray, np.ndarray]],
    policy: RankPolicy = DEFAULT_POLICY,
) -> list[tuple[complex, bool]]:
    """Modal test on user-supplied Jordan data.

    ``blocks`` is a list of ``(J_i, T_i)`` with ``A T_i = T_i J_i``, ``J_i``
    upper triangular with a single eigenvalue on its diagonal.  Each block
    is tested with ``rank [O(J_i, C T_i); F T_i] == rank O(J_i, C T_i)``.
    """
    total = 0
    out = []
    norm_a = max(1.0, float(np.linalg.norm(sys.A, np.inf)))
    for J_i, T_i in blocks:
        J_i = as_matrix(J_i, "J_i", dtype=complex if np.iscomplexobj(J_i) else float)
        d = J_i.shape[0]
        T_i = as_matrix(T_i, "T_i", ncols=d)
        if J_i.shape != (d, d) or T_i.shape[0] != sys.n:
            raise InvalidInputError("Jordan block and basis have inconsistent shapes")
        diag = np.diag(J_i)
        if np.any(np.abs(np.tril(J_i, -1)) > 0) or np.ptp(np.abs(diag - diag[0])) > 0:
            raise InvalidInputError("J_i must be upper triangular with a constant diagonal")
        if np.linalg.norm(sys.A @ T_i - T_i @ J_i, np.inf) > np.sqrt(EPS) * norm_a * max(1.0, np.linalg.norm(T_i, np.inf)):
            raise InvalidInputError("A T_i != T_i J_i")
        total += d
        O_i = observability_matrix(J_i, sys.C @ T_i).reshape(-1, d)
        r_o, r_of = stacked_ranks(O_i, sys.F @ T_i, policy)
        lam = complex(diag[0])
        out.append((lam if lam.imag else complex(lam.real, 0.0), r_o == r_of))
    if total != sys.n:
        raise InvalidInputError(f"Jordan blocks cover {total} states, system has {sys.n}")
    return out


def pbh_functional_check(sys: SystemTriple, eigenvalue: complex, policy: RankPolicy = DEFAULT_POLICY) -> bool:
    """``rank [A - lambda I; C; F] == rank [A - lambda I; C]``.

    Necessary for functional observability in general, and sufficient
    (over all eigenvalues) only when ``A`` is diagonalizable.
    """
    policy = eigen_policy(policy)
    M = np.vstack([sys.A - eigenvalue * np.eye(sys.n), sys.C])
    r_m, r_mf = stacked_ranks(M, sys.F, policy)
    return r_m == r_mf


def distinct_eigenvalues(A: np.ndarray) -> list[complex]:
    """Eigenvalues of ``A`` merged by the default clustering tolerance."""
    eigs = np.linalg.eigvals(A) if A.size else np.zeros(0)
    tol = CLUSTER_RTOL * float(np.linalg.norm(A, np.inf)) if A.size else 0.0
    out: list[complex] = []
    for lam in sorted(eigs, key=lambda z: (-z.real, -z.imag)):
        if not any(abs(lam - mu) <= tol for mu in out):
            out.append(complex(lam.real, 0.0) if abs(lam.imag) <= tol else complex(lam))
    return out


@dataclass(frozen=True)
class ModalRow:
    eigenvalue: complex
    multiplicity: int
    observable: bool
    unstable: bool


@dataclass(frozen=True)
class PbhRow:
    eigenvalue: complex
    holds: bool
    necessary_only: bool


@dataclass(frozen=True)
class FunctionalReport:
    functionally_observable: bool
    functionally_detectable: bool
    rank_o: int
    rank_of: int
    diagonalizable: bool
    modal_table: list[ModalRow] | None = None
    pbh_table: list[PbhRow] = field(default_factory=list)
    condition: float | None = None
    method: dict[str, str] = field(default_factory=dict)
    routes_agree: bool | None = None


def analyze(sys: SystemTriple, policy: RankPolicy = DEFAULT_POLICY, margin: float = 0.0) -> FunctionalReport:
    """Run every applicable route and bundle the verdicts.

    The modal table is filled only for diagonalizable ``A``; PBH rows are
    always produced and flagged ``necessary_only`` otherwise.  When both
    the rank and modal routes ran, ``routes_agree`` records whether they
    matched on both verdicts.
    """
    fo, rank_o, rank_of = is_functionally_observable(sys, policy)
    fd = is_functionally_detectable(sys, policy, margin)
    try:
        spec = eigendecompose_diagonalizable(sys.A, policy)
    except NotDiagonalizableError:
        spec = None

    modal_table = None
    agree = None
    if spec is not None:
        verdicts = modal_functional_observability(sys, spec, policy)
        modal_table = [
            ModalRow(g.eigenvalue, g.multiplicity, ok, g.is_unstable(margin))
            for g, (_, ok) in zip(spec.groups, verdicts)
        ]
        modal_fo = all(row.observable for row in modal_table)
        modal_fd = all(row.observable for row in modal_table if row.unstable)
        agree = modal_fo == fo and modal_fd == fd
        if not agree:
            logger.warning("modal and rank/decomposition routes disagree (cond T = %.3g)", spec.condition)
        eigenvalues = [g.eigenvalue for g in spec.groups]
    else:
        eigenvalues = distinct_eigenvalues(sys.A)

    pbh = [PbhRow(lam, pbh_functional_check(sys, lam, policy), spec is None) for lam in eigenvalues]
    return FunctionalReport(
        functionally_observable=fo,
        functionally_detectable=fd,
        rank_o=rank_o,
        rank_of=rank_of,
        diagonalizable=spec is not None,
        modal_table=modal_table,
        pbh_table=pbh,
        condition=None if spec is None else spec.condition,
        method={"observability": "rank-identity", "detectability": "decomposition"},
        routes_agree=agree,
    )
