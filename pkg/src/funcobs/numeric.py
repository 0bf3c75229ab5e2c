"""Dense linear-algebra primitives.

Everything here is a pure function of its inputs.  Matrices are plain
``numpy`` arrays; the helpers below validate shape and finiteness at the
boundary and never mutate their arguments.

Rank decisions go through a single :class:`RankPolicy` so that every rank
identity checked elsewhere in the package uses the same threshold rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
import scipy.linalg

from funcobs.errors import InvalidInputError, NotDiagonalizableError

EPS = float(np.finfo(float).eps)

#: Mersenne prime 2**31 - 1 used for exact generic-rank evaluation.
PRIME = 2_147_483_647

#: Default eigenvalue clustering tolerance, relative to ``||A||_inf``.
CLUSTER_RTOL = 1e6 * EPS


def as_matrix(M, name: str = "matrix", *, ncols: int | None = None, dtype=None) -> np.ndarray:
    """Coerce ``M`` to a finite 2-D array.

    A 1-D input is read as a single row.  An empty list with ``ncols``
    given becomes a ``0 x ncols`` matrix.
    """
    arr = np.asarray(M, dtype=dtype)
    if arr.size == 0 and arr.ndim <= 1:
        arr = arr.reshape(0, 0 if ncols is None else ncols)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.dtype.kind not in "biufc":
        raise InvalidInputError(f"{name} must be numeric, got dtype {arr.dtype}")
    if arr.dtype.kind in "bi":
        arr = arr.astype(float)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries")
    if ncols is not None and arr.shape[1] != ncols:
        raise InvalidInputError(f"{name} must have {ncols} columns, got {arr.shape[1]}")
    return arr


@dataclass(frozen=True)
class RankPolicy:
    """Singular-value threshold rule for numerical rank.

    ``mode="relative"``: threshold = ``tolerance * sigma_ref``; with
    ``tolerance == 0`` the machine default ``max(rows, cols) * eps`` is used
    as the factor.  ``mode="absolute"``: threshold = ``tolerance``; zero
    again falls back to the machine default.
    """

    mode: Literal["relative", "absolute"] = "relative"
    tolerance: float = 0.0

    def __post_init__(self):
        if self.mode not in ("relative", "absolute"):
            raise InvalidInputError(f"unknown rank mode {self.mode!r}")
        if not (self.tolerance >= 0 and np.isfinite(self.tolerance)):
            raise InvalidInputError("rank tolerance must be a finite nonnegative number")

    def threshold(self, sigma_ref: float, shape: tuple[int, int]) -> float:
        default = max(shape) * EPS * sigma_ref
        if self.tolerance == 0:
            return default
        if self.mode == "absolute":
            return self.tolerance
        return self.tolerance * sigma_ref


DEFAULT_POLICY = RankPolicy()


def _singular_values(M: np.ndarray) -> np.ndarray:
    if M.size == 0:
        return np.zeros(0)
    return np.linalg.svd(M, compute_uv=False)


def rank(M, policy: RankPolicy = DEFAULT_POLICY, *, scale: float | None = None) -> int:
    """Numerical rank of a real or complex matrix.

    ``scale`` raises the reference magnitude used by a relative policy.
    Pass the norm of the data a block was cut from, so that a block that
    is zero up to round-off is not promoted to full rank.
    """
    M = as_matrix(M)
    s = _singular_values(M)
    if s.size == 0:
        return 0
    ref = s[0] if scale is None else max(s[0], scale)
    return int(np.count_nonzero(s > policy.threshold(ref, M.shape)))


def stacked_ranks(M, R, policy: RankPolicy = DEFAULT_POLICY, *, scale: float | None = None) -> tuple[int, int]:
    """Return ``(rank M, rank [M; R])`` decided with one common threshold.

    The threshold is the one the policy assigns to the stacked matrix, so
    the two ranks are directly comparable.
    """
    M = as_matrix(M)
    R = as_matrix(R, ncols=M.shape[1])
    S = np.vstack([M, R]) if M.shape[0] else R
    s_all = _singular_values(S)
    if s_all.size == 0:
        return 0, 0
    ref = s_all[0] if scale is None else max(s_all[0], scale)
    thr = policy.threshold(ref, S.shape)
    return int(np.count_nonzero(_singular_values(M) > thr)), int(np.count_nonzero(s_all > thr))


def row_space_contains(M, R, policy: RankPolicy = DEFAULT_POLICY) -> bool:
    """True iff every row of ``R`` lies in the row space of ``M``."""
    r_m, r_mr = stacked_ranks(M, R, policy)
    return r_m == r_mr


def kernel_basis(M, policy: RankPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Orthonormal basis (as columns) of the right null space of ``M``."""
    M = as_matrix(M)
    n = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(n, dtype=M.dtype if M.dtype.kind == "c" else float)
    _, s, vh = np.linalg.svd(M, full_matrices=True)
    r = int(np.count_nonzero(s > policy.threshold(s[0] if s.size else 0.0, M.shape)))
    return vh[r:].conj().T


def observability_matrix(A, C) -> np.ndarray:
    """Stack ``C, CA, ..., CA^(n-1)`` into an ``(n*p) x n`` matrix."""
    A = as_matrix(A, "A")
    n = A.shape[0]
    if A.shape[1] != n:
        raise InvalidInputError(f"A must be square, got {A.shape}")
    C = as_matrix(C, "C", ncols=n)
    blocks = []
    block = C
    for _ in range(n):
        blocks.append(block)
        block = block @ A
    if not blocks:
        return np.zeros((0, 0), dtype=C.dtype)
    return np.vstack(blocks)


@dataclass(frozen=True)
class SystemTriple:
    """Numeric triple ``(A, C, F)``: n states, p outputs, r functionals."""

    A: np.ndarray
    C: np.ndarray
    F: np.ndarray

    def __post_init__(self):
        A = as_matrix(self.A, "A", dtype=float)
        n = A.shape[0]
        if A.shape != (n, n):
            raise InvalidInputError(f"A must be square, got {A.shape}")
        C = as_matrix(self.C, "C", ncols=n, dtype=float)
        F = as_matrix(self.F, "F", ncols=n, dtype=float)
        for name, arr in (("A", A), ("C", C), ("F", F)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    @property
    def r(self) -> int:
        return self.F.shape[0]

    def with_sensors(self, rows: Sequence[int]) -> "SystemTriple":
        """Same triple keeping only the listed rows of ``C``."""
        idx = np.asarray(sorted(rows), dtype=int)
        return SystemTriple(self.A, self.C[idx] if idx.size else np.zeros((0, self.n)), self.F)


# --- eigenstructure ---------------------------------------------------------


@dataclass(frozen=True)
class EigenGroup:
    """One distinct eigenvalue with a basis ``vectors`` (n x d) of its eigenspace."""

    eigenvalue: complex
    multiplicity: int
    vectors: np.ndarray
    #: eigenvalues this close to the stability boundary count as unstable
    boundary_tol: float = 0.0

    @property
    def is_real(self) -> bool:
        return np.imag(self.eigenvalue) == 0

    def is_unstable(self, margin: float = 0.0) -> bool:
        return float(np.real(self.eigenvalue)) >= -margin - self.boundary_tol


@dataclass(frozen=True)
class SpectralData:
    groups: tuple[EigenGroup, ...]
    conjugate: dict[int, int] = field(default_factory=dict)
    condition: float = 1.0
    cluster_tol: float = 0.0

    @property
    def n(self) -> int:
        return sum(g.multiplicity for g in self.groups)

    @property
    def eigenvector_matrix(self) -> np.ndarray:
        if not self.groups:
            return np.zeros((0, 0))
        return np.hstack([g.vectors.astype(complex) for g in self.groups])


def _cluster(values: np.ndarray, tol: float) -> list[list[int]]:
    parent = list(range(len(values)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            if abs(values[i] - values[j]) <= tol:
                parent[find(i)] = find(j)
    clusters: dict[int, list[int]] = {}
    for i in range(len(values)):
        clusters.setdefault(find(i), []).append(i)
    return list(clusters.values())


def _eigenspace(A: np.ndarray, lam: complex, d: int, tol: float) -> np.ndarray:
    n = A.shape[0]
    shifted = A - lam * np.eye(n)
    _, s, vh = np.linalg.svd(shifted)
    if s[n - d] > tol:
        raise NotDiagonalizableError(
            f"eigenvalue {lam:.6g} has algebraic multiplicity {d} but a smaller eigenspace "
            f"(singular value {s[n - d]:.3g} > {tol:.3g})"
        )
    return vh[n - d:].conj().T


def eigendecompose_diagonalizable(
    A, policy: RankPolicy = DEFAULT_POLICY, cluster_tol: float | None = None
) -> SpectralData:
    """Group the spectrum of a diagonalizable real ``A`` by distinct eigenvalue.

    Eigenvalues closer than ``cluster_tol`` (default ``1e6 * eps * ||A||_inf``)
    form one group.  Each group's eigenspace is taken from the right singular
    vectors of ``A - lambda I``; real eigenvalues get real bases and each
    non-real group is paired with its conjugate, whose basis is the exact
    complex conjugate.  Groups are ordered by decreasing real part, then
    decreasing imaginary part.

    Raises
    ------
    NotDiagonalizableError
        If some eigenspace is smaller than the algebraic multiplicity, or
        the assembled eigenvector matrix is rank deficient under ``policy``.
    """
    A = as_matrix(A, "A", dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise InvalidInputError(f"A must be square, got {A.shape}")
    norm = float(np.linalg.norm(A, np.inf)) if n else 0.0
    ctol = CLUSTER_RTOL * norm if cluster_tol is None else float(cluster_tol)
    if n == 0:
        return SpectralData((), {}, 1.0, ctol)
    eigs = np.linalg.eigvals(A)
    resid_tol = 10 * max(ctol, policy.threshold(norm, A.shape))

    raw = []
    for members in _cluster(eigs, ctol):
        mean = complex(np.mean(eigs[members]))
        re = 0.0 if abs(mean.real) <= ctol else mean.real
        im = 0.0 if abs(mean.imag) <= ctol else mean.imag
        mean = complex(re, im)
        raw.append((mean, len(members)))
    raw.sort(key=lambda item: (-item[0].real, -item[0].imag))

    btol = boundary_tolerance(A)
    groups: list[EigenGroup | None] = [None] * len(raw)
    conjugate: dict[int, int] = {}
    for i, (lam, d) in enumerate(raw):
        if groups[i] is not None:
            continue
        if lam.imag == 0:
            vecs = _eigenspace(A, lam.real, d, resid_tol).real
            groups[i] = EigenGroup(lam, d, vecs, btol)
            continue
        if lam.imag < 0:
            raise InvalidInputError(f"eigenvalue {lam} has no conjugate partner")
        partner = [
            j for j, (mu, e) in enumerate(raw)
            if j != i and groups[j] is None and e == d and abs(mu - lam.conjugate()) <= max(ctol, 1e-300)
        ]
        if not partner:
            raise InvalidInputError(f"eigenvalue {lam} has no conjugate partner")
        j = partner[0]
        vecs = _eigenspace(A, lam, d, resid_tol)
        groups[i] = EigenGroup(lam, d, vecs, btol)
        groups[j] = EigenGroup(lam.conjugate(), d, vecs.conj(), btol)
        conjugate[i], conjugate[j] = j, i

    T = np.hstack([g.vectors.astype(complex) for g in groups])
    if rank(T, policy) < n:
        raise NotDiagonalizableError("eigenvector matrix is rank deficient")
    return SpectralData(tuple(groups), conjugate, float(np.linalg.cond(T)), ctol)


@dataclass(frozen=True)
class RealJordanBlock:
    """Columns ``start:stop`` of the real Jordan basis and their block of ``J_r``."""

    group: int
    eigenvalue: complex
    start: int
    stop: int
    block: np.ndarray


@dataclass(frozen=True)
class RealJordanForm:
    basis: np.ndarray
    form: np.ndarray
    blocks: tuple[RealJordanBlock, ...]


def real_jordan_form(spec: SpectralData) -> RealJordanForm:
    """Real basis ``T`` with ``T^-1 A T`` block diagonal.

    A real eigenvalue contributes its eigenvectors and a scalar block
    ``lambda I``.  A pair ``a +- bi`` (``b > 0``) contributes
    ``[Re t1, Im t1, Re t2, Im t2, ...]`` and blocks ``[[a, b], [-b, a]]``.
    """
    cols, blocks = [], []
    start = 0
    for i, g in enumerate(spec.groups):
        lam = complex(g.eigenvalue)
        if lam.imag == 0:
            d = g.multiplicity
            cols.append(np.real(g.vectors))
            blocks.append(RealJordanBlock(i, lam, start, start + d, lam.real * np.eye(d)))
            start += d
            continue
        if i not in spec.conjugate:
            raise InvalidInputError(f"group {i} ({lam}) has no conjugate partner")
        if lam.imag < 0:
            continue
        a, b = lam.real, lam.imag
        d = g.multiplicity
        pair = np.empty((g.vectors.shape[0], 2 * d))
        pair[:, 0::2] = g.vectors.real
        pair[:, 1::2] = g.vectors.imag
        cols.append(pair)
        D = np.array([[a, b], [-b, a]])
        blocks.append(RealJordanBlock(i, lam, start, start + 2 * d, np.kron(np.eye(d), D)))
        start += 2 * d
    if not cols:
        return RealJordanForm(np.zeros((0, 0)), np.zeros((0, 0)), ())
    basis = np.hstack(cols)
    return RealJordanForm(basis, scipy.linalg.block_diag(*[b.block for b in blocks]), tuple(blocks))


def real_jordan_basis(spec: SpectralData) -> np.ndarray:
    return real_jordan_form(spec).basis


def boundary_tolerance(M: np.ndarray) -> float:
    """Distance from the stability boundary treated as a tie: ``sqrt(eps) * max(1, ||M||_inf)``."""
    return float(np.sqrt(EPS) * max(1.0, float(np.linalg.norm(M, np.inf)) if M.size else 1.0))


def unstable_invariant_subspace(M, stability_margin: float = 0.0, tie_tol: float | None = None) -> np.ndarray:
    """Orthonormal basis of the invariant subspace for ``Re(lambda) >= -margin``.

    Computed from a real Schur form ordered so the selected eigenvalues
    lead.  Eigenvalues within ``tie_tol`` (default ``sqrt(eps) * max(1, ||M||)``)
    of the boundary count as unstable, which errs towards reporting
    "not detectable".
    """
    M = as_matrix(M, "M", dtype=float)
    n = M.shape[0]
    if M.shape != (n, n):
        raise InvalidInputError(f"M must be square, got {M.shape}")
    if n == 0:
        return np.zeros((0, 0))
    if tie_tol is None:
        tie_tol = boundary_tolerance(M)
    cutoff = -stability_margin - tie_tol
    _, Z, sdim = scipy.linalg.schur(M, output="real", sort=lambda re, im: re >= cutoff)
    return Z[:, :sdim]


# --- prime field -------------------------------------------------------------


def field_matmul(X: np.ndarray, Y: np.ndarray, p: int = PRIME) -> np.ndarray:
    """``X @ Y mod p`` for residue matrices, without int64 overflow.

    Accumulates one rank-1 term at a time; each term is below ``p**2 < 2**62``.
    """
    X = np.asarray(X, dtype=np.int64)
    Y = np.asarray(Y, dtype=np.int64)
    out = np.zeros((X.shape[0], Y.shape[1]), dtype=np.int64)
    for k in range(X.shape[1]):
        out = (out + np.outer(X[:, k], Y[k]) % p) % p
    return out


def field_observability_matrix(A: np.ndarray, C: np.ndarray, p: int = PRIME) -> np.ndarray:
    n = A.shape[0]
    blocks = []
    block = np.asarray(C, dtype=np.int64) % p
    for _ in range(n):
        blocks.append(block)
        block = field_matmul(block, A, p)
    return np.vstack(blocks) if blocks else np.zeros((0, 0), dtype=np.int64)


def prime_field_rank(M, p: int = PRIME) -> int:
    """Exact rank over GF(p) by Gaussian elimination."""
    M = np.array(M, dtype=np.int64) % p
    if M.ndim != 2 or M.size == 0:
        return 0
    rows, cols = M.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(M[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            M[[r, piv]] = M[[piv, r]]
        M[r] = M[r] * pow(int(M[r, c]), p - 2, p) % p
        below = np.nonzero(M[r + 1:, c])[0] + r + 1
        if below.size:
            M[below] = (M[below] - np.outer(M[below, c], M[r]) % p) % p
        r += 1
    return r
