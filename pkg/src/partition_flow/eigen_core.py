"""Symmetric eigensolvers, Schur complements and inertia counts.

Everything else in the package funnels its linear algebra through this
module.  Operators are real symmetric and usually sparse; Dirichlet-to-
Neumann matrices are small and dense.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    ConvergenceFailure,
    FactorizationError,
    InteriorResonance,
    ToleranceAmbiguity,
)

DENSE_CUTOFF = 4096
CLUSTER_RTOL = 1e-8


@dataclass(frozen=True)
class SymmetricOperator:
    """Real symmetric sparse matrix with a map from rows back to grid nodes.

    ``index[r]`` is the node (or ``(node, sheet)`` pair on a double cover)
    carried by row ``r``.  ``h`` is the mesh width the operator was built on.
    """

    matrix: sp.csr_matrix
    index: tuple[Hashable, ...] = ()
    h: float = 1.0

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix)
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be square, got {m.shape}")
        m.sum_duplicates()
        m.sort_indices()
        object.__setattr__(self, "matrix", m)
        if not self.index:
            object.__setattr__(self, "index", tuple(range(m.shape[0])))
        elif len(self.index) != m.shape[0]:
            raise ValueError("index length does not match matrix dimension")

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def position(self, node) -> int:
        try:
            lookup = self.__dict__["_lookup"]
        except KeyError:
            lookup = {key: r for r, key in enumerate(self.index)}
            object.__setattr__(self, "_lookup", lookup)
        return lookup[node]

    def positions(self, nodes) -> np.ndarray:
        return np.array([self.position(n) for n in nodes], dtype=int)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def is_symmetric(self) -> bool:
        """Bitwise symmetry of the stored entries."""
        diff = self.matrix - self.matrix.T
        return diff.count_nonzero() == 0

    def norm(self) -> float:
        """Cheap upper bound on the spectral radius (max absolute row sum)."""
        if self.dimension == 0:
            return 0.0
        return float(abs(self.matrix).sum(axis=1).max())

    def submatrix(self, rows: Sequence[int]) -> "SymmetricOperator":
        rows = np.asarray(rows, dtype=int)
        m = self.matrix[rows][:, rows]
        return SymmetricOperator(m, tuple(self.index[r] for r in rows), self.h)

    def shifted(self, diagonal) -> "SymmetricOperator":
        """Return ``A + diag(diagonal)``."""
        m = self.matrix + sp.diags(np.broadcast_to(diagonal, (self.dimension,)))
        return SymmetricOperator(m, self.index, self.h)


@dataclass
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None
    residual_norms: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __len__(self):
        return len(self.eigenvalues)

    def clusters(self, rtol: float = CLUSTER_RTOL):
        return cluster(self.eigenvalues, rtol)


@dataclass
class DNMatrix:
    """Dense Dirichlet-to-Neumann matrix on the interface degrees of freedom."""

    lam: float
    interface_dofs: tuple
    entries: np.ndarray
    h: float = 1.0

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]

    def symmetry_defect(self) -> float:
        scale = max(np.abs(self.entries).max(initial=0.0), 1.0)
        return float(np.abs(self.entries - self.entries.T).max(initial=0.0) / scale)

    def eigenvalues(self) -> np.ndarray:
        if self.dimension == 0:
            return np.zeros(0)
        return sla.eigvalsh(self.entries)


def _as_array(A) -> np.ndarray:
    if isinstance(A, SymmetricOperator):
        return A.dense()
    if isinstance(A, DNMatrix):
        return A.entries
    if sp.issparse(A):
        return A.toarray()
    return np.asarray(A, dtype=float)


def _as_sparse(A) -> sp.csr_matrix:
    if isinstance(A, SymmetricOperator):
        return A.matrix
    if isinstance(A, DNMatrix):
        return sp.csr_matrix(A.entries)
    return sp.csr_matrix(A)


def cluster(values, rtol: float = CLUSTER_RTOL, scale: float | None = None):
    """Group sorted eigenvalues into ``(mean, multiplicity)`` clusters.

    Two neighbours belong to the same cluster when their gap is at most
    ``rtol * scale``; ``scale`` defaults to the spectral radius.
    """
    values = np.sort(np.asarray(values, dtype=float))
    if values.size == 0:
        return []
    if scale is None:
        scale = max(np.abs(values).max(), 1.0)
    out = []
    start = 0
    for i in range(1, values.size + 1):
        if i == values.size or values[i] - values[i - 1] > rtol * scale:
            chunk = values[start:i]
            out.append((float(chunk.mean()), int(chunk.size)))
            start = i
    return out


def eig_dense(A, vectors: bool = True, cutoff: int = DENSE_CUTOFF) -> Spectrum:
    """Full spectrum of a symmetric matrix.

    Backed by LAPACK ``syevd`` (Householder tridiagonalisation followed by
    an implicit tridiagonal eigensolver).
    """
    M = _as_array(A)
    n = M.shape[0]
    if n > cutoff:
        raise ValueError(f"dimension {n} exceeds dense cutoff {cutoff}")
    if n == 0:
        return Spectrum(np.zeros(0), np.zeros((0, 0)) if vectors else None, np.zeros(0))
    try:
        if vectors:
            w, V = np.linalg.eigh(M)
        else:
            w, V = np.linalg.eigvalsh(M), None
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    if V is not None:
        res = np.linalg.norm(M @ V - V * w, axis=0)
    else:
        res = np.zeros(n)
    return Spectrum(w, V, res)


def _factorize(A: sp.csr_matrix, shift: float):
    n = A.shape[0]
    K = (A - shift * sp.identity(n, format="csr")).tocsc()
    try:
        lu = spla.splu(K)
    except RuntimeError as exc:
        raise FactorizationError(f"shift {shift!r} hits the spectrum: {exc}") from exc
    pivots = np.abs(lu.U.diagonal())
    scale = max(float(abs(K).sum(axis=1).max()), 1.0)
    if pivots.min(initial=np.inf) <= 1e-14 * scale:
        raise FactorizationError(f"shift {shift!r} hits the spectrum (tiny pivot)")
    return lu


def _gershgorin_low(A: sp.csr_matrix) -> float:
    d = A.diagonal()
    off = np.asarray(abs(A).sum(axis=1)).ravel() - np.abs(d)
    return float((d - off).min())


def eig_lowest(
    A,
    m: int,
    shift: float | None = None,
    block: int = 4,
    tol: float = 1e-10,
    seed: int = 0,
    max_dim: int | None = None,
) -> Spectrum:
    """Eigenpairs nearest ``shift`` by block shift-invert Lanczos.

    With ``shift`` below the spectrum (the default is a Gershgorin lower
    bound) the result is the ``m`` lowest eigenpairs.  The Krylov basis is
    fully reorthogonalised; the block size bounds the multiplicity that
    can be resolved.
    """
    S = _as_sparse(A)
    n = S.shape[0]
    if m <= 0 or n == 0:
        return Spectrum(np.zeros(0), np.zeros((n, 0)), np.zeros(0))
    m = min(m, n)
    normA = max(float(abs(S).sum(axis=1).max()), 1e-300)
    if shift is None:
        shift = _gershgorin_low(S) - 1e-3 * normA
    lu = _factorize(S, shift)
    block = max(1, min(block, n))
    max_dim = n if max_dim is None else min(max_dim, n)

    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, block)))
    basis = [Q]
    images = []
    dim = block
    while True:
        W = lu.solve(basis[-1])
        images.append(W)
        Qall = np.hstack(basis)
        T = Qall.T @ np.hstack(images)
        T = 0.5 * (T + T.T)
        theta, Y = np.linalg.eigh(T)
        order = np.argsort(-np.abs(theta))[:m]
        theta_sel, Y_sel = theta[order], Y[:, order]
        X = Qall @ Y_sel
        lam = shift + 1.0 / theta_sel
        res = np.linalg.norm(S @ X - X * lam, axis=0)
        enough = dim >= min(max_dim, 2 * m + 2 * block)
        if (enough and np.all(res <= tol * normA)) or dim >= max_dim:
            break
        # next block: orthogonalise the images against the whole basis (twice)
        R = W - Qall @ (Qall.T @ W)
        R -= Qall @ (Qall.T @ R)
        take = min(block, max_dim - dim)
        Qn, Rn = np.linalg.qr(R[:, :take])
        keep = np.abs(np.diag(Rn)) > 1e-12 * max(np.abs(Rn).max(initial=0.0), 1e-300)
        if not keep.all():
            # invariant subspace found: refill with random directions
            fill = rng.standard_normal((n, int((~keep).sum())))
            fill -= Qall @ (Qall.T @ fill)
            Qn = np.hstack([Qn[:, keep], fill])
            Qn -= Qall @ (Qall.T @ Qn)
            Qn, _ = np.linalg.qr(Qn)
        basis.append(Qn)
        dim += Qn.shape[1]
    if np.any(res > max(tol, 1e-8) * normA):
        raise ConvergenceFailure(
            f"Lanczos residual {res.max():.3e} above tolerance after dim {dim}"
        )
    order = np.argsort(lam)
    return Spectrum(lam[order], X[:, order], res[order])


def schur_dn(H, lam: float, interface_dofs, h: float | None = None,
             resonance_tol: float = 1e-10, cutoff: int = DENSE_CUTOFF) -> DNMatrix:
    """Discrete Dirichlet-to-Neumann matrix of ``H`` at ``lam``.

    With ``B`` the interface rows and ``I`` the rest, returns
    ``[(H-lam)_BB - (H-lam)_BI (H-lam)_II^{-1} (H-lam)_IB] / h``.  The
    ``1/h`` makes ``-sigma`` an eigenvalue exactly when ``lam`` is an
    eigenvalue of ``H + sigma*h*P_B``.

    ``interface_dofs`` may be row positions or node keys of a
    :class:`SymmetricOperator`.
    """
    if isinstance(H, SymmetricOperator):
        A = H.matrix
        h = H.h if h is None else h
        dofs = list(interface_dofs)
        if dofs and not isinstance(dofs[0], (int, np.integer)):
            B = H.positions(dofs)
        else:
            B = np.asarray(dofs, dtype=int)
        keys = tuple(H.index[b] for b in B)
    else:
        A = sp.csr_matrix(H)
        h = 1.0 if h is None else h
        B = np.asarray(list(interface_dofs), dtype=int)
        keys = tuple(int(b) for b in B)
    n = A.shape[0]
    mask = np.ones(n, dtype=bool)
    mask[B] = False
    I = np.flatnonzero(mask)
    K = (A - lam * sp.identity(n, format="csr")).tocsr()
    K_BB = K[B][:, B].toarray()
    if I.size == 0:
        return DNMatrix(lam, keys, K_BB / h, h)
    K_II = K[I][:, I]
    K_IB = K[I][:, B].toarray()
    scale = max(float(abs(A).sum(axis=1).max()), abs(lam), 1.0)
    if I.size <= cutoff:
        KII = K_II.toarray()
        mu = sla.eigvalsh(KII)
        if np.abs(mu).min() <= resonance_tol * scale:
            raise InteriorResonance(
                f"lambda={lam!r} lies on the interior (decoupled) spectrum"
            )
        X = sla.solve(KII, K_IB, assume_a="sym")
    else:
        try:
            lu = spla.splu(K_II.tocsc())
        except RuntimeError as exc:
            raise InteriorResonance(str(exc)) from exc
        if np.abs(lu.U.diagonal()).min() <= resonance_tol * scale:
            raise InteriorResonance(f"lambda={lam!r} lies on the interior spectrum")
        X = lu.solve(K_IB)
    S = K_BB - K_IB.T @ X
    return DNMatrix(lam, keys, S / h, h)


def morse_index(M, tol: float = 1e-10) -> int:
    """Number of eigenvalues below ``-tol * scale`` (scale = spectral radius).

    Raises :class:`ToleranceAmbiguity` if any eigenvalue falls inside the
    band ``[-tol*scale, tol*scale]``.
    """
    w = eig_dense(M, vectors=False).eigenvalues
    if w.size == 0:
        return 0
    scale = max(np.abs(w).max(), np.finfo(float).tiny)
    band = tol * scale
    near = np.abs(w) <= band
    if near.any():
        raise ToleranceAmbiguity(
            f"eigenvalue(s) {w[near]} within +-{band:.3e} of zero; perturb lambda"
        )
    return int((w < -band).sum())


def count_below(values, level: float) -> int:
    return int(np.sum(np.asarray(values) < level))
