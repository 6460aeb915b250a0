"""Spectral flow of the interface Robin family and the deficiency identity.

As ``sigma`` grows from 0 to infinity the eigenvalues of
``T_sigma = base + sigma*h*P_Gamma`` increase monotonically from the base
spectrum to the spectrum of the decoupled subdomains.  Counting how many
of them cross the level ``l_k + eps`` gives the Morse index of the DN
matrix there, and ``ell - k = 1 - m + Mor`` ties that count to the
labelling of the partition energy ``l_k``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import circle_model as cm
from .eigen_core import (
    CLUSTER_RTOL,
    DENSE_CUTOFF,
    SymmetricOperator,
    eig_dense,
    eig_lowest,
    morse_index,
    schur_dn,
)
from .errors import (
    EpsilonWindowEmpty,
    InteriorResonance,
    LevelOnSpectrum,
    MonotonicityViolation,
    NotEquipartition,
)
from .grid_model import GridPartition, RobinFamily, assemble_laplacian, assemble_slit, robin_family
from .report import DeficiencyReport

MONOTONE_SLACK = 1e-10
EQUI_TOL = 1e-8


def worker_count(requested: int | None = None) -> int:
    """Threads for independent solves; PARTITION_FLOW_THREADS caps it (0 = auto)."""
    if requested is None:
        try:
            requested = int(os.environ.get("PARTITION_FLOW_THREADS", "0"))
        except ValueError:
            requested = 0
    if requested <= 0:
        requested = os.cpu_count() or 1
    return max(1, requested)


def lowest_eigenvalues(A: SymmetricOperator, count: int | None = None) -> np.ndarray:
    """Ascending eigenvalues; all of them below the dense cutoff."""
    if A.dimension <= DENSE_CUTOFF:
        w = eig_dense(A, vectors=False).eigenvalues
        return w if count is None else w[:count]
    if count is None:
        raise ValueError("operator too large for a full spectrum; pass count")
    return eig_lowest(A, count, block=max(4, min(8, count))).eigenvalues


def family_for(grid: GridPartition, slit_flag: bool) -> RobinFamily:
    base = assemble_slit(grid) if slit_flag else assemble_laplacian(grid)
    return robin_family(grid, base)


# ---------------------------------------------------------------------------
# sigma sweeps
# ---------------------------------------------------------------------------

@dataclass
class FlowBranch:
    sigma_samples: np.ndarray
    level_values: np.ndarray          # shape (levels, samples)
    infinity_values: np.ndarray
    family: RobinFamily | None = field(default=None, repr=False)
    crossings: list = field(default_factory=list)

    @property
    def levels(self) -> int:
        return self.level_values.shape[0]

    @property
    def sigma_max(self) -> float:
        return float(self.sigma_samples[-1])

    def to_rows(self):
        for j, s in enumerate(self.sigma_samples):
            yield [float(s)] + [float(v) for v in self.level_values[:, j]]


def default_sigma_max(h: float) -> float:
    return 1e4 / h**2


def sigma_grid(sigma_max: float, samples: int) -> np.ndarray:
    if sigma_max <= 0 or samples < 2:
        raise ValueError("need sigma_max > 0 and at least two samples")
    return np.concatenate([[0.0], np.geomspace(sigma_max * 1e-7, sigma_max, samples - 1)])


def sigma_sweep(family: RobinFamily, sigma_max: float | None = None, samples: int = 64,
                levels: int | None = None, workers: int | None = None) -> FlowBranch:
    """Lowest ``levels`` eigenvalues of ``T_sigma`` on a log-spaced sigma grid."""
    k = family.grid.domain_count
    if levels is None:
        levels = k + 1
    if levels < k + 1:
        raise ValueError(f"track at least k+1 = {k + 1} levels")
    levels = min(levels, family.base.dimension)
    if sigma_max is None:
        sigma_max = default_sigma_max(family.grid.h)
    sig = sigma_grid(sigma_max, samples)

    def solve(s):
        return lowest_eigenvalues(family.at(s), levels)

    n = worker_count(workers)
    if n == 1:
        cols = [solve(s) for s in sig]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            cols = list(pool.map(solve, sig))      # map keeps sample order
    vals = np.column_stack(cols)
    inf_vals = lowest_eigenvalues(family.at(np.inf), min(levels, len(family.free_rows)))
    scale = max(np.abs(vals).max(), 1.0)
    drop = np.diff(vals, axis=1)
    if (drop < -MONOTONE_SLACK * scale).any():
        n_bad, j_bad = np.unravel_index(np.argmin(drop), drop.shape)
        raise MonotonicityViolation(
            f"lambda_{n_bad + 1} decreases between sigma={sig[j_bad]:.4g} and {sig[j_bad + 1]:.4g}"
        )
    m = min(levels, inf_vals.size)
    if (vals[:m] > inf_vals[:m, None] + MONOTONE_SLACK * scale).any():
        raise MonotonicityViolation("a branch exceeds its sigma = infinity limit")
    return FlowBranch(sig, vals, inf_vals, family)


def crossing_count(branch: FlowBranch, level: float, refine: bool = True,
                   rtol: float = CLUSTER_RTOL) -> int:
    """Number of branches passing from below ``level`` to above it.

    Crossings are bracketed on the sample grid and, when the branch keeps
    its family, bisected down to a sigma interval of width
    ``1e-6 * sigma_max``.  The brackets are stored in ``branch.crossings``.
    """
    vals = branch.level_values
    scale = max(np.abs(vals).max(), 1.0)
    tol = rtol * scale
    for j in (0, -1):
        hit = np.abs(vals[:, j] - level) <= tol
        if hit.any():
            raise LevelOnSpectrum(
                f"level {level!r} within {tol:.2e} of lambda_{int(np.argmax(hit)) + 1}"
                f" at sigma={branch.sigma_samples[j]:.4g}"
            )
    if vals[-1, 0] < level:
        raise ValueError("too few levels tracked: the top branch starts below the level")
    rows = np.flatnonzero((vals[:, 0] < level) & (vals[:, -1] > level))
    branch.crossings = []
    for n in rows:
        j = int(np.argmax(vals[n] > level))
        lo, hi = branch.sigma_samples[j - 1], branch.sigma_samples[j]
        if refine and branch.family is not None:
            width = 1e-6 * branch.sigma_max
            while hi - lo > width:
                mid = 0.5 * (lo + hi)
                w = lowest_eigenvalues(branch.family.at(mid), n + 1)
                if w[n] > level:
                    hi = mid
                else:
                    lo = mid
        branch.crossings.append((int(n) + 1, (float(lo), float(hi))))
    return int(rows.size)


# ---------------------------------------------------------------------------
# deficiency
# ---------------------------------------------------------------------------

def _next_above(values, x, tol):
    above = values[values > x + tol]
    return float(above.min()) if above.size else np.inf


def deficiency(grid: GridPartition, slit_flag: bool = False, epsilon_policy="auto",
               equipartition_tol: float = EQUI_TOL, check_flow: bool = False) -> DeficiencyReport:
    """Assemble everything needed for ``ell - k = 1 - m + Mor`` and check it.

    ``epsilon_policy`` is ``"auto"`` (a quarter of the smaller gap above
    ``l_k`` in the spectra of ``T_0`` and ``T_inf``) or a number.
    """
    family = family_for(grid, slit_flag)
    k = grid.domain_count

    firsts = np.array([lowest_eigenvalues(B, 1)[0] for B in family.infinity_blocks()])
    T_inf = family.at(np.inf)
    T_0 = family.at(0.0)
    need = None
    if max(T_inf.dimension, T_0.dimension) > DENSE_CUTOFF:
        need = min(4 * k + 8, T_0.dimension)
    w_inf = lowest_eigenvalues(T_inf, need)
    l_k = float(w_inf[0])
    scale = max(abs(l_k), 1.0)
    equi = float(np.abs(firsts - l_k).max())
    if equi > equipartition_tol * scale:
        raise NotEquipartition(
            f"first Dirichlet eigenvalues {np.round(firsts, 10).tolist()} differ by {equi:.3e}"
        )
    ctol = CLUSTER_RTOL * max(np.abs(w_inf).max(), 1.0)
    k_cluster = int(np.sum(np.abs(w_inf - l_k) <= max(ctol, equipartition_tol * scale)))
    if k_cluster != k:
        raise NotEquipartition(f"lowest T_inf cluster has size {k_cluster}, expected {k}")

    w0 = lowest_eigenvalues(T_0, need)
    tol0 = CLUSTER_RTOL * max(np.abs(w0).max(), 1.0)
    ell = 1 + int(np.sum(w0 < l_k - tol0))
    m = int(np.sum(np.abs(w0 - l_k) <= tol0))
    if need is not None and ell + m >= w0.size:
        raise EpsilonWindowEmpty("not enough eigenvalues computed above l_k")

    gap0 = _next_above(w0, l_k, tol0) - l_k
    gap_inf = _next_above(w_inf, l_k, max(ctol, equipartition_tol * scale)) - l_k
    window = min(gap0, gap_inf)
    if epsilon_policy == "auto":
        if not np.isfinite(window) or window <= 10 * tol0:
            raise EpsilonWindowEmpty(f"no room above l_k={l_k:.6g} (gaps {gap0:.3e}, {gap_inf:.3e})")
        eps = window / 4.0
    else:
        eps = float(epsilon_policy)
        if not 0 < eps < window:
            raise EpsilonWindowEmpty(f"epsilon={eps!r} outside (0, {window:.6g})")

    lam = l_k + eps
    dn = schur_dn(family.base, lam, family.gamma_rows)
    mor = morse_index(dn.entries)
    extras = {
        "lambda": lam,
        "gap0": gap0,
        "gap_inf": gap_inf,
        "slit": bool(slit_flag),
        "dn_dimension": dn.dimension,
        "dn_symmetry_defect": dn.symmetry_defect(),
        "counting": int(np.sum(w0 < lam) - np.sum(w_inf < lam)),
    }
    if check_flow:
        branch = sigma_sweep(family, levels=max(k + 1, ell + m + 1))
        extras["crossings"] = crossing_count(branch, lam)
    return DeficiencyReport(k=k, ell=ell, m=m, mor=mor, epsilon=eps, energy=l_k,
                            equipartition_residual=equi, extras=extras)


def circle_report(N: int, epsilon: float = 1e-3) -> DeficiencyReport:
    return cm.circle_deficiency(cm.CircleConfig(N), epsilon)


# ---------------------------------------------------------------------------
# DN / Robin correspondence
# ---------------------------------------------------------------------------

def _multiplicity(values, target, rtol=CLUSTER_RTOL):
    scale = max(np.abs(values).max(initial=0.0), abs(target), 1.0)
    return int(np.sum(np.abs(values - target) <= rtol * scale))


def counting_check(family: RobinFamily, lam: float):
    """``(Mor(DN(lam)), N_0(lam) - N_inf(lam))`` at an admissible level."""
    dn = schur_dn(family.base, lam, family.gamma_rows)
    w0 = lowest_eigenvalues(family.at(0.0))
    winf = lowest_eigenvalues(family.at(np.inf))
    return morse_index(dn.entries), int(np.sum(w0 < lam) - np.sum(winf < lam))


@dataclass
class LemmaReport:
    checked: int = 0
    skipped: int = 0
    failures: list = field(default_factory=list)
    max_mismatch: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures


def lemma_eigeig_check(grid: GridPartition, slit_flag: bool = False, trials: int = 20,
                       seed: int = 0, rtol: float = 1e-8) -> LemmaReport:
    """Check both directions of: ``lam in spec(T_sigma)`` with multiplicity d
    iff ``-sigma in spec(DN(lam))`` with multiplicity d.

    Trials whose ``lam`` hits the decoupled spectrum (the eigenvector has no
    trace on Gamma) are skipped and counted.
    """
    rng = np.random.default_rng(seed)
    family = family_for(grid, slit_flag)
    h = grid.h
    gamma = family.gamma_rows
    rep = LemmaReport()
    if gamma.size == 0:
        return rep
    w_inf = lowest_eigenvalues(family.at(np.inf))
    w0 = lowest_eigenvalues(family.at(0.0))
    top = float(w0[min(len(w0) - 1, 3 * grid.domain_count + 6)])
    for t in range(trials):
        # forward: an eigenvalue of T_sigma gives -sigma in spec(DN)
        sigma = float(10 ** rng.uniform(-1, 3)) / h
        w = lowest_eigenvalues(family.at(sigma))
        idx = int(rng.integers(0, min(len(w), 3 * grid.domain_count + 6)))
        lam = float(w[idx])
        d = _multiplicity(w, lam, rtol)
        try:
            dn = schur_dn(family.base, lam, gamma).eigenvalues()
        except InteriorResonance:
            rep.skipped += 1
            continue
        got = _multiplicity(dn, -sigma, rtol)
        mism = float(np.abs(dn - (-sigma)).min() / max(sigma, 1.0))
        rep.max_mismatch = max(rep.max_mismatch, mism)
        rep.checked += 1
        if got != d:
            rep.failures.append(("forward", t, sigma, lam, d, got))

        # converse: a negative DN eigenvalue gives an eigenvalue of T_sigma
        lam = float(rng.uniform(0.5 * w0[0], top))
        if _multiplicity(w_inf, lam, 1e-6) or _multiplicity(w0, lam, 1e-6):
            rep.skipped += 1
            continue
        dn = schur_dn(family.base, lam, gamma).eigenvalues()
        neg = dn[dn < -1e-8 * max(np.abs(dn).max(), 1.0)]
        if neg.size == 0:
            continue
        mu = float(neg[int(rng.integers(0, neg.size))])
        d = _multiplicity(dn, mu, rtol)
        w = lowest_eigenvalues(family.at(-mu))
        got = _multiplicity(w, lam, rtol)
        mism = float(np.abs(w - lam).min() / max(abs(lam), 1.0))
        rep.max_mismatch = max(rep.max_mismatch, mism)
        rep.checked += 1
        if got != d:
            rep.failures.append(("converse", t, -mu, lam, d, got))
    return rep


@dataclass
class ComparisonReport:
    lam: float
    full: np.ndarray
    restricted: np.ndarray
    contained: bool
    interlaced: bool
    max_distance: float


def compare_spectra(full, restricted, rtol: float = CLUSTER_RTOL) -> tuple[bool, bool, float]:
    """Containment and Cauchy interlacing of a principal-submatrix spectrum."""
    full = np.sort(np.asarray(full))
    restricted = np.sort(np.asarray(restricted))
    scale = max(np.abs(full).max(initial=0.0), 1.0)
    if restricted.size == 0:
        return True, True, 0.0
    dist = np.array([np.abs(full - r).min() for r in restricted])
    contained = bool((dist <= rtol * scale).all())
    r = full.size - restricted.size
    slack = rtol * scale
    interlaced = bool(
        (full[: restricted.size] <= restricted + slack).all()
        and (restricted <= full[r:] + slack).all()
    )
    return contained, interlaced, float(dist.max())


def compare_constructions(grid: GridPartition, lam: float | None = None) -> ComparisonReport:
    """DN on all of Gamma against DN with traces pinned to zero on the slit."""
    family = family_for(grid, slit_flag=True)
    if lam is None:
        lam = deficiency(grid, slit_flag=True).extras["lambda"]
    dn = schur_dn(family.base, lam, family.gamma_rows)
    slit_nodes = {n for e in grid.slit_edges for n in e}
    keep = [r for r, key in enumerate(dn.interface_dofs) if key not in slit_nodes]
    full = dn.eigenvalues()
    restricted = np.linalg.eigvalsh(dn.entries[np.ix_(keep, keep)]) if keep else np.zeros(0)
    contained, interlaced, dist = compare_spectra(full, restricted)
    return ComparisonReport(lam, full, restricted, contained, interlaced, dist)


def compare_circle(N: int, lam: float) -> ComparisonReport:
    cfg = cm.CircleConfig(N)
    full = np.linalg.eigvalsh(cm.build_M(cfg, lam))
    restricted = np.linalg.eigvalsh(cm.build_M0(cfg, lam))
    contained, interlaced, dist = compare_spectra(full, restricted, 1e-10)
    return ComparisonReport(lam, full, restricted, contained, interlaced, dist)


__all__ = [
    "FlowBranch", "sigma_sweep", "crossing_count", "deficiency", "circle_report",
    "counting_check", "lemma_eigeig_check", "LemmaReport", "compare_constructions",
    "compare_circle", "compare_spectra", "ComparisonReport", "family_for",
    "lowest_eigenvalues", "default_sigma_max", "sigma_grid", "worker_count",
]
