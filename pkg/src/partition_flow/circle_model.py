"""Equipartitions of the unit circle into N equal arcs.

Each arc of length ``theta = 2*pi/N`` carries a 2x2 Dirichlet-to-Neumann
block in closed form.  Gluing the arcs end to end gives an N x N matrix;
odd N uses the antiperiodic closure (one sign flip), even N the periodic
one.  Every quantity of the deficiency identity is available exactly, so
the circle serves as the reference against which the grid pipeline is
checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .eigen_core import SymmetricOperator, morse_index
from .errors import EpsilonTooLarge, SpectralPole
from .report import DeficiencyReport

POLE_TOL = 1e-12


@dataclass(frozen=True)
class CircleConfig:
    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"N must be an integer >= 2, got {self.N!r}")

    @property
    def theta(self) -> float:
        return 2.0 * math.pi / self.N

    @property
    def energy(self) -> float:
        # first Dirichlet eigenvalue (pi/theta)^2 of one arc
        return (self.N / 2.0) ** 2

    @property
    def antiperiodic(self) -> bool:
        return self.N % 2 == 1


@dataclass(frozen=True)
class EdgeDN:
    alpha: float
    beta: float
    lam: float

    def block(self) -> np.ndarray:
        return np.array([[self.alpha, self.beta], [self.beta, self.alpha]])


def edge_dn(lam: float, theta: float) -> EdgeDN:
    """DN block of one arc of length ``theta`` at spectral parameter ``lam``.

    Maps ``(u(0), u(theta))`` to ``(-u'(0), u'(theta))`` for the solution
    of ``-u'' = lam*u``.
    """
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam!r}")
    k = math.sqrt(lam)
    s = math.sin(k * theta)
    if abs(s) < POLE_TOL * k:
        n = round(k * theta / math.pi)
        raise SpectralPole(
            f"lambda={lam!r} is the Dirichlet eigenvalue (n*pi/theta)^2 with n={n}"
        )
    return EdgeDN(k * math.cos(k * theta) / s, -k / s, lam)


def build_M(config: CircleConfig, lam: float) -> np.ndarray:
    """Glued DN matrix on the N junction values (halved, as a quadratic form)."""
    N = config.N
    e = edge_dn(lam, config.theta)
    M = np.diag(np.full(N, e.alpha))
    half = 0.5 * e.beta
    if N == 2:
        # both arcs join the same two points; closure sign decides the sum
        M[0, 1] = M[1, 0] = half + half
        return M
    for i in range(N - 1):
        M[i, i + 1] = M[i + 1, i] = half
    corner = -half if config.antiperiodic else half
    M[0, N - 1] = M[N - 1, 0] = corner
    return M


def mu_spectrum(config: CircleConfig, lam: float) -> np.ndarray:
    """Closed-form eigenvalues ``alpha - beta*cos(2*k*pi/N)``, ascending."""
    e = edge_dn(lam, config.theta)
    k = np.arange(config.N)
    return np.sort(e.alpha - e.beta * np.cos(2.0 * np.pi * k / config.N))


def build_M0(config: CircleConfig, lam: float) -> np.ndarray:
    """``build_M`` with the junction at angle 0 pinned to zero.

    This is the principal submatrix obtained by deleting row and column 0;
    its eigenvalues are ``alpha + beta*cos(k*pi/N)``, k = 1..N-1.
    """
    return build_M(config, lam)[1:, 1:].copy()


def m0_spectrum(config: CircleConfig, lam: float) -> np.ndarray:
    e = edge_dn(lam, config.theta)
    k = np.arange(1, config.N)
    return np.sort(e.alpha + e.beta * np.cos(np.pi * k / config.N))


def epsilon_max(N: int) -> float:
    """Half the supremum of eps with cos(2*pi*eps/N) > cos(2*pi/N).

    The supremum is 1 for every N, so this returns 1/2.
    """
    # cos is decreasing on [0, pi], so delta_1(eps) > 0 exactly when eps < 1
    sup = 1.0
    return 0.5 * sup


def circle_levels(N: int, count: int) -> np.ndarray:
    """Lowest ``count`` eigenvalues of -d^2/dx^2 on the circle of length 2*pi.

    Antiperiodic closure for odd N (values ((2n-1)/2)^2, each twice),
    periodic for even N (n^2, doubled except n = 0).
    """
    vals = []
    n = 0
    while len(vals) < count:
        if N % 2:
            vals += [((2 * n + 1) / 2.0) ** 2] * 2
        else:
            vals += [float(n * n)] * (1 if n == 0 else 2)
        n += 1
    return np.array(vals[:count])


def circle_deficiency(config: CircleConfig, epsilon: float) -> DeficiencyReport:
    N = config.N
    if not 0 < epsilon < epsilon_max(N):
        raise EpsilonTooLarge(
            f"epsilon={epsilon!r} outside (0, {epsilon_max(N)}) for N={N}"
        )
    energy = config.energy
    levels = circle_levels(N, N + 4)
    tol = 1e-12 * energy
    ell = 1 + int(np.sum(levels < energy - tol))
    m = int(np.sum(np.abs(levels - energy) <= tol))

    lam = (N / 2.0 + epsilon) ** 2
    mu = mu_spectrum(config, lam)
    mor = int(np.sum(mu < 0))
    if mor != morse_index(build_M(config, lam)):
        raise EpsilonTooLarge("closed form and assembled matrix disagree on the Morse index")
    return DeficiencyReport(
        k=N,
        ell=ell,
        m=m,
        mor=mor,
        epsilon=float(epsilon),
        energy=energy,
        equipartition_residual=0.0,
        extras={"lambda": lam, "mu": mu.tolist()},
    )


def circle_chain(n: int, antiperiodic: bool = True, length: float = 2.0 * math.pi) -> SymmetricOperator:
    """Second-difference operator on ``n`` equispaced points of a circle.

    With ``antiperiodic`` the coupling between the last and first node is
    negated (a single slit node at 0).
    """
    if n < 3:
        raise ValueError("need at least 3 nodes")
    h = length / n
    i = np.arange(n)
    j = (i + 1) % n
    w = np.full(n, -1.0)
    if antiperiodic:
        w[-1] = 1.0
    rows = np.concatenate([i, i, j])
    cols = np.concatenate([i, j, i])
    vals = np.concatenate([np.full(n, 2.0), w, w]) / h**2
    A = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return SymmetricOperator(A, h=h)


def circle_robin_chain(config: CircleConfig, per_arc: int, sigma: float) -> tuple[SymmetricOperator, np.ndarray]:
    """Fine chain with a point Robin term of strength ``sigma`` at each junction.

    The junction rows get ``sigma/h`` added, the quadrature of
    ``sigma * sum_j u(x_j)^2``.  Since ``build_M`` is half the glued DN map,
    ``lam`` is an eigenvalue of this chain (up to O(h^2)) exactly when
    ``-sigma/2`` is an eigenvalue of ``build_M(config, lam)``.
    Returns the operator and the row positions of the junctions.
    """
    n = config.N * per_arc
    base = circle_chain(n, antiperiodic=config.antiperiodic)
    junctions = np.arange(0, n, per_arc)
    mass = np.zeros(n)
    mass[junctions] = sigma / base.h
    return base.shifted(mass), junctions


def closed_form_matches(config: CircleConfig, lam: float, tol: float = 1e-10) -> bool:
    A = build_M(config, lam)
    w = np.linalg.eigvalsh(A)
    scale = max(1.0, np.abs(w).max())
    return bool(np.abs(w - mu_spectrum(config, lam)).max() <= tol * scale)


def multiset_equal(a, b, tol: float = 1e-10) -> bool:
    a, b = np.sort(np.asarray(a)), np.sort(np.asarray(b))
    if a.shape != b.shape:
        return False
    scale = max(1.0, np.abs(a).max(initial=0.0), np.abs(b).max(initial=0.0))
    return bool(np.abs(a - b).max(initial=0.0) <= tol * scale)


__all__ = [
    "CircleConfig", "EdgeDN", "edge_dn", "build_M", "mu_spectrum", "build_M0",
    "m0_spectrum", "epsilon_max", "circle_levels", "circle_deficiency",
    "circle_chain", "circle_robin_chain", "closed_form_matches", "multiset_equal",
]
