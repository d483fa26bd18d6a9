"""Finite-difference ground state of ``-(hbar^2/2m) d2/dx2 + V``.

The Hamiltonian is a symmetric tridiagonal matrix on the free (non-wall,
non-endpoint) nodes with Dirichlet boundaries.  The lowest eigenpair comes
from LAPACK's Sturm-sequence bisection (``stebz``) followed by inverse
iteration (``stein``), reached through :func:`scipy.linalg.eigh_tridiagonal`.
:func:`sturm_count` is an independent pure-numpy eigenvalue counter used to
cross-check the result.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .densities import Wavefunction
from .errors import NoConvergence
from .functionals import NATURAL, PhysicalConstants, Potential
from .grid import Grid1D, RealField, integrate

__all__ = ["DiscreteHamiltonian", "build_hamiltonian", "ground_state", "sturm_count"]


@dataclass(frozen=True, eq=False)
class DiscreteHamiltonian:
    """Tridiagonal ``H`` restricted to ``nodes`` (indices into the grid).

    ``offdiag[k]`` couples ``nodes[k]`` and ``nodes[k+1]``; it is zero where
    a wall separates two free nodes, which splits the matrix into blocks.
    """

    grid: Grid1D
    nodes: np.ndarray
    diag: np.ndarray
    offdiag: np.ndarray

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def kinetic_scale(self) -> float:
        """Largest eigenvalue of the bare kinetic stencil, ``4 hbar^2 / (2 m h^2)``."""
        return 2 * float(np.max(np.abs(self.offdiag), initial=0.0)) * 2

    @property
    def norm(self) -> float:
        """Infinity norm (max absolute row sum)."""
        row = np.abs(self.diag).copy()
        row[:-1] += np.abs(self.offdiag)
        row[1:] += np.abs(self.offdiag)
        return float(row.max())

    def apply(self, u: np.ndarray) -> np.ndarray:
        out = self.diag * u
        out[:-1] += self.offdiag * u[1:]
        out[1:] += self.offdiag * u[:-1]
        return out

    def embed(self, u: np.ndarray) -> np.ndarray:
        """Scatter a free-node vector onto the full grid (zero elsewhere)."""
        full = np.zeros(self.grid.n_points)
        full[self.nodes] = u
        return full


def build_hamiltonian(
    V: Potential, grid: Grid1D | None = None, c: PhysicalConstants = NATURAL
) -> DiscreteHamiltonian:
    grid = V.grid if grid is None else grid
    if grid != V.grid:
        raise ValueError("potential is sampled on a different grid")
    h = grid.h
    free = ~V.walls
    free[0] = free[-1] = False
    nodes = np.flatnonzero(free)
    if nodes.size == 0:
        raise ValueError("no free nodes between the walls")
    t = c.kinetic_prefactor / h**2
    diag = V.folded_values()[nodes] + 2 * t
    adjacent = np.diff(nodes) == 1
    offdiag = np.where(adjacent, -t, 0.0)
    return DiscreteHamiltonian(grid, nodes, diag, offdiag)


def sturm_count(diag: np.ndarray, offdiag: np.ndarray, x: float) -> int:
    """Number of eigenvalues of the tridiagonal matrix strictly below ``x``."""
    count = 0
    q = 1.0
    tiny = np.finfo(float).tiny
    for k in range(diag.size):
        b2 = offdiag[k - 1] ** 2 if k > 0 else 0.0
        q = diag[k] - x - b2 / q
        if q == 0.0:
            q = -tiny
        if q < 0:
            count += 1
    return count


def ground_state(H: DiscreteHamiltonian, rtol: float = 1e-8) -> tuple[float, Wavefunction]:
    """Lowest eigenvalue and its normalized, positive-mean eigenvector.

    Soft walls put entries many orders of magnitude above the kinetic scale
    ``4 hbar^2/(2m h^2)`` on the diagonal.  LAPACK's default bisection
    tolerance is relative to the full matrix norm, which would then swamp the
    low end of the spectrum, so both the bisection tolerance and the residual
    check are taken relative to ``kinetic scale + |E|`` instead.
    """
    scale = H.kinetic_scale
    if H.size == 1:
        E, u = float(H.diag[0]), np.ones(1)
    else:
        lower = float(np.min(H.diag - np.abs(np.r_[H.offdiag, 0]) - np.abs(np.r_[0, H.offdiag])))
        tol = 4 * np.finfo(float).eps * (scale + abs(lower))
        try:
            w, v = eigh_tridiagonal(
                H.diag, H.offdiag, select="i", select_range=(0, 0),
                lapack_driver="stebz", tol=tol,
            )
        except LinAlgError as exc:
            raise NoConvergence(f"tridiagonal eigensolver failed: {exc}") from exc
        E, u = float(w[0]), v[:, 0]
    resid = np.abs(H.apply(u) - E * u).max()
    if resid > rtol * (scale + abs(E)):
        raise NoConvergence(f"eigenvector residual {resid:.3e} above tolerance")
    psi = H.embed(u)
    if psi.sum() < 0:
        psi = -psi
    field = RealField(H.grid, psi, True)
    psi = psi / np.sqrt(integrate(field.with_values(psi**2)))
    return E, Wavefunction(field.with_values(psi))
