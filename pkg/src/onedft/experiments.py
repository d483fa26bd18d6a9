"""Reusable experiment drivers behind the command-line interface.

Each function returns plain records so that the CLI only has to format and
write them.  Nothing here touches the filesystem.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .densities import Density, density_from_wavefunction, log_derivative
from .eigensolver import build_hamiltonian, ground_state
from .family import VerificationReport, family_potential, verify_family_member
from .functionals import NATURAL, PhysicalConstants, Potential, kinetic_energy, potential_energy
from .grid import Grid1D
from .scf import ScfParams, SolveReport, minimize_energy, scf_solve
from .systems import (
    IDENTITY_POINTS,
    AnalyticSystem,
    analytic_density,
    analytic_family_potential,
    analytic_ground_energy,
    analytic_potential,
    identity_mask,
    natural_grid,
)

__all__ = [
    "SOLVERS",
    "ENERGY_RTOL",
    "IDENTITY_RTOL",
    "Solution",
    "solve",
    "energy_check",
    "identity_check",
    "family_checks",
    "CheckRow",
]

SOLVERS = ("scf", "minimize", "eigensolve")
# relative tolerances on E_0 (the oscillator's 1e-4 absolute at E_0 = 1/2)
ENERGY_RTOL = {"box": 1e-3, "oscillator": 2e-4, "delta": 1e-2}
IDENTITY_RTOL = 1e-6


@dataclass
class Solution:
    density: Density
    lam: float
    kinetic: float
    potential: float
    report: SolveReport

    @property
    def converged(self) -> bool:
        return self.report.converged

    def as_dict(self) -> dict:
        d = self.report.as_dict()
        d.update(
            {
                "lambda": self.lam,
                "kinetic": self.kinetic,
                "potential_energy": self.potential,
                "total": self.kinetic + self.potential,
            }
        )
        return d


def solve(
    V: Potential,
    solver: str = "scf",
    params: ScfParams = ScfParams(),
    c: PhysicalConstants = NATURAL,
) -> Solution:
    """Ground state of ``V`` by the chosen route.

    ``eigensolve`` diagonalizes the linear Hamiltonian directly and is the
    reference the density-only solvers are compared against.
    """
    if solver == "scf":
        rho, rep = scf_solve(V, params=params, c=c)
    elif solver == "minimize":
        rho, rep = minimize_energy(V, params=params, c=c)
    elif solver == "eigensolve":
        E, psi = ground_state(build_hamiltonian(V, c=c))
        rho = density_from_wavefunction(psi)
        rep = SolveReport(E, 1, [], True, solver="eigensolve", mu=E)
    else:
        raise ValueError(f"unknown solver {solver!r}")
    T = kinetic_energy(rho, c, V)
    P = potential_energy(rho, V)
    return Solution(rho, rep.lam, T, P, rep)


@dataclass(frozen=True)
class CheckRow:
    system: str
    quantity: str
    analytic: float
    numerical: float
    rel_err: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.rel_err < self.tolerance)

    def as_row(self) -> dict:
        return {
            "system": self.system,
            "quantity": self.quantity,
            "analytic": self.analytic,
            "numerical": self.numerical,
            "rel_err": self.rel_err,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


def energy_check(
    s: AnalyticSystem,
    grid: Grid1D | None = None,
    solver: str = "scf",
    params: ScfParams = ScfParams(),
) -> tuple[CheckRow, Solution]:
    g = natural_grid(s) if grid is None else grid
    sol = solve(analytic_potential(s, g), solver, params, s.constants)
    E0 = analytic_ground_energy(s)
    row = CheckRow(s.name, "E0", E0, sol.lam, abs(sol.lam - E0) / abs(E0), ENERGY_RTOL[s.name])
    return row, sol


def identity_check(s: AnalyticSystem, n, grid: Grid1D | None = None) -> CheckRow:
    """Worst node of derived ``V_n`` (from ``rho_0`` and ``V``) vs the closed form.

    The row carries the two values at the worst node.
    """
    g = natural_grid(s, IDENTITY_POINTS[s.name]) if grid is None else grid
    V = analytic_potential(s, g)
    rho = analytic_density(s, g)
    derived = family_potential(n, rho, V, s.constants)
    closed = analytic_family_potential(s, n, g)
    ok = derived.field.valid & closed.field.valid & identity_mask(s, g)
    a = derived.folded_values()[ok]
    b = closed.folded_values()[ok]
    scale = np.maximum(np.abs(b), np.finfo(float).tiny)
    rel = np.abs(a - b) / scale
    i = int(np.argmax(rel))
    return CheckRow(s.name, f"V_n max node error (n={n:g})", float(b[i]), float(a[i]), float(rel[i]), IDENTITY_RTOL)


def family_checks(
    ns,
    rho: Density,
    V: Potential,
    E0: float,
    c: PhysicalConstants = NATURAL,
    jobs: int | None = None,
) -> list[tuple[VerificationReport, Potential]]:
    """Build and verify ``V_n`` for each ``n``; independent eigensolves run in a thread pool."""

    def one(n):
        Vn = family_potential(n, rho, V, c)
        return verify_family_member(n, rho, V, E0, c, potential=Vn), Vn

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one, ns))


def slope_field(rho: Density) -> np.ndarray:
    """``(ln rho)'`` with masked nodes as NaN, for export."""
    y = log_derivative(rho)
    return np.where(y.valid, y.values, np.nan)
