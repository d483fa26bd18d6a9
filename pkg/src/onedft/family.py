"""Power-family potentials whose ground states are ``c_n * rho_0**n``.

Given a ground pair ``(rho_0, V)`` with energy ``E_0``::

    f(x)   = (hbar^2/4m) (rho_0'/rho_0)^2
    V_n(x) = 2n V(x) + (2n - 1) n f(x)
    E_n    = 2n E_0

For ``n = 2**j`` the same potentials follow from the doubling recursion
``z_{j+1} = 2 z_j + (2**(j+1))**2 f`` started at ``z_0 = V_1``, whose solution
is ``V_n = n V_1 + 2n(n - 1) f``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .densities import Density, wavefunction_from_density_power
from .eigensolver import build_hamiltonian, ground_state
from .errors import UnsanctionedIndex
from .functionals import (
    NATURAL,
    PhysicalConstants,
    Potential,
    dilate_invalid,
    squared_log_slope,
)
from .grid import RealField, derivative, integrate, second_derivative

__all__ = [
    "FamilyIndex",
    "CuspTerm",
    "VerificationReport",
    "cusp_term",
    "family_potential",
    "family_energy",
    "family_recursion_step",
    "family_closed_form_from_v1",
    "verify_family_member",
    "appendix_b_residual",
]


@dataclass(frozen=True)
class FamilyIndex:
    n: float

    def __post_init__(self):
        if not (self.n > 0 and math.isfinite(self.n)):
            raise ValueError(f"family index must be positive, got {self.n}")
        object.__setattr__(self, "n", float(self.n))

    @property
    def j(self) -> int | None:
        """``log2(n)`` when n is a power of two, else None."""
        if self.n < 1 or self.n != int(self.n):
            return None
        k = int(self.n)
        return k.bit_length() - 1 if k & (k - 1) == 0 else None

    @property
    def is_paper_sanctioned(self) -> bool:
        return self.j is not None


def _index(n) -> FamilyIndex:
    return n if isinstance(n, FamilyIndex) else FamilyIndex(n)


@dataclass(frozen=True, eq=False)
class CuspTerm:
    """``f = (hbar^2/4m) (rho'/rho)^2``; ``field.mask`` marks valid nodes."""

    field: RealField

    @property
    def values(self) -> np.ndarray:
        return self.field.values

    @property
    def valid(self) -> np.ndarray:
        return self.field.valid


def cusp_term(rho: Density, c: PhysicalConstants = NATURAL, V: Potential | None = None) -> CuspTerm:
    """Squared log-slope term.

    Pass ``V`` to fill the nodes carrying its delta terms from one-sided
    slopes instead of the (vanishing) central difference across the cusp.
    """
    y2, valid = squared_log_slope(rho, V)
    f = (c.hbar**2 / (4 * c.mass)) * np.where(valid, y2, 0.0)
    return CuspTerm(RealField(rho.grid, f, False, valid))


def family_potential(n, rho: Density, V: Potential, c: PhysicalConstants = NATURAL) -> Potential:
    n = _index(n).n
    f = cusp_term(rho, c, V)
    return V.combine(2 * n, (2 * n - 1) * n * f.values, f.valid)


def family_energy(n, E0: float) -> float:
    return 2 * _index(n).n * E0


def family_recursion_step(Vj: Potential, j: int, f: CuspTerm) -> Potential:
    """One step of ``z_{j+1} = 2 z_j + (2**(j+1))**2 f``."""
    if j < 0 or int(j) != j:
        raise ValueError(f"recursion index must be a nonnegative integer, got {j}")
    return Vj.combine(2.0, float(2 ** (j + 1)) ** 2 * f.values, f.valid)


def family_closed_form_from_v1(n, V1: Potential, f: CuspTerm) -> Potential:
    """``n V_1 + 2n(n - 1) f``; only defined for ``n = 2**j``."""
    idx = _index(n)
    if not idx.is_paper_sanctioned:
        raise UnsanctionedIndex(f"n={idx.n:g} is not a power of two")
    n = idx.n
    return V1.combine(n, 2 * n * (n - 1) * f.values, f.valid)


@dataclass(frozen=True)
class VerificationReport:
    n: float
    E_expected: float
    E_num: float
    rel_err: float
    overlap: float
    passed: bool
    sanctioned: bool = True

    def as_row(self) -> dict:
        row = asdict(self)
        row["pass"] = row.pop("passed")
        del row["sanctioned"]
        return row


def verify_family_member(
    n,
    rho: Density,
    V: Potential,
    E0: float,
    c: PhysicalConstants = NATURAL,
    *,
    energy_rtol: float = 5e-3,
    min_overlap: float = 0.999,
    potential: Potential | None = None,
) -> VerificationReport:
    """Eigensolve ``V_n`` and compare with ``2n E_0`` and ``c_n rho**n``.

    ``potential`` overrides the potential that is eigensolved (by default
    ``family_potential(n, rho, V)``).
    """
    idx = _index(n)
    Vn = family_potential(idx, rho, V, c) if potential is None else potential
    E_num, psi = ground_state(build_hamiltonian(Vn, c=c))
    E_exp = family_energy(idx, E0)
    target = wavefunction_from_density_power(rho, idx.n)
    overlap = abs(integrate(psi.field.with_values(psi.values * target.values)))
    rel = abs(E_num - E_exp) / abs(E_exp) if E_exp != 0 else abs(E_num)
    ok = rel < energy_rtol and overlap > min_overlap
    return VerificationReport(idx.n, E_exp, E_num, rel, overlap, bool(ok), idx.is_paper_sanctioned)


def appendix_b_residual(
    n,
    rho: Density,
    V: Potential,
    Vn: Potential,
    E0: float,
    c: PhysicalConstants = NATURAL,
    *,
    margin: int = 0,
) -> RealField:
    """Second Euler equation (density ``rho**(2n)``, potential ``V_n``, energy ``2n E_0``)
    minus ``2n`` times the first (``rho``, ``V``, ``E_0``).

    Both equations are written in terms of ``u = (ln rho)'`` and
    ``w = (ln rho)''`` taken from the same stencils, so the residual isolates
    the potential/energy bookkeeping.  Nodes carrying delta terms and their
    neighbours are masked, as are walls and nodes within ``margin`` of them.
    """
    n = _index(n).n
    r = rho.values
    pref = c.hbar**2 / (8 * c.mass)
    y2, valid = squared_log_slope(rho, V)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        safe = np.maximum(r, rho.floor)
        lap = second_derivative(rho.field).values / safe
        w = lap - derivative(rho.field).values ** 2 / safe**2
    En = family_energy(n, E0)
    with np.errstate(invalid="ignore"):
        first = -pref * (2 * w + y2) + V.values - E0
        second = -pref * (4 * n * w + 4 * n * n * y2) + Vn.values - En
        res = second - 2 * n * first
    ok = valid & ~V.walls & ~Vn.walls & np.isfinite(res)
    ok[0] = ok[-1] = False
    for i in V.delta_nodes() + Vn.delta_nodes():
        ok[max(i - 1, 0) : i + 2] = False
    ok = dilate_invalid(ok, margin)
    return RealField(rho.grid, np.where(ok, res, 0.0), False, ok)
