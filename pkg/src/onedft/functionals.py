"""Energy functional, kinetic functionals, effective potential, Euler residual.

Kinetic energy is evaluated through ``phi = sqrt(rho)``:
``(hbar^2/8m) * int (rho'/rho)^2 rho dx == (hbar^2/2m) * int (phi')^2 dx``,
which stays regular where the density vanishes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .densities import Density, log_derivative
from .grid import Grid1D, RealField, derivative, integrate, second_derivative

__all__ = [
    "PhysicalConstants",
    "NATURAL",
    "Potential",
    "kinetic_energy",
    "kinetic_energy_laplacian_form",
    "potential_energy",
    "total_energy",
    "squared_log_slope",
    "effective_potential",
    "euler_residual",
    "dilate_invalid",
]


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0 and self.mass > 0):
            raise ValueError("hbar and mass must be strictly positive")

    @property
    def kinetic_prefactor(self) -> float:
        """hbar^2 / 2m."""
        return self.hbar**2 / (2 * self.mass)


NATURAL = PhysicalConstants()


@dataclass(frozen=True, eq=False)
class Potential:
    """Sampled potential plus symbolic point interactions.

    Hard walls are the nodes where ``field.mask`` is False: the potential is
    infinite there and the wavefunction is pinned to zero.  ``delta_terms``
    holds ``(location, strength)`` pairs meaning ``strength * delta(x - location)``;
    an attractive well has negative strength.
    """

    field: RealField
    delta_terms: tuple[tuple[float, float], ...] = field(default=())

    def __post_init__(self):
        terms = tuple((float(a), float(s)) for a, s in self.delta_terms)
        object.__setattr__(self, "delta_terms", terms)

    @classmethod
    def from_values(cls, grid: Grid1D, values, walls=None, delta_terms: Iterable = ()):
        values = np.asarray(values, dtype=float)
        mask = None
        if walls is not None:
            walls = np.asarray(walls, dtype=bool)
            mask = ~walls
            values = np.where(walls, 0.0, values)
        return cls(RealField(grid, values, False, mask), tuple(delta_terms))

    @property
    def grid(self) -> Grid1D:
        return self.field.grid

    @property
    def values(self) -> np.ndarray:
        return self.field.values

    @property
    def walls(self) -> np.ndarray:
        return ~self.field.valid

    def delta_nodes(self) -> list[int]:
        return [self.grid.nearest_node(a) for a, _ in self.delta_terms]

    def folded_values(self) -> np.ndarray:
        """Samples with each delta lumped as ``strength/h`` on its nearest node."""
        v = np.array(self.values)
        for (a, s), i in zip(self.delta_terms, self.delta_nodes()):
            v[i] += s / self.grid.h
        return v

    def combine(self, scale: float, extra=None, extra_mask=None, delta_scale=None) -> "Potential":
        """``scale*V + extra`` with walls merged; deltas scaled by ``delta_scale`` (default ``scale``)."""
        v = scale * self.values
        mask = self.field.valid.copy()
        if extra is not None:
            v = v + np.asarray(extra, dtype=float)
        if extra_mask is not None:
            mask &= extra_mask
        v = np.where(mask, v, 0.0)
        ds = scale if delta_scale is None else delta_scale
        terms = tuple((a, ds * s) for a, s in self.delta_terms)
        return Potential(RealField(self.grid, v, False, None if mask.all() else mask), terms)


def dilate_invalid(valid: np.ndarray, margin: int) -> np.ndarray:
    """Shrink a validity mask by ``margin`` nodes around every invalid node."""
    if margin <= 0:
        return valid.copy()
    bad = (~valid).astype(float)
    grown = np.convolve(bad, np.ones(2 * margin + 1), mode="same") > 0
    return valid & ~grown


def kinetic_energy(rho: Density, c: PhysicalConstants = NATURAL, V: Potential | None = None) -> float:
    """``(hbar^2/2m) int (phi')^2`` with ``phi = sqrt(rho)`` and central differences.

    Across a cusp the central slope averages the two sides (zero for a
    symmetric cusp), which drops an O(h) piece of the integral.  Pass ``V`` to
    replace ``phi'^2`` on its delta nodes by the mean of the squared one-sided
    slopes.
    """
    phi = rho.sqrt()
    d2 = derivative(phi).values ** 2
    if V is not None and V.delta_terms:
        p, h, n = phi.values, rho.grid.h, rho.grid.n_points
        for i in V.delta_nodes():
            if 2 <= i <= n - 3:
                left = (3 * p[i] - 4 * p[i - 1] + p[i - 2]) / (2 * h)
                right = (-3 * p[i] + 4 * p[i + 1] - p[i + 2]) / (2 * h)
                d2[i] = 0.5 * (left**2 + right**2)
    return c.kinetic_prefactor * integrate(phi.with_values(d2))


def kinetic_energy_laplacian_form(rho: Density, c: PhysicalConstants = NATURAL) -> float:
    phi = rho.sqrt()
    lap = second_derivative(phi).values
    return -c.kinetic_prefactor * integrate(phi.with_values(phi.values * lap))


def potential_energy(rho: Density, V: Potential) -> float:
    """``int rho V dx`` plus ``strength * rho(location)`` for each delta term."""
    walls = V.walls
    if np.any(rho.values[walls] > rho.floor):
        return float("inf")
    e = integrate(rho.field.with_values(np.where(walls, 0.0, rho.values * V.values)))
    for a, s in V.delta_terms:
        e += s * rho.grid.interpolate(rho.values, a)
    return e


def total_energy(rho: Density, V: Potential, c: PhysicalConstants = NATURAL) -> float:
    return kinetic_energy(rho, c, V) + potential_energy(rho, V)


def squared_log_slope(rho: Density, V: Potential | None = None) -> tuple[np.ndarray, np.ndarray]:
    """``(rho'/rho)**2`` and its validity mask.

    At a delta node the central stencil straddles the cusp and returns the
    average slope (zero for a symmetric cusp); there the value is replaced by
    the mean of the squared one-sided slopes.
    """
    y = log_derivative(rho)
    with np.errstate(over="ignore"):
        y2 = y.values**2
    valid = y.valid & np.isfinite(y2)
    if V is not None and V.delta_terms:
        p, h, n = np.sqrt(rho.values), rho.grid.h, rho.grid.n_points
        for i in V.delta_nodes():
            if 2 <= i <= n - 3 and rho.values[i] >= rho.floor:
                left = (3 * p[i] - 4 * p[i - 1] + p[i - 2]) / (h * p[i])
                right = (-3 * p[i] + 4 * p[i + 1] - p[i + 2]) / (h * p[i])
                y2[i] = 0.5 * (left**2 + right**2)
    return y2, valid


def effective_potential(rho: Density, V: Potential, c: PhysicalConstants = NATURAL) -> Potential:
    """``2V + (hbar^2/4m) (rho'/rho)^2``; delta terms are doubled."""
    y2, valid = squared_log_slope(rho, V)
    extra = (c.hbar**2 / (4 * c.mass)) * np.where(valid, y2, 0.0)
    return V.combine(2.0, extra, valid)


def euler_residual(
    rho: Density,
    V: Potential,
    lam: float,
    c: PhysicalConstants = NATURAL,
    *,
    form: str = "log",
    margin: int = 0,
) -> RealField:
    """Pointwise ``-(hbar^2/8m){2 (ln rho)'' + ((ln rho)')^2} + V - lam``.

    ``form="log"`` applies the stencils to ``ln rho`` directly (exact for
    log-quadratic densities).  ``form="product"`` expands
    ``(ln rho)'' = rho''/rho - (rho'/rho)^2`` first, which makes the residual
    the pointwise form of ``[-(hbar^2/2m) d2 + V_eff] rho = 2 lam rho`` with
    the same stencils the SCF solver uses.

    Delta terms enter through their lumped nodal value.  The end nodes, walls,
    nodes below the density floor and their stencil neighbours are masked,
    then ``margin`` further nodes around every masked node.
    """
    r = rho.values
    ok = (r >= rho.floor) & ~V.walls
    ok[0] = ok[-1] = False
    ok = dilate_invalid(ok, 1)
    vfold = np.where(V.walls, 0.0, V.folded_values())
    pref = c.hbar**2 / (8 * c.mass)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if form == "log":
            lnr = RealField(rho.grid, np.log(np.maximum(r, rho.floor)))
            d1 = derivative(lnr).values
            d2 = second_derivative(lnr).values
            d1sq = d1**2
            if V.delta_terms:
                # slope squared from one-sided stencils across a cusp
                y2, _ = squared_log_slope(rho, V)
                idx = V.delta_nodes()
                d1sq[idx] = y2[idx]
            res = -pref * (2 * d2 + d1sq) + vfold - lam
        elif form == "product":
            veff = effective_potential(rho, V, c)
            lap = second_derivative(rho.field).values / np.maximum(r, rho.floor)
            res = 0.5 * (-c.kinetic_prefactor * lap + veff.folded_values()) - lam
        else:
            raise ValueError(f"unknown form {form!r}")
    ok &= np.isfinite(res)
    ok = dilate_invalid(ok, margin)
    return RealField(rho.grid, np.where(ok, res, 0.0), False, ok)
