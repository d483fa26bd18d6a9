"""First-order (Riccati) form of the density equation in ``y = d ln(rho)/dx``:

    -(hbar^2/8m) (2 y' + y^2) + V = lambda
"""
from __future__ import annotations

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .densities import Density, log_derivative, normalize
from .errors import NotNormalizable
from .functionals import NATURAL, PhysicalConstants, Potential, dilate_invalid
from .grid import RealField, derivative

__all__ = ["LogSlopeField", "log_slope", "riccati_residual", "density_from_logslope"]

# y is a RealField whose mask marks valid nodes
LogSlopeField = RealField


def log_slope(rho: Density) -> LogSlopeField:
    return log_derivative(rho)


def riccati_residual(
    y: LogSlopeField,
    V: Potential,
    lam: float,
    c: PhysicalConstants = NATURAL,
    *,
    margin: int = 0,
) -> RealField:
    """Pointwise residual on nodes where ``y`` and its stencil are valid.

    The jump of ``y`` at a point interaction is not resolved by the central
    difference, so delta nodes and their neighbours are masked.
    """
    ok = y.valid & ~V.walls
    ok[0] = ok[-1] = False
    ok = dilate_invalid(ok, 1)
    for i in V.delta_nodes():
        ok[max(i - 1, 0) : i + 2] = False
    dy = derivative(y.with_values(np.where(y.valid, y.values, 0.0))).values
    res = -(c.hbar**2 / (8 * c.mass)) * (2 * dy + y.values**2) + V.values - lam
    ok &= np.isfinite(res)
    ok = dilate_invalid(ok, margin)
    return RealField(y.grid, np.where(ok, res, 0.0), False, ok)


def density_from_logslope(y: LogSlopeField) -> Density:
    """``rho ~ exp(int_{x_min}^x y)`` by cumulative trapezoid, then normalized."""
    vals = np.where(y.valid, y.values, 0.0)
    ln_rho = cumulative_trapezoid(vals, y.grid.x, initial=0.0)
    ln_rho -= ln_rho.max()
    with np.errstate(under="ignore"):
        rho = np.exp(ln_rho)
    if not np.all(np.isfinite(rho)):
        raise NotNormalizable("exp(int y) overflowed")
    return normalize(RealField(y.grid, rho))
