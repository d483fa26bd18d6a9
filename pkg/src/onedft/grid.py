"""Uniform 1D grid, trapezoidal quadrature and finite-difference stencils.

Every other module samples its functions on a :class:`Grid1D` and wraps the
samples in a :class:`RealField`.

>>> g = make_grid(-0.5, 0.5, 3)
>>> g.x.tolist(), g.h
([-0.5, 0.0, 0.5], 0.5)
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidGrid

__all__ = [
    "Grid1D",
    "RealField",
    "make_grid",
    "integrate",
    "derivative",
    "second_derivative",
]


@dataclass(frozen=True)
class Grid1D:
    """Uniform mesh ``x_i = x_min + i*h`` with ``h = (x_max - x_min)/(n_points - 1)``."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)):
            raise InvalidGrid("grid bounds must be finite")
        if not self.x_min < self.x_max:
            raise InvalidGrid(f"x_min={self.x_min} must be < x_max={self.x_max}")
        if int(self.n_points) != self.n_points or self.n_points < 3:
            raise InvalidGrid(f"n_points={self.n_points} must be an integer >= 3")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @cached_property
    def x(self) -> np.ndarray:
        # x_min + i*h rather than linspace so node i is exactly that expression
        x = self.x_min + np.arange(self.n_points) * self.h
        x[-1] = self.x_max
        x.setflags(write=False)
        return x

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoidal quadrature weights."""
        w = np.full(self.n_points, self.h)
        w[0] = w[-1] = 0.5 * self.h
        w.setflags(write=False)
        return w

    def nearest_node(self, x: float) -> int:
        i = int(round((x - self.x_min) / self.h))
        return min(max(i, 0), self.n_points - 1)

    def contains(self, x: float) -> bool:
        return self.x_min <= x <= self.x_max

    def interpolate(self, values: np.ndarray, x: float) -> float:
        """Linear interpolation of nodal ``values`` at ``x``."""
        return float(np.interp(x, self.x, values))


@dataclass(frozen=True, eq=False)
class RealField:
    """Real samples on a grid.

    ``hard_wall`` marks a field that vanishes outside the grid (Dirichlet),
    which changes how :func:`second_derivative` treats the end nodes.
    ``mask`` (optional) is True on nodes whose value is meaningful; values on
    masked-out nodes are kept finite but carry no information.
    """

    grid: Grid1D
    values: np.ndarray
    hard_wall: bool = False
    mask: np.ndarray | None = field(default=None)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n_points,):
            raise ValueError(
                f"expected {self.grid.n_points} samples, got shape {v.shape}"
            )
        m = None
        if self.mask is not None:
            m = np.array(self.mask, dtype=bool)
            if m.shape != v.shape:
                raise ValueError("mask shape does not match values")
            m.setflags(write=False)
        check = v if m is None else v[m]
        if not np.all(np.isfinite(check)):
            raise ValueError("field contains non-finite samples")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "mask", m)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def valid(self) -> np.ndarray:
        """Boolean validity mask (all True when no mask is attached)."""
        if self.mask is None:
            return np.ones(self.grid.n_points, dtype=bool)
        return self.mask

    def with_values(self, values, mask=None) -> "RealField":
        return RealField(self.grid, values, self.hard_wall, mask)

    def __len__(self):
        return self.grid.n_points


def make_grid(x_min: float, x_max: float, n_points: int) -> Grid1D:
    return Grid1D(float(x_min), float(x_max), int(n_points))


def _values(f) -> np.ndarray:
    return f.values if isinstance(f, RealField) else np.asarray(f, dtype=float)


def integrate(f: RealField) -> float:
    """Trapezoidal rule over ``[x_min, x_max]``."""
    return float(np.dot(f.grid.weights, f.values))


def derivative(f: RealField) -> RealField:
    """First derivative; central differences inside, one-sided 2nd order at the ends."""
    v, h = f.values, f.grid.h
    d = np.empty_like(v)
    d[1:-1] = (v[2:] - v[:-2]) / (2 * h)
    d[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h)
    d[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * h)
    return RealField(f.grid, d, f.hard_wall)


def second_derivative(f: RealField) -> RealField:
    """Three-point second derivative.

    End nodes use the zero extension when ``f.hard_wall`` is set, and a
    one-sided stencil otherwise (needs at least 4 nodes).
    """
    v, h = f.values, f.grid.h
    d = np.empty_like(v)
    d[1:-1] = (v[2:] - 2 * v[1:-1] + v[:-2]) / h**2
    if f.hard_wall:
        d[0] = (-2 * v[0] + v[1]) / h**2
        d[-1] = (v[-2] - 2 * v[-1]) / h**2
    elif v.size >= 4:
        d[0] = (2 * v[0] - 5 * v[1] + 4 * v[2] - v[3]) / h**2
        d[-1] = (2 * v[-1] - 5 * v[-2] + 4 * v[-3] - v[-4]) / h**2
    else:
        d[0] = d[-1] = d[1]
    return RealField(f.grid, d, f.hard_wall)
