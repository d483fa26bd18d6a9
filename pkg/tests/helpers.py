"""Shared test utilities."""
import numpy as np

from onedft import analytic_density, analytic_potential, natural_grid


def setup_system(s, n_points=None):
    g = natural_grid(s, n_points)
    return g, analytic_potential(s, g), analytic_density(s, g)


def sup(field, extra=None):
    ok = field.valid if extra is None else field.valid & extra
    return float(np.max(np.abs(field.values[ok])))
