import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onedft import (
    Box,
    DegeneratePower,
    Delta,
    Density,
    NotNormalizable,
    Oscillator,
    RealField,
    Wavefunction,
    analytic_density,
    density_from_wavefunction,
    integrate,
    log_derivative,
    make_grid,
    natural_grid,
    normalize,
    wavefunction_from_density_power,
)


def test_normalize_box_cos2():
    g = make_grid(-0.5, 0.5, 2001)
    rho = normalize(RealField(g, np.cos(np.pi * g.x) ** 2))
    assert np.allclose(rho.values, 2 * np.cos(np.pi * g.x) ** 2, atol=1e-12)


def test_normalize_rejects_negative_and_zero():
    g = make_grid(0, 1, 11)
    with pytest.raises(NotNormalizable):
        normalize(RealField(g, np.linspace(-1, 1, 11)))
    with pytest.raises(NotNormalizable):
        normalize(RealField(g, np.zeros(11)))


def test_normalized_gaussian_unchanged():
    g = make_grid(-8, 8, 2001)
    v = np.exp(-(g.x**2)) / np.sqrt(np.pi)
    v = v / integrate(RealField(g, v))
    assert np.array_equal(normalize(RealField(g, v)).values, v)


positive_arrays = st.lists(st.floats(0.0, 1e6), min_size=3, max_size=60).filter(lambda v: sum(v) > 1e-3)


@settings(max_examples=100, deadline=None)
@given(positive_arrays)
def test_normalize_idempotent_and_unit(vals):
    g = make_grid(0, 1, len(vals))
    once = normalize(RealField(g, np.array(vals)))
    twice = normalize(once.field)
    assert np.array_equal(once.values, twice.values)
    assert abs(integrate(once.field) - 1) < 1e-10


def test_density_constructor_checks_norm():
    g = make_grid(0, 1, 11)
    with pytest.raises(NotNormalizable):
        Density(RealField(g, np.full(11, 2.0)))


def test_density_from_box_wavefunction():
    g = make_grid(-0.5, 0.5, 1001)
    psi = Wavefunction(RealField(g, np.sqrt(2) * np.cos(np.pi * g.x)))
    rho = density_from_wavefunction(psi)
    assert np.allclose(rho.values, 2 * np.cos(np.pi * g.x) ** 2, atol=1e-10)


def test_density_from_oscillator_wavefunction():
    m, w, hbar = 2.0, 1.5, 1.0
    g = make_grid(-8, 8, 4001)
    a = m * w / hbar
    psi = normalize(RealField(g, ((a / np.pi) ** 0.25 * np.exp(-a * g.x**2 / 2)) ** 2))  # as density
    wf = Wavefunction(RealField(g, np.sqrt(psi.values)))
    rho = density_from_wavefunction(wf)
    assert np.allclose(rho.values, np.sqrt(a / np.pi) * np.exp(-a * g.x**2), atol=1e-9)


def test_power_one_oscillator_is_doubled_gaussian():
    g = natural_grid(Oscillator())
    rho = analytic_density(Oscillator(), g)
    psi = wavefunction_from_density_power(rho, 1)
    # exp(-x^2) normalized in L2: (2/pi)^(1/4) exp(-x^2)
    assert np.allclose(psi.values, (2 / np.pi) ** 0.25 * np.exp(-(g.x**2)), atol=1e-9)


def test_power_two_box_normalization_constant():
    g = natural_grid(Box())
    rho = analytic_density(Box(), g)
    psi = wavefunction_from_density_power(rho, 2)
    # int rho^4 = 16 * int cos^8 = 16 * 35/128
    c2 = 1 / np.sqrt(16 * 35 / 128)
    assert np.allclose(psi.values, c2 * rho.values**2, rtol=1e-9, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(-2, 2))
def test_half_power_inverts_density(width, centre):
    g = make_grid(-10, 10, 801)
    rho = normalize(RealField(g, np.exp(-((g.x - centre) ** 2) / (2 * width**2))))
    back = density_from_wavefunction(wavefunction_from_density_power(rho, 0.5))
    assert np.max(np.abs(back.values - rho.values)) < 1e-10


def test_power_degenerate_when_everything_underflows():
    # a very wide uniform density: rho = 1e-250, so rho**4 underflows to zero
    g = make_grid(0, 1e250, 11)
    rho = normalize(RealField(g, np.ones(11)))
    wavefunction_from_density_power(rho, 0.5)
    with pytest.raises(DegeneratePower):
        wavefunction_from_density_power(rho, 2)


def test_log_derivative_oscillator():
    g = natural_grid(Oscillator())
    y = log_derivative(analytic_density(Oscillator(), g))
    core = np.abs(g.x) < 5
    assert np.max(np.abs(y.values - (-2 * g.x))[core]) < 1e-3
    assert y.valid[core].all()


def test_log_derivative_uniform():
    g = make_grid(0, 2, 101)
    y = log_derivative(normalize(RealField(g, np.ones(101))))
    assert np.max(np.abs(y.values)) < 1e-12


def test_log_derivative_delta():
    s = Delta()
    g = natural_grid(s)
    y = log_derivative(analytic_density(s, g))
    i0 = g.nearest_node(0.0)
    assert y.values[i0] == pytest.approx(0.0, abs=1e-9)
    off = (np.abs(g.x) > 0.01) & (np.abs(g.x) < 10)
    assert np.allclose(y.values[off], -2 * np.sign(g.x[off]), rtol=1e-5)


def test_log_derivative_masks_zeros():
    g = natural_grid(Box())
    y = log_derivative(analytic_density(Box(), g))
    assert not y.valid[0] and not y.valid[-1]
    assert y.values[0] == 0.0
    assert y.valid[1:-1].all()
