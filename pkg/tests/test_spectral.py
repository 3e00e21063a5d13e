"""Sine basis: transforms, operator factors, norms, and their inequalities.

Frozen scalar values below were derived independently (direct evaluation of
exp/sin/pi expressions, quadrature for the integral identity) before being
pinned here.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tamedspde import spectral
from tamedspde.errors import ConfigurationError

PI2 = math.pi ** 2


# --- eigenvalues -----------------------------------------------------------

def test_eigenvalue_values():
    assert spectral.eigenvalue(1) == pytest.approx(9.869604401089358, abs=0, rel=1e-15)
    assert spectral.eigenvalue(2) == pytest.approx(39.47841760435743, rel=1e-15)
    assert spectral.eigenvalue(3) == pytest.approx(9 * PI2, rel=1e-15)


def test_eigenvalue_rejects_zero():
    with pytest.raises(ConfigurationError):
        spectral.eigenvalue(0)


def test_eigenvalues_increasing():
    lam = spectral.eigenvalues(32)
    assert lam[0] == spectral.eigenvalue(1)
    assert np.all(np.diff(lam) > 0)


# --- synthesize / analyze --------------------------------------------------

def test_synthesize_first_mode_three_nodes():
    # sqrt(2) sin(pi k/4), k=1..3 -> (1, sqrt 2, 1)
    grid = spectral.synthesize(spectral.unit_mode(1, 1), 3)
    assert grid.values == pytest.approx([1.0, math.sqrt(2.0), 1.0], rel=1e-14)


def test_synthesize_zero_field():
    grid = spectral.synthesize(spectral.zero_field(4), 16)
    assert np.all(grid.values == 0.0)


def test_synthesize_top_mode_is_pure_sine():
    j = 6
    grid = spectral.synthesize(spectral.unit_mode(j, j), 25)
    x = spectral.collocation_nodes(25)
    assert grid.values == pytest.approx(np.sqrt(2) * np.sin(j * np.pi * x), rel=1e-13)


def test_synthesize_rejects_too_few_nodes():
    with pytest.raises(ConfigurationError):
        spectral.synthesize(spectral.zero_field(8), 7)


def test_analyze_pure_sine_grid():
    x = spectral.collocation_nodes(15)
    field = spectral.analyze(spectral.GridField(np.sqrt(2) * np.sin(np.pi * x)), 4)
    assert abs(field.coeffs[0] - 1.0) <= 1e-12
    assert np.all(np.abs(field.coeffs[1:]) <= 1e-12)


def test_analyze_rejects_too_many_modes():
    with pytest.raises(ConfigurationError):
        spectral.analyze(spectral.GridField(np.ones(7)), 8)


@settings(max_examples=40)
@given(j=st.integers(1, 32), extra=st.integers(0, 40),
       seed=st.integers(0, 1000))
def test_roundtrip_exact(j, extra, seed):
    a = np.random.default_rng(seed).standard_normal(j)
    back = spectral.analyze(spectral.synthesize(spectral.SpectralField(a), j + extra), j)
    assert np.max(np.abs(back.coeffs - a)) <= 1e-12


def test_roundtrip_batched():
    a = np.random.default_rng(0).standard_normal((12, 5))
    back = spectral.analyze(spectral.synthesize(spectral.SpectralField(a), 48), 12)
    assert np.max(np.abs(back.coeffs - a)) <= 1e-12


# --- semigroup, phi1, fractional powers ------------------------------------

def test_semigroup_identity_at_zero():
    f = spectral.SpectralField(np.arange(1.0, 9.0))
    assert np.array_equal(spectral.apply_semigroup(f, 0.0).coeffs, f.coeffs)


def test_semigroup_mode1_factor():
    out = spectral.apply_semigroup(spectral.unit_mode(1, 1), 0.01)
    assert out.coeffs[0] == pytest.approx(0.906018055788923, rel=1e-15)


def test_semigroup_rejects_negative_time():
    with pytest.raises(ConfigurationError):
        spectral.apply_semigroup(spectral.zero_field(2), -0.1)


def test_semigroup_l2_contraction():
    rng = np.random.default_rng(3)
    f = spectral.SpectralField(rng.standard_normal(16))
    t = 0.03
    out = spectral.apply_semigroup(f, t)
    assert spectral.l2_norm(out) <= math.exp(-PI2 * t) * spectral.l2_norm(f)
    # equality when only the first mode is populated
    one = spectral.unit_mode(16, 1, 2.5)
    assert spectral.l2_norm(spectral.apply_semigroup(one, t)) == pytest.approx(
        math.exp(-PI2 * t) * 2.5, rel=1e-14)


@given(s=st.floats(0.0, 2.0), t=st.floats(0.0, 2.0))
def test_semigroup_composition(s, t):
    f = spectral.SpectralField(np.ones(64))
    two = spectral.apply_semigroup(spectral.apply_semigroup(f, s), t)
    one = spectral.apply_semigroup(f, s + t)
    assert np.allclose(two.coeffs, one.coeffs, rtol=1e-13, atol=1e-300)


def test_phi1_mode1_factor():
    out = spectral.apply_phi1(spectral.unit_mode(1, 1), 0.01)
    assert out.coeffs[0] == pytest.approx(0.00952236182847448, rel=1e-14)


def test_phi1_small_dt_limit():
    dt = 1e-6 / PI2  # lambda_1 dt = 1e-6
    factor = spectral.phi1_factors(1, dt)[0]
    assert abs(factor - dt) <= 1e-9


def test_phi1_bounded_by_dt_and_inverse_eigenvalue():
    lam = spectral.eigenvalues(128)
    for dt in (1e-4, 0.01, 0.1, 0.5):
        factors = spectral.phi1_factors(128, dt)
        assert np.all(factors <= np.minimum(dt, 1.0 / lam) * (1 + 1e-15))
        assert np.all(factors > 0)


def test_phi1_matches_semigroup_integral():
    # (1 - e^{-lam dt})/lam = int_0^dt e^{-lam s} ds, midpoint quadrature;
    # the midpoint rule's relative error is below (lam dt / k)^2 / 8
    for n in (1, 2, 5, 8):
        lam = spectral.eigenvalue(n)
        for dt in (0.01, 0.1, 0.5):
            k = 4096
            s = (np.arange(k) + 0.5) * (dt / k)
            quad = np.exp(-lam * s).sum() * (dt / k)
            factor = spectral.phi1_factors(n, dt)[n - 1]
            tol = (lam * dt / k) ** 2 / 8.0 + 1e-12
            assert factor == pytest.approx(quad, rel=tol)


def test_fractional_identity_and_inverse():
    f = spectral.SpectralField(np.random.default_rng(1).standard_normal(10))
    assert np.array_equal(spectral.apply_fractional(f, 0.0).coeffs, f.coeffs)
    back = spectral.apply_fractional(spectral.apply_fractional(f, 0.7), -0.7)
    assert np.allclose(back.coeffs, f.coeffs, rtol=1e-12)


def test_fractional_mode2_sqrt():
    out = spectral.apply_fractional(spectral.unit_mode(2, 2), 0.5)
    assert out.coeffs[1] == pytest.approx(6.283185307179586, rel=1e-15)


def test_fractional_rejects_large_exponent():
    with pytest.raises(ConfigurationError):
        spectral.apply_fractional(spectral.zero_field(2), 1.5)


# --- norms ------------------------------------------------------------------

def test_l2_norm_pythagoras():
    assert spectral.l2_norm(spectral.SpectralField(np.array([3.0, 4.0]))) == 5.0


def test_lp_norm_of_first_mode_grid():
    grid = spectral.synthesize(spectral.unit_mode(1, 1), 63)
    assert abs(spectral.lp_norm(grid, 2) - 1.0) <= 1e-10


def test_sup_norm_of_first_mode_grid():
    # M odd puts a node exactly at x = 1/2 where sqrt(2) sin(pi x) peaks
    grid = spectral.synthesize(spectral.unit_mode(1, 1), 63)
    assert spectral.sup_norm(grid) == pytest.approx(math.sqrt(2.0), rel=1e-12)


def test_lp_norm_rejects_p_below_one():
    with pytest.raises(ConfigurationError):
        spectral.lp_norm(spectral.GridField(np.ones(4)), 0.5)


# --- operator inequalities on grids of modes and times ----------------------

def test_smoothing_bound():
    # lam^a e^{-lam t} min(t,1)^a <= 1.1 sup_u u^a e^{-u} for a in {1/4,1/2,1}
    lam = spectral.eigenvalues(128)[:, None]
    t = np.logspace(-6, 1, 200)[None, :]
    for a in (0.25, 0.5, 1.0):
        lhs = lam ** a * np.exp(-lam * t) * np.minimum(t, 1.0) ** a
        sup = a ** a * math.exp(-a)
        assert np.max(lhs) <= 1.1 * sup


def test_exponential_holder_bound():
    # |e^{-lam t} - e^{-lam s}| <= lam^a |t - s|^a with constant 1
    lam = spectral.eigenvalues(64)
    times = np.linspace(0.0, 3.0, 41)
    for a in (0.25, 0.5, 1.0):
        for i, t in enumerate(times):
            s = times[i + 1:]
            lhs = np.abs(np.exp(-lam[:, None] * t) - np.exp(-lam[:, None] * s[None, :]))
            rhs = lam[:, None] ** a * np.abs(t - s[None, :]) ** a
            assert np.all(lhs <= rhs * (1 + 1e-12))


# --- field constructors and validation --------------------------------------

def test_unit_mode_bounds_checked():
    with pytest.raises(ConfigurationError):
        spectral.unit_mode(4, 5)
    with pytest.raises(ConfigurationError):
        spectral.unit_mode(4, 0)


def test_multi_mode_requires_summable_rate():
    with pytest.raises(ConfigurationError):
        spectral.multi_mode(8, rate=1.0)
    f = spectral.multi_mode(8, amplitude=2.0, rate=2.0)
    assert f.coeffs[0] == 2.0
    assert f.coeffs[1] == pytest.approx(-0.5)


def test_bump_profile_roughly_centered():
    f = spectral.bump_profile(32, 128, center=0.5, width=0.1, amplitude=1.0)
    grid = spectral.synthesize(f, 129)  # odd -> node at 1/2
    values = grid.values
    mid = values[64]
    assert mid == pytest.approx(1.0, abs=0.02)
    assert abs(values[0]) < 0.01 and abs(values[-1]) < 0.01


def test_fields_reject_non_finite():
    with pytest.raises(ConfigurationError):
        spectral.SpectralField(np.array([1.0, np.nan]))
    with pytest.raises(ConfigurationError):
        spectral.GridField(np.array([np.inf]))
    with pytest.raises(ConfigurationError):
        spectral.SpectralField(np.zeros((2, 2, 2)))
