import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import jv

from adswk.geometry import SpectralParam, exact_ads_collar, flat_slab, indicial_roots
from adswk.modes import (
    BFStatus,
    Branch,
    IllPosedAboveBound,
    ModeSpec,
    ResonantMode,
    bf_diagnostic,
    build_radial_ode,
    eigenmodes_truncated,
    fit_asymptotics,
    frobenius_expand,
    integrate_radial,
    nonpositive_mode_count,
    scattering_coefficient,
)

FLAT4 = flat_slab(4)


def _ode(sigma2, n=4, lam=2.0, model=None):
    return build_radial_ode(model or flat_slab(n), ModeSpec.from_sigma2(n, lam, sigma2))


def _residual(ode, f, df, d2f, x):
    """L v for v given through its ordinary derivatives."""
    v, xv, xxv = f(x), x * df(x), x * df(x) + x * x * d2f(x)
    return ode.apply(x, v, xv, xxv)


# --- the radial operator ----------------------------------------------------

def test_substitution_oracle_sin_and_cos():
    ode = _ode(1.0)
    x = np.linspace(1e-3, 1.0, 200)
    res_s = _residual(ode, lambda x: x * np.sin(x), lambda x: np.sin(x) + x * np.cos(x),
                      lambda x: 2 * np.cos(x) - x * np.sin(x), x)
    res_c = _residual(ode, lambda x: x * np.cos(x), lambda x: np.cos(x) - x * np.sin(x),
                      lambda x: -2 * np.sin(x) - x * np.cos(x), x)
    assert np.max(np.abs(res_s)) < 1e-10
    assert np.max(np.abs(res_c)) < 1e-10


@pytest.mark.parametrize("n,lam", [(4, 2.0), (3, 0.5), (5, 1.0)])
def test_euler_case(n, lam):
    ode = _ode(0.0, n, lam)
    ind = indicial_roots(SpectralParam(lam, n))
    x = np.linspace(0.05, 1.0, 50)
    for s in (ind.s_minus.real, ind.s_plus.real):
        res = _residual(ode, lambda x: x ** s, lambda x: s * x ** (s - 1),
                        lambda x: s * (s - 1) * x ** (s - 2), x)
        assert np.max(np.abs(res)) < 1e-10


# --- Frobenius series -------------------------------------------------------

def test_frobenius_plus_is_x_sin_x():
    fro = frobenius_expand(_ode(1.0), Branch.PLUS, K=12)
    assert fro.exponent == 2
    expected = [1.0, 0.0, -1 / 6, 0.0, 1 / 120, 0.0, -1 / 5040]
    np.testing.assert_allclose(np.real(fro.coeffs[:7]), expected, atol=1e-13)


def test_frobenius_minus_is_x_cos_x_without_log():
    fro = frobenius_expand(_ode(1.0), Branch.MINUS, K=12)
    assert fro.exponent == 1
    np.testing.assert_allclose(np.real(fro.coeffs[:5]), [1.0, 0.0, -0.5, 0.0, 1 / 24], atol=1e-13)
    assert np.all(np.abs(fro.log_coeffs) < 1e-13)


@pytest.mark.parametrize("n,lam", [(4, 2.0), (3, 0.3), (5, -1.0)])
def test_frobenius_euler_truncates(n, lam):
    for br in Branch:
        fro = frobenius_expand(_ode(0.0, n, lam), br, K=10)
        assert abs(fro.coeffs[0]) == 1.0
        assert np.all(np.abs(fro.coeffs[1:]) < 1e-14)


@pytest.mark.parametrize("sigma2,lam", [(1.0, 2.0), (7.3, 1.0), (-4.0, 0.0), (3.0, 2.25)])
def test_frobenius_recurrence_exact(sigma2, lam):
    ode = _ode(sigma2, 4, lam)
    for br in Branch:
        fro = frobenius_expand(ode, br, K=30)
        root = fro.exponent
        assert abs(root ** 2 - 3 * root + lam) < 1e-12
        assert np.max(fro.residuals()) < 1e-10


# --- integration ------------------------------------------------------------

def test_integrate_plus_matches_x_sin_x():
    sol = integrate_radial(_ode(1.0), Branch.PLUS)
    x = np.linspace(sol.x0, 1.0, 100)
    v, _ = sol.at(x)
    assert np.isrealobj(sol.v)
    np.testing.assert_allclose(np.real(v), x * np.sin(x), rtol=1e-8)


def test_seed_independence():
    ode = _ode(1.0)
    a = integrate_radial(ode, Branch.PLUS, x0=0.02)
    b = integrate_radial(ode, Branch.PLUS, x0=0.01)
    assert abs(a.v[-1] - b.v[-1]) < 1e-9


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 20.0))
def test_bessel_oracle(sigma2):
    sg = math.sqrt(sigma2)
    sol = integrate_radial(_ode(sigma2), Branch.PLUS, fit=False)
    x = np.linspace(0.1, 1.0, 50)
    v = np.real(sol.at(x)[0])
    ref = x ** 1.5 * jv(0.5, sg * x)
    c = ref[-1] / v[-1] if abs(v[-1]) > 1e-3 else ref[0] / v[0]
    assert np.max(np.abs(c * v - ref)) <= 1e-7 * np.max(np.abs(ref))


@pytest.mark.parametrize("n,lam,sigma2", [(3, 0.75, 5.0), (5, 2.0, 9.0), (4, 0.0, 2.0)])
def test_bessel_oracle_other_orders(n, lam, sigma2):
    nu = math.sqrt((n - 1) ** 2 / 4 - lam)
    sol = integrate_radial(_ode(sigma2, n, lam), Branch.PLUS, fit=False)
    x = np.linspace(0.1, 1.0, 50)
    v = np.real(sol.at(x)[0])
    ref = x ** ((n - 1) / 2) * jv(nu, math.sqrt(sigma2) * x)
    c = ref[-1] / v[-1]
    assert np.max(np.abs(c * v - ref)) <= 1e-7 * np.max(np.abs(ref))


# --- asymptotic fits --------------------------------------------------------

def test_fit_closed_forms():
    ode = _ode(1.0)
    ind = ode.indicial
    x = np.linspace(0.01, 0.04, 50)
    vm, vp, lc, cond = fit_asymptotics(x, x * np.sin(x), ind, (0.01, 0.04), ode=ode)
    assert abs(vm) < 1e-8 and abs(vp - 1) < 1e-8 and abs(lc) < 1e-8
    vm, vp, lc, cond = fit_asymptotics(x, x * np.cos(x), ind, (0.01, 0.04), ode=ode)
    assert abs(vm - 1) < 1e-8 and abs(vp) < 1e-8
    assert cond > 1


@pytest.mark.parametrize("lam,sigma2", [(2.0, 1.0), (1.0, 5.0), (0.5, -3.0)])
def test_fit_recovers_seeded_branch(lam, sigma2):
    ode = _ode(sigma2, 4, lam)
    p = integrate_radial(ode, Branch.PLUS)
    m = integrate_radial(ode, Branch.MINUS)
    assert abs(p.v_minus) < 1e-6 and abs(p.v_plus - 1) < 1e-6
    assert abs(m.v_minus - 1) < 1e-6 and abs(m.v_plus) < 1e-6


@pytest.mark.parametrize("lam", [2.5, 3.0, 2.25 + 1e-3, complex(1.0, 0.5)])
def test_fit_refused_above_bound(lam):
    ind = indicial_roots(SpectralParam(lam, 4))
    x = np.linspace(0.01, 0.04, 20)
    with pytest.raises(IllPosedAboveBound):
        fit_asymptotics(x, x ** 1.5, ind, (0.01, 0.04))


def test_integrate_does_not_fabricate_fit_above_bound():
    sol = integrate_radial(_ode(1.0, 4, 2.5), Branch.PLUS)
    assert math.isnan(sol.v_plus.real) and math.isnan(sol.v_minus.real)


# --- scattering and eigenmodes ----------------------------------------------

def test_dtn_closed_form():
    d = scattering_coefficient(FLAT4, ModeSpec.from_sigma2(4, 2.0, 1.0))
    assert d == pytest.approx(-1 / math.tan(1.0), abs=1e-8)
    assert isinstance(d, float)


def test_dtn_euler_case():
    assert scattering_coefficient(FLAT4, ModeSpec.from_sigma2(4, 2.0, 0.0)) == pytest.approx(-1.0, abs=1e-8)


def test_dtn_pi_is_resonant():
    with pytest.raises(ResonantMode):
        scattering_coefficient(FLAT4, ModeSpec.from_sigma2(4, 2.0, math.pi ** 2))


def test_dtn_with_tangential_momentum():
    # only σ² = ω² - |k|² matters on the flat slab
    a = scattering_coefficient(FLAT4, ModeSpec(4, 2.0, 2.0, (1.0, 1.0)))
    assert a == pytest.approx(-math.sqrt(2) / math.tan(math.sqrt(2)), abs=1e-8)


def test_dtn_refused_above_bound():
    with pytest.raises(IllPosedAboveBound):
        scattering_coefficient(FLAT4, ModeSpec.from_sigma2(4, 3.0, 1.0))


def test_eigenmodes_are_multiples_of_pi():
    sig = eigenmodes_truncated(FLAT4, 2.0, m=4)
    np.testing.assert_allclose(sig, np.pi * np.arange(1, 5), atol=1e-8)


def test_eigenmodes_near_bound_follow_bessel_zeros():
    eps = 1e-2
    sig = eigenmodes_truncated(FLAT4, 9 / 4 - eps, m=3)
    ref = [float(mpmath.besseljzero(math.sqrt(eps), k)) for k in (1, 2, 3)]
    np.testing.assert_allclose(sig, ref, rtol=1e-7)
    assert all(s > 0 for s in sig)


@pytest.mark.parametrize("lam", [-2.0, 0.0, 1.0, 2.0, 2.2])
def test_no_nonpositive_modes_below_bound(lam):
    assert nonpositive_mode_count(FLAT4, lam, steps=40) == 0
    assert eigenmodes_truncated(FLAT4, lam, m=1)[0] > 0


def test_ads_collar_mode_ode_builds():
    ode = build_radial_ode(exact_ads_collar(3), ModeSpec.from_sigma2(3, 0.5, 2.0))
    fro = frobenius_expand(ode, Branch.PLUS, K=20)
    assert np.max(fro.residuals()) < 1e-10


def test_modespec_validation():
    with pytest.raises(ValueError):
        ModeSpec(4, 2.0, 1.0, (1.0,))
    s = ModeSpec.from_sigma2(4, 2.0, -4.0)
    assert s.sigma2 == pytest.approx(-4.0) and s.omega == 0.0


# --- BF diagnostic ----------------------------------------------------------

def test_bf_diagnostic():
    assert bf_diagnostic(SpectralParam(0.0, 4)).status is BFStatus.BELOW
    assert bf_diagnostic(SpectralParam(9 / 4, 4)).status is BFStatus.BORDERLINE
    assert bf_diagnostic(SpectralParam(3.0, 4)).status is BFStatus.ABOVE
    d = bf_diagnostic(SpectralParam(complex(4, 1), 5))
    assert d.im_nonzero and d.bound == 4.0
