import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adswk.functional import (
    DivergenceFlag,
    SelectionFailure,
    SupportConstraint,
    build_tau,
    graded_grid,
    hardy_infimum,
    hardy_quotient,
    poincare_constant,
    sharp_hardy_constant,
    smooth_cutoff,
    uniform_grid,
    weighted_poincare_check,
)
from adswk.geometry import eval_dual_metric, flat_slab, perturbed_from_params


@pytest.fixture(scope="module")
def g4():
    return graded_grid(4000, 4)


# --- Hardy quotient ---------------------------------------------------------

def test_quotient_of_x_squared(g4):
    assert hardy_quotient(lambda x: x ** 2, g4) == pytest.approx(4.0, rel=1e-12)


def test_quotient_of_x_1_6(g4):
    q = hardy_quotient(lambda x: x ** 1.6, g4)
    assert q == pytest.approx(2.56, rel=1e-2)
    assert q >= sharp_hardy_constant(4)


@settings(max_examples=30, deadline=None)
@given(st.floats(1.7, 4.0))
def test_scaling_identity(s):
    g = graded_grid(4000, 4)
    assert hardy_quotient(lambda x: x ** s, g) == pytest.approx(s * s, rel=5e-3)


def test_below_threshold_power_flagged(g4):
    with pytest.raises(DivergenceFlag):
        hardy_quotient(lambda x: x ** 0.5, g4)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=3, max_size=3), st.floats(1.8, 3.0))
def test_quotient_above_infimum(c, s):
    g = graded_grid(3000, 4)
    inf = hardy_infimum(g)
    u = lambda x: x ** s * (1 + c[0] * x + c[1] * np.sin(3 * x) + c[2] * x ** 2 + 3.0)
    assert hardy_quotient(u, g) >= inf - 1e-3


def test_grid_mismatch_rejected(g4):
    with pytest.raises(ValueError):
        hardy_quotient(np.ones(10), g4)


# --- Hardy infimum ----------------------------------------------------------

@pytest.mark.parametrize("n", [3, 4, 5])
def test_sharpness(n):
    c = sharp_hardy_constant(n)
    coarse = hardy_infimum(graded_grid(1000, n))
    fine = hardy_infimum(graded_grid(10_000, n))
    assert c <= fine <= coarse  # converges from above
    assert (fine - c) / c < 0.02


def test_hole_raises_infimum():
    g = graded_grid(2000, 4)
    base = hardy_infimum(g)
    assert hardy_infimum(g, SupportConstraint(1.0, ((0.4, 0.5),))) > base
    assert hardy_infimum(g, SupportConstraint(0.5)) > base


def test_infimum_needs_boundary_node():
    with pytest.raises(ValueError):
        hardy_infimum(uniform_grid(0.1, 1.0, 100, 4))


# --- Poincaré constants -----------------------------------------------------

def test_poincare_collar(g4):
    r = poincare_constant([(0, 1)], [(0, 1)], g4)
    assert not r.flagged
    assert r.constant == pytest.approx(1 / math.sqrt(hardy_infimum(g4)), rel=1e-6)
    assert r.constant == pytest.approx(2 / 3, rel=0.03)


def test_poincare_monotone_in_K(g4):
    c = [poincare_constant([(0, b)], [(0, 1)], g4).constant for b in (1.0, 0.5, 0.2)]
    assert c[0] > c[1] > c[2]


def test_poincare_disconnected_flagged(g4):
    r = poincare_constant([(0.6, 0.8)], [(0, 0.3), (0.5, 1)], g4)
    assert r.flagged and math.isinf(r.constant)


# --- weighted Poincaré along W ------------------------------------------------

def _bump(a, b, c):
    def u(t):
        s = np.clip((t - a) / (b - a), 0, 1)
        return np.sin(np.pi * s) ** 4 * (c[0] + c[1] * np.cos(5 * s) + c[2] * np.sin(11 * s))
    return u


def test_weighted_poincare_suite():
    g = uniform_grid(0, 10, 10_000)
    rng = np.random.default_rng(1)
    for _ in range(50):
        gam = rng.uniform(0.05, 2)
        a = rng.uniform(0.5, 3)
        b = rng.uniform(a + 1, 9.5)
        r = weighted_poincare_check(1.0, lambda t: np.exp(-t / gam), _bump(a, b, rng.normal(size=3)),
                                    g, gam)
        assert r.hypotheses_ok, r.reason
        assert r.passed and r.lhs <= r.bound * r.rhs


def test_weighted_poincare_constant_flagged():
    g = uniform_grid(0, 10, 2000)
    r = weighted_poincare_check(1.0, lambda t: np.exp(-t), lambda t: np.ones_like(t), g, 1.0)
    assert not r.hypotheses_ok and "compactly supported" in r.reason


def test_weighted_poincare_gamma_scan():
    g = uniform_grid(0, 10, 10_000)
    u = lambda t: np.sin(np.pi * t / 10) ** 2 * np.sin(3 * t)
    ratios = {}
    for gam in (1.0, 0.5, 0.2, 0.1, 0.05):
        r = weighted_poincare_check(1.0, lambda t: np.exp(-t / gam), u, g, gam)
        assert r.passed
        ratios[gam] = r.ratio
        assert r.ratio <= 4 * gam
    assert ratios[0.05] < ratios[0.1] < ratios[0.2]


def test_weighted_poincare_bad_chi():
    g = uniform_grid(0, 10, 2000)
    # χ = e^{-t} needs γ ≥ 1 for χ ≤ -γ Wχ
    r = weighted_poincare_check(1.0, lambda t: np.exp(-t), _bump(1, 5, [1, 0, 0]), g, 0.5)
    assert not r.hypotheses_ok


# --- time function τ ----------------------------------------------------------

def test_smooth_cutoff():
    s = np.array([-1.0, 0.0, 0.5, 1.0, 2.0])
    np.testing.assert_allclose(smooth_cutoff(s), [1, 1, 0.5, 0, 0])
    assert np.all(np.diff(smooth_cutoff(np.linspace(0, 1, 101))) <= 0)


def test_tau_flat_is_t():
    r = build_tau(flat_slab(3))
    np.testing.assert_array_equal(r.tau, r.t)
    assert r.max_boundary_mixed == 0.0 and r.min_G_dtau > 0


def test_tau_with_mixed_term():
    model = perturbed_from_params(3, {"ct1": 1.0})
    r = build_tau(model)
    assert r.max_boundary_mixed <= 1e-10
    assert r.min_G_dtau > 0
    assert 0 < r.max_dev < 0.1
    # the coordinate t alone is not orthogonal to dx in the interior
    G = eval_dual_metric(model, 0.3, [0.0, 0.0])
    assert G[0, 1] != 0.0
    # every sampled dτ is timelike
    for i in range(r.x.shape[0]):
        for j in range(0, r.x.shape[1], 10):
            d = r.dtau[i, j]
            M = eval_dual_metric(model, r.x[i, j], [r.t[i, j], 0.0])
            assert d @ M @ d > 0


def test_tau_selection_failure():
    model = perturbed_from_params(3, {"ct1": 1.0})
    with pytest.raises(SelectionFailure):
        build_tau(model, delta0=1e-3, eps_list=(1.0,), delta_list=(1.0,))
