import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adswk.geometry import (
    BCotangentPoint,
    CotangentPoint,
    DomainError,
    NotInCharSet,
    PointClass,
    SpectralParam,
    boundary_timelike_check,
    classify,
    compress,
    decompress,
    decompress_boundary,
    eval_dual_metric,
    exact_ads_collar,
    flat_slab,
    indicial_roots,
    metric_function,
    perturbed_from_params,
    perturbed_slab,
)


def _signature(G):
    ev = np.linalg.eigvalsh(G)
    return int(np.sum(ev > 0)), int(np.sum(ev < 0))


# --- dual metric ------------------------------------------------------------

def test_flat_slab_metric_is_constant():
    m = flat_slab(3)
    for x, y in [(0.0, [0.0, 0.0]), (0.7, [3.0, -1.0])]:
        np.testing.assert_array_equal(eval_dual_metric(m, x, y), np.diag([-1.0, 1.0, -1.0]))


def test_ads_collar_at_boundary():
    G = eval_dual_metric(exact_ads_collar(3), 0.0, [0.2, 0.4])
    np.testing.assert_allclose(G, np.diag([-1.0, 1.0, -1.0]), atol=0)
    G = eval_dual_metric(exact_ads_collar(3), 0.5, [0.0, 0.0])
    np.testing.assert_allclose(np.diag(G), [-1.25, 0.8, -1.0], rtol=1e-15)


def test_perturbed_slab_boundary_value():
    B0 = np.diag([1.0, -1.0])
    B1 = np.array([[0.3, 0.1], [0.1, 0.2]])
    m = perturbed_slab(3, B=lambda x, y: B0 + x * B1)
    np.testing.assert_array_equal(eval_dual_metric(m, 0.0, [0.0, 0.0])[1:, 1:], B0)


def test_negative_x_rejected():
    with pytest.raises(DomainError):
        eval_dual_metric(flat_slab(3), -0.1, [0.0, 0.0])


def test_dimension_below_three_rejected():
    with pytest.raises(ValueError):
        flat_slab(2)


@pytest.mark.parametrize("model", [flat_slab(3), flat_slab(5), exact_ads_collar(3), exact_ads_collar(4)])
def test_symmetry_and_signature(model):
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = rng.uniform(0, 2)
        y = rng.normal(size=model.n - 1)
        G = eval_dual_metric(model, x, y)
        assert np.array_equal(G, G.T)
        assert _signature(G) == (1, model.n - 1)
        # tangential block is Lorentzian with one positive direction
        assert _signature(G[1:, 1:]) == (1, model.n - 2)


# --- metric function / compression ------------------------------------------

def test_metric_function_values():
    m = flat_slab(3)
    assert metric_function(m, CotangentPoint(0.0, [0, 0], 1.0, [1.0, 0.0])) == 0.0
    assert metric_function(m, CotangentPoint(0.0, [0, 0], 0.0, [1.0, 2.0])) == -3.0


def test_metric_function_matches_quadratic_form():
    m = exact_ads_collar(3)
    rng = np.random.default_rng(5)
    v = rng.normal(size=3)
    q = CotangentPoint(0.5, [0.1, 0.2], v[0], v[1:])
    G = eval_dual_metric(m, 0.5, [0.1, 0.2])
    assert metric_function(m, q) == pytest.approx(float(v @ G @ v), abs=1e-14)


def test_compress_examples():
    b = compress(CotangentPoint(0.5, [0.0, 1.0], 2.0, [1.0, 0.0]))
    assert b.xib == 1.0 and b.x == 0.5
    b = compress(CotangentPoint(0.0, [0.0, 1.0], 7.0, [1.0, 0.0]))
    assert b.xib == 0.0
    np.testing.assert_array_equal(b.zetab, [1.0, 0.0])


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 5), st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_interior_roundtrip(x, xi, z0, z1):
    q = CotangentPoint(x, [0.3, -0.2], xi, [z0, z1])
    back = decompress(compress(q), int(math.copysign(1, xi)))
    assert back.x == q.x
    assert back.xi == pytest.approx(q.xi, rel=1e-14, abs=1e-300)
    np.testing.assert_array_equal(back.zeta, q.zeta)


# --- boundary decompression -------------------------------------------------

def test_decompress_boundary_examples():
    m = flat_slab(3)
    q = decompress_boundary(m, BCotangentPoint(0.0, [0, 0], 0.0, [1.0, 0.0]), +1)
    assert q.xi == 1.0
    q = decompress_boundary(m, BCotangentPoint(0.0, [0, 0], 0.0, [1.0, 1.0]), +1)
    assert q.xi == 0.0
    with pytest.raises(NotInCharSet):
        decompress_boundary(m, BCotangentPoint(0.0, [0, 0], 0.0, [1.0, 2.0]), +1)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([3, 4, 5]), st.booleans(),
       st.lists(st.floats(-3, 3), min_size=4, max_size=4), st.sampled_from([1, -1]))
def test_boundary_preimage_is_null(n, ads, zs, sign):
    m = exact_ads_collar(n) if ads else flat_slab(n)
    zeta = np.array(zs[: n - 1])
    # push into the characteristic set: |ζ_t| ≥ |ζ_rest|
    zeta[0] = math.copysign(np.linalg.norm(zeta[1:]) + abs(zeta[0]) + 0.1, zeta[0] or 1.0)
    b = BCotangentPoint(0.0, np.zeros(n - 1), 0.0, zeta)
    q = decompress_boundary(m, b, sign)
    scale = float(zeta @ zeta)
    assert abs(metric_function(m, q)) <= 1e-12 * scale
    assert compress(q) == b


# --- indicial roots ---------------------------------------------------------

def test_indicial_examples():
    d = indicial_roots(SpectralParam(0.0, 4))
    assert (d.s_minus, d.s_plus) == (0, 3) and d.log_case
    d = indicial_roots(SpectralParam(9 / 4, 4))
    assert d.s_plus == d.s_minus == 1.5 and d.difference == 0 and d.log_case and d.double_root
    d = indicial_roots(SpectralParam(5 / 2, 4))
    assert d.s_plus == pytest.approx(1.5 + 0.5j) and d.s_minus == pytest.approx(1.5 - 0.5j)
    assert not d.real_case


def test_indicial_non_integer_gap():
    d = indicial_roots(SpectralParam(1.0, 4))
    assert not d.log_case
    assert d.real_case


@settings(max_examples=1000, deadline=None)
@given(st.integers(3, 10), st.floats(-50, 50), st.floats(-10, 10))
def test_indicial_vieta(n, lr, li):
    lam = complex(lr, li)
    d = indicial_roots(SpectralParam(lam, n))
    scale = max(1.0, abs(lam), n)
    assert abs(d.s_plus + d.s_minus - (n - 1)) <= 1e-12 * scale
    assert abs(d.s_plus * d.s_minus - lam) <= 1e-12 * scale ** 2
    assert d.s_plus.real >= d.s_minus.real


def test_spectral_param_rejects_nonfinite():
    with pytest.raises(ValueError):
        SpectralParam(float("nan"), 4)


# --- classification ---------------------------------------------------------

@pytest.mark.parametrize("zeta,expected", [
    ([1.0, 0.0], PointClass.HYPERBOLIC),
    ([1.0, 1.0], PointClass.GLANCING),
    ([1.0, 2.0], PointClass.NOT_IN_CHAR_SET),
])
def test_classify_examples(zeta, expected):
    assert classify(flat_slab(3), BCotangentPoint(0.0, [0, 0], 0.0, zeta)) is expected


def test_classify_interior():
    assert classify(flat_slab(3), BCotangentPoint(0.2, [0, 0], 0.0, [1, 0])) is PointClass.INTERIOR


@settings(max_examples=200, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(1e-3, 1e3))
def test_classify_scale_invariant(z0, z1, c):
    if math.hypot(z0, z1) < 1e-6:
        return
    m = flat_slab(3)
    b = BCotangentPoint(0.0, [0, 0], 0.0, [z0, z1])
    bc = BCotangentPoint(0.0, [0, 0], 0.0, [c * z0, c * z1])
    assert classify(m, b) is classify(m, bc)


# --- timelike boundary ------------------------------------------------------

def _samples(n, k=25):
    rng = np.random.default_rng(0)
    return [rng.uniform(-2, 2, size=n - 1) for _ in range(k)]


def test_timelike_flat_and_ads():
    r = boundary_timelike_check(flat_slab(3), _samples(3))
    assert r.passed and r.max_violation == 0 and r.n_samples == 25
    assert boundary_timelike_check(exact_ads_collar(4), _samples(4)).passed


def test_timelike_negative_control():
    bad = perturbed_slab(3, A=lambda x, y: 1.0)
    r = boundary_timelike_check(bad, _samples(3))
    assert not r.passed
    assert r.worst_sample is not None and r.max_violation == pytest.approx(2.0)


def test_perturbed_from_params_keeps_normal_form():
    m = perturbed_from_params(3, {"a2": 0.3, "ct1": 0.5, "b_curv": 0.2})
    assert boundary_timelike_check(m, _samples(3)).passed
    G = eval_dual_metric(m, 0.5, [0.0, 0.0])
    assert G[0, 0] == pytest.approx(-1.075) and G[0, 1] == pytest.approx(0.25)
    assert G[2, 2] == pytest.approx(-0.9)
