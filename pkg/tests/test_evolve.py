import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adswk.acceptance import random_forward, random_lorentzian
from adswk.evolve import (
    BFBoundError,
    Closure,
    ForwardProblem,
    Grid,
    Instability,
    Stepper,
    boundary_closure_apply,
    energy_estimate_check,
    growth_factor,
    h10_norm,
    l2_norm,
    refined_positivity_check,
    run_forward,
    smooth_switch,
    step,
    stress_energy_form,
    stress_energy_matrix,
)
from adswk.experiments import ConvergenceConfig, convergence_study, energy_ratio_pair
from adswk.geometry import exact_ads_collar, flat_slab


def bump(center=0.5, width=0.08, t0=0.0, duration=0.4):
    def f(t, x, *ys):
        return smooth_switch(t, t0, duration) * np.exp(-((x - center) / width) ** 2)
    return f


# --- grid and problem validation ----------------------------------------------

def test_grid_layout():
    g = Grid(nx=64, ny=8, n=4, m=3)
    assert g.shape == (61, 8, 8)
    assert g.x[0] == pytest.approx(g.x_min) and g.x_min == pytest.approx(3 / 64)
    assert g.dt == pytest.approx(0.5 / 64)
    assert g.cell_volume == pytest.approx((1 / 64) * (1 / 8) ** 2)


@pytest.mark.parametrize("kw", [{"m": 1}, {"cfl": 0.9}, {"nx": 4}, {"n": 2}])
def test_grid_rejects_bad_parameters(kw):
    base = {"nx": 32}
    base.update(kw)
    with pytest.raises(ValueError):
        Grid(**base)


def test_indicial_closure_refused_above_bound():
    with pytest.raises(BFBoundError):
        run_forward(ForwardProblem(3.25, t_end=0.1), Grid(nx=32, n=4))
    with pytest.raises(BFBoundError):
        Stepper(ForwardProblem(2.25), Grid(nx=32, n=4))


def test_forcing_before_t0_rejected():
    f = lambda t, x, *ys: np.exp(-x) + 0 * t
    with pytest.raises(ValueError, match="before t0"):
        run_forward(ForwardProblem(0.0, f, t0=0.5, t_end=0.6), Grid(nx=32))


def test_non_flat_model_rejected():
    with pytest.raises(ValueError):
        run_forward(ForwardProblem(0.0, model=exact_ads_collar(3), t_end=0.1), Grid(nx=32))


def test_complex_lambda_rejected():
    with pytest.raises(ValueError):
        ForwardProblem(complex(1.0, 0.5))


def test_cfl_guard():
    with pytest.raises(Instability):
        Stepper(ForwardProblem(-2000.0, closure=Closure.WALL), Grid(nx=64, n=4))


def test_smooth_switch():
    t = np.array([-0.1, 0.0, 0.25, 0.5, 1.0, 1.2])
    np.testing.assert_allclose(smooth_switch(t, 0.0, 0.5), [0, 0, 1, 0, 0, 0], atol=1e-15)


# --- time stepping ------------------------------------------------------------

def test_zero_run_is_zero():
    run = run_forward(ForwardProblem(1.0, t_end=0.5), Grid(nx=32, ny=4, n=4))
    assert np.all(run.final == 0) and np.all(run.series["energy"] == 0)


def test_time_reversal():
    g = Grid(nx=64, ny=16, n=3)
    p = ForwardProblem(0.0, closure=Closure.WALL)
    st_ = Stepper(p, g)
    X, Y = g.mesh()
    u0 = np.exp(-((X - 0.5) / 0.05) ** 2) * np.cos(2 * np.pi * Y)
    u1 = st_.first_step(0.0, u0, np.zeros_like(u0))
    up, u = u0, u1
    for _ in range(100):
        up, u = u, st_.step(0.0, up, u)
    # reverse: swap the two time levels and march back
    up, u = u, up
    for _ in range(100):
        up, u = u, st_.step(0.0, up, u)
    assert np.max(np.abs(u - u0)) <= 1e-13


def test_step_function_matches_stepper():
    g = Grid(nx=32)
    p = ForwardProblem(0.0, bump(), t_end=1.0)
    st_ = Stepper(p, g)
    u = np.random.default_rng(0).normal(size=g.shape)
    t, a, b = step(p, g, (0.1, np.zeros(g.shape), u), st_)
    assert t == pytest.approx(0.1 + g.dt) and a is u
    np.testing.assert_array_equal(b, st_.step(0.1, np.zeros(g.shape), u))


def test_causality():
    f = bump(t0=0.3, duration=0.2)
    run = run_forward(ForwardProblem(1.0, f, t0=0.3, t_end=0.8, t_start=0.0), Grid(nx=64, n=4))
    assert run.max_before_t0 == 0.0
    assert np.max(np.abs(run.final)) > 0


def test_y_independent_forcing_matches_one_dimensional_run():
    f = bump(duration=0.3)
    a = run_forward(ForwardProblem(0.0, f, t_end=0.6), Grid(nx=64, ny=8, n=3))
    b = run_forward(ForwardProblem(0.0, f, t_end=0.6), Grid(nx=64, ny=1, n=3))
    np.testing.assert_allclose(a.final, np.broadcast_to(b.final, a.final.shape), atol=1e-14)


def test_self_convergence_second_order():
    rep = convergence_study(ConvergenceConfig(n=4, lam=0.0, base_nx=64, levels=4,
                                              y_cells_ratio=10 ** 6))
    assert rep.max_before_t0 == 0.0
    assert all(1.7 <= o <= 2.3 for o in rep.orders)


def test_renormalized_closure_at_least_second_order():
    # n = 4, λ = 2 has an integer root gap; the closure must not drop to first order
    rep = convergence_study(ConvergenceConfig(n=4, lam=2.0, base_nx=64, levels=4,
                                              y_cells_ratio=10 ** 6))
    assert all(o >= 1.7 for o in rep.orders)
    assert rep.differences[-1] < rep.differences[0] / 16


def test_wall_and_indicial_closures_differ():
    f = bump(center=0.2, width=0.05, duration=0.3)
    g = Grid(nx=128, n=4)
    a = run_forward(ForwardProblem(2.0, f, t_end=1.0, closure=Closure.INDICIAL), g).final
    b = run_forward(ForwardProblem(2.0, f, t_end=1.0, closure=Closure.WALL), g).final
    assert np.max(np.abs(a - b)) > 1e-3 * np.max(np.abs(a))


# --- closure and norms --------------------------------------------------------

def test_closure_exact_on_indicial_power():
    g = Grid(nx=64, n=4, m=3)
    for order in (1, 2):
        p = ForwardProblem(2.0, closure_order=order)
        ext = boundary_closure_apply(p, g, g.xcol() ** 2 * np.ones(g.shape))
        assert ext[0, 0] == pytest.approx((2 / 64) ** 2, rel=1e-13)


def test_wall_closure_ghost_is_zero():
    g = Grid(nx=32, n=3)
    ext = boundary_closure_apply(ForwardProblem(0.0, closure=Closure.WALL), g, np.ones(g.shape))
    assert np.all(ext[0] == 0)


def test_h10_of_zero():
    g = Grid(nx=32, n=4)
    assert h10_norm(g, np.zeros(g.shape)) == 0.0 and l2_norm(g, np.zeros(g.shape)) == 0.0


def test_h10_of_plus_branch_converges():
    errs = []
    for nx in (64, 128, 256, 512):
        g = Grid(nx=nx, n=4)
        st_ = Stepper(ForwardProblem(2.0), g)
        u = g.xcol() ** 2 * np.ones(g.shape)
        # integrand x^{-4}(x⁴ + (2x²)²) = 5 on K = [x_min, 0.75]
        errs.append(abs(h10_norm(g, u, (g.x_min, 0.75), st_) ** 2 - 5 * (0.75 - g.x_min)))
        assert errs[-1] <= 5.0 * g.dx * (1 + 1e-9)
    assert all(e2 < e1 for e1, e2 in zip(errs, errs[1:]))


def test_h10_of_subthreshold_power_diverges():
    vals = []
    for nx in (64, 128, 256, 512):
        g = Grid(nx=nx, n=4)
        vals.append(h10_norm(g, np.sqrt(g.xcol()) * np.ones(g.shape), (0.0, 0.9)))
    ratios = np.array(vals[1:]) / np.array(vals[:-1])
    assert np.all(ratios > 1.9)


# --- energy diagnostics -------------------------------------------------------

@pytest.mark.parametrize("lam", [0.0, 1.0, 2.0])
def test_bounded_energy_below_bound(lam):
    f = bump(duration=0.5)
    norms = []
    for nx in (64, 128):
        run = run_forward(ForwardProblem(lam, f, t_end=2.0), Grid(nx=nx, n=4), series_every=2,
                          window=(0.1, 1.0))
        norms.append(run.series["h1_K"][-1])
        assert growth_factor(run, 0.5) < 2.0
    assert abs(norms[1] / norms[0] - 1) < 0.5


def test_wall_closure_above_bound_grows():
    f = bump(duration=0.5)
    g = Grid(nx=64, n=4)
    below = run_forward(ForwardProblem(2.0, f, t_end=3.0, closure=Closure.WALL), g,
                        series_every=4, window=(0.1, 1.0))
    above = run_forward(ForwardProblem(3.25, f, t_end=3.0, closure=Closure.WALL), g,
                        series_every=4, window=(0.1, 1.0))
    assert growth_factor(above, 0.5) > 10 * growth_factor(below, 0.5)


def test_energy_estimate_na_for_zero_forcing():
    run = run_forward(ForwardProblem(1.0, t_end=0.3), Grid(nx=32, n=4))
    rep = energy_estimate_check(run, 0.0, 0.3)
    assert math.isnan(rep.ratio) and rep.note.startswith("NA")


def test_energy_ratio_refinement_pair():
    r1, r2 = energy_ratio_pair()
    assert 1 / 1.5 <= r2 / r1 <= 1.5


def test_observer_and_snapshots():
    seen = []

    def obs(t, u, ut, grid, st_):
        seen.append(t)
        return {"umax": float(np.max(np.abs(u)))}

    run = run_forward(ForwardProblem(0.0, bump(), t_end=0.5), Grid(nx=32), observer=obs,
                      snapshot_times=(0.25,))
    assert "umax" in run.series and len(run.series["umax"]) == run.times.size == len(seen)
    assert 0.25 in run.snapshots
    header = run.series_rows()[0]
    assert header[0] == "t" and "h1_K" in header


# --- stress-energy forms ------------------------------------------------------

G_FLAT = np.diag([-1.0, 1.0, -1.0])  # (x, t, y)
E_T = np.array([0.0, 1.0, 0.0])


def test_stress_energy_flat_is_euclidean():
    np.testing.assert_allclose(stress_energy_matrix(G_FLAT, E_T, E_T), np.eye(3), atol=0)
    beta = np.array([0.3 + 1j, -2.0, 0.5j])
    assert stress_energy_form(flat_slab(3), E_T, E_T, beta, 0.2, [0, 0]) == pytest.approx(
        float(np.sum(np.abs(beta) ** 2)))


@pytest.mark.parametrize("a", [-0.9, -0.3, 0.0, 0.5, 0.8])
def test_stress_energy_tilted_covector(a):
    alpha = np.array([a, 1.0, 0.0])
    ev = np.linalg.eigvalsh(stress_energy_matrix(G_FLAT, E_T, alpha))
    assert ev[0] == pytest.approx(1 - abs(a), abs=1e-14)


def test_stress_energy_backward_is_negative():
    ev = np.linalg.eigvalsh(stress_energy_matrix(G_FLAT, -E_T, E_T))
    assert np.all(ev < 0)


@pytest.mark.parametrize("c,expected", [(0.5, 0.5), (1.0, 0.0), (2.0, -1.0)])
def test_refined_form(c, expected):
    r = refined_positivity_check(G_FLAT, np.array([1.0, 0.0, 0.0]), E_T, E_T, c)
    assert r.preconditions_ok
    assert r.min_eigenvalue == pytest.approx(expected, abs=1e-10)


def test_refined_preconditions_reported():
    r = refined_positivity_check(G_FLAT, np.array([1.0, 0.5, 0.0]), E_T, E_T, 0.5)
    assert not r.preconditions_ok and r.violations


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_positivity_suite(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 7))
    G = random_lorentzian(rng, n)
    W = random_forward(rng, G, vector=True)
    a = random_forward(rng, G)
    assert np.linalg.eigvalsh(stress_energy_matrix(G, W, a))[0] > 0
    g = np.linalg.inv(G)
    basis = np.linalg.svd(np.vstack([a, g @ W]))[2][2:]
    U = rng.standard_normal(basis.shape[0]) @ basis
    c = float(rng.uniform(0, 2))
    if abs(c - 1) > 1e-3:
        r = refined_positivity_check(G, U, W, a, c)
        assert (r.min_eigenvalue > 0) == (c < 1)
