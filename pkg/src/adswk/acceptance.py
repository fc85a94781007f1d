"""The ten acceptance criteria as functions returning machine-readable verdicts."""

from __future__ import annotations

import math
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .evolve import refined_positivity_check, stress_energy_matrix
from .experiments import (
    BFScanConfig,
    ConvergenceConfig,
    WavepacketConfig,
    bf_threshold_scan,
    convergence_study,
    wavepacket_vs_gbb,
)
from .functional import graded_grid, hardy_infimum, sharp_hardy_constant
from .gbbflow import (
    Breakdown,
    EventKind,
    IntegratorConfig,
    basis_test_functions,
    mutate_no_flip,
    trace_gbb,
    validate_gbb,
)
from .geometry import (
    CotangentPoint,
    SpectralParam,
    exact_ads_collar,
    flat_slab,
    indicial_roots,
    perturbed_from_params,
)
from .modes import (
    Branch,
    ModeSpec,
    ResonantMode,
    build_radial_ode,
    integrate_radial,
    scattering_coefficient,
)

__all__ = ["Verdict", "CRITERIA", "run_criterion", "acceptance_suite", "suite_report",
           "ads_bounce_start", "random_lorentzian", "random_forward"]


@dataclass
class Verdict:
    id: int
    name: str
    passed: bool
    measured: dict
    tolerance: dict
    runtime_s: float
    runtime_budget_s: float
    error: Optional[str] = None

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        meas = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        return (f"[{status}] criterion {self.id:2d} {self.name}: {meas} "
                f"({self.runtime_s:.2f}s / {self.runtime_budget_s:g}s)")


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(a) for a in v) + "]"
    return str(v)


# ---------------------------------------------------------------------------
# Shared constructions
# ---------------------------------------------------------------------------

def ads_bounce_start(x0: float = 0.5, tau: float = 1.0, eta: float = 0.5):
    """Inward null covector in the n=3 AdS collar and the time of the first hit.

    With u₀ = x₀/√(1+x₀²) and a = √(τ²-η²)/τ the boundary hits occur at
    t₁ + kπ, t₁ = asin(u₀/a); returns the start point and t₁.
    """
    xi = math.sqrt((tau ** 2 / (1 + x0 ** 2) - eta ** 2) / (1 + x0 ** 2))
    u0 = x0 / math.sqrt(1 + x0 ** 2)
    a = math.sqrt(tau ** 2 - eta ** 2) / tau
    t1 = math.asin(u0 / a)
    return CotangentPoint(x0, np.array([0.0, 0.0]), xi, np.array([tau, eta])), t1


def _no_flip(model, hit: CotangentPoint) -> CotangentPoint:
    return CotangentPoint(hit.x, hit.y, hit.xi, hit.zeta)


def random_lorentzian(rng: np.random.Generator, n: int, t_index: int = 1) -> np.ndarray:
    """Random dual metric, signature one positive direction, with Ĝ(dt,dt) > 0."""
    while True:
        L = np.eye(n) + 0.3 * rng.standard_normal((n, n))
        d = -rng.uniform(0.5, 2.0, n)
        d[t_index] = rng.uniform(0.5, 2.0)
        G = L @ np.diag(d) @ L.T
        if G[t_index, t_index] > 0.05:
            return G


def random_forward(rng: np.random.Generator, G: np.ndarray, t_index: int = 1,
                   vector: bool = False) -> np.ndarray:
    """Random forward timelike covector (or vector, for the metric ĝ = Ĝ⁻¹)."""
    Q = np.linalg.inv(G) if vector else G
    n = G.shape[0]
    while True:
        v = rng.standard_normal(n)
        v[t_index] = abs(v[t_index]) * 3.0 + 0.1
        q = v @ Q @ v
        fwd = v[t_index] if vector else (G @ v)[t_index]
        if q > 1e-3 * (v @ v) and fwd > 0:
            return v


# ---------------------------------------------------------------------------
# Criteria
# ---------------------------------------------------------------------------

def crit1_indicial(seed: int = 0, draws: int = 1000, **_) -> Verdict:
    rng = np.random.default_rng(seed)
    worst_sum = worst_prod = 0.0
    for _ in range(draws):
        n = int(rng.integers(3, 9))
        lam = complex(rng.uniform(-20, 20), rng.uniform(-20, 20))
        r = indicial_roots(SpectralParam(lam, n))
        worst_sum = max(worst_sum, abs(r.s_plus + r.s_minus - (n - 1)))
        worst_prod = max(worst_prod, abs(r.s_plus * r.s_minus - lam))
    ok = worst_sum <= 1e-12 and worst_prod <= 1e-12
    return Verdict(1, "indicial algebra", ok, {"max_sum_err": worst_sum, "max_prod_err": worst_prod},
                   {"abs": 1e-12}, 0.0, 1.0)


def crit2_hardy(cells: int = 10_000, **_) -> Verdict:
    gaps = {}
    for n in (3, 4, 5):
        val = hardy_infimum(graded_grid(cells, n))
        c = sharp_hardy_constant(n)
        gaps[f"n{n}"] = (val - c) / c
    ok = all(abs(g) <= 0.02 for g in gaps.values())
    return Verdict(2, "sharp Hardy constant", ok, {f"rel_gap_{k}": v for k, v in gaps.items()},
                   {"rel": 0.02}, 0.0, 30.0)


def crit3_mode_oracle(seed: int = 0, draws: int = 20, **_) -> Verdict:
    rng = np.random.default_rng(seed)
    model = flat_slab(4)
    x = np.linspace(0.1, 1.0, 200)
    worst = 0.0
    for sg in rng.uniform(0.0, 20.0, draws):
        sol = integrate_radial(build_radial_ode(model, ModeSpec.from_sigma2(4, 2.0, sg * sg)),
                               Branch.PLUS, fit=False)
        v, _ = sol.at(x)
        ref = x * np.sin(sg * x) / sg
        worst = max(worst, float(np.max(np.abs(np.real(v) - ref)) / np.max(np.abs(ref))))
    return Verdict(3, "mode oracle x sin(sigma x)", worst <= 1e-7, {"max_rel_err": worst},
                   {"rel": 1e-7}, 0.0, 10.0)


def crit4_flat_reflection(mutate: bool = False, **_) -> Verdict:
    refl = _no_flip if mutate else None
    measured: Dict[str, object] = {}
    try:
        model = flat_slab(3)
        start = CotangentPoint(1.0, np.array([0.0, 0.0]), 1.0, np.array([1.0, 0.0]))
        path = trace_gbb(model, start, IntegratorConfig(s_span=(0.0, 5.0), x_max=1.0), refl)
        hits = path.events_of(EventKind.HYPERBOLIC_REFLECTION)
        ev = hits[0]
        mom = np.array([ev.state_after.xi, *ev.state_after.zeta])
        hit_err = abs(ev.s - 0.5)
        mom_err = float(np.max(np.abs(mom - np.array([-1.0, 1.0, 0.0]))))
        # 10-bounce AdS path
        ads = exact_ads_collar(3)
        q0, t1 = ads_bounce_start()
        cfg = IntegratorConfig(s_span=(0.0, 200.0), x_max=10.0, t_max=t1 + 9.5 * math.pi,
                               max_events=100)
        p10 = trace_gbb(ads, q0, cfg, refl)
        n10 = len(p10.events_of(EventKind.HYPERBOLIC_REFLECTION))
        t_hits = [e.state_before.y[0] for e in p10.events_of(EventKind.HYPERBOLIC_REFLECTION)]
        t_err = max(abs(t - (t1 + k * math.pi)) for k, t in enumerate(t_hits)) if t_hits else math.inf
        measured = {"hit_s_err": hit_err, "momentum_err": mom_err, "ads_events": n10,
                    "ads_hit_time_err": float(t_err)}
        ok = hit_err <= 1e-8 and mom_err <= 1e-8 and n10 == 10
        return Verdict(4, "flat-slab broken geodesic", ok, measured,
                       {"abs": 1e-8, "ads_events": 10}, 0.0, 5.0)
    except (Breakdown, IndexError, ValueError) as exc:
        return Verdict(4, "flat-slab broken geodesic", False, measured,
                       {"abs": 1e-8, "ads_events": 10}, 0.0, 5.0, f"{type(exc).__name__}: {exc}")


def reference_paths():
    """Traced reference paths used by the validator criterion."""
    flat = flat_slab(3)
    p1 = trace_gbb(flat, CotangentPoint(1.0, np.array([0.0, 0.0]), 1.0, np.array([1.0, 0.0])),
                   IntegratorConfig(s_span=(0.0, 5.0)))
    p2 = trace_gbb(flat, CotangentPoint(0.7, np.array([0.0, 0.1]), 0.6, np.array([1.0, 0.8])),
                   IntegratorConfig(s_span=(0.0, 5.0)))
    ads = exact_ads_collar(3)
    q0, t1 = ads_bounce_start()
    p3 = trace_gbb(ads, q0, IntegratorConfig(s_span=(0.0, 200.0), x_max=10.0,
                                             t_max=t1 + 9.5 * math.pi, sample_step=0.02))
    pert = perturbed_from_params(3, {"b_curv": 1.0})
    p4 = trace_gbb(pert, CotangentPoint(0.0, np.array([0.0, 0.0]), 0.0, np.array([1.0, 1.0])),
                   IntegratorConfig(s_span=(0.0, 1.0), x_max=5.0))
    return {"flat_normal": p1, "flat_oblique": p2, "ads_10_bounce": p3, "glancing": p4}


def crit5_validator(**_) -> Verdict:
    paths = reference_paths()
    tfs = basis_test_functions(3)
    margins = {}
    ok = True
    for name, p in paths.items():
        rep = validate_gbb(p, tfs)
        margins[f"margin_{name}"] = float(min(rep.margins.values())) if rep.margins else 0.0
        ok &= rep.passed
    mutants = {}
    for mode in ("straight", "xi"):
        rep = validate_gbb(mutate_no_flip(paths["flat_normal"], mode), tfs)
        mutants[f"mutant_{mode}_rejected"] = not rep.passed
        ok &= not rep.passed
    return Verdict(5, "GBB validator", bool(ok), {**margins, **mutants}, {"margin": ">= -tol"},
                   0.0, 10.0)


def crit6_dtn(**_) -> Verdict:
    model = flat_slab(4)
    d = float(np.real(scattering_coefficient(model, ModeSpec.from_sigma2(4, 2.0, 1.0))))
    err = abs(d - (-1.0 / math.tan(1.0)))
    try:
        scattering_coefficient(model, ModeSpec.from_sigma2(4, 2.0, math.pi ** 2))
        flagged = False
    except ResonantMode:
        flagged = True
    return Verdict(6, "DtN closed form", err <= 1e-8 and flagged,
                   {"dtn": d, "abs_err": err, "pi_flagged_resonant": flagged}, {"abs": 1e-8},
                   0.0, 5.0)


def crit7_wavepacket(mutate: bool = False, config: Optional[dict] = None, **_) -> Verdict:
    cfg = WavepacketConfig(**(config or {}), reflection_sign=-1 if mutate else 1)
    rep = wavepacket_vs_gbb(cfg)
    return Verdict(7, "wave packet follows GBB", rep.passed,
                   {"pre_max_cells": rep.pre_max, "post_max_cells": rep.post_max,
                    "n_pre": rep.n_pre, "n_post": rep.n_post, "inconclusive": rep.inconclusive,
                    "grid": f"{cfg.nx}x{cfg.ny}"},
                   {"cells": cfg.max_deviation_cells}, 0.0, 300.0)


def crit8_bf_threshold(config: Optional[dict] = None, **_) -> Verdict:
    cfg = BFScanConfig(**(config or {}))
    rows = {r["lambda"]: r for r in bf_threshold_scan((0.0, 1.0, 2.0, 2.25, 3.25), cfg)}
    below_ok = all(rows[l]["omega2_floor"] > 0 and rows[l]["growth_coarse"] < cfg.growth_bound
                   and rows[l]["growth_fine"] < cfg.growth_bound for l in (0.0, 1.0, 2.0))
    border_ok = rows[2.25]["status"] == "Borderline" and rows[2.25]["double_root"]
    r = rows[3.25]
    above_ok = (r["complex_pair"] and r["fit_refused"] and r["growth_coarse"] > cfg.unstable_growth
                and r["growth_fine"] > cfg.unstable_growth)
    meas = {f"growth_lam{l:g}": [rows[l]["growth_coarse"], rows[l]["growth_fine"]]
            for l in (0.0, 1.0, 2.0, 3.25)}
    meas.update({f"omega2_floor_lam{l:g}": rows[l]["omega2_floor"] for l in (0.0, 1.0, 2.0)})
    meas.update({"lam2.25_status": rows[2.25]["status"], "lam3.25_complex": r["complex_pair"],
                 "lam3.25_fit_refused": r["fit_refused"]})
    return Verdict(8, "BF threshold behavior", bool(below_ok and border_ok and above_ok), meas,
                   {"growth_below": cfg.growth_bound, "growth_above": cfg.unstable_growth},
                   0.0, 300.0)


def crit9_positivity(seed: int = 0, draws: int = 1000, **_) -> Verdict:
    rng = np.random.default_rng(seed)
    min_eig = math.inf
    worst_c = 0.0
    sign_ok = True
    for _ in range(draws):
        n = int(rng.integers(3, 7))
        G = random_lorentzian(rng, n)
        W = random_forward(rng, G, vector=True)
        a = random_forward(rng, G)
        min_eig = min(min_eig, float(np.linalg.eigvalsh(stress_energy_matrix(G, W, a))[0]))
        # U with α(U) = 0 and ĝ(U, W) = 0
        g = np.linalg.inv(G)
        cons = np.vstack([a, g @ W])
        basis = np.linalg.svd(cons)[2][2:]
        U = rng.standard_normal(basis.shape[0]) @ basis
        f = lambda c: refined_positivity_check(G, U, W, a, c).min_eigenvalue
        lo, hi = 0.0, 2.0
        if not (f(lo) > 0 and f(hi) < 0):
            sign_ok = False
            continue
        while hi - lo > 1e-7:
            mid = 0.5 * (lo + hi)
            if f(mid) > 0:
                lo = mid
            else:
                hi = mid
        worst_c = max(worst_c, abs(0.5 * (lo + hi) - 1.0))
        c = rng.uniform(0.0, 2.0)
        if abs(c - 1.0) > 1e-6 and (f(c) > 0) != (c < 1.0):
            sign_ok = False
    ok = min_eig > 0 and sign_ok and worst_c <= 1e-6
    return Verdict(9, "positivity suite", bool(ok),
                   {"min_eigenvalue": min_eig, "max_bisection_err": worst_c,
                    "sign_rule_holds": sign_ok}, {"bisection": 1e-6}, 0.0, 10.0)


def crit10_causality_convergence(config: Optional[dict] = None, **_) -> Verdict:
    cfg = ConvergenceConfig(**(config or {}))
    rep = convergence_study(cfg)
    causal = rep.max_before_t0 <= 1e-14 * max(rep.causality_scale, 1.0)
    order = rep.observed_order
    ok = causal and 1.7 <= order <= 2.3
    return Verdict(10, "causality and convergence", bool(ok),
                   {"max_u_before_t0": rep.max_before_t0, "orders": rep.orders,
                    "differences": rep.differences}, {"order": [1.7, 2.3], "causality": 1e-14},
                   0.0, 120.0)


CRITERIA: Dict[int, Callable[..., Verdict]] = {
    1: crit1_indicial,
    2: crit2_hardy,
    3: crit3_mode_oracle,
    4: crit4_flat_reflection,
    5: crit5_validator,
    6: crit6_dtn,
    7: crit7_wavepacket,
    8: crit8_bf_threshold,
    9: crit9_positivity,
    10: crit10_causality_convergence,
}

_NAMES = {1: "indicial algebra", 2: "sharp Hardy constant", 3: "mode oracle x sin(sigma x)",
          4: "flat-slab broken geodesic", 5: "GBB validator", 6: "DtN closed form",
          7: "wave packet follows GBB", 8: "BF threshold behavior", 9: "positivity suite",
          10: "causality and convergence"}
_BUDGETS = {1: 1.0, 2: 30.0, 3: 10.0, 4: 5.0, 5: 10.0, 6: 5.0, 7: 300.0, 8: 300.0, 9: 10.0,
            10: 120.0}


def run_criterion(cid: int, **kwargs) -> Verdict:
    """Run one criterion; the runtime budget is part of the verdict."""
    t0 = time.perf_counter()
    try:
        v = CRITERIA[cid](**kwargs)
    except Exception as exc:  # failures are verdicts
        v = Verdict(cid, _NAMES[cid], False, {}, {}, 0.0, _BUDGETS[cid],
                    f"{type(exc).__name__}: {exc}\n{traceback.format_exc(limit=3)}")
    v.runtime_s = time.perf_counter() - t0
    if v.runtime_s > v.runtime_budget_s:
        v.passed = False
        v.error = (v.error or "") + f"runtime {v.runtime_s:.2f}s exceeds budget {v.runtime_budget_s}s"
    return v


def _run_one(args):
    cid, kwargs = args
    return run_criterion(cid, **kwargs)


def acceptance_suite(only: Optional[Sequence[int]] = None, workers: int = 1, seed: int = 0,
                     mutate: bool = False, overrides: Optional[Dict[int, dict]] = None
                     ) -> List[Verdict]:
    """Run the criteria; ``mutate`` corrupts the reflection sign (negative control).

    With ``workers > 1`` the criteria run in a process pool; the measured runtimes then
    include contention and may exceed the single-process budgets.
    """
    ids = list(only) if only else sorted(CRITERIA)
    jobs = []
    for cid in ids:
        kw: dict = {"seed": seed}
        if cid in (4, 7):
            kw["mutate"] = mutate
        if overrides and cid in overrides:
            kw["config"] = overrides[cid]
        jobs.append((cid, kw))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_run_one, jobs))
    return [_run_one(j) for j in jobs]


def suite_report(verdicts: Sequence[Verdict]) -> dict:
    from dataclasses import asdict
    return {"all_passed": all(v.passed for v in verdicts),
            "total_runtime_s": float(sum(v.runtime_s for v in verdicts)),
            "verdicts": [asdict(v) for v in verdicts]}
