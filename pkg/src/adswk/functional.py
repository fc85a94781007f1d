"""Quadratic-form checks: Hardy and Poincaré constants, weighted Poincaré, τ time function.

The Hardy quotient on (0, x₀] is

    Q(u) = ∫ x^{2-n} |u'|² dx / ∫ x^{-n} |u|² dx      (= ‖x u'‖² / ‖u‖² in L²(x^{-n}dx))

whose infimum over functions vanishing at 0 is ((n-1)/2)².  The discrete
infimum is a Rayleigh–Ritz value for continuous piecewise-linear functions on
a graded mesh, so it approaches the sharp constant from above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from .geometry import MetricModel, eval_dual_metric

__all__ = [
    "WeightedGrid1D",
    "SupportConstraint",
    "DivergenceFlag",
    "SelectionFailure",
    "graded_grid",
    "uniform_grid",
    "hardy_quotient",
    "hardy_infimum",
    "PoincareResult",
    "poincare_constant",
    "WeightedPoincareResult",
    "weighted_poincare_check",
    "TauConstruction",
    "build_tau",
    "smooth_cutoff",
    "sharp_hardy_constant",
]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)
DEFAULT_GAMMA_MESH = 3.0


class DivergenceFlag(ValueError):
    """The weighted integrals of the supplied samples do not converge at x = 0."""


class SelectionFailure(RuntimeError):
    """No cutoff parameters passed the sampled checks within the iteration budget."""


def sharp_hardy_constant(n: int) -> float:
    return ((n - 1) / 2.0) ** 2


@dataclass(frozen=True)
class WeightedGrid1D:
    """Nodes on (0, x_end] with trapezoid weights for the measure x^{-n} dx.

    ``x[0]`` may be 0 (the boundary node, carrying zero weight).
    """

    x: np.ndarray
    weights: np.ndarray
    n: int
    gamma_mesh: float = 1.0

    @property
    def cells(self) -> int:
        return self.x.size - 1


def _trapezoid_weights(x: np.ndarray, n: int) -> np.ndarray:
    h = np.diff(x)
    w = np.zeros_like(x)
    w[:-1] += 0.5 * h
    w[1:] += 0.5 * h
    with np.errstate(divide="ignore"):
        dens = np.where(x > 0, x ** (-float(n)), 0.0) if n else np.ones_like(x)
    return w * dens


def graded_grid(N: int, n: int, gamma_mesh: float = DEFAULT_GAMMA_MESH,
                x_end: float = 1.0) -> WeightedGrid1D:
    """x_j = x_end (j/N)^γ, j = 0..N."""
    if N < 2:
        raise ValueError("need at least two cells")
    x = x_end * (np.arange(N + 1) / N) ** gamma_mesh
    return WeightedGrid1D(x, _trapezoid_weights(x, n), n, gamma_mesh)


def uniform_grid(a: float, b: float, N: int, n: int = 0) -> WeightedGrid1D:
    x = np.linspace(a, b, N + 1)
    return WeightedGrid1D(x, _trapezoid_weights(x, n), n, 1.0)


# ---------------------------------------------------------------------------
# Hardy quotient of sampled functions
# ---------------------------------------------------------------------------

def _centered_derivative(x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Second-order non-uniform differences, exact on quadratics."""
    return np.gradient(u, x, edge_order=2)


def _quotient(grid: WeightedGrid1D, u: np.ndarray) -> Tuple[float, float]:
    x = grid.x
    du = _centered_derivative(x, u)
    num = float(np.sum(grid.weights * (x * du) ** 2))
    den = float(np.sum(grid.weights * u ** 2))
    return num, den


def hardy_quotient(u, grid: WeightedGrid1D, check_tail: bool = True) -> float:
    """‖x u'‖² / ‖u‖² in L²(x^{-n}dx) by trapezoid quadrature and centered differences.

    ``u`` is an array of samples on ``grid.x`` or a callable.  The tail check
    compares the contribution of the innermost 1% of nodes with the total and
    also repeats the computation on every other node; a non-convergent weighted
    integral raises :class:`DivergenceFlag`.
    """
    x = grid.x
    uu = np.asarray(u(x) if callable(u) else u, dtype=float)
    if uu.shape != x.shape:
        raise ValueError("samples do not match the grid")
    num, den = _quotient(grid, uu)
    if den <= 0:
        raise ValueError("u vanishes identically")
    if check_tail:
        k = max(3, x.size // 100)
        tail = float(np.sum(grid.weights[:k] * uu[:k] ** 2))
        coarse = WeightedGrid1D(x[::2], _trapezoid_weights(x[::2], grid.n), grid.n)
        cnum, cden = _quotient(coarse, uu[::2])
        if not (math.isfinite(num) and math.isfinite(den)):
            raise DivergenceFlag("weighted integrals are not finite")
        if tail > 0.25 * den or abs(cden - den) > 0.25 * den:
            raise DivergenceFlag("weighted L2 integral is dominated by the x = 0 end")
    return num / den


# ---------------------------------------------------------------------------
# Discrete infimum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SupportConstraint:
    """Support in (0, x0], optionally with holes (intervals where u = 0)."""

    x0: float = 1.0
    holes: Tuple[Tuple[float, float], ...] = ()


def _power_integral(a: np.ndarray, b: np.ndarray, m: float) -> np.ndarray:
    """∫_a^b x^m dx, accurate when b/a is close to 1."""
    if m == -1:
        return np.log(b / a)
    return a ** (m + 1) * np.expm1((m + 1) * np.log1p((b - a) / a)) / (m + 1)


def _cell_forms(a: np.ndarray, b: np.ndarray, n: int):
    """Per-cell stiffness k (for ∫x^{2-n}u'²) and mass entries for ∫x^{-n}u²."""
    h = b - a
    k = _power_integral(a, b, 2.0 - n) / h ** 2
    la, lb = np.log(a), np.log(b)
    half = 0.5 * (lb - la)[:, None]
    tau = half * _GL_X[None, :] + 0.5 * (lb + la)[:, None]
    X = np.exp(tau)
    W = half * _GL_W[None, :] * X ** (1.0 - n)  # dx = x dτ
    pa = (b[:, None] - X) / h[:, None]
    pb = (X - a[:, None]) / h[:, None]
    return k, (W * pa * pa).sum(1), (W * pb * pb).sum(1), (W * pa * pb).sum(1)


def _assemble_forms(x: np.ndarray, n: int, stiff_cells: np.ndarray, mass_cells: np.ndarray):
    """Global tridiagonal stiffness/mass on nodes 1..N (node 0 is the boundary).

    ``stiff_cells`` / ``mass_cells`` are boolean masks over cells 1..N-1
    (cell c = [x_c, x_{c+1}]); the first cell [0, x_1] is never included.
    """
    a, b = x[1:-1], x[2:]
    k, maa, mbb, mab = _cell_forms(a, b, n)
    k = np.where(stiff_cells, k, 0.0)
    maa, mbb, mab = (np.where(mass_cells, v, 0.0) for v in (maa, mbb, mab))
    M = x.size - 1  # nodes 1..N -> indices 0..N-1
    Kd = np.zeros(M); Md = np.zeros(M)
    Kd[:-1] += k; Kd[1:] += k
    Md[:-1] += maa; Md[1:] += mbb
    Ke = -k
    Me = mab
    K = sp.diags([Ke, Kd, Ke], [-1, 0, 1], format="csc")
    Mm = sp.diags([Me, Md, Me], [-1, 0, 1], format="csc")
    return K, Mm


def _cells_in(x: np.ndarray, intervals: Sequence[Tuple[float, float]]) -> np.ndarray:
    mid = 0.5 * (x[1:-1] + x[2:])
    mask = np.zeros(mid.size, dtype=bool)
    for lo, hi in intervals:
        mask |= (mid > lo) & (mid < hi)
    return mask


def _free_nodes(active: np.ndarray) -> np.ndarray:
    """Nodes 1..N that may be nonzero: every existing adjacent cell is active.

    ``active`` flags cells 1..N-1; cell 0 = [0, x_1] is always inactive, so
    node 1 is pinned to zero.  The outermost node only has a left cell.
    """
    full = np.concatenate(([False], active))   # cells 0..N-1
    N = full.size
    left = full                                # node j has left cell j-1
    right = np.concatenate((full[1:], [True])) # node N has no right cell
    return left & right


def _restrict(K, M, free: np.ndarray):
    idx = np.flatnonzero(free)
    return K[idx][:, idx], M[idx][:, idx], idx


def hardy_infimum(grid: WeightedGrid1D, constraint: SupportConstraint = SupportConstraint()) -> float:
    """Smallest generalized eigenvalue of the Hardy form on the constrained space.

    Continuous piecewise-linear trial functions vanishing on [0, x₁], on each
    hole and beyond x₀; weighted cell integrals are evaluated exactly for the
    stiffness and by 12-point Gauss–Legendre in log x for the mass.
    """
    x = grid.x
    n = grid.n
    if x[0] != 0.0:
        raise ValueError("hardy_infimum expects a grid starting at x = 0")
    active = _cells_in(x, [(0.0, constraint.x0)]) & ~_cells_in(x, constraint.holes)
    K, M = _assemble_forms(x, n, active, active)
    free = _free_nodes(active)
    Kr, Mr, _ = _restrict(K, M, free)
    vals = sla.eigsh(Kr, k=1, M=Mr, sigma=0.0, which="LM", return_eigenvectors=False)
    return float(np.min(vals))


@dataclass
class PoincareResult:
    constant: float
    flagged: bool
    reason: str
    components: List[Tuple[float, float]]


def _components(x: np.ndarray, cells: np.ndarray) -> List[Tuple[int, int]]:
    comps = []
    start = None
    for c, on in enumerate(cells):
        if on and start is None:
            start = c
        if not on and start is not None:
            comps.append((start, c - 1))
            start = None
    if start is not None:
        comps.append((start, cells.size - 1))
    return comps


def poincare_constant(K_region: Sequence[Tuple[float, float]], O_region: Sequence[Tuple[float, float]],
                      grid: WeightedGrid1D) -> PoincareResult:
    """Best C in ‖u‖_{L²₀(K)} ≤ C ‖x u'‖_{L²₀(O)} on a 1-D collar.

    Regions are unions of intervals.  Every component of O meeting K must be
    connected to the boundary x = 0; otherwise constants have zero gradient
    and the constant is infinite (flagged).
    """
    x = grid.x
    n = grid.n
    ocells = _cells_in(x, O_region)
    kcells = _cells_in(x, K_region) & ocells
    comps = _components(x, ocells)
    comp_iv = [(float(x[c0 + 1]), float(x[c1 + 2])) for c0, c1 in comps]
    for (c0, c1), iv in zip(comps, comp_iv):
        if kcells[c0:c1 + 1].any() and c0 != 0:
            return PoincareResult(math.inf, True, "component of O containing K is not "
                                  "connected to the boundary", comp_iv)
    if not kcells.any():
        return PoincareResult(0.0, False, "empty K", comp_iv)
    # Only the boundary-connected component carries mass; restrict to it so the
    # stiffness block is definite (Dirichlet at x_1, natural at its outer end).
    c0, c1 = comps[0]
    comp = np.zeros_like(ocells)
    comp[c0:c1 + 1] = True
    Kst, Mk = _assemble_forms(x, n, comp, kcells & comp)
    free = _free_nodes(comp)
    # The outer end of the component is a free (natural) boundary.
    free[c1 + 1] = True
    Ks, Ms, _ = _restrict(Kst, Mk, free)
    # Largest ν in M_K v = ν K_O v; the constant is sqrt(ν).
    Ks = Ks.tocsc()
    nu = sla.eigsh(Ms, k=1, M=Ks, which="LA", return_eigenvectors=False,
                   Minv=None, tol=1e-10)
    return PoincareResult(float(math.sqrt(max(nu[0], 0.0))), False, "", comp_iv)


# ---------------------------------------------------------------------------
# Weighted Poincaré along a vector field
# ---------------------------------------------------------------------------

@dataclass
class WeightedPoincareResult:
    lhs: float
    rhs: float
    ratio: float
    bound: float
    passed: bool
    hypotheses_ok: bool
    reason: str


def weighted_poincare_check(W, chi, u, grid: WeightedGrid1D, gamma: float,
                            C0: float = 0.0, support_tol: float = 1e-8,
                            hyp_tol: float = 1e-3) -> WeightedPoincareResult:
    """Compare ∫|Wχ||u|² with (4γ/(1-C₀γ)²) ∫χ|Wu|² on a 1-D grid.

    ``W`` is the coefficient w(t) of W = w ∂_t (callable or scalar); ``chi``
    and ``u`` are callables or sample arrays on ``grid.x``.  The measure is
    the grid's (plain dt for n = 0).  ``hyp_tol`` is the relative slack
    allowed in the sampled hypothesis χ ≤ -γ Wχ (discrete derivatives are
    only second-order accurate).
    """
    t = grid.x
    wq = grid.weights
    wv = np.broadcast_to(np.asarray(W(t) if callable(W) else W, float), t.shape)
    cv = np.asarray(chi(t) if callable(chi) else chi, float)
    uv = np.asarray(u(t) if callable(u) else u, dtype=complex)
    d = lambda f: np.gradient(f, t, edge_order=2)
    Wchi = wv * d(cv)
    Wu = wv * (d(uv.real) + 1j * d(uv.imag))
    divW = d(wv)
    bound = 4.0 * gamma / (1.0 - C0 * gamma) ** 2 if C0 * gamma < 1 else math.inf
    reasons = []
    if np.any(cv < 0):
        reasons.append("chi < 0")
    if np.any(cv > -gamma * Wchi + hyp_tol * np.abs(cv) + 1e-12):
        reasons.append("chi <= -gamma W(chi) violated")
    if np.max(np.abs(divW)) > C0 + 1e-9:
        reasons.append("|div W| exceeds C0")
    if not gamma < 1.0 / (2.0 * C0) if C0 > 0 else not gamma > 0:
        reasons.append("gamma >= 1/(2 C0)")
    scale = max(float(np.max(np.abs(uv))), 1e-300)
    if abs(uv[0]) > support_tol * scale or abs(uv[-1]) > support_tol * scale:
        reasons.append("u is not compactly supported in the window")
    lhs = float(np.sum(wq * np.abs(Wchi) * np.abs(uv) ** 2))
    rhs = float(np.sum(wq * cv * np.abs(Wu) ** 2))
    if reasons:
        return WeightedPoincareResult(lhs, rhs, float("nan"), bound, False, False, "; ".join(reasons))
    ratio = lhs / rhs if rhs > 0 else math.inf
    return WeightedPoincareResult(lhs, rhs, ratio, bound, bool(lhs <= bound * rhs), True, "")


# ---------------------------------------------------------------------------
# τ time function
# ---------------------------------------------------------------------------

def smooth_cutoff(s):
    """χ(s) = 1 for s ≤ 0, 0 for s ≥ 1, C^∞ in between."""
    s = np.asarray(s, float)

    def f(v):
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(v > 0, np.exp(-1.0 / np.where(v > 0, v, 1.0)), 0.0)

    return f(1.0 - s) / (f(1.0 - s) + f(s))


def smooth_cutoff_deriv(s):
    s = np.asarray(s, float)
    h = 1e-6
    return (smooth_cutoff(s + h) - smooth_cutoff(s - h)) / (2 * h)


@dataclass
class TauConstruction:
    eps: float
    delta: float
    x: np.ndarray
    t: np.ndarray
    tau: np.ndarray
    dtau: np.ndarray          # (..., n) covector components
    max_dev: float
    min_G_dtau: float
    max_boundary_mixed: float
    attempts: int


def _tau_fields(model: MetricModel, X, T, eps, delta):
    n = model.n
    y = np.zeros(n - 1)
    shape = X.shape
    tau = np.empty(shape)
    dtau = np.empty(shape + (n,))
    Gdd = np.empty(shape)
    mixed = np.empty(shape)
    for idx in np.ndindex(shape):
        x = float(X[idx]); y[0] = float(T[idx])
        A = float(model.A(x, y))
        Ct = float(model.C(x, y)[0])
        gam = Ct / A
        gA = model.grad_A(x, y)
        gC = model.grad_C(x, y)[:, 0]
        dgam = (gC * A - Ct * gA) / A ** 2          # ∂γ over all n coordinates
        sarg = x ** delta / eps
        chi = float(smooth_cutoff(sarg))
        dchi = float(smooth_cutoff_deriv(sarg))
        tau[idx] = y[0] - x * chi * gam
        d = np.zeros(n)
        d[1] = 1.0
        d[0] -= (chi + delta * sarg * dchi) * gam
        d -= x * chi * dgam
        dtau[idx] = d
        G = eval_dual_metric(model, x, y)
        Gdd[idx] = float(d @ G @ d)
        mixed[idx] = float(d @ G[:, 0])
    return tau, dtau, Gdd, mixed


def build_tau(model: MetricModel, t0: float = 0.0, delta0: float = 0.1,
              window: Tuple[float, float, float] = (0.5, -1.0, 1.0), samples: int = 41,
              eps_list=(1.0, 0.5, 0.25, 0.1, 0.05, 0.02, 0.01),
              delta_list=(1.0, 0.5, 0.25)) -> TauConstruction:
    """τ = t - x χ(x^δ/ε) Ĝ(dt,dx)/Ĝ(dx,dx) with sampled verification.

    ``window = (x_w, t_a, t_b)`` is the sampled region [0, x_w] × [t_a, t_b].
    ``t0`` shifts the window in t.  (ε, δ) are scanned in order until
    |τ - t| < δ₀, Ĝ(dτ,dτ) > 0 and Ĝ(dτ,dx)|_{x=0} = 0 (to 1e-10) hold at all
    samples.
    """
    xw, ta, tb = window
    xs = np.linspace(0.0, xw, samples)
    ts = np.linspace(ta + t0, tb + t0, samples)
    X, T = np.meshgrid(xs, ts, indexing="ij")
    attempts = 0
    for eps in eps_list:
        for delta in delta_list:
            attempts += 1
            tau, dtau, Gdd, mixed = _tau_fields(model, X, T, eps, delta)
            dev = float(np.max(np.abs(tau - T)))
            gmin = float(np.min(Gdd))
            bmix = float(np.max(np.abs(mixed[0])))
            if dev < delta0 and gmin > 0 and bmix <= 1e-10:
                return TauConstruction(eps, delta, X, T, tau, dtau, dev, gmin, bmix, attempts)
    raise SelectionFailure(f"no (eps, delta) passed after {attempts} attempts")
