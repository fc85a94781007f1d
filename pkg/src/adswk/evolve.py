"""Finite-difference evolution of (□_g + λ)u = f on the truncated flat slab.

On the flat slab the equation reads

    u_tt = x^{n-2} ∂_x (x^{2-n} ∂_x u) + Δ_y u + λ u / x² - f / x²

which is discretized in flux form on the vertex grid x_i = iΔx, i ≥ m, with
a leapfrog step.  Multiplying the spatial operator by the weight x_i^{2-n}
gives a symmetric matrix, i.e. the scheme is symmetric for the L²₀ pairing
(weight x^{-n}) of the operator x²(L - ∂_t²).  The collar x < x_min = mΔx is
excised and the ghost value at x_{m-1} is supplied by a boundary closure.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid

from .geometry import (
    IndicialData,
    MetricModel,
    SpectralParam,
    bf_bound,
    eval_dual_metric,
    flat_slab,
    indicial_roots,
)

__all__ = [
    "Instability",
    "BFBoundError",
    "Closure",
    "Grid",
    "ForwardProblem",
    "EvolutionRun",
    "Stepper",
    "step",
    "boundary_closure_apply",
    "run_forward",
    "h10_norm",
    "l2_norm",
    "stress_energy_matrix",
    "stress_energy_form",
    "refined_positivity_check",
    "refined_form_matrix",
    "energy_estimate_check",
    "EnergyEstimateReport",
    "growth_factor",
    "smooth_switch",
]


class Instability(RuntimeError):
    """The discrete solution exceeded the overflow guard."""


class BFBoundError(ValueError):
    """The indicial closure needs λ < (n-1)²/4 (a real distinguished root)."""


class Closure(enum.Enum):
    INDICIAL = "IndicialExtrapolation"
    WALL = "HomogeneousWall"


@dataclass(frozen=True)
class Grid:
    """Vertex grid x_i = iΔx on [x_min, 1] and a periodic y-torus.

    ``nx`` cells of width Δx = 1/nx; ``m`` excised cells (x_min = mΔx);
    ``ny`` cells per torus direction of length ``ly`` (ny = 1: y-independent);
    ``n`` is the dimension (torus dimension n-2).
    """

    nx: int
    ny: int = 1
    n: int = 3
    m: int = 2
    cfl: float = 0.5
    ly: float = 1.0

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("x_min must be at least 2Δx (m >= 2)")
        if not 0 < self.cfl <= 0.5:
            raise ValueError("cfl must lie in (0, 0.5]")
        if self.nx <= self.m + 2:
            raise ValueError("nx too small for the excision")
        if self.n < 3:
            raise ValueError("n must be >= 3")

    @property
    def dx(self) -> float:
        return 1.0 / self.nx

    @property
    def dy(self) -> float:
        return self.ly / self.ny

    @property
    def x_min(self) -> float:
        return self.m * self.dx

    @property
    def dt(self) -> float:
        h = self.dx if self.ny == 1 else min(self.dx, self.dy)
        return self.cfl * h

    @property
    def x(self) -> np.ndarray:
        """Unknown nodes x_m .. x_{nx-1}."""
        return np.arange(self.m, self.nx) * self.dx

    @property
    def y(self) -> np.ndarray:
        return np.arange(self.ny) * self.dy

    @property
    def ydims(self) -> int:
        return self.n - 2

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.nx - self.m,) + (self.ny,) * self.ydims

    @property
    def cell_volume(self) -> float:
        return self.dx * (self.dy ** self.ydims)

    def xcol(self) -> np.ndarray:
        """x broadcast against the field shape."""
        return self.x.reshape((-1,) + (1,) * self.ydims)

    def mesh(self) -> List[np.ndarray]:
        axes = [self.x] + [self.y] * self.ydims
        return np.meshgrid(*axes, indexing="ij")

    def to_dict(self) -> dict:
        return {"nx": self.nx, "ny": self.ny, "n": self.n, "m": self.m,
                "cfl": self.cfl, "ly": self.ly, "dx": self.dx, "dt": self.dt}


Forcing = Callable[..., np.ndarray]


@dataclass
class ForwardProblem:
    """Pu = f with zero data before t₀ (optional initial data for diagnostics)."""

    lam: float
    forcing: Optional[Forcing] = None
    t0: float = 0.0
    t_end: float = 1.0
    closure: Closure = Closure.INDICIAL
    closure_order: int = 2
    model: MetricModel = None
    initial: Optional[Tuple[np.ndarray, np.ndarray]] = None
    complex_field: bool = False
    t_start: Optional[float] = None

    def __post_init__(self):
        if np.iscomplexobj(self.lam) and np.imag(self.lam) != 0:
            raise ValueError("evolution requires real lambda")
        self.lam = float(np.real(self.lam))
        if self.closure_order not in (1, 2):
            raise ValueError("closure_order must be 1 or 2")
        self.closure = Closure(self.closure)

    def check(self, grid: Grid):
        if self.model is not None and self.model.family_tag != "FlatSlab":
            raise ValueError("evolution is implemented for the FlatSlab family only")
        if self.model is not None and self.model.n != grid.n:
            raise ValueError("model and grid dimensions differ")
        if self.closure == Closure.INDICIAL and self.lam >= bf_bound(grid.n):
            raise BFBoundError(
                f"indicial closure requires lambda < (n-1)^2/4 = {bf_bound(grid.n)} "
                f"(got {self.lam}); above the bound x^((n-1)/2 + i a) is not in H^1_0")
        if self.forcing is not None:
            mesh = grid.mesh()
            for tt in np.linspace(self.t0 - 1.0, self.t0, 6)[:-1]:
                val = np.asarray(self.forcing(tt, *mesh))
                if np.any(val != 0):
                    raise ValueError(f"forcing does not vanish before t0 (t = {tt})")


def smooth_switch(t, t0: float, T: float):
    """sin⁴ bump supported on [t0, t0+T] (C³)."""
    t = np.asarray(t, float)
    s = (t - t0) / T
    return np.where((s > 0) & (s < 1), np.sin(np.pi * s) ** 4, 0.0)


# ---------------------------------------------------------------------------
# Stepper
# ---------------------------------------------------------------------------

class Stepper:
    """Precomputed coefficients of the spatial operator for one (problem, grid)."""

    def __init__(self, problem: ForwardProblem, grid: Grid):
        self.problem = problem
        self.grid = grid
        n = grid.n
        dx = grid.dx
        i = np.arange(grid.m, grid.nx)
        xi = i * dx
        xph = (i + 0.5) * dx
        xmh = (i - 0.5) * dx
        self.cx = (xi ** (n - 2) / dx ** 2)
        self.ap = xph ** (2.0 - n)
        self.am = xmh ** (2.0 - n)
        self.pot = problem.lam / xi ** 2
        self.x = xi
        shape1 = (-1,) + (1,) * grid.ydims
        self.cx_b = self.cx.reshape(shape1)
        self.ap_b = self.ap.reshape(shape1)
        self.am_b = self.am.reshape(shape1)
        self.pot_b = self.pot.reshape(shape1)
        self.inv_x2 = (1.0 / xi ** 2).reshape(shape1)
        if problem.closure == Closure.INDICIAL:
            if problem.lam >= bf_bound(n):
                raise BFBoundError("indicial closure requires lambda below the bound")
            s = float(indicial_roots(SpectralParam(problem.lam, n)).s_plus.real)
            self.s_plus = s
            # Renormalized variable v = x^{-s₊} u satisfies
            # v_tt = x^{-q} ∂_x(x^q ∂_x v) + Δ_y v - x^{-s₊-2} f,  q = 2s₊ - n + 2,
            # which carries no singular potential.
            q = 2.0 * s - n + 2.0
            self.cx = xi ** (-q) / dx ** 2
            self.ap = xph ** q
            self.am = xmh ** q
            self.pot = np.zeros_like(xi)
            self.xs = (xi ** s).reshape(shape1)
            self.inv_xs = (xi ** (-s)).reshape(shape1)
            self.cx_b = self.cx.reshape(shape1)
            self.ap_b = self.ap.reshape(shape1)
            self.am_b = self.am.reshape(shape1)
            self.pot_b = self.pot.reshape(shape1)
        else:
            self.s_plus = None
            self.xs = None
        self.mesh = None
        rho = float(np.max(self.cx * (self.ap + self.am) + np.abs(self.pot)))
        if grid.ny > 1:
            rho += 4.0 * grid.ydims / grid.dy ** 2
        self.spectral_radius_bound = rho
        if grid.dt ** 2 * rho >= 4.0:
            raise Instability(
                f"CFL violated: dt^2 * rho = {grid.dt ** 2 * rho:.3g} >= 4; "
                "increase the excision m or lower cfl")

    def ghost(self, u: np.ndarray) -> np.ndarray:
        """Ghost row at x_{m-1} from the closure (in the physical variable u)."""
        g = self.grid
        p = self.problem
        if p.closure == Closure.WALL:
            return np.zeros_like(u[0])
        s = self.s_plus
        xm1, x0, x1 = (g.m - 1) * g.dx, g.m * g.dx, (g.m + 1) * g.dx
        if p.closure_order == 1:
            return u[0] * (xm1 / x0) ** s
        v0 = u[0] * x0 ** (-s)
        v1 = u[1] * x1 ** (-s)
        return xm1 ** s * (2.0 * v0 - v1)

    def _ghost_v(self, v: np.ndarray) -> np.ndarray:
        if self.problem.closure_order == 1:
            return v[0]
        return 2.0 * v[0] - v[1]

    def laplacian(self, u: np.ndarray) -> np.ndarray:
        g = self.grid
        if self.xs is not None:
            w = u * self.inv_xs
            ghost = self._ghost_v(w)
        else:
            w = u
            ghost = self.ghost(u)
        up = np.empty_like(w)
        up[:-1] = w[1:]
        up[-1] = 0.0                       # Dirichlet wall at x = 1
        um = np.empty_like(w)
        um[1:] = w[:-1]
        um[0] = ghost
        Lw = self.cx_b * (self.ap_b * (up - w) - self.am_b * (w - um))
        if g.ny > 1:
            inv = 1.0 / g.dy ** 2
            for ax in range(1, 1 + g.ydims):
                Lw += (np.roll(w, 1, axis=ax) + np.roll(w, -1, axis=ax) - 2.0 * w) * inv
        if self.xs is not None:
            return Lw * self.xs
        return Lw + self.pot_b * w

    def source(self, t: float) -> Optional[np.ndarray]:
        f = self.problem.forcing
        if f is None or t < self.problem.t0:
            return None
        if self.mesh is None:
            self.mesh = self.grid.mesh()
        val = np.asarray(f(t, *self.mesh))
        return np.broadcast_to(val, self.grid.shape) * self.inv_x2

    def accel(self, t: float, u: np.ndarray) -> np.ndarray:
        a = self.laplacian(u)
        s = self.source(t)
        if s is not None:
            a = a - s
        return a

    def step(self, t: float, u_prev: np.ndarray, u: np.ndarray) -> np.ndarray:
        dt = self.grid.dt
        un = 2.0 * u - u_prev + dt * dt * self.accel(t, u)
        return un

    def first_step(self, t: float, u0: np.ndarray, v0: np.ndarray) -> np.ndarray:
        dt = self.grid.dt
        return u0 + dt * v0 + 0.5 * dt * dt * self.accel(t, u0)

    def operator_matrix(self) -> np.ndarray:
        """Dense x-only operator (ny = 1 columns) for stability analysis."""
        N = self.grid.shape[0]
        M = np.zeros((N, N))
        e = np.zeros((N,) + (1,) * self.grid.ydims)
        for j in range(N):
            e[...] = 0.0
            e[j] = 1.0
            M[:, j] = self.laplacian(e).reshape(N)
        return M


def step(problem: ForwardProblem, grid: Grid, state: Tuple[float, np.ndarray, np.ndarray],
         stepper: Optional[Stepper] = None):
    """One leapfrog step: (t, u_prev, u) → (t+Δt, u, u_next)."""
    st = stepper or Stepper(problem, grid)
    t, up, u = state
    un = st.step(t, up, u)
    if not np.all(np.isfinite(un)) or np.max(np.abs(un)) > 1e150:
        raise Instability(f"overflow guard tripped at t = {t + grid.dt:.6g}")
    return (t + grid.dt, u, un)


def boundary_closure_apply(problem: ForwardProblem, grid: Grid, u: np.ndarray) -> np.ndarray:
    """Field extended by the excised ghost row (shape grid.shape[0]+1 along x)."""
    problem.check(grid) if problem.closure == Closure.INDICIAL else None
    st = Stepper(problem, grid)
    return np.concatenate([st.ghost(u)[None], u], axis=0)


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------

def _window_mask(grid: Grid, window: Optional[Tuple[float, float]]):
    x = grid.x
    if window is None:
        return np.ones_like(x, dtype=bool)
    a, b = window
    return (x >= a - 1e-12) & (x <= b + 1e-12)


def _dx_centered(st: Stepper, u: np.ndarray) -> np.ndarray:
    g = st.grid
    up = np.empty_like(u); up[:-1] = u[1:]; up[-1] = 0.0
    um = np.empty_like(u); um[1:] = u[:-1]; um[0] = st.ghost(u)
    return (up - um) / (2 * g.dx)


def _dy_centered(grid: Grid, u: np.ndarray, ax: int) -> np.ndarray:
    if grid.ny == 1:
        return np.zeros_like(u)
    return (np.roll(u, -1, axis=ax) - np.roll(u, 1, axis=ax)) / (2 * grid.dy)


def l2_norm(grid: Grid, u: np.ndarray, window=None) -> float:
    mask = _window_mask(grid, window)
    w = (grid.x ** (-float(grid.n)))[mask].reshape((-1,) + (1,) * grid.ydims)
    return float(math.sqrt(np.sum(w * np.abs(u[mask]) ** 2) * grid.cell_volume))


def h10_norm(grid: Grid, u: np.ndarray, window=None, stepper: Optional[Stepper] = None,
             problem: Optional[ForwardProblem] = None) -> float:
    """sqrt(Σ x^{-n}(|u|² + |x u_x|² + Σ|x u_y|²) ΔV) over the window."""
    st = stepper or Stepper(problem or ForwardProblem(0.0, closure=Closure.WALL), grid)
    mask = _window_mask(grid, window)
    xc = grid.xcol()
    ux = _dx_centered(st, u)
    dens = np.abs(u) ** 2 + np.abs(xc * ux) ** 2
    for ax in range(1, 1 + grid.ydims):
        dens = dens + np.abs(xc * _dy_centered(grid, u, ax)) ** 2
    w = (grid.x ** (-float(grid.n))).reshape(xc.shape)
    return float(math.sqrt(np.sum((w * dens)[mask]) * grid.cell_volume))


def energy_density(grid: Grid, st: Stepper, u: np.ndarray, ut: np.ndarray) -> np.ndarray:
    """x^{2-n}(|u_t|² + |u_x|² + |∇_y u|²)."""
    xc = grid.xcol()
    dens = np.abs(ut) ** 2 + np.abs(_dx_centered(st, u)) ** 2
    for ax in range(1, 1 + grid.ydims):
        dens = dens + np.abs(_dy_centered(grid, u, ax)) ** 2
    return xc ** (2.0 - grid.n) * dens


# ---------------------------------------------------------------------------
# Runs
# ---------------------------------------------------------------------------

@dataclass
class EvolutionRun:
    grid: Grid
    problem: ForwardProblem
    times: np.ndarray
    series: Dict[str, np.ndarray]
    snapshots: Dict[float, np.ndarray]
    final: np.ndarray
    provenance: str
    max_before_t0: float = 0.0

    def series_rows(self) -> List[List[float]]:
        keys = ["t"] + sorted(k for k in self.series if k != "t")
        return [keys] + [[float(self.series[k][i]) for k in keys] for i in range(self.times.size)]


def _provenance(problem: ForwardProblem, grid: Grid) -> str:
    payload = {"grid": grid.to_dict(), "lam": problem.lam, "t0": problem.t0,
               "t_end": problem.t_end, "closure": problem.closure.value,
               "order": problem.closure_order,
               "forcing": getattr(problem.forcing, "__qualname__", repr(problem.forcing))}
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]


def run_forward(problem: ForwardProblem, grid: Grid, snapshot_times: Sequence[float] = (),
                series_every: int = 1, window: Optional[Tuple[float, float]] = None,
                observer: Optional[Callable] = None) -> EvolutionRun:
    """Evolve from rest (zero data for t < t₀) and record diagnostics.

    The time series holds, at every ``series_every``-th step, the L²₀ norm,
    the H¹₀ norm on ``window`` and the energy
    Σ x^{2-n}(|u_t|²+|u_x|²+|∇_y u|²)ΔV; ``observer(t, u, ut, grid, stepper)``
    may add further entries (returned as a dict).
    """
    problem.check(grid)
    st = Stepper(problem, grid)
    dt = grid.dt
    dtype = complex if problem.complex_field else float
    t = problem.t0 if problem.t_start is None else float(problem.t_start)
    nsteps = int(math.ceil((problem.t_end - t) / dt - 1e-9))
    if problem.initial is not None:
        u0 = np.asarray(problem.initial[0], dtype=dtype).reshape(grid.shape)
        v0 = np.asarray(problem.initial[1], dtype=dtype).reshape(grid.shape)
        up = u0
        u = st.first_step(t, u0, v0).astype(dtype)
    else:
        up = np.zeros(grid.shape, dtype=dtype)
        u = np.zeros(grid.shape, dtype=dtype)
    t = t + dt
    series: Dict[str, List[float]] = {"t": [], "l2": [], "h1_K": [], "energy": []}
    snaps: Dict[float, np.ndarray] = {}
    pending = sorted(snapshot_times)
    max_before = 0.0
    for k in range(1, nsteps):
        un = st.step(t, up, u)
        if (k & 63) == 0 or k == nsteps - 1:
            mx = float(np.max(np.abs(un)))
            if not math.isfinite(mx) or mx > 1e150:
                raise Instability(f"overflow guard tripped at t = {t:.6g}")
        if t < problem.t0 - 1e-12:
            max_before = max(max_before, float(np.max(np.abs(u))))
        if k % series_every == 0:
            ut = (un - up) / (2 * dt)
            series["t"].append(t)
            series["l2"].append(l2_norm(grid, u))
            series["h1_K"].append(h10_norm(grid, u, window, st))
            series["energy"].append(float(np.sum(energy_density(grid, st, u, ut)) * grid.cell_volume))
            if observer is not None:
                for key, val in observer(t, u, ut, grid, st).items():
                    series.setdefault(key, []).append(val)
        while pending and t >= pending[0] - 1e-12:
            snaps[pending.pop(0)] = u.copy()
        up, u = u, un
        t += dt
    arr = {k: np.asarray(v) for k, v in series.items()}
    return EvolutionRun(grid, problem, arr["t"], arr, snaps, u, _provenance(problem, grid), max_before)


def growth_factor(run: EvolutionRun, t_ref: float, key: str = "h1_K") -> float:
    """max_{t ≥ t_ref} N(t) / N(t_ref) for a recorded series (default: H¹₀(K) norm)."""
    t = run.times
    vals = run.series[key]
    i0 = int(np.searchsorted(t, t_ref))
    i0 = min(i0, t.size - 1)
    ref = vals[i0]
    if ref <= 0:
        return float("nan")
    return float(np.max(vals[i0:]) / ref)


# ---------------------------------------------------------------------------
# Stress-energy forms
# ---------------------------------------------------------------------------

def _G_at(model_or_G, x=None, y=None) -> np.ndarray:
    if isinstance(model_or_G, MetricModel):
        return eval_dual_metric(model_or_G, x, y)
    return np.asarray(model_or_G, float)


def stress_energy_matrix(model_or_G, W, alpha, x=None, y=None) -> np.ndarray:
    """Symmetric M with Ê_{W,α}(β) = β^H M β.

    Ê(β) = (β,α)_Ĝ conj(β(W)) + β(W)(α,β)_Ĝ - α(W)(β,β)_Ĝ, so
    M = (Ĝα)Wᵀ + W(Ĝα)ᵀ - α(W) Ĝ.
    """
    G = _G_at(model_or_G, x, y)
    W = np.asarray(W, float)
    a = np.asarray(alpha, float)
    Ga = G @ a
    return np.outer(Ga, W) + np.outer(W, Ga) - float(a @ W) * G


def stress_energy_form(model_or_G, W, alpha, beta, x=None, y=None) -> float:
    M = stress_energy_matrix(model_or_G, W, alpha, x, y)
    b = np.asarray(beta, dtype=complex)
    return float(np.real(np.conj(b) @ M @ b))


def refined_form_matrix(model_or_G, U, W, alpha, c: float, x=None, y=None) -> np.ndarray:
    """Ê_{W,α} + c α(W)/ĝ(U,U) · |β(U)|² as a symmetric matrix in β.

    U is the (0-)vector paired with β; ĝ = Ĝ⁻¹ is the metric on vectors.
    """
    G = _G_at(model_or_G, x, y)
    g = np.linalg.inv(G)
    U = np.asarray(U, float)
    W = np.asarray(W, float)
    a = np.asarray(alpha, float)
    M = stress_energy_matrix(G, W, a)
    return M + c * float(a @ W) / float(U @ g @ U) * np.outer(U, U)


@dataclass
class RefinedCheck:
    min_eigenvalue: float
    preconditions_ok: bool
    violations: List[str]


def refined_positivity_check(model_or_G, U, W, alpha, c: float, x=None, y=None,
                             time_index: int = 1, tol: float = 1e-10) -> RefinedCheck:
    """Minimum eigenvalue of the refined form; preconditions are reported."""
    G = _G_at(model_or_G, x, y)
    g = np.linalg.inv(G)
    U = np.asarray(U, float); W = np.asarray(W, float); a = np.asarray(alpha, float)
    v = []
    scale = max(np.linalg.norm(U) * max(np.linalg.norm(a), np.linalg.norm(W)), 1e-300)
    if abs(a @ U) > tol * scale:
        v.append("alpha(U) != 0")
    if abs(U @ g @ W) > tol * scale:
        v.append("(U, W) != 0")
    if not (W @ g @ W > 0 and W[time_index] > 0):
        v.append("W not forward timelike")
    if not (a @ G @ a > 0 and (G @ a)[time_index] > 0):
        v.append("alpha not forward timelike")
    lam_min = float(np.linalg.eigvalsh(refined_form_matrix(G, U, W, a, c))[0])
    return RefinedCheck(lam_min, not v, v)


# ---------------------------------------------------------------------------
# Energy estimate
# ---------------------------------------------------------------------------

@dataclass
class EnergyEstimateReport:
    ratio: float
    u_norm: float
    f_norm: float
    note: str = ""


def forcing_proxy_norm(problem: ForwardProblem, grid: Grid, t0: float, t1: float,
                       samples: int = 64) -> float:
    """sqrt(∫ (‖f‖² + ‖∂_t f‖² + Σ‖∂_y f‖²)_{L²₀} dt) sampled on [t0, t1]."""
    if problem.forcing is None:
        return 0.0
    mesh = grid.mesh()
    ts = np.linspace(t0, t1, samples)
    h = 1e-4 * max(t1 - t0, 1e-3)
    tot = []
    for tt in ts:
        f = np.broadcast_to(np.asarray(problem.forcing(tt, *mesh)), grid.shape)
        fp = np.broadcast_to(np.asarray(problem.forcing(tt + h, *mesh)), grid.shape)
        fm = np.broadcast_to(np.asarray(problem.forcing(tt - h, *mesh)), grid.shape)
        ft = (fp - fm) / (2 * h)
        val = l2_norm(grid, f) ** 2 + l2_norm(grid, ft) ** 2
        for ax in range(1, 1 + grid.ydims):
            val += l2_norm(grid, _dy_centered(grid, f, ax)) ** 2
        tot.append(val)
    return float(math.sqrt(trapezoid(tot, ts)))


def energy_estimate_check(run: EvolutionRun, t0: float, t1: float) -> EnergyEstimateReport:
    """sup_{t∈[t0,t1]} ‖u‖_{H¹₀(K)} over the forcing proxy norm."""
    fn = forcing_proxy_norm(run.problem, run.grid, t0, t1)
    mask = (run.times >= t0) & (run.times <= t1 + 1e-12)
    un = float(np.max(run.series["h1_K"][mask])) if mask.any() else 0.0
    if fn == 0.0:
        if un == 0.0:
            return EnergyEstimateReport(float("nan"), 0.0, 0.0, "NA: zero forcing")
        return EnergyEstimateReport(math.inf, un, 0.0, "nonzero solution with zero forcing")
    return EnergyEstimateReport(un / fn, un, fn)
