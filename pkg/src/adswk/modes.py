"""Separated radial modes, Frobenius series and boundary scattering data.

For a model whose coefficients depend on ``x`` only (and C ≡ 0) the ansatz
``u = exp(i(ωt - k·y)) v(x)`` reduces (□_g + λ)u = 0 to the radial b-form

    L v = α(x) (x∂_x)² v + β(x) (x∂_x) v + γ(x) v = 0

with α = -A, β = (n-1)A - x(A' + A J'/J), γ = λ + x² ζ·B(x)ζ, ζ = (ω, -k).
For the flat slab this is (x∂_x)² - (n-1)x∂_x + λ + σ²x², σ² = ω² - |k|².
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .geometry import (
    IndicialData,
    MetricModel,
    SpectralParam,
    bf_bound,
    flat_slab,
    indicial_roots,
)

__all__ = [
    "NotSeparable",
    "IllPosedAboveBound",
    "ResonantMode",
    "ModeSpec",
    "RadialODE",
    "FrobeniusSolution",
    "ModeSolution",
    "Branch",
    "BFStatus",
    "BFDiagnostic",
    "build_radial_ode",
    "frobenius_expand",
    "integrate_radial",
    "fit_asymptotics",
    "scattering_coefficient",
    "eigenmodes_truncated",
    "bf_diagnostic",
]


class NotSeparable(ValueError):
    """The model does not admit the radial separation ansatz."""


class IllPosedAboveBound(ValueError):
    """Asymptotic coefficients are not defined for complex indicial roots."""


class ResonantMode(ArithmeticError):
    """The Plus-branch solution vanishes at the wall (pole of the DtN coefficient)."""


class Branch(enum.Enum):
    PLUS = "Plus"
    MINUS = "Minus"


@dataclass(frozen=True)
class ModeSpec:
    n: int
    lam: complex
    omega: float
    kvec: Tuple[float, ...] = ()
    sigma2: float = field(default=None)

    def __post_init__(self):
        k = tuple(float(v) for v in np.atleast_1d(self.kvec)) if np.size(self.kvec) else ()
        if len(k) not in (0, self.n - 2):
            raise ValueError(f"kvec must have length n-2 = {self.n - 2}")
        if not k:
            k = (0.0,) * (self.n - 2)
        object.__setattr__(self, "kvec", k)
        s2 = float(self.omega) ** 2 - sum(v * v for v in k)
        if self.sigma2 is not None and abs(self.sigma2 - s2) > 1e-12 * max(1.0, abs(s2)):
            raise ValueError("sigma2 inconsistent with omega and kvec")
        object.__setattr__(self, "sigma2", s2)
        object.__setattr__(self, "lam", complex(self.lam))
        object.__setattr__(self, "omega", float(self.omega))

    @classmethod
    def from_sigma2(cls, n: int, lam, sigma2: float) -> "ModeSpec":
        """A spec with the given σ²: ω = √σ² when σ² ≥ 0, else ω = 0 and |k| = √-σ²."""
        if sigma2 >= 0:
            return cls(n, lam, math.sqrt(sigma2), (0.0,) * (n - 2))
        k = [0.0] * (n - 2)
        k[0] = math.sqrt(-sigma2)
        return cls(n, lam, 0.0, tuple(k))

    @property
    def zeta(self) -> np.ndarray:
        return np.concatenate(([self.omega], -np.asarray(self.kvec)))


@dataclass
class RadialODE:
    """Coefficients of L v = α (x∂x)²v + β (x∂x)v + γ v.

    ``alpha_c`` etc. are Taylor coefficients in x (index = power); they are
    exact (zero-padded) for the built-in families.
    """

    n: int
    lam: complex
    spec: ModeSpec
    alpha: Callable[[np.ndarray], np.ndarray]
    beta: Callable[[np.ndarray], np.ndarray]
    gamma: Callable[[np.ndarray], np.ndarray]
    alpha_c: np.ndarray
    beta_c: np.ndarray
    gamma_c: np.ndarray
    radius: float = math.inf
    family_tag: str = "FlatSlab"

    @property
    def indicial(self) -> IndicialData:
        return indicial_roots(SpectralParam(self.lam, self.n))

    def series(self, K: int):
        """Coefficient arrays padded/truncated to length K+1."""
        def pad(c):
            out = np.zeros(K + 1, dtype=complex)
            m = min(K + 1, c.size)
            out[:m] = c[:m]
            return out
        return pad(self.alpha_c), pad(self.beta_c), pad(self.gamma_c)

    def Q(self, m: int, r, K: int = None):
        a, b, g = self.series(max(m, 2))
        return a[m] * r * r + b[m] * r + g[m]

    def apply(self, x, v, xv, xxv):
        """L v given v, (x∂x)v and (x∂x)²v sampled at x."""
        return self.alpha(x) * xxv + self.beta(x) * xv + self.gamma(x) * v


def _taylor_coeffs(fun: Callable[[float], float], r: float, K: int) -> np.ndarray:
    """Taylor coefficients of a smooth function on [-r, r] via Chebyshev interpolation."""
    cheb = np.polynomial.chebyshev.Chebyshev.interpolate(
        lambda x: np.array([fun(float(v)) for v in np.atleast_1d(x)]), deg=max(K, 24),
        domain=[-r, r])
    poly = cheb.convert(kind=np.polynomial.Polynomial, domain=[-r, r], window=[-r, r])
    c = poly.coef
    c[np.abs(c) < 1e-13 * max(1.0, np.max(np.abs(c)))] = 0.0
    return c[: K + 1]


def build_radial_ode(model: MetricModel, spec: ModeSpec, K: int = 80) -> RadialODE:
    """Assemble the radial b-form for an x-only model with C ≡ 0."""
    if spec.n != model.n:
        raise ValueError("spec.n does not match the model dimension")
    n = model.n
    lam = complex(spec.lam)
    zeta = spec.zeta
    tag = model.family_tag
    if tag == "FlatSlab":
        s2 = spec.sigma2
        alpha = lambda x: np.ones_like(np.asarray(x, float))
        beta = lambda x: -(n - 1) * np.ones_like(np.asarray(x, float))
        gamma = lambda x: lam + s2 * np.asarray(x, float) ** 2
        ac = np.array([1.0])
        bc = np.array([-(n - 1.0)])
        gc = np.array([lam, 0.0, s2], dtype=complex)
        return RadialODE(n, lam, spec, alpha, beta, gamma, ac, bc, gc, math.inf, tag)
    if tag == "ExactAdSCollar":
        w2 = spec.omega ** 2
        k2 = float(np.dot(spec.kvec, spec.kvec))
        alpha = lambda x: 1.0 + np.asarray(x, float) ** 2
        beta = lambda x: -(n - 1) * (1.0 + np.asarray(x, float) ** 2) + 2.0 * np.asarray(x, float) ** 2
        gamma = lambda x: lam + np.asarray(x, float) ** 2 * (w2 / (1.0 + np.asarray(x, float) ** 2) - k2)
        ac = np.array([1.0, 0.0, 1.0])
        bc = np.array([-(n - 1.0), 0.0, 3.0 - n])
        gc = np.zeros(K + 1, dtype=complex)
        gc[0] = lam
        # x² w²/(1+x²) = w² Σ_{j≥1} (-1)^{j-1} x^{2j}
        for j in range(1, K // 2 + 1):
            gc[2 * j] += w2 * (-1) ** (j - 1)
        gc[2] -= k2
        return RadialODE(n, lam, spec, alpha, beta, gamma, ac, bc, gc, 1.0, tag)
    if not model.x_only:
        raise NotSeparable(f"model family {tag!r} is not declared separable")
    # Separable user family: coefficients from the model maps.
    y0 = np.zeros(n - 1)

    def Afun(x):
        return float(model.A(x, y0))

    def Cnorm(x):
        return float(np.max(np.abs(model.C(x, y0))))

    for xs in (0.0, 0.3, 0.7):
        if Cnorm(xs) > 0:
            raise NotSeparable("separable families require C ≡ 0")

    def dA(x):
        return float(model.grad_A(x, y0)[0])

    def alpha_s(x):
        return -Afun(x)

    def beta_s(x):
        J = model.J(x)
        return (n - 1) * Afun(x) - x * (dA(x) + Afun(x) * model.dJ(x) / J)

    def gamma_s(x):
        B = np.asarray(model.B(x, y0), float)
        return lam + x * x * float(zeta @ B @ zeta)

    r = 0.5
    vec = lambda f: (lambda x: np.vectorize(f, otypes=[complex if f is gamma_s else float])(x))
    return RadialODE(n, lam, spec, vec(alpha_s), vec(beta_s), vec(gamma_s),
                     _taylor_coeffs(alpha_s, r, min(K, 24)),
                     _taylor_coeffs(beta_s, r, min(K, 24)),
                     _taylor_coeffs(lambda x: gamma_s(x).real, r, min(K, 24)).astype(complex)
                     + 1j * _taylor_coeffs(lambda x: gamma_s(x).imag, r, min(K, 24)),
                     r, tag)


# ---------------------------------------------------------------------------
# Frobenius series
# ---------------------------------------------------------------------------

@dataclass
class FrobeniusSolution:
    exponent: complex
    coeffs: np.ndarray
    log_coeffs: np.ndarray
    K: int
    radius: float
    branch: Branch
    ode: RadialODE = field(repr=False, default=None)

    def _powers(self, x):
        x = np.asarray(x, float)
        k = np.arange(self.K + 1)
        return x[..., None] ** k

    def evaluate(self, x):
        """(v, x∂x v, (x∂x)² v) at x > 0."""
        x = np.asarray(x, float)
        s = self.exponent
        k = np.arange(self.K + 1)
        xs = x[..., None] ** (s + k)
        r = s + k
        v = xs @ self.coeffs
        xv = xs @ (self.coeffs * r)
        xxv = xs @ (self.coeffs * r * r)
        if self.log_coeffs.size and np.any(self.log_coeffs != 0):
            c = self.log_coeffs
            lg = np.log(x)
            base = xs @ c
            d1 = xs @ (c * r)
            d2 = xs @ (c * r * r)
            v = v + lg * base
            xv = xv + lg * d1 + base
            xxv = xxv + lg * d2 + 2 * d1
        return v, xv, xxv

    def __call__(self, x):
        return self.evaluate(x)[0]

    def tail_bound(self, x: float, terms: int = 4) -> float:
        """Size of the last few terms relative to the leading one at x."""
        k = np.arange(self.K + 1)
        mags = np.abs(self.coeffs) * x ** k
        if self.log_coeffs.size:
            mags = mags + np.abs(self.log_coeffs) * x ** k * (1 + abs(math.log(x)))
        lead = max(mags[0], 1e-300) if mags[0] > 0 else max(np.max(mags), 1e-300)
        return float(np.max(mags[-terms:]) / lead)

    def residuals(self) -> np.ndarray:
        """Recurrence residual per order (zero for an exact recurrence)."""
        ode = self.ode
        K = self.K
        a, b, g = ode.series(K)
        s = self.exponent
        res = np.zeros(K + 1)
        for N in range(K + 1):
            tot = 0j
            for m in range(N + 1):
                r = s + N - m
                tot += self.coeffs[N - m] * (a[m] * r * r + b[m] * r + g[m])
                if self.log_coeffs.size:
                    tot += self.log_coeffs[N - m] * (2 * a[m] * r + b[m])
            scale = max(abs(self.coeffs[N]), 1e-300) if self.coeffs[N] != 0 else 1.0
            res[N] = abs(tot) / scale
        return res


def _estimate_radius(c: np.ndarray) -> float:
    nz = [(k, abs(v)) for k, v in enumerate(c) if k > 0 and abs(v) > 0]
    if len(nz) < 4:
        return math.inf
    tail = nz[-4:]
    est = [v ** (-1.0 / k) for k, v in tail]
    return float(min(est))


def frobenius_expand(ode: RadialODE, branch: Branch, K: int = 40,
                     log_support: bool = True) -> FrobeniusSolution:
    """Recurrence-generated series about x = 0 for the requested branch."""
    ind = ode.indicial
    a, b, g = ode.series(K)
    Q = lambda m, r: a[m] * r * r + b[m] * r + g[m]
    dQ = lambda m, r: 2 * a[m] * r + b[m]
    branch = Branch(branch)
    if branch == Branch.PLUS:
        s = ind.s_plus
        coeffs = np.zeros(K + 1, dtype=complex)
        coeffs[0] = 1.0
        for N in range(1, K + 1):
            S = sum(coeffs[N - m] * Q(m, s + N - m) for m in range(1, N + 1))
            coeffs[N] = -S / Q(0, s + N)
        sol = FrobeniusSolution(s, coeffs, np.zeros(0, dtype=complex), K,
                                _estimate_radius(coeffs), branch, ode)
        return _realify(sol, ode)

    s = ind.s_minus
    d = ind.difference
    if ind.log_case:
        dint = int(round(d.real))
        if dint == 0:
            if not log_support:
                raise ValueError("double indicial root: the Minus branch needs log support")
            plus = frobenius_expand(ode, Branch.PLUS, K)
            c = plus.coeffs.copy()
            bco = np.zeros(K + 1, dtype=complex)
            bco[0] = 1.0
            for N in range(1, K + 1):
                S = sum(bco[N - m] * Q(m, s + N - m) for m in range(1, N + 1))
                S += sum(c[N - m] * dQ(m, s + N - m) for m in range(0, N + 1))
                bco[N] = -S / Q(0, s + N)
            sol = FrobeniusSolution(s, bco, c, K, _estimate_radius(bco), branch, ode)
            return _realify(sol, ode)
        if K < dint:
            raise ValueError("K must be at least s+ - s- for the Minus branch in the log case")
        plus = frobenius_expand(ode, Branch.PLUS, K)
        bco = np.zeros(K + 1, dtype=complex)
        c = np.zeros(K + 1, dtype=complex)
        bco[0] = 1.0
        C = 0j
        for N in range(1, K + 1):
            S = sum(bco[N - m] * Q(m, s + N - m) for m in range(1, N + 1))
            S += sum(c[N - m] * dQ(m, s + N - m) for m in range(0, N))
            if N == dint:
                # Q_0(s+) = 0: the log coefficient absorbs the obstruction, b_d = 0.
                C = -S / dQ(0, s + N)
                c[dint:] = C * plus.coeffs[: K + 1 - dint]
                bco[N] = 0.0
                continue
            bco[N] = -S / Q(0, s + N)
        c_used = c if abs(C) > 0 else np.zeros(K + 1, dtype=complex)
        sol = FrobeniusSolution(s, bco, c_used, K, _estimate_radius(bco), branch, ode)
        return _realify(sol, ode)

    coeffs = np.zeros(K + 1, dtype=complex)
    coeffs[0] = 1.0
    for N in range(1, K + 1):
        S = sum(coeffs[N - m] * Q(m, s + N - m) for m in range(1, N + 1))
        coeffs[N] = -S / Q(0, s + N)
    sol = FrobeniusSolution(s, coeffs, np.zeros(0, dtype=complex), K,
                            _estimate_radius(coeffs), branch, ode)
    return _realify(sol, ode)


def _realify(sol: FrobeniusSolution, ode: RadialODE) -> FrobeniusSolution:
    """Drop zero imaginary parts so real problems yield real arrays."""
    if (abs(complex(ode.lam).imag) == 0 and abs(complex(sol.exponent).imag) == 0
            and np.all(np.imag(ode.gamma_c) == 0)):
        sol.coeffs = sol.coeffs.real.astype(float)
        sol.log_coeffs = sol.log_coeffs.real.astype(float)
        sol.exponent = float(complex(sol.exponent).real)
    if ode.radius < sol.radius:
        sol.radius = ode.radius
    return sol


# ---------------------------------------------------------------------------
# Integration and fitting
# ---------------------------------------------------------------------------

@dataclass
class ModeSolution:
    spec: ModeSpec
    x: np.ndarray
    v: np.ndarray
    xv: np.ndarray
    v_minus: complex
    v_plus: complex
    log_coeff: complex
    residual: float
    condition_number: float
    branch: Branch
    x0: float
    sol: object = field(repr=False, default=None)

    def at(self, x):
        """(v, x∂x v) at arbitrary x in [x0, x_end] from the dense output."""
        tau = np.log(np.asarray(x, float))
        Y = self.sol(tau)
        return Y[0], Y[1]


def choose_seed(fro: FrobeniusSolution, target: float = 1e-12, x_cap: float = 0.05) -> float:
    """Largest x₀ (within a factor 2) meeting the tail bound, capped by the radius."""
    x0 = min(x_cap, 0.5 * fro.radius if math.isfinite(fro.radius) else x_cap)
    while x0 > 1e-6 and fro.tail_bound(x0) > target:
        x0 *= 0.5
    return x0


def integrate_radial(ode: RadialODE, branch: Branch, x_end: float = 1.0,
                     x0: Optional[float] = None, K: int = 40, rtol: float = 1e-12,
                     n_samples: int = 400, fit: bool = True) -> ModeSolution:
    """Seed with the Frobenius series at x₀ and integrate in τ = ln x to x_end."""
    fro = frobenius_expand(ode, branch, K)
    if x0 is None:
        x0 = choose_seed(fro)
    v0, xv0, _ = fro.evaluate(np.array([x0]))
    v0, xv0 = complex(v0[0]), complex(xv0[0])
    is_real = (isinstance(fro.exponent, float) and np.isrealobj(fro.coeffs))
    # v_τ = w, w_τ = -(β w + γ v)/α
    def rhs(tau, Y):
        x = math.exp(tau)
        al = complex(ode.alpha(np.array([x]))[0])
        be = complex(ode.beta(np.array([x]))[0])
        ga = complex(ode.gamma(np.array([x]))[0])
        v, w = Y[0], Y[1]
        return np.array([w, -(be * w + ga * v) / al])

    Y0 = np.array([v0, xv0], dtype=complex)
    scale = max(abs(v0), abs(xv0), 1e-300)
    sol = solve_ivp(rhs, (math.log(x0), math.log(x_end)), Y0, method="DOP853",
                    rtol=rtol, atol=rtol * scale * 1e-3, dense_output=True)
    if sol.status != 0:
        raise RuntimeError(f"radial integration failed: {sol.message}")
    xs = np.geomspace(x0, x_end, n_samples)
    Y = sol.sol(np.log(xs))
    v, xv = Y[0], Y[1]
    if is_real:
        v, xv = v.real, xv.real
    # Residual: recompute (x∂x)²v from the ODE and check consistency via finite differences.
    tau = np.log(xs)
    dv = np.gradient(v, tau, edge_order=2)
    res = float(np.max(np.abs(dv - xv)) / max(np.max(np.abs(xv)), 1e-300))
    vm = vp = lc = complex("nan")
    cond = float("nan")
    if fit and ode.indicial.real_case:
        try:
            vm, vp, lc, cond = fit_asymptotics(xs, v, ode.indicial, (x0, 4 * x0), ode=ode)
        except IllPosedAboveBound:
            pass
    return ModeSolution(ode.spec, xs, v, xv, vm, vp, lc, res, cond, Branch(branch), x0, sol.sol)


def fit_asymptotics(x, v, indicial: IndicialData, fit_window: Tuple[float, float],
                    ode: Optional[RadialODE] = None, K: int = 40):
    """Least-squares fit of v ≈ c₋ Minus + c₊ Plus on the window.

    Returns ``(v_minus, v_plus, log_coeff, condition_number)`` where
    ``log_coeff = c₋ · C`` is the coefficient of x^{s₊} log x.
    """
    if not indicial.real_case:
        raise IllPosedAboveBound("complex indicial roots: the two growth rates coincide "
                                 "and no Dirichlet/Neumann split exists")
    x = np.asarray(x, float)
    v = np.asarray(v)
    lo, hi = fit_window
    mask = (x >= lo * (1 - 1e-12)) & (x <= hi * (1 + 1e-12))
    if mask.sum() < 4:
        raise ValueError("fit window does not contain enough samples")
    xw, vw = x[mask], v[mask]
    if ode is None:
        minus = xw ** indicial.s_minus.real
        plus = xw ** indicial.s_plus.real
        logc = 0.0
        if indicial.double_root:
            minus = plus * np.log(xw)
    else:
        fm = frobenius_expand(ode, Branch.MINUS, K)
        fp = frobenius_expand(ode, Branch.PLUS, K)
        minus = fm(xw)
        plus = fp(xw)
        dint = int(round(indicial.difference.real)) if indicial.log_case else None
        if fm.log_coeffs.size and dint is not None and dint > 0:
            logc = fm.log_coeffs[dint]
        elif fm.log_coeffs.size and dint == 0:
            logc = 1.0
        else:
            logc = 0.0
    M = np.column_stack([minus, plus])
    norms = np.linalg.norm(M, axis=0)
    Ms = M / norms
    coef, *_ = np.linalg.lstsq(Ms, vw, rcond=None)
    coef = coef / norms
    cond = float(np.linalg.cond(Ms))
    cm, cp = coef
    if np.isrealobj(vw):
        cm, cp = float(np.real(cm)), float(np.real(cp))
    return cm, cp, cm * logc, cond


# ---------------------------------------------------------------------------
# Scattering data
# ---------------------------------------------------------------------------

def _end_values(ode: RadialODE, x_end: float = 1.0):
    p = integrate_radial(ode, Branch.PLUS, x_end, fit=False, n_samples=64)
    m = integrate_radial(ode, Branch.MINUS, x_end, fit=False, n_samples=64)
    return p, m


def scattering_coefficient(model: MetricModel, spec: ModeSpec, wall: str = "DirichletAtX1",
                           resonance_tol: float = 1e-8) -> complex:
    """v₊ coefficient of the solution with v₋ = 1 and v(1) = 0."""
    if wall != "DirichletAtX1":
        raise ValueError(f"unsupported wall {wall!r}")
    if abs(complex(spec.lam).imag) > 0 or complex(spec.lam).real >= bf_bound(spec.n):
        raise IllPosedAboveBound("scattering requires real lambda below (n-1)^2/4")
    ode = build_radial_ode(model, spec)
    p, m = _end_values(ode)
    p1, m1 = p.v[-1], m.v[-1]
    pscale = float(np.max(np.abs(p.v)))
    if abs(p1) <= resonance_tol * pscale:
        raise ResonantMode(f"Plus branch vanishes at the wall (sigma2 = {spec.sigma2!r})")
    d = -m1 / p1
    return float(np.real(d)) if np.isrealobj(p.v) and np.isrealobj(m.v) else complex(d)


def _plus_at_wall(model: MetricModel, n: int, lam: float, kvec, sigma: float) -> float:
    k2 = float(np.dot(kvec, kvec)) if len(kvec) else 0.0
    omega = math.sqrt(max(sigma * abs(sigma) + k2, 0.0))
    spec = ModeSpec(n, lam, omega, tuple(kvec) if len(kvec) else ())
    ode = build_radial_ode(model, spec)
    sol = integrate_radial(ode, Branch.PLUS, 1.0, fit=False, n_samples=8, rtol=1e-11)
    return float(np.real(sol.v[-1]) / np.max(np.abs(sol.v)))


def eigenmodes_truncated(model: MetricModel, lam: float, kvec=(), wall: str = "DirichletAtX1",
                         m: int = 5, sigma_step: float = 0.25,
                         sigma_max: float = 200.0) -> List[float]:
    """First m positive σ (σ² = ω² - |k|²) with Plus-branch v(1) = 0, by shooting."""
    if wall != "DirichletAtX1":
        raise ValueError(f"unsupported wall {wall!r}")
    n = model.n
    lam = float(np.real(lam))
    if lam >= bf_bound(n):
        raise IllPosedAboveBound("eigenmode shooting requires lambda below (n-1)^2/4")
    kvec = tuple(kvec) if len(kvec) else (0.0,) * (n - 2)
    f = lambda sg: _plus_at_wall(model, n, lam, kvec, sg)
    roots: List[float] = []
    a = sigma_step
    fa = f(a)
    while len(roots) < m and a < sigma_max:
        b = a + sigma_step
        fb = f(b)
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(brentq(f, a, b, xtol=1e-13, rtol=1e-13))
        a, fa = b, fb
    return roots


def nonpositive_mode_count(model: MetricModel, lam: float, kvec=(), sigma2_floor: float = -400.0,
                           steps: int = 80) -> int:
    """Number of sign changes of the Plus branch at the wall for σ² in [floor, 0]."""
    n = model.n
    kvec = tuple(kvec) if len(kvec) else (0.0,) * (n - 2)
    grid = np.linspace(sigma2_floor, 0.0, steps + 1)
    vals = []
    for s2 in grid:
        sg = math.copysign(math.sqrt(abs(s2)), s2)
        vals.append(_plus_at_wall(model, n, lam, kvec, sg))
    vals = np.array(vals)
    return int(np.sum(np.sign(vals[1:]) != np.sign(vals[:-1])))


class BFStatus(enum.Enum):
    BELOW = "BelowBound"
    BORDERLINE = "Borderline"
    ABOVE = "AboveBound"


@dataclass(frozen=True)
class BFDiagnostic:
    status: BFStatus
    im_nonzero: bool
    bound: float


def bf_diagnostic(s: SpectralParam) -> BFDiagnostic:
    bound = bf_bound(s.n)
    lam = complex(s.lam)
    if lam.imag != 0:
        return BFDiagnostic(BFStatus.ABOVE, True, bound)
    if abs(lam.real - bound) <= 1e-12 * max(1.0, bound):
        return BFDiagnostic(BFStatus.BORDERLINE, False, bound)
    if lam.real < bound:
        return BFDiagnostic(BFStatus.BELOW, False, bound)
    return BFDiagnostic(BFStatus.ABOVE, False, bound)
