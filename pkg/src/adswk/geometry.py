"""Collar-coordinate metric models and boundary phase-space geometry.

Coordinates are ``z = (x, y_1, ..., y_{n-1})`` with ``y_1 = t`` the time
coordinate and ``y_2 ... y_{n-1}`` periodic coordinates on a flat torus.  A
model specifies the conformal *dual* metric

    G = A dx⊗dx + 2 C_j dx⊙dy_j + B_ij dy_i⊗dy_j

in that ordering.  Momenta are ``(xi, zeta)`` with ``xi`` dual to ``x``.

The compressed cotangent coordinates are ``(x, y, xib, zetab)`` with
``xib = x * xi`` and ``zetab = zeta``.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "DomainError",
    "NotInCharSet",
    "MetricModel",
    "CotangentPoint",
    "BCotangentPoint",
    "SpectralParam",
    "IndicialData",
    "PointClass",
    "TimelikeReport",
    "flat_slab",
    "exact_ads_collar",
    "perturbed_slab",
    "perturbed_from_params",
    "tabulated_model",
    "eval_dual_metric",
    "dual_metric_partials",
    "metric_function",
    "compress",
    "decompress",
    "decompress_boundary",
    "indicial_roots",
    "classify",
    "boundary_timelike_check",
    "bf_bound",
    "DEFAULT_TOL_H",
]

DEFAULT_TOL_H = 1e-9
LOG_CASE_TOL = 1e-9


class DomainError(ValueError):
    """Raised when a point lies outside the collar chart (x < 0)."""


class NotInCharSet(ValueError):
    """Raised when a boundary covector is not in the compressed characteristic set."""


ScalarMap = Callable[[float, np.ndarray], float]
MatrixMap = Callable[[float, np.ndarray], np.ndarray]


def bf_bound(n: int) -> float:
    """The threshold ``(n-1)^2/4``."""
    return (n - 1) ** 2 / 4.0


@dataclass(frozen=True)
class MetricModel:
    """A collar metric family given by its conformal dual-metric coefficients.

    ``A(x, y)`` is a scalar, ``B(x, y)`` an ``(n-1, n-1)`` symmetric matrix and
    ``C(x, y)`` a length ``n-1`` vector.  ``dA``, ``dB``, ``dC`` return the
    partials with respect to all ``n`` coordinates, stacked on the leading
    axis (shapes ``(n,)``, ``(n, n-1, n-1)``, ``(n, n-1)``).  When they are
    ``None`` fourth-order central differences are used.

    ``J(x)`` is the density of the conformal volume, ``dĝ = J dx dy``; it is
    only consulted by the mode and energy code.
    """

    n: int
    A: ScalarMap
    B: MatrixMap
    C: MatrixMap
    dA: Optional[MatrixMap] = None
    dB: Optional[MatrixMap] = None
    dC: Optional[MatrixMap] = None
    family_tag: str = "PerturbedSlab"
    params: dict = field(default_factory=dict)
    J: Callable[[float], float] = lambda x: 1.0
    dJ: Callable[[float], float] = lambda x: 0.0
    x_only: bool = False
    fd_scale: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"dimension n must be an integer >= 3, got {self.n!r}")

    @property
    def dim_y(self) -> int:
        return self.n - 1

    # Partials, falling back to finite differences -------------------------
    def _fd(self, fun: Callable, x: float, y: np.ndarray) -> np.ndarray:
        h = 1e-5 * self.fd_scale
        z = np.concatenate(([x], y))
        out = []
        for k in range(self.n):
            def at(shift):
                zz = z.copy()
                zz[k] += shift
                return np.asarray(fun(zz[0], zz[1:]), dtype=float)

            d = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h)
            out.append(d)
        return np.array(out)

    def grad_A(self, x: float, y: np.ndarray) -> np.ndarray:
        if self.dA is not None:
            return np.asarray(self.dA(x, y), dtype=float)
        return self._fd(self.A, x, y)

    def grad_B(self, x: float, y: np.ndarray) -> np.ndarray:
        if self.dB is not None:
            return np.asarray(self.dB(x, y), dtype=float)
        return self._fd(self.B, x, y)

    def grad_C(self, x: float, y: np.ndarray) -> np.ndarray:
        if self.dC is not None:
            return np.asarray(self.dC(x, y), dtype=float)
        return self._fd(self.C, x, y)


# ---------------------------------------------------------------------------
# Built-in families
# ---------------------------------------------------------------------------

def _flat_B(n: int) -> np.ndarray:
    B = -np.eye(n - 1)
    B[0, 0] = 1.0
    return B


def flat_slab(n: int = 3) -> MetricModel:
    """Constant-coefficient slab: A = -1, C = 0, B = diag(+1, -1, ..., -1)."""
    B0 = _flat_B(n)
    m = n - 1
    return MetricModel(
        n=n,
        A=lambda x, y: -1.0,
        B=lambda x, y: B0.copy(),
        C=lambda x, y: np.zeros(m),
        dA=lambda x, y: np.zeros(n),
        dB=lambda x, y: np.zeros((n, m, m)),
        dC=lambda x, y: np.zeros((n, m)),
        family_tag="FlatSlab",
        x_only=True,
    )


def exact_ads_collar(n: int = 3) -> MetricModel:
    """Exact AdS collar ĝ = -(1+x²)^{-1}dx² - dω² + (1+x²)dt².

    The angular factor is replaced by a flat torus of dimension n-2, which is
    exact for n = 3.  Inverting the diagonal metric gives
    A = -(1+x²), B_tt = 1/(1+x²), B_ωω = -1, C = 0, and |det ĝ| = 1.
    """
    m = n - 1

    def B(x, y):
        M = -np.eye(m)
        M[0, 0] = 1.0 / (1.0 + x * x)
        return M

    def dB(x, y):
        D = np.zeros((n, m, m))
        D[0, 0, 0] = -2.0 * x / (1.0 + x * x) ** 2
        return D

    def dA(x, y):
        g = np.zeros(n)
        g[0] = -2.0 * x
        return g

    return MetricModel(
        n=n,
        A=lambda x, y: -(1.0 + x * x),
        B=B,
        C=lambda x, y: np.zeros(m),
        dA=dA,
        dB=dB,
        dC=lambda x, y: np.zeros((n, m)),
        family_tag="ExactAdSCollar",
        x_only=True,
    )


def perturbed_slab(
    n: int = 3,
    A: Optional[ScalarMap] = None,
    B: Optional[MatrixMap] = None,
    C: Optional[MatrixMap] = None,
    dA: Optional[MatrixMap] = None,
    dB: Optional[MatrixMap] = None,
    dC: Optional[MatrixMap] = None,
    *,
    x_only: bool = False,
    params: Optional[dict] = None,
) -> MetricModel:
    """A user family; unspecified coefficients default to the flat slab.

    Derivatives that are not supplied are taken by finite differences.  If
    ``x_only`` is set the caller declares that all coefficients depend on
    ``x`` only and C ≡ 0, which makes the model separable for mode analysis.
    """
    flat = flat_slab(n)
    return MetricModel(
        n=n,
        A=A if A is not None else flat.A,
        B=B if B is not None else flat.B,
        C=C if C is not None else flat.C,
        dA=dA if A is not None else (dA if dA is not None else flat.dA),
        dB=dB if B is not None else (dB if dB is not None else flat.dB),
        dC=dC if C is not None else (dC if dC is not None else flat.dC),
        family_tag="PerturbedSlab",
        params=dict(params or {}),
        x_only=x_only,
    )


def perturbed_from_params(n: int, params: dict) -> MetricModel:
    """Perturbed slab built from scalar parameters (used by the config layer).

    Recognised keys, all defaulting to the flat values:

    ``a0``      A(x) = a0 - a2*x²   (a0 = -1 in normal form)
    ``a2``
    ``ct0``     C_t(x) = ct0 + ct1*x
    ``ct1``
    ``b_curv``  B_{y2 y2}(x) = -(1 - b_curv*x)  (only for n ≥ 3)
    """
    a0 = float(params.get("a0", -1.0))
    a2 = float(params.get("a2", 0.0))
    ct0 = float(params.get("ct0", 0.0))
    ct1 = float(params.get("ct1", 0.0))
    bc = float(params.get("b_curv", 0.0))
    m = n - 1
    B0 = _flat_B(n)

    def A(x, y):
        return a0 - a2 * x * x

    def dA(x, y):
        g = np.zeros(n)
        g[0] = -2.0 * a2 * x
        return g

    def B(x, y):
        M = B0.copy()
        M[1, 1] = -(1.0 - bc * x)
        return M

    def dB(x, y):
        D = np.zeros((n, m, m))
        D[0, 1, 1] = bc
        return D

    def C(x, y):
        v = np.zeros(m)
        v[0] = ct0 + ct1 * x
        return v

    def dC(x, y):
        D = np.zeros((n, m))
        D[0, 0] = ct1
        return D

    model = perturbed_slab(n, A, B, C, dA, dB, dC,
                           x_only=(ct0 == 0.0 and ct1 == 0.0),
                           params=dict(params))
    return model


def tabulated_model(n: int, x_grid, t_grid, A_tab, B_tab, C_tab) -> MetricModel:
    """Coefficients tabulated on an (x, t) grid, interpolated bicubically.

    ``A_tab`` has shape ``(nx, nt)``, ``B_tab`` ``(nx, nt, n-1, n-1)`` and
    ``C_tab`` ``(nx, nt, n-1)``.  Dependence on the torus coordinates is not
    supported by tabulation.
    """
    from scipy.interpolate import RectBivariateSpline

    m = n - 1
    x_grid = np.asarray(x_grid, float)
    t_grid = np.asarray(t_grid, float)
    sA = RectBivariateSpline(x_grid, t_grid, np.asarray(A_tab, float))
    B_tab = np.asarray(B_tab, float)
    C_tab = np.asarray(C_tab, float)
    sB = {(i, j): RectBivariateSpline(x_grid, t_grid, B_tab[:, :, i, j])
          for i in range(m) for j in range(i, m)}
    sC = [RectBivariateSpline(x_grid, t_grid, C_tab[:, :, i]) for i in range(m)]

    def ev(s, x, y, dx=0, dy=0):
        return float(s.ev(x, y[0], dx=dx, dy=dy))

    def A(x, y):
        return ev(sA, x, y)

    def dA(x, y):
        g = np.zeros(n)
        g[0] = ev(sA, x, y, dx=1)
        g[1] = ev(sA, x, y, dy=1)
        return g

    def B(x, y):
        M = np.empty((m, m))
        for (i, j), s in sB.items():
            M[i, j] = M[j, i] = ev(s, x, y)
        return M

    def dB(x, y):
        D = np.zeros((n, m, m))
        for (i, j), s in sB.items():
            D[0, i, j] = D[0, j, i] = ev(s, x, y, dx=1)
            D[1, i, j] = D[1, j, i] = ev(s, x, y, dy=1)
        return D

    def C(x, y):
        return np.array([ev(s, x, y) for s in sC])

    def dC(x, y):
        D = np.zeros((n, m))
        for i, s in enumerate(sC):
            D[0, i] = ev(s, x, y, dx=1)
            D[1, i] = ev(s, x, y, dy=1)
        return D

    return MetricModel(n=n, A=A, B=B, C=C, dA=dA, dB=dB, dC=dC,
                       family_tag="PerturbedSlab", params={"tabulated": True})


# ---------------------------------------------------------------------------
# Phase-space points
# ---------------------------------------------------------------------------

def _vec(v) -> np.ndarray:
    return np.atleast_1d(np.asarray(v, dtype=float)).copy()


@dataclass(frozen=True)
class CotangentPoint:
    """A covector ``xi dx + zeta·dy`` at the point ``(x, y)``."""

    x: float
    y: np.ndarray
    xi: float
    zeta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "xi", float(self.xi))
        object.__setattr__(self, "y", _vec(self.y))
        object.__setattr__(self, "zeta", _vec(self.zeta))
        if self.y.shape != self.zeta.shape:
            raise ValueError("y and zeta must have the same length")

    @classmethod
    def from_state(cls, z: np.ndarray) -> "CotangentPoint":
        z = np.asarray(z, float)
        n = z.size // 2
        return cls(z[0], z[1:n], z[n], z[n + 1:])

    def state(self) -> np.ndarray:
        """Flat state vector ``(x, y..., xi, zeta...)``."""
        return np.concatenate(([self.x], self.y, [self.xi], self.zeta))

    def momentum_norm(self) -> float:
        return float(math.sqrt(self.xi ** 2 + float(self.zeta @ self.zeta)))

    def __eq__(self, other):
        if not isinstance(other, CotangentPoint):
            return NotImplemented
        return bool(np.array_equal(self.state(), other.state()))

    __hash__ = None


@dataclass(frozen=True)
class BCotangentPoint:
    """A compressed covector ``(x, y, xib, zetab)`` with ``xib = x * xi``."""

    x: float
    y: np.ndarray
    xib: float
    zetab: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "xib", float(self.xib))
        object.__setattr__(self, "y", _vec(self.y))
        object.__setattr__(self, "zetab", _vec(self.zetab))

    def state(self) -> np.ndarray:
        return np.concatenate(([self.x], self.y, [self.xib], self.zetab))

    def __eq__(self, other):
        if not isinstance(other, BCotangentPoint):
            return NotImplemented
        return bool(np.array_equal(self.state(), other.state()))

    __hash__ = None


# ---------------------------------------------------------------------------
# Metric evaluation
# ---------------------------------------------------------------------------

def _assemble(model: MetricModel, x: float, y: np.ndarray) -> np.ndarray:
    n = model.n
    G = np.empty((n, n))
    G[0, 0] = model.A(x, y)
    Cv = np.asarray(model.C(x, y), dtype=float)
    G[0, 1:] = Cv
    G[1:, 0] = Cv
    Bm = np.asarray(model.B(x, y), dtype=float)
    G[1:, 1:] = 0.5 * (Bm + Bm.T)
    return G


def eval_dual_metric(model: MetricModel, x: float, y) -> np.ndarray:
    """The symmetric ``n × n`` dual metric Ĝ at ``(x, y)``."""
    if x < 0:
        raise DomainError(f"x = {x!r} lies outside the collar x >= 0")
    return _assemble(model, float(x), _vec(y))


def dual_metric_partials(model: MetricModel, x: float, y) -> np.ndarray:
    """``D[k] = ∂Ĝ/∂z_k`` stacked into an ``(n, n, n)`` array (no domain check)."""
    y = _vec(y)
    n = model.n
    D = np.empty((n, n, n))
    D[:, 0, 0] = model.grad_A(x, y)
    dC = model.grad_C(x, y)
    D[:, 0, 1:] = dC
    D[:, 1:, 0] = dC
    dB = model.grad_B(x, y)
    D[:, 1:, 1:] = 0.5 * (dB + np.transpose(dB, (0, 2, 1)))
    return D


def metric_function(model: MetricModel, q: CotangentPoint) -> float:
    """p(q) = Ĝ(q, q)."""
    G = eval_dual_metric(model, q.x, q.y)
    v = np.concatenate(([q.xi], q.zeta))
    return float(v @ G @ v)


def compress(q: CotangentPoint) -> BCotangentPoint:
    return BCotangentPoint(q.x, q.y, q.x * q.xi, q.zeta)


def decompress(b: BCotangentPoint, sign: int = 1,
               model: Optional[MetricModel] = None) -> CotangentPoint:
    """Inverse of :func:`compress` over the interior; at x=0 defers to the boundary rule."""
    if b.x > 0:
        return CotangentPoint(b.x, b.y, b.xib / b.x, b.zetab)
    if model is None:
        raise ValueError("a model is needed to decompress a boundary point")
    return decompress_boundary(model, b, sign)


def boundary_h(model: MetricModel, y, zeta) -> float:
    """h = ζ·B(0, y)ζ."""
    B0 = np.asarray(model.B(0.0, _vec(y)), dtype=float)
    z = _vec(zeta)
    return float(z @ B0 @ z)


def decompress_boundary(model: MetricModel, b: BCotangentPoint, sign: int) -> CotangentPoint:
    """Characteristic preimage of a boundary point: ξ = sign·sqrt(ζ̄·B(0,y)ζ̄)."""
    if b.x != 0.0:
        raise ValueError("decompress_boundary requires x = 0")
    if b.xib != 0.0:
        raise ValueError("decompress_boundary requires xib = 0")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    h = boundary_h(model, b.y, b.zetab)
    zz = float(b.zetab @ b.zetab)
    if h < 0:
        if zz > 0 and abs(h) / zz <= DEFAULT_TOL_H:
            h = 0.0
        else:
            raise NotInCharSet(f"zetab·B·zetab = {h!r} < 0")
    # A(0) ξ² + h = 0 with A(0) = -1 in normal form; use the model's A for safety.
    a0 = float(model.A(0.0, b.y))
    xi = sign * math.sqrt(h / -a0) if h > 0 else 0.0
    return CotangentPoint(0.0, b.y, xi, b.zetab)


# ---------------------------------------------------------------------------
# Indicial roots
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralParam:
    lam: complex
    n: int

    def __post_init__(self):
        lam = complex(self.lam)
        if not (math.isfinite(lam.real) and math.isfinite(lam.imag)):
            raise ValueError("lambda must be finite")
        object.__setattr__(self, "lam", lam)


@dataclass(frozen=True)
class IndicialData:
    s_minus: complex
    s_plus: complex
    difference: complex
    log_case: bool
    real_case: bool
    double_root: bool


def indicial_roots(s: SpectralParam) -> IndicialData:
    """Roots of s² - (n-1)s + λ with the principal square-root branch."""
    n = s.n
    lam = complex(s.lam)
    half = (n - 1) / 2.0
    root = cmath.sqrt(half * half - lam)
    sp = half + root
    sm = half - root
    diff = sp - sm
    near = round(diff.real)
    log_case = (abs(diff.imag) < LOG_CASE_TOL and abs(diff.real - near) < LOG_CASE_TOL
                and near >= 0)
    real_lam = abs(lam.imag) == 0.0
    real_case = real_lam and lam.real <= half * half
    double = real_lam and abs(diff) < LOG_CASE_TOL
    return IndicialData(sm, sp, diff, bool(log_case), bool(real_case), bool(double))


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

class PointClass(enum.Enum):
    HYPERBOLIC = "Hyperbolic"
    GLANCING = "Glancing"
    NOT_IN_CHAR_SET = "NotInCompressedCharSet"
    INTERIOR = "Interior"


def normalized_h(model: MetricModel, y, zetab) -> float:
    z = _vec(zetab)
    zz = float(z @ z)
    if zz == 0:
        raise ValueError("zetab must be nonzero at the boundary")
    return boundary_h(model, y, z) / zz


def classify(model: MetricModel, b: BCotangentPoint, tol_h: float = DEFAULT_TOL_H) -> PointClass:
    if b.x > 0:
        return PointClass.INTERIOR
    if b.x < 0:
        raise DomainError("x < 0")
    h = normalized_h(model, b.y, b.zetab)
    if h > tol_h:
        return PointClass.HYPERBOLIC
    if h >= -tol_h:
        return PointClass.GLANCING
    return PointClass.NOT_IN_CHAR_SET


@dataclass
class TimelikeReport:
    passed: bool
    max_violation: float
    worst_sample: Optional[np.ndarray]
    n_samples: int


def boundary_timelike_check(model: MetricModel, y_samples: Sequence) -> TimelikeReport:
    """Check A(0,y) < 0 and C(0,y) = 0 at each sample.

    The violation at a sample is ``max(A(0,y) + 1, |C(0,y)|_∞)`` when A is
    negative and ``A(0,y) + 1`` otherwise; the check passes when A < 0 and
    C vanishes to 1e-12 everywhere.
    """
    worst = 0.0
    worst_y = None
    passed = True
    count = 0
    for y in y_samples:
        y = _vec(y)
        count += 1
        a = float(model.A(0.0, y))
        c = float(np.max(np.abs(model.C(0.0, y)))) if model.n > 1 else 0.0
        viol = max(abs(a + 1.0), c)
        ok = a < 0 and c <= 1e-12
        if not ok:
            passed = False
        if viol > worst or (not ok and worst_y is None):
            worst = max(worst, viol)
            worst_y = y
    return TimelikeReport(passed, worst, worst_y, count)
