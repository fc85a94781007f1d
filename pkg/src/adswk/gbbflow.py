"""Bicharacteristic tracing with boundary reflection (GBB flow).

Interior pieces are integral curves of the Hamilton field of p = Ĝ(ζ, ζ).
At a boundary hit the compressed point (x=0, y, ξ̄=0, ζ̄) is classified:
hyperbolic hits reflect ξ → -ξ, glancing hits snap ξ to 0 and continue with
the interior flow.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from .geometry import (
    BCotangentPoint,
    CotangentPoint,
    MetricModel,
    PointClass,
    _assemble,
    classify,
    compress,
    decompress_boundary,
    dual_metric_partials,
)

__all__ = [
    "IntegratorConfig",
    "EventKind",
    "PathEvent",
    "Segment",
    "GBBPath",
    "Breakdown",
    "GlancingError",
    "hamilton_field",
    "integrate_segment",
    "reflect",
    "continue_glancing",
    "trace_gbb",
    "TestFunction",
    "basis_test_functions",
    "validate_gbb",
    "ValidationReport",
    "monotonicity_report",
    "MonotonicityReport",
    "mutate_no_flip",
]


class Breakdown(RuntimeError):
    """The integrator could not continue (step underflow, drift, chart exit below x=0)."""


class GlancingError(ValueError):
    """Raised when an operation requires a hyperbolic point but got a glancing one."""


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    x_event_tol: float = 1e-10
    glancing_tol: float = 1e-6
    max_events: int = 100
    s_span: Tuple[float, float] = (0.0, 10.0)
    x_max: float = 1.0
    t_max: Optional[float] = None
    sample_step: float = 0.01
    drift_factor: float = 1e3

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "max_step", "x_event_tol", "glancing_tol",
                     "sample_step", "x_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_events < 0:
            raise ValueError("max_events must be nonnegative")
        if not self.s_span[1] > self.s_span[0]:
            raise ValueError("s_span must be increasing")


class EventKind(enum.Enum):
    HYPERBOLIC_REFLECTION = "HyperbolicReflection"
    GLANCING_CONTACT = "GlancingContact"
    DOMAIN_EXIT = "DomainExit"
    BREAKDOWN = "Breakdown"
    SPAN_END = "SpanEnd"


@dataclass
class PathEvent:
    kind: EventKind
    s: float
    state_before: CotangentPoint
    state_after: CotangentPoint
    normalized_xi: float

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "s": self.s,
            "state_before": self.state_before.state().tolist(),
            "state_after": self.state_after.state().tolist(),
            "normalized_xi": self.normalized_xi,
        }


@dataclass
class Segment:
    s: np.ndarray            # sample parameters
    z: np.ndarray            # (len(s), 2n) states
    p: np.ndarray            # metric function along samples
    sol: object = None       # scipy dense output (OdeSolution) or None

    def __call__(self, s):
        if self.sol is None:
            return np.interp(s, self.s, self.z)
        return self.sol(s)


@dataclass
class GBBPath:
    model: MetricModel
    segments: List[Segment]
    events: List[PathEvent]
    p0_scale: float

    @property
    def n(self) -> int:
        return self.model.n

    def events_of(self, kind: EventKind) -> List[PathEvent]:
        return [e for e in self.events if e.kind == kind]

    def samples(self, dedupe: bool = True) -> Tuple[np.ndarray, np.ndarray]:
        """Concatenated (s, z) samples; duplicated junction points can be removed."""
        ss, zz = [], []
        for seg in self.segments:
            s, z = seg.s, seg.z
            if dedupe and ss and s.size and abs(s[0] - ss[-1][-1]) <= 1e-14 * max(1.0, abs(s[0])):
                s, z = s[1:], z[1:]
            ss.append(s)
            zz.append(z)
        if not ss:
            return np.zeros(0), np.zeros((0, 2 * self.n))
        return np.concatenate(ss), np.concatenate(zz)

    def compressed_samples(self) -> Tuple[np.ndarray, np.ndarray]:
        """(s, b) with b rows ``(x, y..., xib, zetab...)``; junctions merged."""
        s, z = self.samples(dedupe=True)
        b = z.copy()
        n = self.n
        b[:, n] = z[:, 0] * z[:, n]
        return s, b

    def p_drift(self) -> float:
        return max((float(np.max(np.abs(seg.p))) for seg in self.segments if seg.p.size),
                   default=0.0)

    def t_series(self) -> Tuple[np.ndarray, np.ndarray]:
        s, z = self.samples()
        return s, z[:, 1]

    def xib_series(self) -> Tuple[np.ndarray, np.ndarray]:
        s, b = self.compressed_samples()
        return s, b[:, self.n]

    def diagnostics(self) -> dict:
        return {
            "p_drift": self.p_drift(),
            "n_segments": len(self.segments),
            "n_events": len(self.events),
            "event_kinds": [e.kind.value for e in self.events],
        }


# ---------------------------------------------------------------------------
# Hamilton field
# ---------------------------------------------------------------------------

def _field(model: MetricModel, z: np.ndarray) -> np.ndarray:
    n = model.n
    x = z[0]
    y = z[1:n]
    mom = z[n:]
    G = _assemble(model, x, y)
    D = dual_metric_partials(model, x, y)
    out = np.empty(2 * n)
    out[:n] = 2.0 * (G @ mom)
    out[n:] = -np.einsum("kij,i,j->k", D, mom, mom)
    return out


def _p(model: MetricModel, z: np.ndarray) -> float:
    n = model.n
    G = _assemble(model, z[0], z[1:n])
    mom = z[n:]
    return float(mom @ G @ mom)


def hamilton_field(model: MetricModel, q: CotangentPoint) -> np.ndarray:
    """Hamilton vector field of p at q as a length-2n array (ż, ζ̇)."""
    return _field(model, q.state())


# ---------------------------------------------------------------------------
# Segment integration
# ---------------------------------------------------------------------------

def _normalized_xi(q: CotangentPoint) -> float:
    nrm = q.momentum_norm()
    return abs(q.xi) / nrm if nrm > 0 else 0.0


def _sample(sol, s0: float, s1: float, step: float) -> np.ndarray:
    k = max(1, int(math.ceil((s1 - s0) / step - 1e-9)))
    return np.linspace(s0, s1, k + 1)


def integrate_segment(model: MetricModel, q0: CotangentPoint, cfg: IntegratorConfig,
                      s0: Optional[float] = None, s_end: Optional[float] = None):
    """Integrate from q0 until a boundary hit, chart exit, time stop or span end.

    Returns ``(segment, event)``.  For a boundary hit the event's
    ``state_before`` is the state projected to x = 0 by one Newton step and
    its ``state_after`` equals ``state_before`` (the caller applies the
    reflection law).
    """
    n = model.n
    s0 = cfg.s_span[0] if s0 is None else s0
    s_end = cfg.s_span[1] if s_end is None else s_end
    z0 = q0.state()
    p_scale = max(float(np.dot(z0[n:], z0[n:])), 1e-300)
    fun = lambda s, z: _field(model, z)

    def hit(s, z):
        return z[0] - cfg.x_event_tol
    hit.terminal = True
    hit.direction = -1

    def exit_(s, z):
        return z[0] - cfg.x_max
    exit_.terminal = True
    exit_.direction = 1

    def below(s, z):
        return z[0] + 10.0 * cfg.x_event_tol
    below.terminal = True
    below.direction = -1

    events = [hit, exit_, below]
    if cfg.t_max is not None:
        def tstop(s, z):
            return z[1] - cfg.t_max
        tstop.terminal = True
        tstop.direction = 1
        events.append(tstop)

    sol = solve_ivp(fun, (s0, s_end), z0, method="DOP853", rtol=cfg.rel_tol,
                    atol=cfg.abs_tol, max_step=cfg.max_step, dense_output=True,
                    events=events)
    if sol.status == -1:
        raise Breakdown(f"integration failed: {sol.message}")

    kind = EventKind.SPAN_END
    s_stop = float(sol.t[-1])
    z_stop = sol.y[:, -1].copy()
    for idx, ev_kind in enumerate((EventKind.HYPERBOLIC_REFLECTION, EventKind.DOMAIN_EXIT,
                                   EventKind.BREAKDOWN, EventKind.SPAN_END)):
        if idx < len(sol.t_events) and sol.t_events[idx].size:
            kind = ev_kind
            s_stop = float(sol.t_events[idx][0])
            z_stop = sol.y_events[idx][0].copy()
            break

    if kind == EventKind.HYPERBOLIC_REFLECTION:
        # One Newton step on x(s) to land on x = 0.
        f = _field(model, z_stop)
        if f[0] == 0.0:
            raise Breakdown("boundary approach with vanishing normal velocity")
        ds = -z_stop[0] / f[0]
        z_stop = z_stop + ds * f
        z_stop[0] = 0.0
        s_stop = s_stop + ds

    ss = _sample(sol.sol, s0, s_stop, cfg.sample_step)
    zs = sol.sol(ss).T.copy() if ss.size > 1 else z0[None, :].copy()
    zs[0] = z0
    zs[-1] = z_stop
    ps = np.array([_p(model, z) for z in zs])
    seg = Segment(ss, zs, ps, sol.sol)

    drift = float(np.max(np.abs(ps - ps[0]))) if ps.size else 0.0
    if drift > cfg.drift_factor * cfg.rel_tol * p_scale + 1e-14 * p_scale:
        raise Breakdown(f"p drift {drift:.3e} exceeds tolerance")
    if kind == EventKind.BREAKDOWN:
        raise Breakdown(f"ray left the chart through x < 0 at s = {s_stop:.6g}")

    q_stop = CotangentPoint.from_state(z_stop)
    if kind == EventKind.HYPERBOLIC_REFLECTION:
        # Caller decides between reflection and glancing from the normalized xi.
        ev = PathEvent(kind, s_stop, q_stop, q_stop, _normalized_xi(q_stop))
    else:
        ev = PathEvent(kind, s_stop, q_stop, q_stop, _normalized_xi(q_stop))
    return seg, ev


# ---------------------------------------------------------------------------
# Boundary laws
# ---------------------------------------------------------------------------

def reflect(model: MetricModel, hit: CotangentPoint, tol_h: float = 1e-9) -> CotangentPoint:
    """Hyperbolic reflection ξ → -ξ at x = 0."""
    b = BCotangentPoint(0.0, hit.y, 0.0, hit.zeta)
    cls = classify(model, b, tol_h)
    if cls == PointClass.GLANCING:
        raise GlancingError("reflect called at a glancing point")
    if cls == PointClass.NOT_IN_CHAR_SET:
        raise ValueError("hit is not in the compressed characteristic set")
    return CotangentPoint(0.0, hit.y, -hit.xi, hit.zeta)


def continue_glancing(model: MetricModel, hit: CotangentPoint,
                      glancing_tol: float = 1e-6) -> CotangentPoint:
    """Snap ξ to the unique characteristic value 0 at a glancing point."""
    b = BCotangentPoint(0.0, hit.y, 0.0, hit.zeta)
    zz = float(hit.zeta @ hit.zeta)
    h = float(hit.zeta @ np.asarray(model.B(0.0, hit.y)) @ hit.zeta)
    if h < -max(glancing_tol ** 2, 1e-9) * zz:
        raise ValueError("glancing continuation requested off the characteristic set")
    q = decompress_boundary(model, b, 1) if h <= 0 else CotangentPoint(0.0, hit.y, 0.0, hit.zeta)
    return CotangentPoint(0.0, q.y, 0.0, q.zeta)


def trace_gbb(model: MetricModel, start: CotangentPoint,
              cfg: IntegratorConfig = IntegratorConfig(),
              reflection: Optional[Callable[[MetricModel, CotangentPoint], CotangentPoint]] = None
              ) -> GBBPath:
    """Alternate interior integration with the boundary laws until a stop condition.

    ``reflection`` replaces the hyperbolic reflection law (default :func:`reflect`);
    it exists for negative controls.
    """
    reflection = reflection or reflect
    n = model.n
    p0 = _p(model, start.state())
    scale = start.momentum_norm() ** 2
    if abs(p0) > 1e-8 * max(scale, 1e-300):
        raise ValueError(f"start is not null: p = {p0!r}")
    segments: List[Segment] = []
    events: List[PathEvent] = []
    s = cfg.s_span[0]
    q = start
    if start.x < 0:
        raise ValueError("start must satisfy x >= 0")
    if start.x == 0.0:
        nx = _normalized_xi(start)
        if nx <= cfg.glancing_tol:
            q_after = continue_glancing(model, start, cfg.glancing_tol)
            events.append(PathEvent(EventKind.GLANCING_CONTACT, s, start, q_after, nx))
            q = q_after
    n_bounce = 0
    while s < cfg.s_span[1]:
        seg, ev = integrate_segment(model, q, cfg, s0=s, s_end=cfg.s_span[1])
        segments.append(seg)
        s = ev.s
        if ev.kind != EventKind.HYPERBOLIC_REFLECTION:
            if ev.kind == EventKind.DOMAIN_EXIT:
                events.append(ev)
            break
        hit = ev.state_before
        if ev.normalized_xi <= cfg.glancing_tol:
            after = continue_glancing(model, hit, cfg.glancing_tol)
            events.append(PathEvent(EventKind.GLANCING_CONTACT, s, hit, after, ev.normalized_xi))
        else:
            after = reflection(model, hit)
            events.append(PathEvent(EventKind.HYPERBOLIC_REFLECTION, s, hit, after,
                                    ev.normalized_xi))
        n_bounce += 1
        q = after
        if n_bounce >= cfg.max_events:
            break
    return GBBPath(model, segments, events, scale)


# ---------------------------------------------------------------------------
# Validation against the definition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TestFunction:
    """A linear function on compressed phase space ``f = c · (x, y, xib, zetab)``."""

    name: str
    coeffs: np.ndarray

    __test__ = False  # keep pytest from collecting this class

    def value(self, b: np.ndarray) -> np.ndarray:
        return b @ self.coeffs

    def grad(self, b: np.ndarray) -> np.ndarray:
        return np.broadcast_to(self.coeffs, b.shape)


def basis_test_functions(n: int) -> List[TestFunction]:
    """{t, y_j, ζ̄_j, ±ξ̄} as linear test functions."""
    out = []
    dim = 2 * n

    def unit(i, sgn=1.0):
        c = np.zeros(dim)
        c[i] = sgn
        return c

    out.append(TestFunction("t", unit(1)))
    for j in range(2, n):
        out.append(TestFunction(f"y{j}", unit(j)))
    for j in range(n - 1):
        out.append(TestFunction(f"zetab{j + 1}", unit(n + 1 + j)))
    out.append(TestFunction("+xib", unit(n)))
    out.append(TestFunction("-xib", unit(n, -1.0)))
    return out


def _Hpf(model: MetricModel, z: np.ndarray, tf: TestFunction) -> float:
    """H_p(π*f) at a full phase-space state z via the chain rule."""
    n = model.n
    v = _field(model, z)
    c = tf.coeffs
    x, xi = z[0], z[n]
    xdot, xidot = v[0], v[n]
    total = c[0] * xdot + float(c[1:n] @ v[1:n])
    total += c[n] * (xdot * xi + x * xidot)
    total += float(c[n + 1:] @ v[n + 1:])
    return float(total)


@dataclass
class ValidationReport:
    passed: bool
    worst_margin: float
    worst_function: str
    worst_s: float
    domain_ok: bool
    min_x: float
    max_abs_p: float
    margins: dict
    slack: float


def validate_gbb(path_or_samples, test_functions: Optional[Sequence[TestFunction]] = None,
                 tol: float = 1e-6, window: int = 2,
                 model: Optional[MetricModel] = None) -> ValidationReport:
    """Check the liminf inequality of the GBB definition on sampled data.

    ``path_or_samples`` is a :class:`GBBPath` or a tuple ``(model, s, b)``
    of compressed samples.  For every sample s₀ the one-sided difference
    quotients over ``window`` neighbours on each side are compared with the
    infimum of H_p(π*f) over the characteristic preimages of γ(s₀).  The
    allowed deficit is ``tol + slack`` where ``slack`` estimates the O(step)
    error from observed second differences.
    """
    if isinstance(path_or_samples, GBBPath):
        model = path_or_samples.model
        s, b = path_or_samples.compressed_samples()
    else:
        model, s, b = path_or_samples
    n = model.n
    if test_functions is None:
        test_functions = basis_test_functions(n)
    if s.size < 3:
        raise ValueError("path has too few samples")

    # Preimage states: interior ξ = ξ̄/x; boundary both signs ±sqrt(h).
    pre = []
    domain_ok = True
    max_p = 0.0
    for row in b:
        x = row[0]
        if x < -1e-9:
            domain_ok = False
        if x > 1e-12:
            z = row.copy()
            z[n] = row[n] / x
            pre.append([z])
        else:
            y = row[1:n]
            zeta = row[n + 1:]
            h = float(zeta @ np.asarray(model.B(0.0, y)) @ zeta)
            a0 = -float(model.A(0.0, y))
            xi = math.sqrt(max(h, 0.0) / a0)
            z1 = row.copy(); z1[0] = 0.0; z1[n] = xi
            z2 = z1.copy(); z2[n] = -xi
            pre.append([z1, z2] if xi > 0 else [z1])
            if abs(row[n]) > 1e-9 * max(1.0, float(np.linalg.norm(zeta))):
                domain_ok = False
        zz = pre[-1][0]
        pv = abs(_p(model, zz))
        scale = float(zz[n:] @ zz[n:])
        max_p = max(max_p, pv / max(scale, 1e-300))
    if max_p > 1e-6:
        domain_ok = False

    margins = {}
    worst = (math.inf, "", float("nan"))
    slack_max = 0.0
    m = s.size
    for tf in test_functions:
        fv = tf.value(b)
        # Slack from second differences (curvature of f∘γ).
        d2 = np.zeros(m)
        if m >= 3:
            h1 = np.diff(s)
            q = np.diff(fv) / h1
            curv = np.abs(np.diff(q)) / (0.5 * (h1[1:] + h1[:-1]))
            d2[1:-1] = curv
            d2[0], d2[-1] = curv[0], curv[-1]
        fmin = math.inf
        for i in range(m):
            lo, hi = max(0, i - window), min(m, i + window + 1)
            quot = [(fv[j] - fv[i]) / (s[j] - s[i]) for j in range(lo, hi) if j != i and s[j] != s[i]]
            if not quot:
                continue
            inf_h = min(_Hpf(model, z, tf) for z in pre[i])
            span = max(abs(s[j] - s[i]) for j in range(lo, hi))
            local = float(np.max(d2[lo:hi]))
            slack = span * min(local, 1e6)
            slack_max = max(slack_max, slack)
            margin = min(quot) - inf_h + slack
            if margin < fmin:
                fmin = margin
            if margin < worst[0]:
                worst = (margin, tf.name, float(s[i]))
        margins[tf.name] = fmin
    passed = domain_ok and worst[0] >= -tol
    return ValidationReport(bool(passed), float(worst[0]), worst[1], worst[2], domain_ok,
                            float(np.min(b[:, 0])), float(max_p), margins, float(slack_max))


def mutate_no_flip(path: GBBPath, mode: str = "straight") -> Tuple[MetricModel, np.ndarray, np.ndarray]:
    """Negative control: a path whose reflections do not flip ξ.

    ``mode="straight"`` continues through the boundary, i.e. after each
    hyperbolic event the remaining samples are mapped ``(x, ξ) → (-x, -ξ)``
    (for the flat slab this is exactly the unreflected straight line).
    ``mode="xi"`` keeps the position but un-flips ξ, so ξ̄ changes sign.
    Returns ``(model, s, b)`` compressed samples usable by :func:`validate_gbb`.
    """
    n = path.n
    s_list, b_list = [], []
    parity = 1.0
    for k, seg in enumerate(path.segments):
        z = seg.z.copy()
        if parity < 0:
            if mode == "straight":
                z[:, 0] = -z[:, 0]
                z[:, n] = -z[:, n]
            elif mode == "xi":
                z[:, n] = -z[:, n]
            else:
                raise ValueError(mode)
        b = z.copy()
        b[:, n] = z[:, 0] * z[:, n]
        s = seg.s
        if s_list and s.size and abs(s[0] - s_list[-1][-1]) <= 1e-14 * max(1, abs(s[0])):
            s, b = s[1:], b[1:]
        s_list.append(s)
        b_list.append(b)
        # Events that end this segment
        ends = [e for e in path.events if e.kind == EventKind.HYPERBOLIC_REFLECTION
                and abs(e.s - seg.s[-1]) <= 1e-12 * max(1, abs(e.s))]
        if ends:
            parity = -parity
    return path.model, np.concatenate(s_list), np.concatenate(b_list)


@dataclass
class MonotonicityReport:
    t_monotone: bool
    direction: int
    min_abs_dtds: float
    xib_downward_at_events: bool
    n_events_checked: int


def monotonicity_report(path: GBBPath, time_coordinate: int = 1) -> MonotonicityReport:
    """Strict monotonicity of t∘γ and downward ξ̄ crossings at hyperbolic hits."""
    n = path.n
    s, z = path.samples()
    dtds = np.array([_field(path.model, zz)[time_coordinate] for zz in z])
    sign = int(np.sign(dtds[0])) if dtds.size else 0
    t = z[:, time_coordinate]
    dt = np.diff(t)
    mono = bool(sign != 0 and np.all(np.sign(dtds) == sign) and np.all(dt * sign > 0))
    ok = True
    checked = 0
    for e in path.events_of(EventKind.HYPERBOLIC_REFLECTION):
        # ξ̄ derivative at x=0 on either side is ẋ ξ = 2 A ξ² < 0;
        # check the nearest samples on each side too.
        i = int(np.argmin(np.abs(s - e.s)))
        xib = z[:, 0] * z[:, n]
        before = xib[max(i - 1, 0)]
        after = xib[min(i + 1, len(xib) - 1)]
        fb = _field(path.model, e.state_before.state())
        fa = _field(path.model, e.state_after.state())
        d_before = fb[0] * e.state_before.xi
        d_after = fa[0] * e.state_after.xi
        checked += 1
        if not (before > 0 and after < 0 and d_before < 0 and d_after < 0):
            ok = False
    return MonotonicityReport(mono, sign, float(np.min(np.abs(dtds))) if dtds.size else 0.0,
                              ok, checked)
