"""Horizontal foliations of C^{1,1} surfaces near regular points.

Near a regular point the surface is written as a graph over the coordinate
with dominant normal component; horizontal curves on the surface then solve a
scalar ODE in the remaining two coordinates (for a graph z = F(x, y):
dy/dx = (y + 2 F_x)/(x - 2 F_y), and the analogous forms for the other two
orientations). The chart G(u, v) follows the horizontal curve through a
transversal offset v for a driving-coordinate offset u. Charts embed into R^4
by (u, v) -> (lambda u, kappa^(1/2) Phi(v)).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import SampledCurve, as_points
from .snowflake import SnowflakeCurve, build_snowflake_line

__all__ = [
    "GraphSurface",
    "ImplicitSurface",
    "plane_surface",
    "torus_surface",
    "sphere_surface",
    "CharacteristicPointError",
    "ShrinkEpsilonError",
    "ShrinkIntervalError",
    "horizontal_direction",
    "FoliationChart",
    "build_chart",
    "embed_regular_chart",
    "CurveSegment",
    "decompose_curve",
    "embed_vertical_arc",
]

CHARACTERISTIC_ANGLE = 1e-6
ODE_STEPS = 512


class CharacteristicPointError(ValueError):
    """The base point is characteristic; no horizontal foliation exists."""


class ShrinkEpsilonError(RuntimeError):
    """The ODE denominator vanishes inside the requested chart domain."""

    def __init__(self, message, suggested_epsilon):
        super().__init__(message)
        self.suggested_epsilon = suggested_epsilon


class ShrinkIntervalError(RuntimeError):
    """The vertical-arc ratio condition fails on the requested interval."""


@dataclass(frozen=True)
class GraphSurface:
    """Surface z = f(x, y) with partial derivatives fx, fy."""

    f: Callable
    fx: Callable
    fy: Callable

    def contains(self, p, tol=1e-9):
        p = as_points(p)
        return np.abs(p[..., 2] - self.f(p[..., 0], p[..., 1])) <= tol

    def normal(self, p):
        p = as_points(p)
        x, y = p[..., 0], p[..., 1]
        n = np.stack([-self.fx(x, y), -self.fy(x, y), np.ones_like(x)], axis=-1)
        return n


@dataclass(frozen=True)
class ImplicitSurface:
    """Level set h(x, y, z) = 0 with gradient grad(x, y, z) -> (..., 3)."""

    h: Callable
    grad: Callable

    def contains(self, p, tol=1e-9):
        p = as_points(p)
        return np.abs(self.h(p[..., 0], p[..., 1], p[..., 2])) <= tol

    def normal(self, p):
        p = as_points(p)
        return np.asarray(self.grad(p[..., 0], p[..., 1], p[..., 2]))


def plane_surface(a: float, b: float, c: float) -> GraphSurface:
    """The plane z = a x + b y + c as a graph surface."""
    return GraphSurface(
        f=lambda x, y: a * x + b * y + c,
        fx=lambda x, y: a * np.ones_like(np.asarray(x, float)),
        fy=lambda x, y: b * np.ones_like(np.asarray(x, float)),
    )


def torus_surface(r: float, big_r: float) -> ImplicitSurface:
    """Torus (R - sqrt(x^2+y^2))^2 + z^2 = r^2; fully regular for 0 < r < R."""
    if not (0 < r < big_r):
        raise ValueError("need 0 < r < R")

    def h(x, y, z):
        rho = np.hypot(x, y)
        return (big_r - rho) ** 2 + z ** 2 - r ** 2

    def grad(x, y, z):
        x, y, z = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float),
                                      np.asarray(z, float))
        rho = np.hypot(x, y)
        fac = -2.0 * (big_r - rho) / np.where(rho == 0, 1.0, rho)
        return np.stack([fac * x, fac * y, 2.0 * z], axis=-1)

    return ImplicitSurface(h, grad)


def sphere_surface(radius: float = 1.0) -> ImplicitSurface:
    def h(x, y, z):
        return x * x + y * y + z * z - radius * radius

    def grad(x, y, z):
        x, y, z = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float),
                                      np.asarray(z, float))
        return np.stack([2 * x, 2 * y, 2 * z], axis=-1)

    return ImplicitSurface(h, grad)


def _horizontal_normal(p):
    """Normal of the horizontal plane H_p: (y/2, -x/2, 1)."""
    p = as_points(p)
    return np.stack([0.5 * p[..., 1], -0.5 * p[..., 0], np.ones_like(p[..., 0])],
                    axis=-1)


def horizontal_direction(surface, p, orient=None, tol=1e-9,
                         angle_tol=CHARACTERISTIC_ANGLE):
    """Unit vector spanning T_pM intersect H_p, or None at characteristic points.

    If `orient` is given, the sign is chosen to have non-negative dot product
    with it (for continuity along a queried path).
    """
    p = as_points(p)
    if not bool(np.all(surface.contains(p, tol))):
        raise ValueError("point does not lie on the surface")
    nu = surface.normal(p)
    nh = _horizontal_normal(p)
    cross = np.cross(nu, nh)
    sin_angle = (np.linalg.norm(cross, axis=-1)
                 / (np.linalg.norm(nu, axis=-1) * np.linalg.norm(nh, axis=-1)))
    if np.any(sin_angle < angle_tol):
        if p.ndim == 1 or np.all(sin_angle < angle_tol):
            return None
        raise ValueError("mixed characteristic/regular batch")
    d = cross / np.linalg.norm(cross, axis=-1, keepdims=True)
    if orient is not None:
        flip = np.sum(d * np.asarray(orient, float), axis=-1) < 0
        d = np.where(np.expand_dims(flip, -1), -d, d)
    else:
        # deterministic sign: largest-magnitude component made positive
        dd = np.atleast_2d(d)
        lead = np.argmax(np.abs(dd), axis=-1)
        sign = np.take_along_axis(dd, lead[:, None], axis=-1)
        dd = np.where(sign < 0, -dd, dd)
        d = dd.reshape(d.shape)
    return d


# ---------------------------------------------------------------------------
# chart construction


def _horizontal_tangent(surface, pts):
    """Unoriented horizontal tangent field on the surface.

    From the two linear constraints <normal, tau> = 0 and
    tau_z = (x tau_y - y tau_x)/2:
        tau_x = n_y + (x/2) n_z,   tau_y = -n_x + (y/2) n_z.
    Vanishes exactly at characteristic points.
    """
    n = np.asarray(surface.normal(pts), float)
    x = pts[..., 0]
    y = pts[..., 1]
    tx = n[..., 1] + 0.5 * x * n[..., 2]
    ty = -n[..., 0] + 0.5 * y * n[..., 2]
    tz = 0.5 * (x * ty - y * tx)
    return np.stack([tx, ty, tz], axis=-1)


def _rk4_curve(surface, p0_batch, axis, target, steps):
    """Integrate horizontal curves, parameterized by coordinate `axis`,
    from the batch of on-surface points to coordinate value `target`.

    Returns (grid, dense) with dense of shape (steps+1, batch, 3).
    """
    p = np.array(p0_batch, dtype=float)
    a0 = p[0, axis]
    grid = np.linspace(a0, target, steps + 1)
    h = (target - a0) / steps
    out = np.empty((steps + 1,) + p.shape)
    out[0] = p

    def rhs(q):
        tau = _horizontal_tangent(surface, q)
        d = tau[..., axis]
        if np.any(np.abs(d) < 1e-14):
            raise _DenominatorVanished()
        return tau / d[..., None]

    for k in range(steps):
        k1 = rhs(p)
        k2 = rhs(p + 0.5 * h * k1)
        k3 = rhs(p + 0.5 * h * k2)
        k4 = rhs(p + h * k3)
        p = p + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out[k + 1] = p
    return grid, out


class _DenominatorVanished(Exception):
    pass


_AXIS = {"x": 0, "y": 1, "z": 2}
_NAME = {v: k for k, v in _AXIS.items()}


@dataclass
class FoliationChart:
    """Chart G(u, v) whose u-lines are horizontal curves on the surface.

    u offsets the driving coordinate, v the transversal coordinate of the
    base point; the remaining (graph) coordinate is solved on-surface.
    """

    surface: object
    p0: np.ndarray
    epsilon: float
    orientation: str
    driving: str
    transversal: str
    kappa: float
    lam: float
    l_chart: float
    ode_error: float
    surface_drift: float

    def _base_points(self, v):
        """On-surface points at driving offset 0 and transversal offset v."""
        v = np.atleast_1d(np.asarray(v, float))
        pts = np.tile(self.p0, (v.size, 1))
        pts[:, _AXIS[self.transversal]] += v
        ax = _AXIS[self.orientation]
        for _ in range(80):
            if isinstance(self.surface, GraphSurface):
                pts[:, 2] = self.surface.f(pts[:, 0], pts[:, 1])
                break
            res = self.surface.h(pts[:, 0], pts[:, 1], pts[:, 2])
            g = np.asarray(self.surface.normal(pts))[:, ax]
            pts[:, ax] -= res / g
            if np.max(np.abs(res)) < 1e-14:
                break
        return pts

    def g(self, u, v) -> np.ndarray:
        u = np.atleast_1d(np.asarray(u, float))
        v = np.atleast_1d(np.asarray(v, float))
        if u.shape != v.shape:
            u, v = np.broadcast_arrays(u, v)
        shape = u.shape
        u = u.ravel()
        v = v.ravel()
        base = self._base_points(v)
        out = np.empty((u.size, 3))
        ax = _AXIS[self.driving]
        steps = max(8, int(ODE_STEPS * min(np.max(np.abs(u)) / self.epsilon, 1.0)))
        for sign in (-1.0, 1.0):
            m = (u < 0) if sign < 0 else (u >= 0)
            if not m.any():
                continue
            a0 = self.p0[ax]
            reach = float(np.max(np.abs(u[m])))
            grid, dense = _rk4_curve(self.surface, base[m], ax,
                                     a0 + sign * max(reach, 1e-12), steps)
            pos = np.interp(sign * u[m], sign * (grid - a0),
                            np.arange(grid.size, dtype=float))
            i0 = np.clip(pos.astype(int), 0, grid.size - 2)
            w = (pos - i0)[:, None]
            cols = np.arange(i0.size)
            out[m] = dense[i0, cols] * (1 - w) + dense[i0 + 1, cols] * w
        return out.reshape(shape + (3,))

    def u_line(self, v: float, n: int = ODE_STEPS) -> SampledCurve:
        """The horizontal u-line through transversal offset v."""
        base = self._base_points(np.array([v]))
        ax = _AXIS[self.driving]
        a0 = self.p0[ax]
        gm, dm = _rk4_curve(self.surface, base, ax, a0 - self.epsilon, n)
        gp, dp = _rk4_curve(self.surface, base, ax, a0 + self.epsilon, n)
        a = np.concatenate([gm[::-1], gp[1:]])
        pts = np.concatenate([dm[::-1, 0], dp[1:, 0]], axis=0)
        order = 1.0 if a[-1] > a[0] else -1.0
        return SampledCurve(order * (a - a0), pts)

    def constants_at_step(self, h: float) -> tuple[float, float]:
        """(kappa, lambda) by central differences with step h at the center."""
        gm = self.g(np.array([-h, h, 0.0, 0.0]), np.array([0.0, 0.0, -h, h]))
        du = (gm[1] - gm[0]) / (2 * h)
        dv = (gm[3] - gm[2]) / (2 * h)
        p = self._base_points(np.array([0.0]))[0]
        kappa = abs(2.0 * dv[2] + p[1] * dv[0] - p[0] * dv[1])
        lam = abs(du[0]) + abs(du[1])
        return float(kappa), float(lam)


def build_chart(surface, p0, epsilon: float, steps: int = ODE_STEPS,
                v_count: int = 17, tol: float = 1e-9) -> FoliationChart:
    """Foliation chart at a regular point; see module docstring.

    Raises CharacteristicPointError at characteristic p0 and
    ShrinkEpsilonError when the horizontal field's driving component
    degenerates inside the domain.
    """
    p0 = as_points(p0)
    if horizontal_direction(surface, p0, tol=max(tol, 1e-8)) is None:
        raise CharacteristicPointError("base point is characteristic")

    if isinstance(surface, GraphSurface):
        orientation = "z"
    else:
        nu = np.abs(np.asarray(surface.normal(p0), float))
        orientation = _NAME[int(np.argmax(nu))]
    tau0 = _horizontal_tangent(surface, p0[None, :])[0]
    cand = [i for i in range(3) if _NAME[i] != orientation]
    driving = _NAME[max(cand, key=lambda i: abs(tau0[i]))]
    transversal = _NAME[[i for i in cand if _NAME[i] != driving][0]]

    chart = FoliationChart(surface=surface, p0=p0, epsilon=float(epsilon),
                           orientation=orientation, driving=driving,
                           transversal=transversal, kappa=0.0, lam=0.0,
                           l_chart=0.0, ode_error=0.0, surface_drift=0.0)

    # probe the domain: dense trajectories for the v-grid, both directions
    ax = _AXIS[driving]
    v_grid = np.linspace(-epsilon, epsilon, v_count)
    try:
        base = chart._base_points(v_grid)
        drift = 0.0
        for sign in (-1.0, 1.0):
            grid, dense = _rk4_curve(surface, base, ax,
                                     p0[ax] + sign * epsilon, steps)
            tau = _horizontal_tangent(surface, dense.reshape(-1, 3))
            rel = np.abs(tau[:, ax]) / np.linalg.norm(tau, axis=1)
            if np.min(rel) < 1e-6:
                raise _DenominatorVanished()
            # transversal collapse: u-lines converging inside the domain
            # (the foliation degenerates toward a characteristic point)
            spread = np.linalg.norm(dense[:, -1, :] - dense[:, 0, :], axis=1)
            if np.min(spread) < 1e-3 * spread[0]:
                bad = int(np.argmax(spread < 1e-3 * spread[0]))
                frac = abs(grid[bad] - grid[0]) / max(epsilon, 1e-300)
                raise _DenominatorVanished(0.5 * float(epsilon) * max(frac, 1e-3))
            if isinstance(surface, GraphSurface):
                resid = dense[..., 2] - surface.f(dense[..., 0], dense[..., 1])
            else:
                resid = surface.h(dense[..., 0], dense[..., 1], dense[..., 2])
            drift = max(drift, float(np.max(np.abs(resid))))
    except _DenominatorVanished as exc:
        suggestion = exc.args[0] if exc.args else 0.5 * float(epsilon)
        raise ShrinkEpsilonError(
            "horizontal field degenerates inside the chart domain",
            suggested_epsilon=suggestion) from None
    chart.surface_drift = drift

    _, coarse = _rk4_curve(surface, base[:1], ax, p0[ax] + epsilon, steps)
    _, fine = _rk4_curve(surface, base[:1], ax, p0[ax] + epsilon, 2 * steps)
    chart.ode_error = float(np.linalg.norm(coarse[-1, 0] - fine[-1, 0]) / 15.0)

    kappa, lam = chart.constants_at_step(epsilon / 256.0)
    if not (kappa > 0 and lam > 0):
        raise CharacteristicPointError("degenerate chart constants at p0")
    chart.kappa = kappa
    chart.lam = lam

    uu = np.linspace(-epsilon, epsilon, 13)
    vv = np.linspace(-epsilon, epsilon, 13)
    um, vm = np.meshgrid(uu, vv)
    pts = chart.g(um.ravel(), vm.ravel())
    chart.l_chart = _grid_bilipschitz(um.ravel(), vm.ravel(), pts)
    return chart


def _grid_bilipschitz(u, v, pts) -> float:
    params = np.stack([u, v], axis=1)
    dpar = np.linalg.norm(params[:, None, :] - params[None, :, :], axis=-1)
    dpt = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    m = dpar > 0
    ratio = dpt[m] / dpar[m]
    return float(max(ratio.max(), 1.0 / ratio.min()))


def embed_regular_chart(chart: FoliationChart,
                        snowflake: SnowflakeCurve | None = None):
    """Map (u, v) -> (lambda u, kappa^(1/2) Phi(v)) in R^4."""
    phi = snowflake if snowflake is not None else build_snowflake_line(12)
    lam = chart.lam
    root_kappa = np.sqrt(chart.kappa)

    def emb(u, v):
        u = np.atleast_1d(np.asarray(u, float))
        v = np.atleast_1d(np.asarray(v, float))
        out = np.empty((u.size, 4))
        out[:, 0] = lam * u
        out[:, 1:] = root_kappa * phi(v)
        return out

    return emb


# ---------------------------------------------------------------------------
# unit-speed curve decomposition


@dataclass(frozen=True)
class CurveSegment:
    """A classified parameter interval of a unit-speed curve."""

    t1: float
    t2: float
    tag: str  # "vertical" | "horizontal"
    lambda_local: float = 0.0


def _derivatives(curve: SampledCurve):
    t = curve.t
    p = curve.points
    dt = t[2:] - t[:-2]
    d = (p[2:] - p[:-2]) / dt[:, None]
    return t[1:-1], p[1:-1], d


def decompose_curve(curve: SampledCurve, m_bound: float,
                    speed_tol: float = 1e-6) -> list[CurveSegment]:
    """Cover the parameter range by vertical/horizontal segments.

    Vertical: |x'|^2 + |y'|^2 <= eps0 = (4 M)^-2 throughout (and there
    |2z' + x'y - y'x| >= 1); horizontal: |x'|^2 + |y'|^2 >= eps0/2.
    """
    t, p, d = _derivatives(curve)
    speed = np.linalg.norm(d, axis=1)
    if np.max(np.abs(speed - 1.0)) > max(speed_tol, 50.0 * _step_sq(curve)):
        raise ValueError("curve is not unit-speed within tolerance")
    if m_bound < max(1.0, np.max(np.abs(p[:, 0])), np.max(np.abs(p[:, 1]))):
        raise ValueError("M must dominate 1 and sup|x|, sup|y|")
    eps0 = (4.0 * m_bound) ** -2
    s2 = d[:, 0] ** 2 + d[:, 1] ** 2
    must_h = s2 > eps0
    must_v = s2 < 0.5 * eps0
    tags = []
    cur = "vertical" if not must_h[0] else "horizontal"
    for i in range(t.size):
        if cur == "vertical" and must_h[i]:
            cur = "horizontal"
        elif cur == "horizontal" and must_v[i]:
            cur = "vertical"
        tags.append(cur)
    segments = []
    start = 0
    for i in range(1, t.size + 1):
        if i == t.size or tags[i] != tags[start]:
            t1 = curve.t[0] if start == 0 else t[start]
            t2 = curve.t[-1] if i == t.size else t[i - 1]
            tag = tags[start]
            lam = 0.0
            if tag == "vertical":
                mid = (start + i - 1) // 2
                lam = np.sqrt(abs(
                    2.0 * d[mid, 2] + d[mid, 0] * p[mid, 1] - d[mid, 1] * p[mid, 0]))
            segments.append(CurveSegment(float(t1), float(t2), tag, float(lam)))
            start = i
    return segments


def _step_sq(curve: SampledCurve) -> float:
    return float(np.max(np.diff(curve.t)) ** 2)


def vertical_quantity(curve: SampledCurve) -> np.ndarray:
    """|2z' + x'y - y'x| at interior samples."""
    _, p, d = _derivatives(curve)
    return np.abs(2.0 * d[:, 2] + d[:, 0] * p[:, 1] - d[:, 1] * p[:, 0])


def embed_vertical_arc(curve: SampledCurve, t0: float,
                       snowflake: SnowflakeCurve | None = None):
    """Map t -> lambda_local * Phi(t) embedding a vertical arc into R^3.

    Requires the ratio condition: an interval-arithmetic range of
    2 z'(t1) + x'(t2) y(t3) - x(t4) y'(t5) over the arc must stay within
    [1/2, 2] times its value at t0.
    """
    t, p, d = _derivatives(curve)
    val = np.abs(2.0 * d[:, 2] + d[:, 0] * p[:, 1] - d[:, 1] * p[:, 0])
    if np.min(val) < 1.0 - 1e-9:
        raise ShrinkIntervalError(
            "not a vertical arc: |2z' + x'y - y'x| drops below 1")
    i0 = int(np.argmin(np.abs(t - t0)))
    e0 = 2.0 * d[i0, 2] + d[i0, 0] * p[i0, 1] - d[i0, 1] * p[i0, 0]

    def irange(lo_a, hi_a, lo_b, hi_b):
        cands = np.array([lo_a * lo_b, lo_a * hi_b, hi_a * lo_b, hi_a * hi_b])
        return cands.min(), cands.max()

    lo = 2.0 * d[:, 2].min()
    hi = 2.0 * d[:, 2].max()
    m1 = irange(d[:, 0].min(), d[:, 0].max(), p[:, 1].min(), p[:, 1].max())
    m2 = irange(d[:, 1].min(), d[:, 1].max(), p[:, 0].min(), p[:, 0].max())
    lo, hi = lo + m1[0] - m2[1], hi + m1[1] - m2[0]
    if e0 < 0:
        lo, hi, e0 = -hi, -lo, -e0
    if not (lo >= 0.5 * e0 - 1e-12 and hi <= 2.0 * e0 + 1e-12):
        raise ShrinkIntervalError(
            f"ratio condition fails: range [{lo:g}, {hi:g}] vs center {e0:g}")
    lam = float(np.sqrt(abs(e0)))
    phi = snowflake if snowflake is not None else build_snowflake_line(12)

    def emb(tt):
        return lam * phi(np.atleast_1d(np.asarray(tt, float)))

    return emb, lam
