"""Characteristic-point model surfaces: revolution surfaces about the z-axis,
the Koranyi and Euclidean unit spheres, and the saddle z = xy/2.

Revolution surfaces (w, F(|w|)) are foliated by lifting integral curves of
the planar field V(t s) = s + 2 (F'(t)/t) s_perp, whose integral curves gain
radius at constant rate 1/2 in the paper's parameterization; the disc map
G(t s) = gamma_s(2t) is assembled annulus by annulus and inverted through
the measured radial law. Spheres are foliated by longitudes: integral curves
of explicit unit fields tangent to both the sphere and the horizontal plane
field, and embed by (t, (1 - |t|) phi(s)) with t a normalized latitude and s
the longitude label. The saddle is covered by four families of dyadic squares,
each mapped to a base square by an exact d_h similarity and embedded there by
(y, Phi(x)).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import as_points, d_k, dilate
from .snowflake import SnowflakeCurve, build_snowflake_circle, build_snowflake_line

__all__ = [
    "RevolutionSpec",
    "ShrinkTError",
    "RevolutionChart",
    "build_revolution_chart",
    "embed_revolution",
    "revolution_preset",
    "SphereChart",
    "koranyi_sphere_field",
    "euclidean_sphere_field",
    "build_koranyi_sphere",
    "build_euclidean_sphere",
    "embed_sphere",
    "saddle_point",
    "saddle_square_of",
    "saddle_family_of",
    "zeta_similarity",
    "zeta_similarity_inv",
    "sigma_similarity",
    "saddle_base_embedding",
    "embed_saddle_family",
]


class ShrinkTError(RuntimeError):
    """|F'(t)|/t exceeds its bound inside (0, T); retry with smaller T."""


@dataclass(frozen=True)
class RevolutionSpec:
    """Profile F of the revolution surface {(w, F(|w|))}, with F'(0) = 0."""

    f: Callable
    df: Callable
    m_rev: float
    t_max: float

    def __post_init__(self):
        h = 1e-6
        d0 = (self.f(h) - self.f(0.0)) / h
        if abs(d0) > 1e-4:
            raise ValueError("profile must satisfy F'(0) = 0")
        if self.m_rev < 1.0:
            raise ValueError("M must be >= 1")
        tt = np.linspace(1e-9, self.t_max, 512)
        ratio = np.abs(self.df(tt)) / tt
        if np.max(ratio) > 2.0 * self.m_rev + 1e-12:
            raise ShrinkTError(
                f"|F'(t)|/t reaches {np.max(ratio):g} inside (0, T); shrink T")

    def point(self, w) -> np.ndarray:
        w = np.asarray(w, float)
        r = np.hypot(w[..., 0], w[..., 1])
        return np.stack([w[..., 0], w[..., 1], self.f(r)], axis=-1)


def revolution_preset(name: str, t_max: float = 1.0) -> RevolutionSpec:
    if name == "zero":
        return RevolutionSpec(lambda t: 0.0 * np.asarray(t, float),
                              lambda t: 0.0 * np.asarray(t, float), 1.0, t_max)
    if name == "square":
        return RevolutionSpec(lambda t: np.asarray(t, float) ** 2,
                              lambda t: 2.0 * np.asarray(t, float), 1.0, t_max)
    if name == "cosh":
        return RevolutionSpec(lambda t: np.cosh(np.asarray(t, float)) - 1.0,
                              np.sinh, 1.0, t_max)
    raise ValueError(f"unknown profile preset {name!r}")


@dataclass
class RevolutionChart:
    """Disc self-map G(t s) = gamma_s(2 t) built from one canonical spiral."""

    spec: RevolutionSpec
    tau: np.ndarray = field(repr=False)      # curve parameter grid (=2t)
    radius: np.ndarray = field(repr=False)   # |gamma_0(tau)|
    angle: np.ndarray = field(repr=False)    # unwrapped azimuth of gamma_0
    radial_law_error: float = 0.0

    def g(self, w) -> np.ndarray:
        """Evaluate G at planar points w (..., 2)."""
        w = np.asarray(w, float)
        t = np.hypot(w[..., 0], w[..., 1])
        theta = np.arctan2(w[..., 1], w[..., 0])
        tau = 2.0 * t
        rho = np.interp(tau, self.tau, self.radius)
        beta = np.interp(tau, self.tau, self.angle)
        out = np.stack([rho * np.cos(theta + beta), rho * np.sin(theta + beta)],
                       axis=-1)
        return np.where(t[..., None] == 0.0, 0.0, out)

    def lift(self, w) -> np.ndarray:
        """Surface point above G(w)."""
        gw = self.g(w)
        r = np.hypot(gw[..., 0], gw[..., 1])
        return np.stack([gw[..., 0], gw[..., 1], self.spec.f(r)], axis=-1)

    def invert_tau(self, r, tol: float = 1e-12) -> np.ndarray:
        """Recover tau with |gamma_0(tau)| = r by bisection on the radial law."""
        r = np.asarray(r, float)
        lo = np.zeros_like(r)
        hi = np.full_like(r, self.tau[-1])
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            val = np.interp(mid, self.tau, self.radius)
            high = val > r
            hi = np.where(high, mid, hi)
            lo = np.where(high, lo, mid)
            if np.max(hi - lo) < tol:
                break
        return 0.5 * (lo + hi)


def build_revolution_chart(spec: RevolutionSpec, steps_per_annulus: int = 2048,
                           annuli: int = 48) -> RevolutionChart:
    """Integrate the canonical spiral inward from (T, 0), annulus by annulus."""
    t_max = spec.t_max

    def vfield(p):
        r = np.hypot(p[0], p[1])
        s = p / r
        sperp = np.array([-s[1], s[0]])
        return 0.5 * (s + 2.0 * (spec.df(r) / r) * sperp)

    taus = [np.array([2.0 * t_max])]
    pts = [np.array([[t_max, 0.0]])]
    p = np.array([t_max, 0.0])
    tau = 2.0 * t_max
    for i in range(annuli):
        tau_lo = 2.0 * t_max * 2.0 ** (-(i + 1))
        h = -(tau - tau_lo) / steps_per_annulus
        block_t = np.empty(steps_per_annulus)
        block_p = np.empty((steps_per_annulus, 2))
        for k in range(steps_per_annulus):
            k1 = vfield(p)
            k2 = vfield(p + 0.5 * h * k1)
            k3 = vfield(p + 0.5 * h * k2)
            k4 = vfield(p + h * k3)
            p = p + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            tau += h
            block_t[k] = tau
            block_p[k] = p
        taus.append(block_t)
        pts.append(block_p)
    tau_all = np.concatenate(taus)[::-1]
    pts_all = np.concatenate(pts, axis=0)[::-1]
    radius = np.hypot(pts_all[:, 0], pts_all[:, 1])
    angle = np.unwrap(np.arctan2(pts_all[:, 1], pts_all[:, 0]))
    angle = angle - angle[-1]  # zero drift at the anchor (T, 0)
    # prepend the origin: radius tau/2 extends to zero by the growth law
    tau_all = np.concatenate([[0.0], tau_all])
    radius = np.concatenate([[0.0], radius])
    angle = np.concatenate([[angle[0]], angle])
    err = float(np.max(np.abs(radius - tau_all / 2.0)))
    return RevolutionChart(spec, tau_all, radius, angle, radial_law_error=err)


def embed_revolution(chart: RevolutionChart,
                     circle: SnowflakeCurve | None = None, tol: float = 1e-9):
    """Map surface points near the apex to R^4 through the inverse chart."""
    circ = circle if circle is not None else build_snowflake_circle(12)
    spec = chart.spec

    def emb(p):
        p = as_points(np.atleast_2d(p))
        r = np.hypot(p[:, 0], p[:, 1])
        if np.any(r > chart.radius[-1] + 1e-12):
            raise ValueError("point outside the chart region")
        if np.any(np.abs(p[:, 2] - spec.f(r)) > max(tol, 1e-9)):
            raise ValueError("point does not lie on the revolution surface")
        tau = chart.invert_tau(r)
        beta = np.interp(tau, chart.tau, chart.angle)
        s_angle = np.arctan2(p[:, 1], p[:, 0]) - beta
        t = tau / 2.0
        out = np.empty((p.shape[0], 4))
        out[:, :3] = t[:, None] * circ(s_angle)
        out[:, 3] = t
        near0 = r < 1e-14
        out[near0] = 0.0
        return out

    return emb


# ---------------------------------------------------------------------------
# spheres


def koranyi_sphere_field(p) -> np.ndarray:
    """Unit horizontal field tangent to the Koranyi unit sphere."""
    p = np.asarray(p, float)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    r2 = x * x + y * y
    denom = np.sqrt(4.0 * r2 + r2 ** 4)
    return np.stack([
        (-8.0 * x * z - 2.0 * y * r2) / denom,
        (-8.0 * y * z + 2.0 * x * r2) / denom,
        r2 * r2 / denom,
    ], axis=-1)


def euclidean_sphere_field(p) -> np.ndarray:
    """Unit horizontal field tangent to the Euclidean unit sphere."""
    p = np.asarray(p, float)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    denom = np.sqrt(5.0 * (x * x + y * y))
    return np.stack([
        (x * z + 2.0 * y) / denom,
        (y * z - 2.0 * x) / denom,
        (-y * y - x * x) / denom,
    ], axis=-1)


@dataclass
class SphereChart:
    """Longitude tables of a rotation-invariant sphere foliation.

    The canonical longitude runs from the south pole to the north pole;
    every other longitude is its rotation about the z-axis. Latitude t in
    [-1, 1] is planar arclength normalized so the equator crossing is t = 0.
    """

    kind: str
    pole_z: float
    arc: np.ndarray = field(repr=False)
    rho: np.ndarray = field(repr=False)
    zval: np.ndarray = field(repr=False)
    drift: np.ndarray = field(repr=False)
    t_of: np.ndarray = field(repr=False)
    horizontality: float = 0.0

    def on_sphere(self, p, tol=1e-9):
        p = as_points(p)
        if self.kind == "koranyi":
            return np.abs(d_k(p, np.zeros(3)) - 1.0) <= tol
        return np.abs(np.linalg.norm(p, axis=-1) - 1.0) <= tol

    def _split(self):
        i_eq = int(np.argmax(self.rho))
        return i_eq

    def locate(self, p):
        """(t, s): latitude and longitude label of sphere points."""
        p = as_points(np.atleast_2d(p))
        rho = np.hypot(p[:, 0], p[:, 1])
        z = p[:, 2]
        i_eq = self._split()
        south = z <= self.zval[i_eq]
        tt = np.empty(rho.shape)
        ss = np.empty(rho.shape)
        for mask, sl in ((south, slice(0, i_eq + 1)),
                         (~south, slice(i_eq, self.rho.size))):
            if not mask.any():
                continue
            r_seg = self.rho[sl]
            idx = np.argsort(r_seg)
            arc_i = np.interp(rho[mask], r_seg[idx], self.arc[sl][idx])
            tt[mask] = np.interp(arc_i, self.arc, self.t_of)
            drift_i = np.interp(arc_i, self.arc, self.drift)
            ss[mask] = np.arctan2(p[mask][:, 1], p[mask][:, 0]) - drift_i
        pole = rho < 1e-12
        if pole.any():
            tt[pole] = np.where(z[pole] > 0, 1.0, -1.0)
            ss[pole] = 0.0
        return tt, ss

    def point(self, s, t) -> np.ndarray:
        """Sphere point of longitude label s and latitude t (projected
        exactly back onto the sphere)."""
        s = np.atleast_1d(np.asarray(s, float))
        t = np.atleast_1d(np.asarray(t, float))
        arc_i = np.interp(t, self.t_of, self.arc)
        rho = np.interp(arc_i, self.arc, self.rho)
        z = np.interp(arc_i, self.arc, self.zval)
        beta = np.interp(arc_i, self.arc, self.drift) + s
        pts = np.stack([rho * np.cos(beta), rho * np.sin(beta), z], axis=-1)
        if self.kind == "koranyi":
            norm = d_k(pts, np.zeros(3))
            good = norm > 1e-300
            scl = np.where(good, 1.0 / np.where(good, norm, 1.0), 1.0)
            pts[..., 0] *= scl
            pts[..., 1] *= scl
            pts[..., 2] *= scl ** 2
        else:
            norm = np.linalg.norm(pts, axis=-1, keepdims=True)
            pts = pts / np.where(norm > 1e-300, norm, 1.0)
        return pts


def _integrate_longitude(kind: str, start_offset: float = 1e-6,
                         step: float | None = None, max_steps: int = 120_000):
    # the Euclidean-sphere longitudes wind quickly about the axis; a finer
    # step keeps the second-order residual estimator below 1e-6
    if step is None:
        step = 5e-4 if kind == "koranyi" else 6e-5
    if kind == "koranyi":
        vf = koranyi_sphere_field
        z0 = -np.power(1.0 - start_offset ** 4, 0.5) / 4.0
        renorm = lambda p: dilate(p, 1.0 / d_k(p, np.zeros(3)))
        zpole = 0.25
    else:
        vf = euclidean_sphere_field
        z0 = -np.sqrt(1.0 - start_offset ** 2)
        renorm = lambda p: p / np.linalg.norm(p)
        zpole = 1.0
    p = np.array([start_offset, 0.0, z0])
    sign = 1.0 if vf(p)[2] > 0 else -1.0
    pts = [p]
    for _ in range(max_steps):
        k1 = sign * vf(p)
        k2 = sign * vf(renorm(p + 0.5 * step * k1))
        k3 = sign * vf(renorm(p + 0.5 * step * k2))
        k4 = sign * vf(renorm(p + step * k3))
        p = renorm(p + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4))
        pts.append(p)
        if p[2] > 0 and np.hypot(p[0], p[1]) < start_offset:
            break
    pts = np.array(pts)
    return pts, zpole


def _build_sphere(kind: str) -> SphereChart:
    pts, zpole = _integrate_longitude(kind)
    rho = np.hypot(pts[:, 0], pts[:, 1])
    planar_step = np.hypot(np.diff(pts[:, 0]), np.diff(pts[:, 1]))
    arc = np.concatenate([[0.0], np.cumsum(planar_step)])
    drift = np.unwrap(np.arctan2(pts[:, 1], pts[:, 0]))
    drift = drift - drift[0]
    # close the tables at both exact poles
    south = np.array([0.0, 0.0, -zpole])
    north = np.array([0.0, 0.0, zpole])
    pts = np.vstack([south, pts, north])
    rho = np.concatenate([[0.0], rho, [0.0]])
    arc = np.concatenate([[0.0], arc + rho[1], [arc[-1] + rho[1] + rho[-2]]])
    drift = np.concatenate([[drift[0]], drift, [drift[-1]]])
    t_of = 2.0 * arc / arc[-1] - 1.0
    return SphereChart(kind=kind, pole_z=zpole, arc=arc, rho=rho,
                       zval=pts[:, 2], drift=drift, t_of=t_of)


def build_koranyi_sphere() -> SphereChart:
    return _build_sphere("koranyi")


def build_euclidean_sphere() -> SphereChart:
    return _build_sphere("euclidean")


def embed_sphere(chart: SphereChart, circle: SnowflakeCurve | None = None,
                 tol: float = 1e-9):
    """Map sphere points to (t, (1 - |t|) phi(s)) in R^4."""
    circ = circle if circle is not None else build_snowflake_circle(12)

    def emb(p):
        p = as_points(np.atleast_2d(p))
        if not bool(np.all(chart.on_sphere(p, tol))):
            raise ValueError("point does not lie on the sphere")
        t, s = chart.locate(p)
        out = np.empty((p.shape[0], 4))
        out[:, 0] = t
        out[:, 1:] = (1.0 - np.abs(t))[:, None] * circ(s)
        return out

    return emb


# ---------------------------------------------------------------------------
# the saddle z = xy/2


def saddle_point(x, y) -> np.ndarray:
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    return np.stack([x, y, 0.5 * x * y], axis=-1)


def saddle_square_of(p) -> tuple[int, int, int]:
    """(n, m, sign) of a dyadic square containing a saddle point.

    Boundary points belong to several closed squares; this returns the one
    with y in [2^-n, 2^(1-n)) and x in [m 2^-n, (m+1) 2^-n). Use
    saddle_squares_of for all closed-square memberships.
    """
    return saddle_squares_of(p)[0]


def saddle_squares_of(p) -> list[tuple[int, int, int]]:
    """All (n, m, sign) whose closed square contains the saddle point."""
    p = np.asarray(p, float)
    y = float(np.ravel(p[..., 1])[0])
    if y == 0:
        raise ValueError("x-axis points belong to no square")
    sign = 1 if y > 0 else -1
    ay = abs(y)
    x = float(np.ravel(p[..., 0])[0])
    out = []
    n0 = int(-np.floor(np.log2(ay)))
    for n in (n0, n0 - 1, n0 + 1):
        lo_y, hi_y = 2.0 ** (-n), 2.0 ** (1 - n)
        if not (lo_y <= ay <= hi_y):
            continue
        m0 = int(np.floor(x * 2.0 ** n))
        for m in (m0, m0 - 1):
            lo_x, hi_x = m * 2.0 ** (-n), (m + 1) * 2.0 ** (-n)
            if lo_x <= x <= hi_x:
                out.append((n, m, sign))
    if not out:
        raise ValueError(f"no dyadic square contains (x={x}, y={y})")
    return out


def saddle_family_of(n: int, m: int) -> int:
    """Family index 1..4 by the parities of n and m."""
    if n % 2 == 0:
        return 1 if m % 2 == 0 else 2
    return 3 if m % 2 == 0 else 4


def zeta_similarity(n: int, m: int, sign: int, w) -> np.ndarray:
    """The 2^-n similarity mapping the base square onto Q_{n,m}^sign."""
    w = as_points(w)
    x, y = w[..., 0], w[..., 1]
    return np.stack([
        2.0 ** (-n) * (x + m),
        sign * 2.0 ** (-n) * y,
        sign * 0.5 * 4.0 ** (-n) * (x + m) * y,
    ], axis=-1)


def zeta_similarity_inv(n: int, m: int, sign: int, p) -> np.ndarray:
    p = as_points(p)
    x = 2.0 ** n * p[..., 0] - m
    y = sign * 2.0 ** n * p[..., 1]
    return np.stack([x, y, 0.5 * x * y], axis=-1)


def sigma_similarity(n: int, m: int, sign: int, q) -> np.ndarray:
    """Euclidean similarity of R^4 pairing with zeta."""
    q = np.asarray(q, float)
    return np.stack([
        sign * 2.0 ** (-n) * q[..., 0],
        2.0 ** (-n) * (q[..., 1] + m),
        2.0 ** (-n) * q[..., 2],
        2.0 ** (-n) * q[..., 3],
    ], axis=-1)


def saddle_base_embedding(snowflake: SnowflakeCurve | None = None):
    """g(x, y, xy/2) = (y, Phi(x)) on the base square [0,1] x [1,2]."""
    phi = snowflake if snowflake is not None else build_snowflake_line(12)

    def g(w):
        w = as_points(np.atleast_2d(w))
        out = np.empty((w.shape[0], 4))
        out[:, 0] = w[:, 1]
        out[:, 1:] = phi(w[:, 0])
        return out

    return g


def embed_saddle_family(family: int, snowflake: SnowflakeCurve | None = None,
                        tol: float = 1e-9):
    """Map points of the family's squares (or the x-axis) to R^4."""
    if family not in (1, 2, 3, 4):
        raise ValueError("family index must be 1..4")
    g = saddle_base_embedding(snowflake)

    def emb(p):
        p = as_points(np.atleast_2d(p))
        if np.any(np.abs(p[:, 2] - 0.5 * p[:, 0] * p[:, 1]) > tol):
            raise ValueError("point does not lie on the saddle z = xy/2")
        out = np.empty((p.shape[0], 4))
        for i, pt in enumerate(p):
            if pt[1] == 0.0:
                out[i] = np.array([0.0, pt[0], 0.0, 0.0])
                continue
            squares = saddle_squares_of(pt)
            match = [sq for sq in squares if saddle_family_of(sq[0], sq[1]) == family]
            if not match:
                found = sorted({saddle_family_of(n, m) for (n, m, _s) in squares})
                raise ValueError(
                    f"point lies in squares of families {found}, not {family}")
            n, m, sign = match[0]
            base = zeta_similarity_inv(n, m, sign, pt)
            out[i] = sigma_similarity(n, m, sign, g(base)[0])
        return out

    return emb
