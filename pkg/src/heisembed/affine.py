"""Explicit embeddings of lines (into R^3) and planes (into R^4).

A line is classified into one of three cases after normalization:

  Vertical    a1 = a2 = 0: the line is d_h-isometric to the half-snowflake
              axis and embeds by the snowflake curve itself.
  Horizontal  2 a3 + c2 a1 - c1 a2 = 0: the line is a horizontal curve and
              embeds isometrically into the first coordinate axis.
  Generic     otherwise, with constants kappa = |a1| + |a2|,
              lambda = |a3 + (c2 a1 - c1 a2)/2|^(1/2), mu = kappa^2/lambda^2;
              the embedding stacks snowflake periods of width 1/mu.

Planes parallel to the z-axis use the extended line snowflake on a sheared
vertical coordinate; all other planes are first moved onto {z=0} by an exact
d_h isometry (a left translation) and then mapped through the snowflake cone
(t, s) -> (t phi(s), t).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import as_points, d_h, group_mul
from .snowflake import SnowflakeCurve, build_snowflake_circle, build_snowflake_line

__all__ = [
    "LineSpec",
    "LineCase",
    "classify_line",
    "embed_line",
    "PlaneSpec",
    "vertical_plane",
    "graph_plane",
    "plane_isometry",
    "plane_isometry_inv",
    "snowcone",
    "embed_plane",
    "embed_simplex",
    "plane_through",
]

_UNIT_TOL = 1e-12
_CASE_TOL = 1e-12


@dataclass(frozen=True)
class LineSpec:
    """Parametric line w(t) = a t + c with |a| = 1."""

    a: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        c = np.asarray(self.c, dtype=float)
        if a.shape != (3,) or c.shape != (3,):
            raise ValueError("a and c must be 3-vectors")
        if abs(np.dot(a, a) - 1.0) > 1e-9:
            raise ValueError("direction must be a unit vector")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "c", c)

    def point(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return self.a[None, :] * t[:, None] + self.c[None, :]


@dataclass(frozen=True)
class LineCase:
    """Classification record; kappa/lam/mu are zero except where defined."""

    tag: str  # "vertical" | "horizontal" | "generic"
    kappa: float = 0.0
    lam: float = 0.0
    mu: float = 0.0
    swapped: bool = False
    c3_shift: float = 0.0


def _normalize(line: LineSpec) -> tuple[np.ndarray, np.ndarray, bool, float]:
    a = line.a.copy()
    c = line.c.copy()
    swapped = False
    if abs(a[1]) > abs(a[0]):
        # conjugate by the isometry (x, y, z) -> (y, x, -z)
        a = np.array([a[1], a[0], -a[2]])
        c = np.array([c[1], c[0], -c[2]])
        swapped = True
    shift = c[2]
    c = c - np.array([0.0, 0.0, shift])
    return a, c, swapped, shift


def classify_line(line: LineSpec) -> LineCase:
    """Case analysis of a line under d_h; see module docstring."""
    a, c, swapped, shift = _normalize(line)
    if abs(a[0]) <= _CASE_TOL and abs(a[1]) <= _CASE_TOL:
        return LineCase("vertical", swapped=swapped, c3_shift=shift)
    lam_sq = a[2] + 0.5 * (c[1] * a[0] - c[0] * a[1])
    kappa = abs(a[0]) + abs(a[1])
    if abs(2.0 * lam_sq) <= _CASE_TOL:
        return LineCase("horizontal", kappa=kappa, swapped=swapped, c3_shift=shift)
    lam = np.sqrt(abs(lam_sq))
    return LineCase("generic", kappa=kappa, lam=lam, mu=kappa ** 2 / lam ** 2,
                    swapped=swapped, c3_shift=shift)


def line_dh(line: LineSpec, t1, t2) -> np.ndarray:
    """d_h along the line; equals kappa |dt| + lambda |dt|^(1/2)."""
    return d_h(line.point(t1), line.point(t2))


def embed_line(line: LineSpec, snowflake: SnowflakeCurve | None = None):
    """Map t -> R^3 embedding the line (ell, d_h); see classify_line."""
    case = classify_line(line)
    phi = snowflake if snowflake is not None else build_snowflake_line(12)

    if case.tag == "vertical":
        def emb(t):
            return phi(np.atleast_1d(np.asarray(t, dtype=float)))
    elif case.tag == "horizontal":
        k = case.kappa

        def emb(t):
            t = np.atleast_1d(np.asarray(t, dtype=float))
            out = np.zeros((t.size, 3))
            out[:, 0] = k * t
            return out
    else:
        k_over_mu = case.kappa / case.mu
        mu = case.mu

        def emb(t):
            t = np.atleast_1d(np.asarray(t, dtype=float))
            return k_over_mu * phi(mu * t)
    return emb, case


@dataclass(frozen=True)
class PlaneSpec:
    """Either y = b x + c (vertical) or z = a x + b y + c (graph)."""

    tag: str  # "vertical" | "graph"
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    swapped: bool = False

    def contains(self, p, tol: float = 1e-9) -> np.ndarray:
        p = as_points(p)
        q = _apply_swap(p) if self.swapped else p
        if self.tag == "vertical":
            resid = np.abs(q[..., 1] - self.b * q[..., 0] - self.c)
        else:
            resid = np.abs(q[..., 2] - self.a * q[..., 0] - self.b * q[..., 1] - self.c)
        return resid <= tol


def _apply_swap(p):
    q = np.empty_like(p)
    q[..., 0] = p[..., 1]
    q[..., 1] = p[..., 0]
    q[..., 2] = -p[..., 2]
    return q


def vertical_plane(b: float, c: float) -> PlaneSpec:
    """Plane y = b x + c; when |b| > 1 the x/y-swapped chart is recorded."""
    if abs(b) > 1.0:
        return PlaneSpec("vertical", b=1.0 / b, c=-c / b, swapped=True)
    return PlaneSpec("vertical", b=b, c=c)


def graph_plane(a: float, b: float, c: float) -> PlaneSpec:
    return PlaneSpec("graph", a=a, b=b, c=c)


def plane_isometry(spec: PlaneSpec, p) -> np.ndarray:
    """g: {z=0} -> P, the left translation by (2b, -2a, c); exact d_h isometry."""
    q = np.array([2.0 * spec.b, -2.0 * spec.a, spec.c])
    return group_mul(q, p)


def plane_isometry_inv(spec: PlaneSpec, p) -> np.ndarray:
    q = np.array([-2.0 * spec.b, 2.0 * spec.a, -spec.c])
    return group_mul(q, p)


def snowcone(xy, circle: SnowflakeCurve) -> np.ndarray:
    """The cone map (x, y) -> (t phi(s), t) on {z=0}, t = radius, s = angle."""
    xy = np.asarray(xy, dtype=float)
    t = np.hypot(xy[..., 0], xy[..., 1])
    s = np.arctan2(xy[..., 1], xy[..., 0])
    out = np.empty(xy.shape[:-1] + (4,))
    out[..., :3] = t[..., None] * circle(s)
    out[..., 3] = t
    return out


def embed_plane(spec: PlaneSpec, snowflake: SnowflakeCurve | None = None,
                circle: SnowflakeCurve | None = None, tol: float = 1e-9):
    """Map plane points -> R^4; raises for points off the plane."""
    if spec.tag == "vertical":
        phi = snowflake if snowflake is not None else build_snowflake_line(12)
        b, c = spec.b, spec.c

        def emb(p):
            p = as_points(np.atleast_2d(p))
            if not bool(np.all(spec.contains(p, tol))):
                raise ValueError("point does not lie on the plane")
            q = _apply_swap(p) if spec.swapped else p
            out = np.empty((q.shape[0], 4))
            out[:, 0] = q[:, 0]
            out[:, 1:] = phi(q[:, 2] + 0.5 * c * q[:, 0])
            return out
    else:
        circ = circle if circle is not None else build_snowflake_circle(12)

        def emb(p):
            p = as_points(np.atleast_2d(p))
            if not bool(np.all(spec.contains(p, tol))):
                raise ValueError("point does not lie on the plane")
            w = plane_isometry_inv(spec, p)
            return snowcone(w[:, :2], circ)
    return emb


def plane_through(v0, v1, v2) -> PlaneSpec:
    """Supporting plane of three affinely independent points."""
    v0, v1, v2 = (np.asarray(v, dtype=float) for v in (v0, v1, v2))
    n = np.cross(v1 - v0, v2 - v0)
    norm = np.linalg.norm(n)
    if norm < 1e-12 * max(np.linalg.norm(v1 - v0), np.linalg.norm(v2 - v0), 1.0):
        raise ValueError("degenerate vertex set")
    n = n / norm
    if abs(n[2]) < 1e-12:
        # parallel to the z-axis: alpha x + beta y = gamma
        alpha, beta = n[0], n[1]
        gamma = np.dot(n, v0)
        if abs(beta) >= abs(alpha):
            return vertical_plane(-alpha / beta, gamma / beta)
        # x = (gamma - beta y)/alpha: swap roles of x and y
        return PlaneSpec("vertical", b=-beta / alpha, c=gamma / alpha, swapped=True)
    a = -n[0] / n[2]
    b = -n[1] / n[2]
    c = np.dot(n, v0) / n[2]
    return graph_plane(a, b, c)


def embed_simplex(vertices, snowflake: SnowflakeCurve | None = None,
                  circle: SnowflakeCurve | None = None):
    """Embedding of a 0/1/2-simplex via its supporting line or plane.

    Returns (map, kind): the map takes simplex points to R^4 (line images are
    zero-padded to share the codomain).
    """
    verts = [np.asarray(v, dtype=float) for v in vertices]
    if len(verts) == 1:
        def emb(p):
            p = as_points(np.atleast_2d(p))
            return np.zeros((p.shape[0], 4))
        return emb, "point"
    if len(verts) == 2:
        direction = verts[1] - verts[0]
        norm = np.linalg.norm(direction)
        if norm < 1e-12:
            raise ValueError("degenerate vertex set")
        a = direction / norm
        line = LineSpec(a, verts[0])
        line_emb, _case = embed_line(line, snowflake)

        def emb(p):
            p = as_points(np.atleast_2d(p))
            t = (p - verts[0]) @ a
            out = np.zeros((p.shape[0], 4))
            out[:, :3] = line_emb(t)
            return out
        return emb, "segment"
    if len(verts) == 3:
        spec = plane_through(*verts)
        return embed_plane(spec, snowflake, circle), "triangle"
    raise ValueError("a simplex has 1, 2, or 3 vertices")
