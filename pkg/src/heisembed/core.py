"""Heisenberg group kernel: group law, Koranyi metric, the working quasi-distance,
similarities, cones, and horizontality diagnostics.

Points are numpy arrays of shape (..., 3) holding coordinates (x, y, z). All
operations broadcast over leading axes and are pure functions.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "hpoint",
    "as_points",
    "group_mul",
    "group_inv",
    "d_k",
    "d_h",
    "dilate",
    "rotate_z",
    "left_translate",
    "similarity",
    "Cone",
    "cone_contains",
    "SampledCurve",
    "horizontality_residual",
]


def hpoint(x: float, y: float, z: float) -> np.ndarray:
    """Build a single validated point."""
    p = np.array([x, y, z], dtype=float)
    if not np.all(np.isfinite(p)):
        raise ValueError("point coordinates must be finite")
    return p


def as_points(p) -> np.ndarray:
    """Validate and convert an array-like of shape (..., 3) to float points."""
    arr = np.asarray(p, dtype=float)
    if arr.shape[-1] != 3:
        raise ValueError(f"expected shape (..., 3), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point coordinates must be finite")
    return arr


def group_mul(p, q) -> np.ndarray:
    """Group product p * q = (x+x', y+y', z+z' + (xy' - x'y)/2)."""
    p = as_points(p)
    q = as_points(q)
    out = p + q
    out[..., 2] += 0.5 * (p[..., 0] * q[..., 1] - q[..., 0] * p[..., 1])
    return out


def group_inv(p) -> np.ndarray:
    """Group inverse -p; p * group_inv(p) is the identity."""
    return -as_points(p)


def _z_twist(p, q):
    """z - z' + (xy' - x'y)/2, the vertical part of q^-1 * p.

    Evaluated in the difference form x (y'-y) - (x'-x) y, which avoids the
    catastrophic cancellation of x y' - x' y for nearby points.
    """
    return (p[..., 2] - q[..., 2]
            + 0.5 * (p[..., 0] * (q[..., 1] - p[..., 1])
                     - (q[..., 0] - p[..., 0]) * p[..., 1]))


def d_k(p, q) -> np.ndarray:
    """Koranyi metric (((dx^2+dy^2))^2 + 16 (z-twist)^2)^(1/4)."""
    p = as_points(p)
    q = as_points(q)
    horiz = (p[..., 0] - q[..., 0]) ** 2 + (p[..., 1] - q[..., 1]) ** 2
    return (horiz ** 2 + 16.0 * _z_twist(p, q) ** 2) ** 0.25


def d_h(p, q) -> np.ndarray:
    """Working quasi-distance |dx| + |dy| + |z-twist|^(1/2).

    Not a metric (the triangle inequality only holds up to a constant), but
    comparable to d_k above and below; embeddings are measured against it.
    """
    p = as_points(p)
    q = as_points(q)
    return (np.abs(p[..., 0] - q[..., 0])
            + np.abs(p[..., 1] - q[..., 1])
            + np.sqrt(np.abs(_z_twist(p, q))))


def dilate(p, r: float) -> np.ndarray:
    """Heisenberg dilation (x, y, z) -> (rx, ry, r^2 z); scales d_k by r."""
    if not (r > 0):
        raise ValueError("dilation factor must be positive")
    p = as_points(p)
    out = p.copy()
    out[..., 0] *= r
    out[..., 1] *= r
    out[..., 2] *= r * r
    return out


def rotate_z(p, theta: float) -> np.ndarray:
    """Rotation about the z-axis; a d_k isometry."""
    p = as_points(p)
    c, s = np.cos(theta), np.sin(theta)
    out = p.copy()
    out[..., 0] = c * p[..., 0] - s * p[..., 1]
    out[..., 1] = s * p[..., 0] + c * p[..., 1]
    return out


def left_translate(q, p) -> np.ndarray:
    """Left translation p -> q * p; an exact d_k isometry."""
    return group_mul(q, p)


def similarity(p, kind: str, **kw) -> np.ndarray:
    """Apply one of the basic similarities.

    kind: "left_translate" (kw: by), "dilate" (kw: r), "rotate_z" (kw: theta).
    """
    if kind == "left_translate":
        return left_translate(kw["by"], p)
    if kind == "dilate":
        return dilate(p, kw["r"])
    if kind == "rotate_z":
        return rotate_z(p, kw["theta"])
    raise ValueError(f"unknown similarity kind: {kind!r}")


@dataclass(frozen=True)
class Cone:
    """The set |z| <= alpha (x^2 + y^2); dilation- and rotation-invariant."""

    alpha: float

    def __post_init__(self):
        if not (self.alpha > 0):
            raise ValueError("cone parameter alpha must be positive")


def cone_contains(cone: Cone, base, p, slack: float = 0.0) -> np.ndarray:
    """True where base^-1 * p lies in the cone (group-translated membership)."""
    w = group_mul(group_inv(base), p)
    return np.abs(w[..., 2]) <= cone.alpha * (w[..., 0] ** 2 + w[..., 1] ** 2) + slack


@dataclass(frozen=True)
class SampledCurve:
    """A curve sampled at strictly increasing parameters."""

    t: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        pts = as_points(self.points)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("need at least 2 samples")
        if pts.shape != (t.size, 3):
            raise ValueError("points must have shape (len(t), 3)")
        if not np.all(np.diff(t) > 0):
            raise ValueError("sample parameters must be strictly increasing")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.t.size


def horizontality_residual(curve: SampledCurve) -> float:
    """Max normalized residual |z' + (x'y - xy')/2| / (|x'| + |y'| + 1).

    Derivatives are centered finite differences at interior samples; a smooth
    horizontal curve sampled at step h scores O(h^2).
    """
    if curve.n < 3:
        raise ValueError("need at least 3 samples for a residual")
    t = curve.t
    x, y, z = curve.points[:, 0], curve.points[:, 1], curve.points[:, 2]
    dt = t[2:] - t[:-2]
    xp = (x[2:] - x[:-2]) / dt
    yp = (y[2:] - y[:-2]) / dt
    zp = (z[2:] - z[:-2]) / dt
    res = np.abs(zp + 0.5 * xp * y[1:-1] - 0.5 * x[1:-1] * yp)
    return float(np.max(res / (np.abs(xp) + np.abs(yp) + 1.0)))
