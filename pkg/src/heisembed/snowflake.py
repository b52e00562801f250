"""Constructive half-snowflake curves in R^3.

The line curve maps [0, 1] into the unit cube with endpoints pinned to the
bottom and top face centers, extends to all of R by unit stacking
(phi(t+1) = phi(t) + (0,0,1)), and satisfies two-sided Holder-1/2 bounds

    L^-1 |s-t|^(1/2) <= |phi(s) - phi(t)| <= L |s-t|^(1/2)

down to parameter resolution 4^-depth. The circle curve does the same on S^1
against the chordal distance.

Construction: a self-similar four-way subdivision. Each oriented chord (A, B)
with transverse frame (n1, n2) is replaced by the four-chord motif

    P1 = A + (l/2)(a u + b n1),   P2 = A + (l/2)(u + c n2),
    P3 = B - (l/2)(a u + b n1),

with b = sqrt(1 - a^2) and c = sqrt(2a - 1), so every sub-chord has exactly
half the parent length while the parameter interval quarters: the image
scales like the square root of the parameter at every dyadic level. Child
frames follow a binormal transport rule with a fixed sign pattern chosen (by
a calibration sweep over sign patterns and shape parameters) to keep the
curve self-avoiding; a final horizontal shrink keeps it strictly inside the
open cube away from its endpoints.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .rng import make_rng

__all__ = [
    "SnowflakeCurve",
    "build_snowflake_line",
    "build_snowflake_circle",
    "measure_holder_distortion",
    "boundary_margin",
    "curve_to_csv",
]

MAX_DEPTH = 23  # 4^-24 is below meaningful double spacing at unit scale

# shape parameter of the motif and frame sign pattern, fixed by calibration
DEFAULT_THETA = 0.7
FRAME_SIGNS = np.array([-1.0, 1.0, 1.0, -1.0])
HORIZONTAL_SHRINK = 0.85

_E0 = np.array([0.5, 0.5, 0.0])
_E1 = np.array([0.5, 0.5, 1.0])


def _descend(t, depth, a, seed_a, seed_b, seed_e1, seed_e2, shrink_center=None):
    """Vectorized recursive descent: evaluate the limit curve at params t in [0,1]."""
    t = np.asarray(t, dtype=float)
    n = t.shape[0]
    A = np.tile(seed_a, (n, 1))
    B = np.tile(seed_b, (n, 1))
    e1 = np.tile(seed_e1, (n, 1))
    e2 = np.tile(seed_e2, (n, 1))
    lo = np.zeros(n)
    hi = np.ones(n)
    b = np.sqrt(1.0 - a * a)
    c = np.sqrt(2.0 * a - 1.0)
    idx = np.arange(n)
    for _ in range(depth):
        width = hi - lo
        ell = np.linalg.norm(B - A, axis=1, keepdims=True)
        u = (B - A) / ell
        p1 = A + 0.5 * ell * (a * u + b * e1)
        p2 = A + 0.5 * ell * (u + c * e2)
        p3 = B - 0.5 * ell * (a * u + b * e1)
        q = np.clip(((t - lo) / width * 4).astype(np.int64), 0, 3)
        starts = np.stack([A, p1, p2, p3], axis=1)
        ends = np.stack([p1, p2, p3, B], axis=1)
        A = starts[idx, q]
        B = ends[idx, q]
        lo = lo + q * (width / 4)
        hi = lo + width / 4
        seg = B - A
        un = seg / np.linalg.norm(seg, axis=1, keepdims=True)
        e1n = np.cross(e2, un)
        nrm = np.linalg.norm(e1n, axis=1, keepdims=True)
        bad = nrm[:, 0] < 1e-12
        if bad.any():
            e1n[bad] = np.cross(e1[bad], un[bad])
            nrm = np.linalg.norm(e1n, axis=1, keepdims=True)
        e1 = FRAME_SIGNS[q][:, None] * e1n / nrm
        e2 = np.cross(un, e1)
    w = ((t - lo) / (hi - lo))[:, None]
    pts = A + w * (B - A)
    if shrink_center is not None:
        pts[:, 0] = shrink_center[0] + HORIZONTAL_SHRINK * (pts[:, 0] - shrink_center[0])
        pts[:, 1] = shrink_center[1] + HORIZONTAL_SHRINK * (pts[:, 1] - shrink_center[1])
    return pts


@dataclass(frozen=True)
class SnowflakeCurve:
    """A depth-truncated half-snowflake with its measured constants.

    evaluator maps parameter arrays to (n, 3) points: reals for the line
    variant (stacking extension built in), angles for the circle variant
    (2*pi-periodic). measured_L is filled in by measure_holder_distortion.
    """

    variant: str
    depth: int
    theta: float
    evaluator: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    measured_l: float = float("nan")

    @property
    def resolution(self) -> float:
        return 4.0 ** (-self.depth)

    def __call__(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return self.evaluator(t)

    def with_measured_l(self, value: float) -> "SnowflakeCurve":
        return SnowflakeCurve(self.variant, self.depth, self.theta,
                              self.evaluator, float(value))


def _check_depth(depth: int) -> None:
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if depth > MAX_DEPTH:
        raise ValueError(
            f"depth {depth} exceeds {MAX_DEPTH}: resolution 4^-depth would fall "
            "below meaningful 64-bit precision")


def build_snowflake_line(depth: int, theta: float = DEFAULT_THETA) -> SnowflakeCurve:
    """Line-variant curve on [0, 1], extended to R by unit stacking."""
    _check_depth(depth)
    if not (0.5 < theta < 1.0):
        raise ValueError("theta must lie in (0.5, 1)")

    def evaluator(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        floor = np.floor(t)
        frac = t - floor
        pts = _descend(frac, depth, theta, _E0, _E1,
                       np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]),
                       shrink_center=_E0)
        pts[:, 2] += floor
        return pts

    return SnowflakeCurve("line", depth, theta, evaluator)


CIRCLE_SIDES = 8
CIRCLE_RADIUS = 1.9
CIRCLE_CROWN = 0.38  # alternating vertex lift; keeps seed corners apart in 3d


def build_snowflake_circle(depth: int, theta: float = DEFAULT_THETA) -> SnowflakeCurve:
    """Circle-variant curve, 2*pi-periodic.

    Seed: a crown octagon (vertices alternately lifted out of plane, which
    separates the corner junctions in the third dimension); each side is
    refined by the same motif recursion with a radially-oriented frame.
    """
    _check_depth(depth)
    if not (0.5 < theta < 1.0):
        raise ValueError("theta must lie in (0.5, 1)")
    n = CIRCLE_SIDES
    angles = 2 * np.pi * np.arange(n + 1) / n + np.pi / n
    corners = np.stack([CIRCLE_RADIUS * np.cos(angles),
                        CIRCLE_RADIUS * np.sin(angles),
                        CIRCLE_CROWN * np.cos(np.pi * np.arange(n + 1))], axis=-1)
    corners[-1] = corners[0]
    mid = 2 * np.pi * (np.arange(n) + 0.5) / n + np.pi / n
    frames = []
    for k in range(n):
        chord = corners[k + 1] - corners[k]
        u = chord / np.linalg.norm(chord)
        e1 = np.array([np.cos(mid[k]), np.sin(mid[k]), 0.0])
        e1 = e1 - u * np.dot(e1, u)
        e1 /= np.linalg.norm(e1)
        frames.append((e1, np.cross(u, e1)))

    def evaluator(s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        frac = np.mod(s, 2.0 * np.pi) / (2.0 * np.pi)
        frac = np.clip(frac, 0.0, np.nextafter(1.0, 0.0))
        side = np.minimum((frac * n).astype(np.int64), n - 1)
        local = frac * n - side
        out = np.empty((s.size, 3))
        for k in range(n):
            mask = side == k
            if not mask.any():
                continue
            e1, e2 = frames[k]
            out[mask] = _descend(local[mask], depth, theta,
                                 corners[k], corners[k + 1], e1, e2)
        return out

    return SnowflakeCurve("circle", depth, theta, evaluator)


def _chordal_gap(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Chordal distance on S^1 between angle parameters."""
    return np.abs(np.exp(1j * a) - np.exp(1j * b))


def measure_holder_distortion(curve: SnowflakeCurve, pairs: int = 100_000,
                              seed: int = 2025, min_separation: float | None = None,
                              ) -> float:
    """Empirical two-sided Holder-1/2 constant over stratified pairs.

    Pairs are stratified so every dyadic separation scale from the curve's
    resolution (or min_separation) up to the domain diameter receives equal
    sample mass; returns the max over pairs of max(ratio, 1/ratio) where
    ratio = |phi(s) - phi(t)| / separation^(1/2).
    """
    if pairs < 100:
        raise ValueError("need at least 100 pairs")
    if min_separation is None:
        min_separation = curve.resolution
    if curve.variant == "line":
        domain = 1.0
        gap = lambda a, b: np.abs(a - b)
    else:
        domain = 2.0 * np.pi
        gap = _chordal_gap
    buckets = max(3, int(np.floor(np.log2(domain / min_separation))))
    per = max(1, pairs // buckets)
    rng = make_rng(seed, stream=7)

    worst = 1.0
    for b in range(buckets):
        sep = domain * 2.0 ** (-(b + 1))
        # stratified positions: one pair per equal sub-interval, jittered
        s = (np.arange(per) + rng.uniform(0.0, 1.0, per)) / per * (domain - sep)
        t = s + sep * rng.uniform(0.5, 1.0, per)
        d = np.linalg.norm(curve(s) - curve(t), axis=1)
        g = gap(s, t)
        keep = g >= min_separation
        if not keep.any():
            continue
        ratio = d[keep] / np.sqrt(g[keep])
        worst = max(worst, float(ratio.max()), float((1.0 / ratio).max()))
    return worst


def boundary_margin(curve: SnowflakeCurve, samples: int = 50_000,
                    seed: int = 2025) -> float:
    """Min over sampled t of dist(phi(t), boundary cube) / dist(phi(t), endpoints).

    Quantifies that the line curve approaches the boundary of [0,1]^3 only at
    its two endpoints; the measured value is pinned as the curve's margin
    constant. Line variant only.
    """
    if curve.variant != "line":
        raise ValueError("boundary margin is defined for the line variant")
    rng = make_rng(seed, stream=11)
    t = np.concatenate([
        rng.uniform(0.0, 1.0, samples),
        np.linspace(0.0, 1.0, 4097)[1:-1],
        np.geomspace(1e-9, 0.5, 4000),
        1.0 - np.geomspace(1e-9, 0.5, 4000),
    ])
    t = np.clip(t, 1e-12, 1.0 - 1e-12)
    pts = curve(t)
    dist_bd = np.minimum(pts, 1.0 - pts).min(axis=1)
    d_end = np.minimum(np.linalg.norm(pts - _E0, axis=1),
                       np.linalg.norm(pts - _E1, axis=1))
    return float(np.min(dist_bd / d_end))


def curve_to_csv(curve: SnowflakeCurve, t: np.ndarray) -> str:
    """CSV dump of (t, x, y, z) samples."""
    pts = curve(t)
    buf = io.StringIO()
    buf.write("t,x,y,z\n")
    for ti, (x, y, z) in zip(np.asarray(t, dtype=float), pts):
        buf.write(f"{float(ti)!r},{float(x)!r},{float(y)!r},{float(z)!r}\n")
    return buf.getvalue()
