"""Pair samplers and map/metric bundles for each embedding domain.

Each bundle packs what the distortion harness needs: a sampler producing
candidate source-item pairs near a requested separation, the embedding map on
source items, the source quasi-distance, and the target (Euclidean) metric.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import affine, foliation, surfaces
from .core import d_h
from .harness import euclidean

__all__ = ["Bundle", "line_bundle", "plane_bundle", "chart_bundle",
           "sphere_bundle", "revolution_bundle", "saddle_bundle"]



def _steps(rng, scale, size, floor=0.01, cap=4.0):
    """Log-uniform candidate separations covering both the linear and the
    square-root response regimes of d_h."""
    lo = max(floor * scale * scale, 1e-14)
    hi = cap * scale
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size))

@dataclass(frozen=True)
class Bundle:
    name: str
    sampler: Callable
    map_fn: Callable
    source_metric: Callable          # used to bin candidate pairs by scale
    target_metric: Callable
    max_scale: float
    exact_metric: Callable = None    # recomputed on accepted pairs if set


def line_bundle(line: affine.LineSpec, snowflake=None, t_range=4.0,
                max_scale: float = 2.0) -> Bundle:
    emb, _case = affine.embed_line(line, snowflake)
    lo, hi = (-t_range, t_range) if np.isscalar(t_range) else t_range

    def sampler(rng, scale, size):
        s = rng.uniform(lo, hi, size)
        t = np.clip(s + _steps(rng, scale, size) * rng.choice([-1.0, 1.0], size),
                    lo, hi)
        return s[:, None], t[:, None]

    return Bundle(
        name="line",
        sampler=sampler,
        map_fn=lambda item: emb(item[:, 0]),
        source_metric=lambda a, b: d_h(line.point(a[:, 0]), line.point(b[:, 0])),
        target_metric=euclidean,
        max_scale=max_scale,
    )


def _plane_points(spec: affine.PlaneSpec, xy):
    """Lift sampler coordinates to R^3 points of the plane."""
    if spec.tag == "vertical":
        # coordinates are (x, z) in the (possibly swapped) chart
        x, z = xy[:, 0], xy[:, 1]
        pts = np.stack([x, spec.b * x + spec.c, z], axis=-1)
        if spec.swapped:
            pts = np.stack([pts[:, 1], pts[:, 0], -pts[:, 2]], axis=-1)
        return pts
    x, y = xy[:, 0], xy[:, 1]
    return np.stack([x, y, spec.a * x + spec.b * y + spec.c], axis=-1)


def plane_bundle(spec: affine.PlaneSpec, snowflake=None, circle=None,
                 box: float = 2.0) -> Bundle:
    emb = affine.embed_plane(spec, snowflake, circle)

    def sampler(rng, scale, size):
        a = rng.uniform(-box, box, (size, 2))
        ang = rng.uniform(0.0, 2 * np.pi, size)
        step = _steps(rng, scale, size)
        b = a + np.stack([np.cos(ang), np.sin(ang)], axis=-1) * step[:, None]
        return a, b

    return Bundle(
        name=f"plane:{spec.tag}",
        sampler=sampler,
        map_fn=lambda xy: emb(_plane_points(spec, xy)),
        source_metric=lambda a, b: d_h(_plane_points(spec, a), _plane_points(spec, b)),
        target_metric=euclidean,
        max_scale=2.0,
    )


class _ChartInterp:
    """Bilinear interpolation of a chart over a precomputed (u, v) grid.

    Used only to bin sampler candidates by approximate d_h separation; the
    final report re-evaluates accepted pairs by exact integration.
    """

    def __init__(self, chart, eps, nu=97, nv=49):
        self.u = np.linspace(-eps, eps, nu)
        self.v = np.linspace(-eps, eps, nv)
        um, vm = np.meshgrid(self.u, self.v, indexing="ij")
        self.vals = chart.g(um.ravel(), vm.ravel()).reshape(nu, nv, 3)

    def __call__(self, u, v):
        iu = np.clip(np.searchsorted(self.u, u) - 1, 0, self.u.size - 2)
        iv = np.clip(np.searchsorted(self.v, v) - 1, 0, self.v.size - 2)
        fu = ((u - self.u[iu]) / (self.u[1] - self.u[0]))[:, None]
        fv = ((v - self.v[iv]) / (self.v[1] - self.v[0]))[:, None]
        v00 = self.vals[iu, iv]
        v10 = self.vals[iu + 1, iv]
        v01 = self.vals[iu, iv + 1]
        v11 = self.vals[iu + 1, iv + 1]
        return ((1 - fu) * (1 - fv) * v00 + fu * (1 - fv) * v10
                + (1 - fu) * fv * v01 + fu * fv * v11)


def chart_bundle(chart: foliation.FoliationChart, snowflake=None,
                 shrink: float = 1.0) -> Bundle:
    emb = foliation.embed_regular_chart(chart, snowflake)
    eps = chart.epsilon * shrink
    interp = _ChartInterp(chart, eps)

    def sampler(rng, scale, size):
        a = rng.uniform(-eps, eps, (size, 2))
        ang = rng.uniform(0.0, 2 * np.pi, size)
        step = _steps(rng, scale, size)
        b = np.clip(a + np.stack([np.cos(ang), np.sin(ang)], axis=-1)
                    * step[:, None], -eps, eps)
        return a, b

    def points(items):
        return chart.g(items[:, 0], items[:, 1])

    return Bundle(
        name="chart",
        sampler=sampler,
        map_fn=lambda uv: emb(uv[:, 0], uv[:, 1]),
        source_metric=lambda a, b: d_h(interp(a[:, 0], a[:, 1]),
                                       interp(b[:, 0], b[:, 1])),
        target_metric=euclidean,
        max_scale=2.0 * eps,
        exact_metric=lambda a, b: d_h(points(a), points(b)),
    )


def sphere_bundle(chart: surfaces.SphereChart, circle=None) -> Bundle:
    emb = surfaces.embed_sphere(chart, circle)

    def sampler(rng, scale, size):
        s = rng.uniform(-np.pi, np.pi, size)
        t = rng.uniform(-0.999, 0.999, size)
        ds = _steps(rng, scale, size) * rng.choice([-1.0, 1.0], size)
        dt = _steps(rng, scale, size) * rng.choice([-1.0, 1.0], size)
        a = chart.point(s, t)
        b = chart.point(s + 2.0 * ds, np.clip(t + dt, -0.999, 0.999))
        return a, b

    return Bundle(
        name=f"sphere:{chart.kind}",
        sampler=sampler,
        map_fn=emb,
        source_metric=d_h,
        target_metric=euclidean,
        max_scale=1.0,
    )


def revolution_bundle(chart: surfaces.RevolutionChart, circle=None) -> Bundle:
    emb = surfaces.embed_revolution(chart, circle)
    t_max = chart.spec.t_max * 0.98

    def sampler(rng, scale, size):
        ang = rng.uniform(0.0, 2 * np.pi, size)
        rad = np.sqrt(rng.uniform(0.0, 1.0, size)) * t_max
        a = np.stack([rad * np.cos(ang), rad * np.sin(ang)], axis=-1)
        step = _steps(rng, scale, size)
        ang2 = rng.uniform(0.0, 2 * np.pi, size)
        b = a + np.stack([np.cos(ang2), np.sin(ang2)], axis=-1) * step[:, None]
        r = np.hypot(b[:, 0], b[:, 1])
        scl = np.where(r > t_max, t_max / np.maximum(r, 1e-300), 1.0)
        b = b * scl[:, None]
        return chart.spec.point(a), chart.spec.point(b)

    return Bundle(
        name="revolution",
        sampler=sampler,
        map_fn=emb,
        source_metric=d_h,
        target_metric=euclidean,
        max_scale=t_max,
    )


def saddle_bundle(family: int, snowflake=None, n_window=(0, 4),
                  m_window=(0, 3)) -> Bundle:
    emb = surfaces.embed_saddle_family(family, snowflake)
    ns = [n for n in range(n_window[0], n_window[1])
          if (n % 2 == 0) == (family in (1, 2))]
    ms = [m for m in range(m_window[0], m_window[1])
          if (m % 2 == 0) == (family in (1, 3))]

    def random_points(rng, size):
        n = np.array(ns)[rng.integers(0, len(ns), size)]
        m = np.array(ms)[rng.integers(0, len(ms), size)]
        sign = rng.choice([-1.0, 1.0], size)
        xb = rng.uniform(0.0, 1.0, size)
        yb = rng.uniform(1.0, 2.0, size)
        x = 2.0 ** (-n) * (xb + m)
        y = sign * 2.0 ** (-n) * yb
        return np.stack([x, y], axis=-1)

    def sampler(rng, scale, size):
        a = random_points(rng, size)
        fine = scale < 0.05
        if fine:
            # stay inside the same square: perturb base coordinates
            step = _steps(rng, scale, size)
            ang = rng.uniform(0, 2 * np.pi, size)
            b = a + np.stack([np.cos(ang) * step, np.sin(ang) * step], axis=-1)
            # clamp into the same square as a
            out = np.empty_like(b)
            for i in range(size):
                n, m, sg = surfaces.saddle_square_of(
                    np.array([a[i, 0], a[i, 1], 0.5 * a[i, 0] * a[i, 1]]))
                lo_x, hi_x = m * 2.0 ** (-n), (m + 1) * 2.0 ** (-n)
                lo_y, hi_y = 2.0 ** (-n), 2.0 ** (1 - n)
                out[i, 0] = np.clip(b[i, 0], lo_x, hi_x)
                out[i, 1] = sg * np.clip(sg * b[i, 1], lo_y, hi_y)
            b = out
        else:
            b = random_points(rng, size)
        return _saddle_lift(a), _saddle_lift(b)

    return Bundle(
        name=f"saddle:{family}",
        sampler=sampler,
        map_fn=emb,
        source_metric=d_h,
        target_metric=euclidean,
        max_scale=4.0,
    )


def _saddle_lift(xy):
    return surfaces.saddle_point(xy[..., 0], xy[..., 1])
