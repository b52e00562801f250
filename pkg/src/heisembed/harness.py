"""Multi-scale pair sampling and empirical distortion reports.

A distortion report records, over a stratified pair sample, the directional
ratio maxima

    l_lower = max d_target / d_source      (expansion)
    l_upper = max d_source / d_target      (contraction, inverted)

and the headline constant l = max(l_lower, l_upper). Because the compared
constructions are only claimed up to scale, the report also carries the
optimal pre-scaling factor scale_opt = sqrt(l_upper / l_lower) and the
rescaled bi-Lipschitz constant l_scaled = sqrt(l_lower * l_upper), which is
scale-invariant. Reports are deterministic functions of (seed, config) and
serialize to byte-stable JSON.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .rng import make_rng

__all__ = [
    "PairSample",
    "DistortionReport",
    "sample_scale_pairs",
    "distortion_report",
    "run_bundle",
    "euclidean",
    "CoverageError",
    "report_to_json",
    "scale_plot_svg",
]

SCHEMA_VERSION = 1


class CoverageError(RuntimeError):
    """A separation bucket could not be filled by the domain sampler."""


def euclidean(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.asarray(a, float) - np.asarray(b, float), axis=-1)


@dataclass(frozen=True)
class PairSample:
    """Stratified source-point pairs with per-pair dyadic bucket labels."""

    a: np.ndarray
    b: np.ndarray
    d_source: np.ndarray
    bucket: np.ndarray
    scales: np.ndarray
    seed: int

    @property
    def size(self) -> int:
        return self.d_source.size


def sample_scale_pairs(sampler: Callable, buckets: int, quota: int, seed: int,
                       max_scale: float = 1.0, source_metric: Callable | None = None,
                       max_attempts: int = 100_000) -> PairSample:
    """Fill every dyadic separation bucket with `quota` pairs.

    sampler(rng, scale, size) -> (a, b) arrays of candidate source pairs
    aimed at separation ~scale; candidates are binned by their actual
    source-metric separation and rejected if they fall outside the bucket.
    Bucket k covers separations [max_scale 2^-(k+1), max_scale 2^-k).
    """
    if quota < 10:
        raise ValueError("quota must be >= 10")
    if buckets < 3:
        raise ValueError("need at least 3 buckets")
    rng = make_rng(seed, stream=1)
    scales = max_scale * 2.0 ** (-np.arange(1, buckets + 1, dtype=float))
    outs_a, outs_b, outs_d, outs_k = [], [], [], []
    for k, scale in enumerate(scales):
        got = 0
        attempts = 0
        lo, hi = scale, 2.0 * scale
        while got < quota:
            take = max(quota - got, 64)
            a, b = sampler(rng, scale, take)
            a = np.asarray(a, float)
            b = np.asarray(b, float)
            d = (source_metric(a, b) if source_metric is not None
                 else euclidean(a, b))
            keep = (d >= lo) & (d < hi)
            n_keep = int(keep.sum())
            if n_keep:
                sel = np.nonzero(keep)[0][: quota - got]
                outs_a.append(a[sel])
                outs_b.append(b[sel])
                outs_d.append(d[sel])
                outs_k.append(np.full(sel.size, k, dtype=np.int64))
                got += sel.size
            attempts += take
            if attempts > max_attempts and got < quota:
                raise CoverageError(
                    f"bucket {k} (separations [{lo:g}, {hi:g})) unreachable "
                    f"after {attempts} attempts")
    return PairSample(np.concatenate(outs_a), np.concatenate(outs_b),
                      np.concatenate(outs_d), np.concatenate(outs_k),
                      scales, seed)


@dataclass(frozen=True)
class DistortionReport:
    """Empirical two-sided Lipschitz data for one embedding."""

    embedding: str
    l_lower: float
    l_upper: float
    l: float
    l_product: float
    scale_opt: float
    l_scaled: float
    per_bucket: list = field(default_factory=list)
    pair_count: int = 0
    seed: int = 0
    config_hash: str = ""

    def as_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "embedding": self.embedding,
            "l_lower": self.l_lower,
            "l_upper": self.l_upper,
            "l": self.l,
            "l_product": self.l_product,
            "scale_opt": self.scale_opt,
            "l_scaled": self.l_scaled,
            "per_bucket": self.per_bucket,
            "pair_count": self.pair_count,
            "seed": self.seed,
            "config_hash": self.config_hash,
        }


def distortion_report(map_fn: Callable, source_metric: Callable | None,
                      target_metric: Callable, sample: PairSample,
                      embedding: str = "", config_hash: str = "") -> DistortionReport:
    """Exact directional ratio maxima of map_fn over the sample."""
    fa = map_fn(sample.a)
    fb = map_fn(sample.b)
    if not (np.all(np.isfinite(fa)) and np.all(np.isfinite(fb))):
        bad = np.nonzero(~np.all(np.isfinite(np.asarray(fa)), axis=-1))[0]
        where = sample.a[bad[0]] if bad.size else "unknown"
        raise ValueError(f"map failed (non-finite image) at source point {where}")
    ds = (sample.d_source if source_metric is None
          else np.asarray(source_metric(sample.a, sample.b), float))
    dt = np.asarray(target_metric(fa, fb), float)
    ratio = dt / ds
    l_lower = float(ratio.max())
    l_upper = float((1.0 / ratio).max())
    per_bucket = []
    for k, scale in enumerate(sample.scales):
        m = sample.bucket == k
        if not m.any():
            continue
        r = ratio[m]
        per_bucket.append({
            "bucket": int(k),
            "scale": float(scale),
            "pairs": int(m.sum()),
            "l_lower": float(r.max()),
            "l_upper": float((1.0 / r).max()),
        })
    l_product = l_lower * l_upper
    return DistortionReport(
        embedding=embedding,
        l_lower=l_lower,
        l_upper=l_upper,
        l=max(l_lower, l_upper),
        l_product=l_product,
        scale_opt=float(np.sqrt(l_upper / l_lower)),
        l_scaled=float(np.sqrt(l_product)),
        per_bucket=per_bucket,
        pair_count=sample.size,
        seed=sample.seed,
        config_hash=config_hash,
    )


def run_bundle(bundle, buckets: int, quota: int, seed: int,
               embedding: str = "", config_hash: str = "") -> DistortionReport:
    """Sample a bundle's domain and produce its distortion report."""
    sample = sample_scale_pairs(bundle.sampler, buckets, quota, seed,
                                max_scale=bundle.max_scale,
                                source_metric=bundle.source_metric)
    return distortion_report(bundle.map_fn, bundle.exact_metric,
                             bundle.target_metric, sample,
                             embedding=embedding or bundle.name,
                             config_hash=config_hash)


def report_to_json(report: DistortionReport | dict) -> str:
    """Byte-stable JSON: sorted keys, round-trip float repr, newline-terminated."""
    payload = report.as_dict() if isinstance(report, DistortionReport) else report
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def scale_plot_svg(report: DistortionReport, width: int = 640, height: int = 400) -> str:
    """Distortion-versus-scale plot (per-bucket ratio extremes), plain SVG."""
    rows = report.per_bucket
    if not rows:
        return ('<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d"/>'
                % (width, height))
    xs = np.log2([r["scale"] for r in rows])
    lo = np.array([1.0 / r["l_upper"] for r in rows])
    hi = np.array([r["l_lower"] for r in rows])
    ymin = min(lo.min(), 1.0 / report.l) * 0.8
    ymax = max(hi.max(), report.l) * 1.25
    pad = 46

    def px(x):
        return pad + (x - xs.min()) / max(xs.max() - xs.min(), 1e-9) * (width - 2 * pad)

    def py(y):
        ly = np.log10(y)
        l0, l1 = np.log10(ymin), np.log10(ymax)
        return height - pad - (ly - l0) / (l1 - l0) * (height - 2 * pad)

    def path(vals):
        return " ".join(f"{px(x):.2f},{py(v):.2f}" for x, v in zip(xs, vals))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<polyline points="{path(hi)}" fill="none" stroke="#c0392b" stroke-width="1.5"/>',
        f'<polyline points="{path(lo)}" fill="none" stroke="#2980b9" stroke-width="1.5"/>',
        f'<line x1="{pad}" y1="{py(1.0):.2f}" x2="{width - pad}" y2="{py(1.0):.2f}" '
        'stroke="#888" stroke-dasharray="4 3"/>',
        f'<text x="{pad}" y="18" font-size="12" font-family="monospace">'
        f'{report.embedding}: per-scale ratio range, L={report.l:.4g}</text>',
        f'<text x="{pad}" y="{height - 10}" font-size="11" font-family="monospace">'
        "log2(scale)</text>",
        "</svg>",
    ]
    return "\n".join(parts)
