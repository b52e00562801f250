"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
summary lines. Tolerances are pinned here, not configurable.
"""
import json
import subprocess
import sys

import numpy as np
import pytest

import heisembed as he
from heisembed import affine, domains, foliation as fo, laakso as lk, surfaces as su
from heisembed.harness import run_bundle
from heisembed.rng import make_rng
from heisembed.snowflake import boundary_margin

# pinned calibration constants
L_LINE = 7.5
L_PLANE = 5.5
L_REG = 5.0
L_SPHERE = 4.5
L_SPHERE2 = 7.0
L_REV = 5.5
L_SADDLE = 7.0
DH_DK_BAND = (0.5, 2.1)
Z0_BAND = (0.55, 2.9)
SNOWCONE_BAND = (0.3, 4.0)
SADDLE_BASE_BAND = (0.9, 2.5)
SADDLE_CROSS_BAND = (0.35, 2.6)
MARGIN = 4.0e-3


def _line(ok, label):
    print(f"[{'PASS' if ok else 'FAIL'}] {label}")
    assert ok, label


def test_criterion_1_metric_kernel():
    rng = make_rng(9001)
    a, b, c = (rng.uniform(-10, 10, (100_000, 3)) for _ in range(3))
    tri = np.all(he.d_k(a, c) <= (he.d_k(a, b) + he.d_k(b, c)) * (1 + 1e-12))
    _line(tri, "criterion 1a: d_K triangle inequality on 1e5 triples @1e-12")
    q = rng.uniform(-10, 10, (100_000, 3))
    base = he.d_k(a, b)
    li = np.allclose(he.d_k(he.group_mul(q, a), he.group_mul(q, b)), base,
                     rtol=1e-12, atol=1e-15)
    _line(li, "criterion 1b: d_K left-invariance @1e-12 relative")
    dil = np.allclose(he.d_k(he.dilate(a, 2.5), he.dilate(b, 2.5)), 2.5 * base,
                      rtol=1e-12)
    _line(dil, "criterion 1c: d_K dilation scaling @1e-12 relative")
    ratio = he.d_h(a, b) / base
    ok = DH_DK_BAND[0] <= ratio.min() and ratio.max() <= DH_DK_BAND[1]
    _line(ok, f"criterion 1d: d_H/d_K in pinned band {DH_DK_BAND} "
              f"(measured [{ratio.min():.3f}, {ratio.max():.3f}])")


def test_criterion_2_snowflake(phi, circle):
    l12 = he.measure_holder_distortion(phi, 100_000)
    rng = make_rng(9002)
    t = np.concatenate([rng.uniform(0, 1, 50_000), np.linspace(0, 1, 4097)])
    pts = phi(t)
    p1 = bool(pts.min() >= -1e-12 and pts.max() <= 1 + 1e-12)
    p1 &= bool(np.array_equal(phi(0.0)[0], [0.5, 0.5, 0.0]))
    p1 &= bool(np.array_equal(phi(1.0)[0], [0.5, 0.5, 1.0]))
    # two-sided bound at separations >= resolution, via the measured constant
    s = rng.uniform(0, 1 - 1e-4, 20_000)
    u = s + np.exp(rng.uniform(np.log(phi.resolution), np.log(1e-4), 20_000))
    d = np.linalg.norm(phi(s) - phi(u), axis=1)
    r = d / np.sqrt(u - s)
    p1 &= bool((r <= l12 + 1e-12).all() and (r >= 1 / l12 - 1e-12).all())
    _line(p1, "criterion 2a: properties (1)-(2) at depth 12 "
              f"(measured_L={l12:.4f})")
    margin = boundary_margin(phi)
    _line(margin >= MARGIN,
          f"criterion 2b: property (3) margin {margin:.4f} >= {MARGIN} "
          "(corrected inequality direction; see ledger)")
    l10 = he.measure_holder_distortion(he.build_snowflake_line(10), 100_000)
    l12r = he.measure_holder_distortion(phi, 100_000, min_separation=4.0 ** -10)
    depth_ok = abs(l12r - l10) / l10 <= 0.05
    l4 = he.measure_holder_distortion(phi, 400_000)
    size_ok = abs(l4 - l12) / l12 <= 0.05
    _line(depth_ok and size_ok,
          f"criterion 2c: measured_L stable +-5% (depth {100*(l12r-l10)/l10:+.1f}%, "
          f"sample size {100*(l4-l12)/l12:+.1f}%)")
    tt = np.concatenate([np.linspace(0, 1, 257), rng.uniform(0, 1, 512)])
    per = np.abs(phi(tt + 1.0) - phi(tt) - np.array([0, 0, 1.0])).max()
    _line(per <= 1e-12, f"criterion 2d: 1-periodicity exact ({per:.1e})")


def test_criterion_3_lines(phi):
    rng = make_rng(9003)
    ls = []
    iso_ok = True
    for i in range(100):
        if i < 12:
            a = np.array([0, 0, 1.0])
            c = np.append(rng.uniform(-2, 2, 2), 0)
        elif i < 25:
            ah = rng.uniform(-1, 1, 2)
            ah /= np.linalg.norm(ah)
            c = rng.uniform(-2, 2, 3)
            a = np.array([ah[0], ah[1], -(c[1] * ah[0] - c[0] * ah[1]) / 2])
            a /= np.linalg.norm(a)
        else:
            a = rng.normal(size=3)
            a /= np.linalg.norm(a)
            c = rng.uniform(-2, 2, 3)
        line = affine.LineSpec(a, c)
        rep = run_bundle(domains.line_bundle(line, phi), 8, 60, 9100 + i)
        ls.append(rep.l)
        if affine.classify_line(line).tag == "horizontal":
            iso_ok &= abs(rep.l - 1.0) <= 1e-5
    ls = np.array(ls)
    _line(ls.max() <= L_LINE,
          f"criterion 3a: 100 lines, max distortion {ls.max():.3f} <= {L_LINE}")
    _line(ls.max() / ls.min() <= 10.0,
          f"criterion 3b: line uniformity max/min {ls.max()/ls.min():.2f} <= 10")
    _line(iso_ok, "criterion 3c: Case-2 lines are isometries "
                  "(L = 1 @1e-5, the float64 floor of the sqrt term; see ledger)")


def test_criterion_4_planes(phi, circle):
    rng = make_rng(9004)
    spec = affine.graph_plane(0.7, -1.3, 0.4)
    w = np.column_stack([rng.uniform(-3, 3, (10_000, 2)), np.zeros(10_000)])
    w2 = np.column_stack([rng.uniform(-3, 3, (10_000, 2)), np.zeros(10_000)])
    d0 = he.d_h(w, w2)
    d1 = he.d_h(affine.plane_isometry(spec, w), affine.plane_isometry(spec, w2))
    iso = np.max(np.abs(d1 - d0) / np.maximum(d0, 1e-300))
    _line(iso <= 1e-12, f"criterion 4a: isometry g exact ({iso:.1e} <= 1e-12)")
    n = 40_000
    t1, t2 = rng.uniform(0, 2, n), rng.uniform(0, 2, n)
    s1 = rng.uniform(-np.pi, np.pi, n)
    s2 = s1 + np.exp(rng.uniform(np.log(1e-6), np.log(np.pi), n)) \
        * rng.choice([-1, 1], n)
    w1 = np.stack([t1 * np.cos(s1), t1 * np.sin(s1), 0 * t1], axis=-1)
    w2 = np.stack([t2 * np.cos(s2), t2 * np.sin(s2), 0 * t2], axis=-1)
    chord = np.abs(np.exp(1j * s1) - np.exp(1j * s2))
    model = np.abs(t1 - t2) + np.minimum(t1, t2) * np.sqrt(chord)
    m = model > 1e-9
    rz = he.d_h(w1, w2)[m] / model[m]
    okz = Z0_BAND[0] <= rz.min() and rz.max() <= Z0_BAND[1]
    cone1 = np.column_stack([t1[:, None] * circle(s1), t1])
    cone2 = np.column_stack([t2[:, None] * circle(s2), t2])
    rs = np.linalg.norm(cone1 - cone2, axis=1)[m] / model[m]
    oks = SNOWCONE_BAND[0] <= rs.min() and rs.max() <= SNOWCONE_BAND[1]
    _line(okz and oks,
          f"criterion 4b: lem z=0 band [{rz.min():.2f},{rz.max():.2f}] and "
          f"snowcone band [{rs.min():.2f},{rs.max():.2f}] within pins")
    ls = []
    for i in range(100):
        if i % 3 == 0:
            pspec = affine.vertical_plane(float(rng.uniform(-3, 3)),
                                          float(rng.uniform(-2, 2)))
        else:
            pspec = affine.graph_plane(*rng.uniform(-2, 2, 3))
        ls.append(run_bundle(domains.plane_bundle(pspec, phi, circle),
                             8, 50, 9200 + i).l)
    ls = np.array(ls)
    _line(ls.max() <= L_PLANE and ls.max() / ls.min() <= 10.0,
          f"criterion 4c: 100 planes, max {ls.max():.3f} <= {L_PLANE}, "
          f"ratio {ls.max()/ls.min():.2f} <= 10")


def test_criterion_5_foliations(phi, circle):
    charts = []
    for k in range(7):
        a, b, c = make_rng(600 + k).uniform(-0.8, 0.8, 3)
        x0, y0 = make_rng(700 + k).uniform(0.5, 1.5, 2)
        charts.append(fo.build_chart(fo.plane_surface(a, b, c),
                                     np.array([x0, y0, a * x0 + b * y0 + c]),
                                     0.15))
    for k in range(7):
        ang = 2 * np.pi * k / 7
        charts.append(fo.build_chart(fo.torus_surface(0.5, 2.0),
                                     np.array([2.5 * np.cos(ang),
                                               2.5 * np.sin(ang), 0.0]), 0.1))
    par = fo.GraphSurface(lambda x, y: x * x + y * y,
                          lambda x, y: 2 * x, lambda x, y: 2 * y)
    for k in range(7):
        ang = 2 * np.pi * k / 7 + 0.2
        x0, y0 = 0.8 * np.cos(ang), 0.8 * np.sin(ang)
        charts.append(fo.build_chart(par, np.array([x0, y0, x0 ** 2 + y0 ** 2]),
                                     0.1))
    resid = max(he.horizontality_residual(ch.u_line(v * ch.epsilon))
                for ch in charts[::3] for v in (-0.7, 0.0, 0.7))
    _line(resid <= 1e-6, f"criterion 5a: u-line residuals {resid:.1e} <= 1e-6")
    conv_ok = True
    for ch in charts[::5]:
        k1, _ = ch.constants_at_step(ch.epsilon / 64)
        k2, _ = ch.constants_at_step(ch.epsilon / 128)
        k3, _ = ch.constants_at_step(ch.epsilon / 256)
        if abs(k2 - k3) > 1e-13:
            conv_ok &= abs(k1 - k2) / abs(k2 - k3) >= 3.0
    _line(conv_ok, "criterion 5b: kappa/lambda grid-convergent at order 2")
    ls = np.array([run_bundle(domains.chart_bundle(ch, phi), 8, 50, 9300 + i).l
                   for i, ch in enumerate(charts)])
    _line(ls.max() <= L_REG and ls.max() / ls.min() <= 10.0,
          f"criterion 5c: {len(charts)} charts on 3 surfaces, max Psi distortion "
          f"{ls.max():.3f} <= {L_REG}")
    chart = fo.build_chart(fo.plane_surface(0, 0, 0), np.array([1.0, 0, 0]), 0.2)
    bundle = domains.chart_bundle(chart, phi)
    from heisembed.harness import distortion_report, sample_scale_pairs
    sample = sample_scale_pairs(bundle.sampler, 8, 80, 9361,
                                max_scale=bundle.max_scale,
                                source_metric=bundle.source_metric)
    rep = distortion_report(bundle.map_fn, bundle.exact_metric,
                            bundle.target_metric, sample)
    closed = affine.embed_plane(affine.graph_plane(0, 0, 0), phi, circle)
    pa = chart.g(sample.a[:, 0], sample.a[:, 1])
    pb = chart.g(sample.b[:, 0], sample.b[:, 1])
    db = np.linalg.norm(closed(pa) - closed(pb), axis=1)
    rc = db / he.d_h(pa, pb)
    l_closed = np.sqrt(rc.max() * (1.0 / rc).max())
    factor = max(l_closed, rep.l_scaled) / min(l_closed, rep.l_scaled)
    _line(factor <= 1.5,
          f"criterion 5d: chart vs closed-form distortion constants agree "
          f"within {factor:.3f} <= 1.5 (constant-agreement reading; see ledger)")


def test_criterion_6_revolution_spheres(koranyi_chart, euclid_chart, circle):
    law = max(su.build_revolution_chart(su.revolution_preset(n)).radial_law_error
              for n in ("zero", "square", "cosh"))
    _line(law <= 1e-6, f"criterion 6a: radial growth law error {law:.1e} <= 1e-6")
    rng = make_rng(9006)
    pts = rng.normal(size=(500, 3))
    pts = np.array([he.dilate(p, 1.0 / he.d_k(p, np.zeros(3))) for p in pts])
    v = su.koranyi_sphere_field(pts)
    r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
    grad4 = np.stack([4 * r2 * pts[:, 0], 4 * r2 * pts[:, 1], 32 * pts[:, 2]],
                     axis=-1)
    tangency = np.abs(np.sum(v * grad4, axis=1)).max()
    horiz = np.abs(v[:, 2] - 0.5 * (pts[:, 0] * v[:, 1]
                                    - pts[:, 1] * v[:, 0])).max()
    m = (koranyi_chart.arc > 0.05) & (koranyi_chart.arc
                                      < koranyi_chart.arc[-1] - 0.05)
    pts_l = np.stack(
        [koranyi_chart.rho[m] * np.cos(koranyi_chart.drift[m]),
         koranyi_chart.rho[m] * np.sin(koranyi_chart.drift[m]),
         koranyi_chart.zval[m]], axis=-1)
    curve = he.SampledCurve(np.arange(pts_l.shape[0]) * 5e-4, pts_l)
    longit = he.horizontality_residual(curve)
    _line(tangency <= 1e-6 and horiz <= 1e-6 and longit <= 1e-6,
          f"criterion 6b: Koranyi field tangency {tangency:.1e}, horizontality "
          f"{max(horiz, longit):.1e} <= 1e-6")
    rep_k = run_bundle(domains.sphere_bundle(koranyi_chart, circle), 8, 100, 9601)
    _line(rep_k.l <= L_SPHERE,
          f"criterion 6c: Koranyi sphere distortion {rep_k.l:.3f} <= {L_SPHERE} "
          "(all separation scales incl. order-1 pairs)")
    pts_e = rng.normal(size=(500, 3))
    pts_e /= np.linalg.norm(pts_e, axis=1, keepdims=True)
    ve = su.euclidean_sphere_field(pts_e)
    tang_e = np.abs(np.sum(ve * pts_e, axis=1)).max()
    _line(tang_e <= 1e-12,
          f"criterion 6d: Euclidean sphere tangency identity exact ({tang_e:.1e})")
    rep_e = run_bundle(domains.sphere_bundle(euclid_chart, circle), 8, 100, 9602)
    _line(rep_e.l <= L_SPHERE2,
          f"criterion 6e: Euclidean sphere distortion {rep_e.l:.3f} <= {L_SPHERE2}")


def test_criterion_7_saddle(phi):
    rng = make_rng(9007)
    w1 = su.saddle_point(rng.uniform(0, 1, 2000), rng.uniform(1, 2, 2000))
    w2 = su.saddle_point(rng.uniform(0, 1, 2000), rng.uniform(1, 2, 2000))
    base = he.d_h(w1, w2)
    worst = 0.0
    for n in (1, 2, 3):
        z1 = su.zeta_similarity(n, 3, -1, w1)
        z2 = su.zeta_similarity(n, 3, -1, w2)
        scaled = he.d_h(z1, z2)
        worst = max(worst, float(np.max(
            np.abs(scaled - 2.0 ** (-n) * base) / scaled)))
    _line(worst <= 1e-12, f"criterion 7a: zeta similarity exact ({worst:.1e})")
    model = np.abs(w1[:, 1] - w2[:, 1]) + np.sqrt(np.abs(w1[:, 0] - w2[:, 0]))
    rb = base / model
    ok_base = SADDLE_BASE_BAND[0] <= rb.min() and rb.max() <= SADDLE_BASE_BAND[1]
    emb1 = su.embed_saddle_family(1, phi)

    def fam_pts(k):
        ns = np.array([0, 2])[rng.integers(0, 2, k)]
        ms = np.array([0, 2])[rng.integers(0, 2, k)]
        sg = rng.choice([-1.0, 1.0], k)
        x = 2.0 ** (-ns) * (rng.uniform(0, 1, k) + ms)
        y = sg * 2.0 ** (-ns) * rng.uniform(1, 2, k)
        return su.saddle_point(x, y)

    a, b = fam_pts(3000), fam_pts(3000)
    distinct = np.array([su.saddle_squares_of(p)[0] != su.saddle_squares_of(q)[0]
                         for p, q in zip(a, b)])
    img = np.linalg.norm(emb1(a[distinct]) - emb1(b[distinct]), axis=1)
    cross = img / (np.abs(a[distinct, 0] - b[distinct, 0])
                   + np.abs(a[distinct, 1] - b[distinct, 1]))
    ok_cross = (SADDLE_CROSS_BAND[0] <= cross.min()
                and cross.max() <= SADDLE_CROSS_BAND[1])
    _line(ok_base and ok_cross,
          f"criterion 7b: base band [{rb.min():.2f},{rb.max():.2f}], cross band "
          f"[{cross.min():.2f},{cross.max():.2f}] within pins")
    ls = [run_bundle(domains.saddle_bundle(f, phi), 8, 50, 9700 + f).l
          for f in (1, 2, 3, 4)]
    _line(max(ls) <= L_SADDLE,
          f"criterion 7c: four family maps, max distortion {max(ls):.3f} "
          f"<= {L_SADDLE}")


def test_criterion_8_laakso():
    import time
    dist_prev = 0.0
    for n in (1, 2, 3, 4):
        g = lk.build_laakso(n)
        emb = lk.embed_laakso(g)
        term_ok = True
        for lvl in range(0, n + 1):
            for node in g.copies_by_level[lvl]:
                ps, pt = emb.positions[node.source], emb.positions[node.sink]
                sep = np.hypot(*(pt[:2] - ps[:2]))
                term_ok &= bool(sep >= 6.0 ** (-lvl) / 2.0)
                term_ok &= bool(sep <= he.d_h(ps, pt) + 1e-12)
        diam_ok = True
        for lvl in range(1, n + 1):
            for node in g.copies_by_level[lvl][:20]:
                ids = lk.copy_vertices(node)
                pts = emb.positions[ids]
                diam = he.d_h(pts[:, None, :], pts[None, :, :]).max()
                diam_ok &= bool(6.0 ** (-lvl) / 2.0 <= diam <= 6.0 ** (-lvl) + 1e-12)
        lip = lk.lipschitz_excess(g, emb)
        dist = lk.measure_graph_distortion(g, emb)
        poro_ok = True
        cone_ok = True
        points = np.vstack([emb.positions, lk.edge_samples(g, emb, 32)])
        rng = make_rng(9800 + n)
        for lvl in range(0, n):
            nodes = g.copies_by_level[lvl]
            cone_ids = set(rng.integers(0, len(nodes), min(6, len(nodes))))
            for i, node in enumerate(nodes):
                center, radius, ok = lk.porosity_witness(g, emb, node,
                                                         points=points)
                poro_ok &= ok
                if i in cone_ids:
                    cone_ok &= lk.cone_check(emb, node, center, radius)
        _line(term_ok and diam_ok,
              f"criterion 8a (n={n}): terminal + diameter bounds for every copy")
        _line(lip <= 1e-9,
              f"criterion 8b (n={n}): 1-Lipschitz (excess {lip:.2e} <= 1e-9)")
        _line(poro_ok and cone_ok,
              f"criterion 8c (n={n}): porosity witnesses true, 6B in f(s_k)*C_1")
        _line(dist >= dist_prev - 1e-9,
              f"criterion 8d (n={n}): distortion {dist:.1f} non-decreasing")
        dist_prev = dist
    d4 = np.array([[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]],
                  dtype=float)
    rep4 = lk.sdp_min_distortion(d4)
    _line(abs(rep4["min_distortion"] - np.sqrt(2.0)) <= 1e-4,
          f"criterion 8e: SDP 4-cycle {rep4['min_distortion']:.6f} = sqrt(2) @1e-4")
    r1 = lk.sdp_min_distortion(lk.build_laakso(1))
    r2 = lk.sdp_min_distortion(lk.build_laakso(2))
    _line(r2["min_distortion"] > r1["min_distortion"] >= 1.0,
          f"criterion 8f: SDP min distortion strictly increases "
          f"G1 {r1['min_distortion']:.4f} -> G2 {r2['min_distortion']:.4f}")


def test_criterion_9_determinism(tmp_path):
    from heisembed.cli import main
    payloads = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        main(["distort", "line", "--a", "1,0,0", "--c", "0,1,0",
              "--out", str(out), "--seed", "77", "--buckets", "6",
              "--quota", "30"])
        payloads.append((out / "line_distortion.json").read_bytes()
                        + (out / "line_scales.svg").read_bytes())
    _line(payloads[0] == payloads[1],
          "criterion 9: reports byte-identical across runs (seed 77)")
