"""Laakso graphs: structure, embedding lemmas, porosity, distortion, SDP."""
import numpy as np
import pytest

import heisembed as he
from heisembed import laakso as lk
from heisembed.rng import make_rng


def test_gadget_counts():
    g1 = lk.build_laakso(1)
    assert g1.num_vertices == 10
    assert g1.edges.shape[0] == 10
    assert g1.metric([0])[0, 1] == pytest.approx(1.0)


def test_copy_tree_shape():
    g2 = lk.build_laakso(2)
    assert len(g2.copies_by_level[1]) == 10
    assert len(g2.copies_by_level[2]) == 100
    for node in g2.copies_by_level[0] + g2.copies_by_level[1]:
        if node.children:
            assert len(node.children) == 10
            assert sum(ch.forked for ch in node.children) == 8
    # terminals of every copy sit at graph distance 6^-level
    for lvl in (0, 1, 2):
        for node in g2.copies_by_level[lvl]:
            d = g2.metric([node.source])[0, node.sink]
            assert d == pytest.approx(6.0 ** (-lvl))


def test_terminal_distance_all_levels():
    for n in (1, 2, 3):
        g = lk.build_laakso(n)
        assert g.metric([0])[0, 1] == pytest.approx(1.0)


def test_level_bounds():
    with pytest.raises(ValueError):
        lk.build_laakso(0)
    with pytest.raises(ValueError):
        lk.build_laakso(6)


def test_minimal_m():
    m = lk.minimal_m()
    th = lk.theta_schedule(m, 1)[0]
    th_prev = lk.theta_schedule(m - 1, 1)[0]
    assert 100 * th < 1e-2 < 100 * th_prev


def test_embedding_rejects_small_m():
    g = lk.build_laakso(1)
    with pytest.raises(ValueError, match="too small"):
        lk.embed_laakso(g, m=100)


def test_edges_horizontal_except_absorbers(laakso3):
    """Canonical edges are exactly horizontal; absorber edges carry the
    recorded fork gaps (see the decisions ledger)."""
    g, emb = laakso3
    p = emb.positions[g.edges[:, 0]]
    q = emb.positions[g.edges[:, 1]]
    lift = 0.5 * (p[:, 0] * (q[:, 1] - p[:, 1]) - p[:, 1] * (q[:, 0] - p[:, 0]))
    defect = np.abs(q[:, 2] - p[:, 2] - lift)
    # more than half of all edges are exactly horizontal
    assert np.mean(defect <= 1e-15) > 0.5
    assert defect.max() <= 10.0 * emb.max_edge_defect + 1e-18
    assert emb.max_edge_defect <= 1e-6


def test_terminal_projection_bounds(laakso3):
    g, emb = laakso3
    for lvl in range(0, g.n + 1):
        for node in g.copies_by_level[lvl]:
            ps = emb.positions[node.source]
            pt = emb.positions[node.sink]
            sep = np.hypot(*(pt[:2] - ps[:2]))
            assert sep >= 6.0 ** (-lvl) / 2.0
            assert sep <= he.d_h(ps, pt) + 1e-12


def test_copy_diameter_bounds(laakso3):
    g, emb = laakso3
    for lvl in (1, 2, 3):
        for node in g.copies_by_level[lvl][:30]:
            ids = lk.copy_vertices(node)
            pts = emb.positions[ids]
            dh = he.d_h(pts[:, None, :], pts[None, :, :])
            diam = dh.max()
            assert 6.0 ** (-lvl) / 2.0 <= diam <= 6.0 ** (-lvl) + 1e-12


def test_one_lipschitz(laakso3):
    g, emb = laakso3
    assert lk.lipschitz_excess(g, emb) <= 1e-9


def test_convex_hull_containment(laakso3):
    """Projected copies lie in the hull of their station skeleton, up to a
    slack of order theta at the copy scale (symmetric-fork reconstruction;
    see the decisions ledger)."""
    from scipy.spatial import ConvexHull
    g, emb = laakso3
    for lvl in (0, 1):
        for node in g.copies_by_level[lvl][:12]:
            skel = [node.source, *node.stations, node.sink]
            hull_pts = emb.positions[skel][:, :2]
            hull = ConvexHull(hull_pts)
            eqs = hull.equations
            ids = lk.copy_vertices(node)
            pts = emb.positions[ids][:, :2]
            viol = (pts @ eqs[:, :2].T + eqs[:, 2]).max()
            assert viol <= 2e-3 * 6.0 ** (-lvl)


def test_fork_aperture(laakso3):
    """The two branches of each fork open a planar angle theta_[level] about
    the parent heading."""
    g, emb = laakso3
    for node in g.copies_by_level[0] + g.copies_by_level[1][:5]:
        a = emb.positions[node.children[1].source][:2]
        b_up = emb.positions[node.children[1].sink][:2]
        b_dn = emb.positions[node.children[5].sink][:2]
        v1 = b_up - a
        v2 = b_dn - a
        cosang = np.dot(v1, v2) / (np.linalg.norm(v1) * np.linalg.norm(v2))
        ang = np.arccos(np.clip(cosang, -1, 1))
        assert ang == pytest.approx(emb.theta[node.level], rel=1e-6)


def test_porosity_witnesses(laakso3):
    g, emb = laakso3
    for lvl in range(0, g.n):
        for node in g.copies_by_level[lvl]:
            center, radius, verdict = lk.porosity_witness(g, emb, node)
            assert verdict, (lvl, node.source)
    with pytest.raises(ValueError):
        lk.porosity_witness(g, emb, g.copies_by_level[g.n][0])


def test_cone_containment(laakso3):
    g, emb = laakso3
    rng = make_rng(81)
    nodes = [g.copies_by_level[lvl][i]
             for lvl in range(0, g.n)
             for i in rng.integers(0, len(g.copies_by_level[lvl]), 4)]
    for node in nodes:
        center, radius, _ = lk.porosity_witness(g, emb, node)
        assert lk.cone_check(emb, node, center, radius)


def test_flatness_budget(laakso3):
    g, emb = laakso3
    assert lk.flatness_budgets(g, emb) <= 1.0 / 100.0


def test_distortion_monotone_in_n():
    vals = []
    for n in (1, 2, 3):
        g = lk.build_laakso(n)
        emb = lk.embed_laakso(g)
        vals.append(lk.measure_graph_distortion(g, emb))
    assert vals[0] >= 1.0
    assert vals[0] <= vals[1] <= vals[2]
    # growth consistency against the stated asymptotic shape
    sizes = [10.0 ** n for n in (1, 2, 3)]
    shape = [np.log(s) ** 0.25 * np.sqrt(np.log(np.log(s))) for s in sizes]
    ratios = [v / s for v, s in zip(vals, shape)]
    assert max(ratios) / min(ratios) <= 10.0


def test_sdp_four_cycle():
    d4 = np.array([[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]],
                  dtype=float)
    rep = lk.sdp_min_distortion(d4)
    assert rep["min_distortion"] == pytest.approx(np.sqrt(2.0), abs=1e-4)
    assert rep["certified_gap"] <= 1e-6


def test_sdp_path_isometric():
    path = np.abs(np.subtract.outer(np.arange(6), np.arange(6))).astype(float)
    rep = lk.sdp_min_distortion(path)
    assert rep["min_distortion"] == pytest.approx(1.0, abs=1e-4)


def test_sdp_laakso_growth():
    r1 = lk.sdp_min_distortion(lk.build_laakso(1))
    r2 = lk.sdp_min_distortion(lk.build_laakso(2))
    assert r1["min_distortion"] >= 1.0
    assert r2["min_distortion"] > r1["min_distortion"]


def test_sdp_size_guard():
    g3 = lk.build_laakso(3)
    with pytest.raises(ValueError, match="200"):
        lk.sdp_min_distortion(g3)
