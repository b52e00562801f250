"""Lines, planes, simplices: classification, exact isometries, distortion."""
import numpy as np
import pytest

import heisembed as he
from heisembed import affine, domains
from heisembed.harness import run_bundle
from heisembed.rng import make_rng

PIN_L_LINE = 8.5       # max empirical distortion over the line sweep
PIN_L_PLANE = 5.5      # same for planes
PIN_Z0_LO, PIN_Z0_HI = 0.55, 2.9         # lem z=0 comparison band
PIN_SNOWCONE_LO, PIN_SNOWCONE_HI = 0.3, 4.0  # snowcone comparison band


def test_classify_cases():
    vert = affine.classify_line(affine.LineSpec(np.array([0, 0, 1.0]), np.zeros(3)))
    assert vert.tag == "vertical"
    horiz = affine.classify_line(affine.LineSpec(np.array([1.0, 0, 0]), np.zeros(3)))
    assert horiz.tag == "horizontal"
    gen = affine.classify_line(
        affine.LineSpec(np.array([1.0, 0, 0]), np.array([0, 1.0, 0])))
    assert gen.tag == "generic"
    assert gen.kappa == pytest.approx(1.0)
    assert gen.lam == pytest.approx(np.sqrt(0.5))
    assert gen.mu == pytest.approx(2.0)


def test_classify_requires_unit_direction():
    with pytest.raises(ValueError):
        affine.LineSpec(np.array([1.0, 1.0, 0.0]), np.zeros(3))


def test_normalization_swap_recorded():
    case = affine.classify_line(
        affine.LineSpec(np.array([0.1, 0.9, np.sqrt(1 - 0.82)]),
                        np.array([0.3, -0.4, 0.7])))
    assert case.swapped is True
    assert case.c3_shift == pytest.approx(-0.7)  # swap negates z first


def test_line_dh_closed_form():
    line = affine.LineSpec(np.array([0.6, 0.48, 0.64]) /
                           np.linalg.norm([0.6, 0.48, 0.64]),
                           np.array([0.2, -1.0, 0.5]))
    case = affine.classify_line(line)
    rng = make_rng(41)
    t1 = rng.uniform(-3, 3, 1000)
    t2 = rng.uniform(-3, 3, 1000)
    lhs = he.d_h(line.point(t1), line.point(t2))
    rhs = case.kappa * np.abs(t1 - t2) + case.lam * np.sqrt(np.abs(t1 - t2))
    assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-12)


def test_horizontal_line_is_isometry(phi):
    line = affine.LineSpec(np.array([0.8, 0.6, 0.0]), np.array([0.0, 0.0, 2.0]))
    assert affine.classify_line(line).tag == "horizontal"
    emb, _ = affine.embed_line(line, phi)
    t = make_rng(42).uniform(-5, 5, 2000)
    u = make_rng(43).uniform(-5, 5, 2000)
    target = np.linalg.norm(emb(t) - emb(u), axis=1)
    source = he.d_h(line.point(t), line.point(u))
    # the square root in d_h amplifies point-rounding noise to ~1e-7 absolute
    assert np.allclose(target, source, rtol=1e-5, atol=1e-7)


def test_vertical_line_matches_snowflake(phi):
    line = affine.LineSpec(np.array([0.0, 0.0, 1.0]), np.array([1.0, 2.0, 0.0]))
    emb, case = affine.embed_line(line, phi)
    assert case.tag == "vertical"
    t = np.linspace(-1, 2, 64)
    assert np.allclose(emb(t), phi(t))


def test_generic_line_periodicity(phi):
    line = affine.LineSpec(np.array([1.0, 0, 0]), np.array([0, 1.0, 0]))
    emb, case = affine.embed_line(line, phi)
    t = np.linspace(-2, 2, 101)
    gap = emb(t + 1.0 / case.mu) - emb(t) - np.array([0, 0, case.kappa / case.mu])
    assert np.abs(gap).max() <= 1e-10


def test_plane_isometry_exact():
    spec = affine.graph_plane(0.7, -1.3, 0.4)
    rng = make_rng(44)
    w = np.column_stack([rng.uniform(-3, 3, (10_000, 2)), np.zeros(10_000)])
    w2 = np.column_stack([rng.uniform(-3, 3, (10_000, 2)), np.zeros(10_000)])
    gw = affine.plane_isometry(spec, w)
    gw2 = affine.plane_isometry(spec, w2)
    # image lies on the plane and distances are preserved exactly
    assert np.abs(gw[:, 2] - (spec.a * gw[:, 0] + spec.b * gw[:, 1] + spec.c)).max() \
        <= 1e-12
    d0 = he.d_h(w, w2)
    d1 = he.d_h(gw, gw2)
    assert np.max(np.abs(d1 - d0) / np.maximum(d0, 1e-12)) <= 1e-12
    # round trip
    assert np.allclose(affine.plane_isometry_inv(spec, gw), w, atol=1e-12)


def test_p0_origin_maps_to_zero(circle):
    spec = affine.graph_plane(0.0, 0.0, 0.0)
    emb = affine.embed_plane(spec, circle=circle)
    assert np.allclose(emb(np.zeros((1, 3))), 0.0)


def test_plane_membership_enforced(circle):
    spec = affine.graph_plane(1.0, 0.0, 0.0)
    emb = affine.embed_plane(spec, circle=circle)
    with pytest.raises(ValueError, match="plane"):
        emb(np.array([[0.0, 0.0, 5.0]]))


def test_vertical_plane_swap_flag():
    spec = affine.vertical_plane(4.0, 1.0)
    assert spec.swapped and abs(spec.b) < 1.0
    # containment agrees with the original plane y = 4x + 1
    pts = np.array([[0.0, 1.0, 0.3], [1.0, 5.0, -2.0]])
    assert bool(np.all(spec.contains(pts)))
    assert not bool(np.all(spec.contains(np.array([[0.0, 2.0, 0.0]]))))


def test_lem_z0_and_snowcone_bands(circle):
    """d_h on {z=0} and its image under the snowflake cone are both
    comparable to |t1-t2| + min(t1,t2)|s1-s2|^(1/2)."""
    rng = make_rng(45)
    n = 30_000
    t1 = rng.uniform(0, 2, n)
    t2 = rng.uniform(0, 2, n)
    s1 = rng.uniform(-np.pi, np.pi, n)
    s2 = s1 + np.exp(rng.uniform(np.log(1e-6), np.log(np.pi), n)) \
        * rng.choice([-1, 1], n)
    w1 = np.stack([t1 * np.cos(s1), t1 * np.sin(s1), 0 * t1], axis=-1)
    w2 = np.stack([t2 * np.cos(s2), t2 * np.sin(s2), 0 * t2], axis=-1)
    chord = np.abs(np.exp(1j * s1) - np.exp(1j * s2))
    model = np.abs(t1 - t2) + np.minimum(t1, t2) * np.sqrt(chord)
    m = model > 1e-9
    r = he.d_h(w1, w2)[m] / model[m]
    assert PIN_Z0_LO <= r.min() and r.max() <= PIN_Z0_HI
    cone1 = np.column_stack([t1[:, None] * circle(s1), t1])
    cone2 = np.column_stack([t2[:, None] * circle(s2), t2])
    r2 = np.linalg.norm(cone1 - cone2, axis=1)[m] / model[m]
    assert PIN_SNOWCONE_LO <= r2.min() and r2.max() <= PIN_SNOWCONE_HI


def test_line_uniformity_sweep(phi):
    """25 random lines across cases: per-line distortion below the pinned
    bound, max/min ratio below 10; Case-2 lines report L = 1."""
    rng = make_rng(46)
    ls = []
    for i in range(25):
        if i < 4:
            a = np.array([0, 0, 1.0])
            c = np.append(rng.uniform(-2, 2, 2), 0)
        elif i < 8:
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
        rep = run_bundle(domains.line_bundle(line, phi), 8, 40, 1000 + i)
        ls.append(rep.l)
        if affine.classify_line(line).tag == "horizontal":
            # fp floor: the sqrt in d_h turns point rounding into ~1e-6
            # relative noise at the finest separations (see ledger)
            assert rep.l == pytest.approx(1.0, abs=1e-5)
    ls = np.array(ls)
    assert ls.max() <= PIN_L_LINE
    assert ls.max() / ls.min() <= 10.0


def test_plane_uniformity_sweep(phi, circle):
    rng = make_rng(47)
    ls = []
    for i in range(25):
        if i % 3 == 0:
            spec = affine.vertical_plane(float(rng.uniform(-3, 3)),
                                         float(rng.uniform(-2, 2)))
        else:
            spec = affine.graph_plane(*rng.uniform(-2, 2, 3))
        rep = run_bundle(domains.plane_bundle(spec, phi, circle), 8, 40, 2000 + i)
        ls.append(rep.l)
    ls = np.array(ls)
    assert ls.max() <= PIN_L_PLANE
    assert ls.max() / ls.min() <= 10.0


def test_simplex_embeddings(phi, circle):
    # 0-simplex
    emb0, kind0 = affine.embed_simplex([np.array([1.0, 2.0, 3.0])])
    assert kind0 == "point"
    assert np.allclose(emb0(np.array([[1.0, 2.0, 3.0]])), 0.0)
    # 1-simplex on the x-axis: horizontal line restriction (isometry)
    emb1, kind1 = affine.embed_simplex(
        [np.zeros(3), np.array([1.0, 0, 0])], phi, circle)
    assert kind1 == "segment"
    t = make_rng(48).uniform(0, 1, (500, 1))
    pts = np.column_stack([t, np.zeros((500, 2))])
    img = emb1(pts)
    d = np.linalg.norm(img[:250] - img[250:], axis=1)
    src = he.d_h(pts[:250], pts[250:])
    assert np.allclose(d, src, rtol=1e-9)
    # 2-simplex in z = x + 1
    verts = [np.array([0.0, 0, 1.0]), np.array([1.0, 0, 2.0]),
             np.array([0.0, 1.0, 1.0])]
    emb2, kind2 = affine.embed_simplex(verts, phi, circle)
    assert kind2 == "triangle"
    rng = make_rng(49)
    bary = rng.dirichlet([1, 1, 1], 400)
    pts = bary @ np.array(verts)
    img = emb2(pts)
    d = np.linalg.norm(img[:200] - img[200:], axis=1)
    src = he.d_h(pts[:200], pts[200:])
    ratio = d / src
    l_emp = max(ratio.max(), (1 / ratio).max())
    assert l_emp <= PIN_L_PLANE
    # degenerate simplex rejected
    with pytest.raises(ValueError):
        affine.embed_simplex([np.zeros(3), np.zeros(3), np.array([1.0, 0, 0])])
