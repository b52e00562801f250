"""Laakso graphs, their piecewise-horizontal Heisenberg embedding, porosity
witnesses, and distortion measurement (exact all-pairs and an SDP oracle).

The level-n graph replaces every edge of the level-(n-1) graph by a ten-edge
gadget: a subdivided unit interval whose first and last sixths stay single
(the two non-forked children) while the middle two thirds double into two
parallel four-edge branches meeting at fork points; all level-n edges have
length 6^-n and the terminals stay at distance 1.

The embedding lays each copy out in the plane with its two branches opened
symmetrically by half the fork angle theta_j = 1/(sqrt(M+j) log(M+j)) on
either side of the parent heading, and lifts edges horizontally. The two
branches of a fork enclose a thin rhombus, so their horizontal lifts disagree
at the reunion vertex by the enclosed area; the non-canonical branch absorbs
that gap, spread evenly down its subtree so that every absorbed edge carries
only an O(gap / 6^(n-i)) vertical defect. Canonical-side edges are exactly
horizontal.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import shortest_path

from .core import Cone, cone_contains, d_h, d_k, group_mul
from .rng import make_rng

__all__ = [
    "CopyNode",
    "LaaksoStructure",
    "build_laakso",
    "theta_schedule",
    "minimal_m",
    "HeisEmbedding",
    "embed_laakso",
    "porosity_witness",
    "cone_check",
    "flatness_budgets",
    "measure_graph_distortion",
    "lipschitz_excess",
    "sdp_min_distortion",
]

MAX_LEVEL = 5


@dataclass
class CopyNode:
    """One copy in the recursive structure; leaves (level n) are edges."""

    level: int
    source: int
    sink: int
    forked: bool
    children: list = field(default_factory=list)
    stations: list = field(default_factory=list)  # internal vertex ids (a, e, ...)


@dataclass
class LaaksoStructure:
    """Level-n Laakso graph with its copy tree; edge length 6^-n."""

    n: int
    num_vertices: int
    edges: np.ndarray
    root: CopyNode
    copies_by_level: list

    @property
    def edge_length(self) -> float:
        return 6.0 ** (-self.n)

    def graph(self) -> sp.csr_matrix:
        e = self.edges
        data = np.ones(e.shape[0])
        m = sp.coo_matrix((data, (e[:, 0], e[:, 1])),
                          shape=(self.num_vertices, self.num_vertices))
        return (m + m.T).tocsr()

    def hop_counts(self, sources) -> np.ndarray:
        return shortest_path(self.graph(), method="D", unweighted=True,
                             indices=sources)

    def metric(self, sources) -> np.ndarray:
        """Graph distances from the given source vertices to all vertices."""
        return self.hop_counts(sources) * self.edge_length


def build_laakso(n: int) -> LaaksoStructure:
    """Build the level-n graph (1 <= n <= 5)."""
    if not (1 <= n <= MAX_LEVEL):
        raise ValueError(f"level must be in 1..{MAX_LEVEL} "
                         "(vertex count grows tenfold per level)")
    counter = [2]  # 0 = source, 1 = sink
    edges = []
    copies_by_level = [[] for _ in range(n + 1)]

    def fresh():
        counter[0] += 1
        return counter[0] - 1

    def expand(level, s, t, forked):
        node = CopyNode(level, s, t, forked)
        copies_by_level[level].append(node)
        if level == n:
            edges.append((s, t))
            return node
        a, e = fresh(), fresh()
        b1, c1, d1 = fresh(), fresh(), fresh()
        b2, c2, d2 = fresh(), fresh(), fresh()
        node.stations = [a, b1, c1, d1, b2, c2, d2, e]
        spec = [
            (s, a, False),
            (a, b1, True), (b1, c1, True), (c1, d1, True), (d1, e, True),
            (a, b2, True), (b2, c2, True), (c2, d2, True), (d2, e, True),
            (e, t, False),
        ]
        node.children = [expand(level + 1, u, v, f) for (u, v, f) in spec]
        return node

    root = expand(0, 0, 1, False)
    return LaaksoStructure(n=n, num_vertices=counter[0],
                           edges=np.array(edges, dtype=np.int64),
                           root=root, copies_by_level=copies_by_level)


def theta_schedule(m: int, levels: int) -> np.ndarray:
    """theta_j = 1 / (sqrt(M + j) log(M + j)) for j = 1..levels."""
    j = np.arange(1, levels + 1, dtype=float)
    return 1.0 / (np.sqrt(m + j) * np.log(m + j))


def minimal_m() -> int:
    """Smallest integer M with 100 theta_1 < 1/100, i.e. sqrt(M+1) log(M+1) > 1e4."""
    lo, hi = 1, 10 ** 8
    while lo < hi:
        mid = (lo + hi) // 2
        if np.sqrt(mid + 1.0) * np.log(mid + 1.0) > 1e4:
            hi = mid
        else:
            lo = mid + 1
    return lo


@dataclass
class HeisEmbedding:
    """Vertex images in the Heisenberg group plus per-copy frame records."""

    m: int
    theta: np.ndarray
    planar_scale: float
    positions: np.ndarray           # (num_vertices, 3)
    headings: dict                  # id(copy) -> (source planar, heading angle)
    fork_gaps: list                 # per-fork absorbed vertical gap magnitudes
    max_edge_defect: float

    def point(self, vertex: int) -> np.ndarray:
        return self.positions[vertex]


def _chord_lengths(n: int, theta: np.ndarray, planar_scale: float) -> np.ndarray:
    d = np.empty(n + 1)
    d[0] = planar_scale
    for i in range(1, n + 1):
        d[i] = d[i - 1] / (2.0 + 4.0 * np.cos(theta[i - 1] / 2.0))
    return d


def embed_laakso(g: LaaksoStructure, m: int | None = None,
                 planar_scale: float = 0.7) -> HeisEmbedding:
    """Recursive planar layout + horizontal lift with spread gap absorption."""
    if m is None:
        m = minimal_m()
    theta = theta_schedule(m, g.n)
    if 100.0 * theta[0] >= 1.0 / 100.0:
        raise ValueError(
            f"M={m} too small: need 100 theta_1 < 1/100, got theta_1={theta[0]:g}")
    d = _chord_lengths(g.n, theta, planar_scale)

    nv = g.num_vertices
    planar = np.full((nv, 2), np.nan)
    headings: dict = {}

    def set_planar(v, xy):
        if np.isnan(planar[v, 0]):
            planar[v] = xy

    def layout(node: CopyNode, origin: np.ndarray, alpha: float):
        headings[id(node)] = (origin.copy(), alpha)
        lvl = node.level
        set_planar(node.source, origin)
        if lvl == g.n:
            set_planar(node.sink, origin + d[lvl] * _dir(alpha))
            return
        dc = d[lvl + 1]
        th = theta[lvl]  # fork angle for the branch children (level lvl+1)
        up, dn = alpha + th / 2.0, alpha - th / 2.0
        a = origin + dc * _dir(alpha)
        b1 = a + dc * _dir(up)
        c1 = b1 + dc * _dir(up)
        d1 = c1 + dc * _dir(dn)
        e = d1 + dc * _dir(dn)
        b2 = a + dc * _dir(dn)
        c2 = b2 + dc * _dir(dn)
        d2 = c2 + dc * _dir(up)
        t = e + dc * _dir(alpha)
        for v, xy in zip(node.stations, [a, b1, c1, d1, b2, c2, d2, e]):
            set_planar(v, xy)
        set_planar(node.sink, t)
        starts = [origin, a, b1, c1, d1, a, b2, c2, d2, e]
        angs = [alpha, up, up, dn, dn, dn, dn, up, up, alpha]
        for child, st, an in zip(node.children, starts, angs):
            layout(child, st, an)

    layout(g.root, np.array([0.0, 0.0]), 0.0)

    # natural vertical increments (horizontal lift along the canonical route)
    natural: dict = {}

    def chord_lift(u, v):
        pu, pv = planar[u], planar[v]
        return 0.5 * (pu[0] * (pv[1] - pu[1]) - pu[1] * (pv[0] - pu[0]))

    def compute_natural(node: CopyNode) -> float:
        if node.level == g.n:
            val = chord_lift(node.source, node.sink)
        else:
            for ch in node.children:
                compute_natural(ch)
            serial = [node.children[i] for i in (0, 1, 2, 3, 4, 9)]
            val = sum(natural[id(ch)] for ch in serial)
        natural[id(node)] = val
        return val

    compute_natural(g.root)

    z = np.full(nv, np.nan)
    fork_gaps = []
    max_defect = [0.0]

    def set_z(v, value):
        if np.isnan(z[v]):
            z[v] = value

    def assign(node: CopyNode, z_s: float, delta: float):
        set_z(node.source, z_s)
        if node.level == g.n:
            set_z(node.sink, z_s + natural[id(node)] + delta)
            max_defect[0] = max(max_defect[0], abs(delta))
            return
        serial = [node.children[i] for i in (0, 1, 2, 3, 4, 9)]
        zc = z_s
        share = delta / 6.0
        for ch in serial:
            assign(ch, zc, share)
            zc = zc + natural[id(ch)] + share
        # Branch B must land on the canonical z of the reunion vertex e. The
        # correction it needs splits into the share this copy inherited from
        # its parent (bookkeeping, spread evenly over all four children, which
        # cancels against the matching shift of the canonical branch) and the
        # fork's own holonomy gap (the enclosed-area monodromy, kept intact by
        # routing it into the last child alone, where it spreads at the next
        # finer scale).
        z_a = z[node.children[1].source]
        z_e = z[node.children[9].source]
        b_children = [node.children[i] for i in (5, 6, 7, 8)]
        inherited = 4.0 * share
        gap = (z_e - z_a) - sum(natural[id(ch)] for ch in b_children) - inherited
        fork_gaps.append(abs(gap))
        zb = z_a
        for ch in b_children[:3]:
            assign(ch, zb, share)
            zb = zb + natural[id(ch)] + share
        assign(b_children[3], zb, share + gap)

    assign(g.root, 0.0, 0.0)

    positions = np.column_stack([planar, z])
    if not np.all(np.isfinite(positions)):
        raise RuntimeError("embedding failed to assign every vertex")
    return HeisEmbedding(m=m, theta=theta, planar_scale=planar_scale,
                         positions=positions, headings=headings,
                         fork_gaps=fork_gaps, max_edge_defect=max_defect[0])


def _dir(alpha: float) -> np.ndarray:
    return np.array([np.cos(alpha), np.sin(alpha)])


def copy_vertices(node: CopyNode) -> np.ndarray:
    """All vertex ids of a copy (terminals, stations, recursively)."""
    out = {node.source, node.sink}
    stack = [node]
    while stack:
        cur = stack.pop()
        out.update(cur.stations)
        out.add(cur.source)
        out.add(cur.sink)
        stack.extend(cur.children)
    return np.array(sorted(out), dtype=np.int64)


def edge_samples(g: LaaksoStructure, emb: HeisEmbedding, per_edge: int = 32):
    """Points along every embedded edge segment (straight in R^3)."""
    p = emb.positions[g.edges[:, 0]]
    q = emb.positions[g.edges[:, 1]]
    w = np.linspace(0.0, 1.0, per_edge)
    pts = p[:, None, :] * (1 - w)[None, :, None] + q[:, None, :] * w[None, :, None]
    return pts.reshape(-1, 3)


def porosity_witness(g: LaaksoStructure, emb: HeisEmbedding, node: CopyNode,
                     per_edge: int = 32, points: np.ndarray | None = None):
    """Witness ball of Prop. p:porous for a copy at level k <= n-1.

    Center: f(s_k) * (u 6^(10-k), v 6^(10-k), 0) with (u, v) the 90-degree
    clockwise rotation of the copy's planar terminal heading; radius 6^-k.
    Verdict: the closed ball avoids every embedded vertex and edge sample.
    Pass `points` (vertices plus edge samples) to amortize the scan over
    many witnesses.
    """
    k = node.level
    if k > g.n - 1:
        raise ValueError("witness level must be at most n-1")
    fs = emb.positions[node.source]
    ft = emb.positions[node.sink]
    head = ft[:2] - fs[:2]
    head = head / np.linalg.norm(head)
    u, v = head[1], -head[0]  # clockwise rotation
    offset = 6.0 ** (-k + 10)
    center = group_mul(fs, np.array([u * offset, v * offset, 0.0]))
    radius = 6.0 ** (-k)
    pts = (points if points is not None
           else np.vstack([emb.positions, edge_samples(g, emb, per_edge)]))
    dmin = float(np.min(d_k(np.broadcast_to(center, pts.shape), pts)))
    return center, radius, dmin > radius


def cone_check(emb: HeisEmbedding, node: CopyNode, center, radius: float,
               samples: int = 200, seed: int = 7) -> bool:
    """6B subset f(s_k) * C_1: sampled points of the 6-fold ball lie in the cone."""
    big_r = 6.0 * radius
    rng = make_rng(seed, stream=3)
    offs = np.empty((0, 3))
    while offs.shape[0] < samples:
        cand = np.column_stack([
            rng.uniform(-big_r, big_r, 4 * samples),
            rng.uniform(-big_r, big_r, 4 * samples),
            rng.uniform(-big_r ** 2 / 4.0, big_r ** 2 / 4.0, 4 * samples),
        ])
        norm = ((cand[:, 0] ** 2 + cand[:, 1] ** 2) ** 2
                + 16.0 * cand[:, 2] ** 2) ** 0.25
        offs = np.vstack([offs, cand[norm <= big_r]])
    offs = offs[:samples]
    # deterministic extremes of the ball in the group coordinates
    ex = np.array([
        [big_r, 0, 0], [-big_r, 0, 0], [0, big_r, 0], [0, -big_r, 0],
        [0, 0, big_r ** 2 / 4.0], [0, 0, -big_r ** 2 / 4.0],
    ])
    offs = np.vstack([offs, ex])
    pts = group_mul(np.broadcast_to(center, offs.shape), offs)
    base = emb.positions[node.source]
    ok = cone_contains(Cone(1.0), np.broadcast_to(base, pts.shape), pts)
    return bool(np.all(ok))


def flatness_budgets(g: LaaksoStructure, emb: HeisEmbedding) -> float:
    """Max over root-to-leaf chains of sum(theta_j) over forked levels j."""
    theta = emb.theta
    worst = 0.0
    stack = [(g.root, 0.0)]
    while stack:
        node, acc = stack.pop()
        if node.level > 0 and node.forked:
            acc += theta[node.level - 1]
        worst = max(worst, acc)
        stack.extend((ch, acc) for ch in node.children)
    return worst


def lipschitz_excess(g: LaaksoStructure, emb: HeisEmbedding,
                     chunk: int = 256) -> float:
    """max over vertex pairs of d_h(f(u), f(v)) - d_G(u, v)."""
    nv = g.num_vertices
    worst = -np.inf
    for start in range(0, nv, chunk):
        src = np.arange(start, min(start + chunk, nv))
        dg = g.metric(src)
        p = emb.positions[src][:, None, :]
        q = emb.positions[None, :, :]
        dh = d_h(np.broadcast_to(p, (src.size, nv, 3)),
                 np.broadcast_to(q, (src.size, nv, 3)))
        mask = dg > 0
        worst = max(worst, float(np.max(dh[mask] - dg[mask])))
    return worst


def measure_graph_distortion(g: LaaksoStructure, emb: HeisEmbedding,
                             chunk: int = 256) -> float:
    """Exact distortion max(d_h/d_G) * max(d_G/d_h) over all vertex pairs."""
    nv = g.num_vertices
    a = 0.0
    b = 0.0
    for start in range(0, nv, chunk):
        src = np.arange(start, min(start + chunk, nv))
        dg = g.metric(src)
        p = emb.positions[src][:, None, :]
        q = emb.positions[None, :, :]
        dh = d_h(np.broadcast_to(p, (src.size, nv, 3)),
                 np.broadcast_to(q, (src.size, nv, 3)))
        mask = dg > 0
        ratio = dh[mask] / dg[mask]
        a = max(a, float(ratio.max()))
        b = max(b, float((1.0 / ratio).max()))
    return a * b


def sdp_min_distortion(g_or_metric, gap_tol: float = 1e-6) -> dict:
    """Linial-London-Rabinovich relaxation for min distortion into l2.

    minimize c subject to Q >= 0 (psd) and
        d(i,j)^2 <= Q_ii + Q_jj - 2 Q_ij <= c d(i,j)^2.

    For embedding into l2 the optimum equals the squared minimum distortion.
    Accepts a LaaksoStructure or a square distance matrix; returns a dict with
    the optimal value, its square root, and the verified feasibility gap.
    """
    import cvxpy as cp

    if isinstance(g_or_metric, LaaksoStructure):
        if g_or_metric.num_vertices > 200:
            raise ValueError("SDP oracle is limited to 200 vertices")
        dmat = g_or_metric.metric(np.arange(g_or_metric.num_vertices))
    else:
        dmat = np.asarray(g_or_metric, dtype=float)
        if dmat.shape[0] != dmat.shape[1] or dmat.shape[0] > 200:
            raise ValueError("need a square distance matrix with <= 200 points")
    nv = dmat.shape[0]
    d2 = dmat ** 2
    q = cp.Variable((nv, nv), PSD=True)
    c = cp.Variable()
    diag = cp.reshape(cp.diag(q), (nv, 1), order="F")
    ones = np.ones((nv, 1))
    e = diag @ ones.T + ones @ diag.T - 2.0 * q
    offdiag = ~np.eye(nv, dtype=bool)
    prob = cp.Problem(cp.Minimize(c), [
        e[offdiag] >= d2[offdiag],
        e[offdiag] <= cp.multiply(c, d2[offdiag]),
    ])
    prob.solve(solver=cp.CLARABEL, max_iter=60)
    if prob.status not in ("optimal", "optimal_inaccurate", "user_limit"):
        raise RuntimeError(f"SDP solve failed: status {prob.status}")
    if q.value is None:
        raise RuntimeError(f"SDP solve returned no iterate (status {prob.status})")

    # Certify: project the iterate onto the PSD cone, rescale so every lower
    # constraint holds exactly, and evaluate the objective of that feasible
    # point. The certified value upper-bounds the optimum.
    qv = 0.5 * (q.value + q.value.T)
    w, vecs = np.linalg.eigh(qv)
    q_psd = (vecs * np.maximum(w, 0.0)) @ vecs.T
    gram = np.diag(q_psd)[:, None] + np.diag(q_psd)[None, :] - 2.0 * q_psd
    ratio = gram[offdiag] / d2[offdiag]
    scale = 1.0 / max(ratio.min(), 1e-300)
    certified = float(scale * ratio.max())
    solver_value = float(prob.value)
    gap = abs(certified - solver_value) / max(abs(certified), 1e-300)
    report = {
        "value": certified,
        "min_distortion": float(np.sqrt(max(certified, 0.0))),
        "solver_value": solver_value,
        "certified_gap": gap,
        "status": prob.status,
    }
    if gap > gap_tol:
        report["warning"] = (
            f"certified-feasible value differs from solver objective by {gap:.2e}")
    return report
