"""Command-line interface: heis-embed <embed|foliate|distort|laakso|report>.

Every subcommand accepts --seed, --config (key=value text) and --out; outputs
are JSON reports, CSV point dumps, and SVG distortion-versus-scale plots,
written deterministically for a fixed (seed, config).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import affine, domains, foliation, laakso, surfaces
from .config import config_hash, load_config
from .harness import report_to_json, run_bundle, scale_plot_svg
from .rng import make_rng
from .snowflake import (build_snowflake_circle, build_snowflake_line,
                        curve_to_csv, measure_holder_distortion)


def _vec(text: str) -> np.ndarray:
    return np.array([float(x) for x in text.split(",")], dtype=float)


def _write(out_dir: Path, name: str, payload: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / name).write_text(payload, encoding="utf-8")
    print(f"wrote {out_dir / name}")


def _snowflakes(cfg):
    depth = int(cfg["snowflake.depth"])
    theta = float(cfg["snowflake.theta"])
    return build_snowflake_line(depth, theta), build_snowflake_circle(depth, theta)


def _surface_from_spec(text: str):
    kind, _, rest = text.partition(":")
    args = [float(x) for x in rest.split(",")] if rest else []
    if kind == "plane":
        return foliation.plane_surface(*args)
    if kind == "torus":
        return foliation.torus_surface(*args)
    if kind == "sphere":
        return foliation.sphere_surface(*(args or [1.0]))
    if kind == "paraboloid":
        return foliation.GraphSurface(lambda x, y: x * x + y * y,
                                      lambda x, y: 2 * x, lambda x, y: 2 * y)
    raise SystemExit(f"unknown surface spec {text!r}")


def _bundle_for(args, cfg):
    phi, circ = _snowflakes(cfg)
    target = args.target
    if target == "line":
        a = _vec(args.a)
        line = affine.LineSpec(a / np.linalg.norm(a), _vec(args.c))
        return domains.line_bundle(line, phi), ("line", line)
    if target == "plane":
        if args.plane_kind == "vertical":
            spec = affine.vertical_plane(args.b, args.c_coef)
        else:
            spec = affine.graph_plane(args.a_coef, args.b, args.c_coef)
        return domains.plane_bundle(spec, phi, circ), ("plane", spec)
    if target == "simplex":
        verts = [_vec(v) for v in args.vertices.split(";")]
        emb, kind = affine.embed_simplex(verts, phi, circ)
        if kind == "triangle":
            spec = affine.plane_through(*verts)
            return domains.plane_bundle(spec, phi, circ), ("simplex", spec)
        raise SystemExit("distortion sampling is defined for 2-simplices; "
                         "segments reduce to the line target")
    if target == "revolution":
        spec = surfaces.revolution_preset(args.profile, args.t_max)
        chart = surfaces.build_revolution_chart(spec)
        return domains.revolution_bundle(chart, circ), ("revolution", chart)
    if target == "ksphere":
        chart = surfaces.build_koranyi_sphere()
        return domains.sphere_bundle(chart, circ), ("ksphere", chart)
    if target == "esphere":
        chart = surfaces.build_euclidean_sphere()
        return domains.sphere_bundle(chart, circ), ("esphere", chart)
    if target == "saddle":
        return domains.saddle_bundle(args.family, phi), ("saddle", args.family)
    raise SystemExit(f"unknown embed target {target!r}")


def cmd_embed(args) -> int:
    cfg = load_config(args.config)
    chash = config_hash(cfg)
    out = Path(args.out)
    bundle, (name, obj) = _bundle_for(args, cfg)
    rep = run_bundle(bundle, int(cfg["harness.buckets"]), int(cfg["harness.quota"]),
                     args.seed, config_hash=chash)
    _write(out, f"{name}_report.json", report_to_json(rep))
    _write(out, f"{name}_scales.svg", scale_plot_svg(rep))
    # CSV dump of a parameter sweep through the embedding
    rng = make_rng(args.seed, stream=5)
    if name == "line":
        emb, _ = affine.embed_line(obj, _snowflakes(cfg)[0])
        t = np.linspace(-2, 2, args.samples)
        img = emb(t)
        rows = ["t," + ",".join(f"f{i}" for i in range(img.shape[1]))]
        rows += [",".join(repr(float(v)) for v in (ti, *row))
                 for ti, row in zip(t, img)]
        _write(out, "line_points.csv", "\n".join(rows) + "\n")
    return 0


def cmd_foliate(args) -> int:
    cfg = load_config(args.config)
    chash = config_hash(cfg)
    out = Path(args.out)
    surface = _surface_from_spec(args.surface)
    p0 = _vec(args.p0)
    chart = foliation.build_chart(surface, p0, args.eps)
    phi, _ = _snowflakes(cfg)
    bundle = domains.chart_bundle(chart, phi)
    rep = run_bundle(bundle, int(cfg["harness.buckets"]), int(cfg["harness.quota"]),
                     args.seed, config_hash=chash)
    k2, l2 = chart.constants_at_step(args.eps / 512.0)
    info = {
        "schema": 1,
        "orientation": chart.orientation,
        "driving": chart.driving,
        "kappa": chart.kappa,
        "lambda": chart.lam,
        "kappa_halfstep": k2,
        "lambda_halfstep": l2,
        "l_chart": chart.l_chart,
        "ode_error": chart.ode_error,
        "surface_drift": chart.surface_drift,
        "distortion": rep.as_dict(),
    }
    _write(out, "chart_report.json", json.dumps(info, sort_keys=True) + "\n")
    uu = np.linspace(-args.eps, args.eps, 33)
    rows = ["u,v,x,y,z"]
    for v in np.linspace(-args.eps, args.eps, 9):
        pts = chart.g(uu, np.full_like(uu, v))
        rows += [",".join(repr(float(x)) for x in (u, v, *p))
                 for u, p in zip(uu, pts)]
    _write(out, "chart_grid.csv", "\n".join(rows) + "\n")
    return 0


def cmd_distort(args) -> int:
    cfg = load_config(args.config)
    out = Path(args.out)
    bundle, (name, _obj) = _bundle_for(args, cfg)
    rep = run_bundle(bundle, args.buckets or int(cfg["harness.buckets"]),
                     args.quota or int(cfg["harness.quota"]), args.seed,
                     config_hash=config_hash(cfg))
    _write(out, f"{name}_distortion.json", report_to_json(rep))
    _write(out, f"{name}_scales.svg", scale_plot_svg(rep))
    return 0


def cmd_laakso(args) -> int:
    cfg = load_config(args.config)
    out = Path(args.out)
    g = laakso.build_laakso(args.n)
    m = laakso.minimal_m() if args.m == "auto" else int(args.m)
    emb = laakso.embed_laakso(g, m, planar_scale=float(cfg["laakso.planar_scale"]))
    report = {
        "schema": 1,
        "n": args.n,
        "m": m,
        "theta": emb.theta.tolist(),
        "vertices": g.num_vertices,
        "edges": int(g.edges.shape[0]),
        "max_edge_defect": emb.max_edge_defect,
        "max_fork_gap": max(emb.fork_gaps) if emb.fork_gaps else 0.0,
        "one_lipschitz_excess": laakso.lipschitz_excess(g, emb),
        "distortion": laakso.measure_graph_distortion(g, emb),
        "flatness_budget": laakso.flatness_budgets(g, emb),
        "terminal_bounds": _terminal_bounds(g, emb),
    }
    if args.porosity:
        per_edge = int(cfg["laakso.edge_samples"])
        verdicts = []
        for lvl in range(0, g.n):
            for node in g.copies_by_level[lvl]:
                center, radius, ok = laakso.porosity_witness(g, emb, node, per_edge)
                cone_ok = laakso.cone_check(emb, node, center, radius,
                                            seed=args.seed)
                verdicts.append(bool(ok and cone_ok))
        report["porosity_all_pass"] = all(verdicts)
        report["porosity_witnesses"] = len(verdicts)
    if args.sdp:
        report["sdp"] = laakso.sdp_min_distortion(g if g.num_vertices <= 200
                                                  else laakso.build_laakso(2))
    edges_txt = "\n".join(f"{u} {v}" for u, v in g.edges)
    _write(out, f"laakso{args.n}_edges.txt", edges_txt + "\n")
    rows = ["vertex,x,y,z"]
    rows += [f"{i},{float(p[0])!r},{float(p[1])!r},{float(p[2])!r}"
            for i, p in enumerate(emb.positions)]
    _write(out, f"laakso{args.n}_embedding.csv", "\n".join(rows) + "\n")
    _write(out, f"laakso{args.n}_report.json",
           json.dumps(report, sort_keys=True) + "\n")
    return 0


def _terminal_bounds(g, emb) -> dict:
    worst = np.inf
    for lvl in range(0, g.n + 1):
        for c in g.copies_by_level[lvl]:
            ps, pt = emb.positions[c.source], emb.positions[c.sink]
            sep = float(np.hypot(*(pt[:2] - ps[:2])))
            worst = min(worst, sep / (6.0 ** (-lvl) / 2.0))
    return {"worst_margin_ratio": worst, "pass": bool(worst >= 1.0)}


def cmd_report(args) -> int:
    cfg = load_config(args.config)
    chash = config_hash(cfg)
    out = Path(args.out)
    phi, circ = _snowflakes(cfg)
    results = {"schema": 1, "seed": args.seed, "config_hash": chash}
    results["snowflake_line_L"] = measure_holder_distortion(phi, 20_000,
                                                            seed=args.seed)
    results["snowflake_circle_L"] = measure_holder_distortion(circ, 20_000,
                                                              seed=args.seed)
    rng = make_rng(args.seed, stream=9)
    line = affine.LineSpec(np.array([1.0, 0, 0]), np.array([0, 1.0, 0]))
    rep = run_bundle(domains.line_bundle(line, phi), 8, 60, args.seed,
                     config_hash=chash)
    results["generic_line"] = rep.as_dict()
    _write(out, "line_scales.svg", scale_plot_svg(rep))
    spec = affine.graph_plane(*rng.uniform(-1, 1, 3))
    repp = run_bundle(domains.plane_bundle(spec, phi, circ), 8, 60, args.seed,
                      config_hash=chash)
    results["graph_plane"] = repp.as_dict()
    chart = foliation.build_chart(foliation.plane_surface(0, 0, 0),
                                  np.array([1.0, 0, 0]), 0.2)
    repc = run_bundle(domains.chart_bundle(chart, phi), 8, 60, args.seed,
                      config_hash=chash)
    results["plane_chart"] = repc.as_dict()
    g = laakso.build_laakso(2)
    emb = laakso.embed_laakso(g)
    results["laakso2_distortion"] = laakso.measure_graph_distortion(g, emb)
    _write(out, "report.json", json.dumps(results, sort_keys=True) + "\n")
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="heis-embed",
                                 description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=2025)
    common.add_argument("--config", default=None,
                        help="key=value configuration file")
    common.add_argument("--out", default="out", help="output directory")
    sub = ap.add_subparsers(dest="command", required=True)

    pe = sub.add_parser("embed", parents=[common],
                        help="build an embedding, dump samples + report")
    pe.add_argument("target", choices=["line", "plane", "simplex", "revolution",
                                       "ksphere", "esphere", "saddle"])
    pe.add_argument("--a", default="0,0,1", help="line direction (x,y,z)")
    pe.add_argument("--c", default="0,0,0", help="line base point")
    pe.add_argument("--plane-kind", choices=["vertical", "graph"],
                    default="graph")
    pe.add_argument("--a-coef", type=float, default=0.0)
    pe.add_argument("--b", type=float, default=0.0)
    pe.add_argument("--c-coef", type=float, default=0.0)
    pe.add_argument("--vertices", default="0,0,0;1,0,0;0,1,0",
                    help="semicolon-separated simplex vertices")
    pe.add_argument("--profile", default="square",
                    choices=["zero", "square", "cosh"])
    pe.add_argument("--t-max", type=float, default=1.0)
    pe.add_argument("--family", type=int, default=1, choices=[1, 2, 3, 4])
    pe.add_argument("--samples", type=int, default=512)
    pe.set_defaults(func=cmd_embed)

    pf = sub.add_parser("foliate", parents=[common],
                        help="horizontal foliation chart of a surface")
    pf.add_argument("--surface", required=True,
                    help="plane:a,b,c | torus:r,R | sphere[:radius] | paraboloid")
    pf.add_argument("--p0", required=True, help="base point x,y,z")
    pf.add_argument("--eps", type=float, default=0.1)
    pf.set_defaults(func=cmd_foliate)

    pd = sub.add_parser("distort", parents=[common],
                        help="distortion report only")
    pd.add_argument("target", choices=["line", "plane", "simplex", "revolution",
                                       "ksphere", "esphere", "saddle"])
    for flag, kw in [("--a", {}), ("--c", {})]:
        pd.add_argument(flag, default="0,0,1" if flag == "--a" else "0,0,0", **kw)
    pd.add_argument("--plane-kind", choices=["vertical", "graph"], default="graph")
    pd.add_argument("--a-coef", type=float, default=0.0)
    pd.add_argument("--b", type=float, default=0.0)
    pd.add_argument("--c-coef", type=float, default=0.0)
    pd.add_argument("--vertices", default="0,0,0;1,0,0;0,1,0")
    pd.add_argument("--profile", default="square",
                    choices=["zero", "square", "cosh"])
    pd.add_argument("--t-max", type=float, default=1.0)
    pd.add_argument("--family", type=int, default=1, choices=[1, 2, 3, 4])
    pd.add_argument("--buckets", type=int, default=0)
    pd.add_argument("--quota", type=int, default=0)
    pd.set_defaults(func=cmd_distort)

    pl = sub.add_parser("laakso", parents=[common],
                        help="Laakso graph build/embed/verify")
    pl.add_argument("--n", type=int, required=True)
    pl.add_argument("--M", dest="m", default="auto")
    pl.add_argument("--porosity", action="store_true")
    pl.add_argument("--sdp", action="store_true")
    pl.set_defaults(func=cmd_laakso)

    pr = sub.add_parser("report", parents=[common],
                        help="run the desk-scale certification battery")
    pr.set_defaults(func=cmd_report)

    args = ap.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
