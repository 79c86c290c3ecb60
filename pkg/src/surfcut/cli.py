"""Command-line interface.

Subcommands: phantom, gvf, cost, segment, oracle, evaluate, pipeline.
Exit codes: 0 success, 2 configuration error, 3 infeasible problem, 4 I/O.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import fileio
from . import cost as cost_mod
from .displacement import (
    compute_gvf,
    edge_magnitude,
    mappings_from_shifts,
    normalize_and_shift,
)
from .errors import ConfigInvalid, Infeasible, SurfcutError
from .graph import assemble_graph, dump_dimacs
from .maxflow import recover_surfaces, solve_min_cut
from .metrics import hausdorff, jaccard, pad, uassd, umsp
from .oracle import brute_force_minimize
from .phantom import generate_phantom
from .pipeline import load_config, load_problem, run_pipeline
from .report import emit_report

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4


def _cmd_phantom(args):
    spec = load_config(args.spec)
    for key in ("dims", "surfaces", "intensities"):
        if key not in spec:
            raise ConfigInvalid(f"phantom spec needs '{key}'")
    seed = spec.get("seed", 0) if args.seed is None else args.seed
    volume, truth = generate_phantom(
        dims=tuple(spec["dims"]),
        surfaces=spec["surfaces"],
        intensities=spec["intensities"],
        noise_sigma=float(spec.get("noise_sigma", 0.0)),
        seed=int(seed),
        spacing=tuple(spec.get("spacing", (1.0, 1.0, 1.0))),
    )
    vol_path = fileio.save_volume(volume, args.out)
    print(f"wrote {vol_path} dims={volume.dims}")
    if args.truth:
        truth_path = fileio.save_truth(truth, args.truth)
        print(f"wrote {truth_path}")
    return EXIT_OK


def _cmd_gvf(args):
    volume = fileio.load_volume(args.volume)
    if args.source == "gradient-magnitude":
        volume = edge_magnitude(volume)
    field = compute_gvf(volume, mu=args.mu, iterations=args.iterations, dt=args.dt)
    paths = fileio.save_vector_field(field, args.out)
    peak = float(field.magnitudes().max())
    print(f"wrote {len(paths)} component volumes to {args.out}_[xyz].raw "
          f"(max |F| = {peak:.6g})")
    if args.mappings_out:
        shifts = normalize_and_shift(field, delta=args.delta)
        mappings = mappings_from_shifts(shifts, volume.dims)
        print(f"wrote {fileio.save_mappings(mappings, args.mappings_out)}")
    return EXIT_OK


def _cmd_cost(args):
    volume = fileio.load_volume(args.volume)
    if args.kind == "gradient":
        out = cost_mod.gradient_cost(volume, args.polarity)
    else:
        out = cost_mod.probability_to_cost(volume)
    path = fileio.save_volume(out, args.out)
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_segment(args):
    problem, scale, offset = load_problem(args.config)
    if args.scale:
        scale = type(scale)(args.scale)
    graph = assemble_graph(problem, scale)
    if args.dump_graph:
        with Path(args.dump_graph).open("w") as fh:
            dump_dimacs(graph, fh)
        print(f"wrote {args.dump_graph}")
    cut = solve_min_cut(graph)
    result = recover_surfaces(cut, problem, graph, energy_offset=offset)
    path = fileio.save_surfaces(result.labels, result.positions, args.out)
    print(f"wrote {path} energy={result.energy:.6f} flow={result.flow}")
    return EXIT_OK


def _cmd_oracle(args):
    problem, _, offset = load_problem(args.config)
    labels, best = brute_force_minimize(problem)
    out = {"energy": best + offset, "labels": labels.tolist()}
    print(json.dumps(out, sort_keys=True))
    return EXIT_OK


def _cmd_evaluate(args):
    if args.kind == "surfaces":
        _, auto_pos = fileio.load_surfaces(args.auto)
        _, ref_pos = fileio.load_surfaces(args.reference)
        if auto_pos.shape != ref_pos.shape:
            raise ConfigInvalid(
                f"surface grids differ: {auto_pos.shape} vs {ref_pos.shape}"
            )
        spacing = tuple(args.spacing)
        lam, x_dim, y_dim = auto_pos.shape
        xs, ys = np.meshgrid(np.arange(x_dim), np.arange(y_dim), indexing="ij")
        per = []
        for i in range(lam):
            a_pts = np.stack([xs.ravel(), ys.ravel(), auto_pos[i].ravel()], axis=1)
            r_pts = np.stack([xs.ravel(), ys.ravel(), ref_pos[i].ravel()], axis=1)
            per.append({
                "surface": i,
                "umsp": umsp(auto_pos[i], ref_pos[i]),
                "uassd": uassd(a_pts, r_pts, spacing),
            })
        out = {"kind": "surfaces", "per_surface": per,
               "umsp_overall": float(np.mean([p["umsp"] for p in per])),
               "uassd_overall": float(np.mean([p["uassd"] for p in per]))}
    else:
        auto = fileio.load_contour(args.auto)
        ref = fileio.load_contour(args.reference)
        area_auto = _shoelace(auto)
        area_ref = _shoelace(ref)
        out = {
            "kind": "contours",
            "hausdorff": hausdorff(auto, ref),
            "pad": pad(area_auto, area_ref),
            "area_auto": area_auto,
            "area_reference": area_ref,
        }
        if args.mask_dims:
            dims = tuple(args.mask_dims)
            out["jaccard"] = jaccard(_rasterize(auto, dims), _rasterize(ref, dims))
    text = json.dumps(out, sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
        print(f"wrote {args.out}")
    else:
        print(text)
    return EXIT_OK


def _shoelace(points):
    x, y = points[:, 0], points[:, 1]
    return float(0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def _rasterize(contour, dims):
    from matplotlib.path import Path as MplPath

    nx, ny = dims
    xs, ys = np.meshgrid(np.arange(nx) + 0.5, np.arange(ny) + 0.5, indexing="ij")
    pts = np.stack([xs.ravel(), ys.ravel()], axis=1)
    return MplPath(contour).contains_points(pts).reshape(nx, ny)


def _cmd_pipeline(args):
    run = run_pipeline(
        args.config,
        seed=args.seed,
        scale=args.scale,
        baseline=True if args.baseline else None,
        threads=args.threads,
        dump_graph=args.dump_graph,
    )
    cfg = load_config(args.config)
    report_cfg = cfg.get("report", {})
    out_dir = args.out_dir or report_cfg.get("dir", "surfcut-report")
    figures = False if args.no_figures else report_cfg.get("figures", True)
    paths = emit_report(run, out_dir, figures=figures)
    print(f"wrote {paths['report']}")
    print(f"wrote {paths['surfaces']}")
    print(f"wrote {paths['plotdata']}")
    for fig in paths.get("figures", []):
        print(f"wrote {fig}")
    if run.metrics.get("proposed"):
        print(f"proposed UMSP overall: {run.metrics['proposed']['umsp_overall']:.4f}")
        if run.metrics.get("baseline"):
            print(f"baseline UMSP overall: {run.metrics['baseline']['umsp_overall']:.4f}")
    print(f"energy: {run.proposed.energy:.6f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="surfcut",
        description="Multi-surface segmentation in irregularly sampled column space",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", help="render a synthetic volume with known surfaces")
    p.add_argument("--spec", required=True, help="JSON phantom spec")
    p.add_argument("--out", required=True, help="output volume path (.raw)")
    p.add_argument("--truth", help="optional ground-truth CSV path")
    p.add_argument("--seed", type=int, help="noise seed override")
    p.set_defaults(func=_cmd_phantom)

    p = sub.add_parser("gvf", help="compute the diffused gradient field")
    p.add_argument("--volume", required=True)
    p.add_argument("--out", required=True, help="output prefix for _x/_y/_z.raw")
    p.add_argument("--mu", type=float, default=0.2)
    p.add_argument("--iterations", type=int, default=80)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--source", choices=["intensity", "gradient-magnitude"],
                   default="intensity",
                   help="diffuse the gradient of the raw volume or of its edge map")
    p.add_argument("--mappings-out",
                   help="also write the normalized-shift column mappings as CSV")
    p.add_argument("--delta", type=float, default=1.0,
                   help="voxel size for shift normalization (max shift delta/2)")
    p.set_defaults(func=_cmd_gvf)

    p = sub.add_parser("cost", help="build a data-cost volume")
    p.add_argument("--volume", required=True)
    p.add_argument("--kind", choices=["gradient", "probability"], default="gradient")
    p.add_argument("--polarity", choices=[cost_mod.DARK_TO_BRIGHT, cost_mod.BRIGHT_TO_DARK],
                   default=cost_mod.DARK_TO_BRIGHT)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_cost)

    p = sub.add_parser("segment", help="segment file-backed cost volumes")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="surfaces.csv")
    p.add_argument("--scale", type=int)
    p.add_argument("--dump-graph", help="write the graph in DIMACS max format")
    p.set_defaults(func=_cmd_segment)

    p = sub.add_parser("oracle", help="brute-force minimize a small problem")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("evaluate", help="compare two surface or contour files")
    p.add_argument("auto")
    p.add_argument("reference")
    p.add_argument("--kind", choices=["surfaces", "contours"], default="surfaces")
    p.add_argument("--spacing", type=float, nargs=3, default=(1.0, 1.0, 1.0))
    p.add_argument("--mask-dims", type=int, nargs=2,
                   help="rasterize contours on this grid for the overlap measure")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("pipeline", help="run the full configured pipeline")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--scale", type=int)
    p.add_argument("--baseline", action="store_true",
                   help="also run the regular-grid comparison")
    p.add_argument("--dump-graph")
    p.add_argument("--out-dir")
    p.add_argument("--no-figures", action="store_true", default=False)
    p.set_defaults(func=_cmd_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SurfcutError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
