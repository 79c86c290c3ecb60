"""End-to-end orchestration: inputs to costs to displacement to surfaces.

The pipeline mirrors the experimental workflow: (optional phantom) ->
(optional downsampling) -> (optional denoising) -> cost construction ->
displacement field -> center shifts -> deformed costs and irregular
mappings -> graph -> minimum cut -> surfaces -> metrics against ground
truth.  A baseline run segments the same normalized costs on the regular
grid for comparison.

Configuration is a single JSON document with one block per stage; every
parameter is echoed into the report for provenance.
"""

from __future__ import annotations

import contextlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import cost as cost_mod
from . import fileio
from .core import (
    ConvexPenalty,
    Problem,
    SegmentationResult,
    equidistant_mappings,
)
from .displacement import (
    compute_gvf,
    deform_cost_volume,
    edge_magnitude,
    mappings_from_shifts,
    normalize_and_shift,
)
from .errors import ConfigInvalid, SurfcutError
from .graph import CapacityScale, assemble_graph, dump_dimacs
from .maxflow import recover_surfaces, solve_min_cut
from .metrics import uassd, umsp
from .phantom import downsample, downsample_positions, generate_phantom


@contextlib.contextmanager
def _stage(name):
    """Prefix errors with the pipeline stage they came from."""
    try:
        yield
    except SurfcutError as exc:
        if exc.args and isinstance(exc.args[0], str):
            exc.args = (f"[stage {name}] {exc.args[0]}",) + exc.args[1:]
        raise


@dataclass
class PipelineRun:
    """Everything a report needs from one pipeline execution."""

    config: dict
    seed: int
    proposed: SegmentationResult
    baseline: SegmentationResult = None
    truth: np.ndarray = None
    metrics: dict = field(default_factory=dict)
    dims: tuple = ()
    spacing: tuple = (1.0, 1.0, 1.0)
    num_surfaces: int = 1
    graph_stats: dict = field(default_factory=dict)


def load_config(source) -> dict:
    """Read a config from a dict, JSON string, or file path."""
    if isinstance(source, dict):
        return json.loads(json.dumps(source))   # deep copy, JSON-only types
    path = Path(source)
    text = path.read_text()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(cfg, dict):
        raise ConfigInvalid(f"{path}: top level must be an object")
    return cfg


def _penalty_from(spec) -> ConvexPenalty:
    if isinstance(spec, ConvexPenalty):
        return spec
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigInvalid(f"penalty spec needs a 'kind': {spec!r}")
    try:
        return ConvexPenalty(
            kind=spec["kind"],
            weight=float(spec.get("weight", 1.0)),
            breakpoints=tuple(spec.get("breakpoints", ())),
            slopes=tuple(spec.get("slopes", ())),
        )
    except SurfcutError as exc:
        raise ConfigInvalid(f"bad penalty spec {spec!r}: {exc}") from exc


def _penalties_from(cfg, num_surfaces):
    spec = cfg.get("penalty")
    if spec is None:
        raise ConfigInvalid("config needs a 'penalty' block")
    if isinstance(spec, list):
        if len(spec) != num_surfaces:
            raise ConfigInvalid(f"need {num_surfaces} penalties, got {len(spec)}")
        return tuple(_penalty_from(s) for s in spec)
    return (_penalty_from(spec),) * num_surfaces


def _stage_input(cfg, seed):
    """Resolve the input volume and optional ground truth."""
    phantom_cfg = cfg.get("phantom")
    input_cfg = cfg.get("input")
    if (phantom_cfg is None) == (input_cfg is None):
        raise ConfigInvalid("config needs exactly one of 'phantom' or 'input'")
    if phantom_cfg is not None:
        for key in ("dims", "surfaces", "intensities"):
            if key not in phantom_cfg:
                raise ConfigInvalid(f"phantom block needs '{key}'")
        volume, truth = generate_phantom(
            dims=tuple(phantom_cfg["dims"]),
            surfaces=phantom_cfg["surfaces"],
            intensities=phantom_cfg["intensities"],
            noise_sigma=float(phantom_cfg.get("noise_sigma", 0.0)),
            seed=seed,
            spacing=tuple(phantom_cfg.get("spacing", (1.0, 1.0, 1.0))),
        )
        return volume, truth
    if "volume" not in input_cfg:
        raise ConfigInvalid("input block needs 'volume'")
    volume = fileio.load_volume(input_cfg["volume"])
    truth = fileio.load_truth(input_cfg["truth"]) if input_cfg.get("truth") else None
    return volume, truth


def _stage_costs(cfg, volume):
    specs = cfg.get("costs")
    if not isinstance(specs, list) or not specs:
        raise ConfigInvalid("config needs a nonempty 'costs' list, one entry per surface")
    volumes = []
    for spec in specs:
        kind = spec.get("kind") if isinstance(spec, dict) else None
        if kind == "gradient":
            volumes.append(
                cost_mod.gradient_cost(volume, spec.get("polarity", cost_mod.DARK_TO_BRIGHT))
            )
        elif kind == "probability":
            prob = fileio.load_volume(spec["path"])
            if prob.dims != volume.dims:
                raise ConfigInvalid(f"probability volume dims {prob.dims} != {volume.dims}")
            volumes.append(cost_mod.probability_to_cost(prob))
        elif kind == "file":
            vol = fileio.load_volume(spec["path"])
            if vol.dims != volume.dims:
                raise ConfigInvalid(f"cost volume dims {vol.dims} != {volume.dims}")
            volumes.append(vol)
        else:
            raise ConfigInvalid(f"cost spec needs kind gradient|probability|file: {spec!r}")
    return volumes


def _segment(costs, mappings, penalties, separations, scale, dump_path=None):
    problem = Problem(costs=costs, mappings=mappings, penalties=penalties,
                      separation=separations)
    normalized, offset = [], 0.0
    for vol in problem.costs:
        norm, shift = cost_mod.normalize_cost(vol)
        normalized.append(norm)
        offset += shift * problem.num_columns
    problem = Problem(costs=normalized, mappings=problem.mappings,
                      penalties=problem.penalties, separation=problem.separation)
    graph = assemble_graph(problem, scale)
    if dump_path:
        with Path(dump_path).open("w") as fh:
            dump_dimacs(graph, fh)
    cut = solve_min_cut(graph)
    result = recover_surfaces(cut, problem, graph, energy_offset=offset)
    stats = {"nodes": graph.num_nodes, "arcs": int(graph.num_arcs),
             "sentinel": int(graph.sentinel), "severed": int(cut.num_severed)}
    return result, stats


def _surface_metrics(result, truth, spacing):
    lam = truth.shape[0]
    x_dim, y_dim = truth.shape[1:]
    xs, ys = np.meshgrid(np.arange(x_dim), np.arange(y_dim), indexing="ij")
    per_umsp, per_uassd = [], []
    for i in range(lam):
        per_umsp.append(umsp(result.positions[i], truth[i]))
        auto_pts = np.stack([xs.ravel(), ys.ravel(), result.positions[i].ravel()], axis=1)
        ref_pts = np.stack([xs.ravel(), ys.ravel(), truth[i].ravel()], axis=1)
        per_uassd.append(uassd(auto_pts, ref_pts, spacing))
    return {
        "umsp": per_umsp,
        "umsp_overall": float(np.mean(per_umsp)),
        "uassd": per_uassd,
        "uassd_overall": float(np.mean(per_uassd)),
    }


def run_pipeline(config, seed=None, scale=None, baseline=None, threads=None,
                 dump_graph=None) -> PipelineRun:
    """Execute the configured pipeline; CLI flags override config entries."""
    cfg = load_config(config)
    seed = int(cfg.get("seed", 0) if seed is None else seed)
    scale = CapacityScale(int(cfg.get("scale", CapacityScale().scale) if scale is None else scale))
    want_baseline = bool(cfg.get("baseline", False) if baseline is None else baseline)
    threads = int(cfg.get("threads", 1) if threads is None else threads)
    if threads < 1:
        raise ConfigInvalid("threads must be >= 1")

    with _stage("input"):
        volume, truth = _stage_input(cfg, seed)

    factors = cfg.get("downsample")
    if factors:
        with _stage("downsample"):
            fx, fy, fz = (int(f) for f in factors)
            volume = downsample(volume, (fx, fy, fz))
            if truth is not None:
                lam = truth.shape[0]
                nx, ny = volume.dims[0], volume.dims[1]
                blocks = truth[:, : nx * fx, : ny * fy].reshape(lam, nx, fx, ny, fy)
                truth = downsample_positions(blocks.mean(axis=(2, 4)), fz)

    sigma = float(cfg.get("smooth_sigma", 0.0))
    if sigma > 0:
        with _stage("preprocess"):
            volume = cost_mod.gaussian_smooth(volume, sigma)

    with _stage("cost"):
        raw_costs = _stage_costs(cfg, volume)
    lam = len(raw_costs)
    penalties = _penalties_from(cfg, lam)
    separations = cfg.get("separations", [])
    if lam > 1 and len(separations) != lam - 1:
        raise ConfigInvalid(f"need {lam - 1} separations for {lam} surfaces")

    gvf_cfg = cfg.get("gvf")
    if gvf_cfg:
        with _stage("displacement"):
            source = gvf_cfg.get("source", "gradient-magnitude")
            if source == "gradient-magnitude":
                feed = edge_magnitude(volume)
            elif source == "intensity":
                feed = volume
            else:
                raise ConfigInvalid(
                    f"gvf source must be gradient-magnitude|intensity: {source!r}"
                )
            fld = compute_gvf(
                feed,
                mu=float(gvf_cfg.get("mu", 0.2)),
                iterations=int(gvf_cfg.get("iterations", 80)),
                dt=gvf_cfg.get("dt"),
            )
            shifts = normalize_and_shift(fld, delta=float(gvf_cfg.get("delta", 1.0)))
            mappings = mappings_from_shifts(shifts, volume.dims)
            seg_costs = [deform_cost_volume(c, shifts) for c in raw_costs]
    else:
        mappings = equidistant_mappings(volume.dims)
        seg_costs = raw_costs

    with _stage("segment"):
        proposed, stats = _segment(seg_costs, mappings, penalties, separations, scale,
                                   dump_path=dump_graph)

    baseline_result = None
    if want_baseline:
        with _stage("baseline"):
            baseline_result, _ = _segment(
                raw_costs, equidistant_mappings(volume.dims), penalties, separations,
                scale,
            )

    metrics = {}
    if truth is not None:
        with _stage("metrics"):
            metrics["proposed"] = _surface_metrics(proposed, truth, volume.spacing)
            if baseline_result is not None:
                metrics["baseline"] = _surface_metrics(baseline_result, truth,
                                                       volume.spacing)

    echo = dict(cfg)
    echo.update({"seed": seed, "scale": scale.scale, "baseline": want_baseline,
                 "threads": threads})
    return PipelineRun(
        config=echo,
        seed=seed,
        proposed=proposed,
        baseline=baseline_result,
        truth=truth,
        metrics=metrics,
        dims=volume.dims,
        spacing=volume.spacing,
        num_surfaces=lam,
        graph_stats=stats,
    )


def load_problem(config) -> tuple:
    """Build a Problem from a config of file-backed costs and mappings.

    Used by the segment and oracle entry points.  Returns (problem, scale).
    Costs are normalized nonnegative; the normalization offset is folded
    into the returned problem's reporting by the caller via the second
    element of the tuple: (problem, scale, energy_offset).
    """
    cfg = load_config(config)
    specs = cfg.get("costs")
    if not isinstance(specs, list) or not specs:
        raise ConfigInvalid("config needs a nonempty 'costs' list of volume paths")
    volumes = []
    for spec in specs:
        path = spec["path"] if isinstance(spec, dict) else spec
        volumes.append(fileio.load_volume(path))
    dims = volumes[0].dims
    mappings = fileio.load_mappings(cfg["mappings"]) if cfg.get("mappings") else (
        equidistant_mappings(dims)
    )
    penalties = _penalties_from(cfg, len(volumes))
    separations = cfg.get("separations", [])
    normalized, offset = [], 0.0
    for vol in volumes:
        norm, shift = cost_mod.normalize_cost(vol)
        normalized.append(norm)
        offset += shift * dims[0] * dims[1]
    problem = Problem(costs=normalized, mappings=mappings, penalties=penalties,
                      separation=separations)
    scale = CapacityScale(int(cfg.get("scale", CapacityScale().scale)))
    return problem, scale, offset
