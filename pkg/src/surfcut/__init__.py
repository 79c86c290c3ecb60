"""Globally optimal multi-surface segmentation on irregularly sampled columns.

The segmentation energy (data costs, convex smoothness on real column
positions, hard minimum separation) is encoded in an edge-weighted graph
whose minimum s-t cut is the global optimum.  The regular grid is the
equidistant special case.
"""

__version__ = "0.1.0"

from .core import (
    ColumnMapping,
    ConvexPenalty,
    Problem,
    SegmentationResult,
    SeparationConstraint,
    Volume,
    equidistant_mappings,
    eval_penalty,
    one_sided_penalty,
    validate_mapping,
)
from .cost import gaussian_smooth, gradient_cost, normalize_cost, probability_to_cost
from .displacement import (
    VectorField,
    compute_gvf,
    deform_cost_volume,
    edge_magnitude,
    mappings_from_shifts,
    normalize_and_shift,
)
from .graph import (
    CapacityScale,
    GraphSpec,
    assemble_graph,
    build_inter_column_arcs,
    build_inter_surface_arcs,
    build_intra_column_arcs,
    dump_dimacs,
    inter_column_weight,
    inter_column_weight_matrix,
    load_dimacs,
)
from .maxflow import CutResult, quantize_energy, recover_surfaces, solve_min_cut
from .metrics import hausdorff, jaccard, pad, uassd, umsp
from .oracle import INFEASIBLE, brute_force_minimize, energy, is_feasible
from .phantom import downsample, downsample_positions, generate_phantom, surface_field
from .pipeline import PipelineRun, run_pipeline

__all__ = [
    "CapacityScale",
    "ColumnMapping",
    "ConvexPenalty",
    "CutResult",
    "GraphSpec",
    "INFEASIBLE",
    "PipelineRun",
    "Problem",
    "SegmentationResult",
    "SeparationConstraint",
    "VectorField",
    "Volume",
    "assemble_graph",
    "brute_force_minimize",
    "build_inter_column_arcs",
    "build_inter_surface_arcs",
    "build_intra_column_arcs",
    "compute_gvf",
    "deform_cost_volume",
    "downsample",
    "downsample_positions",
    "dump_dimacs",
    "edge_magnitude",
    "energy",
    "equidistant_mappings",
    "eval_penalty",
    "gaussian_smooth",
    "generate_phantom",
    "gradient_cost",
    "hausdorff",
    "inter_column_weight",
    "inter_column_weight_matrix",
    "is_feasible",
    "jaccard",
    "load_dimacs",
    "mappings_from_shifts",
    "normalize_and_shift",
    "normalize_cost",
    "one_sided_penalty",
    "pad",
    "probability_to_cost",
    "quantize_energy",
    "recover_surfaces",
    "run_pipeline",
    "solve_min_cut",
    "surface_field",
    "uassd",
    "umsp",
    "validate_mapping",
]
