"""Edge-weighted graph encoding of the segmentation energy.

Three arc classes make up the graph:

- intra-column arcs carry the data costs and force each finite cut to sever
  exactly one data arc per column (surface monotonicity);
- inter-column arcs between neighboring columns encode the convex smoothness
  penalty through a four-term difference of one-sided penalties, evaluated
  on the real column positions, so irregular sampling needs no special case;
- inter-surface arcs between corresponding columns of adjacent subgraphs
  make any cut that violates the minimum separation infinite.

Capacities are fixed-point integers (weight * scale, round-half-even) so the
max-flow solver terminates exactly and results reproduce across platforms.
Infinity is a sentinel computed as (sum of finite capacities) + 1, which can
never appear in a minimum cut when a feasible labeling exists.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConvexPenalty, Problem, one_sided_penalty
from .errors import CapacityOverflow, IndexOutOfRange, NegativeDataCost

SOURCE = 0
SINK = 1
DEFAULT_SCALE = 1 << 16

# headroom below int64 for flow accumulation in the solver: the solver stops
# once flow passes the sentinel, so no intermediate value exceeds 3 * sentinel
_SAFE_SENTINEL_LIMIT = 1 << 61


@dataclass(frozen=True)
class CapacityScale:
    """Fixed-point multiplier turning real weights into integer capacities."""

    scale: int = DEFAULT_SCALE

    def __post_init__(self):
        if int(self.scale) < 1:
            raise CapacityOverflow("scale must be a positive integer")
        object.__setattr__(self, "scale", int(self.scale))


@dataclass(frozen=True)
class GraphSpec:
    """Immutable arc list with integer capacities and node bookkeeping.

    Nodes 0 and 1 are the source and sink; interior node ids follow
    surface-major, column-major, level-minor order (see node_id).  ``shape``
    is (num_surfaces, X, Y, Z) for assembled graphs and None for hand-built
    ones.
    """

    num_nodes: int
    tails: np.ndarray
    heads: np.ndarray
    caps: np.ndarray
    sentinel: int
    scale: int = DEFAULT_SCALE
    shape: tuple = None

    def __post_init__(self):
        tails = np.ascontiguousarray(self.tails, dtype=np.int64)
        heads = np.ascontiguousarray(self.heads, dtype=np.int64)
        caps = np.ascontiguousarray(self.caps, dtype=np.int64)
        if not (tails.shape == heads.shape == caps.shape) or tails.ndim != 1:
            raise CapacityOverflow("tails/heads/caps must be equal-length 1-D arrays")
        if np.any(tails == heads):
            raise CapacityOverflow("self-arcs are not allowed")
        if np.any(caps < 0):
            raise CapacityOverflow("capacities must be nonnegative")
        object.__setattr__(self, "tails", tails)
        object.__setattr__(self, "heads", heads)
        object.__setattr__(self, "caps", caps)

    @property
    def num_arcs(self):
        return self.tails.size

    def node_id(self, surface, x, y, z):
        lam, X, Y, Z = self.shape
        return 2 + ((surface * X + x) * Y + y) * Z + z

    def node_level(self, node):
        """Inverse of node_id for interior nodes: (surface, x, y, z)."""
        lam, X, Y, Z = self.shape
        n = node - 2
        z = n % Z
        n //= Z
        y = n % Y
        n //= Y
        return n // X, n % X, y, z


def inter_column_weight(penalty: ConvexPenalty, pos_a, pos_b, k1: int, k2: int) -> float:
    """Weight of the smoothness arc from level k1 of column a to level k2 of b.

    k2 == Z addresses the arc to the sink.  Terms indexing level -1 of a or
    level Z of b vanish by convention.  The result is nonnegative for any
    convex penalty (up to float rounding; callers clamp).
    """
    pos_a = np.asarray(pos_a, dtype=np.float64)
    pos_b = np.asarray(pos_b, dtype=np.float64)
    z = pos_a.size
    if pos_b.size != z:
        raise IndexOutOfRange("columns must have equal length")
    if not (0 <= k1 <= z - 1):
        raise IndexOutOfRange(f"k1={k1} outside [0, {z - 1}]")
    if not (1 <= k2 <= z):
        raise IndexOutOfRange(f"k2={k2} outside [1, {z}]")

    w = one_sided_penalty(penalty, pos_a[k1], pos_b[k2 - 1])
    if k1 > 0:
        w -= one_sided_penalty(penalty, pos_a[k1 - 1], pos_b[k2 - 1])
    if k2 < z:
        w -= one_sided_penalty(penalty, pos_a[k1], pos_b[k2])
        if k1 > 0:
            w += one_sided_penalty(penalty, pos_a[k1 - 1], pos_b[k2])
    return float(w)


def inter_column_weight_matrix(penalty: ConvexPenalty, pos_a, pos_b) -> np.ndarray:
    """All inter-column weights for one direction as a (Z, Z) array.

    Entry [k1, j] is the weight of the arc from level k1 of column a to
    level j + 1 of column b; the last column (j = Z - 1) addresses the sink.
    Vectorized equivalent of looping inter_column_weight over k1, k2.
    """
    pos_a = np.asarray(pos_a, dtype=np.float64)
    pos_b = np.asarray(pos_b, dtype=np.float64)
    z = pos_a.size
    diff = pos_a[:, None] - pos_b[None, :]
    f = np.where(diff < 0, 0.0, penalty(diff))
    fp = np.zeros((z + 1, z + 1))
    fp[1:, :z] = f
    return fp[1:, 0:z] - fp[0:z, 0:z] - fp[1:, 1:] + fp[0:z, 1:]


def _bulk_weight_tensor(penalty, pos_a, pos_b):
    """inter_column_weight_matrix batched over pairs: (P, Z) x 2 -> (P, Z, Z)."""
    p, z = pos_a.shape
    diff = pos_a[:, :, None] - pos_b[:, None, :]
    f = np.where(diff < 0, 0.0, penalty(diff))
    fp = np.zeros((p, z + 1, z + 1))
    fp[:, 1:, :z] = f
    return fp[:, 1:, 0:z] - fp[:, 0:z, 0:z] - fp[:, 1:, 1:] + fp[:, 0:z, 1:]


def build_intra_column_arcs(costs, node_ids, sentinel, source=SOURCE, sink=SINK):
    """Arcs for one column of one subgraph: data arcs plus monotonicity arcs.

    costs holds the data cost at each level's position, already nonnegative.
    Returns (tail, head, capacity) tuples; capacities here are raw costs,
    scaling happens at assembly.
    """
    costs = np.asarray(costs, dtype=np.float64)
    node_ids = np.asarray(node_ids, dtype=np.int64)
    z = costs.size
    if np.any(costs < 0):
        raise NegativeDataCost("data costs must be nonnegative; normalize first")
    arcs = [(source, int(node_ids[0]), sentinel)]
    for k in range(1, z):
        arcs.append((int(node_ids[k]), int(node_ids[k - 1]), sentinel))
        arcs.append((int(node_ids[k - 1]), int(node_ids[k]), float(costs[k - 1])))
    arcs.append((int(node_ids[z - 1]), sink, float(costs[z - 1])))
    return arcs


def build_inter_column_arcs(penalty, pos_a, pos_b, ids_a, ids_b, sink=SINK):
    """Smoothness arcs for both directions of one neighboring column pair.

    Zero-weight arcs are omitted.  Tiny negative rounding residue (allowed
    down to about -1e-12 by the nonnegativity guarantee) is clamped to zero.
    """
    arcs = []
    for pa, pb, ia, ib in ((pos_a, pos_b, ids_a, ids_b), (pos_b, pos_a, ids_b, ids_a)):
        w = np.maximum(inter_column_weight_matrix(penalty, pa, pb), 0.0)
        z = len(pa)
        for k1, j in zip(*np.nonzero(w)):
            head = sink if j == z - 1 else int(ib[j + 1])
            arcs.append((int(ia[k1]), head, float(w[k1, j])))
    return arcs


def build_inter_surface_arcs(positions, gap, ids_low, ids_high, sentinel, sink=SINK):
    """Separation arcs from one column of surface i to the same column of i+1.

    Level z links to the lowest level whose position is at least gap above
    it; when no such level exists the arc goes to the sink, making every
    labeling with the lower surface at or above z infeasible.
    """
    positions = np.asarray(positions, dtype=np.float64)
    targets = np.searchsorted(positions, positions + gap, side="left")
    z = positions.size
    arcs = []
    for k in range(z):
        head = sink if targets[k] == z else int(ids_high[targets[k]])
        arcs.append((int(ids_low[k]), head, sentinel))
    return arcs


def _quantize(weights, scale):
    """Round-half-even fixed-point conversion with negative-residue clamp."""
    scaled = np.maximum(weights, 0.0) * scale
    if scaled.size and float(scaled.max()) >= float(_SAFE_SENTINEL_LIMIT):
        raise CapacityOverflow("a scaled weight exceeds the safe integer range; lower the scale")
    return np.rint(scaled).astype(np.int64)


def assemble_graph(problem: Problem, scale=None) -> GraphSpec:
    """Build the full graph for a problem: all subgraphs, all arc classes.

    Node numbering is deterministic (surface-major, column-major,
    level-minor) and arcs are emitted in a fixed class/column order, so two
    assemblies of the same problem are identical arrays.
    """
    if scale is None:
        scale = CapacityScale()
    elif not isinstance(scale, CapacityScale):
        scale = CapacityScale(scale)
    sc = scale.scale

    lam = problem.num_surfaces
    X, Y, Z = problem.dims
    ncols = X * Y
    ids = np.arange(lam * ncols * Z, dtype=np.int64).reshape(lam, X, Y, Z) + 2
    maps = problem.mappings

    f_tails, f_heads, f_weights = [], [], []

    # data arcs: upward along each column, last level to the sink
    for i in range(lam):
        costs = problem.costs[i].data
        if np.any(costs < 0):
            raise NegativeDataCost(f"cost volume {i} has negative entries; normalize first")
        if Z > 1:
            f_tails.append(ids[i, :, :, :-1].ravel())
            f_heads.append(ids[i, :, :, 1:].ravel())
            f_weights.append(costs[:, :, :-1].ravel())
        f_tails.append(ids[i, :, :, Z - 1].ravel())
        f_heads.append(np.full(ncols, SINK, dtype=np.int64))
        f_weights.append(costs[:, :, Z - 1].ravel())

    # smoothness arcs: both directions of every 4-neighborhood pair
    first, second = problem.neighbor_pairs()
    if first.size:
        pos_a = maps[first[:, 0], first[:, 1]]       # (P, Z)
        pos_b = maps[second[:, 0], second[:, 1]]
        for i in range(lam):
            ids_a = ids[i, first[:, 0], first[:, 1]]   # (P, Z)
            ids_b = ids[i, second[:, 0], second[:, 1]]
            for pa, pb, ia, ib in (
                (pos_a, pos_b, ids_a, ids_b),
                (pos_b, pos_a, ids_b, ids_a),
            ):
                w = np.maximum(_bulk_weight_tensor(problem.penalties[i], pa, pb), 0.0)
                pair_idx, k1, j = np.nonzero(w)
                heads = np.where(j == Z - 1, SINK, ib[pair_idx, np.minimum(j + 1, Z - 1)])
                f_tails.append(ia[pair_idx, k1])
                f_heads.append(heads.astype(np.int64))
                f_weights.append(w[pair_idx, k1, j])

    tails = np.concatenate(f_tails) if f_tails else np.empty(0, dtype=np.int64)
    heads = np.concatenate(f_heads) if f_heads else np.empty(0, dtype=np.int64)
    caps = _quantize(np.concatenate(f_weights) if f_weights else np.empty(0), sc)

    keep = caps > 0
    tails, heads, caps = tails[keep], heads[keep], caps[keep]

    # guard with float accumulation first: an int64 sum could wrap silently
    if float(caps.sum(dtype=np.float64)) >= float(_SAFE_SENTINEL_LIMIT) / 2:
        raise CapacityOverflow(
            "scaled capacity sum too large for safe integer flow; lower the scale"
        )
    sentinel = int(caps.sum()) + 1

    s_tails, s_heads = [], []

    # source and downward monotonicity arcs
    for i in range(lam):
        s_tails.append(np.full(ncols, SOURCE, dtype=np.int64))
        s_heads.append(ids[i, :, :, 0].ravel())
        if Z > 1:
            s_tails.append(ids[i, :, :, 1:].ravel())
            s_heads.append(ids[i, :, :, :-1].ravel())

    # separation arcs between adjacent subgraphs
    if lam > 1:
        flat_maps = maps.reshape(ncols, Z)
        for i in range(lam - 1):
            gap = problem.separation.gaps[i]
            low = ids[i].reshape(ncols, Z)
            high = ids[i + 1].reshape(ncols, Z)
            targets = np.empty((ncols, Z), dtype=np.int64)
            for c in range(ncols):
                targets[c] = np.searchsorted(flat_maps[c], flat_maps[c] + gap, side="left")
            to_sink = targets == Z
            heads_sep = np.where(
                to_sink, SINK, np.take_along_axis(high, np.minimum(targets, Z - 1), axis=1)
            )
            s_tails.append(low.ravel())
            s_heads.append(heads_sep.ravel())

    inf_tails = np.concatenate(s_tails)
    inf_heads = np.concatenate(s_heads)
    inf_caps = np.full(inf_tails.size, sentinel, dtype=np.int64)

    return GraphSpec(
        num_nodes=lam * ncols * Z + 2,
        tails=np.concatenate([tails, inf_tails]),
        heads=np.concatenate([heads, inf_heads]),
        caps=np.concatenate([caps, inf_caps]),
        sentinel=sentinel,
        scale=sc,
        shape=(lam, X, Y, Z),
    )


def dump_dimacs(graph: GraphSpec, stream):
    """Write the graph in DIMACS max-flow format for external cross-checks."""
    stream.write("c surfcut graph dump\n")
    stream.write(f"c sentinel {graph.sentinel} scale {graph.scale}\n")
    stream.write(f"p max {graph.num_nodes} {graph.num_arcs}\n")
    stream.write(f"n {SOURCE + 1} s\n")
    stream.write(f"n {SINK + 1} t\n")
    for t, h, c in zip(graph.tails, graph.heads, graph.caps):
        stream.write(f"a {t + 1} {h + 1} {c}\n")


def load_dimacs(stream) -> GraphSpec:
    """Read a DIMACS max-flow file written by dump_dimacs (or compatible).

    The source and sink must be the first two nodes.  A sentinel recorded in
    the dump comment is honored; otherwise it defaults to the capacity sum
    plus one, which treats every arc as finite.
    """
    num_nodes = None
    sentinel = None
    scale = DEFAULT_SCALE
    tails, heads, caps = [], [], []
    for line in stream:
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "c" and len(parts) >= 5 and parts[1] == "sentinel":
            sentinel = int(parts[2])
            scale = int(parts[4])
        elif parts[0] == "p":
            num_nodes = int(parts[2])
        elif parts[0] == "n":
            node, role = int(parts[1]) - 1, parts[2]
            if (role == "s" and node != SOURCE) or (role == "t" and node != SINK):
                raise CapacityOverflow("source/sink must be nodes 1 and 2 in the dump")
        elif parts[0] == "a":
            tails.append(int(parts[1]) - 1)
            heads.append(int(parts[2]) - 1)
            caps.append(int(parts[3]))
    if num_nodes is None:
        raise CapacityOverflow("missing problem line in DIMACS input")
    if sentinel is None:
        sentinel = sum(caps) + 1
    return GraphSpec(num_nodes=num_nodes, tails=tails, heads=heads, caps=caps,
                     sentinel=sentinel, scale=scale)
