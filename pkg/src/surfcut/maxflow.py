"""Minimum s-t cut solver and surface recovery.

The solver is an augmenting-path algorithm with search-tree reuse in the
style favored by the graph-cut segmentation literature: two search trees
grow from the source and the sink, found paths are augmented, and orphaned
subtrees are re-adopted instead of rebuilt.  Capacities are exact 64-bit
integers, so termination and the flow value are exact.  The kernel is
compiled with numba; the Python layer stays array-based.

Among the possibly many minimum cuts, the source-side-minimal one is
returned (nodes reachable from s in the residual graph).  That set is the
same for every maximum flow, which makes the cut, and hence the recovered
labels, deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import Problem, SegmentationResult
from .errors import CapacityOverflow, Infeasible, InternalInconsistency
from .graph import SINK, SOURCE, GraphSpec

_FREE, _SRC, _SNK = 0, 1, 2


@dataclass(frozen=True)
class CutResult:
    """Max-flow value, source-side membership, and severed arc indices."""

    flow: int
    source_side: np.ndarray          # bool per node, True on the s side
    severed: np.ndarray              # indices into the GraphSpec arc arrays

    @property
    def num_severed(self):
        return self.severed.size


def _build_residual(num_nodes, tails, heads, caps):
    """Paired forward/backward residual arcs in CSR order by tail node."""
    m = tails.size
    all_tails = np.concatenate([tails, heads])
    all_heads = np.concatenate([heads, tails])
    all_caps = np.concatenate([caps, np.zeros(m, dtype=np.int64)])
    order = np.argsort(all_tails, kind="stable")
    first = np.zeros(num_nodes + 1, dtype=np.int64)
    np.cumsum(np.bincount(all_tails, minlength=num_nodes), out=first[1:])
    slot = np.empty(2 * m, dtype=np.int64)
    slot[order] = np.arange(2 * m)
    partner = np.concatenate([np.arange(m, 2 * m), np.arange(m)])
    adj_to = np.ascontiguousarray(all_heads[order])
    adj_rev = np.ascontiguousarray(slot[partner[order]])
    resid = np.ascontiguousarray(all_caps[order])
    return first, adj_to, adj_rev, resid


@njit(cache=True)
def _parent_node(u, tree, parent, adj_to, adj_rev):
    e = parent[u]
    if tree[u] == _SRC:
        return adj_to[adj_rev[e]]
    return adj_to[e]


@njit(cache=True)
def _valid_root(v, time, tree, parent, dist, tstamp, adj_to, adj_rev):
    # first pass: walk to a root (s/t or a node stamped this round)
    x = v
    length = 0
    base = np.int64(-1)
    while True:
        if x <= 1:
            base = 0
            break
        if tstamp[x] == time:
            base = dist[x]
            break
        if parent[x] < 0:
            return False
        length += 1
        x = _parent_node(x, tree, parent, adj_to, adj_rev)
    # second pass: restamp the walked prefix with exact distances
    x = v
    i = length
    while i > 0:
        dist[x] = base + i
        tstamp[x] = time
        x = _parent_node(x, tree, parent, adj_to, adj_rev)
        i -= 1
    return True


@njit(cache=True)
def _bk_maxflow(num_nodes, first, adj_to, adj_rev, resid, cutoff):
    """Runs to the maximum flow, or stops once flow >= cutoff (infeasible)."""
    n = num_nodes
    tree = np.zeros(n, dtype=np.int8)
    parent = np.full(n, -1, dtype=np.int64)
    dist = np.zeros(n, dtype=np.int64)
    tstamp = np.zeros(n, dtype=np.int64)
    in_active = np.zeros(n, dtype=np.bool_)

    acap = n + 1
    active = np.empty(acap, dtype=np.int64)
    a_head = 0
    a_tail = 0
    ocap = n + 1
    orphans = np.empty(ocap, dtype=np.int64)
    o_head = 0
    o_tail = 0

    path_nodes = np.empty(n, dtype=np.int64)   # scratch for augment orphans
    path_dist = np.empty(n, dtype=np.int64)

    tree[SOURCE] = _SRC
    tree[SINK] = _SNK
    tstamp[SOURCE] = 1
    tstamp[SINK] = 1
    for term in (SOURCE, SINK):
        active[a_tail] = term
        a_tail = (a_tail + 1) % acap
        in_active[term] = True

    time = np.int64(1)
    flow = np.int64(0)

    while flow < cutoff:
        # ---- grow: expand trees from active nodes until they touch ----
        conn = np.int64(-1)
        while a_head != a_tail:
            u = active[a_head]
            if tree[u] == _FREE:
                a_head = (a_head + 1) % acap
                in_active[u] = False
                continue
            grow_src = tree[u] == _SRC
            for e in range(first[u], first[u + 1]):
                res = resid[e] if grow_src else resid[adj_rev[e]]
                if res <= 0:
                    continue
                v = adj_to[e]
                link = e if grow_src else adj_rev[e]
                if tree[v] == _FREE:
                    tree[v] = _SRC if grow_src else _SNK
                    parent[v] = link
                    dist[v] = dist[u] + 1
                    tstamp[v] = tstamp[u]
                    if not in_active[v]:
                        in_active[v] = True
                        active[a_tail] = v
                        a_tail = (a_tail + 1) % acap
                elif (tree[v] == _SNK) == grow_src:
                    conn = link   # arc oriented source tree -> sink tree
                    break
                elif tstamp[v] <= tstamp[u] and dist[v] > dist[u] + 1:
                    parent[v] = link
                    dist[v] = dist[u] + 1
                    tstamp[v] = tstamp[u]
            if conn >= 0:
                break
            a_head = (a_head + 1) % acap
            in_active[u] = False
        if conn < 0:
            break

        time += 1

        # ---- augment: bottleneck along the path through conn ----
        bottleneck = resid[conn]
        x = adj_to[adj_rev[conn]]
        while x != SOURCE:
            e = parent[x]
            if resid[e] < bottleneck:
                bottleneck = resid[e]
            x = adj_to[adj_rev[e]]
        x = adj_to[conn]
        while x != SINK:
            e = parent[x]
            if resid[e] < bottleneck:
                bottleneck = resid[e]
            x = adj_to[e]

        n_orph = 0
        resid[conn] -= bottleneck
        resid[adj_rev[conn]] += bottleneck
        x = adj_to[adj_rev[conn]]
        while x != SOURCE:
            e = parent[x]
            resid[e] -= bottleneck
            resid[adj_rev[e]] += bottleneck
            nxt = adj_to[adj_rev[e]]
            if resid[e] == 0:
                parent[x] = -1
                path_nodes[n_orph] = x
                path_dist[n_orph] = dist[x]
                n_orph += 1
            x = nxt
        x = adj_to[conn]
        while x != SINK:
            e = parent[x]
            resid[e] -= bottleneck
            resid[adj_rev[e]] += bottleneck
            nxt = adj_to[e]
            if resid[e] == 0:
                parent[x] = -1
                path_nodes[n_orph] = x
                path_dist[n_orph] = dist[x]
                n_orph += 1
            x = nxt
        flow += bottleneck

        # queue orphans nearest their root first
        ord_idx = np.argsort(path_dist[:n_orph], kind="mergesort")
        for i in range(n_orph):
            orphans[o_tail] = path_nodes[ord_idx[i]]
            o_tail = (o_tail + 1) % ocap

        # ---- adopt: find new parents for orphaned subtrees ----
        while o_head != o_tail:
            u = orphans[o_head]
            o_head = (o_head + 1) % ocap
            side = tree[u]
            src_side = side == _SRC

            deg = first[u + 1] - first[u]
            cand_arc = np.empty(deg, dtype=np.int64)
            cand_dist = np.empty(deg, dtype=np.int64)
            n_cand = 0
            for e in range(first[u], first[u + 1]):
                res = resid[adj_rev[e]] if src_side else resid[e]
                if res <= 0:
                    continue
                v = adj_to[e]
                if tree[v] != side:
                    continue
                cand_arc[n_cand] = e
                cand_dist[n_cand] = dist[v]
                n_cand += 1

            adopted = False
            if n_cand:
                order = np.argsort(cand_dist[:n_cand], kind="mergesort")
                for i in range(n_cand):
                    e = cand_arc[order[i]]
                    v = adj_to[e]
                    if _valid_root(v, time, tree, parent, dist, tstamp, adj_to, adj_rev):
                        parent[u] = adj_rev[e] if src_side else e
                        dist[u] = dist[v] + 1
                        tstamp[u] = time
                        adopted = True
                        break

            if not adopted:
                for e in range(first[u], first[u + 1]):
                    v = adj_to[e]
                    if tree[v] != side:
                        continue
                    res = resid[adj_rev[e]] if src_side else resid[e]
                    if res > 0 and not in_active[v]:
                        in_active[v] = True
                        active[a_tail] = v
                        a_tail = (a_tail + 1) % acap
                    if parent[v] >= 0 and _parent_node(v, tree, parent, adj_to, adj_rev) == u:
                        parent[v] = -1
                        o_head = (o_head - 1) % ocap
                        orphans[o_head] = v
                tree[u] = _FREE

    return flow


@njit(cache=True)
def _reachable_from_source(num_nodes, first, adj_to, resid):
    seen = np.zeros(num_nodes, dtype=np.bool_)
    stack = np.empty(num_nodes, dtype=np.int64)
    seen[SOURCE] = True
    stack[0] = SOURCE
    top = 1
    while top:
        top -= 1
        u = stack[top]
        for e in range(first[u], first[u + 1]):
            if resid[e] > 0:
                v = adj_to[e]
                if not seen[v]:
                    seen[v] = True
                    stack[top] = v
                    top += 1
    return seen


def solve_min_cut(graph: GraphSpec) -> CutResult:
    """Compute the maximum flow and the source-side-minimal minimum cut.

    Raises Infeasible when the flow reaches the sentinel, which means every
    cut severs an infinite arc.
    """
    first, adj_to, adj_rev, resid = _build_residual(
        graph.num_nodes, graph.tails, graph.heads, graph.caps
    )
    flow = int(_bk_maxflow(graph.num_nodes, first, adj_to, adj_rev, resid, graph.sentinel))
    if flow >= graph.sentinel:
        raise Infeasible(f"flow {flow} reached sentinel {graph.sentinel}")

    source_side = np.asarray(
        _reachable_from_source(graph.num_nodes, first, adj_to, resid)
    )
    if source_side[SINK] or not source_side[SOURCE]:
        raise InternalInconsistency("sink reachable from source after max flow")

    severed = np.nonzero(source_side[graph.tails] & ~source_side[graph.heads])[0]
    cut_value = int(graph.caps[severed].sum())
    if cut_value != flow:
        raise InternalInconsistency(
            f"cut capacity {cut_value} != flow {flow}; duality violated"
        )
    return CutResult(flow=flow, source_side=source_side, severed=severed)


def recover_surfaces(
    cut: CutResult, problem: Problem, graph: GraphSpec, energy_offset: float = 0.0
) -> SegmentationResult:
    """Read labels off the cut and map them to real positions.

    The label of a column is the highest level on the source side; the
    sentinel down-arcs guarantee the source side of each column is a
    contiguous prefix, which is verified here.  The reported energy is
    flow / scale plus any cost-normalization offset the caller removed
    before assembly.
    """
    lam, X, Y, Z = graph.shape
    interior = cut.source_side[2:].reshape(lam, X, Y, Z)
    counts = interior.sum(axis=3)
    if np.any(counts < 1):
        raise InternalInconsistency("a column has an empty source-side prefix")
    expected = np.arange(Z) < counts[..., None]
    if not np.array_equal(interior, expected):
        raise InternalInconsistency("non-contiguous source-side prefix in a column")

    labels = counts.astype(np.int64) - 1
    xs, ys = np.meshgrid(np.arange(X), np.arange(Y), indexing="ij")
    positions = problem.mappings[xs[None], ys[None], labels]

    if lam > 1:
        gaps = np.asarray(problem.separation.gaps)[:, None, None]
        if np.any(np.diff(positions, axis=0) < gaps):
            raise InternalInconsistency("recovered surfaces violate the separation constraint")

    energy = cut.flow / graph.scale + energy_offset
    return SegmentationResult(labels=labels, positions=positions, energy=energy, flow=cut.flow)


def quantize_energy(real_energy: float, scale) -> int:
    """Round-half-even fixed-point value of an energy at the given scale."""
    sc = scale.scale if hasattr(scale, "scale") else int(scale)
    if not np.isfinite(real_energy):
        raise CapacityOverflow("energy must be finite")
    q = float(np.rint(real_energy * sc))
    if abs(q) >= float(1 << 62):
        raise CapacityOverflow("quantized energy exceeds the safe integer range")
    return int(q)
