"""Syndrome decoders: exact minimum-weight matching and belief matching.

The matching graph has one node per detector plus a single virtual
boundary node.  Graphlike error channels (and the graphlike components
of decomposed hyperedges) become edges weighted ``log((1-p)/p)``; each
edge remembers which channels contribute to it and which observables
each contribution flips.

Plain matching (``pm``) decodes against distances precomputed on the
static weights.  Belief matching (``bm``) first runs sum-product belief
propagation on the full channel list — hyperedges included — then
re-derives per-shot edge probabilities from the posteriors and matches
against per-shot distances, which lets it pick the observable-consistent
edge flavors that static weights cannot distinguish.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit

from .dem import (
    DetectorErrorModel,
    channel_is_matchable,
    decompose_dem,
    xor_probability,
)
from .matching import MAX_DP_NODES, match_component, match_component_py, min_cost_pairing

__all__ = [
    "MatchingGraph",
    "build_matching_graph",
    "mwpm_decode",
    "decode_chunk",
    "brute_force_mwpm",
    "bp_posteriors",
    "belief_match_decode",
]

_P_MIN = 1e-12
_P_MAX = 0.5 - 1e-9


def _weight(p: float) -> float:
    p = min(max(p, _P_MIN), _P_MAX)
    return float(np.log((1.0 - p) / p))


@dataclass
class MatchingGraph:
    """Static decoding structures derived from a detector error model."""

    n_detectors: int
    n_observables: int
    # edges: ev == n_detectors means the boundary
    eu: np.ndarray
    ev: np.ndarray
    e_prob: np.ndarray
    e_obs: np.ndarray  # uint64 flavor of the most likely contributor
    e_weight: np.ndarray
    # per-edge contributing channels (CSR): channel index, flavor mask,
    # and whether the contribution is a piece of a split channel
    c_indptr: np.ndarray
    c_channel: np.ndarray
    c_obs: np.ndarray
    c_parent: np.ndarray
    # full channel list for belief propagation
    ch_prob: np.ndarray
    ch_obs: np.ndarray
    bp_indptr: np.ndarray  # channel-major incidence
    bp_det: np.ndarray
    bp_det_indptr: np.ndarray  # detector-major positions into channel-major
    bp_det_pos: np.ndarray
    # adjacency over n_detectors + 1 nodes
    a_indptr: np.ndarray
    a_edge: np.ndarray
    a_node: np.ndarray
    undecomposed: tuple[int, ...] = ()
    metadata: dict = field(default_factory=dict)
    _dist: Optional[np.ndarray] = None
    _par: Optional[np.ndarray] = None
    _ws: Optional[object] = None

    @property
    def boundary(self) -> int:
        return self.n_detectors

    @property
    def n_edges(self) -> int:
        return len(self.eu)

    def ensure_distances(self) -> tuple[np.ndarray, np.ndarray]:
        """All-pairs shortest-path distance and path-observable parity."""
        if self._dist is None:
            n_nodes = self.n_detectors + 1
            dist = np.empty((n_nodes, n_nodes), dtype=np.float64)
            par = np.empty((n_nodes, n_nodes), dtype=np.uint64)
            _all_pairs(
                n_nodes,
                self.a_indptr,
                self.a_edge,
                self.a_node,
                self.e_weight,
                self.e_obs,
                dist,
                par,
            )
            bcol = dist[:, self.boundary]
            if not np.all(np.isfinite(bcol[: self.n_detectors])):
                bad = np.flatnonzero(~np.isfinite(bcol[: self.n_detectors]))
                raise ValueError(
                    f"detectors {bad.tolist()[:8]} have no path to the boundary"
                )
            self._dist, self._par = dist, par
        return self._dist, self._par


def build_matching_graph(
    dem: DetectorErrorModel, auto_decompose: bool = True
) -> MatchingGraph:
    channels = dem.channels
    needs = any(
        not channel_is_matchable(ch) and ch.components is None
        for ch in channels
    )
    undecomposed: tuple[int, ...] = ()
    if needs and auto_decompose:
        dem, report = decompose_dem(dem)
        channels = dem.channels
        undecomposed = tuple(report.undecomposed)
    elif needs:
        undecomposed = tuple(
            i
            for i, ch in enumerate(channels)
            if not channel_is_matchable(ch) and ch.components is None
        )

    n = dem.n_detectors
    if dem.n_observables > 64:
        raise ValueError("at most 64 observables supported")
    pieces: dict[tuple[int, int], list[tuple[int, int, bool]]] = {}
    for ci, ch in enumerate(channels):
        if ch.components is not None:
            comps = ch.components
            parent = True
        elif channel_is_matchable(ch):
            comps = ((ch.detectors, ch.observables),)
            parent = False
        else:
            continue  # undecomposed hyperedge: BP-only
        masks = []
        for _, obs in comps:
            obs_mask = 0
            for o in obs:
                obs_mask |= 1 << o
            masks.append(obs_mask)
        for j, (det, _) in enumerate(comps):
            if not det:
                continue
            u, v = det[0], det[1] if len(det) == 2 else n
            key = (min(u, v), max(u, v))
            pieces.setdefault(key, []).append((ci, masks[j], parent))

    keys = sorted(pieces)
    n_edges = len(keys)
    eu = np.empty(n_edges, dtype=np.int32)
    ev = np.empty(n_edges, dtype=np.int32)
    e_prob = np.empty(n_edges, dtype=np.float64)
    e_obs = np.empty(n_edges, dtype=np.uint64)
    e_weight = np.empty(n_edges, dtype=np.float64)
    c_indptr = np.zeros(n_edges + 1, dtype=np.int64)
    c_channel: list[int] = []
    c_obs: list[int] = []
    c_parent: list[bool] = []
    for e, key in enumerate(keys):
        eu[e], ev[e] = key
        p_eff = 0.0
        best = None
        for ci, obs_mask, parent in pieces[key]:
            p_c = channels[ci].probability
            p_eff = xor_probability(p_eff, p_c)
            # flavor of the most likely contributor; whole channels beat
            # pieces of split ones at equal probability, then lowest id
            rank = (p_c, not parent, -ci)
            if best is None or rank > best[0]:
                best = (rank, obs_mask)
            c_channel.append(ci)
            c_obs.append(obs_mask)
            c_parent.append(parent)
        c_indptr[e + 1] = len(c_channel)
        e_prob[e] = p_eff
        e_obs[e] = best[1]
        e_weight[e] = _weight(p_eff)

    # adjacency over detectors + boundary
    n_nodes = n + 1
    counts = np.zeros(n_nodes, dtype=np.int64)
    for e in range(n_edges):
        counts[eu[e]] += 1
        counts[ev[e]] += 1
    a_indptr = np.zeros(n_nodes + 1, dtype=np.int64)
    np.cumsum(counts, out=a_indptr[1:])
    a_edge = np.empty(2 * n_edges, dtype=np.int32)
    a_node = np.empty(2 * n_edges, dtype=np.int32)
    cursor = a_indptr[:-1].copy()
    for e in range(n_edges):
        for src, dst in ((eu[e], ev[e]), (ev[e], eu[e])):
            a_edge[cursor[src]] = e
            a_node[cursor[src]] = dst
            cursor[src] += 1

    # belief-propagation incidence over the full channel list
    ch_prob = np.array([ch.probability for ch in channels], dtype=np.float64)
    ch_obs = np.zeros(len(channels), dtype=np.uint64)
    bp_indptr = np.zeros(len(channels) + 1, dtype=np.int64)
    bp_det: list[int] = []
    for ci, ch in enumerate(channels):
        mask = 0
        for o in ch.observables:
            mask |= 1 << o
        ch_obs[ci] = mask
        bp_det.extend(ch.detectors)
        bp_indptr[ci + 1] = len(bp_det)
    bp_det_arr = np.array(bp_det, dtype=np.int32)
    det_counts = np.zeros(n, dtype=np.int64)
    for d in bp_det_arr:
        det_counts[d] += 1
    bp_det_indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(det_counts, out=bp_det_indptr[1:])
    bp_det_pos = np.empty(len(bp_det_arr), dtype=np.int64)
    cursor = bp_det_indptr[:-1].copy()
    for pos, d in enumerate(bp_det_arr):
        bp_det_pos[cursor[d]] = pos
        cursor[d] += 1

    return MatchingGraph(
        n_detectors=n,
        n_observables=dem.n_observables,
        eu=eu,
        ev=ev,
        e_prob=e_prob,
        e_obs=e_obs,
        e_weight=e_weight,
        c_indptr=c_indptr,
        c_channel=np.array(c_channel, dtype=np.int64),
        c_obs=np.array(c_obs, dtype=np.uint64),
        c_parent=np.array(c_parent, dtype=np.uint8),
        ch_prob=ch_prob,
        ch_obs=ch_obs,
        bp_indptr=bp_indptr,
        bp_det=bp_det_arr,
        bp_det_indptr=bp_det_indptr,
        bp_det_pos=bp_det_pos,
        a_indptr=a_indptr,
        a_edge=a_edge,
        a_node=a_node,
        undecomposed=undecomposed,
        metadata=dict(dem.metadata),
    )


# ---------------------------------------------------------------------------
# shortest paths (binary-heap Dijkstra tracking observable parity)


@njit(cache=True)
def _dijkstra(
    src,
    n_nodes,
    a_indptr,
    a_edge,
    a_node,
    weights,
    e_obs,
    dist,
    par,
    targets,
    n_targets,
):
    for v in range(n_nodes):
        dist[v] = np.inf
        par[v] = 0
    cap = 2 * len(a_edge) + 8
    heap_d = np.empty(cap, dtype=np.float64)
    heap_v = np.empty(cap, dtype=np.int64)
    size = 0
    heap_d[0] = 0.0
    heap_v[0] = src
    size = 1
    dist[src] = 0.0
    settled = np.zeros(n_nodes, dtype=np.uint8)
    remaining = n_targets
    while size > 0:
        top_d = heap_d[0]
        top_v = heap_v[0]
        size -= 1
        heap_d[0] = heap_d[size]
        heap_v[0] = heap_v[size]
        i = 0
        while True:
            l, r = 2 * i + 1, 2 * i + 2
            small = i
            if l < size and heap_d[l] < heap_d[small]:
                small = l
            if r < size and heap_d[r] < heap_d[small]:
                small = r
            if small == i:
                break
            heap_d[i], heap_d[small] = heap_d[small], heap_d[i]
            heap_v[i], heap_v[small] = heap_v[small], heap_v[i]
            i = small
        if settled[top_v]:
            continue
        settled[top_v] = 1
        if targets[top_v]:
            remaining -= 1
            if remaining == 0:
                break
        for k in range(a_indptr[top_v], a_indptr[top_v + 1]):
            e = a_edge[k]
            v = a_node[k]
            if settled[v]:
                continue
            nd = top_d + weights[e]
            if nd < dist[v]:
                dist[v] = nd
                par[v] = par[top_v] ^ e_obs[e]
                heap_d[size] = nd
                heap_v[size] = v
                size += 1
                i = size - 1
                while i > 0:
                    parent = (i - 1) // 2
                    if heap_d[parent] <= heap_d[i]:
                        break
                    heap_d[i], heap_d[parent] = heap_d[parent], heap_d[i]
                    heap_v[i], heap_v[parent] = heap_v[parent], heap_v[i]
                    i = parent


@njit(cache=True)
def _all_pairs(n_nodes, a_indptr, a_edge, a_node, weights, e_obs, dist, par):
    targets = np.ones(n_nodes, dtype=np.uint8)
    for src in range(n_nodes):
        _dijkstra(
            src,
            n_nodes,
            a_indptr,
            a_edge,
            a_node,
            weights,
            e_obs,
            dist[src],
            par[src],
            targets,
            n_nodes,
        )


# ---------------------------------------------------------------------------
# plain matching


@njit(cache=True)
def _match_flagged(
    flagged,
    k,
    dist,
    par,
    rows,  # rows[i] = row index into dist/par for flagged[i]
    boundary,
    savings,
    comp_parent,
    comp_nodes,
    local,
    dp,
    choice,
):
    """Savings-transform matching over precomputed distance rows.

    Returns (observable prediction, largest component size).  Components
    above MAX_DP_NODES are left to the caller (prediction is junk then).
    """
    pred = np.uint64(0)
    if k == 0:
        return pred, 0
    for i in range(k):
        comp_parent[i] = i
    for i in range(k):
        bi = dist[rows[i], boundary]
        for j in range(i + 1, k):
            s = bi + dist[rows[j], boundary] - dist[rows[i], flagged[j]]
            savings[i, j] = s
            if s > 0.0:
                # union
                a, b = i, j
                while comp_parent[a] != a:
                    comp_parent[a] = comp_parent[comp_parent[a]]
                    a = comp_parent[a]
                while comp_parent[b] != b:
                    comp_parent[b] = comp_parent[comp_parent[b]]
                    b = comp_parent[b]
                if a != b:
                    comp_parent[b] = a
    matched = np.zeros(k, dtype=np.uint8)
    largest = 1
    for root in range(k):
        r = root
        while comp_parent[r] != r:
            r = comp_parent[r]
        if r != root:
            continue
        size = 0
        for i in range(k):
            a = i
            while comp_parent[a] != a:
                a = comp_parent[a]
            if a == root:
                comp_nodes[size] = i
                size += 1
        if size > largest:
            largest = size
        if size > MAX_DP_NODES:
            continue
        if size == 1:
            continue
        for x in range(size):
            for y in range(x + 1, size):
                i, j = comp_nodes[x], comp_nodes[y]
                local[x, y] = savings[i, j] if i < j else savings[j, i]
        match_component(size, local, dp, choice)
        mask = (1 << size) - 1
        while mask:
            x = 0
            while not (mask >> x) & 1:
                x += 1
            y = choice[mask]
            if y < 0:
                mask &= ~(1 << x)
            else:
                i, j = comp_nodes[x], comp_nodes[y]
                pred ^= par[rows[i], flagged[j]]
                matched[i] = 1
                matched[j] = 1
                mask &= ~(1 << x) & ~(1 << y)
    for i in range(k):
        if not matched[i]:
            pred ^= par[rows[i], boundary]
    return pred, largest


@njit(cache=True)
def _pm_chunk(
    det_bits,
    dist,
    par,
    boundary,
    flagged_buf,
    rows_buf,
    savings_buf,
    parent_buf,
    nodes_buf,
    local_buf,
    dp,
    choice,
    out_pred,
    out_big,
):
    n_shots, n_det = det_bits.shape
    for s in range(n_shots):
        k = 0
        for d in range(n_det):
            if det_bits[s, d]:
                flagged_buf[k] = d
                rows_buf[k] = d
                k += 1
        pred, largest = _match_flagged(
            flagged_buf,
            k,
            dist,
            par,
            rows_buf,
            boundary,
            savings_buf,
            parent_buf,
            nodes_buf,
            local_buf,
            dp,
            choice,
        )
        if largest > MAX_DP_NODES:
            out_big[s] = 1
            out_pred[s] = 0
        else:
            out_pred[s] = pred


class _Workspace:
    """Reusable per-graph scratch buffers for the decode kernels."""

    def __init__(self, graph: MatchingGraph):
        n = graph.n_detectors
        self.flagged = np.empty(n, dtype=np.int32)
        self.rows = np.empty(n + 1, dtype=np.int32)
        self.savings = np.empty((n, n), dtype=np.float64)
        self.parent = np.empty(n, dtype=np.int32)
        self.nodes = np.empty(n, dtype=np.int32)
        self.local = np.empty(
            (MAX_DP_NODES + 1, MAX_DP_NODES + 1), dtype=np.float64
        )
        self.dp = np.empty(1 << MAX_DP_NODES, dtype=np.float64)
        self.choice = np.empty(1 << MAX_DP_NODES, dtype=np.int32)
        # belief propagation / belief matching
        nnz = len(graph.bp_det)
        self.msg_c2d = np.empty(nnz, dtype=np.float64)
        self.msg_d2c = np.empty(nnz, dtype=np.float64)
        self.posterior = np.empty(len(graph.ch_prob), dtype=np.float64)
        self.shot_w = np.empty(graph.n_edges, dtype=np.float64)
        self.shot_obs = np.empty(graph.n_edges, dtype=np.uint64)
        n_nodes = n + 1
        self.shot_dist = np.empty((n + 1, n_nodes), dtype=np.float64)
        self.shot_par = np.empty((n + 1, n_nodes), dtype=np.uint64)
        self.targets = np.zeros(n_nodes, dtype=np.uint8)


def _workspace(graph: MatchingGraph) -> _Workspace:
    if not isinstance(graph._ws, _Workspace):
        graph._ws = _Workspace(graph)
    return graph._ws


def decode_chunk(
    graph: MatchingGraph,
    det_bits: np.ndarray,
    method: str = "pm",
    iterations: Optional[int] = None,
    push: str = "evidence",
) -> np.ndarray:
    """Decode a (shots, n_detectors) boolean array to observable masks."""
    if method == "pm":
        return _decode_chunk_pm(graph, det_bits)
    if method == "bm":
        return _decode_chunk_bm(graph, det_bits, iterations, push)
    raise ValueError(f"unknown decode method {method!r}")


def _decode_chunk_pm(graph: MatchingGraph, det_bits: np.ndarray) -> np.ndarray:
    dist, par = graph.ensure_distances()
    ws = _workspace(graph)
    shots = det_bits.shape[0]
    out = np.zeros(shots, dtype=np.uint64)
    big = np.zeros(shots, dtype=np.uint8)
    _pm_chunk(
        np.ascontiguousarray(det_bits, dtype=np.uint8),
        dist,
        par,
        graph.boundary,
        ws.flagged,
        ws.rows,
        ws.savings,
        ws.parent,
        ws.nodes,
        ws.local,
        ws.dp,
        ws.choice,
        out,
        big,
    )
    for s in np.flatnonzero(big):
        out[s] = _decode_shot_python(graph, np.flatnonzero(det_bits[s]))
    return out


def _decode_shot_python(graph: MatchingGraph, flagged: np.ndarray) -> int:
    """Exact fallback for syndrome components beyond the DP table size."""
    dist, par = graph.ensure_distances()
    k = len(flagged)
    savings = np.zeros((k, k), dtype=np.float64)
    b = dist[flagged, graph.boundary]
    for i in range(k):
        for j in range(i + 1, k):
            savings[i, j] = b[i] + b[j] - dist[flagged[i], flagged[j]]
    _, pairs = match_component_py(k, savings)
    pred = 0
    matched = set()
    for i, j in pairs:
        pred ^= int(par[flagged[i], flagged[j]])
        matched.update((i, j))
    for i in range(k):
        if i not in matched:
            pred ^= int(par[flagged[i], graph.boundary])
    return pred


def mwpm_decode(graph: MatchingGraph, det_bits: np.ndarray) -> int:
    """Decode one shot; ``det_bits`` is a length-n_detectors boolean array."""
    return int(_decode_chunk_pm(graph, np.asarray(det_bits, bool)[None, :])[0])


def brute_force_mwpm(graph: MatchingGraph, det_bits: np.ndarray) -> int:
    """Exhaustive minimum-cost pairing (independent of the savings DP)."""
    dist, par = graph.ensure_distances()
    flagged = np.flatnonzero(np.asarray(det_bits, bool))
    if len(flagged) == 0:
        return 0
    pair_cost = dist[np.ix_(flagged, flagged)]
    boundary_cost = dist[flagged, graph.boundary]
    _, pairs = min_cost_pairing(pair_cost, boundary_cost)
    pred = 0
    for i, j in pairs:
        if j < 0:
            pred ^= int(par[flagged[i], graph.boundary])
        else:
            pred ^= int(par[flagged[i], flagged[j]])
    return pred


# ---------------------------------------------------------------------------
# belief propagation and belief matching


@njit(cache=True)
def _bp_shot(
    syn,
    priors,
    bp_indptr,
    bp_det,
    bp_det_indptr,
    bp_det_pos,
    iterations,
    msg_c2d,
    msg_d2c,
    posterior,
):
    n_channels = len(priors)
    n_det = len(bp_det_indptr) - 1
    nnz = len(bp_det)
    for e in range(nnz):
        msg_c2d[e] = 0.0
    for c in range(n_channels):
        for e in range(bp_indptr[c], bp_indptr[c + 1]):
            msg_c2d[e] = priors[c]
    for _ in range(iterations):
        # check (detector) update with leave-one-out tanh products
        for d in range(n_det):
            lo = bp_det_indptr[d]
            hi = bp_det_indptr[d + 1]
            prod = 1.0
            for kk in range(lo, hi):
                t = np.tanh(0.5 * msg_c2d[bp_det_pos[kk]])
                if t > 0.999999999999:
                    t = 0.999999999999
                elif t < -0.999999999999:
                    t = -0.999999999999
                elif -1e-12 < t < 1e-12:
                    t = 1e-12 if t >= 0 else -1e-12
                msg_d2c[bp_det_pos[kk]] = t  # stash tanh for second pass
                prod *= t
            sign = -1.0 if syn[d] else 1.0
            for kk in range(lo, hi):
                pos = bp_det_pos[kk]
                t = msg_d2c[pos]
                loo = prod / t
                if loo > 0.999999999999:
                    loo = 0.999999999999
                elif loo < -0.999999999999:
                    loo = -0.999999999999
                msg_d2c[pos] = sign * np.log((1.0 + loo) / (1.0 - loo))
        # variable (channel) update
        for c in range(n_channels):
            total = 0.0
            for e in range(bp_indptr[c], bp_indptr[c + 1]):
                total += msg_d2c[e]
            posterior[c] = priors[c] + total
            for e in range(bp_indptr[c], bp_indptr[c + 1]):
                msg_c2d[e] = posterior[c] - msg_d2c[e]
    for c in range(n_channels):
        posterior[c] = 1.0 / (1.0 + np.exp(posterior[c]))


@njit(cache=True)
def _bm_shot(
    det_bits,
    flagged,
    k,
    q,
    ch_prob,
    bp_indptr,
    bp_det,
    eu,
    ev,
    e_prob,
    e_obs,
    c_indptr,
    c_channel,
    c_obs,
    c_parent,
    evidence_push,
    n_nodes,
    a_indptr,
    a_edge,
    a_node,
    boundary,
    shot_w,
    shot_obs,
    shot_dist,
    shot_par,
    rows,
    targets,
    savings,
    parent,
    nodes,
    local,
    dp,
    choice,
):
    n_channels = len(ch_prob)
    cred = np.empty(n_channels, dtype=np.uint8)
    for c in range(n_channels):
        ok = 1
        for kk in range(bp_indptr[c], bp_indptr[c + 1]):
            if det_bits[bp_det[kk]] == 0:
                ok = 0
                break
        cred[c] = ok
    n_edges = len(eu)
    for e in range(n_edges):
        p_eff = 0.0
        best_q = -1.0
        best_c = -1
        best_whole = 0
        best_obs = np.uint64(0)
        for kk in range(c_indptr[e], c_indptr[e + 1]):
            c = c_channel[kk]
            # a channel with an unflagged detector did not fire cleanly:
            # its posterior says nothing about this edge in this shot
            if cred[c] == 0:
                if not evidence_push:
                    pc = ch_prob[c]
                    p_eff = p_eff * (1.0 - pc) + pc * (1.0 - p_eff)
                continue
            qc = q[c]
            if not evidence_push:
                p_eff = p_eff * (1.0 - qc) + qc * (1.0 - p_eff)
            # same ranking as the static flavor: probability, then whole
            # channels before pieces of split ones, then lowest id
            whole = 1 - c_parent[kk]
            if qc > best_q or (
                qc == best_q
                and (whole > best_whole or (whole == best_whole and c < best_c))
            ):
                best_q = qc
                best_c = c
                best_whole = whole
                best_obs = c_obs[kk]
        if best_c < 0:
            # no credible contributor: keep the static edge
            p_eff = e_prob[e]
            best_obs = e_obs[e]
        elif evidence_push:
            # edge log-odds = static log-odds + extrinsic log-likelihood
            # shift of the strongest contributor
            qf = min(max(best_q, 1e-12), 1.0 - 1e-12)
            pf = min(max(ch_prob[best_c], 1e-12), 1.0 - 1e-12)
            pe = min(max(e_prob[e], 1e-12), 1.0 - 1e-12)
            lo = (
                np.log(pe / (1.0 - pe))
                + np.log(qf / (1.0 - qf))
                - np.log(pf / (1.0 - pf))
            )
            p_eff = 1.0 / (1.0 + np.exp(-lo))
        if p_eff < 1e-12:
            p_eff = 1e-12
        if p_eff > 0.5:
            # likelier-than-not edges: keep weights positive but strictly
            # ordered, so the most confident explanation wins matching ties
            if p_eff > 1.0 - 1e-12:
                p_eff = 1.0 - 1e-12
            shot_w[e] = 1e-6 * (1.0 - p_eff)
        else:
            shot_w[e] = np.log((1.0 - p_eff) / p_eff)
        shot_obs[e] = best_obs
    for v in range(n_nodes):
        targets[v] = 0
    for i in range(k):
        targets[flagged[i]] = 1
    targets[boundary] = 1
    for i in range(k):
        _dijkstra(
            flagged[i],
            n_nodes,
            a_indptr,
            a_edge,
            a_node,
            shot_w,
            shot_obs,
            shot_dist[i],
            shot_par[i],
            targets,
            k + 1,
        )
        rows[i] = i
    pred, largest = _match_flagged(
        flagged,
        k,
        shot_dist,
        shot_par,
        rows,
        boundary,
        savings,
        parent,
        nodes,
        local,
        dp,
        choice,
    )
    return pred, largest


def bp_posteriors(
    graph: MatchingGraph, det_bits: np.ndarray, iterations: int
) -> np.ndarray:
    """Per-channel posterior error probabilities for one shot."""
    ws = _workspace(graph)
    syn = np.ascontiguousarray(np.asarray(det_bits, bool), dtype=np.uint8)
    priors = np.log(
        (1.0 - np.clip(graph.ch_prob, _P_MIN, _P_MAX))
        / np.clip(graph.ch_prob, _P_MIN, _P_MAX)
    )
    _bp_shot(
        syn,
        priors,
        graph.bp_indptr,
        graph.bp_det,
        graph.bp_det_indptr,
        graph.bp_det_pos,
        iterations,
        ws.msg_c2d,
        ws.msg_d2c,
        ws.posterior,
    )
    return ws.posterior.copy()


def _decode_chunk_bm(
    graph: MatchingGraph,
    det_bits: np.ndarray,
    iterations: Optional[int],
    push: str = "evidence",
) -> np.ndarray:
    if push not in ("evidence", "marginal"):
        raise ValueError(f"unknown posterior push rule {push!r}")
    evidence_push = push == "evidence"
    if iterations is None:
        iterations = int(graph.metadata.get("d", 5))
    graph.ensure_distances()  # validates boundary reachability up front
    ws = _workspace(graph)
    priors = np.log(
        (1.0 - np.clip(graph.ch_prob, _P_MIN, _P_MAX))
        / np.clip(graph.ch_prob, _P_MIN, _P_MAX)
    )
    det_bits = np.ascontiguousarray(np.asarray(det_bits, bool), dtype=np.uint8)
    shots = det_bits.shape[0]
    out = np.zeros(shots, dtype=np.uint64)
    n_nodes = graph.n_detectors + 1
    for s in range(shots):
        flagged = np.flatnonzero(det_bits[s]).astype(np.int32)
        k = len(flagged)
        if k == 0:
            continue
        _bp_shot(
            det_bits[s],
            priors,
            graph.bp_indptr,
            graph.bp_det,
            graph.bp_det_indptr,
            graph.bp_det_pos,
            iterations,
            ws.msg_c2d,
            ws.msg_d2c,
            ws.posterior,
        )
        ws.flagged[:k] = flagged
        pred, largest = _bm_shot(
            det_bits[s],
            ws.flagged,
            k,
            ws.posterior,
            graph.ch_prob,
            graph.bp_indptr,
            graph.bp_det,
            graph.eu,
            graph.ev,
            graph.e_prob,
            graph.e_obs,
            graph.c_indptr,
            graph.c_channel,
            graph.c_obs,
            graph.c_parent,
            evidence_push,
            n_nodes,
            graph.a_indptr,
            graph.a_edge,
            graph.a_node,
            graph.boundary,
            ws.shot_w,
            ws.shot_obs,
            ws.shot_dist,
            ws.shot_par,
            ws.rows,
            ws.targets,
            ws.savings,
            ws.parent,
            ws.nodes,
            ws.local,
            ws.dp,
            ws.choice,
        )
        if largest > MAX_DP_NODES:
            out[s] = _decode_shot_bm_python(graph, ws, flagged, k)
        else:
            out[s] = pred
    return out


def _decode_shot_bm_python(graph, ws, flagged, k):
    savings = np.zeros((k, k), dtype=np.float64)
    b = ws.shot_dist[np.arange(k), graph.boundary]
    for i in range(k):
        for j in range(i + 1, k):
            savings[i, j] = b[i] + b[j] - ws.shot_dist[i, flagged[j]]
    _, pairs = match_component_py(k, savings)
    pred = 0
    matched = set()
    for i, j in pairs:
        pred ^= int(ws.shot_par[i, flagged[j]])
        matched.update((i, j))
    for i in range(k):
        if i not in matched:
            pred ^= int(ws.shot_par[i, graph.boundary])
    return pred


def belief_match_decode(
    graph: MatchingGraph,
    det_bits: np.ndarray,
    iterations: Optional[int] = None,
    push: str = "evidence",
) -> int:
    """Decode one shot with belief propagation followed by matching.

    ``iterations`` defaults to the code distance recorded in the graph
    metadata.  ``push`` selects how channel posteriors reweight the
    matching edges:

    * ``"evidence"`` (default) — shift each edge's static log-odds by
      the extrinsic log-likelihood its strongest contributor gained
      between prior and posterior.  A zero syndrome leaves the static
      weights untouched, so this degrades gracefully to plain matching.
    * ``"marginal"`` — replace each edge's probability with the
      xor-combination of its contributors' raw posteriors (clamped at
      1/2).  Simpler, but two edges sharing one joint explanation both
      absorb its full marginal, which can double-count near boundaries.
    """
    return int(
        _decode_chunk_bm(graph, np.asarray(det_bits, bool)[None, :], iterations, push)[
            0
        ]
    )
