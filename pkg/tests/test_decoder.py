"""Matching-graph construction and decoder exactness."""

import numpy as np
import pytest

from ftsurf.circuits import NoiseModel, build_memory_circuit
from ftsurf.dem import DetectorErrorModel, ErrorChannel, build_dem, sample_shots
from ftsurf.decoder import (
    belief_match_decode,
    bp_posteriors,
    brute_force_mwpm,
    build_matching_graph,
    decode_chunk,
    mwpm_decode,
)
from ftsurf.layout import build_layout
from ftsurf.matching import (
    backtrack_pairs,
    match_component,
    match_component_py,
    min_cost_pairing,
)


def _random_dem(rng, n_det=10):
    channels = []
    seen = set()
    for d in range(n_det):  # boundary edge for every detector
        channels.append(
            ErrorChannel(
                float(rng.uniform(1e-4, 0.3)),
                (d,),
                (0,) if rng.random() < 0.4 else (),
            )
        )
        seen.add((d,))
    for _ in range(2 * n_det):
        u, v = sorted(rng.choice(n_det, size=2, replace=False).tolist())
        if (u, v) in seen:
            continue
        seen.add((u, v))
        channels.append(
            ErrorChannel(
                float(rng.uniform(1e-4, 0.3)),
                (u, v),
                (0,) if rng.random() < 0.4 else (),
            )
        )
    return DetectorErrorModel(n_det, 1, channels)


def test_mwpm_matches_brute_force_on_200_random_graphs():
    rng = np.random.default_rng(7)
    for trial in range(200):
        dem = _random_dem(rng, n_det=int(rng.integers(6, 14)))
        graph = build_matching_graph(dem)
        k = int(rng.integers(1, min(dem.n_detectors, 11) + 1))
        flagged = rng.choice(dem.n_detectors, size=k, replace=False)
        bits = np.zeros(dem.n_detectors, dtype=bool)
        bits[flagged] = True
        assert mwpm_decode(graph, bits) == brute_force_mwpm(graph, bits), trial


def test_savings_dp_matches_networkx():
    nx = pytest.importorskip("networkx")
    rng = np.random.default_rng(21)
    for trial in range(60):
        k = int(rng.integers(2, 11))
        savings = np.zeros((k, k))
        g = nx.Graph()
        g.add_nodes_from(range(k))
        for i in range(k):
            for j in range(i + 1, k):
                if rng.random() < 0.6:
                    w = float(rng.uniform(-1.0, 2.0))
                    savings[i, j] = w
                    if w > 0:
                        g.add_edge(i, j, weight=w)
        dp = np.empty(1 << k)
        choice = np.empty(1 << k, dtype=np.int32)
        total = match_component(k, savings, dp, choice)
        mate = nx.max_weight_matching(g, maxcardinality=False)
        nx_total = sum(g[u][v]["weight"] for u, v in mate)
        assert total == pytest.approx(nx_total, abs=1e-9), trial


def test_match_component_py_twin():
    rng = np.random.default_rng(5)
    for _ in range(40):
        k = int(rng.integers(1, 9))
        savings = np.where(
            rng.random((k, k)) < 0.5, rng.uniform(-1, 2, (k, k)), 0.0
        )
        dp = np.empty(1 << k)
        choice = np.empty(1 << k, dtype=np.int32)
        total = match_component(k, savings, dp, choice)
        total_py, pairs_py = match_component_py(k, savings)
        assert total == pytest.approx(total_py, abs=1e-12)
        pairs = backtrack_pairs(k, choice)
        assert sum(savings[min(p), max(p)] for p in pairs) == pytest.approx(
            total, abs=1e-12
        )
        assert sum(savings[min(p), max(p)] for p in pairs_py) == pytest.approx(
            total, abs=1e-12
        )


def test_min_cost_pairing_basics():
    pair = np.array([[0.0, 1.0], [1.0, 0.0]])
    cost, pairs = min_cost_pairing(pair, np.array([5.0, 5.0]))
    assert cost == 1.0 and pairs == [(0, 1)]
    cost, pairs = min_cost_pairing(pair, np.array([0.2, 0.2]))
    assert cost == pytest.approx(0.4)
    assert pairs == [(0, -1), (1, -1)]
    with pytest.raises(ValueError):
        min_cost_pairing(np.zeros((15, 15)), np.zeros(15))


def test_min_cost_pairing_lexicographic_ties():
    # two optimal solutions; the sorted-pair-list tie-break picks (0,1),(2,3)
    pair = np.full((4, 4), 1.0)
    np.fill_diagonal(pair, 0.0)
    cost, pairs = min_cost_pairing(pair, np.full(4, 10.0))
    assert cost == pytest.approx(2.0)
    assert pairs == [(0, 1), (2, 3)]


@pytest.fixture(scope="module")
def rotated_cz_graph():
    lay = build_layout("rotated", 3)
    circ = build_memory_circuit(lay, basis="Z", rounds=3, style="cz")
    dem = build_dem(circ, NoiseModel("NI", p=0.004))
    return dem, build_matching_graph(dem)


def test_graph_structure(rotated_cz_graph):
    dem, graph = rotated_cz_graph
    assert graph.n_detectors == dem.n_detectors
    assert graph.undecomposed == ()
    assert np.all(graph.e_prob > 0) and np.all(graph.e_prob < 0.5)
    assert np.all(graph.e_weight > 0)
    # every edge's contributors XOR-combine to its probability
    for e in range(graph.n_edges):
        lo, hi = graph.c_indptr[e], graph.c_indptr[e + 1]
        p = 0.0
        for ci in graph.c_channel[lo:hi]:
            q = dem.channels[ci].probability
            p = p * (1 - q) + q * (1 - p)
        assert graph.e_prob[e] == pytest.approx(p, rel=1e-12)


def test_distance_matrix_against_networkx(rotated_cz_graph):
    nx = pytest.importorskip("networkx")
    _, graph = rotated_cz_graph
    dist, _ = graph.ensure_distances()
    g = nx.Graph()
    g.add_nodes_from(range(graph.n_detectors + 1))
    for e in range(graph.n_edges):
        u, v = int(graph.eu[e]), int(graph.ev[e])
        w = float(graph.e_weight[e])
        if not g.has_edge(u, v) or g[u][v]["weight"] > w:
            g.add_edge(u, v, weight=w)
    ref = dict(nx.all_pairs_dijkstra_path_length(g))
    for u in range(0, graph.n_detectors + 1, 5):
        for v in range(0, graph.n_detectors + 1, 3):
            expected = ref[u].get(v, np.inf)
            assert dist[u, v] == pytest.approx(expected, abs=1e-9)


def test_distance_matrix_symmetry(rotated_cz_graph):
    _, graph = rotated_cz_graph
    dist, _ = graph.ensure_distances()
    finite = np.isfinite(dist)
    assert np.array_equal(finite, finite.T)
    assert np.allclose(dist[finite], dist.T[finite], atol=1e-9)


def test_pm_corrects_every_single_fault(rotated_cz_graph):
    # Any one channel fires alone: an exact matcher on a circuit whose
    # schedule preserves the code distance must restore the observable.
    dem, graph = rotated_cz_graph
    for ch in dem.channels:
        bits = np.zeros(dem.n_detectors, dtype=bool)
        for d in ch.detectors:
            bits[d] = True
        want = sum(1 << o for o in ch.observables)
        assert mwpm_decode(graph, bits) == want, ch


def test_bm_corrects_every_single_fault_unrotated_czz():
    lay = build_layout("unrotated", 3)
    circ = build_memory_circuit(lay, basis="Z", rounds=3, style="czz")
    dem = build_dem(circ, NoiseModel("NI", p=0.004))
    graph = build_matching_graph(dem)
    wrong = 0
    for ch in dem.channels:
        bits = np.zeros(dem.n_detectors, dtype=bool)
        for d in ch.detectors:
            bits[d] = True
        want = sum(1 << o for o in ch.observables)
        if belief_match_decode(graph, bits, iterations=3) != want:
            wrong += 1
    assert wrong == 0


def test_decode_chunk_matches_single_shot(rotated_cz_graph):
    dem, graph = rotated_cz_graph
    det, _ = sample_shots(dem, 200, seed=3)
    chunk = decode_chunk(graph, det, "pm")
    for s in range(0, 200, 17):
        assert int(chunk[s]) == mwpm_decode(graph, det[s])


def test_decode_deterministic(rotated_cz_graph):
    dem, graph = rotated_cz_graph
    det, _ = sample_shots(dem, 500, seed=11)
    a = decode_chunk(graph, det, "pm")
    b = decode_chunk(graph, det, "pm")
    assert np.array_equal(a, b)
    c = decode_chunk(graph, det[:50], "bm", iterations=3)
    d = decode_chunk(graph, det[:50], "bm", iterations=3)
    assert np.array_equal(c, d)


def test_zero_syndrome_decodes_to_identity(rotated_cz_graph):
    _, graph = rotated_cz_graph
    bits = np.zeros(graph.n_detectors, dtype=bool)
    assert mwpm_decode(graph, bits) == 0
    assert belief_match_decode(graph, bits, iterations=3) == 0
    assert brute_force_mwpm(graph, bits) == 0


def test_bp_posteriors_identify_strong_syndrome(rotated_cz_graph):
    dem, graph = rotated_cz_graph
    # fire one high-degree channel; its posterior must exceed its prior
    candidates = [
        i for i, ch in enumerate(dem.channels) if len(ch.detectors) == 2
    ]
    for ci in candidates[:20]:
        ch = dem.channels[ci]
        bits = np.zeros(dem.n_detectors, dtype=bool)
        for d in ch.detectors:
            bits[d] = True
        q = bp_posteriors(graph, bits, iterations=4)
        assert q.shape == (len(dem.channels),)
        assert np.all((q >= 0) & (q <= 1))
        assert q[ci] > 10 * ch.probability
    # trivial syndrome: every posterior stays small
    q0 = bp_posteriors(graph, np.zeros(dem.n_detectors, bool), iterations=4)
    assert np.all(q0 < 0.05)


def test_bm_beats_pm_at_moderate_noise():
    # belief matching re-weights by correlations, so on a CZZ circuit with
    # many hyperedge channels it should not do worse than plain matching
    lay = build_layout("unrotated", 3)
    circ = build_memory_circuit(lay, basis="Z", rounds=3, style="czz")
    dem = build_dem(circ, NoiseModel("NI", p=0.008))
    graph = build_matching_graph(dem)
    det, obs = sample_shots(dem, 1500, seed=19)
    truth = obs[:, 0].astype(np.uint64)
    pm_fail = int((decode_chunk(graph, det, "pm") != truth).sum())
    bm_fail = int((decode_chunk(graph, det, "bm", iterations=3) != truth).sum())
    assert pm_fail > 0  # this regime is noisy enough to see failures
    assert bm_fail <= pm_fail * 1.1 + 3


def test_unreachable_boundary_raises():
    dem = DetectorErrorModel(
        3,
        0,
        [
            ErrorChannel(0.01, (0,), ()),
            ErrorChannel(0.01, (1, 2), ()),  # detectors 1,2 boundary-less
        ],
    )
    graph = build_matching_graph(dem)
    with pytest.raises(ValueError, match="boundary"):
        graph.ensure_distances()


def test_unknown_method_rejected(rotated_cz_graph):
    _, graph = rotated_cz_graph
    with pytest.raises(ValueError):
        decode_chunk(graph, np.zeros((1, graph.n_detectors), bool), "magic")
