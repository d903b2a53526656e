import numpy as np
import pytest

from opinet import (CommunityGraph, ConfigError, GraphConfig, ensure_connected,
                    generate_community_graph, graph_from_pairs, is_connected,
                    laplacian, load_graph, measured_mixing, save_graph,
                    spectral_gap)


def path3():
    return graph_from_pairs(3, [(0, 1), (1, 2)])


def test_graph_from_pairs_basic():
    g = path3()
    assert g.n_nodes == 3
    assert g.n_edges == 2
    np.testing.assert_array_equal(g.degrees, [1, 2, 1])
    np.testing.assert_array_equal(g.community, [1, 1, 1])
    np.testing.assert_array_equal(g.neighbors(1), [0, 2])
    np.testing.assert_array_equal(g.neighbors(0), [1])


def test_edges_are_canonical():
    # i < j, lexicographically sorted, no duplicates
    g = graph_from_pairs(4, [(3, 2), (1, 0), (0, 2)])
    np.testing.assert_array_equal(g.edges, [[0, 1], [0, 2], [2, 3]])


def test_pairs_deduplicate_and_reject_self_loops():
    # (1, 0) is the same undirected edge as (0, 1)
    g = graph_from_pairs(3, [(0, 1), (1, 0)])
    assert g.n_edges == 1
    with pytest.raises(ConfigError):
        graph_from_pairs(3, [(1, 1)])


def test_direct_construction_rejects_duplicates():
    edges = np.array([[0, 1], [0, 1]])
    with pytest.raises(ConfigError):
        CommunityGraph(n_nodes=3, edges=edges, community=np.ones(3, dtype=int))


def test_direct_construction_requires_canonical_order():
    edges = np.array([[1, 2], [0, 1]])
    with pytest.raises(ConfigError):
        CommunityGraph(n_nodes=3, edges=edges, community=np.ones(3, dtype=int))


def test_config_validation():
    with pytest.raises(ConfigError):
        GraphConfig(n_nodes=1).validate()
    with pytest.raises(ConfigError):
        GraphConfig(n_nodes=50, mean_degree=0.0).validate()
    with pytest.raises(ConfigError):
        GraphConfig(n_nodes=50, mixing_mu=1.5).validate()
    with pytest.raises(ConfigError):
        GraphConfig(n_nodes=50, n_groups=2,
                    proportions=(0.3, 0.3, 0.4)).validate()
    with pytest.raises(ConfigError):
        GraphConfig(n_nodes=50, mean_degree=49.0).validate()
    # intra-community degree demand must stay below the community size
    with pytest.raises(ConfigError):
        GraphConfig(n_nodes=20, n_groups=2, mean_degree=12.0,
                    mixing_mu=0.0).validate()
    GraphConfig(n_nodes=200, n_groups=3, mean_degree=10.0,
                mixing_mu=0.1).validate()


def test_community_sizes_largest_remainder():
    cfg = GraphConfig(n_nodes=10, n_groups=3,
                      proportions=(1 / 3, 1 / 3, 1 / 3), mean_degree=3.0,
                      mixing_mu=0.5, seed=0)
    g = generate_community_graph(cfg)
    sizes = np.bincount(g.community - 1, minlength=3)
    np.testing.assert_array_equal(sizes, [4, 3, 3])
    assert sizes.sum() == 10


def test_generation_is_deterministic():
    cfg = GraphConfig(n_nodes=120, n_groups=3, mean_degree=8.0,
                      mixing_mu=0.2, seed=7)
    a = generate_community_graph(cfg)
    b = generate_community_graph(cfg)
    np.testing.assert_array_equal(a.edges, b.edges)
    np.testing.assert_array_equal(a.community, b.community)


def test_mixing_extremes():
    intra = generate_community_graph(GraphConfig(
        n_nodes=150, n_groups=3, mean_degree=8.0, mixing_mu=0.0, seed=3))
    assert measured_mixing(intra) == 0.0
    inter = generate_community_graph(GraphConfig(
        n_nodes=150, n_groups=3, mean_degree=8.0, mixing_mu=1.0, seed=3))
    assert measured_mixing(inter) == 1.0


def test_measured_mixing_hand_value():
    g = graph_from_pairs(4, [(0, 1), (1, 2), (2, 3)],
                         community=np.array([1, 1, 2, 2]))
    assert measured_mixing(g) == pytest.approx(1 / 3)


def test_measured_mixing_tracks_target():
    for seed in range(3):
        for mu in (0.05, 0.3, 0.7):
            cfg = GraphConfig(n_nodes=300, n_groups=3, mean_degree=12.0,
                              mixing_mu=mu, seed=seed)
            g = generate_community_graph(cfg)
            assert abs(measured_mixing(g) - mu) < 0.08


def test_mean_degree_tracks_target():
    g = generate_community_graph(GraphConfig(
        n_nodes=400, n_groups=2, mean_degree=10.0, mixing_mu=0.2, seed=5))
    assert abs(g.degrees.mean() - 10.0) < 1.0


def test_ensure_connected():
    cfg = GraphConfig(n_nodes=100, n_groups=2, mean_degree=3.0,
                      mixing_mu=0.02, seed=11)
    g = ensure_connected(generate_community_graph(cfg))
    assert is_connected(g)
    # bridging never removes edges
    raw = generate_community_graph(cfg)
    assert g.n_edges >= raw.n_edges


def test_laplacian_hand_value():
    L = laplacian(path3())
    np.testing.assert_allclose(L, [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])


def test_spectral_gap_known_graphs():
    # path P3 has spectrum {0, 1, 3}; K_n has gap n; one edge has gap 2
    assert spectral_gap(path3()) == pytest.approx(1.0, abs=1e-12)
    k4 = graph_from_pairs(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
    assert spectral_gap(k4) == pytest.approx(4.0, abs=1e-12)
    assert spectral_gap(graph_from_pairs(2, [(0, 1)])) == pytest.approx(2.0)
    disc = graph_from_pairs(4, [(0, 1), (2, 3)])
    assert spectral_gap(disc) < 1e-10


def test_spectral_gap_star_graph():
    # star K_{1,4} Laplacian spectrum is {0, 1, 1, 1, 5}
    star = graph_from_pairs(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
    assert spectral_gap(star) == pytest.approx(1.0, abs=1e-12)


def test_laplacian_rows_sum_to_zero():
    for seed in range(4):
        g = generate_community_graph(GraphConfig(
            n_nodes=60, n_groups=2, mean_degree=6.0, mixing_mu=0.3,
            seed=seed))
        L = laplacian(g)
        np.testing.assert_allclose(L @ np.ones(60), 0.0, atol=1e-12)
        np.testing.assert_allclose(L, L.T)


def test_laplacian_size_cap():
    g = generate_community_graph(GraphConfig(
        n_nodes=64, n_groups=1, mean_degree=4.0, seed=0))
    with pytest.raises(ConfigError):
        laplacian(g, max_nodes=32)


def test_save_load_roundtrip(tmp_path):
    g = ensure_connected(generate_community_graph(GraphConfig(
        n_nodes=80, n_groups=3, mean_degree=6.0, mixing_mu=0.15, seed=9)))
    ep, lp = tmp_path / "edges.tsv", tmp_path / "labels.tsv"
    save_graph(g, ep, lp)
    h = load_graph(ep, lp)
    assert h.n_nodes == g.n_nodes
    np.testing.assert_array_equal(h.edges, g.edges)
    np.testing.assert_array_equal(h.community, g.community)
    np.testing.assert_array_equal(h.degrees, g.degrees)
