import json

import numpy as np
import pytest

from covertime.errors import (
    ConductanceError,
    DisconnectedError,
    GeneratorParamError,
    GlueSetError,
    InputFormatError,
    ReductionSizeError,
    SelfLoopError,
)
from covertime.network import (
    bary_tree,
    build_network,
    complete_graph,
    cycle_graph,
    erdos_renyi,
    generate,
    grid_graph,
    laplacian,
    path_graph,
    quotient,
    read_edgelist,
    read_json,
    star_mesh_reduce,
)
from covertime.resistance import build_oracle


def random_weighted_net(n, p, seed, lo=0.2, hi=5.0):
    """Connected random graph with log-uniform conductances."""
    rng = np.random.default_rng(seed)
    for attempt in range(1000):
        base = erdos_renyi(n, p, seed * 1000 + attempt)
        w = np.exp(rng.uniform(np.log(lo), np.log(hi), size=base.edge_count))
        return build_network(
            list(zip(base.edge_u, base.edge_v, w)), n=n
        )
    raise AssertionError("unreachable")


class TestBuild:
    def test_triangle_unit(self):
        net = build_network([(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])
        assert np.allclose(net.vertex_conductance, 2.0)
        assert net.total_conductance == 6.0
        assert net.edge_count == 3

    def test_path_conductances(self):
        net = path_graph(3)
        assert list(net.vertex_conductance) == [1.0, 2.0, 1.0]
        assert net.total_conductance == 4.0

    def test_duplicate_edges_merge(self):
        net = build_network([(0, 1, 1.0), (0, 1, 2.0)])
        assert net.edge_count == 1
        assert net.conductances[0] == 3.0

    def test_orientation_merge(self):
        net = build_network([(1, 0, 1.0), (0, 1, 2.5)])
        assert net.edge_count == 1
        assert net.conductances[0] == 3.5

    def test_self_loop_rejected(self):
        with pytest.raises(SelfLoopError) as err:
            build_network([(0, 0, 1.0), (0, 1, 1.0)])
        assert err.value.vertex == 0

    def test_nonpositive_conductance_rejected(self):
        with pytest.raises(ConductanceError):
            build_network([(0, 1, 0.0)])
        with pytest.raises(ConductanceError):
            build_network([(0, 1, -2.0)])

    def test_disconnected_rejected(self):
        with pytest.raises(DisconnectedError) as err:
            build_network([(0, 1, 1.0), (2, 3, 1.0)])
        assert err.value.component_count == 2

    def test_total_conductance_identity(self):
        net = random_weighted_net(25, 0.25, seed=3)
        lhs = net.total_conductance
        rhs = 2.0 * net.conductances.sum()
        assert abs(lhs - rhs) <= 1e-12 * lhs
        assert np.all(net.vertex_conductance > 0)


class TestLaplacian:
    def test_single_edge_unnormalized(self):
        L = laplacian(build_network([(0, 1, 1.0)]))
        assert np.array_equal(L, [[1.0, -1.0], [-1.0, 1.0]])

    def test_single_edge_normalized(self):
        L = laplacian(build_network([(0, 1, 1.0)]), normalized=True)
        assert np.array_equal(L, [[0.5, -0.5], [-0.5, 0.5]])

    def test_row_sums_vanish(self):
        net = random_weighted_net(30, 0.2, seed=5)
        L = laplacian(net)
        assert np.max(np.abs(L.sum(axis=1))) <= 1e-12 * net.total_conductance
        Ln = laplacian(net, normalized=True)
        assert abs(np.trace(Ln) - 1.0) < 1e-12


class TestQuotient:
    def test_path_endpoints(self):
        q = quotient(path_graph(3), {0, 2})
        assert q.result.n == 2
        assert list(q.result.edges()) == [(0, 1, 2.0)]
        assert q.glued_vertex == 1
        assert q.mapping[1] == 0 and q.mapping[0] == q.mapping[2] == 1

    def test_triangle_pair(self):
        q = quotient(complete_graph(3), {0, 1})
        assert list(q.result.edges()) == [(0, 1, 2.0)]

    def test_singleton_identity_up_to_relabel(self):
        net = complete_graph(4)
        q = quotient(net, {0})
        assert q.result.n == 4
        r_old = build_oracle(net).r_eff_matrix()
        r_new = build_oracle(q.result).r_eff_matrix()
        perm = q.mapping
        assert np.allclose(r_new[np.ix_(perm, perm)], r_old)

    def test_bad_sets(self):
        net = path_graph(3)
        with pytest.raises(GlueSetError):
            quotient(net, set())
        with pytest.raises(GlueSetError):
            quotient(net, {0, 1, 2})


class TestStarMesh:
    def test_path_middle(self):
        reduced = star_mesh_reduce(path_graph(3), 1)
        assert list(reduced.edges()) == [(0, 1, 0.5)]

    def test_star_center(self):
        star = build_network([(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)])
        reduced = star_mesh_reduce(star, 0)
        assert reduced.n == 3
        assert reduced.edge_count == 3
        assert np.allclose(reduced.conductances, 1.0 / 3.0)

    def test_preserves_r_eff(self):
        rng = np.random.default_rng(11)
        for trial in range(20):
            net = random_weighted_net(int(rng.integers(5, 26)), 0.35, seed=trial + 50)
            victim = int(rng.integers(net.n))
            reduced = star_mesh_reduce(net, victim)
            keep = [x for x in range(net.n) if x != victim]
            big = build_oracle(net).r_eff_matrix()[np.ix_(keep, keep)]
            small = build_oracle(reduced).r_eff_matrix()
            denom = np.where(big > 0, big, 1.0)
            assert np.max(np.abs(small - big) / denom) <= 1e-8

    def test_too_small(self):
        with pytest.raises(ReductionSizeError):
            star_mesh_reduce(build_network([(0, 1, 1.0)]), 0)


class TestGenerators:
    def test_complete_3_is_triangle(self):
        net = complete_graph(3)
        assert net.edge_count == 3 and np.allclose(net.vertex_conductance, 2.0)

    def test_bary_tree_counts(self):
        net = bary_tree(2, 2)
        assert net.n == 7 and net.edge_count == 6

    def test_grid_2x2_is_cycle(self):
        g = grid_graph(2, 2)
        c = cycle_graph(4)
        assert g.n == c.n and g.edge_count == c.edge_count
        assert np.allclose(np.sort(g.vertex_conductance), np.sort(c.vertex_conductance))

    def test_er_deterministic_and_connected(self):
        a = erdos_renyi(20, 0.15, seed=9)
        b = erdos_renyi(20, 0.15, seed=9)
        assert np.array_equal(a.edge_u, b.edge_u)
        assert np.array_equal(a.edge_v, b.edge_v)

    def test_generate_specs(self):
        assert generate("complete:5").n == 5
        assert generate("path:7").edge_count == 6
        assert generate("bary_tree:2,3").n == 15
        assert generate("grid:3,4").n == 12
        assert generate("er:12,0.4,3").n == 12
        with pytest.raises(GeneratorParamError):
            generate("moebius:5")
        with pytest.raises(GeneratorParamError):
            generate("complete:5,6")


class TestIngestion:
    def test_edgelist_with_comments(self):
        text = "# a triangle\n0 1\n1 2 2.0\n\n0 2 1.0  # closing edge\n"
        net = read_edgelist(text)
        assert net.n == 3 and net.edge_count == 3
        assert dict(((u, v), c) for u, v, c in net.edges())[(1, 2)] == 2.0

    def test_edgelist_labels(self):
        net = read_edgelist("alice bob 2\nbob carol\n")
        assert net.labels == ("alice", "bob", "carol")
        assert net.n == 3

    def test_edgelist_bad_line(self):
        with pytest.raises(InputFormatError):
            read_edgelist("0 1 2 3\n")

    def test_json_roundtrip(self):
        net = build_network([(0, 1, 1.5), (1, 2, 1.0)], labels=["a", "b", "c"])
        again = read_json(json.dumps(net.to_json_dict()))
        assert list(again.edges()) == list(net.edges())
        assert again.labels == net.labels

    def test_json_bad(self):
        with pytest.raises(InputFormatError):
            read_json("{nope")
        with pytest.raises(InputFormatError):
            read_json('{"nodes": 3}')
