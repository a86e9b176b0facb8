import itertools
import math

import numpy as np
import pytest

from covertime._seeds import derive_rng
from covertime.errors import MetricError, MetricTooLargeError, ValidationError
from covertime.gamma2 import (
    FiniteMetric,
    brute_force_gamma2,
    extract_certificate,
    gamma2_approx,
    gamma2_of_network,
    read_metric_csv,
)
from covertime.gff import GFFSampler, estimate_sup
from covertime.network import (
    bary_tree,
    complete_graph,
    erdos_renyi,
    grid_graph,
    path_graph,
)
from covertime.resistance import build_oracle


def two_point(dist=1.0):
    return FiniteMetric(np.array([[0.0, dist], [dist, 0.0]]))


def uniform_metric(n):
    return FiniteMetric(np.ones((n, n)) - np.eye(n))


def random_metric(rng, n):
    pts = rng.random((n, 3)) * rng.choice([0.01, 1.0, 100.0])
    return FiniteMetric.from_points(pts)


class TestFiniteMetric:
    def test_rejects_asymmetric(self):
        with pytest.raises(MetricError):
            FiniteMetric(np.array([[0.0, 1.0], [2.0, 0.0]]))

    def test_rejects_nonzero_diagonal(self):
        with pytest.raises(MetricError):
            FiniteMetric(np.array([[0.5, 1.0], [1.0, 0.0]]))

    def test_rejects_triangle_violation(self):
        d = np.array([[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]])
        with pytest.raises(MetricError):
            FiniteMetric(d)

    def test_csv_roundtrip(self):
        m = read_metric_csv("0,1,2\n1,0,1\n2,1,0\n")
        assert m.n == 3 and m.d[0, 2] == 2.0

    def test_csv_garbage(self):
        with pytest.raises(MetricError):
            read_metric_csv("a,b\nc,d\n")


class TestGamma2Approx:
    def test_single_point_is_zero(self):
        value, _ = gamma2_approx(FiniteMetric(np.zeros((1, 1))))
        assert value == 0.0

    def test_two_point_homogeneity_exact(self):
        base, _ = gamma2_approx(two_point(1.0))
        assert base > 0
        for dist in (1e-7, 0.37, 5.0, 1234.5):
            value, _ = gamma2_approx(two_point(dist))
            assert abs(value / dist - base) <= 1e-12 * base

    def test_general_homogeneity(self):
        rng = np.random.default_rng(5)
        m = random_metric(rng, 7)
        v1, _ = gamma2_approx(m)
        v2, _ = gamma2_approx(FiniteMetric(m.d * 17.0))
        assert abs(v2 - 17.0 * v1) <= 1e-12 * max(v2, 1.0)

    def test_uniform_scaling(self):
        values = {}
        for n in (4, 16, 64, 256):
            value, _ = gamma2_approx(uniform_metric(n))
            ratio = value / math.sqrt(math.log(n))
            assert 0.1 <= ratio <= 10.0
            values[n] = value
        ordered = [values[n] for n in (4, 16, 64, 256)]
        assert ordered == sorted(ordered)

    def test_duplicates_collapsed(self):
        d = np.array([
            [0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0],
            [1.0, 1.0, 0.0],
        ])
        with_dup, _ = gamma2_approx(FiniteMetric(d))
        without, _ = gamma2_approx(two_point(1.0))
        assert with_dup == without

    def test_invalid_r(self):
        with pytest.raises(ValidationError):
            gamma2_approx(two_point(), r=8)

    def test_determinism(self):
        rng = np.random.default_rng(6)
        m = random_metric(rng, 9)
        a1, maps1 = gamma2_approx(m)
        a2, maps2 = gamma2_approx(m)
        assert a1 == a2
        assert maps1.active_scales == maps2.active_scales
        for j in maps1.active_scales:
            assert np.array_equal(maps1.phi[j], maps2.phi[j])

    def test_monotone_scale_maps(self):
        rng = np.random.default_rng(7)
        m = random_metric(rng, 10)
        _, maps = gamma2_approx(m)
        prev = np.zeros(maps.n)
        for j in maps.active_scales:
            assert np.all(maps.phi[j] >= prev)
            prev = maps.phi[j]

    def test_net_validity(self):
        # Nets are maximal separated sets: pairwise > sep, covering <= sep.
        rng = np.random.default_rng(8)
        m = random_metric(rng, 12)
        _, maps = gamma2_approx(m)
        for j in maps.active_scales:
            dec = maps.decisions[j]
            sep = (float(maps.r) ** (j - 1)) / 3.0
            net = dec.net
            if net.size > 1:
                sub = maps.D[np.ix_(net, net)]
                off = sub[~np.eye(net.size, dtype=bool)]
                assert np.all(off > sep)
            for x in range(maps.n):
                assert maps.D[x, dec.assignment[x]] <= sep


class TestBruteForce:
    def test_two_points(self):
        assert brute_force_gamma2(two_point()) == 1.0

    def test_uniform4(self):
        assert brute_force_gamma2(uniform_metric(4)) == pytest.approx(1.0)

    def test_uniform5(self):
        # No 4-block partition isolates 5 points, so one block has diam 1.
        assert brute_force_gamma2(uniform_metric(5)) == pytest.approx(1 + math.sqrt(2))

    def test_too_large(self):
        with pytest.raises(MetricTooLargeError):
            brute_force_gamma2(uniform_metric(11))

    def test_reduction_against_full_enumeration(self):
        # The singleton-level-2 reduction must agree with enumerating both
        # partition levels: value = max_x [diam + sqrt2 diam(A1(x))
        # + 2 diam(A2(x))] minimized over A1 (<= 4 blocks) and refinements
        # A2 (<= 16 blocks, free for n <= 6).
        rng = np.random.default_rng(17)
        for trial in range(10):
            n = int(rng.integers(2, 7))
            m = random_metric(rng, n)
            reduced = brute_force_gamma2(m)
            full = _full_two_level_enumeration(m.d)
            assert reduced == pytest.approx(full, rel=1e-12)


def _partitions(items):
    items = list(items)
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for part in _partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[head] + part[i]] + part[i + 1:]
        yield [[head]] + part


def _full_two_level_enumeration(d):
    n = d.shape[0]
    diam = float(d.max())

    def block_diam(block):
        if len(block) < 2:
            return 0.0
        return float(d[np.ix_(block, block)].max())

    best = math.inf
    for a1 in _partitions(range(n)):
        if len(a1) > 4:
            continue
        refinements_per_block = [list(_partitions(block)) for block in a1]
        for combo in itertools.product(*refinements_per_block):
            a2 = [blk for group in combo for blk in group]
            if len(a2) > 16:
                continue
            lookup1 = {x: block_diam(b) for b in a1 for x in b}
            lookup2 = {x: block_diam(b) for b in a2 for x in b}
            value = max(
                diam + math.sqrt(2) * lookup1[x] + 2.0 * lookup2[x]
                for x in range(n)
            )
            best = min(best, value)
    return best


class TestOracleSandwich:
    def test_hundred_random_metrics(self):
        # Envelope observed in CI: [0.83, 2.27]; asserted not to widen
        # past [0.5, 5], well inside the required [1/50, 50].
        rng = np.random.default_rng(424242)
        ratios = []
        for _ in range(100):
            n = int(rng.integers(2, 9))
            m = random_metric(rng, n)
            value, _ = gamma2_approx(m)
            exact = brute_force_gamma2(m)
            ratios.append(value / exact)
        assert min(ratios) >= 1.0 / 50.0 and max(ratios) <= 50.0
        assert min(ratios) >= 0.5 and max(ratios) <= 5.0


class TestCertificate:
    def test_two_point_tree(self):
        _, maps = gamma2_approx(two_point())
        cert = extract_certificate(maps)
        assert cert.size >= 2
        assert len(cert.children[cert.root]) >= 1
        assert cert.value > 0

    def test_uniform16_branching(self):
        _, maps = gamma2_approx(uniform_metric(16))
        cert = extract_certificate(maps)
        assert len(cert.children[cert.root]) >= 2

    def test_scale_gaps(self):
        rng = np.random.default_rng(23)
        m = random_metric(rng, 12)
        _, maps = gamma2_approx(m)
        cert = extract_certificate(maps)
        for parent, kids in enumerate(cert.children):
            for kid in kids:
                assert cert.scale[kid] <= cert.scale[parent] - 1

    def test_value_slack_on_random_metrics(self):
        # val_r(tree) <= phi_M(x0) + r * diam, in rescaled units.
        rng = np.random.default_rng(29)
        for trial in range(50):
            n = int(rng.integers(2, 11))
            m = random_metric(rng, n)
            _, maps = gamma2_approx(m)
            cert = extract_certificate(maps)
            phi_m = float(maps.phi_at(maps.M)[0])
            bound = phi_m + maps.r * float(maps.D.max())
            assert cert.scaled_value <= bound + 1e-9

    def test_json_dump_shape(self):
        _, maps = gamma2_approx(uniform_metric(4))
        doc = extract_certificate(maps).to_json_dict()
        assert set(doc) >= {"r", "value", "nodes", "root"}


class TestNetworkGamma2:
    def test_single_edge_matches_two_point(self):
        edge_value, _ = gamma2_of_network(path_graph(2))
        direct, _ = gamma2_approx(two_point(1.0))
        assert edge_value == pytest.approx(direct, rel=1e-12)

    def test_path9_metric_diameter(self):
        net = path_graph(9)
        d = np.sqrt(build_oracle(net).r_eff_matrix())
        assert d[0, 8] == pytest.approx(math.sqrt(8), rel=1e-9)
        value, _ = gamma2_of_network(net)
        exact = brute_force_gamma2(FiniteMetric(d))
        assert 1 / 50 <= value / exact <= 50

    def test_k16_matches_gaussian_scale(self):
        value, _ = gamma2_of_network(complete_graph(16))
        assert 0.2 <= value / math.sqrt(2 * math.log(16) / 16) <= 5.0

    def test_mm_consistency_standard_family(self):
        # gamma2 of the resistance metric against E sup of the field.
        # Observed envelope in CI: [1.28, 3.89]; asserted not to widen
        # past [1.0, 8], well inside the required [1/50, 50].
        nets = [
            path_graph(32),
            complete_graph(32),
            bary_tree(2, 5),
            grid_graph(8),
            erdos_renyi(64, 0.1, seed=1),
        ]
        for net in nets:
            value, _ = gamma2_of_network(net)
            sampler = GFFSampler(build_oracle(net))
            sup = estimate_sup(sampler, 4000, derive_rng(31, net.n))
            ratio = value / sup.mean
            assert 1 / 50 <= ratio <= 50
            assert 1.0 <= ratio <= 8.0
