import math

import numpy as np
import pytest

from covertime._seeds import derive_rng
from covertime.errors import StepBudgetError, ValidationError
from covertime.network import (
    build_network,
    complete_graph,
    cycle_graph,
    grid_graph,
    laplacian,
    path_graph,
)
from covertime.resistance import build_oracle, escape_probability, hitting_times
from covertime.walk import (
    BlanketStrong,
    BlanketWeak,
    Cover,
    CoverAndReturn,
    InverseLocal,
    escape_frequency,
    estimate_blanket_time,
    estimate_cover_time,
    hitting_sample,
    inverse_local_time_run,
    occupation_residual,
    occupation_run,
    rayknight_check,
    run_until,
    sample_inverse_local_times,
)

EDGE = build_network([(0, 1, 1.0)])


def exact_cover_time(net, start):
    """Expected discrete cover time by the absorbing-chain linear system.

    State space is (visited mask, position); exponential in n, so only
    for tiny graphs.  Serves as the independent oracle for the Monte
    Carlo means.
    """
    n = net.n
    indptr, nbr, cum = net.csr
    probs = {}
    for v in range(n):
        lo, hi = indptr[v], indptr[v + 1]
        block = np.diff(np.concatenate([[0.0], cum[lo:hi]]))
        probs[v] = list(zip(nbr[lo:hi], block))
    full = (1 << n) - 1
    states = [(mask, pos) for mask in range(1 << n) for pos in range(n)
              if (mask >> pos) & 1]
    index = {s: i for i, s in enumerate(states)}
    A = np.eye(len(states))
    b = np.zeros(len(states))
    for (mask, pos), i in index.items():
        if mask == full:
            continue
        b[i] = 1.0
        for nxt, p in probs[pos]:
            nxt_mask = mask | (1 << int(nxt))
            A[i, index[(nxt_mask, int(nxt))]] -= p
    sol = np.linalg.solve(A, b)
    return sol[index[(1 << start, start)]]


class TestRunUntil:
    def test_two_vertex_cover_is_one_step(self):
        for seed in range(30):
            rep = run_until(EDGE, 0, Cover(), seed=seed)
            assert rep.stop_steps == 1
            assert rep.current_vertex == 1
            assert rep.cover_steps == 1

    def test_cover_and_return_ordering(self):
        rep = run_until(grid_graph(3), 0, CoverAndReturn(), seed=4)
        assert rep.current_vertex == 0
        assert rep.stop_steps >= rep.cover_steps
        assert rep.local_N.sum() == rep.stop_steps + 1

    def test_occupation_identity(self):
        for rule in (Cover(), CoverAndReturn(), BlanketWeak(0.3)):
            rep = run_until(grid_graph(3), 2, rule, seed=9)
            resid = occupation_residual(grid_graph(3), rep)
            assert abs(resid) <= 1e-9 * max(rep.stop_time, 1.0)

    def test_local_times_container(self):
        net = path_graph(4)
        rep = run_until(net, 0, Cover(), seed=3)
        lt = rep.local_times(net)
        assert abs(lt.occupation_residual()) <= 1e-9 * max(lt.continuous_time, 1)
        assert lt.N.sum() == lt.discrete_steps + 1

    def test_inverse_local_freezes_at_crossing(self):
        net = path_graph(4)
        rep = run_until(net, 0, InverseLocal(2.5), seed=5)
        assert rep.current_vertex == 0
        assert rep.local_L[0] == pytest.approx(2.5, rel=1e-12)
        assert abs(occupation_residual(net, rep)) <= 1e-9 * rep.stop_time

    def test_step_budget(self):
        with pytest.raises(StepBudgetError):
            run_until(complete_graph(8), 0, Cover(), seed=1, max_steps=3)

    def test_bad_rules(self):
        with pytest.raises(ValidationError):
            BlanketWeak(1.5)
        with pytest.raises(ValidationError):
            InverseLocal(0.0)


class TestCoverEstimates:
    def test_k3_against_absorbing_oracle(self):
        exact = exact_cover_time(complete_graph(3), 0)
        assert exact == pytest.approx(3.0, rel=1e-12)
        est = estimate_cover_time(complete_graph(3), 0, 20_000, seed=2)
        assert abs(est.mean_cover - exact) <= 3 * est.se_cover

    def test_cycle_small_oracle_matches_formula(self):
        # n(n-1)/2 for cycles, checked exactly on C_4 and C_5.
        for n in (4, 5):
            assert exact_cover_time(cycle_graph(n), 0) == pytest.approx(
                n * (n - 1) / 2, rel=1e-10)

    def test_cycle16_formula(self):
        est = estimate_cover_time(cycle_graph(16), 0, 3000, seed=3)
        assert abs(est.mean_cover - 120.0) <= 3 * est.se_cover

    def test_k8_coupon_collector(self):
        expected = 7.0 * sum(1.0 / k for k in range(1, 8))
        est = estimate_cover_time(complete_graph(8), 0, 100_000, seed=4)
        assert est.mean_cover / expected == pytest.approx(1.0, abs=0.05)

    def test_sandwich_holds(self):
        for net in (path_graph(16), complete_graph(12)):
            est = estimate_cover_time(net, 0, 2000, seed=5)
            assert est.sandwich_ok()
            assert est.mean_cover <= est.mean_cover_return

    def test_seed_determinism(self):
        a = estimate_cover_time(grid_graph(3), 0, 500, seed=6)
        b = estimate_cover_time(grid_graph(3), 0, 500, seed=6)
        assert a == b

    def test_discrete_continuous_agree_in_mean(self):
        est = estimate_cover_time(complete_graph(6), 0, 50_000, seed=7)
        # Mean holding time 1: jump counts and elapsed time share a mean.
        assert est.mean_cover_cont / est.mean_cover == pytest.approx(1.0, abs=0.03)


class TestStationarity:
    def test_long_run_frequencies(self):
        # Within 5 standard errors, inflated by the chain's relaxation
        # factor (1 + rho) / (1 - rho) to account for autocorrelation.
        net = grid_graph(4)
        steps = 1_000_000
        counts, local, elapsed = occupation_run(net, 0, steps, seed=8)
        c = net.vertex_conductance
        P = np.diag(1.0 / c) @ (np.diag(c) - laplacian(net))
        eigs = np.sort(np.abs(np.linalg.eigvals(P)))
        rho = eigs[-2]
        factor = (1 + rho) / (1 - rho)
        pi = net.stationary
        freq = counts / counts.sum()
        se = np.sqrt(pi * (1 - pi) * factor / steps)
        assert np.all(np.abs(freq - pi) <= 5 * se)
        assert abs(net.vertex_conductance @ local - elapsed) <= 1e-9 * elapsed


class TestEscapeAndHitting:
    def test_escape_matches_formula(self):
        net = complete_graph(3)
        p_exact = escape_probability(net, 0, 1)
        p_hat, se = escape_frequency(net, 0, 1, 40_000, seed=9)
        assert abs(p_hat - p_exact) <= 3 * se

    def test_escape_on_path(self):
        p_hat, se = escape_frequency(path_graph(3), 0, 2, 40_000, seed=10)
        assert abs(p_hat - 0.5) <= 3 * se

    def test_hitting_empirical_discrete_and_continuous(self):
        net = cycle_graph(6)
        table = hitting_times(net)
        steps, times = hitting_sample(net, 0, 3, 40_000, seed=11)
        se_steps = steps.std(ddof=1) / math.sqrt(steps.size)
        se_times = times.std(ddof=1) / math.sqrt(times.size)
        assert abs(steps.mean() - table.H[0, 3]) <= 3 * se_steps
        assert abs(times.mean() - table.H[0, 3]) <= 3 * se_times


class TestInverseLocalTime:
    def test_mean_local_times_equal_t(self):
        net = complete_graph(4)
        t = 1.5
        tau, steps, L = sample_inverse_local_times(net, 0, t, 20_000, seed=12)
        se = L.std(axis=0, ddof=1) / math.sqrt(L.shape[0])
        for x in range(net.n):
            if x == 0:
                assert np.all(L[:, 0] == t)
            else:
                assert abs(L[:, x].mean() - t) <= 3 * se[x]

    def test_mean_tau_is_conductance_times_t(self):
        net = path_graph(4)
        t = 2.0
        tau, _, _ = sample_inverse_local_times(net, 0, t, 20_000, seed=13)
        se = tau.std(ddof=1) / math.sqrt(tau.size)
        assert abs(tau.mean() - net.total_conductance * t) <= 3 * se

    def test_tail_bound_light(self):
        # P(tau(t) <= beta C t) <= 3 beta for t >= D^2 / beta^2.
        net = complete_graph(8)
        oracle = build_oracle(net)
        beta = 0.1
        t = (oracle.resistance_diameter() ** 2) / beta ** 2
        tau, _, _ = sample_inverse_local_times(net, 0, t, 4000, seed=14)
        phat = float(np.mean(tau <= beta * net.total_conductance * t))
        se = math.sqrt(max(phat * (1 - phat), 1e-9) / tau.size)
        assert phat <= 3 * beta + 2 * se

    def test_single_run_wrapper(self):
        rep = inverse_local_time_run(path_graph(3), 0, 1.0, seed=15)
        assert rep.kind == "inverse_local"
        assert rep.local_L[0] == 1.0


class TestRayKnight:
    def test_path4_moments(self):
        rep = rayknight_check(path_graph(4), 0, 1.0, 50_000, seed=16)
        assert rep.max_abs_z_mean() <= 3.0
        assert rep.max_abs_z_m2() <= 4.0

    def test_ground_coordinate_exact(self):
        rep = rayknight_check(complete_graph(4), 0, 1.0, 1000, seed=17)
        assert rep.mean_lhs[0] == pytest.approx(1.0, abs=1e-12)
        assert rep.mean_rhs[0] == pytest.approx(1.0, abs=1e-12)

    def test_means_match_theory(self):
        rep = rayknight_check(complete_graph(4), 0, 2.0, 50_000, seed=18)
        # Both sides have mean t + Gamma(x, x) / 2.
        assert np.allclose(rep.mean_lhs, rep.theory_mean, rtol=0.05)
        assert np.allclose(rep.mean_rhs, rep.theory_mean, rtol=0.05)


class TestTrace:
    def test_trace_reproduces_stopping_run(self):
        from covertime.walk import trace_until
        net = grid_graph(3)
        report, vertices, holdings = trace_until(net, 0, Cover(), seed=13)
        assert vertices.shape[0] == report.stop_steps
        assert vertices[-1] == report.current_vertex
        # Accumulated holding times equal the stop time.
        assert holdings.sum() == pytest.approx(report.stop_time, rel=1e-12)
        # Visit counts match the report's.
        counts = np.zeros(net.n, np.int64)
        counts[0] = 1
        for v in vertices:
            counts[v] += 1
        assert np.array_equal(counts, report.local_N)


class TestBlanket:
    def test_orderings_hold_samplewise(self):
        est = estimate_blanket_time(complete_graph(6), 0, 0.5, 2000, seed=19)
        assert est.weak_after_cover
        assert est.strong_after_weak
        assert est.mean_weak >= est.mean_cover
        assert est.mean_strong >= est.mean_weak

    def test_k8_ratio_bounded(self):
        bl = estimate_blanket_time(complete_graph(8), 0, 0.5, 2000, seed=20)
        cov = estimate_cover_time(complete_graph(8), 0, 2000, seed=20)
        assert bl.mean_weak / cov.mean_cover <= 30.0

    def test_tiny_delta_behaves_like_cover(self):
        est = estimate_blanket_time(path_graph(6), 0, 1e-9, 500, seed=21)
        assert est.mean_weak >= est.mean_cover

    def test_determinism(self):
        a = estimate_blanket_time(grid_graph(3), 0, 0.5, 300, seed=22)
        b = estimate_blanket_time(grid_graph(3), 0, 0.5, 300, seed=22)
        assert a == b
