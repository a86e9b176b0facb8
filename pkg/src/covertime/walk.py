"""Ground-truth Monte Carlo: random walks, local times, stopping rules.

The continuous-time walk is realized as the discrete jump chain (jump
from x to y with probability c_xy / c_x) with i.i.d. Exp(1) holding
times, so discrete statistics are jump counts and continuous statistics
are accumulated holding time; both are reported, with discrete time
treated as canonical.  Local times are occupation time divided by the
vertex conductance:

    L_t^v = (1/c_v) * time spent at v up to t,

so that sum_v c_v L_t^v = t identically.  Stopping rules:

* cover: every vertex visited;
* cover and return: additionally back at the start (immediately, if the
  cover completed there);
* weak delta-blanket: first discrete t >= 1 with N_v(t) >= delta t pi(v)
  for all v, counting positions X_0..X_t;
* strong delta-blanket: first t >= 1 with all N_v(t)/pi(v) within a
  factor delta of each other;
* inverse local time tau(t): the exact instant L^{v0} crosses t, with
  mid-holding overshoot accounting (the walk is at v0 when it happens).

Replicas draw from per-index streams derived from the master seed, and
results are aggregated in replica order, so outputs depend only on the
seed.  The inner loops are numba kernels; a million-jump budget guard
(default 1e9) converts runaway stopping rules into an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from ._seeds import derive_rng, normalize_seed, replica_states
from .errors import StepBudgetError, ValidationError
from .gff import GFFSampler
from .network import Network
from .resistance import build_oracle

__all__ = [
    "Cover",
    "CoverAndReturn",
    "InverseLocal",
    "BlanketWeak",
    "BlanketStrong",
    "LocalTimes",
    "StoppingReport",
    "CoverEstimate",
    "BlanketEstimate",
    "RayKnightReport",
    "run_until",
    "estimate_cover_time",
    "inverse_local_time_run",
    "sample_inverse_local_times",
    "rayknight_check",
    "estimate_blanket_time",
    "escape_frequency",
    "hitting_sample",
    "occupation_run",
]

DEFAULT_MAX_STEPS = 10 ** 9

# Stream ids keep the sub-seeds of different operations disjoint.
_S_COVER, _S_BLANKET, _S_INVLOCAL, _S_ESCAPE, _S_HIT, _S_OCCUPY, _S_GFF = range(1, 8)


# ---------------------------------------------------------------------------
# Stopping rules


@dataclass(frozen=True)
class Cover:
    kind: str = "cover"


@dataclass(frozen=True)
class CoverAndReturn:
    kind: str = "cover_and_return"


@dataclass(frozen=True)
class InverseLocal:
    t: float
    kind: str = "inverse_local"

    def __post_init__(self):
        if not self.t > 0:
            raise ValidationError("inverse local time needs t > 0")


@dataclass(frozen=True)
class BlanketWeak:
    delta: float
    kind: str = "blanket_weak"

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValidationError("blanket delta must lie in (0, 1)")


@dataclass(frozen=True)
class BlanketStrong:
    delta: float
    kind: str = "blanket_strong"

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValidationError("blanket delta must lie in (0, 1)")


@dataclass(frozen=True)
class LocalTimes:
    """Per-vertex occupation statistics at some stopping instant.

    The continuous identity sum_v c_v L_v = elapsed time holds exactly
    (up to rounding); N counts positions X_0..X_t, so it sums to the
    discrete step count plus one.
    """

    L: np.ndarray            # continuous local times, (1/c_v) * occupation
    N: np.ndarray            # discrete visit counts, X_0 included
    pi: np.ndarray
    continuous_time: float
    discrete_steps: int
    vertex_conductance: np.ndarray

    def occupation_residual(self) -> float:
        return float(self.vertex_conductance @ self.L) - self.continuous_time


@dataclass(frozen=True)
class StoppingReport:
    kind: str
    stop_steps: int
    stop_time: float
    current_vertex: int
    start_vertex: int
    seed: int
    local_L: np.ndarray
    local_N: np.ndarray
    cover_steps: int | None = None

    def local_times(self, net: Network) -> LocalTimes:
        return LocalTimes(
            L=self.local_L, N=self.local_N, pi=net.stationary,
            continuous_time=self.stop_time, discrete_steps=self.stop_steps,
            vertex_conductance=net.vertex_conductance,
        )


def occupation_residual(net: Network, report: StoppingReport) -> float:
    """sum_v c_v L_v - elapsed continuous time (should vanish)."""
    total = float(net.vertex_conductance @ report.local_L)
    return total - report.stop_time


# ---------------------------------------------------------------------------
# Numba kernels


@njit(cache=True)
def _draw_next(indptr, nbr, cum, v):
    lo = indptr[v]
    hi = indptr[v + 1]
    u = np.random.random()
    while lo < hi:
        mid = (lo + hi) // 2
        if cum[mid] < u:
            lo = mid + 1
        else:
            hi = mid
    return nbr[lo]


@njit(cache=True)
def _cover_kernel(indptr, nbr, cum, c, n, start, seeds, max_steps, record,
                  cov_steps, cov_time, ret_steps, ret_time, n_out, l_out):
    for rep in range(seeds.shape[0]):
        np.random.seed(np.int64(seeds[rep]))
        visited = np.zeros(n, np.bool_)
        visited[start] = True
        remaining = n - 1
        v = start
        steps = 0
        t = 0.0
        cs = np.int64(-1)
        ct = -1.0
        while True:
            h = np.random.exponential()
            if record:
                l_out[rep, v] += h / c[v]
            t += h
            v = _draw_next(indptr, nbr, cum, v)
            steps += 1
            if record:
                n_out[rep, v] += 1
            if not visited[v]:
                visited[v] = True
                remaining -= 1
                if remaining == 0:
                    cs = steps
                    ct = t
                    if v == start:
                        break
            elif cs >= 0 and v == start:
                break
            if steps >= max_steps:
                cs = np.int64(-2)
                break
        if cs == -2:
            cov_steps[rep] = -1
            ret_steps[rep] = -1
        else:
            cov_steps[rep] = cs
            cov_time[rep] = ct
            ret_steps[rep] = steps
            ret_time[rep] = t


@njit(cache=True)
def _blanket_kernel(indptr, nbr, cum, c, pi, start, delta, seeds, max_steps,
                    need_strong, record,
                    weak_steps, weak_time, strong_steps, strong_time,
                    cov_steps, final_v, n_out, l_out):
    n = pi.shape[0]
    for rep in range(seeds.shape[0]):
        np.random.seed(np.int64(seeds[rep]))
        counts = np.zeros(n, np.int64)
        ratio = np.zeros(n)
        counts[start] = 1
        ratio[start] = 1.0 / pi[start]
        seen = 1
        v = start
        steps = 0
        t = 0.0
        minr = 0.0
        maxr = ratio[start]
        ws = np.int64(-1)
        ss = np.int64(-1)
        wt = -1.0
        st = -1.0
        cs = np.int64(-1)
        exceeded = False
        while True:
            h = np.random.exponential()
            if record:
                l_out[rep, v] += h / c[v]
            t += h
            v = _draw_next(indptr, nbr, cum, v)
            steps += 1
            counts[v] += 1
            if record:
                n_out[rep, v] += 1
            old = ratio[v]
            ratio[v] = counts[v] / pi[v]
            if counts[v] == 1:
                seen += 1
            if seen == n:
                if cs < 0:
                    cs = steps
                    minr = ratio.min()
                    maxr = ratio.max()
                else:
                    if ratio[v] > maxr:
                        maxr = ratio[v]
                    if old == minr:
                        minr = ratio.min()
                if ws < 0 and minr >= delta * steps:
                    ws = steps
                    wt = t
                if ss < 0 and minr >= delta * maxr:
                    ss = steps
                    st = t
                if ws >= 0 and (ss >= 0 or not need_strong):
                    break
            if steps >= max_steps:
                exceeded = True
                break
        if exceeded:
            weak_steps[rep] = -1
            strong_steps[rep] = -1
            cov_steps[rep] = -1
        else:
            weak_steps[rep] = ws
            weak_time[rep] = wt
            strong_steps[rep] = ss
            strong_time[rep] = st
            cov_steps[rep] = cs
            final_v[rep] = v


@njit(cache=True)
def _invlocal_kernel(indptr, nbr, cum, c, v0, t_target, seeds, max_steps,
                     tau_out, steps_out, l_out):
    n = c.shape[0]
    for rep in range(seeds.shape[0]):
        np.random.seed(np.int64(seeds[rep]))
        v = v0
        tau = 0.0
        steps = np.int64(0)
        while True:
            h = np.random.exponential()
            if v == v0:
                room = (t_target - l_out[rep, v0]) * c[v0]
                if h >= room:
                    tau += room
                    l_out[rep, v0] = t_target
                    break
                l_out[rep, v0] += h / c[v0]
            else:
                l_out[rep, v] += h / c[v]
            tau += h
            v = _draw_next(indptr, nbr, cum, v)
            steps += 1
            if steps >= max_steps:
                steps = np.int64(-1)
                break
        tau_out[rep] = tau
        steps_out[rep] = steps


@njit(cache=True)
def _escape_kernel(indptr, nbr, cum, v, u, seeds, out):
    for rep in range(seeds.shape[0]):
        np.random.seed(np.int64(seeds[rep]))
        cur = _draw_next(indptr, nbr, cum, v)
        while cur != v and cur != u:
            cur = _draw_next(indptr, nbr, cum, cur)
        out[rep] = 1 if cur == u else 0


@njit(cache=True)
def _hit_kernel(indptr, nbr, cum, u, v, seeds, max_steps, steps_out, time_out):
    for rep in range(seeds.shape[0]):
        np.random.seed(np.int64(seeds[rep]))
        cur = u
        steps = np.int64(0)
        t = 0.0
        while cur != v:
            t += np.random.exponential()
            cur = _draw_next(indptr, nbr, cum, cur)
            steps += 1
            if steps >= max_steps:
                steps = np.int64(-1)
                break
        steps_out[rep] = steps
        time_out[rep] = t


@njit(cache=True)
def _trace_kernel(indptr, nbr, cum, start, nsteps, seed, vertices, holdings):
    # Consumes randomness in the same order as the stopping kernels
    # (one exponential, one uniform per jump), so replaying a stopping
    # run's seed for its step count reproduces the trajectory.
    np.random.seed(np.int64(seed))
    v = start
    for i in range(nsteps):
        holdings[i] = np.random.exponential()
        v = _draw_next(indptr, nbr, cum, v)
        vertices[i] = v


@njit(cache=True)
def _occupy_kernel(indptr, nbr, cum, c, start, nsteps, seed, counts, local):
    np.random.seed(np.int64(seed))
    v = start
    counts[v] += 1
    t = 0.0
    for _ in range(nsteps):
        h = np.random.exponential()
        local[v] += h / c[v]
        t += h
        v = _draw_next(indptr, nbr, cum, v)
        counts[v] += 1
    return t


def _arrays(net: Network):
    indptr, nbr, cum = net.csr
    return indptr, nbr, cum, net.vertex_conductance, net.stationary


def _check_budget(steps: np.ndarray, max_steps: int):
    if np.any(steps < 0):
        raise StepBudgetError(max_steps)


# ---------------------------------------------------------------------------
# Public operations


def run_until(net: Network, start: int, rule, seed=None,
              max_steps: int = DEFAULT_MAX_STEPS) -> StoppingReport:
    """Simulate one trajectory until the stopping rule fires."""
    seed = normalize_seed(seed)
    if start < 0 or start >= net.n:
        raise ValidationError(f"start vertex {start} out of range")
    indptr, nbr, cum, c, pi = _arrays(net)
    n = net.n
    seeds = replica_states(seed, 1, _S_COVER)
    n_out = np.zeros((1, n), dtype=np.int64)
    l_out = np.zeros((1, n))
    n_out[0, start] = 1

    if isinstance(rule, (Cover, CoverAndReturn)):
        cs = np.empty(1, np.int64)
        ct = np.empty(1)
        rs = np.empty(1, np.int64)
        rt = np.empty(1)
        # Replay twice so recorded local times match the requested stop;
        # one pass would only know the later of the two instants.
        want_return = isinstance(rule, CoverAndReturn)
        _cover_kernel(indptr, nbr, cum, c, n, start, seeds, max_steps, True,
                      cs, ct, rs, rt, n_out, l_out)
        _check_budget(cs, max_steps)
        if want_return:
            steps, t = int(rs[0]), float(rt[0])
            cur = start
        else:
            # Re-run without the return leg to freeze states at cover.
            n_out[:] = 0
            l_out[:] = 0.0
            n_out[0, start] = 1
            steps, t, cur = _replay_cover(indptr, nbr, cum, c, n, start,
                                          seeds[0], max_steps, n_out, l_out)
        return StoppingReport(
            kind=rule.kind, stop_steps=steps, stop_time=t,
            current_vertex=cur, start_vertex=start, seed=seed,
            local_L=l_out[0], local_N=n_out[0], cover_steps=int(cs[0]),
        )

    if isinstance(rule, (BlanketWeak, BlanketStrong)):
        strong = isinstance(rule, BlanketStrong)
        ws = np.empty(1, np.int64)
        wt = np.empty(1)
        ss = np.empty(1, np.int64)
        st = np.empty(1)
        cov = np.empty(1, np.int64)
        fin = np.empty(1, np.int64)
        seeds = replica_states(seed, 1, _S_BLANKET)
        n_out[:] = 0
        l_out[:] = 0.0
        n_out[0, start] = 1
        _blanket_kernel(indptr, nbr, cum, c, pi, start, rule.delta, seeds,
                        max_steps, strong, True, ws, wt, ss, st, cov, fin,
                        n_out, l_out)
        _check_budget(ws, max_steps)
        steps = int(ss[0] if strong else ws[0])
        t = float(st[0] if strong else wt[0])
        # The recorded states are frozen at the kernel's own stop, which
        # for the weak rule is exactly the weak stop (need_strong=False).
        return StoppingReport(
            kind=rule.kind, stop_steps=steps, stop_time=t,
            current_vertex=int(fin[0]), start_vertex=start, seed=seed,
            local_L=l_out[0], local_N=n_out[0], cover_steps=int(cov[0]),
        )

    if isinstance(rule, InverseLocal):
        tau, steps, L = sample_inverse_local_times(
            net, start, rule.t, 1, seed, max_steps=max_steps
        )
        return StoppingReport(
            kind=rule.kind, stop_steps=int(steps[0]), stop_time=float(tau[0]),
            current_vertex=start, start_vertex=start, seed=seed,
            local_L=L[0], local_N=np.zeros(net.n, np.int64),
        )

    raise ValidationError(f"unknown stopping rule {rule!r}")


@njit(cache=True)
def _replay_cover(indptr, nbr, cum, c, n, start, seed, max_steps, n_out, l_out):
    np.random.seed(np.int64(seed))
    visited = np.zeros(n, np.bool_)
    visited[start] = True
    remaining = n - 1
    v = start
    steps = np.int64(0)
    t = 0.0
    while remaining > 0 and steps < max_steps:
        h = np.random.exponential()
        l_out[0, v] += h / c[v]
        t += h
        v = _draw_next(indptr, nbr, cum, v)
        steps += 1
        n_out[0, v] += 1
        if not visited[v]:
            visited[v] = True
            remaining -= 1
    return steps, t, v


@dataclass(frozen=True)
class CoverEstimate:
    """Monte Carlo means for the cover and cover-and-return times.

    ``sandwich_margin`` is mean(tau_ret/2 - tau_cov) with its paired
    standard error: nonpositive within noise by the half inequality
    relating the two quantities.
    """

    mean_cover: float
    se_cover: float
    mean_cover_return: float
    se_cover_return: float
    mean_cover_cont: float
    mean_cover_return_cont: float
    reps: int
    sandwich_margin: float
    sandwich_se: float

    def sandwich_ok(self, z: float = 3.0) -> bool:
        return self.sandwich_margin <= z * self.sandwich_se


def estimate_cover_time(net: Network, start: int, reps: int, seed=None,
                        max_steps: int = DEFAULT_MAX_STEPS) -> CoverEstimate:
    """Simulate ``reps`` trajectories; report discrete-step means."""
    if reps < 10:
        raise ValidationError("need at least 10 replicas")
    seed = normalize_seed(seed)
    indptr, nbr, cum, c, pi = _arrays(net)
    seeds = replica_states(seed, reps, _S_COVER)
    cs = np.empty(reps, np.int64)
    ct = np.empty(reps)
    rs = np.empty(reps, np.int64)
    rt = np.empty(reps)
    dummy_n = np.zeros((1, 1), np.int64)
    dummy_l = np.zeros((1, 1))
    _cover_kernel(indptr, nbr, cum, c, net.n, start, seeds, max_steps, False,
                  cs, ct, rs, rt, dummy_n, dummy_l)
    _check_budget(cs, max_steps)
    cov = cs.astype(np.float64)
    ret = rs.astype(np.float64)
    diff = ret / 2.0 - cov
    return CoverEstimate(
        mean_cover=float(cov.mean()),
        se_cover=float(cov.std(ddof=1) / math.sqrt(reps)),
        mean_cover_return=float(ret.mean()),
        se_cover_return=float(ret.std(ddof=1) / math.sqrt(reps)),
        mean_cover_cont=float(ct.mean()),
        mean_cover_return_cont=float(rt.mean()),
        reps=reps,
        sandwich_margin=float(diff.mean()),
        sandwich_se=float(diff.std(ddof=1) / math.sqrt(reps)),
    )


def sample_inverse_local_times(net: Network, v0: int, t: float, reps: int,
                               seed=None, max_steps: int = DEFAULT_MAX_STEPS):
    """(tau, steps, L) samples of the walk stopped the instant L^{v0} = t."""
    if not t > 0:
        raise ValidationError("inverse local time needs t > 0")
    seed = normalize_seed(seed)
    indptr, nbr, cum, c, _ = _arrays(net)
    seeds = replica_states(seed, reps, _S_INVLOCAL)
    tau = np.empty(reps)
    steps = np.empty(reps, np.int64)
    L = np.zeros((reps, net.n))
    _invlocal_kernel(indptr, nbr, cum, c, v0, float(t), seeds, max_steps,
                     tau, steps, L)
    _check_budget(steps, max_steps)
    return tau, steps, L


def inverse_local_time_run(net: Network, v0: int, t: float, seed=None,
                           max_steps: int = DEFAULT_MAX_STEPS) -> StoppingReport:
    """One walk from v0 frozen at the exact crossing instant of L^{v0}."""
    return run_until(net, v0, InverseLocal(t), seed, max_steps=max_steps)


@dataclass(frozen=True)
class RayKnightReport:
    """Two-sample comparison of the isomorphism identity, coordinatewise.

    Left side: L^x_{tau(t)} + eta_x^2 / 2 with an independent pinned
    field.  Right side: (eta_x + sqrt(2t))^2 / 2.  Both sides have mean
    t + Gamma(x,x)/2; the identity asserts equality in law, so first and
    second moments are compared in standard-error units.
    """

    t: float
    reps: int
    mean_lhs: np.ndarray
    mean_rhs: np.ndarray
    z_mean: np.ndarray
    m2_lhs: np.ndarray
    m2_rhs: np.ndarray
    z_m2: np.ndarray
    theory_mean: np.ndarray

    def max_abs_z_mean(self) -> float:
        return float(np.max(np.abs(self.z_mean)))

    def max_abs_z_m2(self) -> float:
        return float(np.max(np.abs(self.z_m2)))

    def passed(self, z_mean: float = 3.0, z_m2: float = 4.0) -> bool:
        return self.max_abs_z_mean() <= z_mean and self.max_abs_z_m2() <= z_m2


def _two_sample_z(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    reps = a.shape[0]
    se = np.sqrt(a.var(axis=0, ddof=1) / reps + b.var(axis=0, ddof=1) / reps)
    diff = a.mean(axis=0) - b.mean(axis=0)
    # Deterministic coordinates (e.g. the pinned ground) agree only up to
    # rounding; floor the SE at rounding scale so they compare as equal.
    scale = np.maximum(1.0, np.maximum(np.abs(a).max(axis=0), np.abs(b).max(axis=0)))
    return diff / np.maximum(se, 1e-12 * scale)


def rayknight_check(net: Network, v0: int, t: float, reps: int,
                    seed=None) -> RayKnightReport:
    """Empirical verification of the second Ray-Knight identity at v0."""
    if reps < 100:
        raise ValidationError("need at least 100 replicas")
    seed = normalize_seed(seed)
    _, _, L = sample_inverse_local_times(net, v0, t, reps, seed)
    oracle = build_oracle(net, v0=v0)
    sampler = GFFSampler(oracle)
    eta_l = sampler.sample_many(reps, derive_rng(seed, _S_GFF, 0))
    eta_r = sampler.sample_many(reps, derive_rng(seed, _S_GFF, 1))
    lhs = L + 0.5 * eta_l ** 2
    rhs = 0.5 * (eta_r + math.sqrt(2.0 * t)) ** 2
    return RayKnightReport(
        t=float(t),
        reps=reps,
        mean_lhs=lhs.mean(axis=0),
        mean_rhs=rhs.mean(axis=0),
        z_mean=_two_sample_z(lhs, rhs),
        m2_lhs=(lhs ** 2).mean(axis=0),
        m2_rhs=(rhs ** 2).mean(axis=0),
        z_m2=_two_sample_z(lhs ** 2, rhs ** 2),
        theory_mean=t + 0.5 * np.diag(oracle.green),
    )


@dataclass(frozen=True)
class BlanketEstimate:
    """Blanket-time means; weak and strong rules share trajectories.

    On every sample path the weak stop is at or after the cover stop and
    the strong stop at or after the weak stop; both orderings are
    asserted during aggregation.
    """

    delta: float
    mean_weak: float
    se_weak: float
    mean_strong: float
    se_strong: float
    mean_cover: float
    reps: int
    weak_after_cover: bool
    strong_after_weak: bool


def estimate_blanket_time(net: Network, start: int, delta: float, reps: int,
                          seed=None,
                          max_steps: int = DEFAULT_MAX_STEPS) -> BlanketEstimate:
    if not 0.0 < delta < 1.0:
        raise ValidationError("blanket delta must lie in (0, 1)")
    if reps < 10:
        raise ValidationError("need at least 10 replicas")
    seed = normalize_seed(seed)
    indptr, nbr, cum, c, pi = _arrays(net)
    seeds = replica_states(seed, reps, _S_BLANKET)
    ws = np.empty(reps, np.int64)
    wt = np.empty(reps)
    ss = np.empty(reps, np.int64)
    st = np.empty(reps)
    cov = np.empty(reps, np.int64)
    fin = np.empty(reps, np.int64)
    dummy_n = np.zeros((1, 1), np.int64)
    dummy_l = np.zeros((1, 1))
    _blanket_kernel(indptr, nbr, cum, c, pi, start, float(delta), seeds,
                    max_steps, True, False, ws, wt, ss, st, cov, fin,
                    dummy_n, dummy_l)
    _check_budget(ws, max_steps)
    w = ws.astype(np.float64)
    s = ss.astype(np.float64)
    return BlanketEstimate(
        delta=float(delta),
        mean_weak=float(w.mean()),
        se_weak=float(w.std(ddof=1) / math.sqrt(reps)),
        mean_strong=float(s.mean()),
        se_strong=float(s.std(ddof=1) / math.sqrt(reps)),
        mean_cover=float(cov.mean()),
        reps=reps,
        weak_after_cover=bool(np.all(ws >= cov)),
        strong_after_weak=bool(np.all(ss >= ws)),
    )


def escape_frequency(net: Network, v: int, u: int, reps: int, seed=None) -> tuple[float, float]:
    """Empirical P_v(T_v+ > T_u) with its standard error."""
    if v == u:
        raise ValidationError("escape needs distinct vertices")
    seed = normalize_seed(seed)
    indptr, nbr, cum, _, _ = _arrays(net)
    seeds = replica_states(seed, reps, _S_ESCAPE)
    out = np.zeros(reps, np.uint8)
    _escape_kernel(indptr, nbr, cum, v, u, seeds, out)
    p = float(out.mean())
    return p, math.sqrt(max(p * (1 - p), 1e-12) / reps)


def hitting_sample(net: Network, u: int, v: int, reps: int, seed=None,
                   max_steps: int = DEFAULT_MAX_STEPS):
    """(steps, times) samples of the hitting time from u to v."""
    seed = normalize_seed(seed)
    indptr, nbr, cum, _, _ = _arrays(net)
    seeds = replica_states(seed, reps, _S_HIT)
    steps = np.empty(reps, np.int64)
    times = np.empty(reps)
    _hit_kernel(indptr, nbr, cum, u, v, seeds, max_steps, steps, times)
    _check_budget(steps, max_steps)
    return steps, times


def trace_until(net: Network, start: int, rule, seed=None,
                max_steps: int = DEFAULT_MAX_STEPS):
    """Stopping report plus the trajectory that produced it.

    Returns (report, vertices, holdings): arrays of the visited vertex
    and the holding time drawn at each jump, indexed by jump number.
    The replay shares the stopping run's stream, so the trace is the
    run, not a lookalike.
    """
    report = run_until(net, start, rule, seed, max_steps=max_steps)
    if isinstance(rule, (BlanketWeak, BlanketStrong)):
        stream = _S_BLANKET
    elif isinstance(rule, InverseLocal):
        stream = _S_INVLOCAL
    else:
        stream = _S_COVER
    kernel_seed = replica_states(normalize_seed(seed), 1, stream)[0]
    nsteps = report.stop_steps
    indptr, nbr, cum, _, _ = _arrays(net)
    vertices = np.empty(nsteps, np.int64)
    holdings = np.empty(nsteps)
    _trace_kernel(indptr, nbr, cum, start, nsteps, kernel_seed,
                  vertices, holdings)
    return report, vertices, holdings


def occupation_run(net: Network, start: int, nsteps: int, seed=None):
    """Visit counts and local times of a fixed-length run.

    Returns (counts, local_times, elapsed); counts include X_0, so they
    sum to nsteps + 1.
    """
    seed = normalize_seed(seed)
    indptr, nbr, cum, c, _ = _arrays(net)
    state = int(replica_states(seed, 1, _S_OCCUPY)[0])
    counts = np.zeros(net.n, np.int64)
    local = np.zeros(net.n)
    elapsed = _occupy_kernel(indptr, nbr, cum, c, start, nsteps, state,
                             counts, local)
    return counts, local, float(elapsed)
