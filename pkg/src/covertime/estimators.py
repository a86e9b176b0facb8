"""Cover-time estimators, classical bounds, and the combined report.

Five quantities target the cover time of a network, all equal to it up
to universal constants:

* gaussian:   C * (E sup_v eta_v)^2 for the pinned free field,
* gamma2:     C * A(V, sqrt(R_eff))^2 from the deterministic recursion,
* pseudoroot: E || sqrt(L+) g ||_inf^2 for the normalized Laplacian,
* sketch:     E || Z g ||_inf^2 for the validated commute embedding,
* simulation: Monte Carlo means of the cover and cover-and-return times.

Alongside them sit the Matthews bounds

    t_cov <= t_hit (1 + ln n)
    t_cov >= max over subsets S of (min pairwise hitting time in S)
             * ln(|S| - 1)

(the lower bound maximized greedily over packing thresholds), and the
informational tight upper bound
(1 + C sqrt(t_hit / t_cov)) |E| (E sup eta)^2 with configurable C.

``full_report`` runs a selected subset and emits a JSON-serializable
report with recorded seeds; identical seeds give identical bytes.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ._seeds import normalize_seed, derive_rng
from .errors import ValidationError
from .gamma2 import gamma2_of_network
from .gff import GFFSampler, build_sketch, estimate_linf, estimate_sup, sketch_sup_estimate
from .network import Network
from .resistance import HittingTimeTable, build_oracle, hitting_times
from .walk import estimate_blanket_time, estimate_cover_time

__all__ = [
    "ReportConfig",
    "CoverTimeReport",
    "matthews_upper",
    "matthews_lower",
    "full_report",
    "asymptotic_check",
    "SCHEMA_VERSION",
]

SCHEMA_VERSION = 1


def matthews_upper(table: HittingTimeTable, n: int) -> float:
    """t_hit * (1 + ln n), an unconditional cover-time upper bound."""
    return table.t_hit * (1.0 + math.log(n))


def matthews_lower(table: HittingTimeTable) -> float:
    """Greedy realization of the subset lower bound.

    The exact bound maximizes (min pairwise H over S) * ln(|S| - 1) over
    all subsets, which is exponential; instead, for every candidate
    threshold alpha in the sorted pairwise values, a set is packed
    farthest-first under the symmetric distance min(H(u,v), H(v,u)) and
    the resulting value is kept.  Zero when no 3-point packing exists.
    """
    H = table.H
    n = H.shape[0]
    if n < 3:
        return 0.0
    sym = np.minimum(H, H.T)
    np.fill_diagonal(sym, np.inf)
    thresholds = np.unique(sym[np.isfinite(sym)])
    best = 0.0
    for alpha in thresholds:
        # Farthest-first packing at separation >= alpha, seeded by the
        # pair realizing the largest symmetric distance.
        finite = np.where(np.isfinite(sym), sym, -np.inf)
        u, v = np.unravel_index(np.argmax(finite), sym.shape)
        if sym[u, v] < alpha:
            continue
        members = [int(u), int(v)]
        dist_to_set = np.minimum(sym[u], sym[v])
        dist_to_set[members] = -np.inf
        while True:
            w = int(np.argmax(dist_to_set))
            if dist_to_set[w] < alpha:
                break
            members.append(w)
            dist_to_set = np.minimum(dist_to_set, sym[w])
            dist_to_set[w] = -np.inf
        if len(members) >= 3:
            best = max(best, float(alpha) * math.log(len(members) - 1))
    return best


@dataclass(frozen=True)
class ReportConfig:
    """What to run and with which budgets."""

    seed: int = None  # type: ignore[assignment]
    sup_samples: int = 2000
    cover_reps: int = 200
    start: int = 0
    include_simulation: bool = True
    include_gamma2: bool = True
    include_pseudoroot: bool = True
    include_sketch: bool = True
    include_blanket: bool = False
    blanket_delta: float = 0.5
    blanket_reps: int = 100
    tight_constant: float = 1.0
    gamma2_r: int = 16
    timings: bool = False

    def __post_init__(self):
        object.__setattr__(self, "seed", normalize_seed(self.seed))


@dataclass
class CoverTimeReport:
    """All selected estimates plus their pairwise ratios."""

    graph: dict
    estimates: dict
    ratios: dict
    seeds: dict
    durations_ms: dict = field(default_factory=dict)
    schema: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "schema": self.schema,
            "graph": self.graph,
            "estimates": self.estimates,
            "ratios": self.ratios,
            "seeds": self.seeds,
            "durations_ms": self.durations_ms,
        }


def _ratio(a, b):
    if a is None or b is None or b == 0:
        return None
    return a / b


def full_report(net: Network, config: ReportConfig | None = None) -> CoverTimeReport:
    """Run the selected estimators and assemble the sandwich report."""
    if config is None:
        config = ReportConfig()
    seed = config.seed
    clock: dict[str, float] = {}

    def timed(name, fn):
        t0 = time.perf_counter()
        out = fn()
        clock[name] = (time.perf_counter() - t0) * 1000.0
        return out

    oracle = timed("oracle", lambda: build_oracle(net))
    table = timed("hitting", lambda: hitting_times(net))
    n = net.n
    cal_c = net.total_conductance

    estimates: dict = {}
    sampler = GFFSampler(oracle)
    sup = timed("gaussian", lambda: estimate_sup(
        sampler, config.sup_samples, derive_rng(seed, 11)))
    estimates["esup_eta"] = sup.mean
    estimates["esup_eta_stderr"] = sup.stderr
    estimates["gaussian"] = cal_c * sup.mean ** 2

    if config.include_gamma2:
        a_value, _ = timed("gamma2", lambda: gamma2_of_network(net, r=config.gamma2_r))
        estimates["gamma2_value"] = a_value
        estimates["gamma2"] = cal_c * a_value ** 2

    if config.include_pseudoroot:
        pseudo = GFFSampler(net, mode="pseudoroot")
        est = timed("pseudoroot", lambda: estimate_linf(
            pseudo, config.sup_samples, derive_rng(seed, 12)))
        estimates["pseudoroot"] = est.mean_sq
        estimates["pseudoroot_mean_abs_sq"] = est.mean_abs ** 2

    if config.include_sketch:
        sketch = timed("sketch_build", lambda: build_sketch(
            net, derive_rng(seed, 13)))
        est = timed("sketch", lambda: sketch_sup_estimate(
            sketch, config.sup_samples, derive_rng(seed, 14)))
        estimates["sketch"] = est.mean_sq
        estimates["sketch_rows"] = sketch.k

    estimates["matthews_upper"] = matthews_upper(table, n)
    estimates["matthews_lower"] = matthews_lower(table)
    if estimates["matthews_lower"] > estimates["matthews_upper"] + 1e-9:
        raise ValidationError("Matthews bounds crossed; numerical trouble")

    sim = None
    if config.include_simulation:
        sim = timed("simulation", lambda: estimate_cover_time(
            net, config.start, config.cover_reps, derive_rng(seed, 15).integers(2 ** 63)))
        estimates["simulated_cover"] = sim.mean_cover
        estimates["simulated_cover_stderr"] = sim.se_cover
        estimates["simulated_cover_return"] = sim.mean_cover_return
        estimates["simulated_cover_return_stderr"] = sim.se_cover_return

    if config.include_blanket:
        bl = timed("blanket", lambda: estimate_blanket_time(
            net, config.start, config.blanket_delta, config.blanket_reps,
            derive_rng(seed, 16).integers(2 ** 63)))
        estimates["blanket_weak"] = bl.mean_weak
        estimates["blanket_strong"] = bl.mean_strong

    # Informational only: the finite-size corrected upper bound.  The
    # reference cover time is the simulated mean when available.
    t_cov_ref = sim.mean_cover if sim is not None else estimates["gaussian"]
    if t_cov_ref > 0:
        corr = 1.0 + config.tight_constant * math.sqrt(table.t_hit / t_cov_ref)
        estimates["tight_upper"] = corr * net.edge_count * sup.mean ** 2
        estimates["tight_upper_constant"] = config.tight_constant

    core = ["gaussian", "gamma2", "pseudoroot", "sketch"]
    ratios: dict = {}
    for i, a in enumerate(core):
        for b in core[i + 1:]:
            if a in estimates and b in estimates:
                ratios[f"{a}_over_{b}"] = _ratio(estimates[a], estimates[b])
    if sim is not None:
        for a in core:
            if a in estimates:
                ratios[f"simulated_over_{a}"] = _ratio(sim.mean_cover, estimates[a])
        ratios["simulated_return_over_gaussian"] = _ratio(
            sim.mean_cover_return, estimates["gaussian"])
        ratios["simulated_over_matthews_upper"] = _ratio(
            sim.mean_cover, estimates["matthews_upper"])

    graph = net.summary()
    graph["t_hit"] = table.t_hit
    graph["resistance_diameter"] = table.resistance_diameter

    return CoverTimeReport(
        graph=graph,
        estimates=estimates,
        ratios=ratios,
        seeds={"master": seed, "layout": "SeedSequence(master, stream_id)"},
        durations_ms=clock if config.timings else {},
    )


def asymptotic_check(family: str, sizes, seed=None, sup_samples: int = 4000,
                     cover_reps: int = 200) -> list[dict]:
    """Finite-size scaling table for the exactly-understood families.

    For complete graphs the expected field supremum approaches
    sqrt(2 ln n / n) and the cover time n ln n; for b-ary trees of
    height h the cover time approaches 2 h n ln n.  Each row reports
    |E| (E sup)^2 against the simulated cover time (target ratio 1).
    """
    from .network import bary_tree, complete_graph

    seed = normalize_seed(seed)
    rows = []
    for size in sizes:
        if family == "complete":
            n = int(size)
            net = complete_graph(n)
            theory = n * math.log(n)
            label = f"K_{n}"
        elif family == "bary_tree":
            b, h = (int(size[0]), int(size[1])) if not np.isscalar(size) else (2, int(size))
            net = bary_tree(b, h)
            n = net.n
            theory = 2.0 * h * n * math.log(n)
            label = f"tree_{b}_{h}"
        else:
            raise ValidationError(f"unknown family {family!r} for asymptotics")

        sampler = GFFSampler(build_oracle(net))
        sup = estimate_sup(sampler, sup_samples, derive_rng(seed, 21, net.n))
        sim = estimate_cover_time(
            net, 0, cover_reps, derive_rng(seed, 22, net.n).integers(2 ** 63))
        estimate = net.edge_count * sup.mean ** 2
        row = {
            "label": label,
            "n": net.n,
            "edges": net.edge_count,
            "esup": sup.mean,
            "estimate": estimate,
            "simulated": sim.mean_cover,
            "estimate_over_simulated": estimate / sim.mean_cover,
            "theory": theory,
            "simulated_over_theory": sim.mean_cover / theory,
        }
        if family == "complete":
            target = math.sqrt(2.0 * math.log(net.n) / net.n)
            row["esup_over_target"] = sup.mean / target
            row["estimate_over_nlogn"] = estimate / theory
        rows.append(row)
    return rows
