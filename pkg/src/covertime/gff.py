"""Gaussian free field sampling and commute-distance sketches.

The GFF on a network, pinned at a ground vertex v0, is the centered
Gaussian vector with density proportional to exp(-<X, Delta X>/2); its
covariance is the Green matrix and its increments satisfy

    E (eta_u - eta_v)^2 = R_eff(u, v).

This module provides three Gaussian views of the same geometry:

* pinned samples with covariance Gamma_{v0} (increment metric sqrt(R_eff)),
* pseudoroot samples sqrt(L+) g for the normalized Laplacian
  L = (D - A)/tr(D) (increment metric sqrt(kappa)),
* a k x n sketch Z whose columns embed vertices so that every pair
  satisfies kappa(i,j) <= ||Z(e_i - e_j)||^2 <= 2 kappa(i,j); the
  guarantee is enforced by validation with retries, not left to chance.

All estimators take a 64-bit seed (or a Generator) and are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._seeds import as_rng, derive_rng
from .errors import SketchValidationError, ValidationError
from .network import Network, laplacian
from .resistance import ResistanceOracle, build_oracle

__all__ = [
    "GFFSampler",
    "SupEstimate",
    "LinfEstimate",
    "ResistanceSketch",
    "sample_gff",
    "sample_pseudoroot",
    "estimate_sup",
    "estimate_linf",
    "build_sketch",
    "sketch_sup_estimate",
    "affine_hull_distance",
]

SKETCH_MAX_ROUNDS = 8
SKETCH_ATTEMPTS_PER_ROUND = 8
# Midpoint of the [kappa, 2*kappa] window: scaling the exact embedding by
# 3/2 leaves symmetric relative slack 1/3 on both sides for the random
# projection to land in.
SKETCH_MIDPOINT = 1.5


class GFFSampler:
    """Draws from the GFF in one of two modes.

    ``pinned_green``: eta with eta_{v0} = 0 and covariance Gamma_{v0},
    using the resistance oracle's triangular factor (one decomposition
    serves both solves and sampling).

    ``pseudoroot``: X = sqrt(L+) g for the normalized Laplacian; the
    increments have variance kappa(i, j) = C * R_eff(i, j).  The implied
    scale factor between the modes is sqrt(C), tracked in ``scale``.
    """

    def __init__(self, oracle_or_net, mode: str = "pinned_green"):
        if isinstance(oracle_or_net, ResistanceOracle):
            oracle = oracle_or_net
        else:
            oracle = build_oracle(oracle_or_net)
        if mode not in ("pinned_green", "pseudoroot"):
            raise ValidationError(f"unknown sampler mode {mode!r}")
        self.oracle = oracle
        self.net = oracle.net
        self.mode = mode
        self.v0 = oracle.v0
        self.scale = math.sqrt(self.net.total_conductance)
        if mode == "pseudoroot":
            self._sqrt_pinv = _sqrt_pseudoinverse(laplacian(self.net, normalized=True))
            self.sigma = float(np.sqrt(np.einsum("ij,ij->i", self._sqrt_pinv,
                                                 self._sqrt_pinv).max()))
        else:
            self._sqrt_pinv = None
            self.sigma = float(np.sqrt(np.diag(oracle.green).max()))

    def sample(self, rng) -> np.ndarray:
        return self.sample_many(1, rng)[0]

    def sample_many(self, count: int, rng) -> np.ndarray:
        """(count, n) array of independent field draws."""
        rng = as_rng(rng)
        n = self.net.n
        if self.mode == "pseudoroot":
            z = rng.standard_normal((n, count))
            return (self._sqrt_pinv @ z).T
        z = rng.standard_normal((n - 1, count))
        core = self.oracle.sample_pinned(z)
        out = np.zeros((count, n))
        others = np.array([x for x in range(n) if x != self.v0])
        out[:, others] = core.T
        return out


def _sqrt_pseudoinverse(L: np.ndarray) -> np.ndarray:
    """Symmetric square root of the Moore-Penrose pseudoinverse.

    Connected networks have a one-dimensional Laplacian kernel (the
    constants); eigenvalues below a spectral tolerance are treated as
    exact zeros.
    """
    w, V = np.linalg.eigh(L)
    tol = L.shape[0] * np.finfo(float).eps * w.max()
    inv = np.where(w > tol, 1.0 / np.maximum(w, tol), 0.0)
    if int(np.sum(w <= tol)) != 1:
        raise ValidationError("Laplacian kernel is not one-dimensional")
    return (V * np.sqrt(inv)) @ V.T


def sample_gff(sampler: GFFSampler, rng) -> np.ndarray:
    """One pinned draw: eta_{v0} = 0, covariance Gamma_{v0}."""
    return sampler.sample(rng)


def sample_pseudoroot(net: Network, rng) -> np.ndarray:
    """One draw of sqrt(L+) g; covariance is the normalized pseudoinverse."""
    return GFFSampler(net, mode="pseudoroot").sample(rng)


@dataclass(frozen=True)
class SupEstimate:
    """Monte Carlo estimate of E sup_v eta_v with concentration context.

    ``sigma`` is the process scale max_x sqrt(E eta_x^2); Gaussian
    concentration bounds the deviation of a single sup sample by
    2 exp(-a^2 / 2 sigma^2), so the standard error can never honestly
    exceed sigma/sqrt(samples) and is capped there.
    """

    mean: float
    stderr: float
    samples: int
    sigma: float

    def tail_bound(self, alpha: float) -> float:
        return 2.0 * math.exp(-(alpha ** 2) / (2.0 * self.sigma ** 2))


@dataclass(frozen=True)
class LinfEstimate:
    """Monte Carlo moments of an infinity norm ||X||_inf = max_i |X_i|.

    Both E||X||_inf^2 and (E||X||_inf)^2 estimate the cover time up to
    universal constants; they differ, so both are carried.
    """

    mean_sq: float
    stderr_sq: float
    mean_abs: float
    stderr_abs: float
    samples: int


_BATCH = 4096


def estimate_sup(sampler: GFFSampler, num_samples: int, rng) -> SupEstimate:
    """Mean of max_v eta_v over independent draws (signed max, pinned 0)."""
    if num_samples < 2:
        raise ValidationError("need at least 2 samples")
    rng = as_rng(rng)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < num_samples:
        m = min(_BATCH, num_samples - done)
        sups = sampler.sample_many(m, rng).max(axis=1)
        total += float(sups.sum())
        total_sq += float((sups ** 2).sum())
        done += m
    mean = total / num_samples
    var = max(total_sq / num_samples - mean ** 2, 0.0)
    stderr = math.sqrt(var / num_samples)
    stderr = min(stderr, sampler.sigma / math.sqrt(num_samples))
    return SupEstimate(mean=mean, stderr=stderr, samples=num_samples,
                       sigma=sampler.sigma)


def _linf_moments(draw, num_samples: int, rng) -> LinfEstimate:
    sums = np.zeros(4)  # |.|, |.|^2, |.|^3 unused, |.|^4
    done = 0
    while done < num_samples:
        m = min(_BATCH, num_samples - done)
        vals = np.abs(draw(m, rng)).max(axis=1)
        sums[0] += vals.sum()
        sums[1] += (vals ** 2).sum()
        sums[3] += (vals ** 4).sum()
        done += m
    mean_abs = sums[0] / num_samples
    mean_sq = sums[1] / num_samples
    var_abs = max(mean_sq - mean_abs ** 2, 0.0)
    var_sq = max(sums[3] / num_samples - mean_sq ** 2, 0.0)
    return LinfEstimate(
        mean_sq=float(mean_sq),
        stderr_sq=float(math.sqrt(var_sq / num_samples)),
        mean_abs=float(mean_abs),
        stderr_abs=float(math.sqrt(var_abs / num_samples)),
        samples=num_samples,
    )


def estimate_linf(sampler: GFFSampler, num_samples: int, rng) -> LinfEstimate:
    """Moments of ||X||_inf for a field sampler (pseudoroot estimator)."""
    if num_samples < 2:
        raise ValidationError("need at least 2 samples")
    rng = as_rng(rng)
    return _linf_moments(lambda m, g: sampler.sample_many(m, g), num_samples, rng)


# ---------------------------------------------------------------------------
# Resistance sketch


@dataclass(frozen=True)
class ResistanceSketch:
    """k x n embedding whose column differences approximate commute times.

    When ``validated`` is True and ``pair_check_mode == "all_pairs"``,
    every pair satisfies kappa <= ||Z(e_i - e_j)||^2 <= 2 kappa as a hard
    postcondition (checked, retried on failure).
    """

    Z: np.ndarray
    k: int
    validated: bool
    pair_check_mode: str
    attempts: int
    worst_low: float
    worst_high: float

    @property
    def n(self) -> int:
        return int(self.Z.shape[1])


def default_sketch_rows(n: int) -> int:
    return int(math.ceil(24.0 * math.log(max(n, 2))))


def build_sketch(
    net: Network,
    rng,
    epsilon_slack: float = 0.0,
    k: int | None = None,
    pair_check_mode: str = "all_pairs",
    sample_pairs: int = 2048,
) -> ResistanceSketch:
    """Random projection of the exact commute embedding, validated.

    The exact embedding rows are sqrt(W) B L+ scaled so that squared
    column differences equal ``SKETCH_MIDPOINT * kappa``; a k x m
    Rademacher projection Q (entries +-1/sqrt(k)) compresses the edge
    dimension.  Validation checks every pair against the
    [kappa, 2*kappa] window (with relative slack ``epsilon_slack``);
    failed draws are retried up to 8 times per k, then k grows by 50%.
    """
    rng = as_rng(rng)
    n = net.n
    if pair_check_mode not in ("all_pairs", "sampled"):
        raise ValidationError(f"unknown pair check mode {pair_check_mode!r}")
    if k is None:
        k = default_sketch_rows(n)

    # Exact embedding: squared distances equal C * R_eff = kappa.
    u, v, c = net.edge_u, net.edge_v, net.conductances
    m = net.edge_count
    B = np.zeros((m, n))
    B[np.arange(m), u] = 1.0
    B[np.arange(m), v] = -1.0
    Lpinv = np.linalg.pinv(laplacian(net), hermitian=True)
    base = np.sqrt(SKETCH_MIDPOINT * net.total_conductance * c)[:, None] * (B @ Lpinv)

    oracle = build_oracle(net)
    kappa = net.total_conductance * oracle.r_eff_matrix()
    iu = np.triu_indices(n, k=1)
    if pair_check_mode == "sampled" and iu[0].size > sample_pairs:
        pick = derive_rng(0, 97).choice(iu[0].size, size=sample_pairs, replace=False)
        iu = (iu[0][pick], iu[1][pick])
    kap = kappa[iu]
    lo_bound = kap * (1.0 - epsilon_slack)
    hi_bound = 2.0 * kap * (1.0 + epsilon_slack)

    attempts = 0
    worst_low = worst_high = math.nan
    for _ in range(SKETCH_MAX_ROUNDS):
        for _ in range(SKETCH_ATTEMPTS_PER_ROUND):
            attempts += 1
            Q = rng.integers(0, 2, size=(k, m)).astype(np.float64) * 2.0 - 1.0
            Z = (Q @ base) / math.sqrt(k)
            gram_diag = np.einsum("ij,ij->j", Z, Z)
            d2 = (gram_diag[iu[0]] + gram_diag[iu[1]]
                  - 2.0 * np.einsum("ij,ij->j", Z[:, iu[0]], Z[:, iu[1]]))
            ratios = d2 / kap
            worst_low = float(ratios.min())
            worst_high = float(ratios.max())
            if np.all(d2 >= lo_bound) and np.all(d2 <= hi_bound):
                return ResistanceSketch(
                    Z=Z, k=k, validated=True, pair_check_mode=pair_check_mode,
                    attempts=attempts, worst_low=worst_low, worst_high=worst_high,
                )
        k = int(math.ceil(1.5 * k))
    raise SketchValidationError(
        worst_ratio=worst_high, attempts=attempts, k=k
    )


def sketch_sup_estimate(sketch: ResistanceSketch, num_samples: int, rng) -> LinfEstimate:
    """Moments of ||Z g||_inf with g a standard k-dimensional Gaussian.

    ``mean_sq`` is the near-linear-time cover estimate E ||Z g||_inf^2.
    """
    if not sketch.validated:
        raise ValidationError("sketch must be validated before estimation")
    if num_samples < 2:
        raise ValidationError("need at least 2 samples")
    rng = as_rng(rng)

    def draw(count, g):
        return (sketch.Z.T @ g.standard_normal((sketch.k, count))).T

    return _linf_moments(draw, num_samples, rng)


def affine_hull_distance(oracle: ResistanceOracle, w: int, S) -> float:
    """L2 distance from eta_w to the affine hull of {eta_u : u in S}.

    Minimizes E (eta_w - sum_u a_u eta_u)^2 subject to sum a_u = 1 (the
    affine constraint), via the KKT system in the Green inner product.
    The constraint makes the value invariant under re-pinning the field,
    so any ground vertex works; when v0 lies in S this reduces to a
    plain projection onto the linear span.  Equals sqrt(R_eff(w, S)).
    """
    S = sorted(set(int(s) for s in S))
    if w in S:
        return 0.0
    G = oracle.green
    m = len(S)
    Gss = G[np.ix_(S, S)]
    gws = G[w, S]
    kkt = np.zeros((m + 1, m + 1))
    kkt[:m, :m] = Gss
    kkt[:m, m] = 1.0
    kkt[m, :m] = 1.0
    rhs = np.concatenate([gws, [1.0]])
    sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
    a = sol[:m]
    d2 = G[w, w] - 2.0 * float(gws @ a) + float(a @ Gss @ a)
    return float(np.sqrt(max(d2, 0.0)))
