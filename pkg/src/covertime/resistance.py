"""Exact electrical quantities via the grounded Laplacian.

Removing the row and column of a ground vertex v0 from the Laplacian
leaves a symmetric positive definite matrix whose inverse is the Green
matrix Gamma_{v0}.  With the convention that the ground's row and
column of Gamma are zero,

    R_eff(x, y)   = Gamma(x,x) + Gamma(y,y) - 2 Gamma(x,y)
    Gamma(x, y)   = (R_eff(x,v0) + R_eff(v0,y) - R_eff(x,y)) / 2
    kappa(x, y)   = C * R_eff(x, y)          (commute time)

Hitting times are solved target by target from the first-step
equations, independently of the Green factorization, so the commute
identity serves as a genuine cross-check rather than a tautology.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .errors import FactorizationError, ValidationError
from .network import Network, laplacian, quotient

__all__ = [
    "ResistanceOracle",
    "HittingTimeTable",
    "build_oracle",
    "r_eff",
    "r_eff_set",
    "commute",
    "hitting_times",
    "foster_residual",
    "escape_probability",
]

# Above this size the dense Cholesky path gives way to conjugate-gradient
# solves with relative residual <= 1e-10.
DENSE_LIMIT = 4000


class ResistanceOracle:
    """Factorization of the grounded Laplacian with Green-matrix queries.

    Immutable after construction; all query methods are read-only and may
    be called concurrently.
    """

    def __init__(self, net: Network, v0: int | None = None,
                 dense_limit: int = DENSE_LIMIT):
        self.net = net
        if v0 is None:
            # Max-conductance ground gives the best-conditioned system.
            v0 = int(np.argmax(net.vertex_conductance))
        if v0 < 0 or v0 >= net.n:
            raise ValidationError(f"ground vertex {v0} out of range")
        self.v0 = int(v0)
        self.jittered = False
        self._others = np.array([x for x in range(net.n) if x != self.v0])
        self._pos = np.full(net.n, -1, dtype=np.int64)
        self._pos[self._others] = np.arange(net.n - 1)
        self._dense = net.n <= dense_limit
        L = laplacian(net)
        Lg = L[np.ix_(self._others, self._others)]
        if self._dense:
            self._chol = self._factor(Lg)
            self._sparse = None
        else:
            self._chol = None
            self._sparse = scipy.sparse.csr_matrix(Lg)

    def _factor(self, Lg: np.ndarray) -> np.ndarray:
        try:
            return scipy.linalg.cholesky(Lg, lower=True)
        except scipy.linalg.LinAlgError:
            # Connected networks are SPD here; a failure means severe
            # ill-conditioning.  Retry once with a tiny diagonal jitter
            # and flag the result.
            jitter = 1e-12 * np.trace(Lg)
            try:
                factor = scipy.linalg.cholesky(
                    Lg + jitter * np.eye(Lg.shape[0]), lower=True
                )
            except scipy.linalg.LinAlgError as exc:
                cond = float(np.linalg.cond(Lg)) if Lg.shape[0] <= 2000 else None
                raise FactorizationError(
                    "grounded Laplacian factorization failed", cond
                ) from exc
            self.jittered = True
            warnings.warn(
                "grounded Laplacian needed diagonal jitter; results may be "
                "inaccurate", RuntimeWarning, stacklevel=3,
            )
            return factor

    # -- linear algebra ----------------------------------------------------

    def solve_grounded(self, b: np.ndarray) -> np.ndarray:
        """Solve the grounded system; ``b`` indexed by vertices != v0."""
        if self._dense:
            y = scipy.linalg.solve_triangular(self._chol, b, lower=True)
            return scipy.linalg.solve_triangular(
                self._chol, y, lower=True, trans="T"
            )
        x = np.empty_like(b, dtype=np.float64)
        cols = b.reshape(b.shape[0], -1)
        out = np.empty_like(cols, dtype=np.float64)
        for j in range(cols.shape[1]):
            sol, info = scipy.sparse.linalg.cg(
                self._sparse, cols[:, j], rtol=1e-12, atol=0.0
            )
            if info != 0:
                raise FactorizationError("conjugate gradient did not converge")
            out[:, j] = sol
        return out.reshape(b.shape) if b.ndim > 1 else out[:, 0]

    def sample_pinned(self, z: np.ndarray) -> np.ndarray:
        """Map iid standard normals to a pinned field with covariance Gamma.

        If LL^T is the grounded Laplacian then L^{-T} z has covariance
        (L L^T)^{-1} = Gamma.  Only available on the dense path.
        """
        if not self._dense:
            raise FactorizationError(
                "pinned sampling requires the dense factorization"
            )
        return scipy.linalg.solve_triangular(self._chol, z, lower=True, trans="T")

    @cached_property
    def green(self) -> np.ndarray:
        """Full n x n Green matrix; row and column v0 are zero."""
        m = self.net.n - 1
        core = self.solve_grounded(np.eye(m))
        G = np.zeros((self.net.n, self.net.n))
        G[np.ix_(self._others, self._others)] = 0.5 * (core + core.T)
        return G

    # -- electrical queries --------------------------------------------------

    def r_eff(self, x: int, y: int) -> float:
        """Effective resistance between two vertices."""
        if x == y:
            return 0.0
        G = self.green
        return float(G[x, x] + G[y, y] - 2.0 * G[x, y])

    def r_eff_matrix(self) -> np.ndarray:
        G = self.green
        d = np.diag(G)
        R = d[:, None] + d[None, :] - 2.0 * G
        np.fill_diagonal(R, 0.0)
        return np.maximum(R, 0.0)

    def commute(self, u: int, v: int) -> float:
        """kappa(u, v) = C * R_eff(u, v), in expected discrete steps."""
        return self.net.total_conductance * self.r_eff(u, v)

    def c_eff(self, u: int, v: int) -> float:
        """Effective conductance, the reciprocal of r_eff."""
        return 1.0 / self.r_eff(u, v)

    def resistance_diameter(self) -> float:
        """max over pairs of sqrt(R_eff)."""
        return float(np.sqrt(self.r_eff_matrix().max()))


def build_oracle(net: Network, v0: int | None = None, **kw) -> ResistanceOracle:
    return ResistanceOracle(net, v0, **kw)


def r_eff(net_or_oracle, x: int, y: int) -> float:
    oracle = _as_oracle(net_or_oracle)
    return oracle.r_eff(x, y)


def commute(net_or_oracle, u: int, v: int) -> float:
    oracle = _as_oracle(net_or_oracle)
    return oracle.commute(u, v)


def _as_oracle(net_or_oracle) -> ResistanceOracle:
    if isinstance(net_or_oracle, ResistanceOracle):
        return net_or_oracle
    return ResistanceOracle(net_or_oracle)


def r_eff_set(net: Network, v: int, S: Iterable[int]) -> float:
    """R_eff(v, S): resistance from v to the set S, via the quotient G/S."""
    S = frozenset(int(s) for s in S)
    if v in S:
        return 0.0
    q = quotient(net, S)
    oracle = ResistanceOracle(q.result, v0=q.glued_vertex)
    return oracle.r_eff(int(q.mapping[v]), q.glued_vertex)


@dataclass(frozen=True)
class HittingTimeTable:
    """All-pairs expected hitting times H(u, v) in discrete steps."""

    H: np.ndarray
    t_hit: float
    resistance_diameter: float

    def max_pair(self) -> tuple[int, int]:
        u, v = np.unravel_index(np.argmax(self.H), self.H.shape)
        return int(u), int(v)


def hitting_times(net: Network) -> HittingTimeTable:
    """Solve H(x, v) = 1 + sum_y p_xy H(y, v) for every target v.

    Each target gets its own grounded solve (LU, not the Green
    factorization), so comparisons against ``C * R_eff`` are meaningful
    cross-checks.  In matrix form the column H(., v) solves
    ``Lg h = c`` where Lg drops row and column v and c holds the vertex
    conductances.
    """
    n = net.n
    L = laplacian(net)
    c = net.vertex_conductance
    H = np.zeros((n, n))
    for v in range(n):
        keep = [x for x in range(n) if x != v]
        sub = L[np.ix_(keep, keep)]
        h = np.linalg.solve(sub, c[keep])
        H[keep, v] = h
    oracle = ResistanceOracle(net)
    return HittingTimeTable(
        H=H,
        t_hit=float(H.max()),
        resistance_diameter=oracle.resistance_diameter(),
    )


def foster_residual(net: Network) -> float:
    """sum over edges of c_uv * R_eff(u, v), minus (n - 1).

    Foster's theorem makes this zero for every connected network; the
    returned residual measures numerical error only.
    """
    oracle = ResistanceOracle(net)
    R = oracle.r_eff_matrix()
    total = float(np.sum(net.conductances * R[net.edge_u, net.edge_v]))
    return total - (net.n - 1)


def escape_probability(net_or_oracle, v: int, u: int) -> float:
    """P_v(walk leaves v and hits u before returning) = 1/(c_v R_eff(u,v))."""
    if v == u:
        raise ValidationError("escape probability needs distinct vertices")
    oracle = _as_oracle(net_or_oracle)
    cv = oracle.net.vertex_conductance[v]
    return 1.0 / (cv * oracle.r_eff(u, v))
