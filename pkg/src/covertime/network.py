"""Finite electrical networks and the reversible chains they carry.

A network is an undirected graph with strictly positive conductances
``c_uv`` on its edges.  The vertex conductance is ``c_x = sum_y c_xy``
and the total conductance is ``C = sum_x c_x``, which is twice the sum
of the edge conductances.  The associated random walk jumps from ``x``
to ``y`` with probability ``c_xy / c_x`` and has stationary measure
``pi(x) = c_x / C``.  Every finite-state reversible Markov chain arises
this way.

Networks are immutable after construction and safe to share across
threads.  Vertex ids are dense integers ``0..n-1``; external string
labels are mapped at ingestion and kept for reporting.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ConductanceError,
    DisconnectedError,
    GeneratorParamError,
    GlueSetError,
    InputFormatError,
    ReductionSizeError,
    SelfLoopError,
    ValidationError,
)

__all__ = [
    "Network",
    "QuotientNetwork",
    "build_network",
    "laplacian",
    "quotient",
    "star_mesh_reduce",
    "generate",
    "complete_graph",
    "path_graph",
    "cycle_graph",
    "bary_tree",
    "grid_graph",
    "erdos_renyi",
    "read_edgelist",
    "read_json",
    "load",
]


@dataclass(frozen=True)
class Network:
    """Validated weighted graph, stored as parallel edge arrays with u < v."""

    n: int
    edge_u: np.ndarray
    edge_v: np.ndarray
    conductances: np.ndarray
    labels: tuple[str, ...] | None = None

    @cached_property
    def vertex_conductance(self) -> np.ndarray:
        c = np.zeros(self.n)
        np.add.at(c, self.edge_u, self.conductances)
        np.add.at(c, self.edge_v, self.conductances)
        return c

    @property
    def total_conductance(self) -> float:
        """C = sum_x c_x = 2 * sum over edges of c_uv."""
        return float(self.vertex_conductance.sum())

    @property
    def edge_count(self) -> int:
        return int(self.edge_u.shape[0])

    @cached_property
    def stationary(self) -> np.ndarray:
        """pi(x) = c_x / C."""
        c = self.vertex_conductance
        return c / c.sum()

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(indptr, neighbors, cumulative transition probabilities).

        Row ``x`` lists the neighbors of ``x``; the third array holds the
        running sum of ``c_xy / c_x`` along the row, ending at 1.  This is
        the layout the walk kernels consume.
        """
        deg = np.zeros(self.n, dtype=np.int64)
        np.add.at(deg, self.edge_u, 1)
        np.add.at(deg, self.edge_v, 1)
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        nbr = np.empty(indptr[-1], dtype=np.int64)
        wts = np.empty(indptr[-1], dtype=np.float64)
        cursor = indptr[:-1].copy()
        for u, v, c in zip(self.edge_u, self.edge_v, self.conductances):
            nbr[cursor[u]] = v
            wts[cursor[u]] = c
            cursor[u] += 1
            nbr[cursor[v]] = u
            wts[cursor[v]] = c
            cursor[v] += 1
        cum = np.empty_like(wts)
        for x in range(self.n):
            lo, hi = indptr[x], indptr[x + 1]
            block = np.cumsum(wts[lo:hi])
            cum[lo:hi] = block / block[-1]
        return indptr, nbr, cum

    def neighbors(self, x: int) -> np.ndarray:
        indptr, nbr, _ = self.csr
        return nbr[indptr[x]: indptr[x + 1]]

    def edges(self) -> Iterable[tuple[int, int, float]]:
        for u, v, c in zip(self.edge_u, self.edge_v, self.conductances):
            yield int(u), int(v), float(c)

    def label_of(self, x: int) -> str:
        if self.labels is not None:
            return self.labels[x]
        return str(x)

    def to_json_dict(self) -> dict:
        out = {"edges": [[int(u), int(v), float(c)] for u, v, c in self.edges()]}
        if self.labels is not None:
            out["labels"] = {str(i): lab for i, lab in enumerate(self.labels)}
        return out

    def summary(self) -> dict:
        return {
            "n": self.n,
            "edges": self.edge_count,
            "total_conductance": self.total_conductance,
            "min_conductance": float(self.conductances.min()),
            "max_conductance": float(self.conductances.max()),
            "unit_weights": bool(np.all(self.conductances == 1.0)),
        }


def _component_count(n: int, eu: np.ndarray, ev: np.ndarray) -> int:
    parent = np.arange(n)

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in zip(eu, ev):
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    return len({find(x) for x in range(n)})


def build_network(
    edge_list: Sequence[tuple[int, int, float]] | np.ndarray,
    n: int | None = None,
    labels: Sequence[str] | None = None,
) -> Network:
    """Validate an edge list and return an immutable :class:`Network`.

    Duplicate ``(u, v)`` entries have their conductances summed, which
    preserves the chain.  Self-loops and non-positive conductances are
    rejected, and the graph must be connected.
    """
    rows = []
    for entry in edge_list:
        if len(entry) == 2:
            u, v = entry
            c = 1.0
        else:
            u, v, c = entry
        u, v = int(u), int(v)
        c = float(c)
        if u == v:
            raise SelfLoopError(u)
        if not (c > 0.0) or not np.isfinite(c):
            raise ConductanceError(u, v, c)
        if u > v:
            u, v = v, u
        rows.append((u, v, c))
    if not rows:
        raise ValidationError("edge list is empty")

    arr = np.asarray(rows, dtype=np.float64)
    eu = arr[:, 0].astype(np.int64)
    ev = arr[:, 1].astype(np.int64)
    cc = arr[:, 2]
    top = int(max(eu.max(), ev.max()))
    if n is None:
        n = top + 1
    elif top >= n:
        raise ValidationError(f"vertex id {top} out of range for n={n}")
    if eu.min() < 0:
        raise ValidationError("negative vertex id")

    # Merge parallel edges by summing conductances.
    key = eu * n + ev
    order = np.argsort(key, kind="stable")
    key, eu, ev, cc = key[order], eu[order], ev[order], cc[order]
    uniq, start = np.unique(key, return_index=True)
    merged = np.add.reduceat(cc, start)
    eu, ev = eu[start], ev[start]

    comps = _component_count(n, eu, ev)
    if comps != 1:
        raise DisconnectedError(comps)

    if labels is not None:
        if len(labels) != n:
            raise ValidationError("labels length does not match vertex count")
        labels = tuple(str(s) for s in labels)

    return Network(n=n, edge_u=eu, edge_v=ev, conductances=merged, labels=labels)


def laplacian(net: Network, normalized: bool = False) -> np.ndarray:
    """Dense graph Laplacian D - A, optionally divided by tr(D) = C.

    The unnormalized operator acts as
    ``(L f)(x) = c_x f(x) - sum_y c_xy f(y)``;
    rows sum to zero exactly up to rounding.
    """
    L = np.zeros((net.n, net.n))
    u, v, c = net.edge_u, net.edge_v, net.conductances
    L[u, v] -= c
    L[v, u] -= c
    np.fill_diagonal(L, net.vertex_conductance)
    if normalized:
        L = L / net.total_conductance
    return L


@dataclass(frozen=True)
class QuotientNetwork:
    """Network with a vertex subset S glued into a single new vertex v_S."""

    base: Network
    glued: frozenset[int]
    glued_vertex: int
    result: Network
    # mapping[x] is the id of x in the quotient; members of S map to v_S.
    mapping: np.ndarray = field(repr=False)


def quotient(net: Network, S: Iterable[int]) -> QuotientNetwork:
    """Glue ``S`` into one vertex; edges into S merge, internal edges drop.

    The new conductances satisfy ``c_{v_S, x} = sum_{y in S} c_xy``.
    Surviving vertices keep their original relative order; the glued
    vertex gets the last id.
    """
    S = frozenset(int(s) for s in S)
    if not S:
        raise GlueSetError("glue set is empty")
    if len(S) >= net.n:
        raise GlueSetError("glue set covers every vertex")
    if any(s < 0 or s >= net.n for s in S):
        raise ValidationError("glue set contains an out-of-range vertex")

    survivors = [x for x in range(net.n) if x not in S]
    mapping = np.empty(net.n, dtype=np.int64)
    for new_id, x in enumerate(survivors):
        mapping[x] = new_id
    v_s = len(survivors)
    for s in S:
        mapping[s] = v_s

    rows = []
    for u, v, c in net.edges():
        nu, nv = mapping[u], mapping[v]
        if nu == nv:
            continue  # internal edge of S
        rows.append((nu, nv, c))
    result = build_network(rows, n=v_s + 1)
    return QuotientNetwork(
        base=net, glued=S, glued_vertex=v_s, result=result, mapping=mapping
    )


def star_mesh_reduce(net: Network, x: int) -> Network:
    """Eliminate vertex ``x`` by the star-mesh transform.

    Every pair of neighbors y, z of x gets the extra conductance
    ``c_xy * c_xz / c_x`` on top of any existing edge; all effective
    resistances among the surviving vertices are preserved.  (The
    transform's self-loop term ``c_xy^2 / c_x`` carries no current and
    is dropped, so vertex conductances of the survivors shrink by that
    amount while the resistance geometry is untouched.)
    """
    if net.n < 3:
        raise ReductionSizeError("star-mesh reduction needs at least 3 vertices")
    x = int(x)
    if x < 0 or x >= net.n:
        raise ValidationError(f"vertex {x} out of range")

    nbrs = []
    weights = {}
    rows = []
    for u, v, c in net.edges():
        if u == x:
            nbrs.append(v)
            weights[v] = c
        elif v == x:
            nbrs.append(u)
            weights[u] = c
        else:
            rows.append((u, v, c))
    cx = sum(weights.values())
    for i, y in enumerate(nbrs):
        for z in nbrs[i + 1:]:
            rows.append((y, z, weights[y] * weights[z] / cx))

    # Relabel to keep ids dense: vertices above x shift down by one.
    def relabel(v):
        return v if v < x else v - 1

    rows = [(relabel(u), relabel(v), c) for u, v, c in rows]
    labels = None
    if net.labels is not None:
        labels = tuple(lab for i, lab in enumerate(net.labels) if i != x)
    return build_network(rows, n=net.n - 1, labels=labels)


# ---------------------------------------------------------------------------
# Graph families


def complete_graph(n: int) -> Network:
    if n < 2:
        raise GeneratorParamError("complete graph needs n >= 2")
    rows = [(u, v, 1.0) for u in range(n) for v in range(u + 1, n)]
    return build_network(rows, n=n)


def path_graph(n: int) -> Network:
    if n < 2:
        raise GeneratorParamError("path needs n >= 2")
    return build_network([(i, i + 1, 1.0) for i in range(n - 1)], n=n)


def cycle_graph(n: int) -> Network:
    if n < 3:
        raise GeneratorParamError("cycle needs n >= 3")
    rows = [(i, (i + 1) % n, 1.0) for i in range(n)]
    return build_network(rows, n=n)


def bary_tree(b: int, h: int) -> Network:
    """Complete b-ary tree of height h, vertices in breadth-first order."""
    if b < 2 or h < 1:
        raise GeneratorParamError("b-ary tree needs b >= 2 and h >= 1")
    n = (b ** (h + 1) - 1) // (b - 1)
    rows = [(child, (child - 1) // b, 1.0) for child in range(1, n)]
    return build_network(rows, n=n)


def grid_graph(k: int, l: int | None = None) -> Network:
    if l is None:
        l = k
    if k < 2 or l < 2:
        raise GeneratorParamError("grid needs both sides >= 2")
    rows = []
    for i in range(k):
        for j in range(l):
            v = i * l + j
            if j + 1 < l:
                rows.append((v, v + 1, 1.0))
            if i + 1 < k:
                rows.append((v, v + l, 1.0))
    return build_network(rows, n=k * l)


def erdos_renyi(n: int, p: float, seed: int) -> Network:
    """Connected G(n, p); resampled with fresh sub-streams until connected."""
    if n < 2 or not (0.0 < p <= 1.0):
        raise GeneratorParamError("erdos_renyi needs n >= 2 and p in (0, 1]")
    for attempt in range(10_000):
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(attempt,)))
        )
        iu = np.triu_indices(n, k=1)
        mask = rng.random(iu[0].shape[0]) < p
        eu, ev = iu[0][mask], iu[1][mask]
        if eu.size == 0:
            continue
        if _component_count(n, eu, ev) == 1:
            rows = np.column_stack([eu, ev, np.ones(eu.size)])
            return build_network(rows, n=n)
    raise GeneratorParamError(
        f"could not draw a connected G({n}, {p}) in 10000 attempts"
    )


_FAMILIES = {
    "complete": (complete_graph, 1),
    "path": (path_graph, 1),
    "cycle": (cycle_graph, 1),
    "bary_tree": (bary_tree, 2),
    "bary": (bary_tree, 2),
    "grid": (grid_graph, 2),
    "erdos_renyi": (erdos_renyi, 3),
    "er": (erdos_renyi, 3),
}


def generate(spec: str) -> Network:
    """Build a standard family from a string like ``complete:16``.

    Recognized forms: ``complete:n``, ``path:n``, ``cycle:n``,
    ``bary_tree:b,h``, ``grid:k,l``, ``erdos_renyi:n,p,seed`` (alias
    ``er``).  Deterministic given the embedded seed.
    """
    name, _, rest = spec.partition(":")
    name = name.strip().lower()
    if name not in _FAMILIES:
        raise GeneratorParamError(f"unknown family {name!r}")
    fn, arity = _FAMILIES[name]
    parts = [p for p in rest.split(",") if p.strip() != ""]
    if len(parts) != arity:
        raise GeneratorParamError(
            f"family {name!r} takes {arity} parameter(s), got {len(parts)}"
        )
    try:
        if name in ("erdos_renyi", "er"):
            args = (int(parts[0]), float(parts[1]), int(parts[2]))
        else:
            args = tuple(int(p) for p in parts)
    except ValueError as exc:
        raise GeneratorParamError(f"bad parameters for {name!r}: {rest!r}") from exc
    return fn(*args)


# ---------------------------------------------------------------------------
# Ingestion


def read_edgelist(text: str) -> Network:
    """Parse the plain text format: one ``u v [c]`` per line.

    ``#`` starts a comment, blank lines are ignored, conductance defaults
    to 1.  If every endpoint token is an integer and the ids are dense
    from 0, they are used directly; otherwise tokens are treated as
    labels and mapped to dense ids in first-seen order.
    """
    triples = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise InputFormatError(f"line {lineno}: expected 'u v [c]', got {raw!r}")
        c = 1.0
        if len(parts) == 3:
            try:
                c = float(parts[2])
            except ValueError as exc:
                raise InputFormatError(
                    f"line {lineno}: bad conductance {parts[2]!r}"
                ) from exc
        triples.append((parts[0], parts[1], c))
    if not triples:
        raise InputFormatError("no edges found")

    tokens = [t for u, v, _ in triples for t in (u, v)]
    as_int = None
    try:
        ints = [int(t) for t in tokens]
        if min(ints) == 0 and set(ints) == set(range(max(ints) + 1)):
            as_int = True
    except ValueError:
        as_int = None
    if as_int:
        rows = [(int(u), int(v), c) for u, v, c in triples]
        return build_network(rows)
    index: dict[str, int] = {}
    for t in tokens:
        if t not in index:
            index[t] = len(index)
    rows = [(index[u], index[v], c) for u, v, c in triples]
    labels = tuple(sorted(index, key=index.get))
    return build_network(rows, n=len(index), labels=labels)


def read_json(text: str) -> Network:
    """Parse ``{"edges": [[u, v, c], ...], "labels": {"0": "name", ...}}``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "edges" not in doc:
        raise InputFormatError("JSON network needs an 'edges' array")
    rows = []
    for entry in doc["edges"]:
        if not isinstance(entry, (list, tuple)) or len(entry) not in (2, 3):
            raise InputFormatError(f"bad edge entry {entry!r}")
        rows.append(tuple(entry))
    labels = None
    if "labels" in doc and doc["labels"]:
        raw = {int(k): str(v) for k, v in doc["labels"].items()}
        n = max(max(int(e[0]), int(e[1])) for e in rows) + 1
        labels = tuple(raw.get(i, str(i)) for i in range(n))
    return build_network(rows, labels=labels)


def load(path: str) -> Network:
    """Read a network from a file, dispatching on a leading '{' for JSON."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        return read_json(text)
    return read_edgelist(text)
