"""Finite simple graphs, clique enumeration, clique weights and boundaries.

Cliques are stored as strictly ascending vertex tuples; that ascending order
is the reference orientation for every form value in the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

Clique = tuple[int, ...]

WEIGHT_MODES = ("unit", "normalized", "explicit")


class GraphError(ValueError):
    """Malformed graph or boundary data."""


def sort_with_sign(verts: Iterable[int]) -> tuple[Clique, int]:
    """Sort ``verts`` ascending and return the parity of the sorting permutation.

    The sign is 0 when a vertex repeats.
    """
    seq = list(verts)
    sign = 1
    # insertion sort; tuples here have at most a handful of entries
    for i in range(1, len(seq)):
        j = i
        while j > 0 and seq[j - 1] > seq[j]:
            seq[j - 1], seq[j] = seq[j], seq[j - 1]
            sign = -sign
            j -= 1
    for a, b in zip(seq, seq[1:]):
        if a == b:
            return tuple(seq), 0
    return tuple(seq), sign


@dataclass(frozen=True)
class Graph:
    vertices: tuple[int, ...]
    edges: frozenset[tuple[int, int]]

    @classmethod
    def from_edges(cls, vertices: Iterable[int], edges: Iterable[Iterable[int]]) -> "Graph":
        verts = [int(v) for v in vertices]
        if len(set(verts)) != len(verts):
            dup = sorted(v for v in set(verts) if verts.count(v) > 1)
            raise GraphError(f"duplicate vertex ids: {dup}")
        vset = set(verts)
        seen: set[tuple[int, int]] = set()
        for e in edges:
            u, v = (int(x) for x in e)
            if u == v:
                raise GraphError(f"self-loop at vertex {u}: edge [{u}, {v}]")
            if u not in vset or v not in vset:
                raise GraphError(f"edge [{u}, {v}] has an endpoint that is not a listed vertex")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise GraphError(f"duplicate edge [{u}, {v}]")
            seen.add(key)
        return cls(tuple(sorted(verts)), frozenset(seen))

    @cached_property
    def adjacency(self) -> dict[int, frozenset[int]]:
        adj: dict[int, set[int]] = {v: set() for v in self.vertices}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return {v: frozenset(nb) for v, nb in adj.items()}

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency.get(u, ())

    def is_clique(self, verts: Iterable[int]) -> bool:
        vs = list(verts)
        if len(set(vs)) != len(vs) or any(v not in self.adjacency for v in vs):
            return False
        return all(self.has_edge(a, b) for i, a in enumerate(vs) for b in vs[i + 1:])

    def induced(self, keep: Iterable[int]) -> "Graph":
        ks = set(keep)
        return Graph(
            tuple(v for v in self.vertices if v in ks),
            frozenset(e for e in self.edges if e[0] in ks and e[1] in ks),
        )


def enumerate_cliques(g: Graph, k: int) -> list[Clique]:
    """All ``k``-cliques of ``g`` in lexicographic order.

    Each sorted j-clique is extended by the common neighbours that exceed its
    largest vertex, so every clique is produced exactly once.
    """
    if k < 1:
        raise ValueError(f"clique order must be >= 1, got {k}")
    adj = g.adjacency
    level: list[Clique] = [(v,) for v in g.vertices]
    for _ in range(k - 1):
        nxt: list[Clique] = []
        for c in level:
            top = c[-1]
            cand = {u for u in adj[top] if u > top}
            for x in c[:-1]:
                if not cand:
                    break
                cand &= adj[x]
            nxt.extend(c + (u,) for u in sorted(cand))
        level = nxt
        if not level:
            break
    return level


def _edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class WeightSpec:
    """How positive weights are put on the cliques of a graph.

    ``unit`` gives every clique weight 1.  ``normalized`` derives clique
    weights from ``edge_weights``: a vertex gets its weighted degree and a
    clique with two or more vertices the sum of its pairwise edge weights.
    ``explicit`` reads every value from ``clique_weights``.
    """

    mode: str = "unit"
    edge_weights: Mapping[tuple[int, int], float] | None = None
    clique_weights: Mapping[Clique, float] | None = None

    def __post_init__(self):
        if self.mode not in WEIGHT_MODES:
            raise GraphError(f"weight_mode must be one of {WEIGHT_MODES}, got {self.mode!r}")
        for name, table in (("edge", self.edge_weights), ("clique", self.clique_weights)):
            for key, w in (table or {}).items():
                if not w > 0:
                    raise GraphError(f"{name} weight for {list(key)} must be positive, got {w}")

    @classmethod
    def unit_edges(cls, g: Graph) -> "WeightSpec":
        return cls("normalized", edge_weights={e: 1.0 for e in g.edges})

    def edge_weight(self, u: int, v: int) -> float:
        if self.edge_weights is None:
            return 1.0
        try:
            return float(self.edge_weights[_edge_key(u, v)])
        except KeyError:
            raise GraphError(f"no edge weight for edge [{u}, {v}]") from None

    def validate(self, g: Graph) -> None:
        if self.mode == "normalized":
            if self.edge_weights is None:
                raise GraphError("normalized weights need edge weights")
            missing = [e for e in g.edges if e not in self.edge_weights]
            if missing:
                raise GraphError(f"normalized weights are missing edge {list(missing[0])}")

    def restrict(self, g: Graph) -> "WeightSpec":
        """The same weighting read on a subgraph ``g``."""
        ew = None if self.edge_weights is None else {e: self.edge_weights[e] for e in g.edges if e in self.edge_weights}
        cw = None
        if self.clique_weights is not None:
            vs = set(g.vertices)
            cw = {c: w for c, w in self.clique_weights.items() if set(c) <= vs and g.is_clique(c)}
        return WeightSpec(self.mode, ew, cw)


def induced_weight(g: Graph, spec: WeightSpec, k: int) -> dict[Clique, float]:
    """Weights of all ``k``-cliques of ``g`` under ``spec``."""
    cliques = enumerate_cliques(g, k)
    if spec.mode == "unit":
        return {c: 1.0 for c in cliques}
    if spec.mode == "normalized":
        spec.validate(g)
        out = {}
        for c in cliques:
            if k == 1:
                (v,) = c
                w = sum(spec.edge_weight(v, u) for u in g.adjacency[v])
                if w <= 0:
                    raise GraphError(f"normalized weight of isolated vertex {v} is zero")
            else:
                w = sum(spec.edge_weight(a, b) for i, a in enumerate(c) for b in c[i + 1:])
            out[c] = float(w)
        return out
    table = spec.clique_weights or {}
    out = {}
    for c in cliques:
        if c not in table:
            raise GraphError(f"missing explicit weight for clique {list(c)}")
        out[c] = float(table[c])
    return out


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """A graph together with positive weights on all of its cliques.

    Forms of degree ``k`` live on ``basis(k)``, the ascending list of
    ``(k+1)``-cliques; ``weights(k)`` is aligned with it.
    """

    graph: Graph
    spec: WeightSpec = field(default_factory=WeightSpec)

    def __post_init__(self):
        self.spec.validate(self.graph)
        object.__setattr__(self, "_cache", {})

    def basis(self, k: int) -> tuple[Clique, ...]:
        if k < 0:
            return ()
        key = ("basis", k)
        if key not in self._cache:
            self._cache[key] = tuple(enumerate_cliques(self.graph, k + 1))
        return self._cache[key]

    def dim(self, k: int) -> int:
        return len(self.basis(k))

    def index(self, k: int) -> dict[Clique, int]:
        key = ("index", k)
        if key not in self._cache:
            self._cache[key] = {c: i for i, c in enumerate(self.basis(k))}
        return self._cache[key]

    def weights(self, k: int) -> np.ndarray:
        key = ("weights", k)
        if key not in self._cache:
            if k < 0 or not self.basis(k):
                w = np.zeros(0)
            else:
                table = induced_weight(self.graph, self.spec, k + 1)
                w = np.array([table[c] for c in self.basis(k)], dtype=float)
            self._cache[key] = w
        return self._cache[key]

    def weight(self, verts: Iterable[int]) -> float:
        c, sign = sort_with_sign(verts)
        if sign == 0:
            return 0.0
        i = self.index(len(c) - 1).get(c)
        return 0.0 if i is None else float(self.weights(len(c) - 1)[i])

    def coboundary(self, k: int) -> sp.csr_matrix:
        """Signed incidence matrix of d from degree ``k`` to ``k + 1`` (int8)."""
        key = ("cob", k)
        if key not in self._cache:
            rows, cols, vals = [], [], []
            src = self.index(k)
            for r, tau in enumerate(self.basis(k + 1)):
                for j in range(len(tau)):
                    face = tau[:j] + tau[j + 1:]
                    rows.append(r)
                    cols.append(src[face])
                    vals.append(1 if j % 2 == 0 else -1)
            mat = sp.csr_matrix(
                (np.array(vals, dtype=np.int8), (rows, cols)),
                shape=(self.dim(k + 1), self.dim(k)),
            )
            self._cache[key] = mat
        return self._cache[key]

    def clique_number(self) -> int:
        k = 0
        while self.dim(k):
            k += 1
        return k


@dataclass(frozen=True)
class BoundaryStructure:
    """Interior ``Ω``, vertex boundary ``δΩ`` and the boundary cliques.

    ``boundary_cliques_by_order[m]`` lists the m-cliques with exactly one
    boundary vertex, written boundary vertex first and then the interior
    vertices ascending.
    """

    interior: frozenset[int]
    boundary: frozenset[int]
    boundary_cliques_by_order: Mapping[int, tuple[Clique, ...]]

    @property
    def closure(self) -> frozenset[int]:
        return self.interior | self.boundary

    def cliques(self, order: int) -> tuple[Clique, ...]:
        return self.boundary_cliques_by_order.get(order, ())

    def check(self, g: Graph) -> None:
        """Raise unless ``(g, boundary)`` is a graph with boundary."""
        if self.interior & self.boundary:
            raise GraphError("interior and boundary overlap")
        if set(g.vertices) != set(self.closure):
            extra = sorted(set(g.vertices) - self.closure)
            raise GraphError(f"vertices {extra} are neither interior nor boundary")
        for u, v in g.edges:
            if u in self.boundary and v in self.boundary:
                raise GraphError(f"edge [{u}, {v}] joins two boundary vertices")
        for b in self.boundary:
            if not (g.adjacency[b] & self.interior):
                raise GraphError(f"boundary vertex {b} has no interior neighbour")


def boundary_cliques(g: Graph, interior: frozenset[int], boundary: frozenset[int], order: int) -> tuple[Clique, ...]:
    out = []
    for c in enumerate_cliques(g, order):
        bv = [v for v in c if v in boundary]
        if len(bv) == 1 and all(v in interior or v == bv[0] for v in c):
            out.append((bv[0],) + tuple(v for v in c if v != bv[0]))
    return tuple(out)


def boundary_structure(g: Graph, interior: Iterable[int], max_order: int | None = None) -> BoundaryStructure:
    """Vertex boundary of ``interior`` in ``g`` and the boundary cliques by order."""
    omega = frozenset(int(v) for v in interior)
    if not omega:
        raise GraphError("interior is empty")
    unknown = omega - set(g.vertices)
    if unknown:
        raise GraphError(f"interior vertices {sorted(unknown)} are not in the graph")
    adj = g.adjacency
    bnd = frozenset(v for v in g.vertices if v not in omega and adj[v] & omega)
    by_order: dict[int, tuple[Clique, ...]] = {}
    order = 1
    while max_order is None or order <= max_order:
        cl = boundary_cliques(g, omega, bnd, order)
        if not cl:
            break
        by_order[order] = cl
        order += 1
    return BoundaryStructure(omega, bnd, by_order)


def subgraph_tilde(ambient: Graph, interior: Iterable[int]) -> tuple[Graph, BoundaryStructure]:
    """Closure of ``interior`` keeping only edges with an end in the interior."""
    omega = frozenset(int(v) for v in interior)
    if not omega:
        raise GraphError("interior is empty")
    unknown = omega - set(ambient.vertices)
    if unknown:
        raise GraphError(f"interior vertices {sorted(unknown)} are not in the graph")
    adj = ambient.adjacency
    closure = set(omega)
    for v in omega:
        closure |= adj[v]
    edges = frozenset(e for e in ambient.edges if e[0] in omega or e[1] in omega)
    g = Graph(tuple(sorted(closure)), edges)
    bs = boundary_structure(g, omega)
    bs.check(g)
    return g, bs


@dataclass(frozen=True, eq=False)
class GraphWithBoundary:
    """Weighted graph with boundary, with index maps between the clique bases.

    Every (k+1)-clique is either interior (all vertices in ``Ω``) or a
    boundary clique with exactly one boundary vertex.
    """

    wg: WeightedGraph
    bs: BoundaryStructure

    def __post_init__(self):
        self.bs.check(self.wg.graph)
        object.__setattr__(self, "_cache", {})

    @classmethod
    def from_interior(cls, ambient: Graph, interior: Iterable[int], spec: WeightSpec | None = None) -> "GraphWithBoundary":
        g, bs = subgraph_tilde(ambient, interior)
        spec = WeightSpec() if spec is None else spec.restrict(g)
        return cls(WeightedGraph(g, spec), bs)

    @property
    def graph(self) -> Graph:
        return self.wg.graph

    def interior_indices(self, k: int) -> np.ndarray:
        key = ("int", k)
        if key not in self._cache:
            om = self.bs.interior
            self._cache[key] = np.array(
                [i for i, c in enumerate(self.wg.basis(k)) if all(v in om for v in c)], dtype=int
            )
        return self._cache[key]

    def boundary_basis(self, k: int) -> tuple[Clique, ...]:
        """Boundary k-form basis: (k+1)-cliques, boundary vertex first."""
        if k < 0:
            return ()
        key = ("bb", k)
        if key not in self._cache:
            self._cache[key] = boundary_cliques(self.wg.graph, self.bs.interior, self.bs.boundary, k + 1)
        return self._cache[key]

    def boundary_map(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Canonical index and orientation sign of every boundary basis clique."""
        key = ("bmap", k)
        if key not in self._cache:
            idx = self.wg.index(k)
            pos, sgn = [], []
            for b in self.boundary_basis(k):
                c, s = sort_with_sign(b)
                pos.append(idx[c])
                sgn.append(s)
            self._cache[key] = (np.array(pos, dtype=int), np.array(sgn, dtype=float))
        return self._cache[key]

    def boundary_weights(self, k: int) -> np.ndarray:
        pos, _ = self.boundary_map(k)
        return self.wg.weights(k)[pos] if len(pos) else np.zeros(0)

    def restriction(self, k: int) -> sp.csr_matrix:
        """Matrix sending a k-form to its boundary k-form."""
        pos, sgn = self.boundary_map(k)
        return sp.csr_matrix((sgn, (np.arange(len(pos)), pos)), shape=(len(pos), self.wg.dim(k)))
