"""Subgraphs of Z^n (lattice and standard tessellation), coordinate forms and bound evaluators."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .forms import KForm, wedge
from .graph import Clique, Graph, GraphWithBoundary, WeightSpec

ADJACENCIES = ("lattice", "tessellation")
Point = tuple[int, ...]
IndexSet = tuple[int, ...]  # 0-based coordinate directions, ascending


class Inapplicable(ValueError):
    """A theorem hypothesis fails; the message names the empty class."""


def neighbour_offsets(n: int, adjacency: str) -> list[Point]:
    if adjacency == "lattice":
        out = []
        for i in range(n):
            for s in (1, -1):
                out.append(tuple(s if j == i else 0 for j in range(n)))
        return out
    if adjacency == "tessellation":
        pos = [p for p in itertools.product((0, 1), repeat=n) if any(p)]
        return pos + [tuple(-x for x in p) for p in pos]
    raise ValueError(f"adjacency must be one of {ADJACENCIES}, got {adjacency!r}")


def adjacent(x: Point, y: Point, adjacency: str) -> bool:
    diff = [b - a for a, b in zip(x, y)]
    if adjacency == "lattice":
        return sum(abs(t) for t in diff) == 1
    if not any(diff):
        return False
    return all(t in (0, 1) for t in diff) or all(t in (0, -1) for t in diff)


@dataclass(frozen=True)
class LatticeSpec:
    n: int
    adjacency: str
    omega: frozenset[Point]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension n must be at least 1")
        if self.adjacency not in ADJACENCIES:
            raise ValueError(f"adjacency must be one of {ADJACENCIES}, got {self.adjacency!r}")
        omega = frozenset(tuple(int(c) for c in p) for p in self.omega)
        if not omega:
            raise ValueError("omega must be nonempty")
        bad = [p for p in omega if len(p) != self.n]
        if bad:
            raise ValueError(f"point {bad[0]} does not have {self.n} coordinates")
        object.__setattr__(self, "omega", omega)

    @classmethod
    def of(cls, n: int, adjacency: str, omega) -> "LatticeSpec":
        return cls(n, adjacency, frozenset(tuple(p) for p in omega))

    def translate(self, shift: Point) -> "LatticeSpec":
        return LatticeSpec(self.n, self.adjacency, frozenset(tuple(a + b for a, b in zip(p, shift)) for p in self.omega))


@dataclass(eq=False)
class LatticeDomain:
    """Ω̃ embedded in Z^n with a vertex-id registry (ids follow lex order of coordinates)."""

    spec: LatticeSpec
    gb: GraphWithBoundary
    coords: tuple[Point, ...]
    ids: dict[Point, int] = field(repr=False)

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def graph(self) -> Graph:
        return self.gb.graph

    @cached_property
    def coord_array(self) -> np.ndarray:
        return np.array(self.coords, dtype=np.int64).reshape(len(self.coords), self.n)

    def boundary_points(self) -> list[Point]:
        return [self.coords[v] for v in sorted(self.gb.bs.boundary)]


def build_lattice(spec: LatticeSpec) -> LatticeDomain:
    """Ω̃ for Ω in Z^n; lattice gets normalized weights from unit edges, tessellation unit weights."""
    offsets = neighbour_offsets(spec.n, spec.adjacency)
    closure = set(spec.omega)
    for p in spec.omega:
        for o in offsets:
            closure.add(tuple(a + b for a, b in zip(p, o)))
    coords = tuple(sorted(closure))
    ids = {p: i for i, p in enumerate(coords)}
    edges = set()
    for p in spec.omega:
        for o in offsets:
            q = tuple(a + b for a, b in zip(p, o))
            u, v = ids[p], ids[q]
            edges.add((min(u, v), max(u, v)))
    g = Graph.from_edges(range(len(coords)), sorted(edges))
    interior = [ids[p] for p in spec.omega]
    if spec.adjacency == "lattice":
        wspec = WeightSpec("normalized", WeightSpec.unit_edges(g).edge_weights)
    else:
        wspec = WeightSpec("unit")
    gb = GraphWithBoundary.from_interior(g, interior, wspec)
    return LatticeDomain(spec, gb, coords, ids)


def _diff(a: Point, b: Point) -> Point:
    return tuple(y - x for x, y in zip(a, b))


def chain_order(dom: LatticeDomain, clique: Clique) -> list[Point]:
    """Vertices of a clique sorted by the coordinatewise order.

    Raises if the clique is not a chain.
    """
    pts = sorted((dom.coords[v] for v in clique), key=sum)
    for a, b in zip(pts, pts[1:]):
        if any(t < 0 for t in _diff(a, b)):
            raise ValueError(f"clique {clique} is not totally ordered in Z^{dom.n}")
    return pts


def edge_class(dom: LatticeDomain, u: int, v: int) -> IndexSet:
    """Directions I with u - v = ±e_I."""
    d = _diff(dom.coords[u], dom.coords[v])
    if all(t >= 0 for t in d) or all(t <= 0 for t in d):
        return tuple(i for i, t in enumerate(d) if t != 0)
    raise ValueError(f"edge ({u}, {v}) is not parallel to any e_I")


def clique_class(dom: LatticeDomain, clique: Clique) -> IndexSet | None:
    """Index set I when the chain steps are single unit vectors e_{j_1}, .., e_{j_m}; else None."""
    pts = chain_order(dom, clique)
    dirs = []
    for a, b in zip(pts, pts[1:]):
        step = [i for i, t in enumerate(_diff(a, b)) if t != 0]
        if len(step) != 1:
            return None
        dirs.append(step[0])
    return tuple(sorted(dirs))


@dataclass
class DirectionCounts:
    n: int
    edges_tilde: dict[IndexSet, int]  # |E_I(Ω̃)|
    edges_boundary: dict[IndexSet, int]  # |E_I(∂Ω)|
    deg: dict[int, int]  # boundary vertex -> deg v in Ω̃
    deg_axis: dict[int, tuple[int, ...]]  # boundary vertex -> (deg_1 v, .., deg_n v)
    cliques_tilde: dict[int, dict[IndexSet, int]]  # order m -> |C_I(Ω̃)|, |I| = m - 1
    cliques_boundary: dict[int, int]  # order m -> |C_m(∂Ω)|
    n_boundary_vertices: int

    def e_axis(self, i: int) -> int:
        return self.edges_tilde.get((i,), 0)

    def to_json(self) -> dict:
        def keyed(d):
            return {",".join(str(i + 1) for i in k): v for k, v in sorted(d.items())}

        return {
            "E_tilde": keyed(self.edges_tilde),
            "E_boundary": keyed(self.edges_boundary),
            "C_tilde": {str(m): keyed(d) for m, d in sorted(self.cliques_tilde.items())},
            "C_boundary": {str(m): c for m, c in sorted(self.cliques_boundary.items())},
            "boundary_vertices": self.n_boundary_vertices,
        }


def direction_counts(dom: LatticeDomain, max_order: int | None = None) -> DirectionCounts:
    wg = dom.gb.wg
    bset = dom.gb.bs.boundary
    n = dom.n
    top = n + 1 if max_order is None else max_order
    e_tilde: Counter = Counter()
    e_bdry: Counter = Counter()
    deg: Counter = Counter()
    deg_axis = {v: [0] * n for v in bset}
    for u, v in wg.basis(1):
        cls = edge_class(dom, u, v)
        e_tilde[cls] += 1
        b = u if u in bset else v if v in bset else None
        if b is not None:
            e_bdry[cls] += 1
            deg[b] += 1
            if len(cls) == 1:
                deg_axis[b][cls[0]] += 1
    c_tilde: dict[int, dict[IndexSet, int]] = {}
    c_bdry: dict[int, int] = {}
    for m in range(2, top + 1):
        counter: Counter = Counter()
        for c in wg.basis(m - 1):
            cls = clique_class(dom, c)
            if cls is not None:
                counter[cls] += 1
        c_tilde[m] = dict(counter)
        c_bdry[m] = len(dom.gb.boundary_basis(m - 1))
    return DirectionCounts(
        n,
        dict(e_tilde),
        dict(e_bdry),
        dict(deg),
        {v: tuple(x) for v, x in deg_axis.items()},
        c_tilde,
        c_bdry,
        len(bset),
    )


@dataclass
class BoundValues:
    theorem: str
    refined: float
    coarse: float
    counts: dict
    k: int = 0


def _axis_denominators(counts: DirectionCounts) -> list[int]:
    dens = [counts.e_axis(i) for i in range(counts.n)]
    for i, e in enumerate(dens):
        if e == 0:
            raise Inapplicable(f"E_{i + 1}(tilde) is empty")
    return dens


def bound_rs0(dom: LatticeDomain, counts: DirectionCounts | None = None) -> BoundValues:
    """Sum of the first n positive DtN eigenvalues on the Z^n lattice."""
    if dom.spec.adjacency != "lattice":
        raise ValueError("this bound needs lattice adjacency")
    counts = direction_counts(dom, 2) if counts is None else counts
    dens = _axis_denominators(counts)
    refined = 0.0
    for v in sorted(dom.gb.bs.boundary):
        refined += sum(dv / e for dv, e in zip(counts.deg_axis[v], dens)) / counts.deg[v]
    coarse = counts.n_boundary_vertices / min(dens)
    return BoundValues("rs0", refined, coarse, counts.to_json())


def bound_zero(dom: LatticeDomain, counts: DirectionCounts | None = None) -> BoundValues:
    """Sum of the first n positive DtN eigenvalues on the standard tessellation."""
    if dom.spec.adjacency != "tessellation":
        raise ValueError("this bound needs tessellation adjacency")
    counts = direction_counts(dom, 2) if counts is None else counts
    n = counts.n
    dens = _axis_denominators(counts)
    refined = 0.0
    for i in range(n):
        s = sum(c for cls, c in counts.edges_boundary.items() if i in cls)
        refined += s / dens[i]
    refined *= 2 ** (n - 1)
    n_bdry_edges = sum(counts.edges_boundary.values())
    coarse = n * 2 ** (n - 1) * n_bdry_edges / min(dens)
    return BoundValues("zero", refined, coarse, counts.to_json())


def index_sets(n: int, size: int) -> list[IndexSet]:
    return list(itertools.combinations(range(n), size))


def bound_gen(dom: LatticeDomain, k: int, counts: DirectionCounts | None = None) -> BoundValues:
    """Sum of the first C(n, k+1) positive eigenvalues of the degree-k DtN maps."""
    if dom.spec.adjacency != "tessellation":
        raise ValueError("this bound needs tessellation adjacency")
    n = dom.n
    if not 0 <= k <= n - 1:
        raise ValueError(f"degree k must satisfy 0 <= k <= n-1 = {n - 1}, got {k}")
    counts = direction_counts(dom, k + 2) if counts is None else counts
    classes = counts.cliques_tilde.get(k + 2, {})
    dens = []
    for idx in index_sets(n, k + 1):
        c = classes.get(idx, 0)
        if c == 0:
            raise Inapplicable("C_" + "".join(str(i + 1) for i in idx) + "(tilde) is empty")
        dens.append(c)
    cb = counts.cliques_boundary[k + 2]
    factor = 2 ** (n - k - 1)
    refined = (k + 1) * factor * sum(cb / c for c in dens)
    coarse = n * math.comb(n - 1, k) * factor * cb / min(dens)
    return BoundValues("gen", refined, coarse, counts.to_json(), k)


def coordinate_function(dom: LatticeDomain, i: int) -> KForm:
    return KForm(dom.gb.wg, 0, dom.coord_array[:, i].astype(float))


def coordinate_form(dom: LatticeDomain, i: int) -> KForm:
    """Φ(dx_i): value v_i - u_i on the canonical edge (u, v)."""
    wg = dom.gb.wg
    x = dom.coord_array[:, i]
    vals = np.array([x[v] - x[u] for u, v in wg.basis(1)], dtype=float)
    return KForm(wg, 1, vals)


def _det_int(rows: list[list[int]]) -> int:
    """Exact integer determinant by cofactor expansion (small sizes only)."""
    m = len(rows)
    if m == 0:
        return 1
    if m == 1:
        return rows[0][0]
    total = 0
    for j, a in enumerate(rows[0]):
        if a:
            minor = [r[:j] + r[j + 1 :] for r in rows[1:]]
            total += (-1) ** j * a * _det_int(minor)
    return total


def euclidean_value(idx: IndexSet, vectors: list[Point]) -> int:
    """``(dx_{i_1} ∧ .. ∧ dx_{i_m})(v_1, .., v_m)`` with the determinant convention."""
    return _det_int([[vec[i] for i in idx] for vec in vectors])


def phi_value(idx: IndexSet, pts: list[Point], exact: bool = True):
    """Φ of the constant form dx_I on an ordered clique ``pts``."""
    base = pts[0]
    det = euclidean_value(idx, [_diff(base, p) for p in pts[1:]])
    return Fraction(det) if exact else float(det)


def coordinate_wedge_form(dom: LatticeDomain, idx: IndexSet, exact: bool = False) -> KForm:
    """Graph wedge ``Φdx_{i_1} ∧ .. ∧ Φdx_{i_m}`` evaluated as det / m!."""
    m = len(idx)
    wg = dom.gb.wg
    fact = math.factorial(m)
    vals = []
    for c in wg.basis(m):
        det = euclidean_value(idx, [_diff(dom.coords[c[0]], dom.coords[v]) for v in c[1:]])
        vals.append(Fraction(det, fact) if exact else det / fact)
    arr = np.array(vals, dtype=object) if exact else np.array(vals, dtype=float)
    return KForm(wg, m, arr)


def phi_form(dom: LatticeDomain, idx: IndexSet, coeff=1, exact: bool = True) -> KForm:
    """Φ(coeff · dx_I) as a graph form of degree |I|."""
    wg = dom.gb.wg
    m = len(idx)
    vals = []
    for c in wg.basis(m):
        v = phi_value(idx, [dom.coords[u] for u in c], exact)
        vals.append(coeff * v)
    arr = np.array(vals, dtype=object) if exact else np.array(vals, dtype=float)
    return KForm(wg, m, arr)


def iterated_wedge(dom: LatticeDomain, idx: IndexSet, exact: bool = False) -> KForm:
    """The same form built with the generic graph wedge; used as a cross-check."""
    forms = []
    for i in idx:
        f = coordinate_form(dom, i)
        if exact:
            f = KForm(f.graph, 1, np.array([Fraction(int(x)) for x in f.values], dtype=object))
        forms.append(f)
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def primitive_form(dom: LatticeDomain, idx: IndexSet) -> KForm:
    """η with ``dη = Φdx_{i_1} ∧ .. ∧ Φdx_{i_m}``: ``x_{i_1} ∧ (Φdx_{i_2} ∧ .. )``.

    A 0-form wedged with a closed form takes the vertex mean of the 0-form.
    """
    x = dom.coord_array[:, idx[0]].astype(float)
    if len(idx) == 1:
        return KForm(dom.gb.wg, 0, x)
    rest = coordinate_wedge_form(dom, idx[1:])
    basis = dom.gb.wg.basis(len(idx) - 1)
    mean = np.array([x[list(c)].mean() for c in basis])
    return KForm(dom.gb.wg, len(idx) - 1, mean * rest.values)


def verify_values_quantized(form: KForm) -> bool:
    """All values in {0, ±1/(k+1)!} exactly, where k+1 is the form degree."""
    q = Fraction(1, math.factorial(form.degree))
    allowed = {Fraction(0), q, -q}
    for v in form.values:
        fv = v if isinstance(v, Fraction) else Fraction(float(v))
        if fv not in allowed:
            return False
    return True


@dataclass
class CountingCheck:
    count_plus: int
    count_minus: int
    bound: int

    @property
    def ok(self) -> bool:
        return self.count_plus == self.count_minus <= self.bound


def appendix_counting_check(n: int, idx: IndexSet, base: list[Point]) -> CountingCheck:
    """Count extensions u of a tessellation clique by the sign of the wedge on (base, u).

    Candidates u range over the box spanned by the base chain widened by one
    step in each direction, which contains every tessellation neighbour.
    """
    k = len(base) - 1
    if len(idx) != k + 1:
        raise ValueError("index set must have one more element than the base degree")
    for a, b in itertools.combinations(base, 2):
        if not adjacent(a, b, "tessellation"):
            raise ValueError(f"base points {a} and {b} are not adjacent")
    lo = [min(p[i] for p in base) - 1 for i in range(n)]
    hi = [max(p[i] for p in base) + 1 for i in range(n)]
    fact = math.factorial(k + 1)
    plus = minus = 0
    for u in itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi))):
        if u in base or not all(adjacent(u, p, "tessellation") for p in base):
            continue
        det = euclidean_value(idx, [_diff(base[0], p) for p in base[1:]] + [_diff(base[0], u)])
        val = Fraction(det, fact)
        if val == Fraction(1, fact):
            plus += 1
        elif val == -Fraction(1, fact):
            minus += 1
        elif val != 0:
            raise AssertionError(f"wedge value {val} outside {{0, ±1/{fact}}}")
    return CountingCheck(plus, minus, 2 ** (n - k - 1))


def tessellation_chains(n: int, length: int) -> list[list[Point]]:
    """All chains o < e_{I_1} < .. of the given length starting at the origin."""
    o = (0,) * n
    out = []

    def grow(chain, used):
        if len(chain) == length:
            out.append(list(chain))
            return
        free = [i for i in range(n) if i not in used]
        for r in range(1, len(free) + 1):
            for add in itertools.combinations(free, r):
                nxt = tuple(c + (1 if i in add else 0) for i, c in enumerate(chain[-1]))
                grow(chain + [nxt], used | set(add))

    grow([o], set())
    return out


def random_connected_omega(n: int, size: int, rng: np.random.Generator) -> list[Point]:
    """Grow a connected set of lattice points from the origin."""
    offsets = neighbour_offsets(n, "lattice")
    pts = {(0,) * n}
    frontier = [(0,) * n]
    while len(pts) < size:
        p = frontier[int(rng.integers(len(frontier)))]
        o = offsets[int(rng.integers(len(offsets)))]
        q = tuple(a + b for a, b in zip(p, o))
        if q not in pts:
            pts.add(q)
            frontier.append(q)
    return sorted(pts)
