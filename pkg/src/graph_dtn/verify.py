"""Theorem verdicts on lattice domains and randomized property suites."""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .dtn import BoundaryKForm, dtn_operator, trace_D, trace_N
from .forms import KForm, codifferential, exterior_d, inner_product, wedge
from .graph import Graph, GraphWithBoundary, WeightedGraph, WeightSpec, enumerate_cliques
from .lattice import (
    LatticeDomain,
    LatticeSpec,
    appendix_counting_check,
    bound_gen,
    bound_rs0,
    bound_zero,
    build_lattice,
    coordinate_form,
    direction_counts,
    index_sets,
    phi_form,
    random_connected_omega,
    tessellation_chains,
)
from .spectral import report_from_eigenvalues

THEOREMS = ("rs0", "zero", "gen")
SLACK_TOL = 1e-9


@dataclass
class Verdict:
    theorem: str
    operator: str
    k: int
    lhs: float
    refined: float
    coarse: float
    satisfied: bool
    slack: float
    counts: dict = field(default_factory=dict)
    flagged: bool = False
    eigen_count: int = 0

    def to_json(self) -> dict:
        return asdict(self) | {"spectrum_sum": self.lhs}


def _verdict(theorem, operator, k, report, m, bounds, tol) -> Verdict:
    positive = report.positive
    flagged = len(positive) < m
    lhs = float(np.sum(positive[:m]))
    slack = min(bounds.refined - lhs, bounds.coarse - bounds.refined)
    return Verdict(theorem, operator, k, lhs, bounds.refined, bounds.coarse, slack >= -tol, slack, bounds.counts, flagged, int(min(m, len(positive))))


def verify_theorem(dom: LatticeDomain, theorem: str, k: int | None = None, tol: float = SLACK_TOL) -> list[Verdict]:
    """Evaluate lhs ≤ refined ≤ coarse for one theorem.

    Raises ``Inapplicable`` when a hypothesis fails.  For ``gen`` both the
    δd and the full operator are checked; ``k=None`` runs every degree.
    """
    n = dom.n
    gb = dom.gb
    if theorem == "rs0":
        b = bound_rs0(dom)
        op = dtn_operator(gb, "full", 0, check=False)
        return [_verdict("rs0", "full", 0, op.spectrum(), n, b, tol)]
    if theorem == "zero":
        b = bound_zero(dom)
        op = dtn_operator(gb, "full", 0, check=False)
        return [_verdict("zero", "full", 0, op.spectrum(), n, b, tol)]
    if theorem != "gen":
        raise ValueError(f"theorem must be one of {THEOREMS}")
    degrees = range(n) if k is None else [k]
    counts = direction_counts(dom, n + 1)
    out = []
    for kk in degrees:
        b = bound_gen(dom, kk, counts)
        m = math.comb(n, kk + 1)
        for kind in ("delta_d", "full"):
            op = dtn_operator(gb, kind, kk, check=False)
            rep = op.spectrum() if op.dim else report_from_eigenvalues(np.zeros(0))
            out.append(_verdict("gen", kind, kk, rep, m, b, tol))
    return out


# ---------------------------------------------------------------- selftest


@dataclass
class SuiteResult:
    name: str
    max_residual: float
    tolerance: float
    failure: str | None = None

    @property
    def passed(self) -> bool:
        return self.failure is None and self.max_residual <= self.tolerance


def random_graph(rng: np.random.Generator, n_max: int = 12, p_range=(0.3, 0.7)) -> Graph:
    n = int(rng.integers(3, n_max + 1))
    p = float(rng.uniform(*p_range))
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return Graph.from_edges(range(n), edges)


def random_weight_spec(g: Graph, rng: np.random.Generator) -> WeightSpec:
    mode = ("unit", "normalized", "explicit")[int(rng.integers(3))]
    if mode == "normalized" and any(not g.adjacency[v] for v in g.vertices):
        mode = "explicit"  # an isolated vertex has zero weighted degree
    if mode == "unit":
        return WeightSpec()
    if mode == "normalized":
        return WeightSpec("normalized", {e: float(rng.uniform(0.2, 3.0)) for e in g.edges})
    cw = {}
    k = 1
    while True:
        cl = enumerate_cliques(g, k)
        if not cl:
            break
        cw.update({c: float(rng.uniform(0.2, 3.0)) for c in cl})
        k += 1
    return WeightSpec("explicit", None, cw)


def random_boundary_graph(rng: np.random.Generator, n_max: int = 12) -> GraphWithBoundary:
    """Ω̃ of a random graph around a random interior; weights random too."""
    while True:
        g = random_graph(rng, n_max)
        verts = list(g.vertices)
        m = int(rng.integers(1, max(2, len(verts) - 1)))
        interior = sorted(rng.choice(verts, size=m, replace=False).tolist())
        try:
            probe = GraphWithBoundary.from_interior(g, interior)
        except ValueError:
            continue
        if not probe.bs.boundary:
            continue
        spec = random_weight_spec(probe.graph, rng)
        return GraphWithBoundary(WeightedGraph(probe.graph, spec), probe.bs)


def _closed_form(wg: WeightedGraph, degree: int, rng: np.random.Generator) -> KForm:
    if degree == 0:
        return KForm(wg, 0, np.full(wg.dim(0), float(rng.standard_normal())))
    return exterior_d(KForm.random(wg, degree - 1, rng))


def suite_d_squared(seed: int, cases: int, mutate: bool = False) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for case in range(cases):
        wg = WeightedGraph(random_graph(rng), WeightSpec())
        for k in range(wg.clique_number() - 2):
            d0 = wg.coboundary(k).astype(np.int64)
            d1 = wg.coboundary(k + 1).astype(np.int64)
            if mutate and d1.nnz:
                d1 = d1.tolil()
                r, c = d1.nonzero()
                d1[r[0], c[0]] = -d1[r[0], c[0]]
                d1 = d1.tocsr()
            prod = d1 @ d0
            r = float(abs(prod).max()) if prod.nnz else 0.0
            if r > 0:
                return SuiteResult("d_squared", r, 0.0, f"d∘d ≠ 0 at degree {k}, case {case}, seed {seed}")
            worst = max(worst, r)
    return SuiteResult("d_squared", worst, 0.0)


def _max_abs(a: KForm) -> float:
    v = a.values.astype(float)
    return float(np.max(np.abs(v))) if v.size else 0.0


def suite_wedge_algebra(seed: int, cases: int, tol: float = 1e-12) -> list[SuiteResult]:
    rng = np.random.default_rng(seed)
    worst = {"anticommutativity": 0.0, "leibniz": 0.0, "associativity": 0.0}
    for _ in range(cases):
        g = random_graph(rng)
        wg = WeightedGraph(g, random_weight_spec(g, rng))
        top = wg.clique_number() - 1
        for r, s in itertools.product(range(3), repeat=2):
            if r + s > top:
                continue
            a = KForm.random(wg, r, rng)
            b = KForm.random(wg, s, rng)
            res = wedge(a, b) - wedge(b, a) * ((-1) ** (r * s))
            worst["anticommutativity"] = max(worst["anticommutativity"], _max_abs(res))
            if r + s + 1 <= top:
                lhs = exterior_d(wedge(a, b))
                rhs = wedge(exterior_d(a), b) + wedge(a, exterior_d(b)) * ((-1) ** r)
                worst["leibniz"] = max(worst["leibniz"], _max_abs(lhs - rhs))
        for p, q, r in itertools.product(range(3), repeat=3):
            if p + q + r > top:
                continue
            a, b, c = (_closed_form(wg, deg, rng) for deg in (p, q, r))
            res = wedge(wedge(a, b), c) - wedge(a, wedge(b, c))
            worst["associativity"] = max(worst["associativity"], _max_abs(res))
    return [SuiteResult(name, val, tol) for name, val in worst.items()]


def green_residuals(gb: GraphWithBoundary, rng: np.random.Generator) -> tuple[float, float]:
    """Relative residuals of both Green formulas over every degree present."""
    wg = gb.wg
    worst_n = worst_d = 0.0
    top = wg.clique_number()
    for k in range(top - 1):
        a = KForm.random(wg, k + 1, rng)
        b = KForm.random(wg, k, rng)
        phi = BoundaryKForm.restrict(gb, b)
        t1 = inner_product(codifferential(a), b, "interior", gb.bs)
        t2 = inner_product(a, exterior_d(b))
        t3 = trace_N(a, gb).inner(phi)
        scale = max(abs(t1), abs(t2), abs(t3), 1.0)
        worst_n = max(worst_n, abs(t1 - t2 + t3) / scale)
    for k in range(1, top):
        a = KForm.random(wg, k - 1, rng)
        b = KForm.random(wg, k, rng)
        phi = BoundaryKForm.restrict(gb, b)
        t1 = inner_product(exterior_d(a), b, "interior", gb.bs)
        t2 = inner_product(a, codifferential(b), "interior", gb.bs)
        t3 = trace_D(a, gb).inner(phi)
        scale = max(abs(t1), abs(t2), abs(t3), 1.0)
        worst_d = max(worst_d, abs(t1 - t2 + t3) / scale)
    return worst_n, worst_d


def suite_green(seed: int, cases: int, tol: float = 1e-10) -> list[SuiteResult]:
    rng = np.random.default_rng(seed)
    wn = wd = 0.0
    for _ in range(cases):
        gb = random_boundary_graph(rng)
        a, b = green_residuals(gb, rng)
        wn, wd = max(wn, a), max(wd, b)
    return [SuiteResult("green_N", wn, tol), SuiteResult("green_D", wd, tol)]


def _random_tessellation_domain(n: int, rng: np.random.Generator, max_size: int = 5) -> LatticeDomain:
    size = int(rng.integers(1, max_size + 1))
    return build_lattice(LatticeSpec.of(n, "tessellation", random_connected_omega(n, size, rng)))


def phi_factor_residual(dom: LatticeDomain, rng: np.random.Generator, r: int, s: int) -> Fraction:
    """Largest |Φα∧Φβ − r!s!/(r+s)! Φ(α∧β)| over random integer parallel forms, exact."""
    n = dom.n
    alpha = {I: int(rng.integers(-3, 4)) for I in index_sets(n, r)}
    beta = {J: int(rng.integers(-3, 4)) for J in index_sets(n, s)}

    def combo(table, deg):
        out = None
        for idx, c in table.items():
            f = phi_form(dom, idx, c)
            out = f if out is None else out + f
        return out

    lhs = wedge(combo(alpha, r), combo(beta, s))
    # α∧β as a constant form: Σ a_I b_J dx_I∧dx_J, reordered to ascending index sets.
    prod: dict[tuple[int, ...], int] = {}
    for (I, a), (J, b) in itertools.product(alpha.items(), beta.items()):
        if set(I) & set(J):
            continue
        merged = I + J
        sign = 1
        arr = list(merged)
        for i in range(len(arr)):
            for j in range(len(arr) - 1 - i):
                if arr[j] > arr[j + 1]:
                    arr[j], arr[j + 1] = arr[j + 1], arr[j]
                    sign = -sign
        key = tuple(arr)
        prod[key] = prod.get(key, 0) + sign * a * b
    factor = Fraction(math.factorial(r) * math.factorial(s), math.factorial(r + s))
    rhs = KForm(dom.gb.wg, r + s, np.array([Fraction(0)] * dom.gb.wg.dim(r + s), dtype=object))
    for key, c in prod.items():
        if c:
            rhs = rhs + phi_form(dom, key, c)
    diff = lhs - rhs * factor
    return max((abs(Fraction(v)) for v in diff.values), default=Fraction(0))


def suite_phi_factor(seed: int, cases: int, max_rs: int = 2) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst = Fraction(0)
    for _ in range(cases):
        n = int(rng.integers(2, 5))
        dom = _random_tessellation_domain(n, rng, 1 if n == 4 else 5)
        for r, s in itertools.product(range(1, max_rs + 1), repeat=2):
            if r + s > n:
                continue
            worst = max(worst, phi_factor_residual(dom, rng, r, s))
    return SuiteResult("phi_factor", float(worst), 0.0, None if worst == 0 else f"Φ factor off by {worst}, seed {seed}")


def counting_results(n_max: int = 4):
    """Appendix counts for every chain base clique at the origin, n ≤ n_max, all k."""
    for n in range(2, n_max + 1):
        for k in range(1, n):
            for base in tessellation_chains(n, k + 1):
                for idx in index_sets(n, k + 1):
                    yield n, k, base, idx, appendix_counting_check(n, idx, base)


def suite_counting(n_max: int = 4) -> SuiteResult:
    for n, k, base, idx, res in counting_results(n_max):
        if not res.ok:
            return SuiteResult("appendix_counts", 1.0, 0.0, f"n={n} k={k} base={base} I={idx}: {res}")
    return SuiteResult("appendix_counts", 0.0, 0.0)


def run_selftest(seed: int = 0, cases: int = 20, mutate_d: bool = False) -> list[SuiteResult]:
    results = [suite_d_squared(seed, cases, mutate_d)]
    results += suite_wedge_algebra(seed + 1, cases)
    results += suite_green(seed + 2, cases)
    results.append(suite_phi_factor(seed + 3, max(2, cases // 4)))
    results.append(suite_counting(3))
    return results


def coordinate_coclosure_residual(dom: LatticeDomain) -> float:
    """max |δ(Φdx_i)| over interior vertices and all i."""
    mask = np.array([c[0] in dom.gb.bs.interior for c in dom.gb.wg.basis(0)])
    worst = 0.0
    for i in range(dom.n):
        cod = codifferential(coordinate_form(dom, i)).values.astype(float)
        worst = max(worst, float(np.max(np.abs(cod[mask]), initial=0.0)))
    return worst

