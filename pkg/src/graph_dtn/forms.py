"""Forms, tensors and the exterior calculus on the clique complex of a graph."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import Collection, Iterable, Union

import numpy as np
import scipy.sparse as sp

from .graph import BoundaryStructure, Clique, WeightedGraph, sort_with_sign

REGIONS = ("global", "interior", "boundary")

# cutoff for numerical rank and kernels, relative to the largest singular value/eigenvalue
RANK_RTOL = 1e-9


@lru_cache(maxsize=None)
def signed_permutations(m: int) -> tuple[tuple[tuple[int, ...], int], ...]:
    """All permutations of ``range(m)`` paired with their sign."""
    return tuple((p, sort_with_sign(p)[1]) for p in permutations(range(m)))


def _exact(values: np.ndarray) -> bool:
    return values.dtype == object


@dataclass(eq=False)
class KForm:
    """A skew-symmetric function on ordered (k+1)-cliques.

    ``values[i]`` is the value on the ascending clique ``graph.basis(k)[i]``.
    Object arrays (e.g. of ``Fraction``) are allowed for exact arithmetic.
    """

    graph: WeightedGraph
    degree: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.dtype != object:
            self.values = self.values.astype(float)
        if self.values.shape != (self.graph.dim(self.degree),):
            raise ValueError(
                f"{self.degree}-form needs {self.graph.dim(self.degree)} values, got shape {self.values.shape}"
            )

    @classmethod
    def zeros(cls, graph: WeightedGraph, degree: int) -> "KForm":
        return cls(graph, degree, np.zeros(graph.dim(degree)))

    @classmethod
    def from_function(cls, graph: WeightedGraph, degree: int, fn, exact: bool = False) -> "KForm":
        vals = [fn(c) for c in graph.basis(degree)]
        arr = np.empty(len(vals), dtype=object) if exact else np.zeros(len(vals))
        arr[:] = vals
        return cls(graph, degree, arr)

    @classmethod
    def random(cls, graph: WeightedGraph, degree: int, rng: np.random.Generator) -> "KForm":
        return cls(graph, degree, rng.standard_normal(graph.dim(degree)))

    def __call__(self, *verts: int):
        c, s = sort_with_sign(verts)
        if s == 0 or len(c) != self.degree + 1:
            return 0
        i = self.graph.index(self.degree).get(c)
        return 0 if i is None else s * self.values[i]

    def _check_same(self, other: "KForm") -> None:
        if other.graph is not self.graph:
            raise ValueError("forms live on different graphs")
        if other.degree != self.degree:
            raise ValueError(f"degree mismatch: {self.degree} vs {other.degree}")

    def __add__(self, other: "KForm") -> "KForm":
        self._check_same(other)
        return KForm(self.graph, self.degree, self.values + other.values)

    def __sub__(self, other: "KForm") -> "KForm":
        self._check_same(other)
        return KForm(self.graph, self.degree, self.values - other.values)

    def __neg__(self) -> "KForm":
        return KForm(self.graph, self.degree, -self.values)

    def __mul__(self, c) -> "KForm":
        return KForm(self.graph, self.degree, self.values * c)

    __rmul__ = __mul__

    def as_float(self) -> "KForm":
        return KForm(self.graph, self.degree, self.values.astype(float))

    def to_json(self) -> list:
        return [[list(c), float(v)] for c, v in zip(self.graph.basis(self.degree), self.values)]

    @classmethod
    def from_json(cls, graph: WeightedGraph, degree: int, data: Iterable) -> "KForm":
        out = np.zeros(graph.dim(degree))
        idx = graph.index(degree)
        for verts, value in data:
            c, s = sort_with_sign(verts)
            if s == 0 or c not in idx:
                raise ValueError(f"{list(verts)} is not a {degree + 1}-clique")
            out[idx[c]] = s * float(value)
        return cls(graph, degree, out)


@dataclass(eq=False)
class KTensor:
    """A function on ordered (k+1)-tuples that vanishes off cliques."""

    graph: WeightedGraph
    degree: int
    values: dict[tuple[int, ...], object]

    def __post_init__(self):
        g = self.graph.graph
        for t in self.values:
            if len(t) != self.degree + 1 or not g.is_clique(t):
                raise ValueError(f"tensor entry {t} is not an ordered {self.degree + 1}-clique")

    @classmethod
    def from_function(cls, graph: WeightedGraph, degree: int, fn) -> "KTensor":
        vals = {}
        for c in graph.basis(degree):
            for p, _ in signed_permutations(len(c)):
                t = tuple(c[i] for i in p)
                v = fn(t)
                if v != 0:
                    vals[t] = v
        return cls(graph, degree, vals)

    def __call__(self, *verts: int):
        return self.values.get(tuple(verts), 0)


Evaluable = Union[KForm, KTensor]


def _is_exact(t: Evaluable) -> bool:
    if isinstance(t, KForm):
        return _exact(t.values)
    return any(isinstance(v, Fraction) for v in t.values.values())


def skew_symmetrize(t: Evaluable) -> KForm:
    """Average of ``sgn(σ) t(v_σ)`` over all permutations σ."""
    k = t.degree
    fact = math.factorial(k + 1)
    perms = signed_permutations(k + 1)
    exact = _is_exact(t)
    vals = []
    for c in t.graph.basis(k):
        acc = 0
        for p, s in perms:
            acc += s * t(*(c[i] for i in p))
        vals.append(Fraction(acc) / fact if exact else float(acc) / fact)
    arr = np.empty(len(vals), dtype=object) if exact else np.zeros(len(vals))
    arr[:] = vals
    return KForm(t.graph, k, arr)


def tensor_product(f: Evaluable, g: Evaluable) -> KTensor:
    """``(f ⊗ g)(v0..v_{r+s}) = f(v0..vr) g(vr..v_{r+s})`` on ordered cliques."""
    if f.graph is not g.graph:
        raise ValueError("tensor product of tensors on different graphs")
    r, s = f.degree, g.degree
    vals = {}
    for c in f.graph.basis(r + s):
        for p, _ in signed_permutations(len(c)):
            t = tuple(c[i] for i in p)
            v = f(*t[: r + 1]) * g(*t[r:])
            if v != 0:
                vals[t] = v
    return KTensor(f.graph, r + s, vals)


def wedge(alpha: KForm, beta: KForm) -> KForm:
    return skew_symmetrize(tensor_product(alpha, beta))


def _apply_sparse(mat: sp.spmatrix, values: np.ndarray) -> np.ndarray:
    if not _exact(values):
        return np.asarray(mat @ values, dtype=float)
    coo = mat.tocoo()
    out = np.empty(mat.shape[0], dtype=object)
    out[:] = [0] * mat.shape[0]
    for r, c, v in zip(coo.row, coo.col, coo.data):
        out[r] = out[r] + int(v) * values[c]
    return out


def exterior_d(alpha: KForm) -> KForm:
    wg = alpha.graph
    return KForm(wg, alpha.degree + 1, _apply_sparse(wg.coboundary(alpha.degree), alpha.values))


def codifferential(alpha: KForm) -> KForm:
    """Adjoint of d: maps a (k+1)-form to a k-form.

    ``δα(c) = Σ_v α(v, c) w(v, c) / w(c)`` which is ``W_k^{-1} D_k^T W_{k+1} α``
    in the clique basis.
    """
    if alpha.degree < 1:
        raise ValueError("codifferential needs a form of degree >= 1")
    wg = alpha.graph
    k = alpha.degree - 1
    vals = alpha.values.astype(float) * wg.weights(k + 1)
    out = np.asarray(wg.coboundary(k).T @ vals, dtype=float)
    return KForm(wg, k, out / wg.weights(k) if len(out) else out)


def d_matrix(wg: WeightedGraph, k: int) -> sp.csr_matrix:
    return wg.coboundary(k).astype(float)


def delta_matrix(wg: WeightedGraph, k: int) -> sp.csr_matrix:
    """Matrix of δ from degree ``k + 1`` to degree ``k``."""
    wk = wg.weights(k)
    inv = sp.diags(1.0 / wk) if len(wk) else sp.csr_matrix((0, 0))
    return (inv @ wg.coboundary(k).T.astype(float) @ sp.diags(wg.weights(k + 1))).tocsr()


@dataclass(eq=False)
class LinearFormOperator:
    """A linear map between form spaces in the canonical clique bases."""

    graph: WeightedGraph
    domain_degree: int
    codomain_degree: int
    matrix: sp.csr_matrix

    def __post_init__(self):
        shape = (self.graph.dim(self.codomain_degree), self.graph.dim(self.domain_degree))
        if self.matrix.shape != shape:
            raise ValueError(f"operator shape {self.matrix.shape} does not match bases {shape}")

    @property
    def domain(self) -> tuple[Clique, ...]:
        return self.graph.basis(self.domain_degree)

    @property
    def codomain(self) -> tuple[Clique, ...]:
        return self.graph.basis(self.codomain_degree)

    def __call__(self, alpha: KForm) -> KForm:
        if alpha.degree != self.domain_degree:
            raise ValueError(f"operator takes {self.domain_degree}-forms, got a {alpha.degree}-form")
        return KForm(self.graph, self.codomain_degree, self.matrix @ alpha.values.astype(float))

    def dense(self) -> np.ndarray:
        return self.matrix.toarray() if sp.issparse(self.matrix) else np.asarray(self.matrix)

    def to_coo(self) -> list[tuple[Clique, Clique, float]]:
        coo = sp.coo_matrix(self.matrix)
        rows, cols = self.codomain, self.domain
        return [(rows[r], cols[c], float(v)) for r, c, v in zip(coo.row, coo.col, coo.data) if v != 0]


def hodge_laplacian(wg: WeightedGraph, k: int) -> LinearFormOperator:
    """Δ = δd + dδ on k-forms; self-adjoint for the weighted inner product."""
    n = wg.dim(k)
    lap = sp.csr_matrix((n, n))
    if wg.dim(k + 1):
        lap = lap + delta_matrix(wg, k) @ d_matrix(wg, k)
    if k >= 1 and wg.dim(k - 1):
        lap = lap + d_matrix(wg, k - 1) @ delta_matrix(wg, k - 1)
    return LinearFormOperator(wg, k, k, sp.csr_matrix(lap))


def region_mask(wg: WeightedGraph, k: int, region, bs: BoundaryStructure | None = None) -> np.ndarray:
    basis = wg.basis(k)
    if isinstance(region, str):
        if region == "global":
            return np.ones(len(basis), dtype=bool)
        if region not in REGIONS:
            raise ValueError(f"unknown region {region!r}")
        if bs is None:
            raise ValueError(f"region {region!r} needs a boundary structure")
        om, bd = bs.interior, bs.boundary
        if region == "interior":
            return np.array([all(v in om for v in c) for c in basis], dtype=bool)
        return np.array(
            [sum(v in bd for v in c) == 1 and all(v in om or v in bd for v in c) for c in basis], dtype=bool
        )
    chosen = {sort_with_sign(c)[0] for c in region}
    return np.array([c in chosen for c in basis], dtype=bool)


def inner_product(
    alpha: KForm,
    beta: KForm,
    region: str | Collection[Iterable[int]] = "global",
    bs: BoundaryStructure | None = None,
):
    """Weighted inner product of two k-forms over a set of cliques.

    The sums over ordered tuples with their ``1/(k+1)!`` or ``1/k!``
    prefactors reduce to one term per unordered clique.
    """
    if alpha.graph is not beta.graph:
        raise ValueError("forms live on different graphs")
    if alpha.degree != beta.degree:
        raise ValueError(f"degree mismatch: {alpha.degree} vs {beta.degree}")
    k = alpha.degree
    mask = region_mask(alpha.graph, k, region, bs)
    w = alpha.graph.weights(k)
    if _exact(alpha.values) or _exact(beta.values):
        return sum(a * b * float(x) for a, b, x, m in zip(alpha.values, beta.values, w, mask) if m)
    return float(np.sum(alpha.values[mask] * beta.values[mask] * w[mask]))


def _lstsq_range(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] == 0:
        return np.zeros(a.shape[0])
    x, *_ = np.linalg.lstsq(a, b, rcond=None)
    return a @ x


def hodge_decomposition(alpha: KForm) -> tuple[KForm, KForm, KForm]:
    """Split ``alpha`` into exact, harmonic and coexact parts.

    The exact and coexact parts are weighted orthogonal projections onto
    ``im d`` and ``im δ``; the harmonic part is what remains.
    """
    wg, r = alpha.graph, alpha.degree
    a = alpha.values.astype(float)
    sw = np.sqrt(wg.weights(r))
    if r >= 1:
        dm = wg.coboundary(r - 1).toarray().astype(float)
        exact = _lstsq_range(sw[:, None] * dm, sw * a) / sw
    else:
        exact = np.zeros_like(a)
    if wg.dim(r + 1):
        dt = wg.coboundary(r).T.toarray().astype(float)
        coexact = _lstsq_range(dt / sw[:, None], sw * a) / sw
    else:
        coexact = np.zeros_like(a)
    harmonic = a - exact - coexact
    return KForm(wg, r, exact), KForm(wg, r, harmonic), KForm(wg, r, coexact)


def harmonic_dimension(wg: WeightedGraph, r: int) -> int:
    n = wg.dim(r)
    if n == 0:
        return 0
    sw = np.sqrt(wg.weights(r))
    lap = hodge_laplacian(wg, r).dense()
    sym = sw[:, None] * lap / sw[None, :]
    ev = np.linalg.eigvalsh((sym + sym.T) / 2)
    top = float(np.max(np.abs(ev)))
    return int(np.sum(np.abs(ev) <= RANK_RTOL * top)) if top > 0 else n


def betti_numbers(wg: WeightedGraph, max_r: int) -> list[int]:
    """``b_r = dim ker Δ_r`` for ``r = 0..max_r``."""
    return [harmonic_dimension(wg, r) for r in range(max_r + 1)]
