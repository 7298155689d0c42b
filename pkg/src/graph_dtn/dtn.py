"""Boundary traces, the three boundary value problems and their DtN maps."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .forms import RANK_RTOL, KForm, d_matrix, delta_matrix, inner_product, region_mask
from .graph import Clique, GraphWithBoundary, sort_with_sign

KINDS = ("delta_d", "d_delta", "full")
ZERO_FLOOR = 1e-12


class DegreeOutOfRange(ValueError):
    """Requested degree has no trace or an empty boundary basis."""


def check_kind(kind: str) -> str:
    kind = kind.replace("-", "_")
    if kind not in KINDS:
        raise ValueError(f"operator kind must be one of {KINDS}, got {kind!r}")
    return kind


@dataclass(eq=False)
class BoundaryKForm:
    """A boundary k-form: one value per boundary (k+1)-clique.

    The basis clique ``(v, u1, .., uk)`` has its boundary vertex first and
    ascending interior vertices; evaluation is skew only in the trailing
    interior arguments.
    """

    gb: GraphWithBoundary
    degree: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        n = len(self.gb.boundary_basis(self.degree))
        if self.values.shape != (n,):
            raise ValueError(f"boundary {self.degree}-form needs {n} values, got {self.values.shape}")

    @property
    def basis(self) -> tuple[Clique, ...]:
        return self.gb.boundary_basis(self.degree)

    def __call__(self, v: int, *us: int) -> float:
        tail, s = sort_with_sign(us)
        if s == 0:
            return 0.0
        i = self._lookup().get((v,) + tail)
        return 0.0 if i is None else s * float(self.values[i])

    def _lookup(self) -> dict[Clique, int]:
        return {b: i for i, b in enumerate(self.basis)}

    def inner(self, other: "BoundaryKForm") -> float:
        return float(np.sum(self.values * other.values * self.gb.boundary_weights(self.degree)))

    @classmethod
    def restrict(cls, gb: GraphWithBoundary, omega: KForm) -> "BoundaryKForm":
        return cls(gb, omega.degree, gb.restriction(omega.degree) @ omega.values.astype(float))

    def zero_extension(self) -> KForm:
        return KForm(self.gb.wg, self.degree, self.gb.restriction(self.degree).T @ self.values)


def n_trace_matrix(gb: GraphWithBoundary, k: int) -> sp.csr_matrix:
    """Matrix of N from (k+1)-forms on G to boundary k-forms.

    ``Nα(v, v1..vk) = Σ_{u∈Ω} α(u, v, v1..vk) w(u, v, v1..vk) / w(v, v1..vk)``.
    """
    wg = gb.wg
    bbasis = gb.boundary_basis(k)
    bpos = {b: i for i, b in enumerate(bbasis)}
    src = wg.index(k + 1)
    w_hi = wg.weights(k + 1)
    rows, cols, vals = [], [], []
    interior = gb.bs.interior
    for b in bbasis:
        common = set(wg.graph.adjacency[b[0]]) & interior
        for x in b[1:]:
            common &= wg.graph.adjacency[x]
        wb = wg.weight(b)
        for u in sorted(common):
            c, s = sort_with_sign((u,) + b)
            j = src[c]
            rows.append(bpos[b])
            cols.append(j)
            vals.append(s * w_hi[j] / wb)
    return sp.csr_matrix((vals, (rows, cols)), shape=(len(bbasis), wg.dim(k + 1)))


def d_trace_matrix(gb: GraphWithBoundary, k: int) -> sp.csr_matrix:
    """Matrix of D from (k-1)-forms on G to boundary k-forms: drop the boundary vertex."""
    if k < 1:
        raise DegreeOutOfRange("the D-trace is defined for k >= 1 only")
    wg = gb.wg
    bbasis = gb.boundary_basis(k)
    src = wg.index(k - 1)
    rows = np.arange(len(bbasis))
    cols = np.array([src[b[1:]] for b in bbasis], dtype=int)
    return sp.csr_matrix((np.ones(len(bbasis)), (rows, cols)), shape=(len(bbasis), wg.dim(k - 1)))


def trace_N(alpha: KForm, gb: GraphWithBoundary) -> BoundaryKForm:
    k = alpha.degree - 1
    if k < 0:
        raise DegreeOutOfRange("the N-trace needs a form of degree >= 1")
    return BoundaryKForm(gb, k, n_trace_matrix(gb, k) @ alpha.values.astype(float))


def trace_D(alpha: KForm, gb: GraphWithBoundary) -> BoundaryKForm:
    k = alpha.degree + 1
    return BoundaryKForm(gb, k, d_trace_matrix(gb, k) @ alpha.values.astype(float))


def _interior_delta_projector(gb: GraphWithBoundary, k: int) -> np.ndarray:
    """0/1 mask of the interior cliques among the (k-1)-form basis."""
    return region_mask(gb.wg, k - 1, "interior", gb.bs).astype(float)


def energy_matrix(gb: GraphWithBoundary, kind: str, k: int) -> np.ndarray:
    """Gram matrix Q of the Dirichlet energy on k-forms, ``Q(ω) = ωᵀ Q ω``.

    delta_d: ⟨dω, dω⟩_G;  d_delta: ⟨δω, δω⟩_Ω;  full: the sum.
    """
    kind = check_kind(kind)
    wg = gb.wg
    n = wg.dim(k)
    q = np.zeros((n, n))
    if kind in ("delta_d", "full") and wg.dim(k + 1):
        dm = d_matrix(wg, k).toarray()
        q += dm.T @ (wg.weights(k + 1)[:, None] * dm)
    if kind in ("d_delta", "full") and k >= 1:
        dl = delta_matrix(wg, k - 1).toarray()
        mask = _interior_delta_projector(gb, k)
        q += dl.T @ ((mask * wg.weights(k - 1))[:, None] * dl)
    return (q + q.T) / 2


def energy(gb: GraphWithBoundary, kind: str, omega: KForm) -> float:
    """Dirichlet energy of ``omega`` computed from the inner products directly."""
    from .forms import codifferential, exterior_d

    kind = check_kind(kind)
    e = 0.0
    if kind in ("delta_d", "full"):
        dw = exterior_d(omega)
        e += inner_product(dw, dw)
    if kind in ("d_delta", "full") and omega.degree >= 1:
        sw = codifferential(omega)
        e += inner_product(sw, sw, "interior", gb.bs)
    return e


@dataclass(eq=False)
class _Extension:
    """Min-norm harmonic extension operator for one (kind, k)."""

    interior: np.ndarray
    pos: np.ndarray
    sign: np.ndarray
    solve: np.ndarray  # interior values = solve @ (boundary values)
    kernel: np.ndarray  # columns spanning {x_I : Q_II x_I = 0}
    n: int

    def extend(self, phi: np.ndarray) -> np.ndarray:
        out = np.zeros(self.n) if phi.ndim == 1 else np.zeros((self.n, phi.shape[1]))
        out[self.pos] = self.sign[:, None] * phi if phi.ndim > 1 else self.sign * phi
        out[self.interior] = self.solve @ phi
        return out


def _extension(gb: GraphWithBoundary, kind: str, k: int) -> _Extension:
    q = energy_matrix(gb, kind, k)
    interior = gb.interior_indices(k)
    pos, sign = gb.boundary_map(k)
    q_ii = q[np.ix_(interior, interior)]
    q_ib = q[np.ix_(interior, pos)] * sign[None, :]
    if len(interior):
        ev, vec = np.linalg.eigh(q_ii)
        top = max(float(np.max(np.abs(ev))), 0.0)
        keep = ev > RANK_RTOL * top if top > 0 else np.zeros(len(ev), dtype=bool)
        pinv = (vec[:, keep] / ev[keep]) @ vec[:, keep].T
        kernel = vec[:, ~keep]
    else:
        pinv = np.zeros((0, 0))
        kernel = np.zeros((0, 0))
    return _Extension(interior, pos, sign, -pinv @ q_ib, kernel, gb.wg.dim(k))


def solve_bvp(gb: GraphWithBoundary, kind: str, phi: BoundaryKForm) -> KForm:
    """Minimum-norm minimiser of the energy of ``kind`` with boundary values ``phi``.

    The minimiser solves δdω = 0, dδω = 0 or Δω = 0 on the interior cliques.
    """
    ext = _extension(gb, kind, phi.degree)
    return KForm(gb.wg, phi.degree, ext.extend(phi.values))


def _trace_matrix(gb: GraphWithBoundary, kind: str, k: int) -> np.ndarray:
    """Boundary trace applied to an extension: N∘d, D∘δ or their sum."""
    wg = gb.wg
    nb = len(gb.boundary_basis(k))
    tr = np.zeros((nb, wg.dim(k)))
    if kind in ("delta_d", "full") and wg.dim(k + 1):
        tr += (n_trace_matrix(gb, k) @ d_matrix(wg, k)).toarray()
    if kind in ("d_delta", "full") and k >= 1:
        tr += (d_trace_matrix(gb, k) @ delta_matrix(wg, k - 1)).toarray()
    return tr


@dataclass(eq=False)
class DtNOperator:
    """Matrix of a DtN map in the boundary clique basis.

    Self-adjoint for ``⟨φ, ψ⟩_∂Ω = Σ φ ψ w``, i.e. ``diag(weights) @ matrix``
    is symmetric.
    """

    kind: str
    degree: int
    basis: tuple[Clique, ...]
    weights: np.ndarray
    matrix: np.ndarray
    well_defined_residual: float = 0.0
    extension: np.ndarray | None = field(default=None, repr=False)
    # Size of the entries before cancellation; spectra below ZERO_FLOOR * scale are all kernel.
    scale: float = 1.0

    @property
    def dim(self) -> int:
        return len(self.basis)

    def asymmetry(self) -> float:
        sw = np.sqrt(self.weights)
        s = sw[:, None] * self.matrix / sw[None, :]
        return float(np.max(np.abs(s - s.T))) if self.dim else 0.0

    def spectrum(self, rtol: float = RANK_RTOL):
        from .spectral import weighted_eigs

        return weighted_eigs(self.matrix, self.weights, rtol=rtol, scale=self.scale)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "degree": self.degree,
            "basis": [list(b) for b in self.basis],
            "weights": self.weights.tolist(),
            "values": self.matrix.reshape(-1).tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "DtNOperator":
        basis = tuple(tuple(b) for b in data["basis"])
        n = len(basis)
        return cls(
            data["kind"],
            int(data["degree"]),
            basis,
            np.array(data["weights"], dtype=float),
            np.array(data["values"], dtype=float).reshape(n, n),
        )


def dtn_operator(
    gb: GraphWithBoundary,
    kind: str,
    k: int,
    rng: np.random.Generator | None = None,
    check: bool = True,
) -> DtNOperator:
    """Build T_δd, T_dδ or T on boundary k-forms.

    Column j is the trace of the extension of the j-th boundary basis form.
    With ``check`` one column is recomputed from the extension plus a random
    element of the energy kernel; the change is kept in
    ``well_defined_residual``.
    """
    kind = check_kind(kind)
    if kind == "d_delta" and k < 1:
        raise DegreeOutOfRange("T_dδ is defined for k >= 1 only")
    basis = gb.boundary_basis(k)
    weights = gb.boundary_weights(k)
    if not basis:
        return DtNOperator(kind, k, (), np.zeros(0), np.zeros((0, 0)))
    ext = _extension(gb, kind, k)
    full_ext = ext.extend(np.eye(len(basis)))
    trace = _trace_matrix(gb, kind, k)
    mat = trace @ full_ext
    scale = float(np.max(np.abs(trace)) * np.max(np.abs(full_ext))) if trace.size else 1.0
    resid = 0.0
    if check and ext.kernel.size:
        rng = np.random.default_rng(0) if rng is None else rng
        j = int(rng.integers(len(basis)))
        col = full_ext[:, j].copy()
        col[ext.interior] += ext.kernel @ rng.standard_normal(ext.kernel.shape[1])
        resid = float(np.max(np.abs(trace @ col - mat[:, j])))
    return DtNOperator(kind, k, basis, weights, mat, resid, full_ext, max(scale, np.finfo(float).tiny))


def perturbed_column_residual(gb: GraphWithBoundary, kind: str, k: int, rng: np.random.Generator) -> float:
    """Largest change of any DtN column when the extension moves along the energy kernel."""
    kind = check_kind(kind)
    ext = _extension(gb, kind, k)
    nb = len(gb.boundary_basis(k))
    if not nb:
        return 0.0
    full_ext = ext.extend(np.eye(nb))
    trace = _trace_matrix(gb, kind, k)
    base = trace @ full_ext
    pert = full_ext.copy()
    if ext.kernel.size:
        pert[ext.interior] += ext.kernel @ rng.standard_normal((ext.kernel.shape[1], nb))
    return float(np.max(np.abs(trace @ pert - base)))


def dtn_kernel(op: DtNOperator, rtol: float = RANK_RTOL) -> np.ndarray:
    """Columns spanning the numerical kernel of a DtN matrix."""
    if not op.dim:
        return np.zeros((0, 0))
    sw = np.sqrt(op.weights)
    s = sw[:, None] * op.matrix / sw[None, :]
    ev, vec = np.linalg.eigh((s + s.T) / 2)
    top = float(np.max(np.abs(ev)))
    if top <= ZERO_FLOOR * op.scale:
        ker = np.ones(len(ev), dtype=bool)
    else:
        ker = np.abs(ev) <= rtol * top
    return vec[:, ker] / sw[:, None]


def _rank(a: np.ndarray, rtol: float = RANK_RTOL) -> int:
    if a.size == 0:
        return 0
    sv = np.linalg.svd(a, compute_uv=False)
    return int(np.sum(sv > rtol * sv[0])) if sv[0] > 0 else 0


def trace_space_dimension(gb: GraphWithBoundary, kind: str, k: int) -> int:
    """Dimension of the boundary restrictions of closed / interior-coclosed forms.

    delta_d: {ω : dω = 0 on G}; d_delta: {ω : δω = 0 on Ω}; full: both.
    """
    kind = check_kind(kind)
    wg = gb.wg
    rows = []
    if kind in ("delta_d", "full") and wg.dim(k + 1):
        rows.append(d_matrix(wg, k).toarray())
    if kind in ("d_delta", "full") and k >= 1:
        mask = region_mask(wg, k - 1, "interior", gb.bs)
        rows.append(delta_matrix(wg, k - 1).toarray()[mask])
    n = wg.dim(k)
    if rows and sum(r.shape[0] for r in rows):
        space = sla.null_space(np.vstack(rows), rcond=RANK_RTOL)
    else:
        space = np.eye(n)
    return _rank(gb.restriction(k).toarray() @ space)


def _safe_max(values) -> float:
    values = list(values)
    return max(values) if values else 0.0


def n_bound(gb: GraphWithBoundary, k: int) -> float:
    """``(k+1) max_b Σ_{u∈Ω} w(u, b) / w(b)`` over boundary (k+1)-cliques b."""
    wg = gb.wg
    ratios = []
    for b in gb.boundary_basis(k):
        common = set(wg.graph.adjacency[b[0]]) & gb.bs.interior
        for x in b[1:]:
            common &= wg.graph.adjacency[x]
        ratios.append(sum(wg.weight((u,) + b) for u in common) / wg.weight(b))
    return (k + 1) * _safe_max(ratios)


def d_bound(gb: GraphWithBoundary, k: int) -> float:
    """``max_c Σ_{v∈B} w(v, c) / w(c)`` over interior k-cliques c."""
    wg = gb.wg
    ratios = []
    for i in gb.interior_indices(k - 1):
        c = wg.basis(k - 1)[i]
        common = set(gb.bs.boundary)
        for x in c:
            common &= wg.graph.adjacency[x]
        ratios.append(sum(wg.weight((v,) + c) for v in common) / wg.weight(c))
    return _safe_max(ratios)


def norm_bound(gb: GraphWithBoundary, kind: str, k: int) -> float:
    kind = check_kind(kind)
    if kind != "delta_d" and k < 1:
        raise DegreeOutOfRange(f"the {kind} norm bound is stated for k >= 1")
    if kind == "delta_d":
        return n_bound(gb, k)
    if kind == "d_delta":
        return d_bound(gb, k)
    return n_bound(gb, k) + d_bound(gb, k)


def norm_bounds(gb: GraphWithBoundary, kind: str, k: int, op: DtNOperator | None = None) -> tuple[float, float]:
    """Operator norm of the DtN map and the matching upper bound."""
    kind = check_kind(kind)
    bound = norm_bound(gb, kind, k)
    if op is None:
        op = dtn_operator(gb, kind, k, check=False)
    if not op.dim:
        return 0.0, bound
    sw = np.sqrt(op.weights)
    s = sw[:, None] * op.matrix / sw[None, :]
    observed = float(np.max(np.abs(np.linalg.eigvalsh((s + s.T) / 2))))
    return observed, bound
