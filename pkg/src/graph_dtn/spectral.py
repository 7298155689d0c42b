"""Spectra of operators that are self-adjoint for a diagonal weighted inner product."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .forms import RANK_RTOL, KForm, codifferential, exterior_d, region_mask
from .dtn import ZERO_FLOOR, n_trace_matrix
from .graph import GraphWithBoundary

SYMMETRY_TOL = 1e-8
# Dense cyclic Jacobi below this size, LAPACK above.
JACOBI_MAX_DIM = 64


class SpectralError(ValueError):
    pass


def jacobi_eigh(a: np.ndarray, tol: float = 1e-14, max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi rotations for a dense symmetric matrix.

    Sweeps visit pairs (p, q), p < q, in row order. Returns ascending
    eigenvalues and the matching orthonormal eigenvectors as columns.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    if n < 2:
        return np.diag(a).copy(), v
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
    ev = np.diag(a).copy()
    order = np.argsort(ev, kind="stable")
    return ev[order], v[:, order]


def symmetric_eigvals(s: np.ndarray) -> np.ndarray:
    if s.shape[0] <= JACOBI_MAX_DIM:
        return jacobi_eigh(s)[0]
    return np.linalg.eigvalsh(s)


@dataclass
class SpectralReport:
    eigenvalues: np.ndarray
    kernel_dim: int
    positive: np.ndarray
    threshold: float

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def lam(self, i: int) -> float:
        """The i-th positive eigenvalue, 1-based."""
        if not 1 <= i <= len(self.positive):
            raise SpectralError(f"only {len(self.positive)} positive eigenvalues, asked for index {i}")
        return float(self.positive[i - 1])

    def to_json(self) -> dict:
        return {
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "kernel_dim": int(self.kernel_dim),
            "positive": [float(x) for x in self.positive],
            "threshold": float(self.threshold),
        }

    @classmethod
    def from_json(cls, data: dict) -> "SpectralReport":
        return cls(
            np.array(data["eigenvalues"], dtype=float),
            int(data["kernel_dim"]),
            np.array(data["positive"], dtype=float),
            float(data["threshold"]),
        )

    def csv_rows(self) -> list[tuple[int, float, bool]]:
        nk = self.kernel_dim
        return [(i, float(x), i < nk) for i, x in enumerate(self.eigenvalues)]


def report_from_eigenvalues(ev: np.ndarray, rtol: float = RANK_RTOL, scale: float = 0.0) -> SpectralReport:
    """Split at ``rtol × max|λ|``; when even that maximum is below ``1e-12 × scale``
    the whole spectrum is round-off and counts as kernel."""
    ev = np.sort(np.asarray(ev, dtype=float))
    top = float(np.max(np.abs(ev))) if len(ev) else 0.0
    if top <= ZERO_FLOOR * scale:
        top = 0.0
    threshold = rtol * top
    pos = ev > threshold if top > 0 else np.zeros(len(ev), dtype=bool)
    return SpectralReport(ev, int(np.sum(~pos)), ev[pos], threshold)


def symmetrize(m: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, float]:
    """``W^{1/2} M W^{-1/2}`` and its largest asymmetry."""
    sw = np.sqrt(np.asarray(w, dtype=float))
    s = sw[:, None] * np.asarray(m, dtype=float) / sw[None, :]
    asym = float(np.max(np.abs(s - s.T))) if s.size else 0.0
    return (s + s.T) / 2, asym


def weighted_eigs(
    m: np.ndarray,
    w: np.ndarray,
    rtol: float = RANK_RTOL,
    sym_tol: float = SYMMETRY_TOL,
    scale: float = 0.0,
) -> SpectralReport:
    """Spectrum of ``m`` assuming it is self-adjoint for ``Σ x y w``.

    The symmetry certificate is checked relative to the largest entry.
    ``scale`` is the size of the entries before cancellation, if known.
    """
    m = np.asarray(m, dtype=float)
    w = np.asarray(w, dtype=float)
    if m.shape != (len(w), len(w)):
        raise SpectralError(f"matrix shape {m.shape} does not match {len(w)} weights")
    if np.any(w <= 0):
        raise SpectralError("weights must be positive")
    s, asym = symmetrize(m, w)
    entry_max = max(1.0, float(np.max(np.abs(s)))) if s.size else 1.0
    if asym > sym_tol * entry_max:
        raise SpectralError(f"operator is not self-adjoint for the given weights: max asymmetry {asym:.3e}")
    return report_from_eigenvalues(symmetric_eigvals(s), rtol, scale)


def eigen_sum(report: SpectralReport, m: int) -> float:
    if m < 0:
        raise SpectralError("count must be nonnegative")
    if m > len(report.positive):
        raise SpectralError(f"insufficient spectrum: {len(report.positive)} positive eigenvalues, need {m}")
    return float(np.sum(report.positive[:m]))


def charpoly_eigvals(m: np.ndarray) -> np.ndarray:
    """Eigenvalues as roots of the characteristic polynomial (Faddeev-LeVerrier).

    Independent of any eigensolver; only sensible for small dimensions.
    """
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    coeffs = [1.0]
    mk = np.zeros_like(m)
    ident = np.eye(n)
    for k in range(1, n + 1):
        mk = m @ (mk + coeffs[-1] * ident)
        coeffs.append(-np.trace(mk) / k)
    return np.sort(np.roots(coeffs).real)


@dataclass
class ComparisonOperator:
    """Gram data of a subspace of exact forms ``ξ_i = dη_i``."""

    etas: list[KForm]
    xis: list[KForm]
    gram: np.ndarray
    trace_gram: np.ndarray
    eigenvalues: np.ndarray
    coclosure_residual: float

    @property
    def dim(self) -> int:
        return len(self.xis)


def comparison_operator(
    gb: GraphWithBoundary,
    etas: list[KForm],
    tol: float = 1e-10,
    rtol: float = RANK_RTOL,
) -> ComparisonOperator:
    """Eigenvalues of A with ``⟨Aξ, ζ⟩_G = ⟨Nξ, Nζ⟩_∂Ω`` on ``span{dη_i}``."""
    if not etas:
        raise SpectralError("empty subspace")
    k = etas[0].degree
    if any(e.degree != k for e in etas):
        raise SpectralError("all η must share one degree")
    wg = gb.wg
    xis = [exterior_d(e.as_float()) for e in etas]
    x = np.column_stack([xi.values.astype(float) for xi in xis])
    if not x.size or not np.any(x):
        raise SpectralError(f"the forms dη_i vanish: no nonzero {k + 1}-forms on this graph")
    scale = max(1.0, float(np.max(np.abs(x))))
    mask = region_mask(wg, k, "interior", gb.bs)
    resid = 0.0
    for xi in xis:
        cod = codifferential(xi).values.astype(float)
        resid = max(resid, float(np.max(np.abs(cod[mask]), initial=0.0)))
    if resid > tol * scale:
        raise SpectralError(f"subspace is not coclosed in the interior: residual {resid:.3e}")
    b = x.T @ (wg.weights(k + 1)[:, None] * x)
    nx = n_trace_matrix(gb, k) @ x
    c = nx.T @ (gb.boundary_weights(k)[:, None] * nx)
    b = (b + b.T) / 2
    c = (c + c.T) / 2
    bev = np.linalg.eigvalsh(b)
    if bev[0] <= rtol * max(bev[-1], 0.0) or bev[-1] <= 0:
        raise SpectralError("the forms dη_i are linearly dependent")
    ev = sla.eigh(c, b, eigvals_only=True)
    if ev[0] <= -1e-9 * max(1.0, abs(ev[-1])):
        raise SpectralError("comparison operator is not positive")
    return ComparisonOperator(list(etas), xis, b, c, np.sort(ev), resid)
