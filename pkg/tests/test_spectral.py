import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graph_dtn.dtn import dtn_operator
from graph_dtn.forms import KForm
from graph_dtn.graph import GraphWithBoundary, WeightSpec
from graph_dtn.lattice import LatticeSpec, build_lattice, coordinate_function, random_connected_omega
from graph_dtn.spectral import (
    JACOBI_MAX_DIM,
    SpectralError,
    SpectralReport,
    charpoly_eigvals,
    comparison_operator,
    eigen_sum,
    jacobi_eigh,
    report_from_eigenvalues,
    symmetric_eigvals,
    weighted_eigs,
)
from graph_dtn.verify import random_boundary_graph

from conftest import star


def random_symmetric(rng, n):
    a = rng.standard_normal((n, n))
    return (a + a.T) / 2


@pytest.mark.parametrize("n", [1, 2, 3, 7, 20])
def test_jacobi_matches_lapack(n):
    rng = np.random.default_rng(n)
    a = random_symmetric(rng, n)
    ev, vec = jacobi_eigh(a)
    assert np.allclose(ev, np.linalg.eigvalsh(a), atol=1e-12)
    assert np.allclose(vec.T @ vec, np.eye(n), atol=1e-12)
    assert np.allclose(a @ vec, vec * ev, atol=1e-11)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_jacobi_against_characteristic_polynomial(n, seed):
    a = random_symmetric(np.random.default_rng(seed), n)
    assert np.allclose(jacobi_eigh(a)[0], charpoly_eigvals(a), atol=1e-8)


def test_large_matrices_go_to_lapack():
    a = random_symmetric(np.random.default_rng(3), JACOBI_MAX_DIM + 5)
    assert np.allclose(symmetric_eigvals(a), np.linalg.eigvalsh(a))


def test_jacobi_handles_repeated_eigenvalues():
    q, _ = np.linalg.qr(np.random.default_rng(8).standard_normal((5, 5)))
    a = q @ np.diag([2.0, 2.0, 2.0, -1.0, 0.0]) @ q.T
    assert np.allclose(jacobi_eigh(a)[0], [-1, 0, 2, 2, 2], atol=1e-12)


def test_weighted_eigs_identity():
    rep = weighted_eigs(np.eye(4), np.array([1.0, 2.0, 0.5, 3.0]))
    assert np.allclose(rep.eigenvalues, 1)
    assert rep.kernel_dim == 0


def test_weighted_eigs_star_operator():
    m = np.eye(4) - np.ones((4, 4)) / 4
    rep = weighted_eigs(m, np.ones(4))
    assert np.allclose(rep.eigenvalues, [0, 1, 1, 1], atol=1e-12)
    assert rep.kernel_dim == 1
    assert np.allclose(rep.positive, [1, 1, 1])
    assert rep.lam(1) == pytest.approx(1.0)
    with pytest.raises(SpectralError):
        rep.lam(4)


def test_weighted_eigs_zero_matrix():
    rep = weighted_eigs(np.zeros((3, 3)), np.ones(3))
    assert rep.kernel_dim == 3
    assert len(rep.positive) == 0


def test_weighted_eigs_nonuniform_weights():
    # M self-adjoint for w means W M symmetric.
    rng = np.random.default_rng(4)
    w = rng.uniform(0.5, 2.0, 5)
    s = random_symmetric(rng, 5)
    m = s / w[:, None]
    rep = weighted_eigs(m, w)
    assert np.allclose(rep.eigenvalues, np.sort(np.linalg.eigvals(m).real), atol=1e-10)


def test_weighted_eigs_rejects_asymmetric():
    m = np.array([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(SpectralError, match="max asymmetry 2.0"):
        weighted_eigs(m, np.ones(2))
    with pytest.raises(SpectralError, match="positive"):
        weighted_eigs(np.eye(2), np.array([1.0, 0.0]))
    with pytest.raises(SpectralError, match="shape"):
        weighted_eigs(np.eye(2), np.ones(3))


def test_report_invariants():
    rep = report_from_eigenvalues(np.array([3.0, 1e-14, 0.5, -1e-13, 2.0]))
    assert rep.kernel_dim + len(rep.positive) == rep.dim
    assert list(rep.positive) == sorted(rep.positive)
    assert np.all(rep.positive > rep.threshold)
    assert rep.kernel_dim == 2


def test_roundoff_spectrum_counts_as_kernel():
    rep = report_from_eigenvalues(np.array([3e-17, -1e-17]), scale=1.0)
    assert rep.kernel_dim == 2
    # without a scale only the relative cut applies
    assert report_from_eigenvalues(np.array([3e-17, -1e-17])).kernel_dim == 1


def test_eigen_sum():
    rep = report_from_eigenvalues(np.array([0.0, 1.0, 1.0, 1.0]))
    assert eigen_sum(rep, 2) == 2.0
    assert eigen_sum(rep, 0) == 0.0
    with pytest.raises(SpectralError, match="insufficient spectrum"):
        eigen_sum(rep, 4)
    with pytest.raises(SpectralError):
        eigen_sum(rep, -1)


def test_report_json_round_trip():
    rep = weighted_eigs(np.eye(3) - np.ones((3, 3)) / 3, np.ones(3))
    back = SpectralReport.from_json(json.loads(json.dumps(rep.to_json())))
    assert np.array_equal(back.eigenvalues, rep.eigenvalues)
    assert back.kernel_dim == rep.kernel_dim
    assert np.array_equal(back.positive, rep.positive)
    assert back.threshold == rep.threshold
    assert set(rep.to_json()) == {"eigenvalues", "kernel_dim", "positive", "threshold"}


@pytest.mark.parametrize("seed", range(6))
def test_spectrum_invariant_under_boundary_permutation(seed):
    rng = np.random.default_rng(seed)
    gb = random_boundary_graph(rng, 9)
    op = dtn_operator(gb, "full", 0)
    perm = rng.permutation(op.dim)
    m = op.matrix[np.ix_(perm, perm)]
    a = op.spectrum().eigenvalues
    b = weighted_eigs(m, op.weights[perm]).eigenvalues
    assert np.allclose(a, b, atol=1e-8)


def test_symmetrized_spectrum_matches_charpoly_on_dtn(star_gb):
    op = dtn_operator(star_gb, "full", 0)
    assert np.allclose(op.spectrum().eigenvalues, charpoly_eigvals(op.matrix), atol=1e-8)


def test_comparison_one_dimensional(star_gb):
    # moving one leaf alone leaves the centre unbalanced
    eta = KForm(star_gb.wg, 0, np.array([0.0, 1.0, 0.0, 0.0, 0.0]))
    with pytest.raises(SpectralError, match="coclosed"):
        comparison_operator(star_gb, [eta])
    # harmonic: the centre value is the mean of the leaves
    vals = np.array([0.0, 1.0, -1.0, 2.0, -2.0])
    eta = KForm(star_gb.wg, 0, vals)
    comp = comparison_operator(star_gb, [eta])
    gram_d = float(np.sum(vals[1:] ** 2))
    # with unit weights N dη at a leaf is η(leaf) - η(centre), so C = B here
    assert comp.dim == 1
    assert comp.gram[0, 0] == pytest.approx(gram_d)
    assert comp.trace_gram[0, 0] == pytest.approx(gram_d)
    assert comp.eigenvalues[0] == pytest.approx(1.0)


def test_comparison_rejects_dependent_or_mixed(star_gb):
    vals = np.array([0.0, 1.0, -1.0, 0.0, 0.0])
    eta = KForm(star_gb.wg, 0, vals)
    with pytest.raises(SpectralError, match="dependent"):
        comparison_operator(star_gb, [eta, eta * 2.0])
    with pytest.raises(SpectralError, match="degree"):
        comparison_operator(star_gb, [eta, KForm.zeros(star_gb.wg, 1)])
    with pytest.raises(SpectralError, match="empty"):
        comparison_operator(star_gb, [])


def test_comparison_lattice_star():
    dom = build_lattice(LatticeSpec.of(2, "lattice", [(0, 0)]))
    etas = [coordinate_function(dom, i) for i in range(2)]
    comp = comparison_operator(dom.gb, etas)
    assert np.allclose(comp.gram, np.diag(np.diag(comp.gram)))
    assert np.allclose(comp.trace_gram, np.diag(np.diag(comp.trace_gram)))
    assert np.all(comp.eigenvalues <= 1 + 1e-12)
    assert np.allclose(comp.eigenvalues, [1.0, 1.0])


def _domination(dom, tol=1e-9):
    etas = [coordinate_function(dom, i) for i in range(dom.n)]
    comp = comparison_operator(dom.gb, etas)
    for kind in ("delta_d", "full"):
        pos = dtn_operator(dom.gb, kind, 0).spectrum().positive
        m = min(len(pos), comp.dim)
        assert np.all(pos[:m] <= comp.eigenvalues[:m] + tol), kind


@pytest.mark.parametrize("n,size,seed", [(2, 1, 0), (2, 6, 1), (2, 15, 2), (3, 4, 3), (3, 9, 4)])
@pytest.mark.parametrize("adjacency", ["lattice", "tessellation"])
def test_comparison_domination(n, size, seed, adjacency):
    rng = np.random.default_rng(seed)
    dom = build_lattice(LatticeSpec.of(n, adjacency, random_connected_omega(n, size, rng)))
    _domination(dom)


def test_comparison_normalized_weights_path():
    g = star(3)
    gb = GraphWithBoundary.from_interior(g, [0], WeightSpec("normalized", {(0, 1): 1.0, (0, 2): 2.0, (0, 3): 3.0}))
    vals = np.zeros(4)
    vals[1:] = [3.0, -1.5, 0.0]
    w = np.array([1.0, 2.0, 3.0])
    vals[0] = float(np.dot(w, vals[1:]) / w.sum())
    comp = comparison_operator(gb, [KForm(gb.wg, 0, vals)])
    assert comp.eigenvalues[0] > 0
