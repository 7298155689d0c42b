import numpy as np
import pytest

from graph_dtn.dtn import (
    KINDS,
    BoundaryKForm,
    DegreeOutOfRange,
    DtNOperator,
    dtn_kernel,
    dtn_operator,
    energy,
    energy_matrix,
    norm_bound,
    norm_bounds,
    perturbed_column_residual,
    solve_bvp,
    trace_D,
    trace_N,
    trace_space_dimension,
)
from graph_dtn.forms import KForm, codifferential, exterior_d, hodge_laplacian, inner_product
from graph_dtn.verify import random_boundary_graph


def operators(gb, max_k=3):
    for kind in KINDS:
        for k in range(max_k):
            if kind == "d_delta" and k == 0:
                continue
            if not gb.boundary_basis(k):
                continue
            yield kind, k


def schur_oracle(gb, kind, k):
    """DtN matrix from the Schur complement of the energy matrix."""
    q = energy_matrix(gb, kind, k)
    inner = gb.interior_indices(k)
    pos, sign = gb.boundary_map(k)
    qbb = q[np.ix_(pos, pos)] * np.outer(sign, sign)
    qbi = q[np.ix_(pos, inner)] * sign[:, None]
    qii = q[np.ix_(inner, inner)]
    s = qbb - qbi @ np.linalg.pinv(qii, rcond=1e-10, hermitian=True) @ qbi.T if len(inner) else qbb
    return s / gb.boundary_weights(k)[:, None]


def test_star_traces(star_gb):
    phi = BoundaryKForm(star_gb, 0, np.array([1.0, 2.0, 4.0, 9.0]))
    u = solve_bvp(star_gb, "full", phi)
    assert u(0) == pytest.approx(4.0)
    ndu = trace_N(exterior_d(u), star_gb)
    assert np.allclose(ndu.values, phi.values - phi.values.mean())
    assert np.allclose(trace_N(KForm.zeros(star_gb.wg, 1), star_gb).values, 0)
    const = KForm(star_gb.wg, 0, np.full(5, 3.0))
    assert np.allclose(trace_D(const, star_gb).values, 3.0)
    with pytest.raises(DegreeOutOfRange):
        trace_N(const, star_gb)


def test_star_dtn_matrix(star_gb):
    expected = np.eye(4) - np.ones((4, 4)) / 4
    for kind in ("delta_d", "full"):
        op = dtn_operator(star_gb, kind, 0)
        assert np.allclose(op.matrix, expected, atol=1e-12)
    ker = dtn_kernel(op)
    assert ker.shape[1] == 1 and np.allclose(ker[:, 0] / ker[0, 0], 1)
    observed, bound = norm_bounds(star_gb, "delta_d", 0)
    assert bound == 1 and observed == pytest.approx(1.0)
    with pytest.raises(DegreeOutOfRange):
        dtn_operator(star_gb, "d_delta", 0)


def test_empty_boundary_basis(star_gb):
    op = dtn_operator(star_gb, "full", 4)
    assert op.dim == 0
    observed, bound = norm_bounds(star_gb, "delta_d", 4)
    assert observed == 0


def test_constant_extension_has_zero_energy(star_gb):
    phi = BoundaryKForm(star_gb, 0, np.full(4, 2.5))
    u = solve_bvp(star_gb, "delta_d", phi)
    assert np.allclose(u.values, 2.5)
    assert energy(star_gb, "delta_d", u) == pytest.approx(0, abs=1e-14)


@pytest.mark.parametrize("seed", range(20))
def test_bvp_residual_and_dirichlet_principle(seed):
    rng = np.random.default_rng(seed)
    gb = random_boundary_graph(rng)
    wg = gb.wg
    for kind, k in operators(gb):
        phi = BoundaryKForm(gb, k, rng.standard_normal(len(gb.boundary_basis(k))))
        w = solve_bvp(gb, kind, phi)
        assert np.allclose(BoundaryKForm.restrict(gb, w).values, phi.values)
        if kind == "delta_d":
            res = codifferential(exterior_d(w)) if wg.dim(k + 1) else KForm.zeros(wg, k)
        elif kind == "d_delta":
            res = exterior_d(codifferential(w))
        else:
            res = hodge_laplacian(wg, k)(w)
        inner = gb.interior_indices(k)
        scale = max(1.0, np.linalg.norm(phi.values))
        assert np.max(np.abs(res.values[inner]), initial=0) < 1e-10 * scale
        best = energy(gb, kind, w)
        for trial in [phi.zero_extension()] + [
            KForm(wg, k, phi.zero_extension().values + _interior_noise(gb, k, rng)) for _ in range(10)
        ]:
            assert best <= energy(gb, kind, trial) + 1e-10 * max(1.0, best)


def _interior_noise(gb, k, rng):
    out = np.zeros(gb.wg.dim(k))
    out[gb.interior_indices(k)] = rng.standard_normal(len(gb.interior_indices(k)))
    return out


@pytest.mark.parametrize("seed", range(25))
def test_dtn_structure_on_random_graphs(seed):
    rng = np.random.default_rng(seed)
    gb = random_boundary_graph(rng)
    for kind, k in operators(gb):
        op = dtn_operator(gb, kind, k, rng=rng)
        assert op.asymmetry() < 1e-10
        rep = op.spectrum()
        assert rep.eigenvalues[0] >= -1e-10
        assert np.allclose(op.matrix, schur_oracle(gb, kind, k), atol=1e-9)
        assert dtn_kernel(op).shape[1] == trace_space_dimension(gb, kind, k)
        assert op.well_defined_residual < 1e-10
        assert perturbed_column_residual(gb, kind, k, rng) < 1e-10
        if kind == "delta_d" or k >= 1:
            observed, bound = norm_bounds(gb, kind, k, op)
            assert observed <= bound + 1e-9
            assert all(x <= bound + 1e-9 for x in rep.positive)


@pytest.mark.parametrize("seed", range(10))
def test_quadratic_form_identity(seed):
    rng = np.random.default_rng(100 + seed)
    gb = random_boundary_graph(rng)
    for k in range(2):
        nb = len(gb.boundary_basis(k))
        if not nb or not gb.wg.dim(k + 1):
            continue
        op = dtn_operator(gb, "delta_d", k)
        phi = BoundaryKForm(gb, k, rng.standard_normal(nb))
        psi = BoundaryKForm(gb, k, rng.standard_normal(nb))
        lhs = BoundaryKForm(gb, k, op.matrix @ phi.values).inner(psi)
        ep, es = solve_bvp(gb, "delta_d", phi), solve_bvp(gb, "delta_d", psi)
        rhs = inner_product(exterior_d(ep), exterior_d(es))
        assert lhs == pytest.approx(rhs, abs=1e-10)


@pytest.mark.parametrize("seed", range(10))
def test_delta_d_and_full_agree_at_degree_zero(seed):
    gb = random_boundary_graph(np.random.default_rng(200 + seed))
    a = dtn_operator(gb, "delta_d", 0).matrix
    b = dtn_operator(gb, "full", 0).matrix
    assert np.max(np.abs(a - b)) < 1e-10


def test_full_bound_is_sum(star_gb):
    from graph_dtn.graph import Graph, GraphWithBoundary, WeightSpec

    g = Graph.from_edges(range(4), [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3)])
    gb = GraphWithBoundary.from_interior(g, [0, 1], WeightSpec.unit_edges(g))
    assert norm_bound(gb, "full", 1) == pytest.approx(norm_bound(gb, "delta_d", 1) + norm_bound(gb, "d_delta", 1))
    with pytest.raises(DegreeOutOfRange):
        norm_bound(gb, "full", 0)


def test_dtn_json_round_trip(star_gb):
    op = dtn_operator(star_gb, "full", 0)
    back = DtNOperator.from_json(op.to_json())
    assert back.basis == op.basis and np.array_equal(back.matrix, op.matrix)
