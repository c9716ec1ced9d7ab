import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import roots_legendre

from magsum.errors import InvalidPlanck, MeshTooCoarse, ZeroTrialFunction
from magsum.geometry import Domain, builtin, unit_square
from magsum.mesh import Mesh, mesh_domain, triangulate
from magsum.operator import (
    GAUGE_MATRICES,
    QUAD_WEIGHTS,
    BoundaryCondition,
    Dirichlet,
    GaugeChoice,
    Neumann,
    Robin,
    assemble,
    assemble_expanded,
    boundary_mass_matrix,
    dump_triplets,
    expanded_terms,
    parse_bc,
    rayleigh_quotient,
)


def single_triangle(p) -> Mesh:
    v = np.asarray(p, dtype=float)
    return Mesh(v, np.array([[0, 1, 2]]), np.array([[0, 1], [1, 2], [2, 0]]), np.arange(3))


def duffy_energy(p, coeffs, gauge: GaugeChoice, hbar: float, k: int = 8) -> float:
    """∫_T |iħ∇u + F u|² for u = Σ c_i φ_i by a collapsed Gauss-Legendre rule."""
    p = np.asarray(p, dtype=float)
    xs, ws = roots_legendre(k)
    xs, ws = 0.5 * (xs + 1), 0.5 * ws
    J = np.column_stack([p[1] - p[0], p[2] - p[0]])
    detJ = abs(np.linalg.det(J))
    # barycentric gradients
    Jinv = np.linalg.inv(J)
    grads = np.vstack([-Jinv.sum(axis=0), Jinv[0], Jinv[1]])
    grad_u = coeffs @ grads
    total = 0.0
    for s, ws_ in zip(xs, ws):
        for t, wt in zip(xs, ws):
            a, b = s, (1 - s) * t  # maps the square onto the reference triangle
            lam = np.array([1 - a - b, a, b])
            x = p.T @ lam
            u = coeffs @ lam
            F = gauge.potential(x[None, :])[0]
            val = 1j * hbar * grad_u + F * u
            total += ws_ * wt * (1 - s) * np.real(np.vdot(val, val))
    return total * detJ


def test_reference_triangle_laplacian():
    m = single_triangle([(0, 0), (1, 0), (0, 1)])
    op = assemble(m, GaugeChoice("symmetric", 0.0), 1.0, Neumann())
    want = 0.5 * np.array([[2, -1, -1], [-1, 1, 0], [-1, 0, 1]])
    np.testing.assert_allclose(op.stiffness.toarray(), want, atol=1e-15)
    np.testing.assert_allclose(op.mass.toarray(), np.array([[2, 1, 1], [1, 2, 1], [1, 1, 2]]) / 24, atol=1e-16)


def test_quadrature_weights_sum_to_one():
    assert QUAD_WEIGHTS.sum() == pytest.approx(1.0, abs=1e-15)


coeff = st.floats(-2.0, 2.0, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.tuples(coeff, coeff), min_size=3, max_size=3),
    st.sampled_from(sorted(GAUGE_MATRICES)),
    st.floats(-3.0, 3.0),
    st.floats(0.2, 2.0),
)
def test_element_energy_matches_independent_quadrature(c, gauge, beta, hbar):
    p = [(0.1, -0.2), (1.3, 0.4), (0.2, 0.9)]
    m = single_triangle(p)
    g = GaugeChoice(gauge, beta, origin=(0.3, -0.1))
    op = assemble(m, g, hbar, Neumann())
    u = np.array([complex(a, b) for a, b in c])
    got = np.vdot(u, op.stiffness @ u).real
    want = duffy_energy(p, u, g, hbar)
    assert got == pytest.approx(want, rel=1e-11, abs=1e-12)


@pytest.mark.parametrize("name", ["triangle", "square", "disk"])
@pytest.mark.parametrize("bc", [Dirichlet(), Neumann(), Robin(1.0)], ids=str)
def test_hermitian_and_mass_spd(name, bc):
    op = assemble(mesh_domain(builtin(name), 2), GaugeChoice("symmetric", 1.7), 0.8, bc)
    assert op.hermitian_defect() < 1e-13
    M = op.mass.toarray()
    np.testing.assert_allclose(M, M.T, atol=0)
    assert np.linalg.eigvalsh(M).min() > 0


def test_mass_integrates_constants():
    m = mesh_domain(unit_square(), 3)
    op = assemble(m, GaugeChoice(), 1.0, Neumann())
    one = np.ones(m.n_vertices)
    assert one @ op.mass @ one == pytest.approx(1.0, rel=1e-14)
    assert np.abs(op.stiffness @ one).max() < 1e-12  # β = 0: constants in the kernel


def test_constant_rayleigh_quotient_is_mean_potential_energy():
    # R[1] = ∫|F|² / A; for the symmetric gauge on the square: (β²/4) I / A = β²/24
    m = mesh_domain(unit_square(), 2)
    op = assemble(m, GaugeChoice("symmetric", 2.0), 1.0, Neumann())
    assert rayleigh_quotient(op, np.ones(m.n_vertices)) == pytest.approx(4.0 / 24.0, rel=1e-13)


def test_robin_zero_equals_neumann():
    m = mesh_domain(builtin("hexagon"), 2)
    g = GaugeChoice("symmetric", 1.0)
    a = assemble(m, g, 1.0, Robin(0.0))
    b = assemble(m, g, 1.0, Neumann())
    assert abs(a.stiffness - b.stiffness).max() == 0.0


def test_boundary_mass_is_perimeter():
    m = mesh_domain(unit_square(), 3)
    B = boundary_mass_matrix(m)
    one = np.ones(m.n_vertices)
    assert one @ B @ one == pytest.approx(4.0, rel=1e-14)
    op1 = assemble(m, GaugeChoice(), 1.0, Robin(1.0))
    op0 = assemble(m, GaugeChoice(), 1.0, Neumann())
    assert rayleigh_quotient(op1, one) - rayleigh_quotient(op0, one) == pytest.approx(4.0, rel=1e-13)


def test_field_sign_conjugates_stiffness():
    m = mesh_domain(builtin("triangle"), 2)
    a = assemble(m, GaugeChoice("symmetric", 1.5), 1.0, Dirichlet()).stiffness
    b = assemble(m, GaugeChoice("symmetric", -1.5), 1.0, Dirichlet()).stiffness
    assert abs(a - b.conj()).max() < 1e-15


def test_expanded_form_agrees_with_assembly():
    m = mesh_domain(builtin("hexagon"), 2)
    for origin in [(0.0, 0.0), (0.2, -0.4)]:
        a = assemble(m, GaugeChoice("symmetric", 2.3, origin), 0.7, Dirichlet())
        b = assemble_expanded(m, 2.3, 0.7, Dirichlet(), origin)
        scale = abs(a.stiffness).max()
        assert abs(a.stiffness - b.stiffness).max() <= 1e-12 * scale
    q1, q2, q3 = expanded_terms(m, 0.0, 1.0)
    assert abs(q2).max() == 0.0 and abs(q3).max() == 0.0


@pytest.mark.parametrize("variant", sorted(GAUGE_MATRICES))
def test_gauges_have_curl_beta(variant):
    g = GaugeChoice(variant, 2.5)
    assert g.curl == pytest.approx(2.5)
    # finite differences of the potential
    h = 1e-6
    x = np.array([[0.3, 0.7]])
    dF2dx1 = (g.potential(x + [h, 0]) - g.potential(x - [h, 0]))[0, 1] / (2 * h)
    dF1dx2 = (g.potential(x + [0, h]) - g.potential(x - [0, h]))[0, 0] / (2 * h)
    assert dF2dx1 - dF1dx2 == pytest.approx(2.5, rel=1e-8)


def test_invalid_inputs():
    m = mesh_domain(unit_square(), 1)
    with pytest.raises(InvalidPlanck):
        assemble(m, GaugeChoice(), 0.0, Dirichlet())
    with pytest.raises(ValueError):
        GaugeChoice("coulomb", 1.0)
    with pytest.raises(ValueError):
        BoundaryCondition("robin", -1.0)
    with pytest.raises(ValueError):
        BoundaryCondition("dirichlet", 1.0)
    l_shape = Domain.polygon([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)])
    with pytest.raises(MeshTooCoarse):
        assemble(triangulate(l_shape), GaugeChoice(), 1.0, Dirichlet())
    op = assemble(m, GaugeChoice(), 1.0, Neumann())
    with pytest.raises(ZeroTrialFunction):
        rayleigh_quotient(op, np.zeros(op.n_dofs))


def test_parse_bc():
    assert parse_bc("Robin", 2.0) == Robin(2.0)
    assert str(parse_bc("neumann")) == "neumann"
    assert str(Robin(0.5)) == "robin(0.5)"
    assert Robin(1.0).scaled(3.0) == Robin(3.0) and Neumann().scaled(3.0) == Neumann()


def test_dirichlet_restricts_to_interior():
    m = mesh_domain(unit_square(), 2)
    op = assemble(m, GaugeChoice(), 1.0, Dirichlet())
    assert op.n_dofs == len(m.interior_vertices())
    assert isinstance(op.stiffness, sp.csr_matrix)


def test_triplet_dump_roundtrip(tmp_path):
    op = assemble(mesh_domain(builtin("triangle"), 1), GaugeChoice("symmetric", 1.0), 1.0, Neumann())
    path = tmp_path / "ops.txt"
    dump_triplets(op, path)
    lines = path.read_text().splitlines()
    split = lines.index(f"# mass {op.n_dofs}x{op.n_dofs}")
    A = np.zeros((op.n_dofs, op.n_dofs), dtype=complex)
    for line in lines[1:split]:
        i, j, re, im = line.split()
        A[int(i), int(j)] += complex(float(re), float(im))
    np.testing.assert_array_equal(A, op.stiffness.toarray())
