import math

import numpy as np
import pytest
import scipy.sparse.linalg as spla

from magsum.eigensolve import (
    eigenvalue_sum,
    lowest_eigenvalues,
    m_orthonormality_defect,
)
from magsum.errors import SolverDidNotConverge, TooManyEigenvalues
from magsum.geometry import builtin, unit_square
from magsum.mesh import mesh_domain
from magsum.operator import Dirichlet, GaugeChoice, Neumann, Robin, assemble

CASES = [
    ("square", Dirichlet(), 0.0),
    ("triangle", Neumann(), 2.0),
    ("hexagon", Robin(1.0), 1.0),
    ("disk", Dirichlet(), 3.0),
]


def op_for(name, bc, beta, level=3, hbar=1.0, gauge="symmetric"):
    return assemble(mesh_domain(builtin(name), level), GaugeChoice(gauge, beta), hbar, bc)


@pytest.mark.parametrize("name,bc,beta", CASES)
def test_dense_and_iterative_agree(name, bc, beta):
    # the 256-gon disk seed is large; keep the dense reference cheap
    op = op_for(name, bc, beta, level=1 if name == "disk" else 3)
    a = lowest_eigenvalues(op, 5, method="dense")
    b = lowest_eigenvalues(op, 5, method="iterative")
    np.testing.assert_allclose(a.eigenvalues, b.eigenvalues, rtol=1e-8, atol=1e-9)
    assert b.residual_norms.max() <= 1e-9 * max(1.0, b.eigenvalues[-1]) * 10


@pytest.mark.parametrize("name,bc,beta", CASES)
def test_against_scipy_shift_invert(name, bc, beta):
    op = op_for(name, bc, beta)
    ref = spla.eigsh(op.stiffness.tocsc(), k=4, M=op.mass.tocsc(), sigma=-1.0, which="LM",
                     return_eigenvectors=False)
    got = lowest_eigenvalues(op, 4, method="iterative").eigenvalues
    np.testing.assert_allclose(got, np.sort(ref.real), rtol=1e-9, atol=1e-9)


def test_eigenvectors_m_orthonormal():
    op = op_for("triangle", Dirichlet(), 4.0)
    for method in ("dense", "iterative"):
        res = lowest_eigenvalues(op, 6, method=method)
        assert m_orthonormality_defect(res, op) < 1e-10


def test_requesting_more_does_not_change_leading_values():
    op = op_for("hexagon", Neumann(), 1.0)
    a = lowest_eigenvalues(op, 3, method="iterative").eigenvalues
    b = lowest_eigenvalues(op, 5, method="iterative").eigenvalues
    np.testing.assert_allclose(a, b[:3], rtol=1e-10)


def test_square_closed_form():
    res = lowest_eigenvalues(assemble(mesh_domain(unit_square(), 5), GaugeChoice(), 1.0, Dirichlet()), 6)
    exact = math.pi**2 * np.array([2, 5, 5, 8, 10, 10])
    assert np.all(res.eigenvalues >= exact)  # conforming discretization bounds from above
    np.testing.assert_allclose(res.eigenvalues, exact, rtol=1e-2)


@pytest.mark.parametrize("bc", [Dirichlet(), Neumann(), Robin(1.0)], ids=str)
def test_nested_refinement_decreases_eigenvalues(bc):
    # red refinement nests the P1 spaces, so Rayleigh-Ritz values can only drop
    d = builtin("triangle")
    prev = None
    for level in range(1, 5):
        lam = lowest_eigenvalues(assemble(mesh_domain(d, level), GaugeChoice("symmetric", 2.0), 1.0, bc), 3).eigenvalues
        if prev is not None:
            assert np.all(lam <= prev + 1e-10 * np.abs(prev))
        prev = lam


def test_neumann_ground_state_zero_without_field():
    res = lowest_eigenvalues(op_for("hexagon", Neumann(), 0.0), 2, method="iterative")
    assert abs(res.eigenvalues[0]) <= 1e-9
    assert res.eigenvalues[1] > 1.0


def test_hbar_scaling_at_zero_field():
    a = lowest_eigenvalues(op_for("square", Dirichlet(), 0.0, hbar=1.0), 3).eigenvalues
    b = lowest_eigenvalues(op_for("square", Dirichlet(), 0.0, hbar=0.5), 3).eigenvalues
    np.testing.assert_allclose(b, 0.25 * a, rtol=1e-12)


def test_errors():
    op = op_for("triangle", Dirichlet(), 1.0, level=1)
    with pytest.raises(TooManyEigenvalues):
        lowest_eigenvalues(op, op.n_dofs + 1)
    with pytest.raises(ValueError):
        lowest_eigenvalues(op, 1, method="lanczos")
    with pytest.raises(SolverDidNotConverge) as info:
        lowest_eigenvalues(op_for("square", Dirichlet(), 1.0, level=4), 4, method="iterative", max_iter=1, tol=1e-15)
    assert info.value.iterations == 1
    res = lowest_eigenvalues(op, 2)
    assert eigenvalue_sum(res, 2) == pytest.approx(res.eigenvalues.sum())
    with pytest.raises(TooManyEigenvalues):
        eigenvalue_sum(res, 3)


def test_iterative_is_deterministic():
    op = op_for("disk", Robin(2.0), 1.5)
    a = lowest_eigenvalues(op, 3, method="iterative")
    b = lowest_eigenvalues(op, 3, method="iterative")
    assert a.eigenvalues.tobytes() == b.eigenvalues.tobytes()
