"""P1 finite element assembly of the magnetic form ∫ (iħ∇u + Fu)·conj(iħ∇v + Fv).

For hat functions φ_i the Hermitian stiffness matrix is

    A_ij = ħ² ∫ ∇φ_i·∇φ_j + iħ ∫ (φ_i F·∇φ_j − φ_j F·∇φ_i) + ∫ |F|² φ_i φ_j

with u†Au = ∫|(iħ∇ + F)u|². F is linear, so every integrand is a polynomial
of degree <= 4 on each triangle and the 7-point degree-5 rule is exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .errors import InvalidPlanck, MeshTooCoarse, ZeroTrialFunction
from .linalg2 import HALF_QUARTER_TURN, Mat2
from .mesh import Mesh

_s15 = math.sqrt(15.0)
_a1, _a2 = (6.0 - _s15) / 21.0, (6.0 + _s15) / 21.0
_w1, _w2 = (155.0 - _s15) / 1200.0, (155.0 + _s15) / 1200.0
# barycentric points and weights (weights sum to 1; multiply by the area)
QUAD_POINTS = np.array(
    [
        [1 / 3, 1 / 3, 1 / 3],
        [1 - 2 * _a1, _a1, _a1],
        [_a1, 1 - 2 * _a1, _a1],
        [_a1, _a1, 1 - 2 * _a1],
        [1 - 2 * _a2, _a2, _a2],
        [_a2, 1 - 2 * _a2, _a2],
        [_a2, _a2, 1 - 2 * _a2],
    ]
)
QUAD_WEIGHTS = np.array([9 / 40, _w1, _w1, _w1, _w2, _w2, _w2])

GAUGE_MATRICES = {
    "symmetric": HALF_QUARTER_TURN,  # F = (β/2)(−x₂, x₁)
    "landau_y": Mat2(0.0, 0.0, 1.0, 0.0),  # F = β(0, x₁)
    "landau_x": Mat2(0.0, -1.0, 0.0, 0.0),  # F = β(−x₂, 0)
}


@dataclass(frozen=True)
class GaugeChoice:
    """Vector potential F(x) = β G (x − origin) with curl β."""

    variant: str = "symmetric"
    beta: float = 0.0
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.variant not in GAUGE_MATRICES:
            raise ValueError(f"unknown gauge {self.variant!r}; choose from {sorted(GAUGE_MATRICES)}")

    @property
    def matrix(self) -> Mat2:
        return GAUGE_MATRICES[self.variant]

    @property
    def curl(self) -> float:
        G = self.matrix
        return self.beta * (G.a21 - G.a12)

    def potential(self, x: np.ndarray) -> np.ndarray:
        G = self.matrix.to_array()
        return self.beta * (np.asarray(x, dtype=float) - np.asarray(self.origin)) @ G.T

    @classmethod
    def symmetric(cls, beta: float, origin=(0.0, 0.0)) -> GaugeChoice:
        return cls("symmetric", float(beta), tuple(origin))


@dataclass(frozen=True)
class BoundaryCondition:
    kind: str = "dirichlet"
    sigma: float = 0.0

    def __post_init__(self):
        if self.kind not in ("dirichlet", "neumann", "robin"):
            raise ValueError(f"unknown boundary condition {self.kind!r}")
        if self.sigma < 0:
            raise ValueError("Robin parameter must be non-negative")
        if self.kind != "robin" and self.sigma != 0.0:
            raise ValueError("sigma is only meaningful for Robin conditions")

    def __str__(self) -> str:
        return f"robin({self.sigma:g})" if self.kind == "robin" else self.kind

    def scaled(self, factor: float) -> BoundaryCondition:
        """Same condition with σ multiplied by ``factor`` (a no-op unless Robin)."""
        if self.kind != "robin":
            return self
        return BoundaryCondition("robin", self.sigma * factor)


def Dirichlet() -> BoundaryCondition:
    return BoundaryCondition("dirichlet")


def Neumann() -> BoundaryCondition:
    return BoundaryCondition("neumann")


def Robin(sigma: float) -> BoundaryCondition:
    return BoundaryCondition("robin", float(sigma))


def parse_bc(text: str, sigma: float = 1.0) -> BoundaryCondition:
    text = text.lower()
    if text == "robin":
        return Robin(sigma)
    return BoundaryCondition(text)


@dataclass(frozen=True, eq=False)
class MagneticOperator:
    stiffness: sp.csr_matrix  # complex Hermitian, on active dofs
    mass: sp.csr_matrix  # real SPD, on active dofs
    dof_map: np.ndarray  # active dof -> mesh vertex
    n_vertices: int
    boundary_mass: Optional[sp.csr_matrix] = None
    config: dict = field(default_factory=dict)

    @property
    def n_dofs(self) -> int:
        return len(self.dof_map)

    def hermitian_defect(self) -> float:
        A = self.stiffness
        d = abs(A - A.conj().T)
        return float(d.max()) / float(abs(A).max()) if A.nnz else 0.0


@dataclass(frozen=True)
class _Geometry:
    tri: np.ndarray
    area: np.ndarray  # (T,)
    grad: np.ndarray  # (T, 3, 2) gradients of the hat functions
    qpts: np.ndarray  # (T, Q, 2) physical quadrature points


def _element_geometry(m: Mesh) -> _Geometry:
    p = m.vertices[m.triangles]
    area = m.signed_areas()
    # ∇λ_i = (y_{i+1} − y_{i+2}, x_{i+2} − x_{i+1}) / 2A
    nxt, nxt2 = np.roll(p, -1, axis=1), np.roll(p, -2, axis=1)
    grad = np.stack([nxt[..., 1] - nxt2[..., 1], nxt2[..., 0] - nxt[..., 0]], axis=-1)
    grad /= (2.0 * area)[:, None, None]
    qpts = np.einsum("qi,tid->tqd", QUAD_POINTS, p)
    return _Geometry(m.triangles, area, grad, qpts)


def _scatter(tri: np.ndarray, local: np.ndarray, n: int) -> sp.csr_matrix:
    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def _laplace_local(g: _Geometry) -> np.ndarray:
    return np.einsum("tid,tjd->tij", g.grad, g.grad) * g.area[:, None, None]


def _mass_local(g: _Geometry) -> np.ndarray:
    base = (np.ones((3, 3)) + np.eye(3)) / 12.0
    return g.area[:, None, None] * base


def _weighted_mass_local(g: _Geometry, weight: np.ndarray) -> np.ndarray:
    """∫ w φ_i φ_j with w sampled at the quadrature points, shape (T, Q)."""
    wq = QUAD_WEIGHTS[None, :] * weight * g.area[:, None]
    return np.einsum("tq,qi,qj->tij", wq, QUAD_POINTS, QUAD_POINTS)


def _drift_local(g: _Geometry, field_q: np.ndarray) -> np.ndarray:
    """∫ φ_i (F·∇φ_j) with F sampled at the quadrature points, shape (T, Q, 2)."""
    Fg = np.einsum("tqd,tjd->tqj", field_q, g.grad)
    wq = QUAD_WEIGHTS[None, :] * g.area[:, None]
    return np.einsum("tq,qi,tqj->tij", wq, QUAD_POINTS, Fg)


def boundary_mass_matrix(m: Mesh) -> sp.csr_matrix:
    """∫_∂Ω φ_i φ_j ds, exact for P1: (len/6)[[2,1],[1,2]] per boundary edge."""
    e = m.boundary_edges
    length = np.linalg.norm(m.vertices[e[:, 1]] - m.vertices[e[:, 0]], axis=1)
    local = length[:, None, None] * (np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0)
    rows = np.repeat(e, 2, axis=1).ravel()
    cols = np.tile(e, (1, 2)).ravel()
    n = m.n_vertices
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def _finish(m: Mesh, stiffness, mass, bc: BoundaryCondition, config: dict) -> MagneticOperator:
    n = m.n_vertices
    bmass = None
    if bc.kind == "robin":
        bmass = boundary_mass_matrix(m)
        if bc.sigma != 0.0:
            stiffness = stiffness + bc.sigma * bmass
    if bc.kind == "dirichlet":
        dofs = m.interior_vertices()
        if len(dofs) == 0:
            raise MeshTooCoarse("no interior vertices left after eliminating the boundary; refine the mesh")
        stiffness = stiffness[dofs][:, dofs]
        mass = mass[dofs][:, dofs]
    else:
        dofs = np.arange(n)
    stiffness = sp.csr_matrix(stiffness)
    stiffness.sort_indices()
    mass = sp.csr_matrix(mass)
    mass.sort_indices()
    if bmass is not None:
        bmass = bmass[dofs][:, dofs].tocsr()
    return MagneticOperator(stiffness, mass, dofs, n, bmass, config)


def _config(m: Mesh, gauge: str, beta: float, hbar: float, bc: BoundaryCondition) -> dict:
    return {
        "domain": m.label,
        "level": m.level,
        "gauge": gauge,
        "beta": float(beta),
        "hbar": float(hbar),
        "bc": bc.kind,
        "sigma": float(bc.sigma),
    }


def assemble(m: Mesh, gauge: GaugeChoice, hbar: float, bc: BoundaryCondition) -> MagneticOperator:
    if not hbar > 0:
        raise InvalidPlanck(f"Planck constant must be positive, got {hbar!r}")
    g = _element_geometry(m)
    F = gauge.potential(g.qpts)
    D = _drift_local(g, F)
    local = (
        hbar**2 * _laplace_local(g)
        + 1j * hbar * (D - D.transpose(0, 2, 1))
        + _weighted_mass_local(g, np.sum(F * F, axis=-1))
    )
    n = m.n_vertices
    stiffness = _scatter(g.tri, local, n)
    mass = _scatter(g.tri, _mass_local(g), n)
    return _finish(m, stiffness, mass, bc, _config(m, gauge.variant, gauge.beta, hbar, bc))


def expanded_terms(m: Mesh, beta: float, hbar: float, origin=(0.0, 0.0)):
    """The three pieces of |iħ∇u + β(Mx)†u|² assembled separately.

    Q₁ = ħ²|∇u|², Q₂ = 2ħβ Re{i ū ∇u Mx}, Q₃ = (β²/4)|u|²|x|², with
    M = ½[[0, −1], [1, 0]] and x measured from ``origin``. Returned as full
    (vertex-indexed) sparse matrices.
    """
    if not hbar > 0:
        raise InvalidPlanck(f"Planck constant must be positive, got {hbar!r}")
    g = _element_geometry(m)
    n = m.n_vertices
    x = g.qpts - np.asarray(origin, dtype=float)
    q1 = _scatter(g.tri, hbar**2 * _laplace_local(g), n)
    Mx = x @ HALF_QUARTER_TURN.to_array().T
    # 2 Re(u† C u) with C_ij = iħβ ∫ φ_i ∇φ_j·Mx is the Hermitian form C + C†
    C = _scatter(g.tri, 1j * hbar * beta * _drift_local(g, Mx), n)
    q2 = (C + C.conj().T).tocsr()
    q3 = _scatter(g.tri, 0.25 * beta**2 * _weighted_mass_local(g, np.sum(x * x, axis=-1)), n)
    return q1, q2, q3


def assemble_expanded(m: Mesh, beta: float, hbar: float, bc: BoundaryCondition, origin=(0.0, 0.0)) -> MagneticOperator:
    q1, q2, q3 = expanded_terms(m, beta, hbar, origin)
    g = _element_geometry(m)
    mass = _scatter(g.tri, _mass_local(g), m.n_vertices)
    return _finish(m, q1 + q2 + q3, mass, bc, _config(m, "symmetric-expanded", beta, hbar, bc))


def rayleigh_quotient(op: MagneticOperator, u) -> float:
    u = np.asarray(u, dtype=complex)
    if u.shape[0] == op.n_vertices and op.n_vertices != op.n_dofs:
        u = u[op.dof_map]
    denom = np.vdot(u, op.mass @ u).real
    if denom <= 0.0 or not np.any(u):
        raise ZeroTrialFunction("trial function vanishes on the active dofs")
    return float(np.vdot(u, op.stiffness @ u).real / denom)


def dump_triplets(op: MagneticOperator, path) -> None:
    """Write stiffness and mass as 'i j re im' / 'i j value' lines for external checks."""
    lines = [f"# stiffness {op.n_dofs}x{op.n_dofs}"]
    A = op.stiffness.tocoo()
    lines += [f"{i} {j} {float(v.real)!r} {float(v.imag)!r}" for i, j, v in zip(A.row, A.col, A.data)]
    lines.append(f"# mass {op.n_dofs}x{op.n_dofs}")
    M = op.mass.tocoo()
    lines += [f"{i} {j} {float(v)!r}" for i, j, v in zip(M.row, M.col, M.data)]
    Path(path).write_text("\n".join(lines) + "\n")
