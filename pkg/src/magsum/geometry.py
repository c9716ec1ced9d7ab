"""Plane domains and their geometric functionals.

A :class:`Domain` is either a CCW polygon or an axis-aligned ellipse centred
at the origin. Area, centroid and moment of inertia about the centroid are
computed in closed form (shoelace and exact triangle second moments).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateDomain, NoEigenvalues, OrderTooLow, SingularMap
from .linalg2 import Mat2, hs_norm

SYMMETRY_TOL = 1e-9
# declared_symmetry_order sentinel meaning "every order" (the disk)
ALL_ORDERS = 0


@dataclass(frozen=True)
class Domain:
    kind: str  # "polygon" or "ellipse"
    vertices: tuple[tuple[float, float], ...] = ()
    semi_axes: tuple[float, float] = (0.0, 0.0)
    symmetry_order: Optional[int] = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind == "polygon":
            verts = tuple((float(x), float(y)) for x, y in self.vertices)
            if len(verts) < 3:
                raise DegenerateDomain("a polygon needs at least 3 vertices")
            if _signed_area(np.array(verts)) < 0:
                verts = verts[::-1]
            object.__setattr__(self, "vertices", verts)
            _check_nondegenerate(np.array(verts))
            if not _is_simple(np.array(verts)):
                raise DegenerateDomain("polygon is self-intersecting")
        elif self.kind == "ellipse":
            a, b = (float(v) for v in self.semi_axes)
            if not (a > 0 and b > 0):
                raise DegenerateDomain(f"ellipse semi-axes must be positive, got {(a, b)}")
            object.__setattr__(self, "semi_axes", (a, b))
        else:
            raise ValueError(f"unknown domain kind {self.kind!r}")
        order = self.symmetry_order
        if order is not None:
            order = int(order)
            object.__setattr__(self, "symmetry_order", order)
            if order < 0:
                raise ValueError("symmetry order must be non-negative")
            if not has_rotational_symmetry(self, order):
                raise ValueError(f"domain is not invariant under rotation by 2π/{order}")

    @classmethod
    def polygon(cls, vertices, symmetry_order=None, name="") -> Domain:
        return cls("polygon", vertices=tuple(map(tuple, vertices)), symmetry_order=symmetry_order, name=name)

    @classmethod
    def ellipse(cls, a: float, b: float, symmetry_order=None, name="") -> Domain:
        if symmetry_order is None:
            symmetry_order = ALL_ORDERS if a == b else 2
        return cls("ellipse", semi_axes=(a, b), symmetry_order=symmetry_order, name=name)

    @property
    def is_polygon(self) -> bool:
        return self.kind == "polygon"

    @property
    def is_disk(self) -> bool:
        return self.kind == "ellipse" and self.semi_axes[0] == self.semi_axes[1]

    def vertex_array(self) -> np.ndarray:
        return np.array(self.vertices, dtype=float)

    def has_theorem_symmetry(self) -> bool:
        """Rotational symmetry of order >= 3 (or the disk)."""
        return self.symmetry_order is not None and (self.symmetry_order == ALL_ORDERS or self.symmetry_order >= 3)

    def to_dict(self) -> dict:
        out: dict = {"type": self.kind}
        if self.is_polygon:
            out["vertices"] = [list(v) for v in self.vertices]
        else:
            out["semi_axes"] = list(self.semi_axes)
        if self.symmetry_order is not None:
            out["symmetry_order"] = self.symmetry_order
        if self.name:
            out["name"] = self.name
        return out

    @classmethod
    def from_dict(cls, data: dict) -> Domain:
        kind = data["type"]
        order = data.get("symmetry_order")
        name = data.get("name", "")
        if kind == "polygon":
            return cls.polygon(data["vertices"], symmetry_order=order, name=name)
        if kind == "ellipse":
            a, b = data["semi_axes"]
            return cls.ellipse(a, b, symmetry_order=order, name=name)
        raise ValueError(f"unknown domain type {kind!r}")


def load_domain(path) -> Domain:
    return Domain.from_dict(json.loads(Path(path).read_text()))


def save_domain(d: Domain, path) -> None:
    # json writes floats with shortest round-trip repr (<= 17 significant digits)
    Path(path).write_text(json.dumps(d.to_dict(), indent=2) + "\n")


def _signed_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _diameter(v: np.ndarray) -> float:
    return float(np.max(np.linalg.norm(v[:, None, :] - v[None, :, :], axis=-1)))


def _check_nondegenerate(v: np.ndarray) -> None:
    if _signed_area(v) <= 1e-14 * _diameter(v) ** 2:
        raise DegenerateDomain("polygon has (numerically) zero area")


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    return d1 * d2 < 0 and d3 * d4 < 0


def _is_simple(v: np.ndarray) -> bool:
    n = len(v)
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            if _segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]):
                return False
    return True


def has_rotational_symmetry(d: Domain, order: int) -> bool:
    if order == 1:
        return True
    if d.kind == "ellipse":
        a, b = d.semi_axes
        if a == b:
            return True
        return order == 2
    if order == ALL_ORDERS:
        return False
    v = d.vertex_array()
    c = np.array(centroid(d))
    R = Mat2.rotation(2.0 * math.pi / order).to_array()
    rotated = (v - c) @ R.T + c
    tol = SYMMETRY_TOL * max(1.0, _diameter(v))
    dist = np.linalg.norm(rotated[:, None, :] - v[None, :, :], axis=-1)
    return bool(np.all(dist.min(axis=1) <= tol))


def area(d: Domain) -> float:
    if d.kind == "ellipse":
        a, b = d.semi_axes
        return math.pi * a * b
    return _signed_area(d.vertex_array())


def centroid(d: Domain) -> tuple[float, float]:
    if d.kind == "ellipse":
        return (0.0, 0.0)
    v = d.vertex_array()
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    A = 0.5 * cross.sum()
    cx = float(np.sum((x + xn) * cross) / (6.0 * A))
    cy = float(np.sum((y + yn) * cross) / (6.0 * A))
    return cx, cy


def second_moment_about(d: Domain, point) -> float:
    """∫_d |x − point|² dx for a polygon, by an exact signed fan from ``point``."""
    v = d.vertex_array() - np.asarray(point, dtype=float)
    w = np.roll(v, -1, axis=0)
    signed = 0.5 * (v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1])
    # triangle (0, v, w): ∫|x|² = A/6 (|v|² + |w|² + v·w)
    per = signed / 6.0 * (np.sum(v * v, axis=1) + np.sum(w * w, axis=1) + np.sum(v * w, axis=1))
    return float(per.sum())


def moment_of_inertia(d: Domain) -> float:
    if d.kind == "ellipse":
        a, b = d.semi_axes
        return math.pi * a * b * (a * a + b * b) / 4.0
    return second_moment_about(d, centroid(d))


def translate(d: Domain, offset) -> Domain:
    if d.kind != "polygon":
        raise ValueError("only polygons can be translated (ellipses are origin-centred)")
    ox, oy = offset
    return Domain.polygon([(x + ox, y + oy) for x, y in d.vertices], symmetry_order=d.symmetry_order, name=d.name)


def centered(d: Domain) -> Domain:
    """Translate so the centroid sits at the origin."""
    if d.kind == "ellipse":
        return d
    cx, cy = centroid(d)
    if cx == 0.0 and cy == 0.0:
        return d
    return translate(d, (-cx, -cy))


def apply_linear_map(d: Domain, T: Mat2) -> Domain:
    """Image T(d). Symmetry is kept only when T is a scalar multiple of an orthogonal map."""
    if abs(T.det) == 0.0:
        raise SingularMap("cannot map a domain by a singular matrix")
    keep = d.symmetry_order if T.is_conformal() else None
    if d.kind == "polygon":
        verts = [T @ v for v in d.vertices]
        if T.det < 0:
            verts = verts[::-1]
        return Domain.polygon(verts, symmetry_order=keep, name=d.name)
    a, b = d.semi_axes
    if a == b:
        s1, s2 = T.singular_values()
        return Domain.ellipse(s1 * a, s2 * a, name=d.name)
    if T.a12 == 0.0 and T.a21 == 0.0:
        return Domain.ellipse(abs(T.a11) * a, abs(T.a22) * b, name=d.name)
    raise ValueError("only disks, or ellipses under diagonal maps, have axis-aligned ellipse images")


@dataclass(frozen=True)
class TransformedParameters:
    hbar_t: float
    beta_t: float
    sigma_t: float


def transformed_parameters(T: Mat2, hbar: float, beta: float, sigma: float = 0.0) -> TransformedParameters:
    """Planck constant, field strength and Robin parameter on the image domain T(D)."""
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    k = math.sqrt(2.0) / hs_norm(T.inverse())
    return TransformedParameters(k * hbar, k * beta / abs(T.det), k * sigma)


def normalized_functional(eigs: Sequence[float], d: Domain) -> float:
    """(Σ eigs) A³ / I, the flux-normalized eigenvalue-sum functional.

    The eigenvalues must have been computed at field strength flux / A(d).
    """
    if len(eigs) == 0:
        raise NoEigenvalues("need at least one eigenvalue")
    A = area(d)
    return float(sum(eigs)) * A**3 / moment_of_inertia(d)


def inertia_ratio(d: Domain) -> float:
    """Scale-invariant ratio A³/I."""
    return area(d) ** 3 / moment_of_inertia(d)


def functional_ratio_check(d: Domain, T: Mat2) -> float:
    """|2/‖T⁻¹‖²_HS − (A³/I)(T d) / (A³/I)(d)|.

    The two sides agree for rotationally symmetric d (order >= 3); for other
    domains the returned number is simply the discrepancy.
    """
    lhs = 2.0 / hs_norm(T.inverse()) ** 2
    return abs(lhs - inertia_ratio(apply_linear_map(d, T)) / inertia_ratio(d))


def regular_polygon(N: int, circumradius: float = 1.0, name: str = "") -> Domain:
    if N < 3:
        raise OrderTooLow(f"a regular polygon needs N >= 3, got {N}")
    if circumradius <= 0:
        raise DegenerateDomain("circumradius must be positive")
    angles = 2.0 * math.pi * np.arange(N) / N + math.pi / 2.0
    verts = np.column_stack([circumradius * np.cos(angles), circumradius * np.sin(angles)])
    return Domain.polygon(verts, symmetry_order=N, name=name or f"regular-{N}-gon")


def unit_square() -> Domain:
    return Domain.polygon([(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)], symmetry_order=4, name="square")


def equilateral_triangle(side: float = 1.0) -> Domain:
    return regular_polygon(3, side / math.sqrt(3.0), name="triangle")


def unit_disk() -> Domain:
    return Domain.ellipse(1.0, 1.0, name="disk")


BUILTINS = {
    "triangle": equilateral_triangle,
    "square": unit_square,
    "hexagon": lambda: regular_polygon(6, 1.0, name="hexagon"),
    "disk": unit_disk,
}


def builtin(name: str) -> Domain:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise ValueError(f"unknown builtin domain {name!r}; choose from {sorted(BUILTINS)}") from None
