"""Conforming triangle meshes with red refinement.

Convex polygons are fanned from the centroid, non-convex ones are ear-clipped,
and ellipses are replaced by an inscribed 256-gon whose boundary midpoints are
pushed back onto the ellipse at every refinement step.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DegenerateDomain, SingularMap
from .geometry import Domain, centroid
from .linalg2 import Mat2

ELLIPSE_SIDES = 256


@dataclass(frozen=True, eq=False)
class Mesh:
    vertices: np.ndarray  # (V, 2)
    triangles: np.ndarray  # (T, 3), CCW
    boundary_edges: np.ndarray  # (E, 2)
    boundary_tags: np.ndarray  # (E,), index of the polygon side each edge lies on
    level: int = 0
    # boundary curve {center + S (cos t, sin t)} for ellipse-derived meshes
    curve: Optional[tuple[Mat2, tuple[float, float]]] = None
    label: str = ""

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def boundary_vertices(self) -> np.ndarray:
        return np.unique(self.boundary_edges)

    def interior_vertices(self) -> np.ndarray:
        mask = np.ones(self.n_vertices, dtype=bool)
        mask[self.boundary_vertices()] = False
        return np.flatnonzero(mask)

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def area(self) -> float:
        return float(self.signed_areas().sum())

    def edges(self) -> np.ndarray:
        e = np.sort(self.triangles[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), axis=1)
        return np.unique(e, axis=0)

    def edge_multiplicity(self) -> tuple[np.ndarray, np.ndarray]:
        e = np.sort(self.triangles[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), axis=1)
        return np.unique(e, axis=0, return_counts=True)

    def euler_characteristic(self) -> int:
        return self.n_vertices - len(self.edges()) + self.n_triangles

    def min_angle(self) -> float:
        p = self.vertices[self.triangles]
        out = np.inf
        for i in range(3):
            a = p[:, (i + 1) % 3] - p[:, i]
            b = p[:, (i + 2) % 3] - p[:, i]
            cos = np.sum(a * b, axis=1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
            out = min(out, float(np.min(np.arccos(np.clip(cos, -1.0, 1.0)))))
        return out

    def check(self) -> None:
        """Raise AssertionError unless the mesh is positively oriented and conforming."""
        assert np.all(self.signed_areas() > 0), "non-positive triangle"
        edges, counts = self.edge_multiplicity()
        assert np.all(counts <= 2), "edge shared by more than two triangles"
        bnd = {tuple(e) for e in np.sort(self.boundary_edges, axis=1)}
        once = {tuple(e) for e in edges[counts == 1]}
        assert bnd == once, "boundary edges do not match edges used once"

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "label": self.label,
            "vertices": self.vertices.tolist(),
            "triangles": self.triangles.tolist(),
            "boundary_edges": self.boundary_edges.tolist(),
            "boundary_tags": self.boundary_tags.tolist(),
        }


def dump_mesh(m: Mesh, path) -> None:
    Path(path).write_text(json.dumps(m.to_dict()))


def _is_convex(v: np.ndarray) -> bool:
    a = np.roll(v, -1, axis=0) - v
    b = np.roll(v, -2, axis=0) - np.roll(v, -1, axis=0)
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    scale = float(np.max(np.abs(v))) ** 2
    return bool(np.all(cross >= -1e-12 * scale))


def _point_in_triangle(p, a, b, c) -> bool:
    def orient(u, v, w):
        return (v[0] - u[0]) * (w[1] - u[1]) - (v[1] - u[1]) * (w[0] - u[0])

    return orient(a, b, p) >= 0 and orient(b, c, p) >= 0 and orient(c, a, p) >= 0


def ear_clip(v: np.ndarray) -> list[tuple[int, int, int]]:
    """Triangulate a simple CCW polygon into n-2 triangles."""
    idx = list(range(len(v)))
    tris = []
    guard = 0
    while len(idx) > 3:
        n = len(idx)
        for k in range(n):
            i, j, l = idx[(k - 1) % n], idx[k], idx[(k + 1) % n]
            a, b, c = v[i], v[j], v[l]
            cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
            if cross <= 0:
                continue
            if any(_point_in_triangle(v[o], a, b, c) for o in idx if o not in (i, j, l)):
                continue
            tris.append((i, j, l))
            idx.pop(k)
            break
        else:
            raise DegenerateDomain("ear clipping failed; polygon is not simple")
        guard += 1
        if guard > 10 * len(v):
            raise DegenerateDomain("ear clipping did not terminate")
    tris.append(tuple(idx))
    return tris


def triangulate(d: Domain) -> Mesh:
    curve = None
    if d.kind == "ellipse":
        a, b = d.semi_axes
        t = 2.0 * math.pi * np.arange(ELLIPSE_SIDES) / ELLIPSE_SIDES
        poly = np.column_stack([a * np.cos(t), b * np.sin(t)])
        curve = (Mat2.diag(a, b), (0.0, 0.0))
        center = np.zeros(2)
        convex = True
    else:
        poly = d.vertex_array()
        center = np.array(centroid(d))
        convex = _is_convex(poly)
    n = len(poly)
    sides = np.arange(n)
    boundary = np.column_stack([sides, (sides + 1) % n])
    if convex:
        vertices = np.vstack([poly, center])
        triangles = np.column_stack([sides, (sides + 1) % n, np.full(n, n)])
    else:
        vertices = poly.copy()
        triangles = np.array(ear_clip(poly), dtype=np.int64)
    m = Mesh(vertices, triangles.astype(np.int64), boundary.astype(np.int64), sides.astype(np.int64),
             level=0, curve=curve, label=d.name)
    if np.any(m.signed_areas() <= 0):
        raise DegenerateDomain("triangulation produced a degenerate triangle")
    return m


def _project_to_curve(points: np.ndarray, curve) -> np.ndarray:
    S, c = curve
    S_arr = S.to_array()
    c = np.asarray(c, dtype=float)
    local = np.linalg.solve(S_arr, (points - c).T).T
    local /= np.linalg.norm(local, axis=1, keepdims=True)
    return local @ S_arr.T + c


def _refine_once(m: Mesh) -> Mesh:
    V = m.n_vertices
    tri = m.triangles
    local_edges = tri[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 3, 2)
    keys = np.sort(local_edges, axis=2)
    flat = keys.reshape(-1, 2)
    uniq, inverse = np.unique(flat, axis=0, return_inverse=True)
    mid = V + inverse.reshape(-1, 3)
    new_points = 0.5 * (m.vertices[uniq[:, 0]] + m.vertices[uniq[:, 1]])

    # edge id lookup for boundary splitting
    code = uniq[:, 0] * (V + 1) + uniq[:, 1]
    b_sorted = np.sort(m.boundary_edges, axis=1)
    b_ids = np.searchsorted(code, b_sorted[:, 0] * (V + 1) + b_sorted[:, 1])
    if m.curve is not None:
        new_points[b_ids] = _project_to_curve(new_points[b_ids], m.curve)

    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    mab, mbc, mca = mid[:, 0], mid[:, 1], mid[:, 2]
    children = np.stack(
        [
            np.column_stack([a, mab, mca]),
            np.column_stack([mab, b, mbc]),
            np.column_stack([mca, mbc, c]),
            np.column_stack([mab, mbc, mca]),
        ],
        axis=1,
    ).reshape(-1, 3)

    bm = V + b_ids
    p, q = m.boundary_edges[:, 0], m.boundary_edges[:, 1]
    new_bnd = np.stack([np.column_stack([p, bm]), np.column_stack([bm, q])], axis=1).reshape(-1, 2)
    new_tags = np.repeat(m.boundary_tags, 2)
    return Mesh(np.vstack([m.vertices, new_points]), children, new_bnd, new_tags,
                level=m.level + 1, curve=m.curve, label=m.label)


def refine(m: Mesh, k: int = 1) -> Mesh:
    """k rounds of red refinement (each triangle split into four)."""
    if k < 0:
        raise ValueError("refinement count must be non-negative")
    for _ in range(k):
        m = _refine_once(m)
    return m


def map_mesh(m: Mesh, T: Mat2) -> Mesh:
    """Push the mesh forward by x -> T x, keeping triangles CCW."""
    if T.det == 0.0:
        raise SingularMap("cannot map a mesh by a singular matrix")
    Ta = T.to_array()
    tri = m.triangles
    bnd = m.boundary_edges
    if T.det < 0:
        tri = tri[:, [0, 2, 1]]
        bnd = bnd[:, ::-1]
    curve = None
    if m.curve is not None:
        S, c = m.curve
        curve = (T @ S, T @ c)
    return replace(m, vertices=m.vertices @ Ta.T, triangles=tri.copy(), boundary_edges=bnd.copy(), curve=curve)


def translate_mesh(m: Mesh, offset) -> Mesh:
    off = np.asarray(offset, dtype=float)
    curve = None
    if m.curve is not None:
        S, c = m.curve
        curve = (S, (c[0] + off[0], c[1] + off[1]))
    return replace(m, vertices=m.vertices + off, curve=curve)


def mesh_domain(d: Domain, level: int) -> Mesh:
    return refine(triangulate(d), level)
