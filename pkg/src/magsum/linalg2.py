"""Real 2x2 matrix algebra and rotation-group averages.

Everything here is scalar Python arithmetic on four floats. The averages
over the cyclic rotation group of order N are computed by explicit
summation so they can be compared against the closed forms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import NotUnitVector, OrderTooLow, SingularMap, TraceNotZero

Vec2 = tuple[float, float]


@dataclass(frozen=True)
class Mat2:
    """Row-major 2x2 real matrix ``[[a11, a12], [a21, a22]]``."""

    a11: float
    a12: float
    a21: float
    a22: float

    @classmethod
    def identity(cls) -> Mat2:
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def zero(cls) -> Mat2:
        return cls(0.0, 0.0, 0.0, 0.0)

    @classmethod
    def diag(cls, d1: float, d2: float) -> Mat2:
        return cls(float(d1), 0.0, 0.0, float(d2))

    @classmethod
    def rotation(cls, angle: float) -> Mat2:
        c, s = math.cos(angle), math.sin(angle)
        return cls(c, -s, s, c)

    @classmethod
    def shear(cls, s: float) -> Mat2:
        return cls(1.0, float(s), 0.0, 1.0)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]]) -> Mat2:
        (a, b), (c, d) = rows
        return cls(float(a), float(b), float(c), float(d))

    @property
    def rows(self) -> tuple[Vec2, Vec2]:
        return (self.a11, self.a12), (self.a21, self.a22)

    def entries(self) -> tuple[float, float, float, float]:
        return self.a11, self.a12, self.a21, self.a22

    def __iter__(self) -> Iterator[float]:
        return iter(self.entries())

    def to_array(self):
        import numpy as np

        return np.array(self.rows, dtype=float)

    @property
    def det(self) -> float:
        return self.a11 * self.a22 - self.a12 * self.a21

    @property
    def trace(self) -> float:
        return self.a11 + self.a22

    @property
    def T(self) -> Mat2:
        return Mat2(self.a11, self.a21, self.a12, self.a22)

    def inverse(self) -> Mat2:
        d = self.det
        if d == 0.0 or not math.isfinite(d):
            raise SingularMap(f"matrix {self.rows} is singular")
        return Mat2(self.a22 / d, -self.a12 / d, -self.a21 / d, self.a11 / d)

    def __add__(self, other: Mat2) -> Mat2:
        return Mat2(*(x + y for x, y in zip(self, other)))

    def __sub__(self, other: Mat2) -> Mat2:
        return Mat2(*(x - y for x, y in zip(self, other)))

    def __neg__(self) -> Mat2:
        return Mat2(*(-x for x in self))

    def __mul__(self, k: float) -> Mat2:
        return Mat2(*(k * x for x in self))

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, Mat2):
            a, b, c, d = self
            e, f, g, h = other
            return Mat2(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
        x, y = other
        return (self.a11 * x + self.a12 * y, self.a21 * x + self.a22 * y)

    def max_abs_diff(self, other: Mat2) -> float:
        return max(abs(x - y) for x, y in zip(self, other))

    def singular_values(self) -> tuple[float, float]:
        """Singular values in decreasing order."""
        a, b, c, d = self
        # split into conformal and anti-conformal parts; no cancellation near s1 = s2
        h = math.hypot(a + d, c - b)
        g = math.hypot(a - d, b + c)
        return 0.5 * (h + g), 0.5 * abs(h - g)

    def is_conformal(self, rtol: float = 1e-12) -> bool:
        """True when the matrix is a nonzero scalar multiple of an orthogonal matrix."""
        s1, s2 = self.singular_values()
        return s1 > 0 and (s1 - s2) <= rtol * s1


IDENTITY = Mat2.identity()
# F(x) = beta * (M x)^T for the symmetric gauge
HALF_QUARTER_TURN = Mat2(0.0, -0.5, 0.5, 0.0)


def hs_norm(M: Mat2) -> float:
    return math.sqrt(sum(x * x for x in M))


def hs_inverse_identity_check(T: Mat2) -> float:
    """|‖T⁻¹‖_HS − ‖T‖_HS/|det T||, which vanishes for every invertible 2x2 T."""
    Tinv = T.inverse()
    return abs(hs_norm(Tinv) - hs_norm(T) / abs(T.det))


class RotationGroup:
    """Cyclic group of rotations by 2πm/N, m = 1..N."""

    def __init__(self, order: int):
        if order < 1:
            raise OrderTooLow(f"rotation group order must be positive, got {order}")
        self.order = int(order)
        self.members = tuple(Mat2.rotation(2.0 * math.pi * m / order) for m in range(1, order + 1))

    def __len__(self) -> int:
        return self.order

    def __iter__(self) -> Iterator[Mat2]:
        return iter(self.members)

    def __getitem__(self, m: int) -> Mat2:
        """U_m for m = 1..N (indices taken mod N)."""
        return self.members[(m - 1) % self.order]

    def closure_error(self) -> float:
        """Largest entrywise deviation from U_N = Id, U_1 U_m = U_{m+1} and U_m U_m† = Id."""
        err = self[self.order].max_abs_diff(IDENTITY)
        for m in range(1, self.order + 1):
            U = self[m]
            err = max(err, (U @ U.T).max_abs_diff(IDENTITY))
            err = max(err, (self[1] @ U).max_abs_diff(self[m + 1]))
        return err


def _require_order(N: int) -> None:
    if N < 3:
        raise OrderTooLow(f"the rotation average identities need N >= 3, got N={N}")


def rotation_average(M: Mat2, N: int) -> Mat2:
    """(1/N) Σ U_m M U_m† by explicit summation, for any N >= 1.

    Unlike :func:`frame_average` this does not enforce N >= 3, so it can be used
    to exhibit the failure of the closed form for N = 1, 2.
    """
    acc = [0.0, 0.0, 0.0, 0.0]
    for U in RotationGroup(N):
        term = U @ M @ U.T
        for i, x in enumerate(term):
            acc[i] += x
    return Mat2(*(x / N for x in acc))


def frame_average(M: Mat2, N: int) -> Mat2:
    _require_order(N)
    return rotation_average(M, N)


def frame_average_closed_form(M: Mat2) -> Mat2:
    """(½ tr M) Id + ½ (M − M†)."""
    return 0.5 * M.trace * IDENTITY + 0.5 * (M - M.T)


def frame_consequences(T: Mat2, M: Mat2, N: int, include_third: bool = True):
    """Explicitly summed rotation averages of T⁻¹T⁻†, T†M†MT and T⁻¹MT.

    Returns a 3-tuple; the third entry is None when ``include_third`` is false.
    The third average only has the antisymmetric closed form when tr M = 0.
    """
    _require_order(N)
    Tinv = T.inverse()
    first = rotation_average(Tinv @ Tinv.T, N)
    second = rotation_average(T.T @ M.T @ M @ T, N)
    third = None
    if include_third:
        if abs(M.trace) > 1e-14:
            raise TraceNotZero(f"tr M = {M.trace!r} but the third identity needs tr M = 0")
        third = rotation_average(Tinv @ M @ T, N)
    return first, second, third


def frame_consequences_closed_form(T: Mat2, M: Mat2):
    Tinv = T.inverse()
    K = Tinv @ M @ T
    return (
        0.5 * hs_norm(Tinv) ** 2 * IDENTITY,
        0.5 * hs_norm(M @ T) ** 2 * IDENTITY,
        0.5 * (K - K.T),
    )


def _require_unit(y: Vec2) -> tuple[float, float]:
    y1, y2 = float(y[0]), float(y[1])
    if abs(math.hypot(y1, y2) - 1.0) > 1e-12:
        raise NotUnitVector(f"|y| = {math.hypot(y1, y2)!r}, expected 1")
    return y1, y2


def frame_scalar_identity(T: Mat2, y: Vec2, N: int) -> float:
    """(1/N) Σ |T U_m⁻¹ y|², which equals ½‖T‖²_HS for N >= 3."""
    _require_order(N)
    return rotation_scalar_sum(T, _require_unit(y), N)


def rotation_scalar_sum(T: Mat2, y: Vec2, N: int) -> float:
    """(1/N) Σ |T U_m⁻¹ y|² without the N >= 3 or |y| = 1 preconditions."""
    total = 0.0
    for U in RotationGroup(N):
        v = T @ (U.T @ y)
        total += v[0] ** 2 + v[1] ** 2
    return total / N


def tight_frame_constant(x: Vec2, y: Vec2, N: int) -> float:
    """Σ |x · U_m y|² over the N rotations; equals (N/2)|x|² for N >= 3."""
    _require_order(N)
    return rotation_frame_sum(x, _require_unit(y), N)


def rotation_frame_sum(x: Vec2, y: Vec2, N: int) -> float:
    """Σ |x · U_m y|² without the N >= 3 or |y| = 1 preconditions."""
    total = 0.0
    for U in RotationGroup(N):
        u = U @ y
        total += (x[0] * u[0] + x[1] * u[1]) ** 2
    return total
