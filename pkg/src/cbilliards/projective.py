"""Complex projective plane CP^2 with the complexified Euclidean form.

Points are homogeneous triples ``(x : y : t)``; the affine chart is ``t != 0``
and the infinity line is ``t = 0``. Lines are coefficient triples
``(a, b, c)`` with incidence ``a*x + b*y + c*t = 0``.

The quadratic form ``dz1^2 + dz2^2`` is complex-bilinear (no conjugation), so
it vanishes on the two isotropic directions ``(1, +-i)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

EQ_TOL = 1e-12
ISOTROPY_TOL = 1e-10


class ProjectiveError(ValueError):
    """Base class for degenerate projective configurations."""


class CoincidentError(ProjectiveError):
    """Two points (or two lines) that should be distinct coincide."""


def _triple(values: Sequence[complex]) -> tuple[complex, complex, complex]:
    arr = np.asarray(values, dtype=complex).reshape(-1)
    if arr.size != 3:
        raise ValueError(f"expected 3 homogeneous coordinates, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("homogeneous coordinates must be finite numbers")
    if not np.any(arr != 0):
        raise ValueError("homogeneous coordinates must not all vanish")
    return tuple(complex(v) for v in arr)  # type: ignore[return-value]


def _normalize(arr: np.ndarray) -> np.ndarray:
    return arr / arr[np.argmax(np.abs(arr))]


def chordal(u: np.ndarray, v: np.ndarray) -> float:
    """Sine of the Fubini-Study angle between two nonzero complex vectors.

    Computed from the 2x2 minors, which keeps it accurate near zero.
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    u, v = u / nu, v / nv
    minors = np.outer(u, v) - np.outer(v, u)
    return float(np.sqrt(np.sum(np.abs(minors) ** 2) / 2.0))


def _complex_json(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


@dataclass(frozen=True, eq=False)
class PPoint:
    """Point of CP^2 given by homogeneous coordinates (x : y : t)."""

    coords: tuple[complex, complex, complex]

    def __init__(self, coords: Sequence[complex]):
        object.__setattr__(self, "coords", _triple(coords))

    @classmethod
    def affine(cls, x: complex, y: complex) -> PPoint:
        return cls((x, y, 1.0))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coords, dtype=complex)

    def normalized(self) -> np.ndarray:
        """Representative whose maximum-modulus coordinate equals 1."""
        return _normalize(self.array)

    def is_finite(self, tol: float = EQ_TOL) -> bool:
        a = self.array
        return abs(a[2]) > tol * np.linalg.norm(a)

    def to_affine(self) -> np.ndarray:
        if not self.is_finite():
            raise ProjectiveError("point at infinity has no affine coordinates")
        a = self.array
        return a[:2] / a[2]

    def distance(self, other: PPoint) -> float:
        return chordal(self.array, other.array)

    def same_as(self, other: PPoint, tol: float = EQ_TOL) -> bool:
        return self.distance(other) < tol

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PPoint):
            return NotImplemented
        return self.same_as(other)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        x, y, t = self.coords
        return f"PPoint({x:.6g} : {y:.6g} : {t:.6g})"

    def to_json(self) -> list[list[float]]:
        return [_complex_json(z) for z in self.coords]

    @classmethod
    def from_json(cls, data: Sequence[Sequence[float]]) -> PPoint:
        return cls([complex(re, im) for re, im in data])


@dataclass(frozen=True, eq=False)
class PLine:
    """Line a*x + b*y + c*t = 0 of CP^2."""

    coeffs: tuple[complex, complex, complex]

    def __init__(self, coeffs: Sequence[complex]):
        object.__setattr__(self, "coeffs", _triple(coeffs))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=complex)

    def normalized(self) -> np.ndarray:
        return _normalize(self.array)

    def contains(self, p: PPoint, tol: float = 1e-10) -> bool:
        l, q = self.array, p.array
        return abs(l @ q) <= tol * np.linalg.norm(l) * np.linalg.norm(q)

    def is_infinity(self, tol: float = EQ_TOL) -> bool:
        a = self.array
        return np.linalg.norm(a[:2]) <= tol * np.linalg.norm(a)

    def direction(self) -> Dir2:
        """Affine direction vector (-b, a) of a finite line."""
        if self.is_infinity():
            raise ProjectiveError("the infinity line has no affine direction")
        a, b, _ = self.coeffs
        return Dir2(-b, a)

    def distance(self, other: PLine) -> float:
        return chordal(self.array, other.array)

    def same_as(self, other: PLine, tol: float = EQ_TOL) -> bool:
        return self.distance(other) < tol

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PLine):
            return NotImplemented
        return self.same_as(other)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        a, b, c = self.coeffs
        return f"PLine({a:.6g}, {b:.6g}, {c:.6g})"

    def to_json(self) -> list[list[float]]:
        return [_complex_json(z) for z in self.coeffs]

    @classmethod
    def from_json(cls, data: Sequence[Sequence[float]]) -> PLine:
        return cls([complex(re, im) for re, im in data])


@dataclass(frozen=True, eq=False)
class Dir2:
    """Nonzero affine direction (dx, dy); its point at infinity is (dx : dy : 0)."""

    dx: complex
    dy: complex

    def __init__(self, dx: complex, dy: complex):
        dx, dy = complex(dx), complex(dy)
        if dx == 0 and dy == 0:
            raise ValueError("direction must be nonzero")
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "dy", dy)

    @classmethod
    def of(cls, v: Sequence[complex]) -> Dir2:
        return cls(v[0], v[1])

    @property
    def array(self) -> np.ndarray:
        return np.array([self.dx, self.dy], dtype=complex)

    def at_infinity(self) -> PPoint:
        return PPoint((self.dx, self.dy, 0.0))

    def distance(self, other: Dir2) -> float:
        """Chordal (projective) distance; ignores scale."""
        return chordal(self.array, other.array)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dir2):
            return NotImplemented
        return self.distance(other) < EQ_TOL

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Dir2({self.dx:.6g}, {self.dy:.6g})"


I1 = PPoint((1.0, 1j, 0.0))
I2 = PPoint((1.0, -1j, 0.0))
INFINITY_LINE = PLine((0.0, 0.0, 1.0))


def bilinear_form(u: Dir2, v: Dir2) -> complex:
    """Complexified Euclidean form u.dx*v.dx + u.dy*v.dy (no conjugation)."""
    return u.dx * v.dx + u.dy * v.dy


def join(p: PPoint, q: PPoint) -> PLine:
    """Line through two distinct points."""
    pa, qa = p.array, q.array
    cross = np.cross(pa / np.linalg.norm(pa), qa / np.linalg.norm(qa))
    if np.linalg.norm(cross) < EQ_TOL:
        raise CoincidentError(f"cannot join coincident points {p} and {q}")
    return PLine(cross)


def meet(l1: PLine, l2: PLine) -> PPoint:
    """Intersection point of two distinct lines."""
    a1, a2 = l1.array, l2.array
    cross = np.cross(a1 / np.linalg.norm(a1), a2 / np.linalg.norm(a2))
    if np.linalg.norm(cross) < EQ_TOL:
        raise CoincidentError(f"cannot meet coincident lines {l1} and {l2}")
    return PPoint(cross)


def is_isotropic_direction(u: Dir2, tol: float = ISOTROPY_TOL) -> bool:
    return abs(bilinear_form(u, u)) < tol * (abs(u.dx) ** 2 + abs(u.dy) ** 2)


def is_isotropic_line(l: PLine, tol: float = ISOTROPY_TOL) -> bool:
    """True for the infinity line and for lines through I1 or I2."""
    if l.is_infinity():
        return True
    return is_isotropic_direction(l.direction(), tol)


def infinity_point_of(l: PLine) -> PPoint:
    if l.is_infinity():
        raise ProjectiveError("the infinity line has no distinguished point at infinity")
    return meet(l, INFINITY_LINE)
