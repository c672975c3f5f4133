"""Complex symmetry with respect to a line, and its degenerate isotropic limit.

For a non-isotropic axis with direction v the symmetry acts on directions by

    sigma(u) = 2 <u, v> / <v, v> * v - u

with the bilinear (conjugation-free) form <., .>. It is a complex isometry,
an involution, and fixes the axis pointwise. For an isotropic axis only the
limit rule survives: a pair of lines is symmetric iff one of them is the axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .projective import (
    ISOTROPY_TOL,
    Dir2,
    PLine,
    PPoint,
    ProjectiveError,
    is_isotropic_direction,
    is_isotropic_line,
    join,
)


class IsotropicAxisError(ProjectiveError):
    """The requested symmetry axis is (numerically) isotropic."""


class IncidenceError(ProjectiveError):
    """A point that must lie on a line does not."""


@dataclass(frozen=True, eq=False)
class Involution:
    axis: PLine
    base_point: PPoint
    dir: Dir2

    def __post_init__(self):
        if self.axis.is_infinity() or is_isotropic_direction(self.dir, ISOTROPY_TOL):
            raise IsotropicAxisError(f"axis {self.axis} is isotropic")
        if not self.base_point.is_finite():
            raise ValueError("base point of a symmetry must be finite")
        if not self.axis.contains(self.base_point):
            raise IncidenceError("base point is not on the axis")

    @classmethod
    def from_line(cls, axis: PLine) -> Involution:
        if is_isotropic_line(axis):
            raise IsotropicAxisError(f"axis {axis} is isotropic")
        a, b, c = axis.coeffs
        # a^2 + b^2 != 0 off the isotropic case, so this finite point exists
        s = -c / (a * a + b * b)
        return cls(axis, PPoint.affine(s * a, s * b), axis.direction())

    @classmethod
    def through(cls, point: PPoint, direction: Dir2) -> Involution:
        if is_isotropic_direction(direction):
            raise IsotropicAxisError(f"direction {direction} is isotropic")
        p = point.to_affine()
        q = p + direction.array
        return cls(join(point, PPoint.affine(*q)), point, direction)


def _axis_dir(inv: Involution | Dir2) -> Dir2:
    v = inv.dir if isinstance(inv, Involution) else inv
    if is_isotropic_direction(v):
        raise IsotropicAxisError(f"axis direction {v} is isotropic")
    return v


def reflect_vector(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Array version of the direction symmetry; no isotropy check."""
    return 2.0 * (u @ v) / (v @ v) * v - u


def reflect_direction(u: Dir2, inv: Involution | Dir2) -> Dir2:
    """Image of direction ``u`` under the symmetry with axis direction ``inv``.

    ``inv`` may be an :class:`Involution` or just the axis direction.
    """
    v = _axis_dir(inv)
    return Dir2.of(reflect_vector(u.array, v.array))


def reflect_point(x: PPoint, inv: Involution) -> PPoint:
    if not x.is_finite():
        raise ProjectiveError("reflect_point needs a finite point; use reflect_direction")
    v = _axis_dir(inv).array
    p = inv.base_point.to_affine()
    return PPoint.affine(*(p + reflect_vector(x.to_affine() - p, v)))


def reflect_line_at(m: PLine, x: PPoint, inv: Involution) -> PLine:
    """Image of the line ``m`` through the axis point ``x``."""
    if not (m.contains(x) and inv.axis.contains(x)):
        raise IncidenceError("x must lie on both the line and the axis")
    u = reflect_direction(m.direction(), inv)
    p = x.to_affine()
    return join(x, PPoint.affine(*(p + u.array)))


def is_symmetric_pair(l1: PLine, l2: PLine, L: PLine, x: PPoint, tol: float = 1e-9) -> bool:
    """Whether lines l1, l2 through x are symmetric with respect to L.

    For isotropic L this is the limit rule: one of l1, l2 equals L.
    """
    for line in (l1, l2, L):
        if not line.contains(x, tol):
            raise IncidenceError(f"{line} does not pass through {x}")
    if is_isotropic_line(L):
        return l1.distance(L) < tol or l2.distance(L) < tol
    image = reflect_line_at(l1, x, Involution.through(x, L.direction()))
    return image.distance(l2) < tol


def direction_distance(u: Dir2, v: Dir2) -> float:
    """Chordal distance between directions; the projective metric used in limits."""
    return u.distance(v)

