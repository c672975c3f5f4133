"""Fixture billiards used by the tests, demos and acceptance runs."""

from __future__ import annotations

import numpy as np

from .invisibility import confocal_parabolas
from .mirrors import Mirror, contains_isotropic_infinity
from .orbits import Billiard


def unit_circle(label: str = "circle") -> Mirror:
    return Mirror.circle(0.0, 0.0, 1.0, label=label)


def circle_triple() -> Billiard:
    c = unit_circle()
    return Billiard([c, c, c])


def lens_billiard() -> Billiard:
    """Two confocal parabolas bouncing P1, P2, P1, P2 (a 4-reflective pair)."""
    p1, p2 = confocal_parabolas()
    return Billiard([p1, p2, p1, p2])


def invisible_quad() -> Billiard:
    """The four mirrors met by a downward ray through the two-parabola body."""
    p1, p2 = confocal_parabolas()
    q1, q2 = confocal_parabolas(shift=-5.0, suffix="'")
    return Billiard([p1, p2, q1, q2])


def isotropic_pair_conic(label: str = "Z") -> Mirror:
    """(x + iy)^2 + 1 = 0, the pair of lines x + iy = +-i through I1.

    A generic line of the pencil through I1 misses it in the finite plane.
    """
    return Mirror.conic(1.0, 2j, -1.0, 0.0, 0.0, 1.0, label=label)


def parabola(label: str = "parabola") -> Mirror:
    return Mirror.graph([0.0, 0.0, 1.0], label=label)


def random_line(rng: np.random.Generator, label: str = "L", complex_coeffs: bool = True) -> Mirror:
    while True:
        v = rng.normal(size=3) + (1j * rng.normal(size=3) if complex_coeffs else 0)
        if min(abs(v[0] + 1j * v[1]), abs(v[0] - 1j * v[1])) > 0.1 * np.linalg.norm(v[:2]):
            return Mirror.line(*v, label=label)


def random_conic(rng: np.random.Generator, label: str = "Q") -> Mirror:
    """A smooth conic whose equation does not vanish at either circular point."""
    while True:
        A, B, C, D, E, F = rng.normal(size=6) + 0.3j * rng.normal(size=6)
        # value at (1 : +-i : 0) is A +- iB - C
        if min(abs(A + 1j * B - C), abs(A - 1j * B - C)) < 0.2:
            continue
        M = np.array([[A, B / 2, D / 2], [B / 2, C, E / 2], [D / 2, E / 2, F]])
        if abs(np.linalg.det(M)) < 0.05:
            continue
        return Mirror.conic(A, B, C, D, E, F, label=label)


def random_odd_billiard(rng: np.random.Generator, k: int) -> Billiard:
    """Random lines and conics avoiding both circular points."""
    mirrors = []
    for j in range(k):
        m = random_line(rng, f"L{j}") if rng.random() < 0.5 else random_conic(rng, f"Q{j}")
        assert contains_isotropic_infinity(m) == (False, False)
        mirrors.append(m)
    return Billiard(mirrors)
