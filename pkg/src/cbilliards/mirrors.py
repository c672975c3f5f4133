"""Algebraic plane curves used as billiard mirrors."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _poly
from ._poly import EliminationError
from .projective import (
    I1,
    I2,
    Dir2,
    PLine,
    PPoint,
    ProjectiveError,
    is_isotropic_line,
)

ON_CURVE_TOL = 1e-8
SINGULAR_TOL = 1e-8
MULTIPLICITY_RADIUS = 1e-7


class MirrorError(ValueError):
    """Invalid mirror definition."""


class IsotropicMirrorError(MirrorError):
    """Mirrors may not be isotropic lines."""


class SingularPointError(ProjectiveError):
    """The curve gradient vanishes (or nearly) where a tangent is needed."""


class LineInCurveError(ProjectiveError):
    """The line is a component of the curve."""


class ProjectionError(ProjectiveError):
    """Newton projection onto the curve diverged."""


def _cjson(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


@dataclass(frozen=True, eq=False)
class RationalParam:
    """s -> (x(s) : y(s) : t(s)), each component given by ascending coefficients."""

    x: tuple[complex, ...]
    y: tuple[complex, ...]
    t: tuple[complex, ...]

    def __init__(self, x: Sequence[complex], y: Sequence[complex], t: Sequence[complex]):
        for name, c in (("x", x), ("y", y), ("t", t)):
            object.__setattr__(self, name, tuple(complex(v) for v in c) or (0j,))

    def __call__(self, s: complex) -> np.ndarray:
        return np.array([np.polyval(c[::-1], s) for c in (self.x, self.y, self.t)], dtype=complex)

    def point(self, s: complex) -> PPoint:
        return PPoint(self(s))

    def affine(self, s: complex) -> np.ndarray:
        h = self(s)
        return h[:2] / h[2]

    def rescaled(self, factor: complex) -> RationalParam:
        """Parametrization s -> old(factor * s)."""
        def sc(c):
            return [v * factor**k for k, v in enumerate(c)]
        return RationalParam(sc(self.x), sc(self.y), sc(self.t))

    def mapped(self, M: np.ndarray, shift) -> RationalParam:
        """Compose with the affine map z -> M z + shift (in homogeneous form)."""
        n = max(len(self.x), len(self.y), len(self.t))
        X, Y, T = (np.pad(np.array(c), (0, n - len(c))) for c in (self.x, self.y, self.t))
        nx = M[0, 0] * X + M[0, 1] * Y + shift[0] * T
        ny = M[1, 0] * X + M[1, 1] * Y + shift[1] * T
        return RationalParam(nx, ny, T)

    def to_json(self) -> dict:
        return {k: [_cjson(v) for v in getattr(self, k)] for k in ("x", "y", "t")}

    @classmethod
    def from_json(cls, data: Mapping) -> RationalParam:
        return cls(*[[complex(re, im) for re, im in data[k]] for k in ("x", "y", "t")])


@dataclass(frozen=True, eq=False)
class Mirror:
    """Plane algebraic curve F(x, y, t) = 0.

    ``coeffs[i, j]`` multiplies ``x**i * y**j * t**(d - i - j)``; setting
    ``t = 1`` gives the affine polynomial with the same table.
    """

    coeffs: np.ndarray
    label: str = "mirror"
    param: RationalParam | None = None
    arcs: tuple[tuple[float, float], ...] = ()
    _dx: np.ndarray = field(init=False, repr=False)
    _dy: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        C = _poly.trim(np.asarray(self.coeffs, dtype=complex))
        d = _poly.total_degree(C)
        if d < 1:
            raise MirrorError("mirror polynomial must have degree >= 1")
        if not np.all(np.isfinite(C)):
            raise MirrorError("mirror coefficients must be finite")
        C.setflags(write=False)
        object.__setattr__(self, "coeffs", C)
        object.__setattr__(self, "arcs", tuple((float(a), float(b)) for a, b in self.arcs))
        object.__setattr__(self, "_dx", _poly.deriv_x(C))
        object.__setattr__(self, "_dy", _poly.deriv_y(C))
        if d == 1 and is_isotropic_line(PLine((C[1, 0], C[0, 1], C[0, 0]))):
            raise IsotropicMirrorError(f"mirror {self.label!r} is an isotropic line")
        if self.param is not None:
            for s in (0.3, -0.7 + 0.2j, 1.1, 2.5j, -1.9 - 0.4j):
                h = self.param(s)
                if abs(self.value_h(h)) > 1e-9 * self.scale * max(np.linalg.norm(h), 1e-300) ** d:
                    raise MirrorError(f"parametrization of {self.label!r} does not lie on the curve")

    # construction -----------------------------------------------------------

    @classmethod
    def from_terms(cls, terms: Mapping[tuple[int, int], complex], **kw) -> Mirror:
        """Build from affine monomials {(i, j): coefficient of x^i y^j}."""
        d = max(i + j for i, j in terms)
        C = np.zeros((d + 1, d + 1), dtype=complex)
        for (i, j), c in terms.items():
            C[i, j] += c
        return cls(C, **kw)

    @classmethod
    def line(cls, a: complex, b: complex, c: complex, label: str = "line") -> Mirror:
        """Line a x + b y + c = 0 with the unit-speed parametrization."""
        n = np.sqrt(abs(a) ** 2 + abs(b) ** 2)
        if n == 0:
            raise MirrorError("degenerate line")
        s2 = a * a + b * b
        if abs(s2) < 1e-10 * n * n:
            raise IsotropicMirrorError(f"mirror {label!r} is an isotropic line")
        p0 = (-c * a / s2, -c * b / s2)
        direction = (-b / n, a / n)
        param = RationalParam([p0[0], direction[0]], [p0[1], direction[1]], [1.0])
        return cls.from_terms({(1, 0): a, (0, 1): b, (0, 0): c}, label=label, param=param)

    @classmethod
    def circle(cls, cx: float = 0.0, cy: float = 0.0, r: float = 1.0, label: str = "circle") -> Mirror:
        # s = tan(angle / 2)
        param = RationalParam([cx + r, 0, cx - r], [cy, 2 * r, cy], [1, 0, 1])
        terms = {(2, 0): 1, (0, 2): 1, (1, 0): -2 * cx, (0, 1): -2 * cy,
                 (0, 0): cx * cx + cy * cy - r * r}
        return cls.from_terms(terms, label=label, param=param)

    @classmethod
    def graph(cls, coeffs: Sequence[complex], label: str = "graph") -> Mirror:
        """Curve y = sum coeffs[k] x^k, parametrized by s = x."""
        terms: dict[tuple[int, int], complex] = {(0, 1): -1}
        for k, c in enumerate(coeffs):
            terms[(k, 0)] = terms.get((k, 0), 0) + c
        param = RationalParam([0, 1], list(coeffs), [1])
        return cls.from_terms(terms, label=label, param=param)

    @classmethod
    def conic(cls, A, B, C, D, E, F, label: str = "conic") -> Mirror:
        """A x^2 + B xy + C y^2 + D x + E y + F = 0 (no parametrization)."""
        return cls.from_terms({(2, 0): A, (1, 1): B, (0, 2): C, (1, 0): D, (0, 1): E, (0, 0): F},
                              label=label)

    def relabeled(self, label: str) -> Mirror:
        return Mirror(self.coeffs, label=label, param=self.param, arcs=self.arcs)

    def with_param(self, param: RationalParam | None) -> Mirror:
        return Mirror(self.coeffs, label=self.label, param=param, arcs=self.arcs)

    def affine_image(self, M, shift=(0.0, 0.0), label: str | None = None) -> Mirror:
        """Image of the curve under z -> M z + shift (M invertible)."""
        M = np.asarray(M, dtype=complex)
        shift = np.asarray(shift, dtype=complex)
        Minv = np.linalg.inv(M)
        C = _poly.compose_affine(self.coeffs, Minv, -Minv @ shift)
        param = None if self.param is None else self.param.mapped(M, shift)
        return Mirror(C, label=label or self.label, param=param, arcs=self.arcs)

    # evaluation -------------------------------------------------------------

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def scale(self) -> float:
        return float(np.abs(self.coeffs).sum())

    def value_h(self, h) -> complex:
        """Homogeneous value F(x, y, t)."""
        x, y, t = np.asarray(h, dtype=complex)
        d = self.degree
        total = 0j
        for i, j in zip(*np.nonzero(self.coeffs)):
            total += self.coeffs[i, j] * x**i * y**j * t ** (d - i - j)
        return complex(total)

    def gradient_h(self, h) -> np.ndarray:
        x, y, t = np.asarray(h, dtype=complex)
        d = self.degree
        g = np.zeros(3, dtype=complex)
        for i, j in zip(*np.nonzero(self.coeffs)):
            c = self.coeffs[i, j]
            k = d - i - j
            if i:
                g[0] += c * i * x ** (i - 1) * y**j * t**k
            if j:
                g[1] += c * j * x**i * y ** (j - 1) * t**k
            if k:
                g[2] += c * k * x**i * y**j * t ** (k - 1)
        return g

    def value(self, z) -> complex:
        """Affine value F(x, y, 1)."""
        return complex(_poly.evaluate(self.coeffs, z[0], z[1]))

    def gradient(self, z) -> np.ndarray:
        """Affine gradient (F_x, F_y)."""
        return np.array([_poly.evaluate(self._dx, z[0], z[1]),
                         _poly.evaluate(self._dy, z[0], z[1])], dtype=complex)

    def residual(self, p: PPoint) -> float:
        """|F(p)| relative to coefficient scale and |p|^d."""
        h = p.array
        return abs(self.value_h(h)) / (self.scale * np.linalg.norm(h) ** self.degree)

    def contains(self, p: PPoint, tol: float = ON_CURVE_TOL) -> bool:
        return self.residual(p) <= tol

    def same_curve(self, other: Mirror, tol: float = 1e-10) -> bool:
        if self.degree != other.degree:
            return False
        a, b = self.coeffs.ravel(), other.coeffs.ravel()
        return _chordal_vec(a, b) < tol

    # serialization ----------------------------------------------------------

    def to_json(self) -> dict:
        out: dict = {
            "label": self.label,
            "degree": self.degree,
            "coeffs": [[int(i), int(j), _cjson(self.coeffs[i, j])]
                       for i, j in zip(*np.nonzero(self.coeffs))],
        }
        if self.param is not None:
            out["param"] = self.param.to_json()
        if self.arcs:
            out["arcs"] = [list(a) for a in self.arcs]
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> Mirror:
        d = int(data["degree"])
        C = np.zeros((d + 1, d + 1), dtype=complex)
        for i, j, (re, im) in data["coeffs"]:
            if i < 0 or j < 0 or i + j > d:
                raise MirrorError(f"monomial ({i}, {j}) exceeds degree {d}")
            C[i, j] += complex(re, im)
        param = RationalParam.from_json(data["param"]) if data.get("param") else None
        arcs = tuple(tuple(a) for a in data.get("arcs", ()))
        m = cls(C, label=str(data["label"]), param=param, arcs=arcs)
        if m.degree != d:
            raise MirrorError(f"declared degree {d} but polynomial has degree {m.degree}")
        return m

    def __repr__(self) -> str:
        return f"Mirror({self.label!r}, degree={self.degree})"


def _chordal_vec(a: np.ndarray, b: np.ndarray) -> float:
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    ip = np.vdot(b, a)
    phase = ip / abs(ip) if abs(ip) > 0 else 1.0
    # distance after aligning phases; avoids the cancellation in 1 - |<a,b>|^2
    return float(np.linalg.norm(a - phase * b))


@dataclass(frozen=True, eq=False)
class CurvePoint:
    """A vertex on a mirror together with the tangent line of its branch.

    ``seed`` carries the local parameter (parametrization value) when known.
    """

    mirror: Mirror
    point: PPoint
    tangent: PLine
    seed: complex | None = None

    @classmethod
    def on(cls, mirror: Mirror, point: PPoint, seed: complex | None = None,
           tol: float = ON_CURVE_TOL) -> CurvePoint:
        if not mirror.contains(point, tol):
            raise ProjectiveError(f"{point} is not on mirror {mirror.label!r}")
        return cls(mirror, point, tangent_line_at(mirror, point), seed)

    @classmethod
    def from_param(cls, mirror: Mirror, s: complex) -> CurvePoint:
        if mirror.param is None:
            raise MirrorError(f"mirror {mirror.label!r} has no parametrization")
        return cls.on(mirror, mirror.param.point(s), seed=complex(s))

    @property
    def affine(self) -> np.ndarray:
        return self.point.to_affine()

    def tangent_direction(self) -> Dir2:
        return self.tangent.direction()

    def to_json(self) -> dict:
        out = {"mirror": self.mirror.label, "point": self.point.to_json(),
               "tangent": self.tangent.to_json()}
        if self.seed is not None:
            out["seed"] = _cjson(self.seed)
        return out


def tangent_line_at(m: Mirror, p: PPoint, tol: float = ON_CURVE_TOL) -> PLine:
    """Tangent line sum_k dF/dX_k(p) X_k = 0 at a smooth point."""
    if not m.contains(p, tol):
        raise ProjectiveError(f"{p} is not on mirror {m.label!r}")
    h = p.array / np.linalg.norm(p.array)
    g = m.gradient_h(h)
    if np.linalg.norm(g) < SINGULAR_TOL * m.scale:
        raise SingularPointError(f"{p} is a singular point of {m.label!r}")
    return PLine(g)


def contains_isotropic_infinity(m: Mirror, tol: float = 1e-10) -> tuple[bool, bool]:
    """Whether F vanishes at I1 = (1:i:0) and at I2 = (1:-i:0)."""
    return (bool(m.residual(I1) < tol), bool(m.residual(I2) < tol))


def _binary_form_roots(C: np.ndarray) -> list[np.ndarray]:
    """Roots (x : y) of the top-degree part of an affine polynomial."""
    d = C.shape[0] - 1
    top = np.array([C[i, d - i] for i in range(d + 1)])  # ascending in x, y^(d-i)
    if np.abs(top).max() == 0:
        return []
    roots: list[np.ndarray] = []
    lead = np.nonzero(np.abs(top) > 1e-13 * np.abs(top).max())[0]
    # x-power deficit: roots at (0 : 1)... handled via y = 1 chart plus x = 1 chart
    hi = lead.max()
    for r in np.roots(top[: hi + 1][::-1]) if hi > 0 else []:
        roots.append(np.array([r, 1.0, 0.0], dtype=complex))
    for _ in range(d - hi):
        roots.append(np.array([1.0, 0.0, 0.0], dtype=complex))
    return roots


def find_special_points(m1: Mirror, m2: Mirror | None = None) -> list[tuple[PPoint, str]]:
    """Marked and double points.

    Tags: ``"singular"`` (cusps and other singular points), ``"isotropic-tangency"``
    and ``"double"`` (finite or infinite intersections with ``m2``). Marked
    points are searched in the affine chart only.
    """
    if max(m1.degree, m2.degree if m2 else 0) > 6:
        raise EliminationError("elimination backend supports degree <= 6")
    F = m1.coeffs
    Fx, Fy = _poly.deriv_x(F), _poly.deriv_y(F)
    out: list[tuple[PPoint, str]] = []
    singular = []
    for z in _poly.solve_bivariate(Fx, Fy):
        if abs(m1.value(z)) <= 1e-8 * m1.scale * max(1.0, np.linalg.norm(z)) ** m1.degree:
            singular.append(z)
            out.append((PPoint.affine(*z), "singular"))
    G = _poly.add(_poly.mul(Fx, Fx), _poly.mul(Fy, Fy))
    if _poly.total_degree(G) >= 1:
        for z in _poly.solve_bivariate(F, G):
            if any(np.linalg.norm(z - s) < 1e-6 * (1 + np.linalg.norm(s)) for s in singular):
                continue
            out.append((PPoint.affine(*z), "isotropic-tangency"))
    if m2 is not None and not m1.same_curve(m2):
        for z in _poly.solve_bivariate(F, m2.coeffs):
            out.append((PPoint.affine(*z), "double"))
        for h in _binary_form_roots(F):
            if m2.residual(PPoint(h)) < 1e-9:
                out.append((PPoint(h), "double"))
    return out


def _spanning_points(l: PLine) -> tuple[np.ndarray, np.ndarray]:
    _, _, vh = np.linalg.svd(l.array.reshape(1, 3))
    return vh[1].conj(), vh[2].conj()


def intersect_line_curve(l: PLine, m: Mirror, radius: float = MULTIPLICITY_RADIUS
                         ) -> list[tuple[PPoint, int]]:
    """Intersection points of a line with the curve, with multiplicities.

    Roots of the restriction of F to the line; multiplicities come from
    clustering roots within ``radius`` (chordal).
    """
    p, q = _spanning_points(l)
    d = m.degree
    N = d + 1
    nodes = np.exp(2j * np.pi * np.arange(N) / N)
    values = np.array([m.value_h(s * p + q) for s in nodes])
    coeffs = np.fft.fft(values) / N  # ascending in s
    big = np.abs(coeffs).max()
    if big <= 1e-12 * m.scale:
        raise LineInCurveError(f"line {l} is a component of {m.label!r}")
    coeffs = np.where(np.abs(coeffs) > 1e-12 * big, coeffs, 0)
    hi = np.nonzero(coeffs)[0].max()
    pts = [s * p + q for s in (np.roots(coeffs[: hi + 1][::-1]) if hi > 0 else [])]
    pts += [p.copy() for _ in range(d - hi)]
    groups: list[list[np.ndarray]] = []
    for h in pts:
        for g in groups:
            if _chordal_vec(g[0], h) < radius:
                g.append(h)
                break
        else:
            groups.append([h])
    out = []
    for g in groups:
        # average representatives after aligning phases
        ref = g[0] / np.linalg.norm(g[0])
        acc = np.zeros(3, dtype=complex)
        for h in g:
            h = h / np.linalg.norm(h)
            acc += h * (np.vdot(h, ref) / abs(np.vdot(h, ref)))
        out.append((PPoint(acc), len(g)))
    return out


def project_to_curve(m: Mirror, guess, max_iter: int = 60) -> CurvePoint:
    """Newton projection of an affine guess onto the curve.

    Uses the minimum-norm Newton step along the conjugate gradient, which
    moves approximately orthogonally onto the local branch.
    """
    if isinstance(guess, PPoint):
        z0 = guess.to_affine()
    else:
        z0 = np.asarray(guess, dtype=complex)
    z = z0.copy()
    d = m.degree
    limit = 1e3 * (1 + np.linalg.norm(z0))
    for _ in range(max_iter):
        g = m.gradient(z)
        gn = np.linalg.norm(g)
        if gn < SINGULAR_TOL * m.scale * max(1.0, np.linalg.norm(z)) ** (d - 1):
            raise SingularPointError(f"projection onto {m.label!r} is too close to a singular point")
        f = m.value(z)
        step = f * g.conj() / gn**2
        z = z - step
        if np.linalg.norm(z - z0) > limit or not np.all(np.isfinite(z)):
            raise ProjectionError(f"projection onto {m.label!r} diverged")
        if np.linalg.norm(step) <= 1e-15 * (1 + np.linalg.norm(z)):
            break
    else:
        if abs(m.value(z)) > 1e-12 * m.scale * max(1.0, np.linalg.norm(z)) ** d:
            raise ProjectionError(f"projection onto {m.label!r} did not converge")
    g = m.gradient(z)
    if np.linalg.norm(g) < SINGULAR_TOL * m.scale * max(1.0, np.linalg.norm(z)) ** (d - 1):
        raise SingularPointError(f"projection onto {m.label!r} landed on a singular point")
    return CurvePoint.on(m, PPoint.affine(*z))


def finite_intersections(l: PLine, m: Mirror) -> list[np.ndarray]:
    """Affine coordinates of the finite intersection points (multiplicity ignored)."""
    out = []
    for p, _ in intersect_line_curve(l, m):
        if p.is_finite(1e-9):
            out.append(p.to_affine())
    return out


def mirrors_in(items: Iterable[Mirror]) -> dict[str, Mirror]:
    return {m.label: m for m in items}
