"""Periodic orbits: reflection-law residual, Gauss-Newton solving and edge tags."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .mirrors import (
    CurvePoint,
    Mirror,
    MirrorError,
    SingularPointError,
    find_special_points,
)
from .projective import (
    CoincidentError,
    Dir2,
    PLine,
    PPoint,
    ProjectiveError,
    chordal,
    is_isotropic_direction,
    join,
)
from .reflection import reflect_vector

RESIDUAL_TOL = 1e-9
SOLVE_TOL = 1e-11
EDGE_TOL = 1e-8
# solver limits that collapse two vertices are degenerate, not orbits
COINCIDENT_TOL = 1e-7
RANK_RATIO = 1e-6
_FD_STEP = 1e-6
# minimum-norm steps ignore directions along (near-)families of orbits
_LSTSQ_RCOND = 1e-8


class OrbitNotFound(RuntimeError):
    """Gauss-Newton did not converge to a periodic orbit."""


class InfiniteVertexError(ProjectiveError):
    """A vertex left the affine chart."""


class EdgeTag(enum.Enum):
    ThroughI1 = "ThroughI1"
    ThroughI2 = "ThroughI2"
    NonIsotropic = "NonIsotropic"

    @property
    def isotropic(self) -> bool:
        return self is not EdgeTag.NonIsotropic


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class Billiard:
    mirrors: tuple[Mirror, ...]

    def __init__(self, mirrors: Sequence[Mirror]):
        mirrors = tuple(mirrors)
        if len(mirrors) < 2:
            raise ValueError("a billiard needs at least two mirrors")
        object.__setattr__(self, "mirrors", mirrors)

    @property
    def k(self) -> int:
        return len(self.mirrors)

    def __getitem__(self, j: int) -> Mirror:
        return self.mirrors[j % self.k]

    def labels(self) -> list[str]:
        return [m.label for m in self.mirrors]


@dataclass(frozen=True, eq=False)
class Orbit:
    billiard: Billiard
    vertices: tuple[CurvePoint, ...]
    residual: np.ndarray | None = None
    iterations: int = 0

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        if len(self.vertices) != self.billiard.k:
            raise ValueError("need one vertex per mirror")

    @property
    def k(self) -> int:
        return len(self.vertices)

    def points(self) -> np.ndarray:
        """Affine vertex coordinates, shape (k, 2)."""
        return np.array([v.affine for v in self.vertices])

    def max_residual(self) -> float:
        r = self.residual if self.residual is not None else orbit_residual(self.billiard, self.vertices)
        return float(np.max(np.abs(r)))

    def to_json(self) -> dict:
        res = self.residual
        try:
            tags = [t.value for t in classify_edges(self)]
        except ProjectiveError:
            tags = []
        return {
            "k": self.k,
            "vertices": [v.to_json() for v in self.vertices],
            "residual": [] if res is None else [[float(z.real), float(z.imag)] for z in res],
            "edge_tags": tags,
        }

    @classmethod
    def from_json(cls, data: Mapping, mirrors: Mapping[str, Mirror]) -> Orbit:
        verts = []
        for v in data["vertices"]:
            m = mirrors[v["mirror"]]
            seed = complex(*v["seed"]) if "seed" in v else None
            p = PPoint.from_json(v["point"])
            verts.append(CurvePoint(m, p, PLine.from_json(v["tangent"]), seed))
        b = Billiard([v.mirror for v in verts])
        res = np.array([complex(re, im) for re, im in data.get("residual", [])]) if data.get("residual") else None
        if int(data["k"]) != len(verts):
            raise ValueError("k does not match the vertex count")
        return cls(b, verts, res)


# residual -------------------------------------------------------------------


def _raw_terms(P: np.ndarray, T: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """det(sigma_T(d_in), d_out) and the two vectors used to normalize it."""
    k = len(P)
    dets = np.empty(k, dtype=complex)
    na = np.empty(k)
    nb = np.empty(k)
    for j in range(k):
        din = P[j] - P[j - 1]
        dout = P[(j + 1) % k] - P[j]
        a = reflect_vector(din, T[j])
        dets[j] = a[0] * dout[1] - a[1] * dout[0]
        na[j] = np.linalg.norm(a)
        nb[j] = np.linalg.norm(dout)
    return dets, na, nb


def orbit_residual(b: Billiard, vertices: Sequence[CurvePoint]) -> np.ndarray:
    """Per-vertex violation of the reflection law.

    Entry j is det(sigma(d_in), d_out) for the Hermitian-normalized incoming
    direction reflected in the tangent at A_j and the outgoing direction.
    Isotropic tangents give NaN at that vertex.
    """
    k = len(vertices)
    if k != b.k:
        raise ValueError("need one vertex per mirror")
    for v in vertices:
        if not v.point.is_finite(1e-12):
            raise InfiniteVertexError("orbit vertex at infinity")
    P = np.array([v.affine for v in vertices])
    for j in range(k):
        if np.linalg.norm(P[(j + 1) % k] - P[j]) <= 1e-12 * (1 + np.linalg.norm(P[j])):
            raise CoincidentError(f"vertices {j} and {(j + 1) % k} coincide")
    out = np.empty(k, dtype=complex)
    for j in range(k):
        tau = vertices[j].tangent_direction()
        if is_isotropic_direction(tau):
            out[j] = complex(np.nan, np.nan)
            continue
        din = P[j] - P[j - 1]
        dout = P[(j + 1) % k] - P[j]
        a = reflect_vector(din, tau.array)
        out[j] = (a[0] * dout[1] - a[1] * dout[0]) / (np.linalg.norm(a) * np.linalg.norm(dout))
    return out


def make_orbit(b: Billiard, vertices: Sequence[CurvePoint], iterations: int = 0) -> Orbit:
    return Orbit(b, tuple(vertices), orbit_residual(b, vertices), iterations)


def validate_orbit(o: Orbit, tol: float = RESIDUAL_TOL) -> Verdict:
    """Check the side conditions of a periodic orbit; report the first failure."""
    k = o.k
    if any(not v.point.is_finite(1e-12) for v in o.vertices):
        return Verdict(False, "vertex at infinity")
    P = o.points()
    for j in range(k):
        if np.linalg.norm(P[(j + 1) % k] - P[j]) <= COINCIDENT_TOL * (1 + np.linalg.norm(P[j])):
            return Verdict(False, "coincident vertices")
    for v in o.vertices:
        if is_isotropic_direction(v.tangent_direction()):
            return Verdict(False, "isotropic tangent")
    for j in range(k):
        tau = o.vertices[j].tangent_direction().array
        for e in (P[j] - P[j - 1], P[(j + 1) % k] - P[j]):
            if chordal(e, tau) < EDGE_TOL:
                return Verdict(False, "transversality")
    r = orbit_residual(o.billiard, o.vertices)
    if not np.all(np.abs(r) < tol):
        return Verdict(False, "residual")
    return Verdict(True, "")


# charts ---------------------------------------------------------------------


def param_seed(m: Mirror, p: PPoint) -> complex:
    """Parameter value s with param(s) = p (closest root by chordal distance)."""
    if m.param is None:
        raise MirrorError(f"mirror {m.label!r} has no parametrization")
    h = p.array
    comps = (m.param.x, m.param.y, m.param.t)
    best, best_d = None, np.inf
    for a, c in ((0, 2), (1, 2), (0, 1)):
        ca, cc = comps[a], comps[c]
        n = max(len(ca), len(cc))
        poly = np.zeros(n, dtype=complex)
        poly[: len(ca)] += np.array(ca) * h[c]
        poly[: len(cc)] -= np.array(cc) * h[a]
        nz = np.nonzero(np.abs(poly) > 1e-14 * max(np.abs(poly).max(), 1e-300))[0]
        if nz.size == 0 or nz.max() == 0:
            continue
        for s in np.roots(poly[: nz.max() + 1][::-1]):
            d = chordal(m.param(s), h)
            if d < best_d:
                best, best_d = complex(s), d
    if best is None or best_d > 1e-6:
        raise MirrorError(f"point {p} is not on the parametrization of {m.label!r}")
    return best


class _Chart:
    """Local holomorphic coordinate on a mirror centred at a vertex."""

    def __init__(self, cp: CurvePoint, kind: str):
        self.mirror = m = cp.mirror
        s0 = None
        if kind in ("auto", "param") and m.param is not None:
            try:
                s0 = cp.seed if cp.seed is not None else param_seed(m, cp.point)
            except MirrorError:
                # the point sits at s = infinity of the parametrization
                if kind == "param":
                    raise
        if kind == "auto":
            # far out on the parametrization the chart is badly conditioned
            kind = "param" if s0 is not None and abs(s0) <= 1e3 else "implicit"
        self.kind = kind
        if kind == "param":
            if s0 is None:
                raise MirrorError(f"mirror {m.label!r} has no parametrization")
            self.s0 = s0
            # unit speed at the centre keeps the Jacobian columns comparable
            eps = 1e-7 * (1 + abs(s0))
            speed = np.linalg.norm(self._param_affine(s0 + eps) - self._param_affine(s0 - eps)) / (2 * eps)
            self.rate = 1.0 / speed if speed > 0 else 1.0
        elif kind == "implicit":
            p0 = cp.affine
            g = m.gradient(p0)
            gn = np.linalg.norm(g)
            if gn < 1e-8 * m.scale:
                raise SingularPointError(f"chart centred at a singular point of {m.label!r}")
            self.p0 = p0
            self.tau = np.array([-g[1], g[0]]) / gn
            self.n = g.conj() / gn
        else:
            raise ValueError(f"unknown chart kind {kind!r}")

    def affine(self, delta: complex) -> np.ndarray:
        m = self.mirror
        if self.kind == "param":
            return self._param_affine(self.s0 + self.rate * delta)
        z = self.p0 + delta * self.tau
        h = 0j
        for _ in range(30):
            q = z + h * self.n
            df = m.gradient(q) @ self.n
            if df == 0:
                raise SingularPointError("implicit chart degenerated")
            dh = m.value(q) / df
            h -= dh
            if abs(dh) <= 1e-15 * (1 + abs(h)) or not np.isfinite(h):
                break
        if not np.isfinite(h):
            raise InfiniteVertexError("implicit chart diverged")
        return z + h * self.n

    def _param_affine(self, s: complex) -> np.ndarray:
        h = self.mirror.param(s)
        if abs(h[2]) <= 1e-12 * np.linalg.norm(h):
            raise InfiniteVertexError("vertex at infinity")
        return h[:2] / h[2]

    def tangent_dir(self, z: np.ndarray) -> np.ndarray:
        g = self.mirror.gradient(z)
        if np.linalg.norm(g) < 1e-8 * self.mirror.scale * max(1.0, np.linalg.norm(z)) ** (self.mirror.degree - 1):
            raise SingularPointError(f"singular point of {self.mirror.label!r} reached")
        return np.array([-g[1], g[0]])

    def curve_point(self, delta: complex) -> CurvePoint:
        z = self.affine(delta)
        t = self.tangent_dir(z)
        p = PPoint.affine(*z)
        line = PLine((t[1], -t[0], -(t[1] * z[0] - t[0] * z[1])))
        seed = self.s0 + self.rate * delta if self.kind == "param" else None
        return CurvePoint(self.mirror, p, line, seed)


def _evaluate(charts: Sequence[_Chart], deltas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    P = np.array([c.affine(d) for c, d in zip(charts, deltas)])
    T = np.array([c.tangent_dir(z) for c, z in zip(charts, P)])
    return P, T


def _weighted(charts, deltas, w) -> np.ndarray:
    P, T = _evaluate(charts, deltas)
    dets, _, _ = _raw_terms(P, T)
    return dets * w


def _jacobian(charts, deltas, w, free: Sequence[int]) -> np.ndarray:
    J = np.empty((len(charts), len(free)), dtype=complex)
    for col, i in enumerate(free):
        e = np.zeros(len(charts), dtype=complex)
        e[i] = _FD_STEP
        J[:, col] = (_weighted(charts, deltas + e, w) - _weighted(charts, deltas - e, w)) / (2 * _FD_STEP)
    return J


def _frozen_weights(charts) -> np.ndarray:
    P, T = _evaluate(charts, np.zeros(len(charts), dtype=complex))
    dets, na, nb = _raw_terms(P, T)
    if np.any(na * nb <= 1e-300):
        raise CoincidentError("coincident consecutive vertices")
    return 1.0 / (na * nb)


def _gauss_newton(b: Billiard, verts: list[CurvePoint], free: Sequence[int], tol: float,
                  max_iter: int, chart: str) -> Orbit:
    k = b.k
    zero = np.zeros(k, dtype=complex)
    if not free:
        max_iter = 0
    for it in range(max_iter + 1):
        try:
            r_true = orbit_residual(b, verts)
        except CoincidentError as exc:
            raise OrbitNotFound(str(exc)) from exc
        if np.all(np.isfinite(r_true)) and np.max(np.abs(r_true)) < tol:
            return Orbit(b, tuple(verts), r_true, it)
        if it == max_iter:
            break
        charts = [_Chart(v, chart) for v in verts]
        try:
            w = _frozen_weights(charts)
            r0 = _weighted(charts, zero, w)
            J = _jacobian(charts, zero, w, free)
        except (CoincidentError, InfiniteVertexError) as exc:
            raise OrbitNotFound(str(exc)) from exc
        if not (np.all(np.isfinite(J)) and np.all(np.isfinite(r0))):
            raise OrbitNotFound("non-finite residual or Jacobian")
        # singular values below the residual size are dominated by curvature,
        # so they are truncated while far from the solution set
        rcond = min(max(float(np.linalg.norm(r0)), _LSTSQ_RCOND), 1e-2)
        step = np.linalg.lstsq(J, -r0, rcond=rcond)[0]
        base = np.linalg.norm(r0)
        lam = 1.0
        for _ in range(21):
            delta = zero.copy()
            delta[list(free)] = lam * step
            try:
                r = _weighted(charts, delta, w)
                ok = np.all(np.isfinite(r)) and np.linalg.norm(r) < base
            except (InfiniteVertexError, SingularPointError, CoincidentError):
                ok = False
            if ok:
                break
            lam /= 2
        else:
            raise OrbitNotFound(f"damping exhausted after {it} iterations")
        try:
            verts = [c.curve_point(d) for c, d in zip(charts, delta)]
        except InfiniteVertexError as exc:
            raise OrbitNotFound(str(exc)) from exc
    raise OrbitNotFound(f"no convergence in {max_iter} iterations")


def solve_periodic(b: Billiard, k: int, init: Sequence[CurvePoint], tol: float = SOLVE_TOL,
                   max_iter: int = 60, chart: str = "auto") -> Orbit:
    """Gauss-Newton on the k complex residuals over k local parameters.

    Residual weights are frozen per iteration so the objective stays
    holomorphic; the Jacobian is taken by central differences along real
    steps, which is exact for holomorphic maps up to truncation.
    """
    if k != b.k or len(init) != k:
        raise ValueError(f"period {k} does not match billiard with {b.k} mirrors")
    return _gauss_newton(b, list(init), list(range(k)), tol, max_iter, chart)


def solve_with_fixed(b: Billiard, init: Sequence[CurvePoint], fixed: Sequence[int],
                     tol: float = SOLVE_TOL, max_iter: int = 60, chart: str = "auto") -> Orbit:
    """Like solve_periodic but keeps the vertices listed in ``fixed`` in place."""
    free = [i for i in range(b.k) if i not in set(fixed)]
    return _gauss_newton(b, list(init), free, tol, max_iter, chart)


def residual_jacobian(o: Orbit, chart: str = "auto") -> np.ndarray:
    """k x k complex Jacobian of the (frozen-weight) residual in local charts."""
    charts = [_Chart(v, chart) for v in o.vertices]
    w = _frozen_weights(charts)
    return _jacobian(charts, np.zeros(o.k, dtype=complex), w, list(range(o.k)))


def numerical_rank(sv: np.ndarray, ratio: float = RANK_RATIO) -> int:
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.sum(sv > ratio * sv[0]))


def chart_points(o: Orbit, deltas: Sequence[complex], chart: str = "auto") -> list[CurvePoint]:
    """Move each vertex by ``deltas[j]`` in its local chart."""
    return [_Chart(v, chart).curve_point(d) for v, d in zip(o.vertices, deltas)]


# edges ----------------------------------------------------------------------

_ISO1 = np.array([1.0, 1j])
_ISO2 = np.array([1.0, -1j])


def edge_tag(direction) -> EdgeTag:
    d = np.asarray(direction.array if isinstance(direction, Dir2) else direction, dtype=complex)
    if chordal(d, _ISO1) < EDGE_TOL:
        return EdgeTag.ThroughI1
    if chordal(d, _ISO2) < EDGE_TOL:
        return EdgeTag.ThroughI2
    return EdgeTag.NonIsotropic


def classify_edges(o: Orbit) -> list[EdgeTag]:
    """Tag of edge A_j A_{j+1} for j = 1..k by its point at infinity."""
    if any(not v.point.is_finite(1e-12) for v in o.vertices):
        raise InfiniteVertexError("cannot classify edges with a vertex at infinity")
    P = o.points()
    k = o.k
    tags = []
    for j in range(k):
        d = P[(j + 1) % k] - P[j]
        if np.linalg.norm(d) <= 1e-12 * (1 + np.linalg.norm(P[j])):
            raise CoincidentError(f"edge {j} is degenerate")
        tags.append(edge_tag(d))
    return tags


def check_intermittency(tags: Sequence[EdgeTag | None]) -> Verdict:
    tags = [EdgeTag.NonIsotropic if t is None else t for t in tags]
    if not any(t.isotropic for t in tags):
        return Verdict(True, "vacuous")
    if not all(t.isotropic for t in tags):
        return Verdict(False, "mixed isotropic and non-isotropic edges")
    if len(tags) % 2:
        return Verdict(False, "odd period")
    k = len(tags)
    if any(tags[j] == tags[(j + 1) % k] for j in range(k)):
        return Verdict(False, "alternation")
    return Verdict(True, "intermittent")


# collisions -----------------------------------------------------------------


def _close(p: PPoint, q: PPoint, tol: float = 1e-8) -> bool:
    return p.distance(q) < tol


def classify_collision(b: Billiard, o: Orbit, j: int) -> str:
    """Which degeneration explains the collision A_j = A_{j+1}.

    Returns "i" (marked or double point), "ii" (everything collapsed onto one
    mirror), "iii" (tangential chain) or "unclassified".
    """
    k = o.k
    j %= k
    A = o.vertices
    a = b.mirrors
    here = A[j].point
    if not _close(here, A[(j + 1) % k].point, 1e-6):
        return "unclassified"
    second = None if a[j].same_curve(a[(j + 1) % k]) else a[(j + 1) % k]
    try:
        special = find_special_points(a[j], second)
    except Exception:
        special = []
    if any(_close(here, p, 1e-6) for p, _ in special):
        return "i"
    if all(_close(here, v.point, 1e-6) for v in A) and all(a[0].same_curve(m) for m in a):
        return "ii"
    # walk back (then forward) along the chain of coinciding vertices on the same mirror
    for step, start in ((-1, j), (1, (j + 1) % k)):
        s = start
        for _ in range(k):
            nxt = (s + step) % k
            if _close(A[nxt].point, here, 1e-6) and a[nxt].same_curve(a[j]):
                s = nxt
                continue
            break
        other = A[(s + step) % k].point
        if _close(other, here, 1e-6):
            continue
        try:
            line = join(other, here)
        except CoincidentError:
            continue
        if line.distance(A[j].tangent) < 1e-6:
            return "iii"
    return "unclassified"
