"""Real slice: piecewise-algebraic bodies, ray tracing and invisibility.

A body is a union of real arcs of algebraic curves. A ray is traced by
repeated first intersection and classical reflection; the body is invisible
for an oriented line if the trajectory leaves along the same oriented line.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import _poly
from .mirrors import CurvePoint, Mirror, MirrorError
from .orbits import Billiard, Orbit, make_orbit, param_seed
from .projective import PPoint
from .reflection import reflect_vector

RAY_EPS = 1e-9
CORNER_TOL = 1e-9
INVISIBLE_TOL = 1e-9


class TraceError(RuntimeError):
    """A trajectory hit a measure-zero configuration."""


class TangencyError(TraceError):
    pass


class CornerHitError(TraceError):
    pass


class DegenerateAngleError(ValueError):
    pass


class BodyConstructionError(RuntimeError):
    pass


@dataclass(frozen=True)
class Arc:
    """Piece of a real mirror between two parameter values.

    ``inside`` is +1 if the body lies on the side the gradient points to,
    -1 for the opposite side.
    """

    mirror: Mirror
    t_min: float
    t_max: float
    inside: int = 1

    def __post_init__(self):
        if self.mirror.param is None:
            raise ValueError(f"arc on {self.mirror.label!r} needs a parametrized mirror")
        if np.abs(self.mirror.coeffs.imag).max() > 0:
            raise ValueError(f"arc on {self.mirror.label!r} needs real coefficients")
        if not self.t_min < self.t_max:
            raise ValueError("empty arc interval")

    def point(self, s: float) -> np.ndarray:
        return self.mirror.param.affine(s).real

    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        return self.point(self.t_min), self.point(self.t_max)

    def to_json(self) -> dict:
        return {"mirror": self.mirror.label, "interval": [self.t_min, self.t_max],
                "inside": self.inside}


@dataclass(frozen=True)
class Body:
    arcs: tuple[Arc, ...]
    bbox: tuple[float, float, float, float] = field(default=(0.0, 0.0, 0.0, 0.0))

    def __init__(self, arcs: Sequence[Arc]):
        arcs = tuple(arcs)
        if not arcs:
            raise ValueError("a body needs at least one arc")
        pts = np.array([a.point(s) for a in arcs for s in np.linspace(a.t_min, a.t_max, 65)])
        if not np.all(np.isfinite(pts)):
            raise ValueError("body must be bounded")
        object.__setattr__(self, "arcs", arcs)
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        object.__setattr__(self, "bbox", (float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])))

    @property
    def mirrors(self) -> list[Mirror]:
        seen: dict[str, Mirror] = {}
        for a in self.arcs:
            seen.setdefault(a.mirror.label, a.mirror)
        return list(seen.values())

    def scaled(self, factor: float) -> Body:
        M = factor * np.eye(2)
        cache: dict[str, Mirror] = {}
        arcs = []
        for a in self.arcs:
            m = cache.setdefault(a.mirror.label, a.mirror.affine_image(M))
            arcs.append(Arc(m, a.t_min, a.t_max, a.inside))
        return Body(arcs)

    def to_json(self) -> dict:
        return {"mirrors": [m.to_json() for m in self.mirrors],
                "arcs": [a.to_json() for a in self.arcs]}

    @classmethod
    def from_json(cls, data: Mapping) -> Body:
        mirrors = {m["label"]: Mirror.from_json(m) for m in data["mirrors"]}
        return cls([Arc(mirrors[a["mirror"]], float(a["interval"][0]), float(a["interval"][1]),
                        int(a.get("inside", 1))) for a in data["arcs"]])


@dataclass(frozen=True)
class ORay:
    origin: tuple[float, float]
    direction: tuple[float, float]

    def __init__(self, origin, direction):
        d = np.asarray(direction, dtype=float)
        n = np.linalg.norm(d)
        if n == 0:
            raise ValueError("ray direction must be nonzero")
        object.__setattr__(self, "origin", tuple(float(v) for v in origin))
        object.__setattr__(self, "direction", tuple(float(v) for v in d / n))

    @property
    def o(self) -> np.ndarray:
        return np.array(self.origin)

    @property
    def d(self) -> np.ndarray:
        return np.array(self.direction)

    def to_json(self) -> dict:
        return {"origin": list(self.origin), "direction": list(self.direction)}


@dataclass(frozen=True)
class Hit:
    point: np.ndarray
    arc: Arc
    t: float
    s: float
    tangency: bool
    corner: bool


@dataclass
class Trajectory:
    points: list[np.ndarray]
    arcs: list[Arc]
    input: ORay
    output: ORay
    complete: bool = True

    @property
    def reflections(self) -> int:
        return len(self.points)

    def segments(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return list(zip(self.points[:-1], self.points[1:]))

    def to_json(self, verdict: bool | None = None) -> dict:
        return {
            "points": [[float(x), float(y)] for x, y in self.points],
            "segments": [[[float(a[0]), float(a[1])], [float(b[0]), float(b[1])]]
                         for a, b in self.segments()],
            "reflections": self.reflections,
            "input": self.input.to_json(),
            "output": self.output.to_json(),
            "complete": self.complete,
            "verdict": verdict,
        }


def _restriction(m: Mirror, o: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Ascending coefficients of t -> F(o + t d)."""
    M = np.array([[d[0], 0.0], [d[1], 0.0]])
    Q = _poly.compose_affine(m.coeffs, M, o)
    return Q[:, 0].real


def _arc_hits(arc: Arc, ray: ORay, eps: float) -> list[Hit]:
    o, d = ray.o, ray.d
    g = _restriction(arc.mirror, o, d)
    scale = np.abs(g).sum()
    if scale == 0:
        return []
    nz = np.nonzero(np.abs(g) > 1e-13 * scale)[0]
    if nz.size == 0 or nz.max() == 0:
        return []
    g = g[: nz.max() + 1]
    dg = np.polynomial.polynomial.polyder(g)
    out = []
    for r in np.roots(g[::-1]):
        if abs(r.imag) > 1e-7 * (1 + abs(r)):
            continue
        t = float(r.real)
        if t <= eps:
            continue
        p = o + t * d
        try:
            s = param_seed(arc.mirror, PPoint.affine(*p)).real
        except MirrorError:
            continue  # the parameter is infinite there, outside every interval
        if s < arc.t_min - CORNER_TOL or s > arc.t_max + CORNER_TOL:
            continue
        slope = abs(np.polynomial.polynomial.polyval(t, dg))
        tangency = slope <= 1e-7 * scale * max(1.0, abs(t)) ** (len(g) - 2)
        corner = min(abs(s - arc.t_min), abs(s - arc.t_max)) <= CORNER_TOL
        out.append(Hit(arc.point(s) if not tangency else p, arc, t, s, tangency, corner))
    return out


def first_intersection(body: Body, ray: ORay, eps: float = RAY_EPS) -> Hit | None:
    """Closest hit with ray parameter t > eps, or None when the ray misses."""
    hits = [h for a in body.arcs for h in _arc_hits(a, ray, eps)]
    if not hits:
        return None
    return min(hits, key=lambda h: h.t)


def reflect_real(d: np.ndarray, m: Mirror, p: np.ndarray) -> np.ndarray:
    g = m.gradient(p).real
    tau = np.array([-g[1], g[0]])
    return reflect_vector(d, tau)


def trace(body: Body, ray: ORay, max_n: int = 50) -> Trajectory:
    """Reflect until the ray escapes; raises on tangency or corner hits."""
    pts: list[np.ndarray] = []
    arcs: list[Arc] = []
    cur = ray
    for _ in range(max_n):
        hit = first_intersection(body, cur)
        if hit is None:
            return Trajectory(pts, arcs, ray, cur, True)
        if hit.tangency:
            raise TangencyError(f"grazing hit on {hit.arc.mirror.label!r} at {hit.point}")
        if hit.corner:
            raise CornerHitError(f"corner hit on {hit.arc.mirror.label!r} at {hit.point}")
        pts.append(hit.point)
        arcs.append(hit.arc)
        cur = ORay(hit.point, reflect_real(cur.d, hit.arc.mirror, hit.point))
    return Trajectory(pts, arcs, ray, cur, first_intersection(body, cur) is None)


@dataclass
class InvisibilityVerdict:
    invisible: bool | None
    reflections: int
    deviation: float
    trajectory: Trajectory

    def to_json(self) -> dict:
        out = self.trajectory.to_json(self.invisible)
        out["deviation"] = self.deviation
        return out


def line_deviation(a: ORay, b: ORay) -> float:
    """Distance between two oriented lines (direction gap plus offset)."""
    dir_gap = float(np.linalg.norm(a.d - b.d))
    offset = b.o - a.o
    cross = abs(offset[0] * a.d[1] - offset[1] * a.d[0])
    return max(dir_gap, float(cross))


def check_invisible(body: Body, ray: ORay, max_n: int = 50, tol: float = INVISIBLE_TOL
                    ) -> InvisibilityVerdict:
    """True iff the output oriented line equals the input one and escapes.

    A ray that never touches the body gets ``invisible=None``: there is no
    complete trajectory to speak of.
    """
    tr = trace(body, ray, max_n)
    if tr.reflections == 0:
        return InvisibilityVerdict(None, 0, 0.0, tr)
    dev = line_deviation(ray, tr.output)
    scale = 1.0 + max(abs(v) for v in body.bbox)
    ok = tr.complete and dev <= tol * scale
    return InvisibilityVerdict(bool(ok), tr.reflections, dev, tr)


def _unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0:
        raise DegenerateAngleError("coincident vertices")
    return v / n


def bisector_type(prev: np.ndarray, here: np.ndarray, nxt: np.ndarray, tangent: np.ndarray,
                  tol: float = INVISIBLE_TOL) -> str:
    """'e' if the tangent is the exterior bisector of the angle prev-here-next,
    'i' if it is the interior bisector, '-' otherwise."""
    u, v = _unit(prev - here), _unit(nxt - here)
    if np.linalg.norm(u - v) < 1e-12:
        raise DegenerateAngleError("zero angle at vertex")
    ext = _unit(u - v)
    tau = _unit(np.asarray(tangent, dtype=float))
    cross = abs(tau[0] * ext[1] - tau[1] * ext[0])
    if cross < tol:
        return "e"
    if abs(tau @ ext) < tol:
        return "i"
    return "-"


@dataclass(frozen=True)
class OrbitLawVerdict:
    ok: bool
    pattern: str
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def check_invisible_orbit(curves: Sequence[Mirror], polygon: Sequence[Sequence[float]],
                          endpoints: bool = True, tol: float = INVISIBLE_TOL) -> OrbitLawVerdict:
    """Invisibility reflection law on a real polygon A_1..A_k (taken cyclically).

    Interior vertices need the tangent to be the exterior bisector; with
    ``endpoints`` the first and last vertices need the interior bisector
    instead. ``endpoints=False`` is the ordinary billiard law everywhere.
    """
    P = np.asarray(polygon, dtype=float)
    k = len(P)
    if len(curves) != k:
        raise ValueError("need one curve per vertex")
    pattern = []
    for j in range(k):
        g = curves[j].gradient(P[j]).real
        tau = np.array([-g[1], g[0]])
        pattern.append(bisector_type(P[j - 1], P[j], P[(j + 1) % k], tau, tol))
    want = ["e"] * k
    if endpoints:
        want[0] = want[-1] = "i"
    pat = "".join(pattern)
    for j, (got, need) in enumerate(zip(pattern, want)):
        if got != need:
            return OrbitLawVerdict(False, pat, f"vertex {j + 1}: expected {need}, got {got}")
    return OrbitLawVerdict(True, pat)


def disk_body(cx: float = 0.0, cy: float = 0.0, r: float = 1.0, label: str = "circle") -> Body:
    """Round disk as two arcs whose seams sit at angles +-3pi/4."""
    front = Mirror.circle(cx, cy, r, label=label)
    back = front.affine_image(-np.eye(2), (2 * cx, 2 * cy), label=f"{label}~")
    wide, narrow = np.tan(3 * np.pi / 8), np.tan(np.pi / 8)
    return Body([Arc(front, -wide, wide, -1), Arc(back, -narrow, narrow, -1)])


def polygon_body(vertices: Sequence[Sequence[float]], label: str = "side") -> Body:
    """Closed polygon made of segments (unit-speed line parametrizations)."""
    V = np.asarray(vertices, dtype=float)
    arcs = []
    for j in range(len(V)):
        p, q = V[j], V[(j + 1) % len(V)]
        d = q - p
        m = Mirror.line(d[1], -d[0], d[0] * p[1] - d[1] * p[0], label=f"{label}{j}")
        s0 = param_seed(m, PPoint.affine(*p)).real
        s1 = param_seed(m, PPoint.affine(*q)).real
        arcs.append(Arc(m, min(s0, s1), max(s0, s1)))
    return Body(arcs)


# the two-parabola body -------------------------------------------------------


def confocal_parabolas(shift: float = 0.0, suffix: str = "") -> tuple[Mirror, Mirror]:
    """y = (x^2 - 1)/2 + shift and y = (1 - x^2)/2 + shift, focus (0, shift)."""
    p1 = Mirror.graph([-0.5 + shift, 0.0, 0.5], label=f"P1{suffix}")
    p2 = Mirror.graph([0.5 + shift, 0.0, -0.5], label=f"P2{suffix}")
    return p1, p2


def _horn_unit(top: Mirror, bottom: Mirror, b: float, tag: str) -> list[Arc]:
    """Two horns between ``bottom`` and ``top`` over 1 <= |x| <= b, closed by vertical walls."""
    # graphs y = f(x) are stored as f(x) - y, whose gradient points downward
    arcs = [Arc(top, 1.0, b, 1), Arc(bottom, 1.0, b, -1),
            Arc(top, -b, -1.0, 1), Arc(bottom, -b, -1.0, -1)]
    for sign, side in ((1, "R"), (-1, "L")):
        x = sign * b
        y0 = float(bottom.param.affine(x)[1].real)
        y1 = float(top.param.affine(x)[1].real)
        wall = Mirror.line(1.0, 0.0, -x, label=f"wall{side}{tag}")
        arcs.append(Arc(wall, min(y0, y1), max(y0, y1), -sign))
    return arcs


@dataclass(frozen=True)
class InvisibleBody:
    body: Body
    scale: float
    half_width: float
    gap: float

    def aperture(self, margin: float = 0.02) -> tuple[float, float]:
        """Abscissa range (right branch) where vertical rays are invisible."""
        return (self.scale * (1 + margin), self.scale * (self.half_width - margin))

    def sample_rays(self, n: int, margin: float = 0.02, height: float | None = None) -> list[ORay]:
        """Downward vertical rays, half on each branch of the aperture."""
        lo, hi = self.aperture(margin)
        top = height if height is not None else self.body.bbox[3] + self.scale
        xs = np.linspace(lo, hi, (n + 1) // 2)
        xs = np.concatenate([xs, -xs[: n - len(xs)]])
        return [ORay((x, top), (0.0, -1.0)) for x in xs]

    def trajectory_polygon(self, x0: complex) -> list[tuple[Mirror, np.ndarray]]:
        """Vertices of the invisible 4-gon for unscaled abscissa x0 (any complex x0)."""
        m = {a.mirror.label: a.mirror for a in self.body.arcs}
        order = [("P1", x0), ("P2", -x0), ("P1'", -x0), ("P2'", x0)]
        return [(m[label], m[label].param.affine(x)) for label, x in order]

    def complexified_orbit(self, x0: complex) -> Orbit:
        """The 4-gon at abscissa x0 as a periodic orbit of the P1, P2, P1', P2' billiard."""
        m = {a.mirror.label: a.mirror for a in self.body.arcs}
        order = [("P1", x0), ("P2", -x0), ("P1'", -x0), ("P2'", x0)]
        b = Billiard([m[label] for label, _ in order])
        return make_orbit(b, [CurvePoint.from_param(m[label], x) for label, x in order])


def build_two_parabola_body(scale: float = 1.0, half_width: float = 2.0, n_check: int = 9
                            ) -> InvisibleBody:
    """Body invisible for vertical rays, made of four horn-shaped pieces.

    Unit 1 holds two horns between the confocal parabolas
    P1: y = (x^2 - 1)/2 and P2: y = (1 - x^2)/2 over 1 <= |x| <= b. Unit 2 is
    unit 1 mirrored in y = -c with 2c = b^2 + 1. A downward ray at x0 in
    (1, b) reflects off P1, passes the focus, reflects off P2 at -x0, drops
    vertically into unit 2, and the mirrored path brings it back to x = x0.
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    b = half_width
    gap = b * b + 1
    p1, p2 = confocal_parabolas()
    q1, q2 = confocal_parabolas(-gap, "'")
    arcs = _horn_unit(p1, p2, b, "") + _horn_unit(q1, q2, b, "'")
    body = Body(arcs)
    if scale != 1.0:
        body = body.scaled(scale)
    out = InvisibleBody(body, scale, b, gap)
    for ray in out.sample_rays(n_check):
        v = check_invisible(out.body, ray)
        if not v.invisible or v.reflections != 4:
            raise BodyConstructionError(f"self-check failed for ray {ray}: {v.invisible}, "
                                        f"{v.reflections} reflections")
    return out
