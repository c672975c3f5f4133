"""Numerical evidence for k-reflectivity and the isotropic-edge chain search.

A billiard is k-reflective when its k-periodic orbits fill a two-dimensional
(complex) family. Near a periodic orbit the family dimension is estimated as
k minus the numerical rank of the residual Jacobian, then confirmed by
re-closing orbits from a small grid of perturbed (A1, A2) pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .mirrors import (
    CurvePoint,
    Mirror,
    ProjectionError,
    SingularPointError,
    intersect_line_curve,
    project_to_curve,
    tangent_line_at,
)
from .orbits import (
    RANK_RATIO,
    SOLVE_TOL,
    Billiard,
    EdgeTag,
    Orbit,
    OrbitNotFound,
    chart_points,
    numerical_rank,
    residual_jacobian,
    solve_periodic,
    solve_with_fixed,
    validate_orbit,
)
from .projective import (
    I1,
    I2,
    CoincidentError,
    PLine,
    PPoint,
    ProjectiveError,
    join,
    meet,
)
from .reflection import Involution, reflect_line_at

REFLECTIVE = "reflective-evidence"
NOT_REFLECTIVE = "not-reflective-evidence"
INCONCLUSIVE = "inconclusive"

# complex directions of the two sampling axes; generic so the grid is not
# confined to the real slice
OMEGA1 = np.exp(0.3j)
OMEGA2 = np.exp(1.1j)


class NoClosureError(RuntimeError):
    """The third vertex predicted by Q_ab does not land on the next mirror."""


class TangentialError(ProjectiveError):
    """An edge coincides with the tangent line at its endpoint."""


def _cj(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


@dataclass
class ReflectivityReport:
    k: int
    anchor: Orbit | None
    jacobian_rank: int
    local_dim: int
    singular_values: list[float]
    sample_successes: float | None
    verdict: str
    seeds: list[dict] = field(default_factory=list)
    orbits: list[Orbit] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "anchor": None if self.anchor is None else self.anchor.to_json(),
            "jacobian_rank": self.jacobian_rank,
            "local_dim": self.local_dim,
            "singular_values": [float(s) for s in self.singular_values],
            "sample_successes": self.sample_successes,
            "verdict": self.verdict,
            "seeds": self.seeds,
            "note": "numerical evidence, not a proof",
        }


@dataclass
class ChainResult:
    """Forward chain of alternating isotropic edges started on the I1 pencil."""

    vertices: list[PPoint]
    closed: bool
    parity_obstruction: bool
    tags: list[EdgeTag]
    closure_residual: float
    pencil: complex

    def to_json(self) -> dict:
        return {
            "vertices": [v.to_json() for v in self.vertices],
            "closed": self.closed,
            "parity_obstruction": self.parity_obstruction,
            "tags": [t.value for t in self.tags],
            "closure_residual": self.closure_residual,
            "pencil": _cj(self.pencil),
        }


# Q_ab -----------------------------------------------------------------------


def _reflected_edge(at: CurvePoint, other: PPoint) -> PLine:
    edge = join(at.point, other)
    if edge.distance(at.tangent) < 1e-9:
        raise TangentialError(f"edge is tangent to {at.mirror.label!r}")
    return reflect_line_at(edge, at.point, Involution.through(at.point, at.tangent.direction()))


def q_ab(A: CurvePoint, B: CurvePoint) -> PPoint:
    """Meet of line AB reflected in the tangent at A and in the tangent at B.

    Parallel reflected lines meet at infinity, which is a valid answer.
    """
    if A.point.same_as(B.point, 1e-12):
        raise CoincidentError("A and B coincide")
    la = _reflected_edge(A, B.point)
    lb = _reflected_edge(B, A.point)
    return meet(la, lb)


def psi_b(A: CurvePoint, B: CurvePoint, c: Mirror, basin: float = 1e-3) -> tuple[CurvePoint, CurvePoint]:
    """(A, B) -> (B, C) with C the point of ``c`` at Q_ab(A, B)."""
    q = q_ab(A, B)
    if not q.is_finite(1e-12):
        raise NoClosureError("Q_ab is at infinity")
    z = q.to_affine()
    try:
        C = project_to_curve(c, z)
    except (ProjectionError, SingularPointError) as exc:
        raise NoClosureError(str(exc)) from exc
    if np.linalg.norm(C.affine - z) > basin * (1 + np.linalg.norm(z)):
        raise NoClosureError(f"Q_ab is not on mirror {c.label!r}")
    return B, C


# dimension ------------------------------------------------------------------


def _verdict(local_dim: int, samples: float | None) -> str:
    if local_dim <= 1:
        return NOT_REFLECTIVE
    if samples is not None and samples >= 0.99:
        return REFLECTIVE
    return INCONCLUSIVE


def family_dimension(b: Billiard, o: Orbit, *, sample: bool = True, grid: int = 5,
                     radius: float = 1e-3, chart: str = "auto",
                     rank_ratio: float = RANK_RATIO, tol: float = SOLVE_TOL) -> ReflectivityReport:
    """Local dimension of the periodic-orbit set through ``o``.

    Rank of the complex residual Jacobian by singular-value thresholding, then
    (optionally) a 5x5 grid of perturbations of the first two vertices with
    the remaining k-2 re-solved.
    """
    k = b.k
    if not validate_orbit(o, tol=max(tol, 1e-9)).ok:
        return ReflectivityReport(k, o, 0, 0, [], None, INCONCLUSIVE)
    try:
        J = residual_jacobian(o, chart)
    except (ProjectiveError, ValueError):
        return ReflectivityReport(k, o, 0, 0, [], None, INCONCLUSIVE)
    sv = np.linalg.svd(J, compute_uv=False)
    rank = numerical_rank(sv, rank_ratio)
    local_dim = k - rank
    successes = None
    if sample:
        ticks = np.linspace(-radius, radius, grid)
        ok = 0
        for u in ticks:
            for v in ticks:
                deltas = np.zeros(k, dtype=complex)
                deltas[0], deltas[1] = u * OMEGA1, v * OMEGA2
                try:
                    start = chart_points(o, deltas, chart)
                    sol = solve_with_fixed(b, start, [0, 1], tol=tol, chart=chart)
                    ok += bool(validate_orbit(sol, tol=max(tol, 1e-9)))
                except (OrbitNotFound, ProjectiveError, ValueError):
                    pass
        successes = ok / grid**2
    return ReflectivityReport(k, o, rank, local_dim, [float(s) for s in sv], successes,
                              _verdict(local_dim, successes))


def _rank_gap(rep: ReflectivityReport) -> float:
    """Ratio of the smallest kept to the largest dropped singular value."""
    sv, r = rep.singular_values, rep.jacobian_rank
    if r == 0 or r >= len(sv):
        return 0.0
    return sv[r - 1] / max(sv[r], 1e-300)


def _seed_vertex(m: Mirror, rng: np.random.Generator, box: Mapping) -> CurvePoint:
    re_lo, re_hi = box.get("re", (-2.0, 2.0))
    im_lo, im_hi = box.get("im", (-0.5, 0.5))
    s = complex(rng.uniform(re_lo, re_hi), rng.uniform(im_lo, im_hi))
    if m.param is not None:
        return CurvePoint.from_param(m, s)
    t = complex(rng.uniform(re_lo, re_hi), rng.uniform(im_lo, im_hi))
    return project_to_curve(m, np.array([s, t]))


def random_seed(b: Billiard, rng: np.random.Generator, boxes: Sequence[Mapping] | Mapping | None = None
                ) -> list[CurvePoint]:
    """One random starting polygon; boxes give real/imaginary ranges per mirror."""
    if boxes is None or isinstance(boxes, Mapping):
        boxes = [boxes or {}] * b.k
    return [_seed_vertex(m, rng, box) for m, box in zip(b.mirrors, boxes)]


def reflectivity_probe(b: Billiard, k: int, n_seeds: int, *, rng: np.random.Generator | int = 0,
                       boxes=None, sample: bool = True, tol: float = SOLVE_TOL,
                       rank_ratio: float = RANK_RATIO, max_anchors: int = 3) -> ReflectivityReport:
    """Multi-start orbit search followed by a dimension estimate.

    The rank is computed for every converged orbit; the grid sampling runs
    only on the anchor, the orbit with the largest local dimension (up to
    ``max_anchors`` candidates are sampled if the first one fails).
    """
    if k != b.k:
        raise ValueError(f"period {k} does not match billiard with {b.k} mirrors")
    rng = np.random.default_rng(rng)
    seeds: list[dict] = []
    found: list[tuple[Orbit, ReflectivityReport]] = []
    for n in range(n_seeds):
        try:
            init = random_seed(b, rng, boxes)
            o = solve_periodic(b, k, init, tol=tol)
        except (OrbitNotFound, ProjectiveError, ValueError) as exc:
            seeds.append({"seed": n, "converged": False, "reason": str(exc)})
            continue
        v = validate_orbit(o, tol=max(tol, 1e-9))
        if not v.ok:
            seeds.append({"seed": n, "converged": False, "reason": v.reason})
            continue
        rep = family_dimension(b, o, sample=False, rank_ratio=rank_ratio, tol=tol)
        seeds.append({"seed": n, "converged": True, "iterations": o.iterations,
                      "local_dim": rep.local_dim})
        found.append((o, rep))
    if not found:
        return ReflectivityReport(k, None, 0, 0, [], None, INCONCLUSIVE, seeds, [])
    orbits = [o for o, _ in found]
    # prefer high dimension, then a clean gap between kept and dropped singular values
    ranked = sorted(found, key=lambda f: (-f[1].local_dim, -_rank_gap(f[1])))
    anchor, best = ranked[0]
    if sample and best.local_dim >= 2:
        for anchor, rep in ranked[:max_anchors]:
            if rep.local_dim < best.local_dim:
                break
            best = family_dimension(b, anchor, sample=True, rank_ratio=rank_ratio, tol=tol)
            if best.verdict == REFLECTIVE:
                break
    best.seeds = seeds
    best.orbits = orbits
    return best


# isotropic chains -----------------------------------------------------------


def _pencil_line(c: complex) -> PLine:
    """Line x + i y = c through I1."""
    return PLine((1.0, 1j, -c))


def _finite_hits(line: PLine, m: Mirror, exclude: PPoint | None) -> list[np.ndarray]:
    out = []
    try:
        hits = intersect_line_curve(line, m)
    except ProjectiveError:
        return out
    for p, _ in hits:
        if not p.is_finite(1e-9):
            continue
        if exclude is not None and p.distance(exclude) < 1e-9:
            continue
        out.append(p.to_affine())
    return out


def _chain(b: Billiard, k: int, c: complex, choose) -> list[np.ndarray] | None:
    """Vertices A1..Ak of the chain started on pencil line ``c``.

    ``choose(j, candidates)`` picks the vertex on mirror j among the finite
    intersection points.
    """
    line = _pencil_line(c)
    pts: list[np.ndarray] = []
    cands = _finite_hits(line, b[0], None)
    if not cands:
        return None
    pts.append(choose(0, cands))
    for j in range(1, k):
        prev = PPoint.affine(*pts[-1])
        if j > 1:
            line = join(prev, I1 if j % 2 == 1 else I2)
        cands = _finite_hits(line, b[j], prev)
        if not cands:
            return None
        pts.append(choose(j, cands))
    return pts


def _closing_point(k: int) -> PPoint:
    # edge j (A_j -> A_{j+1}, 1-based) passes through I1 for odd j
    return I1 if k % 2 == 1 else I2


def _closure(pts: list[np.ndarray], k: int) -> complex:
    line = join(PPoint.affine(*pts[-1]), _closing_point(k))
    h = np.array([pts[0][0], pts[0][1], 1.0])
    return complex(line.array @ h / (np.linalg.norm(line.array) * np.linalg.norm(h)))


def _tracked(b, k, c, ref):
    return _chain(b, k, c, lambda j, cands: min(cands, key=lambda z: np.linalg.norm(z - ref[j])))


def _branch_chains(b: Billiard, k: int, c: complex, limit: int = 64) -> list[list[np.ndarray]]:
    """Every branch of the chain at pencil value c (at most ``limit``)."""
    out: list[list[np.ndarray]] = []

    def rec(j, pts, line):
        if len(out) >= limit:
            return
        if j == k:
            out.append(list(pts))
            return
        prev = PPoint.affine(*pts[-1]) if pts else None
        if j > 1:
            line = join(prev, I1 if j % 2 == 1 else I2)
        for z in _finite_hits(line, b[j], prev):
            rec(j + 1, pts + [z], line)

    rec(0, [], _pencil_line(c))
    return out


def _secant(b, k, c0, ref, tol=1e-12, max_iter=50):
    c1 = c0 * (1 + 1e-4) + 1e-4
    p0 = ref
    try:
        g0 = _closure(p0, k)
        p1 = _tracked(b, k, c1, p0)
        if p1 is None:
            return None
        g1 = _closure(p1, k)
    except CoincidentError:
        return None
    for _ in range(max_iter):
        if abs(g1) < tol:
            return c1, p1, abs(g1)
        if g1 == g0:
            return None
        c2 = c1 - g1 * (c1 - c0) / (g1 - g0)
        if not np.isfinite(c2) or abs(c2) > 1e6:
            return None
        try:
            p2 = _tracked(b, k, c2, p1)
            if p2 is None:
                return None
            g2 = _closure(p2, k)
        except CoincidentError:
            return None
        c0, g0, c1, g1, p1 = c1, g1, c2, g2, p2
    return None


def find_isotropic_edge_orbit(b: Billiard, k: int, n_seeds: int, *,
                              rng: np.random.Generator | int = 0,
                              box: float = 2.0) -> list[ChainResult]:
    """Closed chains whose edges alternate between the I1 and I2 pencils.

    The edge A1A2 lies on a line x + i y = c through I1. Each later vertex is
    joined to the opposite isotropic point, as the reflection law forces, and
    the closing edge A_k A_1 is required to pass through the isotropic point
    that alternation dictates. The closure is solved in c by a secant method
    along each branch. For odd k the closing edge repeats I1 next to the first
    edge, which is flagged as a parity obstruction.
    """
    if k != b.k:
        raise ValueError(f"period {k} does not match billiard with {b.k} mirrors")
    rng = np.random.default_rng(rng)
    results: list[ChainResult] = []
    for _ in range(n_seeds):
        c0 = complex(rng.uniform(-box, box), rng.uniform(-box, box))
        try:
            branches = _branch_chains(b, k, c0)
        except CoincidentError:
            continue
        for ref in branches:
            sol = _secant(b, k, c0, ref)
            if sol is None:
                continue
            c, pts, res = sol
            if any(np.linalg.norm(pts[(j + 1) % k] - pts[j]) < 1e-8 * (1 + np.linalg.norm(pts[j]))
                   for j in range(k)):
                continue
            verts = [PPoint.affine(*z) for z in pts]
            if any(all(v.distance(w) < 1e-8 for v, w in zip(verts, r.vertices)) for r in results):
                continue
            tags = [EdgeTag.ThroughI1 if j % 2 == 0 else EdgeTag.ThroughI2 for j in range(k - 1)]
            tags.append(EdgeTag.ThroughI1 if k % 2 == 1 else EdgeTag.ThroughI2)
            results.append(ChainResult(verts, True, k % 2 == 1, tags, res, c))
    return results


def chain_orbit(b: Billiard, chain: ChainResult) -> Orbit:
    """Orbit object for a closed chain (tangents computed at each vertex)."""
    verts = [CurvePoint(m, p, tangent_line_at(m, p)) for m, p in zip(b.mirrors, chain.vertices)]
    return Orbit(b, tuple(verts))


def angle_gaps(o: Orbit) -> np.ndarray:
    """Complex angle differences of consecutive vertices on a circle centred at 0."""
    P = o.points()
    theta = -1j * np.log((P[:, 0] + 1j * P[:, 1]))
    return np.diff(theta)

