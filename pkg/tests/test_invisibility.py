import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cbilliards.invisibility import (
    Body,
    ORay,
    TangencyError,
    build_two_parabola_body,
    check_invisible,
    check_invisible_orbit,
    confocal_parabolas,
    disk_body,
    first_intersection,
    polygon_body,
    reflect_real,
    trace,
)
from cbilliards.mirrors import CurvePoint, Mirror
from cbilliards.orbits import Billiard, make_orbit, validate_orbit
from cbilliards.projective import Dir2, PPoint
from cbilliards.reflection import reflect_direction


@pytest.fixture(scope="module")
def horns():
    return build_two_parabola_body()


def test_first_intersection_disk():
    body = disk_body()
    hit = first_intersection(body, ORay((-2, 0), (1, 0)))
    assert np.allclose(hit.point, [-1, 0], atol=1e-12)
    assert first_intersection(body, ORay((-2, 2), (1, 0))) is None
    graze = first_intersection(body, ORay((-2, 1), (1, 0)))
    assert graze.tangency
    with pytest.raises(TangencyError):
        trace(body, ORay((-2, 1), (1, 0)))


def test_normal_incidence_on_disk():
    tr = trace(disk_body(), ORay((-2, 0), (1, 0)))
    assert tr.reflections == 1
    assert np.allclose(tr.output.d, [-1, 0])


def _unfolded_hits(start, d, w, h, n):
    """Bounce points in the box [0,w]x[0,h] from the unfolded straight line."""
    times = []
    for axis, size in ((0, w), (1, h)):
        step = size / abs(d[axis])
        first = ((size if d[axis] > 0 else 0) - start[axis]) / d[axis]
        times += [first + j * step for j in range(n)]
    times = sorted(times)[:n]

    def fold(u, size):
        u = np.mod(u, 2 * size)
        return u if u <= size else 2 * size - u

    return [np.array([fold(start[0] + t * d[0], w), fold(start[1] + t * d[1], h)]) for t in times]


def test_rectangle_bounces_match_unfolding():
    w, h = 2.0, 1.0
    body = polygon_body([(0, 0), (w, 0), (w, h), (0, h)])
    start = np.array([0.25, 0.5 + 1e-3 * np.sqrt(2)])
    d = np.array([1.0, 1.0]) / np.sqrt(2)
    tr = trace(body, ORay(start, d), max_n=12)
    assert not tr.complete and tr.reflections == 12
    expected = _unfolded_hits(start, d, w, h, 12)
    assert np.allclose(np.array(tr.points), np.array(expected), atol=1e-9)


def test_miss_leaves_ray_unchanged():
    ray = ORay((-2, 5), (1, 0))
    tr = trace(disk_body(), ray)
    assert tr.reflections == 0 and tr.output is ray
    assert check_invisible(disk_body(), ray).invisible is None


def test_disk_is_visible():
    for y in (-0.7, 0.0, 0.3, 0.9):
        v = check_invisible(disk_body(), ORay((-3, y), (1, 0)))
        assert v.invisible is False


def test_horn_body_invisible(horns):
    for ray in horns.sample_rays(11):
        v = check_invisible(horns.body, ray)
        assert v.invisible is True
        assert v.reflections == 4
        assert v.deviation < 1e-9


def test_rays_outside_aperture(horns):
    top = horns.body.bbox[3] + 1
    for x in (0.0, 0.5, 2.5, 3.0, 0.999):
        v = check_invisible(horns.body, ORay((x, top), (0, -1)))
        assert v.invisible is not True


def test_scaled_body_same_verdicts(horns):
    big = build_two_parabola_body(scale=2.0)
    for r1 in horns.sample_rays(7):
        r2 = ORay(2 * r1.o, r1.d)
        v1, v2 = check_invisible(horns.body, r1), check_invisible(big.body, r2)
        assert (v1.invisible, v1.reflections) == (v2.invisible, v2.reflections)


@given(st.floats(-3, 3), st.floats(0.05, 1.5))
def test_similarity_invariance_on_disk(y, factor):
    body = disk_body()
    ray = ORay((-4, y), (1, 0.1))
    try:
        a = check_invisible(body, ray)
        b = check_invisible(body.scaled(factor), ORay(factor * ray.o, ray.d))
    except TangencyError:
        return
    assert (a.invisible, a.reflections) == (b.invisible, b.reflections)


def test_invisible_orbit_law_examples():
    flat = Mirror.line(0, 1, -1, label="y=1")  # horizontal tangent at (1, 1)
    dummy = Mirror.line(1, 0, 0, label="x=0")
    assert check_invisible_orbit([dummy, flat, dummy], [(0, 0), (1, 1), (2, 0)], endpoints=False).pattern[1] == "e"
    diag = Mirror.line(1, -1, 0, label="y=x")
    # neighbours of A1 along (1,0) and (0,1); tangent (1,1) is the interior bisector
    v = check_invisible_orbit([diag, dummy, dummy], [(0, 0), (1, 0), (0, 1)])
    assert v.pattern[0] == "i"
    anti = Mirror.line(1, 1, 0, label="y=-x")
    v = check_invisible_orbit([anti, dummy, dummy], [(0, 0), (1, 0), (0, 1)])
    assert not v.ok and v.pattern[0] == "e"


def test_horn_trajectory_obeys_invisibility_law(horns):
    for x0 in (1.2, 1.5, 1.9):
        curves, pts = zip(*horns.trajectory_polygon(x0))
        v = check_invisible_orbit(curves, [p.real for p in pts])
        assert v.ok and v.pattern == "ieei"


def test_exterior_law_agrees_with_validate_orbit(rng):
    c = Mirror.circle(0, 0, 1)
    b = Billiard([c, c, c])
    for n in range(40):
        if n % 2:
            th = rng.uniform(0, 2 * np.pi) + 2 * np.pi / 3 * np.arange(3)
        else:
            th = rng.uniform(0, 2 * np.pi, 3)
        pts = np.c_[np.cos(th), np.sin(th)]
        if min(np.linalg.norm(pts - np.roll(pts, 1, 0), axis=1)) < 1e-2:
            continue
        law = check_invisible_orbit([c] * 3, pts, endpoints=False, tol=1e-9)
        o = make_orbit(b, [CurvePoint.on(c, PPoint.affine(*p)) for p in pts])
        assert law.ok == validate_orbit(o).ok


def test_reflection_matches_complex_reflection(rng):
    c = Mirror.circle(0.3, -0.2, 1.7)
    for _ in range(1000):
        a = rng.uniform(0, 2 * np.pi)
        p = np.array([0.3 + 1.7 * np.cos(a), -0.2 + 1.7 * np.sin(a)])
        d = rng.normal(size=2)
        d /= np.linalg.norm(d)
        got = reflect_real(d, c, p)
        g = c.gradient(p).real
        expected = reflect_direction(Dir2(*d), Dir2(-g[1], g[0])).array
        expected = expected.real / np.linalg.norm(expected.real)
        assert min(np.linalg.norm(got - expected), np.linalg.norm(got + expected)) < 1e-12


def test_focal_property(rng):
    p1, _ = confocal_parabolas()  # y = (x^2 - 1)/2, focus (0, 0)
    for x in rng.uniform(-3, 3, 100):
        if abs(x) < 1e-3:
            continue
        p = np.array([x, (x * x - 1) / 2])
        out = reflect_real(np.array([0.0, -1.0]), p1, p)
        # reflected line passes through the focus
        assert abs(out[0] * (0 - p[1]) - out[1] * (0 - p[0])) < 1e-10


def test_body_json_round_trip(horns):
    data = horns.body.to_json()
    back = Body.from_json(data)
    assert back.to_json() == data
