import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from cbilliards.projective import (
    I1,
    I2,
    INFINITY_LINE,
    CoincidentError,
    Dir2,
    PLine,
    PPoint,
    ProjectiveError,
    bilinear_form,
    chordal,
    infinity_point_of,
    is_isotropic_direction,
    is_isotropic_line,
    join,
    meet,
)

from conftest import nonzero_cplx, triples


@pytest.mark.parametrize("u, v, expected", [
    ((1, 1j), (1, 1j), 0),
    ((1, 0), (0, 1), 0),
    ((1, 2), (3, 4), 11),
])
def test_bilinear_form_examples(u, v, expected):
    assert bilinear_form(Dir2(*u), Dir2(*v)) == pytest.approx(expected)


def test_bilinear_form_has_no_conjugation():
    u = Dir2(1j, 0)
    assert bilinear_form(u, u) == pytest.approx(-1)


def test_join_examples():
    assert join(PPoint([0, 0, 1]), PPoint([1, 1, 1])) == PLine([1, -1, 0])
    assert join(PPoint([0, 0, 1]), I1) == PLine([-1j, 1, 0])
    with pytest.raises(CoincidentError):
        join(PPoint([1, 0, 1]), PPoint([1, 0, 1]))


def test_meet_examples():
    assert meet(PLine([1, -1, 0]), PLine([0, 0, 1])) == PPoint([1, 1, 0])
    assert meet(PLine([1, 0, -1]), PLine([0, 1, -1])) == PPoint([1, 1, 1])
    with pytest.raises(ProjectiveError):
        meet(PLine([1, 0, 0]), PLine([1, 0, 0]))


def test_isotropic_lines():
    assert is_isotropic_line(PLine([0, 0, 1]))
    assert is_isotropic_line(PLine([1j, -1, 5]))
    assert not is_isotropic_line(PLine([1, 0, 0]))


def test_isotropic_directions():
    assert is_isotropic_direction(Dir2(1, 1j))
    assert not is_isotropic_direction(Dir2(3, 4))
    assert is_isotropic_direction(Dir2(2, -2j))


def test_infinity_point_of():
    assert infinity_point_of(PLine([1, -1, 0])) == PPoint([1, 1, 0])
    through = join(PPoint([0, 0, 1]), PPoint([-1j, 1, 1]))
    assert infinity_point_of(through) == I1
    with pytest.raises(ProjectiveError):
        infinity_point_of(INFINITY_LINE)


def test_circular_points_are_the_isotropic_solutions():
    # dx^2 + dy^2 = 0 with dx = 1 gives dy = +-i
    roots = np.roots([1, 0, 1])
    pts = {PPoint([1, r, 0]) == I1 or PPoint([1, r, 0]) == I2 for r in roots}
    assert pts == {True}
    assert PPoint([1, roots[0], 0]) != PPoint([1, roots[1], 0])


def test_json_round_trip():
    p = PPoint([1 + 2j, -0.5, 3j])
    assert PPoint.from_json(p.to_json()) == p
    line = PLine([1, 1j, -2])
    assert PLine.from_json(line.to_json()) == line


def test_zero_vector_rejected():
    with pytest.raises(ValueError):
        PPoint([0, 0, 0])


@given(triples(), nonzero_cplx)
def test_scale_invariance(v, lam):
    p = PPoint(v)
    q = PPoint([lam * c for c in v])
    assert p == q
    assert chordal(p.array, q.array) < 1e-12


@given(triples(), triples(), triples())
def test_join_meet_duality(p, q, r):
    P, Q, R = (np.array(x) for x in (p, q, r))
    M = np.array([P / np.linalg.norm(P), Q / np.linalg.norm(Q), R / np.linalg.norm(R)])
    assume(abs(np.linalg.det(M)) > 1e-3)
    back = meet(join(PPoint(p), PPoint(q)), join(PPoint(p), PPoint(r)))
    assert chordal(back.array, P) < 1e-9


@given(triples())
def test_isotropic_line_iff_incident_with_circular_point(v):
    line = PLine(v)
    a = line.array / np.linalg.norm(line.array)
    inc = min(abs(a @ I.array) / np.linalg.norm(I.array) for I in (I1, I2))
    assume(inc > 1e-6 or inc < 1e-14)
    assert is_isotropic_line(line) == (inc < 1e-14)
    if not line.is_infinity():
        u = line.direction()
        assert is_isotropic_line(line) == (abs(bilinear_form(u, u)) < 1e-10 * (abs(u.dx) ** 2 + abs(u.dy) ** 2))


@given(st.floats(-np.pi, np.pi))
def test_real_points_at_infinity_are_not_isotropic(theta):
    assert not is_isotropic_direction(Dir2(np.cos(theta), np.sin(theta)))
