import pytest

from graverfold.matrix import IntMatrix
from graverfold.oracle import (BoxSpec, OracleLimitError, feasible_points, graver_box_radius,
                               graver_oracle, graver_oracle_exact, ip_oracle, kernel_points,
                               max_abs_minor)
from graverfold.problem import INF, IPInstance, SeparableObjective, Status

m = IntMatrix.from_rows


def inst(M, b, lo, up, c):
    return IPInstance(m(M), b, lo, up, SeparableObjective.linear_only(c))


def test_graver_oracle_examples():
    assert graver_oracle(m([[1, 2]]), BoxSpec.cube(2, 4)) == {(2, -1), (-2, 1)}
    assert graver_oracle(IntMatrix.identity(3), BoxSpec.cube(3, 2)) == set()
    six = graver_oracle(m([[1, 1, 1]]), BoxSpec.cube(3, 3))
    assert len(six) == 6 and all(sorted(v) == [-1, 0, 1] for v in six)


def test_small_box_misses_elements():
    # (3, -1) needs radius 3; a radius-2 box cannot see it
    assert (3, -1) not in graver_oracle(m([[1, 3]]), BoxSpec.cube(2, 2))
    assert (3, -1) in graver_oracle_exact(m([[1, 3]]))


def test_box_radius_covers_known_basis():
    M = m([[1, 1, 1, 1], [0, 1, 2, 3]])
    assert max_abs_minor(M) == 3
    assert graver_box_radius(M) >= 3
    assert max(max(abs(x) for x in v) for v in graver_oracle_exact(M)) == 3


def test_kernel_points_include_zero_and_respect_box():
    pts = kernel_points(m([[1, -1]]), BoxSpec((-2, 0), (2, 1)))
    assert sorted(map(tuple, pts.tolist())) == [(0, 0), (1, 1)]


def test_ceiling_checked_before_enumeration():
    with pytest.raises(OracleLimitError):
        graver_oracle(m([[1, 1, 1, 1, 1]]), BoxSpec.cube(5, 50, ceiling=1000))
    with pytest.raises(OracleLimitError):
        ip_oracle(inst([[1, 1, 1]], [0], (-50,) * 3, (50,) * 3, [1, 1, 1]), ceiling=1000)


def test_boxspec_rejects_infinite_or_empty():
    with pytest.raises(ValueError):
        BoxSpec((0,), (INF,))
    with pytest.raises(ValueError):
        BoxSpec((1,), (0,))


def test_ip_oracle_examples():
    out = ip_oracle(inst([[1, 1]], [3], (0, 0), (3, 3), [1, -1]))
    assert out.status is Status.OPTIMAL and out.point == (0, 3) and out.value == -3
    assert ip_oracle(inst([[1, 1]], [9], (0, 0), (3, 3), [1, -1])).status is Status.INFEASIBLE
    with pytest.raises(ValueError):
        ip_oracle(inst([[1, -1]], [0], (0, 0), (INF, INF), [1, 1]))


def test_ip_oracle_lexicographic_tie_break():
    # every feasible point has value 0; (0, 2) is lexicographically smallest
    out = ip_oracle(inst([[1, 1]], [2], (0, 0), (2, 2), [1, 1]))
    assert out.point == (0, 2)


def test_feasible_points():
    pts = feasible_points(inst([[1, 1]], [3], (0, 0), (3, 3), [0, 0]))
    assert pts == [(0, 3), (1, 2), (2, 1), (3, 0)]
