import random
from fractions import Fraction

import pytest

from graverfold.generators import random_transposed_instance
from graverfold.matrix import IntMatrix, Shape, assemble_transposed_form
from graverfold.models import (ModelError, NetworkSpec, Scenario, SIPSpec, build_multicommodity,
                               build_sip_dominance, corollary_transform, equalize_M_N,
                               incidence_matrix, restore_original, sip_project, true_value)
from graverfold.oracle import feasible_points, ip_oracle
from graverfold.problem import IPInstance, SeparableObjective, Status
from graverfold.solver import augment_solve, four_block_solve
from reference import sip_brute_force

m = IntMatrix.from_rows


def one_edge(cost=2, penalty=5, capacity=0, supply=1):
    return NetworkSpec(2, ((0, 1),), ((supply, -supply),), (cost,),
                       (Scenario((capacity,), (penalty,), Fraction(1)),))


def solve_value(instance):
    out = augment_solve(instance)
    return true_value(instance, out.value)


def oracle_value(instance):
    return true_value(instance, ip_oracle(instance).value)


def test_incidence_signs():
    A = incidence_matrix(3, [(0, 1), (1, 2)])
    assert A.to_rows() == [[1, 0], [-1, 1], [0, -1]]


def test_one_edge_pays_penalty():
    inst = build_multicommodity(one_edge())
    assert oracle_value(inst) == 2 + 5 == solve_value(inst)


def test_zero_demand_ships_nothing():
    spec = NetworkSpec(2, ((0, 1),), ((0, 0),), (3,), (Scenario((1,), (4,), Fraction(1)),))
    inst = build_multicommodity(spec)
    out = ip_oracle(inst)
    assert out.value == 0 and out.point[0] == 0


def test_multicommodity_layout():
    sc = Scenario((1, 1), (1, 1), Fraction(1, 2))
    spec = NetworkSpec(3, ((0, 1), (1, 2)), ((1, 0, -1), (0, 1, -1)), (1, 1), (sc, sc))
    inst = build_multicommodity(spec)
    assert inst.shape is Shape.TRANSPOSED
    sys_ = inst.system
    assert sys_.A == incidence_matrix(3, [(0, 1), (1, 2)])
    assert sys_.B.is_zero() and sys_.D == IntMatrix.identity(2)
    assert sys_.C.to_rows() == [[1, 0, -1, 0], [0, 1, 0, -1]]
    assert inst.matrix.shape == (2 * 3 + 2 * 2, 2 * 2 + 2 * 4)
    assert inst.objective_scale == 2


def test_flow_conservation_on_every_feasible_point():
    spec = NetworkSpec(3, ((0, 1), (1, 2), (0, 2)), ((1, 0, -1),), (1, 1, 3),
                       (Scenario((1, 0, 1), (2, 2, 2), Fraction(1)),))
    inst = build_multicommodity(spec)
    A = incidence_matrix(3, spec.edges)
    for z in feasible_points(inst):
        assert A.matvec(z[:3]) == (1, 0, -1)


def test_network_validation():
    with pytest.raises(ModelError, match="balance"):
        NetworkSpec(2, ((0, 1),), ((1, 0),), (1,), (Scenario((1,), (1,), Fraction(1)),))
    with pytest.raises(ModelError, match="negative"):
        one_edge(capacity=-1)
    with pytest.raises(ModelError, match="sum to 1"):
        NetworkSpec(2, ((0, 1),), ((1, -1),), (1,), (Scenario((1,), (1,), Fraction(1, 2)),))


def test_equalize_identity_when_counts_match():
    sc = Scenario((1,), (1,), Fraction(1, 2))
    spec = NetworkSpec(2, ((0, 1),), ((1, -1), (1, -1)), (1,), (sc, sc))
    assert equalize_M_N(spec) is spec


def test_equalize_more_scenarios():
    spec = NetworkSpec(2, ((0, 1), (0, 1)), ((2, -2),), (1, 3), (
        Scenario((1, 1), (4, 4), Fraction(1, 2)),
        Scenario((0, 2), (7, 1), Fraction(1, 3)),
        Scenario((2, 0), (3, 3), Fraction(1, 6))))
    eq = equalize_M_N(spec)
    assert eq.n_commodities == eq.n_scenarios == 3
    assert eq.supplies[1:] == ((0, 0), (0, 0))
    before, after = build_multicommodity(spec), build_multicommodity(eq)
    assert after.shape is Shape.TRANSPOSED and before.shape is None
    assert oracle_value(before) == oracle_value(after) == solve_value(after)


def test_equalize_more_commodities():
    spec = NetworkSpec(2, ((0, 1), (0, 1)), ((1, -1), (1, -1), (1, -1)), (1, 2),
                       (Scenario((1, 0), (3, 2), Fraction(1)),))
    eq = equalize_M_N(spec)
    assert [s.probability for s in eq.scenarios] == [Fraction(1, 3)] * 3
    assert len({(s.capacity, s.penalty) for s in eq.scenarios}) == 1
    before, after = build_multicommodity(spec), build_multicommodity(eq)
    assert oracle_value(before) == oracle_value(after) == solve_value(after)


def sip_spec(abar=(Fraction(1, 2),), a=(3,), z=((2,),)):
    return SIPSpec(T=m([[1]]), W=m([[1]]), g=(1,), c=(1,), q=(2,), a=a, abar=abar, z=z,
                   x_bounds=((0,), (3,)), y_bounds=((0,), (3,)))


def test_sip_shape():
    spec = SIPSpec(T=m([[1, 0]]), W=m([[1, 1]]), g=(1, 1), c=(1, 0), q=(0, 1), a=(2, 3),
                   abar=(Fraction(1), Fraction(2)), z=((2,), (3,), (1,)),
                   x_bounds=((0, 0), (2, 2)), y_bounds=((0, 0), (2, 2)))
    inst = build_sip_dominance(spec)
    sys_ = inst.system
    K, d, mW = 2, 1, 2
    assert inst.shape is Shape.FOUR_BLOCK and sys_.n == 3
    assert sys_.d_C == K and sys_.C.is_zero()
    assert sys_.A.rows == K * (d + 1) and sys_.A.cols == K * (mW + 2) + K
    W_ext = [[1, 1, 0, 0], [0, 1, -1, 1]]
    A_rows = sys_.A.to_rows()
    assert [r[:4] for r in A_rows[:2]] == W_ext and [r[4:8] for r in A_rows[2:4]] == W_ext
    assert sys_.B.to_rows() == [[1, 0], [1, 0], [1, 0], [1, 0]]


def test_sip_single_scenario_matches_direct_enumeration():
    for abar in (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(3)):
        spec = sip_spec(abar=(abar,))
        inst = build_sip_dominance(spec)
        ref = sip_brute_force(spec)
        out = ip_oracle(inst)
        if ref is None:
            assert out.status is Status.INFEASIBLE
        else:
            assert out.value == ref == four_block_solve(inst).value


def test_sip_loose_threshold_is_inactive():
    # shortfall never exceeds 6 here, so abar = 6 cannot bind
    spec = sip_spec(abar=(Fraction(6),), z=((2,), (3,)))
    relaxed = sip_spec(abar=(Fraction(10**6),), z=((2,), (3,)))
    assert sip_brute_force(spec) == sip_brute_force(relaxed)
    assert augment_solve(build_sip_dominance(spec)).value == sip_brute_force(relaxed)


@pytest.mark.parametrize("abar,a,z", [
    ((Fraction(1), Fraction(1, 2)), (3, 4), ((2,),)),
    ((Fraction(1, 2),), (3,), ((2,), (1,))),
])
def test_sip_feasible_points_project_to_original(abar, a, z):
    spec = sip_spec(abar=abar, a=a, z=z)
    inst = build_sip_dominance(spec)
    pts = feasible_points(inst)
    assert pts
    for p in pts:
        x, y, v = sip_project(spec, p)
        for (l, k), yk in y.items():
            assert x[0] + yk[0] == spec.z[l][0]
            assert spec.c[0] * x[0] + spec.q[0] * yk[0] - spec.a[k] <= v[l, k]
            assert v[l, k] >= 0
        for k in range(spec.K):
            assert Fraction(sum(v[l, k] for l in range(spec.L)), spec.L) <= spec.abar[k]
        assert inst.value(p) == spec.g[0] * x[0]
    assert min(inst.value(p) for p in pts) == sip_brute_force(spec)


def test_sip_rejects_infinite_bounds():
    with pytest.raises(ModelError):
        SIPSpec(T=m([[1]]), W=m([[1]]), g=(1,), c=(1,), q=(1,), a=(1,), abar=(Fraction(1),),
                z=((1,),), x_bounds=((0,), (float("inf"),)), y_bounds=((0,), (1,)))


def test_transform_layout_for_unit_blocks():
    one = m([[1]])
    sys_ = assemble_transposed_form(one, one, one, one, 2)
    inst = IPInstance.from_system(sys_, (2, 1, 1, 2), (0,) * 4, (3,) * 4,
                                  SeparableObjective.linear_only([1, -1, 2, 1]))
    out = corollary_transform(inst)
    assert out.matrix.to_rows() == [
        # w_x w_y x_1 y_1 x_2 y_2
        [-1, 0, 1, 0, 1, 0],
        [0, -1, 0, 1, 0, 1],
        [1, 0, 0, 1, 0, 0],   # D w_x + C y_1
        [0, 1, 1, 0, 0, 0],   # B w_y + A x_1
        [1, 0, 0, 0, 0, 1],
        [0, 1, 0, 0, 1, 0],
    ]
    assert out.b == (0, 0, 1, 2, 2, 1)
    assert out.lower[:2] == (0, 0) and out.upper[:2] == (6, 6)
    assert out.objective.linear == (0, 0, 1, 2, -1, 1)
    assert out.n == 2 + 2 * 2


def test_transform_preserves_optimum():
    rng = random.Random(21)
    for _ in range(6):
        inst = random_transposed_instance(rng)
        out = corollary_transform(inst)
        ref = ip_oracle(inst)
        got = augment_solve(out)
        assert got.value == ref.value
        assert inst.is_feasible(restore_original(out, got.point))


def test_transform_maps_optima_onto_optima():
    rng = random.Random(4)
    inst = random_transposed_instance(rng, N=1)
    out = corollary_transform(inst)
    ref = ip_oracle(inst)
    originals = {z for z in feasible_points(inst) if inst.value(z) == ref.value}
    lifted = {restore_original(out, z) for z in feasible_points(out) if out.value(z) == ref.value}
    assert originals == lifted


def test_transform_requires_transposed_shape():
    with pytest.raises(ModelError):
        corollary_transform(IPInstance(m([[1]]), (0,), (0,), (1,), SeparableObjective.linear_only([0])))
