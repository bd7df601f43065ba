"""Graver-basis augmentation for separable convex integer programs.

The main loop is the classical one: get a feasible point (phase I), then
keep applying the best augmentation step ``z <- z + alpha * v`` over all
Graver elements ``v`` until none improves. For four-block systems the
structured variant enumerates first-stage parts ``x̂`` and solves the
resulting N-fold programs for the second-stage parts.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Sequence

from .graver import DEFAULT_VECTOR_CEILING, GraverBasis, graver_basis, norm1
from .matrix import (IntMatrix, NoSolution, Shape, Vector, assemble_four_block,
                     solve_diophantine)
from .problem import (INF, NEG_INF, AugmentationStep, ConvexPiecewise, IPInstance,
                      SeparableObjective, SolveOutcome, Status, is_finite)

log = logging.getLogger(__name__)

DEFAULT_ITERATION_CEILING = 10**6


class IterationLimitError(RuntimeError):
    pass


class InfeasiblePointError(ValueError):
    """A routine that needs a feasible starting point got an infeasible one."""


class InnerSolveError(RuntimeError):
    def __init__(self, candidate: Vector, cause: Exception):
        super().__init__(f"inner N-fold solve failed for first-stage candidate {candidate}: {cause}")
        self.candidate = candidate


@dataclass(frozen=True)
class _Step:
    delta: int
    direction: Vector
    alpha: int


def _step_limit(z: Sequence[int], v: Sequence[int], lower, upper):
    """Largest alpha keeping ``z + alpha v`` within bounds (may be INF)."""
    limit = INF
    for zi, vi, lo, up in zip(z, v, lower, upper):
        if vi > 0 and up != INF:
            limit = min(limit, (up - zi) // vi)
        elif vi < 0 and lo != NEG_INF:
            limit = min(limit, (zi - lo) // -vi)
    return limit


def _line_search(z, v, support, f: SeparableObjective, limit):
    """Best step along ``v`` from ``z``.

    Returns ``(alpha, delta)`` for the smallest minimiser of
    ``g(alpha) = f(z + alpha v) - f(z)`` over ``1 <= alpha <= limit``, or
    ``None`` when ``g`` decreases without bound.
    """
    base = {i: f.term(i, z[i]) for i in support}

    def g(alpha: int) -> int:
        return sum(f.term(i, z[i] + alpha * v[i]) - base[i] for i in support)

    if limit == INF:
        slope = sum(f.terminal_slope(i, v[i]) for i in support)
        if slope < 0:
            return None
        # past every breakpoint crossing g is affine with slope >= 0
        hi = 1
        for i in support:
            for b in f.breakpoints(i):
                hi = max(hi, -((z[i] - b) // v[i]) + 1)
    else:
        hi = limit
    lo = 1
    # smallest alpha in [lo, hi] with g(alpha + 1) >= g(alpha), else hi
    while lo < hi:
        mid = (lo + hi) // 2
        if g(mid + 1) >= g(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo, g(lo)


def best_step(z: Sequence[int], instance: IPInstance, G: GraverBasis,
              objective: SeparableObjective | None = None, lower=None, upper=None):
    """Graver-best augmentation step from feasible ``z``.

    Returns ``None`` if nothing improves, ``("unbounded", v)`` for a ray of
    unbounded decrease, else a :class:`_Step`.
    """
    f = objective or instance.objective
    lower = instance.lower if lower is None else lower
    upper = instance.upper if upper is None else upper
    best = None
    for v in G.vectors:
        limit = _step_limit(z, v, lower, upper)
        if limit < 1:
            continue
        support = [i for i, x in enumerate(v) if x]
        found = _line_search(z, v, support, f, limit)
        if found is None:
            return ("unbounded", v)
        alpha, delta = found
        if delta < 0 and (best is None or delta < best.delta):
            best = _Step(delta, v, alpha)
    return best


def _augment(z, instance, G, objective=None, lower=None, upper=None,
             max_iterations=DEFAULT_ITERATION_CEILING):
    trace: list[AugmentationStep] = []
    z = list(z)
    for _ in range(max_iterations):
        step = best_step(z, instance, G, objective, lower, upper)
        if step is None:
            return Status.OPTIMAL, tuple(z), trace
        if isinstance(step, tuple):
            trace.append(AugmentationStep(step[1], 0, 0))
            return Status.UNBOUNDED, tuple(z), trace
        z = [a + step.alpha * b for a, b in zip(z, step.direction)]
        trace.append(AugmentationStep(step.direction, step.alpha, step.delta))
    raise IterationLimitError(f"no optimum after {max_iterations} augmentation steps")


def violation_objective(lower, upper) -> SeparableObjective:
    """Total bound violation as a separable objective.

    Its terms are anchored at ``phi(0) = 0``, so only differences are
    meaningful; use :func:`bound_violation` for the absolute amount.
    """
    terms = []
    for lo, up in zip(lower, upper):
        bps, slopes = [], [0]
        if lo != NEG_INF:
            bps.append(lo)
            slopes = [-1, 0]
        if up != INF:
            bps.append(up)
            slopes.append(1)
        terms.append(ConvexPiecewise(tuple(bps), tuple(slopes)) if bps else None)
    return SeparableObjective((0,) * len(terms), tuple(terms))


def bound_violation(z: Sequence[int], lower, upper) -> int:
    """``Σ max(0, l_i - z_i) + max(0, z_i - u_i)``; zero iff z is in bounds."""
    return sum(max(0, lo - t) + max(0, t - up) for t, lo, up in zip(z, lower, upper))


def _graver_for(instance: IPInstance, graver: GraverBasis | None, ceiling: int) -> GraverBasis:
    if graver is None:
        return graver_basis(instance.matrix, ceiling=ceiling)
    if graver.matrix != instance.matrix:
        raise ValueError("Graver basis belongs to a different matrix")
    return graver


def phase1_feasible(instance: IPInstance, graver: GraverBasis | None = None,
                    graver_ceiling: int = DEFAULT_VECTOR_CEILING,
                    max_iterations: int = DEFAULT_ITERATION_CEILING):
    """A feasible point of ``instance``, or ``Status.INFEASIBLE``.

    Starts from any integer solution of ``matrix z = b`` and minimises the
    total bound violation by augmentation over the unconstrained lattice.
    """
    z0 = solve_diophantine(instance.matrix, instance.b)
    if z0 is NoSolution:
        return Status.INFEASIBLE
    if instance.in_bounds(z0):
        return z0
    G = _graver_for(instance, graver, graver_ceiling)
    n = instance.n
    viol = violation_objective(instance.lower, instance.upper)
    status, z, _ = _augment(z0, instance, G, viol, (NEG_INF,) * n, (INF,) * n, max_iterations)
    assert status is Status.OPTIMAL
    if bound_violation(z, instance.lower, instance.upper) > 0:
        return Status.INFEASIBLE
    return z


def certify_or_improve(z0: Sequence[int], instance: IPInstance, G: GraverBasis) -> SolveOutcome:
    """Decide whether ``z0`` is optimal; otherwise return the Graver-best step."""
    z0 = tuple(z0)
    if not instance.is_feasible(z0):
        raise InfeasiblePointError(f"{z0} is not feasible")
    step = best_step(z0, instance, G)
    if step is None:
        return SolveOutcome(Status.OPTIMAL_CERTIFIED, z0, instance.value(z0))
    if isinstance(step, tuple):
        return SolveOutcome(Status.UNBOUNDED, z0, None, [AugmentationStep(step[1], 0, 0)])
    z1 = tuple(a + step.alpha * b for a, b in zip(z0, step.direction))
    return SolveOutcome(Status.STEP_FOUND, z1, instance.value(z1),
                        [AugmentationStep(step.direction, step.alpha, step.delta)])


def augment_solve(instance: IPInstance, graver: GraverBasis | None = None,
                  graver_ceiling: int = DEFAULT_VECTOR_CEILING,
                  max_iterations: int = DEFAULT_ITERATION_CEILING) -> SolveOutcome:
    """Solve ``instance`` by phase I followed by Graver-best augmentation."""
    if solve_diophantine(instance.matrix, instance.b) is NoSolution:
        return SolveOutcome(Status.INFEASIBLE)
    G = _graver_for(instance, graver, graver_ceiling)
    z = phase1_feasible(instance, G, max_iterations=max_iterations)
    if z is Status.INFEASIBLE:
        return SolveOutcome(Status.INFEASIBLE)
    status, z, trace = _augment(z, instance, G, max_iterations=max_iterations)
    value = instance.value(z) if status is Status.OPTIMAL else None
    return SolveOutcome(status, z, value, trace)


# ---------------------------------------------------------------------------
# Structured algorithm for four-block systems


def _require_shape(instance: IPInstance, shape: Shape) -> None:
    if instance.system is None or instance.system.shape is not shape:
        raise ValueError(f"instance must carry a {shape.value} block system")


def nfold_solve(instance: IPInstance, graver: GraverBasis | None = None,
                graver_ceiling: int = DEFAULT_VECTOR_CEILING,
                max_iterations: int = DEFAULT_ITERATION_CEILING) -> SolveOutcome:
    """Solve a four-block instance whose B and C blocks vanish (an N-fold IP)."""
    _require_shape(instance, Shape.FOUR_BLOCK)
    sys_ = instance.system
    if not (sys_.B.is_zero() and sys_.C.is_zero()):
        raise ValueError("nfold_solve needs zero B and C blocks")
    return augment_solve(instance, graver, graver_ceiling, max_iterations)


def inner_nfold_instance(instance: IPInstance, x_new: Sequence[int]) -> IPInstance:
    """The N-fold program over the second-stage parts with ``x`` fixed to ``x_new``."""
    sys_ = instance.system
    nB, N = sys_.n_B, sys_.n
    zero_B = IntMatrix.zeros(sys_.B.rows, nB)
    zero_C = IntMatrix.zeros(sys_.C.rows, nB)
    inner = assemble_four_block(sys_.A, zero_B, zero_C, sys_.D, N)
    Cx = sys_.C.matvec(x_new)
    Bx = sys_.B.matvec(x_new)
    shift = Cx + Bx * N
    b = tuple(a - s for a, s in zip(instance.b, shift))
    lower = tuple(x_new) + instance.lower[nB:]
    upper = tuple(x_new) + instance.upper[nB:]
    return IPInstance.from_system(inner, b, lower, upper, instance.objective)


def candidate_first_stage(instance: IPInstance, z0: Sequence[int], G: GraverBasis | None = None,
                          mode: str = "projection", bound: int | None = None,
                          graver_ceiling: int = DEFAULT_VECTOR_CEILING) -> list[Vector]:
    """First-stage moves ``x̂`` to try from ``z0``.

    ``projection`` uses the x-parts of the full Graver basis (plus zero).
    ``bound`` enumerates every ``x̂`` with ``‖x̂‖₁ <= bound`` that keeps
    ``x + x̂`` inside the bounds, which needs no Graver basis of the
    assembled matrix.
    """
    nB = instance.system.n_B
    x = z0[:nB]
    if mode == "projection":
        if G is None:
            G = graver_basis(instance.matrix, ceiling=graver_ceiling)
        cands = {tuple(v[:nB]) for v in G.vectors}
        cands.add((0,) * nB)
    elif mode == "bound":
        if bound is None:
            raise ValueError("bound mode needs a norm bound")
        ranges = []
        for j in range(nB):
            lo = instance.lower[j] - x[j] if is_finite(instance.lower[j]) else -bound
            up = instance.upper[j] - x[j] if is_finite(instance.upper[j]) else bound
            ranges.append(range(max(lo, -bound), min(up, bound) + 1))
        cands = {c for c in itertools.product(*ranges) if norm1(c) <= bound}
    else:
        raise ValueError(f"unknown candidate mode {mode!r}")
    out = []
    for c in cands:
        xn = [a + b for a, b in zip(x, c)]
        if all(instance.lower[j] <= xn[j] <= instance.upper[j] for j in range(nB)):
            out.append(c)
    return sorted(out, key=lambda c: (norm1(c), c))


def inner_graver_basis(instance: IPInstance, ceiling: int = DEFAULT_VECTOR_CEILING) -> GraverBasis:
    """Graver basis of the inner N-fold matrix; it does not depend on ``x``."""
    nB = instance.system.n_B
    inner = inner_nfold_instance(instance, (0,) * nB)
    return graver_basis(inner.matrix, ceiling=ceiling)


def four_block_augment(z0: Sequence[int], instance: IPInstance, graver: GraverBasis | None = None,
                       mode: str = "projection", bound: int | None = None,
                       inner_graver: GraverBasis | None = None,
                       graver_ceiling: int = DEFAULT_VECTOR_CEILING,
                       max_iterations: int = DEFAULT_ITERATION_CEILING) -> SolveOutcome:
    """Certify ``z0`` or improve it, one first-stage candidate at a time.

    For each candidate ``x̂`` the second-stage parts are re-optimised by an
    N-fold program with ``x + x̂`` held fixed; the best strictly improving
    point over all candidates is returned (ties: first candidate in
    ``(‖x̂‖₁, x̂)`` order).
    """
    _require_shape(instance, Shape.FOUR_BLOCK)
    z0 = tuple(z0)
    if not instance.is_feasible(z0):
        raise InfeasiblePointError(f"{z0} is not feasible")
    nB = instance.system.n_B
    f0 = instance.value(z0)
    cands = candidate_first_stage(instance, z0, graver, mode, bound, graver_ceiling)
    if inner_graver is None:
        inner_graver = inner_graver_basis(instance, graver_ceiling)
    best = None
    for xh in cands:
        x_new = tuple(a + b for a, b in zip(z0[:nB], xh))
        inner = inner_nfold_instance(instance, x_new)
        try:
            out = nfold_solve(inner, inner_graver, max_iterations=max_iterations)
        except Exception as exc:
            raise InnerSolveError(xh, exc) from exc
        if out.status is Status.INFEASIBLE:
            continue
        if out.status is Status.UNBOUNDED:
            return SolveOutcome(Status.UNBOUNDED, z0, None, out.trace)
        if out.value < f0 and (best is None or out.value < best[0]):
            best = (out.value, out.point)
    if best is None:
        return SolveOutcome(Status.OPTIMAL_CERTIFIED, z0, f0)
    value, z1 = best
    v = tuple(a - b for a, b in zip(z1, z0))
    return SolveOutcome(Status.STEP_FOUND, z1, value, [AugmentationStep(v, 1, value - f0)])


def _structured_loop(z, instance, graver, mode, bound, inner_graver, graver_ceiling, max_iterations):
    trace = []
    for _ in range(max_iterations):
        out = four_block_augment(z, instance, graver, mode, bound, inner_graver,
                                 graver_ceiling, max_iterations)
        if out.status is Status.OPTIMAL_CERTIFIED:
            return Status.OPTIMAL, z, trace
        if out.status is Status.UNBOUNDED:
            return Status.UNBOUNDED, z, trace + out.trace
        trace.extend(out.trace)
        z = out.point
    raise IterationLimitError(f"no optimum after {max_iterations} structured steps")


def four_block_solve(instance: IPInstance, graver: GraverBasis | None = None,
                     mode: str = "projection", bound: int | None = None,
                     graver_ceiling: int = DEFAULT_VECTOR_CEILING,
                     max_iterations: int = DEFAULT_ITERATION_CEILING) -> SolveOutcome:
    """Full solve driven by :func:`four_block_augment`.

    In ``bound`` mode phase I also runs through the structured step (on the
    bound-free relaxation with the violation objective), so the Graver basis
    of the assembled matrix is never formed.
    """
    _require_shape(instance, Shape.FOUR_BLOCK)
    z = solve_diophantine(instance.matrix, instance.b)
    if z is NoSolution:
        return SolveOutcome(Status.INFEASIBLE)
    if mode == "projection" and graver is None:
        graver = graver_basis(instance.matrix, ceiling=graver_ceiling)
    inner_graver = inner_graver_basis(instance, graver_ceiling)
    if not instance.in_bounds(z):
        n = instance.n
        relaxed = IPInstance.from_system(instance.system, instance.b, (NEG_INF,) * n, (INF,) * n,
                                         violation_objective(instance.lower, instance.upper))
        _, z, _ = _structured_loop(z, relaxed, graver, mode, bound, inner_graver,
                                   graver_ceiling, max_iterations)
        if bound_violation(z, instance.lower, instance.upper) > 0:
            return SolveOutcome(Status.INFEASIBLE)
    status, z, trace = _structured_loop(z, instance, graver, mode, bound, inner_graver,
                                        graver_ceiling, max_iterations)
    value = instance.value(z) if status is Status.OPTIMAL else None
    return SolveOutcome(status, z, value, trace)
