"""Seeded random matrices and instances for tests and bound validation.

Every function takes a ``random.Random``; nothing touches global state, so
one seed reproduces a whole run.
"""

from __future__ import annotations

import math
import random

from .matrix import IntMatrix, assemble_four_block, assemble_transposed_form
from .problem import ConvexPiecewise, IPInstance, SeparableObjective


def random_matrix(rng: random.Random, rows: int, cols: int, lo: int = -3, hi: int = 3) -> IntMatrix:
    return IntMatrix.from_rows([[rng.randint(lo, hi) for _ in range(cols)] for _ in range(rows)], cols)


def random_box(rng: random.Random, n: int, radius: int = 5, max_points: int = 10**6):
    """Random integer bounds inside ``[-radius, radius]`` with a capped box size."""
    while True:
        lower, upper = [], []
        for _ in range(n):
            a, b = sorted((rng.randint(-radius, radius), rng.randint(-radius, radius)))
            lower.append(a)
            upper.append(b)
        if math.prod(u - l + 1 for l, u in zip(lower, upper)) <= max_points:
            return tuple(lower), tuple(upper)


def random_convex(rng: random.Random, max_breakpoints: int = 3, radius: int = 5,
                  slope: int = 4) -> ConvexPiecewise:
    k = rng.randint(0, max_breakpoints)
    bps = sorted(rng.randint(-radius, radius) for _ in range(k))
    slopes = sorted(rng.randint(-slope, slope) for _ in range(k + 1))
    return ConvexPiecewise(tuple(bps), tuple(slopes))


def _shape(rng: random.Random, max_cols: int) -> tuple[int, int, int]:
    """Rows, cols and entry radius, keeping the kernel small enough that the
    Graver completion stays at desk scale."""
    n = rng.randint(2, max_cols)
    r = rng.randint(max(1, n - 5), max(1, min(n - 1, 4)))
    radius = 3 if n - r <= 3 else 2 if n - r == 4 else 1
    return r, n, radius


def random_instance(rng: random.Random, max_cols: int = 8, bound_radius: int = 5,
                    feasible: bool = True, convex: bool = False,
                    max_points: int = 10**6) -> IPInstance:
    """Random instance with finite bounds.

    ``feasible=True`` takes the rhs from a random point of the box; otherwise
    the rhs is drawn at random and may or may not be reachable.
    """
    r, n, radius = _shape(rng, max_cols)
    M = random_matrix(rng, r, n, -radius, radius)
    lower, upper = random_box(rng, n, bound_radius, max_points)
    if feasible:
        z = [rng.randint(l, u) for l, u in zip(lower, upper)]
        b = M.matvec(z)
    else:
        b = tuple(rng.randint(-6, 6) for _ in range(r))
    linear = [rng.randint(-5, 5) for _ in range(n)]
    if convex:
        terms = {j: random_convex(rng) for j in range(n) if rng.random() < 0.7}
        objective = SeparableObjective.with_terms(linear, terms)
    else:
        objective = SeparableObjective.linear_only(linear)
    return IPInstance(M, b, lower, upper, objective)


def random_blocks(rng: random.Random, d_A: int = 1, n_A: int = 2, n_B: int = 1, d_C: int = 1,
                  radius: int = 2) -> tuple[IntMatrix, IntMatrix, IntMatrix, IntMatrix]:
    A = random_matrix(rng, d_A, n_A, -radius, radius)
    B = random_matrix(rng, d_A, n_B, -radius, radius)
    C = random_matrix(rng, d_C, n_B, -radius, radius)
    D = random_matrix(rng, d_C, n_A, -radius, radius)
    return A, B, C, D


def random_four_block_instance(rng: random.Random, N: int | None = None, bound_radius: int = 2,
                               feasible: bool = True) -> IPInstance:
    """Random four-block instance with n_B = 1, n_A = 2, one row in each block row."""
    N = N or rng.randint(1, 3)
    system = assemble_four_block(*random_blocks(rng), N)
    n = system.matrix.cols
    lower, upper = random_box(rng, n, bound_radius, 10**6)
    if feasible:
        b = system.matrix.matvec([rng.randint(l, u) for l, u in zip(lower, upper)])
    else:
        b = tuple(rng.randint(-4, 4) for _ in range(system.matrix.rows))
    linear = [rng.randint(-4, 4) for _ in range(n)]
    return IPInstance.from_system(system, b, lower, upper, SeparableObjective.linear_only(linear))


def random_transposed_instance(rng: random.Random, N: int | None = None,
                               bound_radius: int = 2) -> IPInstance:
    """Random feasible transposed-form instance with at most 8 variables."""
    N = N or rng.randint(1, 2)
    n_A = rng.randint(1, 2)
    n_B = rng.randint(1, 2)
    A = random_matrix(rng, 1, n_A, -2, 2)
    B = random_matrix(rng, 1, n_B, -2, 2)
    C = random_matrix(rng, 1, n_B, -2, 2)
    D = random_matrix(rng, 1, n_A, -2, 2)
    system = assemble_transposed_form(A, B, C, D, N)
    n = system.matrix.cols
    lower, upper = random_box(rng, n, bound_radius, 10**5)
    b = system.matrix.matvec([rng.randint(l, u) for l, u in zip(lower, upper)])
    linear = [rng.randint(-4, 4) for _ in range(n)]
    return IPInstance.from_system(system, b, lower, upper, SeparableObjective.linear_only(linear))
