"""Integer program instances and separable convex objectives."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .matrix import BlockSystem, DimensionError, IntMatrix, Shape, Vector

INF = math.inf
NEG_INF = -math.inf


def is_finite(x) -> bool:
    return x not in (INF, NEG_INF)


@dataclass(frozen=True)
class ConvexPiecewise:
    """Convex piecewise-linear univariate function with integer breakpoints.

    ``slopes[0]`` applies left of ``breakpoints[0]``, ``slopes[k]`` between
    ``breakpoints[k-1]`` and ``breakpoints[k]``, ``slopes[-1]`` right of the
    last breakpoint. The function is anchored at ``phi(0) = 0``.
    """

    breakpoints: tuple[int, ...]
    slopes: tuple[int, ...]

    def __post_init__(self):
        if len(self.slopes) != len(self.breakpoints) + 1:
            raise ValueError("need exactly one more slope than breakpoints")
        if any(b > c for b, c in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError("breakpoints must be nondecreasing")
        if any(s > t for s, t in zip(self.slopes, self.slopes[1:])):
            raise ValueError("slopes must be nondecreasing (convexity)")

    def __call__(self, t: int) -> int:
        val = self.slopes[0] * t
        for k, b in enumerate(self.breakpoints):
            jump = self.slopes[k + 1] - self.slopes[k]
            if jump:
                val += jump * (max(0, t - b) - max(0, -b))
        return val

    def terminal_slope(self, direction: int) -> int:
        """Derivative of ``phi(t0 + alpha * direction)`` for large alpha."""
        if direction > 0:
            return self.slopes[-1] * direction
        if direction < 0:
            return self.slopes[0] * direction
        return 0


@dataclass(frozen=True)
class SeparableObjective:
    """``f(z) = Σ linear_i z_i + Σ convex_i(z_i)``, evaluated exactly."""

    linear: tuple[int, ...]
    convex: tuple[ConvexPiecewise | None, ...] = ()

    def __post_init__(self):
        if self.convex and len(self.convex) != len(self.linear):
            raise DimensionError("convex terms must cover every coordinate (use None for none)")

    @classmethod
    def linear_only(cls, c: Sequence[int]) -> SeparableObjective:
        return cls(tuple(int(x) for x in c))

    @classmethod
    def with_terms(cls, linear: Sequence[int], terms: Mapping[int, ConvexPiecewise]) -> SeparableObjective:
        n = len(linear)
        convex = tuple(terms.get(i) for i in range(n)) if terms else ()
        return cls(tuple(linear), convex)

    @property
    def n(self) -> int:
        return len(self.linear)

    @property
    def is_linear(self) -> bool:
        return not any(self.convex)

    def term(self, i: int, t: int) -> int:
        val = self.linear[i] * t
        if self.convex and self.convex[i] is not None:
            val += self.convex[i](t)
        return val

    def terminal_slope(self, i: int, direction: int) -> int:
        s = self.linear[i] * direction
        if self.convex and self.convex[i] is not None:
            s += self.convex[i].terminal_slope(direction)
        return s

    def breakpoints(self, i: int) -> tuple[int, ...]:
        if self.convex and self.convex[i] is not None:
            return self.convex[i].breakpoints
        return ()

    def __call__(self, z: Sequence[int]) -> int:
        if len(z) != self.n:
            raise DimensionError(f"point of length {len(z)} for objective on {self.n} variables")
        return sum(self.term(i, t) for i, t in enumerate(z))

    def compare(self, z: Sequence[int], w: Sequence[int]) -> int:
        """Comparison oracle: -1, 0 or 1 as f(z) <, =, > f(w)."""
        a, b = self(z), self(w)
        return (a > b) - (a < b)

    def reindexed(self, n_new: int, mapping: Sequence[int]) -> SeparableObjective:
        """Move coordinate ``i`` to ``mapping[i]``; new coordinates cost nothing."""
        linear = [0] * n_new
        convex: list[ConvexPiecewise | None] = [None] * n_new
        for i, j in enumerate(mapping):
            linear[j] = self.linear[i]
            if self.convex:
                convex[j] = self.convex[i]
        return SeparableObjective(tuple(linear), tuple(convex) if self.convex else ())


class Status(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    STEP_FOUND = "StepFound"
    OPTIMAL_CERTIFIED = "OptimalCertified"


@dataclass(frozen=True)
class AugmentationStep:
    direction: Vector
    step: int
    delta: int


@dataclass
class SolveOutcome:
    status: Status
    point: Vector | None = None
    value: int | None = None
    trace: list[AugmentationStep] = field(default_factory=list)


@dataclass(frozen=True)
class IPInstance:
    """min f(z) s.t. matrix z = b, lower <= z <= upper, z integer.

    Infinite bounds are the float sentinels ``INF``/``NEG_INF``; finite
    bounds are ints. ``objective_scale`` records a positive factor the
    objective was multiplied by (e.g. to clear probability denominators).
    """

    matrix: IntMatrix
    b: Vector
    lower: tuple
    upper: tuple
    objective: SeparableObjective
    system: BlockSystem | None = None
    objective_scale: int = 1
    meta: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("b", "lower", "upper"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        n = self.matrix.cols
        if len(self.b) != self.matrix.rows:
            raise DimensionError(f"rhs has length {len(self.b)}, matrix has {self.matrix.rows} rows")
        if len(self.lower) != n or len(self.upper) != n:
            raise DimensionError(f"bounds must have length {n}")
        if self.objective.n != n:
            raise DimensionError(f"objective has {self.objective.n} coordinates, matrix has {n} columns")
        for lo, up in zip(self.lower, self.upper):
            if lo == INF or up == NEG_INF:
                raise ValueError("lower bound +inf or upper bound -inf")
            if lo > up:
                raise ValueError(f"empty bound interval [{lo}, {up}]")
        if self.system is not None and self.system.matrix != self.matrix:
            raise ValueError("block system does not match the instance matrix")

    @classmethod
    def from_system(cls, system: BlockSystem, b, lower, upper, objective, **kw) -> IPInstance:
        return cls(system.matrix, tuple(b), tuple(lower), tuple(upper), objective, system=system, **kw)

    @property
    def n(self) -> int:
        return self.matrix.cols

    @property
    def shape(self) -> Shape | None:
        return self.system.shape if self.system is not None else None

    def has_finite_bounds(self) -> bool:
        return all(is_finite(x) for x in self.lower + self.upper)

    def in_bounds(self, z: Sequence[int]) -> bool:
        return all(lo <= t <= up for t, lo, up in zip(z, self.lower, self.upper))

    def is_feasible(self, z: Sequence[int]) -> bool:
        return len(z) == self.n and self.in_bounds(z) and self.matrix.matvec(z) == self.b

    def value(self, z: Sequence[int]) -> int:
        return self.objective(z)
