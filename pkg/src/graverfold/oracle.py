"""Brute-force reference computations.

Nothing here calls the Hermite normal form, the Graver completion or the
augmentation solver; the only shared piece is the ``IntMatrix`` carrier
(and the instance/objective data types, which just describe the problem).
Enumeration is vectorised with numpy int64 after checking that every
intermediate value stays far inside the int64 range.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .matrix import IntMatrix, Vector
from .problem import IPInstance, SolveOutcome, Status, is_finite

DEFAULT_POINT_CEILING = 10**7
_CHUNK = 1 << 18
_SAFE = 1 << 60


class OracleLimitError(RuntimeError):
    pass


@dataclass(frozen=True)
class BoxSpec:
    lower: tuple[int, ...]
    upper: tuple[int, ...]
    ceiling: int = DEFAULT_POINT_CEILING

    def __post_init__(self):
        if len(self.lower) != len(self.upper):
            raise ValueError("box bounds differ in length")
        for lo, up in zip(self.lower, self.upper):
            if not (is_finite(lo) and is_finite(up)):
                raise ValueError("oracle boxes must be finite")
            if lo > up:
                raise ValueError(f"empty interval [{lo}, {up}]")

    @classmethod
    def cube(cls, n: int, radius: int, ceiling: int = DEFAULT_POINT_CEILING) -> BoxSpec:
        return cls((-radius,) * n, (radius,) * n, ceiling)

    def size(self, coords: Sequence[int] | None = None) -> int:
        coords = range(len(self.lower)) if coords is None else coords
        return math.prod(self.upper[j] - self.lower[j] + 1 for j in coords)


def _grid(lower: Sequence[int], upper: Sequence[int]):
    """Yield all integer points of the box in lexicographic order, in chunks."""
    k = len(lower)
    if k == 0:
        yield np.zeros((1, 0), dtype=np.int64)
        return
    radix = [u - l + 1 for l, u in zip(lower, upper)]
    total = math.prod(radix)
    lo = np.array(lower, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        pts = np.empty((len(idx), k), dtype=np.int64)
        for j in range(k - 1, -1, -1):
            idx, pts[:, j] = np.divmod(idx, radix[j])
        yield pts + lo


# ---------------------------------------------------------------------------
# exact rational elimination, kept deliberately plain


def _echelon(rows: list[list[Fraction]]):
    """Row-reduce; returns (pivot rows used, pivot columns)."""
    rows = [r[:] for r in rows]
    order = list(range(len(rows)))
    pivot_cols = []
    r = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        p = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        order[r], order[p] = order[p], order[r]
        for i in range(r + 1, len(rows)):
            if rows[i][c]:
                t = rows[i][c] / rows[r][c]
                rows[i] = [a - t * b for a, b in zip(rows[i], rows[r])]
        pivot_cols.append(c)
        r += 1
    return order[:r], pivot_cols


def _independent_rows(M: IntMatrix) -> list[int]:
    rows = []
    for i in range(M.rows):
        trial = rows + [i]
        _, piv = _echelon([[Fraction(M[k, j]) for j in range(M.cols)] for k in trial])
        if len(piv) == len(trial):
            rows = trial
    return rows


def _solve_square(S: list[list[Fraction]], rhs: list[list[Fraction]]) -> list[list[Fraction]]:
    """Gauss-Jordan on ``S X = rhs`` for nonsingular S."""
    n = len(S)
    aug = [S[i][:] + rhs[i][:] for i in range(n)]
    for c in range(n):
        p = next(i for i in range(c, n) if aug[i][c] != 0)
        aug[c], aug[p] = aug[p], aug[c]
        piv = aug[c][c]
        aug[c] = [a / piv for a in aug[c]]
        for i in range(n):
            if i != c and aug[i][c]:
                t = aug[i][c]
                aug[i] = [a - t * b for a, b in zip(aug[i], aug[c])]
    return [row[n:] for row in aug]


def _det(S: list[list[int]]) -> int:
    rows = [[Fraction(x) for x in r] for r in S]
    n = len(rows)
    det = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if rows[i][c] != 0), None)
        if p is None:
            return 0
        if p != c:
            rows[c], rows[p] = rows[p], rows[c]
            det = -det
        det *= rows[c][c]
        for i in range(c + 1, n):
            t = rows[i][c] / rows[c][c]
            rows[i] = [a - t * b for a, b in zip(rows[i], rows[c])]
    return int(det)


def matrix_rank(M: IntMatrix) -> int:
    return len(_independent_rows(M))


def max_abs_minor(M: IntMatrix, max_size: int | None = None) -> int:
    """Largest absolute value of any square minor (sizes 1..max_size)."""
    k_max = min(M.rows, M.cols) if max_size is None else max_size
    best = 0
    for k in range(1, k_max + 1):
        for rs in itertools.combinations(range(M.rows), k):
            for cs in itertools.combinations(range(M.cols), k):
                best = max(best, abs(_det([[M[i, j] for j in cs] for i in rs])))
    return best


def graver_box_radius(M: IntMatrix) -> int:
    """Radius of a cube certainly containing every Graver element of M.

    Each Graver element is a conformal combination ``Σ λ_i c_i`` of at most
    ``n - r`` circuits with ``0 <= λ_i < 1`` unless it is a circuit itself,
    and circuit entries are minors of M, so ``(n - r) * max minor`` works.
    """
    r = matrix_rank(M)
    if r == M.cols:
        return 0
    delta = max_abs_minor(M, r) if r else 1
    return max(1, (M.cols - r) * delta)


def provable_graver_box(M: IntMatrix, ceiling: int = DEFAULT_POINT_CEILING) -> BoxSpec:
    return BoxSpec.cube(M.cols, graver_box_radius(M), ceiling)


def kernel_points(M: IntMatrix, box: BoxSpec) -> np.ndarray:
    """All integer kernel vectors of M inside the box (including zero).

    Coordinates outside a nonsingular column set are enumerated over the box;
    the remaining ones follow by exact back-substitution and are kept when
    integral and inside the box. The enumerated count is checked against the
    box ceiling before anything is generated.
    """
    n = M.cols
    rows = _independent_rows(M)
    r = len(rows)
    if r:
        _, pivots = _echelon([[Fraction(M[i, j]) for j in range(n)] for i in rows])
    else:
        pivots = []
    free = [j for j in range(n) if j not in pivots]
    count = box.size(free)
    if count > box.ceiling:
        raise OracleLimitError(f"enumeration of {count} points exceeds ceiling {box.ceiling}")
    out = []
    if r:
        S = [[Fraction(M[i, j]) for j in pivots] for i in rows]
        F = [[Fraction(-M[i, j]) for j in free] for i in rows]
        K = _solve_square(S, F)
        den = math.lcm(*(x.denominator for row in K for x in row)) if free else 1
        Knum = np.array([[int(x * den) for x in row] for row in K], dtype=np.int64).reshape(r, len(free))
        bound = int(np.abs(Knum).sum()) * max(max(map(abs, box.lower)), max(map(abs, box.upper)), 1)
        if bound >= _SAFE:
            raise OracleLimitError("values too large for exact int64 enumeration")
    Mfull = np.array(M.to_rows(), dtype=np.int64).reshape(M.rows, n)
    lo = np.array(box.lower, dtype=np.int64)
    up = np.array(box.upper, dtype=np.int64)
    for pts in _grid([box.lower[j] for j in free], [box.upper[j] for j in free]):
        full = np.zeros((len(pts), n), dtype=np.int64)
        full[:, free] = pts
        if r:
            num = pts @ Knum.T
            ok = np.all(num % den == 0, axis=1)
            full = full[ok]
            full[:, pivots] = num[ok] // den
        keep = np.all((full >= lo) & (full <= up), axis=1)
        full = full[keep]
        keep = np.all(full @ Mfull.T == 0, axis=1)
        out.append(full[keep])
    return np.concatenate(out) if out else np.zeros((0, n), dtype=np.int64)


def graver_oracle(M: IntMatrix, box: BoxSpec) -> set[Vector]:
    """``⊑``-minimal nonzero kernel vectors of M within the box.

    Candidates are scanned by increasing 1-norm: a vector is kept when no
    previously kept vector lies below it. This equals "no split into two
    nonzero sign-compatible kernel vectors": any kernel vector strictly below
    ``v`` has a kept vector below it, and ``u ⊑ v`` gives the split
    ``u + (v - u)``.
    """
    pts = kernel_points(M, box)
    pts = pts[np.any(pts != 0, axis=1)]
    if len(pts) == 0:
        return set()
    norms = np.abs(pts).sum(axis=1)
    order = np.lexsort(pts.T[::-1])
    order = order[np.argsort(norms[order], kind="stable")]
    pts, norms = pts[order], norms[order]
    kept = np.zeros((0, M.cols), dtype=np.int64)
    for level in np.unique(norms):
        cand = pts[norms == level]
        if len(kept):
            below = np.ones(len(cand), dtype=bool)
            for start in range(0, len(cand), 2048):
                c = cand[start:start + 2048, None, :]
                conf = np.all((kept[None] * c >= 0) & (np.abs(kept[None]) <= np.abs(c)), axis=2)
                below[start:start + 2048] = ~conf.any(axis=1)
            cand = cand[below]
        kept = np.concatenate([kept, cand])
    return {tuple(int(x) for x in v) for v in kept}


def graver_oracle_exact(M: IntMatrix, ceiling: int = DEFAULT_POINT_CEILING) -> set[Vector]:
    """The Graver basis of M by brute force over a provably sufficient box."""
    if matrix_rank(M) == M.cols:
        return set()
    return graver_oracle(M, provable_graver_box(M, ceiling))


def ip_oracle(instance: IPInstance, ceiling: int = DEFAULT_POINT_CEILING) -> SolveOutcome:
    """Optimum of ``instance`` by exhaustive enumeration of its bound box.

    Reports the lexicographically smallest optimal point.
    """
    if not instance.has_finite_bounds():
        raise ValueError("ip_oracle needs finite bounds on every variable")
    box = BoxSpec(tuple(instance.lower), tuple(instance.upper), ceiling)
    if box.size() > ceiling:
        raise OracleLimitError(f"box of {box.size()} points exceeds ceiling {ceiling}")
    n = instance.n
    f = instance.objective
    tables = [[f.term(j, t) for t in range(box.lower[j], box.upper[j] + 1)] for j in range(n)]
    big = sum(max(abs(x) for x in tab) for tab in tables) if n else 0
    scale = instance.matrix.max_abs() * sum(max(abs(box.lower[j]), abs(box.upper[j])) for j in range(n))
    if big >= _SAFE or scale >= _SAFE or any(abs(x) >= _SAFE for x in instance.b):
        raise OracleLimitError("values too large for exact int64 enumeration")
    tabs = [np.array(t, dtype=np.int64) for t in tables]
    Mrows = np.array(instance.matrix.to_rows(), dtype=np.int64).reshape(instance.matrix.rows, n)
    b = np.array(instance.b, dtype=np.int64)
    lo = np.array(box.lower, dtype=np.int64)
    best_val, best_pt = None, None
    for pts in _grid(box.lower, box.upper):
        ok = np.all(pts @ Mrows.T == b, axis=1)
        if not ok.any():
            continue
        pts = pts[ok]
        vals = np.zeros(len(pts), dtype=np.int64)
        off = pts - lo
        for j in range(n):
            vals += tabs[j][off[:, j]]
        k = int(np.argmin(vals))
        if best_val is None or vals[k] < best_val:
            best_val, best_pt = int(vals[k]), tuple(int(x) for x in pts[k])
    if best_pt is None:
        return SolveOutcome(Status.INFEASIBLE)
    return SolveOutcome(Status.OPTIMAL, best_pt, best_val)


def feasible_points(instance: IPInstance, ceiling: int = DEFAULT_POINT_CEILING) -> list[Vector]:
    """Every feasible point of a finite-box instance, lexicographically."""
    box = BoxSpec(tuple(instance.lower), tuple(instance.upper), ceiling)
    if box.size() > ceiling:
        raise OracleLimitError(f"box of {box.size()} points exceeds ceiling {ceiling}")
    n = instance.n
    Mrows = np.array(instance.matrix.to_rows(), dtype=np.int64).reshape(instance.matrix.rows, n)
    b = np.array(instance.b, dtype=np.int64)
    out = []
    for pts in _grid(box.lower, box.upper):
        ok = np.all(pts @ Mrows.T == b, axis=1)
        out.extend(tuple(int(x) for x in p) for p in pts[ok])
    return out
