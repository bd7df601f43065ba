"""Graver bases by completion, plus conformal decomposition services.

The completion starts from a lattice basis of ker(M) closed under negation
and repeatedly reduces sums ``f + g`` of basis candidates by ``⊑``-smaller
elements. Irreducible sums join the set; once every pair sum reduces to zero
the ``⊑``-minimal elements are exactly the Graver basis.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .matrix import DimensionError, IntMatrix, Vector, kernel_basis

log = logging.getLogger(__name__)

DEFAULT_VECTOR_CEILING = 10**6


class GraverLimitError(RuntimeError):
    """The completion grew past the configured vector ceiling."""


class NotInKernelError(ValueError):
    pass


class DecompositionError(RuntimeError):
    """A kernel vector had no conformal decomposition over the basis.

    This can only happen if the basis is incomplete, so it is never swallowed.
    """


def conformal(u: Sequence[int], v: Sequence[int]) -> bool:
    """``u ⊑ v``: same orthant and ``|u_i| <= |v_i|`` everywhere."""
    for a, b in zip(u, v):
        if a:
            if a > 0:
                if b < a:
                    return False
            elif b > a:
                return False
    return True


def sign_compatible(u: Sequence[int], v: Sequence[int]) -> bool:
    return all(a * b >= 0 for a, b in zip(u, v))


def canonical_sign(v: Sequence[int]) -> Vector:
    """Representative of ±v whose first nonzero entry is positive."""
    for x in v:
        if x:
            return tuple(v) if x > 0 else tuple(-y for y in v)
    return tuple(v)


def norm1(v: Iterable[int]) -> int:
    return sum(abs(x) for x in v)


def norm_inf(v: Iterable[int]) -> int:
    return max((abs(x) for x in v), default=0)


def _masks(v: Sequence[int]) -> tuple[int, int]:
    pos = neg = 0
    for i, x in enumerate(v):
        if x > 0:
            pos |= 1 << i
        elif x < 0:
            neg |= 1 << i
    return pos, neg


@dataclass(frozen=True)
class GraverBasis:
    matrix: IntMatrix
    vectors: tuple[Vector, ...]

    def __len__(self):
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)

    def __contains__(self, v):
        return tuple(v) in set(self.vectors)

    @property
    def dimension(self) -> int:
        return self.matrix.cols

    def representatives(self) -> list[Vector]:
        """One vector per ± pair, first nonzero entry positive."""
        return sorted({canonical_sign(v) for v in self.vectors})

    def max_norm1(self) -> int:
        return max((norm1(v) for v in self.vectors), default=0)

    def max_abs_component(self) -> int:
        return max((norm_inf(v) for v in self.vectors), default=0)


class _Reducer:
    """Element store supporting ``⊑``-reduction queries.

    Elements are bucketed by their (positive, negative) support masks; a
    reducer for ``s`` must have both masks contained in those of ``s``.
    """

    def __init__(self, n: int):
        self.n = n
        self.buckets: dict[tuple[int, int], list[Vector]] = {}
        self.count = 0

    def add(self, v: Vector) -> None:
        self.buckets.setdefault(_masks(v), []).append(v)
        self.count += 1

    def __iter__(self):
        for vs in self.buckets.values():
            yield from vs

    def find(self, s: Sequence[int], pos: int, neg: int) -> Vector | None:
        for (p, q), vs in self.buckets.items():
            if p & ~pos or q & ~neg:
                continue
            for g in vs:
                if conformal(g, s):
                    return g
        return None

    def normal_form(self, s: Vector) -> Vector:
        s = list(s)
        while True:
            pos, neg = _masks(s)
            if not pos and not neg:
                return tuple(s)
            g = self.find(s, pos, neg)
            if g is None:
                return tuple(s)
            # subtract g as often as it stays below s
            k = min(s[i] // g[i] for i in range(self.n) if g[i])
            s = [a - k * b for a, b in zip(s, g)]


def graver_basis(M: IntMatrix, ceiling: int = DEFAULT_VECTOR_CEILING) -> GraverBasis:
    """Compute the Graver basis of ``M``.

    Raises :class:`GraverLimitError` if the intermediate set grows past
    ``ceiling`` vectors.
    """
    if M.cols == 0:
        raise DimensionError("matrix has no columns")
    n = M.cols
    store = _Reducer(n)
    seen: set[Vector] = set()
    heap: list[tuple[int, Vector]] = []

    def push(s: Vector) -> None:
        c = canonical_sign(s)
        if any(c) and c not in seen:
            seen.add(c)
            heapq.heappush(heap, (norm1(c), c))

    for v in kernel_basis(M):
        push(v)

    while heap:
        _, s = heapq.heappop(heap)
        r = store.normal_form(s)
        if not any(r):
            continue
        r = canonical_sign(r)
        neg_r = tuple(-x for x in r)
        rpos, rneg = _masks(r)
        # pair sums with opposite-sign overlap; conformal pairs reduce to zero trivially
        for g in list(store):
            gpos, gneg = _masks(g)
            if (rpos & gneg) or (rneg & gpos):
                push(tuple(a + b for a, b in zip(r, g)))
        store.add(r)
        store.add(neg_r)
        if store.count > ceiling:
            raise GraverLimitError(
                f"Graver completion exceeded {ceiling} vectors for a {M.rows}x{M.cols} matrix"
            )
    vectors = _minimal_elements(list(store))
    log.debug("graver basis of %dx%d matrix: %d vectors", M.rows, M.cols, len(vectors))
    return GraverBasis(M, tuple(sorted(vectors)))


def _minimal_elements(vectors: list[Vector]) -> list[Vector]:
    vectors = sorted(set(vectors), key=lambda v: (norm1(v), v))
    kept = _Reducer(len(vectors[0]) if vectors else 0)
    out = []
    for v in vectors:
        pos, neg = _masks(v)
        if kept.find(v, pos, neg) is None:
            kept.add(v)
            out.append(v)
    return out


def conformal_decompose(z: Sequence[int], G: GraverBasis) -> list[tuple[int, Vector]]:
    """Write kernel vector ``z`` as a sign-compatible sum ``Σ λ_i g_i``.

    Greedy: repeatedly take the basis element below ``z`` admitting the
    largest multiplier (ties broken by canonical order).
    """
    z = tuple(z)
    if len(z) != G.matrix.cols:
        raise DimensionError(f"vector of length {len(z)} for {G.matrix.cols} columns")
    if any(G.matrix.matvec(z)):
        raise NotInKernelError(f"{z} is not in the kernel")
    terms: dict[Vector, int] = {}
    rest = list(z)
    while any(rest):
        best = None
        for g in G.vectors:
            if conformal(g, rest):
                k = min(rest[i] // g[i] for i in range(len(g)) if g[i])
                if best is None or k > best[0]:
                    best = (k, g)
        if best is None:
            raise DecompositionError(f"no basis element below {tuple(rest)}; basis is incomplete")
        k, g = best
        terms[g] = terms.get(g, 0) + k
        rest = [a - k * b for a, b in zip(rest, g)]
    return sorted(((k, g) for g, k in terms.items()), key=lambda t: t[1])


def is_conformally_minimal(z: Sequence[int], M: IntMatrix) -> bool:
    """True iff ``z`` admits no split into two nonzero conformal kernel vectors.

    Direct search over the box ``0 ⊑ v ⊑ z``; meant for small vectors.
    """
    z = tuple(z)
    if len(z) != M.cols:
        raise DimensionError(f"vector of length {len(z)} for {M.cols} columns")
    if not any(z) or any(M.matvec(z)):
        raise ValueError("is_conformally_minimal needs a nonzero kernel vector")
    ranges = [range(0, x + 1) if x >= 0 else range(x, 1) for x in z]

    def search(k: int, partial: list[int], acc: list[int]) -> bool:
        if k == len(z):
            return any(partial) and tuple(partial) != z and not any(acc)
        col = M.column(k)
        for t in ranges[k]:
            partial.append(t)
            nxt = [a + t * c for a, c in zip(acc, col)] if t else acc
            if search(k + 1, partial, nxt):
                return True
            partial.pop()
        return False

    return not search(0, [], [0] * M.rows)


# ---------------------------------------------------------------------------
# File format: "graver n k" then k canonically ordered vectors


def format_graver(G: GraverBasis) -> str:
    lines = [f"graver {G.matrix.cols} {len(G.vectors)}"]
    lines += [" ".join(str(x) for x in v) for v in G.vectors]
    return "\n".join(lines) + "\n"


def parse_graver(text: str, source: str = "<string>") -> tuple[int, list[Vector]]:
    lines = [(i, ln.strip()) for i, ln in enumerate(text.splitlines(), 1)
             if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValueError(f"{source}: empty graver file")
    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 3 or parts[0] != "graver":
        raise ValueError(f"{source}:{lineno}: expected 'graver n k' header")
    n, k = int(parts[1]), int(parts[2])
    vecs = []
    for lineno, ln in lines[1:]:
        v = tuple(int(t) for t in ln.split())
        if len(v) != n:
            raise ValueError(f"{source}:{lineno}: expected {n} entries")
        vecs.append(v)
    if len(vecs) != k:
        raise ValueError(f"{source}: header announces {k} vectors, found {len(vecs)}")
    return n, vecs


def read_graver(path: str | Path) -> tuple[int, list[Vector]]:
    path = Path(path)
    return parse_graver(path.read_text(), str(path))
