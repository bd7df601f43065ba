"""Degree bounds on Graver bases and their empirical checks.

All formula values are Python ints; the towers ``x ** (2 ** d_C)`` grow
far beyond machine width even for tiny inputs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Iterable, Mapping

from .graver import DEFAULT_VECTOR_CEILING, GraverBasis, graver_basis, norm_inf
from .generators import random_matrix
from .matrix import DimensionError, IntMatrix, assemble_four_block, vstack


@dataclass
class BoundReport:
    bound_name: str
    inputs: Mapping[str, object]
    formula_value: int
    observed_max_norm: int | None = None
    satisfied: bool | None = None
    provenance: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.observed_max_norm is not None and self.satisfied is None:
            self.satisfied = self.observed_max_norm <= self.formula_value


def _positive(**kw) -> None:
    for name, value in kw.items():
        if not isinstance(value, int) or value < 1:
            raise ValueError(f"{name} must be a positive integer, got {value!r}")


def ppi_bound(M: int) -> int:
    """1-norm bound ``2M - 1`` for Graver elements of a one-row matrix."""
    _positive(M=M)
    return 2 * M - 1


def special_bound(n: int, M: int, base_norm: int) -> int:
    """Bound after appending one row with entries at most M: ``2 n M base²``."""
    _positive(n=n, M=M, base_norm=base_norm)
    return 2 * n * M * base_norm ** 2


def recursive_bound(n: int, M: int, m: int, base_norm: int) -> int:
    """Bound after appending m rows: ``(2nM)^(2^m - 1) * base^(2^m)``."""
    _positive(n=n, M=M, base_norm=base_norm)
    if not isinstance(m, int) or m < 0:
        raise ValueError(f"m must be a nonnegative integer, got {m!r}")
    return (2 * n * M) ** (2 ** m - 1) * base_norm ** (2 ** m)


def four_block_bound(n_A: int, n_B: int, d_C: int, M: int, g: int, N: int) -> int:
    """1-norm bound for the Graver basis of the N-fold 4-block matrix.

    ``M`` bounds the entries of C and D, ``g`` bounds the components of the
    Graver elements of the two-stage matrix built from A and B. ``d_C = 0``
    is accepted and gives the two-stage bound ``(n_B + N n_A) g``.
    """
    _positive(n_A=n_A, n_B=n_B, M=M, g=g, N=N)
    if not isinstance(d_C, int) or d_C < 0:
        raise ValueError(f"d_C must be a nonnegative integer, got {d_C!r}")
    width = n_B + N * n_A
    return (2 * width * M) ** (2 ** d_C - 1) * (width * g) ** (2 ** d_C)


def image_matrix(B: IntMatrix, G: GraverBasis) -> IntMatrix:
    """``B · G(A)`` with one column ``B g`` per ± pair of the basis."""
    reps = G.representatives()
    return IntMatrix.from_columns([B.matvec(g) for g in reps], B.rows)


def stacked_bound(A: IntMatrix, B: IntMatrix, ceiling: int = DEFAULT_VECTOR_CEILING) -> BoundReport:
    """Compare ``max‖v‖₁`` over G([A; B]) with the product bound
    ``max‖λ‖₁ over G(B·G(A))  ×  max‖v‖₁ over G(A)``."""
    if A.cols != B.cols:
        raise DimensionError(f"A has {A.cols} columns, B has {B.cols}")
    GA = graver_basis(A, ceiling)
    base = GA.max_norm1()
    if len(GA):
        lam = graver_basis(image_matrix(B, GA), ceiling).max_norm1()
    else:
        lam = 0
    observed = graver_basis(vstack(A, B), ceiling).max_norm1()
    return BoundReport(
        "stacked",
        {"A": A.to_rows(), "B": B.to_rows(), "base_norm": base, "lambda_norm": lam},
        lam * base,
        observed,
    )


def two_stage_matrix(A: IntMatrix, B: IntMatrix, N: int) -> IntMatrix:
    """The two-stage matrix: N row blocks ``B A`` with A on the diagonal."""
    if A.rows != B.rows:
        raise DimensionError(f"A has {A.rows} rows, B has {B.rows}")
    empty_C = IntMatrix.zeros(0, B.cols)
    empty_D = IntMatrix.zeros(0, A.cols)
    return assemble_four_block(A, B, empty_C, empty_D, N).matrix


def two_stage_max_component(A: IntMatrix, B: IntMatrix, N_range: Iterable[int],
                            ceiling: int = DEFAULT_VECTOR_CEILING) -> dict[int, int]:
    """Max ``|v_i|`` over the Graver basis of the two-stage matrix, per N.

    An empty Graver basis reports 0.
    """
    out = {}
    for N in N_range:
        if N < 1:
            raise ValueError("N must be at least 1")
        G = graver_basis(two_stage_matrix(A, B, N), ceiling)
        out[N] = max((norm_inf(v) for v in G.vectors), default=0)
    return out


def four_block_report(A: IntMatrix, B: IntMatrix, C: IntMatrix, D: IntMatrix, N: int, g: int,
                      ceiling: int = DEFAULT_VECTOR_CEILING) -> BoundReport:
    """Check the four-block bound at one N against the computed Graver basis."""
    M = max(C.max_abs(), D.max_abs(), 1)
    value = four_block_bound(A.cols, B.cols, C.rows, M, max(g, 1), N)
    observed = graver_basis(assemble_four_block(A, B, C, D, N).matrix, ceiling).max_norm1()
    return BoundReport(
        "four_block",
        {"n_A": A.cols, "n_B": B.cols, "d_C": C.rows, "M": M, "g": g, "N": N},
        value,
        observed,
    )


def recursive_report(A: IntMatrix, B: IntMatrix, ceiling: int = DEFAULT_VECTOR_CEILING) -> BoundReport:
    """Check the recursive bound for ``[A; B]`` with the computed base norm."""
    base = graver_basis(A, ceiling).max_norm1()
    observed = graver_basis(vstack(A, B), ceiling).max_norm1()
    M = max(B.max_abs(), 1)
    value = recursive_bound(A.cols, M, B.rows, base) if base else 0
    return BoundReport(
        "recursive",
        {"n": A.cols, "M": M, "m": B.rows, "base_norm": base},
        value,
        observed,
    )


def recursive_cascade(A: IntMatrix, B: IntMatrix, ceiling: int = DEFAULT_VECTOR_CEILING) -> list[BoundReport]:
    """Add the rows of B one at a time; at each stage compare the observed
    norm with the one-row bound applied to the previous observed norm."""
    reports = []
    current = A
    prev = graver_basis(A, ceiling).max_norm1()
    for k in range(B.rows):
        row = B.submatrix([k], range(B.cols))
        current = vstack(current, row)
        observed = graver_basis(current, ceiling).max_norm1()
        M = max(row.max_abs(), 1)
        value = special_bound(A.cols, M, prev) if prev else 0
        reports.append(BoundReport("cascade", {"row": k, "n": A.cols, "M": M, "base_norm": prev},
                                   value, observed))
        prev = observed
    return reports


def special_report(A: IntMatrix, a, ceiling: int = DEFAULT_VECTOR_CEILING) -> BoundReport:
    """Check ``2 n M base²`` for ``[A; a]`` with a single appended row."""
    row = IntMatrix.from_rows([list(a)], A.cols)
    base = graver_basis(A, ceiling).max_norm1()
    observed = graver_basis(vstack(A, row), ceiling).max_norm1()
    M = max(row.max_abs(), 1)
    value = special_bound(A.cols, M, base) if base else 0
    return BoundReport("special", {"n": A.cols, "M": M, "base_norm": base}, value, observed)


def ppi_family(M: int, n: int):
    """One-row matrices with entries in ``[-M, M]`` up to column signs and order.

    Flipping the sign of a column or permuting columns maps the Graver basis
    onto itself coordinatewise, so nondecreasing tuples in ``[0, M]`` cover
    every 1-norm that occurs.
    """
    return [IntMatrix.from_rows([list(t)], n) for t in combinations_with_replacement(range(M + 1), n)]


def ppi_report(M: int, n: int, ceiling: int = DEFAULT_VECTOR_CEILING) -> BoundReport:
    """Max 1-norm over the Graver bases of the whole one-row family."""
    observed, worst = 0, None
    for row in ppi_family(M, n):
        norm = graver_basis(row, ceiling).max_norm1()
        if norm > observed:
            observed, worst = norm, row.row(0)
    return BoundReport("ppi", {"n": n, "M": M}, ppi_bound(M), observed, provenance={"worst": worst})


def random_pair(rng: random.Random, rows_a: int, rows_b: int, cols: int, entries: int):
    A = random_matrix(rng, rows_a, cols, -entries, entries)
    B = random_matrix(rng, rows_b, cols, -entries, entries)
    return A, B


def default_suite(seed: int, ceiling: int = DEFAULT_VECTOR_CEILING) -> list[BoundReport]:
    """The bound checks run by ``bounds validate`` on an empty config."""
    m = IntMatrix.from_rows
    reports = [ppi_report(M, n, ceiling) for M in (2, 3, 4) for n in range(1, 5)]
    for A, B in (([[1, 1, 1]], [[1, 2, 3]]), ([[1, 2]], [[1, 0]]), ([[1, 1, 1]], [[0, 0, 0]])):
        reports.append(stacked_bound(m(A), m(B), ceiling))
    reports.append(special_report(m([[1, 2]]), (1, 0), ceiling))
    rng = random.Random(seed)
    for k in range(5):
        A, B = random_pair(rng, 1, 1, 3, 2)
        rep = stacked_bound(A, B, ceiling)
        rep.provenance = {"seed": seed, "sample": k}
        reports.append(rep)
        rep = recursive_report(A, B, ceiling)
        rep.provenance = {"seed": seed, "sample": k}
        reports.append(rep)
    one = m([[1]])
    g = max(two_stage_max_component(one, one, range(1, 5), ceiling).values())
    reports += [four_block_report(one, one, one, one, N, g, ceiling) for N in range(1, 4)]
    return reports


def run_config(config: Mapping, seed: int, ceiling: int = DEFAULT_VECTOR_CEILING) -> list[BoundReport]:
    """Run a parsed ``bounds validate`` config (see ``fileformat.parse_bounds_config``)."""
    reports = default_suite(seed, ceiling) if config["default_suite"] else []
    rng = random.Random(seed)
    for kind, p in config["checks"]:
        if kind == "ppi":
            reports.append(ppi_report(p["M"], p["n"], ceiling))
        elif kind == "stacked":
            reports.append(stacked_bound(p["A"], p["B"], ceiling))
        elif kind == "recursive":
            reports.append(recursive_report(p["A"], p["B"], ceiling))
        elif kind == "special":
            reports.append(special_report(p["A"], p["a"], ceiling))
        elif kind == "four_block":
            Ns = p["N"] if isinstance(p["N"], list) else [p["N"]]
            g = p.get("g")
            if g is None:
                table = two_stage_max_component(p["A"], p["B"], range(1, max(Ns) + 1), ceiling)
                g = max(table.values())
            for N in Ns:
                reports.append(four_block_report(p["A"], p["B"], p["C"], p["D"], N, g, ceiling))
        elif kind == "random_stacked":
            for k in range(p["count"]):
                A, B = random_pair(rng, p["rows_a"], p["rows_b"], p["cols"], p["entries"])
                rep = stacked_bound(A, B, ceiling)
                rep.provenance = {"seed": seed, "sample": k}
                reports.append(rep)
        else:  # pragma: no cover - rejected by the parser
            raise ValueError(f"unknown check {kind!r}")
    return reports
