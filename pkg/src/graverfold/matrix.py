"""Exact integer matrices, column-style Hermite normal form and block assembly.

Everything here works on Python ints, so intermediate values never overflow.
Vectors are plain tuples of ints.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

Vector = tuple[int, ...]


class DimensionError(ValueError):
    """Raised when matrix or vector shapes do not fit together."""


class MatrixFormatError(ValueError):
    """Raised when a matrix text file cannot be parsed."""


@dataclass(frozen=True)
class IntMatrix:
    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise DimensionError("negative matrix dimension")
        if len(self.entries) != self.rows * self.cols:
            raise DimensionError(
                f"{len(self.entries)} entries for a {self.rows}x{self.cols} matrix"
            )
        for x in self.entries:
            if not isinstance(x, int) or isinstance(x, bool):
                raise TypeError(f"matrix entries must be int, got {type(x).__name__}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> IntMatrix:
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != cols:
                raise DimensionError("ragged rows")
        return cls(len(rows), cols, tuple(int(x) for r in rows for x in r))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> IntMatrix:
        return cls(rows, cols, (0,) * (rows * cols))

    @classmethod
    def identity(cls, n: int, scale: int = 1) -> IntMatrix:
        return cls(n, n, tuple(scale if i == j else 0 for i in range(n) for j in range(n)))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], rows: int) -> IntMatrix:
        for c in columns:
            if len(c) != rows:
                raise DimensionError("column length mismatch")
        return cls(rows, len(columns), tuple(columns[j][i] for i in range(rows) for j in range(len(columns))))

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> Vector:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def column(self, j: int) -> Vector:
        return self.entries[j::self.cols] if self.cols else ()

    def to_rows(self) -> list[list[int]]:
        return [list(self.row(i)) for i in range(self.rows)]

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def transpose(self) -> IntMatrix:
        return IntMatrix(self.cols, self.rows,
                         tuple(self[i, j] for j in range(self.cols) for i in range(self.rows)))

    def matvec(self, v: Sequence[int]) -> Vector:
        if len(v) != self.cols:
            raise DimensionError(f"vector of length {len(v)} for {self.cols} columns")
        c = self.cols
        e = self.entries
        return tuple(sum(e[i * c + j] * v[j] for j in range(c) if v[j]) for i in range(self.rows))

    def matmul(self, other: IntMatrix) -> IntMatrix:
        if self.cols != other.rows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        cols = [self.matvec(other.column(j)) for j in range(other.cols)]
        return IntMatrix.from_columns(cols, self.rows)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> IntMatrix:
        return IntMatrix(len(rows), len(cols), tuple(self[i, j] for i in rows for j in cols))

    def max_abs(self) -> int:
        return max((abs(x) for x in self.entries), default=0)

    def is_zero(self) -> bool:
        return not any(self.entries)

    def __str__(self) -> str:
        return format_matrix(self)


def vstack(*blocks: IntMatrix) -> IntMatrix:
    cols = blocks[0].cols
    if any(b.cols != cols for b in blocks):
        raise DimensionError("vstack: column counts differ")
    return IntMatrix(sum(b.rows for b in blocks), cols, sum((b.entries for b in blocks), ()))


def hstack(*blocks: IntMatrix) -> IntMatrix:
    rows = blocks[0].rows
    if any(b.rows != rows for b in blocks):
        raise DimensionError("hstack: row counts differ")
    out = []
    for i in range(rows):
        for b in blocks:
            out.extend(b.row(i))
    return IntMatrix(rows, sum(b.cols for b in blocks), tuple(out))


def block_matrix(grid: Sequence[Sequence[IntMatrix | None]],
                 row_sizes: Sequence[int], col_sizes: Sequence[int]) -> IntMatrix:
    """Assemble a matrix from a grid of blocks; ``None`` stands for a zero block."""
    rows_out = []
    for bi, brow in enumerate(grid):
        parts = []
        for bj, blk in enumerate(brow):
            if blk is None:
                blk = IntMatrix.zeros(row_sizes[bi], col_sizes[bj])
            elif blk.shape != (row_sizes[bi], col_sizes[bj]):
                raise DimensionError(
                    f"block ({bi},{bj}) has shape {blk.shape}, "
                    f"expected {(row_sizes[bi], col_sizes[bj])}"
                )
            parts.append(blk)
        rows_out.append(hstack(*parts) if parts else IntMatrix.zeros(row_sizes[bi], 0))
    return vstack(*rows_out)


# ---------------------------------------------------------------------------
# N-fold block systems


class Shape(enum.Enum):
    FOUR_BLOCK = "fourblock"
    TRANSPOSED = "transposed"


@dataclass(frozen=True)
class BlockSystem:
    """The quadruple (A, B, C, D), a replication count and the assembled matrix.

    Column layout:
      FOUR_BLOCK  -- first-stage x (n_B columns), then y_1..y_N (n_A each).
                     Rows: d_C coupling rows, then N blocks of d_A rows.
      TRANSPOSED  -- x_1..x_N (n_A each), then y_1..y_N (n_B each).
                     Rows: N blocks of d_A rows, then N blocks of d_C rows.
    """

    A: IntMatrix
    B: IntMatrix
    C: IntMatrix
    D: IntMatrix
    n: int
    shape: Shape
    matrix: IntMatrix = field(compare=False)

    @property
    def d_A(self) -> int:
        return self.A.rows

    @property
    def n_A(self) -> int:
        return self.A.cols

    @property
    def d_C(self) -> int:
        return self.C.rows

    @property
    def n_B(self) -> int:
        return self.B.cols

    def column_index(self, block: str, copy: int, local: int) -> int:
        """Flat column of local coordinate ``local`` in block ``block``.

        ``block`` is ``"x"`` or ``"y"``; ``copy`` selects the replica (ignored
        for the single first-stage block of the four-block shape).
        """
        nA, nB, N = self.n_A, self.n_B, self.n
        if self.shape is Shape.FOUR_BLOCK:
            if block == "x":
                _check_range(local, nB)
                return local
            if block == "y":
                _check_range(copy, N)
                _check_range(local, nA)
                return nB + copy * nA + local
        else:
            if block == "x":
                _check_range(copy, N)
                _check_range(local, nA)
                return copy * nA + local
            if block == "y":
                _check_range(copy, N)
                _check_range(local, nB)
                return N * nA + copy * nB + local
        raise KeyError(block)

    def column_label(self, j: int) -> tuple[str, int, int]:
        """Inverse of :meth:`column_index`."""
        nA, nB, N = self.n_A, self.n_B, self.n
        if not 0 <= j < self.matrix.cols:
            raise IndexError(j)
        if self.shape is Shape.FOUR_BLOCK:
            if j < nB:
                return ("x", 0, j)
            q, r = divmod(j - nB, nA)
            return ("y", q, r)
        if j < N * nA:
            q, r = divmod(j, nA)
            return ("x", q, r)
        q, r = divmod(j - N * nA, nB)
        return ("y", q, r)

    def row_index(self, block: str, copy: int, local: int) -> int:
        """Flat row of ``local`` in row block ``"top"``/``"C"`` or ``"A"`` rows.

        Row blocks are named after the diagonal block they contain: ``"C"``
        rows carry C (and D), ``"A"`` rows carry A (and B).
        """
        dA, dC, N = self.d_A, self.d_C, self.n
        if self.shape is Shape.FOUR_BLOCK:
            if block == "C":
                _check_range(local, dC)
                return local
            if block == "A":
                _check_range(copy, N)
                _check_range(local, dA)
                return dC + copy * dA + local
        else:
            if block == "A":
                _check_range(copy, N)
                _check_range(local, dA)
                return copy * dA + local
            if block == "C":
                _check_range(copy, N)
                _check_range(local, dC)
                return N * dA + copy * dC + local
        raise KeyError(block)

    def row_label(self, i: int) -> tuple[str, int, int]:
        dA, dC, N = self.d_A, self.d_C, self.n
        if not 0 <= i < self.matrix.rows:
            raise IndexError(i)
        if self.shape is Shape.FOUR_BLOCK:
            if i < dC:
                return ("C", 0, i)
            q, r = divmod(i - dC, dA)
            return ("A", q, r)
        if i < N * dA:
            q, r = divmod(i, dA)
            return ("A", q, r)
        q, r = divmod(i - N * dA, dC)
        return ("C", q, r)

    def extract(self, name: str, row_copy: int = 0, col_copy: int = 0) -> IntMatrix:
        """Read block ``name`` back out of the assembled matrix."""
        if self.shape is Shape.FOUR_BLOCK:
            where = {"C": ("C", "x"), "D": ("C", "y"), "B": ("A", "x"), "A": ("A", "y")}
        else:
            where = {"A": ("A", "x"), "B": ("A", "y"), "D": ("C", "x"), "C": ("C", "y")}
        rblock, cblock = where[name]
        blk = getattr(self, name)
        rows = [self.row_index(rblock, row_copy, k) for k in range(blk.rows)]
        cols = [self.column_index(cblock, col_copy, k) for k in range(blk.cols)]
        return self.matrix.submatrix(rows, cols)


def _check_range(k: int, size: int) -> None:
    if not 0 <= k < size:
        raise IndexError(f"index {k} outside 0..{size - 1}")


def _check_blocks(A: IntMatrix, B: IntMatrix, C: IntMatrix, D: IntMatrix, n: int) -> None:
    if n < 1:
        raise DimensionError("replication count N must be at least 1")
    pairs = [
        ("A", "B", "rows", A.rows, B.rows),
        ("C", "D", "rows", C.rows, D.rows),
        ("A", "D", "columns", A.cols, D.cols),
        ("B", "C", "columns", B.cols, C.cols),
    ]
    for p, q, what, x, y in pairs:
        if x != y:
            raise DimensionError(f"blocks {p} and {q} disagree in {what}: {x} != {y}")


def assemble_four_block(A: IntMatrix, B: IntMatrix, C: IntMatrix, D: IntMatrix, n: int) -> BlockSystem:
    """Build the N-fold 4-block matrix with C top-left, D across the top,
    B down the left and N diagonal copies of A."""
    _check_blocks(A, B, C, D, n)
    grid = [[C] + [D] * n]
    for i in range(n):
        grid.append([B] + [A if j == i else None for j in range(n)])
    mat = block_matrix(grid, [C.rows] + [A.rows] * n, [B.cols] + [A.cols] * n)
    return BlockSystem(A, B, C, D, n, Shape.FOUR_BLOCK, mat)


def assemble_transposed_form(A: IntMatrix, B: IntMatrix, C: IntMatrix, D: IntMatrix, n: int) -> BlockSystem:
    """Build the transposed N-fold form: N diagonal A's against a full grid
    of B's, a full grid of D's against N diagonal C's."""
    _check_blocks(A, B, C, D, n)
    grid = []
    for i in range(n):
        grid.append([A if j == i else None for j in range(n)] + [B] * n)
    for i in range(n):
        grid.append([D] * n + [C if j == i else None for j in range(n)])
    mat = block_matrix(grid, [A.rows] * n + [C.rows] * n, [A.cols] * n + [B.cols] * n)
    return BlockSystem(A, B, C, D, n, Shape.TRANSPOSED, mat)


def two_sum(left: IntMatrix, right: IntMatrix) -> IntMatrix:
    """2-sum of ``(C | a)`` and ``(b^T over A)``.

    The last column ``a`` of ``left`` and the first row ``b^T`` of ``right``
    are glued through their outer product::

        [[C, a b^T],
         [0, A    ]]
    """
    if left.cols < 1 or left.rows < 1:
        raise DimensionError("2-sum: left operand needs at least one column")
    if right.rows < 1 or right.cols < 1:
        raise DimensionError("2-sum: right operand needs at least one row")
    a = left.column(left.cols - 1)
    b = right.row(0)
    C = left.submatrix(range(left.rows), range(left.cols - 1))
    A = right.submatrix(range(1, right.rows), range(right.cols))
    outer = IntMatrix(len(a), len(b), tuple(x * y for x in a for y in b))
    top = hstack(C, outer)
    bottom = hstack(IntMatrix.zeros(A.rows, C.cols), A)
    return vstack(top, bottom)


# ---------------------------------------------------------------------------
# Hermite normal form and Diophantine solving


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


@dataclass(frozen=True)
class HermiteForm:
    """Column-style HNF ``M U = H`` with ``U`` unimodular.

    ``pivots[k]`` is the row holding the pivot of column ``k``; columns
    ``rank..cols-1`` of ``H`` are zero, so the same columns of ``U`` span
    the integer kernel of ``M``.
    """

    H: IntMatrix
    U: IntMatrix
    pivots: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def kernel_basis(self) -> list[Vector]:
        return [self.U.column(k) for k in range(self.rank, self.U.cols)]


def hermite_normal_form(M: IntMatrix) -> HermiteForm:
    m, n = M.shape
    # work column-wise: H[j] is column j, U[j] is column j of the transform
    H = [list(M.column(j)) for j in range(n)]
    U = [[1 if i == j else 0 for i in range(n)] for j in range(n)]
    pivots = []
    r = 0
    for i in range(m):
        if r == n:
            break
        for j in range(r + 1, n):
            b = H[j][i]
            if b == 0:
                continue
            a = H[r][i]
            g, x, y = xgcd(a, b)
            p, q = a // g, b // g
            # [col_r, col_j] <- [x col_r + y col_j, -q col_r + p col_j]; det = 1
            for vecs in (H, U):
                cr, cj = vecs[r], vecs[j]
                vecs[r] = [x * s + y * t for s, t in zip(cr, cj)]
                vecs[j] = [p * t - q * s for s, t in zip(cr, cj)]
        piv = H[r][i]
        if piv == 0:
            continue
        if piv < 0:
            H[r] = [-s for s in H[r]]
            U[r] = [-s for s in U[r]]
            piv = -piv
        # reduce entries left of the pivot into [0, piv)
        for k in range(r):
            q = H[k][i] // piv
            if q:
                H[k] = [s - q * t for s, t in zip(H[k], H[r])]
                U[k] = [s - q * t for s, t in zip(U[k], U[r])]
        pivots.append(i)
        r += 1
    return HermiteForm(IntMatrix.from_columns(H, m), IntMatrix.from_columns(U, n), tuple(pivots))


class _NoSolution:
    """Sentinel: the linear Diophantine system has no integer solution."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NoSolution"

    def __bool__(self):
        return False


NoSolution = _NoSolution()


def solve_diophantine(M: IntMatrix, b: Sequence[int], hnf: HermiteForm | None = None):
    """Return an integer ``z`` with ``M z = b``, or ``NoSolution``."""
    if len(b) != M.rows:
        raise DimensionError(f"right-hand side has length {len(b)}, matrix has {M.rows} rows")
    if hnf is None:
        hnf = hermite_normal_form(M)
    H, U = hnf.H, hnf.U
    y = [0] * M.cols
    k = 0
    for i in range(M.rows):
        residual = b[i] - sum(H[i, j] * y[j] for j in range(k))
        if k < hnf.rank and hnf.pivots[k] == i:
            q, rem = divmod(residual, H[i, k])
            if rem:
                return NoSolution
            y[k] = q
            k += 1
        elif residual:
            return NoSolution
    z = U.matvec(y)
    assert M.matvec(z) == tuple(b)
    return z


def kernel_basis(M: IntMatrix) -> list[Vector]:
    """A basis of the integer lattice ker(M) ∩ Z^n."""
    return hermite_normal_form(M).kernel_basis()


def rank(M: IntMatrix) -> int:
    return hermite_normal_form(M).rank


# ---------------------------------------------------------------------------
# Text format: "rows cols" then one row per line


def parse_matrix(text: str, source: str = "<string>") -> IntMatrix:
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((lineno, line))
    if not lines:
        raise MatrixFormatError(f"{source}: empty matrix file")
    lineno, header = lines[0]
    try:
        rows, cols = (int(t) for t in header.split())
    except ValueError:
        raise MatrixFormatError(f"{source}:{lineno}: expected 'rows cols' header") from None
    body = lines[1:]
    if len(body) != rows:
        where = body[rows][0] if len(body) > rows else (body[-1][0] if body else lineno)
        raise MatrixFormatError(f"{source}:{where}: expected {rows} rows, found {len(body)}")
    data = []
    for lineno, line in body:
        try:
            vals = [int(t) for t in line.split()]
        except ValueError:
            raise MatrixFormatError(f"{source}:{lineno}: non-integer entry") from None
        if len(vals) != cols:
            raise MatrixFormatError(f"{source}:{lineno}: expected {cols} entries, found {len(vals)}")
        data.append(vals)
    return IntMatrix.from_rows(data, cols)


def read_matrix(path: str | Path) -> IntMatrix:
    path = Path(path)
    return parse_matrix(path.read_text(), str(path))


def format_matrix(M: IntMatrix) -> str:
    lines = [f"{M.rows} {M.cols}"]
    lines += [" ".join(str(x) for x in M.row(i)) for i in range(M.rows)]
    return "\n".join(lines) + "\n"


def as_matrix(x: IntMatrix | Iterable[Iterable[int]]) -> IntMatrix:
    if isinstance(x, IntMatrix):
        return x
    return IntMatrix.from_rows([list(r) for r in x])
