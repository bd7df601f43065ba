import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graverfold.matrix import (DimensionError, IntMatrix, MatrixFormatError, NoSolution, Shape,
                               assemble_four_block, assemble_transposed_form, format_matrix,
                               hermite_normal_form, kernel_basis, parse_matrix, rank,
                               solve_diophantine, two_sum, xgcd)

m = IntMatrix.from_rows


def matrices(max_rows=3, max_cols=4, radius=4):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(st.integers(-radius, radius), min_size=c, max_size=c),
                               min_size=r, max_size=r).map(lambda rows: m(rows, c))))


def test_four_block_small_example():
    sys_ = assemble_four_block(m([[1]]), m([[2]]), m([[3]]), m([[4]]), 2)
    assert sys_.matrix.to_rows() == [[3, 4, 4], [2, 1, 0], [2, 0, 1]]
    assert sys_.shape is Shape.FOUR_BLOCK


def test_four_block_special_cases():
    A, D = m([[1, 2]]), m([[1, 1]])
    zB, zC = IntMatrix.zeros(1, 1), IntMatrix.zeros(1, 1)
    nfold = assemble_four_block(A, zB, zC, D, 2).matrix
    assert nfold.to_rows() == [[0, 1, 1, 1, 1], [0, 1, 2, 0, 0], [0, 0, 0, 1, 2]]
    B = m([[3]])
    two_stage = assemble_four_block(A, B, zC, IntMatrix.zeros(1, 2), 2).matrix
    assert two_stage.to_rows() == [[0, 0, 0, 0, 0], [3, 1, 2, 0, 0], [3, 0, 0, 1, 2]]


def test_transposed_examples():
    one = m([[1]])
    M = assemble_transposed_form(one, one, one, one, 2).matrix
    assert M.to_rows() == [[1, 0, 1, 1], [0, 1, 1, 1], [1, 1, 1, 0], [1, 1, 0, 1]]
    A, B, C, D = m([[1, 2], [3, 4]]), m([[5], [6]]), m([[7]]), m([[8, 9]])
    assert assemble_transposed_form(A, B, C, D, 1).matrix.to_rows() == [[1, 2, 5], [3, 4, 6], [8, 9, 7]]
    assert assemble_transposed_form(A, B, C, D, 3).matrix.shape == (9, 9)


def test_block_dimension_errors_name_the_pair():
    with pytest.raises(DimensionError, match="A.*B|B.*A"):
        assemble_four_block(m([[1]]), m([[1], [2]]), m([[1]]), m([[1]]), 2)
    with pytest.raises(DimensionError):
        assemble_four_block(m([[1]]), m([[1]]), m([[1]]), m([[1]]), 0)


def test_block_labels_roundtrip():
    sys_ = assemble_four_block(m([[1, 2]]), m([[3]]), m([[4]]), m([[5, 6]]), 3)
    for j in range(sys_.matrix.cols):
        assert sys_.column_index(*sys_.column_label(j)) == j
    for i in range(sys_.matrix.rows):
        assert sys_.row_index(*sys_.row_label(i)) == i
    assert sys_.column_label(0) == ("x", 0, 0)
    assert sys_.column_label(3) == ("y", 1, 0)


def test_two_sum():
    left = m([[1, 2], [3, 4]])        # C = [[1], [3]], a = (2, 4)
    right = m([[5, 6], [7, 8]])       # b = (5, 6), A = [[7, 8]]
    assert two_sum(left, right).to_rows() == [[1, 10, 12], [3, 20, 24], [0, 7, 8]]
    zero_a = m([[1, 0]])
    assert two_sum(zero_a, right).to_rows() == [[1, 0, 0], [0, 7, 8]]


def test_diophantine_examples():
    z = solve_diophantine(m([[1, 2]]), [3])
    assert z[0] + 2 * z[1] == 3
    assert solve_diophantine(m([[2]]), [3]) is NoSolution
    assert not NoSolution
    assert solve_diophantine(IntMatrix.identity(2), [5, -7]) == (5, -7)


def test_diophantine_dimension_error():
    with pytest.raises(DimensionError):
        solve_diophantine(m([[1, 2]]), [1, 2])


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_hnf_is_unimodular_transform(M):
    hf = hermite_normal_form(M)
    assert M.matmul(hf.U) == hf.H
    # unimodular: the transform has an integer inverse, so its determinant is ±1
    assert abs(_det(hf.U.to_rows())) == 1
    for k in range(hf.rank, M.cols):
        assert all(x == 0 for x in hf.H.column(k))
    for v in hf.kernel_basis():
        assert not any(M.matvec(v))


@settings(max_examples=150, deadline=None)
@given(matrices(), st.data())
def test_diophantine_solves_reachable_rhs(M, data):
    z0 = data.draw(st.lists(st.integers(-5, 5), min_size=M.cols, max_size=M.cols))
    b = M.matvec(z0)
    z = solve_diophantine(M, b)
    assert z is not NoSolution and M.matvec(z) == b


def test_rank_and_kernel():
    assert rank(m([[1, 2], [2, 4]])) == 1
    assert kernel_basis(IntMatrix.identity(3)) == []
    (v,) = kernel_basis(m([[1, 2]]))
    assert abs(v[0]) == 2 and abs(v[1]) == 1


def test_xgcd():
    for a, b in [(12, 18), (-4, 6), (0, 5), (7, 0), (0, 0)]:
        g, x, y = xgcd(a, b)
        assert g >= 0 and a * x + b * y == g


def test_matrix_text_roundtrip_and_errors():
    M = m([[1, -2, 3], [0, 4, -5]])
    assert parse_matrix(format_matrix(M)) == M
    with pytest.raises(MatrixFormatError, match="m.txt:3"):
        parse_matrix("2 2\n1 2\n3\n", "m.txt")
    with pytest.raises(MatrixFormatError, match=":1:"):
        parse_matrix("two two\n", "x")
    with pytest.raises(MatrixFormatError, match="non-integer"):
        parse_matrix("1 2\n1 a\n")


def test_zero_row_matrix_roundtrip():
    Z = IntMatrix.zeros(0, 3)
    assert parse_matrix(format_matrix(Z)) == Z


def _det(rows):
    from fractions import Fraction
    a = [[Fraction(x) for x in r] for r in rows]
    n, det = len(a), Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c]), None)
        if p is None:
            return 0
        if p != c:
            a[c], a[p] = a[p], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return det
