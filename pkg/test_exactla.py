import pytest
from sympy.polys.domains import QQ

from errors import NoSolution, NonUniqueSolution, NotAComplex, UsageError, VerificationFailure
from exactla import (F2, INTEGERS, RATIONALS, Ring, SparseMatrix, assert_square_zero, block_diagonal,
                     express_in_basis, graded_homology, homology, kernel_rows, smith_normal_form, solve_unique,
                     span_rank)


def dense(rows, ring=INTEGERS):
    return SparseMatrix(len(rows), len(rows[0]) if rows else 0,
                        {(r, c): v for r, row in enumerate(rows) for c, v in enumerate(row) if v}, ring)


@pytest.mark.parametrize("text, ring", [
    ("z", INTEGERS),
    ("ZZ", INTEGERS),
    ("q", RATIONALS),
    ("f2", F2),
    ("fp:3", Ring("prime", 3)),
])
def test_ring_parse(text, ring):
    assert Ring.parse(text) == ring


@pytest.mark.parametrize("text", ["fp:4", "fp:x", "r", "fp:1"])
def test_ring_parse_rejects(text):
    with pytest.raises(UsageError):
        Ring.parse(text)


def test_ring_names_round_trip():
    for text in ("z", "q", "f2", "fp:5"):
        assert str(Ring.parse(text)) == text
    assert F2.is_field and not INTEGERS.is_field
    assert Ring.parse("fp:7").characteristic == 7


def test_entries_reduce_over_prime_fields():
    assert SparseMatrix(1, 1, {(0, 0): 2}, F2).is_zero()
    assert SparseMatrix(1, 1, {(0, 0): -1}, Ring.prime(3))[0, 0] == 2
    with pytest.raises(IndexError):
        SparseMatrix(1, 1, {(1, 0): 1})


def test_products_and_sums():
    a = dense([[1, 2], [3, 4]])
    assert a @ SparseMatrix.identity(2) == a
    assert (a @ a).to_dense() == [[7, 10], [15, 22]]
    assert (a - a).is_zero()
    assert a.transpose().to_dense() == [[1, 3], [2, 4]]
    assert a.submatrix([1], [0, 1]).to_dense() == [[3, 4]]
    assert a.apply({0: 1, 1: -1}) == {0: -1, 1: -1}
    with pytest.raises(ValueError):
        a @ SparseMatrix.zeros(3, 1)


def test_block_diagonal_and_export():
    m = block_diagonal([dense([[1]]), dense([[2, 3]])])
    assert m.to_dense() == [[1, 0, 0], [0, 2, 3]]
    text = m.export_matrix_market()
    assert text.splitlines()[1] == "2 3 3"


@pytest.mark.parametrize("rows, diagonal, torsion", [
    ([[2, 0], [0, 3]], (1, 6), (6,)),
    ([[2, 4], [6, 8]], (2, 4), (2, 4)),
    ([[1, 2], [3, 4]], (1, 2), (2,)),
    ([[0, 0], [0, 0]], (), ()),
])
def test_smith_normal_form(rows, diagonal, torsion):
    snf = smith_normal_form(dense(rows))
    assert snf.diagonal == diagonal
    assert snf.torsion == torsion
    assert snf.rank == len(diagonal)


def test_smith_needs_integers():
    with pytest.raises(ValueError):
        smith_normal_form(dense([[1]], RATIONALS))


def test_homology_of_multiplication_by_two():
    d_in = dense([[2]])
    d_out = SparseMatrix.zeros(0, 1)
    group = homology(d_in, d_out)
    assert (group.rank, group.torsion) == (0, (2,))
    assert homology(d_in.with_ring(F2), d_out.with_ring(F2)).rank == 1
    assert homology(d_in.with_ring(RATIONALS), d_out.with_ring(RATIONALS)).is_zero


def test_homology_rejects_non_complexes():
    with pytest.raises(NotAComplex):
        homology(dense([[1]]), dense([[1]]))
    with pytest.raises(NotAComplex):
        assert_square_zero(dense([[0, 1], [1, 0]]))
    assert_square_zero(dense([[0, 0], [1, 0]]))


@pytest.mark.parametrize("threads", [1, 2])
def test_graded_homology(threads):
    d = SparseMatrix(3, 3, {(1, 0): 2})
    gradings = [(0, 0), (1, 0), (1, 2)]
    over_z = graded_homology(d, gradings, threads=threads)
    assert over_z.ranks() == {(1, 2): 1}
    assert over_z.torsion() == {(1, 0): (2,)}
    over_f2 = graded_homology(d, gradings, F2, threads=threads)
    assert over_f2.total_rank() == 3


def test_subspace_helpers():
    kernel = kernel_rows(dense([[1, 1]], RATIONALS), QQ)
    assert len(kernel) == 1
    assert span_rank([{0: 1}, {0: 2}, {1: 1}], 2, QQ) == 2
    assert span_rank([], 2, QQ) == 0


def test_express_in_basis():
    m = express_in_basis([{0: 1}], [{1: 1}], [{0: 3, 1: 5}], 2, INTEGERS)
    assert m.to_dense() == [[3]]
    with pytest.raises(VerificationFailure):
        express_in_basis([{0: 1}], [], [{2: 1}], 3, INTEGERS)
    with pytest.raises(VerificationFailure):
        express_in_basis([{0: 2}], [], [{0: 1}], 1, INTEGERS)


def test_solve_unique():
    assert solve_unique([{0: 1, 1: 1}, {1: 1}], [1, 1], 2, F2) == [0, 1]
    assert solve_unique([{0: 1}], [0], 1, F2) == [0]
    with pytest.raises(NoSolution):
        solve_unique([{0: 1}, {0: 1}], [0, 1], 1, F2)
    with pytest.raises(NonUniqueSolution):
        solve_unique([{0: 1, 1: 1}], [1], 2, F2)
    with pytest.raises(UsageError):
        solve_unique([{0: 1}], [1], 1, INTEGERS)
