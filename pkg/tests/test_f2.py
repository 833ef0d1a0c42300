import random

import pytest

from bgx.errors import ContractViolation
from bgx.f2 import (
    BitMatrix,
    Subspace,
    echelon_insert,
    kernel_basis,
    list_to_vec,
    member_coords,
    quotient_matrix,
    row_reduce,
    solve,
    vec_to_list,
)


def test_row_reduce_identity():
    rank, pivots, rref = row_reduce(BitMatrix.identity(3))
    assert rank == 3 and pivots == [0, 1, 2]
    assert rref.data == BitMatrix.identity(3).data


def test_row_reduce_all_ones():
    rank, pivots, _ = row_reduce(BitMatrix.from_lists([[1, 1], [1, 1]]))
    assert rank == 1 and pivots == [0]


def test_row_reduce_zero():
    rank, pivots, _ = row_reduce(BitMatrix.zero(3, 4))
    assert rank == 0 and pivots == []


def test_solve_identity():
    x = solve(BitMatrix.identity(2), list_to_vec([1, 0]))
    assert vec_to_list(x, 2) == [1, 0]


def test_solve_underdetermined_prefers_low_pivots():
    x = solve(BitMatrix.from_lists([[1, 1]]), 1)
    assert vec_to_list(x, 2) == [1, 0]


def test_solve_inconsistent():
    assert solve(BitMatrix.from_lists([[0, 0]]), 1) is None


def test_solve_rhs_too_long():
    with pytest.raises(ContractViolation):
        solve(BitMatrix.from_lists([[1, 0]]), 0b10)


def test_kernel_identity_and_zero():
    assert kernel_basis(BitMatrix.identity(4)).dim == 0
    full = kernel_basis(BitMatrix.zero(1, 3))
    assert full.dim == 3


def test_kernel_one_relation():
    ker = kernel_basis(BitMatrix.from_lists([[1, 1]]))
    assert ker.dim == 1 and ker.vectors()[0] == 0b11


def test_rank_nullity_random():
    rng = random.Random(11)
    for _ in range(60):
        rows = rng.randrange(1, 64)
        cols = rng.randrange(1, 64)
        m = BitMatrix(
            rows, cols, tuple(rng.getrandbits(cols) for _ in range(rows))
        )
        rank, _, rref = row_reduce(m)
        assert rank + kernel_basis(m).dim == cols
        # idempotence on its own output
        rank2, _, rref2 = row_reduce(rref)
        assert rank2 == rank and rref2.data == rref.data


def test_solve_verifies_by_substitution():
    rng = random.Random(12)
    for _ in range(60):
        rows = rng.randrange(1, 20)
        cols = rng.randrange(1, 20)
        m = BitMatrix(rows, cols, tuple(rng.getrandbits(cols) for _ in range(rows)))
        b = rng.getrandbits(rows)
        x = solve(m, b)
        if x is None:
            # b outside the column span: augmenting raises the rank
            aug = BitMatrix(
                rows, cols + 1, tuple(m.data[i] | (((b >> i) & 1) << cols) for i in range(rows))
            )
            assert aug.rank() == m.rank() + 1
        else:
            got = 0
            for i in range(rows):
                got |= (bin(m.data[i] & x).count("1") & 1) << i
            assert got == b


def test_quotient_and_membership():
    sub_rows = BitMatrix.from_lists([[1, 1, 0]])
    sub = Subspace(3, sub_rows)
    q = quotient_matrix(sub)
    assert q.cols == 2
    assert q.apply(0b011) == 0  # the subspace maps to zero
    assert member_coords(sub, 0b011) == 1
    assert member_coords(sub, 0b001) is None


def test_echelon_insert_membership():
    rows = []
    assert echelon_insert(rows, 0b101)
    assert echelon_insert(rows, 0b110)
    assert echelon_insert(rows, 0b011) == 0  # dependent
    assert len(rows) == 2
