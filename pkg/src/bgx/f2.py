"""Exact linear algebra over the two-element field.

Matrices are dense and bit-packed: each row is a Python integer whose bit j
is the entry in column j.  Vectors use the same encoding.  All values are
immutable after construction and every operation is a pure function, so
everything here is safe to share freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ContractViolation

__all__ = [
    "BitMatrix",
    "Subspace",
    "row_reduce",
    "solve",
    "kernel_basis",
    "quotient_matrix",
    "member_coords",
    "vec_to_list",
    "list_to_vec",
]


def list_to_vec(bits) -> int:
    """Pack an iterable of 0/1 entries into an integer vector."""
    v = 0
    for j, b in enumerate(bits):
        if b & 1:
            v |= 1 << j
    return v


def vec_to_list(v: int, n: int) -> list:
    return [(v >> j) & 1 for j in range(n)]


@dataclass(frozen=True)
class BitMatrix:
    """A rows x cols matrix over F2 with bit-packed rows."""

    rows: int
    cols: int
    data: tuple = field(default=())

    def __post_init__(self):
        if len(self.data) != self.rows:
            raise ContractViolation(
                "BitMatrix needs %d rows, got %d" % (self.rows, len(self.data))
            )
        mask = (1 << self.cols) - 1
        for r in self.data:
            if r & ~mask:
                raise ContractViolation("row entry outside declared columns")

    @staticmethod
    def zero(rows: int, cols: int) -> "BitMatrix":
        return BitMatrix(rows, cols, (0,) * rows)

    @staticmethod
    def identity(n: int) -> "BitMatrix":
        return BitMatrix(n, n, tuple(1 << i for i in range(n)))

    @staticmethod
    def from_rows(rows, cols: int) -> "BitMatrix":
        rows = tuple(rows)
        return BitMatrix(len(rows), cols, rows)

    @staticmethod
    def from_lists(entries) -> "BitMatrix":
        entries = list(entries)
        cols = len(entries[0]) if entries else 0
        return BitMatrix(len(entries), cols, tuple(list_to_vec(r) for r in entries))

    def row(self, i: int) -> int:
        return self.data[i]

    def entry(self, i: int, j: int) -> int:
        return (self.data[i] >> j) & 1

    def to_lists(self) -> list:
        return [vec_to_list(r, self.cols) for r in self.data]

    def is_zero(self) -> bool:
        return not any(self.data)

    def transpose(self) -> "BitMatrix":
        cols = []
        for j in range(self.cols):
            c = 0
            for i, r in enumerate(self.data):
                c |= ((r >> j) & 1) << i
            cols.append(c)
        return BitMatrix(self.cols, self.rows, tuple(cols))

    def apply(self, v: int) -> int:
        """Image of a row vector: XOR of the rows selected by v's bits."""
        out = 0
        i = 0
        while v:
            if v & 1:
                out ^= self.data[i]
            v >>= 1
            i += 1
        return out

    def matmul(self, other: "BitMatrix") -> "BitMatrix":
        if self.cols != other.rows:
            raise ContractViolation("matmul shape mismatch")
        return BitMatrix(
            self.rows, other.cols, tuple(other.apply(r) for r in self.data)
        )

    def add(self, other: "BitMatrix") -> "BitMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ContractViolation("add shape mismatch")
        return BitMatrix(
            self.rows, self.cols, tuple(a ^ b for a, b in zip(self.data, other.data))
        )

    def stack(self, other: "BitMatrix") -> "BitMatrix":
        if self.cols != other.cols:
            raise ContractViolation("stack column mismatch")
        return BitMatrix(self.rows + other.rows, self.cols, self.data + other.data)

    def rank(self) -> int:
        return row_reduce(self)[0]


@dataclass(frozen=True)
class Subspace:
    """A subspace of F2^ambient_dim, stored as a reduced row echelon basis."""

    ambient_dim: int
    basis: BitMatrix

    def __post_init__(self):
        if self.basis.cols != self.ambient_dim:
            raise ContractViolation("subspace basis has wrong ambient dimension")
        piv = -1
        for r in self.basis.data:
            if r == 0:
                raise ContractViolation("subspace basis contains a zero row")
            p = lowest_bit(r)
            if p <= piv:
                raise ContractViolation("subspace pivots not strictly increasing")
            piv = p

    @property
    def dim(self) -> int:
        return self.basis.rows

    def contains(self, v: int) -> bool:
        return reduce_vector(v, self.basis.data) == 0

    def vectors(self):
        return self.basis.data


def lowest_bit(v: int) -> int:
    return (v & -v).bit_length() - 1


def reduce_vector(v: int, rref_rows) -> int:
    """Reduce v against rows that are in RREF (pivots increasing)."""
    for r in rref_rows:
        p = r & -r
        if v & p:
            v ^= r
    return v


def row_reduce(m: BitMatrix):
    """Gaussian elimination.  Returns (rank, pivot columns, rref matrix)."""
    work = list(m.data)
    pivots = []
    r = 0
    for col in range(m.cols):
        bit = 1 << col
        sel = None
        for i in range(r, len(work)):
            if work[i] & bit:
                sel = i
                break
        if sel is None:
            continue
        work[r], work[sel] = work[sel], work[r]
        for i in range(len(work)):
            if i != r and (work[i] & bit):
                work[i] ^= work[r]
        pivots.append(col)
        r += 1
    rref = BitMatrix(m.rows, m.cols, tuple(work))
    return r, pivots, rref


def solve(a: BitMatrix, b: int):
    """Solve a.x = b for a column vector x, or return None if inconsistent.

    b is a packed vector of length a.rows.  Among all solutions the one with
    every free coordinate set to zero is returned, so results are
    reproducible.
    """
    if b >> a.rows:
        raise ContractViolation("rhs longer than matrix has rows")
    # Row-reduce the augmented system [a | b]; each matrix row is an equation.
    aug_cols = a.cols + 1
    aug = [a.data[i] | (((b >> i) & 1) << a.cols) for i in range(a.rows)]
    _, pivots, rref = row_reduce(BitMatrix(a.rows, aug_cols, tuple(aug)))
    if a.cols in pivots:
        return None
    x = 0
    for row, p in zip(rref.data, pivots):
        if row >> a.cols:
            x |= 1 << p
    return x


def kernel_basis(a: BitMatrix) -> Subspace:
    """The subspace {x : a.x = 0} of F2^cols."""
    _, pivots, rref = row_reduce(a)
    pivset = set(pivots)
    free = [j for j in range(a.cols) if j not in pivset]
    vecs = []
    for f in free:
        v = 1 << f
        for row, p in zip(rref.data, pivots):
            if (row >> f) & 1:
                v |= 1 << p
        vecs.append(v)
    # Pivot of each vector is its free coordinate; sort to make RREF order.
    vecs.sort(key=lowest_bit)
    _, _, basis = row_reduce(BitMatrix(len(vecs), a.cols, tuple(vecs)))
    rows = tuple(r for r in basis.data if r)
    return Subspace(a.cols, BitMatrix(len(rows), a.cols, rows))


def quotient_matrix(sub: Subspace) -> BitMatrix:
    """Matrix of the projection F2^n -> F2^n / sub in non-pivot coordinates.

    Rows = ambient basis vectors, cols = codimension of sub.
    """
    n = sub.ambient_dim
    pivots = [lowest_bit(r) for r in sub.basis.data]
    pivset = set(pivots)
    coords = [j for j in range(n) if j not in pivset]
    pos = {j: k for k, j in enumerate(coords)}
    rows = []
    for i in range(n):
        v = reduce_vector(1 << i, sub.basis.data)
        out = 0
        for j in pos:
            if (v >> j) & 1:
                out |= 1 << pos[j]
        rows.append(out)
    return BitMatrix(n, len(coords), tuple(rows))


def echelon_insert(rows: list, v: int) -> int:
    """Reduce v against rows (distinct pivots, ascending) and insert it.

    Returns the residual; a nonzero residual is inserted in pivot order, so
    repeated calls maintain the invariant.
    """
    for r in rows:
        p = r & -r
        if v & p:
            v ^= r
    if v:
        pv = v & -v
        pos = 0
        while pos < len(rows) and (rows[pos] & -rows[pos]) < pv:
            pos += 1
        rows.insert(pos, v)
    return v


def member_coords(sub: Subspace, v: int):
    """Coordinates of v in sub's RREF basis, or None if v is outside."""
    coords = 0
    for k, r in enumerate(sub.basis.data):
        p = r & -r
        if v & p:
            v ^= r
            coords |= 1 << k
    return coords if v == 0 else None
