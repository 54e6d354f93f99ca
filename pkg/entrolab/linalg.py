"""Exact integer matrices, Smith/Hermite normal forms and integer lattices.

Matrices are stored as numpy arrays of ``dtype=object`` holding Python ints,
so every entry is an arbitrary-precision integer and no operation ever
rounds. Subgroup generators are always columns.
"""

from __future__ import annotations

import math
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np
import sympy


def _object_array(rows: int, cols: int) -> np.ndarray:
    data = np.empty((rows, cols), dtype=object)
    data.fill(0)
    return data


class IntMatrix:
    """Immutable integer matrix with arbitrary-precision entries."""

    __slots__ = ("_data",)

    def __init__(self, data: np.ndarray):
        if data.ndim != 2:
            raise ValueError(f"IntMatrix needs a 2-dimensional array, got {data.ndim} dimensions")
        array = _object_array(*data.shape)
        for (i, j), value in np.ndenumerate(data):
            array[i, j] = int(value)
        array.flags.writeable = False
        self._data = array

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: Optional[int] = None) -> "IntMatrix":
        """Build from a list of rows; ``cols`` is needed only when there are no rows."""
        rows = [list(row) for row in rows]
        width = cols if cols is not None else (len(rows[0]) if rows else 0)
        array = _object_array(len(rows), width)
        for i, row in enumerate(rows):
            if len(row) != width:
                raise ValueError(f"row {i} has {len(row)} entries, expected {width}")
            for j, value in enumerate(row):
                array[i, j] = int(value)
        return cls(array)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], rows: int) -> "IntMatrix":
        """Build from a list of column vectors of length ``rows``."""
        columns = [list(col) for col in columns]
        array = _object_array(rows, len(columns))
        for j, col in enumerate(columns):
            if len(col) != rows:
                raise ValueError(f"column {j} has {len(col)} entries, expected {rows}")
            for i, value in enumerate(col):
                array[i, j] = int(value)
        return cls(array)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls.diagonal([1] * n)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(_object_array(rows, cols))

    @classmethod
    def diagonal(cls, values: Sequence[int], rows: Optional[int] = None, cols: Optional[int] = None) -> "IntMatrix":
        values = [int(v) for v in values]
        array = _object_array(rows if rows is not None else len(values), cols if cols is not None else len(values))
        for i, value in enumerate(values):
            array[i, i] = value
        return cls(array)

    @property
    def shape(self) -> tuple[int, int]:
        return self._data.shape

    @property
    def rows(self) -> int:
        return self._data.shape[0]

    @property
    def cols(self) -> int:
        return self._data.shape[1]

    @property
    def entries(self) -> tuple[tuple[int, ...], ...]:
        """Row-major entries as nested tuples of Python ints."""
        return tuple(tuple(int(v) for v in row) for row in self._data)

    def array(self) -> np.ndarray:
        """Writable copy of the underlying object array."""
        return self._data.copy()

    def __getitem__(self, key: tuple[int, int]) -> int:
        return int(self._data[key])

    def row(self, i: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self._data[i, :])

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self._data[:, j])

    def columns(self) -> Iterator[tuple[int, ...]]:
        for j in range(self.cols):
            yield self.column(j)

    def diagonal_entries(self) -> tuple[int, ...]:
        return tuple(int(self._data[i, i]) for i in range(min(self.shape)))

    def transpose(self) -> "IntMatrix":
        return IntMatrix(self._data.T)

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        if self.cols == 0:
            return IntMatrix.zeros(self.rows, other.cols)
        return IntMatrix(np.dot(self._data, other._data))

    def apply(self, vector: Sequence[int]) -> tuple[int, ...]:
        """Matrix-vector product."""
        if len(vector) != self.cols:
            raise ValueError(f"vector of length {len(vector)} does not fit {self.shape}")
        return tuple(
            sum(int(self._data[i, j]) * int(vector[j]) for j in range(self.cols))
            for i in range(self.rows)
        )

    def __neg__(self) -> "IntMatrix":
        return IntMatrix(-self._data)

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        if self.shape != other.shape:
            raise ValueError(f"cannot add {self.shape} and {other.shape}")
        return IntMatrix(self._data + other._data)

    def scaled(self, factor: int) -> "IntMatrix":
        return IntMatrix(self._data * int(factor))

    def hstack(self, *others: "IntMatrix") -> "IntMatrix":
        blocks = [self, *others]
        if len({m.rows for m in blocks}) != 1:
            raise ValueError("hstack needs equal row counts")
        array = _object_array(self.rows, sum(m.cols for m in blocks))
        offset = 0
        for m in blocks:
            array[:, offset:offset + m.cols] = m._data
            offset += m.cols
        return IntMatrix(array)

    def vstack(self, *others: "IntMatrix") -> "IntMatrix":
        blocks = [self, *others]
        if len({m.cols for m in blocks}) != 1:
            raise ValueError("vstack needs equal column counts")
        array = _object_array(sum(m.rows for m in blocks), self.cols)
        offset = 0
        for m in blocks:
            array[offset:offset + m.rows, :] = m._data
            offset += m.rows
        return IntMatrix(array)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "IntMatrix":
        array = _object_array(len(rows), len(cols))
        for a, i in enumerate(rows):
            for b, j in enumerate(cols):
                array[a, b] = self._data[i, j]
        return IntMatrix(array)

    def is_zero(self) -> bool:
        return all(v == 0 for v in self._data.flat)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __hash__(self) -> int:
        return hash((self.shape, self.entries))

    def __repr__(self) -> str:
        return f"IntMatrix({[list(row) for row in self.entries]})"


def determinant(A: IntMatrix) -> int:
    """Exact determinant of a square matrix (fraction-free Bareiss)."""
    if A.rows != A.cols:
        raise ValueError(f"determinant of non-square matrix {A.shape}")
    if A.rows == 0:
        return 1
    return int(sympy.Matrix(A.entries).det(method="bareiss"))


def _smallest_nonzero(D: np.ndarray, start: int) -> Optional[tuple[int, int]]:
    best = None
    rows, cols = D.shape
    for i in range(start, rows):
        for j in range(start, cols):
            value = D[i, j]
            if value != 0 and (best is None or abs(value) < best[0]):
                best = (abs(value), i, j)
    return None if best is None else (best[1], best[2])


def smith_normal_form(A: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Smith normal form with transforms.

    Returns ``(U, D, V)`` with ``U @ A @ V == D``, ``U`` and ``V`` unimodular
    and ``D`` diagonal with nonnegative entries ``d_1 | d_2 | ...``; zero
    diagonal entries come last. The pivot is always the entry of smallest
    absolute value, ties broken by lowest row then lowest column, so the
    transforms are reproducible.
    """
    D = A.array()
    rows, cols = D.shape
    U = IntMatrix.identity(rows).array()
    V = IntMatrix.identity(cols).array()

    for t in range(min(rows, cols)):
        pivot = _smallest_nonzero(D, t)
        if pivot is None:
            break
        while True:
            i, j = pivot
            if i != t:
                D[[t, i], :] = D[[i, t], :]
                U[[t, i], :] = U[[i, t], :]
            if j != t:
                D[:, [t, j]] = D[:, [j, t]]
                V[:, [t, j]] = V[:, [j, t]]

            clean = True
            p = D[t, t]
            for i in range(t + 1, rows):
                q = D[i, t] // p
                if q:
                    D[i, :] = D[i, :] - q * D[t, :]
                    U[i, :] = U[i, :] - q * U[t, :]
                if D[i, t] != 0:
                    clean = False
            for j in range(t + 1, cols):
                q = D[t, j] // p
                if q:
                    D[:, j] = D[:, j] - q * D[:, t]
                    V[:, j] = V[:, j] - q * V[:, t]
                if D[t, j] != 0:
                    clean = False

            if clean:
                offender = next(
                    ((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols) if D[i, j] % p != 0),
                    None,
                )
                if offender is None:
                    break
                # pull the offending row into row t; its remainder shrinks the pivot
                D[t, :] = D[t, :] + D[offender[0], :]
                U[t, :] = U[t, :] + U[offender[0], :]
            pivot = _smallest_nonzero(D, t)

        if D[t, t] < 0:
            D[t, :] = -D[t, :]
            U[t, :] = -U[t, :]

    return IntMatrix(U), IntMatrix(D), IntMatrix(V)


def hermite_normal_form(A: IntMatrix) -> tuple[IntMatrix, IntMatrix]:
    """Column Hermite normal form.

    Returns ``(H, U)`` with ``A @ U == H`` and ``U`` unimodular. The nonzero
    columns of ``H`` come first and are in echelon form: each has a positive
    pivot in a strictly lower row than the previous one, and the entries to
    the left of a pivot in its row lie in ``[0, pivot)``. Zero columns
    follow; the matching columns of ``U`` span the integer kernel of ``A``.
    """
    H = A.array()
    rows, cols = H.shape
    U = IntMatrix.identity(cols).array()

    k = 0
    for i in range(rows):
        if k >= cols:
            break
        has_pivot = False
        while True:
            nonzero = [j for j in range(k, cols) if H[i, j] != 0]
            if not nonzero:
                break
            has_pivot = True
            j0 = min(nonzero, key=lambda j: (abs(H[i, j]), j))
            if j0 != k:
                H[:, [k, j0]] = H[:, [j0, k]]
                U[:, [k, j0]] = U[:, [j0, k]]
            clean = True
            for j in range(k + 1, cols):
                if H[i, j] != 0:
                    q = H[i, j] // H[i, k]
                    H[:, j] = H[:, j] - q * H[:, k]
                    U[:, j] = U[:, j] - q * U[:, k]
                    if H[i, j] != 0:
                        clean = False
            if clean:
                break
        if not has_pivot:
            continue
        if H[i, k] < 0:
            H[:, k] = -H[:, k]
            U[:, k] = -U[:, k]
        for j in range(k):
            q = H[i, j] // H[i, k]
            if q:
                H[:, j] = H[:, j] - q * H[:, k]
                U[:, j] = U[:, j] - q * U[:, k]
        k += 1

    return IntMatrix(H), IntMatrix(U)


def column_rank(H: IntMatrix) -> int:
    """Number of nonzero columns of a matrix already in column HNF."""
    return sum(1 for j in range(H.cols) if any(H.column(j)))


def kernel_basis(A: IntMatrix) -> IntMatrix:
    """Basis (as columns) of the integer kernel ``{x : A x = 0}``."""
    H, U = hermite_normal_form(A)
    rank = column_rank(H)
    return U.submatrix(range(U.rows), range(rank, U.cols))


def unimodular_inverse(U: IntMatrix) -> IntMatrix:
    """Exact inverse of a unimodular matrix."""
    H, V = hermite_normal_form(U)
    if H != IntMatrix.identity(U.rows):
        raise ValueError("matrix is not unimodular")
    return V


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, x, y)`` with ``x*a + y*b == g == gcd(a, b) >= 0``."""
    x, next_x = 1, 0
    y, next_y = 0, 1
    g, next_g = a, b
    while next_g:
        q = g // next_g
        x, next_x = next_x, x - q * next_x
        y, next_y = next_y, y - q * next_y
        g, next_g = next_g, g - q * next_g
    if g < 0:
        x, y, g = -x, -y, -g
    return g, x, y


class Lattice:
    """Full-rank sublattice of ``Z^n`` in canonical column HNF.

    The basis is the square lower-triangular HNF matrix, which is unique for
    the lattice, so equality of lattices is equality of bases.
    """

    __slots__ = ("_basis",)

    def __init__(self, basis: IntMatrix):
        n = basis.rows
        if basis.cols != n:
            raise ValueError(f"lattice basis must be square, got {basis.shape}")
        for i in range(n):
            if basis[i, i] <= 0:
                raise ValueError("lattice basis is not full rank HNF")
            for j in range(n):
                if j > i and basis[i, j] != 0:
                    raise ValueError("lattice basis is not lower triangular")
                if j < i and not 0 <= basis[i, j] < basis[i, i]:
                    raise ValueError("lattice basis is not reduced")
        self._basis = basis

    @classmethod
    def from_generators(cls, generators: IntMatrix) -> "Lattice":
        """Lattice spanned by the columns of ``generators``; must be full rank."""
        H, _ = hermite_normal_form(generators)
        n = generators.rows
        if column_rank(H) != n:
            raise ValueError(f"generators span a lattice of rank {column_rank(H)}, expected {n}")
        return cls(H.submatrix(range(n), range(n)))

    @classmethod
    def whole(cls, n: int) -> "Lattice":
        return cls(IntMatrix.identity(n))

    @classmethod
    def scaled(cls, n: int, factor: int) -> "Lattice":
        if factor < 1:
            raise ValueError(f"scale factor must be positive, got {factor}")
        return cls(IntMatrix.diagonal([factor] * n))

    @property
    def basis(self) -> IntMatrix:
        return self._basis

    @property
    def dim(self) -> int:
        return self._basis.rows

    @property
    def index(self) -> int:
        """``[Z^n : L]``, the product of the pivots."""
        return math.prod(self._basis.diagonal_entries())

    def coordinates(self, vector: Sequence[int]) -> Optional[tuple[int, ...]]:
        """Integer ``c`` with ``basis @ c == vector``, or None if ``vector`` is not in the lattice."""
        if len(vector) != self.dim:
            raise ValueError(f"vector of length {len(vector)} is not in Z^{self.dim}")
        B = self._basis
        coeffs: list[int] = []
        for i in range(self.dim):
            residual = int(vector[i]) - sum(B[i, j] * coeffs[j] for j in range(i))
            q, r = divmod(residual, B[i, i])
            if r:
                return None
            coeffs.append(q)
        return tuple(coeffs)

    def contains(self, vector: Sequence[int]) -> bool:
        return self.coordinates(vector) is not None

    def reduce(self, vector: Sequence[int]) -> tuple[int, ...]:
        """Canonical representative of ``vector + L`` (coordinate i in ``[0, pivot_i)``)."""
        v = [int(x) for x in vector]
        B = self._basis
        for j in range(self.dim):
            q = v[j] // B[j, j]
            if q:
                for i in range(j, self.dim):
                    v[i] -= q * B[i, j]
        return tuple(v)

    def is_subset(self, other: "Lattice") -> bool:
        return all(other.contains(col) for col in self._basis.columns())

    def sum(self, other: "Lattice") -> "Lattice":
        return Lattice.from_generators(self._basis.hstack(other._basis))

    def intersect(self, other: "Lattice") -> "Lattice":
        K = kernel_basis(self._basis.hstack(-other._basis))
        top = K.submatrix(range(self.dim), range(K.cols))
        generators = self._basis @ top
        bound = IntMatrix.diagonal([self.index * other.index] * self.dim)
        return Lattice.from_generators(generators.hstack(bound))

    def preimage(self, A: IntMatrix) -> "Lattice":
        """``{x in Z^k : A x in L}`` for an ``n x k`` matrix ``A``."""
        if A.rows != self.dim:
            raise ValueError(f"matrix with {A.rows} rows cannot map into Z^{self.dim}")
        k = A.cols
        K = kernel_basis(A.hstack(-self._basis))
        top = K.submatrix(range(k), range(K.cols))
        bound = IntMatrix.diagonal([self.index] * k)
        return Lattice.from_generators(top.hstack(bound))

    def image(self, A: IntMatrix, floor: "Lattice") -> "Lattice":
        """``A(L) + floor`` inside ``Z^n`` where ``A`` is ``n x dim``."""
        if A.cols != self.dim or A.rows != floor.dim:
            raise ValueError(f"matrix of shape {A.shape} does not fit")
        return Lattice.from_generators((A @ self._basis).hstack(floor._basis))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Lattice):
            return NotImplemented
        return self._basis == other._basis

    def __hash__(self) -> int:
        return hash(self._basis)

    def __repr__(self) -> str:
        return f"Lattice({[list(row) for row in self._basis.entries]})"


def enumerate_hnf(n: int, max_index: int) -> Iterator[Lattice]:
    """All full-rank sublattices of ``Z^n`` with index at most ``max_index``.

    Yields in order of increasing index, then lexicographically by basis.
    """
    found: list[Lattice] = []

    def diagonals(position: int, budget: int) -> Iterable[tuple[int, ...]]:
        if position == n:
            yield ()
            return
        for d in range(1, budget + 1):
            for rest in diagonals(position + 1, budget // d):
                yield (d, *rest)

    for diag in diagonals(0, max_index):
        slots = [(i, j) for i in range(n) for j in range(i)]

        def fill(k: int, entries: dict[tuple[int, int], int]) -> Iterable[dict[tuple[int, int], int]]:
            if k == len(slots):
                yield dict(entries)
                return
            i, j = slots[k]
            for value in range(diag[i]):
                entries[(i, j)] = value
                yield from fill(k + 1, entries)

        for entries in fill(0, {}):
            rows = [[diag[i] if i == j else entries.get((i, j), 0) for j in range(n)] for i in range(n)]
            found.append(Lattice(IntMatrix.from_rows(rows, cols=n)))

    found.sort(key=lambda L: (L.index, L.basis.entries))
    yield from found
