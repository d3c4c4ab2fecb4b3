"""Exact arithmetic over prime fields GF(q) and dense matrices on top of it.

Matrices are thin immutable wrappers around ``int64`` numpy arrays whose
entries are kept reduced to ``[0, q)``. Products are accumulated in chunks so
that no intermediate sum can overflow, which keeps every result exact for any
prime ``q < 2**31``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, DivisionByZero, FieldMismatch, SingularMatrix

MAX_MODULUS = 2**31
_INT64_MAX = np.iinfo(np.int64).max


def is_prime(q: int) -> bool:
    """Trial division; fine for moduli below 2**31."""
    if q < 2:
        return False
    if q < 4:
        return True
    if q % 2 == 0:
        return False
    for d in range(3, math.isqrt(q) + 1, 2):
        if q % d == 0:
            return False
    return True


def next_prime(n: int) -> int:
    """Smallest prime >= n."""
    q = max(n, 2)
    while not is_prime(q):
        q += 1
    return q


@dataclass(frozen=True)
class PrimeField:
    q: int

    def __post_init__(self):
        if not isinstance(self.q, (int, np.integer)) or not 2 <= self.q < MAX_MODULUS:
            raise ValueError(f"field modulus must be an integer in [2, 2**31), got {self.q!r}")
        if not is_prime(int(self.q)):
            raise ValueError(f"field modulus {self.q} is not prime")
        object.__setattr__(self, "q", int(self.q))

    def __call__(self, value: int) -> FieldElement:
        return FieldElement(int(value) % self.q, self)

    def __repr__(self):
        return f"GF({self.q})"

    def _coerce(self, a) -> int:
        if isinstance(a, FieldElement):
            if a.field.q != self.q:
                raise FieldMismatch(f"element of {a.field} used in {self}")
            return a.value
        return int(a) % self.q

    def add(self, a, b) -> FieldElement:
        return FieldElement((self._coerce(a) + self._coerce(b)) % self.q, self)

    def sub(self, a, b) -> FieldElement:
        return FieldElement((self._coerce(a) - self._coerce(b)) % self.q, self)

    def mul(self, a, b) -> FieldElement:
        return FieldElement((self._coerce(a) * self._coerce(b)) % self.q, self)

    def neg(self, a) -> FieldElement:
        return FieldElement((-self._coerce(a)) % self.q, self)

    def inv(self, a) -> FieldElement:
        return FieldElement(self.inv_int(self._coerce(a)), self)

    def inv_int(self, a: int) -> int:
        a %= self.q
        if a == 0:
            raise DivisionByZero(f"0 has no inverse in {self}")
        return pow(a, self.q - 2, self.q)

    def random_elements(self, rng: np.random.Generator, shape) -> np.ndarray:
        return rng.integers(0, self.q, size=shape, dtype=np.int64)


@dataclass(frozen=True)
class FieldElement:
    value: int
    field: PrimeField

    def __post_init__(self):
        if not 0 <= self.value < self.field.q:
            raise ValueError(f"{self.value} is not a reduced residue mod {self.field.q}")

    def __add__(self, other):
        return self.field.add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return self.field.sub(self, other)

    def __rsub__(self, other):
        return self.field.sub(other, self)

    def __mul__(self, other):
        return self.field.mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return self.field.neg(self)

    def __truediv__(self, other):
        return self * self.field.inv(other)

    def inverse(self) -> FieldElement:
        return self.field.inv(self)

    def __int__(self):
        return self.value

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.value == other.value and self.field.q == other.field.q
        if isinstance(other, (int, np.integer)):
            return self.value == int(other) % self.field.q
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.field.q))

    def __repr__(self):
        return f"{self.value} (mod {self.field.q})"


def _mod_matmul(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    inner = a.shape[1]
    # Largest number of products that can be summed without overflowing int64.
    chunk = max(1, _INT64_MAX // max(1, (q - 1) ** 2))
    if inner <= chunk:
        return (a @ b) % q
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    for s in range(0, inner, chunk):
        out = (out + (a[:, s:s + chunk] @ b[s:s + chunk, :]) % q) % q
    return out


class Matrix:
    """Immutable matrix over a prime field."""

    __slots__ = ("field", "_a")

    def __init__(self, entries, field: PrimeField):
        arr = np.array(entries, dtype=object)
        if arr.ndim == 1 and arr.size == 0:
            arr = arr.reshape(0, 0)
        if arr.ndim != 2:
            raise DimensionMismatch(f"matrix entries must be 2-D, got shape {arr.shape}")
        arr = np.asarray(arr % field.q, dtype=np.int64)
        arr.setflags(write=False)
        self.field = field
        self._a = arr

    @classmethod
    def _wrap(cls, arr: np.ndarray, field: PrimeField) -> Matrix:
        m = cls.__new__(cls)
        arr = np.ascontiguousarray(arr, dtype=np.int64)
        arr.setflags(write=False)
        m.field = field
        m._a = arr
        return m

    @classmethod
    def identity(cls, n: int, field: PrimeField) -> Matrix:
        return cls._wrap(np.eye(n, dtype=np.int64), field)

    @classmethod
    def zeros(cls, rows: int, cols: int, field: PrimeField) -> Matrix:
        return cls._wrap(np.zeros((rows, cols), dtype=np.int64), field)

    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape

    @property
    def array(self) -> np.ndarray:
        """Read-only view of the residues."""
        return self._a

    @property
    def entries(self) -> list[int]:
        """Row-major flat list of residues."""
        return [int(x) for x in self._a.reshape(-1)]

    def tolist(self) -> list[list[int]]:
        return [[int(x) for x in row] for row in self._a]

    def __getitem__(self, idx):
        out = self._a[idx]
        if np.ndim(out) == 0:
            return int(out)
        return out

    def element(self, i: int, j: int) -> FieldElement:
        return FieldElement(int(self._a[i, j]), self.field)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> Matrix:
        return Matrix._wrap(self._a[np.ix_(list(rows), list(cols))], self.field)

    @property
    def T(self) -> Matrix:
        return Matrix._wrap(self._a.T, self.field)

    def __neg__(self) -> Matrix:
        return Matrix._wrap((-self._a) % self.field.q, self.field)

    def _check(self, other: Matrix):
        if not isinstance(other, Matrix):
            raise TypeError(f"expected Matrix, got {type(other).__name__}")
        if other.field.q != self.field.q:
            raise FieldMismatch(f"{self.field} vs {other.field}")

    def __add__(self, other: Matrix) -> Matrix:
        self._check(other)
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} + {other.shape}")
        return Matrix._wrap((self._a + other._a) % self.field.q, self.field)

    def __sub__(self, other: Matrix) -> Matrix:
        self._check(other)
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} - {other.shape}")
        return Matrix._wrap((self._a - other._a) % self.field.q, self.field)

    def __matmul__(self, other: Matrix) -> Matrix:
        return mat_mul(self, other)

    def kron(self, other: Matrix) -> Matrix:
        self._check(other)
        return Matrix._wrap(_mod_kron(self._a, other._a, self.field.q), self.field)

    def nonzero_pattern(self) -> np.ndarray:
        return self._a != 0

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return (self.field.q == other.field.q and self.shape == other.shape
                and bool(np.array_equal(self._a, other._a)))

    __hash__ = None

    def __repr__(self):
        return f"Matrix({self.tolist()}, {self.field})"


def _mod_kron(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    # Entries are < 2**31, so pairwise products fit in int64.
    return np.kron(a, b) % q


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    a._check(b)
    if a.cols != b.rows:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return Matrix._wrap(_mod_matmul(a._a, b._a, a.field.q), a.field)


def vec_mat(v: np.ndarray, m: Matrix) -> np.ndarray:
    """Row vector (or stack of row vectors) times matrix, mod q."""
    v = np.atleast_2d(np.asarray(v, dtype=np.int64) % m.field.q)
    if v.shape[1] != m.rows:
        raise DimensionMismatch(f"vector length {v.shape[1]} vs matrix {m.shape}")
    return _mod_matmul(v, m._a, m.field.q)


def row_reduce(arr: np.ndarray, q: int, ncols: int | None = None) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(q).

    Pivots are searched only in the first ``ncols`` columns (all columns by
    default), which lets callers reduce an augmented matrix ``[A | B]``.
    Returns the reduced copy and the list of pivot columns.
    """
    work = np.array(arr, dtype=np.int64) % q
    rows, cols = work.shape
    ncols = cols if ncols is None else ncols
    pivots = []
    r = 0
    for c in range(ncols):
        if r == rows:
            break
        nz = np.nonzero(work[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            work[[r, p]] = work[[p, r]]
        inv = pow(int(work[r, c]), q - 2, q)
        work[r] = (work[r] * inv) % q
        factors = work[:, c].copy()
        factors[r] = 0
        hit = np.nonzero(factors)[0]
        if hit.size:
            work[hit] = (work[hit] - np.outer(factors[hit], work[r]) % q) % q
        pivots.append(c)
        r += 1
    return work, pivots


def rank(a: Matrix) -> int:
    if a.rows == 0 or a.cols == 0:
        return 0
    return len(row_reduce(a._a, a.field.q)[1])


def mat_inv(a: Matrix) -> Matrix:
    if a.rows != a.cols:
        raise DimensionMismatch(f"only square matrices are invertible, got {a.shape}")
    n = a.rows
    aug = np.hstack([a._a, np.eye(n, dtype=np.int64)])
    red, pivots = row_reduce(aug, a.field.q, ncols=n)
    if len(pivots) < n:
        raise SingularMatrix(f"{n}x{n} matrix has rank {len(pivots)} over {a.field}")
    return Matrix._wrap(red[:, n:], a.field)


def solve_left(a: Matrix, b: np.ndarray) -> np.ndarray:
    """Solve ``x @ a = b`` for square nonsingular ``a``; ``b`` may hold several rows."""
    return vec_mat(b, mat_inv(a))


def matrix_from_rows(rows: Iterable[Iterable[int]], field: PrimeField) -> Matrix:
    return Matrix([list(r) for r in rows], field)
