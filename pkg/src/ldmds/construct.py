"""Code parameters, array layout and the Kronecker-structured generator.

For ``n`` nodes tolerating ``r`` failures every node stores ``m`` data and
``p`` parity symbols with ``p*k == m*r``. The nonsystematic generator part is
``A = a_tilde (x) D`` where ``a_tilde`` is a totally nonsingular ``k x r``
matrix and ``D`` is the ``(m+p) x (m+p)`` antidiagonal permutation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import gcd
from typing import Mapping

import numpy as np

from .errors import DimensionMismatch, FieldTooSmall, InvalidParams
from .field import Matrix, PrimeField, is_prime, next_prime


@dataclass(frozen=True)
class CodeParams:
    n: int
    k: int
    r: int
    m: int
    p: int
    q: int

    def __post_init__(self):
        n, k, r, m, p = self.n, self.k, self.r, self.m, self.p
        if n < 2 or k < 1 or r < 1 or n != k + r:
            raise InvalidParams(f"need n = k + r with n >= 2, k >= 1, r >= 1; got n={n}, k={k}, r={r}")
        if m < 1 or p < 1:
            raise InvalidParams(f"m and p must be positive, got m={m}, p={p}")
        if p * k != m * r:
            raise InvalidParams(f"p*k must equal m*r for an MDS array code; {p}*{k} != {m}*{r}")
        if not is_prime(self.q):
            raise InvalidParams(f"field size {self.q} is not prime")

    @property
    def field(self) -> PrimeField:
        return PrimeField(self.q)

    @property
    def rows(self) -> int:
        """Array height, i.e. symbols stored per node."""
        return self.m + self.p

    def as_dict(self) -> dict:
        return {"n": self.n, "k": self.k, "r": self.r, "m": self.m, "p": self.p, "q": self.q}

    @classmethod
    def from_dict(cls, d: Mapping) -> CodeParams:
        return cls(**{key: int(d[key]) for key in ("n", "k", "r", "m", "p", "q")})


def derive_params(n: int, r: int, q: int | None = None) -> CodeParams:
    """Smallest coprime (m, p) for an ``[n, n-r]`` code.

    ``q`` defaults to the smallest prime ``>= n``, which is what the default
    Cauchy matrix needs.
    """
    if n < 2 or not 1 <= r < n:
        raise InvalidParams(f"need 1 <= r < n and n >= 2, got n={n}, r={r}")
    k = n - r
    g = gcd(k, r)
    return CodeParams(n=n, k=k, r=r, m=k // g, p=r // g, q=next_prime(n) if q is None else q)


@dataclass(frozen=True)
class ArrayLayout:
    """Placement of every data symbol ``d[i][j]`` and parity ``f[i][j]``.

    Both maps send ``(symbol index, node)`` to ``(array row, array column)``;
    the column is always the node.
    """

    params: CodeParams
    cell_of_data: Mapping[tuple[int, int], tuple[int, int]]
    cell_of_parity: Mapping[tuple[int, int], tuple[int, int]]
    data_row: np.ndarray = field(repr=False, compare=False)
    parity_row: np.ndarray = field(repr=False, compare=False)

    def labels(self) -> list[list[str]]:
        """The array as a grid of symbol labels such as ``'d3,1'``."""
        grid = [[""] * self.params.n for _ in range(self.params.rows)]
        for (i, j), (row, col) in self.cell_of_data.items():
            grid[row][col] = f"d{i},{j}"
        for (i, j), (row, col) in self.cell_of_parity.items():
            grid[row][col] = f"f{i},{j}"
        return grid

    def row_members(self, row: int) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
        """Data and parity symbols sitting in ``row``, each sorted by node."""
        data = sorted(((i, j) for (i, j), (rr, _) in self.cell_of_data.items() if rr == row),
                      key=lambda s: s[1])
        parity = sorted(((i, j) for (i, j), (rr, _) in self.cell_of_parity.items() if rr == row),
                        key=lambda s: s[1])
        return data, parity


def build_layout(params: CodeParams) -> ArrayLayout:
    m, p, n, h = params.m, params.p, params.n, params.rows
    data_row = np.array([[(i + j * m) % h for j in range(n)] for i in range(m)], dtype=np.int64)
    parity_row = np.array([[(j * m - i - 1) % h for j in range(n)] for i in range(p)], dtype=np.int64)
    data_row.setflags(write=False)
    parity_row.setflags(write=False)
    cell_of_data = {(i, j): (int(data_row[i, j]), j) for i in range(m) for j in range(n)}
    cell_of_parity = {(i, j): (int(parity_row[i, j]), j) for i in range(p) for j in range(n)}
    return ArrayLayout(params, cell_of_data, cell_of_parity, data_row, parity_row)


def cauchy_totally_nonsingular(k: int, r: int, field: PrimeField) -> Matrix:
    """``k x r`` Cauchy matrix ``1 / (x_i - y_j)`` with ``x_i = i``, ``y_j = k + j``.

    Every square submatrix of a Cauchy matrix is again Cauchy, hence
    nonsingular, as long as all ``x_i`` and ``y_j`` are distinct mod q.
    """
    if field.q < k + r:
        raise FieldTooSmall(f"a {k}x{r} Cauchy matrix needs q >= {k + r}, got q={field.q}")
    return Matrix([[field.inv_int(i - (k + j)) for j in range(r)] for i in range(k)], field)


GF7_A_TILDE = ((1, 1, 1), (1, 3, 6), (1, 4, 2), (1, 6, 4), (1, 2, 5))


def gf7_a_tilde() -> Matrix:
    """The 5x3 totally nonsingular matrix over GF(7) used for the n=8, r=3 code."""
    return Matrix(GF7_A_TILDE, PrimeField(7))


def build_d_matrix(m: int, p: int, field: PrimeField) -> Matrix:
    h = m + p
    if h < 1:
        raise InvalidParams(f"m + p must be positive, got {h}")
    d = np.zeros((h, h), dtype=np.int64)
    d[np.arange(h), h - 1 - np.arange(h)] = 1
    return Matrix._wrap(d, field)


@dataclass(frozen=True)
class GeneratorA:
    """Nonsystematic generator part ``A`` (``nm x np``) plus its factors.

    ``a_tilde`` and ``d_mat`` are ``None`` for codes given only through a raw
    ``a_full`` (comparison fixtures).
    """

    params: CodeParams
    a_tilde: Matrix | None
    d_mat: Matrix | None
    a_full: Matrix

    def block(self, i: int, j: int) -> Matrix:
        """``m x p`` block linking data of node ``i`` to parity of node ``j``."""
        m, p = self.params.m, self.params.p
        return self.a_full.submatrix(range(i * m, (i + 1) * m), range(j * p, (j + 1) * p))

    def block_nonzero(self) -> np.ndarray:
        """Boolean ``n x n`` grid, true where the block is not all-zero."""
        n, m, p = self.params.n, self.params.m, self.params.p
        nz = self.a_full.array.reshape(n, m, n, p) != 0
        return nz.any(axis=(1, 3))

    @classmethod
    def from_matrix(cls, params: CodeParams, a_full: Matrix) -> GeneratorA:
        want = (params.n * params.m, params.n * params.p)
        if a_full.shape != want:
            raise DimensionMismatch(f"A must be {want}, got {a_full.shape}")
        return cls(params, None, None, a_full)


def build_generator(params: CodeParams, a_tilde: Matrix) -> GeneratorA:
    if a_tilde.shape != (params.k, params.r):
        raise DimensionMismatch(f"a_tilde must be {params.k}x{params.r}, got {a_tilde.shape}")
    if a_tilde.field.q != params.q:
        raise DimensionMismatch(f"a_tilde lives in {a_tilde.field}, params ask for GF({params.q})")
    d_mat = build_d_matrix(params.m, params.p, params.field)
    return GeneratorA(params, a_tilde, d_mat, a_tilde.kron(d_mat))


def design_code(n: int, r: int, q: int | None = None, a_tilde: Matrix | None = None) -> GeneratorA:
    """Parameters plus generator in one call, Cauchy ``a_tilde`` unless given."""
    if a_tilde is not None and q is None:
        q = a_tilde.field.q
    params = derive_params(n, r, q)
    if a_tilde is None:
        a_tilde = cauchy_totally_nonsingular(params.k, params.r, params.field)
    return build_generator(params, a_tilde)


def block_support(params: CodeParams, i_blk: int, j_blk: int) -> bool:
    """True iff block ``(i_blk, j_blk)`` of ``a_tilde (x) D`` is nonzero.

    Closed form: the block is all-zero exactly when
    ``(i_blk - j_blk) * p`` is a multiple of ``m + p``.
    """
    if not (0 <= i_blk < params.n and 0 <= j_blk < params.n):
        raise IndexError(f"block ({i_blk}, {j_blk}) outside 0..{params.n - 1}")
    return ((i_blk - j_blk) * params.p) % params.rows != 0


def extend_code(gen: GeneratorA, a: int) -> GeneratorA:
    """Code with ``a*m`` data and ``a*p`` parity symbols per node.

    Built by rerunning the construction with the scaled pair, which equals
    ``G (x) I_a`` up to a reordering of the parity symbols inside each node.
    """
    if a < 1:
        raise InvalidParams(f"extension factor must be >= 1, got {a}")
    if gen.a_tilde is None:
        raise InvalidParams("extension needs a Kronecker-structured generator")
    if a == 1:
        return gen
    pr = gen.params
    params = CodeParams(pr.n, pr.k, pr.r, a * pr.m, a * pr.p, pr.q)
    return build_generator(params, gen.a_tilde)


def dual_code(gen: GeneratorA) -> GeneratorA:
    """Dual ``[n, r]`` code: nonsystematic part ``-A^T``, ``m`` and ``p`` swapped."""
    pr = gen.params
    params = CodeParams(pr.n, pr.r, pr.k, pr.p, pr.m, pr.q)
    a_full = -gen.a_full.T
    if gen.a_tilde is None:
        return GeneratorA.from_matrix(params, a_full)
    # (a_tilde (x) D)^T = a_tilde^T (x) D because D is symmetric.
    return GeneratorA(params, -gen.a_tilde.T, gen.d_mat, a_full)


def extension_factor(params: CodeParams) -> int:
    return gcd(params.m, params.p)


def code_to_dict(gen: GeneratorA) -> dict:
    if gen.a_tilde is None:
        raise InvalidParams("only Kronecker-structured codes have a code spec")
    pr = gen.params
    doc = {"n": pr.n, "r": pr.r, "q": pr.q, "a_tilde": gen.a_tilde.tolist()}
    # Derived values, for readers; checked against the recomputed ones on load.
    doc.update(k=pr.k, m=pr.m, p=pr.p)
    a = extension_factor(pr)
    if a > 1:
        doc["extension"] = a
    return doc


def code_from_dict(doc: Mapping) -> GeneratorA:
    try:
        n, r, q = int(doc["n"]), int(doc["r"]), int(doc["q"])
        rows = doc["a_tilde"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidParams(f"malformed code spec: {exc}") from exc
    field_ = PrimeField(q)
    gen = build_generator(derive_params(n, r, q), Matrix(rows, field_))
    gen = extend_code(gen, int(doc.get("extension", 1)))
    for key in ("k", "m", "p"):
        if key in doc and int(doc[key]) != getattr(gen.params, key):
            raise InvalidParams(f"code spec says {key}={doc[key]} but the parameters give {getattr(gen.params, key)}")
    return gen


def dumps_code(gen: GeneratorA) -> str:
    return json.dumps(code_to_dict(gen))


def loads_code(text: str) -> GeneratorA:
    return code_from_dict(json.loads(text))


def load_code(path) -> GeneratorA:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidParams(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, Mapping):
        raise InvalidParams(f"{path}: code spec must be a JSON object")
    return code_from_dict(doc)
