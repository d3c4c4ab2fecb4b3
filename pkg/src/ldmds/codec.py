"""Encoding into the array and recovery of erased nodes.

Two independent routes are offered for both directions:

* the block route multiplies the node-major data vector by ``A`` and, for
  recovery, solves ``d_f A_f = f_s - d_s A_s`` for the failed nodes' data;
* the rowwise route treats each array row as a codeword of the systematic
  ``[n, k]`` code with generator ``[I_k | a_tilde]``.

Vectors are ordered node-major: ``d[0][0], ..., d[m-1][0], d[0][1], ...``
and parities likewise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .construct import ArrayLayout, CodeParams, GeneratorA
from .errors import DimensionMismatch, SingularMatrix, TooManyErasures, Unrecoverable
from .field import Matrix, mat_inv, vec_mat

ERASED = -1


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.int64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DataBlock:
    """``m x n`` grid of data symbols; ``d[i, j]`` is symbol ``i`` of node ``j``."""

    params: CodeParams
    d: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.d, dtype=object)
        if arr.shape != (self.params.m, self.params.n):
            raise DimensionMismatch(f"data must be {self.params.m}x{self.params.n}, got {arr.shape}")
        object.__setattr__(self, "d", _frozen(arr % self.params.q))

    def vector(self) -> np.ndarray:
        return self.d.T.reshape(-1)

    @classmethod
    def from_vector(cls, params: CodeParams, vec: np.ndarray) -> DataBlock:
        return cls(params, np.asarray(vec).reshape(params.n, params.m).T)

    @classmethod
    def random(cls, params: CodeParams, rng: np.random.Generator) -> DataBlock:
        return cls(params, rng.integers(0, params.q, size=(params.m, params.n)))

    def __eq__(self, other):
        if not isinstance(other, DataBlock):
            return NotImplemented
        return self.params == other.params and np.array_equal(self.d, other.d)

    def __add__(self, other: DataBlock) -> DataBlock:
        return DataBlock(self.params, self.d + other.d)

    def to_dict(self) -> dict:
        return {"params": self.params.as_dict(), "data": self.d.tolist()}

    @classmethod
    def from_dict(cls, doc, params: CodeParams) -> DataBlock:
        """Accepts ``{"data": [[...]]}`` or a bare ``m x n`` grid."""
        grid = doc["data"] if isinstance(doc, Mapping) else doc
        return cls(params, np.array(grid, dtype=object))


@dataclass(frozen=True)
class ErasurePattern:
    n: int
    failed: frozenset[int]

    def __post_init__(self):
        failed = frozenset(int(j) for j in self.failed)
        bad = [j for j in failed if not 0 <= j < self.n]
        if bad:
            raise ValueError(f"failed nodes {sorted(bad)} outside 0..{self.n - 1}")
        object.__setattr__(self, "failed", failed)

    @classmethod
    def of(cls, n: int, failed: Iterable[int] = ()) -> ErasurePattern:
        return cls(n, frozenset(failed))

    @property
    def surviving(self) -> tuple[int, ...]:
        return tuple(j for j in range(self.n) if j not in self.failed)


@dataclass(frozen=True, eq=False)
class CodewordArray:
    """The ``(m+p) x n`` stored array; column ``j`` is what node ``j`` holds.

    Columns listed in ``erased`` carry no information (filled with -1).
    """

    params: CodeParams
    cells: np.ndarray
    erased: frozenset[int] = frozenset()

    def __post_init__(self):
        arr = np.array(self.cells, dtype=np.int64)
        if arr.shape != (self.params.rows, self.params.n):
            raise DimensionMismatch(f"cells must be {self.params.rows}x{self.params.n}, got {arr.shape}")
        erased = frozenset(int(j) for j in self.erased)
        if erased:
            arr[:, sorted(erased)] = ERASED
        object.__setattr__(self, "cells", _frozen(arr))
        object.__setattr__(self, "erased", erased)

    def column(self, j: int) -> np.ndarray:
        return self.cells[:, j]

    def erase(self, failed: Iterable[int]) -> CodewordArray:
        return CodewordArray(self.params, self.cells, self.erased | frozenset(failed))

    def __eq__(self, other):
        if not isinstance(other, CodewordArray):
            return NotImplemented
        return (self.params == other.params and self.erased == other.erased
                and np.array_equal(self.cells, other.cells))

    def __add__(self, other: CodewordArray) -> CodewordArray:
        return CodewordArray(self.params, (self.cells + other.cells) % self.params.q,
                             self.erased | other.erased)

    def to_dict(self) -> dict:
        cells = [[None if j in self.erased else int(v) for j, v in enumerate(row)] for row in self.cells]
        return {"params": self.params.as_dict(), "cells": cells}

    @classmethod
    def from_dict(cls, doc: Mapping) -> CodewordArray:
        params = CodeParams.from_dict(doc["params"])
        rows = doc["cells"]
        erased = {j for row in rows for j, v in enumerate(row) if v is None}
        cells = [[ERASED if v is None else int(v) for v in row] for row in rows]
        return cls(params, cells, frozenset(erased))


def _check_data(gen: GeneratorA, layout: ArrayLayout, data: DataBlock):
    if data.params.n != gen.params.n or data.params.m != gen.params.m or layout.params != gen.params:
        raise DimensionMismatch(f"data {data.params} does not fit code {gen.params}")


def _place(layout: ArrayLayout, data: np.ndarray, parity: np.ndarray) -> np.ndarray:
    """Scatter ``m x n`` data and ``p x n`` parity grids into the array."""
    pr = layout.params
    cells = np.full((pr.rows, pr.n), ERASED, dtype=np.int64)
    cols = np.arange(pr.n)
    cells[layout.data_row, cols[None, :]] = data
    cells[layout.parity_row, cols[None, :]] = parity
    return cells


def gather_data(layout: ArrayLayout, cells: np.ndarray) -> np.ndarray:
    """``m x n`` data grid read out of the array cells."""
    return cells[layout.data_row, np.arange(layout.params.n)[None, :]]


def gather_parity(layout: ArrayLayout, cells: np.ndarray) -> np.ndarray:
    return cells[layout.parity_row, np.arange(layout.params.n)[None, :]]


def encode(gen: GeneratorA, layout: ArrayLayout, data: DataBlock) -> CodewordArray:
    """Block route: ``f = d A`` then place every symbol per the layout."""
    _check_data(gen, layout, data)
    pr = gen.params
    f = vec_mat(data.vector(), gen.a_full)[0]
    parity = f.reshape(pr.n, pr.p).T
    return CodewordArray(pr, _place(layout, data.d, parity))


def encode_rowwise(a_tilde: Matrix, layout: ArrayLayout, data: DataBlock) -> CodewordArray:
    """Rowwise route: each array row's parities are its data (by node) times ``a_tilde``."""
    pr = layout.params
    if a_tilde.shape != (pr.k, pr.r):
        raise DimensionMismatch(f"a_tilde must be {pr.k}x{pr.r}, got {a_tilde.shape}")
    parity = np.zeros((pr.p, pr.n), dtype=np.int64)
    for row in range(pr.rows):
        dsyms, psyms = layout.row_members(row)
        vals = np.array([data.d[i, j] for i, j in dsyms], dtype=np.int64)
        out = vec_mat(vals, a_tilde)[0]
        for (i, j), v in zip(psyms, out):
            parity[i, j] = v
    return CodewordArray(pr, _place(layout, data.d, parity))


def _padded_failures(pattern: ErasurePattern, r: int) -> tuple[list[int], list[int]]:
    if len(pattern.failed) > r:
        raise TooManyErasures(f"{len(pattern.failed)} failed nodes, code corrects at most {r}")
    failed = sorted(pattern.failed)
    surviving = list(pattern.surviving)
    # Fewer than r failures: treat extra survivors as erased to keep the system square.
    extra = surviving[: r - len(failed)]
    failed = sorted(failed + extra)
    surviving = [j for j in surviving if j not in extra]
    return failed, surviving


def _check_partial(partial: CodewordArray, pattern: ErasurePattern, params: CodeParams):
    if partial.params.n != params.n or partial.params.rows != params.rows:
        raise DimensionMismatch(f"codeword {partial.params} does not fit code {params}")
    if pattern.n != params.n:
        raise DimensionMismatch(f"pattern over {pattern.n} nodes, code has {params.n}")
    missing = partial.erased - pattern.failed
    if missing:
        raise ValueError(f"columns {sorted(missing)} are erased but not listed as failed")


class BlockDecoder:
    """Recovery for one failure pattern through ``d_f = (f_s - d_s A_s) A_f^{-1}``.

    The inverse is computed once so many codewords can share it.
    """

    def __init__(self, gen: GeneratorA, layout: ArrayLayout, pattern: ErasurePattern):
        pr = gen.params
        self.gen, self.layout, self.pattern = gen, layout, pattern
        self.failed, self.surviving = _padded_failures(pattern, pr.r)
        m, p = pr.m, pr.p
        self.rows_f = [j * m + i for j in self.failed for i in range(m)]
        self.rows_s = [j * m + i for j in self.surviving for i in range(m)]
        self.cols_s = [j * p + i for j in self.surviving for i in range(p)]
        a = gen.a_full
        self.a_s = a.submatrix(self.rows_s, self.cols_s)
        try:
            self.a_f_inv = mat_inv(a.submatrix(self.rows_f, self.cols_s))
        except SingularMatrix as exc:
            raise Unrecoverable(f"erasure submatrix for failed nodes {self.failed} is singular") from exc

    def recover_many(self, partials: Sequence[CodewordArray]) -> list[DataBlock]:
        pr = self.gen.params
        for c in partials:
            _check_partial(c, self.pattern, pr)
        if not partials:
            return []
        datas = np.stack([gather_data(self.layout, c.cells) for c in partials])    # B x m x n
        parities = np.stack([gather_parity(self.layout, c.cells) for c in partials])
        d_s = datas[:, :, self.surviving].transpose(0, 2, 1).reshape(len(partials), -1)
        f_s = parities[:, :, self.surviving].transpose(0, 2, 1).reshape(len(partials), -1)
        rhs = (f_s - vec_mat(d_s, self.a_s)) % pr.q
        d_f = vec_mat(rhs, self.a_f_inv).reshape(len(partials), len(self.failed), pr.m)
        out = datas.copy()
        out[:, :, self.failed] = d_f.transpose(0, 2, 1)
        return [DataBlock(pr, d) for d in out]

    def recover(self, partial: CodewordArray) -> DataBlock:
        return self.recover_many([partial])[0]


def decode(gen: GeneratorA, layout: ArrayLayout, partial: CodewordArray,
           pattern: ErasurePattern) -> DataBlock:
    """Recover all ``nm`` data symbols from the surviving columns."""
    if not pattern.failed:
        _check_partial(partial, pattern, gen.params)
        return DataBlock(gen.params, gather_data(layout, partial.cells))
    return BlockDecoder(gen, layout, pattern).recover(partial)


class RowwiseDecoder:
    """Recovery that solves ``m + p`` independent ``[n, k]`` systems, one per array row."""

    def __init__(self, a_tilde: Matrix, layout: ArrayLayout, pattern: ErasurePattern):
        pr = layout.params
        if len(pattern.failed) > pr.r:
            raise TooManyErasures(f"{len(pattern.failed)} failed nodes, code corrects at most {pr.r}")
        self.layout, self.pattern = layout, pattern
        field = a_tilde.field
        gen_row = np.hstack([np.eye(pr.k, dtype=np.int64), a_tilde.array])    # [I_k | a_tilde]
        self._rows = []
        for row in range(pr.rows):
            dsyms, psyms = layout.row_members(row)
            members = dsyms + psyms
            keep = [pos for pos, (_, j) in enumerate(members) if j not in pattern.failed][: pr.k]
            try:
                inv = mat_inv(Matrix._wrap(gen_row[:, keep], field))
            except SingularMatrix as exc:
                raise Unrecoverable(f"row {row} cannot be solved for failed nodes "
                                    f"{sorted(pattern.failed)}") from exc
            cells = [layout.cell_of_data[s] if pos < pr.k else layout.cell_of_parity[s]
                     for pos, s in enumerate(members)]
            self._rows.append((dsyms, [cells[pos] for pos in keep], inv))

    def recover(self, partial: CodewordArray) -> DataBlock:
        pr = self.layout.params
        _check_partial(partial, self.pattern, pr)
        d = np.zeros((pr.m, pr.n), dtype=np.int64)
        for dsyms, keep_cells, inv in self._rows:
            known = np.array([partial.cells[rc] for rc in keep_cells], dtype=np.int64)
            vals = vec_mat(known, inv)[0]
            for (i, j), v in zip(dsyms, vals):
                d[i, j] = v
        return DataBlock(pr, d)


def decode_rowwise(a_tilde: Matrix, layout: ArrayLayout, partial: CodewordArray,
                   pattern: ErasurePattern) -> DataBlock:
    return RowwiseDecoder(a_tilde, layout, pattern).recover(partial)
