"""Instance checks: MDS property, lowest density, total nonsingularity.

A code is MDS iff for every set ``F`` of ``r`` failed nodes the square
submatrix ``A_f`` (data rows of ``F`` against parity columns of the
survivors) is nonsingular. Failure sets are swept in colexicographic order so
the first failing pattern reported is deterministic.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterator

import numpy as np

from .construct import CodeParams, GeneratorA
from .errors import BudgetExceeded
from .field import Matrix, row_reduce
from .matching import has_perfect_matching

DEFAULT_BUDGET = 10**6


@dataclass
class VerificationReport:
    is_mds: bool | None
    failing_pattern: tuple[int, ...] | None
    row_weights: list[int]
    col_weights: list[int]
    is_lowest_density: bool
    kappa: Fraction
    patterns_checked: int = 0
    exhaustive: bool = True
    notes: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return bool(self.is_mds) and self.is_lowest_density

    def to_dict(self) -> dict:
        return {
            "is_mds": self.is_mds,
            "failing_pattern": None if self.failing_pattern is None else list(self.failing_pattern),
            "row_weights": self.row_weights,
            "col_weights": self.col_weights,
            "is_lowest_density": self.is_lowest_density,
            "kappa": {"num": self.kappa.numerator, "den": self.kappa.denominator},
            "patterns_checked": self.patterns_checked,
            "exhaustive": self.exhaustive,
            **self.notes,
        }


def check_params(n: int, k: int, m: int, p: int) -> bool:
    """Necessary MDS condition ``p*k == m*r`` with ``r = n - k``."""
    return p * k == m * (n - k)


def normalized_dimension(params: CodeParams) -> Fraction:
    """``kappa = n*m / (m+p)``; equals ``k`` for MDS parameters."""
    return Fraction(params.n * params.m, params.m + params.p)


def colex_combinations(n: int, r: int) -> Iterator[tuple[int, ...]]:
    """All ``r``-subsets of ``range(n)`` in colexicographic order."""
    if r == 0:
        yield ()
        return
    for top in range(r - 1, n):
        for rest in colex_combinations(top, r - 1):
            yield rest + (top,)


def erasure_submatrix(gen: GeneratorA, failed) -> Matrix:
    """``A_f``: rows of the failed nodes' data, columns of the survivors' parity."""
    pr = gen.params
    failed = sorted(failed)
    fs = set(failed)
    rows = [j * pr.m + i for j in failed for i in range(pr.m)]
    cols = [j * pr.p + i for j in range(pr.n) if j not in fs for i in range(pr.p)]
    return gen.a_full.submatrix(rows, cols)


def _weights(gen: GeneratorA) -> tuple[list[int], list[int]]:
    nz = gen.a_full.array != 0
    return [int(x) for x in nz.sum(axis=1)], [int(x) for x in nz.sum(axis=0)]


def _is_full_rank(gen: GeneratorA, failed) -> bool:
    sub = erasure_submatrix(gen, failed)
    return len(row_reduce(sub.array, gen.params.q)[1]) == sub.rows == sub.cols


def _first_failure(gen: GeneratorA, patterns: list[tuple[int, ...]]) -> int:
    for idx, f in enumerate(patterns):
        if not _is_full_rank(gen, f):
            return idx
    return -1


def _base_report(gen: GeneratorA) -> VerificationReport:
    rw, cw = _weights(gen)
    pr = gen.params
    ld = all(w == pr.r for w in rw) and all(w == pr.k for w in cw)
    return VerificationReport(None, None, rw, cw, ld, normalized_dimension(pr))


def check_mds_exhaustive(gen: GeneratorA, budget: int = DEFAULT_BUDGET, workers: int = 1) -> VerificationReport:
    """Test every one of the ``C(n, r)`` erasure submatrices for full rank."""
    pr = gen.params
    total = math.comb(pr.n, pr.r)
    if total > budget:
        raise BudgetExceeded(f"C({pr.n},{pr.r}) = {total} patterns exceed budget {budget}")
    patterns = list(colex_combinations(pr.n, pr.r))
    if workers <= 1 or total < 4 * workers:
        first = _first_failure(gen, patterns)
    else:
        size = math.ceil(total / workers)
        chunks = [patterns[s:s + size] for s in range(0, total, size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            found = list(pool.map(_first_failure, [gen] * len(chunks), chunks))
        hits = [ci * size + idx for ci, idx in enumerate(found) if idx >= 0]
        first = min(hits) if hits else -1
    report = _base_report(gen)
    report.is_mds = first < 0
    report.failing_pattern = None if first < 0 else patterns[first]
    report.patterns_checked = total if first < 0 else first + 1
    return report


def check_mds_sampled(gen: GeneratorA, samples: int, seed: int = 0) -> VerificationReport:
    """Monte-Carlo variant for sweeps too large to enumerate. Not a proof."""
    pr = gen.params
    rng = np.random.default_rng(seed)
    report = _base_report(gen)
    report.exhaustive = False
    report.is_mds = True
    for s in range(samples):
        f = tuple(sorted(int(x) for x in rng.choice(pr.n, size=pr.r, replace=False)))
        if not _is_full_rank(gen, f):
            report.is_mds = False
            report.failing_pattern = f
            report.patterns_checked = s + 1
            break
    else:
        report.patterns_checked = samples
        # One-sided 95% bound on the fraction of bad patterns after zero hits.
        bound = 1.0 - 0.05 ** (1.0 / samples) if samples else 1.0
        report.notes["failing_fraction_upper_95"] = bound
    return report


def check_lowest_density(gen: GeneratorA) -> VerificationReport:
    """Row weight exactly ``r`` and column weight exactly ``k`` everywhere in ``A``."""
    return _base_report(gen)


def verify_code(gen: GeneratorA, budget: int = DEFAULT_BUDGET, sample: int | None = None,
                workers: int = 1, seed: int = 0) -> VerificationReport:
    if sample:
        return check_mds_sampled(gen, sample, seed)
    return check_mds_exhaustive(gen, budget, workers)


def count_square_submatrices(rows: int, cols: int) -> int:
    return sum(math.comb(rows, t) * math.comb(cols, t) for t in range(1, min(rows, cols) + 1))


def totally_nonsingular(m: Matrix, budget: int = DEFAULT_BUDGET) -> bool:
    """Every square submatrix of every order has a nonzero determinant."""
    total = count_square_submatrices(m.rows, m.cols)
    if total > budget:
        raise BudgetExceeded(f"{total} square submatrices exceed budget {budget}")
    arr, q = m.array, m.field.q
    if np.any(arr == 0):
        return False
    for t in range(2, min(m.rows, m.cols) + 1):
        for rows in combinations(range(m.rows), t):
            for cols in combinations(range(m.cols), t):
                sub = arr[np.ix_(rows, cols)]
                if len(row_reduce(sub, q)[1]) < t:
                    return False
    return True


def structurally_singular(support) -> bool:
    """True iff no value assignment on this 0/1 pattern can be nonsingular.

    That happens exactly when the rows-vs-columns bipartite graph of the
    support has no perfect matching.
    """
    pattern = np.asarray(support, dtype=bool)
    if pattern.ndim != 2 or pattern.shape[0] != pattern.shape[1]:
        raise ValueError(f"support pattern must be square, got shape {pattern.shape}")
    return not has_perfect_matching(pattern.tolist())
