"""Round-based smart-meter network simulator.

Each round every node takes ``m`` fresh readings, pushes each reading to the
neighbours whose parities depend on it, and recomputes its ``p`` parities.
A random subset of nodes is then unreachable for the collection epoch and the
concentrator rebuilds every reading from the rest. Failures do not persist
across epochs. All randomness comes from one seeded generator.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, replace
from functools import cached_property
from typing import Callable, Iterable, Iterator

import numpy as np

from .codec import CodewordArray, DataBlock, ErasurePattern, decode, encode
from .construct import ArrayLayout, CodeParams, build_layout
from .errors import DecodeError, TopologyViolation
from .graph import Graph, GraphCodePlan

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class NetworkConfig:
    params: CodeParams
    topology: Graph
    plan: GraphCodePlan
    rng_seed: int = 0
    rounds: int = 1
    fail_prob: float = 0.0
    max_failures: int | None = None

    def __post_init__(self):
        if self.plan.code.params != self.params:
            raise ValueError("plan code parameters differ from config parameters")
        if not self.plan.fits(self.topology):
            raise TopologyViolation("plan's support graph is not a subgraph of the topology")
        if not 0.0 <= self.fail_prob <= 1.0:
            raise ValueError(f"fail_prob must lie in [0, 1], got {self.fail_prob}")

    @cached_property
    def layout(self) -> ArrayLayout:
        return build_layout(self.params)


@dataclass(frozen=True)
class NetworkState:
    """Snapshot after a round. ``node_store[j]`` is array column ``j`` (code index)."""

    round: int
    node_store: tuple[tuple[int, ...], ...]
    failed: frozenset[int] = frozenset()
    symbols_exchanged: int = 0

    @classmethod
    def empty(cls, params: CodeParams) -> NetworkState:
        return cls(0, tuple((0,) * params.rows for _ in range(params.n)))

    def cells(self) -> np.ndarray:
        return np.array(self.node_store, dtype=np.int64).T


@dataclass
class SimReport:
    rounds_run: int = 0
    failures_injected: int = 0
    recoveries_attempted: int = 0
    recoveries_ok: int = 0
    symbols_exchanged: int = 0
    rounds_over_capacity: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def run_round(state: NetworkState, config: NetworkConfig, readings: DataBlock) -> NetworkState:
    """Exchange this round's readings over the topology and store the new array columns."""
    gen, plan, topo = config.plan.code, config.plan, config.topology
    pr = gen.params
    if readings.params.m != pr.m or readings.params.n != pr.n:
        raise ValueError("readings do not match the code dimensions")
    a = gen.a_full.array
    q = pr.q
    # inbox[dest] collects (data row index of A, value) messages.
    inbox: list[list[tuple[int, int]]] = [[] for _ in range(pr.n)]
    sent = 0
    for j in range(pr.n):
        for i in range(pr.m):
            row = j * pr.m + i
            dests = sorted({int(t) // pr.p for t in np.nonzero(a[row])[0]})
            for dest in dests:
                if dest == j:
                    continue
                src_node, dst_node = plan.relabeling[j], plan.relabeling[dest]
                if not topo.has_edge(src_node, dst_node):
                    raise TopologyViolation(f"node {src_node} would send to unlinked node {dst_node}")
                inbox[dest].append((row, int(readings.d[i, j])))
                sent += 1
    layout = config.layout
    store = []
    for j in range(pr.n):
        col = [0] * pr.rows
        for i in range(pr.m):
            col[int(layout.data_row[i, j])] = int(readings.d[i, j])
        for t_local in range(pr.p):
            t = j * pr.p + t_local
            acc = 0
            for row, val in inbox[j]:
                acc = (acc + val * int(a[row, t])) % q
            # Diagonal blocks are zero for constructed codes; kept for raw generators.
            own = a[j * pr.m:(j + 1) * pr.m, t]
            acc = (acc + int(np.dot(readings.d[:, j], own) % q)) % q
            col[int(layout.parity_row[t_local, j])] = acc
        store.append(tuple(col))
    return NetworkState(state.round + 1, tuple(store), frozenset(), state.symbols_exchanged + sent)


def inject_failures(state: NetworkState, failed: Iterable[int]) -> NetworkState:
    return replace(state, failed=state.failed | frozenset(int(j) for j in failed))


def concentrator_collect(state: NetworkState, config: NetworkConfig) -> DataBlock:
    """Rebuild all readings from the reachable nodes; raises DecodeError subclasses."""
    pr = config.params
    partial = CodewordArray(pr, state.cells(), state.failed)
    return decode(config.plan.code, config.layout, partial, ErasurePattern.of(pr.n, state.failed))


def _draw_failures(rng: np.random.Generator, n: int, prob: float, cap: int | None) -> list[int]:
    hit = np.nonzero(rng.random(n) < prob)[0]
    if cap is not None and len(hit) > cap:
        hit = np.sort(rng.choice(hit, size=cap, replace=False))
    return [int(j) for j in hit]


def random_readings(params: CodeParams, rng: np.random.Generator) -> Iterator[DataBlock]:
    while True:
        yield DataBlock.random(params, rng)


def readings_from_values(params: CodeParams, values: Iterable[int]) -> Iterator[DataBlock]:
    """Cycle through externally supplied readings, reduced mod q (lossy for values >= q)."""
    vals = [int(v) % params.q for v in values]
    if not vals:
        raise ValueError("no readings supplied")
    need = params.m * params.n
    pos = 0
    while True:
        chunk = [vals[(pos + t) % len(vals)] for t in range(need)]
        pos = (pos + need) % len(vals)
        yield DataBlock(params, np.array(chunk).reshape(params.m, params.n))


def simulate(config: NetworkConfig, readings: Iterator[DataBlock] | None = None,
             on_round: Callable[[NetworkState, DataBlock], None] | None = None) -> SimReport:
    rng = np.random.default_rng(config.rng_seed)
    pr = config.params
    source = readings if readings is not None else random_readings(pr, rng)
    state = NetworkState.empty(pr)
    report = SimReport()
    for _ in range(config.rounds):
        data = next(source)
        state = run_round(state, config, data)
        failed = _draw_failures(rng, pr.n, config.fail_prob, config.max_failures)
        state = inject_failures(state, failed)
        report.rounds_run += 1
        report.failures_injected += len(failed)
        if len(failed) > pr.r:
            report.rounds_over_capacity += 1
        report.recoveries_attempted += 1
        try:
            got = concentrator_collect(state, config)
        except DecodeError as exc:
            log.info("round %d: collection failed (%s)", state.round, exc)
        else:
            if got == data:
                report.recoveries_ok += 1
            else:
                log.warning("round %d: recovered data differs from readings", state.round)
        if on_round is not None:
            on_round(state, data)
    report.symbols_exchanged = state.symbols_exchanged
    return report


def reference_array(config: NetworkConfig, readings: DataBlock) -> np.ndarray:
    """Array the encoder would produce for the same readings (used as a cross-check)."""
    return encode(config.plan.code, config.layout, readings).cells
