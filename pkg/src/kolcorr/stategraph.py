"""The seed-state graphs G(m, n, k) and walks on them.

Vertices are seed words of length ``k`` in their integer encoding.  Each
vertex ``t`` has two out-edges, labelled ``m`` and ``n``, going to
``carry((x,), t)``.

Successors are not computed by expanding ``(x,)`` k times (that word has
length about ((m+n)/2)^k).  Writing ``t = t_1 t'``::

    carry((x,), t_1 t') = complement(t_1) . carry(t_1^x, t')

and ``carry(t_1^x, t')`` is the level-(k-1) successor with label ``t_1``
applied ``x`` times, so the tables are built level by level.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import InvalidParams, ResourceLimit, ValidationError
from .seqcore import Params, Word, decode_seed, encode_seed, kolakoski_bits

MAX_K = 28


def _perm_power(perm: np.ndarray, e: int) -> np.ndarray:
    result = np.arange(perm.size, dtype=perm.dtype)
    base = perm
    while e:
        if e & 1:
            result = base[result]
        e >>= 1
        if e:
            base = base[base]
    return result


def successor_tables(params: Params, k: int) -> np.ndarray:
    """Array ``S`` of shape (2, 2**k); ``S[b, t]`` is the successor of ``t`` under label bit ``b``."""
    if k < 0:
        raise InvalidParams("k must be non-negative")
    if k > MAX_K:
        raise ResourceLimit(f"k={k} exceeds the supported maximum {MAX_K}")
    tables = np.zeros((2, 1), dtype=np.int64)
    for level in range(1, k + 1):
        codes = np.arange(1 << level, dtype=np.int64)
        low = codes & 1
        rest = codes >> 1
        head = low ^ 1
        rows = []
        for b in (0, 1):
            x = params.letter(b)
            p0 = _perm_power(tables[0], x)
            p1 = _perm_power(tables[1], x)
            rows.append(head | (np.where(low == 1, p1[rest], p0[rest]) << 1))
        tables = np.vstack(rows)
    return tables


@dataclass(frozen=True)
class StateGraph:
    params: Params
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise InvalidParams("k must be at least 1")
        self.params.require_odd()

    @property
    def vertex_count(self) -> int:
        return 1 << self.k

    @cached_property
    def tables(self) -> np.ndarray:
        return successor_tables(self.params, self.k)

    def successor(self, x: int, t: Sequence[int]) -> Word:
        code = encode_seed(self.params, self._seed(t))
        return decode_seed(self.params, int(self.tables[self.params.bit(x), code]), self.k)

    def _seed(self, t: Sequence[int]) -> Word:
        t = tuple(t)
        if len(t) != self.k:
            raise InvalidParams(f"seed word has length {len(t)}, expected {self.k}")
        return t


def successor(params: Params, k: int, x: int, t: Sequence[int]) -> Word:
    return StateGraph(params, k).successor(x, t)


def scc_labels(tables: np.ndarray) -> tuple[int, np.ndarray]:
    """Iterative Tarjan over the graph whose out-edges are the rows of ``tables``.

    Returns ``(count, label)`` with ``label[v]`` the component index of ``v``.
    """
    succ = [row.tolist() for row in tables]
    degree = len(succ)
    size = len(succ[0])
    index = [-1] * size
    low = [0] * size
    on_stack = [False] * size
    label = [-1] * size
    stack: list[int] = []
    counter = 0
    count = 0
    for root in range(size):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, e = work[-1]
            if e < degree:
                work[-1] = (v, e + 1)
                w = succ[e][v]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                if low[v] < low[parent]:
                    low[parent] = low[v]
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    label[w] = count
                    if w == v:
                        break
                count += 1
    return count, np.asarray(label, dtype=np.int64)


@dataclass(frozen=True)
class ConnectivityReport:
    vertices: int
    scc_count: int

    @property
    def is_strongly_connected(self) -> bool:
        return self.scc_count == 1


def check_connectivity(g: StateGraph) -> ConnectivityReport:
    count, _ = scc_labels(g.tables)
    return ConnectivityReport(vertices=g.vertex_count, scc_count=count)


@dataclass(frozen=True)
class DegreeReport:
    vertices: int
    out_degree_ok: bool
    in_degree_ok: bool
    bijective: tuple[bool, bool]
    orbit_lengths: tuple[tuple[int, ...], tuple[int, ...]]

    @property
    def ok(self) -> bool:
        return self.out_degree_ok and self.in_degree_ok and all(self.bijective)

    @property
    def orbits_powers_of_two(self) -> bool:
        return all(x & (x - 1) == 0 for lens in self.orbit_lengths for x in lens)


def _cycle_lengths(perm: np.ndarray) -> tuple[int, ...]:
    seen = np.zeros(perm.size, dtype=bool)
    lengths = set()
    p = perm.tolist()
    for start in range(perm.size):
        if seen[start]:
            continue
        v, n = start, 0
        while not seen[v]:
            seen[v] = True
            v = p[v]
            n += 1
        lengths.add(n)
    return tuple(sorted(lengths))


def degree_report(g: StateGraph) -> DegreeReport:
    tables = g.tables
    size = g.vertex_count
    indeg = np.bincount(tables.ravel(), minlength=size)
    bij = tuple(bool(np.unique(tables[b]).size == size) for b in (0, 1))
    orbits = tuple(_cycle_lengths(tables[b]) if bij[b] else () for b in (0, 1))
    return DegreeReport(
        vertices=size,
        out_degree_ok=tables.shape == (2, size),
        in_degree_ok=bool(np.all(indeg == 2)),
        bijective=bij,
        orbit_lengths=orbits,
    )


@dataclass(frozen=True)
class EulerCycle:
    params: Params
    k: int
    labels: Word
    start: Word
    rng_seed: int | None = None

    def state_codes(self) -> np.ndarray:
        """Integer codes of ``t^(1), ..., t^(len+1)`` along the walk."""
        tables = successor_tables(self.params, self.k)
        codes = np.empty(len(self.labels) + 1, dtype=np.int64)
        t = encode_seed(self.params, self.start)
        codes[0] = t
        for i, x in enumerate(self.labels):
            t = int(tables[self.params.bit(x), t])
            codes[i + 1] = t
        return codes

    def states(self) -> list[Word]:
        return [decode_seed(self.params, int(c), self.k) for c in self.state_codes()[:-1]]

    def validate(self) -> None:
        k, size = self.k, 1 << self.k
        if len(self.labels) != 2 * size:
            raise ValidationError(f"cycle has {len(self.labels)} edges, expected {2 * size}")
        codes = self.state_codes()
        if codes[-1] != codes[0]:
            raise ValidationError("walk is not closed")
        bits = self.params.to_bits(self.labels).astype(np.int64)
        used = np.bincount(codes[:-1] * 2 + bits, minlength=2 * size)
        if not np.all(used == 1):
            raise ValidationError("some (letter, state) edge is not used exactly once")
        if len(self.start) != k:
            raise ValidationError("start vertex has the wrong length")


def euler_cycle(g: StateGraph, rng_seed: int = 0, start: Sequence[int] | None = None) -> EulerCycle:
    """Hierholzer's algorithm; out-edge order at each vertex is shuffled by ``rng_seed``."""
    params, k = g.params, g.k
    start = tuple(start) if start is not None else (params.m,) * k
    start_code = encode_seed(params, g._seed(start))
    tables = g.tables
    size = g.vertex_count
    rng = np.random.default_rng(rng_seed)
    flips = rng.integers(0, 2, size=size).tolist()
    order = [(f, f ^ 1) for f in flips]
    nxt = [0] * size
    row0, row1 = tables[0].tolist(), tables[1].tolist()
    rows = (row0, row1)
    stack: list[tuple[int, int]] = [(start_code, -1)]
    out_labels: list[int] = []
    while stack:
        v, via = stack[-1]
        i = nxt[v]
        if i < 2:
            nxt[v] = i + 1
            b = order[v][i]
            stack.append((rows[b][v], b))
        else:
            stack.pop()
            if via >= 0:
                out_labels.append(via)
    out_labels.reverse()
    labels = tuple(params.letter(b) for b in out_labels)
    cycle = EulerCycle(params=params, k=k, labels=labels, start=start, rng_seed=rng_seed)
    if len(labels) != 2 * size:
        raise ValidationError("graph is not strongly connected; no Eulerian cycle")
    return cycle


def guc_histogram(params: Params, k: int, length: int) -> dict[tuple[int, Word], "Fraction"]:
    """Empirical frequency of each (letter, state) pair along a prefix of K(m, n)."""
    from fractions import Fraction

    params.require_odd()
    if length < 1:
        raise InvalidParams("length must be positive")
    counts = guc_counts(params, k, length)
    return {
        (params.letter(b), decode_seed(params, t, k)): Fraction(int(counts[b, t]), length)
        for b in (0, 1)
        for t in range(1 << k)
    }


def guc_counts(params: Params, k: int, length: int) -> np.ndarray:
    """Counts ``C[b, t]`` of indices i with letter bit b and state t^(i) = t."""
    bits = kolakoski_bits(params, length)
    counts = np.zeros((2, 1 << k), dtype=np.int64)
    if k == 0:
        ones = int(np.count_nonzero(bits))
        counts[0, 0], counts[1, 0] = length - ones, ones
        return counts
    tables = successor_tables(params, k)
    size = 1 << k
    # Each pair (bit, state) -> next state; walk it in chunks of raw python for speed.
    step = [tables[0].tolist(), tables[1].tolist()]
    flat = np.zeros(2 * size, dtype=np.int64)
    t = 0  # m^k encodes to 0
    for start in range(0, length, 1 << 20):
        chunk = bits[start:start + (1 << 20)].tolist()
        keys = []
        append = keys.append
        s0, s1 = step
        for b in chunk:
            append(2 * t + b)
            t = s1[t] if b else s0[t]
        flat += np.bincount(np.asarray(keys, dtype=np.int64), minlength=2 * size)
    counts[0] = flat[0::2]
    counts[1] = flat[1::2]
    return counts


def path_witness(g: StateGraph, t: Sequence[int], u: Sequence[int]) -> Word:
    """Shortest label word ``p`` with ``carry(p, t) == u`` (breadth-first search)."""
    params = g.params
    src = encode_seed(params, g._seed(t))
    dst = encode_seed(params, g._seed(u))
    if src == dst:
        return ()
    tables = g.tables
    prev = {src: None}
    queue = deque([src])
    while queue:
        v = queue.popleft()
        for b in (0, 1):
            w = int(tables[b, v])
            if w in prev:
                continue
            prev[w] = (v, b)
            if w == dst:
                path = []
                while prev[w] is not None:
                    w, b2 = prev[w]
                    path.append(params.letter(b2))
                return tuple(reversed(path))
            queue.append(w)
    raise ValidationError("no path between the given vertices")
