"""Exact uniform frequencies of finite windows of K(m, n).

Frequencies are exact :class:`fractions.Fraction` values.  The recursion
maps a word ``s`` with at least two runs to a shorter word ``u`` built from
its run lengths, and ``freq(s) = freq(u) / (m + n)``.  Single-run words are
counted cyclically in ``m^m n^m m^n n^n``.

Two ways of summing window frequencies are provided:

* :func:`window_table` materializes every nonzero window of one length
  (by extending nonzero words letter by letter, which is complete because
  frequencies are consistent under extension);
* :class:`WindowSums` never materializes words.  Extending ``w`` by one
  letter changes its reduced word ``u(w)`` by at most appending one letter,
  so the nonzero windows form a trie whose nodes point at their reduced
  word's node.  Each level is processed as a batch of numpy arrays.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import InvalidParams, ResourceLimit, ValidationError
from .seqcore import Params, Word, expand1_bits, kolakoski_bits, rle

MAX_EXHAUSTIVE_LENGTH = 30
MAX_DI_INDEX = 24


def _cyclic_run_count(params: Params, r: int) -> int:
    # occurrences of x^r in the cycle m^m n^m m^n n^n, for either letter x
    return max(0, params.m - r + 1) + max(0, params.n - r + 1)


def reduce_word(params: Params, s: Sequence[int]) -> Word | None:
    """The shorter word whose frequency determines that of ``s``.

    Returns ``None`` when ``s`` provably has frequency zero.  Only defined for
    words with at least two runs.
    """
    t = list(rle(s))
    if len(t) < 2:
        raise ValueError("reduction needs at least two runs")
    lo, hi = params.lo, params.hi
    if t[0] > hi or t[-1] > hi:
        return None
    for x in t[1:-1]:
        if x != params.m and x != params.n:
            return None
    if t[-1] <= lo:
        t.pop()
    else:
        t[-1] = hi
    if t[0] <= lo:
        t.pop(0)
    else:
        t[0] = hi
    return tuple(t)


@lru_cache(maxsize=1 << 20)
def _uniform_freq(params: Params, s: Word) -> Fraction:
    if not s:
        return Fraction(1)
    if len(set(s)) == 1:
        return Fraction(_cyclic_run_count(params, len(s)), 2 * params.total)
    u = reduce_word(params, s)
    if u is None:
        return Fraction(0)
    return _uniform_freq(params, u) / params.total


def uniform_freq(params: Params, s: Sequence[int]) -> Fraction:
    """Asymptotic frequency of ``s`` as a factor of K(m, n), assuming uniformness."""
    params.require_odd()
    s = tuple(s)
    for x in s:
        params.check(x)
    return _uniform_freq(params, s)


@dataclass
class WindowTable:
    params: Params
    length: int
    table: dict[Word, Fraction]
    complete: bool = True

    def total(self) -> Fraction:
        return sum(self.table.values(), Fraction(0))

    def __len__(self):
        return len(self.table)

    def items(self):
        return sorted(self.table.items())


def _extend_nonzero(params: Params, words: Sequence[Word]) -> Iterator[tuple[Word, Fraction]]:
    for w in words:
        for x in (params.m, params.n):
            v = _uniform_freq(params, w + (x,))
            if v:
                yield w + (x,), v


def window_table(params: Params, length: int, *, prefix_length: int | None = None) -> WindowTable:
    """All windows of the given length with nonzero frequency.

    With ``prefix_length`` set, candidates are the distinct windows seen in a
    K(m, n) prefix instead, and the table is flagged incomplete.
    """
    params.require_odd()
    if length < 0:
        raise InvalidParams("length must be non-negative")
    if prefix_length is not None:
        bits = kolakoski_bits(params, prefix_length)
        if bits.size < length:
            raise InvalidParams("prefix shorter than the window")
        seen = {bytes(bits[i:i + length]) for i in range(bits.size - length + 1)}
        table = {}
        for key in sorted(seen):
            w = params.from_bits(np.frombuffer(key, dtype=np.uint8))
            v = _uniform_freq(params, w)
            if v:
                table[w] = v
        return WindowTable(params, length, table, complete=False)
    if length > MAX_EXHAUSTIVE_LENGTH * 4:
        raise ResourceLimit(f"window length {length} too large to materialize")
    level: dict[Word, Fraction] = {(): Fraction(1)}
    for _ in range(length):
        level = dict(_extend_nonzero(params, list(level)))
    return WindowTable(params, length, level, complete=True)


@dataclass(frozen=True)
class Agreement:
    agree: Fraction
    disagree: Fraction


def tf_exact_windows(params: Params, d: int) -> Agreement:
    """Exact agreement / disagreement density at lag ``d`` by summing windows of length d+1."""
    if d < 1:
        raise InvalidParams("lag must be positive")
    return WindowSums(params).series(d)[d]


class WindowSums:
    """Level-by-level trie over all nonzero windows, for window sums at many lags.

    Each node stores the first and last letter, the length of its last run,
    whether it has one run or several, whether the last run is currently
    dropped from or folded into the reduced word, the trie id of the reduced
    word, and the frequency as ``num / (2 (m+n) (m+n)**depth)``.
    """

    EMPTY = -1

    def __init__(self, params: Params):
        params.require_odd()
        self.params = params
        self._lo_bit = params.bit(params.lo)
        self._hi_bit = params.bit(params.hi)

    def _grow(self, need: int) -> None:
        cap = self._child.shape[0]
        if need <= cap:
            return
        new = max(need, 2 * cap)
        child = np.full((new, 2), -1, dtype=np.int64)
        child[:cap] = self._child
        self._child = child
        self._num = np.resize(self._num, new)
        self._depth = np.resize(self._depth, new)

    def series(self, dmax: int) -> dict[int, Agreement]:
        """Agreement densities for every lag ``1 <= d <= dmax``."""
        p = self.params
        lo, hi, total = p.lo, p.hi, p.total
        lo_bit, hi_bit = self._lo_bit, self._hi_bit
        max_len = dmax + 1
        keep = max_len if lo == 1 else min(max_len, 3 + (max_len - 2) // lo)
        self._child = np.full((1024, 2), -1, dtype=np.int64)
        self._num = np.zeros(1024, dtype=np.int64)
        self._depth = np.zeros(1024, dtype=np.int64)
        self._size = 0

        cyc = np.array([_cyclic_run_count(p, r) for r in range(hi + 2)], dtype=np.int64)
        # level 1: the words (m) and (n)
        first = np.array([0, 1], dtype=np.int64)
        last = first.copy()
        run = np.ones(2, dtype=np.int64)
        multi = np.zeros(2, dtype=bool)
        state = np.zeros(2, dtype=np.int64)
        red = np.full(2, self.EMPTY, dtype=np.int64)
        num = np.array([cyc[1], cyc[1]], dtype=np.int64)
        depth = np.zeros(2, dtype=np.int64)
        gid = self._store(num, depth)
        single_ids = gid.copy()  # node of the one-letter word with bit b

        results: dict[int, Agreement] = {}
        empty_num = 2 * total
        for length in range(2, max_len + 1):
            cand = []
            for x in (0, 1):
                same = last == x
                r_same = run + 1
                c_first = first
                c_last = np.full_like(last, x)
                c_run = np.where(same, r_same, 1)
                c_multi = multi | ~same
                c_state = np.zeros_like(state)
                c_red = red.copy()
                c_num = num.copy()
                c_depth = depth.copy()
                valid = np.ones(last.size, dtype=bool)

                # one run growing longer: base case
                m1 = ~multi & same
                valid[m1] = r_same[m1] <= hi
                c_num[m1] = cyc[np.minimum(r_same[m1], hi + 1)]
                c_depth[m1] = 0

                # one run closed by a new letter
                m2 = ~multi & ~same
                dropped = run <= lo
                sel = m2 & dropped
                c_red[sel] = self.EMPTY
                sel = m2 & ~dropped
                c_red[sel] = single_ids[hi_bit]
                valid[m2 & (run > hi)] = False

                # several runs, last run grows
                m3 = multi & same
                valid[m3 & (r_same > hi)] = False
                to_replace = m3 & (r_same > lo) & (r_same <= hi) & (state == 0)
                c_red[to_replace] = self._lookup(red[to_replace], hi_bit, single_ids)
                c_state[m3] = np.where(r_same[m3] > lo, 1, 0)

                # several runs, a new run starts; the old last run becomes interior
                m4 = multi & ~same
                from_drop = m4 & (state == 0)
                valid[from_drop & (run != lo)] = False
                ok_drop = from_drop & (run == lo)
                c_red[ok_drop] = self._lookup(red[ok_drop], lo_bit, single_ids)
                from_rep = m4 & (state == 1)
                valid[from_rep & (run != hi)] = False

                changed = m2 | to_replace | ok_drop
                valid &= ~(changed & (c_red == -2))
                # frequency of multi-run nodes comes from the reduced word
                recompute = changed & valid
                is_empty = c_red == self.EMPTY
                rc_ids = np.where(is_empty, 0, c_red)
                base_num = np.where(is_empty, empty_num, self._num[rc_ids])
                base_depth = np.where(is_empty, 0, self._depth[rc_ids])
                c_num = np.where(recompute, base_num, c_num)
                c_depth = np.where(recompute, base_depth + 1, c_depth)
                cand.append((valid, c_first, c_last, c_run, c_multi, c_state, c_red, c_num, c_depth))

            # interleave so children are ordered by (parent, letter)
            parts = [np.stack([cand[0][i], cand[1][i]], axis=1).reshape(-1) for i in range(9)]
            valid = parts[0].astype(bool)
            first, last, run, multi, state, red, num, depth = (a[valid] for a in parts[1:])
            multi = multi.astype(bool)

            if length <= keep:
                new_gid = self._store(num, depth)
                parent_slot = np.flatnonzero(valid)
                parents = gid[parent_slot // 2]
                self._child[parents, parent_slot % 2] = new_gid
                gid = new_gid
            else:
                gid = np.full(num.size, -1, dtype=np.int64)

            results[length - 1] = self._agreement(first, last, num, depth)
        return results

    def _store(self, num: np.ndarray, depth: np.ndarray) -> np.ndarray:
        start = self._size
        self._grow(start + num.size)
        self._num[start:start + num.size] = num
        self._depth[start:start + num.size] = depth
        self._child[start:start + num.size] = -1
        self._size += num.size
        return np.arange(start, start + num.size, dtype=np.int64)

    def _lookup(self, red: np.ndarray, bit: int, single_ids: np.ndarray) -> np.ndarray:
        """Trie id of ``red + (letter bit,)``; -2 when that word has frequency zero."""
        out = np.empty(red.size, dtype=np.int64)
        empty = red == self.EMPTY
        out[empty] = single_ids[bit]
        ids = red[~empty]
        if ids.size and ids.max() >= self._size:
            raise ResourceLimit("reduced word outside the retained trie levels")
        found = self._child[ids, bit]
        out[~empty] = np.where(found >= 0, found, -2)
        return out

    def _agreement(self, first, last, num, depth) -> Agreement:
        total = self.params.total
        agree = Fraction(0)
        overall = Fraction(0)
        eq = first == last
        for dep in np.unique(depth).tolist():
            sel = depth == dep
            den = 2 * total * total ** dep
            overall += Fraction(int(num[sel].sum()), den)
            agree += Fraction(int(num[sel & eq].sum()), den)
        if overall != 1:
            raise ValidationError(f"window frequencies sum to {overall}, not 1")
        return Agreement(agree=agree, disagree=1 - agree)


def tf_exact_series(params: Params, dmax: int) -> dict[int, Agreement]:
    return WindowSums(params).series(dmax)


def min_expansion_length(params: Params, i: int) -> int:
    """Shortest possible i-fold expansion ``s_(j+1) = expand1(s_j + (m,), t_(j+1))``.

    Brute force over all 2**i seed choices (depth-first, numpy words).
    """
    if i < 1:
        raise InvalidParams("index must be positive")
    if i > MAX_DI_INDEX:
        raise ResourceLimit(f"D_{i} needs 2**{i} expansions; limit is {MAX_DI_INDEX}")
    p = Params(params.lo, params.hi)
    m_bit = p.bit(p.m)
    tail = np.array([m_bit], dtype=np.uint8)
    best = None
    stack = [(np.zeros(0, dtype=np.uint8), 0)]
    while stack:
        word, depth = stack.pop()
        grown = np.concatenate((word, tail))
        for b in (1, 0):
            nxt = expand1_bits(p, grown, b)
            if depth + 1 == i:
                if best is None or nxt.size < best:
                    best = nxt.size
            else:
                stack.append((nxt, depth + 1))
    return best


def horizon(params: Params, k: int) -> int:
    """Largest lag guaranteed exact in the order-k periodic approximant."""
    return min_expansion_length(params, k) - 2


def sample_window(table: WindowTable, rng: np.random.Generator, size: int | None = None):
    """Draw windows with probability equal to their frequency."""
    if not table.complete:
        raise ValidationError("cannot sample from an incomplete window table")
    words = [w for w, _ in table.items()]
    probs = np.array([float(v) for _, v in table.items()])
    probs /= probs.sum()
    idx = rng.choice(len(words), size=size, p=probs)
    if size is None:
        return words[int(idx)]
    return [words[int(i)] for i in idx]
