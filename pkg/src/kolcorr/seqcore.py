"""Words over a two-letter alphabet, run-length encoding and iterated expansion.

Words are plain tuples of positive ints in the public API.  Long words
(periods, sequence prefixes) use numpy ``uint8`` arrays of *bits* where
``0`` stands for ``m`` and ``1`` for ``n``; the ``*_bits`` helpers operate
on that representation.

A seed word ``t = (t_1, ..., t_k)`` is consumed left to right, ``t_1``
innermost::

    expand(w, t) = expand1(...expand1(expand1(w, t_1), t_2)..., t_k)

and encodes to an integer with bit ``j`` set iff ``t_{j+1} == n``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidLetter, InvalidParams

Word = tuple[int, ...]

MAX_LETTER = 1 << 15
_CHUNK = 1 << 22


@dataclass(frozen=True)
class Params:
    m: int
    n: int

    def __post_init__(self):
        for v in (self.m, self.n):
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise InvalidParams(f"letters must be positive integers, got {v!r}")
            if v > MAX_LETTER:
                raise InvalidParams(f"letter {v} exceeds {MAX_LETTER}")
        if self.m == self.n:
            raise InvalidParams("m and n must be distinct")

    @property
    def total(self) -> int:
        return self.m + self.n

    @property
    def lo(self) -> int:
        return min(self.m, self.n)

    @property
    def hi(self) -> int:
        return max(self.m, self.n)

    @property
    def odd(self) -> bool:
        return self.total % 2 == 1

    def require_odd(self) -> None:
        if not self.odd:
            raise InvalidParams(f"m + n must be odd, got m={self.m}, n={self.n}")

    def check(self, x: int) -> int:
        if x != self.m and x != self.n:
            raise InvalidLetter(f"letter {x!r} is not in {{{self.m}, {self.n}}}")
        return x

    def complement(self, x: int) -> int:
        return self.total - self.check(x)

    def bit(self, x: int) -> int:
        return int(self.check(x) == self.n)

    def letter(self, b: int) -> int:
        return self.n if b else self.m

    def to_bits(self, w: Iterable[int]) -> np.ndarray:
        w = tuple(w)
        for x in w:
            self.check(x)
        return np.fromiter((x == self.n for x in w), dtype=np.uint8, count=len(w))

    def from_bits(self, bits: np.ndarray) -> Word:
        return tuple(np.where(np.asarray(bits, dtype=bool), self.n, self.m).tolist())


def complement(params: Params, x: int) -> int:
    return params.complement(x)


def rle(w: Sequence[int]) -> Word:
    """Lengths of the maximal constant blocks of ``w``, in order."""
    out: list[int] = []
    prev = None
    for x in w:
        if x == prev:
            out[-1] += 1
        else:
            out.append(1)
            prev = x
    return tuple(out)


def _check_runs(w: Sequence[int]) -> None:
    for r in w:
        if r < 1:
            raise InvalidLetter(f"run length must be positive, got {r!r}")


def expand1(params: Params, w: Sequence[int], seed: int) -> Word:
    """Run-length decode ``w`` with the first run valued ``seed``; run values alternate."""
    _check_runs(w)
    v = params.check(seed)
    other = params.complement(v)
    out: list[int] = []
    for r in w:
        out.extend([v] * r)
        v, other = other, v
    return tuple(out)


def carry1(params: Params, w: Sequence[int], seed: int) -> int:
    """Value the next run takes after ``expand1(w, seed)``."""
    params.check(seed)
    return seed if len(w) % 2 == 0 else params.complement(seed)


def expand(params: Params, w: Sequence[int], t: Sequence[int]) -> Word:
    r = tuple(w)
    for seed in t:
        r = expand1(params, r, seed)
    return r


def carry(params: Params, w: Sequence[int], t: Sequence[int]) -> Word:
    """Seed word continuing ``expand(w, t)`` across a concatenation.

    Satisfies ``expand(w + w2, t) == expand(w, t) + expand(w2, carry(w, t))``.
    """
    out = []
    r = tuple(w)
    for seed in t:
        out.append(carry1(params, r, seed))
        r = expand1(params, r, seed)
    return tuple(out)


def encode_seed(params: Params, t: Sequence[int]) -> int:
    code = 0
    for j, x in enumerate(t):
        if params.check(x) == params.n:
            code |= 1 << j
    return code


def decode_seed(params: Params, code: int, k: int) -> Word:
    if code < 0 or code >> k:
        raise InvalidLetter(f"seed code {code} out of range for k={k}")
    return tuple(params.n if (code >> j) & 1 else params.m for j in range(k))


# -- bit-array kernels -------------------------------------------------------

def expand1_bits(params: Params, bits: np.ndarray, seed_bit: int) -> np.ndarray:
    """``expand1`` on a bit array whose letters are the run lengths.

    Works in chunks so the intermediate index arrays stay bounded.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    count_n = int(np.count_nonzero(bits))
    total = params.m * (bits.size - count_n) + params.n * count_n
    out = np.empty(total, dtype=np.uint8)
    lengths = np.array([params.m, params.n], dtype=np.intp)
    pos = 0
    for start in range(0, bits.size, _CHUNK):
        block = bits[start:start + _CHUNK]
        vals = np.empty(block.size, dtype=np.uint8)
        first = seed_bit ^ (start & 1)
        vals[0::2] = first
        vals[1::2] = first ^ 1
        piece = np.repeat(vals, lengths[block])
        out[pos:pos + piece.size] = piece
        pos += piece.size
    return out


def expand_bits(params: Params, bits: np.ndarray, t: Sequence[int]) -> np.ndarray:
    r = np.asarray(bits, dtype=np.uint8)
    for seed in t:
        r = expand1_bits(params, r, params.bit(seed))
    return r


def rle_array(values: np.ndarray) -> np.ndarray:
    """Run lengths of a 1-d array, vectorized."""
    values = np.asarray(values)
    if values.size == 0:
        return np.zeros(0, dtype=np.int64)
    edges = np.flatnonzero(values[1:] != values[:-1]) + 1
    bounds = np.concatenate(([0], edges, [values.size]))
    return np.diff(bounds)


def _kolakoski_slow(params: Params, length: int) -> list[int]:
    buf: list[int] = []
    i = 0
    while len(buf) < length:
        value = params.m if i % 2 == 0 else params.n
        run = buf[i] if i < len(buf) else value
        buf.extend([value] * run)
        i += 1
    return buf[:length]


def kolakoski_bits(params: Params, length: int) -> np.ndarray:
    """First ``length`` letters of K(m, n) as bits (0 = m, 1 = n)."""
    if length < 0:
        raise InvalidParams("length must be non-negative")
    boot = _kolakoski_slow(params, min(length, 64))
    prefix = params.to_bits(boot)
    seed = params.bit(params.m)
    # K = expand1(K, m): expanding a correct prefix yields a longer correct prefix.
    while prefix.size < length:
        grown = expand1_bits(params, prefix, seed)
        if grown.size <= prefix.size:
            raise AssertionError("expansion did not grow the prefix")
        prefix = grown
    return prefix[:length]


def kolakoski(params: Params, length: int) -> Word:
    """First ``length`` terms of the self-describing sequence starting with ``m``."""
    if length <= 4096:
        if length < 0:
            raise InvalidParams("length must be non-negative")
        return tuple(_kolakoski_slow(params, length))
    return params.from_bits(kolakoski_bits(params, length))
