"""One period of the periodic approximant, built from an Eulerian cycle.

If ``s`` labels an Eulerian cycle of G(m, n, k) starting at ``t1``, the
cyclic word ``expand(s, t1)`` has length ``2 (m+n)**k`` and shares every
window frequency of length up to the horizon with K(m, n).

KPRD file layout (all integers little-endian)::

    offset  size  field
    0       4     magic b"KPRD"
    4       1     version (1)
    5       2     m
    7       2     n
    9       2     k
    11      8     length P
    19      ...   payload, ceil(P/8) bytes, bits LSB-first, 0 = m, 1 = n
    end-4   4     CRC-32 of the payload (poly 0xEDB88320)
"""
from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import BadMagic, CRCMismatch, FormatError, ValidationError, VersionMismatch
from .seqcore import Params, Word, expand, expand_bits
from .stategraph import EulerCycle, StateGraph, euler_cycle

MAGIC = b"KPRD"
VERSION = 1
_HEADER = struct.Struct("<4sBHHHQ")


def period_length(params: Params, k: int) -> int:
    return 2 * params.total ** k


@dataclass(frozen=True)
class PeriodSpec:
    params: Params
    k: int
    labels: Word
    start: Word
    rng_seed: int | None = None

    @classmethod
    def from_cycle(cls, cycle: EulerCycle) -> "PeriodSpec":
        return cls(cycle.params, cycle.k, cycle.labels, cycle.start, cycle.rng_seed)

    @classmethod
    def random(cls, params: Params, k: int, rng_seed: int = 0, start: Sequence[int] | None = None) -> "PeriodSpec":
        return cls.from_cycle(euler_cycle(StateGraph(params, k), rng_seed, start))

    def cycle(self) -> EulerCycle:
        return EulerCycle(self.params, self.k, self.labels, self.start, self.rng_seed)


@dataclass(frozen=True, eq=False)
class PeriodVector:
    params: Params
    k: int
    length: int
    packed: np.ndarray = field(repr=False)

    @classmethod
    def from_bits(cls, params: Params, k: int, bits: np.ndarray) -> "PeriodVector":
        bits = np.asarray(bits, dtype=np.uint8)
        return cls(params, k, int(bits.size), np.packbits(bits, bitorder="little"))

    def bits(self) -> np.ndarray:
        return np.unpackbits(self.packed, count=self.length, bitorder="little")

    def letters(self) -> Word:
        return self.params.from_bits(self.bits())

    def count_n(self) -> int:
        return int(np.count_nonzero(self.bits()))

    def __eq__(self, other):
        if not isinstance(other, PeriodVector):
            return NotImplemented
        return (self.params, self.k, self.length) == (other.params, other.k, other.length) and np.array_equal(
            self.packed, other.packed
        )


def build_period(spec: PeriodSpec) -> PeriodVector:
    """Whole-word fold: k successive expansions of the label word."""
    p = spec.params
    bits = expand_bits(p, p.to_bits(spec.labels), spec.start)
    return PeriodVector.from_bits(p, spec.k, bits)


def build_period_per_edge(spec: PeriodSpec) -> PeriodVector:
    """Concatenation of ``expand((s_i,), t^(i))`` over the walk; the slow reference route."""
    p = spec.params
    states = spec.cycle().states()
    pieces = [p.to_bits(expand(p, (x,), t)) for x, t in zip(spec.labels, states)]
    bits = np.concatenate(pieces) if pieces else np.zeros(0, dtype=np.uint8)
    return PeriodVector.from_bits(p, spec.k, bits)


@dataclass
class PeriodReport:
    length_ok: bool
    balance_ok: bool
    cycle_ok: bool
    decomposition_ok: bool | None = None
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def validate_period(spec: PeriodSpec, vec: PeriodVector, *, strict: bool = True, decompose_max_k: int = 8) -> PeriodReport:
    expected = period_length(spec.params, spec.k)
    length_ok = vec.length == expected
    balance_ok = length_ok and 2 * vec.count_n() == vec.length
    try:
        spec.cycle().validate()
        cycle_ok = True
    except ValidationError:
        cycle_ok = False
    decomposition_ok = None
    if spec.k <= decompose_max_k:
        decomposition_ok = build_period_per_edge(spec) == vec
    report = PeriodReport(length_ok, balance_ok, cycle_ok, decomposition_ok)
    for name in ("length_ok", "balance_ok", "cycle_ok", "decomposition_ok"):
        if getattr(report, name) is False:
            report.failures.append(name.removesuffix("_ok"))
    if strict and report.failures:
        raise ValidationError("period validation failed: " + ", ".join(report.failures))
    return report


def save_period(vec: PeriodVector, path) -> None:
    payload = vec.packed.tobytes()
    header = _HEADER.pack(MAGIC, VERSION, vec.params.m, vec.params.n, vec.k, vec.length)
    crc = struct.pack("<I", zlib.crc32(payload) & 0xFFFFFFFF)
    Path(path).write_bytes(header + payload + crc)


def read_header(path) -> dict:
    raw = Path(path).read_bytes()[: _HEADER.size]
    return _parse_header(raw)


def _parse_header(raw: bytes) -> dict:
    if len(raw) < _HEADER.size:
        raise FormatError("file too short for a KPRD header")
    magic, version, m, n, k, length = _HEADER.unpack(raw[: _HEADER.size])
    if magic != MAGIC:
        raise BadMagic(f"bad magic {magic!r}")
    if version != VERSION:
        raise VersionMismatch(f"unsupported version {version}")
    return {"m": m, "n": n, "k": k, "length": length}


def load_period(path) -> PeriodVector:
    raw = Path(path).read_bytes()
    head = _parse_header(raw)
    nbytes = (head["length"] + 7) // 8
    body = raw[_HEADER.size:]
    payload, tail = body[:nbytes], body[nbytes:]
    if len(payload) != nbytes or len(tail) != 4:
        raise CRCMismatch("payload truncated or padded; CRC cannot match")
    (crc,) = struct.unpack("<I", tail)
    if zlib.crc32(payload) & 0xFFFFFFFF != crc:
        raise CRCMismatch("payload CRC mismatch")
    packed = np.frombuffer(payload, dtype=np.uint8).copy()
    return PeriodVector(Params(head["m"], head["n"]), head["k"], head["length"], packed)
