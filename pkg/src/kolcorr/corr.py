"""Lag correlations of a periodic approximant via number-theoretic transforms.

Letters map to signs (m -> -1, n -> +1).  For a cyclic sign word ``a`` of
length ``P`` the coefficient of ``x**d`` in ``f(x) f(x**-1) mod x**L - 1``
is ``sum_i a_i a_(i+d)``: agreements minus disagreements.  Agreement
counts are therefore ``(P + coeff) / 2``.

When ``P`` is not itself an admissible transform length the word is
zero-padded to length ``L >= P + D``; the cyclic tail the padding loses,
``W(d) = sum_{j<d} a_j a_(P-d+j)``, is recovered from one short linear
convolution of the first ``D`` signs with the reversed last ``D`` signs.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import modfield
from .approximant import PeriodSpec, PeriodVector, build_period, validate_period
from .errors import InvalidParams, ValidationError
from .freq import min_expansion_length
from .modfield import CHUNK, DEFAULT_FIELD, PrimeField
from .seqcore import Params


@dataclass(frozen=True, eq=False)
class SignVector:
    residues: np.ndarray
    field: PrimeField = DEFAULT_FIELD

    def __len__(self):
        return int(self.residues.size)

    def signs(self) -> np.ndarray:
        return np.where(self.residues == 1, 1, -1).astype(np.int8)


def sign_map(vec: PeriodVector, field: PrimeField = DEFAULT_FIELD) -> SignVector:
    """m -> -1, n -> +1, embedded as residues 1 and p - 1."""
    out = np.empty(vec.length, dtype=np.uint32)
    minus = np.uint32(field.p - 1)
    step = CHUNK * 8
    for s in range(0, vec.length, step):
        bits = np.unpackbits(vec.packed[s // 8:(s + step) // 8 + 1], bitorder="little")[: min(step, vec.length - s)]
        out[s:s + bits.size] = np.where(bits == 1, np.uint32(1), minus)
    return SignVector(out, field)


def signs_to_vector(signs, field: PrimeField = DEFAULT_FIELD) -> SignVector:
    signs = np.asarray(signs)
    if not np.all(np.abs(signs) == 1):
        raise InvalidParams("signs must be +1 or -1")
    return SignVector(np.where(signs > 0, 1, field.p - 1).astype(np.uint32), field)


@dataclass(eq=False)
class CorrelationSeries:
    params: Params
    k: int
    period: int
    agree: np.ndarray
    horizon: int
    rng_seed: int | None = None
    trial: int | None = None
    method: str = ""
    prime: str = DEFAULT_FIELD.name
    meta: dict = field(default_factory=dict)

    @property
    def dmax(self) -> int:
        return int(self.agree.size) - 1

    def cf(self, d: int) -> Fraction:
        return Fraction(int(self.agree[d]), self.period)

    def df(self, d: int) -> Fraction:
        return 1 - self.cf(d)

    def cf_float(self) -> np.ndarray:
        return self.agree / self.period

    def df_float(self) -> np.ndarray:
        return 1.0 - self.agree / self.period

    def exact(self, d: int) -> bool:
        return 0 < d <= self.horizon

    def check(self) -> None:
        if self.agree[0] != self.period:
            raise ValidationError("agreement at lag 0 must equal the period")
        if self.agree.min() < 0 or self.agree.max() > self.period:
            raise ValidationError("agreement counts out of range")


def _self_spectrum_inplace(F: np.ndarray, field: PrimeField) -> np.ndarray:
    """``F[t] <- F[t] * F[-t mod L]``, the transform of ``f(x) f(x**-1)``."""
    L = F.size
    pp = np.uint64(field.p)
    half = L // 2
    f0 = int(F[0])
    # pairs (t, L - t) for 1 <= t <= half; the result is symmetric so both get it
    for t0 in range(1, half + 1, CHUNK):
        t1 = min(half + 1, t0 + CHUNK)
        lo = F[t0:t1].astype(np.uint64)
        hi = F[L - t1 + 1:L - t0 + 1][::-1].astype(np.uint64)
        prod = (lo * hi % pp).astype(np.uint32)
        F[t0:t1] = prod
        F[L - t1 + 1:L - t0 + 1] = prod[::-1]
    F[0] = f0 * f0 % field.p
    return F


def _autocorrelation_coefficients(buf: np.ndarray, field: PrimeField, count: int) -> np.ndarray:
    """First ``count`` coefficients of ``f(x) f(x**-1) mod x**L - 1``, centered."""
    L = buf.size
    w = field.root_of_order(L)
    F = modfield.transform_inplace(buf, w, field)
    del buf
    F = _self_spectrum_inplace(F, field)
    out = modfield.transform_inplace(F, field.inv(w), field)
    del F
    head = out[:count].astype(np.uint64) * np.uint64(field.inv(L)) % np.uint64(field.p)
    return field.decode(head)


def full_cycle_correlation(sv: SignVector, dmax: int) -> np.ndarray:
    """Agreement counts for lags ``0..dmax`` of the cyclic sign word (length must be admissible)."""
    field = sv.field
    P = len(sv)
    if not field.admissible(P):
        raise InvalidParams(f"length {P} is not admissible in field {field.name}")
    if not 0 <= dmax < P:
        raise InvalidParams("need 0 <= dmax < period")
    return _to_agree(P, _autocorrelation_coefficients(sv.residues.copy(), field, dmax + 1))


def _to_agree(P: int, coeff: np.ndarray) -> np.ndarray:
    coeff = np.asarray(coeff, dtype=np.int64)
    if np.any(np.abs(coeff) > P) or np.any((coeff - P) % 2):
        raise ValidationError("decoded correlation outside [-P, P] or of wrong parity")
    return (P + coeff) // 2


def wraparound_terms(signs: np.ndarray, D: int, field: PrimeField = DEFAULT_FIELD) -> np.ndarray:
    """``W(d) = sum_{j<d} a_j a_(M-d+j)`` for ``0 <= d < D``."""
    M = signs.size
    head = signs[:D].astype(np.int64)
    revtail = signs[M - D:][::-1].astype(np.int64)
    L2 = field.smallest_admissible(2 * D - 1)
    a = np.zeros(L2, dtype=np.int64)
    b = np.zeros(L2, dtype=np.int64)
    a[:D] = head
    b[:D] = revtail
    conv = field.decode(modfield.cyclic_convolution(field.encode(a), field.encode(b), field))
    W = np.zeros(D, dtype=np.int64)
    W[1:] = conv[: D - 1]
    return W


def padded_correlation(sv: SignVector, L: int, D: int) -> np.ndarray:
    """Agreement counts for lags ``0 <= d < D`` of a cyclic word of length M < L."""
    field = sv.field
    M = len(sv)
    if not field.admissible(L):
        raise InvalidParams(f"length {L} is not admissible in field {field.name}")
    if not (M < L and 1 <= D <= min(M, L - M)):
        raise InvalidParams("need M < L and 1 <= D <= min(M, L - M)")
    buf = np.zeros(L, dtype=np.uint32)
    buf[:M] = sv.residues
    A = _autocorrelation_coefficients(buf, field, D)
    signs = sv.signs()
    W = wraparound_terms(signs, D, field)
    return _to_agree(M, A + W)


@lru_cache(maxsize=None)
def _horizon(params: Params, k: int) -> int:
    return min_expansion_length(params, k) - 2


def correlate_period(vec: PeriodVector, dmax: int, field: PrimeField = DEFAULT_FIELD) -> tuple[np.ndarray, str]:
    """Agreement counts of one period, choosing the full-cycle or padded route."""
    P = vec.length
    if dmax >= P:
        raise InvalidParams(f"dmax={dmax} must be below the period {P}")
    if field.admissible(P):
        # hand the residue buffer straight to the transform; no second copy
        buf = sign_map(vec, field).residues
        return _to_agree(P, _autocorrelation_coefficients(buf, field, dmax + 1)), "full"
    sv = sign_map(vec, field)
    D = dmax + 1
    L = field.smallest_admissible(P + D)
    return padded_correlation(sv, L, D), "padded"


def tf_series(
    params: Params,
    k: int,
    dmax: int,
    rng_seed: int = 0,
    *,
    field: PrimeField = DEFAULT_FIELD,
    start=None,
    trial: int | None = None,
    validate: bool = True,
) -> CorrelationSeries:
    """Correlation series of an order-k approximant; lags up to ``horizon`` are exact."""
    params.require_odd()
    timings = {}
    t0 = time.perf_counter()
    spec = PeriodSpec.random(params, k, rng_seed, start)
    timings["euler"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    vec = build_period(spec)
    if validate:
        validate_period(spec, vec, decompose_max_k=6)
    timings["period"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    agree, method = correlate_period(vec, dmax, field)
    timings["correlate"] = time.perf_counter() - t0
    series = CorrelationSeries(
        params=params,
        k=k,
        period=vec.length,
        agree=agree,
        horizon=_horizon(params, k),
        rng_seed=rng_seed,
        trial=trial,
        method=method,
        prime=field.name,
        meta={"start": list(spec.start), "timings": timings},
    )
    series.check()
    return series


@dataclass(frozen=True)
class TrialComparison:
    first_divergence: int | None
    max_abs_diff_by_range: list[tuple[int, int, float]]


def compare_trials(a: CorrelationSeries, b: CorrelationSeries) -> TrialComparison:
    if (a.params, a.k, a.period, a.dmax) != (b.params, b.k, b.period, b.dmax):
        raise ValidationError("series have different parameters and cannot be compared")
    diff = np.flatnonzero(a.agree != b.agree)
    first = int(diff[0]) if diff.size else None
    gap = np.abs(a.agree - b.agree) / a.period
    ranges = []
    lo = 0
    hi = 10
    while lo <= a.dmax:
        top = min(hi, a.dmax + 1)
        ranges.append((lo, top - 1, float(gap[lo:top].max())))
        lo, hi = top, hi * 10
    return TrialComparison(first, ranges)
