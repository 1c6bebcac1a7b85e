"""Post-processing of correlation series in double precision.

Every transform returns a new :class:`AnalysisSeries` whose ``chain``
records the steps that produced it, so an exported file says how its
values were derived.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..corr import CorrelationSeries
from ..errors import InvalidParams


@dataclass(frozen=True, eq=False)
class AnalysisSeries:
    lags: np.ndarray
    values: np.ndarray
    source: str = ""
    chain: tuple[str, ...] = field(default=())

    def __post_init__(self):
        lags = np.asarray(self.lags, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        if lags.shape != values.shape or lags.ndim != 1:
            raise InvalidParams("lags and values must be 1-d arrays of equal length")
        if lags.size > 1 and np.any(np.diff(lags) <= 0):
            raise InvalidParams("lags must be strictly increasing")
        object.__setattr__(self, "lags", lags)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return int(self.lags.size)

    def derived(self, lags, values, step: str) -> "AnalysisSeries":
        return AnalysisSeries(lags, values, self.source, self.chain + (step,))

    @classmethod
    def from_correlation(cls, series: CorrelationSeries, column: str = "df", start: int = 1) -> "AnalysisSeries":
        """Lags ``start..dmax`` of a correlation series, as cf or df densities."""
        if column not in ("cf", "df"):
            raise InvalidParams("column must be 'cf' or 'df'")
        values = series.df_float() if column == "df" else series.cf_float()
        lags = np.arange(start, series.dmax + 1)
        src = f"({series.params.m},{series.params.n}) k={series.k} seed={series.rng_seed}"
        return cls(lags, values[start:], src, (column,))


def residue_split(series: AnalysisSeries, q: int) -> list[AnalysisSeries]:
    """Partition by ``d mod q``; entry ``c`` holds the lags congruent to ``c``."""
    if q < 1:
        raise InvalidParams("modulus must be at least 1")
    out = []
    for c in range(q):
        mask = series.lags % q == c
        out.append(series.derived(series.lags[mask], series.values[mask], f"residue {c} mod {q}"))
    return out


def phase_filter(series: AnalysisSeries, theta: float = 2 * math.pi / 5) -> AnalysisSeries:
    """``h(d) = v(d) - 2 cos(theta) v(d+1) + v(d+2)`` wherever all three lags are present.

    The filter has a double zero on the unit circle at ``exp(+-i theta)``,
    so it removes an oscillation of that angular frequency.
    """
    pos = {int(d): i for i, d in enumerate(series.lags)}
    idx = [(i, pos.get(int(d) + 1), pos.get(int(d) + 2)) for i, d in enumerate(series.lags)]
    idx = [t for t in idx if t[1] is not None and t[2] is not None]
    if not idx:
        raise InvalidParams("series does not contain three consecutive lags")
    i0, i1, i2 = (np.array(col, dtype=np.int64) for col in zip(*idx))
    v = series.values
    c = 2.0 * math.cos(theta)
    return series.derived(series.lags[i0], v[i0] - c * v[i1] + v[i2], f"phase_filter theta={theta!r}")


def ema(series: AnalysisSeries, p: float = 0.99) -> AnalysisSeries:
    """Exponential moving average with weights ``1, p, p**2, ...`` over the history so far.

    The normalizer is ``w(t) = 1 + p w(t-1)`` with ``w(0) = 1``, the total
    weight actually present, so the first terms are not biased toward zero.
    """
    if not 0.0 <= p < 1.0:
        raise InvalidParams("decay p must lie in [0, 1)")
    v = series.values
    out = np.empty_like(v)
    acc = 0.0
    w = 0.0
    for i, x in enumerate(v):
        acc = x + p * acc
        w = 1.0 + p * w
        out[i] = acc / w
    return series.derived(series.lags, out, f"ema p={p!r}")


def amplitude(values: np.ndarray) -> float:
    """Half the peak-to-peak range after removing the mean."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return 0.0
    centered = values - values.mean()
    return float((centered.max() - centered.min()) / 2)


@dataclass(frozen=True)
class SignPattern:
    orientation: str
    first_break: int | None
    checked_up_to: int


def sign_pattern_break(series: CorrelationSeries, column: str = "df", dmax: int | None = None) -> SignPattern:
    """First lag where the mod-3 sign pattern of ``value - 1/2`` fails.

    The pattern is: below 1/2 when ``3 | d`` and above 1/2 otherwise for the
    disagreement density (reversed for agreement).  Lags where the value is
    exactly 1/2 count as a break.  Comparisons use the integer counts.
    """
    if column not in ("cf", "df"):
        raise InvalidParams("column must be 'cf' or 'df'")
    top = series.dmax if dmax is None else min(dmax, series.dmax)
    d = np.arange(1, top + 1)
    twice_agree = 2 * series.agree[1:top + 1]
    P = series.period
    # df > 1/2  <=>  2 * agree < P
    above = twice_agree < P if column == "df" else twice_agree > P
    below = twice_agree > P if column == "df" else twice_agree < P
    want_below = (d % 3 == 0) if column == "df" else (d % 3 != 0)
    ok = np.where(want_below, below, above)
    bad = np.flatnonzero(~ok)
    return SignPattern(column, int(d[bad[0]]) if bad.size else None, int(top))
