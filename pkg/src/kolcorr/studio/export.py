"""Plain-text export of correlation and analysis series.

A file starts with ``#`` comment lines holding the code version and the
run configuration as JSON, then a header row and one row per lag in
increasing order.  Nothing time-dependent is written, so re-running a
configuration reproduces the file byte for byte.
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .. import __version__
from ..corr import CorrelationSeries
from ..errors import FormatError, InvalidParams
from ..modfield import FIELDS
from ..seqcore import Params
from .analysis import AnalysisSeries

SERIES_COLUMNS = ["d", "agree_count", "period", "cf", "cf_value", "df", "df_value", "exact_flag"]
DELIMITERS = {"csv": ",", "tsv": "\t"}


@dataclass
class RunConfig:
    m: int
    n: int
    k: int | None = None
    dmax: int | None = None
    trials: int = 1
    seeds: list[int] = field(default_factory=lambda: [0])
    out: str | None = None
    prime: str = "5n1"
    limit_bytes: int | None = None
    command: str = ""

    def validate(self) -> "RunConfig":
        Params(self.m, self.n)
        if self.k is not None and self.k < 0:
            raise InvalidParams("k must be non-negative")
        if self.dmax is not None and self.dmax < 0:
            raise InvalidParams("dmax must be non-negative")
        if self.trials < 1 or len(self.seeds) != self.trials:
            raise InvalidParams("need one seed per trial")
        if self.prime not in FIELDS:
            raise InvalidParams(f"unknown prime {self.prime!r}; choose from {sorted(FIELDS)}")
        if self.limit_bytes is not None and self.limit_bytes <= 0:
            raise InvalidParams("limit-bytes must be positive")
        return self

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _header_lines(config: RunConfig | None, extra: dict | None = None) -> list[str]:
    lines = [f"# kolcorr {__version__}"]
    if config is not None:
        lines.append(f"# config {config.to_json()}")
    for key in sorted(extra or {}):
        lines.append(f"# {key} {json.dumps(extra[key], sort_keys=True, separators=(',', ':'))}")
    return lines


def series_rows(series: CorrelationSeries, residue_mod: int | None = None, start: int = 1):
    for d in range(start, series.dmax + 1):
        cf = series.cf(d)
        df = 1 - cf
        row = {
            "d": d,
            "agree_count": int(series.agree[d]),
            "period": series.period,
            "cf": _frac(cf),
            "cf_value": repr(float(cf)),
            "df": _frac(df),
            "df_value": repr(float(df)),
            "exact_flag": int(series.exact(d)),
        }
        if residue_mod:
            row["residue_class"] = d % residue_mod
        yield row


def _write(path, columns, rows, fmt: str, header: list[str]) -> None:
    if fmt not in DELIMITERS:
        raise InvalidParams(f"unknown format {fmt!r}")
    with open(path, "w", newline="") as fh:
        for line in header:
            fh.write(line + "\n")
        writer = csv.DictWriter(fh, fieldnames=columns, delimiter=DELIMITERS[fmt], lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def export_series(
    series: CorrelationSeries,
    path,
    *,
    fmt: str = "csv",
    config: RunConfig | None = None,
    residue_mod: int | None = None,
    split: bool = False,
) -> list[Path]:
    """Write one correlation series; with ``split`` one file per residue class."""
    extra = {
        "series": {
            "m": series.params.m,
            "n": series.params.n,
            "k": series.k,
            "period": series.period,
            "horizon": series.horizon,
            "seed": series.rng_seed,
            "trial": series.trial,
            "prime": series.prime,
            "method": series.method,
        }
    }
    header = _header_lines(config, extra)
    path = Path(path)
    if split:
        if not residue_mod:
            raise InvalidParams("split export needs a residue modulus")
        paths = []
        rows = list(series_rows(series, residue_mod))
        for c in range(residue_mod):
            target = path.with_name(f"{path.stem}.r{c}{path.suffix}")
            chosen = [r for r in rows if r["residue_class"] == c]
            _write(target, SERIES_COLUMNS + ["residue_class"], chosen, fmt, header)
            paths.append(target)
        return paths
    columns = SERIES_COLUMNS + (["residue_class"] if residue_mod else [])
    _write(path, columns, series_rows(series, residue_mod), fmt, header)
    return [path]


def export_analysis(series: AnalysisSeries, path, *, fmt: str = "csv", config: RunConfig | None = None) -> Path:
    header = _header_lines(config, {"source": series.source, "chain": list(series.chain)})
    rows = ({"d": int(d), "value": repr(float(v))} for d, v in zip(series.lags, series.values))
    _write(path, ["d", "value"], rows, fmt, header)
    return Path(path)


@dataclass
class Table:
    columns: list[str]
    rows: list[dict]
    meta: dict

    def column(self, name: str, kind=float) -> np.ndarray:
        return np.array([kind(r[name]) for r in self.rows])


def read_table(path) -> Table:
    """Parse a file written by this module (either delimiter)."""
    text = Path(path).read_text().splitlines()
    meta = {}
    body = []
    for line in text:
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(" ")
            if key == "kolcorr":
                meta["version"] = value
            else:
                try:
                    meta[key] = json.loads(value)
                except json.JSONDecodeError as exc:
                    raise FormatError(f"bad header line {line!r}") from exc
        elif line:
            body.append(line)
    if not body:
        raise FormatError(f"{path}: no header row")
    delim = "\t" if "\t" in body[0] else ","
    reader = csv.DictReader(body, delimiter=delim)
    return Table(list(reader.fieldnames or []), list(reader), meta)


def table_to_analysis(table: Table, column: str = "df_value") -> AnalysisSeries:
    if column not in table.columns:
        raise FormatError(f"column {column!r} not present")
    chain = tuple(table.meta.get("chain", [])) or (column,)
    return AnalysisSeries(table.column("d", int), table.column(column), json.dumps(table.meta.get("series", ""), sort_keys=True), chain)


def table_to_series(table: Table) -> CorrelationSeries:
    """Rebuild a correlation series from an unsplit export starting at d = 1."""
    info = table.meta.get("series")
    if not info or "agree_count" not in table.columns:
        raise FormatError("file is not a correlation series export")
    d = table.column("d", int)
    if d.size == 0 or not np.array_equal(d, np.arange(1, d.size + 1)):
        raise FormatError("lags must run 1, 2, ... without gaps")
    agree = np.concatenate(([info["period"]], table.column("agree_count", int))).astype(np.int64)
    return CorrelationSeries(
        params=Params(info["m"], info["n"]),
        k=info["k"],
        period=info["period"],
        agree=agree,
        horizon=info["horizon"],
        rng_seed=info.get("seed"),
        trial=info.get("trial"),
        method=info.get("method", ""),
        prime=info.get("prime", "5n1"),
    )
