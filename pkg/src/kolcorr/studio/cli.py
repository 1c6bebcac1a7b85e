"""``kolcorr`` command line.

Exit codes: 0 success, 2 usage error (including invalid parameters),
3 validation or file-format failure, 4 resource limit.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from .. import __version__
from ..approximant import PeriodSpec, build_period, load_period, period_length, save_period, validate_period
from ..corr import compare_trials, tf_series
from ..errors import FormatError, InvalidLetter, InvalidParams, ResourceLimit, ValidationError
from ..freq import min_expansion_length, uniform_freq, window_table
from ..modfield import FIELDS
from ..seqcore import Params, kolakoski, rle
from ..stategraph import StateGraph, check_connectivity, degree_report, euler_cycle
from .analysis import AnalysisSeries, ema, phase_filter, residue_split, sign_pattern_break
from .export import RunConfig, export_analysis, export_series, read_table, table_to_analysis, table_to_series

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_RESOURCE = 0, 2, 3, 4
DEFAULT_LIMIT_BYTES = 4 << 30


def parse_word(text: str) -> tuple[int, ...]:
    """``"1122"`` or ``"1,1,2,2"`` (commas needed once a letter has two digits)."""
    text = text.strip()
    parts = text.split(",") if "," in text else list(text)
    try:
        return tuple(int(x) for x in parts if x.strip())
    except ValueError as exc:
        raise InvalidLetter(f"cannot parse word {text!r}") from exc


def format_word(w) -> str:
    w = list(w)
    return "".join(map(str, w)) if all(x < 10 for x in w) else ",".join(map(str, w))


def estimate_bytes(params: Params, k: int, prime: str, dmax: int) -> int:
    """Rough peak memory of one correlation trial."""
    P = period_length(params, k)
    field = FIELDS[prime]
    L = P if field.admissible(P) else field.smallest_admissible(P + dmax + 1)
    # two uint32 transform buffers plus slack, the unpacked period and its predecessor, fixed chunk scratch
    return 9 * L + 2 * P + (128 << 20)


def _params(args) -> Params:
    return Params(args.m, args.n)


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def cmd_gen(args) -> int:
    p = _params(args)
    _emit(format_word(kolakoski(p, args.length)), args.out)
    return EXIT_OK


def cmd_rle(args) -> int:
    p = _params(args)
    w = parse_word(args.word) if args.word else kolakoski(p, args.length)
    _emit(format_word(rle(w)), args.out)
    return EXIT_OK


def cmd_graph(args) -> int:
    g = StateGraph(_params(args), args.k)
    conn = check_connectivity(g)
    deg = degree_report(g)
    lines = [
        f"strongly connected: {str(conn.is_strongly_connected).lower()}, vertices {conn.vertices}",
        f"components: {conn.scc_count}",
        f"all degrees 2: {str(deg.out_degree_ok and deg.in_degree_ok).lower()}",
        f"label maps bijective: {str(all(deg.bijective)).lower()}",
    ]
    _emit("\n".join(lines), args.out)
    return EXIT_OK if conn.is_strongly_connected and deg.ok else EXIT_VALIDATION


def cmd_euler(args) -> int:
    cyc = euler_cycle(StateGraph(_params(args), args.k), args.seed)
    cyc.validate()
    _emit(format_word(cyc.labels), args.out)
    return EXIT_OK


def cmd_period(args) -> int:
    if args.load:
        vec = load_period(args.load)
        print(f"m={vec.params.m} n={vec.params.n} k={vec.k} length={vec.length} n_count={vec.count_n()}")
        return EXIT_OK
    p = _params(args)
    _check_limit(args, estimate_bytes(p, args.k, args.prime, 0))
    spec = PeriodSpec.random(p, args.k, args.seed)
    vec = build_period(spec)
    rep = validate_period(spec, vec)
    print(f"length {vec.length}, balanced {str(rep.balance_ok).lower()}, cycle valid {str(rep.cycle_ok).lower()}")
    if args.out:
        save_period(vec, args.out)
    return EXIT_OK


def cmd_di(args) -> int:
    d = min_expansion_length(_params(args), args.k)
    _emit(f"D_{args.k} = {d}\nhorizon = {d - 2}", args.out)
    return EXIT_OK


def cmd_freq(args) -> int:
    p = _params(args)
    if args.word:
        _emit(str(uniform_freq(p, parse_word(args.word))), args.out)
        return EXIT_OK
    if not args.length:
        raise InvalidParams("freq needs --word or --length")
    table = window_table(p, args.length)
    lines = [f"{format_word(w)} {f}" for w, f in sorted(table.items())]
    _emit("\n".join(lines), args.out)
    return EXIT_OK


def _check_limit(args, need: int) -> None:
    limit = args.limit_bytes or DEFAULT_LIMIT_BYTES
    if need > limit:
        raise ResourceLimit(f"estimated {need} bytes exceeds the limit of {limit}; raise --limit-bytes")


def cmd_corr(args) -> int:
    p = _params(args)
    seeds = [args.seed + j for j in range(args.trials)]
    config = RunConfig(
        p.m, p.n, args.k, args.dmax, args.trials, seeds, args.out, args.prime, args.limit_bytes, "corr"
    ).validate()
    if args.dmax >= period_length(p, args.k):
        raise InvalidParams("dmax must be below the period 2 (m+n)**k")
    _check_limit(args, estimate_bytes(p, args.k, args.prime, args.dmax))
    field = FIELDS[args.prime]
    out = Path(args.out or f"corr_m{p.m}_n{p.n}_k{args.k}")
    suffix = "." + args.format
    results = []
    for j, seed in enumerate(seeds):
        s = tf_series(p, args.k, args.dmax, seed, field=field, trial=j)
        target = out.with_name(f"{out.name}.trial{j}{suffix}")
        written = export_series(s, target, fmt=args.format, config=config, residue_mod=args.residue or None, split=args.split)
        for w in written:
            print(f"wrote {w}")
        results.append(s)
    base = results[0]
    report = [f"period {base.period}, horizon {base.horizon}, method {base.method}"]
    pat = sign_pattern_break(base, "df")
    report.append(f"mod-3 sign pattern of df - 1/2: first break at {pat.first_break} (checked to {pat.checked_up_to})")
    for j, other in enumerate(results[1:], start=1):
        cmp = compare_trials(base, other)
        report.append(f"trial 0 vs {j}: first divergence {cmp.first_divergence}")
        for lo, hi, gap in cmp.max_abs_diff_by_range:
            report.append(f"  d in [{lo}, {hi}]: max |diff| {gap:.3e}")
    text = "\n".join(report)
    print(text)
    if len(results) > 1:
        Path(out.with_name(out.name + ".compare.txt")).write_text(text + "\n")
    return EXIT_OK


def cmd_analyze(args) -> int:
    table = read_table(args.input)
    series = table_to_analysis(table, args.column)
    # the filter needs consecutive lags, so it runs before the split
    if args.filter is not None:
        series = phase_filter(series, args.filter)
    parts = residue_split(series, args.split) if args.split else [series]
    out = Path(args.out or Path(args.input).with_suffix(""))
    suffix = "." + args.format
    for c, part in enumerate(parts):
        if args.ema is not None:
            part = ema(part, args.ema)
        tag = f".r{c}" if args.split else ""
        target = out.with_name(f"{out.name}.analysis{tag}{suffix}")
        export_analysis(part, target, fmt=args.format)
        print(f"wrote {target}")
    return EXIT_OK


def cmd_compare(args) -> int:
    a = table_to_series(read_table(args.first))
    b = table_to_series(read_table(args.second))
    cmp = compare_trials(a, b)
    print(f"first divergence: {cmp.first_divergence}")
    for lo, hi, gap in cmp.max_abs_diff_by_range:
        print(f"d in [{lo}, {hi}]: max |diff| {gap:.3e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kolcorr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"kolcorr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, *, k=False, out=True, mn=True):
        sp = sub.add_parser(name, help=help_text)
        if mn:
            sp.add_argument("--m", type=int, default=1)
            sp.add_argument("--n", type=int, default=2)
        if k:
            sp.add_argument("--k", type=int, required=True)
        if out:
            sp.add_argument("--out", default=None)
        sp.set_defaults(func=func)
        return sp

    sp = add("gen", cmd_gen, "print a prefix of K(m, n)")
    sp.add_argument("--length", type=int, default=100)
    sp = add("rle", cmd_rle, "run lengths of a word or of a prefix")
    sp.add_argument("--word", default=None)
    sp.add_argument("--length", type=int, default=100)
    add("graph", cmd_graph, "strong connectivity and degrees of G(m, n, k)", k=True)
    sp = add("euler", cmd_euler, "labels of a random Eulerian cycle", k=True)
    sp.add_argument("--seed", type=int, default=0)
    sp = add("period", cmd_period, "build, validate and save one approximant period", k=False)
    sp.add_argument("--k", type=int, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--prime", choices=sorted(FIELDS), default="5n1")
    sp.add_argument("--limit-bytes", type=int, default=None)
    sp.add_argument("--load", default=None, help="read and check a KPRD file instead")
    add("di", cmd_di, "minimum expansion length D_k and the exact horizon", k=True)
    sp = add("freq", cmd_freq, "uniform frequency of a word, or the table of all windows")
    sp.add_argument("--word", default=None)
    sp.add_argument("--length", type=int, default=None)
    sp = add("corr", cmd_corr, "correlation series of order-k approximants", k=True)
    sp.add_argument("--dmax", type=int, required=True)
    sp.add_argument("--trials", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0, help="trial j uses seed + j")
    sp.add_argument("--format", choices=["csv", "tsv"], default="csv")
    sp.add_argument("--prime", choices=sorted(FIELDS), default="5n1")
    sp.add_argument("--limit-bytes", type=int, default=None)
    sp.add_argument("--residue", type=int, default=0, help="add a d mod q column")
    sp.add_argument("--split", action="store_true", help="one file per residue class")
    sp = add("analyze", cmd_analyze, "residue split, phase filter and EMA of an exported series", mn=False)
    sp.add_argument("input")
    sp.add_argument("--column", default="df_value")
    sp.add_argument("--split", type=int, default=0)
    sp.add_argument("--filter", type=float, nargs="?", const=2 * math.pi / 5, default=None)
    sp.add_argument("--ema", type=float, default=None)
    sp.add_argument("--format", choices=["csv", "tsv"], default="csv")
    sp = add("compare", cmd_compare, "compare two exported series", out=False, mn=False)
    sp.add_argument("first")
    sp.add_argument("second")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "period" and not args.load and args.k is None:
        print("period needs --k or --load", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (InvalidParams, InvalidLetter) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, FormatError) as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ResourceLimit, MemoryError) as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    raise SystemExit(main())
