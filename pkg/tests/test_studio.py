import math
from fractions import Fraction

import numpy as np
import pytest

from kolcorr.corr import tf_series
from kolcorr.errors import InvalidParams
from kolcorr.studio import cli
from kolcorr.studio.analysis import AnalysisSeries, ema, phase_filter, residue_split, sign_pattern_break
from kolcorr.studio.export import (
    RunConfig,
    export_analysis,
    export_series,
    read_table,
    table_to_analysis,
    table_to_series,
)


def series_of(values, start=1):
    values = np.asarray(values, dtype=float)
    return AnalysisSeries(np.arange(start, start + values.size), values)


def test_analysis_series_invariants():
    with pytest.raises(InvalidParams):
        AnalysisSeries([1, 1], [0.0, 0.0])
    with pytest.raises(InvalidParams):
        AnalysisSeries([1, 2], [0.0])


def test_residue_split_partition():
    s = series_of(np.random.default_rng(0).random(50))
    assert np.array_equal(residue_split(s, 1)[0].values, s.values)
    parts = residue_split(s, 7)
    lags = np.concatenate([p.lags for p in parts])
    vals = np.concatenate([p.values for p in parts])
    order = np.argsort(lags)
    assert np.array_equal(lags[order], s.lags) and np.array_equal(vals[order], s.values)
    assert all(np.all(p.lags % 7 == c) for c, p in enumerate(parts))
    with pytest.raises(InvalidParams):
        residue_split(s, 0)


def test_residue_split_small_lags(p12):
    a = AnalysisSeries.from_correlation(tf_series(p12, 8, 16))
    zero, one, _ = residue_split(a, 3)
    assert np.allclose(zero.values[:3], [2 / 9, 8 / 27, 2 / 9])
    assert np.allclose(one.values[:3], [2 / 3, 2 / 3, 16 / 27])


def test_phase_filter_examples():
    theta = 2 * math.pi / 5
    h = phase_filter(series_of(np.full(20, 3.0)))
    assert np.allclose(h.values, 3.0 * (2 - 2 * math.cos(theta)), atol=1e-12)
    d = np.arange(1, 200)
    h = phase_filter(AnalysisSeries(d, np.cos(theta * d)))
    assert np.max(np.abs(h.values)) < 1e-12
    assert h.lags[-1] == 197
    with pytest.raises(InvalidParams):
        phase_filter(AnalysisSeries([1, 3, 5], [0.0, 1.0, 2.0]))


def test_ema_examples():
    assert np.allclose(ema(series_of(np.full(10, 2.5)), 0.9).values, 2.5)
    v = np.random.default_rng(1).random(10)
    assert np.array_equal(ema(series_of(v), 0.0).values, v)
    imp = ema(series_of([1.0, 0.0, 0.0]), 0.5).values
    assert np.allclose(imp, [1.0, 1 / 3, 1 / 7])
    for bad in (-0.1, 1.0):
        with pytest.raises(InvalidParams):
            ema(series_of(v), bad)


@pytest.mark.parametrize("op", [lambda s: phase_filter(s, 0.7), lambda s: ema(s, 0.8)])
def test_linearity(op):
    rng = np.random.default_rng(2)
    x, y = rng.random(40), rng.random(40)
    a, b = rng.normal(), rng.normal()
    lhs = op(series_of(a * x + b * y)).values
    rhs = a * op(series_of(x)).values + b * op(series_of(y)).values
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_chain_recorded():
    s = ema(phase_filter(series_of(np.ones(10))), 0.5)
    assert s.chain[0].startswith("phase_filter") and s.chain[1].startswith("ema")


def test_sign_pattern_small(p12):
    s = tf_series(p12, 8, 30)
    assert sign_pattern_break(s, "df").first_break is None
    assert sign_pattern_break(s, "cf").first_break is None
    s.agree[4] = s.period // 2
    assert sign_pattern_break(s, "df").first_break == 4


def test_export_round_trip_and_determinism(tmp_path, p12):
    s = tf_series(p12, 8, 40, rng_seed=3)
    cfg = RunConfig(1, 2, 8, 40, 1, [3]).validate()
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    export_series(s, a, config=cfg)
    export_series(tf_series(p12, 8, 40, rng_seed=3), b, config=cfg)
    assert a.read_bytes() == b.read_bytes()
    table = read_table(a)
    assert table.meta["config"]["seeds"] == [3]
    assert table.rows[2]["df"] == "2/9" and Fraction(table.rows[15]["df"]) == Fraction(146, 243)
    back = table_to_series(table)
    assert np.array_equal(back.agree, s.agree) and back.period == s.period
    assert np.allclose(table.column("df_value"), s.df_float()[1:])


def test_export_tsv_and_split(tmp_path, p12):
    s = tf_series(p12, 6, 20)
    paths = export_series(s, tmp_path / "s.tsv", fmt="tsv", residue_mod=3, split=True)
    assert len(paths) == 3
    t = read_table(paths[1])
    assert {int(r["d"]) % 3 for r in t.rows} == {1}
    assert "\t" in paths[1].read_text().splitlines()[-1]


def test_export_analysis(tmp_path):
    s = ema(series_of([1.0, 2.0, 3.0]), 0.5)
    path = export_analysis(s, tmp_path / "x.csv")
    back = table_to_analysis(read_table(path), "value")
    assert np.array_equal(back.values, s.values) and back.chain == s.chain


def test_run_config_validation():
    with pytest.raises(InvalidParams):
        RunConfig(1, 2, trials=2, seeds=[0]).validate()
    with pytest.raises(InvalidParams):
        RunConfig(1, 2, prime="nope").validate()
    with pytest.raises(InvalidParams):
        RunConfig(2, 2).validate()


# -- command line ---------------------------------------------------------------

def test_cli_freq(capsys):
    assert cli.main(["freq", "--m", "1", "--n", "2", "--word", "1122"]) == 0
    assert capsys.readouterr().out.strip() == "1/18"


def test_cli_graph(capsys):
    assert cli.main(["graph", "--m", "3", "--n", "4", "--k", "12"]) == 0
    assert "strongly connected: true, vertices 4096" in capsys.readouterr().out


def test_cli_gen_rle_di_euler(capsys):
    assert cli.main(["gen", "--length", "10"]) == 0
    assert capsys.readouterr().out.strip() == "1221121221"
    assert cli.main(["rle", "--word", "1221121221"]) == 0
    assert capsys.readouterr().out.strip() == "1221121"
    assert cli.main(["di", "--k", "10"]) == 0
    assert "D_10 = 74" in capsys.readouterr().out
    assert cli.main(["euler", "--k", "3", "--seed", "1"]) == 0
    assert len(capsys.readouterr().out.strip()) == 16


def test_cli_corr_compare_analyze(tmp_path, capsys):
    out = tmp_path / "run"
    assert cli.main(["corr", "--k", "8", "--dmax", "60", "--trials", "2", "--out", str(out)]) == 0
    t0, t1 = tmp_path / "run.trial0.csv", tmp_path / "run.trial1.csv"
    assert t0.exists() and t1.exists() and (tmp_path / "run.compare.txt").exists()
    assert cli.main(["compare", str(t0), str(t1)]) == 0
    assert "first divergence" in capsys.readouterr().out
    assert cli.main(["analyze", str(t0), "--split", "3", "--filter", "--ema", "0.9"]) == 0
    assert (tmp_path / "run.trial0.analysis.r2.csv").exists()


def test_cli_period_round_trip(tmp_path, capsys):
    path = tmp_path / "p.kprd"
    assert cli.main(["period", "--k", "5", "--out", str(path)]) == 0
    assert cli.main(["period", "--load", str(path)]) == 0
    assert "length=486" in capsys.readouterr().out
    raw = bytearray(path.read_bytes())
    raw[-1] ^= 1
    path.write_bytes(bytes(raw))
    assert cli.main(["period", "--load", str(path)]) == 3


def test_cli_exit_codes(tmp_path):
    assert cli.main([]) == 2
    assert cli.main(["nosuch"]) == 2
    assert cli.main(["freq", "--m", "1", "--n", "3", "--word", "1"]) in (0, 2)
    assert cli.main(["graph", "--m", "1", "--n", "3", "--k", "3"]) == 2
    assert cli.main(["corr", "--k", "16", "--dmax", "10", "--limit-bytes", "1000"]) == 4
    assert cli.main(["corr", "--k", "2", "--dmax", "100"]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("# series not-json\n")
    assert cli.main(["compare", str(bad), str(bad)]) == 3
