"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

Criteria that the computed data contradicts are marked ``xfail(strict=True)``:
the assertion is unchanged, the line reads FAIL, and the run turns red if
the assertion ever starts to hold.
"""
import itertools
import json
import math
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from kolcorr.corr import compare_trials, padded_correlation, signs_to_vector, tf_series
from kolcorr.freq import WindowSums, min_expansion_length, tf_exact_windows, uniform_freq
from kolcorr.modfield import FIELD_5N1, cyclic_convolution, intt, ntt, root_of_order
from kolcorr.seqcore import Params
from kolcorr.stategraph import StateGraph, check_connectivity, degree_report, euler_cycle, guc_counts
from kolcorr.studio.analysis import AnalysisSeries, amplitude, phase_filter, residue_split, sign_pattern_break

P12 = Params(1, 2)
SMALL_LAG_DF = [Fraction(*x) for x in [
    (2, 3), (2, 3), (2, 9), (2, 3), (2, 3), (8, 27), (16, 27), (16, 27),
    (2, 9), (50, 81), (50, 81), (20, 81), (2, 3), (2, 3), (22, 81), (146, 243),
]]
VALUE_782 = Fraction(2392527, 3 ** 14)


def run_child(code: str) -> dict:
    """Run ``code`` in a fresh interpreter; it must print one JSON object.  Adds peak RSS in MB."""
    wrapper = code + "\nimport resource\n_r['peak_mb'] = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024\nprint(json.dumps(_r))\n"
    out = subprocess.run([sys.executable, "-c", wrapper], capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def brute_agree(signs, dmax):
    s = np.asarray(signs)
    return np.array([int(np.count_nonzero(s == np.roll(s, -d))) for d in range(dmax + 1)])


def test_c01_small_lag_values(report):
    r = run_child(
        "import json, time\n"
        "from kolcorr.seqcore import Params\nfrom kolcorr.corr import tf_series\n"
        "t = time.perf_counter()\ns = tf_series(Params(1, 2), 12, 16)\n"
        "_r = {'secs': time.perf_counter() - t, 'df': [str(s.df(d)) for d in range(1, 17)]}\n"
    )
    got = [Fraction(x) for x in r["df"]]
    cross = all(tf_exact_windows(P12, d).disagree == got[d - 1] for d in range(1, 13))
    ok = got == SMALL_LAG_DF and cross and r["secs"] < 60 and r["peak_mb"] < 500
    report(1, ok, f"df(1..16) exact={got == SMALL_LAG_DF}, window cross-check={cross}, {r['secs']:.2f} s, peak {r['peak_mb']:.0f} MB")
    assert got == SMALL_LAG_DF and cross
    assert r["secs"] < 60 and r["peak_mb"] < 500


@pytest.fixture(scope="module")
def lag782_data():
    """Two trials at k = 14, escalating to k = 16 if they disagree at d = 782."""
    k = 14
    a = tf_series(P12, k, 1000, rng_seed=1, trial=0)
    b = tf_series(P12, k, 1000, rng_seed=2, trial=1)
    escalated = False
    if a.agree[782] != b.agree[782]:
        k, escalated = 16, True
        a = tf_series(P12, k, 1000, rng_seed=1, trial=0)
        b = tf_series(P12, k, 1000, rng_seed=2, trial=1)
    return a, b, escalated


@pytest.mark.xfail(strict=True, reason="computed df(782) is 2390442/3^14; the stated rational is cf(782)")
def test_c02_lag_782(report, lag782_data):
    a, b, escalated = lag782_data
    agree = a.agree[782] == b.agree[782]
    df = a.df(782)
    ok = agree and df == VALUE_782 and b.df(782) == VALUE_782
    report(
        2,
        ok,
        f"k={a.k} escalated={escalated} trials agree={agree}; df(782)={df} ({float(df):.6f}), "
        f"cf(782)={a.cf(782)} ({float(a.cf(782)):.6f}); expected df={VALUE_782}; cf matches={a.cf(782) == VALUE_782}",
    )
    assert agree
    assert df == VALUE_782 and b.df(782) == VALUE_782


@pytest.mark.xfail(strict=True, reason="the mod-3 sign pattern first fails at d = 721 in both orientations")
def test_c03_sign_pattern(report, lag782_data):
    a, _, _ = lag782_data
    df = sign_pattern_break(a, "df", 1000)
    cf = sign_pattern_break(a, "cf", 1000)
    ok = df.first_break == 782
    report(
        3,
        ok,
        f"first break of the df pattern (df<1/2 iff 3|d) at d={df.first_break}; df(721)={float(a.df(721)):.6f}, "
        f"df(782)={float(a.df(782)):.6f}; opposite orientation first break at d={cf.first_break}; k={a.k}, horizon {a.horizon}",
    )
    assert df.first_break == 782


def test_c04_horizon_guarantee(report):
    t0 = time.perf_counter()
    failures = []
    checked = 0
    for mn in [(1, 2), (2, 3), (1, 4), (3, 4), (2, 5), (1, 6)]:
        p = Params(*mn)
        top = min_expansion_length(p, 6) - 2
        exact = WindowSums(p).series(top)
        for k in range(1, 7):
            h = min_expansion_length(p, k) - 2
            if h < 1:
                continue
            s = tf_series(p, k, h, rng_seed=k)
            bad = [d for d in range(1, h + 1) if s.df(d) != exact[d].disagree]
            checked += h
            if bad:
                failures.append((mn, k, bad[0]))
    secs = time.perf_counter() - t0
    ok = not failures and secs < 600
    report(4, ok, f"{checked} (pair, k, d) values compared, failures={failures[:3]}, {secs:.1f} s")
    assert not failures and secs < 600


def test_c05_ntt(report):
    rng = np.random.default_rng(5)
    p = FIELD_5N1.p
    dft_ok = True
    for j in range(4):
        L = 2 * 3 ** j
        w = root_of_order(L)
        mat = np.array([[pow(w, i * c, p) for c in range(L)] for i in range(L)], dtype=object)
        for _ in range(100):
            v = rng.integers(0, p, L)
            want = [int(x) % p for x in mat.dot(np.array([int(x) for x in v], dtype=object))]
            dft_ok &= ntt(v).tolist() == want
    rt_ok = True
    for j in range(0, 9):
        L = 2 * 3 ** j
        v = rng.integers(0, p, L)
        rt_ok &= bool(np.array_equal(intt(ntt(v)), v))
    conv_ok = True
    L = 2 * 3 ** 7
    for _ in range(100):
        a = rng.choice([-1, 1], L)
        b = rng.choice([-1, 1], L)
        lin = np.convolve(a, b)
        want = lin[:L].copy()
        want[: L - 1] += lin[L:]
        got = FIELD_5N1.decode(cyclic_convolution(FIELD_5N1.encode(a), FIELD_5N1.encode(b)))
        conv_ok &= bool(np.array_equal(got, want))
    ok = dft_ok and rt_ok and conv_ok
    report(5, ok, f"naive DFT={dft_ok}, round trip to 2*3^8={rt_ok}, convolution at 2*3^7={conv_ok}")
    assert ok


def test_c06_padded_oracle(report):
    rng = np.random.default_rng(6)
    D = 100
    good = 0
    for _ in range(50):
        M = int(rng.integers(100, 5001))
        L = FIELD_5N1.smallest_admissible(M + D)
        s = rng.choice([-1, 1], M)
        got = padded_correlation(signs_to_vector(s), L, min(D, M))
        good += bool(np.array_equal(got, brute_agree(s, min(D, M) - 1)))
    report(6, good == 50, f"{good}/50 random instances match brute force")
    assert good == 50


def test_c07_connectivity(report):
    worst = 0.0
    bad = []
    count = 0
    for n in range(2, 10):
        for m in range(1, n):
            if (m + n) % 2 == 0:
                continue
            for k in range(1, 13):
                t = time.perf_counter()
                g = StateGraph(Params(m, n), k)
                conn = check_connectivity(g)
                deg = degree_report(g)
                worst = max(worst, time.perf_counter() - t)
                count += 1
                if not (conn.is_strongly_connected and deg.out_degree_ok and deg.in_degree_ok):
                    bad.append((m, n, k))
    ok = not bad and worst < 5
    report(7, ok, f"{count} graphs, failures={bad[:3]}, slowest {worst:.2f} s")
    assert not bad and worst < 5


def test_c08_euler_validity(report):
    invalid = 0
    ref = None
    same = True
    for seed in range(50):
        cyc = euler_cycle(StateGraph(P12, 10), seed)
        try:
            cyc.validate()
        except Exception:
            invalid += 1
        s = tf_series(P12, 10, min_expansion_length(P12, 10) - 2, rng_seed=seed)
        if ref is None:
            ref = s.agree
        same &= bool(np.array_equal(ref, s.agree))
    ok = invalid == 0 and same
    report(8, ok, f"invalid cycles={invalid}/50, exact-zone series identical={same}")
    assert ok


def test_c09_state_frequency_sanity(report):
    counts = guc_counts(P12, 3, 10 ** 7) / 10 ** 7
    dev = float(np.max(np.abs(counts - 1 / 16)))
    report(9, dev < 0.01, f"max |freq - 1/16| over 16 pairs = {dev:.5f}")
    assert dev < 0.01


def test_c10_frequency_consistency(report):
    total = sum(uniform_freq(P12, w) for w in itertools.product((1, 2), repeat=12))
    stationary = True
    for L in range(0, 10):
        for w in itertools.product((1, 2), repeat=L):
            f = uniform_freq(P12, w)
            stationary &= f == uniform_freq(P12, w + (1,)) + uniform_freq(P12, w + (2,))
            stationary &= f == uniform_freq(P12, (1,) + w) + uniform_freq(P12, (2,) + w)
    known = uniform_freq(P12, (1, 1, 2, 2))
    ok = total == 1 and stationary and known == Fraction(1, 18)
    report(10, ok, f"sum over length 12 = {total}, stationarity to |w|=10 {stationary}, f(1122) = {known}")
    assert ok


def test_c11_scale(report):
    r = run_child(
        "import json, time\nimport numpy as np\n"
        "from kolcorr.seqcore import Params\nfrom kolcorr.corr import tf_series\n"
        "t = time.perf_counter()\ns = tf_series(Params(1, 2), 16, 10 ** 5, rng_seed=0)\n"
        "_r = {'secs': time.perf_counter() - t, 'period': s.period, 'horizon': s.horizon,\n"
        "      'method': s.method, 'timings': s.meta['timings'], 'df782': str(s.df(782))}\n"
    )
    ok = r["secs"] < 900 and r["peak_mb"] < 2560
    report(11, ok, f"P={r['period']} via {r['method']} path, {r['secs']:.1f} s, peak {r['peak_mb']:.0f} MB, horizon {r['horizon']}")
    assert r["period"] == 2 * 3 ** 16
    assert ok


@pytest.mark.xfail(strict=True, reason="D_18 for (1,2) is 1910, outside [1100, 1700]")
def test_c12_d18(report):
    t = time.perf_counter()
    d18 = min_expansion_length(P12, 18)
    ok = 1100 <= d18 <= 1700
    report(12, ok, f"D_18 = {d18} ({time.perf_counter() - t:.1f} s); expected within [1100, 1700]")
    assert d18 == 1910, "regression constant"
    assert 1100 <= d18 <= 1700


def test_c13_figure_data(report):
    s = tf_series(Params(2, 3), 8, 20000, rng_seed=0)
    a = AnalysisSeries.from_correlation(s)
    classes = residue_split(a, 5)
    means = [float(c.values.mean()) for c in classes]
    pair14 = float(np.corrcoef(classes[1].values[:3999], classes[4].values[:3999])[0, 1])
    pair23 = float(np.corrcoef(classes[2].values[:3999], classes[3].values[:3999])[0, 1])
    h = phase_filter(a, 2 * math.pi / 5)
    ratio = amplitude(h.values) / amplitude(a.values)
    late = a.lags >= 1000
    late_ratio = amplitude(h.values[h.lags >= 1000]) / amplitude(a.values[late])
    report(
        13,
        None,
        f"(2,3) k=8: class means mod 5 {[round(x, 4) for x in means]}, "
        f"corr(1,4)={pair14:.3f} corr(2,3)={pair23:.3f}, h/tf amplitude ratio {ratio:.3f} (d >= 1000: {late_ratio:.3f})",
    )
