"""Acceptance criteria 1-11, each run through the command-line interface.

Every test prints one ``[criterion N] PASS|FAIL ...`` line. Run directly with
``python3 tests/test_acceptance.py`` or through pytest.
"""
import json
import math
import sys
import time

import pytest

from suffquant.cli import run

#: results blocks (canonical JSON) of every invocation, keyed by argv
RESULTS: dict[tuple, str] = {}


def invoke(tmp_path, argv, expect=0):
    """Run the CLI in-process; ``expect=None`` skips the exit-code check so a verdict is still printed."""
    out = tmp_path / f"r{len(list(tmp_path.iterdir()))}.json"
    t0 = time.perf_counter()
    code = run(list(argv) + ["--out", str(out)])
    elapsed = time.perf_counter() - t0
    if expect is not None:
        assert code == expect, f"{argv}: exit {code}, expected {expect}"
    res = json.loads(out.read_text())["results"]
    RESULTS.setdefault(tuple(argv), json.dumps(res, sort_keys=True))
    return res, elapsed


def verdict(capsys, n, ok, text):
    with capsys.disabled():
        print(f"\n[criterion {n}] {'PASS' if ok else 'FAIL'} {text}")
    assert ok, text


def suite(tmp_path, sid, trials, **caps):
    argv = ["suite", "--id", sid, "--trials", str(trials), "--seed", "0"]
    for k, v in caps.items():
        argv += [f"--max-{k}", str(v)]
    return invoke(tmp_path, argv, expect=None)


def test_criterion_1_centralized(tmp_path, capsys):
    r, t = suite(tmp_path, "thm1", 50, theta=3, x=5)
    ok = r["passes"] == 50 and r["max_gap"] <= 1e-9 and t < 30
    verdict(capsys, 1, ok, f"thm1 {r['passes']}/50 max_gap={r['max_gap']:.2e} time={t:.1f}s (<30s)")


def test_criterion_2_conditionally_independent(tmp_path, capsys):
    r, t = suite(tmp_path, "thm3", 50, theta=3, x=4)
    ok = r["passes"] == 50 and r["max_gap"] <= 1e-9 and t < 60
    verdict(capsys, 2, ok, f"thm3 {r['passes']}/50 max_gap={r['max_gap']:.2e} time={t:.1f}s (<60s)")


def test_criterion_3_hierarchical(tmp_path, capsys):
    r, t = suite(tmp_path, "thm4", 50, w=4)
    c, tc = suite(tmp_path, "cor1", 50, w=4)
    # a thm4 trial only passes when the pair is also globally sufficient for theta
    ok = r["passes"] == 50 and r["max_gap"] <= 1e-9 and c["passes"] == 50 and t + tc < 60
    verdict(
        capsys,
        3,
        ok,
        f"thm4 {r['passes']}/50 max_gap={r['max_gap']:.2e}; global sufficiency {c['passes']}/50; time={t + tc:.1f}s (<60s)",
    )


def test_criterion_4_factorization(tmp_path, capsys):
    a, _ = suite(tmp_path, "thm5", 25)
    b, _ = suite(tmp_path, "prop2", 25)
    ok = a["passes"] == 25 and b["passes"] == 25 and max(a["max_gap"], b["max_gap"]) <= 1e-9
    verdict(capsys, 4, ok, f"thm5 {a['passes']}/25, augmentation path {b['passes']}/25")


def test_criterion_5_counterexamples(tmp_path, capsys):
    raw, _ = invoke(tmp_path, ["search", "--levels", "2,2", "--domain", "raw", "fixture:example4"])
    st, _ = invoke(tmp_path, ["search", "--levels", "2,2", "--domain", "stat:T1,T2", "fixture:example4"])
    glob, _ = invoke(tmp_path, ["suff", "--stat", "T1,T2", "fixture:example1"])
    loc, _ = invoke(tmp_path, ["suff", "--stat", "T2", "fixture:example1"], expect=1)
    e7, _ = suite(tmp_path, "ex7", 50)
    nonsuff = e7["extra"]["nonsufficient_instances"]
    ok = (
        abs(raw["min_risk"]) <= 1e-12
        and abs(st["min_risk"] - 0.5) <= 1e-12
        and glob["holds"] is True
        and loc["holds"] is False
        and e7["passes"] == 50
        and nonsuff >= 1
    )
    verdict(
        capsys,
        5,
        ok,
        f"example4 R_raw={raw['min_risk']} R_stat={st['min_risk']}; example1 global={glob['holds']} "
        f"local(T2)={loc['holds']}; ex7 minima match {e7['passes']}/50 with {nonsuff} non-sufficient",
    )


def test_criterion_6_degenerate(tmp_path, capsys):
    r, _ = suite(tmp_path, "degenerate", 20)
    ok = r["passes"] == 20 and r["max_gap"] <= 1e-9
    verdict(capsys, 6, ok, f"degenerate {r['passes']}/20 max_gap={r['max_gap']:.2e}")


def test_criterion_7_graphoid(tmp_path, capsys):
    r, _ = suite(tmp_path, "graphoid", 100, x=4)
    props = r["extra"]["property_passes"]
    ok = r["passes"] == 100 and all(v == 100 for v in props.values()) and r["extra"]["intersection_needs_positivity"]
    verdict(capsys, 7, ok, f"graphoid {r['passes']}/100 {props}")


def test_criterion_8_pbpo(tmp_path, capsys):
    r, _ = suite(tmp_path, "pbpo", 30)
    matches = r["extra"]["matches"]
    # a trial passes when it is sound (never below the exhaustive minimum) and its trace is monotone
    ok = r["passes"] == 30 and matches >= 27
    verdict(capsys, 8, ok, f"pbpo sound+monotone {r['passes']}/30, equals exhaustive minimum {matches}/30 (>=27)")


GAUSS = ["scenario", "gaussian", "--n", "4", "--rho", "0.5", "--levels", "4", "--samples", "1000000", "--bins", "64", "--seed", "0"]
SENSE = ["scenario", "sensing", "--K", "1", "--levels", "2", "--samples", "1000000", "--seed", "0"]


def test_criterion_9_gaussian(tmp_path, capsys):
    r, t = invoke(tmp_path, GAUSS)
    suff, alt = r["sufficient"]["risk"], r["alternative"]["risk"]
    se = r["difference"]["combined_se"]
    lo = r["benchmark"]["mmse"] - 0.01
    rel = r["posterior_w"]["relative_error"]
    ok = lo <= suff <= alt - 3 * se and rel <= 0.01 and t < 60
    verdict(
        capsys,
        9,
        ok,
        f"risk {suff:.4f} in [{lo:.4f}, {alt:.4f} - 3*{se:.5f}]; slope rel.err {rel:.1e}; time={t:.1f}s (<60s)",
    )


def test_criterion_10_sensing(tmp_path, capsys):
    r, t = invoke(tmp_path, SENSE)
    suff, alt = r["sufficient"]["risk"], r["alternative"]["risk"]
    se = r["difference"]["combined_se"]
    bench = r["benchmark"]
    ok = (
        abs(suff - 0.375) <= 0.01
        and abs(bench["risk"] - 0.375) <= 1e-12
        and abs(bench["threshold_sq"] - 2 * math.log(2)) <= 1e-9
        and alt - suff >= 3 * se
        and t < 60
    )
    verdict(
        capsys,
        10,
        ok,
        f"risk {suff:.4f} vs 0.375 at |X|^2 > {bench['threshold_sq']:.5f} (designed {r['sufficient']['threshold_sq']:.5f}); "
        f"Re(X) risk {alt:.4f}, margin {alt - suff:.4f} >= 3*{se:.5f}; time={t:.1f}s (<60s)",
    )


def test_criterion_11_determinism(tmp_path, capsys):
    if not RESULTS:
        pytest.skip("run together with criteria 1-10")
    differ = []
    for argv, first in list(RESULTS.items()):
        out = tmp_path / "again.json"
        run(list(argv) + ["--out", str(out)])
        again = json.dumps(json.loads(out.read_text())["results"], sort_keys=True)
        if again != first:
            differ.append(" ".join(argv))
    verdict(capsys, 11, not differ, f"{len(RESULTS) - len(differ)}/{len(RESULTS)} invocations byte-identical {differ}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-p", "no:cacheprovider"]))
