import json
from fractions import Fraction

import pytest

from proxlp import cli
from proxlp.cli import RunFlags, bench, bench_csv, main, run
from proxlp.errors import RestartLimit
from proxlp.instances import make_instance, parse_instance

MIN_X1 = "1 2\n1 1\nb 1\nc 1 0\n"
INFEAS = "1 2\n1 1\nd -1 0\n"
KAPPA = "1 2\n1 100\nb 203\nc -1 1\n"


def write(tmp_path, text, name="inst.txt"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_feasibility_farkas_report():
    rep = run("feas", parse_instance(INFEAS))
    assert rep.outcome == "FarkasPrimal" and rep.M_history == ["2"]
    assert all(rep.verification.values())


def test_optimization_report():
    rep = run("opt", parse_instance(MIN_X1))
    assert rep.outcome == "Optimal" and Fraction(rep.objective) == 0
    assert rep.x == ["0", "1"]


def test_analyze_small():
    rep = run("analyze", parse_instance("1 2\n1 2\nb 3\n"))
    assert rep.analysis["kappa"] == "2" and rep.analysis["kappa (circuit route)"] == "2"


def test_analyze_large_reports_lower_bound():
    row = " ".join(["1"] * 13 + ["-7"])
    rep = run("analyze", parse_instance(f"1 14\n{row}\nb 6\n"))
    assert Fraction(rep.analysis["kappa lower bound"]) == 7


def test_M_history_follows_update_rule():
    rep = run("opt", parse_instance(KAPPA), RunFlags(verify=True))
    assert rep.outcome == "Optimal" and rep.verification["rational simplex agrees"] is True
    hist = [Fraction(m) for m in rep.M_history]
    assert rep.restarts == len(hist) - 1 >= 1
    for M, new, r in zip(hist, hist[1:], rep.lifting_ratios):
        assert new > M and new == max(2 * Fraction(r), M * M)
    assert hist[-1] >= 100 * 2


def test_restart_limit_carries_report():
    with pytest.raises(RestartLimit) as e:
        run("opt", parse_instance(KAPPA), RunFlags(max_restarts=0))
    assert e.value.report.outcome == "RestartLimit"


def test_run_is_deterministic():
    inst = parse_instance(KAPPA)
    a, b = run("opt", inst).to_dict(), run("opt", inst).to_dict()
    a.pop("seconds"), b.pop("seconds")
    assert a == b


def test_run_rejects_bad_input():
    with pytest.raises(ValueError):
        run("opt", parse_instance(INFEAS))
    with pytest.raises(ValueError):
        run("opt", parse_instance(MIN_X1), RunFlags(M=Fraction(1)))


@pytest.mark.parametrize("text,args,code", [
    (MIN_X1, [], 0),
    (INFEAS, ["--mode", "feas"], 1),
    (INFEAS, [], 1),                      # no c: falls back to feasibility
    ("1 2\n1 -1\nd 1 1\nc -1 0\n", [], 1),  # unbounded
    ("1 2\n1 1 1\nb 1\n", [], 3),
])
def test_exit_codes(tmp_path, capsys, text, args, code):
    assert main([write(tmp_path, text)] + args) == code


def test_restart_limit_exit_code(tmp_path, capsys):
    assert main([write(tmp_path, KAPPA), "--max-restarts", "0"]) == 2


def test_missing_file(capsys):
    assert main(["/nonexistent/instance.txt"]) == 3
    assert main([]) == 3


def test_json_output(tmp_path, capsys):
    assert main([write(tmp_path, MIN_X1), "--json", "--verify"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["outcome"] == "Optimal" and rep["verification"]["rational simplex agrees"] is True


def test_text_output(tmp_path, capsys):
    main([write(tmp_path, KAPPA)])
    out = capsys.readouterr().out
    assert "outcome: Optimal" in out and "M history: 2 -> " in out


def test_stdin(monkeypatch, capsys):
    import io
    monkeypatch.setattr("sys.stdin", io.StringIO(MIN_X1))
    assert main(["-"]) == 0


def test_bench_network_agrees():
    rows = bench("tu-network", [6, 10], seed=3, reps=3)
    assert all(r["agree"] is True and r["lifting_events"] == 0 for r in rows)


def test_bench_high_kappa_restarts():
    rows = bench("high-kappa", [2, 6], seed=1, reps=4)
    assert all(r["agree"] is True and r["restarts"] <= 3 for r in rows)
    assert any(r["restarts"] >= 1 for r in rows)
    for r in rows:
        hist = [Fraction(m) for m in r["M_history"].split()]
        assert all(a < b for a, b in zip(hist, hist[1:]))
        if r["n"] == 2 and len(hist) > 1:
            # one block: the only certificate is the circuit itself, ratio K
            assert hist[1] >= 100 * 2


def test_bench_infeasible_family():
    rows = bench("infeasible", [4, 6], seed=2, reps=3)
    assert all(r["outcome"] == "FarkasPrimal" and r["agree"] is True for r in rows)


def test_bench_csv(capsys):
    assert main(["--mode", "bench", "--family", "random-int", "--sizes", "4", "--reps", "2"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("family,size,rep") and len(lines) == 3
    assert main(["--mode", "bench", "--sizes", "a,b"]) == 3
