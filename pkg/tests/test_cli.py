import json

import pytest

from cmtrace.cli import main


def test_finite_check(capsys, tmp_path):
    out = tmp_path / "finite.json"
    code = main(["finite-check", "--p", "5", "--dk", "-7", "--json", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "3 fibers of size 2" in text
    payload = json.loads(out.read_text())
    assert payload["passed"] and payload["fiber_count"] == 3


def test_classgroup(capsys, tmp_path):
    out = tmp_path / "cg.json"
    code = main(["classgroup", "--disc", "-23", "--json", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["h"] == 3
    assert [1, 1, 6] in payload["forms"]


def test_heegner_success_and_failure(capsys, tmp_path):
    out = tmp_path / "h.json"
    code = main(["heegner", "--n", "49", "--dk", "-11", "--c", "7", "--json", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["form"] == [49, 49, 15]
    code = main(["heegner", "--n", "49", "--dk", "-11", "--c", "1"])
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_sign(capsys):
    code = main(["sign", "--curve", "1,-1,0,-2,-1", "--q", "49", "--digits", "30"])
    assert code == 0
    assert "w_49 = -1" in capsys.readouterr().out


def test_trace_run(capsys, tmp_path):
    out = tmp_path / "trace.json"
    code = main(["trace", "--curve", "1,-1,0,-2,-1", "--dk", "-11", "--f", "1",
                 "--digits", "40", "--mode", "signo_minus", "--json", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "verdict: torsion" in text
    payload = json.loads(out.read_text())
    assert payload["verdict"] == "torsion"
    assert payload["wp"] == -1
    assert payload["finite_shadow"]["passed"]
    assert len(payload["orbit"]) == 8


def test_trace_hypothesis_error(capsys):
    code = main(["trace", "--curve", "1,-1,0,-2,-1", "--dk", "-19", "--digits", "30"])
    assert code == 1


def test_bad_curve_argument():
    with pytest.raises(SystemExit):
        main(["sign", "--curve", "1,2,3", "--q", "49"])


def test_env_digits_default(monkeypatch, capsys):
    monkeypatch.setenv("CMTRACE_DIGITS", "25")
    code = main(["sign", "--curve", "1,-1,0,-2,-1", "--q", "49"])
    assert code == 0
    assert "w_49 = -1" in capsys.readouterr().out


def test_trace_undecided_exit_code(tmp_path):
    out = tmp_path / "undecided.json"
    code = main(["trace", "--curve", "0,-1,1,-7,10", "--dk", "-67", "--f", "2",
                 "--digits", "40", "--json", str(out)])
    assert code == 2
    payload = json.loads(out.read_text())
    assert payload["verdict"] == "undecided"
