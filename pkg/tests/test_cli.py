import json

from atiyah.cli import bundled_scenarios, main


def test_list(capsys):
    assert main(["list"]) == 0
    assert "p3_martinet.scn" in capsys.readouterr().out
    assert len(bundled_scenarios()) == 3


def test_run_text_and_json(capsys):
    assert main(["run", "p3_martinet"]) == 0
    assert "PASSED" in capsys.readouterr().out
    assert main(["run", "curve_line_bundle", "--json", "--seed", "4"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["passed"] and doc["residue_exact"] == "3" and doc["seed"] == 4


def test_numeric_only(capsys):
    assert main(["run", "p3_martinet", "--numeric-only", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["residue_exact"] is None
    assert abs(doc["residue_numeric"][0] - 1) < 1e-9


def test_check(capsys):
    assert main(["check", "p3_martinet"]) == 0
    out = capsys.readouterr().out
    assert "3 charts, 4 cover sets, 2 nonempty cycles" in out


def test_failing_expectation_sets_exit_code(tmp_path, capsys):
    from conftest import bundled_text
    path = tmp_path / "wrong.scn"
    path.write_text(bundled_text("curve_line_bundle.scn").replace("residue = 3", "residue = 4"))
    assert main(["run", str(path)]) == 1
    assert "[FAIL] residue" in capsys.readouterr().out


def test_errors_exit_2(tmp_path, capsys):
    path = tmp_path / "empty.scn"
    path.write_text("")
    assert main(["check", str(path)]) == 2
    assert main(["run", str(tmp_path / "missing.scn")]) == 2


def test_suite(capsys):
    assert main(["suite", "algebra", "--trials", "3", "--seed", "1"]) == 0
    assert "failures: 0" in capsys.readouterr().out
