import json
import math
import subprocess
import sys

import pytest

from brackets import cli
from brackets.numerics.quadrature import QuadratureResult
from brackets.pipelines import PIPELINES
from brackets.series_eval import NoAssignment


def run_main(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_symbolic_run_json(capsys):
    code, out, _ = run_main(capsys, "run", "direct3", "--json", "--explain")
    assert code == 0
    data = json.loads(out)
    assert data["alpha"] == "symbolic"
    assert not data["closed_form"]["divergent"]
    e2 = [r for r in data["trace"] if r["rule"] == "E2"]
    assert len(e2) == 1 and e2[0]["details"]["abs_determinant"] == "6"


def test_json_output_is_byte_identical(capsys):
    _, first, _ = run_main(capsys, "run", "mixed-bracketized-gamma", "--json", "--explain",
                           "--alpha", "5", "--beta", "1")
    _, second, _ = run_main(capsys, "run", "mixed-bracketized-gamma", "--json", "--explain",
                            "--alpha", "5", "--beta", "1")
    assert first == second


def test_explain_text_shows_contour_solution(capsys):
    code, out, _ = run_main(capsys, "run", "mellin-barnes", "--explain")
    assert code == 0
    assert "s* = alpha/3 + beta/3" in out and "z* = alpha/3 - 2*beta/3" in out


def test_verify_run(capsys):
    code, out, _ = run_main(capsys, "run", "divergent-null", "--alpha", "5", "--beta", "1",
                            "--verify", "--json")
    data = json.loads(out)
    assert code == 0
    assert abs(data["value"] + math.pi / 12) < 1e-14
    assert data["verification"]["agrees"]
    assert data["verification"]["relative_difference"] <= 1e-3


def test_verify_needs_concrete_parameters(capsys):
    code, _, err = run_main(capsys, "run", "direct3", "--verify")
    assert code == cli.EXIT_USAGE and "--verify" in err


def test_verify_outside_region_rejected(capsys):
    code, _, err = run_main(capsys, "run", "direct3", "--verify", "--alpha", "1", "--beta", "1")
    assert code == cli.EXIT_USAGE


def test_bad_tolerance_and_params(capsys):
    assert run_main(capsys, "run", "direct3", "--tol", "0")[0] == cli.EXIT_USAGE
    assert run_main(capsys, "run", "mellin-param", "--mellin-params", "0,0,2,0")[0] == cli.EXIT_USAGE
    assert run_main(capsys, "run", "mellin-param", "--mellin-params", "1,2")[0] == cli.EXIT_USAGE
    assert run_main(capsys, "run", "nope")[0] == cli.EXIT_USAGE


def test_mellin_params_flag(capsys):
    code, out, _ = run_main(capsys, "run", "mellin-param", "--mellin-params", "3,1/2,-1,2", "--json")
    assert code == 0
    assert json.loads(out)["mellin_params"] == ["3", "1/2", "-1", "2"]


def test_divergent_point_exit_code(capsys):
    code, out, _ = run_main(capsys, "run", "direct3", "--alpha", "0", "--beta", "0", "--json")
    assert code == cli.EXIT_DIVERGENT
    assert json.loads(out)["value"] is None


def test_no_assignment_exit_code(capsys, monkeypatch):
    def boom(*_a, **_k):
        raise NoAssignment("singular bracket system")

    monkeypatch.setattr(cli, "run", boom)
    code, out, _ = run_main(capsys, "run", "direct3", "--json")
    assert code == cli.EXIT_NO_ASSIGNMENT
    assert json.loads(out)["error"]["type"] == "NoAssignment"


def test_mismatch_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(cli, "quad_2d_main_integral",
                        lambda *a, **k: QuadratureResult(-0.3, 1e-6, 225, True))
    code, _, _ = run_main(capsys, "run", "direct3", "--alpha", "5", "--beta", "1", "--verify")
    assert code == cli.EXIT_MISMATCH


def test_compare_numeric(capsys):
    code, out, _ = run_main(capsys, "compare", "--alpha", "5", "--beta", "1", "--json")
    data = json.loads(out)
    assert code == 0
    assert data["pipelines"] == list(PIPELINES)
    assert len(data["matrix"]) == 7 and all(len(r) == 7 for r in data["matrix"])
    assert all(v <= 1e-10 for r in data["matrix"] for v in r)
    assert data["quadrature_agrees"]
    assert all(v <= 1e-3 for v in data["quadrature_column"].values())


def test_compare_symbolic(capsys):
    code, out, _ = run_main(capsys, "compare", "--json")
    data = json.loads(out)
    assert code == 0 and data["all_agree"]
    assert all(v is True for r in data["matrix"] for v in r)
    texts = {row["closed_form"] for row in data["rows"].values()}
    assert len(texts) == 1


def test_compare_empty_subset_is_error(capsys):
    code, _, err = run_main(capsys, "compare", "--pipelines", "")
    assert code == cli.EXIT_USAGE and "at least one pipeline" in err
    with pytest.raises(cli.ConfigError):
        cli.compare_all(5, 1, pipelines=[])


def test_compare_isolates_failing_rows(monkeypatch):
    real = cli.run

    def flaky(p, *a):
        if p == "mellin-param":
            raise RuntimeError("broken route")
        return real(p, *a)

    monkeypatch.setattr(cli, "run", flaky)
    report = cli.compare_all(5, 1, quadrature=False)
    assert "error" in report["rows"]["mellin-param"]
    assert report["rows"]["direct3"]["value"] == pytest.approx(-math.pi / 12, rel=1e-14)
    assert not report["all_agree"]


def test_list_reps(capsys):
    code, out, _ = run_main(capsys, "list-reps", "--json")
    data = json.loads(out)
    assert code == 0
    kinds = {(r["function"], r["kind"]) for r in data}
    assert ("K0", "null") in kinds and ("Ei", "bracket-series-2index") in kinds
    assert len(data) == 9


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "brackets.cli", "run", "direct3", "--json"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["pipeline"] == "direct3"
