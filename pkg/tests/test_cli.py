import json
import subprocess
import sys

import pytest

from helpers import FIXTURES
from predkit.cli import run
from predkit.report import RunReport

TICKET = str(FIXTURES / "ticket.pm")
TWO = str(FIXTURES / "two_step.pm")


@pytest.fixture
def zpreds(tmp_path):
    p = tmp_path / "z.preds"
    p.write_text("# split of z <= 1\nz = 1\nz < 1\n")
    return str(p)


def test_check_with_predicates(zpreds, capsys):
    assert run(["check", "--model", TICKET, "--n", "2", "--prop", "AG(z<=1)",
                "--preds", zpreds]) == 0
    assert capsys.readouterr().out.strip() == "Holds"


def test_check_not_shown_and_nonconvergent(zpreds, capsys):
    assert run(["check", "--model", TICKET, "--n", "2", "--prop", "AG(z<1)",
                "--preds", zpreds]) == 1
    assert run(["check", "--model", TICKET, "--n", "2", "--prop", "AG(z<=1)",
                "--max-iter", "3", "--widen-after", "0"]) == 2
    assert capsys.readouterr().out.split()[-1] == "Nonconvergent(3)"


@pytest.mark.parametrize("argv", [
    ["check", "--model", TICKET, "--prop", "AG(z<=1)", "--bogus"],
    [],
    ["frobnicate"],
    ["check", "--model", TICKET, "--n", "0", "--prop", "AG(z<=1)"],
    ["trlimp", "--model", TWO, "-k", "0"],
])
def test_usage_errors(argv):
    with pytest.raises(SystemExit) as ei:
        code = run(argv)
        raise SystemExit(code)
    assert ei.value.code == 64


def test_input_errors(tmp_path):
    bad = tmp_path / "bad.pm"
    bad.write_text("model m\nvar x : int\ninit y = 0\nrelation t: x' = x\n")
    assert run(["check", "--model", str(bad), "--prop", "AG(x <= 0)"]) == 65
    assert run(["check", "--model", str(tmp_path / "none.pm"), "--prop", "AG(x<=0)"]) == 66
    assert run(["check", "--model", TWO, "--prop", "AG(q <= 0)"]) == 65
    # existential operators are outside ACTL
    assert run(["check", "--model", TWO, "--prop", "EF(r = 1)"]) == 65


def test_trlimp_scores_json(tmp_path, capsys):
    out = tmp_path / "scores.json"
    assert run(["trlimp", "--model", TWO, "--prop", "AG(r<=1)", "-k", "2",
                "--emit", str(out)]) == 0
    rep = json.loads(out.read_text())
    t = rep["matrices"]["trlimp"]
    assert t["IS"][t["preds"].index("r <= 1")] == 2
    assert rep["config"]["preds"]
    assert "imprecision scores" in capsys.readouterr().out


def test_trlimp_no_feasible_config(tmp_path):
    p = tmp_path / "r.preds"
    p.write_text("r <= 1\n")
    assert run(["trlimp", "--model", TWO, "--preds", str(p), "-k", "1"]) == 3


def test_compat_and_report(tmp_path, capsys):
    out = tmp_path / "matrix.json"
    assert run(["compat", "--model", TWO, "--small-n", "2", "--prop", "AG(r<=1)",
                "-k", "2", "--emit", str(out)]) == 0
    capsys.readouterr()
    assert run(["report", str(out)]) == 0
    text = capsys.readouterr().out
    assert "✓" in text and "chosen:" in text
    m = json.loads(out.read_text())["matrices"]["compat"]["matrix"]
    assert all(m[i][j] == m[j][i] for i in range(len(m)) for j in range(len(m)))


def test_report_round_trip(tmp_path):
    r = RunReport(["x"], "abc", ["z = 1"], {"check": 0.5}, {"large": "Holds"},
                  {"preds": ["z = 1"], "num_vars": 1, "score": 0}, {})
    assert RunReport.from_json(r.to_json()) == r


def test_reports_are_deterministic(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        run(["choose", "--heuristic", "trlimp", "--model", TWO, "--n", "2", "--small-n", "2",
             "--prop", "AG(r<=1)", "-k", "2", "--no-scope-exclusion", "--emit", str(out)])
        outs.append(RunReport.from_json(out.read_text()))
    a, b = (o.deterministic_part() for o in outs)
    assert a["command"] != b["command"]  # emit paths differ
    a.pop("command"), b.pop("command")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_abstract_prints_model(zpreds, capsys):
    assert run(["abstract", "--model", TICKET, "--n", "2", "--preds", zpreds,
                "--prop", "AG(z<=1)"]) == 0
    out = capsys.readouterr().out
    assert "var b1, b2 : bool" in out and "z'" not in out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "predkit", "check", "--model", TWO,
                          "--prop", "AG(r <= 1)"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "Holds"
