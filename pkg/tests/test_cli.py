import csv
import json

import pytest

from posbvp.cli import main
from posbvp.config import ConfigError, load_config

NEG = """\
[problem]
L = 1

[problem.weight]
family = constant
value = -1

[problem.nonlinearity]
family = power
p = 3

[task]
name = solve
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_bundled_configs_load():
    for name in ("fig1", "fig2", "radial-n3", "constant-weight"):
        cfg = load_config(name)
        assert cfg.problem is not None
    assert load_config("radial-n3").radial.N == 3
    assert load_config("fig1", "eigen").task == "eigen"


def test_fig1_check(tmp_path, capsys):
    assert main(["--config", "fig1", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["overall"] == "pass"
    assert rep["hypotheses"]["h3"]["case"] == "NonNegative"


def test_fig2_poincare_csv(tmp_path):
    assert main(["--config", "fig2", "--out", str(tmp_path), "--threads", "2"]) == 0
    with open(tmp_path / "poincare.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["c", "uL", "vL", "escaped", "positive_interior"]
    assert len(rows) == 482
    assert float(rows[-1][0]) == 16.0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["n"] == 481 and rep["n_sign_changes"] >= 1


def test_negative_weight_exits_two(tmp_path):
    cfg = write(tmp_path, "neg.ini", NEG)
    out = tmp_path / "out"
    assert main(["--config", str(cfg), "--out", str(out)]) == 2
    rep = json.loads((out / "report.json").read_text())
    assert rep["hypotheses"]["h4"]["verdict"] == "fail"
    assert rep["hypotheses"]["h4"]["items"] == []


def test_config_error_exits_one(tmp_path, capsys):
    cfg = write(tmp_path, "bad.ini", NEG.replace("family = constant", "family = sinn"))
    assert main(["--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    err = capsys.readouterr().err
    assert "bad.ini:5" in err and "[problem.weight]" in err
    assert not (tmp_path / "o").exists()


@pytest.mark.parametrize(
    "edit, needle",
    [
        (("name = solve", "name = dance"), "unknown task"),
        (("p = 3", "p = 3/"), "[problem.nonlinearity] p"),
        (("[task]", "[tsk]"), "unknown section"),
        (("value = -1", "value = -1\npartition = 0.5:0.2"), "partition"),
    ],
)
def test_config_diagnostics(tmp_path, edit, needle):
    cfg = write(tmp_path, "c.ini", NEG.replace(*edit))
    with pytest.raises(ConfigError) as info:
        load_config(cfg)
    assert needle in str(info.value)


def test_missing_file():
    assert main(["--config", "/nonexistent.ini"]) == 1


def test_report_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["--config", "fig1", "--out", str(a)])
    main(["--config", "fig1", "--out", str(b)])
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()


def test_eigen_task(tmp_path):
    cfg = write(
        tmp_path,
        "e.ini",
        """\
[problem]
L = 1
[problem.weight]
family = sin
k = 3
[problem.nonlinearity]
family = power
p = 3
[task]
name = eigen
weight_kind = positive
intervals = 0:1/3, 2/3:1
[output]
precision = 10
format = csv
""",
    )
    assert main(["--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    lams = [r["lambda"] for r in rep["results"]]
    assert lams[0] == pytest.approx(104.1402, rel=1e-5)
    assert lams[0] == pytest.approx(lams[1], rel=1e-7)
    assert (tmp_path / "o" / "eigenfunction_2.csv").exists()


def test_lambda_scan_task(tmp_path):
    assert main(["--config", "fig1", "--task", "lambda-scan", "--out", str(tmp_path)]) == 0
    with open(tmp_path / "lambda_scan.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert all(r["verdict"] == r["predicted"] for r in rows)


def test_table_family_and_min(tmp_path):
    (tmp_path / "a.csv").write_text("x,a\n0,1\n0.5,-1\n1,1\n")
    cfg = write(
        tmp_path,
        "t.ini",
        """\
[problem]
L = 1
[problem.weight]
family = table
file = a.csv
[problem.nonlinearity]
family = min(power, arctan)
power.p = 3
arctan.k = 50
[task]
name = check
""",
    )
    cfg_obj = load_config(cfg)
    w = cfg_obj.problem.weight
    assert w(0.25) == pytest.approx(0.0)
    assert cfg_obj.problem.nonlinearity(2.0) == pytest.approx(min(8.0, 100 * __import__("math").atan(2.0)))
    assert cfg_obj.problem.weight.sign_partition.m == 2
