import csv
import json

import numpy as np
import pytest

from spikeslab.cli import main, make_parser


@pytest.fixture()
def obs_file(tmp_path):
    rng = np.random.default_rng(0)
    x = rng.normal(size=15)
    x[:3] += 5.0
    path = tmp_path / "obs.txt"
    path.write_text("\n".join(f"{v:.10f}" for v in x) + "\n")
    return path


def test_parser_requires_subcommand():
    with pytest.raises(SystemExit):
        make_parser().parse_args([])


def test_fit_stdout(obs_file, capsys):
    assert main(["fit", str(obs_file), "--prior", "betabin", "--kappa", "0.1"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["n"] == 15
    assert len(payload["mean"]) == 15
    assert len(payload["dim_log_pmf"]) == 16
    assert payload["levels"] == [0.025, 0.975]


def test_fit_to_file(obs_file, tmp_path):
    out = tmp_path / "summary.json"
    assert main(["fit", str(obs_file), "--prior", "binomial", "--alpha", "0.2",
                 "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert len(payload["inclusion_prob"]) == 15


def test_simulate_to_csv(tmp_path):
    out = tmp_path / "table.csv"
    assert main(["simulate", "--n", "30", "--pn", "3", "--amp", "5",
                 "--reps", "2", "--estimators", "HT", "HTO", "PM2",
                 "--out", str(out)]) == 0
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3 * 2  # three estimators, two losses
    assert {r["estimator"] for r in rows} == {"HT", "HTO", "PM2"}


def test_simulate_stdout(capsys):
    assert main(["simulate", "--n", "25", "--pn", "2", "--amp", "4",
                 "--reps", "1", "--estimators", "HT", "--q", "2"]) == 0
    out = capsys.readouterr().out
    assert "HT" in out and "loss=" in out


def test_dim_check(capsys):
    assert main(["dim-check", "--n", "30", "--pn", "2", "--amp", "5",
                 "--M", "0", "2", "5", "--reps", "2"]) == 0
    out = capsys.readouterr().out
    assert "tail mass" in out
    assert "smallest M" in out


def test_contract_check(capsys):
    assert main(["contract-check", "--n", "40", "--pn", "3", "5",
                 "--amp", "5", "--reps", "1"]) == 0
    out = capsys.readouterr().out
    assert "ratio spread" in out


def test_shrink_demo(capsys):
    assert main(["shrink-demo", "--n", "40", "--pn", "3", "--amp", "3", "7",
                 "--reps", "1"]) == 0
    out = capsys.readouterr().out
    assert "laplace=" in out and "gaussian=" in out


def test_intervals_csv(obs_file, tmp_path, capsys):
    out = tmp_path / "iv.csv"
    assert main(["intervals", str(obs_file), "--prior", "betabin",
                 "--out", str(out)]) == 0
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 15
    assert "wrote 15 rows" in capsys.readouterr().out


def test_intervals_empty_input_errors(tmp_path):
    empty = tmp_path / "empty.txt"
    empty.write_text("")
    out = tmp_path / "iv.csv"
    with pytest.raises(ValueError):
        main(["intervals", str(empty), "--out", str(out)])
    assert not out.exists()


def test_fit_student_slab(obs_file, capsys):
    assert main(["fit", str(obs_file), "--slab", "student", "--df", "4"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert all(np.isfinite(payload["median"]))
