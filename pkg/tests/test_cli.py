import json

import pytest
from pytest import approx

from fynet.cli import main
from fynet.modules.Multigraph import fixture, save_graph


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_bounds_qubit(capsys):
    code, out, _ = run(capsys, "bounds", "--d", "2", "--beta", "1")
    assert code == 0
    desc = json.loads(out)
    assert desc["ub2"] == approx(0.9)
    assert desc["ub1"] == approx(0.95711, abs=1.0e-5)


def test_standardize_graph_file(capsys, tmp_path):
    path = tmp_path / "k3.json"
    save_graph(fixture("k3"), path)
    code, out, _ = run(capsys, "standardize", "--graph", str(path))
    assert code == 0
    desc = json.loads(out)
    assert desc["beta"] == 1
    assert len(desc["lc_sequence"]) == 1
    assert desc["class"] is None


def test_standardize_reports_class(capsys):
    code, out, _ = run(capsys, "standardize", "--fixture", "twin5")
    assert code == 0
    desc = json.loads(out)
    assert desc["class"] in {"G0", "G1", "G2", "G3"}


def test_classify_fixture(capsys):
    code, out, _ = run(capsys, "classify", "--fixture", "twin5")
    assert code == 0
    assert json.loads(out)["class"] == "G1"


def test_usage_error(capsys):
    code, _, err = run(capsys, "bounds", "--format", "xml")
    assert code == 2
    assert "invalid choice" in err


def test_domain_error_is_reported(capsys):
    code, out, err = run(capsys, "bounds", "--d", "4", "--beta", "1")
    assert code == 1
    assert out == ""
    desc = json.loads(err.strip().splitlines()[-1])
    assert desc["error"] == "CompositeModulusError"


def test_missing_graph(capsys):
    code, _, err = run(capsys, "standardize")
    assert code == 1
    assert "--graph" in err


def test_protocol_p3(capsys):
    code, out, _ = run(capsys, "protocol", "--which", "p3", "--k", "2")
    assert code == 0
    desc = json.loads(out)
    assert desc["fidelity"] == approx(0.5)
    assert desc["d"] == 4


def test_figur_test(capsys):
    code, out, _ = run(capsys, "figur-test", "--samples", "20")
    assert code == 0
    assert json.loads(out)["failed"] == 0


def test_sweep_csv(capsys):
    code, out, _ = run(capsys, "bounds", "--sweep", "--primes", "2,3", "--betas", "1,5", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "d,beta,ub1,ub2,improvement,gap_ratio"
    assert len(lines) == 5
    assert lines[1].startswith("2,1,")


def test_output_file(capsys, tmp_path):
    path = tmp_path / "report.json"
    code, out, _ = run(capsys, "bounds", "--d", "3", "--beta", "5", "--output", str(path))
    assert code == 0
    assert out == ""
    assert json.loads(path.read_text())["beta"] == 5


@pytest.mark.slow
def test_bell_table_records_seed(capsys):
    code, out, _ = run(capsys, "bell", "--table", "--source-dims", "2", "--restarts", "4", "--seed", "11", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("seed,#,C,Q")
    assert all(line.startswith("11,") for line in lines[1:])


@pytest.mark.parametrize("argv", [["protocol", "--which", "p1", "--t", "2", "--restarts", "2"], ["figur-test", "--samples", "10"]])
def test_same_arguments_same_output(capsys, argv):
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second
