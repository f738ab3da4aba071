import json
import os

import numpy as np
import pytest

from tomocert.bloch import to_bloch, zero_state
from tomocert.cli import main
from tomocert.io import design_from_json, dumps, frequencies_to_csv, matrix_to_json
from tomocert.measurement import FrequencyVector, born_probabilities


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def read(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_simulate_writes_files(workdir):
    assert main(["simulate", "--qubits", "1", "--eta", "0.9", "--n", "2500", "--state", "zero",
                 "--seed", "7", "--out", "run1"]) == 0
    text = (workdir / "run1" / "frequencies.csv").read_text()
    assert text.startswith("# tomocert")
    rows = [line.split(",") for line in text.splitlines() if not line.startswith("#")][1:]
    per_setting = {}
    for j, _, c, _ in rows:
        per_setting[j] = per_setting.get(j, 0) + int(c)
    assert per_setting == {"0": 2500, "1": 2500, "2": 2500}
    side = json.loads((workdir / "run1" / "design.json").read_text())
    assert side["seed"] == 7 and side["state"]["name"] == "zero"
    assert "invocation" in side["metadata"]


def test_simulate_is_byte_identical(workdir):
    argv = ["simulate", "--qubits", "2", "--eta", "0.8", "--n", "100", "--state", "ghz", "--seed", "3", "--out", "r"]
    assert main(argv) == 0
    first = [read("r/frequencies.csv"), read("r/design.json")]
    assert main(argv) == 0
    assert [read("r/frequencies.csv"), read("r/design.json")] == first


def test_simulate_rejects_bad_eta(workdir, capsys):
    assert main(["simulate", "--eta", "1.3", "--n", "10", "--out", "r"]) == 2
    assert "--eta" in capsys.readouterr().err


def test_simulate_state_file(workdir):
    (workdir / "plus.json").write_text(json.dumps(matrix_to_json(np.full((2, 2), 0.5))))
    assert main(["simulate", "--n", "50", "--state-file", "plus.json", "--out", "r"]) == 0
    (workdir / "bad.json").write_text(json.dumps(matrix_to_json(np.diag([1.5, -0.5]))))
    assert main(["simulate", "--n", "50", "--state-file", "bad.json", "--out", "r"]) == 2


def test_estimate_noiseless_inversion(workdir):
    main(["simulate", "--qubits", "1", "--eta", "0.9", "--n", "10", "--out", "run"])
    design = design_from_json(json.loads((workdir / "run" / "design.json").read_text())["design"])
    s_true = to_bloch(zero_state(1), design.basis)
    f = FrequencyVector.from_frequencies(design, born_probabilities(design, s_true))
    (workdir / "run" / "frequencies.csv").write_text(frequencies_to_csv(design, f))
    assert main(["estimate", "--run", "run"]) == 0
    doc = json.loads((workdir / "run" / "estimate.json").read_text())
    assert np.max(np.abs(np.array(doc["s_enm"]) - s_true)) <= 1e-9
    assert "cls" not in doc


def test_estimate_cls_and_target(workdir, capsys):
    main(["simulate", "--qubits", "2", "--eta", "0.9", "--n", "200", "--state", "zero", "--seed", "1", "--out", "run"])
    (workdir / "target.json").write_text(dumps(matrix_to_json(zero_state(2))))
    assert main(["estimate", "--run", "run", "--cls", "--target", "target.json"]) == 0
    doc = json.loads((workdir / "run" / "estimate.json").read_text())
    assert doc["cls"]["iterations"] >= 1
    assert set(doc["target_distance_enm"]) == {"hs", "trace", "infidelity"}
    assert "trace(target, ENM)" in capsys.readouterr().out


def test_estimate_missing_sidecar(workdir):
    os.makedirs("empty")
    assert main(["estimate", "--run", "empty"]) == 2


def test_estimate_not_ic(workdir):
    main(["simulate", "--n", "10", "--eta", "0", "--out", "run"])
    assert main(["estimate", "--run", "run"]) == 3


def test_certify_headline(capsys):
    assert main(["certify", "--qubits", "1", "--eta", "0.9", "--delta", "0.07", "--N", "7500", "--loss", "trace"]) == 0
    assert "= 0.99196" in capsys.readouterr().out


def test_certify_preparation_bounds(workdir, capsys):
    main(["simulate", "--qubits", "1", "--eta", "0.9", "--n", "2500", "--state", "zero", "--seed", "2", "--out", "run"])
    main(["estimate", "--run", "run"])
    (workdir / "target.json").write_text(dumps(matrix_to_json(zero_state(1))))
    capsys.readouterr()
    assert main(["certify", "--qubits", "1", "--eta", "0.9", "--delta", "0.07", "--N", "7500",
                 "--target", "target.json", "--est", "run/estimate.json", "--xi", "0.01", "--out", "rep.json"]) == 0
    assert "trace(target, prepared) <=" in capsys.readouterr().out
    rep = json.loads((workdir / "rep.json").read_text())
    prep = rep["preparation"]
    assert prep["bound"] == pytest.approx(prep["distance_target_estimate"] + 0.01 + 0.07)
    assert main(["certify", "--qubits", "1", "--eta", "0.9", "--delta", "0.07", "--N", "7500", "--loss", "infidelity",
                 "--target", "target.json", "--est", "run/estimate.json", "--out", "inf.json"]) == 0
    prep = json.loads((workdir / "inf.json").read_text())["preparation"]
    assert prep["fidelity_bound"] == pytest.approx(1 - 2 * (prep["trace_distance_target_estimate"] + 0.07))
    assert "fidelity(target, prepared) >=" in capsys.readouterr().out


def test_certify_cls_and_errors(capsys):
    assert main(["certify", "--qubits", "2", "--eta", "0.8", "--delta", "0.1", "--N", "100000", "--cls"]) == 0
    assert "CLS" in capsys.readouterr().out
    assert main(["certify", "--qubits", "1", "--eta", "0.9"]) == 2
    assert main(["certify", "--qubits", "1", "--eta", "0.9", "--delta", "-1"]) == 2
    assert main(["certify", "--qubits", "1", "--eta", "0.0", "--delta", "0.1"]) == 3


def test_plan(capsys):
    assert main(["plan", "--qubits", "1", "--eta", "0.9", "--delta", "0.07", "--target-cl", "0.99"]) == 0
    out = capsys.readouterr().out
    assert "N = 7253" in out
    assert main(["plan", "--delta", "0.07", "--target-cl", "1.5"]) == 2


def test_config_file_and_flag_precedence(workdir, capsys):
    (workdir / "cfg.json").write_text(json.dumps({"qubits": 1, "eta": 0.9, "delta": 0.07, "target_cl": 0.5}))
    assert main(["plan", "--config", "cfg.json"]) == 0
    from_cfg = capsys.readouterr().out
    assert main(["plan", "--config", "cfg.json", "--target-cl", "0.99"]) == 0
    assert "N = 7253" in capsys.readouterr().out and "N = 7253" not in from_cfg
    assert main(["plan", "--config", "missing.json"]) == 2


def test_figure2(workdir):
    assert main(["figure2", "--out", "fig2.csv"]) == 0
    lines = [x for x in (workdir / "fig2.csv").read_text().splitlines() if not x.startswith("#")]
    assert lines[0] == "k,eta,N,n_per_setting,cl,one_minus_cl"
    rows = [x.split(",") for x in lines[1:]]
    assert len({(r[0], r[1]) for r in rows}) == 6
    first = read("fig2.csv")
    main(["figure2", "--out", "fig2.csv"])
    assert read("fig2.csv") == first
    assert main(["figure2", "--etas", "1.2"]) == 2


def test_validate_smoke_and_rerun(workdir):
    argv = ["validate", "--qubits", "1", "--etas", "0.9", "--trials", "1", "--seed", "5", "--out", "v"]
    assert main(argv) in (0, 4)
    first = read("v/coverage.csv")
    main(argv)
    assert read("v/coverage.csv") == first
    doc = json.loads(read("v/coverage.json"))
    assert len(doc["rows"]) == 2 * 3 * 3


def test_validate_small_grid_passes(workdir):
    assert main(["validate", "--qubits", "1", "--etas", "1.0", "--trials", "200", "--n-values", "300", "900",
                 "--states", "zero", "mixed"]) == 0


def test_argparse_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--qubits", "two"])
    assert exc.value.code == 2
