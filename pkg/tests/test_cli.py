import csv
import json

import numpy as np
import pytest

from randprio.cli import ExperimentConfig, ConfigError, main
from randprio.core import Instance, load_instance
from randprio.distributions import Uniform
from randprio.generators import gen_iid


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_generate_round_trip(tmp_path, capsys):
    out = tmp_path / "inst.json"
    assert main(["generate", "--n", "4", "--dist", "uniform:0,1", "--seed", "7", "--output", str(out)]) == 0
    inst = load_instance(out)
    assert inst == gen_iid(4, Uniform(), seed=7)
    assert inst.values.tobytes() == gen_iid(4, Uniform(), seed=7).values.tobytes()
    assert "free_entries=8" in capsys.readouterr().out


def test_generate_n2_warns(tmp_path, capsys):
    assert main(["generate", "--n", "2", "--output", str(tmp_path / "i.json")]) == 0
    assert "no free entries" in capsys.readouterr().err


def test_invalid_distribution_exit_code(tmp_path, capsys):
    code = main(["generate", "--n", "4", "--dist", "discrete:0.3,0.7:0.5,0.4", "--output", str(tmp_path / "x.json")])
    assert code == 2
    assert "dist" in capsys.readouterr().err


def test_io_error_exit_code(tmp_path):
    assert main(["generate", "--n", "3", "--output", str(tmp_path / "missing" / "x.json")]) == 3
    assert main(["decompose", "--input", str(tmp_path / "nope.csv")]) == 3


def test_unknown_config_field(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n_list": [3], "trails": 5}))
    assert main(["bounds", "--config", str(cfg)]) == 2
    assert "trails" in capsys.readouterr().err


def test_config_round_trip():
    cfg = ExperimentConfig(n_list=[5, 6], trials=300, seed=9, notion="ratio-of-expectations")
    assert ExperimentConfig.from_json(cfg.to_json()) == cfg
    with pytest.raises(ConfigError, match="notion"):
        ExperimentConfig.from_dict({"notion": "median"})
    with pytest.raises(ConfigError, match="constants"):
        ExperimentConfig.from_dict({"constants": {"C": 0.3}})


def test_ratio_n2_reads_one(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["ratio", "--n", "2", "--trials", "100", "--output", str(out), "--detail"]) == 0
    rows = read_csv(out)
    assert float(rows[0]["mean"]) == 1.0
    assert len(read_csv(tmp_path / "r_detail.csv")) == 100
    assert out.read_bytes().count(b"\r\n") == 2


def test_tail_reports_bound(tmp_path):
    out = tmp_path / "t.csv"
    assert main(["tail", "--n", "100", "--trials", "100", "--rp-samples", "50", "--output", str(out)]) == 0
    row = read_csv(out)[0]
    assert float(row["theoretical_bound"]) == pytest.approx(0.2007, abs=1e-3)
    assert float(row["lambda"]) == pytest.approx(49.133, abs=1e-3)
    assert float(row["empirical_prob"]) <= float(row["theoretical_bound"])


def test_bounds_fields(tmp_path):
    out = tmp_path / "b.json"
    assert main(["bounds", "--n", "3,100", "--output", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["one_over_mu"] == 2.0
    assert rep["rows"][1]["lambda"] == pytest.approx(49.133, abs=1e-3)
    assert main(["bounds", "--n", "3", "--dist", "discrete:0,1:0.9,0.1", "--output", str(out)]) == 0
    assert json.loads(out.read_text())["rows"][0]["theorem2_finite_bound"] == "outside validity window"


def test_adversarial_outputs(tmp_path):
    out = tmp_path / "a.json"
    assert main(["adversarial", "--n", "2", "--iters", "300", "--restarts", "2", "--output", str(out)]) == 0
    assert json.loads(out.read_text())["ratio"] == 1.0
    assert main(["adversarial", "--n", "2", "--mode", "box", "--iters", "400", "--restarts", "3",
                 "--output", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["ratio"] >= 1.3
    assert Instance.from_dict(rep["instance"]).mode.value == "box"
    assert len(read_csv(tmp_path / "a_trace.csv")) == 1200


def test_decompose_instance_and_csv(tmp_path):
    inst_path = tmp_path / "i.json"
    assert main(["generate", "--n", "4", "--seed", "3", "--output", str(inst_path)]) == 0
    out = tmp_path / "d.json"
    assert main(["decompose", "--input", str(inst_path), "--output", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["max_error"] <= 1e-9 and len(rep["terms"]) <= 10
    alloc = tmp_path / "x.csv"
    alloc.write_text("0.5,0.5\r\n0.5,0.5\r\n")
    assert main(["decompose", "--input", str(alloc), "--output", str(out)]) == 0
    assert len(json.loads(out.read_text())["terms"]) == 2
