import json
import subprocess
import sys

import pytest

from mequilibrium import fixtures
from mequilibrium.cli import EXIT_CAPABILITY, EXIT_OK, EXIT_VALIDATION, main


def run(tmp_path, *argv, name="out.json"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out), "--force"])
    return code, (json.loads(out.read_text()) if code == EXIT_OK else None), out


def test_msets_exact(tmp_path):
    code, doc, _ = run(tmp_path, "msets", "--game", "coord", "--symmetric", "--plot", str(tmp_path / "c.svg"))
    assert code == EXIT_OK and doc["count"] >= 2
    assert (tmp_path / "c.svg").read_text().startswith("<svg")


def test_msets_sampled_byte_identical(tmp_path):
    args = ["msets", "--game", "three_player", "--mode", "sampled", "--samples", "20000", "--seed", "3"]
    _, _, a = run(tmp_path, *args, name="a.json")
    _, _, b = run(tmp_path, *args, name="b.json")
    assert a.read_bytes() == b.read_bytes()


def test_sampled_requires_seed(tmp_path):
    code, _, _ = run(tmp_path, "msets", "--game", "coord", "--mode", "sampled")
    assert code == EXIT_VALIDATION


def test_capability_exit_code(tmp_path):
    code, _, _ = run(tmp_path, "msets", "--game", "three_player")
    assert code == EXIT_CAPABILITY


def test_unknown_game_exit_code(tmp_path):
    assert run(tmp_path, "nash", "--game", "nosuch")[0] == EXIT_VALIDATION


def test_refuses_overwrite(tmp_path):
    out = tmp_path / "x.json"
    out.write_text("keep")
    assert main(["nash", "--game", "coord", "--out", str(out)]) == EXIT_VALIDATION
    assert out.read_text() == "keep"


def test_nash_and_beaune(tmp_path):
    code, doc, _ = run(tmp_path, "nash", "--game", "amp", "--beaune", "1/6,5/6;5/6,1/6")
    assert code == EXIT_OK
    assert len(doc["equilibria"]) == 1


def test_mu_sweep(tmp_path):
    code, doc, _ = run(tmp_path, "mu-sweep", "--game", "chicken", "--rho", "0,1,2,5")
    assert code == EXIT_OK and doc["command"] == "mu-sweep"


def test_qre_trace(tmp_path):
    code, doc, _ = run(tmp_path, "qre-trace", "--game", "nl")
    assert code == EXIT_OK
    assert doc["dominance_bound"]["holds"] is True


def test_stability(tmp_path):
    code, doc, _ = run(tmp_path, "stability", "--game", "coord", "--choice", "9/10,1/10;9/10,1/10",
                       "--trials", "50", "--seed", "1")
    assert code == EXIT_OK and doc["seed"] == 1


def test_elicit_sim(tmp_path):
    code, doc, _ = run(tmp_path, "elicit-sim", "--trials", "100000", "--seed", "2")
    assert code == EXIT_OK
    assert abs(doc["empirical_rate"] - 0.75) <= 3 * doc["std_error"]
    assert doc["win_probability"] == "3/4"


def test_cluster_and_classify(tmp_path):
    data = tmp_path / "obs.csv"
    fixtures.synth_dataset(fixtures.load("coord"), fixtures.SynthConfig(n_subjects=8, rounds=10, seed=1),
                           data, game_id="coord")
    code, doc, _ = run(tmp_path, "cluster", "--data", str(data), "--k", "2", "--restarts", "10", "--seed", "4")
    assert code == EXIT_OK and sum(doc["clustering"]["sizes"]) == 80
    code, doc, _ = run(tmp_path, "classify", "--game", "coord", "--data", str(data), "--symmetric",
                       "--k", "2", "--restarts", "10", "--seed", "4", name="cls.json")
    assert code == EXIT_OK and doc["report"]["clusters"]


def test_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("MEQ_THREADS", "3")
    _, doc, _ = run(tmp_path, "nash", "--game", "coord")
    assert doc["threads"] == 3


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "mequilibrium.cli", "nash", "--game", "coord"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["command"] == "nash"
