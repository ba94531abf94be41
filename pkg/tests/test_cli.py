"""Command-line behaviour: examples, exit codes, and golden outputs for one pinned config per command."""

import json
import os
from pathlib import Path

import pytest

from juntalearn.cli import main
from juntalearn.experiments import strip_wall_time

GOLDEN = Path(__file__).parent / "golden"
REGEN = os.environ.get("JUNTALEARN_REGEN_GOLDEN") == "1"

PINNED = {
    "gen.json": ["gen", "--type", "junta", "--n", "16", "--k", "3", "--seed", "9"],
    "learn.csv": ["learn", "--n", "10", "--k", "2", "--eps", "0.2", "--trials", "6", "--seed", "3"],
    "test.csv": ["test", "--s", "16", "--dist", "0.5", "--trials", "10", "--seed", "4"],
    "reduce_lpn_to_ljd.csv": ["reduce", "lpn-to-ljd", "--n", "8", "--S", "1,4", "--eta", "0.2", "--trials", "2",
                              "--seed", "5"],
    "reduce_ljd_to_lpn.csv": ["reduce", "ljd-to-lpn", "--n", "8", "--k", "2", "--eps", "0.2", "--rounds", "12",
                              "--trials", "2", "--seed", "6"],
    "reduce_lpdn_to_lpn.csv": ["reduce", "lpdn-to-lpn", "--n", "8", "--k", "2", "--trials", "3", "--seed", "7"],
    "calibrate.json": ["calibrate", "--which", "tester", "--trials", "40", "--seed", "0"],
    "bench.csv": ["bench", "--sweep", "n", "--values", "8,16", "--k", "2", "--eps", "0.3", "--trials", "10",
                  "--seed", "1"],
}


def _normalize(name: str, text: str):
    if name.endswith(".csv"):
        return strip_wall_time(text)
    doc = json.loads(text)
    doc.get("calibration", {}).pop("wall_time", None)
    return doc


@pytest.mark.parametrize("name", sorted(PINNED))
def test_golden(name, tmp_path):
    out = tmp_path / name
    assert main(PINNED[name] + ["--out", str(out)]) == 0
    got = out.read_text()
    if REGEN:
        (GOLDEN / name).write_text(got)
    assert _normalize(name, got) == _normalize(name, (GOLDEN / name).read_text())


def _gen(tmp_path, *args):
    out = tmp_path / "d.json"
    assert main(["gen", *args, "--out", str(out)]) == 0
    return json.loads(out.read_text())


class TestGen:
    def test_noisy_parity(self, tmp_path):
        doc = _gen(tmp_path, "--type", "noisy-parity", "--n", "16", "--J", "2,5,11", "--eta", "0.1", "--seed", "7")
        assert doc["J"] == [2, 5, 11]
        (entry,) = [b for b in doc["truth"]["nonzero_biases"] if b["A"]]
        assert entry["A"] == [2, 5, 11] and entry["c"] == pytest.approx(0.8)

    def test_uniform(self, tmp_path):
        doc = _gen(tmp_path, "--type", "uniform", "--n", "16")
        assert doc["relevant"] == [] and doc["truth"]["relevant"] == []

    def test_junta_is_valid(self, tmp_path):
        doc = _gen(tmp_path, "--type", "junta", "--n", "16", "--k", "3", "--seed", "9")
        assert len(doc["relevant"]) == 3
        assert min(doc["core"]) >= 0 and sum(doc["core"]) == pytest.approx(1.0)


class TestExitCodes:
    def test_bad_flag_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as e:
            main(["learn", "--bogus"])
        assert e.value.code == 1

    def test_missing_seed(self):
        assert main(["learn", "--n", "8", "--k", "2", "--trials", "1"]) == 1

    def test_bad_config_file(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text('{"constants": {"nonsense": 1}}')
        assert main(["test", "--seed", "1", "--trials", "1", "--config", str(cfg)]) == 1

    def test_too_few_samples_is_contract_error(self, tmp_path):
        args = ["learn", "--n", "16", "--k", "3", "--eps", "0.1", "--samples", "5000", "--trials", "1", "--seed", "1"]
        assert main(args + ["--out", str(tmp_path / "o.csv")]) == 2

    def test_tester_small_batch(self, tmp_path):
        assert main(["test", "--samples", "10", "--trials", "1", "--seed", "1", "--out", str(tmp_path / "o")]) == 2

    def test_below_target_under_assert(self, tmp_path):
        # D = P with far too few samples: the statistic overshoots and Close is missed
        args = ["test", "--samples", "60", "--non-strict", "--dist", "0", "--trials", "40", "--seed", "2",
                "--target", "0.99", "--out", str(tmp_path / "o.csv")]
        assert main(args) == 0
        assert main(args + ["--assert"]) == 3


def test_learn_from_sample_file(tmp_path):
    from juntalearn.dist import NoisyParityDistribution, sample
    from juntalearn.formats import write_samples
    from juntalearn.learner import LearnerConfig
    from juntalearn.rng import Rng

    D = NoisyParityDistribution(8, (1, 5), 1, 0.0)
    write_samples(tmp_path / "s.txt", sample(D, Rng(0), LearnerConfig(8, 2, 0.2).sample_budget))
    out = tmp_path / "q.json"
    assert main(["learn", "--input", str(tmp_path / "s.txt"), "--k", "2", "--eps", "0.2", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["relevant"] == [2, 6]
    assert doc["truth"]["trace"]["final_N"] == [2, 6]


def test_threads_do_not_change_rows(tmp_path):
    base = ["test", "--s", "8", "--trials", "12", "--seed", "5"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(base + ["--out", str(a)]) == 0
    assert main(base + ["--threads", "4", "--out", str(b)]) == 0
    assert strip_wall_time(a.read_text()) == strip_wall_time(b.read_text())


def test_transcript_written(tmp_path):
    tr = tmp_path / "t.jsonl"
    args = ["reduce", "lpn-to-ljd", "--n", "8", "--S", "-", "--eta", "0.2", "--trials", "1", "--seed", "3",
            "--transcript", str(tr), "--out", str(tmp_path / "o.csv")]
    assert main(args) == 0
    rec = json.loads(tr.read_text().splitlines()[0])
    assert rec["S"] == []
    last = rec["rounds"][-1]
    assert last["certified"] == [] and last["I"]["-"] > 2 * last["gap"]
