import json

import pytest

from adaptive_ids.cli import main

SMALL = {"seed": 4, "collision_fraction": 0.3, "streams": [
    {"kind": "legit_tcp", "rate": 200, "count": 600, "collision_prob": 0.2, "session_len": 8, "category": "HTTP"},
    {"kind": "atk_http", "rate": 100, "count": 120, "start": 1.0},
    {"kind": "atk_scan", "rate": 200, "count": 300, "start": 0.5},
]}


@pytest.fixture
def scen(tmp_path):
    p = tmp_path / "scen.json"
    p.write_text(json.dumps(SMALL))
    return p


def test_bogus_flag_is_usage_error(capsys):
    assert main(["--bogus-flag"]) == 2
    assert "usage" in capsys.readouterr().err
    assert main(["train", "--model", "svm"]) == 2


def test_runtime_error_exit_one(tmp_path, capsys):
    assert main(["eval", "--log", str(tmp_path / "none.jsonl"), "--truth", str(tmp_path / "t.jsonl")]) == 1
    assert "adaptive-ids eval" in capsys.readouterr().err


def test_gen_is_byte_identical(tmp_path, scen):
    outs = []
    for tag in "ab":
        pcap, truth = tmp_path / f"{tag}.pcap", tmp_path / f"{tag}.jsonl"
        assert main(["gen", "--scenario", str(scen), "--out", str(pcap), "--truth", str(truth)]) == 0
        outs.append((pcap.read_bytes(), truth.read_bytes()))
    assert outs[0] == outs[1]


def test_full_chain(tmp_path, scen, capsys):
    d = tmp_path
    assert main(["gen", "--scenario", str(scen), "--out", str(d / "train.pcap"), "--truth", str(d / "train.jsonl"),
                 "--features", str(d / "train.csv"), "--seed", "9"]) == 0
    assert main(["gen", "--scenario", str(scen), "--out", str(d / "run.pcap"), "--truth", str(d / "run.jsonl")]) == 0
    assert main(["train", "--model", "svm", "--data", str(d / "train.csv"), "--format", "generic",
                 "--c", "1", "--gamma", "0.1", "--out", str(d / "svm.json")]) == 0
    assert main(["run", "--pcap", str(d / "run.pcap"), "--rules", "default", "--plugin", str(d / "svm.json"),
                 "--out", str(d / "log.jsonl")]) == 0
    capsys.readouterr()
    assert main(["eval", "--log", str(d / "log.jsonl"), "--truth", str(d / "run.jsonl"), "--format", "table"]) == 0
    table = capsys.readouterr().out
    assert "HTTP" in table and "SCAN" in table and "Total" in table
    assert main(["eval", "--log", str(d / "log.jsonl"), "--truth", str(d / "run.jsonl"),
                 "--out", str(d / "eval.json")]) == 0
    report = json.loads((d / "eval.json").read_text())
    assert report["total"]["category"] == "Total"


def test_tune_writes_model_and_report(tmp_path, nsl_subset_path):
    assert main(["tune", "--data", str(nsl_subset_path), "--format", "nsl_kdd", "--seed", "1",
                 "--population", "3", "--iterations", "2", "--cv-k", "3",
                 "--out", str(tmp_path / "m.json"), "--report", str(tmp_path / "r.json")]) == 0
    model = json.loads((tmp_path / "m.json").read_text())
    report = json.loads((tmp_path / "r.json").read_text())
    assert model["meta"]["tuned_by"] == "firefly"
    assert model["c_param"] == pytest.approx(report["best_c"])


def test_cv_json_is_sorted_and_stable(nsl_subset_path, capsys):
    argv = ["cv", "--data", str(nsl_subset_path), "--data-format", "nsl_kdd", "--model", "nb", "--k", "5",
            "--seed", "3"]
    assert main(argv) == 0
    first = capsys.readouterr().out
    assert main(argv) == 0
    assert capsys.readouterr().out == first
    d = json.loads(first)
    assert list(d) == sorted(d)
    assert main(argv[:-2] + ["--seed", "3", "--format", "table"]) == 0
    assert "DR" in capsys.readouterr().out
