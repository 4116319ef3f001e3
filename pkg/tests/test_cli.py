import json
import subprocess
import sys

import pytest

from nmutp.cli import main, parse_dims, parse_floats, parse_rows, UsageError
from nmutp.io import read_csv


def read_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_parsers():
    assert parse_rows("all") == list(range(1, 12))
    assert parse_rows("1,4-6") == [1, 4, 5, 6]
    assert parse_dims("2:5") == [2, 3, 4, 5]
    assert parse_dims("2,3,5") == [2, 3, 5]
    assert parse_floats("0.8,0.76,0.87,1.07", 4) == [0.8, 0.76, 0.87, 1.07]
    for bad in (lambda: parse_rows("0"), lambda: parse_dims("5:2"), lambda: parse_floats("1,2", 4)):
        with pytest.raises(UsageError):
            bad()


def test_table1_tiny_run(tmp_path):
    assert main(["table1", "--rows", "11", "--n", "10", "--seed", "3", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "table1.csv")
    assert len(rows) == 1 and rows[0]["n_total"] == "10"
    doc = json.loads((tmp_path / "table1.json").read_text())
    assert doc["cases"][0]["row"] == 11 and doc["seed"] == 3


@pytest.mark.parametrize("argv,files", [
    (["table1", "--rows", "1,7", "--n", "2000"], ["table1.csv", "table1.json"]),
    (["sweep", "--dims", "2:3", "--n", "500", "--reps", "2"], ["sweep.csv", "sweep.json"]),
    (["hist", "--pair", "mixed,pure", "--n", "3000", "--bins", "10"], ["hist.csv", "hist.json"]),
    (["strength", "--row", "1", "--n", "3000"], ["strength.csv", "strength.json"]),
    (["scan", "--row", "7", "--n", "300"], ["scan.ndjson"]),
    (["validate", "--n-collinear", "500", "--n-pure", "500", "--n-qudit", "50", "--d-max", "4"],
     ["validate.json"]),
    (["find-example", "--target", "0.8,0.76,0.87,1.07", "--tol", "0.05", "--max-draws", "20000"],
     ["example.json"]),
    (["sample", "--kind", "spectral", "--d", "3", "--n", "20"], ["samples.ndjson"]),
])
def test_byte_identical_reruns(tmp_path, argv, files):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(argv + ["--seed", "42", "--out", str(out)]) == 0
    for name in files:
        assert read_bytes(a / name) == read_bytes(b / name), name


def test_streams_flag_does_not_change_output(tmp_path):
    outs = []
    for k in ("1", "4", "16"):
        out = tmp_path / k
        assert main(["table1", "--rows", "1", "--n", "3000", "--block-size", "256", "--seed", "5",
                     "--streams", k, "--out", str(out)]) == 0
        outs.append(read_bytes(out / "table1.csv"))
    assert outs[0] == outs[1] == outs[2]


def test_sweep_csv_matches_json(tmp_path):
    assert main(["sweep", "--dims", "2:4", "--n", "800", "--reps", "3", "--seed", "1",
                 "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "sweep.csv")
    points = json.loads((tmp_path / "sweep.json").read_text())["points"]
    assert len(rows) == 3
    for row, p in zip(rows, points):
        for key in ("fraction_min", "fraction_mean", "fraction_max", "fraction_se", "g_mean"):
            assert abs(float(row[key]) - p[key]) <= 1e-12


def test_single_rep_sweep(tmp_path):
    assert main(["sweep", "--dims", "2", "--reps", "1", "--n", "500", "--seed", "1",
                 "--out", str(tmp_path)]) == 0
    row = read_csv(tmp_path / "sweep.csv")[0]
    assert row["fraction_min"] == row["fraction_mean"] == row["fraction_max"]


def test_scan_flagged_only(tmp_path):
    assert main(["scan", "--row", "7", "--n", "500", "--seed", "2", "--flagged-only",
                 "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "scan.ndjson").read_text().splitlines()
    recs = [json.loads(x) for x in lines]
    assert recs and all(r["nmutp"] for r in recs)
    for r in recs:
        assert abs(abs(r["d1"] - r["d2"]) + abs(r["dt1"] - r["dt2"]) - r["g"]) <= 1e-12


def test_record_runtime_opt_in(tmp_path):
    assert main(["hist", "--n", "100", "--seed", "1", "--out", str(tmp_path)]) == 0
    assert "runtime_seconds" not in json.loads((tmp_path / "hist.json").read_text())
    assert main(["hist", "--n", "100", "--seed", "1", "--record-runtime", "--out", str(tmp_path)]) == 0
    assert "runtime_seconds" in json.loads((tmp_path / "hist.json").read_text())


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("NMUTP_OUT_DIR", str(tmp_path / "env"))
    assert main(["sample", "--n", "2", "--seed", "1"]) == 0
    assert (tmp_path / "env" / "samples.ndjson").exists()


def test_generated_seed_is_printed(tmp_path, capsys):
    assert main(["sample", "--n", "1", "--out", str(tmp_path)]) == 0
    assert "seed: " in capsys.readouterr().err


def test_exit_codes(tmp_path):
    assert main(["table1", "--rows", "12", "--n", "10", "--seed", "1", "--out", str(tmp_path)]) == 2
    assert main(["sample", "--kind", "mixed-ball", "--d", "3", "--n", "2", "--seed", "1",
                 "--out", str(tmp_path)]) == 2
    with pytest.raises(SystemExit) as info:
        main(["table1", "--n", "abc"])
    assert info.value.code == 2
    assert main(["find-example", "--target", "0,0,2,2", "--tol", "0.01", "--max-draws", "500",
                 "--seed", "1", "--out", str(tmp_path)]) == 1
    assert main(["validate", "--n-collinear", "100", "--n-pure", "100", "--n-qudit", "10",
                 "--d-max", "3", "--tolerance", "1e-30", "--seed", "1", "--out", str(tmp_path)]) == 1
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["sample", "--n", "1", "--seed", "1", "--out", str(blocker / "sub")]) == 3
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"nope": 1}))
    assert main(["table1", "--rows", "1", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert main(["table1", "--rows", "1", "--config", str(tmp_path / "missing.json"),
                 "--out", str(tmp_path)]) == 3


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 7, "n_quartets": 40}))
    assert main(["table1", "--rows", "2", "--config", str(cfg), "--n", "30", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "table1.json").read_text())
    assert doc["seed"] == 7 and doc["cases"][0]["n_total"] == 30


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "nmutp", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "find-example" in r.stdout
