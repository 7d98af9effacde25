import json
import os
import subprocess
from pathlib import Path

CLI = os.environ.get("NCDOA_CLI", "ncdoa")
EXAMPLES = Path(os.environ.get("NCDOA_EXAMPLES", Path(__file__).resolve().parents[2] / "examples_cfg"))


def run(*args):
    return subprocess.run([CLI, *map(str, args)], capture_output=True, text=True, timeout=600)


def test_geometry_mra10():
    r = run("geometry", "--kind", "mra", "--n", 10)
    assert r.returncode == 0
    assert json.loads(r.stdout)["set"] == "{0,1,3,6,13,20,27,31,35,36}"


def test_geometry_weights_and_type2():
    r = run("geometry", "--kind", "ula", "--n", 3, "--weights")
    assert json.loads(r.stdout)["dof"] == 5
    r = run("geometry", "--kind", "mra", "--n", 5, "--type2", "--l", 2, "--mu", 1)
    assert json.loads(r.stdout)["subarray_sets"] == ["{0,1,4,7,9}", "{10,11,14,17,19}"]


def test_geometry_invalid_size():
    r = run("geometry", "--kind", "mra", "--n", 50)
    assert r.returncode == 2
    assert "error" in r.stderr


def test_verify_theorem():
    r = run("verify-theorem")
    assert r.returncode == 0
    assert "all cases satisfied" in r.stdout
    assert "VIOLATED" not in r.stdout


def test_schema():
    r = run("--schema")
    doc = json.loads(r.stdout)
    assert doc["scenario"]["properties"]["schema_version"]["const"] == 1


def test_estimate_noiseless(tmp_path):
    spec = tmp_path / "spec.csv"
    out = tmp_path / "out.json"
    r = run("estimate", EXAMPLES / "noiseless.json", "--spectrum", spec, "--out", out, "--dump-data", tmp_path / "d")
    assert r.returncode == 0, r.stderr
    res = json.loads(out.read_text())
    assert res["estimated_dirs"] == [0.0, 0.5]
    assert spec.read_text().startswith("theta,spectrum\n")
    assert (tmp_path / "d_obs.csv").exists()

    # Feed the dumped data back in through data_file.
    doc = json.loads((EXAMPLES / "noiseless.json").read_text())
    doc["data_file"] = str(tmp_path / "d_obs.csv")
    doc["noise_var"] = 0.0
    cfg = tmp_path / "from_file.json"
    cfg.write_text(json.dumps(doc))
    r = run("estimate", cfg)
    assert r.returncode == 0, r.stderr
    assert json.loads(r.stdout)["estimated_dirs"] == [0.0, 0.5]


def test_estimate_single_snapshot():
    r = run("estimate", EXAMPLES / "noiseless.json", "--t", 1)
    assert r.returncode == 0
    assert json.loads(r.stdout)["snapshots"] == 1


def test_estimate_errors(tmp_path):
    assert run("estimate", tmp_path / "missing.json").returncode == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("estimate", bad).returncode == 2
    unknown = tmp_path / "unknown.json"
    unknown.write_text('{"geometry": {"kind": "ula", "n": 4}, "true_dirs": [0.1], "colour": 1}')
    assert run("estimate", unknown).returncode == 2
    zero = tmp_path / "zero_obs.csv"
    zero.write_text("t,row,re,im\n" + "".join(f"0,{k},0,0\n" for k in range(4)))
    zdoc = tmp_path / "zero.json"
    zdoc.write_text(json.dumps({"geometry": {"kind": "ula", "n": 4}, "true_dirs": [0.1],
                                "data_file": str(zero), "noise_var": 0.1}))
    assert run("estimate", zdoc).returncode == 3


def test_estimate_strict_nonconvergence(tmp_path):
    doc = json.loads((EXAMPLES / "paper_scenario.json").read_text())
    doc["snapshots"] = 1
    doc["estimator"]["solver"] = {"max_iter": 2}
    cfg = tmp_path / "tight.json"
    cfg.write_text(json.dumps(doc))
    assert run("estimate", cfg).returncode == 0
    assert run("estimate", cfg, "--strict").returncode == 4


def test_bench_outputs_are_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    r = run("bench", EXAMPLES / "quick_campaign.json", "--out", a, "--beampattern", "--plot")
    assert r.returncode == 0, r.stderr
    assert run("bench", EXAMPLES / "quick_campaign.json", "--out", b).returncode == 0
    assert (a / "quick.csv").read_bytes() == (b / "quick.csv").read_bytes()
    assert (a / "quick_timing.csv").exists()
    assert (a / "plot.py").exists()
    header = (a / "beampattern.csv").read_text().splitlines()[0]
    assert header == "theta,TypeII-MRA,ULA-8"
