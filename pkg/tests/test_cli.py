import json
import os
import subprocess
import sys

import pytest

from megflood import cli, lemmas
from megflood.experiments import SWEEP_COLUMNS
from megflood.flooding import TRACE_COLUMNS


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_flood_single_node(capsys):
    code, out, err = run(["flood", "--n", "1", "--rho", "0", "--r", "1", "--seed", "7"], capsys)
    assert code == 0
    assert out.splitlines()[0] == ",".join(TRACE_COLUMNS)
    assert err.strip().splitlines()[-1] == "flood_time=0 bootstrap=NA spread=NA"


def test_flood_rho_rule_to_file(tmp_path, capsys):
    path = tmp_path / "trace.csv"
    code, out, _ = run(["flood", "--n", "4096", "--rho-rule", "4*sqrt(log n)", "--r", "2",
                        "--seed", "1", "--out", str(path)], capsys)
    assert code == 0
    assert out.startswith("flood_time=")
    fields = dict(kv.split("=") for kv in out.split())
    assert fields["flood_time"] != "NA"
    assert path.read_bytes().startswith(",".join(TRACE_COLUMNS).encode() + b"\n")


def test_flood_timeout_exit_code(capsys):
    code, _, err = run(["flood", "--n", "2", "--rho", "0", "--r", "0.5", "--seed", "0",
                        "--max-steps", "3"], capsys)
    assert code == 3 and "flood_time=NA" in err


@pytest.mark.parametrize("argv", [
    ["flood", "--rho", "1", "--r", "1"],
    ["flood", "--n", "16", "--r", "1"],
    ["flood", "--n", "16", "--rho", "1", "--rho-rule", "sqrt(n)", "--r", "1"],
    ["verify", "--lemma", "nope"],
    ["verify", "--lemma", "boundary", "--m", "3", "--samples", "10"],
    [],
])
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv)
    assert exc.value.code == 2


def test_value_errors_exit_2(capsys):
    code, _, err = run(["flood", "--n", "16", "--rho", "100", "--r", "1"], capsys)
    assert code == 2 and "megflood flood:" in err
    code, _, _ = run(["flood", "--n", "16", "--rho-rule", "log(n)", "--r", "1"], capsys)
    assert code == 2


def test_verify_outputs(capsys):
    code, out, _ = run(["verify", "--lemma", "spreading", "--kmax", "10000"], capsys)
    assert code == 0 and out.startswith("[PASS] spreading: cases=10000 violations=0")
    code, out, _ = run(["verify", "--lemma", "boundary", "--m", "4", "--json"], capsys)
    d = json.loads(out)
    assert code == 0 and d["cases"] == 2 + 16 + 512 + 65536 and d["violations"] == 0
    code, out, _ = run(["verify", "--lemma", "all", "--trials", "2000", "--seed", "3"], capsys)
    assert code == 0 and len(out.splitlines()) == 3


def test_verify_sampled_boundary(capsys):
    code, out, _ = run(["verify", "--lemma", "boundary", "--m", "8", "--samples", "5000",
                        "--seed", "2", "--json"], capsys)
    d = json.loads(out)
    assert code == 0 and d["cases"] == 2 + 16 + 512 + 65536 + 5000 and d["seed"] == 2


def test_verify_violation_exit_code(monkeypatch, capsys):
    bad = lemmas.LemmaReport("spreading", 1, 1, -1.0)
    monkeypatch.setattr(lemmas, "verify_spreading_lemma", lambda k: bad)
    code, out, _ = run(["verify", "--lemma", "spreading"], capsys)
    assert code == 1 and out.startswith("[FAIL]")


def _write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def test_sweep_empty_config(tmp_path, capsys):
    cfg = _write(tmp_path, {"points": [], "trials": 3})
    code, out, _ = run(["sweep", "--config", cfg], capsys)
    assert code == 0 and out == ",".join(SWEEP_COLUMNS) + "\n"


def test_sweep_bad_config(tmp_path, capsys):
    code, _, err = run(["sweep", "--config", _write(tmp_path, "{oops")], capsys)
    assert code == 2 and "cannot read" in err
    code, _, _ = run(["sweep", "--config", _write(tmp_path, {"points": [{"n": 4}]})], capsys)
    assert code == 2


def test_sweep_seed_override(tmp_path, capsys):
    cfg = _write(tmp_path, {"points": [{"n": 64, "rho": 2, "r": 1}], "trials": 2, "seed": 1})
    _, base, _ = run(["sweep", "--config", cfg], capsys)
    _, same, _ = run(["sweep", "--config", cfg, "--seed", "1"], capsys)
    _, other, _ = run(["sweep", "--config", cfg, "--seed", "2"], capsys)
    assert base == same != other


def test_snapshot_stats(tmp_path, capsys):
    out = tmp_path / "snap.csv"
    code, _, _ = run(["snapshot-stats", "--n", "1024", "--r", "1", "--out", str(out)], capsys)
    lines = out.read_text().splitlines()
    assert code == 0 and len(lines) == 11
    assert lines[0] == "sample,n,rho,r,components,largest,max_comp_frac"
    for row in lines[1:]:
        frac = float(row.split(",")[-1])
        assert 0 < frac <= 1


def test_env_seed_default(monkeypatch, capsys):
    argv = ["flood", "--n", "256", "--rho", "3", "--r", "1"]
    monkeypatch.setenv("MEGFLOOD_SEED", "5")
    _, env_out, _ = run(argv, capsys)
    _, explicit, _ = run(argv + ["--seed", "5"], capsys)
    monkeypatch.delenv("MEGFLOOD_SEED")
    _, zero, _ = run(argv, capsys)
    _, explicit0, _ = run(argv + ["--seed", "0"], capsys)
    assert env_out == explicit and zero == explicit0 and env_out != zero


def test_module_entry_point(tmp_path):
    env = dict(os.environ, MEGFLOOD_SEED="7")
    proc = subprocess.run([sys.executable, "-m", "megflood", "flood", "--n", "1", "--rho", "0",
                           "--r", "1"], capture_output=True, text=True, env=env)
    assert proc.returncode == 0
    assert "flood_time=0 bootstrap=NA spread=NA" in proc.stderr
