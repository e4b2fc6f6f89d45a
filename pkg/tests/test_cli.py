import csv
import io
import json
import os
import subprocess
import sys

import pytest

from nekho.cli import main


def run(tmp_path, cfg, cmd, *extra, out=True):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    buf = io.StringIO()
    argv = [cmd, "--config", str(path), *extra]
    if out:
        argv += ["--out", str(tmp_path / "out")]
    return main(argv, stdout=buf), buf.getvalue()


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# config: ")
    json.loads(lines[0][len("# config: "):])
    body = [ln for ln in lines[1:] if not ln.startswith("#")]
    return list(csv.reader(body))


UNIT = {"problem": {"n": 1, "m": 1, "alpha": [1.0], "tau": 0.0}}
PEND = {
    "problem": {"n": 1, "m": 1, "alpha": [1.0], "harmonics": [{"k": [1], "l": [1], "re": 0.5},
                                                               {"k": [1], "l": [-2], "re": 0.5}],
                "eps": 0.0, "domain": {"lo": [-1], "hi": [1]}, "tau": 0.0},
    "run": {"T": 20.0, "h_step": 0.05, "I0": [0.3], "theta0": [0.2]},
}


def test_dio_unit_vector(tmp_path):
    code, _ = run(tmp_path, UNIT, "dio")
    assert code == 0
    res = json.loads((tmp_path / "out" / "dio.json").read_text())
    assert res["gamma"] == pytest.approx(1.0) and res["tau"] == 0.0
    assert res["config"] == UNIT


def test_dio_to_stdout(tmp_path):
    code, text = run(tmp_path, UNIT, "dio", out=False)
    assert code == 0 and json.loads(text)["gamma"] == pytest.approx(1.0)


def test_constants_theorem1(tmp_path):
    cfg = {"problem": {"n": 1, "m": 1, "alpha": [1.0], "tau": 0.0, "gamma": 1.0}}
    code, _ = run(tmp_path, cfg, "constants", "--theorem", "1")
    assert code == 0
    res = json.loads((tmp_path / "out" / "constants_thm1.json").read_text())
    assert res["a"] == pytest.approx(0.25) and res["b"] == pytest.approx(0.25)


@pytest.mark.parametrize("thm", ["2", "3", "33", "4"])
def test_constants_other_theorems(tmp_path, thm):
    cfg = {"problem": {"n": 1, "m": 1, "alpha": [1.0], "tau": 0.0, "gamma": 1.0, "eps": 1e-12},
           "geometry": {"L": [[1, -1]]}}
    code, _ = run(tmp_path, cfg, "constants", "--theorem", thm)
    assert code == 0
    assert (tmp_path / "out" / f"constants_thm{thm}.json").exists()


def test_strict_flags_unmet_hypothesis(tmp_path):
    cfg = {"problem": {"n": 1, "m": 1, "alpha": [1.0], "tau": 0.0, "gamma": 1.0, "eps": 0.5}}
    assert run(tmp_path, cfg, "constants", "--theorem", "1")[0] == 0
    assert run(tmp_path, cfg, "constants", "--theorem", "1", "--strict")[0] == 4


@pytest.mark.parametrize("bad", [
    "{not json",
    json.dumps({"problem": {"n": 1}}),
    json.dumps({"problem": {"n": 1, "m": 1, "alpha": [1.0]}, "bogus": {}}),
    json.dumps({"problem": {"n": 1, "m": 2, "alpha": [1.0]}}),
    json.dumps({"problem": {"n": 1, "m": 1, "alpha": [1.0], "harmonics": [{"k": [1, 2], "l": [1]}]}}),
])
def test_malformed_config_exit_2(tmp_path, capsys, bad):
    p = tmp_path / "bad.json"
    p.write_text(bad)
    assert main(["dio", "--config", str(p)], stdout=io.StringIO()) == 2
    assert "error" in capsys.readouterr().err


def test_schema_error_names_field(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"problem": {"n": "one", "m": 1, "alpha": [1.0]}}))
    assert main(["dio", "--config", str(p)]) == 2
    assert "problem/n" in capsys.readouterr().err


def test_cover_tiny_lambdas_trivial_block(tmp_path):
    cfg = {"problem": {"n": 2, "m": 1, "alpha": [1.0], "tau": 0.0},
           "geometry": {"K": 3, "samples": 2000, "lambda_scale": 1e-6, "seed": 3}}
    assert run(tmp_path, cfg, "cover")[0] == 0
    rows = read_csv(tmp_path / "out" / "cover.csv")
    assert rows[0][:3] == ["omega_1", "omega_2", "d"]
    ds = [int(r[2]) for r in rows[1:]]
    assert len(ds) == 2000 and ds.count(0) >= 0.99 * len(ds)
    assert (tmp_path / "out" / "cover.svg").read_text().startswith("<svg")


def test_cover_rank_above_n_is_empty(tmp_path):
    cfg = {"problem": {"n": 1, "m": 1, "alpha": [1.0], "tau": 0.0}, "geometry": {"d": 2, "samples": 100}}
    assert run(tmp_path, cfg, "cover")[0] == 0
    rows = read_csv(tmp_path / "out" / "cover.csv")
    assert len(rows) == 1


def test_certify_small_instance(tmp_path):
    cfg = {"problem": {"n": 1, "m": 1, "alpha": [1.0], "tau": 0.0},
           "geometry": {"K": 2, "certify_samples": 1000}}
    assert run(tmp_path, cfg, "certify")[0] == 0
    res = json.loads((tmp_path / "out" / "certify.json").read_text())
    assert res["violations_total"] == 0 and res["blocks"] == len(res["certificates"]) >= 2
    assert all(c["samples"] >= 1000 for c in res["certificates"] if not c.get("empty_block"))


def test_certify_violation_exit_3(tmp_path):
    cfg = {"problem": {"n": 1, "m": 1, "alpha": [1.0], "tau": 0.0},
           "geometry": {"K": 2, "certify_samples": 200, "lambda_scale": 10.0, "d": 1}}
    # inflated rank-1 zones reach points where other divisors are small
    code, _ = run(tmp_path, cfg, "certify")
    res = json.loads((tmp_path / "out" / "certify.json").read_text())
    assert res["violations_total"] > 0 and code == 3


def test_simulate_zero_eps(tmp_path):
    assert run(tmp_path, PEND, "simulate")[0] == 0
    rows = read_csv(tmp_path / "out" / "trajectory.csv")
    assert rows[0] == ["t", "I_1", "J_1", "driftI", "energy_error"]
    assert all(float(r[3]) == 0.0 for r in rows[1:])


def test_sweep_columns_and_fit(tmp_path):
    cfg = json.loads(json.dumps(PEND))
    cfg["problem"]["eps_grid"] = [0.0, 1e-3, 1e-2]
    assert run(tmp_path, cfg, "sweep")[0] == 0
    text = (tmp_path / "out" / "sweep.csv").read_text()
    rows = read_csv(tmp_path / "out" / "sweep.csv")
    assert rows[0] == ["eps", "drift", "bound_R", "horizon_T", "hypothesis_met"]
    assert float(rows[1][1]) == 0.0
    assert text.splitlines()[-1].startswith("# fit: ")
    fit = json.loads((tmp_path / "out" / "sweep_fit.json").read_text())["fit"]
    assert fit["slope"] > 0
    assert run(tmp_path, cfg, "sweep", "--strict")[0] == 4


def test_determinism_and_threads(tmp_path, monkeypatch):
    cfg = {"problem": {"n": 2, "m": 1, "alpha": [1.0], "tau": 0.0},
           "geometry": {"K": 2, "certify_samples": 50, "samples": 300, "seed": 9}}
    outs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("NEKHO_THREADS", threads)
        for cmd, name in (("cover", "cover.csv"), ("certify", "certify.json")):
            run(tmp_path, cfg, cmd)
            outs.append((tmp_path / "out" / name).read_bytes())
    assert outs[0] == outs[2] and outs[1] == outs[3]
    run(tmp_path, cfg, "cover", "--seed", "10")
    assert (tmp_path / "out" / "cover.csv").read_bytes() != outs[0]


def test_console_script_entry(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(UNIT))
    res = subprocess.run([sys.executable, "-m", "nekho.cli", "dio", "--config", str(p)],
                         capture_output=True, text=True, env=dict(os.environ))
    assert res.returncode == 0 and json.loads(res.stdout)["gamma"] == pytest.approx(1.0)


def test_bundled_configs_validate():
    from pathlib import Path

    from nekho.config import load

    configs = sorted((Path(__file__).parent.parent / "scripts" / "configs").glob("*.json"))
    assert configs
    for p in configs:
        load(p)
