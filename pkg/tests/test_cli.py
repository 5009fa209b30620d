import csv
import io
import json
import os
import subprocess
import sys

import pytest

from fracleibniz import __version__, cli


def run_main(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr().out
    return code, list(csv.reader(io.StringIO(out))), out


def test_parse_grid():
    assert cli.parse_grid("0.05:0.95:0.05") == tuple(round(0.05 * k, 2) for k in range(1, 20))
    assert cli.parse_grid("0.1,0.5") == (0.1, 0.5)
    assert cli.parse_grid("0.5:0.5:0.1") == (0.5,)
    for bad in ("0.1:0.2", "0.5:0.1:0.1", "0.1:0.5:0", ""):
        with pytest.raises(ValueError):
            cli.parse_grid(bad)


def test_header_and_metadata(capsys):
    code, rows, _ = run_main(["sharpness", "--lambda", "2.5", "--kind", "caputo", "--seed", "3"], capsys)
    assert code == 0
    header, meta, body = rows[0], rows[1], rows[2:]
    assert header[0] == "command" and header[-3:] == ["value", "threshold", "status"]
    assert header[1] == "param_1"
    assert meta[0] == "#meta" and meta[1] == f"version={__version__}" and meta[2] == "seed=3"
    cfg = json.loads(meta[3][len("config="):])
    assert cfg["command"] == "sharpness" and cfg["params"]["lambdas"] == [2.5]
    assert len(body) == 1 and body[0][0] == "sharpness" and body[0][-1] == "pass"
    assert "interval=(0.0 0.42857142857142855)" in body[0]
    assert all(len(r) == len(header) for r in rows)


def test_psd_sweep_small(capsys):
    code, rows, _ = run_main(["psd-sweep", "--n-max", "6", "--alpha-grid", "0.25:0.75:0.25"], capsys)
    assert code == 0
    body = rows[2:]
    assert all(r[-1] in ("pass", "info") for r in body)
    assert sum(1 for r in body if r[1].startswith("n=")) == 6 * 3
    assert sum(1 for r in body if r[1].startswith("check=")) == 2 * 3


def test_poly_gap_and_series(capsys):
    code, rows, _ = run_main(["poly-gap", "--count", "30", "--seed", "7", "--alpha-grid", "0.3,0.7"], capsys)
    assert code == 0 and len(rows) > 2
    code, rows, _ = run_main(["series-leibniz", "--count", "20", "--seed", "7"], capsys)
    assert code == 0 and len(rows) > 2


def test_other_commands_pass(capsys):
    for argv in (
        ["sampled-ineq", "--functions", "sin,exp", "--N", "256", "--alpha-grid", "0.5"],
        ["solve", "--n", "4", "--N", "256", "--tol", "1e-2"],
        ["energy", "--count", "3", "--n-max", "6", "--N", "128", "--alpha-grid", "0.5"],
        ["convergence", "--ns", "4,8,16", "--N", "64"],
        ["special-fn", "--gautschi-n", "50", "--alzer-count", "20", "--alzer-invalid", "10"],
    ):
        code, rows, _ = run_main(argv, capsys)
        assert code == 0, (argv, rows)
        assert rows[0][0] == "command" and rows[1][0] == "#meta"


def test_failing_contract_exit_one(capsys):
    code, rows, _ = run_main(["sharpness", "--lambda", "1.99", "--kind", "rl", "--k-cap", "100"], capsys)
    assert code == 1
    assert rows[-1][-1] == "fail"


def test_usage_errors():
    for argv in (["nope"], ["psd-sweep", "--n-max", "0"], ["poly-gap", "--alpha-grid", "0.5:1.5:0.5"],
                 ["convergence", "--ns", "8,4"], ["solve", "--N", "1"], []):
        with pytest.raises(SystemExit) as e:
            cli.main(argv)
        assert e.value.code == 2


def test_internal_error_exit_three(monkeypatch, capsys):
    def boom(cfg):
        raise ZeroDivisionError("synthetic failure")

    monkeypatch.setitem(cli.HANDLERS, "special-fn", boom)
    code, rows, _ = run_main(["special-fn"], capsys)
    assert code == 3
    assert rows[-1][-1] == "error"
    assert "synthetic failure" in ",".join(rows[-1])


def test_output_file(tmp_path, capsys):
    out = tmp_path / "r.csv"
    code = cli.main(["sharpness", "--kind", "caputo", "-o", str(out)])
    assert code == 0 and capsys.readouterr().out == ""
    assert out.read_text().startswith("command,")


def test_deterministic_across_runs_and_workers(tmp_path):
    argv = ["poly-gap", "--count", "120", "--seed", "11", "--alpha-grid", "0.2,0.8", "--deg-max", "8"]
    outs = []
    for workers in ("1", "1", "2"):
        env = dict(os.environ, FRACLEIBNIZ_WORKERS=workers)
        r = subprocess.run([sys.executable, "-m", "fracleibniz", *argv], capture_output=True, env=env, check=False)
        assert r.returncode == 0, r.stderr
        outs.append(r.stdout)
    assert outs[0] == outs[1] == outs[2]


def test_different_seed_changes_output(capsys):
    _, _, a = run_main(["poly-gap", "--count", "10", "--seed", "1", "--alpha-grid", "0.5"], capsys)
    _, _, b = run_main(["poly-gap", "--count", "10", "--seed", "2", "--alpha-grid", "0.5"], capsys)
    assert a != b


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv(cli.WORKERS_ENV, "3")
    assert cli.worker_count() == 3
    monkeypatch.setenv(cli.WORKERS_ENV, "0")
    assert cli.worker_count() >= 1
    monkeypatch.delenv(cli.WORKERS_ENV)
    assert cli.worker_count() >= 1


def test_alzer_instances():
    import numpy as np

    from fracleibniz import specfn
    from fracleibniz.errors import PreconditionError

    rng = np.random.default_rng(0)
    for _ in range(50):
        assert specfn.alzer_check(*cli.alzer_valid_instance(rng))
    for j in range(20):
        with pytest.raises(PreconditionError):
            specfn.alzer_check(*cli.alzer_invalid_instance(rng, j))
