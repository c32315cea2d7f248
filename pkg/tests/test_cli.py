"""CLI behavior: subcommand output, exit codes, env-seed fallback, and
byte determinism."""

import hashlib
import io
import json
import contextlib

import pytest

from contactlab.cli import main
from contactlab.graphs import make_line, save_edge_list


def run_cli(argv, env=None, monkeypatch=None):
    if env and monkeypatch:
        for k, v in env.items():
            monkeypatch.setenv(k, v)
    buf = io.StringIO()
    err = io.StringIO()
    with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(err):
        code = main(argv)
    return code, buf.getvalue(), err.getvalue()


def test_exact_line3_contains_oracle_value():
    code, out, _ = run_cli(["exact", "--graph", "line:3", "--lambda", "1"])
    assert code == 0
    data = json.loads(out)
    assert data["tag"] == "exact"
    from contactlab.oracle import exact_expected_extinction

    assert data["value"] == pytest.approx(exact_expected_extinction(make_line(3), 1.0))


def test_split_from_file(tmp_path):
    p = tmp_path / "t.edges"
    p.write_text(save_edge_list(make_line(7)))
    code, out, _ = run_cli(["split", "--graph", f"file:{p}", "--degree-bound", "3"])
    assert code == 0
    data = json.loads(out)
    assert min(len(data["side_a"]), len(data["side_b"])) >= 7 // 3


def test_gen_text_roundtrip():
    code, out, _ = run_cli(["gen", "--graph", "line:4"])
    assert code == 0
    assert out == save_edge_list(make_line(4))


def test_mean_tau_byte_identical_rerun():
    argv = ["mean-tau", "--graph", "star:8", "--lambda", "2", "--replicas", "300",
            "--seed", "7"]
    code1, out1, _ = run_cli(argv)
    code2, out2, _ = run_cli(argv)
    assert code1 == code2 == 0
    assert hashlib.sha256(out1.encode()).digest() == hashlib.sha256(out2.encode()).digest()


def test_unknown_flag_usage_error():
    with pytest.raises(SystemExit) as exc:
        run_cli(["exact", "--graph", "line:3", "--bogus"])
    assert exc.value.code == 2


def test_unknown_command_usage_error():
    with pytest.raises(SystemExit) as exc:
        run_cli(["frobnicate"])
    assert exc.value.code == 2


def test_bad_graph_spec_exit2():
    code, _, err = run_cli(["exact", "--graph", "ring:3"])
    assert code == 2
    assert "spec" in err


def test_capacity_error_exit1():
    code, _, err = run_cli(["exact", "--graph", "line:20"])
    assert code == 1
    assert "cap" in err


def test_env_seed_fallback(monkeypatch):
    argv = ["mean-tau", "--graph", "line:2", "--replicas", "50", "--time-cap", "100"]
    monkeypatch.setenv("CONTACT_BENCH_SEED", "99")
    code, out_env, _ = run_cli(argv)
    assert code == 0
    monkeypatch.delenv("CONTACT_BENCH_SEED")
    _, out_default, _ = run_cli(argv)
    _, out_explicit, _ = run_cli(argv + ["--seed", "99"])
    assert json.loads(out_env)["seed"] == 99
    assert json.loads(out_default)["seed"] == 0
    assert out_env == out_explicit


def test_mean_tau_csv_sample_dump():
    code, out, _ = run_cli(["mean-tau", "--graph", "line:2", "--replicas", "20",
                            "--seed", "3", "--format", "csv"])
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "replica,seed,value,censored"
    assert len(lines) == 21


def test_simulate_default_csv():
    code, out, _ = run_cli(["simulate", "--graph", "line:5", "--seed", "2",
                            "--time-cap", "50", "--checkpoint-dt", "1"])
    assert code == 0
    assert out.startswith("time,infected_count,infected_bitmask_hex")


def test_growth_csv_format():
    code, out, _ = run_cli(["growth", "--family", "line", "--sizes", "4,6",
                            "--lambda", "1", "--replicas", "100", "--seed", "1",
                            "--format", "csv"])
    assert code == 0
    assert out.startswith("size,estimate,se,replicas,censored")


def test_out_file(tmp_path):
    target = tmp_path / "result.json"
    code, out, _ = run_cli(["exact", "--graph", "line:2", "--out", str(target)])
    assert code == 0
    assert out == ""
    assert json.loads(target.read_text())["value"] == pytest.approx(2.0)


def test_config_file_defaults(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"lambda": 1.0, "replicas": 60, "seed": 5}))
    code, out, _ = run_cli(["--config", str(cfg), "mean-tau", "--graph", "line:2",
                            "--time-cap", "100"])
    assert code == 0
    data = json.loads(out)
    assert data["replicas"] == 60 and data["seed"] == 5
    assert data["config"]["lambda"] == 1.0


def test_coupling_csv():
    code, out, _ = run_cli(["coupling", "--graph", "line:4", "--start", "0",
                            "--t-grid", "1,4", "--replicas", "50", "--seed", "1",
                            "--format", "csv"])
    assert code == 0
    assert out.startswith("t,decoupled_probability,se,replicas")


def test_every_command_deterministic():
    commands = [
        ["gen", "--graph", "tree:7:3"],
        ["simulate", "--graph", "star:5", "--seed", "4", "--time-cap", "100",
         "--checkpoint-dt", "2"],
        ["mean-tau", "--graph", "line:3", "--replicas", "100", "--seed", "1"],
        ["exact", "--graph", "line:3", "--lambda", "1.5"],
        ["exp1", "--graph", "line:1", "--replicas", "80", "--seed", "2",
         "--time-cap", "1000"],
        ["coupling", "--graph", "tree:6:1", "--t-grid", "1,3", "--replicas", "60",
         "--seed", "0"],
        ["split", "--graph", "line:6", "--degree-bound", "2"],
        ["classify", "--graph", "star:40", "--mode", "level4", "--eps", "0.2"],
        ["bounds", "--graph", "star:5", "--check", "attract", "--t-grid", "1,2",
         "--replicas", "0", "--seed", "3"],
        ["growth", "--family", "star", "--sizes", "4,6", "--lambda", "1",
         "--replicas", "80", "--seed", "6"],
        ["calibrate", "--lambda", "2", "--budget", "400", "--seed", "0"],
        ["dual-check", "--graph", "tree:5:2", "--fixtures", "60", "--seed", "1"],
    ]
    assert len(commands) == 12
    for argv in commands:
        code1, out1, _ = run_cli(argv)
        code2, out2, _ = run_cli(argv)
        assert code1 == code2 == 0, argv
        assert hashlib.sha256(out1.encode()).hexdigest() == hashlib.sha256(
            out2.encode()).hexdigest(), argv
