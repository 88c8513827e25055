from msrpa import cli
from msrpa.export import MESSAGES_HEADER, METRICS_HEADER, TRACE_HEADER


def run_cli(*argv: str) -> int:
    return cli.main(list(argv))


def test_run_strict_success_writes_artifacts(sim1_path, tmp_path, capsys):
    code = run_cli("run", str(sim1_path), "--strict", "--out", str(tmp_path))
    assert code == 0
    out = capsys.readouterr().out
    assert "validation passed" in out
    trace = tmp_path / "sim1_trace.csv"
    messages = tmp_path / "sim1_messages.csv"
    metrics = tmp_path / "sim1_metrics.csv"
    for f in (trace, messages, metrics):
        assert f.exists()
    # Golden column contract.
    assert trace.read_text().splitlines()[0] == TRACE_HEADER
    assert messages.read_text().splitlines()[0] == MESSAGES_HEADER
    assert metrics.read_text().splitlines()[0] == METRICS_HEADER
    # One row per agent per timestep, plus the header.
    assert len(trace.read_text().splitlines()) == 1 + 14 * 401


def test_run_strict_eta_override_fails_named_hypothesis(sim1_path, tmp_path, capsys):
    code = run_cli(
        "run", str(sim1_path), "--eta", "9", "--strict", "--no-artifacts",
        "--out", str(tmp_path),
    )
    assert code == 2
    out = capsys.readouterr().out
    assert "comm_rate_exceeds_followers" in out
    assert "comm_rate 9 <= |followers| 9" in out


def test_run_check_theorems(sim2_path, capsys):
    code = run_cli("run", str(sim2_path), "--check-theorems", "--no-artifacts")
    assert code == 0
    out = capsys.readouterr().out
    assert "bounded_finite_time: T=7 periods" in out
    assert "-> PASS" in out


def test_run_without_strict_tolerates_failed_validation(scenario_dir, capsys):
    code = run_cli(
        "run", str(scenario_dir / "sim1_eta9.yaml"), "--no-artifacts"
    )
    assert code == 0
    assert "validation FAILED" in capsys.readouterr().out


def test_trace_files_byte_identical_across_runs(sim2_path, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run_cli("run", str(sim2_path), "--out", str(out1)) == 0
    assert run_cli("run", str(sim2_path), "--out", str(out2)) == 0
    for name in ("sim2_trace.csv", "sim2_messages.csv", "sim2_metrics.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_out_dir_env_var(sim1_path, tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_DIR_ENV, str(tmp_path / "envout"))
    assert run_cli("run", str(sim1_path)) == 0
    assert (tmp_path / "envout" / "sim1_trace.csv").exists()


def test_jobs_runs_multiple_scenarios(sim1_path, sim2_path, tmp_path):
    code = run_cli(
        "run", str(sim1_path), str(sim2_path), "--jobs", "2", "--out", str(tmp_path)
    )
    assert code == 0
    assert (tmp_path / "sim1_trace.csv").exists()
    assert (tmp_path / "sim2_trace.csv").exists()


def test_seed_override_changes_trace(sim1_path, tmp_path):
    assert run_cli("run", str(sim1_path), "--out", str(tmp_path / "a")) == 0
    assert run_cli("run", str(sim1_path), "--seed", "1234", "--out", str(tmp_path / "b")) == 0
    a = (tmp_path / "a" / "sim1_trace.csv").read_text()
    b = (tmp_path / "b" / "sim1_trace.csv").read_text()
    assert a != b


def test_validate_subcommand(sim1_path, scenario_dir, capsys):
    assert run_cli("validate", str(sim1_path)) == 0
    assert run_cli("validate", str(scenario_dir / "sim1_eta9.yaml")) == 2
    assert "comm_rate_exceeds_followers" in capsys.readouterr().out


def test_replay_subcommand(sim1_path, capsys):
    assert run_cli("replay", str(sim1_path)) == 0
    assert "replay identical: True" in capsys.readouterr().out


def test_robustness_subcommand(capsys):
    code = run_cli(
        "robustness", "--circulant", "14", "5", "--sources", "1", "2", "3", "4", "5",
        "--r", "5", "--index-base", "1", "--bruteforce",
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "HOLDS" in out and "brute force: True (agrees: True)" in out
    code = run_cli(
        "robustness", "--circulant", "14", "5", "--sources", "1", "2", "3", "4", "5",
        "--r", "6", "--index-base", "1",
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "FAILS" in out and "witness" in out
    # Witness printed in the caller's 1-based labels.
    assert "[6, 7, 8, 9, 10, 11, 12, 13, 14]" in out


def test_robustness_from_edge_list(tmp_path, capsys):
    (tmp_path / "g.txt").write_text("0 1\n1 2\n")
    code = run_cli(
        "robustness", "--edge-list", str(tmp_path / "g.txt"), "--sources", "0", "--r", "1",
    )
    assert code == 0
    assert "HOLDS" in capsys.readouterr().out


def test_robustness_capacity_error_is_runtime_exit(capsys):
    code = run_cli(
        "robustness", "--circulant", "40", "2", "--sources", "0", "--r", "1",
        "--bruteforce",
    )
    assert code == 3
    assert "brute-force limit" in capsys.readouterr().err


def test_missing_scenario_file_is_runtime_exit(capsys):
    assert run_cli("run", "/no/such/file.yaml") == 3
    assert "error:" in capsys.readouterr().err


def test_schema_error_is_runtime_exit(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("name: x\nbogus: 1\n")
    assert run_cli("run", str(bad)) == 3
    assert "error:" in capsys.readouterr().err
