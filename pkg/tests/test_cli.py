import json
import subprocess
import sys

CMD = [sys.executable, "-m", "tlrsim"]


def run_cli(*args, **kwargs):
    return subprocess.run(
        CMD + list(args), capture_output=True, text=True, timeout=300, **kwargs
    )


def strip_timestamp(text):
    return "\n".join(l for l in text.splitlines() if not l.startswith("# timestamp"))


class TestParams:
    def test_defaults_exit_zero(self):
        proc = run_cli("params")
        assert proc.returncode == 0
        assert "mode_frequency_hz" in proc.stdout
        assert " 2.00000000e+10" in proc.stdout
        assert "transfer_rate_hz" in proc.stdout
        assert "interaction_spread_rel" in proc.stdout

    def test_empty_config_file_gives_defaults(self, tmp_path):
        path = tmp_path / "empty.json"
        path.write_text("{}")
        proc = run_cli("params", "--config", str(path))
        assert proc.returncode == 0
        assert proc.stdout == run_cli("params").stdout

    def test_out_flag_writes_file(self, tmp_path):
        dest = tmp_path / "report.txt"
        proc = run_cli("params", "--out", str(dest))
        assert proc.returncode == 0
        assert proc.stdout == ""
        assert "mode_frequency_hz" in dest.read_text()


class TestConfigErrors:
    def test_unknown_key_exits_two_with_path(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"device": {"tlr": {"indctance_h": 1.0}}}))
        proc = run_cli("params", "--config", str(path))
        assert proc.returncode == 2
        assert "device.tlr.indctance_h" in proc.stderr

    def test_malformed_json_exits_two(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{oops")
        proc = run_cli("validate", "--config", str(path))
        assert proc.returncode == 2

    def test_unknown_flag_exits_two(self):
        proc = run_cli("params", "--frobnicate")
        assert proc.returncode == 2

    def test_low_sample_count_needs_quick(self):
        proc = run_cli("cphase-error", "--samples", "50")
        assert proc.returncode == 2
        assert "quick" in proc.stderr
        proc = run_cli("cphase-error", "--samples", "50", "--quick", "--no-timestamp")
        assert proc.returncode == 0
        assert "# quick:" in proc.stdout


class TestCsvCommands:
    def test_transfer_error_deterministic_bytes(self):
        first = run_cli("transfer-error", "--no-timestamp")
        second = run_cli("transfer-error", "--no-timestamp")
        assert first.returncode == 0 and second.returncode == 0
        assert first.stdout == second.stdout
        assert "kappa_hz,gamma2_hz,error,neg_log10_error" in first.stdout

    def test_timestamp_line_is_the_only_difference(self):
        timestamped = run_cli("transfer-error")
        bare = run_cli("transfer-error", "--no-timestamp")
        assert "# timestamp: " in timestamped.stdout
        assert strip_timestamp(timestamped.stdout) == bare.stdout.rstrip("\n")

    def test_jobs_flag_keeps_bytes(self):
        serial = run_cli("cphase-error", "--samples", "120", "--no-timestamp")
        parallel = run_cli("cphase-error", "--samples", "120", "--no-timestamp", "--jobs", "3")
        assert serial.returncode == 0 and parallel.returncode == 0
        assert serial.stdout == parallel.stdout

    def test_detector_csv_and_out(self, tmp_path):
        dest = tmp_path / "detector.csv"
        proc = run_cli("detector", "--no-timestamp", "--out", str(dest))
        assert proc.returncode == 0
        text = dest.read_text()
        assert "gamma_over_kappa,efficiency,one_minus_eff,converged,t_final_s" in text
        rows = [l for l in text.splitlines() if l and not l.startswith("#")][1:]
        assert len(rows) == 5

    def test_seed_flag_lands_in_metadata_and_rows(self):
        proc = run_cli("cphase-error", "--samples", "120", "--seed", "7", "--no-timestamp")
        assert proc.returncode == 0
        assert "# seed: 7" in proc.stdout
        assert proc.stdout.splitlines()[-1].endswith(",7")


class TestValidateCommand:
    def test_default_passes(self):
        proc = run_cli("validate")
        assert proc.returncode == 0
        assert "trace-preservation,pass" in proc.stdout
        assert ",fail," not in proc.stdout

    def test_tampered_bound_exits_one(self, tmp_path):
        path = tmp_path / "tampered.json"
        path.write_text(json.dumps({"validation": {"trace_tol": 1e-15}}))
        proc = run_cli("validate", "--config", str(path))
        assert proc.returncode == 1
        assert "trace-preservation,fail" in proc.stdout

    def test_low_detuning_warn_row(self, tmp_path):
        path = tmp_path / "close.json"
        path.write_text(json.dumps({"experiments": {"transfer": {"detuning_hz": 3.9374e8}}}))
        proc = run_cli("validate", "--config", str(path))
        assert proc.returncode == 0
        assert "dispersive-regime,warn" in proc.stdout
