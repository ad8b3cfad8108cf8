import math
import re

import pytest

from tlrsim.config import ConfigError, canonical_json, load_config, tlr_params
from tlrsim.device import coupling_strength, mode_frequency, to_angular
from tlrsim.sweeps import (
    read_config_comment,
    render_csv,
    run_cphase_sweep,
    run_detector_sweep,
    run_transfer_sweep,
)

CONFIG = load_config()


def analytic_transfer_error(g, delta, kappa, gamma2):
    t = math.pi * abs(delta) / (2.0 * g * g)
    dephased = math.exp(-4.0 * (g / delta) ** 2 * gamma2 * t)
    return 1.0 - math.exp(-kappa * t) * 0.5 * (1.0 + dephased)


class TestTransferSweep:
    def test_grid_order_first_axis_slowest(self):
        result = run_transfer_sweep(CONFIG)
        kappas = CONFIG["experiments"]["transfer"]["kappa_grid_hz"]
        gamma2s = CONFIG["experiments"]["transfer"]["gamma2_grid_hz"]
        assert len(result.rows) == len(kappas) * len(gamma2s)
        expected = [(k, g) for k in kappas for g in gamma2s]
        assert [(row[0], row[1]) for row in result.rows] == expected

    def test_operating_point_matches_closed_form(self):
        result = run_transfer_sweep(CONFIG)
        row = next(r for r in result.rows if r[0] == 1.0e4 and r[1] == 1.0e6)
        tlr = tlr_params(CONFIG)
        g = coupling_strength(mode_frequency(tlr), 5.0e-12, 2.3e-14, 5.0e-13)
        expected = analytic_transfer_error(
            g, to_angular(2.0e9), to_angular(1.0e4), to_angular(1.0e6)
        )
        assert row[2] == pytest.approx(expected, rel=1e-9)
        assert 3.0e-4 < row[2] < 5.0e-3

    def test_neg_log10_column(self):
        result = run_transfer_sweep(CONFIG)
        for row in result.rows:
            assert row[3] == pytest.approx(-math.log10(row[2]), rel=1e-12)

    def test_monotone_in_both_axes(self):
        result = run_transfer_sweep(CONFIG)
        table = {(row[0], row[1]): row[2] for row in result.rows}
        kappas = CONFIG["experiments"]["transfer"]["kappa_grid_hz"]
        gamma2s = CONFIG["experiments"]["transfer"]["gamma2_grid_hz"]
        for k0, k1 in zip(kappas, kappas[1:]):
            for g in gamma2s:
                assert table[(k1, g)] >= table[(k0, g)]
        for g0, g1 in zip(gamma2s, gamma2s[1:]):
            for k in kappas:
                assert table[(k, g1)] >= table[(k, g0)]

    def test_worker_count_does_not_change_bytes(self):
        serial = run_transfer_sweep(CONFIG, jobs=1)
        parallel = run_transfer_sweep(CONFIG, jobs=4)
        assert render_csv(serial, timestamp=False) == render_csv(parallel, timestamp=False)


class TestCphaseSweep:
    def test_row_shape_and_determinism(self):
        result = run_cphase_sweep(CONFIG, samples=150)
        assert result.columns == ("ratio", "error", "std_err", "n_samples", "seed")
        assert [row[0] for row in result.rows] == [5.0, 10.0, 20.0, 40.0, 80.0]
        for row in result.rows:
            assert row[3] == 150 and row[4] == 42
        again = run_cphase_sweep(CONFIG, samples=150)
        assert render_csv(result, timestamp=False) == render_csv(again, timestamp=False)

    def test_parallel_matches_serial(self):
        serial = run_cphase_sweep(CONFIG, jobs=1, samples=150)
        parallel = run_cphase_sweep(CONFIG, jobs=3, samples=150)
        assert render_csv(serial, timestamp=False) == render_csv(parallel, timestamp=False)

    def test_monotone_within_two_std_errors(self):
        result = run_cphase_sweep(CONFIG)
        rows = result.rows
        for prev, nxt in zip(rows, rows[1:]):
            slack = 2.0 * math.hypot(prev[2], nxt[2])
            assert nxt[1] <= prev[1] + slack

    def test_sample_floor_enforced(self):
        with pytest.raises(ConfigError, match="quick"):
            run_cphase_sweep(CONFIG, samples=50)
        result = run_cphase_sweep(CONFIG, samples=50, quick=True)
        assert result.quick
        assert "# quick:" in render_csv(result, timestamp=False)

    def test_seed_override_changes_output(self):
        base = run_cphase_sweep(CONFIG, samples=150)
        other = run_cphase_sweep(CONFIG, samples=150, seed=7)
        assert base.rows != other.rows
        assert all(row[4] == 7 for row in other.rows)


class TestDetectorSweep:
    def test_columns_and_reference_point(self):
        result = run_detector_sweep(CONFIG)
        assert result.columns == (
            "gamma_over_kappa",
            "efficiency",
            "one_minus_eff",
            "converged",
            "t_final_s",
        )
        row = next(r for r in result.rows if r[0] == 2000.0)
        assert row[1] > 0.99
        assert row[2] == pytest.approx(1.0 - row[1], abs=1e-15)
        assert row[3] == 1

    def test_efficiency_monotone_in_ratio(self):
        result = run_detector_sweep(CONFIG)
        effs = [row[1] for row in result.rows]
        assert effs == sorted(effs)

    def test_nonpositive_ratio_rejected(self):
        with pytest.raises(ConfigError, match="gamma_over_kappa"):
            run_detector_sweep(load_config({"experiments": {"detector": {"gamma_over_kappa": [0.0]}}}))


class TestCsvFormat:
    def test_metadata_block(self):
        result = run_detector_sweep(CONFIG)
        text = render_csv(result)
        lines = text.splitlines()
        assert lines[0] == "# tool: tlrsim 0.1.0"
        assert lines[1] == "# experiment: detector"
        assert lines[2].startswith("# config_hash: ")
        assert lines[3] == "# seed: 42"
        assert any(re.fullmatch(r"# timestamp: \d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z", l) for l in lines)
        assert render_csv(result, timestamp=False).count("# timestamp") == 0

    def test_float_cells_have_nine_significant_digits(self):
        result = run_transfer_sweep(CONFIG)
        body = render_csv(result, timestamp=False).splitlines()
        data = [l for l in body if not l.startswith("#")][1:]
        cell = re.compile(r"-?\d\.\d{8}e[+-]\d{2,3}")
        for line in data:
            for field in line.split(","):
                assert cell.fullmatch(field), field

    def test_integer_cells_stay_integers(self):
        result = run_cphase_sweep(CONFIG, samples=120)
        data = [l for l in render_csv(result, timestamp=False).splitlines() if not l.startswith("#")][1:]
        for line in data:
            fields = line.split(",")
            assert fields[3] == "120"
            assert fields[4] == "42"

    def test_config_comment_reproduces_run(self):
        result = run_cphase_sweep(CONFIG, samples=150)
        text = render_csv(result, timestamp=False)
        recovered = read_config_comment(text)
        assert canonical_json(recovered) == canonical_json(CONFIG)
        rerun = run_cphase_sweep(load_config(recovered), samples=150)
        assert render_csv(rerun, timestamp=False) == text

    def test_missing_config_comment_raises(self):
        with pytest.raises(ValueError, match="config"):
            read_config_comment("a,b\n1,2\n")

    def test_provenance_fields(self):
        result = run_transfer_sweep(CONFIG)
        prov = result.provenance
        assert prov["tool"] == "tlrsim 0.1.0"
        assert prov["seed"] == 42
        assert len(prov["config_hash"]) == 64
