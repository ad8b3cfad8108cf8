"""Figure-grade sweeps and CSV emission.

Every sweep is a pure function of (effective config, seed): points are
computed by a worker pool but emitted strictly in grid order, and any
Monte Carlo inside a point draws from a substream keyed on (seed, point
index, sample index), so the worker count can never change the bytes.

CSV layout: ``#`` metadata lines (tool version, config hash, seed,
optional timestamp, the full effective config for re-ingestion), then a
header row, then data rows with floats in 9-significant-digit lowercase
scientific notation.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .config import ConfigError, canonical_json, config_hash, detector_params, fjs_params, tlr_params
from .detector import DetectorParams, detection_efficiency
from .device import coupling_strength, fjs_derive, mode_frequency, to_angular
from .protocols import CphaseSpec, TransferSpec, cphase_spin_echo_error, transfer_gate_error

__all__ = [
    "SweepResult",
    "run_transfer_sweep",
    "run_cphase_sweep",
    "run_detector_sweep",
    "render_csv",
    "write_csv",
    "read_config_comment",
]


@dataclass(frozen=True)
class SweepResult:
    """One sweep: ordered rows plus everything needed to reproduce them."""

    experiment: str
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]
    config: dict
    seed: int
    quick: bool = False

    @property
    def provenance(self) -> dict:
        return {
            "tool": f"tlrsim {__version__}",
            "config_hash": config_hash(self.config),
            "seed": self.seed,
        }


def _map_points(fn, args_list, jobs: int):
    if jobs <= 1 or len(args_list) <= 1:
        return [fn(args) for args in args_list]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, args_list))


# ------------------------------------------------------------- transfer


def _transfer_point(args) -> tuple:
    coupling, detuning, kappa_hz, gamma2_hz = args
    spec = TransferSpec(
        coupling=coupling,
        detuning=detuning,
        photon_loss_rate=to_angular(kappa_hz),
        dephasing_rate=to_angular(gamma2_hz),
    )
    error = transfer_gate_error(spec).primary_error
    return (kappa_hz, gamma2_hz, error, -math.log10(max(error, 1e-300)))


def run_transfer_sweep(config: dict, jobs: int = 1) -> SweepResult:
    """Transfer-gate error over the loss/dephasing grid, loss rate slowest."""
    tlr = tlr_params(config)
    omega = mode_frequency(tlr)
    coupling = coupling_strength(
        omega,
        config["device"]["tlr"]["capacitance_f"],
        config["device"]["coupler"]["coupling_capacitance_f"],
        config["device"]["cbjj"]["junction_capacitance_f"],
    )
    detuning = to_angular(config["experiments"]["transfer"]["detuning_hz"])
    grid = [
        (coupling, detuning, kappa_hz, gamma2_hz)
        for kappa_hz in config["experiments"]["transfer"]["kappa_grid_hz"]
        for gamma2_hz in config["experiments"]["transfer"]["gamma2_grid_hz"]
    ]
    rows = _map_points(_transfer_point, grid, jobs)
    return SweepResult(
        experiment="transfer-error",
        columns=("kappa_hz", "gamma2_hz", "error", "neg_log10_error"),
        rows=tuple(rows),
        config=config,
        seed=config["noise"]["seed"],
    )


# ------------------------------------------------------------- cphase


def _cphase_point(args) -> tuple:
    derived, ratio, samples, seed, kappa, ideal_flips, index = args
    spec = CphaseSpec.from_fjs(
        derived,
        speed_ratio=ratio,
        sample_count=samples,
        seed=seed,
        photon_loss_rate=kappa,
        use_ideal_flips=ideal_flips,
    )
    report = cphase_spin_echo_error(spec, point_index=index)
    return (ratio, report.primary_error, report.metadata["std_error"], samples, seed)


def run_cphase_sweep(
    config: dict,
    jobs: int = 1,
    samples: int | None = None,
    seed: int | None = None,
    quick: bool = False,
) -> SweepResult:
    """Controlled-phase error versus transfer speed ratio.

    Authoritative results need at least 100 samples per point; smaller
    counts are only allowed with ``quick``, which marks the output.
    """
    n = config["noise"]["samples"] if samples is None else samples
    run_seed = config["noise"]["seed"] if seed is None else seed
    if n < 1:
        raise ConfigError("noise.samples", "must be at least 1")
    if n < 100 and not quick:
        raise ConfigError(
            "noise.samples", f"{n} samples below the authoritative minimum of 100; pass --quick"
        )
    derived = fjs_derive(fjs_params(config), tlr_params(config))
    kappa = to_angular(config["experiments"]["cphase"]["kappa_hz"])
    ideal_flips = config["experiments"]["cphase"]["flips"] == "ideal"
    grid = [
        (derived, ratio, n, run_seed, kappa, ideal_flips, index)
        for index, ratio in enumerate(config["experiments"]["cphase"]["speed_ratios"])
    ]
    rows = _map_points(_cphase_point, grid, jobs)
    return SweepResult(
        experiment="cphase-error",
        columns=("ratio", "error", "std_err", "n_samples", "seed"),
        rows=tuple(rows),
        config=config,
        seed=run_seed,
        quick=quick,
    )


# ------------------------------------------------------------- detector


def _detector_point(args) -> tuple:
    base, ratio = args
    params = DetectorParams(
        coupling=base.coupling,
        detuning=base.detuning,
        photon_loss_rate=base.photon_loss_rate,
        escape_rate=ratio * base.photon_loss_rate,
        intra_well_decay=base.intra_well_decay,
        dephasing_rate=base.dephasing_rate,
    )
    result = detection_efficiency(params)
    return (
        ratio,
        result.efficiency,
        1.0 - result.efficiency,
        int(result.converged),
        result.t_final,
    )


def run_detector_sweep(config: dict, jobs: int = 1) -> SweepResult:
    """Detector efficiency versus escape-to-loss ratio at fixed loss."""
    base = detector_params(config)
    ratios = config["experiments"]["detector"]["gamma_over_kappa"]
    if any(r <= 0 for r in ratios):
        raise ConfigError("experiments.detector.gamma_over_kappa", "ratios must be positive")
    rows = _map_points(_detector_point, [(base, r) for r in ratios], jobs)
    return SweepResult(
        experiment="detector",
        columns=("gamma_over_kappa", "efficiency", "one_minus_eff", "converged", "t_final_s"),
        rows=tuple(rows),
        config=config,
        seed=config["noise"]["seed"],
    )


# ------------------------------------------------------------- emission


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    return f"{float(value):.8e}"


def render_csv(result: SweepResult, timestamp: bool = True) -> str:
    lines = [
        f"# tool: tlrsim {__version__}",
        f"# experiment: {result.experiment}",
        f"# config_hash: {config_hash(result.config)}",
        f"# seed: {result.seed}",
    ]
    if result.quick:
        lines.append("# quick: results below the authoritative sample minimum")
    if timestamp:
        stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        lines.append(f"# timestamp: {stamp}")
    lines.append(f"# config: {canonical_json(result.config)}")
    lines.append(",".join(result.columns))
    for row in result.rows:
        lines.append(",".join(_format_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(result: SweepResult, path: str | Path, timestamp: bool = True) -> None:
    Path(path).write_text(render_csv(result, timestamp=timestamp))


def read_config_comment(text: str) -> dict:
    """Recover the effective config embedded in a CSV's metadata block."""
    for line in text.splitlines():
        if line.startswith("# config: "):
            return json.loads(line[len("# config: ") :])
    raise ValueError("no config metadata line found")
