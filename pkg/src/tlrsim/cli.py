"""Command line front end.

Subcommands map one-to-one onto the experiment layer: ``params`` prints
the derived operating point, the three sweep commands emit figure-grade
CSV, and ``validate`` runs the invariant suites. Exit codes: 0 success,
1 experiment or validation failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, load_config
from .device import (
    coupling_strength,
    effective_dephasing_rate,
    fjs_derive,
    induced_loss_rate,
    mode_frequency,
    thermal_occupancy,
    to_angular,
    to_linear,
    transfer_rate,
)
from .config import fjs_params, tlr_params
from .sweeps import render_csv, run_cphase_sweep, run_detector_sweep, run_transfer_sweep
from .validate import has_failure, render_report, run_validation

__all__ = ["main"]


def _seed_value(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tlrsim",
        description="Dual-rail microwave-photon qubit simulator",
    )
    parser.add_argument("--version", action="version", version=f"tlrsim {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON config file")
    common.add_argument("--out", metavar="PATH", help="output file (default stdout)")
    common.add_argument("--seed", type=_seed_value, help="override the sampling seed")
    common.add_argument("--samples", type=_positive_int, help="Monte Carlo samples per point")
    common.add_argument(
        "--quick", action="store_true", help="allow sample counts below the authoritative minimum"
    )
    common.add_argument(
        "--no-timestamp", action="store_true", help="omit the timestamp metadata line"
    )
    common.add_argument("--jobs", type=_positive_int, default=1, help="worker processes")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("params", parents=[common], help="print derived device quantities")
    sub.add_parser("transfer-error", parents=[common], help="photon transfer error sweep")
    sub.add_parser("cphase-error", parents=[common], help="controlled-phase error sweep")
    sub.add_parser("detector", parents=[common], help="detection efficiency sweep")
    sub.add_parser("validate", parents=[common], help="run the invariant suites")
    return parser


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _human_freq(hz: float) -> str:
    mag = abs(hz)
    for unit, scale in (("GHz", 1e9), ("MHz", 1e6), ("kHz", 1e3)):
        if mag >= scale:
            return f"{hz / scale:+.4f} {unit}"
    return f"{hz:+.4f} Hz"


def _params_report(config: dict) -> str:
    tlr = tlr_params(config)
    omega0 = mode_frequency(tlr)
    cap = config["device"]["tlr"]["capacitance_f"]
    cap_junction = config["device"]["cbjj"]["junction_capacitance_f"]
    g_left = coupling_strength(
        omega0, cap, config["device"]["coupler"]["coupling_capacitance_f"], cap_junction
    )
    g_right = coupling_strength(
        omega0, cap, config["device"]["coupler"]["right_coupling_capacitance_f"], cap_junction
    )
    delta = to_angular(config["experiments"]["transfer"]["detuning_hz"])
    rate = transfer_rate(g_left, delta)
    dephasing = effective_dephasing_rate(
        g_left, delta, to_angular(config["device"]["cbjj"]["dephasing_rate_hz"])
    )
    loss = induced_loss_rate(
        g_left, delta, to_angular(config["device"]["cbjj"]["decay_rate_hz"])
    )
    occupancy = thermal_occupancy(config["device"]["temperature_k"], omega0)
    derived = fjs_derive(fjs_params(config), tlr)

    rows = [
        ("mode_frequency_hz", to_linear(omega0), _human_freq(to_linear(omega0))),
        ("coupling_left_hz", to_linear(g_left), _human_freq(to_linear(g_left))),
        ("coupling_right_hz", to_linear(g_right), _human_freq(to_linear(g_right))),
        ("transfer_rate_hz", rate, _human_freq(rate)),
        ("effective_dephasing_hz", to_linear(dephasing), _human_freq(to_linear(dephasing))),
        ("induced_loss_hz", to_linear(loss), _human_freq(to_linear(loss))),
        ("thermal_occupancy", occupancy, "photons"),
        ("squid_chi_storage", derived.chi_c, "dimensionless"),
        ("squid_chi_interaction", derived.chi_d, "dimensionless"),
        ("squid_bias_phase_rad", derived.phi0, "rad"),
        ("squid_phase_spread_rad", derived.sigma_phi, "rad"),
        ("photon_shift_hz", to_linear(derived.omega_s), _human_freq(to_linear(derived.omega_s))),
        (
            "photon_shift_spread_hz",
            to_linear(derived.delta_omega_s),
            _human_freq(to_linear(derived.delta_omega_s)),
        ),
        (
            "photon_interaction_hz",
            to_linear(derived.omega_int),
            _human_freq(to_linear(derived.omega_int)),
        ),
        ("interaction_spread_rel", derived.delta_omega_int_rel, "dimensionless"),
    ]
    width = max(len(name) for name, _, _ in rows)
    lines = [f"{name:<{width}}  {value: .8e}  {note}" for name, value, note in rows]
    return "\n".join(lines) + "\n"


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config["noise"]["seed"] = args.seed
        if args.samples is not None:
            config["noise"]["samples"] = args.samples

        if args.command == "params":
            _emit(_params_report(config), args.out)
            return 0

        if args.command == "validate":
            results = run_validation(config)
            _emit(render_report(results), args.out)
            return 1 if has_failure(results) else 0

        timestamp = not args.no_timestamp
        if args.command == "transfer-error":
            result = run_transfer_sweep(config, jobs=args.jobs)
        elif args.command == "cphase-error":
            result = run_cphase_sweep(
                config,
                jobs=args.jobs,
                samples=args.samples,
                seed=args.seed,
                quick=args.quick,
            )
        else:
            result = run_detector_sweep(config, jobs=args.jobs)
        _emit(render_csv(result, timestamp=timestamp), args.out)
        if args.command == "detector" and all(row[3] == 0 for row in result.rows):
            print("error: no detector point converged", file=sys.stderr)
            return 1
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
