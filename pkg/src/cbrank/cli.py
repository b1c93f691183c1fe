"""Command-line entry points.

Subcommands map onto the three ranking procedures plus three inspection
utilities:

- ``rank-lines``      Monte-Carlo line-fault campaign over every line.
- ``rank-buses``      Monte-Carlo bus-fault campaign over breaker-owning buses.
- ``rank-buses-det``  deterministic bolted three-phase fault per bus.
- ``powerflow``       solve and print the base-case power flow.
- ``simulate-one``    run a single fault scenario and export the angle traces.
- ``validate``        parse and sanity-check input files.

Exit codes: 0 success, 2 input or validation problem, 3 base power flow
did not converge, 4 numerical failure.  All state is explicit in flags
and config files; environment variables are not consulted.  Wall-clock
timing is printed to standard output, never written into report files,
which are byte-identical for identical inputs and seed at any worker
count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from ._version import __version__
from .errors import (
    CdfParseError,
    MachineIslandedError,
    NumericalError,
    PowerFlowError,
    ValidationError,
)
from .faults import FaultSpec, FaultType, build_phase_matrices
from .network import load_system, parse_cdf
from .powerflow import init_machine_internals, solve_power_flow
from .reporting import emit_report, emit_trajectory, render_top5
from .risk import rank_deterministic_lll, rank_elements
from .sampling import (
    MODE_BUS_FAULTS,
    MODE_DETERMINISTIC_LLL,
    MODE_LINE_FAULTS,
    CampaignConfig,
)
from .simulation import simulate_scenario

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_POWERFLOW = 3
EXIT_NUMERICAL = 4

_RANK_MODES = {
    "rank-lines": MODE_LINE_FAULTS,
    "rank-buses": MODE_BUS_FAULTS,
    "rank-buses-det": MODE_DETERMINISTIC_LLL,
}


def _add_io_flags(p: argparse.ArgumentParser, need_dyn: bool = True) -> None:
    p.add_argument("--system", required=True, help="IEEE common-format case file")
    p.add_argument(
        "--dyn", required=need_dyn, help="machine dynamics sidecar (JSON)"
    )


def _add_campaign_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--samples", type=int, help="samples per element")
    p.add_argument("--seed", type=int, help="campaign seed (64-bit unsigned)")
    p.add_argument("--out", help="output stem for <out>.csv and <out>.json")
    p.add_argument(
        "--threads",
        type=int,
        default=os.cpu_count() or 1,
        help="worker processes (default: available cores); never changes results",
    )
    p.add_argument("--config", help="JSON file with CampaignConfig fields")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cbrank",
        description="risk-based circuit-breaker priority ranking "
        "from probabilistic transient stability analysis",
    )
    parser.add_argument("--version", action="version", version=f"cbrank {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("rank-lines", "rank lines by Monte-Carlo fault risk"),
        ("rank-buses", "rank breaker-owning buses by Monte-Carlo fault risk"),
        ("rank-buses-det", "rank buses by deterministic bolted LLL faults"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_io_flags(p)
        _add_campaign_flags(p)

    p = sub.add_parser("powerflow", help="solve and print the base power flow")
    _add_io_flags(p, need_dyn=False)

    p = sub.add_parser("simulate-one", help="simulate one fault scenario")
    _add_io_flags(p)
    p.add_argument("--element", required=True, help="line id or Bus_NNNN id")
    p.add_argument(
        "--ftype",
        required=True,
        type=str.upper,
        choices=[ft.value for ft in FaultType],
        help="fault type (case-insensitive)",
    )
    p.add_argument(
        "--location",
        type=float,
        default=0.5,
        help="fault position along the line, 0..1 (line elements only)",
    )
    p.add_argument("--fct", type=float, default=0.9, help="fault clearing time [s]")
    p.add_argument("--out", required=True, help="trajectory CSV path")
    p.add_argument("--config", help="JSON file with CampaignConfig fields")

    p = sub.add_parser("validate", help="parse and check input files")
    _add_io_flags(p, need_dyn=False)

    return parser


def _load_config(args: argparse.Namespace, mode: str) -> CampaignConfig:
    base: dict = {}
    if getattr(args, "config", None):
        with open(args.config) as f:
            base = json.load(f)
    base["mode"] = mode
    if getattr(args, "samples", None) is not None:
        base["n_samples"] = args.samples
    if getattr(args, "seed", None) is not None:
        base["seed"] = args.seed
    if mode == MODE_DETERMINISTIC_LLL:
        base["n_samples"] = 1
    return CampaignConfig.from_dict(base)


def _run_ranking(args: argparse.Namespace, mode: str) -> int:
    system = load_system(args.system, args.dyn)
    config = _load_config(args, mode)
    t0 = time.perf_counter()
    if mode == MODE_DETERMINISTIC_LLL:
        report = rank_deterministic_lll(system, config, n_workers=args.threads)
    else:
        report = rank_elements(system, config, n_workers=args.threads)
    duration = time.perf_counter() - t0
    stem = args.out or mode
    csv_path, json_path = emit_report(report, stem)
    print(render_top5(report))
    if report.excluded:
        print(f"excluded elements: {', '.join(x.element for x in report.excluded)}")
    print(f"wrote {csv_path} and {json_path}")
    print(
        f"{len(report.entries)} elements x {config.n_samples} samples "
        f"in {duration:.1f} s with {args.threads} worker(s)"
    )
    return EXIT_OK


def _run_powerflow(args: argparse.Namespace) -> int:
    if args.dyn:
        system = load_system(args.system, args.dyn)
    else:
        system = parse_cdf(args.system)
    op = solve_power_flow(system)
    print(f"converged in {op.iterations} iterations, "
          f"max mismatch {op.max_mismatch_pu:.3e} pu")
    print(f"{'bus':>5} {'V [pu]':>9} {'angle [deg]':>12} "
          f"{'P_inj [MW]':>11} {'Q_inj [MVar]':>13}")
    s_inj = (op.s_gen_pu - op.s_load_pu) * system.mva_base
    for i, bus in enumerate(system.buses):
        print(
            f"{bus.bus_id:>5} {abs(op.v[i]):>9.4f} "
            f"{np.degrees(np.angle(op.v[i])):>12.4f} "
            f"{s_inj[i].real:>11.2f} {s_inj[i].imag:>13.2f}"
        )
    return EXIT_OK


def _run_simulate_one(args: argparse.Namespace) -> int:
    system = load_system(args.system, args.dyn)
    config = _load_config(args, MODE_LINE_FAULTS)
    kind = "bus" if args.element.startswith("Bus_") else "line"
    spec = FaultSpec(
        kind=kind,
        element_id=args.element,
        ftype=FaultType(args.ftype),
        location=args.location if kind == "line" else 0.0,
        zf_pu=config.zf_pu,
    )
    op = solve_power_flow(system)
    internals = init_machine_internals(system, op)
    matrices = build_phase_matrices(system, op, internals, spec)
    trajectory = simulate_scenario(
        matrices, internals, system.omega_s, args.fct, dt_s=config.dt_s, record=True
    )
    path = emit_trajectory(trajectory, args.out)
    verdict = "UNSTABLE" if trajectory.unstable else "stable"
    print(
        f"{args.element} {args.ftype} fct={args.fct} s: {verdict}, "
        f"delta_max = {trajectory.delta_max_deg:.2f} deg"
    )
    print(f"wrote {path}")
    return EXIT_OK


def _run_validate(args: argparse.Namespace) -> int:
    if args.dyn:
        system = load_system(args.system, args.dyn)
        n_mach = len(system.machines)
    else:
        system = parse_cdf(args.system)
        n_mach = 0
    lines = system.lines()
    print(
        f"{system.title.strip() or Path(args.system).name}: "
        f"{system.n_bus} buses, {len(system.branches)} branches "
        f"({len(lines)} lines), {n_mach} machines: OK"
    )
    return EXIT_OK


def main(argv: "list[str] | None" = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command in _RANK_MODES:
            return _run_ranking(args, _RANK_MODES[args.command])
        if args.command == "powerflow":
            return _run_powerflow(args)
        if args.command == "simulate-one":
            return _run_simulate_one(args)
        if args.command == "validate":
            return _run_validate(args)
        raise AssertionError(f"unhandled command {args.command}")
    except (
        FileNotFoundError,
        IsADirectoryError,
        CdfParseError,
        ValidationError,
        MachineIslandedError,
        KeyError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PowerFlowError as exc:
        print(f"power flow failed: {exc}", file=sys.stderr)
        return EXIT_POWERFLOW
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
