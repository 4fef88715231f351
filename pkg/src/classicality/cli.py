"""Command-line interface.

Subcommands: ``check`` (t = 0 consistency criteria), ``classicality``
(order/max-p0 reports), ``evolve`` (time-evolution verification, CSV
record), ``scan`` (one-parameter sweep, CSV summary) and ``selftest``
(oracle cross-check battery). One JSON config file drives everything;
``--set path=value`` overrides single leaves. Exit status is 0 iff all
requested checks pass; validation problems exit 2, resource/coverage
trips exit 3, both with a machine-readable errors.json.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import criteria as crit
from .config import RunConfig, apply_override, parse_config
from .errors import ConfigError, GridCoverageError, SequenceBudgetError
from .evolution import verify_consistency_over_time
from .reports import write_json
from .selftest import run_selftest

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_RESOURCE = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="classicality",
        description="Quantify how classical a quantum system's initial data is, "
                    "and verify the consistency of its time evolution.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
            ("check", "run both consistency criteria at t=0"),
            ("classicality", "report achievable classicality order and p0"),
            ("evolve", "verify consistency along the quantum evolution"),
            ("scan", "sweep one config parameter and summarize pass regions")):
        cmd = sub.add_parser(name, help=doc)
        cmd.add_argument("--config", required=True, help="JSON config file")
        cmd.add_argument("--set", action="append", default=[], metavar="PATH=VALUE",
                         help="override one config leaf (repeatable)")
        cmd.add_argument("--out", default=None, help="output directory (default: config output.dir)")
        cmd.add_argument("--seed", type=int, default=None, help="override the config seed")
        cmd.add_argument("--workers", type=int, default=None, help="override worker count")
    sub.add_parser("selftest", help="run the built-in oracle cross-checks")
    return parser


def _load_config(args) -> tuple[RunConfig, Path]:
    text = Path(args.config).read_text()
    raw = json.loads(text)
    for override in args.set:
        if "=" not in override:
            raise ConfigError([("--set", f"expected PATH=VALUE, got {override!r}")])
        path, value = override.split("=", 1)
        apply_override(raw, path, value)
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.workers is not None:
        raw["workers"] = args.workers
    config = parse_config(json.dumps(raw))
    out_dir = Path(args.out) if args.out else Path(config.raw["output"]["dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    return config, out_dir


def _emit_error(out_dir: Path, kind: str, payload: dict) -> None:
    write_json(out_dir / "errors.json", {"error": {"type": kind, **payload}})


def _static_objects(config: RunConfig, purpose: str = "static"):
    system = config.build_system()
    data = config.build_data(system)
    axes = config.build_axes(system, data, purpose)
    state = config.build_state(system, axes)
    return system, data, state


def cmd_check(config: RunConfig, out_dir: Path) -> int:
    system, data, state = _static_objects(config)
    block = config.raw["criteria"]
    first = crit.consistency_first(state, system.phase_space, data, target_p0=block["p0"])
    second = crit.consistency_second(state, system.phase_space, data, block["M"],
                                     block["p_samples"])
    payload = {
        "config": config.resolved(),
        "consistency_first": first.to_dict(),
        "consistency_second": second.to_dict(),
    }
    write_json(out_dir / "report.json", payload)
    print(first.to_text())
    print(second.to_text())
    return EXIT_PASS if first.passed and second.passed else EXIT_FAIL


def cmd_classicality(config: RunConfig, out_dir: Path) -> int:
    system, data, state = _static_objects(config)
    block = config.raw["criteria"]
    evo = config.raw["evolution"]
    t_samples = list(np.linspace(evo["t_window"][1] / 8, evo["t_window"][1], 8))
    requested = crit.classicality_first(state, data, system, block["M"], t_samples)
    second = crit.classicality_second(state, data, system, block["p0"], t_samples)
    max_m = 0
    for order in range(1, block["M_max"] + 1):
        if crit.classicality_first(state, data, system, order, t_samples).passed:
            max_m = order
        else:
            break
    payload = {
        "config": config.resolved(),
        "classicality_first": requested.to_dict(),
        "classicality_second": second.to_dict(),
        "max_M": max_m,
        "max_p0": second.aggregate["max_p0"],
        "sufficient_consistency_order": crit.sufficient_consistency_order(
            state, system.phase_space, data, block["M_max"]),
    }
    gaussians = config.gaussian_specs()
    if gaussians is not None:
        widths = [g["width"] for g in gaussians]
        payload["gaussian_fastpath"] = crit.gaussian_fastpath(
            widths, data, system, block["M"], t_samples, hbar=config.hbar()).to_dict()
    write_json(out_dir / "report.json", payload)
    print(requested.to_text())
    print(second.to_text())
    print(f"max M = {max_m}; max p0 = {second.aggregate['max_p0']:.6f}")
    return EXIT_PASS if requested.passed else EXIT_FAIL


def cmd_evolve(config: RunConfig, out_dir: Path) -> int:
    system, data, state = _static_objects(config, purpose="evolve")
    evo = config.raw["evolution"]
    t0, t1 = evo["t_window"]
    samples = np.linspace(t0, t1, evo["samples"])
    record = verify_consistency_over_time(
        state, data, system, samples, evo["P_list"], config.raw["criteria"]["M"],
        total_steps=evo["steps"], require_classical=False)
    record.write_csv(out_dir / "evolution.csv")
    write_json(out_dir / "report.json", {
        "config": config.resolved(),
        "evolution": record.to_dict(),
    })
    gate = record.aggregate["initial_classicality_passed"]
    print(f"evolution check: {'PASS' if record.passed else 'FAIL'} "
          f"(min slack {record.min_slack():.4e}, initial classicality "
          f"{'pass' if gate else 'FAIL'})")
    return EXIT_PASS if record.passed and gate else EXIT_FAIL


def cmd_scan(config: RunConfig, out_dir: Path) -> int:
    if "scan" not in config.raw:
        raise ConfigError([("scan", "missing scan block")])
    block = config.raw["scan"]
    orders = block.get("orders", [1])
    values = np.linspace(block["min"], block["max"], block["count"])
    rows = []
    all_pass = True
    for index, value in enumerate(values):
        raw = json.loads(json.dumps(config.raw))
        apply_override(raw, block["parameter"], repr(float(value)))
        point = parse_config(json.dumps(raw))
        system = point.build_system()
        data = point.build_data(system)
        evo = point.raw["evolution"]
        t_samples = list(np.linspace(evo["t_window"][1] / 8, evo["t_window"][1], 8))
        gaussians = point.gaussian_specs()
        pass_at = {}
        max_m = 0
        max_order = max(max(orders), point.raw["criteria"]["M_max"])
        for order in range(1, max_order + 1):
            if gaussians is not None:
                widths = [g["width"] for g in gaussians]
                report = crit.gaussian_fastpath(widths, data, system, order, t_samples,
                                                hbar=point.hbar())
            else:
                axes = point.build_axes(system, data)
                state = point.build_state(system, axes)
                report = crit.classicality_first(state, data, system, order, t_samples)
            if order in orders:
                pass_at[order] = report.passed
            if report.passed and max_m == order - 1:
                max_m = order
        rows.append((index, float(value), max_m, [pass_at[o] for o in orders]))
        all_pass = all_pass and all(pass_at.values())
    with open(out_dir / "scan.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "value", "max_M"] + [f"pass_M{o}" for o in orders])
        for index, value, max_m, flags in rows:
            writer.writerow([index, repr(value), max_m] + [int(f) for f in flags])
    print(f"scan: {len(rows)} points over {block['parameter']} in "
          f"[{block['min']:g}, {block['max']:g}]")
    return EXIT_PASS if all_pass else EXIT_FAIL


def cmd_selftest() -> int:
    results = run_selftest()
    width = max(len(r.name) for r in results)
    ok = True
    for r in results:
        ok = ok and r.passed
        print(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL'}  {r.detail}")
    print(f"selftest: {'all checks passed' if ok else 'FAILURES present'}")
    return EXIT_PASS if ok else EXIT_FAIL


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "selftest":
        return cmd_selftest()
    out_dir = Path(args.out) if args.out else Path(".")
    try:
        config, out_dir = _load_config(args)
    except ConfigError as exc:
        out_dir.mkdir(parents=True, exist_ok=True)
        _emit_error(out_dir, "config", {"issues": [
            {"path": path, "message": msg} for path, msg in exc.issues]})
        for path, msg in exc.issues:
            print(f"config error at {path}: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "check":
            return cmd_check(config, out_dir)
        if args.command == "classicality":
            return cmd_classicality(config, out_dir)
        if args.command == "evolve":
            return cmd_evolve(config, out_dir)
        if args.command == "scan":
            return cmd_scan(config, out_dir)
    except ConfigError as exc:
        _emit_error(out_dir, "config", {"issues": [
            {"path": path, "message": msg} for path, msg in exc.issues]})
        for path, msg in exc.issues:
            print(f"config error at {path}: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except (GridCoverageError, SequenceBudgetError) as exc:
        kind = "coverage" if isinstance(exc, GridCoverageError) else "resource"
        _emit_error(out_dir, kind, {"message": str(exc)})
        print(f"{kind} error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    raise SystemExit(main())
