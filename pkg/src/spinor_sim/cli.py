"""Command line front end: run / sweep / presets / validate.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
Failures print a one-line JSON report to stderr so callers can parse them.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, NumericalError
from .output import config_dict, config_hash, write_run, write_sweep
from .scenarios import (PARAMETER_FIELDS, PRESETS, ScenarioConfig,
                        build_initial, get_preset, resolve, run_scenario,
                        run_sweep)

log = logging.getLogger("spinor_sim")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def parse_theta(text: str) -> float:
    """Angle in radians; a trailing 'pi' multiplies, e.g. '0.1pi'."""
    s = text.strip().lower().replace(" ", "")
    if s.endswith("pi"):
        head = s[:-2]
        if head in ("", "+"):
            return math.pi
        if head == "-":
            return -math.pi
        return float(head) * math.pi
    return float(s)


_PARSERS = {name: (parse_theta if name == "theta" else float)
            for name in PARAMETER_FIELDS}


def _parse_values(flag: str, raw: str) -> list[float]:
    parser = _PARSERS[flag]
    try:
        return [parser(part) for part in raw.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise ConfigurationError(f"--{flag}: cannot parse {raw!r}: {exc}") from None


def load_config_file(path: str) -> ScenarioConfig:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigurationError(f"config file {path} must hold a JSON object")
    known = {f.name for f in dataclasses.fields(ScenarioConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigurationError(f"unknown config fields: {', '.join(unknown)}")
    if "kind" not in data:
        raise ConfigurationError("config file must set 'kind'")
    if data.get("sweep_values") is not None:
        data["sweep_values"] = tuple(data["sweep_values"])
    return ScenarioConfig(**data)


def _base_config(args) -> ScenarioConfig:
    if args.preset and args.config:
        raise ConfigurationError("--preset and --config are mutually exclusive")
    if args.preset:
        return get_preset(args.preset)
    if args.config:
        return load_config_file(args.config)
    raise ConfigurationError("need --preset <name> or --config <path>")


def _gather_overrides(args, allow_lists: bool):
    """Split override flags into scalar replacements and one optional sweep axis."""
    overrides: dict = {}
    sweep_axis: tuple[str, list[float]] | None = None
    for flag, field_name in PARAMETER_FIELDS.items():
        raw = getattr(args, flag, None)
        if raw is None:
            continue
        values = _parse_values(flag, raw)
        if not values:
            raise ConfigurationError(f"--{flag}: no values given")
        if len(values) == 1:
            overrides[field_name] = values[0]
        elif allow_lists:
            if sweep_axis is not None:
                raise ConfigurationError("only one flag may carry a value list")
            sweep_axis = (flag, values)
        else:
            raise ConfigurationError(f"--{flag} takes a single value here "
                                     "(value lists belong to the sweep verb)")
    if getattr(args, "seed", None) is not None:
        overrides["master_seed"] = args.seed
    if getattr(args, "ntraj", None) is not None:
        overrides["n_trajectories"] = args.ntraj
    return overrides, sweep_axis


def _resolve_threads(args) -> int:
    if args.threads is not None:
        n = args.threads
    else:
        env = os.environ.get("SPINOR_SIM_THREADS", "")
        try:
            n = int(env) if env else 1
        except ValueError:
            raise ConfigurationError(
                f"SPINOR_SIM_THREADS must be an integer, got {env!r}") from None
    if n < 1:
        raise ConfigurationError(f"thread count must be >= 1, got {n}")
    return n


def _out_dir(args, config: ScenarioConfig) -> Path:
    if args.out:
        return Path(args.out)
    return Path("runs") / (config.name or config.kind)


def _report_error(kind: str, exc: Exception, exit_code: int,
                  out_dir: Path | None = None) -> int:
    report = {"error": kind, "message": str(exc), "exit_code": exit_code}
    diagnostic = getattr(exc, "diagnostic", None)
    if isinstance(diagnostic, dict) and diagnostic:
        arrays = {k: v for k, v in diagnostic.items() if isinstance(v, np.ndarray)}
        scalars = {k: float(v) for k, v in diagnostic.items()
                   if np.isscalar(v) and np.isreal(v)}
        if scalars:
            report["diagnostic"] = scalars
        if arrays and out_dir is not None:
            out_dir.mkdir(parents=True, exist_ok=True)
            snap = out_dir / "diagnostic.npz"
            np.savez(snap, **arrays)
            report["diagnostic_snapshot"] = str(snap)
    print(json.dumps(report), file=sys.stderr)
    return exit_code


def cmd_run(args) -> int:
    config = _base_config(args)
    overrides, _ = _gather_overrides(args, allow_lists=False)
    config = dataclasses.replace(config, **overrides)
    threads = _resolve_threads(args)
    out = _out_dir(args, config)
    try:
        result = run_scenario(config, threads=threads)
    except NumericalError as exc:
        return _report_error("numerical", exc, EXIT_NUMERICAL, out)
    paths = write_run(out, result)
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = _base_config(args)
    overrides, sweep_axis = _gather_overrides(args, allow_lists=True)
    config = dataclasses.replace(config, **overrides)
    threads = _resolve_threads(args)
    out = _out_dir(args, config)
    parameter, values = (sweep_axis if sweep_axis is not None else (None, None))
    try:
        sweep = run_sweep(config, parameter=parameter, values=values,
                          threads=threads)
    except NumericalError as exc:
        # member failures are tagged in the summary; this is a setup failure
        return _report_error("numerical", exc, EXIT_NUMERICAL, out)
    paths = write_sweep(out, sweep)
    for p in paths:
        print(p)
    if any(m.failed for m in sweep.members):
        failed = [f"{sweep.parameter}={m.value:g}" for m in sweep.members if m.failed]
        print(json.dumps({"warning": "sweep members failed",
                          "members": failed}), file=sys.stderr)
    return EXIT_OK


def cmd_presets(args) -> int:
    if args.json:
        payload = {name: config_dict(cfg) for name, cfg in PRESETS.items()}
        print(json.dumps(payload, indent=2, sort_keys=True))
        return EXIT_OK
    header = f"{'name':<16} {'kind':<16} {'v0':>4} {'sigma':>6} {'theta':>8} " \
             f"{'kappa/s':>8} {'ntraj':>6} {'duration':>10}"
    print(header)
    print("-" * len(header))
    for name in sorted(PRESETS):
        cfg = PRESETS[name]
        if cfg.kind == "bloch":
            duration = f"{cfg.n_bloch_periods:g} T_B"
        else:
            duration = f"{cfg.n_drive_periods * cfg.drive_period_s * 1e3:g} ms"
        print(f"{name:<16} {cfg.kind:<16} {cfg.v0:>4g} {cfg.sigma_lambda:>6g} "
              f"{cfg.theta / math.pi:>7.3g}p {cfg.kappa_per_s:>8g} "
              f"{cfg.n_trajectories:>6d} {duration:>10}")
    return EXIT_OK


def cmd_validate(args) -> int:
    config = _base_config(args)
    overrides, _ = _gather_overrides(args, allow_lists=False)
    config = dataclasses.replace(config, **overrides)
    resolved = resolve(config)
    build_initial(resolved)       # exercises the envelope/grid preconditions
    payload = {
        "valid": True,
        "config": config_dict(config),
        "config_hash": config_hash(config),
        "derived": {k: float(v) for k, v in resolved.derived.items()},
        "timeline_items": len(resolved.timeline),
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def _add_common_flags(sub, with_out: bool = True):
    sub.add_argument("--config", help="JSON scenario config file")
    sub.add_argument("--preset", help="named preset (see the presets verb)")
    if with_out:
        sub.add_argument("--out", help="output directory (default runs/<name>)")
        sub.add_argument("--seed", type=int, help="master seed override")
        sub.add_argument("--threads", type=int,
                         help="worker processes (default SPINOR_SIM_THREADS or 1)")
    sub.add_argument("--kappa", help="dephasing rate in 1/s")
    sub.add_argument("--vs", help="potential step height, recoil units")
    sub.add_argument("--theta", help="pulse angle, radians or e.g. 0.1pi")
    sub.add_argument("--v0", help="lattice depth, recoil units")
    sub.add_argument("--sigma", help="envelope width in lattice wavelengths")
    sub.add_argument("--ntraj", type=int, help="trajectory count override")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinor-sim",
        description="Spin-1/2 atoms in a driven 1D optical lattice")
    parser.add_argument("--verbose", action="store_true",
                        help="progress logging to stderr")
    verbs = parser.add_subparsers(dest="verb", required=True)

    run_p = verbs.add_parser("run", help="execute one scenario")
    _add_common_flags(run_p)
    run_p.set_defaults(func=cmd_run)

    sweep_p = verbs.add_parser(
        "sweep", help="repeat a scenario along one parameter axis; "
                      "give the axis as a comma list, e.g. --vs 0,0.015,0.1")
    _add_common_flags(sweep_p)
    sweep_p.set_defaults(func=cmd_sweep)

    presets_p = verbs.add_parser("presets", help="list bundled presets")
    presets_p.add_argument("--json", action="store_true",
                           help="full configs as JSON")
    presets_p.set_defaults(func=cmd_presets)

    val_p = verbs.add_parser("validate", help="check a config without running")
    _add_common_flags(val_p, with_out=False)
    val_p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        return _report_error("configuration", exc, EXIT_CONFIG)
    except NumericalError as exc:
        return _report_error("numerical", exc, EXIT_NUMERICAL)


if __name__ == "__main__":
    sys.exit(main())
