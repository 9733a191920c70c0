"""Serialized run artifacts: observables CSV, density snapshots, manifest.

Columns carry both unit systems (SI in ms/um, dimensionless in recoil
units).  Files start with a '#'-prefixed header block naming the scenario
and the config hash, so any consumer can check provenance without parsing
the manifest.  Float formatting is fixed at %.12g to keep outputs
byte-identical across runs of the same config.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from .dephasing import EnsembleResult
from .observables import ObservableSeries
from .scenarios import ScenarioConfig, ScenarioResult, SweepResult

FLOAT_FMT = "%.12g"

OBSERVABLE_COLUMNS = [
    "t_si_ms", "t_dimless",
    "x_mean_um", "x_mean_dimless",
    "x_std_um", "x_std_dimless",
    "x_mean_up_um", "x_mean_up_dimless",
    "x_mean_down_um", "x_mean_down_dimless",
    "pop_up", "pop_down",
    "coherence_re", "coherence_im",
    "norm",
]

ENSEMBLE_EXTRA_COLUMNS = [
    "x_mean_stderr_um", "pop_up_stderr", "pop_down_stderr", "coherence_stderr",
]


def config_dict(config: ScenarioConfig) -> dict:
    d = dataclasses.asdict(config)
    if d.get("sweep_values") is not None:
        d["sweep_values"] = list(d["sweep_values"])
    return d


def config_hash(config: ScenarioConfig) -> str:
    payload = json.dumps(config_dict(config), sort_keys=True,
                         separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _fmt(value: float) -> str:
    if value is None or not np.isfinite(value):
        return "nan"
    return FLOAT_FMT % value


def _header_lines(result: ScenarioResult, title: str) -> list[str]:
    cfg = result.config
    lines = [
        f"# {title}",
        f"# scenario: {cfg.name or cfg.kind} (kind {cfg.kind})",
        f"# config_hash: {config_hash(cfg)}",
    ]
    for key in sorted(result.derived):
        lines.append(f"# {key}: {_fmt(result.derived[key])}")
    return lines


def _length_um(result: ScenarioResult) -> float:
    return 1e6 / result.params.k0


def _time_ms(result: ScenarioResult) -> float:
    return result.params.time_unit * 1e3


def write_observables(path: Path, result: ScenarioResult) -> None:
    """One row per sampled time; ensembles add standard-error columns."""
    lu, tu = _length_um(result), _time_ms(result)
    series = result.series
    ens = result.ensemble
    columns = list(OBSERVABLE_COLUMNS)
    if ens is not None:
        columns += ENSEMBLE_EXTRA_COLUMNS

    rows = []
    if series is not None:
        src: ObservableSeries | EnsembleResult = series
        x_up, x_down = series.x_mean_up, series.x_mean_down
    else:
        src = ens
        x_up = x_down = None
    times = src.t
    x_mean = src.x_mean
    coh = src.coherence
    for i, t in enumerate(times):
        row = [t * tu, t,
               x_mean[i] * lu, x_mean[i],
               src.x_std[i] * lu, src.x_std[i],
               (x_up[i] * lu if x_up is not None else None),
               (x_up[i] if x_up is not None else None),
               (x_down[i] * lu if x_down is not None else None),
               (x_down[i] if x_down is not None else None),
               src.pop_up[i], src.pop_down[i],
               coh[i].real, coh[i].imag,
               src.norm[i]]
        if ens is not None:
            row += [ens.x_mean_stderr[i] * lu,
                    ens.pop_up_stderr[i], ens.pop_down_stderr[i],
                    ens.coherence_stderr[i]]
        rows.append(",".join(_fmt(v) for v in row))

    lines = _header_lines(result, "observables")
    lines.append(",".join(columns))
    lines.extend(rows)
    path.write_text("\n".join(lines) + "\n")


def write_map_observables(path: Path, result: ScenarioResult) -> None:
    """Discrete-map companion series written next to the full simulation."""
    if result.map_times is None:
        raise ValueError("result carries no map series")
    lu, tu = _length_um(result), _time_ms(result)
    lines = _header_lines(result, "observables_dirac_map")
    lines.append("t_si_ms,t_dimless,x_mean_um,x_mean_dimless,x_std_um,x_std_dimless")
    for t, xm, xs in zip(result.map_times, result.map_x_mean, result.map_x_std):
        lines.append(",".join(_fmt(v) for v in
                              (t * tu, t, xm * lu, xm, xs * lu, xs)))
    path.write_text("\n".join(lines) + "\n")


def _write_density(path: Path, result: ScenarioResult, times, blocks: dict) -> None:
    lu, tu = _length_um(result), _time_ms(result)
    x_um = result.grid.x * lu
    lines = _header_lines(result, "density snapshots")
    lines.append("# first data row: x_um grid; then one row per snapshot, "
                 "leading column t_si_ms")
    for name, block in blocks.items():
        lines.append(f"# block {name}: rows {len(times)}")
    lines.append(",".join(["x_um"] + [FLOAT_FMT % v for v in x_um]))
    for name, block in blocks.items():
        for t, row in zip(times, block):
            lead = f"{name}@" + _fmt(t * tu)
            lines.append(",".join([lead] + [FLOAT_FMT % v for v in row]))
    path.write_text("\n".join(lines) + "\n")


def write_densities(path: Path, result: ScenarioResult) -> None:
    """Snapshot densities: blocks up/down/total (plus stderr for ensembles)."""
    if result.snapshots is not None:
        times = [s[0] for s in result.snapshots]
        up = np.array([s[1] for s in result.snapshots])
        down = np.array([s[2] for s in result.snapshots])
        blocks = {"up": up, "down": down, "total": up + down}
    elif result.snapshot_stats is not None:
        st = result.snapshot_stats
        times = st.times
        blocks = {"up": st.mean_up, "down": st.mean_down,
                  "total": st.mean_up + st.mean_down,
                  "total_stderr": st.stderr_total}
    else:
        raise ValueError("result carries no density snapshots")
    _write_density(path, result, times, blocks)


def write_manifest(path: Path, result: ScenarioResult, extra: dict | None = None) -> None:
    from . import __version__
    payload = {
        "config": config_dict(result.config),
        "config_hash": config_hash(result.config),
        "derived": {k: (None if v is None or not np.isfinite(v) else float(v))
                    for k, v in result.derived.items()},
        "versions": {
            "spinor_sim": __version__,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
        },
    }
    if extra:
        payload.update(extra)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_run(out_dir: Path, result: ScenarioResult) -> list[Path]:
    """All artifacts of one run into out_dir; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    obs = out_dir / "observables.csv"
    write_observables(obs, result)
    written.append(obs)

    if result.map_times is not None:
        map_path = out_dir / "observables_dirac_map.csv"
        write_map_observables(map_path, result)
        written.append(map_path)

    if result.snapshots is not None or result.snapshot_stats is not None:
        dens = out_dir / "densities.csv"
        write_densities(dens, result)
        written.append(dens)

    manifest = out_dir / "manifest.json"
    write_manifest(manifest, result)
    written.append(manifest)
    return written


def write_sweep(out_dir: Path, sweep: SweepResult,
                write_members: bool = True) -> list[Path]:
    """Member runs in subdirectories plus a final-time summary CSV."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    rows = []
    for member in sweep.members:
        if member.failed:
            rows.append((member.value, None, None, None, None,
                         member.error.replace(",", ";").replace("\n", " ")))
            continue
        result = member.result
        if write_members:
            sub = out_dir / f"{sweep.parameter}_{member.value:g}"
            written.extend(write_run(sub, result))
        lu = _length_um(result)
        t_final = float(result.times[-1]) * _time_ms(result)
        rows.append((member.value,
                     t_final,
                     result.x_mean_final * lu,
                     result.x_std_final * lu,
                     config_hash(member.config),
                     ""))

    summary = out_dir / "summary.csv"
    lines = [f"# sweep over {sweep.parameter}",
             f"{sweep.parameter},t_final_ms,x_mean_final_um,x_std_final_um,config_hash,error"]
    for value, t_final, xm, xs, h, err in rows:
        lines.append(",".join([
            _fmt(value),
            _fmt(t_final) if t_final is not None else "nan",
            _fmt(xm) if xm is not None else "nan",
            _fmt(xs) if xs is not None else "nan",
            h or "",
            err,
        ]))
    summary.write_text("\n".join(lines) + "\n")
    written.append(summary)
    return written
