"""Compute reference spreading exponents for the committed fixtures.

Runs the simulator package's own power-law fit over the sweep CSVs that the
renderer consumes, so the TypeScript fit can be checked against the Python
analysis on byte-identical inputs.

Usage: python3 fig5_reference.py <sweep_dir>  (prints JSON to stdout)
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

from spinor_sim.observables import fit_diffusion_exponent


def read_observables(path: Path) -> tuple[dict[str, float], dict[str, np.ndarray]]:
    meta: dict[str, float] = {}
    header_lines = 0
    names: list[str] = []
    with path.open() as fh:
        for line in fh:
            if line.startswith("#"):
                header_lines += 1
                _, _, rest = line.partition("# ")
                key, sep, value = rest.partition(": ")
                if sep:
                    try:
                        meta[key.strip()] = float(value)
                    except ValueError:
                        pass
                continue
            names = line.strip().split(",")
            break
    data = np.loadtxt(path, delimiter=",", skiprows=header_lines + 1, ndmin=2)
    return meta, {name: data[:, i] for i, name in enumerate(names)}


def main() -> int:
    sweep_dir = Path(sys.argv[1])
    slopes: dict[str, float] = {}
    for member in sorted(sweep_dir.glob("kappa_*")):
        meta, cols = read_observables(member / "observables.csv")
        t_min = 3.0 * meta["drive_period_dimless"]
        alpha, _ = fit_diffusion_exponent(
            cols["t_dimless"], cols["x_std_dimless"], t_min=t_min)
        slopes[member.name.split("_", 1)[1]] = alpha
    json.dump(slopes, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
