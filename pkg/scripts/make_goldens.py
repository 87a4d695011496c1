#!/usr/bin/env python3
"""Regenerate the golden regression outputs for every experiment.

Run after make_defaults.py whenever the committed defaults change.
"""

from __future__ import annotations

import os
import shutil
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from qfcring.config import default_config, emit_config, load_config
from qfcring.experiments import EXPERIMENTS, run_experiment

TESTS = os.path.join(os.path.dirname(__file__), "..", "tests")
GOLDEN = os.path.join(TESTS, "golden", "default_run")
FIXDIR = os.path.join(TESTS, "fixtures")
GOLDEN_PLANTED = os.path.join(TESTS, "golden", "planted_match")


def write_planted_fixture():
    """Constant-index device with an exact triple at 350 K (see tests/conftest)."""
    length_nm = 500.0e3
    table = ["wavelength_nm,width_nm,temperature_K,n_eff"]
    lams = [650.0 + 50.0 * j for j in range(22)]
    for t in (300.0, 350.0, 400.0):
        for lam in lams:
            n = 2.0 + 3.9e-5 * (t - 350.0)
            table.append(f"{lam:.1f},1500,{t:.1f},{n!r}")
    os.makedirs(FIXDIR, exist_ok=True)
    table_path = os.path.join(FIXDIR, "planted_table.csv")
    with open(table_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(table) + "\n")

    cfg = default_config()
    cfg.pop("calibration")
    cfg["device"].update({
        "ring_length_um": 500.0,
        "ppln_fraction": 0.0,
        "poling_period_um_by_width": {"1500": 5.0},
    })
    cfg["dispersion"]["table_file"] = "planted_table.csv"
    cfg["physics"]["signal_wavelength_nm"] = 2.0 * length_nm / 1357.0
    cfg["constraints"].update({
        "pump_base_wavelength_nm": 2.0 * length_nm / 616.0,
        "idler_base_wavelength_nm": 2.0 * length_nm / 741.0,
        "half_window_nm": 1.2,
        "t_ring_min_K": 340.0,
        "t_ring_max_K": 360.0,
        "t_step_mK": 10.0,
    })
    header = (
        "planted-solution fixture: dispersionless ring with an exact triple\n"
        "at T_ring = 350 K (modes 1357 = 616 + 741, poled fraction 0)\n"
        "generated by scripts/make_goldens.py"
    )
    path = os.path.join(FIXDIR, "planted.yaml")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(emit_config(cfg, header=header))
    return path


def main():
    for where in (GOLDEN, GOLDEN_PLANTED):
        if os.path.isdir(where):
            shutil.rmtree(where)
        os.makedirs(where)
    cfg = default_config()
    for name in EXPERIMENTS:
        outputs = run_experiment(name, cfg, GOLDEN)
        print(f"{name}: {len(outputs)} files")

    fixture = write_planted_fixture()
    here = os.getcwd()
    os.chdir(FIXDIR)  # fixture table path is relative to its directory
    try:
        planted_cfg = load_config(os.path.basename(fixture))
        run_experiment("match", planted_cfg, GOLDEN_PLANTED)
    finally:
        os.chdir(here)
    print(f"golden outputs written to {GOLDEN} and {GOLDEN_PLANTED}")


if __name__ == "__main__":
    main()
