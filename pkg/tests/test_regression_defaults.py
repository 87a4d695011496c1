"""Regression pins for the committed calibrated defaults.

The absolute operating temperatures and wavelengths depend on the
committed synthetic dispersion, so they are pinned against
tests/golden/regression.json (regenerated by scripts/make_defaults.py)
rather than asserted as physics.
"""

import json
from pathlib import Path

import numpy as np
import pytest

from qfcring.builders import (
    build_constraints,
    build_device,
    build_fwm_channel,
    build_twm_system,
    companion_table_rad_s,
)
from qfcring.conversion import efficiency_vs_power, pump_power_unity_cooperativity
from qfcring.matching import dispersion_engineering_sweep, find_triple_resonance
from qfcring.noise import fwm_noise_rate, noise_vs_power

PINNED = json.loads((Path(__file__).parent / "golden" / "regression.json").read_text())


@pytest.mark.parametrize("width", [1400.0, 1500.0, 1600.0])
def test_per_width_operating_point_pinned(cfg, width):
    pin = PINNED["widths"][f"{width:g}"]
    device = build_device(cfg, width_nm=width)
    constraints = build_constraints(cfg)
    match = find_triple_resonance(device, constraints)[0]
    assert match.t_ring_K == pytest.approx(pin["t_ring_K"], abs=1e-6)
    assert match.pump.lambda_nm == pytest.approx(pin["pump_wavelength_nm"], abs=1e-9)
    assert match.idler.lambda_nm == pytest.approx(pin["idler_wavelength_nm"], abs=1e-9)
    assert [match.signal.m, match.pump.m, match.idler.m] == pin["m"]
    assert 300.0 <= match.t_ring_K <= 400.0

    system = build_twm_system(cfg, match)
    p_max = pump_power_unity_cooperativity(system)
    assert p_max * 1e3 == pytest.approx(pin["p_max_mW"], rel=1e-9)
    for role in ("pump", "signal", "idler"):
        assert getattr(match, role).eta == pytest.approx(pin["eta"][role], rel=1e-9)


def test_default_efficiency_curve_shape(cfg):
    device = build_device(cfg)
    match = find_triple_resonance(device, build_constraints(cfg))[0]
    system = build_twm_system(cfg, match)
    powers = np.geomspace(0.01e-3, 10e-3, 121)
    rows = efficiency_vs_power(system, powers)
    j = int(np.argmax(rows[:, 3]))
    # rises to the peak, then declines
    assert 0 < j < len(rows) - 1
    assert np.all(np.diff(rows[: j + 1, 3]) > 0.0)
    assert np.all(np.diff(rows[j:, 3]) < 0.0)
    pin = PINNED["widths"]["1500"]
    assert rows[j, 3] == pytest.approx(pin["eta_ex_at_p_max"], abs=5e-4)


def test_default_noise_curve_stays_low(cfg):
    device = build_device(cfg)
    constraints = build_constraints(cfg)
    match = find_triple_resonance(device, constraints)[0]
    sweep = dispersion_engineering_sweep([device], constraints,
                                         companion_table_rad_s(cfg))
    channel = build_fwm_channel(cfg, match, sweep[0].companion_detuning)
    rows = noise_vs_power(channel, np.geomspace(0.01e-3, 10e-3, 61))
    assert np.all(rows[:, 1] < 10.0)
    pin = PINNED["widths"]["1500"]
    got = fwm_noise_rate(channel, pin["p_max_mW"] * 1e-3)
    assert got == pytest.approx(pin["r_fwm_at_p_max_Hz"], rel=1e-9)
