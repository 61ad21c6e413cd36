import math

import pytest

from braggqnd import (
    AtomFieldParams,
    bragg_validity,
    coupling_ratio,
    detuning_advisory,
    effective_rabi_per_photon,
    recoil_frequency,
)

# rubidium-scale defaults: M = 1.42e-25 kg, lambda = 0.8 um,
# g = 2 pi 112 kHz, detuning = 2 pi 80 MHz
RB = AtomFieldParams(
    mass=1.42e-25,
    wavelength=0.8e-6,
    coupling_g=2.0 * math.pi * 112e3,
    detuning=2.0 * math.pi * 80e6,
)


def test_recoil_frequency_value():
    w = recoil_frequency(RB)
    # hbar k^2 / 2M for the numbers above
    assert w == pytest.approx(2.2905e4, rel=1e-3)
    # within 5% of the nominal 2 pi 3.8 kHz scale
    assert abs(w - 2.0 * math.pi * 3.8e3) / (2.0 * math.pi * 3.8e3) < 0.05


def test_recoil_scales_with_wavelength_and_mass():
    w = recoil_frequency(RB)
    doubled = AtomFieldParams(RB.mass, 2.0 * RB.wavelength, RB.coupling_g, RB.detuning)
    assert recoil_frequency(doubled) == pytest.approx(w / 4.0, rel=1e-12)
    heavier = AtomFieldParams(2.0 * RB.mass, RB.wavelength, RB.coupling_g, RB.detuning)
    assert recoil_frequency(heavier) == pytest.approx(w / 2.0, rel=1e-12)


def test_effective_rabi_per_photon_value():
    chi = effective_rabi_per_photon(RB)
    assert chi == pytest.approx(RB.coupling_g**2 / (2.0 * RB.detuning), rel=0.0)
    doubled = AtomFieldParams(RB.mass, RB.wavelength, RB.coupling_g, 2.0 * RB.detuning)
    assert effective_rabi_per_photon(doubled) == pytest.approx(chi / 2.0, rel=1e-12)


def test_coupling_ratio_lands_in_the_working_range():
    assert 0.018 <= coupling_ratio(RB) <= 0.022


def test_parameter_validation():
    with pytest.raises(ValueError):
        AtomFieldParams(0.0, 0.8e-6, 1e5, 1e8)
    with pytest.raises(ValueError):
        AtomFieldParams(1.42e-25, -0.8e-6, 1e5, 1e8)
    with pytest.raises(ValueError):
        AtomFieldParams(1.42e-25, 0.8e-6, math.nan, 1e8)
    with pytest.raises(ValueError):
        AtomFieldParams(1.42e-25, 0.8e-6, 1e5, 0.0)


def test_bragg_validity_thresholds():
    ok = bragg_validity(0.02, 5)
    assert ok.ratio == pytest.approx(0.1)
    assert ok.advisory  # flags at exactly the threshold
    assert not bragg_validity(0.0006, 5).advisory
    assert bragg_validity(0.02, 30).advisory
    with pytest.raises(ValueError):
        bragg_validity(-0.1, 5)
    with pytest.raises(ValueError):
        bragg_validity(0.02, 0)


def test_detuning_advisory():
    assert not detuning_advisory(RB)  # 80 MHz vs 112 kHz is comfortably dispersive
    close = AtomFieldParams(RB.mass, RB.wavelength, RB.coupling_g, 50.0 * RB.coupling_g)
    assert detuning_advisory(close)
