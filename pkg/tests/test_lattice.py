import math

import numpy as np
import pytest

from braggqnd import (
    BraggGeometry,
    LatticeState,
    evolve,
    fit_flip_frequency,
    generator_apply,
    initial_state,
    leakage,
    occupation,
    time_series,
    write_time_series_csv,
)
from _oracles import dense_evolution

GEOM = BraggGeometry(l0=4, chi_bar=0.02)


def test_geometry_validation():
    for l0 in (0, -2, 3, 5):
        with pytest.raises(ValueError):
            BraggGeometry(l0=l0, chi_bar=0.02)
    for chi in (0.0, -0.1, math.nan, math.inf):
        with pytest.raises(ValueError):
            BraggGeometry(l0=4, chi_bar=chi)


def test_initial_state_is_a_delta_at_zero():
    s = initial_state(GEOM, 5, -20, 20)
    assert s.t_bar == 0.0
    assert s.site_count == 21
    assert occupation(s, 0) == 1.0
    assert occupation(s, -4) == 0.0
    assert leakage(s) == 0.0


def test_initial_state_bound_validation():
    with pytest.raises(ValueError):
        initial_state(GEOM, 5, -21, 20)  # odd bound
    with pytest.raises(ValueError):
        initial_state(GEOM, 5, -2, 20)  # deflected site outside
    with pytest.raises(ValueError):
        initial_state(GEOM, 5, -20, -2)  # origin outside
    with pytest.raises(ValueError):
        initial_state(GEOM, -1, -20, 20)


def test_state_requires_normalized_finite_amplitudes():
    amps = np.zeros(21, dtype=np.complex128)
    amps[10] = 0.5
    with pytest.raises(ValueError):
        LatticeState(n=5, l0=4, l_min=-20, l_max=20, amplitudes=amps, t_bar=0.0)
    amps[10] = np.nan
    with pytest.raises(ValueError):
        LatticeState(n=5, l0=4, l_min=-20, l_max=20, amplitudes=amps, t_bar=0.0)


def test_site_index_rejects_bad_sites():
    s = initial_state(GEOM, 5, -20, 20)
    with pytest.raises(ValueError):
        s.site_index(1)
    with pytest.raises(ValueError):
        s.site_index(22)


def test_generator_is_the_expected_tridiagonal():
    # assemble the dense generator column by column from basis states
    geom = BraggGeometry(l0=4, chi_bar=0.02)
    l_min, l_max, n = -8, 8, 5
    count = (l_max - l_min) // 2 + 1
    cols = []
    for k in range(count):
        amps = np.zeros(count, dtype=np.complex128)
        amps[k] = 1.0
        s = LatticeState(n=n, l0=4, l_min=l_min, l_max=l_max, amplitudes=amps, t_bar=0.0)
        cols.append(1j * generator_apply(geom, s))
    h = np.stack(cols, axis=1)
    assert np.max(np.abs(h.imag)) == 0.0
    h = h.real
    assert np.max(np.abs(h - h.T)) == 0.0
    ls = np.arange(l_min, l_max + 1, 2)
    assert np.array_equal(np.diag(h), ls * (ls + 4.0))
    # diagonal vanishes exactly at the two Bragg-matched sites
    assert h[(0 - l_min) // 2, (0 - l_min) // 2] == 0.0
    assert h[(-4 - l_min) // 2, (-4 - l_min) // 2] == 0.0
    off = np.diag(h, k=1)
    assert np.allclose(off, -0.5 * 0.02 * n, rtol=0.0, atol=0.0)
    assert np.max(np.abs(h - np.diag(np.diag(h)) - np.diag(off, 1) - np.diag(off, -1))) == 0.0


def test_generator_rejects_mismatched_geometry():
    s = initial_state(GEOM, 5, -20, 20)
    with pytest.raises(ValueError):
        generator_apply(BraggGeometry(l0=6, chi_bar=0.02), s)


def test_evolve_argument_validation():
    s = initial_state(GEOM, 5, -20, 20)
    with pytest.raises(ValueError):
        evolve(GEOM, s, -1.0)
    with pytest.raises(ValueError):
        evolve(GEOM, s, 1.0, tol=0.0)
    with pytest.raises(ValueError):
        evolve(GEOM, s, 1.0, tol=2e-4)
    with pytest.raises(ValueError):
        evolve(BraggGeometry(l0=2, chi_bar=0.02), s, 1.0)


def test_evolve_zero_duration_returns_the_same_state():
    s = initial_state(GEOM, 5, -20, 20)
    assert evolve(GEOM, s, 0.0) is s


def test_evolve_matches_dense_oracle():
    rng = np.random.default_rng(1)
    times = np.sort(rng.uniform(0.0, 3000.0, 6))
    s = initial_state(GEOM, 5, -20, 20)
    ref = dense_evolution(4, 0.02, 5, -20, 20, s.amplitudes, times)
    state = s
    for k, t in enumerate(times):
        state = evolve(GEOM, state, t - state.t_bar)
        assert np.max(np.abs(state.amplitudes - ref[k])) <= 1e-7


def test_evolve_is_additive_in_time():
    s = initial_state(GEOM, 5, -40, 40)
    tol = 1e-9
    two_leg = evolve(GEOM, evolve(GEOM, s, 437.7, tol=tol), 562.3, tol=tol)
    one_leg = evolve(GEOM, s, 1000.0, tol=tol)
    assert two_leg.t_bar == pytest.approx(1000.0, abs=1e-12)
    assert np.max(np.abs(two_leg.amplitudes - one_leg.amplitudes)) <= 10.0 * tol


def test_half_period_population_transfer():
    # fourth-order flip frequency 1.25e-3 puts the first full transfer
    # near t_bar = pi / 1.25e-3
    s = initial_state(GEOM, 5, -40, 40)
    flipped = evolve(GEOM, s, math.pi / 1.25e-3)
    assert occupation(flipped, -4) >= 0.95
    assert occupation(flipped, 0) <= 0.05
    norm = float((np.abs(flipped.amplitudes) ** 2).sum())
    assert abs(norm - 1.0) <= 1e-8


def test_truncation_window_is_converged():
    narrow = evolve(GEOM, initial_state(GEOM, 5, -40, 40), 1000.0)
    wide = evolve(GEOM, initial_state(GEOM, 5, -60, 60), 1000.0)
    assert occupation(narrow, -40) < 1e-10
    assert occupation(narrow, 40) < 1e-10
    common = wide.amplitudes[10:51]
    assert np.max(np.abs(narrow.amplitudes - common)) < 1e-8


def test_fitted_frequency_matches_lowest_order_coupling():
    geom = BraggGeometry(l0=2, chi_bar=0.02)
    grid = np.linspace(0.0, 2.0 * math.pi / 0.1, 301)
    trace = time_series(geom, initial_state(geom, 5, -20, 20), grid)
    fitted = fit_flip_frequency(trace.t_bar, trace.occ_minus_l0)
    assert fitted is not None
    assert abs(fitted - 0.1) / 0.1 < 0.05
    assert np.max(np.abs(trace.norm - 1.0)) <= 1e-8


def test_time_series_grid_validation():
    s = initial_state(GEOM, 5, -20, 20)
    with pytest.raises(ValueError):
        time_series(GEOM, s, np.array([1.0, 0.5]))
    with pytest.raises(ValueError):
        time_series(GEOM, s, np.array([]))
    with pytest.raises(ValueError):
        time_series(GEOM, s, np.array([0.0, np.nan]))
    later = evolve(GEOM, s, 10.0)
    with pytest.raises(ValueError):
        time_series(GEOM, later, np.array([5.0, 20.0]))


def test_time_series_grid_is_absolute():
    s = evolve(GEOM, initial_state(GEOM, 5, -20, 20), 100.0)
    trace = time_series(GEOM, s, np.array([100.0, 150.0]))
    assert np.array_equal(trace.t_bar, [100.0, 150.0])
    # first sample is the state itself
    assert trace.occ_0[0] == pytest.approx(occupation(s, 0), abs=1e-12)


def test_fit_flip_frequency_on_synthetic_data():
    b = 2.0e-3
    t = np.linspace(0.0, 2.0 * math.pi / b, 201)
    y = np.sin(0.5 * b * t) ** 2
    fitted = fit_flip_frequency(t, y)
    assert abs(fitted - b) / b < 1e-3
    assert fit_flip_frequency(t, 0.3 * y) is None


def test_time_series_csv(tmp_path):
    grid = np.linspace(0.0, 50.0, 11)
    trace = time_series(GEOM, initial_state(GEOM, 5, -20, 20), grid)
    path = tmp_path / "trace.csv"
    write_time_series_csv(trace, path)
    text = path.read_text()
    assert "\r" not in text
    lines = text.splitlines()
    assert lines[0] == "t_bar,occ_0,occ_minus_l0,leakage,norm"
    assert len(lines) == 12
    first = lines[1].split(",")
    assert float(first[0]) == 0.0
    assert float(first[1]) == 1.0
