"""Momentum-lattice amplitude propagation for a fixed photon number.

An atom crossing the cavity scatters between even momentum sites l (in
photon-momentum units, relative to the initial momentum). In recoil units
the amplitudes obey

    i dC_l/dt = l(l + l0) C_l - (chi_bar n / 2)(C_{l+2} + C_{l-2})

with Dirichlet-zero closure at the truncation edges. The integrator works in
the interaction picture C_l = exp(-i l(l+l0) t) Y_l, which removes the fast
diagonal rotation and lets an adaptive explicit Runge-Kutta step at the
physical (coupling) timescale instead of the stiff l_max^2 one.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _backend

DEFAULT_TOL = 1e-9
_MAX_TOL = 1e-4
_NORM_TOL = 1e-6


@dataclass(frozen=True)
class BraggGeometry:
    """Scattering configuration: Bragg index l0 and coupling ratio chi_bar.

    l0 is twice the scattering order; chi_bar is the effective per-photon
    coupling divided by the recoil frequency.
    """

    l0: int
    chi_bar: float

    def __post_init__(self):
        if self.l0 < 2 or self.l0 % 2 != 0:
            raise ValueError("l0 must be an even integer >= 2")
        if not (math.isfinite(self.chi_bar) and self.chi_bar > 0.0):
            raise ValueError("chi_bar must be finite and > 0")


@dataclass(frozen=True)
class LatticeState:
    """Amplitudes over even momentum sites l = l_min, l_min+2, ..., l_max.

    Carries the Bragg index l0 of the geometry it was built for, so that the
    deflected site -l0 is always identifiable from the state alone.
    """

    n: int
    l0: int
    l_min: int
    l_max: int
    amplitudes: np.ndarray
    t_bar: float

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128).copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)
        if self.n < 0:
            raise ValueError("photon number n must be >= 0")
        if self.l_min % 2 != 0 or self.l_max % 2 != 0:
            raise ValueError("truncation bounds must be even")
        if not (self.l_min <= -self.l0 < 0 <= self.l_max):
            raise ValueError("bounds must include l = 0 and l = -l0")
        if amps.shape != (self.site_count,):
            raise ValueError("amplitudes length must match the site count")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        norm = float((np.abs(amps) ** 2).sum())
        if not abs(norm - 1.0) <= _NORM_TOL:
            raise ValueError("amplitudes must be normalized")
        if not math.isfinite(self.t_bar):
            raise ValueError("t_bar must be finite")

    @property
    def site_count(self) -> int:
        return (self.l_max - self.l_min) // 2 + 1

    def site_index(self, l: int) -> int:
        if l % 2 != 0 or not self.l_min <= l <= self.l_max:
            raise ValueError(f"l={l} is not an even site within bounds")
        return (l - self.l_min) // 2


def _diagonal(state: LatticeState) -> np.ndarray:
    ls = np.arange(state.l_min, state.l_max + 1, 2, dtype=np.float64)
    return ls * (ls + state.l0)


def initial_state(geometry: BraggGeometry, n: int, l_min: int, l_max: int) -> LatticeState:
    """State with all population at l = 0 at t_bar = 0."""
    if l_min % 2 != 0 or l_max % 2 != 0:
        raise ValueError("truncation bounds must be even")
    if not (l_min <= -geometry.l0 < 0 <= l_max):
        raise ValueError("bounds must include l = 0 and l = -l0")
    if n < 0:
        raise ValueError("photon number n must be >= 0")
    count = (l_max - l_min) // 2 + 1
    amps = np.zeros(count, dtype=np.complex128)
    amps[(0 - l_min) // 2] = 1.0
    return LatticeState(n=n, l0=geometry.l0, l_min=l_min, l_max=l_max, amplitudes=amps, t_bar=0.0)


def generator_apply(geometry: BraggGeometry, state: LatticeState) -> np.ndarray:
    """One application of the evolution generator: returns dC/dt = -i H C.

    H is real symmetric tridiagonal in the even-l index: diagonal l(l+l0),
    off-diagonal -chi_bar*n/2.
    """
    if geometry.l0 != state.l0:
        raise ValueError("geometry and state disagree on l0")
    w = state.amplitudes
    s = np.empty_like(w)
    s[:-1] = w[1:]
    s[-1] = 0.0
    s[1:] += w[:-1]
    kappa = geometry.chi_bar * state.n
    return -1j * (_diagonal(state) * w - 0.5 * kappa * s)


def _run_kernel(geometry, state, offsets, tol, max_steps):
    diag = _diagonal(state)
    kappa = geometry.chi_bar * state.n
    out, nsteps, _ = _backend.propagate_grid(
        diag, kappa, state.amplitudes, offsets, tol, tol * 1e-4, max_steps
    )
    if nsteps < 0:
        raise RuntimeError(f"integrator exceeded {max_steps} steps")
    return out


def evolve(
    geometry: BraggGeometry,
    state: LatticeState,
    t_bar: float,
    tol: float = DEFAULT_TOL,
    max_steps: int = 10_000_000,
) -> LatticeState:
    """Advance the state by t_bar. Norm is never renormalized; any drift
    beyond the tolerance is a genuine integration-error signal."""
    if geometry.l0 != state.l0:
        raise ValueError("geometry and state disagree on l0")
    if not (math.isfinite(t_bar) and t_bar >= 0.0):
        raise ValueError("t_bar must be finite and >= 0")
    if not (0.0 < tol <= _MAX_TOL):
        raise ValueError("tol must lie in (0, 1e-4]")
    if t_bar == 0.0:
        return state
    out = _run_kernel(geometry, state, np.array([t_bar], dtype=np.float64), tol, max_steps)
    return LatticeState(
        n=state.n,
        l0=state.l0,
        l_min=state.l_min,
        l_max=state.l_max,
        amplitudes=out[0],
        t_bar=state.t_bar + t_bar,
    )


def occupation(state: LatticeState, l: int) -> float:
    """Probability |C_l|^2 of exiting at momentum site l."""
    return float(np.abs(state.amplitudes[state.site_index(l)]) ** 2)


def leakage(state: LatticeState) -> float:
    """Probability outside the two Bragg-allowed sites l = 0 and l = -l0."""
    return 1.0 - occupation(state, 0) - occupation(state, -state.l0)


@dataclass(frozen=True)
class LatticeTrace:
    """Sampled evolution diagnostics on a caller-supplied time grid."""

    t_bar: np.ndarray
    occ_0: np.ndarray
    occ_minus_l0: np.ndarray
    leakage: np.ndarray
    norm: np.ndarray


def time_series(
    geometry: BraggGeometry,
    state: LatticeState,
    t_grid,
    tol: float = DEFAULT_TOL,
    max_steps: int = 10_000_000,
) -> LatticeTrace:
    """Occupations, leakage and total probability at each grid time.

    The grid holds absolute t_bar values, non-decreasing, starting at or
    after the state's current time.
    """
    if geometry.l0 != state.l0:
        raise ValueError("geometry and state disagree on l0")
    if not (0.0 < tol <= _MAX_TOL):
        raise ValueError("tol must lie in (0, 1e-4]")
    grid = np.ascontiguousarray(t_grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0 or not np.all(np.isfinite(grid)):
        raise ValueError("t_grid must be a nonempty finite 1-D array")
    if np.any(np.diff(grid) < 0.0):
        raise ValueError("t_grid must be non-decreasing")
    if grid[0] < state.t_bar:
        raise ValueError("t_grid must start at or after the state time")
    out = _run_kernel(geometry, state, grid - state.t_bar, tol, max_steps)
    occ = np.abs(out) ** 2
    i0 = state.site_index(0)
    im = state.site_index(-state.l0)
    norm = occ.sum(axis=1)
    return LatticeTrace(
        t_bar=grid.copy(),
        occ_0=occ[:, i0],
        occ_minus_l0=occ[:, im],
        leakage=1.0 - occ[:, i0] - occ[:, im],
        norm=norm,
    )


def fit_flip_frequency(t_bar, occ_minus_l0) -> float | None:
    """Flip frequency pi / t* from the first clear maximum of the deflected
    occupation, refined by a parabola through the three samples around it.

    Returns None when the trace never rises above 0.5 (no flip resolved).
    """
    t = np.asarray(t_bar, dtype=np.float64)
    y = np.asarray(occ_minus_l0, dtype=np.float64)
    for k in range(1, len(y) - 1):
        if y[k] >= 0.5 and y[k] >= y[k - 1] and y[k] >= y[k + 1]:
            denom = y[k - 1] - 2.0 * y[k] + y[k + 1]
            if denom == 0.0:
                t_star = t[k]
            else:
                # vertex of the parabola through the three points
                t_star = t[k] + 0.5 * (t[k + 1] - t[k]) * (y[k - 1] - y[k + 1]) / denom
            if t_star > 0.0:
                return math.pi / t_star
            return None
    return None


def write_time_series_csv(trace: LatticeTrace, path) -> None:
    """CSV export, header `t_bar,occ_0,occ_minus_l0,leakage,norm`."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t_bar,occ_0,occ_minus_l0,leakage,norm\n")
        for i in range(trace.t_bar.shape[0]):
            fh.write(
                f"{trace.t_bar[i]:.12g},{trace.occ_0[i]:.12g},"
                f"{trace.occ_minus_l0[i]:.12g},{trace.leakage[i]:.12g},{trace.norm[i]:.12g}\n"
            )
