"""Laboratory parameters to dimensionless simulation quantities.

Everything upstream of this module is dimensionless (times in 1/w_rec,
couplings as chi_bar = chi/w_rec); this is the one place SI units appear.
All frequencies are angular (rad/s).
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

HBAR = 1.054571817e-34  # J s

BRAGG_ADVISORY_THRESHOLD = 0.1
DETUNING_ADVISORY_RATIO = 100.0


@dataclass(frozen=True)
class AtomFieldParams:
    """Atom and cavity-field parameters.

    mass in kg, wavelength in m, coupling_g (vacuum Rabi coupling) and
    detuning (field minus atomic transition frequency) in rad/s.
    """

    mass: float
    wavelength: float
    coupling_g: float
    detuning: float

    def __post_init__(self):
        for name in ("mass", "wavelength", "coupling_g", "detuning"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be finite and > 0")


def recoil_frequency(p: AtomFieldParams) -> float:
    """w_rec = hbar k^2 / 2M with k = 2 pi / wavelength, in rad/s."""
    k = 2.0 * math.pi / p.wavelength
    return HBAR * k * k / (2.0 * p.mass)


def effective_rabi_per_photon(p: AtomFieldParams) -> float:
    """chi = |g|^2 / (2 detuning), the dispersive coupling per photon, rad/s."""
    return p.coupling_g**2 / (2.0 * p.detuning)


def coupling_ratio(p: AtomFieldParams) -> float:
    """chi_bar = chi / w_rec, the dimensionless coupling used everywhere else."""
    return effective_rabi_per_photon(p) / recoil_frequency(p)


class BraggValidity(NamedTuple):
    ratio: float
    advisory: bool


def bragg_validity(chi_bar: float, n_max: int) -> BraggValidity:
    """Bragg-regime check: ratio chi_bar * n_max with an advisory flag.

    The two-level reduction assumes the recoil frequency dominates the
    effective Rabi frequency. The flag raises at ratio >= 0.1; that is
    advice, not an error (the regime is known to work at exactly 0.1).
    """
    if not (math.isfinite(chi_bar) and chi_bar > 0.0):
        raise ValueError("chi_bar must be finite and > 0")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    ratio = chi_bar * n_max
    return BraggValidity(ratio=ratio, advisory=ratio >= BRAGG_ADVISORY_THRESHOLD)


def detuning_advisory(p: AtomFieldParams) -> bool:
    """True when the large-detuning assumption looks questionable
    (detuning below 100x the coupling)."""
    return p.detuning < DETUNING_ADVISORY_RATIO * p.coupling_g
