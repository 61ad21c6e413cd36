"""Closed-form two-level model of arbitrary-order Bragg scattering.

In the Bragg regime (recoil frequency much larger than the effective Rabi
frequency chi_bar*n) only the momentum sites l = 0 and l = -l0 stay
populated. Adiabatic elimination of the intermediate sites reduces the
lattice to a two-state system whose population flips at frequency b_freq,
with a common diagonal shift a_shift that affects phases only.
"""

import math
from dataclasses import dataclass

import numpy as np

from .field import PhotonDistribution
from .lattice import BraggGeometry


@dataclass(frozen=True)
class TwoLevelCoefficients:
    """Diagonal shift and flip frequency of the reduced two-state model,
    both in recoil-frequency units."""

    a_shift: float
    b_freq: float


def _even_product_squared(l0: int) -> float:
    # ((l0-2)(l0-4)...4*2)^2, empty product = 1 at l0 = 2
    prod = 1.0
    for j in range(2, l0 - 1, 2):
        prod *= j
    return prod * prod


def coefficients(geometry: BraggGeometry, n: int) -> TwoLevelCoefficients:
    """Two-level coefficients for photon number n.

    b_freq = (chi_bar n)^(l0/2) / (2^(l0/2 - 1) ((l0-2)(l0-4)...4*2)^2);
    a_shift = -(chi_bar n / 2) / (2 (l0 - 2)) for l0 > 2, and 0 at l0 = 2
    where the two sites couple directly and no intermediate shift arises.
    """
    if n < 0:
        raise ValueError("photon number n must be >= 0")
    x = geometry.chi_bar * n
    half = geometry.l0 // 2
    b = x**half / (2.0 ** (half - 1) * _even_product_squared(geometry.l0))
    a = 0.0 if geometry.l0 == 2 else -(x / 2.0) / (2.0 * (geometry.l0 - 2))
    return TwoLevelCoefficients(a_shift=a, b_freq=b)


def flip_frequencies(geometry: BraggGeometry, n_max: int) -> np.ndarray:
    """Vector of b_freq over photon numbers 0..n_max."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    x = geometry.chi_bar * np.arange(n_max + 1, dtype=np.float64)
    half = geometry.l0 // 2
    return x**half / (2.0 ** (half - 1) * _even_product_squared(geometry.l0))


def two_level_probabilities(geometry: BraggGeometry, n: int, t_bar: float) -> tuple[float, float]:
    """(q_stay, q_deflect) after interaction time t_bar.

    q_deflect = sin^2(b_freq t / 2); q_stay is computed as its exact
    complement so the pair sums to one in floating point.
    """
    if not (math.isfinite(t_bar) and t_bar >= 0.0):
        raise ValueError("t_bar must be finite and >= 0")
    b = coefficients(geometry, n).b_freq
    s = math.sin(0.5 * b * t_bar) ** 2
    return 1.0 - s, s


def ensemble_probabilities(
    dist: PhotonDistribution, geometry: BraggGeometry, t_bar: float
) -> tuple[float, float]:
    """Photon-statistics-weighted (Q_stay, Q_deflect): sums of P(n) times the
    per-n stay/deflect probabilities."""
    if not (math.isfinite(t_bar) and t_bar >= 0.0):
        raise ValueError("t_bar must be finite and >= 0")
    b = flip_frequencies(geometry, dist.n_max)
    s = np.sin(0.5 * b * t_bar) ** 2
    q_deflect = float(dist.probs @ s)
    return 1.0 - q_deflect, q_deflect
