"""Photon-number distributions of the cavity field.

The measurement scheme only ever touches diagonal photon statistics, so the
field is represented by a probability vector over a truncated Fock basis.
"""

import math
from dataclasses import dataclass

import numpy as np

_SUM_TOL = 1e-12


def _frozen_vector(values) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=np.float64).copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class PhotonDistribution:
    """Probability vector P(n) for n = 0..n_max.

    Instances are immutable (the probs array is read-only) and safe to share
    between threads.
    """

    probs: np.ndarray
    n_max: int

    def __post_init__(self):
        probs = _frozen_vector(self.probs)
        object.__setattr__(self, "probs", probs)
        if probs.ndim != 1:
            raise ValueError("probs must be a 1-D vector")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if probs.shape[0] != self.n_max + 1:
            raise ValueError("probs length must be n_max + 1")
        if not np.all(np.isfinite(probs)):
            raise ValueError("probs must be finite")
        if np.any(probs < 0.0):
            raise ValueError("probs must be nonnegative")
        if abs(float(probs.sum()) - 1.0) > _SUM_TOL:
            raise ValueError("probs must sum to 1 within 1e-12")


def make_coherent(mean_photons: float, n_max: int) -> PhotonDistribution:
    """Truncated, renormalized Poisson distribution with the given mean.

    Weights are evaluated in log space so large means cannot overflow.
    """
    if not (math.isfinite(mean_photons) and mean_photons >= 0.0):
        raise ValueError("mean_photons must be finite and >= 0")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if mean_photons == 0.0:
        return make_fock(0, n_max)
    ns = np.arange(n_max + 1)
    logw = -mean_photons + ns * math.log(mean_photons)
    logw -= np.array([math.lgamma(k + 1) for k in range(n_max + 1)])
    w = np.exp(logw - logw.max())
    return PhotonDistribution(probs=w / w.sum(), n_max=n_max)


def make_fock(n: int, n_max: int) -> PhotonDistribution:
    """Delta distribution at photon number n."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if not 0 <= n <= n_max:
        raise ValueError("n must lie in [0, n_max]")
    probs = np.zeros(n_max + 1)
    probs[n] = 1.0
    return PhotonDistribution(probs=probs, n_max=n_max)


def distribution_mean(dist: PhotonDistribution) -> float:
    """Mean photon number sum(n * P(n))."""
    return float(np.arange(dist.n_max + 1) @ dist.probs)


def total_variation(p: PhotonDistribution, q: PhotonDistribution) -> float:
    """Total variation distance (1/2) sum |P(n) - Q(n)|, in [0, 1]."""
    if p.n_max != q.n_max:
        raise ValueError("distributions must share the same n_max")
    return 0.5 * float(np.abs(p.probs - q.probs).sum())


def default_n_max(mean_photons: float) -> int:
    """Truncation bound with tail headroom, never below 30."""
    return max(30, math.ceil(mean_photons + 6.0 * math.sqrt(mean_photons)))


def write_distribution_csv(dist: PhotonDistribution, path) -> None:
    """CSV export, header `n,probability`, 12 significant digits, LF endings."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("n,probability\n")
        for n, p in enumerate(dist.probs):
            fh.write(f"{n},{p:.12g}\n")
