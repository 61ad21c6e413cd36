"""Bayesian QND measurement engine.

Each probe atom crosses the cavity for a random interaction time and exits
either undeflected (Stay) or deflected (Deflect). The outcome probabilities
depend on the photon number, so every detection updates the field's photon
statistics by Bayes' rule; repeated updates collapse the field to a Fock
state without absorbing photons. Repeating the experiment many times and
histogramming the collapsed states reconstructs the original statistics.
"""

import json
import math
import os
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _backend
from ._rng import MASK64, derive_seeds
from .analytic import coefficients, ensemble_probabilities, flip_frequencies
from .field import PhotonDistribution, distribution_mean, total_variation
from .lattice import BraggGeometry

DEFAULT_MAX_ATOMS = 200
DEFAULT_COLLAPSE_EPS = 1e-6
_CHUNK = 256  # trials per kernel call; fixed so results never depend on threads

DETECTOR_MODES = ("two-sided", "single")


class Outcome(Enum):
    STAY = "Stay"
    DEFLECT = "Deflect"


class ImpossibleOutcomeError(ValueError):
    """The requested outcome has zero probability under the prior."""


@dataclass(frozen=True)
class TimeSchedule:
    """Interaction-time law: uniform draws from a window, or a fixed cycle.

    Use the ``uniform`` / ``fixed`` constructors rather than instantiating
    directly.
    """

    mode: str
    t_lo: float = 0.0
    t_hi: float = 0.0
    times: tuple = ()

    def __post_init__(self):
        if self.mode == "uniform":
            if not (0.0 < self.t_lo < self.t_hi) or not math.isfinite(self.t_hi):
                raise ValueError("uniform schedule needs 0 < t_lo < t_hi, finite")
        elif self.mode == "fixed":
            if len(self.times) == 0:
                raise ValueError("fixed schedule needs at least one time")
            if not all(math.isfinite(t) and t > 0.0 for t in self.times):
                raise ValueError("fixed schedule times must be finite and > 0")
            object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        else:
            raise ValueError("mode must be 'uniform' or 'fixed'")

    @classmethod
    def uniform(cls, t_lo: float, t_hi: float) -> "TimeSchedule":
        return cls(mode="uniform", t_lo=float(t_lo), t_hi=float(t_hi))

    @classmethod
    def fixed(cls, times) -> "TimeSchedule":
        return cls(mode="fixed", times=tuple(times))

    def draw(self, rng: np.random.Generator, event_index: int) -> float:
        """Interaction time for the atom at position event_index in a trial."""
        if self.mode == "uniform":
            return float(rng.uniform(self.t_lo, self.t_hi))
        return self.times[event_index % len(self.times)]


@dataclass(frozen=True)
class MeasurementEvent:
    t_bar: float
    outcome: Outcome

    def __post_init__(self):
        if not (math.isfinite(self.t_bar) and self.t_bar > 0.0):
            raise ValueError("t_bar must be finite and > 0")
        if not isinstance(self.outcome, Outcome):
            raise ValueError("outcome must be an Outcome")


@dataclass(frozen=True)
class TrialRecord:
    """One collapse trial: the event log, the final posterior, the Fock
    index reached (None when the trial hit the atom cap first), and the
    number of atoms consumed."""

    events: tuple
    posterior: PhotonDistribution
    collapsed_n: int | None
    atoms_used: int

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        if self.atoms_used != len(self.events):
            raise ValueError("atoms_used must equal the number of events")


@dataclass(frozen=True)
class ReconstructionResult:
    """Aggregated collapse statistics: per-n counts over successful trials,
    trial/atom totals, and the normalized histogram as a distribution."""

    histogram: np.ndarray
    trials: int
    failed_trials: int
    total_atoms: int
    estimate: PhotonDistribution

    def __post_init__(self):
        hist = np.ascontiguousarray(self.histogram, dtype=np.int64).copy()
        hist.flags.writeable = False
        object.__setattr__(self, "histogram", hist)
        if int(hist.sum()) != self.trials:
            raise ValueError("histogram counts must sum to trials")


def likelihood(geometry: BraggGeometry, n: int, t_bar: float, outcome: Outcome) -> float:
    """P(outcome | n, t_bar): sin^2(B(n) t/2) for Deflect, its exact
    complement for Stay."""
    if not (math.isfinite(t_bar) and t_bar >= 0.0):
        raise ValueError("t_bar must be finite and >= 0")
    b = coefficients(geometry, n).b_freq
    s = math.sin(0.5 * b * t_bar) ** 2
    return s if outcome is Outcome.DEFLECT else 1.0 - s


def _likelihood_vector(geometry: BraggGeometry, n_max: int, t_bar: float, outcome: Outcome) -> np.ndarray:
    s = np.sin(0.5 * flip_frequencies(geometry, n_max) * t_bar) ** 2
    return s if outcome is Outcome.DEFLECT else 1.0 - s


def posterior(
    prior: PhotonDistribution, geometry: BraggGeometry, t_bar: float, outcome: Outcome
) -> PhotonDistribution:
    """Bayes update of the photon statistics after one observed outcome."""
    if not (math.isfinite(t_bar) and t_bar >= 0.0):
        raise ValueError("t_bar must be finite and >= 0")
    weighted = prior.probs * _likelihood_vector(geometry, prior.n_max, t_bar, outcome)
    marginal = float(weighted.sum())
    if marginal <= 0.0:
        raise ImpossibleOutcomeError(f"outcome {outcome.value} has zero probability under the prior")
    return PhotonDistribution(probs=weighted / marginal, n_max=prior.n_max)


def default_schedule(geometry: BraggGeometry, prior: PhotonDistribution) -> TimeSchedule:
    """Uniform window [pi/4, 8 pi] in units of 1/B(m), m = max(1, round(mean)).

    Short times keep single-flip information; the long tail decorrelates
    neighboring photon numbers, which keeps near-boundary trials from
    stalling short of collapse.
    """
    m = max(1, round(distribution_mean(prior)))
    b = coefficients(geometry, m).b_freq
    return TimeSchedule.uniform(0.25 * math.pi / b, 8.0 * math.pi / b)


def sample_event(
    prior: PhotonDistribution,
    geometry: BraggGeometry,
    schedule: TimeSchedule,
    rng: np.random.Generator,
    event_index: int = 0,
) -> tuple[MeasurementEvent, PhotonDistribution]:
    """Draw one atom's interaction time and outcome; return the event and
    the matching posterior.

    event_index selects the entry of a fixed-list schedule (cycling); it is
    ignored for uniform schedules.
    """
    t_bar = schedule.draw(rng, event_index)
    _, q_deflect = ensemble_probabilities(prior, geometry, t_bar)
    outcome = Outcome.DEFLECT if rng.random() < q_deflect else Outcome.STAY
    event = MeasurementEvent(t_bar=t_bar, outcome=outcome)
    return event, posterior(prior, geometry, t_bar, outcome)


def _check_detector(detector: str) -> bool:
    if detector not in DETECTOR_MODES:
        raise ValueError(f"detector must be one of {DETECTOR_MODES}")
    return detector == "single"


def run_collapse(
    prior: PhotonDistribution,
    geometry: BraggGeometry,
    schedule: TimeSchedule,
    rng: np.random.Generator,
    max_atoms: int = DEFAULT_MAX_ATOMS,
    collapse_eps: float = DEFAULT_COLLAPSE_EPS,
    detector: str = "two-sided",
) -> TrialRecord:
    """Send atoms through the cavity until the posterior concentrates on a
    single Fock state (max probability >= 1 - collapse_eps) or the atom cap
    is reached.

    With the single detector only deflected atoms are observed; an
    undeflected atom is recorded but applies no update.
    """
    single = _check_detector(detector)
    if max_atoms < 1:
        raise ValueError("max_atoms must be >= 1")
    if not (0.0 < collapse_eps < 1.0):
        raise ValueError("collapse_eps must lie in (0, 1)")
    threshold = 1.0 - collapse_eps
    events = []
    post = prior
    collapsed_n = None
    for k in range(max_atoms):
        event, updated = sample_event(post, geometry, schedule, rng, event_index=k)
        if not (single and event.outcome is Outcome.STAY):
            post = updated
        events.append(event)
        peak = int(np.argmax(post.probs))
        if float(post.probs[peak]) >= threshold:
            collapsed_n = peak
            break
    return TrialRecord(events=tuple(events), posterior=post, collapsed_n=collapsed_n, atoms_used=len(events))


def _coerce_seed(seed) -> int:
    if isinstance(seed, np.random.Generator):
        return int(seed.integers(0, 2**64, dtype=np.uint64))
    if isinstance(seed, (int, np.integer)):
        return int(seed) & MASK64
    raise TypeError("seed must be an integer or a numpy Generator")


def _schedule_kernel_args(schedule: TimeSchedule):
    if schedule.mode == "uniform":
        return 0, schedule.t_lo, schedule.t_hi, np.ones(1, dtype=np.float64)
    return 1, 0.0, 0.0, np.asarray(schedule.times, dtype=np.float64)


def reconstruct(
    prior: PhotonDistribution,
    geometry: BraggGeometry,
    schedule: TimeSchedule,
    seed,
    atom_budget: int,
    max_atoms: int = DEFAULT_MAX_ATOMS,
    collapse_eps: float = DEFAULT_COLLAPSE_EPS,
    *,
    threads: int | None = None,
    detector: str = "two-sided",
) -> ReconstructionResult:
    """Run independent collapse trials, each from a fresh copy of the prior,
    until the cumulative atom count reaches atom_budget; histogram the
    collapsed Fock indices.

    Trials draw from private splitmix64 streams keyed by (seed, trial
    index) and are consumed strictly in index order with a fixed chunk
    size, so the result is identical for every thread count. Trials that
    hit the atom cap without collapsing are excluded from the histogram
    but reported (their atoms still count toward the budget).
    """
    single = _check_detector(detector)
    if max_atoms < 1:
        raise ValueError("max_atoms must be >= 1")
    if atom_budget < max_atoms:
        raise ValueError("atom_budget must be >= max_atoms")
    if not (0.0 < collapse_eps < 1.0):
        raise ValueError("collapse_eps must lie in (0, 1)")
    if threads is None:
        threads = os.cpu_count() or 1
    if threads < 1:
        raise ValueError("threads must be >= 1")
    master = _coerce_seed(seed)
    probs0 = np.ascontiguousarray(prior.probs, dtype=np.float64)
    b_half = 0.5 * flip_frequencies(geometry, prior.n_max)
    mode, t_lo, t_hi, t_list = _schedule_kernel_args(schedule)

    def run_chunk(start: int):
        seeds = derive_seeds(master, start, _CHUNK)
        return _backend.collapse_trials(
            probs0, b_half, mode, t_lo, t_hi, t_list, max_atoms, collapse_eps, seeds, single
        )

    # warm the compiled kernel outside the pool so workers never race the jit
    _backend.collapse_trials(
        probs0, b_half, mode, t_lo, t_hi, t_list, 1, collapse_eps, np.empty(0, dtype=np.uint64), single
    )

    histogram = np.zeros(prior.n_max + 1, dtype=np.int64)
    failed = 0
    total_atoms = 0
    done = False
    with ThreadPoolExecutor(max_workers=threads) as pool:
        pending = deque()
        next_start = 0
        while not done:
            while len(pending) < threads + 2:
                pending.append(pool.submit(run_chunk, next_start))
                next_start += _CHUNK
            coll, atoms = pending.popleft().result()
            for c, a in zip(coll, atoms):
                total_atoms += int(a)
                if c >= 0:
                    histogram[c] += 1
                else:
                    failed += 1
                if total_atoms >= atom_budget:
                    done = True
                    break
    trials = int(histogram.sum())
    if trials == 0:
        raise RuntimeError("no trial collapsed within the atom budget")
    estimate = PhotonDistribution(probs=histogram / trials, n_max=prior.n_max)
    return ReconstructionResult(
        histogram=histogram,
        trials=trials,
        failed_trials=failed,
        total_atoms=total_atoms,
        estimate=estimate,
    )


def replay_posteriors(
    prior: PhotonDistribution,
    geometry: BraggGeometry,
    record: TrialRecord,
    detector: str = "two-sided",
) -> list[PhotonDistribution]:
    """Posterior after each recorded event, recomputed from the prior."""
    single = _check_detector(detector)
    post = prior
    snapshots = []
    for event in record.events:
        if not (single and event.outcome is Outcome.STAY):
            post = posterior(post, geometry, event.t_bar, event.outcome)
        snapshots.append(post)
    return snapshots


def write_trial_log_csv(records, prior, geometry, path, detector: str = "two-sided") -> None:
    """CSV export of per-atom events, header
    `trial,atom_index,t_bar,outcome,max_posterior_n,max_posterior_p`."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("trial,atom_index,t_bar,outcome,max_posterior_n,max_posterior_p\n")
        for trial, record in enumerate(records):
            snapshots = replay_posteriors(prior, geometry, record, detector)
            for k, (event, post) in enumerate(zip(record.events, snapshots), start=1):
                peak = int(np.argmax(post.probs))
                fh.write(
                    f"{trial},{k},{event.t_bar:.12g},{event.outcome.value},"
                    f"{peak},{post.probs[peak]:.12g}\n"
                )


def write_reconstruction_csv(result: ReconstructionResult, path) -> None:
    """CSV export of the histogram, header `n,count,estimate`."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("n,count,estimate\n")
        for n in range(result.histogram.shape[0]):
            fh.write(f"{n},{int(result.histogram[n])},{result.estimate.probs[n]:.12g}\n")


def _round12(x: float) -> float:
    return float(f"{x:.12g}")


def write_reconstruction_summary(result: ReconstructionResult, prior: PhotonDistribution, path) -> None:
    """JSON summary: trials, total_atoms, failed_trials, tvd_vs_prior, mean."""
    summary = {
        "trials": result.trials,
        "total_atoms": result.total_atoms,
        "failed_trials": result.failed_trials,
        "tvd_vs_prior": _round12(total_variation(result.estimate, prior)),
        "mean": _round12(distribution_mean(result.estimate)),
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
