"""QND measurement of a cavity field via atomic Bragg scattering.

The library covers four layers: photon-number distributions of the field
(`field`), exact propagation of the momentum-lattice amplitudes for a fixed
photon number (`lattice`), the closed-form two-level flip model
(`analytic`), and the Bayesian measurement engine that collapses and
reconstructs the field statistics (`qnd`). `params` converts laboratory
units into the dimensionless inputs; `braggqnd.cli` is the command line.
"""

__version__ = "0.1.0"

from ._backend import backend_name
from .analytic import (
    TwoLevelCoefficients,
    coefficients,
    ensemble_probabilities,
    flip_frequencies,
    two_level_probabilities,
)
from .field import (
    PhotonDistribution,
    default_n_max,
    distribution_mean,
    make_coherent,
    make_fock,
    total_variation,
    write_distribution_csv,
)
from .lattice import (
    BraggGeometry,
    LatticeState,
    LatticeTrace,
    evolve,
    fit_flip_frequency,
    generator_apply,
    initial_state,
    leakage,
    occupation,
    time_series,
    write_time_series_csv,
)
from .params import (
    HBAR,
    AtomFieldParams,
    BraggValidity,
    bragg_validity,
    coupling_ratio,
    detuning_advisory,
    effective_rabi_per_photon,
    recoil_frequency,
)
from .qnd import (
    ImpossibleOutcomeError,
    MeasurementEvent,
    Outcome,
    ReconstructionResult,
    TimeSchedule,
    TrialRecord,
    default_schedule,
    likelihood,
    posterior,
    reconstruct,
    replay_posteriors,
    run_collapse,
    sample_event,
    write_reconstruction_csv,
    write_reconstruction_summary,
    write_trial_log_csv,
)

__all__ = [
    "__version__",
    "backend_name",
    "TwoLevelCoefficients",
    "coefficients",
    "ensemble_probabilities",
    "flip_frequencies",
    "two_level_probabilities",
    "PhotonDistribution",
    "default_n_max",
    "distribution_mean",
    "make_coherent",
    "make_fock",
    "total_variation",
    "write_distribution_csv",
    "BraggGeometry",
    "LatticeState",
    "LatticeTrace",
    "evolve",
    "fit_flip_frequency",
    "generator_apply",
    "initial_state",
    "leakage",
    "occupation",
    "time_series",
    "write_time_series_csv",
    "HBAR",
    "AtomFieldParams",
    "BraggValidity",
    "bragg_validity",
    "coupling_ratio",
    "detuning_advisory",
    "effective_rabi_per_photon",
    "recoil_frequency",
    "ImpossibleOutcomeError",
    "MeasurementEvent",
    "Outcome",
    "ReconstructionResult",
    "TimeSchedule",
    "TrialRecord",
    "default_schedule",
    "likelihood",
    "posterior",
    "reconstruct",
    "replay_posteriors",
    "run_collapse",
    "sample_event",
    "write_reconstruction_csv",
    "write_reconstruction_summary",
    "write_trial_log_csv",
]
