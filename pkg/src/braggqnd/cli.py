"""Command-line front end.

Four experiments: `pendellosung` (numeric vs analytic flip traces),
`collapse` (one seeded measurement trial with posterior snapshots),
`reconstruct` (many-trial histogram of collapsed Fock states), and
`params` (laboratory-unit conversion table).

Option precedence: command-line flags > config file (key = value lines)
> built-in defaults. Every run writes a manifest.json echoing the fully
resolved configuration, so any output can be reproduced from its manifest.
Exit codes: 0 success, 2 configuration error, 3 runtime failure.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__ as VERSION
from ._backend import backend_name
from .analytic import coefficients
from .field import default_n_max, make_coherent, make_fock
from .lattice import (
    BraggGeometry,
    fit_flip_frequency,
    initial_state,
    time_series,
    write_time_series_csv,
)
from .params import (
    AtomFieldParams,
    bragg_validity,
    coupling_ratio,
    detuning_advisory,
    effective_rabi_per_photon,
    recoil_frequency,
)
from .qnd import (
    DETECTOR_MODES,
    TimeSchedule,
    default_schedule,
    reconstruct,
    replay_posteriors,
    run_collapse,
    write_reconstruction_csv,
    write_reconstruction_summary,
    write_trial_log_csv,
)


class ConfigError(Exception):
    pass


# option registry: key -> (flag, type, help); config-file keys use the
# underscore form of the flag name
_OPTIONS = {
    "l0": ("--l0", int, "Bragg index, even and >= 2 (order = l0/2)"),
    "chi_bar": ("--chi-bar", float, "coupling per photon over the recoil frequency"),
    "n": ("--n", int, "photon number (pendellosung) or Fock prior index"),
    "mean": ("--mean", float, "coherent prior mean photon number"),
    "n_max": ("--n-max", int, "Fock-basis truncation bound"),
    "t_lo": ("--t-lo", float, "interaction-time window lower edge (1/w_rec units)"),
    "t_hi": ("--t-hi", float, "interaction-time window upper edge (1/w_rec units)"),
    "grid_points": ("--grid-points", int, "number of output sample times"),
    "l_min": ("--l-min", int, "lattice truncation lower bound (even)"),
    "l_max": ("--l-max", int, "lattice truncation upper bound (even)"),
    "tol": ("--tol", float, "integrator relative tolerance, in (0, 1e-4]"),
    "atoms": ("--atoms", int, "total probe-atom budget"),
    "max_atoms": ("--max-atoms", int, "per-trial atom cap"),
    "collapse_eps": ("--collapse-eps", float, "collapse threshold is 1 - this"),
    "seed": ("--seed", int, "unsigned 64-bit master seed"),
    "threads": ("--threads", int, "worker threads for trial batches"),
    "detector": ("--detector", str, "two-sided (update on every atom) or single"),
    "mass": ("--mass", float, "atomic mass, kg"),
    "wavelength": ("--wavelength", float, "field wavelength, m"),
    "coupling_g": ("--coupling-g", float, "vacuum Rabi coupling, rad/s"),
    "detuning": ("--detuning", float, "field minus transition frequency, rad/s"),
}

_EXPERIMENT_KEYS = {
    "pendellosung": ["l0", "chi_bar", "n", "t_lo", "t_hi", "grid_points", "l_min", "l_max", "tol"],
    "collapse": ["l0", "chi_bar", "n", "mean", "n_max", "t_lo", "t_hi", "max_atoms", "collapse_eps", "seed", "detector"],
    "reconstruct": ["l0", "chi_bar", "n", "mean", "n_max", "t_lo", "t_hi", "atoms", "max_atoms", "collapse_eps", "seed", "threads", "detector"],
    "params": ["mass", "wavelength", "coupling_g", "detuning", "n_max"],
}

_DEFAULTS = {
    "pendellosung": {
        "l0": 4, "chi_bar": 0.02, "n": 5, "t_lo": 0.0, "t_hi": 5000.0,
        "grid_points": 1001, "l_min": -500, "l_max": 500, "tol": 1e-9,
    },
    "collapse": {
        "l0": 4, "chi_bar": 0.02, "n": None, "mean": None, "n_max": None,
        "t_lo": None, "t_hi": None, "max_atoms": 200, "collapse_eps": 1e-6,
        "seed": 1, "detector": "two-sided",
    },
    "reconstruct": {
        "l0": 4, "chi_bar": 0.02, "n": None, "mean": None, "n_max": None,
        "t_lo": None, "t_hi": None, "atoms": 100_000, "max_atoms": 200,
        "collapse_eps": 1e-6, "seed": 1, "threads": None, "detector": "two-sided",
    },
    "params": {
        "mass": 1.42e-25, "wavelength": 0.8e-6,
        "coupling_g": 2.0 * math.pi * 112e3, "detuning": 2.0 * math.pi * 80e6,
        "n_max": 30,
    },
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="braggqnd",
        description="QND measurement of a cavity field via atomic Bragg scattering",
    )
    parser.add_argument("--version", action="version", version=f"braggqnd {VERSION}")
    subs = parser.add_subparsers(dest="experiment", required=True)
    helps = {
        "pendellosung": "numeric lattice propagation vs the analytic two-level flip",
        "collapse": "one seeded measurement trial with per-atom posterior snapshots",
        "reconstruct": "histogram collapsed Fock states over many trials",
        "params": "convert laboratory parameters to dimensionless inputs",
    }
    for name, keys in _EXPERIMENT_KEYS.items():
        sub = subs.add_parser(name, help=helps[name])
        for key in keys:
            flag, typ, help_text = _OPTIONS[key]
            if key == "detector":
                sub.add_argument(flag, choices=DETECTOR_MODES, default=None, help=help_text)
            else:
                sub.add_argument(flag, type=typ, default=None, help=help_text)
        sub.add_argument("--config", default=None, help="key = value config file")
        sub.add_argument("--out", default=None, help="output directory (default: current)")
        sub.add_argument("--format", choices=("csv", "json"), default=None, help="data file format")
    return parser


def _parse_config_file(path: str, allowed: set[str]) -> dict:
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, text = line.partition("=")
        key = key.strip()
        text = text.strip()
        if key not in allowed:
            raise ConfigError(f"{path}:{lineno}: unknown key '{key}'")
        if key in ("detector", "out", "format"):
            values[key] = text
        else:
            typ = _OPTIONS[key][1]
            try:
                values[key] = typ(text)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for '{key}': {text}") from exc
    return values


def _resolve(args: argparse.Namespace) -> dict:
    experiment = args.experiment
    keys = _EXPERIMENT_KEYS[experiment]
    cfg = dict(_DEFAULTS[experiment])
    cfg["out"] = "."
    cfg["format"] = "csv"
    if args.config:
        allowed = set(keys) | {"out", "format"}
        cfg.update(_parse_config_file(args.config, allowed))
    for key in keys + ["out", "format"]:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if cfg["format"] not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got '{cfg['format']}'")
    if "detector" in cfg and cfg["detector"] not in DETECTOR_MODES:
        raise ConfigError(f"detector must be one of {DETECTOR_MODES}")
    if "seed" in cfg and not 0 <= cfg["seed"] < 2**64:
        raise ConfigError("seed must fit in an unsigned 64-bit integer")
    cfg["experiment"] = experiment
    return cfg


def _round12(value):
    if isinstance(value, float):
        return float(f"{value:.12g}")
    return value


def _write_json_rows(path, columns, rows) -> None:
    data = [{c: _round12(v) for c, v in zip(columns, row)} for row in rows]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


def _write_csv_rows(path, columns, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            cells = [f"{v:.12g}" if isinstance(v, float) else str(v) for v in row]
            fh.write(",".join(cells) + "\n")


def _write_manifest(outdir: str, cfg: dict, outputs: list[str]) -> None:
    manifest = {
        "experiment": cfg["experiment"],
        "version": VERSION,
        "backend": backend_name(),
        "config": {k: _round12(v) for k, v in cfg.items() if k != "experiment"},
        "outputs": outputs,
    }
    with open(os.path.join(outdir, "manifest.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def _build_field(cfg: dict):
    if cfg["n"] is not None and cfg["mean"] is not None:
        raise ConfigError("give either --n (Fock prior) or --mean (coherent prior), not both")
    if cfg["n"] is not None:
        center = float(cfg["n"])
        kind = "fock"
    else:
        center = 10.0 if cfg["mean"] is None else float(cfg["mean"])
        kind = "coherent"
    n_max = cfg["n_max"] if cfg["n_max"] is not None else default_n_max(center)
    prior = make_fock(int(center), n_max) if kind == "fock" else make_coherent(center, n_max)
    cfg["n_max"] = n_max
    cfg["field_kind"] = kind
    if kind == "coherent":
        cfg["mean"] = center
    return prior


def _build_schedule(cfg: dict, geometry: BraggGeometry, prior) -> TimeSchedule:
    if (cfg["t_lo"] is None) != (cfg["t_hi"] is None):
        raise ConfigError("give both --t-lo and --t-hi, or neither for the automatic window")
    if cfg["t_lo"] is None:
        schedule = default_schedule(geometry, prior)
    else:
        schedule = TimeSchedule.uniform(cfg["t_lo"], cfg["t_hi"])
    cfg["t_lo"], cfg["t_hi"] = schedule.t_lo, schedule.t_hi
    return schedule


def _run_pendellosung(cfg: dict, outdir: str) -> list[str]:
    geometry = BraggGeometry(l0=cfg["l0"], chi_bar=cfg["chi_bar"])
    if cfg["n"] < 0:
        raise ConfigError("n must be >= 0")
    if cfg["grid_points"] < 2:
        raise ConfigError("grid_points must be >= 2")
    if not 0.0 <= cfg["t_lo"] < cfg["t_hi"]:
        raise ConfigError("need 0 <= t_lo < t_hi")
    state = initial_state(geometry, cfg["n"], cfg["l_min"], cfg["l_max"])
    grid = np.linspace(cfg["t_lo"], cfg["t_hi"], cfg["grid_points"])

    trace = time_series(geometry, state, grid, tol=cfg["tol"])
    b_analytic = coefficients(geometry, cfg["n"]).b_freq
    s = np.sin(0.5 * b_analytic * grid) ** 2
    fitted = fit_flip_frequency(trace.t_bar, trace.occ_minus_l0)
    rel_err = None if (fitted is None or b_analytic == 0.0) else abs(fitted - b_analytic) / b_analytic

    ext = cfg["format"]
    numeric_path = os.path.join(outdir, f"pendellosung_numeric.{ext}")
    analytic_path = os.path.join(outdir, f"pendellosung_analytic.{ext}")
    analytic_rows = [(float(t), float(1.0 - si), float(si)) for t, si in zip(grid, s)]
    if ext == "csv":
        write_time_series_csv(trace, numeric_path)
        _write_csv_rows(analytic_path, ["t_bar", "q_stay", "q_deflect"], analytic_rows)
    else:
        numeric_rows = list(
            zip(
                (float(v) for v in trace.t_bar),
                (float(v) for v in trace.occ_0),
                (float(v) for v in trace.occ_minus_l0),
                (float(v) for v in trace.leakage),
                (float(v) for v in trace.norm),
            )
        )
        _write_json_rows(numeric_path, ["t_bar", "occ_0", "occ_minus_l0", "leakage", "norm"], numeric_rows)
        _write_json_rows(analytic_path, ["t_bar", "q_stay", "q_deflect"], analytic_rows)
    fit_path = os.path.join(outdir, "pendellosung_fit.json")
    fit = {
        "b_freq_analytic": _round12(b_analytic),
        "b_freq_fitted": None if fitted is None else _round12(fitted),
        "relative_error": None if rel_err is None else _round12(rel_err),
    }
    with open(fit_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(fit, fh, indent=2)
        fh.write("\n")
    return [os.path.basename(numeric_path), os.path.basename(analytic_path), "pendellosung_fit.json"]


def _run_collapse(cfg: dict, outdir: str) -> list[str]:
    geometry = BraggGeometry(l0=cfg["l0"], chi_bar=cfg["chi_bar"])
    prior = _build_field(cfg)
    schedule = _build_schedule(cfg, geometry, prior)
    rng = np.random.default_rng(cfg["seed"])
    record = run_collapse(
        prior, geometry, schedule, rng,
        max_atoms=cfg["max_atoms"], collapse_eps=cfg["collapse_eps"], detector=cfg["detector"],
    )
    cfg["collapsed_n"] = record.collapsed_n
    cfg["atoms_used"] = record.atoms_used

    ext = cfg["format"]
    events_path = os.path.join(outdir, f"collapse_events.{ext}")
    posteriors_path = os.path.join(outdir, f"collapse_posteriors.{ext}")
    snapshots = [prior] + replay_posteriors(prior, geometry, record, detector=cfg["detector"])
    posterior_rows = [
        (atom_index, n, float(dist.probs[n]))
        for atom_index, dist in enumerate(snapshots)
        for n in range(dist.n_max + 1)
    ]
    if ext == "csv":
        write_trial_log_csv([record], prior, geometry, events_path, detector=cfg["detector"])
        _write_csv_rows(posteriors_path, ["atom_index", "n", "probability"], posterior_rows)
    else:
        event_rows = []
        for k, (event, dist) in enumerate(zip(record.events, snapshots[1:]), start=1):
            peak = int(np.argmax(dist.probs))
            event_rows.append((0, k, float(event.t_bar), event.outcome.value, peak, float(dist.probs[peak])))
        _write_json_rows(
            events_path,
            ["trial", "atom_index", "t_bar", "outcome", "max_posterior_n", "max_posterior_p"],
            event_rows,
        )
        _write_json_rows(posteriors_path, ["atom_index", "n", "probability"], posterior_rows)
    return [os.path.basename(events_path), os.path.basename(posteriors_path)]


def _run_reconstruct(cfg: dict, outdir: str) -> list[str]:
    geometry = BraggGeometry(l0=cfg["l0"], chi_bar=cfg["chi_bar"])
    prior = _build_field(cfg)
    schedule = _build_schedule(cfg, geometry, prior)
    if cfg["threads"] is None:
        cfg["threads"] = os.cpu_count() or 1
    result = reconstruct(
        prior, geometry, schedule, cfg["seed"], cfg["atoms"],
        max_atoms=cfg["max_atoms"], collapse_eps=cfg["collapse_eps"],
        threads=cfg["threads"], detector=cfg["detector"],
    )
    ext = cfg["format"]
    hist_path = os.path.join(outdir, f"reconstruct_histogram.{ext}")
    if ext == "csv":
        write_reconstruction_csv(result, hist_path)
    else:
        rows = [
            (n, int(result.histogram[n]), float(result.estimate.probs[n]))
            for n in range(result.histogram.shape[0])
        ]
        _write_json_rows(hist_path, ["n", "count", "estimate"], rows)
    summary_path = os.path.join(outdir, "reconstruct_summary.json")
    write_reconstruction_summary(result, prior, summary_path)
    return [os.path.basename(hist_path), "reconstruct_summary.json"]


def _run_params(cfg: dict, outdir: str) -> list[str]:
    p = AtomFieldParams(
        mass=cfg["mass"], wavelength=cfg["wavelength"],
        coupling_g=cfg["coupling_g"], detuning=cfg["detuning"],
    )
    w_rec = recoil_frequency(p)
    chi = effective_rabi_per_photon(p)
    chi_bar = coupling_ratio(p)
    validity = bragg_validity(chi_bar, cfg["n_max"])
    rows = [
        ("recoil_frequency_rad_s", w_rec),
        ("recoil_frequency_hz", w_rec / (2.0 * math.pi)),
        ("effective_rabi_per_photon_rad_s", chi),
        ("effective_rabi_per_photon_hz", chi / (2.0 * math.pi)),
        ("chi_bar", chi_bar),
        ("bragg_validity_ratio", validity.ratio),
        ("bragg_advisory", validity.advisory),
        ("detuning_advisory", detuning_advisory(p)),
    ]
    width = max(len(name) for name, _ in rows)
    for name, value in rows:
        text = f"{value:.12g}" if isinstance(value, float) else str(value)
        print(f"{name:<{width}}  {text}")

    ext = cfg["format"]
    path = os.path.join(outdir, f"params.{ext}")
    if ext == "csv":
        _write_csv_rows(path, ["quantity", "value"], rows)
    else:
        data = {name: _round12(value) for name, value in rows}
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(data, fh, indent=2)
            fh.write("\n")
    return [os.path.basename(path)]


_RUNNERS = {
    "pendellosung": _run_pendellosung,
    "collapse": _run_collapse,
    "reconstruct": _run_reconstruct,
    "params": _run_params,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args)
        outdir = cfg["out"]
        os.makedirs(outdir, exist_ok=True)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"config error: cannot create output directory: {exc}", file=sys.stderr)
        return 2
    try:
        outputs = _RUNNERS[cfg["experiment"]](cfg, outdir)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3
    _write_manifest(outdir, cfg, outputs)
    return 0


if __name__ == "__main__":
    sys.exit(main())
