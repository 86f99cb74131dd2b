"""Scenario configs, validation, pipelines and deterministic artifact output.

A scenario is a JSON config with explicit units in every key name. Running
one produces CSV artifacts plus ``manifest.json`` recording the fully
resolved config, the seed and the code version together with a sha256 per
artifact; rerunning an identical config is byte-identical (figures
included, rendered by the non-interactive Agg backend with the software
tag stripped).
"""

from __future__ import annotations

import copy
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, atomkit, csvio
from . import constants as cst
from . import coated_cell as cc
from . import lambda_solver as ls
from . import pulsewave as pw
from . import fitlab
from .errors import (CellsimError, MetricError, NumericalError, ParseError,
                     ValidationError)

TWO_PI = 2.0 * np.pi

PIPELINES = (
    "dr_spectrum", "eit_spectrum", "dual_spectrum",
    "pulse", "delay_sweep", "repump_sweep", "vg_curve",
)
SPECTRUM_PIPELINES = ("dr_spectrum", "eit_spectrum", "dual_spectrum")
SWEEP_PIPELINES = ("delay_sweep", "repump_sweep", "vg_curve")
SWEEP_AXES = ("pulse_fwhm_s", "intensity_mW_cm2", "temperature_C",
              "repump_intensity_mW_cm2")
DEFAULT_SWEEP_CAP = 10_000

DEFAULTS = {
    "scenario": "custom",
    "pipeline": "eit_spectrum",
    "seed": None,
    "species": "Rb87",
    "transition": {"ground_F": 2, "excited_F": 1, "mF_pair": [0, 2]},
    "cell": {
        "radius_m": 0.0125,
        "length_m": 0.075,
        "temperature_C": 36.0,
        "wall_coherence_survival": 0.9996,
        "field_gradient_width_Hz": 0.0,
        "species_mix": {"Rb85": 0.72, "Rb87": 0.28},
        "beam": {
            "diameter_m": 2e-3,
            "total_intensity_mW_cm2": 0.1,
            "probe_to_control_ratio": 0.1,
        },
    },
    "lambda": {"gamma_ground_extra_Hz": 0.0, "one_photon_detuning_Hz": 0.0},
    "trapping": {"enabled": True},
    "repump": None,
    "grid": {"center_Hz": 0.0, "span_Hz": 800.0, "points": 1601},
    "dr": {
        "static_field_G": 0.038,
        "rf_rabi_rad_s": 13.8,
        "rf_detuning_Hz": 0.0,
        "pump_intensity_mW_cm2": 0.05,
        "gamma_ground_Hz": 11.0,
        "ground_F": 3,
    },
    "pulse": {"fwhm_s": 1e-3, "samples_per_fwhm": 64},
    "sweep": {"axes": {}, "cap": DEFAULT_SWEEP_CAP},
    "montecarlo": None,
    "output": {"figures": True},
}


def _deep_merge(base: dict, override: dict) -> dict:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def resolve_config(config: dict) -> dict:
    """Fill defaults; unknown top-level keys are validation errors later."""
    return _deep_merge(DEFAULTS, config)


def validate_config(config: dict) -> list[tuple[str, str]]:
    """Collect every violation as (field_path, message); empty means valid."""
    cfg = resolve_config(config)
    errors: list[tuple[str, str]] = []

    for key in config:
        if key not in DEFAULTS:
            errors.append((key, "unknown configuration key"))

    if cfg["pipeline"] not in PIPELINES:
        errors.append(("pipeline", f"must be one of {PIPELINES}"))
    if cfg["species"] not in atomkit.SPECIES:
        errors.append(("species", f"unknown species {cfg['species']!r}"))

    cell = cfg["cell"]
    beam = cell["beam"]
    if not cell["radius_m"] > 0:
        errors.append(("cell.radius_m", "must be > 0"))
    if not cell["length_m"] > 0:
        errors.append(("cell.length_m", "must be > 0"))
    lo, hi = atomkit.TEMPERATURE_RANGE_C
    if not lo <= cell["temperature_C"] <= hi:
        errors.append(("cell.temperature_C", f"must be within [{lo}, {hi}] C"))
    if not 0.0 <= cell["wall_coherence_survival"] <= 1.0:
        errors.append(("cell.wall_coherence_survival", "must be in [0, 1]"))
    if cell["field_gradient_width_Hz"] < 0:
        errors.append(("cell.field_gradient_width_Hz", "must be >= 0"))
    if abs(sum(cell["species_mix"].values()) - 1.0) > 1e-9:
        errors.append(("cell.species_mix", "fractions must sum to 1"))
    if not beam["diameter_m"] > 0:
        errors.append(("cell.beam.diameter_m", "must be > 0"))
    elif cell["radius_m"] > 0 and beam["diameter_m"] > 2.0 * cell["radius_m"]:
        errors.append(("cell.beam.diameter_m", "beam wider than the cell"))
    if beam["total_intensity_mW_cm2"] < 0:
        errors.append(("cell.beam.total_intensity_mW_cm2", "must be >= 0"))
    if not 0.0 <= beam["probe_to_control_ratio"] <= 0.1:
        errors.append(("cell.beam.probe_to_control_ratio",
                       "must be in [0, 0.1] (weak probe)"))

    tr = cfg["transition"]
    mf = tr.get("mF_pair", [0, 0])
    delta_m = abs(mf[1] - mf[0]) if len(mf) == 2 else -1
    if delta_m not in (1, 2):
        errors.append(("transition.mF_pair",
                       f"|delta m| must be 1 or 2, got {delta_m}"))
    if cfg["species"] in atomkit.SPECIES:
        species = atomkit.SPECIES[cfg["species"]]
        if tr["ground_F"] not in [lvl.F for lvl in species.ground_hyperfine]:
            errors.append(("transition.ground_F",
                           f"{cfg['species']} has no ground F={tr['ground_F']}"))

    if cfg["lambda"]["gamma_ground_extra_Hz"] < 0:
        errors.append(("lambda.gamma_ground_extra_Hz", "must be >= 0 (negative rate)"))

    grid = cfg["grid"]
    if not grid["span_Hz"] > 0:
        errors.append(("grid.span_Hz", "must be > 0"))
    if int(grid["points"]) < 8:
        errors.append(("grid.points", "need at least 8 points"))

    dr = cfg["dr"]
    if dr["rf_rabi_rad_s"] < 0:
        errors.append(("dr.rf_rabi_rad_s", "must be >= 0"))
    if dr["pump_intensity_mW_cm2"] < 0:
        errors.append(("dr.pump_intensity_mW_cm2", "must be >= 0"))
    if not dr["gamma_ground_Hz"] > 0:
        errors.append(("dr.gamma_ground_Hz", "must be > 0 (negative or zero rate)"))

    if cfg["repump"] is not None and cfg["repump"].get("intensity_mW_cm2", 0.0) < 0:
        errors.append(("repump.intensity_mW_cm2", "must be >= 0"))

    if not cfg["pulse"]["fwhm_s"] > 0:
        errors.append(("pulse.fwhm_s", "must be > 0"))
    if not 8 <= int(cfg["pulse"]["samples_per_fwhm"]) <= 4096:
        errors.append(("pulse.samples_per_fwhm", "must be in [8, 4096]"))

    axes = cfg["sweep"]["axes"]
    size = 1
    for name, values in axes.items():
        if name not in SWEEP_AXES:
            errors.append((f"sweep.axes.{name}",
                           f"unknown axis, expected one of {SWEEP_AXES}"))
            continue
        if not isinstance(values, (list, tuple)) or len(values) == 0:
            errors.append((f"sweep.axes.{name}", "must be a non-empty list"))
            continue
        size *= len(values)
    cap = int(cfg["sweep"].get("cap", DEFAULT_SWEEP_CAP))
    if size > cap:
        errors.append(("sweep.axes", f"grid size {size} exceeds the cap {cap}"))

    if cfg["montecarlo"] is not None:
        if cfg["seed"] is None:
            errors.append(("seed", "required whenever Monte Carlo is requested"))
        if int(cfg["montecarlo"].get("n_atoms", 0)) < 1:
            errors.append(("montecarlo.n_atoms", "must be >= 1"))

    return errors


def require_valid(config: dict) -> dict:
    errors = validate_config(config)
    if errors:
        listing = "; ".join(f"{field}: {msg}" for field, msg in errors)
        raise ValidationError(f"invalid config: {listing}",
                              fields=[f for f, _ in errors])
    return resolve_config(config)


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def build_cell(cfg: dict) -> cc.CellConfig:
    cell = cfg["cell"]
    beam = cell["beam"]
    return cc.CellConfig(
        cell_radius=cell["radius_m"],
        cell_length=cell["length_m"],
        temperature_C=cell["temperature_C"],
        beam=atomkit.BeamConfig(
            diameter=beam["diameter_m"],
            total_intensity=beam["total_intensity_mW_cm2"],
            probe_to_control_ratio=beam["probe_to_control_ratio"],
        ),
        wall_coherence_survival=cell["wall_coherence_survival"],
        field_gradient_width_Hz=cell["field_gradient_width_Hz"],
        species_mix=dict(cell["species_mix"]),
    )


def build_transition(cfg: dict) -> ls.TransitionSpec:
    tr = cfg["transition"]
    mf = tuple(tr["mF_pair"])
    return ls.TransitionSpec(
        species=atomkit.get_species(cfg["species"]),
        ground_F=int(tr["ground_F"]),
        excited_F=int(tr["excited_F"]),
        mF_pair=mf,
        delta_m=abs(mf[1] - mf[0]),
    )


def build_repump(cfg: dict) -> cc.RepumpConfig | None:
    if cfg["repump"] is None:
        return None
    intensity = float(cfg["repump"].get("intensity_mW_cm2", 0.0))
    if intensity == 0.0:
        return None
    return cc.RepumpConfig(repump_intensity=intensity)


_FROM_CONFIG = object()  # sentinel: None must mean "no repumper", not "default"


def build_lambda_params(cfg: dict, cell: cc.CellConfig,
                        repump=_FROM_CONFIG) -> ls.LambdaParams:
    transition = build_transition(cfg)
    extra = TWO_PI * cfg["lambda"]["gamma_ground_extra_Hz"]
    if repump is _FROM_CONFIG:
        repump = build_repump(cfg)
    p = cc.make_lambda_params(cell, transition, repump=repump,
                              gamma_ground_extra=extra)
    if cfg["lambda"]["one_photon_detuning_Hz"]:
        from dataclasses import replace
        p = replace(p, one_photon_detuning=TWO_PI
                    * cfg["lambda"]["one_photon_detuning_Hz"])
    return p


def build_medium(cfg: dict, cell: cc.CellConfig | None = None,
                 repump=_FROM_CONFIG) -> cc.CoatedCellMedium:
    cell = cell or build_cell(cfg)
    p = build_lambda_params(cfg, cell, repump=repump)
    return cc.build_medium(cell, p, trapping=bool(cfg["trapping"]["enabled"]))


def _grid_hz(cfg: dict) -> np.ndarray:
    grid = cfg["grid"]
    half = 0.5 * grid["span_Hz"]
    return np.linspace(grid["center_Hz"] - half, grid["center_Hz"] + half,
                       int(grid["points"]))


# ---------------------------------------------------------------------------
# Pipelines
# ---------------------------------------------------------------------------

def _pipeline_dr_spectrum(cfg: dict) -> dict:
    dr_cfg = cfg["dr"]
    species = atomkit.get_species(cfg["species"])
    d = ls.DRParams(
        omega_rf=dr_cfg["rf_rabi_rad_s"],
        static_field=dr_cfg["static_field_G"],
        rf_detuning=TWO_PI * dr_cfg["rf_detuning_Hz"],
        pump_intensity=dr_cfg["pump_intensity_mW_cm2"],
        gamma_ground=TWO_PI * dr_cfg["gamma_ground_Hz"],
    )
    ground_F = int(dr_cfg["ground_F"])
    center = atomkit.zeeman_splitting(
        d.static_field, species.level(ground_F).gF, 1)
    grid = _grid_hz(cfg) + center
    spectrum = ls.double_resonance_spectrum(d, grid, species=species,
                                            ground_F=ground_F)
    fit = fitlab.fit_lorentzian(spectrum)
    return {"spectrum": spectrum, "fit": fit, "name": "dr_spectrum"}


def _pipeline_eit_spectrum(cfg: dict) -> dict:
    cell = build_cell(cfg)
    p = build_lambda_params(cfg, cell)
    spectrum = cc.transmission_spectrum(cell, p, _grid_hz(cfg),
                                        trapping=bool(cfg["trapping"]["enabled"]))
    fit = fitlab.fit_lorentzian(spectrum)
    return {"spectrum": spectrum, "fit": fit, "name": "eit_spectrum"}


def _pipeline_dual_spectrum(cfg: dict) -> dict:
    cell = build_cell(cfg)
    p = build_lambda_params(cfg, cell)
    spectrum = cc.dual_structure_spectrum(cell, p, _grid_hz(cfg),
                                          trapping=bool(cfg["trapping"]["enabled"]))
    fit = fitlab.fit_dual_lorentzian(spectrum)
    out = {"spectrum": spectrum, "fit": fit, "name": "dual_spectrum"}
    if cfg["montecarlo"] is not None:
        from .montecarlo import simulate_trajectories
        out["transit_stats"] = simulate_trajectories(
            cell, int(cfg["montecarlo"]["n_atoms"]), seed=int(cfg["seed"]),
            species=build_transition(cfg).species)
    return out


def _propagate_once(cfg: dict, cell: cc.CellConfig,
                    repump: cc.RepumpConfig | None, fwhm_s: float):
    medium = build_medium(cfg, cell=cell, repump=repump)
    pulse = pw.gaussian_pulse(
        fwhm_s, dt=fwhm_s / float(cfg["pulse"]["samples_per_fwhm"]))
    result = pw.propagate(pulse, pw.medium_transfer(medium), medium=medium)
    return pulse, result


def _pipeline_pulse(cfg: dict) -> dict:
    cell = build_cell(cfg)
    pulse, result = _propagate_once(cfg, cell, build_repump(cfg),
                                    float(cfg["pulse"]["fwhm_s"]))
    if result.energy_transmission < cst.DETECTABILITY_FLOOR:
        raise NumericalError(
            f"pulse energy transmission {result.energy_transmission:.3e} is "
            f"below the detectability floor {cst.DETECTABILITY_FLOOR:.0e}")
    return {"pulse_in": pulse, "result": result, "name": "pulse"}


def _delay_cell_row(args) -> dict:
    cfg, temperature, intensity, fwhm_s, repump_i = args
    row = {
        "temperature_C": temperature,
        "intensity_mW_cm2": intensity,
        "pulse_fwhm_s": fwhm_s,
        "repump_intensity_mW_cm2": repump_i,
        "fractional_delay": float("nan"),
        "fractional_reshaping": float("nan"),
        "energy_transmission": float("nan"),
        "group_delay_s": float("nan"),
        "v_g_m_s": float("nan"),
        "error": "",
    }
    try:
        from dataclasses import replace
        cell = build_cell(cfg)
        beam = replace(cell.beam, total_intensity=intensity)
        cell = replace(cell, temperature_C=temperature, beam=beam)
        repump = (cc.RepumpConfig(repump_intensity=repump_i)
                  if repump_i > 0 else None)
        _, result = _propagate_once(cfg, cell, repump, fwhm_s)
        row["energy_transmission"] = result.energy_transmission
        if result.energy_transmission < cst.DETECTABILITY_FLOOR:
            row["error"] = ("below detectability floor "
                            f"({cst.DETECTABILITY_FLOOR:.0e})")
            return row
        row["fractional_delay"] = result.fractional_delay
        row["fractional_reshaping"] = result.fractional_reshaping
        row["group_delay_s"] = result.group_delay
        row["v_g_m_s"] = result.group_velocity
    except CellsimError as exc:
        row["error"] = str(exc)
    return row


DELAY_COLUMNS = ["temperature_C", "intensity_mW_cm2", "pulse_fwhm_s",
                 "repump_intensity_mW_cm2", "fractional_delay",
                 "fractional_reshaping", "energy_transmission",
                 "group_delay_s", "v_g_m_s", "error"]


def sweep_cells(cfg: dict) -> list[tuple]:
    """Cartesian product of the sweep axes, row-major, sorted per axis order."""
    axes = cfg["sweep"]["axes"]
    cell_cfg = cfg["cell"]
    temperatures = axes.get("temperature_C", [cell_cfg["temperature_C"]])
    intensities = axes.get("intensity_mW_cm2",
                           [cell_cfg["beam"]["total_intensity_mW_cm2"]])
    widths = axes.get("pulse_fwhm_s", [cfg["pulse"]["fwhm_s"]])
    repumps = axes.get("repump_intensity_mW_cm2", [
        0.0 if cfg["repump"] is None else cfg["repump"]["intensity_mW_cm2"]])
    cells = []
    for t in temperatures:
        for i in intensities:
            for w in widths:
                for r in repumps:
                    cells.append((cfg, float(t), float(i), float(w), float(r)))
    return cells


def run_sweep(cfg: dict, workers: int = 1) -> list[dict]:
    """Delay sweep over the configured axes; failed cells keep their row."""
    cells = sweep_cells(cfg)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_delay_cell_row, cells, chunksize=1))
    else:
        rows = [_delay_cell_row(args) for args in cells]
    return rows


def _pipeline_delay_sweep(cfg: dict, workers: int = 1) -> dict:
    return {"rows": run_sweep(cfg, workers=workers), "name": "delay_sweep",
            "columns": DELAY_COLUMNS}


REPUMP_COLUMNS = ["temperature_C", "repump_intensity_mW_cm2",
                  "fractional_delay", "energy_transmission", "boost_factor",
                  "error"]


def _pipeline_repump_sweep(cfg: dict, workers: int = 1) -> dict:
    rows_raw = run_sweep(cfg, workers=workers)
    baselines: dict[float, float] = {}
    for row in rows_raw:
        if row["repump_intensity_mW_cm2"] == 0.0 and not row["error"]:
            baselines[row["temperature_C"]] = row["fractional_delay"]
    rows = []
    for row in rows_raw:
        base = baselines.get(row["temperature_C"])
        boost = (row["fractional_delay"] / base
                 if base and not row["error"] else float("nan"))
        rows.append({
            "temperature_C": row["temperature_C"],
            "repump_intensity_mW_cm2": row["repump_intensity_mW_cm2"],
            "fractional_delay": row["fractional_delay"],
            "energy_transmission": row["energy_transmission"],
            "boost_factor": boost,
            "error": row["error"],
        })
    return {"rows": rows, "name": "repump_sweep", "columns": REPUMP_COLUMNS}


VG_COLUMNS = ["temperature_C", "intensity_mW_cm2", "v_g_m_s",
              "energy_transmission", "error"]


def _pipeline_vg_curve(cfg: dict) -> dict:
    cell = build_cell(cfg)
    p_base = build_lambda_params(cfg, cell, repump=None)
    axes = cfg["sweep"]["axes"]
    intensities = axes.get("intensity_mW_cm2",
                           [cfg["cell"]["beam"]["total_intensity_mW_cm2"]])
    temperatures = axes.get("temperature_C", [cfg["cell"]["temperature_C"]])
    rows = pw.group_velocity_curve(p_base, cell, intensities, temperatures,
                                   trapping=bool(cfg["trapping"]["enabled"]))
    return {"rows": rows, "name": "vg_curve", "columns": VG_COLUMNS}


# ---------------------------------------------------------------------------
# Artifact output
# ---------------------------------------------------------------------------

def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="")


def run_scenario(config: dict, out_dir, workers: int = 1,
                 figures: bool | None = None) -> dict:
    """Execute a scenario and write its artifact set; returns the manifest."""
    cfg = require_valid(config)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    render = cfg["output"]["figures"] if figures is None else figures

    pipeline = cfg["pipeline"]
    artifacts: dict[str, str] = {}
    figure_payload = None

    if pipeline in SPECTRUM_PIPELINES:
        runner = {"dr_spectrum": _pipeline_dr_spectrum,
                  "eit_spectrum": _pipeline_eit_spectrum,
                  "dual_spectrum": _pipeline_dual_spectrum}[pipeline]
        result = runner(cfg)
        spectrum, fit = result["spectrum"], result["fit"]
        artifacts[f"{result['name']}.csv"] = csvio.spectrum_to_csv(spectrum)
        artifacts["fit.txt"] = csvio.fit_result_to_text(fit)
        artifacts["fit_row.csv"] = csvio.fit_result_to_csv_row(fit)
        if "transit_stats" in result:
            artifacts["transit_stats.csv"] = csvio.transit_statistics_to_csv(
                result["transit_stats"])
        figure_payload = ("spectrum", result)
    elif pipeline == "pulse":
        result = _pipeline_pulse(cfg)
        artifacts["pulse_in.csv"] = csvio.pulse_to_csv(result["pulse_in"])
        artifacts["pulse_out.csv"] = csvio.pulse_to_csv(result["result"].output)
        prop = result["result"]
        metrics = "\n".join([
            f"fractional_delay={prop.fractional_delay!r}",
            f"fractional_reshaping={prop.fractional_reshaping!r}",
            f"energy_transmission={prop.energy_transmission!r}",
            f"group_delay_s={prop.group_delay!r}",
            f"v_g_m_s={prop.group_velocity!r}",
        ]) + "\n"
        artifacts["metrics.txt"] = metrics
        figure_payload = ("pulse", result)
    elif pipeline == "delay_sweep":
        result = _pipeline_delay_sweep(cfg, workers=workers)
        artifacts["delay_sweep.csv"] = csvio.table_to_csv(result["rows"],
                                                          result["columns"])
        figure_payload = ("delay_sweep", result)
    elif pipeline == "repump_sweep":
        result = _pipeline_repump_sweep(cfg, workers=workers)
        artifacts["repump_sweep.csv"] = csvio.table_to_csv(result["rows"],
                                                           result["columns"])
        figure_payload = ("repump_sweep", result)
    elif pipeline == "vg_curve":
        result = _pipeline_vg_curve(cfg)
        artifacts["vg_curve.csv"] = csvio.table_to_csv(result["rows"],
                                                       result["columns"])
        figure_payload = ("vg_curve", result)
    else:  # pragma: no cover - guarded by validation
        raise ValidationError(f"unknown pipeline {pipeline}")

    for name, text in artifacts.items():
        _write(out / name, text)

    if render and figure_payload is not None:
        from . import figures as figmod
        fig_name = f"{cfg['scenario']}.png"
        figmod.render(figure_payload, out / fig_name)
        artifacts[fig_name] = (out / fig_name).read_bytes()

    manifest = {
        "scenario": cfg["scenario"],
        "code_version": __version__,
        "seed": cfg["seed"],
        "config": cfg,
        "artifacts": [
            {
                "name": name,
                "bytes": len(data) if isinstance(data, bytes) else len(data.encode()),
                "sha256": hashlib.sha256(
                    data if isinstance(data, bytes) else data.encode()
                ).hexdigest(),
            }
            for name, data in sorted(artifacts.items())
        ],
    }
    _write(out / "manifest.json",
           json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return manifest


# ---------------------------------------------------------------------------
# External file fitting
# ---------------------------------------------------------------------------

def fit_file(path, model: str, out_dir=None) -> fitlab.FitResult | tuple:
    """Fit an on-disk Spectrum CSV (or measure a Pulse CSV) and emit artifacts.

    ``model`` is lorentzian, dual or pulse-metrics. Returns the FitResult
    (or the metrics tuple for pulse-metrics); artifacts are written when
    ``out_dir`` is given: fit.txt, fit_row.csv and annotated.csv with
    (x, y_data, y_fit) columns.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    first_line = text.splitlines()[0] if text.splitlines() else ""
    is_pulse = first_line == "time_s,intensity"

    if model == "pulse-metrics":
        if not is_pulse:
            raise ValidationError("pulse-metrics requires a Pulse CSV",
                                  fields=["model"])
        pulse = csvio.pulse_from_csv(text, path=str(path))
        peak, fwhm, energy = fitlab.pulse_metrics(pulse)
        if out_dir is not None:
            out = Path(out_dir)
            out.mkdir(parents=True, exist_ok=True)
            _write(out / "metrics.txt",
                   f"peak_time_s={peak!r}\nfwhm_s={fwhm!r}\nenergy={energy!r}\n")
        return peak, fwhm, energy

    if is_pulse:
        raise ValidationError(
            f"model {model!r} requires a Spectrum CSV, got a Pulse CSV",
            fields=["model"])
    spectrum = csvio.spectrum_from_csv(text, path=str(path))
    if model == "lorentzian":
        fit = fitlab.fit_lorentzian(spectrum)
        y_fit = fitlab.lorentzian(spectrum.detunings_hz, fit.params["center"],
                                  fit.params["fwhm"], fit.params["amplitude"],
                                  fit.params["offset"])
    elif model == "dual":
        fit = fitlab.fit_dual_lorentzian(spectrum)
        p = fit.params
        y_fit = (fitlab.lorentzian(spectrum.detunings_hz, p["center"],
                                   p["narrow_fwhm"], p["narrow_amplitude"])
                 + fitlab.lorentzian(spectrum.detunings_hz, p["center"],
                                     p["broad_fwhm"], p["broad_amplitude"])
                 + p["offset"])
    else:
        raise ValidationError(f"unknown model {model!r}", fields=["model"])

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write(out / "fit.txt", csvio.fit_result_to_text(fit))
        _write(out / "fit_row.csv", csvio.fit_result_to_csv_row(fit))
        lines = ["x,y_data,y_fit"]
        for x, yd, yf in zip(spectrum.detunings_hz, spectrum.values, y_fit):
            lines.append(f"{x!r},{float(yd)!r},{float(yf)!r}")
        _write(out / "annotated.csv", "\n".join(lines) + "\n")
    return fit
