"""Built-in scenario presets, one per reproduced figure.

Preset names are stable identifiers. Each preset is a complete scenario
config (see scenario.DEFAULTS for the schema); decoherence budgets and
sweep grids were calibrated once against the target lineshapes and delay
structure and are frozen here.
"""

from __future__ import annotations

import copy

PULSE_WIDTHS_S = [
    1e-06, 2.460383052524181e-06, 6.053484765148218e-06,
    1.4893891324883998e-05, 3.664467780188159e-05, 9.01599442289585e-05,
    0.00022182799879745483, 0.0005457818488166129, 0.0013428324112037102,
    0.0033038821069057943, 0.008128815543368908, 0.02,
]

PRESETS: dict[str, dict] = {
    # optical-pumping double resonance, Rb85 F=3 at 38 mG: 22 Hz dip
    "fig2a-dr": {
        "scenario": "fig2a-dr",
        "pipeline": "dr_spectrum",
        "seed": 20041,
        "species": "Rb85",
        "transition": {"ground_F": 3, "excited_F": 3, "mF_pair": [2, 3]},
        "dr": {
            "static_field_G": 0.038,
            "rf_rabi_rad_s": 13.82300767579509,   # s_rf = 0.02, mild saturation
            "rf_detuning_Hz": 0.0,
            "pump_intensity_mW_cm2": 0.05,
            "gamma_ground_Hz": 11.0,
            "ground_F": 3,
        },
        "grid": {"center_Hz": 0.0, "span_Hz": 600.0, "points": 601},
    },
    # narrow EIT line of the coated cell at 36 C, low power: 50 Hz
    "fig2b-eit": {
        "scenario": "fig2b-eit",
        "pipeline": "eit_spectrum",
        "seed": 20042,
        "species": "Rb87",
        "transition": {"ground_F": 2, "excited_F": 1, "mF_pair": [0, 2]},
        "cell": {
            "temperature_C": 36.0,
            "field_gradient_width_Hz": 10.2,
            "beam": {"diameter_m": 2e-3, "total_intensity_mW_cm2": 0.1},
        },
        "grid": {"center_Hz": 0.0, "span_Hz": 800.0, "points": 1601},
    },
    # dual-structure EIT at 48 C, 4.5 mm beam, 3.5 mW/cm^2
    "fig3-dual": {
        "scenario": "fig3-dual",
        "pipeline": "dual_spectrum",
        "seed": 20043,
        "species": "Rb87",
        "transition": {"ground_F": 2, "excited_F": 1, "mF_pair": [0, 2]},
        "cell": {
            "temperature_C": 48.0,
            "field_gradient_width_Hz": 24.0,
            "beam": {"diameter_m": 4.5e-3, "total_intensity_mW_cm2": 3.5},
        },
        "lambda": {"gamma_ground_extra_Hz": 35.0},
        "grid": {"center_Hz": 0.0, "span_Hz": 80e3, "points": 4001},
        "montecarlo": {"n_atoms": 4000},
    },
    # fractional delay vs pulse width, low/high intensity: two regimes
    "fig4-delay": {
        "scenario": "fig4-delay",
        "pipeline": "delay_sweep",
        "seed": 20044,
        "species": "Rb87",
        "transition": {"ground_F": 2, "excited_F": 1, "mF_pair": [0, 2]},
        "cell": {
            "temperature_C": 50.0,
            "field_gradient_width_Hz": 2.0,
            "beam": {"diameter_m": 2e-3, "total_intensity_mW_cm2": 6.0},
        },
        "lambda": {"gamma_ground_extra_Hz": 3.0},
        "pulse": {"fwhm_s": 1e-3, "samples_per_fwhm": 64},
        "sweep": {
            "axes": {
                "pulse_fwhm_s": PULSE_WIDTHS_S,
                "intensity_mW_cm2": [6.0, 55.0],
            },
        },
    },
    # fractional delay vs repumper power at low and high density
    "fig5-repump": {
        "scenario": "fig5-repump",
        "pipeline": "repump_sweep",
        "seed": 20045,
        "species": "Rb87",
        "transition": {"ground_F": 2, "excited_F": 1, "mF_pair": [0, 2]},
        "cell": {
            "temperature_C": 42.0,
            "field_gradient_width_Hz": 2.0,
            "beam": {"diameter_m": 2e-3, "total_intensity_mW_cm2": 40.0},
        },
        "lambda": {"gamma_ground_extra_Hz": 3.0},
        "pulse": {"fwhm_s": 2.5e-3, "samples_per_fwhm": 64},
        "sweep": {
            "axes": {
                "temperature_C": [42.0, 58.0],
                "repump_intensity_mW_cm2": [0.0, 0.2, 0.45, 0.9, 1.8, 3.5, 8.0],
            },
        },
    },
    # group velocity and line-center transmission vs intensity
    "fig6-vg": {
        "scenario": "fig6-vg",
        "pipeline": "vg_curve",
        "seed": 20046,
        "species": "Rb87",
        "transition": {"ground_F": 2, "excited_F": 1, "mF_pair": [0, 2]},
        "cell": {
            "temperature_C": 42.0,
            "field_gradient_width_Hz": 2.0,
            "beam": {"diameter_m": 2e-3, "total_intensity_mW_cm2": 10.0},
        },
        "lambda": {"gamma_ground_extra_Hz": 3.0},
        "sweep": {
            "axes": {
                "temperature_C": [42.0, 55.0, 68.0],
                "intensity_mW_cm2": [5.0, 8.0, 12.0, 18.0, 25.0, 32.0],
            },
        },
    },
}

PRESET_NAMES = tuple(PRESETS)


def get_preset(name: str) -> dict:
    try:
        return copy.deepcopy(PRESETS[name])
    except KeyError:
        from .errors import ValidationError
        raise ValidationError(
            f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}",
            fields=["preset"],
        ) from None
