"""Rb isotope data and conversions between lab knobs and model parameters.

Temperature, optical intensity and magnetic field go in; number density,
Rabi frequency and Zeeman splitting come out. All functions are pure.

Vapor pressure follows the standard two-coefficient form for Rb
(solid branch below the melting point, liquid branch above), rescaled
once so the total natural-abundance density at 36 C is 3.0e10 cm^-3.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import constants as cst
from .errors import ValidationError

TEMPERATURE_RANGE_C = (-50.0, 150.0)


@dataclass(frozen=True)
class HyperfineLevel:
    F: int
    gF: float

    @property
    def degeneracy(self) -> int:
        return 2 * self.F + 1


@dataclass(frozen=True)
class AtomSpecies:
    """One Rb isotope: mass, abundance, D1 line data, ground hyperfine levels."""

    isotope_label: str
    atomic_mass: float            # kg
    abundance: float              # natural fraction
    d1_wavelength: float          # m
    excited_decay_rate: float     # rad/s
    ground_hyperfine: tuple[HyperfineLevel, ...] = field(default_factory=tuple)

    def level(self, F: int) -> HyperfineLevel:
        for lvl in self.ground_hyperfine:
            if lvl.F == F:
                return lvl
        raise ValidationError(
            f"{self.isotope_label} has no ground hyperfine level F={F}",
            fields=["ground_F"],
        )


def _build_species(label: str) -> AtomSpecies:
    iso = cst.ISOTOPES[label]
    return AtomSpecies(
        isotope_label=label,
        atomic_mass=iso["atomic_mass"]["value"] * cst.AMU,
        abundance=iso["abundance"]["value"],
        d1_wavelength=cst.D1_WAVELENGTH,
        excited_decay_rate=cst.D1_DECAY_RATE,
        ground_hyperfine=tuple(
            HyperfineLevel(F=lvl["F"], gF=lvl["gF"]) for lvl in iso["ground_hyperfine"]
        ),
    )


RB85 = _build_species("Rb85")
RB87 = _build_species("Rb87")
SPECIES = {"Rb85": RB85, "Rb87": RB87}


def get_species(label: str) -> AtomSpecies:
    try:
        return SPECIES[label]
    except KeyError:
        raise ValidationError(
            f"unknown species {label!r}, expected one of {sorted(SPECIES)}",
            fields=["species"],
        ) from None


@dataclass(frozen=True)
class BeamConfig:
    """Laser beam geometry and power at the cell."""

    diameter: float                    # m
    total_intensity: float             # mW/cm^2
    probe_to_control_ratio: float = 0.1

    def __post_init__(self):
        bad = []
        if not self.diameter > 0:
            bad.append("diameter")
        if not self.total_intensity >= 0:
            bad.append("total_intensity")
        if not 0.0 <= self.probe_to_control_ratio <= 0.1:
            bad.append("probe_to_control_ratio")
        if bad:
            raise ValidationError(
                "invalid BeamConfig: " + ", ".join(bad), fields=bad
            )

    @property
    def control_intensity(self) -> float:
        """Control-field share of the total intensity, mW/cm^2."""
        return self.total_intensity / (1.0 + self.probe_to_control_ratio)

    @property
    def probe_intensity(self) -> float:
        return self.total_intensity - self.control_intensity


def vapor_pressure_atm(temperature_K: float) -> float:
    """Saturated Rb vapor pressure in atm (solid/liquid two-branch formula)."""
    T = temperature_K
    if T < cst.VP_MELTING_POINT:
        return 10.0 ** (cst.VP_SOLID_A - cst.VP_SOLID_B / T)
    return 10.0 ** (cst.VP_LIQUID_C - cst.VP_LIQUID_D / T - cst.VP_LIQUID_E * np.log10(T))


def vapor_density(temperature_C: float, species: AtomSpecies | None = None) -> float:
    """Rb number density in cm^-3 at the given cell temperature.

    With ``species=None`` the total natural-abundance density is returned;
    per-isotope queries return the abundance-weighted share. Calibrated so
    the total at 36 C is exactly 3.0e10 cm^-3.
    """
    lo, hi = TEMPERATURE_RANGE_C
    if not lo <= temperature_C <= hi:
        raise ValidationError(
            f"temperature {temperature_C} C outside valid range [{lo}, {hi}] C",
            fields=["temperature_C"],
        )
    T = temperature_C + 273.15
    p_pa = vapor_pressure_atm(T) * cst.ATM_TO_PA
    n_total = cst.VP_RESCALE * p_pa / (cst.KB * T) * 1e-6  # cm^-3
    if species is None:
        return n_total
    return species.abundance * n_total


def thermal_speed(temperature_C: float, species: AtomSpecies) -> float:
    """Most probable speed sqrt(2 kB T / m) in m/s."""
    if temperature_C <= -273.15:
        raise ValidationError(
            "temperature must exceed absolute zero", fields=["temperature_C"]
        )
    T = temperature_C + 273.15
    return float(np.sqrt(2.0 * cst.KB * T / species.atomic_mass))


def mean_speed(temperature_C: float, species: AtomSpecies) -> float:
    """Mean thermal speed sqrt(8 kB T / (pi m)) in m/s."""
    if temperature_C <= -273.15:
        raise ValidationError(
            "temperature must exceed absolute zero", fields=["temperature_C"]
        )
    T = temperature_C + 273.15
    return float(np.sqrt(8.0 * cst.KB * T / (np.pi * species.atomic_mass)))


def rabi_from_intensity(intensity_mw_cm2: float, species: AtomSpecies) -> float:
    """Rabi frequency Omega = d_eff * E / hbar in rad/s for a plane wave.

    Uses the far-detuned effective D1 dipole from the constants table;
    scales as sqrt(intensity).
    """
    if intensity_mw_cm2 < 0:
        raise ValidationError("intensity must be >= 0", fields=["intensity_mW_cm2"])
    intensity_si = intensity_mw_cm2 * 10.0  # W/m^2
    e_field = np.sqrt(2.0 * intensity_si / (cst.C_LIGHT * cst.EPS0))
    return float(cst.D1_DIPOLE * e_field / cst.HBAR)


def zeeman_splitting(field_G: float, gF: float, delta_m: int) -> float:
    """Zeeman splitting nu = delta_m * |gF| * muB * B / h in Hz."""
    if delta_m not in (1, 2):
        raise ValidationError(
            f"delta_m must be 1 or 2, got {delta_m}", fields=["delta_m"]
        )
    return float(delta_m * abs(gF) * cst.MU_B * (field_G * 1e-4) / cst.H_PLANCK)


def doppler_hwhm(temperature_C: float, species: AtomSpecies) -> float:
    """Half width of the Doppler distribution of one-photon detunings, rad/s.

    HWHM = k * v_mp * sqrt(ln 2) for the Gaussian of shifts k*v_z.
    """
    k = 2.0 * np.pi / species.d1_wavelength
    return float(k * thermal_speed(temperature_C, species) * np.sqrt(np.log(2.0)))


def spin_exchange_rate(temperature_C: float, species: AtomSpecies) -> float:
    """Rb-Rb spin-exchange decoherence rate in rad/s at the vapor density."""
    n_total_m3 = vapor_density(temperature_C) * 1e6
    v_rel = np.sqrt(2.0) * mean_speed(temperature_C, species)
    return float(cst.SPIN_EXCHANGE_CROSS_SECTION * v_rel * n_total_m3)
