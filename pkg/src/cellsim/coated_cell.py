"""Coated-cell physics: dual-structure EIT, transit statistics, radiation
trapping and repumper population enhancement.

The production lineshape is a two-ensemble superposition. A fraction f_t of
the interacting atoms responds with the transit-limited ground decoherence
(single pass through the beam: the broad pedestal); a fraction f_b = 1 - f_t
returns to the beam after wall bounces with its Zeeman coherence intact and
responds with the coating/gradient/trapping-limited decoherence (the narrow
peak). Both components are the exact three-level susceptibility from
lambda_solver with two effective couplings:

* every ensemble sees the multilevel pumping efficiency eta (constants
  table): Omega_eff^2 = eta * Omega^2, which sets the documented
  power-broadening width 4*gamma_opt/eta;
* the wall-bounce ensemble additionally sees the geometric duty cycle
  (beam area / cell cross-section), because a returning atom is pumped
  only while it is inside the beam.

Radiation trapping follows the fixed point

    gamma_rt = A * R_scatter(gamma12 + gamma_rt) * (1 - exp(-beta * OD))

with R_scatter(g) = 2 p_b g / (g + p_b) the residual line-center photon
scattering rate of the coherence-carrying ensemble (p_b its pumping rate)
and OD the line-center two-level optical depth. A and beta are calibrated
once against the observed fractional-delay ceiling and frozen in the
constants table.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import atomkit
from . import constants as cst
from .atomkit import AtomSpecies, BeamConfig
from .errors import GridRangeError, NumericalError, ValidationError
from .lambda_solver import (
    LambdaParams,
    Spectrum,
    TransitionSpec,
    combine_widths,
    gradient_broadening,
    susceptibility,
    susceptibility_slope,
)

TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

def _natural_mix() -> dict:
    return {"Rb85": 0.72, "Rb87": 0.28}


@dataclass(frozen=True)
class CellConfig:
    """Cell geometry, temperature, coating quality and beam geometry."""

    cell_radius: float                  # m
    cell_length: float                  # m
    temperature_C: float
    beam: BeamConfig
    wall_coherence_survival: float = 0.9996   # p_w, per bounce
    field_gradient_width_Hz: float = 0.0      # half width (gamma/2pi) per Delta-m = 1
    species_mix: dict = field(default_factory=_natural_mix)

    def __post_init__(self):
        bad = []
        if not self.cell_radius > 0:
            bad.append("cell_radius")
        if not self.cell_length > 0:
            bad.append("cell_length")
        if self.beam.diameter > 2.0 * self.cell_radius:
            bad.append("beam.diameter")
        if not 0.0 <= self.wall_coherence_survival <= 1.0:
            bad.append("wall_coherence_survival")
        if self.field_gradient_width_Hz < 0:
            bad.append("field_gradient_width_Hz")
        if abs(sum(self.species_mix.values()) - 1.0) > 1e-9:
            bad.append("species_mix")
        if bad:
            raise ValidationError("invalid CellConfig: " + ", ".join(bad), fields=bad)

    @property
    def beam_duty_fraction(self) -> float:
        """Beam-column volume share of the cell: (r_beam / r_cell)^2."""
        return (0.5 * self.beam.diameter / self.cell_radius) ** 2

    def wall_collision_rate(self, species: AtomSpecies) -> float:
        """Mean wall-collision rate v_bar S / (4V), 1/s."""
        vbar = atomkit.mean_speed(self.temperature_C, species)
        r, length = self.cell_radius, self.cell_length
        surface = 2.0 * np.pi * r * length + 2.0 * np.pi * r**2
        volume = np.pi * r**2 * length
        return vbar * surface / (4.0 * volume)

    def wall_decoherence_rate_hz(self, species: AtomSpecies) -> float:
        """(1 - p_w) x wall collision rate, expressed in Hz.

        Derived from p_w so the two fields cannot disagree; the documented
        relation required by the type invariant.
        """
        rate = (1.0 - self.wall_coherence_survival) * self.wall_collision_rate(species)
        return rate / TWO_PI


@dataclass(frozen=True)
class TransitStatistics:
    """Summary of a Monte Carlo transit run (all times in seconds)."""

    mean_in_beam_time: float
    mean_dark_time: float
    bounce_count_histogram: np.ndarray   # P(bounces between beam visits)
    in_beam_fraction: float
    seed: int
    n_atoms: int = 0
    duration: float = 0.0
    in_beam_fraction_se: float = 0.0     # standard error over atoms

    def __post_init__(self):
        hist = np.asarray(self.bounce_count_histogram, dtype=float)
        object.__setattr__(self, "bounce_count_histogram", hist)
        bad = []
        if not self.mean_in_beam_time > 0 or not self.mean_dark_time > 0:
            bad.append("mean times")
        if not 0.0 < self.in_beam_fraction <= 1.0:
            bad.append("in_beam_fraction")
        if hist.size and abs(hist.sum() - 1.0) > 1e-12:
            bad.append("bounce_count_histogram")
        if bad:
            raise ValidationError(
                "invalid TransitStatistics: " + ", ".join(bad), fields=bad
            )


@dataclass(frozen=True)
class RepumpConfig:
    """Auxiliary repumping beam emptying the off-resonant hyperfine level."""

    omega_r: float = 0.0                 # rad/s, for reference
    repump_intensity: float = 0.0        # mW/cm^2
    target: str = "F=1->F'=2"

    def __post_init__(self):
        if self.repump_intensity < 0:
            raise ValidationError(
                "repump_intensity must be >= 0", fields=["repump_intensity"]
            )


# ---------------------------------------------------------------------------
# Transit broadening
# ---------------------------------------------------------------------------

def transit_linewidth(cell: CellConfig, species: AtomSpecies | None = None) -> float:
    """Transit-time FWHM in Hz: v_mp / (2 pi d_beam) (documented constant)."""
    species = species or atomkit.RB87
    v = atomkit.thermal_speed(cell.temperature_C, species)
    return v / (TWO_PI * cell.beam.diameter)


# ---------------------------------------------------------------------------
# Hyperfine populations and the repumper
# ---------------------------------------------------------------------------

def hyperfine_fraction(species: AtomSpecies, ground_F: int) -> float:
    """Thermal population share of one ground hyperfine level."""
    degeneracies = {lvl.F: lvl.degeneracy for lvl in species.ground_hyperfine}
    return degeneracies[ground_F] / sum(degeneracies.values())


def repumper_effective_density(p: LambdaParams, r: RepumpConfig) -> float:
    """Effective interacting density (cm^-3) with the repumper on.

    Two-level hyperfine rate equations: the repumper moves population from
    the off-resonant level into the interacting one at a rate s times the
    thermal refill rate, s = repump_intensity / I_sat. The interacting share
    rises from the thermal fraction (5/8 for Rb87 F=2) toward 1 as the
    repumper saturates; monotone in repump intensity by construction.
    ``p.density`` is the species total, already abundance-weighted.
    """
    if p.transition is None:
        raise ValidationError("LambdaParams.transition required", fields=["transition"])
    frac = hyperfine_fraction(p.transition.species, p.transition.ground_F)
    s = r.repump_intensity / cst.REPUMP_SAT_INTENSITY
    share = frac + (1.0 - frac) * s / (1.0 + s)
    return p.density * share


# ---------------------------------------------------------------------------
# Radiation trapping
# ---------------------------------------------------------------------------

def _reabsorption_probability(optical_depth: float) -> float:
    return 1.0 - np.exp(-cst.TRAPPING_BETA * optical_depth)


def _bounce_scattering_rate(gamma: float, pump_bounce: float) -> float:
    # residual line-center scattering of the dark-state ensemble
    if gamma <= 0.0 and pump_bounce <= 0.0:
        return 0.0
    return 2.0 * pump_bounce * gamma / (gamma + pump_bounce)


def radiation_trapping_decoherence(
    p: LambdaParams,
    cell: CellConfig,
    pump_bounce: float | None = None,
) -> float:
    """Self-consistent extra ground decoherence gamma_rt, rad/s.

    Solves gamma_rt = A * R_scatter(g12 + gamma_rt) * P_reabsorb(OD) by
    damped fixed-point iteration. The map is increasing and concave in
    gamma_rt with a finite ceiling (R_scatter <= 2 p_b), so the fixed point
    is unique; non-convergence raises NumericalError carrying the last
    iterate. ``pump_bounce`` defaults to the duty-suppressed pumping rate of
    the wall-bounce ensemble computed from p and the cell geometry.
    """
    if p.density < 0:
        raise ValidationError("density must be >= 0", fields=["density"])
    if pump_bounce is None:
        pump_bounce = (
            cell.beam_duty_fraction
            * cst.PUMP_EFFICIENCY * p.omega_c**2 / (4.0 * p.gamma_optical)
        )
    od = p.optical_depth if p.density > 0 else 0.0
    p_reabs = _reabsorption_probability(od)
    coeff = cst.TRAPPING_A * p_reabs
    if coeff <= 0.0 or pump_bounce <= 0.0:
        return 0.0

    def step(g_rt: float) -> float:
        return coeff * _bounce_scattering_rate(p.gamma_ground + g_rt, pump_bounce)

    g = step(0.0)
    for _ in range(cst.TRAPPING_MAX_ITER):
        g_next = step(g)
        if abs(g_next - g) <= cst.TRAPPING_REL_TOL * max(g_next, 1e-300):
            return float(g_next)
        g = g_next
    raise NumericalError(
        f"radiation trapping fixed point did not converge "
        f"(last iterate {g:.6e} rad/s)",
        last_iterate=g,
    )


# ---------------------------------------------------------------------------
# The two-ensemble medium
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoatedCellMedium:
    """Assembled two-ensemble medium; ensembles are exact lambda systems."""

    ensembles: tuple[LambdaParams, ...]
    weights: tuple[float, ...]
    length: float
    wavelength: float
    gamma_bounce: float        # rad/s, bounce-ensemble ground decoherence
    gamma_transit: float       # rad/s
    gamma_rt: float            # rad/s, radiation-trapping share
    optical_depth: float       # line-center two-level OD of the full medium

    @property
    def wavenumber(self) -> float:
        return TWO_PI / self.wavelength

    def susceptibility(self, delta_rad) -> np.ndarray:
        chi = 0.0
        for p_i in self.ensembles:
            chi = chi + susceptibility(p_i, delta_rad)
        return chi

    def susceptibility_slope(self, delta_rad) -> np.ndarray:
        s = 0.0
        for p_i in self.ensembles:
            s = s + susceptibility_slope(p_i, delta_rad)
        return s

    def transmission(self, delta_rad) -> np.ndarray:
        chi = self.susceptibility(delta_rad)
        return np.exp(-self.wavenumber * self.length * np.imag(chi))

    def group_delay(self, delta_rad=0.0) -> float:
        """Medium group delay d(phi)/d(omega) = (k L / 2) dRe(chi)/d(delta), s."""
        slope = self.susceptibility_slope(delta_rad)
        return float(0.5 * self.wavenumber * self.length * np.real(slope))

    def group_velocity(self, delta_rad=0.0) -> float:
        total = self.length / cst.C_LIGHT + self.group_delay(delta_rad)
        return self.length / total

    def line_center_transmission(self) -> float:
        return float(self.transmission(0.0))


def make_lambda_params(
    cell: CellConfig,
    transition: TransitionSpec,
    repump: RepumpConfig | None = None,
    gamma_ground_extra: float = 0.0,
) -> LambdaParams:
    """Assemble the bare lambda-system parameters for a cell configuration.

    Density is the interacting density: vapor density x isotope mix share x
    hyperfine share (raised by the repumper). ``gamma_ground_extra`` adds
    residual decoherence not derivable from the cell (e.g. laser linewidth).
    """
    species = transition.species
    t_c = cell.temperature_C
    mix = cell.species_mix.get(species.isotope_label, 0.0)
    n_species = atomkit.vapor_density(t_c) * mix
    share = hyperfine_fraction(species, transition.ground_F)
    if repump is not None:
        probe_params = LambdaParams(
            omega_c=1.0, omega_p=0.0, gamma_excited=species.excited_decay_rate,
            gamma_ground=1.0, density=max(n_species, 1e-30), transition=transition,
        )
        n_int = repumper_effective_density(probe_params, repump)
    else:
        n_int = n_species * share
    omega_c = atomkit.rabi_from_intensity(cell.beam.control_intensity, species)
    omega_p = atomkit.rabi_from_intensity(cell.beam.probe_intensity, species)
    return LambdaParams(
        omega_c=omega_c,
        omega_p=min(omega_p, omega_c),
        gamma_excited=species.excited_decay_rate,
        gamma_ground=gamma_ground_extra,
        doppler_width=atomkit.doppler_hwhm(t_c, species),
        density=max(n_int, 1e-30),
        length=cell.cell_length,
        wavelength=species.d1_wavelength,
        transition=transition,
    )


def bounce_ground_decoherence(
    cell: CellConfig, transition: TransitionSpec, extra: float = 0.0
) -> float:
    """Base (untapped) ground decoherence of the wall-bounce ensemble, rad/s.

    Wall + spin exchange combine with the gradient width per the documented
    linear rule; pi converts an FWHM in Hz to an angular half width.
    """
    species = transition.species
    wall_hz = cell.wall_decoherence_rate_hz(species)
    se_hz = atomkit.spin_exchange_rate(cell.temperature_C, species) / TWO_PI
    grad_hz = gradient_broadening(transition.delta_m, cell.field_gradient_width_Hz)
    total_fwhm_hz = combine_widths(2.0 * (wall_hz + se_hz), 2.0 * grad_hz)
    return np.pi * total_fwhm_hz + extra


def coherent_return_survival(p_w: float) -> float:
    """Probability that a beam revisit arrives with its coherence intact.

    Closed form of sum_k hist[k] p_w^k for the geometric bounce-count tail
    frozen from the calibration Monte Carlo: (1-q) p_w / (1 - q p_w).
    """
    q = cst.BOUNCE_GEOMETRIC_Q
    return (1.0 - q) * p_w / (1.0 - q * p_w)


def build_medium(
    cell: CellConfig,
    p: LambdaParams,
    trapping: bool = True,
    bounce_fraction: float | None = None,
) -> CoatedCellMedium:
    """Compose the two-ensemble coated-cell medium from a cell and lambda params.

    ``p`` carries the optical side (Rabi frequencies, Gamma, Doppler width,
    interacting density, length, wavelength, transition) plus any residual
    ground decoherence in p.gamma_ground; the cell contributes wall,
    gradient, spin-exchange and transit rates. Effective couplings apply the
    pumping efficiency eta to both ensembles and the geometric duty cycle to
    the bounce ensemble. The bounce weight scales with the coherent-return
    survival of the coating, normalized to 1 at the reference coating, so
    p_w = 0 reproduces the uncoated single-structure limit.
    """
    if p.transition is None:
        raise ValidationError("LambdaParams.transition required", fields=["transition"])
    f_b = cst.BOUNCE_FRACTION if bounce_fraction is None else bounce_fraction
    if not 0.0 <= f_b <= 1.0:
        raise ValidationError("bounce_fraction must be in [0, 1]",
                              fields=["bounce_fraction"])
    survival_ratio = (coherent_return_survival(cell.wall_coherence_survival)
                      / coherent_return_survival(cst.REFERENCE_WALL_SURVIVAL))
    f_b = min(f_b * survival_ratio, 1.0)
    f_t = 1.0 - f_b
    species = p.transition.species

    gamma_base = bounce_ground_decoherence(cell, p.transition, extra=p.gamma_ground)
    gamma_t = np.pi * transit_linewidth(cell, species)

    duty = cell.beam_duty_fraction
    sqrt_eta = np.sqrt(cst.PUMP_EFFICIENCY)
    omega_eff_t = sqrt_eta * p.omega_c
    omega_eff_b = np.sqrt(cst.PUMP_EFFICIENCY * duty) * p.omega_c

    gamma_rt = 0.0
    if trapping:
        seed_params = replace(p, gamma_ground=gamma_base, omega_p=0.0)
        pump_bounce = omega_eff_b**2 / (4.0 * seed_params.gamma_optical)
        gamma_rt = radiation_trapping_decoherence(
            seed_params, cell, pump_bounce=pump_bounce
        )

    gamma_b_total = gamma_base + gamma_rt
    gamma_t_total = gamma_t + gamma_rt + gamma_base - (
        np.pi * cell.wall_decoherence_rate_hz(species)
    )
    # the wall term is a bounce-ensemble property; the transit ensemble sees
    # gradient, spin exchange, residual and trapping on top of the transit rate
    gamma_t_total = max(gamma_t_total, gamma_t)

    def ensemble(weight: float, gamma_ground: float, omega_eff: float) -> LambdaParams:
        return LambdaParams(
            omega_c=omega_eff,
            omega_p=min(p.omega_p, omega_eff) if omega_eff > 0 else 0.0,
            gamma_excited=p.gamma_excited,
            gamma_ground=gamma_ground,
            one_photon_detuning=p.one_photon_detuning,
            doppler_width=p.doppler_width,
            density=max(weight * p.density, 1e-300),
            length=p.length,
            wavelength=p.wavelength,
            transition=p.transition,
        )

    ensembles = (
        ensemble(f_t, gamma_t_total, omega_eff_t),
        ensemble(f_b, gamma_b_total, omega_eff_b),
    )
    od_total = sum(e.optical_depth for e in ensembles)
    return CoatedCellMedium(
        ensembles=ensembles,
        weights=(f_t, f_b),
        length=p.length,
        wavelength=p.wavelength,
        gamma_bounce=gamma_b_total,
        gamma_transit=gamma_t_total,
        gamma_rt=gamma_rt,
        optical_depth=float(od_total),
    )


def transmission_spectrum(
    cell: CellConfig,
    p: LambdaParams,
    detuning_grid_hz,
    trapping: bool = True,
    bounce_fraction: float | None = None,
) -> Spectrum:
    """Two-ensemble transmission on an arbitrary grid (no span precondition).

    Used to zoom a single structure (e.g. the narrow peak alone);
    dual_structure_spectrum adds the 5x-pedestal span check required for a
    meaningful dual fit.
    """
    grid_hz = np.asarray(detuning_grid_hz, dtype=float)
    medium = build_medium(cell, p, trapping=trapping,
                          bounce_fraction=bounce_fraction)
    values = medium.transmission(grid_hz * TWO_PI)
    return Spectrum(detunings_hz=grid_hz, values=values, kind="transmission")


def dual_structure_spectrum(
    cell: CellConfig,
    p: LambdaParams,
    detuning_grid_hz,
    trapping: bool = True,
    bounce_fraction: float | None = None,
) -> Spectrum:
    """Transmission spectrum of the two-ensemble medium (grid in Hz).

    The grid must span at least 5x the pedestal FWHM so both structures are
    resolvable; narrower grids raise GridRangeError.
    """
    grid_hz = np.asarray(detuning_grid_hz, dtype=float)
    medium = build_medium(cell, p, trapping=trapping,
                          bounce_fraction=bounce_fraction)
    pedestal_fwhm_hz = (
        medium.gamma_transit
        + cst.PUMP_EFFICIENCY * p.omega_c**2 / (4.0 * medium.ensembles[0].gamma_optical)
    ) / np.pi
    if grid_hz[-1] - grid_hz[0] < 5.0 * pedestal_fwhm_hz:
        raise GridRangeError(
            f"grid span {grid_hz[-1] - grid_hz[0]:.3g} Hz is below 5x the "
            f"pedestal FWHM ({pedestal_fwhm_hz:.3g} Hz); widen the grid"
        )
    values = medium.transmission(grid_hz * TWO_PI)
    return Spectrum(detunings_hz=grid_hz, values=values, kind="transmission")
