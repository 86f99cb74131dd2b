"""Three-level lambda-system solver: susceptibility, EIT and double resonance.

The production path is the weak-probe steady-state susceptibility

    chi(delta) = K * i*(g12 - i*delta)
                 / [ (g_opt - i*Dp)*(g12 - i*delta) + Omega_C^2/4 ]

with K = N d^2/(eps0 hbar), Dp = Delta + delta the probe detuning and
g_opt = Gamma/2 + doppler_width + g12/4 the optical coherence decay.
Im chi >= 0 for every physical parameter set (passive medium), and
Im chi(0) = 0 when g12 = 0 (ideal dark state).

The time-dependent master equation (integrate_bloch) is the independent
oracle for this formula. Both use the same Lindblad model: decay Gamma
from |3> split equally to |1> and |2>, ground dephasing at g12, and pure
optical dephasing equal to doppler_width (the one-line Doppler model;
doppler_convolved_susceptibility provides the explicit Gaussian
convolution over one-photon detunings for cross-checks).

Calibration convention: the unbroadened EIT transparency width is
FWHM = 2*g12 (g12 is a half width in angular units), so g12/2pi = 25 Hz
reproduces a 50 Hz line and g12/2pi = 11 Hz a 22 Hz double-resonance dip.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.optimize import brentq

from . import atomkit
from . import constants as cst
from .atomkit import AtomSpecies
from .errors import GridRangeError, ValidationError

TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransitionSpec:
    """Which lambda pair the fields address (isotope, F levels, mF pair)."""

    species: AtomSpecies
    ground_F: int
    excited_F: int
    mF_pair: tuple[int, int]
    delta_m: int

    def __post_init__(self):
        bad = []
        dm = abs(self.mF_pair[1] - self.mF_pair[0])
        if dm != self.delta_m:
            bad.append("delta_m")
        if self.delta_m not in (1, 2):
            bad.append("delta_m")
        try:
            self.species.level(self.ground_F)
        except ValidationError:
            bad.append("ground_F")
        if bad:
            raise ValidationError(
                f"inconsistent TransitionSpec (mF_pair={self.mF_pair}, "
                f"delta_m={self.delta_m})",
                fields=sorted(set(bad)),
            )

    @property
    def gF(self) -> float:
        return self.species.level(self.ground_F).gF


@dataclass(frozen=True)
class LambdaParams:
    """All parameters of one lambda-system interaction. Angular units (rad/s)."""

    omega_c: float                 # control Rabi frequency
    omega_p: float                 # probe Rabi frequency
    gamma_excited: float           # excited-state decay Gamma
    gamma_ground: float            # ground coherence decay g12 (half width)
    one_photon_detuning: float = 0.0
    two_photon_detuning: float = 0.0
    doppler_width: float = 0.0     # extra optical dephasing (Doppler HWHM)
    density: float = 3e10          # cm^-3
    length: float = 0.075          # m
    wavelength: float = cst.D1_WAVELENGTH  # m
    transition: TransitionSpec | None = None

    def __post_init__(self):
        bad = []
        for name in ("omega_c", "omega_p", "gamma_excited", "gamma_ground",
                     "doppler_width"):
            if getattr(self, name) < 0:
                bad.append(name)
        if self.omega_p > self.omega_c and self.omega_c > 0:
            bad.append("omega_p")
        for name in ("density", "length", "wavelength"):
            if not getattr(self, name) > 0:
                bad.append(name)
        if bad:
            raise ValidationError(
                "invalid LambdaParams: " + ", ".join(bad), fields=bad
            )

    @property
    def gamma_optical(self) -> float:
        """Optical coherence decay rate, rad/s.

        Gamma/2 from spontaneous decay, the Doppler width as pure optical
        dephasing, plus g12/4: the ground dephasing operator
        sqrt(g12/2)(|1><1| - |2><2|) damps rho_12 at g12 and the optical
        coherences at g12/4.
        """
        return 0.5 * self.gamma_excited + self.doppler_width + 0.25 * self.gamma_ground

    @property
    def prefactor(self) -> float:
        """K = N d^2 / (eps0 hbar), rad/s."""
        n_m3 = self.density * 1e6
        return n_m3 * cst.D1_DIPOLE**2 / (cst.EPS0 * cst.HBAR)

    @property
    def wavenumber(self) -> float:
        return TWO_PI / self.wavelength

    @property
    def optical_depth(self) -> float:
        """Line-center two-level optical depth k L K / g_opt."""
        return self.wavenumber * self.length * self.prefactor / self.gamma_optical


@dataclass(frozen=True)
class DRParams:
    """Optical-pumping double-resonance parameters."""

    omega_rf: float                # rad/s
    static_field: float            # gauss
    rf_detuning: float = 0.0       # rad/s, offset of the swept grid center
    pump_intensity: float = 0.0    # mW/cm^2
    gamma_ground: float = TWO_PI * 11.0

    def __post_init__(self):
        bad = []
        if self.omega_rf < 0:
            bad.append("omega_rf")
        if self.pump_intensity < 0:
            bad.append("pump_intensity")
        if self.gamma_ground <= 0:
            bad.append("gamma_ground")
        if bad:
            raise ValidationError("invalid DRParams: " + ", ".join(bad), fields=bad)


@dataclass(frozen=True)
class Spectrum:
    """Sampled spectrum on a uniform, strictly increasing frequency grid.

    The axis is stored in Hz (CSV round-trips are bit-exact on the stored
    values); physics reads the rad/s view through ``detunings_rad``.
    """

    detunings_hz: np.ndarray
    values: np.ndarray
    kind: str   # "susceptibility" (complex) or "transmission" (real)

    def __post_init__(self):
        d = np.asarray(self.detunings_hz, dtype=float)
        v = np.asarray(self.values)
        object.__setattr__(self, "detunings_hz", d)
        object.__setattr__(self, "values", v)
        bad = []
        if self.kind not in ("susceptibility", "transmission"):
            bad.append("kind")
        if d.ndim != 1 or v.ndim != 1 or d.size != v.size or d.size < 3:
            bad.append("detunings_hz")
        else:
            steps = np.diff(d)
            if not np.all(steps > 0):
                bad.append("detunings_hz")
            elif steps.size and not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
                bad.append("detunings_hz")
        if bad:
            raise ValidationError("invalid Spectrum: " + ", ".join(bad), fields=bad)

    @property
    def detunings_rad(self) -> np.ndarray:
        return self.detunings_hz * TWO_PI

    @property
    def step_hz(self) -> float:
        return float(self.detunings_hz[1] - self.detunings_hz[0])


# ---------------------------------------------------------------------------
# Steady-state susceptibility
# ---------------------------------------------------------------------------

def susceptibility(p: LambdaParams, delta_rad) -> np.ndarray:
    """Weak-probe complex susceptibility evaluated on ``delta_rad`` (rad/s)."""
    if p.omega_c == 0.0 and p.gamma_ground == 0.0:
        raise ValidationError(
            "dark-state singularity: need omega_c > 0 or gamma_ground > 0",
            fields=["omega_c", "gamma_ground"],
        )
    if p.gamma_excited == 0.0 and p.omega_c == 0.0 and p.doppler_width == 0.0:
        raise ValidationError(
            "degenerate parameter set: all rates and fields zero",
            fields=["gamma_excited", "omega_c"],
        )
    delta = np.asarray(delta_rad, dtype=float)
    g12 = p.gamma_ground
    g_opt = p.gamma_optical
    d_probe = p.one_photon_detuning + delta
    q = g12 - 1j * delta
    den = (g_opt - 1j * d_probe) * q + 0.25 * p.omega_c**2
    return p.prefactor * 1j * q / den


def steady_state_susceptibility(p: LambdaParams) -> complex:
    """chi at delta = p.two_photon_detuning."""
    return complex(susceptibility(p, p.two_photon_detuning))


def susceptibility_slope(p: LambdaParams, delta_rad) -> np.ndarray:
    """Analytic d(chi)/d(delta), the dispersion slope behind group delays.

    chi = K i q / D with q = g12 - i delta and
    D = (g_opt - i Dp) q + Omega_C^2/4, Dp = Delta + delta, so
    q' = -i and D' = -i (q + g_opt - i Dp).
    """
    delta = np.asarray(delta_rad, dtype=float)
    g12 = p.gamma_ground
    g_opt = p.gamma_optical
    d_probe = p.one_photon_detuning + delta
    q = g12 - 1j * delta
    den = (g_opt - 1j * d_probe) * q + 0.25 * p.omega_c**2
    dq = -1j
    dden = -1j * (q + g_opt - 1j * d_probe)
    return p.prefactor * 1j * (dq * den - q * dden) / den**2


def transmission(p: LambdaParams, delta_rad) -> np.ndarray:
    """Intensity transmission T = exp(-k L Im chi)."""
    chi = susceptibility(p, delta_rad)
    return np.exp(-p.wavenumber * p.length * chi.imag)


def doppler_convolved_susceptibility(
    p: LambdaParams, delta_rad, n_points: int = 64
) -> np.ndarray:
    """Explicit Gaussian average of chi over one-photon Doppler detunings.

    ``p.doppler_width`` is read as the HWHM of the inhomogeneous Gaussian;
    the homogeneous kernel is evaluated with doppler_width = 0. Gauss-Hermite
    quadrature with ``n_points`` nodes. This is the documented convolution
    behind the effective one-line Doppler model; production paths use the
    effective form.
    """
    sigma = p.doppler_width / np.sqrt(2.0 * np.log(2.0))
    kernel = LambdaParams(
        omega_c=p.omega_c, omega_p=p.omega_p, gamma_excited=p.gamma_excited,
        gamma_ground=p.gamma_ground, one_photon_detuning=p.one_photon_detuning,
        two_photon_detuning=p.two_photon_detuning, doppler_width=0.0,
        density=p.density, length=p.length, wavelength=p.wavelength,
        transition=p.transition,
    )
    nodes, weights = np.polynomial.hermite.hermgauss(n_points)
    delta = np.atleast_1d(np.asarray(delta_rad, dtype=float))
    chi = np.zeros(delta.shape, dtype=complex)
    for x, w in zip(nodes, weights):
        shifted = LambdaParams(
            omega_c=kernel.omega_c, omega_p=kernel.omega_p,
            gamma_excited=kernel.gamma_excited, gamma_ground=kernel.gamma_ground,
            one_photon_detuning=kernel.one_photon_detuning + np.sqrt(2.0) * sigma * x,
            two_photon_detuning=kernel.two_photon_detuning,
            doppler_width=0.0, density=kernel.density, length=kernel.length,
            wavelength=kernel.wavelength, transition=kernel.transition,
        )
        chi += w * susceptibility(shifted, delta)
    return chi / np.sqrt(np.pi)


# ---------------------------------------------------------------------------
# Master-equation oracle
# ---------------------------------------------------------------------------

def _liouvillian(p: LambdaParams) -> np.ndarray:
    """9x9 generator of the three-level master equation (row-major vec)."""
    d_probe = p.one_photon_detuning + p.two_photon_detuning
    H = np.zeros((3, 3), dtype=complex)
    H[2, 2] = -d_probe
    H[1, 1] = -p.two_photon_detuning
    H[2, 0] = H[0, 2] = 0.5 * p.omega_p
    H[2, 1] = H[1, 2] = 0.5 * p.omega_c

    gamma = p.gamma_excited
    collapse = [
        np.sqrt(gamma / 2.0) * np.array([[0, 0, 1], [0, 0, 0], [0, 0, 0]], complex),
        np.sqrt(gamma / 2.0) * np.array([[0, 0, 0], [0, 0, 1], [0, 0, 0]], complex),
        np.sqrt(p.gamma_ground / 2.0) * np.diag([1.0, -1.0, 0.0]).astype(complex),
        np.sqrt(2.0 * p.doppler_width) * np.diag([0.0, 0.0, 1.0]).astype(complex),
    ]

    eye = np.eye(3, dtype=complex)
    L = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    for c in collapse:
        cdc = c.conj().T @ c
        L += np.kron(c, c.conj())
        L -= 0.5 * (np.kron(cdc, eye) + np.kron(eye, cdc.T))
    return L


def _validate_density_matrix(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (3, 3):
        raise ValidationError("initial state must be 3x3", fields=["initial"])
    if not np.allclose(rho, rho.conj().T, atol=1e-12):
        raise ValidationError("initial state must be Hermitian", fields=["initial"])
    if abs(np.trace(rho).real - 1.0) > 1e-9 or abs(np.trace(rho).imag) > 1e-12:
        raise ValidationError("initial state must have unit trace", fields=["initial"])
    if np.linalg.eigvalsh(rho).min() < -1e-10:
        raise ValidationError(
            "initial state must be positive semidefinite", fields=["initial"]
        )
    return rho


def integrate_bloch(
    p: LambdaParams,
    duration: float,
    initial: np.ndarray,
    n_steps: int = 200,
):
    """Propagate the master equation; returns (times, rhos[n+1, 3, 3]).

    Fixed-step propagator stepping rho_{k+1} = expm(L dt) rho_k, exact for
    the time-independent generator, so the trace is conserved to rounding.
    """
    if not duration > 0:
        raise ValidationError("duration must be > 0", fields=["duration"])
    rho = _validate_density_matrix(initial)
    L = _liouvillian(p)
    dt = duration / n_steps
    P = expm(L * dt)
    times = np.linspace(0.0, duration, n_steps + 1)
    rhos = np.empty((n_steps + 1, 3, 3), dtype=complex)
    vec = rho.reshape(9)
    rhos[0] = rho
    for k in range(1, n_steps + 1):
        vec = P @ vec
        rhos[k] = vec.reshape(3, 3)
    return times, rhos


def bloch_steady_state(p: LambdaParams) -> np.ndarray:
    """Steady-state density matrix from the nullspace of the Liouvillian."""
    L = _liouvillian(p)
    a = np.vstack([L, np.eye(3, dtype=complex).reshape(1, 9)])
    b = np.zeros(10, dtype=complex)
    b[-1] = 1.0
    vec, *_ = np.linalg.lstsq(a, b, rcond=None)
    return vec.reshape(3, 3)


def bloch_susceptibility(p: LambdaParams) -> complex:
    """chi inferred from the steady-state coherence rho_31 (oracle path).

    In the rotating frame used by ``_liouvillian`` (detunings enter the
    Hamiltonian with a minus sign) the absorptive convention is
    chi = -2 K rho_31 / Omega_P, so that Im chi >= 0 means absorption.
    """
    if p.omega_p <= 0:
        raise ValidationError("bloch oracle needs omega_p > 0", fields=["omega_p"])
    rho = bloch_steady_state(p)
    return complex(-2.0 * p.prefactor * rho[2, 0] / p.omega_p)


# ---------------------------------------------------------------------------
# EIT spectra and widths
# ---------------------------------------------------------------------------

def eit_spectrum(p: LambdaParams, detuning_grid_hz) -> Spectrum:
    """Transmission spectrum vs two-photon detuning (grid in Hz)."""
    grid_hz = np.asarray(detuning_grid_hz, dtype=float)
    values = transmission(p, grid_hz * TWO_PI)
    return Spectrum(detunings_hz=grid_hz, values=values, kind="transmission")


def eit_window_halfwidth(p: LambdaParams) -> float:
    """Analytic half width g12 + Omega_C^2/(4 g_opt) of the transparency window, rad/s."""
    return p.gamma_ground + 0.25 * p.omega_c**2 / p.gamma_optical


def eit_fwhm(p: LambdaParams, span_hz: float | None = None) -> float:
    """FWHM (Hz) of the transparency feature by root bracketing on T(delta).

    The half-max level sits between line-center transmission and the
    two-level background next to the window. Raises GridRangeError when no
    half-max crossing exists inside the search span (e.g. no control field).
    """
    if span_hz is None:
        span_hz = 12.0 * eit_window_halfwidth(p) / TWO_PI
    t0 = float(transmission(p, 0.0))
    background = LambdaParams(
        omega_c=0.0, omega_p=p.omega_p, gamma_excited=p.gamma_excited,
        gamma_ground=p.gamma_ground, one_photon_detuning=p.one_photon_detuning,
        two_photon_detuning=0.0, doppler_width=p.doppler_width,
        density=p.density, length=p.length, wavelength=p.wavelength,
        transition=p.transition,
    )
    t_bg = float(transmission(background, 0.0))
    t_half = 0.5 * (t0 + t_bg)
    if not t0 > t_bg * (1.0 + 1e-12):
        raise GridRangeError(
            "no transparency feature to bracket; widen the grid or add control power"
        )

    def f(delta_hz: float) -> float:
        return float(transmission(p, delta_hz * TWO_PI)) - t_half

    lo, hi = 0.0, span_hz
    for _ in range(60):
        if f(hi) < 0.0:
            break
        hi *= 2.0
        if hi > 1e12:
            raise GridRangeError(
                "no half-max crossing found; widen the detuning grid"
            )
    right = brentq(f, lo, hi, xtol=1e-9 * max(hi, 1.0), rtol=1e-14)
    left = brentq(lambda x: f(-x), lo, hi, xtol=1e-9 * max(hi, 1.0), rtol=1e-14)
    return float(right + left)


# ---------------------------------------------------------------------------
# Double resonance
# ---------------------------------------------------------------------------

DR_MAX_CONTRAST = 0.5   # transmission dip depth at full rf saturation
DR_BEAM_DUTY = 1.024e-3  # (0.4 mm / 12.5 mm)^2: duty cycle of the 0.8 mm
                         # double-resonance beam in the reference coated cell


def dr_linewidth(d: DRParams, species: AtomSpecies | None = None) -> float:
    """Half width (rad/s) of the double-resonance dip.

    W = g12 sqrt(1 + s_rf) + R_opt: rf saturation broadening plus the
    duty-suppressed optical-pumping rate of the probe laser. At negligible
    powers the dip FWHM is 2 g12 / 2pi.
    """
    species = species or atomkit.RB85
    r_opt = _dr_optical_pumping_rate(d, species)
    s_rf = d.omega_rf**2 / (2.0 * d.gamma_ground * (d.gamma_ground + r_opt))
    return d.gamma_ground * np.sqrt(1.0 + s_rf) + r_opt


def _dr_optical_pumping_rate(d: DRParams, species: AtomSpecies) -> float:
    # reference conditions of the coated-cell double resonance: 36 C cell,
    # 0.8 mm beam whose duty cycle suppresses the cell-averaged pump rate
    omega_pump = atomkit.rabi_from_intensity(d.pump_intensity, species)
    g_opt = 0.5 * species.excited_decay_rate + atomkit.doppler_hwhm(36.0, species)
    return DR_BEAM_DUTY * cst.PUMP_EFFICIENCY * omega_pump**2 / (4.0 * g_opt)


def double_resonance_spectrum(
    d: DRParams,
    rf_grid_hz,
    species: AtomSpecies | None = None,
    ground_F: int = 3,
) -> Spectrum:
    """Transmission dip vs rf frequency (grid in Hz, absolute rf frequency)."""
    species = species or atomkit.RB85
    gF = species.level(ground_F).gF
    center_hz = atomkit.zeeman_splitting(d.static_field, gF, 1) + d.rf_detuning / TWO_PI
    w = dr_linewidth(d, species)
    r_opt = _dr_optical_pumping_rate(d, species)
    s_rf = d.omega_rf**2 / (2.0 * d.gamma_ground * (d.gamma_ground + r_opt))
    contrast = DR_MAX_CONTRAST * s_rf / (1.0 + s_rf)
    grid_hz = np.asarray(rf_grid_hz, dtype=float)
    x = TWO_PI * (grid_hz - center_hz)
    values = 1.0 - contrast * w**2 / (x**2 + w**2)
    return Spectrum(detunings_hz=grid_hz, values=values, kind="transmission")


# ---------------------------------------------------------------------------
# Magnetic-gradient broadening
# ---------------------------------------------------------------------------

def gradient_broadening(delta_m: int, gradient_width_hz: float) -> float:
    """Width contribution delta_m * gradient_width (Hz, Delta-m = 1 basis)."""
    if delta_m not in (1, 2):
        raise ValidationError(
            f"delta_m must be 1 or 2, got {delta_m}", fields=["delta_m"]
        )
    if gradient_width_hz < 0:
        raise ValidationError(
            "gradient width must be >= 0", fields=["gradient_width_hz"]
        )
    return float(delta_m * gradient_width_hz)


def combine_widths(base_hz: float, extra_hz: float, mode: str | None = None) -> float:
    """Combine two width contributions, linearly by default (documented flag)."""
    mode = mode or cst.GRADIENT_COMBINATION
    if mode == "linear":
        return base_hz + extra_hz
    if mode == "quadrature":
        return float(np.hypot(base_hz, extra_hz))
    raise ValidationError(f"unknown combination mode {mode!r}", fields=["mode"])
