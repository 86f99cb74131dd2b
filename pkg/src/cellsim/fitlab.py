"""Lorentzian lineshape fitting and pulse-trace metrology.

A small Levenberg-Marquardt core with analytic Jacobians drives both the
single and the shared-center dual Lorentzian models. The damping schedule
is fixed (start 1e-3, x10 on reject, /3 on accept) and steps are accepted
only when the residual decreases, so the residual norm is monotone over
accepted steps and fitting is deterministic for identical inputs.

Convergence: relative parameter step < 1e-8, or 500 iterations.
Uncertainties are the usual asymptotic estimates from the diagonal of the
inverse approximate Hessian at the solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FitError, MetricError, ValidationError

MAX_ITERATIONS = 500
STEP_TOLERANCE = 1e-8
LAMBDA_INIT = 1e-3
LAMBDA_UP = 10.0
LAMBDA_DOWN = 3.0
LAMBDA_MAX = 1e12


@dataclass(frozen=True)
class FitResult:
    model: str                                  # "lorentzian" | "dual_lorentzian"
    params: dict = field(default_factory=dict)
    uncertainties: dict = field(default_factory=dict)
    residual_rms: float = np.inf
    converged: bool = False
    iterations: int = 0

    def __post_init__(self):
        if self.converged:
            for name, value in self.params.items():
                if name.startswith("fwhm") and not value > 0:
                    raise ValidationError(
                        f"converged fit returned non-positive {name}", fields=[name]
                    )


def lorentzian(x, center, fwhm, amplitude, offset=0.0):
    """offset + amplitude * (w/2)^2 / ((x-c)^2 + (w/2)^2); peak-height form."""
    hw2 = (0.5 * fwhm) ** 2
    return offset + amplitude * hw2 / ((x - center) ** 2 + hw2)


def _coerce_xy(data):
    # Accepts a Spectrum (detunings_hz/values attributes) or an (x, y) pair.
    if hasattr(data, "detunings_hz") and hasattr(data, "values"):
        x = np.asarray(data.detunings_hz, dtype=float)
        y = np.asarray(data.values, dtype=float)
    else:
        x, y = data
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValidationError("x and y must be 1-d arrays of equal length",
                              fields=["data"])
    if not np.all(np.diff(x) > 0):
        raise ValidationError("x must be strictly increasing", fields=["data"])
    return x, y


def _levenberg_marquardt(residual, jacobian, p0):
    """Damped normal equations with a strict-descent acceptance rule.

    Converged means either the relative parameter step fell below
    STEP_TOLERANCE or no strictly decreasing step exists within the damping
    range (numerically stationary). Running out of iterations reports
    converged=False with the last iterate.
    """
    p = np.asarray(p0, dtype=float).copy()
    r = residual(p)
    sse = float(r @ r)
    lam = LAMBDA_INIT
    converged = False
    iterations = 0
    for _ in range(MAX_ITERATIONS):
        J = jacobian(p)
        g = J.T @ r
        a = J.T @ J
        d = np.diag(a).copy()
        d[d <= 0.0] = 1.0
        accepted = False
        while lam <= LAMBDA_MAX:
            try:
                dp = np.linalg.solve(a + lam * np.diag(d), -g)
            except np.linalg.LinAlgError:
                dp = None
            if dp is not None and np.all(np.isfinite(dp)):
                p_try = p + dp
                r_try = residual(p_try)
                sse_try = float(r_try @ r_try)
                if np.isfinite(sse_try) and sse_try < sse:
                    p, r, sse = p_try, r_try, sse_try
                    lam = max(lam / LAMBDA_DOWN, 1e-12)
                    accepted = True
                    break
            lam *= LAMBDA_UP
        iterations += 1
        if not accepted:
            converged = True  # stationary: no descent direction left
            break
        rel_step = np.max(np.abs(dp) / (np.abs(p) + 1e-300))
        if rel_step < STEP_TOLERANCE:
            converged = True
            break
    return p, r, sse, converged, iterations


def _uncertainties(jacobian, p, sse, n_points):
    dof = max(n_points - p.size, 1)
    J = jacobian(p)
    try:
        cov = np.linalg.inv(J.T @ J) * (sse / dof)
        sig = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    except np.linalg.LinAlgError:
        sig = np.full(p.size, np.nan)
    return sig


def _halfmax_width(x, y_feature, center_idx):
    """Crude FWHM estimate of |y_feature| around its extremum, for seeding."""
    target = 0.5 * abs(y_feature[center_idx])
    mag = np.abs(y_feature)
    left = center_idx
    while left > 0 and mag[left] > target:
        left -= 1
    right = center_idx
    while right < mag.size - 1 and mag[right] > target:
        right += 1
    width = x[right] - x[left]
    if width <= 0:
        width = 2.0 * (x[1] - x[0])
    return width


def _single_guess(x, y):
    offset = float(np.median(y))
    dev = y - offset
    idx = int(np.argmax(np.abs(dev)))
    amplitude = float(dev[idx])
    if amplitude == 0.0:
        raise FitError("degenerate data: no feature above the baseline")
    center = float(x[idx])
    fwhm = _halfmax_width(x, dev, idx)
    return np.array([center, fwhm, amplitude, offset])


def fit_lorentzian(data, initial_guess=None) -> FitResult:
    """Fit offset + amplitude * L(x; center, fwhm).

    ``data`` is a transmission Spectrum or an (x, y) pair. Auto-initializes
    from the extremum and a half-max scan when no guess is given. Returns
    converged=False with the last iterate instead of raising when LM stalls;
    constant data raises FitError.
    """
    x, y = _coerce_xy(data)
    if x.size < 8:
        raise ValidationError("need at least 8 points", fields=["data"])
    if np.ptp(y) == 0.0:
        raise FitError("degenerate data: y is constant")
    if initial_guess is None:
        p0 = _single_guess(x, y)
    else:
        p0 = np.asarray(initial_guess, dtype=float)
        if p0.shape != (4,):
            raise ValidationError(
                "initial_guess must be (center, fwhm, amplitude, offset)",
                fields=["initial_guess"],
            )

    def model(p):
        return lorentzian(x, p[0], p[1], p[2], p[3])

    def residual(p):
        return model(p) - y

    def jacobian(p):
        c, w, a, _ = p
        hw2 = (0.5 * w) ** 2
        den = (x - c) ** 2 + hw2
        shape = hw2 / den
        J = np.empty((x.size, 4))
        J[:, 0] = a * hw2 * 2.0 * (x - c) / den**2
        J[:, 1] = a * 0.5 * w * ((x - c) ** 2) / den**2
        J[:, 2] = shape
        J[:, 3] = 1.0
        return J

    p, r, sse, converged, iterations = _levenberg_marquardt(residual, jacobian, p0)
    p[1] = abs(p[1])  # the model is even in fwhm
    sig = _uncertainties(jacobian, p, sse, x.size)
    names = ("center", "fwhm", "amplitude", "offset")
    return FitResult(
        model="lorentzian",
        params=dict(zip(names, map(float, p))),
        uncertainties=dict(zip(names, map(float, sig))),
        residual_rms=float(np.sqrt(sse / x.size)),
        converged=converged,
        iterations=iterations,
    )


def _dual_guess(x, y):
    # baseline from the outer 10% of samples on each side
    edge = max(2, x.size // 10)
    offset = float(np.median(np.concatenate([y[:edge], y[-edge:]])))
    dev = y - offset
    idx = int(np.argmax(np.abs(dev)))
    center = float(x[idx])
    amp_total = float(dev[idx])
    if amp_total == 0.0:
        raise FitError("degenerate data: no feature above the baseline")
    # broad component from the full-span half-max scan
    w_broad = _halfmax_width(x, dev, idx)
    # narrow component from the central 5% window
    span = x[-1] - x[0]
    win = np.abs(x - center) <= 0.025 * span
    if np.count_nonzero(win) >= 5:
        xw, yw = x[win], dev[win]
        iw = int(np.argmax(np.abs(yw)))
        w_narrow = _halfmax_width(xw, yw, iw)
    else:
        w_narrow = w_broad / 10.0
    if w_broad < 3.0 * w_narrow:
        w_broad = 3.0 * w_narrow
    return np.array([center, 0.5 * amp_total, w_narrow,
                     0.5 * amp_total, w_broad, offset])


def fit_dual_lorentzian(data, initial_guess=None) -> FitResult:
    """Shared-center sum of a narrow and a broad Lorentzian plus offset.

    Components are returned narrow-first (params narrow_fwhm/narrow_amplitude
    and broad_fwhm/broad_amplitude). Raises FitError when the fitted widths
    are within 2x of each other (model not identifiable).
    """
    x, y = _coerce_xy(data)
    if x.size < 24:
        raise ValidationError("need at least 24 points", fields=["data"])
    if np.ptp(y) == 0.0:
        raise FitError("degenerate data: y is constant")
    if initial_guess is None:
        p0 = _dual_guess(x, y)
    else:
        p0 = np.asarray(initial_guess, dtype=float)
        if p0.shape != (6,):
            raise ValidationError(
                "initial_guess must be (center, amp_n, fwhm_n, amp_b, fwhm_b, offset)",
                fields=["initial_guess"],
            )
        if not abs(p0[4]) >= 3.0 * abs(p0[2]):
            raise ValidationError(
                "initial width separation must be >= 3x", fields=["initial_guess"]
            )

    def model(p):
        c, a_n, w_n, a_b, w_b, off = p
        return (lorentzian(x, c, w_n, a_n) + lorentzian(x, c, w_b, a_b) + off)

    def residual(p):
        return model(p) - y

    def jacobian(p):
        c, a_n, w_n, a_b, w_b, _ = p
        J = np.empty((x.size, 6))
        J[:, 5] = 1.0
        dc = np.zeros(x.size)
        for k, (a, w) in enumerate(((a_n, w_n), (a_b, w_b))):
            hw2 = (0.5 * w) ** 2
            den = (x - c) ** 2 + hw2
            J[:, 1 + 2 * k] = hw2 / den
            J[:, 2 + 2 * k] = a * 0.5 * w * ((x - c) ** 2) / den**2
            dc = dc + a * hw2 * 2.0 * (x - c) / den**2
        J[:, 0] = dc
        return J

    p, r, sse, converged, iterations = _levenberg_marquardt(residual, jacobian, p0)
    p[2], p[4] = abs(p[2]), abs(p[4])
    # order narrow-first
    if p[2] > p[4]:
        p = p[[0, 3, 4, 1, 2, 5]]
    sig = _uncertainties(jacobian, p, sse, x.size)
    if converged and p[4] < 2.0 * p[2]:
        raise FitError(
            f"dual model not identifiable: widths {p[2]:.3g} and {p[4]:.3g} "
            "are within 2x of each other"
        )
    names = ("center", "narrow_amplitude", "narrow_fwhm",
             "broad_amplitude", "broad_fwhm", "offset")
    return FitResult(
        model="dual_lorentzian",
        params=dict(zip(names, map(float, p))),
        uncertainties=dict(zip(names, map(float, sig))),
        residual_rms=float(np.sqrt(sse / x.size)),
        converged=converged,
        iterations=iterations,
    )


# ---------------------------------------------------------------------------
# Pulse metrology
# ---------------------------------------------------------------------------

def _coerce_trace(trace):
    if hasattr(trace, "times") and hasattr(trace, "samples"):
        return np.asarray(trace.times, float), np.asarray(trace.samples, float)
    t, y = trace
    return np.asarray(t, float), np.asarray(y, float)


def pulse_metrics(trace) -> tuple[float, float, float]:
    """(peak_time, fwhm, energy) of an intensity trace.

    Peak by 3-point parabolic interpolation, FWHM by linear interpolation at
    half maximum (zero baseline), energy by the trapezoidal sum. Raises
    MetricError on multi-peaked traces (a second connected region above 90%
    of the maximum) and when the half-max level is not bracketed by the grid.
    """
    t, y = _coerce_trace(trace)
    if y.size < 3:
        raise ValidationError("trace too short", fields=["trace"])
    ymax = float(y.max())
    if ymax <= 0.0:
        raise MetricError("no peak: trace is non-positive everywhere")
    above = y >= 0.9 * ymax
    regions = int(np.count_nonzero(np.diff(above.astype(int)) == 1)) + int(above[0])
    if regions > 1:
        raise MetricError(
            f"ambiguous peak: {regions} separate regions within 90% of the maximum"
        )
    i = int(np.argmax(y))
    if 0 < i < y.size - 1:
        den = y[i - 1] - 2.0 * y[i] + y[i + 1]
        shift = 0.0 if den == 0.0 else 0.5 * (y[i - 1] - y[i + 1]) / den
        shift = float(np.clip(shift, -0.5, 0.5))
    else:
        shift = 0.0
    dt = t[1] - t[0]
    peak_time = float(t[i] + shift * dt)

    half = 0.5 * ymax
    j = i
    while j > 0 and y[j] > half:
        j -= 1
    if y[j] > half:
        raise MetricError("half maximum not bracketed on the left of the peak")
    t_left = t[j] + (half - y[j]) / (y[j + 1] - y[j]) * dt
    j = i
    while j < y.size - 1 and y[j] > half:
        j += 1
    if y[j] > half:
        raise MetricError("half maximum not bracketed on the right of the peak")
    t_right = t[j - 1] + (y[j - 1] - half) / (y[j - 1] - y[j]) * dt
    fwhm = float(t_right - t_left)

    energy = float(np.trapezoid(y, t))
    return peak_time, fwhm, energy
