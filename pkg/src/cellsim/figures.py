"""Figure rendering for the report path: one PNG next to each CSV set.

Uses the non-interactive Agg backend and strips the Software metadata tag
so reruns produce byte-identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .fitlab import lorentzian  # noqa: E402

_SAVE_KW = dict(dpi=150, metadata={"Software": None})


def _fit_curve(x, fit):
    p = fit.params
    if fit.model == "lorentzian":
        return lorentzian(x, p["center"], p["fwhm"], p["amplitude"], p["offset"])
    return (lorentzian(x, p["center"], p["narrow_fwhm"], p["narrow_amplitude"])
            + lorentzian(x, p["center"], p["broad_fwhm"], p["broad_amplitude"])
            + p["offset"])


def _render_spectrum(result, path):
    spectrum, fit = result["spectrum"], result["fit"]
    x = spectrum.detunings_hz
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(x, spectrum.values, ".", ms=2.5, color="0.35", label="model")
    ax.plot(x, _fit_curve(x, fit), "-", lw=1.2, color="C3", label=fit.model)
    if fit.model == "lorentzian":
        note = f"FWHM = {fit.params['fwhm']:.3g} Hz"
    else:
        note = (f"narrow = {fit.params['narrow_fwhm']:.3g} Hz, "
                f"broad = {fit.params['broad_fwhm']:.3g} Hz")
    ax.set_title(f"{result['name']} ({note})", fontsize=10)
    ax.set_xlabel("detuning (Hz)")
    ax.set_ylabel("transmission")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def _render_pulse(result, path):
    pin = result["pulse_in"]
    pout = result["result"].output
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(pin.times * 1e3, pin.samples, "-", color="0.4", label="input")
    scale = pout.samples.max()
    label = f"output x{1.0 / scale:.3g}" if scale < 0.5 else "output"
    ax.plot(pout.times * 1e3, pout.samples / max(scale, 1e-300), "-",
            color="C0", label=label)
    ax.set_xlabel("time (ms)")
    ax.set_ylabel("intensity (norm.)")
    ax.set_title(f"fractional delay = {result['result'].fractional_delay:.3f}",
                 fontsize=10)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def _render_delay_sweep(result, path):
    rows = result["rows"]
    intensities = sorted({r["intensity_mW_cm2"] for r in rows})
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for intensity in intensities:
        pts = [(r["pulse_fwhm_s"], r["fractional_delay"]) for r in rows
               if r["intensity_mW_cm2"] == intensity and not r["error"]]
        if not pts:
            continue
        xs, ys = zip(*sorted(pts))
        ax.semilogx(np.array(xs) * 1e6, ys, "o-", ms=4,
                    label=f"{intensity:g} mW/cm$^2$")
    ax.set_xlabel("input pulse width (us)")
    ax.set_ylabel("fractional delay")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def _render_repump_sweep(result, path):
    rows = result["rows"]
    temps = sorted({r["temperature_C"] for r in rows})
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for t in temps:
        pts = [(r["repump_intensity_mW_cm2"], r["fractional_delay"])
               for r in rows if r["temperature_C"] == t and not r["error"]]
        base = [y for x, y in pts if x == 0.0]
        if not pts:
            continue
        xs, ys = zip(*sorted(pts))
        ax.plot(xs, ys, "d-", ms=5, label=f"{t:g} C")
        if base:
            ax.axhline(base[0], ls="--", lw=0.8, color="0.6")
    ax.set_xlabel("repumper intensity (mW/cm$^2$)")
    ax.set_ylabel("fractional delay")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def _render_vg_curve(result, path):
    rows = result["rows"]
    temps = sorted({r["temperature_C"] for r in rows})
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.5, 4.0))
    for t in temps:
        pts = [(r["intensity_mW_cm2"], r["v_g_m_s"], r["energy_transmission"])
               for r in rows if r["temperature_C"] == t and not r["error"]]
        if not pts:
            continue
        xs, vs, ts = zip(*sorted(pts))
        ax1.plot(xs, vs, "s-", ms=4, label=f"{t:g} C")
        ax2.plot(xs, 1.0 - np.array(ts), "s-", ms=4, label=f"{t:g} C")
    ax1.set_xlabel("control intensity (mW/cm$^2$)")
    ax1.set_ylabel("group velocity (m/s)")
    ax2.set_xlabel("control intensity (mW/cm$^2$)")
    ax2.set_ylabel("pulse absorption")
    ax1.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


_RENDERERS = {
    "spectrum": _render_spectrum,
    "pulse": _render_pulse,
    "delay_sweep": _render_delay_sweep,
    "repump_sweep": _render_repump_sweep,
    "vg_curve": _render_vg_curve,
}


def render(payload, path) -> None:
    kind, result = payload
    _RENDERERS[kind](result, path)
