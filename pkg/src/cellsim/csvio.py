"""CSV and text serialization for spectra, pulses, fits and sweep tables.

Floats are written with repr (shortest round-trip representation), fields
separated by commas, lines terminated with LF. Write -> read -> write is
byte-identical; this is a stated contract and is covered by tests.
"""

from __future__ import annotations

import csv
import io

import numpy as np

from .fitlab import FitResult
from .errors import ParseError
from .lambda_solver import Spectrum


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _parse_float(token: str, path: str, line: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"{path}:{line}: not a number: {token!r}", line=line) from None


# ---------------------------------------------------------------------------
# Spectrum
# ---------------------------------------------------------------------------

def spectrum_to_csv(spectrum: Spectrum) -> str:
    complex_valued = np.iscomplexobj(spectrum.values)
    lines = []
    if complex_valued:
        lines.append("detuning_Hz,chi_real,chi_imag")
        for x, v in zip(spectrum.detunings_hz, spectrum.values):
            lines.append(f"{_fmt(x)},{_fmt(v.real)},{_fmt(v.imag)}")
    else:
        header = "transmission" if spectrum.kind == "transmission" else "value"
        lines.append(f"detuning_Hz,{header}")
        for x, v in zip(spectrum.detunings_hz, spectrum.values):
            lines.append(f"{_fmt(x)},{_fmt(v)}")
    return "\n".join(lines) + "\n"


def spectrum_from_csv(text: str, path: str = "<memory>") -> Spectrum:
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise ParseError(f"{path}:1: empty file", line=1)
    header = lines[0].split(",")
    if header[0] != "detuning_Hz" or len(header) not in (2, 3):
        raise ParseError(f"{path}:1: unrecognized spectrum header {lines[0]!r}", line=1)
    complex_valued = len(header) == 3
    kind = "susceptibility" if complex_valued else "transmission"
    xs, vs = [], []
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(header):
            raise ParseError(f"{path}:{i}: expected {len(header)} columns", line=i)
        xs.append(_parse_float(parts[0], path, i))
        if complex_valued:
            vs.append(complex(_parse_float(parts[1], path, i),
                              _parse_float(parts[2], path, i)))
        else:
            vs.append(_parse_float(parts[1], path, i))
    dtype = complex if complex_valued else float
    return Spectrum(detunings_hz=np.array(xs), values=np.array(vs, dtype=dtype),
                    kind=kind)


# ---------------------------------------------------------------------------
# Pulse
# ---------------------------------------------------------------------------

def pulse_to_csv(pulse) -> str:
    lines = ["time_s,intensity"]
    for t, y in zip(pulse.times, pulse.samples):
        lines.append(f"{_fmt(t)},{_fmt(y)}")
    return "\n".join(lines) + "\n"


def pulse_from_csv(text: str, path: str = "<memory>"):
    from .pulsewave import Pulse

    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise ParseError(f"{path}:1: empty file", line=1)
    if lines[0] != "time_s,intensity":
        raise ParseError(f"{path}:1: unrecognized pulse header {lines[0]!r}", line=1)
    ts, ys = [], []
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(f"{path}:{i}: expected 2 columns", line=i)
        ts.append(_parse_float(parts[0], path, i))
        ys.append(_parse_float(parts[1], path, i))
    if len(ts) < 2:
        raise ParseError(f"{path}: need at least 2 samples", line=len(lines))
    t = np.array(ts)
    steps = np.diff(t)
    if steps.min() <= 0 or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise ParseError(f"{path}: time grid is not uniformly increasing", line=2)
    return Pulse(t0=float(t[0]), dt=float(t[1] - t[0]), samples=np.array(ys))


# ---------------------------------------------------------------------------
# Fit results
# ---------------------------------------------------------------------------

def fit_result_to_text(result: FitResult) -> str:
    lines = [f"model={result.model}"]
    for name, value in result.params.items():
        lines.append(f"{name}={_fmt(value)}")
    for name, value in result.uncertainties.items():
        lines.append(f"sigma_{name}={_fmt(value)}")
    lines.append(f"residual_rms={_fmt(result.residual_rms)}")
    lines.append(f"converged={str(result.converged).lower()}")
    lines.append(f"iterations={result.iterations}")
    return "\n".join(lines) + "\n"


def fit_result_to_csv_row(result: FitResult) -> str:
    names = list(result.params)
    header = ["model"] + names + [f"sigma_{n}" for n in names] + [
        "residual_rms", "converged", "iterations"]
    row = [result.model]
    row += [_fmt(result.params[n]) for n in names]
    row += [_fmt(result.uncertainties.get(n, float("nan"))) for n in names]
    row += [_fmt(result.residual_rms), str(result.converged).lower(),
            str(result.iterations)]
    return ",".join(header) + "\n" + ",".join(row) + "\n"


# ---------------------------------------------------------------------------
# Long-format tables (sweeps)
# ---------------------------------------------------------------------------

def table_to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(col, "")) for col in columns])
    return buf.getvalue()


def table_from_csv(text: str, path: str = "<memory>") -> list[dict]:
    lines = text.splitlines()
    if not lines:
        raise ParseError(f"{path}:1: empty file", line=1)
    reader = csv.reader(lines)
    header = next(reader)
    rows = []
    for i, parts in enumerate(reader, start=2):
        if not parts:
            continue
        if len(parts) != len(header):
            raise ParseError(f"{path}:{i}: expected {len(header)} columns", line=i)
        row = {}
        for key, token in zip(header, parts):
            if key == "error":
                row[key] = token
            else:
                try:
                    row[key] = float(token)
                except ValueError:
                    row[key] = token
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# Transit statistics
# ---------------------------------------------------------------------------

def transit_statistics_to_csv(stats) -> str:
    lines = [
        f"# seed={stats.seed}",
        f"# n_atoms={stats.n_atoms}",
        f"# duration_s={_fmt(stats.duration)}",
        f"# mean_in_beam_time_s={_fmt(stats.mean_in_beam_time)}",
        f"# mean_dark_time_s={_fmt(stats.mean_dark_time)}",
        f"# in_beam_fraction={_fmt(stats.in_beam_fraction)}",
        f"# in_beam_fraction_se={_fmt(stats.in_beam_fraction_se)}",
        "bounces,probability",
    ]
    for k, p in enumerate(stats.bounce_count_histogram):
        lines.append(f"{k},{_fmt(p)}")
    return "\n".join(lines) + "\n"


def transit_statistics_from_csv(text: str, path: str = "<memory>"):
    from .coated_cell import TransitStatistics

    header: dict = {}
    hist = []
    for i, line in enumerate(text.splitlines(), start=1):
        if line.startswith("# "):
            key, _, val = line[2:].partition("=")
            header[key] = val
        elif line == "bounces,probability" or not line.strip():
            continue
        else:
            parts = line.split(",")
            if len(parts) != 2:
                raise ParseError(f"{path}:{i}: expected 2 columns", line=i)
            hist.append(_parse_float(parts[1], path, i))
    if not header or not hist:
        raise ParseError(f"{path}:1: missing header or histogram", line=1)
    return TransitStatistics(
        mean_in_beam_time=float(header["mean_in_beam_time_s"]),
        mean_dark_time=float(header["mean_dark_time_s"]),
        bounce_count_histogram=np.array(hist),
        in_beam_fraction=float(header["in_beam_fraction"]),
        seed=int(header["seed"]),
        n_atoms=int(header["n_atoms"]),
        duration=float(header["duration_s"]),
        in_beam_fraction_se=float(header["in_beam_fraction_se"]),
    )
