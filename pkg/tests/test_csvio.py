import numpy as np
import pytest

from cellsim import csvio, fitlab, montecarlo
from cellsim.atomkit import BeamConfig
from cellsim.coated_cell import CellConfig
from cellsim.errors import ParseError
from cellsim.lambda_solver import Spectrum
from cellsim.pulsewave import Pulse, gaussian_pulse


class TestSpectrumRoundTrip:
    def test_transmission_bit_exact(self):
        rng = np.random.default_rng(2)
        x = np.linspace(-431.7, 431.7, 257)
        spec = Spectrum(detunings_hz=x, values=rng.random(257), kind="transmission")
        text = csvio.spectrum_to_csv(spec)
        back = csvio.spectrum_from_csv(text)
        assert np.array_equal(back.detunings_hz, spec.detunings_hz)
        assert np.array_equal(back.values, spec.values)
        assert csvio.spectrum_to_csv(back) == text

    def test_susceptibility_three_columns(self):
        x = np.linspace(-1e3, 1e3, 65)
        vals = np.exp(1j * x / 500.0) * 1e-7
        spec = Spectrum(detunings_hz=x, values=vals, kind="susceptibility")
        text = csvio.spectrum_to_csv(spec)
        assert text.splitlines()[0] == "detuning_Hz,chi_real,chi_imag"
        back = csvio.spectrum_from_csv(text)
        assert np.array_equal(back.values, spec.values)
        assert csvio.spectrum_to_csv(back) == text

    def test_lf_line_endings(self):
        x = np.linspace(0, 10, 16)
        spec = Spectrum(detunings_hz=x, values=np.ones(16), kind="transmission")
        assert "\r" not in csvio.spectrum_to_csv(spec)

    def test_empty_file_line_one(self):
        with pytest.raises(ParseError) as err:
            csvio.spectrum_from_csv("", path="f.csv")
        assert err.value.line == 1

    def test_bad_number_reports_line(self):
        text = "detuning_Hz,transmission\n1.0,0.5\nnope,0.5\n"
        with pytest.raises(ParseError) as err:
            csvio.spectrum_from_csv(text, path="f.csv")
        assert err.value.line == 3


class TestPulseRoundTrip:
    def test_bit_exact(self):
        pulse = gaussian_pulse(1e-3)
        text = csvio.pulse_to_csv(pulse)
        back = csvio.pulse_from_csv(text)
        assert back.t0 == pulse.t0 and back.dt == pulse.dt
        assert np.array_equal(back.samples, pulse.samples)
        assert csvio.pulse_to_csv(back) == text

    def test_nonuniform_grid_rejected(self):
        text = "time_s,intensity\n0.0,1.0\n1.0,1.0\n3.0,1.0\n" + "4.0,1.0\n" * 16
        with pytest.raises(ParseError):
            csvio.pulse_from_csv(text)

    def test_header_required(self):
        with pytest.raises(ParseError) as err:
            csvio.pulse_from_csv("t,y\n0,1\n")
        assert err.value.line == 1


class TestFitResultText:
    def test_round_trippable_floats(self):
        x = np.linspace(-50, 50, 201)
        y = fitlab.lorentzian(x, 0.0, 22.0, 1.0, 0.1)
        fit = fitlab.fit_lorentzian((x, y))
        text = csvio.fit_result_to_text(fit)
        values = dict(line.split("=", 1) for line in text.strip().splitlines())
        assert float(values["fwhm"]) == fit.params["fwhm"]
        assert values["model"] == "lorentzian"
        row = csvio.fit_result_to_csv_row(fit)
        header, data = row.strip().splitlines()
        assert header.split(",")[0] == "model"
        assert data.split(",")[0] == "lorentzian"


class TestTableRoundTrip:
    def test_bit_exact_with_error_column(self):
        rows = [
            {"a": 1.5, "b": 0.1, "error": ""},
            {"a": float("nan"), "b": 2.0, "error": "below detectability floor (1e-02)"},
        ]
        text = csvio.table_to_csv(rows, ["a", "b", "error"])
        back = csvio.table_from_csv(text)
        assert back[0]["a"] == 1.5
        assert np.isnan(back[1]["a"])
        assert back[1]["error"] == "below detectability floor (1e-02)"
        assert csvio.table_to_csv(back, ["a", "b", "error"]) == text


class TestTransitStatisticsCsv:
    def test_round_trip(self):
        cell = CellConfig(cell_radius=0.0125, cell_length=0.075, temperature_C=48.0,
                          beam=BeamConfig(diameter=4.5e-3, total_intensity=3.5))
        stats = montecarlo.simulate_trajectories(cell, 300, seed=9)
        text = csvio.transit_statistics_to_csv(stats)
        assert f"# seed={stats.seed}" in text
        back = csvio.transit_statistics_from_csv(text)
        assert back.mean_in_beam_time == stats.mean_in_beam_time
        assert back.in_beam_fraction == stats.in_beam_fraction
        assert np.array_equal(back.bounce_count_histogram,
                              stats.bounce_count_histogram)
        assert csvio.transit_statistics_to_csv(back) == text
