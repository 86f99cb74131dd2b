import numpy as np
import pytest

from cellsim import atomkit, montecarlo as mc
from cellsim.atomkit import RB87, BeamConfig
from cellsim.coated_cell import CellConfig
from cellsim.errors import ValidationError


def cell(diameter=4.5e-3, temperature=48.0):
    return CellConfig(
        cell_radius=0.0125, cell_length=0.075, temperature_C=temperature,
        beam=BeamConfig(diameter=diameter, total_intensity=3.5),
    )


class TestDeterminism:
    def test_bit_identical_reruns(self):
        a = mc.simulate_trajectories(cell(), 500, seed=42)
        b = mc.simulate_trajectories(cell(), 500, seed=42)
        assert a.in_beam_fraction == b.in_beam_fraction
        assert a.mean_in_beam_time == b.mean_in_beam_time
        assert a.mean_dark_time == b.mean_dark_time
        assert np.array_equal(a.bounce_count_histogram, b.bounce_count_histogram)

    def test_different_seeds_differ(self):
        a = mc.simulate_trajectories(cell(), 500, seed=1)
        b = mc.simulate_trajectories(cell(), 500, seed=2)
        assert a.in_beam_fraction != b.in_beam_fraction

    def test_chunk_invariance(self):
        # per-atom substreams depend only on (seed, global atom index):
        # a chunked run reproduces the full run's aggregates to rounding
        full = mc.simulate_trajectories(cell(), 400, seed=7)
        lo = mc.simulate_trajectories(cell(), 200, seed=7, atom_offset=0)
        hi = mc.simulate_trajectories(cell(), 200, seed=7, atom_offset=200)
        merged_fraction = 0.5 * (lo.in_beam_fraction + hi.in_beam_fraction)
        assert merged_fraction == pytest.approx(full.in_beam_fraction, rel=1e-12)


class TestStatistics:
    def test_in_beam_fraction_matches_geometry(self):
        # centered axial beam: time fraction = beam area / cell cross-section
        stats = mc.simulate_trajectories(cell(), 20000, seed=11)
        geometric = (0.5 * 4.5e-3 / 0.0125) ** 2
        assert abs(stats.in_beam_fraction - geometric) <= 3.0 * stats.in_beam_fraction_se

    def test_mean_in_beam_time_matches_chord_oracle(self):
        # brute-force mean chord (pi/4) d over the mean transverse speed
        stats = mc.simulate_trajectories(cell(), 8000, seed=13)
        sigma = atomkit.thermal_speed(48.0, RB87) / np.sqrt(2.0)
        mean_vt = sigma * np.sqrt(np.pi / 2.0)
        oracle = (np.pi / 4.0) * 4.5e-3 / mean_vt
        assert stats.mean_in_beam_time == pytest.approx(oracle, rel=0.10)

    def test_histogram_mass_one(self):
        stats = mc.simulate_trajectories(cell(), 2000, seed=3)
        assert stats.bounce_count_histogram.sum() == pytest.approx(1.0, abs=1e-12)

    def test_dark_time_mean_invariant_under_doubling(self):
        a = mc.simulate_trajectories(cell(), 4000, seed=19)
        b = mc.simulate_trajectories(cell(), 8000, seed=19)
        # 3 sigma of the dark-interval mean, conservatively estimated from
        # the dark-time scale over the completed-interval count
        n_a = a.duration / max(a.mean_dark_time, 1e-9) * 4000
        spread = 3.0 * a.mean_dark_time / np.sqrt(n_a)
        assert abs(a.mean_dark_time - b.mean_dark_time) < max(spread, 0.1 * a.mean_dark_time)

    def test_needs_at_least_one_atom(self):
        with pytest.raises(ValidationError):
            mc.simulate_trajectories(cell(), 0, seed=1)


class TestCoherentReturn:
    def test_high_quality_coating_returns_coherent(self):
        frac = mc.coherent_return_fraction(cell(), 1500, seed=23, coherence_time=20e-3)
        assert 0.7 < frac <= 1.0

    def test_dead_coating_returns_nothing(self):
        dead = CellConfig(
            cell_radius=0.0125, cell_length=0.075, temperature_C=48.0,
            beam=BeamConfig(diameter=4.5e-3, total_intensity=3.5),
            wall_coherence_survival=0.0,
        )
        frac = mc.coherent_return_fraction(dead, 1500, seed=23, coherence_time=20e-3)
        assert frac < 0.3
