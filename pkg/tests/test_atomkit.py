import numpy as np
import pytest

from cellsim import atomkit
from cellsim.atomkit import RB85, RB87, BeamConfig
from cellsim.errors import ValidationError


class TestSpeciesData:
    def test_rb85_abundance_exact(self):
        assert RB85.abundance == 0.72

    def test_d1_wavelength_within_1nm_of_795(self):
        for sp in (RB85, RB87):
            assert abs(sp.d1_wavelength - 795e-9) < 1e-9

    def test_degeneracy_is_2F_plus_1(self):
        for sp in (RB85, RB87):
            for lvl in sp.ground_hyperfine:
                assert lvl.degeneracy == 2 * lvl.F + 1

    def test_unknown_species_rejected(self):
        with pytest.raises(ValidationError):
            atomkit.get_species("Cs133")


class TestVaporDensity:
    def test_anchor_36C(self):
        # calibration anchor: total natural-abundance density at 36 C
        n = atomkit.vapor_density(36.0)
        assert n == pytest.approx(3.0e10, rel=0.10)

    def test_anchor_is_exact_after_calibration(self):
        assert atomkit.vapor_density(36.0) == pytest.approx(3.0e10, rel=1e-12)

    def test_golden_70C(self):
        # frozen from a standalone evaluation of the calibrated formula
        assert atomkit.vapor_density(70.0) == pytest.approx(5.557312747094272e11, rel=1e-9)

    def test_monotone_and_continuous_on_1C_grid(self):
        temps = np.arange(-50.0, 150.0, 1.0)
        vals = np.array([atomkit.vapor_density(t) for t in temps])
        assert np.all(np.diff(vals) > 0)
        # no jump beyond the smooth per-degree slope (~21%/C at the cold end)
        ratios = vals[1:] / vals[:-1]
        assert ratios.max() < 1.25

    def test_isotope_shares_sum_to_total(self):
        total = atomkit.vapor_density(50.0)
        n85 = atomkit.vapor_density(50.0, RB85)
        n87 = atomkit.vapor_density(50.0, RB87)
        assert n85 + n87 == pytest.approx(total, rel=1e-12)
        assert n85 / total == pytest.approx(0.72)

    def test_out_of_range_temperature(self):
        with pytest.raises(ValidationError) as err:
            atomkit.vapor_density(200.0)
        assert "150" in str(err.value)
        with pytest.raises(ValidationError):
            atomkit.vapor_density(-60.0)

    def test_pure_function(self):
        assert atomkit.vapor_density(48.0) == atomkit.vapor_density(48.0)


class TestThermalSpeed:
    def test_zero_temperature_limit(self):
        assert atomkit.thermal_speed(-273.15 + 1e-6, RB87) < 0.1

    def test_derived_48C_rb87(self):
        # hand evaluation of sqrt(2 kB T / m) with m = 86.909 u
        assert atomkit.thermal_speed(48.0, RB87) == pytest.approx(247.887, rel=1e-4)

    def test_mass_ratio_symmetry(self):
        expected = np.sqrt(86.909180531 / 84.911789738)
        for t in (0.0, 25.0, 90.0):
            ratio = atomkit.thermal_speed(t, RB85) / atomkit.thermal_speed(t, RB87)
            assert ratio == pytest.approx(expected, rel=1e-12)

    def test_below_absolute_zero_rejected(self):
        with pytest.raises(ValidationError):
            atomkit.thermal_speed(-274.0, RB87)


class TestRabiFromIntensity:
    def test_zero_intensity(self):
        assert atomkit.rabi_from_intensity(0.0, RB87) == 0.0

    def test_sqrt_intensity_law(self):
        for i in (0.01, 0.5, 3.5, 40.0):
            r = atomkit.rabi_from_intensity(2.0 * i, RB87) / atomkit.rabi_from_intensity(i, RB87)
            assert r == pytest.approx(np.sqrt(2.0), rel=1e-12)

    def test_golden_3p5_mw_cm2(self):
        # frozen from a standalone evaluation with d = 2.537e-29 C m
        assert atomkit.rabi_from_intensity(3.5, RB87) == pytest.approx(3.9066869e7, rel=1e-6)

    def test_scaling_property(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            i = 10 ** rng.uniform(-3, 2)
            alpha = 10 ** rng.uniform(-2, 2)
            lhs = atomkit.rabi_from_intensity(alpha * i, RB87)
            rhs = np.sqrt(alpha) * atomkit.rabi_from_intensity(i, RB87)
            assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_negative_intensity_rejected(self):
        with pytest.raises(ValidationError):
            atomkit.rabi_from_intensity(-1.0, RB87)


class TestZeemanSplitting:
    def test_zero_field(self):
        assert atomkit.zeeman_splitting(0.0, 1.0 / 3.0, 1) == 0.0

    def test_reference_field_38mG(self):
        # gF * 1.3996 MHz/G * 0.038 G, hand-checked
        nu = atomkit.zeeman_splitting(0.038, 1.0 / 3.0, 1)
        assert nu == pytest.approx(17728.6, rel=1e-4)

    def test_linear_in_delta_m(self):
        nu1 = atomkit.zeeman_splitting(0.5, 0.5, 1)
        nu2 = atomkit.zeeman_splitting(0.5, 0.5, 2)
        assert nu2 == pytest.approx(2.0 * nu1, rel=1e-14)

    def test_unsupported_delta_m(self):
        with pytest.raises(ValidationError):
            atomkit.zeeman_splitting(0.038, 0.5, 3)


class TestBeamConfig:
    def test_probe_ratio_bound(self):
        with pytest.raises(ValidationError) as err:
            BeamConfig(diameter=2e-3, total_intensity=1.0, probe_to_control_ratio=0.2)
        assert "probe_to_control_ratio" in err.value.fields

    def test_intensity_split(self):
        beam = BeamConfig(diameter=2e-3, total_intensity=1.1, probe_to_control_ratio=0.1)
        assert beam.control_intensity == pytest.approx(1.0)
        assert beam.probe_intensity == pytest.approx(0.1)

    def test_bad_geometry(self):
        with pytest.raises(ValidationError):
            BeamConfig(diameter=0.0, total_intensity=1.0)
