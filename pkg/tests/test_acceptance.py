"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
summary lines. Tolerances are fixed here and match the stated targets; the
runtime budgets are asserted alongside the physics.
"""

import time

import numpy as np
import pytest

from cellsim import csvio, fitlab, scenario
from cellsim import lambda_solver as ls
from cellsim import pulsewave as pw
from cellsim.coated_cell import build_medium as build_cc_medium
from cellsim.errors import CellsimError
from cellsim.presets import PRESET_NAMES, get_preset

FLOOR = 1e-2


def _report(number: int, name: str, ok: bool, details: str) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {number} ({name}): {status} [{details}]")


def _run_preset(name, tmp_path, **kw):
    t0 = time.perf_counter()
    manifest = scenario.run_scenario(get_preset(name), tmp_path / name, **kw)
    return manifest, time.perf_counter() - t0


def _fit_params(tmp_path, name):
    text = (tmp_path / name / "fit.txt").read_text()
    return dict(line.split("=", 1) for line in text.strip().splitlines())


class TestCriterion1Calibration:
    def test_fig2a_dr_22hz(self, tmp_path):
        _, elapsed = _run_preset("fig2a-dr", tmp_path)
        fwhm = float(_fit_params(tmp_path, "fig2a-dr")["fwhm"])
        ok = abs(fwhm - 22.0) <= 0.05 * 22.0 and elapsed < 5.0
        _report(1, "fig2a-dr", ok, f"fitted FWHM {fwhm:.3f} Hz "
                                   f"(target 22 +- 5%), {elapsed:.2f} s")
        assert abs(fwhm - 22.0) <= 0.05 * 22.0
        assert elapsed < 5.0

    def test_fig2b_eit_50hz(self, tmp_path):
        _, elapsed = _run_preset("fig2b-eit", tmp_path)
        fwhm = float(_fit_params(tmp_path, "fig2b-eit")["fwhm"])
        ok = abs(fwhm - 50.0) <= 0.05 * 50.0 and elapsed < 5.0
        _report(1, "fig2b-eit", ok, f"fitted FWHM {fwhm:.3f} Hz "
                                    f"(target 50 +- 5%), {elapsed:.2f} s")
        assert abs(fwhm - 50.0) <= 0.05 * 50.0
        assert elapsed < 5.0


class TestCriterion2DualStructure:
    def test_fig3_dual_widths(self, tmp_path):
        _, elapsed = _run_preset("fig3-dual", tmp_path)
        params = _fit_params(tmp_path, "fig3-dual")
        broad = float(params["broad_fwhm"])
        narrow = float(params["narrow_fwhm"])
        ok = (6.5e3 <= broad <= 19.5e3 and 175.0 <= narrow <= 525.0
              and elapsed < 10.0)
        _report(2, "fig3-dual", ok,
                f"pedestal {broad:.0f} Hz in [6500, 19500], "
                f"narrow {narrow:.1f} Hz in [175, 525], {elapsed:.2f} s")
        assert 6.5e3 <= broad <= 19.5e3
        assert 175.0 <= narrow <= 525.0
        assert elapsed < 10.0


def _local_max_in(widths, values, lo, hi):
    for i in range(1, len(widths) - 1):
        if np.isnan(values[i]):
            continue
        left = values[i - 1] if not np.isnan(values[i - 1]) else -np.inf
        right = values[i + 1] if not np.isnan(values[i + 1]) else -np.inf
        if lo <= widths[i] <= hi and values[i] >= left and values[i] >= right:
            return True
    return False


def _delay_curves(rows):
    curves = {}
    for row in rows:
        key = row["intensity_mW_cm2"]
        delay = row["fractional_delay"] if not row["error"] else float("nan")
        curves.setdefault(key, []).append((row["pulse_fwhm_s"], delay))
    out = {}
    for key, pts in curves.items():
        pts.sort()
        out[key] = (np.array([p[0] for p in pts]), np.array([p[1] for p in pts]))
    return out


class TestCriterion3TwoRegimes:
    def test_fig4_delay_regimes(self, tmp_path):
        _, elapsed = _run_preset("fig4-delay", tmp_path)
        rows = csvio.table_from_csv(
            (tmp_path / "fig4-delay" / "delay_sweep.csv").read_text())
        curves = _delay_curves(rows)
        low_i, high_i = min(curves), max(curves)
        w_hi, v_hi = curves[high_i]
        w_lo, v_lo = curves[low_i]
        hi_ok = _local_max_in(w_hi, v_hi, 3e-6, 30e-6)
        lo_ok = _local_max_in(w_lo, v_lo, 1e-3, 20e-3)
        ok = hi_ok and lo_ok and elapsed < 120.0
        _report(3, "fig4-delay", ok,
                f"high-intensity max in [3, 30] us: {hi_ok}, "
                f"low-intensity max in [1, 20] ms: {lo_ok}, {elapsed:.2f} s")
        assert hi_ok and lo_ok
        assert elapsed < 120.0


def _max_delay_over_grid(trapping: bool) -> float:
    """Max detectable fractional delay over the fig4 sweep and the fig6 grid."""
    best = 0.0
    fig4 = get_preset("fig4-delay")
    fig4["trapping"] = {"enabled": trapping}
    for row in scenario.run_sweep(scenario.resolve_config(fig4)):
        if not row["error"] and not np.isnan(row["fractional_delay"]):
            best = max(best, row["fractional_delay"])

    fig6 = scenario.resolve_config(get_preset("fig6-vg"))
    axes = fig6["sweep"]["axes"]
    for t_c in axes["temperature_C"]:
        for intensity in axes["intensity_mW_cm2"]:
            cfg = dict(fig6)
            probe = {
                "pipeline": "delay_sweep",
                "trapping": {"enabled": trapping},
                "cell": {
                    **fig6["cell"],
                    "temperature_C": t_c,
                    "beam": {**fig6["cell"]["beam"],
                             "total_intensity_mW_cm2": intensity},
                },
            }
            cfg.update(probe)
            resolved = scenario.resolve_config(cfg)
            medium = scenario.build_medium(resolved)
            w_b = medium.gamma_bounce + 0.25 * (
                medium.ensembles[1].omega_c**2 / medium.ensembles[1].gamma_optical)
            w_t = medium.gamma_transit + 0.25 * (
                medium.ensembles[0].omega_c**2 / medium.ensembles[0].gamma_optical)
            widths = [f / w for w in (w_b, w_t) for f in (1.5, 3.0, 8.0)]
            for width in widths:
                if not 1e-6 <= width <= 2e-2:
                    continue
                try:
                    pulse = pw.gaussian_pulse(width)
                    res = pw.propagate(pulse, pw.medium_transfer(medium),
                                       medium=medium)
                except CellsimError:
                    continue
                if res.energy_transmission >= FLOOR:
                    best = max(best, res.fractional_delay)
    return best


class TestCriterion4DelayCeiling:
    def test_ceiling_and_trapping_attribution(self):
        t0 = time.perf_counter()
        max_trapped = _max_delay_over_grid(trapping=True)
        max_untrapped = _max_delay_over_grid(trapping=False)
        elapsed = time.perf_counter() - t0
        ceiling_ok = max_trapped <= 0.35
        attribution_ok = max_untrapped >= 1.2 * max_trapped
        ok = ceiling_ok and attribution_ok and elapsed < 300.0
        _report(4, "delay-ceiling", ok,
                f"max trapped {max_trapped:.3f} <= 0.35, untrapped "
                f"{max_untrapped:.3f} >= 1.2x trapped, {elapsed:.1f} s")
        assert ceiling_ok, f"trapped ceiling violated: {max_trapped:.3f}"
        assert attribution_ok, (
            f"untrapped max {max_untrapped:.3f} below 1.2 x {max_trapped:.3f}")
        assert elapsed < 300.0


class TestCriterion5GroupVelocity:
    def test_fig6_vg_scaling(self, tmp_path):
        _, elapsed = _run_preset("fig6-vg", tmp_path)
        rows = csvio.table_from_csv(
            (tmp_path / "fig6-vg" / "vg_curve.csv").read_text())
        temps = sorted({row["temperature_C"] for row in rows})
        coldest, hottest = temps[0], temps[-1]

        def curve(t_c):
            pts = [(r["intensity_mW_cm2"], r["v_g_m_s"], r["energy_transmission"])
                   for r in rows if r["temperature_C"] == t_c and not r["error"]]
            pts.sort()
            return (np.array([p[0] for p in pts]), np.array([p[1] for p in pts]),
                    np.array([p[2] for p in pts]))

        x, v_cold, _ = curve(coldest)
        design = np.vstack([x, np.ones_like(x)]).T
        _, res, *_ = np.linalg.lstsq(design, v_cold, rcond=None)
        ss_tot = ((v_cold - v_cold.mean()) ** 2).sum()
        r_squared = float(1.0 - res[0] / ss_tot)

        xh, v_hot, t_hot = curve(hottest)
        i_min = int(np.argmin(v_hot))
        non_monotone = 0 < i_min and v_hot[0] > v_hot[i_min] < v_hot[-1]
        upturn_transmission = float(t_hot[max(i_min - 1, 0)])

        ok = (r_squared >= 0.99 and non_monotone
              and upturn_transmission < 0.5 and elapsed < 120.0)
        _report(5, "fig6-vg", ok,
                f"R^2(lowest T)={r_squared:.4f} >= 0.99, non-monotone at "
                f"highest T: {non_monotone}, upturn transmission "
                f"{upturn_transmission:.2e} < 0.5, {elapsed:.2f} s")
        assert r_squared >= 0.99
        assert non_monotone
        assert upturn_transmission < 0.5
        assert elapsed < 120.0


class TestCriterion6Repumper:
    def test_fig5_repump_boosts(self, tmp_path):
        _, elapsed = _run_preset("fig5-repump", tmp_path)
        rows = csvio.table_from_csv(
            (tmp_path / "fig5-repump" / "repump_sweep.csv").read_text())
        temps = sorted({row["temperature_C"] for row in rows})
        low_t, high_t = temps[0], temps[-1]

        def best_boost(t_c):
            boosts = [row["boost_factor"] for row in rows
                      if row["temperature_C"] == t_c and not row["error"]
                      and not np.isnan(row["boost_factor"])]
            return max(boosts) if boosts else float("nan")

        boost_low = best_boost(low_t)
        boost_high = best_boost(high_t)
        ok = (1.4 <= boost_low <= 2.2 and boost_high < boost_low
              and elapsed < 60.0)
        _report(6, "fig5-repump", ok,
                f"low-density boost {boost_low:.3f} in [1.4, 2.2], "
                f"high-density boost {boost_high:.3f} strictly smaller, "
                f"{elapsed:.2f} s")
        assert 1.4 <= boost_low <= 2.2
        assert boost_high < boost_low
        assert elapsed < 60.0


class TestCriterion7OracleSuites:
    def test_oracle_suites(self):
        t0 = time.perf_counter()

        # (a) steady-state formula vs Bloch integration, 10 random sets
        rng = np.random.default_rng(42)
        worst = 0.0
        for _ in range(10):
            omega_c = 10 ** rng.uniform(4.5, 7.0)
            g12 = 10 ** rng.uniform(1.0, 4.0)
            gamma = 10 ** rng.uniform(6.5, 8.0)
            dop = 10 ** rng.uniform(0.0, 9.0) if rng.random() > 0.3 else 0.0
            p_tmp = ls.LambdaParams(omega_c=omega_c, omega_p=1e-4 * omega_c,
                                    gamma_excited=gamma, gamma_ground=g12,
                                    doppler_width=dop)
            window = g12 + 0.25 * omega_c**2 / p_tmp.gamma_optical
            p = ls.LambdaParams(
                omega_c=omega_c, omega_p=1e-4 * omega_c, gamma_excited=gamma,
                gamma_ground=g12, doppler_width=dop,
                one_photon_detuning=rng.uniform(-1, 1) * gamma,
                two_photon_detuning=rng.uniform(-3, 3) * window)
            chi_f = ls.steady_state_susceptibility(p)
            chi_b = ls.bloch_susceptibility(p)
            worst = max(worst, abs(chi_f - chi_b) / abs(chi_b))
        bloch_ok = worst <= 1e-6

        # (b) Monte Carlo in-beam fraction vs geometry, n = 1e5, 3 sigma
        from cellsim.atomkit import BeamConfig
        from cellsim.coated_cell import CellConfig
        from cellsim.montecarlo import simulate_trajectories
        cell = CellConfig(cell_radius=0.0125, cell_length=0.075,
                          temperature_C=48.0,
                          beam=BeamConfig(diameter=4.5e-3, total_intensity=3.5))
        stats = simulate_trajectories(cell, 100_000, seed=2024)
        geometric = (0.5 * 4.5e-3 / 0.0125) ** 2
        z = abs(stats.in_beam_fraction - geometric) / stats.in_beam_fraction_se
        mc_ok = z <= 3.0

        # (c) transfer-function phase slope vs finite difference
        cfg = scenario.resolve_config(get_preset("fig4-delay"))
        medium = scenario.build_medium(cfg)
        slope_production = medium.group_delay()
        h = pw.medium_transfer(medium)
        d_omega = 0.05 * medium.gamma_bounce
        slope_fd = None
        for _ in range(8):
            h_lo, h_hi = h(np.array([-d_omega, d_omega]))
            new = (np.angle(h_hi) - np.angle(h_lo)) / (2.0 * d_omega)
            if slope_fd is not None and abs(new - slope_fd) < 1e-9 * abs(new):
                slope_fd = new
                break
            slope_fd = new
            d_omega *= 0.5
        slope_ok = abs(slope_production - slope_fd) <= 1e-6 * abs(slope_fd)

        # (d) fit recovery suites at their stated rates
        rng = np.random.default_rng(7)
        x = np.linspace(-100.0, 100.0, 801)
        hits = 0
        for _ in range(50):
            y = (fitlab.lorentzian(x, 0.0, 22.0, 1.0, 0.1)
                 + 0.02 * rng.standard_normal(x.size))
            fit = fitlab.fit_lorentzian((x, y))
            if fit.converged and abs(fit.params["fwhm"] - 22.0) <= 0.02 * 22.0:
                hits += 1
        xd = np.linspace(-40e3, 40e3, 4001)
        yd = (fitlab.lorentzian(xd, 0.0, 350.0, 0.1)
              + fitlab.lorentzian(xd, 0.0, 13e3, 0.1) + 0.5)
        dual = fitlab.fit_dual_lorentzian((xd, yd))
        dual_ok = (abs(dual.params["narrow_fwhm"] - 350.0) <= 0.001 * 350.0
                   and abs(dual.params["broad_fwhm"] - 13e3) <= 0.001 * 13e3)
        fits_ok = hits >= 48 and dual_ok

        elapsed = time.perf_counter() - t0
        ok = bloch_ok and mc_ok and slope_ok and fits_ok and elapsed < 180.0
        _report(7, "oracle-suites", ok,
                f"bloch worst {worst:.2e} <= 1e-6, MC z={z:.2f} <= 3, "
                f"phase-slope rel err "
                f"{abs(slope_production - slope_fd) / abs(slope_fd):.2e} <= 1e-6, "
                f"fit recovery {hits}/50 and dual +-0.1%: {dual_ok}, "
                f"{elapsed:.1f} s")
        assert bloch_ok and mc_ok and slope_ok and fits_ok
        assert elapsed < 180.0


class TestCriterion8Determinism:
    @pytest.mark.parametrize("name", PRESET_NAMES)
    def test_preset_rerun_byte_identical(self, name, tmp_path):
        a_dir = tmp_path / "a"
        b_dir = tmp_path / "b"
        first = scenario.run_scenario(get_preset(name), a_dir)
        second = scenario.run_scenario(get_preset(name), b_dir)
        identical = first["artifacts"] == second["artifacts"]
        files_match = all(
            (b_dir / f.name).read_bytes() == f.read_bytes()
            for f in sorted(a_dir.iterdir())
        )
        _report(8, f"determinism {name}", identical and files_match,
                f"{len(first['artifacts'])} artifacts byte-identical")
        assert identical and files_match
