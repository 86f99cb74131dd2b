"""Ballistic Monte Carlo of atoms in a cylindrical coated cell.

Atoms fly straight between wall collisions; walls reflect diffusely
(cosine law about the inward normal) and re-thermalize the speed
(flux-weighted Maxwell distribution). The axial laser beam is a column of
radius r_beam through the full cell length; in-beam intervals, dark
intervals between beam visits and wall-bounce counts per dark interval are
accumulated.

Randomness is counter-based: every variate is a pure function of
(master seed, atom index, event counter, slot) through a splitmix64-style
mixer, so results are bit-identical no matter how atoms are chunked across
workers.
"""

from __future__ import annotations

import numpy as np

from . import atomkit
from .atomkit import AtomSpecies
from .coated_cell import CellConfig, TransitStatistics
from .errors import ValidationError

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_HIST_BINS = 64


def _mix64(x):
    # uint64 arithmetic wraps by design
    with np.errstate(over="ignore"):
        x = (x + _GOLDEN).astype(np.uint64)
        x = (x ^ (x >> np.uint64(30))) * _MIX1
        x = (x ^ (x >> np.uint64(27))) * _MIX2
        return x ^ (x >> np.uint64(31))


def _uniform(seed: int, atom: np.ndarray, event: np.ndarray, slot: int) -> np.ndarray:
    """Deterministic U(0,1) stream indexed by (seed, atom, event, slot)."""
    base = _mix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) * np.uint64(0x100000001B3))
    h = _mix64(atom.astype(np.uint64) ^ base)
    h = _mix64(h ^ (event.astype(np.uint64) * np.uint64(0x9E3779B1)))
    h = _mix64(h ^ np.uint64(slot * 0x85EBCA77 + 1))
    # 53-bit mantissa, strictly inside (0, 1)
    u = (h >> np.uint64(11)).astype(np.float64) * (2.0**-53)
    return np.clip(u, 1e-16, 1.0 - 1e-16)


def _normals(u1, u2):
    r = np.sqrt(-2.0 * np.log(u1))
    return r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)


def _flux_maxwell_speed(sigma, u1, u2):
    # speed pdf ~ s^3 exp(-s^2 / 2 sigma^2): s = sigma sqrt(2 Gamma(2))
    return sigma * np.sqrt(2.0 * (-np.log(u1) - np.log(u2)))


def simulate_trajectories(
    cell: CellConfig,
    n_atoms: int,
    seed: int,
    species: AtomSpecies | None = None,
    duration: float | None = None,
    atom_offset: int = 0,
) -> TransitStatistics:
    """Trace ``n_atoms`` ballistic atoms for ``duration`` seconds (default:
    40 cell-diameter crossing times) and summarize beam-transit statistics.

    Deterministic for identical (cell, n_atoms, seed): per-atom substreams
    are functions of the master seed and the global atom index only, so a
    run split into chunks (via ``atom_offset``) reproduces the same
    trajectories no matter how many workers process them.
    """
    if n_atoms < 1:
        raise ValidationError("n_atoms must be >= 1", fields=["n_atoms"])
    species = species or atomkit.RB87
    sigma_v = np.sqrt(
        atomkit.thermal_speed(cell.temperature_C, species) ** 2 / 2.0
    )  # 1-d velocity std, = sqrt(kB T / m)
    r_cell = cell.cell_radius
    l_cell = cell.cell_length
    r_beam = 0.5 * cell.beam.diameter
    if duration is None:
        duration = 40.0 * (2.0 * r_cell) / (sigma_v * np.sqrt(np.pi / 2.0))

    atoms = np.arange(atom_offset, atom_offset + n_atoms, dtype=np.uint64)
    event = np.zeros(n_atoms, dtype=np.uint64)

    # initial condition: uniform in the cylinder, Maxwell velocities
    u = [_uniform(seed, atoms, event, s) for s in range(8)]
    radius = r_cell * np.sqrt(u[0])
    theta = 2.0 * np.pi * u[1]
    x = radius * np.cos(theta)
    y = radius * np.sin(theta)
    z = l_cell * u[2]
    vx, vy = _normals(u[3], u[4])
    vz, _ = _normals(u[5], u[6])
    vx, vy, vz = sigma_v * vx, sigma_v * vy, sigma_v * vz
    event += np.uint64(1)

    t_used = np.zeros(n_atoms)
    in_beam = x**2 + y**2 <= r_beam**2
    visit_start = np.where(in_beam, 0.0, np.nan)
    last_exit = np.full(n_atoms, np.nan)
    bounces = np.zeros(n_atoms, dtype=np.int64)

    beam_time = np.zeros(n_atoms)
    visit_sum = np.zeros(n_atoms)
    visit_count = np.zeros(n_atoms, dtype=np.int64)
    dark_sum = np.zeros(n_atoms)
    dark_count = np.zeros(n_atoms, dtype=np.int64)
    hist = np.zeros(_HIST_BINS, dtype=np.float64)

    active = np.ones(n_atoms, dtype=bool)
    tiny = 1e-15
    while active.any():
        # next wall hit: side wall quadratic, then end caps
        a = vx**2 + vy**2
        b = 2.0 * (x * vx + y * vy)
        c = x**2 + y**2 - r_cell**2
        disc = np.maximum(b**2 - 4.0 * a * c, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            t_side = np.where(a > 0, (-b + np.sqrt(disc)) / (2.0 * a), np.inf)
        t_side = np.where(t_side > tiny, t_side, np.inf)
        with np.errstate(divide="ignore", invalid="ignore"):
            t_cap = np.where(
                vz > 0, (l_cell - z) / vz, np.where(vz < 0, -z / vz, np.inf)
            )
        t_cap = np.where(t_cap > tiny, t_cap, np.inf)
        t_hit = np.minimum(t_side, t_cap)
        t_left = duration - t_used
        t_seg = np.minimum(t_hit, t_left)
        hit_wall = active & (t_hit <= t_left)

        # beam-column crossing within this segment: one interval at most
        cb = x**2 + y**2 - r_beam**2
        discb = b**2 - 4.0 * a * cb
        crosses = active & (discb > 0.0) & (a > 0.0)
        sq = np.sqrt(np.where(crosses, discb, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = np.where(crosses, (-b - sq) / (2.0 * a), np.inf)
            t2 = np.where(crosses, (-b + sq) / (2.0 * a), -np.inf)
        t_in = np.clip(t1, 0.0, None)
        t_out = np.minimum(t2, t_seg)
        has_interval = active & (t_out > t_in) & (t_in < t_seg)
        # axial atoms already inside the column stay inside the whole segment
        axial_inside = active & ~crosses & (cb <= 0.0)
        t_in = np.where(axial_inside, 0.0, t_in)
        t_out = np.where(axial_inside, t_seg, t_out)
        has_interval |= axial_inside

        entering = has_interval & ~in_beam
        had_dark = entering & ~np.isnan(last_exit)
        dark_len = t_used + t_in - last_exit
        dark_sum[had_dark] += dark_len[had_dark]
        dark_count[had_dark] += 1
        if had_dark.any():
            binned = np.clip(bounces[had_dark], 0, _HIST_BINS - 1)
            hist += np.bincount(binned, minlength=_HIST_BINS)
        visit_start = np.where(entering, t_used + t_in, visit_start)
        bounces[entering] = 0
        in_beam = in_beam | entering

        leaving = has_interval & in_beam & (t_out < t_seg)
        # in-beam duration this segment: from entry (or segment start) to exit
        seg_start = np.where(entering, t_in, 0.0)
        beam_gain = np.where(has_interval & in_beam, t_out - seg_start, 0.0)
        beam_time += np.where(beam_gain > 0, beam_gain, 0.0)
        visit_len = t_used + t_out - visit_start
        done_visit = leaving & ~np.isnan(visit_start)
        visit_sum[done_visit] += visit_len[done_visit]
        visit_count[done_visit] += 1
        last_exit = np.where(leaving, t_used + t_out, last_exit)
        in_beam = in_beam & ~leaving

        # advance and reflect
        x = x + vx * t_seg
        y = y + vy * t_seg
        z = z + vz * t_seg
        t_used = t_used + np.where(active, t_seg, 0.0)

        if hit_wall.any():
            side = hit_wall & (t_side <= t_cap)
            cap = hit_wall & ~side
            bounces[hit_wall & ~in_beam] += 1

            u1 = _uniform(seed, atoms, event, 0)
            u2 = _uniform(seed, atoms, event, 1)
            u3 = _uniform(seed, atoms, event, 2)
            u4 = _uniform(seed, atoms, event, 3)
            event = event + hit_wall.astype(np.uint64)

            speed = _flux_maxwell_speed(sigma_v, u1, u2)
            cos_n = np.sqrt(u3)          # cosine-law polar angle about the normal
            sin_n = np.sqrt(1.0 - u3)
            phi = 2.0 * np.pi * u4

            # side wall: inward normal (-x, -y, 0)/r; tangents z-hat and n x z
            if side.any():
                rho = np.sqrt(x**2 + y**2)
                rho = np.where(rho > 0, rho, 1.0)
                nx, ny = -x / rho, -y / rho
                # clamp radius to the wall to kill rounding drift
                x = np.where(side, -nx * r_cell, x)
                y = np.where(side, -ny * r_cell, y)
                txx, txy, txz = 0.0 * nx, 0.0 * ny, np.ones_like(nx)
                tyx, tyy = -ny, nx  # n x z-hat
                dx = cos_n * nx + sin_n * (np.cos(phi) * txx + np.sin(phi) * tyx)
                dy = cos_n * ny + sin_n * (np.cos(phi) * txy + np.sin(phi) * tyy)
                dz = sin_n * np.cos(phi) * txz
                vx = np.where(side, speed * dx, vx)
                vy = np.where(side, speed * dy, vy)
                vz = np.where(side, speed * dz, vz)
            if cap.any():
                at_top = cap & (vz > 0)
                sign = np.where(at_top, -1.0, 1.0)  # inward normal along z
                z = np.where(cap, np.where(at_top, l_cell, 0.0), z)
                vx = np.where(cap, speed * sin_n * np.cos(phi), vx)
                vy = np.where(cap, speed * sin_n * np.sin(phi), vy)
                vz = np.where(cap, speed * cos_n * sign, vz)

        active = t_used < duration * (1.0 - 1e-12)

    total_beam = beam_time.sum()
    n_visits = int(visit_count.sum())
    n_darks = int(dark_count.sum())
    if n_visits == 0 or n_darks == 0:
        raise ValidationError(
            "no completed beam visits; enlarge duration or the beam",
            fields=["duration"],
        )
    fractions = beam_time / duration
    hist_total = hist.sum()
    return TransitStatistics(
        mean_in_beam_time=float(visit_sum.sum() / n_visits),
        mean_dark_time=float(dark_sum.sum() / n_darks),
        bounce_count_histogram=hist / hist_total,
        in_beam_fraction=float(total_beam / (duration * n_atoms)),
        seed=int(seed),
        n_atoms=int(n_atoms),
        duration=float(duration),
        in_beam_fraction_se=float(fractions.std(ddof=1) / np.sqrt(n_atoms))
        if n_atoms > 1 else 0.0,
    )


def coherent_return_fraction(
    cell: CellConfig,
    n_atoms: int,
    seed: int,
    coherence_time: float,
    species: AtomSpecies | None = None,
) -> float:
    """Probability-weighted fraction of beam revisits arriving with coherence.

    Weights each completed dark interval by p_w^bounces * exp(-t_dark /
    coherence_time); used once to calibrate the frozen bounce_fraction
    constant.
    """
    stats = simulate_trajectories(cell, n_atoms, seed, species=species)
    hist = stats.bounce_count_histogram
    p_w = cell.wall_coherence_survival
    survival_bounce = float(sum(p_w**k * hist[k] for k in range(hist.size)))
    survival_dark = float(np.exp(-stats.mean_dark_time / coherence_time))
    return survival_bounce * survival_dark
