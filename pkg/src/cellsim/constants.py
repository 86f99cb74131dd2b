"""Physical and model constants, loaded from the packaged constants table.

The table lives in ``data/constants.json`` with explicit units on every
entry; this module flattens it into plain floats for the rest of the
package. Nothing here is configurable at runtime: model constants are
calibrated once and frozen (see the notes inside the JSON file).
"""

import json
from importlib import resources

_TABLE = json.loads(
    resources.files("cellsim").joinpath("data/constants.json").read_text()
)


def _v(*path):
    node = _TABLE
    for key in path:
        node = node[key]
    return node["value"] if isinstance(node, dict) and "value" in node else node


# Fundamental constants (SI)
KB = _v("fundamental", "boltzmann_kB")
HBAR = _v("fundamental", "hbar")
H_PLANCK = _v("fundamental", "planck_h")
EPS0 = _v("fundamental", "epsilon0")
C_LIGHT = _v("fundamental", "speed_of_light_c")
MU_B = _v("fundamental", "bohr_magneton_muB")
AMU = _v("fundamental", "atomic_mass_unit_u")

# Rubidium D1 data
D1_WAVELENGTH = _v("rubidium", "d1_wavelength")          # m
D1_DECAY_RATE = _v("rubidium", "d1_decay_rate")          # rad/s
D1_DIPOLE = _v("rubidium", "d1_effective_dipole")        # C m
SPIN_EXCHANGE_CROSS_SECTION = _v("rubidium", "spin_exchange_cross_section")  # m^2
ISOTOPES = _TABLE["rubidium"]["isotopes"]

# Vapor pressure formula coefficients
VP_SOLID_A = _v("vapor_pressure", "solid_a")
VP_SOLID_B = _v("vapor_pressure", "solid_b")
VP_LIQUID_C = _v("vapor_pressure", "liquid_c")
VP_LIQUID_D = _v("vapor_pressure", "liquid_d")
VP_LIQUID_E = _v("vapor_pressure", "liquid_e")
VP_MELTING_POINT = _v("vapor_pressure", "melting_point")  # K
VP_RESCALE = _v("vapor_pressure", "density_rescale")
ATM_TO_PA = _v("vapor_pressure", "atm_to_pa")

# Coated-cell model constants (calibrated once, frozen)
PUMP_EFFICIENCY = _v("coated_cell_model", "pump_efficiency")
BOUNCE_FRACTION = _v("coated_cell_model", "bounce_fraction")
BOUNCE_GEOMETRIC_Q = _v("coated_cell_model", "bounce_return_geometric_q")
REFERENCE_WALL_SURVIVAL = _v("coated_cell_model", "reference_wall_survival")
TRAPPING_A = _v("coated_cell_model", "trapping_strength_A")
TRAPPING_BETA = _v("coated_cell_model", "trapping_depth_beta")
TRAPPING_MAX_ITER = int(_v("coated_cell_model", "trapping_max_iter"))
TRAPPING_REL_TOL = _v("coated_cell_model", "trapping_rel_tol")
DETECTABILITY_FLOOR = _v("coated_cell_model", "detectability_floor")
HYPERFINE_RESET_RATE = _v("coated_cell_model", "hyperfine_reset_rate")
REPUMP_SAT_INTENSITY = _v("coated_cell_model", "repump_saturation_intensity")
GRADIENT_COMBINATION = _v("coated_cell_model", "gradient_combination")
