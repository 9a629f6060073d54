"""Potential theory on infinite resistance networks.

Kernels ``v_x``, ``f_x``, ``h_x`` by exhaustion, free and wired resistance,
transience and Harm-dimension estimates, Gaussian-field and random-walk Monte
Carlo, and boundary points via paths to infinity.
"""

__version__ = "0.1.0"

from .boundary import (PathToInfinity, boundary_classes, count_boundary_points, functional_eval, model_paths,
                       path_equivalent, probe_test_set, sup_norm, validate_path)
from .errors import RNetError
from .exhaustion import BALL, FREE, INTERLEAVED, WIRED, boundary_sum, exhaustion_set, truncate
from .models import ModelSpec, build_model, closed_forms, random_network
from .network import (INFINITY, MatrixForm, Network, Potential, dirac, energy, laplacian_apply, load_network,
                      parse_network)
from .potential_theory import (charge_balance, check_harmonic, classify, gauss_green_split,
                               harmonic_boundary_repr)
from .resistance import effective_resistance, free_resistance, reduce_two_terminal, wired_resistance
from .solver import energy_kernel, fin_kernel, kernel_families, monopole, solve_grounded
from .stochastic import (escape_probability, hitting_probability, mc_boundary_integral, moment_check,
                         pair_variance, random_walk_mc, sample_field)

__all__ = [
    "BALL",
    "boundary_classes",
    "boundary_sum",
    "build_model",
    "charge_balance",
    "check_harmonic",
    "classify",
    "closed_forms",
    "count_boundary_points",
    "dirac",
    "effective_resistance",
    "energy",
    "energy_kernel",
    "escape_probability",
    "exhaustion_set",
    "fin_kernel",
    "FREE",
    "free_resistance",
    "functional_eval",
    "gauss_green_split",
    "harmonic_boundary_repr",
    "hitting_probability",
    "INFINITY",
    "INTERLEAVED",
    "kernel_families",
    "laplacian_apply",
    "load_network",
    "MatrixForm",
    "mc_boundary_integral",
    "model_paths",
    "ModelSpec",
    "moment_check",
    "monopole",
    "Network",
    "pair_variance",
    "parse_network",
    "path_equivalent",
    "PathToInfinity",
    "Potential",
    "probe_test_set",
    "random_network",
    "random_walk_mc",
    "reduce_two_terminal",
    "RNetError",
    "sample_field",
    "solve_grounded",
    "sup_norm",
    "truncate",
    "validate_path",
    "WIRED",
    "wired_resistance",
]
