"""Lie point symmetries, Riemann problems and singular-shock association checks
for 2x2 systems of conservation laws in one space dimension."""

from .association import (ConvergenceReport, QuadratureSpec, RegularizedField, TestFamily, TestFunction,
                          association_sweep, build_field, default_family, symmetry_association_check,
                          transform_field, weak_residual)
from .groups import GroupAction, factorization_check, get_group, groups_for
from .jets import VectorField, prolong, total_derivative
from .mollify import ProfileSet, make_profiles, mollifier
from .riemann import (SingularShockParams, State, WaveFan, classify_system1, eigen, flux_system,
                      lax_admissible, rh_residual, singular_params_gas, singular_params_system1, solve)
from .symbolic import Alphabet, Expr, parse
from .symmetry import criterion_residual, find_symmetries, flow, product_filter, verify_generator
from .systems import PdeSystem, builtin_system, load_system

__version__ = "0.1.0"
