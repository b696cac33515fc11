"""Symbolic-numeric toolkit for a coupled Painleve-type system with
affine Weyl group symmetry of type D3(2).

The package encodes a five-dimensional polynomial flow together with its
birational symmetries, holomorphy charts, first integrals, Hamiltonian
reduction to dimension four and particular solutions, and certifies every
stated identity exactly over the rationals.  A floating-point integrator
confirms the same structure along trajectories.
"""

from .models import (
    load_integral,
    load_map,
    load_model,
    load_particular_solution,
)
from .numeric import dynamics_residual, integrate, invariant_drift, pushforward
from .ring import (
    Derivation,
    Poly,
    RatExpr,
    SymbolTable,
    differentiate,
    evaluate,
    exact_polynomial_quotient,
    is_identically_zero,
    jacobian_determinant,
    ring_ops,
    substitute,
)
from .verify import first_integral_search, run_scope
from .weyl import (
    apply_word_to_point,
    calibrate_convention,
    parameter_action,
    parse_word,
    translation_shift,
    verify_group_relations,
)

__version__ = "0.1.0"

__all__ = [
    "Derivation",
    "Poly",
    "RatExpr",
    "SymbolTable",
    "apply_word_to_point",
    "calibrate_convention",
    "differentiate",
    "dynamics_residual",
    "evaluate",
    "exact_polynomial_quotient",
    "first_integral_search",
    "integrate",
    "invariant_drift",
    "is_identically_zero",
    "jacobian_determinant",
    "load_integral",
    "load_map",
    "load_model",
    "load_particular_solution",
    "parameter_action",
    "parse_word",
    "pushforward",
    "ring_ops",
    "run_scope",
    "substitute",
    "translation_shift",
    "verify_group_relations",
]
