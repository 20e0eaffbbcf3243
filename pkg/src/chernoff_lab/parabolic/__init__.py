"""Second-order parabolic operators on the line and their four-point Chernoff scheme."""

from .grid import KAPPA, GridFunction, cubic_interpolate, derivative_on_grid, fornberg_weights, grid_from_function
from .operator import (
    DerivativeConstantTable,
    LandauCheck,
    OperatorPowerExpansion,
    ParabolicBound,
    ParabolicCoefficients,
    apply_A,
    coefficients_from_spec,
    derive_derivative_constants,
    expand_power,
    highest_derivative_constants,
    landau_inequality_check,
    parabolic_bound,
    power_expr,
    power_norm_constants,
    power_norms,
)
from .oracle import OracleResult, crank_nicolson, gauss_hermite, oracle_solution
from .scheme import (
    IterationResult,
    apply_chernoff_step,
    chernoff_step_values,
    chernoff_window,
    iterate_chernoff,
    max_shift,
    one_step_defect,
    prepare_grid,
)

__all__ = [
    "apply_A",
    "apply_chernoff_step",
    "chernoff_step_values",
    "chernoff_window",
    "coefficients_from_spec",
    "crank_nicolson",
    "cubic_interpolate",
    "derivative_on_grid",
    "DerivativeConstantTable",
    "derive_derivative_constants",
    "expand_power",
    "fornberg_weights",
    "gauss_hermite",
    "grid_from_function",
    "GridFunction",
    "highest_derivative_constants",
    "iterate_chernoff",
    "IterationResult",
    "KAPPA",
    "landau_inequality_check",
    "LandauCheck",
    "max_shift",
    "one_step_defect",
    "OperatorPowerExpansion",
    "oracle_solution",
    "OracleResult",
    "parabolic_bound",
    "ParabolicBound",
    "ParabolicCoefficients",
    "power_expr",
    "power_norm_constants",
    "power_norms",
    "prepare_grid",
]
