"""Lifted linear equations for powers of second-order ODE solutions.

Given y'' = p(x) y' + q(x) y, every product f^i g^j of two solutions with
i + j = m satisfies one monic linear equation of order m+1 whose
coefficients are universal polynomials in p, q and their derivatives.
This package derives that equation exactly, checks it against bundled
reference tables, and validates it numerically along integrated
trajectories.
"""

from .diffring import (
    STYLES,
    DiffPoly,
    DiffSymbol,
    MissingSymbolError,
    Monomial,
    P,
    PolyParseError,
    Q,
    format_poly,
    parse_poly,
    poly_terms_doc,
)
from .exprparse import (
    Expr,
    ExprDomainError,
    ExprSyntaxError,
    diff_expr,
    eval_expr,
    format_expr,
    parse_expr,
)
from .lifting import (
    FIXTURE_ORDERS,
    CoefficientCheck,
    FixtureFormatError,
    FixtureReport,
    LiftedODE,
    ModuleVector,
    basis_step,
    check_against_fixture,
    derivative_tower,
    derive_lifted_ode,
    falling_factorial,
    load_fixture,
)
from .verify import (
    BasisReport,
    ConfigError,
    MonomialResidual,
    NumericConfig,
    Trajectory,
    basis_check,
    integrate_base,
    monomial_derivative_values,
    monomial_label,
    power_derivative_values,
    residual,
    symbol_values,
)

__version__ = "0.1.0"

__all__ = [
    "BasisReport",
    "CoefficientCheck",
    "ConfigError",
    "DiffPoly",
    "DiffSymbol",
    "Expr",
    "ExprDomainError",
    "ExprSyntaxError",
    "FIXTURE_ORDERS",
    "FixtureFormatError",
    "FixtureReport",
    "LiftedODE",
    "MissingSymbolError",
    "ModuleVector",
    "MonomialResidual",
    "Monomial",
    "NumericConfig",
    "P",
    "PolyParseError",
    "Q",
    "STYLES",
    "Trajectory",
    "basis_check",
    "basis_step",
    "check_against_fixture",
    "derivative_tower",
    "derive_lifted_ode",
    "diff_expr",
    "eval_expr",
    "falling_factorial",
    "format_expr",
    "format_poly",
    "integrate_base",
    "load_fixture",
    "monomial_derivative_values",
    "monomial_label",
    "parse_expr",
    "parse_poly",
    "poly_terms_doc",
    "power_derivative_values",
    "residual",
    "symbol_values",
]
