"""Asymptotic principal values of singular integrals with higher-order poles."""
from .core import (
    ApvResult,
    IntegrandSpec,
    PoleProblem,
    make_analytic_integrand,
    make_fd_integrand,
    make_polynomial_integrand,
)
from .quadrature import QuadResult, apv_direct, apv_rho_curve, integrate

__all__ = [
    "ApvResult",
    "IntegrandSpec",
    "PoleProblem",
    "QuadResult",
    "apv_direct",
    "apv_rho_curve",
    "integrate",
    "make_analytic_integrand",
    "make_fd_integrand",
    "make_polynomial_integrand",
]
