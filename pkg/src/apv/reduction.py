"""Boundary brackets, pole-order reduction and the singular/mild split.

Notation used in docstrings: ``P(f, n)`` is the APV of ``f/(x-c)**n`` at
cutoff rho, ``{f}_n = f(c+rho) - (-1)**n f(c-rho)``.

The functions returning ``ApvResult`` carry an error estimate made of the
constituent quadrature estimates plus a round-off allowance for the
closed-form pieces, which can be large (``rho**-n``) and cancel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import EPS, ApvResult, IntegrandSpec, PoleProblem, check_rho
from .errors import InvalidArgument, OrderTooLow, StencilError
from .quadrature import apv_direct

MAX_ORDER = 12


def _cap(n):
    if n > MAX_ORDER:
        raise InvalidArgument(f"pole order {n} exceeds the supported maximum {MAX_ORDER}")


def _ratio(num: int, den: int) -> float:
    return float(Fraction(math.factorial(num), math.factorial(den)))


def bracket_term(f: IntegrandSpec, c: float, rho: float, n: int) -> float:
    """``f(c + rho) - (-1)**n * f(c - rho)``."""
    sign = -1.0 if n % 2 else 1.0
    return float(f(c + rho) - sign * f(c - rho))


def plain_boundary(f: IntegrandSpec, a: float, b: float, c: float, n: int) -> float:
    """``[f(x)/(x-c)**n]`` evaluated between ``a`` and ``b``."""
    return float(f(b) / (b - c) ** n - f(a) / (a - c) ** n)


def punctured_boundary(p: PoleProblem, rho: float) -> float:
    """The bracket of ``f/(x-c)**n`` over ``[a, c-rho]`` plus over ``[c+rho, b]``."""
    rho = check_rho(p, rho)
    f, c, n = p.f, p.c, p.n

    def g(x):
        return f(x) / (x - c) ** n

    return float((g(c - rho) - g(p.a)) + (g(p.b) - g(c + rho)))


def zeta_term(p: PoleProblem, rho: float) -> float:
    return punctured_boundary(p, rho) / p.n


def _zeta_scale(p: PoleProblem, rho: float) -> float:
    """Magnitude of the terms summed inside ``zeta_term``, for round-off bounds."""
    f, c, n = p.f, p.c, p.n
    pts = np.array([p.a, c - rho, c + rho, p.b])
    return float(np.abs(f(pts) / (pts - c) ** n).sum()) / n


def reduce_once(p: PoleProblem, rho: float, tol: float = 1e-10) -> ApvResult:
    """``P(f, n) = P(f', n-1)/(n-1) - zeta(f, n-1)``, right-hand side evaluated."""
    if p.n < 2:
        raise OrderTooLow("reduce_once needs a pole of order >= 2")
    _cap(p.n)
    m = p.n - 1
    inner = apv_direct(PoleProblem(p.a, p.b, p.c, m, p.f.deriv(1)), rho, tol)
    lower = p.with_order(m)
    z = zeta_term(lower, rho)
    value = inner.value / m - z
    err = inner.abs_error_estimate / m + 4 * EPS * (abs(inner.value) / m + _zeta_scale(lower, rho))
    return ApvResult(value, err, float(rho), inner.evaluations)


def reduce_to_simple(p: PoleProblem, rho: float, tol: float = 1e-10) -> ApvResult:
    """Express ``P(f, n)`` through the simple-pole APV of ``f^(n-1)`` and zeta terms."""
    if p.n < 2:
        raise OrderTooLow("reduce_to_simple needs a pole of order >= 2")
    _cap(p.n)
    n = p.n
    simple = apv_direct(PoleProblem(p.a, p.b, p.c, 1, p.f.deriv(n - 1)), rho, tol)
    lead = simple.value / math.factorial(n - 1)
    total = lead
    scale = abs(lead)
    for k in range(1, n):
        q = PoleProblem(p.a, p.b, p.c, n - k, p.f.deriv(k - 1))
        coeff = _ratio(n - k, n - 1)
        total -= coeff * zeta_term(q, rho)
        scale += coeff * _zeta_scale(q, rho)
    err = simple.abs_error_estimate / math.factorial(n - 1) + 4 * n * EPS * scale
    return ApvResult(total, err, float(rho), simple.evaluations)


def mild_part(p: PoleProblem, rho: float, tol: float = 1e-10) -> ApvResult:
    """Simple-pole APV of ``f^(n-1)`` minus the unpunctured boundary brackets.

    Depends on rho only through the simple-pole APV. For ``n == 1`` this is
    ``P(f, 1)`` itself.
    """
    _cap(p.n)
    n = p.n
    simple = apv_direct(PoleProblem(p.a, p.b, p.c, 1, p.f.deriv(n - 1)), rho, tol)
    lead = simple.value / math.factorial(n - 1)
    total = lead
    scale = abs(lead)
    for k in range(1, n):
        fk = p.f.deriv(k - 1)
        coeff = _ratio(n - k - 1, n - 1)
        term = coeff * plain_boundary(fk, p.a, p.b, p.c, n - k)
        total -= term
        scale += abs(term)
    err = simple.abs_error_estimate / math.factorial(n - 1) + 4 * n * EPS * scale
    return ApvResult(total, err, float(rho), simple.evaluations)


@dataclass(frozen=True)
class SingularTerm:
    """``coefficient * bracket / rho**power`` with ``bracket = {f^(k-1)}_(n-k)``."""

    k: int
    coefficient: float
    bracket: float
    power: int
    rho: float

    @property
    def contribution(self) -> float:
        return self.coefficient * self.bracket / self.rho**self.power


@dataclass(frozen=True)
class SingularDecomposition:
    mild: ApvResult
    singular_terms: tuple[SingularTerm, ...]
    rho: float

    @property
    def singular_sum(self) -> float:
        return math.fsum(t.contribution for t in self.singular_terms)

    @property
    def total(self) -> float:
        return self.mild.value + self.singular_sum

    @property
    def abs_error_estimate(self) -> float:
        scale = sum(abs(t.contribution) for t in self.singular_terms)
        return self.mild.abs_error_estimate + 4 * len(self.singular_terms) * EPS * scale


def singular_terms(p: PoleProblem, rho: float) -> tuple[SingularTerm, ...]:
    rho = check_rho(p, rho)
    n = p.n
    return tuple(
        SingularTerm(
            k=k,
            coefficient=_ratio(n - k - 1, n - 1),
            bracket=bracket_term(p.f.deriv(k - 1), p.c, rho, n - k),
            power=n - k,
            rho=rho,
        )
        for k in range(1, n)
    )


def singular_split(p: PoleProblem, rho: float, tol: float = 1e-10) -> SingularDecomposition:
    """Split ``P(f, n)`` into its mild part and the explicit ``rho**-(n-k)`` terms."""
    if p.n < 2:
        raise OrderTooLow("singular_split needs a pole of order >= 2")
    return SingularDecomposition(mild_part(p, rho, tol), singular_terms(p, rho), float(rho))


def default_dc_step(rho: float) -> float:
    return max(1e-4, rho / 50)


def _check_stencil(p: PoleProblem, rho: float, width: float):
    lo, hi = p.c - width, p.c + width
    if not (p.a < lo - rho and hi + rho < p.b):
        raise StencilError(
            f"c-stencil [{lo}, {hi}] with cutoff {rho} leaves the interval [{p.a}, {p.b}]"
        )


def c_derivative(
    p: PoleProblem,
    rho: float,
    order: int,
    tol: float = 1e-12,
    dc_step: float | None = None,
    extrapolate: bool = False,
) -> ApvResult:
    """``order``-th derivative of ``c -> P(f, n)`` at fixed rho by iterated central differences.

    Iterating the first difference with step ``h`` samples ``c + (order - 2j) h``.
    With ``extrapolate`` a second pass at ``h/2`` is combined Richardson-style
    and the error estimate gains ``|D(h/2) - D(h)| / 3``.
    """
    rho = check_rho(p, rho)
    h = default_dc_step(rho) if dc_step is None else float(dc_step)
    if not h > 0:
        raise InvalidArgument("dc_step must be positive")
    if order == 0:
        return apv_direct(p, rho, tol)
    _check_stencil(p, rho, order * h)

    def diff(step):
        value, err, evals = 0.0, 0.0, 0
        for j in range(order + 1):
            w = (-1) ** j * math.comb(order, j) / (2 * step) ** order
            r = apv_direct(p.with_pole(p.c + (order - 2 * j) * step), rho, tol)
            value += w * r.value
            err += abs(w) * (r.abs_error_estimate + 4 * EPS * abs(r.value))
            evals += r.evaluations
        return value, err, evals

    coarse, err_c, ev_c = diff(h)
    if not extrapolate:
        return ApvResult(coarse, err_c, rho, ev_c)
    fine, err_f, ev_f = diff(h / 2)
    value = (4 * fine - coarse) / 3
    err = (4 * err_f + err_c) / 3 + abs(fine - coarse) / 3
    return ApvResult(value, err, rho, ev_c + ev_f)


def mild_via_derivative(
    p: PoleProblem, rho: float, tol: float = 1e-12, dc_step: float | None = None
) -> ApvResult:
    """Mild part as the (n-1)-th c-derivative of ``P(f, 1)`` divided by ``(n-1)!``."""
    if p.n < 2:
        raise OrderTooLow("mild_via_derivative needs a pole of order >= 2")
    _cap(p.n)
    m = p.n - 1
    d = c_derivative(p.with_order(1), rho, m, tol, dc_step)
    scale = math.factorial(m)
    return ApvResult(d.value / scale, d.abs_error_estimate / scale, d.rho, d.evaluations)


@dataclass(frozen=True)
class IdentityCheck:
    residual: float
    error_estimate: float
    lhs: float
    rhs: float

    def __float__(self):
        return self.residual


def lemma2_check(
    p: PoleProblem, rho: float, tol: float = 1e-12, dc_step: float | None = None
) -> IdentityCheck:
    """Residual of ``P(f, n+1) = dP(f, n)/dc / n + {f}_n / (n rho**n)``.

    The c-derivative uses one Richardson pass; its truncation estimate is part
    of ``error_estimate``.
    """
    _cap(p.n + 1)
    n = p.n
    lhs = apv_direct(p.with_order(n + 1), rho, tol)
    d = c_derivative(p, rho, 1, tol, dc_step, extrapolate=True)
    boundary = bracket_term(p.f, p.c, rho, n) / (n * rho**n)
    rhs = d.value / n + boundary
    err = lhs.abs_error_estimate + d.abs_error_estimate / n + 4 * EPS * (abs(boundary) + abs(lhs.value))
    return IdentityCheck(abs(lhs.value - rhs), err, lhs.value, rhs)
