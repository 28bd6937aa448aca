"""Three regularizations of a singular integral and comparisons between them."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .asymptotics import RhoSamples, fit_asymptotic, order_estimate, richardson_limit
from .core import ApvResult, PoleProblem, check_rho, make_polynomial_integrand
from .errors import ApvError, InsufficientData, InvalidArgument, OrderTooLow
from .quadrature import apv_direct, integrate
from .reduction import mild_part, singular_terms


class RegMethod(enum.Enum):
    APV = "apv"
    MILD_PART = "mild"
    COMPLEX_KERNEL = "kernel"


def _kernel_mesh(a, b, c, rho):
    pts = [c]
    d = rho
    while d < max(c - a, b - c):
        pts += [c - d, c + d]
        d *= 2
    return [x for x in pts if a < x < b]


KERNEL_FORMS = ("real_part", "power")


def _real_part_kernel(t, rho, n):
    """``Re (t + i rho)**-n`` in real arithmetic: ``Re (t - i rho)**n / (t**2 + rho**2)**n``."""
    num = 0.0
    for j in range(0, n + 1, 2):
        num = num + (-1) ** (j // 2) * math.comb(n, j) * t ** (n - j) * rho**j
    return num / (t * t + rho * rho) ** n


def kernel_integral(p: PoleProblem, rho: float, tol: float = 1e-10, form: str = "real_part") -> ApvResult:
    """Integral of ``f`` against a smoothed pole kernel over the whole of ``[a, b]``.

    ``form="real_part"`` uses ``Re 1/((x-c) + i rho)**n``; ``form="power"`` uses
    ``((x-c)/((x-c)**2 + rho**2))**n``. They agree for ``n == 1``. Only the
    first tends to the mild part as rho -> 0 when ``n >= 2``; the second
    still diverges like ``rho**-(n-1)``.
    """
    rho = float(rho)
    if not rho > 0:
        raise InvalidArgument("cutoff must be positive")
    if form not in KERNEL_FORMS:
        raise InvalidArgument(f"unknown kernel form {form!r}")
    f, c, n = p.f, p.c, p.n

    if form == "power":
        def g(x):
            t = x - c
            return f(x) * (t / (t * t + rho * rho)) ** n
    else:
        def g(x):
            return f(x) * _real_part_kernel(x - c, rho, n)

    r = integrate(g, p.a, p.b, tol, breakpoints=_kernel_mesh(p.a, p.b, c, rho))
    return ApvResult(r.value, r.abs_error_estimate, rho, r.evaluations)


def regularize(p: PoleProblem, method: RegMethod | str, rho: float, tol: float = 1e-10) -> ApvResult:
    """Value of the singular integral under ``method`` at the finite cutoff ``rho``.

    No rho -> 0 limit is taken for any method.
    """
    method = RegMethod(method)
    if method is RegMethod.APV:
        return apv_direct(p, rho, tol)
    if method is RegMethod.MILD_PART:
        check_rho(p, rho)
        return mild_part(p, rho, tol)
    return kernel_integral(p, rho, tol)


@dataclass(frozen=True)
class DiracReport:
    rhos: tuple[float, ...]
    kernel_values: tuple[float, ...]
    apv_limit: float
    differences: tuple[float, ...]

    @property
    def monotone_decay(self) -> bool:
        d = np.abs(self.differences)
        return bool(np.all(np.diff(d) < 0))


def principal_value(p: PoleProblem, rho0: float | None = None, tol: float = 1e-12) -> float:
    """Cauchy principal value of a simple pole by Richardson extrapolation of the APV.

    For smooth f the APV differs from its limit by odd powers of rho only,
    so three cutoffs ``rho0, rho0/2, rho0/4`` remove the rho and rho**3 terms.
    """
    if p.n != 1:
        raise InvalidArgument("principal value extrapolation needs a simple pole")
    rho0 = min(1e-2, p.max_rho / 2) if rho0 is None else rho0
    rhos = [rho0, rho0 / 2, rho0 / 4]
    return richardson_limit(rhos, [apv_direct(p, r, tol).value for r in rhos], (1, 3))


def dirac_formula_check(p: PoleProblem, rhos: Sequence[float], tol: float = 1e-12) -> DiracReport:
    """Distance between the smoothed simple-pole kernel and the principal value, per rho."""
    if p.n != 1:
        raise InvalidArgument("Dirac formula check applies to simple poles (n = 1)")
    pv = principal_value(p, tol=tol)
    kv = tuple(kernel_integral(p, r, tol).value for r in rhos)
    return DiracReport(tuple(float(r) for r in rhos), kv, pv, tuple(k - pv for k in kv))


@dataclass(frozen=True)
class ComparisonRow:
    rho: float
    value_apv: float
    value_mild: float
    value_kernel: float
    predicted_gap: float
    observed_gap: float
    gap_error_estimate: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class ComparisonReport:
    n: int
    rows: tuple[ComparisonRow, ...]
    gap_order: float | None
    gap_coefficient: float | None = None
    warnings: tuple[str, ...] = field(default=())


def compare_methods(p: PoleProblem, rhos: Sequence[float], tol: float = 1e-10) -> ComparisonReport:
    """Evaluate all three methods per rho and fit the order of APV minus mild part.

    The predicted gap is the explicit singular sum; with fewer than three
    cutoffs the rows are still computed and the order fit is skipped.
    """
    if p.n < 2:
        raise OrderTooLow("method comparison needs a pole of order >= 2")
    rows = []
    for rho in rhos:
        apv = apv_direct(p, rho, tol)
        mild = mild_part(p, rho, tol)
        kern = kernel_integral(p, rho, tol)
        predicted = math.fsum(t.contribution for t in singular_terms(p, rho))
        rows.append(ComparisonRow(
            rho=float(rho),
            value_apv=apv.value,
            value_mild=mild.value,
            value_kernel=kern.value,
            predicted_gap=predicted,
            observed_gap=apv.value - mild.value,
            gap_error_estimate=apv.abs_error_estimate + mild.abs_error_estimate,
        ))
    warnings = []
    order = coeff = None
    vanishing = all(abs(r.observed_gap) <= 10 * r.gap_error_estimate for r in rows)
    if len(rows) < 3:
        warnings.append(f"insufficient data: gap order fit needs 3 cutoffs, got {len(rows)}")
    elif vanishing:
        warnings.append("gap vanishes within error estimates at every cutoff; no order to fit")
    else:
        samples = RhoSamples.from_pairs(
            [r.rho for r in rows], [r.observed_gap for r in rows], [r.gap_error_estimate for r in rows]
        )
        try:
            order = order_estimate(samples)
        except ApvError as exc:
            warnings.append(f"gap order fit failed: {exc}")
        if order is not None and round(-order) >= 1:
            k = int(round(-order))
            try:
                coeff = fit_asymptotic(samples, k).pole(k)
            except ApvError as exc:
                warnings.append(f"gap coefficient fit skipped: {exc}")
    return ComparisonReport(p.n, tuple(rows), order, coeff, tuple(warnings))


@dataclass(frozen=True)
class ColumnTrend:
    """Raw rho-trend of one column: successive differences and a linear extrapolation."""

    successive_differences: tuple[float, ...]
    extrapolated_limit: float | None

    def as_dict(self) -> dict:
        return {
            "successive_differences": list(self.successive_differences),
            "extrapolated_limit": self.extrapolated_limit,
        }


def _trend(rhos, values) -> ColumnTrend:
    diffs = tuple(float(b - a) for a, b in zip(values, values[1:]))
    limit = None
    if len(rhos) >= 2:
        # intercept of a straight line through the two smallest cutoffs
        order = np.argsort(rhos)
        r1, r2 = np.asarray(rhos)[order[:2]]
        v1, v2 = np.asarray(values)[order[:2]]
        limit = float(v1 - r1 * (v2 - v1) / (r2 - r1))
    return ColumnTrend(diffs, limit)


@dataclass(frozen=True)
class CounterexampleReport:
    rhos: tuple[float, ...]
    apv_values: tuple[float, ...]
    kernel_values: tuple[float, ...]
    partial_integral_form_values: tuple[float, ...]
    kernel_error_estimates: tuple[float, ...]
    partial_integral_error_estimates: tuple[float, ...]
    trends: dict


def log_integral(rho: float, tol: float = 1e-13) -> tuple[float, float]:
    """``int_0^1 ln(x**2 + rho**2) dx`` by quadrature, meshed toward ``x = 0``."""
    pts = []
    d = rho
    while d < 1:
        pts.append(d)
        d *= 2
    r = integrate(lambda x: np.log(x * x + rho * rho), 0.0, 1.0, tol, breakpoints=pts)
    return r.value, r.abs_error_estimate


def counterexample_i1(rhos: Sequence[float], tol: float = 1e-12) -> CounterexampleReport:
    """``int_{-1}^{1} x * (1/x) dx`` under the APV, the smoothed kernel, and the
    partial-integrated kernel form ``ln(1 + rho**2) - int_0^1 ln(x**2 + rho**2) dx``.

    All three columns are reported as computed; no expected limit is imposed.
    """
    for r in rhos:
        if not 0 < r < 1:
            raise InvalidArgument(f"cutoffs must lie in (0, 1), got {r}")
    p = PoleProblem(-1.0, 1.0, 0.0, 1, make_polynomial_integrand([0.0, 1.0]))
    apv = [apv_direct(p, r, tol).value for r in rhos]
    kern = [kernel_integral(p, r, tol) for r in rhos]
    logs = [log_integral(r, tol) for r in rhos]
    partial = [math.log1p(r * r) - li for r, (li, _) in zip(rhos, logs)]
    kv = [k.value for k in kern]
    trends = {
        "apv": _trend(rhos, apv),
        "kernel": _trend(rhos, kv),
        "partial_integral_form": _trend(rhos, partial),
    }
    return CounterexampleReport(
        rhos=tuple(float(r) for r in rhos),
        apv_values=tuple(apv),
        kernel_values=tuple(kv),
        partial_integral_form_values=tuple(partial),
        kernel_error_estimates=tuple(k.abs_error_estimate for k in kern),
        partial_integral_error_estimates=tuple(e for _, e in logs),
        trends=trends,
    )
