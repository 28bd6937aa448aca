import math

import numpy as np
import pytest
from scipy import integrate as sp_integrate

from apv import PoleProblem, apv_direct, make_polynomial_integrand
from apv.asymptotics import richardson_limit
from apv.errors import InvalidArgument, OrderTooLow
from apv.expr import integrand
from apv.reduction import mild_part, singular_split
from apv.regularize import (
    RegMethod,
    compare_methods,
    counterexample_i1,
    dirac_formula_check,
    kernel_integral,
    log_integral,
    principal_value,
    regularize,
)

from .conftest import FAMILY

ONE = make_polynomial_integrand([1.0])
X = make_polynomial_integrand([0.0, 1.0])


def unit(n, f=ONE, c=0.0):
    return PoleProblem(-1.0, 1.0, c, n, f)


def test_regularize_apv():
    assert regularize(unit(2), RegMethod.APV, 0.1).value == pytest.approx(18, abs=1e-10)


@pytest.mark.parametrize("rho", [0.3, 0.1, 1e-3])
def test_regularize_mild_is_rho_free(rho):
    assert regularize(unit(2), RegMethod.MILD_PART, rho).value == pytest.approx(-2, abs=1e-10)


def test_regularize_kernel():
    r = regularize(unit(2), "kernel", 0.1)
    assert r.value == pytest.approx(-2 / 1.01, abs=1e-10)


def test_regularize_mild_simple_pole_is_apv():
    p = unit(1, integrand("exp(x)"), c=0.2)
    assert regularize(p, "mild", 0.05).value == pytest.approx(apv_direct(p, 0.05).value, abs=1e-12)


def test_kernel_odd_symmetry():
    assert kernel_integral(unit(1), 0.1).value == pytest.approx(0, abs=1e-13)


def test_kernel_linear_numerator():
    rho = 0.1
    expected = 2 - 2 * rho * math.atan(1 / rho)
    assert kernel_integral(unit(1, X), rho).value == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(1.70577, abs=1e-5)


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("n,c", [(2, 0.0), (3, 0.3), (4, -0.2)])
def test_kernel_matches_scipy(n, c):
    rho = 0.05
    p = unit(n, integrand("exp(x)"), c=c)
    z = lambda x: 1 / complex(x - c, rho) ** n
    oracle, _ = sp_integrate.quad(
        lambda x: math.exp(x) * z(x).real, -1, 1, points=[c], epsabs=1e-13, epsrel=1e-13, limit=500
    )
    assert kernel_integral(p, rho).value == pytest.approx(oracle, rel=1e-9)


def test_power_form_kernel_is_the_literal_prescription():
    rho = 0.1
    p = unit(2, ONE)
    oracle, _ = sp_integrate.quad(lambda x: (x / (x * x + rho * rho)) ** 2, -1, 1, points=[0], epsabs=1e-12)
    assert kernel_integral(p, rho, form="power").value == pytest.approx(oracle, rel=1e-10)
    # the squared real part grows like 1/rho instead of settling on the finite part
    big = kernel_integral(p, rho / 10, form="power").value
    assert big > 5 * oracle


def test_unknown_kernel_form():
    with pytest.raises(InvalidArgument):
        kernel_integral(unit(1), 0.1, form="imag")


def test_dirac_exp_decays():
    rep = dirac_formula_check(unit(1, integrand("exp(x)")), [0.1, 0.05, 0.025])
    assert rep.monotone_decay
    oracle, _ = sp_integrate.quad(math.exp, -1, 1, weight="cauchy", wvar=0.0)
    assert rep.apv_limit == pytest.approx(oracle, abs=1e-10)


def test_dirac_constant_vanishes():
    rep = dirac_formula_check(unit(1), [0.1, 0.05, 0.025])
    assert all(abs(k) < 1e-13 for k in rep.kernel_values)
    assert abs(rep.apv_limit) < 1e-13


def test_dirac_linear_gap():
    rhos = [0.1, 0.05, 0.025]
    rep = dirac_formula_check(unit(1, X), rhos)
    assert rep.apv_limit == pytest.approx(2, abs=1e-12)
    for r, d in zip(rhos, rep.differences):
        assert d == pytest.approx(-2 * r * math.atan(1 / r), abs=1e-12)
        assert apv_direct(unit(1, X), r).value == pytest.approx(2 - 2 * r, abs=1e-13)


def test_dirac_requires_simple_pole():
    with pytest.raises(InvalidArgument):
        dirac_formula_check(unit(2), [0.1])


def test_principal_value_matches_scipy():
    p = PoleProblem(-1.0, 2.0, 0.3, 1, integrand("sin(x)+x^2"))
    oracle, _ = sp_integrate.quad(lambda x: math.sin(x) + x * x, -1, 2, weight="cauchy", wvar=0.3)
    assert principal_value(p) == pytest.approx(oracle, abs=1e-10)


def test_compare_constant_double_pole():
    rep = compare_methods(unit(2), [0.1, 0.05, 0.025, 0.0125])
    for row in rep.rows:
        assert row.observed_gap == pytest.approx(2 / row.rho, abs=1e-9)
        assert row.predicted_gap == pytest.approx(2 / row.rho, abs=1e-12)
        assert row.value_kernel == pytest.approx(-2 / (1 + row.rho**2), abs=1e-10)
    assert rep.gap_order == pytest.approx(-1, abs=1e-9)
    assert rep.gap_coefficient == pytest.approx(2, abs=1e-8)
    assert rep.warnings == ()


def test_compare_three_cutoffs_skip_coefficient():
    rep = compare_methods(unit(2), [0.1, 0.05, 0.025])
    assert rep.gap_order == pytest.approx(-1, abs=1e-9)
    assert rep.gap_coefficient is None
    assert any("coefficient" in w for w in rep.warnings)


def test_compare_normal_form_gap_coefficient():
    sigma = 0.5
    p = PoleProblem(0.0, 1.0, sigma, 2, integrand("(1-x)/(x+s)^2", s=sigma))
    rep = compare_methods(p, list(np.geomspace(1e-2, 1e-4, 5)))
    assert rep.gap_order == pytest.approx(-1, abs=1e-3)
    assert rep.gap_coefficient == pytest.approx((1 - sigma) / (2 * sigma**2), abs=1e-6)


def test_compare_odd_integrand_gap_vanishes():
    # x^2 / x^3 = 1/x is odd about the pole: APV and mild part are both zero
    rep = compare_methods(unit(3, make_polynomial_integrand([0, 0, 1.0])), [0.1, 0.05, 0.025])
    for row in rep.rows:
        assert abs(row.observed_gap) < 1e-12
        assert abs(row.predicted_gap) < 1e-12
    assert rep.gap_order is None
    assert any("vanishes" in w for w in rep.warnings)


@pytest.mark.parametrize("n", [3, 5])
def test_compare_odd_order_gap_is_one_power_lower(n):
    # the symmetric puncture cancels the f(c) pole for odd n; f'(c) leads
    p = unit(n, integrand("exp(x)"), c=0.1)
    rep = compare_methods(p, [0.04, 0.02, 0.01])
    assert rep.gap_order == pytest.approx(-(n - 2), abs=0.05)


def test_compare_warns_on_two_cutoffs():
    rep = compare_methods(unit(2), [0.1, 0.05])
    assert len(rep.rows) == 2
    assert rep.gap_order is None
    assert any("insufficient" in w for w in rep.warnings)


def test_compare_requires_order_two():
    with pytest.raises(OrderTooLow):
        compare_methods(unit(1), [0.1, 0.05, 0.025])


@pytest.mark.parametrize("name", sorted(FAMILY))
@pytest.mark.parametrize("n", [2, 3, 4])
def test_gap_identity(name, n):
    p = PoleProblem(-1.0, 1.5, 0.2, n, FAMILY[name]())
    for rho in (0.1, 0.02):
        apv = regularize(p, RegMethod.APV, rho)
        mild = regularize(p, RegMethod.MILD_PART, rho)
        split = singular_split(p, rho)
        bound = 10 * (apv.abs_error_estimate + mild.abs_error_estimate)
        assert abs(apv.value - mild.value - split.singular_sum) <= bound


@pytest.mark.parametrize("name", ["exp", "sin", "inv", "poly3"])
@pytest.mark.parametrize("n", [2, 3])
def test_kernel_and_mild_share_a_limit(name, n):
    p = PoleProblem(-1.0, 1.5, 0.2, n, FAMILY[name]())
    rhos = [0.01, 0.005, 0.0025]
    kern = richardson_limit(rhos, [kernel_integral(p, r, 1e-12).value for r in rhos], (1, 2))
    mild = richardson_limit(rhos, [mild_part(p, r, 1e-12).value for r in rhos], (1, 2))
    assert kern == pytest.approx(mild, abs=1e-5 * max(1.0, abs(mild)))


def test_counterexample_columns():
    rhos = [0.1, 0.05, 0.025]
    rep = counterexample_i1(rhos)
    for r, a, k, part in zip(rhos, rep.apv_values, rep.kernel_values, rep.partial_integral_form_values):
        assert a == pytest.approx(2 - 2 * r, abs=1e-14)
        assert k == pytest.approx(2 - 2 * r * math.atan(1 / r), abs=1e-12)
        assert part == pytest.approx(k, abs=1e-12)
    assert rep.apv_values[0] == pytest.approx(1.8, abs=1e-14)


def test_counterexample_partial_form_at_point_one():
    li, _ = log_integral(0.1)
    oracle, _ = sp_integrate.quad(lambda x: math.log(x * x + 0.01), 0, 1, points=[0.1], epsabs=1e-14)
    assert li == pytest.approx(oracle, abs=1e-12)
    rep = counterexample_i1([0.1])
    assert rep.partial_integral_form_values[0] == pytest.approx(math.log(1.01) - oracle, abs=1e-12)


def test_counterexample_trends_are_reported_not_judged():
    rep = counterexample_i1([0.1, 0.05, 0.025, 0.0125])
    assert set(rep.trends) == {"apv", "kernel", "partial_integral_form"}
    # direct evaluation: all three columns head toward 2
    for t in rep.trends.values():
        assert t.extrapolated_limit == pytest.approx(2, abs=0.05)


def test_counterexample_rejects_bad_cutoffs():
    with pytest.raises(InvalidArgument):
        counterexample_i1([0.1, 1.5])
