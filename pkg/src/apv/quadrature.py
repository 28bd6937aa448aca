"""Adaptive Gauss-Kronrod quadrature and direct asymptotic principal values.

The punctured sides of an APV are meshed geometrically toward the cutoff
points ``c - rho`` and ``c + rho`` before adaptive bisection starts: the
integrand there behaves like ``1/(x - c)**n`` and each interval spans a
fixed ratio of distances from the pole, which a 21-point rule resolves
to round-off on the first pass.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import EPS, ApvResult, PoleProblem, check_rho
from .errors import AccuracyFailure, ApvError

MAX_INTERVALS = 10_000

# Kronrod 21-point nodes on [-1, 1]; odd indices are the embedded Gauss 10 nodes.
_XK = np.array([
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0,
    -0.148874338981631210884826001129720, -0.294392862701460198131126603103866,
    -0.433395394129247190799265943165784, -0.562757134668604683339000099272694,
    -0.679409568299024406234327365114874, -0.780817726586416897063717578345042,
    -0.865063366688984510732096688423493, -0.930157491355708226001207180059508,
    -0.973906528517171720077964012084452, -0.995657163025808080735527280689003,
])
_WK = np.array([
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
    0.147739104901338491374841515972068, 0.142775938577060080797094273138717,
    0.134709217311473325928054001771707, 0.123491976262065851077958109831074,
    0.109387158802297641899210590325805, 0.093125454583697605535065465083366,
    0.075039674810919952767043140916190, 0.054755896574351996031381300244580,
    0.032558162307964727478818972459390, 0.011694638867371874278064396062192,
])
_WG = np.zeros(21)
_WG[1::2] = [
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338, 0.295524224714752870173892994651338,
    0.269266719309996355091226921569469, 0.219086362515982043995534934228163,
    0.149451349150580593145776339657697, 0.066671344308688137593568809893332,
]


@dataclass(frozen=True)
class QuadResult:
    value: float
    abs_error_estimate: float
    subdivisions: int
    evaluations: int


def _gk21(f, lo, hi):
    """Apply the rule on every interval; returns (values, error estimates)."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * _XK[None, :]
    fx = np.asarray(f(x), dtype=float)
    if fx.shape != x.shape:
        fx = np.broadcast_to(fx, x.shape)
    kron = fx @ _WK * half
    gauss = fx @ _WG * half
    resabs = np.abs(fx) @ _WK * np.abs(half)
    # round-off floor: below this the estimate cannot shrink further
    err = np.maximum(np.abs(kron - gauss), 50 * EPS * resabs)
    floor = 50 * EPS * resabs
    return kron, err, floor


def integrate(
    f: Callable,
    lo: float,
    hi: float,
    tol: float = 1e-10,
    *,
    breakpoints: Sequence[float] = (),
    max_intervals: int = MAX_INTERVALS,
) -> QuadResult:
    """Integrate ``f`` over ``[lo, hi]`` to absolute tolerance ``tol``.

    ``f`` must accept ndarrays. ``breakpoints`` seed the initial mesh.
    Exceeding ``max_intervals`` raises ``AccuracyFailure`` carrying the best
    estimate; an interval whose error sits at the round-off floor is not
    split again, so the returned estimate can exceed ``tol`` in that case.
    """
    lo, hi = float(lo), float(hi)
    if not tol > 0:
        raise ValueError("tol must be positive")
    if hi < lo:
        raise ValueError(f"need lo <= hi, got [{lo}, {hi}]")
    if lo == hi:
        return QuadResult(0.0, 0.0, 0, 0)

    pts = np.unique(np.concatenate([[lo, hi], [p for p in breakpoints if lo < p < hi]]))
    a, b = pts[:-1], pts[1:]
    vals, errs, floors = _gk21(f, a, b)
    evaluations = 21 * a.size

    while True:
        total_err = errs.sum()
        if total_err <= tol:
            break
        live = errs > floors * (1 + 1e-12)
        # what is left above round-off no longer matters: stop refining
        if not live.any() or (errs - floors).sum() <= 0.5 * tol:
            break
        split = live & (errs > tol / a.size)
        if not split.any():
            split = live & (errs >= errs[live].max() * 0.5)
        if a.size + split.sum() > max_intervals:
            raise AccuracyFailure(
                f"no convergence within {max_intervals} subintervals on [{lo}, {hi}]",
                value=float(vals.sum()),
                abs_error_estimate=float(total_err),
                evaluations=evaluations,
            )
        ma, mb = a[split], b[split]
        mid = 0.5 * (ma + mb)
        na = np.concatenate([ma, mid])
        nb = np.concatenate([mid, mb])
        nv, ne, nf = _gk21(f, na, nb)
        evaluations += 21 * na.size
        keep = ~split
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])
        floors = np.concatenate([floors[keep], nf])

    order = np.argsort(a)  # sum in spatial order for reproducible rounding
    return QuadResult(float(vals[order].sum()), float(errs.sum()), int(a.size), evaluations)


def graded_mesh(lo: float, hi: float, pole: float, rho: float) -> list[float]:
    """Breakpoints in ``[lo, hi]`` whose distance from ``pole`` doubles from ``rho``."""
    pts = []
    d = 2 * rho
    length = hi - lo
    while d - rho < length:
        pts.append(hi - (d - rho) if pole > hi else lo + (d - rho))
        d *= 2
    return pts


def _side_integrand(p: PoleProblem, c: float | None = None):
    c = p.c if c is None else c
    f, n = p.f, p.n
    return lambda x: f(x) / (x - c) ** n


def apv_sides(p: PoleProblem, rho: float, tol: float = 1e-10) -> tuple[QuadResult, QuadResult]:
    rho = check_rho(p, rho)
    g = _side_integrand(p)
    left_hi, right_lo = p.c - rho, p.c + rho
    left = integrate(g, p.a, left_hi, tol, breakpoints=graded_mesh(p.a, left_hi, p.c, rho))
    right = integrate(g, right_lo, p.b, tol, breakpoints=graded_mesh(right_lo, p.b, p.c, rho))
    return left, right


def apv_direct(p: PoleProblem, rho: float, tol: float = 1e-10) -> ApvResult:
    """Sum of the integrals over ``[a, c - rho]`` and ``[c + rho, b]``.

    ``tol`` applies to each side separately; the reported estimate is the sum.
    """
    left, right = apv_sides(p, rho, tol)
    return ApvResult(
        left.value + right.value,
        left.abs_error_estimate + right.abs_error_estimate,
        float(rho),
        left.evaluations + right.evaluations,
    )


def apv_rho_curve(p: PoleProblem, rhos: Sequence[float], tol: float = 1e-10) -> list[ApvResult | ApvError]:
    """``apv_direct`` over several cutoffs; a failing entry holds its exception."""
    out: list[ApvResult | ApvError] = []
    for rho in rhos:
        try:
            out.append(apv_direct(p, rho, tol))
        except ApvError as exc:
            out.append(exc)
    return out


def integrate_2d(g: Callable, lo: float, hi: float, tol: float = 1e-10) -> QuadResult:
    """Iterated adaptive quadrature of ``g(s, t)`` over the square ``[lo, hi]**2``."""
    counts = {"evaluations": 0}

    def outer(s):
        s = np.asarray(s, dtype=float)
        out = np.empty(s.shape)
        for idx, sv in np.ndenumerate(s):
            r = integrate(lambda t: g(sv, t), lo, hi, tol / (10 * (hi - lo)))
            counts["evaluations"] += r.evaluations
            out[idx] = r.value
        return out

    res = integrate(outer, lo, hi, tol)
    return QuadResult(res.value, res.abs_error_estimate, res.subdivisions, counts["evaluations"])
