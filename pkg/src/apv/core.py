"""Integrands with derivative access, pole problems and result carriers."""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import InvalidArgument, PoleOutsidePuncture, UnsupportedOrder

EPS = float(np.finfo(float).eps)


def _vectorized(func: Callable) -> Callable:
    """Return a version of ``func`` that maps ndarrays elementwise.

    Functions already written against numpy pass through; scalar-only
    callables (``math.exp``) fall back to ``np.vectorize``.
    """
    fallback = np.vectorize(func, otypes=[float])

    def call(x):
        arr = np.asarray(x, dtype=float)
        if arr.ndim == 0:
            return float(func(float(arr)))
        try:
            out = np.asarray(func(arr), dtype=float)
        except TypeError:
            return fallback(arr)
        if out.shape != arr.shape:
            out = np.broadcast_to(out, arr.shape).copy() if out.ndim == 0 else fallback(arr)
        return out

    return call


class IntegrandSpec:
    """A real function ``f(x)`` together with its derivatives.

    ``derivatives(k)`` must return a callable for the k-th derivative
    (k >= 1). ``deriv(k)`` wraps it as another ``IntegrandSpec`` and caches
    the result, so chains like ``f.deriv(2).deriv(1)`` resolve to
    ``f.deriv(3)``.
    """

    def __init__(
        self,
        func: Callable,
        derivatives: Callable[[int], Callable] | None = None,
        max_order: float = math.inf,
        label: str = "f",
    ):
        if derivatives is None:
            max_order = 0
        self._func = _vectorized(func)
        self._raw = func
        self._derivatives = derivatives
        self.max_order = max_order
        self.label = label
        self._cache: dict[int, IntegrandSpec] = {}
        self._lock = threading.Lock()

    def eval(self, x):
        return self._func(x)

    __call__ = eval

    def deriv(self, k: int) -> "IntegrandSpec":
        if k < 0 or int(k) != k:
            raise InvalidArgument(f"derivative order must be a non-negative integer, got {k!r}")
        if k == 0:
            return self
        if k > self.max_order:
            raise UnsupportedOrder(
                f"{self.label}: derivative of order {k} requested, max_order is {self.max_order}"
            )
        with self._lock:
            cached = self._cache.get(k)
            if cached is None:
                base = self._derivatives
                cached = IntegrandSpec(
                    base(k),
                    (lambda j, k=k: base(k + j)),
                    self.max_order - k,
                    label=f"{self.label}^({k})",
                )
                self._cache[k] = cached
        return cached

    def __repr__(self):
        return f"IntegrandSpec({self.label}, max_order={self.max_order})"


def make_polynomial_integrand(coeffs: Sequence[float]) -> IntegrandSpec:
    """Polynomial ``sum(coeffs[i] * x**i)`` with exact derivatives of every order."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.ndim != 1 or coeffs.size == 0:
        raise InvalidArgument("polynomial needs at least one coefficient")

    def derivatives(k):
        dc = P.polyder(coeffs, k) if k < coeffs.size else np.zeros(1)
        return lambda x: P.polyval(x, dc)

    return IntegrandSpec(lambda x: P.polyval(x, coeffs), derivatives, math.inf, label=f"poly{list(coeffs)}")


def make_analytic_integrand(funcs: Sequence[Callable], label: str = "f") -> IntegrandSpec:
    """Integrand from user-supplied ``[f, f', f'', ...]``; max_order is ``len(funcs) - 1``."""
    funcs = list(funcs)
    if not funcs:
        raise InvalidArgument("need at least the function itself")
    return IntegrandSpec(funcs[0], lambda k: funcs[k], len(funcs) - 1, label=label)


def central_difference(func: Callable, x, k: int, h):
    """k-th central difference quotient with spacing ``h`` (error O(h**2))."""
    total = 0.0
    for j in range(k + 1):
        total = total + (-1) ** j * math.comb(k, j) * func(x + (k / 2 - j) * h)
    return total / h**k


def make_fd_integrand(func: Callable, max_order: int, fd_step: float | None = None) -> IntegrandSpec:
    """Integrand whose derivatives come from Richardson-extrapolated central differences.

    ``fd_step`` is the relative base step for the first derivative
    (default ``eps**(1/3)``). Order k uses ``fd_step**(3/(k+2))`` so that the
    truncation/round-off balance shifts with k; accuracy still degrades
    as k grows, roughly ``eps**(4/(k+4))`` for well-scaled functions.
    """
    if max_order < 1 or int(max_order) != max_order:
        raise InvalidArgument("max_order must be a positive integer")
    if fd_step is None:
        fd_step = EPS ** (1 / 3)
    if not 0 < fd_step < 1:
        raise InvalidArgument("fd_step must lie in (0, 1)")
    f = _vectorized(func)

    def derivatives(k):
        base = fd_step ** (3 / (k + 2))

        def dk(x):
            x = np.asarray(x, dtype=float)
            h = base * np.maximum(1.0, np.abs(x))
            coarse = central_difference(f, x, k, h)
            fine = central_difference(f, x, k, h / 2)
            out = (4 * fine - coarse) / 3
            return float(out) if np.ndim(out) == 0 else out

        return dk

    return IntegrandSpec(f, derivatives, int(max_order), label=getattr(func, "__name__", "f"))


@dataclass(frozen=True)
class PoleProblem:
    """The singular integral of ``f(x) / (x - c)**n`` over ``[a, b]``."""

    a: float
    b: float
    c: float
    n: int
    f: IntegrandSpec

    def __post_init__(self):
        if not (self.a < self.c < self.b):
            raise InvalidArgument(f"need a < c < b, got a={self.a}, c={self.c}, b={self.b}")
        if int(self.n) != self.n or self.n < 1:
            raise InvalidArgument(f"pole order must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if self.f.max_order < self.n - 1:
            raise UnsupportedOrder(
                f"order-{self.n} pole needs derivatives up to {self.n - 1}, "
                f"integrand provides {self.f.max_order}"
            )

    def with_order(self, n: int) -> "PoleProblem":
        return PoleProblem(self.a, self.b, self.c, n, self.f)

    def with_pole(self, c: float) -> "PoleProblem":
        return PoleProblem(self.a, self.b, c, self.n, self.f)

    def with_integrand(self, f: IntegrandSpec) -> "PoleProblem":
        return PoleProblem(self.a, self.b, self.c, self.n, f)

    @property
    def max_rho(self) -> float:
        return min(self.c - self.a, self.b - self.c)


def check_rho(p: PoleProblem, rho: float) -> float:
    rho = float(rho)
    if not rho > 0:
        raise InvalidArgument(f"cutoff must be positive, got {rho}")
    if rho >= p.max_rho:
        raise PoleOutsidePuncture(
            f"cutoff {rho} does not fit inside [{p.a}, {p.b}] around c={p.c} (limit {p.max_rho})"
        )
    return rho


@dataclass(frozen=True)
class ApvResult:
    value: float
    abs_error_estimate: float
    rho: float
    evaluations: int
