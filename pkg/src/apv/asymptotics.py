"""Power-law order estimates and least-squares fits of expansions in rho.

The fitted model is ``sum_k c_{-k} rho**-k (+ c_L ln rho) + c_0 + c_1 rho``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import IllConditionedFit, InsufficientData, InvalidArgument, NotPowerLaw

CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class RhoSamples:
    """Values sampled at strictly decreasing cutoffs."""

    rho: np.ndarray
    value: np.ndarray
    error: np.ndarray = field(default=None)

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float)
        value = np.asarray(self.value, dtype=float)
        error = np.zeros_like(value) if self.error is None else np.asarray(self.error, dtype=float)
        if rho.ndim != 1 or rho.shape != value.shape or error.shape != value.shape:
            raise InvalidArgument("rho, value and error must be 1-d arrays of equal length")
        if np.any(rho <= 0):
            raise InvalidArgument("cutoffs must be positive")
        if np.any(np.diff(rho) >= 0):
            raise InvalidArgument("cutoffs must be strictly decreasing")
        if np.any(error < 0):
            raise InvalidArgument("error estimates must be non-negative")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "error", error)

    @classmethod
    def from_pairs(cls, rhos: Iterable[float], values: Iterable[float], errors: Iterable[float] | None = None):
        """Build from unordered data, sorting by decreasing rho."""
        rhos = np.asarray(list(rhos), dtype=float)
        values = np.asarray(list(values), dtype=float)
        errors = np.zeros_like(values) if errors is None else np.asarray(list(errors), dtype=float)
        order = np.argsort(-rhos, kind="stable")
        return cls(rhos[order], values[order], errors[order])

    @classmethod
    def from_results(cls, results):
        """From objects with ``rho``, ``value`` and ``abs_error_estimate`` attributes."""
        return cls.from_pairs(
            [r.rho for r in results], [r.value for r in results], [r.abs_error_estimate for r in results]
        )

    def __len__(self):
        return self.rho.size


def geometric_grid(start: float, ratio: float = 0.5, count: int = 5) -> list[float]:
    if not (start > 0 and 0 < ratio < 1 and count >= 1):
        raise InvalidArgument("grid needs start > 0, 0 < ratio < 1, count >= 1")
    return [start * ratio**i for i in range(count)]


def order_estimate(samples: RhoSamples) -> float:
    """Least-squares slope of ``ln|value|`` against ``ln rho``."""
    if len(samples) < 3:
        raise InsufficientData(f"need at least 3 samples, got {len(samples)}")
    v = samples.value
    if np.any(v == 0) or not (np.all(v > 0) or np.all(v < 0)):
        raise NotPowerLaw("values contain zeros or change sign")
    slope, _ = np.polyfit(np.log(samples.rho), np.log(np.abs(v)), 1)
    return float(slope)


@dataclass(frozen=True)
class AsymptoticFit:
    powers: tuple[int, ...]
    pole_coeffs: tuple[float, ...]
    log_coeff: float | None
    constant: float
    linear: float
    residual_rms: float
    condition_estimate: float

    def pole(self, k: int) -> float:
        """Coefficient of ``rho**-k``."""
        return self.pole_coeffs[self.powers.index(k)]

    def evaluate(self, rho):
        rho = np.asarray(rho, dtype=float)
        out = self.constant + self.linear * rho
        for k, ck in zip(self.powers, self.pole_coeffs):
            out = out + ck * rho ** (-k)
        if self.log_coeff is not None:
            out = out + self.log_coeff * np.log(rho)
        return out

    def as_dict(self) -> dict:
        d = {f"c_-{k}": c for k, c in zip(self.powers, self.pole_coeffs)}
        if self.log_coeff is not None:
            d["c_log"] = self.log_coeff
        d["c_0"] = self.constant
        d["c_1"] = self.linear
        d["residual_rms"] = self.residual_rms
        d["condition_estimate"] = self.condition_estimate
        return d


def basis_size(max_power: int, include_log: bool = False) -> int:
    return max_power + 2 + int(include_log)


def fit_asymptotic(samples: RhoSamples, max_power: int, include_log: bool = False) -> AsymptoticFit:
    """Weighted linear least squares over ``rho**-max_power .. rho**-1, [ln rho], 1, rho``.

    Rows are weighted by the inverse error estimate (floored at round-off of
    the value); columns are normalised before solving, and the condition
    number of the normalised system is reported.
    """
    if max_power < 0:
        raise InvalidArgument("max_power must be >= 0")
    nbasis = basis_size(max_power, include_log)
    if len(samples) < nbasis + 1:
        raise InsufficientData(f"{nbasis} basis terms need at least {nbasis + 1} samples, got {len(samples)}")
    rho, v = samples.rho, samples.value
    powers = tuple(range(max_power, 0, -1))
    cols = [rho ** (-k) for k in powers]
    if include_log:
        cols.append(np.log(rho))
    cols += [np.ones_like(rho), rho]
    A = np.column_stack(cols)

    # round-off floor per sample, capped so tiny values cannot dominate the weights
    mag = np.maximum(np.abs(v), 1e-8 * np.abs(v).max())
    sigma = np.maximum(samples.error, 1e3 * np.finfo(float).eps * mag)
    if not sigma.max() > 0:
        sigma = np.ones_like(sigma)
    sigma = np.where(sigma > 0, sigma, sigma[sigma > 0].min())
    w = sigma.min() / sigma
    Aw = A * w[:, None]
    norms = np.linalg.norm(Aw, axis=0)
    norms[norms == 0] = 1.0
    As = Aw / norms
    cond = float(np.linalg.cond(As))
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise IllConditionedFit(f"fit matrix condition {cond:.3g} exceeds {CONDITION_LIMIT:g}", cond)
    sol, *_ = np.linalg.lstsq(As, v * w, rcond=None)
    coeffs = sol / norms
    resid = A @ coeffs - v
    i = len(powers)
    log_coeff = None
    if include_log:
        log_coeff = float(coeffs[i])
        i += 1
    return AsymptoticFit(
        powers=powers,
        pole_coeffs=tuple(float(c) for c in coeffs[: len(powers)]),
        log_coeff=log_coeff,
        constant=float(coeffs[i]),
        linear=float(coeffs[i + 1]),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        condition_estimate=cond,
    )


def richardson_limit(rhos: Sequence[float], values: Sequence[float], orders: Sequence[int]) -> float:
    """Eliminate ``rho**p`` terms (p in ``orders``) from values on a ratio-2 grid.

    ``rhos`` must be ``h, h/2, h/4, ...`` with ``len(orders) + 1`` entries.
    """
    table = list(values)
    if len(table) != len(orders) + 1:
        raise InvalidArgument("need one more value than eliminated orders")
    for p in orders:
        f = 2.0**p
        table = [(f * table[i + 1] - table[i]) / (f - 1) for i in range(len(table) - 1)]
    return float(table[0])
