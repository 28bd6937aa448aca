"""Velocity dispersion of a charged probe near a perfectly reflecting mirror.

Natural units (c = hbar = 1). With ``T = t' - t''`` the double time
integral over ``[0, tau]**2`` of an even correlator ``G(T)`` collapses to
``2 * int_0^tau (tau - T) G(T) dT``; substituting ``T = tau x`` and
``sigma = 2z/tau`` gives

    <dv_z^2> = (e/m)**2 * 2/(pi**2 tau**2) * int_0^1 (1-x)/(x**2 - sigma**2)**2 dx
    <dv_x^2> = -(e/m)**2 * 2/(pi**2 tau**2) * int_0^1 (1-x)(x**2+sigma**2)/(x**2 - sigma**2)**3 dx

For ``tau > 2z`` the pole at ``x = sigma`` lies inside ``(0, 1)`` and the
x-integral is taken as an APV with the cutoff applied in the x variable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ApvResult, PoleProblem
from .errors import DomainError, InvalidArgument, LightConeSingularity, RegimeBoundary
from .expr import integrand
from .quadrature import apv_direct, integrate_2d

PI2 = math.pi**2


def _light_cone_check(T, z):
    if np.any(np.abs(np.asarray(T)) == 2 * z):
        raise LightConeSingularity(f"correlator is singular at |T| = 2z = {2 * z}")


def correlator_zz(T, z: float):
    """Renormalized <E_z E_z> at time separation ``T`` and distance ``z``."""
    _light_cone_check(T, z)
    T = np.asarray(T, dtype=float)
    out = 1.0 / (PI2 * (T * T - 4 * z * z) ** 2)
    return float(out) if out.ndim == 0 else out


def correlator_xx(T, z: float):
    """Renormalized <E_x E_x> (equal to <E_y E_y>)."""
    _light_cone_check(T, z)
    T = np.asarray(T, dtype=float)
    out = -(T * T + 4 * z * z) / (PI2 * (T * T - 4 * z * z) ** 3)
    return float(out) if out.ndim == 0 else out


def useful_formula(sigma: float, rho: float) -> float:
    """Leading terms of the APV of ``int_0^1 (1-x)/(x**2 - sigma**2)**2 dx``."""
    if not 0 < sigma < 1:
        raise DomainError(f"sigma must lie in (0, 1), got {sigma}")
    if not rho > 0:
        raise InvalidArgument("cutoff must be positive")
    finite = math.log(((1 + sigma) / (1 - sigma)) ** 2) / (8 * sigma**3)
    return finite + (1 - sigma) / (2 * sigma**2 * rho)


@dataclass(frozen=True)
class MirrorConfig:
    z: float
    tau: float
    charge: float = 1.0
    mass: float = 1.0
    rho: float = 1e-3

    def __post_init__(self):
        if not self.z > 0:
            raise InvalidArgument("z must be positive")
        if not self.tau > 0:
            raise InvalidArgument("tau must be positive")
        if not self.mass > 0:
            raise InvalidArgument("mass must be positive")
        if not self.rho > 0:
            raise InvalidArgument("cutoff must be positive")

    @property
    def sigma(self) -> float:
        return 2 * self.z / self.tau

    @property
    def singular(self) -> bool:
        return self.tau > 2 * self.z

    @property
    def regime(self) -> str:
        if self.tau == 2 * self.z:
            return "boundary"
        return "singular" if self.singular else "regular"

    @property
    def prefactor(self) -> float:
        """``(e/m)**2 * 2/(pi**2 tau**2)`` multiplying the x-integral."""
        return (self.charge / self.mass) ** 2 * 2 / (PI2 * self.tau**2)


def _require_regime(cfg: MirrorConfig):
    if cfg.tau == 2 * cfg.z:
        raise RegimeBoundary(f"tau = 2z = {cfg.tau}: pole sits on the integration endpoint")


def z_problem(cfg: MirrorConfig) -> PoleProblem:
    """Reduced x-integral for the z component: double pole at ``x = sigma``."""
    s = cfg.sigma
    return PoleProblem(0.0, 1.0, s, 2, integrand("(1 - x)/(x + s)^2", s=s))


def x_problem(cfg: MirrorConfig) -> PoleProblem:
    """Reduced x-integral for the x component: triple pole at ``x = sigma``."""
    s = cfg.sigma
    return PoleProblem(0.0, 1.0, s, 3, integrand("-(1 - x)*(x^2 + s^2)/(x + s)^3", s=s))


def _scaled(r: ApvResult, k: float) -> ApvResult:
    return ApvResult(k * r.value, abs(k) * r.abs_error_estimate, r.rho, r.evaluations)


def _double_integral(cfg, correlator, tol):
    k = (cfg.charge / cfg.mass) ** 2
    r = integrate_2d(lambda s, t: correlator(s - t, cfg.z), 0.0, cfg.tau, tol / max(k, 1e-300))
    return ApvResult(k * r.value, k * r.abs_error_estimate, cfg.rho, r.evaluations)


def velocity_dispersion_z(cfg: MirrorConfig, tol: float = 1e-12) -> ApvResult:
    """<dv_z^2>: direct double quadrature for tau < 2z, APV of the reduced integral otherwise."""
    _require_regime(cfg)
    if not cfg.singular:
        return _double_integral(cfg, correlator_zz, tol)
    return _scaled(apv_direct(z_problem(cfg), cfg.rho, tol), cfg.prefactor)


def velocity_dispersion_x(cfg: MirrorConfig, tol: float = 1e-12) -> ApvResult:
    _require_regime(cfg)
    if not cfg.singular:
        return _double_integral(cfg, correlator_xx, tol)
    return _scaled(apv_direct(x_problem(cfg), cfg.rho, tol), cfg.prefactor)


def dispersion_z_closed_form(cfg: MirrorConfig) -> float:
    """Displayed closed form for tau > 2z, without its O(rho) remainder."""
    if not cfg.singular:
        raise DomainError("closed form applies only for tau > 2z")
    z, tau = cfg.z, cfg.tau
    log_term = tau / z**3 * math.log(((tau + 2 * z) / (tau - 2 * z)) ** 2)
    pole_term = 8 * (1 - 2 * z / tau) / (z**2 * cfg.rho)
    return (cfg.charge / cfg.mass) ** 2 / (32 * PI2) * (log_term + pole_term)


def late_time_limit(cfg: MirrorConfig) -> float:
    """``e**2 / (4 pi**2 m**2 z**2) * (1 + 1/rho)``, the tau >> 2z behaviour."""
    return (cfg.charge / cfg.mass) ** 2 / (4 * PI2 * cfg.z**2) * (1 + 1 / cfg.rho)
