"""Finite jump measures on [0, inf) and the integral functionals built on them.

Two representations are supported: the exponential family with density
``exp(-rate*z)`` and a tabulated density on a grid with a declared
exponential tail beyond the last grid point.  The tabulated measure is the
piecewise-linear interpolant of its grid, so its moments are computed from
exact per-segment polynomial integrals rather than generic quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.integrate import quad

from .errors import DivergentIntegral, InvalidMeasure, QuadratureFailure

# Root searches must stay this far inside the exponential-moment domain;
# the characteristic function blows up at the boundary.
GUARD_MARGIN = 1e-6

_QUAD_EPSABS = 1e-12
# exp(-60) ~ 8.8e-27: cutoff where the exponential tail is numerically zero.
_TAIL_DECADES = 60.0


@dataclass(frozen=True)
class ExponentialFamily:
    """Density exp(-rate*z) dz on [0, inf)."""

    rate: float

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise InvalidMeasure(f"exponential rate must be positive, got {self.rate}")


@dataclass(frozen=True, eq=False)
class TabulatedDensity:
    """Piecewise-linear density on a grid starting at 0, with an exponential
    tail of rate ``tail_rate`` glued on beyond the last grid point."""

    z: np.ndarray
    density: np.ndarray
    tail_rate: float

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        d = np.asarray(self.density, dtype=float)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "density", d)
        if z.ndim != 1 or d.shape != z.shape or z.size < 2:
            raise InvalidMeasure("grid and density must be 1-d arrays of equal length >= 2")
        if z[0] != 0.0 or np.any(np.diff(z) <= 0):
            raise InvalidMeasure("grid must start at 0 and be strictly increasing")
        if np.any(d < 0) or not np.all(np.isfinite(d)):
            raise InvalidMeasure("density values must be finite and nonnegative")
        if not (self.tail_rate > 0 and math.isfinite(self.tail_rate)):
            raise InvalidMeasure(f"tail rate must be positive, got {self.tail_rate}")
        if total_mass(self) <= 0 or mean_jump(self) <= 0:
            raise InvalidMeasure("measure must have positive mass and positive mean jump")

    @property
    def z_max(self) -> float:
        return float(self.z[-1])

    @property
    def tail_level(self) -> float:
        return float(self.density[-1])

    def segment_masses(self) -> np.ndarray:
        """Exact mass of each linear segment."""
        h = np.diff(self.z)
        return 0.5 * (self.density[:-1] + self.density[1:]) * h


LevyMeasureSpec = Union[ExponentialFamily, TabulatedDensity]


def total_mass(spec: LevyMeasureSpec) -> float:
    """nu([0, inf))."""
    if isinstance(spec, ExponentialFamily):
        return 1.0 / spec.rate
    tail = spec.tail_level / spec.tail_rate
    return float(spec.segment_masses().sum()) + tail


def mean_jump(spec: LevyMeasureSpec) -> float:
    """Integral of z nu(dz)."""
    if isinstance(spec, ExponentialFamily):
        return 1.0 / spec.rate**2
    z1, z2 = spec.z[:-1], spec.z[1:]
    d1, d2 = spec.density[:-1], spec.density[1:]
    h = z2 - z1
    # exact first moment of a linear density over each segment
    grid = float((h * (z1 * (2 * d1 + d2) + z2 * (d1 + 2 * d2)) / 6.0).sum())
    r = spec.tail_rate
    tail = spec.tail_level * (spec.z_max / r + 1.0 / r**2)
    return grid + tail


def nu_integral(
    spec: LevyMeasureSpec,
    f: Callable[[np.ndarray], np.ndarray],
    decay: float = 0.0,
    epsabs: float = _QUAD_EPSABS,
) -> float:
    """Integral of f(z) nu(dz) for a vectorizable integrand f.

    ``decay`` is the exponential growth rate of f (positive means f grows
    like exp(decay*z)); it sizes the integration cutoff so the neglected
    tail is below machine noise.
    """
    if isinstance(spec, ExponentialFamily):
        eff = spec.rate - max(decay, 0.0)
        if eff <= 0:
            raise DivergentIntegral(
                f"integrand growth {decay} exceeds measure rate {spec.rate}"
            )
        z_cut = _TAIL_DECADES / eff
        val, err = quad(
            lambda z: f(z) * math.exp(-spec.rate * z),
            0.0, z_cut, epsabs=epsabs, epsrel=1e-11, limit=500,
        )
        if err > 10 * epsabs * (1.0 + abs(val)):
            raise QuadratureFailure(
                f"quadrature error {err:.3e} above tolerance {epsabs:.1e}"
            )
        return val

    # grid part: per-segment Simpson of f times the linear density
    z1, z2 = spec.z[:-1], spec.z[1:]
    d1, d2 = spec.density[:-1], spec.density[1:]
    zm = 0.5 * (z1 + z2)
    dm = 0.5 * (d1 + d2)
    h = z2 - z1
    grid = float(
        (h / 6.0 * (f(z1) * d1 + 4.0 * f(zm) * dm + f(z2) * d2)).sum()
    )
    # exponential tail part
    r = spec.tail_rate
    eff = r - max(decay, 0.0)
    if eff <= 0:
        raise DivergentIntegral(
            f"integrand growth {decay} exceeds tail rate {r}"
        )
    zm_, lvl = spec.z_max, spec.tail_level
    tail = 0.0
    if lvl > 0:
        tail, err = quad(
            lambda z: f(z) * lvl * math.exp(-r * (z - zm_)),
            zm_, zm_ + _TAIL_DECADES / eff, epsabs=epsabs, epsrel=1e-11, limit=500,
        )
        if err > 10 * epsabs * (1.0 + abs(tail)):
            raise QuadratureFailure(
                f"tail quadrature error {err:.3e} above tolerance {epsabs:.1e}"
            )
    return grid + tail


def exp_jump_integral(spec: LevyMeasureSpec, k: float, d: float) -> float:
    """Integral of (exp(k*d*z) - 1 - k*d*z) nu(dz).

    Closed form for the exponential family; quadrature for tabulated
    densities.  Nonnegative on its whole admissible domain.
    """
    kd = k * d
    if isinstance(spec, ExponentialFamily):
        t = spec.rate
        if kd >= t:
            raise DivergentIntegral(f"k*d = {kd} >= rate {t}")
        return kd * kd / (t * t * (t - kd))
    if kd >= spec.tail_rate:
        raise DivergentIntegral(f"k*d = {kd} >= tail rate {spec.tail_rate}")
    return exp_jump_integral_by_quadrature(spec, k, d)


def exp_jump_integral_by_quadrature(spec: LevyMeasureSpec, k: float, d: float) -> float:
    """Quadrature route for the same integral; the cross-check partner of
    the closed form."""
    kd = k * d

    def f(z):
        # expm1 keeps the small-kd*z regime accurate
        return np.expm1(kd * z) - kd * z

    return nu_integral(spec, f, decay=kd)


def power_jump_integral(
    spec: LevyMeasureSpec, gamma: float, b: float, epsabs: float = _QUAD_EPSABS
) -> float:
    """Integral of ((1+b*z)**gamma - 1 - gamma*b*z) nu(dz); nonpositive by
    concavity of u -> (1+u)**gamma."""
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must be in (0,1), got {gamma}")
    if b < 0:
        raise ValueError(f"b must be nonnegative, got {b}")
    if b == 0.0:
        return 0.0

    def f(z):
        u = b * z
        return np.power(1.0 + u, gamma) - 1.0 - gamma * u

    return nu_integral(spec, f, decay=0.0, epsabs=epsabs)


def sample_jump(spec: LevyMeasureSpec, u):
    """Inverse-CDF draw from the normalized density nu(dz)/nu(R).

    ``u`` may be a scalar or an array of uniforms in (0,1); the result has
    the same shape.  Deterministic given u.
    """
    u_arr = np.asarray(u, dtype=float)
    if np.any((u_arr <= 0) | (u_arr >= 1)):
        raise ValueError("uniforms must lie strictly inside (0,1)")
    if isinstance(spec, ExponentialFamily):
        out = -np.log1p(-u_arr) / spec.rate
        return float(out) if np.isscalar(u) else out

    mass = total_mass(spec)
    seg = spec.segment_masses()
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    target = u_arr * mass
    out = np.empty_like(target)

    in_tail = target >= cum[-1]
    if np.any(in_tail):
        r, lvl = spec.tail_rate, spec.tail_level
        rem = target[in_tail] - cum[-1]
        out[in_tail] = spec.z_max - np.log1p(-r * rem / lvl) / r
    body = ~in_tail
    if np.any(body):
        idx = np.searchsorted(cum, target[body], side="right") - 1
        idx = np.clip(idx, 0, len(seg) - 1)
        z1 = spec.z[idx]
        h = spec.z[idx + 1] - z1
        d1 = spec.density[idx]
        slope = (spec.density[idx + 1] - d1) / h
        m = target[body] - cum[idx]
        # solve (slope/2) s^2 + d1 s = m for s in [0, h]
        with np.errstate(divide="ignore", invalid="ignore"):
            disc = np.sqrt(np.maximum(d1 * d1 + 2.0 * slope * m, 0.0))
            s = np.where(
                np.abs(slope) > 1e-300 * np.maximum(d1, 1.0),
                np.where(slope > 0, (disc - d1) / slope,
                         # negative slope: take the root inside the segment
                         (d1 - disc) / (-slope)),
                np.where(d1 > 0, m / np.where(d1 > 0, d1, 1.0), 0.0),
            )
        out[body] = z1 + np.clip(s, 0.0, h)
    return float(out) if np.isscalar(u) else out
