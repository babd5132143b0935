"""Scalar root equations and closed-form expressions defining the policy.

The pipeline is: solve the exponent gamma of the power branch, solve the
two characteristic exponents d- and d+ of the middle branch, locate the
retention kink x0 and the dividend barrier x_star, then assemble the three
value-function coefficients by smooth pasting.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import levy
from .errors import BarrierConditionViolated, DegenerateLog, NoRoot, SignViolation
from .model import ModelParams, validate_params

ROOT_TOL = 1e-10
_XTOL = 1e-14
_SCAN_STEP = 1e-3


@dataclass(frozen=True)
class PolicyParams:
    """Solved quantities fully determining the optimal policy."""

    gamma: float
    d_minus: float
    d_plus: float
    x0: float
    x_star: float
    c1: float
    c3: float
    c4: float


def h_of_gamma(m: ModelParams, gamma: float) -> float:
    """Left side of the exponent equation for the power branch."""
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must be in (0,1), got {gamma}")
    b = m.mu * m.k / (m.sigma2 * (1.0 - gamma))
    local = -m.c - 0.5 * m.mu**2 / m.sigma2 * gamma / (gamma - 1.0)
    return local + levy.power_jump_integral(m.levy, gamma, b)


def solve_gamma(m: ModelParams) -> float:
    """Smallest root of the exponent equation in (0,1).

    Fixed-step sign scan from 0 upward, then bracketed root refinement.
    Warns if the scan sees more than one sign change (the smallest root is
    still returned).
    """
    validate_params(m)
    lo = _SCAN_STEP
    prev = h_of_gamma(m, lo)
    if prev >= 0:
        lo = 1e-9
        prev = h_of_gamma(m, lo)
    bracket = None
    changes = 0
    g = lo
    while g + _SCAN_STEP < 1.0:
        g_next = g + _SCAN_STEP
        cur = h_of_gamma(m, g_next)
        if prev < 0 <= cur or prev >= 0 > cur:
            changes += 1
            if bracket is None:
                bracket = (g, g_next)
        prev, g = cur, g_next
    if bracket is None:
        raise NoRoot("no sign change of the exponent equation found in (0,1)")
    if changes > 1:
        warnings.warn(
            f"exponent equation has {changes} sign changes in (0,1); "
            "using the smallest root", stacklevel=2,
        )
    root = brentq(lambda x: h_of_gamma(m, x), *bracket, xtol=_XTOL)
    if abs(h_of_gamma(m, root)) > ROOT_TOL:
        raise NoRoot(f"exponent root residual {h_of_gamma(m, root):.3e} above tolerance")
    return float(root)


def l_of_d(m: ModelParams, d: float) -> float:
    """Characteristic function of the middle (full-retention) branch."""
    return (
        0.5 * m.sigma2 * d * d
        + m.mu * d
        - m.c
        + levy.exp_jump_integral(m.levy, m.k, d)
    )


def _guard_rate(spec: levy.LevyMeasureSpec) -> float:
    if isinstance(spec, levy.ExponentialFamily):
        return spec.rate
    return spec.tail_rate


def solve_exponents(m: ModelParams) -> tuple[float, float]:
    """Both roots (d_minus < 0 < d_plus) of the characteristic function."""
    validate_params(m)
    f = lambda d: l_of_d(m, d)
    d_lo = -1.0
    while f(d_lo) <= 0:
        d_lo *= 2.0
        if d_lo < -1e12:
            raise NoRoot("no negative bracket for the characteristic function")
    d_minus = brentq(f, d_lo, -1e-300, xtol=_XTOL)
    d_hi = _guard_rate(m.levy) / m.k * (1.0 - levy.GUARD_MARGIN)
    # tabulated tails lose all precision right at the divergence guard;
    # probe for a finite bracket, ignoring the expected overflow noise
    with warnings.catch_warnings(), np.errstate(over="ignore", invalid="ignore"):
        warnings.simplefilter("ignore")
        val = f(d_hi)
        while not math.isfinite(val):
            d_hi *= 0.9
            if d_hi < 1e-6:
                raise NoRoot(
                    "characteristic function not finite near the divergence guard"
                )
            val = f(d_hi)
    if val <= 0:
        raise NoRoot("characteristic function not positive at the divergence guard")
    d_plus = brentq(f, 1e-300, d_hi, xtol=_XTOL)
    for root in (d_minus, d_plus):
        if abs(f(root)) > ROOT_TOL:
            raise NoRoot(f"characteristic root residual {f(root):.3e} above tolerance")
    return float(d_minus), float(d_plus)


def compute_x0(m: ModelParams, gamma: float) -> float:
    """Surplus level where the feedback retention ratio reaches 1."""
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must be in (0,1), got {gamma}")
    return (1.0 - gamma) * m.sigma2 / m.mu


def check_barrier_condition(gamma: float, d_minus: float, d_plus: float, x0: float) -> bool:
    """Regime condition guaranteeing the barrier sits above the kink."""
    return x0 / gamma + 1.0 / abs(d_minus) - 1.0 / d_plus < 0.0


def q_of_x(gamma: float, d_minus: float, d_plus: float, x0: float, beta: float, x) -> float:
    """Auxiliary smooth-pasting function whose root locates the barrier;
    strictly increasing on (x0, inf)."""
    spread = d_plus - d_minus
    return (
        (x0 / gamma - 1.0 / d_minus) * beta * d_plus / spread * np.exp(d_minus * (x0 - x))
        - (x0 / gamma - 1.0 / d_plus) * beta * d_minus / spread * np.exp(d_plus * (x0 - x))
    )


def compute_xstar(gamma: float, d_minus: float, d_plus: float, x0: float) -> float:
    """Closed-form dividend barrier."""
    if not check_barrier_condition(gamma, d_minus, d_plus, x0):
        raise BarrierConditionViolated(
            "x0/gamma + 1/|d-| - 1/d+ >= 0: no barrier above the kink exists"
        )
    denom = d_plus * x0 - gamma
    if denom == 0.0:
        raise DegenerateLog("d_plus * x0 == gamma: barrier formula undefined")
    arg = d_plus**2 * (d_minus * x0 - gamma) / (d_minus**2 * denom)
    if not 0.0 < arg < 1.0:
        raise BarrierConditionViolated(f"barrier log argument {arg} outside (0,1)")
    return x0 - math.log(arg) / (d_plus - d_minus)


def compute_coefficients(
    gamma: float,
    d_minus: float,
    d_plus: float,
    x0: float,
    x_star: float,
    beta: float,
) -> tuple[float, float, float]:
    """Value-function coefficients (c1, c3, c4) from smooth pasting at the
    barrier and continuity at the kink.  Signs are enforced."""
    spread = d_plus - d_minus
    c3 = beta * d_plus / (math.exp(d_minus * x_star) * d_minus * spread)
    c4 = beta * d_minus / (math.exp(d_plus * x_star) * d_plus * (-spread))
    c1 = (c3 * math.exp(d_minus * x0) + c4 * math.exp(d_plus * x0)) / x0**gamma
    if not (c3 < 0 and c4 > 0 and c1 > 0):
        raise SignViolation(
            f"coefficient signs wrong: c1={c1}, c3={c3}, c4={c4} "
            "(expected c1>0, c3<0, c4>0)"
        )
    return c1, c3, c4


def solve_policy(m: ModelParams) -> PolicyParams:
    """Full policy solve; deterministic for fixed inputs."""
    validate_params(m)
    gamma = solve_gamma(m)
    d_minus, d_plus = solve_exponents(m)
    x0 = compute_x0(m, gamma)
    x_star = compute_xstar(gamma, d_minus, d_plus, x0)
    c1, c3, c4 = compute_coefficients(gamma, d_minus, d_plus, x0, x_star, m.beta)
    q_res = q_of_x(gamma, d_minus, d_plus, x0, m.beta, x_star)
    if abs(q_res) > 1e-9:
        raise NoRoot(f"barrier residual q(x*) = {q_res:.3e} above tolerance")
    return PolicyParams(
        gamma=gamma, d_minus=d_minus, d_plus=d_plus,
        x0=x0, x_star=x_star, c1=c1, c3=c3, c4=c4,
    )
