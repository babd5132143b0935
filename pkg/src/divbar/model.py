"""Model primitives for the controlled surplus process."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import InvalidFraction, InvalidK, InvalidMeasure
from .levy import LevyMeasureSpec, mean_jump


@dataclass(frozen=True)
class ModelParams:
    """Economic primitives of the surplus model.

    mu      premium rate (currency / time)
    sigma2  diffusion variance rate (currency^2 / time)
    k       adjusted risk rate scaling retained catastrophe exposure
    c       discount rate (1 / time)
    beta    fraction of each dividend actually reaching shareholders
    s       initial time
    levy    finite jump measure on [0, inf)
    """

    mu: float
    sigma2: float
    k: float
    c: float
    beta: float = 0.8
    s: float = 0.0
    levy: LevyMeasureSpec = None

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


def k_upper_bound(m: ModelParams) -> float:
    """Largest admissible adjusted risk rate, mu / (2 * mean jump)."""
    return m.mu / (2.0 * mean_jump(m.levy))


def validate_params(m: ModelParams) -> ModelParams:
    """Check every standing model assumption; return m unchanged if valid."""
    if m.levy is None:
        raise InvalidMeasure("a jump measure is required")
    for name in ("mu", "sigma2", "c"):
        v = getattr(m, name)
        if not (v > 0 and math.isfinite(v)):
            raise InvalidMeasure(f"{name} must be positive and finite, got {v}")
    if m.s < 0:
        raise InvalidMeasure(f"initial time must be >= 0, got {m.s}")
    if not 0.0 < m.beta < 1.0:
        raise InvalidFraction(f"payout fraction must lie in (0,1), got {m.beta}")
    bound = k_upper_bound(m)
    if not 0.0 < m.k <= bound:
        raise InvalidK(
            f"adjusted risk rate {m.k} outside (0, {bound}] "
            f"(= mu / (2 * mean jump))"
        )
    return m
