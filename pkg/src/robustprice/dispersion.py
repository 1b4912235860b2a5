"""Convex dispersion measures.

The dispersion statistic of a valuation distribution is the expectation of a
strictly convex differentiable function of the valuation.  The power family
``x**q`` (q > 1) covers fractional moments; q = 2 with
``s = mu**2 + sigma**2`` encodes variance.  Arbitrary strictly convex
measures can be plugged in through an evaluator pair (value, derivative);
convexity of custom evaluators is validated by sampling, not symbolically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import RobustPriceError


@dataclass(frozen=True)
class DispersionMeasure:
    """A strictly convex differentiable function on [0, beta] and its slope.

    Use the :func:`power_moment`, :func:`variance_measure` or
    :func:`custom_measure` constructors instead of instantiating directly.
    """

    family: str  # "power" or "custom"
    q: Optional[float] = None
    value_fn: Optional[Callable[[float], float]] = field(default=None, repr=False)
    deriv_fn: Optional[Callable[[float], float]] = field(default=None, repr=False)

    def __post_init__(self):
        if self.family == "power":
            if self.q is None or not self.q > 1.0:
                raise RobustPriceError(f"power measure needs exponent q > 1, got {self.q}")
        elif self.family == "custom":
            if self.value_fn is None or self.deriv_fn is None:
                raise RobustPriceError("custom measure needs a (value, derivative) pair")
        else:
            raise RobustPriceError(f"unknown dispersion family {self.family!r}")

    @property
    def is_power(self) -> bool:
        return self.family == "power"

    @property
    def is_variance(self) -> bool:
        return self.family == "power" and self.q == 2.0

    def value(self, x):
        """Evaluate the measure at x >= 0 (scalar or array)."""
        if np.any(np.asarray(x) < 0):
            raise RobustPriceError(f"dispersion measure domain is x >= 0, got {x}")
        if self.family == "power":
            return np.power(x, self.q) if np.ndim(x) else float(x) ** self.q
        return self.value_fn(x)

    def derivative(self, x):
        """Slope of the measure at x.

        For 1 < q < 2 the power derivative is singular-free but the
        derivative formula at x = 0 involves a negative exponent; the
        right-limit value 0 is returned there so dual certificates stay
        evaluable on the whole support.
        """
        if np.any(np.asarray(x) < 0):
            raise RobustPriceError(f"dispersion derivative domain is x >= 0, got {x}")
        if self.family == "power":
            if np.ndim(x):
                x = np.asarray(x, dtype=float)
                out = np.zeros_like(x)
                nz = x > 0
                out[nz] = self.q * np.power(x[nz], self.q - 1.0)
                return out
            return 0.0 if x == 0 else self.q * float(x) ** (self.q - 1.0)
        return self.deriv_fn(x)

    def secant_slope(self, a: float, b: float) -> float:
        """(value(b) - value(a)) / (b - a); strictly increasing in b."""
        if not a < b:
            raise RobustPriceError(f"secant slope needs a < b, got a={a}, b={b}")
        return (self.value(b) - self.value(a)) / (b - a)


def power_moment(q: float) -> DispersionMeasure:
    """Fractional-moment measure x**q with q > 1."""
    return DispersionMeasure(family="power", q=float(q))


def variance_measure() -> DispersionMeasure:
    """Second-moment measure x**2; pair with s = mu**2 + sigma**2."""
    return power_moment(2.0)


def custom_measure(value_fn, deriv_fn) -> DispersionMeasure:
    """Wrap a user-supplied strictly convex measure given as (value, derivative)."""
    return DispersionMeasure(family="custom", value_fn=value_fn, deriv_fn=deriv_fn)


def check_convexity(measure: DispersionMeasure, beta: float, n_triples: int = 1000,
                    seed: int = 0) -> None:
    """Sampled strict-convexity and derivative-consistency check.

    Raises RobustPriceError on the first violated triple.  Used to vet
    custom evaluator pairs, for which convexity cannot be verified
    symbolically.
    """
    rng = np.random.default_rng(seed)
    hi = beta if np.isfinite(beta) else 10.0
    for _ in range(n_triples):
        a, b = np.sort(rng.uniform(0.0, hi, size=2))
        if b - a < 1e-9:
            continue
        t = rng.uniform(0.05, 0.95)
        mid = t * a + (1 - t) * b
        lhs = measure.value(mid)
        rhs = t * measure.value(a) + (1 - t) * measure.value(b)
        if not lhs < rhs + 1e-14:
            raise RobustPriceError(
                f"measure not strictly convex on ({a}, {b}): f(mix)={lhs} >= {rhs}")
        x = rng.uniform(1e-3, hi)
        h = 1e-6 * max(1.0, x)
        fd = (measure.value(x + h) - measure.value(x - h)) / (2 * h)
        if abs(fd - measure.derivative(x)) > 1e-6 * max(1.0, abs(fd)):
            raise RobustPriceError(
                f"derivative inconsistent with finite differences at x={x}")
