"""Terminal-value functionals C(B_T) and adapted/future product integrands.

The supported families are closed under translation x -> x - s, which is the
only Wick-product rule the linear model needs: multiplying by the stochastic
exponential of a deterministic integrand acts on C as a translation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Union

import numpy as np
from scipy.special import expit

ArrayLike = Union[float, np.ndarray]


class NonDifferentiableError(ValueError):
    """Requested an analytic derivative of a family that has none."""


class MonotonicityError(ValueError):
    """A claimed-monotone evaluator failed the probe grid check."""


def _require_finite(x: ArrayLike) -> None:
    if not np.all(np.isfinite(x)):
        raise ValueError("functional argument must be finite")


class TerminalFunctional:
    """Scalar map applied to the terminal Brownian value B_T."""

    def evaluate(self, x: ArrayLike) -> ArrayLike:
        raise NotImplementedError

    def __call__(self, x: ArrayLike) -> ArrayLike:
        return self.evaluate(x)

    def translate(self, s: float) -> "TerminalFunctional":
        """The functional x -> C(x - s)."""
        raise NotImplementedError

    def derivative(self) -> "TerminalFunctional":
        raise NonDifferentiableError(f"{type(self).__name__} has no analytic derivative")

    @property
    def is_deterministic(self) -> bool:
        return False

    @property
    def is_zero(self) -> bool:
        return False


@dataclass(frozen=True)
class Affine(TerminalFunctional):
    """x -> a + b * x."""

    a: float
    b: float = 0.0

    def evaluate(self, x: ArrayLike) -> ArrayLike:
        _require_finite(x)
        return self.a + self.b * x

    def translate(self, s: float) -> "Affine":
        if not math.isfinite(s):
            raise ValueError(f"translation must be finite, got {s}")
        return Affine(self.a - self.b * s, self.b)

    def derivative(self) -> "Affine":
        return Affine(self.b, 0.0)

    @property
    def is_deterministic(self) -> bool:
        return self.b == 0.0

    @property
    def is_zero(self) -> bool:
        return self.a == 0.0 and self.b == 0.0


@dataclass(frozen=True)
class Indicator(TerminalFunctional):
    """x -> scale * 1{x > threshold}; exactly 0 at the threshold itself."""

    scale: float
    threshold: float

    def evaluate(self, x: ArrayLike) -> ArrayLike:
        _require_finite(x)
        out = np.where(np.greater(x, self.threshold), self.scale, 0.0)
        return float(out) if np.ndim(x) == 0 else out

    def translate(self, s: float) -> "Indicator":
        if not math.isfinite(s):
            raise ValueError(f"translation must be finite, got {s}")
        return Indicator(self.scale, self.threshold + s)

    def derivative(self) -> TerminalFunctional:
        raise NonDifferentiableError("indicator functionals have no pointwise derivative")


@dataclass(frozen=True)
class Smooth(TerminalFunctional):
    """x -> scale * fn(x - shift) for a smooth scalar map fn.

    ``dfn`` is the analytic derivative of ``fn`` when available; both must
    accept numpy arrays.
    """

    scale: float
    fn: Callable[[ArrayLike], ArrayLike]
    dfn: Callable[[ArrayLike], ArrayLike] | None = None
    shift: float = 0.0

    def evaluate(self, x: ArrayLike) -> ArrayLike:
        _require_finite(x)
        return self.scale * self.fn(np.asarray(x, dtype=float) - self.shift)

    def translate(self, s: float) -> "Smooth":
        if not math.isfinite(s):
            raise ValueError(f"translation must be finite, got {s}")
        return replace(self, shift=self.shift + s)

    def derivative(self) -> "Smooth":
        if self.dfn is None:
            raise NonDifferentiableError("no analytic derivative was supplied")
        return Smooth(scale=self.scale, fn=self.dfn, dfn=None, shift=self.shift)


@dataclass(frozen=True)
class MonotoneSmooth(Smooth):
    """A Smooth map claimed nondecreasing; validated empirically on a probe grid."""

    def validate_monotone(self, horizon: float, points: int = 1000) -> None:
        """Probe over +-8*sqrt(horizon); raises MonotonicityError on failure."""
        span = 8.0 * math.sqrt(horizon)
        xs = np.linspace(-span, span, points)
        ys = np.asarray(self.evaluate(xs), dtype=float)
        if np.any(np.diff(ys) < 0.0):
            raise MonotonicityError("evaluator decreases somewhere on the probe grid")
        if not ys[-1] > ys[0]:
            raise MonotonicityError("evaluator is constant on the probe grid")


def _logistic_deriv(x: ArrayLike) -> ArrayLike:
    p = expit(x)
    return p * (1.0 - p)


def logistic(scale: float = 1.0) -> MonotoneSmooth:
    """Bounded increasing map x -> scale / (1 + exp(-x))."""
    return MonotoneSmooth(scale=scale, fn=expit, dfn=_logistic_deriv)


def _atan01(x: ArrayLike) -> ArrayLike:
    return 0.5 + np.arctan(x) / np.pi


def _atan01_deriv(x: ArrayLike) -> ArrayLike:
    return 1.0 / (np.pi * (1.0 + np.square(x)))


def arctangent(scale: float = 1.0) -> MonotoneSmooth:
    """Bounded increasing map x -> scale * (1/2 + arctan(x)/pi)."""
    return MonotoneSmooth(scale=scale, fn=_atan01, dfn=_atan01_deriv)


def wick_with_exponential(
    c: TerminalFunctional, sigma: float, t: float
) -> TerminalFunctional:
    """Wick product of C(B_T) with the stochastic exponential of sigma over [0, t].

    Acts as the translation C -> C(. - sigma*t); the ordinary exponential
    growth factor exp((mu - sigma^2/2) t + sigma B_t) is applied by the caller.
    """
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t}")
    return c.translate(sigma * t)


@dataclass(frozen=True)
class IntegrandTerm:
    """One product term f(s, x) * phi(y).

    ``adapted`` sees the time s and the running value x = B_s; ``future`` sees
    only the increment y = B_T - B_s, so it is independent of the past at
    every s. ``future_derivative`` is phi' when phi is differentiable.
    """

    adapted: Callable[[ArrayLike, ArrayLike], ArrayLike]
    future: Callable[[ArrayLike], ArrayLike]
    future_derivative: Callable[[ArrayLike], ArrayLike] | None = None


@dataclass(frozen=True)
class ProductIntegrand:
    """Finite sum of adapted-times-future product terms."""

    terms: tuple[IntegrandTerm, ...]

    def __call__(self, s: ArrayLike, x: ArrayLike, y: ArrayLike) -> ArrayLike:
        total = 0.0
        for term in self.terms:
            total = total + term.adapted(s, x) * term.future(y)
        return total


def malliavin_trace_partial(
    u: ProductIntegrand, s: ArrayLike, x: ArrayLike, y: ArrayLike
) -> ArrayLike:
    """Right-limit Malliavin trace sum_k f_k(s, x) * phi_k'(y).

    Uses that a future bump leaves B_s unchanged and moves B_T - B_s by one
    unit. Terms flagged non-differentiable (indicators) are rejected.
    """
    total = 0.0
    for term in u.terms:
        if term.future_derivative is None:
            raise NonDifferentiableError(
                "integrand contains a non-differentiable future factor"
            )
        total = total + term.adapted(s, x) * term.future_derivative(y)
    return total
