"""The growth function ``g``.

Both supported variants have piecewise-affine ``log g``: the exponential
``beta * exp(lam * x)`` has a single piece, and a log-convex polyline is
extended affinely (in ``log g``) beyond its breakpoints. Log-convexity
makes ``g'`` non-decreasing by construction, and the affine tail is what
lets huge arguments be handled in log-magnitude arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BelowThreshold,
    DerivativeNotMonotone,
    InvalidInput,
    NoGrowth,
    NotIncreasing,
    OutOfRange,
)

TWO_PI = 2.0 * math.pi
GROWTH_SAFETY = 1.0 - 1e-9

EXPONENTIAL = "exponential"
LOG_CONVEX_POLYLINE = "log_convex_polyline"


@dataclass(frozen=True)
class GrowthSpec:
    variant: str
    lam: float = 1.0
    beta: float = 1.0
    breakpoints: tuple[float, ...] = ()
    log_values: tuple[float, ...] = ()

    @classmethod
    def exponential(cls, lam: float = 1.0, beta: float = 1.0) -> GrowthSpec:
        return cls(EXPONENTIAL, lam=float(lam), beta=float(beta))

    @classmethod
    def log_convex_polyline(cls, breakpoints, log_values) -> GrowthSpec:
        return cls(
            LOG_CONVEX_POLYLINE,
            breakpoints=tuple(float(v) for v in breakpoints),
            log_values=tuple(float(v) for v in log_values),
        )


@dataclass(frozen=True, eq=False)
class GrowthProfile:
    spec: GrowthSpec
    c: float
    x_growth: float
    _xs: np.ndarray = field(repr=False)
    _ls: np.ndarray = field(repr=False)
    _slopes: np.ndarray = field(repr=False)

    @property
    def breakpoints(self) -> np.ndarray:
        if self.spec.variant == EXPONENTIAL:
            return np.empty(0)
        return self._xs

    @property
    def tail(self) -> tuple[float, float, float]:
        """``(alpha, lam, x_tail)`` with ``log g(x) = alpha + lam*x`` for ``x >= x_tail``."""
        lam = float(self._slopes[-1])
        if self.spec.variant == EXPONENTIAL:
            return float(self._ls[0] - lam * self._xs[0]), lam, -math.inf
        return float(self._ls[-1] - lam * self._xs[-1]), lam, float(self._xs[-1])

    def log_g(self, x):
        x = np.asarray(x, dtype=float)
        xs, ls, sl = self._xs, self._ls, self._slopes
        inside = np.interp(x, xs, ls)
        out = np.where(x < xs[0], ls[0] + sl[0] * (x - xs[0]), inside)
        out = np.where(x > xs[-1], ls[-1] + sl[-1] * (x - xs[-1]), out)
        return float(out) if out.ndim == 0 else out

    def g(self, x):
        with np.errstate(over="ignore"):
            out = np.exp(self.log_g(x))
        return float(out) if np.ndim(out) == 0 else out

    def slope(self, x):
        """Right-hand slope of ``log g`` at ``x``."""
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self._xs, x, side="right")
        full = np.concatenate([[self._slopes[0]], self._slopes, [self._slopes[-1]]])
        out = full[idx]
        return float(out) if out.ndim == 0 else out

    def g_prime(self, x):
        """``g'`` with the right-hand value at breakpoints."""
        with np.errstate(over="ignore", invalid="ignore"):
            out = self.slope(x) * self.g(x)
        return float(out) if np.ndim(out) == 0 else out

    def invert_log(self, ell):
        """``x`` with ``log g(x) = ell``; exact for piecewise-affine ``log g``."""
        ell = np.asarray(ell, dtype=float)
        xs, ls, sl = self._xs, self._ls, self._slopes
        inside = np.interp(ell, ls, xs)
        out = np.where(ell < ls[0], xs[0] + (ell - ls[0]) / sl[0], inside)
        out = np.where(ell > ls[-1], xs[-1] + (ell - ls[-1]) / sl[-1], out)
        return float(out) if out.ndim == 0 else out

    def invert(self, v):
        v = np.asarray(v, dtype=float)
        if np.any(~(v > 0)) or np.any(~np.isfinite(v)):
            raise OutOfRange("g takes every positive finite value exactly once; got a value outside (0, inf)")
        out = self.invert_log(np.log(v))
        return float(out) if np.ndim(out) == 0 else out

    def gprime_lower(self, x: float) -> float:
        """Lower bound ``(c - 1)/(2 pi) * g(x - 2 pi)`` for ``g'(x)``."""
        if x < self.x_growth + TWO_PI:
            raise BelowThreshold(f"x = {x} is below x_growth + 2 pi = {self.x_growth + TWO_PI}")
        return (self.c - 1.0) / TWO_PI * self.g(x - TWO_PI)

    def growth_constant_C(self, grid: int = 4097) -> float:
        """Largest ``C`` with ``g(x) >= C c^(x/2pi)`` on one period past ``x_growth``.

        By the growth inequality this bound then holds for every ``x >= x_growth``.
        """
        x = np.linspace(self.x_growth, self.x_growth + TWO_PI, grid)
        x = np.union1d(x, self.breakpoints[(self.breakpoints >= x[0]) & (self.breakpoints <= x[-1])])
        logs = self.log_g(x) - x / TWO_PI * math.log(self.c)
        return math.exp(float(np.min(logs))) * GROWTH_SAFETY


def build_growth(spec: GrowthSpec, x_growth: float = 0.0, grid: int = 20001) -> GrowthProfile:
    """Validate ``spec`` and certify the growth constant ``c``.

    ``c`` is the smallest ratio ``g(x + 2pi)/g(x)`` seen on a grid over
    ``[x_growth, x_growth + 100]``, shrunk by ``1 - 1e-9``.
    """
    if spec.variant == EXPONENTIAL:
        if not spec.beta > 0:
            raise InvalidInput("beta must be positive")
        if not spec.lam > 0:
            raise NotIncreasing("lam must be positive for g to increase to infinity")
        xs = np.array([0.0, 1.0])
        ls = np.array([math.log(spec.beta), math.log(spec.beta) + spec.lam])
        slopes = np.array([spec.lam])
    elif spec.variant == LOG_CONVEX_POLYLINE:
        xs = np.asarray(spec.breakpoints, dtype=float)
        ls = np.asarray(spec.log_values, dtype=float)
        if len(xs) < 2 or len(xs) != len(ls):
            raise InvalidInput("log-convex polyline needs >= 2 breakpoints with matching log values")
        if np.any(np.diff(xs) <= 0):
            raise InvalidInput("breakpoints must be strictly increasing")
        slopes = np.diff(ls) / np.diff(xs)
        if np.any(slopes <= 0):
            j = int(np.argmax(slopes <= 0))
            raise NotIncreasing(f"segment {j} of log g is not increasing (slope {slopes[j]:.6g})")
        if np.any(np.diff(slopes) < 0):
            j = int(np.argmax(np.diff(slopes) < 0))
            raise DerivativeNotMonotone(f"g' drops at breakpoint {xs[j + 1]:.6g}: log g must be convex")
    else:
        raise InvalidInput(f"unknown growth variant {spec.variant!r}")

    proto = GrowthProfile(spec, 1.0, float(x_growth), xs, ls, slopes)

    x = np.linspace(x_growth - 50.0, x_growth + 100.0, grid)
    # Checked in log scale so that underflow far to the left cannot hide anything.
    lg = proto.log_g(x)
    if np.any(np.diff(lg) <= 0):
        raise NotIncreasing("g is not strictly increasing on the check grid")
    lgp = np.log(proto.slope(x)) + lg
    if np.any(np.diff(lgp) < -1e-12):
        raise DerivativeNotMonotone("g' is not non-decreasing on the check grid")

    xc = np.linspace(x_growth, x_growth + 100.0, grid)
    xc = np.union1d(xc, xs[(xs >= xc[0]) & (xs <= xc[-1])])
    ratio = np.exp(np.min(proto.log_g(xc + TWO_PI) - proto.log_g(xc)))
    c = float(ratio) * GROWTH_SAFETY
    if not c > 1.0:
        raise NoGrowth(f"g(x + 2pi)/g(x) only reaches {c:.6g} <= 1")
    return GrowthProfile(spec, c, float(x_growth), xs, ls, slopes)
