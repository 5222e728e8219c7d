"""The curve map ``h`` and its extension to the whole real line.

A curve is given on ``[-pi/2, pi/2]`` running from ``-i`` to ``i`` through
the right half of the closed unit disc, with argument strictly increasing.
It is extended to ``R`` by ``h(y) = (-1)^p h(y - p*pi)``.

Three variants are supported: the unit circle (``h(y) = e^{iy}``), a
polyline through a few vertices, and a dense sampled table. The last two
are both linear interpolants and share one code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateLipschitz,
    EndpointMismatch,
    InvalidInput,
    NonMonotoneArgument,
    NotDifferentiableHere,
    PointOutsideHalfDisc,
)

HALF_PI = 0.5 * math.pi
SAFETY = 1.0 - 1e-6
LIP_TOL = 1e-9
_POINT_TOL = 1e-12

UNIT_CIRCLE = "unit_circle"
POLYLINE = "polyline"
SAMPLED = "sampled"
VARIANTS = (UNIT_CIRCLE, POLYLINE, SAMPLED)


@dataclass(frozen=True)
class CurveSpec:
    """Description of ``h`` on ``[-pi/2, pi/2]``.

    For the piecewise-linear variants ``params`` may live on any interval;
    it is rescaled affinely onto ``[-pi/2, pi/2]`` by :meth:`polyline` and
    :meth:`sampled`.
    """

    variant: str
    params: tuple[float, ...] = ()
    points: tuple[complex, ...] = ()

    @classmethod
    def unit_circle(cls) -> CurveSpec:
        return cls(UNIT_CIRCLE)

    @classmethod
    def polyline(cls, params, points) -> CurveSpec:
        return cls(POLYLINE, _normalise(params), tuple(complex(p) for p in points))

    @classmethod
    def sampled(cls, params, points) -> CurveSpec:
        return cls(SAMPLED, _normalise(params), tuple(complex(p) for p in points))

    @classmethod
    def diamond(cls) -> CurveSpec:
        """The two-segment curve ``-i -> 1 -> i``."""
        return cls.polyline([-1.0, 0.0, 1.0], [-1j, 1.0, 1j])


def _normalise(params) -> tuple[float, ...]:
    t = [float(v) for v in params]
    if len(t) < 2:
        raise InvalidInput("a piecewise-linear curve needs at least two vertices")
    t0, t1 = t[0], t[-1]
    if not t1 > t0:
        raise NonMonotoneArgument("curve parameters must be strictly increasing")
    out = [-HALF_PI + (v - t0) / (t1 - t0) * math.pi for v in t]
    out[0], out[-1] = -HALF_PI, HALF_PI
    return tuple(out)


@dataclass(frozen=True, eq=False)
class ValidatedCurve:
    spec: CurveSpec
    h_min: float
    lip_upper: float
    lip_lower: float
    c_h: float
    _ys: np.ndarray = field(repr=False, default=None)
    _ps: np.ndarray = field(repr=False, default=None)
    _slopes: np.ndarray = field(repr=False, default=None)
    _vertex_args: np.ndarray = field(repr=False, default=None)

    @property
    def is_circle(self) -> bool:
        return self.spec.variant == UNIT_CIRCLE

    @property
    def vertices(self) -> np.ndarray:
        """Parameters where ``h`` may fail to be differentiable (empty for the circle)."""
        if self.is_circle:
            return np.empty(0)
        return self._ys

    def base(self, yp):
        """``h`` on ``[-pi/2, pi/2]`` without the parity extension."""
        yp = np.asarray(yp, dtype=float)
        if self.is_circle:
            return np.cos(yp) + 1j * np.sin(yp)
        re = np.interp(yp, self._ys, self._ps.real)
        im = np.interp(yp, self._ys, self._ps.imag)
        return re + 1j * im

    def base_prime(self, yp):
        yp = np.asarray(yp, dtype=float)
        if self.is_circle:
            return -np.sin(yp) + 1j * np.cos(yp)
        idx = np.clip(np.searchsorted(self._ys, yp, side="right") - 1, 0, len(self._ys) - 2)
        return self._slopes[idx]

    def h(self, y):
        """Evaluate the extended map at ``y`` (scalar or array)."""
        yp, sign = reduce_parameter(y)
        out = sign * self.base(yp)
        return complex(out) if np.ndim(out) == 0 else out

    def h_prime(self, y):
        """Derivative of the extension; raises at polyline vertices."""
        yp, sign = reduce_parameter(y)
        if not self.is_circle and np.any(np.isin(yp, self._ys)):
            raise NotDifferentiableHere(f"h is not differentiable at y = {y!r}")
        out = sign * self.base_prime(yp)
        return complex(out) if np.ndim(out) == 0 else out

    def arg_inverse(self, theta):
        """Parameter ``y'`` in ``[-pi/2, pi/2]`` with ``arg h(y') = theta``."""
        th = np.clip(np.asarray(theta, dtype=float), -HALF_PI, HALF_PI)
        if self.is_circle:
            out = th
        else:
            out = self._ray_intersection(th)
        return float(out) if np.ndim(out) == 0 else out

    def _ray_intersection(self, th: np.ndarray) -> np.ndarray:
        ys, ps, args = self._ys, self._ps, self._vertex_args
        j = np.clip(np.searchsorted(args, th, side="right") - 1, 0, len(ys) - 2)
        ux, uy = np.cos(th), np.sin(th)
        p0 = ps[j]
        d = ps[j + 1] - p0
        num = ux * p0.imag - uy * p0.real
        den = ux * d.imag - uy * d.real
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(den != 0.0, -num / den, 0.0)
        s = np.clip(s, 0.0, 1.0)
        return ys[j] + s * (ys[j + 1] - ys[j])


def reduce_parameter(y):
    """Split ``y = y' + p*pi`` with ``y'`` in ``[-pi/2, pi/2)``; return ``(y', (-1)^p)``."""
    y = np.asarray(y, dtype=float)
    p = np.floor((y + HALF_PI) / math.pi)
    yp = np.clip(y - p * math.pi, -HALF_PI, HALF_PI)
    sign = 1.0 - 2.0 * np.mod(p, 2.0)
    return yp, sign


def build_curve(spec: CurveSpec, grid: int = 4096) -> ValidatedCurve:
    """Validate ``spec`` and measure the constants of ``h``.

    The piecewise-linear constants are exact where a closed form exists
    (``h_min`` from segment distances, the upper Lipschitz bound from segment
    speeds, ``c_h`` at segment ends) and otherwise come from grid sampling;
    the estimated lower constants are shrunk by a factor ``1 - 1e-6``.
    """
    if spec.variant not in VARIANTS:
        raise InvalidInput(f"unknown curve variant {spec.variant!r}")
    if spec.variant == UNIT_CIRCLE:
        return ValidatedCurve(spec, h_min=1.0, lip_upper=1.0, lip_lower=2.0 / math.pi, c_h=1.0)

    ys = np.asarray(spec.params, dtype=float)
    ps = np.asarray(spec.points, dtype=complex)
    if len(ys) != len(ps) or len(ys) < 2:
        raise InvalidInput("curve needs matching parameter and point lists of length >= 2")
    if np.any(np.diff(ys) <= 0):
        raise NonMonotoneArgument("curve parameters must be strictly increasing")
    if abs(ys[0] + HALF_PI) > _POINT_TOL or abs(ys[-1] - HALF_PI) > _POINT_TOL:
        raise EndpointMismatch("curve must be parametrised on [-pi/2, pi/2]")
    if abs(ps[0] + 1j) > _POINT_TOL or abs(ps[-1] - 1j) > _POINT_TOL:
        raise EndpointMismatch(f"curve must run from -i to i, got {ps[0]} .. {ps[-1]}")
    ps = ps.copy()
    ps[0], ps[-1] = -1j, 1j

    inner = ps[1:-1]
    bad = (inner.real <= 0) | (np.abs(inner) > 1.0 + _POINT_TOL)
    if np.any(bad):
        k = int(np.argmax(bad)) + 1
        raise PointOutsideHalfDisc(f"vertex {k} = {ps[k]} is not in the open right half of the unit disc")

    slopes = np.diff(ps) / np.diff(ys)
    proto = ValidatedCurve(spec, 1.0, 1.0, 1.0, 1.0, ys, ps, slopes, np.angle(ps))

    # Dense checks on the interpolant, vertices included.
    yy = np.union1d(np.linspace(-HALF_PI, HALF_PI, grid), ys)
    hh = proto.base(yy)
    interior = hh[1:-1]
    bad = (interior.real <= 0) | (np.abs(interior) > 1.0 + _POINT_TOL)
    if np.any(bad):
        raise PointOutsideHalfDisc("curve leaves the open right half of the unit disc")
    args = np.angle(hh)
    args[0], args[-1] = -HALF_PI, HALF_PI
    if np.any(np.diff(args) <= 0):
        raise NonMonotoneArgument("arg h(y) is not strictly increasing on [-pi/2, pi/2]")

    h_min = min(_segment_min_modulus(ps), float(np.min(np.abs(hh)))) * SAFETY
    lip_upper = max(1.0, float(np.max(np.abs(slopes))))
    lip_lower = _pairwise_lower_lipschitz(proto, ys, min(grid, 1024)) * SAFETY
    if lip_lower < LIP_TOL:
        raise DegenerateLipschitz(f"lower Lipschitz bound {lip_lower:.3g} is below {LIP_TOL}")
    c_h = _min_column_singular_value(proto, ps, slopes, yy) * SAFETY
    if c_h <= 0:
        raise DegenerateLipschitz("the matrix [h, h'] is singular somewhere")
    return ValidatedCurve(spec, h_min, lip_upper, lip_lower, c_h, ys, ps, slopes, proto._vertex_args)


def _segment_min_modulus(ps: np.ndarray) -> float:
    p0, p1 = ps[:-1], ps[1:]
    d = p1 - p0
    dd = np.abs(d) ** 2
    s = np.clip(-(p0.real * d.real + p0.imag * d.imag) / dd, 0.0, 1.0)
    return float(np.min(np.abs(p0 + s * d)))


def _pairwise_lower_lipschitz(curve: ValidatedCurve, ys: np.ndarray, n: int) -> float:
    yy = np.union1d(np.linspace(-HALF_PI, HALF_PI, n), ys)
    hh = curve.base(yy)
    best = math.inf
    chunk = 256
    for i in range(0, len(yy), chunk):
        dy = np.abs(yy[i:i + chunk, None] - yy[None, :])
        dh = np.abs(hh[i:i + chunk, None] - hh[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(dy > 0, dh / dy, np.inf)
        best = min(best, float(np.min(r)))
    return best


def _sigma_min(cols_a: np.ndarray, cols_b: np.ndarray) -> np.ndarray:
    mats = np.stack(
        [np.stack([cols_a.real, cols_b.real], -1), np.stack([cols_a.imag, cols_b.imag], -1)], -2
    )
    return np.linalg.svd(mats, compute_uv=False)[..., -1]


def _min_column_singular_value(curve, ps, slopes, yy) -> float:
    # Along one segment det[h, h'] is constant and |h| is convex, so the
    # smallest singular value is attained at a segment end.
    ends = np.concatenate([_sigma_min(ps[:-1], slopes), _sigma_min(ps[1:], slopes)])
    mid = 0.5 * (yy[1:] + yy[:-1])
    dense = _sigma_min(curve.base(mid), curve.base_prime(mid))
    return float(min(np.min(ends), np.min(dense)))
