"""Tracts, external addresses and the shadowing squares that certify admissibility."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import total_ordering
from itertools import islice

import numpy as np

from . import bignum
from .core import GenExpMap
from .errors import InvalidInput, NotGBounded, OrbitOverflow

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi


# --- external addresses -----------------------------------------------------


@dataclass(frozen=True)
class Constant:
    k: int


@dataclass(frozen=True)
class Periodic:
    block: tuple[int, ...]

    def __post_init__(self):
        if not self.block:
            raise InvalidInput("periodic tail needs a non-empty block")


@dataclass(frozen=True)
class ZeroTail:
    pass


Tail = Constant | Periodic | ZeroTail


@total_ordering
@dataclass(frozen=True)
class ExternalAddress:
    """Integer sequence given by a finite prefix followed by a tail rule."""

    prefix: tuple[int, ...] = ()
    tail: Tail = field(default_factory=ZeroTail)

    @classmethod
    def constant(cls, k: int) -> ExternalAddress:
        return cls((), Constant(int(k)))

    @classmethod
    def periodic(cls, *block: int) -> ExternalAddress:
        return cls((), Periodic(tuple(int(b) for b in block)))

    @classmethod
    def parse(cls, text: str) -> ExternalAddress:
        """Parse ``"p0,p1,...|const:k"``, ``"...|per:a,b"`` or ``"...|zero"``."""
        head, sep, rule = text.strip().partition("|")
        if not sep:
            raise InvalidInput(f"address {text!r} lacks a '|' tail rule")
        try:
            prefix = tuple(int(v) for v in head.split(",") if v.strip())
            rule = rule.strip()
            if rule == "zero":
                tail: Tail = ZeroTail()
            elif rule.startswith("const:"):
                tail = Constant(int(rule[6:]))
            elif rule.startswith("per:"):
                tail = Periodic(tuple(int(v) for v in rule[4:].split(",")))
            else:
                raise InvalidInput(f"unknown tail rule {rule!r}")
        except ValueError as exc:
            raise InvalidInput(f"bad address {text!r}: {exc}") from None
        return cls(prefix, tail)

    def __str__(self) -> str:
        head = ",".join(str(v) for v in self.prefix)
        if isinstance(self.tail, Constant):
            return f"{head}|const:{self.tail.k}"
        if isinstance(self.tail, Periodic):
            return f"{head}|per:" + ",".join(str(v) for v in self.tail.block)
        return f"{head}|zero"

    def entry(self, n: int) -> int:
        if n < len(self.prefix):
            return self.prefix[n]
        n -= len(self.prefix)
        if isinstance(self.tail, Constant):
            return self.tail.k
        if isinstance(self.tail, Periodic):
            return self.tail.block[n % len(self.tail.block)]
        return 0

    def entries(self, n: int) -> list[int]:
        return [self.entry(j) for j in range(n)]

    def __iter__(self):
        j = 0
        while True:
            yield self.entry(j)
            j += 1

    def shift(self) -> ExternalAddress:
        if self.prefix:
            return ExternalAddress(self.prefix[1:], self.tail)
        if isinstance(self.tail, Periodic):
            b = self.tail.block
            return ExternalAddress((), Periodic(b[1:] + b[:1]))
        return self

    def prepend(self, k: int) -> ExternalAddress:
        return ExternalAddress((int(k),) + self.prefix, self.tail)

    @property
    def _horizon(self) -> int:
        period = len(self.tail.block) if isinstance(self.tail, Periodic) else 1
        return len(self.prefix) + period

    def sup_abs(self, start: int = 0) -> int:
        """``max |s_n|`` over ``n >= start``."""
        stop = max(start, len(self.prefix)) + self._horizon
        return max(abs(v) for v in islice(self, start, stop))

    def __lt__(self, other: ExternalAddress) -> bool:
        return compare_lex(self, other) < 0


def compare_lex(s: ExternalAddress, t: ExternalAddress) -> int:
    """Lexicographic comparison; returns -1, 0 or 1."""
    period = 1
    for tail in (s.tail, t.tail):
        if isinstance(tail, Periodic):
            period = math.lcm(period, len(tail.block))
    for a, b in islice(zip(s, t), max(len(s.prefix), len(t.prefix)) + period):
        if a != b:
            return -1 if a < b else 1
    return 0


# --- tracts -----------------------------------------------------------------


@dataclass(frozen=True)
class NotInTract:
    reason: str  # "left_of_M", "gap_strip" or "boundary"


def tract_of(fmap: GenExpMap, z) -> int | NotInTract:
    """Index ``k`` of the tract ``{Re > M, |Im - 2 pi k| < pi/2}`` containing ``z``."""
    re, im = (z.real, z.imag) if isinstance(z, complex) else z
    if not bignum.big_gt(re, fmap.M):
        return NotInTract("left_of_M")
    k = round(im / TWO_PI)
    d = abs(im - TWO_PI * k)
    if d < HALF_PI:
        return int(k)
    if d == HALF_PI:
        return NotInTract("boundary")
    return NotInTract("gap_strip")


@dataclass(frozen=True)
class PartialAddress:
    prefix: tuple[int, ...]
    status: str  # "all_in_tracts", "left_tract" or "overflow"
    left_at: int | None = None


def partial_address(fmap: GenExpMap, z, N: int) -> PartialAddress:
    """Tract indices of ``z, f(z), ...`` for up to ``N`` iterates.

    Real parts beyond double range are carried as towers; the orbit stops
    with status ``overflow`` if its imaginary part can no longer be held.
    """
    re, im = (z.real, z.imag) if isinstance(z, complex) else z
    out: list[int] = []
    for n in range(N):
        k = tract_of(fmap, (re, im))
        if isinstance(k, NotInTract):
            return PartialAddress(tuple(out), "left_tract", n)
        out.append(k)
        if n + 1 < N:
            try:
                re, im = fmap.f_big(re, im)
            except OrbitOverflow:
                return PartialAddress(tuple(out), "overflow", n + 1)
    return PartialAddress(tuple(out), "all_in_tracts")


# --- g-boundedness ----------------------------------------------------------


@dataclass(frozen=True)
class GBoundedness:
    verdict: str  # "bounded" or "inconclusive"
    x0: float | None = None
    certified_from: int | None = None


def _iterate_bounds(g, ineq, tail_ok, x: float, n_max: int) -> int | None:
    """First ``n`` from which the bound is certified for good, or ``None``."""
    v: bignum.Big = x
    for n in range(n_max):
        if not ineq(n, v):
            return None
        if tail_ok(n, v):
            return n
        v = g(v)
    return None


def _big_g(fmap: GenExpMap, scale: float = 1.0):
    alpha, lam, x_tail = fmap.growth.tail

    def step(v: bignum.Big) -> bignum.Big:
        if isinstance(v, bignum.Tower) or (v > x_tail and alpha + lam * v > bignum.LOG_CUTOFF):
            return bignum.big_affine(bignum.big_exp(bignum.big_affine(v, lam, alpha)), scale, 0.0)
        return scale * fmap.growth.g(v)

    return step


def _escaping_from(fmap: GenExpMap, v: bignum.Big, scale: float = 1.0) -> bool:
    """``scale*g(x) > x`` and ``(scale*g)' >= 1`` at ``v``, hence ``scale*g(x) > x`` for all ``x >= v``."""
    if isinstance(v, bignum.Tower):
        return True
    if not math.isfinite(v):
        return v > 0
    gv = scale * fmap.growth.g(v)
    return gv > v and scale * fmap.growth.g_prime(v) >= 1.0


def _minimal_x(check, lo: float, hi: float, tol: float = 1e-9) -> float | None:
    if check(lo):
        return lo
    if not check(hi):
        return None
    while hi - lo > tol * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        if check(mid):
            hi = mid
        else:
            lo = mid
    return hi


def is_g_bounded(fmap: GenExpMap, addr: ExternalAddress, N: int = 64, x_max: float = 1e3) -> GBoundedness:
    """Search the smallest ``x0`` in ``[0, x_max]`` with ``2 pi |s_n| <= g^n(x0)`` for all ``n``.

    A witness is accepted once some iterate ``v = g^n(x0)`` dominates every
    later entry and lies where ``g(x) > x`` for good, so that the bound
    persists for all later ``n``.
    """
    if N < 1:
        raise InvalidInput("N must be at least 1")
    g = _big_g(fmap)
    n_max = len(addr.prefix) + addr._horizon + N

    def ineq(n, v):
        return bignum.big_ge(v, TWO_PI * abs(addr.entry(n)))

    def tail_ok(n, v):
        sup = addr.sup_abs(n)
        return sup == 0 or (bignum.big_ge(v, TWO_PI * sup) and _escaping_from(fmap, v))

    def check(x):
        return _iterate_bounds(g, ineq, tail_ok, x, n_max) is not None

    x0 = _minimal_x(check, 0.0, float(x_max))
    if x0 is None:
        return GBoundedness("inconclusive")
    return GBoundedness("bounded", x0, _iterate_bounds(g, ineq, tail_ok, x0, n_max))


# --- shadowing squares ------------------------------------------------------


@dataclass(frozen=True)
class ShadowParams:
    address: ExternalAddress
    kappa: float
    delta: float
    x0_pp: float
    r0: float
    r_seq: tuple[bignum.Big, ...]

    @property
    def squares(self) -> list[tuple[bignum.Big, float]]:
        """Bottom-left corners of the closed squares ``D_n`` of side ``2 pi``."""
        return [(r, (4 * self.address.entry(n) - 1) * HALF_PI) for n, r in enumerate(self.r_seq)]


def build_shadow_params(
    fmap: GenExpMap, addr: ExternalAddress, N: int, r0: float | None = None
) -> ShadowParams:
    """Constants and squares ``D_0 .. D_N`` for a g-bounded address.

    ``kappa`` and ``delta`` sit at half of their admissible ranges. Passing
    ``r0`` overrides the computed starting radius (used to probe failures).
    """
    gb = is_g_bounded(fmap, addr, max(N, 1))
    if gb.verdict != "bounded":
        raise NotGBounded(f"address {addr} has no g-boundedness witness")
    ratio2 = (fmap.growth.c / fmap.curve.h_min) ** 2
    kappa = min(0.5 * math.sqrt(ratio2 - 1.0), 1e3)
    delta = 0.5 * (math.sqrt(ratio2 - kappa**2) - 1.0)
    h_min = fmap.curve.h_min
    gt = _big_g(fmap, h_min)
    n_max = N + 1 + addr._horizon

    def ineq(n, v):
        return bignum.big_ge(bignum.big_affine(v, kappa, 0.0), max(1.5 * math.pi, 2.0 * TWO_PI * abs(addr.entry(n))))

    def tail_ok(n, v):
        need = max(1.5 * math.pi, 2.0 * TWO_PI * addr.sup_abs(n))
        return bignum.big_ge(bignum.big_affine(v, kappa, 0.0), need) and _escaping_from(fmap, v, h_min)

    x0_pp = _minimal_x(lambda x: _iterate_bounds(gt, ineq, tail_ok, x, n_max) is not None, 0.0, 1e3)
    if x0_pp is None:
        raise NotGBounded("no x0'' found on [0, 1000]")
    if r0 is None:
        r0 = max(fmap.M, x0_pp, (TWO_PI + fmap.a) / delta)
        r0 = r0 + 1e-6 * max(1.0, abs(r0))
        while not r0 + fmap.a > fmap.growth.g(fmap.M):
            r0 += 1.0
    r_seq: list[bignum.Big] = [float(r0)]
    for _ in range(N):
        r_seq.append(gt(r_seq[-1]))
    return ShadowParams(addr, kappa, delta, x0_pp, float(r0), tuple(r_seq))


@dataclass(frozen=True)
class ShadowLevel:
    n: int
    ok: bool
    method: str  # "absolute" or "relative"
    max_escape: float
    outside_H: int
    annulus_ok: bool


ABSOLUTE_LIMIT = 1e12
_MEMBER_TOL = 1e-9


def _square_boundary(per_side: int) -> tuple[np.ndarray, np.ndarray]:
    """Offsets ``(u, v)`` in ``[0, 2pi]^2`` tracing the square's boundary."""
    s = np.linspace(0.0, TWO_PI, per_side, endpoint=False)
    zeros, full = np.zeros_like(s), np.full_like(s, TWO_PI)
    u = np.concatenate([s, full, TWO_PI - s, zeros])
    v = np.concatenate([zeros, s, full, TWO_PI - s])
    return u, v


def verify_shadowing(fmap: GenExpMap, params: ShadowParams, N: int, per_side: int = 256) -> list[ShadowLevel]:
    """Check ``f(D_n) ⊃ D_{n+1}`` by pulling back the boundary of ``D_{n+1}``.

    The pullback uses the inverse branch onto ``T_{s_n}``; every preimage
    must land in the closed square ``D_n``. While ``r_{n+1}`` is moderate the
    branch is applied to the sampled points themselves. Beyond that the
    points are written as ``r_{n+1}(1 + t + i s)`` and the preimage's offset
    from ``r_n`` is computed from the log-affine tail of ``g``, which keeps the
    check meaningful when ``r_n`` no longer fits in a double.
    """
    from .pullback import inverse_branch

    u, v = _square_boundary(per_side)
    alpha, lam, x_tail = fmap.growth.tail
    h_min, c = fmap.curve.h_min, fmap.growth.c
    report: list[ShadowLevel] = []
    for n in range(min(N, len(params.r_seq) - 1)):
        s_n, s_next = params.address.entry(n), params.address.entry(n + 1)
        r_n, r_next = params.r_seq[n], params.r_seq[n + 1]
        y_lo = (4 * s_n - 1) * HALF_PI
        v_next = (4 * s_next - 1) * HALF_PI + v
        outside = 0
        if not isinstance(r_next, bignum.Tower) and r_next <= ABSOLUTE_LIMIT:
            method = "absolute"
            w = r_next + u + 1j * v_next
            in_h = fmap.in_H(w, closure=True)
            outside = int(np.count_nonzero(~in_h))
            z = inverse_branch(fmap, s_n, w[in_h], check=False)
            dx, dy = z.real - r_n, z.imag - y_lo
        else:
            method = "relative"
            if not bignum.big_ge(r_n, x_tail):
                raise InvalidInput(f"level {n} lies left of the log-affine tail of g")
            rf = bignum.to_float(r_next)
            t = (fmap.a + u) / rf
            s = v_next / rf
            theta = np.arctan2(s, 1.0 + t)
            yp = fmap.curve.arg_inverse(theta)
            ell = 0.5 * np.log1p(2.0 * t + t * t + s * s)
            dx = (math.log(h_min) + ell - np.log(np.abs(fmap.curve.base(yp)))) / lam
            dy = yp + TWO_PI * s_n - y_lo
        inside = (dx >= -_MEMBER_TOL) & (dx <= TWO_PI + _MEMBER_TOL) & (dy >= -_MEMBER_TOL) & (dy <= TWO_PI + _MEMBER_TOL)
        escape = np.maximum.reduce([-dx, dx - TWO_PI, -dy, dy - TWO_PI]) if dx.size else np.zeros(1)
        # Annulus variant: D_{n+1} between radii h_min g(r_n) and c g(r_n), which
        # f(D_n) covers only if h_min g(r_n) >= g(r_n) max|h| and c g(r_n) <= h_min g(r_n + 2 pi).
        growth_ok = _period_ratio(fmap, r_n) * h_min >= c
        annulus_ok = bool(h_min >= 1.0 and growth_ok)
        report.append(
            ShadowLevel(n, bool(np.all(inside)) and outside == 0, method, float(np.max(escape)), outside, annulus_ok)
        )
    return report


def _period_ratio(fmap: GenExpMap, r: bignum.Big) -> float:
    alpha, lam, x_tail = fmap.growth.tail
    if isinstance(r, bignum.Tower) or r >= x_tail:
        return math.exp(lam * TWO_PI)
    return math.exp(fmap.growth.log_g(r + TWO_PI) - fmap.growth.log_g(r))
