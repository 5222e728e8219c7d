"""Generalised exponential maps ``f(z) = g(Re z) h(Im z) - a`` and their constants."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import bignum
from .bignum import Big, Tower
from .curve import ValidatedCurve
from .errors import (
    CertificationFailed,
    InvalidInput,
    NoConvergence,
    NoSuchM,
    NotCertified,
    NotDifferentiableHere,
    OrbitOverflow,
)
from .growth import GrowthProfile

SCAN_RANGE = (-1.0e3, 1.0e3)
SCAN_TOL = 1e-9
K_MAX_Q = 64
CERTIFIED = "certified"
UNCERTIFIED = "uncertified"


@dataclass(frozen=True)
class DerivedConstants:
    mu: float
    M: float
    m: float
    a_min: float
    L: float
    h_min: float
    c_h: float
    c: float
    xi: complex | None = None
    K: float | None = None

    def as_dict(self) -> dict[str, float | complex | None]:
        return {
            "mu": self.mu,
            "M": self.M,
            "m": self.m,
            "a_min": self.a_min,
            "xi": self.xi,
            "K": self.K,
            "L": self.L,
            "h_min": self.h_min,
            "c_h": self.c_h,
            "c": self.c,
        }


def _threshold_up(pred, lo: float, hi: float) -> float:
    """Smallest ``x`` in ``[lo, hi]`` where a monotone-upward predicate holds, rounded up."""
    while hi - lo > SCAN_TOL * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _threshold_down(pred, lo: float, hi: float) -> float:
    """Largest ``x`` in ``[lo, hi]`` where a monotone-downward predicate holds, rounded down."""
    while hi - lo > SCAN_TOL * max(1.0, abs(lo)):
        mid = 0.5 * (lo + hi)
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return lo


def compute_constants(
    curve: ValidatedCurve, growth: GrowthProfile, mu_target: float = 2.0, strict: bool = True
) -> DerivedConstants:
    """Expansion threshold ``M``, contraction threshold ``m`` and ``a_min``.

    ``M`` is where ``c_h * min(g, g')`` first reaches ``mu_target``; ``m`` is
    the last point where ``g + g' <= 1/(2(1 + L))``. Both expressions are
    monotone, so each is found by bisection on ``[-1e3, 1e3]``.
    """
    if not mu_target > 1.0:
        raise InvalidInput(f"mu_target must exceed 1, got {mu_target}")
    if strict and not growth.c > 1.0 / curve.h_min:
        raise CertificationFailed(
            f"growth constant c = {growth.c:.6g} does not exceed 1/h_min = {1.0 / curve.h_min:.6g}"
        )
    c_h, L = curve.c_h, curve.lip_upper
    lo, hi = SCAN_RANGE

    def expanding(x: float) -> bool:
        return c_h * min(growth.g(x), growth.g_prime(x)) >= mu_target

    if not expanding(hi):
        raise NoSuchM(f"c_h * min(g, g') never reaches {mu_target} on [{lo}, {hi}]")
    M = lo if expanding(lo) else _threshold_up(expanding, lo, hi)
    M = max(M, 0.0)

    bound = 1.0 / (2.0 * (1.0 + L))

    def contracting(x: float) -> bool:
        return growth.g(x) + growth.g_prime(x) <= bound

    if not contracting(lo):
        raise NoSuchM(f"g + g' stays above {bound:.6g} on [{lo}, {hi}]")
    m = 0.0 if contracting(0.0) else _threshold_down(contracting, lo, 0.0)
    m = min(m, -SCAN_TOL)

    gM = growth.g(M)
    a_min = max(0.0, gM - m, gM - M)
    return DerivedConstants(
        mu=float(mu_target), M=M, m=m, a_min=a_min, L=L, h_min=curve.h_min, c_h=c_h, c=growth.c
    )


@dataclass(frozen=True, eq=False)
class GenExpMap:
    curve: ValidatedCurve
    growth: GrowthProfile
    a: float
    constants: DerivedConstants
    certified: bool
    mode: str = CERTIFIED

    @property
    def M(self) -> float:
        return self.constants.M

    @property
    def m(self) -> float:
        return self.constants.m

    @property
    def mu(self) -> float:
        return self.constants.mu

    @property
    def xi(self) -> complex:
        return self.constants.xi

    @property
    def K(self) -> float:
        return self.constants.K

    def Z(self, z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(over="ignore", invalid="ignore"):
            out = self.growth.g(z.real) * self.curve.h(z.imag)
        return complex(out) if np.ndim(out) == 0 else out

    def f(self, z):
        out = self.Z(z) - self.a
        return complex(out) if np.ndim(out) == 0 else out

    def jacobian(self, z) -> np.ndarray:
        """Real 2x2 derivative of ``Z`` (equivalently ``f``) at ``z``; stacks for arrays."""
        z = np.asarray(z, dtype=complex)
        x, y = z.real, z.imag
        bps = self.growth.breakpoints
        if bps.size and np.any(np.isin(x, bps)):
            raise NotDifferentiableHere("g has a breakpoint at Re z")
        h = self.curve.h(y)
        hp = self.curve.h_prime(y)
        g, gp = self.growth.g(x), self.growth.g_prime(x)
        return np.stack(
            [
                np.stack([gp * np.real(h), g * np.real(hp)], -1),
                np.stack([gp * np.imag(h), g * np.imag(hp)], -1),
            ],
            -2,
        )

    def in_H(self, w, closure: bool = False, rtol: float = 1e-12):
        """Membership in ``H = f(T_0)``, read off the polar form of ``w + a``."""
        zeta = np.asarray(w, dtype=complex) + self.a
        yp = self.curve.arg_inverse(np.angle(zeta))
        radius = self.growth.g(self.M) * np.abs(self.curve.base(yp))
        mod = np.abs(zeta)
        if closure:
            out = (zeta.real >= 0) & (mod >= radius * (1.0 - rtol))
        else:
            out = (zeta.real > 0) & (mod > radius)
        return bool(out) if np.ndim(out) == 0 else out

    def f_big(self, re: Big, im: float) -> tuple[Big, float]:
        """One step of ``f`` on a point whose real part may be a :class:`Tower`."""
        alpha, lam, x_tail = self.growth.tail
        h = self.curve.h(im)
        if isinstance(re, Tower) or (re > x_tail and alpha + lam * re > bignum.LOG_CUTOFF):
            G = bignum.big_exp(bignum.big_affine(re, lam, alpha))
        else:
            G = self.growth.g(re)
        if isinstance(G, Tower) or math.isinf(G):
            if h.imag != 0.0:
                raise OrbitOverflow("imaginary part of the orbit exceeds double range")
            return bignum.big_affine(G, h.real, -self.a), 0.0
        return bignum.big_affine(G, h.real, -self.a), G * h.imag


def min_singular_value(J: np.ndarray):
    out = np.linalg.svd(J, compute_uv=False)[..., -1]
    return float(out) if np.ndim(out) == 0 else out


def operator_norm(J: np.ndarray):
    out = np.linalg.svd(J, compute_uv=False)[..., 0]
    return float(out) if np.ndim(out) == 0 else out


def find_fixed_point(fmap: GenExpMap, strict: bool = True, tol: float = 1e-12, max_iter: int = 10_000) -> complex:
    """Attracting fixed point by iterating ``f`` from ``m``.

    For a certified map ``f`` is a 1/2-contraction of ``{Re z <= m}``.
    """
    if strict and not fmap.certified:
        raise NotCertified(f"a = {fmap.a} does not exceed a_min = {fmap.constants.a_min:.12g}")
    z = complex(fmap.m, 0.0)
    for _ in range(max_iter):
        nz = fmap.f(z)
        if abs(nz - z) <= tol:
            z = nz
            break
        z = nz
    else:
        raise NoConvergence(f"fixed-point iteration did not settle in {max_iter} steps")
    if not abs(fmap.f(z) - z) <= 1e-9:
        raise NoConvergence(f"fixed-point residual {abs(fmap.f(z) - z):.3g} exceeds 1e-9")
    return z


def compute_headstart_K(fmap: GenExpMap) -> float:
    """Head-start constant ``K``: smallest ``q`` meeting the estimates for large and small real parts.

    ``K = 2 pi q`` except that ``K`` is raised, if needed, so that
    ``Re z1 >= K Re z0`` forces a gap of ``2 pi q`` between the real parts
    for every ``z0`` whose image can lie in a tract.
    """
    c, h_min, a, M = fmap.growth.c, fmap.curve.h_min, fmap.a, fmap.M
    gM = fmap.growth.g(M)
    x_img = fmap.growth.invert(a + M)
    for q in range(1, K_MAX_Q + 1):
        K = 2.0 * math.pi * q
        if x_img > 0:
            K = max(K, 1.0 + 2.0 * math.pi * q / x_img)
        cq = c ** q if q * math.log(c) < 700 else math.inf
        big_case = 0.5 * h_min * cq - 1.0 - K
        small_case = h_min * cq * gM / (2.0 * a) - K
        if x_img > 0 and big_case * 2.0 * a >= a + math.pi and small_case * M >= 3.0 * a + math.pi:
            return K
    raise NoConvergence(f"no head-start constant found with q <= {K_MAX_Q}")


def build_map(
    curve: ValidatedCurve,
    growth: GrowthProfile,
    a: float,
    mu_target: float = 2.0,
    mode: str = CERTIFIED,
) -> GenExpMap:
    """Assemble ``f`` and fill in every derived constant.

    In ``uncertified`` mode all constants are still computed, but a map with
    ``a <= a_min`` (or ``c <= 1/h_min``) is accepted and flagged.
    """
    if not a > 0:
        raise InvalidInput("a must be positive")
    if mode not in (CERTIFIED, UNCERTIFIED):
        raise InvalidInput(f"mode must be {CERTIFIED!r} or {UNCERTIFIED!r}")
    strict = mode == CERTIFIED
    consts = compute_constants(curve, growth, mu_target, strict=strict)
    certified = growth.c > 1.0 / curve.h_min and a > consts.a_min
    if strict and not certified:
        raise NotCertified(f"a = {a} does not exceed a_min = {consts.a_min:.12g}")
    fmap = GenExpMap(curve, growth, float(a), consts, certified, mode)
    try:
        xi = find_fixed_point(fmap, strict=False)
    except NoConvergence:
        if strict:
            raise
        xi = None
    fmap = replace(fmap, constants=replace(consts, xi=xi))
    try:
        K = compute_headstart_K(fmap)
    except NoConvergence:
        if strict:
            raise
        K = None
    return replace(fmap, constants=replace(fmap.constants, K=K))
