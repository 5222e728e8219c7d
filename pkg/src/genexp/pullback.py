"""Inverse branches of ``f`` on the tracts and everything built from them."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bignum
from .bignum import Big, Tower
from .core import GenExpMap
from .errors import AddressMismatch, NoConvergence, NotGBounded, NotInH, OrbitOverflow
from .symbolic import ExternalAddress, NotInTract, is_g_bounded, partial_address, tract_of

TWO_PI = 2.0 * math.pi
MAX_ENDPOINT_LEVELS = 200
ABS_LIMIT = 1e300


def inverse_branch(fmap: GenExpMap, k, w, check: bool = True):
    """Preimage of ``w`` under ``f`` restricted to the closed tract ``T_k``.

    With ``zeta = w + a``: ``y' = arg_inverse(arg zeta)``, ``y = y' + 2 pi k``
    and ``x = g^{-1}(|zeta| / |h(y')|)``. Works elementwise on arrays.
    """
    w = np.asarray(w, dtype=complex)
    if check:
        ok = fmap.in_H(w, closure=True)
        if not np.all(ok):
            bad = w if w.ndim == 0 else w[~np.asarray(ok)][0]
            raise NotInH(f"w = {complex(bad)} is not in the closure of H")
    zeta = w + fmap.a
    yp = fmap.curve.arg_inverse(np.angle(zeta))
    x = fmap.growth.invert_log(np.log(np.abs(zeta)) - np.log(np.abs(fmap.curve.base(yp))))
    out = x + 1j * (yp + TWO_PI * np.asarray(k))
    return complex(out) if np.ndim(out) == 0 else out


def inverse_branch_big(fmap: GenExpMap, k: int, re: Big, im: float) -> tuple[Big, float]:
    """:func:`inverse_branch` for a point whose real part may be a tower."""
    if not isinstance(re, Tower) and math.isfinite(re):
        z = inverse_branch(fmap, k, complex(re, im))
        return z.real, z.imag
    # |w + a| = Re w to double precision and arg(w + a) underflows to 0.
    theta = math.atan2(im, bignum.to_float(re))
    yp = fmap.curve.arg_inverse(theta)
    alpha, lam, _ = fmap.growth.tail
    log_mod = bignum.big_log(re)
    shift = -math.log(abs(fmap.curve.base(yp))) - alpha
    x = bignum.big_affine(log_mod, 1.0 / lam, shift / lam)
    return x, yp + TWO_PI * k


def pullback_n(fmap: GenExpMap, branches, w, check: bool = True):
    """``f_{k_1}^{-1} o ... o f_{k_n}^{-1}(w)``; the last branch is applied first."""
    z = np.asarray(w, dtype=complex)
    for stage, k in enumerate(reversed(list(branches))):
        try:
            z = inverse_branch(fmap, k, z, check=check)
        except NotInH as exc:
            raise NotInH(f"pullback stage {stage} (branch {k}): {exc}") from None
    return complex(z) if np.ndim(z) == 0 else z


def endpoint_anchor(fmap: GenExpMap) -> complex:
    w = complex(fmap.growth.g(fmap.M + 1.0) + fmap.a, 0.0)
    if not fmap.in_H(w, closure=True):
        raise NotInH(f"endpoint anchor {w} is not in H")
    return w


@dataclass(frozen=True)
class Endpoint:
    z: complex
    error_bound: float
    levels: int
    anchor: complex
    gaps: tuple[float, ...]


def endpoint(fmap: GenExpMap, addr: ExternalAddress, tol: float = 1e-8) -> Endpoint:
    """Limit of ``pullback_n(s_0 .. s_{n-1}, w*)`` for a fixed anchor ``w*``.

    Successive gaps shrink at least by ``1/mu``, so stopping once a gap is
    below ``tol (mu - 1)/mu`` leaves at most ``tol`` to the limit.
    """
    if is_g_bounded(fmap, addr).verdict != "bounded":
        raise NotGBounded(f"address {addr} is not known to be g-bounded")
    mu = fmap.mu
    anchor = endpoint_anchor(fmap)
    prev = anchor
    gaps: list[float] = []
    for n in range(1, MAX_ENDPOINT_LEVELS + 1):
        e = pullback_n(fmap, addr.entries(n), anchor)
        gap = abs(e - prev)
        gaps.append(gap)
        if gap <= tol * (mu - 1.0) / mu:
            return Endpoint(e, gap / (mu - 1.0), n, anchor, tuple(gaps))
        prev = e
    raise NoConvergence(f"endpoint not converged after {MAX_ENDPOINT_LEVELS} levels")


RAY = "ray"
POTENTIAL = "potential"


@dataclass(frozen=True)
class HairTrace:
    address: ExternalAddress
    depth: int
    anchors: str  # RAY or POTENTIAL
    t: np.ndarray
    z: np.ndarray
    endpoint_estimate: complex
    cauchy_gap: float
    first_gap: float
    anchor_base: float
    sample_gaps: np.ndarray
    stages: tuple[np.ndarray, ...]  # f^j of the samples for j = 0 .. depth; inf past double range

    @property
    def samples(self) -> list[tuple[float, complex]]:
        return list(zip(self.t.tolist(), self.z.tolist()))


def potential_map(fmap: GenExpMap):
    """``G(x) = g(x) Re h(0) - a``, the real part of ``f`` on a tract midline."""
    alpha, lam, x_tail = fmap.growth.tail
    h0 = fmap.curve.h(0.0).real

    def G(x: Big) -> Big:
        if isinstance(x, Tower) or (x > x_tail and alpha + lam * x > bignum.LOG_CUTOFF):
            return bignum.big_affine(bignum.big_exp(bignum.big_affine(x, lam, alpha)), h0, -fmap.a)
        return h0 * fmap.growth.g(x) - fmap.a

    return G


def hair_anchor_base(fmap: GenExpMap) -> float:
    """Left end of the anchor parameter range.

    It is the first real part right of ``M`` from which the midline points
    of the nearby tracts lie in ``H``, pushed right of the last fixed point
    of ``G`` so that ``G^n(base + t) -> inf`` for every ``t > 0``. Anchors
    left of that fixed point would pull back onto attracted points beside
    the endpoint rather than onto the hair.
    """
    base = max(fmap.M, fmap.growth.g(fmap.M) - fmap.a) + 1e-6
    while not np.all(fmap.in_H(base + 1j * TWO_PI * np.arange(-3, 4))):
        base += 1.0
    G = potential_map(fmap)
    h0 = fmap.curve.h(0.0).real

    def escaping(x: float) -> bool:
        return G(x) > x and h0 * fmap.growth.g_prime(x) >= 1.0

    if not escaping(base):
        hi = base + 1.0
        while not escaping(hi):
            hi = base + 2.0 * (hi - base)
        lo = base
        while hi - lo > 1e-12 * max(1.0, hi):
            mid = 0.5 * (lo + hi)
            lo, hi = (lo, mid) if escaping(mid) else (mid, hi)
        base = hi
    return base


def _anchor_values(fmap: GenExpMap, x: np.ndarray, n: int, anchors: str) -> list[Big]:
    if anchors == RAY:
        return [float(v) for v in x]
    G = potential_map(fmap)
    out = []
    for v in x.tolist():
        for _ in range(n):
            v = G(v)
        out.append(v)
    return out


def _pullback_chain(fmap: GenExpMap, entries, re: list[Big], k_last: int) -> list[np.ndarray]:
    """Pull the midline points ``re + 2 pi i k_last`` back along ``entries``.

    Returns the stages ``f^j`` of the result for ``j = 0 .. len(entries)``.
    Anchors beyond double range are handled one point at a time.
    """
    im = np.full(len(re), TWO_PI * k_last)
    stages = [np.array([complex(bignum.to_float(r), i) for r, i in zip(re, im)])]
    for k in reversed(list(entries)):
        if all(not isinstance(r, Tower) and math.isfinite(r) for r in re):
            z = np.atleast_1d(inverse_branch(fmap, k, np.asarray(re, dtype=float) + 1j * im))
            re, im = z.real.tolist(), z.imag
        else:
            pairs = [inverse_branch_big(fmap, k, r, i) for r, i in zip(re, im.tolist())]
            re, im = [p[0] for p in pairs], np.array([p[1] for p in pairs])
        stages.append(np.array([complex(bignum.to_float(r), i) for r, i in zip(re, im)]))
    stages.reverse()
    return stages


def hair_points(fmap: GenExpMap, addr: ExternalAddress, depth: int, x, anchors: str = RAY) -> list[np.ndarray]:
    """Stages of the depth-``depth`` approximation of the hair points with anchor parameters ``x``.

    ``RAY`` anchors are the midline points ``x + 2 pi i s_depth``; ``POTENTIAL``
    anchors are ``G^depth(x) + 2 pi i s_depth``. Stage ``0`` holds the hair points.
    """
    if anchors not in (RAY, POTENTIAL):
        raise ValueError(f"anchors must be {RAY!r} or {POTENTIAL!r}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    re = _anchor_values(fmap, x, depth, anchors)
    return _pullback_chain(fmap, addr.entries(depth), re, addr.entry(depth))


def _one_step_gaps(fmap: GenExpMap, addr: ExternalAddress, depth: int, x: np.ndarray, anchors: str) -> float:
    """``max |f_{s_j}^{-1}(b_{j+1}) - b_j|`` over levels ``j < depth``; later pullback increments shrink from it."""
    worst = 0.0
    for j in range(depth):
        b_j = _anchor_values(fmap, x, j, anchors)
        b_next = _anchor_values(fmap, x, j + 1, anchors)
        for u, v in zip(b_j, b_next):
            if isinstance(u, Tower) or not u < ABS_LIMIT:
                continue
            re, im = inverse_branch_big(fmap, addr.entry(j), v, TWO_PI * addr.entry(j + 1))
            if isinstance(re, Tower) or not math.isfinite(re):
                continue
            worst = max(worst, abs(complex(re, im) - complex(u, TWO_PI * addr.entry(j))))
    return worst



def trace_hair(
    fmap: GenExpMap,
    addr: ExternalAddress,
    depth: int,
    t_max: float = 50.0,
    samples: int = 101,
    endpoint_tol: float = 1e-10,
    anchors: str = RAY,
) -> HairTrace:
    """Sample the hair of ``addr`` on ``t`` in ``[0, t_max]``.

    With ``RAY`` anchors the midline ray ``base + t + 2 pi i s_depth`` is
    pulled back along the first ``depth`` entries; for growing depth this
    resolves an ever shorter piece of hair next to the endpoint. With
    ``POTENTIAL`` anchors the ray is first pushed forward by ``G^depth``, so
    the samples settle on points of the hair at a fixed scale. The ``t = 0``
    sample is the endpoint in both cases.
    """
    if is_g_bounded(fmap, addr).verdict != "bounded":
        raise NotGBounded(f"address {addr} is not known to be g-bounded")
    if depth < 1:
        raise ValueError("depth must be at least 1")
    base = hair_anchor_base(fmap)
    t = np.linspace(0.0, float(t_max), int(samples))
    x = base + t
    stages = hair_points(fmap, addr, depth, x, anchors)
    z_prev = hair_points(fmap, addr, depth - 1, x, anchors)[0]
    sample_gaps = np.abs(stages[0] - z_prev)
    ep = endpoint(fmap, addr, endpoint_tol).z
    z = np.where(t == 0, ep, stages[0])
    stages[0] = z
    positive = t > 0
    gap = float(np.max(sample_gaps[positive])) if np.any(positive) else 0.0
    first = _one_step_gaps(fmap, addr, depth, x[positive], anchors)
    return HairTrace(addr, depth, anchors, t, z, ep, gap, first, base, sample_gaps, tuple(stages))


@dataclass(frozen=True)
class Accumulation:
    z_minus: complex
    z_plus: complex
    p: int
    address: tuple[int, ...]
    chain_minus: tuple[tuple[Big, float], ...]
    chain_plus: tuple[tuple[Big, float], ...]
    orbit: tuple[tuple[Big, float], ...]

    def chain_address(self, sign: int) -> tuple[int, ...]:
        chain = self.chain_plus if sign > 0 else self.chain_minus
        return tuple(tract_of_big(c) for c in chain)


def tract_of_big(point: tuple[Big, float]) -> int:
    re, im = point
    return round(im / TWO_PI)


def forward_orbit(fmap: GenExpMap, z, n: int) -> list[tuple[Big, float]]:
    re, im = (z.real, z.imag) if isinstance(z, complex) else z
    orbit: list[tuple[Big, float]] = [(re, im)]
    for _ in range(n):
        re, im = fmap.f_big(re, im)
        orbit.append((re, im))
    return orbit


def accumulate(fmap: GenExpMap, z0: complex, p: int) -> Accumulation:
    """Points ``z_p^± = phi(f^p(z0) ± 2 pi i)`` with ``phi`` the pullback along ``z0``'s orbit.

    ``f^p(z0)`` must lie in a tract so that shifting it by ``2 pi i`` moves
    it to the neighbouring tract. Huge orbit points are carried as towers.
    The pullback chains are kept: stage ``j`` of a chain is ``f^j(z_p^±)``.
    """
    z0 = complex(z0)
    if p == 0:
        return Accumulation(
            z0 - TWO_PI * 1j, z0 + TWO_PI * 1j, 0, (),
            ((z0.real, z0.imag - TWO_PI),), ((z0.real, z0.imag + TWO_PI),), ((z0.real, z0.imag),),
        )
    pa = partial_address(fmap, z0, p + 1)
    if pa.status != "all_in_tracts":
        raise AddressMismatch(f"orbit of z0 leaves the tracts before step {p + 1} ({pa.status})")
    orbit = forward_orbit(fmap, z0, p)
    chains = []
    for sign in (-1.0, 1.0):
        re, im = orbit[p]
        stage = (re, im + sign * TWO_PI)
        chain = [stage]
        for j in range(p - 1, -1, -1):
            stage = inverse_branch_big(fmap, pa.prefix[j], *stage)
            chain.append(stage)
        chain.reverse()
        chains.append(tuple(chain))
    lo, hi = chains
    z_minus = complex(bignum.to_float(lo[0][0]), lo[0][1])
    z_plus = complex(bignum.to_float(hi[0][0]), hi[0][1])
    return Accumulation(z_minus, z_plus, p, pa.prefix, lo, hi, tuple(orbit))


@dataclass(frozen=True)
class SpeedVerdict:
    verdict: str  # "z_faster", "w_faster" or "undecided"
    k: int | None = None


def speed_compare(fmap: GenExpMap, z: complex, w: complex, max_iter: int = 20) -> SpeedVerdict:
    """First ``k >= 1`` with ``Re f^k(z) > K Re f^k(w)`` (or the reverse).

    Both orbits must share their tract sequence for ``max_iter`` steps.
    """
    K = fmap.K
    za, wa = (complex(z).real, complex(z).imag), (complex(w).real, complex(w).imag)
    for k in range(max_iter + 1):
        tz, tw = tract_of(fmap, za), tract_of(fmap, wa)
        if isinstance(tz, NotInTract) or isinstance(tw, NotInTract) or tz != tw:
            raise AddressMismatch(f"orbits do not share a tract at step {k}: {tz} vs {tw}")
        if k >= 1:
            if bignum.big_gt(za[0], bignum.big_affine(wa[0], K, 0.0)):
                return SpeedVerdict("z_faster", k)
            if bignum.big_gt(wa[0], bignum.big_affine(za[0], K, 0.0)):
                return SpeedVerdict("w_faster", k)
        if k == max_iter:
            break
        try:
            za, wa = fmap.f_big(*za), fmap.f_big(*wa)
        except OrbitOverflow:
            break
    return SpeedVerdict("undecided")
