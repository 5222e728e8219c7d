"""Positive reals too large for a double, stored as iterated exponentials.

Escaping orbits of an exponential-type map grow like towers: the real
0-hair of ``e^z - 5`` passes ``1e6`` at the second iterate and
``exp(1e6)`` at the third. ``Tower(level, value)`` stands for
``exp(exp(...exp(value)))`` with ``level`` exponentials, normalised so that
``value > LOG_CUTOFF``; anything smaller is kept as a plain float.

Only the operations needed by the map's log-affine tail are provided. At
level 2 and above an additive change to ``log X`` of order one is below
double resolution, so affine maps act trivially there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

LOG_CUTOFF = 700.0


@dataclass(frozen=True)
class Tower:
    level: int
    value: float

    def __float__(self) -> float:
        return math.inf


Big = Union[float, Tower]


def _norm(level: int, value: float) -> Big:
    while level > 0 and value <= LOG_CUTOFF:
        value = math.exp(value)
        level -= 1
    return Tower(level, value) if level > 0 else value


def big_exp(x: Big) -> Big:
    if isinstance(x, Tower):
        return Tower(x.level + 1, x.value)
    if x <= LOG_CUTOFF:
        return math.exp(x)
    if math.isinf(x):
        raise OverflowError("cannot exponentiate an infinite float; use Tower")
    return Tower(1, x)


def big_log(x: Big) -> Big:
    if isinstance(x, Tower):
        return _norm(x.level - 1, x.value)
    return math.log(x)


def big_affine(x: Big, scale: float, shift: float) -> Big:
    """``scale * x + shift``; a huge negative result collapses to ``-inf``."""
    if not isinstance(x, Tower):
        out = scale * x + shift
        if math.isfinite(out) or not math.isfinite(x):
            return out
        if out < 0:
            return -math.inf
        return _norm(1, math.log(scale) + math.log(x))
    if scale == 0:
        return shift
    if scale < 0:
        return -math.inf
    if x.level == 1:
        return _norm(1, x.value + math.log(scale))
    return x


def key(x: Big) -> tuple[int, float]:
    """Sort key consistent with the numeric order."""
    if isinstance(x, Tower):
        return (x.level, x.value)
    return (0, x)


def big_gt(x: Big, y: Big) -> bool:
    return key(x) > key(y)


def big_ge(x: Big, y: Big) -> bool:
    return key(x) >= key(y)


def to_float(x: Big) -> float:
    return math.inf if isinstance(x, Tower) else float(x)


def big_str(x: Big) -> str:
    if isinstance(x, Tower):
        return "exp^" + str(x.level) + "(" + repr(x.value) + ")"
    return repr(x)
