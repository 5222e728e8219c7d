"""Basin classification on pixel grids and the image/CSV writers."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import GenExpMap
from .curve import reduce_parameter
from .errors import InvalidInput, InvalidWindow, IoFailure, ResolutionTooLarge

MAX_PIXELS = 10**8
J_CANDIDATE = -1

ATTRACTED = "attracted_certified"
J_CAND = "j_candidate"


@dataclass(frozen=True)
class Classification:
    verdict: str  # ATTRACTED or J_CAND
    n: int  # entry step, or the iteration budget for a J-candidate
    entry_re: float  # Re f^n(z) at entry; nan for a J-candidate

    @property
    def attracted(self) -> bool:
        return self.verdict == ATTRACTED


@dataclass(frozen=True)
class GridJob:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    width: int
    height: int
    max_iter: int

    def __post_init__(self):
        box = (self.x_min, self.x_max, self.y_min, self.y_max)
        if not all(math.isfinite(v) for v in box):
            raise InvalidWindow("window bounds must be finite")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise InvalidWindow(f"window {box} has zero or negative area")
        if self.width < 1 or self.height < 1:
            raise InvalidInput("resolution must be at least 1x1")
        if self.width * self.height > MAX_PIXELS:
            raise ResolutionTooLarge(f"{self.width}x{self.height} exceeds {MAX_PIXELS} pixels")
        if self.max_iter < 1:
            raise InvalidInput("max_iter must be at least 1")

    def columns(self) -> np.ndarray:
        dx = (self.x_max - self.x_min) / self.width
        return self.x_min + (np.arange(self.width) + 0.5) * dx

    def rows(self) -> np.ndarray:
        """Imaginary parts of pixel centres; row 0 is the top of the image."""
        dy = (self.y_max - self.y_min) / self.height
        return self.y_max - (np.arange(self.height) + 0.5) * dy

    def pixel_centres(self, row_lo: int = 0, row_hi: int | None = None) -> np.ndarray:
        ys = self.rows()[row_lo:row_hi]
        return self.columns()[None, :] + 1j * ys[:, None]


@dataclass(frozen=True, eq=False)
class ClassGrid:
    job: GridJob
    steps: np.ndarray  # entry step per pixel, J_CANDIDATE where not certified
    entry_re: np.ndarray
    certified: bool

    def __eq__(self, other) -> bool:
        if not isinstance(other, ClassGrid):
            return NotImplemented
        return (
            self.job == other.job
            and self.certified == other.certified
            and np.array_equal(self.steps, other.steps)
            and np.array_equal(self.entry_re, other.entry_re, equal_nan=True)
        )

    @property
    def j_candidates(self) -> np.ndarray:
        return self.steps == J_CANDIDATE

    def at(self, row: int, col: int) -> Classification:
        n = int(self.steps[row, col])
        if n == J_CANDIDATE:
            return Classification(J_CAND, self.job.max_iter, math.nan)
        return Classification(ATTRACTED, n, float(self.entry_re[row, col]))


def classify_orbits(fmap: GenExpMap, z, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Entry steps into ``{Re <= M}`` for an array of starting points.

    Points are checked before each of ``N`` applications of ``f`` and once
    after the last. An orbit whose iterate overflows to a non-finite value
    with ``Re > M`` is kept as a J-candidate.
    """
    z = np.asarray(z, dtype=complex).ravel()
    steps = np.full(z.shape, J_CANDIDATE, dtype=np.int32)
    entry = np.full(z.shape, np.nan)
    active = np.arange(z.size)
    x, y = z.real.copy(), z.imag.copy()
    M, a = fmap.M, fmap.a
    growth, curve = fmap.growth, fmap.curve
    for k in range(N + 1):
        hit = x <= M
        if np.any(hit):
            steps[active[hit]] = k
            entry[active[hit]] = x[hit]
        keep = ~hit & np.isfinite(x) & np.isfinite(y)
        active, x, y = active[keep], x[keep], y[keep]
        if k == N or active.size == 0:
            break
        with np.errstate(over="ignore", invalid="ignore"):
            gx = growth.g(x)
            yp, sign = reduce_parameter(y)
            h = sign * curve.base(yp)
            x, y = gx * h.real - a, gx * h.imag
    return steps, entry


def classify_point(fmap: GenExpMap, z, N: int) -> Classification:
    if N < 1:
        raise InvalidInput("N must be at least 1")
    steps, entry = classify_orbits(fmap, np.array([complex(z)]), N)
    if steps[0] == J_CANDIDATE:
        return Classification(J_CAND, N, math.nan)
    return Classification(ATTRACTED, int(steps[0]), float(entry[0]))


def _render_rows(args) -> tuple[np.ndarray, np.ndarray]:
    fmap, job, lo, hi = args
    z = job.pixel_centres(lo, hi)
    steps, entry = classify_orbits(fmap, z, job.max_iter)
    return steps.reshape(z.shape), entry.reshape(z.shape)


def render_grid(fmap: GenExpMap, job: GridJob, workers: int = 1) -> ClassGrid:
    """Classify every pixel centre; the result does not depend on ``workers``."""
    if workers <= 1 or job.height < 2:
        steps, entry = _render_rows((fmap, job, 0, job.height))
    else:
        bounds = np.linspace(0, job.height, min(workers * 4, job.height) + 1).astype(int)
        chunks = [(fmap, job, int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_render_rows, chunks))
        steps = np.concatenate([p[0] for p in parts])
        entry = np.concatenate([p[1] for p in parts])
    return ClassGrid(job, steps, entry, fmap.certified)


def shade(steps: np.ndarray, max_iter: int) -> np.ndarray:
    """Grey level per pixel: white at step 0, darker with later entry, black for J-candidates."""
    steps = np.asarray(steps, dtype=np.int64)
    level = 255 - (255 * np.maximum(steps, 0)) // (max_iter + 1)
    return np.where(steps == J_CANDIDATE, 0, level).astype(np.uint8)


def encode_ppm(grid: ClassGrid) -> bytes:
    """Binary P6 image; maps outside the certified regime carry a comment line."""
    if grid.steps.size == 0:
        raise InvalidInput("cannot write an empty image")
    h, w = grid.steps.shape
    grey = shade(grid.steps, grid.job.max_iter)
    rgb = np.repeat(grey[:, :, None], 3, axis=2)
    comment = b"" if grid.certified else b"# uncertified\n"
    return b"P6\n" + comment + f"{w} {h}\n255\n".encode("ascii") + rgb.tobytes()


def write_image(grid: ClassGrid, path) -> None:
    data = encode_ppm(grid)
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from None


GRID_HEADER = ["row", "col", "re", "im", "step", "entry_re"]


def write_csv(grid: ClassGrid, path) -> None:
    """One record per pixel; floats are written with ``repr`` so they read back exactly."""
    job = grid.job
    xs, ys = job.columns(), job.rows()
    try:
        with open(path, "w", newline="") as fh:
            fh.write(
                f"# window={job.x_min!r},{job.x_max!r},{job.y_min!r},{job.y_max!r} "
                f"res={job.width}x{job.height} max_iter={job.max_iter} "
                f"certified={int(grid.certified)}\n"
            )
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(GRID_HEADER)
            for i in range(job.height):
                for j in range(job.width):
                    out.writerow(
                        [i, j, repr(float(xs[j])), repr(float(ys[i])), int(grid.steps[i, j]), repr(float(grid.entry_re[i, j]))]
                    )
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from None


def read_csv(path) -> ClassGrid:
    try:
        with open(path, newline="") as fh:
            meta = dict(item.split("=", 1) for item in fh.readline()[1:].split())
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from None
    x0, x1, y0, y1 = (float(v) for v in meta["window"].split(","))
    w, h = (int(v) for v in meta["res"].split("x"))
    job = GridJob(x0, x1, y0, y1, w, h, int(meta["max_iter"]))
    steps = np.full((h, w), J_CANDIDATE, dtype=np.int32)
    entry = np.full((h, w), np.nan)
    for r in rows:
        i, j = int(r["row"]), int(r["col"])
        steps[i, j] = int(r["step"])
        entry[i, j] = float(r["entry_re"])
    return ClassGrid(job, steps, entry, meta["certified"] == "1")


TRACE_HEADER = ["t", "re", "im", "depth_used"]


def write_trace_csv(trace, path) -> None:
    """Hair samples as ``t, re, im, depth_used``; the ``t = 0`` row is the endpoint."""
    try:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(TRACE_HEADER)
            for t, z in zip(trace.t.tolist(), trace.z.tolist()):
                out.writerow([repr(t), repr(z.real), repr(z.imag), trace.depth])
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from None


def read_trace_csv(path) -> list[tuple[float, complex, int]]:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from None
    return [(float(r["t"]), complex(float(r["re"]), float(r["im"])), int(r["depth_used"])) for r in rows]
