"""Command line front end: ``genexp SUBCOMMAND --config FILE [options]``.

Exit status is 0 on success, 1 for invalid input or a failed check and 2 for
runtime failures. Errors go to stderr as ``error[code]: message``.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import bignum
from .config import RunConfig, parse_config
from .errors import GenExpError, InvalidInput, IoFailure
from .pullback import accumulate, endpoint, inverse_branch, trace_hair
from .render import GridJob, classify_point, render_grid, write_csv, write_image, write_trace_csv
from .symbolic import build_shadow_params, is_g_bounded, partial_address, verify_shadowing

SUBCOMMANDS = (
    "validate", "constants", "classify", "render", "address", "hair",
    "endpoint", "admissible", "shadow-check", "accumulate",
)


class UsageError(InvalidInput):
    code = "usage"


class CheckFailed(InvalidInput):
    code = "check_failed"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _num(v: float) -> str:
    return f"{v:.12g}"


def _emit(out, key: str, value) -> None:
    if isinstance(value, float):
        value = _num(value)
    out.write(f"{key} = {value}\n")


def _emit_complex(out, key: str, z: complex) -> None:
    _emit(out, f"{key}.re", float(z.real))
    _emit(out, f"{key}.im", float(z.imag))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="genexp", description="Dynamics of generalised exponential maps f(z) = g(Re z) h(Im z) - a.")
    p.add_argument("subcommand", choices=SUBCOMMANDS, metavar="SUBCOMMAND", help=", ".join(SUBCOMMANDS))
    p.add_argument("--config", required=True, metavar="PATH")
    p.add_argument("--out", metavar="PATH", help="output file (image for render, CSV for hair)")
    p.add_argument("--csv", metavar="PATH", help="per-pixel CSV for render")
    p.add_argument("--seed", help="seed for randomized self-checks")
    p.add_argument("--mode", help="certified or uncertified")
    p.add_argument("--max-iter", dest="max_iter")
    p.add_argument("--depth")
    p.add_argument("--window", metavar="x0,x1,y0,y1")
    p.add_argument("--res", metavar="WxH")
    p.add_argument("--address", metavar="SPEC", help='e.g. "0,1|per:0,1" or "|const:0"')
    p.add_argument("--point", metavar="Z", help="complex number such as 3+0.1j")
    p.add_argument("--p", help="accumulation index")
    p.add_argument("--tol")
    p.add_argument("--t-max", dest="t_max")
    p.add_argument("--samples")
    p.add_argument("--workers")
    p.add_argument("--anchors", help="hair anchors: ray (default) or potential")
    return p


OVERRIDE_KEYS = ("seed", "mode", "max_iter", "depth", "window", "res", "address", "point", "p", "tol", "t_max", "samples", "workers", "anchors")


def load(args) -> RunConfig:
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read config {args.config}: {exc}") from None
    except UnicodeDecodeError as exc:
        raise InvalidInput(f"config is not UTF-8: {exc}") from None
    overrides = {k: getattr(args, k) for k in OVERRIDE_KEYS if getattr(args, k) is not None}
    return parse_config(text, overrides)


def _need(value, flag: str):
    if value is None:
        raise UsageError(f"this subcommand needs {flag} (flag or [run] entry)")
    return value


# --- subcommands ------------------------------------------------------------


def cmd_validate(cfg: RunConfig, args, out) -> int:
    """Report certification and run seeded spot checks of the inverse branches and the contraction."""
    fmap = cfg.fmap
    _emit(out, "mode", fmap.mode)
    _emit(out, "certified", "yes" if fmap.certified else "no")
    _emit(out, "a", float(fmap.a))
    _emit(out, "a_min", fmap.constants.a_min)
    rng = np.random.default_rng(cfg.seed)
    n = 1000
    w = fmap.a + rng.uniform(0, 100, n) + 1j * rng.uniform(-50, 50, n)
    w = w[fmap.in_H(w, closure=True)]
    k = rng.integers(-3, 4, w.size)
    err = np.abs(fmap.f(inverse_branch(fmap, k, w)) - w) / (1 + np.abs(w))
    roundtrip_ok = bool(np.all(err <= 1e-9))
    _emit(out, "roundtrip_max_rel_error", float(np.max(err)) if err.size else 0.0)
    _emit(out, "roundtrip_ok", "yes" if roundtrip_ok else "no")
    contraction_ok = True
    if fmap.certified:
        m = fmap.m
        z1 = m - rng.uniform(0, 20, n) + 1j * rng.uniform(-20, 20, n)
        z2 = m - rng.uniform(0, 20, n) + 1j * rng.uniform(-20, 20, n)
        ratio = np.abs(fmap.f(z1) - fmap.f(z2)) / np.abs(z1 - z2)
        contraction_ok = bool(np.all(ratio <= 0.5 + 1e-12))
        _emit(out, "contraction_max_ratio", float(np.max(ratio)))
        _emit(out, "contraction_ok", "yes" if contraction_ok else "no")
    if not (roundtrip_ok and contraction_ok):
        raise CheckFailed("self-checks failed")
    return 0


def cmd_constants(cfg: RunConfig, args, out) -> int:
    c = cfg.fmap.constants
    for key, value in c.as_dict().items():
        if key == "xi":
            if value is None:
                _emit(out, "xi", "none")
            else:
                _emit_complex(out, "xi", value)
        elif value is None:
            _emit(out, key, "none")
        else:
            _emit(out, key, float(value))
    _emit(out, "certified", "yes" if cfg.fmap.certified else "no")
    return 0


def cmd_classify(cfg: RunConfig, args, out) -> int:
    z = _need(cfg.run.point, "--point")
    cl = classify_point(cfg.fmap, z, cfg.run.max_iter)
    _emit(out, "verdict", cl.verdict)
    _emit(out, "n", cl.n)
    _emit(out, "entry_re", cl.entry_re)
    return 0


def cmd_render(cfg: RunConfig, args, out) -> int:
    path = _need(args.out, "--out")
    (x0, x1, y0, y1), (w, h) = cfg.run.window, cfg.run.res
    job = GridJob(x0, x1, y0, y1, w, h, cfg.run.max_iter)
    grid = render_grid(cfg.fmap, job, workers=cfg.run.workers)
    write_image(grid, path)
    if args.csv:
        write_csv(grid, args.csv)
    _emit(out, "image", path)
    _emit(out, "size", f"{w}x{h}")
    _emit(out, "j_candidates", int(np.count_nonzero(grid.j_candidates)))
    _emit(out, "stamp", "certified" if grid.certified else "uncertified")
    return 0


def cmd_address(cfg: RunConfig, args, out) -> int:
    z = _need(cfg.run.point, "--point")
    pa = partial_address(cfg.fmap, z, max(cfg.run.depth, 1))
    _emit(out, "address", ",".join(str(k) for k in pa.prefix))
    _emit(out, "status", pa.status)
    if pa.left_at is not None:
        _emit(out, "left_at", pa.left_at)
    return 0


def cmd_hair(cfg: RunConfig, args, out) -> int:
    addr = _need(cfg.run.address, "--address")
    trace = trace_hair(
        cfg.fmap, addr, max(cfg.run.depth, 1), cfg.run.t_max, cfg.run.samples, cfg.run.tol, anchors=cfg.run.anchors
    )
    if args.out:
        write_trace_csv(trace, args.out)
        _emit(out, "csv", args.out)
        _emit(out, "samples", len(trace.t))
        _emit(out, "cauchy_gap", trace.cauchy_gap)
        _emit_complex(out, "endpoint", trace.endpoint_estimate)
    else:
        out.write("t,re,im,depth_used\n")
        for t, z in zip(trace.t.tolist(), trace.z.tolist()):
            out.write(f"{t!r},{z.real!r},{z.imag!r},{trace.depth}\n")
    return 0


def cmd_endpoint(cfg: RunConfig, args, out) -> int:
    addr = _need(cfg.run.address, "--address")
    ep = endpoint(cfg.fmap, addr, cfg.run.tol)
    _emit(out, "address", str(addr))
    _emit_complex(out, "z", ep.z)
    _emit(out, "error_bound", ep.error_bound)
    _emit(out, "levels", ep.levels)
    _emit_complex(out, "anchor", ep.anchor)
    return 0


def cmd_admissible(cfg: RunConfig, args, out) -> int:
    addr = _need(cfg.run.address, "--address")
    gb = is_g_bounded(cfg.fmap, addr, max(cfg.run.depth, 1))
    _emit(out, "address", str(addr))
    _emit(out, "verdict", gb.verdict)
    if gb.x0 is not None:
        _emit(out, "x0", gb.x0)
        _emit(out, "certified_from", gb.certified_from)
    return 0


def cmd_shadow_check(cfg: RunConfig, args, out) -> int:
    addr = _need(cfg.run.address, "--address")
    N = cfg.run.depth
    params = build_shadow_params(cfg.fmap, addr, N)
    _emit(out, "kappa", params.kappa)
    _emit(out, "delta", params.delta)
    _emit(out, "x0_pp", params.x0_pp)
    _emit(out, "r0", params.r0)
    report = verify_shadowing(cfg.fmap, params, N)
    for lv in report:
        _emit(
            out,
            f"level.{lv.n}",
            f"{'ok' if lv.ok else 'FAIL'} method={lv.method} r={bignum.big_str(params.r_seq[lv.n])} "
            f"max_escape={_num(lv.max_escape)} outside_H={lv.outside_H} annulus={'ok' if lv.annulus_ok else 'fail'}",
        )
    if not all(lv.ok for lv in report):
        raise CheckFailed("some squares are not covered by the image of the previous square")
    return 0


def cmd_accumulate(cfg: RunConfig, args, out) -> int:
    z0 = _need(cfg.run.point, "--point")
    acc = accumulate(cfg.fmap, z0, cfg.run.p)
    _emit(out, "p", acc.p)
    _emit(out, "address", ",".join(str(k) for k in acc.address))
    _emit_complex(out, "z_minus", acc.z_minus)
    _emit_complex(out, "z_plus", acc.z_plus)
    _emit(out, "dist_minus", abs(acc.z_minus - z0))
    _emit(out, "dist_plus", abs(acc.z_plus - z0))
    _emit(out, "bound", 2 * math.pi * cfg.fmap.mu ** (-acc.p))
    return 0


COMMANDS = {
    "validate": cmd_validate,
    "constants": cmd_constants,
    "classify": cmd_classify,
    "render": cmd_render,
    "address": cmd_address,
    "hair": cmd_hair,
    "endpoint": cmd_endpoint,
    "admissible": cmd_admissible,
    "shadow-check": cmd_shadow_check,
    "accumulate": cmd_accumulate,
}


def run(subcommand: str, cfg: RunConfig, args=None, out=None) -> int:
    args = args or argparse.Namespace(out=None, csv=None)
    return COMMANDS[subcommand](cfg, args, out or sys.stdout)


def main(argv=None, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        cfg = load(args)
        return run(args.subcommand, cfg, args, out)
    except GenExpError as exc:
        err.write(f"error[{exc.code}]: {exc}\n")
        return exc.exit_code
    except (ArithmeticError, ValueError) as exc:
        err.write(f"error[runtime]: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
