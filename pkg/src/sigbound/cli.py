"""Command-line interface.

Results go to stdout, progress to stderr, so pipes stay clean. Exit codes:
0 success, 2 invalid parameters, 3 unsupported parameters. Certified numbers
are printed to 10 significant digits rounded outward (lower bounds down,
upper bounds up), so the printed digits remain certificates.
"""
from __future__ import annotations

import argparse
import decimal
import json
import math
import os
import re
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

from .arith import factorize, sieve_primes
from .counting import DEFAULT_BLOCK, count_sigma_ge, moment_sum
from .engine import cell_density, run_bounds
from .errors import (
    InvalidCellError,
    InvalidParameterError,
    UnsupportedParameterError,
)
from .moments import build_moment_table

_INT_RE = re.compile(r"(\d+)(?:[eE](\d+))?")


def scaled_int(text: str) -> int:
    """Exact integer, optionally in scientific notation with an integer
    mantissa ('1e13'); fractional mantissas are rejected."""
    m = _INT_RE.fullmatch(text.strip())
    if not m:
        raise argparse.ArgumentTypeError(
            f"expected an integer like 100000 or 1e5, got {text!r}"
        )
    return int(m.group(1)) * 10 ** int(m.group(2) or 0)


@dataclass
class RunConfig:
    """Validated per-command parameters, one instance per invocation."""

    command: str
    format: str
    y: int = 0
    z: int = 0
    r_max: int = 0
    x: int = 0
    a: int = 0
    b: int = 0
    r: int = 0
    threads: int = 1
    block_size: int = DEFAULT_BLOCK
    flush_every: int = 0


def config_from_args(args) -> RunConfig:
    get = lambda name, default=0: getattr(args, name, default)
    threads = get("threads", None)
    return RunConfig(
        command=args.command,
        format=get("format", "text"),
        y=get("y"),
        z=get("z"),
        r_max=get("rmax"),
        x=get("x"),
        a=get("a"),
        b=get("b"),
        r=get("r"),
        threads=threads if threads is not None else _default_threads(),
        block_size=get("block_size", DEFAULT_BLOCK),
        flush_every=get("flush_every"),
    )


def _default_threads() -> int:
    env = os.environ.get("SIGBOUND_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _outward(x: float, down: bool) -> float:
    """Round to 10 significant digits away from the certified side."""
    if not math.isfinite(x):
        return x
    rounding = decimal.ROUND_FLOOR if down else decimal.ROUND_CEILING
    ctx = decimal.Context(prec=10, rounding=rounding)
    return float(ctx.plus(decimal.Decimal(x)))


def _fmt_cert(x: float, down: bool) -> str:
    return f"{_outward(x, down):.10g}"


def _exact_proportion(count: int, x: int) -> str:
    with decimal.localcontext() as ctx:
        ctx.prec = 25
        q = decimal.Decimal(count) / decimal.Decimal(x)
    text = format(q.normalize(), "f")
    return text


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="sigbound",
        description="Certified bounds and exact counts for the density of "
        "n with sigma(2n+1) >= sigma(2n).",
    )
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", help="certified density bracket from cell enumeration")
    b.add_argument("--y", type=scaled_int, default=31, help="smoothness bound (default 31)")
    b.add_argument("--z", type=scaled_int, default=10**8, help="enumerate cells with ab <= z (default 1e8)")
    b.add_argument("--rmax", type=scaled_int, default=200, help="maximum moment order (default 200)")
    b.add_argument("--threads", type=scaled_int, default=None, help="worker count (default: all cores, or SIGBOUND_THREADS)")
    b.add_argument("--flush-every", type=scaled_int, default=0, help="emit an intermediate certified bracket every N cells")
    b.add_argument("--format", choices=("text", "json"), default="text")

    e = sub.add_parser("empirical", help="exact count of n <= x with sigma(2n+1) >= sigma(2n)")
    e.add_argument("--x", type=scaled_int, required=True)
    e.add_argument("--block-size", type=scaled_int, default=DEFAULT_BLOCK)
    e.add_argument("--format", choices=("text", "json"), default="text")

    d = sub.add_parser("dens-s", help="exact density of one (a, b) cell")
    d.add_argument("--a", type=scaled_int, required=True)
    d.add_argument("--b", type=scaled_int, required=True)
    d.add_argument("--y", type=scaled_int, required=True)
    d.add_argument("--format", choices=("text", "json"), default="text")

    l = sub.add_parser("lambda", help="table of certified moment-mean upper bounds")
    l.add_argument("--y", type=scaled_int, required=True)
    l.add_argument("--rmax", type=scaled_int, default=1)
    l.add_argument("--format", choices=("text", "json"), default="text")

    m = sub.add_parser("moment", help="empirical moment sums over one cell")
    m.add_argument("--a", type=scaled_int, required=True)
    m.add_argument("--b", type=scaled_int, required=True)
    m.add_argument("--y", type=scaled_int, required=True)
    m.add_argument("--r", type=scaled_int, required=True)
    m.add_argument("--x", type=scaled_int, required=True)
    m.add_argument("--block-size", type=scaled_int, default=DEFAULT_BLOCK)
    m.add_argument("--format", choices=("text", "json"), default="text")
    return p


def _emit(payload: dict, lines: list[str], fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(payload))
    else:
        for line in lines:
            print(line)


def _cmd_bounds(cfg: RunConfig) -> int:
    last = [0.0]

    def progress(ev):
        if ev.flush:
            print(
                f"flush: pairs={ev.pairs} "
                f"lower>={_fmt_cert(ev.lower, True)} upper<={_fmt_cert(ev.upper, False)}",
                file=sys.stderr,
            )
        else:
            print(
                f"pairs={ev.pairs} a={ev.current_a} covered>={ev.covered:.6f} "
                f"lower>={ev.lower:.8f} upper<={ev.upper:.8f}",
                file=sys.stderr,
            )
        last[0] = ev.pairs

    report = run_bounds(
        cfg.y,
        cfg.z,
        cfg.r_max,
        threads=cfg.threads,
        progress=progress,
        flush_every=cfg.flush_every,
    )
    lower = _outward(report.lower_total.value, True)
    upper = _outward(report.upper_total.value, False)
    payload = {
        "command": "bounds",
        "params": {"y": report.y, "z": report.z, "r_max": report.r_max, "threads": report.threads},
        "lower": lower,
        "upper": upper,
        "covered_mass": report.covered_mass,
        "pair_count": report.pair_count,
        "elapsed_seconds": round(report.elapsed_seconds, 3),
        "certified": True,
    }
    lines = [
        f"bounds  y={report.y}  z={report.z}  r_max={report.r_max}  threads={report.threads}",
        f"pairs enumerated : {report.pair_count}",
        f"covered mass     : >= {report.covered_mass:.10f}",
        f"certified bracket: {lower:.10g} <= density <= {upper:.10g}",
        f"elapsed          : {report.elapsed_seconds:.2f} s",
    ]
    _emit(payload, lines, cfg.format)
    return 0


def _cmd_empirical(cfg: RunConfig) -> int:
    count, _ = count_sigma_ge(cfg.x, cfg.block_size)
    prop = _exact_proportion(count, cfg.x)
    payload = {
        "command": "empirical",
        "params": {"x": cfg.x, "block_size": cfg.block_size},
        "count": count,
        "proportion": float(prop),
    }
    _emit(payload, [f"{count} / {cfg.x} = {prop}"], cfg.format)
    return 0


def _factored_cell_input(value: int, y: int, name: str):
    f = factorize(value)
    for p, _ in f.factors:
        if p > y:
            raise InvalidCellError(f"{name}={value} is not {y}-smooth")
    return f


def _cmd_dens_s(cfg: RunConfig) -> int:
    primes = sieve_primes(cfg.y)
    fa = _factored_cell_input(cfg.a, cfg.y, "a")
    fb = _factored_cell_input(cfg.b, cfg.y, "b")
    cell = cell_density(fa, fb, primes)
    num, den = cell.dens.numerator, cell.dens.denominator
    payload = {
        "command": "dens-s",
        "params": {"a": cfg.a, "b": cfg.b, "y": cfg.y},
        "dens": f"{num}/{den}",
        "dens_float": num / den,
    }
    lines = [f"dens S({cfg.a}, {cfg.b}) with y={cfg.y} = {num}/{den} = {num / den:.10g}"]
    _emit(payload, lines, cfg.format)
    return 0


def _cmd_lambda(cfg: RunConfig) -> int:
    table = build_moment_table(cfg.y, cfg.r_max)
    rows = []
    for r in range(1, cfg.r_max + 1):
        v = table.values[r].value
        w = table.roots[r].value
        rows.append([r, v if math.isfinite(v) else None, w if math.isfinite(w) else None])
    payload = {
        "command": "lambda",
        "params": {"y": cfg.y, "r_max": cfg.r_max},
        "rows": rows,
    }
    lines = [f"moment-mean upper bounds, y={cfg.y}"]
    for r, v, w in rows:
        vtxt = "saturated" if v is None else _fmt_cert(v, False)
        wtxt = "saturated" if w is None else _fmt_cert(w, False)
        lines.append(f"r={r}  upper<={vtxt}  root<={wtxt}")
    _emit(payload, lines, cfg.format)
    return 0


def _cmd_moment(cfg: RunConfig) -> int:
    s_odd, s_even = moment_sum(cfg.a, cfg.b, cfg.y, cfg.r, cfg.x, cfg.block_size)
    primes = sieve_primes(cfg.y)
    fa = _factored_cell_input(cfg.a, cfg.y, "a")
    fb = _factored_cell_input(cfg.b, cfg.y, "b")
    dens = cell_density(fa, fb, primes).dens
    scale = float(dens) * cfg.x
    payload = {
        "command": "moment",
        "params": {"a": cfg.a, "b": cfg.b, "y": cfg.y, "r": cfg.r, "x": cfg.x},
        "sum_odd": s_odd,
        "sum_even": s_even,
        "normalized_odd": s_odd / scale if scale else None,
        "normalized_even": s_even / scale if scale else None,
    }
    lines = [
        f"cell ({cfg.a}, {cfg.b}), y={cfg.y}, r={cfg.r}, x={cfg.x}",
        f"sum h^r(2n+1) = {s_odd:.10g}",
        f"sum h^r(2n)   = {s_even:.10g}",
        f"x * dens      = {scale:.10g}",
        f"normalized    : odd {s_odd / scale:.8f}  even {s_even / scale:.8f}",
    ]
    _emit(payload, lines, cfg.format)
    return 0


_DISPATCH = {
    "bounds": _cmd_bounds,
    "empirical": _cmd_empirical,
    "dens-s": _cmd_dens_s,
    "lambda": _cmd_lambda,
    "moment": _cmd_moment,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the message
        return int(exc.code or 0)
    try:
        return _DISPATCH[args.command](config_from_args(args))
    except UnsupportedParameterError as exc:
        print(f"unsupported parameter: {exc}", file=sys.stderr)
        return 3
    except (InvalidParameterError, InvalidCellError) as exc:
        print(f"invalid parameter: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
