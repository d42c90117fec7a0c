"""Command-line interface: ``excoupling {exceptional,scan,verify,angle}``.

Exit codes: 0 success, 1 bad arguments, 2 numerical or verification failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from datetime import datetime, timezone
from decimal import Decimal, InvalidOperation

import numpy as np

from . import __version__, closed_form, verification
from .coulomb import ModelParams, ShootingConfig, angle_curves, asymptotic_angles, find_exceptional_numeric
from .errors import DomainError, IntegrationError, NumericalConsistencyError, RefinementError

log = logging.getLogger("excoupling")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
WORKERS_ENV = "EXCOUPLING_WORKERS"
NUMERIC_ERRORS = (IntegrationError, NumericalConsistencyError, RefinementError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, Decimal):
        return str(x)
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def _json_num(x):
    if x is None:
        return None
    if isinstance(x, Decimal):
        return float(x)
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return int(x)
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def manifest(command: str, params: dict, timestamp: bool = False) -> dict:
    canon = json.dumps(params, sort_keys=True, separators=(",", ":"))
    out = {
        "command": command,
        "parameters": params,
        "config_hash": hashlib.sha256(canon.encode()).hexdigest()[:16],
        "tool_version": __version__,
    }
    if timestamp:
        out["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return out


def render(header, rows, man, as_json: bool) -> str:
    if as_json:
        body = {"manifest": man, "rows": [{h: _json_num(v) if not isinstance(v, str) else v
                                           for h, v in zip(header, r)} for r in rows]}
        return json.dumps(body, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in r])
    return buf.getvalue()


def emit(text: str, out, man, as_json: bool):
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", newline="") as fh:
        fh.write(text)
    if not as_json:
        # CSV carries no metadata of its own; point to a sidecar
        with open(out + ".manifest.json", "w") as fh:
            json.dump(man, fh, indent=2)
            fh.write("\n")


def _positive(name, v):
    if not (v > 0 and math.isfinite(v)):
        raise UsageError(f"{name} must be a positive finite number, got {v}")


def _shooting_cfg(args) -> ShootingConfig:
    try:
        return replace(ShootingConfig(), t_min=args.t_min, t_max=args.t_max, bisect_tol=args.bisect_tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------------------

def cmd_exceptional(args) -> int:
    _positive("--k", args.k)
    _positive("--tol", args.tol)
    cfg = _shooting_cfg(args)
    mode = args.mode or "both"
    closed = closed_form.exceptional_values(args.k).values if mode != "numeric" else []
    numeric = find_exceptional_numeric(args.k, cfg).values if mode != "closed-form" else []
    n = max(len(closed), len(numeric))
    rows = []
    ok = True
    for m in range(n):
        cc = closed[m] if m < len(closed) else None
        cn = numeric[m] if m < len(numeric) else None
        diff = abs(cc - cn) if cc is not None and cn is not None else None
        if mode == "both" and (diff is None or diff > args.tol):
            ok = False
        rows.append([m, cc, cn, diff])
    params = {"k": args.k, "mode": mode, "tol": args.tol, "t_min": args.t_min,
              "t_max": args.t_max, "bisect_tol": args.bisect_tol}
    man = manifest("exceptional", params, args.timestamp)
    emit(render(["m", "c_closed", "c_numeric", "abs_diff"], rows, man, args.json), args.out, man, args.json)
    if not ok:
        log.error("numeric and closed-form couplings disagree beyond tol=%g", args.tol)
        return EXIT_NUMERIC
    return EXIT_OK


def _k_grid(k_from: str, k_to: str, k_step: str):
    try:
        a, b, h = Decimal(k_from), Decimal(k_to), Decimal(k_step)
    except InvalidOperation:
        raise UsageError("k range must be decimal numbers") from None
    if not (a > 0 and h > 0):
        raise UsageError("need k-from > 0 and k-step > 0")
    if a > b:
        raise UsageError(f"empty range: k-from {a} > k-to {b}")
    out = []
    k = a
    while k <= b:
        out.append(k)
        k += h
    return out


def _numeric_row(k: float):
    return find_exceptional_numeric(k).values


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"{WORKERS_ENV} must be >= 1")
    return n


def cmd_scan(args) -> int:
    ks = _k_grid(args.k_from, args.k_to, args.k_step)
    closed = [closed_form.exceptional_values(float(k)).values for k in ks]
    width = max(len(c) for c in closed)
    header = ["k", "N"] + [f"c{m}" for m in range(width)]
    numeric = None
    if args.numeric:
        workers = _workers()
        if workers > 1:
            with ProcessPoolExecutor(workers) as pool:
                numeric = list(pool.map(_numeric_row, [float(k) for k in ks]))
        else:
            numeric = [_numeric_row(float(k)) for k in ks]
        header += [f"c{m}_numeric" for m in range(width)]
    rows = []
    for i, k in enumerate(ks):
        c = closed[i]
        row = [k, len(c)] + [c[m] if m < len(c) else None for m in range(width)]
        if numeric is not None:
            row += [numeric[i][m] if m < len(numeric[i]) else None for m in range(width)]
        rows.append(row)
    params = {"k_from": args.k_from, "k_to": args.k_to, "k_step": args.k_step, "numeric": args.numeric}
    man = manifest("scan", params, args.timestamp)
    emit(render(header, rows, man, args.json), args.out, man, args.json)
    if numeric is not None and any(len(a) != len(b) for a, b in zip(closed, numeric)):
        log.error("numeric count differs from the closed-form count")
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.level is not None and args.level < 1:
        raise UsageError("--level must be >= 1")
    checks = verification.run(args.suite, args.level)
    passed = all(c.passed for c in checks)
    params = {"suite": args.suite, "level": args.level}
    man = manifest("verify", params, args.timestamp)
    if args.json:
        body = {"manifest": man, "passed": passed, "rows": [c.as_dict() for c in checks]}
        text = json.dumps(body, indent=2) + "\n"
    else:
        rows = [[c.suite, c.name, "PASS" if c.passed else "FAIL", c.measured, c.tol] for c in checks]
        text = render(["suite", "check", "status", "measured", "tol"], rows, man, False)
    emit(text, args.out, man, args.json)
    return EXIT_OK if passed else EXIT_NUMERIC


def cmd_angle(args) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    _positive("--k", args.k)
    try:
        p = ModelParams(args.k, args.c)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    cfg = _shooting_cfg(args)
    t_eval = np.linspace(cfg.t_min, cfg.t_max, args.samples)
    t, th0, thinf = angle_curves(p, cfg, t_eval)
    ang = asymptotic_angles(args.k, args.c)
    params = {"k": args.k, "c": args.c, "t_min": args.t_min, "t_max": args.t_max, "samples": args.samples}
    man = manifest("angle", params, args.timestamp)
    man["reference_lines"] = {"theta_minus": ang.theta_minus, "theta_plus": ang.theta_plus,
                              "t_mid": cfg.matching_point(args.k)}
    rows = [[a, b, c] for a, b, c in zip(t, th0, thinf)]
    emit(render(["t", "phi0", "phi_inf"], rows, man, args.json), args.out, man, args.json)
    return EXIT_OK


# ---------------------------------------------------------------------------

def _common(p, trunc=True):
    fmt_group = p.add_mutually_exclusive_group()
    fmt_group.add_argument("--json", action="store_true", help="JSON object with manifest and rows")
    fmt_group.add_argument("--csv", action="store_true", help="CSV with header row (default)")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--timestamp", action="store_true", help="record wall-clock time in the manifest")
    if trunc:
        p.add_argument("--t-min", type=float, default=-40.0)
        p.add_argument("--t-max", type=float, default=40.0)
        p.add_argument("--bisect-tol", type=float, default=1e-9)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="excoupling", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("exceptional", help="exceptional couplings for one k")
    p.add_argument("--k", type=float, required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--numeric", dest="mode", action="store_const", const="numeric")
    mode.add_argument("--closed-form", dest="mode", action="store_const", const="closed-form")
    mode.add_argument("--both", dest="mode", action="store_const", const="both")
    p.add_argument("--tol", type=float, default=1e-6)
    _common(p)
    p.set_defaults(func=cmd_exceptional)

    p = sub.add_parser("scan", help="closed-form couplings over a k grid")
    p.add_argument("--k-from", required=True)
    p.add_argument("--k-to", required=True)
    p.add_argument("--k-step", required=True)
    p.add_argument("--numeric", action="store_true",
                   help=f"add shooting results (parallel over k with ${WORKERS_ENV})")
    _common(p, trunc=False)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("verify", help="run invariant suites")
    p.add_argument("--suite", choices=verification.SUITES + ("all",), default="all")
    p.add_argument("--level", type=int, default=None,
                   help="max recursion level (factorization j, ladder n)")
    _common(p, trunc=False)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("angle", help="sample the two shooting angles")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--samples", type=int, default=801)
    _common(p)
    p.set_defaults(func=cmd_angle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"excoupling: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"excoupling: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NUMERIC_ERRORS as exc:
        print(f"excoupling: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
