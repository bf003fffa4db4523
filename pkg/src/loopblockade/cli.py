"""Command-line entry point: spectrum, sweep, compare, extrema, validate.

Exit codes: 0 success, 1 usage error, 2 solver failure, 3 acceptance failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
import warnings

from .fock import TruncationSpec
from .io import ConfigError, load_config, read_csv, shipped_configs, write_csv, write_json
from .model import ModelParams, WeakDrivingWarning, validate_params
from .spectrum import level_table, resonance_detunings
from .sweep import METHODS, compare_report, detect_extrema, run_sweep, select

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_ACCEPTANCE = 0, 1, 2, 3

log = logging.getLogger("loopblockade")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _methods(arg: str | None, default):
    if arg is None:
        return tuple(default)
    return METHODS if arg == "both" else (arg,)


def _load(path):
    if path is None:
        raise UsageError("--config is required")
    return load_config(path)


def cmd_spectrum(args) -> int:
    p = _load(args.config).base if args.config else ModelParams()
    for d in validate_params(p):
        if not d.ok:
            print(f"# warning: {d.name}: {d.message}")
    print(f"{'level':<12} {'energy':>14}  approximate  coefficients")
    for lev in level_table(p, args.k_max):
        coeffs = ", ".join(f"{c:+.6f}" for c in lev.coeffs)
        print(f"{lev.label:<12} {lev.value:14.8f}  {str(lev.approximate):<11}  {coeffs}")
    print()
    print(f"{'resonance':<12} {'kind':<5} {'delta':>12}")
    for k in range(args.k_max + 1):
        for r in resonance_detunings(k, p):
            print(f"{r.level:<12} {r.kind:<5} {r.delta:12.6f}")
    return EXIT_OK


def _progress(done, total):
    if done == total or done % 50 == 0:
        log.info("%d/%d points", done, total)


def cmd_sweep(args) -> int:
    cfg = _load(args.config)
    methods = _methods(args.method, cfg.methods)
    out = args.output or cfg.output
    if out is None:
        raise UsageError("no output path: pass --output or set 'output' in the config")
    cfg = cfg.replace(methods=methods)
    t0 = time.perf_counter()
    rows = run_sweep(cfg, threads=args.threads or cfg.threads, progress=_progress)
    write_csv(out, rows, cfg)
    failed = [r for r in rows if not r.status.startswith("ok")]
    print(f"wrote {len(rows)} rows to {out} in {time.perf_counter() - t0:.1f} s")
    if failed:
        print(f"{len(failed)} points failed; see the status column", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_compare(args) -> int:
    if args.csv:
        if len(args.csv) != 2:
            raise UsageError("compare takes two CSV files (analytic, lindblad) or --config")
        a, _ = read_csv(args.csv[0])
        n, _ = read_csv(args.csv[1])
        a = select(a, "analytic") or a
        n = select(n, "lindblad") or n
    else:
        cfg = _load(args.config)
        rows = run_sweep(cfg.replace(methods=METHODS), threads=args.threads or cfg.threads,
                         progress=_progress)
        a, n = select(rows, "analytic"), select(rows, "lindblad")
    rep = compare_report(a, n, args.field, tolerance=args.tolerance, dip_tolerance=args.dip_tolerance)
    print(rep.table(every=args.every))
    if args.output:
        write_json(args.output, rep.summary())
    return EXIT_OK if rep.passed else EXIT_ACCEPTANCE


def cmd_extrema(args) -> int:
    rows, _ = read_csv(args.csv)
    methods = sorted({r.method for r in rows}) if args.method in (None, "both") else [args.method]
    payload = {}
    for m in methods:
        ext = detect_extrema(rows, args.field, method=m)
        payload[m] = [e._asdict() for e in ext]
        print(f"# {m}: {args.field}")
        for e in ext:
            print(f"{e.kind:<5} {e.location:+.6f} refined {e.refined:+.6f} value {e.value:.6g}")
    if args.output:
        write_json(args.output, {"field": args.field, "extrema": payload})
    return EXIT_OK


def cmd_validate(args) -> int:
    from .acceptance import run_all

    numbers = [int(s) for s in args.only.split(",")] if args.only else None
    results = run_all(numbers, threads=args.threads or 1)
    ok = all(r.passed for r in results)
    payload = {"criteria": [
        {"number": r.number, "name": r.name, "passed": r.passed, "detail": r.detail,
         "seconds": r.seconds} for r in results
    ]}
    if not args.criteria_only:
        runs = {}
        for name, cfg in shipped_configs().items():
            t0 = time.perf_counter()
            rows = run_sweep(cfg, threads=args.threads or 1)
            bad = sum(not r.status.startswith("ok") for r in rows)
            runs[name] = {"rows": len(rows), "failed": bad, "seconds": time.perf_counter() - t0}
            print(f"[{'PASS' if bad == 0 else 'FAIL'}] config {name}: {len(rows)} rows, "
                  f"{bad} failed ({runs[name]['seconds']:.1f} s)")
            ok = ok and bad == 0
        payload["configs"] = runs
    if args.output:
        write_json(args.output, payload)
    return EXIT_OK if ok else EXIT_ACCEPTANCE


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="loopblockade", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, config=True, method=True):
        if config:
            sp.add_argument("--config", metavar="PATH")
        sp.add_argument("--output", metavar="PATH")
        if method:
            sp.add_argument("--method", choices=("analytic", "lindblad", "both"))
        sp.add_argument("--threads", type=int, default=None, metavar="N")

    sp = sub.add_parser("spectrum", help="level table and resonance detunings")
    common(sp, method=False)
    sp.add_argument("--k-max", type=int, default=2)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("sweep", help="run a config and write a CSV")
    common(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("compare", help="analytic vs master-equation deviation report")
    common(sp, method=False)
    sp.add_argument("csv", nargs="*", help="analytic CSV and lindblad CSV")
    sp.add_argument("--field", default="g2_L")
    sp.add_argument("--tolerance", type=float, default=0.25)
    sp.add_argument("--dip-tolerance", type=float, default=0.10)
    sp.add_argument("--every", type=int, default=1, help="print every n-th row")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("extrema", help="dips and peaks of a CSV column")
    common(sp, config=False)
    sp.add_argument("csv")
    sp.add_argument("--field", default="g2_L")
    sp.set_defaults(func=cmd_extrema)

    sp = sub.add_parser("validate", help="run the acceptance criteria and shipped configs")
    common(sp, config=False, method=False)
    sp.add_argument("--only", help="comma list of criterion numbers")
    sp.add_argument("--criteria-only", action="store_true", help="skip the shipped configs")
    sp.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "threads", None) is not None and args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        with warnings.catch_warnings():
            if not args.verbose:
                warnings.simplefilter("ignore", WeakDrivingWarning)
            return args.func(args)
    except (UsageError, ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, RuntimeError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
