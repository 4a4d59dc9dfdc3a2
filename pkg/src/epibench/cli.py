"""Command-line entry point: ``epibench report`` and ``epibench sweep``.

Exit codes: 0 when no check failed, 1 when any check failed (or, with
``--strict``, raised an error), 2 for configuration or I/O errors.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time

from .config import ConfigError, load_config
from .report import run, sweep

log = logging.getLogger("epibench")


def _parser():
    p = argparse.ArgumentParser(prog="epibench",
                                description="Numerical checks of entropy-power and related inequalities.")
    p.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress and timing to stderr")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("report", "write a JSON report"), ("sweep", "write a CSV sweep")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", required=True, help="YAML run configuration")
        s.add_argument("--out", required=True, help="output path")
        s.add_argument("--strict", action="store_true", help="treat per-check errors as failures")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    if args.threads < 1:
        print("epibench: --threads must be at least 1", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"epibench: config error at {exc}", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    try:
        if args.command == "report":
            report = run(cfg, args.threads)
            with open(args.out, "w") as fh:
                fh.write(report.to_json())
        else:
            report = sweep(cfg, args.out, args.threads)
    except OSError as exc:
        print(f"epibench: {exc}", file=sys.stderr)
        return 2
    # timing goes to the log only, so the report itself stays byte-reproducible
    log.info("%d entries in %.1f s", report.summary["total"], time.perf_counter() - t0)
    s = report.summary
    print(f"pass {s['pass']}  fail {s['fail']}  inconclusive {s['inconclusive']}  error {s['error']}",
          file=sys.stderr)
    bad = [e for e in report.entries if e["status"] in ("fail", "error")]
    for e in bad[:20]:
        where = ",".join(str(e[k]) for k in ("family_x", "family_y", "lambda", "t") if e[k] not in ("", None))
        print(f"  {e['status']}: {e['check']}[{where}] {e['message'] or e['value']}", file=sys.stderr)
    if len(bad) > 20:
        print(f"  ... {len(bad) - 20} more in {args.out}", file=sys.stderr)
    if report.failed or (args.strict and s["error"]):
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
