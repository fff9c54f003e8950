"""Command-line front end.

Subcommands
-----------
spectrum       first non-zero eigenvalues for the configured sweep
certify        closed-form bounds and margins
estimate       gradient estimate, barrier dominance, length integrals
soliton-check  soliton residuals and derived identities
sweep          all checks requested in the configuration
verify-paper   the full acceptance suite, with a determinism self-check
emit-barriers  (t, xi(t), eta(t), z(t)) table for plotting

Exit codes: 0 all checks pass, 1 check failure, 2 usage/config error,
3 solver failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .acceptance import verify_paper
from .config import load_config
from .errors import ConfigError, DriftLabError, SolverError
from .reports import (BARRIER_COLUMNS, SWEEP_COLUMNS, barrier_table,
                      emit_csv, emit_json, environment_stamp, json_payload)
from .runner import run

_CHECK_SUBCOMMANDS = {
    "spectrum": ("spectrum",),
    "certify": ("bounds",),
    "estimate": ("estimates",),
    "soliton-check": ("soliton",),
    "sweep": None,  # keep the configured checks
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="driftlab", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def _common(p):
        p.add_argument("--out", type=Path, default=None, help="output directory")
        p.add_argument("--format", choices=("csv", "json"), default=None,
                       help="output format (default: from config, else csv)")

    for name in _CHECK_SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run the {name} checks")
        p.add_argument("--config", type=Path, required=True, help="experiment config (JSON)")
        p.add_argument("--grid", type=int, default=None, help="override the grid size")
        p.add_argument("--workers", type=int, default=None, help="concurrent instances")
        p.add_argument("--tolerance-profile", choices=("default", "strict"), default=None)
        _common(p)

    p = sub.add_parser("verify-paper", help="run the acceptance suite")
    _common(p)

    p = sub.add_parser("emit-barriers", help="write a (t, xi, eta, z) table")
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=1.01)
    p.add_argument("--delta", type=float, default=0.25)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--points", type=int, default=1001)
    _common(p)
    return parser


def _emit(rows, columns, payload, out_dir: Path | None, formats, basename: str):
    written = []
    if out_dir is None:
        return written
    if "csv" in formats:
        written.append(emit_csv(rows, out_dir / f"{basename}.csv", columns))
    if "json" in formats:
        written.append(emit_json(payload, out_dir / f"{basename}.json"))
    return written


def _run_sweep(args, checks_override) -> int:
    config = load_config(args.config, tolerance_profile=args.tolerance_profile)
    if checks_override is not None:
        if checks_override == ("soliton",) and config.soliton is None:
            raise ConfigError("soliton-check needs a 'soliton' section in the config")
        config = replace(config, checks=checks_override)
    if args.grid is not None:
        config = replace(config, grids=(args.grid,))
    if args.workers is not None:
        config = replace(config, workers=args.workers)
    report = run(config)

    out_dir = args.out if args.out is not None else \
        (Path(config.out_dir) if config.out_dir else None)
    formats = (args.format,) if args.format else config.formats
    payload = json_payload(report.rows, report.summary, report.environment)
    written = _emit(report.rows, SWEEP_COLUMNS, payload, out_dir, formats, "report")

    for row in report.rows:
        verdicts = ", ".join(f"{c}={_verdict(row.get('verdict_' + c))}"
                             for c in config.checks)
        lam = row.get("lambda1")
        lam_text = f" lambda1={lam:.9g}" if lam is not None else ""
        err = f"  [{row['error']}]" if row.get("error") else ""
        print(f"{row['instance']}{lam_text}  {verdicts}{err}")
    print(f"summary: {report.summary['passed']}/{report.summary['instances']} passed, "
          f"{report.summary['failed']} failed, {report.summary['errors']} errors")
    for path in written:
        print(f"wrote {path}")

    if report.had_solver_failure:
        return 3
    if not report.all_passed:
        return 1
    return 0


def _verdict(value) -> str:
    if value is None:
        return "n/a"
    return "pass" if value else "FAIL"


def _run_verify(args) -> int:
    outcome = verify_paper()
    for result in outcome.results:
        print(result.line())
        for detail in result.details:
            print(f"    {detail}")
    out_dir = args.out if args.out is not None else Path(".")
    formats = (args.format,) if args.format else ("csv", "json")
    if "csv" in formats:
        path = Path(out_dir) / "verify_paper.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(outcome.csv_text)
        print(f"wrote {path}")
    if "json" in formats:
        summary = {r.cid: {"title": r.title, "passed": r.passed}
                   for r in outcome.results}
        payload = json_payload([], {"criteria": summary, "passed": outcome.passed},
                               environment_stamp([]))
        emit_json(payload, Path(out_dir) / "verify_paper.json")
        print(f"wrote {Path(out_dir) / 'verify_paper.json'}")
    print("VERIFICATION " + ("SUCCESSFUL" if outcome.passed else "FAILED"))
    return 0 if outcome.passed else 1


def _run_barriers(args) -> int:
    rows = barrier_table(args.a, args.b, args.delta, args.mu, args.points)
    out_dir = args.out if args.out is not None else Path(".")
    path = emit_csv(rows, Path(out_dir) / "barriers.csv", BARRIER_COLUMNS)
    print(f"wrote {path} ({len(rows)} points)")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in _CHECK_SUBCOMMANDS:
            return _run_sweep(args, _CHECK_SUBCOMMANDS[args.command])
        if args.command == "verify-paper":
            return _run_verify(args)
        return _run_barriers(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    except DriftLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
