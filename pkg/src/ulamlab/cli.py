"""``ulamlab <command> --config <file>`` with per-command overrides.

Exit status: 0 when every assertion holds, 1 on an assertion failure (JSON diagnostic on
stderr), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .errors import BoundViolation, UlamError, UsageError
from .experiments import PIPELINES, Report, run_experiment


def _parse_list(text, conv):
    parts = [p for p in text.split(",") if p]
    vals = [conv(p) for p in parts]
    return vals[0] if len(vals) == 1 else vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ulamlab", description="Numerical experiments on Ulam stability.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in PIPELINES:
        s = sub.add_parser(name)
        s.add_argument("--config", type=Path, help="JSON config file")
        s.add_argument("--group", help="group spec(s), comma separated, e.g. cyclic:5,dihedral:4")
        s.add_argument("--dim", help="dimension(s), comma separated")
        s.add_argument("--delta", help="delta / perturbation size(s), comma separated")
        s.add_argument("--trunc", type=int, help="truncation radius L")
        s.add_argument("--seed", type=int)
        s.add_argument("--out", help="report path (default: stdout)")
        s.add_argument("--format", choices=("json", "csv"))
    return p


def _fmt_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "%.17g" % v
    if isinstance(v, (list, dict)):
        return json.dumps(v, sort_keys=True)
    return str(v)


def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report.as_dict(), sort_keys=True, indent=1) + "\n"
    keys = []
    for row in report.rows:
        keys += [k for k in row if k not in keys]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(keys)
    for row in report.rows:
        w.writerow([_fmt_cell(row.get(k)) for k in keys])
    return buf.getvalue()


def load_config(args) -> dict:
    raw = {}
    if args.config is not None:
        try:
            raw = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(raw, dict):
            raise UsageError("config: expected a JSON object")
    if args.group is not None:
        raw["group"] = _parse_list(args.group, str)
    if args.dim is not None:
        raw["dim"] = _parse_list(args.dim, int)
    if args.delta is not None:
        key = "t" if args.command == "quasimorphism" else "delta"
        raw[key] = _parse_list(args.delta, float)
    for key in ("trunc", "seed", "out", "format"):
        if getattr(args, key) is not None:
            raw[key] = getattr(args, key)
    return raw


def _diagnostic(kind, **kw) -> str:
    return json.dumps({"error": kind, **kw}, sort_keys=True, default=str)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = load_config(args)
        report = run_experiment(args.command, raw)
    except UsageError as exc:
        print(_diagnostic("usage", message=str(exc)), file=sys.stderr)
        return 2
    except BoundViolation as exc:
        print(_diagnostic("assertion", statement=exc.statement, value=exc.value, bound=exc.bound,
                          witness=exc.witness), file=sys.stderr)
        return 1
    except UlamError as exc:
        print(_diagnostic("numerical", type=type(exc).__name__, message=str(exc)), file=sys.stderr)
        return 1
    text = render(report, report.config["format"])
    if report.config["out"]:
        Path(report.config["out"]).write_text(text)
    else:
        sys.stdout.write(text)
    fail = report.first_failure()
    if fail is not None:
        print(_diagnostic("assertion", statement=fail.id, description=fail.statement, value=fail.value,
                          bound=fail.bound, witness=fail.witness), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
