"""Command-line entry point: ``frikt extract | run | check | report``.

Exit codes: 0 everything passed, 1 some verdict failed (or ``run`` hit a
panic or ran out of fuel), 2 usage or parse error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from pathlib import Path

from . import frontend as fe
from . import ir
from .checker.obligations import MODES
from .checker.runner import RunConfig, all_passed, run_checks
from .checker.testing import EngineDisagreement
from .checker.verdicts import ReportEntry, summarize
from .evaluator import ArityMismatch, CompiledUnit, Fuel, TypeMismatch, eval_function
from .frontend import TypeAnnot
from .targets import CORPUS_ROOT, list_targets

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def resolve_source(name: str) -> Path:
    """A path to a .krs file, or the name of a bundled corpus target."""
    p = Path(name)
    if p.exists():
        return p
    corpus = CORPUS_ROOT / name / f"{name}.krs"
    if corpus.exists():
        return corpus
    raise UsageError(f"no such file or corpus target: {name}")


def load_unit(name: str) -> ir.IrUnit:
    path = resolve_source(name)
    text = path.read_text()
    unit = ir.extract(text, str(path))
    if not unit.functions:
        raise fe.ParseError("no functions", fe.Position(1, 1))
    return unit


# ---------------------------------------------------------------------------
# extract


def cmd_extract(args) -> int:
    unit = load_unit(args.file)
    print(ir.unit_to_json(unit))
    return EXIT_OK


# ---------------------------------------------------------------------------
# run

_INT = re.compile(r"^(0x[0-9a-fA-F_]+|[0-9][0-9_]*)$")


def parse_int(text: str) -> int:
    if not _INT.match(text):
        raise UsageError(f"expected an integer, got {text!r}")
    return int(text.replace("_", ""), 0)


def parse_arg(text: str, ty: TypeAnnot):
    text = text.strip()
    if ty is TypeAnnot.BOOL:
        if text not in ("true", "false"):
            raise UsageError(f"expected true or false, got {text!r}")
        return text == "true"
    if ty is TypeAnnot.OPTION_USIZE:
        if text.lower() == "none":
            return None
        m = re.match(r"^some\s*\((.*)\)$", text, re.IGNORECASE)
        return parse_int(m.group(1).strip() if m else text)
    if ty is TypeAnnot.ARRAY_U64:
        body = text[1:-1] if text.startswith("[") and text.endswith("]") else text
        return tuple(parse_int(x.strip()) for x in body.split(",") if x.strip())
    return parse_int(text)


def cmd_run(args) -> int:
    unit = load_unit(args.file)
    values = list(args.args)
    fn_name = args.fn
    if fn_name not in unit:
        names = unit.names
        if len(names) == 1:
            values.insert(0, fn_name)
            fn_name = names[0]
        else:
            raise UsageError(f"no function {fn_name!r}; available: {', '.join(names)}")
    fn = unit.function(fn_name)
    if len(values) != len(fn.params):
        raise UsageError(f"{fn_name} takes {len(fn.params)} arguments, got {len(values)}")
    parsed = [parse_arg(v, ty) for v, (_, ty) in zip(values, fn.params)]
    for v, (name, ty) in zip(parsed, fn.params):
        if not ir.check_value(v, ty):
            raise UsageError(f"argument {name}: {ir.format_value(v)} does not fit {ty.value}")
    if args.reference:
        outcome = eval_function(unit, fn_name, parsed, Fuel(args.fuel))
    else:
        outcome = CompiledUnit(unit).run(fn_name, parsed, args.fuel)
    print(outcome)
    return EXIT_OK if isinstance(outcome, ir.Ok) else EXIT_FAIL


# ---------------------------------------------------------------------------
# check


def config_from_args(args) -> RunConfig:
    modes = tuple(m for m in MODES if m in set(args.modes)) if args.modes else MODES
    if not modes:
        raise UsageError("at least one mode is required")
    targets = None
    if args.targets:
        targets = [t for chunk in args.targets for t in chunk.split(",") if t]
    seed = args.seed
    if seed is None:
        seed = int(os.environ.get("FRIKT_SEED", "0"), 0)
    return RunConfig(
        corpus=Path(args.corpus) if args.corpus else None,
        targets=targets,
        modes=modes,
        random_n=args.random_n,
        seed=seed,
        exhaustive_cap=args.exhaustive_cap,
        workers=args.workers,
        report=Path(args.report) if args.report else None,
        format=args.format,
        fuel=args.fuel,
        timings=args.timings,
    )


def report_json(report, timings=False) -> str:
    return json.dumps([r.to_json(timings) for r in report], indent=2, sort_keys=True) + "\n"


def _detail_text(entry: dict) -> str:
    d = entry.get("detail") or {}
    v = entry.get("verdict")
    if v == "proved":
        rules = [s["rule"] for s in d.get("trace", [])]
        return f"{len(rules)} steps: " + ", ".join(dict.fromkeys(rules))
    if v == "passed_tests":
        seed = d.get("seed")
        return f"{d.get('count')} cases" + (f", seed {seed}" if seed is not None else "")
    if v == "refuted":
        cx = d.get("counterexample", {})
        env = ", ".join(f"{k}={_fmt(x)}" for k, x in cx.get("env", {}).items())
        return f"{cx.get('target')}({env}) -> {cx.get('outcome')}: {cx.get('reason')}"
    return str(d.get("reason", ""))


def _fmt(v):
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, list):
        return "[" + ", ".join(str(x) for x in v) + "]"
    return str(v)


def render_table(entries) -> str:
    """Plain-text table over report entries (JSON dicts)."""
    rows = [("id", "mode", "verdict", "detail")]
    for e in entries:
        rows.append((e["id"], e["mode"], e["verdict"].upper(), _detail_text(e)))
    w0 = max(len(r[0]) for r in rows)
    w1 = max(len(r[1]) for r in rows)
    w2 = max(len(r[2]) for r in rows)
    lines = [f"{a:<{w0}}  {b:<{w1}}  {c:<{w2}}  {d}".rstrip() for a, b, c, d in rows]
    lines.insert(1, "-" * len(lines[0]))
    counts = {}
    for e in entries:
        counts[e["verdict"]] = counts.get(e["verdict"], 0) + 1
    lines.append("")
    lines.append("total: " + ", ".join(f"{k} {v}" for k, v in sorted(counts.items())) if counts else "total: 0")
    return "\n".join(lines) + "\n"


def cmd_check(args) -> int:
    config = config_from_args(args)
    if config.targets:
        known = set(list_targets(config.corpus or CORPUS_ROOT))
        unknown = [t for t in config.targets if t not in known]
        if unknown:
            raise UsageError(f"unknown targets: {', '.join(unknown)}")

    def progress(r: ReportEntry):
        if not args.quiet:
            print(f"{r.id} [{r.mode}] {summarize(r.verdict)}", file=sys.stderr)

    report = run_checks(config, progress)
    as_json = [r.to_json(config.timings) for r in report]
    if config.format == "json":
        rendered = report_json(report, config.timings)
    else:
        rendered = render_table(as_json)
    if config.report is not None:
        config.report.write_text(rendered)
    else:
        sys.stdout.write(rendered)
    load_errors = [r for r in report if r.mode == "load"]
    if load_errors:
        return EXIT_USAGE
    return EXIT_OK if all_passed(report) else EXIT_FAIL


def cmd_report(args) -> int:
    try:
        entries = json.loads(Path(args.report).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read report: {e}") from None
    sys.stdout.write(render_table(entries))
    return EXIT_OK if all(e["verdict"] in ("proved", "passed_tests", "skipped") for e in entries) else EXIT_FAIL


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="frikt", description="Extract, run and check kernel functions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="print the IR of a kernel file as JSON")
    p.add_argument("file", help="path to a .krs file or a corpus target name")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("run", help="evaluate one function on concrete arguments")
    p.add_argument("file", help="path to a .krs file or a corpus target name")
    p.add_argument("fn", help="function name (may be omitted when the file defines one function)")
    p.add_argument("args", nargs="*", help="integers, none, some(N), true/false, [a,b,...]")
    p.add_argument("--fuel", type=int, default=1 << 20, help="loop iterations plus calls allowed")
    p.add_argument("--reference", action="store_true", help="use the reference evaluator")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("check", help="check corpus obligations")
    p.add_argument("--corpus", help="corpus root (default: bundled corpus)")
    p.add_argument("--targets", action="append", help="comma-separated target names")
    p.add_argument("--modes", nargs="+", choices=MODES, help="modes to run (default: all)")
    p.add_argument("--random-n", type=int, default=1_000_000)
    p.add_argument("--seed", type=lambda s: int(s, 0), default=None, help="default: $FRIKT_SEED or 0")
    p.add_argument("--exhaustive-cap", type=int, default=10**8)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--report", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--fuel", type=int, default=1 << 20)
    p.add_argument("--timings", action="store_true", help="record wall-clock millis (reports stop being identical)")
    p.add_argument("--quiet", action="store_true", help="no progress lines on stderr")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("report", help="render a JSON report as a table")
    p.add_argument("report")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ArityMismatch, TypeMismatch) as e:
        print(f"frikt: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (fe.FrontendError, ir.LoweringError) as e:
        print(f"frikt: {e}", file=sys.stderr)
        return EXIT_USAGE
    except EngineDisagreement as e:
        print(f"frikt: internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as e:  # noqa: BLE001 - contract: anything unexpected is exit 3
        print(f"frikt: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
