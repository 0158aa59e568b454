"""Command line interface: ``trace run``, ``trace query``, ``trace serve``."""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

from .config import Config
from .errors import TraceLensError
from .model import SourceSpan, TraceSpec, TrackTarget, deserialize_trace
from .service import run_subject
from .store import Filters, TraceStore


def _parse_track(arg: str) -> TrackTarget:
    """``name`` or ``name@scope``; scope "" addresses the module scope."""
    if "@" in arg:
        name, scope = arg.rsplit("@", 1)
        return TrackTarget(name=name, scope=scope)
    return TrackTarget(name=arg)


def _parse_track_expr(arg: str) -> TrackTarget:
    """``expr`` or ``expr@line``."""
    text, line = arg, None
    if "@" in arg and arg.rsplit("@", 1)[1].isdigit():
        text, line_s = arg.rsplit("@", 1)
        line = int(line_s)
    span = SourceSpan("<subject>", line, line) if line else None
    return TrackTarget(name=text, kind="expression", span=span)


def _parse_filter(arg: str) -> tuple:
    """Value range ``LO..HI``; either side may be empty."""
    if ".." not in arg:
        raise argparse.ArgumentTypeError("filter must look like LO..HI")
    lo_s, hi_s = arg.split("..", 1)

    def conv(s):
        if s == "":
            return None
        try:
            return int(s)
        except ValueError:
            try:
                return float(s)
            except ValueError:
                return s
        return None

    return conv(lo_s), conv(hi_s)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trace", description="Execution-trace debugger")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="instrument and run a subject program")
    run.add_argument("entry", help="subject program entry file")
    run.add_argument("--track", action="append", default=[], metavar="NAME[@SCOPE]")
    run.add_argument("--track-expr", action="append", default=[], metavar="EXPR[@LINE]")
    run.add_argument("--exclude", action="append", default=[], metavar="NAME")
    run.add_argument("--no-default-exclusions", action="store_true")
    run.add_argument("--out", default="trace.json", help="trace file destination")
    run.add_argument("--timeout", type=float, default=None, help="wall-clock limit in seconds")
    run.add_argument("--config", default=None, help="JSON config file")
    run.add_argument("--quiet", action="store_true", help="suppress subject stdout passthrough")

    query = sub.add_parser("query", help="query a trace file")
    query.add_argument("trace", help="trace file produced by `trace run`")
    query.add_argument("--name", required=True, help="tracked name to select")
    query.add_argument("--filter", type=_parse_filter, default=None, metavar="LO..HI")
    query.add_argument("--subtree", type=int, default=None, metavar="BLOCK_ID")
    query.add_argument("--format", choices=("csv", "table"), default="table")

    serve = sub.add_parser("serve", help="serve the HTTP API and UI backend")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--config", default=None)
    serve.add_argument("--ui", default=None, help="frontend directory (index.html + dist/) to serve at /")

    return parser


def cmd_run(args) -> int:
    config = Config.load(args.config)
    if args.timeout is not None:
        from dataclasses import replace

        config = replace(config, timeout_s=args.timeout)
    entry_path = Path(args.entry)
    files = {entry_path.name: entry_path.read_text()}
    spec = TraceSpec.build(
        targets=[*(_parse_track(t) for t in args.track), *(_parse_track_expr(e) for e in args.track_expr)],
        extra_exclusions=[*args.exclude, *config.extra_exclusions],
        subject_entry=entry_path.name,
        use_default_exclusions=not args.no_default_exclusions,
    )
    trace, report = run_subject(files, entry_path.name, spec, config, out_path=args.out)
    if not args.quiet and report.stdout:
        sys.stdout.write(report.stdout)
    counts = {"call": 0, "loop": 0, "iteration": 0, "tracked": 0, "custom": 0}
    for node in trace.root.walk():
        if node.type in counts:
            counts[node.type] += 1
    status = "aborted" if report.aborted else "ok"
    if report.timed_out:
        status = "timeout (partial trace)"
    elif report.truncated:
        status = "truncated (event cap)"
    print(
        f"trace: {status}; {counts['call']} calls, {counts['loop']} loops, "
        f"{counts['tracked']} tracked records, {counts['custom']} custom records -> {args.out}",
        file=sys.stderr,
    )
    return 0 if report.ok else 1


def cmd_query(args) -> int:
    data = Path(args.trace).read_bytes()
    trace = deserialize_trace(data)
    store = TraceStore.ingest(trace)
    vmin, vmax = args.filter if args.filter else (None, None)
    rows = store.select_values(args.name, Filters(value_min=vmin, value_max=vmax, subtree_root=args.subtree))
    header = ["id", "name", "line", "ts", "value", "parent_id", "iteration"]
    records = [[r.id, r.name, r.line, r.ts, r.value, r.parent_id, r.iteration] for r in rows]
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(header)
        writer.writerows(records)
        sys.stdout.write(buf.getvalue())
    else:
        widths = [max(len(str(x)) for x in [h, *(rec[i] for rec in records)]) for i, h in enumerate(header)]
        print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
        for rec in records:
            print("  ".join(str(x).ljust(w) for x, w in zip(rec, widths)))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    uvicorn.run(create_app(Config.load(args.config), ui_dir=args.ui), host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "query":
            return cmd_query(args)
        return cmd_serve(args)
    except TraceLensError as exc:
        print(f"trace: error [{exc.code}]: {exc.message}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
