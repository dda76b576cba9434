"""Command-line entry points.

Exit codes, shared by the single-file and batch paths:

    0  ran clean, no findings
    1  ran clean, at least one finding
    2  usage error
    3  input could not be decoded or decompiled
    4  analysis hit its time budget
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .analyses import run_analyses
from .datalog import EvaluationTimeout
from .decompiler import DecompilerConfig, decompile
from .extract import extract_facts, write_tsv
from .ingest import HttpTransport, scrape_range
from .isa import MalformedHexError, disassemble, format_listing, parse_hex
from .report import (
    build_report,
    count_by_analysis,
    render_figures,
    render_json,
    write_summary,
)

EXIT_CLEAN = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_TIMEOUT = 4


def _read_code(path: str) -> bytes:
    if path == "-":
        return parse_hex(sys.stdin.read())
    return parse_hex(Path(path).read_text())


def _write_or_print(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _config_from_args(args) -> DecompilerConfig:
    return DecompilerConfig(
        timeout_seconds=args.timeout,
        max_iterations=args.max_iterations,
        const_cap=args.const_cap,
        clone_budget=args.clone_budget,
    )


def _analyze_code(code: bytes, config: DecompilerConfig) -> tuple[dict, int]:
    deadline = time.monotonic() + config.timeout_seconds
    decompilation = decompile(code, config, deadline_at=deadline)
    findings = []
    if decompilation.timed_out:
        status = "timeout"
    else:
        status = "bounded" if decompilation.bounded else "ok"
        facts = extract_facts(decompilation)
        try:
            findings = run_analyses(facts, deadline_at=deadline)
        except EvaluationTimeout:
            status = "timeout"
            findings = []
    report = build_report(findings, code, status, config)
    if status == "timeout":
        code_out = EXIT_TIMEOUT
    elif findings:
        code_out = EXIT_FINDINGS
    else:
        code_out = EXIT_CLEAN
    return report, code_out


def _batch_worker(job: tuple[str, str, dict]) -> dict:
    path, out_dir, config_kwargs = job
    config = DecompilerConfig(**config_kwargs)
    name = Path(path).name
    try:
        code = _read_code(path)
        report, exit_code = _analyze_code(code, config)
    except (OSError, MalformedHexError) as exc:
        return {"source": name, "status": "error", "exit": EXIT_INPUT,
                "counts": count_by_analysis([]), "detail": str(exc)}
    report_path = Path(out_dir) / f"{Path(path).stem}.report.json"
    report_path.write_text(render_json(report))
    counts = {name_: 0 for name_ in count_by_analysis([])}
    for finding in report["findings"]:
        counts[finding["analysis"]] += 1
    return {"source": name, "status": report["status"], "exit": exit_code,
            "counts": counts, "detail": ""}


def _cmd_disasm(args) -> int:
    try:
        code = _read_code(args.file)
    except (OSError, MalformedHexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _write_or_print(format_listing(disassemble(code)), args.out)
    return EXIT_CLEAN


def _cmd_decompile(args) -> int:
    try:
        code = _read_code(args.file)
    except (OSError, MalformedHexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    decompilation = decompile(code, _config_from_args(args))
    if args.dot is not None:
        Path(args.dot).write_text(decompilation.dot)
    _write_or_print(decompilation.tir, args.out)
    if decompilation.timed_out:
        print("warning: decompilation hit its time budget", file=sys.stderr)
        return EXIT_TIMEOUT
    return EXIT_CLEAN


def _cmd_extract(args) -> int:
    try:
        code = _read_code(args.file)
    except (OSError, MalformedHexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    decompilation = decompile(code, _config_from_args(args))
    if decompilation.timed_out:
        print("warning: decompilation hit its time budget", file=sys.stderr)
        return EXIT_TIMEOUT
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_tsv(extract_facts(decompilation), out)
    return EXIT_CLEAN


def _cmd_analyze(args) -> int:
    config = _config_from_args(args)
    if len(args.files) == 1 and args.out is None:
        try:
            code = _read_code(args.files[0])
        except (OSError, MalformedHexError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT
        report, exit_code = _analyze_code(code, config)
        sys.stdout.write(render_json(report))
        return exit_code

    if args.out is None:
        print("error: --out is required for batch analysis", file=sys.stderr)
        return EXIT_USAGE
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(path, str(out), {
        "timeout_seconds": config.timeout_seconds,
        "max_iterations": config.max_iterations,
        "const_cap": config.const_cap,
        "clone_budget": config.clone_budget,
    }) for path in args.files]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_batch_worker, jobs))
    else:
        rows = [_batch_worker(job) for job in jobs]
    write_summary(out / "summary.tsv", rows)
    if args.figures:
        render_figures(rows, out)
    for row in rows:
        if row["status"] == "error":
            print(f"error: {row['source']}: {row['detail']}", file=sys.stderr)
    if any(row["exit"] == EXIT_FINDINGS for row in rows):
        return EXIT_FINDINGS
    return EXIT_CLEAN


def _cmd_scrape(args) -> int:
    transport = HttpTransport(args.endpoint)
    result = scrape_range(transport, args.out, args.from_block, args.to_block,
                          trace_internal=args.trace)
    for error in result.errors:
        print(f"warning: {error}", file=sys.stderr)
    print(f"created={len(result.created)} "
          f"skipped={result.skipped_existing} errors={len(result.errors)}")
    return EXIT_CLEAN


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evmsleuth",
        description="Static security analysis for EVM bytecode.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--timeout", type=float, default=60.0,
                        help="time budget in seconds (default 60)")
    common.add_argument("--max-iterations", type=int, default=2_000_000,
                        help="propagation step budget")
    common.add_argument("--const-cap", type=int, default=32,
                        help="constant set size limit per stack slot")
    common.add_argument("--clone-budget", type=int, default=10,
                        help="block clone multiplier for jump splitting")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("disasm", help="print a disassembly listing")
    p.add_argument("file")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_disasm)

    p = sub.add_parser("decompile", parents=[common],
                       help="print the register-form program")
    p.add_argument("file")
    p.add_argument("--out")
    p.add_argument("--dot", help="also write the control-flow graph as DOT")
    p.set_defaults(func=_cmd_decompile)

    p = sub.add_parser("extract", parents=[common],
                       help="write relational facts as TSV files")
    p.add_argument("file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("analyze", parents=[common],
                       help="run the vulnerability analyses")
    p.add_argument("files", nargs="+")
    p.add_argument("--out", help="directory for reports (required for batch)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--figures", action=argparse.BooleanOptionalAction,
                   default=True,
                   help="render summary figures on batch runs")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("scrape", help="collect deployed bytecode over RPC")
    p.add_argument("--endpoint", required=True)
    p.add_argument("--from-block", type=int, required=True)
    p.add_argument("--to-block", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--trace", action=argparse.BooleanOptionalAction,
                   default=False,
                   help="also follow trace_transaction for nested creations")
    p.set_defaults(func=_cmd_scrape)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
