"""Command-line front end.

Exit status: 0 success, 1 unreadable input, 2 parse error, 3 validation error
(including instructions the chosen engine cannot run), 4 runtime failure,
5 insufficient memory.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .bench import bench_scaling
from .circuit import Opcode, ParseError, ShorParams, parse_program, validate
from .engines import EncodedEngine, ExactEngine, ExecutionError, ResourceError
from .engines.auxvar import AuxvarEngine, UnsupportedInstruction, parse_query
from .engines.dist import DistEngine
from .rng import Rng
from .shor import shor_postprocess

EXIT_OK, EXIT_IO, EXIT_PARSE, EXIT_VALIDATE, EXIT_RUNTIME, EXIT_RESOURCE = 0, 1, 2, 3, 4, 5
ENGINES = ("exact", "encoded", "auxvar", "dist")

log = logging.getLogger("gatesim")


def _int_range(text: str) -> range:
    lo, _, hi = text.partition(":")
    return range(int(lo), int(hi or lo) + 1)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gatesim", description="Run quantum circuit programs.")
    p.add_argument("--input", "-i", type=Path, help="circuit program file")
    p.add_argument("--engine", choices=ENGINES, default="exact")
    p.add_argument("--ranks", type=int, default=1, help="rank count for the dist engine")
    p.add_argument("--storage", choices=("exact", "encoded"), default="exact",
                   help="amplitude storage of the dist engine")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=None,
                   help="run seed; <= 0 or omitted takes one from the operating system")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("--query", action="append", default=[],
                   help="basis states for the auxvar engine (bitstring or 0x hex, "
                        "comma separated or repeated; 'all' for every state)")
    p.add_argument("--out", type=Path,
                   help="events file for a run, or CSV/JSON report for --bench")
    p.add_argument("--bench", action="store_true", help="run the scaling benchmark")
    p.add_argument("--bench-n", type=_int_range, default=range(10, 17), metavar="LO:HI")
    p.add_argument("--bench-ranks", default="1,2,4", help="comma-separated rank counts")
    p.add_argument("--bench-circuits", default="hadamard,ghz")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _fail(code: int, message: str) -> int:
    print(f"gatesim: {message}", file=sys.stderr)
    return code


def _engine(args):
    if args.engine == "exact":
        return ExactEngine(args.threads)
    if args.engine == "encoded":
        return EncodedEngine()
    if args.engine == "dist":
        return DistEngine(args.ranks, storage=args.storage)
    return AuxvarEngine(max(1, args.threads))


def _run_bench(args) -> int:
    engines = [args.engine] if args.engine != "auxvar" else ["exact"]
    ranks = [int(r) for r in args.bench_ranks.split(",")]
    report = bench_scaling(engines, args.bench_n, ranks, args.bench_circuits.split(","),
                           threads=args.threads)
    if args.out is None:
        sys.stdout.write(report.to_csv())
    elif args.out.suffix == ".json":
        args.out.write_text(report.to_json())
    else:
        args.out.write_text(report.to_csv())
    return EXIT_OK


def _write_events(result, args, out) -> None:
    ev = result.events
    lines = "".join(s + "\n" for s in ev.bitstrings())
    if args.out is not None:
        args.out.write_text(lines)
    elif args.format == "table":
        out.write(f"GENERATE EVENTS {len(ev)} seed {ev.seed}\n{lines}")


def _shor_report(circuit, result) -> dict | None:
    box = next((i for i in circuit.instructions if i.opcode is Opcode.SHORBOX), None)
    if box is None or result.events is None:
        return None
    params = ShorParams(*box.ints)
    o = shor_postprocess(result.events.events, params)
    return {"G": params.G, "y": params.y, "n_x": params.n_x, "period": o.period,
            "factors": list(o.factors) if o.factors else None, "reason": o.reason}


def _main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    if args.ranks < 1 or args.ranks & (args.ranks - 1):
        return _fail(EXIT_VALIDATE, f"--ranks must be a power of two, got {args.ranks}")
    if args.bench:
        return _run_bench(args)
    if args.input is None:
        return _fail(EXIT_IO, "--input is required unless --bench is given")
    queries = [q for item in args.query for q in item.split(",") if q]
    if bool(queries) != (args.engine == "auxvar"):
        return _fail(EXIT_VALIDATE, "--query is required with, and only with, --engine auxvar")

    try:
        text = args.input.read_text()
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot read {args.input}: {exc.strerror or exc}")
    try:
        circuit = parse_program(text)
    except ParseError as exc:
        return _fail(EXIT_PARSE, f"{args.input}: {exc}")
    report = validate(circuit)
    for issue in report:
        log.info("%s", issue)
    if not report.ok:
        return _fail(EXIT_VALIDATE, "\n".join(str(i) for i in report.errors))

    engine = _engine(args)
    try:
        if args.engine == "auxvar":
            query = None if queries == ["all"] else parse_query(queries, circuit.n_qubits)
            result = engine.run(circuit, query)
        else:
            result = engine.run(circuit, Rng(args.seed))
    except UnsupportedInstruction as exc:
        return _fail(EXIT_VALIDATE, str(exc))
    except (ResourceError, MemoryError) as exc:
        return _fail(EXIT_RESOURCE, str(exc))
    except (ExecutionError, ValueError) as exc:
        return _fail(EXIT_RUNTIME, str(exc))

    shor = _shor_report(circuit, result)
    out = sys.stdout
    if args.format == "json":
        doc = json.loads(result.to_json())
        if shor:
            doc["shor"] = shor
        out.write(json.dumps(doc, indent=2) + "\n")
    else:
        text = result.format_tables()
        if text:
            out.write(text + "\n")
        if shor:
            verdict = (f"factors {shor['factors'][0]} x {shor['factors'][1]}" if shor["factors"]
                       else shor["reason"])
            out.write(f"SHOR G={shor['G']} y={shor['y']} period={shor['period']} {verdict}\n")
    if result.events is not None:
        _write_events(result, args, out)
    return EXIT_OK


def main(argv=None) -> int:
    try:
        return _main(argv)
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
