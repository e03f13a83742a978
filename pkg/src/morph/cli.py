"""Command line entry point: ``morph {validate|rank|synth|aggregate|pipeline} MODEL``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import aggregation as agg
from .errors import INFEASIBLE_CODES, MorphError
from .model import validate_model
from .modelfile import parse_model
from .report import STRATEGIES, Config, build_report, render_report
from .synthesis import FLAT, UNITS

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # usage errors are ordinary errors; 2 is reserved for infeasible runs
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="morph", description=__doc__)
    parser.add_argument("command", choices=["validate", "rank", "synth", "aggregate", "pipeline"])
    parser.add_argument("model", help="model file (JSON)")
    parser.add_argument("--budget", type=float, action="append", default=[],
                        help="extension budget; repeat for a sweep (default: budgets in the model file)")
    parser.add_argument("--mcp", choices=["greedy", "exact"], default="greedy")
    parser.add_argument("--strategy", choices=STRATEGIES, action="append", default=[],
                        help="aggregation strategy; repeatable (default: all)")
    parser.add_argument("--priorities", choices=["file", "rank"], default="file",
                        help="use priorities from the file or recompute them by outranking")
    parser.add_argument("--p", type=float, default=0.5, help="concordance threshold")
    parser.add_argument("--q", type=float, default=1.0, help="discordance threshold")
    parser.add_argument("--propagate-layers", type=int, default=1,
                        help="Pareto layers promoted to the parent node")
    parser.add_argument("--quality", choices=[UNITS, FLAT], default=UNITS,
                        help="count child composites as units or recount their leaf DAs")
    parser.add_argument("--compress-mode", choices=["budget", "count"])
    parser.add_argument("--compress-limit", type=float)
    parser.add_argument("--solutions", type=Path,
                        help="aggregate these solutions (machine report or list of profiles) instead of synthesising")
    parser.add_argument("--format", choices=["text", "machine"], default="text")
    parser.add_argument("--timings", action="store_true", help="include stage timings in the report")
    parser.add_argument("--out", type=Path, help="write the report here instead of stdout")
    return parser


def load_solutions(path: Path, groups) -> list[tuple[str, agg.SelectionProfile]]:
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise MorphError("PARSE_ERROR", f"cannot read solutions from {path}: {exc}") from None
    if isinstance(doc, dict) and "synthesis" in doc:
        rows = [(s["name"], s["leaf_profile"]) for s in doc["synthesis"]["root"]]
    elif isinstance(doc, list):
        rows = [(f"X{i}", row) for i, row in enumerate(doc, 1)]
    else:
        raise MorphError("PARSE_ERROR", f"{path}: expected a machine report or a list of profiles")
    out = []
    for name, row in rows:
        if not isinstance(row, dict) or set(row) != set(groups):
            raise MorphError("PARSE_ERROR", f"{path}: solution {name} must map every leaf group to a DA")
        out.append((name, agg.SelectionProfile.from_mapping({g: [row[g]] for g in groups}, groups)))
    return out


def _emit(data: bytes, out: Path | None) -> None:
    if out is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        out.write_bytes(data)


def _validate(args) -> int:
    mf = parse_model(args.model, validate=False)
    report = validate_model(mf.model)
    if args.format == "machine":
        doc = {"schema_version": 1, "command": "validate", "ok": report.ok,
               "errors": [vars(e) for e in report.errors],
               "warnings": [vars(w) for w in report.warnings]}
        _emit((json.dumps(doc, indent=2) + "\n").encode(), args.out)
    else:
        lines = [f"{args.model}: {'valid' if report.ok else 'INVALID'}"]
        lines += [f"  error {e.code} at {e.ref}: {e.message}" for e in report.errors]
        lines += [f"  warning {w.code} at {w.ref}: {w.message}" for w in report.warnings]
        _emit(("\n".join(lines) + "\n").encode(), args.out)
    return EXIT_OK if report.ok else EXIT_ERROR


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            return _validate(args)
        mf = parse_model(args.model)
        cfg = Config(
            budgets=tuple(args.budget),
            mcp=args.mcp,
            strategies=tuple(args.strategy) or STRATEGIES,
            priorities=args.priorities,
            p=args.p,
            q=args.q,
            propagate_layers=args.propagate_layers,
            quality=args.quality,
            compress_mode=args.compress_mode,
            compress_limit=args.compress_limit,
        )
        solutions = None
        if args.solutions is not None:
            if args.command != "aggregate":
                raise MorphError("BAD_OPTION", "--solutions only applies to aggregate")
            solutions = load_solutions(args.solutions, mf.model.leaf_groups)
        report = build_report(args.command, mf, cfg, source=Path(args.model).name, solutions=solutions)
        _emit(render_report(report, args.format, args.timings), args.out)
        if report.infeasible:
            print("morph: infeasible (see report)", file=sys.stderr)
            return EXIT_INFEASIBLE
        return EXIT_OK
    except MorphError as exc:
        print(f"morph: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE if exc.code in INFEASIBLE_CODES else EXIT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
