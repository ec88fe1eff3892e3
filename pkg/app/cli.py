"""
Command line entry point: `python -m app <command>`.

Machine-readable JSON goes to stdout, a one-line human summary and logs go to
stderr. `plan` and `demo` exit 0 iff the episode satisfied its spec; any
toolkit error exits 2 with `error[<code>]: message`.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
from loguru import logger

from .config import settings
from .exceptions import ETLError, InvalidInputError
from .harness import (
    EXPERIMENTS,
    experiment_config,
    heatmap,
    load_experiment_config,
    run_benchmark,
    run_experiment,
    synthetic_embeddings,
    write_heatmap_csv,
)
from .planner import to_csv
from .schemas import ModelConfig, PlanConfig
from .semantics import ScoreContext, sat, sat_prefixes, score, score_prefixes
from .speclang import GRAMMAR_VERSION, load_manifest, parse_spec
from .utils import finite_or_none, load_trace, read_text, write_model
from .worldmodel import make_world_model


def _summary(text: str) -> None:
    print(text, file=sys.stderr)


def _emit(document) -> None:
    if hasattr(document, "json"):
        print(document.json(indent=2))
    else:
        print(json.dumps(document, indent=2))


def _spec_text(args) -> str:
    if args.spec_file:
        return read_text(args.spec_file)
    if args.spec is None:
        raise InvalidInputError("give a spec with --spec or --spec-file")
    return args.spec


def _formula_and_trace(args):
    formula = parse_spec(_spec_text(args), load_manifest(args.manifest))
    return formula, load_trace(args.trace)


def _context(args, trace) -> ScoreContext:
    bound = len(trace) - 1 if args.bound is None else args.bound
    return ScoreContext(trace, args.start, bound)


def cmd_check(args) -> int:
    formula, trace = _formula_and_trace(args)
    ctx = _context(args, trace)
    verdict = sat(formula, ctx)
    _emit({"sat": verdict, "score": finite_or_none(score(formula, ctx)), "window": list(ctx.window)})
    _summary(f"{'satisfied' if verdict else 'violated'} over [{ctx.start}, {ctx.bound}]")
    return 0


def cmd_score(args) -> int:
    formula, trace = _formula_and_trace(args)
    ctx = _context(args, trace)
    value = score(formula, ctx)
    verdict = sat(formula, ctx)
    _emit({"score": finite_or_none(value), "sat": verdict, "window": list(ctx.window)})
    _summary(f"score {value:.9g} over [{ctx.start}, {ctx.bound}]")
    return 0


def cmd_monitor(args) -> int:
    formula, trace = _formula_and_trace(args)
    scores = score_prefixes(formula, trace)
    verdicts = sat_prefixes(formula, trace)
    _emit({"scores": [finite_or_none(v) for v in scores], "sat": verdicts})
    _summary(f"monitored {len(scores)} prefixes, last verdict {'sat' if verdicts and verdicts[-1] else 'unsat'}")
    return 0


def _write_report(report, out: Optional[str]) -> None:
    directory = Path(out or settings.output_dir) / report.experiment
    write_model(report, directory / "report.json")
    write_model(report.episode, directory / "episode.json")
    to_csv(report.episode, directory / "episode.csv")
    logger.info("wrote {}", directory)


def cmd_plan(args) -> int:
    report = run_experiment(load_experiment_config(args.config))
    _write_report(report, args.out)
    _emit(report.episode)
    _summary(
        f"{report.experiment}: {'satisfied' if report.satisfied else 'not satisfied'} "
        f"after {report.episode.steps} steps, final score {report.episode.final_score:.6g}"
    )
    return 0 if report.satisfied else 1


def cmd_demo(args) -> int:
    overrides = {}
    if args.max_steps is not None:
        overrides["plan"] = PlanConfig(max_steps=args.max_steps)
    cfg = experiment_config(args.name, args.metric or settings.default_metric, **overrides)
    report = run_experiment(cfg)
    if args.out:
        _write_report(report, args.out)
    _emit(report)
    _summary(
        f"{report.experiment} [{report.metric}]: {'satisfied' if report.satisfied else 'not satisfied'}, "
        f"final score {report.episode.final_score:.6g}"
    )
    return 0 if report.satisfied else 1


def cmd_heatmap(args) -> int:
    if args.embeddings:
        embeddings = list(load_trace(args.embeddings))
    else:
        model = make_world_model(ModelConfig())
        embeddings = synthetic_embeddings(model, args.synthetic, args.patches)
    metric = args.metric or settings.default_metric
    matrix = heatmap(embeddings, metric)
    if args.out:
        write_heatmap_csv(matrix, args.out)
    else:
        np.savetxt(sys.stdout, matrix, delimiter=",", fmt="%.17g")
    _summary(f"{metric} heatmap of {len(embeddings)} embeddings")
    return 0


def cmd_benchmark(args) -> int:
    plan = PlanConfig(max_steps=args.max_steps) if args.max_steps is not None else None
    table = run_benchmark(args.specs, args.metrics, plan)
    _emit(table)
    solved = sum(v for row in table.satisfied.values() for v in row.values())
    total = sum(len(row) for row in table.satisfied.values())
    _summary(f"benchmark: {solved}/{total} runs satisfied")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("app.main:app", host=args.host, port=args.port, reload=False)
    return 0


def _add_spec_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--spec", help="spec text")
    parser.add_argument("--spec-file", help="file holding the spec text")
    parser.add_argument("--manifest", required=True, help="target manifest JSON")
    parser.add_argument("--trace", required=True, help="trace as a JSON array or JSON Lines")
    parser.add_argument("--start", type=int, default=0, help="window start i")
    parser.add_argument("--bound", type=int, default=None, help="window end T (default: last index)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="etl", description="Embedding temporal logic toolkit")
    parser.add_argument("--log-level", default=None, help="loguru level for stderr logs")
    parser.add_argument("--version", action="version", version=f"%(prog)s ({GRAMMAR_VERSION})")
    commands = parser.add_subparsers(dest="command", required=True)

    check = commands.add_parser("check", help="Boolean satisfaction of a spec over a trace")
    _add_spec_arguments(check)
    check.set_defaults(handler=cmd_check)

    score_cmd = commands.add_parser("score", help="satisfaction score of a spec over a trace")
    _add_spec_arguments(score_cmd)
    score_cmd.set_defaults(handler=cmd_score)

    monitor = commands.add_parser("monitor", help="score every prefix of a trace")
    _add_spec_arguments(monitor)
    monitor.set_defaults(handler=cmd_monitor)

    plan = commands.add_parser("plan", help="run the planner on an experiment config")
    plan.add_argument("config", help="experiment config JSON")
    plan.add_argument("--out", default=None, help="output directory")
    plan.set_defaults(handler=cmd_plan)

    demo = commands.add_parser("demo", help="run a built-in experiment")
    demo.add_argument("name", choices=sorted(EXPERIMENTS))
    demo.add_argument("--metric", default=None)
    demo.add_argument("--max-steps", type=int, default=None)
    demo.add_argument("--out", default=None, help="also write report, episode and CSV here")
    demo.set_defaults(handler=cmd_demo)

    heat = commands.add_parser("heatmap", help="pairwise distance matrix as CSV")
    heat.add_argument("--embeddings", default=None, help="embeddings file (trace format)")
    heat.add_argument("--synthetic", type=int, default=8, help="number of synthetic views when no file is given")
    heat.add_argument("--patches", type=int, default=0, help="patches per synthetic view (needed for chamfer)")
    heat.add_argument("--metric", default=None)
    heat.add_argument("--out", default=None, help="CSV path (default: stdout)")
    heat.set_defaults(handler=cmd_heatmap)

    bench = commands.add_parser("benchmark", help="score table over experiments and metrics")
    bench.add_argument("--specs", nargs="*", default=None, choices=sorted(EXPERIMENTS))
    bench.add_argument("--metrics", nargs="*", default=["l1", "l2", "cosine"])
    bench.add_argument("--max-steps", type=int, default=None)
    bench.set_defaults(handler=cmd_benchmark)

    serve = commands.add_parser("serve", help="start the HTTP API")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(handler=cmd_serve)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logger.remove()
    logger.add(sys.stderr, level=(args.log_level or settings.log_level).upper())
    try:
        return args.handler(args)
    except ETLError as exc:
        print(f"error[{exc.code}]: {exc.message}", file=sys.stderr)
        return 2
