# Copyright 2026 Rosalind Franklin Institute
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing,
# software distributed under the License is distributed on an
# "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND,
# either express or implied. See the License for the specific
# language governing permissions and limitations under the License.

import argparse
import os
import sys
from pathlib import Path

from loguru import logger

from sawpframe.benchmark.cases import N_CASES, case_by_id, load_cases, pin_solutions
from sawpframe.errors import SawpError
from sawpframe.fem.solver import solve
from sawpframe.frame.document import read_document
from sawpframe.frame.lints import validate
from sawpframe.grading.grader import MODES, stability_buckets
from sawpframe.io.report import build_report
from sawpframe.llm.config import PROVIDERS, ProviderConfig
from sawpframe.llm.transcripts import TranscriptStore, resolve_transcript_dir
from sawpframe.pipeline.experiments import condition_options, run_ablation, run_benchmark, run_case_best_of_n
from sawpframe.pipeline.store import RunStore
from sawpframe.prompts.forge import INSTRUCTION_FILES, build_stage_prompt, render_messages


def configure_logging(level: str):
    logger.remove()
    logger.add(sys.stderr, level=level.upper())


def _add_provider_arguments(parser):
    parser.add_argument(
        "--provider",
        choices=PROVIDERS,
        default=None,
        help="Completion provider, defaults to $SAWP_PROVIDER, or replay when --replay is given",
    )
    parser.add_argument("--model", type=str, default=None, help="Model name, defaults to $SAWP_MODEL")
    parser.add_argument("--temperature", type=float, default=None, help="Sampling temperature, default 0")
    parser.add_argument("--rpm", type=float, default=None, help="Requests per minute cap per provider")
    parser.add_argument("--timeout", type=float, default=None, help="Seconds per request")
    parser.add_argument("--retries", type=int, default=None, help="Attempts per request, default 4")
    parser.add_argument(
        "--replay", type=str, default=None, help="Transcript directory to replay, or the name of a bundled set"
    )
    parser.add_argument("--record", type=str, default=None, help="Directory to record transcripts into")
    parser.add_argument(
        "--plan",
        type=str,
        default=None,
        help="Answer plan of the scripted provider: golden, degraded or a JSON file",
    )
    parser.add_argument("--overwrite", action="store_true", help="Replace transcripts already recorded")
    parser.add_argument("--runs", type=str, default=None, help="Directory to persist run artifacts under")
    parser.add_argument(
        "--instructions",
        nargs="+",
        default=["all"],
        help=f"Reasoning instructions in the prompts: all, none, or ids from {list(INSTRUCTION_FILES)}",
    )
    parser.add_argument("--exemplar", type=int, default=1, help="Case used as the worked example, default 1")


def get_args_sawp():
    parser = argparse.ArgumentParser(
        prog="sawp",
        description="Structural analysis word problems: frame solver, prompt pipeline and benchmark",
    )
    parser.add_argument(
        "--log-level",
        type=str,
        default=os.environ.get("SAWP_LOG_LEVEL", "WARNING"),
        help="Log level, defaults to $SAWP_LOG_LEVEL or WARNING",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("solve", help="Solve a frame model document and write a report")
    p.add_argument("--model", type=str, required=True, help="Frame model document (.fmd.json)")
    p.add_argument("--out", type=str, required=True, help="Output directory")
    p.set_defaults(func=cmd_solve)

    p = commands.add_parser("validate", help="Check a frame model document")
    p.add_argument("model", type=str, help="Frame model document (.fmd.json)")
    p.add_argument("--strict", action="store_true", help="Exit with status 1 when any lint fires")
    p.set_defaults(func=cmd_validate)

    p = commands.add_parser("cases", help="List the benchmark cases")
    p.add_argument("--pin", action="store_true", help="Re-solve and rewrite every pinned solution")
    p.add_argument("--report", type=str, default=None, help="Write a ground-truth report per case under this directory")
    p.set_defaults(func=cmd_cases)

    p = commands.add_parser("prompt", help="Print the rendered prompt of one stage")
    p.add_argument("--case", type=int, required=True, help=f"Case id, 1 to {N_CASES}")
    p.add_argument("--stage", type=int, choices=(1, 2, 3), required=True)
    p.add_argument("--instructions", nargs="+", default=["all"])
    p.add_argument("--exemplar", type=int, default=1)
    p.add_argument("--upstream", type=str, default=None, help="File holding the previous stage output")
    p.set_defaults(func=cmd_prompt)

    p = commands.add_parser("run", help="Best-of-N attempts at one case")
    p.add_argument("--case", type=int, required=True)
    p.add_argument("--n", type=int, default=3, help="Attempts, default 3")
    p.add_argument("--out", type=str, default=None, help="Write a report of the best attempt here")
    _add_provider_arguments(p)
    p.set_defaults(func=cmd_run)

    p = commands.add_parser("bench", help="Accuracy matrix over the benchmark")
    p.add_argument("--n", type=int, default=3, help="Attempts per case in best_of_n mode, default 3")
    p.add_argument("--repeats", type=int, default=5, help="Attempts per case in stability mode, default 5")
    p.add_argument("--mode", choices=MODES, default="best_of_n")
    p.add_argument("--cases", type=int, nargs="+", default=None, help="Case ids, default all")
    p.add_argument("--workers", type=int, default=4, help="Cases run concurrently, default 4")
    _add_provider_arguments(p)
    p.set_defaults(func=cmd_bench)

    p = commands.add_parser("stability", help="Success rate over repeated single attempts")
    p.add_argument("--case", type=int, nargs="+", required=True)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--workers", type=int, default=4)
    _add_provider_arguments(p)
    p.set_defaults(func=cmd_stability)

    p = commands.add_parser("ablate", help="Success rate per instruction condition")
    p.add_argument("--case", type=int, required=True)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument(
        "--conditions",
        nargs="+",
        default=["all", "none"],
        help="all, none, an instruction id, or ids joined with +",
    )
    _add_provider_arguments(p)
    p.set_defaults(func=cmd_ablate)

    p = commands.add_parser("golden", help="Record a scripted transcript set for replay")
    p.add_argument("--plan", type=str, default="golden", help="golden, degraded or a plan JSON file")
    p.add_argument("--out", type=str, required=True, help="Transcript directory")
    p.add_argument("--n", type=int, default=3, help="Samples per case, default 3")
    p.add_argument("--overwrite", action="store_true")
    p.set_defaults(func=cmd_golden)

    return parser


def provider_config(args) -> ProviderConfig:
    """Provider settings from the environment, overridden by flags"""
    provider = args.provider or ("replay" if args.replay else None)
    model = args.model
    replay_dir = resolve_transcript_dir(args.replay) if args.replay else None
    if (provider or os.environ.get("SAWP_PROVIDER")) == "replay" and model is None and replay_dir:
        manifest = TranscriptStore(replay_dir).read_manifest()
        model = manifest[1] if manifest else "recorded"
    return ProviderConfig.from_env(
        provider=provider,
        model=model,
        temperature=args.temperature,
        requests_per_minute=args.rpm,
        timeout=args.timeout,
        retries=args.retries,
        replay_dir=replay_dir,
        record_dir=Path(args.record) if args.record else None,
        plan=args.plan,
        overwrite=args.overwrite or None,
    )


def _options(args):
    instructions = args.instructions
    if len(instructions) == 1 and instructions[0] in ("all", "none"):
        return condition_options(instructions[0], args.exemplar)
    return condition_options(tuple(instructions), args.exemplar)


def _store(args):
    return RunStore(args.runs) if args.runs else None


def cmd_solve(args) -> int:
    model = read_document(args.model)
    for finding in validate(model).findings:
        logger.warning("{} {}", finding.lint_id, finding.message)
    result = solve(model)
    bundle = build_report(model, result, args.out)
    print(f"Solved {len(model.nodes)} nodes and {len(model.elements)} elements; report at {bundle.report}")
    return 0


def cmd_validate(args) -> int:
    report = validate(read_document(args.model))
    for finding in report.findings:
        print(f"{finding.lint_id}: {finding.message} {list(finding.offending_ids)}")
    if report.ok:
        print(f"{args.model}: no findings")
    return 1 if args.strict and not report.ok else 0


def cmd_cases(args) -> int:
    if args.pin:
        for path in pin_solutions():
            print(f"Pinned {path}")
        return 0
    for case in load_cases():
        counts = case.truth_model.kind_counts()
        print(
            f"{case.id:2d}  {case.pattern:<9}  {len(case.truth_model.nodes):2d} nodes  "
            f"{counts.columns} columns  {counts.girders} girders  {counts.diagonals} diagonals  "
            f"{counts.cantilevers} cantilevers"
        )
        if args.report:
            build_report(case, None, Path(args.report) / f"case_{case.id:02d}")
    return 0


def cmd_prompt(args) -> int:
    upstream = None
    if args.upstream:
        with open(args.upstream, "r", encoding="utf-8") as f:
            upstream = f.read()
    case = case_by_id(args.case)
    options = _options(args)
    bundle = build_stage_prompt(case, args.stage, options, upstream=upstream)
    print(render_messages(bundle).text())
    return 0


def cmd_run(args) -> int:
    case = case_by_id(args.case)
    solved, attempts = run_case_best_of_n(case, args.n, _options(args), provider_config(args), _store(args))
    for attempt in attempts:
        status = attempt.infrastructure_error or attempt.error_type.value
        print(f"case {case.id} attempt {attempt.index}: {status}")
    print(f"case {case.id}: {'solved' if solved else 'unsolved'} with best of {args.n}")
    if args.out:
        reportable = [a for a in attempts if a.model is not None]
        best = next((a for a in reportable if a.solved), reportable[0] if reportable else None)
        if best is not None:
            print(f"Report at {build_report(case, best, args.out).report}")
    return 0


def _print_matrix(matrix):
    print(matrix.cells.to_string(na_rep="-"))
    for label, row in matrix.summary().iterrows():
        print(f"{label}: {int(row['solved'])}/{int(row['graded'])} solved, overall {row['overall']:.0%}")
        print(f"{label} errors: {matrix.histogram.get(label, {})}")


def cmd_bench(args) -> int:
    cases = [case_by_id(k) for k in args.cases] if args.cases else None
    matrix = run_benchmark(
        [provider_config(args)],
        cases=cases,
        mode=args.mode,
        options=_options(args),
        n=args.n,
        repeats=args.repeats,
        store=_store(args),
        workers=args.workers,
        progress=True,
    )
    _print_matrix(matrix)
    return 0


def cmd_stability(args) -> int:
    matrix = run_benchmark(
        [provider_config(args)],
        cases=[case_by_id(k) for k in args.case],
        mode="stability",
        options=_options(args),
        repeats=args.repeats,
        store=_store(args),
        workers=args.workers,
    )
    label = matrix.configs[0]
    rates = {k: matrix.cell(label, k) for k in matrix.case_ids}
    for case_id, rate in rates.items():
        print(f"case {case_id}: {'-' if rate is None else f'{rate:.0%}'}")
    for bucket, ids in stability_buckets(rates).items():
        print(f"{bucket}: {', '.join(str(k) for k in ids)}")
    return 0


def cmd_ablate(args) -> int:
    rates = run_ablation(
        case_by_id(args.case), args.conditions, args.repeats, provider_config(args), args.exemplar, _store(args)
    )
    for condition, rate in rates.items():
        print(f"case {args.case} [{condition}]: {'-' if rate is None else f'{rate:.0%}'}")
    return 0


def cmd_golden(args) -> int:
    config = ProviderConfig(
        provider="scripted", model=Path(args.plan).stem, plan=args.plan,
        record_dir=Path(args.out), overwrite=args.overwrite,
    )
    matrix = run_benchmark([config], n=args.n)
    label = matrix.configs[0]
    print(f"Recorded {args.plan} transcripts in {args.out}: {len(matrix.solved_cases(label))}/{N_CASES} solved")
    return 0


def main(argv=None) -> int:
    parser = get_args_sawp()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    try:
        configure_logging(args.log_level)
        return args.func(args)
    except SawpError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"invalid argument: {e}", file=sys.stderr)
        return 2


def run():
    sys.exit(main())
