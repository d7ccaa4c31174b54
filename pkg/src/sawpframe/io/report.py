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

"""Markdown analysis reports with their CSV tables and SVG diagrams"""

from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional, Union

from loguru import logger

from sawpframe.benchmark.cases import SAWPCase
from sawpframe.fem.solver import SolveResult, write_result
from sawpframe.frame.document import serialize_document, write_document
from sawpframe.frame.model import FrameModel, VisualizationSpec
from sawpframe.grading.grader import GradeReport
from sawpframe.io.diagrams import render_diagrams
from sawpframe.io.tables import (
    displacements_table,
    export_forces_csv,
    export_reactions_csv,
    forces_table,
    reactions_table,
)
from sawpframe.pipeline.stages import Attempt

REPORT_NAME = "report.md"


@dataclass
class ReportBundle:
    """Files of one report; every path exists once :func:`build_report`
    returns"""
    report: Path
    description: str
    model_path: Path
    solution_path: Optional[Path] = None
    diagrams: List[Path] = field(default_factory=list)
    tables: List[Path] = field(default_factory=list)
    grade: Optional[GradeReport] = None
    generated: str = ""


def _markdown_table(table, digits: int = 6) -> List[str]:
    header = "| " + " | ".join(str(c) for c in table.columns) + " |"
    lines = [header, "|" + " --- |" * len(table.columns)]
    for row in table.itertuples(index=False):
        cells = [f"{v:.{digits}g}" if isinstance(v, float) else str(v) for v in row]
        lines.append("| " + " | ".join(cells) + " |")
    return lines


def _grade_lines(grade: GradeReport) -> List[str]:
    lines = [
        "## Grade",
        "",
        f"- error type: {grade.error_type.value}",
        f"- layout match: {'yes' if grade.layout_match else 'no'}",
        f"- support match: {'yes' if grade.support_match else 'no'}",
        f"- load match: {'yes' if grade.load_match else 'no'}",
        f"- numeric match: {'yes' if grade.numeric_match else 'no'}",
    ]
    if grade.diff_summary:
        lines += ["", "```", grade.diff_summary, "```"]
    return lines + [""]


def build_report(
    subject: Union[SAWPCase, FrameModel],
    outcome: Union[Attempt, SolveResult, None],
    out_dir: Union[str, Path],
    generated: Optional[str] = None,
) -> ReportBundle:
    """Writes a Markdown report with its model, solution, CSV tables and
    diagrams into ``out_dir``.

    Args:
        subject (Union[SAWPCase, FrameModel]): a benchmark case, or an ad-hoc
            model
        outcome (Union[Attempt, SolveResult, None]): a graded attempt at the
            case, a solution of the model, or None to report the case's
            ground truth
        out_dir (Union[str, Path]): output directory
        generated (Optional[str], optional): timestamp written to the report.
            Defaults to the current UTC time.

    Raises:
        ValueError: an attempt with no model, or nothing to report

    Returns:
        ReportBundle: the files written
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    generated = generated or datetime.now(timezone.utc).isoformat(timespec="seconds")

    description, title, grade = "", "Frame analysis", None
    if isinstance(subject, SAWPCase):
        description, title = subject.description, f"Benchmark case {subject.id}"
        model, result = subject.truth_model, subject.truth_solution
    else:
        model, result = subject, None

    if isinstance(outcome, Attempt):
        if outcome.model is None:
            raise ValueError(f"Attempt {outcome.index} of case {outcome.case_id} produced no model")
        model, result, grade = outcome.model, outcome.result, outcome.grade
        title = f"{title}, attempt {outcome.index}"
    elif isinstance(outcome, SolveResult):
        result = outcome

    bundle = ReportBundle(
        report=out_dir / REPORT_NAME,
        description=description,
        model_path=write_document(model, out_dir / "model.fmd.json"),
        grade=grade,
        generated=generated,
    )

    lines = [f"# {title}", "", f"Generated: {generated}", ""]
    if description:
        lines += ["## Problem", "", description, ""]
    lines += ["## Frame model", "", "```json", serialize_document(model).rstrip(), "```", ""]

    if result is None:
        lines += ["## Solution", "", "The model could not be solved.", ""]
    else:
        bundle.solution_path = write_result(result, out_dir / "solution.json")
        bundle.tables = [
            export_forces_csv(result, out_dir / "forces.csv"),
            export_reactions_csv(result, out_dir / "reactions.csv"),
        ]
        lines += ["## Node displacements", ""] + _markdown_table(displacements_table(result)) + [""]
        lines += ["## Element end forces", ""] + _markdown_table(forces_table(result)) + [""]
        lines += ["## Support reactions", ""] + _markdown_table(reactions_table(result)) + [""]
        lines += ["## Tables", ""] + [f"- [{p.name}]({p.name})" for p in bundle.tables] + [""]

    visualization = model.visualization
    if visualization is None and isinstance(subject, SAWPCase):
        visualization = subject.visualization
    bundle.diagrams = render_diagrams(model, result, visualization or VisualizationSpec(), out_dir)
    lines += [
        "## Diagrams",
        "",
        "End forces act on the member in local axes; moment diagrams are drawn on the tension side, "
        "positive moments sag.",
        "",
    ]
    lines += [f"![{p.stem}]({p.name})" for p in bundle.diagrams] + [""]

    if grade is not None:
        lines += _grade_lines(grade)

    with open(bundle.report, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines))
    logger.info("Wrote report to {}", bundle.report)
    return bundle
