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

"""Scoring generated frame models against the benchmark ground truth"""

import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from sawpframe.errors import KernelError, ShapeMismatchError
from sawpframe.fem.solver import SolveResult, results_close, solve
from sawpframe.frame.canonical import ModelDiff, canonicalize, diff_models
from sawpframe.frame.model import FrameModel

MODES = ("best_of_n", "stability")


class ErrorType(str, Enum):
    NONE = "none"
    TYPE1 = "type1_layout"
    TYPE2 = "type2_boundary"
    NUMERIC = "numeric_mismatch"
    UNPARSEABLE = "unparseable"
    UNSOLVABLE = "unsolvable"


@dataclass(frozen=True)
class Tolerances:
    coordinate: float = 1e-9
    load_rtol: float = 1e-6
    numeric_rtol: float = 1e-3
    numeric_atol: float = 1e-9


@dataclass(frozen=True)
class StructureGrade:
    layout: bool
    support: bool
    load: bool
    diff: ModelDiff


@dataclass(frozen=True)
class GradeReport:
    layout_match: bool
    support_match: bool
    load_match: bool
    numeric_match: bool
    error_type: ErrorType
    diff_summary: str = ""
    tolerances: Tolerances = field(default_factory=Tolerances)

    @property
    def correct(self) -> bool:
        return self.error_type is ErrorType.NONE

    @classmethod
    def failed(cls, error_type: ErrorType, summary: str = "") -> "GradeReport":
        return cls(False, False, False, False, error_type, summary)

    def to_dict(self) -> Dict:
        doc = asdict(self)
        doc["error_type"] = self.error_type.value
        return doc

    @classmethod
    def from_dict(cls, doc: Mapping) -> "GradeReport":
        return cls(
            layout_match=bool(doc["layout_match"]),
            support_match=bool(doc["support_match"]),
            load_match=bool(doc["load_match"]),
            numeric_match=bool(doc["numeric_match"]),
            error_type=ErrorType(doc["error_type"]),
            diff_summary=doc.get("diff_summary", ""),
            tolerances=Tolerances(**doc.get("tolerances", {})),
        )


def error_type_for(layout: bool, support: bool, load: bool, numeric: bool) -> ErrorType:
    """Failure class of a parsed, solvable model; layout failures take
    precedence over boundary failures, which take precedence over numbers.
    """
    if not layout:
        return ErrorType.TYPE1
    if not (support and load):
        return ErrorType.TYPE2
    if not numeric:
        return ErrorType.NUMERIC
    return ErrorType.NONE


def grade_structure(generated: FrameModel, truth: FrameModel) -> StructureGrade:
    """Compares layout, supports and loads by coordinates.

    Args:
        generated (FrameModel): model under test
        truth (FrameModel): ground truth

    Returns:
        StructureGrade: the three match flags and the underlying diff
    """
    diff = diff_models(canonicalize(generated), canonicalize(truth))
    return StructureGrade(diff.layout_clean, diff.supports_clean, diff.loads_clean, diff)


def grade_numeric(generated: SolveResult, truth: SolveResult, tol: Tolerances = Tolerances()) -> bool:
    """True when every displacement and end force agrees within
    ``max(numeric_rtol * |truth|, numeric_atol)``.

    Raises:
        ShapeMismatchError: the results cover different nodes or elements
    """
    return results_close(generated, truth, rtol=tol.numeric_rtol, atol=tol.numeric_atol)


@lru_cache(maxsize=256)
def _reference_solution(canonical_truth: FrameModel) -> SolveResult:
    return solve(canonical_truth)


def grade_model(generated: FrameModel, truth: FrameModel, tol: Tolerances = Tolerances()) -> GradeReport:
    """Grades a parsed model end to end.

    Both models are put in canonical form and solved; results are compared
    only when the layouts agree.

    Args:
        generated (FrameModel): model under test
        truth (FrameModel): ground truth
        tol (Tolerances, optional): tolerances. Defaults to Tolerances().

    Returns:
        GradeReport: match flags and error class
    """
    structure = grade_structure(generated, truth)
    summary = structure.diff.summary()

    numeric = False
    try:
        generated_result = solve(canonicalize(generated))
    except KernelError as e:
        return GradeReport(
            structure.layout, structure.support, structure.load, False,
            ErrorType.UNSOLVABLE, "\n".join(filter(None, [str(e), summary])), tol,
        )

    if structure.layout:
        try:
            numeric = grade_numeric(generated_result, _reference_solution(canonicalize(truth)), tol)
        except ShapeMismatchError:
            numeric = False

    error_type = error_type_for(structure.layout, structure.support, structure.load, numeric)
    return GradeReport(structure.layout, structure.support, structure.load, numeric, error_type, summary, tol)


def classify_error(attempt) -> ErrorType:
    """Failure class of a graded attempt.

    Unparseable output wins over an unsolvable model, which wins over layout,
    boundary and numeric mismatches in that order.

    Args:
        attempt: a :class:`sawpframe.pipeline.stages.Attempt`

    Raises:
        ValueError: the attempt failed for infrastructure reasons and was
            never graded

    Returns:
        ErrorType: exactly one class
    """
    if attempt.infrastructure_error is not None:
        raise ValueError(f"Attempt {attempt.index} of case {attempt.case_id} was not graded")
    if attempt.model is None or any(not s.ok for s in attempt.stages):
        return ErrorType.UNPARSEABLE
    grade = attempt.grade
    if grade.error_type is ErrorType.UNSOLVABLE:
        return ErrorType.UNSOLVABLE
    return error_type_for(grade.layout_match, grade.support_match, grade.load_match, grade.numeric_match)


def pass_at_k(n: int, c: int, k: int) -> float:
    """Unbiased estimate of the chance that k of n samples, c of them correct,
    contain a correct one: ``1 - C(n - c, k) / C(n, k)``.

    Raises:
        ValueError: inconsistent n, c, k
    """
    if not 0 <= c <= n or not 1 <= k <= n:
        raise ValueError(f"Need 0 <= c <= n and 1 <= k <= n, got n={n}, c={c}, k={k}")
    if n - c < k:
        return 1.0
    return float(1.0 - np.prod(1.0 - k / np.arange(n - c + 1, n + 1)))


@dataclass
class Aggregate:
    """Per (config, case) cells plus failure counts.

    A cell is None when every attempt of that case failed for
    infrastructure reasons.
    """
    mode: str
    cells: Dict[Tuple[str, int], Optional[float]] = field(default_factory=dict)
    pass_at_1: Dict[Tuple[str, int], Optional[float]] = field(default_factory=dict)
    histogram: Dict[str, Dict[str, int]] = field(default_factory=dict)
    infrastructure_failures: Dict[Tuple[str, int], int] = field(default_factory=dict)

    def overall(self, config: str) -> float:
        values = [v for (c, _), v in self.cells.items() if c == config and v is not None]
        return float(np.mean(values)) if values else math.nan


def aggregate_accuracy(
    groups: Mapping[Tuple[str, int], Sequence], mode: str = "best_of_n"
) -> Aggregate:
    """Turns graded attempts into accuracy cells and an error histogram.

    Args:
        groups (Mapping[Tuple[str, int], Sequence]): attempts keyed by
            (config label, case id)
        mode (str, optional): ``best_of_n`` marks a case solved when any
            attempt is correct, ``stability`` reports the fraction of correct
            attempts. Defaults to "best_of_n".

    Raises:
        ValueError: unknown mode

    Returns:
        Aggregate: cells, pass@1 estimates, histogram of failed attempts per
            config, and infrastructure failure counts
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")

    result = Aggregate(mode=mode)
    error_types: Dict[str, List[ErrorType]] = {}
    for (config, case_id), attempts in groups.items():
        graded = [a for a in attempts if a.infrastructure_error is None]
        failures = len(attempts) - len(graded)
        if failures:
            result.infrastructure_failures[(config, case_id)] = failures

        types = [classify_error(a) for a in graded]
        error_types.setdefault(config, []).extend(types)
        correct = types.count(ErrorType.NONE)

        if not graded:
            result.cells[(config, case_id)] = None
            result.pass_at_1[(config, case_id)] = None
            continue
        if mode == "best_of_n":
            result.cells[(config, case_id)] = 1.0 if correct else 0.0
        else:
            result.cells[(config, case_id)] = correct / len(graded)
        result.pass_at_1[(config, case_id)] = pass_at_k(len(graded), correct, 1)

    result.histogram = {config: error_histogram(types) for config, types in error_types.items()}
    return result


def _bucket(rate: float) -> Tuple[float, str]:
    if rate >= 1.0:
        return (1.0, "100%")
    if rate >= 0.6:
        return (0.6, "60%-80%")
    percent = round(rate * 100)
    return (percent / 100, f"{percent}%")


def stability_buckets(rates: Mapping[int, Optional[float]]) -> Dict[str, List[int]]:
    """Groups case ids by success rate, highest bucket first.

    Rates of 60% and 80% share a bucket; every other rate gets its own.
    """
    buckets: Dict[Tuple[float, str], List[int]] = {}
    for case_id, rate in sorted(rates.items()):
        if rate is None or math.isnan(rate):
            continue
        buckets.setdefault(_bucket(rate), []).append(case_id)
    return {label: ids for (_, label), ids in sorted(buckets.items(), reverse=True)}


def error_histogram(error_types: Iterable[ErrorType]) -> Dict[str, int]:
    counts = Counter(e.value for e in error_types if e is not ErrorType.NONE)
    return dict(sorted(counts.items()))
