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

"""The bundled structural analysis word problems.

Each case directory under ``assets/benchmark`` holds ``description.txt``,
``truth.fmd.json``, ``truth.solution.json`` and ``meta.json``.
"""

import json
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import List, Optional, Sequence, Union

from loguru import logger

from sawpframe.errors import AssetCorruptionError, UnknownCaseError
from sawpframe.fem.solver import SolveResult, read_result, results_close, solve, write_result
from sawpframe.frame.document import read_document, visualization_from_dict
from sawpframe.frame.lints import validate
from sawpframe.frame.model import FrameModel, StatedCounts, VisualizationSpec

BENCHMARK_DIR = Path(__file__).resolve().parent.parent / "assets" / "benchmark"
PATTERNS = ("scaling", "asymmetry", "features")
N_CASES = 20

# pinned solutions carry 9 significant digits
PIN_RTOL = 1e-7
PIN_FLOOR = 1e-9


@dataclass(frozen=True)
class SAWPCase:
    id: int
    description: str
    truth_model: FrameModel
    truth_solution: SolveResult
    pattern: str
    visualization: VisualizationSpec

    @property
    def stated_counts(self) -> Optional[StatedCounts]:
        return self.truth_model.stated_counts


def case_dir(case_id: int, root: Optional[Path] = None) -> Path:
    return Path(root or BENCHMARK_DIR) / f"case_{case_id:02d}"


def _read_meta(directory: Path) -> dict:
    with open(directory / "meta.json", "r", encoding="utf-8") as f:
        return json.load(f)


def load_case(case_id: int, root: Optional[Path] = None, verify: bool = True) -> SAWPCase:
    """Loads one case from its asset directory.

    Args:
        case_id (int): case number
        root (Optional[Path], optional): benchmark directory. Defaults to the
            bundled assets.
        verify (bool, optional): check lints and the pinned solution.
            Defaults to True.

    Raises:
        UnknownCaseError: no directory for this case
        AssetCorruptionError: the truth model fails a lint, its stated
            counts disagree with meta.json, or a fresh solve disagrees with
            the pinned solution

    Returns:
        SAWPCase: the case
    """
    directory = case_dir(case_id, root)
    if not directory.is_dir():
        raise UnknownCaseError(f"No benchmark case {case_id} under {directory.parent}")

    with open(directory / "description.txt", "r", encoding="utf-8") as f:
        description = f.read().strip()
    meta = _read_meta(directory)
    model = read_document(directory / "truth.fmd.json")
    pinned = read_result(directory / "truth.solution.json")

    pattern = meta["pattern"]
    if pattern not in PATTERNS:
        raise AssetCorruptionError(f"Case {case_id} has unknown pattern {pattern!r}")
    visualization = visualization_from_dict(meta["visualization"])

    if verify:
        report = validate(model, severity="error")
        if not report.ok:
            messages = "; ".join(f.message for f in report.findings)
            raise AssetCorruptionError(f"Case {case_id} truth model fails lints: {messages}")
        if model.stated_counts is not None and list(model.stated_counts) != [
            meta["stated_counts"][k] for k in StatedCounts._fields
        ]:
            raise AssetCorruptionError(f"Case {case_id} stated counts disagree with meta.json")
        if not results_close(solve(model), pinned, rtol=PIN_RTOL, floor=PIN_FLOOR):
            raise AssetCorruptionError(f"Case {case_id} pinned solution disagrees with a fresh solve")

    return SAWPCase(
        id=case_id,
        description=description,
        truth_model=model,
        truth_solution=pinned,
        pattern=pattern,
        visualization=visualization,
    )


@lru_cache(maxsize=None)
def _bundled_cases() -> tuple:
    logger.debug("Loading bundled benchmark from {}", BENCHMARK_DIR)
    return tuple(load_case(k) for k in range(1, N_CASES + 1))


def load_cases(root: Optional[Union[str, Path]] = None, verify: bool = True) -> List[SAWPCase]:
    """All benchmark cases, ids 1..20.

    The bundled set is loaded and verified once per process.

    Raises:
        AssetCorruptionError: a case fails verification
    """
    if root is None and verify:
        return list(_bundled_cases())
    return [load_case(k, Path(root) if root else None, verify) for k in range(1, N_CASES + 1)]


def case_by_id(case_id: int, cases: Optional[Sequence[SAWPCase]] = None) -> SAWPCase:
    """The case with the given id.

    Raises:
        UnknownCaseError: id outside 1..20
    """
    for case in cases if cases is not None else load_cases():
        if case.id == case_id:
            return case
    raise UnknownCaseError(f"No benchmark case {case_id}; ids run from 1 to {N_CASES}")


def pin_solutions(root: Optional[Union[str, Path]] = None) -> List[Path]:
    """Re-solves every truth model and rewrites its ``truth.solution.json``"""
    written = []
    for case in load_cases(root, verify=False):
        path = case_dir(case.id, Path(root) if root else None) / "truth.solution.json"
        written.append(write_result(solve(case.truth_model), path))
        logger.info("Pinned solution of case {}", case.id)
    _bundled_cases.cache_clear()
    return written
