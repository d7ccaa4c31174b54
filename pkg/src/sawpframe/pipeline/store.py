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

"""Run artifacts on disk.

Layout under ``<root>/<timestamp>/``::

    matrix.json
    errors.json
    <config>/case_01/attempt_0/stage1.txt ... attempt.json
"""

import json
import threading
from collections import defaultdict
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Union

from sawpframe.fem.solver import write_result
from sawpframe.frame.document import write_document
from sawpframe.grading.grader import Aggregate, ErrorType, error_histogram, pass_at_k
from sawpframe.pipeline.experiments import AccuracyMatrix
from sawpframe.pipeline.stages import Attempt


def slug(label: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in label)


def _write_json(path: Path, doc) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(doc, f, indent=2, ensure_ascii=False)
        f.write("\n")
    return path


class RunStore:
    """Append-only store of one run's attempts and results.

    Args:
        root (Union[str, Path]): directory holding runs, e.g. ``runs``
        timestamp (Optional[str], optional): run directory name. Defaults to
            the current local time.
    """

    def __init__(self, root: Union[str, Path], timestamp: Optional[str] = None):
        self.timestamp = timestamp or datetime.now().strftime("%Y%m%d-%H%M%S")
        self.directory = Path(root) / self.timestamp
        self._lock = threading.Lock()

    def attempt_dir(self, label: str, case_id: int, index: int) -> Path:
        return self.directory / slug(label) / f"case_{case_id:02d}" / f"attempt_{index}"

    def write_attempt(self, label: str, attempt: Attempt) -> Path:
        """Writes stage texts, the assembled model, its solution, the grade
        and an ``attempt.json`` summary
        """
        directory = self.attempt_dir(label, attempt.case_id, attempt.index)
        with self._lock:
            directory.mkdir(parents=True, exist_ok=True)
            for stage in attempt.stages:
                with open(directory / f"stage{stage.stage}.txt", "w", encoding="utf-8", newline="\n") as f:
                    f.write(stage.raw_text)
            if attempt.model is not None:
                write_document(attempt.model, directory / "model.fmd.json")
            if attempt.result is not None:
                write_result(attempt.result, directory / "solution.json")
            if attempt.grade is not None:
                _write_json(directory / "grade.json", attempt.grade.to_dict())
            doc = attempt.to_dict()
            doc.pop("solution")
            _write_json(directory / "attempt.json", {"config": label, **doc})
        return directory

    def write_matrix(self, matrix: AccuracyMatrix) -> Path:
        with self._lock:
            _write_json(self.directory / "errors.json", {c: matrix.histogram.get(c, {}) for c in matrix.configs})
            return _write_json(self.directory / "matrix.json", matrix.to_dict())


def read_attempt_records(run_dir: Union[str, Path]) -> List[Dict]:
    records = []
    for path in sorted(Path(run_dir).glob("*/case_*/attempt_*/attempt.json")):
        with open(path, "r", encoding="utf-8") as f:
            records.append(json.load(f))
    return records


def reconstruct_matrix(run_dir: Union[str, Path], mode: Optional[str] = None) -> AccuracyMatrix:
    """Recomputes a run's matrix from its persisted attempt records.

    Args:
        run_dir (Union[str, Path]): a ``runs/<timestamp>`` directory
        mode (Optional[str], optional): defaults to the mode in matrix.json

    Returns:
        AccuracyMatrix: cells, pass@1 and histogram, without attempts
    """
    run_dir = Path(run_dir)
    configs: List[str] = []
    case_ids: List[int] = []
    matrix_path = run_dir / "matrix.json"
    if matrix_path.is_file():
        with open(matrix_path, "r", encoding="utf-8") as f:
            saved = json.load(f)
        mode = mode or saved["mode"]
        configs = [c["label"] for c in saved["configs"]]
        if saved["configs"]:
            case_ids = [int(k) for k in saved["configs"][0]["cells"]]
    mode = mode or "best_of_n"

    groups = defaultdict(list)
    for record in read_attempt_records(run_dir):
        groups[(record["config"], record["case_id"])].append(record)
    configs = configs or sorted({c for c, _ in groups})
    case_ids = case_ids or sorted({k for _, k in groups})

    aggregate = Aggregate(mode=mode)
    failed = defaultdict(list)
    for key, records in groups.items():
        graded = [r for r in records if r["infrastructure_error"] is None]
        if len(graded) != len(records):
            aggregate.infrastructure_failures[key] = len(records) - len(graded)
        if not graded:
            aggregate.cells[key] = aggregate.pass_at_1[key] = None
            continue
        types = [ErrorType(r["error_type"]) for r in graded]
        correct = types.count(ErrorType.NONE)
        failed[key[0]].extend(types)
        if mode == "best_of_n":
            aggregate.cells[key] = 1.0 if correct else 0.0
        else:
            aggregate.cells[key] = correct / len(graded)
        aggregate.pass_at_1[key] = pass_at_k(len(graded), correct, 1)
    aggregate.histogram = {c: error_histogram(types) for c, types in failed.items()}
    return AccuracyMatrix.from_aggregate(aggregate, configs, case_ids)
