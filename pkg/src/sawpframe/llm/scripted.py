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

"""Offline provider answering stage prompts from the benchmark ground truth.

A plan says, per case and sample index, which answer to give at stage 2:
``truth``, ``unparseable`` (no fenced block) or the name of a mutation. Stage
1 and stage 3 always answer from the ground truth.
"""

import json
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, NamedTuple, Union

from sawpframe.benchmark.cases import SAWPCase, case_by_id
from sawpframe.benchmark.mutants import EXPECTED, MutantSpec, mutate_case
from sawpframe.fem.parameters import ParameterSet
from sawpframe.frame.document import serialize_document, visualization_to_dict

GOLDEN_DIR = Path(__file__).resolve().parent.parent / "assets" / "golden"
OUTCOMES = ("truth", "unparseable") + tuple(EXPECTED)

UNPARSEABLE_ANSWER = (
    "The frame described has several members and supports. "
    "I would model it with nodes at each joint and apply the loads as stated."
)


class RequestTag(NamedTuple):
    """Which case and stage a request belongs to"""
    case_id: int
    stage: int


def _check_plan(plan: Dict[str, Any], where: str) -> Dict[str, Any]:
    outcomes = [plan.get("default", "truth")]
    for outcome_list in plan.get("cases", {}).values():
        outcomes.extend(outcome_list)
    unknown = sorted(set(outcomes) - set(OUTCOMES))
    if unknown:
        raise ValueError(f"Plan {where} has unknown outcomes {unknown}, choose from {list(OUTCOMES)}")
    return plan


@lru_cache(maxsize=None)
def load_plan(name: str) -> Dict[str, Any]:
    """A bundled plan by name (``golden``, ``degraded``) or a plan JSON file

    Raises:
        ValueError: no such plan, or it names unknown outcomes
    """
    path = Path(name)
    if not path.suffix:
        path = GOLDEN_DIR / f"{name}.json"
    if not path.is_file():
        bundled = sorted(p.stem for p in GOLDEN_DIR.glob("*.json"))
        raise ValueError(f"No answer plan {name!r}; bundled plans are {bundled}")
    with open(path, "r", encoding="utf-8") as f:
        return _check_plan(json.load(f), name)


def _fenced(text: str) -> str:
    return f"```json\n{text.rstrip()}\n```\n"


class ScriptedResponder:
    def __init__(self, plan: Union[str, Dict[str, Any]]):
        self.plan = load_plan(plan) if isinstance(plan, str) else _check_plan(plan, "given")

    def outcome(self, case_id: int, sample: int) -> str:
        planned = self.plan.get("cases", {}).get(str(case_id), [])
        return planned[sample] if sample < len(planned) else self.plan.get("default", "truth")

    def respond(self, tag: RequestTag, sample: int = 0) -> str:
        """Answer text for one stage of one case

        Raises:
            UnknownCaseError: the tag names no benchmark case
            InapplicableMutationError: the planned mutation does not fit the case
        """
        case: SAWPCase = case_by_id(tag.case_id)
        if tag.stage == 1:
            parameters = ParameterSet.from_model(case.truth_model)
            return "Extracted parameters:\n" + _fenced(json.dumps(parameters.to_dict(), indent=2))
        if tag.stage == 3:
            return "Requested diagrams:\n" + _fenced(json.dumps(visualization_to_dict(case.visualization), indent=2))

        outcome = self.outcome(case.id, sample)
        if outcome == "unparseable":
            return UNPARSEABLE_ANSWER
        model = case.truth_model
        if outcome != "truth":
            model = mutate_case(case, MutantSpec.of(case.id, outcome))
        return "Frame model:\n" + _fenced(serialize_document(model))
