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

"""Staged prompts: general template, task template, reasoning instructions,
a worked example and the question.
"""

import json
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from sawpframe.benchmark.cases import SAWPCase, case_by_id
from sawpframe.errors import SelfExemplarError
from sawpframe.fem.parameters import ParameterSet
from sawpframe.frame.document import serialize_document, visualization_to_dict

PROMPT_DIR = Path(__file__).resolve().parent.parent / "assets" / "prompts"
STAGES = (1, 2, 3)
SECTION_ORDER = ("general", "task_specific", "icl", "question")

# catalog order, instruction id -> asset file
INSTRUCTION_FILES = {
    "direction": "direction.txt",
    "number": "number.txt",
    "space_rationality": "space.txt",
    "distributed_direction": "distributed.txt",
}


def _read(path: Path) -> str:
    with open(path, "r", encoding="utf-8") as f:
        return f.read().strip("\n")


@dataclass(frozen=True)
class SystemInstruction:
    id: str
    title: str
    body: str
    steps: Tuple[str, ...]


def _steps(lines: List[str]) -> Tuple[str, ...]:
    steps: List[str] = []
    for line in lines:
        if line.startswith(" ") and steps:
            steps[-1] += "\n" + line.strip()
        elif line[:1].isdigit():
            steps.append(line.split(". ", 1)[1])
    return tuple(steps)


@lru_cache(maxsize=None)
def _catalog() -> Tuple[SystemInstruction, ...]:
    catalog = []
    for instruction_id, filename in INSTRUCTION_FILES.items():
        title, body = _read(PROMPT_DIR / "instructions" / filename).split("\n", 1)
        catalog.append(SystemInstruction(instruction_id, title, body, _steps(body.splitlines()[1:])))
    return tuple(catalog)


def instruction_catalog() -> List[SystemInstruction]:
    """The four structural reasoning instructions, in catalog order"""
    return list(_catalog())


@dataclass(frozen=True)
class PromptOptions:
    """Which instructions to include and which case serves as the worked
    example. ``instructions`` is ``"all"``, ``"none"`` or instruction ids.
    A case never serves as its own example: ``fallback_exemplar`` stands in
    when ``exemplar`` is the case being asked.
    """
    instructions: Union[str, Tuple[str, ...]] = "all"
    exemplar: int = 1
    fallback_exemplar: int = 3

    def __post_init__(self):
        if not isinstance(self.instructions, str):
            object.__setattr__(self, "instructions", tuple(self.instructions))
        self.instruction_ids()
        if self.exemplar == self.fallback_exemplar:
            raise ValueError("exemplar and fallback_exemplar must differ")

    def instruction_ids(self) -> Tuple[str, ...]:
        """Selected ids in catalog order

        Raises:
            ValueError: unknown instruction id or keyword
        """
        if self.instructions == "all":
            return tuple(INSTRUCTION_FILES)
        if self.instructions == "none":
            return ()
        if isinstance(self.instructions, str):
            raise ValueError(f"instructions must be 'all', 'none' or a list of ids, got {self.instructions!r}")
        unknown = set(self.instructions) - set(INSTRUCTION_FILES)
        if unknown:
            raise ValueError(f"Unknown instructions {sorted(unknown)}, choose from {list(INSTRUCTION_FILES)}")
        return tuple(i for i in INSTRUCTION_FILES if i in self.instructions)

    def exemplar_for(self, case_id: int) -> int:
        return self.fallback_exemplar if self.exemplar == case_id else self.exemplar

    def label(self) -> str:
        ids = self.instruction_ids()
        if len(ids) == len(INSTRUCTION_FILES):
            return "all"
        return "+".join(ids) if ids else "none"


@dataclass(frozen=True)
class PromptBundle:
    case_id: int
    stage: int
    sections: Tuple[Tuple[str, str], ...]
    instructions: Tuple[SystemInstruction, ...]
    exemplar_id: int

    @property
    def instruction_ids(self) -> Tuple[str, ...]:
        return tuple(i.id for i in self.instructions)

    def section(self, name: str) -> str:
        return dict(self.sections)[name]


@dataclass(frozen=True)
class Message:
    role: str
    content: str


@dataclass(frozen=True)
class MessageScript:
    messages: Tuple[Message, ...]

    def __post_init__(self):
        roles = [m.role for m in self.messages]
        if not roles or roles[0] != "system" or roles.count("system") != 1:
            raise ValueError("A message script needs exactly one system message, first")
        if not any(m.content for m in self.messages):
            raise ValueError("A message script needs some content")

    def to_dicts(self) -> List[Dict[str, str]]:
        return [{"role": m.role, "content": m.content} for m in self.messages]

    @classmethod
    def from_dicts(cls, messages) -> "MessageScript":
        return cls(tuple(Message(m["role"], m["content"]) for m in messages))

    def text(self) -> str:
        return "\n\n".join(f"[{m.role}]\n{m.content}" for m in self.messages)


def _fenced(text: str) -> str:
    return f"```json\n{text.rstrip()}\n```"


def exemplar_answer(exemplar: SAWPCase, stage: int) -> str:
    """The worked example's answer for a stage, in the stage's output format"""
    if stage == 1:
        return json.dumps(ParameterSet.from_model(exemplar.truth_model).to_dict(), indent=2)
    if stage == 2:
        bundled = PROMPT_DIR / "icl" / f"example{exemplar.id}.fmd.json"
        return _read(bundled) if bundled.exists() else serialize_document(exemplar.truth_model)
    return json.dumps(visualization_to_dict(exemplar.visualization), indent=2)


def _task_text(stage: int, upstream: Optional[str]) -> str:
    text = _read(PROMPT_DIR / f"task_stage{stage}.txt")
    if upstream is None:
        return text
    if stage == 2:
        return f"{text}\n\nParameters extracted from the problem:\n{upstream.strip()}"
    if stage == 3:
        return f"{text}\n\nFrame model of the problem:\n{_fenced(upstream)}"
    return text


def build_stage_prompt(
    case: SAWPCase,
    stage: int,
    options: PromptOptions = PromptOptions(),
    upstream: Optional[str] = None,
    exemplar: Optional[SAWPCase] = None,
) -> PromptBundle:
    """Assembles the prompt for one stage of one case.

    Args:
        case (SAWPCase): the problem being asked
        stage (int): 1 extracts parameters, 2 builds the frame model,
            3 picks diagrams
        options (PromptOptions, optional): instruction selection and worked
            example. Defaults to PromptOptions().
        upstream (Optional[str], optional): output of the previous stage, a
            parameter table for stage 2 or a frame model document for
            stage 3. Defaults to None.
        exemplar (Optional[SAWPCase], optional): worked example case.
            Defaults to the case ``options.exemplar`` names.

    Raises:
        ValueError: stage is not 1, 2 or 3
        SelfExemplarError: the worked example is the case being asked

    Returns:
        PromptBundle: ordered sections and the instructions they embed
    """
    if stage not in STAGES:
        raise ValueError(f"stage must be one of {STAGES}, got {stage}")
    if exemplar is None:
        if options.exemplar == case.id:
            raise SelfExemplarError(f"Case {case.id} cannot be its own worked example")
        exemplar = case_by_id(options.exemplar)
    if exemplar.id == case.id:
        raise SelfExemplarError(f"Case {case.id} cannot be its own worked example")

    selected = set(options.instruction_ids())
    instructions = tuple(i for i in _catalog() if i.id in selected)

    icl = (
        "Example problem:\n"
        f"{exemplar.description}\n\n"
        "Example answer:\n"
        f"{_fenced(exemplar_answer(exemplar, stage))}"
    )
    sections = (
        ("general", _read(PROMPT_DIR / "general.txt")),
        ("task_specific", _task_text(stage, upstream)),
        ("icl", icl),
        ("question", case.description),
    )
    return PromptBundle(case.id, stage, sections, instructions, exemplar.id)


def render_messages(bundle: PromptBundle) -> MessageScript:
    """Chat messages for a bundle: templates and instructions in the system
    message, the worked example and the question in the user message.
    """
    system = "\n\n".join(
        [bundle.section("general"), bundle.section("task_specific")]
        + [f"{i.title}\n{i.body}" for i in bundle.instructions]
    )
    user = f"{bundle.section('icl')}\n\nQuestion:\n{bundle.section('question')}"
    return MessageScript((Message("system", system), Message("user", user)))
