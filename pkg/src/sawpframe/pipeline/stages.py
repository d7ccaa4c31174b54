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

"""One attempt at a case: three prompted stages, assembly, solve and grade"""

import json
import re
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Mapping, Optional, Union

from loguru import logger

from sawpframe.benchmark.cases import SAWPCase
from sawpframe.errors import GatewayError, KernelError, ModelError, ReplayMissError
from sawpframe.fem.parameters import ParameterSet
from sawpframe.fem.solver import SolveResult, result_to_dict, solve
from sawpframe.frame.document import model_from_dict, serialize_document, visualization_from_dict
from sawpframe.frame.lints import ValidationReport, validate
from sawpframe.frame.model import ELEMENT_KINDS, FrameModel
from sawpframe.grading.grader import ErrorType, GradeReport, Tolerances, classify_error, grade_model
from sawpframe.llm.config import ProviderConfig
from sawpframe.llm.gateway import Gateway
from sawpframe.llm.scripted import RequestTag
from sawpframe.prompts.forge import PromptOptions, build_stage_prompt, render_messages

FENCE = re.compile(r"```(?:json)?[ \t]*\n(.*?)```", re.DOTALL)
STATUSES = ("ok", "unparseable")


def extract_fenced_block(text: str) -> str:
    """Contents of the single fenced block in a response

    Raises:
        ValueError: no fenced block, or more than one
    """
    blocks = FENCE.findall(text)
    if len(blocks) != 1:
        raise ValueError(f"Expected exactly one fenced block, found {len(blocks)}")
    return blocks[0]


@dataclass(frozen=True)
class StageOutput:
    """Raw response of one stage and what it parsed into: a ParameterSet for
    stage 1, a FrameModel for stage 2 and a VisualizationSpec for stage 3.
    """
    stage: int
    raw_text: str
    payload: Any = None
    status: str = "ok"
    error: str = ""
    digest: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"status must be one of {STATUSES}, got {self.status!r}")
        if (self.payload is not None) != (self.status == "ok"):
            raise ValueError("A stage output has a payload exactly when it parsed")

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> Dict[str, Any]:
        return {"stage": self.stage, "status": self.status, "error": self.error, "digest": self.digest}


def assemble_model(parameters: ParameterSet, fragment: Mapping[str, Any]) -> FrameModel:
    """Builds the stage-2 model, taking element properties the fragment
    leaves out from the stage-1 parameters by element kind.

    Raises:
        SchemaError: the fragment does not follow the FMD schema
        ValueError: no section properties for an element's kind
    """
    doc = dict(fragment)
    elements = doc.get("elements")
    if isinstance(elements, list):
        filled = []
        for element in elements:
            if isinstance(element, dict) and element.get("kind") in ELEMENT_KINDS:
                element = dict(element)
                A, I = parameters.section(element["kind"])
                element.setdefault("E", parameters.E)
                element.setdefault("A", A)
                element.setdefault("I", I)
            filled.append(element)
        doc["elements"] = filled
    return model_from_dict(doc)


def parse_stage_output(
    stage: int, text: str, digest: str = "", parameters: Optional[ParameterSet] = None
) -> StageOutput:
    """Parses a stage response. Malformed output gives an ``unparseable``
    StageOutput, never an exception.

    Args:
        stage (int): 1, 2 or 3
        text (str): raw response
        digest (str, optional): request digest. Defaults to "".
        parameters (Optional[ParameterSet], optional): stage-1 result, needed
            to assemble a stage-2 model
    """
    try:
        doc = json.loads(extract_fenced_block(text))
        if not isinstance(doc, dict):
            raise ValueError("Fenced block does not hold a JSON object")
        if stage == 1:
            payload = ParameterSet.from_dict(doc)
        elif stage == 2:
            if parameters is None:
                raise ValueError("Stage 2 needs the stage-1 parameters")
            payload = assemble_model(parameters, doc)
        elif stage == 3:
            payload = visualization_from_dict(doc)
        else:
            raise ValueError(f"No stage {stage}")
    except (ValueError, TypeError, KeyError, ModelError) as e:
        logger.debug("Stage {} output unparseable: {}", stage, e)
        return StageOutput(stage, text, None, "unparseable", str(e), digest)
    return StageOutput(stage, text, payload, "ok", "", digest)


@dataclass
class Attempt:
    """Everything one attempt at a case produced.

    ``model`` exists only when stages 1 and 2 parsed, ``result`` only when
    that model solved. ``infrastructure_error`` marks attempts the gateway
    failed; they are never graded.
    """
    case_id: int
    index: int
    stages: List[StageOutput] = field(default_factory=list)
    model: Optional[FrameModel] = None
    result: Optional[SolveResult] = None
    grade: Optional[GradeReport] = None
    findings: Optional[ValidationReport] = None
    infrastructure_error: Optional[str] = None

    @property
    def digests(self) -> List[str]:
        return [s.digest for s in self.stages]

    @property
    def error_type(self) -> Optional[ErrorType]:
        if self.infrastructure_error is not None:
            return None
        return classify_error(self)

    @property
    def solved(self) -> bool:
        return self.error_type is ErrorType.NONE

    def to_dict(self) -> Dict[str, Any]:
        error_type = self.error_type
        return {
            "case_id": self.case_id,
            "index": self.index,
            "stages": [s.to_dict() for s in self.stages],
            "digests": self.digests,
            "error_type": error_type.value if error_type is not None else None,
            "infrastructure_error": self.infrastructure_error,
            "findings": self.findings.to_dict() if self.findings is not None else None,
            "grade": self.grade.to_dict() if self.grade is not None else None,
            "solution": result_to_dict(self.result) if self.result is not None else None,
        }


def as_gateway(gateway: Union[Gateway, ProviderConfig]) -> Gateway:
    return gateway if isinstance(gateway, Gateway) else Gateway(gateway)


def run_stage(
    case: SAWPCase,
    stage: int,
    options: PromptOptions,
    gateway: Union[Gateway, ProviderConfig],
    upstream: Optional[str] = None,
    sample: int = 0,
    parameters: Optional[ParameterSet] = None,
) -> StageOutput:
    """Prompts one stage and parses the answer.

    Args:
        case (SAWPCase): the case
        stage (int): 1, 2 or 3
        options (PromptOptions): instructions and worked example; a case
            asked about itself gets the fallback example, with a warning
        gateway (Union[Gateway, ProviderConfig]): where completions come from
        upstream (Optional[str], optional): previous stage output embedded in
            the prompt. Defaults to None.
        sample (int, optional): attempt index. Defaults to 0.
        parameters (Optional[ParameterSet], optional): stage-1 parameters for
            stage 2. Defaults to None.

    Raises:
        GatewayError: the completion failed

    Returns:
        StageOutput: raw text, parse status and payload
    """
    gateway = as_gateway(gateway)
    exemplar = options.exemplar_for(case.id)
    if exemplar != options.exemplar:
        logger.warning(
            "Case {} is its own worked example; stage {} uses example {} instead", case.id, stage, exemplar
        )
        options = replace(options, exemplar=exemplar)
    script = render_messages(build_stage_prompt(case, stage, options, upstream=upstream))
    key = gateway.digest(script, sample)
    text = gateway.complete(script, tag=RequestTag(case.id, stage), sample=sample)
    return parse_stage_output(stage, text, key, parameters)


def _unparseable(attempt: Attempt, stage: StageOutput) -> Attempt:
    attempt.grade = GradeReport.failed(ErrorType.UNPARSEABLE, f"stage {stage.stage}: {stage.error}")
    return attempt


def run_attempt(
    case: SAWPCase,
    index: int,
    options: PromptOptions,
    gateway: Union[Gateway, ProviderConfig],
    tol: Tolerances = Tolerances(),
) -> Attempt:
    """Runs the three stages of one attempt, then solves and grades.

    A stage 1 or 2 answer that does not parse ends the attempt. Gateway
    failures are recorded on the attempt; a replay miss is raised.

    Raises:
        ReplayMissError: replaying a set without this request
    """
    gateway = as_gateway(gateway)
    attempt = Attempt(case.id, index)
    try:
        parameters = run_stage(case, 1, options, gateway, sample=index)
        attempt.stages.append(parameters)
        if not parameters.ok:
            return _unparseable(attempt, parameters)

        layout = run_stage(
            case, 2, options, gateway,
            upstream=parameters.payload.table(), sample=index, parameters=parameters.payload,
        )
        attempt.stages.append(layout)
        if not layout.ok:
            return _unparseable(attempt, layout)
        attempt.model = layout.payload

        diagrams = run_stage(case, 3, options, gateway, upstream=serialize_document(attempt.model), sample=index)
        attempt.stages.append(diagrams)
    except ReplayMissError:
        raise
    except GatewayError as e:
        logger.warning("Case {} attempt {} failed in the gateway: {}", case.id, index, e)
        attempt.infrastructure_error = str(e)
        return attempt

    if diagrams.ok:
        attempt.model = replace(attempt.model, visualization=diagrams.payload)
    attempt.findings = validate(attempt.model)
    try:
        attempt.result = solve(attempt.model)
    except KernelError as e:
        logger.debug("Case {} attempt {} model is unsolvable: {}", case.id, index, e)
    attempt.grade = grade_model(attempt.model, case.truth_model, tol)
    if not diagrams.ok:
        attempt.grade = GradeReport(
            False, False, False, False, ErrorType.UNPARSEABLE,
            "\n".join(filter(None, [f"stage 3: {diagrams.error}", attempt.grade.diff_summary])),
            attempt.grade.tolerances,
        )
    logger.info("Case {} attempt {}: {}", case.id, index, attempt.error_type.value)
    return attempt
