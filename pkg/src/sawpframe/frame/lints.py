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

"""Deterministic checks derived from the structural reasoning instructions.

Each lint mirrors one instruction family given to the language model:

- ``SPACE-1`` .. ``SPACE-4``: space rationality (support height, level
  girders, plumb columns, only diagonals are inclined)
- ``COUNT-1`` .. ``COUNT-4``: element tallies against the problem's stated
  counts (columns, girders, diagonals, cantilevers)
- ``LOAD-1``: distributed-load sign against the node ordering rule
"""

from dataclasses import dataclass
from typing import Dict, FrozenSet, Mapping, NamedTuple, Tuple

from sawpframe.errors import EmptySelectionError
from sawpframe.frame.model import COORD_TOL, ELEMENT_KINDS, Element, FrameModel

SIDES = ("left", "right", "top", "bottom")


class Finding(NamedTuple):
    lint_id: str
    severity: str
    message: str
    offending_ids: Tuple[int, ...]


@dataclass(frozen=True)
class ValidationReport:
    findings: Tuple[Finding, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.findings

    def lint_ids(self) -> Tuple[str, ...]:
        return tuple(f.lint_id for f in self.findings)

    def to_dict(self) -> Dict:
        return {
            "findings": [
                {
                    "lint": f.lint_id,
                    "severity": f.severity,
                    "message": f.message,
                    "ids": list(f.offending_ids),
                }
                for f in self.findings
            ]
        }


def _same(a: float, b: float) -> bool:
    return abs(a - b) <= COORD_TOL


def starts_before_end(xi: float, yi: float, xj: float, yj: float) -> bool:
    """Node ordering rule: left to right, and bottom to top for vertical members"""
    if not _same(xi, xj):
        return xi < xj
    return yi < yj


def signed_uniform_load(
    element: Element,
    magnitude: float,
    inward: bool,
    coords: Mapping[int, Tuple[float, float]],
) -> float:
    """Signed local intensity of a downward or inward uniform load.

    A load acting toward the structure (downward on girders, inward on roof
    members) is negative in the local +y convention when the element runs
    from its first node to its second in the reading direction. Defining the
    same element the other way round negates the sign. Inward and downward
    loads share the rule; ``inward`` only records the problem's wording.

    Args:
        element (Element): loaded element
        magnitude (float): load magnitude in N/m
        inward (bool): whether the problem calls the load inward
        coords (Mapping[int, Tuple[float, float]]): node id -> (x, y)

    Raises:
        ValueError: magnitude is not positive

    Returns:
        float: signed intensity along local +y
    """
    if not magnitude > 0:
        raise ValueError(f"magnitude must be > 0, got {magnitude}")
    xi, yi = coords[element.node_i]
    xj, yj = coords[element.node_j]
    sign = -1.0 if starts_before_end(xi, yi, xj, yj) else 1.0
    return sign * magnitude


def boundary_nodes(model: FrameModel, side: str) -> FrozenSet[int]:
    """Non-support nodes on one side of the frame.

    Args:
        model (FrameModel): frame to inspect
        side (str): one of ``left``, ``right``, ``top``, ``bottom``

    Raises:
        ValueError: unknown side
        EmptySelectionError: every node is a support node

    Returns:
        FrozenSet[int]: ids of all non-support nodes at the extreme coordinate
    """
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}, got {side!r}")

    supports = model.support_node_ids
    candidates = [n for n in model.nodes if n.id not in supports]
    if not candidates:
        raise EmptySelectionError("Every node is a support node")

    axis = "x" if side in ("left", "right") else "y"
    values = [getattr(n, axis) for n in candidates]
    target = min(values) if side in ("left", "bottom") else max(values)
    return frozenset(n.id for n in candidates if _same(getattr(n, axis), target))


def _space_findings(model: FrameModel, severity: str):
    for support in model.supports:
        node = model.node_index[support.node]
        if not _same(node.y, 0.0):
            yield Finding(
                "SPACE-1", severity,
                f"Support node {node.id} is at y={node.y}, expected y=0",
                (node.id,),
            )

    for element in model.elements:
        (xi, yi), (xj, yj) = model.endpoints(element)
        if element.kind == "girder" and not _same(yi, yj):
            yield Finding(
                "SPACE-2", severity,
                f"Girder {element.id} end nodes have y={yi} and y={yj}",
                (element.id,),
            )
        if element.kind == "column" and not _same(xi, xj):
            yield Finding(
                "SPACE-3", severity,
                f"Column {element.id} end nodes have x={xi} and x={xj}",
                (element.id,),
            )
        if element.kind != "diagonal" and not _same(xi, xj) and not _same(yi, yj):
            yield Finding(
                "SPACE-4", severity,
                f"Element {element.id} is inclined but declared as {element.kind}",
                (element.id,),
            )


def _count_findings(model: FrameModel, severity: str):
    if model.stated_counts is None:
        return
    actual = model.kind_counts()
    for n, kind in enumerate(ELEMENT_KINDS):
        stated = model.stated_counts[n]
        if actual[n] != stated:
            ids = tuple(e.id for e in model.elements if e.kind == kind)
            yield Finding(
                f"COUNT-{n + 1}", severity,
                f"Problem states {stated} {kind}s but the model defines {actual[n]}",
                ids,
            )


def _load_findings(model: FrameModel, severity: str):
    """LOAD-1: every distributed load is read as acting toward the structure,
    downward on girders and inward on roof members, as all benchmark problems
    state them. A deliberate uplift or suction load is therefore flagged too;
    the finding is advisory and never enters grading.
    """
    coords = {n.id: n.coords for n in model.nodes}
    for load in model.distributed_loads:
        element = model.element_index[load.element]
        expected = signed_uniform_load(element, abs(load.w_local), load.declared_inward, coords)
        if (expected > 0) != (load.w_local > 0):
            yield Finding(
                "LOAD-1", severity,
                f"Distributed load on element {element.id} has w={load.w_local}, "
                f"the node ordering calls for {expected}",
                (element.id,),
            )


def validate(model: FrameModel, severity: str = "warning") -> ValidationReport:
    """Runs every lint over a model.

    Args:
        model (FrameModel): model to check
        severity (str, optional): severity recorded on findings, ``warning``
            for generated models and ``error`` for benchmark ground truth.
            Defaults to "warning".

    Returns:
        ValidationReport: one finding per violation, empty when the model
            passes every lint
    """
    findings = []
    findings.extend(_space_findings(model, severity))
    findings.extend(_count_findings(model, severity))
    findings.extend(_load_findings(model, severity))
    return ValidationReport(tuple(findings))
