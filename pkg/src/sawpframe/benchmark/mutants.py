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

"""Deliberately wrong variants of the ground-truth models.

Each mutation reproduces one failure seen in generated models and is
expected to grade as a layout error (type 1) or a boundary-condition error
(type 2). Mutations are discovered by name: a function here whose name
starts with ``mutation_`` is available as the mutation named by the rest.
"""

import sys
from dataclasses import dataclass, replace
from inspect import getmembers, isfunction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple

from loguru import logger

from sawpframe.benchmark.cases import SAWPCase, load_cases
from sawpframe.errors import InapplicableMutationError
from sawpframe.frame.canonical import diff_models
from sawpframe.frame.model import COORD_TOL, FrameModel, PointLoad, Support, verify_integrity
from sawpframe.grading.grader import ErrorType

# cases the grader's mutant suite draws from
SUITE_CASES = (5, 6, 9, 10, 11, 12, 13, 14)

EXPECTED = {
    "drop_node": ErrorType.TYPE1,
    "drop_element": ErrorType.TYPE1,
    "reshape_bays": ErrorType.TYPE1,
    "move_loads_all_floor": ErrorType.TYPE2,
    "wrong_support": ErrorType.TYPE2,
    "flip_distributed_sign": ErrorType.TYPE2,
}


@dataclass(frozen=True)
class MutantSpec:
    case_id: int
    mutation: str
    expected: ErrorType

    @classmethod
    def of(cls, case_id: int, mutation: str) -> "MutantSpec":
        if mutation not in EXPECTED:
            raise ValueError(f"Unknown mutation {mutation!r}, choose from {sorted(EXPECTED)}")
        return cls(case_id, mutation, EXPECTED[mutation])


def _without(model: FrameModel, node_ids: Set[int], element_ids: Set[int]) -> FrameModel:
    """Removes nodes and elements, then any node left without elements,
    together with the supports and loads attached to removed records.
    """
    elements = tuple(e for e in model.elements if e.id not in element_ids)
    if not elements:
        raise InapplicableMutationError("Mutation would remove every element")
    attached = {e.node_i for e in elements} | {e.node_j for e in elements}
    nodes = tuple(n for n in model.nodes if n.id not in node_ids and n.id in attached)
    kept = {n.id for n in nodes}
    kept_elements = {e.id for e in elements}
    return replace(
        model,
        nodes=nodes,
        elements=elements,
        supports=tuple(s for s in model.supports if s.node in kept),
        point_loads=tuple(p for p in model.point_loads if p.node in kept),
        distributed_loads=tuple(d for d in model.distributed_loads if d.element in kept_elements),
    )


def _incident(model: FrameModel, node_ids: Set[int]) -> Set[int]:
    return {e.id for e in model.elements if e.node_i in node_ids or e.node_j in node_ids}


def _free_nodes(model: FrameModel):
    supports = model.support_node_ids
    return [n for n in model.nodes if n.id not in supports]


def mutation_drop_node(model: FrameModel) -> FrameModel:
    """Forgets the top-right node and every member meeting it"""
    candidates = _free_nodes(model)
    if not candidates:
        raise InapplicableMutationError("No non-support node to drop")
    target = max(candidates, key=lambda n: (n.y, n.x))
    return _without(model, {target.id}, _incident(model, {target.id}))


def mutation_drop_element(model: FrameModel) -> FrameModel:
    """Forgets the highest girder, rightmost on ties"""
    girders = [e for e in model.elements if e.kind == "girder"]
    if not girders:
        raise InapplicableMutationError("No girder to drop")

    def midpoint(element):
        (xi, yi), (xj, yj) = model.endpoints(element)
        return ((yi + yj) / 2, (xi + xj) / 2)

    target = max(girders, key=midpoint)
    mutant = _without(model, set(), {target.id})
    if len(mutant.nodes) != len(model.nodes):
        raise InapplicableMutationError(f"Dropping girder {target.id} leaves a node without members")
    return mutant


def mutation_reshape_bays(model: FrameModel) -> FrameModel:
    """Builds one bay fewer: removes the rightmost column line of a regular
    multi-story frame
    """
    lines: Dict[float, int] = {}
    for element in model.elements:
        if element.kind == "column":
            x = round(model.node_index[element.node_i].x, 9)
            lines[x] = lines.get(x, 0) + 1
    stories = set(lines.values())
    if len(lines) < 3 or len(stories) != 1 or stories.pop() < 2:
        raise InapplicableMutationError("Needs a regular frame with three or more multi-story column lines")
    rightmost = max(lines)
    node_ids = {n.id for n in model.nodes if abs(n.x - rightmost) <= COORD_TOL}
    return _without(model, node_ids, _incident(model, node_ids))


def mutation_move_loads_all_floor(model: FrameModel) -> FrameModel:
    """Puts the first point load on every first-floor node instead of where
    the problem places it
    """
    if not model.point_loads:
        raise InapplicableMutationError("No point loads to move")
    free = _free_nodes(model)
    floor = min(n.y for n in free)
    targets = sorted(n.id for n in free if abs(n.y - floor) <= COORD_TOL)
    if len(targets) < 2:
        raise InapplicableMutationError("First floor has a single node")
    template = model.point_loads[0]
    loads = tuple(PointLoad(node_id, template.fx, template.fy, template.mz) for node_id in targets)
    return replace(model, point_loads=loads)


def mutation_wrong_support(model: FrameModel) -> FrameModel:
    """Pins the leftmost support, or fixes it if it was not fully fixed"""
    if not model.supports:
        raise InapplicableMutationError("No supports")
    target = min(model.supports, key=lambda s: (model.node_index[s.node].x, model.node_index[s.node].y))
    fixity = (True, True, False) if all(target.fixity) else (True, True, True)
    supports = tuple(Support(s.node, fixity) if s is target else s for s in model.supports)
    return replace(model, supports=supports)


def mutation_flip_distributed_sign(model: FrameModel) -> FrameModel:
    """Reverses every distributed load"""
    if not model.distributed_loads:
        raise InapplicableMutationError("No distributed loads to flip")
    loads = tuple(replace(d, w_local=-d.w_local) for d in model.distributed_loads)
    return replace(model, distributed_loads=loads)


def get_mutation_functions() -> Dict[str, Callable[[FrameModel], FrameModel]]:
    """Mutations available in this module, keyed by name without the
    ``mutation_`` prefix
    """
    functions = {}
    for name, member in getmembers(sys.modules[__name__], isfunction):
        if name.startswith("mutation_"):
            functions[name[len("mutation_"):]] = member
    return functions


def mutate_case(case: SAWPCase, spec: MutantSpec) -> FrameModel:
    """Applies a mutation to a case's ground-truth model.

    Args:
        case (SAWPCase): base case
        spec (MutantSpec): mutation to apply, for ``case``

    Raises:
        ValueError: spec names a different case
        InapplicableMutationError: the mutation does not fit the case's
            topology or would leave the model unchanged

    Returns:
        FrameModel: the mutant
    """
    if spec.case_id != case.id:
        raise ValueError(f"Mutant spec is for case {spec.case_id}, not case {case.id}")
    mutant = get_mutation_functions()[spec.mutation](case.truth_model)
    verify_integrity(mutant)
    if diff_models(mutant, case.truth_model).is_empty:
        raise InapplicableMutationError(f"{spec.mutation} leaves case {case.id} unchanged")
    return mutant


def mutant_suite(
    cases: Optional[Sequence[SAWPCase]] = None,
    case_ids: Iterable[int] = SUITE_CASES,
    mutations: Optional[Iterable[str]] = None,
) -> List[Tuple[MutantSpec, FrameModel]]:
    """Every applicable (case, mutation) pair over the given cases.

    A mutant that matches the ground truth of another of ``cases`` is left
    out: it would be a correct answer to that problem.
    """
    cases = {c.id: c for c in (cases if cases is not None else load_cases())}
    names = list(mutations) if mutations is not None else list(EXPECTED)
    suite = []
    for case_id in case_ids:
        for name in names:
            spec = MutantSpec.of(case_id, name)
            try:
                mutant = mutate_case(cases[case_id], spec)
            except InapplicableMutationError:
                continue
            twins = [k for k, c in cases.items() if k != case_id and diff_models(mutant, c.truth_model).is_empty]
            if twins:
                logger.debug("{} of case {} is the ground truth of case {}; skipped", name, case_id, twins[0])
                continue
            suite.append((spec, mutant))
    return suite
