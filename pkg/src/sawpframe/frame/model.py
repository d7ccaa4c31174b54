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

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, NamedTuple, Optional, Tuple

from sawpframe.errors import DanglingReferenceError, DuplicateIdError, SchemaError


ELEMENT_KINDS = ("column", "girder", "diagonal", "cantilever")
DIAGRAM_KINDS = ("geometry", "deformed", "axial", "shear", "moment")
DEFAULT_DIAGRAMS = ("deformed", "axial", "shear", "moment")

# absolute tolerance for coordinate comparisons, in metres
COORD_TOL = 1e-9


@dataclass(frozen=True)
class Node:
    id: int
    x: float
    y: float

    @property
    def coords(self) -> Tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class Element:
    id: int
    node_i: int
    node_j: int
    kind: str
    E: float
    A: float
    I: float


@dataclass(frozen=True)
class Support:
    node: int
    fixity: Tuple[bool, bool, bool]

    @property
    def n_constrained(self) -> int:
        return sum(bool(f) for f in self.fixity)


@dataclass(frozen=True)
class PointLoad:
    node: int
    fx: float = 0.0
    fy: float = 0.0
    mz: float = 0.0

    @property
    def components(self) -> Tuple[float, float, float]:
        return (self.fx, self.fy, self.mz)


@dataclass(frozen=True)
class DistributedLoad:
    """Uniform load on one element

    ``w_local`` is the signed intensity along the element's local +y axis,
    local x running from node_i to node_j and local y a quarter turn
    counterclockwise from it.
    """
    element: int
    w_local: float
    declared_inward: bool = False


class StatedCounts(NamedTuple):
    columns: int
    girders: int
    diagonals: int
    cantilevers: int


@dataclass(frozen=True)
class VisualizationSpec:
    diagrams: Tuple[str, ...] = DEFAULT_DIAGRAMS
    scale: float = 50.0
    samples: int = 21

    def __post_init__(self):
        unknown = [d for d in self.diagrams if d not in DIAGRAM_KINDS]
        if unknown:
            raise ValueError(f"Unknown diagram kinds: {unknown}")
        if not self.scale > 0:
            raise ValueError(f"scale must be > 0, got {self.scale}")
        if self.samples < 2:
            raise ValueError(f"samples must be >= 2, got {self.samples}")


@dataclass(frozen=True)
class FrameModel:
    """Declarative description of a 2D rigid-jointed frame.

    Records are held in tuples so a model can be shared between threads and
    used as a dictionary key. Build one through
    :func:`sawpframe.frame.document.parse_document` or directly, then call
    :func:`verify_integrity`.
    """
    nodes: Tuple[Node, ...]
    elements: Tuple[Element, ...]
    supports: Tuple[Support, ...] = ()
    point_loads: Tuple[PointLoad, ...] = ()
    distributed_loads: Tuple[DistributedLoad, ...] = ()
    stated_counts: Optional[StatedCounts] = None
    visualization: Optional[VisualizationSpec] = None

    @cached_property
    def node_index(self) -> Dict[int, Node]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def element_index(self) -> Dict[int, Element]:
        return {e.id: e for e in self.elements}

    @cached_property
    def support_index(self) -> Dict[int, Support]:
        return {s.node: s for s in self.supports}

    @property
    def support_node_ids(self) -> FrozenSet[int]:
        return frozenset(self.support_index)

    @property
    def n_constrained_dofs(self) -> int:
        return sum(s.n_constrained for s in self.supports)

    def endpoints(self, element: Element) -> Tuple[Tuple[float, float], Tuple[float, float]]:
        """Coordinates of the element's node_i and node_j"""
        return (
            self.node_index[element.node_i].coords,
            self.node_index[element.node_j].coords,
        )

    def kind_counts(self) -> StatedCounts:
        tally = {kind: 0 for kind in ELEMENT_KINDS}
        for element in self.elements:
            tally[element.kind] += 1
        return StatedCounts(
            tally["column"], tally["girder"], tally["diagonal"], tally["cantilever"]
        )


def _check_unique(ids, what: str):
    seen = set()
    for i in ids:
        if i in seen:
            raise DuplicateIdError(f"Duplicate {what} id {i}")
        seen.add(i)


def verify_integrity(model: FrameModel) -> FrameModel:
    """Checks ids are unique, every reference resolves and each record is
    internally consistent.

    Whether the supports constrain at least three DOFs is a property of the
    whole system and is left to :func:`sawpframe.fem.solver.solve`, which
    raises :class:`sawpframe.errors.SingularSystemError` for it.

    Args:
        model (FrameModel): Model to check

    Raises:
        DuplicateIdError: A node or element id, or a support node, repeats
        DanglingReferenceError: A record refers to an undefined node/element
        SchemaError: A record violates its own invariants

    Returns:
        FrameModel: The same model, for chaining
    """
    _check_unique((n.id for n in model.nodes), "node")
    _check_unique((e.id for e in model.elements), "element")
    _check_unique((s.node for s in model.supports), "support node")

    nodes = model.node_index
    elements = model.element_index

    for element in model.elements:
        for end in (element.node_i, element.node_j):
            if end not in nodes:
                raise DanglingReferenceError(
                    f"Element {element.id} references node {end}, which is not defined"
                )
        if element.node_i == element.node_j:
            raise SchemaError(f"Element {element.id} starts and ends at node {element.node_i}")
        if element.kind not in ELEMENT_KINDS:
            raise SchemaError(f"Element {element.id} has unknown kind {element.kind!r}")
        if min(element.E, element.A, element.I) <= 0:
            raise SchemaError(f"Element {element.id} needs positive E, A and I")

    for support in model.supports:
        if support.node not in nodes:
            raise DanglingReferenceError(f"Support references node {support.node}, which is not defined")
        if support.n_constrained == 0:
            raise SchemaError(f"Support at node {support.node} constrains no DOF")

    for load in model.point_loads:
        if load.node not in nodes:
            raise DanglingReferenceError(f"Point load references node {load.node}, which is not defined")
        if not any(load.components):
            raise SchemaError(f"Point load at node {load.node} has all components zero")

    for load in model.distributed_loads:
        if load.element not in elements:
            raise DanglingReferenceError(
                f"Distributed load references element {load.element}, which is not defined"
            )
        if load.w_local == 0:
            raise SchemaError(f"Distributed load on element {load.element} has zero intensity")

    return model
