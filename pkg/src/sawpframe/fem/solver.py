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

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Mapping, NamedTuple, Optional, Tuple, Union

import numpy as np
from loguru import logger
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from sawpframe.errors import ConditionWarning, ShapeMismatchError, SingularSystemError
from sawpframe.fem.element import (
    element_geometry,
    equivalent_nodal_loads,
    global_stiffness,
    local_stiffness,
    transformation,
)
from sawpframe.frame.model import Element, FrameModel

Triple = Tuple[float, float, float]

# a pivot below this fraction of the largest diagonal term marks a mechanism
PIVOT_TOL = 1e-12
COND_LIMIT = 1e12


@dataclass(frozen=True)
class SolveResult:
    """Nodal displacements (ux, uy, rz), element end forces (P, V, M) per end in
    local axes, and support reactions (Rx, Ry, Mz)
    """
    displacements: Dict[int, Triple]
    end_forces: Dict[int, Tuple[Triple, Triple]]
    reactions: Dict[int, Triple]

    def displacement_vector(self, dofs: Mapping[int, Tuple[int, int, int]]) -> np.ndarray:
        u = np.zeros(3 * len(dofs))
        for node_id, index in dofs.items():
            u[list(index)] = self.displacements[node_id]
        return u

    def to_dict(self) -> Dict:
        return result_to_dict(self)


class Assembly(NamedTuple):
    K: np.ndarray
    F: np.ndarray
    dofs: Dict[int, Tuple[int, int, int]]


def dof_map(model: FrameModel) -> Dict[int, Tuple[int, int, int]]:
    """Global DOF indices of every node, in model order"""
    return {node.id: (3 * k, 3 * k + 1, 3 * k + 2) for k, node in enumerate(model.nodes)}


def _element_dofs(dofs, element: Element):
    return list(dofs[element.node_i]) + list(dofs[element.node_j])


def _geometry(model: FrameModel, element: Element):
    (xi, yi), (xj, yj) = model.endpoints(element)
    return element_geometry(xi, yi, xj, yj)


def span_loads(model: FrameModel) -> Dict[int, float]:
    totals: Dict[int, float] = {}
    for load in model.distributed_loads:
        totals[load.element] = totals.get(load.element, 0.0) + load.w_local
    return totals


def assemble(model: FrameModel) -> Assembly:
    """Global stiffness matrix and load vector of a model.

    Args:
        model (FrameModel): model with verified referential integrity

    Returns:
        Assembly: ``K`` of size 3n x 3n, ``F`` holding point loads plus the
            equivalent nodal loads of span loads, and the node -> DOF map
    """
    dofs = dof_map(model)
    n = 3 * len(dofs)
    K = np.zeros((n, n))
    F = np.zeros(n)
    span = span_loads(model)

    for element in model.elements:
        geometry = _geometry(model, element)
        index = _element_dofs(dofs, element)
        K[np.ix_(index, index)] += global_stiffness(element.E, element.A, element.I, geometry)
        if element.id in span:
            nodal, _ = equivalent_nodal_loads(span[element.id], geometry.length, geometry)
            F[index] += nodal

    for load in model.point_loads:
        F[list(dofs[load.node])] += load.components

    return Assembly(K, F, dofs)


def recover_end_forces(
    model: FrameModel,
    element: Element,
    u: np.ndarray,
    dofs: Optional[Mapping[int, Tuple[int, int, int]]] = None,
) -> Tuple[Triple, Triple]:
    """End forces (P, V, M) the rest of the frame exerts on an element, in
    local axes, end 1 at node_i and end 2 at node_j.

    Args:
        model (FrameModel): solved model
        element (Element): element of ``model``
        u (np.ndarray): global displacement vector from :func:`solve`
        dofs (Optional[Mapping], optional): node -> DOF map. Defaults to
            :func:`dof_map` of the model.

    Returns:
        Tuple[Triple, Triple]: forces at end 1 and end 2
    """
    dofs = dofs if dofs is not None else dof_map(model)
    geometry = _geometry(model, element)
    u_e = u[_element_dofs(dofs, element)]
    forces = local_stiffness(element.E, element.A, element.I, geometry.length) @ transformation(geometry) @ u_e
    w = span_loads(model).get(element.id)
    if w is not None:
        _, fef = equivalent_nodal_loads(w, geometry.length, geometry)
        forces = forces + fef
    forces = [float(f) for f in forces]
    return (tuple(forces[:3]), tuple(forces[3:]))


def constrained_dofs(model: FrameModel, dofs: Mapping[int, Tuple[int, int, int]]):
    return sorted(
        index
        for support in model.supports
        for index, fixed in zip(dofs[support.node], support.fixity)
        if fixed
    )


def solve(model: FrameModel) -> SolveResult:
    """Linear static analysis by the direct stiffness method.

    Args:
        model (FrameModel): model to analyse

    Raises:
        SingularSystemError: fewer than three constrained DOFs, or the free
            part of the stiffness matrix is singular (a mechanism), or the
            assembled system overflows to non-finite values

    Warns:
        ConditionWarning: the free stiffness matrix has condition number
            above 1e12

    Returns:
        SolveResult: displacements, end forces and reactions
    """
    K, F, dofs = assemble(model)
    if not (np.isfinite(K).all() and np.isfinite(F).all()):
        raise SingularSystemError("Stiffness matrix or load vector has non-finite entries")
    constrained = constrained_dofs(model, dofs)
    if len(constrained) < 3:
        raise SingularSystemError(
            f"Model constrains {len(constrained)} DOFs; at least 3 are needed to prevent rigid-body motion"
        )
    free = np.setdiff1d(np.arange(K.shape[0]), constrained)

    u = np.zeros(K.shape[0])
    if free.size:
        Kff = K[np.ix_(free, free)]
        try:
            factor = cho_factor(Kff)
        except (LinAlgError, ValueError) as e:
            raise SingularSystemError(f"Stiffness matrix is singular: {e}") from e
        pivots = np.diag(factor[0]) ** 2
        if not np.isfinite(pivots).all() or pivots.min() < PIVOT_TOL * np.abs(np.diag(Kff)).max():
            raise SingularSystemError("Stiffness matrix is singular: pivot below tolerance")

        with np.errstate(over="ignore", invalid="ignore"):
            condition = np.linalg.cond(Kff)
        if condition > COND_LIMIT:
            warnings.warn(f"Stiffness matrix condition number is {condition:.3g}", ConditionWarning)
        try:
            u[free] = cho_solve(factor, F[free])
        except ValueError as e:
            raise SingularSystemError(f"Stiffness matrix could not be solved: {e}") from e
        if not np.isfinite(u).all():
            raise SingularSystemError("Displacements are not finite")

    logger.debug("Solved {} free DOFs of {}", free.size, K.shape[0])

    residual = K @ u - F
    displacements = {node_id: tuple(float(v) for v in u[list(index)]) for node_id, index in dofs.items()}
    end_forces = {e.id: recover_end_forces(model, e, u, dofs) for e in model.elements}
    reactions = {}
    for support in model.supports:
        index = dofs[support.node]
        reactions[support.node] = tuple(
            float(residual[i]) if fixed else 0.0 for i, fixed in zip(index, support.fixity)
        )

    return SolveResult(displacements, end_forces, reactions)


def _sig(value: float) -> float:
    # 9 significant digits, -0.0 folded into 0.0
    return float(f"{value:.9g}") + 0.0


def _ordered(mapping: Mapping[int, object]):
    return sorted(mapping.items(), key=lambda item: int(item[0]))


def result_to_dict(result: SolveResult) -> Dict:
    return {
        "displacements": {str(k): [_sig(v) for v in d] for k, d in _ordered(result.displacements)},
        "end_forces": {
            str(k): [[_sig(v) for v in end] for end in ends] for k, ends in _ordered(result.end_forces)
        },
        "reactions": {str(k): [_sig(v) for v in r] for k, r in _ordered(result.reactions)},
    }


def result_from_dict(doc: Mapping) -> SolveResult:
    return SolveResult(
        displacements={int(k): tuple(float(v) for v in d) for k, d in doc["displacements"].items()},
        end_forces={
            int(k): tuple(tuple(float(v) for v in end) for end in ends)
            for k, ends in doc["end_forces"].items()
        },
        reactions={int(k): tuple(float(v) for v in r) for k, r in doc["reactions"].items()},
    )


def serialize_result(result: SolveResult) -> str:
    """Writes a result as JSON, one node or element per line"""
    doc = result_to_dict(result)
    blocks = []
    for key, entries in doc.items():
        rows = ",\n".join(f'    "{k}": {json.dumps(v)}' for k, v in entries.items())
        blocks.append(f'  "{key}": {{\n{rows}\n  }}' if rows else f'  "{key}": {{}}')
    return "{\n" + ",\n".join(blocks) + "\n}\n"


def read_result(path: Union[str, Path]) -> SolveResult:
    with open(path, "r", encoding="utf-8") as f:
        return result_from_dict(json.load(f))


def write_result(result: SolveResult, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(serialize_result(result))
    return path


def _components(result: SolveResult):
    """Flattened (quantity, key, values) records of a result"""
    for node_id, d in result.displacements.items():
        yield "displacement", ("node", node_id), d
    for element_id, ends in result.end_forces.items():
        for end, forces in enumerate(ends, start=1):
            yield "force", ("element", element_id, end), forces


def results_close(
    a: SolveResult,
    b: SolveResult,
    rtol: float,
    atol: float = 0.0,
    floor: float = 0.0,
) -> bool:
    """Compares displacements and end forces of two results componentwise.

    A component pair agrees when ``|a - b| <= max(rtol * |b|, atol,
    floor * largest |b| of the same quantity)``. Displacement and force
    components are scaled separately.

    Args:
        a (SolveResult): result under test
        b (SolveResult): reference result
        rtol (float): relative tolerance
        atol (float, optional): absolute tolerance. Defaults to 0.0.
        floor (float, optional): noise floor relative to the largest
            component of the same quantity. Defaults to 0.0.

    Raises:
        ShapeMismatchError: the results cover different nodes or elements

    Returns:
        bool: True when every component agrees
    """
    if set(a.displacements) != set(b.displacements) or set(a.end_forces) != set(b.end_forces):
        raise ShapeMismatchError(
            f"Results differ in shape: {len(a.displacements)} vs {len(b.displacements)} nodes, "
            f"{len(a.end_forces)} vs {len(b.end_forces)} elements"
        )

    reference = {key: values for _, key, values in _components(b)}
    scale = {"displacement": 0.0, "force": 0.0}
    for quantity, _, values in _components(b):
        scale[quantity] = max([scale[quantity]] + [abs(v) for v in values])

    for quantity, key, values in _components(a):
        for x, y in zip(values, reference[key]):
            allowed = max(rtol * abs(y), atol, floor * scale[quantity])
            if not math.isfinite(x) or abs(x - y) > allowed:
                return False
    return True
