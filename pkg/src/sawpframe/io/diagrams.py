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

"""SVG diagrams of a frame: geometry, deformed shape, and axial, shear and
moment diagrams drawn normal to each member.

Force diagrams are scaled so the largest ordinate is a fixed fraction of the
longest member. Moments are drawn on the tension side.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

import matplotlib.pyplot as plt
import numpy as np

from sawpframe.errors import DiagramRequestError
from sawpframe.fem.actions import internal_action_at, sample_element, shear_zero
from sawpframe.fem.element import element_geometry, transformation
from sawpframe.fem.solver import SolveResult, dof_map, span_loads
from sawpframe.frame.model import DIAGRAM_KINDS, FrameModel, VisualizationSpec

FORCE_KINDS = {"axial": 0, "shear": 1, "moment": 2}
UNITS = {"axial": "N", "shear": "N", "moment": "N m"}
# largest force ordinate relative to the longest member
ORDINATE_FRACTION = 0.15
DPI = 100


@dataclass(frozen=True)
class DiagramRequest:
    kind: str
    scale: float = 50.0
    samples: int = 21
    canvas: Tuple[int, int] = (800, 600)

    def __post_init__(self):
        if self.kind not in DIAGRAM_KINDS:
            raise DiagramRequestError(f"kind must be one of {DIAGRAM_KINDS}, got {self.kind!r}")
        if not self.scale > 0:
            raise DiagramRequestError(f"scale must be > 0, got {self.scale}")
        if self.samples < 2:
            raise DiagramRequestError(f"samples must be >= 2, got {self.samples}")
        if len(self.canvas) != 2 or min(self.canvas) <= 0:
            raise DiagramRequestError(f"canvas must be two positive sizes in px, got {self.canvas}")


def _axes(model, element):
    (xi, yi), (xj, yj) = model.endpoints(element)
    geometry = element_geometry(xi, yi, xj, yj)
    origin = np.array([xi, yi])
    e_x = np.array([geometry.c, geometry.s])
    e_y = np.array([-geometry.s, geometry.c])
    return geometry, origin, e_x, e_y


def hermite_shape(geometry, local_u: np.ndarray, samples: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Local axial and transverse displacement along an element from its
    local end displacements (u1, v1, r1, u2, v2, r2)
    """
    L = geometry.length
    xi = np.linspace(0.0, 1.0, samples)
    u1, v1, r1, u2, v2, r2 = local_u
    axial = u1 * (1 - xi) + u2 * xi
    transverse = (
        v1 * (1 - 3 * xi**2 + 2 * xi**3)
        + r1 * L * (xi - 2 * xi**2 + xi**3)
        + v2 * (3 * xi**2 - 2 * xi**3)
        + r2 * L * (-(xi**2) + xi**3)
    )
    return xi * L, axial, transverse


def _draw_frame(ax, model: FrameModel, style: str = "-", color: str = "k", with_gid: bool = True):
    for element in model.elements:
        (xi, yi), (xj, yj) = model.endpoints(element)
        (line,) = ax.plot([xi, xj], [yi, yj], style, color=color, lw=1.5 if with_gid else 0.8)
        if with_gid:
            line.set_gid(f"{element.kind}-{element.id}")
    if with_gid:
        for support in model.supports:
            node = model.node_index[support.node]
            (marker,) = ax.plot([node.x], [node.y], "^" if not all(support.fixity) else "s", color="tab:blue", ms=9)
            marker.set_gid(f"support-{support.node}")


def _draw_deformed(ax, model: FrameModel, result: SolveResult, request: DiagramRequest):
    _draw_frame(ax, model, style="--", color="0.6", with_gid=False)
    dofs = dof_map(model)
    u = result.displacement_vector(dofs)
    for element in model.elements:
        geometry, origin, e_x, e_y = _axes(model, element)
        u_e = u[list(dofs[element.node_i]) + list(dofs[element.node_j])]
        xs, axial, transverse = hermite_shape(geometry, transformation(geometry) @ u_e, request.samples)
        points = (
            origin
            + np.outer(xs, e_x)
            + request.scale * (np.outer(axial, e_x) + np.outer(transverse, e_y))
        )
        (line,) = ax.plot(points[:, 0], points[:, 1], "-", color="tab:red", lw=1.5)
        line.set_gid(f"deformed-{element.id}")


def _draw_forces(ax, model: FrameModel, result: SolveResult, request: DiagramRequest):
    component = FORCE_KINDS[request.kind]
    loads = span_loads(model)
    sampled = {}
    for element in model.elements:
        geometry, origin, e_x, e_y = _axes(model, element)
        xs, actions = sample_element(geometry, result.end_forces[element.id], loads.get(element.id, 0.0), request.samples)
        sampled[element.id] = (geometry, origin, e_x, e_y, xs, actions[:, component])

    peak = max((np.abs(v[-1]).max() for v in sampled.values()), default=0.0)
    longest = max(v[0].length for v in sampled.values())
    k = ORDINATE_FRACTION * longest / peak if peak > 0 else 0.0
    # positive moment is sagging, tension on the local -y face
    side = -1.0 if request.kind == "moment" else 1.0

    _draw_frame(ax, model, color="k", with_gid=False)
    for element in model.elements:
        geometry, origin, e_x, e_y, xs, values = sampled[element.id]
        base = origin + np.outer(xs, e_x)
        curve = base + np.outer(side * k * values, e_y)
        outline = np.vstack([base[:1], curve, base[-1:]])
        ax.fill(outline[:, 0], outline[:, 1], color="tab:green", alpha=0.25, lw=0)
        (line,) = ax.plot(curve[:, 0], curve[:, 1], "-", color="tab:green", lw=1.2)
        line.set_gid(f"{request.kind}-{element.id}")
        for end in (0, -1):
            if abs(values[end]) > 0:
                ax.annotate(f"{values[end]:.4g}", curve[end], fontsize=6, color="0.2")

        if request.kind == "moment":
            w = loads.get(element.id, 0.0)
            x = shear_zero(geometry, result.end_forces[element.id], w)
            if x is not None:
                M = internal_action_at(geometry, result.end_forces[element.id], w, x)[2]
                point = origin + x * e_x + side * k * M * e_y
                (marker,) = ax.plot([point[0]], [point[1]], "o", color="tab:purple", ms=4)
                marker.set_gid(f"moment-extremum-{element.id}")
                ax.annotate(f"{M:.4g}", point, fontsize=7, color="tab:purple")


def render_svg_diagram(
    model: FrameModel,
    result: Optional[SolveResult],
    request: DiagramRequest,
    path: Union[str, Path],
) -> Path:
    """Draws one diagram and saves it as SVG.

    Args:
        model (FrameModel): the frame
        result (Optional[SolveResult]): its solution; may be None for the
            geometry diagram
        request (DiagramRequest): what to draw
        path (Union[str, Path]): SVG file to write

    Raises:
        DiagramRequestError: a solution is needed but missing

    Returns:
        Path: the file written
    """
    if request.kind != "geometry" and result is None:
        raise DiagramRequestError(f"A {request.kind} diagram needs a solution")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    with plt.rc_context({"svg.hashsalt": "sawpframe", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(request.canvas[0] / DPI, request.canvas[1] / DPI), dpi=DPI)
        if request.kind == "geometry":
            _draw_frame(ax, model)
            title = "Geometry"
        elif request.kind == "deformed":
            _draw_deformed(ax, model, result, request)
            title = f"Deformed shape (x{request.scale:g})"
        else:
            _draw_forces(ax, model, result, request)
            title = f"{request.kind.capitalize()} ({UNITS[request.kind]})"
            if request.kind == "moment":
                title += ", drawn on the tension side"
        ax.set_title(title)
        ax.set_aspect("equal")
        ax.margins(0.15)
        ax.axis("off")
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path


def render_diagrams(
    model: FrameModel,
    result: Optional[SolveResult],
    spec: VisualizationSpec,
    out_dir: Union[str, Path],
    canvas: Tuple[int, int] = (800, 600),
) -> List[Path]:
    """The geometry diagram plus every diagram a visualization spec asks for,
    as ``<kind>.svg`` files
    """
    kinds = ["geometry"] + [k for k in spec.diagrams if k != "geometry"]
    if result is None:
        kinds = ["geometry"]
    return [
        render_svg_diagram(
            model, result, DiagramRequest(kind, spec.scale, spec.samples, canvas), Path(out_dir) / f"{kind}.svg"
        )
        for kind in kinds
    ]
