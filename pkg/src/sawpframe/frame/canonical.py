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

"""Id-independent form of a frame model and coordinate-based model diffs"""

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from sawpframe.frame.lints import starts_before_end
from sawpframe.frame.model import (
    DistributedLoad,
    Element,
    FrameModel,
    Node,
    PointLoad,
    Support,
)

Point = Tuple[float, float]
Segment = Tuple[Point, Point]

# relative tolerance for load magnitudes
LOAD_RTOL = 1e-6


# decimal places of the 1e-9 m coordinate tolerance
_KEY_DIGITS = 9


def _snap(value: float) -> float:
    return round(value, _KEY_DIGITS) + 0.0


def point_key(x: float, y: float) -> Point:
    return (_snap(x), _snap(y))


def canonicalize(model: FrameModel) -> FrameModel:
    """Relabels a model so equal frames get equal records.

    Nodes are sorted by (x, y) and renumbered from 1, every element runs from
    its lower to its higher canonical node (negating its distributed load
    when that reverses it), and elements, supports and loads are sorted.

    Args:
        model (FrameModel): model to relabel

    Returns:
        FrameModel: canonical model with the same mechanics
    """
    ordered = sorted(model.nodes, key=lambda n: (point_key(n.x, n.y), n.id))
    node_map = {n.id: k for k, n in enumerate(ordered, start=1)}
    nodes = tuple(Node(node_map[n.id], n.x, n.y) for n in ordered)

    flipped = set()
    staged = []
    for element in model.elements:
        i, j = node_map[element.node_i], node_map[element.node_j]
        if i > j:
            i, j = j, i
            flipped.add(element.id)
        staged.append((i, j, element))
    staged.sort(key=lambda s: (s[0], s[1], s[2].kind, s[2].E, s[2].A, s[2].I, s[2].id))
    element_map = {}
    elements = []
    for k, (i, j, element) in enumerate(staged, start=1):
        element_map[element.id] = k
        elements.append(Element(k, i, j, element.kind, element.E, element.A, element.I))

    supports = sorted(
        (Support(node_map[s.node], tuple(s.fixity)) for s in model.supports),
        key=lambda s: s.node,
    )
    point_loads = sorted(
        (PointLoad(node_map[p.node], p.fx, p.fy, p.mz) for p in model.point_loads),
        key=lambda p: (p.node, p.fx, p.fy, p.mz),
    )
    distributed_loads = sorted(
        (
            DistributedLoad(
                element_map[d.element],
                -d.w_local if d.element in flipped else d.w_local,
                d.declared_inward,
            )
            for d in model.distributed_loads
        ),
        key=lambda d: (d.element, d.w_local),
    )

    return FrameModel(
        nodes=nodes,
        elements=tuple(elements),
        supports=tuple(supports),
        point_loads=tuple(point_loads),
        distributed_loads=tuple(distributed_loads),
        stated_counts=model.stated_counts,
        visualization=model.visualization,
    )


@dataclass(frozen=True)
class ModelDiff:
    """Differences between a generated model and the ground truth, keyed by
    coordinates so node and element ids play no part.
    """
    missing_nodes: Tuple[Point, ...] = ()
    extra_nodes: Tuple[Point, ...] = ()
    missing_elements: Tuple[Segment, ...] = ()
    extra_elements: Tuple[Segment, ...] = ()
    support_mismatches: Tuple[Tuple[Point, Optional[Tuple[bool, ...]], Optional[Tuple[bool, ...]]], ...] = ()
    point_load_mismatches: Tuple[Tuple[Point, Tuple[float, ...], Tuple[float, ...]], ...] = ()
    distributed_load_mismatches: Tuple[Tuple[Segment, float, float], ...] = ()
    property_mismatches: Tuple[Tuple[Segment, str], ...] = field(default=(), compare=False)

    @property
    def layout_clean(self) -> bool:
        return not (self.missing_nodes or self.extra_nodes or self.missing_elements or self.extra_elements)

    @property
    def supports_clean(self) -> bool:
        return not self.support_mismatches

    @property
    def loads_clean(self) -> bool:
        return not (self.point_load_mismatches or self.distributed_load_mismatches)

    @property
    def is_empty(self) -> bool:
        return self.layout_clean and self.supports_clean and self.loads_clean

    def summary(self) -> str:
        lines = []
        for p in self.missing_nodes:
            lines.append(f"missing node at {p}")
        for p in self.extra_nodes:
            lines.append(f"extra node at {p}")
        for s in self.missing_elements:
            lines.append(f"missing element {s[0]}-{s[1]}")
        for s in self.extra_elements:
            lines.append(f"extra element {s[0]}-{s[1]}")
        for p, generated, truth in self.support_mismatches:
            lines.append(f"support at {p}: generated {generated}, expected {truth}")
        for p, generated, truth in self.point_load_mismatches:
            lines.append(f"point load at {p}: generated {generated}, expected {truth}")
        for s, generated, truth in self.distributed_load_mismatches:
            lines.append(f"distributed load on {s[0]}-{s[1]}: generated {generated}, expected {truth}")
        for s, what in self.property_mismatches:
            lines.append(f"element {s[0]}-{s[1]}: {what} differs")
        return "\n".join(lines)


def _segment(model: FrameModel, element: Element) -> Tuple[Segment, bool]:
    """Orientation-free segment key and whether the element runs in reading order"""
    (xi, yi), (xj, yj) = model.endpoints(element)
    a, b = point_key(xi, yi), point_key(xj, yj)
    forward = starts_before_end(xi, yi, xj, yj)
    return (a, b) if forward else (b, a), forward


def _close(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=LOAD_RTOL, abs_tol=1e-9)


def _point_loads(model: FrameModel) -> Dict[Point, Tuple[float, float, float]]:
    totals = defaultdict(lambda: [0.0, 0.0, 0.0])
    for load in model.point_loads:
        node = model.node_index[load.node]
        total = totals[point_key(node.x, node.y)]
        for k, value in enumerate(load.components):
            total[k] += value
    return {p: tuple(v) for p, v in totals.items()}


def _distributed_loads(model: FrameModel) -> Dict[Segment, float]:
    # intensities normalised to reading-order orientation
    totals = defaultdict(float)
    for load in model.distributed_loads:
        segment, forward = _segment(model, model.element_index[load.element])
        totals[segment] += load.w_local if forward else -load.w_local
    return dict(totals)


def diff_models(generated: FrameModel, truth: FrameModel) -> ModelDiff:
    """Compares two models by coordinates.

    Args:
        generated (FrameModel): model under test
        truth (FrameModel): reference model

    Returns:
        ModelDiff: missing/extra nodes and elements, support and load
            mismatches, and element property differences
    """
    gen_nodes = {point_key(n.x, n.y) for n in generated.nodes}
    truth_nodes = {point_key(n.x, n.y) for n in truth.nodes}

    gen_elements = {}
    for element in generated.elements:
        gen_elements.setdefault(_segment(generated, element)[0], element)
    truth_elements = {}
    for element in truth.elements:
        truth_elements.setdefault(_segment(truth, element)[0], element)

    def fixities(model):
        out = {}
        for s in model.supports:
            node = model.node_index[s.node]
            out[point_key(node.x, node.y)] = tuple(bool(f) for f in s.fixity)
        return out

    gen_fix, truth_fix = fixities(generated), fixities(truth)
    support_mismatches = [
        (p, gen_fix.get(p), truth_fix.get(p))
        for p in sorted(set(gen_fix) | set(truth_fix))
        if gen_fix.get(p) != truth_fix.get(p)
    ]

    zero = (0.0, 0.0, 0.0)
    gen_pl, truth_pl = _point_loads(generated), _point_loads(truth)
    point_load_mismatches = []
    for p in sorted(set(gen_pl) | set(truth_pl)):
        g, t = gen_pl.get(p, zero), truth_pl.get(p, zero)
        if not all(_close(a, b) for a, b in zip(g, t)):
            point_load_mismatches.append((p, g, t))

    gen_dl, truth_dl = _distributed_loads(generated), _distributed_loads(truth)
    distributed_load_mismatches = []
    for s in sorted(set(gen_dl) | set(truth_dl)):
        g, t = gen_dl.get(s, 0.0), truth_dl.get(s, 0.0)
        if not _close(g, t):
            distributed_load_mismatches.append((s, g, t))

    property_mismatches: List[Tuple[Segment, str]] = []
    for s in sorted(set(gen_elements) & set(truth_elements)):
        g, t = gen_elements[s], truth_elements[s]
        for name in ("kind", "E", "A", "I"):
            a, b = getattr(g, name), getattr(t, name)
            same = a == b if name == "kind" else _close(a, b)
            if not same:
                property_mismatches.append((s, name))

    return ModelDiff(
        missing_nodes=tuple(sorted(truth_nodes - gen_nodes)),
        extra_nodes=tuple(sorted(gen_nodes - truth_nodes)),
        missing_elements=tuple(sorted(set(truth_elements) - set(gen_elements))),
        extra_elements=tuple(sorted(set(gen_elements) - set(truth_elements))),
        support_mismatches=tuple(support_mismatches),
        point_load_mismatches=tuple(point_load_mismatches),
        distributed_load_mismatches=tuple(distributed_load_mismatches),
        property_mismatches=tuple(property_mismatches),
    )
