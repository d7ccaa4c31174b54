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

"""Reading and writing Frame Model Documents (FMD).

An FMD is a UTF-8 JSON object with the keys ``nodes``, ``elements``,
``supports``, ``point_loads`` and ``distributed_loads`` plus the optional
``stated_counts`` and ``visualization``. :func:`serialize_document` writes one
record per line so documents diff cleanly; ``parse_document`` of that output
gives back the same model.
"""

import json
import math
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Optional, Union

import jsonschema

from sawpframe.errors import SchemaError
from sawpframe.frame.model import (
    DistributedLoad,
    Element,
    FrameModel,
    Node,
    PointLoad,
    StatedCounts,
    Support,
    VisualizationSpec,
    verify_integrity,
)

SCHEMA_DIR = Path(__file__).resolve().parent.parent / "assets" / "schemas"


@lru_cache(maxsize=None)
def load_schema(name: str) -> Dict[str, Any]:
    """Loads one of the bundled JSON schemas, e.g. ``fmd`` or ``transcript``"""
    with open(SCHEMA_DIR / f"{name}.schema.json", "r", encoding="utf-8") as f:
        return json.load(f)


def check_schema(instance: Any, name: str, definition: Optional[str] = None):
    """Validates ``instance`` against a bundled schema.

    Args:
        instance: decoded JSON value
        name (str): schema name, e.g. ``fmd``
        definition (Optional[str], optional): validate against one entry of
            the schema's ``definitions`` instead. Defaults to None.

    Raises:
        SchemaError: naming the JSON path of the first violation
    """
    schema = load_schema(name)
    if definition is not None:
        schema = {"$ref": f"#/definitions/{definition}", "definitions": schema["definitions"]}
    try:
        jsonschema.validate(instance=instance, schema=schema)
    except jsonschema.ValidationError as e:
        path = "/" + "/".join(str(p) for p in e.absolute_path)
        raise SchemaError(f"{name} schema violation at {path}: {e.message}") from e


def _finite(value, where: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise SchemaError(f"Non-finite number at {where}")
    return value


def model_from_dict(doc: Dict[str, Any]) -> FrameModel:
    """Builds a FrameModel from a decoded FMD object.

    Args:
        doc (dict): Decoded JSON document

    Raises:
        SchemaError: document does not follow the FMD schema
        DanglingReferenceError: a record refers to an undefined id
        DuplicateIdError: an id is defined twice

    Returns:
        FrameModel: validated model
    """
    check_schema(doc, "fmd")

    nodes = tuple(
        Node(int(n["id"]), _finite(n["x"], f"node {n['id']}"), _finite(n["y"], f"node {n['id']}"))
        for n in doc["nodes"]
    )
    elements = tuple(
        Element(
            id=int(e["id"]),
            node_i=int(e["i"]),
            node_j=int(e["j"]),
            kind=e["kind"],
            E=_finite(e["E"], f"element {e['id']}"),
            A=_finite(e["A"], f"element {e['id']}"),
            I=_finite(e["I"], f"element {e['id']}"),
        )
        for e in doc["elements"]
    )
    supports = tuple(
        Support(int(s["node"]), tuple(bool(f) for f in s["fix"]))
        for s in doc["supports"]
    )
    point_loads = tuple(
        PointLoad(
            int(p["node"]),
            _finite(p["fx"], "point load"),
            _finite(p["fy"], "point load"),
            _finite(p["mz"], "point load"),
        )
        for p in doc["point_loads"]
    )
    distributed_loads = tuple(
        DistributedLoad(int(d["element"]), _finite(d["w"], "distributed load"), bool(d["inward"]))
        for d in doc["distributed_loads"]
    )

    stated_counts = None
    if "stated_counts" in doc:
        c = doc["stated_counts"]
        stated_counts = StatedCounts(
            int(c["columns"]), int(c["girders"]), int(c["diagonals"]), int(c["cantilevers"])
        )

    visualization = None
    if "visualization" in doc:
        visualization = visualization_from_dict(doc["visualization"])

    model = FrameModel(
        nodes=nodes,
        elements=elements,
        supports=supports,
        point_loads=point_loads,
        distributed_loads=distributed_loads,
        stated_counts=stated_counts,
        visualization=visualization,
    )
    return verify_integrity(model)


def visualization_from_dict(doc: Dict[str, Any]) -> VisualizationSpec:
    check_schema(doc, "fmd", definition="visualization")
    defaults = VisualizationSpec()
    return VisualizationSpec(
        diagrams=tuple(doc["diagrams"]),
        scale=float(doc.get("scale", defaults.scale)),
        samples=int(doc.get("samples", defaults.samples)),
    )


def visualization_to_dict(spec: VisualizationSpec) -> Dict[str, Any]:
    return {"diagrams": list(spec.diagrams), "scale": float(spec.scale), "samples": int(spec.samples)}


def parse_document(text: str) -> FrameModel:
    """Parses FMD text into a FrameModel.

    Args:
        text (str): FMD document text

    Raises:
        SchemaError: text is not JSON or does not follow the FMD schema

    Returns:
        FrameModel: validated model
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"Document is not valid JSON: {e}") from e
    return model_from_dict(doc)


def _num(value: float) -> float:
    # folds -0.0 into 0.0
    return float(value) + 0.0


def model_to_dict(model: FrameModel) -> Dict[str, Any]:
    doc = {
        "nodes": [{"id": n.id, "x": _num(n.x), "y": _num(n.y)} for n in model.nodes],
        "elements": [
            {
                "id": e.id,
                "i": e.node_i,
                "j": e.node_j,
                "kind": e.kind,
                "E": _num(e.E),
                "A": _num(e.A),
                "I": _num(e.I),
            }
            for e in model.elements
        ],
        "supports": [{"node": s.node, "fix": [bool(f) for f in s.fixity]} for s in model.supports],
        "point_loads": [
            {"node": p.node, "fx": _num(p.fx), "fy": _num(p.fy), "mz": _num(p.mz)}
            for p in model.point_loads
        ],
        "distributed_loads": [
            {"element": d.element, "w": _num(d.w_local), "inward": bool(d.declared_inward)}
            for d in model.distributed_loads
        ],
    }
    if model.stated_counts is not None:
        doc["stated_counts"] = dict(model.stated_counts._asdict())
    if model.visualization is not None:
        doc["visualization"] = visualization_to_dict(model.visualization)
    return doc


def serialize_document(model: FrameModel) -> str:
    """Writes a model as FMD text, one record per line.

    Args:
        model (FrameModel): model to serialize

    Returns:
        str: document text ending in a newline
    """
    doc = model_to_dict(model)
    sections = []
    for key, value in doc.items():
        if isinstance(value, list):
            if value:
                rows = ",\n".join(f"    {json.dumps(row)}" for row in value)
                sections.append(f'  "{key}": [\n{rows}\n  ]')
            else:
                sections.append(f'  "{key}": []')
        else:
            sections.append(f'  "{key}": {json.dumps(value)}')
    return "{\n" + ",\n".join(sections) + "\n}\n"


def read_document(path: Union[str, Path]) -> FrameModel:
    with open(path, "r", encoding="utf-8") as f:
        return parse_document(f.read())


def write_document(model: FrameModel, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(serialize_document(model))
    return path
