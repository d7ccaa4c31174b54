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

from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Tuple

from sawpframe.frame.model import FrameModel

_SECTIONS = ("column", "girder", "diagonal", "cantilever")


@dataclass(frozen=True)
class ParameterSet:
    """Material, section and load values extracted from a problem statement.

    Diagonal and cantilever sections fall back to the girder section when a
    problem does not give them separately.
    """
    E: float
    A_column: float
    I_column: float
    A_girder: Optional[float] = None
    I_girder: Optional[float] = None
    A_diagonal: Optional[float] = None
    I_diagonal: Optional[float] = None
    A_cantilever: Optional[float] = None
    I_cantilever: Optional[float] = None
    loads: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("E", "A_column", "I_column", "A_girder", "I_girder",
                     "A_diagonal", "I_diagonal", "A_cantilever", "I_cantilever"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError(f"{name} must be > 0, got {value}")
        for name, value in self.loads.items():
            if not value > 0:
                raise ValueError(f"load {name} must be > 0, got {value}")

    def section(self, kind: str) -> Tuple[float, float]:
        """(A, I) for an element kind

        Raises:
            ValueError: the set holds no section for that kind
        """
        if kind not in _SECTIONS:
            raise ValueError(f"Unknown element kind {kind!r}")
        A, I = getattr(self, f"A_{kind}"), getattr(self, f"I_{kind}")
        if (A is None or I is None) and kind in ("diagonal", "cantilever"):
            A, I = self.A_girder, self.I_girder
        if A is None or I is None:
            raise ValueError(f"No section properties given for {kind} elements")
        return A, I

    def to_dict(self) -> Dict[str, Any]:
        doc = {"E": self.E, "A_column": self.A_column, "I_column": self.I_column}
        for kind in _SECTIONS[1:]:
            for prefix in ("A", "I"):
                value = getattr(self, f"{prefix}_{kind}")
                if value is not None:
                    doc[f"{prefix}_{kind}"] = value
        if self.loads:
            doc["loads"] = dict(self.loads)
        return doc

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "ParameterSet":
        """Builds a set from a decoded parameter map.

        Raises:
            ValueError: unknown key, missing required key or a non-positive value
        """
        known = {"E", "loads"} | {f"{p}_{k}" for k in _SECTIONS for p in ("A", "I")}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"Unknown parameters: {sorted(unknown)}")
        for name in ("E", "A_column", "I_column"):
            if name not in doc:
                raise ValueError(f"Missing parameter {name}")
        values = {k: float(v) for k, v in doc.items() if k != "loads"}
        loads = {str(k): abs(float(v)) for k, v in dict(doc.get("loads", {})).items()}
        return cls(loads=loads, **values)

    @classmethod
    def from_model(cls, model: FrameModel) -> "ParameterSet":
        """Parameters a correct extraction would give for a model"""
        values: Dict[str, float] = {}
        for element in model.elements:
            values.setdefault("E", element.E)
            values.setdefault(f"A_{element.kind}", element.A)
            values.setdefault(f"I_{element.kind}", element.I)
        loads = {}
        if model.point_loads:
            loads["point_load"] = max(abs(c) for p in model.point_loads for c in p.components)
        if model.distributed_loads:
            loads["distributed_load"] = abs(model.distributed_loads[0].w_local)
        return cls(loads=loads, **values)

    def table(self) -> str:
        """Markdown table of the parameters"""
        rows = ["| parameter | value |", "| --- | --- |"]
        for name, value in self.to_dict().items():
            if name == "loads":
                rows.extend(f"| {k} | {v:g} |" for k, v in value.items())
            else:
                rows.append(f"| {name} | {value:g} |")
        return "\n".join(rows)
