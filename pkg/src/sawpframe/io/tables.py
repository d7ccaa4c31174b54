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

"""Tabular views of a solution and their CSV exports"""

from pathlib import Path
from typing import Union

import pandas as pd

from sawpframe.fem.solver import SolveResult

FORCE_COLUMNS = ["axial_N", "shear_N", "moment_Nm"]
DISPLACEMENT_COLUMNS = ["ux_m", "uy_m", "rz_rad"]
REACTION_COLUMNS = ["Rx_N", "Ry_N", "Mz_Nm"]
FLOAT_FORMAT = "%.9g"


def forces_table(result: SolveResult) -> pd.DataFrame:
    """One row per element end, in element id order"""
    rows = []
    for element_id in sorted(result.end_forces):
        for end, forces in enumerate(result.end_forces[element_id], start=1):
            rows.append((element_id, end, *forces))
    table = pd.DataFrame(rows, columns=["element_id", "end"] + FORCE_COLUMNS)
    table[FORCE_COLUMNS] = table[FORCE_COLUMNS].astype(float) + 0.0
    return table


def _node_table(values, columns) -> pd.DataFrame:
    rows = [(node_id, *values[node_id]) for node_id in sorted(values)]
    table = pd.DataFrame(rows, columns=["node_id"] + columns)
    table[columns] = table[columns].astype(float) + 0.0
    return table


def displacements_table(result: SolveResult) -> pd.DataFrame:
    return _node_table(result.displacements, DISPLACEMENT_COLUMNS)


def reactions_table(result: SolveResult) -> pd.DataFrame:
    return _node_table(result.reactions, REACTION_COLUMNS)


def with_extrema(table: pd.DataFrame, label_column: str, value_columns) -> pd.DataFrame:
    """Appends ``min`` and ``max`` rows holding the column-wise extrema"""
    labels = [c for c in table.columns if c not in value_columns]
    extrema = []
    for name, values in (("min", table[value_columns].min()), ("max", table[value_columns].max())):
        row = {c: "" for c in labels}
        row[label_column] = name
        row.update(values.to_dict())
        extrema.append(row)
    body = table.astype({c: object for c in labels})
    return pd.concat([body, pd.DataFrame(extrema, columns=table.columns)], ignore_index=True)


def export_forces_csv(result: SolveResult, path: Union[str, Path]) -> Path:
    """Writes element end forces with trailing ``min`` and ``max`` rows.

    Args:
        result (SolveResult): solution
        path (Union[str, Path]): CSV file to write

    Returns:
        Path: the file written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table = forces_table(result)
    if not table.empty:
        table = with_extrema(table, "element_id", FORCE_COLUMNS)
    table.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def export_reactions_csv(result: SolveResult, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table = reactions_table(result)
    if not table.empty:
        table = with_extrema(table, "node_id", REACTION_COLUMNS)
    table.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path
