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

"""Euler-Bernoulli frame element: geometry, stiffness and span loads.

Degrees of freedom per element are ordered (ux_i, uy_i, rz_i, ux_j, uy_j, rz_j).
"""

import math
from typing import NamedTuple, Tuple

import numpy as np

from sawpframe.errors import ZeroLengthError

# shortest element accepted, in metres
MIN_LENGTH = 1e-12


class ElementGeometry(NamedTuple):
    length: float
    c: float
    s: float


def element_geometry(xi: float, yi: float, xj: float, yj: float) -> ElementGeometry:
    """Length and direction cosines of the member from (xi, yi) to (xj, yj).

    Raises:
        ZeroLengthError: both ends coincide
    """
    length = math.hypot(xj - xi, yj - yi)
    if length <= MIN_LENGTH:
        raise ZeroLengthError(f"Element from ({xi}, {yi}) to ({xj}, {yj}) has zero length")
    return ElementGeometry(length, (xj - xi) / length, (yj - yi) / length)


def local_stiffness(E: float, A: float, I: float, L: float) -> np.ndarray:
    """6x6 element stiffness in local axes.

    Args:
        E (float): Young's modulus, Pa
        A (float): cross-sectional area, m^2
        I (float): second moment of area, m^4
        L (float): element length, m

    Raises:
        ValueError: any argument is not positive

    Returns:
        np.ndarray: symmetric stiffness matrix
    """
    for name, value in (("E", E), ("A", A), ("I", I), ("L", L)):
        if not value > 0:
            raise ValueError(f"{name} must be > 0, got {value}")

    ea = E * A / L
    k1 = 12 * E * I / L**3
    k2 = 6 * E * I / L**2
    k3 = 4 * E * I / L
    k4 = 2 * E * I / L

    return np.array(
        [
            [ea, 0.0, 0.0, -ea, 0.0, 0.0],
            [0.0, k1, k2, 0.0, -k1, k2],
            [0.0, k2, k3, 0.0, -k2, k4],
            [-ea, 0.0, 0.0, ea, 0.0, 0.0],
            [0.0, -k1, -k2, 0.0, k1, -k2],
            [0.0, k2, k4, 0.0, -k2, k3],
        ]
    )


def transformation(geometry: ElementGeometry) -> np.ndarray:
    """Rotation taking global element DOFs to local ones"""
    c, s = geometry.c, geometry.s
    rotation = np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
    T = np.zeros((6, 6))
    T[:3, :3] = rotation
    T[3:, 3:] = rotation
    return T


def global_stiffness(E: float, A: float, I: float, geometry: ElementGeometry) -> np.ndarray:
    T = transformation(geometry)
    return T.T @ local_stiffness(E, A, I, geometry.length) @ T


def fixed_end_forces(w_local: float, L: float) -> np.ndarray:
    """Forces a clamped-clamped member exerts on its ends under a uniform load
    ``w_local`` along local +y, given as forces on the element in local axes.
    """
    return np.array(
        [0.0, -w_local * L / 2, -w_local * L**2 / 12, 0.0, -w_local * L / 2, w_local * L**2 / 12]
    )


def equivalent_nodal_loads(
    w_local: float, L: float, geometry: ElementGeometry
) -> Tuple[np.ndarray, np.ndarray]:
    """Consistent nodal loads of a uniform span load.

    Args:
        w_local (float): signed intensity along local +y, N/m
        L (float): element length, m
        geometry (ElementGeometry): element direction

    Raises:
        ValueError: L is not positive

    Returns:
        Tuple[np.ndarray, np.ndarray]: global equivalent nodal loads and the
            local fixed-end forces, both 6-vectors
    """
    if not L > 0:
        raise ValueError(f"L must be > 0, got {L}")
    fef = fixed_end_forces(w_local, L)
    return transformation(geometry).T @ (-fef), fef
