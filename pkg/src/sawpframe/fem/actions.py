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

"""Internal actions along an element from its end forces.

Sign convention for internal actions: axial force N is positive in tension,
shear V(x) = V1 + w x and bending moment M(x) = -M1 + V1 x + w x^2 / 2, so
that dM/dx = V and positive M is sagging (tension on the local -y face).
"""

from typing import Optional, Tuple

import numpy as np

from sawpframe.errors import DomainError
from sawpframe.fem.element import ElementGeometry

Triple = Tuple[float, float, float]


def internal_action_at(
    geometry: ElementGeometry,
    end_forces: Tuple[Triple, Triple],
    w_local: float,
    x: float,
) -> Triple:
    """Axial force, shear and moment at a section.

    Args:
        geometry (ElementGeometry): element geometry
        end_forces (Tuple[Triple, Triple]): (P, V, M) at both ends from
            :func:`sawpframe.fem.solver.recover_end_forces`
        w_local (float): span load along local +y, N/m
        x (float): distance from node_i along the element axis, m

    Raises:
        DomainError: x lies outside the element

    Returns:
        Triple: (N, V, M) at x
    """
    L = geometry.length
    slack = 1e-12 * L
    if x < -slack or x > L + slack:
        raise DomainError(f"x={x} lies outside the element [0, {L}]")
    x = min(max(x, 0.0), L)

    (P1, V1, M1), _ = end_forces
    N = -P1
    V = V1 + w_local * x
    M = -M1 + V1 * x + w_local * x**2 / 2
    return (N, V, M)


def shear_zero(
    geometry: ElementGeometry,
    end_forces: Tuple[Triple, Triple],
    w_local: float,
) -> Optional[float]:
    """Interior position where the shear changes sign, the location of a
    local moment extremum, or None if there is none.
    """
    if w_local == 0:
        return None
    V1 = end_forces[0][1]
    x = -V1 / w_local
    if 0.0 < x < geometry.length:
        return x
    return None


def sample_element(
    geometry: ElementGeometry,
    end_forces: Tuple[Triple, Triple],
    w_local: float,
    samples: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """Internal actions at evenly spaced sections.

    Returns:
        Tuple[np.ndarray, np.ndarray]: positions of shape (samples,) and
            actions of shape (samples, 3) holding N, V, M
    """
    if samples < 2:
        raise ValueError(f"samples must be >= 2, got {samples}")
    xs = np.linspace(0.0, geometry.length, samples)
    actions = np.array([internal_action_at(geometry, end_forces, w_local, x) for x in xs])
    return xs, actions
