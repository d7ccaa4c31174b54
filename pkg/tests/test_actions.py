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

# Utility imports
import unittest

import numpy as np

from sawpframe.benchmark.cases import case_by_id
from sawpframe.errors import DomainError
from sawpframe.fem import actions
from sawpframe.fem.element import element_geometry
from sawpframe.fem.solver import solve


class InternalActionTest(unittest.TestCase):
    """
    Tests internal actions along the loaded girder of case 1
    """

    def setUp(self):
        model = case_by_id(1).truth_model
        self.result = solve(model)
        self.girder = model.element_index[3]
        (xi, yi), (xj, yj) = model.endpoints(self.girder)
        self.geometry = element_geometry(xi, yi, xj, yj)
        self.ends = self.result.end_forces[3]
        self.w = model.distributed_loads[0].w_local

    def test_matches_end_forces(self):
        """
        Tests actions at both ends agree with the end forces
        """
        (P1, V1, M1), (P2, V2, M2) = self.ends
        N0, V0, M0 = actions.internal_action_at(self.geometry, self.ends, self.w, 0.0)
        NL, VL, ML = actions.internal_action_at(self.geometry, self.ends, self.w, self.geometry.length)
        self.assertAlmostEqual(V0, 29379.8, delta=29379.8 * 1e-3)
        self.assertAlmostEqual(V0, V1, delta=abs(V1) * 1e-8)
        self.assertAlmostEqual(M0, -M1, delta=abs(M1) * 1e-8)
        self.assertAlmostEqual(N0, NL, delta=abs(N0) * 1e-12)
        self.assertAlmostEqual(NL, P2, delta=abs(P2) * 1e-8)
        self.assertAlmostEqual(VL, -V2, delta=abs(V2) * 1e-8)
        self.assertAlmostEqual(ML, M2, delta=abs(M2) * 1e-8)

    def test_moment_extremum_at_zero_shear(self):
        """
        Tests the moment peaks where the shear changes sign
        """
        x0 = actions.shear_zero(self.geometry, self.ends, self.w)
        self.assertIsNotNone(x0)
        _, V, M = actions.internal_action_at(self.geometry, self.ends, self.w, x0)
        self.assertAlmostEqual(V, 0.0, delta=1e-6)
        h = 1e-3
        _, _, left = actions.internal_action_at(self.geometry, self.ends, self.w, x0 - h)
        _, _, right = actions.internal_action_at(self.geometry, self.ends, self.w, x0 + h)
        self.assertGreater(M, left)
        self.assertGreater(M, right)

    def test_derivative_of_moment_is_shear(self):
        """
        Tests dM/dx equals V by central differences
        """
        h = 1e-4
        for x in (0.5, 2.0, 4.5):
            _, V, _ = actions.internal_action_at(self.geometry, self.ends, self.w, x)
            _, _, Ma = actions.internal_action_at(self.geometry, self.ends, self.w, x - h)
            _, _, Mb = actions.internal_action_at(self.geometry, self.ends, self.w, x + h)
            self.assertAlmostEqual((Mb - Ma) / (2 * h), V, delta=abs(V) * 1e-6 + 1e-3)

    def test_domain(self):
        """
        Tests sections outside the element are rejected
        """
        with self.assertRaises(DomainError):
            actions.internal_action_at(self.geometry, self.ends, self.w, -0.1)
        with self.assertRaises(DomainError):
            actions.internal_action_at(self.geometry, self.ends, self.w, self.geometry.length + 0.1)

    def test_no_extremum_without_span_load(self):
        """
        Tests unloaded members have no interior shear zero
        """
        self.assertIsNone(actions.shear_zero(self.geometry, self.ends, 0.0))

    def test_sample_element(self):
        """
        Tests sampling returns evenly spaced sections with constant axial force
        """
        xs, values = actions.sample_element(self.geometry, self.ends, self.w, 13)
        self.assertEqual(xs.shape, (13,))
        self.assertEqual(values.shape, (13, 3))
        self.assertAlmostEqual(xs[-1], self.geometry.length)
        np.testing.assert_allclose(values[:, 0], values[0, 0])
        with self.assertRaises(ValueError):
            actions.sample_element(self.geometry, self.ends, self.w, 1)

    def test_simple_beam_midspan_moment(self):
        """
        Tests the midspan moment of a simply supported span is wL^2/8
        """
        geometry = element_geometry(0.0, 0.0, 6.0, 0.0)
        ends = ((0.0, 30000.0, 0.0), (0.0, 30000.0, 0.0))
        _, V, M = actions.internal_action_at(geometry, ends, -1e4, 3.0)
        self.assertAlmostEqual(M, 45000.0, delta=45000.0 * 1e-9)
        self.assertAlmostEqual(V, 0.0)


if __name__ == '__main__':
    unittest.main()
