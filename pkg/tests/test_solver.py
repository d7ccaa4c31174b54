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
import os
import tempfile
import unittest
import warnings
from unittest import mock
from dataclasses import replace

import numpy as np

from sawpframe.benchmark.cases import PIN_FLOOR, PIN_RTOL, case_by_id, load_cases
from sawpframe.errors import ConditionWarning, ShapeMismatchError, SingularSystemError
from sawpframe.fem import solver
from sawpframe.fem.element import element_geometry
from sawpframe.frame.model import DistributedLoad, Element, FrameModel, Node, PointLoad, Support

FIXED = (True, True, True)


def cantilever():
    return FrameModel(
        nodes=(Node(1, 0.0, 0.0), Node(2, 0.0, 4.0)),
        elements=(Element(1, 1, 2, "column", 2e11, 2e-3, 1.6e-5),),
        supports=(Support(1, FIXED),),
        point_loads=(PointLoad(2, 2000.0, 0.0, 0.0),),
    )


def simple_beam():
    """6 m simply supported beam in two elements under 1e4 N/m downward"""
    return FrameModel(
        nodes=(Node(1, 0.0, 0.0), Node(2, 3.0, 0.0), Node(3, 6.0, 0.0)),
        elements=(
            Element(1, 1, 2, "girder", 2e11, 6e-3, 5.4e-5),
            Element(2, 2, 3, "girder", 2e11, 6e-3, 5.4e-5),
        ),
        supports=(Support(1, (True, True, False)), Support(3, (False, True, False))),
        distributed_loads=(DistributedLoad(1, -1e4), DistributedLoad(2, -1e4)),
    )


def scaled_loads(model, factor):
    return replace(
        model,
        point_loads=tuple(PointLoad(p.node, p.fx * factor, p.fy * factor, p.mz * factor) for p in model.point_loads),
        distributed_loads=tuple(replace(d, w_local=d.w_local * factor) for d in model.distributed_loads),
    )


def split_element(model, element_id):
    """Model with one element replaced by two halves meeting at a new node"""
    element = model.element_index[element_id]
    (xi, yi), (xj, yj) = model.endpoints(element)
    node_id = max(n.id for n in model.nodes) + 1
    new_id = max(e.id for e in model.elements) + 1
    middle = Node(node_id, (xi + xj) / 2, (yi + yj) / 2)
    first = replace(element, node_j=node_id)
    second = replace(element, id=new_id, node_i=node_id)
    elements = tuple(first if e.id == element_id else e for e in model.elements) + (second,)
    loads = model.distributed_loads + tuple(
        replace(d, element=new_id) for d in model.distributed_loads if d.element == element_id
    )
    return replace(model, nodes=model.nodes + (middle,), elements=elements, distributed_loads=loads)


def equilibrium_residuals(model, result):
    """Sum of forces in x and y and moment about the origin of loads plus reactions"""
    terms = []
    for load in model.point_loads:
        node = model.node_index[load.node]
        terms.append((load.fx, load.fy, node.x * load.fy - node.y * load.fx + load.mz))
    for node_id, (rx, ry, mz) in result.reactions.items():
        node = model.node_index[node_id]
        terms.append((rx, ry, node.x * ry - node.y * rx + mz))
    for load in model.distributed_loads:
        element = model.element_index[load.element]
        (xi, yi), (xj, yj) = model.endpoints(element)
        geometry = element_geometry(xi, yi, xj, yj)
        total = load.w_local * geometry.length
        fx, fy = -geometry.s * total, geometry.c * total
        mx, my = (xi + xj) / 2, (yi + yj) / 2
        terms.append((fx, fy, mx * fy - my * fx))
    terms = np.array(terms)
    return np.abs(terms.sum(axis=0)), np.abs(terms).max(axis=0)


def assert_results_close(test, a, b, rtol):
    test.assertTrue(solver.results_close(a, b, rtol=rtol, floor=rtol))


class SolverTest(unittest.TestCase):
    """
    Tests the direct stiffness solver against known answers
    """

    def test_portal_frame_displacements(self):
        """
        Tests node displacements of the single-bay portal of case 1
        """
        result = solver.solve(case_by_id(1).truth_model)
        np.testing.assert_allclose(result.displacements[2], (0.00203106, -0.000293798, -0.00458888), rtol=1e-3)
        np.testing.assert_allclose(result.displacements[4], (0.00199962, -0.000306202, 0.0042402), rtol=1e-3)
        self.assertEqual(result.displacements[1], (0.0, 0.0, 0.0))
        self.assertEqual(result.displacements[3], (0.0, 0.0, 0.0))

    def test_recover_end_forces(self):
        """
        Tests end forces recovered from the displacement vector match the solution
        """
        model = case_by_id(1).truth_model
        result = solver.solve(model)
        dofs = solver.dof_map(model)
        u = result.displacement_vector(dofs)
        for element in model.elements:
            np.testing.assert_allclose(
                solver.recover_end_forces(model, element, u, dofs), result.end_forces[element.id], rtol=1e-9, atol=1e-6
            )

    def test_portal_frame_end_forces(self):
        """
        Tests all six end-force triples of case 1
        """
        forces = solver.solve(case_by_id(1).truth_model).end_forces
        expected = {
            1: ((29379.8, -4288.01, -4904.93), (-29379.8, 4288.01, -12247.1)),
            2: ((30620.2, 6288.01, 9183.87), (-30620.2, -6288.01, 15968.2)),
            3: ((6288.01, 29379.8, 12247.1), (-6288.01, 30620.2, -15968.2)),
        }
        for element_id, ends in expected.items():
            for end, triple in enumerate(ends):
                np.testing.assert_allclose(forces[element_id][end], triple, rtol=1e-3)

    def test_portal_frame_girder_shear(self):
        """
        Tests the girder end shears add up to the total span load
        """
        (_, v1, _), (_, v2, _) = solver.solve(case_by_id(1).truth_model).end_forces[3]
        self.assertAlmostEqual(v1 + v2, 60000.0, delta=60000.0 * 1e-8)

    def test_portal_frame_reactions(self):
        """
        Tests reactions at the fixed bases of case 1
        """
        reactions = solver.solve(case_by_id(1).truth_model).reactions
        np.testing.assert_allclose(reactions[1], (4288.01457, 29379.8236, -4904.9273), rtol=1e-6)
        np.testing.assert_allclose(reactions[3], (-6288.01457, 30620.1764, 9183.86887), rtol=1e-6)

    def test_cantilever_sway(self):
        """
        Tests the tip sway of a cantilever column equals PH^3/3EI
        """
        result = solver.solve(cantilever())
        expected = 2000.0 * 4.0**3 / (3 * 2e11 * 1.6e-5)
        self.assertAlmostEqual(expected, 0.0133333333, places=9)
        self.assertAlmostEqual(result.displacements[2][0], expected, delta=expected * 1e-9)

    def test_simple_beam(self):
        """
        Tests midspan deflection, support shear and midspan moment of a simple beam
        """
        result = solver.solve(simple_beam())
        deflection = 5 * 1e4 * 6.0**4 / (384 * 2e11 * 5.4e-5)
        self.assertAlmostEqual(deflection, 0.015625)
        self.assertAlmostEqual(-result.displacements[2][1], deflection, delta=deflection * 1e-9)

        (_, v1, m1), (_, _, m2) = result.end_forces[1]
        self.assertAlmostEqual(v1, 30000.0, delta=30000.0 * 1e-9)
        self.assertAlmostEqual(result.reactions[1][1], 30000.0, delta=30000.0 * 1e-9)
        self.assertAlmostEqual(result.reactions[3][1], 30000.0, delta=30000.0 * 1e-9)
        # moment carried across midspan, sagging
        self.assertAlmostEqual(m2, 45000.0, delta=45000.0 * 1e-9)
        self.assertAlmostEqual(m1, 0.0, delta=1e-6)

    def test_assembly(self):
        """
        Tests the global stiffness is symmetric and the load vector sums the loads
        """
        for case in load_cases():
            K, F, dofs = solver.assemble(case.truth_model)
            np.testing.assert_allclose(K, K.T, rtol=1e-9, atol=1e-9 * np.abs(K).max())
            self.assertEqual(K.shape, (3 * len(dofs), 3 * len(dofs)))

        unloaded = replace(cantilever(), point_loads=())
        self.assertFalse(np.any(solver.assemble(unloaded).F))
        result = solver.solve(unloaded)
        self.assertEqual(result.end_forces[1], ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0)))

    def test_insufficient_supports(self):
        """
        Tests fewer than three constrained DOFs is a singular system
        """
        model = replace(simple_beam(), supports=(Support(1, (True, True, False)),))
        with self.assertRaises(SingularSystemError):
            solver.solve(model)

    def test_mechanism(self):
        """
        Tests two rollers and a pin that cannot resist sway form a mechanism
        """
        model = replace(
            simple_beam(),
            supports=(Support(1, (False, True, False)), Support(2, (False, True, False)), Support(3, (False, True, False))),
        )
        with self.assertRaises(SingularSystemError):
            solver.solve(model)

    def test_overflowing_stiffness(self):
        """
        Tests a modulus that overflows the assembled system is a singular system
        """
        elements = tuple(replace(e, E=1e308) for e in simple_beam().elements)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            with self.assertRaises(SingularSystemError):
                solver.solve(replace(simple_beam(), elements=elements))

    def test_condition_warning(self):
        """
        Tests a condition number above the limit warns without failing the solve
        """
        with mock.patch.object(solver, "COND_LIMIT", 1.0):
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                result = solver.solve(cantilever())
        self.assertTrue(any(issubclass(w.category, ConditionWarning) for w in caught))
        self.assertGreater(result.displacements[2][0], 0.0)

    def test_result_serialization(self):
        """
        Tests the pinned solution format round-trips through a file
        """
        result = solver.solve(case_by_id(1).truth_model)
        with tempfile.TemporaryDirectory() as tmp:
            path = solver.write_result(result, os.path.join(tmp, "solution.json"))
            again = solver.read_result(path)
        self.assertTrue(solver.results_close(again, result, rtol=1e-8, floor=1e-9))
        self.assertEqual(solver.serialize_result(again), solver.serialize_result(result))

    def test_results_close_shape(self):
        """
        Tests results over different elements cannot be compared
        """
        a = solver.solve(case_by_id(1).truth_model)
        b = solver.solve(cantilever())
        with self.assertRaises(ShapeMismatchError):
            solver.results_close(a, b, rtol=1e-3)


class SolverPropertyTest(unittest.TestCase):
    """
    Tests mechanical invariants over every benchmark ground-truth model
    """

    @classmethod
    def setUpClass(cls):
        cls.cases = load_cases()

    def test_global_equilibrium(self):
        """
        Tests loads and reactions balance in both directions and in moment
        """
        for case in self.cases:
            with self.subTest(case=case.id):
                residual, scale = equilibrium_residuals(case.truth_model, solver.solve(case.truth_model))
                self.assertTrue(np.all(residual <= 1e-8 * scale.max()), residual)

    def test_energy_balance(self):
        """
        Tests external work equals strain energy
        """
        for case in self.cases:
            with self.subTest(case=case.id):
                model = case.truth_model
                K, F, dofs = solver.assemble(model)
                u = solver.solve(model).displacement_vector(dofs)
                external = F @ u
                strain = u @ K @ u
                self.assertAlmostEqual(external, strain, delta=1e-8 * abs(strain))

    def test_superposition(self):
        """
        Tests the response to point and span loads adds up to the combined response
        """
        for case in self.cases:
            with self.subTest(case=case.id):
                model = case.truth_model
                combined = solver.solve(model)
                points = solver.solve(replace(model, distributed_loads=()))
                spans = solver.solve(replace(model, point_loads=()))
                total = solver.SolveResult(
                    {k: tuple(np.add(v, spans.displacements[k])) for k, v in points.displacements.items()},
                    {
                        k: tuple(tuple(np.add(a, b)) for a, b in zip(v, spans.end_forces[k]))
                        for k, v in points.end_forces.items()
                    },
                    {},
                )
                assert_results_close(self, total, combined, 1e-8)

                doubled = solver.solve(scaled_loads(model, 2.0))
                halved = solver.SolveResult(
                    {k: tuple(np.multiply(v, 0.5)) for k, v in doubled.displacements.items()},
                    {k: tuple(tuple(np.multiply(e, 0.5)) for e in v) for k, v in doubled.end_forces.items()},
                    {},
                )
                assert_results_close(self, halved, combined, 1e-8)

    def test_modulus_scaling(self):
        """
        Tests doubling every E halves displacements and keeps the forces
        """
        for case in self.cases:
            with self.subTest(case=case.id):
                model = case.truth_model
                base = solver.solve(model)
                stiff = solver.solve(replace(model, elements=tuple(replace(e, E=2 * e.E) for e in model.elements)))
                rescaled = solver.SolveResult(
                    {k: tuple(np.multiply(v, 2.0)) for k, v in stiff.displacements.items()},
                    stiff.end_forces,
                    stiff.reactions,
                )
                assert_results_close(self, rescaled, base, 1e-8)

    def test_rigid_translation(self):
        """
        Tests moving the whole frame leaves the response unchanged
        """
        for case in self.cases:
            with self.subTest(case=case.id):
                model = case.truth_model
                moved = replace(model, nodes=tuple(replace(n, x=n.x + 10.0, y=n.y - 3.0) for n in model.nodes))
                assert_results_close(self, solver.solve(moved), solver.solve(model), 1e-8)

    def test_element_refinement(self):
        """
        Tests splitting an element in two keeps the displacements of the original nodes
        """
        for case in self.cases:
            model = case.truth_model
            for element in model.elements:
                with self.subTest(case=case.id, element=element.id):
                    base = solver.solve(model)
                    refined = solver.solve(split_element(model, element.id))
                    scale = max(abs(v) for d in base.displacements.values() for v in d)
                    for node_id, d in base.displacements.items():
                        np.testing.assert_allclose(refined.displacements[node_id], d, rtol=1e-6, atol=1e-8 * scale)

    def test_pinned_solutions(self):
        """
        Tests bundled solutions agree with a fresh solve to their stored precision
        """
        for case in self.cases:
            with self.subTest(case=case.id):
                fresh = solver.solve(case.truth_model)
                self.assertTrue(solver.results_close(fresh, case.truth_solution, rtol=PIN_RTOL, floor=PIN_FLOOR))
                np.testing.assert_allclose(
                    [fresh.reactions[k] for k in sorted(fresh.reactions)],
                    [case.truth_solution.reactions[k] for k in sorted(fresh.reactions)],
                    rtol=PIN_RTOL, atol=1e-6,
                )


if __name__ == '__main__':
    unittest.main()
