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
import json
import tempfile
import unittest

from loguru import logger

from sawpframe.benchmark.cases import case_by_id
from sawpframe.errors import GatewayError, ReplayMissError
from sawpframe.fem.parameters import ParameterSet
from sawpframe.frame.document import model_to_dict
from sawpframe.grading.grader import ErrorType
from sawpframe.llm.config import ProviderConfig
from sawpframe.llm.gateway import Gateway
from sawpframe.pipeline import stages
from sawpframe.prompts.forge import PromptOptions


def fenced(doc):
    return "Answer:\n```json\n" + json.dumps(doc) + "\n```\n"


class FailingGateway(Gateway):
    """Gateway whose provider is down"""

    def complete(self, script, tag=None, sample=0):
        raise GatewayError("service unavailable")


class NoDiagramsGateway(Gateway):
    """Scripted gateway that answers stage 3 in prose"""

    def complete(self, script, tag=None, sample=0):
        if tag is not None and tag.stage == 3:
            return "Show the moment diagram."
        return super().complete(script, tag, sample)


class ParseTest(unittest.TestCase):
    """
    Tests parsing of stage responses
    """

    def setUp(self):
        self.truth = case_by_id(1).truth_model
        self.parameters = ParameterSet.from_model(self.truth)

    def test_fenced_block(self):
        """
        Tests exactly one fenced block is accepted, with or without a language tag
        """
        self.assertEqual(stages.extract_fenced_block("x\n```json\n{}\n```\ny"), "{}\n")
        self.assertEqual(stages.extract_fenced_block("```\n[1]\n```"), "[1]\n")
        with self.assertRaises(ValueError):
            stages.extract_fenced_block("{}")
        with self.assertRaises(ValueError):
            stages.extract_fenced_block("```json\n{}\n```\n```json\n{}\n```")

    def test_stage_one(self):
        """
        Tests parameter maps parse and bad values are unparseable
        """
        output = stages.parse_stage_output(1, fenced(self.parameters.to_dict()), "d1")
        self.assertTrue(output.ok)
        self.assertEqual(output.payload, self.parameters)
        self.assertEqual(output.digest, "d1")

        output = stages.parse_stage_output(1, fenced({"E": -1, "A_column": 1, "I_column": 1}))
        self.assertEqual(output.status, "unparseable")
        self.assertIsNone(output.payload)
        self.assertIn("E must be > 0", output.error)

        self.assertFalse(stages.parse_stage_output(1, fenced([1, 2])).ok)
        self.assertFalse(stages.parse_stage_output(1, "```json\n{E: 1}\n```").ok)

    def test_stage_two(self):
        """
        Tests element properties left out are filled in from the parameters
        """
        doc = model_to_dict(self.truth)
        for element in doc["elements"]:
            for key in ("E", "A", "I"):
                del element[key]
        output = stages.parse_stage_output(2, fenced(doc), parameters=self.parameters)
        self.assertTrue(output.ok)
        self.assertEqual(output.payload, self.truth)

        self.assertFalse(stages.parse_stage_output(2, fenced(doc)).ok)
        doc["nodes"][0]["z"] = 1.0
        self.assertFalse(stages.parse_stage_output(2, fenced(doc), parameters=self.parameters).ok)

    def test_stage_three(self):
        """
        Tests diagram requests parse and unknown stages do not
        """
        output = stages.parse_stage_output(3, fenced({"diagrams": ["moment"]}))
        self.assertEqual(output.payload.diagrams, ("moment",))
        self.assertFalse(stages.parse_stage_output(3, fenced({"diagrams": ["heat"]})).ok)
        self.assertFalse(stages.parse_stage_output(4, fenced({})).ok)

    def test_stage_output_invariant(self):
        """
        Tests payload presence follows the parse status
        """
        with self.assertRaises(ValueError):
            stages.StageOutput(1, "x", None, "ok")
        with self.assertRaises(ValueError):
            stages.StageOutput(1, "x", "payload", "unparseable")
        with self.assertRaises(ValueError):
            stages.StageOutput(1, "x", None, "timeout")


class AttemptTest(unittest.TestCase):
    """
    Tests whole attempts through the scripted provider
    """

    def setUp(self):
        self.golden = Gateway(ProviderConfig("scripted", "golden"))
        self.degraded = Gateway(ProviderConfig("scripted", "degraded"))

    def test_correct_attempt(self):
        """
        Tests a truthful attempt is solved with results and a diagram request
        """
        case = case_by_id(1)
        attempt = stages.run_attempt(case, 0, PromptOptions(), self.golden)
        self.assertTrue(attempt.solved)
        self.assertEqual([s.stage for s in attempt.stages], [1, 2, 3])
        self.assertEqual(len(set(attempt.digests)), 3)
        self.assertEqual(attempt.model.visualization, case.visualization)
        self.assertIsNotNone(attempt.result)
        self.assertTrue(attempt.findings.ok)
        doc = attempt.to_dict()
        self.assertEqual(doc["error_type"], "none")
        self.assertIsNone(doc["infrastructure_error"])

    def test_run_stage(self):
        """
        Tests a single stage is prompted and parsed on its own
        """
        case = case_by_id(11)
        output = stages.run_stage(case, 1, PromptOptions(), self.degraded)
        self.assertTrue(output.ok)
        self.assertEqual(output.payload, ParameterSet.from_model(case.truth_model))
        self.assertEqual(len(output.digest), 64)

        layout = stages.run_stage(
            case, 2, PromptOptions(), self.degraded,
            upstream=output.payload.table(), parameters=output.payload,
        )
        self.assertTrue(layout.ok)
        self.assertLess(len(layout.payload.nodes), len(case.truth_model.nodes))

    def test_self_exemplar_warns(self):
        """
        Tests a case prompted with itself as the worked example falls back with a warning
        """
        messages = []
        handler = logger.add(messages.append, level="WARNING", format="{message}")
        try:
            own = stages.run_stage(case_by_id(1), 1, PromptOptions(exemplar=1, fallback_exemplar=3), self.golden)
            other = stages.run_stage(case_by_id(2), 1, PromptOptions(exemplar=1, fallback_exemplar=3), self.golden)
        finally:
            logger.remove(handler)
        self.assertTrue(own.ok and other.ok)
        self.assertEqual(len(messages), 1)
        self.assertIn("Case 1 is its own worked example", messages[0])
        self.assertIn("example 3", messages[0])

    def test_unparseable_stops_attempt(self):
        """
        Tests an unparseable model ends the attempt after stage 2
        """
        attempt = stages.run_attempt(case_by_id(4), 0, PromptOptions(), self.golden)
        self.assertEqual(len(attempt.stages), 2)
        self.assertIsNone(attempt.model)
        self.assertEqual(attempt.error_type, ErrorType.UNPARSEABLE)
        self.assertEqual(attempt.grade.error_type, ErrorType.UNPARSEABLE)

    def test_mutated_attempts(self):
        """
        Tests planned mutations grade as layout and boundary errors
        """
        case = case_by_id(13)
        expected = [ErrorType.TYPE2, ErrorType.TYPE2, ErrorType.TYPE1]
        for index, error_type in enumerate(expected):
            attempt = stages.run_attempt(case, index, PromptOptions(), self.degraded)
            self.assertEqual(attempt.error_type, error_type)
            self.assertIsNotNone(attempt.result)

    def test_stage_three_failure(self):
        """
        Tests a correct model with an unparseable diagram request is unparseable
        """
        gateway = NoDiagramsGateway(ProviderConfig("scripted", "golden"))
        attempt = stages.run_attempt(case_by_id(2), 0, PromptOptions(), gateway)
        self.assertIsNotNone(attempt.model)
        self.assertFalse(attempt.stages[2].ok)
        self.assertEqual(attempt.error_type, ErrorType.UNPARSEABLE)
        self.assertIn("stage 3", attempt.grade.diff_summary)
        grade = attempt.grade
        self.assertFalse(grade.layout_match or grade.support_match or grade.load_match or grade.numeric_match)
        self.assertFalse(attempt.solved)

    def test_gateway_failure(self):
        """
        Tests provider failures are recorded on the attempt instead of graded
        """
        attempt = stages.run_attempt(case_by_id(2), 0, PromptOptions(), FailingGateway(ProviderConfig("scripted", "golden")))
        self.assertEqual(attempt.infrastructure_error, "service unavailable")
        self.assertIsNone(attempt.error_type)
        self.assertFalse(attempt.solved)

    def test_replay_miss(self):
        """
        Tests replaying a set without the request raises
        """
        with tempfile.TemporaryDirectory() as tmp:
            replay = ProviderConfig("replay", "gpt-4o", replay_dir=tmp)
            with self.assertRaises(ReplayMissError):
                stages.run_attempt(case_by_id(2), 0, PromptOptions(), replay)


if __name__ == '__main__':
    unittest.main()
