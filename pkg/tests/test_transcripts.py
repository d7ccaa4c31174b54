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
import os
import tempfile
import unittest

from sawpframe.errors import DuplicateDigestError, ReplayMissError, SchemaError
from sawpframe.llm import transcripts
from sawpframe.prompts.forge import Message, MessageScript

SCRIPT = MessageScript((Message("system", "You are terse."), Message("user", "2+2?")))


class DigestTest(unittest.TestCase):
    """
    Tests request digests
    """

    def test_known_digest(self):
        """
        Tests the digest of a fixed request
        """
        self.assertEqual(
            transcripts.digest(SCRIPT, "openai", "gpt-4o"),
            "4e093c74cd1214d8a72165fe12fd8f6efaa36cbbf2dd837143ea4306a821244a",
        )
        self.assertEqual(
            transcripts.digest(SCRIPT, "openai", "gpt-4o", sample=1),
            "16b96e92e8c90bcff91c1a3c8cbfb219f443b2a661d7a6e8b1a39d3943346bd9",
        )

    def test_digest_inputs(self):
        """
        Tests provider, model and messages all enter the digest
        """
        base = transcripts.digest(SCRIPT, "openai", "gpt-4o")
        self.assertNotEqual(base, transcripts.digest(SCRIPT, "groq", "gpt-4o"))
        self.assertNotEqual(base, transcripts.digest(SCRIPT, "openai", "gpt-4"))
        other = MessageScript((Message("system", "You are terse."), Message("user", "2+3?")))
        self.assertNotEqual(base, transcripts.digest(other, "openai", "gpt-4o"))

    def test_recording_time_not_in_digest(self):
        """
        Tests transcripts of the same request share a digest
        """
        a = transcripts.Transcript.create(SCRIPT, "openai", "gpt-4o", "4")
        b = transcripts.Transcript.create(SCRIPT, "openai", "gpt-4o", "four")
        self.assertEqual(a.digest, b.digest)


class TranscriptStoreTest(unittest.TestCase):
    """
    Tests the digest-keyed transcript store
    """

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.store = transcripts.TranscriptStore(self.tmp.name)
        self.transcript = transcripts.Transcript.create(SCRIPT, "openai", "gpt-4o", "4")

    def tearDown(self):
        self.tmp.cleanup()

    def test_store_and_load(self):
        """
        Tests a stored transcript loads back unchanged
        """
        path = self.store.store(self.transcript)
        self.assertEqual(path.name, f"{self.transcript.digest}.json")
        self.assertIn(self.transcript.digest, self.store)
        self.assertEqual(self.store.load(self.transcript.digest), self.transcript)
        self.assertEqual(list(self.store.digests()), [self.transcript.digest])

    def test_duplicate(self):
        """
        Tests a digest is written once unless overwriting
        """
        self.store.store(self.transcript)
        with self.assertRaises(DuplicateDigestError):
            self.store.store(self.transcript)
        again = transcripts.Transcript.create(SCRIPT, "openai", "gpt-4o", "four")
        transcripts.store_transcript(again, self.tmp.name, overwrite=True)
        self.assertEqual(self.store.load(again.digest).response, "four")

    def test_miss(self):
        """
        Tests loading an unknown digest names the digest and directory
        """
        with self.assertRaises(ReplayMissError) as ctx:
            self.store.load("0" * 64)
        self.assertEqual(ctx.exception.digest, "0" * 64)
        self.assertIn(self.tmp.name, str(ctx.exception))

    def test_schema(self):
        """
        Tests malformed transcript files are rejected on load
        """
        doc = self.transcript.to_dict()
        doc["latency"] = 1.2
        with open(os.path.join(self.tmp.name, f"{self.transcript.digest}.json"), "w") as f:
            json.dump(doc, f)
        with self.assertRaises(SchemaError):
            self.store.load(self.transcript.digest)

    def test_manifest(self):
        """
        Tests the manifest records the identity digests were made with
        """
        self.assertIsNone(self.store.read_manifest())
        self.store.write_manifest("scripted", "golden")
        self.assertEqual(self.store.read_manifest(), ("scripted", "golden"))
        self.assertEqual(list(self.store.digests()), [])


if __name__ == '__main__':
    unittest.main()
