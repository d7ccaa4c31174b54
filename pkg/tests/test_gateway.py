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
import socket
import tempfile
import unittest
from types import SimpleNamespace
from unittest import mock

import httpx
import openai

from sawpframe.errors import AuthError, GatewayError, GatewayTimeoutError, RateLimitError, ReplayMissError
from sawpframe.llm import gateway
from sawpframe.llm.config import ProviderConfig
from sawpframe.llm.scripted import UNPARSEABLE_ANSWER, RequestTag, ScriptedResponder, load_plan
from sawpframe.pipeline.stages import extract_fenced_block
from sawpframe.prompts.forge import Message, MessageScript

SCRIPT = MessageScript((Message("system", "You are terse."), Message("user", "2+2?")))
REQUEST = httpx.Request("POST", "https://api.example.test/v1/chat/completions")


def reply(text):
    return SimpleNamespace(choices=[SimpleNamespace(message=SimpleNamespace(content=text))])


def fake_client(*outcomes):
    create = mock.Mock(side_effect=list(outcomes))
    return SimpleNamespace(chat=SimpleNamespace(completions=SimpleNamespace(create=create))), create


def status_error(cls, code):
    return cls("failed", response=httpx.Response(code, request=REQUEST), body=None)


def no_network(*args, **kwargs):
    raise AssertionError("network access attempted")


class ProviderConfigTest(unittest.TestCase):
    """
    Tests provider configuration
    """

    def test_from_env(self):
        """
        Tests environment variables and overrides
        """
        config = ProviderConfig.from_env({"SAWP_PROVIDER": "groq", "SAWP_TEMPERATURE": "0.5", "SAWP_RPM": "30"})
        self.assertEqual(config.model, "llama-3.3-70b-versatile")
        self.assertEqual(config.temperature, 0.5)
        self.assertEqual(config.requests_per_minute, 30.0)
        self.assertEqual(config.base_url, "https://api.groq.com/openai/v1")
        self.assertEqual(config.key_variable, "GROQ_API_KEY")

        config = ProviderConfig.from_env({"SAWP_MODEL": "gpt-4"}, provider="openai", temperature=None)
        self.assertEqual(config.label, "openai/gpt-4")
        self.assertEqual(config.temperature, 0.0)
        self.assertIsNone(config.base_url)

    def test_validation(self):
        """
        Tests out-of-range settings are rejected
        """
        with self.assertRaises(ValueError):
            ProviderConfig("anthropic", "x")
        with self.assertRaises(ValueError):
            ProviderConfig("openai", "gpt-4o", retries=0)
        with self.assertRaises(ValueError):
            ProviderConfig("openai", "gpt-4o", temperature=-1.0)
        with self.assertRaises(ValueError):
            ProviderConfig("replay", "gpt-4o")
        with self.assertRaises(ValueError):
            ProviderConfig.from_env({"SAWP_PROVIDER": "replay"}, replay_dir="runs")

    def test_names(self):
        """
        Tests labels, slugs and path coercion
        """
        config = ProviderConfig("replay", "gpt-4o-2024-08-06", replay_dir="golden")
        self.assertEqual(config.slug(), "replay_gpt-4o-2024-08-06")
        self.assertFalse(config.is_live)
        self.assertEqual(config.replay_dir.name, "golden")
        self.assertEqual(config.with_overrides(model="m", temperature=None).model, "m")
        self.assertEqual(ProviderConfig("openai", "gpt-4o").api_key({"OPENAI_API_KEY": "k"}), "k")


class RateLimiterTest(unittest.TestCase):
    """
    Tests request spacing
    """

    def test_spacing(self):
        """
        Tests back-to-back requests wait out the interval
        """
        now = [0.0]
        sleeps = []

        def sleep(seconds):
            sleeps.append(seconds)
            now[0] += seconds

        limiter = gateway.RateLimiter(30, clock=lambda: now[0], sleep=sleep)
        limiter.acquire()
        limiter.acquire()
        now[0] += 5.0
        limiter.acquire()
        self.assertEqual(sleeps, [2.0])
        now[0] += 1.0
        limiter.acquire()
        self.assertEqual(sleeps, [2.0, 1.0])
        with self.assertRaises(ValueError):
            gateway.RateLimiter(0)

    def test_shared_per_provider(self):
        """
        Tests configs of one provider share a limiter
        """
        a = gateway.rate_limiter_for(ProviderConfig("gemini", "a", requests_per_minute=10))
        b = gateway.rate_limiter_for(ProviderConfig("gemini", "b", requests_per_minute=10))
        self.assertIs(a, b)
        self.assertIsNone(gateway.rate_limiter_for(ProviderConfig("gemini", "a")))


class LiveGatewayTest(unittest.TestCase):
    """
    Tests live providers against a stand-in client
    """

    def setUp(self):
        self.sleeps = []
        self.config = ProviderConfig("openai", "gpt-4o", retries=4)

    def _gateway(self, client, config=None):
        return gateway.Gateway(config or self.config, client=client, sleep=self.sleeps.append)

    def test_request(self):
        """
        Tests the request carries the model, messages and sampling settings
        """
        client, create = fake_client(reply("4"))
        self.assertEqual(self._gateway(client).complete(SCRIPT), "4")
        kwargs = create.call_args.kwargs
        self.assertEqual(kwargs["model"], "gpt-4o")
        self.assertEqual(kwargs["messages"], SCRIPT.to_dicts())
        self.assertEqual(kwargs["temperature"], 0.0)
        self.assertEqual(kwargs["max_tokens"], 4096)

    def test_retry_with_backoff(self):
        """
        Tests transient failures are retried with exponential waits
        """
        client, create = fake_client(
            openai.APITimeoutError(request=REQUEST),
            status_error(openai.RateLimitError, 429),
            status_error(openai.InternalServerError, 500),
            reply("4"),
        )
        self.assertEqual(self._gateway(client).complete(SCRIPT), "4")
        self.assertEqual(create.call_count, 4)
        self.assertEqual(self.sleeps, [1, 2, 4])

    def test_retries_exhausted(self):
        """
        Tests persistent failures map to gateway errors
        """
        client, create = fake_client(*[openai.APITimeoutError(request=REQUEST)] * 4)
        with self.assertRaises(GatewayTimeoutError):
            self._gateway(client).complete(SCRIPT)
        self.assertEqual(create.call_count, 4)

        client, _ = fake_client(*[status_error(openai.RateLimitError, 429)] * 4)
        with self.assertRaises(RateLimitError):
            self._gateway(client).complete(SCRIPT)

        client, create = fake_client(status_error(openai.BadRequestError, 400))
        with self.assertRaises(GatewayError):
            self._gateway(client).complete(SCRIPT)
        self.assertEqual(create.call_count, 1)

    def test_auth(self):
        """
        Tests a missing or rejected key is an auth error naming the variable
        """
        with self.assertRaises(AuthError) as ctx:
            gateway.Gateway(self.config, environ={}).complete(SCRIPT)
        self.assertIn("OPENAI_API_KEY", str(ctx.exception))

        client, create = fake_client(status_error(openai.AuthenticationError, 401))
        with self.assertRaises(AuthError):
            self._gateway(client).complete(SCRIPT)
        self.assertEqual(create.call_count, 1)

    def test_record_live(self):
        """
        Tests live responses are recorded and then replayed offline
        """
        with tempfile.TemporaryDirectory() as tmp:
            client, _ = fake_client(reply("4"))
            self._gateway(client, self.config.with_overrides(record_dir=tmp)).complete(SCRIPT, sample=2)
            with mock.patch.object(socket, "socket", no_network):
                replay = gateway.Gateway(ProviderConfig("replay", "unused", replay_dir=tmp))
                self.assertEqual(replay.identity, ("openai", "gpt-4o"))
                self.assertEqual(replay.complete(SCRIPT, sample=2), "4")
                with self.assertRaises(ReplayMissError):
                    replay.complete(SCRIPT, sample=0)


class ScriptedGatewayTest(unittest.TestCase):
    """
    Tests the offline scripted provider
    """

    def test_plans(self):
        """
        Tests bundled plans load and unknown outcomes are rejected
        """
        self.assertEqual(load_plan("golden")["cases"]["4"], ["unparseable", "truth", "drop_element"])
        with self.assertRaises(ValueError):
            load_plan("missing")
        with self.assertRaises(ValueError):
            ScriptedResponder({"cases": {"1": ["melt"]}})
        responder = ScriptedResponder("degraded")
        self.assertEqual(responder.outcome(14, 0), "unparseable")
        self.assertEqual(responder.outcome(14, 5), "truth")
        self.assertEqual(responder.outcome(2, 0), "truth")

    def test_answers(self):
        """
        Tests each stage answers in its format without network access
        """
        with mock.patch.object(socket, "socket", no_network):
            scripted = gateway.Gateway(ProviderConfig("scripted", "golden"))
            self.assertIn('"E"', extract_fenced_block(scripted.complete(SCRIPT, RequestTag(1, 1))))
            self.assertIn('"nodes"', extract_fenced_block(scripted.complete(SCRIPT, RequestTag(1, 2))))
            self.assertIn('"diagrams"', extract_fenced_block(scripted.complete(SCRIPT, RequestTag(1, 3))))
            self.assertEqual(scripted.complete(SCRIPT, RequestTag(4, 2), sample=0), UNPARSEABLE_ANSWER)
            with self.assertRaises(ValueError):
                scripted.complete(SCRIPT)

    def test_module_complete(self):
        """
        Tests the one-off helper answers through a fresh gateway
        """
        text = gateway.complete(SCRIPT, ProviderConfig("scripted", "golden"), RequestTag(2, 3))
        self.assertTrue(text.startswith("Requested diagrams:"))


if __name__ == '__main__':
    unittest.main()
