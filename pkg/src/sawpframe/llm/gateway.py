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

"""Chat-completion gateway.

Live providers are reached through the OpenAI client at each provider's
OpenAI-compatible endpoint. ``replay`` answers from a recorded transcript
set and ``scripted`` from an answer plan; neither opens a connection.
"""

import threading
import time
from typing import Callable, Dict, Mapping, Optional, Tuple

import openai
from loguru import logger
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt, wait_exponential

from sawpframe.errors import AuthError, GatewayError, GatewayTimeoutError, RateLimitError
from sawpframe.llm.config import ProviderConfig
from sawpframe.llm.scripted import RequestTag, ScriptedResponder
from sawpframe.llm.transcripts import Transcript, TranscriptStore, digest
from sawpframe.prompts.forge import MessageScript

RETRYABLE = (
    openai.APITimeoutError,
    openai.APIConnectionError,
    openai.RateLimitError,
    openai.InternalServerError,
)


class RateLimiter:
    """Spaces requests at least ``60 / requests_per_minute`` seconds apart.
    Callers wait in turn, so bursts are serialized.
    """

    def __init__(
        self,
        requests_per_minute: float,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if requests_per_minute <= 0:
            raise ValueError(f"requests_per_minute must be > 0, got {requests_per_minute}")
        self.interval = 60.0 / requests_per_minute
        self._clock = clock
        self._sleep = sleep
        self._next = -float("inf")
        self._lock = threading.Lock()

    def acquire(self):
        with self._lock:
            now = self._clock()
            wait = self._next - now
            if wait > 0:
                self._sleep(wait)
                now += wait
            self._next = now + self.interval


_limiters: Dict[str, RateLimiter] = {}
_limiters_lock = threading.Lock()


def rate_limiter_for(config: ProviderConfig) -> Optional[RateLimiter]:
    """The process-wide limiter of a provider, None when unlimited"""
    if config.requests_per_minute is None:
        return None
    with _limiters_lock:
        limiter = _limiters.get(config.provider)
        if limiter is None or limiter.interval != 60.0 / config.requests_per_minute:
            limiter = _limiters[config.provider] = RateLimiter(config.requests_per_minute)
        return limiter


def _log_retry(retry_state):
    logger.warning(
        "Completion attempt {} failed ({}), retrying in {:.1f} s",
        retry_state.attempt_number,
        retry_state.outcome.exception(),
        retry_state.next_action.sleep,
    )


class Gateway:
    """Answers message scripts according to a :class:`ProviderConfig`.

    Args:
        config (ProviderConfig): provider settings
        client (optional): OpenAI-compatible client to use instead of
            building one from the environment
        environ (Optional[Mapping[str, str]], optional): where API keys are
            looked up. Defaults to os.environ.
        sleep (Optional[Callable[[float], None]], optional): sleep used
            between retries. Defaults to tenacity's.
    """

    def __init__(
        self,
        config: ProviderConfig,
        client=None,
        environ: Optional[Mapping[str, str]] = None,
        sleep: Optional[Callable[[float], None]] = None,
    ):
        self.config = config
        self._client = client
        self._environ = environ
        self._sleep = sleep
        self._client_lock = threading.Lock()

        self._replay = None
        self._identity = (config.provider, config.model)
        if config.provider == "replay":
            self._replay = TranscriptStore(config.replay_dir)
            self._identity = self._replay.read_manifest() or self._identity

        self._responder = None
        if config.provider == "scripted":
            self._responder = ScriptedResponder(config.plan or config.model)

        self._recorder = None
        if config.record_dir is not None and config.provider != "replay":
            self._recorder = TranscriptStore(config.record_dir, overwrite=config.overwrite)
            self._recorder.write_manifest(*self._identity)

    @property
    def identity(self) -> Tuple[str, str]:
        """(provider, model) that request digests are computed with"""
        return self._identity

    def digest(self, script: MessageScript, sample: int = 0) -> str:
        return digest(script, *self._identity, sample=sample)

    def complete(self, script: MessageScript, tag: Optional[RequestTag] = None, sample: int = 0) -> str:
        """Response text for a message script.

        Args:
            script (MessageScript): messages to send
            tag (Optional[RequestTag], optional): case and stage of the
                request, needed by the scripted provider. Defaults to None.
            sample (int, optional): index of an independent repeat of the
                same prompt. Defaults to 0.

        Raises:
            ReplayMissError: replay set has no transcript for the request
            AuthError: API key variable unset or key rejected
            GatewayTimeoutError: every attempt timed out
            RateLimitError: still rate limited after the retry budget
            GatewayError: any other provider failure

        Returns:
            str: raw response text
        """
        key = self.digest(script, sample)
        if self._replay is not None:
            logger.debug("Replaying {}", key)
            return self._replay.load(key).response

        if self._responder is not None:
            if tag is None:
                raise ValueError("The scripted provider needs a request tag")
            response = self._responder.respond(tag, sample)
        else:
            response = self._complete_live(script)

        if self._recorder is not None:
            self._recorder.store(Transcript.create(script, *self._identity, response=response, sample=sample))
        return response

    def _live_client(self):
        with self._client_lock:
            if self._client is None:
                api_key = self.config.api_key(self._environ)
                if not api_key:
                    raise AuthError(f"Set {self.config.key_variable} to use the {self.config.provider} provider")
                self._client = openai.OpenAI(
                    api_key=api_key,
                    base_url=self.config.base_url,
                    timeout=self.config.timeout,
                    max_retries=0,
                )
            return self._client

    def _request(self, client, script: MessageScript) -> str:
        limiter = rate_limiter_for(self.config)
        if limiter is not None:
            limiter.acquire()
        response = client.chat.completions.create(
            model=self.config.model,
            messages=script.to_dicts(),
            temperature=self.config.temperature,
            max_tokens=self.config.max_tokens,
        )
        return response.choices[0].message.content or ""

    def _complete_live(self, script: MessageScript) -> str:
        client = self._live_client()
        options = dict(
            stop=stop_after_attempt(self.config.retries),
            wait=wait_exponential(multiplier=1, exp_base=2, min=1),
            retry=retry_if_exception_type(RETRYABLE),
            before_sleep=_log_retry,
            reraise=True,
        )
        if self._sleep is not None:
            options["sleep"] = self._sleep
        try:
            return Retrying(**options)(self._request, client, script)
        except openai.AuthenticationError as e:
            raise AuthError(f"{self.config.provider} rejected the key in {self.config.key_variable}: {e}") from e
        except openai.APITimeoutError as e:
            raise GatewayTimeoutError(
                f"{self.config.label} timed out after {self.config.retries} attempts"
            ) from e
        except openai.RateLimitError as e:
            raise RateLimitError(
                f"{self.config.label} still rate limited after {self.config.retries} attempts"
            ) from e
        except openai.OpenAIError as e:
            raise GatewayError(f"{self.config.label} request failed: {e}") from e


def complete(
    script: MessageScript,
    config: ProviderConfig,
    tag: Optional[RequestTag] = None,
    sample: int = 0,
) -> str:
    """One-off completion through a fresh :class:`Gateway`"""
    return Gateway(config).complete(script, tag=tag, sample=sample)
