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

import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Optional

PROVIDERS = ("openai", "gemini", "groq", "replay", "scripted")
LIVE_PROVIDERS = ("openai", "gemini", "groq")

ENDPOINTS = {
    "openai": None,
    "gemini": "https://generativelanguage.googleapis.com/v1beta/openai/",
    "groq": "https://api.groq.com/openai/v1",
}
KEY_VARIABLES = {
    "openai": "OPENAI_API_KEY",
    "gemini": "GEMINI_API_KEY",
    "groq": "GROQ_API_KEY",
}
DEFAULT_MODELS = {
    "openai": "gpt-4o-2024-08-06",
    "gemini": "gemini-1.5-pro",
    "groq": "llama-3.3-70b-versatile",
    "scripted": "golden",
}


@dataclass(frozen=True)
class ProviderConfig:
    """Where and how chat completions are requested.

    ``replay`` answers from a transcript directory and ``scripted`` from a
    bundled answer plan; neither touches the network, so the network fields
    are ignored for them.

    Args:
        provider (str): one of ``PROVIDERS``
        model (str): model name, part of every request digest
        temperature (float, optional): sampling temperature. Defaults to 0.
        max_tokens (int, optional): output token cap. Defaults to 4096.
        timeout (float, optional): seconds per request. Defaults to 120.
        retries (int, optional): attempts per request including the first.
            Defaults to 4.
        requests_per_minute (Optional[float], optional): per-provider request
            rate cap. Defaults to None (unlimited).
        replay_dir (Optional[Path], optional): transcript set answered by the
            replay provider
        record_dir (Optional[Path], optional): directory live and scripted
            responses are recorded into
        plan (Optional[str], optional): answer plan of the scripted provider,
            a bundled name or a JSON path. Defaults to the model name.
        overwrite (bool, optional): replace transcripts already recorded.
            Defaults to False.
    """
    provider: str
    model: str
    temperature: float = 0.0
    max_tokens: int = 4096
    timeout: float = 120.0
    retries: int = 4
    requests_per_minute: Optional[float] = None
    replay_dir: Optional[Path] = None
    record_dir: Optional[Path] = None
    plan: Optional[str] = None
    overwrite: bool = False

    def __post_init__(self):
        if self.provider not in PROVIDERS:
            raise ValueError(f"provider must be one of {PROVIDERS}, got {self.provider!r}")
        if not self.model:
            raise ValueError("model must be a non-empty name")
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if self.max_tokens < 1:
            raise ValueError(f"max_tokens must be >= 1, got {self.max_tokens}")
        if self.timeout <= 0:
            raise ValueError(f"timeout must be > 0, got {self.timeout}")
        if self.retries < 1:
            raise ValueError(f"retries must be >= 1, got {self.retries}")
        if self.requests_per_minute is not None and self.requests_per_minute <= 0:
            raise ValueError(f"requests_per_minute must be > 0, got {self.requests_per_minute}")
        if self.provider == "replay" and self.replay_dir is None:
            raise ValueError("The replay provider needs a replay_dir")
        for name in ("replay_dir", "record_dir"):
            value = getattr(self, name)
            if value is not None and not isinstance(value, Path):
                object.__setattr__(self, name, Path(value))

    @property
    def is_live(self) -> bool:
        return self.provider in LIVE_PROVIDERS

    @property
    def base_url(self) -> Optional[str]:
        return ENDPOINTS.get(self.provider)

    @property
    def key_variable(self) -> Optional[str]:
        return KEY_VARIABLES.get(self.provider)

    @property
    def label(self) -> str:
        return f"{self.provider}/{self.model}"

    def slug(self) -> str:
        """Label usable as a directory name"""
        return "".join(c if c.isalnum() or c in "-_." else "_" for c in f"{self.provider}_{self.model}")

    def api_key(self, environ: Optional[Mapping[str, str]] = None) -> Optional[str]:
        environ = os.environ if environ is None else environ
        return environ.get(self.key_variable) if self.key_variable else None

    def with_overrides(self, **changes) -> "ProviderConfig":
        """Copy with the given non-None fields replaced"""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    @classmethod
    def from_env(cls, environ: Optional[Mapping[str, str]] = None, **overrides) -> "ProviderConfig":
        """Builds a config from ``SAWP_PROVIDER``, ``SAWP_MODEL``,
        ``SAWP_TEMPERATURE`` and ``SAWP_RPM``; keyword overrides that are not
        None take precedence.

        Raises:
            ValueError: unknown provider or out-of-range value
        """
        environ = os.environ if environ is None else environ
        provider = overrides.pop("provider", None) or environ.get("SAWP_PROVIDER", "openai")
        model = overrides.pop("model", None) or environ.get("SAWP_MODEL") or DEFAULT_MODELS.get(provider)
        values = {}
        if "SAWP_TEMPERATURE" in environ:
            values["temperature"] = float(environ["SAWP_TEMPERATURE"])
        if "SAWP_RPM" in environ:
            values["requests_per_minute"] = float(environ["SAWP_RPM"])
        values.update({k: v for k, v in overrides.items() if v is not None})
        if model is None:
            raise ValueError(f"No model given for provider {provider!r}; set SAWP_MODEL or --model")
        return cls(provider=provider, model=model, **values)
