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

"""Digest-keyed transcript store for recording and replaying completions.

A transcript directory holds one ``<digest>.json`` per request plus a
``manifest.json`` naming the provider and model it was recorded with, which
replay needs to recompute digests.

The package ships the set the scripted golden plan records, under
``assets/transcripts/golden``.
"""

import hashlib
import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple, Union

from loguru import logger

from sawpframe.errors import DuplicateDigestError, ReplayMissError
from sawpframe.frame.document import check_schema
from sawpframe.prompts.forge import MessageScript

MANIFEST = "manifest.json"
TRANSCRIPT_DIR = Path(__file__).resolve().parent.parent / "assets" / "transcripts"


def bundled_sets() -> List[str]:
    """Names of the transcript sets shipped with the package"""
    return sorted(p.name for p in TRANSCRIPT_DIR.iterdir() if (p / MANIFEST).is_file())


def resolve_transcript_dir(name: Union[str, Path]) -> Path:
    """A transcript directory, or the bundled set of that name when no such
    directory exists
    """
    path = Path(name)
    if not path.is_dir() and (TRANSCRIPT_DIR / str(name) / MANIFEST).is_file():
        return TRANSCRIPT_DIR / str(name)
    return path


def digest(script: MessageScript, provider: str, model: str, sample: int = 0) -> str:
    """Content hash of a request.

    Covers the provider, the model, the sample index and the messages; no
    recording metadata enters it.

    Args:
        script (MessageScript): messages sent
        provider (str): provider id
        model (str): model name
        sample (int, optional): index of an independent repeat of the same
            prompt. Defaults to 0.

    Returns:
        str: 64 hex digits of SHA-256
    """
    payload = {
        "provider": provider,
        "model": model,
        "sample": int(sample),
        "messages": [[m.role, m.content] for m in script.messages],
    }
    canonical = json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Transcript:
    digest: str
    provider: str
    model: str
    messages: MessageScript
    response: str
    recorded_at: str
    sample: int = 0

    @classmethod
    def create(cls, script: MessageScript, provider: str, model: str, response: str, sample: int = 0) -> "Transcript":
        return cls(
            digest=digest(script, provider, model, sample),
            provider=provider,
            model=model,
            messages=script,
            response=response,
            recorded_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
            sample=sample,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "digest": self.digest,
            "provider": self.provider,
            "model": self.model,
            "sample": self.sample,
            "messages": self.messages.to_dicts(),
            "response": self.response,
            "recorded_at": self.recorded_at,
        }

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "Transcript":
        check_schema(doc, "transcript")
        return cls(
            digest=doc["digest"],
            provider=doc["provider"],
            model=doc["model"],
            messages=MessageScript.from_dicts(doc["messages"]),
            response=doc["response"],
            recorded_at=doc["recorded_at"],
            sample=int(doc.get("sample", 0)),
        )


class TranscriptStore:
    """One JSON file per digest under ``directory``. Writes are serialized
    so concurrent attempts can share a store.
    """

    def __init__(self, directory: Union[str, Path], overwrite: bool = False):
        self.directory = Path(directory)
        self.overwrite = overwrite
        self._lock = threading.Lock()

    def path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def __contains__(self, key: str) -> bool:
        return self.path(key).is_file()

    def digests(self) -> Iterator[str]:
        for path in sorted(self.directory.glob("*.json")):
            if path.name != MANIFEST:
                yield path.stem

    def store(self, transcript: Transcript) -> Path:
        """Persists a transcript.

        Raises:
            SchemaError: the transcript does not follow the transcript schema
            DuplicateDigestError: the digest is already stored and the store
                does not overwrite
        """
        doc = transcript.to_dict()
        check_schema(doc, "transcript")
        path = self.path(transcript.digest)
        with self._lock:
            if path.exists() and not self.overwrite:
                raise DuplicateDigestError(f"Transcript {transcript.digest} already exists in {self.directory}")
            self.directory.mkdir(parents=True, exist_ok=True)
            with open(path, "w", encoding="utf-8", newline="\n") as f:
                json.dump(doc, f, indent=2, ensure_ascii=False)
                f.write("\n")
        logger.debug("Stored transcript {}", transcript.digest)
        return path

    def load(self, key: str) -> Transcript:
        """The transcript recorded for a digest

        Raises:
            ReplayMissError: nothing recorded for the digest
        """
        path = self.path(key)
        if not path.is_file():
            raise ReplayMissError(key, str(self.directory))
        with open(path, "r", encoding="utf-8") as f:
            return Transcript.from_dict(json.load(f))

    def write_manifest(self, provider: str, model: str) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.directory / MANIFEST
        with self._lock, open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump({"provider": provider, "model": model}, f, indent=2)
            f.write("\n")
        return path

    def read_manifest(self) -> Optional[Tuple[str, str]]:
        """(provider, model) the set was recorded with, if it says"""
        path = self.directory / MANIFEST
        if not path.is_file():
            return None
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
        return doc["provider"], doc["model"]


def store_transcript(transcript: Transcript, directory: Union[str, Path], overwrite: bool = False) -> Path:
    return TranscriptStore(directory, overwrite=overwrite).store(transcript)
