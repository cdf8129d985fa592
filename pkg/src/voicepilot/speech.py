"""Speech frontend: input streams, wake detection, capture, transcription.

The frontend never does DSP; audio is opaque bytes. Three wake backends ship:
keyword match on injected text, push-to-talk, and always-on (tests). The
transcriber is either a deterministic fingerprint table (mock) or an HTTP
endpoint (remote).
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import requests

from .errors import (
    BackendUnavailable,
    CaptureTimeout,
    ConfigError,
    StreamClosed,
    UnrecognizedAudio,
)

logger = logging.getLogger(__name__)

WAKE_SOURCE_KEYWORD = "keyword"
WAKE_SOURCE_PTT = "push_to_talk"
WAKE_SOURCE_TEXT = "text_injection"

STT_URL_ENV = "VP_STT_URL"
STT_TOKEN_ENV = "VP_STT_TOKEN"


@dataclass(frozen=True)
class TextInjection:
    text: str
    t_ms: int = 0


@dataclass(frozen=True)
class PushToTalk:
    t_ms: int = 0


@dataclass(frozen=True)
class AudioChunk:
    data: bytes
    t_ms: int = 0


InputItem = TextInjection | PushToTalk | AudioChunk


@dataclass(frozen=True)
class WakeEvent:
    timestamp_ms: int
    source: str


@dataclass(frozen=True)
class Utterance:
    """Either opaque audio or injected text, never both."""

    audio: bytes | None = None
    text_hint: str | None = None
    duration_ms: int = 0

    def __post_init__(self) -> None:
        if (self.audio is None) == (self.text_hint is None):
            raise ValueError("exactly one of audio/text_hint must be present")
        if self.duration_ms < 0:
            raise ValueError("duration_ms must be >= 0")


@dataclass(frozen=True)
class Transcript:
    text: str
    confidence: float
    backend_id: str


class InputStream:
    """Thread-safe FIFO of input items; close() ends it."""

    def __init__(self) -> None:
        self._items: deque[InputItem] = deque()
        self._cond = threading.Condition()
        self._closed = False

    def push(self, item: InputItem) -> None:
        with self._cond:
            if self._closed:
                raise StreamClosed("stream already closed")
            self._items.append(item)
            self._cond.notify_all()

    def push_front(self, item: InputItem) -> None:
        with self._cond:
            self._items.appendleft(item)
            self._cond.notify_all()

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify_all()

    def next_item(self, timeout_ms: int | None = None) -> InputItem | None:
        """Pop the next item; None on timeout; StreamClosed when drained.

        timeout_ms=None blocks until an item arrives or the stream closes.
        """
        deadline = None
        with self._cond:
            while True:
                if self._items:
                    return self._items.popleft()
                if self._closed:
                    raise StreamClosed("input stream ended")
                if timeout_ms is not None:
                    if deadline is None:
                        deadline = time.monotonic() + timeout_ms / 1000.0
                    remaining = deadline - time.monotonic()
                    if remaining <= 0:
                        return None
                    self._cond.wait(remaining)
                else:
                    self._cond.wait()


def normalize_text(text: str) -> str:
    """Lowercase and strip punctuation for keyword comparisons."""
    cleaned = "".join(c if c.isalnum() or c.isspace() else " " for c in text.lower())
    return " ".join(cleaned.split())


class KeywordWake:
    """Wakes on injected text that starts with the wake phrase.

    Any text after the phrase is pushed back so capture picks it up as the
    command ("hey obi feed me" wakes and leaves "feed me" pending).
    """

    def __init__(self, phrase: str = "hey obi") -> None:
        self.phrase = normalize_text(phrase)
        if not self.phrase:
            raise ConfigError("wake phrase must be non-empty")

    def check(self, item: InputItem, stream: InputStream) -> WakeEvent | None:
        if not isinstance(item, TextInjection):
            return None
        text = normalize_text(item.text)
        if text == self.phrase:
            return WakeEvent(timestamp_ms=item.t_ms, source=WAKE_SOURCE_TEXT)
        if text.startswith(self.phrase + " "):
            remainder = text[len(self.phrase) :].strip()
            stream.push_front(TextInjection(text=remainder, t_ms=item.t_ms))
            return WakeEvent(timestamp_ms=item.t_ms, source=WAKE_SOURCE_TEXT)
        return None


class PushToTalkWake:
    def check(self, item: InputItem, stream: InputStream) -> WakeEvent | None:
        if isinstance(item, PushToTalk):
            return WakeEvent(timestamp_ms=item.t_ms, source=WAKE_SOURCE_PTT)
        return None


class AlwaysOnWake:
    """Wakes on any pending item without consuming it (test/interrupt use)."""

    def check(self, item: InputItem, stream: InputStream) -> WakeEvent | None:
        stream.push_front(item)
        return WakeEvent(timestamp_ms=item.t_ms, source=WAKE_SOURCE_KEYWORD)


def make_wake_backend(kind: str, phrase: str = "hey obi"):
    if kind == "keyword":
        return KeywordWake(phrase)
    if kind == "push_to_talk":
        return PushToTalkWake()
    if kind == "always_on":
        return AlwaysOnWake()
    raise ConfigError(f"unknown wake backend {kind!r}")


def detect_wake(stream: InputStream, backend) -> WakeEvent:
    """Block until the backend triggers; StreamClosed if input ends first."""
    while True:
        item = stream.next_item()
        event = backend.check(item, stream)
        if event is not None:
            return event


def capture_utterance(
    stream: InputStream,
    max_utterance_s: float = 15.0,
    silence_cutoff_s: float = 1.5,
    overflow: str = "truncate",
) -> Utterance:
    """Collect one utterance after a wake.

    Text injections pass through unchanged (empty text is a timeout). Audio
    chunks are accumulated until a timestamp gap exceeds the silence cutoff
    or the window fills; past the window the configured overflow mode either
    truncates or raises CaptureTimeout.
    """
    max_ms = int(max_utterance_s * 1000)
    silence_ms = int(silence_cutoff_s * 1000)

    try:
        first = stream.next_item(timeout_ms=max_ms)
    except StreamClosed:
        raise CaptureTimeout("input ended before any utterance") from None
    if first is None:
        raise CaptureTimeout(f"no utterance within {max_utterance_s:.1f} s")

    if isinstance(first, TextInjection):
        if not first.text.strip():
            raise CaptureTimeout("empty injected text")
        return Utterance(text_hint=first.text, duration_ms=0)

    if isinstance(first, PushToTalk):
        # A stray press inside the capture window carries no content.
        return capture_utterance(stream, max_utterance_s, silence_cutoff_s, overflow)

    chunks = [first]
    start = first.t_ms
    last = first.t_ms
    truncated = False
    while True:
        try:
            item = stream.next_item(timeout_ms=silence_ms)
        except StreamClosed:
            break
        if item is None:
            break
        if not isinstance(item, AudioChunk):
            stream.push_front(item)
            break
        if item.t_ms - last > silence_ms:
            stream.push_front(item)
            break
        if item.t_ms - start > max_ms:
            if overflow == "timeout":
                raise CaptureTimeout(
                    f"utterance exceeded {max_utterance_s:.1f} s window"
                )
            stream.push_front(item)
            truncated = True
            break
        chunks.append(item)
        last = item.t_ms

    if truncated:
        logger.warning("utterance truncated at %d ms", max_ms)
    data = b"".join(c.data for c in chunks)
    return Utterance(audio=data, duration_ms=max(last - start, 0))


def fingerprint(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()[:16]


def load_corpus(path: str | Path) -> dict[str, str]:
    """Load the mock transcription table (fingerprint -> transcript)."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load STT corpus {path}: {exc}") from exc
    entries = raw.get("entries")
    if not isinstance(entries, dict):
        raise ConfigError(f"STT corpus {path} has no 'entries' table")
    return {str(k): str(v) for k, v in entries.items()}


class MockTranscriber:
    """Bit-deterministic transcription from a fingerprint table."""

    backend_id = "mock"

    def __init__(self, corpus: dict[str, str]) -> None:
        self.corpus = dict(corpus)

    def transcribe_audio(self, data: bytes) -> tuple[str, float]:
        text = self.corpus.get(fingerprint(data), "")
        return text, 1.0


class RemoteTranscriber:
    """HTTP transcription: POST the opaque payload, expect {"text": ...}."""

    backend_id = "remote"

    def __init__(
        self,
        url: str | None = None,
        token: str | None = None,
        timeout_s: float = 30.0,
        session: requests.Session | None = None,
    ) -> None:
        self.url = url or os.environ.get(STT_URL_ENV, "")
        self.token = token if token is not None else os.environ.get(STT_TOKEN_ENV, "")
        if not self.url:
            raise ConfigError(f"remote transcriber needs {STT_URL_ENV}")
        self.timeout_s = timeout_s
        self._session = session or requests.Session()

    def transcribe_audio(self, data: bytes) -> tuple[str, float]:
        headers = {"Content-Type": "application/octet-stream"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        try:
            resp = self._session.post(
                self.url, data=data, headers=headers, timeout=self.timeout_s
            )
            resp.raise_for_status()
            payload = resp.json()
        except (requests.RequestException, ValueError) as exc:
            raise BackendUnavailable(f"transcription endpoint failed: {exc}") from exc
        text = payload.get("text", "")
        confidence = float(payload.get("confidence", 1.0))
        return str(text), confidence


def transcribe(utterance: Utterance, backend) -> Transcript:
    """Turn an utterance into text; text injections bypass the backend."""
    if utterance.text_hint is not None:
        return Transcript(text=utterance.text_hint, confidence=1.0, backend_id="injection")
    text, confidence = backend.transcribe_audio(utterance.audio)
    if not text.strip():
        raise UnrecognizedAudio("backend produced an empty transcript")
    return Transcript(text=text, confidence=confidence, backend_id=backend.backend_id)
