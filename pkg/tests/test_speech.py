import threading

import pytest

from voicepilot.config import load_config
from voicepilot.errors import CaptureTimeout, StreamClosed, UnrecognizedAudio
from voicepilot.speech import (
    AudioChunk,
    InputStream,
    MockTranscriber,
    PushToTalk,
    TextInjection,
    Utterance,
    capture_utterance,
    detect_wake,
    fingerprint,
    load_corpus,
    make_wake_backend,
    normalize_text,
    transcribe,
)


def closed_stream(*items) -> InputStream:
    stream = InputStream()
    for item in items:
        stream.push(item)
    stream.close()
    return stream


def test_normalize_text_strips_punctuation_and_case():
    assert normalize_text("  Hey, Obi!  ") == "hey obi"
    assert normalize_text("STOP.") == "stop"
    assert normalize_text("") == ""


def test_keyword_wake_exact_phrase():
    stream = closed_stream(TextInjection("ignore me"), TextInjection("Hey Obi", t_ms=120))
    wake = detect_wake(stream, make_wake_backend("keyword", "hey obi"))
    assert wake.timestamp_ms == 120
    assert wake.source == "text_injection"


def test_keyword_wake_pushes_remainder_back():
    stream = closed_stream(TextInjection("hey obi feed me a bite of bowl 1", t_ms=5))
    backend = make_wake_backend("keyword", "hey obi")
    detect_wake(stream, backend)
    utterance = capture_utterance(stream)
    assert utterance.text_hint == "feed me a bite of bowl 1"


def test_keyword_wake_requires_word_boundary():
    stream = closed_stream(TextInjection("hey obiwan"), TextInjection("hey obi"))
    wake = detect_wake(stream, make_wake_backend("keyword", "hey obi"))
    assert wake is not None
    # the non-matching "hey obiwan" was consumed, not treated as a wake
    with pytest.raises(StreamClosed):
        stream.next_item()


def test_push_to_talk_wake():
    stream = closed_stream(PushToTalk(t_ms=30), TextInjection("scoop from bowl 2"))
    wake = detect_wake(stream, make_wake_backend("push_to_talk"))
    assert wake.source == "push_to_talk"
    assert capture_utterance(stream).text_hint == "scoop from bowl 2"


def test_detect_wake_raises_when_stream_ends():
    with pytest.raises(StreamClosed):
        detect_wake(closed_stream(), make_wake_backend("keyword"))


def test_capture_text_passthrough():
    utterance = capture_utterance(closed_stream(TextInjection("stop")))
    assert utterance.text_hint == "stop"
    assert utterance.audio is None


def test_capture_empty_text_is_timeout():
    with pytest.raises(CaptureTimeout):
        capture_utterance(closed_stream(TextInjection("   ")))


def test_capture_accumulates_audio_until_silence_gap():
    stream = closed_stream(
        AudioChunk(b"aa", t_ms=0),
        AudioChunk(b"bb", t_ms=400),
        AudioChunk(b"cc", t_ms=800),
        AudioChunk(b"dd", t_ms=5000),  # beyond the 1.5 s silence cutoff
    )
    utterance = capture_utterance(stream, silence_cutoff_s=1.5)
    assert utterance.audio == b"aabbcc"
    assert utterance.duration_ms == 800
    # the post-gap chunk stays queued for the next capture
    assert stream.next_item() == AudioChunk(b"dd", t_ms=5000)


def test_capture_overflow_truncate_keeps_rest():
    stream = closed_stream(
        AudioChunk(b"aa", t_ms=0),
        AudioChunk(b"bb", t_ms=1000),
        AudioChunk(b"cc", t_ms=2500),
    )
    utterance = capture_utterance(stream, max_utterance_s=2.0, overflow="truncate")
    assert utterance.audio == b"aabb"
    assert stream.next_item() == AudioChunk(b"cc", t_ms=2500)


def test_capture_overflow_timeout_raises():
    stream = closed_stream(
        AudioChunk(b"aa", t_ms=0),
        AudioChunk(b"bb", t_ms=1000),
        AudioChunk(b"cc", t_ms=2500),
    )
    with pytest.raises(CaptureTimeout):
        capture_utterance(stream, max_utterance_s=2.0, overflow="timeout")


def test_capture_nothing_pending():
    with pytest.raises(CaptureTimeout):
        capture_utterance(closed_stream())


def test_stream_timeout_returns_none():
    stream = InputStream()
    assert stream.next_item(timeout_ms=10) is None
    stream.close()


def test_stream_unblocks_on_push_from_other_thread():
    stream = InputStream()
    result = []

    def consumer():
        result.append(stream.next_item(timeout_ms=2000))

    thread = threading.Thread(target=consumer)
    thread.start()
    stream.push(TextInjection("hello"))
    thread.join(timeout=2)
    assert result == [TextInjection("hello")]


def test_utterance_requires_exactly_one_payload():
    with pytest.raises(ValueError):
        Utterance(audio=b"x", text_hint="x")
    with pytest.raises(ValueError):
        Utterance()


def test_fingerprint_stable():
    assert fingerprint(b"sample:stop") == fingerprint(b"sample:stop")
    assert fingerprint(b"sample:stop") != fingerprint(b"sample:pause")
    assert len(fingerprint(b"")) == 16


def test_mock_transcriber_corpus_roundtrip():
    config = load_config(None)
    corpus = load_corpus(config.resolve(config.speech.mock_corpus))
    backend = MockTranscriber(corpus)
    transcript = transcribe(Utterance(audio=b"sample:stop"), backend)
    assert transcript.text == "stop"
    assert transcript.backend_id == "mock"


def test_mock_transcriber_miss_is_unrecognized():
    backend = MockTranscriber({})
    with pytest.raises(UnrecognizedAudio):
        transcribe(Utterance(audio=b"static noise"), backend)


def test_text_hint_bypasses_backend():
    transcript = transcribe(Utterance(text_hint="pause"), backend=None)
    assert transcript.text == "pause"
    assert transcript.backend_id == "injection"
