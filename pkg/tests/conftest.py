from __future__ import annotations

import dataclasses

import pytest

from voicepilot.clock import VirtualClock
from voicepilot.config import SegmentLengths, load_config
from voicepilot.events import ANNOUNCE
from voicepilot.session import Session


@pytest.fixture(scope="session")
def config():
    return load_config(None)


@pytest.fixture()
def vclock():
    return VirtualClock()


@pytest.fixture()
def make_session(config):
    """Factory for mock-backed sessions on a fresh virtual clock."""

    def factory(cfg=None, **overrides):
        cfg = cfg or config
        if overrides:
            cfg = dataclasses.replace(cfg, **overrides)
        session = Session(cfg, VirtualClock())
        outbound: list[dict] = []
        session.add_sink(outbound.append)
        return session, outbound

    return factory


@pytest.fixture(scope="session")
def fast_config(config):
    """Short segments so wall-clock service tests finish in tens of ms."""
    engine = dataclasses.replace(
        config.engine,
        tick_ms=5,
        segments=SegmentLengths(
            travel=0.002, scoop_dip=0.001, scrape_pass=0.001, present_at_mouth=0.001
        ),
    )
    pause = dataclasses.replace(config.pause, inter_bite_delay_s=0.01)
    return dataclasses.replace(config, engine=engine, pause=pause)


def announce_texts(events) -> list[str]:
    return [e.detail for e in events if e.kind == ANNOUNCE]
