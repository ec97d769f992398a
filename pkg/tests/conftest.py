"""Shared fixtures: deterministic engines on temp directories."""

from __future__ import annotations

import pytest

from pact.engine import Engine

KEY_SEED = b"test-key-seed"
CLOCK_BASE = 1_700_000_000


class TickingClock:
    """Integer clock advancing one second per call; reproducible per instance."""

    def __init__(self, start: int = CLOCK_BASE) -> None:
        self.now = start

    def __call__(self) -> int:
        self.now += 1
        return self.now


def make_engine(path, difficulty: int = 1, miner_count: int = 5, **kwargs) -> Engine:
    kwargs.setdefault("clock", TickingClock())
    kwargs.setdefault("key_seed", KEY_SEED)
    return Engine(path, difficulty=difficulty, miner_count=miner_count, **kwargs)


@pytest.fixture
def engine(tmp_path) -> Engine:
    return make_engine(tmp_path / "data")
