"""Shared test fixtures and numerical helpers."""

import json

import numpy as np
import pytest

from src.model.config import ScenarioConfig
from src.model.state import AgentTruth, EnuVector
from src.model.track import TrackEstimate, TrackStage
from src.tracking.ekf2 import MotionModel, NoiseModel

Q_DIAG = [0.03, 0.03, 0.03, 0.01, 0.01, 0.01]


def central_difference(f, x: float, h: float = 1e-6):
    """Central finite difference of a scalar- or array-valued function."""
    return (np.asarray(f(x + h)) - np.asarray(f(x - h))) / (2.0 * h)


def central_gradient(f, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Finite-difference derivative of ``f`` along each coordinate of ``x``.

    Stacks the per-coordinate derivatives along the last axis.
    """
    x = np.asarray(x, dtype=float)
    columns = []
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = h
        columns.append((np.asarray(f(x + step)) - np.asarray(f(x - step))) / (2.0 * h))
    return np.stack(columns, axis=-1)


def random_spd(rng: np.random.Generator, n: int = 6, scale: float = 1.0) -> np.ndarray:
    """Well-conditioned random symmetric positive definite matrix."""
    a = rng.standard_normal((n, n))
    return scale * (a @ a.T / n + np.eye(n))


def random_rel(rng: np.random.Generator, low: float = 1.0, high: float = 8.0) -> np.ndarray:
    """Random relative position clear of the vertical axis."""
    while True:
        rel = rng.uniform(-high, high, size=3)
        horizontal = np.hypot(rel[0], rel[1])
        if low <= np.linalg.norm(rel) and horizontal > 0.3 * np.linalg.norm(rel):
            return rel


def make_track(position, P=None, velocity=(0.0, 0.0, 0.0),
               stage: TrackStage = TrackStage.UPDATED) -> TrackEstimate:
    x_hat = np.concatenate([np.asarray(position, dtype=float), np.asarray(velocity, dtype=float)])
    return TrackEstimate(x_hat=x_hat, P=np.eye(6) if P is None else np.asarray(P, dtype=float),
                         stage=stage)


def make_agent(agent_id: int = 0, pos=(0.0, 0.0, 0.0), gamma: float = 0.0,
               group: int = 0) -> AgentTruth:
    return AgentTruth(agent_id=agent_id, pos=EnuVector(*pos), gamma=gamma, group=group)


@pytest.fixture
def rng():
    """Fixed-seed generator."""
    return np.random.default_rng(1234)


@pytest.fixture
def noise():
    """Default measurement noise, sigma 0.01 on every component."""
    return NoiseModel.from_sigmas(0.01, 0.01, 0.01)


@pytest.fixture
def motion():
    """Default constant-velocity model with dt 0.1."""
    return MotionModel.constant_velocity(0.1, Q_DIAG)


@pytest.fixture
def small_config():
    """Two agents, two targets, a handful of steps."""
    return ScenarioConfig(n_agents=2, n_targets=2, n_steps=6)


@pytest.fixture
def write_config(tmp_path):
    """Factory fixture writing a scenario JSON file.

    Usage:
        def test_something(write_config):
            path = write_config({"n_agents": 3})
    """

    def _write(data, filename="scenario.json"):
        path = tmp_path / filename
        if isinstance(data, str):
            path.write_text(data)
        else:
            path.write_text(json.dumps(data))
        return path

    return _write
