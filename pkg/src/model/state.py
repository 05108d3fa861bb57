"""Value types for positions, measurements, truth and actions."""

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np


@dataclass(frozen=True)
class EnuVector:
    """East/North/Up coordinates in generic distance units."""

    e: float
    n: float
    u: float

    def __post_init__(self):
        if not all(math.isfinite(c) for c in (self.e, self.n, self.u)):
            raise ValueError(f"EnuVector components must be finite: {self}")

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "EnuVector":
        """Build from the first three entries of a sequence or array."""
        return cls(float(values[0]), float(values[1]), float(values[2]))

    def to_array(self) -> np.ndarray:
        """Return a fresh ``(3,)`` float array."""
        return np.array([self.e, self.n, self.u], dtype=float)


VectorLike = Union[EnuVector, Sequence[float], np.ndarray]


def as_array(v: VectorLike) -> np.ndarray:
    """Coerce an ``EnuVector`` or any 3+ element sequence to a ``(3,)`` array."""
    if isinstance(v, EnuVector):
        return v.to_array()
    return np.asarray(v, dtype=float)[:3].copy()


@dataclass(frozen=True)
class Measurement:
    """Range, azimuth and polar angle from an agent to a target."""

    r: float
    phi: float
    theta: float

    def to_array(self) -> np.ndarray:
        return np.array([self.r, self.phi, self.theta], dtype=float)


@dataclass(frozen=True)
class ActionVector:
    """One agent's decision: heading (radians) and vertical position."""

    gamma: float
    y_u: float


@dataclass
class TargetTruth:
    """True kinematic state of one target.

    Velocity is the last per-step displacement divided by ``dt``.
    """

    target_id: int
    pos: EnuVector
    velocity: EnuVector = field(default_factory=lambda: EnuVector(0.0, 0.0, 0.0))


@dataclass
class AgentTruth:
    """True agent state: position, heading and group membership."""

    agent_id: int
    pos: EnuVector
    gamma: float
    group: int = 0

    @property
    def y_u(self) -> float:
        return self.pos.u
