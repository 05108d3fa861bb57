"""Track estimate data model."""

from dataclasses import dataclass
from enum import Enum

import numpy as np


class TrackStage(Enum):
    """Whether an estimate is a one-step prediction or a measurement update."""
    PREDICTED = "k|k-1"
    UPDATED = "k|k"


@dataclass(frozen=True)
class TrackEstimate:
    """State estimate and error covariance of one target held by one agent.

    ``x_hat`` is (E, N, U, E-dot, N-dot, U-dot); ``P`` is its 6x6 error
    covariance.
    """

    x_hat: np.ndarray
    P: np.ndarray
    stage: TrackStage = TrackStage.UPDATED
