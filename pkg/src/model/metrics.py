"""Per-step metrics and replication results."""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

# (k, entity id, kind, e, n, u)
TrajectoryRow = Tuple[int, int, str, float, float, float]


@dataclass
class StepMetrics:
    """What one step of the simulation recorded.

    ``min_distances`` holds, per target, the distance to the closest
    agent after everyone moved. ``agent_times`` is the wall-clock time of
    each agent's INFER and DECIDE work. ``true_loss`` is the loss the
    executed actions achieved, None when no agent tracks anything yet.
    ``estimated_losses`` is each agent's own estimate of the loss of the
    action it chose.
    """

    k: int
    min_distances: Dict[int, float] = field(default_factory=dict)
    agent_times: Dict[int, float] = field(default_factory=dict)
    true_loss: Optional[float] = None
    estimated_losses: Dict[int, float] = field(default_factory=dict)


@dataclass
class ReplicationResult:
    """Outcome of one simulated run."""

    seed: int
    steps: List[StepMetrics]
    total_time: float
    trajectories: List[TrajectoryRow] = field(default_factory=list)
    processing_status: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_steps(self) -> int:
        return len(self.steps)

    def min_distance_matrix(self) -> np.ndarray:
        """Array of shape (n_steps, n_targets), targets in id order."""
        if not self.steps or not self.steps[0].min_distances:
            return np.zeros((len(self.steps), 0))
        targets = sorted(self.steps[0].min_distances)
        return np.array([[s.min_distances[t] for t in targets] for s in self.steps])

    def mean_apt(self) -> float:
        """Per-agent per-step processing time, averaged over the run."""
        times = [t for s in self.steps for t in s.agent_times.values()]
        return float(np.mean(times)) if times else 0.0

    def mean_true_loss(self) -> Optional[float]:
        """True loss averaged over the steps that have one."""
        values = [s.true_loss for s in self.steps if s.true_loss is not None]
        return float(np.mean(values)) if values else None

    def mean_estimated_loss(self) -> Optional[float]:
        """Agents' estimated loss of their chosen actions, averaged over agents and steps."""
        values = [v for s in self.steps for v in s.estimated_losses.values()]
        return float(np.mean(values)) if values else None
