"""Ground truth: target motion, agent kinematics, detection and link draws."""

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from src.model.config import ScenarioConfig
from src.model.state import ActionVector, AgentTruth, EnuVector, Measurement, TargetTruth, VectorLike, as_array
from src.tracking import measurement
from src.tracking.ekf2 import NoiseModel
from src.util.error_handling import DegenerateGeometry

TWO_PI = 2.0 * math.pi


@dataclass
class WorldStreams:
    """Independent random streams for one replication.

    Each concern draws from its own stream, so adding draws to one
    (say, more agents deciding) never shifts another (target motion).
    Decision streams are per agent.
    """

    layout: np.random.Generator
    targets: np.random.Generator
    sensing: np.random.Generator
    communication: np.random.Generator
    decisions: List[np.random.Generator]


def spawn_streams(seed: int, n_agents: int = 0) -> WorldStreams:
    """Derive every stream of a replication from one integer seed."""
    root = np.random.SeedSequence(seed)
    layout, targets, sensing, comm, decisions = root.spawn(5)
    return WorldStreams(
        layout=np.random.default_rng(layout),
        targets=np.random.default_rng(targets),
        sensing=np.random.default_rng(sensing),
        communication=np.random.default_rng(comm),
        decisions=[np.random.default_rng(s) for s in decisions.spawn(n_agents)],
    )


def init_scenario(cfg: ScenarioConfig,
                  rng: np.random.Generator) -> Tuple[List[TargetTruth], List[AgentTruth]]:
    """Scatter agents and targets uniformly in the initial cube.

    Agents are placed first, then targets; headings are uniform on the
    circle.
    """
    h = cfg.init_cube_halfwidth
    group_of = cfg.group_of()
    agents = []
    for j in range(cfg.n_agents):
        pos = EnuVector.from_array(rng.uniform(-h, h, size=3))
        gamma = measurement.wrap_angle(float(rng.uniform(0.0, TWO_PI)))
        agents.append(AgentTruth(agent_id=j, pos=pos, gamma=gamma, group=group_of.get(j, 0)))
    targets = [
        TargetTruth(target_id=i, pos=EnuVector.from_array(rng.uniform(-h, h, size=3)))
        for i in range(cfg.n_targets)
    ]
    return targets, agents


def step_target(t: TargetTruth, cfg: ScenarioConfig, rng: np.random.Generator) -> TargetTruth:
    """Random-heading horizontal step of fixed length plus a uniform vertical jitter."""
    heading = float(rng.uniform(0.0, TWO_PI))
    du = float(rng.uniform(-cfg.target_vert_range, cfg.target_vert_range))
    disp = np.array([
        cfg.target_step * math.cos(heading),
        cfg.target_step * math.sin(heading),
        du,
    ])
    return TargetTruth(
        target_id=t.target_id,
        pos=EnuVector.from_array(t.pos.to_array() + disp),
        velocity=EnuVector.from_array(disp / cfg.dt),
    )


def step_agent(a: AgentTruth, action: ActionVector, cfg: ScenarioConfig) -> AgentTruth:
    """Execute an action: move ``agent_speed`` along the heading, set the height."""
    gamma = measurement.wrap_angle(action.gamma)
    pos = EnuVector(
        a.pos.e + cfg.agent_speed * math.cos(gamma),
        a.pos.n + cfg.agent_speed * math.sin(gamma),
        action.y_u,
    )
    return AgentTruth(agent_id=a.agent_id, pos=pos, gamma=gamma, group=a.group)


def _decaying_prob(a: VectorLike, b: VectorLike, divisor: float) -> float:
    d = as_array(a) - as_array(b)
    return math.exp(-float(d @ d) / divisor)


def draw_detection(agent_pos: VectorLike, target_pos: VectorLike, cfg: ScenarioConfig,
                   rng: np.random.Generator) -> bool:
    """Bernoulli detection with probability exp(-d^2 / detect_scale)."""
    return bool(rng.random() < _decaying_prob(agent_pos, target_pos, cfg.detect_scale))


def draw_communication(pos_j: VectorLike, pos_l: VectorLike, divisor: float,
                       rng: np.random.Generator) -> bool:
    """Bernoulli link success with probability exp(-d^2 / divisor)."""
    return bool(rng.random() < _decaying_prob(pos_j, pos_l, divisor))


def draw_measurement(target_pos: VectorLike, agent_pos: VectorLike, noise: NoiseModel,
                     rng: np.random.Generator) -> Optional[Measurement]:
    """Noisy (r, phi, theta) of a detected target.

    Gaussian noise from R is added to the exact measurement; the azimuth
    is wrapped and range and polar angle are clipped to their domains.
    Returns None when agent and target coincide.
    """
    try:
        exact = measurement.measure(target_pos, agent_pos).to_array()
    except DegenerateGeometry:
        return None
    noisy = exact + np.sqrt(np.diag(noise.r_cov)) * rng.standard_normal(3)
    return Measurement(
        r=max(0.0, float(noisy[0])),
        phi=measurement.wrap_angle(float(noisy[1])),
        theta=min(math.pi, max(0.0, float(noisy[2]))),
    )
