"""Simulation orchestration: the per-step agent cycle and replicated runs."""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.model.config import ScenarioConfig
from src.model.metrics import ReplicationResult, StepMetrics, TrajectoryRow
from src.model.state import ActionVector, AgentTruth, TargetTruth
from src.model.track import TrackEstimate, TrackStage
from src.model.view import FisherView, PeerSnapshot
from src.tracking import decision, ekf2, information, world
from src.tracking.ekf2 import MotionModel, NoiseModel
from src.util.error_handling import (
    DegenerateGeometry,
    ErrorHandler,
    NonPositiveDefiniteInformation,
    SingularCovariance,
    SingularInnovation,
)

logger = logging.getLogger(__name__)

MEDIAN_POOLED = "pooled"
MEDIAN_TARGET_MEAN = "target_mean"


@dataclass
class AgentMemory:
    """Everything one agent carries between steps."""

    view: FisherView
    tracks: Dict[int, TrackEstimate] = field(default_factory=dict)
    last_action: Optional[ActionVector] = None


@dataclass
class WorldState:
    """Truth, per-agent memory and random streams of one replication."""

    cfg: ScenarioConfig
    targets: List[TargetTruth]
    agents: List[AgentTruth]
    memories: Dict[int, AgentMemory]
    streams: world.WorldStreams
    k: int = 0
    motion: MotionModel = field(init=False)
    noise: NoiseModel = field(init=False)
    step_cfg: decision.GradientStepConfig = field(init=False)

    def __post_init__(self):
        self.motion = self.cfg.motion_model()
        self.noise = self.cfg.noise_model()
        self.step_cfg = decision.GradientStepConfig.from_scenario(self.cfg)

    @classmethod
    def initialize(cls, cfg: ScenarioConfig, seed: int) -> "WorldState":
        """Lay out a fresh scenario from ``seed``."""
        streams = world.spawn_streams(seed, cfg.n_agents)
        targets, agents = world.init_scenario(cfg, streams.layout)
        memories = {
            a.agent_id: AgentMemory(view=FisherView(agent_id=a.agent_id, group=a.group))
            for a in agents
        }
        return cls(cfg=cfg, targets=targets, agents=agents, memories=memories, streams=streams)

    def trajectory_rows(self, k: int) -> List[TrajectoryRow]:
        rows = [(k, a.agent_id, "agent", a.pos.e, a.pos.n, a.pos.u) for a in self.agents]
        rows.extend((k, t.target_id, "target", t.pos.e, t.pos.n, t.pos.u) for t in self.targets)
        return rows


def _sense(state: WorldState, errors: ErrorHandler) -> Dict[int, Dict[int, np.ndarray]]:
    sensed = {}
    rng = state.streams.sensing
    for agent in state.agents:
        per_target = {}
        for target in state.targets:
            if not world.draw_detection(agent.pos, target.pos, state.cfg, rng):
                continue
            z = world.draw_measurement(target.pos, agent.pos, state.noise, rng)
            if z is None:
                errors.handle_missed_detection(agent.agent_id, target.target_id, state.k,
                                               "agent and target coincide")
                continue
            per_target[target.target_id] = z.to_array()
        sensed[agent.agent_id] = per_target
    return sensed


def _snapshot(agent: AgentTruth, memory: AgentMemory, state: WorldState,
              errors: ErrorHandler) -> PeerSnapshot:
    fims = {}
    for target, est in sorted(memory.tracks.items()):
        try:
            fims[target] = ekf2.fisher_contribution(ekf2.predict(est, state.motion))
        except SingularCovariance as exc:
            errors.handle_singular_covariance(agent.agent_id, target, state.k, str(exc))
    action = memory.last_action or ActionVector(agent.gamma, agent.y_u)
    return PeerSnapshot(
        peer_id=agent.agent_id,
        step=state.k,
        position=agent.pos,
        action=action,
        fims=fims,
        estimates=dict(memory.tracks),
    )


def _communicate(state: WorldState, errors: ErrorHandler) -> None:
    snapshots = {
        a.agent_id: _snapshot(a, state.memories[a.agent_id], state, errors)
        for a in state.agents
    }
    positions = {a.agent_id: a.pos for a in state.agents}
    rng = state.streams.communication
    for group in state.cfg.agent_groups():
        for j in group:
            for l in group:
                if j == l:
                    continue
                success = world.draw_communication(positions[j], positions[l],
                                                   state.cfg.comm_divisor, rng)
                state.memories[l].view.receive(snapshots[j], success)


def _infer(agent: AgentTruth, memory: AgentMemory, measurements: Dict[int, np.ndarray],
           state: WorldState, errors: ErrorHandler) -> Dict[int, TrackEstimate]:
    j = agent.agent_id
    tracks = {}
    for target, est in sorted(memory.tracks.items()):
        pred = ekf2.predict(est, state.motion)
        z = measurements.get(target)
        try:
            tracks[target] = ekf2.update(
                pred, z, agent.pos, state.noise, detected=z is not None,
                order=state.cfg.filter_order,
                on_singular_geometry=partial(errors.handle_singular_geometry, j, target, state.k),
            )
        except SingularInnovation as exc:
            errors.handle_singular_innovation(j, target, state.k, str(exc))
            tracks[target] = replace(pred, stage=TrackStage.UPDATED)
    for target, z in sorted(measurements.items()):
        if target not in tracks:
            tracks[target] = ekf2.initialize_track(z, agent.pos, state.cfg.init_cov_diag)
    return tracks


def _true_loss(state: WorldState, errors: ErrorHandler) -> Optional[float]:
    """Loss the executed actions achieved against the true target positions.

    Pre-action information is every agent's one-step-ahead information;
    the gain is the detection-weighted measurement information from each
    agent's new position at each target's new position.
    """
    pre: Dict[int, np.ndarray] = {}
    for agent in state.agents:
        j = agent.agent_id
        for target, est in sorted(state.memories[j].tracks.items()):
            try:
                fim = ekf2.fisher_contribution(ekf2.predict(est, state.motion))
            except SingularCovariance as exc:
                errors.handle_singular_covariance(j, target, state.k, str(exc))
                continue
            pre[target] = pre.get(target, np.zeros((6, 6))) + fim
    if not pre:
        return None

    targets = {t.target_id: t.pos.to_array() for t in state.targets}
    post: Dict[int, np.ndarray] = {}
    for target, total in pre.items():
        gained = total.copy()
        for agent in state.agents:
            rel = targets[target] - agent.pos.to_array()
            try:
                info = information.measurement_information(rel, state.noise)
            except DegenerateGeometry as exc:
                errors.handle_singular_geometry(agent.agent_id, target, state.k, str(exc))
                continue
            gained = gained + information.predicted_detection_prob(rel, state.cfg.detect_scale) * info
        post[target] = gained

    try:
        return information.true_loss(pre, post)
    except NonPositiveDefiniteInformation as exc:
        logger.warning("Step %d: no true loss: %s", state.k, exc)
        return None


def _min_distances(state: WorldState) -> Dict[int, float]:
    if not state.agents:
        return {}
    agents = np.array([a.pos.to_array() for a in state.agents])
    return {
        t.target_id: float(np.min(np.linalg.norm(agents - t.pos.to_array(), axis=1)))
        for t in state.targets
    }


def run_step(state: WorldState, errors: Optional[ErrorHandler] = None) -> StepMetrics:
    """Advance the world one time step.

    Phases are batched across agents on purpose: every agent senses,
    then all links are drawn and snapshots delivered, then every agent
    runs its filters. Each group then runs the seesaw, all agents move,
    and finally the targets move. Outside the seesaw no agent reads
    another's output from the same phase, so this matches running the
    cycle agent by agent in id order. Sensing and deciding see the truth
    as it stood at the start of the step.

    Numerical trouble is recorded in ``errors`` and degrades the step
    (skipped updates, zero gradients); it never aborts the run.
    """
    errors = errors if errors is not None else ErrorHandler()
    cfg = state.cfg
    k = state.k
    times = {a.agent_id: 0.0 for a in state.agents}

    sensed = _sense(state, errors)
    _communicate(state, errors)

    for agent in state.agents:
        start = time.perf_counter()
        memory = state.memories[agent.agent_id]
        memory.tracks = _infer(agent, memory, sensed[agent.agent_id], state, errors)
        times[agent.agent_id] += time.perf_counter() - start

    def timed_decide(agent_state, *args, **kwargs):
        start = time.perf_counter()
        action = decision.decide(agent_state, *args, **kwargs)
        times[agent_state.agent_id] += time.perf_counter() - start
        return action

    def on_nonfinite(agent_id: int, what: str) -> None:
        errors.handle_nonfinite_gradient(agent_id, k, f"non-finite {what} gradient")

    def on_singular_geometry(agent_id: int, target: int, details: str) -> None:
        errors.handle_singular_geometry(agent_id, target, k, details)

    # later seesaw sweeps overwrite earlier ones
    estimated: Dict[int, float] = {}

    by_id = {a.agent_id: a for a in state.agents}
    actions: Dict[int, ActionVector] = {}
    for group in cfg.agent_groups():
        participants = [
            decision.SeesawParticipant(
                state=by_id[j],
                tracks=state.memories[j].tracks,
                view=state.memories[j].view,
                rng=state.streams.decisions[j],
            )
            for j in group
        ]
        actions.update(decision.seesaw_step(
            participants, state.step_cfg,
            noise=state.noise, motion=state.motion, k=k,
            decide_fn=timed_decide, on_nonfinite=on_nonfinite,
            on_singular_geometry=on_singular_geometry,
            on_estimated_loss=estimated.__setitem__,
        ))

    state.agents = [world.step_agent(a, actions[a.agent_id], cfg) for a in state.agents]
    for a in state.agents:
        state.memories[a.agent_id].last_action = ActionVector(a.gamma, a.y_u)
    state.targets = [world.step_target(t, cfg, state.streams.targets) for t in state.targets]

    metrics = StepMetrics(
        k=k,
        min_distances=_min_distances(state),
        agent_times=times,
        true_loss=_true_loss(state, errors),
        estimated_losses=dict(sorted(estimated.items())),
    )
    state.k += 1
    return metrics


def run_replication(cfg: ScenarioConfig, seed: int, record_raw: bool = False,
                    keep_entries: bool = False) -> ReplicationResult:
    """Run one full simulation from ``seed``.

    Args:
        cfg: Scenario configuration
        seed: Seed of every random stream in this run
        record_raw: Keep a per-step trajectory of every agent and target
        keep_entries: Keep individual degraded-update entries, not only counts

    Returns:
        ReplicationResult with ``cfg.n_steps`` step metrics
    """
    logger.info("Replication seed %d: starting %d steps", seed, cfg.n_steps)
    start = time.perf_counter()
    errors = ErrorHandler(keep_entries=keep_entries)
    state = WorldState.initialize(cfg, seed)
    steps = []
    rows: List[TrajectoryRow] = []
    for _ in range(cfg.n_steps):
        k = state.k
        steps.append(run_step(state, errors))
        if record_raw:
            rows.extend(state.trajectory_rows(k))
    total = time.perf_counter() - start
    logger.info("Replication seed %d: finished in %.3fs", seed, total)
    return ReplicationResult(
        seed=seed,
        steps=steps,
        total_time=total,
        trajectories=rows,
        processing_status=errors.get_processing_summary(),
    )


def _run_task(task) -> ReplicationResult:
    cfg, seed, record_raw = task
    return run_replication(cfg, seed, record_raw)


def run_replications(cfg: ScenarioConfig, n_reps: int, base_seed: int,
                     parallelism: int = 1, log_raw: bool = False) -> List[ReplicationResult]:
    """Run ``n_reps`` independent replications, seeds ``base_seed + r``.

    Results come back in replication order whatever the parallelism.
    Replication 0 always keeps its trajectory; ``log_raw`` keeps all.

    Raises:
        ValueError: If n_reps or parallelism is below 1
    """
    if n_reps < 1:
        raise ValueError(f"n_reps must be at least 1, got {n_reps}")
    if parallelism < 1:
        raise ValueError(f"parallelism must be at least 1, got {parallelism}")
    tasks = [(cfg, base_seed + r, log_raw or r == 0) for r in range(n_reps)]
    if parallelism == 1 or n_reps == 1:
        return [_run_task(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=min(parallelism, n_reps)) as pool:
        return list(pool.map(_run_task, tasks))


def median_min_distance(results: Sequence[ReplicationResult],
                        pooling: str = MEDIAN_POOLED) -> np.ndarray:
    """Median closest-agent distance per step, m_k.

    ``pooled`` takes the median over every (replication, target) pair;
    ``target_mean`` averages over targets first, then takes the median
    over replications. Steps without any distance give NaN.

    Raises:
        ValueError: If ``results`` is empty or runs differ in length
    """
    if not results:
        raise ValueError("median_min_distance needs at least one replication")
    lengths = {r.n_steps for r in results}
    if len(lengths) != 1:
        raise ValueError(f"Replications differ in length: {sorted(lengths)}")
    n_steps = lengths.pop()
    matrices = [r.min_distance_matrix() for r in results]
    if any(m.shape[1] == 0 for m in matrices):
        return np.full(n_steps, np.nan)
    if pooling == MEDIAN_POOLED:
        return np.median(np.hstack(matrices), axis=1)
    if pooling == MEDIAN_TARGET_MEAN:
        return np.median(np.column_stack([m.mean(axis=1) for m in matrices]), axis=1)
    raise ValueError(f"Unknown median pooling: {pooling}")
