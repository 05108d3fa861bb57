"""The DECIDE step: stochastic-gradient action updates and the seesaw.

An agent's action is a heading ``gamma`` and a vertical position
``y_u``. Only the agent's own measurement term of the predicted
post-action information depends on its action, so the gradients below
differentiate that single term. Its Jacobian moves with the agent
position, and since ``rel = target - agent`` the derivative of the
Jacobian is the measurement Hessian contracted with ``-d(agent)``.
"""

import logging
import math
from dataclasses import dataclass, replace
from functools import partial
from typing import Callable, Dict, Mapping, Optional, Sequence

import numpy as np
import scipy.linalg

from src.model.state import ActionVector, AgentTruth, EnuVector, VectorLike, as_array
from src.model.track import TrackEstimate
from src.model.view import FisherView, PeerPrediction, PeerSnapshot
from src.tracking import ekf2, information, measurement
from src.tracking.ekf2 import MotionModel, NoiseModel
from src.util.error_handling import (
    DegenerateGeometry,
    NonPositiveDefiniteInformation,
    SingularCovariance,
)

logger = logging.getLogger(__name__)

GRADIENT_LOG_DET = "log_det"
GRADIENT_DET = "det"


@dataclass(frozen=True)
class GradientStepConfig:
    """Step sizes and geometry constants for the action update."""

    a_k: float = 1.0
    b_k: float = 0.1
    seesaw_iters: int = 2
    agent_speed: float = 1.0
    detect_scale: float = 100.0
    gradient_form: str = GRADIENT_LOG_DET
    peer_terms: str = information.PEER_TERMS_COMMUNICATED
    gain_decay: float = 0.0

    def __post_init__(self):
        if self.a_k <= 0 or self.b_k <= 0:
            raise ValueError("a_k and b_k must be positive")
        if self.seesaw_iters < 1:
            raise ValueError("seesaw_iters must be at least 1")
        if self.gradient_form not in (GRADIENT_LOG_DET, GRADIENT_DET):
            raise ValueError(f"Unknown gradient_form: {self.gradient_form}")

    @classmethod
    def from_scenario(cls, cfg) -> "GradientStepConfig":
        """Pull the decision parameters out of a ``ScenarioConfig``."""
        return cls(
            a_k=cfg.a_k,
            b_k=cfg.b_k,
            seesaw_iters=cfg.seesaw_iters,
            agent_speed=cfg.agent_speed,
            detect_scale=cfg.detect_scale,
            gradient_form=cfg.gradient_form,
            peer_terms=cfg.peer_terms,
            gain_decay=cfg.gain_decay,
        )

    def gains(self, k: int) -> tuple:
        """Heading and vertical step sizes at time step ``k``."""
        scale = (k + 1) ** -self.gain_decay if self.gain_decay else 1.0
        return self.a_k * scale, self.b_k * scale


@dataclass(frozen=True)
class LossContext:
    """Everything held fixed while one agent evaluates its loss."""

    view: FisherView
    own_state: AgentTruth
    predicted_peers: Mapping[int, PeerPrediction]
    sim_states: Mapping[int, np.ndarray]
    totals_preaction: Mapping[int, np.ndarray]
    noise: NoiseModel
    cfg: GradientStepConfig
    on_singular_geometry: Optional[information.GeometryCallback] = None

    def fhat(self, action: ActionVector, target: int) -> np.ndarray:
        return information.predicted_postaction_fim(
            self.view, target, action, self.own_state, self.predicted_peers,
            self.sim_states, self.noise,
            detect_scale=self.cfg.detect_scale,
            agent_speed=self.cfg.agent_speed,
            peer_terms=self.cfg.peer_terms,
            on_singular_geometry=self.on_singular_geometry,
        )

    def loss(self, action: ActionVector) -> float:
        return information.estimated_loss(
            self.view, action, self.own_state, self.predicted_peers, self.sim_states,
            self.noise, self.totals_preaction,
            detect_scale=self.cfg.detect_scale,
            agent_speed=self.cfg.agent_speed,
            peer_terms=self.cfg.peer_terms,
            on_singular_geometry=self.on_singular_geometry,
        )

    @property
    def targets(self):
        return sorted(self.totals_preaction)


# -- derivative building blocks ------------------------------------------------

def d_position_d_gamma(gamma: float, agent_speed: float = 1.0) -> np.ndarray:
    """Derivative of the post-action position with respect to heading."""
    return np.array([-agent_speed * math.sin(gamma), agent_speed * math.cos(gamma), 0.0])


def d_position_d_yu() -> np.ndarray:
    """Derivative of the post-action position with respect to vertical position."""
    return np.array([0.0, 0.0, 1.0])


def d_range_d_gamma(rel: VectorLike, gamma: float, agent_speed: float = 1.0) -> float:
    """Rate of change of the predicted range as the heading turns."""
    d = as_array(rel)
    r = math.sqrt(float(d @ d))
    return agent_speed * (d[0] * math.sin(gamma) - d[1] * math.cos(gamma)) / r


def d_range_d_yu(rel: VectorLike) -> float:
    """Rate of change of the predicted range as the agent climbs."""
    d = as_array(rel)
    return -d[2] / math.sqrt(float(d @ d))


def d_detection_prob(rel: VectorLike, d_range: float, detect_scale: float = 100.0) -> float:
    """Chain rule through the detection probability.

    With scale 100 this is -pi * (r / 50) * dr.
    """
    d = as_array(rel)
    r = math.sqrt(float(d @ d))
    return -information.predicted_detection_prob(d, detect_scale) * (r / (detect_scale / 2.0)) * d_range


def _own_term_derivative(own_action: ActionVector, own_state: AgentTruth,
                         sim_state: np.ndarray, noise: NoiseModel,
                         cfg: GradientStepConfig, d_pos: np.ndarray,
                         d_range: Callable[[np.ndarray], float]) -> np.ndarray:
    pos = information.post_action_position(own_state, own_action, cfg.agent_speed)
    rel = np.asarray(sim_state)[:3] - pos
    try:
        H = measurement.jacobian(rel)
        hess = measurement.position_hessians(rel)
    except DegenerateGeometry:
        return np.zeros((6, 6))

    prob = information.predicted_detection_prob(rel, cfg.detect_scale)
    d_prob = d_detection_prob(rel, d_range(rel), cfg.detect_scale)

    dH = np.zeros_like(H)
    dH[:, :3] = hess @ (-d_pos)
    r_inv = noise.r_inv
    cross = dH.T @ r_inv @ H
    return d_prob * (H.T @ r_inv @ H) + prob * (cross + cross.T)


def d_fhat_d_gamma(own_action: ActionVector, own_state: AgentTruth, sim_state: np.ndarray,
                   noise: NoiseModel, cfg: GradientStepConfig) -> np.ndarray:
    """Derivative of the predicted post-action information in heading.

    Peer terms do not depend on this agent's heading. Singular geometry
    gives a zero matrix.
    """
    return _own_term_derivative(
        own_action, own_state, sim_state, noise, cfg,
        d_position_d_gamma(own_action.gamma, cfg.agent_speed),
        lambda rel: d_range_d_gamma(rel, own_action.gamma, cfg.agent_speed),
    )


def d_fhat_d_yu(own_action: ActionVector, own_state: AgentTruth, sim_state: np.ndarray,
                noise: NoiseModel, cfg: GradientStepConfig) -> np.ndarray:
    """Derivative of the predicted post-action information in vertical position."""
    return _own_term_derivative(
        own_action, own_state, sim_state, noise, cfg,
        d_position_d_yu(),
        d_range_d_yu,
    )


def loss_gradient(fhats: Mapping[int, np.ndarray], dfhats: Mapping[int, np.ndarray],
                  gradient_form: str = GRADIENT_LOG_DET) -> float:
    """-sum_i Tr(F_i^-1 dF_i), or the determinant-weighted variant.

    Raises:
        NonPositiveDefiniteInformation: If any F_i is not positive definite
    """
    total = 0.0
    for target in sorted(fhats):
        fhat = fhats[target]
        try:
            factor = scipy.linalg.cho_factor(fhat)
        except scipy.linalg.LinAlgError as exc:
            raise NonPositiveDefiniteInformation(f"Target {target}: {exc}") from exc
        trace = float(np.trace(scipy.linalg.cho_solve(factor, dfhats[target])))
        if gradient_form == GRADIENT_DET:
            trace *= float(np.prod(np.diag(factor[0])) ** 2)
        total -= trace
    return total


def d_lhat_d_gamma(ctx: LossContext, action: ActionVector) -> float:
    """Gradient of the estimated loss in heading at ``action``."""
    fhats = {t: ctx.fhat(action, t) for t in ctx.targets}
    dfhats = {t: d_fhat_d_gamma(action, ctx.own_state, ctx.sim_states[t], ctx.noise, ctx.cfg)
              for t in ctx.targets}
    return loss_gradient(fhats, dfhats, ctx.cfg.gradient_form)


def d_lhat_d_yu(ctx: LossContext, action: ActionVector) -> float:
    """Gradient of the estimated loss in vertical position at ``action``."""
    fhats = {t: ctx.fhat(action, t) for t in ctx.targets}
    dfhats = {t: d_fhat_d_yu(action, ctx.own_state, ctx.sim_states[t], ctx.noise, ctx.cfg)
              for t in ctx.targets}
    return loss_gradient(fhats, dfhats, ctx.cfg.gradient_form)


# -- predictions -----------------------------------------------------------------

def predict_targets(tracks: Mapping[int, TrackEstimate],
                    motion: MotionModel) -> Dict[int, TrackEstimate]:
    """Project every track one step with the constant-velocity model."""
    return {target: ekf2.predict(est, motion) for target, est in sorted(tracks.items())}


def predict_peer_actions(snapshots: Mapping[int, PeerSnapshot],
                         agent_speed: float = 1.0) -> Dict[int, PeerPrediction]:
    """Assume each peer repeats its last known action.

    The predicted position is one step from the peer's last known
    position, however old that snapshot is.
    """
    predictions = {}
    for peer_id, snap in sorted(snapshots.items()):
        predictions[peer_id] = PeerPrediction(
            action=snap.action,
            position=_advance(snap.position, snap.action, agent_speed),
        )
    return predictions


def _advance(position: EnuVector, action: ActionVector, agent_speed: float) -> EnuVector:
    return EnuVector(
        position.e + agent_speed * math.cos(action.gamma),
        position.n + agent_speed * math.sin(action.gamma),
        action.y_u,
    )


def draw_simulated_states(predicted: Mapping[int, TrackEstimate],
                          rng: np.random.Generator) -> Dict[int, np.ndarray]:
    """One simulated true state per predicted track, in target order."""
    return {target: information.sample_simulated_true_state(est, rng)
            for target, est in sorted(predicted.items())}


def build_loss_context(agent_state: AgentTruth, predicted: Mapping[int, TrackEstimate],
                       view: FisherView, peer_predictions: Mapping[int, PeerPrediction],
                       sim_states: Mapping[int, np.ndarray], noise: NoiseModel,
                       cfg: GradientStepConfig,
                       on_singular_geometry: Optional[information.GeometryCallback] = None,
                       ) -> Optional[LossContext]:
    """Assemble the loss context, or None when no track is usable."""
    own_fims = {}
    for target, est in predicted.items():
        try:
            own_fims[target] = ekf2.fisher_contribution(est)
        except SingularCovariance as exc:
            logger.debug("Agent %d drops target %d from its loss: %s",
                         agent_state.agent_id, target, exc)
    if not own_fims:
        return None
    local_view = replace(view, own_fims=own_fims)
    totals = {t: information.agent_preaction_total(local_view, t)
              for t in own_fims}
    return LossContext(
        view=local_view,
        own_state=agent_state,
        predicted_peers=peer_predictions,
        sim_states=sim_states,
        totals_preaction=totals,
        noise=noise,
        cfg=cfg,
        on_singular_geometry=on_singular_geometry,
    )


def _finite_or_zero(value: float, agent_id: int, what: str,
                    on_nonfinite: Optional[Callable[[int, str], None]]) -> float:
    if math.isfinite(value):
        return value
    logger.warning("Agent %d: non-finite %s gradient replaced by 0", agent_id, what)
    if on_nonfinite is not None:
        on_nonfinite(agent_id, what)
    return 0.0


def _safe_gradient(fn, ctx: LossContext, action: ActionVector) -> float:
    try:
        return fn(ctx, action)
    except NonPositiveDefiniteInformation as exc:
        logger.debug("Gradient skipped: %s", exc)
        return 0.0


def decide(
    agent_state: AgentTruth,
    tracks: Mapping[int, TrackEstimate],
    fisher_view: FisherView,
    peer_predictions: Mapping[int, PeerPrediction],
    cfg: GradientStepConfig,
    rng: np.random.Generator,
    *,
    noise: NoiseModel,
    motion: MotionModel,
    start: Optional[ActionVector] = None,
    sim_states: Optional[Mapping[int, np.ndarray]] = None,
    k: int = 0,
    on_nonfinite: Optional[Callable[[int, str], None]] = None,
    on_singular_geometry: Optional[Callable[[int, int, str], None]] = None,
    on_estimated_loss: Optional[Callable[[int, float], None]] = None,
) -> ActionVector:
    """One stochastic-gradient step on the agent's estimated loss.

    The heading moves first, against the heading gradient at the
    starting action; the vertical position then moves against the
    vertical gradient evaluated at the new heading. Without any usable
    track the starting action is returned unchanged.

    Args:
        agent_state: The deciding agent's current truth (its own position is known)
        tracks: The agent's updated estimates, keyed by target id
        fisher_view: The agent's view of peer information
        peer_predictions: Predicted peer actions and positions
        cfg: Step sizes and geometry constants
        rng: Stream for the simulated true states
        noise: Measurement noise model
        motion: Target motion model
        start: Action to improve; defaults to the current heading and height
        sim_states: Simulated true states to reuse; drawn from ``rng`` if None
        k: Time step, for decaying gains
        on_nonfinite: Called with (agent id, "gamma"|"y_u") on a NaN/inf gradient
        on_singular_geometry: Called with (agent id, target id, details) for
            each measurement term dropped for singular geometry
        on_estimated_loss: Called with (agent id, estimated loss) of the
            returned action
    """
    if start is None:
        start = ActionVector(agent_state.gamma, agent_state.y_u)
    if not tracks:
        return start

    predicted = predict_targets(tracks, motion)
    if sim_states is None:
        sim_states = draw_simulated_states(predicted, rng)
    me = agent_state.agent_id
    geometry = partial(on_singular_geometry, me) if on_singular_geometry else None
    ctx = build_loss_context(agent_state, predicted, fisher_view, peer_predictions,
                             sim_states, noise, cfg, geometry)
    if ctx is None:
        return start

    a_k, b_k = cfg.gains(k)
    g_gamma = _finite_or_zero(_safe_gradient(d_lhat_d_gamma, ctx, start),
                              me, "gamma", on_nonfinite)
    gamma = measurement.wrap_angle(start.gamma - a_k * g_gamma)

    g_yu = _finite_or_zero(_safe_gradient(d_lhat_d_yu, ctx, ActionVector(gamma, start.y_u)),
                           me, "y_u", on_nonfinite)
    action = ActionVector(gamma=gamma, y_u=start.y_u - b_k * g_yu)
    if on_estimated_loss is not None:
        try:
            on_estimated_loss(me, ctx.loss(action))
        except NonPositiveDefiniteInformation as exc:
            logger.debug("Agent %d: no estimated loss for its action: %s", me, exc)
    return action


@dataclass
class SeesawParticipant:
    """One agent's inputs to a seesaw round."""

    state: AgentTruth
    tracks: Mapping[int, TrackEstimate]
    view: FisherView
    rng: np.random.Generator


DecideFn = Callable[..., ActionVector]


def seesaw_step(
    participants: Sequence[SeesawParticipant],
    cfg: GradientStepConfig,
    *,
    noise: NoiseModel,
    motion: MotionModel,
    k: int = 0,
    decide_fn: DecideFn = decide,
    on_nonfinite: Optional[Callable[[int, str], None]] = None,
    on_singular_geometry: Optional[Callable[[int, int, str], None]] = None,
    on_estimated_loss: Optional[Callable[[int, float], None]] = None,
) -> Dict[int, ActionVector]:
    """Cyclic improvement of each agent's action within one group.

    Agents take turns in the given order for ``cfg.seesaw_iters`` sweeps.
    On its turn an agent uses the latest decided action of every peer
    whose last transmission reached it, and the repeat-last-action
    prediction for the others. Each agent keeps one set of simulated
    true states for the whole round. The callbacks are handed to every
    ``decide_fn`` call; ``on_estimated_loss`` therefore sees the final
    action of each agent last.
    """
    sim_states = {}
    for p in participants:
        predicted = predict_targets(p.tracks, motion) if p.tracks else {}
        sim_states[p.state.agent_id] = draw_simulated_states(predicted, p.rng)

    decided: Dict[int, ActionVector] = {}
    for _ in range(cfg.seesaw_iters):
        for p in participants:
            me = p.state.agent_id
            peer_predictions = predict_peer_actions(p.view.peers, cfg.agent_speed)
            for peer_id, action in decided.items():
                if peer_id == me or not p.view.communicated.get(peer_id):
                    continue
                snap = p.view.peers.get(peer_id)
                if snap is None:
                    continue
                peer_predictions[peer_id] = PeerPrediction(
                    action=action,
                    position=_advance(snap.position, action, cfg.agent_speed),
                )
            decided[me] = decide_fn(
                p.state, p.tracks, p.view, peer_predictions, cfg, p.rng,
                noise=noise, motion=motion,
                start=decided.get(me),
                sim_states=sim_states[me],
                k=k,
                on_nonfinite=on_nonfinite,
                on_singular_geometry=on_singular_geometry,
                on_estimated_loss=on_estimated_loss,
            )
    return decided
