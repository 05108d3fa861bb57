"""Fisher-information bookkeeping and the information-gain losses.

Information from independent agents adds. The loss of a set of actions
is the negative log-determinant gain of the total information summed
over targets; an agent can only estimate it from its own view, with the
target positions replaced by simulated true states.
"""

import math
from typing import Callable, Iterable, List, Mapping, Optional, Sequence, Union

import numpy as np
import scipy.linalg

from src.model.state import ActionVector, AgentTruth, VectorLike, as_array
from src.model.track import TrackEstimate
from src.model.view import FisherView, PeerPrediction
from src.tracking import measurement
from src.tracking.ekf2 import NoiseModel
from src.util.error_handling import DegenerateGeometry, NonPositiveDefiniteInformation

PEER_TERMS_COMMUNICATED = "communicated"
PEER_TERMS_ALL_KNOWN = "all_known"

MatrixSet = Union[Mapping[int, np.ndarray], Sequence[np.ndarray]]

# Called with (target id, details) when a measurement term is dropped
GeometryCallback = Callable[[int, str], None]


def _matrices(matrices: MatrixSet) -> List[np.ndarray]:
    if isinstance(matrices, Mapping):
        return [matrices[key] for key in sorted(matrices)]
    return list(matrices)


def total_preaction_fim(per_agent_fims: Iterable[np.ndarray]) -> np.ndarray:
    """Sum of every agent's information about one target."""
    total = np.zeros((6, 6))
    for fim in per_agent_fims:
        total = total + fim
    return total


def sample_simulated_true_state(est: TrackEstimate, rng: np.random.Generator) -> np.ndarray:
    """Draw a plausible true state around a prediction.

    Returns ``x_hat + eps`` with ``eps ~ N(0, P)``, built from the
    eigen-decomposition square root of P so a singular P is allowed.
    """
    w, v = np.linalg.eigh(est.P)
    root = v * np.sqrt(np.clip(w, 0.0, None))
    return est.x_hat + root @ rng.standard_normal(est.x_hat.shape[0])


def predicted_detection_prob(rel: VectorLike, scale: float = 100.0) -> float:
    """Detection probability decaying with squared distance."""
    d = as_array(rel)
    return math.exp(-float(d @ d) / scale)


def measurement_information(rel: VectorLike, noise: NoiseModel) -> np.ndarray:
    """Information H^T R^-1 H of one measurement at a relative position.

    Raises:
        DegenerateGeometry: If the Jacobian is singular at ``rel``
    """
    H = measurement.jacobian(rel)
    return H.T @ noise.r_inv @ H


def post_action_position(own_state: AgentTruth, action: ActionVector,
                         agent_speed: float = 1.0) -> np.ndarray:
    """Where an agent ends up after executing ``action`` from ``own_state``."""
    pos = own_state.pos.to_array()
    return np.array([
        pos[0] + agent_speed * math.cos(action.gamma),
        pos[1] + agent_speed * math.sin(action.gamma),
        action.y_u,
    ])


def _sensor_term(target_pos: np.ndarray, sensor_pos: np.ndarray, noise: NoiseModel,
                 detect_scale: float, target: int,
                 on_singular_geometry: Optional[GeometryCallback]) -> Optional[np.ndarray]:
    rel = target_pos - sensor_pos
    try:
        info = measurement_information(rel, noise)
    except DegenerateGeometry as exc:
        if on_singular_geometry is not None:
            on_singular_geometry(target, str(exc))
        return None
    return predicted_detection_prob(rel, detect_scale) * info


def _peer_ids(view: FisherView, predicted_peers: Mapping[int, PeerPrediction],
              peer_terms: str):
    """Yield (peer id, include pre-action FIM, include measurement term)."""
    for l in sorted(set(predicted_peers) | set(view.communicated_peers())):
        if l == view.agent_id:
            continue
        communicated = bool(view.communicated.get(l)) and l in view.peers
        if peer_terms == PEER_TERMS_ALL_KNOWN:
            yield l, communicated, l in predicted_peers
        elif communicated:
            yield l, True, l in predicted_peers


def agent_preaction_total(view: FisherView, target: int) -> np.ndarray:
    """Pre-action total information about ``target`` as this agent sees it.

    Own information plus the last-communicated information of every
    peer whose latest transmission succeeded. Stale information is never
    added, whichever peer-term mode is in use.
    """
    total = view.own_fims[target].copy()
    for l in view.communicated_peers():
        if l == view.agent_id:
            continue
        fim = view.peers[l].fims.get(target)
        if fim is not None:
            total = total + fim
    return total


def predicted_postaction_fim(
    view: FisherView,
    target: int,
    own_action: ActionVector,
    own_state: AgentTruth,
    predicted_peers: Mapping[int, PeerPrediction],
    sim_states: Mapping[int, np.ndarray],
    noise: NoiseModel,
    detect_scale: float = 100.0,
    agent_speed: float = 1.0,
    peer_terms: str = PEER_TERMS_COMMUNICATED,
    on_singular_geometry: Optional[GeometryCallback] = None,
) -> np.ndarray:
    """Agent's prediction of the total information after everyone moves.

    Own pre-action information, plus the own measurement term at the
    post-action position, plus for each included peer its communicated
    information and its measurement term at its predicted position. All
    measurement terms are evaluated at the simulated true target state.
    A term with singular geometry contributes nothing and is reported to
    ``on_singular_geometry``.
    """
    target_pos = np.asarray(sim_states[target])[:3]
    total = view.own_fims[target].copy()

    own_pos = post_action_position(own_state, own_action, agent_speed)
    term = _sensor_term(target_pos, own_pos, noise, detect_scale, target, on_singular_geometry)
    if term is not None:
        total = total + term

    for l, with_fim, with_measurement in _peer_ids(view, predicted_peers, peer_terms):
        if with_fim:
            fim = view.peers[l].fims.get(target)
            if fim is not None:
                total = total + fim
        if with_measurement:
            term = _sensor_term(target_pos, predicted_peers[l].position.to_array(),
                                noise, detect_scale, target, on_singular_geometry)
            if term is not None:
                total = total + term
    return total


def log_det(fim: np.ndarray) -> float:
    """Log-determinant through a Cholesky factor.

    Raises:
        NonPositiveDefiniteInformation: If ``fim`` is not positive definite
    """
    try:
        chol = scipy.linalg.cholesky(fim, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise NonPositiveDefiniteInformation(f"Information matrix not positive definite: {exc}") from exc
    return 2.0 * float(np.sum(np.log(np.diag(chol))))


def true_loss(pre_totals: MatrixSet, post_totals: MatrixSet) -> float:
    """Negative total log-determinant information gain over targets."""
    pre = _matrices(pre_totals)
    post = _matrices(post_totals)
    if len(pre) != len(post):
        raise ValueError(f"Got {len(pre)} pre-action and {len(post)} post-action matrices")
    return -sum(log_det(b) - log_det(a) for a, b in zip(pre, post))


def estimated_loss(
    view: FisherView,
    own_action: ActionVector,
    own_state: AgentTruth,
    predicted_peers: Mapping[int, PeerPrediction],
    sim_states: Mapping[int, np.ndarray],
    noise: NoiseModel,
    totals_preaction: Mapping[int, np.ndarray],
    detect_scale: float = 100.0,
    agent_speed: float = 1.0,
    peer_terms: str = PEER_TERMS_COMMUNICATED,
    on_singular_geometry: Optional[GeometryCallback] = None,
) -> float:
    """Agent's estimate of the loss of taking ``own_action``.

    Sums over the targets in ``totals_preaction``.

    Raises:
        NonPositiveDefiniteInformation: If any matrix has no log-determinant
    """
    loss = 0.0
    for target in sorted(totals_preaction):
        post = predicted_postaction_fim(
            view, target, own_action, own_state, predicted_peers, sim_states, noise,
            detect_scale=detect_scale, agent_speed=agent_speed, peer_terms=peer_terms,
            on_singular_geometry=on_singular_geometry,
        )
        loss -= log_det(post) - log_det(totals_preaction[target])
    return loss
