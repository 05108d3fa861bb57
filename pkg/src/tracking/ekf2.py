"""Per-agent, per-target second-order extended Kalman filter.

Each agent owns one ``TrackEstimate`` per target it has detected. Every
step the estimate is projected with the constant-velocity motion model
(``predict``) and, if the target was detected, corrected with the
range/azimuth/polar measurement (``update``). Second-order mode adds
the Hessian trace terms of the measurement function to both the
innovation mean and its covariance.
"""

import logging
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from src.model.state import VectorLike, as_array
from src.model.track import TrackEstimate, TrackStage
from src.tracking import measurement
from src.util.error_handling import (
    DegenerateGeometry,
    SingularCovariance,
    SingularInnovation,
)

logger = logging.getLogger(__name__)

EIGEN_FLOOR = 1e-12
MAX_INNOVATION_CONDITION = 1e12


@dataclass(frozen=True)
class MotionModel:
    """Linear constant-velocity transition and its process noise."""

    phi: np.ndarray
    q: np.ndarray

    @classmethod
    def constant_velocity(cls, dt: float, q_diag: Sequence[float]) -> "MotionModel":
        """Build the 6x6 constant-velocity model for step ``dt``."""
        phi = np.eye(6)
        phi[0:3, 3:6] = dt * np.eye(3)
        return cls(phi=phi, q=np.diag(np.asarray(q_diag, dtype=float)))


@dataclass(frozen=True)
class NoiseModel:
    """Diagonal measurement noise covariance R."""

    r_cov: np.ndarray

    @classmethod
    def from_sigmas(cls, sigma_r: float, sigma_phi: float, sigma_theta: float) -> "NoiseModel":
        return cls(r_cov=np.diag([sigma_r ** 2, sigma_phi ** 2, sigma_theta ** 2]))

    @property
    def r_inv(self) -> np.ndarray:
        return np.diag(1.0 / np.diag(self.r_cov))


@dataclass(frozen=True)
class MeasurementModel:
    """Measurement function bundle used by ``update``.

    ``angle_index`` names the component whose innovation wraps into
    (-pi, pi]; None for models without angles.
    """

    h: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    hessians: Callable[[np.ndarray], np.ndarray]
    angle_index: Optional[int] = None


SPHERICAL = MeasurementModel(
    h=lambda rel: measurement.measure_relative(rel).to_array(),
    jacobian=measurement.jacobian,
    hessians=measurement.hessians,
    angle_index=measurement.AZIMUTH_INDEX,
)


def symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def _floor_eigenvalues(m: np.ndarray, floor: float = EIGEN_FLOOR) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    if w.min() >= floor:
        return m
    return symmetrize((v * np.maximum(w, floor)) @ v.T)


def initialize_track(z: np.ndarray, agent_pos: VectorLike,
                     init_cov_diag: float = 1.0) -> TrackEstimate:
    """Start a track from a first detection.

    Position comes from the inverted measurement, velocity starts at
    zero, and the covariance is ``init_cov_diag * I``.
    """
    x_hat = np.zeros(6)
    x_hat[:3] = measurement.spherical_to_enu(z, agent_pos)
    return TrackEstimate(x_hat=x_hat, P=init_cov_diag * np.eye(6), stage=TrackStage.UPDATED)


def predict(est: TrackEstimate, model: MotionModel) -> TrackEstimate:
    """Project an updated estimate one step ahead.

    Raises:
        ValueError: If ``est`` is already a prediction
    """
    if est.stage is not TrackStage.UPDATED:
        raise ValueError("predict expects an estimate at stage k|k")
    x_pred = model.phi @ est.x_hat
    p_pred = symmetrize(model.phi @ est.P @ model.phi.T + model.q)
    return TrackEstimate(x_hat=x_pred, P=p_pred, stage=TrackStage.PREDICTED)


def update(
    est: TrackEstimate,
    z: Optional[np.ndarray],
    agent_pos: VectorLike,
    noise: NoiseModel,
    detected: bool,
    order: int = 2,
    model: MeasurementModel = SPHERICAL,
    on_singular_geometry: Optional[Callable[[str], None]] = None,
) -> TrackEstimate:
    """Correct a predicted estimate with one measurement.

    Args:
        est: Estimate at stage k|k-1
        z: Measurement vector (r, phi, theta); ignored if not detected
        agent_pos: Sensing agent's position
        noise: Measurement noise model
        detected: Whether the target was sensed this step
        order: 2 for the second-order filter, 1 for the plain EKF
        model: Measurement function bundle
        on_singular_geometry: Called with a description when the update is
            skipped for singular geometry

    Returns:
        Estimate at stage k|k. Undetected targets and singular geometry
        pass the prediction through unchanged.

    Raises:
        ValueError: If ``est`` is not a prediction
        SingularInnovation: If S has condition number above 1e12
    """
    if est.stage is not TrackStage.PREDICTED:
        raise ValueError("update expects an estimate at stage k|k-1")
    passthrough = replace(est, stage=TrackStage.UPDATED)
    if not detected:
        return passthrough

    rel = est.x_hat[:3] - as_array(agent_pos)
    try:
        h_pred = np.asarray(model.h(rel), dtype=float)
        H = model.jacobian(rel)
        hess = model.hessians(rel) if order == 2 else None
    except DegenerateGeometry as exc:
        logger.debug("Skipping update on singular geometry: %s", exc)
        if on_singular_geometry is not None:
            on_singular_geometry(str(exc))
        return passthrough

    P = est.P
    S = H @ P @ H.T + noise.r_cov
    u = np.asarray(z, dtype=float) - h_pred
    if hess is not None:
        hp = hess @ P  # (m, 6, 6) stack of (hess_l P)
        S = S + 0.5 * np.einsum("lab,mba->lm", hp, hp)
        u = u - 0.5 * np.trace(hp, axis1=1, axis2=2)
    if model.angle_index is not None:
        u[model.angle_index] = measurement.wrap_angle(float(u[model.angle_index]))

    S = symmetrize(S)
    if np.linalg.cond(S) > MAX_INNOVATION_CONDITION:
        raise SingularInnovation(f"Innovation covariance condition {np.linalg.cond(S):.3e}")

    K = scipy.linalg.solve(S, H @ P, assume_a="pos").T
    x_new = est.x_hat + K @ u
    p_new = (np.eye(P.shape[0]) - K @ H) @ P
    p_new = _floor_eigenvalues(symmetrize(p_new))
    return TrackEstimate(x_hat=x_new, P=p_new, stage=TrackStage.UPDATED)


def fisher_contribution(est: TrackEstimate) -> np.ndarray:
    """Fisher information P^-1 of an estimate.

    Raises:
        SingularCovariance: If P is not positive definite
    """
    try:
        factor = scipy.linalg.cho_factor(est.P)
    except scipy.linalg.LinAlgError as exc:
        raise SingularCovariance(f"Covariance not positive definite: {exc}") from exc
    info = scipy.linalg.cho_solve(factor, np.eye(est.P.shape[0]))
    return symmetrize(info)
