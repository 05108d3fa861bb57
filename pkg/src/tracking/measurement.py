"""Range / azimuth / polar-angle measurement model.

The measurement of a target from an agent depends only on the relative
position ``rel = target - agent``. Because of that, partials with respect
to the target state equal partials with respect to ``rel``, and partials
with respect to the agent position are their negatives. Velocity
columns of every Jacobian and Hessian are zero.
"""

import math

import numpy as np

from src.model.state import Measurement, VectorLike, as_array
from src.util.error_handling import DegenerateGeometry, GimbalSingularity

STATE_DIM = 6
MEAS_DIM = 3

# Singularity guards for the angle derivatives
MIN_HORIZONTAL_RANGE = 1e-9
MIN_POLAR_SINE_SQ = 1e-12

# Index of the azimuth component, the only one that wraps
AZIMUTH_INDEX = 1


def wrap_angle(a: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    if -math.pi < a <= math.pi:
        return float(a)
    result = math.pi - ((math.pi - a) % (2.0 * math.pi))
    # the modulo can round up to exactly 2*pi
    if result <= -math.pi:
        result += 2.0 * math.pi
    return result


def measure(target_pos: VectorLike, agent_pos: VectorLike) -> Measurement:
    """Noise-free measurement of a target from an agent.

    On the vertical axis the azimuth is 0 by convention and the polar
    angle is 0 (target above) or pi (target below).

    Raises:
        DegenerateGeometry: If the two positions coincide
    """
    rel = as_array(target_pos) - as_array(agent_pos)
    return measure_relative(rel)


def measure_relative(rel: VectorLike) -> Measurement:
    """``measure`` for an already-formed relative vector."""
    d_e, d_n, d_u = as_array(rel)
    r = math.sqrt(d_e * d_e + d_n * d_n + d_u * d_u)
    if r == 0.0:
        raise DegenerateGeometry("Agent and target positions coincide")
    if d_e == 0.0 and d_n == 0.0:
        phi = 0.0
    else:
        phi = wrap_angle(math.atan2(d_n, d_e))
    theta = math.acos(max(-1.0, min(1.0, d_u / r)))
    return Measurement(r=r, phi=phi, theta=theta)


def spherical_to_enu(z: np.ndarray, agent_pos: VectorLike) -> np.ndarray:
    """Invert a (r, phi, theta) measurement into an ENU target position."""
    r, phi, theta = float(z[0]), float(z[1]), float(z[2])
    offset = np.array([
        r * math.sin(theta) * math.cos(phi),
        r * math.sin(theta) * math.sin(phi),
        r * math.cos(theta),
    ])
    return as_array(agent_pos) + offset


def _checked_geometry(rel: VectorLike):
    d = as_array(rel)
    r2 = float(d @ d)
    if r2 == 0.0:
        raise DegenerateGeometry("Agent and target positions coincide")
    f2 = d[0] * d[0] + d[1] * d[1]
    f = math.sqrt(f2)
    if f < MIN_HORIZONTAL_RANGE:
        raise GimbalSingularity(f"Horizontal range {f:.3e} below {MIN_HORIZONTAL_RANGE:g}")
    if 1.0 - d[2] * d[2] / r2 < MIN_POLAR_SINE_SQ:
        raise GimbalSingularity("Polar angle at a pole")
    return d, r2, math.sqrt(r2), f2, f


def position_jacobian(rel: VectorLike) -> np.ndarray:
    """3x3 Jacobian of (r, phi, theta) with respect to the relative position."""
    d, r2, r, f2, f = _checked_geometry(rel)
    d_e, d_n, d_u = d
    return np.array([
        [d_e / r, d_n / r, d_u / r],
        [-d_n / f2, d_e / f2, 0.0],
        [d_u * d_e / (r2 * f), d_u * d_n / (r2 * f), -f / r2],
    ])


def jacobian(rel: VectorLike) -> np.ndarray:
    """3x6 measurement Jacobian H with respect to the target state.

    The azimuth row uses the true partials of atan2, -dN/f^2 and dE/f^2.

    Raises:
        DegenerateGeometry: On zero range
        GimbalSingularity: On the vertical axis or at a pole
    """
    h = np.zeros((MEAS_DIM, STATE_DIM))
    h[:, :3] = position_jacobian(rel)
    return h


def position_hessians(rel: VectorLike) -> np.ndarray:
    """Second partials of (r, phi, theta) in the relative position, shape (3, 3, 3)."""
    d, r2, r, f2, f = _checked_geometry(rel)
    d_e, d_n, d_u = d
    out = np.empty((MEAS_DIM, 3, 3))

    out[0] = (np.eye(3) - np.outer(d, d) / r2) / r

    f4 = f2 * f2
    az = np.zeros((3, 3))
    az[0, 0] = 2.0 * d_e * d_n / f4
    az[1, 1] = -az[0, 0]
    az[0, 1] = az[1, 0] = (d_n * d_n - d_e * d_e) / f4
    out[1] = az

    g = 1.0 / (r2 * f)
    c = 2.0 / r2 + 1.0 / f2
    vert = 1.0 - 2.0 * d_u * d_u / r2
    pol = np.empty((3, 3))
    pol[0, 0] = d_u * g * (1.0 - d_e * d_e * c)
    pol[1, 1] = d_u * g * (1.0 - d_n * d_n * c)
    pol[0, 1] = pol[1, 0] = -d_u * d_e * d_n * g * c
    pol[0, 2] = pol[2, 0] = d_e * g * vert
    pol[1, 2] = pol[2, 1] = d_n * g * vert
    pol[2, 2] = 2.0 * f * d_u / (r2 * r2)
    out[2] = pol
    return out


def hessians(rel: VectorLike) -> np.ndarray:
    """Per-component 6x6 Hessians of h in the target state, shape (3, 6, 6).

    Raises:
        DegenerateGeometry: On zero range
        GimbalSingularity: On the vertical axis or at a pole
    """
    out = np.zeros((MEAS_DIM, STATE_DIM, STATE_DIM))
    out[:, :3, :3] = position_hessians(rel)
    return out
