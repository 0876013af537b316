"""Drone dynamics: point-mass and 12-state rigid-body quadcopter stepping.

Point-mass mode integrates velocity and position with semi-implicit
Euler and a hard speed clamp; it is the fast path for large swarms.

Quadcopter mode runs a cascaded autopilot (velocity error -> desired
attitude and thrust -> attitude loop -> rate loop -> torques), holds the
actuator outputs constant over the step, and integrates the full
rigid-body state with classic 4th-order Runge-Kutta.  Axes follow the
NED convention used package-wide; thrust acts along body -z.

Both steppers are pure functions from the previous state to the next,
so agents can be advanced in any order within a tick.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import AgentState, Vec3, clamp_norm, wrap_angle


class NumericBlowupError(RuntimeError):
    """Integration produced a non-finite or absurd state (bad gains or dt)."""


@dataclass(frozen=True)
class CommandAccel:
    """Desired inertial acceleration handed down by the steering layer."""

    a_cmd: Vec3

    def as_array(self) -> np.ndarray:
        return self.a_cmd.as_array()


@dataclass
class QuadParams:
    """Physical and autopilot parameters of the quadcopter model.

    Defaults describe a small 500 g platform and are implementation
    choices tuned for stable flight at dt = 0.01 s.
    """

    mass: float = 0.5                  # kg
    jx: float = 3.8e-3                 # kg m^2
    jy: float = 3.8e-3
    jz: float = 7.1e-3
    g: float = 9.81                    # m/s^2
    f_max: float = 15.0                # total thrust ceiling (N)
    tau_max: float = 0.5               # per-axis torque ceiling (N m)
    kp_vel: float = 4.0                # velocity loop (1/s)
    kp_att: float = 8.0                # attitude loop (1/s)
    kp_rate: float = 20.0              # rate loop (1/s)
    tilt_max: float = 0.6              # desired roll/pitch ceiling (rad)
    a_des_max: float = 20.0            # velocity-loop acceleration ceiling
    sanity_bound: float = 1e6          # blowup threshold on any state entry

    def violations(self) -> list[str]:
        out = []
        for name in ("mass", "jx", "jy", "jz", "g"):
            if not getattr(self, name) > 0:
                out.append(f"quadcopter {name} must be > 0")
        for name in ("f_max", "tau_max", "kp_vel", "kp_att", "kp_rate",
                     "tilt_max", "a_des_max", "sanity_bound"):
            if not getattr(self, name) > 0:
                out.append(f"quadcopter {name} must be > 0")
        return out


def _cmd_array(cmd) -> np.ndarray:
    if isinstance(cmd, CommandAccel):
        return cmd.as_array()
    return np.asarray(cmd, dtype=float)


# ---------------------------------------------------------------------------
# Point mass


def step_point_mass_arrays(
    positions: np.ndarray,
    velocities: np.ndarray,
    accels: np.ndarray,
    dt: float,
    v_max: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Semi-implicit Euler for the whole swarm at once.

    v' = clamp_norm(v + a dt, v_max), then p' = p + v' dt.  The position
    update uses the already-clamped velocity, which keeps the speed bound
    airtight between ticks.
    """
    v = velocities + accels * dt
    speed = np.linalg.norm(v, axis=1)
    over = speed > v_max
    if np.any(over):
        v = v.copy()
        v[over] *= (v_max / speed[over])[:, None]
    p = positions + v * dt
    return p, v


def step_point_mass(state: AgentState, cmd, dt: float, v_max: float) -> AgentState:
    """Single-agent wrapper over the array stepper; attitude stays zero."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    p = np.array([[state.pn, state.pe, state.pd]])
    v = np.array([[state.u, state.v, state.w]])
    a = _cmd_array(cmd).reshape(1, 3)
    p2, v2 = step_point_mass_arrays(p, v, a, dt, v_max)
    return AgentState(pn=p2[0, 0], pe=p2[0, 1], pd=p2[0, 2],
                      u=v2[0, 0], v=v2[0, 1], w=v2[0, 2])


# ---------------------------------------------------------------------------
# Quadcopter


def rotation_body_to_inertial(phi: float, theta: float, psi: float) -> np.ndarray:
    """ZYX Euler rotation matrix mapping body coordinates to inertial."""
    cphi, sphi = math.cos(phi), math.sin(phi)
    cth, sth = math.cos(theta), math.sin(theta)
    cpsi, spsi = math.cos(psi), math.sin(psi)
    return np.array([
        [cth * cpsi, sphi * sth * cpsi - cphi * spsi, cphi * sth * cpsi + sphi * spsi],
        [cth * spsi, sphi * sth * spsi + cphi * cpsi, cphi * sth * spsi - sphi * cpsi],
        [-sth,       sphi * cth,                      cphi * cth],
    ])


def quad_derivative(x: np.ndarray, thrust: float, torques: np.ndarray,
                    qp: QuadParams) -> np.ndarray:
    """Time derivative of the 12-entry state under fixed actuator outputs.

    State layout: [pn pe pd u v w phi theta psi p q r] with body-frame
    linear velocity and angular rates.
    """
    u, v, w = x[3], x[4], x[5]
    phi, theta, psi = x[6], x[7], x[8]
    p, q, r = x[9], x[10], x[11]

    rot = rotation_body_to_inertial(phi, theta, psi)
    pos_dot = rot @ np.array([u, v, w])

    cphi, sphi = math.cos(phi), math.sin(phi)
    cth, sth = math.cos(theta), math.sin(theta)
    tth = sth / cth
    gg = qp.g
    u_dot = r * v - q * w - gg * sth
    v_dot = p * w - r * u + gg * cth * sphi
    w_dot = q * u - p * v + gg * cth * cphi - thrust / qp.mass

    phi_dot = p + (q * sphi + r * cphi) * tth
    theta_dot = q * cphi - r * sphi
    psi_dot = (q * sphi + r * cphi) / cth

    p_dot = ((qp.jy - qp.jz) / qp.jx) * q * r + torques[0] / qp.jx
    q_dot = ((qp.jz - qp.jx) / qp.jy) * p * r + torques[1] / qp.jy
    r_dot = ((qp.jx - qp.jy) / qp.jz) * p * q + torques[2] / qp.jz

    return np.array([pos_dot[0], pos_dot[1], pos_dot[2],
                     u_dot, v_dot, w_dot,
                     phi_dot, theta_dot, psi_dot,
                     p_dot, q_dot, r_dot])


def rk4_step(x: np.ndarray, thrust: float, torques: np.ndarray,
             qp: QuadParams, dt: float) -> np.ndarray:
    """One classic Runge-Kutta step with actuators held constant."""
    k1 = quad_derivative(x, thrust, torques, qp)
    k2 = quad_derivative(x + 0.5 * dt * k1, thrust, torques, qp)
    k3 = quad_derivative(x + 0.5 * dt * k2, thrust, torques, qp)
    k4 = quad_derivative(x + dt * k3, thrust, torques, qp)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def autopilot_velocity(state: AgentState, v_des,
                       qp: QuadParams) -> tuple[float, np.ndarray]:
    """Cascaded loops from a velocity setpoint to (thrust, torques).

    Velocity error maps to a desired inertial acceleration, which fixes
    the thrust magnitude and the desired body -z axis; roll/pitch follow
    from that axis with yaw held at its current value; attitude and rate
    proportional loops produce the body torques.  All outputs saturate
    (thrust in [0, f_max], per-axis torques at tau_max, roll/pitch
    setpoints at tilt_max).
    """
    v_des = np.asarray(v_des, dtype=float)
    rot = rotation_body_to_inertial(state.phi, state.theta, state.psi)
    v_inertial = rot @ np.array([state.u, state.v, state.w])

    a_des = clamp_norm(qp.kp_vel * (v_des - v_inertial), qp.a_des_max)

    # Thrust must supply g*e3 - a_des along body -z.
    f_vec = np.array([0.0, 0.0, qp.g]) - a_des
    f_norm = float(np.linalg.norm(f_vec))
    thrust = min(qp.f_max, qp.mass * f_norm)

    if f_norm > 1e-9:
        b3 = f_vec / f_norm
    else:
        b3 = np.array([0.0, 0.0, 1.0])
    # Undo the current yaw so roll/pitch setpoints come out in body terms.
    cpsi, spsi = math.cos(state.psi), math.sin(state.psi)
    cx = cpsi * b3[0] + spsi * b3[1]
    cy = -spsi * b3[0] + cpsi * b3[1]
    cz = b3[2]
    phi_des = -math.asin(max(-1.0, min(1.0, cy)))
    theta_des = math.atan2(cx, cz)
    phi_des = max(-qp.tilt_max, min(qp.tilt_max, phi_des))
    theta_des = max(-qp.tilt_max, min(qp.tilt_max, theta_des))

    rate_des = qp.kp_att * np.array([
        phi_des - state.phi,
        theta_des - state.theta,
        wrap_angle(state.psi - state.psi),      # yaw held, error always 0
    ])
    rates = np.array([state.p, state.q, state.r_rate])
    inertia = np.array([qp.jx, qp.jy, qp.jz])
    torques = inertia * qp.kp_rate * (rate_des - rates)
    torques = np.clip(torques, -qp.tau_max, qp.tau_max)
    return thrust, torques


def step_quadcopter(state: AgentState, cmd, qp: QuadParams, dt: float,
                    v_max: float = 0.0) -> AgentState:
    """Advance one quadcopter a single dt under a desired acceleration.

    The command is folded into a velocity setpoint through the inverse of
    the velocity-loop gain (so the realized acceleration tracks the
    command once the attitude transient settles), the autopilot output is
    held for the step, and the rigid body is integrated with RK4.  A
    positive v_max clamps the setpoint speed.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    a = _cmd_array(cmd)
    rot = rotation_body_to_inertial(state.phi, state.theta, state.psi)
    v_inertial = rot @ np.array([state.u, state.v, state.w])
    v_des = v_inertial + a / qp.kp_vel
    if v_max > 0.0:
        v_des = clamp_norm(v_des, v_max)

    thrust, torques = autopilot_velocity(state, v_des, qp)
    x = rk4_step(state.as_vector(), thrust, torques, qp, dt)

    if not np.all(np.isfinite(x)) or np.any(np.abs(x) > qp.sanity_bound):
        raise NumericBlowupError(
            "quadcopter state diverged; lower the gains or the timestep"
        )
    if abs(x[7]) >= math.pi / 2:
        raise NumericBlowupError(
            "pitch passed +/-90 degrees; the Euler-angle model cannot represent it"
        )
    x[6] = wrap_angle(x[6])
    x[8] = wrap_angle(x[8])
    return AgentState.from_vector(x)
