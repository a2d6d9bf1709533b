"""Torque at a locked spherical air bearing carrying the arm and a control box.

Each body is handled in its own body-fixed frame, where the inertia about the
centre of mass is constant.  With ``r`` the COM position measured from the
bearing centre and ``w`` the body angular velocity (both in body coordinates),
the angular momentum about the bearing is taken as

    H = (I_com + m [r]x [r]x^T) w

and its inertial rate follows from the transport theorem,

    dH/dt = dI_o/dt w + I_o dw/dt + w x (I_o w),
    dI_o/dt = m ([r']x [r]x^T + [r]x [r']x^T),

where ``r'`` is the rate of ``r`` seen from the body frame.  The momentum
expression above drops the ``m r x r'`` coupling of a COM translating relative
to the body; ``include_translational_momentum=True`` adds it back, which gives
the exact rate of angular momentum about the bearing.

All returned torques are in the inertial frame N.  Gravity acts along -z of N.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kinematics import JointState, propagate
from .model import LinkParams, PlatformModel
from .spatial import skew


@dataclass(frozen=True, eq=False)
class BodyKinematicState:
    """COM position and rates of one body, in that body's own frame.

    ``rotation_to_body`` maps inertial (N) coordinates into body coordinates.
    ``r_dot`` and ``r_ddot`` are derivatives as seen from the rotating body
    frame; ``omega_body`` is the inertial angular velocity in body coordinates.
    """

    r_body: np.ndarray
    r_dot: np.ndarray
    r_ddot: np.ndarray
    omega_body: np.ndarray
    omega_dot: np.ndarray
    rotation_to_body: np.ndarray

    @property
    def r_inertial(self) -> np.ndarray:
        return self.rotation_to_body.T @ self.r_body


@dataclass(frozen=True, eq=False)
class BearingTorque:
    dynamic: np.ndarray
    gravitational: np.ndarray
    total: np.ndarray


def bodies(platform: PlatformModel) -> list[LinkParams]:
    """The eight bodies in order: arm links 1..n, then the control box."""
    return list(platform.arm.links) + [platform.control_box]


def body_states_from_arm(platform: PlatformModel, state) -> list[BodyKinematicState]:
    if not isinstance(state, JointState):
        state = JointState(*state)
    arm = platform.arm
    motion = propagate(arm, state.q, state.qd, state.qdd)
    to_base = platform.platform_attitude @ platform.bearing_to_arm_base
    out = []
    for link, T, V, dV in zip(arm.links, motion.frames.absolute, motion.twists, motion.accels):
        pose = to_base @ T
        R = pose.rotation
        c = link.com
        w, v = V[:3], V[3:]
        dw, dv = dV[:3], dV[3:]
        r = R.T @ pose.translation + c
        # COM velocity / acceleration in N, expressed in body coordinates.
        vel = v + np.cross(w, c)
        acc = dv + np.cross(w, v) + np.cross(dw, c) + np.cross(w, np.cross(w, c))
        r_dot = vel - np.cross(w, r)
        r_ddot = acc - np.cross(w, vel) - np.cross(dw, r) - np.cross(w, r_dot)
        out.append(BodyKinematicState(r, r_dot, r_ddot, w, dw, R.T))

    box_pose = platform.platform_attitude @ platform.bearing_to_box
    R = box_pose.rotation
    z = np.zeros(3)
    r = R.T @ box_pose.translation + platform.control_box.com
    out.append(BodyKinematicState(r, z, z, z, z, R.T))
    return out


def inertia_about_bearing(body: BodyKinematicState, link: LinkParams) -> np.ndarray:
    rx = skew(body.r_body)
    return link.inertia_com + link.mass * rx @ rx.T


def angular_momentum_about_bearing(body: BodyKinematicState, link: LinkParams,
                                   include_translational_momentum: bool = False) -> np.ndarray:
    """Angular momentum about the bearing, body coordinates."""
    H = inertia_about_bearing(body, link) @ body.omega_body
    if include_translational_momentum:
        H = H + link.mass * np.cross(body.r_body, body.r_dot)
    return H


def h_dot_about_bearing(body: BodyKinematicState, link: LinkParams,
                        include_translational_momentum: bool = False) -> np.ndarray:
    """Inertial rate of the bearing angular momentum, body coordinates."""
    m = link.mass
    w = body.omega_body
    rx = skew(body.r_body)
    rdx = skew(body.r_dot)
    I_o = link.inertia_com + m * rx @ rx.T
    I_o_dot = m * (rdx @ rx.T + rx @ rdx.T)
    H = I_o @ w
    dH = I_o_dot @ w + I_o @ body.omega_dot
    if include_translational_momentum:
        extra = m * np.cross(body.r_body, body.r_dot)
        H = H + extra
        dH = dH + m * np.cross(body.r_body, body.r_ddot)
    return dH + np.cross(w, H)


def gravity_moment(body: BodyKinematicState, link: LinkParams, gravity: float) -> np.ndarray:
    """Moment ``r x F`` of the body's weight about the bearing, N coordinates."""
    return np.cross(body.r_inertial, np.array([0.0, 0.0, -link.mass * gravity]))


def total_angular_momentum(platform: PlatformModel, state, include_translational_momentum: bool = False) -> np.ndarray:
    """Summed bearing angular momentum of all bodies, N coordinates."""
    total = np.zeros(3)
    for body, link in zip(body_states_from_arm(platform, state), bodies(platform)):
        H = angular_momentum_about_bearing(body, link, include_translational_momentum)
        total += body.rotation_to_body.T @ H
    return total


def total_bearing_torque(platform: PlatformModel, state, include_translational_momentum: bool = False) -> BearingTorque:
    """Dynamic plus gravitational torque at the bearing, N coordinates.

    The control box is rigidly attached to the locked platform, so only its
    weight contributes.
    """
    states = body_states_from_arm(platform, state)
    links = bodies(platform)
    dynamic = np.zeros(3)
    grav = np.zeros(3)
    g = platform.gravity
    for body, link in zip(states[:-1], links[:-1]):
        dynamic += body.rotation_to_body.T @ h_dot_about_bearing(body, link, include_translational_momentum)
    for body, link in zip(states, links):
        grav += gravity_moment(body, link, g)
    return BearingTorque(dynamic, grav, dynamic + grav)
