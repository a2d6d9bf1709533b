"""Forward kinematics and velocity/acceleration propagation along the chain.

Frame indices are 1-based to match joint numbering; index 0 is the base.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import IndexOutOfRange, MissingHomePose
from .model import RobotModel
from .spatial import RigidTransform, ad, adjoint, exp_se3


@dataclass(frozen=True)
class JointState:
    q: np.ndarray
    qd: np.ndarray
    qdd: np.ndarray

    def __post_init__(self):
        arrays = [np.array(a, dtype=float).reshape(-1) for a in (self.q, self.qd, self.qdd)]
        if not arrays[0].size == arrays[1].size == arrays[2].size:
            raise ValueError("q, qd and qdd must have the same length")
        for name, a in zip(("q", "qd", "qdd"), arrays):
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    @property
    def n(self) -> int:
        return self.q.size

    @classmethod
    def zeros(cls, n: int) -> JointState:
        return cls(np.zeros(n), np.zeros(n), np.zeros(n))


class LinkFrames(NamedTuple):
    relative: list  # f_{i-1,i}(q_i), i = 1..n
    absolute: list  # base -> link i


def _check_length(model: RobotModel, *arrays):
    for a in arrays:
        if len(a) != model.n:
            raise ValueError(f"expected {model.n} joint values, got {len(a)}")


def fk_poe(model: RobotModel, q, frame_index: int | None = None) -> RigidTransform:
    """Pose of link ``frame_index`` (default: last) via the product of exponentials."""
    q = np.asarray(q, dtype=float)
    _check_length(model, q)
    k = model.n if frame_index is None else int(frame_index)
    if not 0 <= k <= model.n:
        raise IndexOutOfRange(f"frame index {k} outside 0..{model.n}")
    if k == 0:
        return RigidTransform.identity()
    home = model.joints[k - 1].home_pose_space
    if home is None:
        raise MissingHomePose(f"joint {k} has no home pose")
    T = RigidTransform.identity()
    for joint, qi in zip(model.joints[:k], q[:k]):
        T = T @ exp_se3(joint.space_screw, qi)
    return T @ home


def link_frames_dh(model: RobotModel, q) -> LinkFrames:
    """Relative transforms ``parent_to_child_home_i * exp([s_i] q_i)`` and their running products."""
    q = np.asarray(q, dtype=float)
    _check_length(model, q)
    relative, absolute = [], []
    T = RigidTransform.identity()
    for joint, qi in zip(model.joints, q):
        f = joint.parent_to_child_home @ exp_se3(joint.body_screw, qi)
        T = T @ f
        relative.append(f)
        absolute.append(T)
    return LinkFrames(relative, absolute)


def body_twists(model: RobotModel, q, qd) -> list[np.ndarray]:
    """Body twists ``V_i = Ad(f_{i-1,i}^-1) V_{i-1} + s_i qd_i`` with a fixed base."""
    qd = np.asarray(qd, dtype=float)
    _check_length(model, qd)
    frames = link_frames_dh(model, q)
    V = np.zeros(6)
    out = []
    for joint, f, qdi in zip(model.joints, frames.relative, qd):
        V = adjoint(f.inverse()) @ V + joint.body_screw * qdi
        out.append(V)
    return out


class ChainMotion(NamedTuple):
    frames: LinkFrames
    twists: list
    accels: list  # body-frame time derivatives of the twists


def propagate(model: RobotModel, q, qd, qdd, base_accel=None) -> ChainMotion:
    """Forward pass: link poses, body twists and body accelerations.

    ``base_accel`` is the spatial acceleration of the base (zero by default;
    pass an upward ``g`` to fold gravity into the accelerations).
    """
    qd = np.asarray(qd, dtype=float)
    qdd = np.asarray(qdd, dtype=float)
    _check_length(model, qd, qdd)
    frames = link_frames_dh(model, q)
    V = np.zeros(6)
    dV = np.zeros(6) if base_accel is None else np.asarray(base_accel, dtype=float)
    twists, accels = [], []
    for joint, f, qdi, qddi in zip(model.joints, frames.relative, qd, qdd):
        Ad = adjoint(f.inverse())
        s = joint.body_screw
        V = Ad @ V + s * qdi
        dV = Ad @ dV + ad(V) @ s * qdi + s * qddi
        twists.append(V)
        accels.append(dV)
    return ChainMotion(frames, twists, accels)
