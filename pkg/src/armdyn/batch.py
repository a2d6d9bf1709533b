"""Vectorized versions of the chain recursions, evaluated for many states at once.

Every function takes joint arrays of shape (N, n) and loops over the n joints
only; the N states move through numpy together.  The per-state functions in
``kinematics``, ``dynamics``, ``oracles`` and ``bearing`` remain the reference
implementations, and the tests hold these to them.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import MissingHomePose
from .model import PlatformModel, RobotModel, as_robot, spatial_inertia
from .spatial import SMALL_ANGLE, skew

_I3 = np.eye(3)
_I6 = np.eye(6)


def _rows(a, n: int) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    a = a.reshape(1, -1) if a.ndim == 1 else a
    if a.ndim != 2 or a.shape[1] != n:
        raise ValueError(f"expected joint arrays with {n} columns, got shape {a.shape}")
    return a


def skew_batch(v: np.ndarray) -> np.ndarray:
    out = np.zeros(v.shape[:-1] + (3, 3))
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    out[..., 0, 1], out[..., 0, 2] = -z, y
    out[..., 1, 0], out[..., 1, 2] = z, -x
    out[..., 2, 0], out[..., 2, 1] = -y, x
    return out


def _trig_terms(theta: np.ndarray):
    small = np.abs(theta) < SMALL_ANGLE
    t2 = theta * theta
    s = np.where(small, theta, np.sin(theta))
    c1 = np.where(small, 0.5 * t2, 2.0 * np.sin(0.5 * theta) ** 2)
    ts = np.where(small, theta * t2 / 6.0, theta - np.sin(theta))
    return s, c1, ts


def exp_se3_batch(screw, theta) -> tuple[np.ndarray, np.ndarray]:
    """``exp([S] theta)`` for one unit-rotation screw and a vector of angles.

    Returns rotations (N, 3, 3) and translations (N, 3).
    """
    screw = np.asarray(screw, dtype=float)
    theta = np.asarray(theta, dtype=float)
    k = skew(screw[:3])
    k2 = k @ k
    v = screw[3:]
    s, c1, ts = _trig_terms(theta)
    R = _I3 + s[:, None, None] * k + c1[:, None, None] * k2
    p = theta[:, None] * v + c1[:, None] * (k @ v) + ts[:, None] * (k2 @ v)
    return R, p


def compose(R1, p1, R2, p2):
    return R1 @ R2, np.einsum("nij,nj->ni", R1, p2) + p1


def inverse_adjoint_batch(R, p) -> np.ndarray:
    """``Ad(T^-1) = [[R^T, 0], [-R^T [p], R^T]]`` for stacked transforms."""
    Rt = np.swapaxes(R, -1, -2)
    out = np.zeros(R.shape[:-2] + (6, 6))
    out[..., :3, :3] = Rt
    out[..., 3:, 3:] = Rt
    out[..., 3:, :3] = -Rt @ skew_batch(p)
    return out


def adjoint_batch(R, p) -> np.ndarray:
    out = np.zeros(R.shape[:-2] + (6, 6))
    out[..., :3, :3] = R
    out[..., 3:, 3:] = R
    out[..., 3:, :3] = skew_batch(p) @ R
    return out


def ad_batch(V) -> np.ndarray:
    w = skew_batch(V[..., :3])
    out = np.zeros(V.shape[:-1] + (6, 6))
    out[..., :3, :3] = w
    out[..., 3:, 3:] = w
    out[..., 3:, :3] = skew_batch(V[..., 3:])
    return out


def _mv(A, x):
    return np.einsum("nij,nj->ni", A, x)


def _mtv(A, x):
    return np.einsum("nji,nj->ni", A, x)


# einsum rather than @ in the recursions keeps each row's result independent
# of the batch size, so chunked and threaded evaluation is bit-identical.
def _cv(M, x):
    return np.einsum("ij,nj->ni", M, x)


def _mvc(A, v):
    return np.einsum("nij,j->ni", A, v)


# --- kinematics -------------------------------------------------------------------


class BatchFrames(NamedTuple):
    rotation: np.ndarray  # (N, n, 3, 3) base -> link i
    translation: np.ndarray  # (N, n, 3)
    ad_inv: np.ndarray  # (N, n, 6, 6) Ad(f_{i-1,i}^-1)


class BatchMotion(NamedTuple):
    frames: BatchFrames
    twists: np.ndarray  # (N, n, 6)
    accels: np.ndarray  # (N, n, 6)


def link_frames_batch(model: RobotModel, q) -> BatchFrames:
    q = _rows(q, model.n)
    N, n = q.shape
    rot = np.empty((N, n, 3, 3))
    trans = np.empty((N, n, 3))
    ad_inv = np.empty((N, n, 6, 6))
    R = np.broadcast_to(_I3, (N, 3, 3))
    p = np.zeros((N, 3))
    for i, joint in enumerate(model.joints):
        home = joint.parent_to_child_home
        Re, pe = exp_se3_batch(joint.body_screw, q[:, i])
        Rf = home.rotation @ Re
        pf = pe @ home.rotation.T + home.translation
        ad_inv[:, i] = inverse_adjoint_batch(Rf, pf)
        R, p = compose(R, p, Rf, pf)
        rot[:, i] = R
        trans[:, i] = p
    return BatchFrames(rot, trans, ad_inv)


def propagate_batch(model: RobotModel, q, qd, qdd, base_accel=None) -> BatchMotion:
    n = model.n
    q, qd, qdd = (_rows(a, n) for a in (q, qd, qdd))
    N = q.shape[0]
    frames = link_frames_batch(model, q)
    V = np.zeros((N, 6))
    dV = np.zeros((N, 6)) if base_accel is None else np.tile(np.asarray(base_accel, dtype=float), (N, 1))
    twists = np.empty((N, n, 6))
    accels = np.empty((N, n, 6))
    for i, joint in enumerate(model.joints):
        s = joint.body_screw
        Ad = frames.ad_inv[:, i]
        V = _mv(Ad, V) + qd[:, i, None] * s
        dV = _mv(Ad, dV) + qd[:, i, None] * _mvc(ad_batch(V), s) + qdd[:, i, None] * s
        twists[:, i] = V
        accels[:, i] = dV
    return BatchMotion(frames, twists, accels)


# --- inverse dynamics ---------------------------------------------------------


def _base_accel(model: RobotModel, gravity):
    g = model.gravity if gravity is None else float(gravity)
    out = np.zeros(6)
    out[3:] = model.base_pose.rotation.T @ np.array([0.0, 0.0, g])
    return out


def _wrench_sweep(inertias, twists, accels, ad_inv, screws) -> np.ndarray:
    N, n = twists.shape[:2]
    tau = np.empty((N, n))
    F = np.zeros((N, 6))
    for i in range(n - 1, -1, -1):
        J = inertias[i]
        V = twists[:, i]
        F_i = _cv(J, accels[:, i]) - _mtv(ad_batch(V), _cv(J, V))
        if i + 1 < n:
            F_i += _mtv(ad_inv[:, i + 1], F)
        F = F_i
        tau[:, i] = np.einsum("nj,j->n", F, screws[i])
    return tau


def rnea_batch(model: RobotModel, q, qd, qdd, gravity=None) -> np.ndarray:
    """Recursive Newton-Euler torques over link frames, shape (N, n)."""
    model = as_robot(model)
    model.require_inertia()
    inertias = [spatial_inertia(lk) for lk in model.links]
    motion = propagate_batch(model, q, qd, qdd, _base_accel(model, gravity))
    return _wrench_sweep(inertias, motion.twists, motion.accels, motion.frames.ad_inv,
                         [j.body_screw for j in model.joints])


def poe_batch(model: RobotModel, q, qd, qdd, gravity=None) -> np.ndarray:
    """Newton-Euler torques from space screw axes and home poses only, shape (N, n)."""
    model = as_robot(model)
    model.require_inertia()
    n = model.n
    q, qd, qdd = (_rows(a, n) for a in (q, qd, qdd))
    N = q.shape[0]
    inertias = [spatial_inertia(lk) for lk in model.links]
    screws = []
    ads = np.empty((N, n, 6, 6))
    prev_R, prev_p = _I3, np.zeros(3)
    for i, joint in enumerate(model.joints):
        home = joint.home_pose_space
        if home is None:
            raise MissingHomePose("PoE dynamics needs a home pose for every joint")
        Rh, ph = home.rotation, home.translation
        w, v = joint.space_screw[:3], joint.space_screw[3:]
        # A = Ad(M_i^-1) S_i
        A = np.concatenate([Rh.T @ w, Rh.T @ (v - np.cross(ph, w))])
        # inverse of the relative home pose M_{i-1,i}
        Rr = prev_R.T @ Rh
        pr = prev_R.T @ (ph - prev_p)
        Ri, pi = Rr.T, -Rr.T @ pr
        Re, pe = exp_se3_batch(-A, q[:, i])
        R, p = Re @ Ri, pe + Re @ pi
        ads[:, i] = adjoint_batch(R, p)
        screws.append(A)
        prev_R, prev_p = Rh, ph
    V = np.zeros((N, 6))
    dV = np.tile(_base_accel(model, gravity), (N, 1))
    twists = np.empty((N, n, 6))
    accels = np.empty((N, n, 6))
    for i, A in enumerate(screws):
        V = _mv(ads[:, i], V) + qd[:, i, None] * A
        dV = _mv(ads[:, i], dV) + qd[:, i, None] * _mvc(ad_batch(V), A) + qdd[:, i, None] * A
        twists[:, i] = V
        accels[:, i] = dV
    return _wrench_sweep(inertias, twists, accels, ads, screws)


def matrix_form_batch(model: RobotModel, q, qd, qdd, gravity=None, chunk: int = 256):
    """Stacked-operator torques ``M qdd + C qd + phi`` for many states.

    Returns ``(tau, M, C, phi)`` with shapes (N, n), (N, n, n), (N, n, n), (N, n).
    """
    model = as_robot(model)
    model.require_inertia()
    n = model.n
    q, qd, qdd = (_rows(a, n) for a in (q, qd, qdd))
    N = q.shape[0]
    J = np.zeros((6 * n, 6 * n))
    S = np.zeros((6 * n, n))
    for i, (joint, lk) in enumerate(zip(model.joints, model.links)):
        J[6 * i: 6 * i + 6, 6 * i: 6 * i + 6] = spatial_inertia(lk)
        S[6 * i: 6 * i + 6, i] = joint.body_screw
    dV0 = _base_accel(model, gravity)
    M_all = np.empty((N, n, n))
    C_all = np.empty((N, n, n))
    phi_all = np.empty((N, n))
    for start in range(0, N, chunk):
        sl = slice(start, start + chunk)
        Nc = q[sl].shape[0]
        ad_inv = link_frames_batch(model, q[sl]).ad_inv
        Gamma = np.zeros((Nc, 6 * n, 6 * n))
        G = np.zeros((Nc, 6 * n, 6 * n))
        for i in range(n):
            b = slice(6 * i, 6 * i + 6)
            G[:, b, b] = _I6
            if i > 0:
                Gamma[:, b, 6 * (i - 1): 6 * i] = ad_inv[:, i]
                G[:, b, : 6 * i] = ad_inv[:, i] @ G[:, 6 * (i - 1): 6 * i, : 6 * i]
        GS = G @ S
        GSt = np.swapaxes(GS, -1, -2)
        V = GS @ qd[sl][..., None]
        A = np.zeros_like(G)
        B = np.zeros_like(G)
        for i, joint in enumerate(model.joints):
            b = slice(6 * i, 6 * i + 6)
            w = -skew_batch(qd[sl][:, i, None] * joint.body_screw[:3])
            A[:, b.start: b.start + 3, b.start: b.start + 3] = w
            A[:, b.start + 3: b.stop, b.start + 3: b.stop] = w
            B[:, b, b] = np.swapaxes(ad_batch(V[:, b, 0]), -1, -2)
        M = GSt @ J @ GS
        C = GSt @ (J @ G @ A @ Gamma - B @ J) @ GS
        phi = (GSt @ J @ G[:, :, :6] @ (ad_inv[:, 0] @ dV0)[..., None])[..., 0]
        M_all[sl], C_all[sl], phi_all[sl] = M, C, phi
    tau = np.einsum("nij,nj->ni", M_all, qdd) + np.einsum("nij,nj->ni", C_all, qd) + phi_all
    return tau, M_all, C_all, phi_all


BATCH_METHODS = {
    "dh-matrix": lambda m, q, qd, qdd, g: matrix_form_batch(m, q, qd, qdd, g)[0],
    "dh-recursive": rnea_batch,
    "poe": poe_batch,
}


# --- energy -------------------------------------------------------------------


def kinetic_energy_batch(model: RobotModel, q, qd) -> np.ndarray:
    model = as_robot(model)
    n = model.n
    q, qd = _rows(q, n), _rows(qd, n)
    motion = propagate_batch(model, q, qd, np.zeros_like(qd))
    total = np.zeros(q.shape[0])
    for i, lk in enumerate(model.links):
        w, v = motion.twists[:, i, :3], motion.twists[:, i, 3:]
        vc = v + np.cross(w, lk.com)
        total += 0.5 * (lk.mass * np.einsum("ni,ni->n", vc, vc) + np.einsum("ni,ij,nj->n", w, lk.inertia_com, w))
    return total


def potential_energy_batch(model: RobotModel, q, gravity=None) -> np.ndarray:
    model = as_robot(model)
    g = model.gravity if gravity is None else gravity
    frames = link_frames_batch(model, q)
    Rb, pb = model.base_pose.rotation, model.base_pose.translation
    total = np.zeros(frames.rotation.shape[0])
    for i, lk in enumerate(model.links):
        c = frames.rotation[:, i] @ lk.com + frames.translation[:, i]
        total += lk.mass * g * (c @ Rb[2] + pb[2])
    return total


# --- bearing ------------------------------------------------------------------


class BatchBodies(NamedTuple):
    """Arm-link COM data in each link's own frame, arrays of shape (N, n, 3)."""

    r: np.ndarray
    r_dot: np.ndarray
    r_ddot: np.ndarray
    omega: np.ndarray
    omega_dot: np.ndarray
    to_inertial: np.ndarray  # (N, n, 3, 3) body -> N rotation


def arm_bodies_batch(platform: PlatformModel, q, qd, qdd) -> BatchBodies:
    arm = platform.arm
    motion = propagate_batch(arm, q, qd, qdd)
    base = platform.platform_attitude @ platform.bearing_to_arm_base
    R = base.rotation @ motion.frames.rotation
    p = motion.frames.translation @ base.rotation.T + base.translation
    c = np.array([lk.com for lk in arm.links])
    w, v = motion.twists[..., :3], motion.twists[..., 3:]
    dw, dv = motion.accels[..., :3], motion.accels[..., 3:]
    r = np.einsum("nkji,nkj->nki", R, p) + c
    vel = v + np.cross(w, c)
    acc = dv + np.cross(w, v) + np.cross(dw, c) + np.cross(w, np.cross(w, c))
    r_dot = vel - np.cross(w, r)
    r_ddot = acc - np.cross(w, vel) - np.cross(dw, r) - np.cross(w, r_dot)
    return BatchBodies(r, r_dot, r_ddot, w, dw, R)


def _inertia_terms(platform: PlatformModel):
    links = platform.arm.links
    return np.array([lk.mass for lk in links]), np.array([lk.inertia_com for lk in links])


def _parallel_axis(I_c, m, r):
    # I_c + m [r]x [r]x^T = I_c + m ((r.r) I - r r^T)
    rr = np.einsum("nki,nki->nk", r, r)
    return I_c + m[:, None, None] * (rr[..., None, None] * _I3 - np.einsum("nki,nkj->nkij", r, r))


def _box_gravity(platform: PlatformModel) -> np.ndarray:
    box = platform.platform_attitude @ platform.bearing_to_box
    r_n = box.apply(platform.control_box.com)
    return np.cross(r_n, [0.0, 0.0, -platform.control_box.mass * platform.gravity])


def bearing_momentum_batch(platform: PlatformModel, q, qd, include_translational_momentum=False) -> np.ndarray:
    """Summed bearing angular momentum in N, shape (N, 3).  The box is at rest."""
    b = arm_bodies_batch(platform, q, qd, np.zeros_like(np.asarray(qd, dtype=float)))
    m, I_c = _inertia_terms(platform)
    H = np.einsum("nkij,nkj->nki", _parallel_axis(I_c, m, b.r), b.omega)
    if include_translational_momentum:
        H = H + m[:, None] * np.cross(b.r, b.r_dot)
    return np.einsum("nkij,nkj->ni", b.to_inertial, H)


def bearing_torque_batch(platform: PlatformModel, q, qd, qdd, include_translational_momentum=False):
    """Dynamic and gravitational bearing torques in N, each of shape (N, 3)."""
    b = arm_bodies_batch(platform, q, qd, qdd)
    m, I_c = _inertia_terms(platform)
    w = b.omega
    I_o = _parallel_axis(I_c, m, b.r)
    rx, rdx = skew_batch(b.r), skew_batch(b.r_dot)
    I_o_dot = m[:, None, None] * (rdx @ np.swapaxes(rx, -1, -2) + rx @ np.swapaxes(rdx, -1, -2))
    H = np.einsum("nkij,nkj->nki", I_o, w)
    dH = np.einsum("nkij,nkj->nki", I_o_dot, w) + np.einsum("nkij,nkj->nki", I_o, b.omega_dot)
    if include_translational_momentum:
        H = H + m[:, None] * np.cross(b.r, b.r_dot)
        dH = dH + m[:, None] * np.cross(b.r, b.r_ddot)
    dH = dH + np.cross(w, H)
    dynamic = np.einsum("nkij,nkj->ni", b.to_inertial, dH)
    r_n = np.einsum("nkij,nkj->nki", b.to_inertial, b.r)
    weight = np.zeros((len(m), 3))
    weight[:, 2] = -m * platform.gravity
    grav = np.cross(r_n, weight).sum(axis=1) + _box_gravity(platform)
    return dynamic, grav
