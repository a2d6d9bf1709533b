"""Inverse dynamics of a serial arm.

Three routes to the same joint torques:

* ``inverse_dynamics_matrix``: stacked 6n x 6n operators, ``M = S^T G^T J G S``
  and friends (readable reference path);
* ``inverse_dynamics_recursive``: two-pass Newton-Euler over the link frames;
* ``inverse_dynamics_poe``: Newton-Euler driven only by space-frame screw axes
  and home poses (product-of-exponentials parameterization).

Gravity enters as an upward base acceleration ``[0, 0, 0, 0, 0, g]`` in the
world frame, so a positive ``g`` pulls the links along -z.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np

from .batch import BATCH_METHODS
from .errors import MissingHomePose
from .kinematics import JointState, link_frames_dh, propagate
from .model import RobotModel, as_robot, spatial_inertia
from .spatial import RigidTransform, ad, ad_dual, ad_small, adjoint, exp_se3

FrictionModel = Callable[[JointState], np.ndarray]


@lru_cache(maxsize=64)
def _inertias(model: RobotModel) -> tuple:
    model.require_inertia()
    return tuple(spatial_inertia(lk) for lk in model.links)


def base_acceleration(model: RobotModel, gravity: float | None = None) -> np.ndarray:
    """Fictitious base acceleration that injects gravity, in base coordinates."""
    g = model.gravity if gravity is None else float(gravity)
    out = np.zeros(6)
    out[3:] = model.base_pose.rotation.T @ np.array([0.0, 0.0, g])
    return out


def _as_state(state) -> JointState:
    return state if isinstance(state, JointState) else JointState(*state)


def _add_friction(tau, state, friction):
    if friction is None:
        return tau
    return tau + np.asarray(friction(state), dtype=float)


# --- stacked operator form ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class StackedOperators:
    S: np.ndarray  # 6n x n
    J: np.ndarray  # 6n x 6n
    Gamma: np.ndarray  # 6n x 6n, blocks Ad(f_{i-1,i}^-1) on the subdiagonal
    G: np.ndarray  # (I - Gamma)^-1
    P0: np.ndarray  # 6n x 6


@dataclass(frozen=True, eq=False)
class DynamicsDecomposition:
    mass_matrix: np.ndarray
    coriolis_matrix: np.ndarray
    gravity_vector: np.ndarray
    torque: np.ndarray


def build_operators(model: RobotModel, q) -> StackedOperators:
    model = as_robot(model)
    n = model.n
    frames = link_frames_dh(model, q)
    ads = [adjoint(f.inverse()) for f in frames.relative]

    S = np.zeros((6 * n, n))
    Gamma = np.zeros((6 * n, 6 * n))
    J = np.zeros((6 * n, 6 * n))
    for i, (joint, Ji) in enumerate(zip(model.joints, _inertias(model))):
        b = slice(6 * i, 6 * i + 6)
        S[b, i] = joint.body_screw
        J[b, b] = Ji
        if i > 0:
            Gamma[b, 6 * (i - 1): 6 * i] = ads[i]

    # Gamma is nilpotent, so G = I + Gamma + ... + Gamma^(n-1) is exact; build
    # it block by block: G_ii = I, G_ij = Ad_i G_(i-1)j.
    G = np.zeros((6 * n, 6 * n))
    for i in range(n):
        b = slice(6 * i, 6 * i + 6)
        G[b, b] = np.eye(6)
        if i > 0:
            G[b, : 6 * i] = ads[i] @ G[6 * (i - 1): 6 * i, : 6 * i]

    P0 = np.zeros((6 * n, 6))
    P0[:6] = ads[0]
    return StackedOperators(S, J, Gamma, G, P0)


def _coriolis(ops: StackedOperators, model: RobotModel, qd) -> np.ndarray:
    V = ops.G @ ops.S @ qd
    A = np.zeros_like(ops.J)
    B = np.zeros_like(ops.J)
    for i, joint in enumerate(model.joints):
        b = slice(6 * i, 6 * i + 6)
        A[b, b] = ad_small(joint.body_screw * qd[i])
        B[b, b] = ad_dual(V[b])
    # ad_dual(V) = ad(V)^T, and the velocity-product wrench is -ad(V)^T J V,
    # hence the minus sign on the second term.
    GS = ops.G @ ops.S
    inner = ops.J @ ops.G @ A @ ops.Gamma - B @ ops.J
    return GS.T @ inner @ GS


def mass_matrix(model: RobotModel, q) -> np.ndarray:
    ops = build_operators(model, q)
    GS = ops.G @ ops.S
    return GS.T @ ops.J @ GS


def coriolis_matrix(model: RobotModel, q, qd) -> np.ndarray:
    model = as_robot(model)
    qd = np.asarray(qd, dtype=float)
    return _coriolis(build_operators(model, q), model, qd)


def gravity_vector(model: RobotModel, q, gravity: float | None = None) -> np.ndarray:
    model = as_robot(model)
    ops = build_operators(model, q)
    GS = ops.G @ ops.S
    return GS.T @ ops.J @ ops.G @ ops.P0 @ base_acceleration(model, gravity)


def inverse_dynamics_matrix(model: RobotModel, state, gravity: float | None = None,
                            friction: FrictionModel | None = None) -> DynamicsDecomposition:
    """``tau = M(q) qdd + C(q, qd) qd + phi(q)`` from the stacked operators."""
    model = as_robot(model)
    state = _as_state(state)
    ops = build_operators(model, state.q)
    GS = ops.G @ ops.S
    M = GS.T @ ops.J @ GS
    C = _coriolis(ops, model, state.qd)
    phi = GS.T @ ops.J @ ops.G @ ops.P0 @ base_acceleration(model, gravity)
    tau = M @ state.qdd + C @ state.qd + phi
    return DynamicsDecomposition(M, C, phi, _add_friction(tau, state, friction))


# --- recursive Newton-Euler (link frames) ------------------------------------


def inverse_dynamics_recursive(model: RobotModel, state, gravity: float | None = None,
                               friction: FrictionModel | None = None) -> np.ndarray:
    """O(n) Newton-Euler: forward pass for twists, backward pass for wrenches."""
    model = as_robot(model)
    state = _as_state(state)
    inertias = _inertias(model)
    motion = propagate(model, state.q, state.qd, state.qdd, base_acceleration(model, gravity))
    n = model.n
    tau = np.empty(n)
    F = np.zeros(6)
    for i in range(n - 1, -1, -1):
        Ji = inertias[i]
        V = motion.twists[i]
        F_i = Ji @ motion.accels[i] - ad(V).T @ (Ji @ V)
        if i + 1 < n:
            F_i += adjoint(motion.frames.relative[i + 1].inverse()).T @ F
        F = F_i
        tau[i] = model.joints[i].body_screw @ F
    return _add_friction(tau, state, friction)


# --- product of exponentials -------------------------------------------------


class PoEDynamics(NamedTuple):
    torque: np.ndarray
    mass_matrix: np.ndarray
    bias: np.ndarray


class _PoEChain:
    """Per-configuration data of the PoE recursion.

    Body screws ``A_i = Ad(M_i^-1) S_i`` and ``T_{i,i-1}(theta) =
    exp(-[A_i] theta_i) M_{i-1,i}^-1`` are derived from space-frame data only.
    """

    def __init__(self, model: RobotModel, theta):
        self.model = model
        self.inertias = _inertias(model)
        self.screws = []
        self.ads = []  # Ad(T_{i,i-1})
        prev_home = RigidTransform.identity()
        for joint, th in zip(model.joints, theta):
            home = joint.home_pose_space
            if home is None:
                raise MissingHomePose("PoE dynamics needs a home pose for every joint")
            A = adjoint(home.inverse()) @ joint.space_screw
            rel_home = prev_home.inverse() @ home
            T = exp_se3(-A, th) @ rel_home.inverse()
            self.screws.append(A)
            self.ads.append(adjoint(T))
            prev_home = home

    def torques(self, dtheta, ddtheta, base_accel) -> np.ndarray:
        n = len(self.screws)
        V = np.zeros(6)
        dV = base_accel
        Vs, dVs = [], []
        for A, Ad, thd, thdd in zip(self.screws, self.ads, dtheta, ddtheta):
            V = Ad @ V + A * thd
            dV = Ad @ dV + ad(V) @ A * thd + A * thdd
            Vs.append(V)
            dVs.append(dV)
        tau = np.empty(n)
        F = np.zeros(6)
        for i in range(n - 1, -1, -1):
            Gi = self.inertias[i]
            F_new = Gi @ dVs[i] - ad(Vs[i]).T @ (Gi @ Vs[i])
            if i + 1 < n:
                F_new += self.ads[i + 1].T @ F
            F = F_new
            tau[i] = F @ self.screws[i]
        return tau


def inverse_dynamics_poe(model: RobotModel, state, gravity: float | None = None,
                         friction: FrictionModel | None = None) -> PoEDynamics:
    """``tau = M(theta) theta_dd + h(theta, theta_d)`` from screw axes and home poses.

    ``bias`` is the torque at zero acceleration; with no friction model it holds
    the Coriolis, centripetal and gravity terms only.
    """
    model = as_robot(model)
    state = _as_state(state)
    chain = _PoEChain(model, state.q)
    n = model.n
    zeros = np.zeros(n)
    g_accel = base_acceleration(model, gravity)
    M = np.empty((n, n))
    for j in range(n):
        M[:, j] = chain.torques(zeros, np.eye(n)[j], np.zeros(6))
    bias = _add_friction(chain.torques(state.qd, zeros, g_accel), state, friction)
    tau = _add_friction(chain.torques(state.qd, state.qdd, g_accel), state, friction)
    return PoEDynamics(tau, M, bias)


# --- dispatch ----------------------------------------------------------------

METHODS = ("dh-matrix", "dh-recursive", "poe")


def joint_torques(model: RobotModel, state, method: str = "dh-recursive", gravity=None, friction=None) -> np.ndarray:
    if method == "dh-matrix":
        return inverse_dynamics_matrix(model, state, gravity, friction).torque
    if method == "dh-recursive":
        return inverse_dynamics_recursive(model, state, gravity, friction)
    if method == "poe":
        return inverse_dynamics_poe(model, state, gravity, friction).torque
    raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


def inverse_dynamics_batch(model: RobotModel, q, qd, qdd, method: str = "dh-recursive",
                           workers: int | None = None, gravity=None, chunk: int = 2048) -> np.ndarray:
    """Torques for a batch of states (rows of ``q``, ``qd``, ``qdd``), shape (N, n).

    Vectorized over the states.  Rows are split into fixed-size chunks; with
    ``workers > 1`` the chunks run in a thread pool.  Each row's result is
    independent of the chunking and worker count, bit for bit.
    """
    if method not in BATCH_METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    model = as_robot(model)
    q, qd, qdd = (np.atleast_2d(np.asarray(a, dtype=float)) for a in (q, qd, qdd))
    fn = BATCH_METHODS[method]

    def one(start):
        sl = slice(start, start + chunk)
        return fn(model, q[sl], qd[sl], qdd[sl], gravity)

    starts = range(0, q.shape[0], chunk)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one, starts))
    else:
        parts = [one(k) for k in starts]
    return np.vstack(parts) if parts else np.zeros((0, model.n))
