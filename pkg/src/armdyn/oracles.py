"""Independent numerical cross-checks of the dynamics code.

The energy and momentum oracles use only kinematics (poses and twists) plus
the raw link parameters; they never call the torque routines they check.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import batch
from .dynamics import inverse_dynamics_recursive
from .kinematics import JointState, body_twists, link_frames_dh
from .model import LinkParams, PlatformModel, RobotModel, as_robot
from .spatial import RigidTransform

FD_STEP = 1e-6

TrajectoryFn = Callable[[float], object]  # t -> sample with q, qd, qdd


@dataclass
class OracleReport:
    name: str
    max_abs_error: float
    rel_error: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, default=float)


def _relative(max_err: float, scale: float) -> float:
    if max_err == 0.0:
        return 0.0
    return max_err / scale if scale > 0 else math.inf


def _report(name, max_err, rel, tol, details=None) -> OracleReport:
    return OracleReport(name, float(max_err), float(rel), tol, bool(rel <= tol), details or {})


# --- pendulum ---------------------------------------------------------------------


def pendulum_model(m: float, l: float, I_yy: float = 0.0, g: float = 9.80665) -> RobotModel:
    """One revolute joint about -y at the origin, COM at distance ``l`` along x.

    A positive angle lifts the mass, so the angle is measured up from the
    horizontal and the hanging rest position is ``q = -pi/2``.
    """
    link = LinkParams(m, [l, 0.0, 0.0], np.diag([I_yy, I_yy, I_yy]))
    return RobotModel.from_chain([RigidTransform.identity()], [[0.0, -1.0, 0.0]], [link], g, name="pendulum")


def pendulum_reference(m, l, I_yy, g, q, qd=0.0, qdd=0.0) -> float:
    return (I_yy + m * l * l) * qdd + m * g * l * math.cos(q)


# --- mass matrix ------------------------------------------------------------------


def fd_mass_matrix(model: RobotModel, q) -> np.ndarray:
    """Mass matrix probed column by column with unit accelerations, no gravity."""
    model = as_robot(model)
    n = model.n
    M = np.empty((n, n))
    zeros = np.zeros(n)
    for j in range(n):
        M[:, j] = inverse_dynamics_recursive(model, JointState(q, zeros, np.eye(n)[j]), gravity=0.0)
    return M


def mass_matrix_check(model: RobotModel, count: int = 100, seed: int = 0, tol: float = 1e-10) -> OracleReport:
    """Symmetry, Cholesky and probe reconstruction of ``M(q)`` at random ``q``.

    The probe takes column j of ``M`` as the recursive Newton-Euler torque for
    a unit acceleration of joint j with zero velocity and no gravity.
    """
    model = as_robot(model)
    n = model.n
    rng = np.random.default_rng(seed)
    q = rng.uniform(-math.pi, math.pi, (count, n))
    M = batch.matrix_form_batch(model, q, np.zeros_like(q), np.zeros_like(q))[1]
    qq = np.repeat(q, n, axis=0)
    probe = batch.rnea_batch(model, qq, np.zeros_like(qq), np.tile(np.eye(n), (count, 1)), gravity=0.0)
    probe = np.swapaxes(probe.reshape(count, n, n), 1, 2)
    scale = np.maximum(1.0, np.max(np.abs(M), axis=(1, 2)))
    asym = float(np.max(np.max(np.abs(M - np.swapaxes(M, 1, 2)), axis=(1, 2)) / scale)) if count else 0.0
    not_pd = 0
    for Mk in M:
        try:
            np.linalg.cholesky(Mk)
        except np.linalg.LinAlgError:
            not_pd += 1
    worst = float(np.max(np.abs(M - probe))) if count else 0.0
    metric = max(worst, asym) if not not_pd else math.inf
    return OracleReport(
        "mass_matrix", worst, metric, tol, metric <= tol,
        {"configurations": count, "max_relative_asymmetry": asym, "cholesky_failures": not_pd},
    )


def equivalence_check(model: RobotModel, count: int = 200, seed: int = 0, tol: float = 1e-8) -> OracleReport:
    """Matrix, recursive and PoE torques on the same random states."""
    model = as_robot(model)
    rng = np.random.default_rng(seed)
    q, qd, qdd = rng.uniform(-math.pi, math.pi, (3, count, model.n))
    a, b, c = (batch.BATCH_METHODS[m](model, q, qd, qdd, None) for m in ("dh-matrix", "dh-recursive", "poe"))
    mat_rec = float(np.max(np.abs(a - b))) if count else 0.0
    rec_poe = float(np.max(np.abs(b - c))) if count else 0.0
    worst = max(mat_rec, rec_poe)
    return _report("method_equivalence", worst, worst, tol,
                   {"states": count, "matrix_vs_recursive": mat_rec, "recursive_vs_poe": rec_poe})


# --- energy -----------------------------------------------------------------------


def kinetic_energy(model: RobotModel, q, qd) -> float:
    model = as_robot(model)
    total = 0.0
    for link, V in zip(model.links, body_twists(model, q, qd)):
        w, v = V[:3], V[3:]
        vc = v + np.cross(w, link.com)
        total += 0.5 * (link.mass * vc @ vc + w @ link.inertia_com @ w)
    return float(total)


def potential_energy(model: RobotModel, q, gravity: float | None = None) -> float:
    """Sum of ``m g z`` over link COMs, z measured in the world frame."""
    model = as_robot(model)
    g = model.gravity if gravity is None else gravity
    frames = link_frames_dh(model, q)
    total = 0.0
    for link, T in zip(model.links, frames.absolute):
        z = (model.base_pose @ T).apply(link.com)[2]
        total += link.mass * g * z
    return float(total)


def mechanical_energy(model: RobotModel, q, qd) -> float:
    return kinetic_energy(model, q, qd) + potential_energy(model, q)


def _sample_arrays(trajectory: TrajectoryFn, times):
    samples = [trajectory(float(t)) for t in times]
    if not samples:
        return None
    return tuple(np.array([getattr(x, k) for x in samples], dtype=float) for k in ("q", "qd", "qdd"))


def power_balance_check(model: RobotModel, trajectory: TrajectoryFn, times, step: float = FD_STEP,
                        tol: float = 1e-5, torque_fn=None) -> OracleReport:
    """Compare joint power ``qd . tau`` with a central difference of total energy.

    ``torque_fn(model, q, qd, qdd)`` maps (N, n) arrays to (N, n) torques; the
    recursive Newton-Euler batch is the default.  The residual at each sample
    is normalised by the largest joint power along the trajectory.
    """
    model = as_robot(model)
    torque_fn = torque_fn or batch.rnea_batch
    times = np.asarray(times, dtype=float)
    now = _sample_arrays(trajectory, times)
    if now is None:
        return _report("power_balance", 0.0, 0.0, tol, {"samples": 0, "max_power": 0.0, "step": step})
    hi = _sample_arrays(trajectory, times + step)
    lo = _sample_arrays(trajectory, times - step)
    tau = torque_fn(model, *now)
    power = np.einsum("ni,ni->n", now[1], tau)

    def energy(arrs):
        return batch.kinetic_energy_batch(model, arrs[0], arrs[1]) + batch.potential_energy_batch(model, arrs[0])

    dE = (energy(hi) - energy(lo)) / (2 * step)
    resid = np.abs(power - dE)
    max_err = float(resid.max())
    scale = float(np.abs(power).max())
    return _report("power_balance", max_err, _relative(max_err, scale), tol,
                   {"samples": int(resid.size), "max_power": scale, "step": step})


# --- bearing momentum ---------------------------------------------------------


def fd_momentum_check(platform: PlatformModel, trajectory: TrajectoryFn, times, step: float = FD_STEP,
                      tol: float = 1e-5, include_translational_momentum: bool = False,
                      dynamic_fn=None) -> OracleReport:
    """Analytic dynamic bearing torque vs central difference of summed momentum.

    ``dynamic_fn(q, qd, qdd)`` maps (N, n) arrays to (N, 3) torques in N; the
    analytic bearing model is the default.
    """
    tm = include_translational_momentum

    def analytic(q, qd, qdd):
        return batch.bearing_torque_batch(platform, q, qd, qdd, tm)[0]

    dynamic_fn = dynamic_fn or analytic
    times = np.asarray(times, dtype=float)
    now = _sample_arrays(trajectory, times)
    if now is None:
        errs = refs = np.zeros((0, 3))
    else:
        hi = _sample_arrays(trajectory, times + step)
        lo = _sample_arrays(trajectory, times - step)
        an = np.asarray(dynamic_fn(*now), dtype=float).reshape(-1, 3)
        fd = (batch.bearing_momentum_batch(platform, hi[0], hi[1], tm)
              - batch.bearing_momentum_batch(platform, lo[0], lo[1], tm)) / (2 * step)
        errs = np.abs(an - fd)
        refs = np.abs(an)
    max_err = float(errs.max()) if errs.size else 0.0
    scale = float(refs.max()) if refs.size else 0.0
    return _report("fd_momentum", max_err, _relative(max_err, scale), tol,
                   {"samples": len(errs), "max_torque": scale, "step": step,
                    "per_axis_max": errs.max(axis=0).tolist() if errs.size else [0.0, 0.0, 0.0],
                    "translational_momentum": tm})
