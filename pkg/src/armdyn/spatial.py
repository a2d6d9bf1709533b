"""Screw-theory primitives on SE(3).

Every 6-vector in this package is ordered angular-first, ``[omega; v]``, both
for twists and for screw axes.  Wrenches are ordered ``[moment; force]`` so
that the pairing ``F @ V`` is power.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonUnitAxis, NonUnitScrew

UNIT_TOL = 1e-9
SMALL_ANGLE = 1e-9

_I3 = np.eye(3)


def skew(v) -> np.ndarray:
    """Return the 3x3 matrix ``[v]`` with ``[v] @ w == cross(v, w)``."""
    x, y, z = (float(c) for c in v)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def unskew(m) -> np.ndarray:
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def se3_hat(screw) -> np.ndarray:
    """4x4 matrix representation ``[[skew(w), v], [0, 0]]`` of a twist."""
    screw = np.asarray(screw, dtype=float)
    out = np.zeros((4, 4))
    out[:3, :3] = skew(screw[:3])
    out[:3, 3] = screw[3:]
    return out


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """Element of SE(3) as a rotation/translation pair."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.array(self.rotation, dtype=float).reshape(3, 3)
        p = np.array(self.translation, dtype=float).reshape(3)
        r.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", p)

    @classmethod
    def identity(cls) -> RigidTransform:
        return cls(_I3, np.zeros(3))

    @classmethod
    def from_matrix(cls, m) -> RigidTransform:
        m = np.asarray(m, dtype=float)
        return cls(m[:3, :3], m[:3, 3])

    @classmethod
    def from_translation(cls, p) -> RigidTransform:
        return cls(_I3, p)

    @property
    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def inverse(self) -> RigidTransform:
        rt = self.rotation.T
        return RigidTransform(rt, -rt @ self.translation)

    def __matmul__(self, other: RigidTransform) -> RigidTransform:
        if not isinstance(other, RigidTransform):
            return NotImplemented
        r = self.rotation
        return RigidTransform(r @ other.rotation, r @ other.translation + self.translation)

    def apply(self, points) -> np.ndarray:
        """Map point(s) of shape (3,) or (k, 3) through the transform."""
        points = np.asarray(points, dtype=float)
        return points @ self.rotation.T + self.translation

    def orthonormality_error(self) -> float:
        r = self.rotation
        return float(np.max(np.abs(r.T @ r - _I3)))

    def is_valid(self, tol: float = 1e-12) -> bool:
        return (
            bool(np.all(np.isfinite(self.matrix)))
            and self.orthonormality_error() <= tol
            and abs(np.linalg.det(self.rotation) - 1.0) <= tol
        )

    def __repr__(self):
        return f"RigidTransform(rotation={self.rotation.tolist()}, translation={self.translation.tolist()})"


def _trig_terms(theta: float):
    """Return ``(sin t, 1 - cos t, t - sin t)`` without cancellation near zero."""
    if abs(theta) < SMALL_ANGLE:
        t2 = theta * theta
        return theta, 0.5 * t2, theta * t2 / 6.0
    s = np.sin(theta)
    one_minus_cos = 2.0 * np.sin(0.5 * theta) ** 2
    return s, one_minus_cos, theta - s


def exp_so3(omega, theta: float) -> np.ndarray:
    """Rotation by ``theta`` about the unit axis ``omega`` (Rodrigues)."""
    theta = float(theta)
    if theta == 0.0:
        return _I3.copy()
    omega = np.asarray(omega, dtype=float)
    if abs(np.linalg.norm(omega) - 1.0) > UNIT_TOL:
        raise NonUnitAxis(f"rotation axis {omega.tolist()} is not unit length")
    k = skew(omega)
    s, c1, _ = _trig_terms(theta)
    return _I3 + s * k + c1 * (k @ k)


def exp_se3(screw, theta: float) -> RigidTransform:
    """Closed-form ``exp([S] theta)`` for a unit screw axis."""
    theta = float(theta)
    screw = np.asarray(screw, dtype=float)
    if theta == 0.0:
        return RigidTransform.identity()
    omega, v = screw[:3], screw[3:]
    wn = np.linalg.norm(omega)
    if abs(wn - 1.0) <= UNIT_TOL:
        k = skew(omega)
        k2 = k @ k
        s, c1, ts = _trig_terms(theta)
        rot = _I3 + s * k + c1 * k2
        p = (theta * _I3 + c1 * k + ts * k2) @ v
        return RigidTransform(rot, p)
    if wn == 0.0 and abs(np.linalg.norm(v) - 1.0) <= UNIT_TOL:
        return RigidTransform(_I3, v * theta)
    raise NonUnitScrew(f"screw axis {screw.tolist()} is not normalized")


def adjoint(T: RigidTransform) -> np.ndarray:
    """6x6 twist adjoint ``[[R, 0], [[p] R, R]]``."""
    r = T.rotation
    out = np.zeros((6, 6))
    out[:3, :3] = r
    out[3:, 3:] = r
    out[3:, :3] = skew(T.translation) @ r
    return out


def ad(V) -> np.ndarray:
    """Lie bracket operator: ``ad(V) @ W == [V, W]``."""
    V = np.asarray(V, dtype=float)
    w = skew(V[:3])
    out = np.zeros((6, 6))
    out[:3, :3] = w
    out[3:, 3:] = w
    out[3:, :3] = skew(V[3:])
    return out


def ad_small(V) -> np.ndarray:
    """Block-diagonal ``diag(-[w], -[w])`` built from the angular part of V.

    For joint screws with zero linear part this is ``-ad(V)``; the linear part
    of ``V`` is ignored.
    """
    V = np.asarray(V, dtype=float)
    w = skew(V[:3])
    out = np.zeros((6, 6))
    out[:3, :3] = -w
    out[3:, 3:] = -w
    return out


def ad_dual(V) -> np.ndarray:
    """``[[-[w], -[v]], [0, -[w]]]``, which equals ``ad(V).T``."""
    V = np.asarray(V, dtype=float)
    w = skew(V[:3])
    out = np.zeros((6, 6))
    out[:3, :3] = -w
    out[3:, 3:] = -w
    out[:3, 3:] = -skew(V[3:])
    return out
