"""Serial-chain robot models, the JSON model format and per-link spatial inertia.

A model carries two descriptions of the same chain:

* link-frame data (``parent_to_child_home`` transforms and body screws
  ``[w; 0]``) consumed by the recursive Newton-Euler / stacked-operator path;
* space-frame data (screw axes ``[w; -w x q]`` and home poses ``M_i``)
  consumed by the product-of-exponentials path.

Both are built from the model file.  Link inertial parameters are expressed in
the link frames, which coincide with the home poses.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import (
    MissingInertia,
    ModelSyntaxError,
    NonUnitAxis,
    SchemaError,
    ValidationError,
)
from .spatial import UNIT_TOL, RigidTransform, skew

STANDARD_GRAVITY = 9.80665
ON_AXIS_TOL = 1e-9
INERTIA_TOL = 1e-12

# Space-frame screw axes of the Sawyer arm, angular-first, in the base frame.
SAWYER_SCREWS = (
    (0.0, 0.0, 1.0, 0.0, 0.0, 0.0),
    (0.0, 1.0, 0.0, -0.317, 0.0, 0.081),
    (1.0, 0.0, 0.0, 0.0, 0.317, -0.1925),
    (0.0, 1.0, 0.0, -0.317, 0.0, 0.481),
    (1.0, 0.0, 0.0, 0.0, 0.317, -0.024),
    (0.0, 1.0, 0.0, -0.317, 0.0, 0.881),
    (1.0, 0.0, 0.0, 0.0, 0.317, -0.1603),
)


class SchemaWarning(UserWarning):
    pass


def _frozen(a, shape):
    a = np.array(a, dtype=float).reshape(shape)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class LinkParams:
    """Mass (kg), COM in the link frame (m) and inertia about the COM (kg m^2)."""

    mass: float
    com: np.ndarray
    inertia_com: np.ndarray
    note: str = ""

    def __post_init__(self):
        object.__setattr__(self, "mass", float(self.mass))
        object.__setattr__(self, "com", _frozen(self.com, 3))
        object.__setattr__(self, "inertia_com", _frozen(self.inertia_com, (3, 3)))

    def scaled(self, factor: float) -> LinkParams:
        return LinkParams(self.mass * factor, self.com, self.inertia_com * factor, self.note)


@dataclass(frozen=True, eq=False)
class JointSpec:
    """One revolute joint described in both parameterizations."""

    omega_space: np.ndarray
    point_on_axis: np.ndarray
    body_screw: np.ndarray
    space_screw: np.ndarray
    parent_to_child_home: RigidTransform
    home_pose_space: RigidTransform | None
    kind: str = "revolute"
    home_pose_explicit: bool = False
    note: str = ""

    def __post_init__(self):
        object.__setattr__(self, "omega_space", _frozen(self.omega_space, 3))
        object.__setattr__(self, "point_on_axis", _frozen(self.point_on_axis, 3))
        object.__setattr__(self, "body_screw", _frozen(self.body_screw, 6))
        object.__setattr__(self, "space_screw", _frozen(self.space_screw, 6))


@dataclass(frozen=True, eq=False)
class RobotModel:
    joints: tuple[JointSpec, ...]
    links: tuple[LinkParams, ...] = ()
    gravity: float = STANDARD_GRAVITY
    base_pose: RigidTransform = field(default_factory=RigidTransform.identity)
    name: str = ""
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "joints", tuple(self.joints))
        object.__setattr__(self, "links", tuple(self.links))
        if not self.joints:
            raise ValidationError("model needs at least one joint", "joints")
        if self.links and len(self.links) != len(self.joints):
            raise ValidationError(
                f"{len(self.links)} links but {len(self.joints)} joints", "links"
            )

    @property
    def n(self) -> int:
        return len(self.joints)

    @property
    def has_inertia(self) -> bool:
        return bool(self.links)

    def require_inertia(self):
        if not self.links:
            raise MissingInertia(f"model {self.name!r} has no link inertial parameters")

    def with_gravity(self, g: float) -> RobotModel:
        return RobotModel(self.joints, self.links, float(g), self.base_pose, self.name, self.description)

    def with_links(self, links) -> RobotModel:
        return RobotModel(self.joints, tuple(links), self.gravity, self.base_pose, self.name, self.description)

    @classmethod
    def from_chain(cls, parent_to_child, body_axes, links=(), gravity=STANDARD_GRAVITY, **kw) -> RobotModel:
        """Build a model from relative home transforms and body-frame joint axes.

        Each link frame origin lies on its joint axis, so the space-frame data
        follow from the accumulated home poses.
        """
        joints = []
        pose = RigidTransform.identity()
        for f, w in zip(parent_to_child, body_axes):
            w = np.asarray(w, dtype=float)
            if abs(np.linalg.norm(w) - 1.0) > UNIT_TOL:
                raise NonUnitAxis(f"joint axis {w.tolist()} is not unit length")
            pose = pose @ f
            w_space = pose.rotation @ w
            joints.append(
                JointSpec(
                    omega_space=w_space,
                    point_on_axis=pose.translation,
                    body_screw=np.concatenate([w, np.zeros(3)]),
                    space_screw=screw_from_geometry(w_space, pose.translation),
                    parent_to_child_home=f,
                    home_pose_space=pose,
                )
            )
        return cls(tuple(joints), tuple(links), float(gravity), **kw)


@dataclass(frozen=True, eq=False)
class PlatformModel:
    """Arm mounted on a (locked) spherical air bearing plus a static control box.

    Frame B is the platform frame with its origin at the bearing centre;
    ``platform_attitude`` is the pose of B in the inertial frame N.
    """

    arm: RobotModel
    control_box: LinkParams
    bearing_to_arm_base: RigidTransform
    bearing_to_box: RigidTransform
    platform_attitude: RigidTransform = field(default_factory=RigidTransform.identity)

    def __post_init__(self):
        if not self.control_box.mass > 0:
            raise ValidationError("control box mass must be positive", "platform.control_box.mass")

    @property
    def gravity(self) -> float:
        return self.arm.gravity

    def scaled_masses(self, factor: float) -> PlatformModel:
        arm = self.arm.with_links([lk.scaled(factor) for lk in self.arm.links])
        return PlatformModel(
            arm, self.control_box.scaled(factor), self.bearing_to_arm_base,
            self.bearing_to_box, self.platform_attitude,
        )


def as_robot(model) -> RobotModel:
    return model.arm if isinstance(model, PlatformModel) else model


def spatial_inertia(link: LinkParams) -> np.ndarray:
    """6x6 spatial inertia about the link-frame origin.

    ``[[I - m [r]^2, m [r]], [-m [r], m I3]]`` with ``r`` the COM offset.
    """
    m = link.mass
    r = skew(link.com)
    out = np.empty((6, 6))
    out[:3, :3] = link.inertia_com - m * (r @ r)
    out[:3, 3:] = m * r
    out[3:, :3] = -m * r
    out[3:, 3:] = m * np.eye(3)
    return out


def sawyer_screw_table() -> list[np.ndarray]:
    return [np.array(s) for s in SAWYER_SCREWS]


def screw_from_geometry(omega, point_on_axis) -> np.ndarray:
    """Zero-pitch screw ``[w; -w x q]`` through ``point_on_axis``."""
    omega = np.asarray(omega, dtype=float)
    if abs(np.linalg.norm(omega) - 1.0) > UNIT_TOL:
        raise NonUnitAxis(f"axis {omega.tolist()} is not unit length")
    return np.concatenate([omega, -np.cross(omega, np.asarray(point_on_axis, dtype=float))])


def dh_transform(a: float, alpha: float, d: float, theta: float = 0.0) -> RigidTransform:
    """Classic Denavit-Hartenberg transform Rot_z(theta) Trans_z(d) Trans_x(a) Rot_x(alpha).

    Useful to fill ``parent_to_child_home`` from a D-H table; the joint axis
    of the child frame is then its local z axis.
    """
    ct, st = math.cos(theta), math.sin(theta)
    ca, sa = math.cos(alpha), math.sin(alpha)
    rot = np.array([[ct, -st * ca, st * sa], [st, ct * ca, -ct * sa], [0.0, sa, ca]])
    return RigidTransform(rot, [a * ct, a * st, d])


# --- validation -------------------------------------------------------------


def check_link(link: LinkParams, path: str = "link", index=None):
    """Raise ValidationError unless the inertial parameters are physical."""
    if not (np.isfinite(link.mass) and np.all(np.isfinite(link.com)) and np.all(np.isfinite(link.inertia_com))):
        raise ValidationError("non-finite inertial parameter", path, index)
    if not link.mass > 0:
        raise ValidationError(f"mass must be positive, got {link.mass!r}", f"{path}.mass", index)
    inertia = link.inertia_com
    scale = max(1.0, float(np.max(np.abs(inertia))))
    if np.max(np.abs(inertia - inertia.T)) > INERTIA_TOL * scale:
        raise ValidationError("inertia_com is not symmetric", f"{path}.inertia_com", index)
    moments = np.linalg.eigvalsh(0.5 * (inertia + inertia.T))
    if moments[0] < -INERTIA_TOL * scale:
        raise ValidationError("inertia_com is not positive semidefinite", f"{path}.inertia_com", index)
    a, b, c = moments
    if a + b < c - INERTIA_TOL * scale:
        raise ValidationError(
            "principal moments violate the triangle inequality", f"{path}.inertia_com", index
        )


def _check_transform(T: RigidTransform, path: str, index=None):
    if not T.is_valid(1e-12):
        raise ValidationError("rotation is not orthonormal with det +1", f"{path}.rotation", index)


def _joints_from_space(raw_joints, path="joints"):
    joints = []
    pose = RigidTransform.identity()
    for i, rj in enumerate(raw_joints):
        jp = f"{path}[{i}]"
        omega = rj["omega_space"]
        if abs(np.linalg.norm(omega) - 1.0) > UNIT_TOL:
            raise ValidationError("omega_space is not unit length", f"{jp}.omega_space", i)
        f = rj["parent_to_child_home"]
        _check_transform(f, f"{jp}.parent_to_child_home", i)
        pose = pose @ f
        point = rj["point_on_axis"]
        offset = np.linalg.norm(np.cross(omega, pose.translation - point))
        if offset > ON_AXIS_TOL:
            raise ValidationError(
                f"link frame origin is {offset:.3g} m off the joint axis", f"{jp}.point_on_axis", i
            )
        home = rj.get("home_pose_space")
        if home is not None:
            _check_transform(home, f"{jp}.home_pose_space", i)
        w_body = pose.rotation.T @ omega
        joints.append(
            JointSpec(
                omega_space=omega,
                point_on_axis=point,
                body_screw=np.concatenate([w_body, np.zeros(3)]),
                space_screw=screw_from_geometry(omega, point),
                parent_to_child_home=f,
                home_pose_space=home if home is not None else pose,
                home_pose_explicit=home is not None,
                note=rj.get("note", ""),
            )
        )
    return tuple(joints)


# --- parsing ----------------------------------------------------------------

_TOP_KEYS = {"name", "gravity", "links", "joints", "base_pose", "platform", "description"}
_TOP_REQUIRED = {"name", "joints"}
_LINK_KEYS = {"mass", "com", "inertia_com", "note"}
_LINK_REQUIRED = {"mass", "com", "inertia_com"}
_JOINT_KEYS = {"type", "omega_space", "point_on_axis", "parent_to_child_home", "home_pose_space", "note"}
_JOINT_REQUIRED = {"type", "omega_space", "point_on_axis", "parent_to_child_home"}
_TRANSFORM_KEYS = {"rotation", "translation"}
_PLATFORM_KEYS = {"control_box", "bearing_to_arm_base", "bearing_to_box", "platform_attitude"}
_PLATFORM_REQUIRED = {"control_box", "bearing_to_arm_base", "bearing_to_box"}


class _Reader:
    def __init__(self, strict: bool):
        self.strict = strict

    def keys(self, obj, allowed, required, path):
        if not isinstance(obj, dict):
            raise SchemaError("expected an object", path)
        missing = sorted(required - obj.keys())
        if missing:
            raise SchemaError(f"missing field {missing[0]!r}", path)
        extra = sorted(obj.keys() - allowed)
        for key in extra:
            if self.strict:
                raise SchemaError(f"unknown field {key!r}", f"{path}.{key}" if path else key)
            warnings.warn(f"ignoring unknown field {path}.{key}", SchemaWarning, stacklevel=4)

    @staticmethod
    def number(value, path):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaError(f"expected a number, got {type(value).__name__}", path)
        return float(value)

    def vector(self, value, length, path):
        if not isinstance(value, list) or len(value) != length:
            raise SchemaError(f"expected an array of {length} numbers", path)
        return np.array([self.number(v, f"{path}[{i}]") for i, v in enumerate(value)])

    @staticmethod
    def string(value, path):
        if not isinstance(value, str):
            raise SchemaError("expected a string", path)
        return value

    def transform(self, obj, path):
        self.keys(obj, _TRANSFORM_KEYS, _TRANSFORM_KEYS, path)
        rot = self.vector(obj["rotation"], 9, f"{path}.rotation").reshape(3, 3)
        return RigidTransform(rot, self.vector(obj["translation"], 3, f"{path}.translation"))

    def link(self, obj, path):
        self.keys(obj, _LINK_KEYS, _LINK_REQUIRED, path)
        return LinkParams(
            self.number(obj["mass"], f"{path}.mass"),
            self.vector(obj["com"], 3, f"{path}.com"),
            self.vector(obj["inertia_com"], 9, f"{path}.inertia_com").reshape(3, 3),
            self.string(obj.get("note", ""), f"{path}.note"),
        )

    def joint(self, obj, path):
        self.keys(obj, _JOINT_KEYS, _JOINT_REQUIRED, path)
        kind = self.string(obj["type"], f"{path}.type")
        if kind != "revolute":
            raise SchemaError(f"unsupported joint type {kind!r}", f"{path}.type")
        out = {
            "omega_space": self.vector(obj["omega_space"], 3, f"{path}.omega_space"),
            "point_on_axis": self.vector(obj["point_on_axis"], 3, f"{path}.point_on_axis"),
            "parent_to_child_home": self.transform(obj["parent_to_child_home"], f"{path}.parent_to_child_home"),
            "note": self.string(obj.get("note", ""), f"{path}.note"),
        }
        if "home_pose_space" in obj:
            out["home_pose_space"] = self.transform(obj["home_pose_space"], f"{path}.home_pose_space")
        return out


def _reject_constant(name):
    raise ValueError(f"non-standard JSON constant {name}")


def _no_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise SchemaError(f"duplicate field {k!r}")
        out[k] = v
    return out


def _decode(text) -> dict:
    if hasattr(text, "read"):
        text = text.read()
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ModelSyntaxError(f"model file is not UTF-8: {exc}") from None
    try:
        return json.loads(text, parse_constant=_reject_constant, object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise ModelSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    except ValueError as exc:
        if isinstance(exc, SchemaError):
            raise
        raise ModelSyntaxError(str(exc)) from None


def parse_model(text, *, strict: bool = True) -> RobotModel | PlatformModel:
    """Parse and validate a JSON model document (str, bytes or file object).

    Returns a PlatformModel when the document has a ``platform`` block.
    Raises ModelSyntaxError, SchemaError or ValidationError.
    """
    doc = _decode(text)
    rd = _Reader(strict)
    rd.keys(doc, _TOP_KEYS, _TOP_REQUIRED, "")
    name = rd.string(doc["name"], "name")
    description = rd.string(doc.get("description", ""), "description")
    gravity = rd.number(doc.get("gravity", STANDARD_GRAVITY), "gravity")
    if not (math.isfinite(gravity) and gravity >= 0.0):
        raise ValidationError("gravity must be a finite non-negative number", "gravity")

    raw_joints = doc["joints"]
    if not isinstance(raw_joints, list):
        raise SchemaError("expected an array", "joints")
    if not raw_joints:
        raise ValidationError("model needs at least one joint", "joints")
    joints = [rd.joint(j, f"joints[{i}]") for i, j in enumerate(raw_joints)]

    links = []
    if "links" in doc:
        if not isinstance(doc["links"], list):
            raise SchemaError("expected an array", "links")
        links = [rd.link(lk, f"links[{i}]") for i, lk in enumerate(doc["links"])]
        if len(links) != len(joints):
            raise ValidationError(f"{len(links)} links but {len(joints)} joints", "links")
        for i, lk in enumerate(links):
            check_link(lk, f"links[{i}]", i)

    base_pose = RigidTransform.identity()
    if "base_pose" in doc:
        base_pose = rd.transform(doc["base_pose"], "base_pose")
        _check_transform(base_pose, "base_pose")

    model = RobotModel(_joints_from_space(joints), tuple(links), gravity, base_pose, name, description)

    if "platform" not in doc:
        return model
    pdoc = doc["platform"]
    rd.keys(pdoc, _PLATFORM_KEYS, _PLATFORM_REQUIRED, "platform")
    box = rd.link(pdoc["control_box"], "platform.control_box")
    check_link(box, "platform.control_box")
    if not model.has_inertia:
        raise ValidationError("a platform model needs link inertial parameters", "links")
    frames = {}
    for key in ("bearing_to_arm_base", "bearing_to_box", "platform_attitude"):
        if key in pdoc:
            frames[key] = rd.transform(pdoc[key], f"platform.{key}")
            _check_transform(frames[key], f"platform.{key}")
    return PlatformModel(model, box, **frames)


def load_model(path, *, strict: bool = True):
    """Parse a model file; ``path`` may also name a bundled model (e.g. ``synthetic-7dof``)."""
    p = Path(path)
    if not p.exists():
        bundled = bundled_model_path(str(path))
        if bundled is not None:
            p = bundled
    with open(p, "rb") as fh:
        return parse_model(fh, strict=strict)


def bundled_model_path(name: str) -> Path | None:
    stem = name[:-6] if name.endswith(".model") else name
    ref = resources.files("armdyn") / "data" / f"{stem}.model"
    return Path(str(ref)) if ref.is_file() else None


# --- serialization ------------------------------------------------------------


def _t_json(T: RigidTransform):
    return {"rotation": T.rotation.ravel().tolist(), "translation": T.translation.tolist()}


def _link_json(link: LinkParams):
    out = {"mass": link.mass, "com": link.com.tolist(), "inertia_com": link.inertia_com.ravel().tolist()}
    if link.note:
        out["note"] = link.note
    return out


def model_to_dict(model) -> dict:
    robot = as_robot(model)
    doc = {"name": robot.name}
    if robot.description:
        doc["description"] = robot.description
    doc["gravity"] = robot.gravity
    if not np.array_equal(robot.base_pose.matrix, np.eye(4)):
        doc["base_pose"] = _t_json(robot.base_pose)
    if robot.links:
        doc["links"] = [_link_json(lk) for lk in robot.links]
    joints = []
    for j in robot.joints:
        jd = {
            "type": j.kind,
            "omega_space": j.omega_space.tolist(),
            "point_on_axis": j.point_on_axis.tolist(),
            "parent_to_child_home": _t_json(j.parent_to_child_home),
        }
        if j.home_pose_explicit:
            jd["home_pose_space"] = _t_json(j.home_pose_space)
        if j.note:
            jd["note"] = j.note
        joints.append(jd)
    doc["joints"] = joints
    if isinstance(model, PlatformModel):
        doc["platform"] = {
            "control_box": _link_json(model.control_box),
            "bearing_to_arm_base": _t_json(model.bearing_to_arm_base),
            "bearing_to_box": _t_json(model.bearing_to_box),
            "platform_attitude": _t_json(model.platform_attitude),
        }
    return doc


def dump_model(model) -> str:
    return json.dumps(model_to_dict(model), indent=2) + "\n"

