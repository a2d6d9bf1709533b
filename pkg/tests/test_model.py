import json
from pathlib import Path

import numpy as np
import pytest

from armdyn import errors
from armdyn.model import (
    LinkParams,
    PlatformModel,
    RobotModel,
    SchemaWarning,
    dh_transform,
    dump_model,
    load_model,
    parse_model,
    sawyer_screw_table,
    screw_from_geometry,
    spatial_inertia,
)
from armdyn.spatial import RigidTransform, exp_so3

from conftest import random_link

GOLDEN = Path(__file__).parent / "data" / "models"


def test_spatial_inertia_zero_com():
    I = np.diag([0.1, 0.2, 0.25])
    J = spatial_inertia(LinkParams(3.0, [0, 0, 0], I))
    expected = np.zeros((6, 6))
    expected[:3, :3] = I
    expected[3:, 3:] = 3.0 * np.eye(3)
    assert np.array_equal(J, expected)


def test_spatial_inertia_point_mass():
    J = spatial_inertia(LinkParams(2.0, [1, 0, 0], np.zeros((3, 3))))
    # parallel axis by hand: m (|r|^2 I - r r^T) = 2 diag(0, 1, 1)
    assert np.allclose(J[:3, :3], 2.0 * np.diag([0.0, 1.0, 1.0]))
    # kinetic energy of a twist equals that of the point mass
    V = np.array([0.3, -0.2, 0.5, 1.0, 2.0, -1.0])
    v_point = V[3:] + np.cross(V[:3], [1, 0, 0])
    assert np.isclose(0.5 * V @ J @ V, 0.5 * 2.0 * v_point @ v_point)


def test_spatial_inertia_symmetric_and_pd(rng):
    for _ in range(1000):
        link = random_link(rng)
        J = spatial_inertia(link)
        assert np.max(np.abs(J - J.T)) < 1e-14
        np.linalg.cholesky(J)


def test_sawyer_table():
    table = sawyer_screw_table()
    assert len(table) == 7
    assert np.array_equal(table[0], [0, 0, 1, 0, 0, 0])
    assert np.array_equal(table[3], [0, 1, 0, -0.317, 0, 0.481])
    assert np.array_equal(table[6], [1, 0, 0, 0, 0.317, -0.1603])
    for S in table:
        assert S[:3] @ S[3:] == 0.0  # zero pitch


def test_screw_from_geometry():
    assert np.array_equal(screw_from_geometry([0, 0, 1], [0, 0, 0]), [0, 0, 1, 0, 0, 0])
    assert np.array_equal(screw_from_geometry([0, 1, 0], [0.081, 0, 0.317]), sawyer_screw_table()[1])
    a = screw_from_geometry([0, 1, 0], [0.081, 0.0, 0.317])
    b = screw_from_geometry([0, 1, 0], [0.081, 5.0, 0.317])
    assert np.array_equal(a, b)
    with pytest.raises(errors.NonUnitAxis):
        screw_from_geometry([0, 2, 0], [0, 0, 0])


def test_sawyer_model_reproduces_screw_table(sawyer):
    assert isinstance(sawyer, RobotModel) and not sawyer.has_inertia
    for joint, S in zip(sawyer.joints, sawyer_screw_table()):
        assert np.array_equal(joint.space_screw, S)
        assert np.array_equal(screw_from_geometry(joint.omega_space, joint.point_on_axis), S)


def test_synthetic_model_shares_sawyer_geometry(synthetic, sawyer):
    for a, b in zip(synthetic.joints, sawyer.joints):
        assert np.array_equal(a.space_screw, b.space_screw)
        assert np.allclose(a.home_pose_space.matrix, b.home_pose_space.matrix, atol=1e-12)


def test_body_screws_are_pure_rotations(synthetic):
    for j in synthetic.joints:
        assert np.array_equal(j.body_screw[3:], np.zeros(3))
        assert np.isclose(np.linalg.norm(j.body_screw[:3]), 1.0)


def test_platform_block(platform):
    assert isinstance(platform, PlatformModel)
    assert platform.control_box.mass == 25.0
    assert platform.arm.n == 7


def test_parse_minimal():
    doc = (GOLDEN / "valid_minimal.model").read_text()
    model = parse_model(doc)
    assert model.n == 1 and model.gravity == 9.80665
    assert parse_model(doc.encode()).n == 1


@pytest.mark.parametrize("path", [GOLDEN / "valid_minimal.model", GOLDEN / "valid_platform.model",
                                  GOLDEN / "valid_explicit_home.model", GOLDEN / "valid_kinematics_only.model"])
def test_roundtrip_bitwise(path):
    model = parse_model(path.read_bytes())
    again = parse_model(dump_model(model))
    assert dump_model(again) == dump_model(model)
    a, b = (m.arm if isinstance(m, PlatformModel) else m for m in (model, again))
    for ja, jb in zip(a.joints, b.joints):
        for attr in ("omega_space", "point_on_axis", "body_screw", "space_screw"):
            assert np.array_equal(getattr(ja, attr), getattr(jb, attr))
        assert np.array_equal(ja.home_pose_space.matrix, jb.home_pose_space.matrix)
    for la, lb in zip(a.links, b.links):
        assert la.mass == lb.mass
        assert np.array_equal(la.com, lb.com) and np.array_equal(la.inertia_com, lb.inertia_com)


def test_roundtrip_random_links(rng):
    doc = json.loads((GOLDEN / "valid_minimal.model").read_text())
    for _ in range(50):
        link = random_link(rng)
        doc["links"][0] = {"mass": link.mass, "com": link.com.tolist(),
                           "inertia_com": link.inertia_com.ravel().tolist()}
        try:
            model = parse_model(json.dumps(doc))
        except errors.ValidationError:
            continue  # rounding can make a random inertia fail the symmetry check
        back = parse_model(dump_model(model))
        assert np.array_equal(back.links[0].inertia_com, model.links[0].inertia_com)


def test_negative_mass_names_link_and_field():
    doc = json.loads((GOLDEN / "negative_mass.model").read_text())
    with pytest.raises(errors.ValidationError) as info:
        parse_model(json.dumps(doc))
    assert info.value.index == 0
    assert "links[0].mass" in str(info.value)


def test_syntax_error_has_position():
    with pytest.raises(errors.ModelSyntaxError) as info:
        parse_model((GOLDEN / "malformed_syntax.model").read_text())
    assert info.value.line == 2


def test_schema_error_has_path():
    with pytest.raises(errors.SchemaError) as info:
        parse_model((GOLDEN / "missing_field.model").read_text())
    assert info.value.path == "links[0]"
    assert "com" in str(info.value)


def test_lenient_mode_warns():
    text = (GOLDEN / "unknown_field.model").read_text()
    with pytest.warns(SchemaWarning):
        model = parse_model(text, strict=False)
    assert model.n == 1


def test_duplicate_key_is_schema_error():
    with pytest.raises(errors.SchemaError):
        parse_model('{"name": "a", "name": "b", "joints": []}')


def test_dh_transform_matches_composition():
    a, alpha, d, theta = 0.3, 0.4, 0.2, -0.7
    T = dh_transform(a, alpha, d, theta)
    rz = RigidTransform(exp_so3([0, 0, 1], theta), [0, 0, 0])
    tz = RigidTransform.from_translation([0, 0, d])
    tx = RigidTransform.from_translation([a, 0, 0])
    rx = RigidTransform(exp_so3([1, 0, 0], alpha), [0, 0, 0])
    assert np.allclose(T.matrix, (rz @ tz @ tx @ rx).matrix, atol=1e-15)


def test_from_chain_with_dh_table():
    # planar two-link arm from a D-H table: joint axes are the local z axes
    frames = [dh_transform(0.0, 0.0, 0.0), dh_transform(1.0, 0.0, 0.0)]
    model = RobotModel.from_chain(frames, [[0, 0, 1], [0, 0, 1]])
    assert np.array_equal(model.joints[1].point_on_axis, [1, 0, 0])
    assert np.array_equal(model.joints[1].space_screw, [0, 0, 1, 0, -1, 0])


def test_model_invariants_enforced():
    link = LinkParams(1.0, [0, 0, 0], np.eye(3) * 0.1)
    with pytest.raises(errors.ValidationError):
        RobotModel((), ())
    model = RobotModel.from_chain([RigidTransform.identity()], [[0, 0, 1]], [link])
    with pytest.raises(errors.ValidationError):
        model.with_links([link, link])
    with pytest.raises(errors.ValidationError):
        PlatformModel(model, LinkParams(0.0, [0, 0, 0], np.eye(3)), RigidTransform.identity(), RigidTransform.identity())


def test_load_model_by_bundled_name():
    assert load_model("synthetic-7dof.model").arm.n == 7
    with pytest.raises(FileNotFoundError):
        load_model("no-such-model")


def test_non_utf8_is_syntax_error():
    with pytest.raises(errors.ModelSyntaxError):
        parse_model(b'{"name": "\xff"}')


def test_golden_corpus_classes():
    expected = json.loads((GOLDEN / "expected.json").read_text())
    assert len(expected) >= 20
    for name, kind in expected.items():
        text = (GOLDEN / name).read_bytes()
        if kind == "ok":
            parse_model(text)
        else:
            with pytest.raises(getattr(errors, kind)):
                parse_model(text)
