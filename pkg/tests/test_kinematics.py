import numpy as np
import pytest

from armdyn.dynamics import build_operators
from armdyn.errors import IndexOutOfRange, MissingHomePose
from armdyn.kinematics import JointState, body_twists, fk_poe, link_frames_dh, propagate
from armdyn.model import JointSpec, RobotModel
from armdyn.spatial import RigidTransform, se3_hat

from conftest import random_chain


def test_fk_home_configuration(sawyer):
    for k in range(1, 8):
        T = fk_poe(sawyer, np.zeros(7), k)
        assert np.array_equal(T.matrix, sawyer.joints[k - 1].home_pose_space.matrix)
    assert np.array_equal(fk_poe(sawyer, np.zeros(7), 0).matrix, np.eye(4))


def test_fk_rest_pose_reach(sawyer):
    # the rest pose stretches the arm along +x; the last frame is the furthest point
    x = fk_poe(sawyer, np.zeros(7), 7).translation[0]
    assert x == max(j.point_on_axis[0] for j in sawyer.joints)
    assert x == pytest.approx(1.041)


def test_fk_joint1_half_turn(sawyer, rng):
    q = np.zeros(7)
    q[0] = np.pi
    for k in range(1, 8):
        home = fk_poe(sawyer, np.zeros(7), k).translation
        turned = fk_poe(sawyer, q, k).translation
        assert np.allclose(turned[:2], -home[:2], atol=1e-15)
        assert turned[2] == pytest.approx(home[2], abs=1e-15)


def test_fk_index_errors(sawyer):
    with pytest.raises(IndexOutOfRange):
        fk_poe(sawyer, np.zeros(7), 8)
    with pytest.raises(IndexOutOfRange):
        fk_poe(sawyer, np.zeros(7), -1)
    with pytest.raises(ValueError):
        fk_poe(sawyer, np.zeros(6), 3)


def test_fk_missing_home_pose():
    j = JointSpec([0, 0, 1], [0, 0, 0], [0, 0, 1, 0, 0, 0], [0, 0, 1, 0, 0, 0], RigidTransform.identity(), None)
    model = RobotModel((j,))
    with pytest.raises(MissingHomePose):
        fk_poe(model, [0.3], 1)


def test_fk_inverse_roundtrip(sawyer, rng):
    for _ in range(100):
        T = fk_poe(sawyer, rng.uniform(-3, 3, 7))
        assert np.allclose((T @ T.inverse()).matrix, np.eye(4), atol=1e-11)


def test_dh_frames_at_zero(synthetic):
    frames = link_frames_dh(synthetic, np.zeros(7))
    for f, j in zip(frames.relative, synthetic.joints):
        assert np.array_equal(f.matrix, j.parent_to_child_home.matrix)


def test_dh_single_joint_quarter_turn():
    model = RobotModel.from_chain([RigidTransform.identity()], [[0, 0, 1]])
    R = link_frames_dh(model, [np.pi / 2]).absolute[0].rotation
    assert np.allclose(R @ [1, 0, 0], [0, 1, 0], atol=1e-15)


def test_dh_and_poe_agree_on_shipped_model(synthetic, rng):
    worst = 0.0
    for _ in range(1000):
        q = rng.uniform(-np.pi, np.pi, 7)
        frames = link_frames_dh(synthetic, q).absolute
        for k in (1, 4, 7):
            worst = max(worst, np.max(np.abs(frames[k - 1].matrix - fk_poe(synthetic, q, k).matrix)))
    assert worst < 1e-10


def test_dh_and_poe_agree_on_random_chains(rng):
    for _ in range(20):
        model = random_chain(rng)
        q = rng.uniform(-np.pi, np.pi, 7)
        assert np.allclose(link_frames_dh(model, q).absolute[-1].matrix, fk_poe(model, q).matrix, atol=1e-10)


def test_body_twists_examples(synthetic, rng):
    for V in body_twists(synthetic, rng.normal(size=7), np.zeros(7)):
        assert not V.any()
    model = RobotModel.from_chain([RigidTransform.identity()], [[0, 1, 0]])
    (V,) = body_twists(model, [0.4], [2.0])
    assert np.array_equal(V, 2.0 * model.joints[0].body_screw)


def test_body_twists_match_stacked_form(synthetic, rng):
    for _ in range(50):
        q, qd = rng.normal(size=(2, 7))
        ops = build_operators(synthetic, q)
        stacked = ops.G @ ops.S @ qd
        assert np.max(np.abs(np.concatenate(body_twists(synthetic, q, qd)) - stacked)) < 1e-12


def test_body_twists_linear_in_velocity(synthetic, rng):
    q, a, b = rng.normal(size=(3, 7))
    lhs = np.concatenate(body_twists(synthetic, q, 2.0 * a - 3.0 * b))
    rhs = 2.0 * np.concatenate(body_twists(synthetic, q, a)) - 3.0 * np.concatenate(body_twists(synthetic, q, b))
    assert np.max(np.abs(lhs - rhs)) < 1e-13


def test_body_twist_is_log_derivative_of_pose(synthetic, rng):
    # [V_i] = T_i^-1 dT_i/dt, with dT/dt by central differences
    q, qd = rng.normal(size=(2, 7))
    h = 1e-6
    plus = link_frames_dh(synthetic, q + h * qd).absolute
    minus = link_frames_dh(synthetic, q - h * qd).absolute
    now = link_frames_dh(synthetic, q).absolute
    for T, Tp, Tm, V in zip(now, plus, minus, body_twists(synthetic, q, qd)):
        dT = (Tp.matrix - Tm.matrix) / (2 * h)
        assert np.allclose(T.inverse().matrix @ dT, se3_hat(V), atol=1e-8)


def test_accelerations_are_twist_derivatives(synthetic, rng):
    q, qd, qdd = rng.normal(size=(3, 7))
    h = 1e-6
    motion = propagate(synthetic, q, qd, qdd)
    plus = body_twists(synthetic, q + h * qd + 0.5 * h * h * qdd, qd + h * qdd)
    minus = body_twists(synthetic, q - h * qd + 0.5 * h * h * qdd, qd - h * qdd)
    for dV, Vp, Vm in zip(motion.accels, plus, minus):
        assert np.allclose(dV, (Vp - Vm) / (2 * h), atol=1e-7)


def test_joint_state_validation():
    with pytest.raises(ValueError):
        JointState([0, 0], [0], [0, 0])
    s = JointState.zeros(3)
    assert s.n == 3 and not s.q.flags.writeable
