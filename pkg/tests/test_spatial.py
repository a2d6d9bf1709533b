import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from armdyn.errors import NonUnitAxis, NonUnitScrew
from armdyn.model import SAWYER_SCREWS
from armdyn.spatial import (
    RigidTransform,
    ad,
    ad_dual,
    ad_small,
    adjoint,
    exp_se3,
    exp_so3,
    se3_hat,
    skew,
)

finite = st.floats(-10, 10, allow_nan=False)
vec3 = arrays(float, 3, elements=finite)


def series_expm(A, terms=30):
    out = np.eye(A.shape[0])
    term = np.eye(A.shape[0])
    for k in range(1, terms):
        term = term @ A / k
        out = out + term
    return out


def unit(v):
    return v / np.linalg.norm(v)


def random_transform(rng):
    return RigidTransform(exp_so3(unit(rng.normal(size=3)), rng.uniform(-3, 3)), rng.normal(size=3))


def test_skew_basics():
    assert np.array_equal(skew([0, 0, 0]), np.zeros((3, 3)))
    assert np.array_equal(skew([0, 0, 1]), [[0, -1, 0], [1, 0, 0], [0, 0, 0]])


@given(vec3, vec3)
def test_skew_is_cross_product(v, w):
    S = skew(v)
    assert np.array_equal(S, -S.T)
    scale = max(1.0, np.abs(v).max() * np.abs(w).max())
    assert np.max(np.abs(S @ w - np.cross(v, w))) <= 4e-15 * scale


def test_skew_random_unit_scale(rng):
    for _ in range(1000):
        v, w = rng.normal(size=(2, 3))
        assert np.max(np.abs(skew(v) @ w - np.cross(v, w))) < 1e-15


def test_se3_hat_layout():
    assert np.array_equal(se3_hat(np.zeros(6)), np.zeros((4, 4)))
    H = se3_hat(SAWYER_SCREWS[0])
    expected = np.zeros((4, 4))
    expected[0, 1], expected[1, 0] = -1.0, 1.0
    assert np.array_equal(H, expected)
    S = np.array(SAWYER_SCREWS[1])
    H = se3_hat(S)
    assert np.array_equal(H[:3, :3], skew(S[:3]))
    assert np.array_equal(H[:3, 3], S[3:])
    assert np.array_equal(H[3], np.zeros(4))


def test_exp_so3_examples(rng):
    assert np.array_equal(exp_so3(unit(rng.normal(size=3)), 0.0), np.eye(3))
    R = exp_so3([0, 0, 1], np.pi / 2)
    assert np.allclose(R @ [1, 0, 0], [0, 1, 0], atol=1e-15)
    for _ in range(200):
        w, th = unit(rng.normal(size=3)), rng.uniform(-np.pi, np.pi)
        assert np.max(np.abs(exp_so3(w, th) - series_expm(skew(w) * th))) < 1e-12


def test_exp_so3_orthonormal_bulk(rng):
    worst = 0.0
    for _ in range(10_000):
        R = exp_so3(unit(rng.normal(size=3)), rng.uniform(-10, 10))
        worst = max(worst, np.linalg.norm(R.T @ R - np.eye(3)))
    assert worst < 1e-12


def test_exp_so3_rejects_non_unit_axis():
    with pytest.raises(NonUnitAxis):
        exp_so3([0, 0, 2], 0.3)
    assert np.array_equal(exp_so3([0, 0, 2], 0.0), np.eye(3))


def test_exp_so3_small_angle_branch():
    w = unit(np.array([1.0, 2.0, 3.0]))
    for th in (1e-10, 5e-10, 2e-9):
        assert np.max(np.abs(exp_so3(w, th) - series_expm(skew(w) * th))) < 1e-16


def test_exp_se3_examples():
    assert np.array_equal(exp_se3(SAWYER_SCREWS[1], 0.0).matrix, np.eye(4))
    S2 = np.array(SAWYER_SCREWS[1])
    T = exp_se3(S2, np.pi)
    assert np.max(np.abs(T.matrix - series_expm(se3_hat(S2) * np.pi))) < 1e-12
    T = exp_se3([0, 0, 0, 0, 0, 1], 2.0)
    assert np.array_equal(T.rotation, np.eye(3))
    assert np.array_equal(T.translation, [0, 0, 2])
    with pytest.raises(NonUnitScrew):
        exp_se3([0, 0, 0, 0, 0, 2], 1.0)
    with pytest.raises(NonUnitScrew):
        exp_se3([0, 0, 1.5, 0, 0, 0], 1.0)


def test_exp_se3_matches_series(rng):
    for _ in range(300):
        S = np.concatenate([unit(rng.normal(size=3)), rng.normal(size=3)])
        th = rng.uniform(-np.pi, np.pi)
        assert np.max(np.abs(exp_se3(S, th).matrix - series_expm(se3_hat(S) * th))) < 1e-12


def test_exp_se3_one_parameter_subgroup(rng):
    for _ in range(200):
        S = np.concatenate([unit(rng.normal(size=3)), rng.normal(size=3)])
        a, b = rng.uniform(-3, 3, 2)
        lhs = (exp_se3(S, a) @ exp_se3(S, b)).matrix
        assert np.max(np.abs(lhs - exp_se3(S, a + b).matrix)) < 1e-11


def test_adjoint_examples(rng):
    assert np.array_equal(adjoint(RigidTransform.identity()), np.eye(6))
    R = exp_so3(unit(rng.normal(size=3)), 1.1)
    A = adjoint(RigidTransform(R, np.zeros(3)))
    assert np.array_equal(A[:3, :3], R) and np.array_equal(A[3:, 3:], R)
    assert not A[:3, 3:].any() and not A[3:, :3].any()


def test_adjoint_homomorphism_and_inverse(rng):
    for _ in range(200):
        T1, T2 = random_transform(rng), random_transform(rng)
        assert np.max(np.abs(adjoint(T1 @ T2) - adjoint(T1) @ adjoint(T2))) < 1e-12
        assert np.max(np.abs(adjoint(T1.inverse()) - np.linalg.inv(adjoint(T1)))) < 1e-11


def test_adjoint_maps_twists_like_conjugation(rng):
    # [Ad_T V] = T [V] T^-1
    for _ in range(50):
        T = random_transform(rng)
        V = rng.normal(size=6)
        lhs = se3_hat(adjoint(T) @ V)
        rhs = T.matrix @ se3_hat(V) @ T.inverse().matrix
        assert np.allclose(lhs, rhs, atol=1e-12)


def test_ad_small_examples():
    assert np.array_equal(ad_small(np.zeros(6)), np.zeros((6, 6)))
    A = ad_small([0, 0, 1, 0, 0, 0])
    assert np.array_equal(A[:3, :3], -skew([0, 0, 1]))
    assert np.array_equal(A[3:, 3:], -skew([0, 0, 1]))
    assert not A[:3, 3:].any() and not A[3:, :3].any()


def test_ad_dual_examples():
    assert np.array_equal(ad_dual(np.zeros(6)), np.zeros((6, 6)))
    A = ad_dual([0, 0, 0, 1, 0, 0])
    assert np.array_equal(A[:3, 3:], -skew([1, 0, 0]))
    A[:3, 3:] = 0
    assert not A.any()


def test_small_operators_linear(rng):
    for _ in range(100):
        a, b = rng.normal(size=2)
        V, W = rng.normal(size=(2, 6))
        for op in (ad_small, ad_dual):
            assert np.max(np.abs(op(a * V + b * W) - (a * op(V) + b * op(W)))) <= 1e-15


def test_small_operators_relation_to_bracket(rng):
    V = rng.normal(size=6)
    assert np.allclose(ad_dual(V), ad(V).T)
    s = np.concatenate([rng.normal(size=3), np.zeros(3)])
    assert np.allclose(ad_small(s), -ad(s))
    # bracket via 4x4 matrices
    W = rng.normal(size=6)
    hv, hw = se3_hat(V), se3_hat(W)
    assert np.allclose(se3_hat(ad(V) @ W), hv @ hw - hw @ hv)


@settings(max_examples=50)
@given(vec3)
def test_transform_inverse_roundtrip(p):
    T = RigidTransform(exp_so3([0, 1, 0], 0.7), p)
    assert np.allclose((T @ T.inverse()).matrix, np.eye(4), atol=1e-12)
