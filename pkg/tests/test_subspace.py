import math

import numpy as np
import pytest

from tlforge.catalog import n4r4, n_r_plus_1, q_sqrt2, q_sqrt3, rank_one, trivial
from tlforge.dense import identity, is_hermitian, matrix_unit, rank
from tlforge.errors import DimensionError, ParameterError
from tlforge.subspace import (
    VSystem,
    check_orthonormal,
    gauge_transform,
    infer_q,
    orthonormalize,
    projection_from_vs,
    quartic_identity_check,
    unitarity_criterion,
    vsystem_from_projection,
    w_matrix,
)
from tlforge.verifier import verify_all


def test_vsystem_shape_validation():
    with pytest.raises(DimensionError):
        VSystem.of(2, [np.eye(3)])
    with pytest.raises(DimensionError):
        VSystem.of(1, [np.eye(1), np.eye(1)])


def test_orthonormal_and_duplicated_systems():
    assert check_orthonormal(trivial(3).vs).passed
    assert check_orthonormal(q_sqrt2().vs).passed
    v1 = q_sqrt2().vs.mats[0]
    dup = VSystem.of(2, [v1, v1])
    report = check_orthonormal(dup)
    assert not report.passed
    assert report.worst.residual == pytest.approx(1.0)


def test_projection_of_a_single_matrix_unit():
    p = projection_from_vs(VSystem.of(2, [matrix_unit(2, 1, 2)]))
    # e_1 (x) e_2 is the second basis vector
    expected = np.zeros((4, 4))
    expected[1, 1] = 1
    assert np.allclose(p, expected)


def test_projection_of_all_matrix_units_is_identity():
    assert np.allclose(projection_from_vs(trivial(3).vs), identity(9))


@pytest.mark.parametrize("inst", [q_sqrt2(), q_sqrt3(), rank_one(3, 2.0), n_r_plus_1(4, 2.0, 1.0)])
def test_projection_is_hermitian_idempotent_with_trace_r(inst):
    p = projection_from_vs(inst.vs)
    n2 = inst.n**2
    assert is_hermitian(p)
    assert np.linalg.norm(p @ p - p) <= 1e-10 * n2
    assert abs(np.trace(p) - inst.r) <= 1e-10 * n2
    assert rank(p) == inst.r


def test_projection_rejects_non_orthonormal():
    with pytest.raises(ParameterError):
        projection_from_vs(VSystem.of(2, [2 * matrix_unit(2, 1, 1)]))


def test_w_matrix_blocks():
    vs = q_sqrt2().vs
    w = w_matrix(vs)
    assert w.shape == (4, 4)
    v1, v2 = vs.mats
    assert np.allclose(w[0:2, 2:4], v2 @ v1.conj())
    assert np.allclose(w[2:4, 0:2], v1 @ v2.conj())


def test_w_matrix_of_n_r_plus_1_splits_into_orthogonal_parts():
    inst = n_r_plus_1(4, 2.0, 1.0)
    n, r = inst.n, inst.r
    s = 1 / math.sqrt(5)
    # the diagonal blocks carry z1 conj(z2) s^2 E_11
    w1 = np.kron(identity(r), 2 * s * s * matrix_unit(n, 1, 1))
    w2 = w_matrix(inst.vs) - w1
    assert np.allclose(w1 @ w2, 0)
    assert np.allclose(w2 @ w1, 0)


def test_unitarity_criterion():
    assert unitarity_criterion(trivial(2).vs, 1.0).passed
    assert unitarity_criterion(q_sqrt3().vs, math.sqrt(3)).passed
    assert not unitarity_criterion(q_sqrt3().vs, 1.0).passed
    assert not unitarity_criterion(q_sqrt2().vs, 1.5).passed
    assert unitarity_criterion(n_r_plus_1(6, 2.0, 1.0).vs, 2.5).passed


def test_rank_one_w_scaled_by_q_is_unitary():
    inst = rank_one(4, 1.0)
    v = inst.vs.mats[0]
    qw = inst.Q * (v @ v.conj())
    assert np.allclose(qw @ qw.conj().T, identity(4))


def test_infer_q():
    assert infer_q(q_sqrt2().vs) == pytest.approx(math.sqrt(2))
    assert infer_q(n4r4(0.5, 0.5, 0.5, 0.5).vs) == pytest.approx(2.0)
    rng = np.random.default_rng(3)
    a = rng.normal(size=(9, 3)) + 1j * rng.normal(size=(9, 3))
    q, _ = np.linalg.qr(a)
    random_vs = VSystem.of(3, [q[:, s].reshape(3, 3) for s in range(3)])
    assert infer_q(random_vs) is None


@pytest.mark.parametrize(
    "g",
    [
        np.eye(2),
        np.diag([1, np.exp(0.4j)]),
        np.array([[math.cos(math.pi / 7), -math.sin(math.pi / 7)], [math.sin(math.pi / 7), math.cos(math.pi / 7)]]),
    ],
    ids=["identity", "phases", "rotation"],
)
def test_gauge_transform_keeps_the_solution(g):
    vs = q_sqrt2().vs
    out = gauge_transform(vs, g)
    assert check_orthonormal(out).passed
    assert unitarity_criterion(out, math.sqrt(2)).passed
    assert np.allclose(
        np.array([[np.vdot(a, b) for b in out.mats] for a in out.mats]),
        np.array([[np.vdot(a, b) for b in vs.mats] for a in vs.mats]),
    )


def test_gauge_transform_uses_plain_transpose():
    vs = q_sqrt2().vs
    g = np.diag([1, 1j])
    out = gauge_transform(vs, g)
    assert np.allclose(out.mats[1], g @ vs.mats[1] @ g.T)


def test_gauge_transform_rejects_non_unitary():
    with pytest.raises(ParameterError):
        gauge_transform(q_sqrt2().vs, 2 * np.eye(2))


@pytest.mark.parametrize(
    "inst, Q, ok",
    [
        (q_sqrt2(), math.sqrt(2), True),
        (trivial(2), 1.0, True),
        (q_sqrt3(), math.sqrt(3), True),
        (q_sqrt2(), 1.5, False),
        (q_sqrt3(), 1.0, False),
    ],
)
def test_quartic_identity_agrees_with_unitarity(inst, Q, ok):
    assert quartic_identity_check(inst.vs, Q).passed is ok
    assert unitarity_criterion(inst.vs, Q).passed is ok


def test_criterion_round_trip_through_verify_all():
    inst = q_sqrt3()
    t = inst.Q * projection_from_vs(inst.vs)
    sol = verify_all(t, 3, inst.Q)
    assert sol.r == 3
    back = vsystem_from_projection(sol.T, 3, sol.Q)
    assert back.r == 3
    assert unitarity_criterion(back, sol.Q).passed


def test_orthonormalize_is_explicit():
    vs = VSystem.of(2, [matrix_unit(2, 1, 1) + matrix_unit(2, 1, 2), matrix_unit(2, 1, 2)])
    assert not check_orthonormal(vs).passed
    assert check_orthonormal(orthonormalize(vs)).passed
    with pytest.raises(ParameterError):
        orthonormalize(VSystem.of(2, [matrix_unit(2, 1, 1), matrix_unit(2, 1, 1)]))
