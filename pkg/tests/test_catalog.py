import math

import numpy as np
import pytest

from tlforge.catalog import (
    Family,
    FamilyInstance,
    build_family,
    derive_n4r4_fourth,
    n4r4,
    n4r4_at_q,
    n4r4_q_value,
    n_r_plus_1,
    n_r_plus_1_at_q,
    q2_block,
    q2_tensor,
    q_sqrt2,
    q_sqrt3,
    rank_one,
    rank_one_q,
    solve_rank_one_modulus,
    trivial,
)
from tlforge.classifier import TLClass, classify, conjecture_bound
from tlforge.dense import Tolerance, matrix_unit
from tlforge.errors import ParameterError, VerificationError
from tlforge.subspace import VSystem, check_orthonormal, unitarity_criterion

TOL = Tolerance(abs_eps=1e-9)


def _random_n4r4_points(count, seed=11):
    rng = np.random.default_rng(seed)
    points = []
    for _ in range(count):
        z = rng.normal(size=4) + 1j * rng.normal(size=4)
        points.append(tuple(z / np.linalg.norm(z)))
    return points


def _catalog():
    items = [trivial(n) for n in range(1, 5)]
    items += [rank_one(n, z) for n in range(1, 6) for z in (1.0, 2.0, 0.5 + 0.5j)]
    items += [q_sqrt2(), q_sqrt3()]
    items += [n4r4(*z) for z in _random_n4r4_points(3)]
    items += [n_r_plus_1(n, z1, z2) for n in range(2, 9) for z1, z2 in ((1.0, 1.0), (3.0, 1j))]
    items += [q2_block(n) for n in (2, 4, 6)]
    items += [q2_tensor(n, z) for n in (2, 4) for z in (1.0, 2.0)]
    return items


CATALOG = _catalog()


def _id(inst):
    return f"{inst.family.value}-n{inst.n}-r{inst.r}-Q{inst.Q:.4f}"


@pytest.mark.parametrize("inst", CATALOG, ids=_id)
def test_every_family_member_verifies(inst):
    assert check_orthonormal(inst.vs, TOL).passed
    assert unitarity_criterion(inst.vs, inst.Q, TOL).passed
    sol = inst.solution(TOL)
    assert sol.r == inst.r, f"{_id(inst)}: rank {sol.r}"
    assert abs(np.trace(sol.T) - inst.Q * inst.r) <= 1e-9 * inst.n**2


def _expected_class(inst):
    if inst.family is Family.TRIVIAL or (inst.family is Family.RANK_ONE and inst.n == 1):
        return TLClass.A
    if inst.family is Family.SQRT2:
        return TLClass.B
    if inst.family is Family.SQRT3:
        return TLClass.C
    return TLClass.D


@pytest.mark.parametrize("inst", CATALOG, ids=_id)
def test_every_family_member_classifies(inst):
    report = classify(inst.n, inst.r, inst.Q)
    assert report.tl_class is _expected_class(inst), f"{_id(inst)}: {report.notes}"
    assert conjecture_bound(inst.n, inst.r, inst.Q)


# ---------------- individual families ----------------


def test_trivial_is_identity():
    inst = trivial(2)
    assert (inst.n, inst.r, inst.Q) == (2, 4, 1.0)
    assert np.allclose(inst.t_matrix(), np.eye(4))


@pytest.mark.parametrize(
    "n, z, Q",
    [(2, 1.0, 2.0), (4, 1.0, 4.0), (5, 1j, 5.0), (3, 2.0, 21 / 4), (1, 3.0, 1.0)],
)
def test_rank_one_q_values(n, z, Q):
    inst = rank_one(n, z)
    assert inst.r == 1
    assert inst.Q == pytest.approx(Q)


def test_rank_one_matrix_is_anti_diagonal_with_phases():
    v = rank_one(3, 1j).vs.mats[0]
    g = 1 / math.sqrt(3)
    assert v[0, 2] == pytest.approx(g)
    assert v[1, 1] == pytest.approx(1j * g)
    assert v[2, 0] == pytest.approx(-g)


def test_rank_one_rejects_zero():
    with pytest.raises(ParameterError):
        rank_one(2, 0)


@pytest.mark.parametrize("n, Q", [(2, 2.0), (2, 3.0), (3, 7.5), (4, 4.0)])
def test_rank_one_at_prescribed_q(n, Q):
    inst = rank_one_q(n, Q)
    assert inst.Q == Q
    assert solve_rank_one_modulus(n, Q) >= 1.0
    assert inst.solution().r == 1


def test_rank_one_below_range():
    with pytest.raises(ParameterError):
        solve_rank_one_modulus(3, 2.5)
    with pytest.raises(ParameterError):
        solve_rank_one_modulus(1, 2.0)


def test_sqrt2_and_sqrt3_data():
    a, b = q_sqrt2(), q_sqrt3()
    assert (a.n, a.r, a.Q) == (2, 2, math.sqrt(2))
    assert (b.n, b.r, b.Q) == (3, 3, math.sqrt(3))
    assert a.n**2 == round(a.Q**2) * a.r
    assert b.n**2 == round(b.Q**2) * b.r
    assert np.trace(a.t_matrix()).real == pytest.approx(2 * math.sqrt(2))


def test_n4r4_fourth_matrix_pattern():
    logs = []
    pattern = derive_n4r4_fourth(on_log=logs.append)
    assert pattern == ((1, 4, 1), (2, 3, 1), (3, 2, -1), (4, 1, -1))
    assert logs and "conj(z3)E14" in logs[0]


def test_n4r4_fourth_matrix_does_not_depend_on_seed():
    assert derive_n4r4_fourth(seed=1) == derive_n4r4_fourth(seed=99)


@pytest.mark.parametrize(
    "z, Q",
    [
        ((0.5, 0.5, 0.5, 0.5), 2.0),
        ((math.sqrt(0.45), math.sqrt(0.05), math.sqrt(0.45), math.sqrt(0.05)), 1 / 0.3),
        ((0.5j, -0.5, 0.5, 0.5j), 2.0),
    ],
)
def test_n4r4_q(z, Q):
    inst = n4r4(*z)
    assert (inst.n, inst.r) == (4, 4)
    assert inst.Q == pytest.approx(Q)
    assert inst.Q >= 2 - 1e-12


def test_n4r4_keeps_phases():
    inst = n4r4(0.5j, 0.5, 0.5, 0.5)
    assert inst.vs.mats[0][0, 1] == pytest.approx(0.5j)


@pytest.mark.parametrize("z", [(0.6, 0.1, 0.1, 0.1), (1.0, 0.0, 0.0, 0.0), (0.0, 0.0, 0.0, 0.0)])
def test_n4r4_rejects_inadmissible(z):
    with pytest.raises(ParameterError):
        n4r4(*z)


@pytest.mark.parametrize("Q", [2.0, 2.5, 10 / 3])
def test_n4r4_at_q(Q):
    assert n4r4_at_q(Q).Q == pytest.approx(Q)


@pytest.mark.parametrize("Q", [1000.0, 5002.0])
def test_n4r4_at_large_q_is_exact(Q):
    inst = n4r4_at_q(Q)
    assert inst.Q == Q
    z = [inst.params[k] for k in ("z1", "z2", "z3", "z4")]
    assert n4r4_q_value(z) == pytest.approx(Q, rel=1e-12)


def test_n_r_plus_1():
    assert n_r_plus_1(5, 3.0, 1.0).Q == pytest.approx(10 / 3)
    assert n_r_plus_1(7, 2j, -2.0).Q == pytest.approx(2.0)
    inst = n_r_plus_1(2, 1.0, 1.0)
    assert inst.r == 1
    # n = 2 is the rank-one structure up to the anti-diagonal entries
    v = inst.vs.mats[0]
    assert np.count_nonzero(np.abs(v) > 0) == 2 and v[0, 1] != 0 and v[1, 0] != 0
    with pytest.raises(ParameterError):
        n_r_plus_1(3, 0, 1.0)
    with pytest.raises(ParameterError):
        n_r_plus_1(1, 1.0, 1.0)


@pytest.mark.parametrize("Q", [2.0, 2.5, 7.0])
def test_n_r_plus_1_at_q(Q):
    inst = n_r_plus_1_at_q(4, Q)
    assert inst.Q == Q
    assert inst.params["z2"] == 1.0


def test_q2_families():
    a = q2_block(2)
    assert (a.n, a.r, a.Q) == (2, 1, 2.0)
    b = q2_tensor(4, 1.0)
    assert (b.n, b.r, b.Q) == (4, 4, 2.0)
    assert q2_tensor(4, 2.0).Q == pytest.approx(2.5)
    assert q2_block(6).r == 9
    with pytest.raises(ParameterError):
        q2_block(3)
    with pytest.raises(ParameterError):
        q2_tensor(4, 0)


def test_q2_block_matrices():
    v = q2_block(4).vs.mats[1]
    expected = np.zeros((4, 4))
    expected[0, 1] = expected[2, 3] = 1 / math.sqrt(2)
    assert np.allclose(v, expected)


# ---------------- by name ----------------


def test_build_family_by_name():
    assert build_family("q_sqrt3").Q == pytest.approx(math.sqrt(3))
    assert build_family("rank_one", 4, {"z": 1}).Q == pytest.approx(4.0)
    assert build_family("n4r4").Q == pytest.approx(2.0)
    assert build_family("n_r_plus_1", 5, {"z1": 3, "z2": 1}).Q == pytest.approx(10 / 3)


@pytest.mark.parametrize(
    "name, n, params",
    [
        ("nope", 2, {}),
        ("sum", 2, {}),
        ("rank_one", None, {}),
        ("q_sqrt2", 3, {}),
        ("trivial", 2, {"z": 1}),
        ("n4r4", None, {"z1": 0.6, "z2": 0.1}),
    ],
)
def test_build_family_errors(name, n, params):
    with pytest.raises(ParameterError):
        build_family(name, n, params)


def test_instance_message_round_trip():
    inst = q_sqrt3()
    msg = inst.to_msg()
    assert msg["type"] == "FAMILY_INSTANCE"
    assert msg["T"]["rows"] == 9
    back = FamilyInstance.from_msg(msg)
    assert back.family is Family.SQRT3
    assert all(np.allclose(a, b) for a, b in zip(back.vs.mats, inst.vs.mats))


def test_instance_message_is_rechecked():
    msg = q_sqrt2().to_msg()
    msg["Q"] = 1.5
    with pytest.raises(VerificationError, match="QW unitary"):
        FamilyInstance.from_msg(msg)
    with pytest.raises(ParameterError):
        FamilyInstance.from_msg({"type": "TL_SOLUTION"})


def test_matrix_units_are_not_a_solution_above_q1():
    mats = [matrix_unit(2, a, b) for a in (1, 2) for b in (1, 2)]
    assert not unitarity_criterion(VSystem.of(2, mats), 2.0).passed
