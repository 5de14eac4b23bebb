import math
from fractions import Fraction

import pytest

from tlforge.classifier import (
    TLClass,
    classify,
    conjecture_bound,
    is_in_j_infty,
    j_infty,
    q2_existence,
    unitary_r_condition,
)
from tlforge.errors import ParameterError


@pytest.mark.parametrize(
    "n, r, Q, expected",
    [
        (2, 4, 1.0, TLClass.A),
        (2, 2, math.sqrt(2), TLClass.B),
        (3, 3, math.sqrt(3), TLClass.C),
        (3, 3, 1.732050808, TLClass.C),
        (2, 1, 2.0, TLClass.D),
        (5, 4, 2.0, TLClass.D),
        (2, 3, 1.5, TLClass.EXCLUDED),
        (3, 3, 1.0, TLClass.EXCLUDED),
        (4, 2, 1.9, TLClass.EXCLUDED),
        (2, 2, 1.5, TLClass.EXCLUDED),
    ],
)
def test_classify(n, r, Q, expected):
    report = classify(n, r, Q, tol=1e-8)
    assert report.tl_class is expected, report.notes


def test_class_d_respects_n_over_r():
    # r = 1 needs Q >= n
    assert classify(5, 1, 4.5).tl_class is TLClass.EXCLUDED
    assert classify(5, 1, 5.0).tl_class is TLClass.D


@pytest.mark.parametrize("n", range(1, 5))
@pytest.mark.parametrize("r", range(2, 6))
@pytest.mark.parametrize("Q", [0.5, 1.0, math.sqrt(2), math.sqrt(3), 2.0, 3.0, 7.0])
def test_small_grid_is_excluded_when_n_below_r(n, r, Q):
    if n >= r:
        return
    report = classify(n, r, Q)
    if (n, r, Q) == (2, 4, 1.0):
        assert report.tl_class is TLClass.A
    else:
        assert report.tl_class is TLClass.EXCLUDED


def test_report_fields_and_message():
    report = classify(3, 3, math.sqrt(3))
    assert report.s == Fraction(3)
    assert report.admissible
    msg = report.to_msg()
    assert msg["type"] == "CLASS_REPORT"
    assert msg["class"] == "C"
    assert msg["s"] == [3, 1]
    assert any("CONJECTURAL" in note for note in msg["notes"])
    assert classify(3, 2, 2.0).s is None


def test_prior_bound_note():
    report = classify(6, 1, 5.0)
    assert report.tl_class is TLClass.EXCLUDED
    assert not report.conjecture_ok
    assert any("no solution" in note for note in report.notes)
    assert any("rank one" in note for note in report.notes)


def test_classify_rejects_bad_input():
    with pytest.raises(ParameterError):
        classify(0, 1, 1.0)
    with pytest.raises(ParameterError):
        classify(2, 1, -1.0)


# ---------------- J_infinity ----------------


def test_j_infty_values():
    assert j_infty(1) == pytest.approx(1.0)
    assert j_infty(2) == pytest.approx(math.sqrt(2))
    assert j_infty(4) == pytest.approx(math.sqrt(3))
    with pytest.raises(ParameterError):
        j_infty(0)


def test_j_infty_membership():
    assert is_in_j_infty(1.0) == 1
    assert is_in_j_infty((1 + math.sqrt(5)) / 2) == 3
    assert is_in_j_infty(1.999) is None
    assert is_in_j_infty(1.5) is None
    assert is_in_j_infty(2.5) is None


# ---------------- Q = 2 ----------------


@pytest.mark.parametrize(
    "n, r, exists, m",
    [(5, 4, True, 4), (4, 4, True, 2), (3, 2, True, 2), (4, 2, False, None), (2, 1, True, 1)],
)
def test_q2_existence_examples(n, r, exists, m):
    assert q2_existence(n, r) == (exists, m)


def test_q2_criteria_agree_on_the_grid():
    for n in range(1, 13):
        for r in range(1, 37):
            exists, m = q2_existence(n, r)
            if exists:
                assert r % m == 0 and m + r // m == n


@pytest.mark.parametrize("r", [2, 3, 5, 7, 11])
def test_q2_prime_rank_needs_n_equal_r_plus_1(r):
    for n in range(1, 40):
        assert q2_existence(n, r)[0] == (n == r + 1)


# ---------------- conjecture / unitary R ----------------


def test_conjecture_bound():
    assert conjecture_bound(5, 4, 2.0)
    assert not conjecture_bound(6, 1, 5.0)
    assert conjecture_bound(2, 2, math.sqrt(2))


@pytest.mark.parametrize(
    "n, r, Q, expected",
    [
        (2, 2, math.sqrt(2), True),
        (2, 1, 2.0, True),
        (3, 1, 3.0, False),
        (3, 3, math.sqrt(3), True),
        (4, 2, 2.0, False),
        (3, 2, 2.0, True),
    ],
)
def test_unitary_r_condition(n, r, Q, expected):
    assert unitary_r_condition(n, r, Q) is expected
