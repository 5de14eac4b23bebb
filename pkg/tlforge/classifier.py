"""
Arithmetic constraints on (n, r, Q).

``classify`` sorts a triple into one of the four admissible classes or marks
it excluded. The Q = 2 existence criterion, J_infinity membership and the
conjectured lower bound Q(r+1) >= 2n are exposed separately; the conjecture
only ever annotates reports.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Tuple

from . import proto
from .config import J_SCAN
from .errors import NumericalError, ParameterError

# Q comparisons only; n and r are compared as integers.
CLASS_TOL = 1e-9


class TLClass(enum.Enum):
    A = "A"  # r = n^2, Q = 1
    B = "B"  # r = n^2/2, Q = sqrt 2
    C = "C"  # r = n^2/3, Q = sqrt 3
    D = "D"  # r <= n^2/4, Q >= max(2, n/r)
    EXCLUDED = "Excluded"


@dataclass(frozen=True)
class ClassReport:
    n: int
    r: int
    Q: float
    tl_class: TLClass
    s: Optional[Fraction]
    q2_exists: bool
    q2_divisor: Optional[int]
    conjecture_ok: bool
    notes: Tuple[str, ...] = ()

    @property
    def admissible(self) -> bool:
        return self.tl_class is not TLClass.EXCLUDED

    def to_msg(self) -> Dict:
        s = None if self.s is None else [self.s.numerator, self.s.denominator]
        return proto.class_report(
            self.n,
            self.r,
            self.Q,
            self.tl_class.value,
            s,
            self.q2_exists,
            self.q2_divisor,
            self.conjecture_ok,
            self.notes,
        )


def _check_nr(n: int, r: int) -> None:
    if int(n) != n or int(r) != r or n < 1 or r < 1:
        raise ParameterError(f"n and r must be positive integers, got n={n}, r={r}")


def j_infty(k: int) -> float:
    """2 cos(pi/(k+2)); the values of Q below 2 at which rho has a pole."""
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    return 2 * math.cos(math.pi / (k + 2))


def is_in_j_infty(Q: float, tol: float = CLASS_TOL, scan: int = J_SCAN) -> Optional[int]:
    for k in range(1, scan + 1):
        v = j_infty(k)
        if abs(Q - v) <= tol:
            return k
        if v > Q + tol:
            break
    return None


def _perfect_square(d: int) -> Optional[int]:
    if d < 0:
        return None
    s = math.isqrt(d)
    return s if s * s == d else None


def q2_existence(n: int, r: int) -> Tuple[bool, Optional[int]]:
    """
    Whether a rank-r solution in M_{n^2} exists at Q = 2, with the divisor
    witness m of r satisfying n = m + r/m (the largest one).
    """
    _check_nr(n, r)
    root = _perfect_square(n * n - 4 * r)
    by_square = root is not None
    witness = (n + root) // 2 if by_square else None
    by_divisor = any(r % m == 0 and m + r // m == n for m in range(1, r + 1))
    if by_square != by_divisor:
        raise NumericalError(f"Q=2 criteria disagree for n={n}, r={r}")
    if witness is not None and (r % witness or witness + r // witness != n):
        raise NumericalError(f"Q=2 witness m={witness} does not satisfy n = m + r/m")
    return by_square, witness


def conjecture_bound(n: int, r: int, Q: float, tol: float = CLASS_TOL) -> bool:
    """Q(r+1) >= 2n. Conjectural: a False here proves nothing."""
    return Q * (r + 1) >= 2 * n - tol


def unitary_r_condition(n: int, r: int, Q: float, tol: float = CLASS_TOL) -> bool:
    """Arithmetic condition under which the constant R-matrix can be unitary."""
    _check_nr(n, r)
    for q, mult in ((1.0, 1), (math.sqrt(2), 2), (math.sqrt(3), 3)):
        if abs(Q - q) <= tol and n * n == mult * r:
            return True
    return abs(Q - 2) <= tol and _perfect_square(n * n - 4 * r) is not None


def _class_of(n: int, r: int, Q: float, tol: float) -> TLClass:
    n2 = n * n
    if r == n2 and abs(Q - 1) <= tol:
        return TLClass.A
    if n2 == 2 * r and abs(Q - math.sqrt(2)) <= tol:
        return TLClass.B
    if n2 == 3 * r and abs(Q - math.sqrt(3)) <= tol:
        return TLClass.C
    if 4 * r <= n2 and Q >= max(2.0, n / r) - tol:
        return TLClass.D
    return TLClass.EXCLUDED


def classify(n: int, r: int, Q: float, tol: float = CLASS_TOL) -> ClassReport:
    _check_nr(n, r)
    if not Q > 0:
        raise ParameterError(f"Q must be positive, got {Q}")
    tl_class = _class_of(n, r, Q, tol)
    q2_exists, q2_divisor = q2_existence(n, r)
    conjecture_ok = conjecture_bound(n, r, Q, tol)

    notes = []
    if Q * r < n - tol:
        notes.append(f"Q*r = {Q * r:.12g} < n = {n}: no solution")
    if r == 1 and not (n == 1 and abs(Q - 1) <= tol) and not (n >= 2 and Q >= n - tol):
        notes.append("rank one needs Q = n = 1 or Q >= n >= 2")
    if Q < 2 - tol:
        k = is_in_j_infty(Q, tol)
        if k is not None:
            notes.append(f"Q = 2cos(pi/{k + 2}) lies in J_infinity")
        elif Q > j_infty(J_SCAN):
            notes.append(f"J_infinity membership indeterminate beyond k={J_SCAN}")
        else:
            notes.append("Q < 2 is not in J_infinity")
    if abs(Q - 2) <= tol:
        if q2_exists:
            notes.append(f"Q=2 solutions exist: n = {q2_divisor} + {r}/{q2_divisor}")
        else:
            notes.append(f"no Q=2 solution: n^2-4r = {n * n - 4 * r} is not a perfect square")
    if unitary_r_condition(n, r, Q, tol):
        notes.append("constant R-matrix may be unitary")
    notes.append(f"CONJECTURAL Q(r+1) >= 2n: {'holds' if conjecture_ok else 'violated'}")

    s = Fraction(n * n, r)
    return ClassReport(
        n=n,
        r=r,
        Q=float(Q),
        tl_class=tl_class,
        s=s if s.denominator == 1 else None,
        q2_exists=q2_exists,
        q2_divisor=q2_divisor,
        conjecture_ok=conjecture_ok,
        notes=tuple(notes),
    )
