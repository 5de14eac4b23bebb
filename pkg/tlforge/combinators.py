"""
Ways of building new solutions out of old ones, and the recipes that reach
every Q above a threshold for ranks 2, 3 and 4.
"""

from __future__ import annotations

import math
from functools import reduce
from typing import Callable, Dict, List, Optional, Tuple

import scipy.linalg

from .catalog import (
    Family,
    FamilyInstance,
    checked,
    n4r4_at_q,
    n_r_plus_1,
    n_r_plus_1_at_q,
    q_sqrt2,
    q_sqrt3,
    rank_one_q,
    solve_rank_one_modulus,
    trivial,
)
from .config import MAX_DIM, SEED
from .dense import DEFAULT_TOL, Tolerance, kron
from .errors import ParameterError, VerificationError
from .verifier import TLSolution, check_cap, embed, verify_all

__all__ = [
    "construct_at_q",
    "direct_sum",
    "fuse",
    "product_rank_one",
    "q_threshold",
    "q_threshold_closed_form",
    "solve_rank_one_modulus",
]


def direct_sum(a: FamilyInstance, b: FamilyInstance, tol: Tolerance = DEFAULT_TOL) -> FamilyInstance:
    """(sqrt(Q1) V1_k (+) sqrt(Q2) V2_k) / sqrt(Q1+Q2): n adds, Q adds, r is kept."""
    if a.r != b.r:
        raise ParameterError(f"direct sum needs equal ranks, got r={a.r} and r={b.r}")
    s = 1 / math.sqrt(a.Q + b.Q)
    wa, wb = math.sqrt(a.Q), math.sqrt(b.Q)
    mats = [
        s * scipy.linalg.block_diag(wa * va, wb * vb)
        for va, vb in zip(a.vs.mats, b.vs.mats)
    ]
    params = {"parts": [_describe(a), _describe(b)]}
    return checked(a.n + b.n, mats, a.Q + b.Q, Family.SUM, params, tol)


def product_rank_one(
    a: FamilyInstance, b: FamilyInstance, tol: Tolerance = DEFAULT_TOL
) -> FamilyInstance:
    """V_k (x) V_b for a rank-one ``b``: n and Q multiply, r is kept."""
    if b.r != 1:
        raise ParameterError(f"second factor must have rank one, got r={b.r}")
    vb = b.vs.mats[0]
    mats = [kron(va, vb) for va in a.vs.mats]
    params = {"parts": [_describe(a), _describe(b)]}
    return checked(a.n * b.n, mats, a.Q * b.Q, Family.PRODUCT, params, tol)


def _describe(inst: FamilyInstance) -> Dict:
    return {"family": inst.family.value, "n": inst.n, "r": inst.r, "Q": inst.Q}


def fuse(sol: TLSolution, tol: Tolerance = DEFAULT_TOL, cap: int = MAX_DIM) -> TLSolution:
    """
    T23 T12 T34 T23 on four sites, read as a solution on two sites of
    dimension n^2. Q becomes Q^2 and the rank becomes r^2.
    """
    n = sol.n
    check_cap(n**4, cap)
    t12, t23, t34 = (embed(sol.T, n, k, 4, cap) for k in (1, 2, 3))
    fused = t23 @ t12 @ t34 @ t23
    label = f"fused({sol.label or 'solution'}) site dim {n * n}"
    out = verify_all(fused, n * n, sol.Q**2, tol, label=label, cap=cap)
    if out.r != sol.r**2:
        raise VerificationError("rank", float(abs(out.r - sol.r**2)), label)
    return out


# ---------------- thresholds ----------------


def _split(r: int, n: int) -> Tuple[int, int]:
    """n = k(r+1) - m with 0 <= m <= r."""
    if r not in (2, 3, 4):
        raise ParameterError(f"recipes exist for r in 2, 3, 4; got r={r}")
    if int(n) != n or n <= r:
        raise ParameterError(f"recipes need an integer n > r, got n={n}")
    if (r, n) == (3, 5):
        raise ParameterError("r=3, n=5 is not covered by the rank-3 recipe")
    k = -(-n // (r + 1))
    return k, k * (r + 1) - n


def q_threshold(r: int, n: int) -> float:
    """Smallest Q reached by ``construct_at_q(r, n, .)``."""
    k, m = _split(r, n)
    if r == 4:
        return float(2 * k) if m <= 2 else float(2 * k - 1)
    return 2 * (k - m) + m * math.sqrt(r)


def q_threshold_closed_form(r: int, n: int) -> float:
    """The same threshold written as 2n/(r+1) plus an m-dependent excess."""
    k, m = _split(r, n)
    if r == 4 and m in (3, 4):
        return (2 * n + 2 * m - r - 1) / (r + 1)
    sr = math.sqrt(r)
    return (2 * n + m * sr * (sr - 1) ** 2) / (r + 1)


# ---------------- recipes ----------------


def construct_at_q(
    r: int,
    n: int,
    Q: float,
    tol: Tolerance = DEFAULT_TOL,
    on_log: Optional[Callable[[str], None]] = None,
    seed: int = SEED,
) -> FamilyInstance:
    """
    An explicit rank-r solution in M_{n^2} at the given Q >= q_threshold(r, n).

    Blocks of size r (fixed Q) and size r+1 (tunable Q >= 2) are direct-summed;
    the excess over the threshold goes to the first tunable block. When only
    fixed blocks are needed, the excess goes to the n4r4 block (r=4) or to a
    rank-one tensor factor (r=2, 3).
    """
    k, m = _split(r, n)
    threshold = q_threshold(r, n)
    if Q < threshold - 1e-12 * max(1.0, threshold):
        raise ParameterError(f"Q={Q} is below the threshold {threshold:.12g} for r={r}, n={n}")
    slack = max(Q - threshold, 0.0)

    blocks: List[FamilyInstance]
    if r in (2, 3):
        base = q_sqrt2(tol) if r == 2 else q_sqrt3(tol)
        if k == m:
            factor = rank_one_q(m, Q / base.Q, tol)
            inst = product_rank_one(base, factor, tol)
            blocks = [base, factor]
            return _finish(r, n, Q, threshold, k, m, inst, blocks, "product", tol, on_log)
        blocks = [base] * m + _tunable(r + 1, k - m, slack, tol)
    elif m <= 2:
        if k > m:
            blocks = [n4r4_at_q(2.0, tol, seed)] * m + _tunable(5, k - m, slack, tol)
        else:
            blocks = [n4r4_at_q(2.0 + slack, tol, seed)] + [n4r4_at_q(2.0, tol, seed)] * (m - 1)
    elif m == 3:
        blocks = [trivial(2, tol)] + _tunable(5, k - 1, slack, tol)
    elif k > 2:
        blocks = [n4r4_at_q(2.0, tol, seed), trivial(2, tol)] + _tunable(5, k - 2, slack, tol)
    else:
        blocks = [n4r4_at_q(2.0 + slack, tol, seed), trivial(2, tol)]

    inst = reduce(lambda acc, b: direct_sum(acc, b, tol), blocks)
    return _finish(r, n, Q, threshold, k, m, inst, blocks, "sum", tol, on_log)


def _tunable(size: int, count: int, slack: float, tol: Tolerance) -> List[FamilyInstance]:
    if count <= 0:
        return []
    first = n_r_plus_1_at_q(size, 2.0 + slack, tol)
    return [first] + [n_r_plus_1(size, tol=tol)] * (count - 1)


def _finish(
    r: int,
    n: int,
    Q: float,
    threshold: float,
    k: int,
    m: int,
    inst: FamilyInstance,
    blocks: List[FamilyInstance],
    how: str,
    tol: Tolerance,
    on_log: Optional[Callable[[str], None]],
) -> FamilyInstance:
    if inst.n != n or inst.r != r:
        raise VerificationError("shape", float(abs(inst.n - n) + abs(inst.r - r)), f"r={r} n={n}")
    if abs(inst.Q - Q) > 1e-12 * max(1.0, Q):
        raise VerificationError("Q", abs(inst.Q - Q), f"r={r} n={n}")
    params = {
        "r": r,
        "n": n,
        "k": k,
        "m": m,
        "Q_target": Q,
        "threshold": threshold,
        "combine": how,
        "blocks": [_describe(b) for b in blocks],
    }
    if on_log:
        names = " + ".join(f"{b.family.value}(n={b.n},Q={b.Q:.6g})" for b in blocks)
        on_log(f"construct r={r} n={n}: k={k} m={m} threshold={threshold:.12g} via {how}: {names}")
    return checked(n, inst.vs.mats, inst.Q, Family.CONSTRUCT, params, tol)
