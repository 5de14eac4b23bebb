"""
Tensor-space representations of the Temperley-Lieb algebra built from a
single matrix T in M_{n^2}, together with the Yang-Baxter R-matrices they
Baxterize into.

A matrix T generates the representation S_k -> I^{(k-1)} (x) T (x) I^{(N-k-1)}
on (C^n)^{(x)N} when

    T* = T,  T^2 = Q T                       (Hermitian, scaled idempotent)
    T12 T23 T12 = T12,  T23 T12 T23 = T23    (adjacent triple relations)

``verify_all`` checks both groups plus the rank and hands back an immutable
``TLSolution``; every other module only accepts verified solutions.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import proto
from .config import MAX_DIM, SPECTRAL_GRID, YB_WORKERS
from .dense import (
    DEFAULT_TOL,
    ComplexMatrix,
    Tolerance,
    as_matrix,
    frobenius_dist,
    identity,
    is_unitary,
    kron_all,
    rank,
)
from .errors import CapExceededError, DimensionError, ParameterError, VerificationError


# ---------------- reports ----------------


@dataclass(frozen=True)
class Report:
    relation: str
    residual: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.threshold

    def to_msg(self) -> Dict:
        return proto.report(self.relation, self.residual, self.passed)


@dataclass(frozen=True)
class CheckReport:
    name: str
    checks: Tuple[Report, ...]
    notes: Tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def worst(self) -> Report:
        """The check closest to (or furthest past) its threshold."""
        return max(self.checks, key=lambda c: c.residual / max(c.threshold, 1e-300))

    def to_msgs(self) -> List[Dict]:
        return [c.to_msg() for c in self.checks]


# ---------------- solution types ----------------


@dataclass(frozen=True, eq=False)
class TLSolution:
    T: ComplexMatrix
    n: int
    Q: float
    r: int
    label: str = ""

    @property
    def dim(self) -> int:
        return self.n * self.n


@dataclass(frozen=True)
class SpectralParams:
    gamma: complex
    lam: float
    mu: float

    @classmethod
    def for_solution(cls, sol: TLSolution, lam: float, mu: float) -> "SpectralParams":
        return cls(gamma=gamma_from_q(sol.Q), lam=lam, mu=mu)

    def q_residual(self, q: float) -> float:
        return abs(cmath.exp(self.gamma) + cmath.exp(-self.gamma) - q)


# ---------------- representation ----------------


def site_count(dim: int) -> int:
    """n for a matrix of size n^2; raises if ``dim`` is not a perfect square."""
    n = math.isqrt(dim)
    if n * n != dim:
        raise DimensionError(f"matrix size {dim} is not a perfect square n^2")
    return n


def check_cap(dim: int, cap: int = MAX_DIM) -> None:
    if dim > cap:
        raise CapExceededError(dim, cap)


def embed(T: ComplexMatrix, n: int, k: int, N: int, cap: int = MAX_DIM) -> ComplexMatrix:
    """I_n^{(k-1)} (x) T (x) I_n^{(N-k-1)}: T acting on sites k, k+1 of N."""
    if T.shape != (n * n, n * n):
        raise DimensionError(f"expected a {n * n}x{n * n} matrix, got {T.shape}")
    if N < 2 or not 1 <= k <= N - 1:
        raise DimensionError(f"site index k={k} out of range for N={N}")
    check_cap(n**N, cap)
    return kron_all([identity(n ** (k - 1)), T, identity(n ** (N - k - 1))])


def verify_t1(T: ComplexMatrix, Q: float, tol: Tolerance = DEFAULT_TOL) -> CheckReport:
    dim = T.shape[0]
    site_count(dim)
    threshold = tol.abs_eps * dim
    herm = frobenius_dist(T, T.conj().T)
    idem = frobenius_dist(T @ T, Q * T)
    return CheckReport(
        "T1",
        (
            Report("T*=T", herm, threshold),
            Report("T^2=QT", idem, threshold),
        ),
    )


def verify_t2(
    T: ComplexMatrix, n: int, tol: Tolerance = DEFAULT_TOL, cap: int = MAX_DIM
) -> CheckReport:
    t12 = embed(T, n, 1, 3, cap)
    t23 = embed(T, n, 2, 3, cap)
    threshold = tol.abs_eps * n**3
    return CheckReport(
        "T2",
        (
            Report("T12T23T12=T12", frobenius_dist(t12 @ t23 @ t12, t12), threshold),
            Report("T23T12T23=T23", frobenius_dist(t23 @ t12 @ t23, t23), threshold),
        ),
    )


def verify_all(
    T,
    n: int,
    Q: float,
    tol: Tolerance = DEFAULT_TOL,
    label: str = "",
    cap: int = MAX_DIM,
) -> TLSolution:
    """Run every relation and return the verified solution; raises on the first failure."""
    if Q <= 0:
        raise ParameterError(f"Q must be positive, got {Q}")
    T = as_matrix(T).copy()
    if site_count(T.shape[0]) != n:
        raise DimensionError(f"expected a {n * n}x{n * n} matrix, got {T.shape}")
    for check in (verify_t1(T, Q, tol), verify_t2(T, n, tol, cap)):
        if not check.passed:
            bad = check.worst
            raise VerificationError(bad.relation, bad.residual, label or None)
    T.setflags(write=False)
    return TLSolution(T=T, n=n, Q=float(Q), r=rank(T, tol), label=label)


# ---------------- R-matrices ----------------


def gamma_from_q(Q: float) -> complex:
    """Principal gamma with e^gamma + e^-gamma = Q; purely imaginary (Im > 0) when Q < 2."""
    if Q <= 0:
        raise ParameterError(f"Q must be positive, got {Q}")
    if Q >= 2:
        return complex(math.acosh(Q / 2), 0.0)
    return complex(0.0, math.acos(Q / 2))


def r_matrix(sol: TLSolution, lam: float) -> ComplexMatrix:
    """R(lambda) = sinh(lambda + gamma) I - sinh(lambda) T."""
    gamma = gamma_from_q(sol.Q)
    return cmath.sinh(lam + gamma) * identity(sol.dim) - cmath.sinh(lam) * sol.T


def constant_r_matrix(sol: TLSolution) -> ComplexMatrix:
    """R = e^gamma I - T; gives a braid group representation."""
    return cmath.exp(gamma_from_q(sol.Q)) * identity(sol.dim) - sol.T


def _three_factor_check(
    name: str,
    left: Sequence[ComplexMatrix],
    right: Sequence[ComplexMatrix],
    tol: Tolerance,
    notes: Tuple[str, ...] = (),
) -> CheckReport:
    lhs = left[0] @ left[1] @ left[2]
    rhs = right[0] @ right[1] @ right[2]
    scale = float(np.prod([np.linalg.norm(f, "fro") for f in left]))
    threshold = tol.abs_eps * scale if scale > 0.0 else tol.abs_eps
    return CheckReport(
        name,
        (Report(name, frobenius_dist(lhs, rhs), threshold),),
        notes,
    )


def verify_yang_baxter(
    sol: TLSolution,
    lam: float,
    mu: float,
    tol: Tolerance = DEFAULT_TOL,
    cap: int = MAX_DIM,
) -> CheckReport:
    params = SpectralParams.for_solution(sol, lam, mu)
    n = sol.n

    def r12(x: float) -> ComplexMatrix:
        return embed(r_matrix(sol, x), n, 1, 3, cap)

    def r23(x: float) -> ComplexMatrix:
        return embed(r_matrix(sol, x), n, 2, 3, cap)

    return _three_factor_check(
        "YB",
        (r12(lam), r23(lam + mu), r12(mu)),
        (r23(mu), r12(lam + mu), r23(lam)),
        tol,
        (f"lambda={lam} mu={mu} gamma={params.gamma:.12g}",),
    )


def verify_braid(
    sol: TLSolution, tol: Tolerance = DEFAULT_TOL, cap: int = MAX_DIM
) -> CheckReport:
    R = constant_r_matrix(sol)
    r12 = embed(R, sol.n, 1, 3, cap)
    r23 = embed(R, sol.n, 2, 3, cap)
    return _three_factor_check("braid", (r12, r23, r12), (r23, r12, r23), tol)


def yang_baxter_grid(
    sol: TLSolution,
    grid: Sequence[float] = SPECTRAL_GRID,
    tol: Tolerance = DEFAULT_TOL,
    cap: int = MAX_DIM,
    workers: int = YB_WORKERS,
    on_log: Optional[Callable[[str], None]] = None,
) -> List[CheckReport]:
    """Yang-Baxter checks on grid x grid; points are independent so they run on a pool."""
    points = [(lam, mu) for lam in grid for mu in grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        reports = list(
            pool.map(lambda p: verify_yang_baxter(sol, p[0], p[1], tol, cap), points)
        )
    if on_log:
        failed = sum(not r.passed for r in reports)
        on_log(f"Yang-Baxter grid for {sol.label or 'solution'}: {len(points) - failed}/{len(points)} pass")
    return reports


def is_r_unitary(sol: TLSolution, tol: Tolerance = DEFAULT_TOL) -> bool:
    return is_unitary(constant_r_matrix(sol), tol)
