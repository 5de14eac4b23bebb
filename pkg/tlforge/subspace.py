"""
Subspace presentation of solutions.

A family V_1..V_r in M_n, orthonormal under tr(V_s* V_m), spans a subspace
of C^n (x) C^n through v = sum V_ab e_a (x) e_b. T = Q P is a solution
exactly when Q W is unitary, where W is the r x r block matrix with block
(s, m) equal to V_m conj(V_s).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from . import proto
from .dense import (
    DEFAULT_TOL,
    ComplexMatrix,
    Tolerance,
    as_matrix,
    frobenius_dist,
    identity,
    is_unitary,
    singular_values,
)
from .errors import DimensionError, ParameterError
from .verifier import CheckReport, Report


@dataclass(frozen=True, eq=False)
class VSystem:
    n: int
    mats: Tuple[ComplexMatrix, ...]

    def __post_init__(self):
        if self.n < 1:
            raise DimensionError(f"n must be positive, got {self.n}")
        if not self.mats:
            raise DimensionError("a V-system needs at least one matrix")
        for v in self.mats:
            if v.shape != (self.n, self.n):
                raise DimensionError(f"expected {self.n}x{self.n} matrices, got {v.shape}")
        if len(self.mats) > self.n * self.n:
            raise DimensionError(f"r={len(self.mats)} exceeds n^2={self.n * self.n}")

    @classmethod
    def of(cls, n: int, mats: Sequence) -> "VSystem":
        return cls(n=n, mats=tuple(as_matrix(v) for v in mats))

    @property
    def r(self) -> int:
        return len(self.mats)

    def vectors(self) -> ComplexMatrix:
        """n^2 x r matrix whose columns are the vectorized V_s (row index on the left factor)."""
        return np.stack([v.reshape(-1) for v in self.mats], axis=1)

    def to_msg(self) -> Dict:
        return proto.vsystem(self.n, self.mats)

    @classmethod
    def from_msg(cls, msg: Dict) -> "VSystem":
        n, mats = proto.vsystem_from_msg(msg)
        return cls.of(n, mats)


def gram(vs: VSystem) -> ComplexMatrix:
    a = vs.vectors()
    return a.conj().T @ a


def check_orthonormal(vs: VSystem, tol: Tolerance = DEFAULT_TOL) -> CheckReport:
    deviation = float(np.max(np.abs(gram(vs) - identity(vs.r))))
    return CheckReport("orthonormal", (Report("tr(Vs*Vm)=delta", deviation, tol.abs_eps * vs.r),))


def _require_orthonormal(vs: VSystem, tol: Tolerance) -> None:
    report = check_orthonormal(vs, tol)
    if not report.passed:
        raise ParameterError(
            f"V-system is not orthonormal (Gram deviation {report.worst.residual:.3e}); "
            f"call orthonormalize() explicitly if a new basis is acceptable"
        )


def orthonormalize(vs: VSystem, tol: Tolerance = DEFAULT_TOL) -> VSystem:
    a = vs.vectors()
    q, rr = np.linalg.qr(a)
    if np.min(np.abs(np.diag(rr))) <= tol.rank_eps * max(1.0, np.max(np.abs(rr))):
        raise ParameterError("V-system is linearly dependent")
    return VSystem.of(vs.n, [q[:, s].reshape(vs.n, vs.n) for s in range(vs.r)])


def projection_from_vs(vs: VSystem, tol: Tolerance = DEFAULT_TOL) -> ComplexMatrix:
    """Orthogonal projection onto span{v_s}: sum_s v_s v_s*."""
    _require_orthonormal(vs, tol)
    a = vs.vectors()
    return a @ a.conj().T


def w_matrix(vs: VSystem) -> ComplexMatrix:
    return np.block([[vm @ vs.mats[s].conj() for vm in vs.mats] for s in range(vs.r)])


def unitarity_criterion(vs: VSystem, Q: float, tol: Tolerance = DEFAULT_TOL) -> CheckReport:
    _require_orthonormal(vs, tol)
    qw = Q * w_matrix(vs)
    dim = qw.shape[0]
    residual = frobenius_dist(qw @ qw.conj().T, identity(dim))
    return CheckReport("unitarity", (Report("QW unitary", residual, tol.abs_eps * dim),))


def infer_q(vs: VSystem, tol: Tolerance = DEFAULT_TOL) -> Optional[float]:
    """1/sigma when every singular value of W equals sigma; None otherwise."""
    _require_orthonormal(vs, tol)
    sv = singular_values(w_matrix(vs))
    if sv[-1] <= 0 or float(np.ptp(sv)) > tol.abs_eps * sv.size:
        return None
    return float(1.0 / np.mean(sv))


def gauge_transform(vs: VSystem, g, tol: Tolerance = DEFAULT_TOL) -> VSystem:
    """V_k -> g V_k g^t (plain transpose) for unitary g."""
    g = as_matrix(g)
    if g.shape != (vs.n, vs.n):
        raise DimensionError(f"gauge must be {vs.n}x{vs.n}, got {g.shape}")
    if not is_unitary(g, tol):
        raise ParameterError("gauge matrix is not unitary")
    return VSystem.of(vs.n, [g @ v @ g.T for v in vs.mats])


def quartic_identity_check(vs: VSystem, Q: float, tol: Tolerance = DEFAULT_TOL) -> CheckReport:
    """Q^2 sum_s V_s conj(V_l) V_p^t V_s* = delta_lp I for every pair (l, p)."""
    _require_orthonormal(vs, tol)
    eye = identity(vs.n)
    worst = 0.0
    for l, vl in enumerate(vs.mats):
        for p, vp in enumerate(vs.mats):
            acc = sum(vs_ @ vl.conj() @ vp.T @ vs_.conj().T for vs_ in vs.mats)
            target = eye if l == p else np.zeros_like(eye)
            worst = max(worst, frobenius_dist(Q * Q * acc, target))
    return CheckReport("quartic", (Report("Q^2 sum VVVV=delta I", worst, tol.abs_eps * vs.r * vs.n),))


def vsystem_from_projection(T, n: int, Q: float, tol: Tolerance = DEFAULT_TOL) -> VSystem:
    """An orthonormal V-system spanning the range of T/Q (eigenvalue-1 eigenvectors)."""
    p = as_matrix(T) / Q
    if p.shape != (n * n, n * n):
        raise DimensionError(f"expected a {n * n}x{n * n} matrix, got {p.shape}")
    evals, evecs = np.linalg.eigh((p + p.conj().T) / 2)
    keep = np.flatnonzero(evals > 0.5)
    if keep.size == 0:
        raise ParameterError("T has no eigenvalue Q; it cannot come from a V-system")
    return VSystem.of(n, [evecs[:, i].reshape(n, n) for i in keep])
