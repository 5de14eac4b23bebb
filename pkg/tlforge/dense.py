"""
Dense complex matrix helpers shared by every other module.

Matrices are plain ``numpy.ndarray`` values of dtype complex128. Functions
never mutate their inputs. Matrix-unit indices are one-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable

import numpy as np
import numpy.typing as npt
import scipy.linalg

from .config import ABS_EPS, RANK_EPS
from .errors import DimensionError, NumericalError

ComplexMatrix = npt.NDArray[np.complex128]


@dataclass(frozen=True)
class Tolerance:
    abs_eps: float = ABS_EPS
    rank_eps: float = RANK_EPS

    def __post_init__(self):
        if self.abs_eps < 0 or self.rank_eps < 0:
            raise ValueError("tolerances must be non-negative")


DEFAULT_TOL = Tolerance()


def as_matrix(a) -> ComplexMatrix:
    """Coerce to a finite 2-D complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.size == 0:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NumericalError("matrix has NaN or infinite entries")
    return m


def _require_square(a: ComplexMatrix) -> int:
    rows, cols = a.shape
    if rows != cols:
        raise DimensionError(f"expected a square matrix, got {rows}x{cols}")
    return rows


def identity(n: int) -> ComplexMatrix:
    return np.eye(n, dtype=np.complex128)


def matrix_unit(n: int, a: int, b: int) -> ComplexMatrix:
    """E^{(n)}_{ab}: the n x n matrix with a single 1 at (a, b), one-based."""
    if n < 1:
        raise DimensionError(f"matrix size must be positive, got {n}")
    if not (1 <= a <= n and 1 <= b <= n):
        raise DimensionError(f"matrix unit index ({a}, {b}) out of range for n={n}")
    e = np.zeros((n, n), dtype=np.complex128)
    e[a - 1, b - 1] = 1.0
    return e


def kron(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    return np.kron(a, b)


def kron_all(factors: Iterable[ComplexMatrix]) -> ComplexMatrix:
    return reduce(np.kron, factors, np.ones((1, 1), dtype=np.complex128))


def dagger(a: ComplexMatrix) -> ComplexMatrix:
    return a.conj().T


def trace(a: ComplexMatrix) -> complex:
    _require_square(a)
    return complex(np.trace(a))


def matmul(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def add(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    if a.shape != b.shape:
        raise DimensionError(f"cannot add {a.shape} and {b.shape}")
    return a + b


def scale(c: complex, a: ComplexMatrix) -> ComplexMatrix:
    return c * a


def frobenius_dist(a: ComplexMatrix, b: ComplexMatrix) -> float:
    if a.shape != b.shape:
        raise DimensionError(f"cannot compare {a.shape} and {b.shape}")
    return float(np.linalg.norm(a - b, "fro"))


def singular_values(a: ComplexMatrix) -> np.ndarray:
    try:
        return scipy.linalg.svdvals(a)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"SVD did not converge: {e}") from e


def rank(a: ComplexMatrix, tol: Tolerance = DEFAULT_TOL) -> int:
    s = singular_values(a)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.rank_eps * s[0]))


def is_hermitian(a: ComplexMatrix, tol: Tolerance = DEFAULT_TOL) -> bool:
    dim = _require_square(a)
    return frobenius_dist(a, dagger(a)) <= tol.abs_eps * dim


def is_unitary(a: ComplexMatrix, tol: Tolerance = DEFAULT_TOL) -> bool:
    dim = _require_square(a)
    return frobenius_dist(a @ dagger(a), identity(dim)) <= tol.abs_eps * dim


def is_psd(a: ComplexMatrix, tol: Tolerance = DEFAULT_TOL) -> bool:
    if not is_hermitian(a, tol):
        return False
    h = (a + dagger(a)) / 2
    try:
        evals = np.linalg.eigvalsh(h)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"eigensolver did not converge: {e}") from e
    return bool(evals.min() >= -tol.abs_eps * np.linalg.norm(a, "fro"))
