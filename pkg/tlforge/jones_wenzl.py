"""
Jones-Wenzl projectors in a tensor-space representation.

The coefficients follow rho_1 = 1/Q, rho_{k+1} = 1/(Q - rho_k) and the
projectors P_1 = I, P_{k+1} = P_k - rho_k P_k S_k P_k. A pole of rho
(Q in {2 cos(pi/(k+2))}) ends the ladder; the last projector is kept since
it is still well defined, and at such a pole it vanishes in every unitary
representation.

Projectors are stored at their native size n^k. Shifted (S_k -> S_{k+s})
and mirrored (S_k -> S_{N-k}) versions are rebuilt by running the same
recursion with remapped generators in the larger space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from . import proto
from .config import MAX_DIM, POLE_WINDOW
from .dense import DEFAULT_TOL, ComplexMatrix, Tolerance, frobenius_dist, identity, kron
from .errors import ParameterError
from .verifier import CheckReport, Report, TLSolution, check_cap, embed

INFINITE = math.inf
# zero test on U_k(Q/2) used to confirm a flagged pole
CLOSED_FORM_WINDOW = 1e-8


def is_infinite(x: float) -> bool:
    return math.isinf(x)


def _inv(x: float) -> float:
    """1/x with 1/INFINITE = 0."""
    if is_infinite(x):
        return 0.0
    if x == 0.0:
        raise ParameterError("rho vanishes; the relation is undefined at this depth")
    return 1.0 / x


# ---------------- Chebyshev / rho ----------------


def chebyshev_u(m: int, t: float) -> float:
    """U_m(t) from U_0 = 1, U_1 = 2t, U_{m+1} = 2t U_m - U_{m-1}."""
    if m < 0:
        raise ParameterError(f"Chebyshev degree must be non-negative, got {m}")
    prev, cur = 1.0, 2.0 * t
    if m == 0:
        return prev
    for _ in range(m - 1):
        prev, cur = cur, 2.0 * t * cur - prev
    return cur


@dataclass(frozen=True)
class RhoSequence:
    Q: float
    values: Tuple[float, ...]
    first_infinite: Optional[int] = None
    # indices whose INFINITE verdict came from the pole window
    flagged: Tuple[int, ...] = ()
    # flagged indices where U_k(Q/2) is not near zero either
    unconfirmed: Tuple[int, ...] = ()

    def __getitem__(self, k: int) -> float:
        """rho_k, one-based."""
        if not 1 <= k <= len(self.values):
            raise IndexError(f"rho_{k} outside computed range 1..{len(self.values)}")
        return self.values[k - 1]

    def finite_below(self, k: int) -> bool:
        """True when rho_1..rho_{k-1} are all finite."""
        return self.first_infinite is None or self.first_infinite >= k


def rho_sequence(Q: float, N: int, window: float = POLE_WINDOW) -> RhoSequence:
    if Q <= 0:
        raise ParameterError(f"Q must be positive, got {Q}")
    if N < 1:
        raise ParameterError(f"N must be at least 1, got {N}")
    values: List[float] = []
    flagged: List[int] = []
    first_infinite: Optional[int] = None
    rho = 1.0 / Q
    for k in range(1, N + 1):
        values.append(rho)
        if is_infinite(rho):
            rho = 0.0
            continue
        gap = Q - rho
        if abs(gap) <= window * (1.0 + Q):
            rho = INFINITE
            if k + 1 <= N:
                flagged.append(k + 1)
                if first_infinite is None:
                    first_infinite = k + 1
        else:
            rho = 1.0 / gap
    return RhoSequence(
        Q=float(Q),
        values=tuple(values),
        first_infinite=first_infinite,
        flagged=tuple(flagged),
        unconfirmed=tuple(
            j for j in flagged if not is_infinite(rho_closed_form(Q, j, CLOSED_FORM_WINDOW))
        ),
    )


def rho_closed_form(Q: float, k: int, window: float = POLE_WINDOW) -> float:
    """U_{k-1}(Q/2) / U_k(Q/2); INFINITE at a zero of the denominator."""
    den = chebyshev_u(k, Q / 2.0)
    if abs(den) <= window * (1.0 + abs(chebyshev_u(k - 1, Q / 2.0))):
        return INFINITE
    return chebyshev_u(k - 1, Q / 2.0) / den


def trace_formula(N: int, n: int, r: int) -> float:
    """tr(P_N) = r^{N/2} U_N(n / (2 sqrt r))."""
    if N < 0 or n < 1 or r < 1:
        raise ParameterError(f"need N >= 0, n >= 1, r >= 1, got N={N} n={n} r={r}")
    return r ** (N / 2.0) * chebyshev_u(N, n / (2.0 * math.sqrt(r)))


def trace_formula_sequence(N: int, n: int, r: int) -> List[float]:
    """tr(P_0..P_N) by tr(P_{k+1}) = n tr(P_k) - r tr(P_{k-1})."""
    traces = [1.0, float(n)]
    while len(traces) <= N:
        traces.append(n * traces[-1] - r * traces[-2])
    return traces[: N + 1]


# ---------------- ladder ----------------


@dataclass(frozen=True, eq=False)
class JwLadder:
    base: TLSolution
    N: int
    projectors: Tuple[ComplexMatrix, ...]
    rho: RhoSequence
    cap: int = MAX_DIM
    # set when the ladder stopped at a pole before reaching N
    stop_index: Optional[int] = None
    # the last built projector is zero, so every later one is too
    vanished: bool = False

    @property
    def depth(self) -> int:
        return len(self.projectors)


def _recurse(
    sol: TLSolution,
    count: int,
    sites: int,
    generator: Callable[[int], int],
    rho: RhoSequence,
    cap: int,
) -> ComplexMatrix:
    """P_count in (C^n)^{(x)sites} with S_k realized on sites generator(k), generator(k)+1."""
    check_cap(sol.n**sites, cap)
    p = identity(sol.n**sites)
    for k in range(1, count):
        s = embed(sol.T, sol.n, generator(k), sites, cap)
        p = p - rho[k] * (p @ s @ p)
    return p


def jw_ladder(
    sol: TLSolution,
    N: int,
    cap: int = MAX_DIM,
    tol: Tolerance = DEFAULT_TOL,
    on_log: Optional[Callable[[str], None]] = None,
) -> JwLadder:
    if N < 1:
        raise ParameterError(f"ladder depth must be at least 1, got {N}")
    n = sol.n
    check_cap(n**N, cap)
    rho = rho_sequence(sol.Q, N)
    projectors = [identity(n)]
    stop_index = None
    for k in range(1, N):
        if is_infinite(rho[k]):
            stop_index = k
            if on_log:
                on_log(f"rho_{k} is infinite at Q={sol.Q:.12g}; ladder stops at P_{k}")
            break
        p = kron(projectors[-1], identity(n))
        s = embed(sol.T, n, k, k + 1, cap)
        projectors.append(p - rho[k] * (p @ s @ p))
        if on_log:
            on_log(f"built P_{k + 1} ({n ** (k + 1)}x{n ** (k + 1)})")
    last = projectors[-1]
    vanished = bool(np.linalg.norm(last, "fro") <= tol.abs_eps * last.shape[0])
    for p in projectors:
        p.setflags(write=False)
    return JwLadder(
        base=sol,
        N=N,
        projectors=tuple(projectors),
        rho=rho,
        cap=cap,
        stop_index=stop_index,
        vanished=vanished and stop_index is not None,
    )


def projector(
    ladder: JwLadder, k: int, shift: int = 0, sites: Optional[int] = None
) -> ComplexMatrix:
    """P_k with generators S_j -> S_{j+shift}, acting on ``sites`` tensor factors."""
    sites = k + shift if sites is None else sites
    if k < 1 or sites < k + shift:
        raise ParameterError(f"P_{k} shifted by {shift} does not fit on {sites} sites")
    n = ladder.base.n
    if k > ladder.depth:
        if ladder.stop_index is None:
            raise ParameterError(f"P_{k} is beyond the ladder depth {ladder.depth}")
        if not ladder.vanished:
            raise ParameterError(
                f"P_{k} is undefined: rho_{ladder.stop_index} is infinite "
                f"(ladder stops at P_{ladder.depth})"
            )
        check_cap(n**sites, ladder.cap)
        return np.zeros((n**sites, n**sites), dtype=np.complex128)
    if shift == 0 and sites == k:
        return ladder.projectors[k - 1]
    return _recurse(ladder.base, k, sites, lambda j: j + shift, ladder.rho, ladder.cap)


def flipped_projector(ladder: JwLadder, N: int) -> ComplexMatrix:
    """P_N built from the mirrored generators S_k -> S_{N-k}."""
    if N > ladder.depth:
        raise ParameterError(f"P_{N} is not available (ladder depth {ladder.depth})")
    return _recurse(ladder.base, N, N, lambda j: N - j, ladder.rho, ladder.cap)


def _ratio(a: float, b: float) -> Optional[float]:
    if is_infinite(a) or b == 0.0:
        return None
    if is_infinite(b):
        return 0.0
    return a / b


def _relation(
    name: str, lhs: ComplexMatrix, rhs: ComplexMatrix, tol: Tolerance
) -> Report:
    scale = max(1.0, float(np.linalg.norm(lhs, "fro") + np.linalg.norm(rhs, "fro")))
    return Report(name, frobenius_dist(lhs, rhs), tol.abs_eps * scale)


def _pole_notes(ladder: JwLadder, upto: int) -> Tuple[str, ...]:
    hits = [k for k in ladder.rho.flagged if k <= upto]
    notes = [f"pole window triggered at rho_{k}" for k in hits]
    notes += [
        f"closed form does not confirm the pole at rho_{k}"
        for k in ladder.rho.unconfirmed
        if k <= upto
    ]
    return tuple(notes)


def _extend_rho(ladder: JwLadder, k: int) -> RhoSequence:
    if len(ladder.rho.values) >= k:
        return ladder.rho
    return rho_sequence(ladder.base.Q, k)


# ---------------- identity checks ----------------


def verify_projector(ladder: JwLadder, k: int, tol: Tolerance = DEFAULT_TOL) -> CheckReport:
    p = projector(ladder, k)
    dim = p.shape[0]
    return CheckReport(
        f"P_{k}",
        (
            Report("P*=P", frobenius_dist(p, p.conj().T), tol.abs_eps * dim),
            Report("P^2=P", frobenius_dist(p @ p, p), tol.abs_eps * dim),
        ),
    )


def verify_annihilation(ladder: JwLadder, N: int, tol: Tolerance = DEFAULT_TOL) -> CheckReport:
    """S_k P_N = P_N S_k = 0 for k = 1..N-1."""
    p = projector(ladder, N)
    dim = p.shape[0]
    zero = np.zeros_like(p)
    checks = []
    for k in range(1, N):
        s = embed(ladder.base.T, ladder.base.n, k, N, ladder.cap)
        checks.append(_relation(f"S_{k}P_{N}=0", s @ p, zero, tol))
        checks.append(_relation(f"P_{N}S_{k}=0", p @ s, zero, tol))
    if not checks:
        checks.append(Report(f"P_{N}=I", frobenius_dist(p, identity(dim)), tol.abs_eps * dim))
    return CheckReport("annihilation", tuple(checks))


def verify_flip_invariance(ladder: JwLadder, N: int, tol: Tolerance = DEFAULT_TOL) -> CheckReport:
    p = projector(ladder, N)
    return CheckReport("flip", (_relation("phi(P_N)=P_N", flipped_projector(ladder, N), p, tol),))


def verify_mirror_recursion(
    ladder: JwLadder, N: int, tol: Tolerance = DEFAULT_TOL
) -> CheckReport:
    """P_{N+1} = P'_N - rho_N P'_N S_1 P'_N."""
    sites = N + 1
    pp = projector(ladder, N, 1, sites)
    s1 = embed(ladder.base.T, ladder.base.n, 1, sites, ladder.cap)
    rhs = pp - ladder.rho[N] * (pp @ s1 @ pp)
    return CheckReport(
        "mirror-recursion",
        (_relation(f"P_{sites}=P'_{N}-rho P'S_1P'", projector(ladder, sites), rhs, tol),),
    )


def verify_square_relation(ladder: JwLadder, tol: Tolerance = DEFAULT_TOL) -> CheckReport:
    """(P_2 - P'_2)^2 = (rho_1/rho_2)(I - P_3) on three sites."""
    Q = ladder.base.Q
    d = projector(ladder, 2, 0, 3) - projector(ladder, 2, 1, 3)
    p3 = projector(ladder, 3)
    coef = (Q * Q - 1.0) / (Q * Q)
    lhs = d @ d
    rhs = coef * (identity(p3.shape[0]) - p3)
    return CheckReport("square", (_relation("(P2-P2')^2", lhs, rhs, tol),), _pole_notes(ladder, 3))


def verify_cube_relation(ladder: JwLadder, N: int, tol: Tolerance = DEFAULT_TOL) -> CheckReport:
    """(P_N - P'_N)^3 = (rho_{N-1}/rho_N)(P_N - P'_N) on N+1 sites, plus its fourth-power form."""
    if N < 2:
        raise ParameterError(f"the cube relation needs N >= 2, got {N}")
    if N > ladder.depth and not ladder.vanished:
        raise ParameterError(f"P_{N} is undefined (ladder stops at P_{ladder.depth})")
    sites = N + 1
    check_cap(ladder.base.n**sites, ladder.cap)
    d = projector(ladder, N, 0, sites) - projector(ladder, N, 1, sites)
    rho = _extend_rho(ladder, N)
    coef = _ratio(rho[N - 1], rho[N])
    notes = list(_pole_notes(ladder, N))
    if coef is None:
        # both sides vanish past a pole; compare D^3 with 0
        coef = 0.0
        notes.append(f"rho_{N - 1}/rho_{N} undefined past the pole; P_{N} = 0")
    d2 = d @ d
    return CheckReport(
        f"cube N={N}",
        (
            _relation("(P-P')^3", d2 @ d, coef * d, tol),
            _relation("(P-P')^4", d2 @ d2, coef * d2, tol),
        ),
        tuple(notes),
    )


def verify_ladder_identities(
    ladder: JwLadder, N: int, tol: Tolerance = DEFAULT_TOL
) -> CheckReport:
    """The four families of S-P-S identities on N+2 sites (five relations)."""
    if N < 2:
        raise ParameterError(f"the identities need N >= 2, got {N}")
    if N > ladder.depth:
        raise ParameterError(f"P_{N} is undefined (ladder stops at P_{ladder.depth})")
    rho = _extend_rho(ladder, N + 1)
    if not rho.finite_below(N + 1):
        raise ParameterError(f"rho_k must be finite for k <= {N}")
    sites = N + 2
    T, n, cap = ladder.base.T, ladder.base.n, ladder.cap
    check_cap(n**sites, cap)

    def s(k: int) -> ComplexMatrix:
        return embed(T, n, k, sites, cap)

    def p(k: int, shift: int) -> ComplexMatrix:
        return projector(ladder, k, shift, sites)

    a = _inv(rho[N])
    b = a * _inv(rho[N + 1])
    s1, sn, sn1 = s(1), s(N), s(N + 1)
    pn, pn_1 = p(N, 0), p(N - 1, 0)
    ppn, ppn_1 = p(N, 1), p(N - 1, 1)
    pppn, pppn_1 = p(N, 2), p(N - 1, 2)
    checks = (
        _relation("S_N P_N S_N", sn @ pn @ sn, a * (sn @ pn_1), tol),
        _relation("S_N+1 P'_N S_N+1", sn1 @ ppn @ sn1, a * (sn1 @ ppn_1), tol),
        _relation("S_1 P'_N S_1", s1 @ ppn @ s1, a * (s1 @ pppn_1), tol),
        _relation(
            "S_1 P'_N S_N+1 P'_N S_1",
            s1 @ ppn @ sn1 @ ppn @ s1,
            -b * (s1 @ pppn) + a * a * (s1 @ pppn_1),
            tol,
        ),
        _relation(
            "S_N+1 P'_N S_1 P'_N S_N+1",
            sn1 @ ppn @ s1 @ ppn @ sn1,
            -b * (sn1 @ pn) + a * a * (sn1 @ ppn_1),
            tol,
        ),
    )
    return CheckReport(f"ladder identities N={N}", checks, _pole_notes(ladder, N + 1))


def ladder_summary(ladder: JwLadder, tol: Tolerance = DEFAULT_TOL) -> List[Dict]:
    """Per-depth traces, closed-form traces and residuals, one record per projector."""
    n, r = ladder.base.n, ladder.base.r
    rows = []
    for k in range(1, ladder.depth + 1):
        p = projector(ladder, k)
        checks = verify_projector(ladder, k, tol).checks + verify_annihilation(ladder, k, tol).checks
        rows.append(
            proto.ladder_step(
                k,
                float(np.trace(p).real),
                trace_formula(k, n, r),
                None if is_infinite(ladder.rho[k]) else ladder.rho[k],
                [c.to_msg() for c in checks],
            )
        )
    return rows
