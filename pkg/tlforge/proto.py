from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionError, ParameterError


# ---------------- numbers ----------------


def complex_pair(c: complex) -> List[float]:
    c = complex(c)
    return [c.real, c.imag]


def pair_complex(p: Sequence[float]) -> complex:
    if len(p) != 2:
        raise ParameterError(f"complex values are [re, im] pairs, got {p!r}")
    return complex(float(p[0]), float(p[1]))


# ---------------- matrices ----------------


def matrix(a: np.ndarray) -> Dict[str, Any]:
    rows, cols = a.shape
    return {
        "rows": rows,
        "cols": cols,
        "data": [complex_pair(x) for x in np.asarray(a).reshape(-1)],
    }


def matrix_from_msg(msg: Dict[str, Any]) -> np.ndarray:
    try:
        rows = int(msg["rows"])
        cols = int(msg["cols"])
        data = msg["data"]
    except (KeyError, TypeError, ValueError) as e:
        raise ParameterError(f"malformed matrix message: {e}") from e
    if rows < 1 or cols < 1:
        raise DimensionError(f"matrix shape must be positive, got {rows}x{cols}")
    if len(data) != rows * cols:
        raise DimensionError(
            f"matrix data has {len(data)} entries, expected {rows}x{cols}={rows * cols}"
        )
    flat = np.array([pair_complex(p) for p in data], dtype=np.complex128)
    if not np.all(np.isfinite(flat)):
        raise ParameterError("matrix data has NaN or infinite entries")
    return flat.reshape(rows, cols)


def vsystem(n: int, mats: Sequence[np.ndarray]) -> Dict[str, Any]:
    return {"n": n, "r": len(mats), "mats": [matrix(v) for v in mats]}


def vsystem_from_msg(msg: Dict[str, Any]) -> Tuple[int, List[np.ndarray]]:
    try:
        n = int(msg["n"])
        r = int(msg["r"])
        mats = [matrix_from_msg(m) for m in msg["mats"]]
    except (KeyError, TypeError) as e:
        raise ParameterError(f"malformed V-system message: {e}") from e
    if len(mats) != r:
        raise DimensionError(f"V-system declares r={r} but carries {len(mats)} matrices")
    return n, mats


# ---------------- reports ----------------


def report(relation: str, residual: float, passed: bool) -> Dict[str, Any]:
    return {"relation": relation, "residual": float(residual), "pass": bool(passed)}


def instance(
    family: str,
    n: int,
    r: int,
    q: float,
    params: Dict[str, Any],
    mats: Sequence[np.ndarray],
    t: Optional[np.ndarray] = None,
) -> Dict[str, Any]:
    msg = {
        "type": "FAMILY_INSTANCE",
        "family": family,
        "n": n,
        "r": r,
        "Q": q,
        "params": jsonable(params),
        "vsystem": vsystem(n, mats),
    }
    if t is not None:
        msg["T"] = matrix(t)
    return msg


def solution(label: str, n: int, r: int, q: float, t: np.ndarray) -> Dict[str, Any]:
    return {
        "type": "TL_SOLUTION",
        "label": label,
        "n": n,
        "r": r,
        "Q": q,
        "T": matrix(t),
    }


def ladder_step(
    k: int, trace: float, formula: float, rho: Optional[float], residuals: List[Dict]
) -> Dict[str, Any]:
    return {
        "type": "JW_STEP",
        "k": k,
        "trace": trace,
        "trace_formula": formula,
        "rho": rho,
        "checks": residuals,
    }


def jsonable(value: Any) -> Any:
    """Turn parameter records (complex numbers, tuples, numpy scalars) into JSON types."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, (complex, np.complexfloating)):
        return complex_pair(value)
    if isinstance(value, np.generic):
        return value.item()
    return value


def class_report(
    n: int,
    r: int,
    q: float,
    tl_class: str,
    s: Optional[List[int]],
    q2_exists: bool,
    q2_divisor: Optional[int],
    conjecture_ok: bool,
    notes: Sequence[str],
) -> Dict[str, Any]:
    return {
        "type": "CLASS_REPORT",
        "n": n,
        "r": r,
        "Q": q,
        "class": tl_class,
        "s": s,
        "q2_exists": q2_exists,
        "q2_divisor": q2_divisor,
        "conjecture_ok": conjecture_ok,
        "notes": list(notes),
    }
