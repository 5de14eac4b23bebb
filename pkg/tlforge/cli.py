"""
Command-line front end.

stdout carries JSON only (one message per line, or indented with
``--format pretty``); progress goes to stderr. Exit codes: 0 success,
1 a relation failed to verify, 2 invalid input.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import re
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, TextIO

from . import proto
from .catalog import Family, FamilyInstance, build_family
from .classifier import classify
from .combinators import construct_at_q, direct_sum, fuse, product_rank_one, q_threshold
from .config import LOG_PREFIX, MAX_DIM, MIN_CAP, SEED
from .dense import Tolerance
from .errors import ParameterError, TLForgeError, VerificationError
from .jones_wenzl import (
    jw_ladder,
    ladder_summary,
    verify_cube_relation,
    verify_ladder_identities,
)
from .stream import read_json_lines, send_json_line
from .subspace import quartic_identity_check, unitarity_criterion
from .verifier import (
    CheckReport,
    TLSolution,
    site_count,
    verify_all,
    verify_braid,
    verify_t1,
    verify_t2,
    yang_baxter_grid,
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2

_FAMILY_ALIASES = {"sqrt2": "q_sqrt2", "sqrt3": "q_sqrt3"}
# --z fills these parameters in order
_Z_ORDER = {
    Family.RANK_ONE: ("z",),
    Family.Q2_TENSOR: ("z",),
    Family.N_R_PLUS_1: ("z1", "z2"),
    Family.N4R4: ("z1", "z2", "z3", "z4"),
}


@dataclass(frozen=True)
class CliConfig:
    tol: Tolerance
    cap: int = MAX_DIM
    seed: int = SEED
    fmt: str = "json"
    out: Optional[str] = None
    quiet: bool = False

    def __post_init__(self):
        if self.cap < MIN_CAP:
            raise ParameterError(f"--cap must be at least {MIN_CAP}, got {self.cap}")
        if self.fmt not in ("json", "pretty"):
            raise ParameterError(f"unknown format {self.fmt!r}")


class Console:
    """JSON to stdout (or --out), prefixed progress lines to stderr."""

    def __init__(self, cfg: CliConfig, command: str, fp: TextIO):
        self.cfg = cfg
        self.command = command
        self.fp = fp

    def log(self, msg: str) -> None:
        if self.cfg.quiet:
            return
        print(f"{LOG_PREFIX} [{self.command}] {msg}", file=sys.stderr, flush=True)

    @property
    def on_log(self) -> Optional[Callable[[str], None]]:
        return None if self.cfg.quiet else self.log

    def emit(self, msg: Dict[str, Any]) -> None:
        msg = proto.jsonable(msg)
        if self.cfg.fmt == "pretty":
            self.fp.write(json.dumps(msg, indent=2, ensure_ascii=False) + "\n")
            self.fp.flush()
        else:
            send_json_line(self.fp, msg)


# ---------------- literals ----------------


def parse_complex(text: str) -> complex:
    """'a+bi', '-2i', '0.5', 'i' ... ; 'j' is accepted as well."""
    s = text.strip().replace(" ", "").replace("I", "i").replace("i", "j")
    s = re.sub(r"(^|[+-])j", r"\g<1>1j", s)
    try:
        return complex(s)
    except ValueError:
        raise ParameterError(f"not a complex number: {text!r}") from None


def parse_complex_list(text: str) -> List[complex]:
    return [parse_complex(part) for part in text.split(",") if part.strip()]


def parse_params(items: Sequence[str]) -> Dict[str, complex]:
    params: Dict[str, complex] = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ParameterError(f"parameters are key=value, got {item!r}")
        params[key.strip()] = parse_complex(value)
    return params


def family_name(text: str) -> str:
    name = text.strip().lower().replace("-", "_")
    return _FAMILY_ALIASES.get(name, name)


# ---------------- inputs ----------------


def _load_message(path: str, kind: Optional[str] = None) -> Dict[str, Any]:
    """The first message in a JSON or JSON-lines file, optionally of a given type."""
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    try:
        found = [json.loads(text)]
    except json.JSONDecodeError:
        found = []
        read_json_lines(io.StringIO(text), found.append)
    for msg in found:
        if isinstance(msg, dict) and (kind is None or msg.get("type") == kind):
            return msg
    raise ParameterError(f"{path}: no {kind or 'JSON'} message found")


def _family_from_args(args, cfg: CliConfig, console: Console) -> FamilyInstance:
    name = family_name(args.family)
    params = parse_params(args.params or [])
    if args.z:
        try:
            order = _Z_ORDER[Family(name)]
        except (ValueError, KeyError):
            raise ParameterError(f"family {name} takes no z parameters") from None
        values = parse_complex_list(args.z)
        if len(values) > len(order):
            raise ParameterError(f"family {name} takes at most {len(order)} z values, got {len(values)}")
        params.update(zip(order, values))
    return build_family(name, args.n, params, cfg.tol, console.on_log, cfg.seed)


def load_operand(text: str, cfg: CliConfig, console: Console) -> FamilyInstance:
    """
    A FAMILY_INSTANCE file written by ``build``/``sum``/..., or an inline
    operand ``family[:key=value...]`` such as ``rank_one:n=2:z=1+0i``.
    """
    if os.path.isfile(text):
        return FamilyInstance.from_msg(_load_message(text, "FAMILY_INSTANCE"), cfg.tol)
    name, *rest = text.split(":")
    n = None
    params: Dict[str, complex] = {}
    for item in parse_params(rest).items():
        key, value = item
        if key == "n":
            if value.imag != 0 or value.real != int(value.real):
                raise ParameterError(f"n must be an integer, got {value}")
            n = int(value.real)
        else:
            params[key] = value
    return build_family(family_name(name), n, params, cfg.tol, console.on_log, cfg.seed)


def _solution_from_msg(msg: Dict[str, Any], n: Optional[int], Q: Optional[float]) -> Dict[str, Any]:
    """Pull (T, n, Q, label) out of a TL_SOLUTION, FAMILY_INSTANCE or bare matrix message."""
    if "T" in msg:
        t = proto.matrix_from_msg(msg["T"])
    elif "data" in msg:
        t = proto.matrix_from_msg(msg)
    else:
        raise ParameterError("message carries no matrix T")
    if t.shape[0] != t.shape[1]:
        raise ParameterError(f"T must be square, got {t.shape}")
    n = n if n is not None else msg.get("n")
    n = site_count(t.shape[0]) if n is None else int(n)
    Q = Q if Q is not None else msg.get("Q")
    if Q is None:
        raise ParameterError("Q is neither given nor stored with the matrix")
    return {"T": t, "n": n, "Q": float(Q), "label": str(msg.get("label") or msg.get("family") or "")}


# ---------------- reporting ----------------


def _verification(console: Console, subject: str, reports: Sequence[CheckReport], extra=None) -> bool:
    passed = all(r.passed for r in reports)
    msg = {
        "type": "VERIFICATION",
        "subject": subject,
        "pass": passed,
        "reports": [{"name": r.name, "checks": r.to_msgs(), "notes": list(r.notes)} for r in reports],
    }
    if extra:
        msg.update(extra)
    console.emit(msg)
    if not passed:
        worst = max((r.worst for r in reports if not r.passed), key=lambda c: c.residual)
        console.log(f"{subject}: {worst.relation} failed with residual {worst.residual:.3e}")
    return passed


def _instance_reports(inst: FamilyInstance, sol: TLSolution, cfg: CliConfig) -> List[CheckReport]:
    return [
        verify_t1(sol.T, sol.Q, cfg.tol),
        verify_t2(sol.T, sol.n, cfg.tol, cfg.cap),
        unitarity_criterion(inst.vs, inst.Q, cfg.tol),
        quartic_identity_check(inst.vs, inst.Q, cfg.tol),
    ]


def _emit_instance(console: Console, cfg: CliConfig, inst: FamilyInstance) -> int:
    sol = inst.solution(cfg.tol, cfg.cap)
    console.emit(inst.to_msg(with_t=True, tol=cfg.tol))
    ok = _verification(console, inst.family.value, _instance_reports(inst, sol, cfg), {"rank": sol.r})
    return EXIT_OK if ok else EXIT_FAILED


# ---------------- commands ----------------


def cmd_build(args, cfg: CliConfig, console: Console) -> int:
    inst = _family_from_args(args, cfg, console)
    console.log(f"built {inst.family.value} n={inst.n} r={inst.r} Q={inst.Q:.12g}")
    return _emit_instance(console, cfg, inst)


def _verify_one(msg: Dict[str, Any], args, cfg: CliConfig, console: Console) -> bool:
    given = _solution_from_msg(msg, args.n, args.q)
    t, n, Q = given["T"], given["n"], given["Q"]
    if Q <= 0:
        raise ParameterError(f"Q must be positive, got {Q}")
    reports = [verify_t1(t, Q, cfg.tol), verify_t2(t, n, cfg.tol, cfg.cap)]
    if all(r.passed for r in reports) and args.yang_baxter:
        sol = verify_all(t, n, Q, cfg.tol, label=given["label"], cap=cfg.cap)
        reports += yang_baxter_grid(sol, tol=cfg.tol, cap=cfg.cap, on_log=console.on_log)
        reports.append(verify_braid(sol, cfg.tol, cfg.cap))
    return _verification(console, given["label"] or "T", reports, {"n": n, "Q": Q})


def cmd_verify(args, cfg: CliConfig, console: Console) -> int:
    if not args.batch:
        ok = _verify_one(_load_message(args.file), args, cfg, console)
        return EXIT_OK if ok else EXIT_FAILED
    results: List[bool] = []
    with open(args.file, "r", encoding="utf-8") as f:
        count = read_json_lines(f, lambda msg: results.append(_verify_one(msg, args, cfg, console)))
    console.log(f"verified {count} matrices, {results.count(False)} failed")
    return EXIT_OK if all(results) else EXIT_FAILED


def cmd_classify(args, cfg: CliConfig, console: Console) -> int:
    console.emit(classify(args.n, args.r, args.q, cfg.tol.abs_eps).to_msg())
    return EXIT_OK


def cmd_jw(args, cfg: CliConfig, console: Console) -> int:
    inst = _family_from_args(args, cfg, console)
    sol = inst.solution(cfg.tol, cfg.cap)
    ladder = jw_ladder(sol, args.depth, cfg.cap, cfg.tol, console.on_log)
    ok = True
    for row in ladder_summary(ladder, cfg.tol):
        console.emit(row)
        ok = ok and all(c["pass"] for c in row["checks"])
    reports: List[CheckReport] = []
    for N in range(2, ladder.depth + 1):
        if sol.n ** (N + 1) > cfg.cap:
            console.log(f"cube relation for N={N} skipped: n^{N + 1} exceeds the cap")
            break
        reports.append(verify_cube_relation(ladder, N, cfg.tol))
        if ladder.rho.finite_below(N + 1) and sol.n ** (N + 2) <= cfg.cap:
            reports.append(verify_ladder_identities(ladder, N, cfg.tol))
    if reports:
        ok = _verification(console, f"{inst.family.value} ladder", reports) and ok
    return EXIT_OK if ok else EXIT_FAILED


def cmd_construct(args, cfg: CliConfig, console: Console) -> int:
    Q = q_threshold(args.r, args.n) if args.q is None else args.q
    inst = construct_at_q(args.r, args.n, Q, cfg.tol, console.on_log, cfg.seed)
    return _emit_instance(console, cfg, inst)


def cmd_sum(args, cfg: CliConfig, console: Console) -> int:
    a, b = load_operand(args.a, cfg, console), load_operand(args.b, cfg, console)
    return _emit_instance(console, cfg, direct_sum(a, b, cfg.tol))


def cmd_product(args, cfg: CliConfig, console: Console) -> int:
    a, b = load_operand(args.a, cfg, console), load_operand(args.b, cfg, console)
    return _emit_instance(console, cfg, product_rank_one(a, b, cfg.tol))


def cmd_fuse(args, cfg: CliConfig, console: Console) -> int:
    sol = load_operand(args.a, cfg, console).solution(cfg.tol, cfg.cap)
    fused = fuse(sol, cfg.tol, cfg.cap)
    console.log(f"{fused.label}: Q={fused.Q:.12g} r={fused.r}")
    console.emit(proto.solution(fused.label, fused.n, fused.r, fused.Q, fused.T))
    return EXIT_OK


def cmd_export(args, cfg: CliConfig, console: Console) -> int:
    sol = load_operand(args.a, cfg, console).solution(cfg.tol, cfg.cap)
    console.emit(proto.solution(sol.label, sol.n, sol.r, sol.Q, sol.T))
    return EXIT_OK


# ---------------- parser ----------------


def _add_family_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--z", help="comma-separated complex values, e.g. 1+0i,0.5-2i")
    p.add_argument("--params", nargs="*", metavar="KEY=VALUE")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tlforge")
    ap.add_argument("--tol", type=float, help="absolute tolerance (scaled by dimension)")
    ap.add_argument("--cap", type=int, default=MAX_DIM, help="largest n^N to materialize")
    ap.add_argument("--seed", type=int, default=SEED)
    ap.add_argument("--format", choices=["json", "pretty"], default="json")
    ap.add_argument("--out")
    ap.add_argument("--quiet", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build")
    _add_family_args(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("verify")
    p.add_argument("--file", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--q", type=float)
    p.add_argument("--batch", action="store_true", help="FILE holds one JSON message per line")
    p.add_argument("--yang-baxter", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("classify")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--q", type=float, required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("jw")
    _add_family_args(p)
    p.add_argument("--depth", type=int, default=4)
    p.set_defaults(func=cmd_jw)

    p = sub.add_parser("construct")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=float, help="defaults to the threshold")
    p.set_defaults(func=cmd_construct)

    for name, func in (("sum", cmd_sum), ("product", cmd_product)):
        p = sub.add_parser(name)
        p.add_argument("--a", required=True)
        p.add_argument("--b", required=True)
        p.set_defaults(func=func)

    for name, func in (("fuse", cmd_fuse), ("export", cmd_export)):
        p = sub.add_parser(name)
        p.add_argument("--a", required=True, help="instance file or family[:key=value...]")
        p.set_defaults(func=func)
    return ap


@contextmanager
def _output(path: Optional[str]) -> Iterator[TextIO]:
    if path is None:
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8") as f:
        yield f


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        tol = Tolerance() if args.tol is None else Tolerance(abs_eps=args.tol)
        cfg = CliConfig(
            tol=tol, cap=args.cap, seed=args.seed, fmt=args.format, out=args.out, quiet=args.quiet
        )
    except (TLForgeError, ValueError) as e:
        print(f"{LOG_PREFIX} [{args.command}] invalid input: {e}", file=sys.stderr, flush=True)
        return EXIT_INVALID

    with _output(cfg.out) as fp:
        console = Console(cfg, args.command, fp)
        try:
            return args.func(args, cfg, console)
        except VerificationError as e:
            console.log(str(e))
            return EXIT_FAILED
        except (TLForgeError, ValueError, OSError) as e:
            # json.JSONDecodeError is a ValueError
            console.log(f"invalid input: {e}")
            return EXIT_INVALID
