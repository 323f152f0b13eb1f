"""Experiment files: parsing, validation and canonical re-emission.

An experiment file is TOML.  Top-level keys are ``command`` and the
numeric parameters; the subject lives in tables::

    command = "fredholm"
    tol = 1e-8

    [operator]
    form = "diagonal"
    lambda = "2^-j"

A file with a single operator may also put the operator keys at the top
level (``form = "diagonal"`` next to ``command``).
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import tomli

from ..errors import SpecError
from ..opcalc.filtrations import STRATEGIES
from ..sequences import parse_sequence
from .expr import compile_expr

__all__ = [
    "COMMANDS",
    "ExperimentSpec",
    "parse_spec",
    "parse_spec_text",
    "emit_spec",
    "with_overrides",
]

# command -> (what it computes, the result it exercises)
COMMANDS = {
    "trace-minors": ("net of principal trace minors along filtrations",
                     "for trace-class T the minors converge to tr(T); otherwise some filtration diverges"),
    "det-minors": ("net of principal determinant minors along filtrations",
                   "definition of determinant class: the minors converge to a nonzero limit"),
    "fredholm": ("Fredholm determinant det(1-T) by the exterior-power series and the eigenvalue product",
                 "det(1-T) = sum_k (-1)^k tr(wedge^k T), equal to prod(1-lambda_j) for normal T"),
    "trace-class": ("trace-class probe: trace minors plus a trace-norm estimate",
                    "trace class holds exactly when the trace-minor net converges"),
    "det-class": ("determinant-class probe on A next to the trace-class probe on 1-A",
                  "for normal A: A is of determinant class iff 1-A is trace class, with equal determinants"),
    "block-check": ("det(A) against det(A_U) det(A_U-perp) for a coordinate split",
                    "determinants factor over an orthogonal decomposition respected by A"),
    "product-check": ("det(AB) against det(A) det(B)",
                      "products of determinant-class operators are determinant class, det multiplicative"),
    "bochner": ("Bochner integral as a limit of simple-function integrals",
                "integrally bounded approximable functions are integrable; the simple integrals form a Cauchy net"),
    "dominated-sum": ("limit of sum_k a[alpha, k] for a dominated net of sequences",
                      "dominated convergence for nets: the limit passes through the sum"),
    "probe-open-question": ("determinant and trace minors of a small non-normal block plus identity",
                            "exploratory trajectories; no claim about the non-normal case in general"),
}

OPERATOR_COMMANDS = ("trace-minors", "det-minors", "fredholm", "trace-class", "det-class",
                     "block-check", "product-check", "probe-open-question")

DEFAULT_STRATEGIES = ("coordinate", "eigen-sorted", "adversarial+", "adversarial-")

_PROBE = {"tol": 1e-8, "n_max": 4096, "seed": None, "strategies": DEFAULT_STRATEGIES}
PARAMS = {
    "trace-minors": dict(_PROBE, div_threshold=1.0),
    "det-minors": dict(_PROBE, div_threshold=1.0),
    "fredholm": {"tol": 1e-8, "trunc_dim": None, "k_max": None, "method": "both"},
    "trace-class": dict(_PROBE),
    "det-class": dict(_PROBE),
    "block-check": dict(_PROBE, split=None),
    "product-check": dict(_PROBE),
    "probe-open-question": dict(_PROBE, n_max=256, strategies=("coordinate", "adversarial+", "adversarial-")),
    "bochner": {"tol": 1e-6, "atom_budget": 10**4, "depth": 8},
    "dominated-sum": {"tol": 1e-8},
}

POSITIVE_INT = ("n_max", "trunc_dim", "k_max", "atom_budget", "depth", "split")
POSITIVE_FLOAT = ("tol", "div_threshold")

OPERATOR_KEYS = {
    "diagonal": {"lambda": True, "lambda_tail": False, "size": False},
    "identity": {"size": False},
    "zero": {"size": False},
    "rank-one": {"s": True, "u": True, "v": False},
    "finite-rank": {"lambda": False, "lambda_tail": False, "u": True, "v": True, "size": False},
    "matrix": {"rows": True, "rows_im": False},
    "block-diag": {"blocks": True, "tail": False},
    "identity-minus": {"inner": True},
}
SPACE_KEYS = {"discrete": {"weights": True}, "interval01": {}}
FUNCTION_KEYS = {
    "table": {"rows": True},
    "polynomial": {"coeffs": True, "breaks": False},
    "unit-vectors": {"length": True},
    "sequence": {"values": True},
}
SEMINORM_KEYS = {
    "euclidean": {"dim": True},
    "weighted-l1": {"weights": True},
    "frechet-sequences": {},
    "continuous01": {"nodes": False},
}


@dataclass(frozen=True)
class ExperimentSpec:
    """A validated experiment: command, subject descriptor and parameters
    (defaults filled in, so equal experiments compare equal)."""

    command: str
    subject: dict
    params: dict = field(default_factory=dict)

    def __hash__(self):
        return hash(emit_spec(self))


# ------------------------------------------------------------ validation


def _fail(msg: str, fld: str):
    raise SpecError(msg, field=fld)


def _check_table(d, allowed: dict, where: str, kind_key: str) -> dict:
    if not isinstance(d, dict):
        _fail(f"{where} must be a table", where)
    kind = d.get(kind_key)
    if kind not in allowed:
        _fail(f"{where}.{kind_key} must be one of {sorted(allowed)}, got {kind!r}", f"{where}.{kind_key}")
    keys = allowed[kind]
    for k in d:
        if k != kind_key and k not in keys:
            _fail(f"unknown key {k!r} in {where} ({kind_key} = {kind!r})", f"{where}.{k}")
    for k, req in keys.items():
        if req and k not in d:
            _fail(f"{where} ({kind_key} = {kind!r}) needs {k!r}", f"{where}.{k}")
    return kind


def _is_num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _num_list(x, where: str, depth: int = 1):
    ok = isinstance(x, list) and all(
        (_is_num(v) if depth == 1 else _num_list(v, where, depth - 1) is None) for v in x
    )
    if not ok:
        _fail(f"{where} must be a {'nested ' * (depth - 1)}list of numbers", where)


def _seq_value(x, where: str):
    if isinstance(x, str) or _is_num(x):
        return
    if isinstance(x, list) and all(_is_num(v) or (isinstance(v, list) and len(v) == 2 and all(map(_is_num, v)))
                                   for v in x):
        return
    _fail(f"{where} must be an expression, a number or a list of numbers", where)


def _expr(text: str, var: str, where: str):
    try:
        parse_sequence(text, var)
    except SpecError as exc:
        raise SpecError(f"{where}: {exc}", field=where) from None


def _validate_operator(d, where: str = "operator", depth: int = 0):
    form = _check_table(d, OPERATOR_KEYS, where, "form")
    for key in ("lambda", "lambda_tail"):
        if isinstance(d.get(key), str):
            _expr(d[key], "j", f"{where}.{key}")
    if "size" in d and (not isinstance(d["size"], int) or d["size"] < 0):
        _fail(f"{where}.size must be a nonnegative integer", f"{where}.size")
    if "lambda" in d:
        _seq_value(d["lambda"], f"{where}.lambda")
    if "lambda_tail" in d and not isinstance(d["lambda_tail"], str):
        _fail(f"{where}.lambda_tail must be an expression string", f"{where}.lambda_tail")
    if form == "rank-one":
        if not _is_num(d["s"]):
            _fail(f"{where}.s must be a number", f"{where}.s")
        _num_list(d["u"], f"{where}.u")
        if "v" in d:
            _num_list(d["v"], f"{where}.v")
    if form == "finite-rank":
        _num_list(d["u"], f"{where}.u", 2)
        _num_list(d["v"], f"{where}.v", 2)
    if form == "matrix":
        _num_list(d["rows"], f"{where}.rows", 2)
        if "rows_im" in d:
            _num_list(d["rows_im"], f"{where}.rows_im", 2)
    if form == "block-diag":
        if not isinstance(d["blocks"], list) or not d["blocks"]:
            _fail(f"{where}.blocks must be a nonempty array of operator tables", f"{where}.blocks")
        for i, b in enumerate(d["blocks"]):
            _validate_operator(b, f"{where}.blocks[{i}]", depth + 1)
        if "tail" in d:
            _validate_operator(d["tail"], f"{where}.tail", depth + 1)
    if form == "identity-minus":
        _validate_operator(d["inner"], f"{where}.inner", depth + 1)


def _validate_bochner(subject):
    for part in ("space", "function", "seminorms"):
        if part not in subject:
            _fail(f"bochner needs a [{part}] table", part)
    space = _check_table(subject["space"], SPACE_KEYS, "space", "kind")
    if space == "discrete":
        w = subject["space"]["weights"]
        if isinstance(w, str):
            _expr(w, "j", "space.weights")
        else:
            _num_list(w, "space.weights")
            if any(v < 0 for v in w):
                _fail("space.weights must be nonnegative", "space.weights")
    fn = _check_table(subject["function"], FUNCTION_KEYS, "function", "kind")
    f = subject["function"]
    if fn == "table":
        rows = f["rows"]
        if rows and isinstance(rows[0], list):
            _num_list(rows, "function.rows", 2)
        else:
            _num_list(rows, "function.rows")
    elif fn == "polynomial":
        c = f["coeffs"]
        _num_list(c, "function.coeffs", 3 if "breaks" in f else 2)
        if "breaks" in f:
            _num_list(f["breaks"], "function.breaks")
    elif fn == "unit-vectors":
        if not isinstance(f["length"], int) or f["length"] < 1:
            _fail("function.length must be a positive integer", "function.length")
    elif fn == "sequence":
        _seq_value(f["values"], "function.values")
        if isinstance(f["values"], str):
            _expr(f["values"], "j", "function.values")
    if fn == "polynomial" and space != "interval01":
        _fail("polynomial functions live on interval01", "function.kind")
    if fn != "polynomial" and space != "discrete":
        _fail(f"{fn} functions need a discrete space", "function.kind")
    sem = _check_table(subject["seminorms"], SEMINORM_KEYS, "seminorms", "kind")
    s = subject["seminorms"]
    if sem == "euclidean" and (not isinstance(s["dim"], int) or s["dim"] < 1):
        _fail("seminorms.dim must be a positive integer", "seminorms.dim")
    if sem == "weighted-l1":
        _num_list(s["weights"], "seminorms.weights")


def _validate_params(command: str, params: dict):
    allowed = PARAMS[command]
    out = {}
    for k, v in params.items():
        if k not in allowed:
            _fail(f"parameter {k!r} does not apply to {command}", k)
    for k, default in allowed.items():
        v = params.get(k, default)
        if v is not None:
            if k in POSITIVE_INT:
                if not isinstance(v, int) or isinstance(v, bool) or v <= 0:
                    _fail(f"{k} must be a positive integer, got {v!r}", k)
            elif k in POSITIVE_FLOAT:
                if not _is_num(v) or not (v > 0) or not math.isfinite(v):
                    _fail(f"{k} must be a positive number, got {v!r}", k)
                v = float(v)
            elif k == "seed":
                if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                    _fail(f"seed must be a nonnegative integer, got {v!r}", k)
            elif k == "strategies":
                names = v.split(",") if isinstance(v, str) else v
                if not isinstance(names, (list, tuple)) or not all(isinstance(s, str) for s in names):
                    _fail("strategies must be a list or comma-separated string", k)
                names = tuple(s.strip() for s in names if s.strip())
                if not names:
                    _fail("at least one strategy is required", k)
                for s in names:
                    if s not in STRATEGIES:
                        _fail(f"unknown strategy {s!r}; choose from {', '.join(STRATEGIES)}", k)
                v = names
            elif k == "method":
                if v not in ("series", "eigen", "both"):
                    _fail(f"method must be series, eigen or both, got {v!r}", k)
        out[k] = v
    if "strategies" in out and "random" in out["strategies"] and out.get("seed") is None:
        _fail("the random strategy needs a seed", "seed")
    if command == "block-check" and out.get("split") is None:
        _fail("block-check needs split", "split")
    return out


def _validate(doc: dict) -> ExperimentSpec:
    doc = dict(doc)
    command = doc.pop("command", None)
    if command is None:
        _fail("missing command", "command")
    if command not in COMMANDS:
        _fail(f"unknown command {command!r}; choose from {', '.join(COMMANDS)}", "command")
    subject = {}
    if command in OPERATOR_COMMANDS:
        flat = {k: doc.pop(k) for k in list(doc) if k in {"form"} | set().union(*OPERATOR_KEYS.values())
                and k not in PARAMS[command]}
        if flat:
            if "operator" in doc:
                _fail("operator keys given both at top level and in [operator]", "operator")
            doc["operator"] = flat
        if "operator" not in doc:
            _fail(f"{command} needs an operator", "operator")
        subject["operator"] = doc.pop("operator")
        _validate_operator(subject["operator"])
        if command == "product-check":
            if "operator_b" not in doc:
                _fail("product-check needs [operator_b]", "operator_b")
            subject["operator_b"] = doc.pop("operator_b")
            _validate_operator(subject["operator_b"], "operator_b")
        if command == "probe-open-question" and subject["operator"]["form"] != "matrix":
            _fail("probe-open-question takes a small matrix block (form = \"matrix\")", "operator.form")
    elif command == "bochner":
        for part in ("space", "function", "seminorms"):
            if part in doc:
                subject[part] = doc.pop(part)
        _validate_bochner(subject)
    else:
        for part in ("terms", "dominator"):
            if part not in doc:
                _fail(f"dominated-sum needs {part!r}", part)
            if not isinstance(doc[part], str):
                _fail(f"{part} must be an expression string", part)
            subject[part] = doc.pop(part)
        compile_expr(subject["terms"], ("alpha", "k"), "terms")
        _expr(subject["dominator"], "k", "dominator")
    for k, v in doc.items():
        if isinstance(v, dict) or k not in PARAMS[command]:
            _fail(f"unknown key {k!r} for {command}", k)
    params = _validate_params(command, doc)
    return ExperimentSpec(command, subject, params)


# ------------------------------------------------------------------ parse

_POS = re.compile(r"line (\d+), column (\d+)")


def parse_spec_text(text: str) -> ExperimentSpec:
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        line, col = getattr(exc, "lineno", None), getattr(exc, "colno", None)
        if line is None:
            m = _POS.search(str(exc))
            line, col = (int(m.group(1)), int(m.group(2))) if m else (None, None)
        raise SpecError(f"parse error: {getattr(exc, 'msg', exc)}", line=line, column=col) from None
    return _validate(doc)


def parse_spec(path) -> ExperimentSpec:
    """Read and validate an experiment file."""
    return parse_spec_text(Path(path).read_text(encoding="utf-8"))


def with_overrides(spec: ExperimentSpec, **overrides) -> ExperimentSpec:
    """Replace parameters (``None`` values are ignored) and re-validate."""
    params = {k: v for k, v in spec.params.items() if v is not None}
    for k, v in overrides.items():
        if v is not None:
            params[k] = v
    return replace(spec, params=_validate_params(spec.command, params))


# ------------------------------------------------------------------- emit

_BARE = re.compile(r"^[A-Za-z0-9_-]+$")


def _key(k: str) -> str:
    return k if _BARE.match(k) else json.dumps(k)


def _value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_value(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{_key(k)} = {_value(x)}" for k, x in v.items()) + "}"
    raise TypeError(f"cannot emit {type(v).__name__}")


def emit_spec(spec: ExperimentSpec) -> str:
    """Canonical TOML text; ``parse_spec_text(emit_spec(s)) == s``."""
    lines = [f"command = {_value(spec.command)}"]
    for k in sorted(spec.params):
        v = spec.params[k]
        if v is not None:
            lines.append(f"{_key(k)} = {_value(list(v) if isinstance(v, tuple) else v)}")
    for part in sorted(spec.subject):
        v = spec.subject[part]
        if isinstance(v, dict):
            lines += ["", f"[{_key(part)}]"]
            lines += [f"{_key(k)} = {_value(x)}" for k, x in v.items()]
        else:
            lines.insert(1, f"{_key(part)} = {_value(v)}")
    return "\n".join(lines) + "\n"
