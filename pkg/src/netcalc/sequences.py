"""Closed-form scalar sequences with computable tails.

An :class:`EigenSequence` is ``lambda_j`` for ``j = 1, 2, ...``: a finite
explicit head followed by ``const + sum(terms)``, where every term has the
shape ``coef * ratio**j * prod((j + s)**(-p))``.  The restricted shape is
what makes tail sums, tail bounds and log-tail sums computable, which every
probe in :mod:`netcalc.opcalc` relies on.

The textual grammar accepted by :func:`parse_sequence` is ordinary
arithmetic in the index variable with ``^`` for powers, e.g. ``2^-j``,
``1/j^2``, ``1 - 1/(j+1)^2``, ``(-1)^(j+1)/j``, ``0.5*(-0.9)^j``.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np
from scipy.special import zeta

from .errors import SpecError

__all__ = ["Term", "EigenSequence", "parse_sequence", "sequence_from_config"]

# explicit summation window for cached tails; closed forms take over beyond
GRID = 2**19


def _num(x):
    if isinstance(x, complex) and x.imag == 0:
        return float(x.real)
    return x


@dataclass(frozen=True)
class Term:
    """``coef * ratio**j * prod((j + shift)**(-power))``."""

    coef: complex = 1.0
    ratio: float = 1.0
    factors: tuple = ()  # ((shift, power), ...)

    def __post_init__(self):
        merged: dict[float, float] = {}
        for s, p in self.factors:
            merged[float(s)] = merged.get(float(s), 0.0) + float(p)
        facs = tuple(sorted((s, p) for s, p in merged.items() if p != 0))
        object.__setattr__(self, "factors", facs)
        object.__setattr__(self, "coef", _num(self.coef))
        object.__setattr__(self, "ratio", float(self.ratio))
        if self.ratio == 0:
            raise ValueError("term ratio must be nonzero")

    def __call__(self, j) -> np.ndarray:
        j = np.asarray(j, dtype=float)
        out = np.full(j.shape, 1.0)
        if self.ratio != 1.0:
            with np.errstate(under="ignore", over="ignore"):
                out = out * np.power(self.ratio, j)
        for s, p in self.factors:
            out = out * np.power(j + s, -p)
        return self.coef * out

    def __mul__(self, other: "Term") -> "Term":
        return Term(self.coef * other.coef, self.ratio * other.ratio, self.factors + other.factors)

    def scaled(self, c) -> "Term":
        return Term(self.coef * c, self.ratio, self.factors)

    def shifted(self, h: int) -> "Term":
        """The term as a function of ``j`` evaluated at ``j + h``."""
        return Term(
            self.coef * self.ratio**h, self.ratio, tuple((s + h, p) for s, p in self.factors)
        )

    def power(self, e: float) -> "Term":
        return Term(self.coef**e, self.ratio**e, tuple((s, p * e) for s, p in self.factors))

    @property
    def total_power(self) -> float:
        return sum(p for _, p in self.factors)

    @property
    def abs_summable(self) -> bool:
        if self.coef == 0:
            return True
        r = abs(self.ratio)
        if r < 1:
            return all(p >= 0 for _, p in self.factors)
        return r == 1 and self.total_power > 1 and all(p >= 0 for _, p in self.factors)

    @property
    def key(self):
        return (self.ratio, self.factors)

    def abs_tail(self, m: int) -> float:
        """Upper bound for ``sum_{j>m} |term(j)|``."""
        if self.coef == 0:
            return 0.0
        if not self.abs_summable:
            return math.inf
        smin = min((s for s, _ in self.factors), default=0.0)
        r = abs(self.ratio)
        c = abs(self.coef)
        if r < 1:
            f = 1.0
            for s, p in self.factors:
                f *= (m + 1 + s) ** (-p)
            return c * r ** (m + 1) / (1 - r) * f
        return c * float(zeta(self.total_power, m + 1 + smin))

    def tail(self, m: int) -> complex:
        """Estimate of ``sum_{j>m} term(j)``; exact for pure geometric and
        single-shift power terms, otherwise accurate to O(m**-(P+1))."""
        if self.coef == 0:
            return 0.0
        if not self.abs_summable:
            raise ArithmeticError("tail of a non-summable term")
        r = self.ratio
        if abs(r) < 1:
            if not self.factors:
                return self.coef * r ** (m + 1) / (1 - r)
            # geometric dominates: sum a short explicit window
            j = np.arange(m + 1, m + 1 + 4096, dtype=float)
            return complex(np.sum(self(j))) if np.iscomplexobj(self.coef) else float(np.sum(self(j)))
        P = self.total_power
        sbar = sum(s * p for s, p in self.factors) / P
        q = m + 1 + sbar
        if r == 1:
            return self.coef * float(zeta(P, q))
        # alternating: sum_{j>m} (-1)^j (j + sbar)^-P
        sign = -1.0 if (m + 1) % 2 else 1.0
        alt = 2.0**-P * (float(zeta(P, q / 2)) - float(zeta(P, (q + 1) / 2)))
        return self.coef * sign * alt


def _merge_terms(terms: Iterable[Term]) -> tuple:
    acc: dict = {}
    for t in terms:
        acc[t.key] = acc.get(t.key, 0.0) + t.coef
    return tuple(Term(c, k[0], k[1]) for k, c in acc.items() if c != 0)


@dataclass(frozen=True)
class EigenSequence:
    """``lambda_j`` (1-based): ``head[j-1]`` for ``j <= len(head)``, else
    ``const + sum(term(j))``."""

    head: tuple = ()
    const: complex = 0.0
    terms: tuple = ()
    label: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "head", tuple(_num(complex(v)) for v in self.head))
        object.__setattr__(self, "const", _num(complex(self.const)))
        object.__setattr__(self, "terms", _merge_terms(self.terms))

    # construction helpers
    @classmethod
    def constant(cls, c) -> "EigenSequence":
        return cls(const=c, label=str(c))

    @classmethod
    def geometric(cls, ratio, scale=1.0) -> "EigenSequence":
        return cls(terms=(Term(scale, ratio),), label=f"{scale}*{ratio}^j")

    @classmethod
    def power(cls, p, scale=1.0, shift=0.0) -> "EigenSequence":
        return cls(terms=(Term(scale, 1.0, ((shift, p),)),), label=f"{scale}/(j+{shift})^{p}")

    @classmethod
    def explicit(cls, values, tail: "EigenSequence | None" = None) -> "EigenSequence":
        tail = tail or cls()
        return cls(tuple(values), tail.const, tail.terms, label=f"{list(values)}")

    @property
    def is_complex(self) -> bool:
        vals = list(self.head) + [self.const] + [t.coef for t in self.terms]
        return any(isinstance(v, complex) for v in vals) or any(
            t.ratio < 0 and False for t in self.terms
        )

    @property
    def is_real(self) -> bool:
        return not self.is_complex

    def _formula(self, j: np.ndarray) -> np.ndarray:
        dtype = complex if self.is_complex else float
        out = np.full(j.shape, self.const, dtype=dtype)
        for t in self.terms:
            out = out + t(j)
        return out

    def values(self, j) -> np.ndarray:
        """Vectorized ``lambda_j`` at 1-based indices ``j``."""
        j = np.asarray(j, dtype=np.int64)
        dtype = complex if self.is_complex else float
        out = np.empty(j.shape, dtype=dtype)
        h = len(self.head)
        in_head = j <= h
        if np.any(in_head):
            out[in_head] = np.asarray(self.head, dtype=dtype)[j[in_head] - 1]
        rest = ~in_head
        if np.any(rest):
            out[rest] = self._formula(j[rest].astype(float))
        return out

    def at(self, idx) -> np.ndarray:
        """Vectorized value at 0-based positions."""
        return self.values(np.asarray(idx, dtype=np.int64) + 1)

    def dev(self, j) -> np.ndarray:
        return self.values(j) - self.const

    # algebra
    def drop(self, h: int) -> "EigenSequence":
        """``j -> lambda_{j+h}``."""
        return EigenSequence(self.head[h:], self.const, tuple(t.shifted(h) for t in self.terms),
                             f"{self.label}[+{h}]")

    def prepend(self, values) -> "EigenSequence":
        values = tuple(values)
        k = len(values)
        return EigenSequence(
            values + self.head, self.const, tuple(t.shifted(-k) for t in self.terms),
            f"{list(values)}++{self.label}",
        )

    def one_minus(self) -> "EigenSequence":
        return EigenSequence(
            tuple(1 - v for v in self.head), 1 - self.const, tuple(t.scaled(-1) for t in self.terms),
            f"1-({self.label})",
        )

    def __mul__(self, other: "EigenSequence") -> "EigenSequence":
        h = max(len(self.head), len(other.head))
        head = ()
        if h:
            js = np.arange(1, h + 1)
            head = tuple(self.values(js) * other.values(js))
        terms = [t.scaled(other.const) for t in self.terms]
        terms += [t.scaled(self.const) for t in other.terms]
        terms += [a * b for a in self.terms for b in other.terms]
        return EigenSequence(head, self.const * other.const, tuple(terms), f"({self.label})*({other.label})")

    # tails
    @property
    def dev_summable(self) -> bool:
        return all(t.abs_summable for t in self.terms)

    @cached_property
    def _grid(self):
        j = np.arange(1, GRID + 1)
        d = self.dev(j)
        rev = lambda a: np.concatenate([np.cumsum(a[::-1])[::-1], [0.0]])  # noqa: E731
        out = {"dev": rev(d), "abs": rev(np.abs(d))}
        if self.const == 1:
            lam = d + 1.0
            # a zero eigenvalue gives log 0 = -inf, i.e. a vanishing product
            with np.errstate(divide="ignore"):
                if np.iscomplexobj(lam) or np.any(lam <= 0):
                    logs = np.log(lam.astype(complex))
                else:
                    logs = np.log(lam)
            out["log"] = rev(logs)
            out["abslog"] = rev(np.abs(logs))
        return out

    def _dev_tail(self, m: int):
        far = sum(t.tail(max(m, GRID)) for t in self.terms)
        if m >= GRID:
            return far
        return self._grid["dev"][m] + far

    def _dev_abs_tail(self, m: int) -> float:
        far = sum(t.abs_tail(max(m, GRID)) for t in self.terms)
        if m >= GRID:
            return float(far)
        return float(self._grid["abs"][m] + far)

    def tail_sum(self, m: int):
        """``sum_{j>m} lambda_j`` or ``None`` when not absolutely summable."""
        if self.const != 0 or not self.dev_summable:
            return None
        return _num(self._dev_tail(int(m)))

    def abs_tail(self, m: int) -> float:
        """Upper bound for ``sum_{j>m} |lambda_j|`` (``inf`` if divergent)."""
        if self.const != 0 or not self.dev_summable:
            return math.inf
        return self._dev_abs_tail(int(m))

    def _far_log(self, m: int):
        # log(1+u) = u - u^2/2 + u^3/3 - ..., u a finite sum of terms
        u = self.terms
        u2 = _merge_terms(a * b for a in u for b in u)
        u3 = _merge_terms(a * b for a in u2 for b in u)
        val = sum(t.tail(m) for t in u) - 0.5 * sum(t.tail(m) for t in u2) + sum(t.tail(m) for t in u3) / 3
        return val

    def log_tail(self, m: int):
        """``sum_{j>m} log(lambda_j)`` or ``None`` unless ``lambda_j -> 1``
        absolutely summably."""
        if self.const != 1 or not self.dev_summable:
            return None
        m = int(m)
        far = self._far_log(max(m, GRID))
        if m >= GRID:
            return _num(complex(far))
        return _num(complex(self._grid["log"][m] + far))

    def log_abs_tail(self, m: int) -> float:
        """Upper bound for ``sum_{j>m} |log lambda_j|``."""
        if self.const != 1 or not self.dev_summable:
            return math.inf
        m = int(m)
        far = 2.0 * sum(t.abs_tail(max(m, GRID)) for t in self.terms)
        if m >= GRID:
            return float(far)
        return float(self._grid["abslog"][m] + far)

    def sup_abs(self, n: int = 4096) -> float:
        """Sup of ``|lambda_j|`` over the head, a window and the limit."""
        j = np.arange(1, max(n, len(self.head)) + 1)
        return float(max(np.max(np.abs(self.values(j))), abs(self.const)))

    def __str__(self) -> str:
        return self.label or repr(self)


# ---------------------------------------------------------------- grammar


class _Sum:
    """Intermediate ``const + sum(terms)`` during parsing."""

    def __init__(self, const=0.0, terms=()):
        self.const = const
        self.terms = tuple(t for t in terms if t.coef != 0)

    @staticmethod
    def lift(x):
        return x if isinstance(x, _Sum) else _Sum(x, ())

    def single(self):
        if self.const == 0 and len(self.terms) == 1:
            return self.terms[0]
        return None

    def linear(self):
        """``(a, s)`` if this is ``a*(j + s)`` else ``None``."""
        t = self.single()
        if t is not None and t.ratio == 1 and len(t.factors) == 1 and t.factors[0][1] == -1:
            return t.coef, t.factors[0][0]
        return None

    def affine(self):
        """``(a, b)`` if this is ``a*j + b`` else ``None``."""
        if len(self.terms) != 1:
            return None
        t = self.terms[0]
        if t.ratio == 1 and len(t.factors) == 1 and t.factors[0][1] == -1:
            a, s = t.coef, t.factors[0][0]
            return a, self.const + a * s
        return None


def _add(x, y, sign=1):
    if not isinstance(x, _Sum) and not isinstance(y, _Sum):
        return x + sign * y
    X, Y = _Sum.lift(x), _Sum.lift(y)
    # keep j + c as a single shifted factor
    if not isinstance(y, _Sum) and X.linear() is not None and X.linear()[0] == 1:
        return _Sum(0.0, (Term(1.0, 1.0, ((X.linear()[1] + sign * y, -1),)),))
    if not isinstance(x, _Sum) and sign == 1 and Y.linear() is not None and Y.linear()[0] == 1:
        return _Sum(0.0, (Term(1.0, 1.0, ((Y.linear()[1] + x, -1),)),))
    return _Sum(X.const + sign * Y.const, X.terms + tuple(t.scaled(sign) for t in Y.terms))


def _mul(x, y):
    if not isinstance(x, _Sum) and not isinstance(y, _Sum):
        return x * y
    X, Y = _Sum.lift(x), _Sum.lift(y)
    terms = [t.scaled(Y.const) for t in X.terms] + [t.scaled(X.const) for t in Y.terms]
    terms += [a * b for a in X.terms for b in Y.terms]
    return _Sum(X.const * Y.const, terms)


def _div(x, y):
    if not isinstance(y, _Sum):
        if y == 0:
            raise SpecError("division by zero in sequence expression")
        return x / y if not isinstance(x, _Sum) else _mul(x, 1.0 / y)
    t = y.single()
    if t is None:
        raise SpecError("denominator must be a single power or geometric factor")
    return _mul(x, _Sum(0.0, (t.power(-1.0),)))


def _pow(base, exp, var):
    if not isinstance(base, _Sum) and not isinstance(exp, _Sum):
        return base**exp
    if isinstance(base, _Sum) and not isinstance(exp, _Sum):
        t = base.single()
        if t is None:
            raise SpecError("only single factors may be raised to a power")
        return _Sum(0.0, (t.power(float(exp)),))
    if not isinstance(base, _Sum):
        aff = exp.affine()
        if aff is None:
            raise SpecError(f"exponent must be affine in {var}")
        a, b = aff
        if base < 0 and (a != int(a) or b != int(b)):
            raise SpecError("negative base needs integer exponent coefficients")
        coef = base**b if b != 0 else 1.0
        return _Sum(0.0, (Term(coef, base**a),))
    raise SpecError(f"{var} may not appear in both base and exponent")


def _eval(node, var):
    if isinstance(node, ast.Expression):
        return _eval(node.body, var)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
        return node.value
    if isinstance(node, ast.Name):
        if node.id == var:
            return _Sum(0.0, (Term(1.0, 1.0, ((0.0, -1),)),))
        if node.id == "pi":
            return math.pi
        if node.id == "e":
            return math.e
        raise SpecError(f"unknown name {node.id!r} in sequence expression")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval(node.operand, var)
        if isinstance(node.op, ast.UAdd):
            return v
        return _mul(v, -1.0) if isinstance(v, _Sum) else -v
    if isinstance(node, ast.BinOp):
        a, b = _eval(node.left, var), _eval(node.right, var)
        if isinstance(node.op, ast.Add):
            return _add(a, b)
        if isinstance(node.op, ast.Sub):
            return _add(a, b, -1)
        if isinstance(node.op, ast.Mult):
            return _mul(a, b)
        if isinstance(node.op, ast.Div):
            return _div(a, b)
        if isinstance(node.op, ast.Pow):
            return _pow(a, b, var)
    raise SpecError(f"unsupported syntax in sequence expression: {ast.dump(node)[:60]}")


def parse_sequence(text: str, var: str = "j") -> EigenSequence:
    """Parse a closed-form sequence such as ``"1 - 1/(j+1)^2"``."""
    src = str(text).strip().replace("^", "**")
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise SpecError(f"cannot parse sequence {text!r}: {exc.msg}", line=exc.lineno, column=exc.offset)
    val = _eval(tree, var)
    s = _Sum.lift(val)
    for t in s.terms:
        if any(p < 0 for _, p in t.factors) and abs(t.ratio) >= 1:
            raise SpecError(f"sequence {text!r} grows without bound")
    return EigenSequence((), s.const, s.terms, label=str(text))


def sequence_from_config(value, tail=None, var: str = "j") -> EigenSequence:
    """A sequence from a config value: an expression string, or an explicit
    list optionally followed by a tail expression (default: zeros)."""
    if isinstance(value, str):
        return parse_sequence(value, var)
    if isinstance(value, (int, float)):
        return EigenSequence.constant(value)
    if isinstance(value, (list, tuple)):
        vals = []
        for v in value:
            if isinstance(v, (list, tuple)) and len(v) == 2:
                vals.append(complex(v[0], v[1]))
            elif isinstance(v, (int, float)):
                vals.append(v)
            else:
                raise SpecError(f"explicit sequence entries must be numbers, got {v!r}")
        t = parse_sequence(tail, var) if tail is not None else EigenSequence()
        seq = EigenSequence.explicit(vals, t)
        return EigenSequence(seq.head, seq.const, seq.terms, label=f"{value}" + (f" then {tail}" if tail else ""))
    raise SpecError(f"cannot build a sequence from {value!r}")
