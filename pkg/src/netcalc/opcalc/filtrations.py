"""Computable increasing families of finite-dimensional subspaces.

Each strategy maps ``n`` to a frame; frames of one strategy are nested
in ``n``.  Coordinate and random frames span ``e_0..e_{n-1}``.  The
adversarial strategies additionally pull in every coordinate in
``[n, factor*n)`` whose diagonal entry has the requested sign, which
makes them the natural divergence witnesses for conditionally summable
diagonals.  Eigen-sorted frames take the ``n`` largest diagonal entries
(by modulus) out of a fixed pool.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import ortho_group

from ..errors import SpecError
from .operators import OperatorSpec
from .sections import CoordinateFrame, DenseFrame

__all__ = ["Filtration", "STRATEGIES", "parse_strategies"]

STRATEGIES = ("coordinate", "eigen-sorted", "adversarial+", "adversarial-", "random")

DIAGONAL_FACTOR = 64
DENSE_FACTOR = 4
DENSE_CAP = 256


def _key(vals: np.ndarray, kind: str) -> np.ndarray:
    if kind == "det":
        with np.errstate(divide="ignore"):
            return np.log(np.abs(vals))
    return np.real(vals)


@dataclass(frozen=True)
class Filtration:
    """A strategy tag plus the parameters that make it reproducible."""

    strategy: str
    seed: int | None = None
    pool: int | None = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise SpecError(f"unknown filtration strategy {self.strategy!r}", field="strategies")
        if self.strategy == "random" and self.seed is None:
            raise SpecError("random strategy needs a seed", field="seed")

    @property
    def name(self) -> str:
        return self.strategy

    def cap(self, T: OperatorSpec) -> int:
        """Largest ``n`` this strategy will sample for ``T``."""
        size = T.size if T.size is not None else np.inf
        if self.strategy == "random":
            return int(min(DENSE_CAP, size))
        if not T.has_fast_diagonal:
            limit = DENSE_CAP // (DENSE_FACTOR if self.strategy.startswith("adv") else 1)
            return int(min(limit, size))
        return int(min(2**40, size))

    def frame(self, T: OperatorSpec, n: int, kind: str = "trace"):
        n = int(n)
        size = T.size
        if size is not None:
            n = min(n, size)
        s = self.strategy
        if s == "coordinate":
            return CoordinateFrame(np.arange(n))
        if s == "random":
            if n <= 1:
                return CoordinateFrame(np.arange(n))
            Q = ortho_group.rvs(n, random_state=np.random.default_rng([self.seed, n]))
            return DenseFrame(Q)
        if s.startswith("adversarial"):
            factor = DIAGONAL_FACTOR if T.has_fast_diagonal else DENSE_FACTOR
            hi = factor * n if size is None else min(factor * n, size)
            window = np.arange(n, hi)
            k = _key(T.diagonal(window), kind)
            pick = window[k > 0] if s.endswith("+") else window[k < 0]
            return CoordinateFrame(np.concatenate([np.arange(n), pick]))
        # eigen-sorted
        pool = self.pool or (DIAGONAL_FACTOR * n)
        if size is not None:
            pool = min(pool, size)
        cand = np.arange(pool)
        k = np.abs(_key(T.diagonal(cand), kind))
        k = np.where(np.isfinite(k), k, np.inf)
        order = np.argsort(-k, kind="stable")[:n]
        return CoordinateFrame(np.sort(cand[order]))

    def horizon(self, T: OperatorSpec, frame) -> int:
        """Every index at or beyond this position is absent from the frame,
        so its contribution can be added in closed form."""
        return frame.horizon


def parse_strategies(text, seed=None, pool=None) -> list[Filtration]:
    """``"coordinate,adversarial+,random"`` -> filtrations."""
    names = [s.strip() for s in (text.split(",") if isinstance(text, str) else text) if s.strip()]
    if not names:
        raise SpecError("at least one strategy is required", field="strategies")
    return [Filtration(s, seed if s == "random" else None, pool if s == "eigen-sorted" else None) for s in names]
