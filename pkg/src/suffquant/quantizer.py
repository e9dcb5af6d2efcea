"""Bayesian risk of quantizer/fusion configurations and exhaustive optimization."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import AlphabetMismatch, BudgetExceeded
from .model import Alphabet, CostMatrix, DiscreteModel, Statistic, axis_name, induced_model
from .partitions import count_labelings, labeling_array, one_hot

#: candidates within this of the minimum count as ties (lowest index wins)
TIE_ATOL = 1e-13
#: default cap on canonical (gamma1, gamma2) pairs for exhaustive search
DEFAULT_BUDGET = 10**7


@dataclass(frozen=True, eq=False)
class Quantizer:
    """Deterministic map from a domain alphabet into ``levels`` indices."""

    side: str
    domain: Alphabet
    levels: int
    codes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "side", axis_name(self.side))
        object.__setattr__(self, "domain", Alphabet.of(self.domain))
        codes = tuple(int(c) for c in self.codes)
        if len(codes) != len(self.domain):
            raise AlphabetMismatch(f"quantizer maps {len(codes)} symbols, domain has {len(self.domain)}")
        if self.levels < 1 or any(c < 0 or c >= self.levels for c in codes):
            raise AlphabetMismatch(f"quantizer levels must lie in 0..{self.levels - 1}")
        object.__setattr__(self, "codes", codes)

    @classmethod
    def from_map(cls, side, domain, levels: int, mapping) -> "Quantizer":
        domain = Alphabet.of(domain)
        return cls(side, domain, levels, tuple(int(mapping[s]) for s in domain.labels))

    def __call__(self, symbol) -> int:
        return self.codes[self.domain.index(symbol)]

    def canonical(self) -> "Quantizer":
        """Levels relabeled by first occurrence."""
        seen: dict[int, int] = {}
        return Quantizer(self.side, self.domain, self.levels, tuple(seen.setdefault(c, len(seen)) for c in self.codes))

    def matrix(self) -> np.ndarray:
        return one_hot(self.codes, self.levels)

    def to_statistic(self) -> Statistic:
        """The quantizer viewed as a statistic of its domain."""
        return Statistic(self.side, self.domain, self.codes)

    def as_dict(self) -> dict:
        return {"side": self.side, "levels": self.levels, "map": dict(zip(self.domain.labels, self.codes))}

    def __repr__(self):
        return f"Quantizer({self.side}, L={self.levels}, {list(self.codes)})"


@dataclass(frozen=True, eq=False)
class Estimator:
    """Fusion rule: ``table[u1, u2]`` is an index into ``estimates``.

    When ``estimates`` is None the table holds real-valued estimates
    (squared-error design on a continuous parameter).
    """

    table: np.ndarray
    estimates: Alphabet | None = None

    def __post_init__(self):
        t = np.array(self.table, dtype=float if self.estimates is None else np.intp)
        if self.estimates is not None and (t.min() < 0 or t.max() >= len(self.estimates)):
            raise AlphabetMismatch("estimator table refers to unknown estimate labels")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    def __call__(self, *levels):
        v = self.table[tuple(levels)]
        return self.estimates.labels[v] if self.estimates is not None else float(v)

    def as_dict(self) -> dict:
        if self.estimates is None:
            return {"table": self.table.tolist()}
        return {"table": [[self.estimates.labels[v] for v in row] for row in np.atleast_2d(self.table)]}


def argmin_lowest(a: np.ndarray, axis: int = -1, atol: float = TIE_ATOL) -> np.ndarray:
    """Argmin along ``axis``, taking the lowest index among near-ties."""
    a = np.moveaxis(np.asarray(a, dtype=float), axis, -1)
    m = a.min(axis=-1, keepdims=True)
    return np.argmax(a <= m + atol, axis=-1)


def expected_cost(cells: np.ndarray, cost: np.ndarray) -> np.ndarray:
    """``D[x..., k] = sum_theta p(theta, x...) d[theta, k]`` for a ``(theta, ...)`` tensor."""
    return np.tensordot(cells, cost, axes=(0, 0))


def reduce_axes(arr: np.ndarray, mats: Sequence[np.ndarray | None]) -> np.ndarray:
    """Push the leading axes of ``arr`` through one-hot matrices; ``None`` leaves an axis alone."""
    for i, g in enumerate(mats):
        if g is not None:
            arr = np.moveaxis(np.tensordot(arr, g, axes=(i, 0)), -1, i)
    return arr


def fusion_rule(du: np.ndarray, mass: np.ndarray) -> np.ndarray:
    """Optimal estimate index per level-cell; zero-mass cells get index 0."""
    h = argmin_lowest(du, axis=-1)
    return np.where(mass > 0, h, 0)


def _check_config(model: DiscreteModel, g1: Quantizer, g2: Quantizer, cost: CostMatrix):
    if g1.side != "x1" or g2.side != "x2":
        raise AlphabetMismatch("quantizers must act on x1 and x2")
    if g1.domain != model.x1 or g2.domain != model.x2:
        raise AlphabetMismatch("quantizer domains do not match the model alphabets")
    if cost.theta != model.theta:
        raise AlphabetMismatch("cost rows do not match the theta alphabet")


def _level_costs(model, g1, g2, cost) -> tuple[np.ndarray, np.ndarray]:
    p = model.p_theta_x1_x2()
    du = reduce_axes(expected_cost(p, cost.matrix), [g1.matrix(), g2.matrix()])
    mass = reduce_axes(p.sum(axis=0), [g1.matrix(), g2.matrix()])
    return du, mass


def risk(model: DiscreteModel, g1: Quantizer, g2: Quantizer, h: Estimator, cost: CostMatrix) -> float:
    """``E d[theta, h(g1(x1), g2(x2))]``."""
    _check_config(model, g1, g2, cost)
    if h.estimates != cost.estimates:
        raise AlphabetMismatch("estimator labels do not match the cost columns")
    if h.table.shape != (g1.levels, g2.levels):
        raise AlphabetMismatch(f"estimator table {h.table.shape} != levels {(g1.levels, g2.levels)}")
    du, _ = _level_costs(model, g1, g2, cost)
    return float(np.take_along_axis(du, h.table[..., None], axis=-1).sum())


def bayes_estimator(model: DiscreteModel, g1: Quantizer, g2: Quantizer, cost: CostMatrix) -> Estimator:
    """Fusion rule minimizing posterior expected cost in every level cell."""
    _check_config(model, g1, g2, cost)
    du, mass = _level_costs(model, g1, g2, cost)
    return Estimator(fusion_rule(du, mass), cost.estimates)


def bayes_risk(model: DiscreteModel, cost: CostMatrix) -> float:
    """Risk of the optimal estimator on unquantized ``(x1, x2)``."""
    if cost.theta != model.theta:
        raise AlphabetMismatch("cost rows do not match the theta alphabet")
    return float(expected_cost(model.p_theta_x1_x2(), cost.matrix).min(axis=-1).sum())


def compose(outer: Quantizer, stat: Statistic) -> Quantizer:
    """The raw-domain quantizer ``x -> outer(stat(x))``."""
    if outer.domain != stat.labels:
        raise AlphabetMismatch("quantizer domain must equal the statistic codomain")
    return Quantizer(stat.side, stat.domain, outer.levels, tuple(outer.codes[c] for c in stat.codes))


@dataclass(frozen=True, eq=False)
class RiskReport:
    min_risk: float
    quantizers: tuple[Quantizer, Quantizer]
    estimator: Estimator
    candidates_evaluated: int
    domain: str  # "raw" or "statistics"
    statistics: tuple[Statistic, Statistic] | None = None
    raw_quantizers: tuple[Quantizer, Quantizer] | None = None
    argmin_count: int = 1

    def as_dict(self) -> dict:
        out = {
            "min_risk": self.min_risk,
            "domain": self.domain,
            "candidates_evaluated": self.candidates_evaluated,
            "argmin_count": self.argmin_count,
            "quantizers": [q.as_dict() for q in self.quantizers],
            "estimator": self.estimator.as_dict(),
        }
        if self.statistics is not None:
            out["statistics"] = [s.as_dict() for s in self.statistics]
            out["raw_quantizers"] = [q.as_dict() for q in self.raw_quantizers]
        return out


Domain = Union[str, tuple[Statistic, Statistic]]


def exhaustive_search(
    model: DiscreteModel,
    cost: CostMatrix,
    l1: int,
    l2: int,
    domain: Domain = "raw",
    budget: int = DEFAULT_BUDGET,
) -> RiskReport:
    """Exact minimum risk over all deterministic quantizer pairs.

    Enumerates canonical labelings (partitions into at most ``L`` cells) of
    each side, pairs each with its optimal fusion rule, and returns the exact
    minimum with the lexicographically first minimizer. With
    ``domain=(T1, T2)`` the search runs on the induced model.
    """
    stats = None
    work = model
    if domain != "raw":
        if isinstance(domain, str):
            raise AlphabetMismatch(f"domain must be 'raw' or a (T1, T2) pair, got {domain!r}")
        stats = tuple(domain)
        work = induced_model(model, *stats)
    if cost.theta != model.theta:
        raise AlphabetMismatch("cost rows do not match the theta alphabet")
    n1, n2 = len(work.x1), len(work.x2)
    c1, c2 = count_labelings(n1, l1), count_labelings(n2, l2)
    if c1 * c2 > budget:
        raise BudgetExceeded(f"{c1} x {c2} canonical candidates exceed the budget of {budget}")

    a1, a2 = labeling_array(n1, l1), labeling_array(n2, l2)
    p = work.p_theta_x1_x2()
    d = expected_cost(p, cost.matrix)  # (n1, n2, E)
    g2s = np.zeros((c2, n2, l2))
    g2s[np.arange(c2)[:, None], np.arange(n2)[None, :], a2] = 1.0
    risks = np.empty((c1, c2))
    for i, row in enumerate(a1):
        d1 = one_hot(row, l1).T @ d.reshape(n1, -1)  # (l1, n2*E)
        d1 = d1.reshape(l1, n2, -1)
        du = np.einsum("ibk,cbj->cijk", d1, g2s, optimize=True)
        risks[i] = du.min(axis=-1).sum(axis=(1, 2))

    best = float(risks.min())
    hits = np.flatnonzero(risks.ravel() <= best + 1e-12)
    i, j = np.unravel_index(hits[0], risks.shape)
    g1 = Quantizer("x1", work.x1, l1, tuple(a1[i]))
    g2 = Quantizer("x2", work.x2, l2, tuple(a2[j]))
    h = bayes_estimator(work, g1, g2, cost)
    raw_q = None
    if stats is not None:
        raw_q = (compose(g1, stats[0]), compose(g2, stats[1]))
    return RiskReport(
        best,
        (g1, g2),
        h,
        c1 * c2,
        "raw" if stats is None else "statistics",
        stats,
        raw_q,
        int(hits.size),
    )
