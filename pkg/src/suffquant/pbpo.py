"""Person-by-person optimization of quantizers and fusion rule.

A design problem is a tensor of cells indexed by one observation symbol
per sensor. Each sweep reassigns every symbol of sensor 1 to the level that
minimizes its conditional expected cost with the other quantizers and the
fusion rule held fixed, then does the same for sensor 2, and so on, and
finally refits the fusion rule. Every step is an exact coordinate
minimization, so the risk never increases.

Two objectives share the sweep driver: a discrete cost matrix over a finite
parameter, and squared error on a real parameter (cells carry mass, first
and second moments of the parameter).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import AlphabetMismatch
from .model import CostMatrix, DiscreteModel
from .partitions import one_hot
from .quantizer import (
    Estimator,
    Quantizer,
    argmin_lowest,
    expected_cost,
    fusion_rule,
    reduce_axes,
)
from .rng import stream

DEFAULT_RESTARTS = 16


class DiscreteObjective:
    """Expected cost ``d[theta, h(u...)]`` on a ``(theta, n_1, ..., n_K)`` cell tensor."""

    def __init__(self, cells: np.ndarray, cost: np.ndarray):
        cells = np.asarray(cells, dtype=float)
        self.cost = np.asarray(cost, dtype=float)
        self.d = expected_cost(cells, self.cost)  # (n_1..n_K, E)
        self.mass = cells.sum(axis=0)
        self.sizes = self.mass.shape

    def fit(self, gammas, levels):
        mats = [one_hot(g, l) for g, l in zip(gammas, levels)]
        du = reduce_axes(self.d, mats)
        mass = reduce_axes(self.mass, mats)
        h = fusion_rule(du, mass)
        r = float(np.take_along_axis(du, h[..., None], axis=-1).sum())
        return h, r

    def alpha(self, k, gammas, levels, h):
        mats = [None if i == k else one_hot(g, l) for i, (g, l) in enumerate(zip(gammas, levels))]
        dk = np.moveaxis(reduce_axes(self.d, mats), k, 0)  # (n_k, L_-k..., E)
        hk = np.moveaxis(h, k, 0)  # (L_k, L_-k...)
        out = np.empty((dk.shape[0], levels[k]))
        for u in range(levels[k]):
            idx = np.broadcast_to(hk[u][None, ..., None], dk.shape[:-1] + (1,))
            vals = np.take_along_axis(dk, idx, axis=-1)[..., 0]
            out[:, u] = vals.reshape(dk.shape[0], -1).sum(axis=1)
        return out


class SquaredErrorObjective:
    """Squared error on a real parameter.

    ``mass``, ``first`` and ``second`` hold, per cell, the probability and the
    mass-weighted first and second moments of the parameter. The best
    estimate for a level cell is its conditional mean.
    """

    def __init__(self, mass: np.ndarray, first: np.ndarray, second: np.ndarray):
        self.mass = np.asarray(mass, dtype=float)
        self.first = np.asarray(first, dtype=float)
        self.second = np.asarray(second, dtype=float)
        self.sizes = self.mass.shape

    def fit(self, gammas, levels):
        mats = [one_hot(g, l) for g, l in zip(gammas, levels)]
        m = reduce_axes(self.mass, mats)
        s1 = reduce_axes(self.first, mats)
        s2 = reduce_axes(self.second, mats)
        with np.errstate(invalid="ignore", divide="ignore"):
            h = np.where(m > 0, s1 / m, 0.0)
        r = float((s2 - 2 * h * s1 + h * h * m).sum())
        return h, r

    def alpha(self, k, gammas, levels, h):
        mats = [None if i == k else one_hot(g, l) for i, (g, l) in enumerate(zip(gammas, levels))]
        m, s1, s2 = (np.moveaxis(reduce_axes(a, mats), k, 0) for a in (self.mass, self.first, self.second))
        hk = np.moveaxis(h, k, 0)
        out = np.empty((m.shape[0], levels[k]))
        for u in range(levels[k]):
            hu = hk[u][None]
            cell = s2 - 2 * hu * s1 + hu * hu * m
            out[:, u] = cell.reshape(m.shape[0], -1).sum(axis=1)
        return out


Objective = Union[DiscreteObjective, SquaredErrorObjective]


@dataclass
class CellDesign:
    gammas: list[np.ndarray]
    h: np.ndarray
    risk: float
    risk_trace: list[float]
    iterations: int
    converged: bool
    restart_risks: list[float] = field(default_factory=list)


def quantile_init(masses: Sequence[np.ndarray], levels: Sequence[int]) -> list[np.ndarray]:
    """Contiguous equal-mass groups of each alphabet, in alphabet order."""
    out = []
    for p, l in zip(masses, levels):
        p = np.asarray(p, dtype=float)
        total = p.sum()
        mid = (np.cumsum(p) - p / 2) / (total if total > 0 else 1.0)
        out.append(np.minimum((mid * l).astype(np.intp), l - 1))
    return out


def random_init(sizes: Sequence[int], levels: Sequence[int], rng: np.random.Generator) -> list[np.ndarray]:
    return [rng.integers(0, l, size=n).astype(np.intp) for n, l in zip(sizes, levels)]


def sensor_masses(obj: Objective) -> list[np.ndarray]:
    m = obj.mass
    return [m.sum(axis=tuple(j for j in range(m.ndim) if j != i)) for i in range(m.ndim)]


def run_sweeps(
    obj: Objective,
    levels: Sequence[int],
    init: Sequence[np.ndarray],
    tol: float = 1e-12,
    max_iter: int = 100,
) -> CellDesign:
    """Cyclic person-by-person sweeps from ``init`` until a fixed point.

    Stops when a sweep changes no assignment or lowers the risk by less than
    ``tol``; ``converged`` is False when ``max_iter`` sweeps run out first.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    levels = [int(l) for l in levels]
    gammas = [np.asarray(g, dtype=np.intp).copy() for g in init]
    if [g.size for g in gammas] != list(obj.sizes):
        raise AlphabetMismatch("initial quantizers do not match the cell tensor")
    h, r = obj.fit(gammas, levels)
    trace = [r]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        before = [g.copy() for g in gammas]
        for k in range(len(gammas)):
            gammas[k] = argmin_lowest(obj.alpha(k, gammas, levels, h), axis=1).astype(np.intp)
        h, r = obj.fit(gammas, levels)
        trace.append(r)
        if all(np.array_equal(a, b) for a, b in zip(before, gammas)) or trace[-2] - r < tol:
            converged = True
            break
    return CellDesign(gammas, h, r, trace, it, converged)


def best_of_restarts(
    obj: Objective,
    levels: Sequence[int],
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    tol: float = 1e-12,
    max_iter: int = 100,
) -> CellDesign:
    """Restart 0 uses the quantile init, the rest seeded random inits.

    The earliest restart within 1e-12 of the best risk wins, so the result
    does not depend on the order restarts finish in.
    """
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    runs = []
    for i in range(restarts):
        if i == 0:
            init = quantile_init(sensor_masses(obj), levels)
        else:
            init = random_init(obj.sizes, levels, stream(seed, i))
        runs.append(run_sweeps(obj, levels, init, tol, max_iter))
    risks = [r.risk for r in runs]
    best = min(risks)
    pick = next(i for i, v in enumerate(risks) if v <= best + 1e-12)
    out = runs[pick]
    out.restart_risks = risks
    return out


@dataclass(frozen=True, eq=False)
class DesignResult:
    quantizers: tuple[Quantizer, Quantizer]
    estimator: Estimator
    risk: float
    risk_trace: tuple[float, ...]
    iterations: int
    converged: bool
    restart_risks: tuple[float, ...] = ()

    def as_dict(self) -> dict:
        return {
            "risk": self.risk,
            "risk_trace": list(self.risk_trace),
            "iterations": self.iterations,
            "converged": self.converged,
            "restart_risks": list(self.restart_risks),
            "quantizers": [q.as_dict() for q in self.quantizers],
            "estimator": self.estimator.as_dict(),
        }


def _objective(model: DiscreteModel, cost: CostMatrix) -> DiscreteObjective:
    if cost.theta != model.theta:
        raise AlphabetMismatch("cost rows do not match the theta alphabet")
    return DiscreteObjective(model.p_theta_x1_x2(), cost.matrix)


def _result(model, cost, levels, design: CellDesign) -> DesignResult:
    q = (
        Quantizer("x1", model.x1, levels[0], tuple(design.gammas[0])),
        Quantizer("x2", model.x2, levels[1], tuple(design.gammas[1])),
    )
    return DesignResult(
        q,
        Estimator(design.h, cost.estimates),
        design.risk,
        tuple(design.risk_trace),
        design.iterations,
        design.converged,
        tuple(design.restart_risks),
    )


def pbpo(
    model: DiscreteModel,
    cost: CostMatrix,
    l1: int,
    l2: int,
    init="quantile",
    seed: int = 0,
    tol: float = 1e-12,
    max_iter: int = 100,
) -> DesignResult:
    """A single person-by-person design run.

    ``init`` is ``"quantile"``, ``"random"`` (drawn from ``seed``) or an
    explicit ``(Quantizer, Quantizer)`` pair.
    """
    if l1 < 1 or l2 < 1:
        raise ValueError("level counts must be at least 1")
    obj = _objective(model, cost)
    levels = (l1, l2)
    if isinstance(init, str):
        if init == "quantile":
            start = quantile_init(sensor_masses(obj), levels)
        elif init == "random":
            start = random_init(obj.sizes, levels, stream(seed, 0))
        else:
            raise ValueError(f"unknown init {init!r}")
    else:
        g1, g2 = init
        if g1.levels != l1 or g2.levels != l2:
            raise AlphabetMismatch("explicit init levels differ from l1, l2")
        start = [np.array(g1.codes), np.array(g2.codes)]
    return _result(model, cost, levels, run_sweeps(obj, levels, start, tol, max_iter))


def pbpo_best(
    model: DiscreteModel,
    cost: CostMatrix,
    l1: int,
    l2: int,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    tol: float = 1e-12,
    max_iter: int = 100,
) -> DesignResult:
    """Best of ``restarts`` runs (one quantile init, the rest seeded random)."""
    obj = _objective(model, cost)
    levels = (l1, l2)
    return _result(model, cost, levels, best_of_restarts(obj, levels, restarts, seed, tol, max_iter))
