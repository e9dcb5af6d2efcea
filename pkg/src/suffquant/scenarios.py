"""Continuous running examples: Gaussian common interference and fading spectrum sensing.

Both scenarios are sampled in fixed-size chunks, chunk ``c`` of stream ``s``
drawing from ``stream(seed, s, c)``, so a sample set is bit-reproducible from
``(params, N, seed)``. Designs are fit on stream 0 and scored on an
independent stream 1 of the same size, which keeps the reported risks free
of in-sample optimism and gives honest Monte Carlo standard errors.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import InsufficientSamples, SingularCovariance
from .model import DiscreteModel, from_joint
from .pbpo import CellDesign, DiscreteObjective, SquaredErrorObjective, best_of_restarts
from .rng import stream
from .sufficiency import ci_check

CHUNK = 1 << 16
DESIGN_STREAM, EVAL_STREAM = 0, 1


@dataclass(frozen=True)
class GaussianParams:
    """``X1i = theta + Z + Ui`` and ``X2i = theta + Z + Vi``, ``i = 1..n``.

    ``theta ~ N(0, 1)``, ``Z ~ N(0, rho)``, ``Ui, Vi ~ N(0, 1 - rho)``; the
    hidden variable is ``W = theta + Z``.
    """

    n: int = 4
    rho: float = 0.5

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not 0 <= self.rho < 1:
            raise ValueError("rho must lie in [0, 1)")

    def as_dict(self):
        return {"n": self.n, "rho": self.rho}


@dataclass(frozen=True)
class SensingParams:
    """``X_k = h_k S + N_k`` with circular complex Gaussian fading and noise.

    ``S = 0`` under H0; under H1 ``S = r_m exp(j phi_m)`` with probability
    ``pi_m``. ``constellation`` holds ``(r_m, phi_m, pi_m)`` triples.
    """

    K: int = 1
    constellation: tuple[tuple[float, float, float], ...] = tuple(
        (1.0, np.pi / 4 + m * np.pi / 2, 0.25) for m in range(4)
    )
    prior_h1: float = 0.5
    fading_var: float = 1.0
    noise_var: float = 1.0

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be at least 1")
        const = tuple(tuple(float(v) for v in c) for c in self.constellation)
        object.__setattr__(self, "constellation", const)
        if not const or abs(sum(c[2] for c in const) - 1) > 1e-9 or any(c[2] < 0 for c in const):
            raise ValueError("constellation priors must be nonnegative and sum to 1")
        if self.fading_var <= 0 or self.noise_var <= 0:
            raise ValueError("variances must be positive")
        if not 0 < self.prior_h1 < 1:
            raise ValueError("prior_h1 must lie in (0, 1)")

    def as_dict(self):
        return {
            "K": self.K,
            "constellation": [list(c) for c in self.constellation],
            "prior_h1": self.prior_h1,
            "fading_var": self.fading_var,
            "noise_var": self.noise_var,
        }


@dataclass(frozen=True, eq=False)
class SampleSet:
    """``N`` rows of parameter, hidden value, raw observations and statistics.

    ``raw[k]`` has shape ``(N, n)`` for the Gaussian scenario and ``(N, 2)``
    (real, imaginary) for sensing. ``stats`` holds the sufficient statistic
    per sensor and ``alt`` the non-sufficient comparison statistic.
    """

    scenario: str
    theta: np.ndarray
    hidden: np.ndarray
    raw: tuple[np.ndarray, ...]
    stats: np.ndarray
    alt: np.ndarray
    seed: int

    def __len__(self):
        return self.theta.shape[0]

    def values(self, which: str) -> np.ndarray:
        if which == "sufficient":
            return self.stats
        if which == "alternative":
            return self.alt
        raise ValueError(f"unknown statistic selector {which!r}")


def _chunks(N: int):
    for c, start in enumerate(range(0, N, CHUNK)):
        yield c, min(CHUNK, N - start)


def gaussian_sample(params: GaussianParams, N: int, seed: int = 0, stream_id: int = DESIGN_STREAM) -> SampleSet:
    if N < 1:
        raise ValueError("N must be at least 1")
    n, rho = params.n, params.rho
    th, z, u, v = [], [], [], []
    for c, m in _chunks(N):
        rng = stream(seed, stream_id, c)
        th.append(rng.standard_normal(m))
        z.append(np.sqrt(rho) * rng.standard_normal(m))
        u.append(np.sqrt(1 - rho) * rng.standard_normal((m, n)))
        v.append(np.sqrt(1 - rho) * rng.standard_normal((m, n)))
    theta, z = np.concatenate(th), np.concatenate(z)
    w = theta + z
    x1 = w[:, None] + np.concatenate(u)
    x2 = w[:, None] + np.concatenate(v)
    stats = np.stack([x1.sum(axis=1), x2.sum(axis=1)], axis=1)
    alt = np.stack([x1[:, 0], x2[:, 0]], axis=1)
    return SampleSet("gaussian", theta, w, (x1, x2), stats, alt, seed)


def gaussian_posterior_w(params: GaussianParams, x1) -> tuple[float, float]:
    """Posterior mean and variance of ``W`` given one sensor's vector ``x1``."""
    n, rho = params.n, params.rho
    denom = n * (1 + rho) + (1 - rho)
    s = float(np.sum(x1))
    return (1 + rho) * s / denom, (1 + rho) * (1 - rho) / denom


def gaussian_mmse(params: GaussianParams) -> float:
    """MMSE of theta given both sums (unquantized)."""
    n, rho = params.n, params.rho
    var = n * n * (1 + rho) + n * (1 - rho)
    cov = n * n * (1 + rho)
    sigma = np.array([[var, cov], [cov, var]])
    c = np.array([n, n], dtype=float)
    if abs(np.linalg.det(sigma)) < 1e-12 * var * var:
        raise SingularCovariance("statistic covariance is singular")
    return float(1.0 - c @ np.linalg.solve(sigma, c))


def sensing_sample(params: SensingParams, N: int, seed: int = 0, stream_id: int = DESIGN_STREAM) -> SampleSet:
    if N < 1:
        raise ValueError("N must be at least 1")
    K = params.K
    r = np.array([c[0] for c in params.constellation])
    phi = np.array([c[1] for c in params.constellation])
    pi = np.array([c[2] for c in params.constellation])
    hs, ss, xs = [], [], []
    sh, sn = np.sqrt(params.fading_var / 2), np.sqrt(params.noise_var / 2)
    for c, m in _chunks(N):
        rng = stream(seed, stream_id, c)
        h1 = rng.random(m) < params.prior_h1
        sym = rng.choice(len(pi), size=m, p=pi)
        fade = sh * (rng.standard_normal((m, K)) + 1j * rng.standard_normal((m, K)))
        noise = sn * (rng.standard_normal((m, K)) + 1j * rng.standard_normal((m, K)))
        s = np.where(h1, r[sym] * np.exp(1j * phi[sym]), 0.0)
        hs.append(h1)
        ss.append(s)
        xs.append(fade * s[:, None] + noise)
    x = np.concatenate(xs)
    s = np.concatenate(ss)
    raw = tuple(np.stack([x[:, k].real, x[:, k].imag], axis=1) for k in range(K))
    return SampleSet("sensing", np.concatenate(hs).astype(np.intp), np.abs(s), raw, np.abs(x), x.real.copy(), seed)


def sensing_closed_form(params: SensingParams) -> dict:
    """Optimal single-sensor energy threshold on ``|X|^2`` and its error probability.

    ``|X|^2`` is exponential with mean ``noise_var`` under H0 and a mixture of
    exponentials with means ``fading_var r_m^2 + noise_var`` under H1; the
    likelihood ratio increases in ``|X|^2``, so a single threshold is Bayes
    optimal and is found as the root of the error derivative.
    """
    p0, p1 = 1 - params.prior_h1, params.prior_h1
    s0 = params.noise_var
    lam = np.array([params.fading_var * c[0] ** 2 + s0 for c in params.constellation])
    pi = np.array([c[2] for c in params.constellation])

    def pe(t):
        return p0 * np.exp(-t / s0) + p1 * float(np.sum(pi * (1 - np.exp(-t / lam))))

    def dpe(t):
        return -p0 / s0 * np.exp(-t / s0) + p1 * float(np.sum(pi / lam * np.exp(-t / lam)))

    if dpe(0.0) >= 0:
        t = 0.0
    else:
        hi = s0
        while dpe(hi) < 0:
            hi *= 2
            if hi > 1e6 * lam.max():
                return {"threshold_sq": float("inf"), "risk": p1}
        t = brentq(dpe, 0.0, hi, xtol=1e-14)
    return {"threshold_sq": float(t), "risk": float(pe(t))}


@dataclass(frozen=True, eq=False)
class EmpiricalBinning:
    """Quantile discretization of per-sensor statistics.

    ``cells`` is the empirical pmf over ``(theta-bin, b_1, ..., b_K)``;
    ``mass``, ``first`` and ``second`` carry the unbinned parameter moments
    per statistic cell (Gaussian scenario only). ``model`` is the discrete
    model over ``(theta-bin, b_1, b_2)`` when ``K <= 2``.
    """

    scenario: str
    which: str
    edges: tuple[np.ndarray, ...]
    bins: tuple[int, ...]
    cells: np.ndarray
    mass: np.ndarray
    first: np.ndarray | None
    second: np.ndarray | None
    model: DiscreteModel | None
    n: int

    def assign(self, values: np.ndarray) -> np.ndarray:
        """Bin indices per sensor: values below the first interior edge go to bin 0."""
        return np.stack([np.searchsorted(e[1:-1], values[:, k], side="right") for k, e in enumerate(self.edges)], axis=1)


def _quantile_theta(theta: np.ndarray, bins: int) -> np.ndarray:
    edges = np.quantile(theta, np.linspace(0, 1, bins + 1))
    return np.searchsorted(edges[1:-1], theta, side="right")


def empirical_model(
    samples: SampleSet,
    which: str = "sufficient",
    bins: Sequence[int] | int = 64,
    theta_bins: int = 4,
) -> EmpiricalBinning:
    """Bin each sensor's statistic into equal-mass cells and tabulate the joint."""
    vals = samples.values(which)
    K = vals.shape[1]
    bins = (int(bins),) * K if np.isscalar(bins) else tuple(int(b) for b in bins)
    if len(bins) != K or min(bins) < 2:
        raise ValueError(f"need {K} bin counts, each at least 2")
    N = len(samples)
    if N < 10 * int(np.prod(bins)):
        raise InsufficientSamples(f"{N} samples < 10 x {int(np.prod(bins))} cells")
    edges = tuple(np.quantile(vals[:, k], np.linspace(0, 1, b + 1)) for k, b in enumerate(bins))
    tmp = EmpiricalBinning(samples.scenario, which, edges, bins, np.zeros(0), np.zeros(0), None, None, None, N)
    idx = tmp.assign(vals)
    flat = np.ravel_multi_index(tuple(idx.T), bins)
    size = int(np.prod(bins))
    mass = np.bincount(flat, minlength=size).reshape(bins) / N
    if samples.scenario == "gaussian":
        tb = _quantile_theta(samples.theta, theta_bins)
        nt = theta_bins
        first = np.bincount(flat, weights=samples.theta, minlength=size).reshape(bins) / N
        second = np.bincount(flat, weights=samples.theta**2, minlength=size).reshape(bins) / N
    else:
        tb, nt = samples.theta, 2
        first = second = None
    cells = np.bincount(tb * size + flat, minlength=nt * size).reshape((nt,) + bins) / N
    model = None
    if K <= 2:
        joint = cells if K == 2 else cells[..., None]
        x2 = bins[1] if K == 2 else ("*",)
        model = from_joint(nt, bins[0], x2, joint)
    return EmpiricalBinning(samples.scenario, which, edges, bins, cells, mass, first, second, model, N)


def design(binning: EmpiricalBinning, levels: int, restarts: int = 16, seed: int = 0, max_iter: int = 100) -> CellDesign:
    """Best-of-restarts person-by-person design on the binned statistics."""
    K = len(binning.bins)
    if binning.scenario == "gaussian":
        obj = SquaredErrorObjective(binning.mass, binning.first, binning.second)
    else:
        obj = DiscreteObjective(binning.cells, 1.0 - np.eye(2))
    return best_of_restarts(obj, [levels] * K, restarts, seed, max_iter=max_iter)


@dataclass(frozen=True, eq=False)
class Evaluation:
    risk: float
    se: float
    losses: np.ndarray
    levels: np.ndarray
    estimates: np.ndarray


def evaluate(binning: EmpiricalBinning, d: CellDesign, samples: SampleSet) -> Evaluation:
    """Score a design on a sample set (normally the held-out stream)."""
    vals = samples.values(binning.which)
    idx = binning.assign(vals)
    u = np.stack([g[idx[:, k]] for k, g in enumerate(d.gammas)], axis=1)
    est = d.h[tuple(u.T)]
    if binning.scenario == "gaussian":
        loss = (samples.theta - est) ** 2
    else:
        loss = (samples.theta != est).astype(float)
    n = loss.shape[0]
    se = float(loss.std(ddof=1) / np.sqrt(n)) if n > 1 else float("nan")
    return Evaluation(float(loss.mean()), se, loss, u, est)


def threshold_of(binning: EmpiricalBinning, gamma: np.ndarray) -> float | None:
    """The ``|X|^2`` threshold of a 1-bit quantizer that switches level exactly once."""
    switches = np.flatnonzero(np.diff(gamma) != 0)
    if switches.size != 1:
        return None
    return float(binning.edges[0][switches[0] + 1] ** 2)


def ci_witness(samples: SampleSet, bins: int = 8, hidden_bins: int = 32) -> dict | None:
    """Statistical check of ``T1 ⟂ T2 | W`` on a coarse binning of the hidden value.

    The tolerance per hidden-value cell is ``5 / sqrt(count)``.
    """
    vals = samples.stats
    if vals.shape[1] < 2:
        return None
    N = len(samples)
    t_idx = [np.searchsorted(np.quantile(vals[:, k], np.linspace(0, 1, bins + 1))[1:-1], vals[:, k], side="right") for k in (0, 1)]
    h = samples.hidden
    uniq = np.unique(h)
    if uniq.size <= hidden_bins:
        w_idx, nw = np.searchsorted(uniq, h), uniq.size
    else:
        w_idx, nw = _quantile_theta(h, hidden_bins), hidden_bins
    flat = (w_idx * bins + t_idx[0]) * bins + t_idx[1]
    joint = np.bincount(flat, minlength=nw * bins * bins).reshape(nw, bins, bins) / N
    counts = joint.sum(axis=(1, 2)) * N
    tol = np.where(counts > 0, 5 / np.sqrt(np.maximum(counts, 1)), np.inf)
    rep = ci_check(joint, 1, 2, 0, tol)
    return {"holds": rep.holds, "max_deviation": rep.max_deviation, "tolerance_min": float(tol.min())}


def posterior_slope_check(params: GaussianParams, samples: SampleSet) -> dict:
    """Least-squares slope of ``W`` on ``sum(x1)`` against the conjugate formula."""
    s = samples.stats[:, 0]
    w = samples.hidden
    slope_mc = float(np.cov(w, s)[0, 1] / np.var(s, ddof=1))
    slope = gaussian_posterior_w(params, [1.0])[0]
    return {"formula_slope": slope, "mc_slope": slope_mc, "relative_error": abs(slope_mc - slope) / slope}


@dataclass(frozen=True, eq=False)
class ScenarioReport:
    results: dict
    csv_rows: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return self.results


def _arm(binning, d, ev) -> dict:
    return {
        "risk": ev.risk,
        "se": ev.se,
        "design_risk": d.risk,
        "iterations": d.iterations,
        "converged": d.converged,
        "quantizers": [[int(v) for v in g] for g in d.gammas],
        "fusion": np.asarray(d.h).tolist(),
    }


def scenario_report(
    scenario: str,
    params: GaussianParams | SensingParams | None = None,
    samples: int = 10**6,
    bins: int = 64,
    levels: int | None = None,
    restarts: int = 16,
    seed: int = 0,
    csv_limit: int = 0,
    theta_bins: int = 4,
) -> ScenarioReport:
    """Design on sufficient and on non-sufficient statistics and compare held-out risks.

    ``levels`` defaults to 4 for the Gaussian scenario and 2 for sensing.
    ``csv_limit`` caps the per-sample rows kept for export (statistic values,
    levels and estimate of the sufficient design).
    """
    if scenario == "gaussian":
        params = params or GaussianParams()
        sampler = gaussian_sample
        levels = levels or 4
    elif scenario == "sensing":
        params = params or SensingParams()
        sampler = sensing_sample
        levels = levels or 2
    else:
        raise ValueError(f"unknown scenario {scenario!r}")
    train = sampler(params, samples, seed, DESIGN_STREAM)
    test = sampler(params, samples, seed, EVAL_STREAM)

    arms = {}
    evals = {}
    for which in ("sufficient", "alternative"):
        b = empirical_model(train, which, bins, theta_bins)
        d = design(b, levels, restarts, seed)
        ev = evaluate(b, d, test)
        arms[which] = _arm(b, d, ev)
        evals[which] = (b, d, ev)
        if which == "sufficient" and scenario == "sensing" and params.K == 1 and levels == 2:
            arms[which]["threshold_sq"] = threshold_of(b, d.gammas[0])

    diff = evals["alternative"][2].losses - evals["sufficient"][2].losses
    combined = float(np.sqrt(arms["sufficient"]["se"] ** 2 + arms["alternative"]["se"] ** 2))
    results = {
        "scenario": scenario,
        "params": params.as_dict(),
        "samples": samples,
        "bins": bins,
        "levels": levels,
        "restarts": restarts,
        "seed": seed,
        "sufficient": arms["sufficient"],
        "alternative": arms["alternative"],
        "difference": {
            "value": float(diff.mean()),
            "paired_se": float(diff.std(ddof=1) / np.sqrt(diff.size)),
            "combined_se": combined,
        },
        "ci_witness": ci_witness(train),
    }
    if scenario == "gaussian":
        results["benchmark"] = {"mmse": gaussian_mmse(params)}
        results["posterior_w"] = posterior_slope_check(params, train)
    else:
        bench: dict = {}
        if params.K == 1:
            bench.update(sensing_closed_form(params))
        results["benchmark"] = bench

    rows = []
    if csv_limit > 0:
        b, d, ev = evals["sufficient"]
        vals = test.values("sufficient")
        K = vals.shape[1]
        header = [f"stat_{k + 1}" for k in range(K)] + [f"level_{k + 1}" for k in range(K)] + ["estimate"]
        rows.append(header)
        for i in range(min(csv_limit, len(test))):
            rows.append([repr(float(v)) for v in vals[i]] + [int(v) for v in ev.levels[i]] + [repr(float(ev.estimates[i]))])
    return ScenarioReport(results, rows)


def write_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)
