"""Sufficiency, conditional independence and HCI checks on discrete models.

All checks quantify only over conditioning events of positive mass. A
tolerance may be a scalar or an array with one entry per conditioning event
(used for empirical models, where sampling noise differs cell to cell).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.special import xlogy

from .errors import AlphabetMismatch, DegenerateModel, FactorizationFails, HciInvalid, MissingHiddenAxis
from .model import Alphabet, DiscreteModel, Statistic, axis_name

#: absolute check tolerance on probabilities for exact models
EPS_C = 1e-9
#: tolerance on mutual information gaps, in bits
EPS_MI = 1e-7

Tol = Union[float, np.ndarray]


@dataclass(frozen=True)
class CheckReport:
    holds: bool
    max_deviation: float
    witness: dict | None = None

    def as_dict(self) -> dict:
        return {"holds": self.holds, "max_deviation": self.max_deviation, "witness": self.witness}

    def __bool__(self):
        return self.holds


def _report(dev: np.ndarray, tol: Tol, locate) -> CheckReport:
    """Reduce per-event deviations; the witness is the first offending event."""
    dev = np.asarray(dev, dtype=float)
    tol = np.broadcast_to(np.asarray(tol, dtype=float), dev.shape)
    bad = np.flatnonzero((dev > tol).ravel())
    worst = float(dev.max()) if dev.size else 0.0
    if bad.size == 0:
        return CheckReport(True, worst, None)
    first = np.unravel_index(bad[0], dev.shape)
    return CheckReport(False, worst, locate(first))


def _posterior_gap(joint: np.ndarray, codes: np.ndarray, k: int) -> np.ndarray:
    """``max_t |p(t|x) - p(t|T(x))|`` for each column ``x`` of ``joint[t, x]``."""
    px = joint.sum(axis=0)
    pooled = np.zeros((joint.shape[0], k))
    np.add.at(pooled, (slice(None), codes), joint)
    pt = pooled.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        post = np.where(px > 0, joint / px, 0.0)
        post_t = np.where(pt > 0, pooled / pt, 0.0)
    dev = np.abs(post - post_t[:, codes]).max(axis=0)
    return np.where(px > 0, dev, 0.0)


def _check_side(model: DiscreteModel, stat: Statistic):
    if stat.side not in model.axes:
        raise AlphabetMismatch(f"model has no {stat.side} axis")
    if stat.domain != model.alphabet(stat.side):
        raise AlphabetMismatch(f"statistic domain does not match the {stat.side} alphabet")


def posterior_match(model: DiscreteModel, stat: Statistic, target="theta", tol: Tol = EPS_C) -> CheckReport:
    """Local sufficiency: does ``p(target | x_i)`` depend on ``x_i`` only through ``T(x_i)``?"""
    _check_side(model, stat)
    target = axis_name(target)
    joint = model.sum_over([target, stat.side])
    dev = _posterior_gap(joint, np.asarray(stat.codes), stat.size)
    labels = stat.domain.labels
    return _report(dev, tol, lambda i: {stat.side: labels[i[0]]})


def is_global_sufficient(
    model: DiscreteModel, t1: Statistic, t2: Statistic, target="theta", tol: Tol = EPS_C
) -> CheckReport:
    """Global sufficiency of ``(T1(x1), T2(x2))`` for ``target`` given ``(x1, x2)``."""
    if t1.side != "x1" or t2.side != "x2":
        raise AlphabetMismatch("expected statistics on x1 and x2")
    _check_side(model, t1)
    _check_side(model, t2)
    target = axis_name(target)
    joint = model.sum_over([target, "x1", "x2"])
    n1, n2 = joint.shape[1:]
    codes = (np.asarray(t1.codes)[:, None] * t2.size + np.asarray(t2.codes)[None, :]).ravel()
    dev = _posterior_gap(joint.reshape(joint.shape[0], -1), codes, t1.size * t2.size)
    l1, l2 = model.x1.labels, model.x2.labels
    return _report(dev.reshape(n1, n2), tol, lambda i: {"x1": l1[i[0]], "x2": l2[i[1]]})


def minimal_sufficient(
    model: DiscreteModel, side, target="theta", tol: float = EPS_C, on_null: str = "class"
) -> Statistic:
    """Coarsest statistic of ``side`` that is sufficient for ``target``.

    Symbols are grouped when their likelihood profiles over ``target`` are
    proportional: each column ``p(target, x)`` is divided by its maximum and
    compared to the representative of an existing class (first member), so
    the partition does not depend on epsilon-chaining. Symbols with zero mass
    go to a separate ``"null"`` class, or raise with ``on_null="raise"``.
    """
    side = axis_name(side)
    target = axis_name(target)
    joint = model.sum_over([target, side])
    domain = model.alphabet(side)
    peak = joint.max(axis=0)
    reps: list[np.ndarray] = []
    codes = []
    null_code = None
    for x in range(joint.shape[1]):
        if peak[x] <= 0:
            if on_null == "raise":
                raise DegenerateModel(f"symbol {domain.labels[x]!r} has zero likelihood under every {target}")
            if null_code is None:
                null_code = len(reps)
                reps.append(None)
            codes.append(null_code)
            continue
        prof = joint[:, x] / peak[x]
        for c, r in enumerate(reps):
            if r is not None and np.abs(prof - r).max() <= tol:
                codes.append(c)
                break
        else:
            codes.append(len(reps))
            reps.append(prof)
    members: list[list[str]] = [[] for _ in reps]
    for x, c in enumerate(codes):
        members[c].append(domain.labels[x])
    labels = ["null" if c == null_code else "+".join(m) for c, m in enumerate(members)]
    return Statistic(side, domain, tuple(codes), tuple(labels))


def _axes_tuple(desc) -> tuple[str, ...]:
    if desc is None:
        return ()
    if isinstance(desc, (str, int)):
        return (axis_name(desc),)
    return tuple(axis_name(s) for s in desc)


def ci_deviation(joint: np.ndarray, a: Sequence[int], b: Sequence[int], c: Sequence[int] = ()) -> np.ndarray:
    """Per-event ``max |p(a,b|c) - p(a|c) p(b|c)|`` over the flattened ``c`` events.

    Works on any nonnegative array; ``a``, ``b``, ``c`` are disjoint axis
    index tuples. Zero-mass events report 0.
    """
    a, b, c = tuple(a), tuple(b), tuple(c)
    used = a + b + c
    if not a or not b or len(set(used)) != len(used):
        raise AlphabetMismatch("CI axes must be nonempty (a, b) and pairwise disjoint")
    if any(i < 0 or i >= joint.ndim for i in used):
        raise AlphabetMismatch("CI axis out of range")
    p = joint.sum(axis=tuple(i for i in range(joint.ndim) if i not in used))
    order = sorted(used)
    p = np.transpose(p, [order.index(i) for i in used])
    na = int(np.prod([joint.shape[i] for i in a]))
    nb = int(np.prod([joint.shape[i] for i in b]))
    p = p.reshape(na, nb, -1)
    pc = p.sum(axis=(0, 1))
    with np.errstate(invalid="ignore", divide="ignore"):
        cond = np.where(pc > 0, p / pc, 0.0)
    prod = cond.sum(axis=1)[:, None, :] * cond.sum(axis=0)[None, :, :]
    dev = np.abs(cond - prod).max(axis=(0, 1))
    return np.where(pc > 0, dev, 0.0)


def ci_check(joint: np.ndarray, a, b, c=(), tol: Tol = EPS_C) -> CheckReport:
    """Conditional independence ``a ⟂ b | c`` on a raw array with integer axes."""
    a, b, c = (tuple([x]) if isinstance(x, (int, np.integer)) else tuple(x) for x in (a, b, c))
    dev = ci_deviation(joint, a, b, c)
    shape = tuple(joint.shape[i] for i in c)
    return _report(dev, tol, lambda i: {"given": [int(v) for v in np.unravel_index(i[0], shape)]} if c else {"given": []})


def conditional_independence(model: DiscreteModel, a, b, given=(), tol: Tol = EPS_C) -> CheckReport:
    """``a ⟂ b | given`` where each argument is an axis name or a tuple of names."""
    A, B, C = _axes_tuple(a), _axes_tuple(b), _axes_tuple(given)
    idx = lambda names: tuple(model.axis_index(n) for n in names)
    dev = ci_deviation(model.joint, idx(A), idx(B), idx(C))
    alphas = [model.alphabet(n) for n in C]
    shape = tuple(len(al) for al in alphas)

    def locate(i):
        if not C:
            return {}
        pos = np.unravel_index(i[0], shape)
        return {n: al.labels[k] for n, al, k in zip(C, alphas, pos)}

    return _report(dev, tol, locate)


@dataclass(frozen=True)
class HciReport:
    chain_a: CheckReport  # x1 ⟂ x2 | w
    chain_b: CheckReport  # theta ⟂ (x1, x2) | w

    @property
    def valid(self) -> bool:
        return self.chain_a.holds and self.chain_b.holds

    def as_dict(self) -> dict:
        return {"valid": self.valid, "chain_a": self.chain_a.as_dict(), "chain_b": self.chain_b.as_dict()}


@dataclass(frozen=True, eq=False)
class HciModel:
    """A model with a hidden axis ``w`` for which both HCI chains hold."""

    model: DiscreteModel
    report: HciReport


def check_hci(model: DiscreteModel, tol: Tol = EPS_C) -> HciReport:
    if not model.has_w:
        raise MissingHiddenAxis("HCI checks need a w axis")
    return HciReport(
        conditional_independence(model, "x1", "x2", "w", tol),
        conditional_independence(model, "theta", ("x1", "x2"), "w", tol),
    )


def validate_hci(model: DiscreteModel, tol: Tol = EPS_C) -> HciModel:
    """Return the model as an :class:`HciModel`; raise :class:`HciInvalid` if a chain fails."""
    report = check_hci(model, tol)
    if not report.valid:
        raise HciInvalid(report)
    return HciModel(model, report)


@dataclass(frozen=True, eq=False)
class FactorizationWitness:
    """``p(x1, x2, theta) = g(x1) f(T1(x1), x2, theta)``.

    ``g`` is the marginal ``p(x1)`` and ``f[t]`` is ``p(x2, theta | T1 = t)``.
    """

    statistic: Statistic
    g: np.ndarray
    f: np.ndarray  # (t1, x2, theta)

    def reconstruct(self) -> np.ndarray:
        """The ``(x1, x2, theta)`` tensor implied by the witness."""
        return self.g[:, None, None] * self.f[np.asarray(self.statistic.codes)]


def factorization_check(
    model: DiscreteModel, t1: Statistic, tol: Tol = EPS_C
) -> tuple[CheckReport, FactorizationWitness | None]:
    """Does the joint factor as ``g(x1) f(T1(x1), x2, theta)``?

    Within each ``T1`` class every slice ``p(x1, ., .)`` must be proportional
    to the class slice. The deviation is the largest absolute reconstruction
    error ``|p(x1,x2,theta) - g f|`` for each ``x1``; all-zero slices fit with
    ``g(x1) = 0``.
    """
    if t1.side != "x1":
        raise AlphabetMismatch("factorization is defined for a statistic on x1")
    _check_side(model, t1)
    p = np.transpose(model.p_theta_x1_x2(), (1, 2, 0))  # (x1, x2, theta)
    codes = np.asarray(t1.codes)
    g = p.sum(axis=(1, 2))
    pooled = np.zeros((t1.size,) + p.shape[1:])
    np.add.at(pooled, codes, p)
    mass = pooled.sum(axis=(1, 2))
    with np.errstate(invalid="ignore", divide="ignore"):
        f = np.where(mass[:, None, None] > 0, pooled / mass[:, None, None], 0.0)
    witness = FactorizationWitness(t1, g, f)
    dev = np.abs(p - witness.reconstruct()).max(axis=(1, 2))
    labels = model.x1.labels
    report = _report(dev, tol, lambda i: {"x1": labels[i[0]]})
    return report, (witness if report.holds else None)


def hci_from_factorization(model: DiscreteModel, t1: Statistic, tol: Tol = EPS_C) -> HciModel:
    """Augment the model with the hidden variable ``w = (T1(x1), x2)``.

    Requires the factorization to hold; the result has ``|T1| * |x2|``
    hidden symbols labeled ``"t|x2"``.
    """
    report, _ = factorization_check(model, t1, tol)
    if not report.holds:
        raise FactorizationFails(f"joint does not factor through T1 (deviation {report.max_deviation:.3g})")
    p = model.p_theta_x1_x2()
    k, n2 = t1.size, len(model.x2)
    sel = np.zeros((k, n2, len(model.x1), n2))
    for x1, t in enumerate(t1.codes):
        sel[t, np.arange(n2), x1, np.arange(n2)] = 1.0
    joint = p[:, None, None, :, :] * sel[None]
    joint = joint.reshape(len(model.theta), k * n2, len(model.x1), n2)
    w = Alphabet(tuple(f"{t}|{x}" for t in t1.labels.labels for x in model.x2.labels))
    aug = DiscreteModel(model.theta, model.x1, model.x2, joint, w)
    return validate_hci(aug, tol)


def mutual_information(joint2d: np.ndarray) -> float:
    """``I(A;B)`` in bits from a 2-D joint pmf."""
    pa = joint2d.sum(axis=1, keepdims=True)
    pb = joint2d.sum(axis=0, keepdims=True)
    denom = pa * pb
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(joint2d > 0, joint2d / np.where(denom > 0, denom, 1.0), 1.0)
    return float(xlogy(joint2d, ratio).sum() / np.log(2.0))


def mutual_information_gap(model: DiscreteModel, side, stat: Statistic, target="theta") -> float:
    """``I(target; x_side) - I(target; T(x_side))`` in bits."""
    side = axis_name(side)
    if stat.side != side:
        raise AlphabetMismatch(f"statistic is on {stat.side}, not {side}")
    _check_side(model, stat)
    joint = model.sum_over([axis_name(target), side])
    return mutual_information(joint) - mutual_information(joint @ stat.matrix())
