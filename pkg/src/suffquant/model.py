"""Finite-alphabet joint models, statistics, costs and derived distributions.

Axis order is fixed to ``(theta, w, x1, x2)``; ``w`` is optional. Tensors are
row-major with ``theta`` slowest and ``x2`` fastest.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import (
    AlphabetMismatch,
    EmptySubset,
    NegativeProbability,
    NullConditioningEvent,
    RowNotNormalized,
)
from .partitions import one_hot

#: absolute tolerance on probability mass
EPS_P = 1e-9
#: entries in (-CLAMP, 0) are float dust and clamped; anything <= -CLAMP is rejected
CLAMP = 1e-12

AXES = ("theta", "w", "x1", "x2")
_SIDE_ALIASES = {1: "x1", 2: "x2", "1": "x1", "2": "x2", "x1": "x1", "x2": "x2", "w": "w", "theta": "theta"}


def axis_name(side) -> str:
    try:
        return _SIDE_ALIASES[side]
    except (KeyError, TypeError):
        raise AlphabetMismatch(f"unknown axis {side!r}") from None


@dataclass(frozen=True)
class Alphabet:
    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(s) for s in self.labels)
        object.__setattr__(self, "labels", labels)
        if not labels:
            raise AlphabetMismatch("alphabet must have at least one symbol")
        if len(set(labels)) != len(labels):
            raise AlphabetMismatch(f"duplicate labels in alphabet {labels}")

    @classmethod
    def of(cls, desc: "AlphabetLike") -> "Alphabet":
        if isinstance(desc, Alphabet):
            return desc
        if isinstance(desc, (int, np.integer)):
            return cls(tuple(str(i) for i in range(int(desc))))
        return cls(tuple(desc))

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    @property
    def size(self) -> int:
        return len(self.labels)

    def index(self, label) -> int:
        if isinstance(label, (int, np.integer)) and not isinstance(label, bool):
            if 0 <= int(label) < len(self.labels):
                return int(label)
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise AlphabetMismatch(f"symbol {label!r} not in alphabet {self.labels}") from None


AlphabetLike = Union[Alphabet, int, Sequence[str]]


def _as_readonly(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DiscreteModel:
    """Joint pmf over ``(theta [, w], x1, x2)``.

    The constructor only checks shapes, so an unnormalized tensor can be held
    and inspected with :func:`validate`. Use :func:`build_model` to get a
    checked model.
    """

    theta: Alphabet
    x1: Alphabet
    x2: Alphabet
    joint: np.ndarray
    w: Alphabet | None = None

    def __post_init__(self):
        for name in ("theta", "x1", "x2"):
            object.__setattr__(self, name, Alphabet.of(getattr(self, name)))
        if self.w is not None:
            object.__setattr__(self, "w", Alphabet.of(self.w))
        joint = _as_readonly(self.joint)
        expected = tuple(len(self.alphabet(a)) for a in self.axes)
        if joint.size == int(np.prod(expected)) and joint.shape != expected and joint.ndim == 1:
            joint = _as_readonly(joint.reshape(expected))
        if joint.shape != expected:
            raise AlphabetMismatch(f"joint has shape {joint.shape}, alphabets imply {expected}")
        object.__setattr__(self, "joint", joint)

    @property
    def axes(self) -> tuple[str, ...]:
        return AXES if self.w is not None else ("theta", "x1", "x2")

    @property
    def has_w(self) -> bool:
        return self.w is not None

    def alphabet(self, axis) -> Alphabet:
        name = axis_name(axis)
        a = getattr(self, name)
        if a is None:
            raise AlphabetMismatch(f"model has no {name} axis")
        return a

    def axis_index(self, axis) -> int:
        name = axis_name(axis)
        if name not in self.axes:
            raise AlphabetMismatch(f"model has no {name} axis")
        return self.axes.index(name)

    def p_theta_x1_x2(self) -> np.ndarray:
        """The ``(theta, x1, x2)`` marginal, summing out ``w`` when present."""
        if self.w is None:
            return self.joint
        return self.joint.sum(axis=1)

    def without_w(self) -> "DiscreteModel":
        if self.w is None:
            return self
        return DiscreteModel(self.theta, self.x1, self.x2, self.p_theta_x1_x2())

    def sum_over(self, keep: Sequence[str]) -> np.ndarray:
        """Marginal array over ``keep`` (axis names), in the order given."""
        idx = [self.axis_index(a) for a in keep]
        if len(set(idx)) != len(idx):
            raise AlphabetMismatch(f"repeated axes in {keep}")
        drop = tuple(i for i in range(self.joint.ndim) if i not in idx)
        m = self.joint.sum(axis=drop)
        kept_sorted = sorted(idx)
        return np.transpose(m, [kept_sorted.index(i) for i in idx])

    def __repr__(self):
        sizes = ", ".join(f"{a}={len(self.alphabet(a))}" for a in self.axes)
        return f"DiscreteModel({sizes})"


@dataclass(frozen=True)
class Diagnostics:
    ok: bool
    total_mass: float
    mass_deviation: float
    min_entry: float
    support: dict
    errors: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "total_mass": self.total_mass,
            "mass_deviation": self.mass_deviation,
            "min_entry": self.min_entry,
            "support": dict(self.support),
            "errors": list(self.errors),
        }


def validate(model: DiscreteModel) -> Diagnostics:
    """Check a model against its invariants without modifying it."""
    j = model.joint
    total = float(j.sum())
    min_entry = float(j.min())
    errors = []
    if min_entry <= -CLAMP:
        errors.append("NegativeProbability")
    if abs(total - 1.0) > EPS_P:
        errors.append("RowNotNormalized")
    clamped = np.where(j < 0, 0.0, j)
    support = {}
    for i, a in enumerate(model.axes):
        m = clamped.sum(axis=tuple(k for k in range(j.ndim) if k != i))
        support[a] = int(np.count_nonzero(m > 0))
    return Diagnostics(not errors, total, abs(total - 1.0), min_entry, support, tuple(errors))


def _clean(arr: np.ndarray, what: str) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise NegativeProbability(f"{what} has non-finite entries")
    low = arr.min() if arr.size else 0.0
    if low <= -CLAMP:
        raise NegativeProbability(f"{what} has entry {low!r} < 0")
    arr[arr < 0] = 0.0
    return arr


def from_joint(theta, x1, x2, joint, w=None) -> DiscreteModel:
    """Checked model from a full joint tensor (flat row-major or shaped)."""
    m = DiscreteModel(theta, x1, x2, joint, w)
    arr = _clean(m.joint, "joint")
    total = arr.sum()
    if abs(total - 1.0) > EPS_P:
        raise RowNotNormalized(f"joint mass is {total!r}, expected 1")
    return DiscreteModel(m.theta, m.x1, m.x2, arr, m.w)


def _parse_kernel_key(key: str) -> tuple[str, tuple[str, ...]]:
    child, _, parents = key.partition("|")
    child = axis_name(child.strip())
    plist = tuple(axis_name(p.strip()) for p in parents.split(",") if p.strip())
    if child in plist:
        raise AlphabetMismatch(f"kernel {key!r} conditions on its own child")
    return child, plist


def build_model(
    theta: AlphabetLike,
    x1: AlphabetLike,
    x2: AlphabetLike,
    *,
    prior=None,
    kernels: Mapping[str, object] | None = None,
    joint=None,
    w: AlphabetLike | None = None,
) -> DiscreteModel:
    """Build a checked model from a joint tensor or from a prior and kernels.

    ``kernels`` maps keys like ``"x1|theta"``, ``"w|theta"``, ``"x2|w"`` or
    ``"x1|theta,w"`` to arrays indexed ``(parents..., child)`` with parents in
    canonical axis order. Every axis other than ``theta`` needs exactly one
    kernel. Each conditional row must sum to 1.
    """
    if joint is not None:
        if prior is not None or kernels:
            raise AlphabetMismatch("give either a joint tensor or prior+kernels, not both")
        return from_joint(theta, x1, x2, joint, w)
    if prior is None or kernels is None:
        raise AlphabetMismatch("prior and kernels are required when no joint is given")

    alph = {"theta": Alphabet.of(theta), "x1": Alphabet.of(x1), "x2": Alphabet.of(x2)}
    if w is not None:
        alph["w"] = Alphabet.of(w)
    axes = tuple(a for a in AXES if a in alph)

    pri = _clean(prior.probs if isinstance(prior, PmfTable) else prior, "prior")
    if pri.shape != (len(alph["theta"]),):
        raise AlphabetMismatch(f"prior has shape {pri.shape}, theta has {len(alph['theta'])} symbols")
    if abs(pri.sum() - 1.0) > EPS_P:
        raise RowNotNormalized(f"prior sums to {pri.sum()!r}")

    shape = tuple(len(alph[a]) for a in axes)
    out = pri.reshape((-1,) + (1,) * (len(axes) - 1))
    seen = set()
    for key, table in kernels.items():
        child, parents = _parse_kernel_key(key)
        if child not in alph or any(p not in alph for p in parents):
            raise AlphabetMismatch(f"kernel {key!r} references a missing axis")
        if child in seen:
            raise AlphabetMismatch(f"two kernels for {child}")
        seen.add(child)
        ordered = sorted(parents, key=axes.index)
        if list(parents) != ordered:
            raise AlphabetMismatch(f"kernel {key!r}: parents must be in axis order {ordered}")
        t = _clean(table, f"kernel {key}")
        want = tuple(len(alph[p]) for p in parents) + (len(alph[child]),)
        if t.shape != want:
            raise AlphabetMismatch(f"kernel {key!r} has shape {t.shape}, expected {want}")
        rows = t.sum(axis=-1)
        bad = np.abs(rows - 1.0) > EPS_P
        if np.any(bad):
            where = tuple(int(i) for i in np.argwhere(bad)[0])
            raise RowNotNormalized(f"kernel {key!r} row {where} sums to {rows[bad].flat[0]!r}")
        dims = parents + (child,)
        perm = sorted(range(len(dims)), key=lambda i: axes.index(dims[i]))
        t = np.transpose(t, perm)
        sorted_dims = [dims[i] for i in perm]
        bshape = [len(alph[a]) if a in sorted_dims else 1 for a in axes]
        out = out * t.reshape(bshape)
    missing = set(axes) - {"theta"} - seen
    if missing:
        raise AlphabetMismatch(f"no kernel for axes {sorted(missing)}")
    out = np.broadcast_to(out, shape)
    return from_joint(alph["theta"], alph["x1"], alph["x2"], out, alph.get("w"))


@dataclass(frozen=True, eq=False)
class PmfTable:
    variables: tuple[str, ...]
    alphabets: tuple[Alphabet, ...]
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _as_readonly(self.probs))

    def __getitem__(self, labels):
        if not isinstance(labels, tuple):
            labels = (labels,)
        idx = tuple(a.index(l) for a, l in zip(self.alphabets, labels))
        return float(self.probs[idx])

    def as_dict(self) -> dict:
        return {
            "variables": list(self.variables),
            "alphabets": [list(a.labels) for a in self.alphabets],
            "probs": self.probs.ravel().tolist(),
        }


def marginal(model: DiscreteModel, axes: Sequence) -> PmfTable:
    """Marginal pmf over the kept ``axes``."""
    names = [axis_name(a) for a in axes]
    if not names:
        raise EmptySubset("marginal needs at least one axis to keep")
    return PmfTable(tuple(names), tuple(model.alphabet(a) for a in names), model.sum_over(names))


def conditional(model: DiscreteModel, target: Sequence, given: Mapping) -> PmfTable:
    """``p(target | given)`` where ``given`` maps axis names to symbols."""
    tnames = [axis_name(a) for a in target]
    gnames = {axis_name(k): v for k, v in given.items()}
    if not tnames:
        raise EmptySubset("conditional needs a target axis")
    if set(tnames) & set(gnames):
        raise AlphabetMismatch("target and conditioning axes overlap")
    keep = tnames + list(gnames)
    arr = model.sum_over(keep)
    sel = (slice(None),) * len(tnames) + tuple(model.alphabet(a).index(v) for a, v in gnames.items())
    slab = arr[sel]
    mass = slab.sum()
    if mass <= 0:
        raise NullConditioningEvent(f"p({given}) = 0")
    return PmfTable(tuple(tnames), tuple(model.alphabet(a) for a in tnames), slab / mass)


@dataclass(frozen=True, eq=False)
class Statistic:
    """Total map from one axis's alphabet onto a statistic alphabet.

    ``codes[i]`` is the codomain index of domain symbol ``i``. Codomains are
    always canonical: attained values ordered by first occurrence.
    """

    side: str
    domain: Alphabet
    codes: tuple[int, ...]
    labels: Alphabet = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "side", axis_name(self.side))
        object.__setattr__(self, "domain", Alphabet.of(self.domain))
        raw = [int(c) for c in self.codes]
        if len(raw) != len(self.domain):
            raise AlphabetMismatch(f"statistic maps {len(raw)} symbols, domain has {len(self.domain)}")
        order: dict[int, int] = {}
        codes = tuple(order.setdefault(c, len(order)) for c in raw)
        if self.labels is None:
            labels = tuple(str(i) for i in range(len(order)))
        else:
            given = tuple(Alphabet.of(self.labels).labels)
            by_old = sorted(order, key=order.get)
            try:
                labels = tuple(given[c] for c in by_old)
            except IndexError:
                raise AlphabetMismatch("statistic code outside its label set") from None
        object.__setattr__(self, "codes", codes)
        object.__setattr__(self, "labels", Alphabet(labels))

    @classmethod
    def from_map(cls, side, domain: AlphabetLike, mapping: Mapping) -> "Statistic":
        domain = Alphabet.of(domain)
        keys = {str(k) for k in mapping}
        if keys != set(domain.labels):
            missing = set(domain.labels) - keys
            extra = keys - set(domain.labels)
            raise AlphabetMismatch(f"statistic map mismatch: missing {sorted(missing)}, extra {sorted(extra)}")
        m = {str(k): str(v) for k, v in mapping.items()}
        images: list[str] = []
        for s in domain.labels:
            if m[s] not in images:
                images.append(m[s])
        return cls(side, domain, tuple(images.index(m[s]) for s in domain.labels), tuple(images))

    @classmethod
    def identity(cls, side, domain: AlphabetLike) -> "Statistic":
        domain = Alphabet.of(domain)
        return cls(side, domain, tuple(range(len(domain))), domain.labels)

    @classmethod
    def constant(cls, side, domain: AlphabetLike, label: str = "*") -> "Statistic":
        domain = Alphabet.of(domain)
        return cls(side, domain, (0,) * len(domain), (label,))

    @classmethod
    def from_blocks(cls, side, domain: AlphabetLike, blocks: Iterable[Iterable]) -> "Statistic":
        """Statistic whose cells are the given blocks of domain labels."""
        domain = Alphabet.of(domain)
        codes = [-1] * len(domain)
        for b, block in enumerate(blocks):
            for s in block:
                codes[domain.index(s)] = b
        if -1 in codes:
            raise AlphabetMismatch("blocks do not cover the domain")
        return cls(side, domain, tuple(codes))

    @property
    def size(self) -> int:
        return len(self.labels)

    def __call__(self, symbol) -> str:
        return self.labels.labels[self.codes[self.domain.index(symbol)]]

    def matrix(self) -> np.ndarray:
        """One-hot ``(|domain|, |codomain|)`` pushforward matrix."""
        return one_hot(self.codes, self.size)

    def then(self, outer: "Statistic") -> "Statistic":
        """The composition ``outer ∘ self``."""
        if outer.domain != self.labels:
            raise AlphabetMismatch("outer statistic domain must equal this statistic's codomain")
        return Statistic(self.side, self.domain, tuple(outer.codes[c] for c in self.codes), outer.labels)

    def blocks(self) -> list[list[str]]:
        out: list[list[str]] = [[] for _ in range(self.size)]
        for s, c in zip(self.domain.labels, self.codes):
            out[c].append(s)
        return out

    def to_map(self) -> dict:
        return {s: self.labels.labels[c] for s, c in zip(self.domain.labels, self.codes)}

    def as_dict(self) -> dict:
        return {"side": self.side, "map": self.to_map()}

    def __repr__(self):
        return f"Statistic({self.side}: {self.blocks()})"


@dataclass(frozen=True, eq=False)
class CostMatrix:
    """``d[theta, estimate]``; rows follow ``theta``, columns ``estimates``."""

    theta: Alphabet
    estimates: Alphabet
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "theta", Alphabet.of(self.theta))
        object.__setattr__(self, "estimates", Alphabet.of(self.estimates))
        m = _as_readonly(self.matrix)
        if m.shape != (len(self.theta), len(self.estimates)):
            raise AlphabetMismatch(f"cost matrix shape {m.shape} does not match alphabets")
        if np.any(m < 0) or not np.all(np.isfinite(m)):
            raise NegativeProbability("cost entries must be finite and nonnegative")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def zero_one(cls, theta: AlphabetLike, estimates: AlphabetLike | None = None) -> "CostMatrix":
        theta = Alphabet.of(theta)
        est = theta if estimates is None else Alphabet.of(estimates)
        m = np.array([[0.0 if t == e else 1.0 for e in est.labels] for t in theta.labels])
        return cls(theta, est, m)

    @classmethod
    def quadratic(cls, theta: AlphabetLike, estimates: AlphabetLike | None = None) -> "CostMatrix":
        """Squared error between numeric labels."""
        theta = Alphabet.of(theta)
        est = theta if estimates is None else Alphabet.of(estimates)
        tv = np.array([float(t) for t in theta.labels])
        ev = np.array([float(e) for e in est.labels])
        return cls(theta, est, (tv[:, None] - ev[None, :]) ** 2)

    @classmethod
    def zeros(cls, theta: AlphabetLike, estimates: AlphabetLike | None = None) -> "CostMatrix":
        theta = Alphabet.of(theta)
        est = theta if estimates is None else Alphabet.of(estimates)
        return cls(theta, est, np.zeros((len(theta), len(est))))

    def as_dict(self) -> dict:
        return {"estimates": list(self.estimates.labels), "matrix": self.matrix.tolist()}


def _check_stat(model: DiscreteModel, stat: Statistic, side: str | None = None):
    if side is not None and stat.side != side:
        raise AlphabetMismatch(f"statistic is on {stat.side}, expected {side}")
    if stat.domain != model.alphabet(stat.side):
        raise AlphabetMismatch(f"statistic domain {stat.domain.labels} != model {stat.side} alphabet")


def pushforward(model: DiscreteModel, stat: Statistic) -> DiscreteModel:
    """Replace one axis by the statistic's codomain, summing merged cells."""
    _check_stat(model, stat)
    ax = model.axis_index(stat.side)
    moved = np.moveaxis(model.joint, ax, -1) @ stat.matrix()
    joint = np.moveaxis(moved, -1, ax)
    kw = {a: model.alphabet(a) for a in model.axes}
    kw[stat.side] = stat.labels
    return DiscreteModel(kw["theta"], kw["x1"], kw["x2"], joint, kw.get("w"))


def induced_model(model: DiscreteModel, t1: Statistic, t2: Statistic) -> DiscreteModel:
    """Model over ``(theta [, w], T1(x1), T2(x2))``."""
    _check_stat(model, t1, "x1")
    _check_stat(model, t2, "x2")
    return pushforward(pushforward(model, t1), t2)
