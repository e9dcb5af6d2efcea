"""Reading and writing model files (JSON syntax).

A model file holds alphabets, either a flat row-major ``joint`` in axis
order ``(theta, w, x1, x2)`` or a ``prior`` with ``kernels``, plus an
optional cost and named statistics::

    {"theta": ["0", "1"], "x1": ["a", "b"], "x2": ["c"],
     "joint": [0.4, 0.1, 0.1, 0.4],
     "cost": {"estimates": ["0", "1"], "matrix": [[0, 1], [1, 0]]},
     "statistics": {"T1": {"side": 1, "map": {"a": "s0", "b": "s0"}}}}

A recipe file ``{"recipe": {...}}`` instead describes a seeded random model.
Unknown keys are rejected in both forms.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import AlphabetMismatch
from .model import CostMatrix, DiscreteModel, Statistic, axis_name, build_model
from .verify import ModelRecipe, random_model

MODEL_KEYS = {"theta", "w", "x1", "x2", "joint", "prior", "kernels", "cost", "statistics"}
RECIPE_KEYS = {"kind", "theta", "x1", "x2", "w", "positive", "planted", "seed"}


class ModelFileError(AlphabetMismatch):
    """Malformed model file (bad key, shape or reference)."""


@dataclass(frozen=True, eq=False)
class ModelFile:
    model: DiscreteModel
    cost: CostMatrix
    statistics: dict[str, Statistic] = field(default_factory=dict)
    recipe: ModelRecipe | None = None

    def statistic(self, name: str) -> Statistic:
        try:
            return self.statistics[name]
        except KeyError:
            raise ModelFileError(f"no statistic named {name!r}; file defines {sorted(self.statistics)}") from None


def _reject_unknown(obj: dict, allowed: set, where: str):
    extra = set(obj) - allowed
    if extra:
        raise ModelFileError(f"unknown keys in {where}: {sorted(extra)}")


def _cost(model: DiscreteModel, desc) -> CostMatrix:
    if desc is None:
        return CostMatrix.zero_one(model.theta)
    if not isinstance(desc, dict):
        raise ModelFileError("cost must be an object")
    _reject_unknown(desc, {"estimates", "matrix"}, "cost")
    return CostMatrix(model.theta, desc.get("estimates", list(model.theta.labels)), desc["matrix"])


def _statistics(model: DiscreteModel, desc) -> dict[str, Statistic]:
    out = {}
    for name, s in (desc or {}).items():
        if not isinstance(s, dict):
            raise ModelFileError(f"statistic {name!r} must be an object")
        _reject_unknown(s, {"side", "map"}, f"statistic {name!r}")
        side = axis_name(s["side"])
        out[name] = Statistic.from_map(side, model.alphabet(side), s["map"])
    return out


def parse_model(obj: dict) -> ModelFile:
    """Build a :class:`ModelFile` from a decoded JSON object."""
    if not isinstance(obj, dict):
        raise ModelFileError("model file must hold a JSON object")
    if "recipe" in obj:
        _reject_unknown(obj, {"recipe", "cost", "statistics"}, "recipe file")
        r = obj["recipe"]
        if not isinstance(r, dict):
            raise ModelFileError("recipe must be an object")
        _reject_unknown(r, RECIPE_KEYS, "recipe")
        try:
            recipe = ModelRecipe(**r)
        except (TypeError, ValueError) as exc:
            raise ModelFileError(f"bad recipe: {exc}") from None
        model = random_model(recipe)
        return ModelFile(model, _cost(model, obj.get("cost")), _statistics(model, obj.get("statistics")), recipe)
    _reject_unknown(obj, MODEL_KEYS, "model file")
    for k in ("theta", "x1", "x2"):
        if k not in obj:
            raise ModelFileError(f"model file lacks {k!r}")
    model = build_model(
        obj["theta"],
        obj["x1"],
        obj["x2"],
        prior=obj.get("prior"),
        kernels=obj.get("kernels"),
        joint=obj.get("joint"),
        w=obj.get("w"),
    )
    return ModelFile(model, _cost(model, obj.get("cost")), _statistics(model, obj.get("statistics")))


def fixture_names() -> list[str]:
    return sorted(p.name[: -len(".json")] for p in resources.files("suffquant.fixtures").iterdir() if p.name.endswith(".json"))


def read_text(path: str) -> str:
    """File contents; ``fixture:NAME`` reads a bundled fixture."""
    if path.startswith("fixture:"):
        name = path[len("fixture:"):]
        res = resources.files("suffquant.fixtures") / f"{name}.json"
        if not res.is_file():
            raise FileNotFoundError(f"no bundled fixture {name!r}; available: {fixture_names()}")
        return res.read_text()
    return Path(path).read_text()


def load_model(path: str) -> ModelFile:
    try:
        obj = json.loads(read_text(path))
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"{path}: invalid JSON ({exc})") from None
    return parse_model(obj)


def model_to_dict(model: DiscreteModel, cost: CostMatrix | None = None, statistics: dict | None = None) -> dict:
    """Serialize to the flat-joint form of the model-file schema."""
    out: dict = {"theta": list(model.theta.labels)}
    if model.has_w:
        out["w"] = list(model.w.labels)
    out["x1"] = list(model.x1.labels)
    out["x2"] = list(model.x2.labels)
    out["joint"] = [float(v) for v in model.joint.ravel()]
    if cost is not None:
        out["cost"] = cost.as_dict()
    if statistics:
        out["statistics"] = {
            name: {"side": 1 if s.side == "x1" else 2, "map": s.to_map()} for name, s in statistics.items()
        }
    return out
