"""Command-line entry point ``suffquant``.

Every subcommand prints (or writes with ``--out``) one JSON report::

    {"schema_version": "1", "invocation": {...}, "results": {...}, "timing_ms": N}

Exit status is 0 on success, 1 when a check fails (the report is still
written) and 2 on usage or input errors (nothing is written).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import NegativeProbability, RowNotNormalized, SuffQuantError
from .model import DiscreteModel, axis_name, validate
from .modelfile import ModelFileError, load_model, read_text
from .pbpo import pbpo_best
from .quantizer import DEFAULT_BUDGET, exhaustive_search
from .scenarios import GaussianParams, SensingParams, scenario_report, write_csv
from .sufficiency import (
    check_hci,
    conditional_independence,
    factorization_check,
    hci_from_factorization,
    is_global_sufficient,
    minimal_sufficient,
    posterior_match,
)
from .verify import SUITES, theorem_suite

SCHEMA_VERSION = "1"


class UsageError(Exception):
    pass


def _jsonable(o):
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, default=_jsonable) + "\n"


def _atomic_write(path: str, text: str) -> None:
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or Path("."), prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _levels(text: str) -> tuple[int, int]:
    try:
        parts = [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"levels must be integers, got {text!r}") from None
    if len(parts) == 1:
        parts = parts * 2
    if len(parts) != 2 or min(parts) < 1:
        raise argparse.ArgumentTypeError("levels must be L or L1,L2 with L >= 1")
    return parts[0], parts[1]


def _axes(text: str) -> tuple[str, ...]:
    if not text:
        return ()
    try:
        return tuple(axis_name(a.strip()) for a in text.split(","))
    except SuffQuantError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _load(args):
    try:
        return load_model(args.model)
    except (OSError, FileNotFoundError) as exc:
        raise UsageError(f"cannot read {args.model}: {exc}") from None


# each command returns (results, passed)


def cmd_validate(args):
    try:
        mf = _load(args)
    except (NegativeProbability, RowNotNormalized) as exc:
        res = _lenient_diagnostics(args.model)
        if res is None:
            res = {"ok": False, "errors": [type(exc).__name__], "message": str(exc)}
        return res, False
    d = validate(mf.model)
    res = d.as_dict()
    res["axes"] = {a: list(mf.model.alphabet(a).labels) for a in mf.model.axes}
    res["statistics"] = sorted(mf.statistics)
    return res, d.ok


def _lenient_diagnostics(path: str):
    """Diagnostics for a flat-joint file that fails the strict loader."""
    obj = json.loads(read_text(path))
    if "joint" not in obj:
        return None
    m = DiscreteModel(obj["theta"], obj["x1"], obj["x2"], obj["joint"], obj.get("w"))
    return validate(m).as_dict()


def cmd_suff(args):
    mf = _load(args)
    names = [n.strip() for n in args.stat.split(",")]
    if len(names) == 1:
        rep = posterior_match(mf.model, mf.statistic(names[0]), args.target, args.tol)
        res = {"mode": "local", "statistic": names[0], "target": args.target}
    elif len(names) == 2:
        rep = is_global_sufficient(mf.model, mf.statistic(names[0]), mf.statistic(names[1]), args.target, args.tol)
        res = {"mode": "global", "statistics": names, "target": args.target}
    else:
        raise UsageError("--stat takes NAME or NAME1,NAME2")
    res.update(rep.as_dict())
    return res, rep.holds


def cmd_minimal(args):
    mf = _load(args)
    t = minimal_sufficient(mf.model, args.side, args.target, args.tol)
    return {"side": t.side, "target": args.target, "size": t.size, "blocks": t.blocks(), "statistic": t.as_dict()}, True


def cmd_ci(args):
    mf = _load(args)
    rep = conditional_independence(mf.model, args.a, args.b, args.given, args.tol)
    res = {"a": list(args.a), "b": list(args.b), "given": list(args.given)}
    res.update(rep.as_dict())
    return res, rep.holds


def cmd_hci(args):
    mf = _load(args)
    rep = check_hci(mf.model, args.tol)
    return rep.as_dict(), rep.valid


def cmd_factorize(args):
    mf = _load(args)
    t1 = mf.statistic(args.stat)
    rep, witness = factorization_check(mf.model, t1, args.tol)
    res = {"statistic": args.stat}
    res.update(rep.as_dict())
    if witness is not None:
        res["g"] = witness.g.tolist()
        res["hci_valid"] = hci_from_factorization(mf.model, t1, args.tol).report.valid
    return res, rep.holds


def cmd_search(args):
    mf = _load(args)
    l1, l2 = args.levels
    if args.domain == "raw":
        domain = "raw"
    elif args.domain.startswith("stat:"):
        names = args.domain[5:].split(",")
        if len(names) != 2:
            raise UsageError("--domain stat: needs two statistic names, e.g. stat:T1,T2")
        domain = (mf.statistic(names[0]), mf.statistic(names[1]))
    else:
        raise UsageError(f"--domain must be raw or stat:T1,T2, got {args.domain!r}")
    return exhaustive_search(mf.model, mf.cost, l1, l2, domain, args.budget).as_dict(), True


def cmd_pbpo(args):
    mf = _load(args)
    l1, l2 = args.levels
    d = pbpo_best(mf.model, mf.cost, l1, l2, args.restarts, args.seed, args.tol, args.max_iter)
    return d.as_dict(), True


def cmd_suite(args):
    sizes = {k: v for k, v in (("theta", args.max_theta), ("x", args.max_x), ("w", args.max_w)) if v is not None}
    rep = theorem_suite(args.id, args.trials, args.seed, sizes, args.L, args.cost)
    print(rep.summary_line(), file=sys.stderr)
    res = rep.as_dict()
    res["summary"] = rep.summary()
    return res, rep.ok


SCENARIO_KEYS = {
    "gaussian": {"n", "rho"},
    "sensing": {"K", "constellation", "prior_h1", "fading_var", "noise_var"},
}
RUN_KEYS = {"samples", "bins", "levels", "restarts", "seed"}


def cmd_scenario(args):
    cfg: dict = {}
    if args.config:
        try:
            cfg = json.loads(read_text(args.config))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        bad = set(cfg) - SCENARIO_KEYS[args.name] - RUN_KEYS
        if bad:
            raise UsageError(f"unknown config keys: {sorted(bad)}")
    if args.name == "gaussian":
        pkw = {k: cfg[k] for k in SCENARIO_KEYS["gaussian"] if k in cfg}
        for k in ("n", "rho"):
            if getattr(args, k) is not None:
                pkw[k] = getattr(args, k)
        params = GaussianParams(**pkw)
    else:
        pkw = {k: cfg[k] for k in SCENARIO_KEYS["sensing"] if k in cfg}
        for k in ("K", "prior_h1", "fading_var", "noise_var"):
            if getattr(args, k) is not None:
                pkw[k] = getattr(args, k)
        params = SensingParams(**pkw)
    run = {k: cfg[k] for k in RUN_KEYS if k in cfg}
    for k in RUN_KEYS:
        v = getattr(args, k)
        if v is not None:
            run[k] = v
    run.setdefault("seed", 0)
    args.seed = run["seed"]
    rep = scenario_report(args.name, params, csv_limit=args.csv_limit if args.csv else 0, **run)
    if args.csv:
        fd, tmp = tempfile.mkstemp(dir=Path(args.csv).parent or Path("."), suffix=".tmp")
        os.close(fd)
        try:
            write_csv(tmp, rep.csv_rows)
            os.replace(tmp, args.csv)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)
    r = rep.results
    ordered = r["sufficient"]["risk"] <= r["alternative"]["risk"] + 3 * r["difference"]["combined_se"]
    r["risk_ordering_holds"] = bool(ordered)
    return r, ordered


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="suffquant", description="Sufficiency and quantizer design for two-sensor inference.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the JSON report here (atomic rename) instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def model_cmd(name, func, help_, tol=True):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("model", help="model file path or fixture:NAME")
        if tol:
            sp.add_argument("--tol", type=float, default=1e-9)
        sp.set_defaults(func=func)
        return sp

    model_cmd("validate", cmd_validate, "check a model file", tol=False)
    sp = model_cmd("suff", cmd_suff, "local (NAME) or global (NAME1,NAME2) sufficiency")
    sp.add_argument("--stat", required=True)
    sp.add_argument("--target", default="theta", choices=["theta", "w"])
    sp = model_cmd("minimal", cmd_minimal, "minimal sufficient partition of one side")
    sp.add_argument("--side", required=True, type=int, choices=[1, 2])
    sp.add_argument("--target", default="theta", choices=["theta", "w"])
    sp = model_cmd("ci", cmd_ci, "conditional independence a ⟂ b | given")
    sp.add_argument("--a", required=True, type=_axes)
    sp.add_argument("--b", required=True, type=_axes)
    sp.add_argument("--given", default=(), type=_axes)
    model_cmd("hci", cmd_hci, "check both chains of the hidden-variable model")
    sp = model_cmd("factorize", cmd_factorize, "factorization check for a side-1 statistic")
    sp.add_argument("--stat", required=True)
    sp = model_cmd("search", cmd_search, "exhaustive quantizer search", tol=False)
    sp.add_argument("--levels", type=_levels, default=(2, 2))
    sp.add_argument("--domain", default="raw")
    sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    sp = model_cmd("pbpo", cmd_pbpo, "person-by-person design, best of restarts", tol=False)
    sp.add_argument("--levels", type=_levels, default=(2, 2))
    sp.add_argument("--restarts", type=int, default=16)
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--max-iter", type=int, default=100)

    sp = sub.add_parser("suite", parents=[common], help="run a randomized theorem suite")
    sp.add_argument("--id", required=True, choices=sorted(SUITES))
    sp.add_argument("--trials", type=int, default=50)
    sp.add_argument("--L", type=int, default=2)
    sp.add_argument("--cost", default="zero_one", choices=["zero_one", "random"])
    sp.add_argument("--max-theta", type=int)
    sp.add_argument("--max-x", type=int)
    sp.add_argument("--max-w", type=int)
    sp.set_defaults(func=cmd_suite)

    sp = sub.add_parser("scenario", help="Monte Carlo comparison of sufficient and raw statistics")
    sp.add_argument("name", choices=["gaussian", "sensing"])
    sp.add_argument("--out")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--config", help="JSON file with scenario parameters and run settings")
    sp.add_argument("--samples", type=int)
    sp.add_argument("--bins", type=int)
    sp.add_argument("--levels", type=int)
    sp.add_argument("--restarts", type=int)
    sp.add_argument("--n", type=int)
    sp.add_argument("--rho", type=float)
    sp.add_argument("--K", type=int)
    sp.add_argument("--prior-h1", type=float)
    sp.add_argument("--fading-var", type=float)
    sp.add_argument("--noise-var", type=float)
    sp.add_argument("--csv", help="write per-sample statistic, level and estimate rows here")
    sp.add_argument("--csv-limit", type=int, default=10000)
    sp.set_defaults(func=cmd_scenario)
    return p


def _invocation(args) -> dict:
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command", "out")}
    return {"subcommand": args.command, "flags": flags, "seed": flags.get("seed") or 0}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    start = time.perf_counter()
    try:
        results, passed = args.func(args)
    except (UsageError, ModelFileError, OSError, json.JSONDecodeError) as exc:
        print(f"suffquant: error: {exc}", file=sys.stderr)
        return 2
    except (SuffQuantError, ValueError, KeyError) as exc:
        print(f"suffquant: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    report = {
        "schema_version": SCHEMA_VERSION,
        "invocation": _invocation(args),
        "results": results,
        "timing_ms": int(round((time.perf_counter() - start) * 1000)),
    }
    text = dumps(report)
    if args.out:
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0 if passed else 1


def main() -> None:
    sys.exit(run())
