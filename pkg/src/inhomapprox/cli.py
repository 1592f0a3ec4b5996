"""Command-line runner: ``inhomapprox <subcommand> --config cfg.json``.

Each run validates its config, materializes defaults, computes, and prints a
JSON summary (resolved config, aggregate results, optional checks) to
stdout.  ``--out PATH`` additionally writes the result table as CSV to PATH
and the summary next to it as ``PATH.json``.  Exit codes: 0 success, 2
invalid config, 3 budget exceeded, 4 a ``--check`` rule failed.
"""
from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import os
import sys
from pathlib import Path
from typing import Any

import numpy as np

from .errors import BudgetExceeded, InhomApproxError, ValidationError
from .experiments import (ExperimentSetup, counting_ratio_experiment, finiteness_experiment, siegel_constant,
                          torus_siegel_mean_test, uniform_experiment)
from .forms import CoordinateMax, CoordinateProduct, parse_form
from .geometry import Region, VolumeEstimate, mc_volume, volume_max_closed_form, volume_product_closed_form
from .lattice import DEFAULT_CAP, annulus_blocks, parse_point_set
from .norms import parse_norm
from .psi import asymptotic_criterion, parse_family, parse_psi, uniform_series_criterion

EXIT_OK, EXIT_INVALID, EXIT_BUDGET, EXIT_CHECK = 0, 2, 3, 4
SUBCOMMANDS = ("enumerate", "volume", "criterion", "count", "finiteness", "uniform", "siegel-test")

COMMON_DEFAULTS = {"seed": 0, "cap": DEFAULT_CAP, "check": {}}
SETUP_DEFAULTS = {"xi": [0.0], "norm": "euclidean", "point_set": "nonzero", "group": "SLn", "g_samples": 4}
DEFAULTS: dict[str, dict[str, Any]] = {
    "enumerate": {"norm": "sup", "point_set": "nonzero", "S": 0.0},
    "volume": {"xi": [0.0], "norm": "euclidean", "S": 0.0, "method": "mc", "samples": 1 << 20},
    "criterion": {"xi": [0.0], "kind": "asymptotic", "r": 2.0, "family": None},
    "count": {**SETUP_DEFAULTS, "T_schedule": [40, 80, 160], "mc_samples": 1 << 22},
    "finiteness": {**SETUP_DEFAULTS, "T_max": 300.0},
    "uniform": {**SETUP_DEFAULTS, "k_range": [4, 11]},
    "siegel-test": {"samples": 100_000, "constant": None},
}
REQUIRED = {
    "enumerate": ("n", "T"),
    "volume": ("form", "T"),
    "criterion": ("form", "psi"),
    "count": ("form", "psi"),
    "finiteness": ("form", "psi"),
    "uniform": ("form", "psi"),
    "siegel-test": ("lo", "hi"),
}


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("THREADS", os.cpu_count() or 1)))
    except ValueError:
        raise ValidationError("THREADS must be an integer") from None


def resolve_config(command: str, raw: dict, seed: int | None = None) -> dict:
    """Materialize defaults and validate presence of required fields."""
    if "experiment" in raw and raw["experiment"] != command:
        raise ValidationError(f"config is for {raw['experiment']!r}, not {command!r}")
    cfg = {**COMMON_DEFAULTS, **copy.deepcopy(DEFAULTS[command]), **copy.deepcopy(raw)}
    cfg["experiment"] = command
    if seed is not None:
        cfg["seed"] = seed
    missing = [k for k in REQUIRED[command] if k not in cfg]
    if missing:
        raise ValidationError(f"{command} config is missing {', '.join(missing)}")
    if not isinstance(cfg["seed"], int) or cfg["seed"] < 0:
        raise ValidationError("seed must be a non-negative integer")
    return cfg


def _form(cfg: dict):
    spec = dict(cfg["form"])
    if "n" in cfg and "n" not in spec:
        spec["n"] = cfg["n"]
    form = parse_form(spec)
    if "n" in cfg and form.n != cfg["n"]:
        raise ValidationError(f"form dimension {form.n} does not match n={cfg['n']}")
    return form


def _setup(cfg: dict) -> ExperimentSetup:
    return ExperimentSetup(_form(cfg), cfg["xi"], parse_psi(cfg["psi"]), parse_norm(cfg["norm"]),
                           parse_point_set(cfg["point_set"]), cfg["group"])


# -- handlers: each returns (header, rows, result, checks) ------------------------


def run_enumerate(cfg):
    ps, nu = parse_point_set(cfg["point_set"]), parse_norm(cfg["norm"])
    n = int(cfg["n"])
    rows = [list(map(int, v)) for block in annulus_blocks(ps, nu, n, float(cfg["S"]), float(cfg["T"]), cfg["cap"])
            for v in block]
    checks = {}
    if "expect_count" in cfg["check"]:
        checks["expect_count"] = len(rows) == cfg["check"]["expect_count"]
    return [f"x{i + 1}" for i in range(n)], rows, {"count": len(rows)}, checks


def run_volume(cfg):
    form = _form(cfg)
    psi = parse_psi(cfg["psi"]) if "psi" in cfg else None
    eps = cfg.get("eps")
    method = cfg["method"]
    S, T = float(cfg["S"]), float(cfg["T"])
    if method == "product_closed_form":
        if not isinstance(form, CoordinateProduct) or psi is None:
            raise ValidationError("product closed form needs a coordinate product form and a psi")
        est = VolumeEstimate(volume_product_closed_form(form.n, psi, S, T))
    elif method == "max_closed_form":
        if not isinstance(form, CoordinateMax) or psi is None:
            raise ValidationError("max closed form needs a coordinate max form and a psi")
        est = VolumeEstimate(volume_max_closed_form(form.n, form.p, form.z, psi, S, T))
    elif method == "mc":
        nu = parse_norm(cfg["norm"])
        ball = parse_norm(cfg["ball"]) if "ball" in cfg else None
        region = Region(form, cfg["xi"], nu, psi=psi, eps=eps, S=S, T=T, ball=ball)
        est = mc_volume(region, int(cfg["samples"]), cfg["seed"])
    else:
        raise ValidationError(f"unknown volume method {method!r}")
    result = {**est.to_dict(), "seed": cfg["seed"]}
    checks = {}
    if "expect" in cfg["check"]:
        rtol = cfg["check"].get("rtol", 0.02)
        checks["expect"] = abs(est.value - cfg["check"]["expect"]) <= rtol * abs(cfg["check"]["expect"])
    return None, [], result, checks


def run_criterion(cfg):
    form, psi = _form(cfg), parse_psi(cfg["psi"])
    family = parse_family(cfg["family"]) if cfg["family"] else None
    if cfg["kind"] == "asymptotic":
        v = asymptotic_criterion(form, psi, cfg["xi"], family)
    elif cfg["kind"] == "uniform":
        v = uniform_series_criterion(form, psi, cfg["xi"], float(cfg["r"]), family)
    else:
        raise ValidationError(f"criterion kind must be 'asymptotic' or 'uniform', got {cfg['kind']!r}")
    result = {"verdict": v.value.value, "family": v.family.value, "xi_branch": v.xi_branch,
              "exponents": [str(e) for e in v.exponents]}
    checks = {}
    if "expect" in cfg["check"]:
        checks["expect"] = result["verdict"] == cfg["check"]["expect"]
    return None, [], result, checks


def _median(xs):
    return float(np.median(xs)) if len(xs) else math.nan


def run_count(cfg):
    recs = counting_ratio_experiment(_setup(cfg), cfg["T_schedule"], int(cfg["g_samples"]), cfg["seed"],
                                     int(cfg["mc_samples"]), cfg["cap"], thread_count())
    header = ["g_id", "seed", "T", "count", "predicted", "ratio"]
    rows = [[r.g_id, r.seed, r.T, r.count, r.predicted, "" if r.ratio is None else r.ratio] for r in recs]
    by_t: dict[float, list[float]] = {}
    for r in recs:
        if r.defined:
            by_t.setdefault(r.T, []).append(r.ratio)
    ts = sorted(by_t)
    result = {"median_ratio": {str(t): _median(by_t[t]) for t in ts},
              "median_abs_deviation": {str(t): _median(np.abs(np.array(by_t[t]) - 1)) for t in ts}}
    checks = {}
    if ts and "ratio_band" in cfg["check"]:
        lo, hi = cfg["check"]["ratio_band"]
        checks["ratio_band"] = lo <= _median(by_t[ts[-1]]) <= hi
    if len(ts) > 1 and cfg["check"].get("improves"):
        dev = result["median_abs_deviation"]
        checks["improves"] = dev[str(ts[-1])] < dev[str(ts[0])]
    plot = [[r.g_id, r.T, "" if r.ratio is None else r.ratio] for r in recs]
    return header, rows, result, checks, (["g_id", "T", "ratio"], plot)


def run_finiteness(cfg):
    recs = finiteness_experiment(_setup(cfg), float(cfg["T_max"]), int(cfg["g_samples"]), cfg["seed"],
                                 cfg["cap"], thread_count())
    T = float(cfg["T_max"])
    header = ["g_id", "seed", "T", "count", "predicted", "ratio"]
    rows = []
    for r in recs:
        rows.append([r.g_id, r.seed, T / 2, r.count_half, "", ""])
        rows.append([r.g_id, r.seed, T, r.count_full, "", ""])
    result = {"stabilized": [r.stabilized for r in recs], "stabilized_count": sum(r.stabilized for r in recs)}
    checks = {}
    if "min_stabilized" in cfg["check"]:
        checks["min_stabilized"] = result["stabilized_count"] >= cfg["check"]["min_stabilized"]
    return header, rows, result, checks, (["g_id", "T", "count"], [[row[0], row[2], row[3]] for row in rows])


def run_uniform(cfg):
    lo, hi = cfg["k_range"]
    recs = uniform_experiment(_setup(cfg), range(int(lo), int(hi) + 1), int(cfg["g_samples"]), cfg["seed"],
                              cfg["cap"], thread_count())
    header = ["g_id", "seed", "k", "nonempty", "witness"]
    rows = [[r.g_id, r.seed, r.k, int(r.nonempty), "" if r.witness is None else " ".join(map(str, r.witness))]
            for r in recs]
    empty = sorted({r.k for r in recs if not r.nonempty})
    result = {"empty_k": empty}
    checks = {}
    if "k0" in cfg["check"]:
        checks["k0"] = all(r.nonempty for r in recs if r.k >= cfg["check"]["k0"])
    return header, rows, result, checks, (["g_id", "k", "nonempty"], [row[:1] + row[2:4] for row in rows])


def run_siegel(cfg):
    res = torus_siegel_mean_test(cfg["lo"], cfg["hi"], int(cfg["samples"]), cfg["seed"])
    result = {"empirical_mean": res.empirical_mean, "volume": res.volume, "stderr": res.stderr,
              "z_score": res.z_score}
    if cfg["constant"]:
        c = cfg["constant"]
        result["siegel_constant"] = siegel_constant(parse_point_set(c["point_set"]), int(c["n"]), c["group"])
    checks = {"z_score": abs(res.z_score) <= cfg["check"].get("max_abs_z", 3.0)}
    return None, [], result, checks


HANDLERS = {"enumerate": run_enumerate, "volume": run_volume, "criterion": run_criterion, "count": run_count,
            "finiteness": run_finiteness, "uniform": run_uniform, "siegel-test": run_siegel}


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="inhomapprox", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=SUBCOMMANDS)
    parser.add_argument("--config", type=Path, help="JSON config file")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--check", action="store_true", help="evaluate the config's check rules; exit 4 on failure")
    parser.add_argument("--plot-data", type=Path, help="write the plotted series as CSV")
    parser.add_argument("--out", type=Path, help="write the result table as CSV (and PATH.json)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = json.loads(args.config.read_text()) if args.config else {}
        if not isinstance(raw, dict):
            raise ValidationError("config must be a JSON object")
        cfg = resolve_config(args.command, raw, args.seed)
        out = HANDLERS[args.command](cfg)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InhomApproxError, ValueError, KeyError, TypeError, json.JSONDecodeError, OSError) as exc:
        msg = f"missing field {exc}" if isinstance(exc, KeyError) else str(exc)
        print(f"invalid config: {msg}", file=sys.stderr)
        return EXIT_INVALID
    header, rows, result, checks = out[:4]
    plot = out[4] if len(out) > 4 else None
    summary = {"experiment": args.command, "config": cfg, "result": result}
    if args.check:
        summary["checks"] = checks
        summary["passed"] = all(checks.values())
    text = json.dumps(summary, indent=2, sort_keys=True, default=_json_default) + "\n"
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        if header is not None:
            args.out.write_text(_csv_text(header, rows))
        Path(str(args.out) + ".json").write_text(text)
    if args.plot_data and plot is not None:
        args.plot_data.parent.mkdir(parents=True, exist_ok=True)
        args.plot_data.write_text(_csv_text(*plot))
    sys.stdout.write(text)
    if args.check and not summary["passed"]:
        return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
