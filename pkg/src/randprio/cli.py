"""Batch experiment runner.

    randprio generate    --n 4 --dist uniform:0,1 --seed 7 --output inst.json
    randprio ratio       --n 50,100,200 --trials 2000 --output ratio.csv --detail
    randprio tail        --n 50,100 --dist beta:2,2 --trials 10000
    randprio bounds      --n 100
    randprio adversarial --n 5 --iters 2000 --restarts 4 --output adv.json
    randprio decompose   --input alloc.csv

Exit codes: 0 success, 2 configuration/validation error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import bounds
from .analysis import (RatioNotion, adversarial_search, empirical_tail, ratio_trials,
                       resolve_grid, summarize_ratio)
from .core import Allocation, Instance, Mode, birkhoff_decompose, matrix_from_csv
from .distributions import DistributionSpec, parse_spec, spec_from_dict
from .generators import NonIidGrid, PresetPolicy, gen_iid, gen_non_iid
from .rp import rp_exact

SCHEMA_VERSION = 1
EXECUTION_FIELDS = ("workers", "progress", "output")
COMMANDS = ("generate", "ratio", "tail", "bounds", "adversarial", "decompose")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    n_list: list = field(default_factory=lambda: [50])
    model: dict = field(default_factory=lambda: {"kind": "uniform", "lo": 0.0, "hi": 1.0})
    trials: int = 1000
    rp_samples: int = 1000
    seed: int = 0
    constants: dict = field(default_factory=lambda: bounds.BoundConstants().to_dict())
    notion: str = RatioNotion.EXPECTATION_OF_RATIO.value
    preset_policy: str = PresetPolicy.FIXED_COLUMNS.value
    output: str | None = None
    format: str = "csv"
    detail: bool = False
    progress: bool = False
    workers: int = 1
    iters: int = 2000
    restarts: int = 4
    mode: str = Mode.UNIT_RANGE.value
    input: str | None = None
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def echo(self) -> dict:
        """Fields that determine results; execution knobs are left out so
        outputs do not depend on worker count or destination."""
        return {k: v for k, v in self.to_dict().items() if k not in EXECUTION_FIELDS}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config field(s): {', '.join(sorted(unknown))}")
        if d.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
            raise ConfigError(f"schema_version: expected {SCHEMA_VERSION}, got {d['schema_version']}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    def validate(self) -> None:
        if not self.n_list or any(int(n) < 2 for n in self.n_list):
            raise ConfigError("n_list: must be non-empty with every n >= 2")
        if self.trials < 1:
            raise ConfigError("trials: must be >= 1")
        if self.rp_samples < 1:
            raise ConfigError("rp_samples: must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers: must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed: must be a 64-bit unsigned integer")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format: must be csv or json, got {self.format!r}")
        for name, enum_type in (("notion", RatioNotion), ("preset_policy", PresetPolicy), ("mode", Mode)):
            try:
                enum_type(getattr(self, name))
            except ValueError:
                raise ConfigError(f"{name}: invalid value {getattr(self, name)!r}") from None
        try:
            self.consts()
        except (TypeError, ValueError) as e:
            raise ConfigError(f"constants: {e}") from None
        try:
            self.model_for(int(self.n_list[0]))
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"model: {e}") from None

    def consts(self) -> bounds.BoundConstants:
        return bounds.BoundConstants.from_dict(self.constants)

    def is_grid(self) -> bool:
        return "default" in self.model or "pattern" in self.model

    def model_for(self, n: int) -> DistributionSpec | NonIidGrid:
        if self.is_grid():
            return NonIidGrid.from_dict(self.model, n)
        return spec_from_dict(self.model)


# --- output helpers ---------------------------------------------------------------


def fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def to_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) for x in r])
    return buf.getvalue()


def to_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, newline="")


def sibling(path: str | None, suffix: str, ext: str) -> str | None:
    if path is None:
        return None
    p = Path(path)
    return str(p.with_name(p.stem + suffix + ext))


def table(cfg: ExperimentConfig, header: list[str], rows: list[list]) -> str:
    if cfg.format == "json":
        return to_json({"schema_version": SCHEMA_VERSION, "config": cfg.echo(),
                        "rows": [dict(zip(header, r)) for r in rows]})
    return to_csv(header, rows)


def _progress(cfg: ExperimentConfig, n: int):
    if not cfg.progress:
        return None
    step = max(1, cfg.trials // 10)

    def report(done, total):
        if done % step == 0 or done == total:
            print(f"n={n}: {done}/{total} trials", file=sys.stderr, flush=True)
    return report


def _moments(cfg: ExperimentConfig, n: int):
    """(sum_mu, sum_var, mu, sigma) of the free entries; mu/sigma None for grids."""
    model = cfg.model_for(n)
    grid = resolve_grid(model, n)
    if grid is None:
        mu, var = model.mean(), model.variance()
        return mu * n * (n - 2), var * n * (n - 2), mu, math.sqrt(var)
    return grid.sum_mu(), grid.sum_var(), None, None


def _safe(fn, *args):
    try:
        return fn(*args)
    except bounds.OutsideValidityWindow:
        return "outside validity window"
    except (ValueError, ZeroDivisionError) as e:
        return f"undefined: {e}"


# --- commands -----------------------------------------------------------------------


def cmd_generate(cfg: ExperimentConfig) -> int:
    if cfg.output is None:
        raise ConfigError("output: generate needs an output path")
    n = int(cfg.n_list[0])
    model = cfg.model_for(n)
    policy = PresetPolicy(cfg.preset_policy)
    inst = gen_iid(n, model, policy, cfg.seed) if isinstance(model, DistributionSpec) \
        else gen_non_iid(n, model, policy, cfg.seed)
    emit(inst.to_json() + "\n", cfg.output)
    free = inst.free_values()
    if free.size == 0:
        print(f"warning: n={n} leaves no free entries; every value is preset", file=sys.stderr)
    free_mean = fmt(float(free.mean())) if free.size else "nan"
    print(f"n={n} mode={inst.mode.value} free_entries={free.size} free_mean={free_mean}")
    return 0


RATIO_HEADER = ["n", "notion", "trials", "mean", "stderr", "ci_lo", "ci_hi",
                "bound_1_over_mu", "theorem_finite_bound", "seed"]


def cmd_ratio(cfg: ExperimentConfig) -> int:
    notion = RatioNotion(cfg.notion)
    rows, detail = [], []
    for n in map(int, cfg.n_list):
        model = cfg.model_for(n)
        rt = ratio_trials(model, n, cfg.trials, cfg.rp_samples, cfg.seed, cfg.workers, _progress(cfg, n))
        mean, se = summarize_ratio(rt, notion) if cfg.trials > 1 else (float(rt.ratios[0]), 0.0)
        sum_mu, sum_var, mu, sigma = _moments(cfg, n)
        if mu is not None:
            one_over_mu = 1.0 / mu
            finite = _safe(bounds.theorem2_finite_bound, n, mu, sigma, cfg.consts())
        else:
            one_over_mu = _safe(lambda: n * (n - 2) / sum_mu)
            finite = _safe(bounds.theorem4_finite_bound, n, sum_mu, sum_var, cfg.consts())
        rows.append([n, notion.value, cfg.trials, mean, se, mean - 1.96 * se, mean + 1.96 * se,
                     one_over_mu, finite, cfg.seed])
        detail += [[n, t, float(o), float(p), float(o / p)]
                   for t, (o, p) in enumerate(zip(rt.sw_opt, rt.sw_rp))]
    emit(table(cfg, RATIO_HEADER, rows), cfg.output)
    if cfg.detail:
        text = to_csv(["n", "trial", "sw_opt", "sw_rp", "ratio"], detail)
        emit(text, sibling(cfg.output, "_detail", ".csv"))
    return 0


TAIL_HEADER = ["n", "lambda", "empirical_prob", "theoretical_bound", "trials", "vacuous_flag"]


def cmd_tail(cfg: ExperimentConfig) -> int:
    rows = []
    for n in map(int, cfg.n_list):
        if n < 3:
            raise ConfigError("n_list: tail bounds need n >= 3")
        sum_mu, sum_var, mu, sigma = _moments(cfg, n)
        lam = bounds.lambda_iid(n, mu, sigma) if mu is not None else bounds.lambda_non_iid(n, sum_mu, sum_var)
        rep = empirical_tail(cfg.model_for(n), n, lam, cfg.trials, cfg.rp_samples, cfg.seed,
                             cfg.consts(), cfg.workers, _progress(cfg, n))
        rows.append([n, rep.lam, rep.empirical_prob, rep.theoretical_bound, rep.trials, rep.vacuous])
    emit(table(cfg, TAIL_HEADER, rows), cfg.output)
    return 0


def bounds_report(cfg: ExperimentConfig) -> dict:
    consts = cfg.consts()
    rows = []
    one_over_mu = None
    for n in map(int, cfg.n_list):
        sum_mu, sum_var, mu, sigma = _moments(cfg, n)
        row: dict = {"n": n}
        if mu is not None:
            one_over_mu = 1.0 / mu
            row["lambda"] = _safe(bounds.lambda_iid, n, mu, sigma)
            row["tail_bound"] = _safe(bounds.tail_bound_iid, n, sigma, consts)
            row["berry_esseen_bound"] = _safe(bounds.berry_esseen_bound, cfg.model_for(n), n * (n - 2), consts)
            row["validity_deviation"] = _safe(bounds.validity_deviation, n, mu, sigma)
            row["theorem2_finite_bound"] = _safe(bounds.theorem2_finite_bound, n, mu, sigma, consts)
        else:
            one_over_mu = _safe(lambda: n * (n - 2) / sum_mu)
        row["sum_mu"] = sum_mu
        row["sum_var"] = sum_var
        row["lambda_non_iid"] = _safe(bounds.lambda_non_iid, n, sum_mu, sum_var)
        row["tail_bound_non_iid"] = _safe(bounds.tail_bound_non_iid, n, sum_var, consts)
        row["theorem4_finite_bound"] = _safe(bounds.theorem4_finite_bound, n, sum_mu, sum_var, consts)
        row["one_over_mu"] = one_over_mu
        rows.append(row)
    return {"schema_version": SCHEMA_VERSION, "config": cfg.echo(), "one_over_mu": one_over_mu,
            "constants": consts.to_dict(), "rows": rows}


def cmd_bounds(cfg: ExperimentConfig) -> int:
    emit(to_json(bounds_report(cfg)), cfg.output)
    return 0


def cmd_adversarial(cfg: ExperimentConfig) -> int:
    n = int(cfg.n_list[0])
    if n > 7:
        raise ConfigError(f"n_list: adversarial search needs n <= 7, got {n}")
    res = adversarial_search(n, cfg.iters, cfg.restarts, cfg.seed, Mode(cfg.mode))
    emit(to_json({"schema_version": SCHEMA_VERSION, "config": cfg.echo(), "ratio": res.ratio,
                  "instance": res.instance.to_dict()}), cfg.output)
    trace = to_csv(["restart", "iteration", "best_ratio"], [list(t) for t in res.trace])
    if cfg.output is not None:
        emit(trace, sibling(cfg.output, "_trace", ".csv"))
    print(f"best ratio {fmt(res.ratio)}", file=sys.stderr if cfg.output is None else sys.stdout)
    return 0


def _load_allocation(path: str) -> Allocation:
    text = Path(path).read_text()
    if path.lower().endswith(".csv"):
        return Allocation(matrix_from_csv(text))
    d = json.loads(text)
    if "probs" in d:
        return Allocation(d["probs"])
    return rp_exact(Instance.from_dict(d)).allocation


def cmd_decompose(cfg: ExperimentConfig) -> int:
    if cfg.input is None:
        raise ConfigError("input: decompose needs --input (allocation CSV/JSON or instance JSON)")
    alloc = _load_allocation(cfg.input)
    dec = birkhoff_decompose(alloc)
    err = float(np.abs(dec.to_matrix() - alloc.probs).max())
    emit(to_json({"schema_version": SCHEMA_VERSION, "n": alloc.n, "max_error": err,
                  "probs": alloc.probs.tolist(), **dec.to_dict()}), cfg.output)
    return 0


HANDLERS = {"generate": cmd_generate, "ratio": cmd_ratio, "tail": cmd_tail,
            "bounds": cmd_bounds, "adversarial": cmd_adversarial, "decompose": cmd_decompose}


# --- argument parsing -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="randprio", description="Random Priority welfare experiments")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--n", help="comma-separated list of sizes")
    p.add_argument("--trials", type=int)
    p.add_argument("--rp-samples", type=int, dest="rp_samples")
    p.add_argument("--seed", type=int)
    p.add_argument("--dist", help="distribution: JSON or shorthand like beta:2,5")
    p.add_argument("--grid", help="non-i.i.d. grid JSON (file path or inline)")
    p.add_argument("--notion", choices=[x.value for x in RatioNotion])
    p.add_argument("--preset-policy", dest="preset_policy", choices=[x.value for x in PresetPolicy])
    p.add_argument("--mode", choices=[x.value for x in Mode])
    p.add_argument("--iters", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--input")
    p.add_argument("--output")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--detail", action="store_true", default=None)
    p.add_argument("--progress", action="store_true", default=None)
    return p


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    base = {}
    if args.config:
        base = json.loads(Path(args.config).read_text())
    for name in ("trials", "rp_samples", "seed", "notion", "preset_policy", "mode", "iters",
                 "restarts", "workers", "input", "output", "format", "detail", "progress"):
        value = getattr(args, name)
        if value is not None:
            base[name] = value
    if args.n is not None:
        try:
            base["n_list"] = [int(x) for x in args.n.split(",") if x.strip()]
        except ValueError:
            raise ConfigError(f"n: cannot parse {args.n!r}") from None
    if args.dist is not None:
        try:
            base["model"] = parse_spec(args.dist).to_dict()
        except (TypeError, ValueError) as e:
            raise ConfigError(f"dist: {e}") from None
    if args.grid is not None:
        text = args.grid if args.grid.lstrip().startswith("{") else Path(args.grid).read_text()
        base["model"] = json.loads(text)
    return ExperimentConfig.from_dict(base)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        return HANDLERS[args.command](cfg)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return 3
    except (ValueError, TypeError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
