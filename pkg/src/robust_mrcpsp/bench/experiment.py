"""Gamma sweeps over instance sets, one record per (instance, method, gamma)."""

from __future__ import annotations

import configparser
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from ..benders import run_benders
from ..compact import solve_compact
from ..instance import Instance
from ..milp import make_backend
from ..milp.backends import FEASIBLE as SOLVER_FEASIBLE
from ..milp.backends import OPTIMAL as SOLVER_OPTIMAL
from ..psplib import apply_deviation_rule, load_instance_set
from .records import ERROR, FEASIBLE, METHODS, NO_SOLUTION, OPTIMAL, RecordAppender, RunRecord, percent_gap, read_records

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    instances_dir: Path
    methods: tuple[str, ...] = METHODS
    gammas: tuple[int, ...] = (0,)
    time_limit_s: float = 7200.0
    backend: str = "highs"
    workers: int = 1
    deviation_factor: Fraction = Fraction(7, 10)
    seed: int = 0
    output: Path = Path("results.csv")
    pattern: str = "*.mm"
    limit: int | None = None
    instance_set: str = ""
    extra: dict = field(default_factory=dict)


KEYS = {
    "instances_dir", "methods", "gammas", "time_limit_s", "backend", "workers",
    "deviation_factor", "seed", "output", "pattern", "limit", "instance_set",
}


def _split(value: str) -> list[str]:
    return [v for v in value.replace(",", " ").split() if v]


def parse_config(text: str, base_dir: str | Path = ".") -> ExperimentConfig:
    """Read ``key = value`` lines; ``#`` starts a comment.  Paths are relative to ``base_dir``."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config: {exc}") from None
    raw = dict(parser["run"])
    unknown = set(raw) - KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if "instances_dir" not in raw:
        raise ConfigError("config must set instances_dir")
    base = Path(base_dir)
    try:
        cfg = ExperimentConfig(instances_dir=base / raw["instances_dir"])
        if "methods" in raw:
            cfg.methods = tuple(_split(raw["methods"]))
        if "gammas" in raw:
            cfg.gammas = tuple(int(g) for g in _split(raw["gammas"]))
        if "time_limit_s" in raw:
            cfg.time_limit_s = float(raw["time_limit_s"])
        cfg.backend = raw.get("backend", cfg.backend)
        cfg.workers = int(raw.get("workers", cfg.workers))
        if "deviation_factor" in raw:
            cfg.deviation_factor = Fraction(raw["deviation_factor"])
        cfg.seed = int(raw.get("seed", cfg.seed))
        if "output" in raw:
            cfg.output = base / raw["output"]
        cfg.pattern = raw.get("pattern", cfg.pattern)
        if "limit" in raw:
            cfg.limit = int(raw["limit"])
        cfg.instance_set = raw.get("instance_set", cfg.instance_set)
    except ValueError as exc:
        raise ConfigError(f"bad config value: {exc}") from None
    bad = [m for m in cfg.methods if m not in METHODS]
    if bad or not cfg.methods:
        raise ConfigError(f"methods must be drawn from {METHODS}, got {list(cfg.methods)}")
    if any(g < 0 for g in cfg.gammas) or not cfg.gammas:
        raise ConfigError("gammas must be a nonempty list of nonnegative integers")
    if cfg.time_limit_s <= 0 or cfg.workers < 1:
        raise ConfigError("time_limit_s must be positive and workers at least 1")
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, path.parent)


# -- single runs -------------------------------------------------------------


def run_one(instance: Instance, method: str, gamma: int, backend_name: str, time_limit: float, instance_set: str = "") -> RunRecord:
    """Solve one (instance, method, gamma) and summarise it as a record."""
    backend = make_backend(backend_name)
    rec = RunRecord(instance.name, method, gamma, ERROR, instance_set=instance_set, backend=backend_name, time_limit=time_limit)
    start = time.perf_counter()
    try:
        if method == "compact":
            first, worst, out = solve_compact(instance, gamma, backend, time_limit=time_limit)
            elapsed = time.perf_counter() - start
            if out.status == SOLVER_OPTIMAL:
                rec.status = OPTIMAL
            elif out.status == SOLVER_FEASIBLE:
                rec.status = FEASIBLE
            elif out.status == NO_SOLUTION:
                rec.status = NO_SOLUTION
            else:
                rec.status = ERROR
                rec.message = out.message or out.status
            if worst is not None:
                rec.objective = worst.makespan
            rec.bound = out.best_bound
        elif method == "benders":
            first, worst, state = run_benders(instance, gamma, backend, time_limit=time_limit)
            elapsed = time.perf_counter() - start
            if state.status == "optimal":
                rec.status = OPTIMAL
            elif state.status == "error":
                rec.status = ERROR
                rec.message = state.message
            else:
                rec.status = FEASIBLE if worst is not None else NO_SOLUTION
            rec.objective = worst.makespan if worst is not None else None
            rec.bound = state.lb if math.isfinite(state.lb) else None
            rec.iterations = state.completed_iterations
            rec.iteration_seconds = elapsed / max(state.iterations, 1)
        else:
            raise ValueError(f"unknown method {method!r}")
    except Exception as exc:  # recorded, the sweep carries on
        log.exception("run failed: %s %s gamma=%s", instance.name, method, gamma)
        rec.status = ERROR
        rec.message = f"{type(exc).__name__}: {exc}"
        rec.seconds = time.perf_counter() - start
        return rec
    rec.gap = percent_gap(rec.objective, rec.bound, rec.status == OPTIMAL) if rec.status != ERROR else None
    rec.seconds = elapsed if rec.status == OPTIMAL else time_limit
    return rec


def _job(args) -> RunRecord:
    return run_one(*args)


def run_experiment(config: ExperimentConfig, progress=None) -> list[RunRecord]:
    """Run every pending (instance, method, gamma) and append each record to ``config.output``.

    Keys already present in the output file are skipped, so an interrupted
    sweep resumes where it stopped.  Returns the newly produced records.
    """
    if not Path(config.instances_dir).is_dir():
        raise ConfigError(f"instance directory {config.instances_dir} does not exist")
    loaded, failures = load_instance_set(config.instances_dir, config.pattern)
    for f in failures:
        log.warning("skipping %s: %s", f.name, f.error)
    if config.limit is not None:
        loaded = loaded[: config.limit]
    set_name = config.instance_set or Path(config.instances_dir).name
    done = set()
    if Path(config.output).exists() and Path(config.output).stat().st_size > 0:
        done = {r.key for r in read_records(config.output)}
    jobs = []
    for name, inst in loaded:
        inst = apply_deviation_rule(inst, config.deviation_factor)
        for gamma in config.gammas:
            for method in config.methods:
                if (name, method, gamma) not in done:
                    jobs.append((inst, method, gamma, config.backend, config.time_limit_s, set_name))

    new: list[RunRecord] = []
    with RecordAppender(config.output) as out:
        if config.workers == 1:
            for job in jobs:
                rec = _job(job)
                out.append(rec)
                new.append(rec)
                if progress:
                    progress(rec)
        else:
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                futures = [pool.submit(_job, job) for job in jobs]
                for fut in as_completed(futures):
                    rec = fut.result()
                    out.append(rec)
                    new.append(rec)
                    if progress:
                        progress(rec)
    return new
