"""Result records and their CSV persistence."""

from __future__ import annotations

import csv
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable

SCHEMA = "robust-mrcpsp-results/1"
HEADER_NOTE = f"# schema={SCHEMA}; runs not solved to optimality record the time limit as their seconds"

OPTIMAL = "optimal"
FEASIBLE = "feasible"
NO_SOLUTION = "no_solution"
ERROR = "error"
METHODS = ("compact", "benders")


@dataclass
class RunRecord:
    instance: str
    method: str
    gamma: int
    status: str
    objective: int | None = None
    bound: float | None = None
    gap: float | None = None
    seconds: float = 0.0
    iterations: int | None = None
    iteration_seconds: float | None = None
    instance_set: str = ""
    backend: str = ""
    time_limit: float | None = None
    message: str = ""

    @property
    def key(self) -> tuple[str, str, int]:
        return (self.instance, self.method, self.gamma)

    @property
    def solved(self) -> bool:
        return self.status == OPTIMAL

    @property
    def has_solution(self) -> bool:
        return self.objective is not None and self.status in (OPTIMAL, FEASIBLE)


COLUMNS = [f.name for f in fields(RunRecord)]


def percent_gap(objective: float | None, bound: float | None, optimal: bool) -> float | None:
    if optimal:
        return 0.0
    if objective is None or bound is None or objective == 0:
        return None
    return 100.0 * (objective - bound) / objective


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}" if abs(value) < 1e6 else repr(value)
    return str(value)


def _parse(name: str, text: str):
    if text == "":
        return None if name not in ("instance", "method", "status", "instance_set", "backend", "message") else ""
    if name in ("gamma", "objective", "iterations"):
        return int(float(text))
    if name in ("bound", "gap", "seconds", "iteration_seconds", "time_limit"):
        return float(text)
    return text


def write_records(path: str | Path, records: Iterable[RunRecord]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(HEADER_NOTE + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COLUMNS)
        for r in records:
            writer.writerow([_cell(v) for v in asdict(r).values()])


def read_records(path: str | Path) -> list[RunRecord]:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    missing = set(COLUMNS) - set(reader.fieldnames or ())
    if missing:
        raise ValueError(f"{path}: missing result columns {sorted(missing)}")
    return [RunRecord(**{k: _parse(k, row[k]) for k in COLUMNS}) for row in reader]


class RecordAppender:
    """Appends records one at a time, flushing each so a crash loses nothing written."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        fresh = not self.path.exists() or self.path.stat().st_size == 0
        self._fh = open(self.path, "a", newline="")
        self._writer = csv.writer(self._fh, lineterminator="\n")
        if fresh:
            self._fh.write(HEADER_NOTE + "\n")
            self._writer.writerow(COLUMNS)
            self._fh.flush()

    def append(self, record: RunRecord) -> None:
        self._writer.writerow([_cell(v) for v in asdict(record).values()])
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
