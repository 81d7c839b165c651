"""PSPLIB multi-mode (``.mm``) reader, deviation rule and JSON round trip."""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterator

from .instance import Activity, Instance, Mode

log = logging.getLogger(__name__)

DEFAULT_DEVIATION_FACTOR = Fraction(7, 10)


class PsplibFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass
class RawPsplibFile:
    """Token tables of a ``.mm`` file, before conversion to an :class:`Instance`.

    ``precedence`` rows are ``(job, n_modes, successors)``; ``requests`` rows
    are ``(job, mode, duration, requirements)`` with requirements ordered as
    ``resource_labels``; ``availability`` is aligned with ``resource_labels``.
    """

    resource_labels: list[tuple[str, int]] = field(default_factory=list)
    precedence: list[tuple[int, int, list[int]]] = field(default_factory=list)
    requests: list[tuple[int, int, int, list[int]]] = field(default_factory=list)
    availability: list[int] = field(default_factory=list)


_STAR_RULE = re.compile(r"^\s*\*{5,}\s*$")
_DASH_RULE = re.compile(r"^\s*-{5,}\s*$")
_HEADERS = {
    "PRECEDENCE RELATIONS": "precedence",
    "REQUESTS/DURATIONS": "requests",
    "RESOURCEAVAILABILITIES": "availability",
    "RESOURCE AVAILABILITIES": "availability",
}
_HEADER_STEMS = ("PRECEDENCE", "REQUEST", "RESOURCEAVAIL", "RESOURCE AVAIL")


def _int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise PsplibFormatError(f"expected an integer, got {token!r}", lineno) from None


def _parse_labels(line: str, lineno: int) -> list[tuple[str, int]]:
    tokens = line.split()
    labels = []
    idx = 0
    while idx < len(tokens):
        tok = tokens[idx]
        m = re.fullmatch(r"([RND])(\d+)?", tok)
        if not m:
            raise PsplibFormatError(f"bad resource label {tok!r}", lineno)
        if m.group(2) is not None:
            labels.append((m.group(1), int(m.group(2))))
            idx += 1
        else:
            if idx + 1 >= len(tokens):
                raise PsplibFormatError(f"resource label {tok!r} without index", lineno)
            labels.append((tok, _int(tokens[idx + 1], lineno)))
            idx += 2
    return labels


def read_tables(text: str) -> RawPsplibFile:
    """Tokenize the three data sections of a ``.mm`` file."""
    raw = RawPsplibFile()
    lines = text.splitlines()
    section = None
    header_seen = False
    declared_jobs = None
    found = set()
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        upper = stripped.upper()
        if not stripped or _DASH_RULE.match(stripped):
            continue
        if _STAR_RULE.match(stripped):
            section = None
            continue
        if upper.startswith("JOBS"):
            m = re.search(r":\s*(\d+)", stripped)
            if m:
                declared_jobs = (int(m.group(1)), lineno)
            continue
        key = upper.rstrip(":").strip()
        if key in _HEADERS:
            section, header_seen = _HEADERS[key], False
            if section in found:
                raise PsplibFormatError(f"duplicate section {stripped!r}", lineno)
            found.add(section)
            continue
        if upper.startswith(_HEADER_STEMS):
            raise PsplibFormatError(f"malformed section header {stripped!r}", lineno)
        if section is None:
            continue

        if section == "precedence":
            if not header_seen:
                if not upper.startswith("JOBNR"):
                    raise PsplibFormatError("missing precedence column header", lineno)
                header_seen = True
                continue
            toks = [_int(t, lineno) for t in stripped.split()]
            if len(toks) < 3:
                raise PsplibFormatError("short precedence row", lineno)
            job, nmodes, nsucc = toks[0], toks[1], toks[2]
            succ = toks[3:]
            if len(succ) != nsucc:
                raise PsplibFormatError(f"job {job} declares {nsucc} successors, lists {len(succ)}", lineno)
            raw.precedence.append((job, nmodes, succ))
        elif section == "requests":
            if not header_seen:
                if not upper.startswith("JOBNR"):
                    raise PsplibFormatError("missing requests column header", lineno)
                after = re.split(r"(?i)\bdur(?:ation)?\b", stripped, maxsplit=1)
                if len(after) != 2:
                    raise PsplibFormatError("requests header lacks a duration column", lineno)
                raw.resource_labels = _parse_labels(after[1], lineno)
                header_seen = True
                continue
            toks = [_int(t, lineno) for t in stripped.split()]
            nres = len(raw.resource_labels)
            if len(toks) == nres + 3:
                job, mode = toks[0], toks[1]
                rest = toks[2:]
            elif len(toks) == nres + 2:
                if not raw.requests:
                    raise PsplibFormatError("continuation row before any job row", lineno)
                job = raw.requests[-1][0]
                mode = toks[0]
                rest = toks[1:]
            else:
                raise PsplibFormatError(f"requests row has {len(toks)} fields, expected {nres + 3} or {nres + 2}", lineno)
            raw.requests.append((job, mode, rest[0], rest[1:]))
        elif section == "availability":
            if not header_seen:
                labels = _parse_labels(stripped, lineno)
                if labels != raw.resource_labels:
                    raise PsplibFormatError("availability labels disagree with the requests header", lineno)
                header_seen = True
                continue
            toks = [_int(t, lineno) for t in stripped.split()]
            if raw.availability:
                raise PsplibFormatError("more than one availability row", lineno)
            if len(toks) != len(raw.resource_labels):
                raise PsplibFormatError("availability row length disagrees with resource labels", lineno)
            raw.availability = toks

    for name in ("precedence", "requests", "availability"):
        if name not in found:
            raise PsplibFormatError(f"missing {name} section")
    if not raw.availability:
        raise PsplibFormatError("empty availability section")
    if declared_jobs is not None and declared_jobs[0] != len(raw.precedence):
        raise PsplibFormatError(
            f"header declares {declared_jobs[0]} jobs, precedence section has {len(raw.precedence)}",
            declared_jobs[1],
        )
    return raw


def tables_to_instance(raw: RawPsplibFile, name: str = "") -> Instance:
    labels = raw.resource_labels
    if any(kind == "D" for kind, _ in labels):
        raise PsplibFormatError("doubly constrained resources are not supported")
    jobs = [row[0] for row in raw.precedence]
    if jobs != list(range(1, len(jobs) + 1)):
        raise PsplibFormatError("precedence section jobs are not numbered 1..J")
    nmodes = {job: nm for job, nm, _ in raw.precedence}
    by_job: dict[int, list[tuple[int, int, list[int]]]] = {job: [] for job in jobs}
    for job, mode, dur, reqs in raw.requests:
        if job not in by_job:
            raise PsplibFormatError(f"requests section mentions unknown job {job}")
        by_job[job].append((mode, dur, reqs))
    ren = [c for c, (kind, _) in enumerate(labels) if kind == "R"]
    non = [c for c, (kind, _) in enumerate(labels) if kind == "N"]
    activities = []
    for job in jobs:
        rows = by_job[job]
        if len(rows) != nmodes[job]:
            raise PsplibFormatError(f"job {job} declares {nmodes[job]} modes, requests section has {len(rows)}")
        if [r[0] for r in rows] != list(range(1, len(rows) + 1)):
            raise PsplibFormatError(f"job {job} modes are not numbered 1..{len(rows)}")
        modes = tuple(
            Mode(dur, 0, tuple(reqs[c] for c in ren), tuple(reqs[c] for c in non)) for _, dur, reqs in rows
        )
        activities.append(Activity(modes))
    edges = set()
    for job, _, succ in raw.precedence:
        for s in succ:
            if s not in by_job:
                raise PsplibFormatError(f"job {job} lists unknown successor {s}")
            edges.add((job - 1, s - 1))
    return Instance(
        activities=tuple(activities),
        precedences=frozenset(edges),
        renewable_caps=tuple(raw.availability[c] for c in ren),
        nonrenewable_caps=tuple(raw.availability[c] for c in non),
        name=name,
    )


def parse_mm(text: str, name: str = "") -> Instance:
    """Parse the text of a PSPLIB ``.mm`` file. Deviations start at zero."""
    return tables_to_instance(read_tables(text), name=name)


def read_mm(path: str | Path) -> Instance:
    path = Path(path)
    return parse_mm(path.read_text(), name=path.stem)


def format_tables(raw: RawPsplibFile) -> str:
    """Render token tables back into ``.mm`` layout (numeric content only)."""
    out = ["*" * 72, f"jobs (incl. supersource/sink ):  {len(raw.precedence)}", "*" * 72]
    out.append("PRECEDENCE RELATIONS:")
    out.append("jobnr.    #modes  #successors   successors")
    for job, nm, succ in raw.precedence:
        out.append(f"{job:4d} {nm:8d} {len(succ):10d}     " + " ".join(f"{s:3d}" for s in succ))
    out.append("*" * 72)
    out.append("REQUESTS/DURATIONS:")
    label_text = "  ".join(f"{k} {c}" for k, c in raw.resource_labels)
    out.append("jobnr. mode duration  " + label_text)
    out.append("-" * 72)
    last = None
    for job, mode, dur, reqs in raw.requests:
        lead = f"{job:3d}" if job != last else "   "
        last = job
        out.append(f"{lead} {mode:6d} {dur:5d}   " + " ".join(f"{r:4d}" for r in reqs))
    out.append("*" * 72)
    out.append("RESOURCEAVAILABILITIES:")
    out.append("  " + label_text)
    out.append("  " + " ".join(f"{a:4d}" for a in raw.availability))
    out.append("*" * 72)
    return "\n".join(out) + "\n"


def apply_deviation_rule(instance: Instance, factor: Fraction | float | str = DEFAULT_DEVIATION_FACTOR) -> Instance:
    """Set every real activity's deviation to ``floor(factor * nominal)``.

    ``factor`` is converted to an exact fraction first (floats go through
    their shortest decimal repr, so ``0.7`` means exactly 7/10).
    """
    if isinstance(factor, float):
        factor = Fraction(repr(factor))
    factor = Fraction(factor)
    if factor < 0:
        raise ValueError("deviation factor must be nonnegative")
    sink = instance.sink
    acts = list(instance.activities)
    for i in range(1, sink):
        acts[i] = Activity(
            tuple(
                Mode(m.nominal_duration, int(factor * m.nominal_duration), m.renewable_req, m.nonrenewable_req)
                for m in acts[i].modes
            )
        )
    return instance.with_modes(acts)


def worst_case_instance(instance: Instance) -> Instance:
    """Deterministic copy where every mode always takes its worst-case duration."""
    acts = [
        Activity(tuple(Mode(m.worst_duration, 0, m.renewable_req, m.nonrenewable_req) for m in a.modes))
        for a in instance.activities
    ]
    return instance.with_modes(acts)


@dataclass
class LoadFailure:
    name: str
    error: str


def load_instance_set(directory: str | Path, pattern: str = "*.mm") -> tuple[list[tuple[str, Instance]], list[LoadFailure]]:
    """Parse every matching file in ``directory`` in sorted name order.

    Parse errors are collected rather than raised.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"not a readable directory: {directory}")
    loaded: list[tuple[str, Instance]] = []
    failures: list[LoadFailure] = []
    for path in sorted(directory.glob(pattern), key=lambda p: p.name):
        try:
            loaded.append((path.stem, read_mm(path)))
        except (PsplibFormatError, OSError, UnicodeDecodeError) as exc:
            log.warning("skipping %s: %s", path.name, exc)
            failures.append(LoadFailure(path.name, str(exc)))
    return loaded, failures


def natural_key(name: str) -> list:
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", name)]


# -- canonical JSON ---------------------------------------------------------

def instance_to_dict(instance: Instance) -> dict:
    return {
        "name": instance.name,
        "n": instance.n,
        "renewable_caps": list(instance.renewable_caps),
        "nonrenewable_caps": list(instance.nonrenewable_caps),
        "precedences": [list(e) for e in sorted(instance.precedences)],
        "activities": [
            {
                "modes": [
                    {
                        "nominal_duration": m.nominal_duration,
                        "max_deviation": m.max_deviation,
                        "renewable_req": list(m.renewable_req),
                        "nonrenewable_req": list(m.nonrenewable_req),
                    }
                    for m in act.modes
                ]
            }
            for act in instance.activities
        ],
    }


def instance_from_dict(data: dict) -> Instance:
    acts = tuple(
        Activity(
            tuple(
                Mode(
                    int(m["nominal_duration"]),
                    int(m.get("max_deviation", 0)),
                    tuple(int(v) for v in m["renewable_req"]),
                    tuple(int(v) for v in m["nonrenewable_req"]),
                )
                for m in a["modes"]
            )
        )
        for a in data["activities"]
    )
    inst = Instance(
        activities=acts,
        precedences=frozenset((int(i), int(j)) for i, j in data["precedences"]),
        renewable_caps=tuple(int(c) for c in data["renewable_caps"]),
        nonrenewable_caps=tuple(int(c) for c in data.get("nonrenewable_caps", ())),
        name=data.get("name", ""),
    )
    if "n" in data and data["n"] != inst.n:
        raise ValueError(f"declared n={data['n']} but {inst.n} real activities present")
    return inst


def to_json(instance: Instance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2) + "\n"


def from_json(text: str) -> Instance:
    return instance_from_dict(json.loads(text))


def iter_bundled(set_name: str = "j10") -> Iterator[tuple[str, Instance]]:
    """Yield the PSPLIB instances shipped with the package, in natural order."""
    root = Path(__file__).parent / "data" / set_name
    for path in sorted(root.glob("*.mm"), key=lambda p: natural_key(p.stem)):
        yield path.stem, read_mm(path)


def bundled_dir(set_name: str = "j10") -> Path:
    return Path(__file__).parent / "data" / set_name
