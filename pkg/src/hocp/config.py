"""Run configuration: a small sectioned key-value document over paper defaults.

Grammar (one setting per line):

    # comment                     blank lines and '#' comments are ignored
    [section]                     or [section.subsection]
    key = value                   value: number, 'auto', or comma list of numbers

Sections: ``params``, ``weights.phase1`` .. ``weights.phase4``, ``terminal``,
``bounds``, ``thresholds``, ``horizon``, ``x0``, ``solver``.  Every key is
optional and defaults to the published experiment, so an empty document
reproduces the paper run.  Unknown sections or keys are rejected with their
line number.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .model import (
    ControlBounds,
    EpiModel,
    EpiParams,
    PhaseWeights,
    TerminalWeights,
    Thresholds,
    paper_model,
)
from .solver import SolverConfig

_X0_KEYS = ("V", "S", "E", "I", "J", "R")
_HORIZON_KEYS = ("t0", "tf")

_SECTION_FIELDS = {
    "params": tuple(f.name for f in fields(EpiParams)),
    "terminal": tuple(f.name for f in fields(TerminalWeights)),
    "bounds": tuple(f.name for f in fields(ControlBounds)),
    "thresholds": tuple(f.name for f in fields(Thresholds)),
    "horizon": _HORIZON_KEYS,
    "x0": _X0_KEYS,
    "solver": tuple(f.name for f in fields(SolverConfig)),
    "weights.phase1": tuple(f.name for f in fields(PhaseWeights)),
    "weights.phase2": tuple(f.name for f in fields(PhaseWeights)),
    "weights.phase3": tuple(f.name for f in fields(PhaseWeights)),
    "weights.phase4": tuple(f.name for f in fields(PhaseWeights)),
}

_INT_KEYS = {("solver", "max_outer_iters")}
_PAIR_KEYS = {("solver", "ts2_bounds")}
_OPTIONAL_KEYS = {("solver", "ts2_init")}


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs: the problem instance and solver numerics."""

    model: EpiModel
    solver: SolverConfig

    def validate(self) -> list[str]:
        return self.model.validate() + self.solver.validate()


def default_config() -> RunConfig:
    return RunConfig(model=paper_model(), solver=SolverConfig())


def _parse_value(token: str, lineno: int, problems: list[str]):
    token = token.strip()
    if token.lower() == "auto":
        return None
    if "," in token:
        return tuple(_parse_value(t, lineno, problems) for t in token.split(","))
    try:
        return float(token)
    except ValueError:
        problems.append(f"line {lineno}: cannot parse value {token!r}")
        return None


def parse_document(text: str) -> dict[str, dict[str, object]]:
    """Parse the raw document into {section: {key: value}} with full error lists."""
    sections: dict[str, dict[str, object]] = {}
    problems: list[str] = []
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in _SECTION_FIELDS:
                problems.append(f"line {lineno}: unknown section [{current}]")
                current = None
            else:
                sections.setdefault(current, {})
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected 'key = value', got {raw!r}")
            continue
        if current is None:
            problems.append(f"line {lineno}: setting outside any known section")
            continue
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _SECTION_FIELDS[current]:
            problems.append(
                f"line {lineno}: unknown key {key!r} in section [{current}]"
            )
            continue
        sections[current][key] = _parse_value(value, lineno, problems)
    if problems:
        raise ConfigError(problems)
    return sections


def _coerce_solver(values: dict[str, object], problems: list[str]) -> dict:
    out = {}
    for key, val in values.items():
        if ("solver", key) in _PAIR_KEYS:
            if not isinstance(val, tuple) or len(val) != 2:
                problems.append(f"solver.{key} needs two comma-separated values")
                continue
            lo, hi = val
            if hi is None:
                problems.append(f"solver.{key} upper bound cannot be 'auto'")
                continue
            out[key] = (None if lo is None else float(lo), float(hi))
        elif ("solver", key) in _OPTIONAL_KEYS:
            out[key] = None if val is None else float(val)
        elif val is None or isinstance(val, tuple):
            problems.append(f"solver.{key} must be a single number")
        elif ("solver", key) in _INT_KEYS:
            out[key] = int(val)
        else:
            out[key] = float(val)
    return out


def _coerce_floats(section: str, values: dict[str, object],
                   problems: list[str]) -> dict:
    out = {}
    for key, val in values.items():
        if val is None or isinstance(val, tuple):
            problems.append(f"{section}.{key} must be a single number")
            continue
        out[key] = float(val)
    return out


def from_sections(sections: dict[str, dict[str, object]]) -> RunConfig:
    """Merge parsed sections over the paper defaults and validate the result."""
    problems: list[str] = []
    base = default_config()
    model = base.model

    def floats(name):
        return _coerce_floats(name, sections.get(name, {}), problems)

    params = replace(model.params, **floats("params"))
    terminal = replace(model.terminal, **floats("terminal"))
    bounds = replace(model.bounds, **floats("bounds"))
    thresholds = replace(model.thresholds, **floats("thresholds"))
    weights = tuple(
        replace(model.weights[i], **floats(f"weights.phase{i + 1}"))
        for i in range(4)
    )
    horizon = floats("horizon")
    t0 = horizon.get("t0", model.t0)
    tf = horizon.get("tf", model.tf)
    x0_over = floats("x0")
    x0 = np.asarray(model.x0, dtype=float).copy()
    for key, val in x0_over.items():
        x0[_X0_KEYS.index(key)] = val
    solver = replace(base.solver, **_coerce_solver(sections.get("solver", {}),
                                                   problems))
    if problems:
        raise ConfigError(problems)

    cfg = RunConfig(
        model=EpiModel(
            params=params, weights=weights, terminal=terminal, bounds=bounds,
            thresholds=thresholds, x0=x0, t0=t0, tf=tf,
        ),
        solver=solver,
    )
    violations = cfg.validate()
    if violations:
        raise ConfigError(violations)
    return cfg


def loads(text: str) -> RunConfig:
    return from_sections(parse_document(text))


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a configuration file; every problem is reported."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return loads(text)


def _fmt(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    if isinstance(value, bool):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    return repr(float(value))  # exact round-trip


def dumps(cfg: RunConfig) -> str:
    """Canonical explicit document; load(dumps(cfg)) reproduces cfg exactly."""
    model = cfg.model
    lines: list[str] = []

    def emit(section: str, obj_fields: dict):
        lines.append(f"[{section}]")
        for key, val in obj_fields.items():
            lines.append(f"{key} = {_fmt(val)}")
        lines.append("")

    emit("params", dict(model.params.__dict__))
    for i, w in enumerate(model.weights, start=1):
        emit(f"weights.phase{i}", dict(w.__dict__))
    emit("terminal", dict(model.terminal.__dict__))
    emit("bounds", dict(model.bounds.__dict__))
    emit("thresholds", dict(model.thresholds.__dict__))
    emit("horizon", {"t0": model.t0, "tf": model.tf})
    emit("x0", dict(zip(_X0_KEYS, model.x0)))
    solver = {f.name: getattr(cfg.solver, f.name) for f in fields(SolverConfig)}
    solver["max_outer_iters"] = int(solver["max_outer_iters"])
    emit("solver", solver)
    return "\n".join(lines)


def write_config(cfg: RunConfig, path: str | Path) -> None:
    Path(path).write_text(dumps(cfg))
