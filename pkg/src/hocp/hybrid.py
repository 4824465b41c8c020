"""Generic hybrid-system structure: modes, transitions, jump maps, manifolds.

Model-agnostic containers for a hybrid system whose continuous state and
control dimensions may differ per mode.  The executable schedule is a fixed
chain of transitions (one pass through the mode cycle); a general automaton
runner is intentionally out of scope.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

StateFn = Callable[[np.ndarray], np.ndarray]
ScalarFn = Callable[[np.ndarray], float]


@dataclass(frozen=True)
class ModeId:
    """Discrete mode identifier with a short human-readable label."""

    id: int
    label: str

    def __post_init__(self):
        if not self.label:
            raise ValueError("mode label must be nonempty")


class TransitionKind(enum.Enum):
    AUTONOMOUS = "autonomous"
    CONTROLLED = "controlled"


@dataclass(frozen=True)
class ModeSpec:
    """Per-mode dimensions, control box and compartment naming."""

    mode: ModeId
    state_dim: int
    control_dim: int
    control_lower: np.ndarray
    control_upper: np.ndarray
    state_labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "control_lower", _frozen(self.control_lower))
        object.__setattr__(self, "control_upper", _frozen(self.control_upper))


@dataclass(frozen=True)
class TransitionSpec:
    """One scheduled transition between modes.

    Autonomous transitions carry a scalar manifold whose zero-crossing (in
    ``crossing_direction``: +1 rising through zero, -1 falling) triggers the
    switch.  Controlled transitions fire at a chosen time and carry no
    manifold.  ``jump`` maps the pre-switch state (dimension of ``from_mode``)
    to the post-switch state (dimension of ``to_mode``).
    """

    from_mode: ModeId
    to_mode: ModeId
    kind: TransitionKind
    jump: StateFn
    manifold: ScalarFn | None = None
    manifold_gradient: np.ndarray | None = None
    crossing_direction: int = 0
    label: str = ""

    def __post_init__(self):
        if not self.label:
            object.__setattr__(
                self, "label", f"{self.from_mode.label}->{self.to_mode.label}"
            )
        if self.manifold_gradient is not None:
            object.__setattr__(
                self, "manifold_gradient", _frozen(self.manifold_gradient)
            )


@dataclass(frozen=True)
class HybridSystemDefinition:
    """Executable hybrid system: modes, transition chain and per-mode operations.

    ``transitions`` is the scheduled phase chain; with k transitions the run
    visits k + 1 phase windows.  Operation maps are keyed by ``ModeId.id``.
    Cost and adjoint callables take the phase weight bundle as an extra
    argument, so one mode can be revisited with different weights.
    """

    modes: tuple[ModeSpec, ...]
    transitions: tuple[TransitionSpec, ...]
    vector_fields: Mapping[int, Callable]
    running_costs: Mapping[int, Callable]
    adjoint_fields: Mapping[int, Callable]
    control_minimizers: Mapping[int, Callable]
    terminal_cost: Callable

    def mode_spec(self, mode: ModeId) -> ModeSpec:
        for ms in self.modes:
            if ms.mode.id == mode.id:
                return ms
        raise KeyError(f"unknown mode id {mode.id}")


@dataclass
class ValidationReport:
    """Accumulated structural violations; empty means the definition is valid."""

    problems: list[str] = field(default_factory=list)

    def add(self, msg: str) -> None:
        self.problems.append(msg)

    @property
    def ok(self) -> bool:
        return not self.problems

    def __bool__(self) -> bool:  # truthy when there are problems to report
        return not self.ok


def _frozen(a) -> np.ndarray:
    arr = np.asarray(a, dtype=float).copy()
    arr.setflags(write=False)
    return arr


def validate_system(definition: HybridSystemDefinition) -> ValidationReport:
    """Check every structural invariant; report all violations found.

    Jump dimensions are probed with a uniform-mass test vector since jump
    maps are opaque callables.
    """
    report = ValidationReport()
    seen_ids: set[int] = set()
    for ms in definition.modes:
        if ms.mode.id in seen_ids:
            report.add(f"duplicate mode id {ms.mode.id}")
        seen_ids.add(ms.mode.id)
        if not ms.mode.label:
            report.add(f"mode {ms.mode.id}: empty label")
        if ms.state_dim <= 0:
            report.add(f"mode {ms.mode.label}: state_dim must be positive")
        if ms.control_dim <= 0:
            report.add(f"mode {ms.mode.label}: control_dim must be positive")
        if len(ms.state_labels) != ms.state_dim:
            report.add(
                f"mode {ms.mode.label}: {len(ms.state_labels)} state labels "
                f"for state_dim {ms.state_dim}"
            )
        if ms.control_lower.shape != (ms.control_dim,):
            report.add(f"mode {ms.mode.label}: control_lower has wrong length")
        if ms.control_upper.shape != (ms.control_dim,):
            report.add(f"mode {ms.mode.label}: control_upper has wrong length")
        elif ms.control_lower.shape == ms.control_upper.shape and np.any(
            ms.control_lower > ms.control_upper
        ):
            report.add(f"mode {ms.mode.label}: control_lower exceeds control_upper")

    trs = definition.transitions
    for tr in trs:
        if tr.kind is TransitionKind.AUTONOMOUS:
            if tr.manifold is None:
                report.add(f"transition {tr.label}: autonomous but missing manifold")
            if tr.crossing_direction not in (-1, 1):
                report.add(
                    f"transition {tr.label}: autonomous needs crossing_direction +-1"
                )
        elif tr.manifold is not None:
            report.add(f"transition {tr.label}: controlled but carries a manifold")
        try:
            d_from = definition.mode_spec(tr.from_mode).state_dim
            d_to = definition.mode_spec(tr.to_mode).state_dim
        except KeyError:
            report.add(f"transition {tr.label}: references unknown mode")
            continue
        if d_from <= 0 or d_to <= 0:
            continue  # dimension problem already reported on the mode
        probe = np.full(d_from, 1.0 / d_from)
        try:
            out = np.asarray(tr.jump(probe), dtype=float)
        except Exception as exc:  # defensive probe of an opaque callable
            report.add(f"transition {tr.label}: jump map failed on probe ({exc})")
            continue
        if out.shape != (d_to,):
            report.add(
                f"transition {tr.label}: jump maps dim {d_from} to {out.shape}, "
                f"expected ({d_to},)"
            )
    for a, b in zip(trs, trs[1:]):
        if a.to_mode.id != b.from_mode.id:
            report.add(
                f"broken chain: {a.label} ends in {a.to_mode.label} but next "
                f"transition starts from {b.from_mode.label}"
            )
    if trs and trs[-1].to_mode.id != trs[0].from_mode.id:
        report.add(
            f"chain is not a cycle: starts at {trs[0].from_mode.label}, "
            f"ends at {trs[-1].to_mode.label}"
        )
    for mid in (definition.vector_fields, definition.adjoint_fields,
                definition.running_costs, definition.control_minimizers):
        for key in mid:
            if key not in seen_ids:
                report.add(f"operation map references unknown mode id {key}")
    return report


def apply_jump(tr: TransitionSpec, x_minus: np.ndarray) -> np.ndarray:
    """Map a pre-switch state through the transition's jump."""
    x_minus = np.asarray(x_minus, dtype=float)
    out = np.asarray(tr.jump(x_minus), dtype=float)
    return out


def manifold_value(tr: TransitionSpec, x: np.ndarray) -> float:
    """Evaluate the switching manifold; only meaningful on autonomous transitions."""
    if tr.kind is not TransitionKind.AUTONOMOUS or tr.manifold is None:
        raise ValueError(f"transition {tr.label} has no manifold (controlled switch)")
    return float(tr.manifold(np.asarray(x, dtype=float)))
