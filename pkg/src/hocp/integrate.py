"""Fixed-step RK4 integration with switching-manifold event localization.

Forward segments store states, node derivatives and applied controls so the
backward costate sweep can reconstruct (x, u) anywhere via cubic Hermite /
linear interpolation.  Event times are localized by bisection on the dense
output of the bracketing step, preserving the integrator's fourth order at
the crossing.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NoCrossingError

EVENT_TOL = 1e-10
MAX_BISECT = 60


@dataclass(frozen=True)
class TimeGrid:
    """Uniform integration window; the final step may be shortened to hit t_end."""

    t_start: float
    t_end: float
    step: float

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise ValueError(f"empty window [{self.t_start}, {self.t_end}]")
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.step > self.t_end - self.t_start + 1e-12:
            object.__setattr__(self, "step", self.t_end - self.t_start)


class SegmentEnd(enum.Enum):
    END_OF_WINDOW = "end_of_window"
    MANIFOLD_CROSSING = "manifold_crossing"


@dataclass(frozen=True)
class EventSpec:
    """Scalar manifold with a trigger direction.

    direction +1 fires when the value crosses zero from strictly negative;
    -1 fires on a crossing from strictly positive.  The direction filter
    keeps a segment that starts near its own threshold from retriggering.
    """

    manifold: Callable[[np.ndarray], float]
    direction: int
    label: str = "event"

    def __post_init__(self):
        if self.direction not in (-1, +1):
            raise ValueError("event direction must be +1 (rising) or -1 (falling)")


@dataclass(frozen=True)
class TrajectorySegment:
    """One phase window: aligned times, states, node derivatives and controls."""

    phase: int
    times: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    controls: np.ndarray
    terminated_by: SegmentEnd

    def __post_init__(self):
        for name in ("times", "states", "derivs", "controls"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("segment times must be strictly ascending")

    @property
    def t_start(self) -> float:
        return float(self.times[0])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])


def _rk4_step(f, t, x, h, k1=None):
    """One classical RK4 step; returns (x_next, k1) with k1 reusable."""
    if k1 is None:
        k1 = f(t, x)
    k2 = f(t + 0.5 * h, x + (0.5 * h) * k1)
    k3 = f(t + 0.5 * h, x + (0.5 * h) * k2)
    k4 = f(t + h, x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), k1


def hermite(theta: float, h: float, x0, x1, f0, f1):
    """Cubic Hermite dense output on one step, theta in [0, 1]."""
    t2 = theta * theta
    t3 = t2 * theta
    return (
        (2.0 * t3 - 3.0 * t2 + 1.0) * x0
        + (t3 - 2.0 * t2 + theta) * h * f0
        + (-2.0 * t3 + 3.0 * t2) * x1
        + (t3 - t2) * h * f1
    )


def _locate_crossing(event: EventSpec, h, t0, x0, f0, x1, f1,
                     m0: float, m1: float, event_tol: float):
    """Bisection for the event time inside a bracketing step.

    Returns (t_event, x_event).  m0 is strictly on the pre-crossing side.
    """
    lo, hi = 0.0, 1.0
    m_lo, m_hi = m0, m1
    if abs(m_hi) <= event_tol:
        return t0 + h, np.asarray(x1, dtype=float)
    theta = 1.0
    x_mid = np.asarray(x1, dtype=float)
    for _ in range(MAX_BISECT):
        theta = 0.5 * (lo + hi)
        x_mid = hermite(theta, h, x0, x1, f0, f1)
        m_mid = event.manifold(x_mid)
        if abs(m_mid) <= event_tol:
            break
        # keep the bracket: lo stays on the pre-crossing side of zero
        if (m_mid < 0.0) == (m_lo < 0.0):
            lo, m_lo = theta, m_mid
        else:
            hi, m_hi = theta, m_mid
    return t0 + theta * h, x_mid


def integrate_phase(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    x0: np.ndarray,
    grid: TimeGrid,
    control: Callable[[float], np.ndarray] | None = None,
    event: EventSpec | None = None,
    phase: int = 0,
    event_tol: float = EVENT_TOL,
) -> TrajectorySegment:
    """March RK4 across the window, ending early at a localized manifold crossing.

    ``rhs(t, x)`` must already embed the control; ``control(t)`` is evaluated
    at the accepted nodes purely for storage.  When ``event`` is given and
    never fires inside the window, raises NoCrossingError.
    """
    x = np.asarray(x0, dtype=float).copy()
    t = grid.t_start
    h = grid.step
    times = [t]
    states = [x.copy()]
    derivs = [np.asarray(rhs(t, x), dtype=float)]
    crossed = False

    m_prev = event.manifold(x) if event is not None else 0.0
    while t < grid.t_end - 1e-12:
        h_step = min(h, grid.t_end - t)
        f0 = derivs[-1]
        x_next, _ = _rk4_step(rhs, t, x, h_step, k1=f0)
        t_next = t + h_step
        f_next = np.asarray(rhs(t_next, x_next), dtype=float)
        if event is not None:
            m_next = event.manifold(x_next)
            fired = (
                (m_prev < 0.0 and m_next >= 0.0)
                if event.direction > 0
                else (m_prev > 0.0 and m_next <= 0.0)
            )
            if fired:
                t_ev, x_ev = _locate_crossing(
                    event, h_step, t, x, f0, x_next, f_next, m_prev, m_next,
                    event_tol,
                )
                if t_ev <= t + 1e-15:
                    t_ev = t + 1e-15  # keep times strictly ascending
                times.append(t_ev)
                states.append(x_ev)
                derivs.append(np.asarray(rhs(t_ev, x_ev), dtype=float))
                crossed = True
                break
            m_prev = m_next
        t, x = t_next, x_next
        times.append(t)
        states.append(x.copy())
        derivs.append(f_next)

    if event is not None and not crossed:
        raise NoCrossingError(event.label, m_prev, grid.t_end)

    times_arr = np.array(times)
    if control is not None:
        controls = np.stack([np.atleast_1d(control(tk)) for tk in times])
    else:
        controls = np.zeros((len(times), 0))
    return TrajectorySegment(
        phase=phase,
        times=times_arr,
        states=np.stack(states),
        derivs=np.stack(derivs),
        controls=controls,
        terminated_by=(
            SegmentEnd.MANIFOLD_CROSSING if crossed else SegmentEnd.END_OF_WINDOW
        ),
    )


def interpolate(segment: TrajectorySegment, t: float) -> tuple[np.ndarray, np.ndarray]:
    """State (cubic Hermite) and control (piecewise linear) at an interior time."""
    times = segment.times
    if t < times[0] - 1e-9 or t > times[-1] + 1e-9:
        raise ValueError(
            f"t={t!r} outside segment [{times[0]!r}, {times[-1]!r}]"
        )
    t = min(max(t, times[0]), times[-1])
    k = int(np.searchsorted(times, t, side="right") - 1)
    k = min(max(k, 0), len(times) - 2) if len(times) > 1 else 0
    if len(times) == 1 or t == times[k]:
        return segment.states[k].copy(), segment.controls[k].copy()
    h = times[k + 1] - times[k]
    theta = (t - times[k]) / h
    x = hermite(theta, h, segment.states[k], segment.states[k + 1],
                segment.derivs[k], segment.derivs[k + 1])
    u = (1.0 - theta) * segment.controls[k] + theta * segment.controls[k + 1]
    return x, u


def integrate_adjoint(
    forward: TrajectorySegment,
    lam_end: np.ndarray,
    adjoint_rhs: Callable[[float, np.ndarray, np.ndarray, np.ndarray], np.ndarray],
) -> np.ndarray:
    """Backward RK4 for the costate over the forward segment's own nodes.

    ``adjoint_rhs(t, lam, x, u)`` is evaluated with (x, u) read off the stored
    forward segment (Hermite states, linear controls at step midpoints).
    Returns costate samples aligned with ``forward.times``.
    """
    times = forward.times
    n = len(times)
    lam = np.empty((n, len(lam_end)))
    lam[-1] = np.asarray(lam_end, dtype=float)
    if n == 1:
        return lam
    X = forward.states
    U = forward.controls
    F = forward.derivs
    # Step midpoints, precomputed: cubic Hermite at theta = 1/2 for states,
    # exact piecewise-linear midpoint for controls.
    hs = np.diff(times)[:, None]
    x_mid = 0.5 * (X[:-1] + X[1:]) + 0.125 * hs * (F[:-1] - F[1:])
    u_mid = 0.5 * (U[:-1] + U[1:])
    for k in range(n - 1, 0, -1):
        t1, t0 = times[k], times[k - 1]
        h = t0 - t1  # negative
        t_mid = t1 + 0.5 * h
        xm, um = x_mid[k - 1], u_mid[k - 1]
        y = lam[k]
        k1 = adjoint_rhs(t1, y, X[k], U[k])
        k2 = adjoint_rhs(t_mid, y + (0.5 * h) * k1, xm, um)
        k3 = adjoint_rhs(t_mid, y + (0.5 * h) * k2, xm, um)
        k4 = adjoint_rhs(t0, y + h * k3, X[k - 1], U[k - 1])
        lam[k - 1] = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return lam
