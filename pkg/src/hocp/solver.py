"""Forward-backward sweep solver with switching-time co-optimization.

One outer iteration is a full sweep: forward pass with event detection,
cost evaluation, backward costate pass with jump multipliers, and a damped
clipped-control update.  Once the control update stalls below tolerance the
controlled switching time is moved along the Hamiltonian gap at that
boundary (sign calibrated numerically at startup, bracketed by false
position after the first sign change) and the sweeps resume.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import model as m
from .errors import InfeasibleScheduleError, NoCrossingError, TransversalityError
from .integrate import (
    EventSpec,
    SegmentEnd,
    TimeGrid,
    TrajectorySegment,
    integrate_adjoint,
    integrate_phase,
)

MASS_TOL = 1e-8


@dataclass(frozen=True)
class SolverConfig:
    """Numerical knobs of the sweep; fully deterministic (no randomness)."""

    h: float = 0.01
    alpha: float = 0.3
    tol_control: float = 1e-6
    tol_hgap: float = 1e-3
    ts2_step: float = 0.5
    max_outer_iters: int = 500
    ts2_bounds: tuple[float | None, float] = (None, 30.0)
    ts2_init: float | None = None
    ts2_init_offset: float = 3.0
    event_tol: float = 1e-10
    calibration_delta: float = 0.1
    ts2_min_step: float = 0.05
    ts2_max_step: float = 1.0
    ts2_min_bracket: float = 1e-3
    alpha_min: float = 1e-3

    def validate(self) -> list[str]:
        problems = []
        if self.h <= 0:
            problems.append("solver.h must be positive")
        if not 0.0 < self.alpha <= 1.0:
            problems.append("solver.alpha must lie in (0, 1]")
        for name in ("tol_control", "tol_hgap", "ts2_step", "event_tol",
                     "calibration_delta"):
            if getattr(self, name) <= 0:
                problems.append(f"solver.{name} must be positive")
        if self.max_outer_iters < 1:
            problems.append("solver.max_outer_iters must be at least 1")
        return problems


@dataclass(frozen=True)
class ControlProfile:
    """Piecewise-linear control signal; constant extrapolation beyond its nodes."""

    times: np.ndarray
    values: np.ndarray  # (n, m)

    def __post_init__(self):
        t = np.atleast_1d(np.asarray(self.times, dtype=float))
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @staticmethod
    def constant(u: np.ndarray | Sequence[float]) -> "ControlProfile":
        u = np.atleast_1d(np.asarray(u, dtype=float))
        return ControlProfile(np.array([0.0]), u[None, :])

    @staticmethod
    def zero(n_controls: int) -> "ControlProfile":
        return ControlProfile.constant(np.zeros(n_controls))

    def __call__(self, t: float) -> np.ndarray:
        if len(self.times) == 1:
            return self.values[0].copy()
        return np.array(
            [np.interp(t, self.times, self.values[:, j])
             for j in range(self.values.shape[1])]
        )

    def eval_many(self, ts: np.ndarray) -> np.ndarray:
        if len(self.times) == 1:
            return np.tile(self.values[0], (len(ts), 1))
        return np.column_stack(
            [np.interp(ts, self.times, self.values[:, j])
             for j in range(self.values.shape[1])]
        )


class _ProfileCursor:
    """Stateful piecewise-linear evaluator for near-monotone query times.

    Matches ControlProfile's interpolation (constant beyond the ends) while
    amortizing the interval search across the integrator's marching queries;
    event bisection may rewind, which just resets the cursor.
    """

    __slots__ = ("t", "v", "k", "n")

    def __init__(self, profile: "ControlProfile"):
        self.t = profile.times
        self.v = profile.values
        self.n = len(self.t)
        self.k = 0

    def __call__(self, tq: float) -> np.ndarray:
        if self.n == 1:
            return self.v[0]
        t = self.t
        k = self.k
        if tq < t[k]:
            k = 0
        last = self.n - 2
        while k < last and t[k + 1] < tq:
            k += 1
        self.k = k
        t0 = t[k]
        if tq <= t0:
            return self.v[k]
        t1 = t[k + 1]
        if tq >= t1:
            return self.v[k + 1]
        theta = (tq - t0) / (t1 - t0)
        return self.v[k] + theta * (self.v[k + 1] - self.v[k])


@dataclass(frozen=True)
class HybridTrajectory:
    """Four phase segments plus the switching schedule they induce."""

    segments: tuple[TrajectorySegment, ...]
    switching_times: tuple[float, float, float]
    switching_states_pre: tuple[np.ndarray, np.ndarray, np.ndarray]

    @property
    def t0(self) -> float:
        return self.segments[0].t_start

    @property
    def tf(self) -> float:
        return self.segments[-1].t_end

    def max_mass_defect(self) -> float:
        worst = 0.0
        for seg in self.segments:
            worst = max(worst, float(np.abs(seg.states.sum(axis=1) - 1.0).max()))
        return worst


@dataclass(frozen=True)
class AdjointTrajectory:
    """Costate samples aligned with the forward segments, plus jump multipliers."""

    lam_segments: tuple[np.ndarray, ...]
    p1: float
    p3: float

    @property
    def p2(self) -> float:
        return 0.0  # controlled switching carries no manifold multiplier


@dataclass(frozen=True)
class CostBreakdown:
    phase_integrals: tuple[float, float, float, float]
    terminal: float

    @property
    def total(self) -> float:
        return float(sum(self.phase_integrals) + self.terminal)


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    cost: float
    control_delta: float
    gap_ts1: float
    gap_ts2: float
    gap_ts3: float
    ts2: float
    p1: float
    p3: float
    alpha: float
    note: str = ""


@dataclass(frozen=True)
class SwitchingReport:
    times: tuple[float, float, float]
    states_pre: tuple[np.ndarray, np.ndarray, np.ndarray]
    multipliers: tuple[float, float, float]
    gaps: tuple[float, float, float]


@dataclass(frozen=True)
class Solution:
    trajectory: HybridTrajectory
    adjoint: AdjointTrajectory
    controls: tuple[ControlProfile, ...]
    cost: CostBreakdown
    hamiltonian_trace: tuple[np.ndarray, ...]
    switching: SwitchingReport
    log: tuple[IterationRecord, ...]
    converged: bool
    boundary_optimum: bool
    iterations: int
    final_control_delta: float

    @property
    def ts2(self) -> float:
        return self.switching.times[1]


# --- forward machinery ---------------------------------------------------------


def forward_pass(
    model: m.EpiModel,
    profiles: Sequence[ControlProfile],
    ts2: float,
    cfg: SolverConfig,
) -> HybridTrajectory:
    """Integrate the full four-phase schedule for given controls and t_s2.

    Phase 1 and 3 end at localized threshold crossings; phase 2 ends at the
    requested t_s2; phase 4 runs out the horizon.
    """
    p1_prof, p2_prof, p3_prof, p4_prof = (_ProfileCursor(pr) for pr in profiles)
    th = model.thresholds
    i1 = model.i_index(1)
    i3 = model.i_index(3)

    def rhs_for(phase, prof):
        return lambda t, x: model.rhs(phase, x, prof(t))

    ev_high = EventSpec(lambda x: float(x[i1] - th.i_high), +1, "I - I_high")
    seg1 = integrate_phase(
        rhs_for(1, p1_prof), model.x0, TimeGrid(model.t0, model.tf, cfg.h),
        control=p1_prof, event=ev_high, phase=1, event_tol=cfg.event_tol,
    )
    ts1 = seg1.t_end
    if ts2 <= ts1:
        raise InfeasibleScheduleError(
            f"t_s2={ts2:.4f} must exceed the detected t_s1={ts1:.4f}"
        )
    if ts2 >= model.tf:
        raise InfeasibleScheduleError(
            f"t_s2={ts2:.4f} must lie before t_f={model.tf:.4f}"
        )

    x2 = m.jump_rto_to_wfh(seg1.states[-1])
    seg2 = integrate_phase(
        rhs_for(2, p2_prof), x2, TimeGrid(ts1, ts2, cfg.h),
        control=p2_prof, phase=2, event_tol=cfg.event_tol,
    )

    x3 = m.jump_wfh_to_protocol(seg2.states[-1])
    ev_low = EventSpec(lambda x: float(x[i3] - th.i_low), -1, "I - I_low")
    seg3 = integrate_phase(
        rhs_for(3, p3_prof), x3, TimeGrid(ts2, model.tf, cfg.h),
        control=p3_prof, event=ev_low, phase=3, event_tol=cfg.event_tol,
    )
    ts3 = seg3.t_end

    x4 = m.jump_protocol_to_rto(seg3.states[-1])
    seg4 = integrate_phase(
        rhs_for(4, p4_prof), x4, TimeGrid(ts3, model.tf, cfg.h),
        control=p4_prof, phase=4, event_tol=cfg.event_tol,
    )
    return HybridTrajectory(
        segments=(seg1, seg2, seg3, seg4),
        switching_times=(ts1, ts2, ts3),
        switching_states_pre=(
            seg1.states[-1].copy(), seg2.states[-1].copy(), seg3.states[-1].copy()
        ),
    )


def quad_nodes(times: np.ndarray, values: np.ndarray) -> float:
    """Composite Simpson over equal-width interval pairs, trapezoid closure."""
    n = len(times) - 1
    total = 0.0
    k = 0
    while k + 2 <= n:
        h1 = times[k + 1] - times[k]
        h2 = times[k + 2] - times[k + 1]
        if abs(h2 - h1) <= 1e-9 * max(h1, h2):
            total += (h1 / 3.0) * (values[k] + 4.0 * values[k + 1] + values[k + 2])
            k += 2
        else:
            total += 0.5 * h1 * (values[k] + values[k + 1])
            k += 1
    if k < n:
        total += 0.5 * (times[k + 1] - times[k]) * (values[k] + values[k + 1])
    return float(total)


def evaluate_cost(model: m.EpiModel, traj: HybridTrajectory) -> CostBreakdown:
    """Per-phase running-cost integrals plus the terminal burden."""
    integrals = []
    for phase, seg in zip((1, 2, 3, 4), traj.segments):
        ell = m._running_cost_batch(
            phase, seg.states, seg.controls, model.phase_weights(phase)
        )
        integrals.append(quad_nodes(seg.times, np.asarray(ell, dtype=float)))
    terminal = m.terminal_cost(traj.segments[-1].states[-1], model.terminal)
    return CostBreakdown(tuple(integrals), terminal)


# --- backward machinery ----------------------------------------------------------


def compute_p(
    model: m.EpiModel,
    phase_before: int,
    x_minus: np.ndarray,
    u_minus: np.ndarray,
    lam_mapped: np.ndarray,
    h_after: float,
) -> float:
    """Manifold multiplier enforcing Hamiltonian continuity at an autonomous switch.

    ``lam_mapped`` is the post-switch costate already pulled back through the
    jump gradient; the returned p solves the linear continuity equation for
    the stored applied control.
    """
    f_minus = model.rhs(phase_before, x_minus, u_minus)
    mdotf = float(f_minus[model.i_index(phase_before)])
    if abs(mdotf) < 1e-10:
        raise TransversalityError(
            f"manifold tangency leaving phase {phase_before}: dI/dt = {mdotf:.3e}"
        )
    h_before0 = m.running_cost(
        phase_before, x_minus, u_minus, model.phase_weights(phase_before)
    ) + float(lam_mapped @ f_minus)
    return (h_after - h_before0) / mdotf


def backward_pass(model: m.EpiModel, traj: HybridTrajectory) -> AdjointTrajectory:
    """Propagate the costate from the terminal condition back to t0."""
    seg1, seg2, seg3, seg4 = traj.segments
    p = model.params

    def rhs(phase):
        w = model.phase_weights(phase)
        return lambda t, lam, x, u: m.adjoint_rhs(phase, x, lam, u, p, w)

    lam_T = m.terminal_costate(seg4.states[-1], model.terminal)
    lam4 = integrate_adjoint(seg4, lam_T, rhs(4))

    h_after_3 = m.hamiltonian(
        4, seg4.states[0], lam4[0], seg4.controls[0], p, model.phase_weights(4)
    )
    lam3_mapped = m.adjoint_jump("q3q1", lam4[0], 0.0)
    p3 = compute_p(model, 3, seg3.states[-1], seg3.controls[-1],
                   lam3_mapped, h_after_3)
    lam3 = integrate_adjoint(seg3, m.adjoint_jump("q3q1", lam4[0], p3), rhs(3))

    lam2_end = m.adjoint_jump("q2q3", lam3[0], 0.0)
    lam2 = integrate_adjoint(seg2, lam2_end, rhs(2))

    h_after_1 = m.hamiltonian(
        2, seg2.states[0], lam2[0], seg2.controls[0], p, model.phase_weights(2)
    )
    lam1_mapped = m.adjoint_jump("q1q2", lam2[0], 0.0)
    p1 = compute_p(model, 1, seg1.states[-1], seg1.controls[-1],
                   lam1_mapped, h_after_1)
    lam1 = integrate_adjoint(seg1, m.adjoint_jump("q1q2", lam2[0], p1), rhs(1))

    return AdjointTrajectory((lam1, lam2, lam3, lam4), p1=p1, p3=p3)


def hamiltonian_gap(
    model: m.EpiModel,
    traj: HybridTrajectory,
    adjoint: AdjointTrajectory,
    at: int,
) -> float:
    """H(just before) - H(just after) at switching boundary ``at`` in {1, 2, 3}."""
    if at not in (1, 2, 3):
        raise ValueError("switching index must be 1, 2 or 3")
    seg_b = traj.segments[at - 1]
    seg_a = traj.segments[at]
    lam_b = adjoint.lam_segments[at - 1]
    lam_a = adjoint.lam_segments[at]
    h_b = m.hamiltonian(at, seg_b.states[-1], lam_b[-1], seg_b.controls[-1],
                        model.params, model.phase_weights(at))
    h_a = m.hamiltonian(at + 1, seg_a.states[0], lam_a[0], seg_a.controls[0],
                        model.params, model.phase_weights(at + 1))
    return h_b - h_a


def update_controls(
    model: m.EpiModel,
    traj: HybridTrajectory,
    adjoint: AdjointTrajectory,
    profiles: Sequence[ControlProfile],
    alpha: float,
) -> tuple[tuple[ControlProfile, ...], float]:
    """Damped move toward the pointwise Hamiltonian minimizer at every node."""
    new_profiles = []
    sup = 0.0
    for phase, seg, lam in zip((1, 2, 3, 4), traj.segments, adjoint.lam_segments):
        w = model.phase_weights(phase)
        u_star = m.minimize_control_batch(phase, seg.states, lam, w, model.bounds)
        u_old = profiles[phase - 1].eval_many(seg.times)
        u_new = (1.0 - alpha) * u_old + alpha * u_star
        np.clip(u_new, 0.0, model.bounds.upper(phase), out=u_new)
        sup = max(sup, float(np.abs(u_new - u_old).max()))
        new_profiles.append(ControlProfile(seg.times, u_new))
    return tuple(new_profiles), sup


def hamiltonian_traces(
    model: m.EpiModel, traj: HybridTrajectory, adjoint: AdjointTrajectory
) -> tuple[np.ndarray, ...]:
    return tuple(
        m.hamiltonian_batch(phase, seg.states, lam, seg.controls,
                            model.params, model.phase_weights(phase))
        for phase, seg, lam in zip((1, 2, 3, 4), traj.segments,
                                   adjoint.lam_segments)
    )


# --- switching-time controller ---------------------------------------------------


@dataclass
class Ts2Controller:
    """Moves t_s2 along the calibrated Hamiltonian-gap direction.

    Marches in damped gap-proportional steps until the gap changes sign, then
    switches to safeguarded false position on the bracket (the midpoint when
    the bracket gaps are symmetric).
    """

    cfg: SolverConfig
    sign: float = 1.0
    eta: float = 0.0
    last: tuple[float, float] | None = None
    bracket: tuple[tuple[float, float], tuple[float, float]] | None = None
    boundary_optimum: bool = False

    def __post_init__(self):
        self.eta = self.cfg.ts2_step

    def seed_bracket(self, a: tuple[float, float], b: tuple[float, float]) -> None:
        if a[1] * b[1] < 0.0:
            self.bracket = (a, b) if a[0] < b[0] else (b, a)

    def _from_bracket(self, ts2: float, gap: float) -> float:
        (ta, ga), (tb, gb) = self.bracket
        if ta < ts2 < tb:
            if (gap < 0.0) == (ga < 0.0):
                ta, ga = ts2, gap
            else:
                tb, gb = ts2, gap
            self.bracket = ((ta, ga), (tb, gb))
        width = tb - ta
        prop = (ta * gb - tb * ga) / (gb - ga)  # false position
        margin = 0.1 * width
        if not ta + margin <= prop <= tb - margin:
            prop = 0.5 * (ta + tb)
        return prop

    def step(self, ts2: float, gap: float, lo: float, hi: float) -> float | None:
        """Next candidate t_s2, or None when no further progress is possible."""
        if gap == 0.0:
            return ts2
        if self.bracket is not None:
            (ta, _), (tb, _) = self.bracket
            if tb - ta < self.cfg.ts2_min_bracket:
                return None
            return self._from_bracket(ts2, gap)
        if self.last is not None and self.last[1] * gap < 0.0:
            self.eta *= 0.5
            self.seed_bracket(self.last, (ts2, gap))
            self.last = (ts2, gap)
            return self._from_bracket(ts2, gap)
        delta = self.eta * self.sign * gap
        mag = min(max(abs(delta), self.cfg.ts2_min_step), self.cfg.ts2_max_step)
        new = ts2 - np.sign(delta) * mag
        new = float(min(max(new, lo), hi))
        if new == ts2:  # pinned at a bound with the step pointing outward
            self.boundary_optimum = True
            return None
        self.last = (ts2, gap)
        return new


# --- solve loop -------------------------------------------------------------------


@dataclass
class _SweepState:
    profiles: tuple[ControlProfile, ...]
    ts2: float
    traj: HybridTrajectory | None = None
    adjoint: AdjointTrajectory | None = None
    cost: CostBreakdown | None = None
    gaps: tuple[float, float, float] = (np.nan, np.nan, np.nan)
    converged: bool = False


def zero_profiles(model: m.EpiModel) -> tuple[ControlProfile, ...]:
    return tuple(ControlProfile.zero(model.control_dim(ph)) for ph in (1, 2, 3, 4))


def max_profiles(model: m.EpiModel) -> tuple[ControlProfile, ...]:
    """Full-capacity constant controls: the strongest-suppression starting point.

    The sweep starts here rather than at zero because the uncontrolled
    epidemic never falls back below the low threshold inside the horizon, so
    a zero-control four-phase schedule is infeasible.
    """
    return tuple(
        ControlProfile.constant(model.bounds.upper(ph)) for ph in (1, 2, 3, 4)
    )


def _first_crossing_time(model: m.EpiModel, cfg: SolverConfig) -> float:
    """t_s1 of the full-capacity first phase; seeds the initial t_s2."""
    prof = ControlProfile.constant(model.bounds.upper(1))
    th = model.thresholds
    i1 = model.i_index(1)
    seg = integrate_phase(
        lambda t, x: model.rhs(1, x, prof(t)),
        model.x0,
        TimeGrid(model.t0, model.tf, cfg.h),
        control=prof,
        event=EventSpec(lambda x: float(x[i1] - th.i_high), +1, "I - I_high"),
        phase=1,
        event_tol=cfg.event_tol,
    )
    return seg.t_end


def _effective_bounds(model: m.EpiModel, cfg: SolverConfig, ts1: float):
    lo_cfg, hi_cfg = cfg.ts2_bounds
    lo = ts1 + 0.1 if lo_cfg is None else max(lo_cfg, ts1 + 0.1)
    hi = min(hi_cfg, model.tf - cfg.h)
    return lo, hi


class _Budget:
    def __init__(self, n: int):
        self.left = n
        self.used = 0

    def take(self) -> bool:
        if self.left <= 0:
            return False
        self.left -= 1
        self.used += 1
        return True


def _inner_fbsm(
    model: m.EpiModel,
    cfg: SolverConfig,
    state: _SweepState,
    budget: _Budget,
    log: list[IterationRecord],
    note: str = "",
) -> _SweepState:
    """Sweep at fixed t_s2 until the control update stalls or budget runs out."""
    alpha = cfg.alpha
    j_prev = None
    profiles = state.profiles
    last_feasible = None
    rejections = 0
    ts2 = state.ts2
    while budget.take():
        try:
            traj = forward_pass(model, profiles, ts2, cfg)
        except NoCrossingError:
            # A control update left the feasible set (threshold no longer
            # reached).  Re-damp from the last feasible profiles instead of
            # aborting; the very first pass has nothing to fall back to.
            if last_feasible is None or rejections >= 8:
                raise
            rejections += 1
            alpha = max(0.5 * alpha, cfg.alpha_min)
            profiles, _ = update_controls(
                model, last_feasible[0], last_feasible[1], last_feasible[2], alpha
            )
            note = "update_rejected"
            continue
        cost = evaluate_cost(model, traj)
        adjoint = backward_pass(model, traj)
        gaps = tuple(hamiltonian_gap(model, traj, adjoint, i) for i in (1, 2, 3))
        new_profiles, delta = update_controls(model, traj, adjoint, profiles, alpha)
        entry_note = note
        note = ""
        if j_prev is not None and cost.total > j_prev + 1e-9:
            alpha = max(0.5 * alpha, cfg.alpha_min)
            entry_note = (entry_note + " " if entry_note else "") + "alpha_halved"
        log.append(IterationRecord(
            iteration=budget.used, cost=cost.total, control_delta=delta,
            gap_ts1=gaps[0], gap_ts2=gaps[1], gap_ts3=gaps[2],
            ts2=ts2, p1=adjoint.p1, p3=adjoint.p3, alpha=alpha, note=entry_note,
        ))
        j_prev = cost.total
        last_feasible = (traj, adjoint, profiles)
        profiles = new_profiles
        if delta <= cfg.tol_control:
            return _SweepState(profiles, ts2, traj, adjoint, cost, gaps, True)
    return _SweepState(profiles, ts2, state.traj, state.adjoint, state.cost,
                       state.gaps, False)


def solve(model: m.EpiModel, cfg: SolverConfig | None = None) -> Solution:
    """Solve the hybrid optimal control problem from a cold start.

    Controls start at full capacity and t_s2 three days after the resulting
    first crossing (both overridable through the config).  Returns the best
    inner-converged iterate when the iteration budget runs out, flagged
    non-converged.
    """
    cfg = cfg or SolverConfig()
    budget = _Budget(cfg.max_outer_iters)
    log: list[IterationRecord] = []

    ts1_seed = _first_crossing_time(model, cfg)
    lo, hi = _effective_bounds(model, cfg, ts1_seed)
    ts2 = cfg.ts2_init if cfg.ts2_init is not None else ts1_seed + cfg.ts2_init_offset
    ts2 = float(min(max(ts2, lo), hi))

    controller = Ts2Controller(cfg)
    state = _SweepState(max_profiles(model), ts2)
    best: _SweepState | None = None
    calibrated = False
    converged = False

    while True:
        state = _inner_fbsm(model, cfg, state, budget, log)
        if not state.converged:
            break  # budget exhausted mid-sweep
        if best is None or state.cost.total < best.cost.total - 1e-12:
            best = state
        gap2 = state.gaps[1]
        if abs(gap2) <= cfg.tol_hgap:
            converged = True
            best = state
            break
        lo, hi = _effective_bounds(model, cfg, state.traj.switching_times[0])
        if not calibrated:
            calibrated = True
            probes = _calibrate_sign(model, cfg, state, controller, budget, log,
                                     lo, hi)
            if probes is not None and probes.cost.total < state.cost.total:
                state = probes
            continue
        nxt = controller.step(state.ts2, gap2, lo, hi)
        if nxt is None or not budget.left:
            break
        if nxt != state.ts2:
            state = _SweepState(state.profiles, nxt)
        else:
            break  # stationary proposal without meeting the gap tolerance

    if best is None:
        best = state
    return _finalize(model, cfg, best, log, converged, controller.boundary_optimum)


def _calibrate_sign(
    model: m.EpiModel,
    cfg: SolverConfig,
    center: _SweepState,
    controller: Ts2Controller,
    budget: _Budget,
    log: list[IterationRecord],
    lo: float,
    hi: float,
) -> _SweepState | None:
    """Probe J at t_s2 +- delta to orient the gap-descent direction.

    Also seeds the bracket immediately when the probes straddle the optimum.
    """
    delta = cfg.calibration_delta
    t_p = min(center.ts2 + delta, hi)
    t_m = max(center.ts2 - delta, lo)
    if t_p <= t_m:
        return None
    probe_p = _inner_fbsm(model, cfg, _SweepState(center.profiles, t_p), budget,
                          log, note="calibrate+")
    probe_m = _inner_fbsm(model, cfg, _SweepState(probe_p.profiles, t_m), budget,
                          log, note="calibrate-")
    if not (probe_p.converged and probe_m.converged):
        return None
    fd = (probe_p.cost.total - probe_m.cost.total) / (t_p - t_m)
    gap_c = center.gaps[1]
    controller.sign = 1.0 if fd * gap_c >= 0.0 else -1.0
    controller.seed_bracket((t_m, probe_m.gaps[1]), (t_p, probe_p.gaps[1]))
    controller.last = (center.ts2, gap_c)
    return min((probe_p, probe_m), key=lambda s: s.cost.total)


def _finalize(
    model: m.EpiModel,
    cfg: SolverConfig,
    state: _SweepState,
    log: list[IterationRecord],
    converged: bool,
    boundary_optimum: bool,
) -> Solution:
    """Recompute a self-consistent sweep for the returned profiles and t_s2."""
    traj = forward_pass(model, state.profiles, state.ts2, cfg)
    cost = evaluate_cost(model, traj)
    adjoint = backward_pass(model, traj)
    gaps = tuple(hamiltonian_gap(model, traj, adjoint, i) for i in (1, 2, 3))
    traces = hamiltonian_traces(model, traj, adjoint)
    report = SwitchingReport(
        times=traj.switching_times,
        states_pre=traj.switching_states_pre,
        multipliers=(adjoint.p1, 0.0, adjoint.p3),
        gaps=gaps,
    )
    final_delta = log[-1].control_delta if log else float("nan")
    return Solution(
        trajectory=traj,
        adjoint=adjoint,
        controls=state.profiles,
        cost=cost,
        hamiltonian_trace=traces,
        switching=report,
        log=tuple(log),
        converged=converged,
        boundary_optimum=boundary_optimum,
        iterations=len(log),
        final_control_delta=final_delta,
    )


def simulate(
    model: m.EpiModel,
    cfg: SolverConfig | None = None,
    profiles: Sequence[ControlProfile] | None = None,
    ts2: float | None = None,
) -> Solution:
    """Open-loop run: one forward pass and cost evaluation, no optimization.

    The backward pass still runs so the artifact set (adjoints, Hamiltonians,
    multipliers) is populated for the given controls.
    """
    cfg = cfg or SolverConfig()
    profiles = tuple(profiles) if profiles is not None else zero_profiles(model)
    if ts2 is None:
        ts2 = _first_crossing_time(model, cfg) + cfg.ts2_init_offset
    state = _SweepState(profiles, float(ts2))
    return _finalize(model, cfg, state, [], converged=True, boundary_optimum=False)


@dataclass(frozen=True)
class GridSearchResult:
    ts2_values: np.ndarray
    costs: np.ndarray  # nan where the candidate failed
    gaps: np.ndarray
    reasons: tuple[str, ...]
    best_index: int
    best_ts2: float


def grid_search_ts2(
    model: m.EpiModel,
    cfg: SolverConfig,
    lo: float,
    hi: float,
    n: int,
    base_profiles: Sequence[ControlProfile] | None = None,
) -> GridSearchResult:
    """Brute-force oracle: inner-converged cost over a uniform t_s2 grid.

    Candidates are independent (each warm-starts from the same base
    profiles), so results do not depend on evaluation order.
    """
    if n < 1:
        raise ValueError("grid needs at least one candidate")
    if not lo < hi and n > 1:
        raise ValueError(f"invalid range [{lo}, {hi}]")
    base = tuple(base_profiles) if base_profiles is not None else None
    ts2_values = np.linspace(lo, hi, n) if n > 1 else np.array([lo])
    costs = np.full(n, np.nan)
    gaps = np.full(n, np.nan)
    reasons = []
    for i, ts2 in enumerate(ts2_values):
        budget = _Budget(cfg.max_outer_iters)
        log: list[IterationRecord] = []
        profiles = base if base is not None else max_profiles(model)
        try:
            state = _inner_fbsm(
                model, cfg, _SweepState(profiles, float(ts2)), budget, log
            )
            if not state.converged:
                reasons.append("not_converged")
                continue
            costs[i] = state.cost.total
            gaps[i] = state.gaps[1]
            reasons.append("")
        except (NoCrossingError, InfeasibleScheduleError, TransversalityError) as e:
            reasons.append(type(e).__name__)
    if np.all(np.isnan(costs)):
        raise InfeasibleScheduleError(
            f"no feasible t_s2 candidate in [{lo:.4f}, {hi:.4f}]"
        )
    best = int(np.nanargmin(costs))
    return GridSearchResult(
        ts2_values=ts2_values, costs=costs, gaps=gaps, reasons=tuple(reasons),
        best_index=best, best_ts2=float(ts2_values[best]),
    )


@dataclass(frozen=True)
class GradientCheck:
    component: str
    adjoint_value: float
    fd_value: float
    valid: bool
    reason: str = ""

    @property
    def rel_error(self) -> float:
        scale = max(abs(self.adjoint_value), abs(self.fd_value))
        if scale == 0.0:
            return 0.0
        return abs(self.adjoint_value - self.fd_value) / scale


def gradient_check_x0(
    model: m.EpiModel,
    cfg: SolverConfig,
    solution: Solution,
    component: str,
    delta: float,
) -> GradientCheck:
    """Compare lambda(t0) sensitivities against central differences of J.

    The perturbation moves mass between the chosen compartment and R, keeping
    the population closed; controls and t_s2 stay frozen while the autonomous
    events remain active.
    """
    if delta <= 0.0:
        raise ValueError("perturbation delta must be positive")
    labels = m.RTO_LABELS
    if component not in labels:
        raise ValueError(f"component must be one of {labels}")
    c = labels.index(component)
    r = labels.index("R")
    direction = np.zeros(6)
    direction[c] = 1.0
    direction[r] = -1.0

    lam0 = solution.adjoint.lam_segments[0][0]
    adjoint_value = float(lam0[c] - lam0[r])

    costs = []
    for sgn in (+1.0, -1.0):
        x0 = np.asarray(model.x0) + sgn * delta * direction
        perturbed = replace(model, x0=x0)
        try:
            traj = forward_pass(perturbed, solution.controls, solution.ts2, cfg)
        except (NoCrossingError, InfeasibleScheduleError) as e:
            return GradientCheck(component, adjoint_value, float("nan"),
                                 valid=False, reason=type(e).__name__)
        costs.append(evaluate_cost(perturbed, traj).total)
    fd_value = (costs[0] - costs[1]) / (2.0 * delta)
    return GradientCheck(component, adjoint_value, fd_value, valid=True)
