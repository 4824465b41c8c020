"""Four-phase epidemic model: dynamics, costs, control laws and adjoints.

Compartments are population fractions of a closed unit population; time is in
days.  The four phases visit three mode layouts:

* phase 1 and 4 (``rto``):       [V, S, E, I, J, R],                 1 control  [u_j]
* phase 2 (``wfh``):             [H_v, H_s, V, S, E, I, J, R],       3 controls [u_j, u_sigma_v, u_sigma_s]
* phase 3 (``protocol``):        [H_s, V, S, E, I, J, R],            3 controls [u_j, u_v, u_sigma_s]

Every flow moves mass between compartments, so all three vector fields sum to
zero componentwise and the jump maps conserve total mass.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .hybrid import (
    HybridSystemDefinition,
    ModeId,
    ModeSpec,
    TransitionKind,
    TransitionSpec,
)

RTO = ModeId(1, "rto")
WFH = ModeId(2, "wfh")
PROTOCOL = ModeId(3, "protocol")

RTO_LABELS = ("V", "S", "E", "I", "J", "R")
WFH_LABELS = ("H_v", "H_s", "V", "S", "E", "I", "J", "R")
PROTOCOL_LABELS = ("H_s", "V", "S", "E", "I", "J", "R")

# Mode of each of the four scheduled phases.
PHASE_MODE = {1: RTO, 2: WFH, 3: PROTOCOL, 4: RTO}
PHASE_LABELS = {1: RTO_LABELS, 2: WFH_LABELS, 3: PROTOCOL_LABELS, 4: RTO_LABELS}
# Index of the infectious compartment in each mode layout.
I_INDEX = {RTO.id: 3, WFH.id: 5, PROTOCOL.id: 4}
CONTROL_NAMES = {
    1: ("u_j",),
    2: ("u_j", "u_sigma_v", "u_sigma_s"),
    3: ("u_j", "u_v", "u_sigma_s"),
    4: ("u_j",),
}


@dataclass(frozen=True)
class EpiParams:
    """Transmission and progression rates (1/day)."""

    beta_v: float = 0.18
    beta_s: float = 0.30
    kappa: float = 0.20
    gamma: float = 0.13
    delta: float = 0.18
    omega: float = 0.02

    def validate(self) -> list[str]:
        bad = []
        for name, v in self.__dict__.items():
            if not np.isfinite(v) or v < 0:
                bad.append(f"params.{name} must be finite and nonnegative, got {v!r}")
        return bad


@dataclass(frozen=True)
class PhaseWeights:
    """Running-cost weights for one phase; unused weights stay zero."""

    a_I: float = 0.0
    a_J: float = 0.0
    a_E: float = 0.0
    a_Hv: float = 0.0
    a_Hs: float = 0.0
    c: float = 0.0
    b_j: float = 0.0
    b_sigma_v: float = 0.0
    b_sigma_s: float = 0.0
    b_v: float = 0.0


@dataclass(frozen=True)
class TerminalWeights:
    """Linear penalties on residual E, I, J at the end of the horizon."""

    k_E: float = 1500.0
    k_I: float = 2000.0
    k_J: float = 800.0


@dataclass(frozen=True)
class ControlBounds:
    """Upper control limits per phase (all lower bounds are zero)."""

    u_j_max: float = 0.04
    u_sigma_v_max: float = 0.25
    u_sigma_s_wfh_max: float = 0.25
    u_v_max: float = 0.05
    u_sigma_s_protocol_max: float = 0.1

    def upper(self, phase: int) -> np.ndarray:
        if phase in (1, 4):
            return np.array([self.u_j_max])
        if phase == 2:
            return np.array([self.u_j_max, self.u_sigma_v_max, self.u_sigma_s_wfh_max])
        if phase == 3:
            return np.array([self.u_j_max, self.u_v_max, self.u_sigma_s_protocol_max])
        raise ValueError(f"unknown phase {phase}")


@dataclass(frozen=True)
class Thresholds:
    """Infection levels triggering the autonomous switches."""

    i_high: float = 0.043
    i_low: float = 0.033

    def validate(self) -> list[str]:
        if not 0.0 < self.i_low < self.i_high < 1.0:
            return [
                f"thresholds must satisfy 0 < i_low < i_high < 1, "
                f"got i_low={self.i_low!r}, i_high={self.i_high!r}"
            ]
        return []


def paper_weights() -> tuple[PhaseWeights, PhaseWeights, PhaseWeights, PhaseWeights]:
    """Published phase-dependent cost weights (dashes in the table mean zero)."""
    return (
        PhaseWeights(a_I=400.0, a_J=120.0, b_j=100.0),
        PhaseWeights(a_I=1200.0, a_J=150.0, a_Hv=40.0, a_Hs=60.0, c=5.0,
                     b_j=100.0, b_sigma_v=200.0, b_sigma_s=180.0),
        PhaseWeights(a_I=1100.0, a_J=140.0, a_Hs=80.0, c=2.5,
                     b_j=100.0, b_v=160.0, b_sigma_s=120.0),
        PhaseWeights(a_I=950.0, a_J=100.0, a_E=100.0, b_j=60.0),
    )


PAPER_X0 = np.array([0.10, 0.74, 0.05, 0.01, 0.05, 0.05])
PAPER_HORIZON = (0.0, 40.0)


# --- vector fields -----------------------------------------------------------

def f_rto(x: np.ndarray, u_j: float, p: EpiParams) -> np.ndarray:
    """RTO dynamics on [V, S, E, I, J, R]."""
    V, S, E, I, J, R = x
    inf_v = p.beta_v * V * I
    inf_s = p.beta_s * S * I
    return np.array([
        -inf_v,
        -inf_s + p.omega * R,
        inf_v + inf_s - p.kappa * E,
        p.kappa * E - p.gamma * I - u_j * I,
        u_j * I - p.delta * J,
        p.gamma * I + p.delta * J - p.omega * R,
    ])


def f_wfh(x: np.ndarray, u: np.ndarray, p: EpiParams) -> np.ndarray:
    """WFH dynamics on [H_v, H_s, V, S, E, I, J, R]; u = [u_j, u_sigma_v, u_sigma_s]."""
    H_v, H_s, V, S, E, I, J, R = x
    u_j, u_sv, u_ss = u
    inf_v = p.beta_v * V * I
    inf_s = p.beta_s * S * I
    return np.array([
        u_sv * V,
        u_ss * S,
        -inf_v - u_sv * V,
        -inf_s - u_ss * S + p.omega * R,
        inf_v + inf_s - p.kappa * E,
        p.kappa * E - p.gamma * I - u_j * I,
        u_j * I - p.delta * J,
        p.gamma * I + p.delta * J - p.omega * R,
    ])


def f_protocol(x: np.ndarray, u: np.ndarray, p: EpiParams) -> np.ndarray:
    """Protocol dynamics on [H_s, V, S, E, I, J, R]; u = [u_j, u_v, u_sigma_s]."""
    H_s, V, S, E, I, J, R = x
    u_j, u_v, u_ss = u
    inf_v = p.beta_v * V * I
    inf_s = p.beta_s * S * I
    return np.array([
        u_ss * S - u_v * H_s,
        -inf_v + u_v * H_s,
        -inf_s - u_ss * S + p.omega * R,
        inf_v + inf_s - p.kappa * E,
        p.kappa * E - p.gamma * I - u_j * I,
        u_j * I - p.delta * J,
        p.gamma * I + p.delta * J - p.omega * R,
    ])


def phase_rhs(phase: int, x: np.ndarray, u: np.ndarray, p: EpiParams) -> np.ndarray:
    """Uniform phase interface: control is always an array."""
    if phase in (1, 4):
        return f_rto(x, float(u[0]), p)
    if phase == 2:
        return f_wfh(x, u, p)
    if phase == 3:
        return f_protocol(x, u, p)
    raise ValueError(f"unknown phase {phase}")


# --- jump maps and manifolds -------------------------------------------------

def jump_rto_to_wfh(x: np.ndarray) -> np.ndarray:
    """Open the WFH compartments empty; everything else carries over."""
    x = np.asarray(x, dtype=float)
    if x.shape != (6,):
        raise ValueError(f"rto state must have 6 components, got {x.shape}")
    return np.concatenate(([0.0, 0.0], x))


def jump_wfh_to_protocol(x: np.ndarray) -> np.ndarray:
    """Vaccinated WFH individuals merge into V; H_s is retained."""
    x = np.asarray(x, dtype=float)
    if x.shape != (8,):
        raise ValueError(f"wfh state must have 8 components, got {x.shape}")
    H_v, H_s, V, S, E, I, J, R = x
    return np.array([H_s, V + H_v, S, E, I, J, R])


def jump_protocol_to_rto(x: np.ndarray) -> np.ndarray:
    """Remaining WFH individuals return to the susceptible pool."""
    x = np.asarray(x, dtype=float)
    if x.shape != (7,):
        raise ValueError(f"protocol state must have 7 components, got {x.shape}")
    H_s, V, S, E, I, J, R = x
    return np.array([V, S + H_s, E, I, J, R])


# --- costs and Hamiltonians --------------------------------------------------

def running_cost(phase: int, x: np.ndarray, u: np.ndarray, w: PhaseWeights) -> float:
    """Instantaneous cost: linear state burden plus quadratic control effort."""
    return float(_running_cost_batch(phase, np.asarray(x), np.asarray(u), w))


def _running_cost_batch(phase: int, x, u, w: PhaseWeights):
    # x: (..., d), u: (..., m); broadcasts over leading axes.
    if phase == 1:
        return w.a_I * x[..., 3] + w.a_J * x[..., 4] + w.b_j * u[..., 0] ** 2
    if phase == 2:
        return (
            w.a_I * x[..., 5] + w.a_J * x[..., 6]
            + w.a_Hv * x[..., 0] + w.a_Hs * x[..., 1] + w.c
            + w.b_j * u[..., 0] ** 2
            + w.b_sigma_v * u[..., 1] ** 2
            + w.b_sigma_s * u[..., 2] ** 2
        )
    if phase == 3:
        return (
            w.a_I * x[..., 4] + w.a_J * x[..., 5]
            + w.a_Hs * x[..., 0] + w.c
            + w.b_j * u[..., 0] ** 2
            + w.b_v * u[..., 1] ** 2
            + w.b_sigma_s * u[..., 2] ** 2
        )
    if phase == 4:
        return (
            w.a_E * x[..., 2] + w.a_I * x[..., 3] + w.a_J * x[..., 4]
            + w.b_j * u[..., 0] ** 2
        )
    raise ValueError(f"unknown phase {phase}")


def terminal_cost(x_f: np.ndarray, k: TerminalWeights) -> float:
    """Residual disease burden penalty on the final RTO state."""
    x_f = np.asarray(x_f, dtype=float)
    return float(k.k_E * x_f[2] + k.k_I * x_f[3] + k.k_J * x_f[4])


def terminal_costate(x_f: np.ndarray, k: TerminalWeights) -> np.ndarray:
    """Gradient of the terminal cost; independent of the state by linearity."""
    return np.array([0.0, 0.0, k.k_E, k.k_I, k.k_J, 0.0])


def hamiltonian(phase: int, x: np.ndarray, lam: np.ndarray, u: np.ndarray,
                p: EpiParams, w: PhaseWeights) -> float:
    """Phase Hamiltonian: running cost plus costate-weighted drift."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    lam = np.asarray(lam, dtype=float)
    return running_cost(phase, x, u, w) + float(lam @ phase_rhs(phase, x, u, p))


def hamiltonian_batch(phase: int, X: np.ndarray, L: np.ndarray, U: np.ndarray,
                      p: EpiParams, w: PhaseWeights) -> np.ndarray:
    """Hamiltonian at every sample of aligned state/costate/control arrays."""
    F = np.stack([phase_rhs(phase, x, u, p) for x, u in zip(X, U)])
    return _running_cost_batch(phase, X, U, w) + np.einsum("nd,nd->n", L, F)


# --- pointwise Hamiltonian minimization --------------------------------------

def required_positive_weights(phase: int) -> tuple[str, ...]:
    """Control-effort weights that must be strictly positive in this phase."""
    if phase in (1, 4):
        return ("b_j",)
    if phase == 2:
        return ("b_j", "b_sigma_v", "b_sigma_s")
    if phase == 3:
        return ("b_j", "b_v", "b_sigma_s")
    raise ValueError(f"unknown phase {phase}")


def check_weights(weights: tuple[PhaseWeights, ...]) -> list[str]:
    """Configuration-time validation of the per-phase weight bundles."""
    problems = []
    for phase, w in enumerate(weights, start=1):
        for name, v in w.__dict__.items():
            if not np.isfinite(v) or v < 0:
                problems.append(
                    f"weights.phase{phase}.{name} must be finite and nonnegative, "
                    f"got {v!r}"
                )
        for name in required_positive_weights(phase):
            if getattr(w, name) <= 0.0:
                problems.append(
                    f"weights.phase{phase}.{name} must be strictly positive "
                    f"(it divides the control law)"
                )
        for name in _unused_weights(phase):
            if getattr(w, name) != 0.0:
                problems.append(
                    f"weights.phase{phase}.{name} is not used in phase {phase} "
                    f"and must stay zero"
                )
    return problems


def _unused_weights(phase: int) -> tuple[str, ...]:
    used = {
        1: ("a_I", "a_J", "b_j"),
        2: ("a_I", "a_J", "a_Hv", "a_Hs", "c", "b_j", "b_sigma_v", "b_sigma_s"),
        3: ("a_I", "a_J", "a_Hs", "c", "b_j", "b_v", "b_sigma_s"),
        4: ("a_I", "a_J", "a_E", "b_j"),
    }[phase]
    return tuple(n for n in PhaseWeights().__dict__ if n not in used)


def minimize_control(phase: int, x: np.ndarray, lam: np.ndarray,
                     w: PhaseWeights, bounds: ControlBounds) -> np.ndarray:
    """Closed-form clipped minimizer of the phase Hamiltonian in the control."""
    U = minimize_control_batch(
        phase, np.asarray(x, dtype=float)[None, :],
        np.asarray(lam, dtype=float)[None, :], w, bounds
    )
    return U[0]


def minimize_control_batch(phase: int, X: np.ndarray, L: np.ndarray,
                           w: PhaseWeights, bounds: ControlBounds) -> np.ndarray:
    """Vectorized clipped control law over aligned state/costate samples."""
    hi = bounds.upper(phase)
    n = X.shape[0]
    U = np.empty((n, hi.size))
    if phase in (1, 4):
        U[:, 0] = (L[:, 3] - L[:, 4]) * X[:, 3] / (2.0 * w.b_j)
    elif phase == 2:
        U[:, 0] = (L[:, 5] - L[:, 6]) * X[:, 5] / (2.0 * w.b_j)
        U[:, 1] = (L[:, 2] - L[:, 0]) * X[:, 2] / (2.0 * w.b_sigma_v)
        U[:, 2] = (L[:, 3] - L[:, 1]) * X[:, 3] / (2.0 * w.b_sigma_s)
    elif phase == 3:
        U[:, 0] = (L[:, 4] - L[:, 5]) * X[:, 4] / (2.0 * w.b_j)
        U[:, 1] = (L[:, 0] - L[:, 1]) * X[:, 0] / (2.0 * w.b_v)
        U[:, 2] = (L[:, 2] - L[:, 0]) * X[:, 2] / (2.0 * w.b_sigma_s)
    else:
        raise ValueError(f"unknown phase {phase}")
    np.clip(U, 0.0, hi, out=U)
    return U


# --- adjoint dynamics and jumps ----------------------------------------------

def adjoint_rhs(phase: int, x: np.ndarray, lam: np.ndarray, u: np.ndarray,
                p: EpiParams, w: PhaseWeights) -> np.ndarray:
    """Costate drift -dH/dx for the applied (already clipped) control."""
    if phase in (1, 4):
        V, S, E, I, J, R = x
        lV, lS, lE, lI, lJ, lR = lam
        u_j = float(u[0])
        return np.array([
            p.beta_v * I * (lV - lE),
            p.beta_s * I * (lS - lE),
            -w.a_E + p.kappa * (lE - lI),
            -w.a_I + p.beta_v * V * (lV - lE) + p.beta_s * S * (lS - lE)
            + (p.gamma + u_j) * lI - u_j * lJ - p.gamma * lR,
            -w.a_J + p.delta * (lJ - lR),
            p.omega * (lR - lS),
        ])
    if phase == 2:
        H_v, H_s, V, S, E, I, J, R = x
        lHv, lHs, lV, lS, lE, lI, lJ, lR = lam
        u_j, u_sv, u_ss = u
        return np.array([
            -w.a_Hv,
            -w.a_Hs,
            p.beta_v * I * (lV - lE) + u_sv * (lV - lHv),
            p.beta_s * I * (lS - lE) + u_ss * (lS - lHs),
            p.kappa * (lE - lI),
            -w.a_I + p.beta_v * V * (lV - lE) + p.beta_s * S * (lS - lE)
            + (p.gamma + u_j) * lI - u_j * lJ - p.gamma * lR,
            -w.a_J + p.delta * (lJ - lR),
            p.omega * (lR - lS),
        ])
    if phase == 3:
        H_s, V, S, E, I, J, R = x
        lHs, lV, lS, lE, lI, lJ, lR = lam
        u_j, u_v, u_ss = u
        return np.array([
            -w.a_Hs + u_v * (lHs - lV),
            p.beta_v * I * (lV - lE),
            p.beta_s * I * (lS - lE) + u_ss * (lS - lHs),
            p.kappa * (lE - lI),
            -w.a_I + p.beta_v * V * (lV - lE) + p.beta_s * S * (lS - lE)
            + (p.gamma + u_j) * lI - u_j * lJ - p.gamma * lR,
            -w.a_J + p.delta * (lJ - lR),
            p.omega * (lR - lS),
        ])
    raise ValueError(f"unknown phase {phase}")


def adjoint_jump(transition: str, lam_plus: np.ndarray, p_i: float) -> np.ndarray:
    """Pre-switch costate from the post-switch one plus the manifold multiplier.

    ``transition`` is one of ``"q1q2"``, ``"q2q3"``, ``"q3q1"``; ``p_i`` must be
    zero on the controlled transition ``"q2q3"``.
    """
    lam_plus = np.asarray(lam_plus, dtype=float)
    if transition == "q1q2":
        if lam_plus.shape != (8,):
            raise ValueError("q1q2 expects the 8-component wfh costate")
        lam = lam_plus[2:].copy()
        lam[3] += p_i
        return lam
    if transition == "q2q3":
        if p_i != 0.0:
            raise ValueError("controlled switching q2q3 requires p_i = 0")
        if lam_plus.shape != (7,):
            raise ValueError("q2q3 expects the 7-component protocol costate")
        lHs, lV, lS, lE, lI, lJ, lR = lam_plus
        return np.array([lV, lHs, lV, lS, lE, lI, lJ, lR])
    if transition == "q3q1":
        if lam_plus.shape != (6,):
            raise ValueError("q3q1 expects the 6-component rto costate")
        lV, lS, lE, lI, lJ, lR = lam_plus
        lam = np.array([lS, lV, lS, lE, lI, lJ, lR])
        lam[4] += p_i
        return lam
    raise ValueError(f"unknown transition {transition!r}")


# --- assembled system ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EpiModel:
    """Fully parameterized problem instance: structure, weights and horizon."""

    params: EpiParams
    weights: tuple[PhaseWeights, PhaseWeights, PhaseWeights, PhaseWeights]
    terminal: TerminalWeights
    bounds: ControlBounds
    thresholds: Thresholds
    x0: np.ndarray
    t0: float
    tf: float

    def __post_init__(self):
        x0 = np.asarray(self.x0, dtype=float).copy()
        x0.setflags(write=False)
        object.__setattr__(self, "x0", x0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EpiModel):
            return NotImplemented
        return (
            self.params == other.params
            and self.weights == other.weights
            and self.terminal == other.terminal
            and self.bounds == other.bounds
            and self.thresholds == other.thresholds
            and np.array_equal(self.x0, other.x0)
            and self.t0 == other.t0
            and self.tf == other.tf
        )

    def validate(self) -> list[str]:
        problems = self.params.validate()
        problems += check_weights(self.weights)
        problems += self.thresholds.validate()
        for name, v in self.terminal.__dict__.items():
            if not np.isfinite(v) or v < 0:
                problems.append(f"terminal.{name} must be finite and nonnegative")
        for name, v in self.bounds.__dict__.items():
            if not np.isfinite(v) or v <= 0:
                problems.append(f"bounds.{name} must be strictly positive")
        if self.x0.shape != (6,):
            problems.append("x0 must have 6 components (V, S, E, I, J, R)")
        else:
            if np.any(self.x0 < 0):
                problems.append("x0 components must be nonnegative")
            if abs(float(self.x0.sum()) - 1.0) > 1e-9:
                problems.append(
                    f"x0 must sum to 1 (closed population), "
                    f"got {float(self.x0.sum()):.12g}"
                )
        if not self.t0 < self.tf:
            problems.append(f"horizon must satisfy t0 < tf, got ({self.t0}, {self.tf})")
        return problems

    def phase_weights(self, phase: int) -> PhaseWeights:
        return self.weights[phase - 1]

    def rhs(self, phase: int, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        return phase_rhs(phase, x, u, self.params)

    def state_dim(self, phase: int) -> int:
        return len(PHASE_LABELS[phase])

    def control_dim(self, phase: int) -> int:
        return len(CONTROL_NAMES[phase])

    def i_index(self, phase: int) -> int:
        return I_INDEX[PHASE_MODE[phase].id]

    def with_weights(self, **kw) -> "EpiModel":
        return replace(self, **kw)


def paper_model() -> EpiModel:
    """The published experiment: parameters, weights, thresholds and horizon."""
    return EpiModel(
        params=EpiParams(),
        weights=paper_weights(),
        terminal=TerminalWeights(),
        bounds=ControlBounds(),
        thresholds=Thresholds(),
        x0=PAPER_X0,
        t0=PAPER_HORIZON[0],
        tf=PAPER_HORIZON[1],
    )


def build_system(model: EpiModel) -> HybridSystemDefinition:
    """Wire the model into the generic hybrid-system container."""
    p = model.params
    th = model.thresholds
    zeros1 = np.zeros(1)
    zeros3 = np.zeros(3)
    modes = (
        ModeSpec(RTO, 6, 1, zeros1, np.array([model.bounds.u_j_max]), RTO_LABELS),
        ModeSpec(WFH, 8, 3, zeros3, model.bounds.upper(2), WFH_LABELS),
        ModeSpec(PROTOCOL, 7, 3, zeros3, model.bounds.upper(3), PROTOCOL_LABELS),
    )
    grad_q1 = np.zeros(6)
    grad_q1[I_INDEX[RTO.id]] = 1.0
    grad_q3 = np.zeros(7)
    grad_q3[I_INDEX[PROTOCOL.id]] = 1.0
    transitions = (
        TransitionSpec(
            RTO, WFH, TransitionKind.AUTONOMOUS, jump_rto_to_wfh,
            manifold=lambda x: float(x[I_INDEX[RTO.id]] - th.i_high),
            manifold_gradient=grad_q1, crossing_direction=+1,
        ),
        TransitionSpec(WFH, PROTOCOL, TransitionKind.CONTROLLED,
                       jump_wfh_to_protocol),
        TransitionSpec(
            PROTOCOL, RTO, TransitionKind.AUTONOMOUS, jump_protocol_to_rto,
            manifold=lambda x: float(x[I_INDEX[PROTOCOL.id]] - th.i_low),
            manifold_gradient=grad_q3, crossing_direction=-1,
        ),
    )
    return HybridSystemDefinition(
        modes=modes,
        transitions=transitions,
        vector_fields={
            RTO.id: lambda x, u: f_rto(x, float(u[0]), p),
            WFH.id: lambda x, u: f_wfh(x, u, p),
            PROTOCOL.id: lambda x, u: f_protocol(x, u, p),
        },
        running_costs={
            # Phase 4 is the general RTO form; phase-1 weights have a_E = 0,
            # so it reproduces the first-phase cost exactly.
            RTO.id: lambda x, u, w: running_cost(4, x, u, w),
            WFH.id: lambda x, u, w: running_cost(2, x, u, w),
            PROTOCOL.id: lambda x, u, w: running_cost(3, x, u, w),
        },
        adjoint_fields={
            RTO.id: lambda x, lam, u, w: adjoint_rhs(4, x, lam, u, p, w),
            WFH.id: lambda x, lam, u, w: adjoint_rhs(2, x, lam, u, p, w),
            PROTOCOL.id: lambda x, lam, u, w: adjoint_rhs(3, x, lam, u, p, w),
        },
        control_minimizers={
            RTO.id: lambda x, lam, w: minimize_control(1, x, lam, w, model.bounds),
            WFH.id: lambda x, lam, w: minimize_control(2, x, lam, w, model.bounds),
            PROTOCOL.id: lambda x, lam, w: minimize_control(3, x, lam, w, model.bounds),
        },
        terminal_cost=lambda x: terminal_cost(x, model.terminal),
    )
