"""Model-level oracles: dynamics, costs, control laws, adjoints, jumps."""

import numpy as np
import pytest

from hocp.model import (
    ControlBounds,
    EpiParams,
    PhaseWeights,
    TerminalWeights,
    Thresholds,
    adjoint_jump,
    adjoint_rhs,
    check_weights,
    f_protocol,
    f_rto,
    f_wfh,
    hamiltonian,
    minimize_control,
    paper_model,
    paper_weights,
    phase_rhs,
    running_cost,
    terminal_cost,
    terminal_costate,
)

P = EpiParams()
W1, W2, W3, W4 = paper_weights()
BOUNDS = ControlBounds()
X0 = np.array([0.10, 0.74, 0.05, 0.01, 0.05, 0.05])

PHASE_DIM = {1: 6, 2: 8, 3: 7, 4: 6}


def random_state(rng, phase):
    x = rng.uniform(0.0, 1.0, PHASE_DIM[phase])
    return x / x.sum()


def random_control(rng, phase):
    hi = BOUNDS.upper(phase)
    return rng.uniform(0.0, 1.0, hi.size) * hi


# --- vector fields ----------------------------------------------------------------


def test_f_rto_on_initial_condition():
    # independent hand evaluation of the printed right-hand side
    expected = [-0.00018, -0.00122, -0.0076, 0.0087, -0.009, 0.0093]
    np.testing.assert_allclose(f_rto(X0, 0.0, P), expected, atol=1e-15)


def test_f_rto_no_infection_pressure_when_i_zero(rng):
    for _ in range(10):
        x = random_state(rng, 1)
        x[3] = 0.0
        out = f_rto(x, 0.0, P)
        assert out[0] == 0.0
        expected = [0.0, P.omega * x[5], -P.kappa * x[2],
                    P.kappa * x[2], -P.delta * x[4],
                    P.delta * x[4] - P.omega * x[5]]
        np.testing.assert_allclose(out, expected, atol=1e-15)


def test_f_wfh_reduces_to_rto_when_wfh_flows_off(rng):
    for _ in range(20):
        x6 = random_state(rng, 1)
        x8 = np.concatenate(([0.3, 0.2], x6))
        u_j = rng.uniform(0.0, 0.04)
        out = f_wfh(x8, np.array([u_j, 0.0, 0.0]), P)
        assert out[0] == 0.0 and out[1] == 0.0
        np.testing.assert_allclose(out[2:], f_rto(x6, u_j, P), atol=1e-15)


def test_f_wfh_single_term_flows():
    x = np.zeros(8)
    x[2] = 0.1  # V
    out = f_wfh(x, np.array([0.0, 0.25, 0.0]), P)
    assert out[0] == pytest.approx(0.025)


def test_f_protocol_vaccination_transfer():
    x = np.zeros(7)
    x[0] = 0.2  # H_s
    out = f_protocol(x, np.array([0.0, 0.05, 0.0]), P)
    assert out[0] == pytest.approx(-0.01)
    assert out[1] == pytest.approx(+0.01)
    out0 = f_protocol(x, np.zeros(3), P)
    assert out0[0] == 0.0


@pytest.mark.parametrize("phase", [1, 2, 3, 4])
def test_mass_conservation_of_dynamics(phase, rng):
    for _ in range(100):
        x = random_state(rng, phase)
        u = random_control(rng, phase)
        assert abs(phase_rhs(phase, x, u, P).sum()) < 1e-12


# --- costs ------------------------------------------------------------------------


def test_running_cost_phase1_on_initial_condition():
    assert running_cost(1, X0, np.array([0.0]), W1) == pytest.approx(10.0)


def test_running_cost_phase2_constant_only():
    assert running_cost(2, np.zeros(8), np.zeros(3), W2) == pytest.approx(5.0)


def test_running_cost_phase4_control_effort():
    assert running_cost(4, np.zeros(6), np.array([0.04]), W4) == \
        pytest.approx(0.096)


def test_terminal_cost_paper_terminal_state():
    x = np.array([0.234, 0.490, 0.030, 0.033, 0.007, 0.206])
    assert terminal_cost(x, TerminalWeights()) == pytest.approx(116.6)


def test_terminal_cost_linearity(rng):
    k = TerminalWeights()
    assert terminal_cost(np.zeros(6), k) == 0.0
    x = random_state(rng, 1)
    assert terminal_cost(2.0 * x, k) == pytest.approx(2.0 * terminal_cost(x, k))


def test_paper_weight_table():
    assert (W1.a_I, W2.a_I, W3.a_I, W4.a_I) == (400, 1200, 1100, 950)
    assert (W1.a_J, W2.a_J, W3.a_J, W4.a_J) == (120, 150, 140, 100)
    assert (W1.a_E, W4.a_E) == (0, 100)
    assert (W2.a_Hv, W2.a_Hs, W3.a_Hs) == (40, 60, 80)
    assert (W1.b_j, W2.b_j, W3.b_j, W4.b_j) == (100, 100, 100, 60)
    assert (W2.b_sigma_v, W2.b_sigma_s, W3.b_sigma_s, W3.b_v) == \
        (200, 180, 120, 160)
    assert (W2.c, W3.c) == (5.0, 2.5)
    k = TerminalWeights()
    assert (k.k_E, k.k_I, k.k_J) == (1500, 2000, 800)
    th = Thresholds()
    assert (th.i_high, th.i_low) == (0.043, 0.033)


# --- Hamiltonians -----------------------------------------------------------------


def expanded_hamiltonian(phase, x, lam, u, p, w):
    """Independent transcription of the expanded per-phase Hamiltonians."""
    if phase in (1, 4):
        V, S, E, I, J, R = x
        lV, lS, lE, lI, lJ, lR = lam
        u_j = u[0]
        return (
            w.a_E * E + w.a_I * I + w.a_J * J + w.b_j * u_j ** 2
            + lV * (-p.beta_v * V * I)
            + lS * (-p.beta_s * S * I + p.omega * R)
            + lE * (p.beta_v * V * I + p.beta_s * S * I - p.kappa * E)
            + lI * (p.kappa * E - p.gamma * I - u_j * I)
            + lJ * (u_j * I - p.delta * J)
            + lR * (p.gamma * I + p.delta * J - p.omega * R)
        )
    if phase == 2:
        Hv, Hs, V, S, E, I, J, R = x
        lHv, lHs, lV, lS, lE, lI, lJ, lR = lam
        u_j, u_sv, u_ss = u
        return (
            w.a_I * I + w.a_J * J + w.a_Hv * Hv + w.a_Hs * Hs + w.c
            + w.b_j * u_j ** 2 + w.b_sigma_v * u_sv ** 2
            + w.b_sigma_s * u_ss ** 2
            + lHv * (u_sv * V) + lHs * (u_ss * S)
            + lV * (-p.beta_v * V * I - u_sv * V)
            + lS * (-p.beta_s * S * I - u_ss * S + p.omega * R)
            + lE * (p.beta_v * V * I + p.beta_s * S * I - p.kappa * E)
            + lI * (p.kappa * E - p.gamma * I - u_j * I)
            + lJ * (u_j * I - p.delta * J)
            + lR * (p.gamma * I + p.delta * J - p.omega * R)
        )
    if phase == 3:
        Hs, V, S, E, I, J, R = x
        lHs, lV, lS, lE, lI, lJ, lR = lam
        u_j, u_v, u_ss = u
        return (
            w.a_I * I + w.a_J * J + w.a_Hs * Hs + w.c
            + w.b_j * u_j ** 2 + w.b_v * u_v ** 2 + w.b_sigma_s * u_ss ** 2
            + lHs * (u_ss * S - u_v * Hs)
            + lV * (-p.beta_v * V * I + u_v * Hs)
            + lS * (-p.beta_s * S * I - u_ss * S + p.omega * R)
            + lE * (p.beta_v * V * I + p.beta_s * S * I - p.kappa * E)
            + lI * (p.kappa * E - p.gamma * I - u_j * I)
            + lJ * (u_j * I - p.delta * J)
            + lR * (p.gamma * I + p.delta * J - p.omega * R)
        )
    raise AssertionError(phase)


PHASE_W = {1: W1, 2: W2, 3: W3, 4: W4}


@pytest.mark.parametrize("phase", [1, 2, 3, 4])
def test_hamiltonian_matches_expanded_form(phase, rng):
    w = PHASE_W[phase]
    for _ in range(50):
        x = random_state(rng, phase)
        lam = rng.uniform(-50.0, 50.0, PHASE_DIM[phase])
        u = random_control(rng, phase)
        h1 = hamiltonian(phase, x, lam, u, P, w)
        h2 = expanded_hamiltonian(phase, x, lam, u, P, w)
        assert h1 == pytest.approx(h2, abs=1e-12)


def test_hamiltonian_degenerate_cases(rng):
    x = random_state(rng, 1)
    u = np.array([0.02])
    assert hamiltonian(1, x, np.zeros(6), u, P, W1) == \
        pytest.approx(running_cost(1, x, u, W1))
    lam = rng.uniform(-10, 10, 6)
    zero_w = PhaseWeights(b_j=1.0)
    h = hamiltonian(1, x, lam, np.zeros(1), P, zero_w)
    assert h == pytest.approx(float(lam @ f_rto(x, 0.0, P)))


# --- control law ------------------------------------------------------------------


def test_minimizer_interior_stationary_point():
    x = np.zeros(6)
    x[3] = 0.05
    lam = np.zeros(6)
    lam[3] = 10.0  # lam_I - lam_J = 10
    u = minimize_control(1, x, lam, W1, BOUNDS)
    assert u[0] == pytest.approx(0.0025)


def test_minimizer_clips_at_capacity():
    x = np.zeros(6)
    x[3] = 0.05
    lam = np.zeros(6)
    lam[3] = 400.0
    u = minimize_control(1, x, lam, W1, BOUNDS)
    assert u[0] == 0.04


def test_minimizer_clips_at_zero(rng):
    for phase in (1, 2, 3, 4):
        x = random_state(rng, phase)
        lam = np.zeros(PHASE_DIM[phase])
        i_idx = {1: 3, 2: 5, 3: 4, 4: 3}[phase]
        lam[i_idx] = -5.0
        lam[i_idx + 1] = 5.0  # lam_I < lam_J
        u = minimize_control(phase, x, lam, PHASE_W[phase], BOUNDS)
        assert u[0] == 0.0


@pytest.mark.parametrize("phase", [1, 2, 3, 4])
def test_minimizer_beats_grid_and_respects_bounds(phase, rng):
    w = PHASE_W[phase]
    hi = BOUNDS.upper(phase)
    for _ in range(30):
        x = random_state(rng, phase)
        lam = rng.uniform(-2000.0, 2000.0, PHASE_DIM[phase])
        u_star = minimize_control(phase, x, lam, w, BOUNDS)
        assert np.all(u_star >= 0.0) and np.all(u_star <= hi)
        h_star = hamiltonian(phase, x, lam, u_star, P, w)
        for j in range(hi.size):
            for g in np.linspace(0.0, hi[j], 101):
                u = u_star.copy()
                u[j] = g
                assert hamiltonian(phase, x, lam, u, P, w) >= h_star


# --- adjoints ---------------------------------------------------------------------


def test_adjoint_wfh_home_compartment_rate_is_constant(rng):
    for _ in range(10):
        x = random_state(rng, 2)
        lam = rng.uniform(-100, 100, 8)
        u = random_control(rng, 2)
        out = adjoint_rhs(2, x, lam, u, P, W2)
        assert out[0] == -40.0
        assert out[1] == -60.0


def test_adjoint_rto_vanishes_without_infection():
    x = np.zeros(6)
    x[2] = 0.3  # E
    lam = np.random.default_rng(7).uniform(-10, 10, 6)
    out = adjoint_rhs(1, x, lam, np.zeros(1), P, W1)
    assert out[0] == 0.0 and out[1] == 0.0


@pytest.mark.parametrize("phase", [1, 2, 3, 4])
def test_adjoint_is_negative_state_gradient_of_hamiltonian(phase, rng):
    w = PHASE_W[phase]
    eps = 1e-6
    for _ in range(100):
        x = random_state(rng, phase)
        lam = rng.uniform(-100.0, 100.0, PHASE_DIM[phase])
        u = random_control(rng, phase)
        got = adjoint_rhs(phase, x, lam, u, P, w)
        for i in range(PHASE_DIM[phase]):
            dx = np.zeros(PHASE_DIM[phase])
            dx[i] = eps
            fd = -(hamiltonian(phase, x + dx, lam, u, P, w)
                   - hamiltonian(phase, x - dx, lam, u, P, w)) / (2 * eps)
            assert got[i] == pytest.approx(fd, rel=1e-6, abs=1e-6)


def test_adjoint_jump_wfh_to_protocol_matrix():
    lam_plus = np.array([2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0])
    out = adjoint_jump("q2q3", lam_plus, 0.0)
    np.testing.assert_allclose(out, [3, 2, 3, 4, 5, 6, 7, 8])


def test_adjoint_jump_rto_to_wfh_restriction(rng):
    lam_plus = rng.uniform(-5, 5, 8)
    out = adjoint_jump("q1q2", lam_plus, 0.0)
    np.testing.assert_allclose(out, lam_plus[2:])
    out_p = adjoint_jump("q1q2", lam_plus, 2.5)
    assert out_p[3] == pytest.approx(lam_plus[5] + 2.5)


def test_adjoint_jump_protocol_to_rto_multiplier():
    out = adjoint_jump("q3q1", np.zeros(6), 1.0)
    np.testing.assert_allclose(out, [0, 0, 0, 0, 1, 0, 0])


def test_adjoint_jump_controlled_requires_zero_multiplier():
    with pytest.raises(ValueError):
        adjoint_jump("q2q3", np.zeros(7), 0.5)


def test_terminal_costate_vector(rng):
    np.testing.assert_allclose(
        terminal_costate(X0, TerminalWeights()), [0, 0, 1500, 2000, 800, 0]
    )
    np.testing.assert_allclose(
        terminal_costate(X0, TerminalWeights(0, 0, 0)), np.zeros(6)
    )
    a = terminal_costate(random_state(rng, 1), TerminalWeights())
    b = terminal_costate(random_state(rng, 1), TerminalWeights())
    np.testing.assert_array_equal(a, b)


# --- weight validation -------------------------------------------------------------


def test_zero_effort_weight_is_a_configuration_error():
    bad = (PhaseWeights(a_I=1.0), W2, W3, W4)  # b_j missing in phase 1
    problems = check_weights(bad)
    assert any("b_j" in p and "strictly positive" in p for p in problems)


def test_unused_weight_must_stay_zero():
    bad = (PhaseWeights(b_j=1.0, a_E=5.0), W2, W3, W4)
    problems = check_weights(bad)
    assert any("a_E" in p for p in problems)


def test_paper_model_validates_cleanly():
    assert paper_model().validate() == []
