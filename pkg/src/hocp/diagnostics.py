"""Self-check suite: invariants of a solve run, reported check by check.

Used by the ``check`` CLI command and by tests.  Each check returns a record
rather than raising, so one run reports every failure at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import model as m
from .config import RunConfig
from .solver import MASS_TOL, Solution, gradient_check_x0, solve

GRAD_TOL = 1e-3
GAP_AUTONOMOUS_TOL = 1e-10
MINIMIZER_SAMPLES = 100
MINIMIZER_GRID = 101
_RNG_SEED = 20240817


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class CheckReport:
    results: tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results)


def check_mass_conservation(sol: Solution) -> CheckResult:
    defect = sol.trajectory.max_mass_defect()
    jump_defect = 0.0
    for a, b in zip(sol.trajectory.segments, sol.trajectory.segments[1:]):
        jump_defect = max(
            jump_defect,
            abs(float(b.states[0].sum()) - float(a.states[-1].sum())),
        )
    worst = max(defect, jump_defect)
    return CheckResult(
        "mass_conservation", worst <= MASS_TOL,
        f"max |sum(x) - 1| = {defect:.3e}, max jump defect = {jump_defect:.3e}",
    )


def check_gradients(cfg: RunConfig, sol: Solution,
                    corrupt_adjoint_sign: bool = False) -> list[CheckResult]:
    results = []
    for comp in ("E", "I", "J"):
        chk = gradient_check_x0(cfg.model, cfg.solver, sol, comp, 1e-5)
        adjoint_value = -chk.adjoint_value if corrupt_adjoint_sign \
            else chk.adjoint_value
        if not chk.valid:
            results.append(CheckResult(
                f"adjoint_gradient_{comp}", False,
                f"perturbed run invalid: {chk.reason}",
            ))
            continue
        scale = max(abs(adjoint_value), abs(chk.fd_value), 1e-300)
        rel = abs(adjoint_value - chk.fd_value) / scale
        results.append(CheckResult(
            f"adjoint_gradient_{comp}", rel <= GRAD_TOL,
            f"adjoint {adjoint_value:.6g} vs fd {chk.fd_value:.6g} "
            f"(rel {rel:.2e})",
        ))
    return results


def check_minimizer(cfg: RunConfig) -> CheckResult:
    """Closed-form control law never loses to a per-component grid scan."""
    model = cfg.model
    rng = np.random.default_rng(_RNG_SEED)
    violations = 0
    worst = 0.0
    for phase in (1, 2, 3, 4):
        d = model.state_dim(phase)
        w = model.phase_weights(phase)
        hi = model.bounds.upper(phase)
        for _ in range(MINIMIZER_SAMPLES):
            x = rng.uniform(0.0, 1.0, d)
            x /= x.sum()
            lam = rng.uniform(-2000.0, 2000.0, d)
            u_star = m.minimize_control(phase, x, lam, w, model.bounds)
            h_star = m.hamiltonian(phase, x, lam, u_star, model.params, w)
            for j in range(len(hi)):
                for g in np.linspace(0.0, hi[j], MINIMIZER_GRID):
                    u = u_star.copy()
                    u[j] = g
                    h = m.hamiltonian(phase, x, lam, u, model.params, w)
                    if h < h_star:
                        violations += 1
                        worst = min(worst, h - h_star)
    return CheckResult(
        "minimizer_optimality", violations == 0,
        f"{violations} grid points beat the closed form"
        + (f" (worst {worst:.3e})" if violations else ""),
    )


def check_hamiltonian_gaps(cfg: RunConfig, sol: Solution) -> list[CheckResult]:
    g1, g2, g3 = sol.switching.gaps
    return [
        CheckResult(
            "hgap_autonomous",
            abs(g1) <= GAP_AUTONOMOUS_TOL and abs(g3) <= GAP_AUTONOMOUS_TOL,
            f"|gap ts1| = {abs(g1):.3e}, |gap ts3| = {abs(g3):.3e}",
        ),
        CheckResult(
            "hgap_controlled",
            abs(g2) <= cfg.solver.tol_hgap,
            f"|gap ts2| = {abs(g2):.3e} (tol {cfg.solver.tol_hgap:g})",
        ),
    ]


def run_checks(cfg: RunConfig, solution: Solution | None = None,
               corrupt_adjoint_sign: bool = False) -> CheckReport:
    """Solve (unless given a solution) and run every invariant check."""
    sol = solution if solution is not None else solve(cfg.model, cfg.solver)
    results = [check_mass_conservation(sol)]
    results += check_gradients(cfg, sol, corrupt_adjoint_sign)
    results.append(check_minimizer(cfg))
    results += check_hamiltonian_gaps(cfg, sol)
    if not sol.converged:
        results.append(CheckResult("solver_converged", False,
                                   "solve hit the iteration budget"))
    else:
        results.append(CheckResult("solver_converged", True,
                                   f"{sol.iterations} sweeps"))
    return CheckReport(tuple(results))
