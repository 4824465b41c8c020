import numpy as np
import pytest

from hocp import SolverConfig, paper_model, solve
from hocp.solver import ControlProfile, simulate


@pytest.fixture(scope="session")
def model():
    return paper_model()


@pytest.fixture(scope="session")
def max_control_profiles(model):
    return tuple(
        ControlProfile.constant(model.bounds.upper(ph)) for ph in (1, 2, 3, 4)
    )


@pytest.fixture(scope="session")
def sim_solution(model, max_control_profiles):
    """Cheap feasible run: open-loop full-capacity controls, coarse step."""
    return simulate(model, SolverConfig(h=0.02), profiles=max_control_profiles,
                    ts2=16.5)


@pytest.fixture(scope="session")
def coarse_solution(model):
    """Converged solve at a coarse step; shared by solver-level tests."""
    cfg = SolverConfig(h=0.05)
    return cfg, solve(model, cfg)


@pytest.fixture(scope="session")
def paper_solution(model):
    """The paper-default solve (h = 0.01); shared by the acceptance suite."""
    cfg = SolverConfig()
    return cfg, solve(model, cfg)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
