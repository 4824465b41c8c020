"""Structure-level tests of the generic hybrid-system containers."""

import dataclasses

import numpy as np
import pytest

from hocp.hybrid import (
    ModeId,
    ModeSpec,
    TransitionKind,
    TransitionSpec,
    apply_jump,
    manifold_value,
    validate_system,
)
from hocp.model import build_system


@pytest.fixture(scope="module")
def system(model):
    return build_system(model)


def test_paper_system_is_valid(system):
    report = validate_system(system)
    assert report.ok, report.problems


def test_mode_dimensions(system):
    dims = {ms.mode.label: (ms.state_dim, ms.control_dim) for ms in system.modes}
    assert dims == {"rto": (6, 1), "wfh": (8, 3), "protocol": (7, 3)}


def test_autonomous_without_manifold_is_reported(system):
    tr = system.transitions[0]
    broken = dataclasses.replace(tr, manifold=None)
    bad = dataclasses.replace(system, transitions=(broken,) + system.transitions[1:])
    report = validate_system(bad)
    assert any("missing manifold" in p for p in report.problems)
    assert len([p for p in report.problems if "missing manifold" in p]) == 1


def test_controlled_with_manifold_is_reported(system):
    tr = system.transitions[1]
    broken = dataclasses.replace(tr, manifold=lambda x: 0.0)
    bad = dataclasses.replace(
        system, transitions=system.transitions[:1] + (broken,)
        + system.transitions[2:]
    )
    report = validate_system(bad)
    assert any("carries a manifold" in p for p in report.problems)


def test_broken_chain_is_reported(system):
    # drop the middle transition: q1->q2 followed by q3->q1
    bad = dataclasses.replace(
        system, transitions=(system.transitions[0], system.transitions[2])
    )
    report = validate_system(bad)
    assert any("broken chain" in p for p in report.problems)


def test_single_field_corruptions_are_rejected(system):
    rto = system.modes[0]
    corruptions = [
        dataclasses.replace(rto, state_labels=("V", "S", "E")),
        dataclasses.replace(rto, control_lower=np.zeros(3)),
        dataclasses.replace(rto, control_upper=np.array([-1.0])),
        dataclasses.replace(rto, state_dim=0),
    ]
    for bad_mode in corruptions:
        bad = dataclasses.replace(system, modes=(bad_mode,) + system.modes[1:])
        assert not validate_system(bad).ok


def test_duplicate_mode_id_is_reported(system):
    dup = dataclasses.replace(system.modes[1],
                              mode=ModeId(1, "wfh"))
    bad = dataclasses.replace(system, modes=(system.modes[0], dup,
                                             system.modes[2]))
    report = validate_system(bad)
    assert any("duplicate mode id" in p for p in report.problems)


def test_mode_label_must_be_nonempty():
    with pytest.raises(ValueError):
        ModeId(1, "")


# --- jump maps -----------------------------------------------------------------


def test_jump_rto_to_wfh_zero_pads(system):
    x = np.array([0.1, 0.74, 0.05, 0.01, 0.05, 0.05])
    out = apply_jump(system.transitions[0], x)
    np.testing.assert_allclose(out, [0, 0, 0.1, 0.74, 0.05, 0.01, 0.05, 0.05])


def test_jump_wfh_to_protocol_merges_vaccinated(system):
    x = np.array([0.2, 0.15, 0.1, 0.3, 0.05, 0.05, 0.05, 0.1])
    out = apply_jump(system.transitions[1], x)
    assert out[1] == pytest.approx(0.1 + 0.2)  # V + H_v
    assert out[0] == pytest.approx(0.15)       # H_s carried over
    np.testing.assert_allclose(out[2:], x[3:])


def test_jump_protocol_to_rto_merges_wfh(system):
    x = np.array([0.15, 0.1, 0.25, 0.05, 0.05, 0.05, 0.35])
    out = apply_jump(system.transitions[2], x)
    assert out[1] == pytest.approx(0.25 + 0.15)  # S + H_s
    assert out[0] == pytest.approx(0.1)
    np.testing.assert_allclose(out[2:], x[3:])


def test_jumps_conserve_mass(system, rng):
    for tr, dim in zip(system.transitions, (6, 8, 7)):
        for _ in range(50):
            x = rng.uniform(0.0, 1.0, dim)
            out = apply_jump(tr, x)
            assert abs(out.sum() - x.sum()) < 1e-12


def test_jump_dimension_mismatch_raises(system):
    with pytest.raises(ValueError):
        apply_jump(system.transitions[0], np.zeros(7))


# --- manifolds -------------------------------------------------------------------


def test_manifold_values(system):
    high, low = system.transitions[0], system.transitions[2]
    x = np.zeros(6)
    x[3] = 0.043
    assert manifold_value(high, x) == pytest.approx(0.0, abs=1e-15)
    x[3] = 0.01
    assert manifold_value(high, x) == pytest.approx(-0.033)
    y = np.zeros(7)
    y[4] = 0.05
    assert manifold_value(low, y) == pytest.approx(0.05 - 0.033)


def test_manifold_on_controlled_transition_raises(system):
    with pytest.raises(ValueError):
        manifold_value(system.transitions[1], np.zeros(8))


def test_manifold_is_affine_with_unit_gradient(system, rng):
    for tr, dim in ((system.transitions[0], 6), (system.transitions[2], 7)):
        grad = tr.manifold_gradient
        assert grad.sum() == 1.0 and set(np.unique(grad)) == {0.0, 1.0}
        for _ in range(20):
            x = rng.uniform(0.0, 1.0, dim)
            v = rng.uniform(-1.0, 1.0, dim)
            t = rng.uniform(-2.0, 2.0)
            lhs = manifold_value(tr, x + t * v)
            rhs = manifold_value(tr, x) + t * float(grad @ v)
            assert lhs == pytest.approx(rhs, abs=1e-12)
