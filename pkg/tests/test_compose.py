from __future__ import annotations

import logging

import numpy as np
import pytest

from knaf_compose.compose import (
    DEFAULT_MULTI_PASS_TOL,
    CandidateSet,
    CompositionDecision,
    DensityMode,
    all_compositions,
    compose,
    compose_traced,
    composition_label,
    dict_density,
    kme_density,
)
from knaf_compose.exceptions import DimensionMismatchError, KernelMismatchError, KnafError
from knaf_compose.knaf import NAFPolicy, stacked_width
from knaf_compose.lidar_sim import LidarEnv
from knaf_compose.rkhs import KernelParams, SparseKernelModel, kernel_eval


KERNEL2 = KernelParams((0.75, 0.75))


def policy_on(centers, pi, rho, l0: float = 0.01, bound: float = 0.3) -> NAFPolicy:
    """Policy over a 2-D state with the given centers, policy weights and density weights."""
    centers = np.asarray(centers, dtype=float).reshape(-1, 2)
    weights = np.zeros((centers.shape[0], stacked_width(1)))
    weights[:, 1] = pi
    weights[:, -1] = rho
    return NAFPolicy(SparseKernelModel(centers, weights, KERNEL2), 1, l0, [-bound], [bound])


def test_kme_density_reads_the_density_expansion():
    empty = NAFPolicy.initial(KERNEL2, [-0.3], [0.3], 0.01)
    assert kme_density(empty, [0.0, 0.0]) == 0.0
    c = [0.4, -0.2]
    assert kme_density(policy_on([c], 0.0, 5.0), c) == 5.0


def test_dict_density_counts_centers_with_unit_weight():
    empty = NAFPolicy.initial(KERNEL2, [-0.3], [0.3], 0.01)
    assert dict_density(empty, [0.0, 0.0]) == 0.0
    c = np.array([0.4, -0.2])
    assert dict_density(policy_on([c], 0.1, 9.0), c) == 1.0
    centers = np.array([[0.0, 0.0], [0.5, 0.1], [-0.3, 0.8]])
    s = np.array([0.2, 0.2])
    expected = sum(kernel_eval(center, s, KERNEL2) for center in centers)
    assert dict_density(policy_on(centers, 0.0, 1.0), s) == pytest.approx(expected, rel=1e-12)


def test_single_candidate_keeps_its_policy():
    centers = [[0.0, 0.0], [5.0, 0.0], [0.0, 5.0], [5.0, 5.0]]
    original = policy_on(centers, [0.1, -0.2, 0.25, 0.05], 3.0)
    result = compose_traced(CandidateSet((original,), seed=4), epsilon=1e-6)
    assert result.accepted == 4
    for c in original.model.centers:
        assert result.policy.pi.evaluate(c)[0] == pytest.approx(original.pi.evaluate(c)[0], abs=1e-6)


def test_disjoint_supports_are_reproduced_exactly():
    c1, c2 = np.array([0.0, 0.0]), np.array([10.0, 10.0])
    assert kernel_eval(c1, c2, KERNEL2) < 1e-12
    first = policy_on([c1], 0.2, 1.0)
    second = policy_on([c2], -0.1, 1.0)
    composite = compose(CandidateSet((first, second)), epsilon=0.0)
    assert composite.pi.evaluate(c1)[0] == pytest.approx(0.2, abs=1e-10)
    assert composite.pi.evaluate(c2)[0] == pytest.approx(-0.1, abs=1e-10)


def test_denser_candidate_wins_a_shared_center(caplog):
    c = np.array([0.5, 0.5])
    dense = policy_on([c], 0.1, 3.0)
    sparse = policy_on([c], -0.2, 1.0)
    with caplog.at_level(logging.DEBUG, logger="knaf_compose.compose"):
        result = compose_traced(CandidateSet((dense, sparse), seed=0), epsilon=0.0)

    decisions = sorted(result.decisions, key=lambda d: d.policy_index)
    assert decisions == [
        CompositionDecision(0, 0, 3.0, 1.0, accepted=True, tie=False),
        CompositionDecision(1, 0, 1.0, 3.0, accepted=False, tie=False),
    ]
    assert "policy 0 center 0: own=3 rival=1 accepted=True" in caplog.messages
    assert "policy 1 center 0: own=1 rival=3 accepted=False" in caplog.messages
    assert result.policy.model_order == 1
    assert result.policy.pi.evaluate(c)[0] == 0.1
    assert result.policy.rho.evaluate(c)[0] == 3.0


def test_density_ties_reject_both_points(caplog):
    c = np.array([0.5, 0.5])
    cands = CandidateSet((policy_on([c], 0.1, 2.0), policy_on([c], -0.2, 2.0)))
    with caplog.at_level(logging.INFO, logger="knaf_compose.compose"):
        result = compose_traced(cands, epsilon=0.0)
    assert result.ties == 2
    assert result.accepted == 0
    assert result.policy.model_order == 0
    assert sum("density tie" in message for message in caplog.messages) == 2


def test_dictionary_density_mode_uses_center_counts():
    c = np.array([0.0, 0.0])
    crowded = policy_on([c, [0.1, 0.0], [0.0, 0.1]], [0.1, 0.1, 0.1], 0.0)
    lonely = policy_on([c], -0.2, 100.0)
    kme = compose_traced(CandidateSet((crowded, lonely)), 0.0, DensityMode.KME)
    by_dict = compose_traced(CandidateSet((crowded, lonely)), 0.0, "dict")
    lonely_kme = [d for d in kme.decisions if d.policy_index == 1]
    lonely_dict = [d for d in by_dict.decisions if d.policy_index == 1]
    assert lonely_kme[0].accepted
    assert not lonely_dict[0].accepted


def test_interpolation_passes_shrink_the_residual():
    centers = [[1.5 * k, 0.0] for k in range(5)]
    policy = policy_on(centers, [0.3, -0.3, 0.2, -0.25, 0.1], 1.0)
    one = compose_traced(CandidateSet((policy,), seed=2), 1e-6)
    many = compose_traced(CandidateSet((policy,), seed=2), 1e-6, passes=10)
    assert one.passes == 1
    assert many.residual < DEFAULT_MULTI_PASS_TOL
    assert many.residual < one.residual
    assert many.passes <= 10


def test_visitation_order_barely_changes_the_composite():
    first = policy_on([[0.0, 0.0], [1.5, 0.0], [3.0, 0.0]], [0.3, -0.2, 0.25], 5.0)
    second = policy_on([[3.0, 1.5], [4.5, 1.5], [6.0, 1.5]], [-0.3, 0.1, 0.2], 5.0)
    epsilon = 0.1
    points = np.vstack([first.model.centers, second.model.centers])
    values = np.array(
        [compose(CandidateSet((first, second), seed=seed), epsilon).pi.evaluate(points)[:, 0] for seed in range(20)]
    )
    spread = values.max(axis=0) - values.min(axis=0)
    assert np.all(spread <= 2 * epsilon)


def test_composition_never_touches_an_environment(room):
    env = LidarEnv(room)
    env.reset(np.random.default_rng(0))
    before = env.steps_taken
    compose(CandidateSet((policy_on([[0.0, 0.0]], 0.1, 1.0), policy_on([[2.0, 0.0]], 0.2, 1.0))), 0.5)
    assert env.steps_taken == before


def test_composite_takes_first_l0_and_widest_bounds():
    c = np.array([0.0, 0.0])
    first = policy_on([c], 0.1, 3.0, l0=0.01, bound=0.3)
    second = policy_on([[4.0, 4.0]], 0.1, 3.0, l0=0.05, bound=0.5)
    composite = compose(CandidateSet((first, second)), 0.0)
    assert composite.l0 == 0.01
    np.testing.assert_array_equal(composite.action_low, [-0.5])
    np.testing.assert_array_equal(composite.action_high, [0.5])
    # second's L(s) = 0.05 at its own center is preserved relative to the new constant
    lmat = composite.components([4.0, 4.0])[2]
    assert lmat[0, 0] == pytest.approx(0.05, abs=1e-12)


def test_candidate_set_validation():
    with pytest.raises(KnafError):
        CandidateSet(())
    other_kernel = NAFPolicy.initial(KernelParams((0.5, 0.75)), [-0.3], [0.3], 0.01)
    with pytest.raises(KernelMismatchError):
        CandidateSet((policy_on([[0.0, 0.0]], 0.1, 1.0), other_kernel))
    two_actions = NAFPolicy.initial(KERNEL2, [-0.3, -0.3], [0.3, 0.3], 0.01)
    with pytest.raises(DimensionMismatchError):
        CandidateSet((policy_on([[0.0, 0.0]], 0.1, 1.0), two_actions))


def test_all_compositions_enumerates_every_subset():
    rows = all_compositions(4)
    assert len(rows) == 15
    assert rows[:4] == [(0,), (1,), (2,), (3,)]
    assert rows[-1] == (0, 1, 2, 3)
    assert composition_label(rows[-1]) == "1 / 2 / 3 / 4"
    assert composition_label((1,)) == "2"
