"""Tests for the epsilon schedule and the action-selection rules."""

import numpy as np
import pytest
from scipy.stats import chisquare

from src.critical import SIMap
from src.errors import ContractError, ScheduleError
from src.exploration import (
    PolicyKind,
    PolicySpec,
    ScheduleSpec,
    action_probabilities,
    decide,
    epsilon_prime,
    exploitation_rate,
    softmax_probabilities,
)
from src.learning import QTable

DRAWS = 100_000
ROW = [0.5, 0.2, 0.1, 0.0]


@pytest.fixture
def q():
    return QTable(np.array([ROW] * 10))


@pytest.fixture
def si_map():
    """State 0 is the only critical state."""
    return SIMap.build(list(range(10)), [10.0] + [0.0] * 9, 0.1)


def draw(policy, s, q, si_map, t, seed=0):
    rng = np.random.default_rng(seed)
    picks = [decide(policy, s, q, si_map, t, rng) for _ in range(DRAWS)]
    actions = np.bincount([a for a, _ in picks], minlength=4)
    exploited = np.mean([e for _, e in picks])
    return actions, exploited


def test_linear_annealing():
    """eps runs from 0.905 to 0.005 and then stays there."""
    sched = ScheduleSpec()

    assert sched.epsilon(0) == pytest.approx(0.905)
    assert sched.epsilon(50_000) == pytest.approx(0.455)
    assert sched.epsilon(100_000) == pytest.approx(0.005)
    assert sched.epsilon(250_000) == pytest.approx(0.005)


def test_epsilon_prime_endpoints():
    """With k = 0.95 and q = 0.1, eps' runs from 1 to 0."""
    sched = ScheduleSpec()

    assert sched.epsilon_prime(0) == pytest.approx(1.0)
    assert sched.epsilon_prime(100_000) == pytest.approx(0.0, abs=1e-12)
    assert 0.0 <= sched.epsilon_prime(100_000) <= 1.0


@pytest.mark.parametrize("t", [0, 1, 999, 25_000, 50_000, 99_999, 100_000, 300_000])
def test_exploitation_matches_epsilon_greedy(t):
    """q*k + (1 - q)*(1 - eps') = 1 - eps at every step."""
    sched = ScheduleSpec()
    eps = sched.epsilon(t)
    lhs = sched.q * sched.k + (1 - sched.q) * (1 - sched.epsilon_prime(t))

    assert lhs == pytest.approx(1 - eps, abs=1e-12)


def test_identity_over_parameter_grid():
    """The matched rate holds wherever eps' is a valid probability."""
    checked = 0
    for eps in np.linspace(0.0, 1.0, 10):
        for k in np.linspace(0.5, 1.0, 10):
            for q in np.linspace(0.01, 0.5, 10):
                try:
                    prime = epsilon_prime(eps, k, q)
                except ScheduleError:
                    continue
                assert q * k + (1 - q) * (1 - prime) == pytest.approx(1 - eps, abs=1e-12)
                checked += 1
    assert checked > 100


def test_inconsistent_schedule_rejected():
    """eps' above 1 is a schedule error."""
    with pytest.raises(ScheduleError):
        epsilon_prime(0.905, 0.5, 0.5)
    with pytest.raises(ScheduleError):
        PolicySpec(PolicyKind.PROPOSED, ScheduleSpec(k=0.5, q=0.5))


def test_schedule_validation():
    """Out-of-range parameters are rejected when the schedule is built."""
    with pytest.raises(ValueError):
        ScheduleSpec(epsilon_start=0.1, epsilon_end=0.2)
    with pytest.raises(ValueError):
        ScheduleSpec(q=1.0)


def test_policy_spec_validation():
    """Kinds are parsed from strings; bad temperatures and ratios are rejected."""
    assert PolicySpec("proposed").kind is PolicyKind.PROPOSED
    assert PolicySpec(PolicyKind.E_EXPLOITATION).e == pytest.approx(0.095)
    with pytest.raises(ContractError):
        PolicySpec(PolicyKind.DEFAULT, temperature=0.0)
    with pytest.raises(ContractError):
        PolicySpec(PolicyKind.E_EXPLOITATION, exploitation_ratio=1.5)


def test_epsilon_greedy_frequencies(q):
    """Empirical action counts fit the analytic distribution."""
    policy = PolicySpec(PolicyKind.EPSILON_GREEDY)
    counts, _ = draw(policy, 3, q, None, 50_000)
    probs = action_probabilities(policy, 3, q, None, 50_000)

    assert probs == pytest.approx([0.545 + 0.455 / 4] + [0.455 / 4] * 3)
    assert chisquare(counts, probs * DRAWS).pvalue > 0.01


def test_proposed_critical_state_exploits_k(q, si_map):
    """On a critical state the greedy share is k = 0.95."""
    policy = PolicySpec(PolicyKind.PROPOSED)
    counts, exploited = draw(policy, 0, q, si_map, 0)

    assert abs(exploited - 0.95) < 0.0035
    probs = action_probabilities(policy, 0, q, si_map, 0)
    assert chisquare(counts, probs * DRAWS).pvalue > 0.01


def test_proposed_non_critical_state_follows_epsilon_prime(q, si_map):
    """eps' = 1 at the start and 0 once annealed."""
    policy = PolicySpec(PolicyKind.PROPOSED)

    _, early = draw(policy, 1, q, si_map, 0)
    _, late = draw(policy, 1, q, si_map, 100_000)

    assert early == 0.0
    assert late == 1.0


def test_proposed_without_map_uses_epsilon_prime(q):
    """No critical set means every state uses eps'."""
    policy = PolicySpec(PolicyKind.PROPOSED)
    probs = action_probabilities(policy, 0, q, None, 50_000)
    p_greedy = 1.0 - policy.schedule.epsilon_prime(50_000)

    assert probs[0] == pytest.approx(p_greedy + (1 - p_greedy) / 4)


def test_e_exploitation_share(q):
    """Deliberate greedy choices happen at rate e = q*k."""
    policy = PolicySpec(PolicyKind.E_EXPLOITATION)
    counts, exploited = draw(policy, 2, q, None, 0)

    assert abs(exploited - 0.095) < 0.005
    probs = action_probabilities(policy, 2, q, None, 0)
    assert chisquare(counts, probs * DRAWS).pvalue > 0.01


def test_default_policy_is_softmax(q):
    """The default baseline never exploits deliberately."""
    policy = PolicySpec(PolicyKind.DEFAULT)
    counts, exploited = draw(policy, 4, q, None, 0)

    assert exploited == 0.0
    probs = softmax_probabilities(np.array(ROW))
    assert chisquare(counts, probs * DRAWS).pvalue > 0.01


def test_softmax_temperature():
    """Lower temperature sharpens the distribution."""
    row = np.array(ROW)
    hot = softmax_probabilities(row, 10.0)
    cold = softmax_probabilities(row, 0.01)

    assert hot.sum() == pytest.approx(1.0)
    assert cold[0] == pytest.approx(1.0, abs=1e-9)
    assert hot[0] < 0.3


@pytest.mark.parametrize("kind", list(PolicyKind))
def test_probabilities_sum_to_one(kind, q, si_map):
    """Every rule yields a distribution over the four actions."""
    policy = PolicySpec(kind)
    for s in (0, 5):
        for t in (0, 40_000, 200_000):
            assert action_probabilities(policy, s, q, si_map, t).sum() == pytest.approx(1.0)


def test_exploitation_rate_at_design_ratio():
    """At critical fraction q, Proposed exploits exactly as often as epsilon-greedy."""
    proposed = PolicySpec(PolicyKind.PROPOSED)
    greedy = PolicySpec(PolicyKind.EPSILON_GREEDY)

    for t in np.linspace(0, 150_000, 31).astype(int):
        assert exploitation_rate(proposed, 0.1, t) == pytest.approx(
            exploitation_rate(greedy, 0.1, t), abs=1e-12
        )
    assert exploitation_rate(PolicySpec(PolicyKind.DEFAULT), 0.1, 0) == 0.0
    with pytest.raises(ContractError):
        exploitation_rate(proposed, 1.5, 0)
