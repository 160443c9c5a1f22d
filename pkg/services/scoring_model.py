"""
Independent-Poisson score model.

The number of goals m in a match is Poisson(E); each goal is scored by team A
with probability p_A independently, so the score k:l factorises into
Binomial(k | m, p_A) x Poisson(m | E), equivalently into two independent
Poisson variables with means p_A*E and (1-p_A)*E.

All functions are pure and take plain floats for shares.
"""
import math
from functools import lru_cache

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from core.config import LOG_SPACE_THRESHOLD, TAIL_TOLERANCE
from core.model_schema import LeagueParams, OutcomeProbs, ScoreLine, TeamShare, check_probability


def _poisson_pmf(n: int, mean: float) -> float:
    """mean^n e^-mean / n!, in log-space above LOG_SPACE_THRESHOLD."""
    if mean == 0.0:
        return 1.0 if n == 0 else 0.0
    if n > LOG_SPACE_THRESHOLD:
        return math.exp(n * math.log(mean) - mean - float(gammaln(n + 1)))
    return mean ** n * math.exp(-mean) / math.factorial(n)


@lru_cache(maxsize=256)
def truncation_limit(expected_goals: float, tolerance: float = TAIL_TOLERANCE) -> int:
    """Smallest K with P(m > K) < tolerance for m ~ Poisson(E)."""
    if expected_goals == 0.0:
        return 0
    k = int(expected_goals)
    while poisson.sf(k, expected_goals) >= tolerance:
        k += 1
    # walk back in case int(E) already overshoots for tiny E
    while k > 0 and poisson.sf(k - 1, expected_goals) < tolerance:
        k -= 1
    return k


def total_goals_pmf(m: int, params: LeagueParams) -> float:
    """
    Probability that m goals are scored in total.

    Args:
        m: Total number of goals (>= 0)
        params: League parameters carrying E

    Returns:
        E^m e^-E / m!
    """
    if m < 0:
        raise ValueError(f"m must be non-negative, got {m}")
    return _poisson_pmf(m, params.expected_goals)


def conditional_score_pmf(k: int, m: int, share: TeamShare) -> float:
    """
    Probability that team A scores k of m goals: C(m,k) p^k (1-p)^(m-k).

    Raises:
        ValueError: if k > m, k < 0 or the share is outside [0, 1]
    """
    check_probability("share", share)
    if k < 0 or m < 0:
        raise ValueError(f"goal counts must be non-negative, got k={k}, m={m}")
    if k > m:
        raise ValueError(f"k must not exceed m, got k={k}, m={m}")
    return math.comb(m, k) * share ** k * (1.0 - share) ** (m - k)


def joint_score_prob(score: ScoreLine, params: LeagueParams, share: TeamShare) -> float:
    """Probability of the final score k:l (binomial x Poisson form)."""
    m = score.total
    return conditional_score_pmf(score.for_goals, m, share) * total_goals_pmf(m, params)


def joint_score_prob_product(score: ScoreLine, params: LeagueParams, share: TeamShare) -> float:
    """Probability of k:l as a product of two Poisson terms with means p*E and (1-p)*E."""
    check_probability("share", share)
    expected = params.expected_goals
    return (_poisson_pmf(score.for_goals, share * expected)
            * _poisson_pmf(score.against_goals, (1.0 - share) * expected))


def score_matrix(params: LeagueParams, share: TeamShare) -> np.ndarray:
    """
    Matrix M[k, l] = p(k, l) for k, l in [0, K].

    K is the truncation limit of the total, so every score with k + l <= K is
    included and the neglected mass stays below TAIL_TOLERANCE.
    """
    check_probability("share", share)
    expected = params.expected_goals
    limit = truncation_limit(expected)
    goals = np.arange(limit + 1)
    for_pmf = poisson.pmf(goals, share * expected) if share * expected > 0 else (goals == 0).astype(float)
    against_mean = (1.0 - share) * expected
    against_pmf = poisson.pmf(goals, against_mean) if against_mean > 0 else (goals == 0).astype(float)
    return np.outer(for_pmf, against_pmf)


def outcome_probabilities(params: LeagueParams, share: TeamShare) -> OutcomeProbs:
    """
    Win/draw/loss probabilities for team A by summing p(k, l) over k > l, k = l, k < l.

    Win and loss are summed over the same index set of M and M^T, so a symmetric
    matrix (share 0.5) gives win == loss bit for bit.
    """
    matrix = score_matrix(params, share)
    below = np.tril_indices(matrix.shape[0], -1)
    win = float(matrix[below].sum())
    loss = float(matrix.T[below].sum())
    draw = float(np.trace(matrix))
    return OutcomeProbs(win=min(win, 1.0), draw=min(draw, 1.0), loss=min(loss, 1.0))


def first_goal_prob(params: LeagueParams, share: TeamShare) -> float:
    """Probability that team A scores the first goal: p_A (1 - e^-E)."""
    check_probability("share", share)
    return share * -math.expm1(-params.expected_goals)


def strict_leeway_prob(params: LeagueParams, share: TeamShare) -> float:
    """
    Probability that the opponent scores the first two goals of the match.

    (1 - p_A)^2 * P(m >= 2), with P(m >= 2) = 1 - e^-E (1 + E).
    """
    check_probability("share", share)
    expected = params.expected_goals
    at_least_two = float(poisson.sf(1, expected)) if expected > 0 else 0.0
    return (1.0 - share) ** 2 * at_least_two
