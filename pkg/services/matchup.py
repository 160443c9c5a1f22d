"""Head-to-head analysis: strengths from goal records, outcome forecasts and score-dominance confidence."""
import math
from fractions import Fraction

from core.model_schema import LeagueParams, OutcomeProbs, ScoreLine, TeamRecordSummary, TeamShare, check_probability
from services.scoring_model import outcome_probabilities


def share_from_goals(summary: TeamRecordSummary) -> float:
    """
    Estimate a goal-scoring share from goals scored and conceded.

    Args:
        summary: Goals for and against over the observed matches

    Returns:
        goals_for / (goals_for + goals_against)

    Raises:
        ValueError: if no goals were observed at all
    """
    total = summary.goals_for + summary.goals_against
    if total == 0:
        raise ValueError("cannot estimate a share from a record without goals")
    return summary.goals_for / total


def pairwise_share(a: TeamShare, b: TeamShare) -> float:
    """
    Share of team A in a head-to-head from two independently estimated shares: a / (a + b).

    The smaller side is always the quotient and the larger its complement, so
    pairwise_share(a, b) + pairwise_share(b, a) == 1 holds exactly in floating point.
    """
    check_probability("a", a)
    check_probability("b", b)
    if a + b == 0.0:
        raise ValueError("at least one share must be positive")
    if a <= b:
        return a / (a + b)
    return 1.0 - b / (a + b)


def forecast(params: LeagueParams, share: TeamShare) -> OutcomeProbs:
    """Win/draw/loss forecast for team A with share `share` at E goals per match."""
    return outcome_probabilities(params, share)


def _binomial_half_upper_tail(n: int, k: int) -> Fraction:
    """P(Binomial(n, 1/2) >= k) as an exact fraction."""
    if k <= 0:
        return Fraction(1)
    if k > n:
        return Fraction(0)
    return Fraction(sum(math.comb(n, j) for j in range(k, n + 1)), 2 ** n)


def dominance_confidence(score: ScoreLine) -> Fraction:
    """
    Posterior probability that team A's share exceeds 1/2 after scoring k:l.

    Uniform prior on the share, conditional binomial likelihood: the posterior is
    Beta(k+1, l+1), and 1 - I_{1/2}(k+1, l+1) is evaluated exactly through
    I_{1/2}(a, b) = P(Binomial(a+b-1, 1/2) >= a).

    Raises:
        ValueError: for a goalless score
    """
    k, l = score.for_goals, score.against_goals
    if k + l == 0:
        raise ValueError("a goalless score carries no information about the shares")
    a, b = k + 1, l + 1
    return 1 - _binomial_half_upper_tail(a + b - 1, a)
