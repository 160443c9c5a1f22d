"""
Leeway and comeback probabilities, their inversions, and the exact sequence-model oracle.

A 0:2 leeway means the opponent scored the first two goals. With a constant
share p the leeway has probability (1-p)^2, a 2:2 draw after it (1-p)^2 p^2 and a
3:2 win (1-p)^2 p^3. Resilience is the excess of the observed comeback frequency
over that expectation.
"""
import logging
import math
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import bisect, minimize_scalar
from scipy.stats import binom, poisson

from core.config import BISECTION_TOLERANCE, BOUND_GRID_STEP
from core.errors import NoSolutionError
from core.model_schema import (
    ComebackProbs,
    ComebackValue,
    LeagueParams,
    Probability,
    ResilienceDelta,
    TeamShare,
    check_non_negative,
    check_probability,
)
from services.scoring_model import truncation_limit

logger = logging.getLogger(__name__)


def trailing_prob(share: TeamShare) -> float:
    """Probability (1 - p)^2 of conceding the first two goals."""
    check_probability("share", share)
    return (1.0 - share) ** 2


def comeback_draw_prob(trailing: Probability, share: TeamShare) -> float:
    """Probability of a 2:2 draw after trailing 0:2: trailing * p^2."""
    check_probability("trailing", trailing)
    check_probability("share", share)
    return trailing * share ** 2


def comeback_win_prob(trailing: Probability, share: TeamShare) -> float:
    """Probability of a 3:2 win after trailing 0:2: trailing * p^3."""
    check_probability("trailing", trailing)
    check_probability("share", share)
    return trailing * share ** 3


def comeback_prob(trailing: Probability, share: TeamShare) -> float:
    """Probability of a win or a draw after trailing 0:2: trailing * p^2 (1 + p)."""
    return comeback_draw_prob(trailing, share) + comeback_win_prob(trailing, share)


def comeback_probs(share: TeamShare, trailing: Optional[float] = None) -> ComebackProbs:
    """
    Leeway and comeback probabilities for a constant share.

    Args:
        share: Goal-scoring share of the trailing team
        trailing: Leeway probability; defaults to (1 - share)^2

    Returns:
        ComebackProbs with trailing, draw, win and win_or_draw
    """
    if trailing is None:
        trailing = trailing_prob(share)
    draw = comeback_draw_prob(trailing, share)
    win = comeback_win_prob(trailing, share)
    return ComebackProbs(trailing=trailing, draw=draw, win=win, win_or_draw=draw + win)


def _bound_objective(share: float) -> float:
    return comeback_prob(trailing_prob(share), share)


def max_comeback_bound() -> Tuple[float, float]:
    """
    Largest comeback probability reachable with a constant share.

    Maximises (1-p)^2 p^2 (1+p) on [0, 1]: a coarse grid brackets the optimum,
    then a bounded scalar search refines it.

    Returns:
        (maximum value, argmax share)
    """
    grid = np.linspace(0.0, 1.0, 1001)
    values = (1.0 - grid) ** 2 * grid ** 2 * (1.0 + grid)
    best = int(np.argmax(values))
    lower = grid[max(best - 1, 0)]
    upper = grid[min(best + 1, len(grid) - 1)]
    result = minimize_scalar(
        lambda p: -_bound_objective(p),
        bounds=(lower, upper),
        method='bounded',
        options={'xatol': BOUND_GRID_STEP * 1e-3},
    )
    share = float(result.x)
    return _bound_objective(share), share


def strength_from_trailing(trailing: Probability) -> float:
    """Invert the leeway probability: p = 1 - sqrt(trailing)."""
    check_probability("trailing", trailing)
    return 1.0 - math.sqrt(trailing)


def required_strength(trailing: Probability, target: ComebackValue) -> float:
    """
    Share p' a team must adopt after trailing 0:2 so that trailing * p'^2 (1 + p') = target.

    The left side increases strictly on [0, 1] up to 2 * trailing, so the root is
    unique and found by bisection.

    Raises:
        ValueError: if trailing is not positive or target is negative
        NoSolutionError: if target exceeds 2 * trailing
    """
    check_probability("trailing", trailing)
    check_non_negative("target", target)
    if trailing <= 0.0:
        raise ValueError("trailing must be positive to solve for a required strength")
    ceiling = 2.0 * trailing
    if target > ceiling:
        raise NoSolutionError(
            f"target {target:.4f} exceeds the largest reachable comeback probability {ceiling:.4f}"
        )
    if target == 0.0:
        return 0.0
    if target == ceiling:
        return 1.0
    root = bisect(
        lambda p: trailing * p * p * (1.0 + p) - target,
        0.0, 1.0,
        xtol=BISECTION_TOLERANCE / 10.0,
        maxiter=200,
    )
    logger.debug(f"required strength: trailing={trailing}, target={target} -> {root:.9f}")
    return float(root)


def required_win_strength(trailing: Probability, target: Probability) -> float:
    """
    Share p' needed after a 0:2 leeway for a 3:2 win to reach `target`: (target / trailing)^(1/3).

    Raises:
        ValueError: if trailing is not positive
        NoSolutionError: if target exceeds trailing
    """
    check_probability("trailing", trailing)
    check_probability("target", target)
    if trailing <= 0.0:
        raise ValueError("trailing must be positive to solve for a required strength")
    if target > trailing:
        raise NoSolutionError(
            f"target {target:.4f} exceeds the largest reachable win probability {trailing:.4f}"
        )
    return (target / trailing) ** (1.0 / 3.0)


def resilience_delta(empirical: Probability, expected: Probability, n_leeways: int) -> ResilienceDelta:
    """Observed minus expected comeback frequency, with the binomial standard error."""
    check_probability("empirical", empirical)
    check_probability("expected", expected)
    return ResilienceDelta(empirical=empirical, expected=expected, n_leeways=n_leeways)


def _comeback_terms(params: LeagueParams, boosted_share: float):
    """
    Per total m >= 2: P(m | m >= 2) and the chances of a final draw and win after a 0:2 start.

    None when P(m >= 2) is 0, which covers E = 0 and E small enough to underflow.
    """
    expected = params.expected_goals
    at_least_two = float(poisson.sf(1, expected)) if expected > 0.0 else 0.0
    if at_least_two == 0.0:
        return None
    limit = max(truncation_limit(expected), 2)
    totals = np.arange(2, limit + 1)
    weights = poisson.pmf(totals, expected) / at_least_two
    remaining = totals - 2
    # the team needs at least ceil(m/2) of the m-2 goals after the leeway
    needed = (totals + 1) // 2
    win_or_draw = binom.sf(needed - 1, remaining, boosted_share)
    draw = np.where(totals % 2 == 0, binom.pmf(totals // 2, remaining, boosted_share), 0.0)
    return weights, draw, win_or_draw


def exact_comeback_given_leeway(params: LeagueParams, share: TeamShare, boosted_share: TeamShare) -> float:
    """
    P(final win or draw | the opponent scored the first two goals) in the sequence model.

    m ~ Poisson(E); after the two conceded goals each remaining goal goes to the team
    with probability boosted_share. The pre-leeway share cancels in the conditional;
    boosted_share == share models a team without resilience. Without any chance
    of two goals (E = 0 or an underflowing E) the result is 0.
    """
    check_probability("share", share)
    check_probability("boosted_share", boosted_share)
    terms = _comeback_terms(params, boosted_share)
    if terms is None:
        return 0.0
    weights, _, win_or_draw = terms
    return float(min(np.sum(weights * win_or_draw), 1.0))


def exact_comeback_breakdown(params: LeagueParams, share: TeamShare, boosted_share: TeamShare) -> ComebackProbs:
    """
    Exact conditional comeback split into draws and wins of any score (3:2, 4:2, 4:3, ...).

    `trailing` carries the unconditional strict leeway probability of the pre-leeway share.
    """
    check_probability("share", share)
    check_probability("boosted_share", boosted_share)
    expected = params.expected_goals
    trailing = (1.0 - share) ** 2 * (float(poisson.sf(1, expected)) if expected > 0 else 0.0)
    terms = _comeback_terms(params, boosted_share)
    if terms is None:
        return ComebackProbs(trailing=trailing, draw=0.0, win=0.0, win_or_draw=0.0)
    weights, draw, win_or_draw = terms
    draw_total = float(np.sum(weights * draw))
    total = float(np.sum(weights * win_or_draw))
    win_total = max(total - draw_total, 0.0)
    return ComebackProbs(trailing=trailing, draw=draw_total, win=win_total, win_or_draw=draw_total + win_total)
