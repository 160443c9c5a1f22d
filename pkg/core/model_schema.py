"""Pydantic schemas for the score model, comeback and matchup quantities."""
import math
from typing import Annotated, Optional

from annotated_types import Ge, Interval
from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

from core.config import SHARE_SUM_TOLERANCE, SIGNIFICANCE_SIGMAS

Probability = Annotated[float, Interval(ge=0.0, le=1.0)]
TeamShare = Annotated[float, Interval(ge=0.0, le=1.0)]
GoalCount = Annotated[int, Ge(0)]
# trailing * p^2 (1 + p) reaches 2 for trailing = p = 1
ComebackValue = Annotated[float, Interval(ge=0.0, le=2.0)]

OUTCOME_SUM_TOLERANCE = 1e-9


def check_probability(name: str, value: float) -> float:
    """Reject values outside [0, 1] (NaN included)."""
    if not (0.0 <= value <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return float(value)


def check_non_negative(name: str, value: float) -> float:
    """Reject negative, infinite and NaN values."""
    if not (0.0 <= value < math.inf):
        raise ValueError(f"{name} must be a finite value >= 0, got {value!r}")
    return float(value)


class LeagueParams(BaseModel):
    """Expected goals per match E and the home/away goal shares."""
    model_config = ConfigDict(frozen=True)

    expected_goals: float = Field(..., ge=0, allow_inf_nan=False, description="E, goals per match")
    home_share: Probability = Field(0.5, description="p_home")
    away_share: Probability = Field(0.5, description="p_away")

    @model_validator(mode='after')
    def shares_partition_goals(self) -> 'LeagueParams':
        if abs(self.home_share + self.away_share - 1.0) > SHARE_SUM_TOLERANCE:
            raise ValueError(
                f"home_share + away_share must equal 1, got {self.home_share} + {self.away_share}"
            )
        return self

    @classmethod
    def from_expected_goals(cls, expected_goals: float, home_share: float = 0.5) -> 'LeagueParams':
        """Build params from E and p_home; p_away is the complement."""
        return cls(expected_goals=expected_goals, home_share=home_share, away_share=1.0 - home_share)


class ScoreLine(BaseModel):
    """Final score k:l from the perspective of team A."""
    model_config = ConfigDict(frozen=True)

    for_goals: GoalCount
    against_goals: GoalCount

    @property
    def total(self) -> int:
        return self.for_goals + self.against_goals

    @classmethod
    def parse(cls, text: str) -> 'ScoreLine':
        """Parse 'k:l' (whitespace tolerated)."""
        parts = text.strip().split(':')
        if len(parts) != 2:
            raise ValueError(f"Score must look like 'k:l', got {text!r}")
        try:
            return cls(for_goals=int(parts[0]), against_goals=int(parts[1]))
        except ValueError as e:
            raise ValueError(f"Invalid score {text!r}: {e}") from e

    def __str__(self) -> str:
        return f"{self.for_goals}:{self.against_goals}"


class OutcomeProbs(BaseModel):
    """Win/draw/loss probabilities from the perspective of team A."""
    model_config = ConfigDict(frozen=True)

    win: Probability
    draw: Probability
    loss: Probability

    @model_validator(mode='after')
    def sums_to_one(self) -> 'OutcomeProbs':
        total = self.win + self.draw + self.loss
        if abs(total - 1.0) > OUTCOME_SUM_TOLERANCE:
            raise ValueError(f"Outcome probabilities must sum to 1, got {total}")
        return self


class ComebackProbs(BaseModel):
    """Leeway probability and the draw/win chances of turning it around."""
    model_config = ConfigDict(frozen=True)

    trailing: Probability
    draw: Probability
    win: Probability
    win_or_draw: ComebackValue

    @model_validator(mode='after')
    def win_or_draw_is_sum(self) -> 'ComebackProbs':
        if abs(self.win + self.draw - self.win_or_draw) > SHARE_SUM_TOLERANCE:
            raise ValueError("win_or_draw must equal win + draw")
        return self


class ResilienceDelta(BaseModel):
    """Empirical comeback frequency against its model expectation."""
    model_config = ConfigDict(frozen=True)

    empirical: Probability = Field(..., description="h(win or draw)")
    expected: Probability = Field(..., description="p(win or draw)")
    n_leeways: GoalCount = Field(..., description="number of 0:2 leeways behind the empirical value")

    @computed_field
    @property
    def delta(self) -> float:
        return self.empirical - self.expected

    @computed_field
    @property
    def std_error(self) -> float:
        """Binomial standard error of the empirical frequency; 0 without leeways."""
        if self.n_leeways == 0:
            return 0.0
        return math.sqrt(self.empirical * (1.0 - self.empirical) / self.n_leeways)

    @computed_field
    @property
    def significant(self) -> bool:
        return self.std_error > 0 and abs(self.delta) > SIGNIFICANCE_SIGMAS * self.std_error


class TeamRecordSummary(BaseModel):
    """Goals scored and conceded by one team over a tournament or season."""
    model_config = ConfigDict(frozen=True)

    goals_for: GoalCount
    goals_against: GoalCount


class TrendFit(BaseModel):
    """Least-squares line through per-period home shares."""
    model_config = ConfigDict(frozen=True)

    slope: float = Field(..., description="change of p_home per decade")
    intercept: float = Field(..., description="fitted p_home at year 0")
    vanish_period: str = Field("none", description="period label where p_home reaches 0.5, or 'none'")
    vanish_year: Optional[float] = None
    points: int = Field(..., ge=2)

    def predict(self, year: float) -> float:
        return self.intercept + self.slope * year / 10.0
