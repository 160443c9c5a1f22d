"""Pydantic schemas for validating match data, season periods and simulation setups."""
import re
from enum import Enum
from typing import Iterable, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.config import (
    DEFAULT_FIRST_PERIOD_SEASONS,
    DEFAULT_PERIOD_SEASONS,
    MAX_TEAM_NAME_LENGTH,
    SIM_FIRST_SEASON,
    SIM_WORKERS,
)
from core.errors import PeriodSpecError
from core.model_schema import Probability, ScoreLine

SEASON_PATTERN = re.compile(r'^(\d{4})/(\d{2})$')
PERIOD_DASH = " – "


def sanitize_string(value: Optional[str], max_length: int = 500) -> Optional[str]:
    """Strip control characters and surrounding whitespace, and limit length."""
    if value is None:
        return None
    if not isinstance(value, str):
        value = str(value)
    sanitized = re.sub(r'[\x00-\x1f\x7f-\x9f]', '', value).strip()
    return sanitized[:max_length]


def parse_season_label(label: str) -> int:
    """
    Parse a season label such as '1963/64' into its start year.

    Raises:
        ValueError: if the label is malformed or the two years are not consecutive
    """
    match = SEASON_PATTERN.match(label.strip()) if isinstance(label, str) else None
    if not match:
        raise ValueError(f"bad season label {label!r}, expected 'YYYY/YY'")
    start = int(match.group(1))
    if (start + 1) % 100 != int(match.group(2)):
        raise ValueError(f"bad season label {label!r}, years are not consecutive")
    return start


def season_label(start_year: int) -> str:
    """Format a start year as a season label, e.g. 1963 -> '1963/64'."""
    return f"{start_year}/{(start_year + 1) % 100:02d}"


class Side(str, Enum):
    """Which team scored a goal."""
    HOME = "H"
    AWAY = "A"

    @property
    def opponent(self) -> 'Side':
        return Side.AWAY if self is Side.HOME else Side.HOME


class LeewayMode(str, Enum):
    """STRICT: the opponent scored the first two goals. ANY_DEFICIT: trailed by two at any point."""
    STRICT = "strict"
    ANY_DEFICIT = "any"


class Outcome(str, Enum):
    WIN = "win"
    DRAW = "draw"
    LOSS = "loss"


class MatchRecord(BaseModel):
    """One match with its goals in scoring order ('H' home, 'A' away)."""
    model_config = ConfigDict(frozen=True)

    season: str
    matchday: int = Field(..., ge=1)
    home_team: str = Field(..., min_length=1, max_length=MAX_TEAM_NAME_LENGTH)
    away_team: str = Field(..., min_length=1, max_length=MAX_TEAM_NAME_LENGTH)
    goal_sequence: str = ""
    date: Optional[str] = None

    @field_validator('season', mode='before')
    @classmethod
    def validate_season(cls, v):
        parse_season_label(v)
        return v.strip()

    @field_validator('home_team', 'away_team', mode='before')
    @classmethod
    def sanitize_team(cls, v):
        return sanitize_string(v, max_length=MAX_TEAM_NAME_LENGTH)

    @field_validator('goal_sequence', mode='before')
    @classmethod
    def validate_goal_sequence(cls, v):
        if v is None:
            return ""
        if not isinstance(v, str):
            v = "".join(side.value if isinstance(side, Side) else str(side) for side in v)
        v = v.strip()
        unknown = sorted(set(v) - {Side.HOME.value, Side.AWAY.value})
        if unknown:
            raise ValueError(f"unknown side character(s) {''.join(unknown)!r} in goal sequence {v!r}")
        return v

    @model_validator(mode='after')
    def distinct_teams(self) -> 'MatchRecord':
        if self.home_team == self.away_team:
            raise ValueError(f"identical teams: {self.home_team!r} plays itself")
        return self

    @property
    def home_goals(self) -> int:
        return self.goal_sequence.count(Side.HOME.value)

    @property
    def away_goals(self) -> int:
        return self.goal_sequence.count(Side.AWAY.value)

    @property
    def total_goals(self) -> int:
        return len(self.goal_sequence)

    @property
    def season_start(self) -> int:
        return parse_season_label(self.season)

    def team(self, perspective: Side) -> str:
        return self.home_team if perspective is Side.HOME else self.away_team

    def score(self, perspective: Side = Side.HOME) -> ScoreLine:
        """Final score seen from one side."""
        if perspective is Side.HOME:
            return ScoreLine(for_goals=self.home_goals, against_goals=self.away_goals)
        return ScoreLine(for_goals=self.away_goals, against_goals=self.home_goals)


class Period(BaseModel):
    """A bucket of consecutive seasons, identified by start years (inclusive)."""
    model_config = ConfigDict(frozen=True)

    first_season: int
    last_season: int

    @model_validator(mode='after')
    def ordered(self) -> 'Period':
        if self.last_season < self.first_season:
            raise ValueError(f"period ends before it starts: {self.first_season}-{self.last_season}")
        return self

    @property
    def label(self) -> str:
        return f"{season_label(self.first_season)}{PERIOD_DASH}{season_label(self.last_season)}"

    @property
    def midpoint(self) -> float:
        """Middle of [first start, last start + 1) on the year axis."""
        return (self.first_season + self.last_season + 1) / 2.0

    @property
    def n_seasons(self) -> int:
        return self.last_season - self.first_season + 1

    def contains(self, year: float) -> bool:
        return self.first_season <= year < self.last_season + 1


class PeriodSpec(BaseModel):
    """Ordered, non-overlapping season periods."""
    model_config = ConfigDict(frozen=True)

    periods: List[Period] = Field(..., min_length=1)

    @model_validator(mode='after')
    def non_overlapping(self) -> 'PeriodSpec':
        for previous, current in zip(self.periods, self.periods[1:]):
            if current.first_season <= previous.last_season:
                raise ValueError(f"periods overlap or are out of order: {previous.label} / {current.label}")
        return self

    @classmethod
    def from_layout(cls, first_year: int, last_year: int,
                    first_length: int = DEFAULT_FIRST_PERIOD_SEASONS,
                    length: int = DEFAULT_PERIOD_SEASONS) -> 'PeriodSpec':
        """First bucket of `first_length` seasons, then `length`-season buckets up to last_year."""
        if first_length < 1 or length < 1:
            raise PeriodSpecError("period lengths must be positive")
        periods = [Period(first_season=first_year, last_season=first_year + first_length - 1)]
        while periods[-1].last_season < last_year:
            start = periods[-1].last_season + 1
            periods.append(Period(first_season=start, last_season=start + length - 1))
        return cls(periods=periods)

    @classmethod
    def parse(cls, text: str, first_year: int, last_year: int) -> 'PeriodSpec':
        """
        Parse a --periods value.

        Accepts 'auto' (default layout), 'N,M' (first bucket N seasons, then M),
        or explicit start-year ranges '1963-1971,1972-1981,...'.
        """
        text = (text or "auto").strip()
        if text == "auto":
            return cls.from_layout(first_year, last_year)
        tokens = [t.strip() for t in text.split(',') if t.strip()]
        try:
            if all('-' in t for t in tokens):
                periods = []
                for token in tokens:
                    first, last = token.split('-', 1)
                    periods.append(Period(first_season=int(first), last_season=int(last)))
                return cls(periods=periods)
            if len(tokens) == 2:
                return cls.from_layout(first_year, last_year, int(tokens[0]), int(tokens[1]))
        except PeriodSpecError:
            raise
        except ValueError as e:
            raise PeriodSpecError(f"invalid --periods value {text!r}: {e}") from e
        raise PeriodSpecError(f"invalid --periods value {text!r}")

    def period_for(self, year: int) -> Optional[Period]:
        for period in self.periods:
            if period.contains(year):
                return period
        return None

    def require_coverage(self, years: Iterable[int]) -> None:
        missing = sorted({y for y in years if self.period_for(y) is None})
        if missing:
            raise PeriodSpecError(
                f"periods do not cover seasons {', '.join(season_label(y) for y in missing[:5])}"
                + (" ..." if len(missing) > 5 else "")
            )

    def extended_to(self, year: float) -> 'PeriodSpec':
        """Continue the layout with the width of the last bucket until `year` is covered."""
        periods = list(self.periods)
        width = periods[-1].n_seasons
        while periods[-1].last_season + 1 <= year:
            start = periods[-1].last_season + 1
            periods.append(Period(first_season=start, last_season=start + width - 1))
        return PeriodSpec(periods=periods)

    @property
    def labels(self) -> List[str]:
        return [p.label for p in self.periods]


class TeamSpec(BaseModel):
    """A simulated team: its goal-scoring share and an optional share adopted after a 0:2 leeway."""
    model_config = ConfigDict(frozen=True)

    name: str = Field(..., min_length=1, max_length=MAX_TEAM_NAME_LENGTH)
    share: Probability = 0.5
    boost: Optional[Probability] = None

    @field_validator('name', mode='before')
    @classmethod
    def sanitize_name(cls, v):
        return sanitize_string(v, max_length=MAX_TEAM_NAME_LENGTH)

    @classmethod
    def parse(cls, text: str) -> 'TeamSpec':
        """Parse 'NAME=SHARE[:BOOST]'."""
        name, sep, rest = text.rpartition('=')
        if not sep:
            raise ValueError(f"team must look like NAME=SHARE[:BOOST], got {text!r}")
        share, _, boost = rest.partition(':')
        return cls(name=name, share=float(share), boost=float(boost) if boost else None)


class SimConfig(BaseModel):
    """Monte Carlo setup for generating goal sequences."""
    model_config = ConfigDict(frozen=True)

    expected_goals: float = Field(..., ge=0, allow_inf_nan=False)
    home_share: Probability = 0.5
    resilience_boost: Optional[Probability] = Field(
        None, description="share adopted by any side once it trails 0:2 (team boosts take precedence)"
    )
    n_matches: int = Field(1, ge=1)
    seed: int = Field(0, ge=0, lt=2 ** 64)
    team_pool: Optional[List[TeamSpec]] = None
    first_season: int = Field(SIM_FIRST_SEASON, ge=1000, le=9000)
    workers: int = Field(SIM_WORKERS, ge=1)

    @field_validator('team_pool')
    @classmethod
    def validate_pool(cls, v):
        if v is None:
            return v
        if len(v) < 2:
            raise ValueError("team_pool needs at least two teams")
        names = [team.name for team in v]
        if len(set(names)) != len(names):
            raise ValueError("team_pool names must be unique")
        return v
