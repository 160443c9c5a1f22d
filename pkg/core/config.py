"""
Application-wide configuration constants
Centralized configuration to avoid magic numbers and keep reports reproducible
"""
import os
from typing import Final

from dotenv import load_dotenv

load_dotenv()

# Tool identity (echoed into every report)
TOOL_NAME: Final[str] = "match-resilience"
TOOL_VERSION: Final[str] = "1.0.0"
REPORT_SCHEMA_VERSION: Final[str] = "1.0"

# Logging
LOG_LEVEL: Final[str] = os.getenv("LOG_LEVEL", "WARNING").upper()

# Numerics
TAIL_TOLERANCE: Final[float] = 1e-12  # neglected Poisson mass for infinite sums
LOG_SPACE_THRESHOLD: Final[int] = 20  # evaluate E^m/m! in log-space above this m
BISECTION_TOLERANCE: Final[float] = 1e-9
SHARE_SUM_TOLERANCE: Final[float] = 1e-12
BOUND_GRID_STEP: Final[float] = 1e-6

# Resilience significance: |delta| > SIGNIFICANCE_SIGMAS * SE
SIGNIFICANCE_SIGMAS: Final[float] = float(os.getenv("SIGNIFICANCE_SIGMAS", "2.0"))

# Leeway detection
LEEWAY_MODE_STRICT: Final[str] = "strict"
LEEWAY_MODE_ANY: Final[str] = "any"
DEFAULT_LEEWAY_MODE: Final[str] = os.getenv("LEEWAY_MODE", LEEWAY_MODE_STRICT)

# Season periods: first bucket, then regular buckets (in seasons)
DEFAULT_FIRST_PERIOD_SEASONS: Final[int] = 9
DEFAULT_PERIOD_SEASONS: Final[int] = 10
ALL_PERIODS_LABEL: Final[str] = "ALL"
ALL_TEAMS_KEY: Final[str] = "ALL"

# Home-advantage trend
NEUTRAL_SHARE: Final[float] = 0.5
TREND_HORIZON_YEARS: Final[int] = 200

# Ingestion
CSV_COLUMNS: Final[tuple] = ("season", "matchday", "home_team", "away_team", "goal_sequence")
CSV_OPTIONAL_COLUMNS: Final[tuple] = ("date",)
INGEST_CHUNK_SIZE: Final[int] = int(os.getenv("INGEST_CHUNK_SIZE", "100000"))
MAX_TEAM_NAME_LENGTH: Final[int] = 100

# All-time table
POINTS_PER_WIN: Final[int] = int(os.getenv("POINTS_PER_WIN", "3"))
POINTS_PER_DRAW: Final[int] = 1

# Goal histogram (goodness of fit): bins 0..GOAL_HISTOGRAM_MAX plus a pooled tail
GOAL_HISTOGRAM_MAX: Final[int] = 10

# Simulator
SIM_BLOCK_SIZE: Final[int] = 65536  # seed-splitting unit; changing it changes corpora
SIM_WORKERS: Final[int] = int(os.getenv("SIM_WORKERS", "4"))
SIM_DEFAULT_TEAMS: Final[int] = 18
SIM_FIRST_SEASON: Final[int] = 1963

# Matchup caveat printed next to every dominance confidence
DOMINANCE_CAVEAT: Final[str] = (
    "Posterior P(share > 1/2) under a uniform prior and the conditional binomial "
    "score model. Other score-confidence estimators (e.g. with informative priors) "
    "give different values, so compare only like with like."
)
