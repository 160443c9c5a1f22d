"""
Seedable Monte Carlo generator of goal sequences.

Each match draws m ~ Poisson(E) and hands every goal, in order, to the home
side with probability q. Once a side trails 0:2 after the second goal, an
optional boost replaces its share for the remaining goals.

Stream splitting: matches are generated in blocks of SIM_BLOCK_SIZE. Block b
(matches b*SIM_BLOCK_SIZE ...) uses numpy's PCG64 seeded with the b-th child of
SeedSequence(seed).spawn(n_blocks), drawing first one uniform per match for its
total (inversion of the truncated Poisson CDF) and then
a (block size x max total) matrix of uniforms. A corpus therefore depends on
the seed, the config and the block size only, never on the worker count.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import poisson

from core.config import SIM_BLOCK_SIZE, SIM_DEFAULT_TEAMS
from core.logger import log_info, setup_logger
from core.match_schema import MatchRecord, SimConfig, TeamSpec, season_label
from services.scoring_model import truncation_limit

logger = setup_logger(__name__)

LAST_SEASON_START = 9998  # season labels carry four-digit years


def default_team_pool(n_teams: int = SIM_DEFAULT_TEAMS) -> List[TeamSpec]:
    """Equal-strength teams 'Team 01', 'Team 02', ..."""
    return [TeamSpec(name=f"Team {i:02d}", share=0.5) for i in range(1, n_teams + 1)]


class RoundRobinSchedule:
    """
    Double round-robin fixtures, repeated season after season.

    Built with the circle method (a bye is added for an odd number of teams);
    the second half of a season repeats the first with venues swapped. Match
    index i of a corpus maps to fixture i mod n(n-1) of season i div n(n-1).
    """

    def __init__(self, teams: Sequence[TeamSpec], first_season: int):
        self.teams = list(teams)
        self.first_season = first_season
        home, away, matchday = self._fixtures(len(self.teams))
        self.home_index = np.array(home, dtype=np.int64)
        self.away_index = np.array(away, dtype=np.int64)
        self.matchday = np.array(matchday, dtype=np.int64)

    @staticmethod
    def _fixtures(n_teams: int) -> Tuple[List[int], List[int], List[int]]:
        slots = list(range(n_teams)) + ([-1] if n_teams % 2 else [])
        n_slots = len(slots)
        first_half = []
        for round_no in range(n_slots - 1):
            for j in range(n_slots // 2):
                a, b = slots[j], slots[n_slots - 1 - j]
                if a < 0 or b < 0:
                    continue
                # alternate the fixed slot's venue from round to round
                if j == 0 and round_no % 2 == 1:
                    a, b = b, a
                first_half.append((round_no + 1, a, b))
            slots = [slots[0], slots[-1]] + slots[1:-1]
        half_rounds = n_slots - 1
        fixtures = first_half + [(day + half_rounds, b, a) for day, a, b in first_half]
        return [a for _, a, _ in fixtures], [b for _, _, b in fixtures], [d for d, _, _ in fixtures]

    @property
    def matches_per_season(self) -> int:
        return len(self.matchday)

    def season_start(self, index: int) -> int:
        return self.first_season + index // self.matches_per_season

    def fixture_indices(self, indices: np.ndarray) -> np.ndarray:
        return indices % self.matches_per_season


def _home_thresholds(config: SimConfig, schedule: RoundRobinSchedule,
                     fixtures: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Per-match home share q, the home side's boosted share and the away side's
    boosted share (NaN where no boost applies).

    Team shares s_h, s_a combine with the league home share h as
    q = h s_h / (h s_h + (1 - h) s_a); equal team shares give q = h.
    """
    h = config.home_share
    shares = np.array([team.share for team in schedule.teams], dtype=float)
    fallback = np.nan if config.resilience_boost is None else config.resilience_boost
    boosts = np.array([fallback if team.boost is None else team.boost for team in schedule.teams], dtype=float)
    home = schedule.home_index[fixtures]
    away = schedule.away_index[fixtures]
    weighted_home = h * shares[home]
    denominator = weighted_home + (1.0 - h) * shares[away]
    safe = np.where(denominator > 0, denominator, 1.0)
    q = np.where(denominator > 0, weighted_home / safe, h)
    return q, boosts[home], boosts[away]


def _poisson_totals(rng: np.random.Generator, expected_goals: float, count: int) -> np.ndarray:
    """Total goals by inversion of the Poisson CDF truncated at the tail tolerance."""
    if expected_goals == 0.0:
        cdf = np.ones(1)
    else:
        cdf = poisson.cdf(np.arange(truncation_limit(expected_goals) + 1), expected_goals)
        cdf[-1] = 1.0
    return np.searchsorted(cdf, rng.random(count), side="right")


def _goal_sequences(rng: np.random.Generator, expected_goals: float, q: np.ndarray,
                    home_boost: np.ndarray, away_boost: np.ndarray) -> List[str]:
    """Draw one goal sequence per entry of q."""
    count = len(q)
    totals = _poisson_totals(rng, expected_goals, count)
    width = int(totals.max()) if count else 0
    uniforms = rng.random((count, width))
    thresholds = np.repeat(q[:, None], width, axis=1)
    if width >= 2:
        first_home = uniforms[:, 0] < q
        second_home = uniforms[:, 1] < q
        has_two = totals >= 2
        home_trails = has_two & ~first_home & ~second_home & ~np.isnan(home_boost)
        away_trails = has_two & first_home & second_home & ~np.isnan(away_boost)
        thresholds[home_trails, 2:] = home_boost[home_trails, None]
        thresholds[away_trails, 2:] = 1.0 - away_boost[away_trails, None]
    codes = np.where(uniforms < thresholds, ord("H"), ord("A")).astype(np.uint8)
    return [codes[i, :totals[i]].tobytes().decode("ascii") for i in range(count)]


def _generate_block(config: SimConfig, schedule: RoundRobinSchedule, start: int, count: int,
                    rng: np.random.Generator) -> List[str]:
    indices = np.arange(start, start + count, dtype=np.int64)
    q, home_boost, away_boost = _home_thresholds(config, schedule, schedule.fixture_indices(indices))
    sequences = _goal_sequences(rng, config.expected_goals, q, home_boost, away_boost)
    logger.debug(f"Generated matches {start}..{start + count - 1}")
    return sequences


def _record(schedule: RoundRobinSchedule, index: int, sequence: str) -> MatchRecord:
    fixture = index % schedule.matches_per_season
    # generated fields are valid by construction
    return MatchRecord.model_construct(
        season=season_label(schedule.season_start(index)),
        matchday=int(schedule.matchday[fixture]),
        home_team=schedule.teams[schedule.home_index[fixture]].name,
        away_team=schedule.teams[schedule.away_index[fixture]].name,
        goal_sequence=sequence,
        date=None,
    )


def _schedule_for(config: SimConfig) -> RoundRobinSchedule:
    return RoundRobinSchedule(config.team_pool or default_team_pool(), config.first_season)


def simulate_match(config: SimConfig, rng: np.random.Generator, index: int = 0,
                   schedule: Optional[RoundRobinSchedule] = None) -> MatchRecord:
    """
    Simulate one match with an explicit generator.

    Args:
        config: Simulation setup (n_matches and seed are not used here)
        rng: numpy Generator; advanced by the draw
        index: Corpus position, which fixes season, matchday and teams
        schedule: Fixture list; built from the config when omitted
    """
    schedule = schedule or _schedule_for(config)
    sequence = _generate_block(config, schedule, index, 1, rng)[0]
    return _record(schedule, index, sequence)


def block_generators(seed: int, n_matches: int, block_size: int = SIM_BLOCK_SIZE) -> List[np.random.Generator]:
    """One PCG64 generator per block, spawned from the master seed."""
    n_blocks = max(1, -(-n_matches // block_size))
    return [np.random.Generator(np.random.PCG64(child)) for child in np.random.SeedSequence(seed).spawn(n_blocks)]


def check_season_range(config: SimConfig, schedule: Optional[RoundRobinSchedule] = None) -> RoundRobinSchedule:
    """
    Build the schedule and make sure the whole corpus fits four-digit seasons.

    Raises:
        ValueError: if the corpus would run past season 9998/99
    """
    schedule = schedule or _schedule_for(config)
    last_season = schedule.season_start(config.n_matches - 1)
    if last_season > LAST_SEASON_START:
        raise ValueError(
            f"{config.n_matches} matches need seasons up to {last_season}; use a larger team pool or fewer matches"
        )
    return schedule


def simulate_corpus(config: SimConfig, block_size: int = SIM_BLOCK_SIZE) -> Iterator[MatchRecord]:
    """
    Stream config.n_matches simulated matches in corpus order.

    Blocks are generated on config.workers threads; output is identical for
    any worker count. The season range is checked on the first next().

    Raises:
        ValueError: if the corpus would run past season 9998/99
    """
    schedule = check_season_range(config)
    n = config.n_matches
    generators = block_generators(config.seed, n, block_size)
    tasks = [(b * block_size, min(block_size, n - b * block_size), rng) for b, rng in enumerate(generators)]
    log_info(logger, "Simulating corpus", {
        "matches": n, "blocks": len(tasks), "workers": config.workers, "seed": config.seed,
        "expected_goals": config.expected_goals, "home_share": config.home_share,
        "boost": config.resilience_boost,
    })
    window = max(1, config.workers * 2)
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        for offset in range(0, len(tasks), window):
            batch = tasks[offset:offset + window]
            results = pool.map(lambda task: _generate_block(config, schedule, *task), batch)
            for (start, _, _), sequences in zip(batch, results):
                for i, sequence in enumerate(sequences):
                    yield _record(schedule, start + i, sequence)
