"""
Match data ingestion and the empirical frequency tables behind the resilience analysis.

Pipeline: parse_dataset -> count_records (per team, season and venue; partitions
merge by addition) -> build_frequency_table (season periods, league key ALL)
-> neutralize_home_advantage. The theoretical counterparts of the tables and the
home-advantage trend fit live here as well.
"""
import math
import re
from itertools import islice
from pathlib import Path
from typing import BinaryIO, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, TextIO, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError
from scipy.stats import chisquare, linregress

from core.config import (
    ALL_PERIODS_LABEL,
    ALL_TEAMS_KEY,
    CSV_COLUMNS,
    CSV_OPTIONAL_COLUMNS,
    GOAL_HISTOGRAM_MAX,
    INGEST_CHUNK_SIZE,
    NEUTRAL_SHARE,
    POINTS_PER_DRAW,
    POINTS_PER_WIN,
    TREND_HORIZON_YEARS,
)
from core.errors import DatasetParseError, DatasetSchemaError, RowIssue
from core.logger import log_info, log_warning, setup_logger
from core.match_schema import LeewayMode, MatchRecord, Outcome, PeriodSpec, Side, season_label
from core.model_schema import LeagueParams, TrendFit
from services.resilience import comeback_prob
from services.scoring_model import first_goal_prob, strict_leeway_prob, total_goals_pmf

logger = setup_logger(__name__)

Source = Union[str, Path, BinaryIO]

VENUES = ("home", "away")
COUNT_NAMES = (
    "matches",
    "leeway02",
    "comeback",
    "comeback_win",
    "comeback_draw",
    "first_goal_conceded",
    "goals_for",
    "goals_against",
    "wins",
    "draws",
    "losses",
)
NEUTRAL_COLUMNS = ("hT01", "hT02", "h_wd")
BAD_LINE_MARKER = "\x00bad line"


# ---------------------------------------------------------------------------
# Ingestion
# ---------------------------------------------------------------------------

class ParseReport:
    """Collects row diagnostics while a dataset is streamed."""

    def __init__(self):
        self.rows_read = 0
        self.records = 0
        self.issues: List[RowIssue] = []

    @property
    def skipped(self) -> int:
        return len(self.issues)

    def as_dict(self) -> dict:
        return {
            "rows_read": self.rows_read,
            "records": self.records,
            "skipped": self.skipped,
            "issues": [str(issue) for issue in self.issues],
        }


def _is_missing(value) -> bool:
    return value is None or (isinstance(value, float) and math.isnan(value))


def _describe_validation_error(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        loc = ".".join(str(x) for x in item.get("loc", ())) or "record"
        msg = item.get("msg", "invalid value").removeprefix("Value error, ")
        parts.append(f"{loc}: {msg}")
    return "; ".join(parts)


def _row_to_record(row: Mapping, row_number: int) -> Tuple[Optional[MatchRecord], Optional[RowIssue]]:
    first = next(iter(row.values()), None)
    if isinstance(first, str) and first.startswith(BAD_LINE_MARKER):
        seen = first[len(BAD_LINE_MARKER):]
        return None, RowIssue(row_number, f"expected {len(row)} fields, saw {seen}")
    missing = [col for col in CSV_COLUMNS if _is_missing(row.get(col))]
    if missing:
        return None, RowIssue(row_number, f"missing column(s) {', '.join(missing)}")
    data = {col: row[col] for col in CSV_COLUMNS}
    date = row.get("date")
    if not _is_missing(date) and date != "":
        data["date"] = date
    try:
        return MatchRecord.model_validate(data), None
    except ValidationError as e:
        return None, RowIssue(row_number, _describe_validation_error(e))


def _batches(items: Iterable, size: int) -> Iterator[list]:
    iterator = iter(items)
    while True:
        batch = list(islice(iterator, size))
        if not batch:
            return
        yield batch


def _keep_bad_line(fields: List[str]) -> List[str]:
    # stands in for the over-wide row so it keeps its line number
    return [f"{BAD_LINE_MARKER}{len(fields)}"]


def _open_chunks(source: Source, chunk_size: int, strict: bool = True) -> Iterator[pd.DataFrame]:
    # lenient mode needs the python engine for a callable on_bad_lines
    lenient = {} if strict else {"engine": "python", "on_bad_lines": _keep_bad_line, "index_col": False}
    try:
        reader = pd.read_csv(
            source,
            dtype=str,
            keep_default_na=False,
            na_filter=False,
            encoding="utf-8",
            chunksize=chunk_size,
            **lenient,
        )
    except pd.errors.EmptyDataError as e:
        raise DatasetSchemaError("input is empty, a header row is required") from e
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise DatasetSchemaError(f"input is not valid UTF-8 CSV: {e}") from e
    with reader:
        try:
            yield from reader
        except pd.errors.ParserError as e:
            line = re.search(r"line (\d+)", str(e))
            raise DatasetParseError([RowIssue(int(line.group(1)) if line else 0, str(e))]) from e
        except UnicodeDecodeError as e:
            raise DatasetSchemaError(f"input is not valid UTF-8: {e}") from e


def parse_dataset(source: Source, strict: bool = True,
                  report: Optional[ParseReport] = None,
                  chunk_size: int = INGEST_CHUNK_SIZE) -> Iterator[MatchRecord]:
    """
    Stream MatchRecords from a CSV source.

    The header must contain season, matchday, home_team, away_team and
    goal_sequence; an optional date column is accepted and ignored by the
    analytics. Rows are validated one by one.

    Args:
        source: Path or binary stream with UTF-8 CSV
        strict: Abort at the first invalid row (lenient mode skips and reports it)
        report: Optional collector for row counts and diagnostics
        chunk_size: Rows read per chunk

    Yields:
        One MatchRecord per valid data row

    Raises:
        DatasetSchemaError: if the header lacks a required column
        DatasetParseError: on an invalid row in strict mode
    """
    report = report if report is not None else ParseReport()
    row_number = 1  # header line
    header_checked = False
    for chunk in _open_chunks(source, chunk_size, strict):
        if not header_checked:
            columns = [str(c).strip() for c in chunk.columns]
            missing = [col for col in CSV_COLUMNS if col not in columns]
            if missing:
                raise DatasetSchemaError(f"missing column(s) in header: {', '.join(missing)}")
            unknown = [col for col in columns if col not in CSV_COLUMNS + CSV_OPTIONAL_COLUMNS]
            if unknown:
                log_warning(logger, "Ignoring unknown columns", {"columns": unknown})
            chunk.columns = columns
            header_checked = True
        else:
            chunk.columns = [str(c).strip() for c in chunk.columns]
        for row in chunk.to_dict("records"):
            row_number += 1
            report.rows_read += 1
            record, issue = _row_to_record(row, row_number)
            if issue is not None:
                if strict:
                    raise DatasetParseError([issue])
                report.issues.append(issue)
                log_warning(logger, "Skipping invalid row", {"row": issue.row, "reason": issue.message})
                continue
            report.records += 1
            yield record
    if not header_checked:
        log_warning(logger, "Dataset has a header but no data rows")
    log_info(logger, "Dataset parsed", {"rows": report.rows_read, "records": report.records, "skipped": report.skipped})


def write_corpus_csv(records: Iterable[MatchRecord], destination: Union[str, Path, TextIO],
                     chunk_size: int = INGEST_CHUNK_SIZE) -> int:
    """
    Write records in the ingestion format (header included, '\\n' line endings).

    Returns:
        Number of records written
    """
    written = 0
    owned = isinstance(destination, (str, Path))
    handle = open(destination, "w", encoding="utf-8", newline="") if owned else destination
    try:
        pd.DataFrame(columns=list(CSV_COLUMNS)).to_csv(handle, index=False, lineterminator="\n")
        for batch in _batches(records, chunk_size):
            frame = pd.DataFrame(
                [(r.season, r.matchday, r.home_team, r.away_team, r.goal_sequence) for r in batch],
                columns=list(CSV_COLUMNS),
            )
            frame.to_csv(handle, index=False, header=False, lineterminator="\n")
            written += len(batch)
    finally:
        if owned:
            handle.close()
    return written


# ---------------------------------------------------------------------------
# Leeway detection
# ---------------------------------------------------------------------------

def _trails_by_two(sequence: str, opponent: str, mode: LeewayMode) -> bool:
    if mode is LeewayMode.STRICT:
        return sequence[:2] == opponent * 2
    margin = 0
    for goal in sequence:
        margin += -1 if goal == opponent else 1
        if margin <= -2:
            return True
    return False


def detect_leeway02(record: MatchRecord, perspective: Side, mode: LeewayMode = LeewayMode.STRICT) -> bool:
    """
    Whether `perspective` trailed by two goals.

    STRICT: the opponent scored the first two goals of the match.
    ANY_DEFICIT: the opponent led by two or more after some goal.
    """
    return _trails_by_two(record.goal_sequence, perspective.opponent.value, mode)


def classify_after_leeway(record: MatchRecord, perspective: Side) -> Outcome:
    """Final result of the trailing side; WIN or DRAW count as a comeback."""
    assert detect_leeway02(record, perspective, LeewayMode.ANY_DEFICIT), \
        "classify_after_leeway needs a match with a 0:2 leeway for this side"
    score = record.score(perspective)
    return _outcome(score.for_goals, score.against_goals)


def _outcome(for_goals: int, against_goals: int) -> Outcome:
    if for_goals > against_goals:
        return Outcome.WIN
    if for_goals == against_goals:
        return Outcome.DRAW
    return Outcome.LOSS


# ---------------------------------------------------------------------------
# Counting (a commutative monoid over record partitions)
# ---------------------------------------------------------------------------

class MatchCounts:
    """
    Per (team, season, venue) counts plus the per-season total-goals histogram.

    Counts from disjoint partitions merge by addition, so records can be
    counted in parallel chunks.
    """

    def __init__(self, team_counts: pd.DataFrame, goal_histogram: pd.Series, mode: LeewayMode):
        self.team_counts = team_counts
        self.goal_histogram = goal_histogram
        self.mode = mode

    @classmethod
    def empty(cls, mode: LeewayMode = LeewayMode.STRICT) -> 'MatchCounts':
        index = pd.MultiIndex.from_tuples([], names=["team", "season", "venue"])
        team_counts = pd.DataFrame(columns=list(COUNT_NAMES), index=index, dtype="int64")
        histogram = pd.Series(
            [], index=pd.MultiIndex.from_tuples([], names=["season", "goals"]), dtype="int64", name="matches"
        )
        return cls(team_counts, histogram, mode)

    def merge(self, other: 'MatchCounts') -> 'MatchCounts':
        if other.mode is not self.mode:
            raise ValueError("cannot merge counts taken with different leeway modes")
        if other.n_matches == 0:
            return self
        if self.n_matches == 0:
            return other
        team_counts = pd.concat([self.team_counts, other.team_counts])
        histogram = pd.concat([self.goal_histogram, other.goal_histogram])
        return MatchCounts(
            team_counts.groupby(level=["team", "season", "venue"]).sum().astype("int64"),
            histogram.groupby(level=["season", "goals"]).sum().astype("int64"),
            self.mode,
        )

    @property
    def n_matches(self) -> int:
        return int(self.goal_histogram.sum())

    @property
    def seasons(self) -> List[int]:
        return sorted(set(self.goal_histogram.index.get_level_values("season")))

    @property
    def total_goals(self) -> int:
        histogram = self.goal_histogram
        return int((histogram.index.get_level_values("goals").to_numpy() * histogram.to_numpy()).sum())


def _perspective_counts(sequence: str, for_goals: int, against_goals: int,
                        opponent: str, mode: LeewayMode) -> tuple:
    leeway = _trails_by_two(sequence, opponent, mode)
    outcome = _outcome(for_goals, against_goals)
    return (
        1,
        int(leeway),
        int(leeway and outcome is not Outcome.LOSS),
        int(leeway and outcome is Outcome.WIN),
        int(leeway and outcome is Outcome.DRAW),
        int(sequence[:1] == opponent),
        for_goals,
        against_goals,
        int(outcome is Outcome.WIN),
        int(outcome is Outcome.DRAW),
        int(outcome is Outcome.LOSS),
    )


def count_partition(records: Iterable[MatchRecord], mode: LeewayMode = LeewayMode.STRICT) -> MatchCounts:
    """Count one partition of records; each match adds one home and one away perspective row."""
    rows = []
    totals = []
    seasons: Dict[str, int] = {}
    for record in records:
        season = seasons.get(record.season)
        if season is None:
            season = seasons[record.season] = record.season_start
        sequence = record.goal_sequence
        home_goals = sequence.count(Side.HOME.value)
        away_goals = len(sequence) - home_goals
        rows.append((record.home_team, season, "home")
                    + _perspective_counts(sequence, home_goals, away_goals, Side.AWAY.value, mode))
        rows.append((record.away_team, season, "away")
                    + _perspective_counts(sequence, away_goals, home_goals, Side.HOME.value, mode))
        totals.append((season, len(sequence)))
    if not rows:
        return MatchCounts.empty(mode)
    frame = pd.DataFrame(rows, columns=["team", "season", "venue", *COUNT_NAMES])
    team_counts = frame.groupby(["team", "season", "venue"])[list(COUNT_NAMES)].sum().astype("int64")
    histogram = (
        pd.DataFrame(totals, columns=["season", "goals"])
        .groupby(["season", "goals"]).size().astype("int64").rename("matches")
    )
    return MatchCounts(team_counts, histogram, mode)


def count_records(records: Iterable[MatchRecord], mode: LeewayMode = LeewayMode.STRICT,
                  chunk_size: int = INGEST_CHUNK_SIZE) -> MatchCounts:
    """Count a record stream chunk by chunk and merge the partial counts."""
    counts = MatchCounts.empty(mode)
    for chunk in _batches(records, chunk_size):
        counts = counts.merge(count_partition(chunk, mode))
        logger.debug(f"Counted {len(chunk)} matches (total {counts.n_matches})")
    return counts


def validate_season_structure(counts: MatchCounts) -> List[str]:
    """
    Warn-only check that each season is a complete double round-robin.

    A season with n distinct teams should have n(n-1) matches; league sizes
    changed over time, so deviations are reported, never rejected.
    """
    warnings = []
    home = counts.team_counts.xs("home", level="venue")["matches"]
    matches_per_season = home.groupby(level="season").sum()
    teams_per_season = counts.team_counts.groupby(level="season").apply(
        lambda frame: frame.index.get_level_values("team").nunique()
    )
    for season, matches in matches_per_season.items():
        n_teams = int(teams_per_season.get(season, 0))
        expected = n_teams * (n_teams - 1)
        if int(matches) != expected:
            warnings.append(
                f"season {season_label(int(season))}: {int(matches)} matches among {n_teams} teams, "
                f"a double round-robin has {expected}"
            )
    for message in warnings[:20]:
        log_warning(logger, "Season structure", {"detail": message})
    return warnings


# ---------------------------------------------------------------------------
# Frequency tables
# ---------------------------------------------------------------------------

def _ratio(numerator: pd.Series, denominator: pd.Series) -> pd.Series:
    """numerator / denominator, absent (NaN) where the denominator is 0."""
    return numerator.astype(float) / denominator.where(denominator > 0).astype(float)


def _relative_frequencies(counts: pd.DataFrame) -> pd.DataFrame:
    c = counts
    freq = pd.DataFrame(index=c.index)
    goals_home = c["goals_for_home"] + c["goals_against_home"]
    goals_away = c["goals_for_away"] + c["goals_against_away"]
    freq["expected_goals"] = _ratio(goals_home + goals_away, c["matches_home"] + c["matches_away"])
    freq["p_home"] = _ratio(c["goals_for_home"], goals_home)
    freq["p_away"] = _ratio(c["goals_for_away"], goals_away)
    for venue in VENUES:
        freq[f"hT01_{venue}"] = _ratio(c[f"first_goal_conceded_{venue}"], c[f"matches_{venue}"])
        freq[f"hT02_{venue}"] = _ratio(c[f"leeway02_{venue}"], c[f"matches_{venue}"])
        freq[f"h_wd_{venue}"] = _ratio(c[f"comeback_{venue}"], c[f"leeway02_{venue}"])
    freq["hT01_pooled"] = _ratio(c["first_goal_conceded_home"] + c["first_goal_conceded_away"],
                                 c["matches_home"] + c["matches_away"])
    freq["hT02_pooled"] = _ratio(c["leeway02_home"] + c["leeway02_away"], c["matches_home"] + c["matches_away"])
    freq["h_wd_pooled"] = _ratio(c["comeback_home"] + c["comeback_away"], c["leeway02_home"] + c["leeway02_away"])
    for name in NEUTRAL_COLUMNS:
        freq[name] = np.nan
    return freq


class FrequencyTable:
    """
    Counts and relative frequencies per key (team or ALL) and season period (or ALL).

    `counts` holds `<count>_home` / `<count>_away` columns; `frequencies` holds
    the derived relative frequencies, NaN where a denominator is zero. The
    neutral columns hT01, hT02 and h_wd are filled by neutralize_home_advantage.
    """

    def __init__(self, counts: pd.DataFrame, periods: PeriodSpec, mode: LeewayMode,
                 frequencies: Optional[pd.DataFrame] = None):
        self.counts = counts
        self.periods = periods
        self.mode = mode
        self.frequencies = frequencies if frequencies is not None else _relative_frequencies(counts)

    @property
    def keys(self) -> List[str]:
        return list(dict.fromkeys(self.counts.index.get_level_values("key")))

    @property
    def period_labels(self) -> List[str]:
        return list(dict.fromkeys(self.counts.index.get_level_values("period")))

    @property
    def neutralized(self) -> bool:
        return bool(self.frequencies[list(NEUTRAL_COLUMNS)].notna().any().any())

    def row(self, key: str = ALL_TEAMS_KEY, period: str = ALL_PERIODS_LABEL) -> pd.Series:
        """Counts and frequencies of one key/period as a single Series."""
        return pd.concat([self.counts.loc[(key, period)], self.frequencies.loc[(key, period)]])

    def league(self, by_period: bool = True) -> pd.DataFrame:
        """League (ALL) rows, per period or all-time only."""
        frame = self.counts.join(self.frequencies).xs(ALL_TEAMS_KEY, level="key")
        if by_period:
            return frame.drop(index=ALL_PERIODS_LABEL, errors="ignore")
        return frame.loc[[ALL_PERIODS_LABEL]]

    def teams(self, period: str = ALL_PERIODS_LABEL) -> pd.DataFrame:
        """Per-team rows for one period."""
        frame = self.counts.join(self.frequencies).xs(period, level="period")
        return frame.drop(index=ALL_TEAMS_KEY, errors="ignore")


def _aggregate(long: pd.DataFrame, keys: List[str]) -> pd.DataFrame:
    grouped = long.groupby(keys + ["venue"])[list(COUNT_NAMES)].sum()
    wide = grouped.unstack("venue", fill_value=0)
    for name in COUNT_NAMES:
        for venue in VENUES:
            if (name, venue) not in wide.columns:
                wide[(name, venue)] = 0
    wide.columns = [f"{name}_{venue}" for name, venue in wide.columns]
    return wide[[f"{name}_{venue}" for name in COUNT_NAMES for venue in VENUES]].astype("int64")


def build_frequency_table(records: Union[Iterable[MatchRecord], MatchCounts],
                          periods: Optional[PeriodSpec] = None,
                          mode: LeewayMode = LeewayMode.STRICT) -> FrequencyTable:
    """
    Aggregate match records into per-team and league frequency tables.

    Each match contributes a home-perspective and an away-perspective row.
    Leeway frequencies are relative to matches played, comeback frequencies
    relative to leeway matches only.

    Args:
        records: Match records, or counts already taken with `count_records`
        periods: Season periods; defaults to 9 seasons, then decades, from the first season
        mode: Leeway definition

    Raises:
        ValueError: if there are no records
        PeriodSpecError: if the periods do not cover every season
    """
    counts = records if isinstance(records, MatchCounts) else count_records(records, mode)
    if counts.n_matches == 0:
        raise ValueError("cannot build a frequency table without matches")
    mode = counts.mode
    seasons = counts.seasons
    if periods is None:
        periods = PeriodSpec.from_layout(seasons[0], seasons[-1])
    periods.require_coverage(seasons)

    long = counts.team_counts.reset_index()
    long["period"] = long["season"].map(lambda year: periods.period_for(int(year)).label)
    team_by_period = _aggregate(long, ["team", "period"])
    team_all_time = _aggregate(long, ["team"])
    league_by_period = _aggregate(long, ["period"])

    frames = []
    used = set(long["period"])
    period_order = [p.label for p in periods.periods if p.label in used] + [ALL_PERIODS_LABEL]
    league_all = _aggregate(long.assign(_all=ALL_PERIODS_LABEL), ["_all"])
    league = pd.concat([league_by_period, league_all.rename_axis("period")])
    league.index = pd.MultiIndex.from_product([[ALL_TEAMS_KEY], league.index], names=["key", "period"])
    frames.append(league)
    team_all_time.index = pd.MultiIndex.from_arrays(
        [team_all_time.index, [ALL_PERIODS_LABEL] * len(team_all_time)], names=["key", "period"]
    )
    team_by_period.index = team_by_period.index.set_names(["key", "period"])
    frames.extend([team_by_period, team_all_time])
    table = pd.concat(frames)

    team_names = sorted(set(long["team"]))
    order = [(ALL_TEAMS_KEY, p) for p in period_order]
    order += [(team, p) for team in team_names for p in period_order if (team, p) in table.index]
    table = table.loc[order]
    log_info(logger, "Frequency table built", {
        "matches": counts.n_matches, "teams": len(team_names), "periods": len(period_order) - 1, "mode": mode.value
    })
    return FrequencyTable(table, periods, mode)


def neutralize_home_advantage(table: FrequencyTable) -> FrequencyTable:
    """
    Compensate the home advantage by averaging home and away perspectives.

    Uses the plain mean where a key played as many home as away matches in the
    period, otherwise a mean weighted by the home/away match counts. Absent
    inputs give absent outputs. Applying it twice changes nothing.
    """
    counts = table.counts
    freq = table.frequencies.copy()
    home_matches = counts["matches_home"].astype(float)
    away_matches = counts["matches_away"].astype(float)
    balanced = home_matches == away_matches
    total = (home_matches + away_matches).where(lambda s: s > 0)
    home_weight = pd.Series(np.where(balanced, 0.5, home_matches / total), index=counts.index)
    away_weight = pd.Series(np.where(balanced, 0.5, away_matches / total), index=counts.index)
    for name in NEUTRAL_COLUMNS:
        home = freq[f"{name}_home"]
        away = freq[f"{name}_away"]
        freq[name] = (home_weight * home + away_weight * away).where(home.notna() & away.notna())
    return FrequencyTable(counts, table.periods, table.mode, frequencies=freq)


# ---------------------------------------------------------------------------
# Theoretical counterparts
# ---------------------------------------------------------------------------

def expected_goals_from_totals(goals: int, matches: int) -> float:
    """Goals per match; rejects matches == 0."""
    if matches <= 0:
        raise ValueError("matches must be positive to compute goals per match")
    if goals < 0:
        raise ValueError("goals must be non-negative")
    return goals / matches


def league_params_by_period(table: FrequencyTable, include_all_time: bool = False) -> Dict[str, LeagueParams]:
    """LeagueParams (E, p_home, p_away) of the league per period."""
    league = table.league()
    if include_all_time:
        league = pd.concat([table.league(), table.league(by_period=False)])
    params = {}
    for label, row in league.iterrows():
        if pd.isna(row["p_home"]):
            params[label] = LeagueParams.from_expected_goals(float(row["expected_goals"]), NEUTRAL_SHARE)
        else:
            params[label] = LeagueParams.from_expected_goals(float(row["expected_goals"]), float(row["p_home"]))
    return params


def theoretical_leeway_table(period_params: Mapping[str, LeagueParams],
                             share: float = NEUTRAL_SHARE) -> pd.DataFrame:
    """
    Model probabilities per period next to the empirical tables.

    pT02_home/away = (1 - p)^2 with the period's home/away share; pT02 is their
    mean. The *_seq columns include the factor P(m >= 2) of the sequence-exact
    leeway. pT01_* are the first-goal-conceded probabilities, and p_wd / p_wd_seq
    apply the comeback formula to the neutral leeway probability at `share`.
    """
    rows = []
    for label, params in period_params.items():
        home, away = params.home_share, params.away_share
        pt_home, pt_away = (1.0 - home) ** 2, (1.0 - away) ** 2
        seq_home, seq_away = strict_leeway_prob(params, home), strict_leeway_prob(params, away)
        neutral = (pt_home + pt_away) / 2.0
        neutral_seq = (seq_home + seq_away) / 2.0
        rows.append({
            "period": label,
            "expected_goals": params.expected_goals,
            "p_home": home,
            "p_away": away,
            "pT01_home": first_goal_prob(params, away),
            "pT01_away": first_goal_prob(params, home),
            "pT02_home": pt_home,
            "pT02_away": pt_away,
            "pT02": neutral,
            "pT02_seq_home": seq_home,
            "pT02_seq_away": seq_away,
            "pT02_seq": neutral_seq,
            "p_wd": comeback_prob(neutral, share),
            "p_wd_seq": comeback_prob(neutral_seq, share),
        })
    return pd.DataFrame(rows).set_index("period")


def goal_histogram_table(counts: MatchCounts, max_goals: int = GOAL_HISTOGRAM_MAX) -> Tuple[pd.DataFrame, Optional[dict]]:
    """
    Total goals per match against the Poisson model at the all-time E.

    Returns:
        (table with rows 0..max_goals and a pooled '>max' tail, chi-square fit
        summary or None when the fit is undefined)
    """
    n = counts.n_matches
    histogram = counts.goal_histogram.groupby(level="goals").sum()
    expected_goals = expected_goals_from_totals(counts.total_goals, n)
    params = LeagueParams.from_expected_goals(expected_goals)
    observed = [int(histogram.get(m, 0)) for m in range(max_goals + 1)]
    observed.append(int(n - sum(observed)))
    model = [total_goals_pmf(m, params) for m in range(max_goals + 1)]
    model.append(max(1.0 - sum(model), 0.0))
    labels = [str(m) for m in range(max_goals + 1)] + [f">{max_goals}"]
    table = pd.DataFrame({
        "goals": labels,
        "matches": observed,
        "relative_frequency": [o / n for o in observed],
        "poisson": model,
    }).set_index("goals")

    fit = None
    expected_counts = np.array(model) * n
    usable = expected_counts > 0
    if expected_goals > 0 and usable.sum() >= 2:
        f_obs = np.array(observed, dtype=float)[usable]
        f_exp = expected_counts[usable]
        f_exp = f_exp * f_obs.sum() / f_exp.sum()
        result = chisquare(f_obs, f_exp, ddof=1)
        fit = {
            "expected_goals": expected_goals,
            "statistic": float(result.statistic),
            "p_value": float(result.pvalue),
            "bins": int(usable.sum()),
        }
    return table, fit


def all_time_table(table: FrequencyTable) -> pd.DataFrame:
    """Wins, draws, losses, goals and points per team, ranked."""
    teams = table.teams(ALL_PERIODS_LABEL)
    ranking = pd.DataFrame(index=teams.index)
    ranking["played"] = teams["matches_home"] + teams["matches_away"]
    ranking["wins"] = teams["wins_home"] + teams["wins_away"]
    ranking["draws"] = teams["draws_home"] + teams["draws_away"]
    ranking["losses"] = teams["losses_home"] + teams["losses_away"]
    ranking["goals_for"] = teams["goals_for_home"] + teams["goals_for_away"]
    ranking["goals_against"] = teams["goals_against_home"] + teams["goals_against_away"]
    ranking["points"] = ranking["wins"] * POINTS_PER_WIN + ranking["draws"] * POINTS_PER_DRAW
    ranking["goal_difference"] = ranking["goals_for"] - ranking["goals_against"]
    ranking = ranking.rename_axis("team").reset_index()
    ranking = ranking.sort_values(
        ["points", "goal_difference", "goals_for", "team"], ascending=[False, False, False, True]
    )
    ranking["rank"] = range(1, len(ranking) + 1)
    return ranking.set_index("team")


# ---------------------------------------------------------------------------
# Home-advantage trend
# ---------------------------------------------------------------------------

def home_share_series(table: FrequencyTable) -> List[Tuple[float, float]]:
    """(period midpoint, p_home) per period with a defined home share."""
    league = table.league()
    series = []
    for period in table.periods.periods:
        if period.label in league.index and not pd.isna(league.loc[period.label, "p_home"]):
            series.append((period.midpoint, float(league.loc[period.label, "p_home"])))
    return series


def fit_home_share_trend(series: Sequence[Tuple[float, float]],
                         periods: Optional[PeriodSpec] = None) -> TrendFit:
    """
    Least-squares line through (period midpoint year, p_home) points.

    The slope is reported per decade. The vanish period is the period (the
    configured layout continued with its last bucket width) containing the
    year where the line reaches 0.5, searched from the first point up to
    TREND_HORIZON_YEARS after the last; "none" if the line does not get there.

    Raises:
        ValueError: with fewer than two points
    """
    if len(series) < 2:
        raise ValueError("a trend needs at least two points")
    years = np.array([x for x, _ in series], dtype=float)
    shares = np.array([y for _, y in series], dtype=float)
    if np.ptp(years) == 0:
        raise ValueError("trend points must span more than one year")
    fit = linregress(years, shares)
    slope_per_year = float(fit.slope)
    intercept = float(fit.intercept)

    vanish_period = "none"
    vanish_year = None
    if slope_per_year != 0.0:
        crossing = (NEUTRAL_SHARE - intercept) / slope_per_year
        if years.min() <= crossing <= years.max() + TREND_HORIZON_YEARS:
            vanish_year = float(crossing)
            period = periods.extended_to(crossing).period_for(crossing) if periods is not None else None
            vanish_period = period.label if period is not None else season_label(int(math.floor(crossing)))
    log_info(logger, "Home share trend fitted", {
        "slope_per_decade": round(slope_per_year * 10.0, 6), "vanish_period": vanish_period
    })
    return TrendFit(
        slope=slope_per_year * 10.0,
        intercept=intercept,
        vanish_period=vanish_period,
        vanish_year=vanish_year,
        points=len(series),
    )
