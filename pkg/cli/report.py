"""
Analyze report assembly and export.

The report is a plain JSON document (schema in docs/report_schema.json):
metadata with the config echo and input digest, a league section with the
per-period tables and the home-share trend, one section per team, and the
plot-ready tables behind each figure. JSON output is byte-stable for a fixed
input, flags and tool version.
"""
import hashlib
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from core.config import ALL_PERIODS_LABEL, ALL_TEAMS_KEY, REPORT_SCHEMA_VERSION
from core.errors import NoSolutionError
from core.logger import log_warning, setup_logger
from core.match_schema import Period
from services.dataset_service import (
    FrequencyTable,
    MatchCounts,
    ParseReport,
    all_time_table,
    fit_home_share_trend,
    goal_histogram_table,
    home_share_series,
    league_params_by_period,
    neutralize_home_advantage,
    theoretical_leeway_table,
)
from services.resilience import (
    comeback_prob,
    max_comeback_bound,
    required_strength,
    resilience_delta,
    strength_from_trailing,
)

logger = setup_logger(__name__)

FIGURE_NAMES = ("figure1", "figure2", "figure3", "figure4", "figure5", "figure6")


class ReportDocument(BaseModel):
    """The analyze report. Absent values are null."""
    schema_version: str = REPORT_SCHEMA_VERSION
    metadata: Dict[str, Any]
    league: Dict[str, Any]
    teams: List[Dict[str, Any]]
    figures: Dict[str, List[Dict[str, Any]]]
    warnings: List[str] = Field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, indent=2, allow_nan=False) + "\n"


def file_digest(path: Union[str, Path]) -> str:
    """sha256 of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def to_builtin(value: Any) -> Any:
    """Convert numpy/pandas scalars to JSON-ready Python values; NaN becomes None."""
    if isinstance(value, dict):
        return {str(k): to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(v) for v in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return None if math.isnan(value) or math.isinf(value) else float(value)
    if value is None or value is pd.NA:
        return None
    return value


def frame_records(frame: pd.DataFrame, index_name: Optional[str] = None) -> List[Dict[str, Any]]:
    """DataFrame rows (index included as the first column) as JSON-ready dicts."""
    frame = frame.copy()
    if index_name is not None:
        frame.index = frame.index.rename(index_name)
    frame = frame.reset_index()
    return [to_builtin(row) for row in frame.to_dict("records")]


def frequency(numerator: Any, denominator: Any, value: Any = None) -> Dict[str, Any]:
    """A frequency with its numerator and denominator; value defaults to their ratio."""
    numerator, denominator = int(numerator), int(denominator)
    if value is None:
        value = numerator / denominator if denominator > 0 else None
    return {"value": to_builtin(value), "numerator": numerator, "denominator": denominator}


def _sum(row: pd.Series, name: str) -> int:
    return int(row[f"{name}_home"] + row[f"{name}_away"])


def resilience_row(row: pd.Series, compensate: bool) -> Dict[str, Any]:
    """
    Leeway and comeback frequencies of one key, with the model expectation.

    p_A comes from strength_from_trailing(hT(0,2)), the expectation from
    comeback_prob(hT(0,2), p_A); required_strength is the share that would
    explain the observed comeback frequency. Frequencies keep the pooled
    numerator/denominator; with `compensate` the model quantities use the
    venue-neutral rates reported alongside as `neutral`.
    """
    matches = _sum(row, "matches")
    leeways = _sum(row, "leeway02")
    comebacks = _sum(row, "comeback")
    trailing = row["hT02"] if compensate else row["hT02_pooled"]
    observed = row["h_wd"] if compensate else row["h_wd_pooled"]
    section: Dict[str, Any] = {
        "hT02": {**frequency(leeways, matches), "neutral": to_builtin(row["hT02"])},
        "h_wd": {**frequency(comebacks, leeways), "neutral": to_builtin(row["h_wd"])},
        "basis": "neutral" if compensate else "pooled",
        "h_win": frequency(_sum(row, "comeback_win"), leeways),
        "h_draw": frequency(_sum(row, "comeback_draw"), leeways),
        "p_A": None,
        "p_wd": None,
        "delta": None,
        "std_error": None,
        "significant": None,
        "required_strength": None,
    }
    if pd.isna(trailing):
        return section
    share = strength_from_trailing(float(trailing))
    expected = comeback_prob(float(trailing), share)
    section["p_A"] = share
    section["p_wd"] = expected
    if not pd.isna(observed):
        delta = resilience_delta(float(observed), expected, leeways)
        section["delta"] = delta.delta
        section["std_error"] = delta.std_error
        section["significant"] = delta.significant
        if trailing > 0:
            try:
                section["required_strength"] = required_strength(float(trailing), float(observed))
            except NoSolutionError:
                pass
    return section


def _period_section(period: Optional[Period], row: pd.Series) -> Dict[str, Any]:
    goals = _sum(row, "goals_for")
    home_goals = int(row["goals_for_home"])
    section = {
        "matches": int(row["matches_home"]),
        "goals": goals,
        "expected_goals": to_builtin(row["expected_goals"]),
        "p_home": frequency(home_goals, goals, row["p_home"]),
        "p_away": frequency(goals - home_goals, goals, row["p_away"]),
    }
    if period is not None:
        section.update({
            "first_season": period.first_season,
            "last_season": period.last_season,
            "midpoint": period.midpoint,
        })
    for name in ("hT01", "hT02"):
        count = "first_goal_conceded" if name == "hT01" else "leeway02"
        section[name] = {
            "home": frequency(row[f"{count}_home"], row["matches_home"], row[f"{name}_home"]),
            "away": frequency(row[f"{count}_away"], row["matches_away"], row[f"{name}_away"]),
            "neutral": to_builtin(row[name]),
        }
    section["h_wd"] = {
        "home": frequency(row["comeback_home"], row["leeway02_home"], row["h_wd_home"]),
        "away": frequency(row["comeback_away"], row["leeway02_away"], row["h_wd_away"]),
        "neutral": to_builtin(row["h_wd"]),
    }
    return section


def select_teams(ranking: pd.DataFrame, teams: Optional[Sequence[str]], top: Optional[int],
                 warnings: List[str]) -> List[str]:
    """Team names in ranking order, filtered by name and limited to the top N."""
    names = list(ranking.index)
    if teams:
        unknown = [t for t in teams if t not in ranking.index]
        for name in unknown:
            message = f"team {name!r} does not appear in the data"
            warnings.append(message)
            log_warning(logger, "Unknown team filter", {"team": name})
        wanted = set(teams)
        names = [n for n in names if n in wanted]
    if top is not None:
        names = names[:top]
    return names


def build_report(table: FrequencyTable, counts: MatchCounts, parse_report: ParseReport,
                 metadata: Dict[str, Any], compensate: bool = False,
                 teams: Optional[Sequence[str]] = None, top: Optional[int] = None,
                 structure_warnings: Sequence[str] = ()) -> ReportDocument:
    """
    Assemble the full analyze report from a frequency table.

    Args:
        table: Frequency table (neutral columns are filled here)
        counts: Raw counts, for the goal histogram
        parse_report: Ingestion diagnostics
        metadata: Config echo and input description
        compensate: Use home-advantage compensated frequencies in the team and league resilience rows
        teams: Optional team-name filter
        top: Keep only the N best-ranked teams
        structure_warnings: Season-structure deviations
    """
    warnings: List[str] = [str(issue) for issue in parse_report.issues]
    warnings.extend(structure_warnings)
    table = neutralize_home_advantage(table)
    params = league_params_by_period(table)
    theory = theoretical_leeway_table(params)
    league = table.league()
    ranking = all_time_table(table)
    selected = select_teams(ranking, teams, top, warnings)

    all_time = table.row(ALL_TEAMS_KEY, ALL_PERIODS_LABEL)
    histogram, fit = goal_histogram_table(counts)
    series = home_share_series(table)
    trend = fit_home_share_trend(series, table.periods) if len(series) >= 2 else None
    bound, bound_share = max_comeback_bound()

    periods = []
    for period in table.periods.periods:
        if period.label not in league.index:
            continue
        section = _period_section(period, league.loc[period.label])
        section["label"] = period.label
        section["theory"] = to_builtin(theory.loc[period.label].to_dict())
        periods.append(section)

    league_section = {
        "all_time": _period_section(None, all_time),
        "resilience": resilience_row(all_time, compensate),
        "periods": periods,
        "trend": trend.model_dump(mode="json") if trend is not None else None,
        "goal_histogram_fit": to_builtin(fit),
        "comeback_bound": {"value": bound, "share": bound_share},
    }

    team_sections = []
    team_frame = table.teams(ALL_PERIODS_LABEL)
    for name in selected:
        row = team_frame.loc[name]
        standing = ranking.loc[name]
        section = {
            "team": name,
            "rank": int(standing["rank"]),
            "standing": to_builtin(standing.drop("rank").to_dict()),
        }
        section.update(resilience_row(row, compensate))
        team_sections.append(section)

    figures = _figures(table, theory, histogram, team_sections, compensate)
    return ReportDocument(
        metadata=to_builtin(metadata),
        league=to_builtin(league_section),
        teams=team_sections,
        figures=figures,
        warnings=warnings,
    )


def _figures(table: FrequencyTable, theory: pd.DataFrame, histogram: pd.DataFrame,
             team_sections: List[Dict[str, Any]], compensate: bool) -> Dict[str, List[Dict[str, Any]]]:
    league = table.league()
    order = [label for label in table.periods.labels if label in league.index]
    league = league.loc[order]
    theory = theory.loc[order]

    first_goal = pd.DataFrame({
        "hT01_home": league["hT01_home"],
        "hT01_away": league["hT01_away"],
        "hT01": league["hT01"],
        "pT01_home": theory["pT01_home"],
        "pT01_away": theory["pT01_away"],
        "matches": league["matches_home"],
    })
    leeway = pd.DataFrame({
        "hT02_home": league["hT02_home"],
        "hT02_away": league["hT02_away"],
        "hT02": league["hT02"],
        "pT02_home": theory["pT02_home"],
        "pT02_away": theory["pT02_away"],
        "pT02": theory["pT02"],
        "pT02_seq": theory["pT02_seq"],
        "leeway02_home": league["leeway02_home"],
        "leeway02_away": league["leeway02_away"],
        "matches": league["matches_home"],
    })
    comeback = pd.DataFrame({
        "h_wd_home": league["h_wd_home"],
        "h_wd_away": league["h_wd_away"],
        "h_wd": league["h_wd"],
        "p_wd": theory["p_wd"],
        "p_wd_seq": theory["p_wd_seq"],
        "comeback_home": league["comeback_home"],
        "comeback_away": league["comeback_away"],
        "leeway02_home": league["leeway02_home"],
        "leeway02_away": league["leeway02_away"],
    })

    teams = table.teams(ALL_PERIODS_LABEL)
    names = [section["team"] for section in team_sections]
    team_freq = pd.DataFrame({
        "hT02": teams["hT02_pooled"],
        "hT02_neutral": teams["hT02"],
        "h_wd": teams["h_wd_pooled"],
        "h_wd_neutral": teams["h_wd"],
        "leeways": teams["leeway02_home"] + teams["leeway02_away"],
        "matches": teams["matches_home"] + teams["matches_away"],
    }).loc[names]

    resilience = [
        {
            "team": section["team"],
            "rank": section["rank"],
            "hT02": section["hT02"]["neutral" if compensate else "value"],
            "h_wd": section["h_wd"]["neutral" if compensate else "value"],
            "p_A": section["p_A"],
            "p_wd": section["p_wd"],
            "delta": section["delta"],
            "std_error": section["std_error"],
            "significant": section["significant"],
            "required_strength": section["required_strength"],
            "leeways": section["h_wd"]["denominator"],
            "compensated": compensate,
        }
        for section in team_sections
    ]

    return {
        "figure1": frame_records(histogram, "goals"),
        "figure2": frame_records(first_goal, "period"),
        "figure3": frame_records(leeway, "period"),
        "figure4": frame_records(comeback, "period"),
        "figure5": frame_records(team_freq, "team"),
        "figure6": resilience,
    }


def write_figure_csvs(document: ReportDocument, directory: Union[str, Path]) -> List[Path]:
    """Write one CSV per figure table into `directory` (created if missing)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name in FIGURE_NAMES:
        rows = document.figures.get(name, [])
        path = directory / f"{name}.csv"
        pd.DataFrame(rows).to_csv(path, index=False, lineterminator="\n")
        written.append(path)
    return written
