"""Command handlers for analyze, simulate and matchup."""
import json
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Literal, Optional

from pydantic import BaseModel, Field, ValidationError, field_validator

from core.config import (
    DEFAULT_LEEWAY_MODE,
    DOMINANCE_CAVEAT,
    SIM_DEFAULT_TEAMS,
    SIM_FIRST_SEASON,
    SIM_WORKERS,
    TOOL_NAME,
    TOOL_VERSION,
)
from core.errors import DatasetParseError, DatasetSchemaError, PeriodSpecError
from core.logger import log_error, log_info, setup_logger
from core.match_schema import LeewayMode, MatchRecord, PeriodSpec, SimConfig, TeamSpec
from core.model_schema import LeagueParams, ScoreLine, TeamRecordSummary
from cli.report import build_report, file_digest, write_figure_csvs
from services.dataset_service import (
    ParseReport,
    build_frequency_table,
    count_records,
    parse_dataset,
    validate_season_structure,
    write_corpus_csv,
)
from services.matchup import dominance_confidence, forecast, pairwise_share, share_from_goals
from services.resilience import (
    comeback_probs,
    exact_comeback_breakdown,
    required_strength,
    required_win_strength,
)
from services.scoring_model import strict_leeway_prob
from services.simulator import check_season_range, default_team_pool, simulate_corpus

logger = setup_logger(__name__)

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2


# Request models for the commands
class AnalyzeRequest(BaseModel):
    """Request model for analyzing a match dataset."""
    input: Path
    periods: str = "auto"
    leeway_mode: LeewayMode = LeewayMode(DEFAULT_LEEWAY_MODE)
    compensate: bool = False
    format: Literal["json", "csv"] = "json"
    teams: Optional[List[str]] = None
    top: Optional[int] = Field(None, ge=1)
    lenient: bool = False
    output: Optional[Path] = None


class SimulateRequest(BaseModel):
    """Request model for generating a synthetic corpus."""
    matches: int = Field(..., ge=1)
    expected_goals: float = Field(3.1, ge=0, allow_inf_nan=False)
    home_share: float = Field(0.5, ge=0, le=1)
    boost: Optional[float] = Field(None, ge=0, le=1)
    seed: int = Field(0, ge=0, lt=2 ** 64)
    output: Optional[Path] = None
    teams: Optional[List[str]] = None
    n_teams: int = Field(SIM_DEFAULT_TEAMS, ge=2)
    first_season: int = SIM_FIRST_SEASON
    workers: int = Field(SIM_WORKERS, ge=1)

    def to_config(self) -> SimConfig:
        pool = [TeamSpec.parse(text) for text in self.teams] if self.teams else default_team_pool(self.n_teams)
        return SimConfig(
            expected_goals=self.expected_goals,
            home_share=self.home_share,
            resilience_boost=self.boost,
            n_matches=self.matches,
            seed=self.seed,
            team_pool=pool,
            first_season=self.first_season,
            workers=self.workers,
        )


class MatchupRequest(BaseModel):
    """Request model for a head-to-head forecast."""
    gf_a: Optional[int] = Field(None, ge=0)
    ga_a: Optional[int] = Field(None, ge=0)
    gf_b: Optional[int] = Field(None, ge=0)
    ga_b: Optional[int] = Field(None, ge=0)
    share: Optional[float] = Field(None, ge=0, le=1)
    expected_goals: Optional[float] = Field(None, ge=0, allow_inf_nan=False)
    raw_share: bool = False
    score: Optional[str] = None
    boosted_share: Optional[float] = Field(None, ge=0, le=1)
    trailing: Optional[float] = Field(None, ge=0, le=1)
    comeback_target: Optional[float] = Field(None, ge=0, le=2, allow_inf_nan=False)
    win_target: Optional[float] = Field(None, ge=0, le=1)
    format: Literal["text", "json"] = "text"

    @field_validator('score')
    @classmethod
    def validate_score(cls, v):
        if v is not None:
            ScoreLine.parse(v)
        return v


def _fail(code: int, operation: str, error: Exception) -> int:
    log_error(logger, operation, error)
    print(f"{TOOL_NAME}: {error}", file=sys.stderr)
    return code


def _dump_json(payload: Dict[str, Any]) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------

def cmd_analyze(request: AnalyzeRequest) -> int:
    """
    Ingest a match CSV and report leeway, comeback and resilience statistics.

    Exit codes: 0 on success (lenient warnings included), 1 when the input
    cannot be read or the output cannot be written, 2 on parse, schema or
    period errors.
    """
    if request.format == "csv" and request.output is None:
        return _fail(EXIT_USAGE, "Analyze", ValueError("--format csv needs --output DIRECTORY"))
    if not request.input.is_file():
        return _fail(EXIT_IO, "Analyze", FileNotFoundError(f"input file not found: {request.input}"))

    parse_report = ParseReport()
    try:
        records = parse_dataset(request.input, strict=not request.lenient, report=parse_report)
        counts = count_records(records, request.leeway_mode)
        if counts.n_matches == 0:
            raise DatasetSchemaError("the input contains no valid matches")
        seasons = counts.seasons
        periods = PeriodSpec.parse(request.periods, seasons[0], seasons[-1])
        table = build_frequency_table(counts, periods, request.leeway_mode)
        structure_warnings = validate_season_structure(counts)
        metadata = {
            "tool": TOOL_NAME,
            "version": TOOL_VERSION,
            "input": {
                "name": request.input.name,
                "sha256": file_digest(request.input),
                **parse_report.as_dict(),
            },
            "config": {
                "periods": request.periods,
                "period_labels": periods.labels,
                "leeway_mode": request.leeway_mode.value,
                "compensate": request.compensate,
                "format": request.format,
                "teams": request.teams,
                "top": request.top,
                "lenient": request.lenient,
            },
            "seasons": {"first": seasons[0], "last": seasons[-1], "count": len(seasons)},
            "matches": counts.n_matches,
        }
        document = build_report(
            table, counts, parse_report, metadata,
            compensate=request.compensate, teams=request.teams, top=request.top,
            structure_warnings=structure_warnings,
        )
    except (DatasetParseError, DatasetSchemaError, PeriodSpecError) as e:
        return _fail(EXIT_USAGE, "Analyze", e)
    except OSError as e:
        return _fail(EXIT_IO, "Analyze", e)

    try:
        if request.format == "csv":
            paths = write_figure_csvs(document, request.output)
            print("\n".join(str(p) for p in paths))
        elif request.output is not None:
            request.output.write_text(document.to_json(), encoding="utf-8")
        else:
            sys.stdout.write(document.to_json())
    except OSError as e:
        return _fail(EXIT_IO, "Writing report", e)

    log_info(logger, "Analysis complete", {
        "matches": counts.n_matches, "teams": len(document.teams), "warnings": len(document.warnings)
    })
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

class CorpusSummary:
    """Running totals over a simulated corpus."""

    def __init__(self):
        self.matches = 0
        self.goals = 0
        self.home_goals = 0
        self.leeways = 0
        self.comebacks = 0

    def observe(self, records: Iterable[MatchRecord]) -> Iterator[MatchRecord]:
        for record in records:
            sequence = record.goal_sequence
            home = sequence.count("H")
            self.matches += 1
            self.goals += len(sequence)
            self.home_goals += home
            away = len(sequence) - home
            if sequence[:2] == "AA":
                self.leeways += 1
                self.comebacks += int(home >= away)
            elif sequence[:2] == "HH":
                self.leeways += 1
                self.comebacks += int(away >= home)
            yield record

    def as_dict(self, config: SimConfig) -> Dict[str, Any]:
        params = LeagueParams.from_expected_goals(config.expected_goals, config.home_share)
        expected_leeway = (strict_leeway_prob(params, params.home_share)
                           + strict_leeway_prob(params, params.away_share)) / 2.0
        perspectives = 2 * self.matches
        return {
            "matches": self.matches,
            "goals": self.goals,
            "expected_goals": self.goals / self.matches if self.matches else None,
            "p_home": self.home_goals / self.goals if self.goals else None,
            "leeway_frequency": self.leeways / perspectives if perspectives else None,
            "leeway_expected": expected_leeway,
            "comeback_frequency": self.comebacks / self.leeways if self.leeways else None,
        }


def cmd_simulate(request: SimulateRequest) -> int:
    """
    Write a simulated corpus in the ingestion CSV format and print summary statistics.

    The corpus goes to --output, or to stdout with the summary on stderr.
    """
    try:
        config = request.to_config()
        check_season_range(config)
    except (ValidationError, ValueError) as e:
        return _fail(EXIT_USAGE, "Simulate", e)

    summary = CorpusSummary()
    try:
        destination = request.output if request.output is not None else sys.stdout
        written = write_corpus_csv(summary.observe(simulate_corpus(config)), destination)
    except OSError as e:
        return _fail(EXIT_IO, "Simulate", e)
    except ValueError as e:
        return _fail(EXIT_USAGE, "Simulate", e)

    payload = {
        "tool": TOOL_NAME,
        "version": TOOL_VERSION,
        "config": {
            "matches": request.matches,
            "expected_goals": request.expected_goals,
            "home_share": request.home_share,
            "boost": request.boost,
            "seed": request.seed,
            "teams": [team.model_dump() for team in config.team_pool],
            "first_season": request.first_season,
        },
        "summary": summary.as_dict(config),
    }
    stream = sys.stdout if request.output is not None else sys.stderr
    stream.write(_dump_json(payload))
    log_info(logger, "Corpus written", {"matches": written, "output": str(request.output or "stdout")})
    return EXIT_OK


# ---------------------------------------------------------------------------
# matchup
# ---------------------------------------------------------------------------

def matchup_result(request: MatchupRequest) -> Dict[str, Any]:
    """
    Compute everything a matchup request asks for.

    Raises:
        ValueError: if the request names nothing to compute or lacks inputs
        NoSolutionError: if a comeback target is unreachable
    """
    result: Dict[str, Any] = {}
    share: Optional[float] = request.share
    goals = (request.gf_a, request.ga_a, request.gf_b, request.ga_b)
    if share is None and any(g is not None for g in goals):
        if any(g is None for g in goals):
            raise ValueError("--gf-a, --ga-a, --gf-b and --ga-b must be given together")
        share_a = share_from_goals(TeamRecordSummary(goals_for=request.gf_a, goals_against=request.ga_a))
        share_b = share_from_goals(TeamRecordSummary(goals_for=request.gf_b, goals_against=request.ga_b))
        result["shares"] = {"a": share_a, "b": share_b}
        share = share_a if request.raw_share else pairwise_share(share_a, share_b)
    if share is not None:
        result["share"] = share

    if request.expected_goals is not None:
        if share is None:
            raise ValueError("a forecast needs --share or the four goal counts")
        params = LeagueParams.from_expected_goals(request.expected_goals)
        result["expected_goals"] = request.expected_goals
        result["forecast"] = forecast(params, share).model_dump()
        boosted = share if request.boosted_share is None else request.boosted_share
        result["exact_comeback"] = {
            "boosted_share": boosted,
            **exact_comeback_breakdown(params, share, boosted).model_dump(),
        }
    elif request.boosted_share is not None:
        raise ValueError("--boosted-share needs --expected-goals")

    if request.score is not None:
        score = ScoreLine.parse(request.score)
        confidence = dominance_confidence(score)
        result["dominance"] = {
            "score": str(score),
            "confidence": float(confidence),
            "exact": f"{confidence.numerator}/{confidence.denominator}",
            "caveat": DOMINANCE_CAVEAT,
        }

    if request.trailing is not None:
        comeback: Dict[str, Any] = {"trailing": request.trailing}
        if share is not None:
            comeback["model"] = comeback_probs(share, request.trailing).model_dump()
        if request.comeback_target is not None:
            comeback["target"] = request.comeback_target
            comeback["required_strength"] = required_strength(request.trailing, request.comeback_target)
        if request.win_target is not None:
            comeback["win_target"] = request.win_target
            comeback["required_win_strength"] = required_win_strength(request.trailing, request.win_target)
        result["comeback"] = comeback
    elif request.comeback_target is not None or request.win_target is not None:
        raise ValueError("--comeback-target and --win-target need --trailing")

    if not any(key in result for key in ("shares", "forecast", "dominance", "comeback")):
        raise ValueError("nothing to compute: give --expected-goals, --score or --trailing")
    return result


def _format_text(result: Dict[str, Any]) -> str:
    lines = []
    if "shares" in result:
        lines.append(f"shares: A {result['shares']['a']:.4f}, B {result['shares']['b']:.4f}")
    if "share" in result:
        lines.append(f"share used for team A: {result['share']:.4f}")
    if "forecast" in result:
        f = result["forecast"]
        lines.append(
            f"forecast at E={result['expected_goals']:.3f}: "
            f"win {f['win']:.4f}, draw {f['draw']:.4f}, loss {f['loss']:.4f}"
        )
    if "exact_comeback" in result:
        x = result["exact_comeback"]
        lines.append(
            f"after trailing 0:2 (share {x['boosted_share']:.4f} from then on): "
            f"draw {x['draw']:.4f}, win {x['win']:.4f}, win or draw {x['win_or_draw']:.4f}"
        )
    if "dominance" in result:
        d = result["dominance"]
        lines.append(f"dominance confidence after {d['score']}: {d['confidence']:.4f} ({d['exact']})")
        lines.append(f"note: {d['caveat']}")
    if "comeback" in result:
        c = result["comeback"]
        if "model" in c:
            m = c["model"]
            lines.append(
                f"after trailing 0:2 (p={c['trailing']:.4f}): draw {m['draw']:.4f}, "
                f"win {m['win']:.4f}, win or draw {m['win_or_draw']:.4f}"
            )
        if "required_strength" in c:
            lines.append(f"required strength for win or draw {c['target']:.4f}: {c['required_strength']:.4f}")
        if "required_win_strength" in c:
            lines.append(f"required strength for a win {c['win_target']:.4f}: {c['required_win_strength']:.4f}")
    return "\n".join(lines) + "\n"


def cmd_matchup(request: MatchupRequest) -> int:
    """Print shares, a win/draw/loss forecast, score-dominance confidence and comeback requirements."""
    try:
        result = matchup_result(request)
    except ValueError as e:
        return _fail(EXIT_USAGE, "Matchup", e)
    if request.format == "json":
        sys.stdout.write(_dump_json(result))
    else:
        sys.stdout.write(_format_text(result))
    return EXIT_OK
