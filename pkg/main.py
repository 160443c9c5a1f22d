#!/usr/bin/env python3
"""
Main entry point for the match-resilience tool.
Command-line interface with the analyze, simulate and matchup commands.
"""
import argparse
import os
import sys
from typing import List, Optional

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from pydantic import ValidationError

from cli.commands import (
    EXIT_USAGE,
    AnalyzeRequest,
    MatchupRequest,
    SimulateRequest,
    cmd_analyze,
    cmd_matchup,
    cmd_simulate,
)
from core.config import DEFAULT_LEEWAY_MODE, SIM_DEFAULT_TEAMS, SIM_FIRST_SEASON, SIM_WORKERS, TOOL_NAME, TOOL_VERSION
from core.logger import configure_logging


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=TOOL_NAME,
        description="Leeway, comeback and home-advantage statistics under an independent-Poisson score model.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {TOOL_VERSION}")
    parser.add_argument("--log-level", default=None, help="logging level (default: LOG_LEVEL env var or WARNING)")
    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser("analyze", help="analyze a match CSV")
    analyze.add_argument("input", help="CSV with season,matchday,home_team,away_team,goal_sequence[,date]")
    analyze.add_argument("--periods", default="auto",
                         help="'auto', 'N,M' (first bucket N seasons, then M) or '1963-1971,1972-1981,...'")
    analyze.add_argument("--leeway-mode", choices=["strict", "any"], default=DEFAULT_LEEWAY_MODE)
    analyze.add_argument("--compensate", action="store_true", help="use home-advantage compensated frequencies")
    analyze.add_argument("--format", choices=["json", "csv"], default="json")
    analyze.add_argument("--team", action="append", dest="teams", help="restrict team sections (repeatable)")
    analyze.add_argument("--top", type=int, default=None, help="only the N best-ranked teams")
    analyze.add_argument("--lenient", action="store_true", help="skip invalid rows instead of failing")
    analyze.add_argument("--output", default=None, help="report file (json) or directory (csv)")

    simulate = commands.add_parser("simulate", help="generate a synthetic match corpus")
    simulate.add_argument("--matches", type=int, required=True)
    simulate.add_argument("--expected-goals", type=float, default=3.1)
    simulate.add_argument("--home-share", type=float, default=0.5)
    simulate.add_argument("--boost", type=float, default=None, help="share adopted by a side trailing 0:2")
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--output", default=None, help="corpus CSV (default: stdout)")
    simulate.add_argument("--team", action="append", dest="teams", metavar="NAME=SHARE[:BOOST]")
    simulate.add_argument("--teams", type=int, dest="n_teams", default=SIM_DEFAULT_TEAMS,
                          help="size of the default equal-strength team pool")
    simulate.add_argument("--first-season", type=int, default=SIM_FIRST_SEASON)
    simulate.add_argument("--workers", type=int, default=SIM_WORKERS)

    matchup = commands.add_parser("matchup", help="head-to-head forecast and score confidence")
    matchup.add_argument("--gf-a", type=int)
    matchup.add_argument("--ga-a", type=int)
    matchup.add_argument("--gf-b", type=int)
    matchup.add_argument("--ga-b", type=int)
    matchup.add_argument("--share", type=float, help="goal-scoring share of team A")
    matchup.add_argument("--expected-goals", type=float)
    matchup.add_argument("--raw-share", action="store_true",
                         help="forecast with team A's own share instead of the pairwise a / (a + b)")
    matchup.add_argument("--score", help="final score k:l for the dominance confidence")
    matchup.add_argument("--trailing", type=float, help="probability of a 0:2 leeway")
    matchup.add_argument("--boosted-share", type=float,
                         help="share of team A after trailing 0:2 in the exact comeback (default: its share)")
    matchup.add_argument("--comeback-target", type=float)
    matchup.add_argument("--win-target", type=float)
    matchup.add_argument("--format", choices=["text", "json"], default="text")
    return parser


def _request(args: argparse.Namespace):
    fields = {k: v for k, v in vars(args).items() if k not in ("command", "log_level")}
    if args.command == "analyze":
        return AnalyzeRequest(**fields), cmd_analyze
    if args.command == "simulate":
        return SimulateRequest(**fields), cmd_simulate
    return MatchupRequest(**fields), cmd_matchup


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        request, command = _request(args)
    except ValidationError as e:
        print(f"{TOOL_NAME}: invalid arguments: {e}", file=sys.stderr)
        return EXIT_USAGE
    return command(request)


if __name__ == "__main__":
    sys.exit(main())
