"""Shared fixtures: a hand-countable 12-match league and record builders."""
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from core.match_schema import MatchRecord

# Four teams over two seasons. Strict leeways: matches 1, 3, 6, 8 for the home
# side and 2, 7, 10 for the away side; comebacks in 1 (win), 3 (draw), 7 (win), 10 (draw).
TWELVE_MATCHES = [
    ("2000/01", 1, "Alpha", "Beta", "AAHHH"),
    ("2000/01", 1, "Gamma", "Delta", "HH"),
    ("2000/01", 2, "Beta", "Gamma", "AAHH"),
    ("2000/01", 2, "Delta", "Alpha", ""),
    ("2000/01", 3, "Alpha", "Gamma", "HAHA"),
    ("2000/01", 3, "Beta", "Delta", "AAA"),
    ("2001/02", 1, "Beta", "Alpha", "HHAAA"),
    ("2001/02", 1, "Delta", "Gamma", "AAH"),
    ("2001/02", 2, "Gamma", "Beta", "H"),
    ("2001/02", 2, "Alpha", "Delta", "HHAA"),
    ("2001/02", 3, "Gamma", "Alpha", "AHA"),
    ("2001/02", 3, "Delta", "Beta", "HAAA"),
]

HEADER = "season,matchday,home_team,away_team,goal_sequence"


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: Monte Carlo runs at 10^6 matches")


def make_record(sequence: str, season: str = "2000/01", matchday: int = 1,
                home: str = "Home", away: str = "Away") -> MatchRecord:
    return MatchRecord(season=season, matchday=matchday, home_team=home, away_team=away,
                       goal_sequence=sequence)


def csv_text(rows, header: str = HEADER) -> str:
    lines = [header] + [",".join(str(field) for field in row) for row in rows]
    return "\n".join(lines) + "\n"


@pytest.fixture
def twelve_records():
    return [
        MatchRecord(season=s, matchday=d, home_team=h, away_team=a, goal_sequence=g)
        for s, d, h, a, g in TWELVE_MATCHES
    ]


@pytest.fixture
def twelve_csv(tmp_path):
    path = tmp_path / "league.csv"
    path.write_text(csv_text(TWELVE_MATCHES), encoding="utf-8")
    return path
