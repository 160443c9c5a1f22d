import math

import pandas as pd
import pytest

from conftest import csv_text, make_record, TWELVE_MATCHES
from core.config import ALL_PERIODS_LABEL, ALL_TEAMS_KEY
from core.errors import DatasetParseError, DatasetSchemaError
from core.match_schema import LeewayMode, Outcome, PeriodSpec, Side
from core.model_schema import LeagueParams
from services.dataset_service import (
    ParseReport,
    all_time_table,
    build_frequency_table,
    classify_after_leeway,
    count_partition,
    count_records,
    detect_leeway02,
    expected_goals_from_totals,
    fit_home_share_trend,
    goal_histogram_table,
    home_share_series,
    league_params_by_period,
    neutralize_home_advantage,
    parse_dataset,
    theoretical_leeway_table,
    validate_season_structure,
    write_corpus_csv,
)

AUTO_PERIOD = "2000/01 – 2008/09"


# --- leeway detection ------------------------------------------------------

@pytest.mark.parametrize("sequence,perspective,strict,any_deficit", [
    ("AAHHH", Side.HOME, True, True),
    ("AAHHH", Side.AWAY, False, False),
    ("HAAA", Side.HOME, False, True),
    ("HH", Side.AWAY, True, True),
    ("A", Side.HOME, False, False),
    ("", Side.HOME, False, False),
])
def test_detect_leeway02(sequence, perspective, strict, any_deficit):
    record = make_record(sequence)
    assert detect_leeway02(record, perspective, LeewayMode.STRICT) is strict
    assert detect_leeway02(record, perspective, LeewayMode.ANY_DEFICIT) is any_deficit


@pytest.mark.parametrize("sequence,perspective,outcome", [
    ("AAHHH", Side.HOME, Outcome.WIN),
    ("AAHH", Side.HOME, Outcome.DRAW),
    ("AAA", Side.HOME, Outcome.LOSS),
    ("HHAAA", Side.AWAY, Outcome.WIN),
])
def test_classify_after_leeway(sequence, perspective, outcome):
    assert classify_after_leeway(make_record(sequence), perspective) is outcome


def test_classify_after_leeway_needs_a_leeway():
    with pytest.raises(AssertionError):
        classify_after_leeway(make_record("HA"), Side.HOME)


# --- ingestion -------------------------------------------------------------

def test_parse_dataset_reads_every_row(twelve_csv):
    report = ParseReport()
    records = list(parse_dataset(twelve_csv, report=report))
    assert len(records) == 12
    assert records[3].goal_sequence == ""
    assert report.as_dict() == {"rows_read": 12, "records": 12, "skipped": 0, "issues": []}


def test_parse_dataset_in_small_chunks(twelve_csv):
    assert len(list(parse_dataset(twelve_csv, chunk_size=5))) == 12


def test_parse_dataset_accepts_an_optional_date_column(tmp_path):
    path = tmp_path / "dated.csv"
    path.write_text(csv_text([("2000/01", 1, "A", "B", "HA", "2000-08-12")],
                             header="season,matchday,home_team,away_team,goal_sequence,date"))
    [record] = parse_dataset(path)
    assert record.date == "2000-08-12"


def bad_rows():
    rows = list(TWELVE_MATCHES)
    rows[1] = ("2000/01", 1, "Gamma", "Delta", "HX")
    rows[4] = ("2000/2001", 3, "Alpha", "Gamma", "HAHA")
    return rows


def test_strict_parsing_stops_at_the_first_invalid_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(csv_text(bad_rows()))
    with pytest.raises(DatasetParseError) as excinfo:
        list(parse_dataset(path))
    assert excinfo.value.issues[0].row == 3
    assert "goal_sequence" in excinfo.value.issues[0].message


def test_lenient_parsing_skips_and_reports_invalid_rows(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(csv_text(bad_rows()))
    report = ParseReport()
    records = list(parse_dataset(path, strict=False, report=report))
    assert len(records) == 10
    assert [issue.row for issue in report.issues] == [3, 6]
    assert report.skipped == 2


def over_wide_rows():
    rows = list(TWELVE_MATCHES)
    rows[2] = rows[2] + ("2000-08-12", "extra")
    return rows


def test_strict_parsing_rejects_a_row_with_too_many_fields(tmp_path):
    path = tmp_path / "wide.csv"
    path.write_text(csv_text(over_wide_rows()))
    with pytest.raises(DatasetParseError) as excinfo:
        list(parse_dataset(path))
    assert excinfo.value.issues[0].row == 4


def test_lenient_parsing_skips_rows_with_too_many_fields(tmp_path):
    path = tmp_path / "wide.csv"
    path.write_text(csv_text(over_wide_rows()))
    report = ParseReport()
    records = list(parse_dataset(path, strict=False, report=report, chunk_size=5))
    assert len(records) == 11
    assert report.issues[0].row == 4
    assert report.issues[0].message == "expected 5 fields, saw 7"
    assert [r.goal_sequence for r in records] == [row[4] for i, row in enumerate(TWELVE_MATCHES) if i != 2]


def test_lenient_parsing_keeps_the_first_column_when_the_first_row_is_wide(tmp_path):
    rows = list(TWELVE_MATCHES)
    rows[0] = rows[0] + ("extra",)
    path = tmp_path / "wide_first.csv"
    path.write_text(csv_text(rows))
    report = ParseReport()
    records = list(parse_dataset(path, strict=False, report=report))
    assert [issue.row for issue in report.issues] == [2]
    assert len(records) == 11
    assert records[0].season == TWELVE_MATCHES[1][0]


@pytest.mark.parametrize("row", [
    ("2000/01", 0, "A", "B", "H"),
    ("2000/01", 1, "A", "A", "H"),
    ("2000/02", 1, "A", "B", "H"),
    ("2000/01", "x", "A", "B", "H"),
])
def test_invalid_rows_are_rejected(tmp_path, row):
    path = tmp_path / "row.csv"
    path.write_text(csv_text([row]))
    with pytest.raises(DatasetParseError):
        list(parse_dataset(path))


def test_missing_column_is_a_schema_error(tmp_path):
    path = tmp_path / "columns.csv"
    path.write_text("season,matchday,home_team,away_team\n2000/01,1,A,B\n")
    with pytest.raises(DatasetSchemaError, match="goal_sequence"):
        list(parse_dataset(path))


def test_empty_input_is_a_schema_error(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(DatasetSchemaError):
        list(parse_dataset(path))


def test_header_only_input_has_no_records(tmp_path):
    path = tmp_path / "header.csv"
    path.write_text(csv_text([]))
    assert list(parse_dataset(path)) == []


def test_written_corpus_parses_back(tmp_path, twelve_records):
    path = tmp_path / "corpus.csv"
    assert write_corpus_csv(twelve_records, path, chunk_size=5) == 12
    assert path.read_text().splitlines()[0] == "season,matchday,home_team,away_team,goal_sequence"
    assert list(parse_dataset(path)) == twelve_records


# --- counting --------------------------------------------------------------

def test_league_counts_of_the_twelve_match_fixture(twelve_records):
    row = build_frequency_table(twelve_records).row()
    assert row["matches_home"] == 12 and row["matches_away"] == 12
    assert row["leeway02_home"] == 4 and row["leeway02_away"] == 3
    assert row["comeback_win_home"] == 1 and row["comeback_draw_home"] == 1
    assert row["comeback_win_away"] == 1 and row["comeback_draw_away"] == 1
    assert row["first_goal_conceded_home"] == 5 and row["first_goal_conceded_away"] == 6
    assert row["goals_for_home"] == 17 and row["goals_for_away"] == 21

    assert row["expected_goals"] == pytest.approx(38 / 12)
    assert row["hT02_home"] == pytest.approx(4 / 12)
    assert row["hT02_away"] == pytest.approx(3 / 12)
    assert row["hT02_pooled"] == pytest.approx(7 / 24)
    assert row["h_wd_home"] == pytest.approx(0.5)
    assert row["h_wd_away"] == pytest.approx(2 / 3)
    assert row["h_wd_pooled"] == pytest.approx(4 / 7)
    assert row["hT01_home"] == pytest.approx(5 / 12)
    assert math.isnan(row["hT02"])


def test_team_counts_of_the_twelve_match_fixture(twelve_records):
    table = build_frequency_table(twelve_records)
    assert table.keys == [ALL_TEAMS_KEY, "Alpha", "Beta", "Delta", "Gamma"]
    assert table.period_labels == [AUTO_PERIOD, ALL_PERIODS_LABEL]

    alpha = table.row("Alpha")
    assert alpha["leeway02_home"] + alpha["leeway02_away"] == 2
    assert alpha["h_wd_pooled"] == 1.0
    assert alpha["hT02_pooled"] == pytest.approx(1 / 3)
    assert table.row("Delta")["h_wd_pooled"] == pytest.approx(1 / 3)
    assert table.row("Beta")["h_wd_pooled"] == pytest.approx(0.5)
    gamma = table.row("Gamma")
    assert gamma["hT02_pooled"] == 0.0
    assert math.isnan(gamma["h_wd_pooled"])


def test_any_deficit_mode_adds_late_two_goal_deficits(twelve_records):
    row = build_frequency_table(twelve_records, mode=LeewayMode.ANY_DEFICIT).row()
    assert row["leeway02_home"] + row["leeway02_away"] == 8
    assert row["comeback_home"] + row["comeback_away"] == 4
    assert build_frequency_table(twelve_records, mode=LeewayMode.ANY_DEFICIT).row("Delta")["leeway02_home"] == 2


def test_strict_leeways_are_a_subset_of_any_deficit_leeways(twelve_records):
    for record in twelve_records:
        for side in Side:
            if detect_leeway02(record, side, LeewayMode.STRICT):
                assert detect_leeway02(record, side, LeewayMode.ANY_DEFICIT)


def test_away_leeway_and_comeback_frequencies():
    sequences = ["HHA", "HHAA", "HHH", "HH", "H", "A", "AH", "", "HA", "AHH"]
    records = [make_record(s, matchday=i + 1) for i, s in enumerate(sequences)]
    row = build_frequency_table(records).row()
    assert row["hT02_away"] == pytest.approx(0.4)
    assert row["h_wd_away"] == pytest.approx(0.25)


def test_chunked_counts_merge_to_whole_counts(twelve_records):
    whole = count_partition(twelve_records)
    chunked = count_records(twelve_records, chunk_size=5)
    pd.testing.assert_frame_equal(whole.team_counts.sort_index(), chunked.team_counts.sort_index())
    pd.testing.assert_series_equal(whole.goal_histogram.sort_index(), chunked.goal_histogram.sort_index())
    assert chunked.n_matches == 12 and chunked.total_goals == 38


def test_merge_rejects_mixed_modes(twelve_records):
    with pytest.raises(ValueError):
        count_partition(twelve_records).merge(count_partition(twelve_records, LeewayMode.ANY_DEFICIT))


def test_every_goal_is_counted_for_one_side_and_against_the_other(twelve_records):
    table = build_frequency_table(twelve_records)
    teams = table.teams()
    scored = (teams["goals_for_home"] + teams["goals_for_away"]).sum()
    conceded = (teams["goals_against_home"] + teams["goals_against_away"]).sum()
    assert scored == conceded == 38
    league = table.row()
    assert league["p_home"] + league["p_away"] == pytest.approx(1.0)


def test_frequency_table_needs_matches():
    with pytest.raises(ValueError):
        build_frequency_table([])


def test_explicit_period_layout(twelve_records):
    periods = PeriodSpec.parse("1,1", 2000, 2001)
    table = build_frequency_table(twelve_records, periods)
    league = table.league()
    assert list(league.index) == ["2000/01 – 2000/01", "2001/02 – 2001/02"]
    assert league["p_home"].tolist() == pytest.approx([0.5, 0.4])
    assert table.league(by_period=False)["matches_home"].tolist() == [12]


def test_season_structure_warnings(twelve_records):
    warnings = validate_season_structure(count_records(twelve_records))
    assert len(warnings) == 2
    assert "6 matches among 4 teams" in warnings[0]


# --- home advantage ---------------------------------------------------------

def leeway_records(home_leeways, away_leeways, n):
    sequences = ["AA"] * home_leeways + ["HH"] * away_leeways
    sequences += [""] * (n - len(sequences))
    return [make_record(s, matchday=i + 1) for i, s in enumerate(sequences)]


def test_neutralize_averages_balanced_perspectives():
    table = neutralize_home_advantage(build_frequency_table(leeway_records(4, 9, 25)))
    row = table.row()
    assert row["hT02_home"] == pytest.approx(0.16)
    assert row["hT02_away"] == pytest.approx(0.36)
    assert row["hT02"] == pytest.approx(0.26)
    assert table.neutralized
    # a key seen from one venue only has no neutral value
    assert math.isnan(table.row("Home")["hT02"])


def test_neutralize_weights_unbalanced_perspectives():
    records = [
        make_record("AA", matchday=1, home="X", away="Y"),
        make_record("", matchday=2, home="X", away="Y"),
        make_record("", matchday=3, home="X", away="Y"),
        make_record("", matchday=4, home="Y", away="X"),
    ]
    table = neutralize_home_advantage(build_frequency_table(records))
    assert table.row("X")["hT02"] == pytest.approx(0.75 * (1 / 3) + 0.25 * 0.0)


def test_neutralize_is_idempotent(twelve_records):
    once = neutralize_home_advantage(build_frequency_table(twelve_records))
    twice = neutralize_home_advantage(once)
    pd.testing.assert_frame_equal(once.frequencies, twice.frequencies)
    assert once.row()["h_wd"] == pytest.approx(7 / 12)


def test_neutralize_keeps_symmetric_frequencies():
    table = neutralize_home_advantage(build_frequency_table([make_record("AA"), make_record("HH", matchday=2)]))
    assert table.row()["hT02"] == pytest.approx(0.5)


def test_expected_goals_from_totals():
    assert expected_goals_from_totals(140, 26) == pytest.approx(5.385, abs=1e-3)
    assert expected_goals_from_totals(54679, 17879) == pytest.approx(3.058, abs=1e-3)
    assert expected_goals_from_totals(0, 3) == 0.0
    with pytest.raises(ValueError):
        expected_goals_from_totals(10, 0)


def test_league_params_by_period(twelve_records):
    params = league_params_by_period(build_frequency_table(twelve_records), include_all_time=True)
    assert list(params) == [AUTO_PERIOD, ALL_PERIODS_LABEL]
    assert params[ALL_PERIODS_LABEL].expected_goals == pytest.approx(38 / 12)
    assert params[ALL_PERIODS_LABEL].home_share == pytest.approx(17 / 38)


def test_theoretical_leeway_table_at_even_shares():
    table = theoretical_leeway_table({"p": LeagueParams.from_expected_goals(3.1)})
    row = table.loc["p"]
    assert row["pT02_home"] == row["pT02_away"] == row["pT02"] == 0.25
    assert row["pT02_seq"] == pytest.approx(0.2039, abs=1e-4)
    assert row["p_wd"] == pytest.approx(0.09375)
    assert row["pT01_home"] == pytest.approx(0.5 * (1.0 - math.exp(-3.1)))


def test_theoretical_leeway_table_with_home_advantage():
    row = theoretical_leeway_table({"p": LeagueParams.from_expected_goals(3.0, home_share=0.6)}).loc["p"]
    assert row["pT02_home"] == pytest.approx(0.16)
    assert row["pT02_away"] == pytest.approx(0.36)
    assert row["pT02"] == pytest.approx(0.26)


def test_goal_histogram_table(twelve_records):
    table, fit = goal_histogram_table(count_records(twelve_records))
    assert table["matches"].tolist() == [1, 1, 1, 3, 4, 2, 0, 0, 0, 0, 0, 0]
    assert table.index[-1] == ">10"
    assert table["poisson"].sum() == pytest.approx(1.0)
    assert fit is not None
    assert fit["expected_goals"] == pytest.approx(38 / 12)
    assert 0.0 <= fit["p_value"] <= 1.0


def test_all_time_table_ranks_by_points(twelve_records):
    ranking = all_time_table(build_frequency_table(twelve_records))
    assert list(ranking.index) == ["Alpha", "Gamma", "Delta", "Beta"]
    alpha = ranking.loc["Alpha"]
    assert (alpha["wins"], alpha["draws"], alpha["losses"], alpha["points"]) == (3, 3, 0, 12)
    assert (alpha["goals_for"], alpha["goals_against"]) == (12, 9)
    assert ranking.loc["Beta", "points"] == 4
    assert ranking["rank"].tolist() == [1, 2, 3, 4]


# --- trend -----------------------------------------------------------------

def test_trend_recovers_an_exact_line():
    periods = PeriodSpec.from_layout(1963, 2012)
    series = [(period.midpoint, 0.64 - 0.002 * (period.midpoint - 1967.5)) for period in periods.periods]
    fit = fit_home_share_trend(series, periods)
    assert fit.slope == pytest.approx(-0.02)
    assert fit.vanish_year == pytest.approx(2037.5)
    assert fit.vanish_period == "2032/33 – 2041/42"
    assert fit.predict(1967.5) == pytest.approx(0.64)


def test_trend_of_a_constant_series_never_vanishes():
    fit = fit_home_share_trend([(1967.5, 0.625), (1977.0, 0.625), (1987.0, 0.625)])
    assert fit.slope == 0.0
    assert fit.vanish_period == "none"
    assert fit.vanish_year is None


def test_trend_needs_two_distinct_years():
    with pytest.raises(ValueError):
        fit_home_share_trend([(1967.5, 0.6)])
    with pytest.raises(ValueError):
        fit_home_share_trend([(1967.5, 0.6), (1967.5, 0.55)])


def test_home_share_series_follows_the_period_layout(twelve_records):
    periods = PeriodSpec.parse("1,1", 2000, 2001)
    table = build_frequency_table(twelve_records, periods)
    series = home_share_series(table)
    assert series == [(2000.5, pytest.approx(0.5)), (2001.5, pytest.approx(0.4))]
    fit = fit_home_share_trend(series, periods)
    assert fit.slope == pytest.approx(-1.0)
