import math
from collections import Counter

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.stats import chisquare

from core.match_schema import SimConfig, TeamSpec
from core.model_schema import LeagueParams
from services.dataset_service import ParseReport, build_frequency_table, parse_dataset, write_corpus_csv
from services.matchup import forecast, pairwise_share
from services.resilience import comeback_prob, exact_comeback_given_leeway, trailing_prob
from services.scoring_model import first_goal_prob, strict_leeway_prob, total_goals_pmf
from services.simulator import (
    RoundRobinSchedule,
    block_generators,
    check_season_range,
    default_team_pool,
    simulate_corpus,
    simulate_match,
)

LEAGUE = LeagueParams.from_expected_goals(3.1)


def corpus(**overrides):
    config = dict(expected_goals=3.1, n_matches=20000, seed=7, workers=2)
    config.update(overrides)
    return list(simulate_corpus(SimConfig(**config), block_size=4096))


def within(observed, expected, n, sigmas):
    """|observed - expected| within `sigmas` binomial standard errors of expected."""
    return abs(observed - expected) <= sigmas * math.sqrt(expected * (1.0 - expected) / n)


def test_same_seed_gives_the_same_corpus_for_any_worker_count():
    config = dict(expected_goals=3.1, n_matches=1000, seed=42)
    single = list(simulate_corpus(SimConfig(workers=1, **config), block_size=100))
    pooled = list(simulate_corpus(SimConfig(workers=4, **config), block_size=100))
    assert single == pooled
    assert list(simulate_corpus(SimConfig(workers=3, **config), block_size=100)) == single


def test_different_seeds_give_different_corpora():
    first = [r.goal_sequence for r in simulate_corpus(SimConfig(expected_goals=3.1, n_matches=200, seed=1))]
    second = [r.goal_sequence for r in simulate_corpus(SimConfig(expected_goals=3.1, n_matches=200, seed=2))]
    assert first != second


def test_block_generators_follow_the_seed_sequence():
    generators = block_generators(5, 10, block_size=4)
    assert len(generators) == 3
    child = np.random.SeedSequence(5).spawn(3)[2]
    expected = np.random.Generator(np.random.PCG64(child)).random(3)
    assert np.array_equal(generators[2].random(3), expected)


def test_zero_expected_goals_gives_goalless_matches():
    records = list(simulate_corpus(SimConfig(expected_goals=0.0, n_matches=500)))
    assert len(records) == 500
    assert all(r.goal_sequence == "" for r in records)


def test_simulate_match_places_the_match_in_the_schedule():
    config = SimConfig(expected_goals=3.1)
    record = simulate_match(config, np.random.default_rng(3))
    assert record.season == "1963/64"
    assert record.matchday == 1
    assert {record.home_team, record.away_team} <= {team.name for team in default_team_pool()}
    assert set(record.goal_sequence) <= {"H", "A"}
    later = simulate_match(config, np.random.default_rng(3), index=306)
    assert later.season == "1964/65"


def test_double_round_robin_schedule():
    schedule = RoundRobinSchedule(default_team_pool(18), 1963)
    assert schedule.matches_per_season == 306
    assert schedule.matchday.max() == 34
    pairs = Counter(zip(schedule.home_index.tolist(), schedule.away_index.tolist()))
    assert len(pairs) == 306
    assert set(pairs.values()) == {1}
    assert all((b, a) in pairs for a, b in pairs)
    for day in range(1, 35):
        playing = np.concatenate([schedule.home_index[schedule.matchday == day],
                                  schedule.away_index[schedule.matchday == day]])
        assert len(set(playing.tolist())) == 18


def test_odd_team_pool_gets_a_bye():
    schedule = RoundRobinSchedule(default_team_pool(5), 2000)
    assert schedule.matches_per_season == 20
    assert schedule.season_start(20) == 2001


def test_corpus_parses_back_without_issues(tmp_path):
    records = list(simulate_corpus(SimConfig(expected_goals=3.1, n_matches=700, seed=11)))
    path = tmp_path / "corpus.csv"
    assert write_corpus_csv(iter(records), path) == 700
    report = ParseReport()
    assert list(parse_dataset(path, report=report)) == records
    assert report.skipped == 0


def test_corpus_stops_before_five_digit_seasons():
    config = SimConfig(expected_goals=3.1, n_matches=400000, first_season=9000)
    with pytest.raises(ValueError):
        check_season_range(config)
    with pytest.raises(ValueError):
        next(simulate_corpus(config))
    # 999 seasons of 306 matches end exactly with 9998/99
    fits = SimConfig(expected_goals=3.1, n_matches=999 * 306, first_season=9000)
    assert check_season_range(fits).season_start(999 * 306 - 1) == 9998
    with pytest.raises(ValueError):
        check_season_range(SimConfig(expected_goals=3.1, n_matches=999 * 306 + 1, first_season=9000))


def test_simulation_config_validation():
    with pytest.raises(ValidationError):
        SimConfig(expected_goals=-1.0)
    with pytest.raises(ValidationError):
        SimConfig(expected_goals=3.1, seed=-1)
    with pytest.raises(ValidationError):
        SimConfig(expected_goals=3.1, home_share=1.5)
    with pytest.raises(ValidationError):
        SimConfig(expected_goals=3.1, team_pool=[TeamSpec(name="Solo")])
    with pytest.raises(ValidationError):
        SimConfig(expected_goals=3.1, team_pool=[TeamSpec(name="Twin"), TeamSpec(name="Twin")])


def test_team_spec_parsing():
    assert TeamSpec.parse("Leaders=0.667:0.9") == TeamSpec(name="Leaders", share=0.667, boost=0.9)
    assert TeamSpec.parse("Werder=0.5").boost is None
    with pytest.raises(ValueError):
        TeamSpec.parse("no share")


def test_team_boost_takes_over_after_a_leeway():
    pool = [TeamSpec(name="Stubborn", share=0.5, boost=1.0), TeamSpec(name="Plain", share=0.5)]
    records = corpus(n_matches=4000, team_pool=pool, first_season=1000)
    checked = 0
    for record in records:
        side = "H" if record.home_team == "Stubborn" else "A"
        opponent = "A" if side == "H" else "H"
        if record.goal_sequence[:2] == opponent * 2:
            assert set(record.goal_sequence[2:]) <= {side}
            checked += 1
    assert checked > 0


def test_leeway_and_comeback_frequencies_match_the_model():
    n = 20000
    row = build_frequency_table(corpus(n_matches=n)).row()
    leeway = strict_leeway_prob(LEAGUE, 0.5)
    assert within(row["hT02_home"], leeway, n, 4)
    assert within(row["hT02_away"], leeway, n, 4)
    leeways = int(row["leeway02_home"] + row["leeway02_away"])
    assert within(row["h_wd_pooled"], exact_comeback_given_leeway(LEAGUE, 0.5, 0.5), leeways, 4)


def test_boost_raises_comebacks_to_the_boosted_oracle():
    n = 20000
    row = build_frequency_table(corpus(n_matches=n, resilience_boost=0.8)).row()
    leeways = int(row["leeway02_home"] + row["leeway02_away"])
    # the boost acts only after the leeway, so the leeway rate is unchanged
    assert within(row["hT02_pooled"], strict_leeway_prob(LEAGUE, 0.5), 2 * n, 4)
    assert within(row["h_wd_pooled"], exact_comeback_given_leeway(LEAGUE, 0.5, 0.8), leeways, 4)


def test_two_team_pool_reproduces_the_head_to_head_forecast():
    pool = [TeamSpec(name="Underdog", share=7 / 16), TeamSpec(name="Favourite", share=17 / 20)]
    n = 16000
    records = corpus(n_matches=n, expected_goals=140 / 26, team_pool=pool, first_season=1000)
    outcomes = Counter()
    for record in records:
        score = record.score()
        if record.home_team == "Underdog":
            outcomes[(score.for_goals > score.against_goals, score.for_goals == score.against_goals)] += 1
        else:
            outcomes[(score.against_goals > score.for_goals, score.for_goals == score.against_goals)] += 1
    expected = forecast(LeagueParams.from_expected_goals(140 / 26), pairwise_share(7 / 16, 17 / 20))
    assert within(outcomes[(True, False)] / n, expected.win, n, 4)
    assert within(outcomes[(False, True)] / n, expected.draw, n, 4)


@pytest.mark.slow
def test_million_match_corpus_matches_the_model():
    n = 10 ** 6
    config = SimConfig(expected_goals=3.1, n_matches=n, seed=2024, first_season=1000)
    row = build_frequency_table(simulate_corpus(config)).row()
    leeway = strict_leeway_prob(LEAGUE, 0.5)
    assert within(row["hT02_pooled"], leeway, 2 * n, 3)
    leeways = int(row["leeway02_home"] + row["leeway02_away"])
    assert within(row["h_wd_pooled"], exact_comeback_given_leeway(LEAGUE, 0.5, 0.5), leeways, 3)


def test_total_goal_histogram_follows_the_poisson_pmf():
    n = 20000
    totals = Counter(len(record.goal_sequence) for record in corpus(n_matches=n, seed=13))
    top = 10
    observed = [totals[m] for m in range(top)] + [sum(c for m, c in totals.items() if m >= top)]
    pmf = [total_goals_pmf(m, LEAGUE) for m in range(top)]
    expected = [n * p for p in pmf] + [n * (1.0 - sum(pmf))]
    assert chisquare(observed, expected).pvalue > 0.001


def test_first_goal_frequency_matches_the_model():
    n = 20000
    records = corpus(n_matches=n, seed=17)
    home_first = sum(record.goal_sequence[:1] == "H" for record in records)
    assert within(home_first / n, first_goal_prob(LEAGUE, 0.5), n, 3)


def test_constant_share_formula_stays_close_to_simulated_comebacks():
    row = build_frequency_table(corpus(n_matches=20000, seed=19)).row()
    assert abs(row["h_wd_pooled"] - comeback_prob(trailing_prob(0.5), 0.5)) < 0.02


@pytest.mark.slow
def test_million_match_head_to_head_forecast():
    pool = [TeamSpec(name="Underdog", share=7 / 16), TeamSpec(name="Favourite", share=17 / 20)]
    n = 10 ** 6
    config = SimConfig(expected_goals=140 / 26, n_matches=n, seed=2006, team_pool=pool, first_season=1000)
    wins = draws = 0
    for record in simulate_corpus(config):
        score = record.score()
        margin = score.for_goals - score.against_goals
        if record.home_team != "Underdog":
            margin = -margin
        wins += margin > 0
        draws += margin == 0
    expected = forecast(LeagueParams.from_expected_goals(140 / 26), pairwise_share(7 / 16, 17 / 20))
    assert within(wins / n, expected.win, n, 3)
    assert within(draws / n, expected.draw, n, 3)
    assert within((n - wins - draws) / n, expected.loss, n, 3)
