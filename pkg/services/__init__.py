"""Services module for the match-resilience tool."""
from .scoring_model import outcome_probabilities, total_goals_pmf
from .resilience import comeback_prob, exact_comeback_given_leeway, required_strength
from .dataset_service import build_frequency_table, neutralize_home_advantage, parse_dataset
from .matchup import dominance_confidence, forecast
from .simulator import simulate_corpus

__all__ = [
    'outcome_probabilities',
    'total_goals_pmf',
    'comeback_prob',
    'exact_comeback_given_leeway',
    'required_strength',
    'build_frequency_table',
    'neutralize_home_advantage',
    'parse_dataset',
    'dominance_confidence',
    'forecast',
    'simulate_corpus',
]
