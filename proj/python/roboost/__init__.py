"""Exact-measure robustness boosting on finite instance spaces."""

import json

from ._core import (
    BudgetExhausted,
    EmptyEvent,
    InvalidArgument,
    Relation,
    alpha_rounds,
    build_counterexample,
    cascade_predict,
    compose_inverse,
    condition,
    invert,
    is_robust_realizable,
    majority_vote,
    metric_ball,
    natural_error,
    procedures,
    roboost_rounds,
    robust_region,
    robust_risk,
    robust_shattering_dim,
    robustness_mass,
    selective_predict,
    validate_scenario,
)
from ._core import run_scenario as _run_scenario


def run_scenario(scenario, procedure, trials=1, seed=None, threads=0):
    """Run a scenario (dict or JSON text); returns (report dict, CSV text)."""
    text = scenario if isinstance(scenario, str) else json.dumps(scenario)
    report, csv = _run_scenario(text, procedure, trials, seed, threads)
    return json.loads(report), csv
