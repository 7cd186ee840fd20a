"""Tests for the oracle suite plumbing (full-size runs live in acceptance)."""

import numpy as np
import pytest

from afrelay.checks import (
    SUITES,
    check_diagonal_optimality,
    check_kkt,
    check_reductions,
    check_spa_upper_bound,
    check_trace_lemma,
    conditional_empirical_mse,
    random_link_model,
    run_suite,
)
from afrelay.msemodel import total_mse
from afrelay.solver import solve


def test_fast_suites_pass():
    for result in run_suite(["kkt", "reductions", "spa-bound"]):
        assert result.passed, str(result)


def test_unknown_suite_rejected():
    with pytest.raises(KeyError):
        run_suite(["no-such-suite"])


def test_result_formatting():
    res = check_kkt(instances=2)
    text = str(res)
    assert "kkt" in text and ("pass" in text or "FAIL" in text)


def test_trace_lemma_small():
    assert check_trace_lemma(pairs=2, samples=20_000).measured < 0.05


def test_diagonal_optimality_small():
    res = check_diagonal_optimality(instances=2, perturbations=20)
    assert res.passed


def test_spa_bound_small():
    assert check_spa_upper_bound(instances=3).passed


def test_reductions():
    assert check_reductions().passed


def test_conditional_mse_estimator_consistency():
    # The conditional Monte Carlo must track the analytic value it checks.
    rng = np.random.default_rng(0)
    model = random_link_model(rng, k=2, correlated=True, error_scale=0.02)
    sol = solve(model, 200.0, variant="robust")
    emp = conditional_empirical_mse(model, sol, 20_000, rng)
    ana = total_mse(sol, model)
    assert abs(emp - ana) / ana < 0.05


def test_suite_registry_complete():
    assert set(SUITES) == {
        "kkt", "trace", "mse", "estimation", "diagonal", "spa-bound", "reductions"
    }
