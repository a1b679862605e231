import math

import mpmath
import numpy as np
import pytest

from oneshot_qcomp.concentration import (
    Lemma2Params,
    TailReport,
    default_witness,
    lemma2_bound,
    lemma2_condition,
    lemma2_experiment,
    lipschitz_probe,
    random_subspace,
    rows_to_csv,
    run_trials,
    thm2_bound,
    trial_rows,
)
from oneshot_qcomp.errors import InvalidInputError, ValidationError
from oneshot_qcomp.qcore import RngSeed, Subspace


def test_params_validation():
    with pytest.raises(InvalidInputError):
        Lemma2Params(m=4, p=1, d=1, ell=5, alpha=3.0, trials=10, seed=0)
    with pytest.raises(InvalidInputError):
        Lemma2Params(m=4, p=1, d=1, ell=2, alpha=2.0, trials=10, seed=0)
    with pytest.raises(InvalidInputError):
        Lemma2Params(m=4, p=1, d=1, ell=2, alpha=3.0, trials=0, seed=0)
    with pytest.raises(InvalidInputError):
        Lemma2Params(m=4, p=1, d=5, ell=2, alpha=3.0, trials=10, seed=0)
    p = Lemma2Params(m=8, p=2, d=3, ell=2, alpha=4.0, trials=5, seed=1)
    assert p.threshold == 1.0 and p.seed == RngSeed(1)


def test_condition_and_bound_against_extended_precision():
    p = Lemma2Params(m=64, p=1, d=1, ell=8, alpha=3.0, trials=1, seed=0)
    _, lhs, rhs = lemma2_condition(p)
    with mpmath.workdps(50):
        want_lhs = mpmath.mpf(1) ** 2 * 8**2 * 62
        want_rhs = 1536 * 1 * mpmath.mpf(64) ** 2 * mpmath.log(
            mpmath.mpf(8 * 64) / (3 * 8)
        )
        want_bound = mpmath.e ** (-(mpmath.mpf(1) * 8**2 * 62) / (768 * 64**2))
    assert lhs == pytest.approx(float(want_lhs), rel=1e-12)
    assert rhs == pytest.approx(float(want_rhs), rel=1e-12)
    assert lemma2_bound(p) == pytest.approx(float(want_bound), rel=1e-12)


def test_statistic_mean_matches_line_witness_expectation():
    # rank-one witness: E <v| P_Z |v> = ell/m exactly under Haar Z
    p = Lemma2Params(m=4, p=1, d=1, ell=2, alpha=3.0, trials=400, seed=7)
    e1 = np.zeros((4, 1), dtype=complex)
    e1[0, 0] = 1.0
    stats = run_trials(p, Subspace(e1))
    se = stats.std(ddof=1) / math.sqrt(p.trials)
    assert abs(stats.mean() - 0.5) < 3 * se


def test_full_subspace_statistic_is_one():
    # ell = m: the random subspace is everything, so the compressed
    # projector is the identity on the witness
    p = Lemma2Params(m=4, p=1, d=2, ell=4, alpha=3.0, trials=16, seed=3)
    stats = run_trials(p)
    np.testing.assert_allclose(stats, 1.0, atol=1e-10)
    rep = lemma2_experiment(p)
    # threshold alpha*ell/m = 3 > 1, so no trial can exceed it
    assert rep.empirical_tail == 0.0


def test_tail_report_fields_and_validation():
    p = Lemma2Params(m=16, p=1, d=1, ell=2, alpha=9.0, trials=32, seed=5)
    rep = lemma2_experiment(p)
    obj = rep.to_json()
    assert set(obj) == {
        "threshold",
        "empirical_tail",
        "theoretical_bound",
        "condition_holds",
        "mean_value",
        "trials",
    }
    assert 0.0 <= rep.empirical_tail <= 1.0
    with pytest.raises(ValidationError):
        TailReport(
            threshold=1.0,
            empirical_tail=1.5,
            theoretical_bound=0.5,
            condition_holds=False,
            mean_value=0.1,
            trials=3,
        )


def test_trials_are_deterministic_and_thread_invariant():
    p = Lemma2Params(m=8, p=2, d=3, ell=2, alpha=4.0, trials=24, seed=11)
    w = default_witness(p)
    s1 = run_trials(p, w, threads=1)
    s2 = run_trials(p, w, threads=4)
    np.testing.assert_array_equal(s1, s2)
    s3 = run_trials(p, w, threads=1)
    np.testing.assert_array_equal(s1, s3)


def test_witness_rank_is_checked():
    p = Lemma2Params(m=4, p=1, d=2, ell=2, alpha=3.0, trials=4, seed=13)
    wrong = random_subspace(4, 3, RngSeed(0))
    with pytest.raises(InvalidInputError):
        run_trials(p, wrong)


def test_csv_rows_round_shape():
    stats = np.array([0.25, 0.75, 1.0])
    rows = trial_rows(stats, 0.5)
    assert rows == [(0, 0.25, 0), (1, 0.75, 1), (2, 1.0, 1)]
    text = rows_to_csv(rows)
    lines = text.strip().split("\n")
    assert lines[0] == "trial,statistic,exceeded"
    assert len(lines) == 4 and text.endswith("\n")


def test_thm2_bound_formula_and_validation():
    with mpmath.workdps(50):
        want = float(mpmath.e ** (-(mpmath.mpf(30) - 2) * mpmath.mpf("0.04") / (24 * 4)))
    assert thm2_bound(30, 2.0, 0.2) == pytest.approx(want, rel=1e-12)
    assert thm2_bound(2, 1.0, 5.0) == 1.0  # m = 2 kills the exponent
    with pytest.raises(InvalidInputError):
        thm2_bound(30, 0.0, 0.2)
    with pytest.raises(InvalidInputError):
        thm2_bound(30, 1.0, -0.1)


def test_lipschitz_probe_stays_below_two():
    w = random_subspace(8, 2, RngSeed(17))
    ratio = lipschitz_probe(8, 1, w, ell=3, pairs=200, rng=RngSeed(19))
    assert 0.0 < ratio <= 2.0 + 1e-9
