import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orgsim.systemic import (
    BadWeight,
    ForceFactor,
    Ineligible,
    QoEWeights,
    SystemicClass,
    mismatch,
    qoe_report,
    qoe_sum,
    select_for_existence,
)

magnitudes = st.floats(0, 1e6, allow_nan=False, allow_infinity=False)
factors = st.lists(st.builds(ForceFactor, st.text(max_size=3), st.sampled_from(["centripetal", "centrifugal"]), magnitudes),
                   max_size=15)


def test_ladder_has_nine_levels():
    assert [int(c) for c in SystemicClass] == list(range(1, 10))


def test_mismatch_is_demotion_distance():
    assert mismatch(SystemicClass.HUMAN, SystemicClass.CLOCKWORK) == 5
    assert mismatch(4, 4) == 0
    with pytest.raises(Ineligible):
        mismatch(2, 3)


def test_qoe_report_hand_example():
    # 2.0 pull, 0.5 push; penalties 4 mismatch, 1 conflict, 1 failure, 2 successes
    fs = [ForceFactor("a", "centripetal", 2.0), ForceFactor("b", "centrifugal", 0.5)]
    score = qoe_report(fs, 4, 1, 1, 2, QoEWeights(0.25, 1.0, 2.0, 1.0))
    assert score.static_sum == 1.5
    assert score.total == 1.5 - 1.0 - 1.0 - 2.0 + 2.0


def test_weights_must_be_non_negative():
    with pytest.raises(BadWeight, match="bad-weight"):
        QoEWeights(mismatch=-1)
    with pytest.raises(BadWeight):
        QoEWeights(success=float("nan"))


def test_negative_magnitude_rejected():
    with pytest.raises(ValueError):
        ForceFactor("x", "centripetal", -1)
    with pytest.raises(ValueError):
        ForceFactor("x", "sideways", 1)


@settings(max_examples=300)
@given(factors, st.randoms(use_true_random=False))
def test_sum_is_permutation_invariant(fs, rnd):
    shuffled = list(fs)
    rnd.shuffle(shuffled)
    assert qoe_sum(shuffled) == qoe_sum(fs)


@settings(max_examples=300)
@given(factors, magnitudes)
def test_sign_monotonicity(fs, extra):
    base = qoe_sum(fs)
    assert qoe_sum(fs + [ForceFactor("u", "centripetal", extra)]) >= base
    assert qoe_sum(fs + [ForceFactor("d", "centrifugal", extra)]) <= base


@settings(max_examples=300)
@given(factors, st.tuples(magnitudes, magnitudes, magnitudes, magnitudes),
       st.tuples(*[st.floats(0, 100, allow_nan=False)] * 4))
def test_score_identity(fs, inputs, ws):
    w = QoEWeights(*ws)
    s = qoe_report(fs, *inputs, w)
    m, c, f, b = inputs
    expected = s.static_sum - w.mismatch * m - w.conflict * c - w.failure * f + w.success * b
    assert math.isclose(s.total, expected, rel_tol=1e-12, abs_tol=1e-6)


@settings(max_examples=300)
@given(st.dictionaries(st.text(min_size=1, max_size=4), st.integers(-3, 3), min_size=1), st.integers(1, 10))
def test_selection_matches_sort_oracle(cands, cap):
    pairs = list(cands.items())
    oracle = {k for k, _ in sorted(pairs, key=lambda kv: (-kv[1], kv[0]))[:cap]}
    assert select_for_existence(pairs, cap) == oracle


def test_selection_accepts_scores_and_rejects_zero_capacity():
    good = qoe_report([], 0, 0, 0, 3)
    bad = qoe_report([], 5, 0, 0, 0)
    assert select_for_existence([("b", good), ("a", bad)], 1) == {"b"}
    with pytest.raises(ValueError):
        select_for_existence([("a", 1.0)], 0)
