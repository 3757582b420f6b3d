import math
import random
import statistics
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mipxai.dataset import Dataset
from mipxai.exceptions import DomainError, EliminationError, StructuralError, UnfitError
from mipxai.io import bundled_trace
from mipxai.mip import (
    EliminationTrace,
    mip_scores,
    nmr,
    report_from_trace,
    run_elimination,
    score_sd,
    stability_report,
)
from mipxai.models import ModelSpec
from mipxai.synth import SynthSpec, generate

# Exact rational MIP scores of the bundled nine-feature trace, computed by
# summing position/size fractions by hand over its eight rankings.
EXACT_TRACE_MIP = {
    "LVM": Fraction(1, 9),
    "RVEDV": Fraction(11, 24),
    "RVESV": Fraction(155, 252),
    "LVEDV": Fraction(349, 168),
    "LVESV": Fraction(6323, 2520),
    "RVSV": Fraction(8509, 2520),
    "LVSV": Fraction(1153, 252),
    "RVEF": Fraction(1762, 315),
    "LVEF": Fraction(401, 60),
}
EXACT_TRACE_NMR = 0.43650793650793646
EXACT_TRACE_SD = 2.355640253793224


def ordinal_importance(model, tr, te):
    return {f: -float(f.ordinal) for f in tr.features}


def reversing_importance(model, tr, te):
    # at every step rank the survivors so the new list is the reverse of the
    # previous list minus its head, starting from ordinal order
    state = reversing_importance.state
    feats = set(tr.features)
    prev = state.get("prev")
    if prev is None:
        order = sorted(feats, key=lambda f: f.ordinal)
    else:
        order = [f for f in prev[1:]][::-1]
    state["prev"] = order
    return {f: float(len(order) - i) for i, f in enumerate(order)}


def small_data(nf=4, n=200, seed=0):
    return generate(SynthSpec.blocks(n, [1.0] * nf, seed=seed))


def reversal_trace(nf):
    names = [f"f{i}" for i in range(nf)]
    steps = [names]
    while len(steps[-1]) > 2:
        steps.append(steps[-1][1:][::-1])
    return EliminationTrace.from_names(steps)


def random_trace(rng, nf):
    names = [f"f{i}" for i in range(nf)]
    rng.shuffle(names)
    steps = [names]
    while len(steps[-1]) > 2:
        nxt = steps[-1][1:]
        rng.shuffle(nxt)
        steps.append(nxt)
    return EliminationTrace.from_names(steps)


class TestTrace:
    def test_lengths_must_descend(self):
        with pytest.raises(StructuralError):
            EliminationTrace.from_names([["a", "b", "c"], ["a", "b"]])

    def test_next_must_drop_head(self):
        with pytest.raises(StructuralError):
            EliminationTrace.from_names([["a", "b", "c"], ["a", "c"]])

    def test_removed_derived(self):
        t = EliminationTrace.from_names([["a", "b", "c"], ["c", "b"]])
        assert [f.name for f in t.removed] == ["a"]

    def test_bundled_shape(self):
        t = bundled_trace("cardiac")
        assert [len(r) for r in t.rankings] == list(range(9, 1, -1))
        assert len(t.removed) == 7


class TestMipScores:
    def test_bundled_trace_exact(self):
        table = mip_scores(bundled_trace("cardiac"))
        got = {f.name: v for f, v in table.mip.items()}
        for name, frac in EXACT_TRACE_MIP.items():
            assert got[name] == pytest.approx(float(frac), abs=1e-12)

    def test_head_removed_first_scores_one_over_n(self):
        table = mip_scores(bundled_trace("cardiac"))
        lvm = next(f for f in table.mip if f.name == "LVM")
        assert table.mip[lvm] == pytest.approx(1 / 9)
        assert table.x_terms[lvm] == ((9, 1 / 9),)

    def test_printed_terms_sum(self):
        # the per-step contributions quoted for LVSV
        assert sum([0.44, 0.75, 0.71, 0.8, 1, 0.5, 0.33]) == pytest.approx(4.53)

    def test_modified_order(self):
        table = mip_scores(bundled_trace("cardiac"))
        assert table.mip_ranking.names == (
            "LVM", "RVEDV", "RVESV", "LVEDV", "LVESV", "RVSV", "LVSV", "RVEF", "LVEF")

    def test_ascending_order(self):
        t = EliminationTrace.from_names([["a", "b", "c"], ["c", "b"]])
        # a: 1/3; b: 2/3 + 2/2; c: 3/3 + 1/2
        table = mip_scores(t)
        assert table.mip_ranking.names == ("a", "c", "b")
        t2 = EliminationTrace.from_names([["a", "b", "c", "d"], ["d", "b", "c"], ["c", "b"]])
        assert mip_scores(t2).mip_ranking.names[0] == "a"

    @given(st.integers(3, 9), st.randoms(use_true_random=False))
    def test_total_mass(self, nf, rnd):
        table = mip_scores(random_trace(rnd, nf))
        expected = sum((n + 1) / 2 for n in range(2, nf + 1))
        assert sum(table.mip.values()) == pytest.approx(expected)
        assert all(v > 0 for v in table.mip.values())
        scores = [table.mip[f] for f in table.mip_ranking]
        assert scores == sorted(scores)


class TestNmr:
    def test_stable_is_zero(self):
        names = list("abcdef")
        t = EliminationTrace.from_names([names[i:] for i in range(5)])
        value, records = nmr(t)
        assert value == 0
        assert len(records) == 4

    @pytest.mark.parametrize("nf", range(3, 10))
    def test_full_reversal_is_one(self, nf):
        assert nmr(reversal_trace(nf))[0] == 1.0

    def test_one_swap(self):
        t = EliminationTrace.from_names([["a", "b", "c", "d"], ["b", "d", "c"], ["d", "c"]])
        value, records = nmr(t)
        assert [(r.movement, r.max_movement) for r in records] == [(2, 4), (0, 2)]
        assert value == 0.25

    def test_bundled_trace(self):
        assert nmr(bundled_trace("cardiac"))[0] == pytest.approx(EXACT_TRACE_NMR, abs=1e-12)

    def test_too_small(self):
        with pytest.raises(DomainError):
            nmr(EliminationTrace.from_names([["a", "b"]]))

    @given(st.integers(3, 9), st.randoms(use_true_random=False))
    def test_bounds(self, nf, rnd):
        value, records = nmr(random_trace(rnd, nf))
        assert 0.0 <= value <= 1.0
        assert len(records) == nf - 2


class TestScoreSd:
    def test_bundled_trace(self):
        assert score_sd(mip_scores(bundled_trace("cardiac"))) == pytest.approx(
            EXACT_TRACE_SD, abs=1e-12)

    def test_two_points(self):
        t = EliminationTrace.from_names([["a", "b"]])
        assert score_sd(mip_scores(t)) == pytest.approx(statistics.stdev([0.5, 1.0]))
        table = mip_scores(t)
        table.mip.update({k: v for k, v in zip(table.mip, [1.0, 3.0])})
        assert score_sd(table) == pytest.approx(math.sqrt(2))

    def test_all_equal(self):
        table = mip_scores(EliminationTrace.from_names([["a", "b"]]))
        for k in table.mip:
            table.mip[k] = 2.0
        assert score_sd(table) == 0


class TestRunElimination:
    def test_three_features_shape(self):
        data = small_data(3)
        trace = run_elimination(ModelSpec("logistic_regression"), ordinal_importance, data, data)
        assert [len(r) for r in trace.rankings] == [3, 2]
        assert len(trace.removed) == 1

    def test_ordinal_mock_is_stable(self):
        data = small_data(5)
        trace = run_elimination(ModelSpec("logistic_regression"), ordinal_importance, data, data)
        assert [f.ordinal for f in trace.removed] == [0, 1, 2]
        assert nmr(trace)[0] == 0
        assert len(trace.per_step_accuracy) == 4

    def test_reversing_mock(self):
        reversing_importance.state = {}
        data = small_data(6)
        trace = run_elimination(ModelSpec("logistic_regression"), reversing_importance, data, data)
        assert nmr(trace)[0] == 1.0

    def test_nine_features(self):
        data = small_data(9)
        trace = run_elimination(ModelSpec("logistic_regression"), ordinal_importance, data, data)
        assert len(trace.rankings) == 8 and len(trace.removed) == 7

    def test_failure_carries_partial_trace(self):
        data = small_data(4)
        calls = []

        def flaky(model, tr, te):
            calls.append(tr.n_features)
            if len(calls) == 2:
                raise UnfitError("boom")
            return ordinal_importance(model, tr, te)

        with pytest.raises(EliminationError) as info:
            run_elimination(ModelSpec("logistic_regression"), flaky, data, data)
        assert len(info.value.partial_rankings) == 1

    def test_mismatched_splits(self):
        a, b = small_data(3), small_data(4)
        with pytest.raises(StructuralError):
            run_elimination(ModelSpec("logistic_regression"), ordinal_importance, a, b)


class TestStabilityReport:
    def test_mock_stable(self):
        report = stability_report(ModelSpec("logistic_regression"), ordinal_importance,
                                  small_data(5))
        assert report.nmr == 0
        assert report.scores.mip_ranking == report.base_ranking

    def test_three_features_fields(self):
        report = stability_report("logistic_regression", ordinal_importance, small_data(3),
                                  folds=3, grid=[{"C": 1.0}])
        assert len(report.movements) == 1
        assert report.sd == report.scores.sd
        assert report.meta["n_test"] + report.meta["n_train"] == 200

    def test_reproducible(self):
        from mipxai.explainers import ExplainerSpec

        data = small_data(4, n=300)
        spec = ExplainerSpec(n_coalition_samples=8, background_size=20)
        a = stability_report(ModelSpec("logistic_regression"), spec, data, seed=3)
        b = stability_report(ModelSpec("logistic_regression"), spec, data, seed=3)
        assert a.trace == b.trace
        assert a.scores.mip == b.scores.mip

    def test_needs_three_features(self):
        data = Dataset.from_arrays(np.random.default_rng(0).normal(size=(20, 2)),
                                   [0, 1] * 10)
        with pytest.raises(DomainError):
            stability_report(ModelSpec("logistic_regression"), ordinal_importance, data)


def test_report_from_trace_matches_parts():
    trace = bundled_trace("cardiac")
    report = report_from_trace(trace)
    assert report.nmr == nmr(trace)[0]
    assert report.sd == score_sd(mip_scores(trace))
    assert report.model_spec is None


def test_random_traces_seeded():
    rnd = random.Random(0)
    for _ in range(50):
        value, _ = nmr(random_trace(rnd, rnd.randint(3, 10)))
        assert 0 <= value <= 1


def test_rounded_terms_reproduce_published_scores():
    """The published scores add terms already rounded for display (one decimal
    in the six-feature step, two elsewhere); exact replay differs by up to 0.045."""
    from decimal import ROUND_HALF_UP, Decimal

    published = {"LVM": 0.11, "RVEDV": 0.46, "RVESV": 0.61, "LVEDV": 2.12, "LVESV": 2.52,
                 "RVSV": 3.42, "LVSV": 4.53, "RVEF": 5.56, "LVEF": 6.69}
    table = mip_scores(bundled_trace("cardiac"))
    for feature, terms in table.x_terms.items():
        total = Decimal(0)
        for n, x in terms:
            quantum = Decimal("0.1") if n == 6 else Decimal("0.01")
            exact = Decimal(round(x * n)) / Decimal(n)
            total += exact.quantize(quantum, rounding=ROUND_HALF_UP)
        assert float(total) == pytest.approx(published[feature.name], abs=0.005)
