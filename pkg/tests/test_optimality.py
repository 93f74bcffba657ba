import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairdesign import optimality
from pairdesign.errors import CertificationError, DomainError, SingularDesignError
from pairdesign.measures import DepthDesign, h_values_exact, log_det
from pairdesign.model import ModelSpec
from pairdesign.optimality import (
    analytic_weight,
    checked_analytic_weight,
    conjecture_probe,
    conjectured_depth,
    d_optimal_design,
    kw_certify,
    kw_certify_exact,
    optimal_depth_first_order,
    optimal_depth_main,
    optimal_depth_second_order,
    optimize_weights,
    search_d_optimal,
    k3_optimal_design,
    variance_function,
    variance_function_exact,
    variance_single_depth,
)
from pairdesign.oracle import oracle_variance

K3_OPT = DepthDesign(3, {1: Fraction(3, 7), 2: Fraction(3, 7), 3: Fraction(1, 7)})


def nonsingular_depths(K):
    return [d for d in range(1, K) if 3 * K * K - 6 * d * K + 4 * d * d - 3 * K + 2 != 0]


class TestVarianceFunction:
    def test_zero_depth(self):
        assert variance_function(0, K3_OPT) == 0

    def test_k3_optimum(self):
        for d in (1, 2, 3):
            assert variance_function(d, K3_OPT) == pytest.approx(7, abs=1e-12)
        for d in range(4):
            assert variance_function(d, K3_OPT) == pytest.approx(7 * d * (d * d - 6 * d + 11) / 6, abs=1e-12)
            assert variance_function_exact(d, K3_OPT) == Fraction(7 * d * (d * d - 6 * d + 11), 6)

    def test_singular_design_names_block(self):
        with pytest.raises(SingularDesignError) as info:
            variance_function(1, DepthDesign.point(5, 5))
        assert info.value.block == "first-order"
        with pytest.raises(SingularDesignError) as info:
            variance_function(1, DepthDesign.point(3, 2))
        assert info.value.block == "second-order"

    @pytest.mark.parametrize("K", [3, 4, 5])
    def test_matches_oracle_on_every_pair(self, K):
        rng = np.random.default_rng(100 + K)
        spec = ModelSpec(K)
        designs = [d_optimal_design(K).design]
        for _ in range(3):
            w = rng.dirichlet(np.ones(K))
            designs.append(DepthDesign(K, dict(zip(range(1, K + 1), w / w.sum()))))
        for design in designs:
            depths, v = oracle_variance(design, spec)
            closed = np.array([variance_function(d, design) for d in range(K + 1)])
            np.testing.assert_allclose(v, closed[depths], rtol=0, atol=1e-9)

    @pytest.mark.parametrize("K", [4, 7, 12, 30])
    def test_cubic_in_depth(self, K):
        design = d_optimal_design(K).design
        v = np.array([variance_function(d, design) for d in range(K + 1)])
        third = np.diff(v, n=3)
        assert np.all(third > 0)
        np.testing.assert_allclose(third, third[0], rtol=1e-8)


class TestSingleDepth:
    @pytest.mark.parametrize("K", range(3, 13))
    def test_fixed_point(self, K):
        p = ModelSpec(K).p
        for dp in nonsingular_depths(K):
            assert variance_single_depth(dp, dp, K) == pytest.approx(p, abs=1e-10)

    @pytest.mark.parametrize("K", range(3, 11))
    def test_agrees_with_general_formula(self, K):
        for dp in nonsingular_depths(K):
            design = DepthDesign.point(K, dp)
            for d in range(K + 1):
                assert variance_single_depth(d, dp, K) == pytest.approx(
                    variance_function(d, design), rel=1e-12, abs=1e-12
                )

    def test_zero_depth(self):
        assert variance_single_depth(0, 2, 6) == 0

    def test_full_depth_divides_by_zero(self):
        with pytest.raises(SingularDesignError):
            variance_single_depth(2, 5, 5)
        with pytest.raises(SingularDesignError):
            variance_single_depth(1, 2, 3)

    def test_domain(self):
        with pytest.raises(DomainError):
            variance_single_depth(1, 0, 5)
        with pytest.raises(DomainError):
            variance_single_depth(6, 1, 5)


class TestCertification:
    def test_k3_optimum(self):
        prof = kw_certify(K3_OPT)
        assert prof.certified
        assert prof.equality_depths == (1, 2, 3)
        assert prof.values[0] == 0
        assert kw_certify_exact(K3_OPT)

    def test_k4_profile(self):
        prof = kw_certify(d_optimal_design(4).design)
        np.testing.assert_allclose(prof.normalized[1:], [0.875, 1, 0.875, 1], atol=1e-12)

    def test_depth_one_k4_not_certified(self):
        # brute-force inverse gives v = 64/3 on X_4 for the uniform design on X_1
        prof = kw_certify(DepthDesign.point(4, 1))
        assert not prof.certified
        assert prof.values[4] == pytest.approx(64 / 3, rel=1e-12)
        assert prof.kw_max == pytest.approx(64 / 3 / 14, rel=1e-12)

    @pytest.mark.parametrize("K", range(3, 13))
    def test_uniform_single_depth_fixed_point(self, K):
        for dp in nonsingular_depths(K):
            prof = kw_certify(DepthDesign.point(K, dp))
            assert prof.values[dp] == pytest.approx(prof.p, abs=1e-10)


class TestComponentwiseDepths:
    @pytest.mark.parametrize("K", [1, 3, 10])
    def test_main(self, K):
        assert optimal_depth_main(K) == K

    def test_first_order(self):
        assert optimal_depth_first_order(4) == {2}
        assert optimal_depth_first_order(5) == {2, 3}

    def test_second_order(self):
        assert optimal_depth_second_order(3) == {1, 3}
        assert optimal_depth_second_order(4) == {4}

    @pytest.mark.parametrize("K", range(3, 51))
    def test_exact_argmax_scans(self, K):
        values = [h_values_exact(d, K) for d in range(K + 1)]
        for r, expected in enumerate(
            [{optimal_depth_main(K)}, optimal_depth_first_order(K), optimal_depth_second_order(K)]
        ):
            col = [v[r] for v in values]
            best = max(col)
            assert {d for d, x in enumerate(col) if x == best} == set(expected)

    def test_domain(self):
        with pytest.raises(DomainError):
            optimal_depth_first_order(1)
        with pytest.raises(DomainError):
            optimal_depth_second_order(2)


class TestAnalyticWeight:
    def test_k4(self):
        aw = analytic_weight(4)
        assert aw.d_star == 2
        assert aw.exact == Fraction(3, 21)
        assert round(aw.w_K, 3) == 0.143

    def test_k8(self):
        aw = analytic_weight(8)
        assert aw.d_star == 3
        assert round(aw.w_K, 3) == 0.356

    def test_k5(self):
        aw = analytic_weight(5)
        assert aw.d_star == 2
        assert round(aw.w_K, 3) == 0.167

    @pytest.mark.parametrize("K", [3, 11, 40])
    def test_outside_range(self, K):
        assert analytic_weight(K) is None

    @pytest.mark.parametrize("K", range(4, 11))
    def test_formula_matches_restricted_optimum(self, K):
        aw = analytic_weight(K)
        assert optimize_weights(K, {K, aw.d_star})[K] == pytest.approx(aw.w_K, abs=1e-8)

    def test_checked_warns_and_prefers_numeric(self, monkeypatch):
        monkeypatch.setattr(
            optimality, "analytic_weight", lambda K: optimality.AnalyticWeight(K // 2, 0.5)
        )
        with pytest.warns(RuntimeWarning):
            aw = checked_analytic_weight(4)
        assert aw.w_K == pytest.approx(1 / 7, abs=1e-12)

    def test_checked_silent_when_consistent(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert checked_analytic_weight(9).w_K == pytest.approx(analytic_weight(9).w_K)


class TestOptimizeWeights:
    @pytest.mark.parametrize("K", [4, 5, 10])
    def test_full_depth_alone_is_singular(self, K):
        with pytest.raises(SingularDesignError):
            optimize_weights(K, {K})

    def test_k4_two_depths(self):
        w = optimize_weights(4, {4, 2})
        assert w[4] == pytest.approx(1 / 7, abs=1e-12)
        assert w[2] == pytest.approx(6 / 7, abs=1e-12)

    def test_k3_three_depths(self):
        w = optimize_weights(3, {1, 2, 3})
        for d, target in zip((1, 2, 3), (3 / 7, 3 / 7, 1 / 7)):
            assert w[d] == pytest.approx(target, abs=1e-12)

    def test_boundary_optimum_keeps_zero_weight(self):
        w = optimize_weights(8, {3, 4, 8})
        assert w[3] == 0
        assert w[8] == pytest.approx(9 / 23, abs=1e-12)

    def test_argument_order_irrelevant(self):
        assert optimize_weights(9, [9, 4, 5]) == optimize_weights(9, (5, 9, 4))

    def test_domain(self):
        with pytest.raises(DomainError):
            optimize_weights(6, {1, 2, 3, 6})
        with pytest.raises(DomainError):
            optimize_weights(6, set())
        with pytest.raises(DomainError):
            optimize_weights(6, {7})

    @settings(max_examples=60, deadline=None)
    @given(st.integers(4, 25).flatmap(lambda K: st.tuples(st.just(K), st.sets(st.integers(1, K), min_size=1, max_size=3))))
    def test_kkt_conditions(self, case):
        K, depths = case
        try:
            w = optimize_weights(K, depths)
        except SingularDesignError:
            return
        design = DepthDesign(K, {d: x for d, x in w.items() if x > 0})
        p = ModelSpec(K).p
        for d, x in w.items():
            v = variance_function(d, design)
            if x > 0:
                assert v / p == pytest.approx(1, abs=1e-10)
            else:
                assert v / p <= 1 + 1e-10
        # no candidate on the simplex does better
        rng = np.random.default_rng(K)
        best = log_det(design)
        for _ in range(20):
            r = rng.dirichlet(np.ones(len(depths)))
            other = DepthDesign(K, dict(zip(sorted(depths), r / r.sum())))
            assert log_det(other) <= best + 1e-12


class TestDOptimal:
    def test_k3(self):
        res = d_optimal_design(3)
        assert res.support_depths == (1, 2, 3)
        assert res.design.exact == K3_OPT.exact
        assert res.certified and res.exact_certified

    def test_k3_generic_search_agrees(self):
        found = search_d_optimal(3)
        for d, w in k3_optimal_design().weights.items():
            assert found.weights[d] == pytest.approx(w, abs=1e-12)

    def test_k7(self):
        res = d_optimal_design(7)
        assert res.support_depths == (3, 7)
        assert res.design.weights[7] == pytest.approx(0.303, abs=5e-4)
        assert res.design.weights[3] == pytest.approx(0.697, abs=5e-4)

    def test_k10(self):
        res = d_optimal_design(10)
        assert res.support_depths == (4, 10)
        assert res.design.weights[10] == pytest.approx(0.462, abs=5e-4)
        assert res.design.weights[4] == pytest.approx(0.538, abs=5e-4)

    def test_k8_is_rational(self):
        res = d_optimal_design(8)
        assert res.design.exact == {4: Fraction(14, 23), 8: Fraction(9, 23)}
        assert res.exact_certified

    def test_k8_three_depth_alternative_is_worse(self):
        # weight from the closed form on {3, 8}; this design violates the bound at d = 4
        aw = analytic_weight(8)
        design = DepthDesign(8, {8: aw.w_K, 3: 1 - aw.w_K})
        prof = kw_certify(design)
        assert not prof.certified
        assert prof.normalized[4] == pytest.approx(1.0039178, abs=1e-6)
        assert log_det(design) < d_optimal_design(8).logdet
        depths, v = oracle_variance(design, ModelSpec(8))
        assert v[depths == 4].max() / 92 == pytest.approx(prof.normalized[4], abs=1e-9)

    @pytest.mark.parametrize("K", list(range(3, 26)) + [50, 200, 1000])
    def test_certified_everywhere(self, K):
        res = d_optimal_design(K)
        assert res.certified
        assert len(res.support_depths) <= 3
        normalized = res.profile.normalized
        assert max(normalized) <= 1 + 1e-9
        for d in res.support_depths:
            assert normalized[d] == pytest.approx(1, abs=1e-6)

    def test_rejects_small_k(self):
        with pytest.raises(DomainError):
            d_optimal_design(2)

    def test_certification_failure_is_reported(self, monkeypatch):
        monkeypatch.setattr(optimality, "search_d_optimal", lambda K: DepthDesign.point(K, 1))
        with pytest.raises(CertificationError) as info:
            d_optimal_design(5)
        assert info.value.profile.kw_max > 1


class TestConjectureProbe:
    def test_k9(self):
        (rec,) = conjecture_probe(9, K_min=9)
        assert rec.support == (4, 9)
        assert rec.matches and rec.certified

    def test_k6(self):
        (rec,) = conjecture_probe(6, K_min=6)
        assert rec.support == (3, 6)

    def test_up_to_100_certified(self):
        records = conjecture_probe(100)
        assert [r.K for r in records] == list(range(4, 101))
        assert all(r.certified and r.error is None for r in records)
        assert all(len(r.support) == 2 for r in records)

    def test_errors_do_not_abort(self, monkeypatch):
        real = optimality.d_optimal_design

        def flaky(K):
            if K == 5:
                raise CertificationError("boom")
            return real(K)

        monkeypatch.setattr(optimality, "d_optimal_design", flaky)
        records = conjecture_probe(6)
        assert records[1].error == "boom"
        assert records[2].certified

    def test_expected_depths(self):
        assert [conjectured_depth(K) for K in range(4, 13)] == [2, 2, 3, 3, 3, 4, 4, 5, 5]
