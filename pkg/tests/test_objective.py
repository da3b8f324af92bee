import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsdwd import (
    DistributionSource,
    ObjectiveKind,
    TokenDistribution,
    alt_inverse,
    alt_transform,
    gradient,
    hessian_from_probs,
    hvp,
    loss,
    make_objective,
    minimizer,
    power_law_distribution,
    probability_map,
    softmax_stable,
)

from helpers import fd_gradient, kl_direct

BOTH_KINDS = [ObjectiveKind.SOFTMAX_UNIGRAM, ObjectiveKind.ADDITIVE_LOGISTIC]


def make_dist(probs):
    probs = np.asarray(probs, dtype=np.float64)
    return TokenDistribution(d=probs.size, probs=probs, source=DistributionSource.CORPUS)


def unigram(probs):
    return make_objective(ObjectiveKind.SOFTMAX_UNIGRAM, make_dist(probs))


def alt(probs):
    return make_objective(ObjectiveKind.ADDITIVE_LOGISTIC, make_dist(probs))


class TestSoftmaxStable:
    def test_symmetry(self):
        np.testing.assert_allclose(softmax_stable(np.zeros(3)), np.full(3, 1 / 3), atol=1e-15)

    @given(st.floats(min_value=-1e6, max_value=1e6), st.integers(min_value=1, max_value=20))
    def test_constant_logits_are_uniform(self, c, d):
        q = softmax_stable(np.full(d, c))
        np.testing.assert_allclose(q, np.full(d, 1 / d), atol=1e-12)

    def test_no_overflow_on_large_gap(self):
        q = softmax_stable(np.array([1000.0, 0.0]))
        assert np.all(np.isfinite(q))
        assert q[0] == pytest.approx(1.0, abs=1e-12)
        assert q[1] < 1e-300

    @settings(max_examples=60)
    @given(st.lists(st.floats(min_value=-700, max_value=700), min_size=1, max_size=30))
    def test_sums_to_one(self, values):
        q = softmax_stable(np.array(values))
        assert abs(float(q.sum()) - 1.0) <= 1e-12
        assert np.all(q >= 0.0)
        assert np.all(q <= 1.0)


class TestLoss:
    def test_uniform_logits_d2(self):
        obj = unigram([2 / 3, 1 / 3])
        expected = (2 / 3) * math.log(4 / 3) + (1 / 3) * math.log(2 / 3)
        assert loss(obj, np.zeros(2)) == pytest.approx(expected, abs=1e-15)

    def test_matches_direct_kl_summation(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            probs = np.sort(rng.dirichlet(np.ones(6)))[::-1] + 0.0
            probs = probs / probs.sum()
            obj = unigram(probs)
            theta = rng.standard_normal(6)
            direct = kl_direct(obj.dist.probs, softmax_stable(theta))
            assert loss(obj, theta) == pytest.approx(direct, rel=1e-12, abs=1e-12)

    def test_zero_at_any_minimizer(self):
        dist = power_law_distribution(5)
        obj = make_objective(ObjectiveKind.SOFTMAX_UNIGRAM, dist)
        theta = np.log(dist.probs) + 1.7
        assert loss(obj, theta) <= 1e-12

    def test_power_law_log_rank_logits(self):
        dist = power_law_distribution(3)
        obj = make_objective(ObjectiveKind.SOFTMAX_UNIGRAM, dist)
        theta = -np.log(np.array([1.0, 2.0, 3.0]))
        assert loss(obj, theta) <= 1e-12

    def test_nonnegative(self):
        rng = np.random.default_rng(4)
        obj = make_objective(ObjectiveKind.SOFTMAX_UNIGRAM, power_law_distribution(8))
        for _ in range(50):
            assert loss(obj, rng.standard_normal(8)) >= 0.0

    def test_dimension_mismatch(self):
        obj = unigram([0.5, 0.5])
        with pytest.raises(ValueError):
            loss(obj, np.zeros(3))

    @settings(max_examples=40)
    @given(st.floats(min_value=-100, max_value=100))
    def test_shift_invariance(self, c):
        obj = make_objective(ObjectiveKind.SOFTMAX_UNIGRAM, power_law_distribution(6))
        rng = np.random.default_rng(11)
        theta = rng.standard_normal(6)
        assert loss(obj, theta + c) == pytest.approx(loss(obj, theta), abs=1e-12)


class TestGradient:
    def test_uniform_logits_d2(self):
        obj = unigram([2 / 3, 1 / 3])
        np.testing.assert_allclose(gradient(obj, np.zeros(2)), [-1 / 6, 1 / 6], atol=1e-15)

    def test_power_law_d3_at_zero(self):
        obj = make_objective(ObjectiveKind.SOFTMAX_UNIGRAM, power_law_distribution(3))
        expected = np.array([1 / 3 - 6 / 11, 1 / 3 - 3 / 11, 1 / 3 - 2 / 11])
        np.testing.assert_allclose(gradient(obj, np.zeros(3)), expected, atol=1e-15)

    def test_vanishes_at_minimizer(self):
        for kind in BOTH_KINDS:
            obj = make_objective(kind, power_law_distribution(7))
            assert np.max(np.abs(gradient(obj, minimizer(obj)))) <= 1e-10

    def test_unigram_gradient_sums_to_zero(self):
        rng = np.random.default_rng(5)
        obj = make_objective(ObjectiveKind.SOFTMAX_UNIGRAM, power_law_distribution(20))
        for _ in range(20):
            g = gradient(obj, rng.standard_normal(20))
            assert abs(float(g.sum())) <= 1e-12

    @pytest.mark.parametrize("kind", BOTH_KINDS)
    @pytest.mark.parametrize("d", [2, 5, 50])
    def test_finite_difference_agreement(self, kind, d):
        # Central differences at h=1e-5 carry ~1e-11 absolute roundoff, so the
        # per-coordinate relative error uses a 1e-3 denominator floor; the
        # vector-level relative error is asserted strictly.
        dist = power_law_distribution(d)
        obj = make_objective(kind, dist)
        rng = np.random.default_rng(1234)
        for _ in range(20):
            theta = rng.standard_normal(obj.param_dim)
            g = gradient(obj, theta)
            fd = fd_gradient(lambda x: loss(obj, x), theta, h=1e-5)
            per_coord = np.abs(fd - g) / np.maximum(np.abs(g), 1e-3)
            assert float(per_coord.max()) < 1e-6
            assert float(np.linalg.norm(fd - g)) / float(np.linalg.norm(g)) < 1e-6


class TestHessian:
    def test_two_by_two(self):
        expected = np.array([[0.25, -0.25], [-0.25, 0.25]])
        np.testing.assert_allclose(hessian_from_probs(np.array([0.5, 0.5])), expected, atol=1e-15)

    def test_vertex_is_zero_matrix(self):
        np.testing.assert_allclose(hessian_from_probs(np.array([1.0, 0.0])), np.zeros((2, 2)), atol=1e-15)

    def test_uniform_d3_eigenvalues(self):
        H = hessian_from_probs(np.full(3, 1 / 3))
        eig = np.sort(np.linalg.eigvalsh(H))
        np.testing.assert_allclose(eig, [0.0, 1 / 3, 1 / 3], atol=1e-12)

    def test_row_sums_and_eigenvalue_window(self):
        rng = np.random.default_rng(6)
        for _ in range(30):
            q = rng.dirichlet(np.ones(int(rng.integers(2, 12))))
            H = hessian_from_probs(q)
            assert float(np.max(np.abs(H.sum(axis=1)))) <= 1e-12
            eig = np.linalg.eigvalsh(H)
            assert eig[0] >= -1e-12
            assert eig[-1] <= 0.5 + 1e-12

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            hessian_from_probs(np.array([0.4, 0.4]))
        with pytest.raises(ValueError):
            hessian_from_probs(np.array([-0.1, 1.1]))


class TestHvp:
    def test_constant_vector_in_null_space(self):
        obj = make_objective(ObjectiveKind.SOFTMAX_UNIGRAM, power_law_distribution(3))
        theta = np.zeros(3)
        np.testing.assert_allclose(hvp(obj, theta, np.ones(3)), np.zeros(3), atol=1e-15)

    def test_half_half_eigenvector(self):
        obj = unigram([0.5, 0.5])
        out = hvp(obj, np.zeros(2), np.array([1.0, -1.0]))
        np.testing.assert_allclose(out, [0.5, -0.5], atol=1e-15)

    @pytest.mark.parametrize("kind", BOTH_KINDS)
    def test_matches_dense_hessian(self, kind):
        dist = power_law_distribution(5)
        obj = make_objective(kind, dist)
        rng = np.random.default_rng(7)
        for _ in range(20):
            theta = rng.standard_normal(obj.param_dim)
            v = rng.standard_normal(obj.param_dim)
            dense = hessian_from_probs(probability_map(obj, theta))
            if kind is ObjectiveKind.ADDITIVE_LOGISTIC:
                dense = dense[:-1, :-1]
            np.testing.assert_allclose(hvp(obj, theta, v), dense @ v, atol=1e-12)

    @pytest.mark.parametrize("kind", BOTH_KINDS)
    def test_finite_difference_of_gradient(self, kind):
        obj = make_objective(kind, power_law_distribution(6))
        rng = np.random.default_rng(8)
        h = 1e-6
        for _ in range(10):
            theta = rng.standard_normal(obj.param_dim)
            v = rng.standard_normal(obj.param_dim)
            fd = (gradient(obj, theta + h * v) - gradient(obj, theta - h * v)) / (2 * h)
            exact = hvp(obj, theta, v)
            assert float(np.linalg.norm(fd - exact)) / max(float(np.linalg.norm(exact)), 1e-12) < 1e-5

    @pytest.mark.parametrize("kind", BOTH_KINDS)
    def test_convexity_witness(self, kind):
        obj = make_objective(kind, power_law_distribution(9))
        rng = np.random.default_rng(9)
        for _ in range(50):
            theta = rng.standard_normal(obj.param_dim)
            v = rng.standard_normal(obj.param_dim)
            assert float(np.dot(v, hvp(obj, theta, v))) >= -1e-12

    def test_dimension_mismatch(self):
        obj = unigram([0.5, 0.5])
        with pytest.raises(ValueError):
            hvp(obj, np.zeros(2), np.zeros(3))


class TestAdditiveLogistic:
    def test_single_free_logit(self):
        np.testing.assert_allclose(alt_transform(np.array([0.0])), [0.5, 0.5], atol=1e-15)

    def test_ln2_logits(self):
        np.testing.assert_allclose(
            alt_transform(np.array([math.log(2.0), 0.0])), [0.5, 0.25, 0.25], atol=1e-15
        )

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            alt_transform(np.array([]))

    def test_inverse_examples(self):
        np.testing.assert_allclose(
            alt_inverse(np.array([0.5, 0.25, 0.25])), [math.log(2.0), 0.0], atol=1e-15
        )
        np.testing.assert_allclose(alt_inverse(np.full(4, 0.25)), np.zeros(3), atol=1e-15)

    def test_inverse_of_power_law_is_log_rank_ratio(self):
        dist = power_law_distribution(5)
        theta = alt_inverse(dist.probs)
        expected = np.log(5.0 / np.arange(1, 5))
        np.testing.assert_allclose(theta, expected, atol=1e-12)

    def test_round_trip(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            p = rng.dirichlet(np.ones(int(rng.integers(2, 15))))
            np.testing.assert_allclose(alt_transform(alt_inverse(p)), p, atol=1e-12)

    def test_inverse_rejects_zero_probability(self):
        with pytest.raises(ValueError):
            alt_inverse(np.array([1.0, 0.0]))

    def test_alt_objective_unique_minimizer(self):
        dist = power_law_distribution(6)
        obj = make_objective(ObjectiveKind.ADDITIVE_LOGISTIC, dist)
        assert loss(obj, alt_inverse(dist.probs)) <= 1e-12

    def test_alt_requires_two_classes(self):
        with pytest.raises(ValueError):
            make_objective(ObjectiveKind.ADDITIVE_LOGISTIC, power_law_distribution(1))
