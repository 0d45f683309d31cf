from __future__ import annotations

import math

import numpy as np
import pytest

from knaf_compose.exceptions import ConfigError, DimensionMismatchError, KernelMismatchError
from knaf_compose.rkhs import (
    KernelParams,
    SparseKernelModel,
    gram,
    hilbert_dist_sq,
    hilbert_norm_sq,
    inner,
    inner_product,
    kernel_eval,
)


def test_kernel_eval_hand_example(kernel5):
    value = kernel_eval(np.zeros(5), [1.0, 0.0, 0.0, 0.0, 0.0], kernel5)
    assert value == pytest.approx(math.exp(-0.5 / 0.5625))
    assert value == pytest.approx(0.411112, abs=1e-6)


def test_kernel_identities_on_random_pairs(rng):
    for _ in range(1000):
        dim = int(rng.integers(1, 7))
        kernel = KernelParams(tuple(rng.uniform(0.5, 2.0, size=dim)))
        x = rng.uniform(-1.0, 1.0, size=dim)
        y = rng.uniform(-1.0, 1.0, size=dim)
        assert kernel_eval(x, x, kernel) == 1.0
        forward = kernel_eval(x, y, kernel)
        assert forward == kernel_eval(y, x, kernel)
        assert 0.0 < forward <= 1.0


def test_gram_matches_kernel_eval(rng, kernel5):
    a = rng.normal(size=(4, 5))
    b = rng.normal(size=(3, 5))
    matrix = gram(a, b, kernel5)
    expected = np.array([[kernel_eval(x, y, kernel5) for y in b] for x in a])
    np.testing.assert_allclose(matrix, expected, rtol=1e-12)


def test_kernel_params_validation():
    with pytest.raises(ConfigError):
        KernelParams((0.75, 0.0))
    with pytest.raises(ConfigError):
        KernelParams(())
    assert KernelParams(0.5).bandwidth == (0.5,)


def test_dimension_mismatch_is_rejected(kernel5):
    with pytest.raises(DimensionMismatchError):
        kernel_eval(np.zeros(4), np.zeros(5), kernel5)
    model = SparseKernelModel.zeros(kernel5, 2)
    with pytest.raises(DimensionMismatchError):
        model.evaluate(np.zeros(3))
    with pytest.raises(DimensionMismatchError):
        model.add_center(np.zeros(5), [1.0, 2.0, 3.0])


def test_evaluate_empty_model_is_zero(kernel5):
    model = SparseKernelModel.zeros(kernel5, 3)
    np.testing.assert_array_equal(model.evaluate(np.ones(5)), np.zeros(3))
    assert model.order == 0


def test_evaluate_at_own_center_returns_weight(kernel5):
    c = np.array([0.1, 0.2, 0.3, 0.4, 0.5])
    model = SparseKernelModel.zeros(kernel5, 2).add_center(c, [2.0, -1.0])
    np.testing.assert_array_equal(model.evaluate(c), [2.0, -1.0])


def test_evaluate_matches_naive_two_term_sum(rng, kernel5):
    centers = rng.normal(size=(2, 5))
    weights = rng.normal(size=(2, 2))
    model = SparseKernelModel(centers, weights, kernel5)
    s = rng.normal(size=5)
    expected = sum(weights[n] * kernel_eval(centers[n], s, kernel5) for n in range(2))
    np.testing.assert_allclose(model.evaluate(s), expected, rtol=1e-12, atol=1e-12)


def test_batch_evaluate_matches_single(rng, make_model):
    model = make_model(rng, 6)
    states = rng.normal(size=(7, 3))
    batch = model.evaluate(states)
    assert batch.shape == (7, 2)
    for row, s in zip(batch, states, strict=True):
        np.testing.assert_allclose(row, model.evaluate(s), rtol=1e-12, atol=1e-12)


def test_add_center_then_negation_cancels(rng, make_model):
    model = make_model(rng, 4)
    s = rng.normal(size=3)
    w = np.array([0.7, -1.3])
    cancelled = model.add_center(s, w).add_center(s, -w)
    for query in rng.normal(size=(20, 3)):
        np.testing.assert_allclose(cancelled.evaluate(query), model.evaluate(query), atol=1e-12)
    assert hilbert_dist_sq(cancelled, model) == pytest.approx(0.0, abs=1e-12)


def test_add_far_center_barely_moves_old_centers(rng, make_model):
    model = make_model(rng, 5)
    far = np.array([10.0, 10.0, 10.0])
    w = np.array([3.0, 4.0])
    grown = model.add_center(far, w)
    assert grown.order == model.order + 1
    for c in model.centers:
        bound = kernel_eval(far, c, model.kernel) * np.linalg.norm(w)
        assert np.linalg.norm(grown.evaluate(c) - model.evaluate(c)) <= bound + 1e-12


def test_linearity_of_concat_and_scaling(rng, make_model):
    for _ in range(1000):
        a = make_model(rng, int(rng.integers(0, 4)))
        b = make_model(rng, int(rng.integers(0, 4)))
        c = float(rng.normal())
        s = rng.normal(size=3)
        np.testing.assert_allclose(a.concat(b).evaluate(s), a.evaluate(s) + b.evaluate(s), atol=1e-12)
        np.testing.assert_allclose(a.scaled(c).evaluate(s), c * a.evaluate(s), atol=1e-12)


def test_reproducing_property(rng, make_model):
    for _ in range(1000):
        model = make_model(rng, int(rng.integers(1, 6)))
        s = rng.normal(size=3)
        np.testing.assert_allclose(inner(model, s), model.evaluate(s), rtol=1e-10, atol=1e-12)


def test_hilbert_distance_to_itself_is_zero(rng, make_model):
    model = make_model(rng, 5)
    assert hilbert_dist_sq(model, model) == 0.0


def test_hilbert_distance_single_atom_to_empty(kernel5):
    w = np.array([3.0, -4.0])
    atom = SparseKernelModel.zeros(kernel5, 2).add_center(np.ones(5), w)
    assert hilbert_dist_sq(atom, SparseKernelModel.zeros(kernel5, 2)) == pytest.approx(25.0)
    assert hilbert_norm_sq(atom) == pytest.approx(25.0)


def test_hilbert_distance_matches_dense_gram_oracle(rng, make_model):
    for _ in range(50):
        a = make_model(rng, 3)
        b = make_model(rng, 3)
        centers = np.vstack([a.centers, b.centers])
        weights = np.vstack([a.weights, -b.weights])
        bw = np.array(a.kernel.bandwidth)
        dense = np.array(
            [[math.exp(-0.5 * float(np.sum(((x - y) / bw) ** 2))) for y in centers] for x in centers]
        )
        oracle = float(np.trace(weights.T @ dense @ weights))
        assert hilbert_dist_sq(a, b) == pytest.approx(oracle, rel=1e-9, abs=1e-12)


def test_inner_product_is_symmetric(rng, make_model):
    a = make_model(rng, 4)
    b = make_model(rng, 3)
    np.testing.assert_allclose(inner_product(a, b), inner_product(b, a), rtol=1e-10, atol=1e-12)


def test_columns_share_the_dictionary(rng, make_model):
    model = make_model(rng, 4, output_dim=5)
    view = model.columns(slice(1, 3))
    assert view.output_dim == 2
    np.testing.assert_array_equal(view.centers, model.centers)
    s = rng.normal(size=3)
    np.testing.assert_allclose(view.evaluate(s), model.evaluate(s)[1:3], rtol=1e-12, atol=1e-12)


def test_models_are_read_only(rng, make_model):
    model = make_model(rng, 2)
    with pytest.raises(ValueError, match="read-only"):
        model.weights[0, 0] = 1.0


def test_mixing_kernels_is_rejected(rng):
    a = SparseKernelModel(rng.normal(size=(2, 2)), rng.normal(size=(2, 1)), KernelParams((0.75, 0.75)))
    b = SparseKernelModel(rng.normal(size=(2, 2)), rng.normal(size=(2, 1)), KernelParams((0.5, 0.75)))
    with pytest.raises(KernelMismatchError):
        a.concat(b)
    with pytest.raises(KernelMismatchError):
        hilbert_dist_sq(a, b)


def test_zero_distance_iff_agreement_at_union_centers(rng, make_model):
    for _ in range(200):
        a = make_model(rng, int(rng.integers(1, 8)), state_dim=2)
        new_state = rng.uniform(-1.5, 1.5, size=2)
        union = np.vstack([a.centers, new_state])
        perm = rng.permutation(a.order)

        same = SparseKernelModel(a.centers[perm], a.weights[perm], a.kernel).add_center(new_state, np.zeros(2))
        assert hilbert_dist_sq(a, same) <= 1e-10
        np.testing.assert_allclose(same.evaluate(union), a.evaluate(union), atol=1e-8)

        w = rng.normal(size=2)
        different = a.add_center(new_state, w)
        assert hilbert_dist_sq(a, different) == pytest.approx(float(w @ w), rel=1e-6, abs=1e-9)
        np.testing.assert_allclose(different.evaluate(new_state) - a.evaluate(new_state), w, atol=1e-12)
