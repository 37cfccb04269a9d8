"""CTC forward-backward loss, its gradient and greedy decoding."""
import itertools

import numpy as np
import pytest
from scipy.special import softmax

from textline_core.seqmodel.ctc import collapse, ctc_greedy_decode, ctc_loss, min_frames
from textline_core.utils.errors import CTCError


def _enumerated_loss(posteriors, label):
    """-log of the summed probability of every frame path collapsing to label."""
    T, K = posteriors.shape
    total = 0.0
    for path in itertools.product(range(K), repeat=T):
        if collapse(path) == list(label):
            total += np.prod(posteriors[np.arange(T), path])
    return -np.log(total)


def _random_instance(rng):
    K = int(rng.integers(2, 5))
    length = int(rng.integers(0, 4))
    label = [int(s) for s in rng.integers(1, K, size=length)]
    T = int(rng.integers(max(1, min_frames(label)), 7))
    posteriors = softmax(rng.normal(scale=2.0, size=(T, K)), axis=1)
    return posteriors, label


class TestCtcLoss:
    def test_matches_path_enumeration(self):
        rng = np.random.default_rng(0)
        checked = 0
        while checked < 200:
            posteriors, label = _random_instance(rng)
            if len(posteriors) < min_frames(label):
                continue
            loss, _ = ctc_loss(posteriors, label)
            assert loss == pytest.approx(_enumerated_loss(posteriors, label), abs=1e-9)
            checked += 1

    def test_empty_label_is_all_blank(self):
        posteriors = softmax(np.random.default_rng(1).normal(size=(4, 3)), axis=1)
        loss, _ = ctc_loss(posteriors, [])
        assert loss == pytest.approx(-np.log(posteriors[:, 0]).sum(), abs=1e-12)

    def test_certain_path_has_zero_loss(self):
        posteriors = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        loss, _ = ctc_loss(posteriors, [1, 1])
        assert loss == pytest.approx(0.0, abs=1e-9)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            activations = rng.normal(size=(5, 4))
            label = [int(s) for s in rng.integers(1, 4, size=2)]
            _, grad = ctc_loss(softmax(activations, axis=1), label)
            numeric = np.zeros_like(activations)
            eps = 1e-6
            for t in range(5):
                for k in range(4):
                    bump = np.zeros_like(activations)
                    bump[t, k] = eps
                    plus, _ = ctc_loss(softmax(activations + bump, axis=1), label)
                    minus, _ = ctc_loss(softmax(activations - bump, axis=1), label)
                    numeric[t, k] = (plus - minus) / (2 * eps)
            np.testing.assert_allclose(grad, numeric, atol=1e-6)

    def test_gradient_rows_sum_to_zero(self):
        posteriors = softmax(np.random.default_rng(3).normal(size=(6, 5)), axis=1)
        _, grad = ctc_loss(posteriors, [1, 2, 2])
        np.testing.assert_allclose(grad.sum(axis=1), 0.0, atol=1e-9)

    def test_too_few_frames(self):
        posteriors = np.full((2, 3), 1 / 3)
        with pytest.raises(CTCError, match="needs at least 3 frames"):
            ctc_loss(posteriors, [1, 1])

    @pytest.mark.parametrize("label", [[0], [3], [-1]])
    def test_unknown_symbol(self, label):
        with pytest.raises(CTCError, match="unknown symbol"):
            ctc_loss(np.full((4, 3), 1 / 3), label)

    def test_bad_shape(self):
        with pytest.raises(CTCError):
            ctc_loss(np.ones(4), [1])


class TestMinFrames:
    @pytest.mark.parametrize("label,expected", [([], 0), ([1, 2], 2), ([1, 1], 3), ([2, 2, 2], 5)])
    def test_repeats_need_a_blank(self, label, expected):
        assert min_frames(label) == expected


class TestGreedyDecode:
    def test_collapse_then_drop_blanks(self):
        assert collapse([0, 1, 1, 0, 1, 2, 2, 0]) == [1, 1, 2]

    def test_argmax_path(self):
        posteriors = np.array([
            [0.1, 0.8, 0.1],
            [0.1, 0.7, 0.2],
            [0.9, 0.05, 0.05],
            [0.2, 0.1, 0.7],
        ])
        assert ctc_greedy_decode(posteriors) == [1, 2]

    def test_all_blank(self):
        assert ctc_greedy_decode(np.array([[1.0, 0.0], [1.0, 0.0]])) == []
