"""
Connectionist temporal classification: log-space forward-backward loss with its
exact gradient, and greedy best-path decoding.
"""
import numpy as np
from scipy.special import logsumexp

from ..utils.errors import CTCError
from .alphabet import BLANK_INDEX

PROBABILITY_FLOOR = 1e-12


def min_frames(label):
    """Frames needed to emit a label: its length plus one blank per adjacent repeat."""
    label = list(label)
    repeats = sum(1 for a, b in zip(label, label[1:]) if a == b)
    return len(label) + repeats


def _extended(label):
    """Blank-augmented label: blank, l1, blank, l2, ..., blank."""
    ext = np.full(2 * len(label) + 1, BLANK_INDEX, dtype=np.int64)
    ext[1::2] = label
    return ext


def _shift_right(values, n):
    out = np.full(len(values), -np.inf)
    if n < len(values):
        out[n:] = values[:len(values) - n]
    return out


def _shift_left(values, n):
    out = np.full(len(values), -np.inf)
    if n < len(values):
        out[:len(values) - n] = values[n:]
    return out


def _forward(log_probs, ext):
    T, S = log_probs.shape[0], len(ext)
    log_alpha = np.full((T, S), -np.inf)
    log_alpha[0, 0] = log_probs[0, ext[0]]
    if S > 1:
        log_alpha[0, 1] = log_probs[0, ext[1]]
    # skip transition allowed into a non-blank that differs from the symbol two back
    can_skip = np.zeros(S, dtype=bool)
    can_skip[2:] = (ext[2:] != BLANK_INDEX) & (ext[2:] != ext[:-2])
    for t in range(1, T):
        prev = log_alpha[t - 1]
        stay = prev
        step = _shift_right(prev, 1)
        skip = np.where(can_skip, _shift_right(prev, 2), -np.inf)
        log_alpha[t] = np.logaddexp(np.logaddexp(stay, step), skip) + log_probs[t, ext]
    return log_alpha, can_skip


def _backward(log_probs, ext, can_skip):
    T, S = log_probs.shape[0], len(ext)
    log_beta = np.full((T, S), -np.inf)
    log_beta[T - 1, S - 1] = log_probs[T - 1, ext[S - 1]]
    if S > 1:
        log_beta[T - 1, S - 2] = log_probs[T - 1, ext[S - 2]]
    # s may jump to s + 2 exactly when s + 2 may be entered by a skip
    skip_from = np.zeros(S, dtype=bool)
    skip_from[:-2] = can_skip[2:]
    for t in range(T - 2, -1, -1):
        nxt = log_beta[t + 1]
        stay = nxt
        step = _shift_left(nxt, 1)
        skip = np.where(skip_from, _shift_left(nxt, 2), -np.inf)
        log_beta[t] = np.logaddexp(np.logaddexp(stay, step), skip) + log_probs[t, ext]
    return log_beta


def ctc_loss(posteriors, label):
    """
    Negative log-likelihood of a label under per-frame posteriors.

    Args:
        posteriors: T x K matrix of softmax outputs (blank at column 0)
        label: Sequence of label indices in 1..K-1

    Returns:
        (loss, grad) where grad is the T x K gradient w.r.t. the pre-softmax activations
    """
    posteriors = np.asarray(posteriors, dtype=np.float64)
    if posteriors.ndim != 2 or posteriors.shape[0] < 1 or posteriors.shape[1] < 2:
        raise CTCError(f"posteriors must be a T x K matrix with K >= 2, got shape {posteriors.shape}")
    T, K = posteriors.shape
    label = np.asarray(list(label), dtype=np.int64)
    bad = [int(s) for s in label if not 0 < s < K]
    if bad:
        raise CTCError(f"unknown symbol index {bad[0]} for {K} output classes")
    needed = min_frames(label.tolist())
    if T < needed:
        raise CTCError(f"label of length {len(label)} needs at least {needed} frames, got {T}")

    probs = np.maximum(posteriors, PROBABILITY_FLOOR)
    log_probs = np.log(probs)
    ext = _extended(label)

    log_alpha, can_skip = _forward(log_probs, ext)
    log_beta = _backward(log_probs, ext, can_skip)
    log_likelihood = np.logaddexp(log_alpha[T - 1, -1], log_alpha[T - 1, -2]) if len(ext) > 1 \
        else log_alpha[T - 1, -1]

    # alpha and beta both include the emission at t; divide one out
    log_gamma = log_alpha + log_beta - log_probs[:, ext]
    occupancy = np.full((T, K), -np.inf)
    for k in np.unique(ext):
        occupancy[:, k] = logsumexp(log_gamma[:, ext == k], axis=1)
    grad = probs - np.exp(occupancy - log_likelihood)
    return max(0.0, float(-log_likelihood)), grad


def best_path(posteriors):
    """Per-frame argmax labels."""
    return np.argmax(np.asarray(posteriors), axis=1).tolist()


def collapse(path):
    """Merge consecutive repeats, then drop blanks."""
    out = []
    prev = None
    for index in path:
        if index != prev and index != BLANK_INDEX:
            out.append(int(index))
        prev = index
    return out


def ctc_greedy_decode(posteriors):
    """Best-path decoding: argmax per frame, collapse repeats, delete blanks."""
    return collapse(best_path(posteriors))
