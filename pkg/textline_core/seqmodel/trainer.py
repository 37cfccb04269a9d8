"""
Online CTC training with momentum SGD, early stopping on validation label
error, and a finite-difference check of the analytic backward pass.
"""
import copy
from dataclasses import asdict, dataclass
from typing import List

import numpy as np
import torch

from ..eval.metrics import character_error_rate, sequence_accuracy
from ..utils.errors import SequenceModelError
from ..utils.logger import get_logger
from .ctc import ctc_greedy_decode, ctc_loss, min_frames
from .sequence_model import forward

logger = get_logger(__name__)


@dataclass
class TrainConfig:
    """Optimizer and stopping settings; recorded in every saved model header."""

    learning_rate: float = 1e-4
    momentum: float = 0.9
    max_epochs: int = 200
    patience: int = 20
    shuffle_seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise SequenceModelError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not 0 <= self.momentum < 1:
            raise SequenceModelError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.max_epochs < 1 or self.patience < 1:
            raise SequenceModelError("max_epochs and patience must be >= 1")

    def to_dict(self):
        return asdict(self)


@dataclass
class EpochRecord:
    epoch: int
    mean_loss: float
    validation_cer: float
    validation_sequence_accuracy: float


def _frames(seq):
    return getattr(seq, "frames", seq)


def _label_indices(model, label):
    if isinstance(label, str):
        return model.alphabet.encode(label)
    return [int(s) for s in label]


def prepare_samples(model, samples):
    """
    Validate (sequence, label) pairs against the model and encode labels.

    Raises SequenceModelError naming the first offending sample index.
    """
    prepared = []
    for index, (seq, label) in enumerate(samples):
        frames = np.asarray(_frames(seq))
        if frames.ndim != 2 or frames.shape[1] != model.input_dim:
            raise SequenceModelError(
                f"sample {index}: frame_dim {frames.shape[-1]} != model input_dim {model.input_dim}"
            )
        try:
            indices = _label_indices(model, label)
        except SequenceModelError as e:
            raise SequenceModelError(f"sample {index}: {e}") from e
        if any(not 0 < s < model.output_dim for s in indices):
            raise SequenceModelError(f"sample {index}: label index outside the alphabet")
        if frames.shape[0] < min_frames(indices):
            raise SequenceModelError(
                f"sample {index}: label needs {min_frames(indices)} frames, sequence has {frames.shape[0]}"
            )
        prepared.append((frames, indices))
    return prepared


def loss_and_backward(model, frames, label):
    """
    One forward/backward pass; parameter gradients accumulate into ``.grad``.

    Returns:
        CTC loss of the sample
    """
    activations = model.activations(frames)
    posteriors = torch.softmax(activations, dim=1).detach().numpy()
    loss, grad = ctc_loss(posteriors, label)
    activations.backward(torch.from_numpy(grad))
    return loss


def sample_loss(model, frames, label):
    """CTC loss of one sample without gradients."""
    return ctc_loss(forward(model, frames), label)[0]


def evaluate_samples(model, prepared):
    """Greedy-decode prepared samples; returns (CER, sequence accuracy)."""
    pairs = []
    for frames, label in prepared:
        hypothesis = ctc_greedy_decode(forward(model, frames))
        pairs.append((model.alphabet.decode(label), model.alphabet.decode(hypothesis)))
    return character_error_rate(pairs), sequence_accuracy(pairs)


def train(model, dataset, cfg=None, validation=None):
    """
    Per-sample momentum SGD through the full network and the CTC layer.

    Samples are shuffled every epoch with a generator seeded by
    ``cfg.shuffle_seed``. Training stops after ``max_epochs`` or when the
    validation CER has not improved for ``patience`` epochs; the returned
    model carries the best-validation parameters.

    Args:
        model: SequenceModel (left untouched; a copy is trained)
        dataset: List of (FeatureSequence, label) with label a str or index list
        cfg: TrainConfig
        validation: Optional list like ``dataset``; the training set is used if omitted

    Returns:
        (trained SequenceModel, list of EpochRecord)
    """
    cfg = cfg or TrainConfig()
    if not dataset:
        raise SequenceModelError("training set is empty")
    trained = copy.deepcopy(model)
    trained.metadata["train_config"] = cfg.to_dict()
    train_set = prepare_samples(trained, dataset)
    valid_set = prepare_samples(trained, validation) if validation else train_set

    network = trained.network
    network.train()
    optimizer = torch.optim.SGD(network.parameters(), lr=cfg.learning_rate, momentum=cfg.momentum)
    rng = np.random.default_rng(cfg.shuffle_seed)

    best_cer = float("inf")
    best_state = copy.deepcopy(network.state_dict())
    stale_epochs = 0
    history: List[EpochRecord] = []

    for epoch in range(1, cfg.max_epochs + 1):
        total_loss = 0.0
        for index in rng.permutation(len(train_set)):
            frames, label = train_set[index]
            optimizer.zero_grad()
            total_loss += loss_and_backward(trained, frames, label)
            optimizer.step()

        cer, seq_acc = evaluate_samples(trained, valid_set)
        record = EpochRecord(epoch, total_loss / len(train_set), cer, seq_acc)
        history.append(record)
        logger.info(
            f"Epoch {epoch}: loss {record.mean_loss:.4f}, "
            f"validation CER {cer:.4f}, sequence accuracy {seq_acc:.4f}"
        )

        if cer < best_cer:
            best_cer = cer
            best_state = copy.deepcopy(network.state_dict())
            stale_epochs = 0
        else:
            stale_epochs += 1
            if stale_epochs >= cfg.patience:
                logger.info(f"Early stop at epoch {epoch}: no improvement for {cfg.patience} epochs")
                break

    network.load_state_dict(best_state)
    network.eval()
    trained.metadata["best_validation_cer"] = best_cer
    return trained, history


GRADCHECK_MAX_HIDDEN = 8
GRADCHECK_MAX_INPUT = 20
GRADCHECK_MAX_FRAMES = 8


def gradient_check(model, sample, epsilon=1e-5):
    """
    Compare analytic parameter gradients with central finite differences.

    Args:
        model: Small SequenceModel (H <= 8, D <= 20)
        sample: (FeatureSequence, label) with T <= 8
        epsilon: Finite-difference step (> 0)

    Returns:
        Max over all parameters of |g_a - g_n| / max(|g_a|, |g_n|, 1e-8)
    """
    if not epsilon > 0:
        raise SequenceModelError(f"epsilon must be > 0, got {epsilon}")
    (frames, label), = prepare_samples(model, [sample])
    if (model.hidden_units > GRADCHECK_MAX_HIDDEN or model.input_dim > GRADCHECK_MAX_INPUT
            or frames.shape[0] > GRADCHECK_MAX_FRAMES):
        raise SequenceModelError(
            f"gradient check is limited to H <= {GRADCHECK_MAX_HIDDEN}, "
            f"D <= {GRADCHECK_MAX_INPUT}, T <= {GRADCHECK_MAX_FRAMES}"
        )

    checked = copy.deepcopy(model)
    network = checked.network
    network.zero_grad()
    loss_and_backward(checked, frames, label)

    worst = 0.0
    with torch.no_grad():
        for param in network.parameters():
            analytic = param.grad.detach().reshape(-1).numpy().copy()
            flat = param.data.view(-1)
            for j in range(flat.numel()):
                original = flat[j].item()
                flat[j] = original + epsilon
                loss_plus = sample_loss(checked, frames, label)
                flat[j] = original - epsilon
                loss_minus = sample_loss(checked, frames, label)
                flat[j] = original
                numeric = (loss_plus - loss_minus) / (2 * epsilon)
                denom = max(abs(analytic[j]), abs(numeric), 1e-8)
                worst = max(worst, abs(analytic[j] - numeric) / denom)
    return worst
