"""
SequenceModel: a recurrent backbone bound to its alphabet and construction settings.
"""
import numpy as np
import torch

from ..utils.errors import SequenceModelError
from .alphabet import Alphabet
from .networks import BLSTMNetwork, MDLSTMNetwork

MODEL_KINDS = ("blstm_1d", "mdlstm_2d")
INIT_RANGE = 0.1
FORGET_BIAS = 1.0


class SequenceModel:
    """
    Trainable recognizer with CTC output over ``alphabet``.

    ``metadata`` carries provenance written into the model file header
    (training config, feature settings); it does not affect computation.
    """

    def __init__(self, kind, input_dim, hidden_units, alphabet, seed, network,
                 frame_height=None, metadata=None):
        self.kind = kind
        self.input_dim = input_dim
        self.hidden_units = hidden_units
        self.alphabet = alphabet
        self.seed = seed
        self.network = network
        self.frame_height = frame_height
        self.metadata = dict(metadata or {})

    @property
    def output_dim(self):
        return self.alphabet.size

    def named_parameters(self):
        return list(self.network.named_parameters())

    def parameter_count(self):
        return sum(p.numel() for p in self.network.parameters())

    def activations(self, frames):
        """Pre-softmax (T, output_dim) tensor for a (T, D) frame array."""
        frames = np.array(frames, dtype=np.float64)
        if frames.ndim != 2 or frames.shape[1] != self.input_dim:
            raise SequenceModelError(
                f"frames of shape {frames.shape} do not match model input_dim {self.input_dim}"
            )
        return self.network(torch.from_numpy(frames))

    def describe(self):
        return (f"{self.kind} D={self.input_dim} H={self.hidden_units} "
                f"K={self.output_dim} params={self.parameter_count()}")


def build_network(kind, input_dim, hidden_units, output_dim, frame_height=None):
    """Construct the backbone for a model kind."""
    if kind == "blstm_1d":
        return BLSTMNetwork(input_dim, hidden_units, output_dim)
    if kind == "mdlstm_2d":
        if frame_height is None or frame_height < 1 or input_dim % frame_height != 0:
            raise SequenceModelError(
                f"mdlstm_2d needs a frame_height dividing input_dim {input_dim}, got {frame_height}"
            )
        return MDLSTMNetwork(input_dim, hidden_units, output_dim, frame_height)
    raise SequenceModelError(f"model kind must be one of {MODEL_KINDS}, got {kind!r}")


def init_model(kind, input_dim, hidden_units, alphabet, seed, frame_height=None):
    """
    Create a model with seeded uniform weights.

    Weights are drawn from U[-0.1, 0.1], biases start at zero and forget-gate
    biases at +1.0.

    Args:
        kind: "blstm_1d" or "mdlstm_2d"
        input_dim: Frame dimension D
        hidden_units: Units per direction H
        alphabet: Alphabet (output_dim = alphabet.size)
        seed: Initialization seed
        frame_height: Rows per frame (required for mdlstm_2d)

    Returns:
        SequenceModel
    """
    if input_dim < 1 or hidden_units < 1:
        raise SequenceModelError(f"input_dim and hidden_units must be >= 1, got {input_dim}, {hidden_units}")
    if not isinstance(alphabet, Alphabet):
        raise SequenceModelError("alphabet must be an Alphabet")

    network = build_network(kind, input_dim, hidden_units, alphabet.size, frame_height)
    generator = torch.Generator().manual_seed(int(seed))
    params = dict(network.named_parameters())
    with torch.no_grad():
        for name, param in params.items():
            if "bias" in name:
                param.zero_()
            else:
                param.copy_(torch.rand(param.shape, generator=generator, dtype=torch.float64)
                            * (2 * INIT_RANGE) - INIT_RANGE)
        for name, gate_slice in network.forget_bias_slices():
            params[name][gate_slice] = FORGET_BIAS

    return SequenceModel(kind, input_dim, hidden_units, alphabet, seed, network,
                         frame_height=frame_height)


def forward(model, seq):
    """
    Per-frame posteriors of a feature sequence.

    Args:
        model: SequenceModel
        seq: FeatureSequence (or a (T, D) array)

    Returns:
        (T, output_dim) numpy array; every row sums to 1
    """
    frames = getattr(seq, "frames", seq)
    with torch.no_grad():
        activations = model.activations(frames)
        return torch.softmax(activations, dim=1).numpy()
