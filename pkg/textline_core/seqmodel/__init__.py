"""Recurrent sequence recognizer with CTC output."""
from .alphabet import BLANK_INDEX, Alphabet
from .ctc import ctc_greedy_decode, ctc_loss
from .model_io import load_model, save_model
from .recognizer_engine import RecognizerEngine
from .sequence_model import MODEL_KINDS, SequenceModel, forward, init_model
from .trainer import EpochRecord, TrainConfig, gradient_check, train

__all__ = [
    "BLANK_INDEX",
    "MODEL_KINDS",
    "Alphabet",
    "EpochRecord",
    "RecognizerEngine",
    "SequenceModel",
    "TrainConfig",
    "ctc_greedy_decode",
    "ctc_loss",
    "forward",
    "gradient_check",
    "init_model",
    "load_model",
    "save_model",
    "train",
]
