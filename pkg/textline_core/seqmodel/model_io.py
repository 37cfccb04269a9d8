"""
PTXM1 model files.

Layout (all integers little-endian):

    b"PTXM1\\n"
    u32   header length in bytes
    bytes UTF-8 YAML header (sorted keys): kind, input_dim, hidden_units,
          output_dim, frame_height, alphabet (codepoints in order), seed,
          train_config, features, parameters (name and shape, in file order)
    f64[] every parameter array, row-major, in the header's order
"""
import struct
from pathlib import Path

import numpy as np
import torch
import yaml

from ..utils.errors import SequenceModelError
from ..utils.logger import get_logger
from .alphabet import Alphabet
from .sequence_model import SequenceModel, build_network

logger = get_logger(__name__)

MODEL_MAGIC = b"PTXM1\n"


def _plain(value):
    """Convert numpy scalars/containers into YAML-safe builtins."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def model_header(model):
    """Header mapping written before the parameter block."""
    return _plain({
        "kind": model.kind,
        "input_dim": model.input_dim,
        "hidden_units": model.hidden_units,
        "output_dim": model.output_dim,
        "frame_height": model.frame_height,
        "alphabet": model.alphabet.codepoints,
        "seed": model.seed,
        "train_config": model.metadata.get("train_config"),
        "features": model.metadata.get("features"),
        "parameters": [
            {"name": name, "shape": list(tensor.shape)}
            for name, tensor in model.network.state_dict().items()
        ],
    })


def save_model(model, path):
    """
    Write a model to a PTXM1 file.

    Args:
        model: SequenceModel
        path: Output file path

    Returns:
        Path written
    """
    path = Path(path)
    header = yaml.safe_dump(model_header(model), sort_keys=True, default_flow_style=False).encode("utf-8")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(MODEL_MAGIC)
        f.write(struct.pack("<I", len(header)))
        f.write(header)
        for tensor in model.network.state_dict().values():
            f.write(tensor.detach().cpu().numpy().astype("<f8").tobytes())
    logger.info(f"Model saved to {path} ({model.describe()})")
    return path


def load_model(path):
    """
    Read a PTXM1 file.

    Args:
        path: Model file path

    Returns:
        SequenceModel with the stored parameters and header metadata
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise SequenceModelError(f"{path}: unreadable model file ({e})") from e
    if not raw.startswith(MODEL_MAGIC):
        raise SequenceModelError(f"{path}: not a PTXM1 model file")

    offset = len(MODEL_MAGIC)
    if len(raw) < offset + 4:
        raise SequenceModelError(f"{path}: truncated before the header length")
    (header_len,) = struct.unpack("<I", raw[offset:offset + 4])
    offset += 4
    if len(raw) < offset + header_len:
        raise SequenceModelError(f"{path}: truncated header ({len(raw) - offset} of {header_len} bytes)")
    try:
        header = yaml.safe_load(raw[offset:offset + header_len].decode("utf-8"))
    except (UnicodeDecodeError, yaml.YAMLError) as e:
        raise SequenceModelError(f"{path}: corrupt model header ({e})") from e
    if not isinstance(header, dict):
        raise SequenceModelError(f"{path}: model header is not a mapping")
    offset += header_len

    try:
        alphabet = Alphabet.from_codepoints(header["alphabet"])
        network = build_network(header["kind"], header["input_dim"], header["hidden_units"],
                                alphabet.size, header.get("frame_height"))
        expected = [(entry["name"], tuple(entry["shape"])) for entry in header["parameters"]]
        seed = header["seed"]
    except KeyError as e:
        raise SequenceModelError(f"{path}: model header lacks {e}") from e
    except (TypeError, ValueError) as e:
        if isinstance(e, SequenceModelError):
            raise
        raise SequenceModelError(f"{path}: malformed model header ({e})") from e
    state = network.state_dict()
    actual = [(name, tuple(tensor.shape)) for name, tensor in state.items()]
    if expected != actual:
        raise SequenceModelError(f"{path}: parameter layout does not match a {header['kind']} network")

    loaded = {}
    for name, shape in expected:
        count = int(np.prod(shape)) if shape else 1
        end = offset + 8 * count
        if end > len(raw):
            raise SequenceModelError(f"{path}: truncated parameter block at {name}")
        values = np.frombuffer(raw[offset:end], dtype="<f8").reshape(shape).astype(np.float64)
        loaded[name] = torch.from_numpy(values)
        offset = end
    if offset != len(raw):
        raise SequenceModelError(f"{path}: {len(raw) - offset} trailing bytes after parameters")
    network.load_state_dict(loaded)
    network.eval()

    metadata = {key: header[key] for key in ("train_config", "features") if header.get(key) is not None}
    return SequenceModel(header["kind"], header["input_dim"], header["hidden_units"], alphabet,
                         seed, network, frame_height=header.get("frame_height"),
                         metadata=metadata)
