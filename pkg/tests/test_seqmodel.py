"""Alphabet, recurrent networks, training, gradient checks and model files."""
import struct

import numpy as np
import pytest
import torch

from textline_core.filters import FeatureSequence, featurize_image
from textline_core.raster import RasterImage, save_image
from textline_core.seqmodel import (
    BLANK_INDEX,
    Alphabet,
    RecognizerEngine,
    TrainConfig,
    ctc_greedy_decode,
    forward,
    gradient_check,
    init_model,
    load_model,
    save_model,
    train,
)
from textline_core.seqmodel.model_io import MODEL_MAGIC
from textline_core.seqmodel.trainer import loss_and_backward, prepare_samples
from textline_core.utils.errors import SequenceModelError

ALPHABET = Alphabet(("a", "b"))

# central differences at the default step carry a few 1e-11 of absolute rounding error
GRADIENT_FLOOR = 1e-6


def _sequence(frames_count, channels, frame_height, seed=0):
    frames = np.random.default_rng(seed).normal(size=(frames_count, channels * frame_height))
    return FeatureSequence(frames, channels=channels, frame_height=frame_height)


def _model(kind, seed=0, hidden_units=4, channels=2, frame_height=3, alphabet=ALPHABET):
    return init_model(kind, channels * frame_height, hidden_units, alphabet, seed, frame_height=frame_height)


def _widen(model, seed, spread=0.5):
    """Redraw every parameter from U[-spread, spread]."""
    generator = torch.Generator().manual_seed(seed + 1000)
    with torch.no_grad():
        for param in model.network.parameters():
            param.copy_(torch.rand(param.shape, generator=generator, dtype=torch.float64) * 2 * spread - spread)
    return model


def _checkable(kind, seed, attempts=1000):
    """
    Toy model and sample whose nonzero analytic gradients all exceed GRADIENT_FLOOR.

    Parameters are redrawn (deterministically) until no gradient sits near the
    finite-difference rounding level.
    """
    sample = (_sequence(5, 1, 2, seed=seed), "ab")
    for attempt in range(attempts):
        model = _widen(_model(kind, seed=seed, hidden_units=4, channels=1, frame_height=2), seed * attempts + attempt)
        (frames, label), = prepare_samples(model, [sample])
        model.network.zero_grad()
        loss_and_backward(model, frames, label)
        grads = torch.cat([p.grad.reshape(-1) for p in model.network.parameters()]).abs()
        if bool(((grads == 0) | (grads >= GRADIENT_FLOOR)).all()):
            model.network.zero_grad()
            return model, sample
    raise AssertionError(f"no {kind} draw for seed {seed} clears the gradient floor in {attempts} attempts")


def _naive_scan(scan, volume):
    """Cell-by-cell 2-D LSTM from the top-left corner, summed over height."""
    height, width, _ = volume.shape
    units = scan.hidden_units
    zero = torch.zeros(units, dtype=torch.float64)
    hidden, cell = {}, {}
    out = torch.zeros((width, units), dtype=torch.float64)
    for y in range(height):
        for x in range(width):
            h_up, c_up = hidden.get((y - 1, x), zero), cell.get((y - 1, x), zero)
            h_left, c_left = hidden.get((y, x - 1), zero), cell.get((y, x - 1), zero)
            gates = scan.input_proj(volume[y, x]) + scan.recur_up(h_up) + scan.recur_left(h_left)
            i_gate, f_up, f_left, o_gate = torch.sigmoid(gates[:4 * units]).chunk(4)
            c = i_gate * torch.tanh(gates[4 * units:]) + f_up * c_up + f_left * c_left
            hidden[(y, x)] = o_gate * torch.tanh(c)
            cell[(y, x)] = c
            out[x] += hidden[(y, x)]
    return out


class TestAlphabet:
    def test_blank_reserved(self):
        assert BLANK_INDEX == 0
        assert ALPHABET.size == 3
        assert ALPHABET.encode("ba") == [2, 1]

    def test_decode_skips_blank(self):
        assert ALPHABET.decode([0, 1, 0, 2]) == "ab"

    def test_unknown_symbol(self):
        with pytest.raises(SequenceModelError, match="not in alphabet"):
            ALPHABET.encode("abc")

    def test_duplicate_symbols(self):
        with pytest.raises(SequenceModelError, match="unique"):
            Alphabet(("a", "a"))

    def test_codepoints_round_trip(self):
        alphabet = Alphabet.from_codepoints([0xE000, 0xE001])
        assert alphabet.codepoints == [0xE000, 0xE001]
        assert chr(0xE000) in alphabet


class TestInitModel:
    @pytest.mark.parametrize("kind", ["blstm_1d", "mdlstm_2d"])
    def test_seeded_determinism(self, kind):
        a, b, c = _model(kind, seed=5), _model(kind, seed=5), _model(kind, seed=6)
        for (_, pa), (_, pb), (_, pc) in zip(a.named_parameters(), b.named_parameters(), c.named_parameters()):
            assert torch.equal(pa, pb)
        assert any(not torch.equal(pa, pc) for (_, pa), (_, pc) in zip(a.named_parameters(), c.named_parameters()))

    @pytest.mark.parametrize("kind", ["blstm_1d", "mdlstm_2d"])
    def test_initial_ranges(self, kind):
        model = _model(kind, hidden_units=5)
        forget = {name: s for name, s in model.network.forget_bias_slices()}
        for name, param in model.named_parameters():
            values = param.detach().numpy()
            if "bias" in name:
                expected = np.zeros_like(values)
                if name in forget:
                    expected[forget[name]] = 1.0
                np.testing.assert_array_equal(values, expected)
            else:
                assert np.all(np.abs(values) <= 0.1)

    def test_mdlstm_needs_frame_height(self):
        with pytest.raises(SequenceModelError, match="frame_height"):
            init_model("mdlstm_2d", 7, 4, ALPHABET, 0, frame_height=3)

    def test_unknown_kind(self):
        with pytest.raises(SequenceModelError, match="model kind"):
            init_model("gru", 6, 4, ALPHABET, 0)


class TestForward:
    @pytest.mark.parametrize("kind", ["blstm_1d", "mdlstm_2d"])
    def test_rows_are_distributions(self, kind):
        model = _model(kind)
        posteriors = forward(model, _sequence(7, 2, 3))
        assert posteriors.shape == (7, 3)
        np.testing.assert_allclose(posteriors.sum(axis=1), 1.0, atol=1e-9)
        assert np.all(posteriors > 0)

    def test_dimension_mismatch(self):
        with pytest.raises(SequenceModelError, match="input_dim"):
            forward(_model("blstm_1d"), np.zeros((4, 5)))

    def test_diagonal_scan_matches_cell_loop(self):
        model = _widen(_model("mdlstm_2d", channels=2, frame_height=4), seed=0)
        scan = model.network.scans[0]
        volume = torch.from_numpy(np.random.default_rng(1).normal(size=(4, 6, 2)))
        with torch.no_grad():
            torch.testing.assert_close(scan(volume), _naive_scan(scan, volume), atol=1e-12, rtol=0)

    @pytest.mark.parametrize("kind", ["blstm_1d", "mdlstm_2d"])
    def test_zero_projection_is_uniform(self, kind):
        model = _widen(_model(kind), seed=2)
        with torch.no_grad():
            for name, param in model.network.named_parameters():
                if name.startswith(("proj", "output_bias")):
                    param.zero_()
        np.testing.assert_allclose(forward(model, _sequence(6, 2, 3)), 1 / 3, atol=1e-15)

    def test_blstm_direction_symmetry(self):
        model = _widen(_model("blstm_1d"), seed=3)
        mirrored = _model("blstm_1d")
        source = dict(model.network.named_parameters())
        swap = {"proj_forward.weight": "proj_backward.weight", "proj_backward.weight": "proj_forward.weight"}
        for base in ("weight_ih_l0", "weight_hh_l0", "bias_ih_l0", "bias_hh_l0"):
            swap[f"lstm.{base}"] = f"lstm.{base}_reverse"
            swap[f"lstm.{base}_reverse"] = f"lstm.{base}"
        with torch.no_grad():
            for name, param in mirrored.network.named_parameters():
                param.copy_(source[swap.get(name, name)])
        seq = _sequence(7, 2, 3, seed=4)
        reversed_frames = seq.frames[::-1].copy()
        np.testing.assert_allclose(forward(mirrored, reversed_frames), forward(model, seq)[::-1], atol=1e-12)

    def test_mdlstm_column_count_follows_frames(self):
        model = _model("mdlstm_2d", channels=1, frame_height=5)
        assert forward(model, _sequence(9, 1, 5)).shape == (9, 3)


class TestGradientCheck:
    @pytest.mark.parametrize("kind", ["blstm_1d", "mdlstm_2d"])
    @pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
    def test_analytic_matches_finite_differences(self, kind, seed):
        model, sample = _checkable(kind, seed)
        assert gradient_check(model, sample) < 1e-4

    def test_zero_epsilon(self):
        with pytest.raises(SequenceModelError, match="epsilon"):
            gradient_check(_model("blstm_1d"), (_sequence(4, 2, 3), "a"), epsilon=0.0)

    def test_limited_to_small_models(self):
        model = _model("blstm_1d", hidden_units=16)
        with pytest.raises(SequenceModelError, match="limited"):
            gradient_check(model, (_sequence(4, 2, 3), "a"))


class TestTrain:
    DATA = [(_sequence(8, 2, 3, seed=10), "ab"), (_sequence(8, 2, 3, seed=11), "ba")]

    def test_loss_decreases(self):
        model = _model("blstm_1d", hidden_units=8)
        _, history = train(model, self.DATA, TrainConfig(learning_rate=1e-2, max_epochs=30, patience=30))
        assert history[-1].mean_loss < history[0].mean_loss

    def test_original_untouched_and_config_recorded(self):
        model = _model("blstm_1d")
        before = [p.clone() for p in model.network.parameters()]
        trained, history = train(model, self.DATA, TrainConfig(max_epochs=2))
        assert all(torch.equal(a, b) for a, b in zip(before, model.network.parameters()))
        assert trained.metadata["train_config"]["max_epochs"] == 2
        assert [r.epoch for r in history] == [1, 2]

    def test_deterministic(self):
        cfg = TrainConfig(learning_rate=1e-2, max_epochs=3, patience=3)
        a, _ = train(_model("mdlstm_2d"), self.DATA, cfg)
        b, _ = train(_model("mdlstm_2d"), self.DATA, cfg)
        for (_, pa), (_, pb) in zip(a.named_parameters(), b.named_parameters()):
            assert torch.equal(pa, pb)

    def test_early_stop(self):
        _, history = train(_model("blstm_1d"), self.DATA, TrainConfig(learning_rate=1e-12, max_epochs=50, patience=2))
        assert len(history) < 50

    def test_bad_sample_is_named(self):
        data = [self.DATA[0], (_sequence(8, 1, 3), "a")]
        with pytest.raises(SequenceModelError, match="sample 1"):
            train(_model("blstm_1d"), data)

    def test_label_longer_than_sequence(self):
        with pytest.raises(SequenceModelError, match="frames"):
            train(_model("blstm_1d"), [(_sequence(2, 2, 3), "aab")])

    def test_bad_config(self):
        with pytest.raises(SequenceModelError):
            TrainConfig(momentum=1.0)


class TestModelFile:
    @pytest.mark.parametrize("kind", ["blstm_1d", "mdlstm_2d"])
    def test_load_reproduces_forward(self, tmp_path, kind):
        model = _model(kind, seed=3)
        model.metadata["features"] = {"level": 0, "xheight": 3}
        back = load_model(save_model(model, tmp_path / "m.ptxm"))
        assert back.kind == kind
        assert back.alphabet == model.alphabet
        assert back.metadata["features"] == {"level": 0, "xheight": 3}
        seq = _sequence(6, 2, 3)
        np.testing.assert_array_equal(forward(back, seq), forward(model, seq))

    def test_header_layout(self, tmp_path):
        raw = save_model(_model("blstm_1d"), tmp_path / "m.ptxm").read_bytes()
        assert raw.startswith(MODEL_MAGIC)

    def test_byte_identical_saves(self, tmp_path):
        a = save_model(_model("mdlstm_2d", seed=9), tmp_path / "a.ptxm").read_bytes()
        b = save_model(_model("mdlstm_2d", seed=9), tmp_path / "b.ptxm").read_bytes()
        assert a == b

    def test_truncated(self, tmp_path):
        path = save_model(_model("blstm_1d"), tmp_path / "m.ptxm")
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(SequenceModelError, match="truncated"):
            load_model(path)

    def test_trailing_bytes(self, tmp_path):
        path = save_model(_model("blstm_1d"), tmp_path / "m.ptxm")
        path.write_bytes(path.read_bytes() + b"\x00")
        with pytest.raises(SequenceModelError, match="trailing"):
            load_model(path)

    def test_missing_header_length(self, tmp_path):
        path = tmp_path / "m.ptxm"
        path.write_bytes(MODEL_MAGIC + b"\x01")
        with pytest.raises(SequenceModelError, match="truncated"):
            load_model(path)

    def test_header_longer_than_file(self, tmp_path):
        path = tmp_path / "m.ptxm"
        path.write_bytes(MODEL_MAGIC + struct.pack("<I", 500) + b"kind: blstm_1d\n")
        with pytest.raises(SequenceModelError, match="truncated header"):
            load_model(path)

    def test_header_missing_field(self, tmp_path):
        header = b"kind: blstm_1d\n"
        path = tmp_path / "m.ptxm"
        path.write_bytes(MODEL_MAGIC + struct.pack("<I", len(header)) + header)
        with pytest.raises(SequenceModelError, match="lacks 'alphabet'"):
            load_model(path)

    def test_header_wrong_field_type(self, tmp_path):
        header = b"alphabet: 7\nkind: blstm_1d\n"
        path = tmp_path / "m.ptxm"
        path.write_bytes(MODEL_MAGIC + struct.pack("<I", len(header)) + header)
        with pytest.raises(SequenceModelError, match="malformed"):
            load_model(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "m.ptxm"
        path.write_bytes(b"NOPE")
        with pytest.raises(SequenceModelError, match="PTXM1"):
            load_model(path)


class TestRecognizerEngine:
    FEATURES = {"level": 0, "xheight": 4, "max_levels": 1, "min_height": 2, "base_height": None}

    def _saved(self, tmp_path, features):
        model = init_model("blstm_1d", 7 * 4, 3, ALPHABET, 0)
        model.metadata["features"] = features
        return model, save_model(model, tmp_path / "m.ptxm")

    def test_recognize_uses_recorded_features(self, tmp_path):
        model, path = self._saved(tmp_path, self.FEATURES)
        img = RasterImage(np.random.default_rng(0).random((8, 20)))
        image_path = save_image(img, tmp_path / "line.pgm")
        engine = RecognizerEngine(path)

        quantized = RasterImage(np.round(img.pixels * 255) / 255)
        (seq,) = featurize_image(quantized, xheight=4, max_levels=1, min_height=2)
        expected = ALPHABET.decode(ctc_greedy_decode(forward(model, seq)))
        assert engine.recognize(image_path) == expected
        assert engine.recognize(quantized) == expected

    def test_missing_level(self, tmp_path):
        _, path = self._saved(tmp_path, dict(self.FEATURES, level=3))
        with pytest.raises(SequenceModelError, match="pyramid levels"):
            RecognizerEngine(path).recognize(RasterImage(np.zeros((8, 20))))
