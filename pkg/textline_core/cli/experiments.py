"""
Experiment loops behind the CLI: per-level / whole-pyramid training over
seeds, test-set scoring into the level table, and the hidden-unit sweep.
"""
import csv
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, replace
from pathlib import Path

from ..dataset.manifest import load_corpus
from ..eval.metrics import accuracy_percent, precision_recall_f, sequence_accuracy
from ..eval.report import LevelResult, report_levels, report_sweep
from ..filters.features import featurize_image
from ..seqmodel.ctc import ctc_greedy_decode
from ..seqmodel.model_io import load_model, save_model
from ..seqmodel.sequence_model import forward, init_model
from ..seqmodel.trainer import TrainConfig, train
from ..utils.errors import DatasetError, TextlineError
from ..utils.logger import get_logger

logger = get_logger(__name__)

LEVELS_REPORT_NAME = "levels.csv"
SWEEP_REPORT_NAME = "sweep.csv"
MODEL_SUFFIX = ".ptxm"
MODEL_NAME_PATTERN = re.compile(r"^model\.(L(?P<level>\d+)|whole)\.s(?P<seed>-?\d+)\.ptxm$")
LOG_COLUMNS = ["epoch", "mean_loss", "validation_cer", "validation_sequence_accuracy"]


def train_config_from(run_config):
    return TrainConfig(
        learning_rate=run_config.learning_rate,
        momentum=run_config.momentum,
        max_epochs=run_config.max_epochs,
        patience=run_config.patience,
        shuffle_seed=run_config.shuffle_seed,
    )


def feature_settings(run_config, level):
    """Settings recorded in a model header so recognition featurizes identically."""
    return {
        "level": level,
        "xheight": run_config.xheight,
        "max_levels": run_config.max_levels,
        "min_height": run_config.min_height,
        "base_height": run_config.base_height,
    }


def model_name(level, seed):
    tag = "whole" if level == "whole" else f"L{level}"
    return f"model.{tag}.s{seed}{MODEL_SUFFIX}"


def _featurize_one(sample, run_config, mode):
    try:
        return featurize_image(
            sample.load(),
            xheight=run_config.xheight,
            max_levels=run_config.max_levels,
            min_height=run_config.min_height,
            base_height=run_config.base_height,
            mode=mode,
        )
    except TextlineError as e:
        raise DatasetError(f"{sample.image_path}: {e}") from e


def featurize_samples(samples, run_config, mode=None):
    """
    Featurize every sample's image, in parallel over ``run_config.workers`` threads.

    Returns:
        List (one entry per sample, input order) of FeatureSequence lists
    """
    mode = mode or run_config.feature_mode
    with ThreadPoolExecutor(max_workers=run_config.workers) as pool:
        features = list(pool.map(lambda s: _featurize_one(s, run_config, mode), samples))
    logger.info(f"Featurized {len(samples)} images ({mode}, {run_config.workers} workers)")
    return features


def shared_levels(features, mode, samples=None):
    """
    Level keys every featurized sample provides.

    In whole mode every sample must reach the same pyramid depth, since the
    depth fixes the frame dimension; set ``base_height`` for mixed-height lines.
    """
    if mode == "whole":
        dims = [seqs[0].frame_dim for seqs in features]
        for index, dim in enumerate(dims):
            if dim != dims[0]:
                name = samples[index].image_path if samples else f"sample {index}"
                raise DatasetError(
                    f"{name}: whole-pyramid frame_dim {dim} differs from {dims[0]}; "
                    f"pyramid depths differ, set base_height to rescale every line"
                )
        return ["whole"]
    counts = {len(seqs) for seqs in features}
    if len(counts) > 1:
        logger.warning(f"Samples yield different pyramid depths {sorted(counts)}; using the shallowest")
    return list(range(min(counts)))


def training_subsets(corpus, run_config):
    """
    (train, validation) samples for a run.

    ``validate_on: train`` trains on every manifest sample and leaves the
    validation list empty, so ``train`` scores each epoch on the training set.
    """
    if run_config.validate_on == "train":
        return list(corpus.samples), []
    return corpus.subset("train"), corpus.subset("validation")


def level_sequences(features, level):
    return [seqs[0] if level == "whole" else seqs[level] for seqs in features]


def write_training_log(history, path):
    """Per-epoch training log CSV."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(LOG_COLUMNS)
        for record in history:
            row = asdict(record)
            writer.writerow([row["epoch"], f"{row['mean_loss']:.6f}",
                             f"{row['validation_cer']:.6f}", f"{row['validation_sequence_accuracy']:.6f}"])
    return path


def train_one(run_config, alphabet, train_seqs, train_labels, valid_seqs, valid_labels,
              level, seed, hidden_units=None):
    """Initialize and train one model for one level and seed."""
    first = train_seqs[0]
    model = init_model(
        run_config.model_kind,
        first.frame_dim,
        hidden_units or run_config.hidden_units,
        alphabet,
        seed,
        frame_height=first.frame_height,
    )
    model.metadata["features"] = feature_settings(run_config, level)
    logger.info(f"Training level {level}, seed {seed}: {model.describe()}")
    validation = list(zip(valid_seqs, valid_labels)) or None
    return train(model, list(zip(train_seqs, train_labels)), train_config_from(run_config), validation)


def run_training(run_config, out_dir):
    """
    Train one model per seed, per pyramid level (or once on the whole pyramid).

    Writes ``model.L<k>.s<seed>.ptxm`` / ``model.whole.s<seed>.ptxm`` and a
    ``.log.csv`` next to each.

    Returns:
        List of model paths
    """
    out_dir = Path(out_dir)
    corpus = load_corpus(run_config.manifest, run_config.split_ratios, run_config.split_seed)
    train_samples, valid_samples = training_subsets(corpus, run_config)
    train_features = featurize_samples(train_samples, run_config)
    valid_features = featurize_samples(valid_samples, run_config) if valid_samples else []
    train_labels = [s.transcription for s in train_samples]
    valid_labels = [s.transcription for s in valid_samples]

    written = []
    for level in shared_levels(train_features, run_config.feature_mode, train_samples):
        valid_seqs = []
        if valid_features and all(level == "whole" or level < len(seqs) for seqs in valid_features):
            valid_seqs = level_sequences(valid_features, level)
        for seed in run_config.seeds:
            trained, history = train_one(
                run_config, corpus.alphabet,
                level_sequences(train_features, level), train_labels,
                valid_seqs, valid_labels if valid_seqs else [],
                level, seed,
            )
            path = save_model(trained, out_dir / model_name(level, seed))
            write_training_log(history, path.with_suffix(".log.csv"))
            written.append(path)
    return written


def score(model, sequences, references):
    """
    Greedy-decode sequences and score them against reference transcriptions.

    Returns:
        (accuracy percent, precision, recall, sequence accuracy)
    """
    pairs = []
    for seq, reference in zip(sequences, references):
        hypothesis = model.alphabet.decode(ctc_greedy_decode(forward(model, seq)))
        pairs.append((reference, hypothesis))
    precision, recall, _ = precision_recall_f(pairs)
    return accuracy_percent(pairs), precision, recall, sequence_accuracy(pairs)


def find_models(model_dir):
    """Model files in a training output directory as (level, seed, path), sorted."""
    found = []
    for path in sorted(Path(model_dir).glob(f"model.*{MODEL_SUFFIX}")):
        match = MODEL_NAME_PATTERN.match(path.name)
        if not match:
            continue
        level = int(match["level"]) if match["level"] is not None else "whole"
        found.append((level, int(match["seed"]), path))
    if not found:
        raise DatasetError(f"{model_dir}: no model files found")
    return found


def run_evaluation(run_config, model_dir, out_dir):
    """
    Score every trained model on the test split and write the level table.

    Returns:
        List of LevelReport
    """
    corpus = load_corpus(run_config.manifest, run_config.split_ratios, run_config.split_seed)
    test_samples = corpus.subset("test")
    if not test_samples:
        raise DatasetError("test split is empty")
    references = [s.transcription for s in test_samples]

    cache = {}
    results = {}
    for level, seed, path in find_models(model_dir):
        model = load_model(path)
        features = {**feature_settings(run_config, level), **(model.metadata.get("features") or {})}
        mode = "whole" if level == "whole" else "per_level"
        key = (features["xheight"], features["max_levels"], features["min_height"], features["base_height"], mode)
        if key not in cache:
            settings = replace(run_config, xheight=features["xheight"], max_levels=features["max_levels"],
                               min_height=features["min_height"], base_height=features["base_height"])
            cache[key] = featurize_samples(test_samples, settings, mode)
        test_features = cache[key]
        if level != "whole" and any(level >= len(seqs) for seqs in test_features):
            raise DatasetError(f"{path.name}: some test images yield fewer than {level + 1} pyramid levels")

        accuracy, precision, recall, seq_acc = score(model, level_sequences(test_features, level), references)
        logger.info(f"{path.name}: accuracy {accuracy:.2f}, P {precision:.3f}, R {recall:.3f}")
        result = results.setdefault(level, LevelResult(level))
        result.accuracies.append(accuracy)
        result.precisions.append(precision)
        result.recalls.append(recall)
        result.sequence_accuracies.append(seq_acc)

    return report_levels(list(results.values()), Path(out_dir) / LEVELS_REPORT_NAME)


def run_sweep(run_config, out_dir):
    """
    Train one model per hidden-unit count and seed, score each on the test
    split, and write the sweep table.

    The level is the base level in per_level mode, or the whole pyramid.

    Returns:
        List of (hidden_units, mean, std) rows
    """
    corpus = load_corpus(run_config.manifest, run_config.split_ratios, run_config.split_seed)
    train_samples, valid_samples = training_subsets(corpus, run_config)
    test_samples = corpus.subset("test")
    if not test_samples:
        raise DatasetError("test split is empty")

    level = "whole" if run_config.feature_mode == "whole" else 0
    train_features = featurize_samples(train_samples, run_config)
    shared_levels(train_features, run_config.feature_mode, train_samples)
    train_seqs = level_sequences(train_features, level)
    valid_seqs = level_sequences(featurize_samples(valid_samples, run_config), level) if valid_samples else []
    test_seqs = level_sequences(featurize_samples(test_samples, run_config), level)
    train_labels = [s.transcription for s in train_samples]
    valid_labels = [s.transcription for s in valid_samples]
    references = [s.transcription for s in test_samples]

    sweep = {}
    for units in run_config.hidden_units_sweep:
        for seed in run_config.seeds:
            trained, _ = train_one(run_config, corpus.alphabet, train_seqs, train_labels,
                                   valid_seqs, valid_labels, level, seed, hidden_units=units)
            accuracy, _, _, _ = score(trained, test_seqs, references)
            logger.info(f"Sweep {units} units, seed {seed}: accuracy {accuracy:.2f}")
            sweep.setdefault(units, []).append(accuracy)

    return report_sweep(sweep, Path(out_dir) / SWEEP_REPORT_NAME)
