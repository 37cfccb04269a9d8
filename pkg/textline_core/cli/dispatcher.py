"""
Command-line entry: pyramid | featurize | synth | train | eval | recognize | sweep.

Exit codes: 0 success, 1 usage error, 2 data or IO error.
"""
import argparse
from pathlib import Path

from ..dataset.synth import synth_generate
from ..filters.features import featurize_image, write_feature_sequence
from ..pyramid.gaussian_pyramid import build_pyramid
from ..raster.raster_image import load_image, normalize_height, save_image
from ..seqmodel.recognizer_engine import RecognizerEngine
from ..utils.config_loader import resolve_run_config, write_resolved_config
from ..utils.errors import ConfigError, TextlineError, UsageError
from ..utils.logger import get_logger
from .experiments import run_evaluation, run_sweep, run_training

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class ArgumentParser(argparse.ArgumentParser):
    """argparse that raises UsageError instead of exiting."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_config(p):
    p.add_argument("--config", help="YAML config file (defaults to config/settings.yaml)")


def _add_pyramid_flags(p):
    p.add_argument("--levels", dest="max_levels", type=int, help="maximum pyramid levels (1-6)")
    p.add_argument("--min-height", dest="min_height", type=int, help="pyramid height floor")
    p.add_argument("--base-height", dest="base_height", type=int, help="rescale height before the pyramid")


def _add_feature_flags(p):
    _add_pyramid_flags(p)
    p.add_argument("--xheight", type=int, help="frame height in pixels")
    p.add_argument("--mode", dest="feature_mode", choices=["per_level", "whole"])
    p.add_argument("--workers", type=int, help="featurization threads")


def _add_training_flags(p):
    _add_feature_flags(p)
    p.add_argument("--manifest", help="TSV sample manifest")
    p.add_argument("--kind", dest="model_kind", choices=["blstm_1d", "mdlstm_2d"])
    p.add_argument("--hidden-units", dest="hidden_units", type=int)
    p.add_argument("--seeds", type=int, nargs="+")
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--momentum", type=float)
    p.add_argument("--max-epochs", dest="max_epochs", type=int)
    p.add_argument("--patience", type=int)
    p.add_argument("--split-seed", dest="split_seed", type=int)
    p.add_argument("--validate-on", dest="validate_on", choices=["validation", "train"],
                   help="train: fit every manifest line and score epochs on the training set")


def build_parser():
    parser = ArgumentParser(prog="run_textline.py", description="Pyramid-feature text-line recognizer")
    sub = parser.add_subparsers(dest="command", parser_class=ArgumentParser)
    sub.required = True

    p = sub.add_parser("pyramid", help="write every pyramid level of an image")
    _add_config(p)
    p.add_argument("--in", dest="inputs", nargs="+", help="input image(s)")
    p.add_argument("--out-dir", dest="out_dir")
    _add_pyramid_flags(p)

    p = sub.add_parser("featurize", help="write FSEQ1 feature sequences of an image")
    _add_config(p)
    p.add_argument("--in", dest="inputs", nargs="+", help="input image(s)")
    p.add_argument("--out-dir", dest="out_dir")
    _add_feature_flags(p)

    p = sub.add_parser("synth", help="generate a synthetic line corpus")
    _add_config(p)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--glyphs", dest="glyph_count", type=int)
    p.add_argument("--lines", dest="line_count", type=int)
    p.add_argument("--length", dest="line_length_range", type=int, nargs=2, metavar=("MIN", "MAX"))
    p.add_argument("--noise", dest="noise_level", type=float)
    p.add_argument("--seed", dest="synth_seed", type=int)

    p = sub.add_parser("train", help="train models per level and seed")
    _add_config(p)
    p.add_argument("--out-dir", dest="out_dir")
    _add_training_flags(p)

    p = sub.add_parser("eval", help="score trained models into the level table")
    _add_config(p)
    p.add_argument("--manifest")
    p.add_argument("--models", dest="model_dir", help="directory of trained models")
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--split-seed", dest="split_seed", type=int)
    p.add_argument("--workers", type=int)

    p = sub.add_parser("recognize", help="print the transcription of one image")
    p.add_argument("--model", required=True, help="PTXM1 model file")
    p.add_argument("--in", dest="image", required=True, help="input image")

    p = sub.add_parser("sweep", help="hidden-unit sweep on the base level")
    _add_config(p)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--units", dest="hidden_units_sweep", type=int, nargs="+")
    _add_training_flags(p)

    return parser


def _run_config(args):
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    if overrides.get("line_length_range") is not None:
        overrides["line_length_range"] = list(overrides["line_length_range"])
    return resolve_run_config(args.config, overrides)


def _require(run_config, *names):
    missing = [name for name in names if not getattr(run_config, name)]
    if missing:
        raise UsageError(f"missing required setting(s): {', '.join(missing)}")


def cmd_pyramid(run_config):
    _require(run_config, "inputs", "out_dir")
    out_dir = Path(run_config.out_dir)
    for source in run_config.inputs:
        img = load_image(source)
        if run_config.base_height is not None:
            img = normalize_height(img, run_config.base_height)
        pyr = build_pyramid(img, run_config.max_levels, run_config.min_height)
        ext = "pgm" if img.channels == 1 else "ppm"
        for k, level in enumerate(pyr):
            save_image(level, out_dir / f"{Path(source).stem}.L{k}.{ext}")
        logger.info(f"{source}: {pyr.level_count} levels written to {out_dir}")


def cmd_featurize(run_config):
    _require(run_config, "inputs", "out_dir")
    out_dir = Path(run_config.out_dir)
    for source in run_config.inputs:
        sequences = featurize_image(
            load_image(source),
            xheight=run_config.xheight,
            max_levels=run_config.max_levels,
            min_height=run_config.min_height,
            base_height=run_config.base_height,
            mode=run_config.feature_mode,
        )
        for seq in sequences:
            tag = "whole" if seq.level == "whole" else f"L{seq.level}"
            write_feature_sequence(seq, out_dir / f"{Path(source).stem}.{tag}.fseq")
        logger.info(f"{source}: {len(sequences)} feature sequences written to {out_dir}")


def cmd_synth(run_config):
    _require(run_config, "out_dir")
    synth_generate(
        run_config.glyph_count,
        run_config.line_count,
        tuple(run_config.line_length_range),
        run_config.noise_level,
        run_config.synth_seed,
        run_config.out_dir,
    )


def cmd_train(run_config):
    _require(run_config, "manifest", "out_dir")
    paths = run_training(run_config, run_config.out_dir)
    logger.info(f"Trained {len(paths)} models into {run_config.out_dir}")


def cmd_eval(run_config):
    _require(run_config, "manifest", "model_dir", "out_dir")
    run_evaluation(run_config, run_config.model_dir, run_config.out_dir)


def cmd_sweep(run_config):
    _require(run_config, "manifest", "out_dir")
    run_sweep(run_config, run_config.out_dir)


COMMANDS = {
    "pyramid": cmd_pyramid,
    "featurize": cmd_featurize,
    "synth": cmd_synth,
    "train": cmd_train,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
}


def dispatch(argv):
    """
    Run one subcommand.

    Args:
        argv: Arguments after the program name

    Returns:
        Exit code (0 success, 1 usage error, 2 data/IO error)
    """
    try:
        args = build_parser().parse_args(argv)
        if args.command == "recognize":
            print(RecognizerEngine(args.model).recognize(args.image))
            return EXIT_OK
        run_config = _run_config(args)
        command = COMMANDS[args.command]
        _require(run_config, "out_dir")
        write_resolved_config(run_config, run_config.out_dir)
        command(run_config)
        return EXIT_OK
    except SystemExit as e:
        # --help
        return e.code if isinstance(e.code, int) else EXIT_OK
    except (UsageError, ConfigError) as e:
        logger.error(f"Usage error: {e}")
        return EXIT_USAGE
    except (TextlineError, OSError) as e:
        logger.error(f"{type(e).__name__}: {e}", exc_info=True)
        return EXIT_DATA
