from ..filters.features import featurize_image
from ..raster.raster_image import RasterImage, load_image
from ..utils.errors import SequenceModelError
from ..utils.logger import get_logger
from .ctc import ctc_greedy_decode
from .model_io import load_model
from .sequence_model import forward

logger = get_logger(__name__)

DEFAULT_FEATURES = {
    "level": 0,
    "xheight": 60,
    "max_levels": 6,
    "min_height": 30,
    "base_height": None,
}


class RecognizerEngine:
    def __init__(self, model_path):
        """
        Load a trained model for line recognition.

        The feature settings recorded in the model header (pyramid level or
        "whole", x-height, pyramid limits) are reused so inputs are featurized
        exactly as the training data was.

        Args:
            model_path: PTXM1 model file
        """
        self.model = load_model(model_path)
        self.model.network.eval()
        self.features = {**DEFAULT_FEATURES, **(self.model.metadata.get("features") or {})}
        logger.info(f"Recognizer loaded from {model_path}: {self.model.describe()}, features {self.features}")

    def sequence_for(self, img):
        """Feature sequence of an image at the model's pyramid level."""
        level = self.features["level"]
        mode = "whole" if level == "whole" else "per_level"
        sequences = featurize_image(
            img,
            xheight=self.features["xheight"],
            max_levels=self.features["max_levels"],
            min_height=self.features["min_height"],
            base_height=self.features["base_height"],
            mode=mode,
        )
        if mode == "whole":
            return sequences[0]
        if level >= len(sequences):
            raise SequenceModelError(
                f"image yields {len(sequences)} pyramid levels, model expects level {level}"
            )
        return sequences[level]

    def recognize(self, image):
        """
        Transcribe one text-line image.

        Args:
            image: RasterImage or image file path

        Returns:
            Decoded transcription string
        """
        img = image if isinstance(image, RasterImage) else load_image(image)
        posteriors = forward(self.model, self.sequence_for(img))
        return self.model.alphabet.decode(ctc_greedy_decode(posteriors))
