"""moirebench: synthetic screen-capture image pairs and their evaluation.

The package turns clean images into aligned (clean, degraded, pattern)
triples by simulating a camera photographing an LCD panel, builds
balanced datasets from them, and scores restoration methods with full-
reference metrics plus a blinded opinion-study service.
"""

from .classify import (
    ContentClass,
    ContentClassifier,
    ContentThresholds,
    FrequencyGroup,
    FrequencyGroupClassifier,
    classify_content,
    classify_frequency,
)
from .config import ToolConfig, default_config, load_config
from .dataset import (
    DatasetManifest,
    SplitSpec,
    build_dataset,
    load_manifest,
    verify_dataset,
)
from .errors import MoirebenchError
from .metrics import (
    EvaluationReport,
    evaluate_submission,
    leaderboard,
    psnr,
    ssim,
)
from .pipeline import MoirePair, MoireSynthesizer, PipelineConfig, generate_pair
from .seeding import derive_seed, rng_from

__version__ = "0.1.0"

__all__ = [
    "ContentClass",
    "ContentClassifier",
    "ContentThresholds",
    "FrequencyGroup",
    "FrequencyGroupClassifier",
    "classify_content",
    "classify_frequency",
    "ToolConfig",
    "default_config",
    "load_config",
    "DatasetManifest",
    "SplitSpec",
    "build_dataset",
    "load_manifest",
    "verify_dataset",
    "MoirebenchError",
    "EvaluationReport",
    "evaluate_submission",
    "leaderboard",
    "psnr",
    "ssim",
    "MoirePair",
    "MoireSynthesizer",
    "PipelineConfig",
    "generate_pair",
    "derive_seed",
    "rng_from",
    "__version__",
]
