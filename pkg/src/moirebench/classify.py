"""Content and frequency classification of benchmark images.

Two deterministic rule-based classifiers:

* content: how much of an image is near-pure black/white ink versus
  continuous tone, bucketed into TextOnly / FigureOnly / Mixed;
* frequency: which radial band of the pattern image's power spectrum
  dominates, bucketed into Low / Mid / High.

Both are exposed as plain functions and as scikit-learn style estimators
(:class:`ContentClassifier`, :class:`FrequencyGroupClassifier`) so they
compose with pipelines and `get_params`/`set_params` tooling.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .errors import DegenerateInputError, ImageValueError
from .spectral import psd_2d, radial_band_power
from .validation import check_image

__all__ = [
    "ContentClass",
    "FrequencyGroup",
    "ContentThresholds",
    "DEFAULT_BAND_EDGES",
    "count_pure_samples",
    "classify_content",
    "classify_frequency",
    "ContentClassifier",
    "FrequencyGroupClassifier",
]


class ContentClass(str, Enum):
    TEXT_ONLY = "TextOnly"
    FIGURE_ONLY = "FigureOnly"
    MIXED = "Mixed"


class FrequencyGroup(str, Enum):
    LOW = "Low"
    MID = "Mid"
    HIGH = "High"


# Interior radial band edges as fractions of the Nyquist radius.
DEFAULT_BAND_EDGES = (1.0 / 3.0, 2.0 / 3.0)


@dataclass(frozen=True)
class ContentThresholds:
    """Decision thresholds for content classification.

    An image is TextOnly when at least ``upper_ratio`` of its per-channel
    samples are within ``purity_epsilon`` of pure black or pure white,
    FigureOnly when at most ``lower_ratio`` are, Mixed otherwise.
    """

    upper_ratio: float = 0.75
    lower_ratio: float = 0.25
    purity_epsilon: float = 1.0 / 255.0

    def __post_init__(self):
        if not 0.0 <= self.lower_ratio < self.upper_ratio <= 1.0:
            raise ImageValueError(
                f"need 0 <= lower < upper <= 1, got {self.lower_ratio}, {self.upper_ratio}"
            )
        if not 0.0 <= self.purity_epsilon < 0.5:
            raise ImageValueError(f"purity_epsilon out of range: {self.purity_epsilon}")


def count_pure_samples(img, epsilon: float = 1.0 / 255.0) -> int:
    """Number of per-channel samples within `epsilon` of 0 or of 1."""
    arr = check_image(img, name="img")
    return int(np.count_nonzero((arr <= epsilon) | (arr >= 1.0 - epsilon)))


def classify_content(img, thresholds: ContentThresholds | None = None) -> ContentClass:
    """Bucket an image by its share of near-pure samples.

    The sample total is ``H * W * channels`` and threshold comparisons are
    inclusive: a share of exactly ``upper_ratio`` is TextOnly and exactly
    ``lower_ratio`` is FigureOnly.
    """
    th = thresholds or ContentThresholds()
    arr = check_image(img, name="img")
    total = arr.size
    pure = count_pure_samples(arr, th.purity_epsilon)
    if pure >= th.upper_ratio * total:
        return ContentClass.TEXT_ONLY
    if pure <= th.lower_ratio * total:
        return ContentClass.FIGURE_ONLY
    return ContentClass.MIXED


def classify_frequency(pattern, edges=DEFAULT_BAND_EDGES) -> FrequencyGroup:
    """Classify a single-channel pattern image by its dominant PSD band.

    The centered PSD is split into three annuli at `edges` (fractions of
    the Nyquist radius); the group with the most power wins and ties go to
    the lower band. A pattern with zero spectral power (constant image)
    raises :class:`DegenerateInputError`.
    """
    edges = tuple(float(e) for e in edges)
    if len(edges) != 2:
        raise ImageValueError(f"expected two interior band edges, got {edges}")
    arr = check_image(pattern, channels=1, name="pattern")
    psd = psd_2d(arr)
    bands = radial_band_power(psd, edges)
    total = bands.sum()
    if total <= 0.0:
        raise DegenerateInputError("pattern image has no spectral power (constant input)")
    groups = (FrequencyGroup.LOW, FrequencyGroup.MID, FrequencyGroup.HIGH)
    return groups[int(np.argmax(bands))]


def _as_image_batch(X):
    """Accept a single image, a sequence of images, or a stacked array.

    A 3-d array with a trailing axis of 3 is read as one RGB image; any
    other 3-d array is a stack of single-channel images.
    """
    if isinstance(X, (list, tuple)):
        return list(X)
    if isinstance(X, np.ndarray):
        if X.ndim == 4:
            return [X[i] for i in range(X.shape[0])]
        if X.ndim == 2 or (X.ndim == 3 and X.shape[-1] == 3):
            return [X]
        if X.ndim == 3:
            return [X[i] for i in range(X.shape[0])]
    raise ImageValueError(f"cannot interpret input of type {type(X).__name__} as image batch")


class ContentClassifier(ClassifierMixin, BaseEstimator):
    """Rule-based TextOnly / FigureOnly / Mixed classifier.

    Parameters mirror :class:`ContentThresholds`. The estimator is
    stateless; ``fit`` only validates parameters and records ``classes_``.

    Examples
    --------
    >>> import numpy as np
    >>> clf = ContentClassifier().fit()
    >>> clf.predict([np.ones((8, 8, 3))])
    array(['TextOnly'], dtype=object)
    """

    def __init__(self, upper_ratio=0.75, lower_ratio=0.25, purity_epsilon=1.0 / 255.0):
        self.upper_ratio = upper_ratio
        self.lower_ratio = lower_ratio
        self.purity_epsilon = purity_epsilon

    def _thresholds(self) -> ContentThresholds:
        return ContentThresholds(
            upper_ratio=self.upper_ratio,
            lower_ratio=self.lower_ratio,
            purity_epsilon=self.purity_epsilon,
        )

    def fit(self, X=None, y=None):
        self._thresholds()
        self.classes_ = np.array([c.value for c in ContentClass], dtype=object)
        return self

    def predict(self, X):
        check_is_fitted(self)
        th = self._thresholds()
        return np.array(
            [classify_content(img, th).value for img in _as_image_batch(X)], dtype=object
        )


class FrequencyGroupClassifier(ClassifierMixin, BaseEstimator):
    """Dominant-band Low / Mid / High classifier for pattern images."""

    def __init__(self, band_edges=DEFAULT_BAND_EDGES):
        self.band_edges = band_edges

    def fit(self, X=None, y=None):
        edges = tuple(float(e) for e in self.band_edges)
        if len(edges) != 2 or not 0 < edges[0] < edges[1]:
            raise ImageValueError(f"band_edges must be two increasing fractions, got {edges}")
        self.classes_ = np.array([g.value for g in FrequencyGroup], dtype=object)
        return self

    def predict(self, X):
        check_is_fitted(self)
        return np.array(
            [classify_frequency(img, self.band_edges).value for img in _as_image_batch(X)],
            dtype=object,
        )
