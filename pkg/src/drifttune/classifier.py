"""Incremental Gaussian naive Bayes and the chunk evaluation step.

The model keeps per-class running counts, means, and sums of squared
deviations, merged batch-wise with Chan's parallel update, so training on a
chunk is equivalent to having seen every instance one at a time. Prediction
maximizes the log joint density with a per-feature variance floor.

Module-level operation counters record how many instances were pushed
through predict and train calls. The adaptation logic is bounded to a fixed
small multiple of the chunk size per step, and tests read these counters to
check that bound.
"""

from __future__ import annotations

import copy as _copy
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import ModelError
from .stream import Chunk

VARIANCE_FLOOR_SCALE = 1e-9


class OpCounts:
    """Running totals of instances seen by predict and train calls."""

    __slots__ = ("predict_instances", "train_instances")

    def __init__(self):
        self.reset()

    def reset(self) -> None:
        self.predict_instances = 0
        self.train_instances = 0

    def snapshot(self) -> tuple[int, int]:
        return (self.predict_instances, self.train_instances)


op_counts = OpCounts()


class EvalOutcome(NamedTuple):
    accuracy: float
    statistic: float


@dataclass
class GaussianNB:
    """Gaussian naive Bayes with incremental chunk training.

    Classes are discovered as they appear; statistics use population
    variance. Tied posteriors resolve to the smallest class label.
    """

    def __init__(self):
        self._classes = np.empty(0, dtype=np.int64)
        self._counts = np.empty(0, dtype=np.float64)
        self._means = np.empty((0, 0), dtype=np.float64)
        self._m2 = np.empty((0, 0), dtype=np.float64)

    @property
    def is_fitted(self) -> bool:
        return self._classes.shape[0] > 0

    @property
    def classes(self) -> np.ndarray:
        return self._classes.copy()

    @property
    def n_features(self) -> int:
        return self._means.shape[1]

    def _require_width(self, X: np.ndarray) -> None:
        if X.ndim != 2:
            raise ModelError(f"expected a 2-d feature matrix, got {X.ndim}-d")
        if self.is_fitted and X.shape[1] != self.n_features:
            raise ModelError(f"expected {self.n_features} features, got {X.shape[1]}")

    def _admit_classes(self, labels: np.ndarray) -> None:
        new = np.setdiff1d(labels, self._classes)
        if new.shape[0] == 0:
            return
        merged = np.union1d(self._classes, new)
        n_features = self._means.shape[1]
        counts = np.zeros(merged.shape[0])
        means = np.zeros((merged.shape[0], n_features))
        m2 = np.zeros((merged.shape[0], n_features))
        if self.is_fitted:
            old_pos = np.searchsorted(merged, self._classes)
            counts[old_pos] = self._counts
            means[old_pos] = self._means
            m2[old_pos] = self._m2
        self._classes, self._counts, self._means, self._m2 = merged, counts, means, m2

    def train(self, chunk: Chunk) -> "GaussianNB":
        X = np.ascontiguousarray(chunk.X, dtype=np.float64)
        y = np.asarray(chunk.y, dtype=np.int64)
        if X.shape[0] == 0:
            raise ModelError("cannot train on an empty chunk")
        self._require_width(X)
        if not self.is_fitted:
            self._means = np.empty((0, X.shape[1]), dtype=np.float64)
            self._m2 = np.empty((0, X.shape[1]), dtype=np.float64)
        self._admit_classes(np.unique(y))
        y_idx = np.searchsorted(self._classes, y).astype(np.int64)
        b_counts, b_means, b_m2 = kernels.class_stats(X, y_idx, self._classes.shape[0])

        n_a, n_b = self._counts, b_counts
        n_ab = n_a + n_b
        seen = n_ab > 0
        delta = b_means - self._means
        ratio = np.zeros_like(n_ab)
        ratio[seen] = n_b[seen] / n_ab[seen]
        self._means = self._means + delta * ratio[:, None]
        cross = np.zeros_like(n_ab)
        cross[seen] = n_a[seen] * n_b[seen] / n_ab[seen]
        self._m2 = self._m2 + b_m2 + delta * delta * cross[:, None]
        self._counts = n_ab
        op_counts.train_instances += X.shape[0]
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        if not self.is_fitted:
            raise ModelError("predict called before any training data")
        X = np.ascontiguousarray(X, dtype=np.float64)
        self._require_width(X)
        log_priors = np.log(self._counts / self._counts.sum())
        variances = self._m2 / self._counts[:, None]
        top = variances.max(axis=0)
        floor = VARIANCE_FLOOR_SCALE * np.where(top > 0.0, top, 1.0)
        variances = np.maximum(variances, floor[None, :])
        idx = kernels.predict_indices(X, log_priors, self._means, variances)
        op_counts.predict_instances += X.shape[0]
        return self._classes[idx]

    def copy(self) -> "GaussianNB":
        return _copy.deepcopy(self)


def adapt(model: GaussianNB, chunk: Chunk) -> GaussianNB:
    """Fresh model of the same kind trained only on ``chunk``."""
    return type(model)().train(chunk)


def evaluate(model: GaussianNB, chunk: Chunk, detector) -> EvalOutcome:
    """Score a frozen model on a chunk and push the error rate to a detector.

    The model is not trained here. The detector sees exactly one update, the
    chunk error rate, and the outcome carries its statistic after that update.
    """
    predicted = model.predict(chunk.X)
    accuracy = float(np.mean(predicted == chunk.y))
    detector.update(1.0 - accuracy)
    return EvalOutcome(accuracy=accuracy, statistic=detector.statistic)
