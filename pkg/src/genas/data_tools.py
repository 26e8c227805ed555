"""Batch sampling and scoring utilities shared by the search and reporting paths."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def balanced_batches(labels, batch_size: int, rng):
    """Yield index batches drawn half-and-half from each class, forever.

    Each class keeps its own shuffled pool of sample indices; a fair
    coin picks the class of every slot, so batches average 50/50 even
    when the underlying label vector is badly skewed.  A pool reshuffles
    each time it cycles, which guarantees every index keeps appearing.
    """
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.size == 0:
        raise ValueError("labels must be a non-empty 1-d array")
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    pools = [np.flatnonzero(labels == 0), np.flatnonzero(labels == 1)]
    if pools[0].size == 0 and pools[1].size == 0:
        raise ValueError("labels must contain at least one 0 or 1 entry")

    def generate():
        order = [rng.permutation(pool) if pool.size else pool for pool in pools]
        cursor = [0, 0]

        def draw(cls):
            if order[cls][cursor[cls]:].size == 0:
                order[cls] = rng.permutation(pools[cls])
                cursor[cls] = 0
            idx = order[cls][cursor[cls]]
            cursor[cls] += 1
            return idx

        while True:
            batch = np.empty(batch_size, dtype=pools[0].dtype if pools[0].size else pools[1].dtype)
            for slot in range(batch_size):
                cls = 1 if rng.random() < 0.5 else 0
                # A one-class dataset degrades to plain sampling.
                if pools[cls].size == 0:
                    cls = 1 - cls
                batch[slot] = draw(cls)
            yield batch

    return generate()


@dataclass(frozen=True)
class ConfusionMatrix:
    true_positive: int
    false_positive: int
    true_negative: int
    false_negative: int


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f_score: float


def confusion_from_predictions(predictions, labels) -> ConfusionMatrix:
    predictions = np.asarray(predictions).astype(bool)
    labels = np.asarray(labels).astype(bool)
    if predictions.shape != labels.shape:
        raise ValueError("predictions and labels must have the same shape")
    return ConfusionMatrix(
        true_positive=int(np.sum(predictions & labels)),
        false_positive=int(np.sum(predictions & ~labels)),
        true_negative=int(np.sum(~predictions & ~labels)),
        false_negative=int(np.sum(~predictions & labels)),
    )


def compute_metrics(cm: ConfusionMatrix, beta: float = 0.5) -> Metrics:
    """Accuracy, precision, recall and the F-beta score for one cutoff.

    beta < 1 weighs precision above recall.  Any zero denominator
    produces 0 for that metric rather than an error.
    """
    total = cm.true_positive + cm.false_positive + cm.true_negative + cm.false_negative
    accuracy = (cm.true_positive + cm.true_negative) / total if total else 0.0
    predicted = cm.true_positive + cm.false_positive
    precision = cm.true_positive / predicted if predicted else 0.0
    actual = cm.true_positive + cm.false_negative
    recall = cm.true_positive / actual if actual else 0.0
    mix = beta * beta * precision + recall
    f_score = (1 + beta * beta) * precision * recall / mix if mix else 0.0
    return Metrics(accuracy=accuracy, precision=precision, recall=recall, f_score=f_score)


def threshold_search(scores, labels, beta: float = 0.5,
                     low: float = 0.2, high: float = 0.8, step: float = 0.001):
    """Pick the cutoff in [low, high] maximizing F-beta on the given scores.

    Scores strictly above the cutoff count as positive.  Ties go to the
    smallest cutoff.  Returns (threshold, Metrics at that threshold).
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels).astype(bool)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be matching 1-d arrays")
    grid = np.linspace(low, high, int(round((high - low) / step)) + 1)
    predicted = scores[None, :] > grid[:, None]
    tp = np.sum(predicted & labels[None, :], axis=1).astype(float)
    fp = np.sum(predicted & ~labels[None, :], axis=1).astype(float)
    fn = np.sum(~predicted & labels[None, :], axis=1).astype(float)
    b2 = beta * beta
    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(tp + fp > 0, tp / (tp + fp), 0.0)
        recall = np.where(tp + fn > 0, tp / (tp + fn), 0.0)
        mix = b2 * precision + recall
        f_score = np.where(mix > 0, (1 + b2) * precision * recall / mix, 0.0)
    best = int(np.argmax(f_score))
    threshold = float(grid[best])
    cm = confusion_from_predictions(scores > threshold, labels)
    return threshold, compute_metrics(cm, beta)
