"""Accuracy metrics: MAPE and Pearson correlation."""

from __future__ import annotations

import numpy as np

from .errors import ModelError


def mape(preds, labels) -> float:
    """Mean absolute percentage error, in percent."""
    preds = np.asarray(preds, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if preds.size == 0 or preds.shape != labels.shape:
        raise ModelError("preds and labels must be nonempty and equal length")
    if (labels <= 0).any():
        raise ModelError("labels must be strictly positive for MAPE")
    return float(100.0 * np.mean(np.abs(preds - labels) / labels))


def pearson_r(preds, labels) -> float:
    """Sample Pearson correlation coefficient."""
    preds = np.asarray(preds, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if preds.size < 2 or preds.shape != labels.shape:
        raise ModelError("need at least 2 paired values")
    dp = preds - preds.mean()
    dl = labels - labels.mean()
    sp = float((dp * dp).sum())
    sl = float((dl * dl).sum())
    if sp == 0.0 or sl == 0.0:
        raise ModelError("zero variance; correlation undefined")
    return float((dp * dl).sum() / np.sqrt(sp * sl))
