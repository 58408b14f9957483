"""Train/test splitting and rank-based AUC."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from .dataset import DataError, RawDataset
from .explain import predict
from .model import Model


def split(data: RawDataset, train_fraction: float = 0.8, seed: int = 0) -> tuple[RawDataset, RawDataset]:
    """Seeded shuffle, then the first ``floor(n * train_fraction)`` rows train."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    n = len(data)
    order = np.random.default_rng(seed).permutation(n)
    n_train = int(np.floor(n * train_fraction))
    train = data.take(order[:n_train].tolist())
    test = data.take(order[n_train:].tolist())
    if n and (sum(train.labels) == 0 or sum(train.labels) == len(train)):
        raise DataError("training split is missing a class")
    return train, test


def auc_roc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Mann-Whitney AUC: P(pos > neg) + P(tie)/2, via midranks."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if len(scores) != len(labels):
        raise ValueError("scores and labels differ in length")
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes")
    # doubled midranks are integers, so the statistic is exact before the final division
    ranks2 = (2 * rankdata(scores, method="average")).astype(np.int64)
    u2 = int(ranks2[labels == 1].sum()) - n_pos * (n_pos + 1)
    return u2 / (2 * n_pos * n_neg)


@dataclass
class Report:
    auc: float
    n: int
    n_positive: int
    mean_score: float
    rule_usage: list[int] = field(default_factory=list)  # last entry is the default rule

    def dumps(self) -> str:
        lines = [
            f"auc={self.auc:.6f}",
            f"n={self.n}",
            f"positive_rate={self.n_positive / self.n if self.n else 0.0:.6f}",
            f"mean_score={self.mean_score:.6f}",
        ]
        for j, k in enumerate(self.rule_usage[:-1]):
            lines.append(f"rule_{j + 1}={k}")
        if self.rule_usage:
            lines.append(f"default={self.rule_usage[-1]}")
        return "\n".join(lines) + "\n"


def evaluate(model: Model, test: RawDataset) -> Report:
    preds = [predict(model, row) for row in test.rows]
    scores = [p.probability for p in preds]
    usage = [0] * (len(model.rules) + 1)
    for p in preds:
        usage[p.triggered_index] += 1
    n_pos = sum(test.labels)
    try:
        auc = auc_roc(scores, test.labels)
    except ValueError as exc:
        raise DataError(f"cannot evaluate: {exc}") from exc
    return Report(auc, len(test), n_pos, float(np.mean(scores)) if scores else 0.0, usage)
