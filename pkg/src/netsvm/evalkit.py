"""WEKA-compatible evaluation of hard (0/1) class predictions.

Error measures treat each prediction as a probability vector: the one-hot
vector of the predicted class against the one-hot vector of the actual class.
The ZeroR-style baseline that normalises RAE/RRSE predicts the training
class priors for every instance.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyMatrix, LengthMismatch, UnknownLabel


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are actual classes, columns predicted classes."""

    labels: tuple
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        k = len(self.labels)
        if counts.shape != (k, k):
            raise ValueError(f"counts must be {k}x{k}, got {counts.shape}")
        if (counts < 0).any():
            raise ValueError("confusion counts must be non-negative")
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "counts", counts)

    @property
    def n(self):
        return int(self.counts.sum())

    @property
    def correct(self):
        return int(np.trace(self.counts))

    def actual_counts(self):
        return self.counts.sum(axis=1)

    def predicted_counts(self):
        return self.counts.sum(axis=0)

    def permuted(self, order):
        """Same matrix with classes reordered (rows and columns together)."""
        order = list(order)
        return ConfusionMatrix([self.labels[i] for i in order], self.counts[np.ix_(order, order)])

    def __eq__(self, other):
        return (
            isinstance(other, ConfusionMatrix)
            and self.labels == other.labels
            and np.array_equal(self.counts, other.counts)
        )


@dataclass(frozen=True)
class ClassStats:
    label: str
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class EvalSummary:
    n: int
    correct: int
    incorrect: int
    accuracy: float
    kappa: float
    mae: float
    rmse: float
    rae: float
    rrse: float
    train_priors: tuple
    kappa_degenerate: bool = False
    per_class: tuple = field(default=(), compare=False)

    def to_dict(self):
        return {
            "n": self.n,
            "correct": self.correct,
            "incorrect": self.incorrect,
            "accuracy": self.accuracy,
            "kappa": self.kappa,
            "kappa_degenerate": self.kappa_degenerate,
            "mae": self.mae,
            "rmse": self.rmse,
            "rae": self.rae,
            "rrse": self.rrse,
            "train_priors": list(self.train_priors),
            "per_class": [
                {"label": c.label, "precision": c.precision, "recall": c.recall, "f1": c.f1, "support": c.support}
                for c in self.per_class
            ],
        }


def confusion(actual, predicted, labels) -> ConfusionMatrix:
    """Count (actual, predicted) pairs.

    ``actual``/``predicted`` may hold label names or integer indices into
    ``labels``.
    """
    actual = list(actual)
    predicted = list(predicted)
    if len(actual) != len(predicted):
        raise LengthMismatch(f"{len(actual)} actual vs {len(predicted)} predicted labels")
    labels = tuple(labels)
    index = {name: i for i, name in enumerate(labels)}
    k = len(labels)

    def to_index(v):
        if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
            if 0 <= v < k:
                return int(v)
            raise UnknownLabel(f"label index {v} outside 0..{k - 1}")
        try:
            return index[v]
        except KeyError:
            raise UnknownLabel(f"label {v!r} not in {list(labels)}") from None

    counts = np.zeros((k, k), dtype=np.int64)
    a = np.fromiter((to_index(v) for v in actual), dtype=np.intp, count=len(actual))
    p = np.fromiter((to_index(v) for v in predicted), dtype=np.intp, count=len(predicted))
    np.add.at(counts, (a, p), 1)
    return ConfusionMatrix(labels, counts)


def kappa(counts):
    """Cohen's kappa from a square count matrix; returns ``(kappa, degenerate)``."""
    counts = np.asarray(counts, dtype=float)
    n = counts.sum()
    p0 = np.trace(counts) / n
    pe = float((counts.sum(axis=1) * counts.sum(axis=0)).sum()) / (n * n)
    if pe >= 1.0:
        return (1.0 if p0 == 1.0 else 0.0), True
    return (p0 - pe) / (1.0 - pe), False


def per_class_stats(m: ConfusionMatrix):
    out = []
    tp = np.diag(m.counts).astype(float)
    pred = m.predicted_counts().astype(float)
    act = m.actual_counts().astype(float)
    for i, label in enumerate(m.labels):
        p = tp[i] / pred[i] if pred[i] else 0.0
        r = tp[i] / act[i] if act[i] else 0.0
        f = 2 * p * r / (p + r) if p + r else 0.0
        out.append(ClassStats(label, p, r, f, int(act[i])))
    return tuple(out)


def summarize(m: ConfusionMatrix, train_priors, test_class_counts=None) -> EvalSummary:
    """Summary statistics printed by WEKA's ``=== Summary ===`` block.

    Parameters
    ----------
    m : ConfusionMatrix
    train_priors : sequence of float
        Class frequencies of the training split; must sum to 1.
    test_class_counts : sequence of int, optional
        Actual class counts of the evaluated rows. Checked against the matrix
        row sums when given.
    """
    n = m.n
    if n == 0:
        raise EmptyMatrix("cannot summarise an empty confusion matrix")
    k = len(m.labels)
    priors = np.asarray(train_priors, dtype=float)
    if priors.shape != (k,):
        raise ValueError(f"train_priors must have {k} entries")
    if abs(priors.sum() - 1.0) > 1e-9:
        raise ValueError(f"train_priors sum to {priors.sum()!r}, not 1")
    actual = m.actual_counts()
    if test_class_counts is not None:
        tc = np.asarray(test_class_counts)
        if tc.shape != (k,) or not np.array_equal(tc, actual):
            raise ValueError("test_class_counts disagree with the confusion matrix rows")

    correct = m.correct
    kap, degenerate = kappa(m.counts)

    # a wrong hard prediction puts |e| = 1 in two slots, a right one in none
    abs_err = 2.0 * (n - correct)
    sq_err = abs_err
    # baseline for actual class a: |1 - pi_a| + sum_{j != a} pi_j = 2 (1 - pi_a)
    base_abs = float((actual * 2.0 * (1.0 - priors)).sum())
    base_sq = float((actual * ((1.0 - priors) ** 2 + (priors**2).sum() - priors**2)).sum())
    slots = n * k
    rae = abs_err / base_abs if base_abs > 0 else (0.0 if abs_err == 0 else math.inf)
    rrse = math.sqrt(sq_err / base_sq) if base_sq > 0 else (0.0 if sq_err == 0 else math.inf)
    return EvalSummary(
        n=n,
        correct=correct,
        incorrect=n - correct,
        accuracy=correct / n,
        kappa=kap,
        mae=abs_err / slots,
        rmse=math.sqrt(sq_err / slots),
        rae=rae,
        rrse=rrse,
        train_priors=tuple(float(p) for p in priors),
        kappa_degenerate=degenerate,
        per_class=per_class_stats(m),
    )


def probability_errors(probabilities, actual, train_priors):
    """Slot-wise MAE, RMSE, RAE, RRSE for arbitrary per-instance probability vectors.

    ``probabilities`` is ``n x K``; ``actual`` holds class indices. This is
    the general definition that :func:`summarize` specialises to one-hot
    predictions.
    """
    P = np.asarray(probabilities, dtype=float)
    n, k = P.shape
    Y = np.zeros_like(P)
    Y[np.arange(n), np.asarray(actual)] = 1.0
    B = np.broadcast_to(np.asarray(train_priors, dtype=float), P.shape)
    e = P - Y
    eb = B - Y
    return {
        "mae": float(np.abs(e).sum() / (n * k)),
        "rmse": math.sqrt(float((e * e).sum()) / (n * k)),
        "rae": float(np.abs(e).sum() / np.abs(eb).sum()),
        "rrse": math.sqrt(float((e * e).sum()) / float((eb * eb).sum())),
    }


# -- rendering ----------------------------------------------------------------


def column_letters(k):
    """``a..z`` then ``aa, ab, ...`` (bijective base 26)."""
    out = []
    for i in range(k):
        s = ""
        i += 1
        while i:
            i, r = divmod(i - 1, 26)
            s = chr(ord("a") + r) + s
        out.append(s)
    return out


def _line(label, value):
    return f"{label:<35}{value}"


def format_summary(s: EvalSummary) -> str:
    lines = [
        "=== Summary ===",
        "",
        _line("Correctly Classified Instances", f"{s.correct:<15d}{100 * s.accuracy:.4f} %"),
        _line("Incorrectly Classified Instances", f"{s.incorrect:<15d}{100 * (1 - s.accuracy):.4f} %"),
        _line("Kappa statistic", f"{s.kappa:.4f}"),
        _line("Mean absolute error", f"{s.mae:.4f}"),
        _line("Root mean squared error", f"{s.rmse:.4f}"),
        _line("Relative absolute error", f"{100 * s.rae:.4f} %"),
        _line("Root relative squared error", f"{100 * s.rrse:.4f} %"),
        _line("Total Number of Instances", f"{s.n}"),
    ]
    return "\n".join(lines) + "\n"


def format_confusion(m: ConfusionMatrix) -> str:
    letters = column_letters(len(m.labels))
    width = max([len(str(int(m.counts.max()))) if m.counts.size else 1] + [len(x) for x in letters]) + 1
    head = "".join(f"{x:>{width}}" for x in letters) + "   <-- classified as"
    rows = []
    for i, label in enumerate(m.labels):
        cells = "".join(f"{int(c):>{width}}" for c in m.counts[i])
        rows.append(f"{cells} | {letters[i]} = {label}")
    return "=== Confusion Matrix ===\n\n" + head + "\n" + "\n".join(rows) + "\n"


def format_run_information(scheme, relation, instances, attributes, test_mode) -> str:
    lines = ["=== Run information ===", "", f"{'Scheme:':<14}{scheme}", f"{'Relation:':<14}{relation}"]
    lines.append(f"{'Instances:':<14}{instances}")
    lines.append(f"{'Attributes:':<14}{len(attributes)}")
    lines.extend(f"{'':<14}{a}" for a in attributes)
    lines.append(f"{'Test mode:':<14}{test_mode}")
    return "\n".join(lines) + "\n"


def format_report(s: EvalSummary, m: ConfusionMatrix, timings=None, run_info=None) -> str:
    """Full WEKA-style text block: run information, timings, summary, confusion matrix."""
    timings = timings or {}
    parts = []
    if run_info:
        parts.append(format_run_information(**run_info))
    if "build" in timings:
        parts.append(
            "=== Classifier model (full training set) ===\n\n"
            f"Time taken to build model: {timings['build']:.2f} seconds\n"
        )
    parts.append("=== Evaluation on test split ===\n")
    if "test" in timings:
        parts.append(f"Time taken to test model on test split: {timings['test']:.2f} seconds\n")
    parts.append(format_summary(s))
    parts.append(format_confusion(m))
    return "\n".join(parts)


def report_json(s: EvalSummary, m: ConfusionMatrix, extra=None) -> str:
    """Machine-readable form: ``{"summary": {...}, "confusion": {"labels", "counts"}}``."""
    doc = {
        "summary": s.to_dict(),
        "confusion": {"labels": list(m.labels), "counts": m.counts.tolist()},
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=False, ensure_ascii=False) + "\n"
