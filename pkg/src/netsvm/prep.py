"""Turn a filtered :class:`~netsvm.arff.Dataset` into numeric SVM input.

Nominal features are one-hot encoded over the values observed at fit time,
numeric features are min-max scaled into ``[0, 1]`` and ``string`` attributes
are not used as features. Rare values (support below ``min_support``) of both
features and the class can be folded into a single bucket label, which keeps
one-vs-one training tractable on high-cardinality targets like Destination.
"""

from __future__ import annotations

import json
import warnings
from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .arff import NOMINAL, NUMERIC, Dataset
from .errors import (
    DegenerateFeatureWarning,
    DegenerateSplit,
    EmptyDataset,
    MissingClassValue,
    NotNominalClass,
    SchemaMismatch,
    UnseenNominal,
)

ONE_HOT = "one_hot"
MIN_MAX = "min_max"
PASSTHROUGH = "passthrough"
ZERO = "zero"


@dataclass(frozen=True)
class RareBucket:
    min_support: int = 0
    bucket_label: str = "(rare)"

    @property
    def enabled(self):
        return self.min_support > 0


@dataclass(frozen=True)
class FeatureEncoding:
    """How one source attribute maps onto feature columns.

    ``kind`` is ``one_hot`` (``values`` gives the column order), ``min_max``
    (``minimum``/``maximum``), ``passthrough`` (raw value) or ``zero`` (a
    constant column produced by a degenerate min == max range).
    """

    attribute: str
    kind: str
    values: tuple = ()
    minimum: float = 0.0
    maximum: float = 0.0

    @property
    def width(self):
        return len(self.values) if self.kind == ONE_HOT else 1


@dataclass(frozen=True)
class EncoderSpec:
    class_attribute: str
    class_values: tuple
    feature_encodings: tuple
    schema: tuple  # (name, kind) for every attribute of the fitted dataset
    rare_bucket: RareBucket = RareBucket()
    degenerate: tuple = ()

    @property
    def dimension(self):
        return sum(f.width for f in self.feature_encodings)

    @property
    def feature_names(self):
        names = []
        for f in self.feature_encodings:
            if f.kind == ONE_HOT:
                names.extend(f"{f.attribute}={v}" for v in f.values)
            else:
                names.append(f.attribute)
        return names

    def to_dict(self):
        return {
            "class_attribute": self.class_attribute,
            "class_values": list(self.class_values),
            "schema": [list(s) for s in self.schema],
            "rare_bucket": {"min_support": self.rare_bucket.min_support, "bucket_label": self.rare_bucket.bucket_label},
            "degenerate": list(self.degenerate),
            "features": [
                {"attribute": f.attribute, "kind": f.kind, "values": list(f.values)}
                if f.kind == ONE_HOT
                else {"attribute": f.attribute, "kind": f.kind, "min": f.minimum, "max": f.maximum}
                for f in self.feature_encodings
            ],
        }

    @classmethod
    def from_dict(cls, data):
        feats = []
        for f in data["features"]:
            if f["kind"] == ONE_HOT:
                feats.append(FeatureEncoding(f["attribute"], ONE_HOT, tuple(f["values"])))
            else:
                feats.append(FeatureEncoding(f["attribute"], f["kind"], (), float(f["min"]), float(f["max"])))
        rb = data.get("rare_bucket") or {}
        return cls(
            class_attribute=data["class_attribute"],
            class_values=tuple(data["class_values"]),
            feature_encodings=tuple(feats),
            schema=tuple(tuple(s) for s in data["schema"]),
            rare_bucket=RareBucket(int(rb.get("min_support", 0)), rb.get("bucket_label", "(rare)")),
            degenerate=tuple(data.get("degenerate", ())),
        )

    def dumps(self):
        """One-line JSON form embedded in model files (keys sorted, floats exact)."""
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False, separators=(",", ":"))

    @classmethod
    def loads(cls, text):
        return cls.from_dict(json.loads(text))

    # -- per-value encoding ------------------------------------------------

    def map_nominal(self, attribute, value, known):
        if value in known:
            return value
        if self.rare_bucket.enabled and self.rare_bucket.bucket_label in known:
            return self.rare_bucket.bucket_label
        raise UnseenNominal(attribute, value)

    def encode_row(self, row):
        """Encode one raw instance given as a mapping ``{attribute: value}``.

        Nominal values are labels (strings), numeric values numbers; missing
        is ``None``. Attributes not used as features are ignored.
        """
        out = np.zeros(self.dimension)
        col = 0
        for f in self.feature_encodings:
            value = row.get(f.attribute) if hasattr(row, "get") else row[f.attribute]
            if f.kind == ONE_HOT:
                if value is not None:
                    v = self.map_nominal(f.attribute, value, f.values)
                    out[col + f.values.index(v)] = 1.0
            elif value is not None:
                out[col] = _scale(f, float(value))[0]
            col += f.width
        return out


@dataclass(frozen=True)
class EncodedDataset:
    features: np.ndarray
    labels: np.ndarray
    label_names: tuple
    encoder: EncoderSpec
    clamped: int = field(default=0, compare=False)

    def __len__(self):
        return len(self.labels)

    def subset(self, index):
        index = np.asarray(index, dtype=np.intp)
        return replace(self, features=self.features[index], labels=self.labels[index], clamped=0)

    def class_counts(self):
        return np.bincount(self.labels, minlength=len(self.label_names))


@dataclass(frozen=True)
class SplitSpec:
    train_percent: float = 70.0
    shuffle: bool = False
    seed: int = 1

    def describe(self):
        return f"split {float(self.train_percent):.1f}% train, remainder test"


def _scale(f, value):
    if f.kind == MIN_MAX:
        x = (value - f.minimum) / (f.maximum - f.minimum)
        if x < 0.0:
            return 0.0, True
        if x > 1.0:
            return 1.0, True
        return x, False
    if f.kind == ZERO:
        return 0.0, False
    return value, False


def _bucketed_values(decoded, rare):
    """Observed values in first-appearance order, rare ones folded into the bucket."""
    counts = Counter(v for v in decoded if v is not None)
    order = list(dict.fromkeys(v for v in decoded if v is not None))
    if not rare.enabled:
        return tuple(order)
    kept = [v for v in order if counts[v] >= rare.min_support]
    if len(kept) < len(order):
        kept.append(rare.bucket_label)
    return tuple(kept)


def fit_encoder(d: Dataset, class_attribute: str, *, rare_bucket: RareBucket | None = None, scale=True) -> EncoderSpec:
    """Derive encoding rules from ``d`` with ``class_attribute`` as the target.

    >>> spec = fit_encoder(ds, "Protocol")   # doctest: +SKIP
    >>> [f.attribute for f in spec.feature_encodings]   # doctest: +SKIP
    ['Destination', 'Length']
    """
    rare = rare_bucket or RareBucket()
    cls_attr = d.attribute(class_attribute)
    if cls_attr.kind != NOMINAL:
        raise NotNominalClass(f"class attribute {class_attribute!r} is {cls_attr.kind}, not nominal")
    if len(d) == 0:
        raise EmptyDataset("cannot fit an encoder on an empty dataset")
    class_values = _bucketed_values(d.decoded_column(class_attribute), rare)
    feats = []
    degenerate = []
    for attr in d.attributes:
        if attr.name == class_attribute:
            continue
        if attr.kind == NOMINAL:
            values = _bucketed_values(d.decoded_column(attr.name), rare)
            feats.append(FeatureEncoding(attr.name, ONE_HOT, values))
        elif attr.kind == NUMERIC:
            col = [v for v in d.column(attr.name) if v is not None]
            if not scale:
                feats.append(FeatureEncoding(attr.name, PASSTHROUGH))
                continue
            lo = min(col) if col else 0.0
            hi = max(col) if col else 0.0
            if not hi > lo:
                warnings.warn(
                    f"numeric attribute {attr.name!r} is constant ({lo}); encoded as 0",
                    DegenerateFeatureWarning,
                    stacklevel=2,
                )
                degenerate.append(attr.name)
                feats.append(FeatureEncoding(attr.name, ZERO, (), lo, hi))
            else:
                feats.append(FeatureEncoding(attr.name, MIN_MAX, (), lo, hi))
    return EncoderSpec(
        class_attribute=class_attribute,
        class_values=class_values,
        feature_encodings=tuple(feats),
        schema=tuple((a.name, a.kind) for a in d.attributes),
        rare_bucket=rare,
        degenerate=tuple(degenerate),
    )


def check_schema(d: Dataset, spec: EncoderSpec):
    have = tuple((a.name, a.kind) for a in d.attributes)
    if have != spec.schema:
        raise SchemaMismatch(
            f"dataset attributes {[n for n, _ in have]} do not match the encoder's {[n for n, _ in spec.schema]}"
        )


def _nominal_lookup(spec, attribute, known, dataset_values):
    """Per-dataset-index target position (vectorised unseen/bucket handling)."""
    pos = {v: i for i, v in enumerate(known)}
    out = np.empty(len(dataset_values), dtype=np.intp)
    for idx, value in enumerate(dataset_values):
        p = pos.get(value)
        if p is None:
            p = -1
            if spec.rare_bucket.enabled and spec.rare_bucket.bucket_label in pos:
                p = pos[spec.rare_bucket.bucket_label]
        out[idx] = p
    return out


def encode(d: Dataset, spec: EncoderSpec) -> EncodedDataset:
    """Encode every instance of ``d``; output rows follow instance order."""
    check_schema(d, spec)
    n = len(d)
    X = np.zeros((n, spec.dimension))
    clamped = 0
    col = 0
    for f in spec.feature_encodings:
        attr = d.attribute(f.attribute)
        cells = d.column(f.attribute)
        if f.kind == ONE_HOT:
            lookup = _nominal_lookup(spec, f.attribute, f.values, attr.values)
            for r, c in enumerate(cells):
                if c is None:
                    continue
                p = lookup[c]
                if p < 0:
                    raise UnseenNominal(f.attribute, attr.values[c])
                X[r, col + p] = 1.0
        else:
            raw = np.array([np.nan if c is None else c for c in cells], dtype=float)
            present = ~np.isnan(raw)
            if f.kind == MIN_MAX:
                scaled = (raw - f.minimum) / (f.maximum - f.minimum)
                out_of_range = present & ((scaled < 0.0) | (scaled > 1.0))
                clamped += int(out_of_range.sum())
                X[:, col] = np.where(present, np.clip(scaled, 0.0, 1.0), 0.0)
            elif f.kind == PASSTHROUGH:
                X[:, col] = np.where(present, raw, 0.0)
        col += f.width

    cls = d.attribute(spec.class_attribute)
    lookup = _nominal_lookup(spec, spec.class_attribute, spec.class_values, cls.values)
    labels = np.empty(n, dtype=np.int64)
    for r, c in enumerate(d.column(spec.class_attribute)):
        if c is None:
            raise MissingClassValue(f"instance {r} has no {spec.class_attribute} value")
        p = lookup[c]
        if p < 0:
            raise UnseenNominal(spec.class_attribute, cls.values[c])
        labels[r] = p
    return EncodedDataset(X, labels, spec.class_values, spec, clamped)


def split_sizes(n, train_percent):
    """``(train, test)`` sizes with round-half-up on ``n * p / 100`` in exact arithmetic."""
    if not 0 < train_percent < 100:
        raise ValueError("train_percent must lie strictly between 0 and 100")
    exact = Fraction(n) * Fraction(str(train_percent)) / 100
    train = int(exact + Fraction(1, 2))
    return train, n - train


def percentage_split(e: EncodedDataset, s: SplitSpec):
    """WEKA-style holdout: the first ``train_percent`` of (optionally shuffled) rows train."""
    n = len(e)
    if n < 2:
        raise DegenerateSplit(f"need at least 2 instances to split, have {n}")
    n_train, n_test = split_sizes(n, s.train_percent)
    if n_train == 0 or n_test == 0:
        raise DegenerateSplit(f"{s.train_percent}% of {n} leaves an empty side")
    order = split_order(n, s)
    return e.subset(order[:n_train]), e.subset(order[n_train:])


def split_order(n, s: SplitSpec):
    if s.shuffle:
        return np.random.default_rng(s.seed).permutation(n)
    return np.arange(n)
