"""Binary C-SVC models, the one-vs-one ensemble and model files."""

from __future__ import annotations

import json
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np

from ..errors import (
    ConvergenceWarning,
    CorruptModel,
    DimensionMismatch,
    EmptyClass,
    SingleClass,
    VersionMismatch,
)
from ..prep import EncoderSpec, SplitSpec
from .kernels import KernelSpec, kernel_matrix
from .smo import compute_bias, kkt_violation, solve_dual

FORMAT_VERSION = 1
MAGIC = "netsvm-model"


@dataclass(frozen=True)
class TrainConfig:
    kernel: KernelSpec = KernelSpec()
    c: float = 1.0
    tolerance: float = 1e-3
    max_iterations: int = 10_000_000
    cache_budget: int = 12_500_000  # Gram entries, ~100 MB of float64
    seed: int = 1
    working_set: str = "second_order"

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("c must be > 0")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")

    def scheme(self):
        """WEKA-style scheme string, e.g. ``LibSVM -S 0 -K 2 -D 3 -G 0.0 -R 0.0 -C 1.0``."""
        k = self.kernel
        return (
            f"netsvm.LibSVM -S 0 -K {k.kind} -D {k.degree} -G {k.gamma!r} -R {k.coef0!r} "
            f"-C {self.c!r} -E {self.tolerance!r}"
        )


@dataclass
class SvmBinaryModel:
    """``f(x) = sum_j coefficients[j] * K(support_vectors[j], x) + bias``.

    ``f(x) > 0`` votes for ``class_pair[1]``, otherwise ``class_pair[0]``.
    """

    support_vectors: np.ndarray
    coefficients: np.ndarray
    bias: float
    kernel: KernelSpec
    class_pair: tuple = (0, 1)
    iterations: int = 0
    converged: bool = True
    kkt_gap: float = 0.0
    dual_objective: float = 0.0
    alpha: np.ndarray | None = field(default=None, repr=False)
    train_seconds: float = field(default=0.0, compare=False)

    def decision_function(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.support_vectors.shape[0] == 0:
            return np.full(X.shape[0], self.bias)
        if X.shape[1] != self.support_vectors.shape[1]:
            raise DimensionMismatch(f"model expects {self.support_vectors.shape[1]} features, got {X.shape[1]}")
        out = np.empty(X.shape[0])
        step = max(1, 2_000_000 // max(1, self.support_vectors.shape[0]))
        for lo in range(0, X.shape[0], step):
            K = kernel_matrix(self.kernel, X[lo : lo + step], self.support_vectors)
            out[lo : lo + step] = K @ self.coefficients + self.bias
        return out

    def predict(self, X):
        """+1 / -1 per row."""
        return np.where(self.decision_function(X) > 0, 1, -1)


def train_binary(pos, neg, config: TrainConfig = TrainConfig(), *, class_pair=(0, 1), backend=None) -> SvmBinaryModel:
    """Train a soft-margin SVM separating ``pos`` (+1) from ``neg`` (-1)."""
    pos = np.atleast_2d(np.asarray(pos, dtype=float))
    neg = np.atleast_2d(np.asarray(neg, dtype=float))
    if pos.size == 0 or neg.size == 0 or pos.shape[0] == 0 or neg.shape[0] == 0:
        raise EmptyClass("both classes need at least one row")
    if pos.shape[1] != neg.shape[1]:
        raise DimensionMismatch(f"{pos.shape[1]} vs {neg.shape[1]} features")
    X = np.vstack([pos, neg])
    y = np.concatenate([np.ones(len(pos)), -np.ones(len(neg))])
    return _fit(X, y, config, class_pair, backend)


def _fit(X, y, config, class_pair, backend):
    spec = config.kernel.resolved(X.shape[1])
    t0 = time.perf_counter()
    sol = solve_dual(
        X, y, spec, config.c, config.tolerance, config.max_iterations, config.cache_budget,
        working_set=config.working_set, seed=config.seed, backend=backend,
    )
    elapsed = time.perf_counter() - t0
    if not sol.converged:
        warnings.warn(
            f"SMO hit max_iterations={config.max_iterations} for pair {class_pair}; using best-so-far solution",
            ConvergenceWarning,
            stacklevel=3,
        )
    sv = sol.alpha > 0
    return SvmBinaryModel(
        support_vectors=X[sv].copy(),
        coefficients=(sol.alpha * y)[sv],
        bias=compute_bias(sol.alpha, sol.grad, y, config.c),
        kernel=spec,
        class_pair=tuple(class_pair),
        iterations=sol.iterations,
        converged=sol.converged,
        kkt_gap=kkt_violation(sol.alpha, sol.grad, y, config.c),
        dual_objective=sol.objective(),
        alpha=sol.alpha,
        train_seconds=elapsed,
    )


@dataclass
class SvmOvoModel:
    label_names: tuple
    binaries: list
    encoder: EncoderSpec | None
    config: TrainConfig
    format_version: int = FORMAT_VERSION
    split: SplitSpec | None = None
    removed: tuple = ()
    train_class_counts: tuple = ()
    train_seconds: float = field(default=0.0, compare=False)

    @property
    def n_classes(self):
        return len(self.label_names)

    def votes(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        votes = np.zeros((X.shape[0], self.n_classes), dtype=np.int64)
        rows = np.arange(X.shape[0])
        for b in self.binaries:
            i, j = b.class_pair
            winner = np.where(b.decision_function(X) > 0, j, i)
            np.add.at(votes, (rows, winner), 1)
        return votes

    def predict(self, X):
        """Label index per row: most votes, ties to the lowest index."""
        return np.argmax(self.votes(X), axis=1)

    def predict_one(self, row):
        """Predict a single raw instance (mapping of attribute -> value) or encoded vector."""
        if isinstance(row, dict):
            if self.encoder is None:
                raise ValueError("model has no encoder; pass an encoded vector")
            row = self.encoder.encode_row(row)
        return int(self.predict(np.asarray(row, dtype=float)[None, :])[0])

    def train_priors(self):
        counts = np.asarray(self.train_class_counts, dtype=float)
        if counts.size == 0 or counts.sum() == 0:
            return np.full(self.n_classes, 1.0 / self.n_classes)
        return counts / counts.sum()


def train_ovo(train, config: TrainConfig = TrainConfig(), *, n_jobs=1, backend=None, split=None, removed=()):
    """One binary model per unordered class pair ``(i, j)``, ``i < j``.

    ``train`` is an :class:`~netsvm.prep.EncodedDataset`. Pairs only see their
    own rows. With ``n_jobs > 1`` pairs train on threads (the compiled solver
    releases the GIL); output order is always the pair order.
    """
    X = np.ascontiguousarray(train.features, dtype=float)
    labels = np.asarray(train.labels)
    K = len(train.label_names)
    present = np.unique(labels)
    if len(present) < 2:
        raise SingleClass(f"training data holds {len(present)} class(es); need at least 2")
    # gamma auto is resolved on the full feature width so every pair shares it
    config = replace(config, kernel=config.kernel.resolved(X.shape[1]))
    index = {k: np.flatnonzero(labels == k) for k in range(K)}
    pairs = list(combinations(range(K), 2))

    def fit_pair(pair):
        i, j = pair
        if not len(index[i]) or not len(index[j]):
            # class missing from this training split: constant vote for whichever side exists
            bias = 1.0 if len(index[j]) else -1.0
            return SvmBinaryModel(np.empty((0, X.shape[1])), np.empty(0), bias, config.kernel, pair)
        rows = np.concatenate([index[j], index[i]])
        y = np.concatenate([np.ones(len(index[j])), -np.ones(len(index[i]))])
        return _fit(X[rows], y, config, pair, backend)

    t0 = time.perf_counter()
    if n_jobs and n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            binaries = list(pool.map(fit_pair, pairs))
    else:
        binaries = [fit_pair(p) for p in pairs]
    return SvmOvoModel(
        label_names=tuple(train.label_names),
        binaries=binaries,
        encoder=train.encoder,
        config=config,
        split=split,
        removed=tuple(removed),
        train_class_counts=tuple(int(c) for c in np.bincount(labels, minlength=K)),
        train_seconds=time.perf_counter() - t0,
    )


def predict(model: SvmOvoModel, rows):
    """Predict label indices for encoded rows (2-D) or one raw/encoded instance."""
    if isinstance(rows, dict):
        return model.predict_one(rows)
    arr = np.asarray(rows, dtype=float)
    if arr.ndim == 1:
        return int(model.predict(arr[None, :])[0])
    return model.predict(arr)


# -- serialisation ----------------------------------------------------------


def _f(v):
    return repr(float(v))


def dumps_model(model: SvmOvoModel) -> str:
    k = model.config.kernel
    cfg = model.config
    lines = [
        f"{MAGIC} {model.format_version}",
        f"kernel {k.name} degree {k.degree} gamma {_f(k.gamma)} coef0 {_f(k.coef0)}",
        f"config c {_f(cfg.c)} tolerance {_f(cfg.tolerance)} max_iterations {cfg.max_iterations} "
        f"cache_budget {cfg.cache_budget} seed {cfg.seed} working_set {cfg.working_set}",
        "labels " + json.dumps(list(model.label_names), ensure_ascii=False),
        "train_class_counts " + json.dumps(list(model.train_class_counts)),
        "split " + (
            json.dumps({"train_percent": float(model.split.train_percent), "shuffle": model.split.shuffle, "seed": model.split.seed}, sort_keys=True)
            if model.split is not None else "null"
        ),
        "removed " + json.dumps(sorted(model.removed)),
        "encoder " + (model.encoder.dumps() if model.encoder is not None else "null"),
        f"binaries {len(model.binaries)}",
    ]
    for b in model.binaries:
        dim = b.support_vectors.shape[1] if b.support_vectors.ndim == 2 else 0
        lines.append(f"binary {b.class_pair[0]} {b.class_pair[1]}")
        lines.append(f"bias {_f(b.bias)}")
        lines.append(f"iterations {b.iterations} converged {int(b.converged)}")
        lines.append(f"nsv {b.support_vectors.shape[0]} dim {dim}")
        for coef, sv in zip(b.coefficients, b.support_vectors):
            lines.append(" ".join([_f(coef)] + [_f(v) for v in sv]))
    lines.append("end")
    return "\n".join(lines) + "\n"


def save_model(model: SvmOvoModel, sink) -> None:
    """Write ``model`` to a path or a writable stream."""
    text = dumps_model(model)
    if isinstance(sink, (str, bytes)) or hasattr(sink, "__fspath__"):
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        try:
            sink.write(text)
        except TypeError:
            sink.write(text.encode("utf-8"))


class _Lines:
    def __init__(self, text):
        self.lines = text.split("\n")
        if self.lines and self.lines[-1] == "":
            self.lines.pop()
        self.pos = 0

    def next(self, expect=None):
        if self.pos >= len(self.lines):
            raise CorruptModel(self.pos + 1, "file ends early")
        line = self.lines[self.pos]
        self.pos += 1
        if expect is not None:
            key, _, rest = line.partition(" ")
            if key != expect:
                raise CorruptModel(self.pos, f"expected {expect!r}, found {key!r}")
            return rest
        return line

    def fields(self, expect, names):
        """Parse ``expect k1 v1 k2 v2 ...`` checking the key order."""
        parts = self.next(expect).split()
        if len(parts) != 2 * len(names) or parts[0::2] != list(names):
            raise CorruptModel(self.pos, f"malformed {expect} line")
        return dict(zip(parts[0::2], parts[1::2]))


def loads_model(text: str) -> SvmOvoModel:
    src = _Lines(text)
    head = src.next()
    magic, _, version = head.partition(" ")
    if magic != MAGIC:
        raise CorruptModel(1, "not a netsvm model file")
    try:
        version = int(version)
    except ValueError:
        raise CorruptModel(1, f"bad format version {version!r}") from None
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"model format {version} is not supported (expected {FORMAT_VERSION})")
    try:
        parts = src.next("kernel").split()
        if len(parts) != 7 or parts[1::2] != ["degree", "gamma", "coef0"]:
            raise CorruptModel(src.pos, "malformed kernel line")
        kernel = KernelSpec(parts[0], int(parts[2]), float(parts[4]), float(parts[6]))
        cf = src.fields("config", ["c", "tolerance", "max_iterations", "cache_budget", "seed", "working_set"])
        config = TrainConfig(
            kernel=kernel,
            c=float(cf["c"]),
            tolerance=float(cf["tolerance"]),
            max_iterations=int(cf["max_iterations"]),
            cache_budget=int(cf["cache_budget"]),
            seed=int(cf["seed"]),
            working_set=cf["working_set"],
        )
        labels = tuple(json.loads(src.next("labels")))
        counts = tuple(json.loads(src.next("train_class_counts")))
        sp = json.loads(src.next("split"))
        split = None if sp is None else SplitSpec(float(sp["train_percent"]), bool(sp["shuffle"]), int(sp["seed"]))
        removed = tuple(json.loads(src.next("removed")))
        enc = src.next("encoder")
        encoder = None if enc == "null" else EncoderSpec.loads(enc)
        count = int(src.next("binaries"))
        binaries = []
        for _ in range(count):
            pi, pj = (int(v) for v in src.next("binary").split())
            bias = float(src.next("bias"))
            ip = src.next("iterations").split()
            if len(ip) != 3 or ip[1] != "converged":
                raise CorruptModel(src.pos, "malformed iterations line")
            nf = src.next("nsv").split()
            if len(nf) != 3 or nf[1] != "dim":
                raise CorruptModel(src.pos, "malformed nsv line")
            nsv, dim = int(nf[0]), int(nf[2])
            coefs = np.empty(nsv)
            svs = np.empty((nsv, dim))
            for r in range(nsv):
                vals = src.next().split()
                if len(vals) != dim + 1:
                    raise CorruptModel(src.pos, f"expected {dim + 1} numbers")
                coefs[r] = float(vals[0])
                svs[r] = [float(v) for v in vals[1:]]
            binaries.append(
                SvmBinaryModel(svs, coefs, bias, kernel, (pi, pj), int(ip[0]), bool(int(ip[2])))
            )
        if src.next() != "end":
            raise CorruptModel(src.pos, "missing end marker")
    except CorruptModel:
        raise
    except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise CorruptModel(src.pos, str(exc)) from None
    return SvmOvoModel(labels, binaries, encoder, config, version, split, removed, counts)


def load_model(source) -> SvmOvoModel:
    """Read a model from a path or a readable stream."""
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")
    return loads_model(text)
