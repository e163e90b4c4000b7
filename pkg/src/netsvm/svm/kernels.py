"""LibSVM kernel definitions and a bounded LRU cache of Gram rows."""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch

LINEAR, POLYNOMIAL, RBF, SIGMOID = 0, 1, 2, 3
KERNEL_NAMES = {LINEAR: "linear", POLYNOMIAL: "polynomial", RBF: "rbf", SIGMOID: "sigmoid"}
KERNEL_CODES = {v: k for k, v in KERNEL_NAMES.items()}
KERNEL_CODES.update({"poly": POLYNOMIAL})


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus parameters, LibSVM ``-K/-D/-G/-R`` semantics.

    ``gamma == 0`` means "auto": resolved to ``1/D`` by :meth:`resolved`.
    """

    kind: int = RBF
    degree: int = 3
    gamma: float = 0.0
    coef0: float = 0.0

    def __post_init__(self):
        kind = self.kind
        if isinstance(kind, str):
            try:
                kind = KERNEL_CODES[kind.lower()]
            except KeyError:
                raise ValueError(f"unknown kernel {self.kind!r}") from None
            object.__setattr__(self, "kind", kind)
        if kind not in KERNEL_NAMES:
            raise ValueError(f"kernel code must be 0-3, got {kind}")
        if int(self.degree) < 1:
            raise ValueError("degree must be >= 1")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        object.__setattr__(self, "degree", int(self.degree))
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "coef0", float(self.coef0))

    @property
    def name(self):
        return KERNEL_NAMES[self.kind]

    def resolved(self, dimension):
        if self.gamma > 0:
            return self
        g = 1.0 / dimension if dimension > 0 else 1.0
        return KernelSpec(self.kind, self.degree, g, self.coef0)

    def flags(self):
        return f"-K {self.kind} -D {self.degree} -G {self.gamma!r} -R {self.coef0!r}"


def kernel_eval(spec: KernelSpec, x, z) -> float:
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape != z.shape or x.ndim != 1:
        raise DimensionMismatch(f"vectors of shape {x.shape} and {z.shape}")
    if spec.gamma == 0:
        spec = spec.resolved(x.shape[0])
    return float(kernel_matrix(spec, x[None, :], z[None, :])[0, 0])


def kernel_matrix(spec: KernelSpec, A, B) -> np.ndarray:
    """``K[i, j] = k(A[i], B[j])``; gamma must already be resolved."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatch(f"{A.shape[1]} vs {B.shape[1]} features")
    dot = A @ B.T
    g = spec.gamma
    if spec.kind == LINEAR:
        return dot
    if spec.kind == POLYNOMIAL:
        return (g * dot + spec.coef0) ** spec.degree
    if spec.kind == SIGMOID:
        return np.tanh(g * dot + spec.coef0)
    sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * dot
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-g * sq)


class KernelRowCache:
    """LRU cache of full Gram rows ``K[i, :]`` for one training problem.

    ``budget`` is counted in matrix entries; at least two rows are always held
    because an SMO step needs both rows of its working pair.
    """

    def __init__(self, spec, X, budget):
        self.spec = spec
        self.X = X
        self.sqnorm = (X * X).sum(1)
        n = X.shape[0]
        self.capacity = max(2, int(budget) // n if n else 2)
        self._rows = OrderedDict()
        self.hits = 0
        self.misses = 0

    def _compute(self, i):
        X = self.X
        dot = X @ X[i]
        s = self.spec
        if s.kind == LINEAR:
            return dot
        if s.kind == POLYNOMIAL:
            return (s.gamma * dot + s.coef0) ** s.degree
        if s.kind == SIGMOID:
            return np.tanh(s.gamma * dot + s.coef0)
        sq = self.sqnorm + self.sqnorm[i] - 2.0 * dot
        return np.exp(-s.gamma * np.maximum(sq, 0.0))

    def row(self, i):
        r = self._rows.get(i)
        if r is not None:
            self._rows.move_to_end(i)
            self.hits += 1
            return r
        self.misses += 1
        r = self._compute(i)
        self._rows[i] = r
        if len(self._rows) > self.capacity:
            self._rows.popitem(last=False)
        return r

    def diagonal(self):
        s = self.spec
        if s.kind == RBF:
            return np.ones(self.X.shape[0])
        d = self.sqnorm
        if s.kind == LINEAR:
            return d.copy()
        if s.kind == POLYNOMIAL:
            return (s.gamma * d + s.coef0) ** s.degree
        return np.tanh(s.gamma * d + s.coef0)
