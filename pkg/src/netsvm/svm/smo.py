"""SMO solver for the C-SVC dual and backend selection.

The dual is solved in LibSVM's minimisation form::

    min  f(a) = 1/2 a'Qa - e'a,   Q[i, j] = y_i y_j K(x_i, x_j)
    s.t. 0 <= a_i <= C,  y'a = 0

Each iteration picks the maximal violating ``i`` and the ``j`` that maximises
the second-order decrease of ``f`` (Fan, Chen & Lin 2005), then solves the
two-variable sub-problem analytically. Iteration stops when the KKT gap
``max_{I_up} -y_t G_t - min_{I_low} -y_t G_t`` falls below ``tolerance``.

Two interchangeable loops exist: the compiled one in ``_smo_core`` and
:func:`_solve_python` below. The compiled one is used when it imported
successfully, unless ``NETSVM_PURE_PYTHON`` is set in the environment.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .kernels import KernelRowCache, KernelSpec

try:
    from . import _smo_core
except ImportError:  # extension not built
    _smo_core = None

TAU = 1e-12

if _smo_core is not None and not os.environ.get("NETSVM_PURE_PYTHON"):
    DEFAULT_BACKEND = "cython"
else:
    DEFAULT_BACKEND = "python"


def available_backends():
    return ("cython", "python") if _smo_core is not None else ("python",)


@dataclass
class DualSolution:
    alpha: np.ndarray
    grad: np.ndarray
    iterations: int
    converged: bool
    backend: str

    def objective(self):
        """Dual objective in maximisation form, ``sum(a) - 1/2 a'Qa``."""
        # Q a = G + 1
        return float(0.5 * self.alpha.sum() - 0.5 * self.alpha @ self.grad)


def _solve_python(X, y, spec, C, eps, max_iter, cache_budget, alpha, G, working_set="second_order", seed=0):
    cache = KernelRowCache(spec, X, cache_budget)
    QD = cache.diagonal()
    rng = np.random.default_rng(seed) if working_set == "random" else None
    pos = y > 0
    it = 0
    while it < max_iter:
        yG = y * G
        up = np.where(pos, alpha < C, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < C)
        if not up.any():
            return it, True
        cand = np.where(up, -yG, -np.inf)
        i = int(np.argmax(cand))
        Gmax = cand[i]
        Ki = cache.row(i)
        if low.any():
            Gmax2 = float(np.max(yG[low]))
        else:
            Gmax2 = -np.inf
        gd = Gmax + yG
        ok = low & (gd > 0)
        if Gmax + Gmax2 < eps or not ok.any():
            return it, True
        if rng is not None:
            j = int(rng.choice(np.flatnonzero(ok)))
        else:
            quad = QD[i] + QD - 2.0 * Ki
            quad = np.where(quad <= 0, TAU, quad)
            obj = np.where(ok, -(gd * gd) / quad, np.inf)
            j = int(np.argmin(obj))
        it += 1
        Kj = cache.row(j)
        yi, yj = y[i], y[j]
        ai_old, aj_old = alpha[i], alpha[j]
        quad = QD[i] + QD[j] - 2.0 * Ki[j]
        if quad <= 0:
            quad = TAU
        ai, aj = ai_old, aj_old
        if yi != yj:
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ai += delta
            aj += delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            delta = (G[i] - G[j]) / quad
            s = ai + aj
            ai -= delta
            aj += delta
            if s > C:
                if ai > C:
                    ai, aj = C, s - C
            elif aj < 0:
                aj, ai = 0.0, s
            if s > C:
                if aj > C:
                    aj, ai = C, s - C
            elif ai < 0:
                ai, aj = 0.0, s
        alpha[i], alpha[j] = ai, aj
        dai = (ai - ai_old) * yi
        daj = (aj - aj_old) * yj
        G += y * (Ki * dai + Kj * daj)
    return it, False


def solve_dual(
    X,
    y,
    spec: KernelSpec,
    C=1.0,
    tolerance=1e-3,
    max_iter=10_000_000,
    cache_budget=12_500_000,
    *,
    working_set="second_order",
    seed=0,
    backend=None,
) -> DualSolution:
    """Solve the C-SVC dual for labels ``y`` in {-1, +1}.

    ``spec`` must have gamma resolved. ``working_set="random"`` picks the
    second index uniformly among improving candidates (seeded) and always
    runs on the Python loop.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = X.shape[0]
    alpha = np.zeros(n)
    G = -np.ones(n)
    if working_set not in ("second_order", "random"):
        raise ValueError(f"unknown working_set {working_set!r}")
    backend = backend or DEFAULT_BACKEND
    if working_set == "random":
        backend = "python"
    if backend == "cython":
        if _smo_core is None:
            raise RuntimeError("compiled SMO core is not available")
        capacity = max(2, int(cache_budget) // n) if n else 2
        iterations, converged = _smo_core.solve(
            X, y, spec.kind, spec.degree, spec.gamma, spec.coef0,
            float(C), float(tolerance), int(max_iter), int(capacity), alpha, G,
        )
    elif backend == "python":
        iterations, converged = _solve_python(
            X, y, spec, float(C), float(tolerance), int(max_iter), cache_budget, alpha, G,
            working_set=working_set, seed=seed,
        )
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return DualSolution(alpha, G, int(iterations), bool(converged), backend)


def compute_bias(alpha, grad, y, C):
    """Decision-function offset ``b`` so that ``f(x) = sum coef K + b``.

    Averages ``-y_i G_i`` over free multipliers; with none free, takes the
    midpoint of the interval allowed by the KKT conditions.
    """
    yG = y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        return -float(yG[free].mean()) + 0.0
    at_upper = alpha >= C
    pos = y > 0
    ub_mask = np.where(pos, ~at_upper, at_upper)
    lb_mask = np.where(pos, at_upper, ~at_upper)
    ub = float(yG[ub_mask].min()) if ub_mask.any() else np.inf
    lb = float(yG[lb_mask].max()) if lb_mask.any() else -np.inf
    if np.isinf(ub) and np.isinf(lb):
        return 0.0
    if np.isinf(ub):
        rho = lb
    elif np.isinf(lb):
        rho = ub
    else:
        rho = 0.5 * (ub + lb)
    return -rho + 0.0


def kkt_violation(alpha, grad, y, C):
    """Maximal violating-pair gap ``m(a) - M(a)`` (clipped at 0)."""
    pos = y > 0
    up = np.where(pos, alpha < C, alpha > 0)
    low = np.where(pos, alpha > 0, alpha < C)
    v = -y * grad
    if not up.any() or not low.any():
        return 0.0
    return max(0.0, float(v[up].max() - v[low].min()))
