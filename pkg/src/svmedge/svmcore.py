"""Soft-margin kernel SVM: dual QP solver, bias, decision function.

The dual problem solved is::

    min_a  1/2 a^T H a - sum(a)
    s.t.   sum_i a_i y_i = 0,   0 <= a_i <= C

with ``H[i, j] = y_i y_j k(x_i, x_j)``. The solver is a pairwise working-set
decomposition: each iteration picks the maximal violating pair and solves
the resulting two-variable subproblem analytically.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .kernels import KernelSpec, as_vectors, centroid_of, gram_matrix, kernel_matrix

# curvature floor for degenerate (flat) pair directions
TAU = 1e-12
# rows per block in decision_values; fixed so results never depend on batching
DECISION_BLOCK = 1024


class SingleClassError(ValueError):
    """Training data contains only one class."""


class ConvergenceError(RuntimeError):
    """The solver hit ``max_iter`` before reaching the KKT tolerance.

    The partial (still feasible) solution is kept in :attr:`solution`.
    """

    def __init__(self, message, solution):
        super().__init__(message)
        self.solution = solution


@dataclass(frozen=True, eq=False)
class TrainingSet:
    """Feature vectors with +1/-1 labels and a provenance tag."""

    vectors: np.ndarray
    labels: np.ndarray
    source: str = ""

    def __post_init__(self):
        x = as_vectors(self.vectors)
        y = np.asarray(self.labels).ravel()
        if y.shape[0] != x.shape[0]:
            raise ValueError(f"{x.shape[0]} vectors but {y.shape[0]} labels")
        if x.shape[0] < 2:
            raise ValueError("a training set needs at least two samples")
        if not np.all((y == 1) | (y == -1)):
            raise ValueError("labels must be +1 or -1")
        x = x.copy()
        y = y.astype(np.int64)
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "vectors", x)
        object.__setattr__(self, "labels", y)

    def __len__(self):
        return self.labels.shape[0]

    @property
    def n_positive(self) -> int:
        return int(np.sum(self.labels == 1))

    @property
    def n_negative(self) -> int:
        return int(np.sum(self.labels == -1))


@dataclass(frozen=True, eq=False)
class QpSolution:
    """Dual solution. ``kkt_residual`` is the maximal violating pair gap."""

    alphas: np.ndarray
    objective: float
    iterations: int
    kkt_residual: float


@dataclass(frozen=True, eq=False)
class SvmModel:
    """Trained classifier: support vectors, dual coefficients and bias."""

    support_vectors: np.ndarray
    alphas: np.ndarray
    sv_labels: np.ndarray
    bias: float
    kernel: KernelSpec
    c_param: float
    training_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        sv = as_vectors(self.support_vectors)
        a = np.asarray(self.alphas, dtype=np.float64).ravel()
        y = np.asarray(self.sv_labels).ravel().astype(np.int64)
        if sv.shape[0] == 0:
            raise ValueError("a model needs at least one support vector")
        if not (a.shape[0] == y.shape[0] == sv.shape[0]):
            raise ValueError("support vectors, alphas and labels differ in length")
        if not np.all((y == 1) | (y == -1)):
            raise ValueError("support-vector labels must be +1 or -1")
        c = float(self.c_param)
        if not (np.isfinite(c) and c > 0):
            raise ValueError(f"C must be positive, got {self.c_param!r}")
        if not np.all(np.isfinite(a)) or np.any(a <= 0) or np.any(a > c * (1 + 1e-12)):
            raise ValueError("alphas must lie in (0, C]")
        if abs(float(np.dot(a, y))) > 1e-6:
            raise ValueError("sum(alpha * y) must vanish")
        if not np.isfinite(self.bias):
            raise ValueError("bias must be finite")
        if self.kernel.kind == "centroid" and self.kernel.centroid is None:
            raise ValueError("centroid kernel in a model must carry its centroid")
        for name, arr in (("support_vectors", sv), ("alphas", a), ("sv_labels", y)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "bias", float(self.bias))
        object.__setattr__(self, "c_param", c)
        object.__setattr__(self, "_coef", a * y)

    @property
    def n_support(self) -> int:
        return self.alphas.shape[0]


def _check_two_classes(y):
    if not (np.any(y == 1) and np.any(y == -1)):
        raise SingleClassError("training data must contain both classes")


def _objective(alpha, grad):
    # grad = H a - 1, so 1/2 a^T H a - sum(a) = 1/2 a^T (grad - 1)
    return 0.5 * float(np.dot(alpha, grad - 1.0))


def _select_pair(alpha, y, grad, C):
    """Maximal violating pair; lowest index wins ties."""
    score = -y * grad
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
    s_up = np.where(up, score, -np.inf)
    s_low = np.where(low, score, np.inf)
    i = int(np.argmax(s_up))
    j = int(np.argmin(s_low))
    return i, j, float(s_up[i] - s_low[j])


def _pair_update(alpha, y, grad, H, i, j, C):
    """Solve the two-variable subproblem in place; return the alpha deltas."""
    ai, aj = alpha[i], alpha[j]
    if y[i] != y[j]:
        quad = H[i, i] + H[j, j] + 2.0 * H[i, j]
        if quad <= 0:
            quad = TAU
        delta = (-grad[i] - grad[j]) / quad
        diff = ai - aj
        new_i, new_j = ai + delta, aj + delta
        if diff > 0:
            if new_j < 0:
                new_j, new_i = 0.0, diff
        elif new_i < 0:
            new_i, new_j = 0.0, -diff
        if diff > 0:
            if new_i > C:
                new_i, new_j = C, C - diff
        elif new_j > C:
            new_j, new_i = C, C + diff
    else:
        quad = H[i, i] + H[j, j] - 2.0 * H[i, j]
        if quad <= 0:
            quad = TAU
        delta = (grad[i] - grad[j]) / quad
        total = ai + aj
        new_i, new_j = ai - delta, aj + delta
        if total > C:
            if new_i > C:
                new_i, new_j = C, total - C
        elif new_j < 0:
            new_j, new_i = 0.0, total
        if total > C:
            if new_j > C:
                new_j, new_i = C, total - C
        elif new_i < 0:
            new_i, new_j = 0.0, total
    alpha[i], alpha[j] = new_i, new_j
    return new_i - ai, new_j - aj


def solve_dual(ts: TrainingSet, kernel: KernelSpec, C: float = 10.0,
               tol: float = 1e-3, max_iter: Optional[int] = None,
               callback: Optional[Callable[[int, np.ndarray, float], None]] = None
               ) -> QpSolution:
    """Solve the box- and equality-constrained SVM dual.

    Parameters
    ----------
    ts : TrainingSet
        Must contain both classes.
    kernel : KernelSpec
        A centroid kernel must already carry its centroid.
    C : float
        Box bound on every multiplier.
    tol : float
        Stop when the maximal violating pair gap drops to ``tol``.
    max_iter : int, optional
        Defaults to ``100 * len(ts)``.
    callback : callable, optional
        Called as ``callback(iteration, alphas, objective)`` after every
        pair update; ``alphas`` is the live array and must not be modified.

    Raises
    ------
    SingleClassError
        If only one class is present.
    ConvergenceError
        If ``max_iter`` is exhausted; carries the partial solution.
    """
    C = float(C)
    if not (np.isfinite(C) and C > 0):
        raise ValueError(f"C must be positive, got {C!r}")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    y = ts.labels.astype(np.float64)
    _check_two_classes(y)
    n = y.shape[0]
    if max_iter is None:
        max_iter = 100 * n
    H = gram_matrix(kernel, ts.vectors, y)

    alpha = np.zeros(n)
    grad = -np.ones(n)
    it = 0
    i, j, gap = _select_pair(alpha, y, grad, C)
    while gap > tol and it < max_iter:
        d_i, d_j = _pair_update(alpha, y, grad, H, i, j, C)
        grad += H[i] * d_i + H[j] * d_j
        it += 1
        if callback is not None:
            callback(it, alpha, _objective(alpha, grad))
        i, j, gap = _select_pair(alpha, y, grad, C)

    sol = QpSolution(alphas=alpha, objective=_objective(alpha, grad),
                     iterations=it, kkt_residual=max(gap, 0.0))
    if gap > tol:
        raise ConvergenceError(
            f"no convergence after {it} iterations (KKT gap {gap:.3g} > tol {tol:g})", sol)
    return sol


def _bias_terms(ts, kernel, alphas):
    # beta_i = y_i - sum_j a_j y_j k(x_j, x_i): the bias that puts x_i on its margin
    y = ts.labels.astype(np.float64)
    s = kernel_matrix(kernel, ts.vectors) @ (alphas * y)
    return y - s


def _bias_from_terms(beta, y, alphas, C, eps):
    free = (alphas > eps) & (alphas < C - eps)
    if np.any(free):
        return float(np.mean(beta[free]))
    at_zero = alphas <= eps
    at_c = ~at_zero
    # at zero: y f >= 1; at C: y f <= 1
    lower = (at_zero & (y > 0)) | (at_c & (y < 0))
    upper = (at_zero & (y < 0)) | (at_c & (y > 0))
    lb = np.max(beta[lower]) if np.any(lower) else None
    ub = np.min(beta[upper]) if np.any(upper) else None
    if lb is None:
        return float(ub)
    if ub is None:
        return float(lb)
    return float(0.5 * (lb + ub))


def compute_bias(ts: TrainingSet, kernel: KernelSpec, sol: QpSolution, C: float,
                 eps: float = 1e-8) -> float:
    """Bias ``b`` of the decision function.

    Averages ``y_i - sum_j a_j y_j k(x_j, x_i)`` over unbounded support
    vectors (``eps < a_i < C - eps``). Without any, returns the midpoint of
    the interval of biases allowed by the bounded multipliers.
    """
    alphas = np.asarray(sol.alphas, dtype=np.float64)
    if not np.any(alphas > eps):
        raise ValueError("no support vectors: bias is undefined")
    beta = _bias_terms(ts, kernel, alphas)
    return _bias_from_terms(beta, ts.labels, alphas, float(C), eps)


def decision_values(model: SvmModel, x) -> np.ndarray:
    """Raw decision values ``sum_i a_i y_i k(sv_i, x) + b`` for rows of ``x``."""
    x = as_vectors(x)
    out = np.empty(x.shape[0])
    for start in range(0, x.shape[0], DECISION_BLOCK):
        stop = start + DECISION_BLOCK
        k = kernel_matrix(model.kernel, x[start:stop], model.support_vectors)
        out[start:stop] = k @ model._coef + model.bias
    return out


def decision_value(model: SvmModel, x) -> float:
    """Raw decision value at a single feature vector (not its sign)."""
    return float(decision_values(model, x)[0])


def train(ts: TrainingSet, kernel: KernelSpec, C: float = 10.0, tol: float = 1e-3,
          max_iter: Optional[int] = None, alpha_cutoff: float = 1e-8,
          meta: Optional[dict] = None) -> SvmModel:
    """Fit an SVM: solve the dual, compute the bias, keep the support vectors.

    For a centroid kernel the center of gravity of ``ts.vectors`` is
    computed here and frozen into the model's kernel.
    """
    if kernel.kind == "centroid":
        kernel = kernel.with_centroid(centroid_of(ts.vectors))
    t0 = time.perf_counter()
    sol = solve_dual(ts, kernel, C, tol, max_iter)
    bias = compute_bias(ts, kernel, sol, C, eps=alpha_cutoff)
    keep = sol.alphas > alpha_cutoff
    info = dict(meta or {})
    info.update(n_train=len(ts), iterations=sol.iterations,
                kkt_residual=sol.kkt_residual, objective=sol.objective,
                source=ts.source, train_seconds=time.perf_counter() - t0,
                trained_at=time.strftime("%Y-%m-%dT%H:%M:%S"))
    return SvmModel(support_vectors=ts.vectors[keep], alphas=sol.alphas[keep],
                    sv_labels=ts.labels[keep], bias=bias, kernel=kernel,
                    c_param=C, training_meta=info)


@dataclass(frozen=True)
class KktReport:
    """Worst KKT violation per multiplier class, and overall."""

    at_zero: float
    free: float
    at_bound: float
    bias: float
    tol: float

    @property
    def max_violation(self) -> float:
        return max(self.at_zero, self.free, self.at_bound)

    @property
    def ok(self) -> bool:
        return self.max_violation <= self.tol


def kkt_check(ts: TrainingSet, kernel: KernelSpec, sol, C: float, tol: float = 1e-3,
              eps: float = 1e-8) -> KktReport:
    """Check margin conditions of a dual solution.

    Each multiplier is classed as 0, free or C and its margin ``y_i f(x_i)``
    checked against ``>= 1``, ``== 1`` and ``<= 1`` respectively. ``sol`` may
    be a :class:`QpSolution` or a bare alpha array.
    """
    alphas = np.asarray(getattr(sol, "alphas", sol), dtype=np.float64)
    if alphas.shape[0] != len(ts):
        raise ValueError("solution and training set differ in length")
    C = float(C)
    y = ts.labels.astype(np.float64)
    beta = _bias_terms(ts, kernel, alphas)
    b = _bias_from_terms(beta, y, alphas, C, eps)
    margin = y * (b - beta) + 1.0
    at_zero = alphas <= eps
    at_c = alphas >= C - eps
    free = ~at_zero & ~at_c

    def worst(v, mask):
        return float(np.max(v[mask], initial=0.0))

    return KktReport(at_zero=worst(1.0 - margin, at_zero),
                     free=worst(np.abs(margin - 1.0), free),
                     at_bound=worst(margin - 1.0, at_c & ~at_zero),
                     bias=b, tol=tol)
