"""Independent reference solvers for the SVM dual, used only by tests.

Neither touches the decomposition solver: one enumerates every active set
exactly, the other evaluates the objective on a literal grid.
"""
import itertools

import numpy as np


def dual_objective(H, alpha):
    return 0.5 * alpha @ H @ alpha - alpha.sum()


def active_set_oracle(H, y, C, feas_tol=1e-9):
    """Exact minimum of the dual by enumerating every (0, free, C) pattern.

    For each pattern the free variables solve the equality-constrained
    stationarity system; feasible candidates are scored and the best kept.
    Every optimal face has a vertex where that system is non-singular, so
    the true optimum is always among the candidates.
    """
    n = len(y)
    best, best_alpha = np.inf, None
    for pattern in itertools.product((0, 1, 2), repeat=n):
        pattern = np.array(pattern)
        alpha = np.where(pattern == 2, C, 0.0).astype(float)
        free = np.flatnonzero(pattern == 1)
        fixed = np.flatnonzero(pattern != 1)
        if free.size:
            m = free.size
            A = np.zeros((m + 1, m + 1))
            A[:m, :m] = H[np.ix_(free, free)]
            A[:m, m] = y[free]
            A[m, :m] = y[free]
            rhs = np.empty(m + 1)
            rhs[:m] = 1.0 - H[np.ix_(free, fixed)] @ alpha[fixed]
            rhs[m] = -y[fixed] @ alpha[fixed]
            sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
            if np.max(np.abs(A @ sol - rhs)) > 1e-8:
                continue
            alpha[free] = sol[:m]
        if np.any(alpha < -feas_tol) or np.any(alpha > C + feas_tol):
            continue
        if abs(y @ alpha) > 1e-8:
            continue
        val = dual_objective(H, alpha)
        if val < best:
            best, best_alpha = val, alpha
    return best, best_alpha


def grid_oracle(H, y, C, step=1e-3, chunk=200_000):
    """Brute-force minimum over the grid ``{0, step, ..., C}^(n-1)``.

    The last multiplier is fixed by the equality constraint; grid points
    where it falls outside ``[0, C]`` are discarded. Cost grows as
    ``(C / step)^(n-1)``, so this is only usable for n = 2, 3.
    """
    n = len(y)
    ticks = np.round(np.arange(0.0, C + step / 2, step), 12)
    best = np.inf
    free_idx = np.arange(n - 1)
    total = len(ticks) ** (n - 1)
    for start in range(0, total, chunk):
        flat = np.arange(start, min(start + chunk, total))
        coords = np.array(np.unravel_index(flat, (len(ticks),) * (n - 1))).T
        a = np.zeros((coords.shape[0], n))
        a[:, free_idx] = ticks[coords]
        a[:, -1] = -(a[:, :-1] @ y[:-1]) * y[-1]
        ok = (a[:, -1] >= -1e-12) & (a[:, -1] <= C + 1e-12)
        a = a[ok]
        if a.size:
            vals = 0.5 * np.einsum("ij,jk,ik->i", a, H, a) - a.sum(axis=1)
            best = min(best, vals.min())
    return best


def random_instance(rng, n, kind):
    """Random 3-D problem with both classes present."""
    x = rng.uniform(-1, 1, size=(n, 3))
    y = rng.choice([-1, 1], size=n)
    y[0], y[1] = -1, 1
    rng.shuffle(y)
    return x, y.astype(int)
