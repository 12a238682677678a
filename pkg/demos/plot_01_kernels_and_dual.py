"""
Kernels and the dual solver
===========================

A tour of the kernel family and of the pairwise decomposition solver on
problems small enough to check by hand.
"""
import numpy as np

from svmedge import KernelSpec, TrainingSet, centroid_of, kernel_eval, kernel_matrix, solve_dual, train
from svmedge.svmcore import decision_value, kkt_check

###############################################################################
# The Gaussian kernel on 3-vectors. With sigma = 0.6, two points a unit
# apart have similarity exp(-1/0.72).

rbf = KernelSpec("rbf3", sigma=0.6)
print("k(0, e3)      =", kernel_eval(rbf, (0, 0, 0), (0, 0, 1)))
print("exp(-1/0.72)  =", np.exp(-1 / 0.72))

###############################################################################
# The centroid kernel measures each vector's distance to a center of gravity
# and multiplies the two Gaussian weights. It is rank one, so
# k(u, v)^2 == k(u, u) k(v, v).

pts = np.random.default_rng(0).uniform(-1, 1, (6, 3))
cen = KernelSpec("centroid", 0.6, centroid=tuple(centroid_of(pts)))
K = kernel_matrix(cen, pts)
print("centroid kernel rank:", np.linalg.matrix_rank(K))

###############################################################################
# Two points, one per class. By symmetry both multipliers are equal and
# solve a one-variable problem: a = 1 / (1 - k12).

ts = TrainingSet([(0, 0, 0), (0, 0, 1)], [-1, 1])
sol = solve_dual(ts, rbf, C=10.0, tol=1e-9)
print("alphas:", sol.alphas, "expected:", 1 / (1 - np.exp(-1 / 0.72)))
print("KKT check:", kkt_check(ts, rbf, sol, 10.0))

model = train(ts, rbf, C=10.0, tol=1e-9)
print("f(x1) =", decision_value(model, (0, 0, 0)), " f(x2) =", decision_value(model, (0, 0, 1)))

###############################################################################
# The objective never increases between pair updates. A callback sees
# every iterate.

x = np.random.default_rng(1).uniform(-1, 1, (60, 3))
y = np.where(x[:, 0] + 0.3 * x[:, 1] > 0, 1, -1)
trace = []
solve_dual(TrainingSet(x, y), rbf, C=1.0, tol=1e-6, max_iter=100000,
           callback=lambda it, a, obj: trace.append(obj))
print(f"{len(trace)} updates, objective {trace[0]:.4f} -> {trace[-1]:.4f}, "
      f"monotone: {bool(np.all(np.diff(trace) <= 1e-12))}")
