"""
Watching a perturbed eigenvector converge as a power series
===========================================================

A rank-one signal ``lambda* u* u*^T`` plus symmetric noise ``W`` has a
leading eigenvector ``u`` that can be written exactly as a series in
``W / lambda``. This script builds one instance, sums the series term by
term and prints how fast the truncation error falls.

Run with ``python3 demos/neumann_series.py``.
"""

# %%
# Build the instance. The noise is rescaled so that ``||W|| = 0.3 lambda*``.
import numpy as np

from cohspec.eigen import leading_eigenpair
from cohspec.linalg import RandomSource, operator_norm
from cohspec.neumann import neumann_partial_sums, neumann_tail_bound
from cohspec.noise import symmetrize
from cohspec.signal import make_signal

n = 100
src = RandomSource(7)
u_star = src.sphere(n)
spec, M_star = make_signal([1.0], u_star)
W = symmetrize(src.standard_normal((n, n)))
W *= 0.3 / operator_norm(W)
h = operator_norm(W)

lam, u = leading_eigenpair(M_star + W, tol=1e-15, max_iter=100000, src=src.spawn(1))
print(f"lambda_hat = {lam:.6f}, ||W|| = {h:.4f}, ratio = {h / abs(lam):.4f}")

# %%
# Partial sums. The guaranteed tail is geometric with ratio ``||W|| / |lambda|``;
# the observed error tracks it until it reaches rounding level.
sums = neumann_partial_sums(W, spec, lam, u, 40, h_norm=h)
print(" K   error       guaranteed")
for K in (0, 2, 5, 10, 15, 20, 25, 30, 40):
    err = np.linalg.norm(sums[K] - u)
    print(f"{K:2d}   {err:.3e}   {neumann_tail_bound(spec, lam, h, K):.3e}")

# %%
# Successive error ratios settle near ``||W|| / |lambda|``.
errs = np.linalg.norm(sums - u, axis=1)
ratios = errs[3:20] / errs[2:19]
print("median step ratio:", f"{np.median(ratios):.4f}")
