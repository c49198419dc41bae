"""
Exact moments of random bilinear forms
======================================

With a handful of entries and a finite noise distribution every noise
matrix can be listed, so expectations such as ``E[x^T H^k y]`` are exact.
This script compares those exact numbers with the closed-form moment
bound and checks a few identities that hold for symmetric noise.
"""

# %%
import numpy as np

from cohspec.bounds import moment_bound_thm2, sym_mean_bound_lem5
from cohspec.noise import DiscreteDist
from cohspec.oracle import (
    exact_bilinear_mean,
    exact_centered_moment,
    exact_trace_moment,
    identity_suite,
)

rad = DiscreteDist.rademacher()
n = 3
x = np.ones(n) / np.sqrt(n)

# %%
# Means and centered moments against the bound. The bound is loose by many
# orders of magnitude at this size, which is expected for a worst-case
# inequality with every constant set to 1.
for k in (2, 3):
    mean = exact_bilinear_mean(x, x, k, rad, n)
    for p in (2, 4):
        cm = exact_centered_moment(x, x, k, p, rad, n)
        bound = moment_bound_thm2(n, k, p, rad.sigma, rad.B, n, n, x.max(), x.max()).total
        print(f"k={k} p={p}: mean {mean:+.4f}  centered {cm:.4e}  bound {bound:.3e}")

# %%
# Symmetric noise: odd traces vanish and even traces sit below the Catalan bound.
for k in (1, 2, 3, 4):
    tr = exact_trace_moment(k, rad, n)
    print(f"E tr W^{k} = {tr:+.4f}   Catalan bound x n = {n * sym_mean_bound_lem5(n, k, 1.0):.1f}")

rows, ratios = identity_suite(n=n)
for name, ok, err in rows:
    print(f"{'PASS' if ok else 'FAIL'}  {name}  (max error {err:.1e})")
