"""Independent reference computations used only by the tests.

Nothing here imports from ``cohspec``; each routine follows a different
path from the code it checks.
"""

import cmath
import itertools
import math
from fractions import Fraction

import numpy as np


def charpoly_3x3(A):
    """Integer coefficients (c2, c1, c0) of det(t I - A) = t^3 + c2 t^2 + c1 t + c0."""
    a = [[int(v) for v in row] for row in A]
    tr = a[0][0] + a[1][1] + a[2][2]
    minors = (
        a[0][0] * a[1][1] - a[0][1] * a[1][0]
        + a[0][0] * a[2][2] - a[0][2] * a[2][0]
        + a[1][1] * a[2][2] - a[1][2] * a[2][1]
    )
    det = (
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    )
    return -tr, minors, -det


def _divisors(k):
    k = abs(k)
    if k == 0:
        return [0]
    return [d for d in range(1, k + 1) if k % d == 0]


def _quadratic(b, c):
    """Roots of t^2 + b t + c, exact when the discriminant is a square."""
    disc = b * b - 4 * c
    if isinstance(disc, int) and disc >= 0 and math.isqrt(disc) ** 2 == disc:
        s = math.isqrt(disc)
        return [Fraction(-b + s, 2), Fraction(-b - s, 2)]
    sq = cmath.sqrt(disc)
    return [(-b + sq) / 2, (-b - sq) / 2]


def cubic_roots_integer(c2, c1, c0):
    """Roots of the monic integer cubic t^3 + c2 t^2 + c1 t + c0.

    Integer roots are found exactly by the rational root theorem and
    deflated by synthetic division; a cubic with no rational root has three
    distinct roots, which Cardano's formula delivers well-conditioned.
    """
    for d in _divisors(c0):
        for cand in {d, -d}:
            if cand ** 3 + c2 * cand ** 2 + c1 * cand + c0 == 0:
                # synthetic division
                b = c2 + cand
                c = c1 + cand * b
                return [complex(cand)] + [complex(float(r.real) if isinstance(r, complex) else float(r),
                                                  r.imag if isinstance(r, complex) else 0.0)
                                          for r in _quadratic(b, c)]
    # depressed cubic t = s - c2/3
    p = c1 - c2 * c2 / 3.0
    q = 2 * c2 ** 3 / 27.0 - c2 * c1 / 3.0 + c0
    disc = (q / 2) ** 2 + (p / 3) ** 3
    shift = -c2 / 3.0
    if disc < 0:
        r = math.sqrt(-p / 3.0)
        phi = math.acos(max(-1.0, min(1.0, -q / (2 * r ** 3))))
        return [complex(2 * r * math.cos((phi + 2 * math.pi * j) / 3) + shift) for j in range(3)]
    sd = math.sqrt(disc)
    u = math.copysign(abs(-q / 2 + sd) ** (1 / 3), -q / 2 + sd)
    v = math.copysign(abs(-q / 2 - sd) ** (1 / 3), -q / 2 - sd)
    w = complex(-0.5, math.sqrt(3) / 2)
    return [u + v + shift, u * w + v * w.conjugate() + shift, u * w.conjugate() + v * w + shift]


def match_distance(computed, exact):
    """Smallest max-distance over all pairings of two equal-size multisets."""
    computed = list(computed)
    best = math.inf
    for perm in itertools.permutations(range(len(exact))):
        d = max(abs(computed[i] - exact[j]) for i, j in enumerate(perm))
        best = min(best, d)
    return best


def scalar_band(a, n):
    """Band index (1-based) of a magnitude ``a`` for a length-n unit vector."""
    m = math.ceil(0.5 * math.log(n))
    for r in range(1, m + 1):
        if math.exp(-r) < a <= math.exp(-r + 1):
            return r
    return m + 1


def enumerate_expectation(fn, support, n_entries):
    """Brute-force expectation of fn(values) over iid discrete entries.

    Plain nested iteration with float products of probabilities; slow but
    shares no code with the vectorized oracle in the package.
    """
    vals = [v for v, _ in support]
    probs = [p for _, p in support]
    total = 0.0
    for combo in itertools.product(range(len(vals)), repeat=n_entries):
        w = 1.0
        for c in combo:
            w *= probs[c]
        total += w * fn([vals[c] for c in combo])
    return total


def mat_from_entries(entries, n):
    return np.array(entries, dtype=float).reshape(n, n)


def sym_from_upper(entries, n):
    W = np.zeros((n, n))
    it = iter(entries)
    for i in range(n):
        for j in range(i, n):
            W[i, j] = W[j, i] = next(it)
    return W


# ---------------------------------------------------------------------------
# direct high-precision transcriptions of the bound formulas (mpmath, no logs)

import mpmath as mp

mp.mp.dps = 50


def _L(n):
    return mp.log(mp.mpf(n))


def mp_k0(mu, a_inf, sigma, B, n):
    L = _L(n)
    num = mp.log(mu) + 2 * mp.log(a_inf)
    den = 2 * mp.log(mp.mpf(sigma) / B) + L - 3 * mp.log(L)
    return max(0, int(mp.ceil(num / den)))


def mp_master_rank_one(sigma, B, n, mu, lam, a_inf):
    L = _L(n)
    k0 = mp_k0(mu, a_inf, sigma, B, n)
    pre = L**2 / mp.sqrt(n)
    b = pre * B * a_inf * mp.sqrt(mu) * L**3 / abs(lam)
    s = pre * (sigma * mp.sqrt(n) * L**mp.mpf(1.5) / abs(lam)) ** k0
    return s, b


def mp_eigenvalue_rank_one(sigma, B, n, mu, lam):
    L = _L(n)
    k0 = mp_k0(mu, mp.sqrt(mp.mpf(mu) / n), sigma, B, n)
    b = B * mu * L**5 / n
    s = (sigma * mp.sqrt(n) * L**mp.mpf(1.5) / abs(lam)) ** k0 * abs(lam) * L**2 / mp.sqrt(n)
    return s, b


def mp_moment(n, k, p, sigma, B, Nx, Ny, x_inf, y_inf):
    n, sigma, B = mp.mpf(n), mp.mpf(sigma), mp.mpf(B)
    kp = k * p
    common = mp.mpf(2) ** ((k + 1) * p) * mp.mpf(kp) ** kp * p * (mp.mpf(x_inf) * y_inf) ** p
    s = sigma ** kp * n ** (mp.mpf(kp) / 2) * (mp.mpf(Nx) * Ny) ** (mp.mpf(p) / 2) / (n ** (mp.mpf(p) / 2) * mp.mpf(kp) ** (mp.mpf(kp) / 2))
    b = B ** (p * k) * sigma ** (2 * k) * n ** k * Nx * Ny / (B ** (2 * k) * n * mp.mpf(kp) ** k)
    return common * s, common * b


def mp_highprob_sparse(n, k, sigma, B, Nx, Ny, x_inf, y_inf):
    L = _L(n)
    c = mp.mpf(x_inf) * y_inf
    s = c * (sigma**2 * n * L**3) ** (mp.mpf(k) / 2) * mp.sqrt(mp.mpf(Nx) * Ny / n)
    b = c * (B * L**3) ** k
    return s, b


def mp_highprob_unit(n, k, sigma, B, x_inf, y_inf, c=1):
    L = _L(n)
    s = mp.mpf(c) ** k * L**2 * mp.sqrt((sigma**2 * n * L**3) ** k / mp.mpf(n))
    b = mp.mpf(c) ** k * L**2 * (B * L**3) ** k * x_inf * y_inf
    return s, b


def mp_mean(n, k, sigma, B):
    L = _L(n)
    pre = L**2 * mp.mpf(2 * k) ** k
    b = pre * mp.mpf(sigma) ** 2 * mp.mpf(B) ** (k - 2) / k
    s = pre * (mp.mpf(sigma) ** 2 * n / k) ** (mp.mpf(k) / 2 - 2)
    return s, b


def mp_linear(sigma, B, n, x_inf, y_inf):
    L = _L(n)
    return sigma * mp.sqrt(L), mp.mpf(x_inf) * y_inf * B * L


def mp_rank_r_master(sigma, B, n, mu, lmin, lmax, r, a_inf):
    L = _L(n)
    kappa = mp.mpf(lmax) / lmin
    k0 = mp_k0(mu, a_inf, sigma, B, n)
    pre = mp.sqrt(kappa**2 * r * L**4 / n)
    b = pre * mp.sqrt(mu) * B * L**3 * a_inf / lmin
    s = pre * (sigma * mp.sqrt(n * L**3) / lmin) ** k0
    return s, b


def mp_rank_r_eigenvalue(sigma, B, n, mu, lmax, kappa, r):
    L = _L(n)
    k0 = mp_k0(mu, mp.sqrt(mp.mpf(mu) / n), sigma, B, n)
    b = r**2 * kappa * mu * B * L**3 / n
    s = r**2 * (kappa * sigma * mp.sqrt(n * L**3)) ** k0 / (mp.mpf(lmax) ** (k0 - 1) * mp.sqrt(n))
    return s, b
