"""Exact expectations over discrete noise by full enumeration.

For tiny ``n`` every assignment of the noise entries is visited once and
weighted by its probability, so moments of ``x^T H^k y`` come out exact up
to floating-point rounding. The state space is split by the value of the
first entry; partitions may run on worker threads and are summed in fixed
order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bounds import moment_bound_thm2, sym_mean_bound_lem5
from .linalg import RandomSource, as_vector
from .neumann import bilinear_powers
from .noise import DiscreteDist, NoiseSpec

__all__ = [
    "DiscreteDist",
    "MomentReport",
    "BudgetExceeded",
    "DEFAULT_BUDGET",
    "state_count",
    "exact_bilinear_mean",
    "exact_centered_moment",
    "exact_symmetric_moment",
    "exact_trace_moment",
    "moment_check_report",
    "mc_deviation_quantiles",
    "identity_suite",
    "moment_check_grid",
]

DEFAULT_BUDGET = 10**6


class BudgetExceeded(RuntimeError):
    """The enumeration would visit more states than allowed."""


@dataclass(frozen=True)
class MomentReport:
    exact_mean: float
    exact_centered_p: float
    bound_value: float
    ratio: float


def _dist(d) -> DiscreteDist:
    return d if isinstance(d, DiscreteDist) else DiscreteDist(tuple(d))


def state_count(n: int, support_size: int, symmetric: bool = False) -> int:
    entries = n * (n + 1) // 2 if symmetric else n * n
    return support_size**entries


def _partitions(dist: DiscreteDist, n_entries: int, budget: int):
    """Yield ``(values, weights)`` blocks, one per value of the first entry."""
    keep = dist.probs > 0
    vals = dist.values[keep]
    probs = dist.probs[keep]
    s = vals.size
    total = s**n_entries
    if total > budget:
        raise BudgetExceeded(
            f"{s}^{n_entries} = {total} states exceeds the budget of {budget}"
        )
    use_log = s > 2
    logp = np.log(probs)
    rest = n_entries - 1
    if rest > 0:
        tail = np.indices((s,) * rest).reshape(rest, -1).T
    else:
        tail = np.zeros((1, 0), dtype=np.int64)
    for d in range(s):
        idx = np.concatenate([np.full((tail.shape[0], 1), d), tail], axis=1)
        if use_log:
            w = np.exp(logp[idx].sum(axis=1))
        else:
            w = probs[idx].prod(axis=1)
        yield vals[idx], w


def _matrices(entries: np.ndarray, n: int, symmetric: bool) -> np.ndarray:
    S = entries.shape[0]
    if not symmetric:
        return entries.reshape(S, n, n)
    W = np.zeros((S, n, n))
    iu = np.triu_indices(n)
    W[:, iu[0], iu[1]] = entries
    W[:, iu[1], iu[0]] = entries
    return W


def _collect(dist, n, symmetric, fn, budget, workers=1):
    """Values of ``fn(batch_of_matrices)`` with their weights, in fixed order."""
    dist = _dist(dist)
    n_entries = n * (n + 1) // 2 if symmetric else n * n

    def job(block):
        ent, w = block
        return fn(_matrices(ent, n, symmetric)), w

    blocks = list(_partitions(dist, n_entries, budget))
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, blocks))
    else:
        parts = [job(b) for b in blocks]
    vals = np.concatenate([v for v, _ in parts])
    wts = np.concatenate([w for _, w in parts])
    return vals, wts


def _powers(Hs: np.ndarray, k: int) -> np.ndarray:
    n = Hs.shape[1]
    P = np.broadcast_to(np.eye(n), Hs.shape).copy()
    for _ in range(k):
        P = P @ Hs
    return P


def _bilinear(x, y, k):
    def fn(Hs):
        w = np.broadcast_to(y, (Hs.shape[0], y.size)).copy()
        for _ in range(k):
            w = np.einsum("sij,sj->si", Hs, w)
        return w @ x

    return fn


def _vectors(x, y, n):
    x = as_vector(x)
    y = as_vector(y)
    if x.size != n or y.size != n:
        raise ValueError(f"x and y must have length n = {n}")
    return x, y


def exact_bilinear_mean(x, y, k: int, dist, n: int, budget: int = DEFAULT_BUDGET, workers: int = 1) -> float:
    """``E[x^T H^k y]`` over all assignments of an ``n x n`` iid matrix."""
    x, y = _vectors(x, y, n)
    v, w = _collect(dist, n, False, _bilinear(x, y, k), budget, workers)
    return float(w @ v)


def exact_centered_moment(x, y, k: int, p: int, dist, n: int, budget: int = DEFAULT_BUDGET, workers: int = 1) -> float:
    """``E[(Z - E Z)^p]`` with ``Z = x^T H^k y``."""
    if int(p) != p or p < 1:
        raise ValueError("p must be a positive integer")
    x, y = _vectors(x, y, n)
    v, w = _collect(dist, n, False, _bilinear(x, y, k), budget, workers)
    m = w @ v
    return float(w @ (v - m) ** p)


def exact_symmetric_moment(
    x, y, k: int, dist, n: int, include_offdiag_only: bool = False,
    budget: int = DEFAULT_BUDGET, workers: int = 1,
) -> float:
    """``E[x^T W^k y]`` for symmetric ``W`` with iid upper-triangle entries.

    With ``include_offdiag_only`` the diagonal of ``W^k`` is zeroed before
    the bilinear form is taken.
    """
    x, y = _vectors(x, y, n)

    def fn(Ws):
        P = _powers(Ws, k)
        if include_offdiag_only:
            P[:, np.arange(n), np.arange(n)] = 0.0
        return np.einsum("i,sij,j->s", x, P, y)

    v, w = _collect(dist, n, True, fn, budget, workers)
    return float(w @ v)


def exact_trace_moment(k: int, dist, n: int, budget: int = DEFAULT_BUDGET, workers: int = 1) -> float:
    """``E[tr(W^k)]`` for symmetric ``W`` with iid upper-triangle entries."""

    def fn(Ws):
        return np.trace(_powers(Ws, k), axis1=1, axis2=2)

    v, w = _collect(dist, n, True, fn, budget, workers)
    return float(w @ v)


def moment_check_report(x, y, k: int, p: int, dist, n: int, budget: int = DEFAULT_BUDGET) -> MomentReport:
    """Exact centered moment next to the asymmetric moment bound."""
    dist = _dist(dist)
    x, y = _vectors(x, y, n)
    mean = exact_bilinear_mean(x, y, k, dist, n, budget)
    cm = exact_centered_moment(x, y, k, p, dist, n, budget)
    bound = moment_bound_thm2(
        n, k, p, dist.sigma, dist.B,
        np.count_nonzero(x), np.count_nonzero(y),
        float(np.max(np.abs(x))), float(np.max(np.abs(y))),
    ).total
    ratio = cm / bound if bound > 0 else (0.0 if cm == 0 else math.inf)
    return MomentReport(mean, cm, bound, ratio)


def mc_deviation_quantiles(model: NoiseSpec, x, y, k: int, trials: int, quantiles, src: RandomSource) -> np.ndarray:
    """Empirical quantiles of ``|x^T H^k y - mean|`` over ``trials`` draws.

    The mean is the sample mean of the same draws.
    """
    if trials < 100:
        raise ValueError("trials must be >= 100")
    x = as_vector(x)
    y = as_vector(y)
    n = x.size
    vals = np.empty(trials)
    for t in range(trials):
        H, _ = model.sample(n, src)
        vals[t] = bilinear_powers(H, x, y, k)[k]
    dev = np.abs(vals - vals.mean())
    return np.quantile(dev, np.asarray(quantiles, dtype=float))


# ---------------------------------------------------------------------------
# verification suites


def _pairs(n: int, count: int = 5):
    e1 = np.zeros(n)
    e1[0] = 1.0
    flat = np.full(n, 1.0 / math.sqrt(n))
    ramp = np.arange(1, n + 1, dtype=float)
    ramp /= np.linalg.norm(ramp)
    alt = np.array([(-1.0) ** i for i in range(n)]) / math.sqrt(n)
    en = np.zeros(n)
    en[-1] = 1.0
    cands = [(e1, e1), (flat, flat), (e1, flat), (ramp, alt), (en, ramp)]
    return cands[:count]


def identity_suite(n: int = 3, dist=None, ks=(1, 2, 3, 4), n_pairs: int = 5, tol: float = 1e-12,
                   budget: int = DEFAULT_BUDGET, workers: int = 1):
    """Exact symmetric-noise identities on every ``(k, x, y)`` combination.

    Returns a list of ``(name, passed, max_abs_error)`` rows for: odd-``k``
    means vanishing, the off-diagonal part vanishing, and
    ``E x^T W^k y = (x^T y / n) E tr W^k``. Also reports the ratio of
    ``|E tr W^k| / n`` to the Catalan bound for even ``k``.
    """
    dist = DiscreteDist.rademacher() if dist is None else _dist(dist)
    if not dist.is_symmetric():
        raise ValueError("identity suite needs a distribution symmetric about 0")
    rows = []
    odd_err = poff_err = iid_err = 0.0
    catalan_ratio = {}
    for k in ks:
        tr = exact_trace_moment(k, dist, n, budget, workers)
        if k % 2 == 0:
            cb = sym_mean_bound_lem5(n, k, dist.sigma)
            catalan_ratio[k] = abs(tr) / n / cb if cb > 0 else math.nan
        for x, y in _pairs(n, n_pairs):
            full = exact_symmetric_moment(x, y, k, dist, n, False, budget, workers)
            off = exact_symmetric_moment(x, y, k, dist, n, True, budget, workers)
            if k % 2:
                odd_err = max(odd_err, abs(full))
            poff_err = max(poff_err, abs(off))
            iid_err = max(iid_err, abs(full - (x @ y) / n * tr))
    if any(k % 2 for k in ks):
        rows.append(("odd k mean is zero", bool(odd_err <= tol), float(odd_err)))
    rows.append(("off-diagonal part has zero mean", bool(poff_err <= tol), float(poff_err)))
    rows.append(("iid trace identity", bool(iid_err <= tol), float(iid_err)))
    return rows, catalan_ratio


THREE_POINT = DiscreteDist(((-1.0, 0.25), (0.0, 0.5), (1.0, 0.25)))


def moment_check_grid(ns=(2, 3), ks=(2, 3), ps=(2, 4), dists=None, budget: int = DEFAULT_BUDGET):
    """Ratios of exact centered moments to the asymmetric moment bound.

    Returns rows ``(n, k, p, dist_name, pair_name, report)``.
    """
    if dists is None:
        dists = {"rademacher": DiscreteDist.rademacher(), "three_point": THREE_POINT}
    out = []
    for n in ns:
        e1 = np.zeros(n)
        e1[0] = 1.0
        flat = np.full(n, 1.0 / math.sqrt(n))
        for k in ks:
            for p in ps:
                for dname, d in dists.items():
                    for pname, (x, y) in (("e1,e1", (e1, e1)), ("flat,flat", (flat, flat))):
                        out.append((n, k, p, dname, pname, moment_check_report(x, y, k, p, d, n, budget)))
    return out
