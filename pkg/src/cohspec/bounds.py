"""Closed-form perturbation and concentration bounds.

Every bound is evaluated literally with its suppressed universal constants
set to 1 (each is injectable as a keyword) and natural logarithms
throughout. Two-branch bounds return a :class:`BoundValue` exposing both
branches; they are computed as sums of logarithms so that large powers do
not overflow before the final exponential.

Conventions
-----------
A zero base raised to any nonzero power is taken as 0 (negative powers
included, rather than infinity) and ``0**0`` is 1, so that ``sigma = 0``
(or ``x_inf = 0``) switches the affected branch off.
"""

from __future__ import annotations

import math
from typing import NamedTuple

__all__ = [
    "BoundValue",
    "ConditionCheck",
    "CONSTANTS_CONVENTION",
    "spectral_norm_bound",
    "prior_eigenvalue_bound",
    "k_zero",
    "signal_condition_rank_one",
    "master_rank_one",
    "eigenvalue_rank_one",
    "moment_bound_thm2",
    "highprob_bound_cor1",
    "main_bound_thm3",
    "mean_bound_lem3",
    "sym_bound_thm4",
    "linear_bound_lem4",
    "catalan",
    "sym_mean_bound_lem5",
    "rank_r_master",
    "rank_r_eigenvalue",
    "gap_condition",
    "signal_condition_rank_r",
    "bernstein_tail",
    "RegimeError",
]

CONSTANTS_CONVENTION = "all suppressed universal constants set to 1"
NEG_INF = -math.inf


class RegimeError(ValueError):
    """Parameters fall outside the regime where a bound is defined."""


class BoundValue(NamedTuple):
    total: float
    branch_sigma: float
    branch_B: float
    log_sigma: float = NEG_INF
    log_B: float = NEG_INF
    constants_convention: str = CONSTANTS_CONVENTION

    @property
    def log_total(self) -> float:
        return max(self.log_sigma, self.log_B)

    @property
    def dominant(self) -> str:
        return "sigma" if self.log_sigma >= self.log_B else "B"


class ConditionCheck(NamedTuple):
    """Outcome of an inequality ``lhs >= rhs``; ``margin = lhs / rhs``."""

    passed: bool
    margin: float
    lhs: float
    rhs: float

    def __bool__(self):
        return self.passed


def _log(x: float) -> float:
    if x < 0:
        raise ValueError(f"negative quantity {x} inside a bound")
    return math.log(x) if x > 0 else NEG_INF


def _logpow(base: float, e: float) -> float:
    """``log(base**e)`` with the zero-base convention of this module."""
    if base == 0.0:
        return 0.0 if e == 0 else NEG_INF
    return e * math.log(base)


def _exp(lv: float) -> float:
    if lv == NEG_INF:
        return 0.0
    try:
        return math.exp(lv)
    except OverflowError:
        return math.inf


def _bv(log_sigma: float, log_B: float) -> BoundValue:
    s, b = _exp(log_sigma), _exp(log_B)
    return BoundValue(max(s, b), s, b, log_sigma, log_B)


def _need_n(n, minimum=3):
    if n < minimum:
        raise ValueError(f"n must be >= {minimum}, got {n}")
    return math.log(n)


def _need_nonneg(**kw):
    for k, v in kw.items():
        if not v >= 0 or not math.isfinite(v):
            raise ValueError(f"{k} must be finite and nonnegative, got {v}")


def _need_k(k, n, lo=2):
    L = math.log(n)
    if int(k) != k or k < lo or k > 20 * L:
        raise ValueError(f"k must be an integer in [{lo}, 20 ln n = {20 * L:.3f}], got {k}")


# ---------------------------------------------------------------------------
# spectral norm and the prior eigenvalue bound


def spectral_norm_bound(sigma: float, B: float, n: int, c1: float = 1.0) -> BoundValue:
    """``c1 * max{sigma sqrt(n ln n), B ln n}``."""
    L = _need_n(n)
    _need_nonneg(sigma=sigma, B=B)
    lc = _log(c1)
    return _bv(lc + _log(sigma) + 0.5 * math.log(n * L), lc + _log(B) + math.log(L))


def prior_eigenvalue_bound(sigma: float, B: float, n: int, mu: float, c1: float = 1.0) -> BoundValue:
    """Spectral-norm bound scaled by ``sqrt(mu / n)``."""
    if not 1 <= mu <= n:
        raise ValueError(f"mu must lie in [1, n], got {mu}")
    base = spectral_norm_bound(sigma, B, n, c1)
    s = 0.5 * math.log(mu / n)
    return _bv(base.log_sigma + s, base.log_B + s)


# ---------------------------------------------------------------------------
# rank one


def k_zero(mu: float, a_inf: float, sigma: float, B: float, n: int) -> int:
    """Crossover exponent balancing the two branches of the master bound.

    ``ceil((ln mu + 2 ln a_inf) / (2 ln(sigma/B) + ln n - 3 ln ln n))``,
    clamped below at 0.

    Raises
    ------
    RegimeError
        If the denominator is not positive.
    """
    L = _need_n(n)
    if sigma <= 0 or B <= 0:
        raise ValueError("k_zero needs sigma > 0 and B > 0")
    if mu <= 0 or a_inf < 0:
        raise ValueError("mu must be positive and a_inf nonnegative")
    den = 2 * math.log(sigma / B) + L - 3 * math.log(L)
    if not den > 0:
        raise RegimeError(
            f"k0 denominator 2 ln(sigma/B) + ln n - 3 ln ln n = {den:.6g} is not positive"
        )
    if a_inf == 0:
        return 0
    num = math.log(mu) + 2 * math.log(a_inf)
    # guard against x.0000000001 from rounding of an exact integer ratio
    q = num / den
    k = math.ceil(q - 1e-12 * max(1.0, abs(q)))
    return max(0, int(k))


def signal_condition_rank_one(lambda_star, sigma, B, n, C1: float = 1.0) -> ConditionCheck:
    """``|lambda*| >= C1 max{sigma sqrt(n ln^3 n), B ln^3 n}``."""
    L = _need_n(n)
    rhs = C1 * max(sigma * math.sqrt(n * L**3), B * L**3)
    lhs = abs(lambda_star)
    return ConditionCheck(lhs >= rhs, lhs / rhs if rhs > 0 else math.inf, lhs, rhs)


def master_rank_one(
    sigma, B, n, mu, lambda_star, a_inf, C1: float = 1.0, check_signal: bool = True
) -> BoundValue:
    """Linear-form bound for the leading eigenvector of a rank-one signal.

    ``(ln^2 n / sqrt n) * max{B a_inf sqrt(mu) ln^3 n / |lambda*|,
    (sigma sqrt(n) ln^{3/2} n / |lambda*|)^k0}``.

    Raises
    ------
    RegimeError
        If the signal-strength condition fails (with ``check_signal``) or
        the ``k0`` denominator is not positive.
    """
    L = _need_n(n)
    _need_nonneg(sigma=sigma, B=B, a_inf=a_inf)
    if lambda_star == 0:
        raise ValueError("lambda_star must be nonzero")
    if check_signal:
        chk = signal_condition_rank_one(lambda_star, sigma, B, n, C1)
        if not chk:
            raise RegimeError(f"signal too weak: |lambda*| = {chk.lhs:.6g} < {chk.rhs:.6g}")
    k0 = k_zero(mu, a_inf, sigma, B, n)
    lam = abs(lambda_star)
    pre = 2 * math.log(L) - 0.5 * math.log(n)
    lb = pre + _log(B) + _log(a_inf) + 0.5 * math.log(mu) + 3 * math.log(L) - math.log(lam)
    ratio = sigma * math.sqrt(n) * L**1.5 / lam
    ls = pre + _logpow(ratio, k0)
    return _bv(ls, lb)


def eigenvalue_rank_one(
    sigma, B, n, mu, lambda_star, C1: float = 1.0, check_signal: bool = False
) -> BoundValue:
    """Leading-eigenvalue error bound for a rank-one signal.

    ``max{B mu ln^5 n / n, (sigma sqrt(n) ln^{3/2} n / |lambda*|)^k0
    |lambda*| ln^2 n / sqrt n}`` with ``k0`` evaluated at
    ``a_inf = sqrt(mu / n)``.
    """
    L = _need_n(n)
    _need_nonneg(sigma=sigma, B=B)
    if check_signal:
        chk = signal_condition_rank_one(lambda_star, sigma, B, n, C1)
        if not chk:
            raise RegimeError(f"signal too weak: |lambda*| = {chk.lhs:.6g} < {chk.rhs:.6g}")
    lam = abs(lambda_star)
    k0 = k_zero(mu, math.sqrt(mu / n), sigma, B, n)
    lb = _log(B) + math.log(mu) + 5 * math.log(L) - math.log(n)
    ratio = sigma * math.sqrt(n) * L**1.5 / lam
    ls = _logpow(ratio, k0) + math.log(lam) + 2 * math.log(L) - 0.5 * math.log(n)
    return _bv(ls, lb)


# ---------------------------------------------------------------------------
# moments of x^T H^k y


def moment_bound_thm2(n, k, p, sigma, B, Nx, Ny, x_inf, y_inf, strict: bool = False) -> BoundValue:
    """Bound on ``E (x^T H^k y - E x^T H^k y)^p`` for even ``p``.

    Common factor ``2^{(k+1)p} (kp)^{kp} p (x_inf y_inf)^p`` times

    * sigma branch: ``sigma^{kp} n^{kp/2} (Nx Ny)^{p/2} / (n^{p/2} (kp)^{kp/2})``
    * B branch: ``B^{pk} sigma^{2k} n^k Nx Ny / (B^{2k} n (kp)^k)``

    ``Nx`` and ``Ny`` are the support sizes of ``x`` and ``y``. The bound
    is stated for ``kp <= ln^3 n``; pass ``strict=True`` to enforce that.
    """
    if int(k) != k or k < 2:
        raise ValueError("k must be an integer >= 2")
    if int(p) != p or p < 2 or p % 2:
        raise ValueError("p must be an even integer >= 2")
    if n < 1:
        raise ValueError("n must be >= 1")
    _need_nonneg(sigma=sigma, B=B, Nx=Nx, Ny=Ny, x_inf=x_inf, y_inf=y_inf)
    if strict and k * p > math.log(n) ** 3:
        raise ValueError(f"kp = {k * p} exceeds ln^3 n = {math.log(n) ** 3:.4g}")
    kp = k * p
    ln = math.log(n)
    common = (
        (k + 1) * p * math.log(2)
        + kp * math.log(kp)
        + math.log(p)
        + p * (_log(x_inf) + _log(y_inf))
    )
    ls = (
        _logpow(sigma, kp)
        + 0.5 * kp * ln
        + 0.5 * p * (_log(Nx) + _log(Ny))
        - 0.5 * p * ln
        - 0.5 * kp * math.log(kp)
    )
    lb = (
        _logpow(B, (p - 2) * k)
        + _logpow(sigma, 2 * k)
        + k * ln
        + _log(Nx)
        + _log(Ny)
        - ln
        - k * math.log(kp)
    )
    return _bv(common + ls, common + lb)


def highprob_bound_cor1(n, k, sigma, B, Nx, Ny, x_inf, y_inf, c2: float = 1.0) -> BoundValue:
    """``c2^k x_inf y_inf max{(sigma^2 n ln^3 n)^{k/2} sqrt(Nx Ny / n), (B ln^3 n)^k}``."""
    L = _need_n(n)
    _need_k(k, n)
    _need_nonneg(sigma=sigma, B=B, Nx=Nx, Ny=Ny, x_inf=x_inf, y_inf=y_inf)
    common = k * _log(c2) + _log(x_inf) + _log(y_inf)
    ls = 0.5 * k * (2 * _log(sigma) + math.log(n) + 3 * math.log(L))
    ls += 0.5 * (_log(Nx) + _log(Ny) - math.log(n))
    lb = k * (_log(B) + 3 * math.log(L))
    return _bv(common + ls, common + lb)


def _unit_vector_shape(n, k, sigma, B, x_inf, y_inf, c):
    L = math.log(n)
    common = k * _log(c) + 2 * math.log(L)
    ls = 0.5 * (k * (2 * _log(sigma) + math.log(n) + 3 * math.log(L)) - math.log(n))
    lb = k * (_log(B) + 3 * math.log(L)) + _log(x_inf) + _log(y_inf)
    return _bv(common + ls, common + lb)


def main_bound_thm3(n, k, sigma, B, x_inf, y_inf, c2: float = 1.0) -> BoundValue:
    """``c2^k ln^2 n max{sqrt((sigma^2 n ln^3 n)^k / n), (B ln^3 n)^k x_inf y_inf}``."""
    _need_n(n)
    _need_k(k, n)
    _need_nonneg(sigma=sigma, B=B, x_inf=x_inf, y_inf=y_inf)
    return _unit_vector_shape(n, k, sigma, B, x_inf, y_inf, c2)


def sym_bound_thm4(n, k, sigma, B, x_inf, y_inf, c2: float = 1.0) -> BoundValue:
    """Symmetric-noise analogue of :func:`main_bound_thm3` with ``(2 c2)^k``; ``k >= 1``."""
    _need_n(n)
    _need_k(k, n, lo=1)
    _need_nonneg(sigma=sigma, B=B, x_inf=x_inf, y_inf=y_inf)
    return _unit_vector_shape(n, k, sigma, B, x_inf, y_inf, 2 * c2)


def mean_bound_lem3(n, k, sigma, B) -> BoundValue:
    """``ln^2 n (2k)^k max{sigma^2 B^{k-2} / k, (sigma^2 n / k)^{k/2 - 2}}``.

    For ``k < 4`` the second branch has a negative exponent; with
    ``sigma = 0`` it is switched off by the module convention.
    """
    L = _need_n(n)
    _need_k(k, n)
    _need_nonneg(sigma=sigma, B=B)
    common = 2 * math.log(L) + k * math.log(2 * k)
    lb = _logpow(sigma, 2) + _logpow(B, k - 2) - math.log(k)
    ls = _logpow(sigma * sigma * n / k, k / 2 - 2)
    return _bv(common + ls, common + lb)


def linear_bound_lem4(sigma, B, n, x_inf, y_inf, c2: float = 1.0) -> BoundValue:
    """``c2 max{sigma sqrt(ln n), x_inf y_inf B ln n}``."""
    L = _need_n(n)
    _need_nonneg(sigma=sigma, B=B, x_inf=x_inf, y_inf=y_inf)
    lc = _log(c2)
    return _bv(lc + _log(sigma) + 0.5 * math.log(L), lc + _log(x_inf) + _log(y_inf) + _log(B) + math.log(L))


def catalan(m: int) -> int:
    if int(m) != m or m < 0:
        raise ValueError("catalan needs a nonnegative integer")
    m = int(m)
    return math.comb(2 * m, m) // (m + 1)


def sym_mean_bound_lem5(n: int, k: int, sigma: float) -> float:
    """``C_{k/2} (sigma^2 n)^{k/2}`` for even ``k``; exactly 0 for odd ``k``."""
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    _need_nonneg(sigma=sigma)
    if k % 2:
        return 0.0
    h = k // 2
    return float(catalan(h)) * (sigma * sigma * n) ** h


# ---------------------------------------------------------------------------
# rank r


def _need_kappa(kappa):
    if not kappa >= 1:
        raise ValueError(f"kappa must be >= 1, got {kappa}")


def rank_r_master(sigma, B, n, mu, lambda_min, lambda_max, r, a_inf) -> BoundValue:
    """``sqrt(kappa^2 r ln^4 n / n) max{sqrt(mu) B ln^3 n a_inf / lambda_min,
    (sigma sqrt(n ln^3 n) / lambda_min)^k0}`` with ``kappa = lambda_max / lambda_min``."""
    L = _need_n(n)
    _need_nonneg(sigma=sigma, B=B, a_inf=a_inf)
    if lambda_min <= 0:
        raise ValueError("lambda_min must be positive")
    kappa = lambda_max / lambda_min
    _need_kappa(kappa)
    if r < 1:
        raise ValueError("r must be >= 1")
    k0 = k_zero(mu, a_inf, sigma, B, n)
    pre = 0.5 * (2 * math.log(kappa) + math.log(r) + 4 * math.log(L) - math.log(n))
    lb = 0.5 * math.log(mu) + _log(B) + 3 * math.log(L) + _log(a_inf) - math.log(lambda_min)
    ls = _logpow(sigma * math.sqrt(n * L**3) / lambda_min, k0)
    return _bv(pre + ls, pre + lb)


def rank_r_eigenvalue(sigma, B, n, mu, lambda_max, kappa, r, c3: float = 1.0) -> BoundValue:
    """``c3 r^2 max{kappa mu B ln^3 n / n,
    (kappa sigma sqrt(n ln^3 n))^k0 / (lambda_max^{k0-1} sqrt n)}``, with
    ``k0`` evaluated at ``a_inf = sqrt(mu / n)``."""
    L = _need_n(n)
    _need_nonneg(sigma=sigma, B=B)
    _need_kappa(kappa)
    if r < 1 or lambda_max <= 0:
        raise ValueError("r must be >= 1 and lambda_max positive")
    k0 = k_zero(mu, math.sqrt(mu / n), sigma, B, n)
    pre = _log(c3) + 2 * math.log(r)
    lb = math.log(kappa) + math.log(mu) + _log(B) + 3 * math.log(L) - math.log(n)
    ls = (
        _logpow(kappa * sigma * math.sqrt(n * L**3), k0)
        - (k0 - 1) * math.log(lambda_max)
        - 0.5 * math.log(n)
    )
    return _bv(pre + ls, pre + lb)


def gap_condition(delta_l, sigma, B, n, mu, lambda_max, kappa, r, c3: float = 1.0) -> ConditionCheck:
    """Eigen-gap requirement ``delta_l >= rank_r_eigenvalue(...)``."""
    rhs = rank_r_eigenvalue(sigma, B, n, mu, lambda_max, kappa, r, c3).total
    if math.isinf(delta_l):
        return ConditionCheck(True, math.inf, delta_l, rhs)
    return ConditionCheck(delta_l >= rhs, delta_l / rhs if rhs > 0 else math.inf, delta_l, rhs)


def signal_condition_rank_r(lambda_max, kappa, sigma, B, n, C2: float = 1.0) -> ConditionCheck:
    """``lambda_max / kappa >= C2 max{sigma sqrt(n ln^3 n), B ln^3 n}``."""
    L = _need_n(n)
    _need_kappa(kappa)
    lhs = lambda_max / kappa
    rhs = C2 * max(sigma * math.sqrt(n * L**3), B * L**3)
    return ConditionCheck(lhs >= rhs, lhs / rhs if rhs > 0 else math.inf, lhs, rhs)


def bernstein_tail(nu: float, L: float, t: float) -> float:
    """``2 exp(-min(t^2 / (4 nu), 3t / (4L)))``."""
    if nu <= 0 or L <= 0 or t <= 0:
        raise ValueError("bernstein_tail needs positive nu, L and t")
    return 2.0 * math.exp(-min(t * t / (4 * nu), 3 * t / (4 * L)))
