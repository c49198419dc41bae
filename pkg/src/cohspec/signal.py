"""Low-rank symmetric signals with controlled coherence.

A signal is ``M* = U* diag(lambda*) U*^T`` with orthonormal ``U*``. The
coherence of ``U*`` is ``mu = n * max|U*_ij|^2``; the row-wise variant is
``mu0 = (n / r) * max_i ||U*_i.||^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import RandomSource, as_matrix, entrywise_inf_norm, row_two_inf_norm

__all__ = [
    "SignalSpec",
    "CoherenceReport",
    "coherence",
    "scheme_one",
    "scheme_two",
    "make_signal",
    "eigen_gap",
    "support_size",
    "ORTHO_TOL",
]

ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class CoherenceReport:
    mu: float
    mu0: float
    kappa: float | None = None


@dataclass(frozen=True)
class SignalSpec:
    """Rank-r symmetric signal ``sum_j lambda_star[j] u_j u_j^T``.

    Attributes
    ----------
    lambda_star : ndarray, shape (r,)
        Nonzero eigenvalues sorted by descending modulus.
    U_star : ndarray, shape (n, r)
        Orthonormal eigenvector block; column ``j`` pairs with
        ``lambda_star[j]``.
    """

    lambda_star: np.ndarray
    U_star: np.ndarray

    @property
    def n(self) -> int:
        return self.U_star.shape[0]

    @property
    def r(self) -> int:
        return self.U_star.shape[1]

    @property
    def kappa(self) -> float:
        a = np.abs(self.lambda_star)
        return float(a.max() / a.min())

    def matrix(self) -> np.ndarray:
        U = self.U_star
        M = (U * self.lambda_star) @ U.T
        # exact symmetry regardless of rounding order
        return 0.5 * (M + M.T)

    def coherence(self) -> CoherenceReport:
        rep = coherence(self.U_star)
        return CoherenceReport(rep.mu, rep.mu0, self.kappa)

    def gap(self, l: int) -> float:
        return eigen_gap(self.lambda_star, l)


def _as_block(U) -> np.ndarray:
    U = np.asarray(U, dtype=np.float64)
    if U.ndim == 1:
        U = U[:, None]
    return as_matrix(U)


def _check_orthonormal(U: np.ndarray, tol: float = ORTHO_TOL) -> None:
    r = U.shape[1]
    if r > U.shape[0]:
        raise ValueError(f"{r} columns cannot be orthonormal in R^{U.shape[0]}")
    G = U.T @ U - np.eye(r)
    if np.linalg.norm(G, 2) > tol:
        raise ValueError("U_star columns are not orthonormal")


def coherence(U_star, lambda_star=None) -> CoherenceReport:
    """Incoherence statistics of an orthonormal block.

    Parameters
    ----------
    U_star : array_like, shape (n,) or (n, r)
        Orthonormal columns; a 1-d input is a single unit vector.
    lambda_star : array_like, optional
        Attached eigenvalues, used only for the condition number.

    Returns
    -------
    CoherenceReport
        ``mu = n ||U*||_inf^2``, ``mu0 = (n/r) ||U*||_{2,inf}^2`` and
        ``kappa = max|lambda*| / min|lambda*|`` when eigenvalues are given.
    """
    U = _as_block(U_star)
    _check_orthonormal(U)
    n, r = U.shape
    mu = n * entrywise_inf_norm(U) ** 2
    mu0 = (n / r) * row_two_inf_norm(U) ** 2
    kappa = None
    if lambda_star is not None:
        a = np.abs(np.asarray(lambda_star, dtype=np.float64))
        if a.size != r or np.any(a == 0):
            raise ValueError("lambda_star must hold r nonzero values")
        kappa = float(a.max() / a.min())
    return CoherenceReport(float(mu), float(mu0), kappa)


def support_size(n: int, mu_target: float) -> int:
    if not 1 <= mu_target <= n:
        raise ValueError(f"mu_target must lie in [1, {n}], got {mu_target}")
    return max(1, int(math.floor(n / mu_target)))


def scheme_one(n: int, mu_target: float, src: RandomSource) -> np.ndarray:
    """Random sparse unit vector with ``floor(n / mu_target)`` nonzeros.

    The support is uniform without replacement and the nonzero block is
    uniform on the sphere of that dimension.
    """
    m = support_size(n, mu_target)
    idx = src.choice(n, m)
    u = np.zeros(n)
    u[idx] = src.sphere(m)
    return u


def scheme_two(n: int, mu_target: float, src: RandomSource, weights=(0.7, 0.3)) -> np.ndarray:
    """Mix of a sparse sign vector and a dense spherical vector.

    ``v1`` has ``m = floor(n / mu_target)`` entries equal to ``+-1/sqrt(m)``
    on a uniform support; ``v2`` is uniform on the sphere. Returns the
    normalized ``weights[0] * v1 + weights[1] * v2``.
    """
    m = support_size(n, mu_target)
    w1, w2 = weights
    idx = src.choice(n, m)
    v1 = np.zeros(n)
    v1[idx] = src.signs(m) / math.sqrt(m)
    v2 = src.sphere(n)
    u = w1 * v1 + w2 * v2
    return u / np.linalg.norm(u)


def make_signal(lambda_star, U_star):
    """Build a :class:`SignalSpec` and its dense matrix ``M*``.

    Eigenvalues are reordered by descending modulus together with their
    columns.
    """
    lam = np.atleast_1d(np.asarray(lambda_star, dtype=np.float64))
    U = _as_block(U_star)
    if lam.ndim != 1 or lam.size != U.shape[1]:
        raise ValueError(f"{lam.size} eigenvalues for {U.shape[1]} columns")
    if np.any(lam == 0) or not np.all(np.isfinite(lam)):
        raise ValueError("signal eigenvalues must be finite and nonzero")
    _check_orthonormal(U)
    order = np.argsort(-np.abs(lam), kind="stable")
    spec = SignalSpec(lam[order].copy(), U[:, order].copy())
    return spec, spec.matrix()


def eigen_gap(lambda_star, l: int) -> float:
    """Distance from ``lambda_star[l-1]`` to the nearest other eigenvalue.

    ``l`` is 1-based. Returns ``inf`` for a single eigenvalue.
    """
    lam = np.atleast_1d(np.asarray(lambda_star, dtype=np.float64))
    r = lam.size
    if not 1 <= l <= r:
        raise IndexError(f"l must lie in [1, {r}], got {l}")
    if r == 1:
        return math.inf
    others = np.delete(lam, l - 1)
    return float(np.min(np.abs(lam[l - 1] - others)))
