"""Neumann-series tools for perturbed eigenvectors.

If ``M = M* + H`` with ``M* = sum_j lambda*_j u*_j u*_j^T`` and ``(lambda, u)``
is an eigenpair of ``M`` with ``||H|| < |lambda|``, then

    u = sum_j (lambda*_j / lambda) (u*_j^T u) sum_{k>=0} lambda^{-k} H^k u*_j

exactly. The series is a verification device: it needs the eigenpair it
reproduces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import DimensionError, as_matrix, as_vector, operator_norm
from .signal import SignalSpec

__all__ = [
    "PowerSequence",
    "BandDecomposition",
    "bilinear_powers",
    "neumann_partial_sums",
    "neumann_reconstruct",
    "neumann_tail_bound",
    "band_decompose",
    "band_count",
]


@dataclass(frozen=True)
class PowerSequence:
    values: np.ndarray

    @property
    def k_max(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, k):
        return self.values[k]


def bilinear_powers(H, x, y, k_max: int) -> PowerSequence:
    """``x^T H^k y`` for ``k = 0..k_max`` by repeated matrix-vector products."""
    H = as_matrix(H)
    x = as_vector(x)
    y = as_vector(y)
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    if H.shape[0] != x.size or H.shape[1] != y.size or H.shape[0] != H.shape[1]:
        raise DimensionError(f"H {H.shape} with x of length {x.size} and y of length {y.size}")
    out = np.empty(k_max + 1)
    w = y.copy()
    out[0] = x @ w
    for k in range(1, k_max + 1):
        w = H @ w
        out[k] = x @ w
    return PowerSequence(out)


def _check_series(H, signal: SignalSpec, lambda_l: float, u_l, h_norm=None):
    H = as_matrix(H)
    u_l = as_vector(u_l)
    if H.shape != (signal.n, signal.n) or u_l.size != signal.n:
        raise DimensionError("H, signal and u_l dimensions disagree")
    if lambda_l == 0:
        raise ValueError("lambda_l must be nonzero")
    if h_norm is None:
        h_norm = operator_norm(H)
    if not h_norm < abs(lambda_l):
        raise ValueError(
            f"series needs ||H|| < |lambda_l| (got {h_norm:.6g} vs {abs(lambda_l):.6g})"
        )
    return H, u_l, h_norm


def neumann_partial_sums(H, signal: SignalSpec, lambda_l: float, u_l, K: int, h_norm=None) -> np.ndarray:
    """All truncations ``0..K`` of the series, as rows of a ``(K+1, n)`` array."""
    H, u_l, _ = _check_series(H, signal, lambda_l, u_l, h_norm)
    if K < 0:
        raise ValueError("K must be >= 0")
    U = signal.U_star
    coef = signal.lambda_star / lambda_l * (U.T @ u_l)
    # W holds lambda^{-k} H^k U*, all columns advanced together
    W = U.copy()
    acc = W @ coef
    out = np.empty((K + 1, signal.n))
    out[0] = acc
    for k in range(1, K + 1):
        W = (H @ W) / lambda_l
        acc = acc + W @ coef
        out[k] = acc
    return out


def neumann_reconstruct(H, signal: SignalSpec, lambda_l: float, u_l, K: int, h_norm=None) -> np.ndarray:
    """The series for ``u_l`` truncated after the ``H^K`` term.

    Raises
    ------
    ValueError
        If ``operator_norm(H) >= |lambda_l|``.
    """
    return neumann_partial_sums(H, signal, lambda_l, u_l, K, h_norm)[-1]


def neumann_tail_bound(signal: SignalSpec, lambda_l: float, h_norm: float, K: int) -> float:
    """Geometric bound on the truncation error after ``K`` terms."""
    q = h_norm / abs(lambda_l)
    if q >= 1:
        return math.inf
    C = float(np.sum(np.abs(signal.lambda_star / lambda_l)))
    return C * q ** (K + 1) / (1 - q)


@dataclass(frozen=True)
class BandDecomposition:
    """Magnitude bands of a unit vector.

    ``bands[i]`` is a full-length vector holding the entries of band
    ``index[i]`` (1-based; ``m + 1`` is the final catch-all band) and zeros
    elsewhere; ``positions[i]`` lists those entries. Empty bands are left
    out.
    """

    bands: list
    index: list
    positions: list
    m: int

    def __len__(self):
        return len(self.bands)

    def total(self) -> np.ndarray:
        return np.sum(self.bands, axis=0)

    def products(self) -> np.ndarray:
        """``||b||_inf * sqrt(||b||_0)`` per band."""
        return np.array(
            [np.max(np.abs(b)) * math.sqrt(np.count_nonzero(b)) for b in self.bands]
        )


def band_count(n: int) -> int:
    return math.ceil(0.5 * math.log(n))


def band_decompose(x, unit_tol: float = 1e-10) -> BandDecomposition:
    """Split a unit vector into bands of comparable magnitude.

    Band ``r <= m`` (``m = ceil(ln(n) / 2)``) holds entries with
    ``|x_i|`` in ``(e^-r, e^(1-r)]``; every smaller entry falls in band
    ``m + 1``. Each band then satisfies ``||b||_inf sqrt(||b||_0) <= e``.
    """
    x = as_vector(x)
    if abs(np.linalg.norm(x) - 1.0) > unit_tol:
        raise ValueError("band_decompose expects a unit vector")
    n = x.size
    m = band_count(n)
    a = np.abs(x)
    r = np.full(n, m + 1, dtype=np.int64)
    big = a > math.exp(-m)
    with np.errstate(divide="ignore"):
        guess = np.floor(-np.log(a[big])).astype(np.int64) + 1
    # repair rounding at the edges of the half-open intervals
    lo = np.exp(-guess.astype(float))
    guess = np.where(a[big] <= lo, guess + 1, guess)
    hi = np.exp(-(guess - 1).astype(float))
    guess = np.where(a[big] > hi, guess - 1, guess)
    r[big] = np.clip(guess, 1, m)

    bands, index, positions = [], [], []
    nz = a > 0
    for b in range(1, m + 2):
        pos = np.flatnonzero((r == b) & nz)
        if pos.size == 0:
            continue
        v = np.zeros(n)
        v[pos] = x[pos]
        bands.append(v)
        index.append(b)
        positions.append(pos)
    return BandDecomposition(bands, index, positions, m)
