"""Noise models and their (sigma, B) parameters.

Every sampler returns the noise matrix together with a :class:`NoiseParams`
record: ``sigma`` caps the entrywise standard deviation and ``B`` caps the
entry magnitude (or its tail, for Gaussian noise). Symmetric variants draw
the upper triangle, diagonal included, and mirror it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import RandomSource, as_matrix

__all__ = [
    "NoiseParams",
    "NoiseSpec",
    "DiscreteDist",
    "GAUSS_B_CONSTANT",
    "MODELS",
    "sample_gaussian_hetero",
    "sample_completion",
    "sample_network",
    "sample_discrete",
    "symmetrize",
    "regime_check",
]

GAUSS_B_CONSTANT = 5.0
MODELS = ("gaussian_hetero", "completion_mask", "bernoulli_network", "discrete_iid")


def regime_check(params: "NoiseParams", n: int) -> float:
    """``B / (sigma * sqrt(n / ln^3 n))``; values below 1 mean the noise is
    in the light-tailed regime the bounds are built for."""
    if n < 3:
        raise ValueError("regime_check needs n >= 3")
    if params.B == 0.0:
        return 0.0
    if params.sigma == 0.0:
        return math.inf
    L = math.log(n)
    return params.B / (params.sigma * math.sqrt(n / L**3))


@dataclass(frozen=True)
class NoiseParams:
    sigma: float
    B: float
    n: int | None = None
    note: str = ""

    @property
    def regime_ratio(self) -> float:
        if self.n is None or self.n < 3:
            return math.nan
        return regime_check(self, self.n)


@dataclass(frozen=True)
class DiscreteDist:
    """Finite zero-mean distribution given as ``(value, prob)`` pairs."""

    support: tuple
    sigma2: float = field(init=False)
    B: float = field(init=False)

    def __post_init__(self):
        pairs = tuple((float(v), float(p)) for v, p in self.support)
        if not pairs:
            raise ValueError("empty support")
        vals = np.array([v for v, _ in pairs])
        probs = np.array([p for _, p in pairs])
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        if abs(float(vals @ probs)) > 1e-12 * max(1.0, float(np.abs(vals).max())):
            raise ValueError("distribution must have zero mean")
        object.__setattr__(self, "support", pairs)
        object.__setattr__(self, "sigma2", float(probs @ vals**2))
        object.__setattr__(self, "B", float(np.abs(vals).max()))

    @property
    def values(self) -> np.ndarray:
        return np.array([v for v, _ in self.support])

    @property
    def probs(self) -> np.ndarray:
        return np.array([p for _, p in self.support])

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        table = {}
        for v, p in self.support:
            table[v] = table.get(v, 0.0) + p
        return all(abs(table.get(-v, 0.0) - p) <= tol for v, p in table.items())

    @classmethod
    def rademacher(cls) -> "DiscreteDist":
        return cls(((-1.0, 0.5), (1.0, 0.5)))


def symmetrize(H) -> np.ndarray:
    """Mirror the upper triangle (diagonal included) onto the lower one."""
    H = as_matrix(H)
    if H.shape[0] != H.shape[1]:
        raise ValueError("symmetrize needs a square matrix")
    U = np.triu(H)
    return U + np.triu(H, 1).T


def sample_gaussian_hetero(
    n: int,
    src: RandomSource,
    sigma_range=(0.7, 1.0),
    symmetric: bool = False,
    b_constant: float = GAUSS_B_CONSTANT,
):
    """Independent ``N(0, sigma_ij^2)`` entries with ``sigma_ij`` uniform on
    ``sigma_range``.

    Reported parameters are ``sigma = sigma_range[1]`` and
    ``B = b_constant * sqrt(ln n)``; the Gaussian is unbounded, so ``B`` is a
    tail level rather than a hard cap.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    lo, hi = sigma_range
    if not 0 <= lo <= hi:
        raise ValueError("sigma_range must satisfy 0 <= lo <= hi")
    s = src.uniform(lo, hi, (n, n)) if lo < hi else np.full((n, n), float(lo))
    H = s * src.standard_normal((n, n))
    if symmetric:
        H = symmetrize(H)
    B = b_constant * math.sqrt(math.log(n)) if n > 1 else b_constant
    return H, NoiseParams(float(hi), B, n, f"B = {b_constant:g} sqrt(ln n)")


def sample_completion(M_star, obs_prob: float, src: RandomSource, symmetric: bool = False):
    """Observe each entry of ``M_star`` with probability ``obs_prob``,
    rescaled by ``1/obs_prob``.

    Returns
    -------
    M, H : ndarray
        Observed matrix and noise ``H = M - M_star``.
    params : NoiseParams
        ``B = ||M*||_inf / p`` and ``sigma = ||M*||_inf / sqrt(p)``. For a
        rank-one signal these equal ``lambda* mu / (n p)`` and
        ``lambda* mu / (n sqrt p)``.
    """
    M_star = as_matrix(M_star)
    p = float(obs_prob)
    if not 0.0 < p <= 1.0:
        raise ValueError("obs_prob must lie in (0, 1]")
    n = M_star.shape[0]
    if p == 1.0:
        mask = np.ones(M_star.shape, dtype=bool)
    else:
        mask = src.random(M_star.shape) < p
        if symmetric:
            mask = symmetrize(mask.astype(np.float64)).astype(bool)
    M = np.where(mask, M_star / p, 0.0)
    H = M - M_star
    m_inf = float(np.max(np.abs(M_star)))
    return M, H, NoiseParams(m_inf / math.sqrt(p), m_inf / p, n)


def sample_network(P, src: RandomSource, symmetric: bool = False):
    """Bernoulli adjacency ``A_ij ~ Bernoulli(P_ij)`` with ``H = A - P``.

    Parameters are ``B = 1`` and ``sigma = sqrt(max P_ij)``.
    """
    P = as_matrix(P)
    if np.any(P < 0.0) or np.any(P > 1.0):
        raise ValueError("edge probabilities must lie in [0, 1]")
    A = (src.random(P.shape) < P).astype(np.float64)
    if symmetric:
        A = symmetrize(A)
    H = A - P
    return A, H, NoiseParams(math.sqrt(float(P.max())), 1.0, P.shape[0])


def sample_discrete(n: int, support, src: RandomSource, symmetric: bool = False):
    """Iid entries from a finite zero-mean distribution.

    With ``symmetric=True`` the distribution must be symmetric about zero
    and the returned matrix is symmetric.
    """
    dist = support if isinstance(support, DiscreteDist) else DiscreteDist(tuple(support))
    if symmetric and not dist.is_symmetric():
        raise ValueError("support is not symmetric about 0")
    cdf = np.cumsum(dist.probs)
    cdf[-1] = 1.0
    idx = np.searchsorted(cdf, src.random((n, n)), side="right")
    H = dist.values[idx]
    if symmetric:
        H = symmetrize(H)
    return H, NoiseParams(dist.sigma, dist.B, n)


@dataclass(frozen=True)
class NoiseSpec:
    """Tagged noise model.

    ``params`` keys by model:

    * ``gaussian_hetero``: ``sigma_range`` (default ``(0.7, 1.0)``),
      ``b_constant``
    * ``completion_mask``: ``M_star``, ``obs_prob``
    * ``bernoulli_network``: ``P``
    * ``discrete_iid``: ``support`` (``(value, prob)`` pairs or a
      :class:`DiscreteDist`)
    """

    model: str
    params: dict = field(default_factory=dict)
    symmetric: bool = False

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown noise model {self.model!r}; expected one of {MODELS}")
        if self.model == "discrete_iid" and self.symmetric:
            sup = self.params["support"]
            dist = sup if isinstance(sup, DiscreteDist) else DiscreteDist(tuple(sup))
            if not dist.is_symmetric():
                raise ValueError("support is not symmetric about 0")

    def sample(self, n: int, src: RandomSource):
        """Draw ``(H, NoiseParams)`` for an ``n x n`` instance."""
        kw = self.params
        if self.model == "gaussian_hetero":
            return sample_gaussian_hetero(
                n, src, kw.get("sigma_range", (0.7, 1.0)), self.symmetric,
                kw.get("b_constant", GAUSS_B_CONSTANT),
            )
        if self.model == "completion_mask":
            _, H, prm = sample_completion(kw["M_star"], kw["obs_prob"], src, self.symmetric)
            return H, prm
        if self.model == "bernoulli_network":
            _, H, prm = sample_network(kw["P"], src, self.symmetric)
            return H, prm
        return sample_discrete(n, kw["support"], src, self.symmetric)
