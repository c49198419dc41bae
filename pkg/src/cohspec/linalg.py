"""Dense real linear algebra kernels and the seeded random source.

Vectors and matrices are plain float64 numpy arrays. The helpers here
validate shapes and finiteness at the boundary and otherwise stay thin.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = [
    "DimensionError",
    "ConvergenceError",
    "as_vector",
    "as_matrix",
    "matvec",
    "matmul",
    "operator_norm",
    "entrywise_inf_norm",
    "row_two_inf_norm",
    "dot",
    "normalize",
    "RandomSource",
    "derive_seed",
    "rng_gaussian",
    "rng_uniform",
    "rng_sphere",
    "rng_bernoulli",
]


class DimensionError(ValueError):
    """Operand shapes do not agree."""


class ConvergenceError(RuntimeError):
    """An iterative method ran out of iterations.

    ``last`` carries the final iterate (or estimate) and ``residual`` the
    last convergence measure, so callers can decide whether to use it.
    """

    def __init__(self, message, last=None, residual=None):
        super().__init__(message)
        self.last = last
        self.residual = residual


def as_vector(x) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise DimensionError(f"expected a nonempty 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionError(f"expected a nonempty 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def matvec(A, x) -> np.ndarray:
    A = as_matrix(A)
    x = as_vector(x)
    if A.shape[1] != x.shape[0]:
        raise DimensionError(f"matvec: {A.shape} times vector of length {x.shape[0]}")
    return A @ x


def matmul(A, B) -> np.ndarray:
    A = as_matrix(A)
    B = as_matrix(B)
    if A.shape[1] != B.shape[0]:
        raise DimensionError(f"matmul: {A.shape} times {B.shape}")
    return A @ B


def operator_norm(A, tol: float = 1e-10, max_iter: int = 20000, x0=None) -> float:
    """Largest singular value of ``A`` by power iteration on ``A^T A``.

    Stops once successive singular-value estimates agree to relative
    accuracy ``tol``. The estimate approaches the true norm from below.

    Raises
    ------
    ConvergenceError
        If ``max_iter`` iterations pass without meeting ``tol``; the
        exception carries the last estimate.
    """
    A = as_matrix(A)
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = A.shape[1]
    if not np.any(A):
        return 0.0
    if x0 is None:
        # fixed, dense, non-symmetric start avoids measure-zero stalls
        v = 1.0 + np.sin(np.arange(1, n + 1, dtype=np.float64))
    else:
        v = as_vector(x0).copy()
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iter):
        w = A.T @ (A @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # start vector in the null space; rotate to a fresh direction
            v = np.roll(v, 1) + 1.0 / n
            v /= np.linalg.norm(v)
            continue
        new = float(np.sqrt(v @ w))
        v = w / nw
        if abs(new - est) <= tol * new:
            return new
        est = new
    raise ConvergenceError(
        f"operator_norm did not converge in {max_iter} iterations", last=est
    )


def entrywise_inf_norm(A) -> float:
    return float(np.max(np.abs(np.asarray(A, dtype=np.float64))))


def row_two_inf_norm(A) -> float:
    A = np.asarray(A, dtype=np.float64)
    if A.ndim == 1:
        A = A[:, None]
    return float(np.max(np.linalg.norm(A, axis=1)))


def dot(x, y) -> float:
    x = as_vector(x)
    y = as_vector(y)
    if x.shape != y.shape:
        raise DimensionError(f"dot: lengths {x.shape[0]} and {y.shape[0]}")
    return float(x @ y)


def normalize(x) -> np.ndarray:
    x = as_vector(x)
    nrm = np.linalg.norm(x)
    if nrm == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return x / nrm


def derive_seed(master_seed: int, *keys: int | str) -> int:
    """Hash a master seed and a key path into an independent 64-bit seed.

    BLAKE2b over the decimal encoding, so the mapping is stable across
    platforms and Python versions.
    """
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(master_seed)).encode())
    for k in keys:
        h.update(b"/")
        h.update(str(k).encode())
    return int.from_bytes(h.digest(), "little")


class RandomSource:
    """Deterministic random stream identified by ``(master_seed, stream_id)``.

    Backed by numpy's PCG64 seeded through ``SeedSequence(master_seed,
    spawn_key=(stream_id,))``. Normal variates use numpy's ziggurat
    transform, uniform doubles the 53-bit mantissa construction; both are
    fixed algorithms, so the draw sequence is reproducible bit for bit.

    A source is single-owner. Parallel work should use :meth:`spawn` with
    distinct stream ids rather than share one instance.
    """

    def __init__(self, master_seed: int, stream_id: int = 0):
        if not (0 <= int(master_seed) < 2**64 and 0 <= int(stream_id) < 2**64):
            raise ValueError("master_seed and stream_id must be 64-bit unsigned")
        self.master_seed = int(master_seed)
        self.stream_id = int(stream_id)
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(seq))

    def __repr__(self):
        return f"RandomSource(master_seed={self.master_seed}, stream_id={self.stream_id})"

    def spawn(self, stream_id: int) -> "RandomSource":
        return RandomSource(self.master_seed, stream_id)

    def gaussian(self, n: int) -> np.ndarray:
        if n < 1:
            raise ValueError("n must be >= 1")
        return self.generator.standard_normal(n)

    def standard_normal(self, shape) -> np.ndarray:
        return self.generator.standard_normal(shape)

    def random(self, shape=None):
        """Uniform doubles on [0, 1)."""
        return self.generator.random(shape)

    def uniform(self, lo: float, hi: float, shape=None):
        if not lo < hi:
            raise ValueError("uniform requires lo < hi")
        return self.generator.uniform(lo, hi, shape)

    def sphere(self, n: int) -> np.ndarray:
        """Uniform point on the unit sphere in R^n (normalized Gaussian)."""
        if n < 1:
            raise ValueError("n must be >= 1")
        while True:
            g = self.generator.standard_normal(n)
            nrm = np.linalg.norm(g)
            if nrm > 0.0:
                return g / nrm

    def bernoulli(self, p: float, shape=None):
        if not 0.0 <= p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        draw = self.generator.random(shape) < p
        return draw.astype(np.int64) if shape is not None else int(draw)

    def signs(self, n: int) -> np.ndarray:
        return np.where(self.generator.random(n) < 0.5, -1.0, 1.0)

    def choice(self, n: int, size: int) -> np.ndarray:
        """``size`` distinct indices from ``range(n)``, uniformly, sorted."""
        return np.sort(self.generator.choice(n, size=size, replace=False))


def rng_gaussian(src: RandomSource, n: int) -> np.ndarray:
    return src.gaussian(n)


def rng_uniform(src: RandomSource, lo: float, hi: float) -> float:
    return float(src.uniform(lo, hi))


def rng_sphere(src: RandomSource, n: int) -> np.ndarray:
    return src.sphere(n)


def rng_bernoulli(src: RandomSource, p: float) -> int:
    return src.bernoulli(p)
