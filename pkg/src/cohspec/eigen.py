"""Eigenvalue estimation for dense real matrices.

Three routes are provided:

* :func:`leading_eigenpair` -- power iteration with a Rayleigh-quotient
  eigenvalue; the estimator used by the simulation harness.
* :func:`full_spectrum` -- Householder reduction to upper Hessenberg form
  followed by Francis double-shift QR; eigenvectors of real eigenvalues by
  inverse iteration.
* :func:`symmetric_spectrum` -- cyclic Jacobi rotations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import ConvergenceError, DimensionError, RandomSource, as_matrix

__all__ = [
    "EigenEstimate",
    "EigenError",
    "leading_eigenpair",
    "hessenberg",
    "full_spectrum",
    "symmetric_spectrum",
    "top_r_real",
    "is_real_eigenvalue",
    "MAX_DENSE_DIM",
]

MAX_DENSE_DIM = 600
DEFLATION_REL = 1e-14
REALNESS_REL = 1e-8


class EigenError(RuntimeError):
    """The QR iteration failed to deflate within its budget."""


@dataclass
class EigenEstimate:
    """Eigenvalues sorted by descending modulus, with optional eigenvectors.

    ``eigenvectors[i]`` is a unit vector for real eigenvalues and ``None``
    for complex ones; ``residuals[i]`` is ``||A u - lambda u||_2`` for real
    pairs and ``nan`` otherwise.
    """

    eigenvalues: np.ndarray
    eigenvectors: list = field(default_factory=list)
    residuals: np.ndarray = None
    is_real: np.ndarray = None

    def __len__(self):
        return len(self.eigenvalues)

    @property
    def real_values(self) -> np.ndarray:
        return self.eigenvalues.real[self.is_real]

    def vector_matrix(self) -> np.ndarray:
        """Eigenvectors of the real eigenvalues stacked as columns."""
        cols = [v for v in self.eigenvectors if v is not None]
        return np.column_stack(cols) if cols else np.zeros((0, 0))


def is_real_eigenvalue(lam: complex, rel: float = REALNESS_REL) -> bool:
    return abs(lam.imag) <= rel * (1.0 + abs(lam))


def _sign_fix(u: np.ndarray) -> np.ndarray:
    # first numerically nonzero entry positive
    thresh = 1e-10 * np.max(np.abs(u))
    idx = np.flatnonzero(np.abs(u) > thresh)
    if idx.size and u[idx[0]] < 0:
        return -u
    return u


def _order(vals: np.ndarray) -> np.ndarray:
    vals = np.asarray(vals, dtype=np.complex128)
    # primary key: modulus descending; ties broken by real then imag descending
    mod = np.round(np.abs(vals), 12)
    return np.lexsort((-vals.imag, -vals.real, -mod))


def leading_eigenpair(A, tol: float = 1e-10, max_iter: int = 10000, src: RandomSource | None = None):
    """Dominant eigenpair by power iteration.

    The eigenvalue is the Rayleigh quotient ``u^T A u`` of the current unit
    iterate; iteration stops once ``||A u - lambda u||_2 <= tol * |lambda|``.
    The returned vector has its first nonzero entry positive.

    Raises
    ------
    ConvergenceError
        When the residual test is not met within ``max_iter`` iterations,
        as happens when the dominant eigenvalues form a complex pair.
    """
    A = as_matrix(A)
    n = A.shape[0]
    if A.shape[1] != n:
        raise DimensionError("leading_eigenpair needs a square matrix")
    if src is None:
        src = RandomSource(0, 0)
    scale = np.linalg.norm(A)
    if scale == 0.0:
        raise ConvergenceError("zero matrix has no dominant eigenpair", residual=0.0)

    for _ in range(5):
        u = src.sphere(n)
        y = A @ u
        if np.linalg.norm(y) >= 1e-8 * scale:
            break
    else:
        raise ConvergenceError("start vectors kept landing in the null space")

    res = math.inf
    lam = 0.0
    for _ in range(max_iter):
        lam = float(u @ y)
        res = float(np.linalg.norm(y - lam * u))
        if lam != 0.0 and res <= tol * abs(lam):
            u = _sign_fix(u)
            return lam, u
        ny = np.linalg.norm(y)
        if ny == 0.0:
            raise ConvergenceError("iterate annihilated by A", last=u, residual=res)
        u = y / ny
        y = A @ u
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations (residual {res:.3e})",
        last=(lam, u),
        residual=res,
    )


def hessenberg(A) -> np.ndarray:
    """Upper Hessenberg form of ``A`` by Householder similarity transforms."""
    H = as_matrix(A).copy()
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1 :, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        v = x.copy()
        v[0] += math.copysign(alpha, x[0])
        v /= np.linalg.norm(v)
        H[k + 1 :, k:] -= 2.0 * np.outer(v, v @ H[k + 1 :, k:])
        H[:, k + 1 :] -= 2.0 * np.outer(H[:, k + 1 :] @ v, v)
        H[k + 2 :, k] = 0.0
    return H


def _hqr(a: np.ndarray, max_sweeps: int = 30):
    """Eigenvalues of an upper Hessenberg matrix by Francis double-shift QR.

    Works in place on ``a``. Returns real and imaginary parts.
    """
    n = a.shape[0]
    wr = np.zeros(n)
    wi = np.zeros(n)
    anorm = float(np.sum(np.abs(np.triu(a, -1))))
    nn = n - 1
    t = 0.0
    while nn >= 0:
        its = 0
        while True:
            l = 0
            for ll in range(nn, 0, -1):
                s = abs(a[ll - 1, ll - 1]) + abs(a[ll, ll])
                if s == 0.0:
                    s = anorm
                if abs(a[ll, ll - 1]) <= DEFLATION_REL * s:
                    a[ll, ll - 1] = 0.0
                    l = ll
                    break
            x = a[nn, nn]
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
                break
            y = a[nn - 1, nn - 1]
            w = a[nn, nn - 1] * a[nn - 1, nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = math.sqrt(abs(q))
                x += t
                if q >= 0.0:
                    z = p + math.copysign(z, p)
                    wr[nn - 1] = wr[nn] = x + z
                    if z != 0.0:
                        wr[nn] = x - w / z
                    wi[nn - 1] = wi[nn] = 0.0
                else:
                    wr[nn - 1] = wr[nn] = x + p
                    wi[nn - 1] = -z
                    wi[nn] = z
                nn -= 2
                break
            if its == max_sweeps:
                raise EigenError(f"QR iteration failed to deflate row {nn}")
            if its in (10, 20):
                # exceptional shift
                t += x
                for i in range(nn + 1):
                    a[i, i] -= x
                s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
                x = y = 0.75 * s
                w = -0.4375 * s * s
            its += 1
            m = nn - 2
            while m >= l:
                z = a[m, m]
                r = x - z
                s = y - z
                p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
                q = a[m + 1, m + 1] - z - r - s
                r = a[m + 2, m + 1]
                s = abs(p) + abs(q) + abs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = abs(a[m, m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(a[m - 1, m - 1]) + abs(z) + abs(a[m + 1, m + 1]))
                if u + v == v:
                    break
                m -= 1
            for i in range(m + 2, nn + 1):
                a[i, i - 2] = 0.0
                if i != m + 2:
                    a[i, i - 3] = 0.0
            for k in range(m, nn):
                if k != m:
                    p = a[k, k - 1]
                    q = a[k + 1, k - 1]
                    r = a[k + 2, k - 1] if k != nn - 1 else 0.0
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = math.copysign(math.sqrt(p * p + q * q + r * r), p)
                if s == 0.0:
                    continue
                if k == m:
                    if l != m:
                        a[k, k - 1] = -a[k, k - 1]
                else:
                    a[k, k - 1] = -s * x
                p += s
                x = p / s
                y = q / s
                z = r / s
                q /= p
                r /= p
                # row transform on columns k..nn
                if k != nn - 1:
                    pr = a[k, k : nn + 1] + q * a[k + 1, k : nn + 1] + r * a[k + 2, k : nn + 1]
                    a[k + 2, k : nn + 1] -= pr * z
                else:
                    pr = a[k, k : nn + 1] + q * a[k + 1, k : nn + 1]
                a[k + 1, k : nn + 1] -= pr * y
                a[k, k : nn + 1] -= pr * x
                # column transform on rows l..min(nn, k+3)
                hi = min(nn, k + 3) + 1
                if k != nn - 1:
                    pc = x * a[l:hi, k] + y * a[l:hi, k + 1] + z * a[l:hi, k + 2]
                    a[l:hi, k + 2] -= pc * r
                else:
                    pc = x * a[l:hi, k] + y * a[l:hi, k + 1]
                a[l:hi, k + 1] -= pc * q
                a[l:hi, k] -= pc
    return wr, wi


def _inverse_iteration(A: np.ndarray, lam: float, iters: int = 3):
    """Eigenvector for real ``lam`` by shifted inverse iteration.

    Returns ``None`` when the shifted system is exactly singular in floating
    point (typical at a merged defective eigenvalue).
    """
    n = A.shape[0]
    scale = max(1.0, float(np.max(np.abs(A))))
    shift = lam + 1e3 * np.finfo(float).eps * scale * n
    B = A - shift * np.eye(n)
    # deterministic, generic right-hand side
    x = 1.0 + np.cos(np.arange(1, n + 1, dtype=np.float64))
    x /= np.linalg.norm(x)
    for _ in range(iters):
        try:
            y = np.linalg.solve(B, x)
        except np.linalg.LinAlgError:
            return None
        ny = np.linalg.norm(y)
        if not np.isfinite(ny) or ny == 0.0:
            return None
        x = y / ny
    return _sign_fix(x)


def _null_vector(A: np.ndarray, lam: float, which: int = 0) -> np.ndarray:
    """Right singular vector of ``A - lam*I`` for its ``which``-th smallest singular value."""
    n = A.shape[0]
    _, _, vt = np.linalg.svd(A - lam * np.eye(n))
    return _sign_fix(vt[n - 1 - min(which, n - 1)].copy())


def _polish_defective_clusters(A: np.ndarray, vals: np.ndarray, rel: float = 1e-4) -> np.ndarray:
    """Replace numerically defective eigenvalue clusters by their mean.

    A Jordan block of size k splits under rounding into k eigenvalues about
    eps**(1/k) apart, while the cluster mean stays accurate to O(eps). A
    cluster is treated as defective when ``A - mean*I`` has fewer than k
    singular values inside the cluster radius; close but semisimple
    eigenvalues (k small singular values) are left untouched.
    """
    n = len(vals)
    if n < 2:
        return vals
    scale = max(1.0, float(np.max(np.abs(A))))
    tau = rel * scale
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(vals[i] - vals[j]) <= tau:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = vals.copy()
    for members in groups.values():
        k = len(members)
        if k < 2:
            continue
        mean = complex(np.mean(vals[members]))
        if abs(mean.imag) <= tau:
            mean = complex(mean.real, 0.0)
        B = A.astype(np.complex128) - mean * np.eye(n)
        sv = np.linalg.svd(B, compute_uv=False)
        if int(np.sum(sv <= tau)) < k:
            out[members] = mean
    return out


def full_spectrum(A, tol: float = 1e-10, vectors: bool = True, max_dim: int = MAX_DENSE_DIM) -> EigenEstimate:
    """All eigenvalues of a square real matrix, complex-capable.

    Eigenvalues come from Francis double-shift QR on the Hessenberg form,
    with numerically defective clusters replaced by their mean. For every
    eigenvalue classified as real (see :func:`is_real_eigenvalue`) an
    eigenvector is recovered by inverse iteration on ``A``. ``tol`` is only
    reported against; the residuals are stored whatever their size.
    """
    A = as_matrix(A)
    n = A.shape[0]
    if A.shape[1] != n:
        raise DimensionError("full_spectrum needs a square matrix")
    if n > max_dim:
        raise ValueError(f"dense eigensolver limited to n <= {max_dim}")
    if n == 1:
        wr, wi = np.array([A[0, 0]]), np.zeros(1)
    else:
        wr, wi = _hqr(hessenberg(A))
    vals = _polish_defective_clusters(A, wr + 1j * wi)
    order = _order(vals)
    vals = vals[order]
    real = np.array([is_real_eigenvalue(v) for v in vals], dtype=bool)
    vecs = []
    res = np.full(n, np.nan)
    seen = {}
    first = {}
    for i, (lam, ok) in enumerate(zip(vals, real)):
        if not (ok and vectors):
            vecs.append(None)
            continue
        lr = float(lam.real)
        # repeated values take successive singular directions
        copy = seen.get(lr, 0)
        seen[lr] = copy + 1
        u = _inverse_iteration(A, lr) if copy == 0 else None
        r = np.inf if u is None else float(np.linalg.norm(A @ u - lr * u))
        if r > tol * max(1.0, abs(lr)):
            v = _null_vector(A, lr, copy)
            rv = float(np.linalg.norm(A @ v - lr * v))
            if rv < r:
                u, r = v, rv
        if r > tol * max(1.0, abs(lr)) and lr in first:
            # defective: fewer independent eigenvectors than copies
            u = first[lr]
            r = float(np.linalg.norm(A @ u - lr * u))
        first.setdefault(lr, u)
        vecs.append(u)
        res[i] = r
    return EigenEstimate(eigenvalues=vals, eigenvectors=vecs, residuals=res, is_real=real)


def symmetric_spectrum(S, tol: float = 1e-12, max_sweeps: int = 100) -> EigenEstimate:
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps continue until the off-diagonal Frobenius mass falls below
    ``tol`` times the Frobenius norm of ``S``.
    """
    S = as_matrix(S)
    n = S.shape[0]
    if S.shape[1] != n:
        raise DimensionError("symmetric_spectrum needs a square matrix")
    asym = float(np.max(np.abs(S - S.T)))
    if asym > 1e-12 * max(1.0, float(np.max(np.abs(S)))):
        raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
    a = 0.5 * (S + S.T)
    V = np.eye(n)
    fro = np.linalg.norm(a)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * fro or fro == 0.0:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300 + 1e-18 * (abs(a[p, p]) + abs(a[q, q])):
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q]
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :]
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q]
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        raise ConvergenceError("Jacobi sweeps did not converge")
    w = np.diag(a).copy()
    order = _order(w)
    w = w[order]
    V = V[:, order]
    vecs = [_sign_fix(V[:, i]) for i in range(n)]
    res = np.array([np.linalg.norm(S @ v - lam * v) for lam, v in zip(w, vecs)])
    return EigenEstimate(
        eigenvalues=w.astype(np.complex128),
        eigenvectors=vecs,
        residuals=res,
        is_real=np.ones(n, dtype=bool),
    )


def top_r_real(A, r: int, tol: float = 1e-10) -> EigenEstimate:
    """The ``r`` largest-modulus eigenvalues of ``A`` with realness flags."""
    A = as_matrix(A)
    if not 1 <= r <= A.shape[0]:
        raise ValueError("need 1 <= r <= n")
    est = full_spectrum(A, tol=tol)
    return EigenEstimate(
        eigenvalues=est.eigenvalues[:r],
        eigenvectors=est.eigenvectors[:r],
        residuals=est.residuals[:r],
        is_real=est.is_real[:r],
    )
