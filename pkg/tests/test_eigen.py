import math

import numpy as np
import pytest

from cohspec.eigen import (
    EigenError,
    full_spectrum,
    hessenberg,
    is_real_eigenvalue,
    leading_eigenpair,
    symmetric_spectrum,
    top_r_real,
)
from cohspec.linalg import ConvergenceError, RandomSource, operator_norm
from oracles import charpoly_3x3, cubic_roots_integer, match_distance


def test_power_iteration_examples():
    lam, u = leading_eigenpair(np.diag([5.0, 1.0, -2.0]))
    assert lam == pytest.approx(5.0, rel=1e-10)
    assert np.allclose(u, [1, 0, 0], atol=1e-9)

    v = np.array([1.0, 1.0]) / math.sqrt(2)
    lam, u = leading_eigenpair(7.0 * np.outer(v, v))
    assert lam == pytest.approx(7.0, rel=1e-12)
    assert np.allclose(u, v, atol=1e-12)

    lam, u = leading_eigenpair(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert lam == pytest.approx(3.0, rel=1e-10)
    assert np.allclose(u, v, atol=1e-9)


def test_power_iteration_sign_convention_and_residual():
    rng = np.random.default_rng(0)
    for seed in range(20):
        A = rng.standard_normal((15, 15))
        w = rng.standard_normal(15)
        A = A + 30 * np.outer(w, w) / (w @ w)
        lam, u = leading_eigenpair(A, tol=1e-10, src=RandomSource(seed))
        assert np.linalg.norm(A @ u - lam * u) <= 1e-10 * abs(lam)
        first = u[np.flatnonzero(np.abs(u) > 1e-10 * np.abs(u).max())[0]]
        assert first > 0


def test_power_iteration_complex_pair_fails():
    with pytest.raises(ConvergenceError) as info:
        leading_eigenpair(np.array([[0.0, -1.0], [1.0, 0.0]]), max_iter=200)
    assert info.value.residual is not None


def test_full_spectrum_examples():
    est = full_spectrum(np.diag([4.0, -3.0, 1.0]))
    assert np.allclose(est.eigenvalues, [4, -3, 1], atol=1e-12)
    est = full_spectrum(np.array([[0.0, -1.0], [1.0, 0.0]]))
    assert sorted(est.eigenvalues, key=lambda z: z.imag) == pytest.approx([-1j, 1j], abs=1e-12)
    assert not est.is_real.any()
    assert est.eigenvectors == [None, None]
    # companion matrix of (t - 2)(t - 1)(t + 1) = t^3 - 2t^2 - t + 2
    C = np.array([[2.0, 1.0, -2.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    est = full_spectrum(C)
    assert np.allclose(est.eigenvalues.real, [2, 1, -1], atol=1e-12)
    assert np.all(est.residuals <= 1e-10)


def test_full_spectrum_matches_numpy_on_random_matrices():
    rng = np.random.default_rng(5)
    for n in (5, 12, 40):
        A = rng.standard_normal((n, n))
        est = full_spectrum(A)
        ref = np.linalg.eigvals(A)
        assert match_sorted(est.eigenvalues, ref) <= 1e-9 * max(1, np.abs(ref).max())
        mods = np.abs(est.eigenvalues)
        assert np.all(np.diff(mods) <= 1e-12)
        for lam, u, ok in zip(est.eigenvalues, est.eigenvectors, est.is_real):
            if ok:
                assert abs(np.linalg.norm(u) - 1) <= 1e-12


def match_sorted(a, b):
    a = np.sort_complex(np.round(np.asarray(a), 8))
    b = np.sort_complex(np.round(np.asarray(b), 8))
    return float(np.max(np.abs(a - b)))


def test_full_spectrum_size_limit():
    with pytest.raises(ValueError):
        full_spectrum(np.eye(5), max_dim=4)


def test_hessenberg_is_similarity():
    A = np.random.default_rng(3).standard_normal((8, 8))
    Hs = hessenberg(A)
    assert np.allclose(np.tril(Hs, -2), 0)
    assert np.trace(Hs) == pytest.approx(np.trace(A))
    assert np.linalg.norm(Hs, "fro") == pytest.approx(np.linalg.norm(A, "fro"))


def test_symmetric_spectrum_examples():
    est = symmetric_spectrum(np.eye(3))
    assert np.allclose(est.eigenvalues, 1)
    est = symmetric_spectrum(np.diag([2.0, -5.0]))
    assert np.allclose(est.eigenvalues.real, [-5, 2])
    est = symmetric_spectrum(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert np.allclose(est.eigenvalues.real, [3, 1])
    U = est.vector_matrix()
    s = 1 / math.sqrt(2)
    assert np.allclose(U[:, 0], [s, s])
    assert np.allclose(np.abs(U[:, 1]), [s, s]) and U[0, 1] * U[1, 1] < 0


def test_symmetric_spectrum_rejects_asymmetry():
    with pytest.raises(ValueError):
        symmetric_spectrum(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_symmetric_reconstruction():
    rng = np.random.default_rng(9)
    for _ in range(100):
        G = rng.standard_normal((20, 20))
        S = (G + G.T) / 2
        est = symmetric_spectrum(S)
        U = est.vector_matrix()
        lam = est.eigenvalues.real
        assert np.linalg.norm(U.T @ U - np.eye(20), 2) <= 1e-10
        err = np.linalg.norm(S - (U * lam) @ U.T, 2)
        assert err <= 1e-8 * np.linalg.norm(S, 2)


def test_top_r_real_examples():
    u = np.ones(6) / math.sqrt(6)
    est = top_r_real(4.0 * np.outer(u, u), 1)
    assert est.eigenvalues[0].real == pytest.approx(4.0)
    est = top_r_real(np.diag([5.0, 4.0, 0.1]), 2)
    assert np.allclose(est.eigenvalues.real, [5, 4]) and est.is_real.all()
    with pytest.raises(ValueError):
        top_r_real(np.eye(2), 3)


def test_top_r_real_rank_two_conditioned_instance():
    rng = np.random.default_rng(21)
    n = 60
    Q, _ = np.linalg.qr(rng.standard_normal((n, 2)))
    lam_star = np.array([400.0, -250.0])
    H = rng.standard_normal((n, n))
    M = (Q * lam_star) @ Q.T + H
    est = top_r_real(M, 2)
    assert est.is_real.all()
    assert np.allclose(sorted(est.eigenvalues.real), sorted(lam_star), atol=operator_norm(H))


def test_realness_tolerance():
    assert is_real_eigenvalue(3 + 1e-9j)
    assert not is_real_eigenvalue(3 + 1e-6j)


def test_integer_3x3_against_cubic_oracle():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        A = rng.integers(-2, 3, (3, 3))
        exact = cubic_roots_integer(*charpoly_3x3(A))
        est = full_spectrum(A.astype(float))
        worst = max(worst, match_distance(est.eigenvalues, exact))
        lam = est.eigenvalues
        res = est.residuals[est.is_real]
        assert np.all(res <= 1e-8 * np.maximum(1, np.abs(lam[est.is_real])))
    assert worst <= 1e-8


def test_defective_matrix_eigenvector():
    A = np.array([[0.0, -1.0, 0.0], [1.0, 2.0, 0.0], [1.0, 0.0, 2.0]])
    est = full_spectrum(A)
    assert np.allclose(sorted(est.eigenvalues.real), [1, 1, 2], atol=1e-12)
    assert np.all(est.residuals <= 1e-10)


def test_qr_budget_error_type():
    assert issubclass(EigenError, RuntimeError)
