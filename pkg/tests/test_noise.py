import math

import numpy as np
import pytest

from cohspec.eigen import symmetric_spectrum
from cohspec.linalg import RandomSource
from cohspec.noise import (
    DiscreteDist,
    NoiseParams,
    NoiseSpec,
    regime_check,
    sample_completion,
    sample_discrete,
    sample_gaussian_hetero,
    sample_network,
    symmetrize,
)


def test_gaussian_entries_and_params():
    H, prm = sample_gaussian_hetero(200, RandomSource(1))
    assert abs(H.mean()) <= 0.02
    assert prm.sigma == 1.0
    assert prm.B == pytest.approx(5 * math.sqrt(math.log(200)))


def test_gaussian_per_entry_variance():
    # variance of a fixed entry across redraws lies in [0.49, 1]
    src = RandomSource(2)
    draws = np.array([sample_gaussian_hetero(3, src)[0] for _ in range(10**4)])
    var = draws.var(axis=0)
    assert np.all(var >= 0.49 / 1.1) and np.all(var <= 1.0 * 1.1)
    mean = draws.mean(axis=0)
    assert np.all(np.abs(mean) <= 4 / math.sqrt(10**4))


def test_gaussian_symmetric_variant():
    H, _ = sample_gaussian_hetero(30, RandomSource(3), symmetric=True)
    assert np.array_equal(H, H.T)


def test_completion_examples():
    src = RandomSource(4)
    u = np.ones(10) / math.sqrt(10)
    Ms = 5 * np.outer(u, u)
    M, H, _ = sample_completion(Ms, 1.0, src)
    assert np.array_equal(M, Ms) and not H.any()
    M, H, prm = sample_completion(Ms, 0.3, src)
    assert prm.B / prm.sigma == pytest.approx(1 / math.sqrt(0.3))
    assert np.array_equal(H + Ms, M)
    assert set(np.unique(M)) <= {0.0, Ms[0, 0] / 0.3}
    with pytest.raises(ValueError):
        sample_completion(Ms, 0.0, src)


def test_completion_rank_one_params():
    n, lam = 20, 3.0
    u = np.zeros(n)
    u[:5] = 0.5
    mu = n * 0.25
    _, _, prm = sample_completion(lam * np.outer(u, u), 0.4, RandomSource(0))
    assert prm.B == pytest.approx(lam * mu / (n * 0.4))
    assert prm.sigma == pytest.approx(lam * mu / (n * math.sqrt(0.4)))


def test_completion_is_unbiased():
    Ms = np.array([[2.0, -1.0], [-1.0, 0.5]])
    src = RandomSource(5)
    p = 0.3
    draws = np.array([sample_completion(Ms, p, src)[0] for _ in range(10**4)])
    se = np.abs(Ms) * math.sqrt((1 - p) / p) / math.sqrt(10**4)
    assert np.all(np.abs(draws.mean(axis=0) - Ms) <= 3 * se)


def test_network_examples():
    src = RandomSource(6)
    A, H, _ = sample_network(np.zeros((4, 4)), src)
    assert not A.any() and not H.any()
    A, H, _ = sample_network(np.ones((4, 4)), src)
    assert np.all(A == 1) and not H.any()
    _, _, prm = sample_network(np.full((5, 5), 0.25), src)
    assert prm.sigma == pytest.approx(0.5) and prm.B == 1.0
    with pytest.raises(ValueError):
        sample_network(np.full((2, 2), 1.5), src)


def test_network_entry_mean():
    src = RandomSource(7)
    P = np.full((2, 2), 0.2)
    draws = np.array([sample_network(P, src)[1] for _ in range(10**4)])
    assert np.all(np.abs(draws.mean(axis=0)) <= 4 * 0.4 / 100)


def test_discrete_examples():
    src = RandomSource(8)
    _, prm = sample_discrete(5, DiscreteDist.rademacher(), src)
    assert prm.sigma == 1.0 and prm.B == 1.0
    d = DiscreteDist(((-2, 0.25), (0, 0.5), (2, 0.25)))
    assert d.sigma2 == 2.0 and d.B == 2.0
    with pytest.raises(ValueError):
        sample_discrete(3, ((-1, 0.25), (3, 0.25), (0, 0.5)), src, symmetric=True)


def test_discrete_rejects_bad_distributions():
    with pytest.raises(ValueError):
        DiscreteDist(((1.0, 0.5), (-1.0, 0.4)))
    with pytest.raises(ValueError):
        DiscreteDist(((1.0, 0.5), (0.0, 0.5)))


def test_discrete_symmetric_odd_moments_vanish():
    src = RandomSource(9)
    d = DiscreteDist(((-2, 0.25), (0, 0.5), (2, 0.25)))
    draws = np.array([sample_discrete(2, d, src, symmetric=True)[0][0, 1] for _ in range(10**4)])
    for q in (1, 3):
        m = draws**q
        assert abs(m.mean()) <= 4 * m.std() / 100


def test_symmetrize_examples():
    S = np.array([[1.0, 2.0], [2.0, 3.0]])
    assert np.array_equal(symmetrize(S), S)
    assert np.array_equal(symmetrize([[0, 1], [9, 0]]), [[0, 1], [1, 0]])
    W = symmetrize(np.random.default_rng(0).standard_normal((6, 6)))
    symmetric_spectrum(W)


def test_regime_check_values():
    n = 50
    ratio = regime_check(NoiseParams(1.0, 1.0), n)
    assert ratio == pytest.approx(math.sqrt(math.log(n) ** 3 / n))
    # at n = 50 the equal-parameter ratio is just above 1
    assert ratio == pytest.approx(1.09425, abs=1e-5)
    assert regime_check(NoiseParams(1.0, 0.0), 10) == 0.0
    n = 10**4
    rho = math.log(n) / n
    assert regime_check(NoiseParams(math.sqrt(rho), 1.0), n) == pytest.approx(math.log(n))
    with pytest.raises(ValueError):
        regime_check(NoiseParams(1.0, 1.0), 2)


def test_noise_spec_dispatch():
    src = RandomSource(10)
    H, prm = NoiseSpec("discrete_iid", {"support": ((-1, 0.5), (1, 0.5))}, symmetric=True).sample(4, src)
    assert np.array_equal(H, H.T) and prm.B == 1.0
    H, _ = NoiseSpec("gaussian_hetero").sample(6, src)
    assert H.shape == (6, 6)
    P = np.full((3, 3), 0.5)
    H, prm = NoiseSpec("bernoulli_network", {"P": P}).sample(3, src)
    assert set(np.unique(H)) <= {-0.5, 0.5}
    with pytest.raises(ValueError):
        NoiseSpec("cauchy")
