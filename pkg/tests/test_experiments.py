import math

import numpy as np
import pytest

from cohspec.experiments import (
    CSV_COLUMNS,
    ExperimentConfig,
    TrialRecord,
    bootstrap_ci,
    fit_rate,
    conditioned_perturbation_trials,
    mu_for,
    network_trial,
    read_csv,
    records_to_csv,
    run_completion,
    run_experiment,
    run_gauss_denoise,
    run_network,
    summarize,
    worker_count,
)
from cohspec.linalg import RandomSource
from cohspec.signal import coherence

SMALL = (60, 120, 240)


def test_config_validation():
    cfg = ExperimentConfig("network")
    assert cfg.n_grid == (512, 1024, 2048, 4096) and cfg.scheme == 2
    with pytest.raises(ValueError):
        ExperimentConfig("denoise")
    with pytest.raises(ValueError):
        ExperimentConfig("completion", n_grid=(100, 50))
    with pytest.raises(ValueError):
        ExperimentConfig("completion", n_grid=(100,), mu_exponents=(0.6,))
    with pytest.raises(ValueError):
        ExperimentConfig("gauss_denoise", trials=0)
    with pytest.raises(ValueError):
        ExperimentConfig("gauss_denoise", seed=-1)


def test_mu_classes():
    assert mu_for(4000, 0.0) == 1
    assert mu_for(4096, 1 / 3) == 16
    assert mu_for(500, 1.0) == 500


def test_gauss_zero_noise_is_exact():
    cfg = ExperimentConfig("gauss_denoise", n_grid=SMALL, trials=3, seed=1, noise_scale=0.0)
    res = run_gauss_denoise(cfg)
    assert len(res) == 3 * 3 * 4
    assert all(r.abs_error <= 1e-8 for r in res)
    for r in res:
        assert r.lambda_star == pytest.approx(math.sqrt(r.n * math.log(r.n)))


def test_completion_full_observation_is_exact():
    cfg = ExperimentConfig("completion", n_grid=SMALL, trials=3, seed=2, obs_prob=1.0)
    res = run_completion(cfg)
    assert all(r.abs_error <= 1e-8 for r in res)
    assert all(r.lambda_star == 1.0 for r in res)


def test_completion_cap_is_flagged():
    # mu = n^0.3 at n = 60 gives mu^2 ln n / n > 1
    cfg = ExperimentConfig("completion", n_grid=SMALL, mu_exponents=(0.0, 0.4), trials=2, seed=3)
    res = run_completion(cfg)
    assert res.obs_prob_capped > 0
    assert any("capped" in note for note in res.notes)


def test_network_deterministic_block_is_exact():
    m, n = 8, 40
    u = np.zeros(n)
    u[:m] = 1 / math.sqrt(m)
    lam_hat, clipped = network_trial(u, float(m), RandomSource(0))
    assert clipped == 0
    assert abs(lam_hat - m) <= 1e-8


def test_network_run_records():
    cfg = ExperimentConfig("network", n_grid=(64, 128, 256), trials=2, seed=4)
    res = run_network(cfg)
    assert len(res) == 3 * 3 * 2
    for r in res:
        assert r.lambda_star == max(r.mu_target, math.log(r.n))


def test_mu_realized_is_measured():
    cfg = ExperimentConfig("gauss_denoise", n_grid=SMALL, trials=2, seed=5)
    res = run_gauss_denoise(cfg)
    assert len({r.mu_realized for r in res}) > 1
    assert all(1 - 1e-9 <= r.mu_realized <= r.n + 1e-9 for r in res)


def test_csv_roundtrip_and_determinism(tmp_path):
    cfg = ExperimentConfig("completion", n_grid=SMALL, trials=2, seed=9, output_path=str(tmp_path / "a.csv"))
    res = run_experiment(cfg)
    cfg.output_path = str(tmp_path / "b.csv")
    cfg.workers = 2
    run_experiment(cfg)
    a = (tmp_path / "a.csv").read_bytes()
    assert a == (tmp_path / "b.csv").read_bytes()
    text = a.decode("utf-8")
    assert text.splitlines()[0] == ",".join(CSV_COLUMNS)
    assert "\r" not in text and text.endswith("\n")
    back = read_csv(tmp_path / "a.csv")
    assert back == res.records
    assert records_to_csv(back) == text


def test_read_csv_rejects_bad_header(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_csv(p)


def test_records_sorted():
    cfg = ExperimentConfig("gauss_denoise", n_grid=SMALL, trials=2, seed=6, workers=3)
    keys = [(r.n, r.mu_exponent, r.trial_index) for r in run_gauss_denoise(cfg)]
    assert keys == sorted(keys)


def test_wall_time_flag():
    cfg = ExperimentConfig("gauss_denoise", n_grid=SMALL, mu_exponents=(0.0,), trials=1, seed=1)
    assert all(r.wall_time_ms == 0.0 for r in run_gauss_denoise(cfg))
    cfg.record_wall_time = True
    assert all(r.wall_time_ms > 0.0 for r in run_gauss_denoise(cfg))


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("COHSPEC_THREADS", "2")
    assert worker_count() == 2 and worker_count(8) == 2 and worker_count(1) == 1
    monkeypatch.setenv("COHSPEC_THREADS", "many")
    with pytest.raises(ValueError):
        worker_count()


def test_fit_rate_examples():
    ns = [100, 400, 1600, 6400]
    slope, _, r2 = fit_rate([(n, 3 / math.sqrt(n)) for n in ns])
    assert slope == pytest.approx(-0.5, abs=1e-12) and r2 == pytest.approx(1.0)
    slope, _, _ = fit_rate([(n, 2.0) for n in ns])
    assert slope == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        fit_rate([(1, 1.0), (2, 0.0), (3, 1.0)])
    with pytest.raises(ValueError):
        fit_rate([(1, 1.0), (2, 1.0)])


def test_fit_rate_recovers_noisy_slope():
    rng = np.random.default_rng(1)
    ns = np.array([500, 1000, 2000, 4000, 8000, 16000])
    slopes = []
    for _ in range(200):
        vals = ns ** (-1 / 6) * np.exp(rng.normal(0, 0.05, ns.size))
        slopes.append(fit_rate(zip(ns, vals))[0])
    lo, hi = np.quantile(slopes, [0.025, 0.975])
    assert lo <= -1 / 6 <= hi
    assert abs(np.mean(slopes) + 1 / 6) <= 0.01


def test_bootstrap_examples():
    assert bootstrap_ci([2.5] * 20) == (2.5, 2.5)
    x = np.random.default_rng(0).standard_normal(10**4)
    lo, hi = bootstrap_ci(x, 0.95, 2000, RandomSource(1))
    assert lo <= 0 <= hi
    assert (hi - lo) == pytest.approx(2 * 1.96 / 100, rel=0.3)
    lo99, hi99 = bootstrap_ci(x, 0.99, 2000, RandomSource(1))
    assert lo99 <= lo and hi <= hi99
    with pytest.raises(ValueError):
        bootstrap_ci([1.0] * 5)


def test_summarize_classes_and_slopes(tmp_path):
    cfg = ExperimentConfig("gauss_denoise", n_grid=SMALL, trials=10, seed=7, output_path=str(tmp_path / "g.csv"))
    res = run_gauss_denoise(cfg)
    rows, slopes = summarize(res.records)
    assert len(rows) == 3 * 4 and set(slopes) == {0, 1, 2, 3}
    for row in rows:
        assert row["lo"] <= row["mean"] <= row["hi"]
    rows2, slopes2 = summarize(read_csv(tmp_path / "g.csv"))
    assert [r["mean"] for r in rows2] == [r["mean"] for r in rows]
    assert slopes2 == slopes


def test_conditioned_perturbation_small():
    pairs, rejected = conditioned_perturbation_trials(80, 20, seed=3)
    assert len(pairs) == 20 and rejected >= 0
    assert all(d <= b for d, b in pairs)


def test_trial_record_row_format():
    r = TrialRecord("network", 10, 2, 1.5, 0, 3.0, 2.5, 0.5, 42, 0.0)
    assert r.row() == ["network", 10, 2, "1.5", 0, "3.0", "2.5", "0.5", 42, "0.0"]
