"""
Does eigenvalue error depend on coherence?
==========================================

For each of three noise models we plant a rank-one signal whose
eigenvector is more or less spread out, estimate the top eigenvalue from
the noisy matrix, and fit how the mean error scales with ``n``. The
grids here are small so the script finishes in about a minute; the CLI
runs the full-size versions (``cohspec experiment <name> --seed ...``).
"""

# %%
from cohspec.experiments import ExperimentConfig, run_experiment, summarize

SEED = 2024

settings = {
    "gauss_denoise": dict(n_grid=(100, 200, 400, 800), mu_exponents=(0.0, 0.5, 1.0)),
    "completion": dict(n_grid=(100, 200, 400, 800), mu_exponents=(0.0, 0.2)),
    "network": dict(n_grid=(128, 256, 512, 1024), mu_exponents=(0.0, 1 / 3)),
}

# %%
# Each class is ``mu = round(n^alpha)``. Gaussian denoising should look flat
# in ``n`` for every class; completion should fall like ``n^-1/2``; in the
# network model the error falls more slowly as the coherence grows.
for name, kw in settings.items():
    cfg = ExperimentConfig(name, trials=20, seed=SEED, **kw)
    res = run_experiment(cfg)
    rows, slopes = summarize(res.records, resamples=500)
    print(f"\n{name}")
    for alpha, (c, (slope, _, r2)) in zip(cfg.mu_exponents, sorted(slopes.items())):
        means = [r["mean"] for r in rows if r["class_index"] == c]
        cells = ", ".join(f"{m:.3g}" for m in means)
        print(f"  alpha={alpha:.3f}  mean errors [{cells}]  slope {slope:+.3f} (r^2 {r2:.2f})")
    for note in res.notes:
        print("  note:", note)
