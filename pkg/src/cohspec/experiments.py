"""Monte-Carlo harness for rank-one eigenvalue estimation.

Three setups, each sweeping ``n`` and a set of coherence classes
``mu = max(1, round(n ** alpha))``:

``gauss_denoise``
    ``lambda* = sqrt(n ln n)``, sparse spherical ``u*`` (scheme one),
    heteroskedastic Gaussian noise.
``completion``
    ``lambda* = 1``, mixed ``u*`` (scheme two), entries observed with
    probability ``p = min(1, mu^2 ln n / n)`` and rescaled.
``network``
    ``lambda* = max(mu, ln n)``, ``P = lambda* |u*| |u*|^T`` clipped to
    ``[0, 1]``, Bernoulli adjacency.

Every trial draws from its own :class:`RandomSource` seeded by hashing
``(seed, experiment, n, class, trial)``, so results do not depend on
execution order or worker count.
"""

from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .eigen import leading_eigenpair
from .linalg import ConvergenceError, RandomSource, derive_seed, operator_norm
from .noise import sample_completion, sample_gaussian_hetero, sample_network
from .signal import coherence, scheme_one, scheme_two

__all__ = [
    "EXPERIMENTS",
    "DEFAULTS",
    "CSV_COLUMNS",
    "ExperimentConfig",
    "TrialRecord",
    "ExperimentResult",
    "ExperimentAbort",
    "mu_for",
    "gauss_trial",
    "completion_trial",
    "network_trial",
    "run_gauss_denoise",
    "run_completion",
    "run_network",
    "run_experiment",
    "write_csv",
    "records_to_csv",
    "read_csv",
    "fit_rate",
    "bootstrap_ci",
    "summarize",
    "class_slopes",
    "conditioned_perturbation_trials",
    "worker_count",
]

EXPERIMENTS = ("gauss_denoise", "completion", "network")

CSV_COLUMNS = (
    "experiment", "n", "mu_target", "mu_realized", "trial",
    "lambda_star", "lambda_hat", "abs_error", "seed", "wall_time_ms",
)

DEFAULTS = {
    "gauss_denoise": {"n_grid": (500, 1000, 2000, 4000), "mu_exponents": (0.0, 0.25, 0.5, 1.0), "scheme": 1},
    "completion": {"n_grid": (500, 1000, 2000, 4000), "mu_exponents": (0.0, 0.1, 0.2, 0.3), "scheme": 2},
    "network": {"n_grid": (512, 1024, 2048, 4096), "mu_exponents": (0.0, 1 / 3, 0.4), "scheme": 2},
}

CLIP_ABORT_FRACTION = 0.01


class ExperimentAbort(RuntimeError):
    """A run violated a hard guard (e.g. too many clipped probabilities)."""


def worker_count(requested: int | None = None) -> int:
    """Worker count capped by ``COHSPEC_THREADS`` (default: CPU count)."""
    cap = os.environ.get("COHSPEC_THREADS")
    limit = os.cpu_count() or 1
    if cap:
        try:
            limit = max(1, int(cap))
        except ValueError as exc:
            raise ValueError(f"COHSPEC_THREADS must be an integer, got {cap!r}") from exc
    if requested is None:
        return limit
    return max(1, min(int(requested), limit))


@dataclass
class ExperimentConfig:
    experiment: str
    n_grid: tuple = ()
    mu_exponents: tuple = ()
    trials: int = 100
    seed: int = 0
    scheme: int = 0
    output_path: str | None = None
    tol: float = 1e-10
    max_iter: int = 10000
    record_wall_time: bool = False
    workers: int | None = None
    noise_scale: float = 1.0
    obs_prob: float | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        d = DEFAULTS[self.experiment]
        if not self.n_grid:
            self.n_grid = d["n_grid"]
        if not self.mu_exponents:
            self.mu_exponents = d["mu_exponents"]
        if not self.scheme:
            self.scheme = d["scheme"]
        self.n_grid = tuple(int(v) for v in self.n_grid)
        self.mu_exponents = tuple(float(a) for a in self.mu_exponents)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ValueError("n_grid must be strictly increasing")
        if self.n_grid[0] < 3:
            raise ValueError("every n must be >= 3")
        if self.scheme not in (1, 2):
            raise ValueError("scheme must be 1 or 2")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.experiment in ("completion", "network"):
            for n in self.n_grid:
                for a in self.mu_exponents:
                    if mu_for(n, a) > math.sqrt(n):
                        raise ValueError(f"mu = {mu_for(n, a)} exceeds sqrt(n) at n = {n}")
        if self.obs_prob is not None and not 0 < self.obs_prob <= 1:
            raise ValueError("obs_prob must lie in (0, 1]")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TrialRecord:
    experiment: str
    n: int
    mu_target: int
    mu_realized: float
    trial_index: int
    lambda_star: float
    lambda_hat: float
    abs_error: float
    seed_used: int
    wall_time_ms: float = 0.0
    mu_exponent: float = field(default=math.nan, compare=False)

    def row(self) -> list:
        return [
            self.experiment, self.n, self.mu_target, repr(float(self.mu_realized)),
            self.trial_index, repr(float(self.lambda_star)), repr(float(self.lambda_hat)),
            repr(float(self.abs_error)), self.seed_used, repr(float(self.wall_time_ms)),
        ]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list
    failures: list = field(default_factory=list)
    clipped_entries: int = 0
    total_entries: int = 0
    obs_prob_capped: int = 0
    notes: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)


def mu_for(n: int, alpha: float) -> int:
    """Coherence target ``max(1, round(n ** alpha))``."""
    return max(1, int(round(n**alpha)))


def _estimate(M, src, tol, max_iter):
    lam, _ = leading_eigenpair(M, tol=tol, max_iter=max_iter, src=src)
    return lam


def gauss_trial(n, mu, src, scheme=1, noise_scale=1.0, tol=1e-10, max_iter=10000):
    """One Gaussian denoising trial; returns ``(u*, lambda*, lambda_hat)``."""
    u = scheme_one(n, mu, src) if scheme == 1 else scheme_two(n, mu, src)
    lam_star = math.sqrt(n * math.log(n))
    H, _ = sample_gaussian_hetero(n, src)
    M = np.outer(lam_star * u, u)
    if noise_scale:
        M += noise_scale * H
    return u, lam_star, _estimate(M, src.spawn(1), tol, max_iter)


def completion_trial(n, mu, src, scheme=2, obs_prob=None, tol=1e-10, max_iter=10000):
    """One matrix completion trial; returns ``(u*, lambda*, lambda_hat, p, capped)``."""
    u = scheme_two(n, mu, src) if scheme == 2 else scheme_one(n, mu, src)
    p_raw = mu * mu * math.log(n) / n
    capped = obs_prob is None and p_raw >= 1.0
    p = obs_prob if obs_prob is not None else min(1.0, p_raw)
    M_star = np.outer(u, u)
    M, _, _ = sample_completion(M_star, p, src)
    return u, 1.0, _estimate(M, src.spawn(1), tol, max_iter), p, capped


def network_trial(u, lambda_star, src, tol=1e-10, max_iter=10000):
    """One network trial for a given ``u*``.

    ``P = lambda* |u| |u|^T`` is clipped to ``[0, 1]``. Returns
    ``(lambda_hat, clipped_count)``.
    """
    a = np.abs(u)
    P = np.outer(lambda_star * a, a)
    over = P > 1.0
    clipped = int(np.count_nonzero(over))
    if clipped:
        P[over] = 1.0
    A, _, _ = sample_network(P, src)
    return _estimate(A, src.spawn(1), tol, max_iter), clipped


def _tasks(cfg: ExperimentConfig):
    for n in cfg.n_grid:
        for ci, alpha in enumerate(cfg.mu_exponents):
            for t in range(cfg.trials):
                yield n, ci, alpha, t


def _run(cfg: ExperimentConfig, trial_fn) -> ExperimentResult:
    res = ExperimentResult(cfg, [])

    def job(task):
        n, ci, alpha, t = task
        seed = derive_seed(cfg.seed, cfg.experiment, n, ci, t)
        src = RandomSource(seed, 0)
        t0 = time.perf_counter()
        try:
            out = trial_fn(n, mu_for(n, alpha), src)
        except ConvergenceError as exc:
            return task, seed, None, str(exc)
        ms = (time.perf_counter() - t0) * 1e3 if cfg.record_wall_time else 0.0
        return task, seed, (out, ms), None

    tasks = list(_tasks(cfg))
    workers = worker_count(cfg.workers)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, tasks))
    else:
        results = [job(t) for t in tasks]

    for (n, ci, alpha, t), seed, payload, err in results:
        mu = mu_for(n, alpha)
        if payload is None:
            res.failures.append({"n": n, "mu_target": mu, "trial": t, "seed": seed, "error": err})
            continue
        (u, lam_star, lam_hat, extra), ms = payload
        if cfg.experiment == "completion" and extra.get("capped"):
            res.obs_prob_capped += 1
        res.clipped_entries += extra.get("clipped", 0)
        res.total_entries += n * n
        res.records.append(
            TrialRecord(
                cfg.experiment, n, mu, coherence(u).mu, t, float(lam_star), float(lam_hat),
                abs(float(lam_hat) - float(lam_star)), seed, ms, alpha,
            )
        )
    res.records.sort(key=lambda r: (r.n, r.mu_exponent, r.trial_index))
    if res.failures:
        res.notes.append(f"{len(res.failures)} trial(s) failed to converge and were excluded")
    if res.obs_prob_capped:
        res.notes.append(f"observation probability capped at 1 in {res.obs_prob_capped} trial(s)")
    if res.clipped_entries:
        res.notes.append(f"{res.clipped_entries} of {res.total_entries} edge probabilities clipped to 1")
    return res


def _check(cfg, name):
    if cfg.experiment != name:
        raise ValueError(f"config is for {cfg.experiment!r}, not {name!r}")


def run_gauss_denoise(cfg: ExperimentConfig) -> ExperimentResult:
    _check(cfg, "gauss_denoise")

    def trial(n, mu, src):
        u, lam_star, lam_hat = gauss_trial(n, mu, src, cfg.scheme, cfg.noise_scale, cfg.tol, cfg.max_iter)
        return u, lam_star, lam_hat, {}

    return _finish(cfg, _run(cfg, trial))


def run_completion(cfg: ExperimentConfig) -> ExperimentResult:
    _check(cfg, "completion")

    def trial(n, mu, src):
        u, lam_star, lam_hat, p, capped = completion_trial(n, mu, src, cfg.scheme, cfg.obs_prob, cfg.tol, cfg.max_iter)
        return u, lam_star, lam_hat, {"capped": capped}

    return _finish(cfg, _run(cfg, trial))


def run_network(cfg: ExperimentConfig) -> ExperimentResult:
    """Network experiment.

    Raises
    ------
    ExperimentAbort
        If more than 1% of all edge probabilities had to be clipped.
    """
    _check(cfg, "network")

    def trial(n, mu, src):
        u = scheme_two(n, mu, src) if cfg.scheme == 2 else scheme_one(n, mu, src)
        lam_star = max(mu, math.log(n))
        lam_hat, clipped = network_trial(u, lam_star, src, cfg.tol, cfg.max_iter)
        return u, lam_star, lam_hat, {"clipped": clipped}

    res = _run(cfg, trial)
    if res.total_entries and res.clipped_entries > CLIP_ABORT_FRACTION * res.total_entries:
        raise ExperimentAbort(
            f"{res.clipped_entries} of {res.total_entries} edge probabilities exceeded 1 "
            f"(limit {CLIP_ABORT_FRACTION:.0%}); lower lambda* or mu"
        )
    return _finish(cfg, res)


def _finish(cfg, res):
    if cfg.output_path:
        write_csv(res.records, cfg.output_path)
    return res


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    return {
        "gauss_denoise": run_gauss_denoise,
        "completion": run_completion,
        "network": run_network,
    }[cfg.experiment](cfg)


# ---------------------------------------------------------------------------
# CSV


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


def write_csv(records, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(records_to_csv(records))


def read_csv(path) -> list:
    """Parse a results file back into :class:`TrialRecord` objects."""
    with open(path, encoding="utf-8", newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd, None)
        if header is None or tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {header!r}")
        out = []
        for i, row in enumerate(rd, start=2):
            if len(row) != len(CSV_COLUMNS):
                raise ValueError(f"line {i}: expected {len(CSV_COLUMNS)} fields, got {len(row)}")
            try:
                out.append(
                    TrialRecord(
                        row[0], int(row[1]), int(row[2]), float(row[3]), int(row[4]),
                        float(row[5]), float(row[6]), float(row[7]), int(row[8]), float(row[9]),
                    )
                )
            except ValueError as exc:
                raise ValueError(f"line {i}: {exc}") from exc
        return out


# ---------------------------------------------------------------------------
# statistics


def fit_rate(points):
    """Least-squares line through ``(ln n, ln value)``.

    Returns
    -------
    slope, intercept, r_squared : float
    """
    pts = [(float(n), float(v)) for n, v in points]
    if len(pts) < 3:
        raise ValueError("fit_rate needs at least 3 points")
    if any(n <= 0 or v <= 0 for n, v in pts):
        raise ValueError("fit_rate needs positive n and values")
    x = np.log([n for n, _ in pts])
    y = np.log([v for _, v in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return float(slope), float(intercept), r2


def bootstrap_ci(samples, level: float = 0.95, resamples: int = 2000, src: RandomSource | None = None):
    """Percentile bootstrap interval for the mean."""
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1 or x.size < 10:
        raise ValueError("bootstrap_ci needs at least 10 samples")
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    if np.all(x == x[0]):
        return float(x[0]), float(x[0])
    if src is None:
        src = RandomSource(0, 0)
    idx = src.generator.integers(0, x.size, size=(resamples, x.size))
    means = x[idx].mean(axis=1)
    a = (1 - level) / 2
    lo, hi = np.quantile(means, [a, 1 - a])
    return float(lo), float(hi)


def _classes(records):
    """Group records by coherence class; classes are ranked per ``n``."""
    by_n = {}
    for r in records:
        by_n.setdefault(r.n, {}).setdefault(r.mu_exponent if not math.isnan(r.mu_exponent) else None, []).append(r)
    out = {}
    for n, groups in by_n.items():
        if None in groups:
            # records read back from CSV: rank the distinct targets
            targets = sorted({r.mu_target for r in groups[None]})
            for r in groups[None]:
                out.setdefault((n, targets.index(r.mu_target)), []).append(r)
        else:
            for rank, key in enumerate(sorted(groups)):
                out[(n, rank)] = groups[key]
    return out


def summarize(records, level: float = 0.95, resamples: int = 2000, seed: int = 0):
    """Per ``(n, class)`` mean error with bootstrap interval, plus per-class slopes.

    Returns
    -------
    rows : list of dict
        Keys ``n, class_index, mu_target, trials, mean, lo, hi``.
    slopes : dict
        ``class_index -> (slope, intercept, r_squared)`` over ``n``.
    """
    groups = _classes(records)
    rows = []
    for (n, c), recs in sorted(groups.items()):
        err = np.array([r.abs_error for r in recs])
        mean = float(err.mean())
        if err.size >= 10:
            lo, hi = bootstrap_ci(err, level, resamples, RandomSource(derive_seed(seed, "ci", n, c), 0))
        else:
            lo = hi = math.nan
        mus = sorted({r.mu_target for r in recs})
        rows.append({"n": n, "class_index": c, "mu_target": mus[0] if len(mus) == 1 else mus,
                     "trials": int(err.size), "mean": mean, "lo": lo, "hi": hi})
    return rows, class_slopes(rows)


def class_slopes(rows):
    slopes = {}
    for c in sorted({r["class_index"] for r in rows}):
        pts = [(r["n"], r["mean"]) for r in rows if r["class_index"] == c and r["mean"] > 0]
        if len(pts) >= 3:
            slopes[c] = fit_rate(pts)
    return slopes


# ---------------------------------------------------------------------------
# eigenvector side check


def conditioned_perturbation_trials(n: int, trials: int, seed: int, ratio_range=(4.0, 12.0), noise: str = "gaussian"):
    """Rank-one eigenvector distance against ``(8 sqrt 2 / 3) ||H|| / |lambda*|``.

    Each attempt draws ``lambda* = c sqrt(n)`` with ``c`` uniform on
    ``ratio_range`` and keeps it only if ``||H|| <= lambda* / 4``. Returns
    a list of ``(distance, bound)`` for the kept trials and the number of
    rejected attempts.
    """
    out = []
    rejected = 0
    attempt = 0
    while len(out) < trials:
        src = RandomSource(derive_seed(seed, "conditioned", n, attempt), 0)
        attempt += 1
        u_star = src.sphere(n)
        lam_star = src.uniform(*ratio_range) * math.sqrt(n)
        if noise == "gaussian":
            H, _ = sample_gaussian_hetero(n, src)
        else:
            raise ValueError(f"unsupported noise {noise!r}")
        h = operator_norm(H)
        if h > lam_star / 4:
            rejected += 1
            continue
        M = np.outer(lam_star * u_star, u_star) + H
        _, u = leading_eigenpair(M, tol=1e-12, src=src.spawn(1))
        dist = min(np.linalg.norm(u - u_star), np.linalg.norm(u + u_star))
        out.append((float(dist), 8 * math.sqrt(2) / 3 * h / lam_star))
    return out, rejected
