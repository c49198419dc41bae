"""Command-line interface.

Exit codes: 0 success, 2 bad configuration or input, 3 runtime failure,
4 enumeration budget exceeded.

Settings come from three layers, later ones winning: built-in defaults, a
JSON object given with ``--config`` (flat keys named like the long
options, with dashes or underscores), then explicit flags.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from . import bounds as bd
from .eigen import EigenError, full_spectrum, leading_eigenpair, symmetric_spectrum
from .experiments import (
    DEFAULTS,
    EXPERIMENTS,
    ExperimentAbort,
    ExperimentConfig,
    read_csv,
    run_experiment,
    summarize,
    worker_count,
)
from .linalg import ConvergenceError, RandomSource
from .noise import DiscreteDist, sample_gaussian_hetero
from .oracle import DEFAULT_BUDGET, THREE_POINT, BudgetExceeded, identity_suite, state_count, moment_check_grid
from .signal import coherence, make_signal, scheme_one, scheme_two

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_BUDGET = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# matrix text format


def read_matrix(path) -> np.ndarray:
    """Read ``n_rows n_cols`` followed by whitespace-separated rows."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise ConfigError(f"{path}: empty file")
    head = lines[0].split()
    try:
        nr, nc = int(head[0]), int(head[1])
        if len(head) != 2 or nr < 1 or nc < 1:
            raise ValueError
    except (ValueError, IndexError):
        raise ConfigError(f"{path}: first line must be 'n_rows n_cols'") from None
    if len(lines) - 1 != nr:
        raise ConfigError(f"{path}: expected {nr} rows, found {len(lines) - 1}")
    rows = []
    for i, ln in enumerate(lines[1:], start=2):
        try:
            vals = [float(t) for t in ln.split()]
        except ValueError:
            raise ConfigError(f"{path}:{i}: non-numeric entry") from None
        if len(vals) != nc:
            raise ConfigError(f"{path}:{i}: expected {nc} entries, found {len(vals)}")
        rows.append(vals)
    A = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(A)):
        raise ConfigError(f"{path}: non-finite entries")
    return A


def write_matrix(A, path) -> None:
    A = np.asarray(A, dtype=np.float64)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{A.shape[0]} {A.shape[1]}\n")
        for row in A:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


# ---------------------------------------------------------------------------
# option parsing helpers


def _seed(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2^64)")
    return v


def _int_list(text):
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    if isinstance(text, int):
        return [text]
    try:
        return [int(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    if isinstance(text, (int, float)):
        return [float(text)]
    try:
        return [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _options(sub):
    """Map of option dest -> parser action for config-file validation."""
    return {a.dest: a for a in sub._actions if a.dest not in ("help", "config", "command", "print_config")}


def _resolve(args, sub, defaults):
    """Merge defaults, config file and explicit flags."""
    opts = _options(sub)
    settings = dict(defaults)
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        for key, val in data.items():
            dest = key.replace("-", "_")
            if dest not in opts:
                raise ConfigError(f"unknown config key {key!r}")
            act = opts[dest]
            if act.type is not None and val is not None:
                try:
                    val = act.type(val)
                except (argparse.ArgumentTypeError, ValueError, TypeError) as exc:
                    raise ConfigError(f"config key {key!r}: {exc}") from exc
            if act.choices is not None and val not in act.choices:
                raise ConfigError(f"config key {key!r}: {val!r} not in {list(act.choices)}")
            settings[dest] = val
    for dest in opts:
        v = getattr(args, dest, None)
        if v is not None:
            settings[dest] = v
    return settings


def canonical(settings: dict) -> str:
    """Stable JSON form of a resolved configuration."""
    return json.dumps(settings, sort_keys=True, indent=2)


def _require_seed(settings):
    if settings.get("seed") is None:
        raise ConfigError("this command is stochastic; pass --seed")


def _fmt(v):
    if isinstance(v, float):
        if math.isinf(v) or math.isnan(v):
            return str(v)
        return f"{v:.6g}"
    return str(v)


# ---------------------------------------------------------------------------
# commands


def cmd_gen_signal(s, out):
    _require_seed(s)
    n, r = s["n"], s["rank"]
    if n is None or n < 1:
        raise ConfigError("--n is required and must be >= 1")
    if not 1 <= r <= n:
        raise ConfigError("--rank must lie in [1, n]")
    lam = s["lambda_star"] or [1.0] * r
    if len(lam) != r:
        raise ConfigError(f"--lambda-star needs {r} values")
    mu = s["mu"]
    if not 1 <= mu <= n:
        raise ConfigError("--mu must lie in [1, n]")
    src = RandomSource(s["seed"], 0)
    make = scheme_one if s["scheme"] == 1 else scheme_two
    if r == 1:
        U = make(n, mu, src)[:, None]
    else:
        Q, _ = np.linalg.qr(np.column_stack([make(n, mu, src) for _ in range(r)]))
        U = Q
    try:
        spec, M = make_signal(lam, U)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if s["noise"] == "gaussian":
        H, _ = sample_gaussian_hetero(n, src.spawn(1))
        M = M + H
    if s["out"]:
        write_matrix(M, s["out"])
    rep = coherence(spec.U_star, spec.lambda_star)
    print(f"n={n} rank={r} mu={_fmt(rep.mu)} mu0={_fmt(rep.mu0)} kappa={_fmt(rep.kappa)}", file=out)
    if s["out"]:
        print(f"wrote {s['out']}", file=out)
    return EXIT_OK


def cmd_eigen(s, out):
    if not s["matrix_file"]:
        raise ConfigError("a matrix file is required")
    A = read_matrix(s["matrix_file"])
    if A.shape[0] != A.shape[1]:
        raise ConfigError(f"matrix must be square, got {A.shape}")
    method = s["method"]
    if method == "power":
        lam, _ = leading_eigenpair(A, tol=s["tol"], src=RandomSource(s["seed"] or 0, 0))
        print(_fmt(lam), file=out)
        return EXIT_OK
    if method == "symmetric":
        try:
            est = symmetric_spectrum(A, tol=s["tol"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    else:
        est = full_spectrum(A, tol=s["tol"])
    top = s["top"] or len(est.eigenvalues)
    for i in range(min(top, len(est.eigenvalues))):
        lam = est.eigenvalues[i]
        if est.is_real[i]:
            print(f"{_fmt(float(lam.real))}\tresidual={est.residuals[i]:.2e}", file=out)
        else:
            print(f"{_fmt(float(lam.real))}{'+' if lam.imag >= 0 else '-'}{_fmt(abs(float(lam.imag)))}j\tcomplex", file=out)
    return EXIT_OK


def _bound_rows(s):
    sig, B, n = s["sigma"], s["B"], s["n"]
    mu, lam, a_inf, k, p = s["mu"], s["lambda_star"], s["a_inf"], s["k"], s["p"]
    lam = lam[0] if isinstance(lam, list) else lam
    x_inf = y_inf = a_inf if a_inf is not None else 1.0 / math.sqrt(n)
    N = s["support"] or n
    calls = [
        ("spectral_norm", lambda: bd.spectral_norm_bound(sig, B, n)),
        ("prior_eigenvalue", lambda: bd.prior_eigenvalue_bound(sig, B, n, mu)),
        ("linear_k1", lambda: bd.linear_bound_lem4(sig, B, n, x_inf, y_inf)),
        ("moment_p", lambda: bd.moment_bound_thm2(n, k, p, sig, B, N, N, x_inf, y_inf)),
        ("highprob_sparse", lambda: bd.highprob_bound_cor1(n, k, sig, B, N, N, x_inf, y_inf)),
        ("highprob_unit", lambda: bd.main_bound_thm3(n, k, sig, B, x_inf, y_inf)),
        ("mean", lambda: bd.mean_bound_lem3(n, k, sig, B)),
        ("symmetric_highprob", lambda: bd.sym_bound_thm4(n, k, sig, B, x_inf, y_inf)),
    ]
    if lam is not None:
        a = a_inf if a_inf is not None else math.sqrt(mu / n)
        calls += [
            ("master_rank_one", lambda: bd.master_rank_one(sig, B, n, mu, lam, a, check_signal=False)),
            ("eigenvalue_rank_one", lambda: bd.eigenvalue_rank_one(sig, B, n, mu, lam)),
        ]
    rows = []
    for name, fn in calls:
        try:
            v = fn()
            rows.append((name, v.total, v.branch_sigma, v.branch_B, ""))
        except ValueError as exc:
            rows.append((name, None, None, None, str(exc)))
    return rows


def cmd_bounds(s, out):
    if s["n"] is None or s["n"] < 3:
        raise ConfigError("--n must be >= 3")
    if s["sigma"] < 0 or s["B"] < 0:
        raise ConfigError("--sigma and --B must be nonnegative")
    if not 1 <= s["mu"] <= s["n"]:
        raise ConfigError("--mu must lie in [1, n]")
    print(f"# {bd.CONSTANTS_CONVENTION}; natural logarithms", file=out)
    print("bound\ttotal\tbranch_sigma\tbranch_B", file=out)
    for name, tot, bs, bb, err in _bound_rows(s):
        if err:
            print(f"{name}\tn/a\tn/a\tn/a\t# {err}", file=out)
        else:
            print(f"{name}\t{_fmt(tot)}\t{_fmt(bs)}\t{_fmt(bb)}", file=out)
    return EXIT_OK


def _support(s):
    if s["dist"] is not None:
        try:
            raw = json.loads(s["dist"]) if isinstance(s["dist"], str) else s["dist"]
            return DiscreteDist(tuple((float(v), float(p)) for v, p in raw))
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad --dist: {exc}") from exc
    size = s["support"]
    if size == 2:
        return DiscreteDist.rademacher()
    if size == 3:
        return THREE_POINT
    if size is None or size < 2:
        raise ConfigError("--support must be >= 2")
    # evenly spaced symmetric support with uniform weights
    half = size // 2
    vals = [float(v) for v in range(-half, half + 1) if size % 2 or v != 0]
    return DiscreteDist(tuple((v, 1.0 / size) for v in vals))


def cmd_verify_oracle(s, out):
    dist = _support(s)
    n, budget = s["n"], s["budget"]
    if n < 1:
        raise ConfigError("--n must be >= 1")
    if s["symmetric"] and not dist.is_symmetric():
        raise ConfigError("distribution is not symmetric about 0 but symmetry was demanded")
    s_eff = int(np.count_nonzero(dist.probs > 0))
    for label, sym in (("symmetric", True), ("asymmetric", False)):
        cnt = state_count(n, s_eff, sym)
        if cnt > budget:
            print(f"budget exceeded: {label} enumeration needs {cnt} states (budget {budget})", file=sys.stderr)
            return EXIT_BUDGET
    workers = worker_count(s["workers"])
    ok = True
    if dist.is_symmetric():
        rows, cat = identity_suite(n, dist, tuple(s["k"]), budget=budget, workers=workers)
        for name, passed, err in rows:
            ok &= passed
            print(f"{'PASS' if passed else 'FAIL'}\t{name}\tmax_abs_error={err:.3e}", file=out)
        for k, ratio in sorted(cat.items()):
            print(f"INFO\tcatalan ratio k={k}\t{_fmt(ratio)}", file=out)
    else:
        print("SKIP\tsymmetric identities need a symmetric distribution", file=out)
    ns = sorted({2, n}) if n >= 2 else [n]
    print("n\tk\tp\tdist\tvectors\tcentered_moment\tbound\tratio", file=out)
    for nn, k, p, dname, pname, rep in moment_check_grid(ns=ns, dists={"input": dist}, budget=budget):
        print(f"{nn}\t{k}\t{p}\t{dname}\t{pname}\t{_fmt(rep.exact_centered_p)}\t{_fmt(rep.bound_value)}\t{_fmt(rep.ratio)}", file=out)
    return EXIT_OK if ok else EXIT_RUNTIME


def cmd_experiment(s, out):
    _require_seed(s)
    name = s["name"]
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}")
    try:
        cfg = ExperimentConfig(
            experiment=name,
            n_grid=tuple(s["n"] or DEFAULTS[name]["n_grid"]),
            mu_exponents=tuple(s["mu_exponents"] or DEFAULTS[name]["mu_exponents"]),
            trials=s["trials"],
            seed=s["seed"],
            scheme=s["scheme"] or 0,
            output_path=s["out"] or f"{name}.csv",
            tol=s["tol"],
            record_wall_time=bool(s["record_wall_time"]),
            workers=s["workers"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    res = run_experiment(cfg)
    _print_summary(res.records, out, seed=cfg.seed)
    for note in res.notes:
        print(f"# {note}", file=out)
    print(f"# wrote {len(res.records)} rows to {cfg.output_path}", file=out)
    return EXIT_OK


def _print_summary(records, out, seed=0, level=0.95):
    rows, slopes = summarize(records, level=level, seed=seed)
    print("n\tclass\tmu_target\ttrials\tmean_abs_error\tci_lo\tci_hi", file=out)
    for r in rows:
        print(f"{r['n']}\t{r['class_index']}\t{r['mu_target']}\t{r['trials']}\t{_fmt(r['mean'])}\t{_fmt(r['lo'])}\t{_fmt(r['hi'])}", file=out)
    print("class\tslope\tintercept\tr_squared", file=out)
    classes = sorted({r["class_index"] for r in rows})
    for c in classes:
        if c in slopes:
            sl, ic, r2 = slopes[c]
            print(f"{c}\t{sl:.4f}\t{ic:.4f}\t{r2:.4f}", file=out)
        else:
            print(f"{c}\tn/a\tn/a\tn/a", file=out)


def cmd_fit(s, out):
    if not s["csv_file"]:
        raise ConfigError("a CSV file is required")
    try:
        recs = read_csv(s["csv_file"])
    except OSError as exc:
        raise ConfigError(f"cannot read {s['csv_file']}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if not recs:
        raise ConfigError("CSV has no data rows")
    _print_summary(recs, out, level=s["level"])
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    p = _Parser(prog="cohspec", description="Spectral estimation under coherence-controlled signal-plus-noise models.")
    p.add_argument("--version", action="version", version=f"cohspec {__version__}")
    subs = p.add_subparsers(dest="command", parser_class=_Parser)
    table = {}

    def sub(name, fn, defaults, help_):
        sp = subs.add_parser(name, help=help_)
        sp.add_argument("--config", help="JSON file with flat option keys")
        sp.add_argument("--print-config", action="store_true", help="print the resolved configuration and exit")
        table[name] = (sp, fn, defaults)
        return sp

    g = sub("gen-signal", cmd_gen_signal,
            {"rank": 1, "mu": 1.0, "scheme": 1, "lambda_star": None, "noise": "none", "out": None, "n": None, "seed": None},
            "generate a signal matrix with a target coherence")
    g.add_argument("--n", type=int)
    g.add_argument("--rank", type=int)
    g.add_argument("--mu", type=float)
    g.add_argument("--scheme", type=int, choices=(1, 2))
    g.add_argument("--lambda-star", type=_float_list)
    g.add_argument("--noise", choices=("none", "gaussian"))
    g.add_argument("--seed", type=_seed)
    g.add_argument("--out")

    e = sub("eigen", cmd_eigen, {"method": "full", "tol": 1e-10, "top": None, "seed": None, "matrix_file": None},
            "print the spectrum of a stored matrix")
    e.add_argument("matrix_file", nargs="?")
    e.add_argument("--method", choices=("full", "symmetric", "power"))
    e.add_argument("--tol", type=float)
    e.add_argument("--top", type=int)
    e.add_argument("--seed", type=_seed)

    b = sub("bounds", cmd_bounds,
            {"sigma": 1.0, "B": 1.0, "n": None, "mu": 1.0, "lambda_star": None, "a_inf": None, "k": 2, "p": 2, "support": None},
            "evaluate the closed-form bounds")
    b.add_argument("--sigma", type=float)
    b.add_argument("--B", type=float, dest="B")
    b.add_argument("--n", type=int)
    b.add_argument("--mu", type=float)
    b.add_argument("--lambda-star", type=float)
    b.add_argument("--a-inf", type=float)
    b.add_argument("--k", type=int)
    b.add_argument("--p", type=int)
    b.add_argument("--support", type=int, help="support size of x and y (default n)")

    v = sub("verify-oracle", cmd_verify_oracle,
            {"n": 3, "support": 2, "dist": None, "symmetric": False, "budget": DEFAULT_BUDGET, "k": [1, 2, 3, 4], "workers": None},
            "run the exact enumeration identities and moment-bound table")
    v.add_argument("--n", type=int)
    v.add_argument("--support", type=int)
    v.add_argument("--dist", help='JSON list of [value, prob] pairs, e.g. "[[-1,0.5],[1,0.5]]"')
    v.add_argument("--symmetric", action="store_const", const=True, help="reject distributions not symmetric about 0")
    v.add_argument("--budget", type=int)
    v.add_argument("--k", type=_int_list)
    v.add_argument("--workers", type=int)

    x = sub("experiment", cmd_experiment,
            {"name": None, "seed": None, "trials": 100, "n": None, "mu_exponents": None, "scheme": None,
             "out": None, "tol": 1e-10, "record_wall_time": False, "workers": None},
            "run a Monte-Carlo experiment and write a CSV")
    x.add_argument("name", nargs="?", help=", ".join(EXPERIMENTS))
    x.add_argument("--seed", type=_seed)
    x.add_argument("--trials", type=int)
    x.add_argument("--n", type=_int_list, help="comma-separated n grid")
    x.add_argument("--mu-exponents", type=_float_list)
    x.add_argument("--scheme", type=int, choices=(1, 2))
    x.add_argument("--out")
    x.add_argument("--tol", type=float)
    x.add_argument("--record-wall-time", action="store_const", const=True)
    x.add_argument("--workers", type=int)

    f = sub("fit", cmd_fit, {"csv_file": None, "level": 0.95}, "fit log-log rates to a results CSV")
    f.add_argument("csv_file", nargs="?")
    f.add_argument("--level", type=float)
    return p, table


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser, table = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            parser.print_help(sys.stderr)
            return EXIT_CONFIG
        sp, fn, defaults = table[args.command]
        settings = _resolve(args, sp, defaults)
        if args.print_config:
            print(canonical(settings), file=out)
            return EXIT_OK
        return fn(settings, out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConvergenceError, EigenError, ExperimentAbort, RuntimeError, ValueError, FloatingPointError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
