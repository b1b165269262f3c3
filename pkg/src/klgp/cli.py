"""Command-line interface.

Four subcommands::

    klgp kl-build     --config FILE [overrides]   build + store an expansion
    klgp fit-predict  --config FILE [overrides]   regression on a CSV dataset
    klgp bayes        --config FILE [overrides]   hyperparameter posterior
    klgp bench SUITE  --output FILE [--tsv]       benchmark tables

Configs are flat ``key = value`` text ('#' comments allowed); every key can
be overridden by the flag of the same name (``--n 25``).  Unknown keys are
rejected before any computation.  Datasets are CSV with header ``x,y`` (1D)
or ``x1,x2,y`` (2D).  All file outputs are written atomically and are
byte-identical across runs for a fixed config and seed; wall-clock timings
go to stdout only (add --timings to bench files to include a seconds
column).

Exit codes: 0 success, 2 usage/config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
import time

import numpy as np

from .bayes import BayesGrid, PriorSpec, bayes_fit
from .diagnostics import effective_kernel_error
from .errors import NumericalError
from .kernels import KernelSpec, as_callback
from .kl1d import kl_build_nonsmooth, kl_build_smooth, kl_sample, kl_truncate
from .kl2d import kl_build_2d, kl2d_truncate
from .regression import Dataset, design_matrix, predict, ridge_fit
from .storage import atomic_write_text, load_expansion, save_expansion

__all__ = ["main"]


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# config schema and parsing

def _parse_domain(text):
    parts = [float(p) for p in str(text).replace(";", ",").split(",")]
    if len(parts) == 2:
        return (parts[0], parts[1])
    if len(parts) == 4:
        return ((parts[0], parts[1]), (parts[2], parts[3]))
    raise ConfigError(f"domain needs 2 numbers (interval) or 4 (rectangle), got {text!r}")


_KERNEL_KEYS = {
    "family": (str, None),
    "amplitude": (float, 1.0),
    "lengthscale": (float, 1.0),
    "nu": (float, None),
    "dimension": (int, 1),
    "domain": (_parse_domain, (-1.0, 1.0)),
}

SCHEMAS = {
    "kl-build": {
        **_KERNEL_KEYS,
        "n": (int, None),
        "m": (int, None),
        "output": (str, None),
        "eigenvalues_output": (str, None),
        "l2_error": (bool, False),
        "sample_count": (int, 0),
        "sample_points": (int, 200),
        "seed": (int, 0),
        "samples_output": (str, None),
    },
    "fit-predict": {
        **_KERNEL_KEYS,
        "n": (int, None),
        "m": (int, None),
        "expansion": (str, None),
        "data": (str, None),
        "sigma": (float, None),
        "queries": (str, None),
        "query_count": (int, 200),
        "output": (str, None),
    },
    "bayes": {
        "family": (str, None),
        "nu": (float, None),
        "domain": (_parse_domain, (-1.0, 1.0)),
        "n": (int, 140),
        "data": (str, None),
        "alpha_scale": (float, 3.0),
        "sigma_scale": (float, 3.0),
        "ell_lo": (float, 0.02),
        "ell_hi": (float, 1.0),
        "n_ell": (int, 100),
        "n_alpha": (int, 40),
        "n_sigma": (int, 40),
        "alpha_pin": (float, None),
        "sigma_pin": (float, None),
        "output": (str, None),
        "coefficients_output": (str, None),
    },
}

_REQUIRED = {
    "kl-build": ("family", "n", "output"),
    "fit-predict": ("family", "data", "sigma", "output"),
    "bayes": ("family", "data", "output"),
}


def _coerce(caster, raw, key):
    if caster is bool:
        if isinstance(raw, bool):
            return raw
        text = str(raw).strip().lower()
        if text in ("1", "true", "yes", "on"):
            return True
        if text in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"key {key!r}: expected a boolean, got {raw!r}")
    try:
        return caster(raw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"key {key!r}: {exc}") from None


def read_config(path, schema):
    """Parse a flat key = value file against a schema; unknown keys fail."""
    values = {}
    with open(path, "r") as handle:
        for lineno, line in enumerate(handle, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {text!r}")
            key, raw = (part.strip() for part in text.split("=", 1))
            if key not in schema:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in values:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            values[key] = _coerce(schema[key][0], raw, key)
    return values


def resolve_config(command, config_path, overrides):
    schema = SCHEMAS[command]
    values = {key: default for key, (_, default) in schema.items()}
    if config_path is not None:
        values.update(read_config(config_path, schema))
    for key, raw in overrides.items():
        if raw is not None:
            values[key] = _coerce(schema[key][0], raw, key)
    missing = [key for key in _REQUIRED[command] if values.get(key) is None]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")
    return values


def _kernel_from_config(cfg):
    return KernelSpec(
        family=cfg["family"],
        amplitude=cfg.get("amplitude", 1.0),
        lengthscale=cfg.get("lengthscale", 1.0),
        nu=cfg.get("nu"),
        dim=cfg.get("dimension", 1),
    )


def _check_domain_matches(cfg):
    domain = cfg["domain"]
    dim = cfg.get("dimension", 1)
    is_rect = isinstance(domain[0], tuple)
    if dim == 2 and not is_rect:
        raise ConfigError("dimension 2 needs a rectangle domain 'ax,bx,ay,by'")
    if dim == 1 and is_rect:
        raise ConfigError("dimension 1 needs an interval domain 'a,b'")
    return domain


# ---------------------------------------------------------------------------
# dataset / CSV helpers

def read_dataset_csv(path, sigma):
    """CSV with header x,y or x1,x2,y -> Dataset; bad rows name their line."""
    with open(path, "r") as handle:
        lines = [line.rstrip("\n") for line in handle]
    if not lines:
        raise ConfigError(f"{path}: empty dataset file")
    header = [h.strip().lower() for h in lines[0].split(",")]
    if header == ["x", "y"]:
        width = 2
    elif header == ["x1", "x2", "y"]:
        width = 3
    else:
        raise ConfigError(f"{path}:1: header must be 'x,y' or 'x1,x2,y', got {lines[0]!r}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != width:
            raise ConfigError(f"{path}:{lineno}: expected {width} columns, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: non-numeric value in {line!r}") from None
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    data = np.asarray(rows)
    inputs = data[:, 0] if width == 2 else data[:, :2]
    return Dataset(inputs=inputs, targets=data[:, -1], noise=sigma)


def read_query_csv(path):
    with open(path, "r") as handle:
        lines = [line.rstrip("\n") for line in handle]
    header = [h.strip().lower() for h in lines[0].split(",")]
    if header == ["x"]:
        width = 1
    elif header == ["x1", "x2"]:
        width = 2
    else:
        raise ConfigError(f"{path}:1: query header must be 'x' or 'x1,x2'")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != width:
            raise ConfigError(f"{path}:{lineno}: expected {width} columns")
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: non-numeric value") from None
    pts = np.asarray(rows)
    return pts[:, 0] if width == 1 else pts


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_table(path, header, rows, tsv=False):
    sep = "\t" if tsv else ","
    lines = [sep.join(header)]
    lines.extend(sep.join(_fmt(v) for v in row) for row in rows)
    atomic_write_text(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# subcommands

def _build_expansion(spec, domain, n):
    if spec.dim == 2:
        return kl_build_2d(as_callback(spec), domain, n)
    if spec.smooth:
        return kl_build_smooth(as_callback(spec), domain, n)
    return kl_build_nonsmooth(as_callback(spec), domain, n)


def cmd_kl_build(cfg):
    spec = _kernel_from_config(cfg)
    domain = _check_domain_matches(cfg)
    started = time.perf_counter()
    expansion = _build_expansion(spec, domain, cfg["n"])
    if cfg["m"] is not None:
        truncate = kl2d_truncate if spec.dim == 2 else kl_truncate
        expansion = truncate(expansion, cfg["m"])
    save_expansion(expansion, cfg["output"])
    eig_path = cfg["eigenvalues_output"] or cfg["output"] + ".eigenvalues.csv"
    write_table(eig_path, ["index", "eigenvalue"],
                [(i + 1, float(v)) for i, v in enumerate(expansion.eigenvalues)])
    build_seconds = time.perf_counter() - started
    if cfg["l2_error"]:
        eps = effective_kernel_error(as_callback(spec), expansion)
        print(f"l2_error {eps:.6e}")
    if cfg["sample_count"] > 0:
        if spec.dim != 1:
            raise ConfigError("prior sampling via the CLI is 1D only")
        a, b = domain
        grid = np.linspace(a, b, cfg["sample_points"])
        rows = []
        for draw in range(cfg["sample_count"]):
            values = kl_sample(expansion, cfg["seed"] + draw, grid)
            rows.extend((draw, float(x), float(v)) for x, v in zip(grid, values))
        samples_path = cfg["samples_output"] or cfg["output"] + ".samples.csv"
        write_table(samples_path, ["draw", "x", "value"], rows)
    print(f"built {expansion.algorithm} expansion: n={cfg['n']} m={expansion.m} "
          f"domain={domain} [{build_seconds:.3f}s]")
    print(f"wrote {cfg['output']} and {eig_path}")
    return 0


def cmd_fit_predict(cfg):
    spec = _kernel_from_config(cfg)
    domain = _check_domain_matches(cfg)
    dataset = read_dataset_csv(cfg["data"], cfg["sigma"])
    if (dataset.inputs.ndim == 2) != (spec.dim == 2):
        raise ConfigError("dataset dimensionality does not match the kernel dimension")

    started = time.perf_counter()
    if cfg["expansion"] is not None:
        expansion = load_expansion(cfg["expansion"])
    else:
        if cfg["n"] is None:
            raise ConfigError("need either 'expansion' or 'n' to build one inline")
        expansion = _build_expansion(spec, domain, cfg["n"])
        if cfg["m"] is not None:
            truncate = kl2d_truncate if spec.dim == 2 else kl_truncate
            expansion = truncate(expansion, cfg["m"])
    build_seconds = time.perf_counter() - started

    started = time.perf_counter()
    design = design_matrix(expansion, dataset)
    summary = ridge_fit(design, dataset)
    fit_seconds = time.perf_counter() - started

    if cfg["queries"] is not None:
        queries = read_query_csv(cfg["queries"])
        if (np.asarray(queries).ndim == 2) != (spec.dim == 2):
            raise ConfigError("query dimensionality does not match the kernel dimension")
    elif spec.dim == 1:
        a, b = expansion.domain
        queries = np.linspace(a, b, cfg["query_count"])
    else:
        (a, b), (c, d) = expansion.domain
        side = max(int(math.isqrt(cfg["query_count"])), 2)
        gx = np.linspace(a, b, side)
        gy = np.linspace(c, d, side)
        queries = np.column_stack([np.repeat(gx, side), np.tile(gy, side)])

    started = time.perf_counter()
    result = predict(expansion, summary, queries)
    predict_seconds = time.perf_counter() - started

    if spec.dim == 1:
        header = ["x", "mean", "latent_variance", "predictive_variance"]
        rows = list(zip(map(float, np.atleast_1d(queries)),
                        map(float, np.atleast_1d(result.mean)),
                        map(float, np.atleast_1d(result.latent_variance)),
                        map(float, np.atleast_1d(result.predictive_variance))))
    else:
        header = ["x1", "x2", "mean", "latent_variance", "predictive_variance"]
        rows = [(float(p[0]), float(p[1]), float(mu), float(lv), float(pv))
                for p, mu, lv, pv in zip(queries, result.mean,
                                         result.latent_variance,
                                         result.predictive_variance)]
    write_table(cfg["output"], header, rows)
    print(f"fit N={dataset.size} m={expansion.m} sigma={dataset.noise} "
          f"[build {build_seconds:.3f}s, fit {fit_seconds:.3f}s, "
          f"predict {predict_seconds:.3f}s]")
    print(f"wrote {cfg['output']}")
    return 0


def cmd_bayes(cfg):
    spec = KernelSpec(family=cfg["family"], nu=cfg.get("nu"), dim=1)
    domain = cfg["domain"]
    if isinstance(domain[0], tuple):
        raise ConfigError("bayes runs on an interval domain 'a,b'")
    priors = PriorSpec(alpha_scale=cfg["alpha_scale"],
                       sigma_scale=cfg["sigma_scale"],
                       ell_bounds=(cfg["ell_lo"], cfg["ell_hi"]))
    grid = BayesGrid(ell_count=cfg["n_ell"], alpha_count=cfg["n_alpha"],
                     sigma_count=cfg["n_sigma"],
                     alpha_pin=cfg["alpha_pin"], sigma_pin=cfg["sigma_pin"])
    # sigma here only seeds the Dataset stub; inference marginalizes it.
    dataset = read_dataset_csv(cfg["data"], sigma=1.0)
    started = time.perf_counter()
    posterior = bayes_fit(spec, priors, grid, dataset, domain, n=cfg["n"])
    seconds = time.perf_counter() - started

    report = [
        "klgp bayes report",
        f"family = {spec.family}" + (f" (nu = {spec.nu})" if spec.nu else ""),
        f"N = {dataset.size}",
        f"n = {cfg['n']}",
        f"grid = {grid.ell_count} x {grid.alpha_count} x {grid.sigma_count}",
        f"log_normalizer = {_fmt(posterior.log_normalizer)}",
        f"alpha_mean = {_fmt(posterior.alpha_mean)}",
        f"alpha_variance = {_fmt(posterior.alpha_variance)}",
        f"sigma_mean = {_fmt(posterior.sigma_mean)}",
        f"sigma_variance = {_fmt(posterior.sigma_variance)}",
        f"ell_mean = {_fmt(posterior.ell_mean)}",
        f"ell_variance = {_fmt(posterior.ell_variance)}",
    ]
    atomic_write_text(cfg["output"], "\n".join(report) + "\n")
    coef_path = cfg["coefficients_output"] or cfg["output"] + ".coefficients.csv"
    write_table(coef_path, ["degree", "coefficient"],
                [(i, float(c)) for i, c in
                 enumerate(posterior.mean_series.coefficients)])
    print(f"bayes fit N={dataset.size} n={cfg['n']} [{seconds:.2f}s]")
    print(f"alpha_mean={posterior.alpha_mean:.6f} "
          f"sigma_mean={posterior.sigma_mean:.6f} "
          f"ell_mean={posterior.ell_mean:.6f}")
    print(f"wrote {cfg['output']} and {coef_path}")
    return 0


# ---------------------------------------------------------------------------
# bench suites

def _bench_se_1d(timings):
    spec = KernelSpec("squared-exponential", lengthscale=0.2)
    rows = []
    for n in range(5, 55, 5):
        started = time.perf_counter()
        expansion = kl_build_smooth(as_callback(spec), (-1, 1), n)
        eps = effective_kernel_error(as_callback(spec), expansion)
        seconds = time.perf_counter() - started
        rows.append((n, eps) + ((seconds,) if timings else ()))
    header = ["n", "l2_error"] + (["seconds"] if timings else [])
    return header, rows


def _bench_matern_1d(timings):
    spec = KernelSpec("matern", lengthscale=0.2, nu=1.5)
    rows = []
    for n in range(10, 60, 5):
        started = time.perf_counter()
        expansion = kl_build_smooth(as_callback(spec), (-1, 1), n)
        eps = effective_kernel_error(as_callback(spec), expansion)
        seconds = time.perf_counter() - started
        rows.append((n, eps) + ((seconds,) if timings else ()))
    header = ["n", "l2_error"] + (["seconds"] if timings else [])
    return header, rows


def _bench_alg1_vs_alg3(timings):
    rows = []
    for nu in (0.5, 2.5):
        spec = KernelSpec("matern", lengthscale=0.2, nu=nu)
        kernel = as_callback(spec)
        reference = kl_build_nonsmooth(kernel, (-1, 1), 200).eigenvalues[19]
        for n in range(20, 180, 20):
            started = time.perf_counter()
            err1 = abs(kl_build_smooth(kernel, (-1, 1), n).eigenvalues[19] - reference)
            err3 = abs(kl_build_nonsmooth(kernel, (-1, 1), n).eigenvalues[19] - reference)
            seconds = time.perf_counter() - started
            rows.append((nu, n, err1, err3) + ((seconds,) if timings else ()))
    header = ["nu", "n", "alg1_lambda20_error", "alg3_lambda20_error"]
    return header + (["seconds"] if timings else []), rows


def _bench_se_2d(timings):
    spec = KernelSpec("squared-exponential", lengthscale=0.25, dim=2)
    rows = []
    for n in (10, 12, 15, 17, 20):
        started = time.perf_counter()
        expansion = kl_build_2d(as_callback(spec), ((-1, 1), (-1, 1)), n)
        eps = effective_kernel_error(as_callback(spec), expansion)
        seconds = time.perf_counter() - started
        rows.append((n, eps) + ((seconds,) if timings else ()))
    header = ["n_per_axis", "l2_error"] + (["seconds"] if timings else [])
    return header, rows


def _bench_bayes(timings):
    rows = []
    for n_obs in (10, 100, 1000):
        rng = np.random.default_rng(810)
        xs = np.linspace(-1, 1, n_obs)
        ys = np.cos(3 * np.exp(xs)) + 0.1 * rng.standard_normal(n_obs)
        dataset = Dataset(xs, ys, 0.1)
        started = time.perf_counter()
        posterior = bayes_fit(KernelSpec("matern", nu=1.5), PriorSpec(),
                              BayesGrid(), dataset, (-1, 1), n=140)
        seconds = time.perf_counter() - started
        rows.append((n_obs, 140, posterior.alpha_mean, posterior.sigma_mean,
                     posterior.ell_mean) + ((seconds,) if timings else ()))
    header = ["N", "n", "alpha_mean", "sigma_mean", "ell_mean"]
    return header + (["seconds"] if timings else []), rows


BENCH_SUITES = {
    "se-1d": _bench_se_1d,
    "matern-1d": _bench_matern_1d,
    "alg1-vs-alg3": _bench_alg1_vs_alg3,
    "se-2d": _bench_se_2d,
    "bayes": _bench_bayes,
}


def cmd_bench(args):
    suite = BENCH_SUITES[args.suite]
    started = time.perf_counter()
    header, rows = suite(args.timings)
    write_table(args.output, header, rows, tsv=args.tsv)
    print(f"suite {args.suite}: {len(rows)} rows -> {args.output} "
          f"[{time.perf_counter() - started:.2f}s]")
    return 0


# ---------------------------------------------------------------------------
# entry point

def _add_config_command(subparsers, name, help_text):
    parser = subparsers.add_parser(name, help=help_text)
    parser.add_argument("--config", help="flat key = value config file")
    for key in SCHEMAS[name]:
        parser.add_argument(f"--{key.replace('_', '-')}", dest=key,
                            metavar="V", help=f"override config key {key}")
    return parser


def build_parser():
    parser = argparse.ArgumentParser(
        prog="klgp",
        description="Reduced-rank Gaussian processes via quadrature eigensolvers",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    _add_config_command(subparsers, "kl-build", "build and store a KL expansion")
    _add_config_command(subparsers, "fit-predict", "regression on a CSV dataset")
    _add_config_command(subparsers, "bayes", "Bayesian hyperparameter inference")
    bench = subparsers.add_parser("bench", help="reproduce benchmark tables")
    bench.add_argument("suite", choices=sorted(BENCH_SUITES))
    bench.add_argument("--output", required=True)
    bench.add_argument("--tsv", action="store_true",
                       help="tab-separated output instead of CSV")
    bench.add_argument("--timings", action="store_true",
                       help="include a wall-clock column (breaks byte determinism)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "bench":
            return cmd_bench(args)
        overrides = {key: getattr(args, key) for key in SCHEMAS[args.command]}
        cfg = resolve_config(args.command, args.config, overrides)
        if args.command == "kl-build":
            return cmd_kl_build(cfg)
        if args.command == "fit-predict":
            return cmd_fit_predict(cfg)
        return cmd_bayes(cfg)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
