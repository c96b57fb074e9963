"""Command-line front end.

Subcommands: ``simulate``, ``rate``, ``evaluate``, ``estimate-params`` and
``scan``. Engines are given as ``name:key=val,...``, e.g.
``vskf:v0=0.01,eps=3e-5,model=bt,eta=0.08``. Recognized keys:

    v0, vbar, K, sigma, eps, beta, model, s, kappa, eta, label

Every command writes plot-ready CSV files plus a ``manifest.txt`` into
``--out``. A manifest can be fed back through ``--config`` to reproduce a
run; explicit flags override values from the config file.

Exit codes: 0 success, 1 data error, 2 usage error.
"""
from __future__ import annotations

import argparse
import hashlib
import itertools
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .engines import Algorithm, EngineConfig, iterate, write_covariance, write_snapshots
from .evaluation import (
    OutcomeFrequencies,
    constant_forecast_scores,
    entropy,
    estimate_davidson_params,
    estimate_hfa_binary,
    evaluate_seasons,
    mean_windows,
    score_windows,
    write_report,
)
from .ingest import IngestError, Mode, parse_season
from .models import ModelKind, ModelSpec, parse_model_kind
from .schedule import DynamicsParams
from .synthetic import ORACLE, SyntheticConfig, run_experiment

EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2

_KEY_ALIASES = {
    "v0": "v0", "vbar": "v_bar", "v_bar": "v_bar", "k": "step_K", "sigma": "sigma",
    "eps": "epsilon", "epsilon": "epsilon", "beta": "beta", "model": "model",
    "s": "scale", "scale": "scale", "kappa": "kappa", "eta": "hfa", "hfa": "hfa",
    "label": "label",
}
_MODEL_FOR = {
    Algorithm.TRUESKILL: ModelKind.THURSTON,
    Algorithm.GLICKO: ModelKind.BRADLEY_TERRY,
    Algorithm.ELO: ModelKind.BRADLEY_TERRY,
}
FREQUENCY = "freq"


class UsageError(ValueError):
    pass


# --- engine specs -------------------------------------------------------------

def parse_engine_text(text: str) -> tuple[str, dict]:
    """Split ``name:key=val,...`` into the name and a dict of canonical keys."""
    name, _, rest = text.strip().partition(":")
    name = name.strip().lower()
    params = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"engine {text!r}: expected key=value, got {item!r}")
        canon = _KEY_ALIASES.get(key.strip().lower())
        if canon is None:
            raise UsageError(f"engine {text!r}: unknown key {key!r}")
        params[canon] = value.strip()
    return name, params


def build_engine(text: str, defaults: dict) -> tuple[str, EngineConfig | str]:
    """Engine label and config from a spec string plus command-level defaults.

    ``defaults`` may hold ``model``, ``scale``, ``hfa`` and ``kappa``.
    """
    name, params = parse_engine_text(text)
    label = params.pop("label", name)
    if name in (ORACLE, FREQUENCY):
        if params:
            raise UsageError(f"{name} takes no parameters")
        return label, name
    try:
        alg = Algorithm(name)
    except ValueError:
        raise UsageError(f"unknown algorithm {name!r}") from None
    try:
        num = {k: float(v) for k, v in params.items() if k != "model"}
    except ValueError as exc:
        raise UsageError(f"engine {text!r}: {exc}") from None
    kind = parse_model_kind(params.get("model") or _MODEL_FOR.get(alg) or defaults.get("model", "thurston"))
    scale = num.pop("scale", defaults.get("scale", 1.0))
    hfa = num.pop("hfa", defaults.get("hfa", 0.0))
    kappa = num.pop("kappa", defaults.get("kappa")) if kind is ModelKind.DAVIDSON else num.pop("kappa", None)
    dynamics = DynamicsParams(num.pop("beta", 1.0), num.pop("epsilon", 0.0))
    if alg in (Algorithm.TRUESKILL, Algorithm.GLICKO):
        num.setdefault("sigma", scale)
    model = ModelSpec(kind, scale, kappa, hfa)
    return label, EngineConfig(alg, model, dynamics, **num)


def build_engines(texts, defaults) -> dict:
    if not texts:
        raise UsageError("at least one engine is required")
    engines = {}
    for text in texts:
        label, cfg = build_engine(text, defaults)
        base, k = label, 2
        while label in engines:
            label, k = f"{base}_{k}", k + 1
        engines[label] = cfg
    return engines


def describe(cfg) -> str:
    if isinstance(cfg, str):
        return cfg
    parts = [f"{k}={v!r}" for k, v in sorted(cfg.hyperparameters().items())]
    m = cfg.model
    parts.append(f"model={m.kind.value}")
    parts.append(f"s={m.scale!r}")
    parts.append(f"eta={m.hfa!r}")
    if m.kappa is not None:
        parts.append(f"kappa={m.kappa!r}")
    return ";".join(parts)


def _safe(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", label)


# --- manifests and config files -----------------------------------------------

def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out_dir: Path, command: str, args: argparse.Namespace, inputs=(), extra=None):
    lines = ["meta.tool = skfrating", f"meta.version = {__version__}", f"meta.command = {command}"]
    for key in sorted(vars(args)):
        if key in ("func", "config", "out", "command"):
            continue
        value = getattr(args, key)
        if value is None or value is False:
            continue
        if isinstance(value, (list, tuple)):
            value = " ".join(str(v) for v in value)
        lines.append(f"{key} = {value}")
    for path in inputs:
        lines.append(f"input.{Path(path).name}.sha256 = {_digest(path)}")
    for key, value in (extra or {}).items():
        lines.append(f"{key} = {value}")
    (out_dir / "manifest.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_config(path) -> dict:
    """Flat ``key = value`` file; descriptive keys (``meta.*``, ``engine.*`` etc.) are ignored."""
    values = {}
    for n, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{n}: expected key = value")
        key = key.strip().replace("-", "_")
        if key.split(".", 1)[0] in ("meta", "input", "team", "engine"):
            continue
        values[key] = value.strip()
    return values


# --- commands -----------------------------------------------------------------

def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    synth = SyntheticConfig(
        M=args.M, D=args.D, beta_hat=args.beta_hat, epsilon_hat=args.epsilon_hat,
        sigma_obs=args.sigma, switch_day=args.switch_day,
        switch_count=args.switch_count or (0 if args.switch_day is None else 5),
        replicates=args.replicates, seed=args.seed,
    )
    defaults = {"model": args.model, "scale": args.sigma if args.scale is None else args.scale}
    engines = build_engines(args.engines, defaults)
    result = run_experiment(synth, engines, metric=args.metric, workers=args.workers)
    out = _out_dir(args)
    for label, series in result.series.items():
        series.to_csv(out / f"{_safe(label)}.csv")
    extra = {f"engine.{label}": describe(cfg) for label, cfg in engines.items()}
    write_manifest(out, "simulate", args, extra=extra)
    return EXIT_OK


def _load_seasons(paths, mode) -> list:
    if not paths:
        raise UsageError("no season files given")
    return [parse_season(p, mode) for p in paths]


def _pooled_frequencies(seasons, mode: Mode) -> OutcomeFrequencies:
    outcomes = [y for s in seasons for y in s.outcomes()]
    return OutcomeFrequencies.from_outcomes(outcomes, mode.n_outcomes)


def _data_defaults(args, seasons, mode: Mode) -> dict:
    freqs = _pooled_frequencies(seasons, mode)
    if mode is Mode.BINARY_FINAL:
        model = args.model or "bt"
        eta, kappa = estimate_hfa_binary(freqs.values), None
    else:
        model = args.model or "davidson"
        eta, kappa = estimate_davidson_params(freqs.values)
    defaults = {"model": model, "scale": args.scale or 1.0, "hfa": eta, "kappa": kappa}
    if args.eta is not None:
        defaults["hfa"] = args.eta
    if args.kappa is not None:
        defaults["kappa"] = args.kappa
    return defaults


def cmd_rate(args) -> int:
    mode = Mode(args.mode)
    seasons = _load_seasons([args.season], mode)
    season = seasons[0]
    engines = build_engines(args.engines, _data_defaults(args, seasons, mode))
    out = _out_dir(args)
    for label, cfg in engines.items():
        if isinstance(cfg, str):
            raise UsageError(f"{cfg} cannot produce a trajectory")
        states = [state for _, _, state in iterate(cfg, season.games, season.M)]
        write_snapshots(out / f"{_safe(label)}_trajectory.csv", states)
        if args.export_covariance and states[-1].cov is not None:
            write_covariance(out / f"{_safe(label)}_covariance.csv", states[-1])
    extra = {f"team.{i}": name for i, name in enumerate(season.team_names)}
    extra.update({f"engine.{label}": describe(cfg) for label, cfg in engines.items()})
    write_manifest(out, "rate", args, inputs=[args.season], extra=extra)
    return EXIT_OK


def _evaluate_row(league, cfg, seasons, freqs, H):
    if cfg == FREQUENCY:
        windows = [score_windows(constant_forecast_scores(s.outcomes(), freqs), s.M) for s in seasons]
        ls_init, ls_final = mean_windows(windows)
        model, algorithm, params = "frequency", "constant", ";".join(f"f{y}={f!r}" for y, f in enumerate(freqs.values))
    else:
        ls_init, ls_final = evaluate_seasons(cfg, seasons)
        model, algorithm, params = cfg.model.kind.value, cfg.algorithm.value, describe(cfg)
    return {"league": league, "model": model, "algorithm": algorithm, "params": params,
            "ls_init": repr(ls_init), "ls_final": repr(ls_final), "entropy": repr(H)}


def cmd_evaluate(args) -> int:
    mode = Mode(args.mode)
    seasons = _load_seasons(args.seasons, mode)
    engines = build_engines(args.engines, _data_defaults(args, seasons, mode))
    freqs = _pooled_frequencies(seasons, mode)
    H = entropy(freqs)
    rows = []
    for label, cfg in engines.items():
        if cfg == ORACLE:
            raise UsageError("the oracle engine exists only in simulations")
        rows.append(_evaluate_row(args.league, cfg, seasons, freqs, H))
    out = _out_dir(args)
    write_report(out / "report.csv", rows)
    write_manifest(out, "evaluate", args, inputs=args.seasons,
                   extra={f"engine.{label}": describe(cfg) for label, cfg in engines.items()})
    return EXIT_OK


def cmd_estimate_params(args) -> int:
    mode = Mode(args.mode)
    seasons = _load_seasons(args.seasons, mode)
    freqs = _pooled_frequencies(seasons, mode)
    header = [f"f{y}" for y in range(len(freqs))]
    values = [repr(f) for f in freqs.values]
    if mode is Mode.BINARY_FINAL:
        header += ["eta"]
        values += [repr(estimate_hfa_binary(freqs.values))]
    else:
        eta, kappa = estimate_davidson_params(freqs.values)
        header += ["eta", "kappa"]
        values += [repr(eta), repr(kappa)]
    header.append("entropy")
    values.append(repr(entropy(freqs)))
    text = ",".join(header) + "\n" + ",".join(values) + "\n"
    sys.stdout.write(text)
    if args.out:
        out = _out_dir(args)
        (out / "params.csv").write_text(text, encoding="utf-8")
        write_manifest(out, "estimate-params", args, inputs=args.seasons)
    return EXIT_OK


def _parse_grid(items) -> dict[str, list[str]]:
    grid = {}
    for item in items or ():
        key, sep, values = item.partition("=")
        vals = [v.strip() for v in values.split(",") if v.strip()]
        if not sep or not vals:
            raise UsageError(f"grid entry {item!r} must look like key=v1,v2,...")
        if key.strip().lower() not in _KEY_ALIASES:
            raise UsageError(f"unknown grid key {key!r}")
        grid[key.strip()] = vals
    if not grid:
        raise UsageError("empty grid")
    return grid


def _scan_cell(text, defaults, seasons):
    _, cfg = build_engine(text, defaults)
    return evaluate_seasons(cfg, seasons)


def cmd_scan(args) -> int:
    mode = Mode(args.mode)
    grid = _parse_grid(args.grid)
    seasons = _load_seasons(args.seasons, mode)
    defaults = _data_defaults(args, seasons, mode)
    keys = list(grid)
    base = [p for p in (args.fixed or "").split(",") if p.strip()]
    cells = list(itertools.product(*(grid[k] for k in keys)))
    texts = [f"{args.algorithm}:" + ",".join(base + [f"{k}={v}" for k, v in zip(keys, cell)])
             for cell in cells]
    for text in texts:
        build_engine(text, defaults)  # validate before any work
    workers = args.workers or int(os.environ.get("SKFRATING_WORKERS", "1"))
    if workers > 1 and len(texts) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan_cell, texts, [defaults] * len(texts), [seasons] * len(texts)))
    else:
        results = [_scan_cell(t, defaults, seasons) for t in texts]
    out = _out_dir(args)
    with open(out / "scan.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(["algorithm"] + keys + ["ls_init", "ls_final"]) + "\n")
        for cell, (ls_init, ls_final) in zip(cells, results):
            fh.write(",".join([args.algorithm, *cell, repr(ls_init), repr(ls_final)]) + "\n")
    write_manifest(out, "scan", args, inputs=args.seasons)
    return EXIT_OK


# --- argument parsing ---------------------------------------------------------

def _add_data_flags(p, multi: bool):
    if multi:
        p.add_argument("--seasons", nargs="+", help="season CSV files")
    p.add_argument("--mode", default=Mode.BINARY_FINAL.value, choices=[m.value for m in Mode])
    p.add_argument("--model", default=None, help="default model (bt for binary, davidson for ternary)")
    p.add_argument("--scale", type=float, default=None)
    p.add_argument("--eta", type=float, default=None, help="home boost (default: estimated from data)")
    p.add_argument("--kappa", type=float, default=None, help="Davidson draw parameter (default: estimated)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skfrating", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Monte Carlo comparison on synthetic seasons")
    p.add_argument("--config")
    p.add_argument("--M", type=int, default=20)
    p.add_argument("--D", type=int, default=100)
    p.add_argument("--replicates", type=int, default=1000)
    p.add_argument("--sigma", type=float, default=1.0, help="outcome noise; default engine scale")
    p.add_argument("--beta-hat", type=float, default=0.998)
    p.add_argument("--epsilon-hat", type=float, default=None)
    p.add_argument("--switch-day", type=int, default=None)
    p.add_argument("--switch-count", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--metric", choices=["kl", "log_score"], default="kl")
    p.add_argument("--model", default="thurston")
    p.add_argument("--scale", type=float, default=None)
    p.add_argument("--engines", nargs="+")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("rate", help="skill trajectories over one season")
    p.add_argument("--config")
    p.add_argument("--season")
    _add_data_flags(p, multi=False)
    p.add_argument("--engines", nargs="+")
    p.add_argument("--export-covariance", action="store_true")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("evaluate", help="log-score windows over league seasons")
    p.add_argument("--config")
    _add_data_flags(p, multi=True)
    p.add_argument("--league", default="league")
    p.add_argument("--engines", nargs="+")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("estimate-params", help="home boost and draw parameter from frequencies")
    p.add_argument("--config")
    _add_data_flags(p, multi=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_estimate_params)

    p = sub.add_parser("scan", help="grid search of hyperparameters")
    p.add_argument("--config")
    _add_data_flags(p, multi=True)
    p.add_argument("--algorithm", default="vskf")
    p.add_argument("--grid", action="append", help="key=v1,v2,... (repeatable)")
    p.add_argument("--fixed", default="", help="extra engine keys, e.g. eps=3e-5")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_scan)
    return parser


_LIST_KEYS = {"engines", "seasons", "grid"}


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        values = read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(values) - known
        if unknown:
            raise UsageError(f"{args.config}: unknown keys {sorted(unknown)}")
        for key in _LIST_KEYS & set(values):
            values[key] = values[key].split()
        for action in sub._actions:
            if action.dest in values and isinstance(action, argparse._StoreTrueAction):
                values[action.dest] = values[action.dest].lower() in ("1", "true", "yes")
        sub.set_defaults(**values)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        return args.func(args)
    except IngestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, TypeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
