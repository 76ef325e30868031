"""Command-line harness.

    stability-lab <subcommand> --config cfg.json [--seed N] [--out report.json] [--csv table.csv]

Subcommands: tv, naf-check, nfl-check, censorship, dp-beta, hist,
transform, prop1, ingest. All inputs come from a single JSON config
document; the --seed flag overrides the config's "seed" field (flag >
config > default 0). Reports are JSON with a versioned schema; the same
config and seed always produce the same payload. Exit codes: 0 on pass,
2 when an assertion-style check fails, 1 on any error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from .core import (
    ContentDomain,
    DiscreteDistribution,
    load_dataset,
    tv_distance,
    tv_event_form,
    EVENT_ENUM_MAX,
)
from .dp import dp_beta, dp_beta_event_form, private_histogram, symmetric_dp_beta
from .errors import ConfigError, StabilityLabError
from .learners import ingest_corpus, learner_constant, learner_empirical
from .naf import SafeAssignment, censorship_report, naf_report, nfl_witness
from .transform import (
    TransformConfig,
    dp_transform_trace,
    transform_bound_experiment,
)
from .util import derive_seed

SCHEMA_VERSION = "1"
EXIT_PASS = 0
EXIT_ERROR = 1
EXIT_CHECK_FAILED = 2

_REQUIRED = object()


# --- config access ----------------------------------------------------------


def _field(cfg: dict, key: str, default=_REQUIRED):
    if key in cfg:
        return cfg[key]
    if default is _REQUIRED:
        raise ConfigError(f"{key}: missing required field")
    return default


def _num(cfg, key, default=_REQUIRED, lo=None, hi=None, open_lo=False, open_hi=False):
    raw = _field(cfg, key, default)
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {raw!r}")
    v = float(raw)
    if lo is not None and (v < lo or (open_lo and v == lo)):
        raise ConfigError(f"{key}: must be {'>' if open_lo else '>='} {lo}")
    if hi is not None and (v > hi or (open_hi and v == hi)):
        raise ConfigError(f"{key}: must be {'<' if open_hi else '<='} {hi}")
    return v


def _int(cfg, key, default=_REQUIRED, lo=None):
    raw = _field(cfg, key, default)
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise ConfigError(f"{key}: expected an integer, got {raw!r}")
    if lo is not None and raw < lo:
        raise ConfigError(f"{key}: must be >= {lo}")
    return raw


def _existing_path(cfg, key) -> Path:
    raw = _field(cfg, key)
    if not isinstance(raw, str):
        raise ConfigError(f"{key}: expected a file path string")
    path = Path(raw)
    if not path.exists():
        raise ConfigError(f"{key}: file not found: {raw}")
    return path


def _distribution(cfg, key, domain: ContentDomain | None = None) -> DiscreteDistribution:
    """A distribution from either a file path or an inline JSON object."""
    raw = _field(cfg, key)
    try:
        if isinstance(raw, str):
            path = Path(raw)
            if not path.exists():
                raise ConfigError(f"{key}: file not found: {raw}")
            with open(path, "r", encoding="utf-8") as fh:
                return DiscreteDistribution.from_json_obj(json.load(fh), domain)
        if isinstance(raw, dict):
            return DiscreteDistribution.from_json_obj(raw, domain)
    except StabilityLabError as exc:
        raise ConfigError(f"{key}: {exc}") from exc
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{key}: invalid distribution spec ({exc})") from exc
    raise ConfigError(f"{key}: expected a path or an inline distribution object")


def _safe_models(cfg, key) -> SafeAssignment:
    raw = _field(cfg, key)
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{key}: expected a non-empty list")
    entries = []
    for i, item in enumerate(raw):
        if isinstance(item, dict) and "model" in item:
            cid = item.get("id", f"c{i}")
            model = _distribution(item, "model")
        else:
            cid = f"c{i}"
            model = _distribution({key: item}, key)
        entries.append((str(cid), model))
    try:
        return SafeAssignment(tuple(entries))
    except StabilityLabError as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def _learner(cfg, key):
    raw = _field(cfg, key)
    if not isinstance(raw, dict):
        raise ConfigError(f"{key}: expected an object with a 'kind' field")
    kind = raw.get("kind")
    if kind == "empirical":
        smoothing = _num(raw, "smoothing", default=0.0, lo=0.0)
        return learner_empirical(smoothing)
    if kind == "constant":
        return learner_constant(_distribution(raw, "model"))
    raise ConfigError(f"{key}.kind: expected 'empirical' or 'constant', got {kind!r}")


def _domain_for_dataset(cfg, dataset_path: Path) -> ContentDomain:
    raw = _field(cfg, "domain", None)
    if raw is None:
        domain, _ = ingest_corpus(dataset_path, "line")
        return domain
    if isinstance(raw, str):
        with open(_existing_path(cfg, "domain"), "r", encoding="utf-8") as fh:
            return ContentDomain.from_json_obj(json.load(fh))
    if isinstance(raw, dict):
        try:
            return ContentDomain.from_json_obj(raw)
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"domain: {exc}") from exc
    raise ConfigError("domain: expected a path or {'symbols': [...]}")


# --- report plumbing --------------------------------------------------------


def _jsonable(value):
    """Make a payload JSON-serializable and strictly valid: non-finite floats
    become strings, numpy scalars become Python scalars."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        value = float(value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    return value


def _write_report(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _write_csv(rows: list[dict], path: str) -> None:
    if not rows:
        rows = [{}]
    fields = list(rows[0].keys())
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _jsonable(v) for k, v in row.items()})


# --- subcommands ------------------------------------------------------------


def _run_tv(cfg: dict, seed: int):
    q1 = _distribution(cfg, "q1")
    q2 = _distribution(cfg, "q2", q1.domain)
    value = tv_distance(q1, q2)
    payload = {"tv": value}
    if q1.domain.size <= EVENT_ENUM_MAX:
        sup, event = tv_event_form(q1, q2)
        payload["event_form"] = {"value": sup, "event": list(event.symbols)}
    else:
        payload["event_form"] = None
    rows = [
        {"symbol": s, "q1": float(a), "q2": float(b), "abs_diff": float(abs(a - b))}
        for s, a, b in zip(q1.domain.symbols, q1.weights, q2.weights)
    ]
    return payload, rows, EXIT_PASS


def _run_dp_beta(cfg: dict, seed: int):
    p = _distribution(cfg, "p")
    p_prime = _distribution(cfg, "p_prime", p.domain)
    alpha = _num(cfg, "alpha", lo=0.0)
    grid = _field(cfg, "alpha_grid", None)
    if grid is None:
        grid = [alpha]
    if not isinstance(grid, list) or not all(
        isinstance(a, (int, float)) and not isinstance(a, bool) and a >= 0 for a in grid
    ):
        raise ConfigError("alpha_grid: expected a list of numbers >= 0")
    small = p.domain.size <= EVENT_ENUM_MAX
    curve = []
    for a in grid:
        point = {
            "alpha": float(a),
            "beta": dp_beta(p, p_prime, a),
            "beta_reverse": dp_beta(p_prime, p, a),
            "symmetric_beta": symmetric_dp_beta(p, p_prime, a),
        }
        if small:
            point["beta_event_form"] = dp_beta_event_form(p, p_prime, a)[0]
        curve.append(point)
    payload = {
        "alpha": alpha,
        "beta": dp_beta(p, p_prime, alpha),
        "symmetric_beta": symmetric_dp_beta(p, p_prime, alpha),
        "curve": curve,
    }
    if small:
        value, event = dp_beta_event_form(p, p_prime, alpha)
        payload["event_form"] = {"value": value, "event": list(event.symbols)}
    else:
        payload["event_form"] = None
    return payload, curve, EXIT_PASS


def _run_naf_check(cfg: dict, seed: int):
    model = _distribution(cfg, "model")
    safes = _safe_models(cfg, "safe_models")
    alpha = _num(cfg, "alpha", lo=0.0)
    report = naf_report(model, safes, alpha)
    rows = [
        {"content_id": c, "symbol": z, "log_ratio": r}
        for c, z, r in report.violations
    ]
    code = EXIT_PASS if report.ok else EXIT_CHECK_FAILED
    return report.to_json_obj(), rows, code


def _run_nfl_check(cfg: dict, seed: int):
    p = _distribution(cfg, "model")
    q1 = _distribution(cfg, "q1", p.domain)
    q2 = _distribution(cfg, "q2", p.domain)
    witness = nfl_witness(p, q1, q2)
    satisfied = witness.p_value >= witness.threshold - 1e-12
    alpha = tv_distance(q1, q2)
    thresholds = np.minimum(q1.weights, q2.weights) / (2.0 * (1.0 - alpha))
    payload = {
        "tv": alpha,
        "witness": {
            "symbol": witness.symbol,
            "p_value": witness.p_value,
            "threshold": witness.threshold,
        },
        "satisfied": satisfied,
    }
    rows = [
        {"symbol": s, "p": float(pv), "min_q": float(min(a, b)), "threshold": float(t)}
        for s, pv, a, b, t in zip(
            p.domain.symbols, p.weights, q1.weights, q2.weights, thresholds
        )
    ]
    return payload, rows, EXIT_PASS if satisfied else EXIT_CHECK_FAILED


def _run_censorship(cfg: dict, seed: int):
    safes = _safe_models(cfg, "safe_models")
    alpha = _num(cfg, "alpha", lo=0.0)
    report = censorship_report(safes, alpha)
    rows = [
        {"symbol": s, "bound": float(b)}
        for s, b in zip(report.domain.symbols, report.bounds)
    ]
    return report.to_json_obj(), rows, EXIT_PASS


def _run_hist(cfg: dict, seed: int):
    dataset_path = _existing_path(cfg, "dataset")
    domain = _domain_for_dataset(cfg, dataset_path)
    dataset = load_dataset(dataset_path, domain)
    epsilon = _num(cfg, "epsilon", lo=0.0, open_lo=True)
    delta = _num(cfg, "delta", lo=0.0, hi=1.0, open_lo=True, open_hi=True)
    noise_seed = derive_seed(seed, "hist-noise")
    hist = private_histogram(dataset, epsilon, delta, noise_seed)
    counts = dataset.counts()
    freqs = counts / dataset.size
    payload = hist.to_json_obj()
    payload["empirical"] = {
        s: float(f) for s, f in zip(domain.symbols, freqs) if f > 0
    }
    payload["linf_error"] = float(np.abs(hist.values - freqs).max())
    rows = [
        {"symbol": s, "count": int(c), "freq": float(f), "value": float(v)}
        for s, c, f, v in zip(domain.symbols, counts, freqs, hist.values)
    ]
    return payload, rows, EXIT_PASS


def _run_transform(cfg: dict, seed: int):
    dataset_path = _existing_path(cfg, "dataset")
    domain = _domain_for_dataset(cfg, dataset_path)
    dataset = load_dataset(dataset_path, domain)
    learner = _learner(cfg, "learner")
    config = TransformConfig.from_params(
        epsilon=_num(cfg, "epsilon", lo=0.0, open_lo=True),
        delta=_num(cfg, "delta", lo=0.0, hi=1.0, open_lo=True, open_hi=True),
        eta=_num(cfg, "eta", lo=0.0, hi=1.0, open_lo=True, open_hi=True),
        m=_int(cfg, "m", lo=1),
    )
    tape_seed = _int(cfg, "tape_seed", default=derive_seed(seed, "tape"))
    trace = dp_transform_trace(
        learner,
        dataset,
        config,
        tape_seed=tape_seed,
        noise_seed=derive_seed(seed, "noise"),
        train_seed=derive_seed(seed, "train"),
    )
    payload = {
        "epsilon": config.epsilon,
        "delta": config.delta,
        "eta": config.eta,
        "m": config.m,
        "k": config.k,
        "m_priv": config.m_priv,
        "learner": learner.name,
        "tape_seed": tape_seed,
        "fallback_used": trace.fallback_used,
        "histogram": trace.histogram.to_json_obj(),
        "output": trace.output.to_json_obj(),
    }
    rows = [
        {"symbol": s, "weight": float(w)}
        for s, w in zip(domain.symbols, trace.output.weights)
    ]
    return payload, rows, EXIT_PASS


def _run_prop1(cfg: dict, seed: int):
    data_dist = _distribution(cfg, "data_distribution")
    learner = _learner(cfg, "learner")
    config = TransformConfig.from_params(
        epsilon=_num(cfg, "epsilon", lo=0.0, open_lo=True),
        delta=_num(cfg, "delta", lo=0.0, hi=1.0, open_lo=True, open_hi=True),
        eta=_num(cfg, "eta", lo=0.0, hi=1.0, open_lo=True, open_hi=True),
        m=_int(cfg, "m", lo=1),
    )
    outer = _int(cfg, "outer_trials", lo=1)
    inner = _int(cfg, "inner_trials", lo=1)
    premise = _int(cfg, "premise_trials", default=200, lo=1)
    margin = _num(cfg, "margin", default=0.02, lo=0.0)
    report = transform_bound_experiment(
        learner, data_dist, config, outer, inner, seed, premise_trials=premise
    )
    passed = report.within_bound(margin)
    payload = report.to_json_obj()
    payload["margin"] = margin
    payload["passed"] = passed
    rows = [
        {"trial": t, "tv": float(v)} for t, v in enumerate(report.per_trial_tv)
    ]
    return payload, rows, EXIT_PASS if passed else EXIT_CHECK_FAILED


def _run_ingest(cfg: dict, seed: int):
    corpus = _existing_path(cfg, "corpus")
    tokenization = _field(cfg, "tokenization", "line")
    if tokenization not in ("line", "whitespace"):
        raise ConfigError("tokenization: expected 'line' or 'whitespace'")
    domain, dataset = ingest_corpus(corpus, tokenization)
    counts = dataset.counts()
    payload = {
        "domain_size": domain.size,
        "dataset_size": dataset.size,
        "symbols": list(domain.symbols),
        "counts": {s: int(c) for s, c in zip(domain.symbols, counts)},
    }
    rows = [
        {"symbol": s, "count": int(c)} for s, c in zip(domain.symbols, counts)
    ]
    return payload, rows, EXIT_PASS


_SUBCOMMANDS = {
    "tv": _run_tv,
    "naf-check": _run_naf_check,
    "nfl-check": _run_nfl_check,
    "censorship": _run_censorship,
    "dp-beta": _run_dp_beta,
    "hist": _run_hist,
    "transform": _run_transform,
    "prop1": _run_prop1,
    "ingest": _run_ingest,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stability-lab",
        description="Stability diagnostics over finite content domains.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config document")
        p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        p.add_argument("--out", default=None, help="write the JSON report here")
        p.add_argument("--csv", default=None, help="write the tabular payload here")
        if name == "transform":
            p.add_argument(
                "--tape-seed",
                type=int,
                default=None,
                help="pin the coupling tape seed (overrides the config field)",
            )
    return parser


def run(subcommand: str, config: dict, seed: int) -> tuple[dict, list[dict], int]:
    """Dispatch one subcommand; returns (report, csv rows, exit code)."""
    started = time.perf_counter()
    payload, rows, code = _SUBCOMMANDS[subcommand](config, seed)
    report = {
        "schema": SCHEMA_VERSION,
        "subcommand": subcommand,
        "config": _jsonable(config),
        "seed": seed,
        "seed_derivation": "blake2b(root/label/index)",
        "payload": _jsonable(payload),
        "passed": code == EXIT_PASS,
        "wall_clock_s": time.perf_counter() - started,
    }
    return report, rows, code


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                config = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {args.config}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(config, dict):
            raise ConfigError("config must be a JSON object")
        seed = args.seed if args.seed is not None else config.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ConfigError("seed: expected an integer")
        if getattr(args, "tape_seed", None) is not None:
            config["tape_seed"] = args.tape_seed
        report, rows, code = run(args.subcommand, config, seed)
        _write_report(report, args.out)
        if args.csv:
            _write_csv(rows, args.csv)
        return code
    except StabilityLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def entrypoint() -> None:
    sys.exit(main())
