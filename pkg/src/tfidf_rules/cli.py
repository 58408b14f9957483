"""Command-line entry point: ``tfidf-rules {split,mine,train,predict,evaluate,timing}``.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import logging
import statistics
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from .dataset import DataError, FeatureSchema, discretize_dataset, fit_boundaries, load_csv, write_csv
from .explain import explain, predict, render_model
from .mcmc import SearchConfig, search
from .metrics import evaluate, split
from .model import Model
from .rulelist import PriorConfig
from .rulemine import MiningConfig, RulePool, mine_frequent_rules, mine_tfidf_rules

log = logging.getLogger("tfidf_rules")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------


@dataclass
class Config:
    parser: configparser.ConfigParser
    path: Path

    def get(self, section: str, key: str, default=None, cast=str):
        if self.parser.has_option(section, key):
            raw = self.parser.get(section, key)
            try:
                return cast(raw)
            except ValueError:
                raise ConfigError(f"{self.path}: [{section}] {key} = {raw!r} is not a valid {cast.__name__}") from None
        if default is None:
            raise ConfigError(f"{self.path}: missing required key [{section}] {key}")
        return default

    def has(self, section: str, key: str) -> bool:
        return self.parser.has_option(section, key)

    def path_of(self, section: str, key: str) -> Path:
        p = Path(self.get(section, key))
        return p if p.is_absolute() else self.path.parent / p


def load_config(path: str | Path) -> Config:
    path = Path(path)
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    return Config(parser, path)


def mining_config(cfg: Config, n_pos: int = 0, n_neg: int = 0) -> MiningConfig:
    def threshold(label: str, n: int) -> float:
        if cfg.has("mine", f"min_count_{label}"):
            count = cfg.get("mine", f"min_count_{label}", cast=int)
            return min(1.0, count / n) if n else 1.0
        return cfg.get("mine", f"min_support_{label}", 0.1, float)

    return MiningConfig(
        ngram_lo=cfg.get("mine", "ngram_lo", 3, int),
        ngram_hi=cfg.get("mine", "ngram_hi", 5, int),
        permutations=cfg.get("mine", "permutations", 200, int),
        top_k=cfg.get("mine", "top_k", 10, int),
        min_support_pos=threshold("pos", n_pos),
        min_support_neg=threshold("neg", n_neg),
        max_cardinality=cfg.get("mine", "max_cardinality", 5, int),
        seed=cfg.get("mine", "seed", 0, int),
    )


def prior_config(cfg: Config) -> PriorConfig:
    return PriorConfig(
        lam=cfg.get("train", "lambda", 10.0, float),
        eta=cfg.get("train", "eta", 1.0, float),
        alpha=(cfg.get("train", "alpha1", 1.0, float), cfg.get("train", "alpha0", 1.0, float)),
    )


def search_config(cfg: Config) -> SearchConfig:
    return SearchConfig(
        iterations=cfg.get("train", "iterations", 30000, int),
        chains=cfg.get("train", "chains", 3, int),
        seed=cfg.get("train", "seed", 0, int),
    )


def _training_data(cfg: Config):
    schema = FeatureSchema.load(cfg.path_of("data", "schema"))
    raw = load_csv(cfg.path_of("data", "train"), schema)
    boundaries = fit_boundaries(raw)
    return schema, raw, boundaries, discretize_dataset(raw, boundaries)


def _mine(cfg: Config, data):
    method = cfg.get("mine", "method")
    n_pos = data.n_positive
    mcfg = mining_config(cfg, n_pos, len(data) - n_pos)
    if method == "tfidf":
        pool, n_candidates = mine_tfidf_rules(data, mcfg, return_candidates=True)
    elif method == "frequent":
        pool = mine_frequent_rules(data, mcfg)
        n_candidates = len(pool)
    else:
        raise ConfigError(f"{cfg.path}: [mine] method must be 'tfidf' or 'frequent', got {method!r}")
    return pool, n_candidates


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_split(args) -> int:
    schema = FeatureSchema.load(args.schema)
    raw = load_csv(args.csv, schema)
    train, test = split(raw, args.fraction, args.seed)
    write_csv(args.train_out, train)
    write_csv(args.test_out, test)
    print(f"train={len(train)} train_positive={sum(train.labels)} test={len(test)} test_positive={sum(test.labels)}")
    return EXIT_OK


def cmd_mine(args) -> int:
    cfg = load_config(args.config)
    _, _, _, data = _training_data(cfg)
    pool, n_candidates = _mine(cfg, data)
    out = cfg.path_of("mine", "output")
    pool.save(out)
    print(f"pool_size={len(pool)}")
    print(f"candidates={n_candidates}")
    for c, n in pool.cardinality_histogram().items():
        print(f"cardinality_{c}={n}")
    print(f"output={out}")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    schema, raw, boundaries, data = _training_data(cfg)
    if cfg.has("train", "pool"):
        pool = RulePool.load(cfg.path_of("train", "pool"))
    else:
        pool, _ = _mine(cfg, data)
    if len(pool) == 0:
        raise DataError("rule pool is empty; nothing to train on")
    prior = prior_config(cfg)
    rule_list = search(data, pool, prior, search_config(cfg))
    model = Model(rule_list, schema, boundaries, prior, len(data))
    out = cfg.path_of("train", "output")
    model.save(out)
    app = args.app_name or cfg.get("predict", "app_name", "positive class")
    sys.stdout.write(render_model(model, app))
    return EXIT_OK


def _rows_for(model: Model, path):
    # the label column is optional at scoring time
    return load_csv(path, model.schema, require_label=False)


def cmd_predict(args) -> int:
    model = Model.load(args.model)
    data = _rows_for(model, args.csv)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["probability", "explanation"] if args.explain else ["probability"])
    for row in data.rows:
        if args.explain:
            pred, text = explain(model, row, args.app_name)
            w.writerow([f"{pred.probability:.6f}", text])
        else:
            w.writerow([f"{predict(model, row).probability:.6f}"])
    if args.output:
        Path(args.output).write_text(buf.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def cmd_evaluate(args) -> int:
    model = Model.load(args.model)
    test = load_csv(args.csv, model.schema)
    report = evaluate(model, test).dumps()
    if args.output:
        Path(args.output).write_text(report, encoding="utf-8")
    sys.stdout.write(report)
    return EXIT_OK


def time_batch(model: Model, rows, app_name: str, repetitions: int) -> list[float]:
    """Wall-clock seconds to predict and explain every row, once per repetition."""
    times = []
    for _ in range(repetitions):
        t0 = time.perf_counter()
        for row in rows:
            explain(model, row, app_name)
        times.append(time.perf_counter() - t0)
    return times


def cmd_timing(args) -> int:
    if args.repetitions < 1:
        raise ConfigError("--repetitions must be >= 1")
    model = Model.load(args.model)
    data = _rows_for(model, args.csv)
    times = time_batch(model, data.rows, args.app_name, args.repetitions)
    med = statistics.median(times)
    print(f"rows={len(data)}")
    print(f"repetitions={args.repetitions}")
    print(f"median_seconds={med:.6f}")
    print(f"median_ms_per_row={1000 * med / len(data) if len(data) else 0.0:.6f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tfidf-rules", description="Learn and apply Bayesian rule lists mined with TF-IDF n-grams.")
    p.add_argument("-q", "--quiet", action="store_true", help="suppress progress logging")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("split", help="seeded train/test split of a CSV")
    s.add_argument("csv")
    s.add_argument("--schema", required=True)
    s.add_argument("--fraction", type=float, default=0.8)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--train-out", required=True)
    s.add_argument("--test-out", required=True)
    s.set_defaults(func=cmd_split)

    s = sub.add_parser("mine", help="mine a rule pool")
    s.add_argument("--config", required=True)
    s.set_defaults(func=cmd_mine)

    s = sub.add_parser("train", help="search for the MAP rule list")
    s.add_argument("--config", required=True)
    s.add_argument("--app-name", default=None)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("predict", help="score a CSV")
    s.add_argument("model")
    s.add_argument("csv")
    s.add_argument("--explain", action="store_true")
    s.add_argument("--app-name", default="positive class")
    s.add_argument("--output", default=None)
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("evaluate", help="AUC and rule usage on labelled data")
    s.add_argument("model")
    s.add_argument("csv")
    s.add_argument("--output", default=None)
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("timing", help="latency of predict+explain")
    s.add_argument("model")
    s.add_argument("csv")
    s.add_argument("--repetitions", type=int, default=5)
    s.add_argument("--app-name", default="positive class")
    s.set_defaults(func=cmd_timing)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(message)s"))
    log.handlers[:] = [handler]
    log.setLevel(logging.WARNING if args.quiet else logging.INFO)
    log.propagate = False
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
