"""End-to-end runs: split, discretize, mine, search, evaluate."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .dataset import RawDataset, discretize_dataset, fit_boundaries
from .mcmc import SearchConfig, search
from .metrics import Report, evaluate, split
from .model import Model
from .rulelist import PriorConfig
from .rulemine import MiningConfig, RulePool, mine_frequent_rules, mine_tfidf_rules

TFIDF, FREQUENT = "tfidf", "frequent"


@dataclass(frozen=True)
class ExperimentConfig:
    method: str = TFIDF
    train_fraction: float = 0.8
    mining: MiningConfig = field(default_factory=MiningConfig)
    prior: PriorConfig = field(default_factory=PriorConfig)
    search: SearchConfig = field(default_factory=SearchConfig)

    def __post_init__(self):
        if self.method not in (TFIDF, FREQUENT):
            raise ValueError(f"method must be {TFIDF!r} or {FREQUENT!r}")


@dataclass
class RunResult:
    method: str
    seed: int
    pool: RulePool
    model: Model
    report: Report
    seconds: float

    @property
    def auc(self) -> float:
        return self.report.auc

    def feature_fraction(self, feature: str) -> float:
        """Share of model rules with a condition on ``feature``."""
        rules = self.model.rules
        return sum(feature in r.features for r in rules) / len(rules) if rules else 0.0


def run(raw: RawDataset, cfg: ExperimentConfig, seed: int) -> RunResult:
    """One seeded run; ``seed`` drives the split, the miner and the chains."""
    t0 = time.perf_counter()
    train, test = split(raw, cfg.train_fraction, seed)
    boundaries = fit_boundaries(train)
    data = discretize_dataset(train, boundaries)
    mining = MiningConfig(**{**cfg.mining.__dict__, "seed": seed})
    if cfg.method == TFIDF:
        pool = mine_tfidf_rules(data, mining)
    else:
        pool = mine_frequent_rules(data, mining)
    search_cfg = SearchConfig(cfg.search.iterations, cfg.search.chains, seed, cfg.search.move_probabilities)
    rule_list = search(data, pool, cfg.prior, search_cfg)
    model = Model(rule_list, raw.schema, boundaries, cfg.prior, len(train))
    report = evaluate(model, test)
    return RunResult(cfg.method, seed, pool, model, report, time.perf_counter() - t0)
