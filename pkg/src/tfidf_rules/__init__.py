"""Bayesian rule lists over TF-IDF mined rule pools, with textual explanations."""

from .dataset import DataError, FeatureSchema, discretize_dataset, fit_boundaries, load_csv
from .explain import explain, predict, render_model
from .mcmc import SearchConfig, search
from .metrics import auc_roc, evaluate, split
from .model import Model
from .rulelist import PriorConfig, RuleList
from .rulemine import MiningConfig, Rule, RulePool, mine_frequent_rules, mine_tfidf_rules

__all__ = [
    "DataError", "FeatureSchema", "MiningConfig", "Model", "PriorConfig", "Rule", "RuleList",
    "RulePool", "SearchConfig", "auc_roc", "discretize_dataset", "evaluate", "explain",
    "fit_boundaries", "load_csv", "mine_frequent_rules", "mine_tfidf_rules", "predict",
    "render_model", "search", "split",
]
