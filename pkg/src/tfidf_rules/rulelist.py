"""Rule-list model and its unnormalized log posterior.

The likelihood is the Beta-Binomial marginal per captured slot; the prior
is the usual three-part decomposition: a truncated Poisson on list length,
a truncated Poisson on each rule's cardinality restricted to cardinalities
still available in the pool, and a uniform choice among unused rules of
that cardinality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from scipy.special import logsumexp
from scipy.stats import poisson

from .dataset import DiscretizedDataset
from .rulemine import Rule, RulePool


@dataclass(frozen=True)
class PriorConfig:
    lam: float = 10.0
    eta: float = 1.0
    alpha: tuple[float, float] = (1.0, 1.0)  # (alpha_1 for label 1, alpha_0 for label 0)

    def __post_init__(self):
        if self.lam <= 0 or self.eta <= 0 or min(self.alpha) <= 0:
            raise ValueError("lambda, eta and alpha must be strictly positive")
        object.__setattr__(self, "alpha", (float(self.alpha[0]), float(self.alpha[1])))


class ClassCounts(NamedTuple):
    n1: int
    n0: int

    @property
    def total(self) -> int:
        return self.n1 + self.n0


@dataclass(frozen=True)
class RuleList:
    """Ordered antecedents; ``counts[-1]`` belongs to the default rule."""

    rules: tuple[Rule, ...]
    counts: tuple[ClassCounts, ...]

    def __post_init__(self):
        if len(self.counts) != len(self.rules) + 1:
            raise ValueError("need one count pair per rule plus the default")
        if len(set(self.rules)) != len(self.rules):
            raise ValueError("rule list contains a duplicate rule")

    @property
    def m(self) -> int:
        return len(self.rules)

    def probabilities(self, alpha=(1.0, 1.0)) -> list[float]:
        a1, a0 = alpha
        return [(c.n1 + a1) / (c.total + a1 + a0) for c in self.counts]


def capture(data: DiscretizedDataset, rules: Sequence[Rule]) -> list[ClassCounts]:
    """Assign each sample to its first matching rule (else the default slot)."""
    n1 = [0] * (len(rules) + 1)
    n0 = [0] * (len(rules) + 1)
    for row, y in zip(data.samples, data.labels):
        tokens = set(row)
        slot = len(rules)
        for j, rule in enumerate(rules):
            if rule.matches(tokens):
                slot = j
                break
        if y == 1:
            n1[slot] += 1
        else:
            n0[slot] += 1
    return [ClassCounts(a, b) for a, b in zip(n1, n0)]


def fit(data: DiscretizedDataset, rules: Sequence[Rule]) -> RuleList:
    return RuleList(tuple(rules), tuple(capture(data, rules)))


def log_likelihood(counts: Sequence[ClassCounts], alpha=(1.0, 1.0)) -> float:
    a1, a0 = alpha
    total = 0.0
    for n1, n0 in counts:
        total += math.lgamma(n0 + a0) + math.lgamma(n1 + a1) - math.lgamma(n0 + n1 + a0 + a1)
    return total


def _log_poisson(k: int, rate: float) -> float:
    return k * math.log(rate) - rate - math.lgamma(k + 1)


def log_length_prior(m: int, pool_size: int, lam: float) -> float:
    """ln of Poisson(lam) truncated to ``0..pool_size``, at ``m``."""
    if not 0 <= m <= pool_size:
        return -math.inf
    return _log_poisson(m, lam) - float(poisson.logcdf(pool_size, lam))


def _log_cardinality(c: int, available: Sequence[int], eta: float) -> float:
    norm = logsumexp([_log_poisson(a, eta) for a in available])
    return _log_poisson(c, eta) - norm


def log_prior(rules: Sequence[Rule], pool: RulePool, cfg: PriorConfig) -> float:
    if len(set(rules)) != len(rules) or any(r not in pool for r in rules):
        return -math.inf
    total = log_length_prior(len(rules), len(pool), cfg.lam)
    remaining = {c: len(rs) for c, rs in pool.by_cardinality.items()}
    for rule in rules:
        c = rule.cardinality
        available = [k for k, n in remaining.items() if n > 0]
        total += _log_cardinality(c, available, cfg.eta) - math.log(remaining[c])
        remaining[c] -= 1
    return total


def log_posterior(data: DiscretizedDataset, rules: Sequence[Rule], pool: RulePool, cfg: PriorConfig) -> float:
    prior = log_prior(rules, pool, cfg)
    if prior == -math.inf:
        return -math.inf
    return log_likelihood(capture(data, rules), cfg.alpha) + prior


class Posterior:
    """Cached posterior over lists of pool indices.

    Coverage of every pool rule is precomputed as an integer bitmask over the
    training samples, so evaluating a list costs a handful of bit operations
    per rule. Results agree with :func:`log_posterior`.
    """

    def __init__(self, data: DiscretizedDataset, pool: RulePool, cfg: PriorConfig):
        self.data = data
        self.pool = pool
        self.cfg = cfg
        self.n = len(data)
        self.all_mask = (1 << self.n) - 1
        self.pos_mask = 0
        for i, y in enumerate(data.labels):
            if y == 1:
                self.pos_mask |= 1 << i
        token_masks: dict[str, int] = {}
        for i, row in enumerate(data.samples):
            for tok in row:
                token_masks[tok] = token_masks.get(tok, 0) | (1 << i)
        self.cover = []
        for rule in pool.rules:
            m = self.all_mask
            for cond in rule.conditions:
                m &= token_masks.get(cond, 0)
            self.cover.append(m)
        self.card = [r.cardinality for r in pool.rules]
        self.card_sizes = {c: len(rs) for c, rs in pool.by_cardinality.items()}
        self._length_cache: dict[int, float] = {}
        self._card_cache: dict[tuple, float] = {}

    def counts(self, indices: Sequence[int]) -> list[ClassCounts]:
        remaining = self.all_mask
        out = []
        for i in indices:
            cap = self.cover[i] & remaining
            remaining &= ~cap
            k1 = (cap & self.pos_mask).bit_count()
            out.append(ClassCounts(k1, cap.bit_count() - k1))
        k1 = (remaining & self.pos_mask).bit_count()
        out.append(ClassCounts(k1, remaining.bit_count() - k1))
        return out

    def log_prior(self, indices: Sequence[int]) -> float:
        m = len(indices)
        if len(set(indices)) != m:
            return -math.inf
        lp = self._length_cache.get(m)
        if lp is None:
            lp = self._length_cache[m] = log_length_prior(m, len(self.pool), self.cfg.lam)
        total = lp
        used: dict[int, int] = {}
        for i in indices:
            c = self.card[i]
            avail = tuple(k for k, n in self.card_sizes.items() if n - used.get(k, 0) > 0)
            lc = self._card_cache.get((c, avail))
            if lc is None:
                lc = self._card_cache[(c, avail)] = _log_cardinality(c, avail, self.cfg.eta)
            total += lc - math.log(self.card_sizes[c] - used.get(c, 0))
            used[c] = used.get(c, 0) + 1
        return total

    def log_posterior(self, indices: Sequence[int]) -> float:
        prior = self.log_prior(indices)
        if prior == -math.inf:
            return -math.inf
        return log_likelihood(self.counts(indices), self.cfg.alpha) + prior

    def rule_list(self, indices: Sequence[int]) -> RuleList:
        return RuleList(tuple(self.pool.rules[i] for i in indices), tuple(self.counts(indices)))
