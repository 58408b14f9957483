"""Candidate rule pools.

Two miners are provided: the TF-IDF n-gram miner, which treats each class
as one text document of feature tokens, and a level-wise frequent-itemset
miner used as the baseline.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .dataset import DataError, DiscretizedDataset, split_token

N_DOCUMENTS = 2
IDF_SHARED = 1.0
IDF_UNIQUE = 1.0 + math.log(1.5)


def _canonical(conditions: Iterable[str]) -> tuple[str, ...]:
    return tuple(sorted(conditions, key=lambda tok: (split_token(tok)[0], tok)))


class Rule:
    """A conjunction of feature tokens.

    Equality and hashing use the canonical (feature-sorted) condition order;
    ``conditions`` keeps the order the rule was built with, which is what
    gets printed.
    """

    __slots__ = ("conditions", "key")

    def __init__(self, conditions: Iterable[str]):
        conditions = tuple(conditions)
        if not conditions:
            raise ValueError("a rule needs at least one condition")
        features = [split_token(c)[0] for c in conditions]
        if len(set(features)) != len(features):
            raise ValueError(f"more than one condition per feature in {conditions}")
        self.conditions = conditions
        self.key = _canonical(conditions)

    @classmethod
    def canonical(cls, conditions: Iterable[str]) -> "Rule":
        return cls(_canonical(conditions))

    @classmethod
    def parse(cls, text: str) -> "Rule":
        return cls(part.strip() for part in text.split(" AND "))

    @property
    def cardinality(self) -> int:
        return len(self.conditions)

    @property
    def features(self) -> list[str]:
        return [split_token(c)[0] for c in self.conditions]

    def matches(self, tokens: Iterable[str]) -> bool:
        tokens = tokens if isinstance(tokens, (set, frozenset)) else set(tokens)
        return all(c in tokens for c in self.conditions)

    def __eq__(self, other):
        return isinstance(other, Rule) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __lt__(self, other):
        return self.key < other.key

    def __repr__(self):
        return f"Rule({' AND '.join(self.conditions)!r})"

    def __str__(self):
        return " AND ".join(self.conditions)


class RulePool:
    """Deduplicated candidate rules with a cardinality index."""

    def __init__(self, rules: Iterable[Rule] = ()):
        seen = set()
        unique = []
        for r in rules:
            if r not in seen:
                seen.add(r)
                unique.append(r)
        self.rules: tuple[Rule, ...] = tuple(unique)
        self.index = {r: i for i, r in enumerate(self.rules)}
        by_card: dict[int, list[Rule]] = {}
        for r in self.rules:
            by_card.setdefault(r.cardinality, []).append(r)
        self.by_cardinality = {c: tuple(rs) for c, rs in sorted(by_card.items())}

    def __len__(self):
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def __contains__(self, rule):
        return rule in self.index

    def __eq__(self, other):
        return isinstance(other, RulePool) and self.rules == other.rules

    def cardinality_histogram(self) -> dict[int, int]:
        return {c: len(rs) for c, rs in self.by_cardinality.items()}

    def dumps(self) -> str:
        return "".join(" AND ".join(r.key) + "\n" for r in self.rules)

    @classmethod
    def loads(cls, text: str) -> "RulePool":
        return cls(Rule.parse(line) for line in text.splitlines() if line.strip())

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "RulePool":
        try:
            return cls.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise DataError(f"cannot read rule pool {path}: {exc}") from exc


@dataclass(frozen=True)
class MiningConfig:
    ngram_lo: int = 3
    ngram_hi: int = 5
    permutations: int = 200
    top_k: int = 10
    min_support_pos: float = 0.1
    min_support_neg: float = 0.1
    max_cardinality: int = 5
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.ngram_lo <= self.ngram_hi:
            raise ValueError("need 1 <= ngram_lo <= ngram_hi")
        if self.permutations < 1:
            raise ValueError("permutations must be >= 1")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.max_cardinality < 1:
            raise ValueError("max_cardinality must be >= 1")


# ---------------------------------------------------------------------------
# TF-IDF
# ---------------------------------------------------------------------------


def build_class_documents(data: DiscretizedDataset, column_order: Sequence[int] | None = None):
    """Concatenate token rows per class.

    Each document is a list of segments, one per sample, so n-grams never
    cross a sample boundary. Returns ``(positive, negative)``.
    """
    if column_order is None:
        column_order = range(len(data.schema.features))
    column_order = list(column_order)
    pos, neg = [], []
    for row, y in zip(data.samples, data.labels):
        (pos if y == 1 else neg).append(tuple(row[j] for j in column_order))
    if not pos:
        raise DataError("no positive samples: cannot build the positive class document")
    if not neg:
        raise DataError("no negative samples: cannot build the negative class document")
    return pos, neg


def idf(df: int) -> float:
    return 1.0 + math.log((1 + N_DOCUMENTS) / (1 + df))


@dataclass
class TfIdfTable:
    tf: tuple[Counter, Counter]  # (negative, positive) keyed by label
    df: dict

    def idf(self, gram) -> float:
        return idf(self.df[gram])

    def weight(self, gram, label: int) -> float:
        return self.tf[label][gram] * idf(self.df[gram])

    def weights(self, label: int) -> dict:
        return {g: n * idf(self.df[g]) for g, n in self.tf[label].items()}

    def top_k(self, label: int, k: int) -> list[tuple]:
        ranked = sorted(self.weights(label).items(), key=lambda item: (-item[1], item[0]))
        return [g for g, _ in ranked[:k]]


def _segment_ngrams(segment: Sequence[str], lo: int, hi: int):
    for n in range(lo, hi + 1):
        for s in range(len(segment) - n + 1):
            yield tuple(segment[s : s + n])


def tfidf_weights(documents, ngram_lo: int, ngram_hi: int) -> TfIdfTable:
    """Count within-segment n-grams of both class documents.

    ``documents`` is ``(positive, negative)`` as returned by
    :func:`build_class_documents`.
    """
    positive, negative = documents
    tf_pos = Counter(g for seg in positive for g in _segment_ngrams(seg, ngram_lo, ngram_hi))
    tf_neg = Counter(g for seg in negative for g in _segment_ngrams(seg, ngram_lo, ngram_hi))
    df = Counter()
    for g in tf_pos:
        df[g] += 1
    for g in tf_neg:
        df[g] += 1
    return TfIdfTable((tf_neg, tf_pos), dict(df))


def informative_columns(data: DiscretizedDataset) -> list[int]:
    """Feature columns holding more than one distinct token.

    A column with a single token (e.g. a numeric feature without cut points)
    is satisfied by every sample and cannot contribute to a rule.
    """
    return [j for j in range(len(data.schema.features)) if len({row[j] for row in data.samples}) > 1]


class _Encoded:
    """Integer-coded token matrix for fast n-gram counting."""

    def __init__(self, data: DiscretizedDataset):
        n_feat = len(data.schema.features)
        self.vocab: list[list[str]] = []
        codes = np.zeros((len(data), n_feat), dtype=np.int64)
        for j in range(n_feat):
            col = [row[j] for row in data.samples]
            uniq = sorted(set(col))
            lookup = {t: i for i, t in enumerate(uniq)}
            codes[:, j] = [lookup[t] for t in col]
            self.vocab.append(uniq)
        self.codes = codes
        self.sizes = [len(v) for v in self.vocab]
        self.labels = np.asarray(data.labels, dtype=np.int64)


def _count_position(enc: _Encoded, cols: Sequence[int]):
    """Unique n-grams over ``cols`` with per-class counts: ``(rows, tf_neg, tf_pos)``."""
    sub = enc.codes[:, cols]
    radix = 1
    for c in cols:
        radix *= enc.sizes[c]
    if radix < 2**62:
        key = np.zeros(len(sub), dtype=np.int64)
        for i, c in enumerate(cols):
            key = key * enc.sizes[c] + sub[:, i]
        uniq, first, inverse = np.unique(key, return_index=True, return_inverse=True)
        rows = sub[first]
    else:
        rows, inverse = np.unique(sub, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
    m = len(rows)
    tf_pos = np.bincount(inverse[enc.labels == 1], minlength=m)
    tf_neg = np.bincount(inverse[enc.labels == 0], minlength=m)
    return rows, tf_neg, tf_pos


def _round_top_k(enc: _Encoded, order: Sequence[int], lo: int, hi: int, k: int) -> list[tuple[str, ...]]:
    """Top-k n-grams per class for one column order; negative class first."""
    hi = min(hi, len(order))
    pieces = []
    for n in range(lo, hi + 1):
        for s in range(len(order) - n + 1):
            cols = list(order[s : s + n])
            rows, tf_neg, tf_pos = _count_position(enc, cols)
            df = (tf_neg > 0).astype(int) + (tf_pos > 0).astype(int)
            w_idf = 1.0 + np.log((1 + N_DOCUMENTS) / (1 + df))
            pieces.append((cols, rows, tf_neg * w_idf, tf_pos * w_idf))

    selected = []
    for label in (0, 1):
        weights = np.concatenate([p[2 + label] for p in pieces]) if pieces else np.zeros(0)
        present = weights[weights > 0]
        if len(present) == 0:
            continue
        kth = np.sort(present)[::-1][min(k, len(present)) - 1]
        # materialize only grams at or above the k-th weight so ties resolve on token text
        cands = []
        for cols, rows, *w in pieces:
            wl = w[label]
            for i in np.flatnonzero(wl >= kth):
                gram = tuple(enc.vocab[c][rows[i, j]] for j, c in enumerate(cols))
                cands.append((-float(wl[i]), gram))
        cands.sort()
        selected.extend(g for _, g in cands[:k])
    return selected


def _gram_to_rule(gram: Sequence[str]) -> Rule | None:
    features = [split_token(t)[0] for t in gram]
    if len(set(features)) != len(features):
        return None
    return Rule.canonical(gram)


def mine_tfidf_rules(data: DiscretizedDataset, cfg: MiningConfig, return_candidates: bool = False):
    """Permuted-column TF-IDF rule mining.

    Each of ``cfg.permutations`` rounds shuffles the informative feature
    columns (see :func:`informative_columns`), rebuilds
    both class documents and keeps the top-k n-grams of each class. The
    deduplicated pool is shuffled at the end. With ``return_candidates`` the
    pre-dedup candidate count is returned as well.
    """
    build_class_documents(data)  # raises when a class is empty
    enc = _Encoded(data)
    columns = np.asarray(informative_columns(data), dtype=int)
    candidates: list[Rule] = []
    for t in range(cfg.permutations):
        rng = np.random.default_rng((cfg.seed, t))
        order = columns[rng.permutation(len(columns))]
        for gram in _round_top_k(enc, order, cfg.ngram_lo, cfg.ngram_hi, cfg.top_k):
            rule = _gram_to_rule(gram)
            if rule is not None:
                candidates.append(rule)
    unique = list(RulePool(candidates).rules)
    rng = np.random.default_rng((cfg.seed, cfg.permutations))
    shuffled = [unique[i] for i in rng.permutation(len(unique))]
    pool = RulePool(shuffled)
    if return_candidates:
        return pool, len(candidates)
    return pool


# ---------------------------------------------------------------------------
# Frequent-pattern baseline
# ---------------------------------------------------------------------------


def support(data: DiscretizedDataset, rule: Rule, label: int) -> float:
    """Fraction of ``label`` samples whose token row contains every rule condition."""
    rows = [set(r) for r, y in zip(data.samples, data.labels) if y == label]
    if not rows:
        return 0.0
    return sum(1 for r in rows if rule.matches(r)) / len(rows)


def _frequent_itemsets(rows: Sequence[Sequence[str]], threshold: float, max_len: int) -> list[tuple[str, ...]]:
    """Level-wise (Apriori) itemsets with support >= ``threshold``; items are tokens."""
    n = len(rows)
    if n == 0:
        return []
    need = threshold * n
    masks: dict[str, int] = {}
    for i, row in enumerate(rows):
        for tok in row:
            masks[tok] = masks.get(tok, 0) | (1 << i)

    level = {(tok,): m for tok, m in masks.items() if m.bit_count() >= need - 1e-9}
    found = sorted(level)
    k = 1
    while level and k < max_len:
        keys = sorted(level)
        nxt = {}
        for a in range(len(keys)):
            for b in range(a + 1, len(keys)):
                x, y = keys[a], keys[b]
                if x[:-1] != y[:-1]:
                    break
                if split_token(x[-1])[0] == split_token(y[-1])[0]:
                    continue
                cand = x + (y[-1],)
                if any(cand[:i] + cand[i + 1 :] not in level for i in range(len(cand) - 2)):
                    continue
                m = level[x] & level[y]
                if m.bit_count() >= need - 1e-9:
                    nxt[cand] = m
        level = nxt
        found.extend(sorted(level))
        k += 1
    return found


def mine_frequent_rules(data: DiscretizedDataset, cfg: MiningConfig) -> RulePool:
    """Per-class frequent condition sets up to ``cfg.max_cardinality``, unioned."""
    for name, value in (("min_support_pos", cfg.min_support_pos), ("min_support_neg", cfg.min_support_neg)):
        if not 0.0 < value <= 1.0:
            raise ValueError(f"{name} must lie in (0, 1], got {value}")
    columns = informative_columns(data)
    rules = []
    for label, threshold in ((1, cfg.min_support_pos), (0, cfg.min_support_neg)):
        rows = [[r[j] for j in columns] for r, y in zip(data.samples, data.labels) if y == label]
        rules.extend(Rule.canonical(items) for items in _frequent_itemsets(rows, threshold, cfg.max_cardinality))
    return RulePool(rules)
