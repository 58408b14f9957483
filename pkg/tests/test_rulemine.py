import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import frequent_oracle, tfidf_oracle, top_k_oracle
from tfidf_rules.dataset import DataError, from_token_rows
from tfidf_rules.rulemine import (
    IDF_SHARED,
    IDF_UNIQUE,
    MiningConfig,
    Rule,
    RulePool,
    _frequent_itemsets,
    build_class_documents,
    idf,
    informative_columns,
    mine_frequent_rules,
    mine_tfidf_rules,
    support,
    tfidf_weights,
)

TOY_ROWS = [
    ("a:1", "b:x", "c:p"),
    ("a:1", "b:y", "c:p"),
    ("a:2", "b:x", "c:q"),
    ("a:2", "b:y", "c:p"),
]
TOY_LABELS = [1, 1, 0, 0]


def token_tables(max_rows=8, max_feats=4, max_vals=3):
    """Random token tables: one token per feature per row, both classes present."""

    @st.composite
    def build(draw):
        n_feat = draw(st.integers(1, max_feats))
        n_rows = draw(st.integers(2, max_rows))
        rows = [
            tuple(f"f{j}:{draw(st.integers(0, max_vals - 1))}" for j in range(n_feat))
            for _ in range(n_rows)
        ]
        labels = draw(st.lists(st.integers(0, 1), min_size=n_rows, max_size=n_rows))
        labels[0], labels[1] = 1, 0
        return rows, labels

    return build()


# -- Rule / RulePool ----------------------------------------------------------


def test_rule_equality_ignores_order():
    a = Rule(["x:1", "y:2"])
    b = Rule(["y:2", "x:1"])
    assert a == b and hash(a) == hash(b)
    assert a.conditions != b.conditions


def test_rule_rejects_two_conditions_on_one_feature():
    with pytest.raises(ValueError):
        Rule(["x:1", "x:2"])


def test_rule_parse_and_match():
    r = Rule.parse("plasma_glucose:127.5_to_166.5 AND body_mass_index:29.65_to_inf")
    assert r.cardinality == 2
    assert r.features == ["plasma_glucose", "body_mass_index"]
    assert r.matches({"plasma_glucose:127.5_to_166.5", "body_mass_index:29.65_to_inf", "age:x"})
    assert not r.matches({"plasma_glucose:127.5_to_166.5"})


def test_pool_dedupes_and_roundtrips():
    pool = RulePool([Rule(["b:1", "a:1"]), Rule(["a:1", "b:1"]), Rule(["c:3"])])
    assert len(pool) == 2
    assert pool.cardinality_histogram() == {1: 1, 2: 1}
    again = RulePool.loads(pool.dumps())
    assert again == pool
    assert pool.dumps() == "a:1 AND b:1\nc:3\n"


# -- TF-IDF ---------------------------------------------------------------------


def test_idf_takes_two_values():
    assert idf(2) == IDF_SHARED == 1.0
    assert idf(1) == IDF_UNIQUE == 1.0 + math.log(1.5)


def test_weight_of_gram_unique_to_one_class():
    docs = ([("g:1",)] * 5, [("h:1",)])
    table = tfidf_weights(docs, 1, 1)
    assert table.weight(("g:1",), 1) == pytest.approx(7.027, abs=1e-3)
    assert table.weight(("g:1",), 0) == 0


def test_class_documents_sizes():
    pos, neg = build_class_documents(from_token_rows(TOY_ROWS, TOY_LABELS))
    assert sum(map(len, pos)) == 6 and sum(map(len, neg)) == 6


def test_class_documents_need_both_classes():
    with pytest.raises(DataError):
        build_class_documents(from_token_rows(TOY_ROWS, [1, 1, 1, 1]))


def test_ngrams_never_span_samples():
    docs = ([("a:1",), ("b:1",)], [("a:1",)])
    table = tfidf_weights(docs, 1, 2)
    assert ("a:1", "b:1") not in table.df


@settings(max_examples=200, deadline=None)
@given(token_tables(max_rows=7, max_feats=4), st.integers(1, 4), st.integers(0, 3))
def test_tfidf_weights_match_bruteforce(table, lo, extra):
    rows, labels = table
    if sum(len(r) for r in rows) > 30:
        rows = rows[: 30 // len(rows[0])]
        labels = labels[: len(rows)]
    hi = lo + extra
    pos = [r for r, y in zip(rows, labels) if y == 1]
    neg = [r for r, y in zip(rows, labels) if y == 0]
    got = tfidf_weights((pos, neg), lo, hi)
    want = tfidf_oracle(pos, neg, lo, hi)
    assert set(got.df) == set(want)
    for g, (w0, w1) in want.items():
        assert got.weight(g, 0) == w0
        assert got.weight(g, 1) == w1
        assert got.idf(g) in (IDF_SHARED, IDF_UNIQUE)


def _oracle_pool(rows, labels, cfg):
    """Pool by brute force, reproducing the seeded per-round column order."""
    data = from_token_rows(rows, labels)
    cols = np.asarray(informative_columns(data), dtype=int)
    out = set()
    for t in range(cfg.permutations):
        order = cols[np.random.default_rng((cfg.seed, t)).permutation(len(cols))]
        prow = [tuple(r[j] for j in order) for r in rows]
        pos = [r for r, y in zip(prow, labels) if y == 1]
        neg = [r for r, y in zip(prow, labels) if y == 0]
        w = tfidf_oracle(pos, neg, cfg.ngram_lo, min(cfg.ngram_hi, len(order)))
        for label in (0, 1):
            for g in top_k_oracle(w, label, cfg.top_k):
                out.add(Rule(g))
    return out


def test_toy_pool_matches_bruteforce():
    cfg = MiningConfig(ngram_lo=1, ngram_hi=3, permutations=4, top_k=3, seed=7)
    pool = mine_tfidf_rules(from_token_rows(TOY_ROWS, TOY_LABELS), cfg)
    assert set(pool) == _oracle_pool(TOY_ROWS, TOY_LABELS, cfg)


@settings(max_examples=80, deadline=None)
@given(token_tables(max_rows=10, max_feats=5), st.integers(1, 3), st.integers(1, 5), st.integers(0, 1000))
def test_pool_matches_bruteforce(table, lo, k, seed):
    rows, labels = table
    cfg = MiningConfig(ngram_lo=lo, ngram_hi=lo + 2, permutations=3, top_k=k, seed=seed)
    data = from_token_rows(rows, labels)
    if not informative_columns(data):
        return
    pool = mine_tfidf_rules(data, cfg)
    assert set(pool) == _oracle_pool(rows, labels, cfg)
    assert len(pool) == len(set(pool))


def test_candidate_count_bounded_by_2kp():
    cfg = MiningConfig(ngram_lo=1, ngram_hi=2, permutations=5, top_k=2)
    pool, n = mine_tfidf_rules(from_token_rows(TOY_ROWS, TOY_LABELS), cfg, return_candidates=True)
    assert len(pool) <= n <= 2 * cfg.top_k * cfg.permutations


def test_mining_is_deterministic():
    cfg = MiningConfig(ngram_lo=1, ngram_hi=3, permutations=10, top_k=3, seed=3)
    data = from_token_rows(TOY_ROWS, TOY_LABELS)
    assert mine_tfidf_rules(data, cfg).dumps() == mine_tfidf_rules(data, cfg).dumps()
    assert [r.key for r in mine_tfidf_rules(data, cfg)] == [r.key for r in mine_tfidf_rules(data, cfg)]


@settings(max_examples=60, deadline=None)
@given(token_tables(), st.integers(0, 10_000))
def test_permutation_keeps_unigram_tf(table, seed):
    rows, labels = table
    data = from_token_rows(rows, labels)
    order = np.random.default_rng(seed).permutation(len(rows[0]))
    base = tfidf_weights(build_class_documents(data), 1, 1)
    perm = tfidf_weights(build_class_documents(data, order), 1, 1)
    assert base.tf == perm.tf


def test_constant_columns_are_skipped():
    rows = [("a:1", "k:z"), ("a:2", "k:z"), ("a:1", "k:z")]
    data = from_token_rows(rows, [1, 0, 1])
    assert informative_columns(data) == [0]
    pool = mine_tfidf_rules(data, MiningConfig(ngram_lo=1, ngram_hi=2, permutations=2, top_k=5))
    assert all("k" not in r.features for r in pool)


# -- frequent-pattern baseline ------------------------------------------------


def test_support_counts():
    rows = [("a:1", "b:1"), ("a:1", "b:2"), ("a:1", "b:1"), ("a:2", "b:1")]
    data = from_token_rows(rows, [1, 1, 1, 1])
    assert support(data, Rule(["a:1"]), 1) == 0.75
    assert support(data, Rule(["a:1"]), 0) == 0.0


@settings(max_examples=150, deadline=None)
@given(token_tables(max_rows=12, max_feats=4), st.sampled_from([0.1, 0.25, 0.5, 0.75, 1.0]), st.integers(1, 3))
def test_frequent_itemsets_match_bruteforce(table, threshold, max_len):
    rows, _ = table
    got = {frozenset(s) for s in _frequent_itemsets(rows, threshold, max_len)}
    assert got == frequent_oracle(rows, threshold, max_len)


def test_toy_frequent_pool_matches_bruteforce():
    rows = [("a:1", "b:x", "c:p"), ("a:1", "b:x", "c:q"), ("a:2", "b:x", "c:p"), ("a:1", "b:y", "c:p")]
    labels = [1, 1, 0, 0]
    cfg = MiningConfig(min_support_pos=0.5, min_support_neg=0.5, max_cardinality=2)
    pool = mine_frequent_rules(from_token_rows(rows, labels), cfg)
    want = frequent_oracle(rows[:2], 0.5, 2) | frequent_oracle(rows[2:], 0.5, 2)
    assert {frozenset(r.conditions) for r in pool} == want


@settings(max_examples=60, deadline=None)
@given(token_tables(max_rows=12, max_feats=4), st.sampled_from([0.2, 0.4, 0.6]))
def test_apriori_downward_closure(table, threshold):
    rows, labels = table
    data = from_token_rows(rows, labels)
    cfg = MiningConfig(min_support_pos=threshold, min_support_neg=threshold, max_cardinality=3)
    pool = mine_frequent_rules(data, cfg)
    for rule in pool:
        label = 1 if support(data, rule, 1) >= threshold else 0
        assert support(data, rule, label) >= threshold
        for drop in range(rule.cardinality if rule.cardinality > 1 else 0):
            sub = Rule(rule.conditions[:drop] + rule.conditions[drop + 1 :])
            assert support(data, sub, label) >= threshold


def test_threshold_one_keeps_only_universal_tokens():
    rows = [("a:1", "b:1"), ("a:1", "b:2"), ("a:2", "b:1"), ("a:2", "b:2")]
    data = from_token_rows(rows, [1, 1, 0, 0])
    pool = mine_frequent_rules(data, MiningConfig(min_support_pos=1.0, min_support_neg=1.0))
    assert set(pool) == {Rule(["a:1"]), Rule(["a:2"])}


@pytest.mark.parametrize("bad", [0.0, -0.1, 1.5])
def test_frequent_rejects_bad_threshold(bad):
    data = from_token_rows(TOY_ROWS, TOY_LABELS)
    with pytest.raises(ValueError):
        mine_frequent_rules(data, MiningConfig(min_support_pos=bad))


@pytest.mark.parametrize(
    "kwargs",
    [dict(ngram_lo=0), dict(ngram_lo=3, ngram_hi=2), dict(permutations=0), dict(top_k=0), dict(max_cardinality=0)],
)
def test_mining_config_validation(kwargs):
    with pytest.raises(ValueError):
        MiningConfig(**kwargs)
