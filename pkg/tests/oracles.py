"""Brute-force reference implementations used by the test suite.

These are written from the definitions, deliberately slow and share no code
with the package beyond plain data types.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction


# -- discretization ----------------------------------------------------------


def _h(labels):
    n = len(labels)
    if n == 0:
        return 0.0
    out = 0.0
    for cls in set(labels):
        p = labels.count(cls) / n
        out -= p * math.log2(p)
    return out


def mdlp_oracle(values, labels):
    """Recursive entropy discretization, scanning every boundary point by hand."""
    pairs = sorted((v, y) for v, y in zip(values, labels) if not math.isnan(v))
    cuts = []

    def classes_at(part, v):
        return {y for x, y in part if x == v}

    def recurse(part):
        n = len(part)
        if n < 2:
            return
        ys = [y for _, y in part]
        distinct = sorted({x for x, _ in part})
        best = None
        for a, b in zip(distinct, distinct[1:]):
            ca, cb = classes_at(part, a), classes_at(part, b)
            if len(ca) == 1 and ca == cb:
                continue  # not a boundary point
            left = [y for x, y in part if x <= a]
            right = [y for x, y in part if x > a]
            e = (len(left) * _h(left) + len(right) * _h(right)) / n
            if best is None or e < best[0] - 1e-12:
                best = (e, a, b, left, right)
        if best is None:
            return
        e, a, b, left, right = best
        ent = _h(ys)
        k, k1, k2 = len(set(ys)), len(set(left)), len(set(right))
        delta = math.log2(3**k - 2) - (k * ent - k1 * _h(left) - k2 * _h(right))
        if ent - e <= (math.log2(n - 1) + delta) / n:
            return
        cuts.append((a + b) / 2)
        recurse([p for p in part if p[0] <= a])
        recurse([p for p in part if p[0] > a])

    recurse(pairs)
    return sorted(cuts)


# -- TF-IDF ------------------------------------------------------------------


def tfidf_oracle(pos_rows, neg_rows, lo, hi):
    """``{gram: (w_neg, w_pos)}`` by explicit counting over each sample."""
    tf = [{}, {}]
    for label, rows in ((1, pos_rows), (0, neg_rows)):
        for row in rows:
            for n in range(lo, hi + 1):
                for s in range(0, len(row) - n + 1):
                    g = tuple(row[s : s + n])
                    tf[label][g] = tf[label].get(g, 0) + 1
    out = {}
    for g in set(tf[0]) | set(tf[1]):
        df = (g in tf[0]) + (g in tf[1])
        w = 1 + math.log(3 / (1 + df))
        out[g] = (tf[0].get(g, 0) * w, tf[1].get(g, 0) * w)
    return out


def top_k_oracle(weights, label, k):
    grams = [g for g, w in weights.items() if w[label] > 0]
    grams.sort(key=lambda g: (-weights[g][label], g))
    return grams[:k]


# -- frequent itemsets -------------------------------------------------------


def frequent_oracle(rows, threshold, max_len):
    """Every token set of size <= max_len contained in >= threshold of rows."""
    universe = sorted({t for r in rows for t in r})
    sets = [set(r) for r in rows]
    out = set()
    for size in range(1, max_len + 1):
        for combo in itertools.combinations(universe, size):
            hits = sum(1 for s in sets if s.issuperset(combo))
            if rows and hits / len(rows) >= threshold:
                out.add(frozenset(combo))
    return out


# -- posterior ---------------------------------------------------------------


def _pois(k, rate):
    return rate**k * math.exp(-rate) / math.factorial(k)


def posterior_oracle(rows, labels, pool, rule_list, lam, eta, alpha=(1.0, 1.0)):
    """Unnormalized posterior (not log) of ``rule_list`` over ``pool``.

    Rules are frozensets of tokens. Duplicate lists get probability 0.
    """
    if len(set(rule_list)) != len(rule_list):
        return 0.0
    a1, a0 = alpha
    # likelihood: first-match capture, then Gamma-function products per slot
    n1 = [0] * (len(rule_list) + 1)
    n0 = [0] * (len(rule_list) + 1)
    for row, y in zip(rows, labels):
        slot = len(rule_list)
        for j, r in enumerate(rule_list):
            if r <= set(row):
                slot = j
                break
        if y == 1:
            n1[slot] += 1
        else:
            n0[slot] += 1
    like = 1.0
    for p, q in zip(n1, n0):
        like *= math.gamma(q + a0) * math.gamma(p + a1) / math.gamma(p + q + a0 + a1)

    # prior: truncated Poisson length, then per-rule cardinality and uniform choice
    m = len(rule_list)
    prior = _pois(m, lam) / sum(_pois(k, lam) for k in range(len(pool) + 1))
    unused = list(pool)
    for r in rule_list:
        cards = {len(u) for u in unused}
        c = len(r)
        prior *= _pois(c, eta) / sum(_pois(a, eta) for a in cards)
        prior *= 1 / sum(1 for u in unused if len(u) == c)
        unused.remove(r)
    return like * prior


def all_lists(pool_size, max_len):
    """Every ordered list of distinct pool indices with length <= max_len."""
    for m in range(max_len + 1):
        yield from itertools.permutations(range(pool_size), m)


# -- AUC ---------------------------------------------------------------------


def auc_oracle(scores, labels):
    """Pairwise comparison over every (positive, negative) pair, exact."""
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    total = Fraction(0)
    for p in pos:
        for q in neg:
            if p > q:
                total += 1
            elif p == q:
                total += Fraction(1, 2)
    return float(total / (len(pos) * len(neg)))
