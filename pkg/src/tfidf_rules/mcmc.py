"""Metropolis-Hastings search over rule lists.

States are tuples of pool indices. Proposals add an unused rule at a
random position, remove a random rule, or move a rule to another
position. The Hastings correction accounts for how many ways each move
can fire in each direction, including the renormalization that happens
when a move type is infeasible in a given state.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .dataset import DiscretizedDataset
from .rulelist import Posterior, PriorConfig, RuleList
from .rulemine import RulePool

log = logging.getLogger(__name__)

ADD, REMOVE, MOVE = 0, 1, 2
LOG_EVERY = 1000


@dataclass(frozen=True)
class SearchConfig:
    iterations: int = 30000
    chains: int = 3
    seed: int = 0
    move_probabilities: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)

    def __post_init__(self):
        if self.iterations < 1 or self.chains < 1:
            raise ValueError("iterations and chains must be >= 1")
        p = self.move_probabilities
        if len(p) != 3 or min(p) < 0 or abs(sum(p) - 1.0) > 1e-9:
            raise ValueError("move_probabilities must be three non-negative numbers summing to 1")


@dataclass
class ChainState:
    current: tuple[int, ...]
    current_log_posterior: float
    best: tuple[int, ...]
    best_log_posterior: float
    rng: np.random.Generator


def chain_seed(seed: int, chain: int) -> np.random.Generator:
    return np.random.default_rng((seed, chain))


def _feasible(length: int, unused: int, probs) -> np.ndarray:
    ok = np.array([unused > 0, length > 0, length > 1], dtype=float)
    return np.asarray(probs, dtype=float) * ok


def _log_move_prob(move: int, length: int, unused: int, probs) -> float:
    w = _feasible(length, unused, probs)
    total = w.sum()
    if w[move] == 0 or total == 0:
        return -math.inf
    return math.log(w[move] / total)


def init_chain(posterior: Posterior, rng: np.random.Generator) -> ChainState:
    """Draw a starting list from the prior and score it."""
    pool = posterior.pool
    if len(pool) == 0:
        raise ValueError("cannot start a chain from an empty rule pool")
    lam, eta = posterior.cfg.lam, posterior.cfg.eta
    ks = np.arange(len(pool) + 1)
    logp = ks * math.log(lam) - lam - np.array([math.lgamma(k + 1) for k in ks])
    p = np.exp(logp - logp.max())
    m = int(rng.choice(len(ks), p=p / p.sum()))

    unused: dict[int, list[int]] = {}
    for i, rule in enumerate(pool.rules):
        unused.setdefault(rule.cardinality, []).append(i)
    chosen = []
    for _ in range(m):
        avail = sorted(c for c, idx in unused.items() if idx)
        w = np.array([c * math.log(eta) - eta - math.lgamma(c + 1) for c in avail])
        w = np.exp(w - w.max())
        c = avail[int(rng.choice(len(avail), p=w / w.sum()))]
        j = int(rng.integers(len(unused[c])))
        chosen.append(unused[c].pop(j))
    state = tuple(chosen)
    lp = posterior.log_posterior(state)
    return ChainState(state, lp, state, lp, rng)


def propose(current: tuple[int, ...], pool_size: int, probs, rng: np.random.Generator):
    """Draw a neighbouring list; returns ``(candidate, ln q(d|d*) - ln q(d*|d))``."""
    length = len(current)
    unused_n = pool_size - length
    w = _feasible(length, unused_n, probs)
    if w.sum() == 0:
        raise ValueError("no feasible move: empty list and empty pool")
    move = int(rng.choice(3, p=w / w.sum()))

    if move == ADD:
        used = set(current)
        # uniform over unused rules without materializing the complement for large pools
        while True:
            r = int(rng.integers(pool_size))
            if r not in used:
                break
        pos = int(rng.integers(length + 1))
        cand = current[:pos] + (r,) + current[pos:]
        fwd = _log_move_prob(ADD, length, unused_n, probs) - math.log(unused_n * (length + 1))
        rev = _log_move_prob(REMOVE, length + 1, unused_n - 1, probs) - math.log(length + 1)
    elif move == REMOVE:
        pos = int(rng.integers(length))
        cand = current[:pos] + current[pos + 1 :]
        fwd = _log_move_prob(REMOVE, length, unused_n, probs) - math.log(length)
        rev = _log_move_prob(ADD, length - 1, unused_n + 1, probs) - math.log((unused_n + 1) * length)
    else:
        i = int(rng.integers(length))
        j = int(rng.integers(length - 1))
        if j >= i:
            j += 1
        rest = current[:i] + current[i + 1 :]
        cand = rest[:j] + (current[i],) + rest[j:]
        # moving i->j and j->i coincide for adjacent positions; the multiplicity is
        # the same in both directions, so the move kernel is symmetric
        fwd = rev = 0.0
    return cand, rev - fwd


def mh_step(state: ChainState, posterior: Posterior, probs=(1 / 3, 1 / 3, 1 / 3)) -> ChainState:
    cand, correction = propose(state.current, len(posterior.pool), probs, state.rng)
    lp = posterior.log_posterior(cand)
    if lp == -math.inf:
        return state
    log_ratio = lp - state.current_log_posterior + correction
    if log_ratio >= 0 or state.rng.random() < math.exp(log_ratio):
        state.current = cand
        state.current_log_posterior = lp
        if lp > state.best_log_posterior:
            state.best = cand
            state.best_log_posterior = lp
    return state


def run_chain(posterior: Posterior, cfg: SearchConfig, chain: int) -> ChainState:
    state = init_chain(posterior, chain_seed(cfg.seed, chain))
    for t in range(1, cfg.iterations + 1):
        mh_step(state, posterior, cfg.move_probabilities)
        if t % LOG_EVERY == 0:
            log.info(
                "chain=%d iter=%d logpost=%.4f best=%.4f",
                chain, t, state.current_log_posterior, state.best_log_posterior,
            )
    return state


def search(
    data: DiscretizedDataset,
    pool: RulePool,
    prior_cfg: PriorConfig,
    search_cfg: SearchConfig,
) -> RuleList:
    """MAP rule list over independent chains, with counts from ``data``."""
    if len(data) == 0:
        raise ValueError("cannot search on an empty dataset")
    posterior = Posterior(data, pool, prior_cfg)
    best, best_lp = None, -math.inf
    for chain in range(search_cfg.chains):
        state = run_chain(posterior, search_cfg, chain)
        if best is None or state.best_log_posterior > best_lp:
            best, best_lp = state.best, state.best_log_posterior
    return posterior.rule_list(best)
