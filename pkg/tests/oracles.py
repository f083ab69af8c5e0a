"""Brute-force reference computations used by the tests.

Nothing here calls the backward-induction engine; each helper applies the
rules of a game or auction directly.
"""
from __future__ import annotations

import itertools
import random
from fractions import Fraction

from leakproof.game import ROOT
from leakproof.leakage import PrivateHistory


def sealed_bid_outcome(bids, reserve, rule="first_price", tie="uniform_random"):
    """Expected (q, m) per bidder; ``None`` bids abstain."""
    n = len(bids)
    live = [j for j in range(n) if bids[j] is not None and bids[j] >= reserve]
    q = [Fraction(0)] * n
    m = [Fraction(0)] * n
    if not live:
        return q, m
    top = max(bids[j] for j in live)
    winners = [j for j in live if bids[j] == top]
    if tie == "no_allocation" and len(winners) > 1:
        return q, m
    for w in winners:
        others = [bids[j] for j in live if j != w]
        if rule == "first_price":
            price = top
        else:
            price = max(others + [reserve])
        share = Fraction(1, len(winners))
        q[w] += share
        m[w] += share * price
    return q, m


def sealed_bid_revenue(values, bid_of, reserve, rule="first_price"):
    """Revenue of a symmetric pure bid function on a uniform two-bidder grid."""
    p = Fraction(1, len(values))
    total = 0
    for v0, v1 in itertools.product(values, repeat=2):
        _, m = sealed_bid_outcome([bid_of(v0), bid_of(v1)], reserve, rule)
        total += p * p * sum(m)
    return total


def expected_payoff(game, profile, i, theta):
    """No-leakage expected utility by forward multiplication along every path."""
    total = 0
    for z, p in path_probabilities(game, profile, theta).items():
        if game.is_terminal(z):
            total += p * game.utilities(z, theta)[i]
    return total


def path_probabilities(game, profile, theta) -> dict:
    """Reach probability of every history under a no-leakage profile."""
    reach = {ROOT: Fraction(1)}
    stack = [ROOT]
    while stack:
        h = stack.pop()
        if game.is_terminal(h):
            continue
        st = game.stage(h)
        dists = [profile.dist(j, theta[j], None, PrivateHistory(h)) for j in st.movers]
        for combo in itertools.product(*(list(d.items()) for d in dists)):
            vec = [None] * game.n
            p = reach[h]
            for j, (a, q) in zip(st.movers, combo):
                vec[j] = a
                p = p * q
            child = h + (tuple(vec),)
            reach[child] = reach.get(child, 0) + p
            stack.append(child)
    return reach


def static_max_gain(game, profile):
    """Largest interim gain from a pure deviation in a one-stage game without leakage."""
    root = PrivateHistory()
    st = game.stage(ROOT)
    worst = 0
    for i in st.movers:
        acts = st.actions_of(i)
        for v in game.values.grid(i):
            def payoff(dist_i):
                tot = 0
                for theta, p in game.values.profiles():
                    if theta[i] != v:
                        continue
                    p = p / game.values.prob(i, v)
                    dists = [dist_i if j == i else profile.dist(j, theta[j], None, root) for j in st.movers]
                    for combo in itertools.product(*(list(d.items()) for d in dists)):
                        vec = [None] * game.n
                        q = p
                        for j, (a, r) in zip(st.movers, combo):
                            vec[j] = a
                            q = q * r
                        tot += q * game.utilities((tuple(vec),), theta)[i]
                return tot
            base = payoff(profile.dist(i, v, None, root))
            best = max(payoff({a: 1}) for a in acts)
            worst = max(worst, best - base)
    return worst


def uniform_virtual_values(values, step):
    """Closed form for a uniform prior on an equally spaced grid."""
    m = len(values)
    return [values[s - 1] - step * (m - s) for s in range(1, m + 1)]


def random_pure_plan(game, i, histories, rng: random.Random):
    table = {ph: rng.choice(list(game.stage(ph.public).actions_of(i))) for ph in histories}
    return lambda ph: {table[ph]: 1}
