"""Outcome distributions, beliefs, best responses and equilibrium checks.

The central piece is ``_Engine``: a backward recursion over one player's
private-history tree.  It carries a bundle of opponent worlds (value profile,
leakage-type profile) with unnormalised weights and evaluates, for every value
of the player at once, both the prescribed continuation value and the
best-response value.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Mapping

import numpy as np

from .game import ROOT, GameTree
from .leakage import LeakageOrder, LeakageTypeSpace, PrivateHistory, private_histories
from .numeric import as_vector, within, zeros
from .strategies import Profile, TypedProfile, UndefinedPlan, default_profile, leaky_profile, table_profile


class UndefinedOpponentPlan(UndefinedPlan):
    pass


class NoEquilibriumFound(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# stage expansion

def _stage_joint(h, st, order: LeakageOrder, behave: Callable, fixed: Mapping, players):
    """Joint distribution of the actions of ``players`` at stage ``h``.

    Players act in increasing speed class; each conditions on the realised
    actions of strictly slower movers (``fixed`` actions count as realised).
    ``behave(j, ph)`` returns j's action distribution.
    Returns a list of (action dict, probability).
    """
    ranks = order.ranks
    results = [(dict(fixed), 1)]
    for r in sorted({ranks[j] for j in players}):
        members = [j for j in players if ranks[j] == r]
        grown = []
        for acts, p in results:
            leaked = tuple((k, a) for k, a in sorted(acts.items()) if ranks[k] < r)
            ph = PrivateHistory(h, leaked)
            dists = [list(behave(j, ph).items()) for j in members]
            for combo in product(*dists):
                q = p
                d = dict(acts)
                for j, (a, pa) in zip(members, combo):
                    d[j] = a
                    q = q * pa
                if q:
                    grown.append((d, q))
        results = grown
    return results


def _vector(n, acts: Mapping) -> tuple:
    return tuple(acts.get(j) for j in range(n))


def _order_of(space, types, n):
    if space is None or types is None or all(t is None for t in types):
        return LeakageOrder.equal(n)
    order = space.order_for(types)
    if order is None:
        raise ValueError(f"type profile {types} is not admissible")
    return order


# ---------------------------------------------------------------------------
# forward evaluation

def outcome_distribution(game: GameTree, profile: Profile, theta, order: LeakageOrder | None = None,
                         types=None, space: LeakageTypeSpace | None = None) -> dict:
    """Distribution over terminal histories for a full value profile."""
    n = game.n
    types = tuple(types) if types is not None else (None,) * n
    if order is None:
        order = _order_of(space, types, n)
    out = defaultdict(int)

    def behave(j, ph):
        return profile.dist(j, theta[j], types[j], ph)

    def go(h, p):
        if game.is_terminal(h):
            out[h] += p
            return
        st = game.stage(h)
        for acts, q in _stage_joint(h, st, order, behave, {}, st.movers):
            go(h + (_vector(n, acts),), p * q)

    go(ROOT, Fraction(1))
    return dict(out)


def expected_utility(game: GameTree, profile: Profile, theta, i: int, order=None, types=None, space=None):
    dist = outcome_distribution(game, profile, theta, order=order, types=types, space=space)
    return sum(p * game.utilities(z, theta)[i] for z, p in dist.items())


def outcome_lottery(game, profile, theta, order=None, types=None, space=None) -> dict:
    """Distribution over outcome labels."""
    out = defaultdict(int)
    for z, p in outcome_distribution(game, profile, theta, order, types, space).items():
        out[game.outcome(z)] += p
    return dict(out)


def continuation_value(game: GameTree, profile: Profile, space, i: int, value, ltype,
                       anchor: PrivateHistory, belief: Mapping, plan: Callable):
    """Expected utility of ``plan`` (ph -> dist) from ``anchor`` under ``belief``.

    Forward enumeration, independent of the backward engine; used to check
    best responses and to replay witnesses.
    """
    n = game.n
    total = 0
    for (theta_o, types), w in belief.items():
        theta = tuple(value if j == i else theta_o[j] for j in range(n))
        types = tuple(types)
        order = _order_of(space, types, n)

        def behave(j, ph, theta=theta, types=types):
            if j == i:
                return plan(ph)
            return profile.dist(j, theta[j], types[j], ph)

        acc = [0]

        def go(h, p, fixed=None):
            if game.is_terminal(h):
                acc[0] += p * game.utilities(h, theta)[i]
                return
            st = game.stage(h)
            players = [j for j in st.movers if not fixed or j not in fixed]
            for acts, q in _stage_joint(h, st, order, behave, fixed or {}, players):
                go(h + (_vector(n, acts),), p * q)

        go(anchor.public, 1, dict(anchor.leaked))
        total += w * acc[0]
    return total


# ---------------------------------------------------------------------------
# beliefs

def reach_factors(game: GameTree, profile: Profile, i: int, ph: PrivateHistory, order: LeakageOrder,
                  types) -> dict:
    """Per-opponent likelihood of the observed actions, one entry per value.

    Returns {j: [L_j(value) for value in grid_j]}.  Player i's own actions
    are not included: beliefs do not depend on them.
    """
    n = game.n
    ranks = order.ranks
    grids = game.values.grids
    out = {j: [1] * len(grids[j]) for j in range(n) if j != i}
    steps = [(ph.public[:k], ph.public[k], None) for k in range(len(ph.public))]
    if ph.leaked:
        leaked = dict(ph.leaked)
        steps.append((ph.public, leaked, leaked))
    for h, vec, partial in steps:
        st = game.stage(h)
        if partial is None:
            acts = {j: vec[j] for j in st.movers}
        else:
            acts = partial
        for j, a in acts.items():
            if j == i:
                continue
            sub = PrivateHistory(h, tuple((k, acts[k]) for k in sorted(acts) if ranks[k] < ranks[j]))
            row = out[j]
            for idx, v in enumerate(grids[j]):
                if row[idx]:
                    row[idx] = row[idx] * profile.dist(j, v, types[j], sub).get(a, 0)
    return out


@dataclass
class Belief:
    dist: dict          # {(theta with None at i, type profile): probability}
    source: str         # "bayes", "fallback" or "override"


class BeliefSystem:
    """Bayesian beliefs w.r.t. a profile, with a fixed off-path policy.

    When the observed history has zero probability, every opponent whose
    own actions are impossible reverts to its prior (per type block).
    ``overrides`` maps (i, ltype, ph) to an explicit belief.
    """

    def __init__(self, game: GameTree, profile: Profile, space: LeakageTypeSpace | None = None,
                 overrides: Mapping | None = None):
        self.game = game
        self.profile = profile
        self.space = space
        self.overrides = dict(overrides or {})
        self._memo = {}

    def _blocks(self, i, ltype):
        n = self.game.n
        if self.space is None or ltype is None:
            return [((None,) * n, LeakageOrder.equal(n), Fraction(1))]
        return self.space.belief(i, ltype)

    def at(self, i: int, ltype, ph: PrivateHistory) -> Belief:
        key = (i, ltype, ph)
        if key in self._memo:
            return self._memo[key]
        if key in self.overrides:
            res = Belief(dict(self.overrides[key]), "override")
            self._memo[key] = res
            return res
        game = self.game
        grids, priors = game.values.grids, game.values.priors
        blocks = []
        for prof, order, tau in self._blocks(i, ltype):
            factors = reach_factors(game, self.profile, i, ph, order, prof)
            weights = {j: [priors[j][k] * f[k] for k in range(len(f))] for j, f in factors.items()}
            blocks.append((prof, tau, weights))

        def mass(weights):
            m = 1
            for w in weights.values():
                m = m * sum(w)
            return m

        total = sum(tau * mass(w) for _, tau, w in blocks)
        source = "bayes"
        if not total:
            source = "fallback"
            fixed = []
            for prof, tau, weights in blocks:
                weights = {j: (w if sum(w) else list(priors[j])) for j, w in weights.items()}
                fixed.append((prof, tau, weights))
            blocks = fixed
            total = sum(tau * mass(w) for _, tau, w in blocks)
        dist = {}
        n = game.n
        opp = [j for j in range(n) if j != i]
        for prof, tau, weights in blocks:
            if not tau:
                continue
            choices = [[(grids[j][k], w) for k, w in enumerate(weights[j]) if w] for j in opp]
            for combo in product(*choices):
                p = tau
                theta = [None] * n
                for j, (v, w) in zip(opp, combo):
                    theta[j] = v
                    p = p * w
                if p:
                    key2 = (tuple(theta), tuple(prof))
                    dist[key2] = dist.get(key2, 0) + p / total
        res = Belief(dist, source)
        self._memo[key] = res
        return res

    def prior(self, i: int, ltype) -> dict:
        """Prior over (opponent values, type profile) before any play."""
        return self._prior(i, ltype)

    def _prior(self, i, ltype) -> dict:
        game = self.game
        n = game.n
        grids, priors = game.values.grids, game.values.priors
        opp = [j for j in range(n) if j != i]
        out = {}
        for prof, _, tau in self._blocks(i, ltype):
            for combo in product(*[list(zip(grids[j], priors[j])) for j in opp]):
                p = tau
                theta = [None] * n
                for j, (v, w) in zip(opp, combo):
                    theta[j] = v
                    p = p * w
                if p:
                    key = (tuple(theta), tuple(prof))
                    out[key] = out.get(key, 0) + p
        return out


def bayes_update(game, profile, space, i, ltype, ph, overrides=None) -> dict:
    """Posterior over (opponent values, type profile) at a private history."""
    return BeliefSystem(game, profile, space, overrides).at(i, ltype, ph).dist


# ---------------------------------------------------------------------------
# backward engine

@dataclass
class NodeRecord:
    weight: object
    plan: np.ndarray
    best: np.ndarray
    choice: np.ndarray      # index of the best action per own value
    actions: tuple


class _Engine:
    """Backward recursion over player i's private-history tree.

    ``plan(k, ph)`` is i's prescribed distribution for own value index k;
    ``terminal(x, theta)`` gives the payoff vector over own values (or a
    scalar).  Values are unnormalised: divide by the node weight.
    """

    def __init__(self, game: GameTree, profile: Profile, space, i: int, ltype,
                 plan: Callable | None = None, terminal: Callable | None = None,
                 want_best: bool = True):
        self.game = game
        self.profile = profile
        self.space = space
        self.i = i
        self.ltype = ltype
        self.n = game.n
        self.own = game.values.grid(i)
        self.m = len(self.own)
        self.exact = game.exact
        self.sig = space.signature(i, ltype) if (space is not None and ltype is not None) else frozenset()
        self.plan = plan
        self.terminal = terminal
        self.want_best = want_best
        self.records = {}
        self._orders = {}
        self._term_cache = {}
        self._private = getattr(game.utility, "private_values", False) and terminal is None

    # -- helpers --------------------------------------------------------
    def _order(self, types):
        o = self._orders.get(types)
        if o is None:
            o = _order_of(self.space, types, self.n)
            self._orders[types] = o
        return o

    def _behave(self, world):
        theta, types = world
        prof = self.profile

        def behave(j, ph):
            return prof.dist(j, theta[j], types[j], ph)
        return behave

    def _payoff(self, key):
        vec = self._term_cache.get(key)
        if vec is None:
            x, theta = key if not self._private else (key, None)
            if self.terminal is not None:
                raw = self.terminal(x, theta)
            else:
                th = theta if theta is not None else (None,) * self.n
                raw = self.game.utility.vector(self.i, x, th, self.own)
            if np.isscalar(raw) or isinstance(raw, Fraction):
                vec = raw
            else:
                vec = as_vector(list(raw), self.exact)
            self._term_cache[key] = vec
        return vec

    def _zero(self):
        return zeros(self.m, self.exact)

    # -- traversal ------------------------------------------------------
    def _advance(self, h, world, w, term, children):
        game = self.game
        i = self.i
        if h in game.outcomes:
            x = game.outcomes[h]
            key = x if self._private else (x, world[0])
            term[key] = term.get(key, 0) + w
            return
        st = game.stages[h]
        order = self._order(world[1])
        behave = self._behave(world)
        if i in st.movers:
            ri = order.ranks[i]
            slower = [j for j in st.movers if order.ranks[j] < ri]
            for acts, p in _stage_joint(h, st, order, behave, {}, slower):
                ph = PrivateHistory(h, tuple(sorted(acts.items())))
                bucket = children.setdefault(ph, {})
                bucket[world] = bucket.get(world, 0) + w * p
        else:
            for acts, p in _stage_joint(h, st, order, behave, {}, st.movers):
                self._advance(h + (_vector(self.n, acts),), world, w * p, term, children)

    def _collect(self, term, children):
        """Value of accumulated terminals plus child nodes: (plan, best)."""
        vp = self._zero()
        vb = self._zero()
        for key, w in term.items():
            u = self._payoff(key)
            vp = vp + w * u
        vb = vb + vp
        for ph, bundle in children.items():
            cp, cb = self.node(ph, bundle)
            vp = vp + cp
            vb = vb + cb
        return vp, vb

    def run_root(self, bundle: Mapping):
        term, children = {}, {}
        for world, w in bundle.items():
            self._advance(ROOT, world, w, term, children)
        return self._collect(term, children)

    def node(self, ph: PrivateHistory, bundle: Mapping):
        game = self.game
        i = self.i
        h = ph.public
        st = game.stages[h]
        acts_i = st.actions_of(i)
        fixed_base = dict(ph.leaked)
        q_plan, q_best = [], []
        for a in acts_i:
            term, children = {}, {}
            for world, w in bundle.items():
                order = self._order(world[1])
                ri = order.ranks[i]
                rest = [j for j in st.movers if j != i and order.ranks[j] >= ri]
                fixed = dict(fixed_base)
                fixed[i] = a
                behave = self._behave(world)
                for acts, p in _stage_joint(h, st, order, behave, fixed, rest):
                    self._advance(h + (_vector(self.n, acts),), world, w * p, term, children)
            vp, vb = self._collect(term, children)
            q_plan.append(vp)
            q_best.append(vb)
        qp = np.vstack(q_plan)
        qb = np.vstack(q_best)
        if self.plan is not None:
            plan_val = self._zero()
            index = {a: k for k, a in enumerate(acts_i)}
            for k in range(self.m):
                d = self.plan(k, ph)
                s = 0
                for a, p in d.items():
                    s = s + p * qp[index[a], k]
                plan_val[k] = s
        else:
            plan_val = self._zero()
        if self.want_best:
            best = qb.max(axis=0)
            if self.exact and qb.dtype == object:
                mask = qb == best
            else:
                tol = 1e-12 * (1.0 + np.abs(best.astype(float)))
                mask = qb.astype(float) >= best.astype(float) - tol
            choice = np.argmax(mask, axis=0)
        else:
            best = plan_val
            choice = np.zeros(self.m, dtype=int)
        weight = sum(bundle.values())
        self.records[ph] = NodeRecord(weight, plan_val, best, choice, acts_i)
        return plan_val, best


def _plan_from_profile(profile, i, own, ltype):
    def plan(k, ph):
        return profile.dist(i, own[k], ltype, ph)
    return plan


# ---------------------------------------------------------------------------
# best responses

def best_response(game: GameTree, i: int, value, ltype, opponents: Profile, beliefs,
                  anchor: PrivateHistory, space=None):
    """Optimal continuation plan and value from ``anchor``.

    ``beliefs`` is a BeliefSystem or an explicit {world: probability} map.
    Returns ({private history: action}, value).
    """
    belief = beliefs.at(i, ltype, anchor).dist if isinstance(beliefs, BeliefSystem) else dict(beliefs)
    eng = _Engine(game, opponents, space, i, ltype, plan=None)
    try:
        eng.node(anchor, belief)
    except UndefinedPlan as exc:
        raise UndefinedOpponentPlan(str(exc)) from exc
    k = game.values.index(i, value)
    rec = eng.records[anchor]
    plan = {ph: r.actions[int(r.choice[k])] for ph, r in eng.records.items()}
    return plan, rec.best[k] / rec.weight


# ---------------------------------------------------------------------------
# verification

@dataclass
class Cell:
    player: int
    ltype: object
    value: object
    history: PrivateHistory
    prescribed: object
    best: object
    gain: object
    deviation: object
    belief_source: str
    on_path: bool | None = None
    ok: bool = True

    def key(self):
        return (self.player, str(self.ltype), str(self.history), str(self.value))


@dataclass
class EquilibriumReport:
    passed: bool
    epsilon: object
    cells: list
    notes: list = field(default_factory=list)

    @property
    def violations(self) -> list:
        return [c for c in self.cells if not c.ok]

    @property
    def max_gain(self):
        gains = [c.gain for c in self.cells]
        return max(gains) if gains else 0

    def worst(self) -> Cell | None:
        if not self.cells:
            return None
        return max(self.cells, key=lambda c: c.gain)

    def ambiguous(self) -> list:
        return [c for c in self.cells if c.belief_source == "fallback"]


def _value_cells(game, i, ltype, records, source, epsilon, seen, cells, on_path):
    own = game.values.grid(i)
    for ph, rec in records.items():
        if ph in seen:
            continue
        seen.add(ph)
        W = rec.weight
        for k, v in enumerate(own):
            pres = rec.plan[k] / W
            best = rec.best[k] / W
            gain = best - pres
            flag = on_path(i, v, ltype, ph) if on_path else None
            cells.append(Cell(i, ltype, v, ph, pres, best, gain, rec.actions[int(rec.choice[k])],
                              source.get(ph, "bayes"), flag, within(gain, epsilon)))


def _sweep(game, profile, space, i, t, beliefs, plan):
    """Engine records for every private history of (i, t).

    The first pass starts at the root with prior beliefs; histories it never
    reaches are anchored with the belief system.  Yields (records, source).
    """
    sig = space.signature(i, t) if (space is not None and t is not None) else frozenset()
    eng = _Engine(game, profile, space, i, t, plan=plan)
    eng.run_root(beliefs._prior(i, t))
    seen = set(eng.records)
    yield eng.records, {}
    for ph in private_histories(game, sig, i):
        if ph in seen:
            continue
        b = beliefs.at(i, t, ph)
        eng.records = {}
        eng.node(ph, b.dist)
        source = {sub: (b.source if sub == ph else "bayes-after-" + b.source) for sub in eng.records}
        records = {k: v for k, v in eng.records.items() if k not in seen}
        seen.update(records)
        yield records, source


def verify_equilibrium(game: GameTree, profile: Profile, space: LeakageTypeSpace | None = None,
                       epsilon=0, beliefs: BeliefSystem | None = None, players=None,
                       on_path: Callable | None = None, ltypes: Mapping | None = None) -> EquilibriumReport:
    """Check sequential rationality at every private history.

    For each player and leakage type the engine runs once from the root with
    prior beliefs; histories it does not reach with positive weight are
    anchored separately with the belief system's off-path policy.
    """
    beliefs = beliefs or BeliefSystem(game, profile, space)
    cells = []
    players = range(game.n) if players is None else players
    for i in players:
        types_i = (space.names(i) if space is not None else [None]) if not ltypes else ltypes[i]
        own = game.values.grid(i)
        for t in types_i:
            seen = set()
            plan = _plan_from_profile(profile, i, own, t)
            for records, source in _sweep(game, profile, space, i, t, beliefs, plan):
                _value_cells(game, i, t, records, source, epsilon, seen, cells, on_path)
    passed = all(c.ok for c in cells)
    return EquilibriumReport(passed, epsilon, cells)


def best_response_table(game: GameTree, profile: Profile, space, i: int, ltype,
                        beliefs: BeliefSystem | None = None) -> dict:
    """{(value, private history): best action} for one (player, leakage type)."""
    beliefs = beliefs or BeliefSystem(game, profile, space)
    own = game.values.grid(i)
    table = {}
    for records, _ in _sweep(game, profile, space, i, ltype, beliefs, None):
        for ph, rec in records.items():
            for k, v in enumerate(own):
                table[(v, ph)] = rec.actions[int(rec.choice[k])]
    return table


def iterate_best_responses(game: GameTree, start: Profile, space: LeakageTypeSpace | None = None,
                           rounds: int = 20):
    """Round-robin best-response dynamics over (player, leakage type) pairs.

    Pairs that observe more move first.  Ties go to the lowest action index.
    Returns (profile, converged).
    """
    pairs = []
    for i in range(game.n):
        for t in (space.names(i) if space is not None else [None]):
            sig = space.signature(i, t) if (space is not None and t is not None) else frozenset()
            pairs.append((-len(sig), i, t))
    pairs = [(i, t) for _, i, t in sorted(pairs, key=lambda p: (p[0], p[1], str(p[2])))]
    tables = {}

    def build():
        parts = {key: leaky_profile(lambda i, v, t, ph, tab=tab: tab[(v, ph)], name="best response")
                 for key, tab in tables.items()}
        return TypedProfile(parts, fallback=start, name="best-response dynamics")

    current = start
    for _ in range(rounds):
        changed = False
        for i, t in pairs:
            tab = best_response_table(game, current, space, i, t)
            if tables.get((i, t)) != tab:
                if (i, t) in tables or any(current.dist(i, v, t, ph) != {a: 1} for (v, ph), a in tab.items()):
                    changed = True
                tables[(i, t)] = tab
                current = build()
        if not changed:
            return current, True
    return current, False


# ---------------------------------------------------------------------------
# extensions of a default profile

class Rationalizer:
    """Which private histories are consistent with the default profile."""

    def __init__(self, game: GameTree, s0: Profile):
        self.game = game
        self.s0 = s0
        self._alive = {}

    def alive(self, j: int, h) -> frozenset:
        key = (j, h)
        if key in self._alive:
            return self._alive[key]
        grid = self.game.values.grid(j)
        if h == ROOT:
            res = frozenset(range(len(grid)))
        else:
            parent, vec = h[:-1], h[-1]
            prev = self.alive(j, parent)
            st = self.game.stage(parent)
            if j in st.movers:
                ph = PrivateHistory(parent)
                res = frozenset(k for k in prev if self.s0.dist(j, grid[k], None, ph).get(vec[j], 0) > 0)
            else:
                res = prev
        self._alive[key] = res
        return res

    def ok(self, i: int, value, ph: PrivateHistory) -> bool:
        h = ph.public
        k = self.game.values.index(i, value)
        if k not in self.alive(i, h):
            return False
        for j in range(self.game.n):
            if j != i and not self.alive(j, h):
                return False
        grids = self.game.values.grids
        for j, a in ph.leaked:
            if not any(self.s0.dist(j, grids[j][q], None, PrivateHistory(h)).get(a, 0) > 0
                       for q in self.alive(j, h)):
                return False
        return True

    def reachable(self, ph: PrivateHistory, i: int) -> bool:
        """Some value of i (and of everyone else) reaches this history."""
        return any(self.ok(i, v, ph) for v in self.game.values.grid(i))


class _Responder:
    """Best responses of (player, leakage type) against a base profile."""

    def __init__(self, game, base: Profile, space):
        self.game = game
        self.base = base
        self.space = space
        self.beliefs = BeliefSystem(game, base, space)
        self._memo = {}

    def action(self, i, value, ltype, ph):
        key = (i, ltype, ph)
        rec = self._memo.get(key)
        if rec is None:
            eng = _Engine(self.game, self.base, self.space, i, ltype, plan=None)
            eng.node(ph, self.beliefs.at(i, ltype, ph).dist)
            rec = eng.records[ph]
            self._memo[key] = rec
        k = self.game.values.index(i, value)
        return rec.actions[int(rec.choice[k])]


class ExtendedProfile(Profile):
    """Default play on histories the default profile rationalises; best
    responses against default opponents everywhere else."""

    def __init__(self, game: GameTree, s0: Profile, space: LeakageTypeSpace, name: str = "extended"):
        self.game = game
        self.s0 = s0
        self.space = space
        self.rational = Rationalizer(game, s0)
        self.responder = _Responder(game, s0, space)
        super().__init__(self._choose, leak_free=False, name=name)

    def _choose(self, i, value, ltype, ph):
        if self.rational.ok(i, value, ph):
            return self.s0.dist(i, value, None, ph)
        return self.responder.action(i, value, ltype, ph)

    def on_path(self, i, value, ltype, ph) -> bool:
        return self.rational.ok(i, value, ph)


class ResponderProfile(Profile):
    """Listed (player, leakage type) pairs best-respond to ``base`` at every
    history; everyone else follows ``base``."""

    def __init__(self, game, base: Profile, space, responders, name: str = "responders"):
        self.base = base
        self.responders = set(responders)
        self.responder = _Responder(game, base, space)
        super().__init__(self._choose, leak_free=False, name=name)

    def _choose(self, i, value, ltype, ph):
        if (i, ltype) in self.responders:
            return self.responder.action(i, value, ltype, ph)
        return self.base.dist(i, value, ltype, ph)


def extend_default(game, s0, space) -> ExtendedProfile:
    return ExtendedProfile(game, s0, space)


def best_response_extension(game, s0, space) -> Profile:
    """Zero types follow the extended default; all other types best-respond to it."""
    base = ExtendedProfile(game, s0, space)
    zero = space.zero_types()
    responders = [key for key in space.types if key not in zero]
    return ResponderProfile(game, base, space, responders, name="best-response extension")


# ---------------------------------------------------------------------------
# default equilibrium search

def _decision_points(game):
    pts = []
    for h in game.nonterminal():
        st = game.stage(h)
        for i in st.movers:
            for v in game.values.grid(i):
                pts.append((i, v, h))
    pts.sort(key=lambda p: (p[0], game.values.index(p[0], p[1])))
    return pts


def _solve_linear(rows, rhs):
    """Exact Gauss-Jordan elimination; None unless the solution is unique."""
    m = len(rows)
    if m == 0:
        return []
    k = len(rows[0])
    a = [list(r) + [b] for r, b in zip(rows, rhs)]
    piv_cols = []
    r = 0
    for c in range(k):
        piv = next((q for q in range(r, m) if a[q][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        pv = a[r][c]
        a[r] = [x / pv for x in a[r]]
        for q in range(m):
            if q != r and a[q][c] != 0:
                f = a[q][c]
                a[q] = [x - f * y for x, y in zip(a[q], a[r])]
        piv_cols.append(c)
        r += 1
    if any(all(x == 0 for x in row[:-1]) and row[-1] != 0 for row in a):
        return None
    if len(piv_cols) < k:
        return None
    sol = [0] * k
    for row_idx, c in enumerate(piv_cols):
        sol[c] = a[row_idx][-1]
    return sol


def _mixed_static_search(game, epsilon, limit):
    """Support-two search for two-player one-stage games via indifference."""
    if game.n != 2 or len(game.stages) != 1 or ROOT not in game.stages:
        return None
    st = game.stage(ROOT)
    if st.movers != (0, 1):
        return None
    vals = game.values
    agents = [(i, v) for i in (0, 1) for v in vals.grid(i)]
    options = {}
    for i, v in agents:
        acts = st.actions_of(i)
        options[(i, v)] = [(a,) for a in acts] + [(a, b) for x, a in enumerate(acts) for b in acts[x + 1:]]

    def util(i, ai, aj, vi, vj):
        vec = [None, None]
        vec[i], vec[1 - i] = ai, aj
        theta = [None, None]
        theta[i], theta[1 - i] = vi, vj
        return game.utilities(ROOT + (tuple(vec),), tuple(theta))[i]

    count = 0
    for combo in product(*(options[a] for a in agents)):
        if all(len(s) == 1 for s in combo):
            continue
        count += 1
        if count > limit:
            break
        supp = dict(zip(agents, combo))
        probs = {}
        ok = True
        for i in (0, 1):
            j = 1 - i
            unknown = [(j, v) for v in vals.grid(j) if len(supp[(j, v)]) == 2]
            eqs, rhs = [], []
            for v in vals.grid(i):
                s = supp[(i, v)]
                if len(s) != 2:
                    continue
                a, b = s
                row = [0] * len(unknown)
                const = 0
                for vj, pj in zip(vals.grid(j), vals.prior(j)):
                    sj = supp[(j, vj)]
                    if len(sj) == 1:
                        const += pj * (util(i, a, sj[0], v, vj) - util(i, b, sj[0], v, vj))
                    else:
                        c, d = sj
                        base = util(i, a, d, v, vj) - util(i, b, d, v, vj)
                        slope = (util(i, a, c, v, vj) - util(i, b, c, v, vj)) - base
                        const += pj * base
                        row[unknown.index((j, vj))] += pj * slope
                eqs.append(row)
                rhs.append(-const)
            if len(eqs) != len(unknown):
                ok = False
                break
            sol = _solve_linear(eqs, rhs)
            if sol is None or any(not (0 < p < 1) for p in sol):
                ok = False
                break
            probs.update(dict(zip(unknown, sol)))
        if not ok:
            continue

        def fn(i, v, h, supp=supp, probs=probs):
            s = supp[(i, v)]
            if len(s) == 1:
                return s[0]
            p = probs[(i, v)]
            return {s[0]: p, s[1]: 1 - p}

        cand = default_profile(fn, name="mixed search")
        if verify_equilibrium(game, cand, None, epsilon).passed:
            return cand
    return None


def default_equilibrium(game: GameTree, profile: Profile | None = None, epsilon=None,
                        max_profiles: int = 200_000):
    """A verified no-leakage equilibrium and its belief system.

    Uses ``profile`` or a factory in ``game.meta['default']`` when given,
    otherwise searches pure profiles, then two-action mixtures for two-player
    one-stage games.
    """
    if epsilon is None:
        epsilon = game.meta.get("epsilon", 0)
    if profile is None and "default" in game.meta:
        profile = game.meta["default"](game)
    if profile is not None:
        rep = verify_equilibrium(game, profile, None, epsilon)
        if not rep.passed:
            raise NoEquilibriumFound(f"supplied profile fails verification (max gain {rep.max_gain})")
        return profile, BeliefSystem(game, profile)
    pts = _decision_points(game)
    choices = [game.stage(h).actions_of(i) for i, _, h in pts]
    total = 1
    for c in choices:
        total *= len(c)
    if total <= max_profiles:
        for combo in product(*choices):
            table = {pt: a for pt, a in zip(pts, combo)}
            cand = table_profile(table, leak_free=True, name="pure search")
            if verify_equilibrium(game, cand, None, epsilon).passed:
                return cand, BeliefSystem(game, cand)
    cand = _mixed_static_search(game, epsilon, max_profiles)
    if cand is not None:
        return cand, BeliefSystem(game, cand)
    raise NoEquilibriumFound("no pure or support-two equilibrium found; supply one")
