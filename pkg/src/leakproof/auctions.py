"""Discretised single-item auctions and revenue tools.

Formats: sealed-bid first and second price, descending-clock (Dutch) and
ascending-clock button (English) auctions on a bid grid.  Terminals carry an
``AuctionOutcome`` holding win probabilities and expected payments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .game import GameTree, ROOT, Stage, ValueTypeSpace
from .leakage import PrivateHistory
from .numeric import all_exact, close, is_exact
from .solver import BeliefSystem, _Engine, outcome_distribution
from .strategies import Profile, default_profile

ABSTAIN = "abstain"
ACCEPT, WAIT = "accept", "wait"
EXIT, STAY = "exit", "stay"
FORMATS = ("first_price", "second_price", "dutch", "english")
TIE_RULES = ("uniform_random", "no_allocation", "fast_wins")


class GridError(ValueError):
    pass


class TieBreakError(ValueError):
    pass


class ZeroPriorMass(ValueError):
    pass


class AllNegative(ValueError):
    pass


class OffPathHistory(ValueError):
    pass


@dataclass(frozen=True)
class AuctionOutcome:
    q: tuple
    m: tuple

    def __post_init__(self):
        if any(x < 0 or x > 1 for x in self.q) or sum(self.q) > 1 + 1e-12:
            raise ValueError(f"invalid allocation {self.q}")
        object.__setattr__(self, "_hash", hash((self.q, self.m)))

    def __hash__(self):
        return self._hash

    @classmethod
    def no_sale(cls, n: int) -> "AuctionOutcome":
        return cls((Fraction(0),) * n, (Fraction(0),) * n)

    def __str__(self):
        fmt = lambda xs: "(" + ",".join(str(x) for x in xs) + ")"
        return f"q={fmt(self.q)} m={fmt(self.m)}"


class AuctionUtility:
    """Quasi-linear private-value utilities q_i * theta_i - m_i."""

    private_values = True

    def __init__(self, exact: bool):
        self.exact = exact

    def __call__(self, x: AuctionOutcome, theta) -> tuple:
        return tuple(q * v - m for q, v, m in zip(x.q, theta, x.m))

    def vector(self, i, x: AuctionOutcome, theta, own_values):
        q, m = x.q[i], x.m[i]
        return [q * v - m for v in own_values]


@dataclass(frozen=True)
class AuctionSpec:
    format: str
    values: ValueTypeSpace
    reserve: object = 0
    tie_break: str = "uniform_random"
    bid_grid: tuple | None = None
    fast_bidder: int | None = None
    non_anonymous: bool = False
    abstain: bool = True

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ValueError(f"unknown format {self.format!r}")
        if self.tie_break not in TIE_RULES:
            raise ValueError(f"unknown tie-break {self.tie_break!r}")
        if self.tie_break == "fast_wins":
            if not self.non_anonymous:
                raise TieBreakError("fast_wins needs a fixture flagged non-anonymous")
            if self.fast_bidder is None:
                raise TieBreakError("fast_wins needs fast_bidder")
        grid = self.grid
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise GridError("bid grid must be strictly increasing")
        if self.reserve not in grid:
            raise GridError(f"reserve {self.reserve} is not on the bid grid")

    @property
    def n(self) -> int:
        return self.values.n

    @property
    def grid(self) -> tuple:
        return tuple(self.bid_grid) if self.bid_grid is not None else tuple(self.values.grid(0))

    @property
    def bids(self) -> tuple:
        return tuple(b for b in self.grid if b >= self.reserve)

    @property
    def delta(self):
        return self.values.spacing(0)


def _split(tied: Sequence[int], rule: str, fast: int | None) -> dict:
    if len(tied) == 1:
        return {tied[0]: Fraction(1)}
    if rule == "no_allocation":
        return {}
    if rule == "fast_wins" and fast in tied:
        return {fast: Fraction(1)}
    share = Fraction(1, len(tied))
    return {j: share for j in tied}


def _outcome(n, shares: dict, price) -> AuctionOutcome:
    q = tuple(shares.get(j, Fraction(0)) for j in range(n))
    m = tuple(qj * price if qj else Fraction(0) for qj in q)
    return AuctionOutcome(q, m)


def _sealed(spec: AuctionSpec, bids: Sequence) -> AuctionOutcome:
    n = spec.n
    valid = [(b, j) for j, b in enumerate(bids) if b != ABSTAIN and b >= spec.reserve]
    if not valid:
        return AuctionOutcome.no_sale(n)
    top = max(b for b, _ in valid)
    tied = [j for b, j in valid if b == top]
    shares = _split(tied, spec.tie_break, spec.fast_bidder)
    if spec.format == "first_price":
        price = top
    else:
        ranked = sorted((b for b, _ in valid), reverse=True)
        price = max(ranked[1], spec.reserve) if len(ranked) > 1 else spec.reserve
    return _outcome(n, shares, price)


def build_auction(spec: AuctionSpec, meta: dict | None = None) -> GameTree:
    n = spec.n
    stages, outcomes = {}, {}
    bids = spec.bids
    everyone = tuple(range(n))
    if spec.format in ("first_price", "second_price"):
        acts = bids + ((ABSTAIN,) if spec.abstain else ())
        st = Stage(everyone, (acts,) * n)
        stages[ROOT] = st
        for vec in st.vectors(n):
            outcomes[(vec,)] = _sealed(spec, vec)
    elif spec.format == "dutch":
        ticks = tuple(reversed(bids))
        h = ROOT
        for k, price in enumerate(ticks):
            st = Stage(everyone, ((ACCEPT, WAIT),) * n)
            stages[h] = st
            for vec in st.vectors(n):
                takers = [j for j in range(n) if vec[j] == ACCEPT]
                if takers:
                    outcomes[h + (vec,)] = _outcome(n, _split(takers, spec.tie_break, spec.fast_bidder), price)
                elif k == len(ticks) - 1:
                    outcomes[h + (vec,)] = AuctionOutcome.no_sale(n)
            h = h + ((WAIT,) * n,)
    else:
        ticks = bids

        def grow(h, k, active):
            st = Stage(active, ((EXIT, STAY),) * len(active))
            stages[h] = st
            price = ticks[k]
            for vec in st.vectors(n):
                stayers = tuple(j for j in active if vec[j] == STAY)
                child = h + (vec,)
                if len(stayers) == 1:
                    outcomes[child] = _outcome(n, {stayers[0]: Fraction(1)}, price)
                elif not stayers:
                    if k == 0:
                        outcomes[child] = AuctionOutcome.no_sale(n)
                    else:
                        outcomes[child] = _outcome(n, _split(list(active), spec.tie_break, spec.fast_bidder), price)
                elif k == len(ticks) - 1:
                    outcomes[child] = _outcome(n, _split(list(stayers), spec.tie_break, spec.fast_bidder), price)
                else:
                    grow(child, k + 1, stayers)

        grow(ROOT, 0, everyone)
    exact = spec.values.exact and all_exact(spec.grid) and all_exact(
        [v for g in spec.values.grids for v in g])
    outcomes = _intern(outcomes, exact)
    info = {"auction": spec, "epsilon": 2 * spec.delta}
    info.update(meta or {})
    return GameTree(n, spec.values, AuctionUtility(exact), stages, outcomes, meta=info)


def _intern(outcomes: dict, exact: bool) -> dict:
    """Share one object per distinct outcome; floats throughout for inexact grids."""
    pool = {}
    out = {}
    for z, x in outcomes.items():
        if not exact:
            x = AuctionOutcome(tuple(float(v) for v in x.q), tuple(float(v) for v in x.m))
        out[z] = pool.setdefault(x, x)
    return out


def spec_of(game: GameTree) -> AuctionSpec:
    try:
        return game.meta["auction"]
    except KeyError:
        raise ValueError("not an auction game") from None


def clock_price(game: GameTree, h) -> object:
    """Current clock price at a public history of a Dutch or English game."""
    spec = spec_of(game)
    k = len(game.origin_of(h))
    ticks = tuple(reversed(spec.bids)) if spec.format == "dutch" else spec.bids
    return ticks[k]


# ---------------------------------------------------------------------------
# default strategies

def uniform_first_price_bid(value, n: int, reserve=0):
    """Symmetric equilibrium bid for values uniform on [0, 1]."""
    if value <= 0:
        return value * 0
    if reserve:
        return value - (value ** n - reserve ** n) / (n * value ** (n - 1))
    return value * (n - 1) / n


def round_up(x, grid: Sequence):
    for b in grid:
        if b >= x - 1e-12:
            return b
    return grid[-1]


def round_down(x, grid: Sequence):
    best = grid[0]
    for b in grid:
        if b <= x + 1e-12:
            best = b
    return best


def truthful_profile(game: GameTree) -> Profile:
    """Bid (or exit at) one's value; abstain/exit when below the reserve."""
    spec = spec_of(game)
    bids = spec.bids
    if spec.format in ("first_price", "second_price"):
        def fn(i, v, h):
            if v < spec.reserve:
                return ABSTAIN if spec.abstain else bids[0]
            return round_down(v, bids)
    elif spec.format == "english":
        def fn(i, v, h):
            return EXIT if clock_price(game, h) >= v else STAY
    else:
        raise ValueError("truthful play is defined for sealed-bid and English formats")
    return default_profile(fn, name="truthful")


def bid_function_profile(game: GameTree, bid: Callable) -> Profile:
    """No-leakage profile from a bid function value -> grid bid (or None to abstain).

    Dutch games accept at the first tick whose price is at or below the bid.
    """
    spec = spec_of(game)
    if spec.format in ("first_price", "second_price"):
        def fn(i, v, h):
            b = bid(v)
            return ABSTAIN if b is None else b
    elif spec.format == "dutch":
        def fn(i, v, h):
            b = bid(v)
            return ACCEPT if b is not None and clock_price(game, h) <= b else WAIT
    else:
        raise ValueError("bid functions apply to sealed-bid and Dutch formats")
    return default_profile(fn, name="bid function")


def first_price_profile(game: GameTree) -> Profile:
    """Uniform-prior equilibrium bid rounded up to the bid grid."""
    spec = spec_of(game)
    bids = spec.bids

    def bid(v):
        if v < spec.reserve:
            return None
        return round_up(uniform_first_price_bid(v, spec.n, spec.reserve), bids)

    prof = bid_function_profile(game, bid)
    prof.name = "first-price equilibrium"
    return prof


def default_auction_profile(game: GameTree) -> Profile:
    spec = spec_of(game)
    if spec.format in ("second_price", "english"):
        return truthful_profile(game)
    return first_price_profile(game)


# ---------------------------------------------------------------------------
# interim quantities, revenue and efficiency

def _project(ph: PrivateHistory, sig) -> PrivateHistory:
    return PrivateHistory(ph.public, tuple((j, a) for j, a in ph.leaked if j in sig))


def interim_tables(game: GameTree, profile: Profile, space, i: int, t_hat, t_i, ph: PrivateHistory,
                   beliefs: BeliefSystem | None = None, require_on_path: bool = True):
    """Q and M over every pretended value, for pretended leakage type ``t_hat``
    played with the information of ``t_i``."""
    beliefs = beliefs or BeliefSystem(game, profile, space)
    b = beliefs.at(i, t_i, ph)
    if require_on_path and b.source != "bayes":
        raise OffPathHistory(f"{ph} is off the path of play")
    sig_hat = space.signature(i, t_hat) if space is not None and t_hat is not None else frozenset()
    sig_i = space.signature(i, t_i) if space is not None and t_i is not None else frozenset()
    if not sig_hat <= sig_i:
        raise ValueError("the pretended type must observe a subset of the true type's information")
    own = game.values.grid(i)

    def plan(k, node):
        return profile.dist(i, own[k], t_hat, _project(node, sig_hat))

    out = []
    for pick in (lambda x: x.q[i], lambda x: x.m[i]):
        eng = _Engine(game, profile, space, i, t_i, plan=plan,
                      terminal=lambda x, theta, pick=pick: pick(x), want_best=False)
        eng.node(ph, b.dist)
        rec = eng.records[ph]
        out.append(rec.plan / rec.weight)
    return out[0], out[1]


def interim_qm(game, profile, space, i, value_hat, t_hat, t_i, ph, beliefs=None):
    Q, M = interim_tables(game, profile, space, i, t_hat, t_i, ph, beliefs)
    k = game.values.index(i, value_hat)
    return Q[k], M[k]


def expected_outcome(game, profile, theta, types=None, space=None) -> tuple:
    """Expected (q, m) vectors at a value profile."""
    n = game.n
    q = [0] * n
    m = [0] * n
    for z, p in outcome_distribution(game, profile, theta, types=types, space=space).items():
        x = game.outcome(z)
        for j in range(n):
            q[j] += p * x.q[j]
            m[j] += p * x.m[j]
    return tuple(q), tuple(m)


def revenue(game, profile, space=None, types=None):
    total = 0
    for theta, p in game.values.profiles():
        _, m = expected_outcome(game, profile, theta, types, space)
        total += p * sum(m)
    return total


def expected_revenue(game, profile, space, gamma: dict):
    return sum(w * revenue(game, profile, space, t) for t, w in gamma.items())


def is_efficient(q, theta, tol=0) -> bool:
    top = max(theta)
    got = sum(qi * v for qi, v in zip(q, theta))
    return close(got, top, tol)


def inefficiency(game, profile, space=None, types=None, tol=1e-12):
    """(probability of an inefficient allocation, list of inefficient profiles)."""
    prob = 0
    bad = []
    for theta, p in game.values.profiles():
        q, _ = expected_outcome(game, profile, theta, types, space)
        if not is_efficient(q, theta, tol if not game.exact else 0):
            prob += p
            bad.append(theta)
    return prob, bad


# ---------------------------------------------------------------------------
# virtual values and the optimal allocation

@dataclass(frozen=True)
class VirtualValueTable:
    values: tuple     # per bidder, tuple of virtual values by grid index

    def of(self, i: int, k: int):
        return self.values[i][k]

    def increasing(self) -> bool:
        return all(all(b > a for a, b in zip(row, row[1:])) for row in self.values)


def virtual_values(values: ValueTypeSpace) -> VirtualValueTable:
    rows = []
    for i in range(values.n):
        g, rho = values.grid(i), values.prior(i)
        row = []
        cum = 0
        for s, (v, p) in enumerate(zip(g, rho)):
            cum += p
            if s == len(g) - 1:
                row.append(v)
                continue
            if p == 0:
                raise ZeroPriorMass(f"bidder {i} has zero mass at {v}")
            row.append(v - (g[s + 1] - v) * (1 - cum) / p)
        rows.append(tuple(row))
    return VirtualValueTable(tuple(rows))


def myerson_allocation(values: ValueTypeSpace, theta, ltypes=None, table: VirtualValueTable | None = None) -> tuple:
    """Highest non-negative virtual value wins; ties split uniformly.

    ``ltypes`` is accepted and ignored: the rule never looks at leakage types.
    """
    table = table or virtual_values(values)
    vv = [table.of(i, values.index(i, v)) for i, v in enumerate(theta)]
    top = max(vv)
    n = len(theta)
    slack = 0 if values.exact else 1e-12
    if top < -slack:
        return (Fraction(0),) * n
    tied = [j for j in range(n) if abs(vv[j] - top) <= slack]
    return tuple(Fraction(1, len(tied)) if j in tied else Fraction(0) for j in range(n))


def optimal_reserve(values: ValueTypeSpace, bidder: int = 0):
    table = virtual_values(values)
    slack = 0 if values.exact else 1e-12
    for v, vv in zip(values.grid(bidder), table.values[bidder]):
        if vv >= -slack:
            return v
    raise AllNegative("every virtual value is negative")


def virtual_surplus(values: ValueTypeSpace):
    """Expected virtual surplus of the optimal allocation (revenue bound)."""
    table = virtual_values(values)
    total = 0
    for theta, p in values.profiles():
        q = myerson_allocation(values, theta, table=table)
        total += p * sum(qi * table.of(i, values.index(i, v)) for i, (qi, v) in enumerate(zip(q, theta)))
    return total


def pareto_values(n: int, step=0.01, low=0.5, high=10.0) -> ValueTypeSpace:
    """Grid for F(x) = 1 - (x + 1/2)^-2 on [low, high]; tail mass on the top point."""
    count = int(round((high - low) / step))
    grid = tuple(low + k * step for k in range(count + 1))
    cdf = pareto_cdf
    prior = [float(cdf(grid[k + 1]) - cdf(grid[k])) for k in range(count)] + [1 - float(cdf(grid[-1]))]
    total = sum(prior)
    prior = [p / total for p in prior]
    return ValueTypeSpace((grid,) * n, (tuple(prior),) * n)


def pareto_cdf(x):
    """F(x) = 1 - (x + 1/2)^-2 on [1/2, inf); accepts scalars or arrays."""
    x = np.asarray(x, dtype=float)
    out = np.where(x <= 0.5, 0.0, 1.0 - (np.maximum(x, 0.5) + 0.5) ** -2)
    return float(out) if out.ndim == 0 else out


def uniform_cdf(x):
    out = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def grid_between(low, high, step) -> tuple:
    """Equally spaced grid from low to high; exact when all three are rational."""
    count = int(round((high - low) / step))
    if is_exact(low) and is_exact(high) and is_exact(step):
        return tuple(Fraction(low) + k * Fraction(step) for k in range(count + 1))
    return tuple(round(float(low) + k * float(step), 12) for k in range(count + 1))


def uniform_grid(step) -> tuple:
    """Grid on [0, 1]."""
    return grid_between(Fraction(0) if is_exact(step) else 0.0, Fraction(1) if is_exact(step) else 1.0, step)


# ---------------------------------------------------------------------------
# paranoid bidders

def paranoid_best_bid(value, cdf: Callable, reserve=0.0, step=1e-3, refine: bool = True):
    """Maximiser of (value - b) F(b) over bids b >= reserve on a grid.

    With ``refine`` the search narrows around the grid maximiser down to
    about 1e-9; (value - b) F(b) is unimodal for the distributions used here.
    """
    value = float(value)
    lo, hi = float(reserve), value
    if hi <= lo:
        return lo
    h = step
    best = lo
    while True:
        count = max(1, int(math.floor((hi - lo) / h + 1e-9)))
        grid = np.linspace(lo, lo + count * h, count + 1)
        grid = grid[grid <= value + 1e-15]
        obj = (value - grid) * np.asarray(cdf(grid), dtype=float)
        k = int(np.argmax(obj))
        best = float(grid[k])
        if not refine or h <= 1e-9:
            return best
        lo = max(float(reserve), best - h)
        hi = min(value, best + h)
        h = h / 20


def paranoid_pareto_gap(theta):
    """Closed-form sign witness (4t^2 - 1)^3 / (2t + 3)^2 for the Pareto example."""
    return (4 * theta ** 2 - 1) ** 3 / (2 * theta + 3) ** 2


def pareto_no_leak_bid(theta):
    return (6 * theta + 1) / (4 * theta + 6)


def paranoid_revenue(values: ValueTypeSpace, reserve, cdf: Callable, step=1e-3) -> float:
    """First-price revenue when every bidder plays the paranoid best bid."""
    n = values.n
    grid = values.grid(0)
    prior = np.array([float(p) for p in values.prior(0)])
    bids = np.array([paranoid_best_bid(v, cdf, reserve, step) if v >= reserve else -1.0 for v in grid])
    order = np.argsort(bids, kind="stable")
    sb, sp = bids[order], prior[order]
    # P(max bid <= b) = G(b)^n over the sorted distinct bids
    total = 0.0
    uniq = np.unique(sb)
    for b in uniq:
        if b < 0:
            continue
        g_le = sp[sb <= b].sum()
        g_lt = sp[sb < b].sum()
        total += b * (g_le ** n - g_lt ** n)
    return total


def paranoid_reserve_search(values: ValueTypeSpace, cdf: Callable, reserves: Sequence, step=1e-3):
    """Revenue for every candidate reserve; returns (argmax reserve, max revenue, series)."""
    series = [(float(r), paranoid_revenue(values, r, cdf, step)) for r in reserves]
    r_best, rev = max(series, key=lambda t: t[1])
    return r_best, rev, series
