"""Finite multistage games with observed actions and simultaneous moves.

A history is a tuple of stage action-vectors.  Each vector has one slot per
player and holds ``None`` for players who do not move at that stage.  Games
are immutable once built and may be shared freely.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Iterator, Mapping, Sequence

from .numeric import all_exact, is_exact

ROOT: tuple = ()


class StructureError(ValueError):
    pass


class DanglingHistory(StructureError):
    pass


class MissingOutcome(StructureError):
    pass


class UnknownHistory(KeyError):
    pass


class EmptyPrune(ValueError):
    pass


@dataclass(frozen=True)
class PlayerSet:
    n: int
    names: tuple = ()

    def __post_init__(self):
        if self.n < 1:
            raise StructureError("need at least one player")
        if self.names and len(self.names) != self.n:
            raise StructureError("one name per player")

    @property
    def ids(self) -> range:
        return range(self.n)

    def name(self, i: int) -> str:
        return str(self.names[i]) if self.names else str(i)


@dataclass(frozen=True)
class ValueTypeSpace:
    """Per-player ordered value grids with independent priors."""

    grids: tuple
    priors: tuple

    def __post_init__(self):
        grids = tuple(tuple(g) for g in self.grids)
        priors = tuple(tuple(p) for p in self.priors)
        object.__setattr__(self, "grids", grids)
        object.__setattr__(self, "priors", priors)
        if not grids or len(grids) != len(priors):
            raise StructureError("one grid and one prior per player")
        for i, (g, p) in enumerate(zip(grids, priors)):
            if not g or len(g) != len(p):
                raise StructureError(f"player {i}: grid and prior lengths differ")
            if len(set(g)) != len(g):
                raise StructureError(f"player {i}: repeated value")
            if any(x < 0 for x in p):
                raise StructureError(f"player {i}: negative prior mass")
            total = sum(p)
            if all_exact(p):
                if total != 1:
                    raise StructureError(f"player {i}: prior sums to {total}")
            elif abs(float(total) - 1.0) > 1e-12:
                raise StructureError(f"player {i}: prior sums to {total}")
            if all(isinstance(v, (int, float, Fraction)) for v in g):
                if any(b <= a for a, b in zip(g, g[1:])):
                    raise StructureError(f"player {i}: numeric grid must increase")

    @classmethod
    def uniform(cls, grid: Sequence, n: int) -> "ValueTypeSpace":
        grid = tuple(grid)
        mass = Fraction(1, len(grid)) if all_exact(grid) else 1.0 / len(grid)
        return cls((grid,) * n, ((mass,) * len(grid),) * n)

    @property
    def n(self) -> int:
        return len(self.grids)

    @property
    def exact(self) -> bool:
        return all(all_exact(p) for p in self.priors)

    def grid(self, i: int) -> tuple:
        return self.grids[i]

    def prior(self, i: int) -> tuple:
        return self.priors[i]

    def index(self, i: int, value) -> int:
        return self.grids[i].index(value)

    def prob(self, i: int, value):
        return self.priors[i][self.index(i, value)]

    def profiles(self) -> Iterator[tuple]:
        """All full value profiles with their prior probability."""
        for combo in product(*(list(zip(g, p)) for g, p in zip(self.grids, self.priors))):
            prob = 1
            for _, q in combo:
                prob = prob * q
            yield tuple(v for v, _ in combo), prob

    def spacing(self, i: int):
        g = self.grids[i]
        if len(g) < 2:
            raise StructureError(f"player {i}: spacing needs two or more values")
        steps = [b - a for a, b in zip(g, g[1:])]
        first = steps[0]
        for s in steps[1:]:
            if (is_exact(s) and is_exact(first) and s != first) or abs(float(s) - float(first)) > 1e-9:
                raise StructureError(f"player {i}: grid is not equally spaced")
        return first


class UtilityTable:
    """Explicit utilities u(x, theta) -> tuple over players."""

    private_values = False

    def __init__(self, table: Mapping):
        self.table = {x: {tuple(th): tuple(u) for th, u in cells.items()} for x, cells in table.items()}
        self.exact = all(all_exact(u) for cells in self.table.values() for u in cells.values())

    def outcomes(self):
        return tuple(self.table)

    def __call__(self, x, theta) -> tuple:
        try:
            return self.table[x][tuple(theta)]
        except KeyError:
            raise MissingOutcome(f"no utility for outcome {x!r} at {theta!r}") from None

    def vector(self, i, x, theta, own_values):
        out = []
        for v in own_values:
            th = list(theta)
            th[i] = v
            out.append(self(x, tuple(th))[i])
        return out

    def check(self, x, values: ValueTypeSpace):
        for theta, _ in values.profiles():
            u = self(x, theta)
            if len(u) != values.n:
                raise StructureError(f"utility for {x!r} has wrong length")


@dataclass(frozen=True)
class Stage:
    movers: tuple
    actions: tuple   # aligned with movers

    def actions_of(self, i: int) -> tuple:
        return self.actions[self.movers.index(i)]

    def moves(self, i: int) -> bool:
        return i in self.movers

    def vectors(self, n: int) -> list:
        out = []
        for combo in product(*self.actions):
            vec = [None] * n
            for j, a in zip(self.movers, combo):
                vec[j] = a
            out.append(tuple(vec))
        return out

    def valid(self, vec, n: int) -> bool:
        if len(vec) != n:
            return False
        for j in range(n):
            if j in self.movers:
                if vec[j] not in self.actions_of(j):
                    return False
            elif vec[j] is not None:
                return False
        return True


class GameTree:
    """Validated game: stages at nonterminal histories, outcomes at terminals."""

    def __init__(self, n: int, values: ValueTypeSpace, utility, stages: Mapping, outcomes: Mapping,
                 origin: Mapping | None = None, meta: dict | None = None):
        self.n = n
        self.values = values
        self.utility = utility
        self.stages = dict(stages)
        self.outcomes = dict(outcomes)
        self.origin = dict(origin) if origin else None
        self.meta = dict(meta or {})
        self._validate()
        self.exact = values.exact and getattr(utility, "exact", False)

    # -- validation -----------------------------------------------------
    def _validate(self):
        if self.values.n != self.n:
            raise StructureError("value space and player count disagree")
        if ROOT not in self.stages and ROOT not in self.outcomes:
            raise DanglingHistory("root history missing")
        overlap = set(self.stages) & set(self.outcomes)
        if overlap:
            raise StructureError(f"histories both terminal and nonterminal: {sorted(overlap, key=len)[:1]}")
        for h, st in self.stages.items():
            if not st.movers:
                raise StructureError(f"stage at {h!r} has no movers")
            if len(set(st.movers)) != len(st.movers) or any(not 0 <= j < self.n for j in st.movers):
                raise StructureError(f"bad mover set at {h!r}")
            if list(st.movers) != sorted(st.movers):
                raise StructureError(f"movers must be sorted at {h!r}")
            for j, acts in zip(st.movers, st.actions):
                if len(acts) < 2:
                    raise StructureError(f"player {j} has fewer than two actions at {h!r}")
                if len(set(acts)) != len(acts):
                    raise StructureError(f"player {j} has repeated actions at {h!r}")
        for h in list(self.stages) + list(self.outcomes):
            if h == ROOT:
                continue
            parent = h[:-1]
            if parent not in self.stages:
                raise DanglingHistory(f"prefix of {h!r} is not a nonterminal history")
            if not self.stages[parent].valid(h[-1], self.n):
                raise StructureError(f"{h!r} is not a product child of its parent")
        for h, st in self.stages.items():
            for vec in st.vectors(self.n):
                child = h + (vec,)
                if child not in self.stages and child not in self.outcomes:
                    raise MissingOutcome(f"terminal {child!r} has no outcome")
        check = getattr(self.utility, "check", None)
        if check is not None:
            for x in set(self.outcomes.values()):
                check(x, self.values)

    # -- queries --------------------------------------------------------
    def is_terminal(self, h) -> bool:
        if h in self.outcomes:
            return True
        if h in self.stages:
            return False
        raise UnknownHistory(h)

    def stage(self, h) -> Stage:
        try:
            return self.stages[h]
        except KeyError:
            raise UnknownHistory(h) from None

    def outcome(self, h):
        try:
            return self.outcomes[h]
        except KeyError:
            raise UnknownHistory(h) from None

    def origin_of(self, h):
        return self.origin[h] if self.origin is not None else h

    def histories(self) -> list:
        """All histories in depth-first order (root first, children in action order)."""
        out = []
        stack = [ROOT]
        while stack:
            h = stack.pop()
            out.append(h)
            if h in self.stages:
                kids = [h + (v,) for v in self.stages[h].vectors(self.n)]
                stack.extend(reversed(kids))
        return out

    def nonterminal(self) -> list:
        return [h for h in self.histories() if h in self.stages]

    def terminals(self) -> list:
        return [h for h in self.histories() if h in self.outcomes]

    def utilities(self, z, theta) -> tuple:
        return self.utility(self.outcomes[z], theta)

    def signature(self):
        """Structural fingerprint used for equality checks between trees."""
        stages = tuple(sorted(((h, st.movers, st.actions) for h, st in self.stages.items()), key=repr))
        outs = tuple(sorted(self.outcomes.items(), key=repr))
        return stages, outs

    def __len__(self):
        return len(self.stages) + len(self.outcomes)


def successors(game: GameTree, h) -> list:
    if game.is_terminal(h):
        return []
    return [h + (v,) for v in game.stage(h).vectors(game.n)]


@dataclass
class SocialChoiceFunction:
    table: dict = field(default_factory=dict)

    def __call__(self, theta):
        return self.table[tuple(theta)]

    @classmethod
    def from_function(cls, values: ValueTypeSpace, fn: Callable) -> "SocialChoiceFunction":
        return cls({theta: fn(theta) for theta, _ in values.profiles()})

    def check_total(self, values: ValueTypeSpace):
        for theta, _ in values.profiles():
            if theta not in self.table:
                raise StructureError(f"social choice function undefined at {theta!r}")


def build_game(players: PlayerSet | int, values: ValueTypeSpace, utility, tree: Mapping,
               meta: dict | None = None) -> GameTree:
    """Build a game from a nested description.

    A leaf is ``{"outcome": x}``.  An inner node is ``{"movers": {i: [actions]},
    "children": {key: subtree}}`` where ``key`` lists the movers' actions in
    increasing player order (a bare action is accepted for a single mover).
    """
    n = players.n if isinstance(players, PlayerSet) else int(players)
    stages, outcomes = {}, {}

    def walk(h, node):
        if "outcome" in node:
            if "movers" in node:
                raise StructureError(f"node {h!r} is both a leaf and a stage")
            outcomes[h] = node["outcome"]
            return
        if "movers" not in node:
            raise MissingOutcome(f"leaf {h!r} has no outcome")
        movers = tuple(sorted(int(j) for j in node["movers"]))
        acts = tuple(tuple(node["movers"][j] if j in node["movers"] else node["movers"][str(j)])
                     for j in movers)
        st = Stage(movers, acts)
        stages[h] = st
        children = dict(node.get("children", {}))
        seen = set()
        for combo in product(*acts):
            key = combo if len(combo) > 1 else combo[0]
            if key in children:
                sub = children[key]
            elif combo in children:
                key = combo
                sub = children[combo]
            else:
                raise MissingOutcome(f"no child for {combo!r} at {h!r}")
            seen.add(key)
            vec = [None] * n
            for j, a in zip(movers, combo):
                vec[j] = a
            walk(h + (tuple(vec),), sub)
        extra = set(children) - seen
        if extra:
            raise StructureError(f"children outside the action product at {h!r}: {sorted(map(repr, extra))[:3]}")

    walk(ROOT, tree)
    return GameTree(n, values, utility, stages, outcomes, meta=meta)


def prune(game: GameTree, s0) -> GameTree:
    """Keep only histories reachable under ``s0`` for some value profile.

    ``s0`` is a no-leakage profile keyed on the histories of the original
    (unpruned) game, or on ``game`` itself when it was re-keyed with
    ``restrict_profile``; pruned games carry an origin map so pruning twice works.
    Movers left with a single action are dropped from their stage, and stages
    with no movers left are spliced out.
    """
    from .leakage import PrivateHistory

    stages, outcomes, origin = {}, {}, {}
    grids = game.values.grids
    own_keys = getattr(s0, "keyed_on", None) is game

    def support(j, k, h):
        dist = s0.dist(j, grids[j][k], None, PrivateHistory(h if own_keys else game.origin_of(h)))
        return {a for a, p in dist.items() if p > 0}

    def walk(h_old, h_new, alive):
        if game.is_terminal(h_old):
            outcomes[h_new] = game.outcome(h_old)
            origin[h_new] = game.origin_of(h_old)
            return
        st = game.stage(h_old)
        surviving = []
        for j, acts in zip(st.movers, st.actions):
            supp = {k: support(j, k, h_old) for k in alive[j]}
            kept = []
            for a in acts:
                keep = frozenset(k for k in alive[j] if a in supp[k])
                if keep:
                    kept.append((a, keep))
            if not kept:
                raise EmptyPrune(f"player {j} has no supported action at {h_old!r}")
            surviving.append(kept)
        movers = tuple(j for j, kept in zip(st.movers, surviving) if len(kept) >= 2)
        if movers:
            stages[h_new] = Stage(movers, tuple(tuple(a for a, _ in kept)
                                                for kept in surviving if len(kept) >= 2))
            origin[h_new] = game.origin_of(h_old)
        for combo in product(*surviving):
            vec_old = [None] * game.n
            vec_new = [None] * game.n
            nxt = list(alive)
            for j, (a, keep) in zip(st.movers, combo):
                vec_old[j] = a
                nxt[j] = keep
                if j in movers:
                    vec_new[j] = a
            child_new = h_new + (tuple(vec_new),) if movers else h_new
            walk(h_old + (tuple(vec_old),), child_new, nxt)

    walk(ROOT, ROOT, [frozenset(range(len(g))) for g in grids])
    if not stages and not outcomes:
        raise EmptyPrune("nothing survived")
    return GameTree(game.n, game.values, game.utility, stages, outcomes, origin=origin, meta=game.meta)


def is_pruned(game: GameTree, s0) -> bool:
    return same_tree(prune(game, s0), game)


def same_tree(a: GameTree, b: GameTree) -> bool:
    return a.signature() == b.signature()
