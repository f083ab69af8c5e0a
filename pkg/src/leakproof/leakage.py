"""Leakage orders, private histories and finite leakage-type spaces."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

from .numeric import all_exact


class InconsistentOrder(ValueError):
    pass


class TypeSpaceError(ValueError):
    pass


@dataclass(frozen=True)
class LeakageOrder:
    """Speed class per player; a higher rank is faster.

    Player j observes player i's concurrent actions iff rank[i] < rank[j].
    Ranks are normalised to 0..k so equal orders compare equal.
    """

    ranks: tuple

    def __post_init__(self):
        levels = sorted(set(self.ranks))
        dense = tuple(levels.index(r) for r in self.ranks)
        object.__setattr__(self, "ranks", dense)

    @classmethod
    def equal(cls, n: int) -> "LeakageOrder":
        return cls((0,) * n)

    @classmethod
    def fastest(cls, n: int, i: int) -> "LeakageOrder":
        return cls(tuple(1 if j == i else 0 for j in range(n)))

    @classmethod
    def from_signatures(cls, sigs: Sequence) -> "LeakageOrder | None":
        """Order in which player j observes exactly sigs[j], or None if impossible."""
        order = cls(tuple(len(s) for s in sigs))
        if all(order.observes(j) == frozenset(s) for j, s in enumerate(sigs)):
            return order
        return None

    @property
    def n(self) -> int:
        return len(self.ranks)

    def observes(self, i: int) -> frozenset:
        r = self.ranks[i]
        return frozenset(j for j, q in enumerate(self.ranks) if q < r)

    def classes(self) -> list:
        """Speed classes from slowest to fastest."""
        top = max(self.ranks) if self.ranks else -1
        return [tuple(j for j, r in enumerate(self.ranks) if r == k) for k in range(top + 1)]

    def __str__(self):
        return "<".join("~".join(str(j) for j in cls) for cls in self.classes())


def all_orders(n: int) -> list:
    """Every weak order on n players (ordered set partitions)."""
    seen = []
    for ranks in product(range(n), repeat=n):
        if set(ranks) == set(range(max(ranks) + 1)):
            seen.append(LeakageOrder(ranks))
    return seen


def consistent_orders(order: LeakageOrder, i: int) -> list:
    """Orders under which player i observes the same set of players."""
    target = order.observes(i)
    return [o for o in all_orders(order.n) if o.observes(i) == target]


@dataclass(frozen=True)
class PrivateHistory:
    """Public history plus leaked current-stage actions of slower movers."""

    public: tuple = ()
    leaked: tuple = ()   # sorted (player, action) pairs

    def __post_init__(self):
        object.__setattr__(self, "leaked", tuple(sorted(self.leaked, key=lambda kv: kv[0])))

    @classmethod
    def of(cls, public, leaked=None) -> "PrivateHistory":
        items = leaked.items() if isinstance(leaked, dict) else (leaked or ())
        return cls(tuple(public), tuple(items))

    def leaked_dict(self) -> dict:
        return dict(self.leaked)

    def __str__(self):
        pub = " ".join("(" + ",".join("-" if a is None else str(a) for a in vec) + ")" for vec in self.public)
        pub = pub or "root"
        if self.leaked:
            return pub + " || " + ",".join(f"{j}:{a}" for j, a in self.leaked)
        return pub


@dataclass(frozen=True)
class LeakageType:
    name: str
    player: int
    signature: frozenset
    belief: tuple   # ((profile of type names, probability), ...); profile[player] == name


class LeakageTypeSpace:
    """Finite leakage-type space with coherent beliefs.

    Every belief entry is a full type profile; the leakage order of that
    belief world is recovered from the signatures of the profile.
    """

    def __init__(self, n: int, types: Iterable[LeakageType], prior: dict | None = None,
                 name: str = "", true_profile: tuple | None = None):
        self.n = n
        self.name = name
        self.types = {}
        self.by_player = [[] for _ in range(n)]
        for t in types:
            key = (t.player, t.name)
            if key in self.types:
                raise TypeSpaceError(f"duplicate type {key}")
            self.types[key] = t
            self.by_player[t.player].append(t.name)
        self.prior = dict(prior) if prior else None
        self.true_profile = tuple(true_profile) if true_profile else None
        self._orders = {}
        self.validate()

    # -- access ---------------------------------------------------------
    def names(self, i: int) -> list:
        return list(self.by_player[i])

    def type(self, i: int, name: str) -> LeakageType:
        try:
            return self.types[(i, name)]
        except KeyError:
            raise TypeSpaceError(f"unknown type {name!r} for player {i}") from None

    def signature(self, i: int, name) -> frozenset:
        if name is None:
            return frozenset()
        return self.types[(i, name)].signature

    def order_for(self, profile) -> LeakageOrder | None:
        profile = tuple(profile)
        if profile not in self._orders:
            self._orders[profile] = LeakageOrder.from_signatures(
                [self.signature(j, t) for j, t in enumerate(profile)])
        return self._orders[profile]

    def belief(self, i: int, name: str) -> list:
        """[(profile, order, probability)] for type (i, name)."""
        return [(prof, self.order_for(prof), p) for prof, p in self.type(i, name).belief]

    def profiles(self) -> list:
        return [tuple(p) for p in product(*self.by_player)]

    def admissible(self) -> list:
        """(profile, order) pairs whose order matches every type's signature."""
        out = []
        for prof in self.profiles():
            order = self.order_for(prof)
            if order is not None:
                out.append((prof, order))
        return out

    @property
    def exact(self) -> bool:
        return all(all_exact([p for _, p in t.belief]) for t in self.types.values())

    # -- validation -----------------------------------------------------
    def validate(self):
        for i in range(self.n):
            if not self.by_player[i]:
                raise TypeSpaceError(f"player {i} has no leakage type")
        for (i, name), t in self.types.items():
            if not t.belief:
                raise TypeSpaceError(f"type {name!r} of player {i} has an empty belief")
            total = sum(p for _, p in t.belief)
            if all_exact([p for _, p in t.belief]):
                if total != 1:
                    raise TypeSpaceError(f"belief of {name!r} sums to {total}")
            elif abs(float(total) - 1) > 1e-12:
                raise TypeSpaceError(f"belief of {name!r} sums to {total}")
            for prof, p in t.belief:
                if len(prof) != self.n or prof[i] != name:
                    raise TypeSpaceError(f"belief of {name!r} must list a full profile containing itself")
                for j, tj in enumerate(prof):
                    if (j, tj) not in self.types:
                        raise TypeSpaceError(f"belief of {name!r} references unknown type {tj!r} of player {j}")
                order = self.order_for(prof)
                if order is None:
                    raise TypeSpaceError(f"belief of {name!r}: profile {prof} is not coherent with any order")
                if order.observes(i) != t.signature:
                    raise TypeSpaceError(f"belief of {name!r}: order {order} contradicts its signature")
        if self.prior is not None:
            for prof in self.prior:
                if self.order_for(prof) is None:
                    raise TypeSpaceError(f"prior puts mass on inadmissible profile {prof}")

    def zero_types(self) -> set:
        """Types with common knowledge that everyone is equally fast."""
        eq = LeakageOrder.equal(self.n)
        z = {key for key, t in self.types.items()
             if all(self.order_for(prof) == eq for prof, _ in t.belief)}
        changed = True
        while changed:
            changed = False
            for key in list(z):
                t = self.types[key]
                if any((j, tj) not in z for prof, _ in t.belief for j, tj in enumerate(prof)):
                    z.discard(key)
                    changed = True
        return z

    def one_types(self, i: int) -> list:
        """Types of i certain to be uniquely fastest among zero-type opponents."""
        if self.n == 1:
            return []
        z = self.zero_types()
        target = LeakageOrder.fastest(self.n, i)
        out = []
        for name in self.by_player[i]:
            t = self.types[(i, name)]
            if all(self.order_for(prof) == target and
                   all((j, tj) in z for j, tj in enumerate(prof) if j != i) for prof, _ in t.belief):
                out.append(name)
        return out

    def is_minimally_rich(self) -> bool:
        z = self.zero_types()
        if any(not any((i, nm) in z for nm in self.by_player[i]) for i in range(self.n)):
            return False
        return all(self.one_types(i) for i in range(self.n)) if self.n > 1 else True

    def zero_profile(self) -> tuple:
        z = self.zero_types()
        return tuple(next(nm for nm in self.by_player[i] if (i, nm) in z) for i in range(self.n))

    def __repr__(self):
        return f"LeakageTypeSpace({self.name or 'unnamed'}, types={sum(map(len, self.by_player))})"


def _point(profile) -> tuple:
    return ((tuple(profile), Fraction(1)),)


def minimal_type_space(n: int) -> LeakageTypeSpace:
    """Zero-profile plus every one-profile."""
    types = []
    zero = ("t0",) * n
    for i in range(n):
        sig = frozenset()
        types.append(LeakageType("t0", i, sig, _point(zero)))
        if n > 1:
            prof = tuple("t1" if j == i else "t0" for j in range(n))
            types.append(LeakageType("t1", i, LeakageOrder.fastest(n, i).observes(i), _point(prof)))
    return LeakageTypeSpace(n, types, name="minimal", true_profile=zero)


def common_knowledge_space(order: LeakageOrder, name: str | None = None) -> LeakageTypeSpace:
    """Single type per player; the order is common knowledge."""
    prof = ("ck",) * order.n
    types = [LeakageType("ck", i, order.observes(i), _point(prof)) for i in range(order.n)]
    return LeakageTypeSpace(order.n, types, name=name or f"ck[{order}]", true_profile=prof)


def nested_type_space(order: LeakageOrder, per_class_orders: Sequence[LeakageOrder]) -> LeakageTypeSpace:
    """Layered beliefs: members of speed class m believe order per_class_orders[m]
    is common knowledge among classes m and faster, and know the true types
    of every slower class."""
    classes = order.classes()
    if len(per_class_orders) != len(classes):
        raise InconsistentOrder("need one believed order per speed class")
    if per_class_orders[-1] != order:
        raise InconsistentOrder("the fastest class must hold the true order")
    cls_of = {j: m for m, members in enumerate(classes) for j in members}
    for m, members in enumerate(classes):
        for j in members:
            if per_class_orders[m].observes(j) != order.observes(j):
                raise InconsistentOrder(f"order {per_class_orders[m]} is not consistent for player {j}")
    types = []
    for m, believed in enumerate(per_class_orders):
        label = f"b{m}"
        prof = tuple(f"b{cls_of[k]}" if cls_of[k] < m else label for k in range(order.n))
        for j in range(order.n):
            if cls_of[j] >= m:
                types.append(LeakageType(label, j, believed.observes(j), _point(prof)))
    true_prof = tuple(f"b{cls_of[j]}" for j in range(order.n))
    try:
        space = LeakageTypeSpace(order.n, types, name=f"nested[{order}]", true_profile=true_prof)
    except TypeSpaceError as exc:
        raise InconsistentOrder(str(exc)) from None
    if space.order_for(true_prof) != order:
        raise InconsistentOrder("true profile does not reproduce the true order")
    return space


def private_histories(game, observed: LeakageOrder | frozenset, i: int, opponents=None, space=None):
    """All private histories of player i given who i observes.

    ``observed`` is either an order (i observes its strictly slower players) or
    the observation set itself.  With ``opponents`` the result is a list of
    (history, on_path) pairs, where on_path means some opponent value profile
    reaches it with positive probability.
    """
    if isinstance(observed, LeakageOrder):
        order = observed
        sig = order.observes(i)
    else:
        order = None
        sig = frozenset(observed)
    out = []
    for h in game.nonterminal():
        st = game.stage(h)
        if i not in st.movers:
            continue
        slower = [j for j in st.movers if j in sig]
        for combo in product(*(st.actions_of(j) for j in slower)):
            out.append(PrivateHistory(h, tuple(zip(slower, combo))))
    if opponents is None:
        return out
    from .solver import reach_factors
    if order is None:
        order = LeakageOrder(tuple(0 if j in sig else 1 for j in range(game.n)))
    result = []
    for ph in out:
        factors = reach_factors(game, opponents, i, ph, order, types=(None,) * game.n)
        result.append((ph, all(any(p > 0 for p in f) for j, f in factors.items())))
    return result
