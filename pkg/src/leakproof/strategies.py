"""Behaviour strategy profiles.

A profile answers ``dist(player, value, leakage_type, private_history)`` with a
mapping action -> probability.  No-leakage profiles ignore the leakage type
and the leaked part of the history.
"""
from __future__ import annotations

from typing import Callable, Mapping

from .leakage import PrivateHistory
from .numeric import all_exact


class UndefinedPlan(KeyError):
    pass


def _as_dist(result) -> dict:
    if isinstance(result, Mapping):
        return {a: p for a, p in result.items() if p != 0}
    return {result: 1}


class Profile:
    """Memoised behaviour profile backed by a function.

    ``fn(i, value, ltype, ph)`` for leaky profiles, ``fn(i, value, h)`` for
    no-leakage ones (``leak_free=True``).
    """

    def __init__(self, fn: Callable, leak_free: bool = False, name: str = ""):
        self._fn = fn
        self.leak_free = leak_free
        self.name = name
        self.keyed_on = None    # set when the histories belong to a pruned game
        self._memo = {}

    def dist(self, i: int, value, ltype, ph: PrivateHistory) -> dict:
        if self.leak_free:
            key = (i, value, ph.public)
        else:
            key = (i, value, ltype, ph)
        try:
            return self._memo[key]
        except KeyError:
            pass
        try:
            if self.leak_free:
                d = _as_dist(self._fn(i, value, ph.public))
            else:
                d = _as_dist(self._fn(i, value, ltype, ph))
        except (KeyError, IndexError) as exc:
            raise UndefinedPlan(f"{self.name or 'profile'}: no plan for player {i}, value {value!r}, "
                                f"type {ltype!r} at {ph}") from exc
        self._memo[key] = d
        return d

    def __repr__(self):
        return f"Profile({self.name or 'anonymous'}, leak_free={self.leak_free})"


def default_profile(fn: Callable, name: str = "") -> Profile:
    """No-leakage profile from ``fn(i, value, public_history)``."""
    return Profile(fn, leak_free=True, name=name)


def leaky_profile(fn: Callable, name: str = "") -> Profile:
    """Profile from ``fn(i, value, ltype, private_history)``."""
    return Profile(fn, leak_free=False, name=name)


def table_profile(table: Mapping, leak_free: bool = True, name: str = "") -> Profile:
    """Profile from an explicit table.

    Keys are ``(i, value, public_history)`` when ``leak_free`` and
    ``(i, value, ltype, PrivateHistory)`` otherwise.
    """
    table = dict(table)
    if leak_free:
        return Profile(lambda i, v, h: table[(i, v, h)], leak_free=True, name=name)
    return Profile(lambda i, v, t, ph: table[(i, v, t, ph)], leak_free=False, name=name)


class TypedProfile(Profile):
    """Routes each (player, leakage type) to its own profile."""

    def __init__(self, parts: Mapping, fallback: Profile | None = None, name: str = ""):
        self.parts = dict(parts)
        self.fallback = fallback
        super().__init__(self._route, leak_free=False, name=name)

    def _route(self, i, value, ltype, ph):
        prof = self.parts.get((i, ltype), self.fallback)
        if prof is None:
            raise KeyError((i, ltype))
        return prof.dist(i, value, ltype, ph)


def restrict_profile(s0: Profile, game) -> Profile:
    """Re-key a no-leakage profile of an original game onto a pruned game.

    Actions removed by pruning are dropped and the rest renormalised; a value
    type whose whole support was removed (it never reaches this history)
    plays the first surviving action.
    """
    def fn(i, value, h):
        st = game.stage(h)
        acts = st.actions_of(i)
        d = s0.dist(i, value, None, PrivateHistory(game.origin_of(h)))
        kept = {a: p for a, p in d.items() if a in acts}
        total = sum(kept.values())
        if not kept or total == 0:
            return acts[0]
        if total == 1:
            return kept
        return {a: p / total for a, p in kept.items()}

    prof = default_profile(fn, name=f"{s0.name or 'default'}|pruned")
    prof.keyed_on = game
    return prof


def check_profile(game, profile: Profile, space=None, tol: float = 1e-12):
    """Raise ValueError unless every distribution is valid on every private history."""
    from .leakage import private_histories

    for i in range(game.n):
        ltypes = space.names(i) if space is not None else [None]
        for t in ltypes:
            sig = space.signature(i, t) if space is not None else frozenset()
            for ph in private_histories(game, sig, i):
                acts = game.stage(ph.public).actions_of(i)
                for v in game.values.grid(i):
                    d = profile.dist(i, v, t, ph)
                    if any(a not in acts for a in d):
                        raise ValueError(f"player {i} plays an unavailable action at {ph}")
                    probs = list(d.values())
                    if any(p < 0 for p in probs):
                        raise ValueError(f"negative probability at {ph}")
                    total = sum(probs)
                    if all_exact(probs):
                        if total != 1:
                            raise ValueError(f"distribution sums to {total} at {ph}")
                    elif abs(float(total) - 1) > tol:
                        raise ValueError(f"distribution sums to {total} at {ph}")


def is_pure(game, profile: Profile, space=None) -> bool:
    from .leakage import private_histories

    for i in range(game.n):
        for t in (space.names(i) if space is not None else [None]):
            sig = space.signature(i, t) if space is not None else frozenset()
            for ph in private_histories(game, sig, i):
                for v in game.values.grid(i):
                    if len(profile.dist(i, v, t, ph)) > 1:
                        return False
    return True
