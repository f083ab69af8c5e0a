"""Mechanism-level property checks.

Every check returns a ``PropertyReport``.  Claims quantified over all type
spaces are checked on a finite family of spaces supplied by the caller; the
minimal space should always be part of it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Iterable, Mapping, Sequence

from .game import GameTree, SocialChoiceFunction, is_pruned
from .leakage import LeakageTypeSpace, PrivateHistory
from .numeric import close, within
from .solver import (BeliefSystem, ExtendedProfile, _Engine, _plan_from_profile, best_response,
                     best_response_extension, continuation_value, outcome_distribution,
                     verify_equilibrium)
from .strategies import Profile, is_pure


class NotPruned(ValueError):
    pass


class PrereqFailed(ValueError):
    pass


@dataclass
class PropertyReport:
    name: str
    passed: bool
    witness: dict | None = None
    sub: list = field(default_factory=list)      # [(label, passed, detail)]
    margins: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def to_doc(self) -> dict:
        return {"property": self.name, "verdict": self.verdict, "witness": self.witness,
                "sub": [{"label": l, "verdict": "PASS" if ok else "FAIL", "detail": d} for l, ok, d in self.sub],
                "margins": self.margins, "notes": self.notes}


def _cell_witness(cell) -> dict:
    return {"player": cell.player, "ltype": cell.ltype, "value": cell.value, "history": cell.history,
            "deviation": cell.deviation, "prescribed": cell.prescribed, "best": cell.best, "gain": cell.gain}


def _space_label(space) -> str:
    return space.name if space is not None and space.name else "no-leakage"


def _type_profiles(space, n):
    if space is None:
        return [(None,) * n]
    return [prof for prof, _ in space.admissible()]


# ---------------------------------------------------------------------------
# leakage-proofness

def is_leakage_proof(game: GameTree, s0: Profile, family: Sequence[LeakageTypeSpace], epsilon=0,
                     require_pruned: bool = True) -> PropertyReport:
    """Extend ``s0`` off path with best responses and check that following
    ``s0`` stays an epsilon-best response at every on-path private history."""
    if require_pruned and not is_pruned(game, s0):
        raise NotPruned("game is not pruned against the default profile")
    rep = PropertyReport("leakage-proof", True)
    worst = None
    for space in family:
        ext = ExtendedProfile(game, s0, space)
        res = verify_equilibrium(game, ext, space, epsilon, on_path=ext.on_path)
        cells = [c for c in res.cells if c.on_path]
        bad = [c for c in cells if not c.ok]
        gain = max((c.gain for c in cells), default=0)
        rep.sub.append((_space_label(space), not bad, {"max_gain": gain, "cells": len(cells)}))
        if bad:
            rep.passed = False
            top = max(bad, key=lambda c: c.gain)
            if worst is None or top.gain > worst[1].gain:
                worst = (space, top)
    rep.margins["epsilon"] = epsilon
    if worst is not None:
        rep.witness = dict(_cell_witness(worst[1]), space=_space_label(worst[0]))
        rep.margins["max_gain"] = worst[1].gain
    rep.notes.append("checked on the supplied finite family of type spaces only")
    return rep


def replay_witness(game: GameTree, s0: Profile, space: LeakageTypeSpace, witness: dict):
    """Recompute (prescribed, deviation) values of a witness by forward enumeration."""
    ext = ExtendedProfile(game, s0, space)
    beliefs = BeliefSystem(game, ext, space)
    i, t, v, ph = witness["player"], witness["ltype"], witness["value"], witness["history"]
    belief = beliefs.at(i, t, ph).dist
    plan, _ = best_response(game, i, v, t, ext, belief, ph, space)
    own = game.values.grid(i)
    follow = _plan_from_profile(ext, i, own, t)
    k = game.values.index(i, v)
    pres = continuation_value(game, ext, space, i, v, t, ph, belief, lambda q: follow(k, q))
    dev = continuation_value(game, ext, space, i, v, t, ph, belief, lambda q: {plan[q]: 1})
    return pres, dev


# ---------------------------------------------------------------------------
# implementation

def induced_outcomes(game: GameTree, profile: Profile, theta, types, space) -> dict:
    """Distribution over outcome labels at (theta, types)."""
    out = {}
    for z, p in outcome_distribution(game, profile, theta, types=types, space=space).items():
        x = game.outcome(z)
        out[x] = out.get(x, 0) + p
    return out


def _implements_with(game, profile, f: SocialChoiceFunction, space):
    """None if profile always yields f(theta), else a witness dict."""
    for types in _type_profiles(space, game.n):
        for theta, _ in game.values.profiles():
            got = induced_outcomes(game, profile, theta, types, space)
            want = f(theta)
            if set(got) != {want}:
                return {"theta": theta, "types": types, "expected": want, "got": got}
    return None


def implements(game: GameTree, f: SocialChoiceFunction, family: Sequence[LeakageTypeSpace], epsilon=0,
               s0: Profile | None = None, candidates: Mapping | None = None) -> PropertyReport:
    """Search, per space, for an epsilon-PBE whose outcome is f(theta) for every (theta, t).

    Candidates: the extension of ``s0`` first, then ``candidates[space.name]``.
    """
    f.check_total(game.values)
    rep = PropertyReport("implements", True)
    candidates = dict(candidates or {})
    for space in family:
        tried = []
        if s0 is not None:
            tried.append(("extended default", ExtendedProfile(game, s0, space) if space is not None else s0))
        for k, prof in enumerate(candidates.get(_space_label(space), [])):
            tried.append((getattr(prof, "name", "") or f"candidate {k}", prof))
        found, why = None, []
        for label, prof in tried:
            res = verify_equilibrium(game, prof, space, epsilon)
            if not res.passed:
                why.append({"candidate": label, "reason": "not an equilibrium", "max_gain": res.max_gain})
                continue
            miss = _implements_with(game, prof, f, space)
            if miss is not None:
                why.append({"candidate": label, "reason": "wrong outcome", **miss})
                continue
            found = label
            break
        ok = found is not None
        rep.sub.append((_space_label(space), ok, {"equilibrium": found} if ok else {"attempts": why}))
        if not ok:
            rep.passed = False
            if rep.witness is None:
                rep.witness = {"space": _space_label(space), "attempts": why}
                if space is not None and s0 is not None:
                    br = best_response_extension(game, s0, space)
                    rep.witness["best_response_outcomes"] = {
                        (theta, types): induced_outcomes(game, br, theta, types, space)
                        for types in _type_profiles(space, game.n)
                        for theta, _ in game.values.profiles()}
    return rep


def theorem1_crosscheck(game: GameTree, f: SocialChoiceFunction, family, s0: Profile, epsilon=0,
                        candidates=None) -> PropertyReport:
    """Compare 'implements f' with 'has a leakage-proof equilibrium implementing f'."""
    impl = implements(game, f, family, epsilon, s0=s0, candidates=candidates)
    pruned = is_pruned(game, s0)
    lp = is_leakage_proof(game, s0, family, epsilon, require_pruned=False)
    zero_ok = _implements_with(game, s0, f, None) is None
    right = pruned and lp.passed and zero_ok
    rich = any(space is not None and space.is_minimally_rich() for space in family)
    rep = PropertyReport("theorem1-crosscheck", impl.passed == right)
    rep.margins.update(implements=impl.passed, leakage_proof_implementing=right, pruned=pruned,
                       minimally_rich=rich)
    rep.sub += [("implements", impl.passed, impl.witness), ("leakage-proof", lp.passed, lp.witness)]
    if impl.passed != right:
        if not (pruned and rich):
            rep.passed = True
            rep.notes.append("assumption violation: family not minimally rich or game not pruned; "
                             "mismatch is expected and is not a counterexample")
        else:
            rep.witness = {"implements": impl.witness, "leakage_proof": lp.witness}
            rep.notes.append("counterexample candidate")
    return rep


# ---------------------------------------------------------------------------
# auction properties

def _expected_qm(game, profile, theta, types, space):
    n = game.n
    q, m = [0] * n, [0] * n
    for z, p in outcome_distribution(game, profile, theta, types=types, space=space).items():
        x = game.outcome(z)
        for j in range(n):
            q[j] += p * x.q[j]
            m[j] += p * x.m[j]
    return tuple(q), tuple(m)


def _inefficient(game, profile, space, types):
    tol = 0 if game.exact else 1e-9
    for theta, _ in game.values.profiles():
        q, _ = _expected_qm(game, profile, theta, types, space)
        if not close(sum(a * b for a, b in zip(q, theta)), max(theta), tol):
            return {"theta": theta, "types": types, "q": q}
    return None


def is_efficient_under_leakage(game: GameTree, family, s0: Profile, epsilon=None,
                               candidates: Mapping | None = None, certificate: bool = True) -> PropertyReport:
    """Find, per space, an epsilon-PBE that always allocates to a highest-value bidder."""
    if epsilon is None:
        epsilon = game.meta.get("epsilon", 0)
    rep = PropertyReport("efficient-under-leakage", True)
    candidates = dict(candidates or {})
    for space in family:
        tried = [("extended default", ExtendedProfile(game, s0, space) if space is not None else s0)]
        tried += [(getattr(p, "name", "") or f"candidate {k}", p)
                  for k, p in enumerate(candidates.get(_space_label(space), []))]
        found, witness = None, None
        for label, prof in tried:
            if not verify_equilibrium(game, prof, space, epsilon).passed:
                continue
            bad = None
            for types in _type_profiles(space, game.n):
                bad = _inefficient(game, prof, space, types)
                if bad:
                    break
            if bad is None:
                found = label
                break
            witness = witness or dict(bad, candidate=label)
        rep.sub.append((_space_label(space), found is not None, {"equilibrium": found}))
        if found is None:
            rep.passed = False
            rep.witness = rep.witness or dict(witness or {"reason": "no verified equilibrium"},
                                              space=_space_label(space))
    if certificate:
        spaces = [s for s in family if s is not None]
        lp = is_leakage_proof(game, s0, spaces, epsilon, require_pruned=False) if spaces else None
        eff = _inefficient(game, s0, None, None) is None
        cert = lp is not None and lp.passed and eff
        rep.margins["leakage_proof_certificate"] = cert
        rep.sub.append(("leakage-proof efficient default", cert, {"epsilon": epsilon}))
    return rep


def allocation_invariance(game: GameTree, profiles: Iterable, tol=None) -> PropertyReport:
    """``profiles``: (space, profile) pairs.  PASS iff q(theta) ignores t."""
    rep = PropertyReport("allocation-invariance", True)
    tol = (0 if game.exact else 1e-9) if tol is None else tol
    for space, prof in profiles:
        ok = True
        ref = {}
        for types in _type_profiles(space, game.n):
            for theta, _ in game.values.profiles():
                q, _ = _expected_qm(game, prof, theta, types, space)
                if theta not in ref:
                    ref[theta] = (types, q)
                    continue
                t0, q0 = ref[theta]
                if any(not close(a, b, tol) for a, b in zip(q, q0)):
                    ok = False
                    rep.witness = rep.witness or {"space": _space_label(space), "theta": theta,
                                                  "types": (t0, types), "q": (q0, q)}
                    break
            if not ok:
                break
        rep.sub.append((_space_label(space), ok, None))
        rep.passed = rep.passed and ok
    return rep


def _own_reach(game, profile, i, t_i, sig, ph) -> list:
    """Indices of own values whose play produces player i's actions in ``ph``."""
    grid = game.values.grid(i)
    alive = list(range(len(grid)))
    for k, vec in enumerate(ph.public):
        h = ph.public[:k]
        st = game.stage(h)
        if i not in st.movers:
            continue
        seen = PrivateHistory(h, tuple((j, vec[j]) for j in st.movers if j in sig and j != i))
        alive = [s for s in alive if profile.dist(i, grid[s], t_i, seen).get(vec[i], 0) > 0]
    return alive


def lemma1_bounds(game: GameTree, profile: Profile, space, i: int, t_i, ph: PrivateHistory = PrivateHistory(),
                  check_invariance: bool = True) -> PropertyReport:
    """Monotone interim allocation and the telescoping payoff bounds at one cell."""
    from .auctions import interim_tables

    if check_invariance:
        inv = allocation_invariance(game, [(space, profile)])
        if not inv.passed:
            raise PrereqFailed(f"allocation invariance fails: {inv.witness}")
    grid = game.values.grid(i)
    beliefs = BeliefSystem(game, profile, space)
    sig = space.signature(i, t_i) if space is not None and t_i is not None else frozenset()
    slower = [t for t in (space.names(i) if space is not None else [None])
              if space is None or space.signature(i, t) <= sig]
    Q, M = interim_tables(game, profile, space, i, t_i, t_i, ph, beliefs)
    feasible = [k for k in range(len(grid)) if Q[k] > 0]
    rep = PropertyReport("lemma1-bounds", True)
    mono = all(Q[b] >= Q[a] for a, b in zip(feasible, feasible[1:]))
    rep.sub.append(("monotone Q", mono, {"Q": list(Q)}))
    rep.passed = mono
    if not mono:
        rep.witness = {"Q": list(Q)}
    slack = None
    bounds_ok = True
    if feasible:
        reach = _own_reach(game, profile, i, t_i, sig, ph)
        for t_hat in slower:
            Qh, Mh = interim_tables(game, profile, space, i, t_hat, t_i, ph, beliefs)
            lo = hi = 0
            prev = None
            for s in reach:
                if prev is not None:
                    step = grid[s] - grid[prev]
                    lo += step * Q[prev]
                    hi += step * Q[s]
                prev = s
                u = grid[s] * Qh[s] - Mh[s]
                ok = lo <= u <= hi if game.exact else (lo - 1e-9 <= u <= hi + 1e-9)
                gap = min(u - lo, hi - u)
                slack = gap if slack is None else min(slack, gap)
                if not ok:
                    bounds_ok = False
                    rep.witness = rep.witness or {"value": grid[s], "pretend": t_hat, "lower": lo,
                                                  "utility": u, "upper": hi}
        rep.sub.append(("payoff bounds", bounds_ok, {"types": slower, "reaching": len(reach)}))
    rep.passed = mono and bounds_ok
    rep.margins["min_slack"] = slack
    rep.margins["lowest_feasible"] = grid[feasible[0]] if feasible else None
    return rep


# ---------------------------------------------------------------------------
# ex-post incentive compatibility

def _reached(game, profile, theta) -> set:
    """Public histories reached with positive probability at theta (no leakage)."""
    seen = set()
    for z in outcome_distribution(game, profile, theta):
        for k in range(len(z)):
            seen.add(z[:k])
    return seen


def _epic(game, profile, sequential: bool) -> PropertyReport:
    n = game.n
    tol = 0 if game.exact else 1e-9
    name = "sequential-epic-on-path" if sequential else "epic"
    rep = PropertyReport(name, True)
    worst = 0
    for i in range(n):
        own = game.values.grid(i)
        others = [j for j in range(n) if j != i]
        seen = set()
        for theta, _ in game.values.profiles():
            key = tuple(theta[j] for j in others)
            if key in seen:
                continue
            seen.add(key)
            world = (tuple(None if j == i else theta[j] for j in range(n)), (None,) * n)
            eng = _Engine(game, profile, None, i, None, plan=_plan_from_profile(profile, i, own, None))
            vp, vb = eng.run_root({world: 1})
            for k, v in enumerate(own):
                if sequential:
                    full = tuple(v if j == i else theta[j] for j in range(n))
                    reached = _reached(game, profile, full)
                    cells = [(ph, eng.records[ph]) for ph in eng.records if ph.public in reached]
                else:
                    cells = [(PrivateHistory(), None)]
                for ph, rec in cells:
                    if rec is None:
                        gain, dev = vb[k] - vp[k], None
                    else:
                        gain = (rec.best[k] - rec.plan[k]) / rec.weight
                        dev = rec.actions[int(rec.choice[k])]
                    worst = max(worst, gain)
                    if gain > tol:
                        rep.passed = False
                        if rep.witness is None or gain > rep.witness["gain"]:
                            full = tuple(v if j == i else theta[j] for j in range(n))
                            rep.witness = {"player": i, "theta": full, "history": ph,
                                           "deviation": dev, "gain": gain}
    rep.margins["max_gain"] = worst
    rep.margins["pure"] = is_pure(game, profile)
    return rep


def is_epic(game: GameTree, profile: Profile) -> PropertyReport:
    """No player gains from any pure deviation when everyone's values are known."""
    return _epic(game, profile, sequential=False)


def sequential_epic_on_path(game: GameTree, profile: Profile) -> PropertyReport:
    return _epic(game, profile, sequential=True)


def proposition_crosschecks(entries: Sequence[Mapping]) -> PropertyReport:
    """``entries``: dicts with name, static, pure, epic, leakage_proof verdicts."""
    rep = PropertyReport("proposition-crosschecks", True)
    for e in entries:
        if e["pure"] and e["epic"]:
            ok = e["leakage_proof"]
            rep.sub.append((f"{e['name']}: pure EPIC implies leakage-proof", ok, None))
            rep.passed &= ok
        if e["static"] and e["leakage_proof"]:
            ok = e["epic"]
            rep.sub.append((f"{e['name']}: static leakage-proof implies EPIC", ok, None))
            rep.passed &= ok
        if e["epic"] and not e["leakage_proof"]:
            ok = not e["pure"]
            rep.sub.append((f"{e['name']}: EPIC but not leakage-proof needs mixing", ok, None))
            rep.passed &= ok
        if e["leakage_proof"] and not e["epic"]:
            ok = not e["static"]
            rep.sub.append((f"{e['name']}: leakage-proof but not EPIC needs a dynamic game", ok, None))
            rep.passed &= ok
    if not rep.passed:
        rep.witness = {"failed": [l for l, ok, _ in rep.sub if not ok]}
    return rep


# ---------------------------------------------------------------------------
# auction assumptions

def anonymity(game: GameTree, profile: Profile, space=None) -> PropertyReport:
    """(q, m) commute with every permutation of bidders applied to (theta, t)."""
    n = game.n
    tol = 0 if game.exact else 1e-9
    rep = PropertyReport("anonymity", True)
    profiles = list(game.values.profiles())
    value_set = {theta for theta, _ in profiles}
    type_set = set(_type_profiles(space, n))
    for types in sorted(type_set, key=str):
        for theta, _ in profiles:
            q, m = _expected_qm(game, profile, theta, types, space)
            for perm in permutations(range(n)):
                th2 = tuple(theta[perm[j]] for j in range(n))
                ty2 = tuple(types[perm[j]] for j in range(n))
                if th2 not in value_set or ty2 not in type_set:
                    continue
                q2, m2 = _expected_qm(game, profile, th2, ty2, space)
                want_q = tuple(q[perm[j]] for j in range(n))
                want_m = tuple(m[perm[j]] for j in range(n))
                if any(not close(a, b, tol) for a, b in zip(q2 + m2, want_q + want_m)):
                    rep.passed = False
                    rep.witness = {"theta": theta, "types": types, "permutation": perm,
                                   "outcome": (q, m), "permuted": (q2, m2)}
                    return rep
    return rep


def no_rent_to_lowest(game: GameTree, profile: Profile, space=None) -> PropertyReport:
    """Lowest feasible value earns zero at every on-path history, for every
    actual and weakly slower pretended leakage type."""
    from .auctions import OffPathHistory, interim_tables
    from .leakage import private_histories

    rep = PropertyReport("no-rent-to-lowest", True)
    beliefs = BeliefSystem(game, profile, space)
    feasible_any = False
    for i in range(game.n):
        grid = game.values.grid(i)
        for t in (space.names(i) if space is not None else [None]):
            sig = space.signature(i, t) if space is not None and t is not None else frozenset()
            slower = [u for u in (space.names(i) if space is not None else [None])
                      if space is None or space.signature(i, u) <= sig]
            for ph in private_histories(game, sig, i):
                if beliefs.at(i, t, ph).source != "bayes":
                    continue
                for t_hat in slower:
                    try:
                        Q, M = interim_tables(game, profile, space, i, t_hat, t, ph, beliefs)
                    except OffPathHistory:
                        continue
                    feas = [k for k in range(len(grid)) if Q[k] > 0]
                    if not feas:
                        continue
                    feasible_any = True
                    k = feas[0]
                    u = grid[k] * Q[k] - M[k]
                    if not within(abs(u), 0):
                        rep.passed = False
                        rep.witness = {"player": i, "ltype": t, "pretend": t_hat, "history": ph,
                                       "value": grid[k], "utility": u}
                        return rep
    if not feasible_any:
        rep.notes.append("vacuous: no feasible value type")
    return rep


def assumption_audit(game: GameTree, profile: Profile, space=None) -> PropertyReport:
    """Anonymity and no-rent checks; fixtures flagged non-anonymous report the exception."""
    spec = game.meta.get("auction")
    anon = anonymity(game, profile, space)
    rent = no_rent_to_lowest(game, profile, space)
    documented = spec is not None and spec.non_anonymous
    rep = PropertyReport("assumption-audit", rent.passed and (anon.passed or documented))
    rep.sub += [("anonymity", anon.passed, anon.witness), ("no rent to lowest type", rent.passed, rent.witness)]
    if not anon.passed and documented:
        rep.notes.append("anonymity fails on a fixture flagged non-anonymous (documented exception)")
    rep.notes += rent.notes
    rep.witness = anon.witness if not anon.passed else rent.witness
    return rep
