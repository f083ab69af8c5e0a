from fractions import Fraction

import pytest

from leakproof import auctions as au
from leakproof.examples import (matching_pennies, precaution_default, precaution_game, precaution_profiles,
                                precaution_scf, precaution_spaces, uniform_mixing)
from leakproof.game import SocialChoiceFunction, ValueTypeSpace, prune
from leakproof.leakage import LeakageOrder, PrivateHistory, common_knowledge_space, minimal_type_space
from leakproof.mechanisms import (NotPruned, PrereqFailed, allocation_invariance, assumption_audit, implements,
                                  induced_outcomes, is_efficient_under_leakage, is_epic, is_leakage_proof,
                                  lemma1_bounds, proposition_crosschecks, replay_witness, sequential_epic_on_path,
                                  theorem1_crosscheck)
from leakproof.solver import ExtendedProfile, best_response_extension, iterate_best_responses
from leakproof.strategies import restrict_profile

from conftest import TENTH, exact_auction

MINIMAL = [minimal_type_space(2)]


def _pruned(fmt, tie="uniform_random", step=TENTH, reserve=None):
    g = exact_auction(fmt, tie, step=step, reserve=reserve)
    s0 = au.default_auction_profile(g)
    pg = prune(g, s0)
    return pg, restrict_profile(s0, pg)


def test_second_price_is_leakage_proof():
    pg, ps = _pruned("second_price")
    rep = is_leakage_proof(pg, ps, MINIMAL, epsilon=0)
    assert rep.passed and rep.witness is None


def test_first_price_fails_with_an_overbid():
    pg, ps = _pruned("first_price", step=Fraction(1, 20))
    rep = is_leakage_proof(pg, ps, MINIMAL, epsilon=Fraction(1, 10))
    assert not rep.passed
    w = rep.witness
    assert w["ltype"] == "t1"
    seen = dict(w["history"].leaked)
    assert all(w["deviation"] > b for b in seen.values() if b != au.ABSTAIN)
    pres, dev = replay_witness(pg, ps, MINIMAL[0], w)
    assert dev - pres == w["gain"] > Fraction(1, 10)


def test_unpruned_game_is_refused():
    g = precaution_game()
    with pytest.raises(NotPruned):
        is_leakage_proof(g, precaution_default(), MINIMAL)


def test_precaution_unpruned_fails_and_replays():
    g = precaution_game()
    rep = is_leakage_proof(g, precaution_default(), MINIMAL, require_pruned=False)
    assert not rep.passed
    w = rep.witness
    assert (w["player"], w["ltype"], w["deviation"], w["gain"]) == (1, "t1", "a2H'", 1)
    assert replay_witness(g, precaution_default(), MINIMAL[0], w) == (1, 2)


def test_precaution_listed_profiles_implement_f():
    g = precaution_game()
    f = precaution_scf(g)
    profiles = precaution_profiles()
    for key, space in precaution_spaces().items():
        rep = implements(g, f, [space], candidates={space.name: [profiles[key]]})
        assert rep.passed, key


def test_precaution_minimal_space_yields_m():
    g = precaution_game()
    s0 = precaution_default()
    rep = implements(g, precaution_scf(g), MINIMAL, s0=s0)
    assert not rep.passed
    outs = rep.witness["best_response_outcomes"]
    assert outs[(("H", "-"), ("t0", "t1"))] == {"m": 1}
    assert outs[(("L", "-"), ("t0", "t1"))] == {"m": 1}


def test_pruned_precaution_implements_under_every_order():
    g = precaution_game()
    s0 = precaution_default()
    pg = prune(g, s0)
    ps = restrict_profile(s0, pg)
    f = precaution_scf(g)
    assert implements(pg, f, MINIMAL, s0=ps).passed
    ext = ExtendedProfile(pg, ps, MINIMAL[0])
    for types in (("t0", "t0"), ("t1", "t0"), ("t0", "t1")):
        for theta in (("H", "-"), ("L", "-")):
            assert induced_outcomes(pg, ext, theta, types, MINIMAL[0]) == {f(theta): 1}


def test_implementation_equivalence_on_pruned_precaution():
    g = precaution_game()
    s0 = precaution_default()
    pg = prune(g, s0)
    rep = theorem1_crosscheck(pg, precaution_scf(g), MINIMAL, restrict_profile(s0, pg))
    assert rep.passed
    assert rep.margins["implements"] and rep.margins["leakage_proof_implementing"]


def test_common_knowledge_family_is_an_assumption_demo():
    g = precaution_game()
    spaces = precaution_spaces()
    profiles = precaution_profiles()
    rep = theorem1_crosscheck(g, precaution_scf(g), list(spaces.values()), precaution_default(),
                              candidates={sp.name: [profiles[k]] for k, sp in spaces.items()})
    assert rep.margins["implements"] and not rep.margins["leakage_proof_implementing"]
    assert rep.notes


def test_implementation_equivalence_for_efficient_second_price():
    pg, ps = _pruned("second_price")
    f = SocialChoiceFunction.from_function(pg.values, lambda th: pg.outcome(((th[0], th[1]),)))
    rep = theorem1_crosscheck(pg, f, MINIMAL, ps, epsilon=2 * TENTH)
    assert rep.passed
    assert rep.margins["implements"] and rep.margins["leakage_proof_implementing"]


def test_second_price_efficient_with_certificate(spa_tenth):
    rep = is_efficient_under_leakage(spa_tenth, MINIMAL, au.truthful_profile(spa_tenth), 2 * TENTH)
    assert rep.passed
    assert rep.margins["leakage_proof_certificate"]


def test_single_bidder_is_efficient():
    vals = ValueTypeSpace.uniform(au.uniform_grid(Fraction(1, 4)), 1)
    g = au.build_auction(au.AuctionSpec("second_price", vals))
    rep = is_efficient_under_leakage(g, [minimal_type_space(1)], au.truthful_profile(g))
    assert rep.passed


def test_first_price_fast_bidder_misallocates():
    vals = ValueTypeSpace.uniform(au.uniform_grid(TENTH), 2)
    g = au.build_auction(au.AuctionSpec("first_price", vals, tie_break="fast_wins", fast_bidder=1,
                                        non_anonymous=True))
    s0 = au.default_auction_profile(g)
    ck = common_knowledge_space(LeakageOrder((0, 1)))
    fast, converged = iterate_best_responses(g, s0, ck)
    assert converged
    rep = is_efficient_under_leakage(g, [ck], s0, 2 * TENTH, candidates={ck.name: [fast]}, certificate=False)
    assert not rep.passed
    lo, hi = rep.witness["theta"]
    assert lo / 2 - TENTH <= hi < lo


def test_allocation_invariance_examples(spa_tenth):
    ms = MINIMAL[0]
    truthful = au.truthful_profile(spa_tenth)
    assert allocation_invariance(spa_tenth, [(ms, ExtendedProfile(spa_tenth, truthful, ms))]).passed
    pg, ps = _pruned("first_price")
    assert not allocation_invariance(pg, [(ms, best_response_extension(pg, ps, ms))]).passed
    posted = au.build_auction(au.AuctionSpec("second_price", ValueTypeSpace.uniform(au.uniform_grid(TENTH), 1),
                                             reserve=Fraction(1, 2)))
    one = minimal_type_space(1)
    assert allocation_invariance(posted, [(one, au.truthful_profile(posted))]).passed


def test_lemma_bounds_at_the_second_price_root(spa_tenth):
    ms = MINIMAL[0]
    ext = ExtendedProfile(spa_tenth, au.truthful_profile(spa_tenth), ms)
    rep = lemma1_bounds(spa_tenth, ext, ms, 0, "t0")
    assert rep.passed
    assert rep.margins["lowest_feasible"] == 0
    assert rep.margins["min_slack"] == 0
    # a fast type decides only once it has seen the slow bid
    seen = PrivateHistory((), ((0, Fraction(4, 10)),))
    assert lemma1_bounds(spa_tenth, ext, ms, 1, "t1", seen).passed


def test_lemma_bounds_two_type_toy():
    toy = ValueTypeSpace(((Fraction(0), Fraction(1)),), ((Fraction(1, 2), Fraction(1, 2)),))
    g = au.build_auction(au.AuctionSpec("second_price", toy, reserve=Fraction(1)))
    rep = lemma1_bounds(g, au.truthful_profile(g), None, 0, None)
    assert rep.passed
    Q = rep.sub[0][2]["Q"]
    assert list(Q) == [0, 1]


def test_lemma_bounds_need_invariance():
    pg, ps = _pruned("first_price")
    ms = MINIMAL[0]
    with pytest.raises(PrereqFailed):
        lemma1_bounds(pg, best_response_extension(pg, ps, ms), ms, 0, "t0")


def test_epic_examples(spa_tenth):
    rep = is_epic(spa_tenth, au.truthful_profile(spa_tenth))
    assert rep.passed and rep.margins["pure"]
    mp = is_epic(matching_pennies(), uniform_mixing())
    assert mp.passed and not mp.margins["pure"]
    dutch = exact_auction("dutch", "no_allocation")
    rep = is_epic(dutch, au.default_auction_profile(dutch))
    assert not rep.passed
    # waiting past the first tick takes the good alone instead of a void tie
    w = rep.witness
    assert w["gain"] > 0
    assert w["theta"][w["player"]] > w["theta"][1 - w["player"]]


def test_sequential_epic_on_english(english_tenth):
    assert sequential_epic_on_path(english_tenth, au.default_auction_profile(english_tenth)).passed


def test_proposition_crosschecks_catalog():
    entries = [
        {"name": "matching pennies", "static": True, "pure": False, "epic": True, "leakage_proof": False},
        {"name": "dutch no allocation", "static": False, "pure": True, "epic": False, "leakage_proof": True},
        {"name": "second price", "static": True, "pure": True, "epic": True, "leakage_proof": True},
    ]
    assert proposition_crosschecks(entries).passed
    broken = entries + [{"name": "bad", "static": True, "pure": True, "epic": True, "leakage_proof": False}]
    assert not proposition_crosschecks(broken).passed


def test_assumption_audit_examples(spa_tenth):
    assert assumption_audit(spa_tenth, au.truthful_profile(spa_tenth)).passed
    vals = ValueTypeSpace.uniform(au.uniform_grid(Fraction(1, 5)), 2)
    fast = au.build_auction(au.AuctionSpec("first_price", vals, tie_break="fast_wins", fast_bidder=1,
                                           non_anonymous=True))
    rep = assumption_audit(fast, au.default_auction_profile(fast))
    assert rep.passed
    assert not rep.sub[0][1]
    low = ValueTypeSpace.uniform(au.grid_between(Fraction(0), Fraction(1, 2), Fraction(1, 4)), 2)
    high = au.build_auction(au.AuctionSpec("second_price", low, reserve=Fraction(1),
                                           bid_grid=au.grid_between(Fraction(0), Fraction(1), Fraction(1, 4))))
    assert assumption_audit(high, au.truthful_profile(high)).passed
