"""Property checks on randomly generated small games."""
import csv
import io
import itertools
import random
from fractions import Fraction

from hypothesis import given, strategies as st

from leakproof import auctions as au
from leakproof.catalog import Check
from leakproof.game import UtilityTable, ValueTypeSpace, build_game, is_pruned, prune, same_tree
from leakproof.io import checks_to_csv, csv_roundtrip
from leakproof.leakage import LeakageOrder, minimal_type_space
from leakproof.solver import ExtendedProfile, outcome_distribution, verify_equilibrium
from leakproof.strategies import default_profile, restrict_profile

from oracles import path_probabilities


@st.composite
def small_games(draw):
    n = 2
    sizes = [draw(st.integers(1, 2)) for _ in range(n)]
    grids = tuple(tuple(range(k)) for k in sizes)
    priors = tuple((Fraction(1, k),) * k for k in sizes)
    values = ValueTypeSpace(grids, priors)
    labels = []

    def node(depth):
        if depth == 0 or draw(st.booleans()) and depth < 2:
            x = f"x{len(labels)}"
            labels.append(x)
            return {"outcome": x}
        movers = sorted(draw(st.sets(st.integers(0, n - 1), min_size=1, max_size=n)))
        acts = {j: [f"a{j}{k}" for k in range(draw(st.integers(2, 3)))] for j in movers}
        kids = {}
        for combo in itertools.product(*(acts[j] for j in movers)):
            kids[combo if len(combo) > 1 else combo[0]] = node(depth - 1)
        return {"movers": acts, "children": kids}

    tree = node(draw(st.integers(1, 2)))
    if "outcome" in tree:
        tree = {"movers": {0: ["a00", "a01"]}, "children": {"a00": tree, "a01": {"outcome": "x_last"}}}
        labels.append("x_last")
    payoff = st.integers(-3, 3).map(Fraction)
    table = {x: {theta: tuple(draw(payoff) for _ in range(n)) for theta in itertools.product(*grids)}
             for x in labels}
    return build_game(n, values, UtilityTable(table), tree)


def random_profile(seed, pure=False):
    """A stationary no-leakage profile drawn lazily, with some zero-weight actions."""
    def make(game):
        table = {}

        def dist(i, v, h):
            key = (i, v, h)
            if key not in table:
                acts = game.stage(h).actions_of(i)
                rng = random.Random(f"{seed}|{key!r}")
                if pure:
                    table[key] = {rng.choice(acts): Fraction(1)}
                else:
                    w = [rng.randint(0, 2) for _ in acts]
                    if not any(w):
                        w[0] = 1
                    table[key] = {a: Fraction(x, sum(w)) for a, x in zip(acts, w) if x}
            return table[key]
        return default_profile(dist, name=f"random {seed}")
    return make


@given(small_games(), st.integers(0, 10 ** 6))
def test_prune_is_idempotent(game, seed):
    prof = random_profile(seed)(game)
    once = prune(game, prof)
    assert same_tree(prune(once, prof), once)
    assert is_pruned(once, restrict_profile(prof, once))


@given(small_games(), st.integers(0, 10 ** 6))
def test_outcome_distributions_are_normalised(game, seed):
    prof = random_profile(seed)(game)
    for theta, _ in game.values.profiles():
        for order in (LeakageOrder((0, 0)), LeakageOrder((1, 0)), LeakageOrder((0, 1))):
            dist = outcome_distribution(game, prof, theta, order=order)
            assert sum(dist.values()) == 1
            assert all(game.is_terminal(z) for z in dist)


@given(small_games(), st.integers(0, 10 ** 6))
def test_terminal_mass_matches_forward_flow(game, seed):
    prof = random_profile(seed)(game)
    for theta, _ in game.values.profiles():
        flow = path_probabilities(game, prof, theta)
        terminal = {h: p for h, p in flow.items() if game.is_terminal(h) and p}
        assert outcome_distribution(game, prof, theta) == terminal
        # mass is conserved at every inner history
        for h, p in flow.items():
            if not game.is_terminal(h):
                assert sum(q for k, q in flow.items() if len(k) == len(h) + 1 and k[:-1] == h) == p


@given(small_games(), st.integers(0, 10 ** 6))
def test_verification_is_deterministic(game, seed):
    prof = random_profile(seed, pure=True)(game)
    ms = minimal_type_space(2)
    runs = [verify_equilibrium(game, ExtendedProfile(game, prof, ms), ms, 0) for _ in range(2)]
    assert [(c.key(), c.gain) for c in runs[0].cells] == [(c.key(), c.gain) for c in runs[1].cells]
    assert runs[0].passed == runs[1].passed


@given(st.sampled_from(["first_price", "second_price", "english", "dutch"]),
       st.sampled_from([Fraction(1, 2), Fraction(1, 4), Fraction(1, 5)]), st.data())
def test_swapping_bidders_swaps_the_outcome(fmt, step, data):
    tie = "no_allocation" if fmt == "dutch" else "uniform_random"
    g = au.build_auction(au.AuctionSpec(fmt, ValueTypeSpace.uniform(au.uniform_grid(step), 2), tie_break=tie))
    s0 = au.default_auction_profile(g)
    grid = g.values.grid(0)
    a, b = data.draw(st.sampled_from(grid)), data.draw(st.sampled_from(grid))

    def expected(theta):
        q, m = [0, 0], [0, 0]
        for z, p in outcome_distribution(g, s0, theta).items():
            x = g.outcome(z)
            for j in range(2):
                q[j] += p * x.q[j]
                m[j] += p * x.m[j]
        return q, m

    q, m = expected((a, b))
    qs, ms_ = expected((b, a))
    assert q == qs[::-1] and m == ms_[::-1]


cell_text = st.text(st.characters(blacklist_categories=("Cs",), blacklist_characters="\r\x00"), max_size=12)


@given(st.lists(st.tuples(cell_text, cell_text, st.fractions(max_denominator=50),
                          st.floats(allow_nan=False, allow_infinity=False),
                          st.sampled_from(["PASS", "FAIL", "XFAIL"])),
                max_size=8))
def test_check_rows_round_trip(rows):
    checks = [Check(f, q, e, m, None, "derived", s, "") for f, q, e, m, s in rows]
    text = checks_to_csv(checks)
    assert csv_roundtrip(text) == text
    back = list(csv.DictReader(io.StringIO(text)))
    assert [r["fixture"] for r in back] == [c.fixture for c in checks]
    assert [Fraction(r["expected"]) for r in back] == [c.expected for c in checks]
    assert [float(r["measured"]) for r in back] == [c.measured for c in checks]
