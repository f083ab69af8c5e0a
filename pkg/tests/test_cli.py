import csv
import io
import json
import random
from fractions import Fraction

import pytest

from leakproof.catalog import Check, fixture_catalog, run_fixture, run_many
from leakproof.cli import main
from leakproof.examples import matching_pennies, precaution_game
from leakproof.game import same_tree
from leakproof.io import (checks_to_csv, csv_roundtrip, dumps, game_from_doc, game_to_doc, profile_from_doc,
                          space_from_doc, space_to_doc)
from leakproof.leakage import (LeakageOrder, PrivateHistory, common_knowledge_space, minimal_type_space,
                               nested_type_space)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_passes_for_mixing(capsys):
    code, out, _ = run(capsys, "verify", "matching_pennies", "uniform")
    assert code == 0
    assert out.splitlines()[0].startswith("status")


def test_leakproof_matching_pennies_fails_with_gain_one(capsys, tmp_path):
    dest = tmp_path / "mp.json"
    code, out, _ = run(capsys, "leakproof", "matching_pennies", "uniform", "--out", str(dest), "--format", "doc")
    assert code == 1
    assert "FAIL" in out
    doc = json.loads(dest.read_text())
    assert doc["report"]["witness"]["gain"] == "1"
    assert dumps(doc) == dest.read_text()


def test_unknown_names_are_usage_errors(capsys):
    assert run(capsys, "verify", "no_such_game", "uniform")[0] == 2
    assert run(capsys, "reproduce", "no_such_fixture")[0] == 2
    assert run(capsys, "auction", "first_price", "--order", "sideways")[0] == 2
    assert run(capsys, "bogus")[0] == 2


def test_implements_under_common_knowledge(capsys):
    assert run(capsys, "implements", "appendixB", "appendixB", "--family", "all-ck")[0] == 0
    code, out, _ = run(capsys, "implements", "appendixB", "appendixB", "--family", "minimal")
    assert code == 1


def test_auction_subcommand_reports_revenue(capsys):
    code, out, _ = run(capsys, "auction", "second_price", "--grid-step", "1/10", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert any(r["quantity"].startswith("revenue") for r in rows)
    assert csv_roundtrip(out) == out


def test_reproduce_writes_csv(capsys, tmp_path):
    dest = tmp_path / "rows.csv"
    code, out, _ = run(capsys, "reproduce", "matching_pennies", "appendixB", "--out", str(dest),
                       "--format", "csv", "--workers", "1")
    assert code == 0
    text = dest.read_text()
    rows = list(csv.DictReader(io.StringIO(text)))
    assert {r["fixture"] for r in rows} == {"matching_pennies", "appendixB"}
    assert all(r["status"] in ("PASS", "XFAIL") for r in rows)
    assert csv_roundtrip(text) == text


def test_series_bids(capsys):
    code, out, _ = run(capsys, "series", "bids", "--grid-step", "1/4")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["value", "first_price_bid", "paranoid_bid"]
    assert len(rows) == 6
    assert rows[-1][1] == "1/2"


def test_series_revenue_tracks_the_bound(capsys):
    code, out, _ = run(capsys, "series", "revenue", "--deltas", "1/10,1/20")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 2
    assert rows[0]["second_price_revenue"] == "7/22"
    gaps = [Fraction(r["virtual_surplus_bound"]) - Fraction(r["first_price_revenue"]) for r in rows]
    assert gaps[1] < gaps[0]


def test_game_document_round_trip():
    for g in (matching_pennies(), precaution_game()):
        doc = game_to_doc(g, name="x")
        back = game_from_doc(json.loads(dumps(doc)))
        assert same_tree(back, g)
        assert dumps(game_to_doc(back, name="x")) == dumps(doc)


def test_auction_document_builds_the_grid():
    g = game_from_doc({"auction": {"format": "first_price", "step": "1/4", "bidders": 2}})
    assert g.values.grid(0) == tuple(Fraction(k, 4) for k in range(5))


def test_space_document_round_trip():
    spaces = [minimal_type_space(2), common_knowledge_space(LeakageOrder((0, 1))),
              nested_type_space(LeakageOrder((0, 1)), [LeakageOrder((0, 0)), LeakageOrder((0, 1))])]
    for sp in spaces:
        text = dumps(space_to_doc(sp))
        back = space_from_doc(json.loads(text))
        assert dumps(space_to_doc(back)) == text
        assert back.admissible() == sp.admissible()


def test_profile_documents():
    mix = profile_from_doc({"kind": "stationary", "players": {"0": {"H": "1/2", "T": "1/2"},
                                                             "1": {"H": "1/2", "T": "1/2"}}})
    assert mix.dist(0, 0, None, PrivateHistory()) == {"H": Fraction(1, 2), "T": Fraction(1, 2)}
    table = profile_from_doc({"entries": [{"player": 0, "value": "H", "history": [], "dist": {"a1H": 1}}]})
    assert table.dist(0, "H", None, PrivateHistory()) == {"a1H": 1}


def test_check_rows_survive_csv():
    rng = random.Random(3)
    rows = [Check("f", f"q{k}", Fraction(rng.randint(0, 9), 7), rng.random(), 1e-6, "derived",
                  rng.choice(["PASS", "FAIL", "XFAIL"]), 'with "quotes", commas') for k in range(20)]
    text = checks_to_csv(rows)
    assert csv_roundtrip(text) == text
    back = list(csv.DictReader(io.StringIO(text)))
    assert [Fraction(r["expected"]) for r in back] == [r.expected for r in rows]
    assert [float(r["measured"]) for r in back] == [r.measured for r in rows]


def test_run_many_is_sorted_and_repeatable():
    names = ["paranoid_uniform", "matching_pennies", "appendixB"]
    a = run_many(names, 2)
    b = run_many(list(reversed(names)), 1)
    assert [r.name for r in a] == sorted(names)
    assert [[(c.quantity, c.measured, c.status) for c in r.checks] for r in a] == \
        [[(c.quantity, c.measured, c.status) for c in r.checks] for r in b]


def test_unknown_fixture_raises():
    assert "section2_fpa" in fixture_catalog()
    with pytest.raises(KeyError):
        run_fixture("nope")
