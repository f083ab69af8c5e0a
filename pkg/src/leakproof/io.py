"""Reading and writing game, profile and report documents.

Documents are UTF-8 JSON.  Rationals are written as "num/den" strings so a
round trip is exact; floats are written with ``repr``.
"""
from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from pathlib import Path

from .game import (PlayerSet, SocialChoiceFunction, UtilityTable, ValueTypeSpace,
                   build_game)
from .leakage import LeakageOrder, LeakageType, LeakageTypeSpace, PrivateHistory
from .numeric import format_number, parse_number
from .strategies import Profile, table_profile


class DocumentError(ValueError):
    pass


# ---------------------------------------------------------------------------
# plain values

def parse_value(x):
    """A value or action label: numbers become numbers, other strings stay labels."""
    if isinstance(x, str):
        try:
            return parse_number(x)
        except (ValueError, ZeroDivisionError):
            return x
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return parse_number(x)
    return x


def to_plain(x):
    """Convert report content to JSON-ready primitives."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, Fraction):
        return format_number(x)
    if isinstance(x, int):
        return x
    if isinstance(x, float):
        return float(x)
    if isinstance(x, PrivateHistory):
        return str(x)
    if isinstance(x, dict):
        return {str(to_plain(k)) if not isinstance(k, str) else k: to_plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = sorted(x, key=repr) if isinstance(x, (set, frozenset)) else x
        return [to_plain(v) for v in items]
    if hasattr(x, "item"):          # numpy scalars
        return to_plain(x.item())
    return str(x)


def dumps(doc) -> str:
    return json.dumps(to_plain(doc), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def load_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# games

def _history(raw) -> tuple:
    return tuple(tuple(None if a is None else parse_value(a) for a in vec) for vec in raw)


def _label(x):
    """Outcome labels: lists in a document stand for tuple labels."""
    return tuple(_label(a) for a in x) if isinstance(x, list) else parse_value(x)


def _tree(node):
    if "outcome" in node:
        return {"outcome": _label(node["outcome"])}
    movers = {int(j): [parse_value(a) for a in acts] for j, acts in node["movers"].items()}
    children = {}
    for child in node["children"]:
        key = tuple(parse_value(a) for a in child["actions"])
        children[key if len(key) > 1 else key[0]] = _tree(child["node"])
    return {"movers": movers, "children": children}


def game_from_doc(doc: dict):
    """Build a game (or an auction) from a parsed document."""
    if "auction" in doc:
        from .auctions import AuctionSpec, build_auction, grid_between
        a = doc["auction"]
        grid = grid_between(parse_number(a.get("min", 0)), parse_number(a.get("max", 1)),
                            parse_number(a.get("step", "1/10")))
        values = ValueTypeSpace.uniform(grid, int(a.get("bidders", 2)))
        reserve = parse_number(a.get("reserve", grid[0]))
        if not isinstance(reserve, Fraction):
            reserve = round(reserve, 12)
        spec = AuctionSpec(a["format"], values, reserve=reserve,
                           tie_break=a.get("tie_break", "uniform_random"),
                           fast_bidder=a.get("fast_bidder"), non_anonymous=bool(a.get("non_anonymous", False)))
        return build_auction(spec)
    try:
        players = doc["players"]
        n = players if isinstance(players, int) else players["n"]
        names = None if isinstance(players, int) else players.get("names")
        pset = PlayerSet(n, tuple(names) if names else ())
        grids = [tuple(parse_value(v) for v in p["grid"]) for p in doc["values"]]
        priors = [tuple(parse_number(q) for q in p["prior"]) for p in doc["values"]]
        values = ValueTypeSpace(tuple(grids), tuple(priors))
        table = {}
        raw = doc["outcomes"]
        pairs = raw.items() if isinstance(raw, dict) else ((_label(e["outcome"]), e["rows"]) for e in raw)
        for x, rows in pairs:
            table[x] = {tuple(parse_value(v) for v in r["theta"]): tuple(parse_number(u) for u in r["u"])
                        for r in rows}
        game = build_game(pset, values, UtilityTable(table), _tree(doc["tree"]),
                          meta={"name": doc.get("name", "")})
    except KeyError as exc:
        raise DocumentError(f"missing section {exc}") from None
    return game


def scf_from_doc(doc: dict) -> SocialChoiceFunction:
    rows = doc["scf"] if "scf" in doc else doc["entries"]
    return SocialChoiceFunction({tuple(parse_value(v) for v in r["theta"]): r["outcome"] for r in rows})


def game_to_doc(game, name: str = "") -> dict:
    """Inverse of ``game_from_doc`` for table-utility games."""
    from .game import ROOT

    def node(h):
        if game.is_terminal(h):
            return {"outcome": game.outcome(h)}
        st = game.stage(h)
        kids = []
        for vec in st.vectors(game.n):
            kids.append({"actions": [vec[j] for j in st.movers], "node": node(h + (vec,))})
        return {"movers": {str(j): list(a) for j, a in zip(st.movers, st.actions)}, "children": kids}

    def rows(row):
        return [{"theta": list(theta), "u": list(u)} for theta, u in row.items()]

    table = game.utility.table
    if all(isinstance(x, str) for x in table):
        outcomes = {x: rows(row) for x, row in table.items()}
    else:
        outcomes = [{"outcome": x, "rows": rows(row)} for x, row in table.items()]
    doc = {"name": name, "players": game.n,
           "values": [{"grid": list(g), "prior": list(p)} for g, p in zip(game.values.grids, game.values.priors)],
           "outcomes": outcomes, "tree": node(ROOT)}
    doc = _numbers_as_text(doc)
    doc["players"] = game.n
    return doc


def _numbers_as_text(x):
    # ints and rationals are written as strings so a reparse gives the same document
    if isinstance(x, bool):
        return x
    if isinstance(x, (int, Fraction)):
        return format_number(Fraction(x))
    if isinstance(x, dict):
        return {k: _numbers_as_text(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_numbers_as_text(v) for v in x]
    return x


# ---------------------------------------------------------------------------
# leakage type spaces

def space_from_doc(doc: dict) -> LeakageTypeSpace:
    """Named types with ``observes`` and ``belief`` entries.

    Each belief entry lists a full type profile and its probability; an
    optional ``order`` rank vector is checked against the order implied by the
    profile's observation sets.
    """
    n = int(doc["players"])
    types = []
    for t in doc["types"]:
        belief = []
        for b in t["belief"]:
            belief.append((tuple(b["profile"]), parse_number(b.get("p", 1))))
        types.append(LeakageType(t["name"], int(t["player"]), frozenset(int(j) for j in t.get("observes", [])),
                                 tuple(belief)))
    space = LeakageTypeSpace(n, types, name=doc.get("name", ""),
                             true_profile=tuple(doc["true_profile"]) if "true_profile" in doc else None)
    for t in doc["types"]:
        for b in t["belief"]:
            if "order" in b and space.order_for(tuple(b["profile"])) != LeakageOrder(tuple(b["order"])):
                raise DocumentError(f"type {t['name']!r}: order {b['order']} does not match profile {b['profile']}")
    return space


def space_to_doc(space: LeakageTypeSpace) -> dict:
    types = []
    for (i, name), t in sorted(space.types.items()):
        types.append({"player": i, "name": name, "observes": sorted(t.signature),
                      "belief": [{"profile": list(prof), "p": p, "order": list(space.order_for(prof).ranks)}
                                 for prof, p in t.belief]})
    doc = {"name": space.name, "players": space.n, "types": types}
    if space.true_profile:
        doc["true_profile"] = list(space.true_profile)
    return doc


# ---------------------------------------------------------------------------
# profiles

def profile_from_doc(doc: dict) -> Profile:
    kind = doc.get("kind", "table")
    if kind == "stationary":
        dists = {int(j): {parse_value(a): parse_number(p) for a, p in d.items()}
                 for j, d in doc["players"].items()}
        return Profile(lambda i, v, h: dists[i], leak_free=True, name=doc.get("name", "stationary"))
    if kind != "table":
        raise DocumentError(f"unknown profile kind {kind!r}")
    leak_free = bool(doc.get("leak_free", True))
    table = {}
    for e in doc["entries"]:
        dist = {parse_value(a): parse_number(p) for a, p in e["dist"].items()}
        h = _history(e.get("history", []))
        v = parse_value(e["value"])
        if leak_free:
            table[(int(e["player"]), v, h)] = dist
        else:
            leaked = tuple((int(j), parse_value(a)) for j, a in e.get("leaked", []))
            table[(int(e["player"]), v, e.get("ltype"), PrivateHistory(h, leaked))] = dist
    return table_profile(table, leak_free=leak_free, name=doc.get("name", "table"))


# ---------------------------------------------------------------------------
# tables

CHECK_FIELDS = ("fixture", "quantity", "expected", "measured", "tolerance", "provenance", "status", "detail")


def checks_to_csv(checks) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CHECK_FIELDS)
    for c in checks:
        w.writerow([_cell(getattr(c, f)) for f in CHECK_FIELDS])
    return buf.getvalue()


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, Fraction):
        return format_number(x)
    if isinstance(x, float):
        return repr(x)
    return str(x)


def csv_roundtrip(text: str) -> str:
    rows = list(csv.reader(io.StringIO(text)))
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def series_to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(x) for x in r])
    return buf.getvalue()
