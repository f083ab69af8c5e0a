"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage
errors (bad arguments, unreadable files, unknown names).
"""
from __future__ import annotations

import argparse
import random
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import auctions as au
from .catalog import Check, fixture_catalog, run_many
from .examples import (matching_pennies, precaution_default, precaution_game, precaution_profiles, precaution_scf,
                       precaution_spaces, uniform_mixing)
from .game import StructureError, ValueTypeSpace, prune
from .io import (CHECK_FIELDS, DocumentError, checks_to_csv, dumps, game_from_doc, load_json,
                 profile_from_doc, scf_from_doc, series_to_csv, space_from_doc)
from .leakage import LeakageOrder, TypeSpaceError, all_orders, common_knowledge_space, minimal_type_space
from .mechanisms import NotPruned, implements, is_epic, is_leakage_proof, replay_witness
from .numeric import parse_number
from .solver import NoEquilibriumFound, default_equilibrium, iterate_best_responses, verify_equilibrium
from .strategies import restrict_profile


class UsageError(Exception):
    pass


GAMES = {
    "matching_pennies": matching_pennies,
    "appendixB": precaution_game,
}

SCFS = {
    "appendixB": precaution_scf,
}


def load_game(ref: str):
    if ref in GAMES:
        return GAMES[ref]()
    path = Path(ref)
    if not path.exists():
        raise UsageError(f"unknown game {ref!r} (known: {', '.join(sorted(GAMES))}, or a file path)")
    return game_from_doc(load_json(path))


def load_profile(game, ref: str):
    """Named profiles: ``uniform``, ``default`` (the game's default equilibrium), ``truthful``."""
    if ref == "uniform":
        return uniform_mixing()
    if ref == "default":
        if "auction" in game.meta:
            return au.default_auction_profile(game)
        if game.meta.get("name") == "precaution":
            return precaution_default()
        found, _ = default_equilibrium(game)
        return found
    if ref == "truthful":
        return au.truthful_profile(game)
    path = Path(ref)
    if not path.exists():
        raise UsageError(f"unknown profile {ref!r} (uniform, default, truthful, or a file path)")
    return profile_from_doc(load_json(path))


def load_scf(game, ref: str):
    if ref in SCFS:
        return SCFS[ref](game)
    path = Path(ref)
    if not path.exists():
        raise UsageError(f"unknown social choice function {ref!r}")
    return scf_from_doc(load_json(path))


def load_family(n: int, name: str, game=None) -> list:
    if name == "all-ck" and game is not None and game.meta.get("name") == "precaution":
        return list(precaution_spaces().values())
    if name == "minimal":
        return [minimal_type_space(n)]
    if name == "equal":
        return [common_knowledge_space(LeakageOrder.equal(n), name="ck:equal")]
    if name == "all-ck":
        return [common_knowledge_space(o, name=f"ck:{o}") for o in all_orders(n)]
    if Path(name).exists():
        return [space_from_doc(load_json(name))]
    raise UsageError(f"unknown type-space family {name!r} (minimal, equal, all-ck, or a file path)")


# ---------------------------------------------------------------------------
# commands: each returns (rows, document)

def _row(topic, quantity, expected, measured, ok, detail="", tol=None, provenance="exact"):
    return Check(topic, quantity, expected, measured, tol, provenance, "PASS" if ok else "FAIL", detail)


def _info(topic, quantity, measured, detail=""):
    return Check(topic, quantity, "", measured, None, "measured", "INFO", detail)


def _witness_text(w) -> str:
    if not w:
        return ""
    seen = dict(w["history"].leaked) if hasattr(w["history"], "leaked") else {}
    told = " observing " + ", ".join(f"{j}:{_short(a)}" for j, a in sorted(seen.items())) if seen else ""
    return (f"player {w['player']} (type {w['ltype']}, value {_short(w['value'])}){told} "
            f"deviates to {_short(w['deviation'])}, gain {_short(w['gain'])}")


def cmd_verify(args):
    game = load_game(args.game)
    prof = load_profile(game, args.profile)
    eps = parse_number(args.epsilon) if args.epsilon is not None else game.meta.get("epsilon", 0)
    rep = verify_equilibrium(game, prof, None, eps)
    worst = rep.worst()
    detail = "" if worst is None or rep.passed else \
        f"player {worst.player}, value {worst.value}, at {worst.history}: {worst.deviation} gains {worst.gain}"
    rows = [_row("verify", f"equilibrium at ε={eps}", "PASS", "PASS" if rep.passed else "FAIL", rep.passed, detail),
            _info("verify", "maximum deviation gain", rep.max_gain)]
    doc = {"command": "verify", "epsilon": eps, "passed": rep.passed, "max_gain": rep.max_gain,
           "violations": [c.__dict__ for c in rep.violations[:20]]}
    return rows, doc


def cmd_leakproof(args):
    game = load_game(args.game)
    prof = load_profile(game, args.profile)
    if args.prune:
        game = prune(game, prof)
        prof = restrict_profile(prof, game)
    family = load_family(game.n, args.family, game)
    eps = parse_number(args.epsilon) if args.epsilon is not None else game.meta.get("epsilon", 0)
    try:
        rep = is_leakage_proof(game, prof, family, epsilon=eps)
    except NotPruned as exc:
        row = _row("leakproof", "game is pruned against the profile", "PASS", "FAIL", False,
                   f"{exc}; rerun with --prune")
        return [row], {"command": "leakproof", "error": str(exc)}
    detail = _witness_text(rep.witness)
    rows = [_row("leakproof", f"leakage-proof ({args.family}, ε={eps})", "PASS", rep.verdict, rep.passed, detail)]
    doc = {"command": "leakproof", "report": rep.to_doc()}
    if rep.witness:
        space = next(s for s in family if (s.name or "no-leakage") == rep.witness["space"])
        pres, dev = replay_witness(game, prof, space, rep.witness)
        rows.append(_info("leakproof", "replayed (prescribed, deviation) values", f"({pres}, {dev})"))
        doc["replay"] = {"prescribed": pres, "deviation": dev}
    return rows, doc


def cmd_implements(args):
    game = load_game(args.game)
    f = load_scf(game, args.scf)
    family = load_family(game.n, args.family, game)
    s0 = load_profile(game, args.profile or "default")
    candidates = None
    if game.meta.get("name") == "precaution":
        listed = precaution_profiles()
        candidates = {sp.name: [listed[key]] for key, sp in precaution_spaces().items()}
    rep = implements(game, f, family, s0=s0, candidates=candidates)
    detail = ""
    if rep.witness:
        tried = "; ".join(f"{a['candidate']}: {a['reason']}" for a in rep.witness["attempts"]) or "no candidates"
        detail = f"{rep.witness['space']}: {tried}"
    rows = [_row("implements", f"implements f ({args.family})", "PASS", rep.verdict, rep.passed, detail)]
    return rows, {"command": "implements", "report": rep.to_doc()}


def cmd_epic(args):
    game = load_game(args.game)
    prof = load_profile(game, args.profile)
    rep = is_epic(game, prof)
    detail = "" if rep.passed else str(rep.witness)
    rows = [_row("epic", "ex-post incentive compatible", "PASS", rep.verdict, rep.passed, detail),
            _info("epic", "profile is pure", rep.margins.get("pure"))]
    return rows, {"command": "epic", "report": rep.to_doc()}


def _auction_from_args(args):
    grid = au.grid_between(parse_number(args.grid_min), parse_number(args.grid_max), parse_number(args.grid_step))
    values = ValueTypeSpace.uniform(grid, args.bidders)
    if args.reserve == "optimal":
        reserve = au.optimal_reserve(values)
    else:
        reserve = grid[0] if args.reserve is None else parse_number(args.reserve)
    fast = None
    if args.order.startswith("fast:"):
        try:
            fast = int(args.order.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad --order {args.order!r}; use none or fast:K") from None
        if not 0 <= fast < args.bidders:
            raise UsageError(f"--order fast:{fast} names no bidder")
    elif args.order != "none":
        raise UsageError(f"bad --order {args.order!r}; use none or fast:K")
    spec = au.AuctionSpec(args.mechanism, values, reserve=reserve, tie_break=args.tie_break,
                          fast_bidder=fast if args.tie_break == "fast_wins" else None,
                          non_anonymous=args.tie_break == "fast_wins")
    return au.build_auction(spec), fast


def cmd_auction(args):
    try:
        game, fast = _auction_from_args(args)
    except (au.GridError, au.TieBreakError, StructureError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    s0 = au.default_auction_profile(game)
    eps = game.meta["epsilon"]
    spec = au.spec_of(game)
    rows = [_info("auction", "format", spec.format, f"{spec.n} bidders, {len(spec.grid)} values, "
                  f"reserve {spec.reserve}, ties {spec.tie_break}")]
    eq = verify_equilibrium(game, s0, None, eps)
    rows.append(_row("auction", f"default profile is a {eps}-equilibrium", "PASS",
                     "PASS" if eq.passed else "FAIL", eq.passed))
    rows.append(_info("auction", "revenue without leakage", au.revenue(game, s0)))
    if fast is not None:
        ck = common_knowledge_space(LeakageOrder.fastest(spec.n, fast), name=f"bidder {fast} fast")
        prof, converged = iterate_best_responses(game, s0, ck)
        types = ("ck",) * spec.n
        rows.append(_info("auction", f"revenue, bidder {fast} fast", au.revenue(game, prof, ck, types),
                          "" if converged else "best-response dynamics did not converge"))
        prob, _ = au.inefficiency(game, prof, ck, types)
        rows.append(_info("auction", f"misallocation probability, bidder {fast} fast", prob))
    family = load_family(spec.n, args.type_space)
    pg = prune(game, s0)
    lp = is_leakage_proof(pg, restrict_profile(s0, pg), family, epsilon=eps)
    rows.append(_row("auction", f"leakage-proof ({args.type_space}, ε={eps})", "PASS", lp.verdict, lp.passed,
                     _witness_text(lp.witness)))
    return rows, {"command": "auction", "spec": {"format": spec.format, "bidders": spec.n,
                                                  "reserve": spec.reserve, "tie_break": spec.tie_break},
                  "equilibrium": eq.passed, "leakage_proof": lp.to_doc()}


def cmd_reproduce(args):
    names = fixture_catalog() if "all" in args.fixtures else args.fixtures
    unknown = [n for n in names if n not in fixture_catalog()]
    if unknown:
        raise UsageError(f"unknown fixture(s) {', '.join(unknown)}; choose from {', '.join(fixture_catalog())}")
    results = run_many(names, args.workers)
    rows = [c for r in results for c in r.checks]
    doc = {"command": "reproduce", "seed": args.seed,
           "fixtures": [{"name": r.name, "passed": r.passed,
                         "checks": [{f: getattr(c, f) for f in CHECK_FIELDS} for c in r.checks]}
                        for r in results]}
    return rows, doc


def cmd_series(args):
    """CSV data for plots: bid functions against value, or revenue against grid step."""
    if args.kind == "bids":
        step = parse_number(args.grid_step)
        grid = au.uniform_grid(step)
        header = ("value", "first_price_bid", "paranoid_bid")
        data = [(v, au.uniform_first_price_bid(v, 2), au.paranoid_best_bid(float(v), au.uniform_cdf, 0.0))
                for v in grid]
    else:
        header = ("delta", "first_price_revenue", "second_price_revenue", "virtual_surplus_bound")
        data = []
        for d in args.deltas.split(","):
            step = parse_number(d)
            values = ValueTypeSpace.uniform(au.uniform_grid(step), 2)
            fpa = au.build_auction(au.AuctionSpec("first_price", values))
            spa = au.build_auction(au.AuctionSpec("second_price", values))
            data.append((step, au.revenue(fpa, au.default_auction_profile(fpa)),
                         au.revenue(spa, au.default_auction_profile(spa)), au.virtual_surplus(values)))
    return series_to_csv(header, data)


# ---------------------------------------------------------------------------
# output

def render_table(rows) -> str:
    cols = ("status", "topic", "quantity", "expected", "measured", "tolerance")
    cells = [[r.status, r.fixture, r.quantity, _short(r.expected), _short(r.measured), _short(r.tolerance)]
             for r in rows]
    widths = [max(len(c), *(len(row[k]) for row in cells)) if cells else len(c) for k, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip()]
    for row, r in zip(cells, rows):
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        if r.detail and r.status != "PASS":
            lines.append(f"      {r.detail}")
    return "\n".join(lines) + "\n"


def _short(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.6g}"
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)
    return str(x)


def emit(args, rows, doc):
    payload = checks_to_csv(rows) if args.format == "csv" else dumps(doc)
    if args.out:
        Path(args.out).write_text(payload, encoding="utf-8")
        sys.stdout.write(render_table(rows))
    elif args.format:
        sys.stdout.write(payload)
    else:
        sys.stdout.write(render_table(rows))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the report to this file")
    common.add_argument("--format", choices=("csv", "doc"), help="report format (default: table only)")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled computations")

    p = argparse.ArgumentParser(prog="leakproof", description="Equilibria and mechanism checks under leakage.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("verify", parents=[common], help="check a no-leakage profile is an ε-equilibrium")
    s.add_argument("game")
    s.add_argument("profile")
    s.add_argument("--epsilon")
    s.set_defaults(run=cmd_verify)

    s = sub.add_parser("leakproof", parents=[common], help="check leakage-proofness against a type-space family")
    s.add_argument("game")
    s.add_argument("profile")
    s.add_argument("--family", default="minimal", help="minimal, equal, all-ck or a type-space file")
    s.add_argument("--epsilon")
    s.add_argument("--prune", action="store_true", help="prune the game against the profile first")
    s.set_defaults(run=cmd_leakproof)

    s = sub.add_parser("implements", parents=[common], help="check implementation of a social choice function")
    s.add_argument("game")
    s.add_argument("scf")
    s.add_argument("--family", default="minimal")
    s.add_argument("--profile", help="default profile (the game's default equilibrium when omitted)")
    s.set_defaults(run=cmd_implements)

    s = sub.add_parser("epic", parents=[common], help="ex-post incentive compatibility")
    s.add_argument("game")
    s.add_argument("profile")
    s.set_defaults(run=cmd_epic)

    s = sub.add_parser("auction", parents=[common], help="build a discretised auction and analyse it")
    s.add_argument("mechanism", choices=au.FORMATS, help="auction format")
    s.add_argument("--bidders", type=int, default=2)
    s.add_argument("--grid-min", default="0")
    s.add_argument("--grid-max", default="1")
    s.add_argument("--grid-step", default="1/20")
    s.add_argument("--reserve", help="a number or 'optimal'")
    s.add_argument("--tie-break", default="uniform_random", choices=au.TIE_RULES)
    s.add_argument("--order", default="none", help="none or fast:K (bidder K observes the others)")
    s.add_argument("--type-space", default="minimal", help="family for the leakage-proof check")
    s.set_defaults(run=cmd_auction)

    s = sub.add_parser("reproduce", parents=[common], help="run catalog fixtures")
    s.add_argument("fixtures", nargs="+", help="fixture names or 'all'")
    s.add_argument("--workers", type=int, help="worker processes (default from LEAKPROOF_THREADS)")
    s.set_defaults(run=cmd_reproduce)

    s = sub.add_parser("series", parents=[common], help="CSV series for plotting")
    s.add_argument("kind", choices=("bids", "revenue"))
    s.add_argument("--grid-step", default="1/20")
    s.add_argument("--deltas", default="1/10,1/20,1/40")
    s.set_defaults(run=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    random.seed(args.seed)
    np.random.seed(args.seed)
    try:
        if args.command == "series":
            payload = cmd_series(args)
            if args.out:
                Path(args.out).write_text(payload, encoding="utf-8")
            else:
                sys.stdout.write(payload)
            return 0
        rows, doc = args.run(args)
    except (UsageError, DocumentError, NoEquilibriumFound, FileNotFoundError, TypeSpaceError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    emit(args, rows, doc)
    return 0 if all(r.status in ("PASS", "XFAIL", "INFO") for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
