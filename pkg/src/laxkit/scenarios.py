"""Reference scenarios with known outcomes, run by ``laxkit paper-suite``."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Callable

from .finrel import FinFun, FinSet, compose, difunctional_closure, identity, rel_predicates
from .functors import monoid_analysis, saturating_monoid, zoo
from .lax import (
    check_pair_triple_normality, normality_search, reduce_triple_by_pushout, totalize_surjectivize,
    trim_sequence, verify_normality_violation,
)
from .preservation import Square, SquareShape, check_preservation, offending_pairs
from .samples import chain_sequence, pentad_functor, pentad_sequence, triple_sequence


@dataclass
class Outcome:
    name: str
    ok: bool
    detail: str


def _set_family(code: str) -> frozenset[frozenset[str]]:
    return frozenset(frozenset(a for a in inner.split(",") if a) for inner in re.findall(r"\{([^{}]*)\}", code))


def matches_up_to_renaming(code: str, expected: str, atoms: list[str], targets: list[str],
                           allowed: Callable[[dict[str, str]], bool] = lambda _: True) -> bool:
    """Is some bijection atoms -> targets (accepted by ``allowed``) turning code into expected?"""
    fam = _set_family(code)
    want = _set_family(expected)
    for perm in itertools.permutations(targets):
        ren = dict(zip(atoms, perm))
        if allowed(ren) and frozenset(frozenset(ren[a] for a in s) for s in fam) == want:
            return True
    return False


def neighbourhood_iso_quarter() -> Outcome:
    r = check_preservation(zoo("neighbourhood"), SquareShape.IsoQuarter, 2)
    w = r.witness or {}
    sizes = w.get("square", {}).get("sizes", {})
    shape_ok = sizes in ({"X": 0, "Y": 2, "Z": 1, "P": 0}, {"X": 2, "Y": 0, "Z": 1, "P": 0})
    ok = r.verdict == "fail" and shape_ok and "{{},{a}}" in w.get("offending_images", [])
    return Outcome("neighbourhood fails iso-quarter on (empty -> 1, 2 -> 1)", ok,
                   f"verdict={r.verdict} sizes={sizes} images={w.get('offending_images')}")


def _mono_quarter_witness_ok(w: dict) -> bool:
    sq = w["square"]
    if sq["sizes"] != {"X": 1, "Y": 3, "Z": 2, "P": 2}:
        return False
    g = sq["g"]["map"]
    b = next(iter(sq["f"]["map"].values()))
    # e : 3 -> 2 with {0,1} over the mono's point a and {2} over the other point
    def allowed(ren: dict[str, str]) -> bool:
        return all((g[y] == b) == (ren[y] in ("0", "1")) for y in g)
    return matches_up_to_renaming(w["pair"][1], "↑{{0,1},{1,2}}", list(g), ["0", "1", "2"], allowed)


def upset_mono_quarter(name: str) -> Outcome:
    F = zoo(name)
    iso = check_preservation(F, SquareShape.IsoQuarter, 3)
    epi = check_preservation(F, SquareShape.EpiAll, 2)
    mono = check_preservation(F, SquareShape.MonoQuarter, 3)
    ok = iso.passed and epi.passed and mono.verdict == "fail" and _mono_quarter_witness_ok(mono.witness)
    return Outcome(f"{name}: iso-quarter and epi-all pass, mono-quarter fails at e and B = {{a}}", ok,
                   f"iso={iso.verdict} epi={epi.verdict} mono={mono.verdict} pair={mono.witness and mono.witness['pair']}")


def monotone_map_example() -> Outcome:
    F = zoo("monotone")
    e = FinFun(FinSet(("0", "1", "2")), FinSet(("a", "b")), {"0": "a", "1": "a", "2": "b"})
    got = F.lift(e)("↑{{0,1},{1,2}}")
    return Outcome("monotone lift of e sends up{0,1} u up{1,2} to up{a}", got == "↑{{a}}", got)


def monoid_z2_scenarios() -> Outcome:
    F = zoo("monoid_z2")
    bang = FinFun(FinSet(("a", "b")), FinSet(("*",)), {"a": "*", "b": "*"})
    Fb = F.lift(bang)
    maps_ok = Fb("{a:1,b:1}") == "{}" and Fb("{}") == "{}"
    r = check_preservation(F, SquareShape.IsoQuarter, 2)
    ok = maps_ok and r.verdict == "fail" and r.witness["pair"] == ["{}", "{u:1,v:1}"] and r.witness["image"] == "{}"
    return Outcome("Z/2-valued functor fails iso-quarter with (0,0) and (u,v) over 0", ok,
                   f"maps_ok={maps_ok} verdict={r.verdict} pair={r.witness and r.witness['pair']}")


def saturating_monoid_analysis() -> Outcome:
    a = monoid_analysis(saturating_monoid(2))
    return Outcome("saturating {0,1,2} is positive and not refinable", a.positive and not a.refinable,
                   f"positive={a.positive} refinable={a.refinable} witnesses={a.witnesses}")


def pentad_scenarios() -> Outcome:
    F = pentad_functor()
    seq = pentad_sequence()
    X = seq.dom
    n2 = F.size(2)
    distinct = F.decode("f(x,x,x,y,y)", X.atoms) != F.decode("g(x,x,y,y,y)", X.atoms)
    w = verify_normality_violation(F, seq)
    pair_ok = w is not None and {
        F.decode(w.left, X.atoms), F.decode(w.right, X.atoms)
    } == {F.decode("f(x,x,x,y,y)", X.atoms), F.decode("g(x,x,y,y,y)", X.atoms)}
    iso = check_preservation(F, SquareShape.IsoQuarter, 2)
    pt = check_pair_triple_normality(F, 2)
    ok = seq.composite() == identity(X) and n2 < 64 and distinct and pair_ok and iso.passed and pt.passed
    return Outcome("pentad sequence: identity composite, lifted composite relates f(x,x,x,y,y) and g(x,x,y,y,y)",
                   ok, f"|F2|={n2} witness={w and (w.left, w.right)} iso={iso.verdict} pair_triple={pt.verdict}")


def pentad_trim() -> Outcome:
    t = trim_sequence(pentad_sequence())
    want = [{("x", "a2"), ("y", "a3")}, {("a2", "b2"), ("a3", "b3")},
            {("b2", "c1"), ("b3", "c2")}, {("c1", "x"), ("c2", "y")}]
    got = [set(r.pairs) for r in t.rels]
    ok = got == want and all(rel_predicates(r).total and rel_predicates(r).surjective for r in t.rels)
    return Outcome("trimming the pentad sequence keeps exactly the surviving elements", ok, str(got))


def triad_normality() -> Outcome:
    r = normality_search(zoo("triad"), FinSet(("x", "y")), max_len=3, max_mid=3)
    return Outcome("triad functor: no normality violation within (3, 3)", r.witness is None and r.mode == "exhaustive",
                   f"mode={r.mode} examined={r.examined}")


def words_kernel_square() -> Outcome:
    F = zoo("bounded_words")
    r = check_preservation(F, SquareShape.EpiAll, 2)
    kernel = Square(((2, 2),), (0, 0), (0, 0))
    codes = set()
    if r.verdict == "fail":
        X, Y, _, _ = kernel.sets()
        codes = {(F.encode(F.elements(2)[u], X.atoms), F.encode(F.elements(2)[v], Y.atoms))
                 for u, v in offending_pairs(F, kernel)}
    ok = (r.verdict == "fail" and r.witness["square"]["sizes"] == {"X": 2, "Y": 2, "Z": 1, "P": 4}
          and ("010", "uv") in codes)
    return Outcome("words modulo xxx = xx fail epi-all on the kernel square of 2 -> 1 at aba / ab", ok,
                   f"verdict={r.verdict} first={r.witness and r.witness['pair']} aba/ab offending={('010', 'uv') in codes}")


def triple_figure() -> Outcome:
    seq = triple_sequence()
    r1, r2, r3 = seq.rels
    added = difunctional_closure(r2).pairs - r2.pairs
    a, b = reduce_triple_by_pushout(r1, r2, r3)
    sub = rel_predicates(compose(a, b)).subidentity
    ok = seq.composite() == identity(seq.dom) and added == {("a2", "b3")} and not sub
    return Outcome("closing the middle relation adds (a2,b3) and breaks the identity composite", ok,
                   f"added={sorted(added)} composite={sorted(compose(a, b).pairs)}")


def chain_figure() -> Outcome:
    seq = chain_sequence()
    two = totalize_surjectivize(seq)
    one = totalize_surjectivize(seq, single_star=True)
    inner_ok = all(rel_predicates(r).total and rel_predicates(r).surjective for r in two.rels[1:-1])
    ok = two.composite() == seq.composite() and inner_ok and not rel_predicates(one.composite()).subidentity
    return Outcome("adding 0 and 1 keeps the composite; a single fresh element does not", ok,
                   f"composite={sorted(seq.composite().pairs)} single={sorted(one.composite().pairs)}")


def powerset_general() -> Outcome:
    r = check_preservation(zoo("powerset"), SquareShape.General, 3)
    return Outcome("powerset weakly preserves all pullbacks up to size 3", r.passed, r.verdict)


SCENARIOS: list[Callable[[], Outcome]] = [
    neighbourhood_iso_quarter,
    lambda: upset_mono_quarter("monotone"),
    lambda: upset_mono_quarter("clique"),
    monotone_map_example,
    monoid_z2_scenarios,
    saturating_monoid_analysis,
    words_kernel_square,
    pentad_scenarios,
    pentad_trim,
    triad_normality,
    triple_figure,
    chain_figure,
    powerset_general,
]


def run_all() -> list[Outcome]:
    return [s() for s in SCENARIOS]
