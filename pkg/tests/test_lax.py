import itertools
import random

import pytest

from laxkit.finrel import (
    Cospan, FinFun, FinSet, Rel, canonical_span, compose, compose_all, converse, difunctional_closure, graph,
    identity, identity_fun, is_difunctional, pushout, rel_predicates,
)
from laxkit.functors import zoo
from laxkit.lax import (
    IRel, RelSeq, barr_lift, barr_rows, check_barr_upper_bound, check_pair_triple_normality,
    difunctional_lax_value, difunctional_middle, laxification_approx, laxification_rows, lifted_compose,
    decomposition_count, decompositions, lifted_composite, lifted_composite_rows, literal_sequences, normality_search, pad_to_exact,
    reduce_triple_by_pushout, reduced_sequences, split_middle, to_irel, totalize_surjectivize, trim_sequence,
    verify_normality_violation,
)
from laxkit.samples import XY, chain_sequence, pentad_sequence, triple_sequence

import oracles
from helpers import canon, rand_identity_seq, rand_rel, rand_seq

RELAX_FUNCTORS = ["powerset", "monoid_sat3", "tuples_max2of3", "pentad"]


def all_rels(X, Y):
    for ps in oracles.all_relations(len(X), len(Y)):
        yield Rel(X, Y, frozenset((X.atoms[i], Y.atoms[j]) for i, j in ps))


def lifted_seq(F, rels):
    """Composite of Barr lifts, as a Rel on codes."""
    out = barr_lift(F, rels[0])
    for r in rels[1:]:
        out = compose(out, barr_lift(F, r))
    return out


# ---------------------------------------------------------------- Barr lift

@pytest.mark.parametrize("name", ["powerset", "monotone", "clique", "neighbourhood"])
def test_fast_barr_rows_match_generic(name):
    F = zoo(name)
    rng = random.Random(3)
    top = 2 if name == "neighbourhood" else 3
    for _ in range(60):
        n, m = rng.randint(0, top), rng.randint(0, top)
        ir = IRel(n, m, tuple(rng.getrandbits(m) if m else 0 for _ in range(n)))
        if name != "powerset" and len(ir.pairs()) > 5:
            continue  # the generic path enumerates F over the apex
        assert barr_rows(F, ir, fast=True) == barr_rows(F, ir, fast=False)


@pytest.mark.parametrize("name", ["powerset", "monoid_z2", "tuples_max2of3", "bounded_words", "monotone"])
def test_barr_matches_code_level_oracle(name):
    F = zoo(name)
    X, Y = canon(2, "x"), canon(2, "y")
    for r in all_rels(X, Y):
        assert barr_lift(F, r).pairs == oracles.barr_by_codes(F, X, Y, r.pairs)


def test_powerset_barr_is_egli_milner():
    F = zoo("powerset")
    for X, Y in [(canon(1, "x"), canon(2, "y")), (canon(2, "x"), canon(2, "y")), (canon(3, "x"), canon(2, "y"))]:
        for r in all_rels(X, Y):
            assert barr_lift(F, r).pairs == oracles.egli_milner(X, Y, r.pairs)
    X, Y = FinSet(("x",)), FinSet(("a", "b"))
    r = Rel(X, Y, frozenset({("x", "a"), ("x", "b")}))
    assert ("{x}", "{a,b}") in barr_lift(F, r).pairs and ("{}", "{a}") not in barr_lift(F, r).pairs


@pytest.mark.parametrize("name", ["powerset", "monoid_sat3", "tuples_max2of3", "pentad", "monotone", "neighbourhood"])
def test_barr_is_normal(name):
    F = zoo(name)
    for n in range(3):
        X = canon(n, "x")
        assert barr_lift(F, identity(X)) == identity(F.carrier(X))


def test_barr_independent_of_span_for_powerset():
    # a redundant span with every apex row duplicated gives the same lift
    F = zoo("powerset")
    rng = random.Random(5)
    for _ in range(40):
        r = rand_rel(rng, canon(2, "x"), canon(3, "y"))
        ps = r.sorted_pairs()
        A = FinSet(tuple(f"{k}:{i}" for i in range(len(ps)) for k in "ab"))
        p1 = FinFun(A, r.dom, {f"{k}:{i}": ps[i][0] for i in range(len(ps)) for k in "ab"})
        p2 = FinFun(A, r.cod, {f"{k}:{i}": ps[i][1] for i in range(len(ps)) for k in "ab"})
        L1, L2 = F.lift(p1), F.lift(p2)
        assert {(L1(w), L2(w)) for w in F.carrier(A)} == set(barr_lift(F, r).pairs)


@pytest.mark.parametrize("name", ["powerset", "monoid_z2", "tuples_max2of3", "hom_quotient", "triad", "monotone"])
def test_barr_preserves_converse(name):
    F = zoo(name)
    X, Y = canon(2, "x"), canon(2, "y")
    for r in all_rels(X, Y):
        assert barr_lift(F, converse(r)) == converse(barr_lift(F, r))


@pytest.mark.parametrize("name", RELAX_FUNCTORS)
def test_barr_is_relax_extension(name):
    F = zoo(name)
    rng = random.Random(11)
    sizes = [1, 2, 3] if name != "pentad" else [1, 2]
    for _ in range(25 if name == "pentad" else 60):
        X, Y, Z = (canon(rng.choice(sizes), p) for p in "xyz")
        r, s = rand_rel(rng, X, Y), rand_rel(rng, Y, Z)
        bigger = r | rand_rel(rng, X, Y, 0.3)
        assert barr_lift(F, r) <= barr_lift(F, bigger)
        assert barr_lift(F, compose(r, s)) <= compose(barr_lift(F, r), barr_lift(F, s))
        f = FinFun.from_indices(X, Y, [rng.randrange(len(Y)) for _ in X])
        Ff = graph(F.lift(f))
        assert Ff <= barr_lift(F, graph(f))
        assert converse(Ff) <= barr_lift(F, converse(graph(f)))


@pytest.mark.parametrize("name", ["powerset", "monotone", "clique"])
def test_composition_law_for_surjective_then_total(name):
    F = zoo(name)
    rng = random.Random(13)
    top = 2 if name != "powerset" else 3
    checked = 0
    for _ in range(300):
        X, Y, Z = (canon(rng.randint(1, top), p) for p in "xyz")
        r, s = rand_rel(rng, X, Y, 0.5), rand_rel(rng, Y, Z, 0.5)
        if not (rel_predicates(r).surjective and rel_predicates(s).total):
            continue
        checked += 1
        assert compose(barr_lift(F, r), barr_lift(F, s)) == barr_lift(F, compose(r, s))
    assert checked > 50


@pytest.mark.parametrize("name", ["powerset", "tuples_max2of3", "monoid_sat3"])
def test_composition_law_for_partial_functions(name):
    F = zoo(name)
    rng = random.Random(17)
    checked = 0
    for _ in range(400):
        X, Y, Z = (canon(rng.randint(1, 3), p) for p in "xyz")
        r, s = rand_rel(rng, X, Y, 0.3), rand_rel(rng, Y, Z, 0.3)
        if not (rel_predicates(r).converse_partial_function or rel_predicates(s).partial_function):
            continue
        checked += 1
        assert compose(barr_lift(F, r), barr_lift(F, s)) == barr_lift(F, compose(r, s))
    assert checked > 50


def test_composition_law_breaks_without_mono_quarter():
    # monotone fails mono-quarter, so some partial function composite is strict
    F = zoo("monotone")
    e = FinFun(FinSet(("0", "1", "2")), FinSet(("a", "b")), {"0": "a", "1": "a", "2": "b"})
    incl = Rel(FinSet(("*",)), e.cod, frozenset({("*", "a")}))
    r, s = incl, converse(graph(e))
    assert rel_predicates(r).partial_function
    assert barr_lift(F, compose(r, s)) != compose(barr_lift(F, r), barr_lift(F, s))


# ---------------------------------------------------------------- difunctional value

def test_difunctional_value_of_identity_cospan():
    F = zoo("monotone")
    X = canon(2, "x")
    assert difunctional_lax_value(F, Cospan(X, identity_fun(X), identity_fun(X))) == identity(F.carrier(X))


def test_difunctional_value_equals_barr_for_powerset():
    F = zoo("powerset")
    for n, m in itertools.product(range(4), repeat=2):
        if n * m > 6:
            continue
        X, Y = canon(n, "x"), canon(m, "y")
        for r in all_rels(X, Y):
            if not is_difunctional(r):
                continue
            c = pushout(canonical_span(r))
            assert difunctional_lax_value(F, c) == barr_lift(F, r)


def test_monotone_difunctional_value_exceeds_barr():
    F = zoo("monotone")
    e = FinFun(FinSet(("0", "1", "2")), FinSet(("a", "b")), {"0": "a", "1": "a", "2": "b"})
    incl = FinFun(FinSet(("*",)), e.cod, {"*": "a"})
    val = difunctional_lax_value(F, Cospan(e.cod, incl, e))
    r = compose(graph(incl), converse(graph(e)))
    barr = barr_lift(F, r)
    assert barr <= val and barr != val
    assert ("↑{{*}}", "↑{{0,1},{1,2}}") in val.pairs - barr.pairs


# ---------------------------------------------------------------- sequences and laxification

def _join(F, nx, seqs):
    out = {u: 0 for u in range(F.size(nx))}
    for seq in seqs:
        for u, row in lifted_composite_rows(F, seq).items():
            out[u] |= row
    return out


@pytest.mark.parametrize("name", ["monotone", "triad", "monoid_z2", "hom_quotient"])
def test_decomposition_join_equals_literal_join(name):
    F = zoo(name)
    for nx, ny in [(1, 1), (2, 1), (1, 2)]:
        lits = list(literal_sequences(nx, ny, 3, 2))
        for T in itertools.product(range(1 << ny), repeat=nx):
            target = IRel(nx, ny, T)
            want = _join(F, nx, [s for s in lits if _comp(s) == target])
            assert laxification_rows(F, target, 3, 2) == want
            below = _join(F, nx, [s for s in lits if _comp(s).leq(target)])
            assert _join(F, nx, decompositions(nx, ny, T, 3, 2, exact=False)) == below


def test_decomposition_count():
    for nx, ny, L, k in [(1, 1, 3, 2), (2, 2, 3, 3), (2, 1, 4, 2)]:
        T = (1 << ny) - 1
        n_all = sum(1 for _ in decompositions(nx, ny, (T,) * nx, L, k, exact=False))
        assert n_all == decomposition_count(nx, ny, L, k)


def test_reduced_family_misses_cancelling_mass():
    # Z/2 coefficients on unreachable middle elements cancel, so dropping them loses lift pairs
    F = zoo("monoid_z2")
    target = IRel(1, 1, (0,))
    red = _join(F, 1, reduced_sequences(1, 1, (0,), 3, 2, exact=True))
    full = laxification_rows(F, target, 3, 2)
    assert red == {0: 1, 1: 0} and full == {0: 1, 1: 2}
    for name in ("powerset", "tuples_max2of3", "monoid_sat3"):
        G = zoo(name)
        for T in itertools.product(range(4), repeat=2):
            assert _join(G, 2, reduced_sequences(2, 2, T, 3, 2, exact=True)) == laxification_rows(G, IRel(2, 2, T), 3, 2)


def _comp(seq):
    out = seq[0]
    for t in seq[1:]:
        out = out.then(t)
    return out


def test_laxification_length_one_is_barr():
    F = zoo("monotone")
    rng = random.Random(2)
    for _ in range(10):
        r = rand_rel(rng, canon(2, "x"), canon(2, "y"))
        assert laxification_approx(F, r, max_len=1, max_mid=1) == barr_lift(F, r)


def test_laxification_equals_barr_for_powerset():
    F = zoo("powerset")
    for X, Y in [(canon(1, "x"), canon(2, "y")), (canon(2, "x"), canon(1, "y")), (canon(2, "x"), canon(2, "y"))]:
        for r in all_rels(X, Y):
            assert laxification_approx(F, r, max_len=3, max_mid=3) == barr_lift(F, r)


def test_laxification_monotone_in_bounds():
    F = zoo("monotone")
    rng = random.Random(9)
    for _ in range(6):
        r = rand_rel(rng, canon(2, "x"), canon(2, "y"), 0.5)
        small = laxification_approx(F, r, 2, 2)
        big = laxification_approx(F, r, 3, 3)
        assert barr_lift(F, r) <= small <= big


def test_laxification_reaches_difunctional_value():
    # on a difunctional relation every normal lax extension takes the value (Fg)°.Ff
    F = zoo("monotone")
    e = FinFun(FinSet(("0", "1", "2")), FinSet(("a", "b")), {"0": "a", "1": "a", "2": "b"})
    incl = FinFun(FinSet(("*",)), e.cod, {"*": "a"})
    r = compose(graph(incl), converse(graph(e)))
    assert laxification_approx(F, r, 3, 3) == difunctional_lax_value(F, Cospan(e.cod, incl, e))


def test_pad_to_exact_dominates():
    rng = random.Random(21)
    F = zoo("tuples_max2of3")
    done = 0
    while done < 40:
        seq = rand_seq(rng, [2, rng.randint(1, 3), 2], 0.4)
        r = seq.composite() | rand_rel(rng, seq.dom, seq.cod, 0.3)
        padded = pad_to_exact(seq, r)
        assert padded.composite() == r
        a = lifted_composite_rows(F, seq.irels())
        b = lifted_composite_rows(F, padded.irels())
        assert all(a[u] & ~b[u] == 0 for u in a)
        done += 1


# ---------------------------------------------------------------- normality

def test_identity_sequence_has_no_violation():
    assert verify_normality_violation(zoo("pentad"), RelSeq((identity(XY),))) is None


def test_pentad_violation():
    F = zoo("pentad")
    w = verify_normality_violation(F, pentad_sequence())
    assert w is not None
    got = {F.decode(w.left, XY.atoms), F.decode(w.right, XY.atoms)}
    assert got == {F.decode("f(x,x,x,y,y)", XY.atoms), F.decode("g(x,x,y,y,y)", XY.atoms)}
    assert len(w.chain) == 5


def test_verify_rejects_non_identity():
    seq = rand_seq(random.Random(1), [2, 2, 2], 0.9)
    if seq.composite() != identity(seq.dom):
        with pytest.raises(ValueError):
            verify_normality_violation(zoo("powerset"), seq)


def test_pair_sequences_on_iso_quarter_functors():
    rng = random.Random(4)
    for name in ("pentad", "monotone", "tuples_max2of3", "triad"):
        F = zoo(name)
        for _ in range(20):
            seq = rand_identity_seq(rng, 2, 2, 3)
            assert verify_normality_violation(F, seq) is None


def test_normality_search_powerset_none():
    r = normality_search(zoo("powerset"), XY, max_len=3, max_mid=2)
    assert r.witness is None and r.mode == "exhaustive" and r.report().verdict == "none"


def test_normality_search_triad_none():
    r = normality_search(zoo("triad"), XY, max_len=3, max_mid=3)
    assert r.witness is None and r.mode == "exhaustive"


def test_normality_search_with_seed_pool():
    r = normality_search(zoo("pentad"), XY, seed_pool=[pentad_sequence()])
    assert r.mode == "seeded" and r.witness is not None


def test_normality_search_sampled_mode_is_reproducible():
    F = zoo("powerset")
    a = normality_search(F, XY, max_len=4, max_mid=3, budget=50, seed=7, ceiling=10)
    b = normality_search(F, XY, max_len=4, max_mid=3, budget=50, seed=7, ceiling=10)
    assert a.mode == "sampled" and a.examined == b.examined and a.witness is None


def test_neighbourhood_sequence_violation_is_reverified():
    r = normality_search(zoo("neighbourhood"), XY, max_len=2, max_mid=3)
    assert r.witness is not None
    assert verify_normality_violation(zoo("neighbourhood"), r.witness.seq) is not None


@pytest.mark.parametrize("name,verdict", [("monotone", "pass"), ("neighbourhood", "fail"), ("powerset", "pass"),
                                          ("monoid_z2", "fail"), ("hom_quotient", "fail"),
                                          ("tuples_max2of3", "pass")])
def test_pair_triple_normality(name, verdict):
    assert check_pair_triple_normality(zoo(name), 2).verdict == verdict


def test_pair_triple_matches_iso_quarter_at_bound_3():
    from laxkit.preservation import check_preservation

    for name in ("powerset", "monoid_z2", "monoid_sat3", "tuples_max2of3", "hom_quotient", "triad"):
        F = zoo(name)
        assert check_pair_triple_normality(F, 3).verdict == check_preservation(F, "iso-quarter", 3).verdict


# ---------------------------------------------------------------- constructions

def test_reduce_triple_examples():
    X = canon(2, "x")
    f = Rel(X, X, frozenset({("x0", "x1"), ("x1", "x0")}))
    rng = random.Random(6)
    r1, r3 = rand_rel(rng, X, X), rand_rel(rng, X, X)
    a, b = reduce_triple_by_pushout(r1, f, r3)
    assert compose(a, b) == compose_all([r1, f, r3])
    seq = triple_sequence()
    a, b = reduce_triple_by_pushout(*seq.rels)
    assert not rel_predicates(compose(a, b)).subidentity


def test_reduce_triple_is_closed_middle_composite():
    rng = random.Random(8)
    for _ in range(200):
        seq = rand_seq(rng, [2, rng.randint(1, 3), rng.randint(1, 3), 2])
        r1, r2, r3 = seq.rels
        a, b = reduce_triple_by_pushout(r1, r2, r3)
        assert compose(a, b) == compose_all([r1, difunctional_closure(r2), r3])


def test_split_middle_no_op_when_nothing_to_split():
    X = canon(2, "x")
    r = Rel(X, X, frozenset({("x0", "x0"), ("x0", "x1"), ("x1", "x1")}))
    assert split_middle(identity(X), r, identity(X)) == (identity(X), r, identity(X))


def _split_conditions(s1, s2, s3):
    cod1 = rel_predicates(s1).codomain
    dom3 = rel_predicates(s3).domain
    for z in s2.cod:
        pre = [y for y in s2.dom if (y, z) in s2.pairs]
        if len(pre) > 1 and z not in dom3:
            return False
    for y in s2.dom:
        img = [z for z in s2.cod if (y, z) in s2.pairs]
        if len(img) > 1 and y not in cod1:
            return False
    return True


def test_split_middle_properties():
    rng = random.Random(10)
    F = zoo("pentad")
    for k in range(150):
        seq = rand_seq(rng, [rng.randint(1, 2), rng.randint(1, 3), rng.randint(1, 3), rng.randint(1, 2)])
        out = RelSeq(split_middle(*seq.rels))
        assert out.composite() == seq.composite()
        assert _split_conditions(*out.rels)
        if k < 30:
            assert check_barr_upper_bound(F, seq, out)


def test_totalize_properties():
    rng = random.Random(12)
    for _ in range(150):
        seq = rand_identity_seq(rng, rng.randint(1, 3), rng.randint(3, 4), 3)
        out = totalize_surjectivize(seq)
        assert out.composite() == seq.composite()
        assert all(rel_predicates(r).total and rel_predicates(r).surjective for r in out.rels[1:-1])
    for name in ("tuples_max2of3", "powerset"):
        F = zoo(name)
        for _ in range(20):
            seq = rand_identity_seq(rng, 2, 3, 2)
            assert check_barr_upper_bound(F, seq, totalize_surjectivize(seq))


def test_totalize_chain_figure():
    seq = chain_sequence()
    assert totalize_surjectivize(seq).composite() == seq.composite()
    assert not rel_predicates(totalize_surjectivize(seq, single_star=True).composite()).subidentity


def test_totalize_needs_three_relations():
    with pytest.raises(ValueError):
        totalize_surjectivize(RelSeq((identity(XY), identity(XY))))


def test_trim_properties():
    rng = random.Random(14)
    F = zoo("tuples_max2of3")
    for k in range(150):
        seq = rand_identity_seq(rng, rng.randint(1, 3), rng.randint(2, 4), 3)
        out = trim_sequence(seq)
        assert out.composite() == seq.composite()
        assert all(rel_predicates(r).total and rel_predicates(r).surjective for r in out.rels)
        if k < 40:
            assert check_barr_upper_bound(F, seq, out)


def test_trim_chain_property_on_arbitrary_sequences():
    rng = random.Random(15)
    for _ in range(200):
        seq = rand_seq(rng, [rng.randint(1, 3) for _ in range(rng.randint(2, 5))])
        out = trim_sequence(seq)
        assert out.composite() == seq.composite()
        for a, b in zip(out.rels, out.rels[1:]):
            assert rel_predicates(a).codomain == rel_predicates(b).domain


def test_trim_pentad_sequence():
    t = trim_sequence(pentad_sequence())
    assert [sorted(r.pairs) for r in t.rels] == [
        [("x", "a2"), ("y", "a3")], [("a2", "b2"), ("a3", "b3")], [("b2", "c1"), ("b3", "c2")],
        [("c1", "x"), ("c2", "y")]]


def test_difunctional_closure_of_middle_keeps_identity():
    rng = random.Random(16)
    for _ in range(200):
        seq = rand_identity_seq(rng, rng.randint(1, 3), 3, 4, total_surjective=True)
        assert difunctional_middle(seq).composite() == identity(seq.dom)


def test_upper_bound_reflexive_and_composite_sensitive():
    F = zoo("powerset")
    seq = pentad_sequence()
    assert check_barr_upper_bound(F, seq, seq)
    other = RelSeq((identity(XY), Rel(XY, XY, frozenset())))
    assert not check_barr_upper_bound(F, RelSeq((identity(XY), identity(XY))), other)


def test_lifted_composite_matches_relation_composition():
    F = zoo("monotone")
    rng = random.Random(18)
    for _ in range(10):
        seq = rand_seq(rng, [2, 2, 1, 2])
        assert lifted_composite(F, seq) == lifted_seq(F, list(seq.rels))
        rows = [barr_rows(F, to_irel(r)) for r in seq.rels]
        acc = rows[0]
        for r in rows[1:]:
            acc = lifted_compose(acc, r)
        got = lifted_composite_rows(F, seq.irels())
        assert acc == tuple(got[u] for u in range(len(acc)))
        first = to_irel(seq.rels[0])
        assert laxification_rows(F, first, 1, 1) == dict(enumerate(barr_rows(F, first)))
