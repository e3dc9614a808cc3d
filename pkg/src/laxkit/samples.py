"""Named sample data: the pentad sequence and two small hand-drawn sequences."""

from __future__ import annotations

import json
from importlib import resources

from .finrel import FinSet, Rel, identity, rel_from_json
from .functors import Functor, build_functor
from .lax import RelSeq


def _load(name: str):
    return json.loads(resources.files("laxkit").joinpath("fixtures").joinpath(name).read_text(encoding="utf-8"))


def pentad_functor() -> Functor:
    return build_functor(_load("pentad.json"))


def sequence_from_json(data: list) -> RelSeq:
    rels = [rel_from_json(d) for d in data]
    # consecutive relations must share their middle set exactly
    for i in range(1, len(rels)):
        if rels[i].dom.atoms != rels[i - 1].cod.atoms:
            raise ValueError(f"relation {i} does not start where relation {i - 1} ends")
        rels[i] = Rel(rels[i - 1].cod, rels[i].cod, rels[i].pairs)
    return RelSeq(tuple(rels))


def pentad_sequence() -> RelSeq:
    seq = sequence_from_json(_load("pentad_seq.json"))
    # a transcription error in the fixture would surface here, not in the engine
    assert seq.composite() == identity(seq.dom), "pentad fixture composite is not the identity"
    return seq


def _rel(dom: FinSet, cod: FinSet, pairs) -> Rel:
    return Rel(dom, cod, frozenset(pairs))


XY = FinSet(("x", "y"))


def triple_sequence() -> RelSeq:
    """Three relations with identity composite whose closed middle breaks it."""
    X1 = FinSet(("a1", "a2", "a3", "a4"))
    X2 = FinSet(("b1", "b2", "b3", "b4"))
    r1 = _rel(XY, X1, [("x", "a1"), ("x", "a2"), ("y", "a4")])
    r2 = _rel(X1, X2, [("a1", "b1"), ("a2", "b2"), ("a3", "b2"), ("a3", "b3"), ("a4", "b4")])
    r3 = _rel(X2, XY, [("b1", "x"), ("b3", "y"), ("b4", "y")])
    return RelSeq((r1, r2, r3))


def chain_sequence() -> RelSeq:
    """Four relations with non-total, non-surjective middle relations."""
    X1 = FinSet(("a1", "a2"))
    X2 = FinSet(("b1", "b2"))
    X3 = FinSet(("c1", "c2"))
    return RelSeq((
        _rel(XY, X1, [("x", "a1"), ("y", "a2")]),
        _rel(X1, X2, [("a1", "b2")]),
        _rel(X2, X3, [("b1", "c2")]),
        _rel(X3, XY, [("c1", "x"), ("c2", "y")]),
    ))
