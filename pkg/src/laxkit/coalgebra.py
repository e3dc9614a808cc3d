"""Finite F-coalgebras, behavioural equivalence and L-(bi)simulations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

from .finrel import FinSet, Rel, canonical_span, converse, is_difunctional, pushout
from .functors import Elem, Functor, build_functor, zoo
from .lax import _barr, laxification_rows, to_irel


@dataclass(frozen=True)
class Coalgebra:
    states: FinSet
    structure: Mapping[str, str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "structure", dict(self.structure))
        if set(self.structure) != set(self.states.atoms):
            raise ValueError("structure must assign a code to every state")

    def raw(self, F: Functor) -> list[Elem]:
        """Structure as raw elements of F(n), in state order."""
        return [F.decode(self.structure[s], self.states.atoms) for s in self.states]

    def indices(self, F: Functor) -> list[int]:
        ix = F.index(len(self.states))
        return [ix[e] for e in self.raw(F)]

    def to_json(self, F: Functor | None = None) -> dict[str, Any]:
        d: dict[str, Any] = {"states": list(self.states.atoms), "structure": {s: self.structure[s] for s in self.states}}
        if F is not None:
            d = {"functor": F.spec_json(), **d}
        return d

    @classmethod
    def from_raw(cls, F: Functor, states: FinSet, elems: list[Elem]) -> Coalgebra:
        return cls(states, {s: F.encode(e, states.atoms) for s, e in zip(states, elems)})


def coalgebra_from_json(d: dict[str, Any]) -> tuple[Functor | None, Coalgebra]:
    fspec = d.get("functor")
    F = None
    if isinstance(fspec, str):
        F = zoo(fspec)
    elif isinstance(fspec, dict):
        F = build_functor(fspec)
    states = FinSet(tuple(d["states"]))
    co = Coalgebra(states, dict(d["structure"]))
    if F is not None:
        co.raw(F)  # every code must decode
    return F, co


# ---------------------------------------------------------------- behavioural equivalence

def _refine(F: Functor, elems: list[Elem]) -> list[int]:
    """Coarsest partition whose quotient map q satisfies ker(q) = ker(Fq . gamma)."""
    n = len(elems)
    block = [0] * n
    k = 1 if n else 0
    while True:
        keys: dict[tuple, int] = {}
        nxt = []
        for s in range(n):
            key = (block[s], F.map_elem(elems[s], tuple(block), k))
            nxt.append(keys.setdefault(key, len(keys)))
        if len(keys) == k:
            return nxt
        block, k = nxt, len(keys)


def behavioural_equivalence(F: Functor, a: Coalgebra, b: Coalgebra) -> Rel:
    na, nb = len(a.states), len(b.states)
    inl = tuple(range(na))
    inr = tuple(range(na, na + nb))
    elems = [F.map_elem(e, inl, na + nb) for e in a.raw(F)] + [F.map_elem(e, inr, na + nb) for e in b.raw(F)]
    block = _refine(F, elems)
    return Rel(a.states, b.states, frozenset(
        (x, y) for i, x in enumerate(a.states) for j, y in enumerate(b.states) if block[i] == block[na + j]))


# ---------------------------------------------------------------- L-simulations

def parse_backend(backend: str) -> tuple[str, tuple[int, ...]]:
    if backend in ("barr", "difunctional-exact"):
        return backend, ()
    parts = backend.split(":")
    if parts[0] == "laxify" and len(parts) == 3:
        try:
            return "laxify", (int(parts[1]), int(parts[2]))
        except ValueError:
            pass
    raise ValueError(f"unknown backend {backend!r} (expected barr, laxify:K:M or difunctional-exact)")


def _violations(F: Functor, s: Rel, a: Coalgebra, b: Coalgebra, backend: str) -> set[tuple[str, str]]:
    """Pairs (x, y) of s with (alpha x, beta y) outside L s."""
    kind, params = parse_backend(backend)
    if not s.pairs:
        return set()
    ai, bi = a.indices(F), b.indices(F)
    X, Y = a.states.index, b.states.index
    if kind == "barr":
        lb = _barr(F, to_irel(s))
        return {(x, y) for x, y in s.pairs if not lb.row(ai[X[x]]) >> bi[Y[y]] & 1}
    if kind == "laxify":
        k, m = params
        rows = laxification_rows(F, to_irel(s), k, m, sources=sorted({ai[X[x]] for x, _ in s.pairs}))
        return {(x, y) for x, y in s.pairs if not rows[ai[X[x]]] >> bi[Y[y]] & 1}
    if not is_difunctional(s):
        raise ValueError("the difunctional-exact backend needs a difunctional relation")
    c = pushout(canonical_span(s))
    nz = len(c.apex)
    ar, br = a.raw(F), b.raw(F)
    # for difunctional s = g°.f the value of any normal lax extension is (Fg)°.Ff
    fa = [F.map_elem(e, c.left.idx, nz) for e in ar]
    gb = [F.map_elem(e, c.right.idx, nz) for e in br]
    return {(x, y) for x, y in s.pairs if fa[X[x]] != gb[Y[y]]}


def is_L_simulation(F: Functor, s: Rel, a: Coalgebra, b: Coalgebra, backend: str = "barr") -> bool:
    if s.dom != a.states or s.cod != b.states:
        raise ValueError("relation does not run between the coalgebras' state sets")
    return not _violations(F, s, a, b, backend)


def is_L_bisimulation(F: Functor, s: Rel, a: Coalgebra, b: Coalgebra, backend: str = "barr") -> bool:
    return is_L_simulation(F, s, a, b, backend) and is_L_simulation(F, converse(s), b, a, backend)


def greatest_L_bisimulation(F: Functor, a: Coalgebra, b: Coalgebra, backend: str = "barr") -> Rel:
    """Greatest fixpoint from the full relation; every round drops all violating pairs at once."""
    s = Rel.full(a.states, b.states)
    while True:
        bad = _violations(F, s, a, b, backend)
        bad |= {(x, y) for y, x in _violations(F, converse(s), b, a, backend)}
        if not bad:
            return s
        s = Rel(a.states, b.states, s.pairs - bad)
