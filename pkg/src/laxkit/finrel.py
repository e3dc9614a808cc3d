"""Finite sets, total functions and binary relations between them."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping


class InterfaceError(ValueError):
    """Raised when two values do not fit together (e.g. a middle-set mismatch)."""


@dataclass(frozen=True)
class FinSet:
    atoms: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if len(set(self.atoms)) != len(self.atoms):
            raise ValueError(f"duplicate atoms in {self.atoms!r}")

    def __len__(self) -> int:
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    def __contains__(self, a: object) -> bool:
        return a in self.index

    @cached_property
    def index(self) -> dict[str, int]:
        return {a: i for i, a in enumerate(self.atoms)}

    @classmethod
    def canonical(cls, n: int, prefix: str = "") -> FinSet:
        return cls(tuple(f"{prefix}{i}" for i in range(n)))


@dataclass(frozen=True)
class FinFun:
    dom: FinSet
    cod: FinSet
    map: Mapping[str, str] = field(hash=False, compare=False)
    idx: tuple[int, ...] = field(init=False)

    def __post_init__(self) -> None:
        m = dict(self.map)
        if set(m) != set(self.dom.atoms):
            raise ValueError("function is not total on its domain")
        for v in m.values():
            if v not in self.cod:
                raise ValueError(f"image atom {v!r} outside the codomain")
        object.__setattr__(self, "map", m)
        object.__setattr__(self, "idx", tuple(self.cod.index[m[a]] for a in self.dom.atoms))

    def __call__(self, a: str) -> str:
        return self.map[a]

    @classmethod
    def from_indices(cls, dom: FinSet, cod: FinSet, idx: Iterable[int]) -> FinFun:
        return cls(dom, cod, {a: cod.atoms[j] for a, j in zip(dom.atoms, idx)})

    def image(self) -> set[str]:
        return set(self.map.values())

    def is_injective(self) -> bool:
        return len(set(self.idx)) == len(self.idx)

    def is_surjective(self) -> bool:
        return len(set(self.idx)) == len(self.cod)

    def then(self, g: FinFun) -> FinFun:
        """Diagrammatic composite: first self, then g."""
        if g.dom != self.cod:
            raise InterfaceError("functions are not composable")
        return FinFun(self.dom, g.cod, {a: g.map[b] for a, b in self.map.items()})


def identity_fun(X: FinSet) -> FinFun:
    return FinFun(X, X, {a: a for a in X})


@dataclass(frozen=True)
class Rel:
    dom: FinSet
    cod: FinSet
    pairs: frozenset[tuple[str, str]]

    def __post_init__(self) -> None:
        ps = frozenset((x, y) for x, y in self.pairs)
        for x, y in ps:
            if x not in self.dom or y not in self.cod:
                raise ValueError(f"pair {(x, y)!r} outside {self.dom.atoms} x {self.cod.atoms}")
        object.__setattr__(self, "pairs", ps)

    def __le__(self, other: Rel) -> bool:
        return self.pairs <= other.pairs

    def __or__(self, other: Rel) -> Rel:
        _same_type(self, other)
        return Rel(self.dom, self.cod, self.pairs | other.pairs)

    def __and__(self, other: Rel) -> Rel:
        _same_type(self, other)
        return Rel(self.dom, self.cod, self.pairs & other.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def image(self, xs: Iterable[str]) -> set[str]:
        s = set(xs)
        return {y for x, y in self.pairs if x in s}

    def preimage(self, ys: Iterable[str]) -> set[str]:
        s = set(ys)
        return {x for x, y in self.pairs if y in s}

    def sorted_pairs(self) -> list[tuple[str, str]]:
        di, ci = self.dom.index, self.cod.index
        return sorted(self.pairs, key=lambda p: (di[p[0]], ci[p[1]]))

    @classmethod
    def empty(cls, X: FinSet, Y: FinSet) -> Rel:
        return cls(X, Y, frozenset())

    @classmethod
    def full(cls, X: FinSet, Y: FinSet) -> Rel:
        return cls(X, Y, frozenset((x, y) for x in X for y in Y))


def _same_type(r: Rel, s: Rel) -> None:
    if r.dom != s.dom or r.cod != s.cod:
        raise InterfaceError("relations have different types")


def identity(X: FinSet) -> Rel:
    return Rel(X, X, frozenset((x, x) for x in X))


def graph(f: FinFun) -> Rel:
    return Rel(f.dom, f.cod, frozenset(f.map.items()))


def compose(r: Rel, s: Rel) -> Rel:
    """r first, then s."""
    if r.cod != s.dom:
        raise InterfaceError(f"middle sets differ: {r.cod.atoms} vs {s.dom.atoms}")
    succ: dict[str, list[str]] = {}
    for y, z in s.pairs:
        succ.setdefault(y, []).append(z)
    return Rel(r.dom, s.cod, frozenset((x, z) for x, y in r.pairs for z in succ.get(y, ())))


def compose_all(rels: Iterable[Rel]) -> Rel:
    rels = list(rels)
    if not rels:
        raise InterfaceError("empty sequence has no composite")
    out = rels[0]
    for r in rels[1:]:
        out = compose(out, r)
    return out


def converse(r: Rel) -> Rel:
    return Rel(r.cod, r.dom, frozenset((y, x) for x, y in r.pairs))


@dataclass(frozen=True)
class RelPredicates:
    total: bool
    surjective: bool
    partial_function: bool
    converse_partial_function: bool
    subidentity: bool
    domain: frozenset[str]
    codomain: frozenset[str]


def rel_predicates(r: Rel) -> RelPredicates:
    dom = frozenset(x for x, _ in r.pairs)
    cod = frozenset(y for _, y in r.pairs)
    out_deg: dict[str, int] = {}
    in_deg: dict[str, int] = {}
    for x, y in r.pairs:
        out_deg[x] = out_deg.get(x, 0) + 1
        in_deg[y] = in_deg.get(y, 0) + 1
    return RelPredicates(
        total=len(dom) == len(r.dom),
        surjective=len(cod) == len(r.cod),
        partial_function=all(d <= 1 for d in out_deg.values()),
        converse_partial_function=all(d <= 1 for d in in_deg.values()),
        # a subidentity only makes sense on a single carrier
        subidentity=r.dom == r.cod and all(x == y for x, y in r.pairs),
        domain=dom,
        codomain=cod,
    )


def is_difunctional(r: Rel) -> bool:
    succ: dict[str, set[str]] = {}
    for x, y in r.pairs:
        succ.setdefault(x, set()).add(y)
    # zigzag: rows of r that share a column must coincide
    rows = list(succ.values())
    for i, a in enumerate(rows):
        for b in rows[i + 1:]:
            if a & b and a != b:
                return False
    return True


def difunctional_closure(r: Rel, method: str = "fixpoint") -> Rel:
    if method == "fixpoint":
        rc = converse(r)
        acc = r
        step = r
        while True:
            step = compose(compose(step, rc), r)
            nxt = acc | step
            if nxt == acc:
                return acc
            acc = nxt
    if method == "pushout":
        c = pushout(canonical_span(r))
        return compose(graph(c.left), converse(graph(c.right)))
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class Span:
    apex: FinSet
    left: FinFun
    right: FinFun

    def __post_init__(self) -> None:
        if self.left.dom != self.apex or self.right.dom != self.apex:
            raise InterfaceError("span legs must start at the apex")

    def relation(self) -> Rel:
        return compose(converse(graph(self.left)), graph(self.right))


@dataclass(frozen=True)
class Cospan:
    apex: FinSet
    left: FinFun
    right: FinFun

    def __post_init__(self) -> None:
        if self.left.cod != self.apex or self.right.cod != self.apex:
            raise InterfaceError("cospan legs must end at the apex")

    def relation(self) -> Rel:
        """The relation right° . left between the two feet."""
        return compose(graph(self.left), converse(graph(self.right)))


def pair_label(x: str, y: str) -> str:
    return f"({x},{y})"


def canonical_span(r: Rel) -> Span:
    ps = r.sorted_pairs()
    apex = FinSet(tuple(pair_label(x, y) for x, y in ps))
    left = FinFun(apex, r.dom, {pair_label(x, y): x for x, y in ps})
    right = FinFun(apex, r.cod, {pair_label(x, y): y for x, y in ps})
    return Span(apex, left, right)


def pullback(c: Cospan) -> Span:
    f, g = c.left, c.right
    ps = [(x, y) for x in f.dom for y in g.dom if f.map[x] == g.map[y]]
    apex = FinSet(tuple(pair_label(x, y) for x, y in ps))
    left = FinFun(apex, f.dom, {pair_label(x, y): x for x, y in ps})
    right = FinFun(apex, g.dom, {pair_label(x, y): y for x, y in ps})
    return Span(apex, left, right)


def _disjoint_labels(X: FinSet, Y: FinSet) -> tuple[list[str], list[str]]:
    if set(X.atoms) & set(Y.atoms):
        return [f"0:{a}" for a in X], [f"1:{b}" for b in Y]
    return list(X.atoms), list(Y.atoms)


def pushout(s: Span) -> Cospan:
    X, Y = s.left.cod, s.right.cod
    n = len(X)
    parent = list(range(n + len(Y)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for w in s.apex:
        a, b = find(X.index[s.left.map[w]]), find(n + Y.index[s.right.map[w]])
        if a != b:
            # keep the least index as root so class names are least members
            parent[max(a, b)] = min(a, b)
    xl, yl = _disjoint_labels(X, Y)
    labels = xl + yl
    roots = sorted({find(i) for i in range(len(parent))})
    name = {rt: f"[{labels[rt]}]" for rt in roots}
    apex = FinSet(tuple(name[rt] for rt in roots))
    left = FinFun(X, apex, {a: name[find(i)] for i, a in enumerate(X)})
    right = FinFun(Y, apex, {b: name[find(n + j)] for j, b in enumerate(Y)})
    return Cospan(apex, left, right)


def epi_mono_factorize(f: FinFun) -> tuple[FinFun, FinFun]:
    img = f.image()
    mid = FinSet(tuple(b for b in f.cod if b in img))
    e = FinFun(f.dom, mid, dict(f.map))
    m = FinFun(mid, f.cod, {b: b for b in mid})
    return e, m


# JSON forms

def finset_to_json(X: FinSet) -> list[str]:
    return list(X.atoms)


def finset_from_json(d: object) -> FinSet:
    if not isinstance(d, list) or not all(isinstance(a, str) for a in d):
        raise ValueError("a set must be a JSON array of strings")
    return FinSet(tuple(d))


def finfun_to_json(f: FinFun) -> dict:
    return {"dom": list(f.dom.atoms), "cod": list(f.cod.atoms), "map": {a: f.map[a] for a in f.dom}}


def finfun_from_json(d: dict) -> FinFun:
    return FinFun(finset_from_json(d["dom"]), finset_from_json(d["cod"]), dict(d["map"]))


def rel_to_json(r: Rel) -> dict:
    return {"dom": list(r.dom.atoms), "cod": list(r.cod.atoms), "pairs": [list(p) for p in r.sorted_pairs()]}


def rel_from_json(d: dict) -> Rel:
    return Rel(finset_from_json(d["dom"]), finset_from_json(d["cod"]),
               frozenset((p[0], p[1]) for p in d["pairs"]))
