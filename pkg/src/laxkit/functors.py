"""Finite set-functors presented by element enumeration and a map action.

Every functor works internally on canonical sets {0..n-1}: elements are plain
hashable values, maps are index tuples. Codes (strings) only appear at the
boundary via ``carrier``/``lift``/``encode``/``decode``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Any, Callable, Hashable, Iterable, Sequence

from .finrel import FinFun, FinSet
from .report import Report

DEFAULT_RAW_CAP = 2_000_000
_FMAP_MEMO_LIMIT = 200_000


class SizeGuardError(RuntimeError):
    pass


class SpecError(ValueError):
    pass


Elem = Hashable
IdxMap = tuple[int, ...]


class Functor:
    """Base class; subclasses provide raw_count, _build, map_elem, encode."""

    kind = "abstract"

    def __init__(self, name: str, params: dict[str, Any] | None = None, raw_cap: int = DEFAULT_RAW_CAP):
        self.name = name
        self.params = dict(params or {})
        self.raw_cap = raw_cap
        self._elems: dict[int, list[Elem]] = {}
        self._index: dict[int, dict[Elem, int]] = {}
        self._fmap: dict[tuple[IdxMap, int], IdxMap] = {}
        self._decode: dict[tuple[str, ...], dict[str, Elem]] = {}

    def __repr__(self) -> str:
        return f"<Functor {self.name}>"

    # -- subclass hooks
    def raw_count(self, n: int) -> int:
        raise NotImplementedError

    def _build(self, n: int) -> list[Elem]:
        raise NotImplementedError

    def map_elem(self, e: Elem, f: IdxMap, m: int) -> Elem:
        raise NotImplementedError

    def encode(self, e: Elem, atoms: Sequence[str]) -> str:
        raise NotImplementedError

    def barr_row(self, n: int, m: int, pairs: Sequence[tuple[int, int]], u: int) -> int | None:
        """Closed-form Barr row for element index u of F(n), or None if absent."""
        return None

    def spec_json(self) -> dict[str, Any]:
        return {"kind": self.kind, **self.params}

    # -- derived, memoized
    def check_guard(self, n: int) -> None:
        c = self.raw_count(n)
        if c > self.raw_cap:
            raise SizeGuardError(f"{self.name}: {c} raw elements over a {n}-set exceeds cap {self.raw_cap}")

    def elements(self, n: int) -> list[Elem]:
        es = self._elems.get(n)
        if es is None:
            self.check_guard(n)
            es = self._build(n)
            self._elems[n] = es
        return es

    def index(self, n: int) -> dict[Elem, int]:
        ix = self._index.get(n)
        if ix is None:
            ix = {e: i for i, e in enumerate(self.elements(n))}
            self._index[n] = ix
        return ix

    def size(self, n: int) -> int:
        return len(self.elements(n))

    def fmap_idx(self, f: IdxMap, m: int) -> IdxMap:
        key = (f, m)
        r = self._fmap.get(key)
        if r is None:
            ix = self.index(m)
            r = tuple(ix[self.map_elem(e, f, m)] for e in self.elements(len(f)))
            if len(self._fmap) > _FMAP_MEMO_LIMIT:
                self._fmap.clear()
            self._fmap[key] = r
        return r

    def carrier(self, X: FinSet) -> FinSet:
        return FinSet(tuple(self.encode(e, X.atoms) for e in self.elements(len(X))))

    def lift(self, f: FinFun) -> FinFun:
        FX, FY = self.carrier(f.dom), self.carrier(f.cod)
        return FinFun.from_indices(FX, FY, self.fmap_idx(f.idx, len(f.cod)))

    def decode(self, code: str, atoms: Sequence[str]) -> Elem:
        key = tuple(atoms)
        table = self._decode.get(key)
        if table is None:
            table = {self.encode(e, atoms): e for e in self.elements(len(atoms))}
            self._decode[key] = table
        try:
            return table[code]
        except KeyError:
            raise SpecError(f"{code!r} is not an element code of {self.name} over {list(atoms)}") from None

    def enumerate_elements(self, X: FinSet) -> FinSet:
        return self.carrier(X)

    def apply_map(self, f: FinFun) -> FinFun:
        return self.lift(f)


FunctorHandle = Functor


# ---------------------------------------------------------------- helpers

def _bits(x: int) -> Iterable[int]:
    i = 0
    while x:
        if x & 1:
            yield i
        x >>= 1
        i += 1


def _subset_code(s: int, atoms: Sequence[str]) -> str:
    return "{" + ",".join(atoms[i] for i in _bits(s)) + "}"


def _subset_key(s: int) -> tuple[int, ...]:
    return tuple(_bits(s))


def _preimage_table(f: IdxMap, m: int) -> list[int]:
    """pre[B] = mask of i with f(i) in B, for every B subset of m."""
    pre = [0] * (1 << m)
    single = [0] * m
    for i, j in enumerate(f):
        single[j] |= 1 << i
    for B in range(1, 1 << m):
        low = (B & -B).bit_length() - 1
        pre[B] = pre[B & (B - 1)] | single[low]
    return pre


def _image_table(rows: Sequence[int], n: int) -> list[int]:
    """img[A] = union of rows[i] for i in A."""
    img = [0] * (1 << n)
    for A in range(1, 1 << n):
        low = (A & -A).bit_length() - 1
        img[A] = img[A & (A - 1)] | rows[low]
    return img


def _rel_rows(n: int, m: int, pairs: Sequence[tuple[int, int]]) -> tuple[list[int], list[int]]:
    fwd, bwd = [0] * n, [0] * m
    for x, y in pairs:
        fwd[x] |= 1 << y
        bwd[y] |= 1 << x
    return fwd, bwd


def _parse_braced_sets(code: str, atoms: Sequence[str]) -> list[int]:
    """Parse '{{a},{a,b}}' (outer braces already stripped by caller) into masks."""
    ix = {a: i for i, a in enumerate(atoms)}
    out = []
    for inner in re.findall(r"\{([^{}]*)\}", code):
        mask = 0
        for a in (t for t in inner.split(",") if t != ""):
            if a not in ix:
                raise SpecError(f"unknown atom {a!r} in {code!r}")
            mask |= 1 << ix[a]
        out.append(mask)
    return out


# ---------------------------------------------------------------- powerset

class Powerset(Functor):
    kind = "powerset"

    def raw_count(self, n: int) -> int:
        return 1 << n

    def _build(self, n: int) -> list[Elem]:
        return list(range(1 << n))

    def map_elem(self, e: int, f: IdxMap, m: int) -> int:
        out = 0
        for i in _bits(e):
            out |= 1 << f[i]
        return out

    def encode(self, e: int, atoms: Sequence[str]) -> str:
        return _subset_code(e, atoms)

    def decode(self, code: str, atoms: Sequence[str]) -> int:
        if not (code.startswith("{") and code.endswith("}")):
            raise SpecError(f"{code!r} is not a subset code")
        ms = _parse_braced_sets(code, atoms)
        return ms[0]

    def barr_row(self, n, m, pairs, u):
        fwd, bwd = _rel_rows(n, m, pairs)
        img = 0
        for i in _bits(u):
            img |= fwd[i]
        row = 0
        for v in range(1 << m):
            if v & ~img:
                continue
            pre = 0
            for j in _bits(v):
                pre |= bwd[j]
            if u & ~pre == 0:
                row |= 1 << v
        return row


# ---------------------------------------------------------------- neighbourhood family

def _upsets(n: int) -> list[int]:
    """All upward-closed families of subsets of n, as masks over 2^n subsets."""
    ups = [0, 1]  # n = 0: {} and {{}}
    for k in range(n):
        half = 1 << k
        nxt = []
        for u0 in ups:
            for u1 in ups:
                # sets without atom k form u0, sets with atom k (projected) form u1
                if u0 & ~u1 == 0:
                    nxt.append(u0 | (u1 << half))
        ups = nxt
    return sorted(ups)


def _minimal_sets(e: int) -> list[int]:
    mem = list(_bits(e))
    return [A for A in mem if not any(B != A and B & A == B for B in mem)]


def _ordered_subsets(masks: Iterable[int]) -> list[int]:
    return sorted(masks, key=_subset_key)


class Neighbourhood(Functor):
    kind = "neighbourhood"

    def raw_count(self, n: int) -> int:
        return 1 << (1 << n)

    def _build(self, n: int) -> list[Elem]:
        return list(range(1 << (1 << n)))

    def map_elem(self, e: int, f: IdxMap, m: int) -> int:
        pre = _preimage_table(f, m)
        out = 0
        for B in range(1 << m):
            if e >> pre[B] & 1:
                out |= 1 << B
        return out

    def encode(self, e: int, atoms: Sequence[str]) -> str:
        return "{" + ",".join(_subset_code(s, atoms) for s in _ordered_subsets(_bits(e))) + "}"

    def decode(self, code: str, atoms: Sequence[str]) -> int:
        if not (code.startswith("{") and code.endswith("}")):
            raise SpecError(f"{code!r} is not a neighbourhood code")
        out = 0
        for s in _parse_braced_sets(code[1:-1], atoms):
            out |= 1 << s
        return out

    def barr_row(self, n, m, pairs, u):
        # subsets A of n and B of m are linked when their preimages in the
        # relation's pair set coincide; lifted pairs must agree on every link
        base, free = 0, []
        for As, Bs in _preimage_groups(n, m, pairs):
            vals = {u >> A & 1 for A in As}
            if len(vals) > 1:
                return 0
            bmask = sum(1 << B for B in Bs)
            if not Bs:
                continue
            if As:
                if vals.pop():
                    base |= bmask
            else:
                free.append(bmask)
        # element index equals the family mask here
        row = 0
        for k in range(len(free) + 1):
            for pick in itertools.combinations(free, k):
                v = base
                for b in pick:
                    v |= b
                row |= 1 << v
        return row


def _preimage_groups(n: int, m: int, pairs: Sequence[tuple[int, int]]):
    key_a: dict[int, list[int]] = {}
    key_b: dict[int, list[int]] = {}
    for A in range(1 << n):
        k = 0
        for p, (x, _) in enumerate(pairs):
            if A >> x & 1:
                k |= 1 << p
        key_a.setdefault(k, []).append(A)
    for B in range(1 << m):
        k = 0
        for p, (_, y) in enumerate(pairs):
            if B >> y & 1:
                k |= 1 << p
        key_b.setdefault(k, []).append(B)
    keys = sorted(set(key_a) | set(key_b))
    return [(key_a.get(k, []), key_b.get(k, [])) for k in keys]


_DEDEKIND = [2, 3, 6, 20, 168, 7581, 7828354, 2414682040998]


class Monotone(Neighbourhood):
    kind = "monotone"

    def raw_count(self, n: int) -> int:
        # enumerated directly as upsets, so no larger raw pool exists
        return _DEDEKIND[n] if n < len(_DEDEKIND) else 1 << (1 << n)

    def _build(self, n: int) -> list[Elem]:
        return _upsets(n)

    def encode(self, e: int, atoms: Sequence[str]) -> str:
        return "↑{" + ",".join(_subset_code(s, atoms) for s in _ordered_subsets(_minimal_sets(e))) + "}"

    def decode(self, code: str, atoms: Sequence[str]) -> int:
        if not (code.startswith("↑{") and code.endswith("}")):
            raise SpecError(f"{code!r} is not an upset code")
        gens = _parse_braced_sets(code[2:-1], atoms)
        n = len(atoms)
        out = 0
        for S in range(1 << n):
            if any(g & S == g for g in gens):
                out |= 1 << S
        return out

    def _row_conditions(self, n, m, pairs):
        fwd, bwd = _rel_rows(n, m, pairs)
        dom_mask = sum(1 << x for x in range(n) if fwd[x])
        cod_mask = sum(1 << y for y in range(m) if bwd[y])
        return _image_table(fwd, n), _image_table(bwd, m), dom_mask, cod_mask

    def _mins(self, n: int) -> list[list[int]]:
        cache = self.__dict__.setdefault("_mins_cache", {})
        if n not in cache:
            cache[n] = [_minimal_sets(e) for e in self.elements(n)]
        return cache[n]

    def _saturated(self, m: int, cod_mask: int) -> list[tuple[int, int]]:
        """Elements beta of F(m) with B & cod_mask in beta for every B in beta."""
        cache = self.__dict__.setdefault("_sat_cache", {})
        key = (m, cod_mask)
        if key not in cache:
            mins = self._mins(m)
            cache[key] = [(j, beta) for j, beta in enumerate(self.elements(m))
                          if all(beta >> (B & cod_mask) & 1 for B in mins[j])]
        return cache[key]

    def _alpha_side(self, n, m, pairs, u):
        img, pre, dom_mask, cod_mask = self._row_conditions(n, m, pairs)
        alpha = self.elements(n)[u]
        amin = self._mins(n)[u]
        if any(not alpha >> (A & dom_mask) & 1 for A in amin):
            return None
        # beta must contain every image r[A] and only sets whose preimage is in alpha
        need = 0
        for A in amin:
            need |= _supersets(img[A], m)
        allowed = sum(1 << B for B in range(1 << m) if alpha >> pre[B] & 1)
        return img, amin, dom_mask, cod_mask, need, allowed

    def barr_row(self, n, m, pairs, u):
        side = self._alpha_side(n, m, pairs, u)
        if side is None:
            return 0
        _, _, _, cod_mask, need, allowed = side
        row = 0
        for j, beta in self._saturated(m, cod_mask):
            if beta & need == need and beta & ~allowed == 0:
                row |= 1 << j
        return row


def _supersets(A: int, m: int) -> int:
    out = 0
    for B in range(1 << m):
        if B & A == A:
            out |= 1 << B
    return out


class Clique(Monotone):
    kind = "clique"

    def _build(self, n: int) -> list[Elem]:
        out = []
        for u in _upsets(n):
            mins = _minimal_sets(u)
            if all(A & B for A in mins for B in mins):
                out.append(u)
        return out

    def barr_row(self, n, m, pairs, u):
        side = self._alpha_side(n, m, pairs, u)
        if side is None:
            return 0
        img, amin, dom_mask, cod_mask, need, allowed = side
        # generators of the witnessing family must pairwise intersect
        if any(not (A & B & dom_mask) for A in amin for B in amin):
            return 0
        bmins = self._mins(m)
        row = 0
        for j, beta in self._saturated(m, cod_mask):
            if beta & need != need or beta & ~allowed:
                continue
            bmin = bmins[j]
            if any(not (B & C & cod_mask) for B in bmin for C in bmin):
                continue
            if any(not (img[A] & B) for A in amin for B in bmin):
                continue
            row |= 1 << j
        return row


# ---------------------------------------------------------------- monoid-valued

@dataclass(frozen=True)
class MonoidSpec:
    carrier: FinSet
    add: tuple[tuple[int, ...], ...]
    zero: int

    def plus(self, a: int, b: int) -> int:
        return self.add[a][b]

    def label(self, a: int) -> str:
        return self.carrier.atoms[a]

    @classmethod
    def from_table(cls, carrier: Sequence[str], table: Any, zero: str) -> MonoidSpec:
        C = FinSet(tuple(carrier))
        ix = C.index
        if isinstance(table, dict):
            rows = [[ix[table[a][b]] for b in C] for a in C]
        else:
            rows = [[ix[v] for v in row] for row in table]
        if zero not in ix:
            raise SpecError(f"zero {zero!r} not in monoid carrier")
        spec = cls(C, tuple(tuple(r) for r in rows), ix[zero])
        spec.validate()
        return spec

    def validate(self) -> None:
        k = len(self.carrier)
        if len(self.add) != k or any(len(r) != k for r in self.add):
            raise SpecError("monoid table must be square over the carrier")
        rng = range(k)
        for a in rng:
            if self.add[self.zero][a] != a or self.add[a][self.zero] != a:
                raise SpecError(f"unit law fails at {self.label(a)}")
            for b in rng:
                if self.add[a][b] != self.add[b][a]:
                    raise SpecError(f"not commutative at {self.label(a)},{self.label(b)}")
                for c in rng:
                    if self.add[self.add[a][b]][c] != self.add[a][self.add[b][c]]:
                        raise SpecError("not associative")

    def to_json(self) -> dict[str, Any]:
        return {"carrier": list(self.carrier.atoms),
                "table": [[self.label(v) for v in row] for row in self.add],
                "zero": self.label(self.zero)}


def cyclic_monoid(k: int) -> MonoidSpec:
    labels = [str(i) for i in range(k)]
    return MonoidSpec.from_table(labels, [[labels[(a + b) % k] for b in range(k)] for a in range(k)], "0")


def saturating_monoid(top: int) -> MonoidSpec:
    labels = [str(i) for i in range(top + 1)]
    return MonoidSpec.from_table(labels, [[labels[min(a + b, top)] for b in range(top + 1)] for a in range(top + 1)], "0")


@dataclass
class MonoidAnalysis:
    positive: bool
    refinable: bool
    witnesses: dict[str, Any]


def monoid_analysis(M: MonoidSpec) -> MonoidAnalysis:
    k = range(len(M.carrier))
    wit: dict[str, Any] = {}
    positive = True
    for u in k:
        if u == M.zero:
            continue
        for v in k:
            if M.plus(u, v) == M.zero:
                positive = False
                wit["inverse_pair"] = [M.label(u), M.label(v)]
                break
        if not positive:
            break
    refinable = True
    for m1, m2, n1, n2 in itertools.product(k, repeat=4):
        if M.plus(m1, m2) != M.plus(n1, n2):
            continue
        found = any(
            M.plus(a11, a12) == m1 and M.plus(a21, a22) == m2
            and M.plus(a11, a21) == n1 and M.plus(a12, a22) == n2
            for a11, a12, a21, a22 in itertools.product(k, repeat=4))
        if not found:
            refinable = False
            wit["unrefinable"] = {"m": [M.label(m1), M.label(m2)], "n": [M.label(n1), M.label(n2)]}
            break
    return MonoidAnalysis(positive, refinable, wit)


class MonoidValued(Functor):
    kind = "monoid"

    def __init__(self, name: str, M: MonoidSpec, **kw):
        super().__init__(name, M.to_json(), **kw)
        self.M = M

    def raw_count(self, n: int) -> int:
        return len(self.M.carrier) ** n

    def _build(self, n: int) -> list[Elem]:
        k = len(self.M.carrier)
        # zero first so the all-zero function is the first element
        order = [self.M.zero] + [a for a in range(k) if a != self.M.zero]
        return [tuple(t) for t in itertools.product(order, repeat=n)]

    def map_elem(self, e: tuple[int, ...], f: IdxMap, m: int) -> tuple[int, ...]:
        out = [self.M.zero] * m
        for i, a in enumerate(e):
            out[f[i]] = self.M.plus(out[f[i]], a)
        return tuple(out)

    def encode(self, e: tuple[int, ...], atoms: Sequence[str]) -> str:
        return "{" + ",".join(f"{atoms[i]}:{self.M.label(a)}" for i, a in enumerate(e) if a != self.M.zero) + "}"


# ---------------------------------------------------------------- tuples with at most two distinct entries

class TuplesMax2of3(Functor):
    kind = "tuples_max2of3"

    def raw_count(self, n: int) -> int:
        return n ** 3

    def _build(self, n: int) -> list[Elem]:
        return [t for t in itertools.product(range(n), repeat=3) if len(set(t)) <= 2]

    def map_elem(self, e, f, m):
        return tuple(f[i] for i in e)

    def encode(self, e, atoms):
        return "(" + ",".join(atoms[i] for i in e) + ")"


# ---------------------------------------------------------------- hom-set modulo non-injective maps

BOTTOM = "⊥"


class HomQuotient(Functor):
    kind = "hom_quotient"

    def __init__(self, name: str, A: int, **kw):
        super().__init__(name, {"A": A}, **kw)
        self.A = A

    def raw_count(self, n: int) -> int:
        return n ** self.A

    def _build(self, n: int) -> list[Elem]:
        inj = list(itertools.permutations(range(n), self.A))
        if n ** self.A > len(inj):
            return inj + [BOTTOM]
        return inj

    def map_elem(self, e, f, m):
        if e == BOTTOM:
            return BOTTOM
        t = tuple(f[i] for i in e)
        return t if len(set(t)) == len(t) else BOTTOM

    def encode(self, e, atoms):
        if e == BOTTOM:
            return BOTTOM
        return "[" + ",".join(atoms[i] for i in e) + "]"


# ---------------------------------------------------------------- quotients of constructor terms

_TERM_RE = re.compile(r"^\s*([A-Za-z_]\w*)\s*\((.*)\)\s*$")


def parse_term(s: str) -> tuple[str, tuple[str, ...]]:
    m = _TERM_RE.match(s)
    if not m:
        raise SpecError(f"cannot parse term {s!r}")
    args = tuple(a.strip() for a in m.group(2).split(",")) if m.group(2).strip() else ()
    return m.group(1), args


@dataclass(frozen=True)
class TupleQuotientSpec:
    constructors: tuple[tuple[str, int], ...]
    clauses: tuple[tuple[str, str], ...]

    def to_json(self) -> dict[str, Any]:
        return {"constructors": [[c, a] for c, a in self.constructors],
                "clauses": [[l, r] for l, r in self.clauses]}


class TupleQuotient(Functor):
    kind = "tuple_quotient"

    def __init__(self, name: str, spec: TupleQuotientSpec, **kw):
        super().__init__(name, spec.to_json(), **kw)
        self.spec = spec
        self.ctor_ix = {c: i for i, (c, _) in enumerate(spec.constructors)}
        self.arity = [a for _, a in spec.constructors]
        self._classes: dict[int, dict[tuple, tuple]] = {}
        self.patterns = []
        for l, r in spec.clauses:
            sides = [self._pattern(l), self._pattern(r)]
            shared = sorted(set(sides[0][1]) & set(sides[1][1]))
            self.patterns.append((sides, shared))

    def _pattern(self, s: str):
        c, args = parse_term(s)
        if c not in self.ctor_ix:
            raise SpecError(f"unknown constructor {c!r} in clause")
        if len(args) != self.arity[self.ctor_ix[c]]:
            raise SpecError(f"arity mismatch in clause term {s!r}")
        return self.ctor_ix[c], args

    def raw_count(self, n: int) -> int:
        return sum(n ** a for a in self.arity)

    def _raw_terms(self, n: int):
        for ci, a in enumerate(self.arity):
            for args in itertools.product(range(n), repeat=a):
                yield (ci,) + args

    def class_map(self, n: int) -> dict[tuple, tuple]:
        cm = self._classes.get(n)
        if cm is not None:
            return cm
        self.check_guard(n)
        terms = list(self._raw_terms(n))
        pos = {t: i for i, t in enumerate(terms)}
        parent = list(range(len(terms)))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        # all instances of both sides of a clause that agree on the shared
        # variables form one class, so union each match with a per-key anchor
        anchors: dict[tuple, int] = {}
        for t in terms:
            ti = pos[t]
            for k, (sides, shared) in enumerate(self.patterns):
                for ci, vars_ in sides:
                    if t[0] != ci:
                        continue
                    bind: dict[str, int] = {}
                    ok = True
                    for v, a in zip(vars_, t[1:]):
                        if bind.setdefault(v, a) != a:
                            ok = False
                            break
                    if not ok:
                        continue
                    key = (k,) + tuple(bind[v] for v in shared)
                    j = anchors.setdefault(key, ti)
                    a, b = find(ti), find(j)
                    if a != b:
                        parent[max(a, b)] = min(a, b)
        cm = {t: terms[find(i)] for i, t in enumerate(terms)}
        self._classes[n] = cm
        return cm

    def _build(self, n: int) -> list[Elem]:
        cm = self.class_map(n)
        return sorted(set(cm.values()))

    def map_elem(self, e, f, m):
        return self.class_map(m)[(e[0],) + tuple(f[i] for i in e[1:])]

    def encode(self, e, atoms):
        return self.spec.constructors[e[0]][0] + "(" + ",".join(atoms[i] for i in e[1:]) + ")"

    def decode(self, code, atoms):
        c, args = parse_term(code)
        ix = {a: i for i, a in enumerate(atoms)}
        try:
            raw = (self.ctor_ix[c],) + tuple(ix[a] for a in args)
            return self.class_map(len(atoms))[raw]
        except KeyError:
            raise SpecError(f"{code!r} is not an element code of {self.name}") from None


PENTAD_SPEC = TupleQuotientSpec(
    constructors=(("f", 5), ("g", 5)),
    clauses=(
        ("f(y,x,z,x,t)", "f(y',x,z',x,t')"),
        ("f(t,x,x,y,y)", "f(t',x,x,y,y)"),
        ("g(y,x,z,x,t)", "g(y',x,z',x,t')"),
        ("g(x,x,y,y,t)", "g(x,x,y,y,t')"),
        ("f(y,x,z,x,t)", "g(y',x,z',x,t')"),
        ("f(t,x,z,y,z)", "g(t,x,t,y,z)"),
    ),
)

TRIAD_SPEC = TupleQuotientSpec(
    constructors=(("t", 3),),
    clauses=(("t(x,x,y)", "t(x,x,x)"), ("t(x,x,x)", "t(y,x,x)")),
)


# ---------------------------------------------------------------- words modulo xxx = xx, bounded length

def normalize_word(w: Sequence[int]) -> tuple[int, ...]:
    """Rewrite xxx -> xx, leftmost first, until no factor xxx remains."""
    w = list(w)
    while True:
        for i in range(len(w) - 2):
            if w[i] == w[i + 1] == w[i + 2]:
                del w[i + 2]
                break
        else:
            return tuple(w)


class BoundedWords(Functor):
    kind = "bounded_words"

    def __init__(self, name: str, L: int = 4, **kw):
        super().__init__(name, {"L": L}, **kw)
        self.L = L

    def raw_count(self, n: int) -> int:
        return sum(n ** k for k in range(1, self.L + 1))

    def _build(self, n: int) -> list[Elem]:
        out = []
        for k in range(1, self.L + 1):
            out.extend(w for w in itertools.product(range(n), repeat=k) if normalize_word(w) == w)
        return out

    def map_elem(self, e, f, m):
        return normalize_word([f[i] for i in e])

    def encode(self, e, atoms):
        sep = "" if all(len(a) == 1 for a in atoms) else "."
        return sep.join(atoms[i] for i in e)

    def decode(self, code, atoms):
        ix = {a: i for i, a in enumerate(atoms)}
        parts = list(code) if all(len(a) == 1 for a in atoms) else code.split(".")
        try:
            w = tuple(ix[p] for p in parts)
        except KeyError:
            raise SpecError(f"{code!r} is not a word over {list(atoms)}") from None
        if not w or len(w) > self.L or normalize_word(w) != w:
            raise SpecError(f"{code!r} is not a normal word of length <= {self.L}")
        return w


# ---------------------------------------------------------------- construction

_SIMPLE = {
    "powerset": Powerset,
    "neighbourhood": Neighbourhood,
    "monotone": Monotone,
    "clique": Clique,
    "tuples_max2of3": TuplesMax2of3,
}


def build_functor(spec: dict[str, Any], raw_cap: int = DEFAULT_RAW_CAP) -> Functor:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise SpecError("functor spec must be an object with a 'kind'")
    kind = spec["kind"]
    name = spec.get("name", kind)
    if kind in _SIMPLE:
        return _SIMPLE[kind](name, raw_cap=raw_cap)
    if kind == "monoid":
        table = spec.get("table")
        if table is None or "zero" not in spec:
            raise SpecError("monoid spec needs 'table' and 'zero'")
        carrier = spec.get("carrier") or (list(table) if isinstance(table, dict) else None)
        if carrier is None:
            raise SpecError("monoid spec with an array table needs 'carrier'")
        return MonoidValued(name, MonoidSpec.from_table(carrier, table, spec["zero"]), raw_cap=raw_cap)
    if kind == "tuple_quotient":
        try:
            ctors = tuple((str(c), int(a)) for c, a in spec["constructors"])
            clauses = tuple((str(l), str(r)) for l, r in spec["clauses"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecError(f"malformed tuple_quotient spec: {exc}") from None
        return TupleQuotient(name, TupleQuotientSpec(ctors, clauses), raw_cap=raw_cap)
    if kind == "hom_quotient":
        return HomQuotient(name, int(spec.get("A", 2)), raw_cap=raw_cap)
    if kind == "bounded_words":
        return BoundedWords(name, int(spec.get("L", 4)), raw_cap=raw_cap)
    raise SpecError(f"unknown functor kind {kind!r}")


ZOO_SPECS: dict[str, dict[str, Any]] = {
    "powerset": {"kind": "powerset"},
    "monoid_z2": {"kind": "monoid", "name": "monoid_z2", **cyclic_monoid(2).to_json()},
    "monoid_sat3": {"kind": "monoid", "name": "monoid_sat3", **saturating_monoid(2).to_json()},
    "neighbourhood": {"kind": "neighbourhood"},
    "monotone": {"kind": "monotone"},
    "clique": {"kind": "clique"},
    "tuples_max2of3": {"kind": "tuples_max2of3"},
    "hom_quotient": {"kind": "hom_quotient", "A": 2},
    "pentad": {"kind": "tuple_quotient", "name": "pentad", **PENTAD_SPEC.to_json()},
    "triad": {"kind": "tuple_quotient", "name": "triad", **TRIAD_SPEC.to_json()},
    "bounded_words": {"kind": "bounded_words", "L": 4},
}

NEIGHBOURHOOD_FAMILY = {"neighbourhood", "monotone", "clique"}

_zoo_cache: dict[str, Functor] = {}


def zoo(name: str) -> Functor:
    F = _zoo_cache.get(name)
    if F is None:
        if name not in ZOO_SPECS:
            raise SpecError(f"unknown zoo functor {name!r}")
        F = build_functor(ZOO_SPECS[name])
        _zoo_cache[name] = F
    return F


def default_bound(F: Functor, heavy: bool = False) -> int:
    """3 generally; 2 for the neighbourhood family on shapes with large pullbacks."""
    if F.kind in NEIGHBOURHOOD_FAMILY and heavy:
        return 2
    return 3


# ---------------------------------------------------------------- functor laws

def all_maps(n: int, m: int) -> Iterable[IdxMap]:
    return itertools.product(range(m), repeat=n)


def validate_functoriality(F: Functor, size_bound: int) -> Report:
    sizes = range(size_bound + 1)
    bounds = {"size_bound": size_bound}
    for n in sizes:
        ident = tuple(range(n))
        if F.fmap_idx(ident, n) != tuple(range(F.size(n))):
            return Report("fail", {"law": "identity", "n": n}, bounds)
    for a, b, c in itertools.product(sizes, repeat=3):
        for f in all_maps(a, b):
            Ff = F.fmap_idx(f, b)
            for g in all_maps(b, c):
                Fg = F.fmap_idx(g, c)
                gf = tuple(g[i] for i in f)
                if F.fmap_idx(gf, c) != tuple(Fg[i] for i in Ff):
                    return Report("fail", {"law": "composition", "f": list(f), "g": list(g),
                                           "sizes": [a, b, c]}, bounds)
    return Report("pass", None, bounds)


def functor_from_lift(base: Functor, name: str, map_elem: Callable[[Elem, IdxMap, int], Elem]) -> Functor:
    """A copy of ``base`` whose map action is replaced (used for fault injection)."""

    class Patched(type(base)):  # type: ignore[misc,valid-type]
        pass

    F = Patched.__new__(Patched)
    F.__dict__.update(base.__dict__)
    F.name = name
    F._fmap = {}
    F.map_elem = map_elem  # type: ignore[method-assign]
    return F
