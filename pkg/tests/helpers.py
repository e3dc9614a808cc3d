"""Seeded random relations and sequences shared by the property tests."""

from __future__ import annotations

import random

from laxkit.finrel import FinSet, Rel, compose_all, identity, rel_predicates
from laxkit.lax import RelSeq


def canon(n: int, p: str) -> FinSet:
    return FinSet.canonical(n, p)


def rand_rel(rng: random.Random, X: FinSet, Y: FinSet, p: float = 0.4) -> Rel:
    return Rel(X, Y, frozenset((x, y) for x in X for y in Y if rng.random() < p))


def rand_ts_rel(rng: random.Random, X: FinSet, Y: FinSet, p: float = 0.3) -> Rel:
    """Random total and surjective relation (X, Y nonempty)."""
    ps = {(x, y) for x in X for y in Y if rng.random() < p}
    for x in X:
        ps.add((x, rng.choice(Y.atoms)))
    for y in Y:
        ps.add((rng.choice(X.atoms), y))
    return Rel(X, Y, frozenset(ps))


def rand_seq(rng: random.Random, sizes: list[int], p: float = 0.4) -> RelSeq:
    sets = [canon(k, f"s{i}_") for i, k in enumerate(sizes)]
    return RelSeq(tuple(rand_rel(rng, sets[i], sets[i + 1], p) for i in range(len(sizes) - 1)))


def _close_to_identity(prefix: list[Rel], X: FinSet) -> Rel | None:
    """The largest last relation keeping the composite below 1_X, if it reaches 1_X."""
    C = compose_all(prefix)
    M = C.cod
    ps = frozenset((m, x) for m in M for x in X if C.preimage([m]) <= {x} and C.preimage([m]))
    last = Rel(M, X, ps)
    if compose_all(prefix + [last]) != identity(X):
        return None
    return last


def rand_identity_seq(rng: random.Random, n: int, length: int, max_mid: int,
                      total_surjective: bool = False, tries: int = 10_000) -> RelSeq:
    """Random sequence of the given length on an n-set whose composite is 1_X.

    Middle elements are coloured by points of X and mostly relate within a
    colour; without total_surjective, uncoloured free elements and dropped
    pairs produce partial and non-surjective relations.
    """
    X = canon(n, "x")
    for _ in range(tries):
        cols = [{x: x for x in X}]
        sets = [X]
        for i in range(length - 1):
            k = rng.randint(max(1, n), max(max_mid, n))
            free = 0 if total_surjective else rng.randint(0, 2)
            S = canon(k + free, f"m{i}_")
            order = list(X.atoms) + [rng.choice(X.atoms) for _ in range(k - n)] if n else [None] * k
            rng.shuffle(order)
            cols.append(dict(zip(S.atoms, order + [None] * free)))
            sets.append(S)
        noise = rng.choice((0.0, 0.1, 0.25))
        prefix = []
        for i in range(length - 1):
            A, B, ca, cb = sets[i], sets[i + 1], cols[i], cols[i + 1]
            ps = set()
            for a in A:
                for b in B:
                    same = ca[a] is not None and ca[a] == cb[b]
                    if (same and rng.random() < 0.4) or rng.random() < noise:
                        ps.add((a, b))
            for a in A:
                same = [b for b in B if cb[b] is not None and cb[b] == ca[a]]
                if same:
                    ps.add((a, rng.choice(same)))
            for b in B:
                same = [a for a in A if ca[a] is not None and ca[a] == cb[b]]
                if same:
                    ps.add((rng.choice(same), b))
            if not total_surjective:
                ps = {q for q in ps if rng.random() > 0.15}
            prefix.append(Rel(A, B, frozenset(ps)))
        last = _close_to_identity(prefix, X)
        if last is None:
            continue
        if total_surjective and not all(rel_predicates(r).total and rel_predicates(r).surjective
                                        for r in prefix + [last]):
            continue
        return RelSeq(tuple(prefix + [last]))
    raise RuntimeError("no identity sequence found")


def coalgebra(prefix: str, codes: list[str]):
    from laxkit.coalgebra import Coalgebra

    S = canon(len(codes), prefix)
    return Coalgebra(S, dict(zip(S.atoms, codes)))


def lts_coalgebra(prefix: str, succ: list[list[int]]):
    """Powerset coalgebra of an unlabelled transition system."""
    return coalgebra(prefix, ["{" + ",".join(f"{prefix}{j}" for j in sorted(set(s))) + "}" for s in succ])


def rand_lts(rng: random.Random, n: int, p: float = 0.3) -> list[list[int]]:
    return [[j for j in range(n) if rng.random() < p] for _ in range(n)]


# monotone neighbourhood fixtures (a, b); the last two have an empty Barr bisimilarity
MONOTONE_FIXTURES = [
    (["↑{{s0}}"], ["↑{{t1}}", "↑{{t0}}"]),
    (["↑{{s0}}"], ["↑{}", "↑{{t1,t2}}", "↑{{t0,t1},{t1,t2}}"]),
    (["↑{{s0}}"], ["↑{}", "↑{{t0,t1},{t1,t2}}", "↑{{t1}}"]),
]
