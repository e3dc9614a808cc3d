"""Pullback squares by shape and (weak) preservation checks for a functor."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

from .finrel import FinFun, FinSet, finfun_to_json
from .functors import Functor, SizeGuardError, _bits
from .report import Report


class SquareShape(enum.Enum):
    IsoQuarter = "iso-quarter"
    IsoMonoQuarter = "iso-mono-quarter"
    MonoQuarter = "mono-quarter"
    EpiAll = "epi-all"
    KernelPair = "kernel-pair"
    General = "general"

    @classmethod
    def parse(cls, s: str | SquareShape) -> SquareShape:
        if isinstance(s, SquareShape):
            return s
        for sh in cls:
            if s in (sh.value, sh.name):
                return sh
        raise ValueError(f"unknown square shape {s!r}")


# squares are deduplicated up to renaming, so the shape of a cospan is the sorted
# list of fibre sizes (|f^-1 z|, |g^-1 z|) over z in Z
Profile = tuple[tuple[int, int], ...]

_X_NAMES = "012345"
_Z_NAMES = "abcdef"
_Y_NAMES = "uvwstr"


def _names(pool: str, n: int, prefix: str) -> FinSet:
    if n <= len(pool):
        return FinSet(tuple(pool[:n]))
    return FinSet.canonical(n, prefix)


def _blocks(sizes: Sequence[int]) -> tuple[int, ...]:
    return tuple(z for z, k in enumerate(sizes) for _ in range(k))


@dataclass(frozen=True)
class Square:
    profile: Profile
    f: tuple[int, ...]
    g: tuple[int, ...]
    kernel: bool = False

    @property
    def nx(self) -> int:
        return len(self.f)

    @property
    def ny(self) -> int:
        return len(self.g)

    @property
    def nz(self) -> int:
        return len(self.profile)

    @cached_property
    def apex(self) -> tuple[tuple[int, int], ...]:
        return tuple((x, y) for x in range(self.nx) for y in range(self.ny) if self.f[x] == self.g[y])

    @property
    def p(self) -> tuple[int, ...]:
        return tuple(x for x, _ in self.apex)

    @property
    def q(self) -> tuple[int, ...]:
        return tuple(y for _, y in self.apex)

    def sets(self) -> tuple[FinSet, FinSet, FinSet, FinSet]:
        X = _names(_X_NAMES, self.nx, "x")
        Y = X if self.kernel else _names(_Y_NAMES, self.ny, "y")
        Z = _names(_Z_NAMES, self.nz, "z")
        P = FinSet(tuple(f"({X.atoms[x]},{Y.atoms[y]})" for x, y in self.apex))
        return X, Y, Z, P

    def funs(self) -> dict[str, FinFun]:
        X, Y, Z, P = self.sets()
        return {"f": FinFun.from_indices(X, Z, self.f), "g": FinFun.from_indices(Y, Z, self.g),
                "p": FinFun.from_indices(P, X, self.p), "q": FinFun.from_indices(P, Y, self.q)}

    def flags(self) -> dict[str, bool]:
        a = [k for k, _ in self.profile]
        b = [k for _, k in self.profile]
        return {
            "f_mono": all(k <= 1 for k in a), "g_mono": all(k <= 1 for k in b),
            "f_epi": all(k >= 1 for k in a), "g_epi": all(k >= 1 for k in b),
            "p_iso": all(bk == 1 for ak, bk in self.profile if ak),
            "q_iso": all(ak == 1 for ak, bk in self.profile if bk),
            "p_mono": all(bk <= 1 for ak, bk in self.profile if ak),
            "q_mono": all(ak <= 1 for ak, bk in self.profile if bk),
        }

    def to_json(self) -> dict:
        d = {k: finfun_to_json(v) for k, v in self.funs().items()}
        d["sizes"] = {"X": self.nx, "Y": self.ny, "Z": self.nz, "P": len(self.apex)}
        return d


def _profiles(nz: int, nx: int, ny: int, bound: int) -> Iterator[Profile]:
    cells = [(a, b) for a in range(bound + 1) for b in range(bound + 1)]
    for prof in itertools.combinations_with_replacement(cells, nz):
        if sum(a for a, _ in prof) == nx and sum(b for _, b in prof) == ny:
            yield prof


def _shape_ok(shape: SquareShape, sq: Square) -> bool:
    fl = sq.flags()
    if shape is SquareShape.IsoQuarter:
        return fl["p_iso"] or fl["q_iso"]
    if shape is SquareShape.IsoMonoQuarter:
        # the bijective projection is the one parallel to the mono leg
        return (fl["q_iso"] and fl["g_mono"]) or (fl["p_iso"] and fl["f_mono"])
    if shape is SquareShape.MonoQuarter:
        return fl["p_mono"] or fl["q_mono"]
    if shape is SquareShape.EpiAll:
        return fl["f_epi"] and fl["g_epi"]
    if shape is SquareShape.KernelPair:
        return all(a == b for a, b in sq.profile)
    return True


def enumerate_squares(shape: SquareShape | str, size_bound: int) -> Iterator[Square]:
    """Pullback squares of the given shape, one per isomorphism class, in canonical order."""
    shape = SquareShape.parse(shape)
    for nz in range(size_bound + 1):
        for nx in range(size_bound + 1):
            for ny in range(size_bound + 1):
                if shape is SquareShape.KernelPair and nx != ny:
                    continue
                for prof in _profiles(nz, nx, ny, size_bound):
                    sq = Square(prof, _blocks([a for a, _ in prof]), _blocks([b for _, b in prof]),
                                kernel=shape is SquareShape.KernelPair)
                    if _shape_ok(shape, sq):
                        yield sq


@dataclass
class _Lifted:
    Ff: tuple[int, ...]
    Fg: tuple[int, ...]
    Fp: tuple[int, ...]
    Fq: tuple[int, ...]


def _lift_square(F: Functor, sq: Square) -> _Lifted:
    return _Lifted(F.fmap_idx(sq.f, sq.nz), F.fmap_idx(sq.g, sq.nz),
                   F.fmap_idx(sq.p, sq.nx), F.fmap_idx(sq.q, sq.ny))


def offending_pairs(F: Functor, sq: Square, limit: int | None = None) -> list[tuple[int, int]]:
    """Pairs (u, v) with Ff(u) = Fg(v) that no element of F(P) projects onto."""
    L = _lift_square(F, sq)
    covered = set(zip(L.Fp, L.Fq))
    fib: dict[int, list[int]] = {}
    for v, z in enumerate(L.Fg):
        fib.setdefault(z, []).append(v)
    out = []
    for u, z in enumerate(L.Ff):
        for v in fib.get(z, ()):
            if (u, v) not in covered:
                out.append((u, v))
                if limit is not None and len(out) >= limit:
                    return out
    return out


def check_square_weak_preservation(F: Functor, sq: Square) -> bool:
    return not offending_pairs(F, sq, limit=1)


def _square_failure(F: Functor, shape: SquareShape, sq: Square) -> dict | None:
    X, Y, Z, P = sq.sets()
    bad = offending_pairs(F, sq)
    if bad:
        u, v = bad[0]
        Ff = F.fmap_idx(sq.f, sq.nz)
        FZ = F.elements(sq.nz)
        images = sorted({Ff[a] for a, _ in bad})
        return {
            "kind": "weak",
            "square": sq.to_json(),
            "pair": [F.encode(F.elements(sq.nx)[u], X.atoms), F.encode(F.elements(sq.ny)[v], Y.atoms)],
            "image": F.encode(FZ[Ff[u]], Z.atoms),
            "offending_images": [F.encode(FZ[z], Z.atoms) for z in images],
        }
    if shape in (SquareShape.IsoQuarter, SquareShape.IsoMonoQuarter, SquareShape.MonoQuarter):
        # strict preservation additionally needs the lifted mono legs to stay injective
        legs = {"p": (sq.p, sq.nx, P, X), "q": (sq.q, sq.ny, P, Y), "f": (sq.f, sq.nz, X, Z), "g": (sq.g, sq.nz, Y, Z)}
        for name, (m, k, D, C) in legs.items():
            if len(set(m)) != len(m):
                continue
            Fm = F.fmap_idx(m, k)
            seen: dict[int, int] = {}
            for a, b in enumerate(Fm):
                if b in seen:
                    els = F.elements(len(D))
                    return {"kind": "mono", "square": sq.to_json(), "leg": name,
                            "pair": [F.encode(els[seen[b]], D.atoms), F.encode(els[a], D.atoms)],
                            "image": F.encode(F.elements(len(C))[b], C.atoms)}
                seen[b] = a
    return None


def _square_list(shape: SquareShape, size_bound: int, inverse_only: bool) -> list[Square]:
    sqs = enumerate_squares(SquareShape.General if inverse_only else shape, size_bound)
    return [sq for sq in sqs if not inverse_only or sq.flags()["g_mono"]]


def _scan_part(F: Functor, shape: SquareShape, squares: list[Square], part: int, parts: int):
    """Scan squares with index = part (mod parts); stop at the first failure."""
    skipped = []
    for i in range(part, len(squares), parts):
        try:
            w = _square_failure(F, shape, squares[i])
        except SizeGuardError:
            skipped.append(i)
            continue
        if w is not None:
            return i, w, skipped
    return None, None, skipped


def _scan_worker(args):
    from .functors import build_functor

    spec, shape, size_bound, inverse_only, part, parts = args
    F = build_functor(spec)
    shape = SquareShape(shape)
    return _scan_part(F, shape, _square_list(shape, size_bound, inverse_only), part, parts)


def _scan(F: Functor, shape: SquareShape, size_bound: int, bounds: dict, jobs: int,
          inverse_only: bool = False) -> Report:
    squares = _square_list(shape, size_bound, inverse_only)
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        args = [(F.spec_json(), shape.value, size_bound, inverse_only, k, jobs) for k in range(jobs)]
        with ProcessPoolExecutor(jobs) as ex:
            parts = list(ex.map(_scan_worker, args))
    else:
        parts = [_scan_part(F, shape, squares, 0, 1)]
    # workers race, the canonical minimum failing square wins
    fails = [(i, w) for i, w, _ in parts if i is not None]
    first, wit = min(fails, key=lambda t: t[0]) if fails else (len(squares), None)
    skipped = sorted(j for _, _, sk in parts for j in sk if j < first)
    checked = min(first + 1, len(squares)) - len(skipped)
    notes = [f"squares_checked={checked}"]
    if skipped:
        notes.append(f"squares_skipped_by_size_guard={len(skipped)}")
    if wit is not None:
        return Report("fail", wit, bounds, notes)
    return Report("pass", None, bounds, notes)


def check_preservation(F: Functor, shape: SquareShape | str, size_bound: int, jobs: int = 1) -> Report:
    shape = SquareShape.parse(shape)
    return _scan(F, shape, size_bound, {"shape": shape.value, "size_bound": size_bound}, jobs)


def check_inverse_images(F: Functor, size_bound: int, jobs: int = 1) -> Report:
    """Preservation of pullbacks along a mono g (the inverse image of g's range under f)."""
    return _scan(F, SquareShape.MonoQuarter, size_bound, {"shape": "inverse-image", "size_bound": size_bound},
                 jobs, inverse_only=True)


# ---------------------------------------------------------------- difunctional monotonicity

def _canonical_cospan(f: tuple[int, ...], g: tuple[int, ...], nz: int) -> tuple:
    order: dict[int, int] = {}
    for z in f + g:
        if z not in order:
            order[z] = len(order)
    for z in range(nz):
        if z not in order:
            order[z] = len(order)
    return tuple(order[z] for z in f), tuple(order[z] for z in g), nz


def cospans(nx: int, ny: int, bound: int) -> Iterator[tuple[tuple[int, ...], tuple[int, ...], int]]:
    """Cospans nx -> nz <- ny with nz <= bound, one per renaming class of Z."""
    for nz in range(bound + 1):
        seen = set()
        for f in itertools.product(range(nz), repeat=nx):
            for g in itertools.product(range(nz), repeat=ny):
                key = _canonical_cospan(f, g, nz)
                if key in seen:
                    continue
                seen.add(key)
                yield key


def _cospan_relation(f, g, ny) -> tuple[int, ...]:
    return tuple(sum(1 << y for y in range(ny) if g[y] == z) for z in f)


def check_difunctional_monotone(F: Functor, size_bound: int) -> Report:
    """If g°f <= g'°f' then (Fg)°Ff <= (Fg')°Ff', over all cospans within the bound."""
    from .lax import difunctional_lax_rows

    bounds = {"size_bound": size_bound}
    skipped = 0
    for nx in range(size_bound + 1):
        for ny in range(size_bound + 1):
            groups: dict[tuple[int, ...], list] = {}
            for f, g, nz in cospans(nx, ny, size_bound):
                try:
                    val = difunctional_lax_rows(F, f, g, nz)
                except SizeGuardError:
                    skipped += 1
                    continue
                groups.setdefault(_cospan_relation(f, g, ny), []).append(((f, g, nz), val))
            w = _monotone_violation(F, groups, nx, ny)
            if w is not None:
                return Report("fail", w, bounds, [f"skipped_by_size_guard={skipped}"] if skipped else [])
    return Report("pass", None, bounds, [f"skipped_by_size_guard={skipped}"] if skipped else [])


def _monotone_violation(F: Functor, groups: dict, nx: int, ny: int) -> dict | None:
    rels = sorted(groups)
    for R in rels:
        for R2 in rels:
            if any(a & ~b for a, b in zip(R, R2)):
                continue
            for c1, v1 in groups[R]:
                for c2, v2 in groups[R2]:
                    for u, (a, b) in enumerate(zip(v1, v2)):
                        extra = a & ~b
                        if extra:
                            v = (extra & -extra).bit_length() - 1
                            return _mono_witness(F, nx, ny, c1, c2, R, R2, u, v)
    return None


def _mono_witness(F, nx, ny, c1, c2, R, R2, u, v) -> dict:
    X = _names(_X_NAMES, nx, "x")
    Y = _names(_Y_NAMES, ny, "y")

    def cos(c):
        f, g, nz = c
        Z = _names(_Z_NAMES, nz, "z")
        return {"f": finfun_to_json(FinFun.from_indices(X, Z, f)), "g": finfun_to_json(FinFun.from_indices(Y, Z, g))}

    def rel(rows):
        return [[X.atoms[x], Y.atoms[y]] for x, row in enumerate(rows) for y in _bits(row)]

    return {"smaller": cos(c1), "larger": cos(c2), "relation": rel(R), "larger_relation": rel(R2),
            "pair": [F.encode(F.elements(nx)[u], X.atoms), F.encode(F.elements(ny)[v], Y.atoms)]}
