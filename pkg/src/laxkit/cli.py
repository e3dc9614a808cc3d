"""Command-line entry point: ``laxkit <command> ...``."""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path
from typing import Any

from .coalgebra import behavioural_equivalence, coalgebra_from_json, greatest_L_bisimulation, parse_backend
from .finrel import FinSet, rel_from_json, rel_to_json
from .functors import (
    NEIGHBOURHOOD_FAMILY, ZOO_SPECS, Functor, MonoidSpec, SizeGuardError, SpecError, build_functor,
    default_bound, monoid_analysis, validate_functoriality, zoo,
)
from .lax import (
    barr_lift, check_pair_triple_normality, laxification_approx, normality_search, verify_normality_violation,
)
from .preservation import SquareShape, check_difunctional_monotone, check_inverse_images, check_preservation
from .report import Report
from .samples import sequence_from_json

EXIT = {"pass": 0, "none": 0, "fail": 1, "witness": 1}
EXTRA_SHAPES = ("inverse-image", "difunctional-monotone", "pair-triple")


class UsageError(Exception):
    pass


class _Inputs:
    """Collects every input that determines a run, for the report digest."""

    def __init__(self, command: str):
        self.data: dict[str, Any] = {"command": command}

    def add(self, key: str, value: Any) -> None:
        self.data[key] = value

    def digest(self) -> str:
        blob = json.dumps(self.data, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
        return "sha256:" + hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _read_json(path: str) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON in {path} at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _functor(arg: str | None, inputs: _Inputs) -> Functor:
    if arg is None:
        raise UsageError("--functor is required")
    if arg in ZOO_SPECS:
        inputs.add("functor", ZOO_SPECS[arg])
        return zoo(arg)
    if not Path(arg).exists():
        raise UsageError(f"--functor {arg!r} is neither a zoo name ({', '.join(ZOO_SPECS)}) nor a file")
    spec = _read_json(arg)
    inputs.add("functor", spec)
    return build_functor(spec)


def _relation(path: str, inputs: _Inputs, key: str = "rel"):
    data = _read_json(path)
    inputs.add(key, data)
    try:
        return rel_from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"malformed relation in {path}: {exc}") from None


# ---------------------------------------------------------------- commands

def cmd_validate(a, inputs: _Inputs) -> dict:
    F = _functor(a.functor, inputs)
    bound = a.bound if a.bound is not None else (2 if F.kind in NEIGHBOURHOOD_FAMILY else 3)
    inputs.add("bound", bound)
    return {"report": validate_functoriality(F, bound)}


def cmd_check(a, inputs: _Inputs) -> dict:
    F = _functor(a.functor, inputs)
    shape = a.shape
    heavy = shape in ("epi-all", "kernel-pair", "general", "difunctional-monotone", "pair-triple")
    bound = a.bound if a.bound is not None else default_bound(F, heavy)
    inputs.add("shape", shape)
    inputs.add("bound", bound)
    if shape == "inverse-image":
        rep = check_inverse_images(F, bound, jobs=a.jobs)
    elif shape == "difunctional-monotone":
        rep = check_difunctional_monotone(F, bound)
    elif shape == "pair-triple":
        rep = check_pair_triple_normality(F, bound)
    else:
        rep = check_preservation(F, SquareShape.parse(shape), bound, jobs=a.jobs)
    return {"report": rep, "shape": shape, "bound": bound}


def cmd_monoid(a, inputs: _Inputs) -> dict:
    if a.monoid:
        spec = _read_json(a.monoid)
    elif a.functor in ZOO_SPECS:
        spec = ZOO_SPECS[a.functor]
    elif a.functor:
        spec = _read_json(a.functor)
    else:
        raise UsageError("monoid needs --monoid spec.json or a monoid --functor")
    inputs.add("monoid", spec)
    try:
        table = spec["table"]
        carrier = spec.get("carrier") or list(table)
        M = MonoidSpec.from_table(carrier, table, spec["zero"])
    except (KeyError, TypeError) as exc:
        raise SpecError(f"malformed monoid spec: missing {exc}") from None
    res = monoid_analysis(M)
    body = {"positive": res.positive, "refinable": res.refinable}
    verdict = "pass" if res.positive and res.refinable else "fail"
    return {"report": Report(verdict, {**body, **res.witnesses} if verdict == "fail" else None), "result": body}


def cmd_barr(a, inputs: _Inputs) -> dict:
    F = _functor(a.functor, inputs)
    r = _relation(a.rel, inputs)
    lifted = barr_lift(F, r)
    return {"report": Report("pass", None, {}), "result": rel_to_json(lifted)}


def cmd_laxify(a, inputs: _Inputs) -> dict:
    F = _functor(a.functor, inputs)
    r = _relation(a.rel, inputs)
    max_mid = a.max_mid if a.max_mid is not None else len(r.dom) + 2
    inputs.add("bounds", [a.max_len, max_mid])
    lifted = laxification_approx(F, r, a.max_len, max_mid)
    rep = Report("pass", None, {"max_len": a.max_len, "max_mid": max_mid},
                 ["lower approximant of the least lax extension above the Barr lift"])
    return {"report": rep, "result": rel_to_json(lifted)}


def cmd_normality(a, inputs: _Inputs) -> dict:
    F = _functor(a.functor, inputs)
    if a.verify:
        data = _read_json(a.verify)
        inputs.add("sequence", data)
        try:
            seq = sequence_from_json(data)
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecError(f"malformed sequence in {a.verify}: {exc}") from None
        try:
            w = verify_normality_violation(F, seq)
        except ValueError as exc:
            raise SpecError(str(exc)) from None
        bounds = {"length": len(seq)}
        if w is None:
            return {"report": Report("pass", None, bounds)}
        return {"report": Report("witness", w.to_json(), bounds)}
    X = FinSet.canonical(a.set, "x")
    max_mid = a.max_mid if a.max_mid is not None else a.set + 2
    inputs.add("search", [a.set, a.max_len, max_mid, a.budget, a.seed, a.ceiling])
    res = normality_search(F, X, a.max_len, max_mid, budget=a.budget, seed=a.seed, ceiling=a.ceiling)
    return {"report": res.report()}


def cmd_bisim(a, inputs: _Inputs) -> dict:
    da, db = _read_json(a.a), _read_json(a.b)
    inputs.add("a", da)
    inputs.add("b", db)
    inputs.add("backend", a.backend)
    try:
        parse_backend(a.backend)
        Fa, ca = coalgebra_from_json(da)
        Fb, cb = coalgebra_from_json(db)
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"malformed coalgebra: {exc}") from None
    F = _functor(a.functor, inputs) if a.functor else (Fa or Fb)
    if F is None:
        raise UsageError("no functor given (use --functor or a 'functor' field)")
    ca.raw(F), cb.raw(F)
    sim = greatest_L_bisimulation(F, ca, cb, a.backend)
    beq = behavioural_equivalence(F, ca, cb)
    result = {"bisimilarity": rel_to_json(sim), "behavioural_equivalence": rel_to_json(beq),
              "agree": sim == beq}
    bounds = {"backend": a.backend}
    return {"report": Report("pass", None, bounds), "result": result}


def cmd_suite(a, inputs: _Inputs) -> dict:
    from .scenarios import run_all

    outcomes = run_all()
    board = [{"name": o.name, "ok": o.ok, "detail": o.detail} for o in outcomes]
    failed = [o.name for o in outcomes if not o.ok]
    rep = Report("fail" if failed else "pass", {"failed": failed} if failed else None,
                 {"scenarios": len(outcomes)})
    return {"report": rep, "result": board}


# ---------------------------------------------------------------- plumbing

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="laxkit", description="Relation liftings and pullback checks for finite set-functors.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, functor=True):
        if functor:
            sp.add_argument("--functor", help="zoo name or functor spec JSON file")
        sp.add_argument("--out", help="write the JSON report here")
        sp.add_argument("--seed", type=int, default=0, help="seed for sampling searches")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes for square checks")
        return sp

    sp = common(sub.add_parser("validate-functor", help="check identity and composition laws"))
    sp.add_argument("--bound", type=int)
    sp.set_defaults(run=cmd_validate)

    sp = common(sub.add_parser("check", help="pullback preservation for one square shape"))
    sp.add_argument("--shape", required=True, choices=[s.value for s in SquareShape] + list(EXTRA_SHAPES))
    sp.add_argument("--bound", type=int)
    sp.set_defaults(run=cmd_check)

    sp = common(sub.add_parser("monoid", help="positivity and refinability of a commutative monoid"))
    sp.add_argument("--monoid", help="monoid spec JSON file")
    sp.set_defaults(run=cmd_monoid)

    sp = common(sub.add_parser("barr", help="Barr lift of a relation"))
    sp.add_argument("--rel", required=True)
    sp.set_defaults(run=cmd_barr)

    sp = common(sub.add_parser("laxify", help="bounded laxification of the Barr lift"))
    sp.add_argument("--rel", required=True)
    sp.add_argument("--max-len", type=int, default=4)
    sp.add_argument("--max-mid", type=int)
    sp.set_defaults(run=cmd_laxify)

    sp = common(sub.add_parser("normality", help="verify or search normality violations"))
    sp.add_argument("--set", type=int, default=2)
    sp.add_argument("--max-len", type=int, default=4)
    sp.add_argument("--max-mid", type=int)
    sp.add_argument("--budget", type=int, default=100_000)
    sp.add_argument("--ceiling", type=int, default=200_000)
    sp.add_argument("--verify", help="sequence JSON whose composite is an identity")
    sp.set_defaults(run=cmd_normality)

    sp = common(sub.add_parser("bisim", help="greatest L-bisimulation between two coalgebras"))
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)
    sp.add_argument("--backend", default="barr", help="barr | laxify:K:M | difunctional-exact")
    sp.set_defaults(run=cmd_bisim)

    sp = common(sub.add_parser("paper-suite", help="run the reference scenarios and print a scoreboard"), functor=False)
    sp.set_defaults(run=cmd_suite)
    return p


def _text(out: dict) -> str:
    lines = [f"{out['command']}: {out['verdict']}"]
    for k in ("shape", "bound"):
        if k in out:
            lines.append(f"  {k}: {out[k]}")
    if out.get("bounds"):
        lines.append(f"  bounds: {json.dumps(out['bounds'], ensure_ascii=False)}")
    if out["command"] == "paper-suite":
        for row in out["result"]:
            lines.append(f"  {'PASS' if row['ok'] else 'FAIL'}  {row['name']}")
        ok = sum(r["ok"] for r in out["result"])
        lines.append(f"  score: {ok}/{len(out['result'])}")
    elif "result" in out:
        lines.append("  result: " + json.dumps(out["result"], ensure_ascii=False))
    if out.get("witness") is not None:
        lines.append("  witness: " + json.dumps(out["witness"], ensure_ascii=False))
    for n in out.get("notes", []):
        lines.append(f"  note: {n}")
    return "\n".join(lines)


def run(argv: list[str] | None = None) -> tuple[int, dict | None]:
    p = _parser()
    try:
        a = p.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), None
    inputs = _Inputs(a.command)
    t0 = time.perf_counter()
    try:
        res = a.run(a, inputs)
    except (UsageError, SpecError, SizeGuardError) as exc:
        print(f"laxkit {a.command}: error: {exc}", file=sys.stderr)
        return 2, None
    rep: Report = res.pop("report")
    out: dict[str, Any] = {"command": a.command, "inputs_digest": inputs.digest(), "verdict": rep.verdict}
    out.update({k: v for k, v in res.items()})
    if rep.witness is not None:
        out["witness"] = rep.witness
    out["bounds"] = rep.bounds
    if rep.notes:
        out["notes"] = rep.notes
    out["wall_time"] = round(time.perf_counter() - t0, 3)
    print(_text(out))
    if a.out:
        Path(a.out).write_text(json.dumps(out, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    return EXIT.get(rep.verdict, 1), out


def main(argv: list[str] | None = None) -> int:
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
