"""JSON schemas for complexes, patterns and companions, plus DOT and text emitters."""

from __future__ import annotations

import json
from typing import Any, Hashable

from .alexander import LaurentPoly1, LaurentPoly2
from .chain import ChainError, FreeComplex, Generator
from .ring import RingError, format_element, half_str, parse_element, parse_half


class SchemaError(ValueError):
    """Malformed input document."""


def _id_out(gid: Hashable) -> Any:
    if isinstance(gid, tuple):
        return [_id_out(x) for x in gid]
    return gid


def _id_in(raw: Any) -> Hashable:
    if isinstance(raw, list):
        return tuple(_id_in(x) for x in raw)
    if isinstance(raw, (str, int)) or raw is None:
        return raw
    raise SchemaError(f"bad generator id {raw!r}")


def _half_out(x2: int) -> int | str:
    return x2 // 2 if x2 % 2 == 0 else half_str(x2)


def complex_to_json(C: FreeComplex) -> dict:
    gens = []
    for g in C.generators:
        rec: dict[str, Any] = {"id": _id_out(g.id), "grw": g.grw, "grz": g.grz}
        if g.alex2:
            rec["alex"] = [_half_out(a) for a in g.alex2]
        if g.algdeg is not None:
            rec["algdeg"] = g.algdeg
        if g.block is not None:
            rec["block"] = _id_out(g.block)
        gens.append(rec)
    arrows = [{"from": _id_out(s), "to": _id_out(t), "coef": format_element(c)}
              for s, t, c in C.arrows()]
    return {"generators": gens, "arrows": arrows}


def complex_from_json(data: dict) -> FreeComplex:
    if not isinstance(data, dict) or "generators" not in data:
        raise SchemaError("complex document needs a 'generators' list")
    try:
        gens = []
        for rec in data["generators"]:
            alex = tuple(parse_half(a) for a in rec.get("alex", []))
            if not alex:
                alex = (int(rec["grw"]) - int(rec["grz"]),)
            block = rec.get("block")
            gens.append(Generator(_id_in(rec["id"]), int(rec["grw"]), int(rec["grz"]), alex,
                                  block=_id_in(block) if block is not None else None,
                                  algdeg=rec.get("algdeg")))
        diff: dict = {}
        for rec in data.get("arrows", []):
            coef = parse_element(str(rec["coef"]), 0)
            s, t = _id_in(rec["from"]), _id_in(rec["to"])
            row = diff.setdefault(s, {})
            row[t] = row[t] + coef if t in row else coef
        return FreeComplex(tuple(gens), diff)
    except (KeyError, TypeError, RingError) as exc:
        raise SchemaError(f"bad complex document: {exc}") from None
    except (ValueError, ChainError) as exc:
        raise SchemaError(f"bad complex document: {exc}") from None


def pattern_to_json(P) -> dict:
    return {
        "name": P.name,
        "lk": P.l,
        "terms": [{"a1": _half_out(a), "a2": _half_out(b), "c": c} for (a, b), c in P.delta_l.coeffs.items()],
        "deltaP": {str(k): v for k, v in P.delta_p.coeffs.items()},
    }


def pattern_from_json(data: dict):
    from .bimodule import PatternData

    try:
        terms = {(parse_half(t["a1"]), parse_half(t["a2"])): int(t["c"]) for t in data["terms"]}
        dp = {int(k): int(v) for k, v in data["deltaP"].items()}
        return PatternData(str(data.get("name", "pattern")), LaurentPoly2(terms), LaurentPoly1(dp),
                           int(data["lk"]))
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise SchemaError(f"bad pattern document: {exc}") from None


def load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: {exc}") from None


def _label(gid: Hashable) -> str:
    if isinstance(gid, tuple):
        return ",".join(_label(x) for x in gid)
    return str(gid)


def to_dot(C: FreeComplex, name: str = "cfk") -> str:
    lines = [f"digraph {json.dumps(name)} {{"]
    for g in C.generators:
        a = half_str(g.alex2[-1]) if g.alex2 else half_str(g.grw - g.grz)
        lines.append(f"  {json.dumps(_label(g.id))} [label={json.dumps(f'({g.grw},{g.grz},{a})')}];")
    for s, t, c in C.arrows():
        lines.append(f"  {json.dumps(_label(s))} -> {json.dumps(_label(t))} "
                     f"[label={json.dumps(format_element(c))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_text(C: FreeComplex) -> str:
    """Generators sorted by Alexander grading (top down), then arrows."""
    gens = sorted(C.generators, key=lambda g: (-(g.alex2[-1] if g.alex2 else 0), -g.grw, repr(g.id)))
    lines = [f"{len(C)} generators, {C.num_arrows()} arrows"]
    for g in gens:
        a = half_str(g.alex2[-1]) if g.alex2 else "?"
        lines.append(f"  {_label(g.id)}  gr=({g.grw},{g.grz})  A={a}")
    for s, t, c in sorted(C.arrows(), key=lambda e: (repr(e[0]), repr(e[1]))):
        lines.append(f"  {_label(s)} -> {_label(t)}  {format_element(c)}")
    return "\n".join(lines) + "\n"


def h_table_text(H, s_lo: int, s_hi: int, t_lo: int, t_hi: int) -> str:
    """Row per t (top down), column per s, with half-integer headers."""
    cols = list(range(s_lo, s_hi + 1, 2))
    width = max(5, *(len(half_str(s)) + 1 for s in cols))
    out = ["t\\s".rjust(6) + "".join(half_str(s).rjust(width) for s in cols)]
    for t, row in H.rows(s_lo, s_hi, t_lo, t_hi):
        out.append(half_str(t).rjust(6) + "".join(str(v).rjust(width) for v in row))
    return "\n".join(out) + "\n"


BIMODULE_MAPS = ("LW", "LZ", "Lsigma", "Ltau", "hWZ", "hZW", "hSigW", "hSigZ", "hTauW", "hTauZ")


def _morphism_json(f) -> list[dict]:
    return [{"from": _id_out(s), "to": _id_out(t), "coef": format_element(c)}
            for s, row in sorted(f.entries.items(), key=lambda e: repr(e[0]))
            for t, c in sorted(row.items(), key=lambda e: repr(e[0]))]


def bimodule_to_json(B, s_values: list[int] | None = None) -> dict:
    """Staircases in the complex schema plus labeled morphism lists, per column s."""
    cols = []
    for s2 in s_values if s_values is not None else B.s_values():
        rec: dict[str, Any] = {"s": _half_out(s2), "C": complex_to_json(B.C(s2)), "maps": {}}
        for name in BIMODULE_MAPS:
            try:
                rec["maps"][name] = _morphism_json(getattr(B, name)(s2))
            except Exception:  # neighbour column outside the window
                continue
        cols.append(rec)
    return {"pattern": pattern_to_json(B.pattern), "S": complex_to_json(B.S), "columns": cols}


def bimodule_text(B, s_values: list[int] | None = None) -> str:
    """One block per column: generators of C_s, then each labeled arrow ``name: x -> y | coef``."""
    doc = bimodule_to_json(B, s_values)
    lines = [f"pattern {B.pattern.name}  lk={B.l}  N={half_str(B.N2)}",
             "S: " + ", ".join(f"{_label(_id_in(g['id']))}({g['grw']},{g['grz']})"
                               for g in doc["S"]["generators"])]
    for col in doc["columns"]:
        gens = ", ".join(f"{_label(_id_in(g['id']))}({g['grw']},{g['grz']})" for g in col["C"]["generators"])
        lines.append(f"C_{half_str(parse_half(col['s']))}: {gens}")
        for a in col["C"]["arrows"]:
            lines.append(f"  d: {_label(_id_in(a['from']))} -> {_label(_id_in(a['to']))} | {a['coef']}")
        for name, arrows in col["maps"].items():
            for a in arrows:
                lines.append(f"  {name}: {_label(_id_in(a['from']))} -> {_label(_id_in(a['to']))} | {a['coef']}")
    return "\n".join(lines) + "\n"
