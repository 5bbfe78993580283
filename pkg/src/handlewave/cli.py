"""Command-line front end.

    handlewave word "A^2 B^-3"            homology and primitivity of a word
    handlewave analyze --diagram d.json   Whitehead graph, type, positivity
    handlewave meridian --diagram d.json  distinguished wave and candidates
    handlewave verify --alpha "rect P=2 S=3" --r "noPS-a R=1 U=1 a=1 b=1 c=1"
    handlewave sweep grid.json            JSON lines, one report per case

Every command emits a report; with --json it is one JSON object (or, for
sweep, one JSON line per case followed by a summary line).  Exit status is
0 when no error diagnostics were raised, 1 otherwise, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field

from . import families as fam
from .curvesys import CurveSystem, InvalidSystem, extract_words
from .freegroup import (WordSyntaxError, homology_check, is_primitive, parse_cyclic,
                        whitehead_reduce)
from .heegaard_graph import GraphError, classify_graph_type, connectivity_report, is_positive, whitehead_graph
from .waves import WaveError, candidates_for, search_waves, wave_alpha_count

REPORT_SCHEMA = "handlewave.report/1"
log = logging.getLogger("handlewave")


@dataclass
class Report:
    command: str
    inputs: dict
    result: object = None
    diagnostics: list = field(default_factory=list)
    schema: str = REPORT_SCHEMA

    @property
    def status(self) -> int:
        return 1 if any(d.get("level") == "error" for d in self.diagnostics) else 0

    def error(self, code: str, message: str):
        self.diagnostics.append({"level": "error", "code": code, "message": message})

    def to_dict(self) -> dict:
        return {"schema": self.schema, "command": self.command, "inputs": self.inputs,
                "result": self.result, "diagnostics": self.diagnostics, "status": self.status}

    @classmethod
    def from_dict(cls, d: dict) -> Report:
        if d.get("schema") != REPORT_SCHEMA:
            raise ValueError(f"unsupported report schema {d.get('schema')!r}")
        return cls(d["command"], d["inputs"], d.get("result"), list(d.get("diagnostics", [])))


def _dumps(obj) -> str:
    return json.dumps(fam._jsonable(obj), sort_keys=True, separators=(",", ":"))


def emit_report(r: Report, as_json: bool) -> str:
    if as_json:
        return _dumps(r.to_dict())
    lines = [f"{r.command}: {'ok' if r.status == 0 else 'diagnostics raised'}"]
    if r.result is not None:
        lines.extend(_text(r.result))
    for d in r.diagnostics:
        lines.append(f"{d['level']}: [{d['code']}] {d['message']}")
    return "\n".join(lines)


def _text(obj, indent: str = "  ") -> list[str]:
    if not isinstance(obj, dict):
        return [indent + json.dumps(fam._jsonable(obj), sort_keys=True)]
    out = []
    for k in sorted(obj):
        v = obj[k]
        if isinstance(v, (dict, list)) and len(json.dumps(fam._jsonable(v))) > 72:
            out.append(f"{indent}{k}:")
            out.extend(_text(v, indent + "  ") if isinstance(v, dict) else
                       [indent + "  " + json.dumps(fam._jsonable(x), sort_keys=True) for x in v])
        else:
            out.append(f"{indent}{k}: {json.dumps(fam._jsonable(v), sort_keys=True)}")
    return out


# -- inputs -------------------------------------------------------------------

_FORMS = {"rect": "rectangular", "rectangular": "rectangular", "nonrect": "non-rectangular",
          "non-rectangular": "non-rectangular", "seifert-m": "seifert-m", "sm": "seifert-m"}


class UsageError(ValueError):
    pass


def _keyvals(tokens, allowed) -> dict:
    out = {}
    for t in tokens:
        k, sep, v = t.partition("=")
        if not sep or k not in allowed:
            raise UsageError(f"expected one of {', '.join(allowed)} as key=value, got {t!r}")
        try:
            out[k] = int(v)
        except ValueError:
            raise UsageError(f"{k} must be an integer, got {v!r}") from None
    return out


def parse_alpha(text: str) -> fam.AlphaParams:
    head, *rest = text.split()
    if head not in _FORMS:
        raise UsageError(f"unknown alpha form {head!r}")
    return fam.AlphaParams(_FORMS[head], **_keyvals(rest, ("P", "S", "a", "b")))


def parse_r(text: str) -> fam.RFamilyParams:
    head, *rest = text.split()
    if head not in fam.FIGURES:
        raise UsageError(f"unknown figure {head!r}; expected one of {', '.join(fam.FIGURES)}")
    return fam.RFamilyParams(head, **_keyvals(rest, ("R", "U", "a", "b", "c", "Q", "T", "s")))


def _load_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _load_diagram(args, rep: Report) -> CurveSystem | None:
    """The diagram from --diagram, or the first (or --index'th) drawing of --alpha/--r."""
    if args.diagram and (args.alpha or args.r):
        raise UsageError("--diagram and --alpha/--r are mutually exclusive")
    if args.diagram:
        rep.inputs["diagram"] = args.diagram
        try:
            sys_ = CurveSystem.from_dict(_load_json(args.diagram))
        except FileNotFoundError:
            rep.error("file-not-found", f"no such file: {args.diagram}")
            return None
        except (ValueError, KeyError, TypeError) as e:
            rep.error("schema", f"{args.diagram}: {e}")
            return None
        diags = sys_.diagnostics()
        if diags:
            for d in diags:
                rep.diagnostics.append(dict(d.as_dict(), level="error"))
            return None
        return sys_
    if not (args.alpha and args.r):
        raise UsageError("give --diagram, or both --alpha and --r")
    alpha, r = parse_alpha(args.alpha), parse_r(args.r)
    rep.inputs.update(alpha=args.alpha, r=args.r, index=args.index)
    try:
        for w in alpha.check():
            rep.diagnostics.append({"level": "warning", "code": "caption-range", "message": w})
        drawings = list(fam.realizations(alpha, r))
    except fam.FamilyError as e:
        rep.error(e.constraint, str(e))
        return None
    if args.index >= len(drawings):
        rep.error("unrealizable", f"{len(drawings)} drawing(s) for these parameters; index {args.index} requested")
        return None
    return drawings[args.index]


# -- commands -----------------------------------------------------------------

def cmd_word(args, rep: Report):
    rep.inputs["word"] = args.text
    try:
        w = parse_cyclic(args.text)
    except WordSyntaxError as e:
        rep.error("syntax", str(e))
        return
    h = homology_check(w.letters)
    res = {"word": w.letters, "length": len(w), "homology": h.as_dict()}
    if w.letters:
        red, moves = whitehead_reduce(w.letters)
        res.update(primitive=is_primitive(w.letters), whitehead_minimum=red.letters, whitehead_moves=len(moves))
    else:
        res["primitive"] = False
        rep.diagnostics.append({"level": "warning", "code": "empty", "message": "the word reduces to the identity"})
    if not h.torsion_free:
        rep.diagnostics.append({"level": "warning", "code": "torsion",
                                "message": f"H_1 of the 2-handle addition has Z/{h.gcd} torsion"})
    rep.result = res


def _graph_result(sys_: CurveSystem, curve: str) -> dict:
    g = whitehead_graph(sys_, curve)
    pos, witness = is_positive(g)
    out = {"graph": g.to_dict(), "connectivity": connectivity_report(g), "positive": pos, "witness": witness}
    try:
        out["type"] = classify_graph_type(g)
    except GraphError as e:
        out["type"] = None
        out["type_error"] = str(e)
    return out


def cmd_analyze(args, rep: Report):
    sys_ = _load_diagram(args, rep)
    if sys_ is None:
        return
    rep.inputs["curve"] = args.curve
    try:
        res = _graph_result(sys_, args.curve)
    except (KeyError, GraphError) as e:
        rep.error("curve", str(e).strip("'\""))
        return
    res["words"] = {k: v.letters for k, v in extract_words(sys_).items()}
    rep.result = res


def cmd_meridian(args, rep: Report):
    sys_ = _load_diagram(args, rep)
    if sys_ is None:
        return
    rep.inputs.update(curve=args.curve, alpha_curve=args.alpha_curve)
    try:
        search = search_waves(sys_, args.curve)
    except KeyError as e:
        rep.error("curve", str(e).strip("'\""))
        return
    except WaveError as e:
        rep.error("wave", str(e))
        return
    w = search.chosen
    res = {"wave": None, "waves_found": len(search.waves), "reason": search.reason, "candidates": []}
    if w is None:
        rep.error("wave", f"no distinguished wave: {search.reason}")
        rep.result = res
        return
    res["wave"] = w.as_dict()
    try:
        cands = candidates_for(sys_, w)
    except ValueError as e:
        rep.error("surgery", str(e))
        rep.result = res
        return
    res["candidates"] = [c.as_dict() for c in cands]
    if not cands:
        rep.diagnostics.append({"level": "warning", "code": "degenerate",
                                "message": "both surgery components reproduce the base curve"})
    if args.alpha_curve in sys_.names():
        counts = wave_alpha_count(sys_, w, args.alpha_curve)
        res["alpha_count"] = counts if args.signed else {"unsigned": counts["unsigned"]}
    rep.result = res


def _case_result(case: fam.CaseReport, signed: bool) -> dict:
    d = case.as_dict()
    if not signed and d.get("counts"):
        d["counts"] = {"unsigned": d["counts"]["unsigned"]}
    return fam._jsonable(d)


def cmd_verify(args, rep: Report):
    sys_ = _load_diagram(args, rep)
    if sys_ is None:
        rep.result = {"branch": None, "final_branch": None}
        return
    case = fam.analyze_case(sys_)
    rep.diagnostics.extend(case.diagnostics)
    rep.result = _case_result(case, args.signed)


def cmd_sweep(args, rep: Report, out) -> int:
    rep.inputs["grid"] = args.grid
    try:
        grid = _load_json(args.grid)
    except FileNotFoundError:
        rep.error("file-not-found", f"no such file: {args.grid}")
        return _finish(rep, args, out)
    except ValueError as e:
        rep.error("schema", f"{args.grid}: {e}")
        return _finish(rep, args, out)
    try:
        res = fam.run_sweep(grid)
    except (fam.GridError, TypeError) as e:
        rep.error("schema", str(e))
        return _finish(rep, args, out)
    summary = fam.summarize(res.reports, res.skipped)
    summary["points"] = res.points
    for case in res.reports:
        rep.diagnostics.extend(dict(d, case=case.params) for d in case.diagnostics if d["level"] == "error")
        if args.json:
            out.write(_dumps(dict(_case_result(case, args.signed), record="case")) + "\n")
        elif args.verbose:
            out.write(f"{_dumps(case.params)} -> {case.branch} / {case.final_branch}\n")
    rep.result = summary
    return _finish(rep, args, out)


def _finish(rep: Report, args, out) -> int:
    if not args.quiet or rep.status:
        out.write(emit_report(rep, args.json) + "\n")
    return rep.status


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--signed", action="store_true", help="include signed wave/alpha counts")
    common.add_argument("-v", "--verbose", action="count", default=0, help="more detail (repeatable)")
    common.add_argument("-q", "--quiet", action="store_true", help="print only when diagnostics are raised")

    p = argparse.ArgumentParser(prog="handlewave", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    w = sub.add_parser("word", parents=[common], help="homology and primitivity of a word")
    src = w.add_mutually_exclusive_group(required=True)
    src.add_argument("text", nargs="?", help="word such as 'A^2 B^-3 A b'")
    src.add_argument("--file", help="read the word from a file")

    def diagram_input(sp):
        sp.add_argument("--diagram", help="diagram JSON file")
        sp.add_argument("--alpha", help="alpha parameters, e.g. 'rect P=2 S=3'")
        sp.add_argument("--r", help="R family, e.g. 'noPS-a R=1 U=1 a=1 b=1 c=1'")
        sp.add_argument("--index", type=int, default=0, help="which drawing of the family to use")
        sp.add_argument("--curve", default="R", help="base curve (default R)")

    for name, text in (("analyze", "Whitehead graph, type and positivity"),
                       ("meridian", "distinguished wave and meridian candidates"),
                       ("verify", "full case analysis of one (alpha, R) pair")):
        sp = sub.add_parser(name, parents=[common], help=text)
        diagram_input(sp)
        if name == "meridian":
            sp.add_argument("--alpha-curve", default="alpha", help="curve whose wave count is reported")
    s = sub.add_parser("sweep", parents=[common], help="analyze every case of a parameter grid")
    s.add_argument("grid", help="grid JSON file")
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(message)s")
    rep = Report(args.command, {})
    try:
        if args.command == "word" and args.file:
            try:
                with open(args.file, encoding="utf-8") as fh:
                    args.text = fh.read().strip()
            except FileNotFoundError:
                rep.error("file-not-found", f"no such file: {args.file}")
                return _finish(rep, args, out)
        if args.command == "sweep":
            return cmd_sweep(args, rep, out)
        {"word": cmd_word, "analyze": cmd_analyze, "meridian": cmd_meridian, "verify": cmd_verify}[args.command](args, rep)
    except UsageError as e:
        parser.error(str(e))
    except fam.FamilyError as e:
        rep.error(e.constraint, str(e))
    except InvalidSystem as e:
        rep.diagnostics.extend(dict(d.as_dict(), level="error") for d in e.diagnostics)
    log.debug("finished %s with %d diagnostics", args.command, len(rep.diagnostics))
    return _finish(rep, args, out)


if __name__ == "__main__":
    sys.exit(main())
