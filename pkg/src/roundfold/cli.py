"""Command-line interface.

    rfm validate FILE            check a descriptor or trace
    rfm reeb FILE [--dot OUT]    quotient-model cells and component graph
    rfm homology FILE            exact integer homology of the quotient model
    rfm euler FILE               Euler characteristic of the source manifold
    rfm prop1 FILE               sphere-fiber class report
    rfm classify FILE            recognize the source manifold
    rfm synthesize EXPR [-n N]   build a descriptor for a bundle sum
    rfm combine A B --component ID [--assume-null-homotopic]
    rfm decompose F --region R --component ID [--assume-null-homotopic]
    rfm spin TRACE -n N          spin a trace into a descriptor
    rfm preset NAME              emit a catalog descriptor
    rfm list-presets

Exit codes: 0 success, 1 diagnostics, 2 usage error.  `--json` selects a
stable report {command, diagnostics, input, provenance, result} with
alphabetically ordered fields; integers beyond 64 bits are emitted as
decimal strings.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import dsl
from .classify import classify, dim5_recognizer, synthesize
from .constructions import list_presets, preset, trivial_spinning
from .descriptor import RoundFoldDescriptor
from .errors import RoundFoldError
from .expressions import ManifoldExpr, expr_to_json
from .reeb import build_reeb, euler_characteristic, prop1_report, reeb_homology
from .surgery import CombineSite, DecomposeSite, combine, decompose
from .traces import MorseTrace

_INT64_MAX = 2**63 - 1


def _stringify_big(obj):
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, int):
        return str(obj) if abs(obj) > _INT64_MAX else obj
    if isinstance(obj, dict):
        return {k: _stringify_big(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_stringify_big(v) for v in obj]
    return obj


def _emit_json(out, command, input_desc, result, provenance=None, diagnostics=()):
    report = {
        "command": command,
        "diagnostics": [d.to_json() if hasattr(d, "to_json") else d for d in diagnostics],
        "input": input_desc,
        "provenance": provenance or {},
        "result": result,
    }
    out.write(json.dumps(_stringify_big(report), sort_keys=True, indent=2) + "\n")


def _print_diagnostics(err, path, diagnostics):
    for d in diagnostics:
        err.write(f"{path}:{d}\n")


def _load(path, err):
    """Parse a source file; (value, diagnostics).  IO errors become diagnostics."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        return None, [dsl.Diagnostic("error", str(exc), 1, 1)]
    return dsl.parse(text, path=path)


def _load_descriptor(path, err):
    value, diagnostics = _load(path, err)
    if diagnostics or value is None:
        return None, diagnostics
    if not isinstance(value, RoundFoldDescriptor):
        return None, [
            dsl.Diagnostic("error", f"expected a roundfold block, found {type(value).__name__}", 1, 1)
        ]
    return value, []


def _descriptor_provenance(d: RoundFoldDescriptor):
    p = d.provenance
    return {
        "notes": list(p.notes),
        "assumptions": list(p.assumptions),
        "restriction_trivial": p.restriction_trivial,
    }


def _forest_json(forest):
    return {
        "vertices": [
            {"id": v.id, "kind": v.kind, "event": v.event, "component": v.component}
            for v in forest.vertices
        ],
        "edges": [
            {
                "region": e.region,
                "component": e.component,
                "fiber": expr_to_json(e.fiber),
                "tail": e.tail,
                "head": e.head,
            }
            for e in forest.edges
        ],
        "capped": list(forest.capped),
        "free_leaves": list(forest.free_leaves),
        "connected": forest.connected,
        "cycles": forest.cycle_count,
    }


def _dot_of_forest(forest) -> str:
    lines = ["graph L {", "  node [shape=circle];"]
    for v in forest.vertices:
        if v.id in forest.capped:
            lines.append(f'  "{v.id}" [shape=doublecircle];')
        elif v.id in forest.free_leaves:
            lines.append(f'  "{v.id}" [shape=box];')
        else:
            lines.append(f'  "{v.id}";')
    for e in forest.edges:
        label = f"{e.component} : {dsl.print_expr(e.fiber)}"
        lines.append(f'  "{e.tail}" -- "{e.head}" [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="rfm", description="round fold map calculus"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.add_argument("--json", action="store_true", help="emit a JSON report")
        return p

    p = add("validate", help="check a descriptor or trace file")
    p.add_argument("file")
    p = add("reeb", help="quotient model: cells and component graph")
    p.add_argument("file")
    p.add_argument("--dot", metavar="OUT", help="write the component graph in DOT syntax")
    p = add("homology", help="integer homology of the quotient model")
    p.add_argument("file")
    p = add("euler", help="Euler characteristic of the source manifold")
    p.add_argument("file")
    p = add("prop1", help="sphere-fiber class report")
    p.add_argument("file")
    p = add("classify", help="recognize the source manifold")
    p.add_argument("file")
    p = add("dim5", help="dimension-5 plane-target recognizer")
    p.add_argument("input", help="descriptor file or manifold expression")
    p = add("synthesize", help="descriptor for a connected sum of bundles")
    p.add_argument("expr", help="manifold expression (or a manifold file)")
    p.add_argument("-n", type=int, default=None, help="target dimension when ambiguous")
    p = add("combine", help="graft map B onto a core sphere of map A")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--component", required=True, help="standard-sphere core component of A")
    p.add_argument("--assume-null-homotopic", action="store_true")
    p = add("decompose", help="split a map at a regular value sphere")
    p.add_argument("file")
    p.add_argument("--region", type=int, required=True)
    p.add_argument("--component", required=True)
    p.add_argument("--assume-null-homotopic", action="store_true")
    p = add("spin", help="spin a trace file into a descriptor")
    p.add_argument("file")
    p.add_argument("-n", type=int, required=True, help="target dimension")
    p = add("preset", help="emit a catalog descriptor")
    p.add_argument("name")
    add("list-presets", help="list the preset catalog")
    return parser


def run_cli(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _dispatch(args, out, err)
    except RoundFoldError as exc:
        err.write(f"error: {exc}\n")
        return 1


def _dispatch(args, out, err) -> int:
    command = args.command

    if command == "list-presets":
        entries = list_presets()
        if args.json:
            _emit_json(out, command, {}, entries)
        else:
            for e in entries:
                out.write(f"{e['name']}  [{e['kind']}]\n")
        return 0

    if command == "preset":
        entry = preset(args.name)
        if args.json:
            result = {
                "descriptor": dsl.descriptor_to_json(entry.descriptor),
                "expected_manifold": None
                if entry.expected_manifold is None
                else dsl.print_expr(entry.expected_manifold),
                "expected_confidence": entry.expected_confidence,
                "alias": None if entry.alias is None else dsl.print_expr(entry.alias),
                "note": entry.note,
            }
            _emit_json(out, command, {"name": args.name}, result)
        else:
            out.write(str(entry.descriptor))
        return 0

    if command == "synthesize":
        text = args.expr
        if os.path.isfile(text):
            with open(text, "r", encoding="utf-8") as fh:
                text = fh.read()
            value, diagnostics = dsl.parse(text)
        else:
            value, diagnostics = dsl.parse_expr_text(text)
        if diagnostics or not isinstance(value, ManifoldExpr):
            if not diagnostics:
                diagnostics = [dsl.Diagnostic("error", "expected a manifold expression", 1, 1)]
            _print_diagnostics(err, "<expr>", diagnostics)
            if args.json:
                _emit_json(out, command, {"expr": args.expr}, None, diagnostics=diagnostics)
            return 1
        d = synthesize(value, n=args.n)
        if args.json:
            _emit_json(
                out, command, {"expr": dsl.print_expr(value)},
                dsl.descriptor_to_json(d), provenance=_descriptor_provenance(d),
            )
        else:
            out.write(str(d))
        return 0

    if command == "dim5":
        if os.path.isfile(args.input):
            value, diagnostics = _load_descriptor(args.input, err)
            if diagnostics:
                _print_diagnostics(err, args.input, diagnostics)
                return 1
        else:
            value, diagnostics = dsl.parse_expr_text(args.input)
            if diagnostics or not isinstance(value, ManifoldExpr):
                _print_diagnostics(err, "<expr>", diagnostics)
                return 1
        verdict = dim5_recognizer(value)
        if args.json:
            _emit_json(out, command, {"input": args.input}, verdict.to_json())
        else:
            status = {True: "admits", False: "does not admit", None: "undetermined"}[
                verdict.admits
            ]
            out.write(f"{status}: {verdict.reason}\n")
            out.write(f"criterion: {verdict.citation}\n")
            for note in verdict.notes:
                out.write(f"note: {note}\n")
            if verdict.witness is not None:
                out.write(str(verdict.witness))
        return 0

    if command == "combine":
        a, diag_a = _load_descriptor(args.file_a, err)
        if diag_a:
            _print_diagnostics(err, args.file_a, diag_a)
            return 1
        b, diag_b = _load_descriptor(args.file_b, err)
        if diag_b:
            _print_diagnostics(err, args.file_b, diag_b)
            return 1
        result, note = combine(
            a, CombineSite(args.component), b,
            assume_null_homotopic=args.assume_null_homotopic,
        )
        if args.json:
            _emit_json(
                out, command,
                {"a": args.file_a, "b": args.file_b, "component": args.component},
                dsl.descriptor_to_json(result),
                provenance={"note": note.to_json(), **_descriptor_provenance(result)},
            )
        else:
            out.write(f"# {note.relation}\n")
            out.write(str(result))
        return 0

    if command == "decompose":
        d, diagnostics = _load_descriptor(args.file, err)
        if diagnostics:
            _print_diagnostics(err, args.file, diagnostics)
            return 1
        witness = "assumed" if args.assume_null_homotopic else "derived-from-sphere-class"
        f1, f2, note = decompose(
            d, DecomposeSite(args.region, args.component, null_homotopy_witness=witness)
        )
        if args.json:
            _emit_json(
                out, command,
                {"file": args.file, "region": args.region, "component": args.component},
                {"f1": dsl.descriptor_to_json(f1), "f2": dsl.descriptor_to_json(f2)},
                provenance={"note": note.to_json()},
            )
        else:
            out.write(f"# {note.relation}\n# piece kept around the site:\n")
            out.write(str(f1))
            out.write("# split-off piece:\n")
            out.write(str(f2))
        return 0

    if command == "spin":
        value, diagnostics = _load(args.file, err)
        if diagnostics or value is None:
            _print_diagnostics(err, args.file, diagnostics)
            return 1
        if not isinstance(value, MorseTrace):
            err.write(f"error: expected a trace block in {args.file}\n")
            return 1
        d = trivial_spinning(value, args.n)
        if args.json:
            _emit_json(out, command, {"file": args.file, "n": args.n},
                       dsl.descriptor_to_json(d))
        else:
            out.write(str(d))
        return 0

    # Remaining commands operate on one parsed file.
    value, diagnostics = _load(args.file, err)
    input_desc = {"path": args.file, "kind": type(value).__name__ if value else None}
    if diagnostics:
        _print_diagnostics(err, args.file, diagnostics)
        if args.json:
            _emit_json(out, command, input_desc, None, diagnostics=diagnostics)
        return 1
    if value is None:
        return 1

    if command == "validate":
        if isinstance(value, (MorseTrace, ManifoldExpr)):
            result = {"ok": True, "kind": type(value).__name__}
            if args.json:
                _emit_json(out, command, input_desc, result)
            else:
                out.write("ok\n")
            return 0
        report = value.validation()
        regions = None
        if report.regions is not None:
            regions = [
                [{"component": c, "fiber": expr_to_json(f)} for c, f in region]
                for region in report.regions
            ]
        result = {
            "ok": report.ok,
            "violations": [str(v) for v in report.violations],
            "regions": regions,
            "singular_components": value.singular_component_count,
        }
        if args.json:
            _emit_json(out, command, input_desc, result,
                       provenance=_descriptor_provenance(value))
        else:
            out.write("ok\n" if report.ok else "invalid:\n")
            for v in report.violations:
                out.write(f"  {v}\n")
        return 0

    if not isinstance(value, RoundFoldDescriptor):
        err.write(f"error: {command} needs a roundfold descriptor file\n")
        return 1

    if command == "reeb":
        model = build_reeb(value)
        forest = model.forest
        if getattr(args, "dot", None):
            with open(args.dot, "w", encoding="utf-8") as fh:
                fh.write(_dot_of_forest(forest))
        result = {
            "cells": {str(d): len(names) for d, names in sorted(model.complex.cells.items())},
            "caps": model.cap_count,
            "forest": _forest_json(forest),
        }
        if args.json:
            _emit_json(out, command, input_desc, result)
        else:
            cells = ", ".join(
                f"{len(names)} in degree {d}" for d, names in sorted(model.complex.cells.items())
            )
            out.write(f"cells: {cells}\n")
            out.write(
                f"graph: {len(forest.edges)} edges, {len(forest.vertices)} vertices, "
                f"{len(forest.capped)} capped leaves, {len(forest.free_leaves)} free leaves, "
                f"{forest.cycle_count} cycles, "
                f"{'connected' if forest.connected else 'disconnected'}\n"
            )
        return 0

    if command == "homology":
        profile = reeb_homology(value)
        if args.json:
            _emit_json(out, command, input_desc, {"profile": profile.to_json()})
        else:
            for d, r, t in profile.entries:
                torsion = "" if not t else "  torsion " + " ".join(f"Z/{f}" for f in t)
                out.write(f"H_{d}: rank {r}{torsion}\n")
        return 0

    if command == "euler":
        chi = euler_characteristic(value)
        if args.json:
            _emit_json(out, command, input_desc, {"value": chi})
        else:
            out.write(f"{chi}\n")
        return 0

    if command == "prop1":
        report = prop1_report(value)
        if args.json:
            _emit_json(out, command, input_desc, report.to_json())
        else:
            for c in report.checks:
                mark = "ok" if c.ok else "FAIL"
                detail = f" ({c.detail})" if c.detail else ""
                out.write(f"[{mark}] {c.name}{detail}\n")
            if report.eligible and report.h_degree is not None:
                out.write(f"H_{report.h_degree}(M) rank = {report.h_rank}\n")
            for s in report.pi_statements:
                out.write(f"{s}\n")
            if report.cross_check_ok is not None:
                out.write(
                    "quotient-model cross-check: "
                    + ("consistent\n" if report.cross_check_ok else "INCONSISTENT\n")
                )
        return 0

    if command == "classify":
        result = classify(value)
        if args.json:
            _emit_json(out, command, input_desc, result.to_json(),
                       provenance=_descriptor_provenance(value))
        else:
            if result.classified:
                out.write(f"manifold: {dsl.print_expr(result.manifold)}\n")
                out.write(f"confidence: {result.confidence}\n")
                for record in result.chain:
                    out.write(f"[{record.rule}] {record.name}: {record.conclusion}\n")
                    for h in record.hypotheses:
                        mark = "ok" if h.ok else "FAIL"
                        out.write(f"    [{mark}] {h.name}\n")
                    for note in record.notes:
                        out.write(f"    note: {note}\n")
            else:
                out.write("unclassified\n")
                for reason in result.unclassified_reasons:
                    out.write(f"  {reason}\n")
        return 0

    raise RoundFoldError(f"unhandled command {command!r}")  # pragma: no cover


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
