"""``qlaws`` command-line driver.

Exit codes::

    0  success, equal, refines
    1  not equal, violates, a law or certificate check failed
    2  inconclusive (a loop or recursion truncation did not converge)
    3  usage or validation error (syntax, unknown names, ill-formed input,
       dimension cap, program outside the domain of a pass)

Every command accepts ``--format structured`` and then prints exactly one
JSON object with at least the keys ``command``, ``status`` and ``exit_code``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from qlaws.cli.parser import ParseError, parse
from qlaws.cli.printer import show, show_file
from qlaws.cli.replay import ReplayError, decode_params, locate, run_replay
from qlaws.cli.workspace import WorkspaceError, load_workspace
from qlaws.config import DimensionCapError
from qlaws.laws import CATALOG, LAYERS, LTR, RTL, LawError, apply_law, manifest
from qlaws.laws.harness import HARNESS_CFG, verify_law
from qlaws.semantics import circ_sem, semantic_set
from qlaws.syntax import Ket, Node, Var, format_path, is_circuit, node_fields, parse_path
from qlaws.transform import (
    TransformError,
    check_tail,
    defer_measurements,
    normalize_circuit,
    normalize_program,
    tail_to_loop,
)
from qlaws.verify import (
    EQUAL,
    INCONCLUSIVE,
    REFINEMENT_CLAUSES,
    REFINES,
    check_eq,
    check_refines,
    verify_refinement_laws,
)

OK, FAIL, UNDECIDED, USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _ArgParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# helpers


def _verdict_code(verdict: str) -> int:
    if verdict in (EQUAL, REFINES):
        return OK
    if verdict == INCONCLUSIVE:
        return UNDECIDED
    return FAIL


def _mat(a: np.ndarray) -> list:
    a = np.asarray(a)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def ast_json(node) -> object:
    """Plain JSON view of a syntax tree."""
    if isinstance(node, Node):
        out = {"node": type(node).__name__}
        for k, v in node_fields(node).items():
            out[k] = ast_json(v)
        return out
    if isinstance(node, Var):
        return {"var": node.name, "dim": node.dim}
    if isinstance(node, Ket):
        return [[float(z.real), float(z.imag)] for z in node.amps]
    if isinstance(node, (tuple, list)):
        return [ast_json(x) for x in node]
    return node


def _cli_params(pairs) -> dict:
    out = {}
    for item in pairs or ():
        if "=" not in item:
            raise UsageError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        k = k.strip()
        if k in ("basis", "perm"):
            try:
                v = json.loads(v)
            except json.JSONDecodeError:
                v = [x.strip() for x in v.split(",")]
        out[k] = v
    return out


class Ctx:
    """Per-invocation state: workspace, output format and report."""

    def __init__(self, args):
        self.args = args
        self.structured = args.format == "structured"
        self.ws = load_workspace(args.workspace, args.config)
        self._uses: list = []

    def load(self, path):
        parsed, lib = self.ws.load_program(path)
        return parsed, lib

    def emit_program(self, node: Node, lib, base_lib, source: Path, out: str | None) -> dict:
        """Write (or print) a program with a ``use`` header for synthesized entries."""
        ext = lib.extension_of(base_lib)
        src_dir = self.ws.resolve(source).resolve().parent
        uses = []
        parsed_uses = self._uses
        info: dict = {"program": show(node), "synthesized": sorted(list(ext.gates) + list(ext.measurements))}
        if out is not None:
            out_path = Path(out)
            out_dir = out_path.resolve().parent
            uses = [os.path.relpath(src_dir / u, out_dir) for u in parsed_uses]
            if len(ext):
                lib_path = out_path.with_suffix(".lib.json")
                ext.dump(lib_path)
                uses.append(lib_path.name)
                info["library"] = str(lib_path)
            out_path.write_text(show_file(node, uses))
            info["written"] = str(out_path)
        else:
            uses = list(parsed_uses)
            if len(ext):
                info["library_json"] = ext.to_json()
            info["text"] = show_file(node, uses)
        return info


def _print_matrix(name: str, a: np.ndarray) -> None:
    with np.printoptions(precision=4, suppress=True, linewidth=120):
        print(f"{name} =")
        print(np.asarray(a))


# ---------------------------------------------------------------------------
# commands; each returns (exit code, report dict) and prints its text form


def cmd_parse(c: Ctx):
    parsed, lib = c.load(c.args.file)
    rep = {"program": show(parsed.program),
           "variables": {n: v.dim for n, v in parsed.variables.items()},
           "uses": parsed.uses}
    if c.args.ast:
        rep["ast"] = ast_json(parsed.program)
    if not c.structured:
        print(show_file(parsed.program, parsed.uses), end="")
        if c.args.ast:
            print(json.dumps(rep["ast"], indent=1))
    return OK, rep


def cmd_semantics(c: Ctx):
    parsed, lib = c.load(c.args.file)
    p = parsed.program
    cfg = c.ws.cfg
    if is_circuit(p) and not c.args.program:
        den = circ_sem(p, lib, cfg)
        rep = {"kind": "unitary", "space": [[v.name, v.dim] for v in den.space],
               "unitary": _mat(den.unitary)}
        if not c.structured:
            print("space:", ", ".join(f"{v.name}:{v.dim}" for v in den.space))
            _print_matrix("U", den.unitary)
        return OK, rep
    den = semantic_set(p, lib, cfg)
    elems = []
    for e in den.elems:
        item = {"kraus": [_mat(k) for k in e.kraus]}
        if c.args.choi:
            item["choi"] = _mat(e.choi())
        elems.append(item)
    t = den.truncation
    rep = {"kind": "operations", "space": [[v.name, v.dim] for v in den.space], "elements": elems,
           "truncation": {"loop_depth": t.loop_depth, "rec_depth": t.rec_depth,
                          "converged": t.converged, "residual": t.residual}}
    if not c.structured:
        print("space:", ", ".join(f"{v.name}:{v.dim}" for v in den.space))
        print(f"{len(den.elems)} operation(s); truncation converged={t.converged} "
              f"loop_depth={t.loop_depth} rec_depth={t.rec_depth}")
        for i, e in enumerate(den.elems):
            for j, k in enumerate(e.kraus):
                _print_matrix(f"E{i}.K{j}", k)
            if c.args.choi:
                _print_matrix(f"E{i}.choi", e.choi())
    return (OK if t.converged else UNDECIDED), rep


def cmd_check_eq(c: Ctx):
    pa, la = c.load(c.args.a)
    pb, lb = c.load(c.args.b)
    lib = la.merge(lb)
    layer = None if c.args.layer == "auto" else c.args.layer
    rep = check_eq(pa.program, pb.program, lib, c.ws.cfg, layer=layer)
    if not c.structured:
        print(f"{rep.verdict}  residual={rep.residual:.3e}  metric={rep.metric}"
              + ("" if rep.truncation.converged else "  (truncation did not converge)"))
    return _verdict_code(rep.verdict), rep.to_dict()


def cmd_apply(c: Ctx):
    a = c.args
    parsed, lib = c.load(a.file)
    c._uses = parsed.uses
    try:
        law = CATALOG[a.law]
    except KeyError:
        raise UsageError(f"unknown law {a.law!r}; see `qlaws laws`") from None
    params = decode_params(_cli_params(a.param), parsed.variables)
    path, offset = (parse_path(a.path) if a.path is not None else None), a.offset
    if a.at is not None:
        if a.path is not None:
            raise UsageError("give either --path or --at")
        path, offset = locate(parsed.program, parse(a.at, parsed.variables).program)
    res = apply_law(law, parsed.program, lib, path, offset, a.dir, c.ws.cfg, params)
    rep = {"law": law.id, "path": format_path(res.path), "offset": res.offset, "direction": res.direction}
    if a.check:
        er = check_eq(parsed.program, res.program, res.lib, c.ws.cfg)
        rep["check"] = er.to_dict()
    rep.update(c.emit_program(res.program, res.lib, lib, Path(a.file), a.out))
    code = OK
    if a.check and rep["check"]["verdict"] != EQUAL:
        code = _verdict_code(rep["check"]["verdict"])
    if not c.structured:
        if a.out is None:
            print(rep["text"], end="")
        else:
            print(f"{law.id} at {rep['path']}: wrote {rep['written']}")
        if a.check:
            print(f"// check: {rep['check']['verdict']} residual={rep['check']['residual']:.3e}",
                  file=sys.stderr)
    return code, rep


def _cert_text(cert):
    flags = ", ".join(f"{k}={'yes' if v else 'NO'}" for k, v in cert.shape.items())
    line = f"// shape: {flags}"
    if cert.report is not None:
        line += f"; oracle: {cert.report.verdict} residual={cert.report.residual:.3e}"
    return line


def cmd_normalize(c: Ctx):
    a = c.args
    parsed, lib = c.load(a.file)
    c._uses = parsed.uses
    fn = normalize_circuit if a.layer == "circuit" else normalize_program
    if a.layer == "circuit" and not is_circuit(parsed.program):
        raise TransformError("circuit normal form needs a circuit")
    cert = fn(parsed.program, lib, cfg=c.ws.cfg, verify=not a.no_verify)
    rep = {"layer": a.layer, "certificate": cert.to_dict()}
    rep.update(c.emit_program(cert.output, cert.lib, lib, Path(a.file), a.out))
    if not c.structured:
        print(rep["text"] if a.out is None else f"wrote {rep['written']}", end="" if a.out is None else "\n")
        print(_cert_text(cert), file=sys.stderr)
    return (OK if cert.ok else FAIL), rep


def cmd_defer(c: Ctx):
    a = c.args
    parsed, lib = c.load(a.file)
    c._uses = parsed.uses
    d = defer_measurements(parsed.program, lib, cfg=c.ws.cfg, verify=not a.no_verify)
    rep = {"aux": [[v.name, v.dim] for v in d.aux], "classifier": list(d.classifier),
           "decision": show(d.decision()), "certificate": d.cert.to_dict()}
    rep.update(c.emit_program(d.circuit, d.cert.lib, lib, Path(a.file), a.out))
    if not c.structured:
        print(rep["text"] if a.out is None else f"wrote {rep['written']}", end="" if a.out is None else "\n")
        print("// aux: " + ", ".join(f"{v.name}:{v.dim}" for v in d.aux), file=sys.stderr)
        print("// then: " + rep["decision"], file=sys.stderr)
        print(_cert_text(d.cert), file=sys.stderr)
    return (OK if d.cert.ok else FAIL), rep


def cmd_tail_to_loop(c: Ctx):
    a = c.args
    parsed, lib = c.load(a.file)
    c._uses = parsed.uses
    loop = tail_to_loop(parsed.program)
    rep = c.emit_program(loop, lib, lib, Path(a.file), a.out)
    code = OK
    if a.check:
        er = check_tail(parsed.program, lib, c.ws.cfg, depth=a.depth)
        rep["check"] = er.to_dict()
        code = _verdict_code(er.verdict)
    if not c.structured:
        print(rep["text"] if a.out is None else f"wrote {rep['written']}", end="" if a.out is None else "\n")
        if a.check:
            print(f"// check (depth {a.depth}): {rep['check']['verdict']} "
                  f"residual={rep['check']['residual']:.3e}", file=sys.stderr)
    return code, rep


def cmd_verify_laws(c: Ctx):
    a = c.args
    laws = list(CATALOG.values())
    if a.law:
        missing = [x for x in a.law if x not in CATALOG]
        if missing:
            raise UsageError(f"unknown law(s): {', '.join(missing)}")
        laws = [CATALOG[x] for x in a.law]
    if a.layer:
        laws = [law for law in laws if law.layer == a.layer]
    cfg = HARNESS_CFG.replace(eps_eq=c.ws.cfg.eps_eq, dmax=c.ws.cfg.dmax)
    reports = []
    if not c.structured:
        print(f"{'law':<22} {'layer':<8} {'pass':>9} {'back':>9} {'incon':>5} {'max resid':>10} {'sec':>6}")
    for law in laws:
        if not (law.enabled and law.generator):
            continue
        r = verify_law(law, a.trials, a.seed, cfg)
        reports.append(r)
        if not c.structured:
            back = f"{r.back_passed}/{r.trials - r.back_skipped}" if law.bidirectional else "-"
            mark = "" if r.ok else "  FAIL"
            print(f"{law.id:<22} {law.layer:<8} {r.passed:>4}/{r.trials:<4} {back:>9} {r.inconclusive:>5} "
                  f"{r.max_residual:>10.2e} {r.seconds:>6.2f}{mark}")
    ok = all(r.ok for r in reports)
    worst = max((r.max_residual for r in reports), default=0.0)
    rep = {"seed": a.seed, "trials": a.trials, "laws": [r.to_dict() | {"ok": r.ok} for r in reports],
           "all_passed": ok, "max_residual": worst}
    if not c.structured:
        n_ok = sum(r.ok for r in reports)
        print(f"{n_ok}/{len(reports)} laws passed; max residual {worst:.2e}")
    return (OK if ok else FAIL), rep


def cmd_refine_check(c: Ctx):
    a = c.args
    if a.clauses:
        if a.a or a.b:
            raise UsageError("--clauses takes no program files")
        out = verify_refinement_laws(a.seed, a.trials, c.ws.lib, c.ws.cfg)
        ok = all(r.ok for r in out.values())
        rep = {"clauses": {k: r.to_dict() for k, r in out.items()}, "all_passed": ok}
        if not c.structured:
            for k in REFINEMENT_CLAUSES:
                r = out[k]
                print(f"{k:<6} {r.passed:>4}/{r.trials:<4} max residual {r.max_residual:.2e}"
                      + ("" if r.ok else "  FAIL"))
        return (OK if ok else FAIL), rep
    if not (a.a and a.b):
        raise UsageError("refine-check needs two program files (or --clauses)")
    pa, la = c.load(a.a)
    pb, lb = c.load(a.b)
    r = check_refines(pa.program, pb.program, la.merge(lb), c.ws.cfg)
    if not c.structured:
        worst = max(r.residuals, default=0.0)
        print(f"{r.verdict}  max residual={worst:.3e}"
              + ("" if r.violating is None else f"  (element {r.violating} lies outside the hull)"))
    return _verdict_code(r.verdict), r.to_dict()


def cmd_replay(c: Ctx):
    a = c.args
    rep = run_replay(a.script, c.ws)
    d = rep.to_dict()
    if not c.structured:
        for s in rep.steps:
            where = s.path + ("" if s.offset is None else f"+{s.offset}")
            print(f"{s.index + 1:>3}. {s.law:<16} {s.direction} @ {where}" + (f"   // {s.note}" if s.note else ""))
            if a.verbose:
                print(f"     {s.program}")
        if rep.error is not None:
            print(f"step {rep.failed_step + 1} failed: {rep.error}")
        else:
            print(f"final: {show(rep.final)}")
            if rep.check is not None:
                print(f"goal:  {show(rep.goal)}")
                print(f"{rep.check.verdict}  residual={rep.check.residual:.3e}")
        print(f"({rep.seconds:.2f}s)")
    if rep.error is not None:
        return FAIL, d
    return (_verdict_code(rep.check.verdict) if rep.check is not None else OK), d


def cmd_laws(c: Ctx):
    rows = manifest()
    if c.args.layer:
        rows = [r for r in rows if r["layer"] == c.args.layer]
    if not c.structured:
        for r in rows:
            flag = "" if r["enabled"] else "  (disabled)"
            arrow = "<->" if r["bidirectional"] else " ->"
            print(f"{r['id']:<22} {r['layer']:<8} {arrow} {r['title']}{flag}")
    return OK, {"laws": rows}


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _ArgParser(prog="qlaws", description="Algebraic laws of quantum programs: check, rewrite, normalize.",
                   epilog="exit codes: 0 ok/equal/refines, 1 not-equal/violates/failed, "
                          "2 inconclusive, 3 usage or validation error")
    p.add_argument("--workspace", help="workspace directory (default: $QLAWS_WORKSPACE or .)")
    p.add_argument("--config", help="JSON file overriding tolerances and caps")
    p.add_argument("--format", choices=("text", "structured"), default="text")
    sub = p.add_subparsers(dest="command", parser_class=_ArgParser)

    s = sub.add_parser("parse", help="parse a program and print its core form")
    s.add_argument("file")
    s.add_argument("--ast", action="store_true", help="also print the syntax tree")
    s.set_defaults(fn=cmd_parse)

    s = sub.add_parser("semantics", help="unitary or quantum operation(s) of a program")
    s.add_argument("file")
    s.add_argument("--choi", action="store_true")
    s.add_argument("--program", action="store_true", help="treat a circuit as a program")
    s.set_defaults(fn=cmd_semantics)

    s = sub.add_parser("check-eq", help="semantic equivalence of two programs")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--layer", choices=("auto", "circuit", "program"), default="auto")
    s.set_defaults(fn=cmd_check_eq)

    s = sub.add_parser("apply", help="apply one catalog law")
    s.add_argument("file")
    s.add_argument("--law", required=True)
    s.add_argument("--path", help="site as dotted child indices (default: first match)")
    s.add_argument("--offset", type=int, help="start of a window inside a sequence")
    s.add_argument("--at", help="site given as a program fragment")
    s.add_argument("--dir", choices=(LTR, RTL), default=LTR)
    s.add_argument("--param", action="append", metavar="KEY=VALUE")
    s.add_argument("--check", action="store_true", help="confirm the rewrite with the semantic oracle")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_apply)

    s = sub.add_parser("normalize", help="circuit or program normal form")
    s.add_argument("file")
    s.add_argument("--layer", choices=("circuit", "program"), required=True)
    s.add_argument("--no-verify", action="store_true")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_normalize)

    s = sub.add_parser("defer", help="move measurements of a finite program to the end")
    s.add_argument("file")
    s.add_argument("--no-verify", action="store_true")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_defer)

    s = sub.add_parser("tail-to-loop", help="rewrite a tail-recursive program as a while loop")
    s.add_argument("file")
    s.add_argument("--check", action="store_true")
    s.add_argument("--depth", type=int, default=64)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_tail_to_loop)

    s = sub.add_parser("verify-laws", help="randomized soundness check of the law catalog")
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--law", action="append")
    s.add_argument("--layer", choices=LAYERS)
    s.set_defaults(fn=cmd_verify_laws)

    s = sub.add_parser("refine-check", help="refinement between nondeterministic programs")
    s.add_argument("a", nargs="?")
    s.add_argument("b", nargs="?")
    s.add_argument("--clauses", action="store_true", help="check the refinement clauses on random instances")
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--trials", type=int, default=50)
    s.set_defaults(fn=cmd_refine_check)

    s = sub.add_parser("replay", help="replay a recorded derivation")
    s.add_argument("script")
    s.add_argument("-v", "--verbose", action="store_true")
    s.set_defaults(fn=cmd_replay)

    s = sub.add_parser("laws", help="list the law catalog")
    s.add_argument("--layer", choices=LAYERS)
    s.set_defaults(fn=cmd_laws)
    return p


def main(argv=None) -> int:
    structured = False
    command = None
    try:
        args = build_parser().parse_args(argv)
        structured = args.format == "structured"
        command = args.command
        if command is None:
            raise UsageError("missing command; see --help")
        ctx = Ctx(args)
        code, rep = args.fn(ctx)
        status = {OK: "ok", FAIL: "failed", UNDECIDED: "inconclusive"}[code]
    except UsageError as e:
        code, rep, status = USAGE, {"error": str(e)}, "usage-error"
    except (ParseError, WorkspaceError, DimensionCapError, TransformError, ReplayError) as e:
        code, rep, status = USAGE, {"error": str(e), "kind": type(e).__name__}, "validation-error"
    except LawError as e:
        code, rep, status = FAIL, {"error": str(e), "kind": type(e).__name__}, "law-failed"
    except ValueError as e:
        code, rep, status = USAGE, {"error": str(e), "kind": type(e).__name__}, "validation-error"
    if structured:
        rep = {"command": command, "status": status, "exit_code": code, **rep}
        for k in ("text",):
            rep.pop(k, None)
        print(json.dumps(rep, indent=1, default=str))
    elif code == USAGE or status == "law-failed":
        print(f"qlaws: {rep['error']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
