"""Command-line entry point.

Exit codes: 0 success, 1 a check failed, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import demos
from . import diagram as dg
from . import polar
from . import session as ss
from . import shuffle as sh
from . import stochastic as st
from .donotation import check as check_program
from .donotation import elaborate, parse as parse_program
from .errors import ParseError, PolarSessionError
from .signature import load_polygraph, runtime_extend

OK, FAILED, USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE)


def _read(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True, default=str))
    else:
        print(text)


def _polygraph(args):
    if not args.polygraph:
        raise ParseError("--polygraph is required for this command")
    return load_polygraph(args.polygraph)


def _diagram_polygraph(base, data: dict):
    """Pick the base polygraph or one of its runtime extensions to fit a diagram file."""
    gens = {n.get("gen") for n in data.get("nodes", []) if isinstance(n, dict)}
    candidates = [base]
    if base.is_pure:
        candidates.append(ss.session_runtime(base))
    else:
        candidates.append(runtime_extend(base))
    for p in candidates:
        if all(p.has_generator(g) for g in gens):
            return p
    return candidates[-1]


def _load_diagram(path, base):
    from .signature import loads_json
    data = loads_json(_read(path))
    return dg.diagram_from_dict(data, _diagram_polygraph(base, data))


# ----------------------------------------------------------- shuffle

def cmd_shuffle_count(args) -> int:
    n = sh.count(args.blocks)
    _emit(args, {"blocks": args.blocks, "count": n}, str(n))
    return OK


def cmd_shuffle_enumerate(args) -> int:
    found = sh.enumerate_shufflings(args.blocks)
    if args.json:
        _emit(args, {"blocks": args.blocks, "shufflings": [list(s.assignment) for s in found]}, "")
    else:
        for s in found:
            print(" ".join(map(str, s.assignment)))
    return OK


# ------------------------------------------------------------- polar

def _alternating(n: int, typ: str) -> tuple:
    return tuple(polar.PolarItem(typ, polar.SEND if i % 2 == 0 else polar.RECV) for i in range(n))


def cmd_polar_validate(args) -> int:
    if args.identity is not None or args.identity_size is not None:
        items = polar.plist(args.identity) if args.identity is not None else _alternating(args.identity_size, args.type)
        s = polar.identity(items)
        label = f"identity on {len(items)} elements"
    elif args.file:
        enc = polar.parse_encoding(_read(args.file), validate_result=False)
        s = enc.shuffle
        label = enc.name
    else:
        raise ParseError("give an encoding file, --identity or --identity-size")
    start = time.perf_counter()
    report = polar.validate(s)
    elapsed = time.perf_counter() - start
    witness = [list(p) for p in report.witness]
    text = f"{label}: valid ({elapsed:.3f}s)" if report.ok else f"{label}: invalid: {report.reason} {witness}"
    _emit(args, {"name": label, "valid": report.ok, "reason": report.reason,
                 "witness": witness, "size": s.size, "seconds": round(elapsed, 6)}, text)
    return OK if report.ok else FAILED


def cmd_polar_compose(args) -> int:
    outer = polar.parse_encoding(_read(args.outer))
    inner = polar.parse_encoding(_read(args.inner))
    result = polar.compose(inner.shuffle, args.at, outer.shuffle)
    names = outer.part_names[:args.at] + inner.part_names + outer.part_names[args.at + 1:]
    text = polar.print_encoding(result, outer.name, names)
    _emit(args, {"encoding": text, "valid": polar.validate(result).ok}, text.rstrip())
    return OK


def cmd_polar_infer(args) -> int:
    result = polar.infer(args.input, args.output)
    if result is None:
        _emit(args, {"shuffle": None}, "no acyclic polar shuffle exists")
        return FAILED
    text = polar.print_encoding(result, "inferred", annotate=True)
    _emit(args, {"shuffle": text}, text.rstrip())
    return OK


def cmd_polar_factor(args) -> int:
    enc = polar.parse_encoding(_read(args.file))
    f = polar.factor(enc.shuffle)
    ok = polar.recompose(f) == enc.shuffle
    lines = [f"pure interleaving: {' '.join(map(str, f.pure_shuffle.assignment)) or '(empty)'}"]
    for name, r in zip(enc.part_names, f.reorders):
        lines.append(f"reorder {name}: {polar.format_list(r.inputs[0])} -> {polar.format_list(r.output)}")
    lines.append(f"links (merged positions): {list(f.links)}")
    lines.append(f"spawns (type, recv, send): {list(f.spawn_list)}")
    lines.append(f"recomposes to the original: {ok}")
    _emit(args, {"pure": list(f.pure_shuffle.assignment), "links": [list(l) for l in f.links],
                 "spawns": [list(s) for s in f.spawn_list], "roundtrip": ok}, "\n".join(lines))
    return OK if ok else FAILED


# ---------------------------------------------------------------- do

def _typed(args):
    sig = _polygraph(args)
    return check_program(parse_program(_read(args.file)), sig)


def cmd_do_check(args) -> int:
    typed = _typed(args)
    prog = typed.program
    _emit(args, {"program": prog.name, "ok": True, "statements": len(prog.statements)},
          f"{prog.name}: ok ({len(prog.statements)} statements)")
    return OK


def cmd_do_elaborate(args) -> int:
    d = elaborate(_typed(args))
    if args.out:
        dg.save_diagram(d, args.out)
    if args.json or not args.out:
        print(dg.dumps_diagram(d))
    else:
        print(f"{d!r} written to {args.out}")
    return OK


# ----------------------------------------------------------- session

def cmd_session_events(args) -> int:
    s = ss.parse_session_program(_read(args.file), _polygraph(args))
    ev = polar.format_list(ss.events(s))
    _emit(args, {"events": ev, "dom": list(s.dom), "cod": list(s.cod)}, ev)
    return OK


def cmd_session_glue(args) -> int:
    base = _polygraph(args)
    enc = polar.parse_encoding(_read(args.shuffle))
    texts = [_read(p) for p in args.parts]
    if len(texts) != len(enc.part_names):
        raise ParseError(f"{args.shuffle} has {len(enc.part_names)} parts, got {len(texts)} programs")
    by_name = {ss.program_name(t): t for t in texts}
    if set(by_name) == set(enc.part_names):
        texts = [by_name[n] for n in enc.part_names]
    parts = [ss.parse_session_program(t, base) for t in texts]
    glued = ss.glue(parts, enc.shuffle)
    if args.out:
        dg.save_diagram(glued.diagram, args.out)
    ev = polar.format_list(ss.events(glued))
    _emit(args, {"events": ev, "nodes": len(glued.diagram.nodes),
                 "hash": f"{dg.canonical_hash(glued.diagram):016x}"},
          f"{enc.name}: events {ev or '(none)'}; {len(glued.diagram.nodes)} nodes")
    return OK


def cmd_session_eq(args) -> int:
    base = _polygraph(args)
    a = ss.parse_session_program(_read(args.left), base)
    b = ss.parse_session_program(_read(args.right), base)
    eq = ss.is_equal_sessions(a, b)
    _emit(args, {"equal": eq}, "equal" if eq else "not equal")
    return OK if eq else FAILED


# ------------------------------------------------------------ eval/eq

def cmd_eval(args) -> int:
    base = _polygraph(args)
    if not args.interp:
        raise ParseError("--interp is required for eval")
    d = _load_diagram(args.diagram, base)
    from .signature import loads_json
    interp = st.interpretation_from_dict(loads_json(_read(args.interp)), d.polygraph)
    ch = st.evaluate(d, interp)
    m = ch.matrix
    text = np.array2string(m, precision=6, suppress_small=True)
    _emit(args, {"dom_shape": list(ch.dom_shape), "cod_shape": list(ch.cod_shape),
                 "matrix": np.round(m, 12).tolist()}, text)
    return OK


def cmd_eq(args) -> int:
    base = _polygraph(args)
    a = _load_diagram(args.left, base)
    b = _load_diagram(args.right, base)
    eq = dg.is_equal(a, b)
    if args.dot:
        stem = Path(args.dot)
        stem.with_suffix(".left.dot").write_text(dg.to_dot(a, "left"), encoding="utf-8")
        stem.with_suffix(".right.dot").write_text(dg.to_dot(b, "right"), encoding="utf-8")
    _emit(args, {"equal": eq, "left_hash": f"{dg.canonical_hash(a):016x}",
                 "right_hash": f"{dg.canonical_hash(b):016x}"}, "equal" if eq else "not equal")
    return OK if eq else FAILED


# -------------------------------------------------------------- demo

def cmd_demo(args) -> int:
    names = list(demos.DEMOS) if args.name == "all" else [args.name]
    reports = []
    for name in names:
        fn = demos.DEMOS[name]
        kwargs = {"eps": args.eps} if args.eps is not None and name in ("otp", "newcomb", "xor") else {}
        reports.append(fn(**kwargs))
    if args.report_dir:
        from .plotting import write_report
        for r in reports:
            write_report(r, args.report_dir)
    if args.json:
        print(json.dumps([r.to_json() for r in reports] if len(reports) > 1 else reports[0].to_json(),
                         indent=2, sort_keys=True, default=str))
    else:
        for r in reports:
            print(f"== {r.name}: {'PASS' if r.passed else 'FAIL'}")
            for c in r.checks:
                detail = f"  ({c.detail})" if c.detail else ""
                print(f"  [{'ok' if c.passed else 'FAIL'}] {c.name}{detail}")
            if r.name == "otp":
                for k, m in r.matrices.items():
                    print(f"  {k}:")
                    print("    " + np.array2string(m, precision=4, suppress_small=True).replace("\n", "\n    "))
    return OK if all(r.passed for r in reports) else FAILED


# ------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--polygraph", help="polygraph JSON file")
    common.add_argument("--interp", help="interpretation JSON file")
    common.add_argument("--eps", type=float, default=None, help="numeric tolerance")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--seed", type=int, default=0, help="random seed (all commands are deterministic)")

    p = _Parser(prog="polarsession", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("shuffle", help="shufflings of blocks").add_subparsers(dest="action", required=True,
                                                                               parser_class=_Parser)
    for action, fn in (("count", cmd_shuffle_count), ("enumerate", cmd_shuffle_enumerate)):
        q = s.add_parser(action, parents=[common])
        q.add_argument("blocks", type=int, nargs="+")
        q.set_defaults(func=fn)

    s = sub.add_parser("polar", help="polar shuffles").add_subparsers(dest="action", required=True,
                                                                       parser_class=_Parser)
    q = s.add_parser("validate", parents=[common])
    q.add_argument("file", nargs="?")
    q.add_argument("--identity", help='polar list such as "X! Y?"; validates its identity shuffle')
    q.add_argument("--identity-size", type=int, help="identity on N alternating send/receive elements")
    q.add_argument("--type", default="X", help="element type for --identity-size")
    q.set_defaults(func=cmd_polar_validate)
    q = s.add_parser("compose", parents=[common])
    q.add_argument("outer")
    q.add_argument("inner")
    q.add_argument("--at", type=int, default=0, help="input of the outer shuffle to substitute")
    q.set_defaults(func=cmd_polar_compose)
    q = s.add_parser("infer", parents=[common])
    q.add_argument("--input", action="append", default=[], help='input polar list, e.g. "X! Y?" (repeatable)')
    q.add_argument("--output", required=True)
    q.set_defaults(func=cmd_polar_infer)
    q = s.add_parser("factor", parents=[common])
    q.add_argument("file")
    q.set_defaults(func=cmd_polar_factor)

    s = sub.add_parser("do", help="do-notation programs").add_subparsers(dest="action", required=True,
                                                                          parser_class=_Parser)
    q = s.add_parser("check", parents=[common])
    q.add_argument("file")
    q.set_defaults(func=cmd_do_check)
    q = s.add_parser("elaborate", parents=[common])
    q.add_argument("file")
    q.add_argument("--out")
    q.set_defaults(func=cmd_do_elaborate)

    s = sub.add_parser("session", help="session programs").add_subparsers(dest="action", required=True,
                                                                           parser_class=_Parser)
    q = s.add_parser("events", parents=[common])
    q.add_argument("file")
    q.set_defaults(func=cmd_session_events)
    q = s.add_parser("glue", parents=[common])
    q.add_argument("--shuffle", required=True, help=".msg encoding")
    q.add_argument("parts", nargs="+")
    q.add_argument("--out")
    q.set_defaults(func=cmd_session_glue)
    q = s.add_parser("eq", parents=[common])
    q.add_argument("left")
    q.add_argument("right")
    q.set_defaults(func=cmd_session_eq)

    q = sub.add_parser("eval", parents=[common], help="evaluate a diagram as a channel")
    q.add_argument("--diagram", required=True)
    q.set_defaults(func=cmd_eval)

    q = sub.add_parser("eq", parents=[common], help="diagram equality up to isomorphism")
    q.add_argument("left")
    q.add_argument("right")
    q.add_argument("--dot", help="write both diagrams as DOT files next to this path")
    q.set_defaults(func=cmd_eq)

    q = sub.add_parser("demo", parents=[common], help="worked examples with pass/fail checks")
    q.add_argument("name", choices=list(demos.DEMOS) + ["all"])
    q.add_argument("--report-dir", help="write TSV tables and PNG figures here")
    q.set_defaults(func=cmd_demo)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return USAGE
    except PolarSessionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILED


if __name__ == "__main__":
    sys.exit(main())
