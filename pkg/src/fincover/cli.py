"""``fincover`` command line.

Exit codes: 0 success, 1 input or I/O error, 2 universal covers differ,
3 no positive solution of the gluing equations, 4 verification failed.
Inputs are instance files; ``fixture:NAME`` loads a shipped fixture.
"""
from __future__ import annotations

import argparse
import os
import sys
from typing import List, Optional

from . import io
from .complex import ComplexError, GraphWithFins, validate
from .generate import GenerationError, GenParams, gen_instance
from .glue import n_fold_cover
from .pipeline import EXIT_INPUT, EXIT_MISMATCH, EXIT_OK, EXIT_UNVERIFIED, run_cover
from .refine import check_equivalence
from .verify import check_cover


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # exit 2 is reserved for "universal covers differ"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, "%s: error: %s\n" % (self.prog, message))


def _read(path: str) -> io.Instance:
    try:
        if path.startswith("fixture:"):
            name = path[len("fixture:"):]
            if name not in io.fixture_names():
                raise InputError("unknown fixture %r (have: %s)" % (name, ", ".join(io.fixture_names())))
            return io.parse(io.fixture_text(name))
        return io.read_instance(path)
    except OSError as exc:
        raise InputError("%s: %s" % (path, exc.strerror or exc)) from None
    except (io.ParseError, ComplexError) as exc:
        raise InputError("%s: %s" % (path, exc)) from None


def _pair(paths: List[str]):
    """Two complexes from one file holding both, or the first complex of each of two files."""
    if len(paths) == 1:
        inst = _read(paths[0])
        if len(inst.complexes) != 2:
            raise InputError("%s: expected two complexes, found %d" % (paths[0], len(inst.complexes)))
        X1, X2 = inst.complexes
    elif len(paths) == 2:
        X1, X2 = (_read(p).complexes[0] for p in paths)
    else:
        raise InputError("give one file with two complexes or two files")
    for tag, X in (("X1", X1), ("X2", X2)):
        _require_valid(X, tag)
    return X1, X2


def _require_valid(X: GraphWithFins, tag: str):
    rep = validate(X)
    if not rep.ok:
        raise InputError("%s is not a valid graph with fins:\n%s" % (tag, rep))


def _stem(path: str) -> str:
    root, ext = os.path.splitext(path)
    return root if ext == ".json" else path


def _write_cover(path: str, cover, maps) -> List[str]:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    io.write_text(path, io.serialize(io.Instance([cover])))
    written = [path]
    for k, phi in enumerate(maps, start=1):
        mp = "%s.phi%d.json" % (_stem(path), k)
        io.write_text(mp, io.serialize_cellmap(phi))
        written.append(mp)
    return written


def cmd_check(args) -> int:
    X1, X2 = _pair(args.inputs)
    res = check_equivalence(X1, X2)
    if res.ok:
        print("equivalent\tyes")
        print("colours\t%d" % res.colouring.n_colours)
        return EXIT_OK
    print("equivalent\tno")
    for line in res.lines():
        print("mismatch\t%s" % line)
    return EXIT_MISMATCH


def cmd_cover(args) -> int:
    X1, X2 = _pair(args.inputs)
    rep = run_cover(X1, X2, seed=args.seed, solver=args.solver, keep_all_components=args.keep_all_components)
    text = rep.render()
    if rep.ok and args.out:
        for p in _write_cover(args.out, rep.cover.graph, rep.cover.maps):
            text += "wrote\t%s\n" % p
    sys.stdout.write(text)
    if args.report:
        from .plotting import write_figures

        os.makedirs(args.report, exist_ok=True)
        io.write_text(os.path.join(args.report, "report.tsv"), rep.render())
        for p in write_figures(rep, X1, args.report):
            print("figure\t%s" % p)
    if args.timings:
        for k, v in rep.timings.items():
            print("time\t%s\t%.3f" % (k, v), file=sys.stderr)
    if rep.exit_code == EXIT_INPUT:
        print(rep.message, file=sys.stderr)
    return rep.exit_code


def cmd_nfold(args) -> int:
    inst = _read(args.input)
    X = inst.complexes[0]
    _require_valid(X, "input")
    if args.n < 1:
        raise InputError("degree must be a positive integer")
    cc = n_fold_cover(X, args.n, seed=args.seed)
    cert = check_cover(cc.graph, cc.phi1, X)
    print("vertices\t%d" % len(cc.graph.vertices))
    print("edges\t%d" % len(cc.graph.edges))
    print("fins\t%d" % len(cc.graph.fins))
    print("degree\t%d" % cert.degree)
    print("verified\t%s" % ("yes" if cert.ok else "no"))
    if args.out:
        for p in _write_cover(args.out, cc.graph, [cc.phi1]):
            print("wrote\t%s" % p)
    return EXIT_OK if cert.ok else EXIT_UNVERIFIED


def cmd_verify(args) -> int:
    cover = _read(args.cover).complexes[0]
    base = _read(args.base).complexes[0]
    _require_valid(base, "base")
    try:
        with open(args.maps, encoding="utf-8") as fh:
            phi = io.parse_cellmap(fh.read())
    except OSError as exc:
        raise InputError("%s: %s" % (args.maps, exc.strerror or exc)) from None
    except (io.ParseError, ComplexError) as exc:
        raise InputError("%s: %s" % (args.maps, exc)) from None
    res = check_cover(cover, phi, base)
    if not res.ok:
        print("verified\tno")
        print("violation\t%s" % res)
        return EXIT_UNVERIFIED
    print("verified\tyes")
    print("degree\t%d" % res.degree)
    return EXIT_OK


def cmd_gen(args) -> int:
    params = GenParams(
        max_vertices=args.max_vertices, max_edges=args.max_edges, max_fins=args.max_fins,
        max_fin_length=args.max_fin_length, max_degree=args.max_valence,
        n1=args.n1, n2=args.n2, max_sheets=args.max_sheets,
    )
    try:
        X1, X2 = gen_instance(params, seed=args.seed)
    except GenerationError as exc:
        raise InputError(str(exc)) from None
    text = io.serialize(io.Instance([X1, X2], {"equivalent": True, "note": "seed %d" % args.seed}))
    if args.out:
        io.write_text(args.out, text)
        print("wrote\t%s" % args.out)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_export(args) -> int:
    inst = _read(args.input)
    X = inst.complexes[args.index]
    if args.dot:
        sys.stdout.write(io.export_dot(X))
    else:
        sys.stdout.write(io.serialize(io.Instance([X])))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="fincover", description="Common finite covers of graphs with fins.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", help="compare universal covers via colour refinement")
    p.add_argument("inputs", nargs="+", metavar="FILE")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("cover", help="build and verify a common finite cover")
    p.add_argument("inputs", nargs="+", metavar="FILE")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--solver", choices=("measure", "kernel"), default="measure")
    p.add_argument("--keep-all-components", action="store_true")
    p.add_argument("--out", metavar="FILE")
    p.add_argument("--report", metavar="DIR", help="write report.tsv and PNG figures here")
    p.add_argument("--timings", action="store_true", help="stage timings on stderr")
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("nfold", help="random degree-n cover of one complex")
    p.add_argument("input", metavar="FILE")
    p.add_argument("n", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_nfold)

    p = sub.add_parser("verify", help="check a covering map")
    p.add_argument("cover", metavar="COVER")
    p.add_argument("maps", metavar="MAPS")
    p.add_argument("base", metavar="BASE")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="random instance with a known common base")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n1", type=int)
    p.add_argument("--n2", type=int)
    p.add_argument("--max-sheets", type=int, default=4)
    p.add_argument("--max-vertices", type=int, default=8)
    p.add_argument("--max-edges", type=int, default=12)
    p.add_argument("--max-fins", type=int, default=2)
    p.add_argument("--max-fin-length", type=int, default=6)
    p.add_argument("--max-valence", type=int, default=4)
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("export", help="re-emit a complex, or render it as DOT")
    p.add_argument("input", metavar="FILE")
    p.add_argument("--dot", action="store_true")
    p.add_argument("--index", type=int, default=0, help="which complex of the file")
    p.set_defaults(func=cmd_export)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print("error: %s: %s" % (exc.filename or "", exc.strerror or exc), file=sys.stderr)
        return EXIT_INPUT
    except IndexError:
        print("error: no such complex in the file", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
