"""``maltsev-kan`` command line.

Exit codes: 0 success, 2 usage error, 3 negative result (no Maltsev term,
unliftable horn), 4 resource limit, 5 validation error.  Results go to
stdout, diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import algebra as alg_mod
from .detect import DEFAULT_MAX_CLOSURE, closure_stats, maltsev_witness
from .errors import (HornError, MaltsevKanError, NoPreimage, ParseError,
                     ResourceLimit, ValidationError)
from .formats import (load_algebra, load_hom, load_simplicial, serialize_algebra,
                      serialize_hom, serialize_simplicial, write_text)
from .horn import Horn, LiftProblem, fill_horn, lift_horn
from .oracle import default_budget, kan12_circle, verify_fibration
from .simplicial import (circle_free_mod, constant, is_levelwise_surjective,
                         multiply_hom, nerve_abelian, reduction_hom, validate,
                         validate_hom)

EXIT_OK, EXIT_USAGE, EXIT_NEGATIVE, EXIT_RESOURCE, EXIT_INVALID = 0, 2, 3, 4, 5

log = logging.getLogger("maltsev_kan")


def _face(text: str) -> tuple[int, int]:
    try:
        i, x = text.split("=", 1)
        return int(i), int(x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected I=ELEM, got {text!r}") from None


def _existing(text: str) -> Path:
    p = Path(text)
    if not p.is_file():
        raise argparse.ArgumentTypeError(f"no such file: {text}")
    return p.resolve()


def _pretty(X, n: int, x: int) -> str:
    """Render ``x`` as a coordinate tuple when level ``n`` looks like a
    power of the first nontrivial level size; otherwise the bare index."""
    base = next((l.size for l in X.levels if l.size > 1), None)
    size = X.size(n)
    if base is None:
        return str(x)
    coords = round(math.log(size, base)) if size > 1 else 0
    if base ** coords != size:
        return str(x)
    digits = [(x // base ** t) % base for t in range(coords)]
    return "(" + ",".join(map(str, digits)) + ")"


def _horn(args) -> Horn:
    faces = dict(args.face or [])
    if len(faces) != len(args.face or []):
        raise HornError("a face index was given twice")
    return Horn.of(args.n, args.k, faces)


def _print_trace(X, n, trace, pretty):
    print("j\tphase\tw")
    for e in trace:
        w = _pretty(X, n, e.w) if pretty else e.w
        print(f"{e.j}\t{e.phase}\t{w}")


# ---------------------------------------------------------------- commands

def cmd_validate(args) -> int:
    obj = json.loads(args.file.read_text(encoding="utf-8"))
    if isinstance(obj, dict) and "levels" in obj:
        X = load_simplicial(args.file, check=False)
        rep = validate(X, workers=args.workers)
        kind = f"simplicial algebra, N={X.N}, sizes {[l.size for l in X.levels]}"
    elif isinstance(obj, dict) and "maps" in obj:
        f = load_hom(args.file, check=False)
        rep = validate_hom(f, workers=args.workers)
        kind = f"simplicial hom, levelwise surjective: {is_levelwise_surjective(f)}"
    else:
        a = load_algebra(args.file)
        print(f"ok: algebra {a.name!r}, carrier {a.size}")
        return EXIT_OK
    if rep.ok:
        print(f"ok: {kind}")
        return EXIT_OK
    print(f"{args.file}: {len(rep.violations)} violation(s)", file=sys.stderr)
    for v in rep.violations:
        print(f"{args.file}: {v.law} at level {v.n}, i={v.i}, j={v.j}, element {v.element}",
              file=sys.stderr)
    return EXIT_INVALID


def cmd_detect(args) -> int:
    a = load_algebra(args.file)
    if args.stats:
        st = closure_stats(a, args.max_closure)
        print(f"closure_size={st.closure_size} generations={st.generations} found={st.found}",
              file=sys.stderr)
    t = maltsev_witness(a, args.max_closure)
    if t is None:
        print("none")
        return EXIT_NEGATIVE
    print(t)
    return EXIT_OK


def cmd_fill(args) -> int:
    X = load_simplicial(args.file)
    horn = _horn(args)
    if args.trace:
        res = fill_horn(X, horn, trace=True)
        _print_trace(X, horn.n, res.trace, args.pretty)
        x = res.x
    else:
        x = fill_horn(X, horn)
    print(_pretty(X, horn.n, x) if args.pretty else x)
    return EXIT_OK


def cmd_lift(args) -> int:
    f = load_hom(args.file)
    horn = _horn(args)
    res = lift_horn(LiftProblem(f, horn, args.y), trace=args.trace)
    if args.trace:
        _print_trace(f.source, horn.n, res.trace, args.pretty)
    print(_pretty(f.source, horn.n, res.x) if args.pretty else res.x)
    return EXIT_OK


def cmd_verify(args) -> int:
    f = load_hom(args.file)
    budget = args.budget if args.budget is not None else default_budget()
    surj = is_levelwise_surjective(f)
    rep = verify_fibration(f, args.max_dim, budget, workers=args.workers, trace=args.trace)
    if args.report:
        write_text(args.report, rep.to_json(include_elapsed=not args.no_timing))
    print(f"levelwise_surjective={surj}")
    print(f"checked_horns={rep.checked_horns}")
    print(f"failures={len(rep.failures)}")
    print(f"lifts_checked={rep.lifts_checked}")
    print(f"crosscheck_failures={len(rep.crosscheck_failures)}")
    for n, k, y, faces in rep.failures[:20]:
        print(f"unliftable: n={n} k={k} y={y} faces={dict(faces)}", file=sys.stderr)
    return EXIT_OK if rep.ok else EXIT_NEGATIVE


def cmd_kan12(args) -> int:
    x = kan12_circle(args.m)
    if x is None:
        print("none")
        return EXIT_NEGATIVE
    if args.pretty:
        print("(" + ",".join(str((x // args.m ** t) % args.m) for t in range(3)) + ")")
    else:
        print(x)
    return EXIT_OK


_ALGEBRAS = {
    "semilattice": lambda m: alg_mod.semilattice(),
    "zmod": alg_mod.cyclic_group,
    "zmod-add": alg_mod.zmod_add,
    "zmod-sub": alg_mod.zmod_sub,
    "heyting": alg_mod.heyting_chain,
}


def cmd_gen_algebra(args) -> int:
    write_text(args.out, serialize_algebra(_ALGEBRAS[args.kind](args.m)))
    print(args.out)
    return EXIT_OK


def cmd_gen_fixture(args) -> int:
    out = Path(args.out)
    if args.kind in ("constant", "nerve", "circle"):
        if args.kind == "constant":
            a = load_algebra(args.algebra) if args.algebra else alg_mod.cyclic_group(args.m)
            X = constant(a, args.levels)
        elif args.kind == "nerve":
            X = nerve_abelian(args.m, args.levels)
        else:
            X = circle_free_mod(args.m, args.levels)
        write_text(out, serialize_simplicial(X))
        print(out)
        return EXIT_OK
    if args.to is None:
        raise HornError("--to is required for hom fixtures")
    if args.kind == "reduction":
        f = reduction_hom(args.m, args.to, args.levels)
    else:
        f = multiply_hom(args.m, args.to, args.levels)
    src = out.with_name(out.stem + ".source.json")
    dst = out.with_name(out.stem + ".target.json")
    write_text(src, serialize_simplicial(f.source))
    write_text(dst, serialize_simplicial(f.target))
    write_text(out, serialize_hom(f, src.name, dst.name))
    print(out)
    return EXIT_OK


# ---------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="maltsev-kan", description="Maltsev terms, horn fillers and Kan fibrations "
                                                "for finite simplicial algebras.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="check a simplicial algebra, hom or algebra file")
    v.add_argument("file", type=_existing)
    v.add_argument("--workers", type=int, default=1)
    v.set_defaults(func=cmd_validate)

    d = sub.add_parser("detect-maltsev", help="search the clone of an algebra for a Maltsev term")
    d.add_argument("file", type=_existing)
    d.add_argument("--max-closure", type=int, default=DEFAULT_MAX_CLOSURE)
    d.add_argument("--stats", action="store_true")
    d.set_defaults(func=cmd_detect)

    for name, func, help_ in (("fill-horn", cmd_fill, "fill a horn in a simplicial algebra"),
                              ("lift-horn", cmd_lift, "lift a horn along a simplicial hom")):
        h = sub.add_parser(name, help=help_)
        h.add_argument("file", type=_existing)
        h.add_argument("--n", type=int, required=True)
        h.add_argument("--k", type=int, required=True)
        if name == "lift-horn":
            h.add_argument("--y", type=int, required=True)
        h.add_argument("--face", type=_face, action="append", metavar="I=ELEM")
        h.add_argument("--trace", action="store_true")
        h.add_argument("--pretty", action="store_true")
        h.set_defaults(func=func)

    f = sub.add_parser("verify-fibration", help="exhaustively check the lifting property")
    f.add_argument("file", type=_existing)
    f.add_argument("--max-dim", type=int, required=True)
    f.add_argument("--budget", type=int)
    f.add_argument("--report", type=Path)
    f.add_argument("--no-timing", action="store_true",
                   help="leave elapsed time out of the report so reruns compare byte for byte")
    f.add_argument("--workers", type=int, default=1)
    f.add_argument("--trace", action="store_true")
    f.set_defaults(func=cmd_verify)

    c = sub.add_parser("kan12-circle", help="(1,2)-horn test on the free Z/m-module circle")
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--pretty", action="store_true")
    c.set_defaults(func=cmd_kan12)

    g = sub.add_parser("gen-fixture", help="write a simplicial algebra or hom fixture")
    g.add_argument("--kind", required=True,
                   choices=["constant", "nerve", "circle", "reduction", "multiply"])
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--levels", type=int, required=True)
    g.add_argument("--to", type=int, help="target modulus for reduction/multiply")
    g.add_argument("--algebra", type=_existing, help="algebra file for --kind constant")
    g.add_argument("--out", type=Path, required=True)
    g.set_defaults(func=cmd_gen_fixture)

    a = sub.add_parser("gen-algebra", help="write a standard finite algebra")
    a.add_argument("--kind", required=True, choices=sorted(_ALGEBRAS))
    a.add_argument("--m", type=int, default=2)
    a.add_argument("--out", type=Path, required=True)
    a.set_defaults(func=cmd_gen_algebra)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ResourceLimit as e:
        print(f"resource limit: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except NoPreimage as e:
        print(f"no lift: {e}", file=sys.stderr)
        return EXIT_NEGATIVE
    except (ValidationError, ParseError, HornError) as e:
        print(f"invalid input: {e}", file=sys.stderr)
        return EXIT_INVALID
    except MaltsevKanError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, json.JSONDecodeError) as e:
        print(f"invalid input: {e}", file=sys.stderr)
        return EXIT_INVALID


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
