"""``lyc``: check λY-terms and recursion schemes against TAC automata."""

from __future__ import annotations

import argparse
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor

from lamy.automata import (
    EXAMPLES,
    AutomatonError,
    TacAutomaton,
    Verdict,
    accepts_bt,
    example_automaton,
    parse_automaton,
)
from lamy.domains import EvaluationError, SpaceTooLarge, dump_domain
from lamy.gfp import build_gfp, gfp_check
from lamy.kmodel import DModel, KModel, KModelError, build_k_model, divergence_check, k_check
from lamy.parser import ParseError, parse_term_file, parse_type
from lamy.reduction import Reducer, ReductionError
from lamy.reflection import ReflectionError, eta_long, legend, rbt_truncate, reflect, reflect_opt
from lamy.schemes import SchemeError, parse_scheme, scheme_to_lamy
from lamy.syntax import Signature, Term, TypeCheckError, type_of

EXIT_ACCEPT, EXIT_REJECT, EXIT_UNKNOWN = 0, 1, 2
EXIT_USAGE, EXIT_INPUT, EXIT_SPACE, EXIT_INTERNAL = 64, 65, 69, 70

INPUT_ERRORS = (OSError, ParseError, SchemeError, AutomatonError, TypeCheckError, ValueError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


# ---------------------------------------------------------------------------
# input helpers


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def load_terms(args) -> list[tuple[str, Signature, Term]]:
    """(label, signature, closed term) for every requested input."""
    out = []
    files = list(args.term or []) + ([args.file] if getattr(args, "file", None) else [])
    for path in files:
        tf = parse_term_file(_read(path))
        out.append((path, tf.signature, tf.main))
    for path in args.scheme or []:
        s = parse_scheme(_read(path))
        out.append((path, s.signature, scheme_to_lamy(s)))
    if not out:
        raise UsageError("no input: give --term FILE, --scheme FILE or a positional term file")
    return out


def load_automaton(args, sig: Signature) -> TacAutomaton:
    if args.aut and args.aut_example:
        raise UsageError("--aut and --aut-example are exclusive")
    if args.aut:
        return parse_automaton(_read(args.aut), sig, total_default=args.total_default)
    if args.aut_example:
        return example_automaton(args.aut_example, sig)
    raise UsageError("this command needs an automaton (--aut FILE or --aut-example NAME)")


def build_model(args, sig: Signature):
    if args.mode == "d":
        return DModel()
    aut = load_automaton(args, sig)
    if args.mode == "gfp":
        return build_gfp(aut)
    return build_k_model(aut)


# ---------------------------------------------------------------------------
# commands


def _check_one(args, label: str, sig: Signature, t: Term) -> tuple[int, str]:
    if args.mode == "d":
        converges = not divergence_check(t)
        verdict = Verdict.ACCEPTED if converges else Verdict.REJECTED
        text = "⊤" if converges else "⊥"
        model = None
    else:
        model = build_model(args, sig)
        res = gfp_check(model, t) if args.mode == "gfp" else k_check(model, t)
        verdict, text = res.verdict, res.text
    lines = [f"{verdict.value} {text}"]
    if args.explain:
        m = model or DModel()
        tree = rbt_truncate(m, t, args.depth, Reducer(args.fuel))
        lines.append(tree.indented().rstrip("\n"))
        lines.append(legend(m).rstrip("\n"))
    if args.dump_domain:
        m = model or DModel()
        ty = parse_type(args.dump_domain)
        lines.append(_domain_text(m, ty).rstrip("\n"))
    code = EXIT_ACCEPT if verdict is Verdict.ACCEPTED else EXIT_REJECT
    return code, "\n".join(lines)


def cmd_check(args) -> int:
    inputs = load_terms(args)

    def run(item):
        label, sig, t = item
        return _check_one(args, label, sig, t)

    if args.jobs > 1 and len(inputs) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(run, inputs))
    else:
        results = [run(i) for i in inputs]
    for (label, _, _), (_, text) in zip(inputs, results):
        if len(inputs) > 1:
            print(f"{label}: {text}")
        else:
            print(text)
    return max(code for code, _ in results)


def cmd_bohm(args) -> int:
    reducer = Reducer(args.fuel)
    for label, _, t in load_terms(args):
        tree = reducer.bohm_truncate(t, args.depth)
        print(tree.indented().rstrip("\n") if args.indented else tree.sexpr())
    return EXIT_ACCEPT


def cmd_bracket(args) -> int:
    code = EXIT_ACCEPT
    reducer = Reducer(args.fuel)
    for label, sig, t in load_terms(args):
        aut = load_automaton(args, sig)
        res = accepts_bt(aut, t, args.depth, reducer)
        print(f"{res.verdict.value} at depth {res.depth}")
        code = max(code, {Verdict.ACCEPTED: 0, Verdict.REJECTED: 1, Verdict.UNKNOWN: 2}[res.verdict])
    return code


def cmd_rbt(args) -> int:
    for label, sig, t in load_terms(args):
        m = build_model(args, sig)
        tree = rbt_truncate(m, t, args.depth, Reducer(args.fuel))
        print(tree.indented().rstrip("\n") if args.indented else tree.sexpr())
        print(legend(m), end="")
    return EXIT_ACCEPT


def cmd_reflect(args) -> int:
    for label, sig, t in load_terms(args):
        m = build_model(args, sig)
        if args.opt:
            r = reflect_opt(m, eta_long(t), omega_shortcut=args.omega_shortcut)
        else:
            r = reflect(m, t, omega_shortcut=args.omega_shortcut)
        print(r)
        print(legend(m, r), end="")
    return EXIT_ACCEPT


def cmd_diverges(args) -> int:
    code = EXIT_ACCEPT
    for label, _, t in load_terms(args):
        d = divergence_check(t)
        print("true" if d else "false")
        code = max(code, EXIT_ACCEPT if d else EXIT_REJECT)
    return code


def cmd_eval(args) -> int:
    for label, sig, t in load_terms(args):
        m = build_model(args, sig)
        print(m.format_value(m.eval(t), type_of(t)))
    return EXIT_ACCEPT


def _domain_text(m, ty) -> str:
    poset = m.domain(ty)
    if isinstance(m, KModel):
        ddom = m.d.domain(ty)

        def fmt(v):
            return f"{m.format_value(v, ty)}  bar=#{ddom.index[m.bar(v, ty)]}"

        return dump_domain(poset, fmt, f"K_{{{ty}}}")
    return dump_domain(poset, lambda v: m.format_value(v, ty), f"{m.name}_{{{ty}}}")


def cmd_dump_domain(args) -> int:
    sig = Signature({})
    if args.term or args.scheme or args.file:
        sig = load_terms(args)[0][1]
    m = build_model(args, sig)
    ty = parse_type(args.type)
    print(_domain_text(m, ty), end="")
    if args.figure:
        from lamy.figures import save_hasse

        save_hasse(m.domain(ty), args.figure, lambda v: m.format_value(v, ty), f"{m.name} at {ty}")
    return EXIT_ACCEPT


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", nargs="?", help="term file (same as --term)")
    common.add_argument("--term", action="append", metavar="FILE", help="term file with a 'main' binding")
    common.add_argument("--scheme", action="append", metavar="FILE", help="recursion scheme file")
    common.add_argument("--aut", metavar="FILE", help="automaton file")
    common.add_argument("--aut-example", choices=sorted(EXAMPLES), help="built-in example automaton")
    common.add_argument("--mode", choices=("k", "gfp", "d"), default="k", help="semantic model (default k)")
    common.add_argument("--depth", type=int, default=3, help="Böhm tree depth")
    common.add_argument("--fuel", type=int, default=100_000, help="head-reduction step bound")
    common.add_argument("--total-default", action="store_true", help="missing automaton entries are false/empty")

    p = _Parser(prog="lyc", description=__doc__)
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    c = sub.add_parser("check", parents=[common], help="decide acceptance of BT(M)")
    c.add_argument("--explain", action="store_true", help="print the annotated Böhm tree")
    c.add_argument("--dump-domain", metavar="TYPE", help="also dump the model's domain at TYPE")
    c.add_argument("--jobs", type=int, default=1, help="check several inputs in parallel")
    c.set_defaults(func=cmd_check)

    b = sub.add_parser("bohm", parents=[common], help="print the Böhm tree cut at --depth")
    b.add_argument("--indented", action="store_true")
    b.set_defaults(func=cmd_bohm)

    br = sub.add_parser("bracket", parents=[common], help="bracket acceptance by Böhm tree prefixes")
    br.set_defaults(func=cmd_bracket)

    r = sub.add_parser("rbt", parents=[common], help="Böhm tree annotated with model values")
    r.add_argument("--indented", action="store_true")
    r.set_defaults(func=cmd_rbt)

    f = sub.add_parser("reflect", parents=[common], help="print the reflected term")
    f.add_argument("--opt", action="store_true", help="use the stack-driven translation")
    f.add_argument("--omega-shortcut", action="store_true", help="emit Omega for divergent subterms")
    f.set_defaults(func=cmd_reflect)

    d = sub.add_parser("diverges", parents=[common], help="true iff the term has no head normal form")
    d.set_defaults(func=cmd_diverges)

    e = sub.add_parser("eval", parents=[common], help="print the model value")
    e.set_defaults(func=cmd_eval)

    dd = sub.add_parser("dump-domain", parents=[common], help="list a domain with its Hasse edges")
    dd.add_argument("--type", required=True, help="type to dump, e.g. 'o -> o'")
    dd.add_argument("--figure", metavar="PATH", help="also draw the Hasse diagram")
    dd.set_defaults(func=cmd_dump_domain)
    return p


def _warn(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    warnings.showwarning = _warn
    try:
        return args.func(args)
    except UsageError as e:
        print(f"lyc: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SpaceTooLarge as e:
        print(f"lyc: {e}", file=sys.stderr)
        return EXIT_SPACE
    except INPUT_ERRORS as e:
        print(f"lyc: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (ReductionError, ReflectionError, EvaluationError, KModelError) as e:
        print(f"lyc: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
