"""Higher-order recursion schemes and their translation to closed λY-terms.

File format::

    const a : o -> o -> o;
    const c : o;
    S : o = F c .
    F x : o -> o = a x (F x) .

Each rule is ``Name params : type = rhs .``; the start symbol is ``S`` if
declared, otherwise the first rule.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from lamy.parser import ParseError, CONST_DECL, parse_term, parse_type, strip_comments
from lamy.syntax import (
    Abs,
    App,
    Const,
    O,
    Signature,
    SimpleType,
    Term,
    Var,
    Y,
    arg_types,
    spine,
    substitute,
    type_of,
)
from lamy.trees import CUT, OMEGA, Tree


class SchemeError(Exception):
    pass


@dataclass(frozen=True)
class Rule:
    name: str
    params: tuple[str, ...]
    type: SimpleType
    rhs: Term

    def body(self) -> Term:
        """λparams. rhs"""
        t = self.rhs
        for p, ty in reversed(list(zip(self.params, arg_types(self.type)))):
            t = Abs(p, ty, t)
        return t


@dataclass(frozen=True)
class Scheme:
    signature: Signature
    rules: tuple[Rule, ...]
    start: str

    def rule(self, name: str) -> Rule:
        for r in self.rules:
            if r.name == name:
                return r
        raise KeyError(name)

    @property
    def nonterminals(self) -> dict[str, SimpleType]:
        return {r.name: r.type for r in self.rules}


_RULE_HEAD = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_']*)((?:\s+[A-Za-z_][A-Za-z0-9_']*)*)\s*:\s*(.*)$", re.S)


def parse_scheme(text: str, sig: Signature | None = None) -> Scheme:
    text = strip_comments(text)
    consts = {}
    for m in CONST_DECL.finditer(text):
        consts[m.group(1)] = parse_type(m.group(2))
    if sig is None:
        sig = Signature(consts)
    body = CONST_DECL.sub("", text)
    chunks = [c for c in re.split(r"(?<=\S)\s*\.\s*(?:\n|$)", body) if c.strip()]
    heads = []
    for chunk in chunks:
        if "=" not in chunk:
            raise SchemeError(f"rule without '=': {chunk.strip()!r}")
        lhs, rhs = chunk.split("=", 1)
        m = _RULE_HEAD.fullmatch(lhs)
        if not m:
            raise SchemeError(f"cannot parse rule head {lhs.strip()!r}")
        name, params, ty = m.group(1), tuple(m.group(2).split()), parse_type(m.group(3))
        if len(params) > len(arg_types(ty)):
            raise SchemeError(f"{name} has more parameters than its type allows")
        if name in sig.constants:
            raise SchemeError(f"nonterminal {name} clashes with a terminal")
        heads.append((name, params, ty, rhs))
    if not heads:
        raise SchemeError("scheme has no rules")
    nts = {n: ty for n, _, ty, _ in heads}
    if len(nts) != len(heads):
        raise SchemeError("duplicate nonterminal")
    rules = []
    for name, params, ty, rhs in heads:
        scope = dict(nts)
        for p, pty in zip(params, arg_types(ty)):
            scope[p] = pty
        try:
            t = parse_term(rhs.strip(), sig, free=scope)
        except ParseError as e:
            raise SchemeError(f"in rule {name}: {e}") from None
        want = ty
        for _ in params:
            want = want.cod
        if type_of(t) != want:
            raise SchemeError(f"rule {name}: right-hand side has type {type_of(t)}, expected {want}")
        rules.append(Rule(name, params, ty, t))
    start = "S" if "S" in nts else heads[0][0]
    if nts[start] != O:
        raise SchemeError(f"start symbol {start} must have type o")
    return Scheme(sig, tuple(rules), start)


def scheme_to_lamy(s: Scheme) -> Term:
    """Eliminate nonterminals one at a time (Bekić), in declaration order
    with the start symbol last: each is closed off by a fixpoint over its
    own type and substituted into the remaining rules."""
    bodies = {r.name: r.body() for r in s.rules}
    types = s.nonterminals

    def close(name: str) -> Term:
        body = bodies.pop(name)
        if not any(v == name for v, _ in body.fv):
            return body
        return App(Y(types[name]), Abs(name, types[name], body))

    for name in [r.name for r in s.rules if r.name != s.start]:
        closed = close(name)
        for other in bodies:
            bodies[other] = substitute(bodies[other], {name: closed})
    return close(s.start)


# ---------------------------------------------------------------------------
# Direct rewriting (test oracle)


def rewrite_tree(s: Scheme, depth: int, fuel: int = 10_000) -> Tree:
    """Value tree of the scheme cut at ``depth`` by outermost rewriting.

    A node whose head does not become a terminal within ``fuel`` rewrites
    is taken to be Ω.  Works directly on applicative right-hand sides,
    independently of the λY translation.
    """
    rules = {r.name: r for r in s.rules}

    def inst(t: Term, env: dict[str, Term]) -> Term:
        head, args = spine(t)
        args = [inst(a, env) for a in args]
        if isinstance(head, Var) and head.name in env:
            head = env[head.name]
        elif not isinstance(head, (Var, Const)):
            raise SchemeError(f"non-applicative right-hand side: {t}")
        out = head
        for a in args:
            out = App(out, a)
        return out

    def node(t: Term, d: int) -> Tree:
        if d == 0:
            return Tree(CUT)
        for _ in range(fuel):
            head, args = spine(t)
            if isinstance(head, Const):
                if not args:
                    return Tree(head.name)
                return Tree(head.name, tuple(node(a, d - 1) for a in args))
            r = rules[head.name]
            n = len(r.params)
            env = dict(zip(r.params, args[:n]))
            t = inst(r.rhs, env)
            for a in args[n:]:
                t = App(t, a)
        return Tree(OMEGA)

    return node(Var(s.start, O), depth)
