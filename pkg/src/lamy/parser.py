"""Parser for terms, types and term files.

Grammar::

    type  ::= tatom ('->' type)?
    tatom ::= 'o' | '(' type ')' | '[' type ';' INT ']'
    term  ::= '\\' x ':' type '.' term
            | 'case' term '{' '#'INT '->' term ('|' '#'INT '->' term)* '}'
            | atom+ [trailing abstraction]
    atom  ::= ident ['^{' '#'INT '}'] | 'Y' [':' type] | 'omega' ':' type
            | 'Omega' ':' type | '#'INT ':' tatom | '(' term ')'

A bare ``Y`` takes its type from its first argument.  Term files hold
``const a : o -> o -> o;`` headers and ``let name = term`` /
``main = term`` bindings; ``#`` starts a comment when followed by a space
or at end of line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from lamy.syntax import (
    Abs,
    App,
    Arrow,
    Case,
    Const,
    Elem,
    LittleOmega,
    O,
    Omega,
    SemTag,
    Signature,
    SimpleType,
    Term,
    TypeCheckError,
    Var,
    Y,
    type_of,
)


class ParseError(Exception):
    def __init__(self, message: str, pos: int | None = None, text: str | None = None):
        self.pos = pos
        if pos is not None and text is not None:
            line = text.count("\n", 0, pos) + 1
            col = pos - (text.rfind("\n", 0, pos) + 1) + 1
            message = f"{message} at line {line}, column {col}"
        super().__init__(message)


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<arrow>->|→)
  | (?P<lam>\\|λ)
  | (?P<ann>\^\{)
  | (?P<elem>\#\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<int>\d+)
  | (?P<punct>[():.\[\];{}|=])
    """,
    re.VERBOSE,
)


@dataclass
class Tok:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            if kind == "punct":
                kind = value
            toks.append(Tok(kind, value, pos))
        pos = m.end()
    toks.append(Tok("eof", "", len(text)))
    return toks


# Raw syntax, elaborated once scopes and Y types are known.


@dataclass
class RIdent:
    name: str
    pos: int
    annotation: int | None = None


@dataclass
class RY:
    pos: int
    type: SimpleType | None = None


@dataclass
class RLeaf:
    term: Term


@dataclass
class RAbs:
    name: str
    type: SimpleType
    body: object


@dataclass
class RApp:
    fun: object
    arg: object
    pos: int


@dataclass
class RCase:
    scrutinee: object
    branches: dict
    pos: int


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def advance(self) -> Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind: str) -> Tok:
        if self.tok.kind != kind:
            self.fail(f"expected {kind!r}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def fail(self, msg: str):
        raise ParseError(msg, self.tok.pos, self.text)

    # types
    def type(self) -> SimpleType:
        left = self.tatom()
        if self.tok.kind == "arrow":
            self.advance()
            return Arrow(left, self.type())
        return left

    def tatom(self) -> SimpleType:
        t = self.tok
        if t.kind == "ident" and t.text == "o":
            self.advance()
            return O
        if t.kind == "(":
            self.advance()
            ty = self.type()
            self.expect(")")
            return ty
        if t.kind == "[":
            self.advance()
            of = self.type()
            self.expect(";")
            size = int(self.expect("int").text)
            self.expect("]")
            return SemTag(of, size)
        self.fail("expected a type")

    # terms
    def term(self):
        t = self.tok
        if t.kind == "lam":
            self.advance()
            name = self.expect("ident").text
            self.expect(":")
            ty = self.type()
            self.expect(".")
            return RAbs(name, ty, self.term())
        if t.kind == "ident" and t.text == "case":
            self.advance()
            scrut = self.term()
            self.expect("{")
            branches = {}
            while True:
                key = self.expect("elem")
                self.expect("arrow")
                idx = int(key.text[1:])
                if idx in branches:
                    raise ParseError(f"duplicate case branch #{idx}", key.pos, self.text)
                branches[idx] = self.term()
                if self.tok.kind == "|":
                    self.advance()
                    continue
                break
            self.expect("}")
            return RCase(scrut, branches, t.pos)
        head = self.atom()
        while self.starts_atom():
            pos = self.tok.pos
            head = RApp(head, self.atom(), pos)
        if self.tok.kind == "lam" or (self.tok.kind == "ident" and self.tok.text == "case"):
            pos = self.tok.pos
            head = RApp(head, self.term(), pos)
        return head

    def starts_atom(self) -> bool:
        t = self.tok
        if t.kind == "ident":
            return t.text not in ("case", "let", "main", "const")
        return t.kind in ("(", "elem")

    def atom(self):
        t = self.tok
        if t.kind == "(":
            self.advance()
            inner = self.term()
            self.expect(")")
            return inner
        if t.kind == "elem":
            self.advance()
            self.expect(":")
            tag = self.tatom()
            if not isinstance(tag, SemTag):
                raise ParseError("model elements need a tagged type [T;k]", t.pos, self.text)
            return RLeaf(Elem(tag, int(t.text[1:])))
        if t.kind == "ident":
            self.advance()
            if t.text == "Y":
                if self.tok.kind == ":":
                    self.advance()
                    return RY(t.pos, self.type())
                return RY(t.pos)
            if t.text in ("omega", "Omega"):
                self.expect(":")
                ty = self.type()
                return RLeaf(LittleOmega(ty) if t.text == "omega" else Omega(ty))
            ann = None
            if self.tok.kind == "ann":
                self.advance()
                ann = int(self.expect("elem").text[1:])
                self.expect("}")
            return RIdent(t.text, t.pos, ann)
        self.fail(f"unexpected {t.text or 'end of input'!r}")


class _Elaborator:
    def __init__(self, sig: Signature, lets: dict[str, Term], text: str):
        self.sig = sig
        self.lets = lets
        self.text = text

    def err(self, msg: str, pos: int):
        raise ParseError(msg, pos, self.text)

    def run(self, raw, scope: dict[str, SimpleType]) -> Term:
        if isinstance(raw, RLeaf):
            return raw.term
        if isinstance(raw, RIdent):
            if raw.name in scope and raw.annotation is None:
                return Var(raw.name, scope[raw.name])
            if raw.name in self.sig.constants:
                return Const(raw.name, self.sig.constants[raw.name], raw.annotation)
            if raw.name in self.lets and raw.annotation is None:
                return self.lets[raw.name]
            self.err(f"unknown identifier {raw.name!r}", raw.pos)
        if isinstance(raw, RY):
            if raw.type is None:
                self.err("bare Y needs an argument or a type ascription Y:T", raw.pos)
            return Y(raw.type)
        if isinstance(raw, RAbs):
            return Abs(raw.name, raw.type, self.run(raw.body, {**scope, raw.name: raw.type}))
        if isinstance(raw, RApp):
            arg = self.run(raw.arg, scope)
            if isinstance(raw.fun, RY) and raw.fun.type is None:
                aty = self.check(arg, raw.pos)
                if not (isinstance(aty, Arrow) and aty.dom == aty.cod):
                    self.err(f"Y applied to a term of type {aty}, expected T -> T", raw.pos)
                fun = Y(aty.dom)
            else:
                fun = self.run(raw.fun, scope)
            t = App(fun, arg)
            self.check(t, raw.pos)
            return t
        if isinstance(raw, RCase):
            scrut = self.run(raw.scrutinee, scope)
            sty = self.check(scrut, raw.pos)
            if not isinstance(sty, SemTag):
                self.err(f"case scrutinee has type {sty}, expected a tagged type", raw.pos)
            if sorted(raw.branches) != list(range(sty.size)):
                self.err(f"case branches must cover #0..#{sty.size - 1}", raw.pos)
            t = Case(scrut, tuple(self.run(raw.branches[i], scope) for i in range(sty.size)))
            self.check(t, raw.pos)
            return t
        raise AssertionError(raw)

    def check(self, t: Term, pos: int) -> SimpleType:
        try:
            return type_of(t)
        except TypeCheckError as e:
            self.err(f"type error: {e}", pos)


def parse_type(text: str) -> SimpleType:
    p = _Parser(text)
    ty = p.type()
    p.expect("eof")
    return ty


def parse_term(
    text: str,
    sig: Signature,
    free: dict[str, SimpleType] | None = None,
    lets: dict[str, Term] | None = None,
) -> Term:
    """Parse and type-check a term.  ``free`` declares permitted free variables."""
    p = _Parser(text)
    raw = p.term()
    p.expect("eof")
    el = _Elaborator(sig, lets or {}, text)
    t = el.run(raw, dict(free or {}))
    el.check(t, 0)
    return t


def strip_comments(text: str) -> str:
    # '#' followed by a digit is a model-element literal, anything else a comment
    return re.sub(r"#(?!\d)[^\n]*", lambda m: " " * len(m.group()), text)


@dataclass
class TermFile:
    signature: Signature
    bindings: dict[str, Term] = field(default_factory=dict)

    @property
    def main(self) -> Term:
        if "main" not in self.bindings:
            raise ParseError("term file has no 'main = ...' binding")
        return self.bindings["main"]


CONST_DECL = re.compile(r"const\s+([A-Za-z_][A-Za-z0-9_']*)\s*:\s*([^;]*);")


def parse_term_file(text: str, sig: Signature | None = None, tree_signature: bool = True) -> TermFile:
    """Parse a term file: ``const`` headers then ``let``/``main`` bindings.

    A binding runs until the next line starting with ``let`` or ``main``.
    """
    text = strip_comments(text)
    consts = dict(sig.constants) if sig else {}
    body_start = 0
    for m in CONST_DECL.finditer(text):
        consts[m.group(1)] = parse_type(m.group(2))
        body_start = max(body_start, m.end())
    rest = CONST_DECL.sub(lambda m: " " * len(m.group()), text)
    signature = Signature(consts, tree_signature=tree_signature)
    tf = TermFile(signature)
    starts = [m.start() for m in re.finditer(r"^\s*(let\s+[A-Za-z_][A-Za-z0-9_']*|main)\s*=", rest, re.M)]
    if rest[: starts[0] if starts else len(rest)].strip():
        raise ParseError("unexpected text before the first binding", 0, text)
    for k, s in enumerate(starts):
        end = starts[k + 1] if k + 1 < len(starts) else len(rest)
        chunk = rest[s:end]
        head, _, body = chunk.partition("=")
        name = head.split()[-1]
        try:
            tf.bindings[name] = parse_term(body, signature, lets=tf.bindings)
        except ParseError as e:
            raise ParseError(f"in binding {name!r}: {e}") from None
    return tf


def term_file_text(sig: Signature, main: Term, lets: dict[str, Term] | None = None) -> str:
    from lamy.printer import print_term

    lines = [f"const {n} : {ty};" for n, ty in sig.constants.items()]
    for n, t in (lets or {}).items():
        lines.append(f"let {n} = {print_term(t)}")
    lines.append(f"main = {print_term(main)}")
    return "\n".join(lines) + "\n"
