"""Simple types and λY-terms.

Terms are immutable dataclasses.  Hashes are cached on first use so terms
can serve as memo keys during evaluation and Böhm-tree expansion.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Union


class TypeCheckError(Exception):
    """Raised for ill-typed terms; ``path`` locates the offending subterm."""

    def __init__(self, message: str, path: tuple[str, ...] = ()):
        self.path = path
        where = "/".join(path) if path else "<root>"
        super().__init__(f"{message} (at {where})")


# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class Base:
    def __str__(self) -> str:
        return "o"


@dataclass(frozen=True)
class Arrow:
    dom: "SimpleType"
    cod: "SimpleType"

    def __str__(self) -> str:
        left = str(self.dom)
        if isinstance(self.dom, Arrow):
            left = f"({left})"
        return f"{left} -> {self.cod}"


@dataclass(frozen=True)
class SemTag:
    """The atomic type [α] whose closed normal inhabitants are the ``size``
    elements of a model's domain at ``of``."""

    of: "SimpleType"
    size: int

    def __str__(self) -> str:
        return f"[{self.of};{self.size}]"


SimpleType = Union[Base, Arrow, SemTag]

O = Base()


def arrow(*types: SimpleType) -> SimpleType:
    """``arrow(a, b, c)`` is ``a -> b -> c``."""
    result = types[-1]
    for t in reversed(types[:-1]):
        result = Arrow(t, result)
    return result


def order(ty: SimpleType) -> int:
    if isinstance(ty, Arrow):
        return max(1 + order(ty.dom), order(ty.cod))
    return 0


def arg_types(ty: SimpleType) -> list[SimpleType]:
    args = []
    while isinstance(ty, Arrow):
        args.append(ty.dom)
        ty = ty.cod
    return args


def result_type(ty: SimpleType) -> SimpleType:
    while isinstance(ty, Arrow):
        ty = ty.cod
    return ty


BINARY = arrow(O, O, O)


@dataclass(frozen=True)
class Signature:
    constants: Mapping[str, SimpleType] = field(default_factory=dict)
    tree_signature: bool = True

    def __post_init__(self):
        object.__setattr__(self, "constants", dict(self.constants))
        if self.tree_signature:
            for name, ty in self.constants.items():
                if ty != O and ty != BINARY:
                    raise TypeCheckError(
                        f"constant {name} : {ty} violates the tree-signature arity proviso"
                    )
        else:
            for name, ty in self.constants.items():
                if order(ty) > 1:
                    raise TypeCheckError(f"constant {name} : {ty} has order > 1")

    def __hash__(self):
        return hash(tuple(sorted((k, str(v)) for k, v in self.constants.items())))

    @property
    def leaves(self) -> list[str]:
        return sorted(n for n, t in self.constants.items() if t == O)

    @property
    def binaries(self) -> list[str]:
        return sorted(n for n, t in self.constants.items() if t == BINARY)

    def type_of(self, name: str) -> SimpleType:
        try:
            return self.constants[name]
        except KeyError:
            raise TypeCheckError(f"unknown constant {name}") from None


# ---------------------------------------------------------------------------
# Terms


class Term:
    """Base class for λY-terms."""

    __slots__ = ()

    @cached_property
    def fv(self) -> frozenset[tuple[str, SimpleType]]:
        return frozenset(_free(self))

    @cached_property
    def size(self) -> int:
        return sum(1 for _ in subterms(self))

    def __str__(self) -> str:
        from lamy.printer import print_term

        return print_term(self)


def _cached_hash(self):
    h = self.__dict__.get("_hash")
    if h is None:
        h = hash((type(self).__name__,) + tuple(getattr(self, f) for f in self.__dataclass_fields__))
        self.__dict__["_hash"] = h
    return h


@dataclass(frozen=True, eq=True, repr=False)
class Const(Term):
    name: str
    type: SimpleType
    annotation: int | None = None

    def __repr__(self):
        ann = "" if self.annotation is None else f"^{{#{self.annotation}}}"
        return f"Const({self.name}{ann})"


@dataclass(frozen=True, eq=True, repr=False)
class Var(Term):
    name: str
    type: SimpleType

    def __repr__(self):
        return f"Var({self.name})"


@dataclass(frozen=True, eq=True, repr=False)
class Abs(Term):
    name: str
    var_type: SimpleType
    body: Term

    @property
    def var(self) -> Var:
        return Var(self.name, self.var_type)

    def __repr__(self):
        return f"Abs({self.name}:{self.var_type}, {self.body!r})"


@dataclass(frozen=True, eq=True, repr=False)
class App(Term):
    fun: Term
    arg: Term

    def __repr__(self):
        return f"App({self.fun!r}, {self.arg!r})"


@dataclass(frozen=True, eq=True, repr=False)
class Y(Term):
    """Fixpoint combinator at ``type``; the term has type (α→α)→α."""

    type: SimpleType

    def __repr__(self):
        return f"Y({self.type})"


@dataclass(frozen=True, eq=True, repr=False)
class Omega(Term):
    """Ω: the divergent term."""

    type: SimpleType

    def __repr__(self):
        return f"Omega({self.type})"


@dataclass(frozen=True, eq=True, repr=False)
class LittleOmega(Term):
    """ω: the truncation constant."""

    type: SimpleType

    def __repr__(self):
        return f"omega({self.type})"


@dataclass(frozen=True, eq=True, repr=False)
class Elem(Term):
    """The ``index``-th model element, a constant of tagged type ``tag``."""

    tag: SemTag
    index: int

    def __repr__(self):
        return f"Elem(#{self.index}:{self.tag})"


@dataclass(frozen=True, eq=True, repr=False)
class Case(Term):
    """``case scrutinee {#0 -> branches[0] | ...}``; total over the tag."""

    scrutinee: Term
    branches: tuple[Term, ...]

    def __repr__(self):
        return f"Case({self.scrutinee!r}, {list(self.branches)!r})"


for _cls in (Const, Var, Abs, App, Y, Omega, LittleOmega, Elem, Case):
    _cls.__hash__ = _cached_hash


def apps(head: Term, *args: Term) -> Term:
    for a in args:
        head = App(head, a)
    return head


def spine(t: Term) -> tuple[Term, list[Term]]:
    """Split ``h a1 ... an`` into ``(h, [a1..an])``."""
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


def lambdas(t: Term) -> tuple[list[tuple[str, SimpleType]], Term]:
    binders = []
    while isinstance(t, Abs):
        binders.append((t.name, t.var_type))
        t = t.body
    return binders, t


def subterms(t: Term) -> Iterable[Term]:
    stack = [t]
    while stack:
        s = stack.pop()
        yield s
        if isinstance(s, App):
            stack.append(s.arg)
            stack.append(s.fun)
        elif isinstance(s, Abs):
            stack.append(s.body)
        elif isinstance(s, Case):
            stack.extend(reversed(s.branches))
            stack.append(s.scrutinee)


def _free(t: Term) -> set[tuple[str, SimpleType]]:
    if isinstance(t, Var):
        return {(t.name, t.type)}
    if isinstance(t, App):
        return set(t.fun.fv | t.arg.fv)
    if isinstance(t, Abs):
        return {v for v in t.body.fv if v[0] != t.name}
    if isinstance(t, Case):
        out = set(t.scrutinee.fv)
        for b in t.branches:
            out |= b.fv
        return out
    return set()


def free_vars(t: Term) -> list[tuple[str, SimpleType]]:
    """Free variables in first-occurrence, left-to-right order."""
    seen: dict[str, SimpleType] = {}

    def walk(s: Term, bound: frozenset[str]):
        if not s.fv:
            return
        if isinstance(s, Var):
            if s.name not in bound and s.name not in seen:
                seen[s.name] = s.type
        elif isinstance(s, App):
            walk(s.fun, bound)
            walk(s.arg, bound)
        elif isinstance(s, Abs):
            walk(s.body, bound | {s.name})
        elif isinstance(s, Case):
            walk(s.scrutinee, bound)
            for b in s.branches:
                walk(b, bound)

    walk(t, frozenset())
    return list(seen.items())


def is_closed(t: Term) -> bool:
    return not t.fv


def contains(t: Term, kind: type) -> bool:
    return any(isinstance(s, kind) for s in subterms(t))


# ---------------------------------------------------------------------------
# Typing

def type_of(t: Term) -> SimpleType:
    """Type of ``t``; raises TypeCheckError with a path into the term."""
    cached = t.__dict__.get("_type")
    if cached is not None:
        return cached
    ty = _type_of(t, ())
    t.__dict__["_type"] = ty
    return ty


def _type_of(t: Term, path: tuple[str, ...]) -> SimpleType:
    cached = t.__dict__.get("_type")
    if cached is not None:
        return cached
    if isinstance(t, (Const, Var, Omega, LittleOmega)):
        ty = t.type
    elif isinstance(t, Y):
        ty = Arrow(Arrow(t.type, t.type), t.type)
    elif isinstance(t, Elem):
        if not 0 <= t.index < t.tag.size:
            raise TypeCheckError(f"element #{t.index} out of range for {t.tag}", path)
        ty = t.tag
    elif isinstance(t, Abs):
        ty = Arrow(t.var_type, _type_of(t.body, path + ("body",)))
    elif isinstance(t, App):
        f = _type_of(t.fun, path + ("fun",))
        a = _type_of(t.arg, path + ("arg",))
        if not isinstance(f, Arrow):
            raise TypeCheckError(f"applying non-function of type {f}", path)
        if f.dom != a:
            raise TypeCheckError(f"argument type {a} does not match {f.dom}", path)
        ty = f.cod
    elif isinstance(t, Case):
        s = _type_of(t.scrutinee, path + ("scrutinee",))
        if not isinstance(s, SemTag):
            raise TypeCheckError(f"case on non-tagged type {s}", path)
        if len(t.branches) != s.size:
            raise TypeCheckError(
                f"case has {len(t.branches)} branches but {s} has {s.size} elements", path
            )
        tys = {_type_of(b, path + (f"branch{i}",)) for i, b in enumerate(t.branches)}
        if len(tys) != 1:
            raise TypeCheckError("case branches disagree on type", path)
        ty = tys.pop()
    else:
        raise TypeCheckError(f"not a term: {t!r}", path)
    t.__dict__["_type"] = ty
    return ty


# ---------------------------------------------------------------------------
# Substitution and α-equivalence

def fresh_name(base: str, avoid: set[str]) -> str:
    stem = base.rstrip("'0123456789") or "v"
    i = 1
    while f"{stem}{i}" in avoid:
        i += 1
    return f"{stem}{i}"


def all_names(t: Term) -> set[str]:
    names = set()
    for s in subterms(t):
        if isinstance(s, Var):
            names.add(s.name)
        elif isinstance(s, Abs):
            names.add(s.name)
    return names


def substitute(t: Term, subst: Mapping[str, Term]) -> Term:
    """Simultaneous capture-avoiding substitution of terms for variable names."""
    for name, rep in subst.items():
        for v, ty in t.fv:
            if v == name and type_of(rep) != ty:
                raise TypeCheckError(f"substituting {type_of(rep)} for {name} : {ty}")
    return _subst(t, dict(subst))


def _subst(t: Term, subst: dict[str, Term]) -> Term:
    if not t.fv or not subst:
        return t
    live = {n: r for n, r in subst.items() if any(v == n for v, _ in t.fv)}
    if not live:
        return t
    if isinstance(t, Var):
        return live.get(t.name, t)
    if isinstance(t, App):
        return App(_subst(t.fun, live), _subst(t.arg, live))
    if isinstance(t, Case):
        return Case(_subst(t.scrutinee, live), tuple(_subst(b, live) for b in t.branches))
    if isinstance(t, Abs):
        inner = {n: r for n, r in live.items() if n != t.name}
        if not inner:
            return t
        incoming = set()
        for r in inner.values():
            incoming.update(v for v, _ in r.fv)
        if t.name in incoming:
            avoid = incoming | {v for v, _ in t.body.fv} | set(inner)
            new = fresh_name(t.name, avoid)
            inner[t.name] = Var(new, t.var_type)
            return Abs(new, t.var_type, _subst(t.body, inner))
        return Abs(t.name, t.var_type, _subst(t.body, inner))
    return t


def canonical(t: Term) -> Term:
    """Rename bound variables to ``_0, _1, ...`` by binding depth (de Bruijn
    levels), so α-equivalent terms become structurally equal."""

    def walk(s: Term, env: dict[str, str], depth: int) -> Term:
        if isinstance(s, Var):
            return Var(env.get(s.name, s.name), s.type)
        if isinstance(s, App):
            return App(walk(s.fun, env, depth), walk(s.arg, env, depth))
        if isinstance(s, Abs):
            new = f"_{depth}"
            return Abs(new, s.var_type, walk(s.body, {**env, s.name: new}, depth + 1))
        if isinstance(s, Case):
            return Case(
                walk(s.scrutinee, env, depth),
                tuple(walk(b, env, depth) for b in s.branches),
            )
        return s

    return walk(t, {}, 0)


def alpha_eq(a: Term, b: Term) -> bool:
    """α-equivalence by a parallel walk, without building canonical copies."""
    env_a: dict[str, list[int]] = {}
    env_b: dict[str, list[int]] = {}
    depth = 0
    stack: list = [(a, b)]
    while stack:
        item = stack.pop()
        if item[0] is None:
            # leaving a binder pair
            env_a[item[1]].pop()
            env_b[item[2]].pop()
            depth -= 1
            continue
        x, y = item
        if type(x) is not type(y):
            return False
        if isinstance(x, Var):
            if x.type != y.type:
                return False
            la = env_a.get(x.name)
            lb = env_b.get(y.name)
            la = la[-1] if la else None
            lb = lb[-1] if lb else None
            if la != lb or (la is None and x.name != y.name):
                return False
        elif isinstance(x, App):
            stack.append((x.arg, y.arg))
            stack.append((x.fun, y.fun))
        elif isinstance(x, Abs):
            if x.var_type != y.var_type:
                return False
            env_a.setdefault(x.name, []).append(depth)
            env_b.setdefault(y.name, []).append(depth)
            depth += 1
            stack.append((None, x.name, y.name))
            stack.append((x.body, y.body))
        elif isinstance(x, Case):
            if len(x.branches) != len(y.branches):
                return False
            stack.extend(zip(reversed(x.branches), reversed(y.branches)))
            stack.append((x.scrutinee, y.scrutinee))
        elif x != y:
            return False
    return True
