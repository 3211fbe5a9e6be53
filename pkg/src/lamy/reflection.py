"""Reflection: transform a term so that its Böhm tree carries model values.

Every node ``a`` of the Böhm tree of the transformed term is annotated
with the model value of the subterm it came from.  The transformation
passes model elements alongside ordinary arguments: a function of type
α→β becomes one of type α•→[α]→β•, where the atomic type [α] has one
constant per element of the model at α, and ``case`` dispatches on them.
"""

from __future__ import annotations

from typing import Mapping

from lamy.domains import Model, Value
from lamy.kmodel import DModel, KModel
from lamy.reduction import HNF, Diverged, Reducer, ReductionError
from lamy.syntax import (
    Abs,
    App,
    Arrow,
    BINARY,
    Case,
    Const,
    Elem,
    LittleOmega,
    O,
    Omega,
    SemTag,
    SimpleType,
    Term,
    Var,
    Y,
    all_names,
    apps,
    arg_types,
    fresh_name,
    is_closed,
    spine,
    subterms,
    type_of,
)
from lamy.trees import CUT, OMEGA, Tree


class ReflectionError(Exception):
    pass


def tag_type(m: Model, ty: SimpleType) -> SemTag:
    return SemTag(ty, len(m.domain(ty)))


def type_bullet(ty: SimpleType, m: Model) -> SimpleType:
    """o• = o and (α→β)• = α•→[α]→β•."""
    if isinstance(ty, Arrow):
        return Arrow(type_bullet(ty.dom, m), Arrow(tag_type(m, ty.dom), type_bullet(ty.cod, m)))
    return ty


def elem(m: Model, ty: SimpleType, v: Value) -> Elem:
    return Elem(tag_type(m, ty), m.domain(ty).index[v])


def denotes_divergence(m: Model, v: Value, ty: SimpleType) -> bool:
    """True when the value forces every use of the term to diverge."""
    if isinstance(m, KModel):
        return m.bar(v, ty) == m.d.bottom(ty)
    if isinstance(m, DModel):
        return v == m.bottom(ty)
    raise ReflectionError(f"model {m.name} does not observe divergence; no Omega shortcut")


class _Names:
    def __init__(self, t: Term, env: Mapping[str, Value]):
        self.used = all_names(t) | set(env)

    def fresh(self, base: str) -> str:
        n = fresh_name(base, self.used)
        self.used.add(n)
        return n


def _annotate(m: Model, name: str, ty: SimpleType, v: Value) -> Const:
    return Const(name, ty, m.domain(O).index[v])


def _binary_body(m: Model, a: Const, d1: Value, d2: Value, x1: str, x2: str) -> Term:
    v = m.apply(m.apply(m.constant(a), d1, O), d2, O)
    return apps(_annotate(m, a.name, BINARY, v), Var(x1, O), Var(x2, O))


class _Reflector:
    def __init__(self, m: Model, t: Term, env: Mapping[str, Value], omega_shortcut: bool):
        self.m = m
        self.names = _Names(t, env)
        self.shortcut = omega_shortcut

    def value(self, t: Term, env) -> Value:
        return self.m.eval(t, {n: env[n] for n, _ in t.fv})

    def diverges(self, t: Term, env) -> bool:
        return self.shortcut and denotes_divergence(self.m, self.value(t, env), type_of(t))

    # plain translation -----------------------------------------------------
    def plain(self, t: Term, env: dict) -> Term:
        m = self.m
        ty = type_of(t)
        if self.diverges(t, env):
            return Omega(type_bullet(ty, m))
        if isinstance(t, Var):
            return Var(t.name, type_bullet(t.type, m))
        if isinstance(t, Const):
            if t.type == O:
                return _annotate(m, t.name, O, m.constant(t))
            if t.type != BINARY:
                raise ReflectionError(f"constant {t.name} : {t.type} is outside the tree signature")
            x1, y1, x2, y2 = (self.names.fresh(b) for b in ("x", "y", "x", "y"))
            base = m.domain(O).elements
            tag = tag_type(m, O)
            inner = Case(
                Var(y1, tag),
                tuple(
                    Case(Var(y2, tag), tuple(_binary_body(m, t, d1, d2, x1, x2) for d2 in base))
                    for d1 in base
                ),
            )
            return Abs(x1, O, Abs(y1, tag, Abs(x2, O, Abs(y2, tag, inner))))
        if isinstance(t, Abs):
            y = self.names.fresh("y")
            tag = tag_type(m, t.var_type)
            branches = tuple(self.plain(t.body, {**env, t.name: d}) for d in m.domain(t.var_type).elements)
            return Abs(t.name, type_bullet(t.var_type, m), Abs(y, tag, Case(Var(y, tag), branches)))
        if isinstance(t, App):
            if isinstance(t.fun, Y):
                return self.fixpoint(t, env, lambda body, e: self.plain(body, e))
            aty = type_of(t.arg)
            return apps(self.plain(t.fun, env), self.plain(t.arg, env), elem(m, aty, self.value(t.arg, env)))
        if isinstance(t, Y):
            return self.plain(eta_y(t, self.names), env)
        if isinstance(t, Omega):
            return Omega(type_bullet(t.type, m))
        if isinstance(t, LittleOmega):
            return LittleOmega(type_bullet(t.type, m))
        raise ReflectionError(f"cannot reflect {t!r}")

    def fixpoint(self, t: App, env: dict, translate) -> Term:
        """Y M ↦ Y(λx. [M] x d) with d the value of Y M."""
        alpha = t.fun.type
        ab = type_bullet(alpha, self.m)
        x = self.names.fresh("z")
        d = elem(self.m, alpha, self.value(t, env))
        body = apps(translate(t.arg, env), Var(x, ab), d)
        return App(Y(ab), Abs(x, ab, body))

    # stack-driven translation ---------------------------------------------
    def opt(self, t: Term, env: dict, stack: tuple) -> Term:
        m = self.m
        ty = type_of(t)
        if self.diverges(t, env):
            return Omega(type_bullet(ty, m))
        if isinstance(t, Var):
            return Var(t.name, type_bullet(t.type, m))
        if isinstance(t, Const):
            if t.type == O:
                return _annotate(m, t.name, O, m.constant(t))
            if len(stack) != 2:
                raise ReflectionError(f"constant {t.name} is not fully applied (term is not η-long)")
            d1, d2 = stack
            x1, y1, x2, y2 = (self.names.fresh(b) for b in ("x", "y", "x", "y"))
            tag = tag_type(m, O)
            body = _binary_body(m, t, d1, d2, x1, x2)
            return Abs(x1, O, Abs(y1, tag, Abs(x2, O, Abs(y2, tag, body))))
        if isinstance(t, Abs):
            y = self.names.fresh("y")
            tag = tag_type(m, t.var_type)
            xb = type_bullet(t.var_type, m)
            if stack:
                return Abs(t.name, xb, Abs(y, tag, self.opt(t.body, {**env, t.name: stack[0]}, stack[1:])))
            branches = tuple(self.opt(t.body, {**env, t.name: d}, ()) for d in m.domain(t.var_type).elements)
            return Abs(t.name, xb, Abs(y, tag, Case(Var(y, tag), branches)))
        if isinstance(t, App):
            if isinstance(t.fun, Y):
                # the recursive occurrence is re-entered with unknown arguments,
                # so the pending stack is not passed under Y
                d = self.value(t, env)
                return self.fixpoint(t, env, lambda body, e: self.opt(body, e, (d,)))
            aty = type_of(t.arg)
            dv = self.value(t.arg, env)
            return apps(self.opt(t.fun, env, (dv,) + stack), self.opt(t.arg, env, ()), elem(m, aty, dv))
        if isinstance(t, Y):
            raise ReflectionError("bare Y (term is not η-long)")
        if isinstance(t, Omega):
            return Omega(type_bullet(t.type, m))
        if isinstance(t, LittleOmega):
            return LittleOmega(type_bullet(t.type, m))
        raise ReflectionError(f"cannot reflect {t!r}")


def eta_y(t: Y, names: _Names) -> Term:
    f = names.fresh("f")
    fty = Arrow(t.type, t.type)
    return Abs(f, fty, App(t, Var(f, fty)))


def reflect(m: Model, t: Term, env: Mapping[str, Value] | None = None, omega_shortcut: bool = False) -> Term:
    """The bracket translation of ``t`` under the valuation ``env``."""
    env = dict(env or {})
    return _Reflector(m, t, env, omega_shortcut).plain(t, env)


def reflect_opt(
    m: Model,
    t: Term,
    env: Mapping[str, Value] | None = None,
    stack: tuple = (),
    omega_shortcut: bool = False,
) -> Term:
    """Translation that consumes known argument values from ``stack``
    instead of emitting ``case``.  ``t`` must be η-long (see ``eta_long``)."""
    env = dict(env or {})
    return _Reflector(m, t, env, omega_shortcut).opt(t, env, tuple(stack))


def eta_long(t: Term) -> Term:
    """η-expand partial applications of binary constants and bare Y."""
    names = _Names(t, {})

    def go(s: Term) -> Term:
        head, args = spine(s)
        if isinstance(head, (Const, Y)) and not (isinstance(head, Const) and head.type == O):
            args = [go(a) for a in args]
            need = 2 if isinstance(head, Const) else 1
            if len(args) >= need:
                return apps(head, *args)
            missing = arg_types(type_of(head))[len(args) : need]
            fresh = [(names.fresh("e"), ty) for ty in missing]
            body = apps(head, *args, *(Var(n, ty) for n, ty in fresh))
            for n, ty in reversed(fresh):
                body = Abs(n, ty, body)
            return body
        if isinstance(s, App):
            return App(go(s.fun), go(s.arg))
        if isinstance(s, Abs):
            return Abs(s.name, s.var_type, go(s.body))
        if isinstance(s, Case):
            return Case(go(s.scrutinee), tuple(go(b) for b in s.branches))
        return s

    return go(t)


# ---------------------------------------------------------------------------
# case


def case_reduce(t: Term) -> Term:
    if not isinstance(t, Case):
        raise ReflectionError("not a case expression")
    if not isinstance(t.scrutinee, Elem):
        raise ReflectionError(f"stuck case: scrutinee {t.scrutinee} is not an element constant")
    return t.branches[t.scrutinee.index]


def desugar_type(ty: SimpleType) -> SimpleType:
    """[α;k] becomes o^k→o; other types are rebuilt structurally."""
    if isinstance(ty, SemTag):
        out: SimpleType = O
        for _ in range(ty.size):
            out = Arrow(O, out)
        return out
    if isinstance(ty, Arrow):
        return Arrow(desugar_type(ty.dom), desugar_type(ty.cod))
    return ty


def desugar_case(t: Term) -> Term:
    """Replace element constants by projections and ``case`` by application."""
    names = _Names(t, {})

    def go(s: Term) -> Term:
        if isinstance(s, Elem):
            xs = [names.fresh("p") for _ in range(s.tag.size)]
            body: Term = Var(xs[s.index], O)
            for x in reversed(xs):
                body = Abs(x, O, body)
            return body
        if isinstance(s, Case):
            bty = desugar_type(type_of(s.branches[0]))
            ys = [(names.fresh("w"), a) for a in arg_types(bty)]
            yv = [Var(n, a) for n, a in ys]
            body = apps(go(s.scrutinee), *(apps(go(b), *yv) for b in s.branches))
            for n, a in reversed(ys):
                body = Abs(n, a, body)
            return body
        if isinstance(s, Var):
            return Var(s.name, desugar_type(s.type))
        if isinstance(s, Abs):
            return Abs(s.name, desugar_type(s.var_type), go(s.body))
        if isinstance(s, App):
            return App(go(s.fun), go(s.arg))
        if isinstance(s, Y):
            return Y(desugar_type(s.type))
        if isinstance(s, Omega):
            return Omega(desugar_type(s.type))
        if isinstance(s, LittleOmega):
            return LittleOmega(desugar_type(s.type))
        return s

    return go(t)


# ---------------------------------------------------------------------------
# reflective Böhm trees


def rbt_truncate(m: Model, t: Term, depth: int, reducer: Reducer | None = None) -> Tree:
    """Böhm tree cut at ``depth`` with every constant node annotated by the
    index (in the model's base enumeration) of its subterm's value."""
    if not is_closed(t) or type_of(t) != O:
        raise ReductionError("rbt_truncate needs a closed term of type o")
    r = reducer or Reducer()
    base = m.domain(O)

    def rec(s: Term, d: int) -> Tree:
        if d == 0:
            return Tree(CUT)
        h = r.head_normalize(s)
        if isinstance(h, Diverged):
            return Tree(OMEGA)
        if not isinstance(h, HNF):
            raise ReductionError(f"out of fuel on {s}")
        node = r._node(h.head, h.args, d, rec)
        if node.label in (CUT, OMEGA):
            return node
        return Tree(node.label, node.children, base.index[m.eval(s)])

    return rec(t, depth)


def legend(m: Model, t: Term | None = None) -> str:
    """Index → value listing for the base domain and any tags used in ``t``."""
    lines = ["legend:"]
    for i, v in enumerate(m.domain(O).elements):
        lines.append(f"  #{i} = {m.format_value(v, O)}")
    if t is not None:
        tags = sorted({s.tag for s in subterms(t) if isinstance(s, Elem)}, key=str)
        for tag in tags:
            if tag.of == O:
                continue
            for i, v in enumerate(m.domain(tag.of).elements):
                lines.append(f"  {tag} #{i} = {m.format_value(v, tag.of)}")
    return "\n".join(lines) + "\n"
