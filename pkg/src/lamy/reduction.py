"""Head reduction, head normal forms and exact Böhm-tree truncations."""

from __future__ import annotations

from dataclasses import dataclass

from lamy.kmodel import BOT, DModel
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
    Y,
    apps,
    is_closed,
    lambdas,
    spine,
    substitute,
    subterms,
    type_of,
)
from lamy.trees import CUT, OMEGA, Tree

DEFAULT_FUEL = 100_000


class _NoHeadRedex:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "NoHeadRedex"


NoHeadRedex = _NoHeadRedex()


class ReductionError(Exception):
    pass


def _has_tag(ty: SimpleType) -> bool:
    if isinstance(ty, SemTag):
        return True
    if isinstance(ty, Arrow):
        return _has_tag(ty.dom) or _has_tag(ty.cod)
    return False


def mentions_tags(t: Term) -> bool:
    """True if ``t`` uses tagged types (reflection output).

    Function spaces over tags grow exponentially in the tag size, so such
    terms are never sent to the 𝒟 oracle.
    """
    hit = t.__dict__.get("_tags")
    if hit is None:
        hit = any(
            isinstance(s, (Elem, Case))
            or (isinstance(s, Abs) and _has_tag(s.var_type))
            or (isinstance(s, (Y, Omega, LittleOmega)) and _has_tag(s.type))
            for s in subterms(t)
        )
        t.__dict__["_tags"] = hit
    return hit


def _wrap(binders, body: Term) -> Term:
    for name, ty in reversed(binders):
        body = Abs(name, ty, body)
    return body


def _step_body(t: Term):
    """One head step of a term without leading λs, or NoHeadRedex."""
    head, args = spine(t)
    if isinstance(head, Abs) and args:
        return apps(substitute(head.body, {head.name: args[0]}), *args[1:])
    if isinstance(head, Y) and args:
        m = args[0]
        return apps(App(m, App(head, m)), *args[1:])
    if isinstance(head, Case):
        scrut = head.scrutinee
        if isinstance(scrut, Elem):
            return apps(head.branches[scrut.index], *args)
        nxt = head_redex_step(scrut)
        if nxt is NoHeadRedex:
            return NoHeadRedex
        return apps(Case(nxt, head.branches), *args)
    return NoHeadRedex


def head_redex_step(t: Term):
    """Contract the head redex of ``t``; NoHeadRedex if ``t`` is in hnf.

    Besides β and δ, a case whose scrutinee is an element constant
    selects its branch, and a case with a reducible scrutinee reduces the
    scrutinee's head.
    """
    binders, body = lambdas(t)
    nxt = _step_body(body)
    if nxt is NoHeadRedex:
        return NoHeadRedex
    return _wrap(binders, nxt)


@dataclass(frozen=True)
class HNF:
    binders: tuple[tuple[str, SimpleType], ...]
    head: Term
    args: tuple[Term, ...]
    steps: int = 0

    def term(self) -> Term:
        return _wrap(self.binders, apps(self.head, *self.args))


@dataclass(frozen=True)
class Diverged:
    steps: int = 0


@dataclass(frozen=True)
class FuelExhausted:
    steps: int


class ConvergenceModel(DModel):
    """𝒟 with ω read as an ordinary constant (top), so that terms mixing
    in truncation leaves can still be tested for a head normal form."""

    def little_omega(self, ty):
        return self.top(ty)


class Reducer:
    """Head reducer with a 𝒟-model oracle for divergence.

    The oracle decides head-normalizability of closed type-o terms; fuel
    bounds everything else and guards the oracle's positive answers.
    """

    def __init__(
        self,
        fuel: int = DEFAULT_FUEL,
        oracle: DModel | None = None,
        use_oracle: bool = True,
        exhaustion_is_omega: bool = False,
    ):
        self.fuel = fuel
        self.oracle = oracle or ConvergenceModel()
        self.use_oracle = use_oracle
        # for terms the oracle cannot handle: read running out of fuel as Ω
        self.exhaustion_is_omega = exhaustion_is_omega

    def diverges(self, t: Term) -> bool | None:
        """Oracle verdict for closed type-o terms without tagged types,
        None otherwise."""
        if not self.use_oracle or not is_closed(t) or type_of(t) != O or mentions_tags(t):
            return None
        return self.oracle.eval(t) == BOT

    def head_normalize(self, t: Term, fuel: int | None = None):
        if self.diverges(t):
            return Diverged(0)
        budget = self.fuel if fuel is None else fuel
        steps = 0
        binders, body = lambdas(t)
        while True:
            if isinstance(spine(body)[0], Omega):
                return Diverged(steps)
            nxt = _step_body(body)
            if nxt is NoHeadRedex:
                head, args = spine(body)
                return HNF(tuple(binders), head, tuple(args), steps)
            if steps >= budget:
                return FuelExhausted(steps)
            steps += 1
            more, body = lambdas(nxt)
            binders.extend(more)

    def bohm_truncate(self, t: Term, depth: int) -> Tree:
        """BT(t) cut at ``depth``: nodes at that depth become ω leaves."""
        if not is_closed(t) or type_of(t) != O:
            raise ReductionError("bohm_truncate needs a closed term of type o")
        return self._bt(t, depth)

    def _bt(self, t: Term, depth: int) -> Tree:
        if depth == 0:
            return Tree(CUT)
        r = self.head_normalize(t)
        if isinstance(r, Diverged):
            return Tree(OMEGA)
        if isinstance(r, FuelExhausted):
            if self.exhaustion_is_omega:
                return Tree(OMEGA)
            if self.use_oracle and not mentions_tags(t):
                raise ReductionError(f"oracle says {t} converges but {r.steps} head steps did not reach hnf")
            raise ReductionError(f"out of fuel after {r.steps} head steps")
        return self._node(r.head, r.args, depth, self._bt)

    def _node(self, head: Term, args, depth: int, rec) -> Tree:
        if isinstance(head, LittleOmega):
            return Tree(CUT)
        if isinstance(head, Omega):
            return Tree(OMEGA)
        if not isinstance(head, Const):
            raise ReductionError(f"unexpected head {head} in a closed type-o term")
        if len(args) == 0:
            return Tree(head.name, (), head.annotation)
        if len(args) != 2:
            raise ReductionError(f"constant {head.name} applied to {len(args)} arguments")
        return Tree(head.name, tuple(rec(a, depth - 1) for a in args), head.annotation)

    def bracket_truncate(self, t: Term, depth: int) -> Tree | None:
        """Fuel-only truncation; None when some node runs out of fuel.

        A node is Ω only when its head is literally Ω, so this is an
        oracle-free cross-check of ``bohm_truncate``.
        """
        plain = Reducer(self.fuel, use_oracle=False)

        class _Stuck(Exception):
            pass

        def rec(s: Term, d: int) -> Tree:
            if d == 0:
                return Tree(CUT)
            r = plain.head_normalize(s)
            if isinstance(r, Diverged):
                return Tree(OMEGA)
            if isinstance(r, FuelExhausted):
                raise _Stuck
            return plain._node(r.head, r.args, d, rec)

        try:
            return rec(t, depth)
        except _Stuck:
            return None

    def abt(self, t: Term, depth: int) -> Term:
        """Abstract Böhm tree to ``depth``: head-normalize and recurse into
        the arguments; terms without hnf are left unchanged."""
        if depth == 0:
            return t
        r = self.head_normalize(t)
        if not isinstance(r, HNF):
            return t
        args = tuple(self.abt(a, depth - 1) for a in r.args)
        return _wrap(r.binders, apps(r.head, *args))


def head_normalize(t: Term, fuel: int | None = DEFAULT_FUEL, oracle: DModel | None = None):
    return Reducer(DEFAULT_FUEL if fuel is None else fuel, oracle, use_oracle=oracle is not None).head_normalize(t)


def bohm_truncate(t: Term, depth: int, reducer: Reducer | None = None) -> Tree:
    return (reducer or Reducer()).bohm_truncate(t, depth)


def abt(t: Term, depth: int, reducer: Reducer | None = None) -> Term:
    return (reducer or Reducer()).abt(t, depth)


def tree_to_term(tree: Tree) -> Term:
    """Read a finite tree back as a term; ω leaves become ω:o, Ω leaves Ω:o."""
    if tree.label == CUT:
        return LittleOmega(O)
    if tree.label == OMEGA:
        return Omega(O)
    if tree.is_leaf:
        return Const(tree.label, O, tree.annotation)
    left, right = (tree_to_term(c) for c in tree.children)
    return apps(Const(tree.label, BINARY, tree.annotation), left, right)


def one_step_reducts(t: Term) -> list[Term]:
    """All terms reachable by contracting one βδ-redex anywhere in ``t``."""
    out: list[Term] = []
    if isinstance(t, App):
        if isinstance(t.fun, Abs):
            out.append(substitute(t.fun.body, {t.fun.name: t.arg}))
        if isinstance(t.fun, Y):
            out.append(App(t.arg, t))
        for f in one_step_reducts(t.fun):
            out.append(App(f, t.arg))
        for a in one_step_reducts(t.arg):
            out.append(App(t.fun, a))
    elif isinstance(t, Abs):
        out.extend(Abs(t.name, t.var_type, b) for b in one_step_reducts(t.body))
    elif isinstance(t, Case):
        if isinstance(t.scrutinee, Elem):
            out.append(t.branches[t.scrutinee.index])
        out.extend(Case(s, t.branches) for s in one_step_reducts(t.scrutinee))
        for i, b in enumerate(t.branches):
            for nb in one_step_reducts(b):
                out.append(Case(t.scrutinee, t.branches[:i] + (nb,) + t.branches[i + 1 :]))
    return out
