"""The divergence model D and the composite model K(Q, Q_Ω).

D interprets every type over the two-point lattice with least fixpoints;
a closed ω-free term of type o is ⊥ in D exactly when it has no head
normal form.

K sits inside the product of D and the powerset model.  Each K-element
carries a unique D-projection (``bar``), and D embeds back into K as the
greatest element of each projection class (``uparrow``).  Y is
interpreted by ``fix``: start from the lift of the least D-fixpoint and
iterate the function downwards until it stabilizes.
"""

from __future__ import annotations

import itertools
from typing import Iterable

from lamy.automata import TacAutomaton, Verdict
from lamy.domains import (
    DEFAULT_CAP,
    FinPoset,
    Model,
    Value,
    antichain,
    chain,
    constant_table,
    enumerate_monotone,
    kleene_lfp,
    pointwise_leq,
)
from lamy.gfp import CheckResult, format_set
from lamy.syntax import (
    Arrow,
    Const,
    LittleOmega,
    O,
    SemTag,
    SimpleType,
    Term,
    contains,
    is_closed,
    type_of,
)

BOT, TOP = 0, 1


class KModelError(Exception):
    """An internal invariant of the K construction failed."""


class DModel(Model):
    """Two-point model: constants are top, ω and Ω are bottom, Y is lfp.

    Tagged types [α] are read as discrete sets of ``size`` points so that
    reflected terms can be tested for divergence too.
    """

    name = "D"

    def base_domain(self) -> FinPoset:
        return chain(2, name="D0")

    def tag_domain(self, ty: SemTag) -> FinPoset:
        return antichain(ty.size, name=str(ty))

    def constant(self, c: Const) -> Value:
        return self.top(c.type)

    def little_omega(self, ty: SimpleType) -> Value:
        return self.bottom(ty)

    def big_omega(self, ty: SimpleType) -> Value:
        return self.bottom(ty)

    def fix(self, ty: SimpleType, f: tuple) -> Value:
        return kleene_lfp(f, self.domain(ty))

    def format_value(self, v: Value, ty: SimpleType) -> str:
        if ty == O:
            return "⊤" if v == TOP else "⊥"
        return super().format_value(v, ty)


def divergence_check(t: Term, d: DModel | None = None) -> bool:
    """True iff the closed ω-free type-o term ``t`` has no head normal form."""
    if not is_closed(t) or type_of(t) != O:
        raise ValueError("divergence_check needs a closed term of type o")
    if contains(t, LittleOmega):
        raise ValueError("divergence_check needs an omega-free term")
    d = d or DModel()
    return d.eval(t) == BOT


def format_k0(v) -> str:
    d, p = v
    return f"({'⊤' if d == TOP else '⊥'}, {format_set(p)})"


class KModel(Model):
    """K(Q, Q_Ω) with constants interpreted from ``leaf`` and ``step`` maps.

    ``leaf[c]`` is the state set of a nullary constant, ``step[a]`` maps a
    pair of state sets to a state set.
    """

    name = "K"

    def __init__(
        self,
        states: Iterable[str],
        omega_states: Iterable[str],
        leaf: dict[str, frozenset] | None = None,
        step: dict[str, object] | None = None,
        cap: int = DEFAULT_CAP,
    ):
        super().__init__(cap)
        self.states = tuple(states)
        self.q = frozenset(self.states)
        self.q_omega = frozenset(omega_states)
        if not self.q_omega <= self.q:
            raise ValueError("Q_Omega must be a subset of Q")
        self.d = DModel(cap)
        self.leaf = dict(leaf or {})
        self.step = dict(step or {})
        self._bar: dict[SimpleType, dict[Value, Value]] = {}
        self._up: dict[SimpleType, dict[Value, Value]] = {}
        self._rho: dict[str, Value] = {}
        self.fix_steps = 0

    # --- domains -----------------------------------------------------------
    def base_domain(self) -> FinPoset:
        subsets = [
            frozenset(c)
            for n in range(len(self.states) + 1)
            for c in itertools.combinations(self.states, n)
        ]
        els = [(BOT, self.q_omega)] + [(TOP, s) for s in subsets]

        def leq(a, b):
            return a[0] <= b[0] and a[1] <= b[1]

        def join(a, b):
            return (max(a[0], b[0]), a[1] | b[1])

        def meet(a, b):
            m = (min(a[0], b[0]), a[1] & b[1])
            if m[0] == BOT:
                # only (⊥, Q_Ω) has first component ⊥
                return (BOT, self.q_omega) if self.q_omega <= m[1] else None
            return m

        return FinPoset(els, leq, join=join, meet=meet, name="K0")

    def arrow_domain(self, ty: Arrow) -> FinPoset:
        dom = self.domain(ty.dom)
        cod = self.domain(ty.cod)
        d_dom = self.d.domain(ty.dom)
        d_cod = self.d.domain(ty.cod)
        dom_class = [d_dom.index[self.bar(g, ty.dom)] for g in dom.elements]
        cod_class = [d_cod.index[self.bar(v, ty.cod)] for v in cod.elements]
        tables = enumerate_monotone(
            dom, cod, self.cap, classes=(dom_class, cod_class), what=f"K_{{{ty}}}"
        )

        def join(f, g):
            return tuple(cod.join(a, b) for a, b in zip(f, g))

        return FinPoset(tables, pointwise_leq(cod), join=join, name=f"K_{{{ty}}}")

    # --- projection and embedding -------------------------------------------
    def bar(self, v: Value, ty: SimpleType) -> Value:
        """The unique D-element related to the K-element ``v``."""
        if not isinstance(ty, Arrow):
            return v[0]
        memo = self._bar.setdefault(ty, {})
        hit = memo.get(v)
        if hit is not None:
            return hit
        kdom = self.domain(ty.dom)
        out = tuple(
            self.bar(v[kdom.index[self.uparrow(e, ty.dom)]], ty.cod)
            for e in self.d.domain(ty.dom).elements
        )
        memo[v] = out
        return out

    def uparrow(self, h: Value, ty: SimpleType) -> Value:
        """The greatest K-element whose projection is ``h``."""
        if not isinstance(ty, Arrow):
            return (BOT, self.q_omega) if h == BOT else (TOP, self.q)
        memo = self._up.setdefault(ty, {})
        hit = memo.get(h)
        if hit is not None:
            return hit
        ddom = self.d.domain(ty.dom)
        out = tuple(
            self.uparrow(h[ddom.index[self.bar(g, ty.dom)]], ty.cod)
            for g in self.domain(ty.dom).elements
        )
        memo[h] = out
        return out

    def bot_hat(self, ty: SimpleType) -> Value:
        """The minimal element ⊥̂: constantly (⊥, Q_Ω)."""
        if isinstance(ty, Arrow):
            return constant_table(self.domain(ty.dom), self.bot_hat(ty.cod))
        return (BOT, self.q_omega)

    def top(self, ty: SimpleType) -> Value:
        if isinstance(ty, Arrow):
            return constant_table(self.domain(ty.dom), self.top(ty.cod))
        return (TOP, self.q)

    def is_member(self, v: Value, ty: SimpleType) -> bool:
        """Membership in K_ty without enumerating K_ty."""
        if not isinstance(ty, Arrow):
            return v in self.domain(ty).index
        dom = self.domain(ty.dom)
        if not isinstance(v, tuple) or len(v) != len(dom):
            return False
        if not all(self.is_member(x, ty.cod) for x in v):
            return False
        for hi, los in enumerate(dom.lower_covers):
            for lo in los:
                if not self.leq(ty.cod, v[lo], v[hi]):
                    return False
        seen: dict[Value, Value] = {}
        for g, fg in zip(dom.elements, v):
            e = self.bar(g, ty.dom)
            b = self.bar(fg, ty.cod)
            if seen.setdefault(e, b) != b:
                return False
        return True

    # --- interpretation ------------------------------------------------------
    def constant(self, c: Const) -> Value:
        hit = self._rho.get(c.name)
        if hit is not None:
            return hit
        if c.name in self.leaf:
            v = (TOP, frozenset(self.leaf[c.name]))
        elif c.name in self.step:
            base = self.domain(O).elements
            fn = self.step[c.name]
            v = tuple(tuple((TOP, frozenset(fn(p1[1], p2[1]))) for p2 in base) for p1 in base)
        else:
            raise KModelError(f"no interpretation for constant {c.name}")
        self._rho[c.name] = v
        return v

    def little_omega(self, ty: SimpleType) -> Value:
        return self.top(ty)

    def big_omega(self, ty: SimpleType) -> Value:
        return self.bot_hat(ty)

    def fix(self, ty: SimpleType, f: tuple) -> Value:
        """Iterate ``f`` down from the lift of the least fixpoint of ``bar f``."""
        fty = Arrow(ty, ty)
        if not self.is_member(f, fty):
            raise KModelError(f"argument of Y at {ty} is not in K")
        dom = self.domain(ty)
        x = self.uparrow(kleene_lfp(self.bar(f, fty), self.d.domain(ty)), ty)
        for _ in range(len(dom) + 1):
            nxt = f[dom.index[x]]
            self.fix_steps += 1
            if nxt == x:
                return x
            if not self.leq(ty, nxt, x):
                raise KModelError("fixpoint iteration is not decreasing")
            x = nxt
        raise KModelError("fixpoint iteration did not stabilize")

    def format_value(self, v: Value, ty: SimpleType) -> str:
        if ty == O:
            return format_k0(v)
        return super().format_value(v, ty)

    def eval(self, t: Term, env=None) -> Value:
        v = super().eval(t, env)
        if is_closed(t) and not self.is_member(v, type_of(t)):
            raise KModelError(f"value of {t} escaped K")
        return v


class AutomatonKModel(KModel):
    """K(Q, Q_Ω) with the constant interpretation of a TAC automaton."""

    def __init__(self, aut: TacAutomaton, cap: int = DEFAULT_CAP):
        self.automaton = aut
        leaf = {c: aut.leaf_states(c) for c in aut.leaves}
        step = {a: (lambda r1, r2, a=a: aut.step(a, r1, r2)) for a in aut.binaries}
        super().__init__(aut.states, aut.omega_states, leaf, step, cap)

    def accepting(self, v) -> bool:
        return self.automaton.init in v[1]


def build_k_model(aut: TacAutomaton, cap: int = DEFAULT_CAP) -> AutomatonKModel:
    return AutomatonKModel(aut, cap)


def k_check(aut_or_model, t: Term) -> CheckResult:
    """Accepted iff the initial state is in the second component of [[t]]_K."""
    m = aut_or_model if isinstance(aut_or_model, AutomatonKModel) else build_k_model(aut_or_model)
    if not is_closed(t) or type_of(t) != O:
        raise ValueError("k_check needs a closed term of type o")
    v = m.eval(t)
    verdict = Verdict.ACCEPTED if m.accepting(v) else Verdict.REJECTED
    return CheckResult(verdict, v, format_k0(v))


def costep(dom: FinPoset, cod_top: Value, p: Value, q: Value) -> tuple:
    """The co-step function p ↘ q: q below p, top elsewhere."""
    return tuple(q if dom.leq(r, p) else cod_top for r in dom.elements)


def uparrow_by_costeps(m: KModel, h: tuple, ty: Arrow) -> tuple:
    """h↑ as the meet of the co-step functions ⋁L_d ↘ ⋁L_{h(d)} (test oracle).

    ⋁L_d is computed by brute force over the enumerated K_α, and the meet
    pointwise in K_β as the join of common lower bounds.
    """
    kdom = m.domain(ty.dom)
    kcod = m.domain(ty.cod)
    ddom = m.d.domain(ty.dom)

    def join_class(poset: FinPoset, t: SimpleType, d: Value) -> Value:
        members = [p for p in poset.elements if m.bar(p, t) == d]
        out = members[0]
        for p in members[1:]:
            out = poset.join(out, p)
        return out

    steps = [
        costep(kdom, m.top(ty.cod), join_class(kdom, ty.dom, d), join_class(kcod, ty.cod, h[i]))
        for i, d in enumerate(ddom.elements)
    ]
    result = []
    for j in range(len(kdom)):
        acc = steps[0][j]
        for s in steps[1:]:
            acc = kcod.glb(acc, s[j])
            if acc is None:
                raise KModelError("co-step meet does not exist")
        result.append(acc)
    return tuple(result)


def k_base(states: Iterable[str], omega_states: Iterable[str]) -> FinPoset:
    """K_o for the given Q and Q_Ω, with no constants interpreted."""
    return KModel(states, omega_states).domain(O)


def fix_k(m: KModel, ty: SimpleType, f: tuple) -> Value:
    """Fix at ``ty`` of the element ``f`` of K_{ty→ty}."""
    return m.fix(ty, f)
