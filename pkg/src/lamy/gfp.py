"""GFP models: finite lattices, Y as greatest fixpoint, ω and Ω as top.

``build_gfp`` turns a TAC automaton into the powerset model that
recognizes its language when the automaton is Ω-blind; ``dual_automata``
goes the other way, from any GFP model to the family A_p.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from typing import Mapping

from lamy.automata import TacAutomaton, Verdict
from lamy.domains import DEFAULT_CAP, FinPoset, Model, Value, kleene_gfp
from lamy.syntax import O, Const, SimpleType, Term, is_closed, type_of
from lamy.trees import OMEGA


class GfpWarning(UserWarning):
    pass


def powerset_lattice(states: tuple[str, ...]) -> FinPoset:
    subsets = [
        frozenset(c)
        for n in range(len(states) + 1)
        for c in itertools.combinations(states, n)
    ]
    return FinPoset(
        subsets,
        lambda a, b: a <= b,
        join=lambda a, b: a | b,
        meet=lambda a, b: a & b,
        name="P(Q)",
    )


def format_set(s) -> str:
    return "{" + ", ".join(sorted(s)) + "}"


class GfpModel(Model):
    """A GFP model over a finite lattice ``base`` with constant table ``rho``."""

    name = "gfp"

    def __init__(
        self,
        base: FinPoset,
        rho: Mapping[str, Value],
        binaries: tuple[str, ...] = (),
        cap: int = DEFAULT_CAP,
    ):
        super().__init__(cap)
        if base.top is None or base.bottom is None:
            raise ValueError("the base of a GFP model must be a lattice")
        self._base = base
        self.rho = dict(rho)
        self.binaries = tuple(sorted(binaries))
        self.leaves = tuple(sorted(n for n in self.rho if n not in self.binaries))

    def base_domain(self) -> FinPoset:
        return self._base

    def constant(self, c: Const) -> Value:
        return self.rho[c.name]

    def little_omega(self, ty: SimpleType) -> Value:
        return self.top(ty)

    def big_omega(self, ty: SimpleType) -> Value:
        return self.top(ty)

    def fix(self, ty: SimpleType, f: tuple) -> Value:
        return kleene_gfp(f, self.domain(ty))

    def format_value(self, v: Value, ty: SimpleType) -> str:
        if ty == O and isinstance(v, frozenset):
            return format_set(v)
        return super().format_value(v, ty)


class AutomatonGfpModel(GfpModel):
    def __init__(self, aut: TacAutomaton, cap: int = DEFAULT_CAP):
        self.automaton = aut
        base = powerset_lattice(aut.states)
        rho: dict[str, Value] = {}
        for c in aut.leaves:
            rho[c] = aut.leaf_states(c)
        for a in aut.binaries:
            rho[a] = tuple(tuple(aut.step(a, s0, s1) for s1 in base.elements) for s0 in base.elements)
        super().__init__(base, rho, aut.binaries, cap)

    def accepting(self, value: frozenset) -> bool:
        return self.automaton.init in value


def build_gfp(aut: TacAutomaton, cap: int = DEFAULT_CAP) -> AutomatonGfpModel:
    return AutomatonGfpModel(aut, cap)


@dataclass(frozen=True)
class CheckResult:
    verdict: Verdict
    value: Value
    text: str

    @property
    def accepted(self) -> bool:
        return self.verdict is Verdict.ACCEPTED


def _closed_o(t: Term):
    if not is_closed(t):
        raise ValueError("term must be closed")
    if type_of(t) != O:
        raise ValueError(f"term must have type o, not {type_of(t)}")


def gfp_check(m: AutomatonGfpModel, t: Term) -> CheckResult:
    """Accepted iff the initial state lies in the value of ``t``."""
    _closed_o(t)
    if not m.automaton.omega_blind:
        warnings.warn(
            "GFP verdicts are only guaranteed for Omega-blind automata", GfpWarning, stacklevel=2
        )
    v = m.eval(t)
    verdict = Verdict.ACCEPTED if m.accepting(v) else Verdict.REJECTED
    return CheckResult(verdict, v, format_set(v))


def dual_automata(m: GfpModel) -> dict[Value, TacAutomaton]:
    """The automata A_p, one per base element p, with states the base elements.

    A_p accepts BT(M) exactly when p <= [[M]] (for Böhm trees the model
    evaluates consistently with).
    """
    base = m.base_domain()
    names = {e: f"s{i}" for i, e in enumerate(base.elements)}
    leaves, binaries = m.leaves, m.binaries
    states = tuple(names[e] for e in base.elements)
    d0: dict[tuple[str, str], bool] = {}
    d2: dict[tuple[str, str], set] = {}
    top = base.top
    for q in base.elements:
        for c in leaves:
            d0[(names[q], c)] = base.leq(q, m.rho[c])
        d0[(names[q], OMEGA)] = base.leq(q, top)
        for a in binaries:
            table = m.rho[a]
            d2[(names[q], a)] = {
                (names[q1], names[q2])
                for i, q1 in enumerate(base.elements)
                for j, q2 in enumerate(base.elements)
                if base.leq(q, table[i][j])
            }
    return {
        p: TacAutomaton(states, names[p], leaves, binaries, d0, d2) for p in base.elements
    }


def state_name(m: GfpModel, p: Value) -> str:
    return f"s{m.base_domain().index[p]}"


def recognized_by_point(m: GfpModel, p: Value, t: Term) -> bool:
    """True iff ``t`` evaluates exactly to the base element ``p``."""
    _closed_o(t)
    return m.eval(t) == p
