"""Tree automata with trivial acceptance conditions (TAC automata)."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Mapping

from lamy.syntax import Signature
from lamy.trees import CUT, OMEGA, Tree


class AutomatonError(Exception):
    pass


class CutPolicy(enum.Enum):
    ACCEPT = "accept"
    REJECT = "reject"


@dataclass(frozen=True)
class TacAutomaton:
    states: tuple[str, ...]
    init: str
    leaves: tuple[str, ...]
    binaries: tuple[str, ...]
    delta0: Mapping[tuple[str, str], bool]
    delta2: Mapping[tuple[str, str], frozenset[tuple[str, str]]] = field(default_factory=dict)

    def __post_init__(self):
        if self.init not in self.states:
            raise AutomatonError(f"initial state {self.init} is not a state")
        if len(set(self.states)) != len(self.states):
            raise AutomatonError("duplicate states")
        for q in self.states:
            for c in self.leaves + (OMEGA,):
                if (q, c) not in self.delta0:
                    raise AutomatonError(f"delta0 undefined on ({q}, {c})")
            for a in self.binaries:
                if (q, a) not in self.delta2:
                    raise AutomatonError(f"delta2 undefined on ({q}, {a})")
                for p1, p2 in self.delta2[(q, a)]:
                    if p1 not in self.states or p2 not in self.states:
                        raise AutomatonError(f"delta2({q}, {a}) mentions an unknown state")
        object.__setattr__(self, "delta0", dict(self.delta0))
        object.__setattr__(self, "delta2", {k: frozenset(v) for k, v in self.delta2.items()})

    def __hash__(self):
        return hash((self.states, self.init, self.leaves, self.binaries))

    @property
    def omega_blind(self) -> bool:
        return all(self.delta0[(q, OMEGA)] for q in self.states)

    @property
    def omega_states(self) -> frozenset[str]:
        """States accepting Ω."""
        return frozenset(q for q in self.states if self.delta0[(q, OMEGA)])

    def leaf_states(self, label: str) -> frozenset[str]:
        if label != OMEGA and label not in self.leaves:
            raise AutomatonError(f"unknown leaf label {label}")
        return frozenset(q for q in self.states if self.delta0[(q, label)])

    def step(self, a: str, left: frozenset[str], right: frozenset[str]) -> frozenset[str]:
        """States with a transition on ``a`` into ``left × right``."""
        if a not in self.binaries:
            raise AutomatonError(f"unknown binary label {a}")
        return frozenset(
            q for q in self.states if any(p1 in left and p2 in right for p1, p2 in self.delta2[(q, a)])
        )

    def with_init(self, q: str) -> "TacAutomaton":
        return TacAutomaton(self.states, q, self.leaves, self.binaries, self.delta0, self.delta2)

    def blind(self) -> "TacAutomaton":
        """The Ω-blind variant: Ω accepted from every state."""
        d0 = dict(self.delta0)
        for q in self.states:
            d0[(q, OMEGA)] = True
        return TacAutomaton(self.states, self.init, self.leaves, self.binaries, d0, self.delta2)

    def to_text(self) -> str:
        lines = ["states " + " ".join(self.states), f"init {self.init}"]
        for q in self.states:
            for c in self.leaves + (OMEGA,):
                lines.append(f"leaf {q} {c} {'true' if self.delta0[(q, c)] else 'false'}")
            for a in self.binaries:
                pairs = " ".join(f"({p1},{p2})" for p1, p2 in sorted(self.delta2[(q, a)]))
                lines.append(f"bin {q} {a} -> {pairs}".rstrip())
        return "\n".join(lines) + "\n"


def accept_states(aut: TacAutomaton, tree: Tree, policy: CutPolicy = CutPolicy.ACCEPT) -> frozenset[str]:
    """States from which an accepting run on the finite ``tree`` exists."""
    if tree.is_leaf:
        if tree.label == CUT:
            return frozenset(aut.states) if policy is CutPolicy.ACCEPT else frozenset()
        return aut.leaf_states(tree.label)
    left = accept_states(aut, tree.children[0], policy)
    right = accept_states(aut, tree.children[1], policy)
    return aut.step(tree.label, left, right)


def accepts_tree(aut: TacAutomaton, tree: Tree) -> bool:
    """Exact acceptance of a cut-free finite tree."""
    if tree.has_cuts():
        raise AutomatonError("exact acceptance needs a tree without cut leaves")
    return aut.init in accept_states(aut, tree, CutPolicy.REJECT)


class Verdict(enum.Enum):
    ACCEPTED = "Accepted"
    REJECTED = "Rejected"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class BracketResult:
    verdict: Verdict
    depth: int


def accepts_bt(aut: TacAutomaton, term, max_depth: int, reducer=None) -> BracketResult:
    """Bracket acceptance of BT(term) by its finite truncations.

    Accepted once a cut-free prefix is accepted exactly; Rejected once the
    initial state is lost even with cut leaves accepting; otherwise Unknown.
    """
    from lamy.reduction import Reducer

    reducer = reducer or Reducer()
    for k in range(1, max_depth + 1):
        tree = reducer.bohm_truncate(term, k)
        if aut.init not in accept_states(aut, tree, CutPolicy.ACCEPT):
            return BracketResult(Verdict.REJECTED, k)
        if not tree.has_cuts():
            # a cut-free prefix is the whole tree
            ok = aut.init in accept_states(aut, tree, CutPolicy.REJECT)
            return BracketResult(Verdict.ACCEPTED if ok else Verdict.REJECTED, k)
    return BracketResult(Verdict.UNKNOWN, max_depth)


# ---------------------------------------------------------------------------
# Example automata


def _check_tree_sig(sig: Signature):
    if not sig.tree_signature:
        raise AutomatonError("example automata need a tree signature")


def no_omega(sig: Signature) -> TacAutomaton:
    """Trees without Ω: one state, every letter allowed except Ω."""
    _check_tree_sig(sig)
    q = "q"
    d0 = {(q, c): True for c in sig.leaves}
    d0[(q, OMEGA)] = False
    d2 = {(q, a): {(q, q)} for a in sig.binaries}
    return TacAutomaton((q,), q, tuple(sig.leaves), tuple(sig.binaries), d0, d2)


def has_hnf(sig: Signature) -> TacAutomaton:
    """Terms with a head normal form: the root must not be Ω."""
    _check_tree_sig(sig)
    q, top = "q", "q_top"
    d0 = {}
    d2 = {}
    for c in sig.leaves:
        d0[(q, c)] = True
        d0[(top, c)] = True
    d0[(q, OMEGA)] = False
    d0[(top, OMEGA)] = True
    for a in sig.binaries:
        d2[(q, a)] = {(top, top)}
        d2[(top, a)] = {(top, top)}
    return TacAutomaton((q, top), q, tuple(sig.leaves), tuple(sig.binaries), d0, d2)


def err_before_omega(sig: Signature, err: str = "err") -> TacAutomaton:
    """Every Ω lies below an occurrence of the binary constant ``err``."""
    _check_tree_sig(sig)
    if err not in sig.binaries:
        raise AutomatonError(f"signature must declare a binary constant {err!r}")
    q, top = "q", "q_top"
    d0 = {}
    d2 = {}
    for c in sig.leaves:
        d0[(q, c)] = True
        d0[(top, c)] = True
    d0[(q, OMEGA)] = False
    d0[(top, OMEGA)] = True
    for a in sig.binaries:
        d2[(q, a)] = {(top, top)} if a == err else {(q, q)}
        d2[(top, a)] = {(top, top)}
    return TacAutomaton((q, top), q, tuple(sig.leaves), tuple(sig.binaries), d0, d2)


EXAMPLES = {"no-omega": no_omega, "has-hnf": has_hnf, "err-before-omega": err_before_omega}


def example_automaton(which: str, sig: Signature) -> TacAutomaton:
    try:
        return EXAMPLES[which](sig)
    except KeyError:
        raise AutomatonError(f"unknown example automaton {which!r}") from None


# ---------------------------------------------------------------------------
# Text format

_PAIR = re.compile(r"\(\s*([^,()\s]+)\s*,\s*([^,()\s]+)\s*\)")


def parse_automaton(text: str, sig: Signature | None = None, total_default: bool = False) -> TacAutomaton:
    """Parse the line-oriented automaton format.

    Labels are taken from ``sig`` when given, otherwise from the lines.
    Missing entries are an error unless ``total_default`` is set.
    """
    states: list[str] = []
    init = None
    d0: dict[tuple[str, str], bool] = {}
    d2: dict[tuple[str, str], set[tuple[str, str]]] = {}
    leaves: list[str] = []
    binaries: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        kw = words[0]
        try:
            if kw == "states":
                states.extend(words[1:])
            elif kw == "init":
                (init,) = words[1:]
            elif kw == "leaf":
                q, c, val = words[1:]
                if val not in ("true", "false"):
                    raise ValueError(val)
                d0[(q, c)] = val == "true"
                if c != OMEGA and c not in leaves:
                    leaves.append(c)
            elif kw == "bin":
                q, a = words[1], words[2]
                rest = line.split("->", 1)[1] if "->" in line else ""
                pairs = {(m.group(1), m.group(2)) for m in _PAIR.finditer(rest)}
                d2.setdefault((q, a), set()).update(pairs)
                if a not in binaries:
                    binaries.append(a)
            else:
                raise ValueError(kw)
        except ValueError:
            raise AutomatonError(f"line {lineno}: cannot parse {raw.strip()!r}") from None
    if init is None:
        raise AutomatonError("missing 'init' line")
    if sig is not None:
        leaves = sig.leaves
        binaries = sig.binaries
    for q in states:
        for c in list(leaves) + [OMEGA]:
            if (q, c) not in d0:
                if not total_default:
                    raise AutomatonError(f"no 'leaf {q} {c}' line (use --total-default)")
                d0[(q, c)] = False
        for a in binaries:
            if (q, a) not in d2:
                if not total_default:
                    raise AutomatonError(f"no 'bin {q} {a}' line (use --total-default)")
                d2[(q, a)] = set()
    d0 = {k: v for k, v in d0.items() if k[1] in leaves or k[1] == OMEGA}
    d2 = {k: v for k, v in d2.items() if k[1] in binaries}
    return TacAutomaton(tuple(states), init, tuple(leaves), tuple(binaries), d0, d2)
