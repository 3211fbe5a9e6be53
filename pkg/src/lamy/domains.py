"""Finite posets, monotone function spaces and model-generic evaluation.

Semantic values are plain hashable Python objects.  A value at an arrow
type α→β is a tuple indexed by the canonical enumeration of the domain at
α, so equality of values is extensional table equality.
"""

from __future__ import annotations

import threading
from typing import Any, Callable, Hashable, Iterable, Sequence

from lamy.syntax import (
    Abs,
    App,
    Arrow,
    Case,
    Const,
    Elem,
    LittleOmega,
    Omega,
    SemTag,
    SimpleType,
    Term,
    Var,
    Y,
    type_of,
)

Value = Hashable

DEFAULT_CAP = 2_000_000


class SpaceTooLarge(Exception):
    def __init__(self, what: str, bound: int):
        self.bound = bound
        super().__init__(f"{what} has more than {bound} elements")


class EvaluationError(Exception):
    pass


class FinPoset:
    """A finite poset whose element list is a linear extension of ``leq``."""

    def __init__(
        self,
        elements: Iterable[Value],
        leq: Callable[[Value, Value], bool],
        *,
        join: Callable[[Value, Value], Value] | None = None,
        meet: Callable[[Value, Value], Value | None] | None = None,
        name: str = "",
        check: bool = False,
    ):
        self.elements: list[Value] = list(elements)
        self.index: dict[Value, int] = {e: i for i, e in enumerate(self.elements)}
        if len(self.index) != len(self.elements):
            raise ValueError(f"duplicate elements in poset {name}")
        self._leq = leq
        self._join = join
        self._meet = meet
        self.name = name
        self._up: list[int] | None = None
        self._covers: list[list[int]] | None = None
        if check:
            self.validate()

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, v: Value) -> bool:
        return v in self.index

    def leq(self, a: Value, b: Value) -> bool:
        return self._leq(a, b)

    @property
    def up(self) -> list[int]:
        """Bitset of indices above each element (reflexive)."""
        if self._up is None:
            els = self.elements
            ups = []
            for i, a in enumerate(els):
                mask = 0
                for j in range(i, len(els)):
                    if self._leq(a, els[j]):
                        mask |= 1 << j
                ups.append(mask)
            self._up = ups
        return self._up

    def leq_idx(self, i: int, j: int) -> bool:
        return bool(self.up[i] >> j & 1)

    @property
    def lower_covers(self) -> list[list[int]]:
        """For each index, the indices it covers (Hasse predecessors)."""
        if self._covers is None:
            up = self.up
            n = len(self.elements)
            covers: list[list[int]] = [[] for _ in range(n)]
            for i in range(n):
                above = up[i] & ~(1 << i)
                j = above
                while j:
                    k = (j & -j).bit_length() - 1
                    j &= j - 1
                    # k covers i unless some m strictly between
                    between = above & ~(1 << k)
                    m = between
                    direct = True
                    while m:
                        b = (m & -m).bit_length() - 1
                        m &= m - 1
                        if up[b] >> k & 1:
                            direct = False
                            break
                    if direct:
                        covers[k].append(i)
            self._covers = covers
        return self._covers

    def hasse_edges(self) -> list[tuple[int, int]]:
        return sorted((lo, hi) for hi, los in enumerate(self.lower_covers) for lo in los)

    @property
    def top(self) -> Value | None:
        if not self.elements:
            return None
        cand = self.elements[-1]
        return cand if all(self._leq(e, cand) for e in self.elements) else None

    @property
    def bottom(self) -> Value | None:
        if not self.elements:
            return None
        cand = self.elements[0]
        return cand if all(self._leq(cand, e) for e in self.elements) else None

    def maximal(self) -> list[Value]:
        return [e for e in self.elements if not any(self._leq(e, f) and e != f for f in self.elements)]

    def minimal(self) -> list[Value]:
        return [e for e in self.elements if not any(self._leq(f, e) and e != f for f in self.elements)]

    def join(self, a: Value, b: Value) -> Value | None:
        if self._join is not None:
            return self._join(a, b)
        ups = [e for e in self.elements if self._leq(a, e) and self._leq(b, e)]
        least = [e for e in ups if all(self._leq(e, f) for f in ups)]
        return least[0] if least else None

    def meet(self, a: Value, b: Value) -> Value | None:
        if self._meet is not None:
            return self._meet(a, b)
        return self.glb(a, b)

    def glb(self, a: Value, b: Value) -> Value | None:
        """Greatest lower bound by search; ``None`` when none exists."""
        downs = [e for e in self.elements if self._leq(e, a) and self._leq(e, b)]
        greatest = [e for e in downs if all(self._leq(f, e) for f in downs)]
        return greatest[0] if greatest else None

    def validate(self) -> None:
        els = self.elements
        for i, a in enumerate(els):
            if not self._leq(a, a):
                raise ValueError(f"{self.name}: leq not reflexive at {a!r}")
            for j, b in enumerate(els):
                if i != j and self._leq(a, b):
                    if self._leq(b, a):
                        raise ValueError(f"{self.name}: leq not antisymmetric")
                    if j < i:
                        raise ValueError(f"{self.name}: element order is not a linear extension")
                    for c in els:
                        if self._leq(b, c) and not self._leq(a, c):
                            raise ValueError(f"{self.name}: leq not transitive")
        if self._join is not None:
            for a in els:
                for b in els:
                    j = self._join(a, b)
                    if j != self.join_by_search(a, b):
                        raise ValueError(f"{self.name}: join table is not the least upper bound")

    def join_by_search(self, a: Value, b: Value) -> Value | None:
        ups = [e for e in self.elements if self._leq(a, e) and self._leq(b, e)]
        least = [e for e in ups if all(self._leq(e, f) for f in ups)]
        return least[0] if least else None


def chain(n: int, name: str = "") -> FinPoset:
    """The chain 0 < 1 < ... < n-1."""
    return FinPoset(range(n), lambda a, b: a <= b, join=max, meet=min, name=name or f"chain{n}")


def antichain(n: int, name: str = "") -> FinPoset:
    return FinPoset(range(n), lambda a, b: a == b, name=name or f"antichain{n}")


def pointwise_leq(cod: FinPoset) -> Callable[[tuple, tuple], bool]:
    def leq(f: tuple, g: tuple) -> bool:
        if f == g:
            return True
        for a, b in zip(f, g):
            if a != b and not cod.leq(a, b):
                return False
        return True

    return leq


def enumerate_monotone(
    dom: FinPoset,
    cod: FinPoset,
    cap: int = DEFAULT_CAP,
    classes: tuple[Sequence[int], Sequence[int]] | None = None,
    what: str = "monotone space",
) -> list[tuple]:
    """All monotone tables ``dom -> cod`` in lexicographic order.

    With ``classes=(dom_class, cod_class)`` only tables mapping each
    domain class into a single codomain class are produced.
    """
    n = len(dom)
    covers = dom.lower_covers
    up = cod.up
    full = (1 << len(cod)) - 1
    cod_els = cod.elements
    out: list[tuple] = []
    choice = [0] * n
    dom_class, cod_class = classes if classes else (None, None)
    assigned: dict[int, int] = {}
    class_count: dict[int, int] = {}

    def rec(i: int):
        if i == n:
            out.append(tuple(cod_els[c] for c in choice))
            if len(out) > cap:
                raise SpaceTooLarge(what, cap)
            return
        mask = full
        for j in covers[i]:
            mask &= up[choice[j]]
        dc = dom_class[i] if dom_class is not None else None
        while mask:
            v = (mask & -mask).bit_length() - 1
            mask &= mask - 1
            if dc is not None:
                want = assigned.get(dc)
                cc = cod_class[v]
                if want is not None and want != cc:
                    continue
                if want is None:
                    assigned[dc] = cc
                class_count[dc] = class_count.get(dc, 0) + 1
                choice[i] = v
                rec(i + 1)
                class_count[dc] -= 1
                if class_count[dc] == 0:
                    del assigned[dc]
            else:
                choice[i] = v
                rec(i + 1)

    rec(0)
    return out


def iter_monotone_index_arrays(
    dom: FinPoset,
    cod: FinPoset,
    classes: tuple[Sequence[int], Sequence[int]] | None = None,
    chunk: int = 1_000_000,
    allowed=None,
):
    """Same tables as ``enumerate_monotone``, yielded as ``(k, |dom|)``
    arrays of codomain indices with ``k <= chunk``, in lexicographic order.

    Built breadth-first with numpy and split whenever a frontier grows
    past ``chunk`` rows, so memory stays bounded however large the space.
    ``allowed`` is an optional ``(|dom|, |cod|)`` boolean mask restricting
    the value at each point.
    """
    import numpy as np

    n, m = len(dom), len(cod)
    leq = np.zeros((m, m), dtype=bool)
    for i in range(m):
        for j in range(m):
            leq[i, j] = cod.leq_idx(i, j)
    cod_class = np.asarray(classes[1]) if classes else None
    dom_class = list(classes[0]) if classes else None
    covers = dom.lower_covers
    # an earlier point of the same class fixes the codomain class
    first_same = [
        next((j for j in range(i) if dom_class[j] == dom_class[i]), None) if dom_class else None
        for i in range(n)
    ]
    step = max(1, chunk // m)

    def extend(rows, i):
        ok = np.ones((len(rows), m), dtype=bool)
        if allowed is not None:
            ok &= np.asarray(allowed[i], dtype=bool)[None, :]
        for j in covers[i]:
            ok &= leq[rows[:, j]]
        if first_same[i] is not None:
            want = cod_class[rows[:, first_same[i]]]
            ok &= cod_class[None, :] == want[:, None]
        r, v = np.nonzero(ok)
        return np.concatenate([rows[r], v[:, None].astype(np.int16)], axis=1)

    def walk(rows, i):
        if i == n:
            yield rows
            return
        for s in range(0, len(rows), step):
            nxt = extend(rows[s : s + step], i)
            if len(nxt):
                yield from walk(nxt, i + 1)

    pending = []
    size = 0
    for block in walk(np.zeros((1, 0), dtype=np.int16), 0):
        pending.append(block)
        size += len(block)
        if size >= chunk:
            yield np.concatenate(pending)
            pending, size = [], 0
    if pending:
        yield np.concatenate(pending)


def monotone_index_array(
    dom: FinPoset,
    cod: FinPoset,
    classes: tuple[Sequence[int], Sequence[int]] | None = None,
    max_rows: int = 50_000_000,
):
    """All of ``iter_monotone_index_arrays`` as one array; raises
    SpaceTooLarge past ``max_rows`` tables."""
    import numpy as np

    parts = []
    total = 0
    for block in iter_monotone_index_arrays(dom, cod, classes):
        total += len(block)
        if total > max_rows:
            raise SpaceTooLarge(f"monotone array over {dom.name}", max_rows)
        parts.append(block)
    if not parts:
        return np.zeros((0, len(dom)), dtype=np.int16)
    return np.concatenate(parts)


def mono_space(dom: FinPoset, cod: FinPoset, cap: int = DEFAULT_CAP) -> FinPoset:
    """The poset of monotone maps ``dom -> cod`` ordered pointwise."""
    tables = enumerate_monotone(dom, cod, cap)
    join = None
    if cod._join is not None:
        join = lambda f, g: tuple(cod.join(a, b) for a, b in zip(f, g))  # noqa: E731
    meet = None
    if cod._meet is not None:
        meet = lambda f, g: tuple(cod.meet(a, b) for a, b in zip(f, g))  # noqa: E731
    return FinPoset(tables, pointwise_leq(cod), join=join, meet=meet, name=f"[{dom.name} -> {cod.name}]")


def kleene_lfp(f: tuple, dom: FinPoset) -> Value:
    """Least fixpoint of the monotone table ``f`` by iteration from bottom."""
    x = dom.bottom
    if x is None:
        raise ValueError(f"{dom.name} has no bottom element")
    while True:
        nxt = f[dom.index[x]]
        if nxt == x:
            return x
        x = nxt


def kleene_gfp(f: tuple, dom: FinPoset) -> Value:
    """Greatest fixpoint of the monotone table ``f`` by iteration from top."""
    x = dom.top
    if x is None:
        raise ValueError(f"{dom.name} has no top element")
    while True:
        nxt = f[dom.index[x]]
        if nxt == x:
            return x
        x = nxt


def constant_table(dom: FinPoset, value: Value) -> tuple:
    return (value,) * len(dom)


class Model:
    """A finitary model of the λY-calculus over a tree signature.

    Subclasses provide ``base_domain``, ``arrow_domain``, ``constant``,
    ``little_omega``, ``big_omega`` and ``fix``.  Domains are built on
    demand and cached; the first completed build wins.
    """

    name = "model"

    def __init__(self, cap: int = DEFAULT_CAP):
        self.cap = cap
        self._domains: dict[SimpleType, FinPoset] = {}
        self._lock = threading.Lock()
        self.memo: dict[tuple, Value] = {}

    # domain construction -------------------------------------------------
    def domain(self, ty: SimpleType) -> FinPoset:
        d = self._domains.get(ty)
        if d is not None:
            return d
        built = self._build_domain(ty)
        with self._lock:
            return self._domains.setdefault(ty, built)

    def _build_domain(self, ty: SimpleType) -> FinPoset:
        if isinstance(ty, Arrow):
            return self.arrow_domain(ty)
        if isinstance(ty, SemTag):
            return self.tag_domain(ty)
        return self.base_domain()

    def base_domain(self) -> FinPoset:
        raise NotImplementedError

    def arrow_domain(self, ty: Arrow) -> FinPoset:
        return mono_space(self.domain(ty.dom), self.domain(ty.cod), self.cap)

    def tag_domain(self, ty) -> FinPoset:
        raise EvaluationError(f"{self.name} does not interpret tagged types")

    # interpretation ------------------------------------------------------
    def constant(self, c: Const) -> Value:
        raise NotImplementedError

    def little_omega(self, ty: SimpleType) -> Value:
        raise NotImplementedError

    def big_omega(self, ty: SimpleType) -> Value:
        raise NotImplementedError

    def fix(self, ty: SimpleType, f: tuple) -> Value:
        raise NotImplementedError

    def apply(self, f: tuple, x: Value, arg_ty: SimpleType) -> Value:
        return f[self.domain(arg_ty).index[x]]

    def top(self, ty: SimpleType) -> Value:
        if isinstance(ty, Arrow):
            return constant_table(self.domain(ty.dom), self.top(ty.cod))
        return self.domain(ty).top

    def bottom(self, ty: SimpleType) -> Value:
        if isinstance(ty, Arrow):
            return constant_table(self.domain(ty.dom), self.bottom(ty.cod))
        return self.domain(ty).bottom

    def leq(self, ty: SimpleType, a: Value, b: Value) -> bool:
        if isinstance(ty, Arrow):
            return all(self.leq(ty.cod, x, y) for x, y in zip(a, b))
        return self.domain(ty).leq(a, b)

    def format_value(self, v: Value, ty: SimpleType) -> str:
        if isinstance(ty, Arrow):
            dom = self.domain(ty.dom)
            inner = ", ".join(
                f"{self.format_value(a, ty.dom)} -> {self.format_value(b, ty.cod)}"
                for a, b in zip(dom.elements, v)
            )
            return "{" + inner + "}"
        return str(v)

    def eval(self, t: Term, env: dict[str, Value] | None = None) -> Value:
        return evaluate(t, self, env)


def _fingerprint(t: Term, env: dict[str, Value]) -> tuple:
    if not t.fv:
        return ()
    return tuple(sorted((name, env[name]) for name, _ in t.fv))


def evaluate(t: Term, model: Model, env: dict[str, Value] | None = None) -> Value:
    """Compositional interpretation of ``t`` in ``model`` under ``env``."""
    env = env or {}
    for name, _ in t.fv:
        if name not in env:
            raise EvaluationError(f"unbound variable {name}")
    return _eval(t, model, env)


def _eval(t: Term, model: Model, env: dict[str, Value]) -> Value:
    key = (t, _fingerprint(t, env))
    hit = model.memo.get(key)
    if hit is not None:
        return hit
    v = _eval_node(t, model, env)
    model.memo[key] = v
    return v


def _eval_node(t: Term, model: Model, env: dict[str, Value]) -> Value:
    if isinstance(t, Var):
        return env[t.name]
    if isinstance(t, Const):
        return model.constant(t)
    if isinstance(t, Omega):
        return model.big_omega(t.type)
    if isinstance(t, LittleOmega):
        return model.little_omega(t.type)
    if isinstance(t, App):
        if isinstance(t.fun, Y):
            return model.fix(t.fun.type, _eval(t.arg, model, env))
        f = _eval(t.fun, model, env)
        x = _eval(t.arg, model, env)
        return model.apply(f, x, type_of(t.arg))
    if isinstance(t, Abs):
        dom = model.domain(t.var_type)
        return tuple(_eval(t.body, model, {**env, t.name: e}) for e in dom.elements)
    if isinstance(t, Y):
        fdom = model.domain(Arrow(t.type, t.type))
        return tuple(model.fix(t.type, f) for f in fdom.elements)
    if isinstance(t, Elem):
        return model.domain(t.tag).elements[t.index]
    if isinstance(t, Case):
        s = _eval(t.scrutinee, model, env)
        i = model.domain(type_of(t.scrutinee)).index[s]
        return _eval(t.branches[i], model, env)
    raise EvaluationError(f"cannot evaluate {t!r}")


def is_monotone(f: tuple, dom: FinPoset, cod_leq: Callable[[Any, Any], bool]) -> bool:
    for hi, los in enumerate(dom.lower_covers):
        for lo in los:
            if not cod_leq(f[lo], f[hi]):
                return False
    return True


def dump_domain(poset: FinPoset, fmt: Callable[[Value], str] = str, title: str | None = None) -> str:
    """Text dump: element list then Hasse edges."""
    lines = [f"domain {title or poset.name}", f"elements: {len(poset)}"]
    for i, e in enumerate(poset.elements):
        lines.append(f"  #{i} {fmt(e)}")
    lines.append("hasse:")
    for lo, hi in poset.hasse_edges():
        lines.append(f"  #{lo} < #{hi}")
    return "\n".join(lines) + "\n"
