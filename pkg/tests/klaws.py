"""Law checkers for K(Q, Q_Ω): Galois connection with D, application
commutation, join/meet laws and D-completeness.

``library_laws`` works on the enumerated domain of a KModel and checks
every element and every pair.  ``array_laws`` checks the same
element-wise laws over K_{o→o→o} given as numpy index arrays, for spaces
too large to hold as Python tuples; pairwise laws there use sampled
partners.
"""

from __future__ import annotations

import numpy as np

from lamy.domains import iter_monotone_index_arrays
from lamy.kmodel import KModel
from lamy.syntax import Arrow, O, arrow


def _down_masks(poset) -> list[int]:
    n = len(poset)
    down = [0] * n
    for i in range(n):
        up = poset.up[i]
        j = up
        while j:
            k = (j & -j).bit_length() - 1
            j &= j - 1
            down[k] |= 1 << i
    return down


def _bits(mask: int):
    while mask:
        k = (mask & -mask).bit_length() - 1
        mask &= mask - 1
        yield k


def library_laws(m: KModel, ty) -> dict[str, int]:
    """Check every law at ``ty`` exhaustively; returns checked counts and
    raises AssertionError with a witness on the first failure."""
    K = m.domain(ty)
    D = m.d.domain(ty)
    counts = dict.fromkeys(
        ["retraction", "galois", "commutation", "join", "meet", "d_complete"], 0
    )
    bars = [m.bar(f, ty) for f in K.elements]

    for d in D.elements:
        up = m.uparrow(d, ty)
        assert up in K.index, f"uparrow({d}) not in K at {ty}"
        assert m.bar(up, ty) == d, f"bar(uparrow({d})) != {d} at {ty}"
        counts["retraction"] += 1

    for f, bf in zip(K.elements, bars):
        for d in D.elements:
            lhs = D.leq(bf, d)
            rhs = K.leq(f, m.uparrow(d, ty))
            assert lhs == rhs, f"Galois law fails at {ty}: f={f}, d={d}"
            counts["galois"] += 1

    if isinstance(ty, Arrow):
        P = m.domain(ty.dom)
        Dd = m.d.domain(ty.dom)
        for f, bf in zip(K.elements, bars):
            for p in P.elements:
                lhs = m.bar(f[P.index[p]], ty.cod)
                rhs = bf[Dd.index[m.bar(p, ty.dom)]]
                assert lhs == rhs, f"bar(f p) != bar f (bar p) at {ty}: f={f}, p={p}"
                counts["commutation"] += 1

    down = _down_masks(K)
    n = len(K)
    for i in range(n):
        for j in range(i, n):
            f1, f2 = K.elements[i], K.elements[j]
            g = K.join(f1, f2)
            assert m.is_member(g, ty), f"f1 ∨ f2 escapes K at {ty}"
            assert K.leq(f1, g) and K.leq(f2, g)
            assert m.bar(g, ty) == D.join(bars[i], bars[j]), f"bar(f1 ∨ f2) at {ty}"
            counts["join"] += 1
            common = down[i] & down[j]
            if common:
                members = [K.elements[k] for k in _bits(common)]
                glb = members[0]
                for x in members[1:]:
                    glb = K.join(glb, x)
                assert glb in K.index, f"⋁F escapes K at {ty}"
                assert K.index[glb] in set(_bits(common)), f"⋁F is not a lower bound at {ty}"
                assert m.bar(glb, ty) == D.meet(bars[i], bars[j]), f"bar(f1 ∧ f2) at {ty}"
                counts["meet"] += 1

    bot_hat = m.bot_hat(ty)
    for d in D.elements:
        members = [f for f, bf in zip(K.elements, bars) if bf == d]
        assert members, f"L_{d} is empty at {ty}"
        top = members[0]
        for x in members[1:]:
            top = K.join(top, x)
        assert K.leq(bot_hat, top), f"⊥̂ not below ⋁L_d at {ty}"
        for f, bf in zip(K.elements, bars):
            assert K.leq(f, top) == D.leq(bf, d), f"f ≤ ⋁L_d iff bar f ≤ d fails at {ty}"
        counts["d_complete"] += 1
    return counts


# ---------------------------------------------------------------------------
# K_{o→o→o} as index arrays


class _Tables:
    """Index-level tables for K_o, K_{o→o} and the D-domains above them."""

    def __init__(self, m: KModel):
        oo = arrow(O, O)
        self.m = m
        self.K0 = m.domain(O)
        self.K1 = m.domain(oo)
        self.D0 = m.d.domain(O)
        self.D1 = m.d.domain(oo)
        self.D2 = m.d.domain(arrow(O, O, O))
        n1 = len(self.K1)
        self.leqK1 = np.array([[self.K1.leq_idx(i, j) for j in range(n1)] for i in range(n1)])
        self.joinK1 = np.array(
            [[self.K1.index[self.K1.join(a, b)] for b in self.K1.elements] for a in self.K1.elements],
            dtype=np.int16,
        )
        self.bar1 = np.array([self.D1.index[m.bar(f, oo)] for f in self.K1.elements])
        self.bar0 = [self.D0.index[m.bar(p, O)] for p in self.K0.elements]
        self.up0 = [self.K0.index[m.uparrow(e, O)] for e in self.D0.elements]
        n2 = len(self.D2)
        self.leqD2 = np.array([[self.D2.leq(a, b) for b in self.D2.elements] for a in self.D2.elements])
        self.joinD2 = np.array(
            [[self.D2.index[self.D2.join(a, b)] for b in self.D2.elements] for a in self.D2.elements]
        )
        # D_{o→o→o} element from its two D_{o→o} values
        self.code = -np.ones((len(self.D1), len(self.D1)), dtype=np.int64)
        for k, h in enumerate(self.D2.elements):
            self.code[self.D1.index[h[0]], self.D1.index[h[1]]] = k
        ty = arrow(O, O, O)
        self.up2 = np.array(
            [[self.K1.index[x] for x in m.uparrow(h, ty)] for h in self.D2.elements], dtype=np.int16
        )
        self.bot2 = np.array([self.K1.index[x] for x in m.bot_hat(ty)], dtype=np.int16)
        self.n2 = n2
        self.classes = (self.bar0, [int(x) for x in self.bar1])

    def bar_codes(self, rows: np.ndarray) -> np.ndarray:
        b = self.bar1[rows[:, self.up0]]
        return self.code[b[:, 0], b[:, 1]]

    def member(self, rows: np.ndarray) -> np.ndarray:
        ok = np.ones(len(rows), dtype=bool)
        for hi, los in enumerate(self.K0.lower_covers):
            for lo in los:
                ok &= self.leqK1[rows[:, lo], rows[:, hi]]
        b = self.bar1[rows]
        for p in range(len(self.K0)):
            for q in range(p + 1, len(self.K0)):
                if self.bar0[p] == self.bar0[q]:
                    ok &= b[:, p] == b[:, q]
        return ok


def array_laws(m: KModel, rng: np.random.Generator, chunk: int = 1_000_000):
    """Element-wise laws over all of K_{o→o→o}, streamed in chunks, plus the
    join law for each element against a random partner.

    Returns the checked counts and a random sample of rows for
    ``array_meets``.
    """
    T = _Tables(m)
    counts = dict.fromkeys(["elements", "galois", "commutation", "join_pairs"], 0)
    samples = []
    # running ⋁L_d per d, column by column, as K_{o→o} indices (-1: empty)
    sup = -np.ones((T.n2, len(T.K0)), dtype=np.int64)
    for rows in iter_monotone_index_arrays(T.K0, T.K1, T.classes, chunk):
        n = len(rows)
        counts["elements"] += n
        codes = T.bar_codes(rows)
        assert (codes >= 0).all(), "bar f is not monotone"
        for d in range(T.n2):
            lhs = T.leqD2[codes, d]
            rhs = T.leqK1[rows, T.up2[d][None, :]].all(axis=1)
            assert (lhs == rhs).all(), "Galois law fails on K_{o→o→o}"
            counts["galois"] += n
        b = T.bar1[rows]
        for p in range(len(T.K0)):
            e = T.bar0[p]
            h = T.D2.elements
            want = np.array([T.D1.index[h[c][e]] for c in range(T.n2)])[codes]
            assert (b[:, p] == want).all(), "bar(f p) != bar f (bar p) on K_{o→o→o}"
            counts["commutation"] += n
        for d in range(T.n2):
            sel = rows[codes == d]
            for p in range(len(T.K0)):
                for v in np.unique(sel[:, p]):
                    cur = sup[d, p]
                    sup[d, p] = v if cur < 0 else T.joinK1[cur, v]
        partner = rows[rng.permutation(n)]
        joined = T.joinK1[rows, partner]
        assert T.member(joined).all(), "f1 ∨ f2 escapes K_{o→o→o}"
        assert (T.bar_codes(joined) == T.joinD2[codes, T.bar_codes(partner)]).all(), "bar(f1 ∨ f2)"
        counts["join_pairs"] += n
        samples.append(rows[rng.integers(n, size=min(n, 200))])
    for d in range(T.n2):
        assert (sup[d] >= 0).all(), "some L_d is empty in K_{o→o→o}"
        # ⋁L_d equals the lift of d, so 'f ≤ ⋁L_d iff bar f ≤ d' is the Galois law above
        assert (sup[d] == T.up2[d]).all(), "⋁L_d differs from uparrow(d)"
        assert T.leqK1[T.bot2, sup[d]].all(), "⊥̂ not below ⋁L_d"
    counts["d_complete"] = T.n2
    return counts, np.concatenate(samples)


def array_meets(m: KModel, samples: np.ndarray, rng: np.random.Generator, pairs: int) -> int:
    """Meet law on random pairs drawn from ``samples`` (rows of K_{o→o→o}).

    F, the set of common lower bounds, is enumerated directly by
    restricting each point to values below both arguments.  Returns the
    number of pairs that had a common lower bound.
    """
    T = _Tables(m)
    meetD = np.array(
        [[T.D2.index[T.D2.meet(a, b)] for b in T.D2.elements] for a in T.D2.elements]
    )
    codes = T.bar_codes(samples)
    checked = 0
    for _ in range(pairs):
        i, j = rng.integers(len(samples), size=2)
        f1, f2 = samples[i], samples[j]
        allowed = T.leqK1[:, f1].T & T.leqK1[:, f2].T
        F = list(iter_monotone_index_arrays(T.K0, T.K1, T.classes, allowed=allowed))
        if not F:
            continue
        F = np.concatenate(F)
        glb = F[0].copy()
        for g in F[1:]:
            glb = T.joinK1[glb, g]
        assert T.member(glb[None, :])[0], "⋁F escapes K_{o→o→o}"
        assert T.leqK1[glb, f1].all() and T.leqK1[glb, f2].all(), "⋁F is not a common lower bound"
        assert T.bar_codes(glb[None, :])[0] == meetD[codes[i], codes[j]], "bar(f1 ∧ f2)"
        checked += 1
    return checked
