"""Finite labeled binary trees (Böhm-tree prefixes)."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

OMEGA = "Omega"  # divergence leaf
CUT = "omega"  # truncation leaf


@dataclass(frozen=True)
class Tree:
    label: str
    children: tuple["Tree", ...] = ()
    annotation: int | None = None

    def __post_init__(self):
        if len(self.children) not in (0, 2):
            raise ValueError(f"node {self.label} must have 0 or 2 children")

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def nodes(self, path: str = "") -> Iterator[tuple[str, "Tree"]]:
        yield path, self
        for i, c in enumerate(self.children, 1):
            yield from c.nodes(path + str(i))

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children), default=-1)

    def has_cuts(self) -> bool:
        return any(n.label == CUT for _, n in self.nodes())

    def has_omega(self) -> bool:
        return any(n.label == OMEGA for _, n in self.nodes())

    def cut(self, depth: int) -> "Tree":
        """Replace every subtree at ``depth`` by a cut leaf."""
        if depth == 0:
            return Tree(CUT)
        if not self.children:
            return self
        return Tree(self.label, tuple(c.cut(depth - 1) for c in self.children), self.annotation)

    def strip(self) -> "Tree":
        """Drop annotations."""
        return Tree(self.label, tuple(c.strip() for c in self.children))

    def sexpr(self) -> str:
        head = self.label if self.annotation is None else f"{self.label}^{{#{self.annotation}}}"
        if not self.children:
            return f"({head})"
        return f"({head} " + " ".join(c.sexpr() for c in self.children) + ")"

    def indented(self) -> str:
        lines = []
        for path, node in self.nodes():
            head = node.label if node.annotation is None else f"{node.label}^{{#{node.annotation}}}"
            lines.append("  " * len(path) + (path or "ε") + " " + head)
        return "\n".join(lines) + "\n"

    def __str__(self) -> str:
        return self.sexpr()


_SX = re.compile(r"\(|\)|[^\s()]+")


def parse_sexpr(text: str) -> Tree:
    toks = _SX.findall(text)
    pos = 0

    def node() -> Tree:
        nonlocal pos
        if toks[pos] != "(":
            raise ValueError(f"expected '(' at token {pos}")
        pos += 1
        head = toks[pos]
        pos += 1
        ann = None
        m = re.fullmatch(r"(.+)\^\{#(\d+)\}", head)
        if m:
            head, ann = m.group(1), int(m.group(2))
        kids = []
        while toks[pos] != ")":
            kids.append(node())
        pos += 1
        return Tree(head, tuple(kids), ann)

    t = node()
    if pos != len(toks):
        raise ValueError("trailing tokens after tree")
    return t
