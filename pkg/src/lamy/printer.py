"""Concrete syntax output; ``parse_term(print_term(t))`` is α-equivalent to ``t``."""

from __future__ import annotations

from lamy.syntax import (
    Abs,
    App,
    Case,
    Const,
    Elem,
    LittleOmega,
    Omega,
    Term,
    Var,
    Y,
)


def print_term(t: Term) -> str:
    return _term(t)


def _term(t: Term) -> str:
    if isinstance(t, Abs):
        return f"\\{t.name}:{t.var_type}. {_term(t.body)}"
    if isinstance(t, Case):
        arms = " | ".join(f"#{i} -> {_term(b)}" for i, b in enumerate(t.branches))
        return f"case {_term(t.scrutinee)} {{ {arms} }}"
    if isinstance(t, App):
        return _app(t)
    return _atom(t)


def _app(t: App) -> str:
    parts = []
    while isinstance(t, App):
        parts.append(t.arg)
        t = t.fun
    parts.reverse()
    if isinstance(t, Y):
        head = "Y"
    else:
        head = _atom(t)
    return " ".join([head] + [_atom(a) for a in parts])


def _atom(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        if t.annotation is None:
            return t.name
        return f"{t.name}^{{#{t.annotation}}}"
    if isinstance(t, Y):
        return f"(Y:{t.type})"
    if isinstance(t, Omega):
        return f"(Omega:{t.type})"
    if isinstance(t, LittleOmega):
        return f"(omega:{t.type})"
    if isinstance(t, Elem):
        return f"(#{t.index}:{t.tag})"
    return f"({_term(t)})"
