"""Types, terms, substitution, α-equivalence, parser and printer."""

import pytest
from hypothesis import given, settings

from corpus import SIG, corpus, term
from strategies import closed_terms, terms
from lamy.parser import ParseError, parse_term, parse_term_file, parse_type, term_file_text
from lamy.printer import print_term
from lamy.syntax import (
    BINARY,
    O,
    Abs,
    App,
    Arrow,
    Const,
    Omega,
    Signature,
    TypeCheckError,
    Var,
    Y,
    alpha_eq,
    arrow,
    canonical,
    free_vars,
    order,
    substitute,
    type_of,
)

OO = arrow(O, O)
x, y, f = Var("x", O), Var("y", O), Var("f", OO)
c = Const("c", O)
a = Const("a", BINARY)


def test_parse_identity_fixpoint():
    t = parse_term(r"Y (\x:o. x)", SIG)
    assert t == App(Y(O), Abs("x", O, x))
    assert type_of(t) == O


def test_parse_identity():
    t = parse_term(r"\x:o. x", SIG)
    assert t == Abs("x", O, x)
    assert type_of(t) == OO


def test_parse_constant_application():
    t = parse_term("a c (Omega:o)", SIG)
    assert t == App(App(a, c), Omega(O))
    assert type_of(t) == O


def test_types():
    assert parse_type("o -> o -> o") == BINARY
    assert parse_type("(o -> o) -> o") == Arrow(OO, O)
    assert type_of(Y(O)) == Arrow(OO, O)
    assert type_of(x) == O
    assert order(Arrow(OO, O)) == 2


def test_applying_non_function():
    with pytest.raises(TypeCheckError, match="applying non-function"):
        type_of(App(c, c))


def test_tree_signature_proviso():
    with pytest.raises(TypeCheckError):
        Signature({"g": OO})
    Signature({"g": OO}, tree_signature=False)


def test_free_vars():
    assert free_vars(Abs("x", O, x)) == []
    assert free_vars(App(f, x)) == [("f", OO), ("x", O)]
    assert free_vars(term(r"Y (\F:o->o. \x:o. a x (F x)) c")) == []


def test_substitute():
    assert substitute(x, {"x": c}) == c
    assert substitute(App(App(a, x), x), {"x": c}) == App(App(a, c), c)
    out = substitute(Abs("y", O, x), {"x": y})
    assert isinstance(out, Abs) and out.name != "y"
    assert out.body == y


def test_substitute_type_mismatch():
    with pytest.raises(TypeCheckError):
        substitute(x, {"x": f})


def test_alpha_eq():
    assert alpha_eq(Abs("x", O, x), Abs("y", O, y))
    assert not alpha_eq(Abs("x", O, Abs("y", O, x)), Abs("y", O, Abs("x", O, x)))
    assert alpha_eq(Abs("x", O, y), Abs("z", O, y))
    assert not alpha_eq(Abs("x", O, y), Abs("y", O, y))
    assert not alpha_eq(Abs("x", O, x), Abs("x", OO, c))


@given(closed_terms)
@settings(max_examples=150, deadline=None)
def test_print_parse_round_trip(t):
    back = parse_term(print_term(t), SIG)
    assert alpha_eq(back, t)
    assert type_of(back) == type_of(t)


@given(terms(env={"x": O}))
@settings(max_examples=100, deadline=None)
def test_substitution_preserves_type(t):
    assert type_of(substitute(t, {"x": c})) == type_of(t)


@given(closed_terms)
@settings(max_examples=100, deadline=None)
def test_alpha_eq_agrees_with_canonical(t):
    u = substitute(Abs("x", O, t), {})
    assert alpha_eq(t, u.body) == (canonical(t) == canonical(u.body))


def test_corpora_round_trip():
    for name in ("terms.txt", "finite_bt.txt", "fixpoints.txt"):
        for t in corpus(name):
            assert alpha_eq(parse_term(print_term(t), SIG), t)


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_term(r"\x:o x", SIG)
    with pytest.raises((ParseError, TypeCheckError)):
        parse_term("q", SIG)


def test_term_file():
    text = """
    const a : o -> o -> o;
    const c : o;   # a leaf
    let loop = Y (\\x:o. x)
    main = a c loop
    """
    tf = parse_term_file(text)
    assert tf.main == App(App(a, c), App(Y(O), Abs("x", O, x)))
    again = parse_term_file(term_file_text(tf.signature, tf.main))
    assert again.main == tf.main


def test_term_file_needs_main():
    tf = parse_term_file("const c : o;\nlet x = c\n")
    with pytest.raises(ParseError):
        tf.main
