import itertools
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from cmall.syntax import (
    BOT, ONE, Atom, Bin, Conn, Mod, ModKind, Multisequent, ParseError, canonicalize, isomorphism, negate,
    parse_formula, parse_multisequent, render_formula, render_multisequent,
)
from strategies import formulas, multisequents, renamings

a, b = Atom("a"), Atom("b")


def test_negate_swaps_operands():
    assert negate(Bin(Conn.TENSOR, a, b)) == Bin(Conn.PAR, negate(b), negate(a))
    assert negate(Atom("p", True)) == Atom("p")
    assert negate(Mod(ModKind.SHARED, a)) == Mod(ModKind.UNSHARED, negate(a))


@settings(max_examples=1000)
@given(formulas())
def test_negate_involution(f):
    assert negate(negate(f)) == f


def test_parse_examples():
    assert parse_formula("a * b~") == Bin(Conn.TENSOR, a, Atom("b", True))
    assert parse_formula("(a $ b)~") == Bin(Conn.CTIMES, Atom("b", True), Atom("a", True))
    assert parse_formula("a % b * a") == Bin(Conn.PAR, a, Bin(Conn.TENSOR, b, a))
    assert parse_formula("a & b + a") == Bin(Conn.PLUS, Bin(Conn.WITH, a, b), a)
    assert parse_formula("a^s") == Mod(ModKind.SHARED, a)
    assert parse_formula("bot") == BOT and parse_formula("1") == ONE


@pytest.mark.parametrize("text", ["1 %", "a * (b", "a ~~ *", "", "a b"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_formula(text)


def test_parse_error_position():
    with pytest.raises(ParseError) as info:
        parse_formula("a * * b")
    assert info.value.pos == 4


@given(formulas())
def test_render_parse_roundtrip(f):
    text = render_formula(f)
    assert parse_formula(text) == f
    assert render_formula(parse_formula(text)) == text


def test_parse_multisequent_sharing():
    single = parse_multisequent("{x: a~, y: a % bot}")
    assert len(single.sequents) == 1 and len(single.labels) == 2
    shared = parse_multisequent("{u: a~, v: a % bot} {u, w: 1 % 1}")
    assert len(shared.sequents) == 2 and len(shared.containing("u")) == 2


@pytest.mark.parametrize("text", ["{x: a}{x: b}", "{x: a, x}", "{x: a}{y}"])
def test_parse_multisequent_errors(text):
    with pytest.raises(ParseError):
        parse_multisequent(text)


def test_two_sided_sugar():
    ms = parse_multisequent("A, B |- A * B")
    fs = sorted(render_formula(ms.formula(x)) for x in ms.labels)
    assert fs == sorted(["A~", "B~", "A * B"])
    assert len(ms.sequents) == 1


def test_render_multisequent_roundtrip():
    ms = parse_multisequent("{u: a~, v: a % bot} {u, w: 1 % 1}")
    assert parse_multisequent(render_multisequent(ms)) == ms


def test_canonical_permutation():
    assert canonicalize(parse_multisequent("{x:a}{y:b}")) == canonicalize(parse_multisequent("{y:b}{x:a}"))


def test_shared_is_not_two_copies():
    shared = parse_multisequent("{x: a, z: b}{x, w: b}")
    copies = parse_multisequent("{x: a, z: b}{y: a, w: b}")
    assert canonicalize(shared) != canonicalize(copies)


def _brute_iso(m1: Multisequent, m2: Multisequent) -> bool:
    l1, l2 = list(m1.labels), list(m2.labels)
    if len(l1) != len(l2) or len(m1.sequents) != len(m2.sequents):
        return False
    target = Counter(m2.sequents)
    for perm in itertools.permutations(l2):
        m = dict(zip(l1, perm))
        if any(m1.formula(x) != m2.formula(m[x]) for x in l1):
            continue
        if Counter(frozenset(m[x] for x in s) for s in m1.sequents) == target:
            return True
    return False


@settings(max_examples=150, deadline=None)
@given(multisequents(max_occ=5), multisequents(max_occ=5))
def test_canonical_reflects_isomorphism(m1, m2):
    assert (canonicalize(m1) == canonicalize(m2)) == _brute_iso(m1, m2)


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_canonical_renaming_invariant(data):
    ms = data.draw(multisequents())
    m = data.draw(renamings(ms))
    renamed = ms.rename(m)
    assert canonicalize(renamed) == canonicalize(ms)
    iso = isomorphism(ms, renamed)
    assert iso is not None and ms.rename(iso) == renamed
