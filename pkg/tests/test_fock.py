import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_factorizations, concat, dealt, derived_order
from cmall.fock import (
    UNIT, UNIT_MARK, ConfigError, FockElem, TruncationError, Universe, biorth, circ, delta, delta_n,
    factorization_count, factorizations, in_pole, leq, mono, mono_mul, orth, parse_elem, parse_mono,
    pole, pole_witness, render_elem, space, split_at, star, star_ordered, swap_at,
)

GENS = ("a", "b")
# the acceptance universe: two generators, monoid degree 3, Fock degree 3
U = Universe(GENS, 3, 3, 2, frozenset({("a",)}))
MONOS = U.monomials()
COMPONENTS = U.components()
BOTTOMS = [{("a",)}, {("a",), ("b", "b")}, {()}, {("a", "b")}, {("a",), ("a", "a")}]


def _universe(bottom):
    return U.with_bottom(frozenset(bottom))


# --------------------------------------------------------------------------
# factorizations and comultiplication

def test_factorization_examples():
    assert factorizations(("a",), 2) == [((), ("a",)), (("a",), ())]
    assert sorted(factorizations(("a", "b"), 2)) == sorted([((), ("a", "b")), (("a",), ("b",)),
                                                           (("b",), ("a",)), (("a", "b"), ())])
    assert sorted(factorizations(("a", "a"), 2)) == sorted([((), ("a", "a")), (("a",), ("a",)),
                                                           (("a", "a"), ())])


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_factorizations_match_brute_force(k):
    for x in MONOS:
        got = factorizations(x, k)
        assert sorted(got) == brute_factorizations(x, k, MONOS)
        assert len(got) == factorization_count(x, k)


def test_factorizations_reject_zero_parts():
    with pytest.raises(ValueError):
        factorizations(("a",), 0)


def test_delta_examples():
    a, b = mono("a"), mono("b")
    assert delta(("a",)) == Counter({((), ("a",)): 1, (("a",), ()): 1})
    assert delta(a + b) == delta(a) + delta(b)
    assert delta(UNIT) == Counter({((UNIT_MARK,), (UNIT_MARK,)): 1})
    assert delta_n(("a", "b"), 0) == Counter({(("a", "b"),): 1})
    assert delta_n(("a",), 2) == Counter({(("a",), (), ()): 1, ((), ("a",), ()): 1, ((), (), ("a",)): 1})


def test_repeated_letter_splits_twice():
    assert delta(("a", "a")) == Counter({((), ("a", "a")): 1, (("a",), ("a",)): 2, (("a", "a"), ()): 1})
    assert len(factorizations(("a", "a"), 2)) == 3


def test_delta_is_multiplicative():
    for x, y in itertools.product(MONOS, repeat=2):
        if len(x) + len(y) > U.max_mono_degree:
            continue
        prod_ = Counter()
        for (x1, x2), m in delta(x).items():
            for (y1, y2), n in delta(y).items():
                prod_[(mono_mul(x1, y1), mono_mul(x2, y2))] += m * n
        assert prod_ == delta(mono_mul(x, y))


def test_symmetrized_delta_has_multiplicity():
    # a∘b shows up once as a×b and once as b×a
    sym = Counter(tuple(sorted(p)) for p in delta(("a", "b")).elements())
    assert sym[(("a",), ("b",))] == 2


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_delta_n_matches_oracle(n):
    for x in MONOS:
        assert delta_n(x, n) == dealt(x, n + 1)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_n_coassociativity(n):
    for x in MONOS:
        target = delta_n(x, n + 1)
        for i in range(n + 1):
            assert split_at(delta_n(x, n), i) == target, (x, n, i)


def test_coassociativity_on_fock_terms():
    terms = [t for t in space(U).simple if len(t) <= 2]
    for t in terms:
        f = FockElem(len(t), (t,))
        d = delta(f)
        assert split_at(d, 0) == split_at(d, 1) == delta_n(f, 2)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_n_cocommutativity(n):
    for x in MONOS:
        d = delta_n(x, n)
        for i, j in itertools.combinations(range(n + 1), 2):
            assert swap_at(d, i, j) == d
    for t in space(U).simple:
        if len(t) * (n + 1) <= 6:
            d = delta_n(FockElem(len(t), (t,)), n)
            for i, j in itertools.combinations(range(n + 1), 2):
                assert swap_at(d, i, j) == d


@pytest.mark.parametrize("n", [0, 1, 2])
def test_splitting_identity(n):
    for x in MONOS:
        for i in range(n + 1):
            rhs = Counter()
            for (x1, x2), m in delta(x).items():
                for tup, k in concat(delta_n(x1, i), delta_n(x2, n - i)).items():
                    rhs[tup] += m * k
            assert rhs == delta_n(x, n + 1), (x, n, i)


# --------------------------------------------------------------------------
# the ⋆ product

def test_star_of_monomials_is_product():
    assert star(mono("a"), mono("b")) == mono("ab")
    assert star(mono("a"), mono("1")) == mono("a")


def test_star_spread_over_a_tuple():
    assert star(parse_elem("a∘b"), mono("c")) == parse_elem("ac∘b + a∘bc")


def test_star_associative_with_repeated_letters():
    left = star(star(parse_elem("1∘1"), mono("a")), mono("a"))
    right = star(parse_elem("1∘1"), star(mono("a"), mono("a")))
    assert left == right == parse_elem("a∘a + a∘a + 1∘a^2 + 1∘a^2")


def _simple(draw, degree):
    return tuple(sorted(draw(st.lists(st.sampled_from(COMPONENTS), min_size=degree, max_size=degree))))


@st.composite
def fock_elems(draw, degree=None):
    d = degree if degree is not None else draw(st.integers(1, U.max_fock_degree))
    k = draw(st.integers(1, U.max_terms))
    return FockElem.of([_simple(draw, d) for _ in range(k)], d)


@st.composite
def triples(draw):
    """Three elements whose degrees multiply to at most the Fock bound."""
    degs = draw(st.sampled_from([(1, 1, 1), (1, 1, 2), (1, 2, 1), (2, 1, 1),
                                 (1, 1, 3), (1, 3, 1), (3, 1, 1)]))
    return tuple(draw(fock_elems(d)) for d in degs)


@settings(max_examples=1000, deadline=None)
@given(triples())
def test_star_laws(fgh):
    f, g, h = fgh
    assert star(f, g) == star(g, f)
    assert star(star(f, g), h) == star(f, star(g, h))
    # any ordering of each summand gives the same product
    for s in f.terms:
        for t in g.terms:
            base = star_ordered(s, t)
            for ps in set(itertools.permutations(s)):
                for pt in set(itertools.permutations(t)):
                    assert star_ordered(ps, pt) == base


@settings(max_examples=200, deadline=None)
@given(fock_elems(1), fock_elems(1), fock_elems())
def test_star_bilinear(f, g, h):
    assert star(f + g, h) == star(f, h) + star(g, h)


@settings(max_examples=300, deadline=None)
@given(fock_elems())
def test_unit_neutral(f):
    assert star(f, UNIT) == f == star(UNIT, f)


def test_distribution_exhaustive():
    simple = space(U).simple
    for x in MONOS + [UNIT_MARK]:
        u = FockElem(1, ((x,),))
        for s, t in itertools.product(simple, repeat=2):
            if len(s) + len(t) > U.max_fock_degree:
                continue
            f, g = FockElem(len(s), (s,)), FockElem(len(t), (t,))
            lhs = star(u, circ(f, g))
            rhs = FockElem(f.degree + g.degree)
            for (x1, x2), m in delta(x).items():
                piece = circ(star(FockElem(1, ((x1,),)), f), star(FockElem(1, ((x2,),)), g))
                for _ in range(m):
                    rhs = rhs + piece
            assert lhs == rhs, (render_elem(u), render_elem(f), render_elem(g))


def test_star_respects_bounds():
    with pytest.raises(TruncationError):
        star(parse_elem("a∘b"), parse_elem("a∘b"), U)
    with pytest.raises(TruncationError):
        star(mono("a^2"), mono("b^2"), U)


# --------------------------------------------------------------------------
# order

def test_leq_examples():
    f = parse_elem("a∘b")
    assert leq(f, f)
    assert leq(f, f + parse_elem("b∘b"))
    assert not leq(f + parse_elem("b∘b"), f)
    assert not leq(mono("a"), parse_elem("a∘a"))


@settings(max_examples=300, deadline=None)
@given(st.data())
def test_leq_closed_under_star(data):
    f = data.draw(fock_elems(1))
    g = f + data.draw(fock_elems(1))
    h = data.draw(fock_elems())
    assert leq(f, g)
    assert leq(star(f, h), star(g, h))


def test_order_lemma():
    u = Universe(("a",), 2, 2, 2, frozenset({("a",)}))
    carrier = space(u).carrier
    rel = derived_order(u, rounds=3)
    assert rel
    for i, j in rel:
        f, g = carrier[i], carrier[j]
        h = g.counter() - f.counter()
        assert leq(f, g) and sum(h.values()) > 0
        assert f + FockElem.from_counter(h, g.degree) == g


@pytest.mark.parametrize("bottom", [{("a",)}, {()}, {("a", "a")}], ids=str)
def test_order_lemma_on_pole(bottom):
    u = Universe(("a",), 2, 2, 2, frozenset(bottom))
    carrier, p = space(u).carrier, pole(u)
    for i, j in derived_order(u, rounds=3):
        if carrier[i] in p:
            assert carrier[j] in p


# --------------------------------------------------------------------------
# pole

def test_pole_examples():
    u = Universe(("a",), 2, 2, 2, frozenset({("a",)}))
    p = pole(u)
    assert mono("a") in p
    assert parse_elem("a∘a") in p
    assert mono("a^2") not in p
    assert mono("a") + mono("1") in p


def test_empty_bottom_rejected():
    with pytest.raises(ConfigError):
        pole(U.with_bottom(frozenset()))


@pytest.mark.parametrize("bottom", BOTTOMS, ids=str)
def test_fixpoint_matches_closed_form(bottom):
    u = _universe(bottom)
    p = pole(u)
    closed = np.array([in_pole(f, u) for f in space(u).carrier])
    assert (p.mask == closed).all()


@pytest.mark.parametrize("bottom", BOTTOMS, ids=str)
def test_choice_lemma(bottom):
    u = _universe(bottom)
    p = pole(u)
    assert len(p) > 0
    for f in p:
        w = pole_witness(f, u)
        assert w is not None
        parts, rest = w
        assert parts and all(mono(x) in p for x in parts)
        prod_ = FockElem(1, ((parts[0],),))
        for x in parts[1:]:
            prod_ = circ(prod_, FockElem(1, ((x,),)))
        assert prod_ + rest == f


def test_pole_has_no_unit_component():
    u = _universe({()})
    assert mono("1") in pole(u)
    assert UNIT not in pole(u)


# --------------------------------------------------------------------------
# orthogonals

def test_orth_examples():
    o = orth([mono("a")], U)
    assert mono("1") in o
    assert mono("b") not in o
    assert UNIT in o


def _orth_oracle(F, u):
    out = set()
    for g in space(u).carrier:
        try:
            if all(in_pole(star(f, g, u), u) for f in F):
                out.add(g)
        except TruncationError:
            pass
    return out


SMALL = Universe(GENS, 2, 2, 2, frozenset({("a",), ("b", "b")}))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from(space(SMALL).carrier), min_size=1, max_size=3))
def test_orth_matches_oracle(F):
    assert set(orth(F, SMALL)) == _orth_oracle(F, SMALL)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from(space(SMALL).carrier), min_size=1, max_size=3))
def test_galois_laws(F):
    once = orth(F, SMALL)
    twice = orth(list(once), SMALL)
    assert all(f in twice for f in F)
    assert biorth(list(twice), SMALL) == twice
    assert orth(list(twice), SMALL) == once


# --------------------------------------------------------------------------
# text and configuration

def test_text_roundtrip():
    for text in ["a∘b + 1∘a^2", "𝟙", "ab^2"]:
        assert parse_elem(render_elem(parse_elem(text))) == parse_elem(text)
    assert parse_mono("a^2b") == ("a", "a", "b")
    with pytest.raises(ValueError):
        parse_mono("A")


def test_universe_validation():
    with pytest.raises(ConfigError):
        Universe(("a", "a"))
    with pytest.raises(ConfigError):
        Universe(("a",), bottom=frozenset({("b",)}))
    with pytest.raises(ConfigError):
        Universe(("a",), max_fock_degree=0)


def test_mono_mul_unit():
    assert mono_mul(UNIT_MARK, ("a",)) == ("a",)
    assert mono_mul(("b",), ("a",)) == ("a", "b")
