import itertools
from collections import Counter
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from cmall.fock import (
    UNIT, ConfigError, FockElem, FockSet, Universe, biorth, delta_n, mono, orth, pole,
    set_circ, set_star, star,
)
from cmall.semantics import (
    DEFAULT_SWEEP, PhaseStructure, SemanticsError, SweepConfig, countermodel_search, dual_domains,
    fact_from_seed, fact_orth, interpret_formula, interpret_multisequent, is_fact, is_valid,
    linear_fragment, load_sweep, seeds, soundness_harness, sweep_harness, sweep_structures,
)
from cmall.syntax import parse_formula, parse_multisequent

ROOT = Path(__file__).resolve().parent.parent
U1 = Universe(("a",), 2, 2, 2, frozenset({("a",)}))
U2 = Universe(("a", "b"), 1, 2, 2, frozenset({("a",)}))


def structure(u, **seeds_by_atom):
    return PhaseStructure(u, {x: fact_from_seed(u, mono(m) if m != "U" else UNIT)
                              for x, m in seeds_by_atom.items()})


# --------------------------------------------------------------------------
# facts and formulas

def test_seed_facts_are_closed():
    for u in (U1, U2):
        for sd in seeds(u):
            assert is_fact(fact_from_seed(u, sd))


def test_atom_and_double_negation():
    ps = structure(U1, a="a")
    va = interpret_formula(ps, parse_formula("a"))
    assert va == ps.valuation["a"]
    assert interpret_formula(ps, parse_formula("a~")) == fact_orth(va)
    assert fact_orth(interpret_formula(ps, parse_formula("a~"))) == va


def test_missing_atom_and_modality():
    ps = structure(U1, a="a")
    with pytest.raises(SemanticsError):
        interpret_formula(ps, parse_formula("b"))
    with pytest.raises(SemanticsError):
        interpret_formula(ps, parse_formula("a^s"))


def _elements(F):
    return list(F)


@pytest.mark.parametrize("u", [U1, U2], ids=["one-gen", "two-gen"])
def test_connectives_match_element_level_products(u):
    """The signature shortcuts agree with products computed element by element."""
    facts = [fact_from_seed(u, sd) for sd in seeds(u)][:4]
    for A, B in itertools.product(facts, repeat=2):
        ps = PhaseStructure(u, {"p": A, "q": B})
        prods, _ = set_star(_elements(A), _elements(B), u)
        assert interpret_formula(ps, parse_formula("p * q")) == biorth(prods, u)
        circs, _ = set_circ(_elements(fact_orth(A)), _elements(fact_orth(B)), u)
        assert interpret_formula(ps, parse_formula("p $ q")) == orth(circs, u)
        assert interpret_formula(ps, parse_formula("p & q")) == A & B


def test_constants_standard_and_literal():
    unit_orth = orth([UNIT], U1)
    ps = PhaseStructure(U1, {})
    assert interpret_formula(ps, parse_formula("bot")) == unit_orth
    assert interpret_formula(ps, parse_formula("1")) == fact_orth(unit_orth)
    lit = PhaseStructure(U1, {}, constants="literal")
    assert interpret_formula(lit, parse_formula("1")) == unit_orth
    with pytest.raises(ConfigError):
        PhaseStructure(U1, {}, constants="other")


def test_valuation_must_be_a_fact():
    not_closed = FockSet.of(U1, [mono("a^2")])
    with pytest.raises(ConfigError):
        PhaseStructure(U1, {"a": not_closed})


def test_empty_bottom_rejected():
    with pytest.raises(ConfigError):
        PhaseStructure(U1.with_bottom(frozenset()), {})


def test_closure_keeps_inclusion_in_pole():
    """Checking generators is enough: the biorthogonal of a subset of the pole stays inside it."""
    for u in (U1, U2):
        p = list(pole(u))
        for k in (1, 2, 3):
            G = p[::max(1, len(p) // (4 * k))][:k]
            assert biorth(G, u) <= pole(u)


# --------------------------------------------------------------------------
# multisequents

def test_single_unshared_occurrence():
    ps = structure(U1, a="a")
    s = parse_multisequent("{x: a}")
    d = mono("1")
    assert interpret_multisequent(ps, s, {"x": d}) == d


def test_shared_occurrence_splits():
    ps = structure(U1, a="a")
    s = parse_multisequent("{x: a}{x}")
    d = mono("a^2")
    expected = Counter()
    for (p1, p2), m in delta_n(("a", "a"), 1).items():
        expected[tuple(sorted((p1, p2)))] += m
    assert interpret_multisequent(ps, s, {"x": d}) == FockElem.from_counter(expected, 2)


def test_axiom_elements():
    ps = structure(U1, a="a")
    s = parse_multisequent("{x: a, y: a~}")
    doms = dual_domains(ps, s)
    for vx, vy in itertools.product(doms["x"], doms["y"]):
        assert interpret_multisequent(ps, s, {"x": vx, "y": vy}) == star(vx, vy)


ORDER_CASES = [
    "{x: a, y: a~}{x, z: 1}",
    "{x: a}{x, y: a~}{y}",
    "{x: a, y: b}{y, z: a~}{x, z}",
]


@pytest.mark.parametrize("text", ORDER_CASES)
def test_sequent_order_irrelevant(text):
    s = parse_multisequent(text)
    ps = structure(U2, a="a", b="1")
    doms = dual_domains(ps, s)
    occs = sorted(doms)
    for values in itertools.islice(itertools.product(*(doms[x][:3] for x in occs)), 20):
        duals = dict(zip(occs, values))
        base = interpret_multisequent(ps, s, duals)
        for order in itertools.permutations(range(len(s.sequents))):
            assert interpret_multisequent(ps, s, duals, order) == base


@settings(max_examples=30, deadline=None)
@given(st.permutations(range(3)), st.sampled_from(seeds(U2)))
def test_sequent_order_random_duals(order, d):
    s = parse_multisequent("{x: a}{x, y: 1}{x}")
    ps = structure(U2, a="a")
    duals = {"x": d, "y": UNIT}
    assert interpret_multisequent(ps, s, duals, list(order)) == interpret_multisequent(ps, s, duals)


def test_empty_multisequent_rejected():
    ps = structure(U1, a="a")
    with pytest.raises(SemanticsError):
        interpret_multisequent(ps, parse_multisequent("∅"), {})


# --------------------------------------------------------------------------
# validity

@pytest.mark.parametrize("seed", [sd for sd in seeds(U2) if sd != UNIT], ids=str)
def test_axiom_valid(seed):
    ps = PhaseStructure(U2, {"a": fact_from_seed(U2, seed)})
    assert is_valid(ps, parse_multisequent("a, a~")).valid is True


def test_vacuous_validity_flagged():
    ps = structure(U1, a="a")
    rep = is_valid(ps, parse_multisequent("top"))
    assert rep.valid is True and rep.vacuous


def test_modalities_unknown():
    ps = structure(U1, a="a")
    assert is_valid(ps, parse_multisequent("a^s, a~")).valid is None


def test_violation_reported():
    ps = structure(U1.with_bottom(frozenset({()})), a="1")
    rep = is_valid(ps, parse_multisequent("a"))
    assert rep.valid is False and len(rep.violation) == 1
    assert "invalid" in rep.summary()


def test_harness_edge_cases():
    s = parse_multisequent("a, a~")
    assert soundness_harness([("ax", s)], []).rows == []
    assert soundness_harness([], [structure(U1, a="a")]).rows == []
    with pytest.raises(SemanticsError):
        soundness_harness([("m", parse_multisequent("a^s, a~"))], [structure(U1, a="a")])


def test_harness_small_provable_corpus():
    corpus = [("ax", parse_multisequent("a, a~")), ("top", parse_multisequent("top, a"))]
    structures = [structure(U2, a=m) for m in ("a", "b", "1")]
    report = soundness_harness(corpus, structures)
    assert len(report.rows) == 6 and report.ok


def test_sweep_harness_cross_checks_policies():
    report = sweep_harness([("ax", parse_multisequent("a, a~"))])
    assert report.rows and all(r.cross is not None for r in report.rows)
    assert report.ok and report.decided_fraction == 1.0


# --------------------------------------------------------------------------
# countermodels

def test_countermodel_for_single_atom():
    cm = countermodel_search(parse_multisequent("a"))
    assert cm is not None and cm.certificate
    assert is_valid(cm.structure, parse_multisequent("a")).valid is False


@pytest.mark.parametrize("text", ["a, a~", "1", "top, a"])
def test_no_countermodel_for_provable(text):
    assert countermodel_search(parse_multisequent(text)) is None


def test_countermodel_budget():
    assert countermodel_search(parse_multisequent("a"), budget=0) is None


# --------------------------------------------------------------------------
# sweep configuration

def test_sweep_file_matches_default(tmp_path):
    cfg = load_sweep(ROOT / "configs" / "sweep.ini")
    assert cfg.universes == DEFAULT_SWEEP.universes
    assert (cfg.max_bottom_size, cfg.max_valuations) == (DEFAULT_SWEEP.max_bottom_size, DEFAULT_SWEEP.max_valuations)
    bad = tmp_path / "bad.ini"
    bad.write_text("[sweep]\nmax_bottom_size = 1\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_sweep(bad)


def test_sweep_structures_cover_bottoms():
    cfg = SweepConfig((Universe(("a",), 1, 2, 2),), max_bottom_size=1)
    names = [ps.describe() for ps in sweep_structures(cfg, ["a"])]
    # bottoms {1} and {a}, three seeds each
    assert len(names) == 6 and len(set(names)) == 6


def test_linear_fragment():
    assert linear_fragment(parse_multisequent("a, a~ % 1"))
    assert not linear_fragment(parse_multisequent("a~ % b~, a $ b"))
    assert not linear_fragment(parse_multisequent("{x: a, y: a~}{x, z: 1}"))
