from collections import Counter

import pytest
from hypothesis import assume, event, given, settings, strategies as st

from cmall.calculus import (
    CMALL_RULES, NAIVE_RULES, RuleError, RuleInstance, Variant, apply_forward, enumerate_backward,
)
from cmall.syntax import (
    BOT, ONE, Atom, Bin, Conn, Mod, ModKind, Multisequent, canonicalize, parse_formula, parse_multisequent,
)
from strategies import multisequents

CMALL, NAIVE = Variant.CMALL, Variant.NAIVE
A, B, C, D, E = (Atom(n) for n in "ABCDE")


def ms(text):
    return parse_multisequent(text)


def test_tensor_forms_product():
    left = Multisequent({"x": C, "y": D, "a": A}, [{"x", "a"}, {"y", "a"}])
    right = Multisequent({"z": E, "b": B}, [{"z", "b"}])
    t = Bin(Conn.TENSOR, A, B)
    out = apply_forward(CMALL, RuleInstance.make("tensor", ("a", "b", "n"), fresh={"n": t}), [left, right])
    assert out == Multisequent({"x": C, "y": D, "z": E, "n": t}, [{"x", "z", "n"}, {"y", "z", "n"}])


def test_cpar_merges_pairs():
    prem = Multisequent({"x": C, "a": A, "b": B}, [{"x"}, {"x", "a"}, {"x", "b"}])
    f = Bin(Conn.CPAR, A, B)
    out = apply_forward(CMALL, RuleInstance.make("cpar", ("a", "b", "n"), fresh={"n": f}), [prem])
    assert out == Multisequent({"x": C, "n": f}, [{"x"}, {"x", "n"}])


def test_shared_merges_copies():
    prem = Multisequent({"x1": C, "y1": D, "x2": C, "y2": D, "a": A, "b": B},
                        [{"x1", "a"}, {"y1", "a"}, {"x2", "b"}, {"y2", "b"}])
    inst = RuleInstance.make("shared", ("a", "b"), mapping={"x2": "x1", "y2": "y1"})
    out = apply_forward(CMALL, inst, [prem])
    As, Bs = Mod(ModKind.SHARED, A), Mod(ModKind.SHARED, B)
    assert out == Multisequent({"x1": C, "y1": D, "a": As, "b": Bs},
                               [{"x1", "a"}, {"y1", "a"}, {"x1", "b"}, {"y1", "b"}])


def test_unshared_marks_context():
    prem = ms("{x: C, a: A}{y: D}")
    out = apply_forward(CMALL, RuleInstance.make("unshared", ("a",)), [prem])
    assert out.formula("a") == Mod(ModKind.UNSHARED, A)
    assert out.formula("x") == Mod(ModKind.SHARED, C)
    assert out.formula("y") == D


def test_forward_errors():
    with pytest.raises(RuleError):
        apply_forward(NAIVE, RuleInstance.make("tensor", ("a", "b", "n")), [ms("{a: A}"), ms("{b: B}")])
    with pytest.raises(RuleError):
        apply_forward(CMALL, RuleInstance.make("s"), [ms("{a: A}"), ms("{a: A}")])
    with pytest.raises(RuleError):
        apply_forward(CMALL, RuleInstance.make("axiom", ("x", "y"), fresh={"x": A, "y": B}), [])


def _has(apps, rule, premises=None):
    for app in apps:
        if app.instance.rule != rule:
            continue
        if premises is None or Counter(canonicalize(p) for p in app.premises) == \
                Counter(canonicalize(p) for p in premises):
            return True
    return False


def test_backward_examples():
    assert _has(enumerate_backward(CMALL, ms("{x: a, y: a~}")), "axiom", [])
    goal = ms("{o: 1, p: bot $ bot}")
    prem = ms("{o: 1, b1: bot}{o, b2: bot}")
    assert _has(enumerate_backward(CMALL, goal), "cpar", [prem])
    assert _has(enumerate_backward(CMALL, ms("{x: 1}{y: 1}")), "s", [ms("{x: 1}"), ms("{y: 1}")])


def test_variant_gating():
    goal = ms("{x: A~, y: A % bot}{x, z: 1 % 1}")
    for app in enumerate_backward(NAIVE, goal):
        assert app.instance.rule in NAIVE_RULES
    assert NAIVE_RULES <= CMALL_RULES
    for rule in ("tensor", "ctimes", "with", "plus1", "top", "shared", "unshared"):
        assert rule not in NAIVE_RULES


GOALS = [
    "{a: A~ % B~, b: A $ B}", "{o: 1, p: bot $ bot}", "{a: A~, b: A^s $ A^s}",
    "{a: (A $ (B & C))~, b: (A $ B) & (A $ C)}", "{x: A, y: A~}{x, z: 1}",
    "{a: A~ & B~, b: A + B}", "{a: A, t: top}", "{x: A * B, y: B~ % A~}",
    "{x: A~, y: A @ B}{x, z: B~}", "{u: 1}{u}{v: bot, w: 1}",
]


@pytest.mark.parametrize("text", GOALS)
def test_backward_roundtrip(text):
    goal = ms(text)
    target = canonicalize(goal)
    for variant in (CMALL, NAIVE):
        try:
            apps = enumerate_backward(variant, goal)
        except RuleError:
            continue
        for app in apps:
            out = apply_forward(variant, app.instance, list(app.premises))
            assert canonicalize(out) == target, app.instance


formula_pool = st.sampled_from([A, B, Atom("A", True), ONE, BOT, parse_formula("A % B")])


@st.composite
def forward_cases(draw):
    """A random forward application that succeeds."""
    rule = draw(st.sampled_from(["par", "cpar", "bot", "plus1", "plus2", "c", "d", "s",
                                 "tensor", "ctimes", "with", "unshared", "shared"]))
    p1 = draw(multisequents(max_occ=4, max_seqs=3, formula=formula_pool))
    p2 = draw(multisequents(max_occ=3, max_seqs=2, formula=formula_pool)).rename(
        {x: "y" + x[1:] for x in ("x0", "x1", "x2")})
    labels = list(p1.labels)
    pick = lambda: draw(st.sampled_from(labels))
    seq = lambda: tuple(sorted(draw(st.sampled_from(list(p1.sequents)))))
    if rule in ("par", "cpar"):
        fa, fb = draw(formula_pool), draw(formula_pool)
        chosen = draw(st.lists(st.sampled_from(list(p1.sequents)), min_size=1, max_size=3, unique=True))
        rest = list((Counter(p1.sequents) - Counter(chosen)).elements())
        if rule == "par":
            seqs = rest + [s | {"a", "b"} for s in chosen]
        else:
            seqs = rest + [s | {"a"} for s in chosen] + [s | {"b"} for s in chosen]
        conn = Conn.PAR if rule == "par" else Conn.CPAR
        inst = RuleInstance.make(rule, ("a", "b", "n"), fresh={"n": Bin(conn, fa, fb)})
        prem = [Multisequent({**p1.occ, "a": fa, "b": fb}, seqs)]
    elif rule == "shared":
        copy = {x: "w" + x for x in labels}
        seqs = [s | {"a"} for s in p1.sequents]
        occ = {**p1.occ, "a": draw(formula_pool)}
        principal = ("a",)
        if draw(st.booleans()):
            seqs += [frozenset(copy[x] for x in s) | {"b"} for s in p1.sequents]
            occ.update({copy[x]: p1.formula(x) for x in labels}, b=draw(formula_pool))
            principal = ("a", "b")
        else:
            copy = {}
        inst = RuleInstance.make("shared", principal, mapping={v: k for k, v in copy.items()})
        prem = [Multisequent(occ, seqs)]
    elif rule == "bot":
        parts = draw(st.lists(st.sampled_from(list(p1.sequents)), min_size=1, max_size=2, unique=True))
        inst = RuleInstance.make("bot", ("n",), parts, fresh={"n": BOT})
        prem = [p1]
    elif rule in ("plus1", "plus2"):
        a = pick()
        other = draw(formula_pool)
        f = Bin(Conn.PLUS, p1.formula(a), other) if rule == "plus1" else Bin(Conn.PLUS, other, p1.formula(a))
        inst = RuleInstance.make(rule, (a, "n"), fresh={"n": f})
        prem = [p1]
    elif rule == "c":
        inst, prem = RuleInstance.make("c", (), [seq()]), [p1]
    elif rule == "d":
        inst, prem = RuleInstance.make("d", (pick(),), [seq()]), [p1]
    elif rule == "unshared":
        inst, prem = RuleInstance.make("unshared", (pick(),)), [p1]
    elif rule == "s":
        inst, prem = RuleInstance.make("s"), [p1, p2]
    elif rule == "with":
        a = pick()
        copy = {x: "w" + x for x in labels if x != a}
        b = "wb"
        p2 = p1.rename({**copy, a: b}).with_formulas({b: draw(formula_pool)})
        f = Bin(Conn.WITH, p1.formula(a), p2.formula(b))
        inst = RuleInstance.make("with", (a, b, "n"), mapping={v: k for k, v in copy.items()}, fresh={"n": f})
        prem = [p1, p2]
    else:
        a, b = pick(), draw(st.sampled_from(list(p2.labels)))
        conn = Conn.TENSOR if rule == "tensor" else Conn.CTIMES
        inst = RuleInstance.make(rule, (a, b, "n"), fresh={"n": Bin(conn, p1.formula(a), p2.formula(b))})
        prem = [p1, p2]
    try:
        concl = apply_forward(CMALL, inst, prem)
    except RuleError:
        assume(False)
    return inst, prem, concl


@settings(max_examples=300, deadline=None)
@given(forward_cases())
def test_backward_completeness(case):
    inst, prem, concl = case
    event(inst.rule)
    assert _has(enumerate_backward(CMALL, concl), inst.rule, prem)
