"""Random proofs for the commutation tests: a base proof with rules stacked under it."""

from __future__ import annotations

from hypothesis import strategies as st

from cmall.calculus import EnumOptions, FreshLabels, RuleError, RuleInstance, Variant
from cmall.cutelim import build, fresh_copy
from cmall.proof import ProofTree, all_labels
from cmall.search import Proved, SearchLimits, prove
from cmall.syntax import BOT, Bin, Conn, parse_formula, parse_multisequent

CMALL = Variant.CMALL
_LIM = SearchLimits(enum=EnumOptions(atomic_axioms=True))
_cache: dict[str, ProofTree] = {}


def proof_of(text: str) -> ProofTree:
    if text not in _cache:
        out = prove(CMALL, parse_multisequent(text), _LIM)
        assert isinstance(out, Proved), text
        _cache[text] = out.proof
    return _cache[text]


SIDE_PROOFS = ["{e: C, f: C~}", "{g: 1}", "{h: C~ % D~, i: D * C}"]


def _try(inst, kids):
    try:
        return build(CMALL, inst, kids)
    except RuleError:
        return None


def _extra(tree: ProofTree, keep: str, inst: RuleInstance) -> int:
    """Upper bound on the height that lifting ``inst`` above the step on ``keep`` adds.

    Binary rules cost one: the other branch is copied into both sides, and
    when it is the taller branch the lifted proof is one step higher."""
    conn = tree.conclusion.formula(keep).conn
    if inst.rule in ("s", "tensor"):
        return 1
    if inst.rule == "d" and inst.principal == (keep,):
        return {Conn.PAR: 1, Conn.CPAR: 2}.get(conn, 0)
    if inst.rule == "c" and keep in inst.partitions[0] and conn is Conn.CPAR:
        return 1
    return 0


def wrap(draw, tree: ProofTree, keep: str, steps: int, one_for_one: bool = True) -> tuple[ProofTree, int]:
    """Stack up to ``steps`` random rules under ``tree`` that never act on ``keep``
    as a principal connective.

    Returns the new tree and how many extra rules moving the step on ``keep``
    back down may add to the height.  With ``one_for_one`` every choice with a
    cost (binary rules, cloning a cpar's sequent, moving a par or cpar with
    (d)) is skipped, so each lifted rule is replaced by exactly one rule."""
    extra = 0
    for _ in range(steps):
        ms = tree.conclusion
        fresh = FreshLabels(all_labels(tree), prefix="w")
        kind = draw(st.sampled_from(["c", "bot", "d", "s", "tensor", "plus"]))
        seqs = list(ms.sequents)
        new = None
        if kind == "c":
            new = _try(RuleInstance.make("c", (), [draw(st.sampled_from(seqs))]), [tree])
        elif kind == "bot":
            parts = draw(st.lists(st.sampled_from(seqs), min_size=1, max_size=2, unique=True))
            n = fresh()
            new = _try(RuleInstance.make("bot", (n,), parts, fresh={n: BOT}), [tree])
        elif kind == "d" and len(seqs) > 1:
            x = draw(st.sampled_from(list(ms.labels)))
            target = draw(st.sampled_from(seqs))
            new = _try(RuleInstance.make("d", (x,), [target]), [tree])
        elif kind == "s":
            side, _ = fresh_copy(proof_of(draw(st.sampled_from(SIDE_PROOFS))), all_labels(tree))
            new = _try(RuleInstance.make("s"), [tree, side])
        elif kind == "tensor":
            side, _ = fresh_copy(proof_of(draw(st.sampled_from(SIDE_PROOFS))), all_labels(tree))
            cands = [x for x in ms.labels if x != keep]
            if cands:
                a = draw(st.sampled_from(cands))
                b = draw(st.sampled_from(list(side.conclusion.labels)))
                n = fresh()
                f = Bin(Conn.TENSOR, ms.formula(a), side.conclusion.formula(b))
                new = _try(RuleInstance.make("tensor", (a, b, n), fresh={n: f}), [tree, side])
        elif kind == "plus":
            cands = [x for x in ms.labels if x != keep]
            if cands:
                a = draw(st.sampled_from(cands))
                n = fresh()
                f = Bin(Conn.PLUS, ms.formula(a), parse_formula("C"))
                new = _try(RuleInstance.make("plus1", (a, n), fresh={n: f}), [tree])
        if new is not None:
            cost = _extra(tree, keep, new.rule)
            if one_for_one and cost:
                continue
            extra += cost
            tree = new
    return tree, extra
