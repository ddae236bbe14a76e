"""Proof transformations: principal cut reductions, moving a cut above the
last rule of one premise, permuting asynchronous rules downwards and
splitting proofs of disjoint conclusions.

New subtrees are rebuilt through ``apply_forward`` and then renamed onto
the original conclusion, so every transformation is checked as it is made.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from .calculus import FreshLabels, RuleError, RuleInstance, Variant, apply_forward
from .proof import ProofTree, all_labels, proof_height, relabel_proof, rename_instance
from .syntax import Bin, Conn, Multisequent, isomorphism

Path = tuple[int, ...]


class TransformError(ValueError):
    """The addressed node does not match the transformation's pattern."""


class CutElimError(RuntimeError):
    def __init__(self, message: str, partial: ProofTree | None = None):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class ReductionStep:
    kind: str  # Axiom, OneBot, TensorPar, CTimesCPar, WithPlus, SharedUnshared, CommuteCut, Search
    location: Path


# --------------------------------------------------------------------------
# tree plumbing

def node_at(tree: ProofTree, path: Path) -> ProofTree:
    for i in path:
        tree = tree.children[i]
    return tree


def replace_at(tree: ProofTree, path: Path, new: ProofTree) -> ProofTree:
    if not path:
        return new
    i, rest = path[0], path[1:]
    kids = list(tree.children)
    kids[i] = replace_at(kids[i], rest, new)
    return ProofTree(tree.conclusion, tree.rule, tuple(kids))


def build(variant: Variant, inst: RuleInstance, children: Sequence[ProofTree]) -> ProofTree:
    """A node whose conclusion is computed from its children."""
    concl = apply_forward(variant, inst, [c.conclusion for c in children])
    return ProofTree(concl, inst, tuple(children))


def fit(tree: ProofTree, target: Multisequent) -> ProofTree:
    """Rename ``tree`` so that its conclusion is exactly ``target``."""
    if tree.conclusion == target:
        return tree
    iso = isomorphism(tree.conclusion, target)
    if iso is None:
        raise TransformError(f"rewritten conclusion {tree.conclusion} is not {target}")
    labels = all_labels(tree)
    fresh = FreshLabels(labels | set(target.labels), prefix="k")
    mapping = dict(iso)
    for x in sorted(labels):
        if x not in mapping:
            mapping[x] = fresh() if x in target.labels else x
    return relabel_proof(tree, mapping)


def _internal(tree: ProofTree) -> set[str]:
    return all_labels(tree) - set(tree.conclusion.labels)


def disjoin(move: ProofTree, avoid: set[str]) -> ProofTree:
    """Rename the internal labels of ``move`` away from ``avoid``."""
    clash = _internal(move) & avoid
    if not clash:
        return move
    fresh = FreshLabels(avoid | all_labels(move), prefix="k")
    return relabel_proof(move, {x: fresh() for x in sorted(clash)})


def fresh_copy(tree: ProofTree, avoid: set[str]) -> tuple[ProofTree, dict[str, str]]:
    """Rename every label of ``tree`` to a new one; returns (copy, copy label -> original)."""
    labels = all_labels(tree)
    fresh = FreshLabels(avoid | labels, prefix="k")
    m = {x: fresh() for x in sorted(labels)}
    copy = relabel_proof(tree, m)
    return copy, {m[x]: x for x in tree.conclusion.labels}


def introduces(tree: ProofTree, label: str) -> bool:
    """Does the last rule create ``label`` or change its formula?"""
    if label not in tree.conclusion.occ:
        return False
    f = tree.conclusion.formula(label)
    for c in tree.children:
        if label in c.conclusion.occ and c.conclusion.formula(label) == f:
            return False
    if tree.rule.rule == "with" and tree.rule.principal[2] != label:
        return False
    return True


def _separate(left: ProofTree, right: ProofTree) -> tuple[ProofTree, ProofTree]:
    right = disjoin(right, all_labels(left))
    left = disjoin(left, all_labels(right))
    return left, right


# --------------------------------------------------------------------------
# principal reductions

def _cut_sides(cut: ProofTree):
    """Both orientations (left, right, a, b) of a cut node."""
    if cut.rule.rule != "cut":
        raise TransformError("not a cut node")
    left, right = cut.children
    a, b = cut.rule.principal
    return [(left, right, a, b), (right, left, b, a)]


def _cut(variant, p1: ProofTree, x: str, p2: ProofTree, y: str) -> ProofTree:
    return build(variant, RuleInstance.make("cut", (x, y)), [p1, p2])


def compose(p1: ProofTree, x: str, p2: ProofTree, y: str, variant: Variant = Variant.CMALL) -> ProofTree:
    """Cut ``p1`` on ``x`` against ``p2`` on ``y``, renaming ``p1`` apart first."""
    p1, back = fresh_copy(p1, all_labels(p2))
    (x1,) = [k for k, v in back.items() if v == x]
    return _cut(variant, p1, x1, p2, y)


def _reduce_oriented(variant, left, right, a, b):
    lr, rr = left.rule.rule, right.rule.rule
    if lr == "axiom" and not left.children:
        (other,) = [x for x in left.conclusion.labels if x != a]
        moved = disjoin(right, {other})
        return "Axiom", relabel_proof(moved, {b: other})
    if not (introduces(left, a) and introduces(right, b)):
        return None
    if lr == "one" and rr == "bot" and right.rule.principal == (b,):
        return "OneBot", right.children[0]
    if lr in ("par", "cpar") and rr == {"par": "tensor", "cpar": "ctimes"}[lr] and left.rule.principal[2] == a \
            and right.rule.principal[2] == b:
        x, y, _ = left.rule.principal
        (prem,) = left.children
        t1, t2 = right.children
        u, w, _ = right.rule.principal
        prem, t1 = _separate(prem, t1)
        prem, t2 = _separate(prem, t2)
        t1, t2 = _separate(t1, t2)
        first = _cut(variant, prem, y, t1, u)
        return ("TensorPar" if lr == "par" else "CTimesCPar"), _cut(variant, first, x, t2, w)
    if lr == "with" and rr in ("plus1", "plus2") and left.rule.principal[2] == a:
        x, y, _ = left.rule.principal
        w1, w2 = left.children
        (prem,) = right.children
        comp = right.rule.principal[0]
        side, occ = (w2, y) if rr == "plus1" else (w1, x)
        side, prem = _separate(side, prem)
        return "WithPlus", _cut(variant, side, occ, prem, comp)
    if lr == "shared" and rr == "unshared" and right.rule.principal == (b,) and a in left.rule.principal:
        (u,) = left.children
        (p,) = right.children
        ctx = [s - {b} for s in p.conclusion.sequents if b in s]
        if len(ctx) != 1:
            return None
        phi = ctx[0]
        u, p = _separate(u, p)
        inner = _cut(variant, u, a, p, b)
        principal = (set(left.rule.principal) - {a}) | phi
        if not principal:
            return None
        m = {k: v for k, v in left.rule.mapping if k in inner.conclusion.occ}
        inst = RuleInstance.make("shared", sorted(principal), mapping=m)
        return "SharedUnshared", build(variant, inst, [inner])
    return None


def reduce_principal(tree: ProofTree, at: Path = (), variant: Variant = Variant.CMALL,
                     log: list[ReductionStep] | None = None) -> ProofTree:
    cut = node_at(tree, at)
    for left, right, a, b in _cut_sides(cut):
        try:
            res = _reduce_oriented(variant, left, right, a, b)
        except RuleError as exc:
            raise TransformError(f"reduction failed: {exc}") from None
        if res is not None:
            kind, new = res
            if log is not None:
                log.append(ReductionStep(kind, at))
            return replace_at(tree, at, fit(new, cut.conclusion))
    raise TransformError("no principal reduction applies at this cut")


# --------------------------------------------------------------------------
# moving a cut above a rule

def _expand_contexts(ctxs, c: str, deltas):
    out = []
    for ctx in ctxs:
        if c in ctx:
            out.extend(tuple(sorted((set(ctx) - {c}) | d)) for d in deltas)
        else:
            out.append(tuple(ctx))
    return out


def _commute_oriented(variant, top: ProofTree, other: ProofTree, c: str, b: str) -> list[ProofTree] | None:
    """Rebuild cut(top, other) with top's last rule moved below the cut.

    Returns [new subtree, new cut nodes...], or None when the rule acts on
    the cut occurrence."""
    if introduces(top, c) or not top.children:
        return None
    top, other = _separate(top, other)
    r = top.rule
    deltas = [s - {b} for s in other.conclusion.sequents if b in s]
    name = r.rule
    kids = list(top.children)
    if name == "with":
        w1, w2 = kids
        inv = {v: k for k, v in r.mapping}
        if c not in w1.conclusion.occ:
            return None
        c2 = inv[c]
        copy, back = fresh_copy(other, all_labels(top) | all_labels(other))
        b2 = next(k for k, v in back.items() if v == b)
        cut1 = _cut(variant, w1, c, other, b)
        cut2 = _cut(variant, w2, c2, copy, b2)
        m = {k: v for k, v in r.mapping if k != c2}
        m.update({k: v for k, v in back.items() if v != b})
        inst = RuleInstance.make("with", r.principal, mapping=m, fresh=r.fresh_map)
        return [build(variant, inst, [cut1, cut2]), cut1, cut2]
    idx = [i for i, k in enumerate(kids) if c in k.conclusion.occ]
    if len(idx) != 1:
        return None
    i = idx[0]
    new_cut = _cut(variant, kids[i], c, other, b)
    kids[i] = new_cut
    if name in ("tensor", "ctimes", "s", "cut", "par", "plus1", "plus2", "cpar"):
        return [build(variant, r, kids), new_cut]
    if name in ("bot", "top"):
        inst = RuleInstance(name, r.principal, tuple(_expand_contexts(r.partitions, c, deltas)), r.mapping, r.fresh)
        return [build(variant, inst, kids), new_cut]
    if name == "c":
        (ctx,) = r.partitions
        cur = new_cut
        for t in _expand_contexts([ctx], c, deltas):
            cur = build(variant, RuleInstance.make("c", (), [t]), [cur])
        return [cur, new_cut]
    if name == "d":
        (x,) = r.principal
        (ctx,) = r.partitions
        cur = new_cut
        if x == c:
            # the cut occurrence was added to ctx: rebuild ctx + delta_j for each j
            for _ in range(len(deltas) - 1):
                cur = build(variant, RuleInstance.make("c", (), [ctx]), [cur])
            for d in deltas:
                target = set(ctx)
                for y in sorted(d):
                    cur = build(variant, RuleInstance.make("d", (y,), [tuple(sorted(target))]), [cur])
                    target.add(y)
            return [cur, new_cut]
        for t in _expand_contexts([ctx], c, deltas):
            cur = build(variant, RuleInstance.make("d", (x,), [t]), [cur])
        return [cur, new_cut]
    if name in ("shared", "unshared"):
        prem = top.children[0].conclusion
        if name == "unshared":
            touched = any(c in s for s in prem.sequents if r.principal[0] in s)
        else:
            touched = any(c in s and s & set(r.principal) for s in prem.sequents)
        if touched:
            return None
        return [build(variant, r, kids), new_cut]
    return None


def commute_cut(tree: ProofTree, at: Path = (), side: int | None = None,
                variant: Variant = Variant.CMALL, log: list[ReductionStep] | None = None) -> ProofTree:
    """Move the last rule of one cut premise below the cut."""
    cut = node_at(tree, at)
    orientations = _cut_sides(cut)
    if side is not None:
        orientations = [orientations[side]]
    for top, other, c, b in orientations:
        try:
            res = _commute_oriented(variant, top, other, c, b)
        except (RuleError, ValueError):
            res = None
        if res is not None:
            new = fit(res[0], cut.conclusion)
            if log is not None:
                log.append(ReductionStep("CommuteCut", at))
            return replace_at(tree, at, new)
    raise TransformError("the cut cannot be moved above either premise's last rule")


def commute_cut_heights(tree: ProofTree, at: Path = (), side: int | None = None,
                        variant: Variant = Variant.CMALL) -> tuple[int, int]:
    """(height of the original cut subtree, largest height of a cut subtree created)."""
    cut = node_at(tree, at)
    orientations = _cut_sides(cut)
    if side is not None:
        orientations = [orientations[side]]
    for top, other, c, b in orientations:
        try:
            res = _commute_oriented(variant, top, other, c, b)
        except (RuleError, ValueError):
            res = None
        if res is not None:
            return proof_height(cut), max(proof_height(t) for t in res[1:])
    raise TransformError("the cut cannot be moved above either premise's last rule")


# --------------------------------------------------------------------------
# the elimination loop

def _innermost_cut(tree: ProofTree, path: Path = ()) -> Path | None:
    for i, c in enumerate(tree.children):
        found = _innermost_cut(c, path + (i,))
        if found is not None:
            return found
    return path if tree.rule.rule == "cut" else None


@dataclass
class EliminationResult:
    proof: ProofTree
    steps: list[ReductionStep] = field(default_factory=list)


def eliminate_cuts(tree: ProofTree, step_limit: int = 100_000, variant: Variant = Variant.CMALL,
                   fallback: bool = True) -> EliminationResult:
    """Remove every cut, innermost first.

    Each cut is reduced when both premises end with the dual rules on the
    cut formula, and otherwise moved above the last rule of a premise.  If
    neither applies and ``fallback`` is set, the cut's conclusion is
    re-proved by cut-free search."""
    steps: list[ReductionStep] = []
    while True:
        at = _innermost_cut(tree)
        if at is None:
            return EliminationResult(tree, steps)
        if len(steps) >= step_limit:
            raise CutElimError(f"step limit {step_limit} exceeded", tree)
        try:
            tree = reduce_principal(tree, at, variant, steps)
            continue
        except TransformError:
            pass
        cut = node_at(tree, at)
        left, right = cut.children
        a, b = cut.rule.principal
        order = [0, 1] if not introduces(left, a) else [1, 0]
        moved = False
        for side in order:
            try:
                tree = commute_cut(tree, at, side, variant, steps)
                moved = True
                break
            except TransformError:
                continue
        if moved:
            continue
        if not fallback:
            raise CutElimError(f"no reduction applies to the cut at {at}", tree)
        from .search import Proved, SearchLimits, prove

        out = prove(variant, cut.conclusion, SearchLimits(max_structural_run=6))
        if not isinstance(out, Proved):
            raise CutElimError(f"no reduction applies at {at} and search gave {out}", tree)
        steps.append(ReductionStep("Search", at))
        tree = replace_at(tree, at, fit(out.proof, cut.conclusion))


# --------------------------------------------------------------------------
# asynchronous permutation

ASYNC_RULES = ("par", "with", "cpar")


def _subst_contexts(ctxs, n: str, x: str, y: str, kind: str) -> list[tuple[str, ...]]:
    out = []
    for ctx in ctxs:
        s = set(ctx)
        if n not in s:
            out.append(tuple(sorted(s)))
        elif kind == "par":
            out.append(tuple(sorted((s - {n}) | {x, y})))
        else:
            out.append(tuple(sorted((s - {n}) | {x})))
            out.append(tuple(sorted((s - {n}) | {y})))
    return out


def _lift_instances(r: RuleInstance, n: str, x: str, y: str, kind: str) -> list[RuleInstance]:
    """Instances replacing ``r`` once the par/cpar step on ``n`` is moved below it."""
    name = r.rule
    if name in ("bot", "top"):
        return [RuleInstance(name, r.principal, tuple(_subst_contexts(r.partitions, n, x, y, kind)),
                             r.mapping, r.fresh)]
    if name == "c":
        return [RuleInstance.make("c", (), [t]) for t in _subst_contexts(r.partitions, n, x, y, kind)]
    if name == "d":
        (z,) = r.principal
        (ctx,) = r.partitions
        if z != n:
            return [RuleInstance.make("d", (z,), [t]) for t in _subst_contexts([ctx], n, x, y, kind)]
        if kind == "par":
            return [RuleInstance.make("d", (x,), [ctx]), RuleInstance.make("d", (y,), [tuple(ctx) + (x,)])]
        return [RuleInstance.make("c", (), [ctx]), RuleInstance.make("d", (x,), [ctx]),
                RuleInstance.make("d", (y,), [ctx])]
    if n in r.principal or any(n in pair for pair in r.mapping):
        raise TransformError(f"rule {name} acts on the permuted occurrence")
    return [r]


def _created(tree: ProofTree) -> set[str]:
    below = set().union(*(c.conclusion.labels for c in tree.children)) if tree.children else set()
    return set(tree.conclusion.labels) - below


def _swap(variant, parent: ProofTree, kids: list[ProofTree], i: int, n: str) -> ProofTree:
    """``kids[i]`` ends with the asynchronous step on ``n``; move that step below ``parent``'s rule."""
    r = parent.rule
    others = [k for j, k in enumerate(kids) if j != i]
    # the components of the lifted step are internal to it and may clash with a sibling
    outside = set().union(*(all_labels(o) for o in others)) if others else set()
    intro_node = disjoin(kids[i], outside | _created(parent))
    intro = intro_node.rule
    if r.rule in ("shared", "unshared"):
        prem = kids[i].conclusion
        if r.rule == "unshared" and any(n in s and r.principal[0] in s for s in prem.sequents):
            raise TransformError("^u acts on the permuted occurrence")
        if r.rule == "shared" and (n in r.mapping_map.values()):
            raise TransformError("^s copies the permuted occurrence")
    if intro.rule in ("par", "cpar"):
        (t,) = intro_node.children
        avoid = set().union(*(all_labels(o) for o in others)) if others else set()
        t = disjoin(t, avoid | _created(parent))
        x, y, _ = intro.principal
        new_kids = list(kids)
        new_kids[i] = t
        insts = _lift_instances(r, n, x, y, intro.rule)
        cur = build(variant, insts[0], new_kids)
        for inst in insts[1:]:
            cur = build(variant, inst, [cur])
        return fit(build(variant, intro, [cur]), parent.conclusion)
    # intro is a with step: the parent's rule is duplicated over both copies
    t1, t2 = intro_node.children
    x, y, _ = intro.principal
    m = intro.mapping_map  # copy in t2 -> original in t1
    inv = {v: k for k, v in m.items()}
    avoid = set().union(*(all_labels(o) for o in others)) if others else set()
    avoid |= _created(parent)
    t1 = disjoin(t1, avoid)
    t2 = disjoin(t2, avoid | all_labels(t1))
    kids1 = list(kids)
    kids1[i] = t1
    r1 = rename_instance(r, {n: x})
    side1 = build(variant, r1, kids1)
    taken = avoid | all_labels(t1) | all_labels(t2) | all_labels(side1)
    rho = dict(inv)
    rho[n] = y
    kids2 = list(kids)
    kids2[i] = t2
    back: dict[str, str] = {}
    for j in range(len(kids)):
        if j == i:
            continue
        copy, cb = fresh_copy(kids[j], taken)
        taken |= all_labels(copy)
        kids2[j] = copy
        for k, v in cb.items():
            rho[v] = k
            back[k] = v
    fresh = FreshLabels(taken, prefix="k")
    for z in sorted(_created(parent)):
        rho[z] = fresh()
        back[rho[z]] = z
    r2 = rename_instance(r, rho)
    side2 = build(variant, r2, kids2)
    full = {**m, **back}
    mapping = {k: full[k] for k in side2.conclusion.labels if k != y}
    inst = RuleInstance.make("with", intro.principal, mapping=mapping, fresh=intro.fresh_map)
    return fit(build(variant, inst, [side1, side2]), parent.conclusion)


def _permute(variant, tree: ProofTree, n: str) -> ProofTree:
    if introduces(tree, n):
        if tree.rule.rule in ASYNC_RULES and tree.rule.principal[2] == n:
            return tree
        raise TransformError(f"{n!r} is introduced by rule {tree.rule.rule}")
    kids = list(tree.children)
    if tree.rule.rule == "with":
        inv = {v: k for k, v in tree.rule.mapping}
        kids[0] = _permute(variant, kids[0], n)
        kids[1] = _permute(variant, kids[1], inv[n])
        return _swap_both(variant, tree, kids, n)
    idx = [i for i, k in enumerate(kids) if n in k.conclusion.occ]
    if len(idx) != 1:
        raise TransformError(f"cannot trace {n!r} through rule {tree.rule.rule}")
    (i,) = idx
    kids[i] = _permute(variant, kids[i], n)
    return _swap(variant, tree, kids, i, n)


def _swap_both(variant, parent: ProofTree, kids: list[ProofTree], n: str) -> ProofTree:
    """``parent`` is a with step whose two premises both end with the step on ``n`` (and its copy)."""
    w = parent.rule
    c1, c2 = kids
    i1, i2 = c1.rule, c2.rule
    if i1.rule != i2.rule:
        raise TransformError("copies introduced by different rules")
    if i1.rule == "with":
        raise TransformError("nested with permutation is not supported")
    (t1,) = c1.children
    (t2,) = c2.children
    t2 = disjoin(t2, all_labels(t1) | _created(parent))
    t1 = disjoin(t1, all_labels(t2) | _created(parent))
    x1, y1, _ = i1.principal
    x2, y2, _ = i2.principal
    m = {k: v for k, v in w.mapping if k in t2.conclusion.occ}
    m.update({x2: x1, y2: y1})
    inner = build(variant, RuleInstance.make("with", w.principal, mapping=m, fresh=w.fresh_map), [t1, t2])
    return fit(build(variant, i1, [inner]), parent.conclusion)


def permute_async_down(tree: ProofTree, occ: str, variant: Variant = Variant.CMALL) -> ProofTree:
    """A proof of the same conclusion whose last rule is the par/with/cpar step on ``occ``."""
    if occ not in tree.conclusion.occ:
        raise TransformError(f"{occ!r} is not in the conclusion")
    f = tree.conclusion.formula(occ)
    if not (isinstance(f, Bin) and f.conn in (Conn.PAR, Conn.WITH, Conn.CPAR)):
        raise TransformError(f"{f} is not asynchronous")
    try:
        return _permute(variant, tree, occ)
    except RuleError as exc:
        raise TransformError(f"permutation failed: {exc}") from None


# --------------------------------------------------------------------------
# separability

def _components_touching(ms: Multisequent, labels: set[str]) -> Multisequent | None:
    parts = [c for c in ms.components() if set(c.labels) & labels]
    if not parts:
        return None
    out = parts[0]
    for p in parts[1:]:
        out = out.union(p)
    return out


def _restrict(variant, tree: ProofTree, part: Multisequent) -> ProofTree:
    """A proof of ``part``, a union of components of ``tree``'s conclusion."""
    if tree.conclusion == part:
        return tree
    labels = set(part.labels)
    r = tree.rule
    kids = tree.children
    if r.rule == "s":
        subs = []
        for k in kids:
            piece = _components_touching(k.conclusion, labels)
            if piece is not None:
                subs.append(_restrict(variant, k, piece))
        if len(subs) == 1:
            return subs[0]
        return build(variant, r, subs)
    below = _sequents_of(kids)
    new_seqs = _sequents_of([tree]) - below
    touched = set(r.principal) | {x for c in r.partitions for x in c} | {x for x, _ in r.fresh} \
        | {x for pair in r.mapping for x in pair}
    acts = any(s & labels for s in new_seqs.elements()) or bool(touched & labels)
    if not acts:
        for k in kids:
            piece = _components_touching(k.conclusion, labels)
            if piece is not None and labels <= set(k.conclusion.labels):
                return _restrict(variant, k, piece)
        raise TransformError("cannot locate component in premises")
    if r.rule == "with":
        raise TransformError("splitting through a with step is not supported")
    pieces = []
    for k in kids:
        piece = _components_touching(k.conclusion, labels | touched)
        if piece is None:
            raise TransformError("premise has no part in the component")
        pieces.append(_restrict(variant, k, piece))
    out = build(variant, r, pieces)
    if out.conclusion != part:
        raise TransformError("restricted step does not give the component")
    return out


def _sequents_of(trees) -> Counter:
    c: Counter = Counter()
    for t in trees:
        c.update(t.conclusion.sequents)
    return c


def split_disjoint(tree: ProofTree, variant: Variant = Variant.CMALL) -> list[ProofTree]:
    """One proof per occurrence-connected component of the conclusion."""
    comps = tree.conclusion.components()
    if len(comps) <= 1:
        return [tree]
    try:
        return [_restrict(variant, tree, c) for c in comps]
    except RuleError as exc:
        raise TransformError(f"split failed: {exc}") from None
