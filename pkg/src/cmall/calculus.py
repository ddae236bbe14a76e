"""Rule schemas of the two calculi, applied forwards and enumerated backwards.

Every rule acts on labelled occurrences.  A rule instance records the
principal occurrences, any context lists it needs (``partitions``), the
copy-identification map for the rules that merge superscripted copies
(``&`` and ``^s``) and the formulas of occurrences it introduces
(``fresh``).  Forward application is the checker's ground truth;
backward enumeration drives proof search.
"""

from __future__ import annotations

import enum
import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .syntax import (
    BOT, ONE, TOP, Atom, Bin, Conn, Formula, Mod, ModKind,
    Multisequent, canonicalize, negate,
)


class Variant(enum.Enum):
    CMALL = "cmall"
    NAIVE = "naive"


CMALL_RULES = frozenset({
    "axiom", "one", "bot", "top", "tensor", "par", "ctimes", "cpar", "plus1",
    "plus2", "with", "c", "d", "s", "cut", "shared", "unshared", "empty",
})
NAIVE_RULES = frozenset({"axiom", "one", "bot", "par", "cpar", "d", "s", "c", "cut", "empty"})
STRUCTURAL = frozenset({"c", "d", "s"})
ASYNC_CONNS = {Conn.PAR: "par", Conn.WITH: "with", Conn.CPAR: "cpar"}

RULE_ALIASES = {"ax": "axiom", "w": "c", "1": "one", "⊥": "bot"}


def rules_of(variant: Variant) -> frozenset[str]:
    return CMALL_RULES if variant is Variant.CMALL else NAIVE_RULES


class RuleError(ValueError):
    """A rule instance does not fit its premises."""


def dual(f: Formula, variant: Variant = Variant.CMALL) -> Formula:
    """Negation of the variant: in the naive calculus par and cpar are dual."""
    if variant is Variant.CMALL:
        return negate(f)
    if isinstance(f, Bin):
        swap = {Conn.PAR: Conn.CPAR, Conn.CPAR: Conn.PAR}
        if f.conn not in swap:
            raise RuleError(f"connective {f.conn.name} is not part of the naive calculus")
        return Bin(swap[f.conn], dual(f.right, variant), dual(f.left, variant))
    if isinstance(f, Mod):
        raise RuleError("modalities are not part of the naive calculus")
    return negate(f)


Context = tuple[str, ...]


@dataclass(frozen=True)
class RuleInstance:
    rule: str
    principal: tuple[str, ...] = ()
    partitions: tuple[Context, ...] = ()
    mapping: tuple[tuple[str, str], ...] = ()
    fresh: tuple[tuple[str, Formula], ...] = ()

    @staticmethod
    def make(rule: str, principal: Iterable[str] = (), partitions: Iterable[Iterable[str]] = (),
             mapping: Mapping[str, str] | None = None,
             fresh: Mapping[str, Formula] | None = None) -> "RuleInstance":
        return RuleInstance(
            rule,
            tuple(principal),
            tuple(tuple(sorted(c)) for c in partitions),
            tuple(sorted((mapping or {}).items())),
            tuple(sorted((fresh or {}).items())),
        )

    @property
    def fresh_map(self) -> dict[str, Formula]:
        return dict(self.fresh)

    @property
    def mapping_map(self) -> dict[str, str]:
        return dict(self.mapping)


@dataclass(frozen=True)
class RuleApplication:
    instance: RuleInstance
    premises: tuple[Multisequent, ...]
    conclusion: Multisequent


# --------------------------------------------------------------------------
# forward application

_ARITY = {
    "axiom": (0,), "one": (0,), "empty": (0,), "top": (0, 1), "bot": (1,), "par": (1,),
    "plus1": (1,), "plus2": (1,), "cpar": (1,), "c": (1,), "d": (1,),
    "shared": (1,), "unshared": (1,), "tensor": (2,), "ctimes": (2,), "with": (2,),
    "s": (2,), "cut": (2,),
}


def _need(cond: bool, message: str) -> None:
    if not cond:
        raise RuleError(message)


def _remove_contexts(seqs: Sequence[frozenset[str]], contexts: Iterable[Context]) -> list[frozenset[str]]:
    rest = list(seqs)
    for c in contexts:
        c = frozenset(c)
        _need(c in rest, f"context {{{', '.join(sorted(c))}}} is not a sequent of the premise")
        rest.remove(c)
    return rest


def _split_on(ms: Multisequent, label: str) -> tuple[list[frozenset[str]], list[frozenset[str]]]:
    """Contexts of the sequents containing ``label`` and the other sequents."""
    hit = [s - {label} for s in ms.sequents if label in s]
    rest = [s for s in ms.sequents if label not in s]
    return hit, rest


def _fresh_formula(inst: RuleInstance, label: str) -> Formula:
    fresh = inst.fresh_map
    _need(label in fresh, f"no formula given for new occurrence {label!r}")
    return fresh[label]


def apply_forward(variant: Variant, inst: RuleInstance, premises: Sequence[Multisequent]) -> Multisequent:
    rule = inst.rule
    _need(rule in _ARITY, f"unknown rule {rule!r}")
    _need(rule in rules_of(variant), f"rule {rule!r} is not part of the {variant.value} calculus")
    _need(len(premises) in _ARITY[rule], f"rule {rule!r} takes {_ARITY[rule]} premises, got {len(premises)}")
    if len(premises) == 2:
        shared = set(premises[0].occ) & set(premises[1].occ)
        _need(not shared, f"premises share occurrences {sorted(shared)}")
    return _FORWARD[rule](variant, inst, list(premises))


def _fw_axiom(variant, inst, premises):
    _need(len(inst.principal) == 2, "axiom needs two principal occurrences")
    x, y = inst.principal
    _need(x != y, "axiom occurrences must differ")
    fx, fy = _fresh_formula(inst, x), _fresh_formula(inst, y)
    _need(dual(fx, variant) == fy, f"{fx} and {fy} are not dual")
    return Multisequent({x: fx, y: fy}, [{x, y}])


def _fw_one(variant, inst, premises):
    _need(len(inst.principal) == 1, "rule 1 needs one principal occurrence")
    (x,) = inst.principal
    _need(_fresh_formula(inst, x) == ONE, "rule 1 introduces the constant 1")
    return Multisequent({x: ONE}, [{x}])


def _fw_empty(variant, inst, premises):
    return Multisequent({}, [])


def _fw_top(variant, inst, premises):
    prem = premises[0] if premises else Multisequent({}, [])
    _need(len(inst.principal) == 1, "rule top needs one principal occurrence")
    (t,) = inst.principal
    _need(t not in prem.occ, f"{t!r} already occurs in the premise")
    fresh = inst.fresh_map
    _need(fresh.get(t) == TOP, "rule top introduces the constant top")
    _need(bool(inst.partitions), "rule top needs at least one principal sequent")
    used = set().union(*map(set, inst.partitions))
    _need(t not in used, "top occurrence listed in its own context")
    for x in used:
        _need(x in prem.occ or x in fresh, f"context occurrence {x!r} has no formula")
    for x in fresh:
        _need(x not in prem.occ, f"new occurrence {x!r} already in the premise")
        _need(x == t or x in used, f"new occurrence {x!r} is never used")
    occ = {**prem.occ, **fresh}
    return Multisequent(occ, list(prem.sequents) + [set(c) | {t} for c in inst.partitions])


def _fw_bot(variant, inst, premises):
    (prem,) = premises
    _need(len(inst.principal) == 1, "rule bot needs one principal occurrence")
    (b,) = inst.principal
    _need(b not in prem.occ, f"{b!r} already occurs in the premise")
    _need(_fresh_formula(inst, b) == BOT, "rule bot introduces the constant bot")
    _need(bool(inst.partitions), "rule bot needs at least one principal sequent")
    rest = _remove_contexts(prem.sequents, inst.partitions)
    return Multisequent({**prem.occ, b: BOT}, rest + [set(c) | {b} for c in inst.partitions])


def _binary_new(inst, conn: Conn, a_formula: Formula, b_formula: Formula) -> str:
    n = inst.principal[2]
    f = _fresh_formula(inst, n)
    _need(f == Bin(conn, a_formula, b_formula), f"{n!r} should be {Bin(conn, a_formula, b_formula)}, got {f}")
    return n


def _fw_par(variant, inst, premises):
    (prem,) = premises
    _need(len(inst.principal) == 3, "par needs principal (a, b, new)")
    a, b, _ = inst.principal
    _need(a in prem.occ and b in prem.occ and a != b, "par principal occurrences must be in the premise")
    n = _binary_new(inst, Conn.PAR, prem.formula(a), prem.formula(b))
    _need(n not in prem.occ, f"{n!r} already occurs in the premise")
    ia, ib = prem.containing(a), prem.containing(b)
    _need(ia == ib, "par components must occur in exactly the same sequents")
    occ = {k: v for k, v in prem.occ.items() if k not in (a, b)}
    occ[n] = Bin(Conn.PAR, prem.formula(a), prem.formula(b))
    seqs = [(s - {a, b}) | {n} if a in s else s for s in prem.sequents]
    return Multisequent(occ, seqs)


def _fw_plus(variant, inst, premises):
    (prem,) = premises
    _need(len(inst.principal) == 2, "plus needs principal (a, new)")
    a, n = inst.principal
    _need(a in prem.occ and n not in prem.occ, "plus occurrences misplaced")
    f = _fresh_formula(inst, n)
    _need(isinstance(f, Bin) and f.conn is Conn.PLUS, f"{n!r} must be a plus formula")
    side = f.left if inst.rule == "plus1" else f.right
    _need(side == prem.formula(a), f"{inst.rule}: {prem.formula(a)} is not the chosen summand of {f}")
    occ = {k: v for k, v in prem.occ.items() if k != a}
    occ[n] = f
    return Multisequent(occ, [(s - {a}) | {n} if a in s else s for s in prem.sequents])


def _fw_cpar(variant, inst, premises):
    (prem,) = premises
    _need(len(inst.principal) == 3, "cpar needs principal (a, b, new)")
    a, b, _ = inst.principal
    _need(a in prem.occ and b in prem.occ and a != b, "cpar principal occurrences must be in the premise")
    n = _binary_new(inst, Conn.CPAR, prem.formula(a), prem.formula(b))
    _need(n not in prem.occ, f"{n!r} already occurs in the premise")
    _need(not any(a in s and b in s for s in prem.sequents), "cpar components share a sequent")
    ga, rest = _split_on(prem, a)
    gb = [s - {b} for s in rest if b in s]
    rest = [s for s in rest if b not in s]
    _need(bool(ga) and Counter(ga) == Counter(gb), "cpar premises must pair {G, A} with {G, B}")
    occ = {k: v for k, v in prem.occ.items() if k not in (a, b)}
    occ[n] = Bin(Conn.CPAR, prem.formula(a), prem.formula(b))
    return Multisequent(occ, rest + [g | {n} for g in ga])


def _fw_c(variant, inst, premises):
    (prem,) = premises
    _need(len(inst.partitions) == 1, "rule c clones exactly one sequent")
    (ctx,) = inst.partitions
    _need(frozenset(ctx) in prem.sequents, "cloned sequent is not in the premise")
    return Multisequent(prem.occ, list(prem.sequents) + [ctx])


def _fw_d(variant, inst, premises):
    (prem,) = premises
    _need(len(inst.principal) == 1 and len(inst.partitions) == 1, "rule d needs (occurrence, target sequent)")
    (x,) = inst.principal
    (ctx,) = inst.partitions
    _need(x in prem.occ, f"{x!r} is not in the premise")
    _need(x not in ctx, f"target sequent already contains {x!r}")
    rest = _remove_contexts(prem.sequents, [ctx])
    return Multisequent(prem.occ, rest + [set(ctx) | {x}])


def _fw_s(variant, inst, premises):
    p1, p2 = premises
    _need(not p1.is_empty() and not p2.is_empty(), "rule s joins two non-empty multisequents")
    return p1.union(p2)


def _two_sided(variant, inst, premises, rule: str):
    p1, p2 = premises
    a, b = inst.principal[0], inst.principal[1]
    _need(a in p1.occ, f"{a!r} is not in the left premise")
    _need(b in p2.occ, f"{b!r} is not in the right premise")
    ga, r1 = _split_on(p1, a)
    gb, r2 = _split_on(p2, b)
    occ = {**p1.occ, **p2.occ}
    del occ[a], occ[b]
    if rule == "cut":
        _need(len(inst.principal) == 2, "cut needs principal (a, b)")
        _need(dual(p1.formula(a), variant) == p2.formula(b),
              f"cut formulas {p1.formula(a)} and {p2.formula(b)} are not dual")
        new = [g | d for g in ga for d in gb]
    else:
        _need(len(inst.principal) == 3, f"{rule} needs principal (a, b, new)")
        conn = Conn.TENSOR if rule == "tensor" else Conn.CTIMES
        n = _binary_new(inst, conn, p1.formula(a), p2.formula(b))
        _need(n not in occ, f"{n!r} already occurs in a premise")
        occ[n] = Bin(conn, p1.formula(a), p2.formula(b))
        if rule == "tensor":
            new = [g | d | {n} for g in ga for d in gb]
        else:
            new = [g | {n} for g in ga] + [d | {n} for d in gb]
    return Multisequent.from_sequents(occ, r1 + r2 + new)


def _fw_with(variant, inst, premises):
    p1, p2 = premises
    _need(len(inst.principal) == 3, "with needs principal (a, b, new)")
    a, b, _ = inst.principal
    _need(a in p1.occ and b in p2.occ, "with principal occurrences misplaced")
    n = _binary_new(inst, Conn.WITH, p1.formula(a), p2.formula(b))
    m = inst.mapping_map
    _need(set(m) == set(p2.occ) - {b}, "with: the copy map must cover the right premise")
    _need(sorted(m.values()) == sorted(set(p1.occ) - {a}), "with: the copy map must be onto the left premise")
    for x, y in m.items():
        _need(p2.formula(x) == p1.formula(y), f"with: copy {x!r} of {y!r} has another formula")
    m = {**m, b: n}
    left = Counter((s - {a}) | {n} if a in s else s for s in p1.sequents)
    right = Counter(frozenset(m[x] for x in s) for s in p2.sequents)
    _need(left == right, "with: the premises are not copies of one multisequent")
    occ = {k: v for k, v in p1.occ.items() if k != a}
    occ[n] = Bin(Conn.WITH, p1.formula(a), p2.formula(b))
    return Multisequent(occ, list(left.elements()))


def _fw_unshared(variant, inst, premises):
    (prem,) = premises
    _need(len(inst.principal) == 1, "^u needs one principal occurrence")
    (a,) = inst.principal
    _need(a in prem.occ, f"{a!r} is not in the premise")
    ctx, rest = _split_on(prem, a)
    gamma = set().union(*ctx)
    for s in rest:
        _need(not (s & gamma), "^u: context occurrences must not leave the principal sequents")
    updates: dict[str, Formula] = {x: Mod(ModKind.SHARED, prem.formula(x)) for x in gamma}
    updates[a] = Mod(ModKind.UNSHARED, prem.formula(a))
    return prem.with_formulas(updates)


def shared_groups(seqs: Sequence[frozenset[str]], delta: frozenset[str]):
    """Group the sequents meeting ``delta`` by their delta part.

    Returns (groups, rest) where groups is a list of (delta_part, [gamma parts])
    sorted by delta part; raises RuleError if delta parts overlap."""
    groups: dict[frozenset[str], list[frozenset[str]]] = {}
    rest = []
    for s in seqs:
        part = s & delta
        if part:
            groups.setdefault(part, []).append(s - delta)
        else:
            rest.append(s)
    keys = sorted(groups, key=lambda k: tuple(sorted(k)))
    for k1, k2 in itertools.combinations(keys, 2):
        _need(not (k1 & k2), "^s: delta parts of different groups overlap")
    return [(k, groups[k]) for k in keys], rest


def _fw_shared(variant, inst, premises):
    (prem,) = premises
    delta = frozenset(inst.principal)
    _need(bool(delta) and delta <= set(prem.occ), "^s principal occurrences must be in the premise")
    groups, rest = shared_groups(prem.sequents, delta)
    m = inst.mapping_map
    if len(groups) > 1:
        gammas = [set().union(*gs) for _, gs in groups]
        for g1, g2 in itertools.combinations(gammas, 2):
            _need(not (g1 & g2), "^s: context copies of different groups must be disjoint")
        allg = set().union(*gammas)
        for s in rest:
            _need(not (s & allg), "^s: context copies must not leave the principal sequents")
    for x, y in m.items():
        _need(x in prem.occ and y in prem.occ, f"^s: bad copy pair {x!r} -> {y!r}")
        _need(x not in delta and y not in delta, "^s: principal occurrences are never identified")
        _need(prem.formula(x) == prem.formula(y), f"^s: copy {x!r} of {y!r} has another formula")
        _need(y not in m, "^s: copy map must point at base labels")

    def mapped(s: frozenset[str]) -> frozenset[str]:
        out = frozenset(m.get(x, x) for x in s)
        _need(len(out) == len(s), "^s: identification collapses a sequent")
        return out

    shapes = [Counter(mapped(g) for g in gs) for _, gs in groups]
    _need(all(sh == shapes[0] for sh in shapes), "^s: groups must carry copies of the same contexts")
    occ = {k: v for k, v in prem.occ.items() if k not in m}
    for x in delta:
        occ[x] = Mod(ModKind.SHARED, prem.formula(x))
    return Multisequent(occ, [mapped(s) for s in prem.sequents])


_FORWARD = {
    "axiom": _fw_axiom, "one": _fw_one, "empty": _fw_empty, "top": _fw_top, "bot": _fw_bot,
    "par": _fw_par, "plus1": _fw_plus, "plus2": _fw_plus, "cpar": _fw_cpar, "c": _fw_c,
    "d": _fw_d, "s": _fw_s, "with": _fw_with, "unshared": _fw_unshared, "shared": _fw_shared,
    "tensor": lambda v, i, p: _two_sided(v, i, p, "tensor"),
    "ctimes": lambda v, i, p: _two_sided(v, i, p, "ctimes"),
    "cut": lambda v, i, p: _two_sided(v, i, p, "cut"),
}


# --------------------------------------------------------------------------
# backward enumeration

@dataclass(frozen=True)
class EnumOptions:
    """Caps on the exponential backward enumerations."""

    max_split_labels: int = 14   # labels in the principal contexts of tensor/ctimes
    max_principal_seqs: int = 8  # principal sequents for ctimes partitions and tensor grids
    max_shared_candidates: int = 6
    max_free_components: int = 4
    atomic_axioms: bool = False  # restrict (axiom) to atoms, giving eta-expanded proofs
    rules: frozenset[str] | None = field(default=None)


class FreshLabels:
    """Deterministic supply of labels not present in ``used``."""

    def __init__(self, used: Iterable[str], prefix: str = "v"):
        self.used = set(used)
        self.prefix = prefix
        self.n = 0

    def __call__(self) -> str:
        while True:
            self.n += 1
            name = f"{self.prefix}{self.n}"
            if name not in self.used:
                self.used.add(name)
                return name


def _ms(occ: Mapping[str, Formula], seqs: Iterable[Iterable[str]]) -> Multisequent:
    return Multisequent.from_sequents(occ, seqs)


def enumerate_backward(variant: Variant, goal: Multisequent,
                       opts: EnumOptions | None = None) -> list[RuleApplication]:
    """All cut-free rule applications concluding ``goal``, deduplicated by rule
    and premise isomorphism."""
    opts = opts or EnumOptions()
    allowed = rules_of(variant) if opts.rules is None else rules_of(variant) & opts.rules
    out: list[RuleApplication] = []
    seen: set = set()

    def emit(inst: RuleInstance, premises: Sequence[Multisequent]) -> None:
        key = (inst.rule, tuple(canonicalize(p) for p in premises))
        if key in seen:
            return
        seen.add(key)
        out.append(RuleApplication(inst, tuple(premises), goal))

    for rule, gen in _BACKWARD:
        if rule in allowed:
            for inst, premises in gen(variant, goal, opts):
                emit(inst, premises)
    return out


def _bw_leaves(variant, goal, opts):
    if goal.is_empty():
        yield RuleInstance.make("empty"), []
        return
    if len(goal.sequents) == 1:
        (s,) = goal.sequents
        if len(s) == 2:
            x, y = sorted(s)
            try:
                ok = dual(goal.formula(x), variant) == goal.formula(y)
            except RuleError:
                ok = False
            if ok and opts.atomic_axioms and not isinstance(goal.formula(x), Atom):
                ok = False
            if ok:
                yield RuleInstance.make("axiom", (x, y), fresh={x: goal.formula(x), y: goal.formula(y)}), []
        if len(s) == 1:
            (x,) = s
            if goal.formula(x) == ONE:
                yield RuleInstance.make("one", (x,), fresh={x: ONE}), []


def _labels_with(goal: Multisequent, pred) -> list[str]:
    return [x for x in goal.labels if pred(goal.formula(x))]


def _is_bin(conn: Conn):
    return lambda f: isinstance(f, Bin) and f.conn is conn


def _bw_axiom_only(rule):
    def gen(variant, goal, opts):
        for inst, prem in _bw_leaves(variant, goal, opts):
            if inst.rule == rule:
                yield inst, prem
    return gen


def _bw_top(variant, goal, opts):
    for t in _labels_with(goal, lambda f: f == TOP):
        ctx, rest = _split_on(goal, t)
        prem = _ms(goal.occ, rest)
        fresh = {t: TOP}
        for c in ctx:
            for x in c:
                if x not in prem.occ:
                    fresh[x] = goal.formula(x)
        inst = RuleInstance.make("top", (t,), ctx, fresh=fresh)
        yield inst, ([] if prem.is_empty() else [prem])


def _bw_bot(variant, goal, opts):
    for b in _labels_with(goal, lambda f: f == BOT):
        ctx, rest = _split_on(goal, b)
        yield RuleInstance.make("bot", (b,), ctx, fresh={b: BOT}), [_ms(goal.occ, rest + ctx)]


def _replace(goal: Multisequent, n: str, new: Mapping[str, Formula], seqs) -> Multisequent:
    occ = {k: v for k, v in goal.occ.items() if k != n}
    occ.update(new)
    return _ms(occ, seqs)


def _bw_par(variant, goal, opts):
    for n in _labels_with(goal, _is_bin(Conn.PAR)):
        f = goal.formula(n)
        fresh = FreshLabels(goal.labels)
        a, b = fresh(), fresh()
        seqs = [(s - {n}) | {a, b} if n in s else s for s in goal.sequents]
        yield (RuleInstance.make("par", (a, b, n), fresh={n: f}),
               [_replace(goal, n, {a: f.left, b: f.right}, seqs)])


def _bw_plus(variant, goal, opts):
    for n in _labels_with(goal, _is_bin(Conn.PLUS)):
        f = goal.formula(n)
        a = FreshLabels(goal.labels)()
        seqs = [(s - {n}) | {a} if n in s else s for s in goal.sequents]
        for rule, sub in (("plus1", f.left), ("plus2", f.right)):
            yield RuleInstance.make(rule, (a, n), fresh={n: f}), [_replace(goal, n, {a: sub}, seqs)]


def _bw_cpar(variant, goal, opts):
    for n in _labels_with(goal, _is_bin(Conn.CPAR)):
        f = goal.formula(n)
        fresh = FreshLabels(goal.labels)
        a, b = fresh(), fresh()
        ctx, rest = _split_on(goal, n)
        seqs = rest + [c | {a} for c in ctx] + [c | {b} for c in ctx]
        yield (RuleInstance.make("cpar", (a, b, n), fresh={n: f}),
               [_replace(goal, n, {a: f.left, b: f.right}, seqs)])


def _bw_with(variant, goal, opts):
    for n in _labels_with(goal, _is_bin(Conn.WITH)):
        f = goal.formula(n)
        fresh = FreshLabels(goal.labels)
        a = fresh()
        copy = {x: fresh() for x in goal.labels if x != n}
        b = fresh()
        left = _replace(goal, n, {a: f.left}, [(s - {n}) | {a} if n in s else s for s in goal.sequents])
        rocc = {copy[x]: goal.formula(x) for x in copy}
        rocc[b] = f.right
        copy_n = {**copy, n: b}
        right = _ms(rocc, [{copy_n[x] for x in s} for s in goal.sequents])
        inst = RuleInstance.make("with", (a, b, n), mapping={v: k for k, v in copy.items()}, fresh={n: f})
        yield inst, [left, right]


def _bw_c(variant, goal, opts):
    counts = Counter(goal.sequents)
    for s in sorted(counts, key=lambda s: tuple(sorted(s))):
        if counts[s] >= 2:
            seqs = list(goal.sequents)
            seqs.remove(s)
            yield RuleInstance.make("c", (), [s]), [Multisequent(goal.occ, seqs)]


def _bw_d(variant, goal, opts):
    done = set()
    for s in goal.sequents:
        if s in done:
            continue
        done.add(s)
        for x in sorted(s):
            if len(goal.containing(x)) >= 2:
                seqs = list(goal.sequents)
                seqs.remove(s)
                seqs.append(s - {x})
                yield RuleInstance.make("d", (x,), [s - {x}]), [Multisequent(goal.occ, seqs)]


def _bw_s(variant, goal, opts):
    comps = goal.components()
    if len(comps) < 2:
        return
    first, others = comps[0], comps[1:]
    k = len(others)
    limit = min(k, opts.max_free_components + 1)
    for r in range(0, limit + 1):
        for pick in itertools.combinations(range(k), r):
            if r == k:
                continue
            left = first
            for i in pick:
                left = left.union(others[i])
            right = None
            for i in range(k):
                if i not in pick:
                    right = others[i] if right is None else right.union(others[i])
            yield RuleInstance.make("s"), [left, right]


def _side_extensions(goal: Multisequent, principal_idx: set[int], side: Mapping[str, int],
                     opts: EnumOptions):
    """Extend a partial label->side assignment to the non-principal sequents.

    Yields (seqs_side1, seqs_side2) lists of non-principal sequents."""
    rest = [s for i, s in enumerate(goal.sequents) if i not in principal_idx]
    rest_ms = Multisequent.from_sequents(goal.occ, rest)
    fixed1, fixed2, free = [], [], []
    for comp in rest_ms.components():
        labels = set(comp.labels)
        sides = {side[x] for x in labels if x in side}
        if len(sides) > 1:
            return
        if sides:
            (fixed1 if sides == {1} else fixed2).append(comp)
        else:
            free.append(comp)
    if len(free) > opts.max_free_components:
        free_choices = [tuple([1] * len(free))]
    else:
        free_choices = itertools.product((1, 2), repeat=len(free))
    for choice in free_choices:
        s1 = [s for c in fixed1 for s in c.sequents]
        s2 = [s for c in fixed2 for s in c.sequents]
        for c, ch in zip(free, choice):
            (s1 if ch == 1 else s2).extend(c.sequents)
        yield s1, s2


def tensor_grids(pairs: Sequence[tuple[frozenset[str], frozenset[str]]]):
    """Factor a multiset of (gamma, delta) pairs as a product of two multisets.

    Yields (gammas, deltas) as lists with multiplicity."""
    k = len(pairs)
    cnt = Counter(pairs)
    c1 = Counter(g for g, _ in pairs)
    c2 = Counter(d for _, d in pairs)
    for p in range(1, k + 1):
        if k % p:
            continue
        q = k // p
        if any(v % q for v in c1.values()) or any(v % p for v in c2.values()):
            continue
        m1 = {g: v // q for g, v in c1.items()}
        m2 = {d: v // p for d, v in c2.items()}
        if all(cnt.get((g, d), 0) == m1[g] * m2[d] for g in m1 for d in m2):
            gammas = [g for g in sorted(m1, key=lambda s: tuple(sorted(s))) for _ in range(m1[g])]
            deltas = [d for d in sorted(m2, key=lambda s: tuple(sorted(s))) for _ in range(m2[d])]
            yield gammas, deltas


def _bw_tensor(variant, goal, opts):
    for n in _labels_with(goal, _is_bin(Conn.TENSOR)):
        f = goal.formula(n)
        idx = set(goal.containing(n))
        if len(idx) > opts.max_principal_seqs:
            continue
        ctxs = [goal.sequents[i] - {n} for i in sorted(idx)]
        universe = sorted(set().union(*ctxs))
        if len(universe) > opts.max_split_labels:
            continue
        fresh = FreshLabels(goal.labels)
        a, b = fresh(), fresh()
        for bits in itertools.product((1, 2), repeat=len(universe)):
            side = dict(zip(universe, bits))
            pairs = [(frozenset(x for x in c if side[x] == 1), frozenset(x for x in c if side[x] == 2))
                     for c in ctxs]
            grids = list(tensor_grids(pairs))
            if not grids:
                continue
            for s1, s2 in _side_extensions(goal, idx, side, opts):
                for gammas, deltas in grids:
                    p1 = _ms({**goal.occ, a: f.left}, s1 + [g | {a} for g in gammas])
                    p2 = _ms({**goal.occ, b: f.right}, s2 + [d | {b} for d in deltas])
                    yield RuleInstance.make("tensor", (a, b, n), fresh={n: f}), [p1, p2]


def _bw_ctimes(variant, goal, opts):
    for n in _labels_with(goal, _is_bin(Conn.CTIMES)):
        f = goal.formula(n)
        idx = sorted(goal.containing(n))
        if len(idx) < 2 or len(idx) > opts.max_principal_seqs:
            continue
        fresh = FreshLabels(goal.labels)
        a, b = fresh(), fresh()
        for r in range(1, len(idx)):
            for left in itertools.combinations(idx, r):
                right = [i for i in idx if i not in left]
                g = [goal.sequents[i] - {n} for i in left]
                d = [goal.sequents[i] - {n} for i in right]
                lg, ld = set().union(*g), set().union(*d)
                if lg & ld:
                    continue
                side = {**{x: 1 for x in lg}, **{x: 2 for x in ld}}
                for s1, s2 in _side_extensions(goal, set(idx), side, opts):
                    p1 = _ms({**goal.occ, a: f.left}, s1 + [c | {a} for c in g])
                    p2 = _ms({**goal.occ, b: f.right}, s2 + [c | {b} for c in d])
                    yield RuleInstance.make("ctimes", (a, b, n), fresh={n: f}), [p1, p2]


def _is_mod(kind: ModKind):
    return lambda f: isinstance(f, Mod) and f.kind is kind


def _bw_unshared(variant, goal, opts):
    for a in _labels_with(goal, _is_mod(ModKind.UNSHARED)):
        ctx, rest = _split_on(goal, a)
        gamma = set().union(*ctx)
        if any(s & gamma for s in rest):
            continue
        if not all(_is_mod(ModKind.SHARED)(goal.formula(x)) for x in gamma):
            continue
        updates = {x: goal.formula(x).body for x in gamma}
        updates[a] = goal.formula(a).body
        yield RuleInstance.make("unshared", (a,)), [goal.with_formulas(updates)]


def _bw_shared(variant, goal, opts):
    cands = _labels_with(goal, _is_mod(ModKind.SHARED))
    if len(cands) > opts.max_shared_candidates:
        cands = cands[: opts.max_shared_candidates]
    for r in range(1, len(cands) + 1):
        for pick in itertools.combinations(cands, r):
            delta = frozenset(pick)
            try:
                groups, rest = shared_groups(goal.sequents, delta)
            except RuleError:
                continue
            shapes = [Counter(gs) for _, gs in groups]
            if not all(sh == shapes[0] for sh in shapes):
                continue
            gamma = set().union(*(set().union(*gs) for _, gs in groups))
            if len(groups) > 1 and any(s & gamma for s in rest):
                continue
            fresh = FreshLabels(goal.labels)
            occ = dict(goal.occ)
            for x in delta:
                occ[x] = goal.formula(x).body
            mapping: dict[str, str] = {}
            seqs = list(rest)
            for gi, (dpart, gs) in enumerate(groups):
                if gi == 0:
                    copy = {x: x for x in gamma}
                else:
                    copy = {x: fresh() for x in sorted(gamma)}
                    for x, y in copy.items():
                        mapping[y] = x
                        occ[y] = goal.formula(x)
                for g in gs:
                    seqs.append({copy[x] for x in g} | dpart)
            yield RuleInstance.make("shared", sorted(delta), mapping=mapping), [_ms(occ, seqs)]


_BACKWARD = [
    ("empty", _bw_axiom_only("empty")),
    ("axiom", _bw_axiom_only("axiom")),
    ("one", _bw_axiom_only("one")),
    ("top", _bw_top),
    ("par", _bw_par),
    ("with", _bw_with),
    ("cpar", _bw_cpar),
    ("bot", _bw_bot),
    ("plus1", _bw_plus),
    ("tensor", _bw_tensor),
    ("ctimes", _bw_ctimes),
    ("unshared", _bw_unshared),
    ("shared", _bw_shared),
    ("c", _bw_c),
    ("d", _bw_d),
    ("s", _bw_s),
]
