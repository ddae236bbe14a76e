"""Phase structures over truncated Fock spaces.

Formulas denote facts (sets equal to their biorthogonal) in a finite
universe.  A multisequent is interpreted per assignment of dual elements:
an occurrence shared by k sequents is split into k ordered parts by the
iterated coproduct, sequent i takes its part ``n(X, i)``, the parts of a
sequent are multiplied with ⋆ and the sequents are joined with ∘.
Validity asks that every such element lie in the pole.

Two readings of the constants are available.  ``standard`` sets
V(1) = {𝟙}⊥⊥ and V(⊥) = {𝟙}⊥; ``literal`` swaps them, following the
constants table word for word.
"""

from __future__ import annotations

import configparser
import itertools
import time
from collections import Counter
from dataclasses import dataclass, field, replace
from math import prod
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .fock import (
    UNIT, ConfigError, FockElem, FockSet, Term, TruncationError, Universe, delta_n, render_elem,
    render_mono, space, star_terms, universe_from_section,
)
from .syntax import (
    Atom, Bin, Conn, Const, ConstKind, Formula, Mod, Multisequent, is_modality_free, iter_subformulas,
    negate, render_multisequent,
)

READINGS = ("standard", "literal")


class SemanticsError(ValueError):
    pass


# --------------------------------------------------------------------------
# facts and structures

def _fset(u: Universe, mask: np.ndarray, overflow: int = 0) -> FockSet:
    return FockSet(space(u), mask, overflow)


def fact_orth(F: FockSet, exact: bool = False) -> FockSet:
    sp = F.space
    mask, over = sp.orth_sigs(sp.sigs_of(F.mask), exact)
    return FockSet(sp, mask, over)


def fact_from_seed(u: Universe, seed: FockElem, exact: bool = False) -> FockSet:
    """{seed}⊥⊥."""
    sp = space(u)
    m1, o1 = sp.orth_mask([seed], exact)
    m2, o2 = sp.orth_sigs(sp.sigs_of(m1), exact)
    return FockSet(sp, m2, o1 + o2)


def is_fact(F: FockSet, exact: bool = False) -> bool:
    return fact_orth(fact_orth(F, exact), exact) == F


@dataclass
class PhaseStructure:
    universe: Universe
    valuation: Mapping[str, FockSet]
    constants: str = "standard"
    name: str = ""
    exact: bool = False
    check: bool = True
    overflow: int = field(default=0, compare=False)
    _memo: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.constants not in READINGS:
            raise ConfigError(f"constants reading must be one of {READINGS}")
        if not self.universe.bottom:
            raise ConfigError("bottom must be non-empty")
        sp = space(self.universe)
        for atom, F in self.valuation.items():
            if F.space is not sp:
                raise ConfigError(f"fact for {atom} belongs to another universe")
            if self.check and not is_fact(F, self.exact):
                raise ConfigError(f"valuation of {atom} is not closed under biorthogonal")

    def describe(self) -> str:
        return self.name or self.universe.describe()


def _orth_of_sigs(u: Universe, sigs: set, over: int, exact: bool) -> FockSet:
    mask, o = space(u).orth_sigs(sigs, exact)
    return _fset(u, mask, over + o)


def interpret_formula(ps: PhaseStructure, f: Formula) -> FockSet:
    """The fact denoted by a modality-free formula."""
    hit = ps._memo.get(f)
    if hit is not None:
        return hit
    u = ps.universe
    sp = space(u)
    orth_ = lambda F: fact_orth(F, ps.exact)
    if isinstance(f, Atom):
        if f.name not in ps.valuation:
            raise SemanticsError(f"no valuation for atom {f.name}")
        out = ps.valuation[f.name]
        if f.dual:
            out = orth_(out)
    elif isinstance(f, Const):
        unit_orth = _fset(u, *sp.orth_mask([UNIT], ps.exact))
        if f.kind is ConstKind.TOP:
            out = FockSet.everything(u)
        elif f.kind is ConstKind.ZERO:
            out = orth_(FockSet.everything(u))
        else:
            one_is_closure = (f.kind is ConstKind.ONE) == (ps.constants == "standard")
            out = orth_(unit_orth) if one_is_closure else unit_orth
    elif isinstance(f, Mod):
        raise SemanticsError("modalities have no phase interpretation")
    else:
        a, b = interpret_formula(ps, f.left), interpret_formula(ps, f.right)
        if f.conn is Conn.WITH:
            out = a & b
        elif f.conn is Conn.PLUS:
            out = orth_(orth_(a | b))
        else:
            if f.conn in (Conn.PAR, Conn.CPAR):
                a, b = orth_(a), orth_(b)
            combine = sp.star_sigs if f.conn in (Conn.TENSOR, Conn.PAR) else sp.circ_sigs
            sigs, over = combine(sp.sigs_of(a.mask), sp.sigs_of(b.mask), ps.exact)
            out = _orth_of_sigs(u, sigs, over, ps.exact)
            if f.conn in (Conn.TENSOR, Conn.CTIMES):
                out = orth_(out)
    ps.overflow += out.overflow
    ps._memo[f] = out
    return out


# --------------------------------------------------------------------------
# multisequents

def sequent_indexing(s: Multisequent, order: Sequence[int] | None = None):
    """Sequents in the chosen order and, per occurrence, its k and n(X, i)."""
    seqs = [s.sequents[i] for i in (order if order is not None else range(len(s.sequents)))]
    seen: Counter = Counter()
    slots = []
    for seq in seqs:
        row = []
        for x in sorted(seq):
            seen[x] += 1
            row.append((x, seen[x] - 1))
        slots.append(row)
    return seqs, dict(seen), slots


def _splits(duals: Mapping[str, FockElem], counts: Mapping[str, int]) -> dict[str, Counter]:
    return {x: delta_n(duals[x], counts[x] - 1) for x in counts}


def _sequent_product(parts: Sequence[Term]) -> Counter:
    acc = Counter({parts[0]: 1})
    for p in parts[1:]:
        nxt: Counter = Counter()
        for t, m in acc.items():
            for r, m2 in star_terms(t, p).items():
                nxt[r] += m * m2
        acc = nxt
    return acc


def interpret_multisequent(ps: PhaseStructure, s: Multisequent, duals: Mapping[str, FockElem],
                           order: Sequence[int] | None = None) -> FockElem:
    """The sum over all split choices of ∘ over sequents of ⋆ over parts."""
    seqs, counts, slots = sequent_indexing(s, order)
    if not seqs:
        raise SemanticsError("the empty multisequent has no interpretation")
    splits = _splits(duals, counts)
    occs = sorted(counts)
    limit = ps.universe.max_product_terms
    total: Counter = Counter()
    degree = None
    for choice in itertools.product(*(splits[x].items() for x in occs)):
        picked = dict(zip(occs, choice))
        mult = prod(m for _, m in choice)
        acc = Counter({(): mult})
        for row in slots:
            prod_i = _sequent_product([picked[x][0][k] for x, k in row])
            nxt: Counter = Counter()
            for t, m in acc.items():
                for r, m2 in prod_i.items():
                    nxt[tuple(sorted(t + r))] += m * m2
            acc = nxt
        for t, m in acc.items():
            total[t] += m
            degree = len(t)
        if sum(total.values()) > limit:
            raise TruncationError(f"interpretation exceeds {limit} summands")
    return FockElem.from_counter(total, degree or 0)


def _reaches_pole(bottom, slots, occs, splits, budget: int) -> bool | None:
    """Does some split choice give a summand made of bottom monomials only?"""
    good = lambda t: all(x in bottom for x in t)
    tried = 0
    for choice in itertools.product(*(splits[x] for x in occs)):
        tried += 1
        if tried > budget:
            return None
        picked = dict(zip(occs, choice))
        if all(any(good(t) for t in _sequent_product([picked[x][k] for x, k in row])) for row in slots):
            return True
    return False


@dataclass
class ValidityReport:
    valid: bool | None
    assignments: int = 0
    overflow: int = 0
    vacuous: bool = False
    violation: dict[str, FockElem] | None = None
    fact_overflow: int = 0
    reason: str = ""

    @property
    def decided(self) -> bool:
        return self.valid is not None

    def summary(self) -> str:
        status = {True: "valid", False: "invalid", None: "unknown"}[self.valid]
        out = f"{status} assignments={self.assignments} overflow={self.overflow} fact_overflow={self.fact_overflow}"
        if self.vacuous:
            out += " vacuous"
        if self.violation:
            out += " violation={" + ", ".join(f"{x}: {render_elem(v)}" for x, v in sorted(self.violation.items())) + "}"
        if self.reason:
            out += f" ({self.reason})"
        return out


def dual_domains(ps: PhaseStructure, s: Multisequent, minimal: bool = True) -> dict[str, list[FockElem]]:
    """Per occurrence, the candidates for its dual element.

    Every construction is additive in each dual element and the pole is
    upward closed, so the sum-minimal members of V(X⊥) suffice.
    """
    out = {}
    for x in sorted(s.labels):
        F = interpret_formula(ps, negate(s.formula(x)))
        out[x] = F.minimal() if minimal else list(F)
    return out


def is_valid(ps: PhaseStructure, s: Multisequent, max_assignments: int = 50_000,
             split_budget: int = 20_000, minimal: bool = True) -> ValidityReport:
    before = ps.overflow
    if not all(is_modality_free(f) for f in s.occ.values()):
        return ValidityReport(None, reason="modalities are not interpreted")
    if not s.sequents:
        return ValidityReport(None, reason="empty multisequent")
    try:
        domains = dual_domains(ps, s, minimal)
    except TruncationError as exc:
        return ValidityReport(None, reason=str(exc))
    fact_over = ps.overflow - before
    if any(not d for d in domains.values()):
        return ValidityReport(True, vacuous=True, fact_overflow=fact_over)
    size = prod(len(d) for d in domains.values())
    if size > max_assignments:
        return ValidityReport(None, fact_overflow=fact_over, reason=f"{size} assignments exceed {max_assignments}")
    _, counts, slots = sequent_indexing(s)
    occs = sorted(counts)
    bottom = ps.universe.bottom
    split_cache: dict = {}
    report = ValidityReport(True, fact_overflow=fact_over)
    for values in itertools.product(*(domains[x] for x in occs)):
        report.assignments += 1
        splits = {}
        for x, v in zip(occs, values):
            key = (v, counts[x])
            if key not in split_cache:
                split_cache[key] = list(delta_n(v, counts[x] - 1))
            splits[x] = split_cache[key]
        hit = _reaches_pole(bottom, slots, occs, splits, split_budget)
        if hit is None:
            report.overflow += 1
        elif not hit:
            report.valid = False
            report.violation = dict(zip(occs, values))
            return report
    if report.overflow:
        report.valid = None
        report.reason = f"{report.overflow} assignments exceeded the split budget"
    return report


# --------------------------------------------------------------------------
# sweeps

@dataclass(frozen=True)
class SweepConfig:
    """Families of small phase structures.

    File format (INI)::

        [sweep]
        max_bottom_size = 2
        max_valuations = 16
        max_assignments = 50000
        constants = standard

        [universe one]
        generators = a
        max_mono_degree = 1
        max_fock_degree = 2
        max_terms = 2

    Each ``[universe ...]`` section gives bounds; bottoms are swept over all
    non-empty sets of at most ``max_bottom_size`` monomials and atoms range
    over facts generated by one degree-1 seed.
    """

    universes: tuple[Universe, ...]
    max_bottom_size: int = 2
    max_valuations: int = 16
    max_assignments: int = 50_000
    constants: str = "standard"
    exact: bool = False


DEFAULT_SWEEP = SweepConfig((
    Universe(("a",), max_mono_degree=1, max_fock_degree=2, max_terms=2),
    Universe(("a",), max_mono_degree=2, max_fock_degree=2, max_terms=2),
    Universe(("a", "b"), max_mono_degree=1, max_fock_degree=2, max_terms=2),
))


def load_sweep(path: str | Path) -> SweepConfig:
    cp = configparser.ConfigParser()
    if not cp.read(path, encoding="utf-8"):
        raise ConfigError(f"cannot read {path}")
    universes = tuple(universe_from_section(cp[s]) for s in cp.sections() if s.split()[0] == "universe")
    if not universes:
        raise ConfigError(f"{path}: no [universe ...] sections")
    sw = cp["sweep"] if "sweep" in cp else {}
    get = lambda k, d: int(sw.get(k, d))
    return SweepConfig(universes, get("max_bottom_size", 2), get("max_valuations", 16),
                       get("max_assignments", 50_000), sw.get("constants", "standard"))


def bottoms(u: Universe, max_size: int) -> Iterator[frozenset]:
    monos = u.monomials()
    for k in range(1, max_size + 1):
        for combo in itertools.combinations(monos, k):
            yield frozenset(combo)


def seeds(u: Universe) -> list[FockElem]:
    return [FockElem(1, ((c,),)) for c in sorted(u.components())]


def valuations(atoms: Sequence[str], n_seeds: int, limit: int) -> list[tuple[int, ...]]:
    """Seed indices per atom: all of them if few, else diagonal and shifted patterns."""
    if n_seeds ** len(atoms) <= limit:
        return list(itertools.product(range(n_seeds), repeat=len(atoms)))
    out = []
    for shift in range(n_seeds):
        out.append(tuple((shift + i) % n_seeds for i in range(len(atoms))))
        out.append(tuple(shift for _ in atoms))
    return list(dict.fromkeys(out))[:limit]


def atoms_of(s: Multisequent) -> list[str]:
    names = set()
    for f in s.occ.values():
        names.update(g.name for g in iter_subformulas(f) if isinstance(g, Atom))
    return sorted(names)


def sweep_structures(cfg: SweepConfig, atoms: Sequence[str]) -> Iterator[PhaseStructure]:
    for ui, base in enumerate(cfg.universes):
        for bot in bottoms(base, cfg.max_bottom_size):
            u = base.with_bottom(bot)
            pool = seeds(u)
            facts = [fact_from_seed(u, sd, cfg.exact) for sd in pool]
            for combo in valuations(atoms, len(pool), cfg.max_valuations):
                val = {a: facts[i] for a, i in zip(atoms, combo)}
                name = (f"U{ui} bottom={{{', '.join(sorted(render_mono(b) for b in bot))}}} "
                        + " ".join(f"{a}={render_elem(pool[i])}" for a, i in zip(atoms, combo)))
                yield PhaseStructure(u, val, cfg.constants, name.strip(), cfg.exact, check=False)


def linear_fragment(s: Multisequent) -> bool:
    """One sequent with no concurrent connectives: the scope of the soundness theorem."""
    if len(s.sequents) != 1:
        return False
    return not any(isinstance(g, Bin) and g.conn in (Conn.CTIMES, Conn.CPAR)
                   for f in s.occ.values() for g in iter_subformulas(f))


@dataclass
class HarnessRow:
    sequent: str
    structure: str
    report: ValidityReport
    cross: ValidityReport | None = None
    linear: bool = True

    @property
    def decided(self) -> bool:
        """Both orthogonality policies reach the same verdict."""
        if not self.report.decided:
            return False
        return self.cross is None or self.cross.valid == self.report.valid

    @property
    def valid(self) -> bool | None:
        return self.report.valid if self.decided else None


@dataclass
class SoundnessReport:
    rows: list[HarnessRow]

    @property
    def violations(self) -> list[HarnessRow]:
        return [r for r in self.rows if r.valid is False]

    @property
    def linear_violations(self) -> list[HarnessRow]:
        return [r for r in self.violations if r.linear]

    @property
    def decided_fraction(self) -> float:
        return sum(r.decided for r in self.rows) / len(self.rows) if self.rows else 1.0

    @property
    def ok(self) -> bool:
        return not self.violations


def _paired(cfg: SweepConfig, atoms: Sequence[str]):
    """Structures under the configured policy, each with its exact-policy twin."""
    twin = replace(cfg, exact=not cfg.exact)
    return zip(sweep_structures(cfg, atoms), sweep_structures(twin, atoms))


def soundness_harness(corpus: Sequence[tuple[str, Multisequent]], structures: Iterable[PhaseStructure],
                      max_assignments: int = 50_000) -> SoundnessReport:
    """Check each provable sequent in each structure; invalid rows are bugs."""
    structures = list(structures)
    for ps in structures:
        if not ps.universe.bottom:
            raise ConfigError("bottom must be non-empty")
    rows = []
    for name, s in corpus:
        if not all(is_modality_free(f) for f in s.occ.values()):
            raise SemanticsError(f"{name}: modalities are not interpreted")
        for ps in structures:
            rows.append(HarnessRow(name, ps.describe(), is_valid(ps, s, max_assignments), None, linear_fragment(s)))
    return SoundnessReport(rows)


def sweep_harness(corpus: Sequence[tuple[str, Multisequent]], cfg: SweepConfig = DEFAULT_SWEEP) -> SoundnessReport:
    """Soundness over the sweep, cross-checked between the two orthogonality policies."""
    rows = []
    for name, s in corpus:
        if not all(is_modality_free(f) for f in s.occ.values()):
            raise SemanticsError(f"{name}: modalities are not interpreted")
        lin = linear_fragment(s)
        for ps, twin in _paired(cfg, atoms_of(s)):
            rows.append(HarnessRow(name, ps.describe(), is_valid(ps, s, cfg.max_assignments),
                                   is_valid(twin, s, cfg.max_assignments), lin))
    return SoundnessReport(rows)


@dataclass
class Countermodel:
    structure: PhaseStructure
    report: ValidityReport
    tried: int
    certificate: bool  # only linear-fragment sequents fall under the soundness theorem


def countermodel_search(s: Multisequent, cfg: SweepConfig = DEFAULT_SWEEP, budget: int = 5_000,
                        time_budget: float = 120.0) -> Countermodel | None:
    """First swept structure where s is invalid under both orthogonality policies."""
    if not all(is_modality_free(f) for f in s.occ.values()):
        raise SemanticsError("modalities are not interpreted")
    deadline = time.monotonic() + time_budget
    for tried, (ps, twin) in enumerate(_paired(cfg, atoms_of(s)), 1):
        if tried > budget or time.monotonic() > deadline:
            return None
        rep = is_valid(ps, s, cfg.max_assignments)
        if rep.valid is False and is_valid(twin, s, cfg.max_assignments).valid is False:
            return Countermodel(ps, rep, tried, linear_fragment(s))
    return None


def describe_countermodel(cm: Countermodel, s: Multisequent) -> str:
    note = "" if cm.certificate else " (outside the linear fragment: not an unprovability certificate)"
    return (f"countermodel for {render_multisequent(s)} after {cm.tried} structures{note}\n"
            f"  structure: {cm.structure.describe()}\n  {cm.report.summary()}")
