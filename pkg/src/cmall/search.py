"""Bounded cut-free proof search.

Depth counts logical rule applications on a branch; structural rules
(c, d and s when it is searched) are bounded separately by the length of
an uninterrupted run.  In CMALL disconnected goals are split eagerly and
one available par, with or cpar step is taken without branching.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .calculus import (
    ASYNC_CONNS, STRUCTURAL, EnumOptions, FreshLabels, RuleApplication, RuleInstance, Variant,
    enumerate_backward,
)
from .proof import ProofTree, all_labels, relabel_proof
from .syntax import Multisequent, ParseError, canonical_labeling, parse_multisequent


@dataclass(frozen=True)
class SearchLimits:
    max_depth: int = 12
    max_visited: int = 200_000
    max_structural_run: int = 4
    time_budget: float = 60.0
    split_first: bool = True
    async_first: bool = True
    enum: EnumOptions = field(default_factory=EnumOptions)

    def __post_init__(self):
        if min(self.max_depth, self.max_visited, self.max_structural_run) <= 0 or self.time_budget <= 0:
            raise ValueError("search limits must be positive")


@dataclass(frozen=True)
class Proved:
    proof: ProofTree
    visited: int = 0


@dataclass(frozen=True)
class Refuted:
    visited: int
    depth_bound_reached: bool = False
    structural_pruned: bool = False


@dataclass(frozen=True)
class Unknown:
    reason: str
    visited: int = 0


SearchOutcome = Proved | Refuted | Unknown


class _Abort(Exception):
    pass


@dataclass
class _Flags:
    depth_cut: bool = False
    structural_pruned: bool = False
    loop_at: float = math.inf  # shallowest ancestor index a loop check hit

    def absorb(self, other: "_Flags") -> None:
        self.depth_cut |= other.depth_cut
        self.structural_pruned |= other.structural_pruned
        self.loop_at = min(self.loop_at, other.loop_at)


def _has_empty_sequent(ms: Multisequent) -> bool:
    return any(not s for s in ms.sequents)


def balanced_split(parts: Sequence[ProofTree]) -> ProofTree:
    """Join proofs of disjoint multisequents with a balanced tree of s rules."""
    if len(parts) == 1:
        return parts[0]
    mid = len(parts) // 2
    left, right = balanced_split(parts[:mid]), balanced_split(parts[mid:])
    return ProofTree(left.conclusion.union(right.conclusion), RuleInstance.make("s"), (left, right))


class Prover:
    def __init__(self, variant: Variant, limits: SearchLimits | None = None):
        self.variant = variant
        self.lim = limits or SearchLimits()
        self.visited = 0
        self.proved: dict[bytes, ProofTree] = {}
        # canonical form -> [(depth_left, structural budget, depth_cut, structural_pruned)]
        self.failed: dict[bytes, list[tuple[float, int, bool, bool]]] = {}
        self.deadline = 0.0
        self.async_rules = frozenset(ASYNC_CONNS.values())

    # public entry
    def prove(self, goal: Multisequent) -> SearchOutcome:
        self.visited = 0
        self.deadline = time.monotonic() + self.lim.time_budget
        try:
            proof, flags = self._solve(goal, self.lim.max_depth, 0, [])
        except _Abort as exc:
            return Unknown(str(exc), self.visited)
        except RecursionError:
            return Unknown("recursion limit", self.visited)
        if proof is not None:
            return Proved(proof, self.visited)
        if flags.depth_cut:
            return Unknown(f"depth bound {self.lim.max_depth} reached", self.visited)
        return Refuted(self.visited, False, flags.structural_pruned)

    # memo helpers
    def _reuse(self, key: bytes, order: list[str], goal: Multisequent) -> ProofTree | None:
        stored = self.proved.get(key)
        if stored is None:
            return None
        _, sorder = canonical_labeling(stored.conclusion)
        mapping = dict(zip(sorder, order))
        taken = set(goal.labels)
        fresh = FreshLabels(taken | all_labels(stored), prefix="w")
        for x in sorted(all_labels(stored)):
            if x not in mapping:
                mapping[x] = fresh()
        return relabel_proof(stored, mapping)

    def _known_failure(self, key: bytes, depth_left: int, budget: int, flags: _Flags) -> bool:
        for d, b, cut, pruned in self.failed.get(key, ()):
            if d >= depth_left and b >= budget:
                flags.depth_cut |= cut
                flags.structural_pruned |= pruned
                return True
        return False

    def _tick(self) -> None:
        self.visited += 1
        if self.visited > self.lim.max_visited:
            raise _Abort(f"visited limit {self.lim.max_visited} reached")
        if self.visited % 256 == 0 and time.monotonic() > self.deadline:
            raise _Abort(f"time budget {self.lim.time_budget}s exhausted")

    # core
    def _solve(self, goal: Multisequent, depth_left: int, run: int, path: list[bytes]):
        flags = _Flags()
        if _has_empty_sequent(goal):
            return None, flags
        key, order = canonical_labeling(goal)
        hit = self._reuse(key, order, goal)
        if hit is not None:
            return hit, flags
        budget = self.lim.max_structural_run - run
        if self._known_failure(key, depth_left, budget, flags):
            return None, flags
        if key in path:
            flags.loop_at = path.index(key)
            return None, flags
        self._tick()
        here = len(path)
        path.append(key)
        try:
            proof = self._expand(goal, depth_left, run, path, flags)
        finally:
            path.pop()
        if proof is not None:
            self.proved[key] = proof
        elif flags.loop_at >= here:
            depth = depth_left if flags.depth_cut else math.inf
            self.failed.setdefault(key, []).append((depth, budget, flags.depth_cut, flags.structural_pruned))
        if flags.loop_at >= here:
            flags.loop_at = math.inf
        return proof, flags

    def _expand(self, goal, depth_left, run, path, flags) -> ProofTree | None:
        v = self.variant
        if v is Variant.CMALL and self.lim.split_first:
            comps = goal.components()
            if len(comps) > 1:
                parts = []
                for comp in comps:
                    p, f = self._solve(comp, depth_left, run, path)
                    flags.absorb(f)
                    if p is None:
                        return None
                    parts.append(p)
                return balanced_split(parts)
        apps = self._applications(goal)
        for app in apps:
            if not app.premises:
                return ProofTree(goal, app.instance)
        if v is Variant.CMALL and self.lim.async_first:
            eager = [a for a in apps if a.instance.rule in self.async_rules]
            if eager:
                apps = eager[:1]
        for app in apps:
            structural = app.instance.rule in STRUCTURAL
            if structural:
                if run >= self.lim.max_structural_run:
                    flags.structural_pruned = True
                    continue
                nd, nr = depth_left, run + 1
            else:
                if depth_left <= 0:
                    flags.depth_cut = True
                    continue
                nd, nr = depth_left - 1, 0
            children = []
            for prem in app.premises:
                p, f = self._solve(prem, nd, nr, path)
                flags.absorb(f)
                if p is None:
                    break
                children.append(p)
            else:
                return ProofTree(goal, app.instance, tuple(children))
        return None

    def _applications(self, goal: Multisequent) -> list[RuleApplication]:
        apps = enumerate_backward(self.variant, goal, self.lim.enum)
        if self.variant is Variant.CMALL and self.lim.split_first:
            apps = [a for a in apps if a.instance.rule != "s"]
        return apps


def prove(variant: Variant, goal: Multisequent, limits: SearchLimits | None = None) -> SearchOutcome:
    return Prover(variant, limits).prove(goal)


# --------------------------------------------------------------------------
# corpus files

@dataclass(frozen=True)
class CorpusEntry:
    path: str
    goal: Multisequent | None
    expect: str | None
    variant: Variant
    error: str | None = None


@dataclass
class CorpusRow:
    entry: CorpusEntry
    outcome: SearchOutcome | None
    seconds: float = 0.0

    @property
    def status(self) -> str:
        if self.entry.error:
            return "error"
        o = self.outcome
        return "proved" if isinstance(o, Proved) else "refuted" if isinstance(o, Refuted) else "unknown"

    @property
    def ok(self) -> bool:
        if self.entry.error:
            return False
        return self.entry.expect is None or self.entry.expect == self.status


@dataclass
class CorpusReport:
    rows: list[CorpusRow]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)


def read_corpus_file(path: str | Path, default: Variant = Variant.CMALL) -> CorpusEntry:
    path = Path(path)
    expect, variant = None, default
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        return CorpusEntry(str(path), None, None, default, f"I/O error: {exc}")
    for line in text.splitlines():
        words = line.strip().split()
        if words[:1] == ["#expect"] and len(words) == 2:
            expect = words[1].lower()
        elif words[:1] == ["#variant"] and len(words) == 2:
            try:
                variant = Variant(words[1].lower())
            except ValueError:
                return CorpusEntry(str(path), None, expect, default, f"unknown variant {words[1]!r}")
    try:
        goal = parse_multisequent(text)
    except (ParseError, ValueError) as exc:
        return CorpusEntry(str(path), None, expect, variant, f"parse error: {exc}")
    return CorpusEntry(str(path), goal, expect, variant)


def prove_corpus(files: Iterable[str | Path], limits: SearchLimits | None = None,
                 default: Variant = Variant.CMALL, variant: Variant | None = None) -> CorpusReport:
    """Run the prover on every file; ``variant`` overrides the files' own choice."""
    rows = []
    for f in files:
        entry = read_corpus_file(f, default)
        if variant is not None and entry.error is None:
            entry = CorpusEntry(entry.path, entry.goal, entry.expect, variant)
        if entry.error:
            rows.append(CorpusRow(entry, None))
            continue
        t0 = time.monotonic()
        outcome = prove(entry.variant, entry.goal, limits)
        rows.append(CorpusRow(entry, outcome, time.monotonic() - t0))
    return CorpusReport(rows)
