"""Truncated Fock-space algebra over a free commutative monoid.

Monoid elements are sorted tuples of generator names, ``()`` being the
monoid unit.  A Fock element of degree n is a finite multiset of unordered
n-tuples ("terms") of monoid elements; ``+`` is multiset union and ``∘``
concatenates tuples.  The added unit 𝟙 is a separate component,
``UNIT_MARK``, which multiplies like the monoid unit but can never belong
to a bottom set.

Everything runs inside a :class:`Universe`: a generator alphabet with
bounds on monomial degree, tuple length and summand count.  Operations
given a universe raise :class:`TruncationError` rather than truncate;
orthogonals are the one exception (overflowing pairs are excluded and
counted, so facts stay total).
"""

from __future__ import annotations

import configparser
import itertools
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, prod
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

Mono = tuple[str, ...]
Term = tuple[Mono, ...]

UNIT_MARK: Mono = ("𝟙",)


class TruncationError(ArithmeticError):
    """A result does not fit the universe's bounds."""


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# monoid

def mono_mul(x: Mono, y: Mono) -> Mono:
    if x == UNIT_MARK:
        return y
    if y == UNIT_MARK:
        return x
    return tuple(sorted(x + y))


def mono_degree(x: Mono) -> int:
    return 0 if x == UNIT_MARK else len(x)


def _compositions(e: int, k: int) -> list[tuple[int, ...]]:
    """Ordered ways to write e as a sum of k naturals."""
    out = []
    for bars in itertools.combinations(range(e + k - 1), k - 1):
        edges = (-1, *bars, e + k - 1)
        out.append(tuple(edges[i + 1] - edges[i] - 1 for i in range(k)))
    return out


@lru_cache(maxsize=None)
def _factorizations(x: Mono, k: int) -> tuple[tuple[Mono, ...], ...]:
    if x == UNIT_MARK:
        return ((UNIT_MARK,) * k,)
    exps = Counter(x)
    gens = sorted(exps)
    per_gen = [_compositions(exps[g], k) for g in gens]
    out = []
    for choice in itertools.product(*per_gen):
        out.append(tuple(
            tuple(g for g, c in zip(gens, choice) for _ in range(c[j])) for j in range(k)
        ))
    out.sort(key=lambda parts: [(len(p), p) for p in parts])
    return tuple(out)


def factorizations(x: Mono, k: int) -> list[tuple[Mono, ...]]:
    """All ordered k-tuples of monoid elements whose product is x."""
    if k < 1:
        raise ValueError("k must be at least 1")
    return list(_factorizations(tuple(x) if x == UNIT_MARK else tuple(sorted(x)), k))


@lru_cache(maxsize=None)
def _shuffle(x: Mono, k: int) -> tuple[tuple[tuple[Mono, ...], int], ...]:
    """Distinct factorizations weighted by how many ways the letters of x
    can be dealt into k boxes to produce them (the shuffle coproduct)."""
    if x == UNIT_MARK:
        return (((UNIT_MARK,) * k, 1),)
    exps = Counter(x)
    out = []
    for parts in _factorizations(x, k):
        w = 1
        for g, e in exps.items():
            left = e
            for p in parts:
                c = p.count(g)
                w *= comb(left, c)
                left -= c
        out.append((parts, w))
    return tuple(out)


def shuffle_weights(x: Mono, k: int) -> Counter:
    """Δ_{k-1}(x) as a formal sum: each factorization with its multiplicity."""
    if k < 1:
        raise ValueError("k must be at least 1")
    key = tuple(x) if x == UNIT_MARK else tuple(sorted(x))
    return Counter(dict(_shuffle(key, k)))


def factorization_count(x: Mono, k: int) -> int:
    if x == UNIT_MARK:
        return 1
    return prod(comb(e + k - 1, k - 1) for e in Counter(x).values())


# --------------------------------------------------------------------------
# Fock elements

def _term(parts: Iterable[Mono]) -> Term:
    return tuple(sorted(parts))


@dataclass(frozen=True, order=True)
class FockElem:
    """A degree-homogeneous sum of unordered tuples; no terms means 0."""

    degree: int
    terms: tuple[Term, ...] = ()

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("negative degree")
        if any(len(t) != self.degree for t in self.terms):
            raise ValueError("terms of mixed degree")

    @staticmethod
    def of(terms: Iterable[Iterable[Mono]], degree: int | None = None) -> "FockElem":
        ts = sorted(_term(t) for t in terms)
        if degree is None:
            if not ts:
                raise ValueError("degree needed for 0")
            degree = len(ts[0])
        return FockElem(degree, tuple(ts))

    @staticmethod
    def from_counter(c: Counter, degree: int) -> "FockElem":
        return FockElem(degree, tuple(sorted(c.elements())))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_simple(self) -> bool:
        return len(self.terms) == 1

    def counter(self) -> Counter:
        return Counter(self.terms)

    def __add__(self, other: "FockElem") -> "FockElem":
        return add(self, other)

    def __str__(self) -> str:
        return render_elem(self)


UNIT = FockElem(1, ((UNIT_MARK,),))


def mono(x: Mono | str) -> FockElem:
    """A monoid element seen as a degree-1 Fock element."""
    if isinstance(x, str):
        x = parse_mono(x)
    return FockElem(1, ((x,),))


def add(f: FockElem, g: FockElem) -> FockElem:
    if f.degree != g.degree and not (f.is_zero or g.is_zero):
        raise ValueError(f"cannot add degree {f.degree} to degree {g.degree}")
    degree = g.degree if f.is_zero else f.degree
    return FockElem(degree, tuple(sorted(f.terms + g.terms)))


def circ(f: FockElem, g: FockElem, u: "Universe | None" = None) -> FockElem:
    out = FockElem(f.degree + g.degree, tuple(sorted(_term(t + s) for t in f.terms for s in g.terms)))
    if u is not None:
        u.require(out)
    return out


def leq(f: FockElem, g: FockElem) -> bool:
    """f ≤ g iff g = f + h for some h, i.e. f's summands are among g's."""
    if f.is_zero:
        return True
    if f.degree != g.degree:
        return False
    return not (f.counter() - g.counter())


# --------------------------------------------------------------------------
# comultiplication

def _split_term(t: Term, k: int) -> Counter:
    """Δ_{k-1} on one simple element: componentwise factorization."""
    out: Counter = Counter()
    for choice in itertools.product(*(_shuffle(c, k) for c in t)):
        w = prod(m for _, m in choice)
        out[tuple(_term(parts[j] for parts, _ in choice) for j in range(k))] += w
    return out


def delta_n(a: Mono | FockElem, n: int) -> Counter:
    """The iterated coproduct as a formal sum of (n+1)-tuples.

    On a monoid element the tuples hold monoid elements; on a Fock element
    (a morphism for + and ∘) they hold terms of the element's degree.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if isinstance(a, FockElem):
        out: Counter = Counter()
        for t in a.terms:
            out.update(_split_term(t, n + 1))
        return out
    return shuffle_weights(a, n + 1)


def delta(a: Mono | FockElem) -> Counter:
    return delta_n(a, 1)


def _split2(part) -> Counter:
    if part == UNIT_MARK or not part or isinstance(part[0], str):
        return shuffle_weights(part, 2)
    return _split_term(part, 2)


def split_at(s: Counter, i: int) -> Counter:
    """(idⁱ × Δ × id^rest) applied to a formal sum of tuples."""
    out: Counter = Counter()
    for tup, mult in s.items():
        for pair, m2 in _split2(tup[i]).items():
            out[tup[:i] + pair + tup[i + 1:]] += mult * m2
    return out


def swap_at(s: Counter, i: int, j: int) -> Counter:
    out: Counter = Counter()
    for tup, mult in s.items():
        t = list(tup)
        t[i], t[j] = t[j], t[i]
        out[tuple(t)] += mult
    return out


# --------------------------------------------------------------------------
# products

def star_ordered(f: Sequence[Mono], g: Sequence[Mono]) -> Counter:
    """⋆ of two simple elements given by ordered representatives."""
    m, n = len(f), len(g)
    out: Counter = Counter()
    f_splits = [_shuffle(x, n) for x in f]
    g_splits = [_shuffle(y, m) for y in g]
    for fs in itertools.product(*f_splits):
        wf = prod(w for _, w in fs)
        for gs in itertools.product(*g_splits):
            w = wf * prod(w for _, w in gs)
            out[_term(mono_mul(fs[i][0][j], gs[j][0][i]) for i in range(m) for j in range(n))] += w
    return out


@lru_cache(maxsize=1 << 18)
def star_terms(s: Term, t: Term) -> Counter:
    if s == (UNIT_MARK,):
        return Counter({t: 1})
    if t == (UNIT_MARK,):
        return Counter({s: 1})
    return star_ordered(s, t)


def star(f: FockElem, g: FockElem, u: "Universe | None" = None) -> FockElem:
    """Bilinear extension of the simple-element product."""
    if u is not None and f.degree * g.degree > u.max_fock_degree and not (f.is_zero or g.is_zero):
        raise TruncationError(f"degree {f.degree * g.degree} exceeds {u.max_fock_degree}")
    out: Counter = Counter()
    for s in f.terms:
        for t in g.terms:
            out.update(star_terms(s, t))
    if u is not None and sum(out.values()) > u.max_product_terms:
        raise TruncationError(f"{sum(out.values())} summands exceed {u.max_product_terms}")
    res = FockElem.from_counter(out, f.degree * g.degree)
    if u is not None:
        for term in res.terms:
            u.require_term(term)
    return res


# --------------------------------------------------------------------------
# text

_MONO = re.compile(r"([a-z])(?:\^(\d+))?")


def parse_mono(text: str) -> Mono:
    text = text.strip()
    if text == "1":
        return ()
    if text in ("𝟙", "U"):
        return UNIT_MARK
    out: list[str] = []
    pos = 0
    while pos < len(text):
        m = _MONO.match(text, pos)
        if not m:
            raise ValueError(f"bad monomial {text!r}")
        out.extend([m.group(1)] * int(m.group(2) or 1))
        pos = m.end()
    if not out:
        raise ValueError("empty monomial")
    return tuple(sorted(out))


def parse_elem(text: str) -> FockElem:
    """``a∘b + c∘1``; ``@`` may stand for ``∘``."""
    terms = []
    for chunk in text.split("+"):
        terms.append([parse_mono(p) for p in re.split(r"[∘@]", chunk)])
    return FockElem.of(terms)


def render_mono(x: Mono) -> str:
    if x == UNIT_MARK:
        return "𝟙"
    if not x:
        return "1"
    c = Counter(x)
    return "".join(g if c[g] == 1 else f"{g}^{c[g]}" for g in sorted(c))


def render_term(t: Term) -> str:
    return "∘".join(render_mono(x) for x in t)


def render_elem(f: FockElem) -> str:
    if f.is_zero:
        return "0"
    return " + ".join(render_term(t) for t in f.terms)


# --------------------------------------------------------------------------
# universes

@dataclass(frozen=True)
class Universe:
    """Finite window on the Fock space.

    Config files are INI-style with one ``[universe]`` section::

        [universe]
        generators = a b
        max_mono_degree = 3
        max_fock_degree = 3
        max_terms = 2
        bottom = a, b^2

    ``bottom`` lists monomials (``1`` is the monoid unit).
    """

    generators: tuple[str, ...]
    max_mono_degree: int = 3
    max_fock_degree: int = 3
    max_terms: int = 2
    bottom: frozenset[Mono] = frozenset()
    max_product_terms: int = 100_000
    max_carrier: int = 200_000

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "bottom", frozenset(tuple(sorted(b)) for b in self.bottom))
        if len(set(gens)) != len(gens) or not all(re.fullmatch(r"[a-z]", g) for g in gens):
            raise ConfigError("generators must be distinct single lowercase letters")
        if self.max_mono_degree < 0 or self.max_fock_degree < 1 or self.max_terms < 1:
            raise ConfigError("degree bounds must be non-negative and max_fock_degree, max_terms positive")
        for b in self.bottom:
            if b == UNIT_MARK or not set(b) <= set(gens) or len(b) > self.max_mono_degree:
                raise ConfigError(f"bottom element {render_mono(b)} is not a monomial of the universe")

    def with_bottom(self, bottom: Iterable[Mono]) -> "Universe":
        return Universe(self.generators, self.max_mono_degree, self.max_fock_degree,
                        self.max_terms, frozenset(bottom), self.max_product_terms, self.max_carrier)

    def monomials(self) -> list[Mono]:
        out: list[Mono] = []
        for d in range(self.max_mono_degree + 1):
            out.extend(itertools.combinations_with_replacement(self.generators, d))
        return out

    def components(self) -> list[Mono]:
        return self.monomials() + [UNIT_MARK]

    def require_term(self, t: Term) -> None:
        if len(t) > self.max_fock_degree:
            raise TruncationError(f"tuple length {len(t)} exceeds {self.max_fock_degree}")
        for x in t:
            if x != UNIT_MARK and (len(x) > self.max_mono_degree or not set(x) <= set(self.generators)):
                raise TruncationError(f"monomial {render_mono(x)} outside the universe")

    def require(self, f: FockElem) -> None:
        for t in f.terms:
            self.require_term(t)

    def describe(self) -> str:
        bottom = ", ".join(sorted(render_mono(b) for b in self.bottom)) or "-"
        return (f"generators={' '.join(self.generators)} max_mono_degree={self.max_mono_degree} "
                f"max_fock_degree={self.max_fock_degree} max_terms={self.max_terms} bottom={{{bottom}}}")


def universe_from_section(sec: configparser.SectionProxy) -> Universe:
    try:
        bottom = [parse_mono(b) for b in re.split(r"[,\s]+", sec.get("bottom", "").strip()) if b]
        return Universe(
            tuple(sec.get("generators", "").split()),
            sec.getint("max_mono_degree", 3),
            sec.getint("max_fock_degree", 3),
            sec.getint("max_terms", 2),
            frozenset(bottom),
        )
    except ValueError as exc:
        raise ConfigError(f"[{sec.name}]: {exc}") from None


def load_universe(path: str | Path) -> Universe:
    cp = configparser.ConfigParser()
    if not cp.read(path, encoding="utf-8"):
        raise ConfigError(f"cannot read {path}")
    if "universe" not in cp:
        raise ConfigError(f"{path}: missing [universe] section")
    return universe_from_section(cp["universe"])


# --------------------------------------------------------------------------
# the truncated carrier and its orthogonality relation

class Space:
    """Enumerated carrier of a universe plus the precomputed ⋆/pole relation.

    Carrier elements are non-zero sums of at most ``max_terms`` tuples of
    length 1..max_fock_degree over the components (monomials and 𝟙).
    """

    def __init__(self, u: Universe):
        self.u = u
        comps = sorted(u.components())
        self.simple: list[Term] = []
        for d in range(1, u.max_fock_degree + 1):
            self.simple.extend(itertools.combinations_with_replacement(comps, d))
        self.simple_index = {t: i for i, t in enumerate(self.simple)}
        self.carrier: list[FockElem] = []
        rows: list[list[int]] = []
        for d in range(1, u.max_fock_degree + 1):
            idx = [i for i, t in enumerate(self.simple) if len(t) == d]
            for k in range(1, u.max_terms + 1):
                for combo in itertools.combinations_with_replacement(idx, k):
                    self.carrier.append(FockElem(d, tuple(self.simple[i] for i in combo)))
                    rows.append(list(combo))
                    if len(self.carrier) > u.max_carrier:
                        raise TruncationError(f"carrier larger than {u.max_carrier}")
        self.index = {f: i for i, f in enumerate(self.carrier)}
        pad = len(self.simple)
        self.term_idx = np.full((len(rows), u.max_terms), pad, dtype=np.int64)
        for r, combo in enumerate(rows):
            self.term_idx[r, :len(combo)] = combo
        self._ok: np.ndarray | None = None
        self._good: np.ndarray | None = None
        self._good_exact: np.ndarray | None = None
        self._ext_terms: list[Term] = []
        self._ext_index: dict[Term, int] = {}
        self._ext_rows: dict[int, np.ndarray] = {}
        self._pair_star: dict[tuple[int, int], frozenset[int]] = {}

    def __len__(self) -> int:
        return len(self.carrier)

    # simple-level relation
    def _relations(self) -> tuple[np.ndarray, np.ndarray]:
        if self._ok is None:
            n = len(self.simple)
            ok = np.zeros((n + 1, n + 1), dtype=bool)
            good = np.zeros((n + 1, n + 1), dtype=bool)
            bottom = self.u.bottom
            for i, s in enumerate(self.simple):
                for j in range(i, n):
                    t = self.simple[j]
                    if len(s) * len(t) > self.u.max_fock_degree:
                        continue
                    res = star_terms(s, t)
                    try:
                        for term in res:
                            self.u.require_term(term)
                    except TruncationError:
                        continue
                    ok[i, j] = ok[j, i] = True
                    self._pair_star[i, j] = self._pair_star[j, i] = frozenset(self.simple_index[x] for x in res)
                    good[i, j] = good[j, i] = any(all(x in bottom for x in term) for term in res)
            ok[n, :] = ok[:, n] = True  # padding column
            self._ok, self._good = ok, good
        return self._ok, self._good

    def _exact_good(self) -> np.ndarray:
        """Pole membership of every simple product, bounds ignored."""
        if self._good_exact is None:
            n = len(self.simple)
            good = np.zeros((n + 1, n + 1), dtype=bool)
            bottom = self.u.bottom
            for i, s in enumerate(self.simple):
                for j in range(i, n):
                    res = star_terms(s, self.simple[j])
                    good[i, j] = good[j, i] = any(all(x in bottom for x in term) for term in res)
            self._good_exact = good
        return self._good_exact

    def signature(self, f: FockElem) -> tuple[int, ...]:
        try:
            return tuple(sorted({self.simple_index[t] for t in f.terms}))
        except KeyError:
            raise TruncationError(f"{render_elem(f)} lies outside the universe") from None

    def orth_mask(self, elems: Iterable[FockElem], exact: bool = False) -> tuple[np.ndarray, int]:
        if exact:
            return self.orth_sigs({tuple(sorted({self.term_id(t) for t in f.terms})) for f in elems}, True)
        return self.orth_sigs({self.signature(f) for f in elems})

    # Summands outside the bounds get ids past the padding slot; only the
    # exact policy produces them.
    def term_of(self, i: int) -> Term:
        n = len(self.simple)
        return self.simple[i] if i < n else self._ext_terms[i - n - 1]

    def term_id(self, t: Term) -> int:
        i = self.simple_index.get(t)
        if i is not None:
            return i
        i = self._ext_index.get(t)
        if i is None:
            i = len(self.simple) + 1 + len(self._ext_terms)
            self._ext_terms.append(t)
            self._ext_index[t] = i
        return i

    def _exact_row(self, i: int) -> np.ndarray:
        n = len(self.simple)
        if i <= n:
            return self._exact_good()[i]
        row = self._ext_rows.get(i)
        if row is None:
            t, bottom = self.term_of(i), self.u.bottom
            row = np.zeros(n + 1, dtype=bool)
            for j, s in enumerate(self.simple):
                row[j] = any(all(x in bottom for x in term) for term in star_terms(t, s))
            self._ext_rows[i] = row
        return row

    def orth_sigs(self, sigs: Iterable[tuple[int, ...]], exact: bool = False) -> tuple[np.ndarray, int]:
        """Orthogonal of a set given by summand-index signatures.

        Whether f⋆g is defined and in the pole depends only on which simple
        summands f and g have, so elements sharing a signature are merged.
        With ``exact`` a product leaving the bounds is still tested against
        the pole (by its summands) instead of excluding the pair; the
        overflow count is reported either way.
        """
        ok, good = self._relations()
        n = len(self.simple)
        mask = np.ones(len(self.carrier), dtype=bool)
        over = np.zeros(len(self.carrier), dtype=bool)
        for sig in set(sigs):
            if not sig:
                mask[:] = False
                continue
            inside = [i for i in sig if i < n]
            okrow = ok[inside].all(axis=0) if len(inside) == len(sig) else np.zeros(n + 1, dtype=bool)
            if exact:
                goodrow = np.logical_or.reduce([self._exact_row(i) for i in sig])
            else:
                goodrow = good[list(sig)].any(axis=0)
            okg = okrow[self.term_idx].all(axis=1)
            hit = goodrow[self.term_idx].any(axis=1)
            mask &= hit if exact else okg & hit
            over |= ~okg
        return mask, int(over.sum())

    def sigs_of(self, mask: np.ndarray) -> set[tuple[int, ...]]:
        rows = self.term_idx[mask]
        pad = len(self.simple)
        return {tuple(sorted({int(x) for x in r if x != pad})) for r in rows}

    def star_sigs(self, A: Iterable[tuple[int, ...]], B: Iterable[tuple[int, ...]],
                  exact: bool = False) -> tuple[set, int]:
        """Signatures of {a⋆b}, plus the number of products leaving the bounds.

        Such products are dropped, or kept with out-of-bounds summands when
        ``exact``.
        """
        self._relations()
        out, over = set(), 0
        B = list(B)
        for a in A:
            for b in B:
                parts = [self._pair_star.get((i, j)) for i in a for j in b]
                if any(p is None for p in parts):
                    over += 1
                    if not exact:
                        continue
                    parts = [frozenset(self.term_id(t) for t in star_terms(self.term_of(i), self.term_of(j)))
                             for i in a for j in b]
                out.add(tuple(sorted(set().union(*parts))))
        return out, over

    def circ_sigs(self, A: Iterable[tuple[int, ...]], B: Iterable[tuple[int, ...]],
                  exact: bool = False) -> tuple[set, int]:
        out, over = set(), 0
        B = list(B)
        for a in A:
            for b in B:
                terms = [_term(self.term_of(i) + self.term_of(j)) for i in a for j in b]
                parts = [self.simple_index.get(t) for t in terms]
                if any(p is None for p in parts):
                    over += 1
                    if not exact:
                        continue
                    parts = [self.term_id(t) for t in terms]
                out.add(tuple(sorted(set(parts))))
        return out, over

    # the pole as a least fixpoint, computed by saturation inside the carrier
    def pole_mask(self) -> np.ndarray:
        if not self.u.bottom:
            raise ConfigError("bottom must be non-empty")
        n = len(self.carrier)
        inside = np.zeros(n, dtype=bool)
        for b in self.u.bottom:
            inside[self.index[mono(b)]] = True
        subs = self._sub_elements()
        triples = self._circ_triples()
        changed = True
        while changed:
            changed = False
            for g, below in subs:
                if not inside[g] and inside[below].any():
                    inside[g] = changed = True
            for f, g, h in triples:
                if inside[f] and inside[g] and not inside[h]:
                    inside[h] = changed = True
                if inside[h] and not (inside[f] and inside[g]):
                    inside[f] = inside[g] = changed = True
        return inside

    def _sub_elements(self) -> list[tuple[int, list[int]]]:
        out = []
        for i, f in enumerate(self.carrier):
            if len(f.terms) < 2:
                continue
            below = set()
            for k in range(1, len(f.terms)):
                for combo in itertools.combinations(f.terms, k):
                    below.add(self.index[FockElem(f.degree, combo)])
            out.append((i, sorted(below)))
        return out

    def _circ_triples(self) -> list[tuple[int, int, int]]:
        u = self.u
        by_shape: dict[tuple[int, int], list[int]] = {}
        for i, f in enumerate(self.carrier):
            by_shape.setdefault((f.degree, len(f.terms)), []).append(i)
        out = []
        for (d1, k1), fs in by_shape.items():
            for (d2, k2), gs in by_shape.items():
                if (d1, k1) > (d2, k2) or d1 + d2 > u.max_fock_degree or k1 * k2 > u.max_terms:
                    continue
                for a in fs:
                    for b in gs:
                        if (d1, k1) == (d2, k2) and b < a:
                            continue
                        h = circ(self.carrier[a], self.carrier[b])
                        out.append((a, b, self.index[h]))
        return out


@lru_cache(maxsize=32)
def space(u: Universe) -> Space:
    return Space(u)


@dataclass(frozen=True, eq=False)
class FockSet:
    """A subset of a universe's carrier, stored as a mask."""

    space: Space
    mask: np.ndarray
    overflow: int = field(default=0, compare=False)

    @staticmethod
    def of(u: Universe, elems: Iterable[FockElem]) -> "FockSet":
        sp = space(u)
        mask = np.zeros(len(sp), dtype=bool)
        for f in elems:
            try:
                mask[sp.index[f]] = True
            except KeyError:
                raise TruncationError(f"{render_elem(f)} is not in the carrier") from None
        return FockSet(sp, mask)

    @staticmethod
    def everything(u: Universe) -> "FockSet":
        sp = space(u)
        return FockSet(sp, np.ones(len(sp), dtype=bool))

    def __iter__(self) -> Iterator[FockElem]:
        return (self.space.carrier[i] for i in np.flatnonzero(self.mask))

    def __len__(self) -> int:
        return int(self.mask.sum())

    def __contains__(self, f: FockElem) -> bool:
        i = self.space.index.get(f)
        return i is not None and bool(self.mask[i])

    def __eq__(self, other) -> bool:
        return isinstance(other, FockSet) and self.space is other.space and bool((self.mask == other.mask).all())

    def __hash__(self) -> int:
        return hash(self.mask.tobytes())

    def __le__(self, other: "FockSet") -> bool:
        return not (self.mask & ~other.mask).any()

    def __and__(self, other: "FockSet") -> "FockSet":
        return FockSet(self.space, self.mask & other.mask)

    def __or__(self, other: "FockSet") -> "FockSet":
        return FockSet(self.space, self.mask | other.mask)

    def minimal(self) -> list[FockElem]:
        """Members with no proper sub-sum inside the set."""
        out = []
        for f in self:
            subs = (FockElem(f.degree, c) for k in range(1, len(f.terms))
                    for c in itertools.combinations(f.terms, k))
            if not any(s in self for s in subs):
                out.append(f)
        return out


# --------------------------------------------------------------------------
# pole and orthogonals

def in_pole(f: FockElem, u: Universe) -> bool:
    """Membership through the decomposition characterisation.

    f belongs to the least pole iff one of its summands is a tuple made
    only of bottom monomials.  Works for elements outside the carrier; the
    fixpoint in :func:`pole` is the independent definition.
    """
    return any(all(x in u.bottom for x in t) for t in f.terms)


def pole(u: Universe) -> FockSet:
    return FockSet(space(u), space(u).pole_mask())


def pole_witness(f: FockElem, u: Universe) -> tuple[list[Mono], FockElem] | None:
    """(g_1..g_k, h) with f = g_1∘…∘g_k + h and every g_i a bottom monomial."""
    for i, t in enumerate(f.terms):
        if all(x in u.bottom for x in t):
            return list(t), FockElem(f.degree, f.terms[:i] + f.terms[i + 1:])
    return None


def orth(F: Iterable[FockElem], u: Universe) -> FockSet:
    """Carrier elements g with f⋆g defined in the universe and in the pole for all f in F."""
    mask, over = space(u).orth_mask(F)
    return FockSet(space(u), mask, over)


def biorth(F: Iterable[FockElem], u: Universe) -> FockSet:
    return orth(orth(F, u), u)


def set_star(F: Iterable[FockElem], G: Iterable[FockElem], u: Universe) -> tuple[list[FockElem], int]:
    """{f⋆g} restricted to products inside the universe, plus the overflow count."""
    out, over = set(), 0
    G = list(G)
    for f in F:
        for g in G:
            try:
                out.add(star(f, g, u))
            except TruncationError:
                over += 1
    return sorted(out), over


def set_circ(F: Iterable[FockElem], G: Iterable[FockElem], u: Universe) -> tuple[list[FockElem], int]:
    out, over = set(), 0
    G = list(G)
    for f in F:
        for g in G:
            try:
                out.add(circ(f, g, u))
            except TruncationError:
                over += 1
    return sorted(out), over
