"""Formulas, multisequents, parsing, printing and canonical forms.

Formulas are kept in negation normal form: only atoms carry a dual flag and
``negate`` pushes negation through connectives with the operands swapped.

A multisequent is a multiset of sequents over a shared pool of labelled
formula occurrences.  The same label in two sequents means the *same*
occurrence, so sharing is expressed by label reuse::

    {u: a~, v: a % bot} {u, w: 1 % 1}
"""

from __future__ import annotations

import enum
import itertools
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

__all__ = [
    "Atom", "Const", "Bin", "Mod", "Formula", "ConstKind", "Conn", "ModKind",
    "negate", "render_formula", "parse_formula", "ParseError",
    "Multisequent", "parse_multisequent", "render_multisequent",
    "canonicalize", "canonical_labeling", "isomorphism", "formula_size",
    "is_modality_free",
]


class ParseError(ValueError):
    """Malformed formula or multisequent text; ``pos`` is a character offset."""

    def __init__(self, message: str, pos: int, text: str = ""):
        super().__init__(f"{message} at position {pos}")
        self.message = message
        self.pos = pos
        self.text = text


class ConstKind(enum.Enum):
    ONE = "1"
    BOT = "bot"
    ZERO = "0"
    TOP = "top"


class Conn(enum.Enum):
    TENSOR = "*"
    PAR = "%"
    CTIMES = "@"
    CPAR = "$"
    PLUS = "+"
    WITH = "&"


class ModKind(enum.Enum):
    SHARED = "s"
    UNSHARED = "u"


@dataclass(frozen=True)
class Atom:
    name: str
    dual: bool = False

    def __str__(self) -> str:
        return render_formula(self)


@dataclass(frozen=True)
class Const:
    kind: ConstKind

    def __str__(self) -> str:
        return render_formula(self)


@dataclass(frozen=True)
class Bin:
    conn: Conn
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return render_formula(self)


@dataclass(frozen=True)
class Mod:
    kind: ModKind
    body: "Formula"

    def __str__(self) -> str:
        return render_formula(self)


Formula = Atom | Const | Bin | Mod

ONE, BOT, ZERO, TOP = (Const(k) for k in ConstKind)

_DUAL_CONST = {
    ConstKind.ONE: ConstKind.BOT, ConstKind.BOT: ConstKind.ONE,
    ConstKind.ZERO: ConstKind.TOP, ConstKind.TOP: ConstKind.ZERO,
}
_DUAL_CONN = {
    Conn.TENSOR: Conn.PAR, Conn.PAR: Conn.TENSOR,
    Conn.CTIMES: Conn.CPAR, Conn.CPAR: Conn.CTIMES,
    Conn.PLUS: Conn.WITH, Conn.WITH: Conn.PLUS,
}
_DUAL_MOD = {ModKind.SHARED: ModKind.UNSHARED, ModKind.UNSHARED: ModKind.SHARED}


def negate(f: Formula) -> Formula:
    """De Morgan dual; binary operands are swapped, ``^s`` and ``^u`` swap."""
    if isinstance(f, Atom):
        return Atom(f.name, not f.dual)
    if isinstance(f, Const):
        return Const(_DUAL_CONST[f.kind])
    if isinstance(f, Bin):
        return Bin(_DUAL_CONN[f.conn], negate(f.right), negate(f.left))
    return Mod(_DUAL_MOD[f.kind], negate(f.body))


def formula_size(f: Formula) -> int:
    if isinstance(f, Bin):
        return 1 + formula_size(f.left) + formula_size(f.right)
    if isinstance(f, Mod):
        return 1 + formula_size(f.body)
    return 1


def is_modality_free(f: Formula) -> bool:
    if isinstance(f, Mod):
        return False
    if isinstance(f, Bin):
        return is_modality_free(f.left) and is_modality_free(f.right)
    return True


# --------------------------------------------------------------------------
# printing

_LEVEL = {
    Conn.WITH: 0, Conn.PLUS: 0,
    Conn.PAR: 1, Conn.CPAR: 1,
    Conn.TENSOR: 2, Conn.CTIMES: 2,
}


def render_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        return f.name + ("~" if f.dual else "")
    if isinstance(f, Const):
        return f.kind.value
    if isinstance(f, Mod):
        body = render_formula(f.body)
        if isinstance(f.body, Bin):
            body = f"({body})"
        return f"{body}^{f.kind.value}"
    level = _LEVEL[f.conn]
    left, right = render_formula(f.left), render_formula(f.right)
    if isinstance(f.left, Bin) and (
        _LEVEL[f.left.conn] < level or f.left.conn is not f.conn
    ):
        left = f"({left})"
    if isinstance(f.right, Bin) and _LEVEL[f.right.conn] <= level:
        right = f"({right})"
    return f"{left} {f.conn.value} {right}"


# --------------------------------------------------------------------------
# tokenizing and parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<turn>\|-)|(?P<mod>\^[su])|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<num>[01])(?![0-9])|(?P<sym>[{}(),:~&+%$*@]))"
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    value: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        assert kind is not None
        start = m.start(kind)
        toks.append(_Tok(kind, m.group(kind), start))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, message: str) -> ParseError:
        return ParseError(message, self.tok.pos, self.text)

    def take(self, value: str | None = None, kind: str | None = None) -> _Tok:
        t = self.tok
        if (value is not None and t.value != value) or (kind is not None and t.kind != kind):
            want = value if value is not None else kind
            got = t.value or "end of input"
            raise self.error(f"expected {want!r}, got {got!r}")
        self.i += 1
        return t

    def at(self, *values: str) -> bool:
        return self.tok.kind in ("sym", "turn") and self.tok.value in values

    # formula := level0 ; levelN := levelN+1 (op levelN+1)*
    def formula(self) -> Formula:
        return self._level(0)

    def _level(self, level: int) -> Formula:
        if level == 3:
            return self._postfix()
        ops = {c.value: c for c, lv in _LEVEL.items() if lv == level}
        left = self._level(level + 1)
        while self.tok.kind == "sym" and self.tok.value in ops:
            conn = ops[self.take().value]
            right = self._level(level + 1)
            left = Bin(conn, left, right)
        return left

    def _postfix(self) -> Formula:
        f = self._primary()
        while True:
            if self.at("~"):
                self.take()
                f = negate(f)
            elif self.tok.kind == "mod":
                f = Mod(ModKind(self.take().value[1]), f)
            else:
                return f

    def _primary(self) -> Formula:
        t = self.tok
        if t.kind == "num":
            self.take()
            return ONE if t.value == "1" else ZERO
        if t.kind == "ident":
            self.take()
            if t.value == "bot":
                return BOT
            if t.value == "top":
                return TOP
            if t.value.startswith("_"):
                raise ParseError(f"bad atom name {t.value!r}", t.pos, self.text)
            return Atom(t.value)
        if self.at("("):
            self.take()
            f = self.formula()
            self.take(")")
            return f
        raise self.error(f"expected a formula, got {t.value or 'end of input'!r}")


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    f = p.formula()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.value!r}")
    return f


# --------------------------------------------------------------------------
# multisequents

def _seq_key(s: frozenset[str]) -> tuple[str, ...]:
    return tuple(sorted(s))


class Multisequent:
    """Immutable multiset of sequents sharing labelled occurrences.

    ``occ`` maps each label to its formula; ``sequents`` is a sorted tuple of
    frozensets of labels (duplicates allowed).
    """

    __slots__ = ("_occ", "sequents", "_hash")

    def __init__(self, occ: Mapping[str, Formula], sequents: Iterable[Iterable[str]]):
        seqs = tuple(sorted((frozenset(s) for s in sequents), key=_seq_key))
        used = set().union(*seqs) if seqs else set()
        occ = dict(occ)
        missing = used - occ.keys()
        if missing:
            raise ValueError(f"undefined occurrence(s) {sorted(missing)}")
        unused = occ.keys() - used
        if unused:
            raise ValueError(f"occurrence(s) {sorted(unused)} appear in no sequent")
        self._occ = {k: occ[k] for k in sorted(occ)}
        self.sequents = seqs
        self._hash = hash((tuple(self._occ.items()), self.sequents))

    # basic protocol
    @property
    def occ(self) -> Mapping[str, Formula]:
        return self._occ

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Multisequent)
            and self._hash == other._hash
            and self._occ == other._occ
            and self.sequents == other.sequents
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Multisequent({render_multisequent(self)!r})"

    def __str__(self) -> str:
        return render_multisequent(self)

    def __len__(self) -> int:
        return len(self.sequents)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self._occ)

    def formula(self, label: str) -> Formula:
        return self._occ[label]

    def is_empty(self) -> bool:
        return not self.sequents

    def containing(self, label: str) -> list[int]:
        return [i for i, s in enumerate(self.sequents) if label in s]

    def sequent_counter(self) -> Counter:
        return Counter(self.sequents)

    def rename(self, mapping: Mapping[str, str]) -> "Multisequent":
        occ = {mapping.get(k, k): f for k, f in self._occ.items()}
        if len(occ) != len(self._occ):
            raise ValueError("renaming is not injective")
        return Multisequent(occ, [{mapping.get(x, x) for x in s} for s in self.sequents])

    def with_formulas(self, updates: Mapping[str, Formula]) -> "Multisequent":
        occ = dict(self._occ)
        occ.update(updates)
        return Multisequent(occ, self.sequents)

    @staticmethod
    def from_sequents(occ: Mapping[str, Formula], sequents: Iterable[Iterable[str]]) -> "Multisequent":
        """Build from a label pool that may mention unused labels (they are dropped)."""
        seqs = [frozenset(s) for s in sequents]
        used = set().union(*seqs) if seqs else set()
        return Multisequent({k: v for k, v in occ.items() if k in used}, seqs)

    def union(self, other: "Multisequent") -> "Multisequent":
        clash = [k for k in other.occ if k in self._occ and self._occ[k] != other.occ[k]]
        if clash:
            raise ValueError(f"conflicting formulas for {clash}")
        return Multisequent({**self._occ, **other.occ}, self.sequents + other.sequents)

    def components(self) -> list["Multisequent"]:
        """Occurrence-connected components, in a deterministic order."""
        parent = list(range(len(self.sequents)))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        first: dict[str, int] = {}
        for i, s in enumerate(self.sequents):
            for x in s:
                if x in first:
                    parent[find(i)] = find(first[x])
                else:
                    first[x] = i
        groups: dict[int, list[int]] = {}
        for i in range(len(self.sequents)):
            groups.setdefault(find(i), []).append(i)
        return [
            Multisequent.from_sequents(self._occ, [self.sequents[i] for i in idx])
            for idx in groups.values()
        ]

    def is_connected(self) -> bool:
        return len(self.components()) <= 1


EMPTY_MS = "∅"


def render_multisequent(ms: Multisequent) -> str:
    if ms.is_empty():
        return EMPTY_MS
    seen: set[str] = set()
    parts = []
    for s in ms.sequents:
        items = []
        for x in sorted(s):
            if x in seen:
                items.append(x)
            else:
                seen.add(x)
                items.append(f"{x}: {render_formula(ms.formula(x))}")
        parts.append("{" + ", ".join(items) + "}")
    return " ".join(parts)


def _strip_comments(text: str) -> str:
    return "\n".join(line for line in text.splitlines() if not line.lstrip().startswith("#"))


def parse_multisequent(text: str) -> Multisequent:
    """Parse ``{x: a, y: b}{x, z: c}`` or the brace-free forms ``a, b~`` and
    ``a, b |- c`` (left-hand side formulas are negated, labels generated).
    ``∅`` is the empty multisequent; ``{}`` is one empty sequent.
    Lines beginning with ``#`` are ignored."""
    text = _strip_comments(text)
    if text.strip() == EMPTY_MS:
        return Multisequent({}, [])
    p = _Parser(text)
    occ: dict[str, Formula] = {}
    refs: list[tuple[str, int]] = []
    sequents: list[set[str]] = []
    auto = itertools.count(1)

    def fresh_label() -> str:
        while True:
            name = f"o{next(auto)}"
            if name not in occ and all(name != r for r, _ in refs):
                return name

    def declare(label: str, f: Formula, pos: int) -> None:
        if label in occ and occ[label] != f:
            raise ParseError(f"label {label!r} redeclared with a different formula", pos, text)
        occ[label] = f

    def add(seq: set[str], label: str, pos: int) -> None:
        if label in seq:
            raise ParseError(f"label {label!r} used twice in one sequent", pos, text)
        seq.add(label)

    def labelled_item(seq: set[str], bare_is_formula: bool, negated: bool) -> None:
        t = p.tok
        nxt = p.toks[p.i + 1]
        if t.kind == "ident" and nxt.kind == "sym" and nxt.value == ":":
            p.take()
            p.take(":")
            f = p.formula()
            declare(t.value, negate(f) if negated else f, t.pos)
            add(seq, t.value, t.pos)
        elif not bare_is_formula and t.kind == "ident" and t.value not in ("bot", "top"):
            p.take()
            refs.append((t.value, t.pos))
            add(seq, t.value, t.pos)
        else:
            f = p.formula()
            label = fresh_label()
            declare(label, negate(f) if negated else f, t.pos)
            add(seq, label, t.pos)

    if p.at("{"):
        while p.at("{"):
            p.take("{")
            seq: set[str] = set()
            if not p.at("}"):
                labelled_item(seq, bare_is_formula=False, negated=False)
                while p.at(","):
                    p.take(",")
                    labelled_item(seq, bare_is_formula=False, negated=False)
            p.take("}")
            sequents.append(seq)
        if p.tok.kind != "eof":
            raise p.error(f"unexpected {p.tok.value!r}")
    else:
        seq = set()
        negated = any(t.kind == "turn" for t in p.toks)
        if not (negated and p.at("|-")):
            labelled_item(seq, bare_is_formula=True, negated=negated)
            while p.at(","):
                p.take(",")
                labelled_item(seq, bare_is_formula=True, negated=negated)
        if p.at("|-"):
            p.take("|-")
            if p.tok.kind != "eof":
                labelled_item(seq, bare_is_formula=True, negated=False)
                while p.at(","):
                    p.take(",")
                    labelled_item(seq, bare_is_formula=True, negated=False)
        if p.tok.kind != "eof":
            raise p.error(f"unexpected {p.tok.value!r}")
        sequents.append(seq)
    for label, pos in refs:
        if label not in occ:
            raise ParseError(f"undefined label {label!r}", pos, text)
    return Multisequent(occ, sequents)


# --------------------------------------------------------------------------
# canonical forms
#
# Colour refinement on the occurrence/sequent incidence structure, followed
# by individualisation of the first non-singleton cell.  Connected
# components are canonicalised separately and sorted, so disjoint symmetric
# pieces never multiply the search.

def _refine(colors: list[int], seqs: Sequence[frozenset[int]]) -> list[int]:
    n = len(colors)
    member: list[list[int]] = [[] for _ in range(n)]
    for j, s in enumerate(seqs):
        for o in s:
            member[o].append(j)
    while True:
        seq_sig = [tuple(sorted(colors[o] for o in s)) for s in seqs]
        sigs = [(colors[o], tuple(sorted(seq_sig[j] for j in member[o]))) for o in range(n)]
        ranks = {sig: r for r, sig in enumerate(sorted(set(sigs)))}
        new = [ranks[sig] for sig in sigs]
        if len(ranks) == len(set(colors)):
            return new
        colors = new


def _component_form(labels: list[str], forms: list[str], seqs: list[frozenset[int]]):
    n = len(labels)
    if n == 0:
        return ((), tuple(() for _ in seqs)), []
    ranks = {f: r for r, f in enumerate(sorted(set(forms)))}
    start = _refine([ranks[f] for f in forms], seqs)
    membership = [frozenset(j for j, s in enumerate(seqs) if o in s) for o in range(n)]
    best: list = [None, None]

    def leaf(colors: list[int]) -> None:
        order = sorted(range(n), key=lambda o: colors[o])
        pos = {o: i for i, o in enumerate(order)}
        form = (
            tuple(forms[o] for o in order),
            tuple(sorted(tuple(sorted(pos[o] for o in s)) for s in seqs)),
        )
        if best[0] is None or form < best[0]:
            best[0], best[1] = form, order

    def search(colors: list[int]) -> None:
        cells: dict[int, list[int]] = {}
        for o, c in enumerate(colors):
            cells.setdefault(c, []).append(o)
        target = min((c for c, members in cells.items() if len(members) > 1), default=None)
        if target is None:
            leaf(colors)
            return
        seen_twins: set[frozenset[int]] = set()
        for o in cells[target]:
            if membership[o] in seen_twins:
                continue
            seen_twins.add(membership[o])
            split = [2 * c + (0 if i == o else 1) if c == target else 2 * c + 1 for i, c in enumerate(colors)]
            search(_refine(split, seqs))

    search(start)
    return best[0], [labels[o] for o in best[1]]


def canonical_labeling(ms: Multisequent) -> tuple[bytes, list[str]]:
    """Canonical bytes plus the labels listed in canonical order."""
    comps = []
    for comp in ms.components():
        labels = list(comp.labels)
        index = {x: i for i, x in enumerate(labels)}
        forms = [render_formula(comp.formula(x)) for x in labels]
        seqs = [frozenset(index[x] for x in s) for s in comp.sequents]
        comps.append(_component_form(labels, forms, seqs))
    comps.sort(key=lambda fo: fo[0])
    data = repr(tuple(form for form, _ in comps)).encode()
    order = [x for _, labels in comps for x in labels]
    return data, order


def canonicalize(ms: Multisequent) -> bytes:
    """Bytes equal for two multisequents iff they are isomorphic."""
    return canonical_labeling(ms)[0]


def isomorphism(a: Multisequent, b: Multisequent) -> dict[str, str] | None:
    """A label bijection carrying ``a`` onto ``b``, or None."""
    ca, oa = canonical_labeling(a)
    cb, ob = canonical_labeling(b)
    if ca != cb:
        return None
    return dict(zip(oa, ob))


def iter_subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, Bin):
        yield from iter_subformulas(f.left)
        yield from iter_subformulas(f.right)
    elif isinstance(f, Mod):
        yield from iter_subformulas(f.body)
