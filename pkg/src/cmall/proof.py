"""Proof trees, the checking kernel and the textual proof format.

Text format, one node per parenthesised term::

    proof      := "(" rule attr* conclusion proof* ")"
    attr       := "p=" labels | "ctx=[" ctx (";" ctx)* "]" | "map=" pair ("," pair)*
                | "fresh={" label ":" formula ("," label ":" formula)* "}"
    ctx        := "{" labels? "}"
    pair       := label ">" label
    conclusion := "∅" | ("{" items "}")+          (multisequent syntax)

``fresh`` may be omitted; it is then read off as the conclusion's
occurrences that no child mentions.  ``ax`` and ``w`` are accepted as
names for ``axiom`` and ``c``.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .calculus import RULE_ALIASES, RuleError, RuleInstance, Variant, apply_forward
from .syntax import (
    EMPTY_MS, Multisequent, ParseError, canonicalize, parse_multisequent, render_formula,
    render_multisequent,
)


@dataclass(frozen=True)
class ProofTree:
    conclusion: Multisequent
    rule: RuleInstance
    children: tuple["ProofTree", ...] = ()

    def nodes(self):
        """Pre-order traversal."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


@dataclass
class ProofStats:
    height: int
    cut_count: int
    histogram: dict[str, int] = field(default_factory=dict)
    size: int = 0


class ProofError(ValueError):
    """A node whose stored conclusion is not what its rule derives."""

    def __init__(self, path: tuple[int, ...], rule: str, message: str,
                 expected: Multisequent | None = None, actual: Multisequent | None = None):
        self.path = path
        self.rule = rule
        self.expected = expected
        self.actual = actual
        where = "root" + "".join(f".{i}" for i in path)
        text = f"at {where} ({rule}): {message}"
        if expected is not None and actual is not None:
            text += f"\n  stored:  {expected}\n  derived: {actual}"
        super().__init__(text)


def check_proof(variant: Variant, proof: ProofTree) -> ProofStats:
    """Re-derive every node bottom-up; return statistics or raise ProofError."""
    hist: Counter = Counter()

    def go(node: ProofTree, path: tuple[int, ...]) -> int:
        heights = [go(c, path + (i,)) for i, c in enumerate(node.children)]
        name = node.rule.rule
        try:
            derived = apply_forward(variant, node.rule, [c.conclusion for c in node.children])
        except (RuleError, ValueError) as exc:
            raise ProofError(path, name, str(exc)) from None
        if derived != node.conclusion and canonicalize(derived) != canonicalize(node.conclusion):
            raise ProofError(path, name, "conclusion mismatch", node.conclusion, derived)
        hist[name] += 1
        return 1 + max(heights, default=0)

    height = go(proof, ())
    return ProofStats(height, hist.get("cut", 0), dict(sorted(hist.items())), sum(hist.values()))


def proof_height(proof: ProofTree) -> int:
    return 1 + max((proof_height(c) for c in proof.children), default=0)


def cut_count(proof: ProofTree) -> int:
    return sum(1 for n in proof.nodes() if n.rule.rule == "cut")


# --------------------------------------------------------------------------
# renaming

def rename_instance(inst: RuleInstance, m: Mapping[str, str]) -> RuleInstance:
    r = lambda x: m.get(x, x)
    return RuleInstance(
        inst.rule,
        tuple(r(x) for x in inst.principal),
        tuple(tuple(sorted(r(x) for x in c)) for c in inst.partitions),
        tuple(sorted((r(a), r(b)) for a, b in inst.mapping)),
        tuple(sorted((r(x), f) for x, f in inst.fresh)),
    )


def relabel_proof(proof: ProofTree, mapping: Mapping[str, str]) -> ProofTree:
    """Apply one injective renaming to every label in the tree."""
    return ProofTree(
        proof.conclusion.rename(mapping),
        rename_instance(proof.rule, mapping),
        tuple(relabel_proof(c, mapping) for c in proof.children),
    )


def all_labels(proof: ProofTree) -> set[str]:
    out: set[str] = set()
    for n in proof.nodes():
        out.update(n.conclusion.labels)
        out.update(n.rule.principal)
        out.update(x for c in n.rule.partitions for x in c)
        out.update(x for pair in n.rule.mapping for x in pair)
        out.update(x for x, _ in n.rule.fresh)
    return out


# --------------------------------------------------------------------------
# text format

def serialize_proof(proof: ProofTree, indent: int | None = 2) -> str:
    def attrs(inst: RuleInstance) -> list[str]:
        out = []
        if inst.principal:
            out.append("p=" + ",".join(inst.principal))
        if inst.partitions:
            out.append("ctx=[" + ";".join("{" + ",".join(c) + "}" for c in inst.partitions) + "]")
        if inst.mapping:
            out.append("map=" + ",".join(f"{a}>{b}" for a, b in inst.mapping))
        if inst.fresh:
            out.append("fresh={" + ", ".join(f"{x}: {render_formula(f)}" for x, f in inst.fresh) + "}")
        return out

    def go(node: ProofTree, depth: int) -> str:
        head = " ".join([node.rule.rule, *attrs(node.rule), render_multisequent(node.conclusion)])
        if not node.children:
            return f"({head})"
        if indent is None:
            return f"({head} " + " ".join(go(c, depth + 1) for c in node.children) + ")"
        pad = "\n" + " " * (indent * (depth + 1))
        return f"({head}" + "".join(pad + go(c, depth + 1) for c in node.children) + ")"

    return go(proof, 0)


_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_']*|1|⊥")
_LABEL = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")


class _ProofReader:
    def __init__(self, text: str):
        self.text = text
        self.i = 0

    def error(self, message: str) -> ParseError:
        return ParseError(message, self.i, self.text)

    def ws(self) -> None:
        while self.i < len(self.text):
            if self.text[self.i].isspace():
                self.i += 1
            elif self.text[self.i] == "#":
                while self.i < len(self.text) and self.text[self.i] != "\n":
                    self.i += 1
            else:
                break

    def peek(self) -> str:
        self.ws()
        return self.text[self.i] if self.i < len(self.text) else ""

    def expect(self, s: str) -> None:
        self.ws()
        if not self.text.startswith(s, self.i):
            raise self.error(f"expected {s!r}")
        self.i += len(s)

    def regex(self, pat: re.Pattern, what: str) -> str:
        self.ws()
        m = pat.match(self.text, self.i)
        if not m:
            raise self.error(f"expected {what}")
        self.i = m.end()
        return m.group()

    def braces(self) -> str:
        """Raw text of one ``{...}`` block."""
        self.ws()
        start = self.i
        if self.peek() != "{":
            raise self.error("expected '{'")
        end = self.text.find("}", self.i)
        if end < 0:
            raise self.error("unterminated '{'")
        self.i = end + 1
        return self.text[start:self.i]

    def labels_until(self, stop: str) -> list[str]:
        out = []
        if self.peek() == stop:
            return out
        out.append(self.regex(_LABEL, "label"))
        while self.peek() == ",":
            self.expect(",")
            out.append(self.regex(_LABEL, "label"))
        return out

    def node(self) -> ProofTree:
        self.expect("(")
        name = self.regex(_NAME, "rule name")
        rule = RULE_ALIASES.get(name, name)
        principal: list[str] = []
        partitions: list[list[str]] = []
        mapping: dict[str, str] = {}
        fresh = None
        while True:
            self.ws()
            m = re.compile(r"(p|ctx|map|fresh)=").match(self.text, self.i)
            if not m:
                break
            self.i = m.end()
            key = m.group(1)
            if key == "p":
                principal = self.labels_until(" ")
            elif key == "ctx":
                self.expect("[")
                while self.peek() == "{":
                    self.expect("{")
                    partitions.append(self.labels_until("}"))
                    self.expect("}")
                    if self.peek() == ";":
                        self.expect(";")
                self.expect("]")
            elif key == "map":
                while True:
                    a = self.regex(_LABEL, "label")
                    self.expect(">")
                    mapping[a] = self.regex(_LABEL, "label")
                    if self.peek() != ",":
                        break
                    self.expect(",")
            else:
                start = self.i
                block = self.braces()
                try:
                    fresh = dict(parse_multisequent(block).occ)
                except ParseError as exc:
                    raise ParseError(exc.message, start + exc.pos, self.text) from None
        conclusion = self.conclusion()
        children = []
        while self.peek() == "(":
            children.append(self.node())
        self.expect(")")
        if fresh is None:
            seen = set().union(*(c.conclusion.labels for c in children)) if children else set()
            fresh = {x: f for x, f in conclusion.occ.items() if x not in seen}
        if not principal and rule in ("axiom", "one") and len(conclusion.sequents) == 1:
            principal = sorted(conclusion.sequents[0])
        inst = RuleInstance.make(rule, principal, partitions, mapping, fresh)
        return ProofTree(conclusion, inst, tuple(children))

    def conclusion(self) -> Multisequent:
        self.ws()
        start = self.i
        if self.text.startswith(EMPTY_MS, self.i):
            self.i += len(EMPTY_MS)
            return Multisequent({}, [])
        while self.peek() == "{":
            self.braces()
        if self.i == start:
            raise self.error("expected a conclusion")
        try:
            return parse_multisequent(self.text[start:self.i])
        except ParseError as exc:
            raise ParseError(exc.message, start + exc.pos, self.text) from None


def deserialize_proof(text: str) -> ProofTree:
    r = _ProofReader(text)
    tree = r.node()
    if r.peek():
        raise r.error("trailing text after proof")
    return tree


def premises_of(proof: ProofTree) -> Sequence[Multisequent]:
    return [c.conclusion for c in proof.children]
