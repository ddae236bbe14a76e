"""Regenerate the golden proof files under proofs/.

    python3 scripts/make_golden.py [--check]

proofs/<name>.proof       cut-free proofs of the corpus entries expected proved
proofs/cuts/<name>.proof  proofs ending in cuts, used by the elimination tests

With --check nothing is written; the script exits 1 if a file would change.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from cmall.calculus import EnumOptions, Variant, dual
from cmall.cutelim import compose
from cmall.proof import ProofTree, check_proof, serialize_proof
from cmall.search import Proved, SearchLimits, prove, read_corpus_file
from cmall.syntax import Multisequent, is_modality_free, parse_formula, parse_multisequent

ROOT = Path(__file__).resolve().parent.parent
CMALL = Variant.CMALL
EXPAND = SearchLimits(enum=EnumOptions(atomic_axioms=True))

# (name, left sequent, cut formula on the left, right sequent, cut formula on the right)
HAND_CUTS = [
    ("cpar_vs_ctimes", "A~ % B~, A $ B", "A $ B", "B~ @ A~, A $ B", "B~ @ A~"),
    ("one_vs_bot", "1", "1", "bot, A~, A", "bot"),
    ("par_vs_tensor", "A % B, B~ * A~", "A % B", "B~ * A~, A, B", "B~ * A~"),
    ("shared_vs_unshared", "A~, A^s $ A^s", "A^s $ A^s", "A~^u @ A~^u, A^s $ A^s", "A~^u @ A~^u"),
    ("with_vs_plus", "A & B, B~ + A~", "A & B", "B~ + A~, A", "B~ + A~"),
    ("one_vs_bot_unit", "1", "1", "bot, 1", "bot"),
    ("tensor_assoc_cut", "A~ % (B~ % C~), (A * B) * C", "(A * B) * C",
     "(C~ % (B~ % A~)), (A * B) * C", "C~ % (B~ % A~)"),
]


def _proof(text: str, limits: SearchLimits = EXPAND) -> ProofTree:
    out = prove(CMALL, parse_multisequent(text), limits)
    if not isinstance(out, Proved):
        raise SystemExit(f"no proof of {text}: {out}")
    return out.proof


def _label(ms: Multisequent, formula: str) -> str:
    f = parse_formula(formula)
    return next(x for x in ms.labels if ms.formula(x) == f)


def hand_cuts() -> dict[str, ProofTree]:
    out = {}
    for name, left, fl, right, fr in HAND_CUTS:
        p1, p2 = _proof(left), _proof(right)
        out[name] = compose(p1, _label(p1.conclusion, fl), p2, _label(p2.conclusion, fr))
    return out


def identity_cuts(corpus: dict[str, ProofTree]) -> dict[str, ProofTree]:
    """Cut every occurrence of a corpus proof against an expanded identity."""
    out = {}
    for name, proof in corpus.items():
        ms = proof.conclusion
        for x in ms.labels:
            f = ms.formula(x)
            if not is_modality_free(f):
                continue
            ident = prove(CMALL, Multisequent({"i1": dual(f), "i2": f}, [("i1", "i2")]), EXPAND)
            if isinstance(ident, Proved):
                out[f"{name}_{x}"] = compose(ident.proof, "i1", proof, x)
    return out


def nested_cuts(cuts: dict[str, ProofTree]) -> dict[str, ProofTree]:
    """A cut whose premise already ends in a cut."""
    out = {}
    for name in ("cpar_vs_ctimes", "par_vs_tensor"):
        inner = cuts[name]
        for x in inner.conclusion.labels:
            f = inner.conclusion.formula(x)
            ident = prove(CMALL, Multisequent({"i1": f, "i2": dual(f)}, [("i1", "i2")]), EXPAND)
            out[f"{name}_nested_{x}"] = compose(ident.proof, "i2", inner, x)
            break
    return out


def corpus_proofs() -> dict[str, ProofTree]:
    out = {}
    for path in sorted((ROOT / "corpus").glob("*.mseq")):
        entry = read_corpus_file(path)
        if entry.expect != "proved":
            continue
        res = prove(entry.variant, entry.goal)
        if not isinstance(res, Proved):
            raise SystemExit(f"{path.name}: expected a proof, got {res}")
        check_proof(entry.variant, res.proof)
        out[path.stem] = res.proof
    return out


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--check", action="store_true")
    args = ap.parse_args()

    files: dict[Path, str] = {}
    corpus = corpus_proofs()
    for name, p in corpus.items():
        files[ROOT / "proofs" / f"{name}.proof"] = serialize_proof(p) + "\n"
    cmall_corpus = {k: v for k, v in corpus.items() if not k.startswith("naive")}
    cuts = hand_cuts()
    cuts.update(nested_cuts(cuts))
    cuts.update(identity_cuts(cmall_corpus))
    for name, p in cuts.items():
        check_proof(CMALL, p)
        files[ROOT / "proofs" / "cuts" / f"{name}.proof"] = serialize_proof(p) + "\n"

    stale = [f for f, text in files.items() if not f.exists() or f.read_text(encoding="utf-8") != text]
    if args.check:
        for f in stale:
            print(f"stale: {f.relative_to(ROOT)}")
        return 1 if stale else 0
    for f in stale:
        f.parent.mkdir(parents=True, exist_ok=True)
        f.write_text(files[f], encoding="utf-8")
    print(f"{len(corpus)} corpus proofs, {len(cuts)} cut proofs, {len(stale)} files written")
    return 0


if __name__ == "__main__":
    sys.exit(main())
