from pathlib import Path

import pytest

from cmall.calculus import Variant
from cmall.cutelim import eliminate_cuts
from cmall.proof import ProofError, check_proof, cut_count, deserialize_proof, proof_height, serialize_proof
from cmall.search import Proved, prove
from cmall.syntax import ParseError, parse_multisequent

ROOT = Path(__file__).resolve().parent.parent
GOLDEN = sorted((ROOT / "proofs").rglob("*.proof"))
CMALL = Variant.CMALL

# A (x) B entails A cpar B, written out rule by rule
TENSOR_TO_CPAR = """
(par p=a,b,n {n: A~ % B~, m: A $ B}
  (cpar p=c,d,m {a: A~, b: B~, m: A $ B}
    (d p=a ctx=[{b,d}] {a: A~, b: B~, c: A}{a, b, d: B}
      (d p=b ctx=[{a,c}] {a: A~, b: B~, c: A}{b, d: B}
        (s {a: A~, c: A}{b: B~, d: B}
          (ax {a: A~, c: A})
          (ax {b: B~, d: B}))))))
"""

WITHOUT_D = """
(par p=a,b,n {n: A~ % B~, m: A $ B}
  (cpar p=c,d,m {a: A~, b: B~, m: A $ B}
    (s {a: A~, c: A}{b: B~, d: B}
      (ax {a: A~, c: A})
      (ax {b: B~, d: B}))))
"""


def test_handwritten_derivation():
    stats = check_proof(CMALL, deserialize_proof(TENSOR_TO_CPAR))
    assert stats.size == 7
    assert stats.height == 6
    assert stats.cut_count == 0
    assert stats.histogram == {"par": 1, "cpar": 1, "d": 2, "s": 1, "axiom": 2}


def test_missing_steps_rejected_at_cpar():
    with pytest.raises(ProofError) as info:
        check_proof(CMALL, deserialize_proof(WITHOUT_D))
    assert info.value.rule == "cpar"
    assert info.value.path == (0,)


def test_single_axiom():
    tree = deserialize_proof("(ax {x:a, y:a~})")
    assert tree.children == ()
    stats = check_proof(CMALL, tree)
    assert (stats.height, stats.cut_count) == (1, 0)


def test_stored_conclusion_mismatch():
    tree = deserialize_proof("(ax {x:a, y:b~})")
    with pytest.raises(ProofError):
        check_proof(CMALL, tree)


@pytest.mark.parametrize("text", ["(ax {x:a, y:a~}", "(ax)", "(ax {x:a, y:a~}) junk", "(par p=a,b {x: a %}"])
def test_malformed_text(text):
    with pytest.raises(ParseError):
        deserialize_proof(text)


@pytest.mark.parametrize("path", GOLDEN, ids=lambda p: p.relative_to(ROOT / "proofs").as_posix())
def test_golden_roundtrip(path):
    tree = deserialize_proof(path.read_text(encoding="utf-8"))
    variant = Variant.NAIVE if path.stem.startswith("naive") else CMALL
    check_proof(variant, tree)
    assert deserialize_proof(serialize_proof(tree)) == tree
    assert deserialize_proof(serialize_proof(tree, indent=None)) == tree


def test_golden_files_present():
    assert len([p for p in GOLDEN if p.parent.name == "cuts"]) >= 20
    assert (ROOT / "proofs" / "tensor_to_cpar.proof").exists()


@pytest.mark.parametrize("text", [
    "A~ % B~, A $ B", "1, bot $ bot", "A~, A^s $ A^s", "A~ & B~, A + B",
    "{x: A~, y: A % bot}{x, z: 1 % 1}",
])
def test_search_output_checks(text):
    goal = parse_multisequent(text)
    variant = Variant.NAIVE if "z" in goal.labels else CMALL
    out = prove(variant, goal)
    if variant is Variant.NAIVE:
        assert not isinstance(out, Proved)
        return
    assert isinstance(out, Proved)
    stats = check_proof(CMALL, out.proof)
    assert stats.cut_count == 0 and stats.height == proof_height(out.proof)


def test_cutelim_output_checks():
    tree = deserialize_proof((ROOT / "proofs" / "cuts" / "par_vs_tensor.proof").read_text(encoding="utf-8"))
    assert cut_count(tree) == 1
    out = eliminate_cuts(tree).proof
    assert check_proof(CMALL, out).cut_count == 0
