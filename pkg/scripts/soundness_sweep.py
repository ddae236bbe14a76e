"""Check every provable corpus sequent in every swept phase structure.

    python3 scripts/soundness_sweep.py [--corpus DIR] [--sweep FILE] [--json]

Prints one line per sequent (rows, decided share, violations) and the
first violating structure of each failing sequent.  Exit status 1 when any
decided row is invalid.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from collections import defaultdict
from pathlib import Path

from cmall.calculus import Variant
from cmall.search import Proved, SearchLimits, prove, read_corpus_file
from cmall.semantics import DEFAULT_SWEEP, linear_fragment, load_sweep, sweep_harness
from cmall.syntax import is_modality_free

ROOT = Path(__file__).resolve().parent.parent


def provable(corpus: Path):
    out = []
    for path in sorted(corpus.glob("*.mseq")):
        e = read_corpus_file(path)
        if e.error or e.variant is not Variant.CMALL:
            continue
        if not all(is_modality_free(f) for f in e.goal.occ.values()):
            print(f"skip {path.stem}: modalities", file=sys.stderr)
            continue
        if isinstance(prove(Variant.CMALL, e.goal, SearchLimits(max_depth=12)), Proved):
            out.append((path.stem, e.goal))
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--corpus", default=str(ROOT / "corpus"))
    ap.add_argument("--sweep", default=str(ROOT / "configs" / "sweep.ini"))
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)

    cfg = load_sweep(args.sweep) if Path(args.sweep).is_file() else DEFAULT_SWEEP
    corpus = provable(Path(args.corpus))
    t0 = time.monotonic()
    report = sweep_harness(corpus, cfg)
    elapsed = time.monotonic() - t0

    by_seq = defaultdict(list)
    for r in report.rows:
        by_seq[r.sequent].append(r)
    lines, summary = [], []
    for name, goal in corpus:
        rows = by_seq[name]
        bad = [r for r in rows if r.valid is False]
        dec = sum(r.decided for r in rows)
        lin = linear_fragment(goal)
        lines.append(f"{'FAIL' if bad else 'ok  '} {name:20} {'LL ' if lin else 'CLL'} "
                     f"rows={len(rows):4} decided={dec / len(rows):6.1%} violations={len(bad)}")
        if bad:
            lines.append(f"     first: {bad[0].structure}")
        summary.append({"sequent": name, "linear": lin, "rows": len(rows), "decided": dec, "violations": len(bad)})

    if args.json:
        print(json.dumps({"rows": len(report.rows), "decided_fraction": report.decided_fraction,
                          "violations": len(report.violations), "linear_violations": len(report.linear_violations),
                          "seconds": round(elapsed, 1), "sequents": summary}, indent=2))
    else:
        print("\n".join(lines))
        print(f"{len(report.rows)} rows, {report.decided_fraction:.1%} decided, "
              f"{len(report.violations)} violations ({len(report.linear_violations)} in the linear fragment), "
              f"{elapsed:.1f}s")
    return 1 if report.violations else 0


if __name__ == "__main__":
    sys.exit(main())
