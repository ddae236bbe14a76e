"""Command-line front end.

    cmall prove FILE        search for a cut-free proof
    cmall check FILE        verify a proof file
    cmall eliminate FILE    rewrite a proof into a cut-free one
    cmall validate FILE --universe U
    cmall countermodel FILE
    cmall corpus DIR

Exit status is 0 when the command's expectation holds (a ``#expect`` line
in the input, otherwise success), 1 when it does not, 2 on usage or input
errors, 3 when ``validate`` cannot decide.  ``CMALL_THREADS`` caps the worker processes used by ``corpus``.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

from .calculus import Variant
from .cutelim import CutElimError, eliminate_cuts
from .fock import ConfigError, load_universe, parse_elem
from .proof import ProofError, check_proof, cut_count, deserialize_proof, proof_height, serialize_proof
from .search import (
    CorpusEntry, Proved, Refuted, SearchLimits, prove, prove_corpus, read_corpus_file,
)
from .semantics import (
    DEFAULT_SWEEP, PhaseStructure, SemanticsError, atoms_of, countermodel_search, describe_countermodel,
    fact_from_seed, is_valid, load_sweep,
)
from .syntax import ParseError, render_multisequent


class UsageError(Exception):
    pass


def _limits(args) -> SearchLimits:
    return SearchLimits(max_depth=args.max_depth, max_structural_run=args.max_structural,
                        time_budget=args.time_budget)


def _header(cmd: str, args) -> str:
    return (f"# cmall {cmd} variant={args.variant} max_depth={args.max_depth} "
            f"max_structural={args.max_structural} universe_degree={args.universe_degree}")


class Writer:
    """Single output channel: text lines or one JSON document at the end."""

    def __init__(self, as_json: bool):
        self.as_json = as_json
        self.doc: dict = {}

    def line(self, text: str) -> None:
        if not self.as_json:
            print(text, flush=True)

    def put(self, **kv) -> None:
        self.doc.update(kv)

    def close(self) -> None:
        if self.as_json:
            print(json.dumps(self.doc, indent=2, sort_keys=True))


def _entry(path: str, args) -> CorpusEntry:
    if not Path(path).is_file():
        raise UsageError(f"no such file: {path}")
    entry = read_corpus_file(path)
    if entry.error:
        raise UsageError(f"{path}: {entry.error}")
    if args.variant_given:
        entry = CorpusEntry(entry.path, entry.goal, entry.expect, Variant(args.variant))
    return entry


def _status(outcome) -> str:
    return "proved" if isinstance(outcome, Proved) else "refuted" if isinstance(outcome, Refuted) else "unknown"


def cmd_prove(args, out: Writer) -> int:
    entry = _entry(args.file, args)
    out.line(_header("prove", args))
    outcome = prove(entry.variant, entry.goal, _limits(args))
    status = _status(outcome)
    out.line(f"{status.capitalize()}  {render_multisequent(entry.goal)}  (visited {outcome.visited})")
    out.put(command="prove", file=args.file, variant=entry.variant.value, status=status, visited=outcome.visited)
    if isinstance(outcome, Proved):
        text = serialize_proof(outcome.proof)
        if args.out:
            Path(args.out).write_text(text + "\n", encoding="utf-8")
            out.line(f"proof written to {args.out}")
        else:
            out.line(text)
        out.put(proof=text, height=proof_height(outcome.proof))
    elif hasattr(outcome, "reason"):
        out.line(f"reason: {outcome.reason}")
    expect = args.expect or entry.expect or "proved"
    out.put(expect=expect)
    return 0 if status == expect else 1


def _read_proof(path: str):
    try:
        return deserialize_proof(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(str(exc)) from None
    except (ParseError, ValueError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def cmd_check(args, out: Writer) -> int:
    tree = _read_proof(args.file)
    out.line(_header("check", args))
    try:
        stats = check_proof(Variant(args.variant), tree)
    except ProofError as exc:
        out.line(f"FAIL {exc}")
        out.put(command="check", file=args.file, ok=False, error=str(exc))
        return 1
    out.line(f"OK height={stats.height} size={stats.size} cuts={stats.cut_count}")
    out.line("rules: " + " ".join(f"{k}={v}" for k, v in stats.histogram.items()))
    out.put(command="check", file=args.file, ok=True, height=stats.height, size=stats.size,
            cuts=stats.cut_count, rules=stats.histogram)
    return 0


def cmd_eliminate(args, out: Writer) -> int:
    tree = _read_proof(args.file)
    variant = Variant(args.variant)
    out.line(_header("eliminate", args))
    try:
        check_proof(variant, tree)
        result = eliminate_cuts(tree, args.step_limit, variant)
        check_proof(variant, result.proof)
    except ProofError as exc:
        out.line(f"FAIL {exc}")
        out.put(command="eliminate", ok=False, error=str(exc))
        return 1
    except CutElimError as exc:
        out.line(f"FAIL {exc}")
        out.put(command="eliminate", ok=False, error=str(exc))
        return 1
    text = serialize_proof(result.proof)
    out.line(f"OK cuts {cut_count(tree)} -> {cut_count(result.proof)} in {len(result.steps)} steps")
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        out.line(f"proof written to {args.out}")
    else:
        out.line(text)
    out.put(command="eliminate", ok=True, steps=len(result.steps), proof=text)
    return 0


def _structure(path: str, atoms: Sequence[str], exact: bool) -> PhaseStructure:
    """Universe file plus a ``[valuation]`` section (atom = seed element, or ``default``)."""
    u = load_universe(path)
    cp = configparser.ConfigParser()
    cp.optionxform = str
    cp.read(path, encoding="utf-8")
    seeds = dict(cp["valuation"]) if "valuation" in cp else {}
    val = {}
    for a in atoms:
        text = seeds.get(a, seeds.get("default"))
        if text is None:
            raise UsageError(f"{path}: no seed for atom {a} in [valuation]")
        val[a] = fact_from_seed(u, parse_elem(text), exact)
    constants = cp["universe"].get("constants", "standard")
    return PhaseStructure(u, val, constants, Path(path).name, exact, check=False)


def cmd_validate(args, out: Writer) -> int:
    """Exit 0 valid, 1 invalid, 3 when the two orthogonality policies disagree."""
    if not args.universe:
        raise UsageError("validate needs --universe FILE")
    entry = _entry(args.file, args)
    out.line(_header("validate", args))
    try:
        ps = _structure(args.universe, atoms_of(entry.goal), args.exact)
        twin = _structure(args.universe, atoms_of(entry.goal), not args.exact)
    except (ConfigError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    out.line(f"# universe {ps.universe.describe()}")
    rep, cross = is_valid(ps, entry.goal), is_valid(twin, entry.goal)
    decided = rep.valid == cross.valid
    out.line(rep.summary())
    if not decided:
        out.line(f"unknown: other policy says {cross.summary()}")
    out.put(command="validate", file=args.file, valid=rep.valid if decided else None,
            assignments=rep.assignments, overflow=rep.overflow, fact_overflow=rep.fact_overflow,
            vacuous=rep.vacuous)
    return 3 if not decided else 0 if rep.valid else 1


def cmd_countermodel(args, out: Writer) -> int:
    entry = _entry(args.file, args)
    cfg = load_sweep(args.sweep) if args.sweep else DEFAULT_SWEEP
    out.line(_header("countermodel", args))
    try:
        cm = countermodel_search(entry.goal, cfg, args.budget)
    except SemanticsError as exc:
        raise UsageError(str(exc)) from None
    if cm is None:
        out.line(f"none found  {render_multisequent(entry.goal)}")
        out.put(command="countermodel", found=False)
        return 0
    out.line(describe_countermodel(cm, entry.goal))
    out.put(command="countermodel", found=True, structure=cm.structure.describe(), certificate=cm.certificate)
    return 1 if entry.expect == "proved" else 0


def _corpus_job(job):
    path, variant, limits = job
    return prove_corpus([path], limits, variant=variant).rows[0]


def cmd_corpus(args, out: Writer) -> int:
    root = Path(args.file)
    if not root.is_dir():
        raise UsageError(f"not a directory: {root}")
    files = sorted(str(p) for p in root.glob("*.mseq"))
    out.line(_header("corpus", args))
    variant = Variant(args.variant) if args.variant_given else None
    threads = max(1, int(os.environ.get("CMALL_THREADS", "1") or 1))
    jobs = [(f, variant, _limits(args)) for f in files]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_corpus_job, jobs))
    else:
        rows = [_corpus_job(j) for j in jobs]
    failures = 0
    records = []
    for row in rows:
        mark = "ok  " if row.ok else "FAIL"
        failures += not row.ok
        expect = row.entry.expect or "-"
        note = f" {row.entry.error}" if row.entry.error else ""
        out.line(f"{mark} {row.status:8} expect={expect:8} {row.entry.variant.value:5} "
                 f"{row.seconds:6.2f}s {row.entry.path}{note}")
        records.append({"path": row.entry.path, "status": row.status, "expect": row.entry.expect,
                        "ok": row.ok, "variant": row.entry.variant.value, "seconds": round(row.seconds, 3)})
    out.line(f"{len(rows) - failures}/{len(rows)} as expected")
    out.put(command="corpus", rows=records, ok=failures == 0)
    return 0 if failures == 0 else 1


COMMANDS = {
    "prove": cmd_prove, "check": cmd_check, "eliminate": cmd_eliminate,
    "validate": cmd_validate, "countermodel": cmd_countermodel, "corpus": cmd_corpus,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cmall", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("file", help="input file (a directory for corpus)")
    p.add_argument("--variant", choices=[v.value for v in Variant], default=None)
    p.add_argument("--max-depth", type=int, default=12)
    p.add_argument("--max-structural", type=int, default=4)
    p.add_argument("--time-budget", type=float, default=60.0)
    p.add_argument("--universe", help="universe file for validate")
    p.add_argument("--sweep", help="sweep configuration for countermodel")
    p.add_argument("--exact", action="store_true", help="test out-of-bounds products exactly")
    p.add_argument("--budget", type=int, default=5_000, help="structures tried by countermodel")
    p.add_argument("--step-limit", type=int, default=100_000)
    p.add_argument("--expect", choices=["proved", "refuted", "unknown"])
    p.add_argument("--out", help="write the resulting proof here")
    p.add_argument("--json", action="store_true")
    return p


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.variant_given = args.variant is not None
    args.variant = args.variant or Variant.CMALL.value
    args.universe_degree = 3
    if args.universe:
        try:
            args.universe_degree = load_universe(args.universe).max_fock_degree
        except ConfigError as exc:
            print(f"cmall: {exc}", file=sys.stderr)
            return 2
    if args.max_depth < 1 or args.max_structural < 1:
        print("cmall: limits must be positive", file=sys.stderr)
        return 2
    out = Writer(args.json)
    try:
        code = COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"cmall: {exc}", file=sys.stderr)
        return 2
    out.close()
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
