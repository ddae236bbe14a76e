"""Spot-check the Fock algebra identities on one universe and print a table.

    python3 scripts/fock_identities.py [--universe FILE] [--triples N] [--seed S]

Without --universe the two-generator universe of monoid degree 3 and Fock
degree 3 is used.  Every row reports cases checked and failures found.
"""

from __future__ import annotations

import argparse
import itertools
import random
import sys
from collections import Counter

from cmall.fock import (
    FockElem, Universe, circ, delta, delta_n, in_pole, load_universe, pole, pole_witness, space, split_at, star,
    swap_at,
)


def _coassociativity(u):
    n = bad = 0
    for x in u.monomials():
        for k in range(1, 4):
            d = delta_n(x, k)
            for i in range(k + 1):
                n += 1
                bad += split_at(d, i) != delta_n(x, k + 1)
    return n, bad


def _cocommutativity(u):
    n = bad = 0
    for x in u.monomials():
        for k in range(1, 4):
            d = delta_n(x, k)
            for i, j in itertools.combinations(range(k + 1), 2):
                n += 1
                bad += swap_at(d, i, j) != d
    return n, bad


def _random_elem(rng, u, degree):
    comps = u.components()
    terms = [tuple(sorted(rng.choice(comps) for _ in range(degree))) for _ in range(rng.randint(1, u.max_terms))]
    return FockElem.of(terms, degree)


def _star_laws(u, count, rng):
    shapes = [s for s in itertools.product(range(1, u.max_fock_degree + 1), repeat=3)
              if s[0] * s[1] * s[2] <= u.max_fock_degree]
    bad = 0
    for _ in range(count):
        f, g, h = (_random_elem(rng, u, d) for d in rng.choice(shapes))
        bad += star(f, g) != star(g, f) or star(star(f, g), h) != star(f, star(g, h))
    return count, bad


def _distribution(u):
    simple = space(u).simple
    n = bad = 0
    for x in u.components():
        ux = FockElem(1, ((x,),))
        for s, t in itertools.product(simple, repeat=2):
            if len(s) + len(t) > u.max_fock_degree:
                continue
            f, g = FockElem(len(s), (s,)), FockElem(len(t), (t,))
            acc = Counter()
            for (x1, x2), m in delta(x).items():
                piece = circ(star(FockElem(1, ((x1,),)), f), star(FockElem(1, ((x2,),)), g))
                for term in piece.terms:
                    acc[term] += m
            n += 1
            bad += star(ux, circ(f, g)).counter() != acc
    return n, bad


def _pole_and_choice(u):
    p = pole(u)
    carrier = space(u).carrier
    n = len(carrier)
    bad = sum(bool(p.mask[i]) != in_pole(f, u) for i, f in enumerate(carrier))
    for f in p:
        w = pole_witness(f, u)
        bad += w is None or not all(FockElem(1, ((x,),)) in p for x in w[0])
    return n, bad


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--universe")
    ap.add_argument("--triples", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    u = load_universe(args.universe) if args.universe else Universe(("a", "b"), 3, 3, 2, frozenset({("a",)}))
    if not u.bottom:
        u = u.with_bottom(frozenset({u.monomials()[1]}))
    rng = random.Random(args.seed)
    print(f"# {u.describe()}")
    rows = [
        ("n-coassociativity", _coassociativity(u)),
        ("n-cocommutativity", _cocommutativity(u)),
        ("star comm/assoc", _star_laws(u, args.triples, rng)),
        ("distribution", _distribution(u)),
        ("pole fixpoint + choice", _pole_and_choice(u)),
    ]
    failed = 0
    for name, (n, bad) in rows:
        print(f"{name:24} checked={n:7} failures={bad}")
        failed += bad
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
