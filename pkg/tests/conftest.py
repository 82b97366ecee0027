"""Shared test helpers: independent sympy oracles and random generators.

sympy is used only here, as an oracle the production code never imports.
"""
from __future__ import annotations

import random
from fractions import Fraction

import sympy

from defectlab import EventuallyPeriodicSet, SparseVector

Q = Fraction


def to_sympy_matrix(vectors, ambient):
    rows = [
        [sympy.Rational(x.numerator, x.denominator) for x in v.to_dense(ambient)]
        for v in vectors
    ]
    return sympy.Matrix(rows)


def oracle_rank(vectors, ambient):
    return to_sympy_matrix(vectors, ambient).rank()


def oracle_dist_sq(v, generators, ambient):
    """Squared distance via sympy least squares on the dense matrix."""
    if not generators:
        return Q(int(sympy.Rational(v.norm_sq()).p), int(sympy.Rational(v.norm_sq()).q))
    A = to_sympy_matrix(generators, ambient).T
    b = sympy.Matrix([sympy.Rational(x.numerator, x.denominator)
                      for x in v.to_dense(ambient)])
    proj = A * (A.T * A).pinv() * A.T * b
    r = (b - proj).dot(b - proj)
    r = sympy.nsimplify(r)
    return Q(int(sympy.Rational(r).p), int(sympy.Rational(r).q))


def oracle_nullspace_dim(vectors, ambient):
    return ambient - oracle_rank(vectors, ambient)


def oracle_intersection_dim(gen_a, gen_b, ambient):
    """dim(span A ∩ span B) = rank A + rank B - rank [A; B]."""
    ra = oracle_rank(gen_a, ambient)
    rb = oracle_rank(gen_b, ambient)
    rab = oracle_rank(list(gen_a) + list(gen_b), ambient)
    return ra + rb - rab


def random_sparse_vector(rng: random.Random, ambient: int) -> SparseVector:
    pairs = []
    for i in range(1, ambient + 1):
        if rng.random() < 0.6:
            num = rng.randint(-5, 5)
            if num:
                pairs.append((i, Q(num, rng.randint(1, 4))))
    return SparseVector.from_pairs(pairs)


def random_eventually_periodic(rng: random.Random) -> EventuallyPeriodicSet:
    period = rng.randint(1, 6)
    residues = [r for r in range(period) if rng.random() < 0.5]
    added = [rng.randint(1, 20) for _ in range(rng.randint(0, 3))]
    removed = [rng.randint(1, 20) for _ in range(rng.randint(0, 3))]
    removed = [k for k in removed if k not in added]
    return EventuallyPeriodicSet.make(period, residues, added, removed)
