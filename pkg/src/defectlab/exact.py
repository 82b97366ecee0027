"""Exact rational linear algebra over sparsely supported vectors.

Everything in this module is exact: scalars are `fractions.Fraction`,
ranks come from fraction-free (Bareiss) elimination over the integers,
and projections solve the normal equations with rational Gaussian
elimination.  No floating point ever enters.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence


class DependentGenerators(ValueError):
    """Raised when an operation requires linearly independent generators."""


class BudgetExceeded(RuntimeError):
    """Raised when intermediate rationals exceed the configured digit budget."""


Q = Fraction


def _as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


# Rough bits-per-decimal-digit bound; used only for the abort guard, so an
# over-approximation is fine.
_BITS_PER_DIGIT = Fraction(10, 3)


def _check_budget(values: Iterable[Fraction], digit_budget: Optional[int]) -> None:
    if digit_budget is None:
        return
    limit = int(digit_budget * _BITS_PER_DIGIT)
    for v in values:
        if v.numerator.bit_length() > limit or v.denominator.bit_length() > limit:
            raise BudgetExceeded(
                f"rational entry exceeds digit budget of {digit_budget} digits"
            )


@dataclass(frozen=True)
class SparseVector:
    """Finitely supported vector over the ambient orthonormal basis.

    Entries are (index, value) pairs with strictly increasing positive
    indices and nonzero values; the zero vector has no entries.
    """

    entries: tuple

    def __post_init__(self):
        prev = 0
        for idx, val in self.entries:
            if idx <= prev:
                raise ValueError("indices must be strictly increasing and positive")
            if val == 0:
                raise ValueError("stored values must be nonzero")
            prev = idx

    @staticmethod
    def from_pairs(pairs) -> "SparseVector":
        acc = {}
        for idx, val in pairs:
            idx = int(idx)
            val = _as_fraction(val)
            acc[idx] = acc.get(idx, Q(0)) + val
        entries = tuple(
            (i, acc[i]) for i in sorted(acc) if acc[i] != 0
        )
        return SparseVector(entries)

    @staticmethod
    def unit(index: int) -> "SparseVector":
        return SparseVector(((index, Q(1)),))

    @staticmethod
    def zero() -> "SparseVector":
        return SparseVector(())

    def is_zero(self) -> bool:
        return not self.entries

    def get(self, index: int) -> Fraction:
        for i, v in self.entries:
            if i == index:
                return v
        return Q(0)

    def support(self):
        return tuple(i for i, _ in self.entries)

    def max_index(self) -> int:
        return self.entries[-1][0] if self.entries else 0

    def dot(self, other: "SparseVector") -> Fraction:
        a, b = self.entries, other.entries
        if len(a) > len(b):
            a, b = b, a
        lookup = dict(b)
        total = Q(0)
        for i, v in a:
            w = lookup.get(i)
            if w is not None:
                total += v * w
        return total

    def norm_sq(self) -> Fraction:
        return sum((v * v for _, v in self.entries), Q(0))

    def scale(self, c) -> "SparseVector":
        c = _as_fraction(c)
        if c == 0:
            return SparseVector.zero()
        return SparseVector(tuple((i, v * c) for i, v in self.entries))

    def __add__(self, other: "SparseVector") -> "SparseVector":
        return SparseVector.from_pairs(list(self.entries) + list(other.entries))

    def __sub__(self, other: "SparseVector") -> "SparseVector":
        return self + other.scale(-1)

    def __neg__(self) -> "SparseVector":
        return self.scale(-1)

    def to_dense(self, ambient: int) -> list:
        dense = [Q(0)] * ambient
        for i, v in self.entries:
            if i > ambient:
                raise ValueError(f"support index {i} exceeds ambient {ambient}")
            dense[i - 1] = v
        return dense


@dataclass(frozen=True)
class ExactMatrix:
    """Dense rational matrix in row-major order."""

    rows: int
    cols: int
    data: tuple

    def __post_init__(self):
        if len(self.data) != self.rows * self.cols:
            raise ValueError("data length does not match shape")

    @staticmethod
    def from_rows(rows: Sequence[Sequence[Fraction]]) -> "ExactMatrix":
        r = len(rows)
        c = len(rows[0]) if r else 0
        flat = []
        for row in rows:
            if len(row) != c:
                raise ValueError("ragged rows")
            flat.extend(_as_fraction(x) for x in row)
        return ExactMatrix(r, c, tuple(flat))

    def at(self, i: int, j: int) -> Fraction:
        return self.data[i * self.cols + j]

    def row(self, i: int) -> list:
        return list(self.data[i * self.cols : (i + 1) * self.cols])

    def row_lists(self) -> list:
        return [self.row(i) for i in range(self.rows)]

    def is_symmetric(self) -> bool:
        return self.rows == self.cols and all(
            self.at(i, j) == self.at(j, i)
            for i in range(self.rows)
            for j in range(i + 1, self.cols)
        )


def gram(vectors: Sequence[SparseVector], digit_budget: Optional[int] = None) -> ExactMatrix:
    """Gram matrix of exact pairwise inner products."""
    n = len(vectors)
    data = [Q(0)] * (n * n)
    for i in range(n):
        for j in range(i, n):
            val = vectors[i].dot(vectors[j])
            data[i * n + j] = val
            data[j * n + i] = val
    _check_budget(data, digit_budget)
    return ExactMatrix(n, n, tuple(data))


def _integer_rows(rows: Sequence[Sequence[Fraction]]) -> list:
    """Scale each row by the lcm of denominators; rank is unchanged."""
    out = []
    for row in rows:
        scale = 1
        for x in row:
            d = x.denominator
            if d != 1:
                g = _gcd(scale, d)
                scale = scale // g * d
        out.append([int(x * scale) for x in row])
    return out


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _bareiss_rank(rows: list) -> int:
    """Fraction-free single-step elimination; pivots on first nonzero entry."""
    m = [row[:] for row in rows]
    nrows = len(m)
    ncols = len(m[0]) if nrows else 0
    prev = 1
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, nrows):
            if m[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        if piv != r:
            m[r], m[piv] = m[piv], m[r]
        p = m[r][c]
        for i in range(r + 1, nrows):
            mic = m[i][c]
            rowi = m[i]
            rowr = m[r]
            for j in range(c + 1, ncols):
                rowi[j] = (rowi[j] * p - mic * rowr[j]) // prev
            rowi[c] = 0
        prev = p
        r += 1
        if r == nrows:
            break
    return r


def rank(matrix: ExactMatrix, digit_budget: Optional[int] = None) -> int:
    """Exact rank over the rationals via Bareiss elimination."""
    if matrix.rows == 0 or matrix.cols == 0:
        return 0
    _check_budget(matrix.data, digit_budget)
    return _bareiss_rank(_integer_rows(matrix.row_lists()))


def rank_of_vectors(vectors: Sequence[SparseVector], digit_budget: Optional[int] = None) -> int:
    """dim span(vectors), computed on the coordinate matrix."""
    vectors = [v for v in vectors if not v.is_zero()]
    if not vectors:
        return 0
    ambient = max(v.max_index() for v in vectors)
    rows = [v.to_dense(ambient) for v in vectors]
    for row in rows:
        _check_budget(row, digit_budget)
    return _bareiss_rank(_integer_rows(rows))


class _Echelon:
    """Incremental sparse row reduction used for independence pruning."""

    def __init__(self):
        self.pivot_rows = {}  # pivot index -> {index: value} with value 1 at pivot

    def _residual(self, vec: SparseVector) -> dict:
        work = dict(vec.entries)
        while work:
            lead = min(work)
            row = self.pivot_rows.get(lead)
            if row is None:
                return work
            coef = work[lead]
            for i, v in row.items():
                new = work.get(i, Q(0)) - coef * v
                if new == 0:
                    work.pop(i, None)
                else:
                    work[i] = new
        return work

    def add(self, vec: SparseVector) -> bool:
        """Insert vec; True iff it was independent of the rows seen so far."""
        res = self._residual(vec)
        if not res:
            return False
        lead = min(res)
        coef = res[lead]
        self.pivot_rows[lead] = {i: v / coef for i, v in res.items()}
        return True

    def contains(self, vec: SparseVector) -> bool:
        return not self._residual(vec)

    @property
    def rank(self) -> int:
        return len(self.pivot_rows)


def independent_subset(vectors: Sequence[SparseVector]) -> list:
    """Greedy maximal independent subset, scanning in the given order."""
    ech = _Echelon()
    out = []
    for v in vectors:
        if not v.is_zero() and ech.add(v):
            out.append(v)
    return out


def _solve(rows: list, rhs: list) -> Optional[list]:
    """Solve a square rational system by Gaussian elimination.

    Returns None when the matrix is singular.
    """
    n = len(rows)
    m = [list(rows[i]) + [rhs[i]] for i in range(n)]
    for col in range(n):
        piv = None
        for i in range(col, n):
            if m[i][col] != 0:
                piv = i
                break
        if piv is None:
            return None
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col]
        m[col] = [x * inv for x in m[col]]
        for i in range(n):
            if i != col and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[col])]
    return [m[i][n] for i in range(n)]


def _solve_multi(rows: list, rhs_cols: list) -> Optional[list]:
    """Solve one square system against several right-hand sides at once."""
    n = len(rows)
    w = len(rhs_cols)
    m = [list(rows[i]) + [col[i] for col in rhs_cols] for i in range(n)]
    for col in range(n):
        piv = None
        for i in range(col, n):
            if m[i][col] != 0:
                piv = i
                break
        if piv is None:
            return None
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col]
        m[col] = [x * inv for x in m[col]]
        for i in range(n):
            if i != col and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[col])]
    return [[m[i][n + j] for i in range(n)] for j in range(w)]


def dist_sq_many(
    probes: Sequence[SparseVector],
    generators: Sequence[SparseVector],
    digit_budget: Optional[int] = None,
) -> list:
    """dist_sq for several probes against one generator span.

    Factors the Gram system once, so it is much cheaper than repeated
    dist_sq calls with the same generators.
    """
    gens = independent_subset(generators)
    if not gens:
        return [p.norm_sq() for p in probes]
    g = gram(gens, digit_budget=digit_budget)
    rhs_cols = [[gen.dot(p) for gen in gens] for p in probes]
    sols = _solve_multi(g.row_lists(), rhs_cols)
    out = []
    for p, sol, rhs in zip(probes, sols, rhs_cols):
        d = p.norm_sq() - sum(c * b for c, b in zip(sol, rhs))
        out.append(d)
    _check_budget(out, digit_budget)
    return out


def project_coefficients(
    v: SparseVector,
    generators: Sequence[SparseVector],
    digit_budget: Optional[int] = None,
) -> list:
    """Coefficients c with sum(c_i g_i) = orthogonal projection of v.

    Requires independent generators; raises DependentGenerators otherwise.
    """
    if not generators:
        return []
    g = gram(generators, digit_budget=digit_budget)
    rhs = [gen.dot(v) for gen in generators]
    sol = _solve(g.row_lists(), rhs)
    if sol is None:
        raise DependentGenerators("Gram matrix is singular; prune generators first")
    return sol


def project(
    v: SparseVector,
    generators: Sequence[SparseVector],
    digit_budget: Optional[int] = None,
) -> SparseVector:
    """Exact orthogonal projection of v onto span(generators)."""
    gens = independent_subset(generators)
    coeffs = project_coefficients(v, gens, digit_budget=digit_budget)
    out = SparseVector.zero()
    for c, gvec in zip(coeffs, gens):
        if c != 0:
            out = out + gvec.scale(c)
    return out


def dist_sq(
    v: SparseVector,
    generators: Sequence[SparseVector],
    digit_budget: Optional[int] = None,
) -> Fraction:
    """Exact squared distance from v to span(generators).

    Dependent generators are pruned to a maximal independent subset.
    """
    gens = independent_subset(generators)
    if not gens:
        return v.norm_sq()
    coeffs = project_coefficients(v, gens, digit_budget=digit_budget)
    out = v.norm_sq()
    for c, gvec in zip(coeffs, gens):
        out -= c * gvec.dot(v)
    _check_budget((out,), digit_budget)
    return out


def _rref(rows: list) -> tuple:
    """Reduced row echelon form; returns (matrix, pivot column list)."""
    m = [row[:] for row in rows]
    nrows = len(m)
    ncols = len(m[0]) if nrows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, nrows):
            if m[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        if piv != r:
            m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return m, pivots


def complement_basis(
    generators: Sequence[SparseVector],
    ambient: int,
    digit_budget: Optional[int] = None,
) -> list:
    """Exact basis of the orthogonal complement inside coordinates 1..ambient."""
    gens = [g for g in generators if not g.is_zero()]
    for g in gens:
        if g.max_index() > ambient:
            raise ValueError("generator support exceeds ambient dimension")
    if not gens:
        return [SparseVector.unit(i) for i in range(1, ambient + 1)]
    rows = [g.to_dense(ambient) for g in gens]
    for row in rows:
        _check_budget(row, digit_budget)
    m, pivots = _rref(rows)
    pivot_set = set(pivots)
    basis = []
    for free in range(ambient):
        if free in pivot_set:
            continue
        pairs = [(free + 1, Q(1))]
        for r, pc in enumerate(pivots):
            coef = m[r][free]
            if coef != 0:
                pairs.append((pc + 1, -coef))
        basis.append(SparseVector.from_pairs(pairs))
    return basis


def intersect(
    gen_a: Sequence[SparseVector],
    gen_b: Sequence[SparseVector],
    ambient: int,
    digit_budget: Optional[int] = None,
) -> list:
    """Exact basis of span(gen_a) ∩ span(gen_b) inside 1..ambient.

    Uses the identity (A ∩ B) = (A⊥ + B⊥)⊥.
    """
    comp_a = complement_basis(gen_a, ambient, digit_budget=digit_budget)
    comp_b = complement_basis(gen_b, ambient, digit_budget=digit_budget)
    return complement_basis(comp_a + comp_b, ambient, digit_budget=digit_budget)
