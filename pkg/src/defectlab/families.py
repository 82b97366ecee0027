"""Generators for the vector families under study.

Each family produces, for any index k, the primal vector x_k and its
biorthogonal partner x_k* as exact SparseVectors, together with the
predicted limiting defect and an explicit witness basis for the
orthogonal complement of a mixed system.
"""
from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional

from .exact import (
    SparseVector,
    complement_basis,
    gram,
    independent_subset,
    project_coefficients,
)
from .indexsets import EventuallyPeriodicSet

Q = Fraction

INFINITE = math.inf


class UnsupportedFamily(ValueError):
    """Raised when a family does not support defect prediction."""


class MalformedDefectSet(ValueError):
    """Raised for defect sets that are not strictly increasing from 0."""


class FamilySyntaxError(ValueError):
    """Raised on malformed family descriptors."""


class SystemFamily:
    """Base class: a rule-based (x_k, x_k*) generator with metadata."""

    kind: str = ""
    index_offset: int = 0

    def vector(self, k: int) -> SparseVector:
        raise NotImplementedError

    def dual(self, k: int) -> SparseVector:
        raise NotImplementedError

    def ambient(self, n: int) -> int:
        """Smallest coordinate window containing x_1..x_n and duals."""
        raise NotImplementedError

    def descriptor(self) -> str:
        raise NotImplementedError

    def default_probe_window(self) -> int:
        return 5

    def max_index(self) -> Optional[int]:
        """Largest defined index, or None for genuinely infinite families."""
        return None

    # -- defect prediction --------------------------------------------
    def predicted_defect(self, sigma: EventuallyPeriodicSet):
        raise UnsupportedFamily(f"{self.kind} supports no defect prediction")

    def witness_space(self, sigma: EventuallyPeriodicSet, n: int,
                      window: Optional[int] = None) -> List[SparseVector]:
        raise UnsupportedFamily(f"{self.kind} supports no witness generator")

    def witnesses_unbounded(self, sigma: EventuallyPeriodicSet) -> bool:
        return False

    def predicted_exceptional(self, sigma: EventuallyPeriodicSet, n: int) -> frozenset:
        """Indices k <= n that normalization moves across the partition."""
        raise UnsupportedFamily(f"{self.kind} supports no witness generator")

    def vectors(self, indices) -> List[SparseVector]:
        return [self.vector(k) for k in indices]


@dataclass
class E1PlusEkFamily(SystemFamily):
    """x_i = e_1 + e_{i+1}; internal index 1 maps to the original start at 2."""

    kind: str = "e1-plus-ek"
    index_offset: int = 1

    def vector(self, k):
        return SparseVector.from_pairs([(1, Q(1)), (k + 1, Q(1))])

    def dual(self, k):
        return SparseVector.unit(k + 1)

    def ambient(self, n):
        return n + 1

    def descriptor(self):
        return "e1-plus-ek"

    def predicted_defect(self, sigma):
        return 0 if not sigma.is_finite() else 1

    def witness_space(self, sigma, n, window=None):
        if sigma.is_finite():
            return [SparseVector.unit(1)]
        return []

    def predicted_exceptional(self, sigma, n):
        if sigma.is_finite():
            return frozenset(sigma.truncate(n))
        return frozenset()


@dataclass
class YoungFamily(SystemFamily):
    """x_k = 2^k sum_{j<=min(k,W)} k^{1-j} f_j + e_k with the f-block first."""

    width: int
    kind: str = "young"

    def __post_init__(self):
        if self.width < 0:
            raise ValueError("width must be nonnegative")

    def f_coord(self, j):
        return j

    def e_coord(self, k):
        return self.width + k

    def vector(self, k):
        pairs = []
        for j in range(1, min(k, self.width) + 1):
            pairs.append((self.f_coord(j), Q(2 ** k) / Q(k ** (j - 1))))
        pairs.append((self.e_coord(k), Q(1)))
        return SparseVector.from_pairs(pairs)

    def dual(self, k):
        return SparseVector.unit(self.e_coord(k))

    def ambient(self, n):
        return self.width + n

    def descriptor(self):
        return f"young(w={self.width})"

    def default_probe_window(self):
        return max(self.width, 5)

    def predicted_defect(self, sigma):
        return 0 if not sigma.is_finite() else self.width

    def witness_space(self, sigma, n, window=None):
        if sigma.is_finite():
            return [SparseVector.unit(self.f_coord(j)) for j in range(1, self.width + 1)]
        return []

    def predicted_exceptional(self, sigma, n):
        if sigma.is_finite() and self.width > 0:
            return frozenset(sigma.truncate(n))
        return frozenset()


@dataclass
class DefectPairFamily(SystemFamily):
    """x_k = e_1 + k e_2 + ... + k^{m-1} e_m + e_{m+k}; defects are {0, m}."""

    m: int
    kind: str = "defect-pair"

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be positive")

    def vector(self, k):
        pairs = [(j, Q(k ** (j - 1))) for j in range(1, self.m + 1)]
        pairs.append((self.m + k, Q(1)))
        return SparseVector.from_pairs(pairs)

    def dual(self, k):
        return SparseVector.unit(self.m + k)

    def ambient(self, n):
        return self.m + n

    def descriptor(self):
        return f"defect-pair(m={self.m})"

    def default_probe_window(self):
        return max(self.m, 5)

    def predicted_defect(self, sigma):
        return 0 if not sigma.is_finite() else self.m

    def witness_space(self, sigma, n, window=None):
        if sigma.is_finite():
            return [SparseVector.unit(j) for j in range(1, self.m + 1)]
        return []

    def predicted_exceptional(self, sigma, n):
        if sigma.is_finite():
            return frozenset(sigma.truncate(n))
        return frozenset()


def _check_defect_set(finite_part) -> list:
    S = [int(x) for x in finite_part]
    if not S or S[0] != 0:
        raise MalformedDefectSet("defect set must start with 0")
    if any(a >= b for a, b in zip(S, S[1:])):
        raise MalformedDefectSet("defect set must be strictly increasing")
    return S


@dataclass
class FiniteDefectSetFamily(SystemFamily):
    """Interleaved family realizing a finite defect set S = {0=k_0,...,k_s}.

    x_k uses the variant with superscript j = (k-1) mod (s+1).
    """

    defect_set: tuple
    kind: str = "finite-set"

    def __post_init__(self):
        object.__setattr__(self, "defect_set", tuple(_check_defect_set(self.defect_set)))

    @property
    def s(self):
        return len(self.defect_set) - 1

    @property
    def k_s(self):
        return self.defect_set[-1]

    def class_of(self, k: int) -> int:
        return (k - 1) % (self.s + 1)

    def class_set(self, j: int) -> EventuallyPeriodicSet:
        period = self.s + 1
        return EventuallyPeriodicSet.residue_class(period, [(j + 1) % period])

    def vector(self, k):
        j = self.class_of(k)
        kj = self.defect_set[j]
        pairs = [(l, Q(k ** (l - 1))) for l in range(kj + 1, self.k_s + 1)]
        pairs.append((k + self.k_s, Q(1)))
        return SparseVector.from_pairs(pairs)

    def dual(self, k):
        return SparseVector.unit(k + self.k_s)

    def ambient(self, n):
        return self.k_s + n

    def descriptor(self):
        return "finite-set(%s)" % ",".join(str(x) for x in self.defect_set)

    def default_probe_window(self):
        return max(self.k_s, 5)

    def _leading_class(self, sigma: EventuallyPeriodicSet) -> int:
        """Smallest class index meeting sigma infinitely often; s if none."""
        for j in range(self.s + 1):
            if not sigma.intersection(self.class_set(j)).is_finite():
                return j
        return self.s

    def predicted_defect(self, sigma):
        return self.defect_set[self._leading_class(sigma)]

    def witness_space(self, sigma, n, window=None):
        kj = self.defect_set[self._leading_class(sigma)]
        return [SparseVector.unit(i) for i in range(1, kj + 1)]

    def predicted_exceptional(self, sigma, n):
        kj1 = self.defect_set[self._leading_class(sigma)]
        return frozenset(
            k for k in sigma.truncate(n) if self.defect_set[self.class_of(k)] < kj1
        )


@dataclass
class InfiniteDefectSetFamily(SystemFamily):
    """Triangular-block family realizing S = {0=k_0,...,k_s, infinity}.

    Superscripts follow the pattern x_1^0, x_2^0, x_3^1, x_4^0, x_5^1,
    x_6^2, ... and are padded with k_j = k_s beyond the finite part.
    Layout interleaves the two blocks: f_j at coordinate 2j-1, e_n at 2n.
    """

    finite_part: tuple
    kind: str = "infinite-set"

    def __post_init__(self):
        object.__setattr__(self, "finite_part", tuple(_check_defect_set(self.finite_part)))

    @property
    def s(self):
        return len(self.finite_part) - 1

    @staticmethod
    def superscript(n: int) -> int:
        t = math.isqrt(8 * (n - 1) + 1)
        m = (t - 1) // 2
        return n - m * (m + 1) // 2 - 1

    def effective_class(self, n: int) -> int:
        return min(self.superscript(n), self.s)

    def k_eff(self, n: int) -> int:
        return self.finite_part[self.effective_class(n)]

    def f_coord(self, j):
        return 2 * j - 1

    def e_coord(self, n):
        return 2 * n

    def vector(self, n):
        kj = self.k_eff(n)
        pairs = [
            (self.f_coord(j), Q(2 ** n) / Q(n ** (j - 1)))
            for j in range(kj + 1, n + 1)
        ]
        pairs.append((self.e_coord(n), Q(1)))
        return SparseVector.from_pairs(pairs)

    def dual(self, n):
        return SparseVector.unit(self.e_coord(n))

    def ambient(self, n):
        return 2 * n

    def descriptor(self):
        return "infinite-set(%s,inf)" % ",".join(str(x) for x in self.finite_part)

    def default_probe_window(self):
        return max(self.k_s_value(), 5)

    def k_s_value(self):
        return self.finite_part[-1]

    def _class_infinite(self, sigma: EventuallyPeriodicSet, j: int) -> bool:
        """Does sigma meet {n : effective class(n) = j} infinitely often?"""
        if j == self.s:
            return not sigma.is_finite()
        p = sigma.period
        bound = sigma._exception_bound()
        m = j
        while m * (m + 1) // 2 + j + 1 <= bound:
            m += 1
        for step in range(2 * p):
            n = (m + step) * (m + step + 1) // 2 + j + 1
            if (n % p) in sigma.residues:
                return True
        return False

    def _leading_class(self, sigma: EventuallyPeriodicSet) -> Optional[int]:
        """Smallest effective class meeting sigma infinitely; None if all finite."""
        if sigma.is_finite():
            return None
        for j in range(self.s + 1):
            if self._class_infinite(sigma, j):
                return j
        return None

    def predicted_defect(self, sigma):
        j1 = self._leading_class(sigma)
        if j1 is None:
            return INFINITE
        return self.finite_part[j1]

    def witnesses_unbounded(self, sigma):
        return self._leading_class(sigma) is None

    def witness_space(self, sigma, n, window=None):
        j1 = self._leading_class(sigma)
        if j1 is not None:
            kj = self.finite_part[j1]
            return [SparseVector.unit(self.f_coord(j)) for j in range(1, kj + 1)]
        # Defect-infinity regime: one witness f_j + x' per f-direction, with
        # the exact correction c_n = -2^n / n^{j-1} over the finitely many
        # n in sigma whose expansion contains f_j.
        if window is None:
            window = self.default_probe_window()
        members = sigma.truncate(n)
        witnesses = []
        for j in range(1, min(window, n) + 1):
            pairs = [(self.f_coord(j), Q(1))]
            for m in members:
                if self.k_eff(m) < j <= m:
                    pairs.append((self.e_coord(m), -Q(2 ** m) / Q(m ** (j - 1))))
            witnesses.append(SparseVector.from_pairs(pairs))
        return witnesses

    def predicted_exceptional(self, sigma, n):
        j1 = self._leading_class(sigma)
        if j1 is None:
            return frozenset()
        kj1 = self.finite_part[j1]
        return frozenset(
            m for m in sigma.truncate(n) if self.k_eff(m) < kj1
        )


@dataclass
class RandomFiniteFamily(SystemFamily):
    """Seeded random independent system in a finite ambient space.

    The biorthogonal family is the dual basis inside the span, optionally
    perturbed by exact components from the orthogonal complement (which
    preserves biorthogonality but exercises its non-uniqueness).
    """

    dim: int
    count: int
    seed: int
    dual_style: str = "span"
    kind: str = "random"
    _vectors: list = field(default=None, repr=False, compare=False)
    _duals: list = field(default=None, repr=False, compare=False)

    MAX_RETRIES = 50

    def __post_init__(self):
        if self.count > self.dim:
            raise ValueError("count must not exceed ambient dimension")
        if self.dual_style not in ("span", "perturbed"):
            raise ValueError("dual_style must be 'span' or 'perturbed'")
        self._generate()

    def _generate(self):
        rng = random.Random(self.seed)
        for _ in range(self.MAX_RETRIES):
            vecs = []
            for _k in range(self.count):
                pairs = [(i, rng.randint(-3, 3)) for i in range(1, self.dim + 1)]
                vecs.append(SparseVector.from_pairs([(i, Q(v)) for i, v in pairs if v]))
            if any(v.is_zero() for v in vecs):
                continue
            if len(independent_subset(vecs)) == self.count:
                break
        else:
            raise RuntimeError("failed to draw an independent system")
        g = gram(vecs)
        duals = []
        comp = complement_basis(vecs, self.dim) if self.dual_style == "perturbed" else []
        for k in range(self.count):
            target = SparseVector.zero()
            rhs_vec = [Q(1) if i == k else Q(0) for i in range(self.count)]
            coeffs = _solve_gram(g, rhs_vec)
            for c, v in zip(coeffs, vecs):
                if c != 0:
                    target = target + v.scale(c)
            if comp:
                for w in comp:
                    c = rng.randint(-2, 2)
                    if c:
                        target = target + w.scale(Q(c))
            duals.append(target)
        self._vectors = vecs
        self._duals = duals

    def vector(self, k):
        return self._vectors[k - 1]

    def dual(self, k):
        return self._duals[k - 1]

    def ambient(self, n):
        return self.dim

    def max_index(self):
        return self.count

    def descriptor(self):
        return (
            f"random(d={self.dim},n={self.count},seed={self.seed},dual={self.dual_style})"
        )


def _solve_gram(g, rhs):
    from .exact import _solve, DependentGenerators

    sol = _solve(g.row_lists(), rhs)
    if sol is None:
        raise DependentGenerators("singular Gram in dual-basis construction")
    return sol


# -- family constructors matching the operation-level API -------------------

def make_e1_plus_ek(n: int) -> E1PlusEkFamily:
    if n < 1:
        raise ValueError("n must be positive")
    return E1PlusEkFamily()


def make_young(width: int, n: int = 0) -> YoungFamily:
    return YoungFamily(width=width)


def make_defect_pair(m: int, n: int = 0) -> DefectPairFamily:
    return DefectPairFamily(m=m)


def make_finite_defect_set(defect_set, n: int = 0) -> FiniteDefectSetFamily:
    return FiniteDefectSetFamily(defect_set=tuple(defect_set))


def make_infinite_defect_set(defect_set, n: int = 0) -> InfiniteDefectSetFamily:
    finite_part = [x for x in defect_set if x != INFINITE and x != "inf"]
    if len(finite_part) == len(tuple(defect_set)):
        raise MalformedDefectSet("defect set must contain infinity")
    return InfiniteDefectSetFamily(finite_part=tuple(finite_part))


def make_random_finite(dim: int, count: int, seed: int,
                       dual_style: str = "span") -> RandomFiniteFamily:
    return RandomFiniteFamily(dim=dim, count=count, seed=seed, dual_style=dual_style)


# -- descriptor grammar ------------------------------------------------------

_FAMILY_RE = re.compile(r"^\s*([a-z0-9\-]+)\s*(?:\(([^)]*)\))?\s*$")


def parse_family(text: str) -> SystemFamily:
    """Parse a family descriptor, e.g. "defect-pair(m=3)" or "finite-set(0,1,3)"."""
    m = _FAMILY_RE.match(text)
    if not m:
        raise FamilySyntaxError(f"malformed family descriptor: {text!r}")
    name, argtext = m.group(1), m.group(2) or ""
    args = [a.strip() for a in argtext.split(",") if a.strip()]

    def kwargs():
        out = {}
        for a in args:
            if "=" not in a:
                raise FamilySyntaxError(f"expected key=value in {text!r}")
            key, val = a.split("=", 1)
            out[key.strip()] = val.strip()
        return out

    try:
        if name == "e1-plus-ek":
            return E1PlusEkFamily()
        if name == "young":
            return YoungFamily(width=int(kwargs()["w"]))
        if name == "defect-pair":
            return DefectPairFamily(m=int(kwargs()["m"]))
        if name == "finite-set":
            return FiniteDefectSetFamily(defect_set=tuple(int(a) for a in args))
        if name == "infinite-set":
            if not args or args[-1] != "inf":
                raise MalformedDefectSet("infinite-set must end with 'inf'")
            return InfiniteDefectSetFamily(
                finite_part=tuple(int(a) for a in args[:-1])
            )
        if name == "random":
            kw = kwargs()
            return RandomFiniteFamily(
                dim=int(kw["d"]),
                count=int(kw["n"]),
                seed=int(kw.get("seed", "0")),
                dual_style=kw.get("dual", "span"),
            )
    except (KeyError, ValueError) as exc:
        if isinstance(exc, (MalformedDefectSet,)):
            raise
        raise FamilySyntaxError(f"bad arguments in {text!r}: {exc}") from exc
    raise FamilySyntaxError(f"unknown family kind {name!r}")
