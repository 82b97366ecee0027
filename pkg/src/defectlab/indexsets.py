"""Eventually periodic subsets of the positive integers.

A set is a union of residue classes modulo a period, corrected by a
finite list of added and removed elements.  The class is closed under
complement, union, intersection, the tail-completion sigma_m, and
carries the exact weighted metric rho(A, B) = sum |1_A(k) - 1_B(k)| / 2^k.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import FrozenSet, Iterable

Q = Fraction


class SetSyntaxError(ValueError):
    """Raised on malformed set expressions."""


def _min_period(period: int, residues: FrozenSet[int]) -> tuple:
    """Smallest divisor of `period` that reproduces the residue pattern."""
    for d in range(1, period + 1):
        if period % d:
            continue
        projected = frozenset(r % d for r in residues)
        if all((r in residues) == (r % d in projected) for r in range(period)):
            return d, projected
    return period, residues  # unreachable


@dataclass(frozen=True)
class EventuallyPeriodicSet:
    """Canonical representation: minimal period, exceptions split so that
    `added` misses the residue pattern and `removed` matches it."""

    period: int
    residues: FrozenSet[int]
    added: FrozenSet[int]
    removed: FrozenSet[int]

    @staticmethod
    def make(period: int, residues: Iterable[int], added: Iterable[int] = (),
             removed: Iterable[int] = ()) -> "EventuallyPeriodicSet":
        if period < 1:
            raise ValueError("period must be positive")
        residues = frozenset(r % period for r in residues)
        added = frozenset(int(k) for k in added)
        removed = frozenset(int(k) for k in removed)
        if any(k < 1 for k in added | removed):
            raise ValueError("exception elements must be positive")

        def pattern(k):
            return (k % period) in residues

        def member(k):
            if k in added:
                return True
            if k in removed:
                return False
            return pattern(k)

        period2, residues2 = _min_period(period, residues)
        add2, rem2 = set(), set()
        for k in added | removed:
            pat = (k % period2) in residues2
            if member(k) and not pat:
                add2.add(k)
            elif not member(k) and pat:
                rem2.add(k)
        return EventuallyPeriodicSet(period2, residues2, frozenset(add2), frozenset(rem2))

    # -- constructors -------------------------------------------------
    @staticmethod
    def empty() -> "EventuallyPeriodicSet":
        return EventuallyPeriodicSet.make(1, ())

    @staticmethod
    def all() -> "EventuallyPeriodicSet":
        return EventuallyPeriodicSet.make(1, (0,))

    @staticmethod
    def finite(elements: Iterable[int]) -> "EventuallyPeriodicSet":
        return EventuallyPeriodicSet.make(1, (), added=elements)

    @staticmethod
    def residue_class(period: int, residues: Iterable[int]) -> "EventuallyPeriodicSet":
        return EventuallyPeriodicSet.make(period, residues)

    @staticmethod
    def tail(start: int) -> "EventuallyPeriodicSet":
        """The set {k : k >= start}."""
        return EventuallyPeriodicSet.make(1, (0,), removed=range(1, start))

    # -- membership ----------------------------------------------------
    def contains(self, k: int) -> bool:
        if k < 1:
            return False
        if k in self.added:
            return True
        if k in self.removed:
            return False
        return (k % self.period) in self.residues

    __contains__ = contains

    def is_finite(self) -> bool:
        return not self.residues

    def is_empty(self) -> bool:
        return not self.residues and not self.added

    def truncate(self, n: int) -> list:
        """Sorted list of the members in [1:n]."""
        return [k for k in range(1, n + 1) if self.contains(k)]

    def _exception_bound(self) -> int:
        exc = self.added | self.removed
        return max(exc) if exc else 0

    def min_element(self):
        """Smallest member, or None for the empty set."""
        bound = self._exception_bound() + self.period + 1
        for k in range(1, bound + 1):
            if self.contains(k):
                return k
        return None

    # -- algebra ---------------------------------------------------------
    def complement(self) -> "EventuallyPeriodicSet":
        comp = frozenset(range(self.period)) - self.residues
        return EventuallyPeriodicSet.make(self.period, comp,
                                          added=self.removed, removed=self.added)

    def _combine(self, other: "EventuallyPeriodicSet", op) -> "EventuallyPeriodicSet":
        period = math.lcm(self.period, other.period)
        residues = [
            r for r in range(period)
            if op((r % self.period) in self.residues, (r % other.period) in other.residues)
        ]
        exceptions = self.added | self.removed | other.added | other.removed
        added, removed = [], []
        for k in exceptions:
            truth = op(self.contains(k), other.contains(k))
            pat = (k % period) in residues
            if truth and not pat:
                added.append(k)
            elif not truth and pat:
                removed.append(k)
        return EventuallyPeriodicSet.make(period, residues, added, removed)

    def union(self, other: "EventuallyPeriodicSet") -> "EventuallyPeriodicSet":
        return self._combine(other, lambda a, b: a or b)

    def intersection(self, other: "EventuallyPeriodicSet") -> "EventuallyPeriodicSet":
        return self._combine(other, lambda a, b: a and b)

    def difference(self, other: "EventuallyPeriodicSet") -> "EventuallyPeriodicSet":
        return self.intersection(other.complement())

    def symmetric_difference(self, other: "EventuallyPeriodicSet") -> "EventuallyPeriodicSet":
        return self._combine(other, lambda a, b: a != b)

    def __or__(self, other):
        return self.union(other)

    def __and__(self, other):
        return self.intersection(other)

    def __invert__(self):
        return self.complement()

    def describe(self) -> str:
        parts = []
        if not self.residues:
            parts.append("fin(%s)" % ",".join(str(k) for k in sorted(self.added)))
            return parts[0] if self.added else "none"
        if self.period == 1:
            base = "all"
        else:
            base = "res(%d;%s)" % (self.period, ",".join(str(r) for r in sorted(self.residues)))
        out = base
        for k in sorted(self.added):
            out += "+%d" % k
        for k in sorted(self.removed):
            out += "-%d" % k
        return out


def set_algebra(op: str, a: EventuallyPeriodicSet,
                b: EventuallyPeriodicSet = None) -> EventuallyPeriodicSet:
    """Dispatch wrapper over complement / union / intersection."""
    if op == "complement":
        return a.complement()
    if b is None:
        raise ValueError(f"operation {op!r} needs two operands")
    if op == "union":
        return a.union(b)
    if op == "intersection":
        return a.intersection(b)
    raise ValueError(f"unknown set operation {op!r}")


def sigma_m(sigma: EventuallyPeriodicSet, m: int) -> EventuallyPeriodicSet:
    """sigma together with the whole tail [m+1, infinity)."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    return sigma.union(EventuallyPeriodicSet.tail(m + 1))


def rho(a: EventuallyPeriodicSet, b: EventuallyPeriodicSet) -> Fraction:
    """Exact value of sum_k |1_a(k) - 1_b(k)| / 2^k (closed form)."""
    diff = a.symmetric_difference(b)
    total = Q(0)
    p = diff.period
    geom = Q(2 ** p, 2 ** p - 1)
    for r in sorted(diff.residues):
        first = r if r >= 1 else p
        total += Q(1, 2 ** first) * geom
    for k in diff.added:
        total += Q(1, 2 ** k)
    for k in diff.removed:
        total -= Q(1, 2 ** k)
    return total


def rho_partial(a: EventuallyPeriodicSet, b: EventuallyPeriodicSet, terms: int) -> Fraction:
    """Truncated partial sum of the rho series (test oracle companion)."""
    total = Q(0)
    for k in range(1, terms + 1):
        if a.contains(k) != b.contains(k):
            total += Q(1, 2 ** k)
    return total


def prefix_agreement(a: EventuallyPeriodicSet, b: EventuallyPeriodicSet):
    """Largest m with a ∩ [1:m] = b ∩ [1:m]; math.inf when a = b."""
    diff = a.symmetric_difference(b)
    first = diff.min_element()
    if first is None:
        return math.inf
    return first - 1


def truncate(sigma: EventuallyPeriodicSet, n: int) -> list:
    return sigma.truncate(n)


# ---------------------------------------------------------------------------
# Expression grammar (shared with the CLI); see docs/sigma_grammar.ebnf.
#
#   expr    := term { "|" term }
#   term    := factor { "&" factor }
#   factor  := "~" factor | atom { ("+" | "-") integer }
#   atom    := "all" | "none" | "res(" p ";" r {"," r} ")"
#            | "fin(" [k {"," k}] ")" | "(" expr ")"
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(res|fin|all|none|\d+|[();,&|~+\-])")


def _tokenize(text: str) -> list:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise SetSyntaxError(f"unexpected character at {text[pos:]!r}")
        tokens.append(m.group(1))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None:
            raise SetSyntaxError("unexpected end of expression")
        if expected is not None and tok != expected:
            raise SetSyntaxError(f"expected {expected!r}, got {tok!r}")
        self.pos += 1
        return tok

    def int_token(self) -> int:
        tok = self.take()
        if not tok.isdigit():
            raise SetSyntaxError(f"expected integer, got {tok!r}")
        return int(tok)

    def expr(self) -> EventuallyPeriodicSet:
        node = self.term()
        while self.peek() == "|":
            self.take()
            node = node.union(self.term())
        return node

    def term(self) -> EventuallyPeriodicSet:
        node = self.factor()
        while self.peek() == "&":
            self.take()
            node = node.intersection(self.factor())
        return node

    def factor(self) -> EventuallyPeriodicSet:
        if self.peek() == "~":
            self.take()
            return self.factor().complement()
        node = self.atom()
        while self.peek() in ("+", "-"):
            op = self.take()
            k = self.int_token()
            single = EventuallyPeriodicSet.finite([k])
            node = node.union(single) if op == "+" else node.difference(single)
        return node

    def atom(self) -> EventuallyPeriodicSet:
        tok = self.take()
        if tok == "all":
            return EventuallyPeriodicSet.all()
        if tok == "none":
            return EventuallyPeriodicSet.empty()
        if tok == "(":
            node = self.expr()
            self.take(")")
            return node
        if tok == "res":
            self.take("(")
            period = self.int_token()
            self.take(";")
            residues = [self.int_token()]
            while self.peek() == ",":
                self.take()
                residues.append(self.int_token())
            self.take(")")
            if period < 1:
                raise SetSyntaxError("period must be positive")
            return EventuallyPeriodicSet.residue_class(period, residues)
        if tok == "fin":
            self.take("(")
            elements = []
            if self.peek() != ")":
                elements.append(self.int_token())
                while self.peek() == ",":
                    self.take()
                    elements.append(self.int_token())
            self.take(")")
            if any(k < 1 for k in elements):
                raise SetSyntaxError("fin() elements must be positive")
            return EventuallyPeriodicSet.finite(elements)
        raise SetSyntaxError(f"unexpected token {tok!r}")


def parse_set(text: str) -> EventuallyPeriodicSet:
    """Parse a set expression like "res(3;1)+2-4 | fin(9)"."""
    parser = _Parser(_tokenize(text))
    node = parser.expr()
    if parser.peek() is not None:
        raise SetSyntaxError(f"trailing input at {parser.peek()!r}")
    return node
