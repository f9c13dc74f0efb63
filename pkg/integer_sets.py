#!/usr/bin/env python3
"""
Integer sets and the closed-form descriptors that generate them.

A descriptor knows the n-th term of its set (n starts at 1) and, for a
modulus q, the eventually periodic sequence of residues of its terms. The
residue data is what lets a rational rotation be checked against a whole
infinite set instead of a finite prefix.

Descriptor syntax accepted by parse_descriptor:

    squares, cubes, naturals, odd, even, pow2, pow3, pow<b>, factorial, n!
    n, 3n, n^2, 5                     polynomial terms
    pow2+1, pow2+2n, pow2+2n-1        termwise sums
    pow2|pow2+1                       unions
    pow2+2n@3                         terms from n = 3 on
    1..8, 1,4,9                       explicit finite sets
"""

import bisect
import heapq
import logging
import math
import re
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

from errors import DescriptorParseError

logger = logging.getLogger(__name__)

# Longest residue pattern (preperiod + period) worth materializing
RESIDUE_CAP = 1 << 20

ResidueCycle = Tuple[Tuple[int, ...], Tuple[int, ...]]


class SetDescriptor:
    """Closed-form description of an infinite (or explicit finite) integer set"""

    text: str = ""
    finite: bool = False
    termwise: bool = True

    def term(self, n: int) -> int:
        raise NotImplementedError

    def first(self, count: int) -> List[int]:
        return [self.term(n) for n in range(1, count + 1)]

    def residue_cycle(self, q: int) -> Optional[ResidueCycle]:
        """(preperiod, period) of term residues mod q, or None if unavailable"""
        return None

    def residue_set(self, q: int) -> Optional[FrozenSet[int]]:
        """Every residue mod q attained by some term of the full set"""
        cycle = self.residue_cycle(q)
        if cycle is None:
            return None
        return frozenset(cycle[0]) | frozenset(cycle[1])

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class Geometric(SetDescriptor):
    coefficient: int
    base: int

    @property
    def text(self) -> str:
        head = f"pow{self.base}"
        return head if self.coefficient == 1 else f"{self.coefficient}*{head}"

    def term(self, n: int) -> int:
        return self.coefficient * self.base ** n

    def residue_cycle(self, q: int) -> Optional[ResidueCycle]:
        seen = {}
        residues: List[int] = []
        state = self.base % q
        while state not in seen:
            if len(residues) > RESIDUE_CAP:
                return None
            seen[state] = len(residues)
            residues.append(self.coefficient * state % q)
            state = state * self.base % q
        start = seen[state]
        return tuple(residues[:start]), tuple(residues[start:])


@dataclass(frozen=True)
class PolynomialTerms(SetDescriptor):
    """sum_i coefficients[i] * n^i with integer coefficients"""
    coefficients: Tuple[int, ...]

    @property
    def text(self) -> str:
        parts = []
        for power, c in enumerate(self.coefficients):
            if c == 0:
                continue
            if power == 0:
                parts.append(str(c))
            else:
                mono = "n" if power == 1 else f"n^{power}"
                parts.append(mono if c == 1 else f"{c}{mono}")
        return "+".join(parts).replace("+-", "-") or "0"

    def term(self, n: int) -> int:
        return sum(c * n ** power for power, c in enumerate(self.coefficients))

    def residue_cycle(self, q: int) -> Optional[ResidueCycle]:
        if q > RESIDUE_CAP:
            return None
        return (), tuple(self.term(n) % q for n in range(1, q + 1))


@dataclass(frozen=True)
class Factorial(SetDescriptor):
    text = "factorial"

    def term(self, n: int) -> int:
        return math.factorial(n)

    def residue_cycle(self, q: int) -> Optional[ResidueCycle]:
        residues: List[int] = []
        value = 1 % q
        n = 1
        while value != 0:
            residues.append(value)
            n += 1
            value = value * n % q
        return tuple(residues), (0,)


@dataclass(frozen=True)
class TermwiseSum(SetDescriptor):
    """e_n = sum of the n-th terms of the parts"""
    parts: Tuple[SetDescriptor, ...]

    @property
    def text(self) -> str:
        return "+".join(p.text for p in self.parts).replace("+-", "-")

    def term(self, n: int) -> int:
        return sum(p.term(n) for p in self.parts)

    def residue_cycle(self, q: int) -> Optional[ResidueCycle]:
        cycles = [p.residue_cycle(q) for p in self.parts]
        if any(c is None for c in cycles):
            return None
        pre_len = max(len(pre) for pre, _ in cycles)
        period = 1
        for _, cyc in cycles:
            period = period * len(cyc) // math.gcd(period, len(cyc))
        if pre_len + period > RESIDUE_CAP:
            return None

        def residue_at(i: int) -> int:
            total = 0
            for pre, cyc in cycles:
                total += pre[i] if i < len(pre) else cyc[(i - len(pre)) % len(cyc)]
            return total % q

        sequence = [residue_at(i) for i in range(pre_len + period)]
        return tuple(sequence[:pre_len]), tuple(sequence[pre_len:])


@dataclass(frozen=True)
class Tail(SetDescriptor):
    """Terms of part from index start on, renumbered from 1"""
    part: SetDescriptor
    start: int

    @property
    def text(self) -> str:
        return f"{self.part.text}@{self.start}"

    def term(self, n: int) -> int:
        return self.part.term(n + self.start - 1)

    def residue_cycle(self, q: int) -> Optional[ResidueCycle]:
        cycle = self.part.residue_cycle(q)
        if cycle is None:
            return None
        pre, period = cycle
        skip = self.start - 1
        if skip <= len(pre):
            return pre[skip:], period
        k = (skip - len(pre)) % len(period)
        return (), period[k:] + period[:k]


@dataclass(frozen=True)
class Union(SetDescriptor):
    parts: Tuple[SetDescriptor, ...]
    termwise = False

    @property
    def text(self) -> str:
        return "|".join(p.text for p in self.parts)

    @property
    def finite(self) -> bool:
        return all(p.finite for p in self.parts)

    def first(self, count: int) -> List[int]:
        # each part is increasing, so the smallest `count` values come from the parts' own prefixes
        merged = heapq.merge(*(p.first(count) for p in self.parts))
        out: List[int] = []
        for value in merged:
            if out and out[-1] == value:
                continue
            out.append(value)
            if len(out) == count:
                break
        return out

    def residue_set(self, q: int) -> Optional[FrozenSet[int]]:
        sets = [p.residue_set(q) for p in self.parts]
        if any(s is None for s in sets):
            return None
        return frozenset().union(*sets)


@dataclass(frozen=True)
class Explicit(SetDescriptor):
    values: Tuple[int, ...]
    finite = True
    termwise = False

    @property
    def text(self) -> str:
        return ",".join(str(v) for v in self.values)

    def first(self, count: int) -> List[int]:
        return list(self.values[:count])

    def residue_set(self, q: int) -> Optional[FrozenSet[int]]:
        return frozenset(v % q for v in self.values)


NAMED = {
    "naturals": lambda: PolynomialTerms((0, 1)),
    "odd": lambda: PolynomialTerms((-1, 2)),
    "even": lambda: PolynomialTerms((0, 2)),
    "squares": lambda: PolynomialTerms((0, 0, 1)),
    "cubes": lambda: PolynomialTerms((0, 0, 0, 1)),
    "factorial": Factorial,
    "n!": Factorial,
}

_POW_RE = re.compile(r"^(?:(\d+)\*)?pow(\d+)$")
_MONO_RE = re.compile(r"^(\d*)n(?:\^(\d+))?$")
_RANGE_RE = re.compile(r"^(\d+)\.\.(\d+)$")


def _parse_summand(token: str, sign: int, poly: List[int], others: List[SetDescriptor]):
    if token in NAMED:
        part = NAMED[token]()
    elif _POW_RE.match(token):
        coefficient, base = _POW_RE.match(token).groups()
        if int(base) < 2:
            raise DescriptorParseError(f"geometric base must be >= 2 in {token!r}")
        part = Geometric(int(coefficient or 1), int(base))
    elif token.isdigit():
        poly[0] += sign * int(token)
        return
    elif _MONO_RE.match(token):
        coefficient, power = _MONO_RE.match(token).groups()
        power = int(power or 1)
        poly.extend([0] * (power + 1 - len(poly)))
        poly[power] += sign * int(coefficient or 1)
        return
    else:
        raise DescriptorParseError(f"unknown set term {token!r}")

    if isinstance(part, PolynomialTerms):
        poly.extend([0] * (len(part.coefficients) - len(poly)))
        for i, c in enumerate(part.coefficients):
            poly[i] += sign * c
        return
    if sign < 0:
        raise DescriptorParseError(f"cannot subtract {token!r}")
    others.append(part)


def _parse_sum(text: str) -> SetDescriptor:
    tokens = re.findall(r"[+-]|[^+-]+", text)
    poly: List[int] = [0]
    others: List[SetDescriptor] = []
    sign = 1
    expect_term = True
    for token in tokens:
        if token in "+-":
            if not expect_term and token in ("+", "-"):
                sign = 1 if token == "+" else -1
                expect_term = True
                continue
            if expect_term and token == "-" and not others and poly == [0]:
                sign = -sign
                continue
            raise DescriptorParseError(f"misplaced {token!r} in {text!r}")
        if not expect_term:
            raise DescriptorParseError(f"missing operator in {text!r}")
        _parse_summand(token.strip(), sign, poly, others)
        expect_term = False
    if expect_term:
        raise DescriptorParseError(f"dangling operator in {text!r}")

    while len(poly) > 1 and poly[-1] == 0:
        poly.pop()
    parts = list(others)
    if any(poly):
        parts.append(PolynomialTerms(tuple(poly)))
    if not parts:
        raise DescriptorParseError(f"set {text!r} is identically zero")
    return parts[0] if len(parts) == 1 else TermwiseSum(tuple(parts))


def parse_descriptor(text: str) -> SetDescriptor:
    """Parse a set descriptor string (see module docstring)"""
    text = text.replace(" ", "").strip()
    if not text:
        raise DescriptorParseError("empty set descriptor")
    if "|" in text:
        return Union(tuple(parse_descriptor(part) for part in text.split("|")))
    if "@" in text:
        head, _, start = text.rpartition("@")
        if not start.isdigit() or int(start) < 1:
            raise DescriptorParseError(f"bad start index in {text!r}")
        part = parse_descriptor(head)
        if part.finite or not part.termwise:
            raise DescriptorParseError(f"{head!r} has no n-th term to start from")
        return part if int(start) == 1 else Tail(part, int(start))
    match = _RANGE_RE.match(text)
    if match:
        low, high = int(match.group(1)), int(match.group(2))
        if high < low:
            raise DescriptorParseError(f"empty range {text!r}")
        return Explicit(tuple(range(low, high + 1)))
    if "," in text or text.isdigit():
        try:
            values = tuple(sorted({int(v) for v in text.split(",")}))
        except ValueError:
            raise DescriptorParseError(f"bad explicit set {text!r}") from None
        return Explicit(values)
    return _parse_sum(text)


@dataclass(frozen=True)
class IntegerSet:
    """Finite strictly increasing set of non-negative integers"""
    elements: Tuple[int, ...]
    tag: str = "custom"
    descriptor: Optional[SetDescriptor] = None

    def __post_init__(self):
        elements = tuple(int(e) for e in self.elements)
        if any(e < 0 for e in elements):
            raise DescriptorParseError(f"{self.tag}: negative element in {elements[:8]}")
        if any(b <= a for a, b in zip(elements, elements[1:])):
            raise DescriptorParseError(f"{self.tag}: elements are not strictly increasing")
        object.__setattr__(self, "elements", elements)

    @classmethod
    def from_descriptor(cls, descriptor: SetDescriptor, count: int) -> "IntegerSet":
        return cls(tuple(descriptor.first(count)), tag=descriptor.text, descriptor=descriptor)

    @classmethod
    def parse(cls, text: str, count: int) -> "IntegerSet":
        return cls.from_descriptor(parse_descriptor(text), count)

    @classmethod
    def of(cls, values: Iterable[int], tag: str = "custom") -> "IntegerSet":
        return cls(tuple(sorted(set(values))), tag=tag)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, value: int) -> bool:
        i = bisect.bisect_left(self.elements, value)
        return i < len(self.elements) and self.elements[i] == value

    def prefix(self, count: int) -> "IntegerSet":
        return IntegerSet(self.elements[:count], tag=self.tag, descriptor=self.descriptor)

    def shifted(self, offset: int) -> "IntegerSet":
        """E + offset, keeping closed-form residue data when available"""
        descriptor = None
        if self.descriptor is not None and self.descriptor.termwise and offset:
            descriptor = TermwiseSum((self.descriptor, PolynomialTerms((offset,))))
        elif self.descriptor is not None and not offset:
            descriptor = self.descriptor
        tag = self.tag if not offset else f"{self.tag}{offset:+d}"
        return IntegerSet(tuple(e + offset for e in self.elements), tag=tag, descriptor=descriptor)

    def residue_set(self, q: int) -> Optional[FrozenSet[int]]:
        """Residues mod q of the full set described by the descriptor"""
        if self.descriptor is None:
            return None
        return self.descriptor.residue_set(q)

    def to_list(self) -> List[int]:
        return list(self.elements)


def common_elements(first: Sequence[int], second: Sequence[int]) -> List[int]:
    return sorted(set(first) & set(second))
