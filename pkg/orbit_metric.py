#!/usr/bin/env python3
"""
Orbits of nilrotations on X = G / Gamma in Mal'cev coordinates.

Points of X are represented by their unique preimage in the fundamental
domain [0,1)^m; distances use the max-metric of the cube with wraparound
in every coordinate. Everything is exact except nilsequence_eval, which
exponentiates an exact phase in floating point at the very end.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from errors import DimensionMismatch, EmptyOrbit, SetsNotDisjoint
from integer_sets import IntegerSet, common_elements
from malcev_core import (
    GroupElement,
    LatticeVector,
    NilGroupSpec,
    bound_degree,
    format_rational,
    multiply,
    power,
)

logger = logging.getLogger(__name__)

ManifoldPoint = Tuple[Fraction, ...]
Partition = Tuple[Tuple[int, ...], ...]


def z_vector(spec: NilGroupSpec, x: Sequence[Fraction]) -> LatticeVector:
    """The unique integer vector z with x * z in [0,1)^m"""
    if len(x) != spec.m:
        raise DimensionMismatch(spec.m, len(x))
    z: List[int] = [-math.floor(x[0])]
    for i in range(1, spec.m):
        shift = spec.structure_polys[i - 1].evaluate(tuple(x[:i]) + tuple(Fraction(v) for v in z))
        z.append(-math.floor(x[i] + shift))
    return tuple(z)


def reduce(spec: NilGroupSpec, x: Sequence[Fraction]) -> ManifoldPoint:
    z = z_vector(spec, x)
    return multiply(spec, x, tuple(Fraction(v) for v in z))


def z_growth_exponents(spec: NilGroupSpec) -> Tuple[int, int]:
    """c1 = k^(m-1) and c2 = c1 * deg R"""
    c1 = spec.k ** (spec.m - 1)
    return c1, c1 * bound_degree(spec)


def partition_exponent(spec: NilGroupSpec) -> int:
    """c3 = 2 c2 m^2, the exponent in the region count of the parameter box"""
    _, c2 = z_growth_exponents(spec)
    return 2 * c2 * spec.m ** 2


def torus_distance(p: Sequence[Fraction], q: Sequence[Fraction]) -> Fraction:
    if len(p) != len(q):
        raise DimensionMismatch(len(p), len(q))
    best = Fraction(0)
    for a, b in zip(p, q):
        d = abs(Fraction(a) - Fraction(b)) % 1
        d = min(d, 1 - d)
        if d > best:
            best = d
    return best


@dataclass(frozen=True)
class OrbitTable:
    spec_id: str
    generator: GroupElement
    base: GroupElement
    exponents: Tuple[int, ...]
    points: Tuple[ManifoldPoint, ...]

    def __post_init__(self):
        if len(self.exponents) != len(self.points):
            raise DimensionMismatch(len(self.exponents), len(self.points))

    def __len__(self) -> int:
        return len(self.points)

    def to_frame(self) -> pd.DataFrame:
        """exponent, coord_1..coord_m with coordinates as exact p/q strings"""
        m = len(self.generator)
        rows = []
        for a, point in zip(self.exponents, self.points):
            row: Dict[str, Any] = {"exponent": a}
            row.update({f"coord_{i + 1}": format_rational(c) for i, c in enumerate(point)})
            rows.append(row)
        columns = ["exponent"] + [f"coord_{i + 1}" for i in range(m)]
        return pd.DataFrame(rows, columns=columns)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "spec": self.spec_id,
            "generator": [format_rational(c) for c in self.generator],
            "base": [format_rational(c) for c in self.base],
            "rows": self.to_frame().to_dict(orient="records"),
        }


def orbit(
    spec: NilGroupSpec,
    g: Sequence[Fraction],
    A: Iterable[int],
    base: Optional[Sequence[Fraction]] = None,
) -> OrbitTable:
    """Reduced points g^a * base for a in A.

    Successive points are obtained by left-multiplying the previous reduced
    point by g^(a' - a), which stays in the same coset and keeps numerators
    small for large exponents.
    """
    g = tuple(Fraction(c) for c in g)
    base = spec.identity() if base is None else tuple(Fraction(c) for c in base)
    if len(g) != spec.m:
        raise DimensionMismatch(spec.m, len(g))
    if len(base) != spec.m:
        raise DimensionMismatch(spec.m, len(base))

    exponents = tuple(A)
    points: List[ManifoldPoint] = []
    previous_exponent: Optional[int] = None
    current: Optional[ManifoldPoint] = None
    for a in exponents:
        if current is None or a < previous_exponent:
            current = reduce(spec, multiply(spec, power(spec, g, a), base))
        else:
            current = reduce(spec, multiply(spec, power(spec, g, a - previous_exponent), current))
        points.append(current)
        previous_exponent = a
    return OrbitTable(spec.name, g, base, exponents, tuple(points))


def min_pair_distance(first: OrbitTable, second: OrbitTable) -> Fraction:
    if not first.points or not second.points:
        raise EmptyOrbit("min_pair_distance needs two nonempty orbits")
    best: Optional[Fraction] = None
    for p in first.points:
        for q in second.points:
            d = torus_distance(p, q)
            if best is None or d < best:
                best = d
                if not best:
                    return best
    return best


def _require_disjoint(A: Sequence[int], B: Sequence[int]):
    common = common_elements(A, B)
    if common:
        raise SetsNotDisjoint(common)


def is_eps_separable(
    spec: NilGroupSpec,
    g: Sequence[Fraction],
    A: Sequence[int],
    B: Sequence[int],
    eps: Fraction,
    base: Optional[Sequence[Fraction]] = None,
) -> bool:
    """min over a in A, b in B of d(g^a x, g^b x) >= eps; empty sets are separable"""
    A, B = list(A), list(B)
    _require_disjoint(A, B)
    if not A or not B:
        return True
    return min_pair_distance(orbit(spec, g, A, base), orbit(spec, g, B, base)) >= eps


def close_pairs(points: Sequence[ManifoldPoint], eps: Fraction) -> List[Tuple[int, int]]:
    """Index pairs at distance < eps"""
    pairs = []
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            if torus_distance(points[i], points[j]) < eps:
                pairs.append((i, j))
    return pairs


def cluster_components(table: OrbitTable, eps: Fraction) -> Partition:
    """Connected components of the graph joining points closer than eps.

    Blocks are tuples of exponents, sorted, and ordered by their least member.
    """
    n = len(table.points)
    if n == 0:
        return ()
    pairs = close_pairs(table.points, eps)
    rows = [i for i, _ in pairs]
    cols = [j for _, j in pairs]
    graph = coo_matrix((np.ones(len(pairs), dtype=np.int8), (rows, cols)), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    blocks: Dict[int, List[int]] = {}
    for exponent, label in zip(table.exponents, labels):
        blocks.setdefault(int(label), []).append(exponent)
    return tuple(sorted((tuple(sorted(b)) for b in blocks.values()), key=lambda b: b[0]))


def recurrence_gap(spec: NilGroupSpec, g: Sequence[Fraction], R: Sequence[int]) -> Fraction:
    """Distance from the orbit g^R 1_X to 1_X over the given truncation"""
    table = orbit(spec, g, R)
    if not table.points:
        raise EmptyOrbit("recurrence_gap needs a nonempty set")
    origin = spec.identity()
    return min(torus_distance(p, origin) for p in table.points)


@dataclass(frozen=True)
class FunctionDescriptor:
    """Character observable F(x) = exp(2 pi i <w, x>)"""
    frequency: Tuple[int, ...]


def nilsequence_phase(
    spec: NilGroupSpec,
    g: Sequence[Fraction],
    base: Optional[Sequence[Fraction]],
    F: FunctionDescriptor,
    n: int,
) -> Fraction:
    """<w, reduce(g^n * base)> mod 1, exactly"""
    if len(F.frequency) != spec.m:
        raise DimensionMismatch(spec.m, len(F.frequency))
    base = spec.identity() if base is None else tuple(Fraction(c) for c in base)
    point = reduce(spec, multiply(spec, power(spec, tuple(Fraction(c) for c in g), n), base))
    return sum((w * c for w, c in zip(F.frequency, point)), Fraction(0)) % 1


def nilsequence_eval(
    spec: NilGroupSpec,
    g: Sequence[Fraction],
    base: Optional[Sequence[Fraction]],
    F: FunctionDescriptor,
    n: int,
) -> complex:
    phase = nilsequence_phase(spec, g, base, F, n)
    return complex(np.exp(2j * np.pi * float(phase)))


@dataclass
class SeparabilityReport:
    """Outcome of a finite-truncation separation check"""
    witness: Tuple[Fraction, ...]
    gap: Optional[Fraction]
    truncation: int
    exact: bool = False
    kind: str = "nilrotation"
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "witness": [format_rational(c) for c in self.witness],
            "gap": "inf" if self.gap is None else format_rational(self.gap),
            "truncation": self.truncation,
            "exact": self.exact,
            **self.details,
        }


def is_nilrotation_separated(
    spec: NilGroupSpec,
    g: Sequence[Fraction],
    A: Sequence[int],
    B: Sequence[int],
    base: Optional[Sequence[Fraction]] = None,
) -> SeparabilityReport:
    """Gap between g^A x and g^B x on the given truncations; never claims the infinite statement"""
    A, B = list(A), list(B)
    _require_disjoint(A, B)
    gap = None
    if A and B:
        gap = min_pair_distance(orbit(spec, g, A, base), orbit(spec, g, B, base))
    return SeparabilityReport(
        witness=tuple(Fraction(c) for c in g),
        gap=gap,
        truncation=max(len(A), len(B)),
        exact=False,
        details={"spec": spec.name},
    )


def z_growth_profile(spec: NilGroupSpec, g: Sequence[Fraction], ns: Iterable[int]) -> pd.DataFrame:
    """max_i |z_i| of g^n against n, next to the n^c2 envelope"""
    _, c2 = z_growth_exponents(spec)
    g = tuple(Fraction(c) for c in g)
    rows = []
    for n in ns:
        z = z_vector(spec, power(spec, g, n))
        peak = max(abs(v) for v in z)
        rows.append({"n": n, "max_abs_z": peak, "c2": c2, "ratio": Fraction(peak, n ** c2)})
    return pd.DataFrame(rows, columns=["n", "max_abs_z", "c2", "ratio"])


def fit_growth_constant(profile: pd.DataFrame) -> Fraction:
    """Smallest C with max |z_n| <= C n^c2 on the rows of the profile"""
    if profile.empty:
        return Fraction(0)
    return max(profile["ratio"])
