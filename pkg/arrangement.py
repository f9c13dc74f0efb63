#!/usr/bin/env python3
"""
Region counting for arrangements of real polynomial zero sets.

Two counters are provided: an exact one for univariate arrangements, based
on sympy root isolation, and a grid counter for any dimension that labels
connected components of equal sign vectors with scipy.ndimage.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy
from scipy import ndimage
from tqdm import tqdm

from errors import AllPointsBoundary, DimensionMismatch, GridTooCoarse, NilError, RootIsolationFailed
from malcev_core import NilGroupSpec, Polynomial, format_rational, parse_rational
from orbit_metric import orbit, torus_distance

logger = logging.getLogger(__name__)

Box = Tuple[Tuple[Fraction, Fraction], ...]

MIN_GRID_RESOLUTION = 8


def region_bound(b: int, l: int, m: int) -> int:
    """(2 b l)^m, the upper bound on the number of regions"""
    if min(b, l, m) < 1:
        raise ValueError(f"region_bound needs positive integers, got b={b}, l={l}, m={m}")
    return (2 * b * l) ** m


@dataclass(frozen=True)
class Arrangement:
    polys: Tuple[Polynomial, ...]
    box: Box
    degree_bound: int = 0

    def __post_init__(self):
        box = tuple((parse_rational(lo), parse_rational(hi)) for lo, hi in self.box)
        if not box or any(lo >= hi for lo, hi in box):
            raise NilError(f"box must be nonempty, got {[(str(lo), str(hi)) for lo, hi in box]}")
        for poly in self.polys:
            if len(poly.variables) != len(box):
                raise DimensionMismatch(len(box), len(poly.variables))
        top = max((p.degree() for p in self.polys), default=0)
        bound = self.degree_bound or max(top, 1)
        if top > bound:
            raise NilError(f"polynomial degree {top} exceeds degree bound {bound}")
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "degree_bound", bound)

    @property
    def m(self) -> int:
        return len(self.box)

    @classmethod
    def from_texts(cls, texts: Sequence[str], box: Sequence[Tuple[Any, Any]], degree_bound: int = 0) -> "Arrangement":
        variables = default_variables(len(box))
        return cls(tuple(Polynomial.parse(t, variables) for t in texts), tuple(box), degree_bound)

    def bound(self) -> int:
        return region_bound(self.degree_bound, max(len(self.polys), 1), self.m)


def default_variables(m: int) -> Tuple[str, ...]:
    if m == 1:
        return ("x",)
    if m <= 3:
        return ("x", "y", "z")[:m]
    return tuple(f"x{i}" for i in range(1, m + 1))


@dataclass
class RegionCensus:
    region_count: int
    method: str
    resolution: int
    guard: Fraction
    stable: Optional[bool] = None
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        out = {
            "count": self.region_count,
            "method": self.method,
            "resolution": self.resolution,
            "guard": format_rational(self.guard),
            "stable": self.stable,
        }
        out.update(self.details)
        return out


def count_regions_1d(polys: Sequence[Polynomial], interval: Tuple[Any, Any]) -> RegionCensus:
    """Exact count of the open intervals cut out by the real roots in [lo, hi]"""
    lo, hi = parse_rational(interval[0]), parse_rational(interval[1])
    if lo >= hi:
        raise NilError(f"empty interval [{lo}, {hi}]")
    x = sympy.Symbol("x")
    product = sympy.Poly(1, x)
    for poly in polys:
        if len(poly.variables) != 1:
            raise DimensionMismatch(1, len(poly.variables))
        if poly.is_zero():
            raise AllPointsBoundary("an identically zero polynomial covers the whole interval")
        if poly.degree() == 0:
            continue
        expr = poly.to_sympy().subs(sympy.Symbol(poly.variables[0]), x)
        product = product * sympy.Poly(expr, x)

    for endpoint in (lo, hi):
        if product.eval(sympy.Rational(endpoint.numerator, endpoint.denominator)) == 0:
            raise RootIsolationFailed(endpoint)

    brackets: List[Tuple[str, str]] = []
    if product.degree() > 0:
        square_free = sympy.Poly(sympy.sqf_part(product.as_expr()), x)
        isolated = square_free.intervals(
            inf=sympy.Rational(lo.numerator, lo.denominator),
            sup=sympy.Rational(hi.numerator, hi.denominator),
        )
        brackets = [(str(a), str(b)) for (a, b), _ in isolated]
    return RegionCensus(
        region_count=len(brackets) + 1,
        method="exact1d",
        resolution=0,
        guard=Fraction(0),
        stable=True,
        details={"roots": brackets, "interval": [format_rational(lo), format_rational(hi)]},
    )


def grid_axes(box: Box, resolution: int) -> List[np.ndarray]:
    return [np.linspace(float(lo), float(hi), resolution) for lo, hi in box]


def count_components(codes: np.ndarray, boundary: np.ndarray, min_cells: int = 1) -> int:
    """Connected components (axis adjacency) of equal codes outside the boundary mask"""
    if boundary.all():
        raise AllPointsBoundary("every grid point lies within the boundary guard")
    total = 0
    for code in np.unique(codes[~boundary]):
        labels, count = ndimage.label((codes == code) & ~boundary)
        if min_cells > 1:
            sizes = np.bincount(labels.ravel())[1:]
            count = int(np.count_nonzero(sizes >= min_cells))
        total += count
    return total


def count_regions_grid(
    arrangement: Arrangement,
    resolution: int,
    guard: Any = Fraction(1, 1000),
    min_cells: int = 1,
) -> RegionCensus:
    """Lower bound on the region count from sign vectors on a uniform grid"""
    if resolution < MIN_GRID_RESOLUTION:
        raise GridTooCoarse(f"resolution {resolution} < {MIN_GRID_RESOLUTION}")
    guard = parse_rational(guard)
    if guard <= 0:
        raise NilError("guard must be positive")
    mesh = np.meshgrid(*grid_axes(arrangement.box, resolution), indexing="ij")
    shape = mesh[0].shape
    boundary = np.zeros(shape, dtype=bool)
    signs = np.zeros((boundary.size, max(len(arrangement.polys), 1)), dtype=bool)
    for j, poly in enumerate(arrangement.polys):
        values = poly.evaluate_array(mesh)
        boundary |= np.abs(values) < float(guard)
        signs[:, j] = (values > 0).ravel()
    # one code per distinct sign row, any number of polynomials
    _, codes = np.unique(signs, axis=0, return_inverse=True)
    count = count_components(codes.reshape(shape), boundary, min_cells)
    logger.debug(f"grid census: {count} regions at resolution {resolution}, guard {guard}")
    return RegionCensus(
        region_count=count,
        method="grid",
        resolution=resolution,
        guard=guard,
        details={
            "polys": [p.to_text() for p in arrangement.polys],
            "box": [[format_rational(lo), format_rational(hi)] for lo, hi in arrangement.box],
            "bound": arrangement.bound(),
            "min_cells": min_cells,
            "boundary_points": int(boundary.sum()),
        },
    )


def stable_census(
    arrangement: Arrangement,
    resolution: int,
    guard: Any = Fraction(1, 1000),
    min_cells: int = 1,
) -> RegionCensus:
    """Census at (r, guard), rechecked at the nested grid 2r-1 and at guard/2"""
    guard = parse_rational(guard)
    base = count_regions_grid(arrangement, resolution, guard, min_cells)
    finer = count_regions_grid(arrangement, 2 * resolution - 1, guard, min_cells)
    tighter = count_regions_grid(arrangement, resolution, guard / 2, min_cells)
    counts = [base.region_count, finer.region_count, tighter.region_count]
    base.stable = len(set(counts)) == 1
    base.details["rerun_counts"] = {
        "base": counts[0],
        "doubled_resolution": counts[1],
        "half_guard": counts[2],
    }
    if not base.stable:
        logger.warning(f"unstable census: {counts}")
    return base


def parameter_grid(M: Fraction, resolution: int) -> List[Fraction]:
    """-M + 2M i/(r-1) for i = 0..r-1; r = 1 gives {0}"""
    if resolution < 1:
        raise GridTooCoarse(f"resolution must be >= 1, got {resolution}")
    if resolution == 1:
        return [Fraction(0)]
    M = Fraction(M)
    return [-M + 2 * M * i / (resolution - 1) for i in range(resolution)]


def separability_equation_census(
    spec: NilGroupSpec,
    R: Sequence[int],
    M: Any,
    eps: Any,
    resolution: int,
    guard: Any = Fraction(0),
    min_cells: int = 1,
    show_progress: bool = False,
) -> RegionCensus:
    """Sign-vector regions of d(g^a, g^b) - eps over a grid of g in [-M, M]^m.

    Evaluation is exact; a grid point is boundary when some |f| <= guard.
    """
    M, eps, guard = parse_rational(M), parse_rational(eps), parse_rational(guard)
    R = list(R)
    axis = parameter_grid(M, resolution)
    shape = (resolution,) * spec.m
    pairs = [(i, j) for i in range(len(R)) for j in range(i + 1, len(R))]

    signs = np.zeros((resolution ** spec.m, max(len(pairs), 1)), dtype=bool)
    boundary = np.zeros(resolution ** spec.m, dtype=bool)
    indices = np.ndindex(*shape)
    for flat, index in enumerate(tqdm(indices, total=resolution ** spec.m, disable=not show_progress, desc="census grid")):
        g = tuple(axis[i] for i in index)
        points = orbit(spec, g, R).points
        for p, (i, j) in enumerate(pairs):
            value = torus_distance(points[i], points[j]) - eps
            if abs(value) <= guard:
                boundary[flat] = True
            signs[flat, p] = value > 0

    _, codes = np.unique(signs, axis=0, return_inverse=True)
    count = count_components(codes.reshape(shape), boundary.reshape(shape), min_cells)
    return RegionCensus(
        region_count=count,
        method="grid",
        resolution=resolution,
        guard=guard,
        details={
            "spec": spec.name,
            "R": R,
            "M": format_rational(M),
            "eps": format_rational(eps),
            "equations": len(pairs),
        },
    )
