#!/usr/bin/env python3
"""
Lacunarity classification and the R-nice-set census.

For a finite prefix R of an integer set and a grid of group elements g in
[-M, M]^m, the census clusters each orbit g^R 1_X at scale eps and records
every subset of R that is a union of clusters. Those are exactly the
subsets separable from their complement by g, so the count of distinct
such subsets over the grid is the number of realized R-nice sets.
"""

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np
import pandas as pd
from scipy.cluster.hierarchy import DisjointSet
from tqdm import tqdm

from arrangement import parameter_grid
from errors import GridTooCoarse, NonPositiveElement, TooShort
from malcev_core import NilGroupSpec, format_rational, parse_rational
from orbit_metric import close_pairs, orbit, partition_exponent, torus_distance

logger = logging.getLogger(__name__)

DEFAULT_LACUNARY_THRESHOLD = Fraction(5, 4)
DEFAULT_SLOPE_THRESHOLD = Fraction(1, 10)

# a partition of R is a tuple of block bitmasks (bit i = i-th element of R), ordered by least member
MaskPartition = Tuple[int, ...]


def _elements(E: Iterable[int]) -> List[int]:
    return list(getattr(E, "elements", E))


def _positive_elements(E: Iterable[int]) -> List[int]:
    elements = _elements(E)
    if len(elements) < 2:
        raise TooShort(len(elements))
    for e in elements:
        if e <= 0:
            raise NonPositiveElement(e)
    return elements


def lacunary_ratio(E: Iterable[int]) -> Fraction:
    """min r_{n+1} / r_n over the prefix"""
    elements = _positive_elements(E)
    return min(Fraction(b, a) for a, b in zip(elements, elements[1:]))


def is_lacunary(E: Iterable[int], threshold: Fraction = DEFAULT_LACUNARY_THRESHOLD, tail: bool = True) -> bool:
    """Finite proxy for inf r_{n+1}/r_n > 1: the minimum ratio over the tail half reaches threshold.

    Sets with fewer than two elements are lacunary.
    """
    elements = [e for e in _elements(E) if e > 0]
    if len(elements) < 2:
        return True
    ratios = [Fraction(b, a) for a, b in zip(elements, elements[1:])]
    if tail:
        ratios = ratios[(len(ratios) - 1) // 2:]
    return min(ratios) >= threshold


@dataclass
class SublacunarityReport:
    end_slope: Fraction
    tail_slope: Fraction
    threshold: Fraction
    consistent: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "end_slope": format_rational(self.end_slope),
            "tail_slope": format_rational(self.tail_slope),
            "threshold": format_rational(self.threshold),
            "sublacunary_consistent": self.consistent,
        }


def sublacunarity_slope(E: Iterable[int], threshold: Any = DEFAULT_SLOPE_THRESHOLD) -> SublacunarityReport:
    """(log r_N)/N and the least-squares slope of log r_n against n over the tail half"""
    elements = _positive_elements(E)
    threshold = parse_rational(threshold)
    logs = np.array([math.log(r) for r in elements], dtype=float)
    n = np.arange(1, len(elements) + 1, dtype=float)
    start = len(elements) // 2 if len(elements) - len(elements) // 2 >= 2 else 0
    slope, _ = np.polyfit(n[start:], logs[start:], 1)
    end_slope = Fraction(float(logs[-1] / n[-1])).limit_denominator(10 ** 9)
    tail_slope = Fraction(float(slope)).limit_denominator(10 ** 9)
    consistent = end_slope < threshold and tail_slope < threshold
    return SublacunarityReport(end_slope, tail_slope, threshold, consistent)


def classify(E: Iterable[int], tag: str = "custom", lacunary_threshold: Any = DEFAULT_LACUNARY_THRESHOLD,
             slope_threshold: Any = DEFAULT_SLOPE_THRESHOLD) -> Dict[str, Any]:
    """Lacunary ratio, slopes and a verdict for one prefix"""
    elements = _elements(E)
    ratio = lacunary_ratio(elements)
    lacunary = is_lacunary(elements, parse_rational(lacunary_threshold))
    slopes = sublacunarity_slope(elements, slope_threshold)
    if lacunary:
        verdict = "lacunary"
    elif slopes.consistent:
        verdict = "sublacunary-consistent"
    else:
        verdict = "intermediate"
    row = {"set": tag, "N": len(elements), "lacunary_ratio": format_rational(ratio), "lacunary": lacunary}
    row.update(slopes.to_dict())
    row["verdict"] = verdict
    return row


def component_cap(eps: Fraction, m: int) -> int:
    """ceil((1/eps)^m), the most clusters an orbit can split into"""
    return math.ceil(1 / Fraction(eps) ** m)


def unions_of_blocks(partition: Sequence[int]) -> Set[int]:
    """Bitmasks of all unions of blocks, empty union included"""
    masks = {0}
    for block in partition:
        masks |= {mask | block for mask in masks}
    return masks


def exhaustive_nice_sets(spec: NilGroupSpec, g: Sequence[Fraction], R: Sequence[int], eps: Any) -> Set[int]:
    """Bitmasks of all A with A and R minus A eps-separable by g (tests all 2^N subsets)"""
    eps = parse_rational(eps)
    R = list(R)
    if not R:
        return {0}
    # A is separable iff no pair closer than eps has one end in A and one outside
    pairs = close_pairs(orbit(spec, g, R).points, eps)
    masks = np.arange(1 << len(R), dtype=np.int64)
    separable = np.ones(len(masks), dtype=bool)
    for i, j in pairs:
        separable &= (masks >> i & 1) == (masks >> j & 1)
    return {int(mask) for mask in masks[separable]}


def partition_masks(spec: NilGroupSpec, g: Sequence[Fraction], R: Sequence[int], eps: Fraction,
                    prefixes: Sequence[int]) -> Dict[int, MaskPartition]:
    """Cluster partitions of every requested prefix of R, from a single orbit"""
    points = orbit(spec, g, R).points
    wanted = set(prefixes)
    ds = DisjointSet()
    out: Dict[int, MaskPartition] = {}
    for idx, point in enumerate(points):
        ds.add(idx)
        for j in range(idx):
            if torus_distance(points[j], point) < eps:
                ds.merge(j, idx)
        if idx + 1 in wanted:
            blocks = [sum(1 << i for i in subset) for subset in ds.subsets()]
            out[idx + 1] = tuple(sorted(blocks, key=lambda b: b & -b))
    return out


def _census_chunk(spec: NilGroupSpec, R: Tuple[int, ...], eps: Fraction, points: List[Tuple[Fraction, ...]],
                  prefixes: Tuple[int, ...]) -> Dict[int, Set[MaskPartition]]:
    found: Dict[int, Set[MaskPartition]] = {N: set() for N in prefixes}
    for g in points:
        for N, partition in partition_masks(spec, g, R, eps, prefixes).items():
            found[N].add(partition)
    return found


@dataclass
class NiceCensus:
    spec_id: str
    N: int
    eps: Fraction
    M: Fraction
    resolution: int
    realized_nice_sets: int
    realized_partitions: int
    component_cap: int
    max_components: int
    samples: int
    nice_sets: FrozenSet[int] = field(default=frozenset(), repr=False)

    @property
    def cap_honored(self) -> bool:
        return self.max_components <= self.component_cap

    def to_dict(self) -> Dict[str, Any]:
        return {
            "spec_id": self.spec_id,
            "N": self.N,
            "eps": format_rational(self.eps),
            "M": format_rational(self.M),
            "resolution": self.resolution,
            "realized_nice_sets": self.realized_nice_sets,
            "realized_partitions": self.realized_partitions,
            "component_cap": self.component_cap,
            "max_components": self.max_components,
            "samples": self.samples,
        }


def grid_points(m: int, M: Fraction, resolution: int) -> List[Tuple[Fraction, ...]]:
    axis = parameter_grid(M, resolution)
    if resolution % 2 == 0:
        logger.warning(f"even resolution {resolution}: the grid misses g = 0")
    return list(itertools.product(axis, repeat=m))


def collect_partitions(
    spec: NilGroupSpec,
    R: Sequence[int],
    eps: Fraction,
    points: List[Tuple[Fraction, ...]],
    prefixes: Sequence[int],
    threads: int = 1,
    show_progress: bool = False,
) -> Dict[int, Set[MaskPartition]]:
    """Distinct cluster partitions per prefix length over the sampled g"""
    R, prefixes = tuple(R), tuple(sorted(set(prefixes)))
    found: Dict[int, Set[MaskPartition]] = {N: set() for N in prefixes}
    chunk = max(1, len(points) // max(4 * threads, 1))
    chunks = [points[i:i + chunk] for i in range(0, len(points), chunk)]

    if threads > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as executor:
            futures = [executor.submit(_census_chunk, spec, R, eps, part, prefixes) for part in chunks]
            with tqdm(total=len(futures), desc="census chunks", disable=not show_progress) as pbar:
                for future in as_completed(futures):
                    for N, partitions in future.result().items():
                        found[N] |= partitions
                    pbar.update(1)
    else:
        for part in tqdm(chunks, desc="census chunks", disable=not show_progress):
            for N, partitions in _census_chunk(spec, R, eps, part, prefixes).items():
                found[N] |= partitions
    return found


def _summarize(spec: NilGroupSpec, N: int, eps: Fraction, M: Fraction, resolution: int,
               partitions: Set[MaskPartition], samples: int) -> NiceCensus:
    nice: Set[int] = set()
    for partition in partitions:
        nice |= unions_of_blocks(partition)
    cap = component_cap(eps, spec.m)
    max_components = max((len(p) for p in partitions), default=0)
    if max_components > cap:
        logger.error(f"N={N}: {max_components} clusters exceed the cap {cap}")
    return NiceCensus(
        spec_id=spec.name,
        N=N,
        eps=eps,
        M=M,
        resolution=resolution,
        realized_nice_sets=len(nice),
        realized_partitions=len(partitions),
        component_cap=cap,
        max_components=max_components,
        samples=samples,
        nice_sets=frozenset(nice),
    )


def _prepare(E: Iterable[int], N_max: int, M: Any, eps: Any) -> Tuple[List[int], Fraction, Fraction]:
    elements = _elements(E)
    if N_max < 1:
        raise TooShort(N_max, 1)
    if len(elements) < N_max:
        raise TooShort(len(elements), N_max)
    M, eps = parse_rational(M), parse_rational(eps)
    if eps <= 0 or M < 0:
        raise GridTooCoarse(f"need eps > 0 and M >= 0, got eps={eps}, M={M}")
    return elements[:N_max], M, eps


def nice_census(
    spec: NilGroupSpec,
    E: Iterable[int],
    N: int,
    M: Any,
    eps: Any,
    resolution: int,
    threads: int = 1,
    shuffle_seed: Optional[int] = None,
    show_progress: bool = False,
) -> NiceCensus:
    """Count the R-nice sets realized by a grid of g, R the first N elements of E"""
    R, M, eps = _prepare(E, N, M, eps)
    points = grid_points(spec.m, M, resolution)
    if shuffle_seed is not None:
        order = np.random.default_rng(shuffle_seed).permutation(len(points))
        points = [points[i] for i in order]
    partitions = collect_partitions(spec, R, eps, points, [N], threads, show_progress)[N]
    return _summarize(spec, N, eps, M, resolution, partitions, len(points))


def growth_experiment(
    spec: NilGroupSpec,
    E: Iterable[int],
    N_range: Sequence[int],
    M: Any,
    eps: Any,
    resolution: int,
    threads: int = 1,
    check_stability: bool = False,
    show_progress: bool = False,
) -> pd.DataFrame:
    """One census row per N, next to 2^N and the r_N^c3 reference curve"""
    N_values = sorted(set(N_range))
    if not N_values:
        raise TooShort(0, 1)
    R, M, eps = _prepare(E, N_values[-1], M, eps)
    c3 = partition_exponent(spec)
    points = grid_points(spec.m, M, resolution)
    found = collect_partitions(spec, R, eps, points, N_values, threads, show_progress)
    finer: Dict[int, Set[MaskPartition]] = {}
    if check_stability:
        finer_points = grid_points(spec.m, M, 2 * resolution - 1)
        finer = collect_partitions(spec, R, eps, finer_points, N_values, threads, show_progress)

    rows = []
    for N in N_values:
        census = _summarize(spec, N, eps, M, resolution, found[N], len(points))
        row = {
            "N": N,
            "realized_nice_sets": census.realized_nice_sets,
            "two_pow_N": 2 ** N,
            "rN_c3": str(R[N - 1] ** c3),  # exact decimal, far past float range
            "eps": format_rational(eps),
            "M": format_rational(M),
            "resolution": resolution,
            "spec_id": spec.name,
            "realized_partitions": census.realized_partitions,
            "max_components": census.max_components,
            "component_cap": census.component_cap,
            "log_ratio": math.log(census.realized_nice_sets) / N,
        }
        if check_stability:
            row["stable"] = _summarize(spec, N, eps, M, resolution, finer[N], 0).realized_nice_sets == census.realized_nice_sets
        rows.append(row)
        logger.info(f"N={N}: {census.realized_nice_sets} nice sets of {2 ** N} subsets")
    return pd.DataFrame(rows)
