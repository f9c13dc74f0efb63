#!/usr/bin/env python3
"""
Torus rotations: Bohr separability, non-recurrence witnesses and the
I0 partition of a lacunary set joined with its shifts.

A rational rotation alpha = p/q only sees residues mod q, so two sets
with closed-form descriptors can be compared over all of their terms by
comparing residue sets. Everything else is evaluated over truncations
and reported as such (exact=False).
"""

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from errors import HypothesisViolated, NilError, SetsNotDisjoint, TooShort, WitnessInvalid
from integer_sets import IntegerSet, common_elements
from malcev_core import format_rational, parse_rational
from nice_sets import is_lacunary, lacunary_ratio

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)
DEFAULT_TRUNCATION = 20
DEFAULT_MIN_GAP = Fraction(1, 16)
RANDOM_DENOMINATOR_FACTOR = 16
# residue-set products above this fall back to the truncation
MAX_RESIDUE_PAIRS = 1 << 22

SetLike = Union[IntegerSet, str, Iterable[int]]


@dataclass(frozen=True)
class TorusRotation:
    alpha: Tuple[Fraction, ...]
    rational: Tuple[bool, ...] = ()

    def __post_init__(self):
        alpha = tuple(parse_rational(a) % 1 for a in self.alpha)
        if not alpha:
            raise NilError("a torus rotation needs at least one coordinate")
        rational = tuple(self.rational) or (True,) * len(alpha)
        if len(rational) != len(alpha):
            raise NilError("one rationality flag per coordinate")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "rational", rational)

    @classmethod
    def from_reals(cls, values: Sequence[Any], max_denominator: int = 10 ** 6) -> "TorusRotation":
        """Rational coordinates are kept; floats become convergents and are flagged"""
        alpha, flags = [], []
        for value in values:
            if isinstance(value, (int, Fraction, str)):
                alpha.append(parse_rational(value))
                flags.append(True)
            else:
                alpha.append(Fraction(float(value)).limit_denominator(max_denominator))
                flags.append(False)
        return cls(tuple(alpha), tuple(flags))

    @classmethod
    def coerce(cls, value: Any) -> "TorusRotation":
        if isinstance(value, TorusRotation):
            return value
        if isinstance(value, (int, Fraction, str)):
            value = [value]
        return cls(tuple(parse_rational(v) for v in value))

    @property
    def d(self) -> int:
        return len(self.alpha)

    @property
    def denominator(self) -> int:
        return math.lcm(*(a.denominator for a in self.alpha))

    @property
    def numerators(self) -> Tuple[int, ...]:
        q = self.denominator
        return tuple(int(a * q) for a in self.alpha)

    @property
    def is_rational(self) -> bool:
        return all(self.rational)

    def norm(self, n: int) -> Fraction:
        """||n alpha|| in the max-metric of T^d"""
        best = Fraction(0)
        for a in self.alpha:
            r = (n * a) % 1
            best = max(best, min(r, 1 - r))
        return best

    def point(self, n: int) -> Tuple[Fraction, ...]:
        return tuple((n * a) % 1 for a in self.alpha)

    def to_dict(self) -> Dict[str, Any]:
        return {"alpha": [format_rational(a) for a in self.alpha], "rational": list(self.rational)}


@dataclass
class SeparationCertificate:
    rotation: TorusRotation
    gap: Optional[Fraction]
    truncation: int
    exact: bool
    kind: str = "separation"

    @property
    def eps(self) -> Optional[Fraction]:
        return self.gap

    def to_dict(self) -> Dict[str, Any]:
        return {
            "status": "certified",
            "kind": self.kind,
            "alpha": [format_rational(a) for a in self.rotation.alpha],
            "rational": self.rotation.is_rational,
            "gap": "inf" if self.gap is None else format_rational(self.gap),
            "truncation": self.truncation,
            "exact": self.exact,
        }


@dataclass
class NotFound:
    """A search that produced no certificate; best holds the closest miss"""
    kind: str
    reason: str
    best: Optional[SeparationCertificate] = None
    denominators_scanned: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "status": "not_found",
            "kind": self.kind,
            "reason": self.reason,
            "best": self.best.to_dict() if self.best else None,
            "denominators_scanned": self.denominators_scanned,
        }


SearchResult = Union[SeparationCertificate, NotFound]


def as_integer_set(S: SetLike, truncation: Optional[int] = None) -> IntegerSet:
    """First `truncation` terms of S; descriptors are regenerated, plain sets are cut"""
    if isinstance(S, str):
        return IntegerSet.parse(S, truncation or DEFAULT_TRUNCATION)
    if not isinstance(S, IntegerSet):
        S = IntegerSet.of(S)
    if truncation is None:
        return S
    if S.descriptor is not None and not S.descriptor.finite:
        return IntegerSet.from_descriptor(S.descriptor, truncation)
    return S.prefix(truncation)


def _int_array(values: Iterable[int], q: int) -> np.ndarray:
    dtype = np.int64 if q < 2 ** 31 else object
    return np.array(sorted(values), dtype=dtype)


@dataclass(frozen=True)
class DeltaSource:
    """Integers whose multiples by alpha decide the gap.

    With B given these are the differences a - b; without it, the elements
    of A themselves (distance of A alpha from 0).
    """
    A: IntegerSet
    B: Optional[IntegerSet] = None
    use_residues: bool = True

    def _residue_deltas(self, q: int) -> Optional[np.ndarray]:
        ra = self.A.residue_set(q)
        if ra is None:
            return None
        if self.B is None:
            return _int_array(ra, q)
        rb = self.B.residue_set(q)
        if rb is None or len(ra) * len(rb) > MAX_RESIDUE_PAIRS:
            return None
        diff = (_int_array(ra, q)[:, None] - _int_array(rb, q)[None, :]) % q
        return np.unique(diff)

    def deltas(self, q: int) -> Tuple[np.ndarray, bool]:
        """Residues mod q and whether they cover the full sets"""
        if self.use_residues and q <= 1 << 20:
            found = self._residue_deltas(q)
            if found is not None:
                return found, True
        a = _int_array({x % q for x in self.A.elements}, q)
        if self.B is None:
            return a, False
        b = _int_array({x % q for x in self.B.elements}, q)
        return np.unique((a[:, None] - b[None, :]) % q), False


def _distance_numerators(deltas: np.ndarray, numerators: Sequence[int], q: int) -> np.ndarray:
    """q * ||delta alpha|| for alpha = numerators / q"""
    out = np.zeros(len(deltas), dtype=deltas.dtype)
    for p in numerators:
        r = deltas * p % q
        out = np.maximum(out, np.minimum(r, q - r))
    return out


@dataclass(frozen=True)
class Candidate:
    gap: Fraction
    q: int
    numerators: Tuple[int, ...]
    exact: bool

    @property
    def d(self) -> int:
        return len(self.numerators)

    def key(self) -> Tuple:
        return (-self.gap, self.q, self.d, self.numerators)

    def rotation(self) -> TorusRotation:
        return TorusRotation(tuple(Fraction(p, self.q) for p in self.numerators))


def _better(new: Optional[Candidate], old: Optional[Candidate]) -> Optional[Candidate]:
    if new is None:
        return old
    if old is None or new.key() < old.key():
        return new
    return old


def _scan_denominator(source: DeltaSource, d: int, q: int) -> Optional[Candidate]:
    """Best primitive alpha in (1/q)Z^d / Z^d, lexicographically first on ties"""
    deltas, exact = source.deltas(q)
    if len(deltas) == 0:
        return None
    last = np.arange(q, dtype=deltas.dtype)
    products = (deltas[None, :] * last[:, None]) % q
    last_norms = np.minimum(products, q - products)
    best: Optional[Candidate] = None
    for head in itertools.product(range(q), repeat=d - 1):
        head_gcd = math.gcd(q, *head)
        valid = np.gcd(np.arange(q), head_gcd) == 1
        if not valid.any():
            continue
        head_norm = _distance_numerators(deltas, head, q)
        gaps = np.maximum(last_norms, head_norm[None, :]).min(axis=1)
        gaps = np.where(valid, gaps, -1)
        p_last = int(np.argmax(gaps))
        candidate = Candidate(Fraction(int(gaps[p_last]), q), q, tuple(head) + (p_last,), exact)
        if best is None or candidate.gap > best.gap:
            best = candidate
    return best


def _evaluate(source: DeltaSource, numerators: Tuple[int, ...], q: int) -> Optional[Candidate]:
    deltas, exact = source.deltas(q)
    if len(deltas) == 0:
        return None
    gap = Fraction(int(_distance_numerators(deltas, numerators, q).min()), q)
    return Candidate(gap, q, numerators, exact)


def _search(
    source: DeltaSource,
    d_max: int,
    denominator_budget: int,
    random_budget: int,
    seed: int,
    threads: int,
    show_progress: bool,
) -> Tuple[Optional[Candidate], int]:
    """Scan d = 1..d_max and q = 2..budget, then random refinements; returns (best, scanned)"""
    tasks = [(d, q) for d in range(1, d_max + 1) for q in range(2, denominator_budget + 1)]
    best: Optional[Candidate] = None
    scanned = len(tasks)
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as executor:
            futures = [executor.submit(_scan_denominator, source, d, q) for d, q in tasks]
            for future in tqdm(as_completed(futures), total=len(futures), desc="rotation search",
                               disable=not show_progress):
                best = _better(future.result(), best)
    else:
        for d, q in tqdm(tasks, desc="rotation search", disable=not show_progress):
            # nothing beats a gap of 1/2 at a larger or equal denominator
            if best is not None and best.gap == HALF and q >= best.q:
                continue
            best = _better(_scan_denominator(source, d, q), best)

    rng = np.random.default_rng(seed)
    for _ in range(random_budget):
        d = int(rng.integers(1, d_max + 1))
        q = int(rng.integers(denominator_budget + 1, RANDOM_DENOMINATOR_FACTOR * denominator_budget + 1))
        numerators = tuple(int(p) for p in rng.integers(0, q, size=d))
        if math.gcd(q, *numerators) != 1:
            continue
        best = _better(_evaluate(source, numerators, q), best)
        scanned += 1
    return best, scanned


def rotation_gap(
    alpha: Any,
    A: SetLike,
    B: SetLike,
    truncation: Optional[int] = None,
    use_residues: bool = True,
) -> SeparationCertificate:
    """min over a in A, b in B of ||(a - b) alpha||.

    exact is set when alpha is rational and both sets carry residue data,
    in which case the gap is over the full infinite sets.
    """
    rotation = TorusRotation.coerce(alpha)
    A, B = as_integer_set(A, truncation), as_integer_set(B, truncation)
    common = common_elements(A.elements, B.elements)
    if common:
        raise SetsNotDisjoint(common)
    size = max(len(A), len(B))
    if not len(A) or not len(B):
        return SeparationCertificate(rotation, None, size, True)
    q = rotation.denominator
    source = DeltaSource(A, B, use_residues and rotation.is_rational)
    deltas, exact = source.deltas(q)
    gap = Fraction(int(_distance_numerators(deltas, rotation.numerators, q).min()), q)
    return SeparationCertificate(rotation, gap, size, exact)


def _finish(best: Optional[Candidate], scanned: int, size: int, kind: str, min_gap: Fraction) -> SearchResult:
    if best is None:
        return NotFound(kind, "no admissible rotation", None, scanned)
    certificate = SeparationCertificate(best.rotation(), best.gap, size, best.exact, kind)
    if best.gap > 0 and (best.exact or best.gap >= min_gap):
        return certificate
    reason = "every scanned rotation has gap 0" if best.gap == 0 else f"best gap below {format_rational(min_gap)}"
    return NotFound(kind, reason, certificate, scanned)


def find_separating_rotation(
    A: SetLike,
    B: SetLike,
    d_max: int = 1,
    denominator_budget: int = 64,
    random_budget: int = 0,
    seed: int = 0,
    truncation: Optional[int] = None,
    min_gap: Any = DEFAULT_MIN_GAP,
    use_residues: bool = True,
    threads: int = 1,
    show_progress: bool = False,
) -> SearchResult:
    """Search rational alpha separating A from B; NotFound carries the best miss.

    Truncation-only results need gap >= min_gap to count; residue-exact
    results only need a positive gap.
    """
    A, B = as_integer_set(A, truncation), as_integer_set(B, truncation)
    size = max(len(A), len(B))
    common = common_elements(A.elements, B.elements)
    if common:
        shown = ", ".join(str(c) for c in common[:8])
        return NotFound("separation", f"sets share elements: {shown}", None, 0)
    if not len(A) or not len(B):
        return SeparationCertificate(TorusRotation((Fraction(0),)), None, size, True)
    best, scanned = _search(DeltaSource(A, B, use_residues), d_max, denominator_budget, random_budget,
                            seed, threads, show_progress)
    result = _finish(best, scanned, size, "separation", parse_rational(min_gap))
    logger.info(f"separation search {A.tag} vs {B.tag}: {result.to_dict()['status']}")
    return result


def nonrecurrence_witness(
    T: SetLike,
    d_max: int = 1,
    denominator_budget: int = 64,
    random_budget: int = 0,
    seed: int = 0,
    truncation: Optional[int] = None,
    min_gap: Any = DEFAULT_MIN_GAP,
    use_residues: bool = True,
    threads: int = 1,
    show_progress: bool = False,
) -> SearchResult:
    """Rational alpha keeping T alpha away from 0: the certificate's gap is eps"""
    T = as_integer_set(T, truncation)
    if not len(T):
        return SeparationCertificate(TorusRotation((HALF,)), None, 0, True, "nonrecurrence")
    best, scanned = _search(DeltaSource(T, None, use_residues), d_max, denominator_budget, random_budget,
                            seed, threads, show_progress)
    return _finish(best, scanned, len(T), "nonrecurrence", parse_rational(min_gap))


def constant_shift_witness(c: int) -> SeparationCertificate:
    """alpha = 1/(2c) puts c alpha at 1/2 exactly"""
    if c == 0:
        raise NilError("the constant set {0} is recurrent")
    return SeparationCertificate(TorusRotation((Fraction(1, 2 * abs(c)),)), HALF, 1, True, "nonrecurrence")


@dataclass
class I0Partition:
    """Pieces F_1..F_l followed by F'_1..F'_l; F_i collects the cube B_i"""
    pairs: Tuple[Tuple[int, int], ...]
    rotation: TorusRotation
    eps: Fraction
    cells_per_axis: int
    pieces: Tuple[IntegerSet, ...]

    @property
    def ell(self) -> int:
        return self.cells_per_axis ** self.rotation.d

    @property
    def side(self) -> Fraction:
        return self.eps / 2

    @property
    def labels(self) -> List[str]:
        return [f"F{i + 1}" for i in range(self.ell)] + [f"F'{i + 1}" for i in range(self.ell)]

    def center(self, i: int) -> Tuple[Fraction, ...]:
        index = np.unravel_index(i, (self.cells_per_axis,) * self.rotation.d)
        # the last cube on each axis is cut off at 1
        return tuple((int(k) * self.side + min((int(k) + 1) * self.side, Fraction(1))) / 2 for k in index)

    def to_dict(self) -> Dict[str, Any]:
        nonempty = [i for i, piece in enumerate(self.pieces) if len(piece)]
        labels = self.labels
        return {
            "rotation": self.rotation.to_dict(),
            "eps": format_rational(self.eps),
            "diameter": format_rational(self.side),
            "cells": self.ell,
            "labels": [labels[i] for i in nonempty],
            "pieces": [piece.to_list() for piece in (self.pieces[i] for i in nonempty)],
            "centers": [[format_rational(c) for c in self.center(i % self.ell)] for i in nonempty],
        }


def _cell(rotation: TorusRotation, n: int, side: Fraction, per_axis: int) -> int:
    index = 0
    for coordinate in rotation.point(n):
        index = index * per_axis + min(math.floor(coordinate / side), per_axis - 1)
    return index


def i0_partition(pairs: Sequence[Tuple[int, int]], alpha: Any, eps: Any) -> I0Partition:
    """Greedy cube-by-cube partition of the pair members.

    Cubes of side eps/2 cover T^d in lexicographic order. F_i takes every
    unassigned element whose rotation lands in cube i, and the unassigned
    partners of those elements go to F'_i.
    """
    rotation = TorusRotation.coerce(alpha)
    eps = parse_rational(eps)
    if eps <= 0:
        raise NilError("eps must be positive")
    pairs = tuple((int(r), int(s)) for r, s in pairs)
    for r, s in pairs:
        value = rotation.norm(s - r)
        if value < eps:
            raise WitnessInvalid(s - r, format_rational(value), format_rational(eps))

    side = eps / 2
    per_axis = math.ceil(1 / side)
    ell = per_axis ** rotation.d
    partners: Dict[int, Set[int]] = {}
    for r, s in pairs:
        partners.setdefault(r, set()).add(s)
        partners.setdefault(s, set()).add(r)

    by_cell: Dict[int, List[int]] = {}
    for e in sorted(partners):
        by_cell.setdefault(_cell(rotation, e, side, per_axis), []).append(e)

    assigned: Dict[int, int] = {}
    for i in sorted(by_cell):
        fresh = [e for e in by_cell[i] if e not in assigned]
        for e in fresh:
            assigned[e] = i
        for e in fresh:
            for p in sorted(partners[e]):
                assigned.setdefault(p, ell + i)

    members: List[List[int]] = [[] for _ in range(2 * ell)]
    for e, piece in assigned.items():
        members[piece].append(e)
    labels = [f"F{i + 1}" for i in range(ell)] + [f"F'{i + 1}" for i in range(ell)]
    pieces = tuple(IntegerSet.of(m, tag=label) for m, label in zip(members, labels))
    logger.debug(f"i0 partition: {sum(1 for m in members if m)} nonempty pieces of {2 * ell}")
    return I0Partition(pairs, rotation, eps, per_axis, pieces)


@dataclass
class I0Verification:
    checks: Dict[str, bool]
    failures: Dict[str, List[str]] = field(default_factory=dict)
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> Dict[str, Any]:
        return {"passed": self.passed, "checks": dict(self.checks), "failures": dict(self.failures), **self.details}


def verify_i0_partition(
    partition: I0Partition,
    truncation: Optional[int] = None,
    lacunary_threshold: Fraction = Fraction(5, 4),
) -> I0Verification:
    """Re-derive the four properties the partition is built to have"""
    pairs = partition.pairs[:truncation] if truncation else partition.pairs
    members = {e for pair in pairs for e in pair}
    pieces = [sorted(set(p.elements) & members) if truncation else list(p.elements) for p in partition.pieces]
    labels = partition.labels
    ell = partition.ell
    failures: Dict[str, List[str]] = {"disjoint_cover": [], "pairs_split": [], "lacunary": [], "partner_gap": []}

    owner: Dict[int, int] = {}
    for i, piece in enumerate(pieces):
        for e in piece:
            if e in owner:
                failures["disjoint_cover"].append(f"{e} in {labels[owner[e]]} and {labels[i]}")
            owner[e] = i
    missing = sorted(members - set(owner))
    extra = sorted(set(owner) - members)
    if missing:
        failures["disjoint_cover"].append(f"uncovered: {missing[:8]}")
    if extra:
        failures["disjoint_cover"].append(f"not in E: {extra[:8]}")

    for r, s in pairs:
        if r in owner and owner.get(r) == owner.get(s):
            failures["pairs_split"].append(f"({r}, {s}) both in {labels[owner[r]]}")

    nonempty = [i for i, piece in enumerate(pieces) if piece]
    for i in nonempty:
        if not is_lacunary(pieces[i], lacunary_threshold):
            failures["lacunary"].append(labels[i])
    for i, j in itertools.combinations(nonempty, 2):
        if j == i + ell:
            continue
        if not is_lacunary(sorted(pieces[i] + pieces[j]), lacunary_threshold):
            failures["lacunary"].append(f"{labels[i]} + {labels[j]}")

    gaps = []
    for i in range(ell):
        if pieces[i] and pieces[i + ell]:
            try:
                gap = rotation_gap(partition.rotation, pieces[i], pieces[i + ell], use_residues=False).gap
            except SetsNotDisjoint as e:
                failures["partner_gap"].append(f"{labels[i]} vs {labels[i + ell]}: {e}")
                continue
            gaps.append(gap)
            if gap < partition.side:
                failures["partner_gap"].append(f"{labels[i]} vs {labels[i + ell]}: {format_rational(gap)}")

    checks = {name: not found for name, found in failures.items()}
    details = {
        "pairs": len(pairs),
        "nonempty_pieces": len(nonempty),
        "min_partner_gap": format_rational(min(gaps)) if gaps else "inf",
    }
    return I0Verification(checks, {k: v for k, v in failures.items() if v}, details)


@dataclass
class SquareLift:
    pairs: Tuple[Tuple[int, int], ...]
    shifts: Tuple[int, ...]
    r_ratio: Fraction
    shift_ratio: Fraction
    shifts_lacunary: bool
    chain: List[Dict[str, Any]]
    t_increasing: bool

    @property
    def chain_holds(self) -> bool:
        return all(row["holds"] for row in self.chain)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pairs": [list(p) for p in self.pairs],
            "r_ratio": format_rational(self.r_ratio),
            "shift_ratio": format_rational(self.shift_ratio),
            "shifts_lacunary": self.shifts_lacunary,
            "chain_holds": self.chain_holds,
            "t_increasing": self.t_increasing,
            "chain": self.chain,
        }


def square_lift(pairs: Sequence[Tuple[int, int]]) -> SquareLift:
    """Square both members of each pair and check the shift set stays lacunary.

    Per index n the ratio of 2 r t + t^2 is compared with r_{n+1} / r_n;
    the middle term (2 r_{n+1} + t_{n+1}) / (2 r_n + t_n) is reported.
    """
    pairs = [(int(r), int(s)) for r, s in pairs]
    if len(pairs) < 2:
        raise TooShort(len(pairs))
    r = [p[0] for p in pairs]
    t = [s - a for a, s in pairs]
    if any(v <= 0 for v in t):
        raise HypothesisViolated("shifts t_n must be positive")
    if not is_lacunary(r):
        raise HypothesisViolated(f"r_n is not lacunary (min ratio {format_rational(lacunary_ratio(r))})")
    decay = [Fraction(b, a) for a, b in zip(r, t)]
    peak = decay.index(max(decay))
    if any(y > x for x, y in zip(decay[peak:], decay[peak + 1:])):
        raise HypothesisViolated("t_n / r_n does not decrease after its maximum")

    shifts = [2 * a * b + b * b for a, b in zip(r, t)]
    chain = []
    for n in range(len(pairs) - 1):
        r_step = Fraction(r[n + 1], r[n])
        middle = Fraction(2 * r[n + 1] + t[n + 1], 2 * r[n] + t[n])
        shift_step = Fraction(shifts[n + 1], shifts[n])
        chain.append({
            "n": n + 1,
            "r_ratio": format_rational(r_step),
            "middle": format_rational(middle),
            "shift_ratio": format_rational(shift_step),
            "holds": shift_step >= r_step,
        })
    return SquareLift(
        pairs=tuple((a * a, s * s) for a, s in pairs),
        shifts=tuple(shifts),
        r_ratio=lacunary_ratio(r),
        shift_ratio=lacunary_ratio(shifts),
        shifts_lacunary=is_lacunary(shifts),
        chain=chain,
        t_increasing=all(b > a for a, b in zip(t, t[1:])),
    )


@dataclass
class SumReport:
    rows: List[Dict[str, Any]]

    @property
    def all_certified(self) -> bool:
        return all(row["certified"] for row in self.rows)

    def to_dict(self) -> Dict[str, Any]:
        return {"all_certified": self.all_certified, "pairs": self.rows}


def sum_with_finite(
    E: SetLike,
    F: Iterable[int],
    truncation: Optional[int] = None,
    d_max: int = 1,
    denominator_budget: int = 64,
) -> SumReport:
    """Certify E + i against E + j for all i < j in F.

    Each pair gets the constant-shift witness for j - i and a verified I0
    partition of the pairs (e + i, e + j); the direct rotation search is
    attached for reference and may come back NotFound.
    """
    E = as_integer_set(E, truncation)
    F = sorted(set(int(f) for f in F))
    rows = []
    for i, j in itertools.combinations(F, 2):
        witness = constant_shift_witness(j - i)
        partition = i0_partition([(e + i, e + j) for e in E], witness.rotation, witness.gap)
        verification = verify_i0_partition(partition)
        direct = find_separating_rotation(E.shifted(i), E.shifted(j), d_max, denominator_budget)
        rows.append({
            "i": i,
            "j": j,
            "witness": witness.to_dict(),
            "verification": verification.to_dict(),
            "direct": direct.to_dict(),
            "certified": verification.passed,
        })
    return SumReport(rows)


def separation_curve(
    A: SetLike,
    B: SetLike,
    truncations: Sequence[int],
    d_max: int = 1,
    denominator_budget: int = 64,
    random_budget: int = 0,
    seed: int = 0,
    use_residues: bool = False,
    threads: int = 1,
) -> pd.DataFrame:
    """Best gap found at each truncation; without residues it can only shrink as N grows"""
    rows = []
    for N in sorted(set(truncations)):
        result = find_separating_rotation(A, B, d_max, denominator_budget, random_budget, seed, N,
                                          use_residues=use_residues, threads=threads)
        best = result if isinstance(result, SeparationCertificate) else result.best
        rows.append({
            "truncation": N,
            "found": isinstance(result, SeparationCertificate),
            "best_gap": "none" if best is None else ("inf" if best.gap is None else format_rational(best.gap)),
            "alpha": "" if best is None else ",".join(format_rational(a) for a in best.rotation.alpha),
            "exact": bool(best and best.exact),
        })
    return pd.DataFrame(rows, columns=["truncation", "found", "best_gap", "alpha", "exact"])
