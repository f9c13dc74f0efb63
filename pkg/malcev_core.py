#!/usr/bin/env python3
"""
Exact arithmetic on nilpotent Lie groups given in Mal'cev coordinates.

A group is described by a NilGroupSpec: its dimension m, its step k and the
structure polynomials P_1..P_{m-1}. Coordinates multiply as

    (s * t)_i = s_i + t_i + P_{i-1}(s_1..s_{i-1}, t_1..t_{i-1})

and every value is a fractions.Fraction, so results are exact.
"""

import itertools
import logging
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import fsspec
import numpy as np
import sympy

from errors import (
    DegreeTooHigh,
    DimensionMismatch,
    IdentityAxiomViolated,
    NilError,
    RationalParseError,
    SpecParseError,
)

logger = logging.getLogger(__name__)

RationalLike = Union[int, str, Fraction]
GroupElement = Tuple[Fraction, ...]
LatticeVector = Tuple[int, ...]
Exponent = Tuple[int, ...]

IDENTITY_SAMPLE_VALUES = (
    Fraction(0), Fraction(1), Fraction(-1), Fraction(2), Fraction(-2), Fraction(1, 2), Fraction(-1, 2)
)
IDENTITY_SAMPLE_LIMIT = 4096

_FACTOR_RE = re.compile(r"^([A-Za-z]+[0-9]*)(?:\^([0-9]+))?$")


def parse_rational(text: RationalLike) -> Fraction:
    """Parse `p/q`, an integer or a Fraction into a Fraction"""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise RationalParseError(str(text)) from None


def format_rational(value: Fraction) -> str:
    return str(Fraction(value))


def element(values: Iterable[RationalLike]) -> GroupElement:
    """Coerce a sequence of numbers into a GroupElement"""
    return tuple(parse_rational(v) for v in values)


def _to_fraction(value) -> Fraction:
    """Convert a sympy rational (or int) to Fraction"""
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    rational = sympy.Rational(value)
    return Fraction(int(rational.p), int(rational.q))


@dataclass(frozen=True)
class Polynomial:
    """Sparse multivariate polynomial with Fraction coefficients.

    `terms` is stored as a sorted tuple of (exponent vector, coefficient)
    pairs with no zero coefficients, which keeps the object hashable.
    """
    variables: Tuple[str, ...]
    terms: Tuple[Tuple[Exponent, Fraction], ...] = ()
    _compiled: Tuple = field(default=(), init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        variables = tuple(self.variables)
        raw = self.terms.items() if isinstance(self.terms, Mapping) else self.terms
        merged: Dict[Exponent, Fraction] = {}
        for exponent, coefficient in raw:
            exponent = tuple(int(e) for e in exponent)
            if len(exponent) != len(variables):
                raise SpecParseError(
                    f"exponent {exponent} does not match variables {variables}"
                )
            if any(e < 0 for e in exponent):
                raise SpecParseError(f"negative exponent in {exponent}")
            merged[exponent] = merged.get(exponent, Fraction(0)) + parse_rational(coefficient)
        terms = tuple(
            sorted(((e, c) for e, c in merged.items() if c != 0), key=lambda item: (sum(item[0]), item[0]))
        )
        compiled = tuple(
            (c, tuple((idx, e) for idx, e in enumerate(exponent) if e)) for exponent, c in terms
        )
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "_compiled", compiled)

    @classmethod
    def zero(cls, variables: Sequence[str]) -> "Polynomial":
        return cls(tuple(variables), ())

    @property
    def coefficients(self) -> Dict[Exponent, Fraction]:
        return dict(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree; the zero polynomial has degree 0"""
        return max((sum(e) for e, _ in self.terms), default=0)

    def block_degree(self, indices: Iterable[int]) -> int:
        """Degree in the variables at the given positions only"""
        indices = list(indices)
        return max((sum(e[i] for i in indices) for e, _ in self.terms), default=0)

    def evaluate(self, point: Sequence[Fraction]) -> Fraction:
        if len(point) != len(self.variables):
            raise DimensionMismatch(len(self.variables), len(point))
        total = Fraction(0)
        for coefficient, factors in self._compiled:
            term = coefficient
            for idx, exponent in factors:
                value = point[idx]
                if not value:
                    term = 0
                    break
                term = term * (value if exponent == 1 else value ** exponent)
            if term:
                total += term
        return total

    def evaluate_array(self, arrays: Sequence[np.ndarray]) -> np.ndarray:
        """Floating-point evaluation on numpy arrays of equal shape"""
        if len(arrays) != len(self.variables):
            raise DimensionMismatch(len(self.variables), len(arrays))
        shape = np.broadcast(*arrays).shape if arrays else ()
        result = np.zeros(shape, dtype=float)
        for coefficient, factors in self._compiled:
            term = np.full(shape, float(coefficient))
            for idx, exponent in factors:
                term = term * np.asarray(arrays[idx], dtype=float) ** exponent
            result = result + term
        return result

    def relabel(self, variables: Sequence[str], rename: Optional[Mapping[str, str]] = None) -> "Polynomial":
        """Re-express over a new variable list, renaming variables first"""
        rename = rename or {}
        variables = tuple(variables)
        positions = []
        for name in self.variables:
            target = rename.get(name, name)
            if target not in variables:
                raise SpecParseError(f"variable {target} missing from {variables}")
            positions.append(variables.index(target))
        terms = []
        for exponent, coefficient in self.terms:
            new = [0] * len(variables)
            for pos, e in zip(positions, exponent):
                new[pos] += e
            terms.append((tuple(new), coefficient))
        return Polynomial(variables, tuple(terms))

    def to_sympy(self):
        symbols = sympy.symbols(self.variables) if self.variables else ()
        expr = sympy.Integer(0)
        for exponent, coefficient in self.terms:
            monomial = sympy.Rational(coefficient.numerator, coefficient.denominator)
            for sym, e in zip(symbols, exponent):
                monomial *= sym ** e
            expr += monomial
        return expr

    @classmethod
    def from_sympy(cls, expr, variables: Sequence[str]) -> "Polynomial":
        variables = tuple(variables)
        symbols = sympy.symbols(variables) if variables else ()
        expr = sympy.expand(sympy.sympify(expr))
        if not symbols:
            return cls((), (((), _to_fraction(expr)),))
        poly = sympy.Poly(expr, *symbols)
        return cls(variables, tuple((exp, _to_fraction(c)) for exp, c in poly.terms()))

    def to_text(self) -> str:
        """Render as whitespace separated `coeff:monomial` pairs"""
        if not self.terms:
            return "0"
        parts = []
        for exponent, coefficient in self.terms:
            factors = [
                name if e == 1 else f"{name}^{e}"
                for name, e in zip(self.variables, exponent) if e
            ]
            parts.append(f"{format_rational(coefficient)}:{'*'.join(factors) or '1'}")
        return " ".join(parts)

    @classmethod
    def parse(cls, text: str, variables: Sequence[str]) -> "Polynomial":
        variables = tuple(variables)
        tokens = text.split()
        if not tokens or tokens == ["0"]:
            return cls.zero(variables)
        terms = []
        for token in tokens:
            if ":" in token:
                coeff_text, monomial = token.split(":", 1)
                try:
                    coefficient = parse_rational(coeff_text)
                except RationalParseError:
                    raise SpecParseError(f"bad coefficient in term {token!r}") from None
            else:
                coefficient, monomial = Fraction(1), token
            exponent = [0] * len(variables)
            if monomial != "1":
                for factor in monomial.split("*"):
                    match = _FACTOR_RE.match(factor)
                    if not match:
                        raise SpecParseError(f"bad factor {factor!r} in term {token!r}")
                    name, power = match.group(1), int(match.group(2) or 1)
                    if name not in variables:
                        raise SpecParseError(f"unknown variable {name!r}; allowed {list(variables)}")
                    exponent[variables.index(name)] += power
            terms.append((tuple(exponent), coefficient))
        return cls(variables, tuple(terms))


def structure_variables(i: int) -> Tuple[str, ...]:
    """Variables of P_i: s1..si then t1..ti"""
    return tuple(f"s{j}" for j in range(1, i + 1)) + tuple(f"t{j}" for j in range(1, i + 1))


@dataclass(frozen=True)
class NilGroupSpec:
    """Mal'cev presentation of a k-step nilpotent group of dimension m"""
    m: int
    k: int
    structure_polys: Tuple[Polynomial, ...]
    name: str = "custom"
    allow_degree_k: bool = False
    validated: bool = False

    def __post_init__(self):
        if self.m < 1 or self.k < 1:
            raise SpecParseError(f"m and k must be positive, got m={self.m}, k={self.k}")
        polys = tuple(self.structure_polys)
        if len(polys) != self.m - 1:
            raise DimensionMismatch(self.m - 1, len(polys))
        for i, poly in enumerate(polys, start=1):
            if poly.variables != structure_variables(i):
                raise SpecParseError(
                    f"P_{i} must be over {list(structure_variables(i))}, got {list(poly.variables)}"
                )
        object.__setattr__(self, "structure_polys", polys)

    def identity(self) -> GroupElement:
        return (Fraction(0),) * self.m


ValidatedSpec = NilGroupSpec


def _identity_witness(index: int, poly: Polynomial) -> Optional[Tuple[Fraction, ...]]:
    """Search the sample grid for a point with a zero block where P does not vanish"""
    zeros = (Fraction(0),) * index
    samples = itertools.islice(itertools.product(IDENTITY_SAMPLE_VALUES, repeat=index), IDENTITY_SAMPLE_LIMIT)
    for values in samples:
        for point in (zeros + values, values + zeros):
            if poly.evaluate(point) != 0:
                return point
    return None


def validate_spec(spec: NilGroupSpec, allow_degree_k: Optional[bool] = None) -> ValidatedSpec:
    """Check that zero is a two-sided identity and the degree bound"""
    allow = spec.allow_degree_k if allow_degree_k is None else allow_degree_k
    for i, poly in enumerate(spec.structure_polys, start=1):
        witness = _identity_witness(i, poly)
        if witness is None:
            for exponent, _ in poly.terms:
                if not any(exponent[:i]) or not any(exponent[i:]):
                    witness = (Fraction(0),) * (2 * i)
                    break
        if witness is not None:
            raise IdentityAxiomViolated(i, witness)

        degree = poly.degree()
        if degree > spec.k - 1:
            s_degree = poly.block_degree(range(i))
            t_degree = poly.block_degree(range(i, 2 * i))
            if allow and degree <= spec.k and max(s_degree, t_degree) <= spec.k - 1:
                logger.warning(
                    f"P_{i} of {spec.name} has total degree {degree} = k; accepted (block degrees {s_degree}, {t_degree})"
                )
            else:
                raise DegreeTooHigh(i, degree, spec.k if allow else spec.k - 1)

    return replace(spec, allow_degree_k=allow, validated=True)


def _check(spec: NilGroupSpec, *elements: Sequence[Fraction]):
    for x in elements:
        if len(x) != spec.m:
            raise DimensionMismatch(spec.m, len(x))


def multiply(spec: NilGroupSpec, s: Sequence[Fraction], t: Sequence[Fraction]) -> GroupElement:
    _check(spec, s, t)
    out = [s[0] + t[0]]
    for i in range(1, spec.m):
        out.append(s[i] + t[i] + spec.structure_polys[i - 1].evaluate(tuple(s[:i]) + tuple(t[:i])))
    return tuple(out)


def inverse(spec: NilGroupSpec, s: Sequence[Fraction]) -> GroupElement:
    """Solve s * y = 0 one coordinate at a time"""
    _check(spec, s)
    y: List[Fraction] = [-s[0]]
    for i in range(1, spec.m):
        y.append(-s[i] - spec.structure_polys[i - 1].evaluate(tuple(s[:i]) + tuple(y)))
    return tuple(y)


def power_iter(spec: NilGroupSpec, x: Sequence[Fraction], n: int) -> GroupElement:
    """n-fold product by repeated multiplication"""
    _check(spec, x)
    if n < 0:
        raise ValueError(f"power_iter needs n >= 0, got {n}")
    result = spec.identity()
    for _ in range(n):
        result = multiply(spec, result, x)
    return result


def power(spec: NilGroupSpec, x: Sequence[Fraction], n: int) -> GroupElement:
    """x^n by binary exponentiation; negative n goes through the inverse"""
    _check(spec, x)
    base = tuple(x)
    if n < 0:
        base, n = inverse(spec, base), -n
    result = spec.identity()
    while n:
        if n & 1:
            result = multiply(spec, result, base)
        n >>= 1
        if n:
            base = multiply(spec, base, base)
    return result


def power_closed(spec: NilGroupSpec, x: Sequence[Fraction], n: int) -> GroupElement:
    """Evaluate Q_{i,n}(x) = n x_i + sum_{j<n} P_{i-1}(x_<i, Q_{<i,j}) by dynamic programming over j"""
    _check(spec, x)
    if n < 0:
        raise ValueError(f"power_closed needs n >= 0, got {n}")
    x = tuple(x)
    sums = [Fraction(0)] * spec.m
    q_j: Tuple[Fraction, ...] = spec.identity()
    for j in range(1, n + 1):
        # q_j holds Q_{.,j-1}; accumulate the j-1 term before advancing
        if j > 1:
            for i in range(1, spec.m):
                sums[i] += spec.structure_polys[i - 1].evaluate(x[:i] + q_j[:i])
        q_j = tuple(j * x[i] + sums[i] for i in range(spec.m))
    return q_j


def majorant_polynomial(spec: NilGroupSpec) -> Polynomial:
    """Coefficient-wise max of |coefficients| of all P_i over s1..s_{m-1}, t1..t_{m-1}"""
    width = spec.m - 1
    variables = structure_variables(width)
    best: Dict[Exponent, Fraction] = {}
    for i, poly in enumerate(spec.structure_polys, start=1):
        for exponent, coefficient in poly.terms:
            embedded = list(exponent[:i]) + [0] * (width - i) + list(exponent[i:]) + [0] * (width - i)
            key = tuple(embedded)
            best[key] = max(best.get(key, Fraction(0)), abs(coefficient))
    return Polynomial(variables, tuple(best.items()))


@lru_cache(maxsize=64)
def bound_polynomial(spec: NilGroupSpec) -> sympy.Poly:
    """R = S composed m-1 times, S(x) = x + (x-1) P(1,..,1, x,..,x)"""
    x = sympy.Symbol("x")
    width = spec.m - 1
    majorant = majorant_polynomial(spec).to_sympy()
    substitution = {sympy.Symbol(f"s{j}"): 1 for j in range(1, width + 1)}
    substitution.update({sympy.Symbol(f"t{j}"): x for j in range(1, width + 1)})
    s_poly = sympy.Poly(x + (x - 1) * sympy.sympify(majorant).subs(substitution), x)
    r_poly = sympy.Poly(x, x)
    for _ in range(width):
        r_poly = s_poly.compose(r_poly)
    logger.debug(f"bound polynomial for {spec.name}: S = {s_poly.as_expr()}, deg R = {r_poly.degree()}")
    return r_poly


def coeff_bound(spec: NilGroupSpec, n: int) -> Fraction:
    """R(n), an upper bound on the |coefficient| sum of every Q_{i,n}"""
    if n < 1:
        raise ValueError(f"coeff_bound needs n >= 1, got {n}")
    return _to_fraction(bound_polynomial(spec).eval(n))


def bound_degree(spec: NilGroupSpec) -> int:
    return int(bound_polynomial(spec).degree())


def power_degree_bound(spec: NilGroupSpec) -> int:
    """deg Q_{i,n} <= prod_j (deg P_j + 1)"""
    bound = 1
    for poly in spec.structure_polys:
        bound *= poly.degree() + 1
    return bound


def product_spec(spec1: NilGroupSpec, spec2: NilGroupSpec) -> ValidatedSpec:
    """Direct product; coordinates of spec1 first, then spec2"""
    m1 = spec1.m
    polys = list(spec1.structure_polys)
    polys.append(Polynomial.zero(structure_variables(m1)))
    for j, poly in enumerate(spec2.structure_polys, start=1):
        rename = {f"s{l}": f"s{m1 + l}" for l in range(1, j + 1)}
        rename.update({f"t{l}": f"t{m1 + l}" for l in range(1, j + 1)})
        polys.append(poly.relabel(structure_variables(m1 + j), rename))
    spec = NilGroupSpec(
        m=m1 + spec2.m,
        k=max(spec1.k, spec2.k),
        structure_polys=tuple(polys),
        name=f"{spec1.name}x{spec2.name}",
        allow_degree_k=spec1.allow_degree_k or spec2.allow_degree_k,
    )
    return validate_spec(spec)


# Spec file codec

def spec_to_text(spec: NilGroupSpec) -> str:
    lines = [f"{spec.m} {spec.k}"]
    lines.extend(poly.to_text() for poly in spec.structure_polys)
    return "\n".join(lines) + "\n"


def parse_spec_text(text: str, name: str = "custom", allow_degree_k: bool = False) -> NilGroupSpec:
    """Parse the `m k` header and m-1 polynomial lines; `#` starts a comment"""
    lines = [line.split("#", 1)[0].strip() for line in text.splitlines()]
    lines = [line for line in lines if line]
    if not lines:
        raise SpecParseError("empty group spec")
    header = lines[0].split()
    if len(header) != 2 or not all(h.isdigit() for h in header):
        raise SpecParseError(f"header must be `m k`, got {lines[0]!r}")
    m, k = int(header[0]), int(header[1])
    body = lines[1:]
    if len(body) != m - 1:
        raise SpecParseError(f"expected {m - 1} polynomial lines, got {len(body)}")
    polys = tuple(Polynomial.parse(line, structure_variables(i)) for i, line in enumerate(body, start=1))
    return NilGroupSpec(m=m, k=k, structure_polys=polys, name=name, allow_degree_k=allow_degree_k)


# Registry

@lru_cache(maxsize=None)
def abelian(d: int) -> ValidatedSpec:
    if d < 1:
        raise SpecParseError(f"abelian dimension must be >= 1, got {d}")
    polys = tuple(Polynomial.zero(structure_variables(i)) for i in range(1, d))
    return validate_spec(NilGroupSpec(m=d, k=1, structure_polys=polys, name=f"abelian:{d}"))


@lru_cache(maxsize=None)
def heisenberg() -> ValidatedSpec:
    polys = (
        Polynomial.zero(structure_variables(1)),
        Polynomial.parse("1:s1*t2", structure_variables(2)),
    )
    spec = NilGroupSpec(m=3, k=2, structure_polys=polys, name="heisenberg", allow_degree_k=True)
    return _register(spec)


@lru_cache(maxsize=None)
def filiform() -> ValidatedSpec:
    polys = (
        Polynomial.zero(structure_variables(1)),
        Polynomial.parse("1:s1*t2", structure_variables(2)),
        Polynomial.parse("1:s1*t3 1/2:s1^2*t2 -1/2:s1*t2", structure_variables(3)),
    )
    spec = NilGroupSpec(m=4, k=3, structure_polys=polys, name="filiform", allow_degree_k=True)
    return _register(spec)


def matrix_oracle(spec_id: str, x: Sequence[RationalLike]) -> np.ndarray:
    """Unipotent upper-triangular matrix representing x (object array of Fractions)"""
    x = element(x)
    one, zero = Fraction(1), Fraction(0)
    if spec_id == "heisenberg":
        if len(x) != 3:
            raise DimensionMismatch(3, len(x))
        rows = [[one, x[0], x[2]], [zero, one, x[1]], [zero, zero, one]]
    elif spec_id == "filiform":
        if len(x) != 4:
            raise DimensionMismatch(4, len(x))
        rows = [
            [one, x[0], x[0] * (x[0] - 1) / 2, x[3]],
            [zero, one, x[0], x[2]],
            [zero, zero, one, x[1]],
            [zero, zero, zero, one],
        ]
    else:
        raise NilError(f"no matrix model for {spec_id!r}")
    return np.array(rows, dtype=object)


def matrix_coordinates(spec_id: str, matrix: np.ndarray) -> GroupElement:
    """Read Mal'cev coordinates back off an oracle matrix"""
    if spec_id == "heisenberg":
        return (matrix[0, 1], matrix[1, 2], matrix[0, 2])
    if spec_id == "filiform":
        return (matrix[0, 1], matrix[2, 3], matrix[1, 3], matrix[0, 3])
    raise NilError(f"no matrix model for {spec_id!r}")


def agrees_with_matrix_oracle(spec: NilGroupSpec, samples: int = 200, seed: int = 0) -> bool:
    """Compare multiply against the matrix product on seeded random pairs"""
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        a = tuple(Fraction(int(p), int(q)) for p, q in zip(rng.integers(-6, 7, spec.m), rng.integers(1, 5, spec.m)))
        b = tuple(Fraction(int(p), int(q)) for p, q in zip(rng.integers(-6, 7, spec.m), rng.integers(1, 5, spec.m)))
        product = matrix_oracle(spec.name, a).dot(matrix_oracle(spec.name, b))
        if matrix_coordinates(spec.name, product) != multiply(spec, a, b):
            logger.error(f"{spec.name}: multiply disagrees with matrix model at {a} * {b}")
            return False
    return True


def _register(spec: NilGroupSpec) -> ValidatedSpec:
    validated = validate_spec(spec)
    if not agrees_with_matrix_oracle(validated):
        raise NilError(f"registered spec {spec.name} fails its matrix model")
    return validated


_REGISTRY = {"heisenberg": heisenberg, "filiform": filiform}


@lru_cache(maxsize=32)
def get_spec(spec_id: str) -> ValidatedSpec:
    """Look up a registered spec: abelian:<d>, heisenberg, filiform"""
    spec_id = spec_id.strip()
    if spec_id.startswith("abelian:"):
        dim = spec_id.split(":", 1)[1]
        if not dim.isdigit():
            raise SpecParseError(f"bad abelian dimension in {spec_id!r}")
        return abelian(int(dim))
    if spec_id in _REGISTRY:
        return _REGISTRY[spec_id]()
    raise SpecParseError(f"unknown spec id {spec_id!r}; registered: {', '.join(registered_ids())}")


def registered_ids() -> List[str]:
    return ["abelian:<d>"] + sorted(_REGISTRY)


def load_spec(path_or_id: str, allow_degree_k: bool = False) -> ValidatedSpec:
    """Registry id, or a path / fsspec URL of a spec file"""
    if path_or_id.startswith("abelian:") or path_or_id in _REGISTRY:
        return get_spec(path_or_id)
    try:
        with fsspec.open(path_or_id, "r") as handle:
            text = handle.read()
    except FileNotFoundError:
        raise SpecParseError(
            f"no spec file {path_or_id!r}; registered: {', '.join(registered_ids())}"
        ) from None
    name = path_or_id.rsplit("/", 1)[-1]
    spec = parse_spec_text(text, name=name, allow_degree_k=allow_degree_k)
    return validate_spec(spec)
