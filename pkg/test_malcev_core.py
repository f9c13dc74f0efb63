#!/usr/bin/env python3
"""
Tests for Mal'cev coordinate arithmetic

Covers the worked examples for each operation, seeded sweeps for the
group axioms and hypothesis properties with exact Fraction inputs.
"""

import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from errors import DegreeTooHigh, DimensionMismatch, IdentityAxiomViolated, SpecParseError
from malcev_core import (
    NilGroupSpec,
    Polynomial,
    abelian,
    agrees_with_matrix_oracle,
    bound_degree,
    coeff_bound,
    element,
    filiform,
    get_spec,
    heisenberg,
    inverse,
    load_spec,
    matrix_coordinates,
    matrix_oracle,
    multiply,
    parse_spec_text,
    power,
    power_closed,
    power_degree_bound,
    power_iter,
    product_spec,
    spec_to_text,
    structure_variables,
    validate_spec,
)

SPEC_IDS = ["abelian:2", "heisenberg", "filiform"]

fractions = st.fractions(min_value=-8, max_value=8, max_denominator=12)


def random_element(rng: random.Random, m: int):
    return tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 6)) for _ in range(m))


def test_heisenberg_multiply_examples():
    """Non-commutativity shows up in the third coordinate"""
    spec = heisenberg()
    assert multiply(spec, element([1, 0, 0]), element([0, 1, 0])) == element([1, 1, 1])
    assert multiply(spec, element([0, 1, 0]), element([1, 0, 0])) == element([1, 1, 0])


def test_identity_is_two_sided():
    for spec_id in SPEC_IDS:
        spec = get_spec(spec_id)
        t = element(["1/2", -3, 2, "5/7"][: spec.m])
        assert multiply(spec, spec.identity(), t) == t
        assert multiply(spec, t, spec.identity()) == t


def test_validate_spec_examples():
    assert heisenberg().validated
    assert abelian(2).validated

    bad = NilGroupSpec(
        m=2, k=2, structure_polys=(Polynomial.parse("1:s1*t1 1:1", structure_variables(1)),)
    )
    with pytest.raises(IdentityAxiomViolated) as excinfo:
        validate_spec(bad)
    assert excinfo.value.index == 1
    assert excinfo.value.witness is not None


def test_degree_convention():
    """Total degree k needs the override flag"""
    polys = (Polynomial.zero(structure_variables(1)), Polynomial.parse("1:s1*t2", structure_variables(2)))
    strict = NilGroupSpec(m=3, k=2, structure_polys=polys)
    with pytest.raises(DegreeTooHigh) as excinfo:
        validate_spec(strict)
    assert excinfo.value.index == 2
    assert validate_spec(strict, allow_degree_k=True).validated

    too_high = NilGroupSpec(
        m=3, k=2, structure_polys=(polys[0], Polynomial.parse("1:s1*t1*t2", structure_variables(2))),
        allow_degree_k=True,
    )
    with pytest.raises(DegreeTooHigh):
        validate_spec(too_high)


def test_dimension_mismatch():
    spec = heisenberg()
    with pytest.raises(DimensionMismatch):
        multiply(spec, element([1, 2]), element([1, 2, 3]))
    with pytest.raises(DimensionMismatch):
        NilGroupSpec(m=3, k=2, structure_polys=(Polynomial.zero(structure_variables(1)),))


def test_inverse_examples():
    spec = heisenberg()
    x = element([1, 1, 0])
    y = inverse(spec, x)
    assert y == element([-1, -1, 1])
    assert multiply(spec, x, y) == spec.identity()
    assert multiply(spec, y, x) == spec.identity()

    flat = abelian(2)
    assert inverse(flat, element(["2/3", -5])) == element(["-2/3", 5])
    assert inverse(spec, spec.identity()) == spec.identity()


def test_power_examples():
    spec = heisenberg()
    assert power_iter(spec, element([1, 1, 0]), 2) == element([2, 2, 1])
    assert power_closed(spec, element([1, 1, 0]), 3) == element([3, 3, 3])
    assert power_iter(spec, element([1, 1, 0]), 0) == spec.identity()
    for spec_id in SPEC_IDS:
        s = get_spec(spec_id)
        x = element(["1/3", 2, "-1/2", 1][: s.m])
        assert power_iter(s, x, 1) == x
        assert power_closed(s, x, 1) == x

    flat = abelian(2)
    assert power_closed(flat, element(["1/2", 3]), 7) == element(["7/2", 21])


def test_heisenberg_closed_form():
    """(a,b,c)^n = (na, nb, nc + n(n-1)/2 ab) for every n up to 1000"""
    spec = heisenberg()
    a, b, c = Fraction(3, 7), Fraction(-5, 2), Fraction(1, 3)
    x = (a, b, c)
    current = spec.identity()
    for n in range(1, 1001):
        current = multiply(spec, current, x)
        expected = (n * a, n * b, n * c + Fraction(n * (n - 1), 2) * a * b)
        assert current == expected
        if n % 97 == 0:
            assert power(spec, x, n) == expected
    assert power_iter(spec, x, 1000) == current


def test_power_iter_matches_power_closed():
    rng = random.Random(7)
    for spec_id, elements in (("heisenberg", 100), ("filiform", 25), ("abelian:2", 25)):
        spec = get_spec(spec_id)
        for _ in range(elements):
            x = random_element(rng, spec.m)
            current = spec.identity()
            for n in range(1, 65):
                current = multiply(spec, current, x)
                assert power_closed(spec, x, n) == current
            assert power_iter(spec, x, 64) == current


def test_power_negative_exponent():
    spec = filiform()
    x = element(["1/2", 2, -1, 3])
    assert multiply(spec, power(spec, x, -5), power(spec, x, 5)) == spec.identity()
    assert power(spec, x, -1) == inverse(spec, x)


def test_associativity_seeded():
    """1000 seeded rational triples per registered spec"""
    rng = random.Random(2024)
    for spec_id in SPEC_IDS:
        spec = get_spec(spec_id)
        for _ in range(1000):
            a, b, c = (random_element(rng, spec.m) for _ in range(3))
            assert multiply(spec, multiply(spec, a, b), c) == multiply(spec, a, multiply(spec, b, c))


@settings(max_examples=60, deadline=None)
@given(st.lists(fractions, min_size=12, max_size=12))
def test_group_axioms_filiform(values):
    spec = filiform()
    a, b, c = tuple(values[0:4]), tuple(values[4:8]), tuple(values[8:12])
    assert multiply(spec, multiply(spec, a, b), c) == multiply(spec, a, multiply(spec, b, c))
    assert multiply(spec, a, inverse(spec, a)) == spec.identity()
    assert multiply(spec, inverse(spec, a), a) == spec.identity()


@settings(max_examples=40, deadline=None)
@given(st.lists(fractions, min_size=3, max_size=3), st.integers(min_value=0, max_value=40))
def test_power_algorithms_agree(values, n):
    spec = heisenberg()
    x = tuple(values)
    assert power(spec, x, n) == power_iter(spec, x, n)
    if n >= 1:
        assert power_closed(spec, x, n) == power_iter(spec, x, n)


def symbolic_powers(spec: NilGroupSpec, n_max: int):
    """Q_{i,n} as sympy expressions for n = 1..n_max"""
    xs = sympy.symbols([f"x{i}" for i in range(1, spec.m + 1)])
    polys = [p.to_sympy() for p in spec.structure_polys]
    sums = [sympy.Integer(0)] * spec.m
    q = list(xs)
    table = {1: list(q)}
    for j in range(2, n_max + 1):
        for i in range(1, spec.m):
            substitution = {sympy.Symbol(f"s{l}"): xs[l - 1] for l in range(1, i + 1)}
            substitution.update({sympy.Symbol(f"t{l}"): q[l - 1] for l in range(1, i + 1)})
            sums[i] = sympy.expand(sums[i] + polys[i - 1].xreplace(substitution))
        q = [sympy.expand(j * xs[i] + sums[i]) for i in range(spec.m)]
        table[j] = list(q)
    return xs, table


def coefficient_mass(expr, xs) -> Fraction:
    """Sum of absolute values of the coefficients"""
    poly = sympy.Poly(expr, *xs)
    return sum((abs(Fraction(int(c.p), int(c.q))) for c in map(sympy.Rational, poly.coeffs())), Fraction(0))


@pytest.mark.parametrize("spec_id,n_max", [("heisenberg", 50), ("filiform", 12)])
def test_coefficient_bound_dominates_symbolic_powers(spec_id, n_max):
    spec = get_spec(spec_id)
    xs, table = symbolic_powers(spec, n_max)
    point = element(["1/2", -2, 3, "1/3"][: spec.m])
    for n, q in table.items():
        bound = coeff_bound(spec, n)
        for expr in q:
            assert coefficient_mass(expr, xs) <= bound
            assert sympy.Poly(expr, *xs).total_degree() <= power_degree_bound(spec)
        values = {sym: sympy.Rational(v.numerator, v.denominator) for sym, v in zip(xs, point)}
        evaluated = tuple(Fraction(int(e.p), int(e.q)) for e in (sympy.Rational(expr.xreplace(values)) for expr in q))
        assert evaluated == power_closed(spec, point, n)


def test_coeff_bound_values():
    assert coeff_bound(abelian(3), 17) == 17
    assert coeff_bound(heisenberg(), 5) == 5 ** 4
    assert bound_degree(heisenberg()) == 4
    for spec_id in SPEC_IDS:
        assert coeff_bound(get_spec(spec_id), 1) >= 1


def test_product_spec():
    spec = product_spec(heisenberg(), abelian(1))
    assert spec.m == 4
    assert spec.k == 2
    left = element([1, 0, 0, "1/2"])
    right = element([0, 1, 0, "1/2"])
    assert multiply(spec, left, right) == element([1, 1, 1, 1])

    flat = product_spec(abelian(2), abelian(3))
    assert flat.m == 5 and flat.k == 1
    assert all(p.is_zero() for p in flat.structure_polys)


def test_product_factorizes_blockwise():
    rng = random.Random(11)
    first, second = heisenberg(), filiform()
    spec = product_spec(first, second)
    assert spec.k == 3
    for _ in range(200):
        a, b = random_element(rng, spec.m), random_element(rng, spec.m)
        expected = multiply(first, a[:3], b[:3]) + multiply(second, a[3:], b[3:])
        assert multiply(spec, a, b) == expected


def test_matrix_oracles():
    for spec in (heisenberg(), filiform()):
        assert agrees_with_matrix_oracle(spec, samples=50, seed=3)
    x, y = element([1, 2, 3, 4]), element(["1/2", -1, 0, 2])
    product = matrix_oracle("filiform", x).dot(matrix_oracle("filiform", y))
    assert matrix_coordinates("filiform", product) == multiply(filiform(), x, y)


def test_polynomial_text_round_trip():
    variables = structure_variables(3)
    poly = Polynomial.parse("1:s1*t3 1/2:s1^2*t2 -1/2:s1*t2", variables)
    assert Polynomial.parse(poly.to_text(), variables) == poly
    assert poly.degree() == 3
    assert poly.evaluate(element([2, 0, 0, 0, 5, 7])) == 2 * 7 + 2 * 5 - 5
    assert Polynomial.zero(variables).to_text() == "0"
    with pytest.raises(SpecParseError):
        Polynomial.parse("1:s4*t1", variables)


def test_spec_text_round_trip(tmp_path):
    text = spec_to_text(filiform())
    assert text == "4 3\n0\n1:s1*t2\n1:s1*t3 -1/2:s1*t2 1/2:s1^2*t2\n"
    parsed = parse_spec_text(text, name="filiform", allow_degree_k=True)
    assert spec_to_text(parsed) == text
    assert parsed.structure_polys == filiform().structure_polys

    path = tmp_path / "heis.spec"
    path.write_text("# Heisenberg\n3 2\n0\n1:s1*t2\n")
    loaded = load_spec(str(path), allow_degree_k=True)
    assert loaded.m == 3
    assert multiply(loaded, element([1, 0, 0]), element([0, 1, 0])) == element([1, 1, 1])


def test_load_spec_errors(tmp_path):
    with pytest.raises(SpecParseError, match="registered: abelian:<d>, filiform, heisenberg"):
        load_spec(str(tmp_path / "missing.spec"))
    with pytest.raises(SpecParseError, match="registered: abelian:<d>, filiform, heisenberg"):
        get_spec("nosuch")
    path = tmp_path / "bad.spec"
    path.write_text("3\n0\n")
    with pytest.raises(SpecParseError):
        load_spec(str(path))
    with pytest.raises(SpecParseError):
        get_spec("abelian:x")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
