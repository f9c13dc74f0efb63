#!/usr/bin/env python3
"""
Tests for fundamental-domain reduction, the torus metric and orbit clustering
"""

import cmath
import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from errors import EmptyOrbit, SetsNotDisjoint
from malcev_core import abelian, element, filiform, get_spec, heisenberg, multiply, power_iter, product_spec
from orbit_metric import (
    FunctionDescriptor,
    OrbitTable,
    cluster_components,
    fit_growth_constant,
    is_eps_separable,
    is_nilrotation_separated,
    min_pair_distance,
    nilsequence_eval,
    nilsequence_phase,
    orbit,
    partition_exponent,
    recurrence_gap,
    reduce,
    torus_distance,
    z_growth_exponents,
    z_growth_profile,
    z_vector,
)

SPEC_IDS = ["abelian:2", "heisenberg", "filiform"]

unit = st.fractions(min_value=0, max_value=Fraction(49, 50), max_denominator=50)


def in_unit_cube(point) -> bool:
    return all(0 <= c < 1 for c in point)


def random_point(rng: random.Random, m: int, scale: int = 5):
    return tuple(Fraction(rng.randint(-scale * 12, scale * 12), rng.randint(1, 12)) for _ in range(m))


def test_z_vector_examples():
    spec = heisenberg()
    x = element(["3/2", "3/10", "-1/5"])
    assert z_vector(spec, x) == (-1, 0, 1)
    assert reduce(spec, x) == element(["1/2", "3/10", "4/5"])

    # exhaustive oracle over a small box of lattice points
    hits = [
        z for z in itertools.product(range(-3, 4), repeat=3)
        if in_unit_cube(multiply(spec, x, tuple(Fraction(v) for v in z)))
    ]
    assert hits == [(-1, 0, 1)]

    assert z_vector(spec, element(["1/2", 0, "9/10"])) == (0, 0, 0)
    assert z_vector(abelian(1), element(["-1/4"])) == (1,)
    assert reduce(abelian(1), element(["-1/4"])) == element(["3/4"])


def test_reduce_fixes_fundamental_domain():
    spec = filiform()
    assert reduce(spec, spec.identity()) == spec.identity()
    p = element(["1/3", "0", "5/6", "1/2"])
    assert reduce(spec, p) == p


def test_reduce_lands_in_unit_cube():
    """10^4 random points per registered spec"""
    rng = random.Random(5)
    for spec_id in SPEC_IDS:
        spec = get_spec(spec_id)
        for _ in range(10_000):
            assert in_unit_cube(reduce(spec, random_point(rng, spec.m)))


def test_z_vector_is_unique_in_neighbourhood():
    rng = random.Random(6)
    for spec_id in SPEC_IDS:
        spec = get_spec(spec_id)
        offsets = [o for o in itertools.product((-1, 0, 1), repeat=spec.m) if any(o)]
        for _ in range(1500):
            x = random_point(rng, spec.m)
            z = z_vector(spec, x)
            for offset in offsets:
                other = tuple(Fraction(a + b) for a, b in zip(z, offset))
                assert not in_unit_cube(multiply(spec, x, other))


def test_z_growth_exponents():
    assert z_growth_exponents(abelian(1)) == (1, 1)
    assert z_growth_exponents(heisenberg()) == (4, 16)
    assert z_growth_exponents(filiform())[0] == 27
    assert partition_exponent(heisenberg()) == 2 * 16 * 9


def test_z_growth_fits_polynomial_envelope():
    spec = heisenberg()
    g = element(["7/5", "-3/4", "1/3"])
    _, c2 = z_growth_exponents(spec)
    constant = fit_growth_constant(z_growth_profile(spec, g, range(1, 65)))
    assert constant > 0
    late = z_growth_profile(spec, g, [128, 333, 1000, 2048, 4096])
    for n, peak in zip(late["n"], late["max_abs_z"]):
        assert peak <= constant * n ** c2


def test_torus_distance_examples():
    assert torus_distance(element(["9/10"]), element(["1/10"])) == Fraction(1, 5)
    p = element(["1/3", "2/7"])
    assert torus_distance(p, p) == 0
    assert torus_distance(element(["1/4", 0]), element(["3/4", "2/5"])) == Fraction(1, 2)


def test_metric_axioms_seeded():
    rng = random.Random(8)
    for _ in range(10_000):
        p, q, r = (tuple(Fraction(rng.randrange(60), 60) for _ in range(3)) for _ in range(3))
        d_pq = torus_distance(p, q)
        assert d_pq == torus_distance(q, p)
        assert 0 <= d_pq <= Fraction(1, 2)
        assert (d_pq == 0) == (p == q)
        assert torus_distance(p, r) <= d_pq + torus_distance(q, r)


@settings(max_examples=200, deadline=None)
@given(st.tuples(unit, unit), st.tuples(unit, unit), st.tuples(unit, unit))
def test_metric_triangle_inequality(p, q, r):
    assert torus_distance(p, r) <= torus_distance(p, q) + torus_distance(q, r)


def test_orbit_examples():
    table = orbit(abelian(1), element(["1/3"]), [1, 2, 3])
    assert table.points == (element(["1/3"]), element(["2/3"]), element([0]))

    spec = heisenberg()
    table = orbit(spec, element(["1/2", "1/2", 0]), [1, 2])
    assert table.points == (element(["1/2", "1/2", 0]), element([0, 0, "1/4"]))

    assert orbit(spec, element(["5/7", 3, "1/9"]), [0]).points == (spec.identity(),)


def test_orbit_matches_direct_powers():
    rng = random.Random(9)
    for spec_id in ("heisenberg", "filiform"):
        spec = get_spec(spec_id)
        for _ in range(10):
            g = random_point(rng, spec.m, scale=2)
            base = tuple(Fraction(rng.randrange(10), 10) for _ in range(spec.m))
            exponents = [1, 2, 5, 9, 16, 30]
            table = orbit(spec, g, exponents, base)
            for a, point in zip(exponents, table.points):
                assert point == reduce(spec, multiply(spec, power_iter(spec, g, a), base))


def test_orbit_table_frame():
    table = orbit(heisenberg(), element(["1/2", "1/2", 0]), [1, 2])
    frame = table.to_frame()
    assert list(frame.columns) == ["exponent", "coord_1", "coord_2", "coord_3"]
    assert frame.iloc[1].tolist() == [2, "0", "0", "1/4"]
    assert table.to_dict()["generator"] == ["1/2", "1/2", "0"]


def test_min_pair_distance_examples():
    spec = abelian(1)
    zero = OrbitTable("abelian:1", element([0]), element([0]), (0,), (element([0]),))
    half = OrbitTable("abelian:1", element([0]), element([0]), (1,), (element(["1/2"]),))
    assert min_pair_distance(zero, half) == Fraction(1, 2)
    assert min_pair_distance(zero, zero) == 0

    g = element(["1/2"])
    assert min_pair_distance(orbit(spec, g, [2, 4]), orbit(spec, g, [1, 3])) == Fraction(1, 2)
    with pytest.raises(EmptyOrbit):
        min_pair_distance(orbit(spec, g, []), half)


def test_is_eps_separable_examples():
    spec = abelian(1)
    g = element(["1/2"])
    A = [2 ** n for n in range(1, 9)]
    B = [2 ** n + 1 for n in range(1, 9)]
    assert is_eps_separable(spec, g, A, B, Fraction(1, 2))
    assert not is_eps_separable(spec, g, A, B, Fraction(3, 5))
    with pytest.raises(SetsNotDisjoint):
        is_eps_separable(spec, g, A, A, Fraction(1, 4))
    assert is_eps_separable(spec, element(["1/7"]), [1, 3], [2, 4], Fraction(0))
    assert is_eps_separable(spec, g, [], B, Fraction(1, 2))


def test_cluster_components_examples():
    table = OrbitTable(
        "abelian:1", element([0]), element([0]), (1, 2, 3),
        (element([0]), element(["2/5"]), element(["9/20"])),
    )
    assert cluster_components(table, Fraction(1, 10)) == ((1,), (2, 3))
    assert cluster_components(table, Fraction(3, 5)) == ((1, 2, 3),)

    halves = orbit(abelian(1), element(["1/2"]), [1, 2, 3, 4])
    assert cluster_components(halves, Fraction(1, 4)) == ((1, 3), (2, 4))


def test_clusters_characterize_separable_subsets():
    """A is eps-separable from R minus A iff A is a union of clusters"""
    spec = heisenberg()
    R = [n * n for n in range(1, 9)]
    eps = Fraction(1, 4)
    for g in (element(["1/3", "2/5", 0]), element(["-7/10", "1/2", "1/4"])):
        blocks = cluster_components(orbit(spec, g, R), eps)
        unions = set()
        for mask in range(1 << len(blocks)):
            unions.add(frozenset(a for i, b in enumerate(blocks) if mask >> i & 1 for a in b))
        for mask in range(1 << len(R)):
            A = [r for i, r in enumerate(R) if mask >> i & 1]
            B = [r for i, r in enumerate(R) if not mask >> i & 1]
            assert is_eps_separable(spec, g, A, B, eps) == (frozenset(A) in unions)


def test_recurrence_gap_examples():
    spec = abelian(1)
    assert recurrence_gap(spec, element(["1/3"]), [3, 6, 9]) == 0
    assert recurrence_gap(spec, element(["1/2"]), list(range(1, 100, 2))) == Fraction(1, 2)
    assert recurrence_gap(spec, element(["2/5"]), [5 * k for k in range(1, 20)]) == 0
    assert recurrence_gap(heisenberg(), element(["1/2", "1/3", 0]), [6, 12]) == 0


def test_nilsequence_eval():
    spec = abelian(1)
    F = FunctionDescriptor((1,))
    for n in range(1, 10):
        value = nilsequence_eval(spec, element(["1/3"]), None, F, n)
        assert abs(value - cmath.exp(2j * cmath.pi * n / 3)) < 1e-12
    assert nilsequence_eval(spec, element(["2/9"]), None, FunctionDescriptor((0,)), 4) == 1

    heis = heisenberg()
    a, b = Fraction(1), Fraction(2, 7)
    F3 = FunctionDescriptor((0, 0, 1))
    for n in range(1, 30):
        expected = (Fraction(n * (n - 1), 2) * a * b) % 1
        assert nilsequence_phase(heis, (a, b, Fraction(0)), None, F3, n) == expected


def test_product_separation():
    """Separation in each factor gives separation from the union in the product"""
    first, second = abelian(1), abelian(1)
    A, B, C = [6, 12], [3, 9], [2, 4]
    g1, g2 = element(["1/2"]), element(["1/3"])
    gap_b = min_pair_distance(orbit(first, g1, A), orbit(first, g1, B))
    gap_c = min_pair_distance(orbit(second, g2, A), orbit(second, g2, C))
    assert (gap_b, gap_c) == (Fraction(1, 2), Fraction(1, 3))
    assert is_eps_separable(first, g1, A, B, gap_b)
    assert is_eps_separable(second, g2, A, C, gap_c)

    spec = product_spec(first, second)
    g = g1 + g2
    gap = min_pair_distance(orbit(spec, g, A), orbit(spec, g, sorted(B + C)))
    assert gap == min(gap_b, gap_c)
    assert is_eps_separable(spec, g, A, sorted(B + C), min(gap_b, gap_c))


def test_product_separation_nonabelian():
    spec = product_spec(heisenberg(), abelian(1))
    g1, g2 = element(["1/2", "1/3", 0]), element(["1/5"])
    A, B, C = [12, 24], [3, 9], [5, 10]
    gap_b = min_pair_distance(orbit(heisenberg(), g1, A), orbit(heisenberg(), g1, B))
    gap_c = min_pair_distance(orbit(abelian(1), g2, A), orbit(abelian(1), g2, C))
    assert gap_b > 0 and gap_c > 0
    gap = min_pair_distance(orbit(spec, g1 + g2, A), orbit(spec, g1 + g2, sorted(B + C)))
    assert gap >= min(gap_b, gap_c)


def test_is_nilrotation_separated():
    report = is_nilrotation_separated(abelian(1), element(["1/2"]), [2, 4, 6], [1, 3])
    assert report.gap == Fraction(1, 2)
    assert report.truncation == 3
    assert report.exact is False
    assert report.to_dict()["gap"] == "1/2"
    assert is_nilrotation_separated(abelian(1), element(["1/2"]), [], [1]).to_dict()["gap"] == "inf"


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
