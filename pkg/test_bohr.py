#!/usr/bin/env python3
"""
Tests for torus-rotation separation, witnesses and I0 partitions
"""

from fractions import Fraction

import pytest

from bohr import (
    I0Partition,
    NotFound,
    SeparationCertificate,
    TorusRotation,
    constant_shift_witness,
    find_separating_rotation,
    i0_partition,
    nonrecurrence_witness,
    rotation_gap,
    separation_curve,
    square_lift,
    sum_with_finite,
    verify_i0_partition,
)
from errors import HypothesisViolated, NilError, SetsNotDisjoint, TooShort, WitnessInvalid
from integer_sets import IntegerSet

HALF = Fraction(1, 2)


def lacunary_pairs(N: int):
    """(2^n, 2^n + 2n - 1) for n = 1..N"""
    return [(2 ** n, 2 ** n + 2 * n - 1) for n in range(1, N + 1)]


def test_rotation_normalizes_and_flags():
    assert TorusRotation.coerce("3/2").alpha == (HALF,)
    assert TorusRotation.coerce(["1/2", "2/3"]).denominator == 6
    approx = TorusRotation.from_reals([0.5, Fraction(1, 3)])
    assert approx.alpha == (HALF, Fraction(1, 3))
    assert approx.rational == (False, True)
    assert not approx.is_rational
    assert TorusRotation.from_reals([2 ** 0.5], max_denominator=100).alpha[0].denominator <= 100


def test_rotation_gap_examples():
    for truncation in (5, 30):
        certificate = rotation_gap("1/2", IntegerSet.parse("pow2", truncation), IntegerSet.parse("pow2+1", truncation))
        assert certificate.gap == HALF
        assert certificate.exact

    both_even = rotation_gap("1/2", "pow2", "pow2+2n@3")
    assert both_even.gap == 0
    assert both_even.exact

    empty = rotation_gap("1/2", [], [1, 2])
    assert empty.gap is None
    assert empty.exact
    assert empty.to_dict()["gap"] == "inf"


def test_rotation_gap_on_plain_sets_is_truncation_scoped():
    certificate = rotation_gap("1/3", [3, 6], [1, 4])
    assert certificate.gap == Fraction(1, 3)
    assert not certificate.exact
    approx = rotation_gap(TorusRotation.from_reals([0.5]), "pow2", "pow2+1")
    assert approx.gap == HALF
    assert not approx.exact


def test_rotation_gap_is_independent_of_truncation_when_exact():
    gaps = {rotation_gap("1/3", IntegerSet.parse("pow2", n), IntegerSet.parse("pow2+1", n)).gap for n in (3, 10, 40)}
    assert len(gaps) == 1


def test_rotation_gap_rejects_shared_elements():
    with pytest.raises(SetsNotDisjoint) as info:
        rotation_gap("1/2", "pow2", "pow2+2n", truncation=5)
    assert 4 in info.value.common


def test_find_separating_rotation_examples():
    A = [2 ** n for n in range(1, 11)]
    B = [2 ** n + 1 for n in range(1, 11)]
    found = find_separating_rotation(A, B)
    assert isinstance(found, SeparationCertificate)
    assert found.rotation.alpha == (HALF,)
    assert found.gap == HALF
    assert not found.exact

    exact = find_separating_rotation("pow2", "pow2+1", d_max=2)
    assert exact.rotation.alpha == (HALF,)
    assert exact.exact

    parity = find_separating_rotation(IntegerSet.parse("even", 20), IntegerSet.parse("odd", 20))
    assert parity.rotation.alpha == (HALF,)
    assert parity.gap == HALF


def test_lacunary_set_and_its_growing_shift_are_not_separated():
    result = find_separating_rotation(
        IntegerSet.parse("pow2", 20), IntegerSet.parse("pow2+2n@3", 20), d_max=2, denominator_budget=64
    )
    assert isinstance(result, NotFound)
    assert result.best.gap < Fraction(1, 16)
    assert result.best.exact
    assert result.to_dict()["status"] == "not_found"


def test_find_separating_rotation_reports_shared_elements():
    result = find_separating_rotation("pow2", "pow2+2n", truncation=6)
    assert isinstance(result, NotFound)
    assert "share" in result.reason


def test_search_is_schedule_independent():
    kwargs = dict(d_max=2, denominator_budget=12, random_budget=20, seed=5)
    serial = find_separating_rotation("pow2", "pow2+3", **kwargs)
    parallel = find_separating_rotation("pow2", "pow2+3", threads=2, **kwargs)
    assert serial.to_dict() == parallel.to_dict()
    again = find_separating_rotation("pow2", "pow2+3", **kwargs)
    assert again.to_dict() == serial.to_dict()


def test_separation_curve_never_increases():
    curve = separation_curve("pow2", "pow2+2n@3", [4, 8, 12, 16], denominator_budget=32)
    gaps = [Fraction(g) for g in curve["best_gap"]]
    assert all(b <= a for a, b in zip(gaps, gaps[1:]))
    assert not curve["exact"].any()


def test_nonrecurrence_witness_examples():
    odd = nonrecurrence_witness("odd")
    assert odd.rotation.alpha == (HALF,)
    assert odd.gap == HALF
    assert odd.kind == "nonrecurrence"

    assert isinstance(nonrecurrence_witness("even"), NotFound)

    shifted = nonrecurrence_witness("2n-1")
    assert shifted.rotation.alpha == (HALF,)
    assert shifted.gap == HALF


def test_constant_shift_witness():
    for c in range(1, 21):
        witness = constant_shift_witness(c)
        assert witness.rotation.alpha == (Fraction(1, 2 * c),)
        assert witness.rotation.norm(c) == HALF
        assert witness.gap == HALF
    with pytest.raises(NilError):
        constant_shift_witness(0)


def test_i0_partition_of_lacunary_union():
    partition = i0_partition(lacunary_pairs(15), "1/2", "1/2")
    assert partition.ell == 4
    assert len(partition.pieces) == 8
    nonempty = {label: piece for label, piece in zip(partition.labels, partition.pieces) if len(piece)}
    assert set(nonempty) == {"F1", "F'1"}
    assert all(e % 2 == 0 for e in nonempty["F1"])
    assert all(e % 2 == 1 for e in nonempty["F'1"])

    report = verify_i0_partition(partition)
    assert report.passed
    assert report.checks == {"disjoint_cover": True, "pairs_split": True, "lacunary": True, "partner_gap": True}
    assert verify_i0_partition(partition, truncation=6).passed


def test_i0_partition_small_cases():
    single = i0_partition([(4, 5)], "1/2", "1/2")
    assert 4 in single.pieces[0]
    assert 5 in single.pieces[single.ell]

    empty = i0_partition([], "1/2", "1/2")
    assert all(len(piece) == 0 for piece in empty.pieces)
    assert verify_i0_partition(empty).passed

    with pytest.raises(WitnessInvalid):
        i0_partition([(2, 4)], "1/2", "1/2")


def hand_built(pairs, F1, F1_prime):
    empty = IntegerSet.of([])
    pieces = (IntegerSet.of(F1),) + (empty,) * 3 + (IntegerSet.of(F1_prime),) + (empty,) * 3
    return I0Partition(tuple(pairs), TorusRotation.coerce("1/2"), HALF, 4, pieces)


def test_verify_i0_partition_flags_failures():
    joined = verify_i0_partition(hand_built([(1, 2)], [1, 2], []))
    assert not joined.passed
    assert not joined.checks["pairs_split"]

    crowded = verify_i0_partition(hand_built([(100, 101), (102, 103), (104, 105)], [100, 102, 104], [101, 103, 105]))
    assert crowded.checks["pairs_split"]
    assert not crowded.checks["lacunary"]

    uncovered = verify_i0_partition(hand_built([(2, 3), (4, 5)], [2], [3]))
    assert not uncovered.checks["disjoint_cover"]


def test_square_lift_ratio_chain():
    lift = square_lift(lacunary_pairs(15))
    assert lift.chain_holds
    assert lift.shifts_lacunary
    assert lift.t_increasing
    assert lift.pairs[0] == (4, 9)
    assert lift.shifts[0] == 2 * 2 * 1 + 1
    assert all(row["holds"] for row in lift.chain)

    constant = square_lift([(2 ** n, 2 ** n + 1) for n in range(1, 16)])
    assert constant.shifts_lacunary
    assert not constant.t_increasing


def test_square_lift_hypotheses():
    with pytest.raises(HypothesisViolated):
        square_lift([(n * n, n * n + 1) for n in range(1, 16)])
    with pytest.raises(TooShort):
        square_lift([(2, 3)])


def test_sum_with_finite():
    E = IntegerSet.parse("pow2", 12)
    report = sum_with_finite(E, [0, 1])
    assert report.all_certified
    row = report.rows[0]
    assert row["witness"]["alpha"] == ["1/2"]
    assert row["direct"]["status"] == "certified"
    assert row["direct"]["gap"] == "1/2"

    assert sum_with_finite(E, [5]).all_certified
    assert sum_with_finite(E, [5]).rows == []

    four = sum_with_finite(E, [0, 1, 2, 3])
    assert len(four.rows) == 6
    assert four.all_certified


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
