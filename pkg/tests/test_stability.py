"""Containment certificates and reduced-growth comparisons."""

from fractions import Fraction

import pytest

from gfock import bundles, quotient, stability, symbols
from gfock.errors import ContainmentViolation


def test_guo_trivial_vs_point_is_strict(cp1):
    e = quotient.trivial_quotient(cp1)
    f = quotient.from_submodule_generators(cp1, 1, [["z2"]])
    rep = stability.guo_check(e, f, (2, 8))
    assert rep.passed
    assert rep.fit["certificate"] == "GUO-PASS (strict)"
    for row in rep.per_level:
        assert row["ratioExact"] == str(Fraction(1, row["m"] + 1))
    assert rep.fit["minEig"] >= -1e-9
    assert rep.fit["maxTraceError"] <= 1e-10


def test_guo_self_pair_is_equality(cp1):
    q = quotient.from_toeplitz_range(symbols.fs_symbol(cp1, 1))
    rep = stability.guo_check(q, q, (2, 6))
    assert rep.passed
    assert rep.fit["certificate"] == "GUO-PASS (equality; subbundle/direct summand)"
    assert all(row["ratio"] == 1.0 for row in rep.per_level)


def test_guo_rejects_non_contained_pair(cp1):
    e = quotient.from_submodule_generators(cp1, 1, [["z2"]])
    f = quotient.trivial_quotient(cp1)
    with pytest.raises(ContainmentViolation):
        stability.guo_check(e, f, (2, 5))


def test_guo_accepts_bundle_specs(cp1):
    rep = stability.guo_check(
        bundles.line(cp1, 1), bundles.line(cp1, 1), (2, 5)
    )
    assert rep.passed


def test_gieseker_split_sum_beats_summand(cp1):
    # reduced chi: (2m+3)/2 = m + 3/2 against m + 1
    e = bundles.direct_sum(bundles.line(cp1, 0), bundles.line(cp1, 1))
    f = bundles.line(cp1, 0)
    rep = stability.gieseker_table(e, f, (2, 8))
    assert rep.passed
    assert rep.fit["direction"] == "F<E"
    assert rep.fit["strict"]
    assert rep.fit["reducedE"] == ["3/2", "1"]
    assert rep.fit["reducedF"] == ["1", "1"]


def test_gieseker_direction_flips_with_arguments(cp2):
    tt = bundles.tangent_twist(cp2)
    l1 = bundles.line(cp2, 1)
    # reduced chi of T(-1) is (m^2+4m+3)/2, of O(1) is (m^2+5m+6)/2
    assert stability.gieseker_table(l1, tt, (2, 8)).passed
    rep = stability.gieseker_table(tt, l1, (2, 8))
    assert not rep.passed
    assert rep.fit["direction"] == "F>E"


def test_gieseker_equal_pair(cp1):
    rep = stability.gieseker_table(
        bundles.line(cp1, 2), bundles.line(cp1, 2), (2, 7)
    )
    assert rep.passed
    assert rep.fit["direction"] == "equal"
    assert not rep.fit["strict"]


def test_gieseker_infers_rank_from_quotient_growth(cp2):
    tt = bundles.tangent_twist(cp2).quotient_realization()
    l1 = bundles.line(cp2, 1).quotient_realization()
    rep = stability.gieseker_table(l1, tt, (2, 8))
    assert rep.passed
    assert Fraction(rep.fit["rankF"]) == 2 and Fraction(rep.fit["rankE"]) == 1


def test_gieseker_rank_zero_is_an_error(cp1):
    point = quotient.from_submodule_generators(cp1, 1, [["z2"]])
    with pytest.raises(ValueError):
        stability.gieseker_table(bundles.line(cp1, 1), point, (2, 8))


def test_guo_requires_matching_models(cp1, cp2):
    with pytest.raises(ValueError):
        stability.guo_check(
            quotient.trivial_quotient(cp1), quotient.trivial_quotient(cp2), (2, 4)
        )


def test_reduced_rows_are_floats(cp1):
    rep = stability.gieseker_table(
        bundles.line(cp1, 1), bundles.line(cp1, 0), (2, 8)
    )
    for row in rep.per_level:
        assert row["reducedF"] == row["m"] + 1.0
        assert row["reducedE"] == row["m"] + 2.0
