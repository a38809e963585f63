"""Dressed shift isometries and first-order symbol asymptotics."""

import numpy as np
import pytest

from gfock import bundles, quotient, space, symbols, szego


def line_quotient(model, k):
    return quotient.from_toeplitz_range(symbols.fs_symbol(model, k))


def test_ae_operator_is_exact_dimension_ratio(cp1, cp2):
    for model in (cp1, cp2):
        for k in (1, 2):
            q = line_quotient(model, k)
            for m in (0, 2, 4):
                a = szego.ae_operator(q, m)
                want = model.dim_at(m) / model.dim_at(m + k)
                assert np.abs(a - want * np.eye(q.dim(m))).max() < 1e-12


def test_ae_needs_metric(cp1):
    q = quotient.from_submodule_generators(cp1, 1, [["z2"]])
    with pytest.raises(ValueError):
        szego.ae_operator(q, 2)


def test_ve_isometry(cp1, cp2):
    quotients = [
        line_quotient(cp1, 1),
        line_quotient(cp1, 3),
        line_quotient(cp2, 2),
        quotient.from_toeplitz_range(bundles.tangent_twist(cp2).metric_symbol()),
    ]
    for q in quotients:
        rep = szego.ve_isometry_check(q, 8)
        assert rep.passed
        assert rep.fit["maxResidual"] < 1e-12


def test_ve_blocks_resolve_identity(cp1):
    q = line_quotient(cp1, 2)
    for m in (1, 3):
        vs = szego.ve_blocks(q, m)
        acc = sum(v.conj().T @ v for v in vs)
        assert np.abs(acc - np.eye(q.dim(m))).max() < 1e-12


def test_hidden_szego_per_level_coefficient(cp1):
    # trace ratio of the defect at level m is k/(m+1) on the nose
    pts = cp1.sample_boundary(5, seed=41)
    for k in (1, 2):
        q = line_quotient(cp1, k)
        rep = szego.hidden_szego(q, range(4, 9), pts)
        for row in rep.per_level:
            assert abs(row["meanCoeff"] - k / (row["m"] + 1)) < 1e-12
            assert row["hermDefect"] < 1e-12


def test_hidden_szego_first_order_fit(cp1):
    pts = cp1.sample_boundary(6, seed=41)
    for k in (1, 2, 3):
        q = line_quotient(cp1, k)
        rep = szego.hidden_szego(q, range(4, 13), pts)
        a1 = np.asarray(rep.fit["a1PerPoint"])
        assert np.abs(a1 / k - 1.0).max() < 0.02


def test_hidden_szego_scales_with_base_dimension(cp2):
    # on P^2 the same construction yields (n-1) k
    q = line_quotient(cp2, 2)
    pts = cp2.sample_boundary(4, seed=43)
    rep = szego.hidden_szego(q, range(4, 11), pts)
    assert abs(rep.fit["a1Mean"] / 4.0 - 1.0) < 0.02


def test_commutator_trace_is_growth_ratio(cp1, veronese):
    for model, k in ((cp1, 1), (veronese, 1)):
        q = line_quotient(model, k)
        for m in (1, 2, 5):
            val = szego.commutator_trace(q, m)
            want = q.dim(m + 1) / q.dim(m) - 1.0
            assert abs(val - want) < 1e-12
    with pytest.raises(ValueError):
        szego.commutator_trace(line_quotient(cp1, 1), 0)


def test_unitality_probe(cp1):
    q = line_quotient(cp1, 1)
    pts = cp1.sample_boundary(5, seed=47)
    rep = szego.unitality_probe(q, range(3, 9), pts)
    assert rep.passed, rep.fit


def test_defect_symbol_hermitian_and_first_order(cp1):
    q = line_quotient(cp1, 2)
    pts = cp1.sample_boundary(4, seed=53)
    vals = szego.defect_symbol_values(q, 6, pts)
    for v in vals:
        assert np.abs(v - v.conj().T).max() < 1e-12
