"""Graded quotients: bases, projections, transfer maps, coinvariance."""

import numpy as np
import pytest

import oracles
from gfock import quotient, space, symbols
from gfock.errors import NonHomogeneousGenerator


def point_quotient(model):
    return quotient.from_submodule_generators(model, 1, [["z2"]])


def test_point_quotient_dims(cp1):
    q = point_quotient(cp1)
    assert [q.dim(m) for m in range(6)] == [1] * 6
    for m in range(6):
        assert oracles.quotient_dim(2, [{(0, 1): 1}], m) == 1


def test_point_quotient_dims_stay_one_at_high_level(cp1):
    # the submodule columns span factorial ranges in norm; the rank cut
    # must not lose columns to scaling (large-m regression)
    q = point_quotient(cp1)
    for m in (60, 120):
        assert q.dim(m) == 1


def test_principal_submodule_dims_match_macaulay(cp1):
    q = quotient.from_submodule_generators(cp1, 1, [["z1*z2"]])
    want = [oracles.quotient_dim(2, [{(1, 1): 1}], m) for m in range(7)]
    assert [q.dim(m) for m in range(7)] == want == [1, 2, 2, 2, 2, 2, 2]


def test_tangent_twist_dims(cp2):
    gens = [["z1", "z2", "z3"]]
    q = quotient.from_submodule_generators(cp2, 3, gens)
    dims = [q.dim(m) for m in range(5)]
    assert dims == [3, 8, 15, 24, 35]
    # 3 n_m - n_{m-1}: the one generator sweeps a copy of GH_{m-1}
    for m in range(1, 5):
        assert dims[m] == 3 * cp2.dim_at(m) - cp2.dim_at(m - 1)


def test_toeplitz_range_line_bundle_dims(cp1, veronese):
    q = quotient.from_toeplitz_range(symbols.fs_symbol(cp1, 1))
    assert [q.dim(m) for m in range(6)] == [cp1.dim_at(m + 1) for m in range(6)]
    qv = quotient.from_toeplitz_range(symbols.fs_symbol(veronese, 1))
    assert [qv.dim(m) for m in range(5)] == [3, 5, 7, 9, 11]


def test_projection_idempotent_hermitian(cp2):
    gens = [["z1", "z2", "z3"]]
    q = quotient.from_submodule_generators(cp2, 3, gens)
    for m in (0, 2, 4):
        p = q.projection(m)
        assert np.abs(p - p.conj().T).max() < 1e-13
        assert np.abs(p @ p - p).max() < 1e-12
        assert abs(np.trace(p).real - q.dim(m)) < 1e-10


def test_trivial_quotient_is_identity(segre):
    q = quotient.trivial_quotient(segre)
    for m in (0, 1, 3):
        assert np.abs(q.projection(m) - np.eye(segre.dim_at(m))).max() == 0


def test_coinvariance_certificates(cp1, cp2):
    specs = [
        quotient.from_toeplitz_range(symbols.fs_symbol(cp1, 1)),
        quotient.from_toeplitz_range(symbols.fs_symbol(cp2, 2)),
        quotient.from_submodule_generators(cp2, 3, [["z1", "z2", "z3"]]),
        point_quotient(cp1),
    ]
    for q in specs:
        rep = quotient.coinvariance_certificate(q, 5)
        assert rep.passed, rep.fit


def test_iota_preserves_identity_and_traces(cp1):
    q = quotient.from_toeplitz_range(symbols.fs_symbol(cp1, 1))
    m, l = 2, 4
    up = quotient.iota(q, np.eye(q.dim(m)), m, l)
    assert np.abs(up - np.eye(q.dim(l))).max() < 1e-10


def test_jmath_intertwines_normalized_traces(cp1):
    q = quotient.from_toeplitz_range(symbols.fs_symbol(cp1, 1))
    rng = np.random.default_rng(3)
    m, l = 2, 5
    b = rng.standard_normal((q.dim(l), q.dim(l)))
    b = b + b.T
    down = quotient.jmath(q, b, l, m)
    tr_l = quotient.normalized_trace(q, b, l)
    tr_m = quotient.normalized_trace(q, down, m)
    assert abs(tr_l - tr_m) < 1e-12


def test_jmath_identity_and_level_guard(cp1):
    q = point_quotient(cp1)
    b = np.array([[2.0]])
    assert np.abs(quotient.jmath(q, b, 3, 3) - b).max() == 0
    with pytest.raises(ValueError):
        quotient.jmath(q, b, 2, 3)


def test_compressed_shift_row_identity(cp1, cp2):
    for q in (
        quotient.from_toeplitz_range(symbols.fs_symbol(cp1, 1)),
        quotient.from_submodule_generators(cp2, 3, [["z1", "z2", "z3"]]),
    ):
        for m in (1, 3):
            assert quotient.row_identity_residual(q, m) < 1e-10


def test_quotient_defect_trace(cp1):
    q = quotient.from_toeplitz_range(symbols.fs_symbol(cp1, 2))
    for p in (1, 2, 3):
        for m in (1, 2):
            got = np.trace(quotient.quotient_defect(q, p, m)).real
            want = quotient.quotient_defect_trace_expected(q, p, m)
            assert abs(got - want) < 1e-8


def test_essential_normality_decay(cp1):
    q = quotient.from_toeplitz_range(symbols.fs_symbol(cp1, 1))
    rep = quotient.essential_normality_report(q, 10)
    assert rep.passed
    norms = [r["norm"] for r in rep.per_level]
    assert norms[-1] < norms[0]


def test_arveson_rank_integers(cp1, cp2):
    q1 = quotient.from_toeplitz_range(symbols.fs_symbol(cp1, 1))
    assert quotient.arveson_rank(q1, 8).fit["nearestInt"] == 1
    tt = quotient.from_submodule_generators(cp2, 3, [["z1", "z2", "z3"]])
    assert quotient.arveson_rank(tt, 8).fit["nearestInt"] == 2


def test_section_frames_reproduce_covariant_symbol(cp2):
    # W_p W_p^H at a point equals the covariant symbol of P_{E,m} there
    q = quotient.from_submodule_generators(cp2, 3, [["z1", "z2", "z3"]])
    pts = cp2.sample_boundary(12, seed=13)
    m = 3
    w = quotient.section_values(q, m, pts)
    sym = symbols.covariant_symbol(cp2, q.projection(m), m, q.nmat)
    vals = symbols.evaluate(sym, pts)
    frame = np.einsum("pic,pjc->pij", w, w.conj())
    assert np.abs(frame - vals).max() < 1e-10


def test_config_round_trip(cp2):
    q = quotient.from_submodule_generators(cp2, 3, [["z1", "z2", "z3"]])
    cfg = q.config()
    again = quotient.quotient_from_config(cp2, cfg)
    assert [again.dim(m) for m in range(4)] == [q.dim(m) for m in range(4)]


def test_bad_configs(cp1):
    with pytest.raises(NonHomogeneousGenerator):
        quotient.from_submodule_generators(cp1, 1, [["z1 + z2^2"]])
    with pytest.raises(ValueError):
        quotient.quotient_from_config(cp1, {"kind": "mystery"})


def test_cluster_info_reports_gap(cp1):
    q = quotient.from_toeplitz_range(symbols.fs_symbol(cp1, 1))
    q.projection(2)
    info = q.cluster_info(2)
    assert info["retained"] == q.dim(2)
    assert info["gapRatio"] > 1e3
