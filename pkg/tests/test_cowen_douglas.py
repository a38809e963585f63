"""Eigenbundle fibers, spectral projections, Abel limits, kernel sums."""

import numpy as np
import pytest

import oracles
from gfock import bundles, cowen_douglas as cd, quotient, symbols
from gfock.errors import OffVarietyPoint


def line1_quotient(model):
    return quotient.from_toeplitz_range(symbols.fs_symbol(model, 1))


def test_trivial_fiber_is_full(cp1):
    q = quotient.trivial_quotient(cp1)
    sol = cd.fiber(q, 3, [0.3, 0.4])
    assert sol.rank == 1
    assert max(sol.residuals) < 1e-9


def test_line_fiber_spans_conjugate_coherent_direction(cp1):
    q = line1_quotient(cp1)
    for v in ([0.5, 0.2], [0.3 + 0.4j, 0.25 - 0.1j]):
        sol = cd.fiber(q, 3, v)
        assert sol.rank == 1
        vec = np.asarray(v, dtype=complex)
        want = vec.conj() / np.linalg.norm(vec)
        overlap = abs(np.vdot(want, sol.basis[:, 0]))
        assert abs(overlap - 1.0) < 1e-9


def test_point_quotient_fiber_dichotomy(cp1):
    q = quotient.from_submodule_generators(cp1, 1, [["z2"]])
    on_axis = cd.fiber(q, 4, [0.5, 0.0])
    assert on_axis.rank == 1
    generic = cd.fiber(q, 4, [0.4, 0.3])
    assert generic.rank == 0


def test_fiber_rank_matches_bundle_rank(cp1, cp2):
    cases = [
        (line1_quotient(cp1), 1),
        (bundles.line(cp2, 2).quotient_realization(), 1),
        (bundles.tangent_twist(cp2).quotient_realization(), 2),
    ]
    for q, rank in cases:
        pts = q.model.sample_interior(20, seed=17)
        for v in pts:
            assert cd.fiber(q, 3, v).rank == rank


def test_fibers_decrease_with_level(cp2):
    q = bundles.tangent_twist(cp2).quotient_realization()
    v = q.model.sample_interior(1, seed=23)[0]
    a = cd.fiber(q, 2, v)
    b = cd.fiber(q, 3, v)
    # E_{m+1}(v) inside E_m(v): projection onto a-basis preserves b-basis
    pa = a.basis @ a.basis.conj().T
    assert np.abs(pa @ b.basis - b.basis).max() < 1e-8


def test_spectral_fiber_matches_metric(cp1, cp2):
    cases = [
        bundles.line(cp1, 1),
        bundles.line(cp2, 2),
        bundles.tangent_twist(cp2),
    ]
    for spec in cases:
        q = spec.quotient_realization()
        pts = spec.model.sample_boundary(6, seed=29)
        want = symbols.evaluate(spec.metric_symbol(), pts)
        want = want if want.ndim == 3 else want[:, None, None]
        for m in (2, 4):
            for x, target in zip(pts, want):
                p = cd.spectral_fiber_projection(q, m, x)
                assert np.abs(p - target).max() < 1e-8


def test_spectral_scan_constant_rank(cp2):
    q = bundles.tangent_twist(cp2).quotient_realization()
    rep = cd.spectral_scan(q, 3, cp2.sample_boundary(25, seed=31))
    assert rep.passed
    assert rep.fit["ranks"] == [2]


def test_abel_truncation_levels():
    assert cd.abel_truncation(0.99) == oracles.abel_min_levels(0.99) == 916
    assert cd.abel_truncation(0.9) == oracles.abel_min_levels(0.9) == 87


def test_abel_closed_form_matches_direct_route(cp1):
    zeta = np.array([0.6, 0.8])
    for k in (1, 2):
        spec = bundles.line(cp1, k)
        fast = cd.abel_symbol(spec, zeta, [0.5], m_trunc=40)[0]
        slow = cd._direct_symbol_values(spec.quotient_realization(), zeta, 40)
        w = 0.75 * 0.5 ** (2.0 * np.arange(41))
        assert np.abs(fast - np.einsum("m,mij->ij", w, slow)).max() < 1e-12


def test_abel_trivial_bundle_is_unit(cp1):
    q = quotient.trivial_quotient(cp1)
    vals = cd.abel_symbol(q, np.array([0.6, 0.8]), [0.9])
    assert abs(vals[0].reshape(()) - 1.0) < 1e-7


def test_abel_point_quotient_closed_form(cp1):
    # GE_m = span(z1^m): the Abel sum telescopes to a geometric series
    q = quotient.from_submodule_generators(cp1, 1, [["z2"]])
    zeta = np.array([0.6, 0.8])
    for r in (0.5, 0.9):
        val = cd.abel_symbol(q, zeta, [r])[0].reshape(())
        want = (1 - r * r) / (1 - r * r * abs(zeta[0]) ** 2)
        assert abs(val - want) < 1e-7


def test_abel_report_line_bundle(cp1):
    rep, limit = cd.abel_report(bundles.line(cp1, 1), np.array([0.6, 0.8]))
    assert rep.passed
    dists = [row["distance"] for row in rep.per_level]
    assert dists[2] < dists[1] < dists[0]
    # the limit approximates the metric value (rank-1 projection); the
    # linear model in 1-r^2 leaves a small curvature residue
    assert abs(np.trace(limit).real - 1.0) < 0.06


def test_abel_rejects_bad_radii_and_truncation(cp1):
    spec = bundles.line(cp1, 1)
    with pytest.raises(ValueError):
        cd.abel_symbol(spec, np.array([1.0, 0.0]), [1.0])
    with pytest.raises(ValueError):
        cd.abel_symbol(spec, np.array([1.0, 0.0]), [0.99], m_trunc=10)


def test_kernel_eval_geometric_value(cp1):
    z = np.array([0.5, 0.0])
    w = np.array([0.5, 0.0])
    # <w, z> = 1/4, so the full kernel is 4/3
    got = cd.kernel_eval(cp1, z, w, 60)
    assert abs(got - 4.0 / 3.0) < 1e-9


def test_kernel_eval_truncation_bound(segre):
    pts = segre.sample_interior(6, seed=37)
    m_trunc = 12
    for z, w in zip(pts[:3], pts[3:]):
        ip = complex(np.vdot(w, z))
        want = 1.0 / (1.0 - ip)
        bound = abs(ip) ** (m_trunc + 1) / (1.0 - abs(ip))
        got = cd.kernel_eval(segre, z, w, m_trunc)
        assert abs(got - want) <= bound + 1e-12


def test_fiber_guards(cp1, segre):
    q = quotient.trivial_quotient(segre)
    with pytest.raises(OffVarietyPoint):
        cd.fiber(q, 2, [0.5, 0.1, 0.1, 0.5])  # z1 z4 != z2 z3
    q1 = quotient.trivial_quotient(cp1)
    with pytest.raises(ValueError):
        cd.fiber(q1, 2, [0.9, 0.9])  # outside the ball
    with pytest.raises(ValueError):
        cd.fiber(q1, 2, [0.0, 0.0])
