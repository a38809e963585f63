"""Level symbols: parsing, evaluation, compression, the trace calculus."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from gfock import symbols
from gfock.errors import PolynomialParseError


def rand_symbol(model, level, nmat, rng):
    n = model.dim_at(level)
    a = rng.standard_normal((n, n, nmat, nmat)) + 1j * rng.standard_normal(
        (n, n, nmat, nmat)
    )
    return symbols.Symbol(model, level, a)


def test_parse_symbol_literals(cp1):
    s = symbols.parse_symbol(cp1, "identity 3")
    assert s.nmat == 3 and s.level == 0
    f = symbols.parse_symbol(cp1, "fs_line_bundle 2")
    assert f.level == 2 and f.nmat == cp1.dim_at(2)


def test_parse_symbol_polynomial(cp1):
    s = symbols.parse_symbol(cp1, "z1*conj(z1)")
    assert s.level == 1 and s.nmat == 1
    t = symbols.parse_symbol(cp1, "0.5*z1*conj(z2) + 0.5*z2*conj(z1)")
    assert t.level == 1
    pts = cp1.sample_boundary(10, seed=1)
    vals = symbols.evaluate(t, pts)
    want = (pts[:, 0] * pts[:, 1].conj()).real
    assert np.abs(vals.reshape(-1) - want).max() < 1e-12


def test_parse_symbol_rejects_unbalanced(cp1):
    for text in ("z1", "z1*z2*conj(z1)", "z1 + conj(z1)*z1*z2", "z1*conj(z1"):
        with pytest.raises(PolynomialParseError):
            symbols.parse_symbol(cp1, text)


def test_unitality_exact(all_presets):
    for model in all_presets.values():
        for m in range(5):
            t = symbols.toeplitz(symbols.identity_symbol(model), m)
            assert np.abs(t - np.eye(model.dim_at(m))).max() < 1e-13


def test_level_one_compression_of_z1_density(cp1):
    # T(|z1|^2)[b,a] = n_m * moment against the level basis: on level 1 of
    # the full ring in two variables this is diag(2/3, 1/3)
    t = symbols.toeplitz(symbols.parse_symbol(cp1, "z1*conj(z1)"), 1)
    want = np.diag([2 / 3, 1 / 3])
    assert np.abs(t - want).max() < 1e-12
    # same numbers from the sphere-moment oracle
    n1 = cp1.dim_at(1)
    m11 = float(oracles.sphere_moment(2, (2, 0)))
    m22 = float(oracles.sphere_moment(2, (1, 1)))
    assert abs(n1 * m11 - 2 / 3) < 1e-15 and abs(n1 * m22 - 1 / 3) < 1e-15


def test_haar_state_matches_sphere_moments(cp1, cp2):
    f = symbols.parse_symbol(cp1, "z1*conj(z1)")
    assert abs(np.trace(symbols.haar_state(f)) - 0.5) < 1e-14
    g = symbols.parse_symbol(cp2, "z1*conj(z1)")
    assert abs(np.trace(symbols.haar_state(g)) - 1 / 3) < 1e-14
    # quadratic density: omega(|z1|^4) = 2! / (n+1)! * n!... via oracle
    h = symbols.parse_symbol(cp1, "z1^2*conj(z1)^2")
    want = float(oracles.sphere_moment(2, (2, 0)))
    assert abs(np.trace(symbols.haar_state(h)) - want) < 1e-14


def test_covariant_symbol_of_projection_sums_to_one(segre):
    pts = segre.sample_boundary(15, seed=2)
    for m in (1, 3):
        sym = symbols.covariant_symbol(segre, np.eye(segre.dim_at(m)), m)
        vals = symbols.evaluate(sym, pts)
        assert np.abs(vals.reshape(-1) - 1.0).max() < 1e-12


def test_adjointness_pairing(all_presets):
    for tag, model in all_presets.items():
        # the level splitting at m+1 grows fast on P^3; 3 levels suffice there
        hi = 3 if tag == "cp3" else 4
        rep = symbols.calculus_report(model, hi, pairs=24, seed=5)
        assert rep.passed, rep.fit


def test_mul_evaluates_to_pointwise_product(cp2):
    rng = np.random.default_rng(7)
    pts = cp2.sample_boundary(6, seed=3)
    s = rand_symbol(cp2, 1, 2, rng)
    t = rand_symbol(cp2, 2, 2, rng)
    prod = symbols.mul(s, t)
    assert prod.level == 3
    vs, vt = symbols.evaluate(s, pts), symbols.evaluate(t, pts)
    vp = symbols.evaluate(prod, pts)
    assert max(
        np.abs(a @ b - c).max() for a, b, c in zip(vs, vt, vp)
    ) < 1e-10


def test_promote_preserves_values(veronese):
    rng = np.random.default_rng(11)
    pts = veronese.sample_boundary(8, seed=4)
    s = rand_symbol(veronese, 1, 1, rng)
    up = symbols.promote(s, 4)
    a = symbols.evaluate(s, pts).reshape(-1)
    b = symbols.evaluate(up, pts).reshape(-1)
    assert np.abs(a - b).max() < 1e-10


def test_align_levels(cp1):
    rng = np.random.default_rng(13)
    s = rand_symbol(cp1, 1, 1, rng)
    t = rand_symbol(cp1, 3, 1, rng)
    s2, t2 = symbols.align(s, t)
    assert s2.level == t2.level == 3


def test_direct_sum_blocks(cp1):
    rng = np.random.default_rng(17)
    pts = cp1.sample_boundary(5, seed=6)
    s = rand_symbol(cp1, 1, 1, rng)
    t = rand_symbol(cp1, 1, 2, rng)
    d = symbols.direct_sum(s, t)
    assert d.nmat == 3
    vals = symbols.evaluate(d, pts)
    vs = symbols.evaluate(s, pts).reshape(-1)
    vt = symbols.evaluate(t, pts)
    assert np.abs(vals[:, 0, 0] - vs).max() < 1e-12
    assert np.abs(vals[:, 1:, 1:] - vt).max() < 1e-12
    assert np.abs(vals[:, 0, 1:]).max() < 1e-12


def test_flatten_round_trip():
    rng = np.random.default_rng(19)
    a = rng.standard_normal((4, 4, 2, 2))
    mat = symbols.flatten_block(a)
    assert mat.shape == (8, 8)
    back = symbols.unflatten_block(mat, 4, 2)
    assert np.abs(back - a).max() == 0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 3), st.integers(1, 3))
def test_toeplitz_hermitian_for_hermitian_symbol(m, nmat):
    from gfock import space

    model = space.from_preset("cp1")
    rng = np.random.default_rng(100 + m)
    s = rand_symbol(model, 1, nmat, rng)
    herm = symbols.Symbol(model, 1, (s.a + s.a.conj().transpose(1, 0, 3, 2)) / 2)
    t = symbols.toeplitz(herm, m)
    assert np.abs(t - t.conj().T).max() < 1e-12


def test_berezin_transform_fixes_constants(cp2):
    one = symbols.identity_symbol(cp2, nmat=1)
    b = symbols.berezin_transform(one, 2)
    pts = cp2.sample_boundary(10, seed=8)
    vals = symbols.evaluate(b, pts).reshape(-1)
    assert np.abs(vals - 1.0).max() < 1e-12


def test_fs_symbol_values_are_projections(cp2):
    pts = cp2.sample_boundary(6, seed=9)
    vals = symbols.evaluate(symbols.fs_symbol(cp2, 1), pts)
    for v in vals:
        assert np.abs(v @ v - v).max() < 1e-12
        assert abs(np.trace(v) - 1.0) < 1e-12
