"""Eigenbundle fibers, spectral fiber projections, Abel limits, kernels.

The fiber at an interior point v is the nullspace of xi -> (1 - P_{E,m})
(p_m k_v (x) xi); the spectral fiber at a boundary point is the top
eigenvalue cluster of the pointwise covariant symbol of P_{E,m}.  Abel
sums aggregate those pointwise symbols over all levels with geometric
weights, which for line bundles on projective space reduces to closed
Fock inner products so that r close to 1 stays tractable.
"""

import math

import numpy as np

from . import bundles as bundles_mod
from . import quotient, symbols
from ._linalg import eigh_desc, fix_phases, op_norm, top_cluster
from .errors import OffVarietyPoint
from .reports import Report
from .space import monomials

FIBER_TOL = 1e-9
ABEL_TAIL_TOL = 1e-8


def _interior_point(model, v):
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.shape[0] != model.n:
        raise ValueError("point has %d coordinates, expected %d" % (v.shape[0], model.n))
    r = float(np.linalg.norm(v))
    if r == 0.0:
        raise ValueError("fiber is not defined at the origin")
    if r >= 1.0:
        raise ValueError("fiber point must lie strictly inside the ball")
    res = float(model.variety_residual(v[None, :])[0])
    if res > symbols.EVAL_TOL:
        raise OffVarietyPoint("point off the variety by %.3g" % res)
    return v


class FiberSolve:
    """Orthonormal basis of the level-m fiber E_m(v) in C^N.

    Attributes
    ----------
    v : ndarray
    m : int
    basis : ndarray, shape (N, rank)
    rank : int
    residuals : list of float
        ||(1 - P_{E,m})(p_m k_v (x) xi)|| per basis column (normalized k_v).
    """

    def __init__(self, v, m, basis, residuals):
        self.v = v
        self.m = m
        self.basis = basis
        self.residuals = residuals

    @property
    def rank(self):
        return self.basis.shape[1]


def fiber(q, m, v):
    """Solve for the fiber of the quotient's eigenbundle at interior v."""
    v = _interior_point(q.model, v)
    k = q.model.coherent_coords(m, v)[0]
    k = k / np.linalg.norm(k)
    cols = np.kron(k[:, None], np.eye(q.nmat, dtype=complex))
    resid = cols - q.projection(m) @ cols
    _, s, vh = np.linalg.svd(resid)
    s = np.concatenate([s, np.zeros(q.nmat - s.shape[0])])
    tol = FIBER_TOL * max(1.0, float(s[0]) if s.size else 1.0)
    rank = int(np.sum(s < tol))
    basis = fix_phases(vh[q.nmat - rank :].conj().T) if rank else np.zeros((q.nmat, 0))
    residuals = [float(np.linalg.norm(resid @ basis[:, j])) for j in range(rank)]
    return FiberSolve(v, m, basis, residuals)


def covariant_value(q, m, points):
    """Pointwise values of the covariant symbol of P_{E,m}; (npts, N, N)."""
    sym = symbols.covariant_symbol(q.model, q.projection(m), m, q.nmat)
    out = symbols.evaluate(sym, points)
    return out if out.ndim == 3 else out[None]


def spectral_fiber_projection(q, m, x, info=None):
    """The projection onto the top eigenvalue cluster of the symbol at x.

    Realizes the power limit of the pointwise covariant symbol of P_{E,m};
    raises NoSpectralGap when no cluster separates.  Pass a dict as
    ``info`` to receive {rank, minEig, gapRatio}.
    """
    val = covariant_value(q, m, x)[0]
    w, u = eigh_desc(val)
    count, ratio = top_cluster(w)
    p = u[:, :count] @ u[:, :count].conj().T
    if info is not None:
        info.update(rank=count, minEig=float(w[count - 1]) if count else 0.0, gapRatio=ratio)
    return p


def spectral_scan(q, m, points):
    """Spectral fiber statistics over a point grid, as a Report."""
    rows = []
    ranks = set()
    for i, x in enumerate(np.atleast_2d(np.asarray(points, dtype=complex))):
        info = {}
        spectral_fiber_projection(q, m, x, info=info)
        ranks.add(info["rank"])
        rows.append({"point": i, "m": m, "rank": info["rank"],
                     "minEig": info["minEig"], "gapRatio": info["gapRatio"]})
    return Report(
        check="spectral_scan",
        per_level=rows,
        verdict="PASS" if len(ranks) == 1 else "FAIL",
        fit={"ranks": sorted(ranks), "constantRank": len(ranks) == 1},
        meta={"model": q.model.config(), "m": m, "points": len(rows)},
    )


def abel_truncation(r, tol=ABEL_TAIL_TOL):
    """Smallest M with geometric tail (1-r^2) sum_{m>M} r^{2m} = r^{2(M+1)} <= tol."""
    return max(0, math.ceil(math.log(tol) / (2.0 * math.log(r))) - 1)


def abel_symbol(spec, zeta, r_list, m_trunc=None):
    """Abel sums (1-r^2) sum_{m<=M} r^{2m} sigma^(m)(P_{E,m})(zeta) per r.

    ``spec`` is a BundleSpec or GradedQuotient; ``zeta`` a boundary point.
    The truncation defaults to the smallest M whose geometric tail is
    below 1e-8 for the largest r; an insufficient explicit ``m_trunc``
    is an error.  Line bundles on projective space use closed Fock inner
    products, so large M (r close to 1) stays cheap; other quotients
    evaluate their projections level by level.
    """
    rs = [float(r) for r in r_list]
    if not rs or not all(0.0 < r < 1.0 for r in rs):
        raise ValueError("Abel radii must lie in (0, 1)")
    need = abel_truncation(max(rs))
    if m_trunc is None:
        m_trunc = need
    elif m_trunc < need:
        raise ValueError(
            "truncation M=%d leaves tail %.2g > %g at r=%g"
            % (m_trunc, max(rs) ** (2 * (m_trunc + 1)), ABEL_TAIL_TOL, max(rs))
        )
    if isinstance(spec, bundles_mod.BundleSpec):
        model = spec.model
        if spec.kind == "line" and not model.ideal:
            vals = _line_symbol_values(model, spec.k, zeta, m_trunc)
        else:
            vals = _direct_symbol_values(spec.quotient_realization(), zeta, m_trunc)
    else:
        vals = _direct_symbol_values(spec, zeta, m_trunc)
    out = []
    for r in rs:
        weights = (1.0 - r * r) * r ** (2.0 * np.arange(m_trunc + 1))
        out.append(np.einsum("m,mij->ij", weights, vals))
    return out


def _direct_symbol_values(q, zeta, m_trunc):
    return np.stack([covariant_value(q, m, zeta)[0] for m in range(m_trunc + 1)])


def _lg(alpha):
    return sum(math.lgamma(a + 1) for a in alpha)


def _line_symbol_values(model, k, zeta, m_trunc):
    """sigma^(m)(P_{E,m})(zeta) for O(k) on projective space, all m <= M.

    The projection is the range of the multiplication embedding
    GH_{m+k} -> GH_m (x) GH_k, so the value is the Gram matrix of the
    polynomials psi_i^(k) kbar_zeta^(m) in the level-(m+k) Fock inner
    product.  Everything is carried in orthonormal coordinates with
    log-gamma coefficients, so large truncations stay finite; levels are
    never materialized on the model (the level cache would not survive
    M near a thousand).
    """
    zeta = np.asarray(zeta, dtype=complex).reshape(-1)
    res = float(model.variety_residual(zeta[None, :])[0])
    if res > symbols.EVAL_TOL or abs(np.linalg.norm(zeta) - 1.0) > symbols.EVAL_TOL:
        raise OffVarietyPoint("Abel point must lie on the boundary sphere")
    n = model.n
    basis_k = monomials(n, k)
    nk = len(basis_k)
    lg_beta = [_lg(beta) for beta in basis_k]
    zc = zeta.conj()
    out = np.empty((m_trunc + 1, nk, nk), dtype=complex)
    for m in range(m_trunc + 1):
        basis_m = monomials(n, m)
        top = monomials(n, m + k)
        top_index = {g: e for e, g in enumerate(top)}
        lg_alpha = np.array([_lg(a) for a in basis_m])
        exps = np.array(basis_m)
        kvec = np.exp(0.5 * (math.lgamma(m + 1) - lg_alpha)) * np.prod(
            zc[None, :] ** exps, axis=1
        )
        base = 0.5 * (math.lgamma(k + 1) + math.lgamma(m + 1) - math.lgamma(m + k + 1))
        w = np.zeros((len(top), nk), dtype=complex)
        for i, beta in enumerate(basis_k):
            idx = np.empty(len(basis_m), dtype=int)
            lg_gamma = np.empty(len(basis_m))
            for b, alpha in enumerate(basis_m):
                gamma = tuple(a + c for a, c in zip(alpha, beta))
                idx[b] = top_index[gamma]
                lg_gamma[b] = _lg(gamma)
            coef = np.exp(base + 0.5 * (lg_gamma - lg_alpha - lg_beta[i]))
            w[idx, i] = coef * kvec
        out[m] = w.conj().T @ w
    return out


def abel_report(spec, zeta, r_list=(0.9, 0.95, 0.99)):
    """Abel values with a linear r->1 extrapolant and its distance.

    Fits each matrix entry linearly in (1 - r^2) over the given radii and
    reports the operator-norm distance of every value from the
    extrapolated limit.
    """
    rs = sorted(float(r) for r in r_list)
    vals = abel_symbol(spec, zeta, rs)
    x = np.array([1.0 - r * r for r in rs])
    design = np.stack([np.ones_like(x), x], axis=1)
    flat = np.stack([v.reshape(-1) for v in vals])
    coef, *_ = np.linalg.lstsq(design, flat, rcond=None)
    limit = coef[0].reshape(vals[0].shape)
    trunc = abel_truncation(max(rs))
    rows = [
        {"m": trunc, "r": r, "distance": float(op_norm(v - limit))}
        for r, v in zip(rs, vals)
    ]
    return Report(
        check="abel",
        per_level=rows,
        verdict="PASS" if rows[-1]["distance"] < 0.05 else "FAIL",
        fit={"finalDistance": rows[-1]["distance"]},
        meta={"rList": rs, "truncation": trunc},
    ), limit


def kernel_eval(model, z, w, m_trunc):
    """Truncated reproducing kernel sum_{m<=M} K_m(z, w) at interior points.

    Converges to 1/(1 - <w, z>) with error below
    |<w, z>|^{M+1} / (1 - |<w, z>|).
    """
    z = np.asarray(z, dtype=complex).reshape(1, -1)
    w = np.asarray(w, dtype=complex).reshape(1, -1)
    for p in (z, w):
        if float(model.variety_residual(p)[0]) > symbols.EVAL_TOL:
            raise OffVarietyPoint("kernel point off the variety")
        if np.linalg.norm(p) >= 1.0:
            raise ValueError("kernel points must lie strictly inside the ball")
    total = 0.0 + 0.0j
    for m in range(m_trunc + 1):
        vz = model.basis_values(m, z)[0]
        vw = model.basis_values(m, w)[0]
        total += np.sum(vz * vw.conj())
    return complex(total)
