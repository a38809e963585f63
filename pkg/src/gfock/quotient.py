"""Graded quotient modules of GH (x) C^N.

A graded quotient is described by the sequence of orthogonal projections
P_{E,m} onto its level spaces GE_m inside GH_m (x) C^N.  Two constructions
are provided: the Fock-orthogonal complement of a finitely generated
submodule, and the range of the Toeplitz compression of a pointwise
projection-valued symbol.
"""

import math

import numpy as np

from . import polyparse, symbols
from ._linalg import eigh_desc, fix_phases, herm, op_norm, range_cluster
from .errors import CertificateFailed, NoSamplerAvailable, NonHomogeneousGenerator
from .reports import Report

SUBMODULE_SVD_TOL = 1e-10
JMATH_LEAK_TOL = 1e-8


class GradedQuotient:
    """Lazily built level projections of a graded quotient module.

    Use :func:`from_submodule_generators` or :func:`from_toeplitz_range`
    instead of constructing directly.
    """

    def __init__(self, model, nmat, provenance, gens=None, metric=None):
        self.model = model
        self.nmat = nmat
        self.provenance = provenance
        self.gens = gens
        self.metric = metric
        self._basis = {}
        self._cluster = {}
        self._blocks = {}
        self._phi_pow = {}

    # -- level data --------------------------------------------------------

    def basis(self, m):
        """Orthonormal basis of GE_m as columns in GH_m (x) C^N coordinates."""
        q = self._basis.get(m)
        if q is None:
            q = self._build_basis(m)
            self._basis[m] = q
        return q

    def _build_basis(self, m):
        if self.provenance == "submodule":
            return self._basis_from_gens(m)
        t = symbols.toeplitz(self.metric, m)
        vals, vecs = eigh_desc(herm(t))
        count, ratio = range_cluster(vals)
        self._cluster[m] = {
            "retained": count,
            "gapRatio": float(ratio) if np.isfinite(ratio) else float("inf"),
            "clusterMin": float(vals[count - 1]) if count else 0.0,
            "clusterMax": float(vals[0]) if count else 0.0,
        }
        return vecs[:, :count]

    def _basis_from_gens(self, m):
        lvl = self.model.level(m)
        full = lvl.dim * self.nmat
        cols = []
        for gen in self.gens:
            dg = _generator_degree(gen)
            if dg > m:
                continue
            for mu in _monomials(self.model.n, m - dg):
                col = np.zeros((lvl.dim, self.nmat), dtype=complex)
                for i, comp in enumerate(gen):
                    if not comp:
                        continue
                    amb = np.zeros(lvl.amb_dim, dtype=complex)
                    for alpha, c in comp.items():
                        amb[lvl.index[tuple(x + y for x, y in zip(alpha, mu))]] += c
                    col[:, i] = lvl.fock_coords(amb)
                cols.append(col.reshape(-1))
        if not cols:
            return np.eye(full, dtype=complex)
        c = np.stack(cols, axis=1)
        # unit columns: monomial shifts of a generator differ in norm by
        # factorial ratios, which would swamp a relative rank cutoff
        norms = np.linalg.norm(c, axis=0)
        keep = norms > 0
        c = c[:, keep] / norms[keep]
        if not c.shape[1]:
            return np.eye(full, dtype=complex)
        u, s, _ = np.linalg.svd(c, full_matrices=True)
        rank = int(np.sum(s > SUBMODULE_SVD_TOL * s[0]))
        return fix_phases(u[:, rank:])

    def dim(self, m):
        return self.basis(m).shape[1]

    def dims(self, m_max):
        return [self.dim(m) for m in range(m_max + 1)]

    def projection(self, m):
        q = self.basis(m)
        return q @ q.conj().T

    def cluster_info(self, m):
        """Retained-eigenvalue record for toeplitz_range levels."""
        self.basis(m)
        return self._cluster.get(m)

    def compress(self, x, m):
        """Compress an operator on GH_m (x) C^N to GE_m coordinates."""
        q = self.basis(m)
        return q.conj().T @ np.asarray(x, dtype=complex) @ q

    def config(self):
        out = {"kind": self.provenance, "N": self.nmat}
        if self.provenance == "submodule":
            out["generators"] = [
                [polyparse.poly_to_string(c) for c in gen] for gen in self.gens
            ]
        return out


def _monomials(n, m):
    from .space import monomials

    return monomials(n, m)


def _generator_degree(gen):
    degs = {polyparse.poly_degree(c) for c in gen if c}
    if len(degs) != 1:
        raise NonHomogeneousGenerator(
            "generator components have mixed degrees %s" % sorted(degs)
        )
    return degs.pop()


def _parse_generator(model, gen, nmat):
    if isinstance(gen, str):
        gen = [gen]
    if len(gen) != nmat:
        raise ValueError("generator has %d components, expected %d" % (len(gen), nmat))
    parsed = []
    for comp in gen:
        terms = polyparse.parse_holomorphic(comp, model.n) if isinstance(comp, str) else comp
        if terms:
            polyparse.require_homogeneous(terms, "generator component")
        parsed.append(terms)
    if not any(parsed):
        raise ValueError("zero generator")
    return tuple(parsed)


def from_submodule_generators(model, nmat, gens, m_max=None):
    """Quotient of GH (x) C^N by the graded submodule the generators span.

    Parameters
    ----------
    model : SpaceModel
    nmat : int
        Number of free-module components N.
    gens : iterable
        Each generator is a polynomial string (N=1) or a list of N strings;
        nonzero components must be homogeneous of one common degree.
    m_max : int, optional
        Pre-build levels 0..m_max.
    """
    parsed = [_parse_generator(model, g, nmat) for g in gens]
    q = GradedQuotient(model, nmat, "submodule", gens=parsed)
    if m_max is not None:
        for m in range(m_max + 1):
            q.basis(m)
    return q


def from_toeplitz_range(metric, m_max=None, sample_count=24, seed=20240101):
    """Quotient whose level spaces are the ranges of toeplitz(metric, m).

    The metric symbol must be pointwise a hermitian projection (checked on
    sampled boundary points); the retained eigenvalue cluster of each
    Toeplitz compression is cut at the largest spectral gap.

    Raises
    ------
    NoSpectralGap
        If some level's spectrum has no decisive gap (ratio < 10).
    """
    model = metric.model
    try:
        pts = model.sample_boundary(sample_count, seed=seed)
    except NoSamplerAvailable:
        pts = None
    if pts is not None:
        vals = symbols.evaluate(metric, pts)
        worst = max(
            float(np.abs(np.einsum("pij,pjk->pik", vals, vals) - vals).max()),
            float(np.abs(vals - vals.conj().transpose(0, 2, 1)).max()),
        )
        if worst > 1e-8:
            raise ValueError(
                "metric is not pointwise a hermitian projection (defect %.3g)" % worst
            )
    q = GradedQuotient(model, metric.nmat, "toeplitz_range", metric=metric)
    if m_max is not None:
        for m in range(m_max + 1):
            q.basis(m)
    return q


def trivial_quotient(model, nmat=1):
    return GradedQuotient(model, nmat, "submodule", gens=[])


def quotient_from_config(model, cfg):
    kind = cfg.get("kind", "submodule")
    nmat = int(cfg.get("N", 1))
    m_max = cfg.get("mMax")
    if kind == "submodule":
        return from_submodule_generators(model, nmat, cfg.get("generators", []), m_max)
    if kind == "toeplitz_range":
        metric = symbols.parse_symbol(model, cfg["metric"])
        return from_toeplitz_range(metric, m_max)
    raise ValueError("unknown quotient kind %r" % kind)


# -- embeddings and their trace adjoints ------------------------------------


def iota(q, b, m, l):
    """Embed an operator: conjugate by the level splitting GH_l -> GH_m (x) rest.

    Input and output in GE coordinates (b on GE_m, result on GE_l).
    """
    qm, ql = q.basis(m), q.basis(l)
    amb = qm @ np.asarray(b, dtype=complex) @ qm.conj().T
    sym = symbols.covariant_symbol(q.model, amb, m, q.nmat)
    return ql.conj().T @ symbols.promote(sym, l).matrix() @ ql


def iota_projection(q, m, l):
    """iota_{m,l}(P_{E,m}) as a full matrix on GH_l (x) C^N."""
    sym = symbols.covariant_symbol(q.model, q.projection(m), m, q.nmat)
    return symbols.promote(sym, l).matrix()


def coinvariance_certificate(q, m_max, tol=1e-9):
    """PSD check of iota_{m,m+1}(P_{E,m}) - P_{E,m+1} for m < m_max."""
    rows = []
    worst = np.inf
    for m in range(m_max):
        d = iota_projection(q, m, m + 1) - q.projection(m + 1)
        mn = float(np.linalg.eigvalsh(herm(d)).min())
        worst = min(worst, mn)
        rows.append({"m": m, "minEig": mn, "dim": q.dim(m)})
    return Report(
        check="coinvariance",
        per_level=rows,
        verdict="PASS" if worst >= -tol else "FAIL",
        fit={"minEig": float(worst), "tol": tol},
        meta={"model": q.model.config(), "quotient": q.config(), "mMax": m_max},
    )


def jmath(q, b, l, m, check=True):
    """Trace-adjoint of iota: map an operator on GE_l down to GE_m.

    Realized as the normalized partial trace of the split operator,
    compressed to GE_m; for a coinvariant quotient the compression loses
    nothing and normalized traces are matched exactly.

    Parameters
    ----------
    q : GradedQuotient
    b : ndarray
        Operator on GE_l in GE coordinates (dim(l) square).
    l, m : int
        Source and target levels, m <= l.
    check : bool
        Verify the partial trace is supported on GE_m (coinvariance
        witness); raise CertificateFailed otherwise.
    """
    if m > l:
        raise ValueError("jmath maps downward: need m <= l")
    if m == l:
        return np.asarray(b, dtype=complex).copy()
    ql = q.basis(l)
    nl, nm = q.model.dim_at(l), q.model.dim_at(m)
    amb = symbols.unflatten_block(ql @ np.asarray(b, dtype=complex) @ ql.conj().T, nl, q.nmat)
    mul = q.model.mul_tensor(m, l - m)
    f4 = np.einsum("ecd,efij,fgd->cgij", mul.conj(), amb, mul, optimize=True)
    f = symbols.flatten_block(f4)
    qm = q.basis(m)
    g = qm.conj().T @ f @ qm
    if check:
        leak = op_norm(f - qm @ g @ qm.conj().T)
        scale = max(op_norm(f), 1e-30)
        if leak > JMATH_LEAK_TOL * scale:
            raise CertificateFailed(
                "partial trace leaves GE_%d (leak %.3g); quotient not coinvariant"
                % (m, leak)
            )
    return (q.dim(m) / q.dim(l)) * g


def normalized_trace(q, b, m):
    return complex(np.trace(b)) / q.dim(m)


def section_values(q, m, points):
    """Evaluate the GE_m coordinate basis at points: (npts, N, dim GE_m).

    Column c of the [i, c] slice holds the C^N value of the c-th basis
    section, so ``out[p] @ u`` is the value at point p of the section with
    coordinates u.
    """
    vals = q.model.basis_values(m, points)
    q3 = q.basis(m).reshape(q.model.dim_at(m), q.nmat, q.dim(m))
    return np.einsum("pa,aic->pic", vals, q3)


# -- shifts on the quotient --------------------------------------------------


def compressed_shift(q, m):
    """The n shift blocks GE_m -> GE_{m+1} (compressions of z_alpha)."""
    blocks = q._blocks.get(m)
    if blocks is None:
        from .shifts import shift_blocks

        qm, qn = q.basis(m), q.basis(m + 1)
        eye = np.eye(q.nmat)
        blocks = [
            qn.conj().T @ np.kron(s, eye) @ qm for s in shift_blocks(q.model, m)
        ]
        q._blocks[m] = blocks
    return blocks


def scalar_shift_residual(q, m):
    """Deviation of sum_a S_Ea* S_Ea on GE_m from its expected scalar."""
    blocks = compressed_shift(q, m)
    s = sum(b.conj().T @ b for b in blocks)
    ratio = q.dim(m + 1) / q.dim(m)
    return op_norm(s - ratio * np.eye(q.dim(m)))


def row_identity_residual(q, m):
    """|| sum_a S_Ea S_Ea* - 1 || on GE_{m+1}."""
    blocks = compressed_shift(q, m)
    s = sum(b @ b.conj().T for b in blocks)
    return op_norm(s - np.eye(q.dim(m + 1)))


def transfer_pow(q, r, m):
    """r-fold sum over words S_Ew* S_Ew, restricted to GE_m."""
    key = (r, m)
    out = q._phi_pow.get(key)
    if out is None:
        if r == 0:
            out = np.eye(q.dim(m), dtype=complex)
        else:
            prev = transfer_pow(q, r - 1, m + 1)
            out = sum(b.conj().T @ prev @ b for b in compressed_shift(q, m))
        q._phi_pow[key] = out
    return out


def quotient_defect(q, p, m):
    """B_p of the compressed shift tuple at level m."""
    out = np.zeros((q.dim(m), q.dim(m)), dtype=complex)
    for r in range(p + 1):
        out += ((-1) ** r) * math.comb(p, r) * transfer_pow(q, r, m)
    return out


def quotient_defect_trace_expected(q, p, m):
    return sum(((-1) ** r) * math.comb(p, r) * q.dim(m + r) for r in range(p + 1))


def essential_normality_report(q, m_max):
    """Decay of cross-commutators [S_Ea*, S_Eb] on GE_m; fitted exponent."""
    rows = []
    for m in range(1, m_max + 1):
        lo = compressed_shift(q, m - 1)
        hi = compressed_shift(q, m)
        worst = 0.0
        for a in range(q.model.n):
            for b in range(q.model.n):
                comm = hi[a].conj().T @ hi[b] - lo[b] @ lo[a].conj().T
                worst = max(worst, op_norm(comm))
        rows.append({"m": m, "norm": worst, "dim": q.dim(m)})
    tail = [r for r in rows if r["m"] >= max(2, m_max // 2)]
    xs = np.log([r["m"] for r in tail])
    ys = np.log([max(r["norm"], 1e-300) for r in tail])
    slope = float(np.polyfit(xs, ys, 1)[0]) if len(tail) >= 2 else float("nan")
    exponent = -slope
    verdict = "PASS" if 0.5 <= exponent <= 1.5 else "FAIL"
    return Report(
        check="essential_normality",
        per_level=rows,
        verdict=verdict,
        fit={"exponent": exponent, "window": int(tail[0]["m"]) if tail else 0},
        meta={"model": q.model.config(), "quotient": q.config(), "mMax": m_max},
    )


def arveson_rank(q, m_max):
    """dim GE_m / n_m over levels, extrapolated to its limit.

    Both dimension sequences agree with degree-d polynomials on the tail of
    the window, so the limit is the exact ratio of leading coefficients;
    when the quotient dimensions are not yet polynomial on the window, a
    least-squares 1/m fit is reported instead.
    """
    from . import intpoly

    rows = []
    for m in range(m_max + 1):
        nm = q.model.dim_at(m)
        rows.append({"m": m, "dim": q.dim(m), "ratio": q.dim(m) / nm})
    d = q.model.dim
    tail0 = max(0, m_max - (d + 2))
    fit = {}
    try:
        ce, de = intpoly.fit_integer_poly([r["dim"] for r in rows[tail0:]], tail0, d)
        ch, dh = intpoly.fit_integer_poly(
            [q.model.dim_at(m) for m in range(tail0, m_max + 1)], tail0, d
        )
        if dh != d:
            raise ValueError("model dimension sequence does not reach degree d")
        lead_e = intpoly.leading_fraction(ce) if de == d else 0
        limit_exact = lead_e / intpoly.leading_fraction(ch) if lead_e else 0
        limit = float(limit_exact)
        fit = {"limit": limit, "limitExact": limit_exact, "method": "leading_coefficient"}
        verdict = "PASS"
    except ValueError:
        ms = np.array([r["m"] for r in rows if r["m"] >= 1], dtype=float)
        ys = np.array([r["ratio"] for r in rows if r["m"] >= 1])
        cols = np.vstack([ms ** (-j) for j in range(d + 1)]).T
        coeffs, *_ = np.linalg.lstsq(cols, ys, rcond=None)
        resid = float(np.abs(cols @ coeffs - ys).max())
        limit = float(coeffs[0])
        fit = {"limit": limit, "method": "lstsq", "fitResidual": resid}
        verdict = "PASS" if resid < 0.05 * max(1.0, abs(limit)) else "FAIL"
    fit["nearestInt"] = int(round(limit))
    return Report(
        check="arveson_rank",
        per_level=rows,
        verdict=verdict,
        fit=fit,
        meta={"model": q.model.config(), "quotient": q.config(), "mMax": m_max},
    )
