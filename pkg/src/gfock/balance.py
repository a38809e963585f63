"""Balance certification and the T-map iteration toward balanced metrics.

Balance of a metric symbol at level m is exact linear algebra: the level-m
compression must be the constant c_{E,m} times the quotient projection.
The T-map side is quadrature-based: it iterates the Donaldson-type update
on inner products G over the section space until the sampled fixed-point
residual stalls.
"""

from fractions import Fraction

import numpy as np

from . import bundles as bundles_mod
from . import quotient, symbols
from ._linalg import herm, op_norm
from .reports import Report

BALANCE_TOL = 1e-9
FIBER_RCOND = 1e-10


def _metric_rank(metric):
    tr = np.trace(symbols.haar_state(metric)).real
    r = int(round(tr))
    if abs(tr - r) > 1e-6:
        raise ValueError("metric trace %.6f is not an integer rank" % tr)
    return r


def balance_defect(bundle, m, q=None):
    """Operator-norm distance of the level-m compression from c_{E,m} P_{E,m}.

    Parameters
    ----------
    bundle : BundleSpec or Symbol
        A bundle preset, or a bare metric symbol (pointwise projection).
    m : int
    q : GradedQuotient, optional
        The quotient whose projection anchors the defect; defaults to the
        bundle's realization (for a bare metric: the range quotient of the
        metric itself).

    Returns the defect and is zero exactly when the metric is balanced.
    """
    if isinstance(bundle, bundles_mod.BundleSpec):
        metric = bundle.metric_symbol()
        rank = bundle.rank
        if q is None:
            q = bundle.quotient_realization()
    else:
        metric = bundle
        rank = _metric_rank(metric)
        if q is None:
            q = quotient.from_toeplitz_range(metric)
    c = Fraction(q.model.dim_at(m) * rank, q.dim(m))
    return float(op_norm(symbols.toeplitz(metric, m) - float(c) * q.projection(m)))


def balance_report(bundle, m_max, tol=BALANCE_TOL):
    """Per-level balance defects with exact constants, as a Report."""
    spec = bundle
    if not isinstance(spec, bundles_mod.BundleSpec):
        spec = bundles_mod.custom_quotient(
            quotient.from_toeplitz_range(bundle), metric=bundle
        )
    q = spec.quotient_realization()
    rows = []
    worst = 0.0
    for m in range(m_max + 1):
        c = bundles_mod.c_constant(spec, m)
        d = balance_defect(spec.metric_symbol(), m, q=q)
        worst = max(worst, d)
        rows.append({"m": m, "c": c, "chi": q.dim(m), "defect": d})
    return Report(
        check="balance",
        per_level=rows,
        verdict="PASS" if worst < tol else "FAIL",
        fit={"maxDefect": worst, "tol": tol},
        meta={"model": q.model.config(), "bundle": spec.config(), "rank": spec.rank},
    )


class MetricOnSections:
    """An inner product on the level-m section space, relative to Fock."""

    def __init__(self, m, g):
        g = herm(np.asarray(g, dtype=complex))
        if np.linalg.eigvalsh(g).min() <= 0:
            raise ValueError("section metric must be positive definite")
        self.m = m
        self.g = g

    def normalized(self):
        return MetricOnSections(self.m, self.g * (self.g.shape[0] / np.trace(self.g).real))


def _tmap_apply(frames, g, chi, rank):
    """One Donaldson update: G' = (chi/rank) mean_p W^H (W G^{-1} W^H)^+ W."""
    ginv = np.linalg.inv(g)
    fibers = np.einsum("pic,cd,pjd->pij", frames, ginv, frames.conj(), optimize=True)
    fibers = 0.5 * (fibers + fibers.conj().transpose(0, 2, 1))
    ranks = np.linalg.matrix_rank(fibers, tol=FIBER_RCOND, hermitian=True)
    h = np.linalg.pinv(fibers, rcond=FIBER_RCOND, hermitian=True)
    out = np.einsum("pic,pij,pjd->cd", frames.conj(), h, frames, optimize=True)
    out *= chi / (rank * frames.shape[0])
    singular = np.nonzero(ranks < rank)[0]
    return herm(out), [int(i) for i in singular]


def _residual(g, tg):
    """Scale-gauge fixed-point residual ||G^{-1/2} T(G) G^{-1/2} / s - 1||."""
    w, v = np.linalg.eigh(herm(g))
    isq = (v / np.sqrt(w)) @ v.conj().T
    mmat = isq @ tg @ isq
    s = np.trace(mmat).real / mmat.shape[0]
    return float(op_norm(mmat / s - np.eye(mmat.shape[0])))


class TmapRun:
    def __init__(self, metrics, defects, report):
        self.metrics = metrics
        self.defects = defects
        self.report = report


def tmap_iterate(q, m, samples=20000, seed=0, max_iter=50, tol=1e-8, start=None, rank=None):
    """Iterate the sampled T-map on section metrics at level m.

    Starting from ``start`` (default: the Fock inner product), repeatedly
    applies G -> (chi/rank) mean_p W_p^H (W_p G^{-1} W_p^H)^+ W_p over a
    fixed boundary sample, rescaling each iterate to unit normalized
    trace.  Stops when successive normalized iterates (or the sampled
    fixed-point residual) drop below ``tol`` in operator norm.  Sample
    points with a rank-deficient evaluation fiber are reported and
    handled by pseudoinverse.

    Returns
    -------
    TmapRun
        ``metrics`` (one MetricOnSections per iterate, including the
        start), ``defects`` (sampled fixed-point residual per iterate),
        and a Report with the run record.
    """
    chi = q.dim(m)
    if rank is None:
        rank = _rank_of_quotient(q)
    pts = q.model.sample_boundary(samples, seed=seed)
    frames = quotient.section_values(q, m, pts)
    g = np.eye(chi, dtype=complex) if start is None else np.asarray(start, dtype=complex)
    cur = MetricOnSections(m, g).normalized()
    metrics = [cur]
    defects = []
    singular_points = set()
    converged = False
    for _ in range(max_iter):
        tg, singular = _tmap_apply(frames, cur.g, chi, rank)
        singular_points.update(singular)
        defects.append(_residual(cur.g, tg))
        nxt = MetricOnSections(m, tg).normalized()
        step = float(op_norm(nxt.g - cur.g))
        metrics.append(nxt)
        cur = nxt
        if step < tol or defects[-1] < tol:
            converged = True
            break
    rows = [{"m": m, "iter": i, "residual": d} for i, d in enumerate(defects)]
    # without convergence inside the budget, a clear monotone collapse of
    # the residual still counts; stagnation or growth does not
    trending = (
        len(defects) >= 2
        and all(b <= a * 1.05 for a, b in zip(defects, defects[1:]))
        and defects[-1] < 0.01 * defects[0]
    )
    report = Report(
        check="tmap",
        per_level=rows,
        verdict="PASS" if converged or trending else "FAIL",
        fit={"iterations": len(defects), "finalResidual": defects[-1] if defects else 0.0},
        meta={
            "m": m,
            "chi": chi,
            "rank": rank,
            "samples": samples,
            "seed": seed,
            "converged": converged,
            "singularPoints": sorted(singular_points),
        },
    )
    return TmapRun(metrics, defects, report)


def _rank_of_quotient(q, m_max=8):
    rep = quotient.arveson_rank(q, m_max)
    r = int(rep.fit["nearestInt"])
    if r <= 0:
        raise ValueError("quotient growth gives bundle rank %d" % r)
    return r


def quadrature_noise_floor(q, m, samples=20000, seeds=(1, 2), rank=None):
    """Sampled residual of the exact-balanced start under independent seeds.

    The equivariant fixed point is the Fock metric itself, so its sampled
    residual is pure quadrature noise; the maximum over seeds is the floor
    against which T-map convergence is judged.
    """
    chi = q.dim(m)
    if rank is None:
        rank = _rank_of_quotient(q)
    floor = 0.0
    for seed in seeds:
        pts = q.model.sample_boundary(samples, seed=seed)
        frames = quotient.section_values(q, m, pts)
        tg, _ = _tmap_apply(frames, np.eye(chi, dtype=complex), chi, rank)
        floor = max(floor, _residual(np.eye(chi), tg))
    return floor


def ym_limit_probe(spec, m_range, points=None, count=12, seed=7):
    """Pointwise convergence evidence for the covariant symbols of P_{E,m}.

    Evaluates the covariant symbol of the quotient projection at fixed
    boundary points for each m in ``m_range`` and reports the per-point
    Cauchy differences across consecutive m, plus the distance to the
    metric's pointwise value when the spec carries one.
    """
    lo, hi = m_range
    q = spec.quotient_realization() if isinstance(spec, bundles_mod.BundleSpec) else spec
    if points is None:
        points = q.model.sample_boundary(count, seed=seed)
    vals = {}
    for m in range(lo, hi + 1):
        sym = symbols.covariant_symbol(q.model, q.projection(m), m, q.nmat)
        vals[m] = symbols.evaluate(sym, points)
    rows = []
    for m in range(lo, hi):
        diff = max(op_norm(a - b) for a, b in zip(vals[m + 1], vals[m]))
        rows.append({"m": m, "cauchyDiff": float(diff)})
    fit = {}
    metric = None
    if isinstance(spec, bundles_mod.BundleSpec) and spec.kind != "custom":
        metric = symbols.evaluate(spec.metric_symbol(), points)
        fit["limitDistance"] = float(
            max(op_norm(a - b) for a, b in zip(vals[hi], metric))
        )
    diffs = [r["cauchyDiff"] for r in rows]
    decreasing = all(b <= a * 1.1 + 1e-12 for a, b in zip(diffs, diffs[1:]))
    # distance to the limit is the tail sum of the Cauchy differences; for
    # the observed ~1/m^2 decay that is ~(m+2) times the last difference
    tail_bound = 3.0 * (hi + 2) * (diffs[-1] if diffs else 0.0) + 1e-8
    ok = decreasing and (
        "limitDistance" not in fit or fit["limitDistance"] <= tail_bound
    )
    fit["decreasing"] = decreasing
    fit["tailBound"] = tail_bound
    return Report(
        check="ym_limit",
        per_level=rows,
        verdict="PASS" if ok else "FAIL",
        fit=fit,
        meta={"model": q.model.config(), "mRange": [lo, hi], "points": len(points), "seed": seed},
    )
