"""Graded shift operators: row identity, defect operators, growth scans.

The tuple shift S_alpha multiplies by z_alpha and projects to the next
level.  For orbit models the column sum S*S acts as the scalar
n_{m+1}/n_m on level m, which is certified numerically before any
weighted (normalized-shift) construction is trusted.
"""

import math

import numpy as np

from ._linalg import herm, op_norm
from .errors import CertificateFailed
from .reports import Report

ORBIT_TOL = 1e-9


def _cache(model, name):
    store = getattr(model, name, None)
    if store is None:
        store = {}
        setattr(model, name, store)
    return store


def shift_blocks(model, m):
    """Matrices of psi |-> proj(z_alpha * psi) from level m to level m+1."""
    store = _cache(model, "_shift_blocks")
    if m in store:
        return store[m]
    lm, lt = model.level(m), model.level(m + 1)
    blocks = []
    for i in range(model.n):
        idx = np.empty(lm.amb_dim, dtype=np.int64)
        for a, alpha in enumerate(lm.basis):
            bumped = list(alpha)
            bumped[i] += 1
            idx[a] = lt.index[tuple(bumped)]
        s = lt.onb[idx, :].conj().T @ (lt.weights[idx][:, None] * lm.onb)
        blocks.append(s)
    store[m] = blocks
    return blocks


def column_sum(model, m):
    """sum_alpha S_alpha* S_alpha on level m."""
    blocks = shift_blocks(model, m)
    return sum(b.conj().T @ b for b in blocks)


def row_sum(model, m):
    """sum_alpha S_alpha S_alpha* on level m+1 (identity for every model)."""
    blocks = shift_blocks(model, m)
    return sum(b @ b.conj().T for b in blocks)


def row_identity_residual(model, m):
    r = row_sum(model, m)
    return op_norm(r - np.eye(r.shape[0]))


def orbit_certificate(model, m_max, tol=ORBIT_TOL):
    """Certify sum_alpha S*S = (n_{m+1}/n_m) * 1 on levels 0..m_max."""
    rows = []
    worst = 0.0
    for m in range(m_max + 1):
        ratio = model.dim_at(m + 1) / model.dim_at(m)
        res = op_norm(column_sum(model, m) - ratio * np.eye(model.dim_at(m)))
        worst = max(worst, res)
        rows.append({"m": m, "ratio": ratio, "residual": float(res)})
    verdict = "PASS" if worst < tol else "FAIL"
    return Report(
        check="orbit_certificate",
        per_level=rows,
        verdict=verdict,
        fit={"maxResidual": float(worst), "tol": tol},
        meta={"model": model.config(), "mMax": m_max},
    )


def orbit_passes(model, m_max, tol=ORBIT_TOL):
    store = _cache(model, "_orbit_ok")
    key = (m_max, tol)
    if key not in store:
        store[key] = orbit_certificate(model, m_max, tol).passed
    return store[key]


def require_orbit(model, m_max, override=False, tol=ORBIT_TOL):
    if override:
        return
    if not orbit_passes(model, m_max, tol):
        raise CertificateFailed(
            "column-sum certificate fails up to level %d; pass override=True "
            "to force the weighted channel anyway" % m_max
        )


def phi_star_pow(model, r, m):
    """The r-fold unweighted transfer of the identity, restricted to level m.

    Equals sum over words w of length r of S_w* S_w.
    """
    store = _cache(model, "_phi_pow")
    key = (r, m)
    if key in store:
        return store[key]
    if r == 0:
        out = np.eye(model.dim_at(m), dtype=complex)
    else:
        prev = phi_star_pow(model, r - 1, m + 1)
        out = sum(
            b.conj().T @ prev @ b for b in shift_blocks(model, m)
        )
    store[key] = out
    return out


def defect_operator(model, p, m):
    """B_p at level m: alternating binomial sum of transfer powers."""
    out = np.zeros((model.dim_at(m), model.dim_at(m)), dtype=complex)
    for r in range(p + 1):
        out += ((-1) ** r) * math.comb(p, r) * phi_star_pow(model, r, m)
    return out


def defect_trace_expected(model, p, m):
    """Alternating binomial sum of level dimensions (exact integer)."""
    return sum(((-1) ** r) * math.comb(p, r) * model.dim_at(m + r) for r in range(p + 1))


def weighted_defect_operator(model, p, m, override=False):
    """B_p of the normalized shift tuple; needs a passing certificate.

    The normalized channel rescales each transfer power by n_m/n_{m+r},
    which is only the correct weighting when the column-sum certificate
    holds.
    """
    require_orbit(model, m + p, override=override)
    out = np.zeros((model.dim_at(m), model.dim_at(m)), dtype=complex)
    for r in range(p + 1):
        w = model.dim_at(m) / model.dim_at(m + r)
        out += ((-1) ** r) * math.comb(p, r) * w * phi_star_pow(model, r, m)
    return out


def q_isometry_scan(model, m_max, q_cap=None, tol=ORBIT_TOL):
    """Smallest q with max_m ||B_q|| < tol, plus the size of B_{q-1}."""
    if q_cap is None:
        q_cap = model.dim + 3
    found_q = None
    norms_by_q = {}
    for q in range(1, q_cap + 1):
        norms = [op_norm(defect_operator(model, q, m)) for m in range(m_max + 1)]
        norms_by_q[q] = norms
        if max(norms) < tol:
            found_q = q
            break
    rows = []
    for m in range(m_max + 1):
        row = {"m": m}
        if found_q is not None:
            row["normAtQ"] = float(norms_by_q[found_q][m])
            if found_q - 1 in norms_by_q:
                row["normBelowQ"] = float(norms_by_q[found_q - 1][m])
        rows.append(row)
    verdict = "PASS" if found_q is not None else "FAIL"
    fit = {"q": found_q if found_q is not None else -1, "tol": tol}
    if found_q is not None:
        fit["maxNormAtQ"] = float(max(norms_by_q[found_q]))
        if found_q - 1 in norms_by_q:
            fit["maxNormBelowQ"] = float(max(norms_by_q[found_q - 1]))
    return Report(
        check="q_isometry",
        per_level=rows,
        verdict=verdict,
        fit=fit,
        meta={"model": model.config(), "mMax": m_max},
    )


def commutator_block(model, m):
    """[S*, S] restricted to level m (m >= 1): column sum minus row sum."""
    c = column_sum(model, m)
    if m == 0:
        return c
    return c - row_sum(model, m - 1)


def schatten_report(model, p_values, m_max):
    """Tabulate the commutator eigenvalue per level and power sums.

    For orbit models the commutator is scalar on each level m >= 1; the
    report records that scalar, its deviation from scalarity, the partial
    sums sum_m n_m lambda_m^p and a fitted log-log growth exponent whose
    sign classifies the sums as plateauing or divergent.
    """
    rows = []
    lams = []
    for m in range(1, m_max + 1):
        block = commutator_block(model, m)
        lam = float(np.trace(block).real / block.shape[0])
        dev = op_norm(block - lam * np.eye(block.shape[0]))
        lams.append(lam)
        rows.append(
            {"m": m, "lambda": lam, "scalarDev": float(dev), "dim": model.dim_at(m)}
        )
    fit = {}
    verdict = "PASS"
    d = model.dim
    for p in p_values:
        terms = np.array(
            [model.dim_at(m) * lams[m - 1] ** p for m in range(1, m_max + 1)]
        )
        partial = float(np.cumsum(terms)[-1])
        tail = max(2, m_max // 2)
        ms = np.arange(1, m_max + 1)[-tail:]
        vals = np.abs(terms[-tail:])
        if np.any(vals <= 0):
            exponent = -math.inf
        else:
            exponent = float(np.polyfit(np.log(ms), np.log(vals), 1)[0])
        plateau = exponent < -1.0
        expected = p > d + 1
        if plateau != expected:
            verdict = "FAIL"
        fit["p=%s" % format(float(p), "g")] = {
            "partialSum": partial,
            "exponent": exponent,
            "plateau": plateau,
            "expectedPlateau": expected,
        }
    return Report(
        check="schatten",
        per_level=rows,
        verdict=verdict,
        fit=fit,
        meta={"model": model.config(), "mMax": m_max},
    )
