"""Guo and Gieseker stability certificates for graded quotient pairs.

A quotient sheaf F of E is encoded by the submodule that kills it; the
finite-level evidence is the ratio table dim GF_m / dim GE_m together
with PSD certificates jmath^E_{l,m}(P_{F,l}) <= P_{F,m}, whose traces
tie consecutive ratios together.  Gieseker comparisons work on exact
Hilbert polynomials instead.
"""

from fractions import Fraction

import numpy as np

from . import bundles as bundles_mod
from . import quotient as quotient_mod
from ._linalg import eigh_desc, op_norm
from .errors import ContainmentViolation
from .reports import Report

CONTAIN_TOL = 1e-9
PSD_TOL = 1e-9
TRACE_TOL = 1e-10
EQUALITY_TOL = 1e-9


def _levels(m_range):
    if isinstance(m_range, str):
        lo, hi = m_range.split("..")
        return list(range(int(lo), int(hi) + 1))
    m_range = list(m_range)
    if len(m_range) == 2 and m_range[1] - m_range[0] > 1:
        return list(range(m_range[0], m_range[1] + 1))
    return m_range


def _as_quotient(obj):
    if isinstance(obj, bundles_mod.BundleSpec):
        return obj.quotient_realization()
    return obj


def guo_check(e, f, m_range):
    """Ratio table and PSD certificates for a quotient pair F of E.

    Checks range(P_{F,m}) within range(P_{E,m}) first, then tabulates
    r(m) = dim GF_m / dim GE_m, certifies jmath^E_{l,m}(P_{F,l}) <=
    P_{F,m} for every level pair in range, and verifies the trace
    intertwining phi^E_m(jmath(P_{F,l})) = r(l).  Verdict is GUO-PASS
    when the ratios never increase; strictness and the
    subbundle/direct-summand equality case are flagged.
    """
    e, f = _as_quotient(e), _as_quotient(f)
    if f.model is not e.model or f.nmat != e.nmat:
        raise ValueError("quotient pair must live on one model with equal N")
    ms = _levels(m_range)
    rows = []
    ratios = {}
    compressed = {}
    for m in ms:
        pe, pf = e.projection(m), f.projection(m)
        leak = op_norm(pf - pe @ pf)
        if leak > CONTAIN_TOL:
            raise ContainmentViolation(
                "range of P_F at level %d leaves P_E by %.3g" % (m, leak)
            )
        ratios[m] = Fraction(f.dim(m), e.dim(m))
        compressed[m] = e.compress(pf, m)
        rows.append(
            {
                "m": m,
                "dimF": f.dim(m),
                "dimE": e.dim(m),
                "ratio": float(ratios[m]),
                "ratioExact": str(ratios[m]),
                "containment": leak,
            }
        )
    monotone = all(ratios[a] >= ratios[b] for a, b in zip(ms, ms[1:]))
    strict = all(ratios[a] > ratios[b] for a, b in zip(ms, ms[1:]))
    equality = all(ratios[m] == ratios[ms[0]] for m in ms)
    certs = []
    worst_eig = 0.0
    worst_trace = 0.0
    worst_equal = 0.0
    for i, m in enumerate(ms):
        for l in ms[i + 1 :]:
            down = quotient_mod.jmath(e, compressed[l], l, m)
            gap = compressed[m] - down
            vals, _ = eigh_desc(gap)
            worst_eig = min(worst_eig, float(vals[-1]))
            worst_equal = max(worst_equal, float(op_norm(gap)))
            tr = quotient_mod.normalized_trace(e, down, m)
            worst_trace = max(worst_trace, abs(tr - float(ratios[l])))
            certs.append({"m": m, "l": l, "minEig": float(vals[-1]),
                          "traceError": abs(tr - float(ratios[l]))})
    psd_ok = worst_eig >= -PSD_TOL
    trace_ok = worst_trace <= TRACE_TOL
    consistent = monotone or not psd_ok
    if equality and worst_equal < EQUALITY_TOL:
        certificate = "GUO-PASS (equality; subbundle/direct summand)"
    elif monotone and strict:
        certificate = "GUO-PASS (strict)"
    elif monotone:
        certificate = "GUO-PASS"
    else:
        certificate = "GUO-FAIL"
    verdict = "PASS" if monotone and psd_ok and trace_ok and consistent else "FAIL"
    return Report(
        check="guo",
        per_level=rows,
        verdict=verdict,
        fit={
            "certificate": certificate,
            "strict": strict,
            "equality": equality,
            "minEig": worst_eig,
            "maxTraceError": worst_trace,
            "pairs": certs,
            "consistent": consistent,
        },
        meta={"model": e.model.config(), "e": e.config(), "f": f.config(),
              "mRange": [ms[0], ms[-1]]},
    )


def _reduced_poly(obj, window, side):
    """Exact chi(m)/rank as power-basis Fractions, with the rank."""
    fit = bundles_mod.hilbert_poly(obj, window)
    if isinstance(obj, bundles_mod.BundleSpec):
        rank = obj.rank
        model = obj.model
    else:
        model = obj.model
        base = bundles_mod.hilbert_poly(
            quotient_mod.trivial_quotient(model), window
        )
        if fit.degree < base.degree:
            rank = 0
        else:
            rank = fit.leading / base.leading
    if rank == 0:
        raise ValueError("%s has rank 0; Gieseker ratio undefined" % side)
    coeffs = [Fraction(c) / rank for c in fit.power]
    return coeffs, rank, fit


def gieseker_table(e, f, m_range):
    """Compare reduced Hilbert polynomials chi(m)/rank of F against E.

    Both sides are fitted exactly over the window; the verdict follows
    the highest-degree coefficient where the reduced polynomials differ
    (the m >> 0 inequality), with equality allowed.
    """
    ms = _levels(m_range)
    window = (ms[0], ms[-1])
    pf, rank_f, fit_f = _reduced_poly(f, window, "F")
    pe, rank_e, fit_e = _reduced_poly(e, window, "E")
    deg = max(len(pf), len(pe))
    pf = pf + [Fraction(0)] * (deg - len(pf))
    pe = pe + [Fraction(0)] * (deg - len(pe))
    direction = "equal"
    for d in range(deg - 1, -1, -1):
        if pf[d] != pe[d]:
            direction = "F<E" if pf[d] < pe[d] else "F>E"
            break
    rows = [
        {
            "m": m,
            "reducedF": float(sum(c * m**d for d, c in enumerate(pf))),
            "reducedE": float(sum(c * m**d for d, c in enumerate(pe))),
        }
        for m in ms
    ]
    return Report(
        check="gieseker",
        per_level=rows,
        verdict="PASS" if direction in ("F<E", "equal") else "FAIL",
        fit={
            "direction": direction,
            "strict": direction == "F<E",
            "reducedF": [str(c) for c in pf],
            "reducedE": [str(c) for c in pe],
            "rankF": str(rank_f),
            "rankE": str(rank_e),
            "chiF": fit_f.to_dict(),
            "chiE": fit_e.to_dict(),
        },
        meta={"mRange": [ms[0], ms[-1]]},
    )
