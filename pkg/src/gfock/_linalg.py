"""Small dense linear-algebra helpers shared across modules."""

import numpy as np

from .errors import NoSpectralGap


def op_norm(a):
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(np.atleast_2d(a), 2))


def herm(a):
    return 0.5 * (a + a.conj().T)


def fix_phases(cols, tol=1e-8):
    """Rotate each column so its first significant entry is real positive.

    Makes eigenvector/nullspace bases reproducible up to the underlying
    LAPACK output; columns that are numerically zero are left alone.
    """
    cols = np.array(cols, dtype=complex, copy=True)
    for j in range(cols.shape[1]):
        col = cols[:, j]
        mags = np.abs(col)
        top = mags.max(initial=0.0)
        if top == 0.0:
            continue
        idx = int(np.argmax(mags > tol * top))
        piv = col[idx]
        cols[:, j] = col * (piv.conjugate() / abs(piv))
    return cols


def eigh_desc(a):
    """Hermitian eigendecomposition, eigenvalues descending, phases fixed."""
    w, v = np.linalg.eigh(herm(a))
    w = w[::-1]
    v = v[:, ::-1]
    return w, fix_phases(v)


def inv_sqrt_psd(a, floor=0.0):
    w, v = np.linalg.eigh(herm(a))
    if floor and w.min() <= floor:
        raise np.linalg.LinAlgError("matrix not safely positive definite")
    return (v / np.sqrt(w)) @ v.conj().T


def sqrt_psd(a):
    w, v = np.linalg.eigh(herm(a))
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def range_cluster(vals, min_ratio=10.0, zero_floor=1e-12, rel_floor=1e-10):
    """How many leading eigenvalues are strictly positive (the range).

    ``vals`` must be sorted descending.  Everything above the relative
    floor ``rel_floor * max`` counts as the range; when a zero cluster is
    present the drop into it must have ratio at least ``min_ratio`` or
    NoSpectralGap is raised (the range is then not numerically certified).

    Returns (count_retained, gap_ratio); the ratio is inf for a strictly
    positive spectrum.
    """
    lam = np.clip(np.asarray(vals, dtype=float), 0.0, None)
    if lam.size == 0 or lam[0] <= zero_floor:
        raise NoSpectralGap("spectrum is numerically zero")
    fl = max(zero_floor, rel_floor * lam[0])
    count = int(np.sum(lam > fl))
    if count == lam.size:
        return count, float("inf")
    ratio = lam[count - 1] / max(lam[count], fl)
    if ratio < min_ratio:
        raise NoSpectralGap(
            "spectral drop ratio %.3g below threshold %.3g" % (ratio, min_ratio)
        )
    return count, float(ratio)


def top_cluster(vals, min_ratio=1.8, zero_floor=1e-12, rel_floor=1e-10):
    """How many leading eigenvalues form the top cluster.

    Scans downward from the largest eigenvalue and cuts at the first
    consecutive ratio exceeding ``min_ratio`` (the power-limit cluster).
    Returns (count_retained, gap_ratio); raises NoSpectralGap when the
    spectrum never drops.
    """
    lam = np.clip(np.asarray(vals, dtype=float), 0.0, None)
    if lam.size == 0:
        raise NoSpectralGap("empty spectrum")
    if lam[0] <= zero_floor:
        return 0, float("inf")
    if lam.size == 1:
        return 1, float("inf")
    fl = max(zero_floor, rel_floor * lam[0])
    for i in range(1, lam.size):
        r = lam[i - 1] / max(lam[i], fl)
        if r >= min_ratio:
            return i, float(r)
    if lam[-1] > 0.5 * lam[0]:
        return lam.size, float("inf")
    raise NoSpectralGap("no eigenvalue gap isolates a top cluster")
