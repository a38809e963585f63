"""Exact symbol calculus on a variety model.

A symbol is a matrix-valued function on the variety's sphere slice stored
at a level k as an operator block A on GH_k (x) C^N; the function it
represents is

    value(zeta)[i, j] = sum_{a,b} A[b, a, i, j] psi_b(zeta) conj(psi_a(zeta)).

All integration against the invariant state reduces to Fock projections of
polynomial products at the concatenated degree; nothing in this module uses
numerical quadrature.
"""

import numpy as np

from . import polyparse
from .errors import OffVarietyPoint, PolynomialParseError

EVAL_TOL = 1e-8


class Symbol:
    """A level-k representative of a matrix-valued function on the variety.

    Parameters
    ----------
    model : SpaceModel
        The ambient variety model.
    level : int
        Holomorphic/antiholomorphic degree k of the representative.
    a : ndarray
        Coefficient block, shape (n_k, n_k, N, N); ``a[b, a]`` multiplies
        ``psi_b * conj(psi_a)``.

    Symbols are immutable; all operations return new instances.
    """

    def __init__(self, model, level, a):
        a = np.asarray(a, dtype=complex)
        if a.ndim == 2:
            a = a[:, :, None, None]
        if a.ndim != 4 or a.shape[0] != a.shape[1] or a.shape[2] != a.shape[3]:
            raise ValueError("symbol block must have shape (nk, nk, N, N)")
        if a.shape[0] != model.dim_at(level):
            raise ValueError(
                "block size %d does not match dim GH_%d = %d"
                % (a.shape[0], level, model.dim_at(level))
            )
        self.model = model
        self.level = level
        self.a = a
        self.a.setflags(write=False)

    @property
    def nmat(self):
        return self.a.shape[2]

    @property
    def hermitian(self):
        return np.allclose(self.a, self.a.conj().transpose(1, 0, 3, 2), atol=1e-12)

    def matrix(self):
        """The block as an operator on GH_k (x) C^N, index (a, i) -> a*N + i."""
        return flatten_block(self.a)

    def __add__(self, other):
        a, b = align(self, other)
        return Symbol(a.model, a.level, a.a + b.a)

    def __sub__(self, other):
        a, b = align(self, other)
        return Symbol(a.model, a.level, a.a - b.a)

    def __mul__(self, scalar):
        return Symbol(self.model, self.level, self.a * complex(scalar))

    __rmul__ = __mul__

    def __repr__(self):
        return "Symbol(level=%d, N=%d, model=%s)" % (
            self.level,
            self.nmat,
            self.model.preset or "custom",
        )


def flatten_block(a):
    nk, _, nmat, _ = a.shape
    return np.ascontiguousarray(a.transpose(0, 2, 1, 3)).reshape(nk * nmat, nk * nmat)


def unflatten_block(mat, nk, nmat):
    return np.asarray(mat, dtype=complex).reshape(nk, nmat, nk, nmat).transpose(0, 2, 1, 3)


def identity_symbol(model, nmat=1, level=0):
    eye_k = np.eye(model.dim_at(level))
    eye_n = np.eye(nmat)
    return Symbol(model, level, np.einsum("ba,ij->baij", eye_k, eye_n))


def fs_symbol(model, k):
    """The rank-one coherent-projection family at level k, as an N=n_k symbol.

    Its pointwise value at zeta is the projection onto the coherent (dual
    tautological) direction: value[i, j] = conj(psi_i(zeta)) psi_j(zeta).
    """
    eye = np.eye(model.dim_at(k))
    return Symbol(model, k, np.einsum("ai,bj->baij", eye, eye))


def align(s, t, level=None):
    """Promote two symbols on one model to a common level."""
    if s.model is not t.model:
        raise ValueError("symbols live on different models")
    if level is None:
        level = max(s.level, t.level)
    return promote(s, level), promote(t, level)


def promote(s, l):
    """Re-represent a symbol at a higher level without changing its values.

    Conjugates the block by the isometric level splitting
    GH_l -> GH_k (x) GH_{l-k}; the pointwise function is unchanged.
    """
    if l < s.level:
        raise ValueError("cannot promote level %d to lower level %d" % (s.level, l))
    if l == s.level:
        return s
    pair = s.model.pair_tensor(s.level, l)
    return Symbol(s.model, l, np.einsum("ecfd,cdij->efij", pair, s.a))


def mul(s, t):
    """Pointwise product of two symbols, represented at level k+l.

    The matrix parts multiply; the scalar parts combine through the level
    splitting of GH_{k+l}, so evaluate(mul(s, t)) = evaluate(s) @ evaluate(t)
    on the variety.
    """
    if s.model is not t.model:
        raise ValueError("symbols live on different models")
    if s.nmat != t.nmat:
        raise ValueError("matrix sizes differ: %d vs %d" % (s.nmat, t.nmat))
    m = s.model.mul_tensor(s.level, t.level)
    a = np.einsum("ecd,fgh,cgik,dhkj->efij", m, m.conj(), s.a, t.a, optimize=True)
    return Symbol(s.model, s.level + t.level, a)


def direct_sum(s, t):
    s, t = align(s, t)
    nk = s.a.shape[0]
    n1, n2 = s.nmat, t.nmat
    a = np.zeros((nk, nk, n1 + n2, n1 + n2), dtype=complex)
    a[:, :, :n1, :n1] = s.a
    a[:, :, n1:, n1:] = t.a
    return Symbol(s.model, s.level, a)


def evaluate(s, points, normalized=False):
    """Pointwise values of a symbol; (npts, N, N) (or (N, N) for one point).

    Parameters
    ----------
    s : Symbol
    points : array_like
        Points on the variety.  Without ``normalized`` they must lie on the
        unit sphere slice; with it, anywhere on the cone away from 0 (the
        value is divided by the squared coherent norm, which rescales the
        point back to the sphere).
    normalized : bool
        Divide by sum_a |psi_a|^2 instead of requiring unit norm.

    Raises
    ------
    OffVarietyPoint
        If a point leaves the variety (or the sphere slice) beyond 1e-8.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=complex))
    scale = np.linalg.norm(pts, axis=1)
    resid = s.model.variety_residual(pts)
    bad = resid > EVAL_TOL * np.maximum(scale, 1.0) ** max(
        (polyparse.poly_degree(g) for g in s.model.ideal), default=1
    )
    if bad.any():
        raise OffVarietyPoint("point %d leaves the variety (residual %.3g)"
                              % (int(np.argmax(bad)), float(resid.max())))
    vals = s.model.basis_values(s.level, pts)
    out = np.einsum("pb,pa,baij->pij", vals, vals.conj(), s.a)
    if normalized:
        den = (np.abs(vals) ** 2).sum(axis=1)
        if np.any(den < 1e-300):
            raise OffVarietyPoint("point too close to the cone tip")
        out = out / den[:, None, None]
    elif np.abs(scale - 1.0).max() > EVAL_TOL:
        raise OffVarietyPoint(
            "point off the unit sphere by %.3g" % float(np.abs(scale - 1.0).max())
        )
    return out[0] if np.asarray(points).ndim == 1 else out


def haar_state(s):
    """Invariant integral of the symbol; an N x N matrix."""
    return np.einsum("aaij->ij", s.a) / s.model.dim_at(s.level)


def toeplitz(s, m):
    """Compression of a symbol to level m: the operator with entries

        T[(b,i),(a,j)] = n_m * omega(value_{ij} * psi_a * conj(psi_b)),

    evaluated exactly through Fock projections at degree k+m.  Returns a
    matrix on GH_m (x) C^N (index (a, i) -> a*N + i).
    """
    model = s.model
    k = s.level
    w = model.omega_tensor(k, m)
    t4 = np.einsum("cdij,cadb->baij", s.a, w, optimize=True)
    t4 *= model.dim_at(m) / model.dim_at(k + m)
    return flatten_block(t4)


def covariant_symbol(model, x, m, nmat=1):
    """Wrap an operator on GH_m (x) C^N as the symbol it represents."""
    x = np.asarray(x, dtype=complex)
    if x.ndim == 4:
        return Symbol(model, m, x)
    nk = model.dim_at(m)
    if x.shape != (nk * nmat, nk * nmat):
        raise ValueError("expected a %d x %d operator" % (nk * nmat, nk * nmat))
    return Symbol(model, m, unflatten_block(x, nk, nmat))


def berezin_transform(s, m):
    """The symbol of the level-m compression of s (heat-kernel smoothing)."""
    return covariant_symbol(s.model, toeplitz(s, m), m, s.nmat)


def calculus_report(model, m_max, pairs=50, seed=20240601, tol=1e-10):
    """Unitality and trace-adjointness healthcheck of the level calculus.

    Per level m <= m_max this records ||T(1)|_m - 1|| and, over ``pairs``
    random (f, X) pairs spread across the levels (alternating matrix size
    1 and 2), the defect |phi_m(T(f)X) - omega(f varsigma(X))|; PASS iff
    everything stays below ``tol``.
    """
    from .reports import Report

    rng = np.random.default_rng(seed)
    levels = list(range(1, m_max + 1))
    unit = {}
    adj = {m: 0.0 for m in levels}
    count = {m: 0 for m in levels}
    for m in levels:
        nm = model.dim_at(m)
        unit[m] = float(
            np.abs(toeplitz(identity_symbol(model), m) - np.eye(nm)).max()
        )
    for t in range(pairs):
        m = levels[t % len(levels)]
        nmat = 1 + (t // len(levels)) % 2
        n1, nm = model.dim_at(1), model.dim_at(m)
        a = rng.standard_normal((n1, n1, nmat, nmat)) + 1j * rng.standard_normal(
            (n1, n1, nmat, nmat)
        )
        f = Symbol(model, 1, a)
        x = rng.standard_normal((nm * nmat, nm * nmat)) + 1j * rng.standard_normal(
            (nm * nmat, nm * nmat)
        )
        lhs = np.trace(toeplitz(f, m) @ x) / nm
        rhs = np.trace(haar_state(mul(f, covariant_symbol(model, x, m, nmat))))
        adj[m] = max(adj[m], abs(lhs - rhs))
        count[m] += 1
    rows = [
        {"m": m, "unitality": unit[m], "adjointness": adj[m], "pairs": count[m]}
        for m in levels
    ]
    worst = max(max(unit.values()), max(adj.values()))
    return Report(
        check="calculus",
        per_level=rows,
        verdict="PASS" if worst < tol else "FAIL",
        fit={"maxDefect": worst, "pairs": pairs, "tol": tol},
        meta={"model": model.config(), "mMax": m_max, "seed": seed},
    )


def parse_symbol(model, text):
    """Build a symbol from a literal.

    Accepted forms:

    * a polynomial in ``z1..zn`` and ``conj(z1)..conj(zn)`` in which every
      term has balanced bidegree (equal holomorphic and antiholomorphic
      degree), e.g. ``"z1*conj(z1) - 0.5*z2*conj(z2)"``;
    * ``"identity N"`` — the constant identity of matrix size N;
    * ``"fs_line_bundle k"`` — the coherent projection family at level k.

    Returns
    -------
    Symbol
    """
    text = text.strip()
    parts = text.split()
    if len(parts) == 2 and parts[0] in ("identity", "fs_line_bundle"):
        try:
            arg = int(parts[1])
        except ValueError:
            raise PolynomialParseError("bad argument in %r" % text) from None
        if arg < 0:
            raise PolynomialParseError("argument must be nonnegative in %r" % text)
        if parts[0] == "identity":
            return identity_symbol(model, nmat=max(arg, 1))
        return fs_symbol(model, arg)
    terms = polyparse.parse_bidegree(text, model.n)
    by_level = {}
    for (alpha, beta), c in terms.items():
        if sum(alpha) != sum(beta):
            raise PolynomialParseError(
                "term with bidegree (%d, %d) is not balanced" % (sum(alpha), sum(beta))
            )
        k = sum(alpha)
        lvl = model.level(k)
        ca = lvl.fock_coords(_monomial_ambient(lvl, alpha))
        cb = lvl.fock_coords(_monomial_ambient(lvl, beta))
        blk = by_level.setdefault(k, np.zeros((lvl.dim, lvl.dim), dtype=complex))
        blk += c * np.outer(ca, cb.conj())
    if not by_level:
        return Symbol(model, 0, np.zeros((1, 1), dtype=complex))
    top = max(by_level)
    out = None
    for k, blk in sorted(by_level.items()):
        part = promote(Symbol(model, k, blk), top)
        out = part if out is None else out + part
    return out


def _monomial_ambient(lvl, alpha):
    amb = np.zeros(lvl.amb_dim)
    amb[lvl.index[tuple(alpha)]] = 1.0
    return amb
