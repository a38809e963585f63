"""Graded levels of polynomial-ring quotients in the symmetric Fock metric.

A model is C[z1..zn] modulo a homogeneous ideal.  Each degree-m slice is
equipped with the Fock inner product (monomial z^alpha has squared norm
alpha!/m!) and represented by an orthonormal basis of the complement of the
ideal slice inside the ambient degree-m coefficient space.
"""

import math

import numpy as np

from . import polyparse
from ._linalg import fix_phases
from .errors import NoSamplerAvailable

COMPLEMENT_SVD_TOL = 1e-10

_mono_cache = {}


def monomials(n, m):
    """Degree-m exponent tuples in n variables, graded-lex descending.

    The order puts z1^m first and zn^m last, e.g. for n=2, m=2:
    (2,0), (1,1), (0,2).
    """
    key = (n, m)
    cached = _mono_cache.get(key)
    if cached is not None:
        return cached
    if n == 1:
        out = [(m,)]
    else:
        out = []
        for a in range(m, -1, -1):
            for rest in monomials(n - 1, m - a):
                out.append((a,) + rest)
    _mono_cache[key] = out
    return out


def fock_weights(basis):
    """Squared Fock norms alpha!/m! of the given degree-m monomials."""
    out = np.empty(len(basis))
    for i, alpha in enumerate(basis):
        m = sum(alpha)
        num = 1
        for a in alpha:
            num *= math.factorial(a)
        out[i] = num / math.factorial(m)
    return out


class FockLevel:
    """One graded level: ambient monomials, Fock weights, quotient basis.

    Attributes
    ----------
    m : int
        Degree of the level.
    basis : list of tuple
        Ambient monomial exponents in graded-lex order.
    index : dict
        Exponent tuple -> position in ``basis``.
    weights : ndarray
        Diagonal of the Fock Gram matrix (alpha!/m!).
    onb : ndarray, shape (amb_dim, dim)
        Columns are ambient coefficient vectors of a Fock-orthonormal
        basis of the quotient slice (orthogonal to the ideal slice).
    dim : int
        Dimension of the quotient slice.
    """

    def __init__(self, m, basis, weights, onb):
        self.m = m
        self.basis = basis
        self.index = {alpha: i for i, alpha in enumerate(basis)}
        self.weights = weights
        self.onb = onb
        self.dim = onb.shape[1]

    @property
    def amb_dim(self):
        return len(self.basis)

    def fock_coords(self, amb_coeffs):
        """Coordinates of an ambient coefficient vector in the level basis.

        The input is projected onto the quotient slice:
        c_e = <f, psi_e>_Fock.
        """
        return self.onb.conj().T @ (self.weights * np.asarray(amb_coeffs))


class SpaceModel:
    """An ambient variable count plus a homogeneous ideal (possibly empty).

    Parameters
    ----------
    n : int
        Number of ambient variables z1..zn.
    ideal : sequence, optional
        Generators, each a polynomial string or ``{alpha: coeff}`` dict.
        Every generator must be homogeneous of degree >= 1.
    preset : str, optional
        Tag recorded for sampler dispatch ("projective", "segre11",
        "veronese_conic", or None for custom ideals).
    dim : int, optional
        Complex dimension of the projective variety; inferred from the
        growth of the level dimensions when omitted.
    sampler : callable, optional
        ``sampler(count, rng) -> ndarray (count, n)`` of boundary points;
        required to sample custom models.

    Levels, multiplication tensors and shift blocks are cached per model.
    """

    def __init__(self, n, ideal=(), preset=None, dim=None, sampler=None):
        self.n = int(n)
        if self.n < 1:
            raise ValueError("need at least one variable")
        gens = []
        for g in ideal or ():
            terms = polyparse.parse_holomorphic(g, self.n) if isinstance(g, str) else dict(g)
            deg = polyparse.require_homogeneous(terms, what="ideal generator")
            if deg < 1:
                raise ValueError("ideal generators must have degree >= 1")
            gens.append(terms)
        self.ideal = gens
        self.preset = preset
        self.sampler = sampler
        self._levels = {}
        self._mul = {}
        self._omega = {}
        self._pair = {}
        self._shifts = {}
        self._dim = dim

    # -- construction ---------------------------------------------------

    def level(self, m):
        lvl = self._levels.get(m)
        if lvl is None:
            lvl = self._build_level(m)
            self._levels[m] = lvl
        return lvl

    def _build_level(self, m):
        basis = monomials(self.n, m)
        weights = fock_weights(basis)
        cols = []
        for g in self.ideal:
            dg = polyparse.poly_degree(g)
            if dg > m:
                continue
            index = {alpha: i for i, alpha in enumerate(basis)}
            for mu in monomials(self.n, m - dg):
                col = np.zeros(len(basis), dtype=complex)
                for alpha, c in g.items():
                    tgt = tuple(x + y for x, y in zip(mu, alpha))
                    col[index[tgt]] += c
                cols.append(col)
        if not cols:
            onb = np.diag(1.0 / np.sqrt(weights)).astype(complex)
            return FockLevel(m, basis, weights, onb)
        w_half = np.sqrt(weights)
        span = w_half[:, None] * np.stack(cols, axis=1)
        u, s, _ = np.linalg.svd(span, full_matrices=True)
        rank = int(np.sum(s > COMPLEMENT_SVD_TOL * s[0]))
        comp = u[:, rank:]
        onb = fix_phases(comp / w_half[:, None])
        return FockLevel(m, basis, weights, onb)

    def dim_at(self, m):
        return self.level(m).dim

    def hilbert_function(self, m_max):
        return [self.dim_at(m) for m in range(m_max + 1)]

    @property
    def dim(self):
        """Complex dimension of the projective variety."""
        if self._dim is None:
            self._dim = self._infer_dim()
        return self._dim

    def _infer_dim(self):
        probe = max(6, 2 * max((polyparse.poly_degree(g) for g in self.ideal), default=1))
        seq = self.hilbert_function(probe + 3)
        diffs = list(seq)
        d = 0
        while d <= probe:
            tail = diffs[-4:]
            if all(x == tail[0] for x in tail):
                if tail[0] == 0:
                    return max(d - 1, 0)
                return d
            diffs = [b - a for a, b in zip(diffs, diffs[1:])]
            d += 1
        return self.n - 1

    # -- multiplication structure ---------------------------------------

    def mul_tensor(self, k, l):
        """Mul[e, c, b] = <psi_e^(k+l), psi_c^(k) * psi_b^(l)>_Fock.

        The adjoint of this tensor is the isometric level-splitting map
        GH_{k+l} -> GH_k (x) GH_l.
        """
        key = (k, l)
        cached = self._mul.get(key)
        if cached is not None:
            return cached
        lk, ll, lt = self.level(k), self.level(l), self.level(k + l)
        combine = np.empty((lk.amb_dim, ll.amb_dim), dtype=np.int64)
        for i, a in enumerate(lk.basis):
            for j, b in enumerate(ll.basis):
                combine[i, j] = lt.index[tuple(x + y for x, y in zip(a, b))]
        prod = np.zeros((lt.amb_dim, lk.dim, ll.dim), dtype=complex)
        for i in range(lk.amb_dim):
            np.add.at(prod, combine[i], lk.onb[i][None, :, None] * ll.onb[:, None, :])
        mul = np.einsum("ae,a,acb->ecb", lt.onb.conj(), lt.weights, prod)
        self._mul[key] = mul
        return mul

    def omega_tensor(self, k, l):
        """W[c, b, d, a] = n_{k+l} * omega(psi_c psi_b conj(psi_d psi_a)).

        Contraction kernel for Toeplitz compressions; cached.
        """
        key = (k, l)
        cached = self._omega.get(key)
        if cached is None:
            mul = self.mul_tensor(k, l)
            cached = np.einsum("ecb,eda->cbda", mul, mul.conj())
            self._omega[key] = cached
        return cached

    def pair_tensor(self, m, l):
        """G[e, c, f, d] = sum_b Mul[e,c,b] conj(Mul[f,d,b]) at split (m, l-m).

        Contraction kernel for operator promotion m -> l; cached.
        """
        key = (m, l)
        cached = self._pair.get(key)
        if cached is None:
            mul = self.mul_tensor(m, l - m)
            cached = np.einsum("ecb,fdb->ecfd", mul, mul.conj())
            self._pair[key] = cached
        return cached

    def basis_values(self, m, points):
        """psi_a(zeta) for the level-m basis at each point; (npts, dim)."""
        pts = np.atleast_2d(np.asarray(points, dtype=complex))
        lvl = self.level(m)
        powers = np.empty((pts.shape[0], self.n, m + 1), dtype=complex)
        powers[:, :, 0] = 1.0
        for e in range(1, m + 1):
            powers[:, :, e] = powers[:, :, e - 1] * pts
        amb = np.empty((pts.shape[0], lvl.amb_dim), dtype=complex)
        for j, alpha in enumerate(lvl.basis):
            val = np.ones(pts.shape[0], dtype=complex)
            for i, a in enumerate(alpha):
                if a:
                    val = val * powers[:, i, a]
            amb[:, j] = val
        return amb @ lvl.onb

    def coherent_coords(self, m, points):
        """Level-m coherent vectors p_m k_zeta in the level basis.

        Row per point; entry a is conj(psi_a(zeta)).  On the unit sphere of
        the variety these have norm exactly 1.
        """
        return self.basis_values(m, points).conj()

    # -- the variety ------------------------------------------------------

    def ideal_values(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=complex))
        vals = np.zeros((pts.shape[0], max(len(self.ideal), 1)), dtype=complex)
        for gi, g in enumerate(self.ideal):
            acc = np.zeros(pts.shape[0], dtype=complex)
            for alpha, c in g.items():
                term = np.full(pts.shape[0], c, dtype=complex)
                for i, a in enumerate(alpha):
                    if a:
                        term = term * pts[:, i] ** a
                acc += term
            vals[:, gi] = acc
        return vals

    def variety_residual(self, points):
        if not self.ideal:
            return np.zeros(np.atleast_2d(points).shape[0])
        return np.abs(self.ideal_values(points)).max(axis=1)

    def sample_boundary(self, count, seed=None, rng=None):
        """Points on the unit-sphere slice of the affine cone.

        Presets use exact algebraic parametrizations, so the points satisfy
        the ideal to machine precision and have unit norm.
        """
        if rng is None:
            rng = np.random.default_rng(seed)
        if self.preset == "projective" or (self.preset is None and not self.ideal):
            v = rng.standard_normal((count, self.n)) + 1j * rng.standard_normal((count, self.n))
            return v / np.linalg.norm(v, axis=1)[:, None]
        if self.preset == "segre11":
            u = rng.standard_normal((count, 2)) + 1j * rng.standard_normal((count, 2))
            v = rng.standard_normal((count, 2)) + 1j * rng.standard_normal((count, 2))
            u /= np.linalg.norm(u, axis=1)[:, None]
            v /= np.linalg.norm(v, axis=1)[:, None]
            out = np.empty((count, 4), dtype=complex)
            out[:, 0] = u[:, 0] * v[:, 0]
            out[:, 1] = u[:, 0] * v[:, 1]
            out[:, 2] = u[:, 1] * v[:, 0]
            out[:, 3] = u[:, 1] * v[:, 1]
            return out
        if self.preset == "veronese_conic":
            u = rng.standard_normal((count, 2)) + 1j * rng.standard_normal((count, 2))
            u /= np.linalg.norm(u, axis=1)[:, None]
            out = np.empty((count, 3), dtype=complex)
            out[:, 0] = u[:, 0] ** 2
            out[:, 1] = math.sqrt(2.0) * u[:, 0] * u[:, 1]
            out[:, 2] = u[:, 1] ** 2
            return out
        if self.sampler is not None:
            return np.asarray(self.sampler(count, rng), dtype=complex)
        raise NoSamplerAvailable(
            "no boundary sampler for a custom ideal; pass sampler= to the model"
        )

    def sample_interior(self, count, seed=None, rng=None, r_min=0.2, r_max=0.8):
        """Interior cone points r * zeta with r uniform in [r_min, r_max]."""
        if rng is None:
            rng = np.random.default_rng(seed)
        pts = self.sample_boundary(count, rng=rng)
        radii = rng.uniform(r_min, r_max, size=count)
        return pts * radii[:, None]

    def config(self):
        cfg = {"n": self.n}
        if self.preset:
            cfg["preset"] = self.preset
        if self.ideal:
            cfg["ideal"] = [polyparse.poly_to_string(g) for g in self.ideal]
        cfg["dim"] = self.dim
        return cfg


# -- presets -------------------------------------------------------------


def projective_space(n):
    """C[z1..zn] with zero ideal; the boundary is the unit sphere."""
    return SpaceModel(n, (), preset="projective", dim=n - 1)


def segre11():
    """Quadric z1*z4 = z2*z3 in four variables (products of two planes)."""
    return SpaceModel(4, ["z1*z4 - z2*z3"], preset="segre11", dim=2)


def veronese_conic():
    """Conic z2^2 = 2*z1*z3 in three variables (weighted squares map)."""
    return SpaceModel(3, ["z2^2 - 2*z1*z3"], preset="veronese_conic", dim=1)


_PRESETS = {
    "cp1": lambda: projective_space(2),
    "cp2": lambda: projective_space(3),
    "cp3": lambda: projective_space(4),
    "segre11": segre11,
    "veronese": veronese_conic,
    "veronese_conic": veronese_conic,
}


def from_preset(tag):
    key = tag.strip().lower()
    if key in _PRESETS:
        return _PRESETS[key]()
    if key.startswith("cp") and key[2:].isdigit():
        return projective_space(int(key[2:]) + 1)
    raise ValueError("unknown preset %r" % tag)


def model_from_config(cfg):
    """Build a model from a config dict ({"n", "ideal", "preset", "dim"})."""
    preset = cfg.get("preset")
    if preset:
        model = from_preset(preset)
        if "n" in cfg and int(cfg["n"]) != model.n:
            raise ValueError(
                "preset %r has n=%d, config says n=%s" % (preset, model.n, cfg["n"])
            )
        return model
    if "n" not in cfg:
        raise ValueError("model config needs 'n' or 'preset'")
    return SpaceModel(
        int(cfg["n"]),
        cfg.get("ideal", ()),
        dim=cfg.get("dim"),
    )
