"""Vector bundle presets over orbit models.

A :class:`BundleSpec` binds a model to one of the equivariant presets —
line bundles O(k), direct sums, the twisted tangent bundle T(-1) on
projective space — or to a custom graded quotient.  It produces the
canonical metric symbol, the graded-quotient realization whose level-m
projection has rank chi(E(m)), the exact Hilbert polynomial of that
integer sequence, and the balance constants c_{E,m} = n_m rank / chi(E(m)).
"""

from fractions import Fraction

import numpy as np

from . import intpoly, quotient, symbols


class BundleSpec:
    """A bundle preset bound to an orbit model.

    Use the constructors :func:`line`, :func:`direct_sum`,
    :func:`tangent_twist`, :func:`custom_quotient` rather than calling
    this directly.
    """

    def __init__(self, model, kind, k=None, parts=None, quot=None, metric=None, rank=None):
        self.model = model
        self.kind = kind
        self.k = k
        self.parts = tuple(parts) if parts is not None else None
        self._quotient = quot
        self._metric = metric
        self._rank = rank

    @property
    def rank(self):
        if self._rank is None:
            if self.kind == "line":
                self._rank = 1
            elif self.kind == "tangent_twist":
                self._rank = self.model.n - 1
            elif self.kind == "direct_sum":
                self._rank = sum(p.rank for p in self.parts)
            else:
                self._rank = _rank_from_growth(self.quotient_realization())
        return self._rank

    def metric_symbol(self):
        """The canonical equivariant metric as a pointwise-projection symbol."""
        if self._metric is not None:
            return self._metric
        if self.kind == "line":
            self._metric = symbols.fs_symbol(self.model, self.k)
        elif self.kind == "tangent_twist":
            self._metric = _tangent_metric(self.model)
        elif self.kind == "direct_sum":
            out = self.parts[0].metric_symbol()
            for p in self.parts[1:]:
                out = symbols.direct_sum(out, p.metric_symbol())
            self._metric = out
        else:
            raise ValueError("custom quotient carries no canonical metric")
        return self._metric

    def quotient_realization(self):
        """The graded quotient whose level-m projection has rank chi(E(m))."""
        if self._quotient is None:
            if self.kind == "tangent_twist":
                gens = [["z%d" % (i + 1) for i in range(self.model.n)]]
                self._quotient = quotient.from_submodule_generators(
                    self.model, self.model.n, gens
                )
            else:
                self._quotient = quotient.from_toeplitz_range(self.metric_symbol())
        return self._quotient

    def hilbert(self, m_max):
        """chi(E(m)) for m = 0..m_max, as exact integers."""
        q = self.quotient_realization()
        return [q.dim(m) for m in range(m_max + 1)]

    def config(self):
        if self.kind == "line":
            return {"kind": "line", "k": self.k}
        if self.kind == "direct_sum":
            return {"kind": "direct_sum", "parts": [p.config() for p in self.parts]}
        if self.kind == "tangent_twist":
            return {"kind": "tangent_twist"}
        return {"kind": "custom", "quotient": self._quotient.config()}

    def label(self):
        if self.kind == "line":
            return "line:%d" % self.k
        if self.kind == "direct_sum":
            return "+".join(p.label() for p in self.parts)
        return self.kind


def line(model, k):
    if k < 0:
        raise ValueError("line bundle twist must be nonnegative")
    return BundleSpec(model, "line", k=int(k))


def direct_sum(*parts):
    if not parts:
        raise ValueError("direct sum needs at least one part")
    model = parts[0].model
    if any(p.model is not model for p in parts):
        raise ValueError("direct-sum parts live on different models")
    flat = []
    for p in parts:
        flat.extend(p.parts if p.kind == "direct_sum" else (p,))
    return BundleSpec(model, "direct_sum", parts=flat)


def tangent_twist(model):
    if model.ideal:
        raise ValueError("tangent twist preset needs full projective space")
    if model.n < 2:
        raise ValueError("tangent twist needs at least two variables")
    return BundleSpec(model, "tangent_twist")


def custom_quotient(q, metric=None, rank=None):
    return BundleSpec(q.model, "custom", quot=q, metric=metric, rank=rank)


def _tangent_metric(model):
    # Pointwise 1 - zeta zeta^H: kernel is the tautological line, so the
    # quotient's sections are those of the Euler-complement twist T(-1).
    eye = np.eye(model.n)
    a = np.einsum("ab,ij->baij", eye, eye) - np.einsum("bi,aj->baij", eye, eye)
    return symbols.Symbol(model, 1, a)


def _rank_from_growth(q, m_max=8):
    rep = quotient.arveson_rank(q, m_max)
    lim = rep.fit.get("limitExact")
    if lim is None or Fraction(lim) != rep.fit["nearestInt"]:
        raise ValueError("quotient growth does not give an integer rank")
    return int(rep.fit["nearestInt"])


class HilbertFit:
    """Exact polynomial fit of an integer dimension sequence.

    Attributes
    ----------
    coeffs : list of int
        Finite-difference (binomial basis) coefficients at ``m0 = onset``.
    power : list of Fraction
        The same polynomial in the power basis, exact.
    degree : int
    onset : int
        First level from which the sequence agrees with the polynomial.
    window : (int, int)
        Levels used (inclusive); the last ``held_out`` were verification
        points not used in the fit.
    """

    def __init__(self, coeffs, power, degree, onset, window, held_out):
        self.coeffs = coeffs
        self.power = power
        self.degree = degree
        self.onset = onset
        self.window = window
        self.held_out = held_out

    def __call__(self, m):
        return intpoly.binomial_eval(self.coeffs, self.onset, m)

    @property
    def leading(self):
        return intpoly.leading_fraction(self.coeffs)

    def to_dict(self):
        return {
            "degree": self.degree,
            "onset": self.onset,
            "window": list(self.window),
            "heldOut": self.held_out,
            "binomialCoeffs": list(self.coeffs),
            "powerCoeffs": [Fraction(c) for c in self.power],
        }


HELD_OUT = 2


def hilbert_poly(obj, m_window):
    """Fit chi(E(m)) exactly as an integer-valued polynomial.

    Parameters
    ----------
    obj : BundleSpec or GradedQuotient
    m_window : int or (int, int)
        Highest level, or an inclusive (low, high) window of levels.

    The last two window values are held out of the fit and must be
    reproduced exactly; the reported onset is the first level from which
    every value matches.  Raises ValueError for a non-polynomial sequence.
    """
    lo, hi = (0, m_window) if np.isscalar(m_window) else m_window
    if hi - lo + 1 < HELD_OUT + 2:
        raise ValueError("window too short: need at least %d levels" % (HELD_OUT + 2))
    q = obj.quotient_realization() if isinstance(obj, BundleSpec) else obj
    dims = {m: q.dim(m) for m in range(lo, hi + 1)}
    fit_hi = hi - HELD_OUT
    for onset in range(lo, fit_hi):
        values = [dims[m] for m in range(onset, fit_hi + 1)]
        try:
            coeffs, degree = intpoly.fit_integer_poly(values, onset)
        except ValueError:
            continue
        if all(
            intpoly.binomial_eval(coeffs, onset, m) == dims[m]
            for m in range(fit_hi + 1, hi + 1)
        ):
            while onset > lo and intpoly.binomial_eval(coeffs, onset, onset - 1) == dims[onset - 1]:
                onset -= 1
            return HilbertFit(
                coeffs,
                intpoly.power_coeffs(coeffs, onset),
                degree,
                onset,
                (lo, hi),
                HELD_OUT,
            )
    raise ValueError("non-polynomial sequence on levels %d..%d" % (lo, hi))


def c_constant(spec, m):
    """The exact rational balance constant n_m rank / chi(E(m))."""
    chi = spec.quotient_realization().dim(m)
    if chi == 0:
        raise ValueError("chi(E(%d)) vanishes" % m)
    return Fraction(spec.model.dim_at(m) * spec.rank, chi)


def parse_bundle(model, text):
    """Parse CLI bundle labels: ``line:k``, ``tangent_twist``, sums via ``+``."""
    parts = []
    for piece in text.split("+"):
        piece = piece.strip()
        if piece.startswith("line:"):
            try:
                k = int(piece[5:])
            except ValueError:
                raise ValueError("bad line bundle %r" % piece) from None
            parts.append(line(model, k))
        elif piece == "tangent_twist":
            parts.append(tangent_twist(model))
        else:
            raise ValueError("unknown bundle %r" % piece)
    return parts[0] if len(parts) == 1 else direct_sum(*parts)


def bundle_from_config(model, cfg):
    kind = cfg.get("kind")
    if kind == "line":
        return line(model, int(cfg["k"]))
    if kind == "direct_sum":
        return direct_sum(*(bundle_from_config(model, c) for c in cfg["parts"]))
    if kind == "tangent_twist":
        return tangent_twist(model)
    if kind == "custom":
        q = quotient.quotient_from_config(model, cfg["quotient"])
        metric = cfg.get("metric")
        if metric is not None:
            metric = symbols.parse_symbol(model, metric)
        return custom_quotient(q, metric=metric)
    raise ValueError("unknown bundle kind %r" % kind)
