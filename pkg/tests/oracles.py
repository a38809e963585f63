"""Independent closed-form references used to freeze expected test values.

Everything here is computed from first principles — factorial moments of
the sphere measure, exact Macaulay-matrix ranks over QQ, binomial Hilbert
functions — with no imports from the package under test.
"""

import itertools
import math
from fractions import Fraction

import sympy


def multi_factorial(alpha):
    out = 1
    for a in alpha:
        out *= math.factorial(a)
    return out


def fock_norm_sq(alpha):
    """Squared Fock norm of z^alpha at its level: alpha!/m!."""
    m = sum(alpha)
    return Fraction(multi_factorial(alpha), math.factorial(m))


def sphere_moment(n, alpha, beta=None):
    """Integral of z^alpha conj(z)^beta over the unit sphere of C^n.

    Normalized measure; nonzero only for alpha == beta, where it equals
    alpha! (n-1)! / (m+n-1)!.
    """
    if beta is None:
        beta = alpha
    if tuple(alpha) != tuple(beta):
        return Fraction(0)
    m = sum(alpha)
    return Fraction(
        multi_factorial(alpha) * math.factorial(n - 1), math.factorial(m + n - 1)
    )


def monomial_exponents(n, m):
    """All exponent tuples of total degree m, graded-lex descending."""
    out = []

    def rec(prefix, rest, budget):
        if rest == 1:
            out.append(prefix + (budget,))
            return
        for a in range(budget, -1, -1):
            rec(prefix + (a,), rest - 1, budget - a)

    rec((), n, m)
    return out


def ambient_dim(n, m):
    return math.comb(m + n - 1, n - 1)


def quotient_dim(n, gens, m):
    """dim of degree-m part of QQ[z1..zn]/(gens), by exact Macaulay rank.

    ``gens`` are {exponent tuple: rational coefficient} dicts, homogeneous.
    """
    basis = monomial_exponents(n, m)
    index = {a: i for i, a in enumerate(basis)}
    rows = []
    for g in gens:
        deg = sum(next(iter(g)))
        if deg > m:
            continue
        for shift in monomial_exponents(n, m - deg):
            row = [0] * len(basis)
            for expo, coeff in g.items():
                tot = tuple(e + s for e, s in zip(expo, shift))
                row[index[tot]] = sympy.Rational(coeff)
            rows.append(row)
    if not rows:
        return len(basis)
    rank = sympy.Matrix(rows).rank()
    return len(basis) - rank


SEGRE_GENS = [{(1, 0, 0, 1): 1, (0, 1, 1, 0): -1}]          # z1 z4 - z2 z3
VERONESE_GENS = [{(0, 2, 0): 1, (1, 0, 1): -2}]              # z2^2 - 2 z1 z3


def line_chi(n, k, m):
    """chi(O(k)(m)) on the full ring in n variables: dim of degree m+k."""
    return ambient_dim(n, m + k)


def binom_sum_trace(dims, p, m):
    """sum_r (-1)^r C(p, r) n_{m+r} for a dimension sequence."""
    return sum((-1) ** r * math.comb(p, r) * dims[m + r] for r in range(p + 1))


def abel_min_levels(r, tol=1e-8):
    """Smallest M with (1-r^2) sum_{m>M} r^{2m} = r^{2(M+1)} <= tol."""
    mm = 0
    while r ** (2 * (mm + 1)) > tol:
        mm += 1
    return mm
