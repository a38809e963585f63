"""Exact integer-valued polynomial interpolation on consecutive integers.

Integer-valued polynomials are carried in the binomial basis
p(m) = sum_j c_j * binom(m - m0, j) with integer coefficients c_j (the
forward differences at m0), which keeps every operation exact.
"""

from fractions import Fraction
from math import comb


def forward_differences(values):
    """Forward-difference coefficients c_j of the sequence at its start."""
    diffs = [list(values)]
    while len(diffs[-1]) > 1:
        row = diffs[-1]
        diffs.append([b - a for a, b in zip(row, row[1:])])
    return [row[0] for row in diffs]


def binomial_eval(coeffs, m0, m):
    """Evaluate sum_j coeffs[j] * binom(m - m0, j); exact for int inputs."""
    x = m - m0
    total = 0
    for j, c in enumerate(coeffs):
        if c:
            total += c * comb(x, j) if x >= 0 else c * _comb_int(x, j)
    return total


def _comb_int(x, j):
    num = 1
    for i in range(j):
        num *= x - i
    den = 1
    for i in range(1, j + 1):
        den *= i
    return Fraction(num, den) if num % den else num // den


def fit_integer_poly(values, m0, max_degree=None):
    """Interpolating polynomial of an integer sequence on m0, m0+1, ...

    Returns (coeffs, degree) in the binomial basis anchored at m0, with
    trailing zero differences trimmed.  Raises ValueError when the sequence
    needs a higher degree than ``max_degree`` to interpolate (i.e. the
    (max_degree+1)-th differences are not identically zero).
    """
    coeffs = forward_differences(values)
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    degree = len(coeffs) - 1
    if max_degree is not None and degree > max_degree:
        raise ValueError(
            "sequence is not a polynomial of degree <= %d on the window" % max_degree
        )
    return coeffs, degree


def power_coeffs(coeffs, m0):
    """Convert binomial-basis coefficients at m0 to exact power-basis ones.

    Uses binom(m - m0, j) = (1/j!) * prod_{i<j} (m - m0 - i).
    """
    out = [Fraction(0)] * len(coeffs)
    fact = 1
    for j, c in enumerate(coeffs):
        if j > 0:
            fact *= j
        if c:
            for i, v in enumerate(_falling(m0, j)):
                out[i] += Fraction(c, fact) * v
    return out


def _falling(m0, j):
    """Power-basis coefficients of prod_{i=0}^{j-1}(m - m0 - i)."""
    poly = [Fraction(1)]
    for i in range(j):
        root = m0 + i
        poly = [Fraction(0)] + poly
        poly = [poly[k] - root * (poly[k + 1] if k + 1 < len(poly) else 0)
                for k in range(len(poly))]
    return poly


def leading_fraction(coeffs):
    """Leading power-basis coefficient c_d/d! of a binomial-basis polynomial."""
    d = len(coeffs) - 1
    fact = 1
    for i in range(1, d + 1):
        fact *= i
    return Fraction(coeffs[d], fact)
