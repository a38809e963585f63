"""Parsing of polynomial strings in z1..zn and conj(z1)..conj(zn).

Polynomials are stored as dicts mapping an exponent pair to a complex
coefficient: ``{(alpha, beta): c}`` stands for ``c * z^alpha * conj(z)^beta``
with ``alpha``/``beta`` tuples of length n.  Holomorphic polynomials (ideal
and submodule generators) keep ``beta == 0`` throughout.
"""

import ast
import re

from .errors import NonHomogeneousGenerator, PolynomialParseError

_VAR_RE = re.compile(r"^z([0-9]+)$")


def _zero_exp(n):
    return (0,) * n


class _Poly:
    __slots__ = ("n", "terms")

    def __init__(self, n, terms=None):
        self.n = n
        self.terms = dict(terms or {})

    @classmethod
    def const(cls, n, value):
        if value == 0:
            return cls(n)
        return cls(n, {(_zero_exp(n), _zero_exp(n)): complex(value)})

    @classmethod
    def variable(cls, n, i):
        a = [0] * n
        a[i] = 1
        return cls(n, {(tuple(a), _zero_exp(n)): 1.0 + 0.0j})

    def _merge(self, key, val):
        cur = self.terms.get(key, 0.0)
        new = cur + val
        if new == 0:
            self.terms.pop(key, None)
        else:
            self.terms[key] = new

    def __add__(self, other):
        out = _Poly(self.n, self.terms)
        for k, v in other.terms.items():
            out._merge(k, v)
        return out

    def __sub__(self, other):
        return self + other.__neg__()

    def __neg__(self):
        return _Poly(self.n, {k: -v for k, v in self.terms.items()})

    def __mul__(self, other):
        out = _Poly(self.n)
        for (a1, b1), v1 in self.terms.items():
            for (a2, b2), v2 in other.terms.items():
                key = (
                    tuple(x + y for x, y in zip(a1, a2)),
                    tuple(x + y for x, y in zip(b1, b2)),
                )
                out._merge(key, v1 * v2)
        return out

    def conj(self):
        return _Poly(
            self.n, {(b, a): v.conjugate() for (a, b), v in self.terms.items()}
        )

    def pow(self, e):
        out = _Poly.const(self.n, 1)
        for _ in range(e):
            out = out * self
        return out


def _eval_node(node, n):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body, n)
    if isinstance(node, ast.Constant):
        if isinstance(node.value, (int, float, complex)):
            return _Poly.const(n, node.value)
        raise PolynomialParseError("non-numeric constant %r" % (node.value,))
    if isinstance(node, ast.Name):
        match = _VAR_RE.match(node.id)
        if not match:
            raise PolynomialParseError("unknown name %r" % node.id)
        i = int(match.group(1))
        if not 1 <= i <= n:
            raise PolynomialParseError(
                "variable z%d out of range for %d ambient variables" % (i, n)
            )
        return _Poly.variable(n, i - 1)
    if isinstance(node, ast.UnaryOp):
        val = _eval_node(node.operand, n)
        if isinstance(node.op, ast.USub):
            return -val
        if isinstance(node.op, ast.UAdd):
            return val
        raise PolynomialParseError("unsupported unary operator")
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            base = _eval_node(node.left, n)
            if not (
                isinstance(node.right, ast.Constant)
                and isinstance(node.right.value, int)
                and node.right.value >= 0
            ):
                raise PolynomialParseError("exponent must be a nonnegative integer")
            return base.pow(node.right.value)
        left = _eval_node(node.left, n)
        right = _eval_node(node.right, n)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        raise PolynomialParseError("unsupported operator in polynomial")
    if isinstance(node, ast.Call):
        if isinstance(node.func, ast.Name) and node.func.id == "conj" and len(node.args) == 1:
            return _eval_node(node.args[0], n).conj()
        raise PolynomialParseError("only conj(...) calls are allowed")
    raise PolynomialParseError("unsupported syntax element %s" % type(node).__name__)


def parse_bidegree(text, n):
    """Parse a polynomial in z1..zn, conj(z1)..conj(zn) into a term dict."""
    if not isinstance(text, str) or not text.strip():
        raise PolynomialParseError("empty polynomial string")
    src = text.replace("^", "**")
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise PolynomialParseError(
            "could not parse %r: %s" % (text, exc.msg)
        ) from None
    return _eval_node(tree, n).terms


def parse_holomorphic(text, n):
    """Parse a conj-free polynomial; returns ``{alpha: coeff}``."""
    terms = parse_bidegree(text, n)
    out = {}
    for (a, b), v in terms.items():
        if any(b):
            raise PolynomialParseError(
                "conjugated variables are not allowed here: %r" % text
            )
        out[a] = v
    return out


def poly_degree(terms):
    degs = {sum(a) for a in terms}
    return max(degs) if degs else 0


def require_homogeneous(terms, what="generator"):
    if not terms:
        raise NonHomogeneousGenerator("zero %s" % what)
    degs = {sum(a) for a in terms}
    if len(degs) != 1:
        raise NonHomogeneousGenerator(
            "%s mixes degrees %s" % (what, sorted(degs))
        )
    return degs.pop()


def bidegree(terms):
    """The (p, q) bidegree of a bihomogeneous term dict; raises if mixed."""
    pairs = {(sum(a), sum(b)) for (a, b) in terms}
    if not pairs:
        return (0, 0)
    if len(pairs) != 1:
        raise PolynomialParseError("polynomial mixes bidegrees %s" % sorted(pairs))
    return pairs.pop()


def poly_to_string(terms):
    """Render a holomorphic term dict back to a parseable string."""
    parts = []
    for alpha in sorted(terms, key=lambda a: (-sum(a), tuple(-x for x in a))):
        c = complex(terms[alpha])
        mono = "*".join(
            "z%d" % (i + 1) if a == 1 else "z%d^%d" % (i + 1, a)
            for i, a in enumerate(alpha)
            if a
        )
        if c == 1 and mono:
            parts.append(mono)
        else:
            coeff = repr(c.real) if c.imag == 0 else "(%r)" % c
            parts.append("%s*%s" % (coeff, mono) if mono else coeff)
    return " + ".join(parts).replace("+ -", "- ") if parts else "0"
