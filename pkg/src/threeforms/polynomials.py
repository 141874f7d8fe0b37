"""Sparse multivariate polynomials with rational coefficients.

Coefficient functions of exact-backend fields are polynomials in the six
patch coordinates; keys are exponent tuples of length 6.  Differentiation is
exact, which is what makes the patch-level identity checks decidable.
"""

from __future__ import annotations

import ast
from fractions import Fraction

NVARS = 6


class Polynomial:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict | None = None):
        clean = {}
        if coeffs:
            for mono, c in coeffs.items():
                c = Fraction(c)
                if c == 0:
                    continue
                mono = tuple(int(e) for e in mono)
                if len(mono) != NVARS or any(e < 0 for e in mono):
                    raise ValueError(f"bad monomial {mono}")
                clean[mono] = clean.get(mono, Fraction(0)) + c
        self.coeffs = {m: c for m, c in clean.items() if c != 0}

    # -- constructors --------------------------------------------------

    @staticmethod
    def constant(c) -> "Polynomial":
        c = Fraction(c)
        return Polynomial({(0,) * NVARS: c} if c else {})

    @staticmethod
    def variable(i: int) -> "Polynomial":
        mono = tuple(1 if j == i else 0 for j in range(NVARS))
        return Polynomial({mono: 1})

    # -- ring operations -------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            s = out.get(m, Fraction(0)) + c
            if s == 0:
                out.pop(m, None)
            else:
                out[m] = s
        p = Polynomial.__new__(Polynomial)
        p.coeffs = out
        return p

    __radd__ = __add__

    def __neg__(self):
        p = Polynomial.__new__(Polynomial)
        p.coeffs = {m: -c for m, c in self.coeffs.items()}
        return p

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        out: dict = {}
        for m1, c1 in self.coeffs.items():
            for m2, c2 in other.coeffs.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                s = out.get(m, Fraction(0)) + c1 * c2
                if s == 0:
                    out.pop(m, None)
                else:
                    out[m] = s
        p = Polynomial.__new__(Polynomial)
        p.coeffs = out
        return p

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = Polynomial.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    # -- calculus ----------------------------------------------------------

    def partial(self, i: int) -> "Polynomial":
        out = {}
        for m, c in self.coeffs.items():
            if m[i] == 0:
                continue
            dm = m[:i] + (m[i] - 1,) + m[i + 1 :]
            out[dm] = out.get(dm, Fraction(0)) + c * m[i]
        p = Polynomial.__new__(Polynomial)
        p.coeffs = {m: c for m, c in out.items() if c != 0}
        return p

    def evaluate(self, point):
        exact = all(isinstance(x, (int, Fraction)) for x in point)
        total = Fraction(0) if exact else 0.0
        for m, c in self.coeffs.items():
            term = c if exact else float(c)
            for x, e in zip(point, m):
                if e:
                    term = term * x**e
            total += term
        return total

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return all(all(e == 0 for e in m) for m in self.coeffs)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return self.coeffs.get((0,) * NVARS, Fraction(0))

    def degree(self) -> int:
        return max((sum(m) for m in self.coeffs), default=0)

    def __repr__(self):
        if not self.coeffs:
            return "Polynomial(0)"
        bits = []
        for m, c in sorted(self.coeffs.items()):
            mono = "*".join(f"x{i}^{e}" for i, e in enumerate(m) if e) or "1"
            bits.append(f"{c}*{mono}")
        return "Polynomial(" + " + ".join(bits) + ")"


def _coerce(x) -> Polynomial:
    if isinstance(x, Polynomial):
        return x
    if isinstance(x, (int, Fraction)):
        return Polynomial.constant(x)
    raise TypeError(f"cannot coerce {type(x).__name__} into a Polynomial")


# ---------------------------------------------------------------------------
# JSON schema and a small safe expression parser (used by the CLI)


def polynomial_to_json(p: Polynomial) -> list:
    return [
        {"monomial": list(m), "coeff": str(c)} for m, c in sorted(p.coeffs.items())
    ]


def polynomial_from_json(entries) -> Polynomial:
    coeffs = {}
    for entry in entries:
        mono = tuple(int(e) for e in entry["monomial"])
        coeffs[mono] = coeffs.get(mono, Fraction(0)) + Fraction(entry["coeff"])
    return Polynomial(coeffs)


def parse_polynomial(text: str, names: list[str]) -> Polynomial:
    """Parse '+ - * ** ( )' expressions over the named coordinates.

    Division is allowed by integer constants only; everything else raises.
    Backed by the ast module so no user code ever executes.
    """
    index = {name: i for i, name in enumerate(names)}
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse polynomial {text!r}: {exc}") from exc

    def build(node):
        if isinstance(node, ast.Expression):
            return build(node.body)
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Add):
                return build(node.left) + build(node.right)
            if isinstance(node.op, ast.Sub):
                return build(node.left) - build(node.right)
            if isinstance(node.op, ast.Mult):
                return build(node.left) * build(node.right)
            if isinstance(node.op, ast.Div):
                denom = build(node.right)
                if not denom.is_constant() or denom.constant_value() == 0:
                    raise ValueError("division only by nonzero constants")
                return build(node.left) * Polynomial.constant(1 / denom.constant_value())
            if isinstance(node.op, ast.Pow):
                exp = build(node.right)
                if not exp.is_constant():
                    raise ValueError("exponent must be a constant integer")
                e = exp.constant_value()
                if e.denominator != 1 or e < 0:
                    raise ValueError("exponent must be a nonnegative integer")
                return build(node.left) ** int(e)
            raise ValueError(f"operator {type(node.op).__name__} not allowed")
        if isinstance(node, ast.UnaryOp):
            if isinstance(node.op, ast.USub):
                return -build(node.operand)
            if isinstance(node.op, ast.UAdd):
                return build(node.operand)
            raise ValueError("unary operator not allowed")
        if isinstance(node, ast.Constant):
            if isinstance(node.value, int):
                return Polynomial.constant(node.value)
            raise ValueError(f"constant {node.value!r} must be an integer (use p/q via division)")
        if isinstance(node, ast.Name):
            if node.id not in index:
                raise ValueError(f"unknown coordinate {node.id!r}; have {names}")
            return Polynomial.variable(index[node.id])
        raise ValueError(f"syntax {type(node).__name__} not allowed in polynomials")

    return build(tree)
