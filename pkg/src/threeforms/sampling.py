"""Seeded random generators for forms, maps and fields used by the suites.

Coefficients are small rationals so that the exact identity checks stay fast
even at degree 9 in the inputs (F of F of a 3-form).
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

from . import rational
from .exterior import DIM, Form, LinearMap, Vector, pullback
from .invariants import SymplecticFrame
from .patch import FormField, Patch, VectorField, primitive_basis
from .polynomials import Polynomial
from .rng import SplitMix64

TRIPLES = list(combinations(range(1, DIM + 1), 3))


def random_rational(rng: SplitMix64, num: int = 9, den: int = 3) -> Fraction:
    return Fraction(rng.randint(-num, num), rng.randint(1, den))


def random_form(rng: SplitMix64, grade: int = 3, num: int = 9, den: int = 3) -> Form:
    terms = {}
    for idx in combinations(range(1, DIM + 1), grade):
        c = random_rational(rng, num, den)
        if c != 0:
            terms[idx] = c
    return Form(grade, terms)


def random_nonzero_form(rng: SplitMix64, grade: int = 3) -> Form:
    while True:
        f = random_form(rng, grade)
        if not f.is_zero():
            return f


def random_vector(rng: SplitMix64, num: int = 9, den: int = 3) -> Vector:
    return Vector([random_rational(rng, num, den) for _ in range(DIM)])


def random_invertible_map(rng: SplitMix64, num: int = 3) -> LinearMap:
    while True:
        m = LinearMap([[rng.randint(-num, num) for _ in range(DIM)] for _ in range(DIM)])
        if m.det() != 0:
            return m


# ---------------------------------------------------------------------------
# exact symplectic matrices (standard omega, pairs (12)(34)(56))


def _interleave(block: list) -> list:
    """Reorder a matrix from (x1,x2,x3,y1,y2,y3) blocks to (x1,y1,...) order."""
    order = [0, 3, 1, 4, 2, 5]
    return [[block[order[i]][order[j]] for j in range(DIM)] for i in range(DIM)]


def _sym3(rng: SplitMix64, num: int = 2) -> list:
    s = [[Fraction(0)] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(i, 3):
            s[i][j] = s[j][i] = Fraction(rng.randint(-num, num))
    return s


def random_symplectic(rng: SplitMix64, factors: int = 3) -> LinearMap:
    """A product of exact symplectic shears and GL-blocks (det checks built in)."""
    omega = SymplecticFrame.standard().omega
    total = LinearMap.identity()
    for _ in range(factors):
        kind = rng.randint(0, 3)
        if kind == 0:  # (x, y) -> (x + S y, y)
            S = _sym3(rng)
            block = [[Fraction(int(i == j)) for j in range(6)] for i in range(6)]
            for i in range(3):
                for j in range(3):
                    block[i][3 + j] = S[i][j]
        elif kind == 1:  # (x, y) -> (x, y + T x)
            T = _sym3(rng)
            block = [[Fraction(int(i == j)) for j in range(6)] for i in range(6)]
            for i in range(3):
                for j in range(3):
                    block[3 + i][j] = T[i][j]
        elif kind == 2:  # (x, y) -> (A x, A^{-T} y)
            while True:
                A = [[Fraction(rng.randint(-2, 2)) for _ in range(3)] for _ in range(3)]
                if rational.det(A) != 0:
                    break
            AinvT = rational.transpose(rational.inverse(A))
            block = [[Fraction(0)] * 6 for _ in range(6)]
            for i in range(3):
                for j in range(3):
                    block[i][j] = A[i][j]
                    block[3 + i][3 + j] = AinvT[i][j]
        else:  # (x, y) -> (y, -x)
            block = [[Fraction(0)] * 6 for _ in range(6)]
            for i in range(3):
                block[i][3 + i] = Fraction(1)
                block[3 + i][i] = Fraction(-1)
        total = total.compose(LinearMap(_interleave(block)))
    if pullback(total, omega) != omega:
        raise AssertionError("generated matrix is not symplectic")  # generator bug
    return total


# ---------------------------------------------------------------------------
# primitive forms


_PRIMITIVE_BASIS_CACHE: list | None = None


def standard_primitive_basis() -> list[Form]:
    global _PRIMITIVE_BASIS_CACHE
    if _PRIMITIVE_BASIS_CACHE is None:
        _PRIMITIVE_BASIS_CACHE = primitive_basis(SymplecticFrame.standard())
    return _PRIMITIVE_BASIS_CACHE


def random_primitive_form(rng: SplitMix64, num: int = 6, den: int = 2) -> Form:
    basis = standard_primitive_basis()
    out = Form.zero(3)
    for b in basis:
        c = random_rational(rng, num, den)
        if c != 0:
            out = out + b.scale(c)
    return out


# ---------------------------------------------------------------------------
# polynomial fields


def random_polynomial(rng: SplitMix64, degree: int = 2, terms: int = 2,
                      num: int = 4, den: int = 2) -> Polynomial:
    p = Polynomial.constant(random_rational(rng, num, den))
    for _ in range(terms):
        mono = [0] * DIM
        for _ in range(degree):
            if rng.randint(0, 1):
                mono[rng.randint(0, DIM - 1)] += 1
        c = random_rational(rng, num, den)
        p = p + Polynomial({tuple(mono): c})
    return p


def random_primitive_field(patch: Patch, rng: SplitMix64, degree: int = 2) -> FormField:
    """A pointwise omega-primitive polynomial 3-form field (standard omega).

    Built as a polynomial combination of constant primitive forms, so
    primitivity holds identically, not just at sample points.
    """
    basis = standard_primitive_basis()
    terms: dict = {}
    for b in basis:
        if rng.randint(0, 2) == 0:
            continue  # keep the fields sparse
        poly = random_polynomial(rng, degree)
        for idx, c in b.terms.items():
            add = poly * c
            terms[idx] = terms[idx] + add if idx in terms else add
    if not terms:
        terms = {idx: Polynomial.constant(c) for idx, c in basis[0].terms.items()}
    return FormField(patch, 3, terms)


def random_vector_field(patch: Patch, rng: SplitMix64, degree: int = 2) -> VectorField:
    return VectorField(patch, [random_polynomial(rng, degree, terms=1) for _ in range(DIM)])


def random_point(patch: Patch, rng: SplitMix64) -> tuple:
    point = []
    for lo, hi in patch.domain:
        t = Fraction(rng.randint(1, 19), 20)
        point.append(Fraction(lo) + (Fraction(hi) - Fraction(lo)) * t)
    return tuple(point)
