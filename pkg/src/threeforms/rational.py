"""Exact linear algebra over Fractions (row echelon, kernels, signatures).

Everything here works on plain lists of lists of ``Fraction``.  Matrices are
small (at most 20 x 20 in this package) so fraction-exact Gaussian
elimination is both fast enough and, more importantly, gives decidable rank
and sign questions that the orbit classification depends on.
"""

from __future__ import annotations

from fractions import Fraction

Matrix = list  # list[list[Fraction]]
Vector = list  # list[Fraction]


def mat_copy(m: Matrix) -> Matrix:
    return [row[:] for row in m]


def identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    n, k, m = len(a), len(b), len(b[0])
    assert len(a[0]) == k
    out = [[Fraction(0)] * m for _ in range(n)]
    for i in range(n):
        ai = a[i]
        oi = out[i]
        for s in range(k):
            av = ai[s]
            if av:
                bs = b[s]
                for j in range(m):
                    if bs[j]:
                        oi[j] += av * bs[j]
    return out


def matvec(a: Matrix, v: Vector) -> Vector:
    return [sum((a[i][j] * v[j] for j in range(len(v)) if v[j]), Fraction(0))
            for i in range(len(a))]


def mat_scale(a: Matrix, c) -> Matrix:
    return [[x * c for x in row] for row in a]


def mat_add(a: Matrix, b: Matrix) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def transpose(a: Matrix) -> Matrix:
    return [list(col) for col in zip(*a)]


def row_echelon(m: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form; returns (rref, pivot column indices)."""
    m = mat_copy(m)
    if not m:
        return m, []
    rows, cols = len(m), len(m[0])
    pivots = []
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def rank(m: Matrix) -> int:
    return len(row_echelon(m)[1])


def null_space(m: Matrix, cols: int | None = None) -> list[Vector]:
    """Basis of {v : m v = 0}, empty list for trivial kernel."""
    if not m:
        n = cols if cols is not None else 0
        return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    red, pivots = row_echelon(m)
    n = len(m[0])
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * n
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][fc]
        basis.append(v)
    return basis


def solve(a: Matrix, b: Vector) -> Vector | None:
    """One solution of a x = b, or None when inconsistent.

    Free variables are set to zero, so the selection is deterministic.
    """
    rows = len(a)
    aug = [a[i][:] + [b[i]] for i in range(rows)]
    red, pivots = row_echelon(aug)
    n = len(a[0])
    if n in pivots:  # pivot in the augmented column: inconsistent
        return None
    x = [Fraction(0)] * n
    for r, pc in enumerate(pivots):
        x[pc] = red[r][n]
    return x


def det(a: Matrix) -> Fraction:
    m = mat_copy(a)
    n = len(m)
    sign = 1
    result = Fraction(1)
    for c in range(n):
        pivot = next((i for i in range(c, n) if m[i][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            m[c], m[pivot] = m[pivot], m[c]
            sign = -sign
        pv = m[c][c]
        result *= pv
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] / pv
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return result * sign


def inverse(a: Matrix) -> Matrix:
    n = len(a)
    aug = [a[i][:] + identity(n)[i] for i in range(n)]
    red, pivots = row_echelon(aug)
    if pivots != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in red]


def in_span(basis: list[Vector], v: Vector) -> bool:
    """Whether v lies in the span of the given vectors (exact)."""
    if all(x == 0 for x in v):
        return True
    if not basis:
        return False
    m = [list(col) for col in zip(*basis)]  # columns are basis vectors
    return solve(m, v) is not None


def same_span(a: list[Vector], b: list[Vector]) -> bool:
    return (len(a) == len(b)
            and all(in_span(a, v) for v in b)
            and all(in_span(b, v) for v in a))


def symmetric_signature(a: Matrix) -> tuple[int, int, int]:
    """Signature (n_zero, n_plus, n_minus) of a symmetric rational matrix.

    Congruence diagonalization: at each step find a nonzero diagonal entry
    (manufacturing one from an off-diagonal entry when the diagonal is all
    zero, valid away from characteristic 2) and clear its row and column.
    """
    m = mat_copy(a)
    n = len(m)
    for i in range(n):
        for j in range(n):
            if m[i][j] != m[j][i]:
                raise ValueError("matrix is not symmetric")
    plus = minus = zero = 0
    idx = list(range(n))
    while idx:
        # choose a working index with nonzero diagonal
        k = next((i for i in idx if m[i][i] != 0), None)
        if k is None:
            pair = next(((i, j) for i in idx for j in idx if j != i and m[i][j] != 0), None)
            if pair is None:
                zero += len(idx)
                break
            i, j = pair
            # congruence by (row_i += row_j, col_i += col_j): new diagonal 2 m[i][j]
            for c in range(n):
                m[i][c] += m[j][c]
            for r in range(n):
                m[r][i] += m[r][j]
            k = i
        d = m[k][k]
        if d > 0:
            plus += 1
        else:
            minus += 1
        others = [i for i in idx if i != k]
        for i in others:
            if m[i][k] != 0:
                f = m[i][k] / d
                for c in range(n):
                    m[i][c] -= f * m[k][c]
                for r in range(n):
                    m[r][i] -= f * m[r][k]
        idx = others
    return (zero, plus, minus)


def nth_root_exact(x: Fraction, n: int) -> Fraction | None:
    """Exact n-th root of a nonnegative rational, or None when irrational."""
    if x < 0:
        raise ValueError("negative radicand")
    if x == 0:
        return Fraction(0)
    num, den = x.numerator, x.denominator
    rn = _iroot(num, n)
    rd = _iroot(den, n)
    if rn is None or rd is None:
        return None
    return Fraction(rn, rd)


def _iroot(k: int, n: int) -> int | None:
    r = round(k ** (1.0 / n))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand ** n == k:
            return cand
    # float seed can be off for huge k; fall back to integer bisection
    lo, hi = 0, max(2, k)
    while lo <= hi:
        mid = (lo + hi) // 2
        p = mid ** n
        if p == k:
            return mid
        if p < k:
            lo = mid + 1
        else:
            hi = mid - 1
    return None
