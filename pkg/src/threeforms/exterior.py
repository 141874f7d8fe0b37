"""Exterior algebra over a fixed 6-dimensional real vector space V.

Forms are stored sparsely as maps from strictly increasing 1-based index
tuples to coefficients; ``e^{135}`` means ``e1 ^ e3 ^ e5`` and all signs come
from permutation parity.  Two scalar backends (exact rational / float64) sit
behind the same interface, see :mod:`threeforms.scalars`.

The canonical identification of 5-forms with vectors (against the reference
volume ``e^{123456}``) lives here as :func:`five_to_vector`; it is what lets
degree-counting invariants of 3-forms be written as matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import rational
from .scalars import (
    FLOAT,
    RATIONAL,
    BackendMismatchError,
    as_scalar,
    check_backend,
    format_scalar,
    same_backend,
    scalar_zero,
)

DIM = 6
VOL_TUPLE = (1, 2, 3, 4, 5, 6)
RANK_TOL = 1e-9  # singular values below RANK_TOL * largest count as zero

EUCLIDEAN_LABELS = ("e1", "e2", "e3", "e4", "e5", "e6")
# Darboux renaming: dx^j = e^{2j-1}, dy^j = e^{2j}
DARBOUX_LABELS = ("dx1", "dy1", "dx2", "dy2", "dx3", "dy3")


class GradeError(ValueError):
    """Raised for operations applied at an impossible form degree."""


# ---------------------------------------------------------------------------
# index combinatorics


def merge_sign(left: tuple[int, ...], right: tuple[int, ...]):
    """Merge two strictly increasing tuples.

    Returns (merged, sign) or None when an index repeats.  The sign is the
    parity of the permutation sorting ``left + right``.
    """
    overlap = set(left) & set(right)
    if overlap:
        return None
    inversions = sum(1 for i in left for j in right if i > j)
    merged = tuple(sorted(left + right))
    return merged, (-1) ** inversions


def sort_sign(indices: tuple[int, ...]):
    """Sorted tuple and permutation sign, or None when an index repeats."""
    if len(set(indices)) != len(indices):
        return None
    inversions = sum(
        1
        for a in range(len(indices))
        for b in range(a + 1, len(indices))
        if indices[a] > indices[b]
    )
    return tuple(sorted(indices)), (-1) ** inversions


def interior_sign(i: int, indices: tuple[int, ...]):
    """(indices minus i, slot sign) or None when i does not occur."""
    if i not in indices:
        return None
    k = indices.index(i)
    return indices[:k] + indices[k + 1 :], (-1) ** k


def complement(indices: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(i for i in range(1, DIM + 1) if i not in indices)


# ---------------------------------------------------------------------------
# core containers


class Form:
    """A grade-k alternating tensor on R^6, immutable after construction."""

    __slots__ = ("grade", "terms", "backend")

    def __init__(self, grade: int, terms: dict, backend: str = RATIONAL, *, _raw=False):
        if not 0 <= grade <= DIM:
            raise GradeError(f"grade {grade} outside 0..{DIM}")
        check_backend(backend)
        if _raw:
            clean = {k: v for k, v in terms.items() if v != 0}
        else:
            clean = {}
            for idx, coeff in terms.items():
                idx = tuple(idx)
                if len(idx) != grade:
                    raise GradeError(f"index tuple {idx} has length != grade {grade}")
                ss = sort_sign(idx)
                if ss is None:
                    continue  # repeated index wedges to zero
                sidx, sign = ss
                value = as_scalar(coeff, backend)
                if sign < 0:
                    value = -value
                if sidx in clean:
                    value = clean[sidx] + value
                if value == 0:
                    clean.pop(sidx, None)
                else:
                    clean[sidx] = value
        object.__setattr__(self, "grade", grade)
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "backend", backend)

    def __setattr__(self, *_):
        raise AttributeError("Form is immutable")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(grade: int, backend: str = RATIONAL) -> "Form":
        return Form(grade, {}, backend, _raw=True)

    @staticmethod
    def basis(indices, backend: str = RATIONAL, coeff=1) -> "Form":
        indices = tuple(indices)
        return Form(len(indices), {indices: coeff}, backend)

    # -- bookkeeping -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, indices) -> object:
        """Signed coefficient of an arbitrary (possibly unsorted) index tuple."""
        indices = tuple(indices)
        ss = sort_sign(indices)
        if ss is None:
            return scalar_zero(self.backend)
        sidx, sign = ss
        value = self.terms.get(sidx, scalar_zero(self.backend))
        return -value if sign < 0 else value

    def map_coeffs(self, fn) -> "Form":
        return Form(self.grade, {k: fn(v) for k, v in self.terms.items()}, self.backend, _raw=True)

    def to_float(self) -> "Form":
        if self.backend == FLOAT:
            return self
        return Form(self.grade, {k: float(v) for k, v in self.terms.items()}, FLOAT, _raw=True)

    def norm_inf(self) -> float:
        return max((abs(float(v)) for v in self.terms.values()), default=0.0)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "Form") -> "Form":
        self._compat(other)
        out = dict(self.terms)
        for idx, c in other.terms.items():
            s = out.get(idx)
            s = c if s is None else s + c
            if s == 0:
                out.pop(idx, None)
            else:
                out[idx] = s
        return Form(self.grade, out, self.backend, _raw=True)

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def __neg__(self) -> "Form":
        return self.map_coeffs(lambda c: -c)

    def scale(self, c) -> "Form":
        c = as_scalar(c, self.backend)
        if c == 0:
            return Form.zero(self.grade, self.backend)
        return self.map_coeffs(lambda v: v * c)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Form)
            and self.grade == other.grade
            and self.backend == other.backend
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.grade, self.backend, frozenset(self.terms.items())))

    def _compat(self, other: "Form"):
        if self.grade != other.grade:
            raise GradeError(f"grade mismatch: {self.grade} vs {other.grade}")
        same_backend(self.backend, other.backend)

    def __repr__(self):
        if not self.terms:
            return f"Form({self.grade}, 0)"
        bits = " + ".join(f"{v}*e{''.join(map(str, k))}" for k, v in sorted(self.terms.items()))
        return f"Form({self.grade}, {bits})"


class Vector:
    """An element of V in the basis dual to the covector labels."""

    __slots__ = ("components", "backend")

    def __init__(self, components, backend: str = RATIONAL):
        comps = tuple(as_scalar(c, backend) for c in components)
        if len(comps) != DIM:
            raise ValueError(f"need {DIM} components, got {len(comps)}")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "backend", check_backend(backend))

    def __setattr__(self, *_):
        raise AttributeError("Vector is immutable")

    @staticmethod
    def basis(i: int, backend: str = RATIONAL) -> "Vector":
        return Vector([1 if j == i else 0 for j in range(1, DIM + 1)], backend)

    @staticmethod
    def zero(backend: str = RATIONAL) -> "Vector":
        return Vector([0] * DIM, backend)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.components)

    def __add__(self, other: "Vector") -> "Vector":
        same_backend(self.backend, other.backend)
        return Vector([a + b for a, b in zip(self.components, other.components)], self.backend)

    def __sub__(self, other: "Vector") -> "Vector":
        return self + (-other)

    def __neg__(self) -> "Vector":
        return Vector([-c for c in self.components], self.backend)

    def scale(self, c) -> "Vector":
        c = as_scalar(c, self.backend)
        return Vector([v * c for v in self.components], self.backend)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Vector)
            and self.backend == other.backend
            and self.components == other.components
        )

    def __hash__(self):
        return hash((self.backend, self.components))

    def __repr__(self):
        return f"Vector({list(self.components)})"


class LinearMap:
    """An endomorphism of V; matrix entry [i][j] acts on vector components."""

    __slots__ = ("matrix", "backend", "_det")

    def __init__(self, matrix, backend: str = RATIONAL):
        rows = tuple(tuple(as_scalar(x, backend) for x in row) for row in matrix)
        if len(rows) != DIM or any(len(r) != DIM for r in rows):
            raise ValueError(f"matrix must be {DIM}x{DIM}")
        object.__setattr__(self, "matrix", rows)
        object.__setattr__(self, "backend", check_backend(backend))
        object.__setattr__(self, "_det", None)

    def __setattr__(self, *_):
        raise AttributeError("LinearMap is immutable")

    @staticmethod
    def identity(backend: str = RATIONAL) -> "LinearMap":
        return LinearMap([[1 if i == j else 0 for j in range(DIM)] for i in range(DIM)], backend)

    @staticmethod
    def diagonal(entries, backend: str = RATIONAL) -> "LinearMap":
        entries = list(entries)
        return LinearMap(
            [[entries[i] if i == j else 0 for j in range(DIM)] for i in range(DIM)], backend
        )

    def det(self):
        if self._det is None:
            if self.backend == RATIONAL:
                d = rational.det([list(r) for r in self.matrix])
            else:
                d = float(np.linalg.det(np.array(self.matrix, dtype=float)))
            object.__setattr__(self, "_det", d)
        return self._det

    def compose(self, other: "LinearMap") -> "LinearMap":
        """self after other (matrix product self @ other)."""
        same_backend(self.backend, other.backend)
        n = DIM
        out = [
            [
                sum(
                    (self.matrix[i][k] * other.matrix[k][j] for k in range(n)),
                    scalar_zero(self.backend),
                )
                for j in range(n)
            ]
            for i in range(n)
        ]
        return LinearMap(out, self.backend)

    def apply(self, v: Vector) -> Vector:
        same_backend(self.backend, v.backend)
        return Vector(
            [
                sum(
                    (self.matrix[i][j] * v.components[j] for j in range(DIM)),
                    scalar_zero(self.backend),
                )
                for i in range(DIM)
            ],
            self.backend,
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LinearMap)
            and self.backend == other.backend
            and self.matrix == other.matrix
        )

    def __repr__(self):
        return f"LinearMap({[list(r) for r in self.matrix]})"


@dataclass(frozen=True)
class ExteriorContext:
    """Basis labels and the fixed reference volume e^{123456}.

    The dimension is pinned at 6 and the reference volume never changes; the
    context exists so printed output can speak either the plain ``e^i`` or
    the Darboux ``dx/dy`` language.
    """

    basis_labels: tuple = EUCLIDEAN_LABELS

    def __post_init__(self):
        if len(self.basis_labels) != DIM:
            raise ValueError(f"need {DIM} basis labels")

    @property
    def dim(self) -> int:
        return DIM

    @property
    def reference_volume(self) -> Form:
        return Form.basis(VOL_TUPLE)

    def label(self, i: int) -> str:
        return self.basis_labels[i - 1]

    def describe(self, a: Form) -> str:
        if a.is_zero():
            return "0"
        bits = []
        for idx, c in sorted(a.terms.items()):
            name = "^".join(self.label(i) for i in idx) if idx else "1"
            bits.append(f"({c}) {name}")
        return " + ".join(bits)


STANDARD_CONTEXT = ExteriorContext()
DARBOUX_CONTEXT = ExteriorContext(DARBOUX_LABELS)


# ---------------------------------------------------------------------------
# operations


def wedge(a: Form, b: Form) -> Form:
    """Graded-anticommutative product; over-grade products are zero."""
    same_backend(a.backend, b.backend)
    g = a.grade + b.grade
    if g > DIM:
        return Form.zero(DIM, a.backend)
    out: dict = {}
    for ia, ca in a.terms.items():
        for ib, cb in b.terms.items():
            ms = merge_sign(ia, ib)
            if ms is None:
                continue
            idx, sign = ms
            v = ca * cb
            if sign < 0:
                v = -v
            s = out.get(idx)
            s = v if s is None else s + v
            if s == 0:
                out.pop(idx, None)
            else:
                out[idx] = s
    return Form(g, out, a.backend, _raw=True)


def wedge_all(*forms: Form) -> Form:
    result = forms[0]
    for f in forms[1:]:
        result = wedge(result, f)
    return result


def interior(v: Vector, a: Form) -> Form:
    """Contraction in the first slot; an antiderivation of degree -1."""
    if a.grade == 0:
        raise GradeError("interior product of a 0-form")
    same_backend(v.backend, a.backend)
    out: dict = {}
    for idx, c in a.terms.items():
        for pos, i in enumerate(idx):
            vi = v.components[i - 1]
            if vi == 0:
                continue
            rest = idx[:pos] + idx[pos + 1 :]
            val = vi * c
            if pos % 2:
                val = -val
            s = out.get(rest)
            s = val if s is None else s + val
            if s == 0:
                out.pop(rest, None)
            else:
                out[rest] = s
    return Form(a.grade - 1, out, a.backend, _raw=True)


def _minor_det(matrix, rows, cols, backend):
    k = len(rows)
    if k == 0:
        return as_scalar(1, backend)
    if k == 1:
        return matrix[rows[0]][cols[0]]
    total = scalar_zero(backend)
    top = rows[0]
    rest = rows[1:]
    for pos, c in enumerate(cols):
        a = matrix[top][c]
        if a == 0:
            continue
        sub = _minor_det(matrix, rest, cols[:pos] + cols[pos + 1 :], backend)
        term = a * sub
        total = total - term if pos % 2 else total + term
    return total


def pullback(m: LinearMap, a: Form) -> Form:
    """(m* a)(v_1, ..., v_k) = a(m v_1, ..., m v_k)."""
    same_backend(m.backend, a.backend)
    if a.grade == 0:
        return a
    out: dict = {}
    all_targets = list(combinations(range(DIM), a.grade))
    for idx, c in a.terms.items():
        rows = tuple(i - 1 for i in idx)
        for cols in all_targets:
            d = _minor_det(m.matrix, rows, cols, a.backend)
            if d == 0:
                continue
            key = tuple(j + 1 for j in cols)
            v = c * d
            s = out.get(key)
            s = v if s is None else s + v
            if s == 0:
                out.pop(key, None)
            else:
                out[key] = s
    return Form(a.grade, out, a.backend, _raw=True)


def five_to_vector(a: Form) -> Vector:
    """The unique v with  iota_v e^{123456} = a,  for a 5-form a.

    The value canonically lives in V tensor the reference-volume line; the
    returned components are taken against ``e^{123456}`` itself (one density
    power, made explicit again by callers that track densities).
    """
    if a.grade != 5:
        raise GradeError(f"five_to_vector needs grade 5, got {a.grade}")
    comps = []
    for i in range(1, DIM + 1):
        c = a.terms.get(complement((i,)), scalar_zero(a.backend))
        comps.append(-c if (i - 1) % 2 else c)
    return Vector(comps, a.backend)


def _contraction_matrix(a: Form) -> tuple[list, list]:
    """Matrix of v -> iota_v a over the basis; rows indexed by (k-1)-tuples."""
    rows_idx = sorted({idx[:p] + idx[p + 1 :] for idx in a.terms for p in range(len(idx))})
    row_of = {t: r for r, t in enumerate(rows_idx)}
    mat = [[scalar_zero(a.backend) for _ in range(DIM)] for _ in rows_idx]
    for idx, c in a.terms.items():
        for pos, i in enumerate(idx):
            rest = idx[:pos] + idx[pos + 1 :]
            val = -c if pos % 2 else c
            mat[row_of[rest]][i - 1] = mat[row_of[rest]][i - 1] + val
    return mat, rows_idx


def _null_space_backend(mat: list, backend: str, cols: int) -> list:
    if not mat:
        return [[as_scalar(1 if i == j else 0, backend) for j in range(cols)] for i in range(cols)]
    if backend == RATIONAL:
        return rational.null_space(mat, cols=cols)
    arr = np.array(mat, dtype=float)
    u, s, vt = np.linalg.svd(arr)
    largest = s[0] if len(s) else 0.0
    tol = RANK_TOL * max(largest, 1e-300)
    r = int(np.sum(s > tol))
    return [list(map(float, vt[k])) for k in range(r, vt.shape[0])]


def kernel(a: Form) -> list[Vector]:
    """Basis of ker a = {v : iota_v a = 0}; exact rank on the exact backend."""
    if a.grade == 0 or a.is_zero():
        return [Vector.basis(i, a.backend) for i in range(1, DIM + 1)]
    mat, _ = _contraction_matrix(a)
    return [Vector(v, a.backend) for v in _null_space_backend(mat, a.backend, DIM)]


def annihilator(a: Form) -> tuple[list[Form], list[Vector]]:
    """(basis of Ann a in V*, basis of its perp in V).

    Ann a is the null space of the map  alpha -> alpha ^ a  on covectors; the
    perp is the joint kernel in V of those covectors.
    """
    if a.is_zero():
        ann = [Form.basis((i,), a.backend) for i in range(1, DIM + 1)]
        return ann, []
    if a.grade == DIM:
        return [], [Vector.basis(i, a.backend) for i in range(1, DIM + 1)]
    rows_idx = sorted(
        {ms[0] for idx in a.terms for i in range(1, DIM + 1) if (ms := merge_sign((i,), idx))}
    )
    row_of = {t: r for r, t in enumerate(rows_idx)}
    mat = [[scalar_zero(a.backend) for _ in range(DIM)] for _ in rows_idx]
    for idx, c in a.terms.items():
        for i in range(1, DIM + 1):
            ms = merge_sign((i,), idx)
            if ms is None:
                continue
            key, sign = ms
            val = -c if sign < 0 else c
            mat[row_of[key]][i - 1] = mat[row_of[key]][i - 1] + val
    ann_comps = _null_space_backend(mat, a.backend, DIM)
    ann = [Form(1, {(i + 1,): c for i, c in enumerate(v) if c != 0}, a.backend, _raw=True)
           for v in ann_comps]
    if not ann_comps:
        perp_comps = [[as_scalar(1 if i == j else 0, a.backend) for j in range(DIM)]
                      for i in range(DIM)]
    else:
        perp_comps = _null_space_backend(ann_comps, a.backend, DIM)
    perp = [Vector(v, a.backend) for v in perp_comps]
    return ann, perp


def span_dim(vectors: list[Vector], backend: str | None = None) -> int:
    if not vectors:
        return 0
    backend = backend or vectors[0].backend
    mat = [list(v.components) for v in vectors]
    if backend == RATIONAL:
        return rational.rank(mat)
    arr = np.array(mat, dtype=float)
    s = np.linalg.svd(arr, compute_uv=False)
    tol = RANK_TOL * max(s[0] if len(s) else 0.0, 1e-300)
    return int(np.sum(s > tol))


# ---------------------------------------------------------------------------
# JSON schema (shared repo-wide)


def form_to_json(a: Form) -> dict:
    return {
        "grade": a.grade,
        "backend": a.backend,
        "terms": [
            {"indices": list(idx), "coeff": format_scalar(c)}
            for idx, c in sorted(a.terms.items())
        ],
    }


def form_from_json(data: dict) -> Form:
    try:
        grade = int(data["grade"])
        backend = data["backend"]
        raw_terms = data["terms"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed form JSON: missing {exc}") from exc
    check_backend(backend)
    terms = {}
    for entry in raw_terms:
        idx = tuple(int(i) for i in entry["indices"])
        if len(idx) != grade:
            raise ValueError(f"indices {list(idx)} do not match grade {grade}")
        if len(set(idx)) != len(idx):
            raise ValueError(f"repeated index in {list(idx)}")
        if any(not 1 <= i <= DIM for i in idx):
            raise ValueError(f"index out of range 1..{DIM} in {list(idx)}")
        if idx != tuple(sorted(idx)):
            raise ValueError(f"indices {list(idx)} must be strictly increasing")
        coeff = entry["coeff"]
        if backend == RATIONAL and not isinstance(coeff, str):
            if isinstance(coeff, int):
                coeff = str(coeff)
            else:
                raise ValueError("rational coefficients must be 'p/q' strings")
        if idx in terms:
            raise ValueError(f"duplicate term {list(idx)}")
        terms[idx] = as_scalar(coeff, backend)
    return Form(grade, terms, backend)
