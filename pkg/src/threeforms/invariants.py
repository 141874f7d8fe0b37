"""Equivariant polynomial invariants of 3-forms and the induced bilinear form.

A 3-form phi on V determines, by degree counting against the reference
volume line:

* ``K_of(phi)``  -- a quadratic endomorphism-valued invariant (one density),
  the matrix of ``v -> -iota_v phi ^ phi`` read through the 5-form/vector
  identification;
* ``F_of(phi)``  -- a cubic 3-form-valued invariant (one density),
  ``F(v1,v2,v3) = -2 phi(K v1, v2, v3)``;
* ``Q_of(phi)``  -- a quartic scalar invariant (two densities),
  ``Q = - phi ^ F(phi)``.

Density powers are tracked as explicit integers so the composition identities
(K o K = Q/4, K(F) = -K Q, F(F) = -phi Q^2) are checkable without choosing a
symplectic form.  A :class:`SymplecticFrame` trivializes densities on demand
and carries the Lefschetz/primitivity test and the symmetric bilinear form
``q(omega, phi)`` with its three equivalent formulas.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import rational
from .exterior import (
    DIM,
    VOL_TUPLE,
    RANK_TOL,
    Form,
    GradeError,
    LinearMap,
    Vector,
    five_to_vector,
    interior,
    kernel,
    annihilator,
    span_dim,
    wedge,
)
from .scalars import FLOAT, RATIONAL, as_scalar, same_backend, scalar_zero


class InternalCheckError(AssertionError):
    """Two independent computations of the same quantity disagreed."""


class NotPrimitiveError(ValueError):
    """Raised when an operation requires an omega-primitive 3-form."""


# ---------------------------------------------------------------------------
# density-twisted values


def _matrix_tuple(matrix, backend):
    return tuple(tuple(as_scalar(x, backend) for x in row) for row in matrix)


class DensityEndo:
    """Endomorphism of V twisted by ``density`` powers of the volume line."""

    __slots__ = ("matrix", "density", "backend")

    def __init__(self, matrix, density: int, backend: str):
        object.__setattr__(self, "matrix", _matrix_tuple(matrix, backend))
        object.__setattr__(self, "density", int(density))
        object.__setattr__(self, "backend", backend)

    def __setattr__(self, *_):
        raise AttributeError("DensityEndo is immutable")

    def compose(self, other: "DensityEndo") -> "DensityEndo":
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
        return DensityEndo(out, self.density + other.density, self.backend)

    def apply(self, v: Vector) -> Vector:
        """Image of v, components taken against reference-volume units."""
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

    def scale(self, c, extra_density: int = 0) -> "DensityEndo":
        c = as_scalar(c, self.backend)
        return DensityEndo(
            [[x * c for x in row] for row in self.matrix],
            self.density + extra_density,
            self.backend,
        )

    def scale_density(self, s: "DensityScalar") -> "DensityEndo":
        same_backend(self.backend, s.backend)
        return self.scale(s.value, s.density)

    def trivialize(self, frame: "SymplecticFrame") -> list:
        """Plain End(V) matrix once each volume factor is measured in omega^3/3!."""
        c = frame.trivialization ** self.density
        return [[x / c for x in row] for row in self.matrix]

    def kernel_basis(self) -> list[Vector]:
        mat = [list(r) for r in self.matrix]
        if self.backend == RATIONAL:
            return [Vector(v, RATIONAL) for v in rational.null_space(mat, cols=DIM)]
        arr = np.array(mat, dtype=float)
        u, s, vt = np.linalg.svd(arr)
        tol = RANK_TOL * max(s[0] if len(s) else 0.0, 1e-300)
        r = int(np.sum(s > tol))
        return [Vector(list(map(float, vt[k])), FLOAT) for k in range(r, DIM)]

    def image_basis(self) -> list[Vector]:
        # rows of `cols` are the matrix columns, so its row space is the image
        cols = [[self.matrix[i][j] for i in range(DIM)] for j in range(DIM)]
        if self.backend == RATIONAL:
            red, pivots = rational.row_echelon(cols)
            return [Vector(red[r], RATIONAL) for r in range(len(pivots))]
        arr = np.array(cols, dtype=float).T
        u, s, vt = np.linalg.svd(arr)
        tol = RANK_TOL * max(s[0] if len(s) else 0.0, 1e-300)
        r = int(np.sum(s > tol))
        return [Vector(list(map(float, u[:, k])), FLOAT) for k in range(r)]

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.matrix for x in row)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DensityEndo)
            and self.backend == other.backend
            and self.density == other.density
            and self.matrix == other.matrix
        )

    def __repr__(self):
        return f"DensityEndo(density={self.density}, {[list(r) for r in self.matrix]})"


class DensityForm:
    """A k-form twisted by ``density`` powers of the volume line."""

    __slots__ = ("form", "density")

    def __init__(self, form: Form, density: int):
        object.__setattr__(self, "form", form)
        object.__setattr__(self, "density", int(density))

    def __setattr__(self, *_):
        raise AttributeError("DensityForm is immutable")

    @property
    def backend(self) -> str:
        return self.form.backend

    def kernel_basis(self) -> list[Vector]:
        # well-defined independent of the density twist
        return kernel(self.form)

    def trivialize(self, frame: "SymplecticFrame") -> Form:
        c = frame.trivialization ** self.density
        return self.form.scale(1 / c if isinstance(c, Fraction) else 1.0 / c)

    def scale_density(self, s: "DensityScalar") -> "DensityForm":
        same_backend(self.backend, s.backend)
        return DensityForm(self.form.scale(s.value), self.density + s.density)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DensityForm)
            and self.density == other.density
            and self.form == other.form
        )

    def __repr__(self):
        return f"DensityForm(density={self.density}, {self.form!r})"


class DensityScalar:
    """A number carrying ``density`` powers of the volume line (2 for Q)."""

    __slots__ = ("value", "density", "backend")

    def __init__(self, value, density: int, backend: str):
        object.__setattr__(self, "value", as_scalar(value, backend))
        object.__setattr__(self, "density", int(density))
        object.__setattr__(self, "backend", backend)

    def __setattr__(self, *_):
        raise AttributeError("DensityScalar is immutable")

    def __mul__(self, other: "DensityScalar") -> "DensityScalar":
        same_backend(self.backend, other.backend)
        return DensityScalar(self.value * other.value, self.density + other.density, self.backend)

    def trivialize(self, frame: "SymplecticFrame"):
        return self.value / frame.trivialization ** self.density

    @property
    def sign(self) -> int:
        """Sign of the value; density-independent once a volume is fixed."""
        return (self.value > 0) - (self.value < 0)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DensityScalar)
            and self.backend == other.backend
            and self.density == other.density
            and self.value == other.value
        )

    def __repr__(self):
        return f"DensityScalar({self.value}, density={self.density})"


# ---------------------------------------------------------------------------
# the invariants K, F, Q


def _split_density(phi) -> tuple[Form, int]:
    if isinstance(phi, DensityForm):
        return phi.form, phi.density
    if isinstance(phi, Form):
        return phi, 0
    raise TypeError(f"expected Form or DensityForm, got {type(phi).__name__}")


def K_of(phi) -> DensityEndo:
    """Quadratic endomorphism invariant: column j is  -iota_{e_j} phi ^ phi.

    Input may carry a density twist d; the result then has density 2d + 1.
    """
    form, d = _split_density(phi)
    if form.grade != 3:
        raise GradeError(f"K is defined for 3-forms, got grade {form.grade}")
    cols = []
    for j in range(1, DIM + 1):
        five = wedge(interior(Vector.basis(j, form.backend), form), form)
        cols.append(five_to_vector(-five))
    matrix = [[cols[j].components[i] for j in range(DIM)] for i in range(DIM)]
    return DensityEndo(matrix, 2 * d + 1, form.backend)


def F_of(phi) -> DensityForm:
    """Cubic 3-form invariant:  F(v1,v2,v3) = -2 phi(K(phi) v1, v2, v3)."""
    form, d = _split_density(phi)
    K = K_of(form)
    terms = {}
    for triple in combinations(range(1, DIM + 1), 3):
        j1, j2, j3 = triple
        total = scalar_zero(form.backend)
        for i in range(1, DIM + 1):
            kij = K.matrix[i - 1][j1 - 1]
            if kij == 0:
                continue
            total += kij * form.coeff((i, j2, j3))
        total = -2 * total
        if total != 0:
            terms[triple] = total
    return DensityForm(Form(3, terms, form.backend, _raw=True), 3 * d + 1)


def Q_of(phi) -> DensityScalar:
    """Quartic scalar invariant:  Q = - phi ^ F(phi)  (two density powers)."""
    form, d = _split_density(phi)
    F = F_of(form)
    six = wedge(form, F.form)
    value = -six.terms.get(VOL_TUPLE, scalar_zero(form.backend))
    return DensityScalar(value, 4 * d + 2, form.backend)


def identity_endo(density: int, backend: str, scale=1) -> DensityEndo:
    s = as_scalar(scale, backend)
    return DensityEndo(
        [[s if i == j else scalar_zero(backend) for j in range(DIM)] for i in range(DIM)],
        density,
        backend,
    )


# ---------------------------------------------------------------------------
# symplectic frame and the bilinear form q


class SymplecticFrame:
    """A symplectic form on V plus the factor trivializing the volume line.

    ``trivialization`` is the scalar c with  omega^3/3! = c * e^{123456};
    nondegeneracy of omega is exactly c != 0.
    """

    __slots__ = ("omega", "trivialization", "_w", "_r")

    def __init__(self, omega: Form):
        if omega.grade != 2:
            raise GradeError("a symplectic form has grade 2")
        cube = wedge(wedge(omega, omega), omega)
        c = cube.terms.get(VOL_TUPLE, scalar_zero(omega.backend))
        c = c / 6 if omega.backend == RATIONAL else c / 6.0
        if c == 0:
            raise ValueError("omega is degenerate (omega^3 = 0)")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "trivialization", c)
        w = [[omega.coeff((i, j)) for j in range(1, DIM + 1)] for i in range(1, DIM + 1)]
        object.__setattr__(self, "_w", w)
        if omega.backend == RATIONAL:
            winv = rational.inverse(w)
            r = [[-x for x in row] for row in winv]
        else:
            winv = np.linalg.inv(np.array(w, dtype=float))
            r = (-winv).tolist()
        object.__setattr__(self, "_r", r)

    def __setattr__(self, *_):
        raise AttributeError("SymplecticFrame is immutable")

    @staticmethod
    def standard(backend: str = RATIONAL) -> "SymplecticFrame":
        omega = Form(2, {(1, 2): 1, (3, 4): 1, (5, 6): 1}, backend)
        return SymplecticFrame(omega)

    @property
    def backend(self) -> str:
        return self.omega.backend

    def pair_vectors(self, v1: Vector, v2: Vector):
        total = scalar_zero(self.backend)
        for i in range(DIM):
            a = v1.components[i]
            if a == 0:
                continue
            row = self._w[i]
            for j in range(DIM):
                b = v2.components[j]
                if b != 0 and row[j] != 0:
                    total += a * row[j] * b
        return total

    def covector_pairing_matrix(self) -> list:
        """Matrix of the pairing induced on V* by omega-index-raising."""
        return self._r

    def pair_two_forms(self, a: Form, b: Form):
        """The induced pairing on 2-forms (index raising on both slots)."""
        if a.grade != 2 or b.grade != 2:
            raise GradeError("pair_two_forms needs two 2-forms")
        same_backend(a.backend, b.backend, self.backend)
        r = self._r
        total = scalar_zero(self.backend)
        for (i, j), ca in a.terms.items():
            for (k, l), cb in b.terms.items():
                g = r[i - 1][k - 1] * r[j - 1][l - 1] - r[i - 1][l - 1] * r[j - 1][k - 1]
                if g != 0:
                    total += ca * cb * g
        return total

    def lefschetz_contract(self, a: Form) -> Form:
        """Contraction with the bivector dual to omega (degree -2)."""
        if a.grade < 2:
            raise GradeError("Lefschetz contraction needs grade >= 2")
        out = Form.zero(a.grade - 2, a.backend)
        r = self._r
        half = Fraction(1, 2) if self.backend == RATIONAL else 0.5
        for i in range(1, DIM + 1):
            ei = Vector.basis(i, self.backend)
            inner = interior(ei, a)
            for j in range(1, DIM + 1):
                rij = r[i - 1][j - 1]
                if rij == 0:
                    continue
                out = out + interior(Vector.basis(j, self.backend), inner).scale(rij * half)
        return out


def lefschetz(frame: SymplecticFrame, phi: Form, tol: float = 1e-9) -> tuple[Form, bool]:
    """(Lambda phi, primitivity flag), cross-checking the two primitivity tests.

    ``Lambda phi = 0`` and ``omega ^ phi = 0`` must agree for 3-forms in
    dimension 6; a disagreement is an internal bug, not a data error.
    """
    if phi.grade != 3:
        raise GradeError("lefschetz expects a 3-form")
    contracted = frame.lefschetz_contract(phi)
    product = wedge(frame.omega, phi)
    if phi.backend == RATIONAL:
        by_contraction = contracted.is_zero()
        by_product = product.is_zero()
    else:
        scale = max(1.0, phi.norm_inf())
        by_contraction = contracted.norm_inf() <= tol * scale
        by_product = product.norm_inf() <= tol * scale
    if by_contraction != by_product:
        raise InternalCheckError(
            f"primitivity tests disagree: Lambda->{by_contraction}, wedge->{by_product}"
        )
    return contracted, by_contraction


@dataclass(frozen=True)
class SymBilinear:
    """Symmetric bilinear form with signature (n_zero, n_plus, n_minus)."""

    matrix: tuple
    signature: tuple[int, int, int]
    backend: str

    def to_json(self) -> dict:
        from .scalars import format_scalar

        return {
            "matrix": [[format_scalar(x) for x in row] for row in self.matrix],
            "signature": list(self.signature),
        }


def signature_of_symmetric(matrix, backend: str) -> tuple[int, int, int]:
    if backend == RATIONAL:
        return rational.symmetric_signature([list(r) for r in matrix])
    arr = np.array(matrix, dtype=float)
    eig = np.linalg.eigvalsh(arr)
    scale = max(np.abs(eig).max() if len(eig) else 0.0, 1e-300)
    tol = RANK_TOL * scale
    n_plus = int(np.sum(eig > tol))
    n_minus = int(np.sum(eig < -tol))
    return (DIM - n_plus - n_minus, n_plus, n_minus)


def q_of(frame: SymplecticFrame, phi: Form, tol: float = 1e-9) -> SymBilinear:
    """The symmetric bilinear form q(omega, phi), via all three formulas.

    Computed as (1) omega(v1, K v2) with K trivialized, (2) the 6-form ratio
    iota_{v1} phi ^ iota_{v2} phi ^ omega over omega^3/3!, and (3) minus the
    induced 2-form pairing of the contractions.  The three matrices must
    agree exactly on the exact backend -- that agreement is an acceptance
    test, not an implementation choice.
    """
    if phi.grade != 3:
        raise GradeError("q_of expects a 3-form")
    same_backend(frame.backend, phi.backend)
    _, primitive = lefschetz(frame, phi, tol)
    if not primitive:
        raise NotPrimitiveError("q(omega, phi) requires a primitive 3-form")
    c = frame.trivialization
    K = K_of(phi)
    contractions = [interior(Vector.basis(i, phi.backend), phi) for i in range(1, DIM + 1)]
    q1 = [[scalar_zero(phi.backend)] * DIM for _ in range(DIM)]
    q2 = [[scalar_zero(phi.backend)] * DIM for _ in range(DIM)]
    q3 = [[scalar_zero(phi.backend)] * DIM for _ in range(DIM)]
    for i in range(DIM):
        Kei = Vector([K.matrix[r][i] for r in range(DIM)], phi.backend)
        for j in range(DIM):
            # omega(e_j, K e_i) / c, symmetric slot order matches the display
            q1[j][i] = frame.pair_vectors(Vector.basis(j + 1, phi.backend), Kei) / c
    for i in range(DIM):
        for j in range(i, DIM):
            six = wedge(wedge(contractions[i], contractions[j]), frame.omega)
            val = six.terms.get(VOL_TUPLE, scalar_zero(phi.backend)) / c
            q2[i][j] = q2[j][i] = val
            val3 = -frame.pair_two_forms(contractions[i], contractions[j])
            q3[i][j] = q3[j][i] = val3
    if phi.backend == RATIONAL:
        if not (q1 == q2 == q3):
            raise InternalCheckError("the three q(omega, phi) formulas disagree")
        matrix = q1
    else:
        a1, a2, a3 = (np.array(m, dtype=float) for m in (q1, q2, q3))
        scale = max(1.0, float(np.abs(a1).max()))
        if np.abs(a1 - a2).max() > tol * scale or np.abs(a1 - a3).max() > tol * scale:
            raise InternalCheckError("the three q(omega, phi) formulas disagree numerically")
        matrix = q1
    for i in range(DIM):
        for j in range(DIM):
            if phi.backend == RATIONAL and matrix[i][j] != matrix[j][i]:
                raise InternalCheckError("q(omega, phi) came out non-symmetric")
    sig = signature_of_symmetric(matrix, phi.backend)
    return SymBilinear(tuple(tuple(row) for row in matrix), sig, phi.backend)


# ---------------------------------------------------------------------------
# subspace profile


@dataclass(frozen=True)
class SubspaceProfile:
    """Dimensions of the four natural subspaces attached to a 3-form.

    dims = (dim ker phi, dim ker K, dim Im K, dim (Ann phi)^perp); whenever
    two of the four spaces share a dimension the profile also certifies that
    they are equal as subspaces.
    """

    dims: tuple[int, int, int, int]
    ker_phi: tuple
    ker_K: tuple
    im_K: tuple
    ann_perp: tuple
    equal_pairs: tuple

    def to_json(self) -> dict:
        return {"dims": list(self.dims), "equal_pairs": [list(p) for p in self.equal_pairs]}


def _spans_equal(a: list[Vector], b: list[Vector], backend: str) -> bool:
    if len(a) != len(b):
        return False
    if not a:
        return True
    if backend == RATIONAL:
        return rational.same_span(
            [list(v.components) for v in a], [list(v.components) for v in b]
        )
    stacked = a + b
    return span_dim(stacked, backend) == len(a)


def subspace_profile(phi) -> SubspaceProfile:
    form, _ = _split_density(phi)
    if form.grade != 3:
        raise GradeError("subspace_profile expects a 3-form")
    K = K_of(form)
    ker_phi = kernel(form)
    ker_K = K.kernel_basis()
    im_K = K.image_basis()
    _, perp = annihilator(form)
    spaces = {"ker_phi": ker_phi, "ker_K": ker_K, "im_K": im_K, "ann_perp": perp}
    names = list(spaces)
    equal = []
    for a in range(len(names)):
        for b in range(a + 1, len(names)):
            sa, sb = spaces[names[a]], spaces[names[b]]
            if len(sa) == len(sb):
                if not _spans_equal(sa, sb, form.backend):
                    raise InternalCheckError(
                        f"{names[a]} and {names[b]} share dimension {len(sa)} but differ"
                    )
                equal.append((names[a], names[b]))
    return SubspaceProfile(
        dims=(len(ker_phi), len(ker_K), len(im_K), len(perp)),
        ker_phi=tuple(ker_phi),
        ker_K=tuple(ker_K),
        im_K=tuple(im_K),
        ann_perp=tuple(perp),
        equal_pairs=tuple(equal),
    )
