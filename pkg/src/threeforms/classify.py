"""GL(V)- and Sp(V, omega)-orbit classification of 3-forms.

The GL orbit of a 3-form is decided by the sign of Q and, on the Q = 0
hypersurface, by the kernel dimension (0, 1, 3 or 6).  With a symplectic
form the primitive forms split further; the symplectic orbit is decided by
the same data plus the signature of q(omega, phi), and the stable orbits
carry a scale parameter mu.

Catalog sign conventions, all verified by computing q on both candidates:

* ``O-+``: mu(e135 - e146 - e236 - e245), q signature (0,6,0);
* ``O--``: mu(e135 - e146 + e236 + e245), q signature (0,2,4);
* ``O0+``: e146 + e236 + e245  (3,3,0);  ``O0-``: e146 - e236 - e245  (3,1,2);
* ``O1+``: (e13 - e24)^e5 = e135 - e245  (5,1,0);
  ``O1-``: (e13 + e24)^e5 = e135 + e245  (5,0,1).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from . import rational
from .exterior import (
    DIM,
    RANK_TOL,
    Form,
    LinearMap,
    Vector,
    kernel,
    pullback,
)
from .invariants import (
    DensityForm,
    F_of,
    InternalCheckError,
    K_of,
    NotPrimitiveError,
    Q_of,
    SymplecticFrame,
    lefschetz,
    q_of,
)
from .scalars import FLOAT, RATIONAL, as_scalar, format_scalar


class IndeterminateError(ValueError):
    """A float-backend classification too close to a stratum boundary.

    Raised instead of guessing whenever |Q| sits below tolerance while the
    kernel rank is numerically unstable.
    """


class GlOrbit(Enum):
    O_MINUS = "O-"
    O_PLUS = "O+"
    O_0 = "O0"
    O_1 = "O1"
    O_3 = "O3"
    O_6 = "O6"


class SpTag(Enum):
    O_MINUS_PLUS = "O-+"
    O_MINUS_MINUS = "O--"
    O_PLUS = "O+"
    O_0_PLUS = "O0+"
    O_0_MINUS = "O0-"
    O_1_PLUS = "O1+"
    O_1_MINUS = "O1-"
    O_3_PRIM = "O3"
    O_6 = "O6"


STABLE_SP_TAGS = (SpTag.O_MINUS_PLUS, SpTag.O_MINUS_MINUS, SpTag.O_PLUS)


@dataclass(frozen=True)
class SpOrbit:
    tag: SpTag
    mu: object = None  # positive Fraction or float for stable tags, else None

    def __post_init__(self):
        if self.tag in STABLE_SP_TAGS:
            if self.mu is None or not self.mu > 0:
                raise ValueError(f"{self.tag.value} requires a positive scale mu")
        elif self.mu is not None:
            raise ValueError(f"{self.tag.value} carries no scale parameter")

    def to_json(self) -> dict:
        return {
            "tag": self.tag.value,
            "mu": None if self.mu is None else format_scalar(self.mu),
        }


# ---------------------------------------------------------------------------
# normal-form catalog


def _form(backend, *signed):
    return Form(3, {idx: c for c, idx in signed}, backend)


def normal_form(tag, mu=None, backend: str = RATIONAL) -> Form:
    """The catalog normal form for a GL or Sp orbit tag."""
    if isinstance(tag, GlOrbit):
        if mu is not None:
            raise ValueError("GL normal forms carry no scale parameter")
        table = {
            GlOrbit.O_MINUS: [(1, (1, 3, 5)), (-1, (1, 4, 6)), (-1, (2, 3, 6)), (-1, (2, 4, 5))],
            GlOrbit.O_PLUS: [(1, (1, 2, 3)), (1, (4, 5, 6))],
            GlOrbit.O_0: [(1, (1, 4, 6)), (1, (2, 3, 6)), (1, (2, 4, 5))],
            GlOrbit.O_1: [(1, (1, 3, 5)), (1, (2, 4, 5))],
            GlOrbit.O_3: [(1, (1, 3, 5))],
            GlOrbit.O_6: [],
        }
        return _form(backend, *table[tag])
    if isinstance(tag, SpTag):
        if tag in STABLE_SP_TAGS:
            if mu is None:
                raise ValueError(f"{tag.value} needs a scale parameter mu")
            mu = as_scalar(mu, backend)
            if not mu > 0:
                raise ValueError("mu must be positive")
            base = {
                SpTag.O_MINUS_PLUS: [(1, (1, 3, 5)), (-1, (1, 4, 6)), (-1, (2, 3, 6)), (-1, (2, 4, 5))],
                SpTag.O_MINUS_MINUS: [(1, (1, 3, 5)), (-1, (1, 4, 6)), (1, (2, 3, 6)), (1, (2, 4, 5))],
                SpTag.O_PLUS: [(1, (1, 3, 5)), (1, (2, 4, 6))],
            }[tag]
            return _form(backend, *base).scale(mu)
        if mu is not None:
            raise ValueError(f"{tag.value} carries no scale parameter")
        table = {
            SpTag.O_0_PLUS: [(1, (1, 4, 6)), (1, (2, 3, 6)), (1, (2, 4, 5))],
            SpTag.O_0_MINUS: [(1, (1, 4, 6)), (-1, (2, 3, 6)), (-1, (2, 4, 5))],
            SpTag.O_1_PLUS: [(1, (1, 3, 5)), (-1, (2, 4, 5))],
            SpTag.O_1_MINUS: [(1, (1, 3, 5)), (1, (2, 4, 5))],
            SpTag.O_3_PRIM: [(1, (1, 3, 5))],
            SpTag.O_6: [],
        }
        return _form(backend, *table[tag])
    raise TypeError(f"unknown orbit tag {tag!r}")


def catalog_entries(backend: str = RATIONAL):
    """All twelve printed catalog rows as (tag, mu, form) triples (mu = 1)."""
    rows = []
    for tag in GlOrbit:
        rows.append((tag, None, normal_form(tag, backend=backend)))
    one = Fraction(1) if backend == RATIONAL else 1.0
    for tag in SpTag:
        mu = one if tag in STABLE_SP_TAGS else None
        rows.append((tag, mu, normal_form(tag, mu, backend=backend)))
    return rows


# ---------------------------------------------------------------------------
# classification


def _kernel_dim_checked(phi: Form, tol: float) -> int:
    """Kernel dimension; float backend raises when the rank is borderline."""
    if phi.backend == RATIONAL:
        return len(kernel(phi))
    if phi.is_zero():
        return DIM
    from .exterior import _contraction_matrix

    mat, _ = _contraction_matrix(phi)
    s = np.linalg.svd(np.array(mat, dtype=float), compute_uv=False)
    smax = max(float(s[0]) if len(s) else 0.0, 1e-300)
    cut = RANK_TOL * smax
    band = [v for v in s if cut / 30.0 < v < cut * 30.0]
    if band:
        raise IndeterminateError(
            f"kernel rank unstable: singular values {band} sit at the rank tolerance"
        )
    return DIM - int(np.sum(s > cut))


def gl_classify(phi: Form, tol: float = 1e-6) -> GlOrbit:
    """GL(V)-orbit from the sign of Q and the kernel dimension.

    Exact backend decisions are exact.  On the float backend |Q| below
    ``tol`` (scaled by |phi|^4) falls through to the kernel test, and a
    borderline kernel rank raises :class:`IndeterminateError` -- never a
    guess.
    """
    if phi.grade != 3:
        raise ValueError("gl_classify expects a 3-form")
    Q = Q_of(phi).value
    if phi.backend == RATIONAL:
        if Q > 0:
            return GlOrbit.O_PLUS
        if Q < 0:
            return GlOrbit.O_MINUS
    else:
        scale = max(1.0, phi.norm_inf()) ** 4
        if abs(Q) > tol * scale:
            return GlOrbit.O_PLUS if Q > 0 else GlOrbit.O_MINUS
    dim = _kernel_dim_checked(phi, tol)
    table = {0: GlOrbit.O_0, 1: GlOrbit.O_1, 3: GlOrbit.O_3, 6: GlOrbit.O_6}
    if dim not in table:
        raise InternalCheckError(f"impossible kernel dimension {dim} on the Q=0 stratum")
    return table[dim]


def mu_of(frame: SymplecticFrame, phi: Form, tag: SpTag):
    """Scale parameter of a stable symplectic orbit.

    mu^4 equals -Q/16 on the two O- families and Q/4 on O+; both constants
    are frozen from evaluating Q on the catalog forms at mu = 1 (Q = -16 and
    Q = 4 respectively).  Exact fourth roots are returned as Fractions when
    they exist, else as floats.
    """
    if tag not in STABLE_SP_TAGS:
        raise ValueError(f"mu is defined only on stable orbits, not {tag.value}")
    Qt = Q_of(phi).trivialize(frame)
    fourth = -Qt / 16 if tag in (SpTag.O_MINUS_PLUS, SpTag.O_MINUS_MINUS) else Qt / 4
    if not fourth > 0:
        raise ValueError(f"Q has the wrong sign for {tag.value}")
    if isinstance(fourth, Fraction):
        exact = rational.nth_root_exact(fourth, 4)
        if exact is not None:
            return exact
        return float(fourth) ** 0.25
    return float(fourth) ** 0.25


_STABLE_BY_SIGNATURE = {
    (0, 6, 0): SpTag.O_MINUS_PLUS,
    (0, 2, 4): SpTag.O_MINUS_MINUS,
    (0, 3, 3): SpTag.O_PLUS,
}

_DEGENERATE_BY_KERNEL_SIGNATURE = {
    (0, (3, 3, 0)): SpTag.O_0_PLUS,
    (0, (3, 1, 2)): SpTag.O_0_MINUS,
    (1, (5, 1, 0)): SpTag.O_1_PLUS,
    (1, (5, 0, 1)): SpTag.O_1_MINUS,
}


def sp_classify(frame: SymplecticFrame, phi: Form, tol: float = 1e-6) -> SpOrbit:
    """Sp(V, omega)-orbit of a primitive 3-form, with mu on stable orbits."""
    if phi.grade != 3:
        raise ValueError("sp_classify expects a 3-form")
    _, primitive = lefschetz(frame, phi)
    if not primitive:
        raise NotPrimitiveError("sp_classify requires an omega-primitive 3-form")
    if phi.is_zero():
        return SpOrbit(SpTag.O_6)
    gl = gl_classify(phi, tol)
    if gl in (GlOrbit.O_MINUS, GlOrbit.O_PLUS):
        sig = q_of(frame, phi).signature
        tag = _STABLE_BY_SIGNATURE.get(sig)
        if tag is None:
            raise InternalCheckError(f"stable form with unexpected q signature {sig}")
        return SpOrbit(tag, mu_of(frame, phi, tag))
    if gl == GlOrbit.O_3:
        return SpOrbit(SpTag.O_3_PRIM)
    if gl == GlOrbit.O_6:
        return SpOrbit(SpTag.O_6)
    kdim = 0 if gl == GlOrbit.O_0 else 1
    sig = q_of(frame, phi).signature
    tag = _DEGENERATE_BY_KERNEL_SIGNATURE.get((kdim, sig))
    if tag is None:
        raise InternalCheckError(
            f"degenerate form (ker dim {kdim}) with unexpected q signature {sig}"
        )
    return SpOrbit(tag)


# ---------------------------------------------------------------------------
# stabilizers of the O0 normal form (block description)


def stabilizer_candidate(a3, b3, c3, backend: str = RATIONAL) -> LinearMap:
    """Assemble the 6x6 map whose covector action has blocks (A 0 / B C).

    In the Darboux covector basis (dx1,dx2,dx3,dy1,dy2,dy3) the action is
    ``dx^j -> sum_i A_ij dx^i + B_ij dy^i`` and ``dy^j -> sum_i C_ij dy^i``;
    rows of the stored matrix are covector images in e-coordinates
    (dx^j = e^{2j-1}, dy^j = e^{2j}).
    """
    m = [[as_scalar(0, backend) for _ in range(DIM)] for _ in range(DIM)]
    for j in range(3):
        for i in range(3):
            m[2 * j][2 * i] = as_scalar(a3[i][j], backend)
            m[2 * j][2 * i + 1] = as_scalar(b3[i][j], backend)
            m[2 * j + 1][2 * i + 1] = as_scalar(c3[i][j], backend)
    return LinearMap(m, backend)


def phi_stabilizer_element(b3, c3) -> LinearMap:
    """Stabilizer of the O0 normal form from the (B, C) parametrization.

    C is any invertible rational 3x3 matrix and B any 3x3 matrix with
    Tr(B C^-1) = 0; A is forced to C/det C.  det A * det^2 C = 1 holds
    automatically.
    """
    c = [[Fraction(x) for x in row] for row in c3]
    b = [[Fraction(x) for x in row] for row in b3]
    dc = rational.det(c)
    if dc == 0:
        raise ValueError("C must be invertible")
    cinv = rational.inverse(c)
    trace = sum(rational.matmul(b, cinv)[i][i] for i in range(3))
    if trace != 0:
        raise ValueError(f"Tr(B C^-1) = {trace} != 0")
    a = [[x / dc for x in row] for row in c]
    return stabilizer_candidate(a, b, c)


def traceless_against(b3, c3):
    """Adjust B so that Tr(B C^-1) vanishes (projection along C)."""
    c = [[Fraction(x) for x in row] for row in c3]
    b = [[Fraction(x) for x in row] for row in b3]
    cinv = rational.inverse(c)
    trace = sum(rational.matmul(b, cinv)[i][i] for i in range(3))
    return [[b[i][j] - trace * c[i][j] / 3 for j in range(3)] for i in range(3)]


def is_stabilizer(m: LinearMap, phi: Form) -> bool:
    """Whether the pullback of phi under m is exactly phi."""
    return pullback(m, phi) == phi


def stabilizes_F(m: LinearMap, phi: Form) -> bool:
    """Whether m stabilizes F(phi) including its volume-density factor."""
    F = F_of(phi)
    moved = pullback(m, F.form).scale(m.det() ** F.density)
    return moved == F.form


# ---------------------------------------------------------------------------
# how F moves orbits


def verify_F_orbit(frame: SymplecticFrame, phi: Form, tol: float = 1e-6):
    """(orbit of phi, orbit of the trivialized F(phi)).

    Callers assert the mapping table: the two stable families go to
    themselves with mu -> 4 mu^3 (O- families) and mu -> 2 mu^3 (O+), the
    two O0 orbits land on the primitive O3 orbit, and everything degenerate
    maps to zero.
    """
    orbit = sp_classify(frame, phi, tol)
    F_triv = F_of(phi).trivialize(frame)
    return orbit, sp_classify(frame, F_triv, tol)


# ---------------------------------------------------------------------------
# result schema


def classification_json(frame: SymplecticFrame, phi: Form, tol: float = 1e-6) -> dict:
    """The shared classification result document for one 3-form."""
    from .invariants import subspace_profile

    gl = gl_classify(phi, tol)
    out = {
        "gl": gl.value,
        "sp": None,
        "Q": format_scalar(Q_of(phi).trivialize(frame)),
        "dims": None,
        "signature": None,
    }
    profile = subspace_profile(phi)
    out["dims"] = list(profile.dims)
    _, primitive = lefschetz(frame, phi)
    if primitive:
        out["sp"] = sp_classify(frame, phi, tol).to_json()
        out["signature"] = list(q_of(frame, phi).signature)
    return out
